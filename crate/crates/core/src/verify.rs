//! Randomized property suites over the whole library.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matlib::{ComplexMatrix, DensityMatrix};
use crate::measgeo::{full_basis, spin_diagram, type_ii_basis, type_iii_basis, MeasurementParams};
use crate::models::{d_closed, i2_closed};
use crate::optim::OptimizerConfig;
use crate::qmeasures::{apply_measurement, commutator_with_parity, measure_given, vn_entropy, Measure};
use crate::spinops::composite_parity;
use crate::sweep::{aligned_comparison, interior_grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Diagrams,
    Parity,
    Measures,
    ClosedForms,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Self::Diagrams, Self::Parity, Self::Measures, Self::ClosedForms];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Diagrams => "diagrams",
            Self::Parity => "parity",
            Self::Measures => "measures",
            Self::ClosedForms => "closedforms",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Format(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub draws: usize,
    pub seed: u64,
    /// Grid size for the closed-form comparison.
    pub points: usize,
    pub cfg: OptimizerConfig,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { draws: 1000, seed: 0, points: 10, cfg: OptimizerConfig::default() }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub checks: usize,
    pub failures: usize,
    /// Largest violation seen, in the units of each property's tolerance.
    pub worst: f64,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        Self { name: name.into(), ..Default::default() }
    }

    fn check(&mut self, ok: bool, excess: f64, note: impl FnOnce() -> String) {
        self.checks += 1;
        self.worst = self.worst.max(excess);
        if !ok {
            self.failures += 1;
            if self.notes.len() < 10 {
                self.notes.push(note());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

pub fn random_params(rng: &mut impl Rng) -> MeasurementParams {
    MeasurementParams::from_array([
        rng.gen_range(0.0..=FRAC_PI_4),
        rng.gen_range(0.0..=FRAC_PI_4),
        rng.gen_range(-FRAC_PI_2..FRAC_PI_2),
        rng.gen_range(0.0..2.0 * PI),
        rng.gen_range(0.0..PI),
        rng.gen_range(0.0..2.0 * PI),
    ])
}

/// Random mixed state on `C^da ⊗ C^3` of rank at most `rank`.
pub fn random_state(rng: &mut impl Rng, da: usize, rank: usize) -> DensityMatrix {
    let n = da * 3;
    let comps: Vec<(f64, Vec<Complex64>)> = (0..rank.max(1))
        .map(|_| {
            let v = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            (rng.gen_range(0.05..1.0), v)
        })
        .collect();
    DensityMatrix::mixture(&comps, (da, 3)).expect("positive weights")
}

/// Random two-qutrit state commuting with the two-site parity.
pub fn random_parity_state(rng: &mut impl Rng) -> DensityMatrix {
    let p = composite_parity(&[1.0, 1.0]).expect("spin 1");
    let rank = rng.gen_range(1..=9);
    let rho = random_state(rng, 3, rank);
    let sym = (rho.matrix() + &p.conjugate(rho.matrix())).scale_real(0.5);
    DensityMatrix::new(sym, (3, 3)).expect("parity average of a state is a state")
}

fn diagrams(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut r = SuiteReport::new("diagrams");
    for _ in 0..opts.draws {
        let p = random_params(&mut rng);
        let d = spin_diagram(&full_basis(&p))?;
        let s = d.sum();
        let zero_sum = s.iter().map(|x| x.abs()).fold(0.0, f64::max);
        r.check(zero_sum < 1e-10, zero_sum / 1e-10, || format!("sum {s:?} at {p:?}"));
        let cop = d.coplanarity_residual();
        r.check(cop < 1e-10, cop / 1e-10, || format!("det {cop:e} at {p:?}"));
        let dot = d.max_pairwise_dot();
        r.check(dot <= 1e-10, dot.max(0.0) / 1e-10, || format!("dot {dot:e} at {p:?}"));
        let excess = d.total_length_sq - 8.0 / 3.0;
        r.check(excess <= 1e-9, excess.max(0.0) / 1e-9, || format!("L^2 {} at {p:?}", d.total_length_sq));
    }
    Ok(r)
}

fn parity(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
    let p = composite_parity(&[1.0, 1.0])?;
    let mut r = SuiteReport::new("parity");
    for k in 0..opts.draws {
        let rho = random_parity_state(&mut rng);
        let alpha = rng.gen_range(0.0..=FRAC_PI_4);
        let phi = rng.gen_range(0.0..2.0 * PI);
        let b = if k % 2 == 0 {
            type_ii_basis(alpha, phi)
        } else {
            type_iii_basis(alpha, rng.gen_range(-FRAC_PI_2..FRAC_PI_2), phi)
        };
        let c = commutator_with_parity(apply_measurement(&rho, &b)?.matrix(), &p);
        r.check(c < 1e-10, c / 1e-10, || format!("||[rho', P]|| = {c:e}"));
    }
    Ok(r)
}

fn measures(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(2));
    let mut r = SuiteReport::new("measures");
    for _ in 0..opts.draws {
        let da = rng.gen_range(1..=3);
        let rank = rng.gen_range(1..=3 * da);
        let rho = random_state(&mut rng, da, rank);
        let b = full_basis(&random_params(&mut rng));
        for m in [Measure::D, Measure::I1, Measure::I2] {
            let v = measure_given(&rho, &b, &m)?.value;
            r.check(v >= -1e-10, (-v).max(0.0) / 1e-10, || format!("{} = {v:e}", m.name()));
        }
        let rho_prime = apply_measurement(&rho, &b)?;
        let loss = rho.purity() - rho_prime.purity();
        r.check(loss >= -1e-12, (-loss).max(0.0) / 1e-12, || format!("purity gain {:e}", -loss));
        let gain = vn_entropy(&rho_prime)? - vn_entropy(&rho)?;
        r.check(gain >= -1e-10, (-gain).max(0.0) / 1e-10, || format!("entropy loss {:e}", -gain));
    }
    Ok(r)
}

/// Closed forms against the numerical minimum over all families.
/// Disagreements beyond `1e-6` are listed as errata.
fn closed_forms(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("closedforms");
    for theta in interior_grid(opts.points) {
        for (m, closed) in [(Measure::D, d_closed(theta)), (Measure::I2, i2_closed(theta))] {
            let numeric = aligned_comparison(theta, m, &opts.cfg)?.best_value;
            let gap = (numeric - closed).abs();
            r.check(gap <= 1e-6, gap / 1e-6, || {
                format!("errata: {} closed form {closed:.12e} vs numeric {numeric:.12e} at theta={theta:.6}", m.name())
            });
        }
    }
    Ok(r)
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    match suite {
        Suite::Diagrams => diagrams(opts),
        Suite::Parity => parity(opts),
        Suite::Measures => measures(opts),
        Suite::ClosedForms => closed_forms(opts),
    }
}

/// Hermitian random matrix with entries in the unit square.
pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).hermitian_part()
}
