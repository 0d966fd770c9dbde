//! Post-measurement states, entropies and the correlation measures at a
//! fixed local measurement on subsystem B.
//!
//! Conventions: logarithms are base 2, so `D` and `I₁` are in bits. `I₂` is
//! reported as `2·Tr(ρ² − ρ′²)`, which is 1 for a maximally entangled qubit
//! pair; the unscaled `Tr(ρ² − ρ′²)` is kept alongside as `raw`.

use std::f64::consts::LN_2;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matlib::{
    commutator, hermitian_eig, hermitian_eigenvalues, partial_trace, partial_trace_matrix, ComplexMatrix, DensityMatrix,
    Subsystem, ZERO,
};
use crate::measgeo::MeasurementBasis;
use crate::spinops::ParityOperator;

/// Eigenvalues of `ρ′` at or below this are treated as its kernel when
/// applying `f′`.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// Values in `[-NEGATIVE_SLACK, 0)` are clamped to zero.
pub const NEGATIVE_SLACK: f64 = 1e-10;

const COMMUTE_TOL: f64 = 1e-10;
const KERNEL_OVERLAP_TOL: f64 = 1e-8;

/// Concave `f` with `f(0) = f(1) = 0`, defining `S_f(ρ) = Tr f(ρ)`.
#[derive(Clone, Copy)]
pub struct EntropyFunctional {
    name: &'static str,
    f: fn(f64) -> f64,
    fprime: fn(f64) -> f64,
}

fn vn_f(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

fn vn_fprime(x: f64) -> f64 {
    -x.log2() - 1.0 / LN_2
}

fn linear_f(x: f64) -> f64 {
    x * (1.0 - x)
}

fn linear_fprime(x: f64) -> f64 {
    1.0 - 2.0 * x
}

impl EntropyFunctional {
    /// Checks `f(0) = f(1) = 0` and midpoint concavity on a fixed grid.
    pub fn new(name: &'static str, f: fn(f64) -> f64, fprime: fn(f64) -> f64) -> Result<Self> {
        if f(0.0) != 0.0 || f(1.0) != 0.0 {
            return Err(Error::Domain(format!("entropy functional '{name}' must vanish at 0 and 1")));
        }
        let grid: Vec<f64> = (1..20).map(|k| k as f64 / 20.0).collect();
        for &a in &grid {
            for &b in &grid {
                if b <= a {
                    continue;
                }
                if f((a + b) / 2.0) <= (f(a) + f(b)) / 2.0 {
                    return Err(Error::Domain(format!("entropy functional '{name}' is not strictly concave")));
                }
            }
        }
        Ok(Self { name, f, fprime })
    }

    /// `f(x) = −x log₂ x`.
    pub fn von_neumann() -> Self {
        Self { name: "von_neumann", f: vn_f, fprime: vn_fprime }
    }

    /// `f(x) = x(1 − x)`, so `S_f(ρ) = 1 − Tr ρ²`.
    pub fn linear() -> Self {
        Self { name: "linear", f: linear_f, fprime: linear_fprime }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.fprime)(x)
    }

    /// `Σ_λ f(λ)` over a spectrum, with the PSD noise band clamped.
    pub fn trace_of(&self, spectrum: &[f64]) -> f64 {
        spectrum.iter().map(|&x| (self.f)(x.max(0.0))).sum()
    }
}

impl fmt::Debug for EntropyFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EntropyFunctional({})", self.name)
    }
}

/// Quantity minimized over local measurements on B.
#[derive(Clone, Copy, Debug)]
pub enum Measure {
    /// Quantum discord.
    D,
    /// Von Neumann information deficit.
    I1,
    /// Quadratic information deficit, normalized.
    I2,
    /// Generalized deficit `S_f(ρ′) − S_f(ρ)`.
    If(EntropyFunctional),
}

impl Measure {
    pub fn name(&self) -> String {
        match self {
            Self::D => "D".into(),
            Self::I1 => "I1".into(),
            Self::I2 => "I2".into(),
            Self::If(f) => format!("I_{}", f.name()),
        }
    }

    /// Factor from the raw trace expression to the reported value.
    pub fn scale(&self) -> f64 {
        match self {
            Self::I2 => 2.0,
            _ => 1.0,
        }
    }

    pub fn functional(&self) -> EntropyFunctional {
        match self {
            Self::D | Self::I1 => EntropyFunctional::von_neumann(),
            Self::I2 => EntropyFunctional::linear(),
            Self::If(f) => *f,
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "D" => Ok(Self::D),
            "I1" => Ok(Self::I1),
            "I2" => Ok(Self::I2),
            _ => Err(Error::Format(format!("unknown measure '{s}' (expected D, I1 or I2)"))),
        }
    }
}

/// A measure evaluated at one measurement.
#[derive(Clone, Debug)]
pub struct MeasureAtM {
    /// Reported value (bits for `D`, `I₁`; normalized for `I₂`).
    pub value: f64,
    /// Unscaled value; differs from `value` only for `I₂`.
    pub raw: f64,
    pub rho_prime: DensityMatrix,
}

#[derive(Clone, Debug)]
pub struct StationarityResidual {
    /// Anti-Hermitian operator on B, in the standard basis.
    pub delta: ComplexMatrix,
    /// Frobenius norm of `delta`.
    pub norm: f64,
    /// `ρ` has weight on the numerical kernel of `ρ′`, where `f′` was set
    /// to zero.
    pub kernel_overlap: bool,
}

impl StationarityResidual {
    /// `U† Δ U`: the residual in the measured basis.
    pub fn in_basis(&self, b: &MeasurementBasis) -> ComplexMatrix {
        self.delta.conjugate_by(&b.unitary().adjoint()).expect("basis dimension checked on construction")
    }
}

fn check_b(rho: &DensityMatrix, b: &MeasurementBasis) -> Result<()> {
    if rho.dims().1 != b.dim() {
        return Err(Error::Dimension(format!(
            "measurement of dimension {} on a subsystem of dimension {}",
            b.dim(),
            rho.dims().1
        )));
    }
    Ok(())
}

/// Blocks `σ_mn = ⟨u_m|ρ|u_n⟩_B` (operators on A) for the columns `u_m` of
/// `u`. Returned in row-major order `m·d_B + n`; only the requested pairs
/// are filled when `diagonal_only` is set.
pub(crate) fn b_blocks(rho: &ComplexMatrix, dims: (usize, usize), u: &ComplexMatrix, diagonal_only: bool) -> Vec<ComplexMatrix> {
    let (da, db) = dims;
    // t[(a,i),(a',n)] = Σ_j ρ[(a,i),(a',j)] u[j,n]
    let mut t = vec![ZERO; da * db * da * db];
    for r in 0..da * db {
        for a2 in 0..da {
            for n in 0..db {
                let mut acc = ZERO;
                for j in 0..db {
                    acc += rho[(r, a2 * db + j)] * u[(j, n)];
                }
                t[(r * da + a2) * db + n] = acc;
            }
        }
    }
    let mut out = Vec::with_capacity(db * db);
    for m in 0..db {
        for n in 0..db {
            if diagonal_only && m != n {
                out.push(ComplexMatrix::zeros(0, 0));
                continue;
            }
            out.push(ComplexMatrix::from_fn(da, da, |a, a2| {
                let mut acc = ZERO;
                for i in 0..db {
                    acc += u[(i, m)].conj() * t[((a * db + i) * da + a2) * db + n];
                }
                acc
            }));
        }
    }
    out
}

/// `ρ′ = Σ_m (I ⊗ Π_m) ρ (I ⊗ Π_m)`.
pub fn apply_measurement(rho: &DensityMatrix, b: &MeasurementBasis) -> Result<DensityMatrix> {
    check_b(rho, b)?;
    let dims = rho.dims();
    let (da, db) = dims;
    let u = b.unitary();
    let blocks = b_blocks(rho.matrix(), dims, u, true);
    let mut out = ComplexMatrix::zeros(da * db, da * db);
    for m in 0..db {
        let sigma = &blocks[m * db + m];
        for a in 0..da {
            for a2 in 0..da {
                let s = sigma[(a, a2)];
                if s == ZERO {
                    continue;
                }
                for i in 0..db {
                    for j in 0..db {
                        out[(a * db + i, a2 * db + j)] += s * u[(i, m)] * u[(j, m)].conj();
                    }
                }
            }
        }
    }
    Ok(DensityMatrix::new_unchecked(out.hermitian_part(), dims))
}

/// `−Tr ρ log₂ ρ`.
pub fn vn_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(EntropyFunctional::von_neumann().trace_of(&rho.spectrum()?).max(0.0))
}

/// `Tr f(ρ)`.
pub fn f_entropy(rho: &DensityMatrix, f: &EntropyFunctional) -> Result<f64> {
    Ok(f.trace_of(&rho.spectrum()?))
}

fn clamp(value: f64) -> f64 {
    if (-NEGATIVE_SLACK..0.0).contains(&value) {
        0.0
    } else {
        value
    }
}

/// `[S(ρ′) − S(ρ′_B)] − [S(ρ) − S(ρ_B)]` at a fixed measurement.
pub fn discord_given(rho: &DensityMatrix, b: &MeasurementBasis) -> Result<MeasureAtM> {
    check_b(rho, b)?;
    let rho_prime = apply_measurement(rho, b)?;
    let rho_b = partial_trace(rho, Subsystem::B)?;
    let rho_prime_b = partial_trace(&rho_prime, Subsystem::B)?;
    let value = (vn_entropy(&rho_prime)? - vn_entropy(&rho_prime_b)?) - (vn_entropy(rho)? - vn_entropy(&rho_b)?);
    let value = clamp(value);
    Ok(MeasureAtM { value, raw: value, rho_prime })
}

/// `S_f(ρ′) − S_f(ρ)` at a fixed measurement. For `f = linear` this is
/// `Tr(ρ² − ρ′²)`, the unscaled `I₂`.
pub fn deficit_given(rho: &DensityMatrix, b: &MeasurementBasis, f: &EntropyFunctional) -> Result<MeasureAtM> {
    check_b(rho, b)?;
    let rho_prime = apply_measurement(rho, b)?;
    let value = clamp(f_entropy(&rho_prime, f)? - f_entropy(rho, f)?);
    Ok(MeasureAtM { value, raw: value, rho_prime })
}

/// Any [`Measure`] at a fixed measurement, in reported units.
pub fn measure_given(rho: &DensityMatrix, b: &MeasurementBasis, measure: &Measure) -> Result<MeasureAtM> {
    let mut out = match measure {
        Measure::D => discord_given(rho, b)?,
        other => deficit_given(rho, b, &other.functional())?,
    };
    out.value = out.raw * measure.scale();
    Ok(out)
}

fn kernel_overlap(rho: &ComplexMatrix, rho_prime: &ComplexMatrix) -> Result<bool> {
    let eig = hermitian_eig(rho_prime)?;
    let kernel = eig.map(|x| if x > SUPPORT_CUTOFF { 0.0 } else { 1.0 });
    Ok(rho.matmul(&kernel)?.frobenius_norm() > KERNEL_OVERLAP_TOL)
}

fn global_term(rho: &DensityMatrix, rho_prime: &DensityMatrix, f: &EntropyFunctional) -> Result<(ComplexMatrix, bool)> {
    let fp = hermitian_eig(rho_prime.matrix())?.map(|x| if x > SUPPORT_CUTOFF { f.derivative(x) } else { 0.0 });
    let c = commutator(&fp, rho.matrix())?;
    let delta = partial_trace_matrix(&c, rho.dims(), Subsystem::B)?;
    Ok((delta, kernel_overlap(rho.matrix(), rho_prime.matrix())?))
}

fn residual(delta: ComplexMatrix, kernel_overlap: bool) -> StationarityResidual {
    // Drop the Hermitian rounding component.
    let delta = (&delta - &delta.adjoint()).scale_real(0.5);
    let norm = delta.frobenius_norm();
    StationarityResidual { delta, norm, kernel_overlap }
}

/// `Δ_f = Tr_A [f′(ρ′), ρ]`. On the kernel of `ρ′`, `f′` is taken as zero.
pub fn stationarity_f(rho: &DensityMatrix, b: &MeasurementBasis, f: &EntropyFunctional) -> Result<StationarityResidual> {
    check_b(rho, b)?;
    let rho_prime = apply_measurement(rho, b)?;
    let (delta, overlap) = global_term(rho, &rho_prime, f)?;
    Ok(residual(delta, overlap))
}

/// `Δ_D = Tr_A [f′(ρ′), ρ] − [f′(ρ′_B), ρ_B]` with `f(x) = −x log₂ x`.
pub fn stationarity_d(rho: &DensityMatrix, b: &MeasurementBasis) -> Result<StationarityResidual> {
    check_b(rho, b)?;
    let f = EntropyFunctional::von_neumann();
    let rho_prime = apply_measurement(rho, b)?;
    let (global, overlap) = global_term(rho, &rho_prime, &f)?;
    let rho_b = partial_trace(rho, Subsystem::B)?;
    let rho_prime_b = partial_trace(&rho_prime, Subsystem::B)?;
    let fp_b = hermitian_eig(rho_prime_b.matrix())?.map(|x| if x > SUPPORT_CUTOFF { f.derivative(x) } else { 0.0 });
    let local = commutator(&fp_b, rho_b.matrix())?;
    let local_overlap = kernel_overlap(rho_b.matrix(), rho_prime_b.matrix())?;
    Ok(residual(global.try_sub(&local)?, overlap || local_overlap))
}

/// The residual matching `measure`: `Δ_D` for discord, `Δ_f` otherwise.
/// Scaled like the measure.
pub fn stationarity_for(rho: &DensityMatrix, b: &MeasurementBasis, measure: &Measure) -> Result<StationarityResidual> {
    let mut r = match measure {
        Measure::D => stationarity_d(rho, b)?,
        other => stationarity_f(rho, b, &other.functional())?,
    };
    let s = measure.scale();
    if s != 1.0 {
        r.delta = r.delta.scale_real(s);
        r.norm *= s;
    }
    Ok(r)
}

/// `‖[ρ, P]‖_F < 1e-10`.
pub fn parity_invariance_check(rho: &DensityMatrix, p: &ParityOperator) -> Result<bool> {
    if p.dim() != rho.dim() {
        return Err(Error::Dimension(format!("parity of dimension {} on a state of dimension {}", p.dim(), rho.dim())));
    }
    Ok(commutator_with_parity(rho.matrix(), p) < COMMUTE_TOL)
}

/// `‖[M, P]‖_F` for a diagonal parity `P`.
pub fn commutator_with_parity(m: &ComplexMatrix, p: &ParityOperator) -> f64 {
    let s = p.signs();
    let mut acc = 0.0;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if s[i] != s[j] {
                acc += 4.0 * m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Measure as a function of the measurement unitary alone, with the
/// state-dependent constants precomputed. Works on the `d_B` diagonal
/// blocks `σ_m = ⟨u_m|ρ|u_m⟩_B`, so each call diagonalizes `d_A × d_A`
/// matrices only.
#[derive(Clone, Debug)]
pub struct Objective {
    rho: ComplexMatrix,
    dims: (usize, usize),
    measure: Measure,
    /// `S(ρ) − S(ρ_B)` for `D`, `S_f(ρ)` for deficits.
    offset: f64,
    rho_b: ComplexMatrix,
}

impl Objective {
    pub fn new(rho: &DensityMatrix, measure: Measure) -> Result<Self> {
        let offset = match &measure {
            Measure::D => vn_entropy(rho)? - vn_entropy(&partial_trace(rho, Subsystem::B)?)?,
            Measure::I2 => 0.0,
            other => f_entropy(rho, &other.functional())?,
        };
        let rho_b = partial_trace_matrix(rho.matrix(), rho.dims(), Subsystem::B)?;
        Ok(Self { rho: rho.matrix().clone(), dims: rho.dims(), measure, offset, rho_b })
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    /// Reported value of the measure at the basis given by the columns of
    /// `u`. Negative noise is not clamped.
    pub fn eval(&self, u: &ComplexMatrix) -> Result<f64> {
        let db = self.dims.1;
        if u.rows() != db || u.cols() != db {
            return Err(Error::Dimension(format!("{}x{} unitary for d_B = {db}", u.rows(), u.cols())));
        }
        match self.measure {
            Measure::I2 => {
                // Tr ρ² − Tr ρ′² = Σ_{m≠n} ‖σ_mn‖², free of cancellation.
                let blocks = b_blocks(&self.rho, self.dims, u, false);
                let mut off = 0.0;
                for m in 0..db {
                    for n in 0..db {
                        if m != n {
                            off += blocks[m * db + n].as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>();
                        }
                    }
                }
                Ok(2.0 * off)
            }
            Measure::D => {
                let blocks = b_blocks(&self.rho, self.dims, u, true);
                let f = EntropyFunctional::von_neumann();
                let mut s_prime = 0.0;
                let mut s_prime_b = 0.0;
                for m in 0..db {
                    let sigma = &blocks[m * db + m];
                    s_prime += f.trace_of(&hermitian_eigenvalues(&sigma.hermitian_part())?);
                    s_prime_b += f.eval(sigma.trace().re.max(0.0));
                }
                Ok(s_prime - s_prime_b - self.offset)
            }
            other => {
                let f = other.functional();
                let blocks = b_blocks(&self.rho, self.dims, u, true);
                let mut s_prime = 0.0;
                for m in 0..db {
                    s_prime += f.trace_of(&hermitian_eigenvalues(&blocks[m * db + m].hermitian_part())?);
                }
                Ok(s_prime - self.offset)
            }
        }
    }
}

impl Objective {
    /// Stationarity operator at the basis `u`, scaled like the measure:
    /// `Δ_D` for discord, `Δ_f` otherwise. Built blockwise from
    /// `f′(ρ′) = Σ_m f′(σ_m) ⊗ |u_m⟩⟨u_m|`.
    ///
    /// Moving the basis along `U → (1 + ε X)U` changes the measure by
    /// `ε·Re Tr(X Δ)`.
    pub fn delta(&self, u: &ComplexMatrix) -> Result<ComplexMatrix> {
        let (da, db) = self.dims;
        if u.rows() != db || u.cols() != db {
            return Err(Error::Dimension(format!("{}x{} unitary for d_B = {db}", u.rows(), u.cols())));
        }
        let f = self.measure.functional();
        let blocks = b_blocks(&self.rho, self.dims, u, true);
        let mut delta = ComplexMatrix::zeros(db, db);
        let mut local = ComplexMatrix::zeros(db, db);
        for m in 0..db {
            let sigma = blocks[m * db + m].hermitian_part();
            let fm = hermitian_eig(&sigma)?.map(|x| if x > SUPPORT_CUTOFF { f.derivative(x) } else { 0.0 });
            // R_m = Tr_A[(F_m ⊗ I) ρ]
            let r = ComplexMatrix::from_fn(db, db, |i, j| {
                let mut acc = ZERO;
                for a in 0..da {
                    for a2 in 0..da {
                        acc += fm[(a, a2)] * self.rho[(a2 * db + i, a * db + j)];
                    }
                }
                acc
            });
            let um = u.column(m);
            let pm = ComplexMatrix::outer(&um, &um);
            delta = &delta + &(&(&pm * &r) - &(&r.adjoint() * &pm));
            if let Measure::D = self.measure {
                let p = sigma.trace().re;
                if p > SUPPORT_CUTOFF {
                    local = &local + &pm.scale_real(f.derivative(p));
                }
            }
        }
        if let Measure::D = self.measure {
            delta = &delta - &commutator(&local, &self.rho_b)?;
        }
        Ok(delta.scale_real(self.measure.scale()))
    }
}

/// Purity of an arbitrary state matrix, for tests and diagnostics.
pub fn purity(m: &ComplexMatrix) -> f64 {
    m.as_slice().iter().map(Complex64::norm_sqr).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlib::kron_vec;
    use crate::measgeo::{full_basis, intrinsic_basis, spin_basis, type_ii_basis, MeasurementParams};
    use crate::spinops::{composite_parity, coherent_state};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn basis_vec(d: usize, k: usize) -> Vec<Complex64> {
        (0..d).map(|i| if i == k { c(1.0) } else { ZERO }).collect()
    }

    /// (|1,1⟩ + |−1,−1⟩)/√2 on two qutrits.
    fn bell() -> DensityMatrix {
        let mut psi = vec![ZERO; 9];
        psi[0] = c(1.0);
        psi[8] = c(1.0);
        DensityMatrix::from_pure(&psi, (3, 3)).unwrap()
    }

    pub(crate) fn random_state(rng: &mut impl Rng, da: usize, rank: usize) -> DensityMatrix {
        let n = da * 3;
        let comps: Vec<(f64, Vec<Complex64>)> = (0..rank)
            .map(|_| {
                let v = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
                (rng.gen_range(0.1..1.0), v)
            })
            .collect();
        DensityMatrix::mixture(&comps, (da, 3)).unwrap()
    }

    fn random_params(rng: &mut impl Rng) -> MeasurementParams {
        MeasurementParams::from_array([
            rng.gen_range(0.0..std::f64::consts::FRAC_PI_4),
            rng.gen_range(0.0..std::f64::consts::FRAC_PI_4),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(0.0..std::f64::consts::TAU),
            rng.gen_range(0.0..std::f64::consts::TAU),
            rng.gen_range(0.0..std::f64::consts::TAU),
        ])
    }

    fn aligned(theta: f64) -> DensityMatrix {
        let up = coherent_state(1.0, theta).unwrap();
        let down = coherent_state(1.0, -theta).unwrap();
        DensityMatrix::mixture(&[(0.5, kron_vec(&up, &up)), (0.5, kron_vec(&down, &down))], (3, 3)).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let pure = DensityMatrix::from_pure(&basis_vec(3, 1), (3, 1)).unwrap();
        assert_abs_diff_eq!(vn_entropy(&pure).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vn_entropy(&DensityMatrix::maximally_mixed(3)).unwrap(), 3f64.log2(), epsilon = 1e-12);
        let q = DensityMatrix::new(ComplexMatrix::from_real_diag(&[0.25, 0.75]), (2, 1)).unwrap();
        let h = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
        assert_abs_diff_eq!(vn_entropy(&q).unwrap(), h, epsilon = 1e-12);
        assert_abs_diff_eq!(h, 0.811278124459, epsilon = 1e-11);

        let lin = EntropyFunctional::linear();
        assert_abs_diff_eq!(f_entropy(&pure, &lin).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f_entropy(&DensityMatrix::maximally_mixed(3), &lin).unwrap(), 2.0 / 3.0, epsilon = 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = random_state(&mut rng, 3, 4);
        assert_abs_diff_eq!(f_entropy(&r, &lin).unwrap(), 1.0 - r.purity(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            f_entropy(&r, &EntropyFunctional::von_neumann()).unwrap(),
            vn_entropy(&r).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn functional_validation() {
        assert!(EntropyFunctional::new("vn", vn_f, vn_fprime).is_ok());
        assert!(EntropyFunctional::new("lin", linear_f, linear_fprime).is_ok());
        fn shifted(x: f64) -> f64 {
            x * (1.0 - x) + 0.1
        }
        fn convex(x: f64) -> f64 {
            -x * (1.0 - x)
        }
        assert!(EntropyFunctional::new("bad", shifted, linear_fprime).is_err());
        assert!(EntropyFunctional::new("bad", convex, linear_fprime).is_err());
    }

    #[test]
    fn bell_anchor_values() {
        let rho = bell();
        let b = intrinsic_basis(0.0, 0.0, 0.0);
        assert_abs_diff_eq!(discord_given(&rho, &b).unwrap().value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(measure_given(&rho, &b, &Measure::I1).unwrap().value, 1.0, epsilon = 1e-12);
        let i2 = measure_given(&rho, &b, &Measure::I2).unwrap();
        assert_abs_diff_eq!(i2.value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(i2.raw, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn measured_states_are_fixed_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_state(&mut rng, 3, 3);
        let b = full_basis(&random_params(&mut rng));
        let once = apply_measurement(&rho, &b).unwrap();
        let twice = apply_measurement(&once, &b).unwrap();
        assert!(once.matrix().max_abs_diff(twice.matrix()) < 1e-12);
        assert_abs_diff_eq!(discord_given(&once, &b).unwrap().value, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            deficit_given(&once, &b, &EntropyFunctional::linear()).unwrap().value,
            0.0,
            epsilon = 1e-12
        );
        let r = stationarity_f(&once, &b, &EntropyFunctional::von_neumann()).unwrap();
        assert!(r.norm < 1e-10);
        assert!(stationarity_d(&once, &b).unwrap().norm < 1e-10);

        // ρ_A ⊗ |1⟩⟨1| in the standard basis.
        let rho_a = random_state(&mut rng, 1, 2);
        let rho_a = partial_trace(&rho_a, Subsystem::B).unwrap();
        let prod = DensityMatrix::product(&rho_a, &DensityMatrix::from_pure(&basis_vec(3, 0), (3, 1)).unwrap());
        let prod = DensityMatrix::new(prod.matrix().clone(), (3, 3)).unwrap();
        let out = apply_measurement(&prod, &intrinsic_basis(0.0, 0.0, 0.0)).unwrap();
        assert!(out.matrix().max_abs_diff(prod.matrix()) < 1e-14);
    }

    #[test]
    fn measurement_matches_projector_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_state(&mut rng, 2, 3);
        let b = full_basis(&random_params(&mut rng));
        let mut direct = ComplexMatrix::zeros(6, 6);
        for p in b.projectors() {
            let big = crate::matlib::kron(&ComplexMatrix::identity(2), p);
            direct = &direct + &(&(&big * rho.matrix()) * &big);
        }
        assert!(apply_measurement(&rho, &b).unwrap().matrix().max_abs_diff(&direct) < 1e-13);
    }

    #[test]
    fn pure_state_discord_is_entanglement_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi: Vec<Complex64> = (0..9).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let rho = DensityMatrix::from_pure(&psi, (3, 3)).unwrap();
        let s_b = vn_entropy(&partial_trace(&rho, Subsystem::B).unwrap()).unwrap();
        for _ in 0..5 {
            let b = full_basis(&random_params(&mut rng));
            assert_abs_diff_eq!(discord_given(&rho, &b).unwrap().value, s_b, epsilon = 1e-10);
        }
        // The Schmidt basis on B attains I₁ = S(ρ_B).
        let eig = hermitian_eig(partial_trace(&rho, Subsystem::B).unwrap().matrix()).unwrap();
        let schmidt = MeasurementBasis::from_unitary(eig.eigenvectors).unwrap();
        let i1 = measure_given(&rho, &schmidt, &Measure::I1).unwrap().value;
        assert_abs_diff_eq!(i1, s_b, epsilon = 1e-10);
    }

    #[test]
    fn objective_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for da in [2, 3] {
            let rho = random_state(&mut rng, da, 3);
            for measure in [Measure::D, Measure::I1, Measure::I2] {
                let obj = Objective::new(&rho, measure).unwrap();
                for _ in 0..3 {
                    let b = full_basis(&random_params(&mut rng));
                    let fast = obj.eval(b.unitary()).unwrap();
                    let slow = measure_given(&rho, &b, &measure).unwrap().value;
                    assert_abs_diff_eq!(fast, slow, epsilon = 1e-11);
                }
            }
        }
    }

    #[test]
    fn blockwise_delta_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for da in [2, 3] {
            let rho = random_state(&mut rng, da, 4);
            for measure in [Measure::D, Measure::I1, Measure::I2] {
                let obj = Objective::new(&rho, measure).unwrap();
                let b = full_basis(&random_params(&mut rng));
                let fast = obj.delta(b.unitary()).unwrap();
                let slow = stationarity_for(&rho, &b, &measure).unwrap().delta;
                assert!(fast.max_abs_diff(&slow) < 1e-11, "{}", fast.max_abs_diff(&slow));
            }
        }
    }

    #[test]
    fn delta_is_the_basis_gradient() {
        // d/dε of the measure along U → exp(εX)U equals Re Tr(XΔ).
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = random_state(&mut rng, 3, 5);
        let u = full_basis(&random_params(&mut rng)).unitary().clone();
        let k = ComplexMatrix::from_fn(3, 3, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .hermitian_part();
        let x = k.scale(Complex64::new(0.0, 1.0));
        for measure in [Measure::D, Measure::I1, Measure::I2] {
            let obj = Objective::new(&rho, measure).unwrap();
            let h = 1e-5;
            let moved = |e: f64| {
                let w = crate::spinops::exp_i_hermitian(&k, e).unwrap();
                obj.eval(&(&w * &u)).unwrap()
            };
            let fd = (moved(h) - moved(-h)) / (2.0 * h);
            let an = x.trace_product(&obj.delta(&u).unwrap()).unwrap().re;
            assert_abs_diff_eq!(fd, an, epsilon = 1e-7);
        }
    }

    #[test]
    fn residual_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = random_state(&mut rng, 3, 9);
        let b = full_basis(&random_params(&mut rng));
        for r in [
            stationarity_f(&rho, &b, &EntropyFunctional::linear()).unwrap(),
            stationarity_f(&rho, &b, &EntropyFunctional::von_neumann()).unwrap(),
            stationarity_d(&rho, &b).unwrap(),
        ] {
            assert!((&r.delta + &r.delta.adjoint()).max_abs() < 1e-10);
            let m = r.in_basis(&b);
            for k in 0..3 {
                assert!(m[(k, k)].norm() < 1e-10);
            }
            assert!(!r.kernel_overlap);
        }
    }

    #[test]
    fn local_term_vanishes_for_maximally_mixed_marginal() {
        let rho = bell();
        // Marginal on B is diag(1/2, 0, 1/2); use the full 3x3 maximally
        // entangled state instead.
        let mut psi = vec![ZERO; 9];
        for k in 0..3 {
            psi[k * 3 + k] = c(1.0);
        }
        let max_ent = DensityMatrix::from_pure(&psi, (3, 3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = full_basis(&random_params(&mut rng));
        let d = stationarity_d(&max_ent, &b).unwrap();
        let f = stationarity_f(&max_ent, &b, &EntropyFunctional::von_neumann()).unwrap();
        assert!(d.delta.max_abs_diff(&f.delta) < 1e-10);
        assert!(discord_given(&rho, &b).unwrap().value >= -1e-10);
    }

    #[test]
    fn parity_examples() {
        let p = composite_parity(&[1.0, 1.0]).unwrap();
        assert!(parity_invariance_check(&aligned(0.7), &p).unwrap());
        let up = coherent_state(1.0, 0.7).unwrap();
        let prod = DensityMatrix::from_pure(&kron_vec(&up, &up), (3, 3)).unwrap();
        assert!(!parity_invariance_check(&prod, &p).unwrap());
        let rho_prime = apply_measurement(&aligned(0.7), &type_ii_basis(0.3, 0.0)).unwrap();
        assert!(parity_invariance_check(&rho_prime, &p).unwrap());
    }

    #[test]
    fn type_ii_stationarity_at_analytic_alpha() {
        // Real state and real basis leave a single independent entry.
        for theta in [0.3, 0.9, 1.2] {
            let rho = aligned(theta);
            let alpha = ((theta / 2.0).tan().powi(2)).atan();
            let b = type_ii_basis(alpha, 0.0);
            let r = stationarity_f(&rho, &b, &EntropyFunctional::linear()).unwrap();
            assert!(r.norm < 1e-8, "theta {theta}: {}", r.norm);
            let generic = stationarity_f(&rho, &type_ii_basis(alpha + 0.1, 0.0), &EntropyFunctional::linear()).unwrap();
            let d = &generic.delta;
            for (i, j) in [(0, 1), (1, 0), (1, 2), (2, 1), (0, 0), (1, 1), (2, 2)] {
                assert!(d[(i, j)].norm() < 1e-10);
            }
            assert!(d[(2, 0)].norm() > 1e-4);
            assert!(d.as_slice().iter().all(|z| z.im.abs() < 1e-12));
        }
    }

    #[test]
    fn spin_measurement_of_aligned_mixture() {
        // Spin basis along x of |θθ⟩-mixture is a valid basis with finite D.
        let v = discord_given(&aligned(0.5), &spin_basis(std::f64::consts::FRAC_PI_2, 0.0)).unwrap();
        assert!(v.value > 0.0 && v.value < 1.0);
    }
}
