//! Benchmark states, XYZ spin chains and closed-form results for the
//! aligned mixture `ρ_θ = ½(|θθ⟩⟨θθ| + |−θ−θ⟩⟨−θ−θ|)`.

use std::f64::consts::{FRAC_PI_2, LOG2_E};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matlib::{hermitian_eig, kron_vec, ComplexMatrix, DensityMatrix, ONE, ZERO};
use crate::spinops::{coherent_state, composite_parity, embed, spin_operators, ParityOperator};

/// Largest Hilbert-space dimension accepted for chain Hamiltonians.
pub const MAX_CHAIN_DIM: usize = 243;

/// Ground levels closer than this are reported as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

const THETA_SLACK: f64 = 1e-12;

fn check_theta(theta: f64) -> Result<()> {
    if !(-THETA_SLACK..=FRAC_PI_2 + THETA_SLACK).contains(&theta) {
        return Err(Error::Domain(format!("theta={theta} must lie in [0, pi/2]")));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct AlignedMixtureState {
    pub theta: f64,
    pub rho: DensityMatrix,
}

/// `|θ⟩^{⊗n}` for spin 1.
pub fn coherent_product(n: usize, theta: f64) -> Result<Vec<Complex64>> {
    let single = coherent_state(1.0, theta)?;
    let mut out = vec![ONE];
    for _ in 0..n {
        out = kron_vec(&out, &single);
    }
    Ok(out)
}

/// `½(|θθ⟩⟨θθ| + |−θ−θ⟩⟨−θ−θ|)` on two spin-1 sites.
pub fn aligned_mixture(theta: f64) -> Result<AlignedMixtureState> {
    check_theta(theta)?;
    let up = coherent_product(2, theta)?;
    let down = coherent_product(2, -theta)?;
    let m = &ComplexMatrix::outer(&up, &up).scale_real(0.5) + &ComplexMatrix::outer(&down, &down).scale_real(0.5);
    Ok(AlignedMixtureState { theta, rho: DensityMatrix::new_unchecked(m, (3, 3)) })
}

/// `⟨−θ|θ⟩ = cos²θ` for spin 1.
pub fn coherent_overlap(theta: f64) -> f64 {
    theta.cos().powi(2)
}

/// `(|θ…θ⟩ ± |−θ…−θ⟩)/√(2(1 ± ⟨−θ|θ⟩ⁿ))`, an eigenstate of the chain
/// parity with eigenvalue `sign`.
pub fn fixed_parity_state(n: usize, theta: f64, sign: i8) -> Result<Vec<Complex64>> {
    if n < 2 {
        return Err(Error::Domain(format!("fixed-parity state needs n >= 2, got {n}")));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::Domain(format!("parity sign must be +1 or -1, got {sign}")));
    }
    check_theta(theta)?;
    let s = f64::from(sign);
    let norm_sq = 2.0 * (1.0 + s * coherent_overlap(theta).powi(n as i32));
    if norm_sq.sqrt() < 1e-8 {
        return Err(Error::Domain(format!("branches coincide at theta={theta}; odd combination vanishes")));
    }
    let up = coherent_product(n, theta)?;
    let down = coherent_product(n, -theta)?;
    let inv = 1.0 / norm_sq.sqrt();
    Ok(up.iter().zip(&down).map(|(a, b)| (a + b * s) * inv).collect())
}

fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    if !(i < j && j < n) {
        return Err(Error::Domain(format!("site pair ({i}, {j}) invalid for {n} sites")));
    }
    Ok(())
}

fn site_count(len: usize, d: usize) -> Result<usize> {
    let mut n = 0;
    let mut rest = len;
    while rest > 1 && rest.is_multiple_of(d) {
        rest /= d;
        n += 1;
    }
    if rest != 1 {
        return Err(Error::Dimension(format!("length {len} is not a power of {d}")));
    }
    Ok(n)
}

/// Digit `site` (most significant first) of a base-`d` index over `n` sites.
fn digit(index: usize, site: usize, n: usize, d: usize) -> usize {
    (index / d.pow((n - 1 - site) as u32)) % d
}

/// Two-site reduced state of a pure chain state with local dimension `d`.
pub fn reduce_pair(psi: &[Complex64], d: usize, i: usize, j: usize) -> Result<DensityMatrix> {
    let n = site_count(psi.len(), d)?;
    check_pair(n, i, j)?;
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("state has norm squared {norm}")));
    }
    // Group amplitudes by the configuration of the other sites.
    let rest_dim = psi.len() / (d * d);
    let mut grouped = vec![ZERO; psi.len()];
    for (idx, &amp) in psi.iter().enumerate() {
        let (a, b) = (digit(idx, i, n, d), digit(idx, j, n, d));
        let mut rest = 0;
        for site in 0..n {
            if site != i && site != j {
                rest = rest * d + digit(idx, site, n, d);
            }
        }
        grouped[(a * d + b) * rest_dim + rest] = amp;
    }
    let m = ComplexMatrix::from_fn(d * d, d * d, |r, c| {
        (0..rest_dim).map(|k| grouped[r * rest_dim + k] * grouped[c * rest_dim + k].conj()).sum()
    });
    Ok(DensityMatrix::new_unchecked(m.hermitian_part(), (d, d)))
}

/// Two-site reduced state of a mixed chain state.
pub fn reduce_pair_mixed(rho: &ComplexMatrix, d: usize, i: usize, j: usize) -> Result<DensityMatrix> {
    if !rho.is_square() {
        return Err(Error::Dimension("chain state must be square".into()));
    }
    let n = site_count(rho.rows(), d)?;
    check_pair(n, i, j)?;
    let dim = rho.rows();
    let mut out = ComplexMatrix::zeros(d * d, d * d);
    for r in 0..dim {
        for c in 0..dim {
            let same_rest = (0..n).all(|s| s == i || s == j || digit(r, s, n, d) == digit(c, s, n, d));
            if same_rest {
                let row = digit(r, i, n, d) * d + digit(r, j, n, d);
                let col = digit(c, i, n, d) * d + digit(c, j, n, d);
                out[(row, col)] += rho[(r, c)];
            }
        }
    }
    Ok(DensityMatrix::new_unchecked(out.hermitian_part(), (d, d)))
}

/// Chain couplings as `(i, j, J)` triples per spin component.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    #[serde(default)]
    pub x: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub y: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub z: Vec<(usize, usize, f64)>,
    /// Optional `S_x^i S_y^j` terms.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub xy: Vec<(usize, usize, f64)>,
}

/// `H = Σ_i b_i S_z^i − Σ_{ij} Σ_μ J^μ_ij S_μ^i S_μ^j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XyzChainSpec {
    pub n: usize,
    #[serde(default = "default_spin")]
    pub s: f64,
    pub b: Vec<f64>,
    #[serde(rename = "J")]
    pub j: Couplings,
}

fn default_spin() -> f64 {
    1.0
}

impl XyzChainSpec {
    /// Open chain, nearest-neighbour uniform couplings, uniform field.
    pub fn uniform(n: usize, b: f64, jx: f64, jy: f64, jz: f64) -> Self {
        let bonds = |v: f64| (0..n.saturating_sub(1)).map(|i| (i, i + 1, v)).collect();
        Self {
            n,
            s: 1.0,
            b: vec![b; n],
            j: Couplings { x: bonds(jx), y: bonds(jy), z: bonds(jz), xy: Vec::new() },
        }
    }

    /// `(J^y − J^z)/(J^x − J^z)` when every bond carries the same couplings.
    pub fn anisotropy(&self) -> Option<f64> {
        let uniform = |v: &[(usize, usize, f64)]| {
            let first = v.first()?.2;
            v.iter().all(|t| t.2 == first).then_some(first)
        };
        let (jx, jy, jz) = (uniform(&self.j.x)?, uniform(&self.j.y)?, uniform(&self.j.z)?);
        if jx == jz {
            return None;
        }
        Some((jy - jz) / (jx - jz))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("chain needs at least one site".into()));
        }
        if self.b.len() != self.n {
            return Err(Error::Format(format!("{} fields for {} sites", self.b.len(), self.n)));
        }
        for (i, j, v) in self.j.x.iter().chain(&self.j.y).chain(&self.j.z).chain(&self.j.xy) {
            if *i >= self.n || *j >= self.n || i == j || !v.is_finite() {
                return Err(Error::Format(format!("invalid coupling ({i}, {j}, {v})")));
            }
        }
        Ok(())
    }
}

fn pow_checked(d: usize, n: usize) -> Option<usize> {
    d.checked_pow(u32::try_from(n).ok()?)
}

/// Dense chain Hamiltonian; refuses dimensions above `max_dim`.
pub fn xyz_hamiltonian_capped(spec: &XyzChainSpec, max_dim: usize) -> Result<ComplexMatrix> {
    spec.validate()?;
    let ops = spin_operators(spec.s)?;
    let d = ops.dim();
    let dim = pow_checked(d, spec.n).filter(|&x| x <= max_dim).ok_or_else(|| {
        Error::Unsupported(format!("{} sites of spin {} exceed the dimension cap {max_dim}", spec.n, spec.s))
    })?;
    let n = spec.n;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (i, &b) in spec.b.iter().enumerate() {
        if b != 0.0 {
            h = &h + &embed(&ops.sz, i, n, d).scale_real(b);
        }
    }
    let terms = [(&spec.j.x, &ops.sx, &ops.sx), (&spec.j.y, &ops.sy, &ops.sy), (&spec.j.z, &ops.sz, &ops.sz)];
    for (list, a, b) in terms {
        for &(i, j, v) in list {
            h = &h - &(&embed(a, i, n, d) * &embed(b, j, n, d)).scale_real(v);
        }
    }
    for &(i, j, v) in &spec.j.xy {
        let t = &embed(&ops.sx, i, n, d) * &embed(&ops.sy, j, n, d);
        // Keep H Hermitian when the two factors do not commute.
        h = &h - &t.hermitian_part().scale_real(v);
    }
    Ok(h)
}

pub fn xyz_hamiltonian(spec: &XyzChainSpec) -> Result<ComplexMatrix> {
    xyz_hamiltonian_capped(spec, MAX_CHAIN_DIM)
}

/// Parity `⊗_i exp(iπ(S_z^i − s))` for a chain spec.
pub fn chain_parity(spec: &XyzChainSpec) -> Result<ParityOperator> {
    composite_parity(&vec![spec.s; spec.n])
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub state: Vec<Complex64>,
    /// Gap to the next level; `None` for a one-dimensional space.
    pub gap: Option<f64>,
    pub degenerate: bool,
}

pub fn ground_state(h: &ComplexMatrix) -> Result<GroundState> {
    let eig = hermitian_eig(h)?;
    let energy = eig.eigenvalues[0];
    let gap = eig.eigenvalues.get(1).map(|e| e - energy);
    Ok(GroundState {
        energy,
        state: eig.eigenvectors.column(0),
        gap,
        degenerate: gap.is_some_and(|g| g < DEGENERACY_GAP),
    })
}

/// `exp(−βH)/Tr exp(−βH)`, as a single-system state of dimension `dim H`.
pub fn thermal_state(h: &ComplexMatrix, beta: f64) -> Result<DensityMatrix> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("inverse temperature {beta} must be finite and non-negative")));
    }
    let eig = hermitian_eig(h)?;
    let e0 = eig.eigenvalues[0];
    let z: f64 = eig.eigenvalues.iter().map(|e| (-beta * (e - e0)).exp()).sum();
    let m = eig.map(|e| (-beta * (e - e0)).exp() / z);
    let n = m.rows();
    Ok(DensityMatrix::new_unchecked(m.hermitian_part(), (n, 1)))
}

/// `(|1,1⟩ + |−1,−1⟩)/√2`: a Bell pair inside two spin-1 sites.
pub fn bell_anchor() -> DensityMatrix {
    let mut psi = vec![ZERO; 9];
    psi[0] = ONE;
    psi[8] = ONE;
    DensityMatrix::from_pure(&psi, (3, 3)).expect("fixed normalized state")
}

/// `h_ν(x) = −x log₂ x − (ν − x) log₂(ν − x)`.
pub fn h_nu(nu: f64, x: f64) -> f64 {
    let term = |y: f64| if y > 0.0 { -y * y.log2() } else { 0.0 };
    term(x) + term(nu - x)
}

pub fn p_theta(theta: f64) -> f64 {
    let c = |k: f64| (k * theta).cos();
    let inner = 115.0 / 8.0 - c(2.0) + 1.5 * c(4.0) + c(6.0) + c(8.0) / 8.0;
    0.25 - inner.max(0.0).sqrt() / 16.0
}

pub fn q_theta(theta: f64) -> f64 {
    0.5 * theta.sin().powi(2)
}

/// `cos θ_c = 3^{−1/4}`.
pub fn theta_c() -> f64 {
    3f64.powf(-0.25).acos()
}

/// Discord of `ρ_θ`, in bits.
pub fn d_closed(theta: f64) -> f64 {
    let p = p_theta(theta);
    let q = q_theta(theta);
    (2.0 * h_nu(0.5, p) - 1.0 - h_nu(1.0, 2.0 * q * (1.0 - q)) + h_nu(1.0, q)).max(0.0)
}

/// Normalized geometric discord of `ρ_θ`.
pub fn i2_closed(theta: f64) -> f64 {
    if theta <= theta_c() {
        theta.sin().powi(4) * (3.0 + (2.0 * theta).cos()).powi(2) / 8.0
    } else {
        theta.cos().powi(4) * (11.0 + 4.0 * (2.0 * theta).cos() + (4.0 * theta).cos()) / 16.0
    }
}

/// `tan α = tan²(θ/2)`.
pub fn alpha_star(theta: f64) -> f64 {
    (theta / 2.0).tan().powi(2).atan()
}

/// `D ≈ θ²` for small θ.
pub fn d_asymptote_small(theta: f64) -> f64 {
    theta * theta
}

/// `D ≈ [1/2 − (log₂ e)/4 − log₂ ε] ε⁴` with `ε = π/2 − θ`.
pub fn d_asymptote_large(theta: f64) -> f64 {
    let eps = FRAC_PI_2 - theta;
    if eps <= 0.0 {
        return 0.0;
    }
    (0.5 - LOG2_E / 4.0 - eps.log2()) * eps.powi(4)
}

/// `I₂ ≈ 2θ⁴` for small θ.
pub fn i2_asymptote_small(theta: f64) -> f64 {
    2.0 * theta.powi(4)
}

/// `I₂ ≈ ½(π/2 − θ)⁴` near `π/2`.
pub fn i2_asymptote_large(theta: f64) -> f64 {
    0.5 * (FRAC_PI_2 - theta).powi(4)
}
