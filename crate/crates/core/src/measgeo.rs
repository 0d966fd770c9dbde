//! Projective measurements on a spin-1 system.
//!
//! A complete projective measurement is fixed by six angles: three
//! "intrinsic" angles `(α, β, γ)` that shape the triple of spin averages
//! `⟨m_U|S|m_U⟩`, and three orientation angles `(ψ, θ_r, φ_r)` applied as
//! `exp(-iψS_z) exp(-iθ_r S_y) exp(-iφ_r S_z)`. The intrinsic states are
//!
//! ```text
//! |1_r⟩  = cos β · v − sin β · e^{-iγ}|0⟩
//! |0_r⟩  = sin β · v + cos β · e^{-iγ}|0⟩
//! |-1_r⟩ = −e^{-iφ₀} sin α |1⟩ + e^{iφ₀} cos α |−1⟩
//! v      = e^{-iφ₀} cos α |1⟩ + e^{iφ₀} sin α |−1⟩
//! ```
//!
//! with `tan φ₀ = tan γ · tan(π/4 − α)`, which puts every spin average in
//! the intrinsic x–z plane.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matlib::{ComplexMatrix, ONE, ZERO};
use crate::spinops::{parity_z, spin_operators, SpinTriple};

/// Default tolerance for diagram comparisons in [`classify`].
pub const CLASSIFY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub psi: f64,
    pub theta_r: f64,
    pub phi_r: f64,
}

impl MeasurementParams {
    /// Validates `α, β ∈ [0, π/4]` and `γ ∈ (−π/2, π/2]`.
    pub fn new(alpha: f64, beta: f64, gamma: f64, psi: f64, theta_r: f64, phi_r: f64) -> Result<Self> {
        let p = Self { alpha, beta, gamma, psi, theta_r, phi_r };
        p.validate()?;
        Ok(p)
    }

    pub fn intrinsic(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::new(alpha, beta, gamma, 0.0, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        const SLACK: f64 = 1e-12;
        let in_box = |x: f64| (-SLACK..=FRAC_PI_4 + SLACK).contains(&x);
        if !in_box(self.alpha) || !in_box(self.beta) {
            return Err(Error::Domain(format!(
                "alpha={} and beta={} must lie in [0, pi/4]",
                self.alpha, self.beta
            )));
        }
        if !(self.gamma > -FRAC_PI_2 - SLACK && self.gamma <= FRAC_PI_2 + SLACK) {
            return Err(Error::Domain(format!("gamma={} must lie in (-pi/2, pi/2]", self.gamma)));
        }
        if [self.psi, self.theta_r, self.phi_r].iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("rotation angles must be finite".into()));
        }
        Ok(())
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.alpha, self.beta, self.gamma, self.psi, self.theta_r, self.phi_r]
    }

    /// No range checks; used for parameter-space arithmetic.
    pub fn from_array(x: [f64; 6]) -> Self {
        Self { alpha: x[0], beta: x[1], gamma: x[2], psi: x[3], theta_r: x[4], phi_r: x[5] }
    }

    /// Wraps γ into `(−π/2, π/2]` and the rotation angles into `[0, 2π)`.
    /// Both maps leave the projector set unchanged.
    pub fn wrapped(&self) -> Self {
        Self {
            gamma: wrap_half_open(self.gamma, PI),
            psi: self.psi.rem_euclid(2.0 * PI),
            theta_r: self.theta_r.rem_euclid(2.0 * PI),
            phi_r: self.phi_r.rem_euclid(2.0 * PI),
            ..*self
        }
    }

    /// Auxiliary phase `φ₀` of the intrinsic basis.
    pub fn phi0(&self) -> f64 {
        phi0(self.alpha, self.gamma)
    }
}

/// Wraps `x` into `(−period/2, period/2]`.
pub(crate) fn wrap_half_open(x: f64, period: f64) -> f64 {
    let half = period / 2.0;
    let y = (x + half).rem_euclid(period) - half;
    if y <= -half {
        y + period
    } else {
        y
    }
}

/// `tan φ₀ = tan γ · tan(π/4 − α)`, on the branch continuous in γ.
pub fn phi0(alpha: f64, gamma: f64) -> f64 {
    (gamma.sin() * (FRAC_PI_4 - alpha).tan()).atan2(gamma.cos())
}

/// Three orthonormal qutrit states (columns of `unitary`) and their
/// rank-one projectors.
#[derive(Clone, Debug)]
pub struct MeasurementBasis {
    unitary: ComplexMatrix,
    projectors: Vec<ComplexMatrix>,
}

impl MeasurementBasis {
    /// Accepts any unitary whose columns are orthonormal to `1e-10`.
    pub fn from_unitary(unitary: ComplexMatrix) -> Result<Self> {
        if !unitary.is_square() {
            return Err(Error::Dimension("measurement unitary must be square".into()));
        }
        let n = unitary.rows();
        let gram = &unitary.adjoint() * &unitary;
        let err = gram.max_abs_diff(&ComplexMatrix::identity(n));
        if err > 1e-10 {
            return Err(Error::Domain(format!("basis is not orthonormal (deviation {err:e})")));
        }
        Ok(Self::from_unitary_unchecked(unitary))
    }

    pub(crate) fn from_unitary_unchecked(unitary: ComplexMatrix) -> Self {
        let projectors = (0..unitary.cols())
            .map(|m| {
                let v = unitary.column(m);
                ComplexMatrix::outer(&v, &v)
            })
            .collect();
        Self { unitary, projectors }
    }

    pub fn from_states(states: &[Vec<Complex64>]) -> Result<Self> {
        Self::from_unitary(ComplexMatrix::from_columns(states)?)
    }

    pub fn dim(&self) -> usize {
        self.unitary.rows()
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn state(&self, m: usize) -> Vec<Complex64> {
        self.unitary.column(m)
    }

    pub fn states(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim()).map(|m| self.state(m)).collect()
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    /// Basis rotated by a further unitary `W`: states `W|m_U⟩`.
    pub fn transformed(&self, w: &ComplexMatrix) -> Result<Self> {
        Self::from_unitary(w.matmul(&self.unitary)?)
    }

    /// Largest deviation of `⟨m|n⟩` from `δ_mn`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = &self.unitary.adjoint() * &self.unitary;
        gram.max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }

    pub fn completeness_error(&self) -> f64 {
        let n = self.dim();
        let sum = self.projectors.iter().fold(ComplexMatrix::zeros(n, n), |acc, p| &acc + p);
        sum.max_abs_diff(&ComplexMatrix::identity(n))
    }

    /// For each projector, the index of the projector it is mapped to by
    /// `W Π W†`, or `None` if the set is not invariant.
    pub fn permutation_under(&self, w: &ComplexMatrix, tol: f64) -> Option<Vec<usize>> {
        let mut image = Vec::with_capacity(self.projectors.len());
        for p in &self.projectors {
            let q = p.conjugate_by(w).ok()?;
            let hit = self.projectors.iter().position(|r| (&q - r).frobenius_norm() < tol)?;
            image.push(hit);
        }
        Some(image)
    }
}

/// Real spin-1 rotation `exp(-iθS_y)` in the `|1⟩, |0⟩, |−1⟩` basis.
pub(crate) fn ry1(theta: f64) -> ComplexMatrix {
    let (s, c) = theta.sin_cos();
    let r = s * FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[
        &[(1.0 + c) / 2.0, -r, (1.0 - c) / 2.0],
        &[r, c, -r],
        &[(1.0 - c) / 2.0, r, (1.0 + c) / 2.0],
    ])
}

/// `exp(-iφS_z)` for spin 1.
pub(crate) fn rz1(phi: f64) -> ComplexMatrix {
    ComplexMatrix::from_diag(&[Complex64::from_polar(1.0, -phi), ONE, Complex64::from_polar(1.0, phi)])
}

/// Columns `|1_r⟩, |0_r⟩, |−1_r⟩`. Defined for all real angles.
pub fn intrinsic_unitary(alpha: f64, beta: f64, gamma: f64) -> ComplexMatrix {
    let p0 = phi0(alpha, gamma);
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let em = Complex64::from_polar(1.0, -p0);
    let ep = Complex64::from_polar(1.0, p0);
    let eg = Complex64::from_polar(1.0, -gamma);
    let v = [em * ca, ZERO, ep * sa];
    let one_r = [v[0] * cb, -eg * sb, v[2] * cb];
    let zero_r = [v[0] * sb, eg * cb, v[2] * sb];
    let minus_r = [-em * sa, ZERO, ep * ca];
    ComplexMatrix::from_fn(3, 3, |i, j| match j {
        0 => one_r[i],
        1 => zero_r[i],
        _ => minus_r[i],
    })
}

/// Rotated intrinsic basis as a unitary; no range checks.
pub fn full_unitary(p: &MeasurementParams) -> ComplexMatrix {
    let rot = &(&rz1(p.psi) * &ry1(p.theta_r)) * &rz1(p.phi_r);
    &rot * &intrinsic_unitary(p.alpha, p.beta, p.gamma)
}

pub fn intrinsic_basis(alpha: f64, beta: f64, gamma: f64) -> MeasurementBasis {
    MeasurementBasis::from_unitary_unchecked(intrinsic_unitary(alpha, beta, gamma))
}

pub fn full_basis(p: &MeasurementParams) -> MeasurementBasis {
    MeasurementBasis::from_unitary_unchecked(full_unitary(p))
}

/// Definite-parity basis `exp(-iφS_z)|m_α⟩` with
/// `|±1_α⟩ = cos α|±1⟩ ± sin α|∓1⟩`, `|0_α⟩ = |0⟩`.
pub fn type_ii_basis(alpha: f64, phi: f64) -> MeasurementBasis {
    let (s, c) = alpha.sin_cos();
    let m_alpha = ComplexMatrix::from_real_rows(&[&[c, 0.0, -s], &[0.0, 1.0, 0.0], &[s, 0.0, c]]);
    MeasurementBasis::from_unitary_unchecked(&rz1(phi) * &m_alpha)
}

/// Y-type basis: the intrinsic basis at `β = π/4`, rotated by `exp(-iφS_z)`.
/// Parity swaps the first two states and fixes the third.
pub fn type_iii_basis(alpha: f64, gamma: f64, phi: f64) -> MeasurementBasis {
    MeasurementBasis::from_unitary_unchecked(&rz1(phi) * &intrinsic_unitary(alpha, FRAC_PI_4, gamma))
}

/// Eigenbasis of `k·S` with `k = (sin θ cos φ, sin θ sin φ, cos θ)`,
/// ordered `m = 1, 0, −1`.
pub fn spin_basis(theta: f64, phi: f64) -> MeasurementBasis {
    full_basis(&MeasurementParams::from_array([0.0, 0.0, 0.0, phi, theta, 0.0]))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinDiagram {
    pub vectors: Vec<[f64; 3]>,
    pub total_length_sq: f64,
}

impl SpinDiagram {
    pub fn sum(&self) -> [f64; 3] {
        let mut s = [0.0; 3];
        for v in &self.vectors {
            for k in 0..3 {
                s[k] += v[k];
            }
        }
        s
    }

    /// Largest pairwise dot product between distinct vectors.
    pub fn max_pairwise_dot(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for i in 0..self.vectors.len() {
            for j in i + 1..self.vectors.len() {
                worst = worst.max(dot(&self.vectors[i], &self.vectors[j]));
            }
        }
        worst
    }

    /// `|det[v₀ v₁ v₂]|`; zero for coplanar triples.
    pub fn coplanarity_residual(&self) -> f64 {
        match self.vectors.as_slice() {
            [a, b, c] => dot(a, &cross(b, c)).abs(),
            _ => 0.0,
        }
    }
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm3(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn spin_for_dim(d: usize) -> Result<SpinTriple> {
    if d < 2 {
        return Err(Error::Dimension(format!("no spin operators in dimension {d}")));
    }
    spin_operators((d as f64 - 1.0) / 2.0)
}

/// Spin averages `⟨m_U|S|m_U⟩` of every basis state.
pub fn spin_diagram(b: &MeasurementBasis) -> Result<SpinDiagram> {
    let ops = spin_for_dim(b.dim())?;
    let vectors: Vec<[f64; 3]> = b.states().iter().map(|v| ops.expectation(v)).collect();
    let total_length_sq = vectors.iter().map(|v| dot(v, v)).sum();
    Ok(SpinDiagram { vectors, total_length_sq })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasurementLabel {
    /// Spin measurement along some axis.
    #[serde(rename = "I")]
    Spin,
    /// Collinear averages: a definite-parity basis up to rotation.
    #[serde(rename = "II")]
    Collinear,
    /// Symmetric Y-shaped diagram: a pair swapped by an axis parity plus
    /// one fixed state.
    #[serde(rename = "III")]
    YType,
    #[serde(rename = "IV")]
    General,
}

impl MeasurementLabel {
    pub fn roman(&self) -> &'static str {
        match self {
            Self::Spin => "I",
            Self::Collinear => "II",
            Self::YType => "III",
            Self::General => "IV",
        }
    }
}

impl fmt::Display for MeasurementLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.roman())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementType {
    pub label: MeasurementLabel,
    /// Projector set invariant under the frame's `S_z` parity.
    pub parity_preserving: bool,
    /// All three spin averages vanish.
    pub zero_diagram: bool,
}

/// Parity about the unit axis `n` for spin 1: `I − 2|0_n⟩⟨0_n|`, where
/// `|0_n⟩` is the zero eigenstate of `n·S`. Equals `diag(1, −1, 1)` for z.
pub fn axis_parity(n: [f64; 3]) -> ComplexMatrix {
    let a = Complex64::new(-n[0], n[1]) * FRAC_1_SQRT_2;
    let zero_n = [a, Complex64::new(n[2], 0.0), -a.conj()];
    let outer = ComplexMatrix::outer(&zero_n, &zero_n);
    &ComplexMatrix::identity(3) - &outer.scale_real(2.0)
}

/// Classifies a spin-1 basis, with parity preservation judged against the
/// lab `S_z` parity.
pub fn classify(b: &MeasurementBasis, tol: f64) -> Result<MeasurementType> {
    classify_in_frame(b, [0.0, 0.0, 1.0], tol)
}

/// As [`classify`], with parity preservation judged against the parity
/// about `axis`.
pub fn classify_in_frame(b: &MeasurementBasis, axis: [f64; 3], tol: f64) -> Result<MeasurementType> {
    if b.dim() != 3 {
        return Err(Error::Unsupported(format!("classification is defined for spin 1, got dimension {}", b.dim())));
    }
    let n = norm3(&axis);
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("frame axis has norm {n}")));
    }
    let diagram = spin_diagram(b)?;
    let v = &diagram.vectors;
    let norms: Vec<f64> = v.iter().map(norm3).collect();
    let projector_tol = tol.max(1e-8);

    let frame_parity = axis_parity(axis);
    let parity_preserving = b.permutation_under(&frame_parity, projector_tol).is_some();

    let zero_diagram = norms.iter().all(|&x| x < tol);
    let label = if zero_diagram {
        MeasurementLabel::Collinear
    } else if is_spin_diagram(v, &norms, tol) {
        MeasurementLabel::Spin
    } else if is_collinear(v, tol) {
        MeasurementLabel::Collinear
    } else if is_y_type(b, v, &norms, tol, projector_tol) {
        MeasurementLabel::YType
    } else {
        MeasurementLabel::General
    };
    Ok(MeasurementType { label, parity_preserving, zero_diagram })
}

fn is_spin_diagram(v: &[[f64; 3]], norms: &[f64], tol: f64) -> bool {
    // {k, 0, −k} in some order.
    (0..3).any(|zero| {
        let others: Vec<usize> = (0..3).filter(|&i| i != zero).collect();
        let (a, c) = (others[0], others[1]);
        let sum = [v[a][0] + v[c][0], v[a][1] + v[c][1], v[a][2] + v[c][2]];
        norms[zero] < tol && (norms[a] - 1.0).abs() < tol && norm3(&sum) < tol
    })
}

fn is_collinear(v: &[[f64; 3]], tol: f64) -> bool {
    // s = 1, so the cross-product threshold is tol·s² = tol.
    (0..3).all(|i| (i + 1..3).all(|j| norm3(&cross(&v[i], &v[j])) < tol))
}

fn is_y_type(b: &MeasurementBasis, v: &[[f64; 3]], norms: &[f64], tol: f64, projector_tol: f64) -> bool {
    let mut candidates: Vec<[f64; 3]> = Vec::new();
    for (vec, &n) in v.iter().zip(norms) {
        if n > tol {
            candidates.push([vec[0] / n, vec[1] / n, vec[2] / n]);
        }
    }
    let mut best_normal = [0.0; 3];
    for i in 0..3 {
        for j in i + 1..3 {
            let c = cross(&v[i], &v[j]);
            if norm3(&c) > norm3(&best_normal) {
                best_normal = c;
            }
        }
    }
    let nn = norm3(&best_normal);
    if nn > tol {
        candidates.push([best_normal[0] / nn, best_normal[1] / nn, best_normal[2] / nn]);
    }
    candidates.iter().any(|axis| match b.permutation_under(&axis_parity(*axis), projector_tol) {
        Some(perm) => perm.iter().enumerate().filter(|(m, &img)| *m == img).count() == 1,
        None => false,
    })
}

/// JSON export of a basis and its spin diagram. States are listed in
/// canonical order: descending `⟨S_z⟩`, ties broken by descending `⟨S_x⟩`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagramRecord {
    pub params: Option<MeasurementParams>,
    pub vectors: [[f64; 3]; 3],
    #[serde(rename = "L_squared")]
    pub l_squared: f64,
    #[serde(rename = "type")]
    pub label: MeasurementLabel,
    pub parity_preserving: bool,
    pub zero_diagram: bool,
}

impl DiagramRecord {
    pub fn new(params: Option<MeasurementParams>, basis: &MeasurementBasis) -> Result<Self> {
        let diagram = spin_diagram(basis)?;
        let kind = classify(basis, CLASSIFY_TOL)?;
        let mut vecs = diagram.vectors.clone();
        if vecs.len() != 3 {
            return Err(Error::Unsupported("diagram export is defined for spin 1".into()));
        }
        vecs.sort_by(|a, b| {
            if (a[2] - b[2]).abs() > 1e-12 {
                b[2].total_cmp(&a[2])
            } else {
                b[0].total_cmp(&a[0])
            }
        });
        // Keep signed zeros out of the JSON.
        let clean = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
        let vectors = [0, 1, 2].map(|m| vecs[m].map(clean));
        Ok(Self {
            params,
            vectors,
            l_squared: diagram.total_length_sq,
            label: kind.label,
            parity_preserving: kind.parity_preserving,
            zero_diagram: kind.zero_diagram,
        })
    }
}

/// `sin 2α = 1/3`: the fully symmetric Y-type point with `L_S² = 8/3`.
pub fn symmetric_alpha() -> f64 {
    (1.0f64 / 3.0).asin() / 2.0
}

/// Ensures the `S_z` parity convention used for "parity preserving" is the
/// spin-1 one.
pub fn lab_parity() -> ComplexMatrix {
    parity_z(1.0).expect("spin 1 is valid").matrix()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinops::rotation;
    use approx::assert_abs_diff_eq;

    fn assert_vec(a: [f64; 3], b: [f64; 3], tol: f64) {
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn explicit_rotations_match_spectral() {
        for t in [0.0, 0.3, -1.2, 2.9] {
            assert!(ry1(t).max_abs_diff(&rotation(1.0, [0.0, 1.0, 0.0], t).unwrap()) < 1e-12);
            assert!(rz1(t).max_abs_diff(&rotation(1.0, [0.0, 0.0, 1.0], t).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn intrinsic_origin_is_standard_basis() {
        let b = intrinsic_basis(0.0, 0.0, 0.0);
        assert!(b.unitary().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
        let d = spin_diagram(&b).unwrap();
        assert_eq!(d.vectors, vec![[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]]);
    }

    #[test]
    fn alpha_pi_over_four_gives_zero_eigenstates() {
        let b = intrinsic_basis(FRAC_PI_4, 0.0, 0.0);
        let d = spin_diagram(&b).unwrap();
        for v in &d.vectors {
            assert_vec(*v, [0.0; 3], 1e-14);
        }
        // Zero eigenstates of S_y, S_z, S_x in that order.
        let ops = spin_operators(1.0).unwrap();
        for (m, op) in [&ops.sy, &ops.sz, &ops.sx].into_iter().enumerate() {
            let v = b.state(m);
            let w = op.mul_vec(&v).unwrap();
            assert!(w.iter().all(|z| z.norm() < 1e-14), "state {m}");
        }
        let kind = classify(&b, CLASSIFY_TOL).unwrap();
        assert_eq!(kind.label, MeasurementLabel::Collinear);
        assert!(kind.zero_diagram);
    }

    #[test]
    fn symmetric_point_has_maximal_length() {
        let b = intrinsic_basis(symmetric_alpha(), FRAC_PI_4, 0.0);
        let d = spin_diagram(&b).unwrap();
        for v in &d.vectors {
            assert_abs_diff_eq!(dot(v, v), 8.0 / 9.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(d.total_length_sq, 8.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn in_plane_averages_match_closed_form() {
        for &(a, b, g) in &[(0.1, 0.2, 0.3), (0.7, 0.05, -1.2), (0.3, 0.78, 1.5), (0.0, 0.4, -0.6)] {
            let d = spin_diagram(&intrinsic_basis(a, b, g)).unwrap();
            let x = (2.0 * b).sin() * ((1.0 + (2.0 * g).cos() * (2.0 * a).sin()) / 2.0).sqrt();
            let c2a = (2.0 * a).cos();
            assert_vec(d.vectors[0], [-x, 0.0, b.cos().powi(2) * c2a], 1e-12);
            assert_vec(d.vectors[1], [x, 0.0, b.sin().powi(2) * c2a], 1e-12);
            assert_vec(d.vectors[2], [0.0, 0.0, -c2a], 1e-12);
        }
    }

    #[test]
    fn phi0_satisfies_defining_relation() {
        for &(a, g) in &[(0.1, 0.4), (0.5, -1.0), (0.0, 1.2), (0.7, 0.0)] {
            let p = phi0(a, g);
            assert_abs_diff_eq!(p.tan(), g.tan() * (FRAC_PI_4 - a).tan(), epsilon = 1e-12);
        }
        // γ = π/2 stays on the principal branch.
        assert_abs_diff_eq!(phi0(0.2, FRAC_PI_2), FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn zero_rotation_is_intrinsic() {
        let p = MeasurementParams::intrinsic(0.3, 0.2, 0.5).unwrap();
        assert!(full_basis(&p).unitary().max_abs_diff(intrinsic_basis(0.3, 0.2, 0.5).unitary()) < 1e-15);
    }

    #[test]
    fn spin_measurement_diagram_is_m_times_k() {
        for &(t, f) in &[(0.4, 1.1), (1.3, -0.7), (2.0, 3.0)] {
            let b = spin_basis(t, f);
            let k = [t.sin() * f.cos(), t.sin() * f.sin(), t.cos()];
            let d = spin_diagram(&b).unwrap();
            assert_vec(d.vectors[0], k, 1e-12);
            assert_vec(d.vectors[1], [0.0; 3], 1e-12);
            assert_vec(d.vectors[2], k.map(|x| -x), 1e-12);
            assert_eq!(classify(&b, CLASSIFY_TOL).unwrap().label, MeasurementLabel::Spin);
        }
        assert!(spin_basis(0.0, 0.0).unitary().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn type_ii_examples() {
        assert!(type_ii_basis(0.0, 0.0).unitary().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
        let zero = spin_diagram(&type_ii_basis(FRAC_PI_4, 0.0)).unwrap();
        assert!(zero.vectors.iter().all(|v| norm3(v) < 1e-14));
        let p = parity_z(1.0).unwrap();
        for &(a, f) in &[(0.2, 0.0), (0.6, 1.3), (0.1, -2.0)] {
            let b = type_ii_basis(a, f);
            for (m, sign) in [1.0, -1.0, 1.0].into_iter().enumerate() {
                let v = b.state(m);
                let pv = p.apply(&v);
                assert!(pv.iter().zip(&v).all(|(x, y)| (x - y * sign).norm() < 1e-14));
            }
            let d = spin_diagram(&b).unwrap();
            assert_vec(d.vectors[0], [0.0, 0.0, (2.0 * a).cos()], 1e-12);
            assert_vec(d.vectors[2], [0.0, 0.0, -(2.0 * a).cos()], 1e-12);
            let kind = classify(&b, CLASSIFY_TOL).unwrap();
            assert_eq!(kind.label, MeasurementLabel::Collinear);
            assert!(kind.parity_preserving);
        }
    }

    #[test]
    fn type_iii_examples() {
        let b = type_iii_basis(FRAC_PI_4, 0.0, 0.0);
        let d = spin_diagram(&b).unwrap();
        assert_vec(d.vectors[0], [-1.0, 0.0, 0.0], 1e-12);
        assert_vec(d.vectors[1], [1.0, 0.0, 0.0], 1e-12);
        assert_vec(d.vectors[2], [0.0; 3], 1e-12);

        let p = lab_parity();
        for &(a, g, f) in &[(0.2, 0.3, 0.0), (0.5, -1.0, 0.7), (0.05, 1.4, -2.0)] {
            let b = type_iii_basis(a, g, f);
            assert_eq!(b.permutation_under(&p, 1e-10), Some(vec![1, 0, 2]));
            let d = spin_diagram(&b).unwrap();
            assert_abs_diff_eq!(d.vectors[0][2], d.vectors[1][2], epsilon = 1e-12);
            let kind = classify(&b, CLASSIFY_TOL).unwrap();
            assert_eq!(kind.label, MeasurementLabel::YType, "{a} {g} {f}");
            assert!(kind.parity_preserving);
        }
        let sym = spin_diagram(&type_iii_basis(symmetric_alpha(), 0.0, 0.4)).unwrap();
        for v in &sym.vectors {
            assert_abs_diff_eq!(norm3(v), (8.0f64 / 9.0).sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn general_point_is_type_iv_and_not_parity_preserving() {
        let b = intrinsic_basis(0.2, 0.4, 0.3);
        let kind = classify(&b, CLASSIFY_TOL).unwrap();
        assert_eq!(kind.label, MeasurementLabel::General);
        assert!(!kind.parity_preserving);
    }

    #[test]
    fn classification_is_rotation_invariant() {
        for &(a, b, g) in &[(0.2, 0.4, 0.3), (0.3, FRAC_PI_4, 0.2), (0.1, 0.0, 0.0), (0.0, 0.0, 0.0)] {
            let base = classify(&intrinsic_basis(a, b, g), CLASSIFY_TOL).unwrap().label;
            for &(ps, th, ph) in &[(0.3, 1.0, -0.4), (2.0, 0.2, 1.0), (-1.0, 2.5, 0.0)] {
                let p = MeasurementParams::from_array([a, b, g, ps, th, ph]);
                assert_eq!(classify(&full_basis(&p), CLASSIFY_TOL).unwrap().label, base);
            }
        }
    }

    #[test]
    fn params_validation_and_wrapping() {
        assert!(MeasurementParams::new(0.9, 0.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(MeasurementParams::new(0.1, -0.2, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(MeasurementParams::new(0.1, 0.2, -FRAC_PI_2 - 0.1, 0.0, 0.0, 0.0).is_err());
        assert!(MeasurementParams::new(0.1, 0.2, FRAC_PI_2, 0.0, 0.0, 0.0).is_ok());
        let p = MeasurementParams::from_array([0.1, 0.2, 2.0, -1.0, 7.0, 0.5]);
        let w = p.wrapped();
        assert_abs_diff_eq!(w.gamma, 2.0 - PI, epsilon = 1e-15);
        // Wrapping does not change the projectors.
        let a = full_basis(&p);
        let b = full_basis(&w);
        for (x, y) in a.projectors().iter().zip(b.projectors()) {
            assert!(x.max_abs_diff(y) < 1e-12);
        }
    }

    #[test]
    fn export_record_orders_states() {
        let r = DiagramRecord::new(None, &intrinsic_basis(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(r.vectors, [[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]]);
        assert_eq!(r.label, MeasurementLabel::Spin);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["type"], "I");
        assert!(json.get("L_squared").is_some());
    }
}
