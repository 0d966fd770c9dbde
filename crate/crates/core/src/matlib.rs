//! Dense complex linear algebra for the small Hilbert spaces used here
//! (dimensions up to a few hundred, in practice at most 81).
//!
//! Storage is row-major. Tensor products use the A-slow / B-fast index
//! convention: the basis index of `|a⟩ ⊗ |b⟩` is `a * d_B + b`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Off-diagonal Frobenius threshold (relative to the matrix norm) at which
/// the Jacobi sweeps stop.
pub const JACOBI_OFF_TOL: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Tolerances for [`DensityMatrix`] validation.
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real row slices; panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// `|v⟩⟨w|`.
    pub fn outer(v: &[Complex64], w: &[Complex64]) -> Self {
        Self::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Dimension("columns of unequal length".into()));
        }
        Ok(Self::from_fn(rows, cols, |i, j| columns[j][i]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from `other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        Ok((0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(Error::Dimension("trace of product needs compatible shapes".into()));
        }
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        Ok(acc)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// Averages with the adjoint, removing round-off anti-Hermitian parts.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        u.matmul(self)?.matmul(&u.adjoint())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

// The operator impls panic on shape mismatch; use the `try_*` variants when
// shapes are not known to agree.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues with the
/// matching orthonormal eigenvectors stored as columns.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    /// `V diag(g(λ)) V†`.
    pub fn map(&self, g: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let gv: Vec<f64> = self.eigenvalues.iter().map(|&x| g(x)).collect();
        let v = &self.eigenvectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            let mut acc = ZERO;
            for k in 0..n {
                if gv[k] != 0.0 {
                    acc += v[(i, k)] * v[(j, k)].conj() * gv[k];
                }
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|x| x)
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("eigenproblem on a {}x{} matrix", m.rows, m.cols)));
    }
    let herr = m.hermiticity_error();
    if herr > 1e-10 * m.max_abs().max(1.0) {
        return Err(Error::NotHermitian(herr));
    }
    let n = m.rows;
    let mut a = m.hermitian_part();
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = scale == 0.0 || n < 2;
    let mut sweeps = 0;
    while !converged {
        if off_norm(&a) <= JACOBI_OFF_TOL * scale {
            converged = true;
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            break;
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Skip rotations that cannot change the diagonal in floating point.
                if sweeps > 3 && mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                let e = apq / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let ec = e.conj();
                // A <- A J with J = [[c, s], [-s ē, c ē]] on (p, q).
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * ec * s;
                    a[(k, q)] = akp * s + akq * ec * c;
                }
                // A <- J† A.
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * e * s;
                    a[(q, k)] = apk * s + aqk * e * c;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * ec * s;
                    v[(k, q)] = vkp * s + vkq * ec * c;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&k| a[(k, k)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEig { eigenvalues, eigenvectors })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eig(m)?.eigenvalues)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (rb, cb) = (b.rows, b.cols);
    ComplexMatrix::from_fn(a.rows * rb, a.cols * cb, |r, c| a[(r / rb, c / cb)] * b[(r % rb, c % cb)])
}

pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.matmul(b)?.try_sub(&b.matmul(a)?)
}

/// `V diag(g(λ)) V†` for Hermitian `m`. Non-finite values of `g` on the
/// spectrum are a domain error.
pub fn matrix_func(m: &ComplexMatrix, g: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    for &x in &eig.eigenvalues {
        let y = g(x);
        if !y.is_finite() {
            return Err(Error::Domain(format!("function undefined at eigenvalue {x:e}")));
        }
    }
    Ok(eig.map(g))
}

/// Applies `g` to eigenvalues above `cutoff` and maps the rest (the
/// numerical kernel) to zero.
pub fn matrix_func_on_support(m: &ComplexMatrix, g: impl Fn(f64) -> f64, cutoff: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    Ok(eig.map(|x| if x > cutoff { g(x) } else { 0.0 }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of an arbitrary `(dA·dB)`-square matrix, keeping one factor.
pub fn partial_trace_matrix(m: &ComplexMatrix, dims: (usize, usize), keep: Subsystem) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    if !m.is_square() || m.rows != da * db {
        return Err(Error::Dimension(format!(
            "{}x{} matrix does not match subsystem dims ({da}, {db})",
            m.rows, m.cols
        )));
    }
    Ok(match keep {
        Subsystem::B => ComplexMatrix::from_fn(db, db, |b, d| (0..da).map(|a| m[(a * db + b, a * db + d)]).sum()),
        Subsystem::A => ComplexMatrix::from_fn(da, da, |a, c| (0..db).map(|b| m[(a * db + b, c * db + b)]).sum()),
    })
}

/// Hermitian, unit-trace, positive semidefinite matrix on `C^dA ⊗ C^dB`.
/// Single-system states carry dims `(d, 1)`.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: (usize, usize),
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, dims: (usize, usize)) -> Result<Self> {
        if !matrix.is_square() || matrix.rows != dims.0 * dims.1 {
            return Err(Error::Dimension(format!(
                "{}x{} matrix does not match dims ({}, {})",
                matrix.rows, matrix.cols, dims.0, dims.1
            )));
        }
        let herr = matrix.hermiticity_error();
        if herr > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herr:e})")));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {} != 1", tr.re)));
        }
        let min_eig = hermitian_eigenvalues(&matrix)?.first().copied().unwrap_or(0.0);
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { matrix, dims })
    }

    /// Skips validation; for maps known to preserve the density-matrix
    /// properties (partial traces, projective measurements, normalised
    /// Gram constructions).
    pub(crate) fn new_unchecked(matrix: ComplexMatrix, dims: (usize, usize)) -> Self {
        debug_assert_eq!(matrix.rows, dims.0 * dims.1);
        Self { matrix, dims }
    }

    /// `|ψ⟩⟨ψ|` after normalising `psi`.
    pub fn from_pure(psi: &[Complex64], dims: (usize, usize)) -> Result<Self> {
        if psi.len() != dims.0 * dims.1 {
            return Err(Error::Dimension(format!("state of length {} for dims {:?}", psi.len(), dims)));
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self::new_unchecked(ComplexMatrix::outer(&v, &v), dims))
    }

    /// `Σ_k w_k |ψ_k⟩⟨ψ_k|` with normalised weights and vectors.
    pub fn mixture(components: &[(f64, Vec<Complex64>)], dims: (usize, usize)) -> Result<Self> {
        let total: f64 = components.iter().map(|(w, _)| *w).sum();
        if components.iter().any(|(w, _)| *w < 0.0) || total <= 0.0 {
            return Err(Error::InvalidState("mixture weights must be non-negative with positive sum".into()));
        }
        let n = dims.0 * dims.1;
        let mut m = ComplexMatrix::zeros(n, n);
        for (w, psi) in components {
            let pure = Self::from_pure(psi, dims)?;
            m = m.try_add(&pure.matrix.scale_real(w / total))?;
        }
        Ok(Self::new_unchecked(m, dims))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::new_unchecked(ComplexMatrix::identity(d).scale_real(1.0 / d as f64), (d, 1))
    }

    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Self {
        Self::new_unchecked(kron(&a.matrix, &b.matrix), (a.dim(), b.dim()))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).map(|z| z.re).unwrap_or(f64::NAN)
    }

    /// Eigenvalues with the PSD noise band `[-1e-10, 0)` clamped to zero.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eigenvalues(&self.matrix)?
            .into_iter()
            .map(|x| if (-PSD_TOL..0.0).contains(&x) { 0.0 } else { x })
            .collect())
    }
}

pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> Result<DensityMatrix> {
    let m = partial_trace_matrix(&rho.matrix, rho.dims, keep)?;
    let d = m.rows;
    Ok(DensityMatrix::new_unchecked(m, (d, 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        g.hermitian_part()
    }

    #[test]
    fn eig_identity() {
        let e = hermitian_eig(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn eig_diagonal_is_sorted_with_basis_vectors() {
        let m = ComplexMatrix::from_real_diag(&[1.0, -1.0, 0.0]);
        let e = hermitian_eig(&m).unwrap();
        assert_eq!(e.eigenvalues, vec![-1.0, 0.0, 1.0]);
        assert_eq!(e.eigenvectors.column(0), vec![ZERO, ONE, ZERO]);
        assert_eq!(e.eigenvectors.column(1), vec![ZERO, ZERO, ONE]);
        assert_eq!(e.eigenvectors.column(2), vec![ONE, ZERO, ZERO]);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2, 3, 9, 27] {
            let h = random_hermitian(n, &mut rng);
            let e = hermitian_eig(&h).unwrap();
            assert!(e.reconstruct().frobenius_norm() > 0.0);
            assert!((&e.reconstruct() - &h).frobenius_norm() < 1e-10, "n={n}");
            let vtv = &e.eigenvectors.adjoint() * &e.eigenvectors;
            assert!(vtv.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-12);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eig_handles_degenerate_and_zero() {
        let e = hermitian_eig(&ComplexMatrix::zeros(4, 4)).unwrap();
        assert_eq!(e.eigenvalues, vec![0.0; 4]);
        // Rank-one projector: eigenvalues (0, 0, 1).
        let v = [c(0.6, 0.0), c(0.0, 0.8), ZERO];
        let e = hermitian_eig(&ComplexMatrix::outer(&v, &v)).unwrap();
        assert_abs_diff_eq!(e.eigenvalues[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.eigenvalues[2], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_rejects_bad_input() {
        assert!(matches!(hermitian_eig(&ComplexMatrix::zeros(2, 3)), Err(Error::Dimension(_))));
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn kron_identities_and_index_convention() {
        assert_eq!(kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3)), ComplexMatrix::identity(6));
        let k = kron(&ComplexMatrix::from_real_diag(&[1.0, 0.0]), &ComplexMatrix::from_real_diag(&[0.0, 1.0]));
        assert_eq!(k, ComplexMatrix::from_real_diag(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn kron_trace_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = ComplexMatrix::from_fn(3, 3, |_, _| c(rng.gen(), rng.gen()));
            let b = ComplexMatrix::from_fn(4, 4, |_, _| c(rng.gen(), rng.gen()));
            let lhs = kron(&a, &b).trace();
            let rhs = a.trace() * b.trace();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_product_and_bell() {
        let ra = DensityMatrix::new(ComplexMatrix::from_real_diag(&[0.25, 0.75]), (2, 1)).unwrap();
        let rb = DensityMatrix::new(ComplexMatrix::from_real_diag(&[0.5, 0.3, 0.2]), (3, 1)).unwrap();
        let prod = DensityMatrix::product(&ra, &rb);
        assert!(partial_trace(&prod, Subsystem::B).unwrap().matrix().max_abs_diff(rb.matrix()) < 1e-15);
        assert!(partial_trace(&prod, Subsystem::A).unwrap().matrix().max_abs_diff(ra.matrix()) < 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityMatrix::from_pure(&[c(s, 0.0), ZERO, ZERO, c(s, 0.0)], (2, 2)).unwrap();
        let rb = partial_trace(&bell, Subsystem::B).unwrap();
        assert!(rb.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_inconsistent_dims() {
        let m = ComplexMatrix::identity(6);
        assert!(partial_trace_matrix(&m, (2, 2), Subsystem::A).is_err());
    }

    #[test]
    fn matrix_func_examples() {
        let m = ComplexMatrix::from_real_diag(&[1.0, 2.0, 3.0]);
        let sq = matrix_func(&m, |x| x * x).unwrap();
        assert!(sq.max_abs_diff(&ComplexMatrix::from_real_diag(&[1.0, 4.0, 9.0])) < 1e-12);

        let mixed = ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
        let ent = matrix_func(&mixed, |x| if x > 0.0 { -x * x.log2() } else { 0.0 }).unwrap();
        assert_abs_diff_eq!(ent.trace().re, 3f64.log2(), epsilon = 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(5, &mut rng);
        assert!(matrix_func(&h, |x| x).unwrap().max_abs_diff(&h) < 1e-10);
        assert!(matches!(matrix_func(&h, |x| x.ln() * f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn commutator_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_hermitian(4, &mut rng);
        let b = random_hermitian(4, &mut rng);
        assert!(commutator(&a, &a).unwrap().max_abs() < 1e-14);
        let k = commutator(&a, &b).unwrap();
        assert!((&k + &k.adjoint()).max_abs() < 1e-13);
        assert!(commutator(&a, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diag(&[0.5, 0.6]), (2, 1)).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diag(&[1.5, -0.5]), (2, 1)).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diag(&[0.5, 0.5]), (2, 2)).is_err());
        let mut m = ComplexMatrix::from_real_diag(&[0.5, 0.5]);
        m[(0, 1)] = c(0.0, 0.1);
        assert!(DensityMatrix::new(m, (2, 1)).is_err());
    }
}
