//! Spin operators, rotations, `S_z` parity and spin coherent states.
//!
//! Basis ordering is `|s⟩, |s-1⟩, …, |-s⟩`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matlib::{hermitian_eig, kron, ComplexMatrix, ZERO};

#[derive(Clone, Debug)]
pub struct SpinTriple {
    pub s: f64,
    pub sx: ComplexMatrix,
    pub sy: ComplexMatrix,
    pub sz: ComplexMatrix,
}

impl SpinTriple {
    pub fn dim(&self) -> usize {
        self.sz.rows()
    }

    /// `n·S` for a real 3-vector `n`.
    pub fn along(&self, n: [f64; 3]) -> ComplexMatrix {
        let a = self.sx.scale_real(n[0]);
        let b = self.sy.scale_real(n[1]);
        let c = self.sz.scale_real(n[2]);
        &(&a + &b) + &c
    }

    /// `(⟨S_x⟩, ⟨S_y⟩, ⟨S_z⟩)` in the normalised state `v`.
    pub fn expectation(&self, v: &[Complex64]) -> [f64; 3] {
        let ev = |m: &ComplexMatrix| -> f64 {
            let mv = m.mul_vec(v).expect("state dimension matches spin");
            v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum()
        };
        [ev(&self.sx), ev(&self.sy), ev(&self.sz)]
    }
}

/// Dimension `2s + 1`, or an error when `2s` is not a positive integer.
pub fn spin_dim(s: f64) -> Result<usize> {
    let two_s = 2.0 * s;
    if two_s.is_nan() || two_s < 1.0 || (two_s - two_s.round()).abs() > 1e-12 || two_s > 1e4 {
        return Err(Error::InvalidSpin(s));
    }
    Ok(two_s.round() as usize + 1)
}

pub fn spin_operators(s: f64) -> Result<SpinTriple> {
    let d = spin_dim(s)?;
    let m_of = |i: usize| s - i as f64;
    // S+ |m⟩ = sqrt(s(s+1) - m(m+1)) |m+1⟩; |m+1⟩ sits one index earlier.
    let splus = ComplexMatrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            let m = m_of(j);
            Complex64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0)
        } else {
            ZERO
        }
    });
    let sminus = splus.adjoint();
    let sx = (&splus + &sminus).scale_real(0.5);
    let sy = (&splus - &sminus).scale(Complex64::new(0.0, -0.5));
    let sz = ComplexMatrix::from_real_diag(&(0..d).map(m_of).collect::<Vec<_>>());
    Ok(SpinTriple { s, sx, sy, sz })
}

/// `exp(-i·angle·(axis·S))`, computed spectrally.
pub fn rotation(s: f64, axis: [f64; 3], angle: f64) -> Result<ComplexMatrix> {
    let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("rotation axis has norm {norm}")));
    }
    let ops = spin_operators(s)?;
    exp_i_hermitian(&ops.along(axis), -angle)
}

/// `exp(i·t·H)` for Hermitian `H`.
pub(crate) fn exp_i_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    let n = h.rows();
    let v = &eig.eigenvectors;
    let phases: Vec<Complex64> = eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, t * l)).collect();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * phases[k] * v[(j, k)].conj()).sum()))
}

/// Diagonal `±1` parity operator.
#[derive(Clone, Debug)]
pub struct ParityOperator {
    signs: Vec<f64>,
}

impl ParityOperator {
    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&self.signs)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        v.iter().zip(&self.signs).map(|(z, s)| z * s).collect()
    }

    /// `P M P` without forming products.
    pub fn conjugate(&self, m: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)] * (self.signs[i] * self.signs[j]))
    }

    pub fn tensor(&self, other: &ParityOperator) -> ParityOperator {
        let signs = self.signs.iter().flat_map(|a| other.signs.iter().map(move |b| a * b)).collect();
        ParityOperator { signs }
    }
}

/// `exp(iπ(S_z + s))`: `+1` on `|±1⟩` and `-1` on `|0⟩` for spin 1.
pub fn parity_z(s: f64) -> Result<ParityOperator> {
    let d = spin_dim(s)?;
    // m + s = 2s - i is an integer for index i.
    let signs = (0..d).map(|i| if (d - 1 - i) % 2 == 0 { 1.0 } else { -1.0 }).collect();
    Ok(ParityOperator { signs })
}

/// `⊗_i exp(iπ(S_z^i - s_i))` over the listed sites.
pub fn composite_parity(spins: &[f64]) -> Result<ParityOperator> {
    let (first, rest) = spins
        .split_first()
        .ok_or_else(|| Error::Domain("composite parity needs at least one site".into()))?;
    let site = |s: f64| -> Result<ParityOperator> {
        // m - s = -i for index i.
        let d = spin_dim(s)?;
        Ok(ParityOperator { signs: (0..d).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect() })
    };
    let mut p = site(*first)?;
    for &s in rest {
        p = p.tensor(&site(s)?);
    }
    Ok(p)
}

/// `|θ⟩ = exp(-iθS_y)|s⟩`, maximal spin along `(sin θ, 0, cos θ)`.
pub fn coherent_state(s: f64, theta: f64) -> Result<Vec<Complex64>> {
    Ok(rotation(s, [0.0, 1.0, 0.0], theta)?.column(0))
}

/// `Σ_i S_z^i` on a chain of identical spins.
pub fn total_sz(s: f64, n: usize) -> Result<ComplexMatrix> {
    let ops = spin_operators(s)?;
    let d = ops.dim();
    let mut total = ComplexMatrix::zeros(d.pow(n as u32), d.pow(n as u32));
    for site in 0..n {
        total = &total + &embed(&ops.sz, site, n, d);
    }
    Ok(total)
}

/// Embeds a single-site operator at `site` in an `n`-site chain of local
/// dimension `d`.
pub fn embed(op: &ComplexMatrix, site: usize, n: usize, d: usize) -> ComplexMatrix {
    let left = ComplexMatrix::identity(d.pow(site as u32));
    let right = ComplexMatrix::identity(d.pow((n - site - 1) as u32));
    kron(&kron(&left, op), &right)
}
