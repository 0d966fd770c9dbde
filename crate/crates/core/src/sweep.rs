//! θ-sweeps over the aligned mixture and their CSV rows.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{aligned_mixture, d_closed, i2_closed};
use crate::optim::{minimize_all_families, FamilyComparison, OptimizerConfig, Target};
use crate::qmeasures::Measure;

pub const CSV_HEADER: &str = "theta,D,I1,I2,D_family,I1_family,I2_family,alpha,beta,gamma,phi,\
D_residual,I1_residual,I2_residual,D_closed,I2_closed";

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn theta_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(0.0..FRAC_PI_2 + 1e-12).contains(&lo) || !(lo < hi && hi <= FRAC_PI_2 + 1e-12) || n < 2 {
        return Err(Error::Domain(format!("need 0 <= theta_min < theta_max <= pi/2 and n >= 2, got [{lo}, {hi}], n={n}")));
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

/// `θ_k = k·(π/2)/(n+1)` for `k = 1..=n`: the open interval without its
/// endpoints.
pub fn interior_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 * FRAC_PI_2 / (n + 1) as f64).collect()
}

/// Family comparison for one measure on `ρ_θ`.
pub fn aligned_comparison(theta: f64, measure: Measure, cfg: &OptimizerConfig) -> Result<FamilyComparison> {
    let rho = aligned_mixture(theta)?.rho;
    minimize_all_families(&Target::new(&rho, measure)?.with_aligned_theta(theta), cfg)
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub theta: f64,
    pub d: FamilyComparison,
    pub i1: FamilyComparison,
    pub i2: FamilyComparison,
}

impl SweepPoint {
    pub fn get(&self, m: &Measure) -> &FamilyComparison {
        match m {
            Measure::D => &self.d,
            Measure::I1 => &self.i1,
            _ => &self.i2,
        }
    }

    /// One CSV line. The angle columns describe the `I₁` optimum, the one
    /// that can break parity; `phi` is its final `S_z` rotation.
    pub fn csv_row(&self) -> String {
        let f = |x: f64| format!("{x:.11e}");
        let best = |c: &FamilyComparison| c.best_value.max(0.0);
        let p = self.i1.optimal().params;
        let mut line = String::new();
        let _ = write!(
            line,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            f(self.theta),
            f(best(&self.d)),
            f(best(&self.i1)),
            f(best(&self.i2)),
            self.d.optimal_family,
            self.i1.optimal_family,
            self.i2.optimal_family,
            f(p.alpha),
            f(p.beta),
            f(p.gamma),
            f(p.phi_r),
            f(self.d.optimal().residual_norm),
            f(self.i1.optimal().residual_norm),
            f(self.i2.optimal().residual_norm),
            f(d_closed(self.theta)),
            f(i2_closed(self.theta)),
        );
        line
    }
}

/// All three measures at every θ. Points are computed in parallel and
/// returned in input order.
pub fn aligned_sweep(thetas: &[f64], cfg: &OptimizerConfig) -> Result<Vec<SweepPoint>> {
    thetas
        .par_iter()
        .map(|&theta| {
            Ok(SweepPoint {
                theta,
                d: aligned_comparison(theta, Measure::D, cfg)?,
                i1: aligned_comparison(theta, Measure::I1, cfg)?,
                i2: aligned_comparison(theta, Measure::I2, cfg)?,
            })
        })
        .collect()
}

pub fn to_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&p.csv_row());
        out.push('\n');
    }
    out
}
