//! Minimization of the correlation measures over measurement families.
//!
//! Each family is a set of coordinates mapped onto the six measurement
//! angles. A run evaluates a deterministic seed lattice, refines the most
//! promising seeds and certifies the result with the stationarity
//! operator projected onto the family's tangent directions.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matlib::{hermitian_eig, ComplexMatrix, DensityMatrix};
use crate::measgeo::{classify, full_basis, full_unitary, MeasurementParams, MeasurementType, CLASSIFY_TOL};
use crate::models::alpha_star;
use crate::qmeasures::{Measure, Objective};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasurementFamily {
    #[serde(rename = "SPIN")]
    Spin,
    #[serde(rename = "TYPE_II")]
    TypeII,
    #[serde(rename = "TYPE_III")]
    TypeIII,
    #[serde(rename = "GENERAL")]
    General,
}

/// How a coordinate is kept in range.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Coord {
    /// `[0, π/4]`, enforced by reflection.
    Box,
    /// γ: period π.
    HalfTurn,
    /// Rotation angle, period 2π; lattice range `[0, span)`.
    Angle(f64),
}

impl MeasurementFamily {
    /// Ordered from most to least restricted.
    pub const ALL: [MeasurementFamily; 4] = [Self::Spin, Self::TypeII, Self::TypeIII, Self::General];

    pub fn label(&self) -> &'static str {
        match self {
            Self::Spin => "SPIN",
            Self::TypeII => "TYPE_II",
            Self::TypeIII => "TYPE_III",
            Self::General => "GENERAL",
        }
    }

    pub fn free_params(&self) -> usize {
        self.coords().len()
    }

    fn coords(&self) -> &'static [Coord] {
        const SPIN: [Coord; 2] = [Coord::Angle(PI), Coord::Angle(PI)];
        const II: [Coord; 2] = [Coord::Box, Coord::Angle(PI)];
        const III: [Coord; 3] = [Coord::Box, Coord::HalfTurn, Coord::Angle(PI)];
        const GENERAL: [Coord; 6] =
            [Coord::Box, Coord::Box, Coord::HalfTurn, Coord::Angle(2.0 * PI), Coord::Angle(PI), Coord::Angle(2.0 * PI)];
        match self {
            Self::Spin => &SPIN,
            Self::TypeII => &II,
            Self::TypeIII => &III,
            Self::General => &GENERAL,
        }
    }

    /// Measurement angles for family coordinates:
    /// spin `(θ_k, φ_k)`, type II `(α, φ)`, type III `(α, γ, φ)`, general
    /// `(α, β, γ, ψ, θ_r, φ_r)`. No range checks.
    pub fn to_params(&self, x: &[f64]) -> MeasurementParams {
        let a = match self {
            Self::Spin => [0.0, 0.0, 0.0, x[1], x[0], 0.0],
            Self::TypeII => [x[0], 0.0, 0.0, 0.0, 0.0, x[1]],
            Self::TypeIII => [x[0], FRAC_PI_4, x[1], 0.0, 0.0, x[2]],
            Self::General => [x[0], x[1], x[2], x[3], x[4], x[5]],
        };
        MeasurementParams::from_array(a)
    }

    /// Family coordinates of measurement angles produced by
    /// [`Self::to_params`].
    pub fn coords_of(&self, p: &MeasurementParams) -> Vec<f64> {
        match self {
            Self::Spin => vec![p.theta_r, p.psi],
            Self::TypeII => vec![p.alpha, p.phi_r],
            Self::TypeIII => vec![p.alpha, p.gamma, p.phi_r],
            Self::General => p.to_array().to_vec(),
        }
    }

    fn unitary(&self, x: &[f64]) -> ComplexMatrix {
        full_unitary(&self.to_params(x))
    }
}

impl fmt::Display for MeasurementFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for MeasurementFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spin" => Ok(Self::Spin),
            "ii" | "type_ii" => Ok(Self::TypeII),
            "iii" | "type_iii" => Ok(Self::TypeIII),
            "general" => Ok(Self::General),
            _ => Err(Error::Format(format!("unknown family '{s}' (expected spin, ii, iii or general)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Residual below which a result counts as converged.
    pub tol: f64,
    /// Residual at which refinement stops early.
    pub stop_tol: f64,
    /// Parameter step below which refinement stops.
    pub step_tol: f64,
    /// Iteration budget per start.
    pub max_iter: usize,
    /// Gradient-descent iterations before the quasi-Newton polish.
    pub descent_iter: usize,
    /// Central finite-difference step for the descent gradient.
    pub fd_step: f64,
    pub n_spin: usize,
    pub n_type_ii: usize,
    pub n_type_iii: usize,
    pub n_general: usize,
    /// Lattice seeds refined per run, lowest values first.
    pub refine_top: usize,
    /// Extra uniformly random starts.
    pub random_starts: usize,
    pub seed: u64,
    /// Families within this of the best value count as optimal.
    pub tie_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            stop_tol: 1e-13,
            step_tol: 1e-10,
            max_iter: 5000,
            descent_iter: 200,
            fd_step: 1e-6,
            n_spin: 5,
            n_type_ii: 5,
            n_type_iii: 4,
            n_general: 3,
            refine_top: 8,
            random_starts: 0,
            seed: 0,
            tie_tol: 1e-9,
        }
    }
}

impl OptimizerConfig {
    pub fn n_per_axis(&self, family: MeasurementFamily) -> usize {
        match family {
            MeasurementFamily::Spin => self.n_spin,
            MeasurementFamily::TypeII => self.n_type_ii,
            MeasurementFamily::TypeIII => self.n_type_iii,
            MeasurementFamily::General => self.n_general,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.tol, self.stop_tol, self.step_tol, self.fd_step, self.tie_tol];
        if positive.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::Domain("optimizer tolerances and steps must be positive".into()));
        }
        if [self.n_spin, self.n_type_ii, self.n_type_iii, self.n_general].iter().any(|&n| n < 2) {
            return Err(Error::Domain("seed lattices need at least 2 points per axis".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Domain("iteration budget must be positive".into()));
        }
        Ok(())
    }
}

/// A state and measure to minimize, optionally tagged as the aligned
/// mixture at angle θ so the analytic seed `tan α = tan²(θ/2)` is added.
#[derive(Clone, Debug)]
pub struct Target {
    objective: Objective,
    aligned_theta: Option<f64>,
}

impl Target {
    pub fn new(rho: &DensityMatrix, measure: Measure) -> Result<Self> {
        if rho.dims().1 != 3 {
            return Err(Error::Unsupported(format!("measured subsystem has dimension {}, expected 3", rho.dims().1)));
        }
        Ok(Self { objective: Objective::new(rho, measure)?, aligned_theta: None })
    }

    pub fn with_aligned_theta(mut self, theta: f64) -> Self {
        self.aligned_theta = Some(theta);
        self
    }

    pub fn measure(&self) -> &Measure {
        self.objective.measure()
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    fn value(&self, family: MeasurementFamily, x: &[f64]) -> f64 {
        self.objective.eval(&family.unitary(x)).unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub value: f64,
    pub params: MeasurementParams,
    pub family: MeasurementFamily,
    #[serde(rename = "type")]
    pub measurement_type: MeasurementType,
    /// Family-projected stationarity residual at `params`.
    pub residual_norm: f64,
    pub starts: usize,
    pub converged: bool,
    pub iterations: usize,
    /// `(iteration, value)` of the accepted steps of the winning start.
    pub trace: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct Refined {
    pub coords: Vec<f64>,
    pub value: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<(usize, f64)>,
}

fn reflect_box(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * FRAC_PI_4);
    if y > FRAC_PI_4 {
        2.0 * FRAC_PI_4 - y
    } else {
        y
    }
}

fn into_domain(family: MeasurementFamily, x: &mut [f64]) -> bool {
    let mut moved = false;
    for (xi, kind) in x.iter_mut().zip(family.coords()) {
        if *kind == Coord::Box {
            let r = reflect_box(*xi);
            moved |= r != *xi;
            *xi = r;
        }
    }
    moved
}

/// Clamps box coordinates onto `[0, π/4]`; reports whether any moved.
fn clamp_domain(family: MeasurementFamily, x: &mut [f64]) -> bool {
    let mut moved = false;
    for (xi, kind) in x.iter_mut().zip(family.coords()) {
        if *kind == Coord::Box {
            let c = xi.clamp(0.0, FRAC_PI_4);
            moved |= c != *xi;
            *xi = c;
        }
    }
    moved
}

const ACTIVE: f64 = 1e-12;

/// Relative width of the band in which two refined values count as equal.
const VALUE_NOISE: f64 = 1e-14;

/// Zeroes components of a descent-sense vector `v` (a gradient when
/// `descent` is false, a step direction otherwise) that point out of the
/// box at an active bound.
fn project_active(family: MeasurementFamily, x: &[f64], v: &mut [f64], descent: bool) {
    for ((vi, xi), kind) in v.iter_mut().zip(x).zip(family.coords()) {
        let out = if descent { -*vi } else { *vi };
        if *kind == Coord::Box && ((*xi <= ACTIVE && out > 0.0) || (*xi >= FRAC_PI_4 - ACTIVE && out < 0.0)) {
            *vi = 0.0;
        }
    }
}

/// Zeroes gradient components that push a box coordinate outward at an
/// active bound.
fn project_kkt(family: MeasurementFamily, x: &[f64], g: &mut [f64]) {
    project_active(family, x, g, false);
}

/// Central finite-difference gradient in family coordinates, with outward
/// components at active bounds removed.
pub fn projected_fd_gradient(target: &Target, family: MeasurementFamily, x: &[f64], h: f64) -> Vec<f64> {
    let mut g = fd_gradient(target, family, x, h);
    project_kkt(family, x, &mut g);
    g
}

fn fd_gradient(target: &Target, family: MeasurementFamily, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = x[i] + h;
            let up = target.value(family, &y);
            y[i] = x[i] - h;
            let down = target.value(family, &y);
            y[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Gradient from the stationarity operator: `∂_p I = Re Tr(∂_p U U† Δ)`,
/// with `∂_p U` from a five-point stencil.
fn analytic_gradient(target: &Target, family: MeasurementFamily, x: &[f64]) -> Result<Vec<f64>> {
    const H: f64 = 1e-3;
    let u = family.unitary(x);
    let udag_delta = u.adjoint().matmul(&target.objective.delta(&u)?)?;
    let mut y = x.to_vec();
    let mut at = |i: usize, s: f64| {
        y[i] = x[i] + s * H;
        let m = family.unitary(&y);
        y[i] = x[i];
        m
    };
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let (p2, p1, m1, m2) = (at(i, 2.0), at(i, 1.0), at(i, -1.0), at(i, -2.0));
        let du = ComplexMatrix::from_fn(3, 3, |r, c| {
            (-p2[(r, c)] + p1[(r, c)] * 8.0 - m1[(r, c)] * 8.0 + m2[(r, c)]) / (12.0 * H)
        });
        g.push(du.trace_product(&udag_delta)?.re);
    }
    Ok(g)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Family-projected stationarity residual at `x`.
pub fn projected_residual(target: &Target, family: MeasurementFamily, x: &[f64]) -> Result<f64> {
    let mut g = analytic_gradient(target, family, x)?;
    project_kkt(family, x, &mut g);
    Ok(norm(&g))
}

/// Local descent from `start` (family coordinates). Values are monotone
/// non-increasing up to rounding. Adaptive gradient descent on finite
/// differences, a BFGS polish on the stationarity gradient, then Newton
/// steps.
pub fn refine(target: &Target, family: MeasurementFamily, start: &[f64], cfg: &OptimizerConfig) -> Result<Refined> {
    if start.len() != family.free_params() {
        return Err(Error::Dimension(format!("{} coordinates for family {family}", start.len())));
    }
    let mut x = start.to_vec();
    into_domain(family, &mut x);
    let mut f = target.value(family, &x);
    let mut trace = vec![(0, f)];
    let mut iter = 0;

    let mut g0 = analytic_gradient(target, family, &x)?;
    project_kkt(family, &x, &mut g0);
    if norm(&g0) < cfg.stop_tol {
        let residual_norm = norm(&g0);
        return Ok(Refined { coords: x, value: f, residual_norm, iterations: 0, converged: true, trace });
    }

    // Adaptive-step gradient descent.
    let mut eta = 0.0;
    while iter < cfg.descent_iter.min(cfg.max_iter) {
        let mut g = fd_gradient(target, family, &x, cfg.fd_step);
        project_kkt(family, &x, &mut g);
        let gn = norm(&g);
        if gn == 0.0 {
            break;
        }
        if eta == 0.0 {
            eta = 0.05 / gn;
        }
        let mut accepted = false;
        while eta * gn >= cfg.step_tol {
            let mut y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - eta * gi).collect();
            into_domain(family, &mut y);
            let fy = target.value(family, &y);
            if fy < f {
                x = y;
                f = fy;
                eta *= 1.2;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        iter += 1;
        if !accepted {
            break;
        }
        trace.push((iter, f));
    }

    // BFGS polish, projected onto the box.
    let n = x.len();
    let mut g = analytic_gradient(target, family, &x)?;
    project_kkt(family, &x, &mut g);
    let mut hinv: Option<Vec<f64>> = None;
    let mut stalls = 0;
    while iter < cfg.max_iter && norm(&g) >= cfg.stop_tol {
        let d: Vec<f64> = match &hinv {
            Some(h) => (0..n).map(|i| -(0..n).map(|j| h[i * n + j] * g[j]).sum::<f64>()).collect(),
            None => {
                // First step: unit-length-scaled steepest descent.
                let gn = norm(&g);
                g.iter().map(|gi| -gi * (0.1f64).min(1.0 / gn.max(1e-300)) * 0.1).collect()
            }
        };
        let mut d = d;
        project_active(family, &x, &mut d, true);
        if dot(&g, &d) >= 0.0 {
            d = g.iter().map(|gi| -gi).collect();
            hinv = None;
        }
        let slope = dot(&g, &d);
        let mut t = 1.0;
        let mut step = None;
        while t * norm(&d) >= cfg.step_tol {
            let mut y: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
            let reflected = clamp_domain(family, &mut y);
            let fy = target.value(family, &y);
            let armijo = fy <= f + 1e-4 * t * slope;
            if armijo || fy <= f {
                let mut gy = analytic_gradient(target, family, &y)?;
                project_kkt(family, &y, &mut gy);
                // Below rounding, only accept steps that shrink the gradient.
                if armijo || norm(&gy) < norm(&g) {
                    step = Some((y, fy, gy, reflected));
                    break;
                }
            }
            t *= 0.5;
        }
        iter += 1;
        let Some((y, fy, gy, reflected)) = step else {
            // Retry once from steepest descent before giving up.
            if hinv.is_some() && stalls == 0 {
                hinv = None;
                stalls += 1;
                continue;
            }
            break;
        };
        stalls = 0;
        let s: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = gy.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        let step_len = norm(&s);
        x = y;
        f = fy;
        g = gy;
        trace.push((iter, f));
        if reflected || sy <= 1e-300 {
            hinv = None;
        } else {
            let mut h = hinv.take().unwrap_or_else(|| {
                let scale = sy / dot(&yv, &yv);
                (0..n * n).map(|k| if k % (n + 1) == 0 { scale } else { 0.0 }).collect()
            });
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * yv[j]).sum()).collect();
            let yhy = dot(&yv, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
            hinv = Some(h);
        }
        if step_len < cfg.step_tol {
            break;
        }
    }

    newton_polish(target, family, cfg, &mut x, &mut f, &mut g, &mut iter, &mut trace)?;

    let residual_norm = norm(&g);
    Ok(Refined { coords: x, value: f, residual_norm, iterations: iter, converged: residual_norm < cfg.tol, trace })
}

/// Newton steps on the free coordinates with a finite-difference Hessian of
/// the analytic gradient. Negative curvature is flipped, so every step is a
/// descent direction. A step is kept when it shrinks the projected gradient
/// and raises the value by no more than rounding.
#[allow(clippy::too_many_arguments)]
fn newton_polish(
    target: &Target,
    family: MeasurementFamily,
    cfg: &OptimizerConfig,
    x: &mut Vec<f64>,
    f: &mut f64,
    g: &mut Vec<f64>,
    iter: &mut usize,
    trace: &mut Vec<(usize, f64)>,
) -> Result<()> {
    const H: f64 = 1e-5;
    const ROUNDING: f64 = 1e-14;
    for _ in 0..20 {
        if *iter >= cfg.max_iter || norm(g) < cfg.stop_tol {
            break;
        }
        let free: Vec<usize> = (0..x.len())
            .filter(|&i| {
                let at_bound = family.coords()[i] == Coord::Box && (x[i] <= ACTIVE || x[i] >= FRAC_PI_4 - ACTIVE);
                !(at_bound && g[i] == 0.0)
            })
            .collect();
        let k = free.len();
        if k == 0 {
            break;
        }
        let mut cols = Vec::with_capacity(k);
        let mut y = x.clone();
        for &i in &free {
            y[i] = x[i] + H;
            let up = analytic_gradient(target, family, &y)?;
            y[i] = x[i] - H;
            let down = analytic_gradient(target, family, &y)?;
            y[i] = x[i];
            cols.push(free.iter().map(|&j| (up[j] - down[j]) / (2.0 * H)).collect::<Vec<f64>>());
        }
        let hess = ComplexMatrix::from_fn(k, k, |a, b| ((cols[a][b] + cols[b][a]) / 2.0).into());
        let eig = hermitian_eig(&hess)?;
        let scale = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let floor = (1e-6 * scale).max(1e-8);
        let inv = eig.map(|l| 1.0 / l.abs().max(floor));
        let d: Vec<f64> =
            (0..k).map(|a| -(0..k).map(|b| inv[(a, b)].re * g[free[b]]).sum::<f64>()).collect();

        let gn = norm(g);
        let mut t = 1.0;
        let mut step = None;
        while t > 1e-4 {
            let mut y = x.clone();
            for (a, &i) in free.iter().enumerate() {
                y[i] += t * d[a];
            }
            clamp_domain(family, &mut y);
            let fy = target.value(family, &y);
            if fy <= *f + ROUNDING * f.abs().max(1.0) {
                let mut gy = analytic_gradient(target, family, &y)?;
                project_kkt(family, &y, &mut gy);
                if norm(&gy) < gn {
                    step = Some((y, fy, gy));
                    break;
                }
            }
            t *= 0.5;
        }
        *iter += 1;
        let Some((y, fy, gy)) = step else { break };
        *x = y;
        *f = fy;
        *g = gy;
        trace.push((*iter, fy));
    }
    Ok(())
}

fn lattice_axis(kind: Coord, n: usize) -> Vec<f64> {
    let (lo, span) = match kind {
        Coord::Box => (0.0, FRAC_PI_4),
        Coord::HalfTurn => (-FRAC_PI_2, PI),
        Coord::Angle(span) => (0.0, span),
    };
    (0..n).map(|k| lo + (k as f64 + 0.5) * span / n as f64).collect()
}

fn lattice(family: MeasurementFamily, n: usize) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for &kind in family.coords() {
        let axis = lattice_axis(kind, n);
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

/// Deterministic lattice of cell centres over the family's parameter box:
/// `n_per_axis` points per coordinate.
pub fn seed_grid(family: MeasurementFamily, n_per_axis: usize) -> Result<Vec<MeasurementParams>> {
    if n_per_axis < 2 {
        return Err(Error::Domain("seed lattice needs at least 2 points per axis".into()));
    }
    Ok(lattice(family, n_per_axis).iter().map(|x| family.to_params(x)).collect())
}

/// Special seeds in family coordinates: spin axes and, for tagged aligned
/// mixtures, the analytic angle.
fn special_seeds(family: MeasurementFamily, aligned_theta: Option<f64>) -> Vec<Vec<f64>> {
    let mut seeds = Vec::new();
    match family {
        MeasurementFamily::Spin => {
            seeds.extend([vec![0.0, 0.0], vec![FRAC_PI_2, 0.0], vec![FRAC_PI_2, FRAC_PI_2]]);
        }
        MeasurementFamily::TypeII => {
            if let Some(t) = aligned_theta {
                let a = alpha_star(t);
                seeds.extend([vec![a, 0.0], vec![a, FRAC_PI_2]]);
            }
        }
        MeasurementFamily::TypeIII => {
            if let Some(t) = aligned_theta {
                let a = alpha_star(t);
                seeds.extend([vec![a, 0.0, 0.0], vec![a, 0.0, FRAC_PI_2], vec![a, FRAC_PI_2, 0.0]]);
            }
        }
        MeasurementFamily::General => {
            if let Some(t) = aligned_theta {
                let a = alpha_star(t);
                seeds.extend([vec![a, 0.0, 0.0, 0.0, 0.0, 0.0], vec![a, FRAC_PI_4, 0.0, 0.0, 0.0, 0.0]]);
            }
        }
    }
    seeds
}

fn random_seeds(family: MeasurementFamily, cfg: &OptimizerConfig) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.random_starts)
        .map(|_| {
            family
                .coords()
                .iter()
                .map(|kind| match kind {
                    Coord::Box => rng.gen_range(0.0..FRAC_PI_4),
                    Coord::HalfTurn => rng.gen_range(-FRAC_PI_2..FRAC_PI_2),
                    Coord::Angle(span) => rng.gen_range(0.0..*span),
                })
                .collect()
        })
        .collect()
}

/// Runs one family. `extra` seeds are always refined (general-family
/// coordinates, used when `family` is GENERAL).
fn minimize_seeded(
    target: &Target,
    family: MeasurementFamily,
    cfg: &OptimizerConfig,
    extra: &[Vec<f64>],
) -> Result<OptimizationResult> {
    cfg.validate()?;
    let lattice_pts = lattice(family, cfg.n_per_axis(family));
    let mut evaluated: Vec<(usize, f64)> =
        lattice_pts.par_iter().map(|x| target.value(family, x)).collect::<Vec<_>>().into_iter().enumerate().collect();
    evaluated.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let mut starts: Vec<Vec<f64>> =
        evaluated.iter().take(cfg.refine_top).map(|&(i, _)| lattice_pts[i].clone()).collect();
    starts.extend(special_seeds(family, target.aligned_theta));
    starts.extend(random_seeds(family, cfg));
    starts.extend(extra.iter().cloned());

    let refined: Vec<Refined> = starts.par_iter().map(|s| refine(target, family, s, cfg)).collect::<Result<_>>()?;
    let lowest = refined.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    // Starts that agree with the lowest value up to rounding are equivalent;
    // among them a certified one wins, then the smallest residual.
    let noise = VALUE_NOISE * lowest.abs().max(1.0);
    let best = refined
        .iter()
        .enumerate()
        .filter(|(_, r)| r.value <= lowest + noise)
        .min_by(|a, b| {
            b.1.converged
                .cmp(&a.1.converged)
                .then(a.1.residual_norm.total_cmp(&b.1.residual_norm))
                .then(a.0.cmp(&b.0))
        })
        .map(|(_, r)| r)
        .ok_or_else(|| Error::Domain("no starts".into()))?;
    // The lattice minimum bounds the result from above.
    let lattice_best = evaluated.first().map(|e| e.1).unwrap_or(f64::INFINITY);
    debug_assert!(best.value <= lattice_best + noise);

    let params = family.to_params(&best.coords).wrapped();
    let measurement_type = classify(&full_basis(&params), CLASSIFY_TOL)?;
    let value = if best.value < 0.0 && best.value >= -1e-10 { 0.0 } else { best.value };
    Ok(OptimizationResult {
        value,
        params,
        family,
        measurement_type,
        residual_norm: best.residual_norm,
        starts: lattice_pts.len() + starts.len() - cfg.refine_top.min(lattice_pts.len()),
        converged: best.converged,
        iterations: best.iterations,
        trace: best.trace.clone(),
    })
}

/// General-family seeds derived from restricted optima: the optimum
/// itself and copies nudged off the parity-preserving submanifold.
fn embedded_seeds(restricted: &[&OptimizationResult]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for r in restricted {
        let base = MeasurementFamily::General.coords_of(&r.params);
        out.push(base.clone());
        for shift in [0.1, 0.3] {
            let mut x = base.clone();
            x[1] = reflect_box(x[1] + shift);
            out.push(x);
        }
    }
    out
}

/// Minimizes over one family. For GENERAL, the restricted families are
/// solved first and their optima seed the general search, so the general
/// value never exceeds them.
pub fn minimize(target: &Target, family: MeasurementFamily, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    match family {
        MeasurementFamily::General => {
            let restricted = MeasurementFamily::ALL[..3]
                .iter()
                .map(|&f| minimize_seeded(target, f, cfg, &[]))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&OptimizationResult> = restricted.iter().collect();
            minimize_seeded(target, family, cfg, &embedded_seeds(&refs))
        }
        _ => minimize_seeded(target, family, cfg, &[]),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyComparison {
    pub results: BTreeMap<MeasurementFamily, OptimizationResult>,
    pub best_value: f64,
    /// Most restricted family among those tied with the best value.
    pub optimal_family: MeasurementFamily,
    /// All families within the tie tolerance of the best value.
    pub tied: Vec<MeasurementFamily>,
}

impl FamilyComparison {
    pub fn optimal(&self) -> &OptimizationResult {
        &self.results[&self.optimal_family]
    }
}

pub fn minimize_all_families(target: &Target, cfg: &OptimizerConfig) -> Result<FamilyComparison> {
    let restricted = MeasurementFamily::ALL[..3]
        .par_iter()
        .map(|&f| minimize_seeded(target, f, cfg, &[]))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&OptimizationResult> = restricted.iter().collect();
    let general = minimize_seeded(target, MeasurementFamily::General, cfg, &embedded_seeds(&refs))?;
    let mut results = BTreeMap::new();
    for r in restricted.into_iter().chain(std::iter::once(general)) {
        results.insert(r.family, r);
    }
    Ok(compare(results, cfg.tie_tol))
}

/// Applies the tie rule to per-family results.
pub fn compare(results: BTreeMap<MeasurementFamily, OptimizationResult>, tie_tol: f64) -> FamilyComparison {
    let best_value = results.values().map(|r| r.value).fold(f64::INFINITY, f64::min);
    let tied: Vec<MeasurementFamily> =
        results.values().filter(|r| r.value - best_value <= tie_tol).map(|r| r.family).collect();
    let optimal_family = *tied.iter().min().expect("at least one family");
    FamilyComparison { results, best_value, optimal_family, tied }
}

/// Orders results by value, then by family restriction.
pub fn by_value(a: &OptimizationResult, b: &OptimizationResult) -> Ordering {
    a.value.total_cmp(&b.value).then(a.family.cmp(&b.family))
}
