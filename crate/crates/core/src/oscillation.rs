//! Local oscillation functionals on disks `B(z, r)` and their lattice
//! aggregates.
//!
//! All disk quantities use the normalized area measure `dv / |B(z, r)|`.
//! `G_{q,r}(f)(z)` is the `L^q` distance from `f` to analytic polynomials of
//! degree at most `D` on the disk; for `q = 2` the scaled monomials
//! `√(j+1) ((w − z)/r)^j` are orthonormal and the minimizer is explicit.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::fock::{FockBasis, FockError};
use crate::quadrature::{breaks_for_center, Domain, PolarGrid, QuadratureError, QuadratureRule};
use crate::symbols::Symbol;

/// IRLS settings for `q != 2`.
pub const IRLS_DAMPING: f64 = 0.5;
pub const IRLS_MAX_ITER: usize = 200;
/// Residual floor used in IRLS weights `|res|^{q-2}`.
const IRLS_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OscillationError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("projection residual {value:e} is negative beyond tolerance")]
    NumericalInconsistency { value: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Fock(#[from] FockError),
}

pub type Result<T> = std::result::Result<T, OscillationError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationParams {
    /// Ball radius.
    pub r: f64,
    /// Inner exponent.
    pub q: f64,
    /// Outer exponent (`s` for IDA/IMO, `p` for BMO).
    pub s: f64,
    /// Maximum degree of the approximating polynomials.
    pub degree: usize,
    /// Lattice spacing `δ`.
    pub spacing: f64,
    /// Aggregation truncation radius.
    pub r_max: f64,
    pub tol: f64,
    pub rule: QuadratureRule,
}

impl Default for OscillationParams {
    fn default() -> Self {
        Self {
            r: 1.0,
            q: 2.0,
            s: 1.0,
            degree: 25,
            spacing: 0.5,
            r_max: 8.0,
            tol: 1e-9,
            rule: QuadratureRule::default(),
        }
    }
}

impl OscillationParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(OscillationError::InvalidParams(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("r", self.r)?;
        positive("s", self.s)?;
        positive("spacing", self.spacing)?;
        positive("r_max", self.r_max)?;
        positive("tol", self.tol)?;
        if !(self.q.is_finite() && self.q >= 1.0) {
            return Err(OscillationError::InvalidParams(format!(
                "q must be >= 1, got {}",
                self.q
            )));
        }
        self.rule.validate()?;
        Ok(())
    }
}

/// Quadrature rule on a disk that is exact for `|p|²` with `deg p <= degree`.
pub fn disk_rule(rule: &QuadratureRule, degree: usize) -> QuadratureRule {
    let n_theta = rule.n_theta.max((2 * degree + 2).next_multiple_of(8));
    rule.with_gauss_order(rule.gauss_order.max(degree + 2))
        .with_n_theta(n_theta)
}

/// Symbol values on a disk grid, with weights normalized to total mass 1.
#[derive(Debug, Clone)]
pub struct DiskSample {
    center: Complex64,
    r: f64,
    /// `(w − z) / r` per node.
    offsets: Vec<Complex64>,
    values: Vec<Complex64>,
    weights: Vec<f64>,
}

impl DiskSample {
    pub fn new(symbol: &Symbol, center: Complex64, r: f64, rule: &QuadratureRule) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(OscillationError::InvalidParams(format!(
                "radius must be positive, got {r}"
            )));
        }
        let breaks = breaks_for_center(center, symbol.break_radii(), r);
        let grid = PolarGrid::new(Domain::Disk { center, r }, rule, &breaks)?;
        let scale = grid.angular_weight() / (PI * r * r);
        let mut offsets = Vec::with_capacity(grid.len());
        let mut values = Vec::with_capacity(grid.len());
        let mut weights = Vec::with_capacity(grid.len());
        for (i, (&rho, &w)) in grid.radii().iter().zip(grid.radial_weights()).enumerate() {
            for (j, u) in grid.units().iter().enumerate() {
                let node = grid.node(i, j);
                let v = symbol.eval(node);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(QuadratureError::NonFinite { node, value: v }.into());
                }
                offsets.push(u * (rho / r));
                values.push(v);
                weights.push(w * scale);
            }
        }
        Ok(Self {
            center,
            r,
            offsets,
            values,
            weights,
        })
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Weighted mean, accumulated relative to the first value so that
    /// constant data average exactly to that constant.
    pub fn mean(&self) -> Complex64 {
        let Some(&pivot) = self.values.first() else {
            return Complex64::new(0.0, 0.0);
        };
        let mass: f64 = self.weights.iter().sum();
        let shift: Complex64 = self
            .values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| (v - pivot) * w)
            .sum();
        pivot + shift / mass
    }

    /// Average of `|f|²`.
    pub fn mean_sqr(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v.norm_sqr() * w)
            .sum()
    }

    pub fn mo(&self, p: f64) -> f64 {
        let avg = self.mean();
        let total: f64 = self
            .values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * (v - avg).norm().powf(p))
            .sum();
        total.max(0.0).powf(1.0 / p)
    }

    /// Values of `√(j+1) u^j`, node-major with stride `degree + 1`.
    fn design(&self, degree: usize) -> Vec<Complex64> {
        let stride = degree + 1;
        let mut out = Vec::with_capacity(self.len() * stride);
        for u in &self.offsets {
            let mut power = Complex64::new(1.0, 0.0);
            for j in 0..stride {
                out.push(power * ((j + 1) as f64).sqrt());
                power *= u;
            }
        }
        out
    }

    fn residual(&self, design: &[Complex64], coeffs: &[Complex64]) -> Vec<Complex64> {
        let stride = coeffs.len();
        self.values
            .iter()
            .enumerate()
            .map(|(n, v)| {
                let row = &design[n * stride..(n + 1) * stride];
                v - row
                    .iter()
                    .zip(coeffs)
                    .map(|(a, c)| a * c)
                    .sum::<Complex64>()
            })
            .collect()
    }

    fn lq(&self, res: &[Complex64], q: f64) -> f64 {
        let total: f64 = res
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| w * e.norm().powf(q))
            .sum();
        total.max(0.0).powf(1.0 / q)
    }

    /// Orthogonal-expansion coefficients of `f` against `√(j+1) u^j`.
    fn orthogonal_coeffs(&self, design: &[Complex64], degree: usize) -> Vec<Complex64> {
        let stride = degree + 1;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); stride];
        for (n, (v, w)) in self.values.iter().zip(&self.weights).enumerate() {
            let row = &design[n * stride..(n + 1) * stride];
            for (c, a) in coeffs.iter_mut().zip(row) {
                *c += v * a.conj() * w;
            }
        }
        coeffs
    }

    /// `G_{q,r}(f)(z)` over polynomials of degree at most `degree`.
    pub fn g(&self, q: f64, degree: usize, tol: f64) -> GEstimate {
        let design = self.design(degree);
        let mut coeffs = self.orthogonal_coeffs(&design, degree);
        let mut res = self.residual(&design, &coeffs);
        let l2 = self.lq(&res, 2.0);
        if q == 2.0 {
            return GEstimate {
                value: l2,
                converged: true,
                iterations: 0,
            };
        }
        let stride = degree + 1;
        let mut best = self.lq(&res, q);
        for iter in 1..=IRLS_MAX_ITER {
            let omega: Vec<f64> = res
                .iter()
                .zip(&self.weights)
                .map(|(e, w)| w * e.norm().max(IRLS_FLOOR).powf(q - 2.0))
                .collect();
            let mut gram = vec![Complex64::new(0.0, 0.0); stride * stride];
            let mut rhs = vec![Complex64::new(0.0, 0.0); stride];
            for (n, (v, om)) in self.values.iter().zip(&omega).enumerate() {
                let row = &design[n * stride..(n + 1) * stride];
                for a in 0..stride {
                    let ca = row[a].conj() * om;
                    rhs[a] += ca * v;
                    for b in 0..stride {
                        gram[a * stride + b] += ca * row[b];
                    }
                }
            }
            let Some(solution) = cholesky_solve(&gram, &rhs, stride) else {
                return GEstimate {
                    value: best,
                    converged: false,
                    iterations: iter,
                };
            };
            let mut change = 0.0;
            let mut size = 0.0;
            for (c, s) in coeffs.iter_mut().zip(&solution) {
                let next = *c * (1.0 - IRLS_DAMPING) + s * IRLS_DAMPING;
                change += (next - *c).norm_sqr();
                size += next.norm_sqr();
                *c = next;
            }
            res = self.residual(&design, &coeffs);
            best = best.min(self.lq(&res, q));
            if change.sqrt() < tol * (1.0 + size.sqrt()) {
                return GEstimate {
                    value: best,
                    converged: true,
                    iterations: iter,
                };
            }
        }
        GEstimate {
            value: best,
            converged: false,
            iterations: IRLS_MAX_ITER,
        }
    }
}

/// Solves `A x = b` for Hermitian positive definite `A` (row-major).
fn cholesky_solve(a: &[Complex64], b: &[Complex64], n: usize) -> Option<Vec<Complex64>> {
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k].conj();
            }
            if i == j {
                if sum.re.is_nan() || sum.re <= 0.0 {
                    return None;
                }
                l[i * n + i] = Complex64::new(sum.re.sqrt(), 0.0);
            } else {
                l[i * n + j] = sum / l[j * n + j].re;
            }
        }
    }
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i].re;
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k * n + i].conj() * x[k];
        }
        x[i] = sum / l[i * n + i].re;
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GEstimate {
    pub value: f64,
    /// False when IRLS stopped at the iteration cap.
    pub converged: bool,
    pub iterations: usize,
}

/// The average `f̂_r(z)`.
pub fn mean_avg(f: &Symbol, z: Complex64, r: f64, rule: &QuadratureRule) -> Result<Complex64> {
    Ok(DiskSample::new(f, z, r, rule)?.mean())
}

/// `MO_{p,r}(f)(z)`.
pub fn mo(f: &Symbol, z: Complex64, r: f64, p: f64, rule: &QuadratureRule) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(OscillationError::InvalidParams(format!(
            "p must be >= 1, got {p}"
        )));
    }
    Ok(DiskSample::new(f, z, r, rule)?.mo(p))
}

/// `G_{q,r}(f)(z)` with polynomials of degree at most `degree`.
pub fn g_functional(
    f: &Symbol,
    z: Complex64,
    r: f64,
    q: f64,
    degree: usize,
    rule: &QuadratureRule,
) -> Result<GEstimate> {
    g_functional_tol(f, z, r, q, degree, rule, OscillationParams::default().tol)
}

pub fn g_functional_tol(
    f: &Symbol,
    z: Complex64,
    r: f64,
    q: f64,
    degree: usize,
    rule: &QuadratureRule,
    tol: f64,
) -> Result<GEstimate> {
    if !(q.is_finite() && q >= 1.0) {
        return Err(OscillationError::InvalidParams(format!(
            "q must be >= 1, got {q}"
        )));
    }
    let sample = DiskSample::new(f, z, r, &disk_rule(rule, degree))?;
    Ok(sample.g(q, degree, tol))
}

/// Points of `δ(ℤ + iℤ)` in the closed disk of radius `r_max`, ordered by
/// modulus, then real part, then imaginary part.
pub fn lattice(spacing: f64, r_max: f64) -> Vec<Complex64> {
    let n = (r_max / spacing).floor() as i64;
    let mut pts: Vec<(i64, i64)> = Vec::new();
    let limit = r_max * r_max * (1.0 + 1e-12);
    for i in -n..=n {
        for j in -n..=n {
            let (x, y) = (i as f64 * spacing, j as f64 * spacing);
            if x * x + y * y <= limit {
                pts.push((i, j));
            }
        }
    }
    pts.sort_by_key(|&(i, j)| (i * i + j * j, i, j));
    pts.into_iter()
        .map(|(i, j)| Complex64::new(i as f64 * spacing, j as f64 * spacing))
        .collect()
}

/// Radii at which partial aggregates are recorded: `1, 2, ..., ⌊R_max⌋`, then `R_max`.
fn checkpoints(r_max: f64) -> Vec<f64> {
    let mut out: Vec<f64> = (1..=r_max.floor() as usize).map(|k| k as f64).collect();
    if out.last().is_none_or(|last| *last < r_max) {
        out.push(r_max);
    }
    out
}

/// Per-point functional values on a truncated lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeReport {
    pub points: Vec<Complex64>,
    pub values: Vec<f64>,
    /// `(R, Σ_{|z|<=R} δ² value^s)`.
    pub partial_aggregates: Vec<(f64, f64)>,
    pub exponent: f64,
    pub spacing: f64,
    pub r_max: f64,
    /// False if any per-point IRLS solve hit its iteration cap.
    pub converged: bool,
    /// The increments over `(R/4, R/2]` and `(R/2, R]` do not shrink.
    pub diverging: bool,
}

impl LatticeReport {
    fn build(
        points: Vec<Complex64>,
        values: Vec<f64>,
        exponent: f64,
        spacing: f64,
        r_max: f64,
        converged: bool,
    ) -> Self {
        let mut report = Self {
            points,
            values,
            partial_aggregates: Vec::new(),
            exponent,
            spacing,
            r_max,
            converged,
            diverging: false,
        };
        report.partial_aggregates = checkpoints(r_max)
            .into_iter()
            .map(|r| (r, report.aggregate_within(r)))
            .collect();
        let a = report.aggregate_within(r_max / 4.0);
        let b = report.aggregate_within(r_max / 2.0);
        let c = report.aggregate_within(r_max);
        report.diverging = is_diverging(b - a, c - b, DIVERGENCE_FLOOR);
        report
    }

    /// Same per-point values aggregated with another outer exponent.
    pub fn with_exponent(&self, exponent: f64) -> Self {
        Self::build(
            self.points.clone(),
            self.values.clone(),
            exponent,
            self.spacing,
            self.r_max,
            self.converged,
        )
    }

    /// `Σ_{|z|<=R} δ² value^s`.
    pub fn aggregate_within(&self, r: f64) -> f64 {
        let cell = self.spacing * self.spacing;
        let limit = r * r * (1.0 + 1e-12);
        self.points
            .iter()
            .zip(&self.values)
            .filter(|(z, _)| z.norm_sqr() <= limit)
            .map(|(_, v)| cell * v.powf(self.exponent))
            .sum()
    }

    /// Aggregate over `R_in < |z| <= R_out`.
    pub fn ring_increment(&self, r_in: f64, r_out: f64) -> f64 {
        self.aggregate_within(r_out) - self.aggregate_within(r_in)
    }

    pub fn total(&self) -> f64 {
        self.aggregate_within(self.r_max)
    }

    /// `total^{1/s}`.
    pub fn norm(&self) -> f64 {
        self.total().powf(1.0 / self.exponent)
    }

    /// `max_{|z|<R} value`.
    pub fn max_within(&self, r: f64) -> f64 {
        self.points
            .iter()
            .zip(&self.values)
            .filter(|(z, _)| z.norm() < r)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    }
}

/// Increments below this are treated as converged.
pub const DIVERGENCE_FLOOR: f64 = 1e-6;

/// A doubling sequence of increments is flagged as divergent when the later
/// one is non-negligible and at least 90% of the earlier one.
pub fn is_diverging(earlier: f64, later: f64, floor: f64) -> bool {
    later > floor && later >= 0.9 * earlier
}

fn lattice_values<F>(
    params: &OscillationParams,
    eval: F,
) -> Result<(Vec<Complex64>, Vec<f64>, bool)>
where
    F: Fn(Complex64) -> Result<(f64, bool)> + Sync,
{
    params.validate()?;
    let points = lattice(params.spacing, params.r_max);
    let evaluated: Vec<(f64, bool)> = points.par_iter().map(|z| eval(*z)).collect::<Result<_>>()?;
    let converged = evaluated.iter().all(|(_, c)| *c);
    let values = evaluated.into_iter().map(|(v, _)| v).collect();
    Ok((points, values, converged))
}

/// Truncated `‖G_{q,r}(f)‖_{L^s}^s` as a lattice Riemann sum.
pub fn ida_norm(f: &Symbol, params: &OscillationParams) -> Result<LatticeReport> {
    let rule = disk_rule(&params.rule, params.degree);
    let (points, values, converged) = lattice_values(params, |z| {
        let g = DiskSample::new(f, z, params.r, &rule)?.g(params.q, params.degree, params.tol);
        Ok((g.value, g.converged))
    })?;
    Ok(LatticeReport::build(
        points,
        values,
        params.s,
        params.spacing,
        params.r_max,
        converged,
    ))
}

/// Truncated `∫ MO_{2,r}(f)^s dv` as a lattice Riemann sum.
pub fn imo_norm(f: &Symbol, params: &OscillationParams) -> Result<LatticeReport> {
    let (points, values, converged) = lattice_values(params, |z| {
        Ok((DiskSample::new(f, z, params.r, &params.rule)?.mo(2.0), true))
    })?;
    Ok(LatticeReport::build(
        points,
        values,
        params.s,
        params.spacing,
        params.r_max,
        converged,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BmoReport {
    /// `sup_{|z|<=R_max} MO_{p,r}(f)(z)` over the lattice.
    pub sup: f64,
    pub argsup: Complex64,
    /// `(R, max over R−1 < |z| <= R)` for the unit rings up to `R_max`.
    pub ring_maxima: Vec<(f64, f64)>,
    /// The sup sits on the outermost ring and ring maxima increase across the
    /// last three rings.
    pub growth: bool,
}

/// Running sup of `MO_{p,r}(f)` over the lattice, with `p = params.s`.
pub fn bmo_sup(f: &Symbol, params: &OscillationParams) -> Result<BmoReport> {
    let p = params.s;
    if !(p.is_finite() && p >= 1.0) {
        return Err(OscillationError::InvalidParams(format!(
            "p must be >= 1, got {p}"
        )));
    }
    let (points, values, _) = lattice_values(params, |z| {
        Ok((DiskSample::new(f, z, params.r, &params.rule)?.mo(p), true))
    })?;
    let mut sup = 0.0;
    let mut argsup = Complex64::new(0.0, 0.0);
    for (z, v) in points.iter().zip(&values) {
        if *v > sup {
            sup = *v;
            argsup = *z;
        }
    }
    let outer = checkpoints(params.r_max);
    let mut ring_maxima = Vec::with_capacity(outer.len());
    let mut inner = 0.0;
    for r in outer {
        let m = points
            .iter()
            .zip(&values)
            .filter(|(z, _)| {
                let d = z.norm();
                d > inner && d <= r * (1.0 + 1e-12)
            })
            .map(|(_, v)| *v)
            .fold(0.0, f64::max);
        ring_maxima.push((r, m));
        inner = r * (1.0 + 1e-12);
    }
    let growth = match ring_maxima.as_slice() {
        [.., (_, a), (_, b), (_, c)] => {
            let r_last = ring_maxima[ring_maxima.len() - 2].0;
            sup > 0.0 && argsup.norm() > r_last && a < b && b < c
        }
        _ => false,
    };
    Ok(BmoReport {
        sup,
        argsup,
        ring_maxima,
        growth,
    })
}

/// `‖(I − P)(f ∘ τ_λ)‖` with `(f ∘ τ_λ)(w) = f(w − λ)` and `P` truncated to
/// `e_0, ..., e_M`, clipped at 0.
pub fn compactness_probe(
    f: &Symbol,
    lambda: Complex64,
    m: usize,
    basis: &FockBasis,
    rule: &QuadratureRule,
) -> Result<f64> {
    let breaks = breaks_for_center(-lambda, f.break_radii(), f64::INFINITY);
    let extra = f.growth_degree() + lambda.norm().ceil() as usize;
    let grid = basis.plane_grid(m, extra, m.max(120), rule, &breaks)?;
    let shifted = |w: Complex64| f.eval(w - lambda);
    let total = basis.norm_sqr(shifted, &grid)?;
    let coeffs = basis.project_coeffs(shifted, m, &grid)?;
    let captured: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let radicand = total - captured;
    if radicand < -1e-8 * total.max(1.0) {
        return Err(OscillationError::NumericalInconsistency { value: radicand });
    }
    Ok(radicand.max(0.0).sqrt())
}
