//! Polar-coordinate quadrature on disks, annuli and the truncated plane.
//!
//! Radial direction: composite Gauss–Legendre panels whose breakpoints can be
//! aligned with circles where an integrand is not smooth. Angular direction:
//! the uniform trapezoid rule, which is exact for trigonometric polynomials of
//! frequency below `n_theta`.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::fock::RadialWeight;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("non-finite integrand value {value} at node {node}")]
    NonFinite { node: Complex64, value: Complex64 },
    #[error("invalid quadrature grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, QuadratureError>;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess, refined by Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Resolution knobs shared by every polar grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule {
    /// Gauss–Legendre nodes per radial panel.
    pub gauss_order: usize,
    /// Upper bound on radial panel length.
    pub panel_width: f64,
    /// Uniform angular nodes.
    pub n_theta: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self {
            gauss_order: 12,
            panel_width: 0.5,
            n_theta: 64,
        }
    }
}

impl QuadratureRule {
    pub fn validate(&self) -> Result<()> {
        if self.gauss_order < 4 {
            return Err(QuadratureError::InvalidGrid(format!(
                "gauss_order must be >= 4, got {}",
                self.gauss_order
            )));
        }
        if self.n_theta < 8 {
            return Err(QuadratureError::InvalidGrid(format!(
                "n_theta must be >= 8, got {}",
                self.n_theta
            )));
        }
        if !(self.panel_width.is_finite() && self.panel_width > 0.0) {
            return Err(QuadratureError::InvalidGrid(format!(
                "panel_width must be positive, got {}",
                self.panel_width
            )));
        }
        Ok(())
    }

    pub fn with_gauss_order(mut self, order: usize) -> Self {
        self.gauss_order = order;
        self
    }

    pub fn with_n_theta(mut self, n_theta: usize) -> Self {
        self.n_theta = n_theta;
        self
    }

    pub fn with_panel_width(mut self, width: f64) -> Self {
        self.panel_width = width;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Disk {
        center: Complex64,
        r: f64,
    },
    Annulus {
        center: Complex64,
        r_in: f64,
        r_out: f64,
    },
    /// The disk `|z| <= r` about the origin, standing in for the whole plane.
    PlaneTruncated {
        r: f64,
    },
}

impl Domain {
    pub fn center(&self) -> Complex64 {
        match *self {
            Domain::Disk { center, .. } | Domain::Annulus { center, .. } => center,
            Domain::PlaneTruncated { .. } => Complex64::new(0.0, 0.0),
        }
    }

    fn radial_range(&self) -> (f64, f64) {
        match *self {
            Domain::Disk { r, .. } => (0.0, r),
            Domain::Annulus { r_in, r_out, .. } => (r_in, r_out),
            Domain::PlaneTruncated { r } => (0.0, r),
        }
    }

    pub fn area(&self) -> f64 {
        let (a, b) = self.radial_range();
        PI * (b * b - a * a)
    }
}

/// Tensor-product polar grid. Nodes are `center + radius[i] * unit[j]` with
/// `unit[j] = exp(2πi j / n_theta)`.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    domain: Domain,
    radial_panels: Vec<(f64, f64)>,
    gauss_order: usize,
    n_theta: usize,
    radii: Vec<f64>,
    /// Gauss weight times the Jacobian `rho`.
    radial_weights: Vec<f64>,
    units: Vec<Complex64>,
}

impl PolarGrid {
    /// `breaks` are radii, measured from the domain center, where panels must
    /// start or end. Values outside the radial range are ignored.
    pub fn new(domain: Domain, rule: &QuadratureRule, breaks: &[f64]) -> Result<Self> {
        rule.validate()?;
        let (lo, hi) = domain.radial_range();
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
            return Err(QuadratureError::InvalidGrid(format!(
                "radial range [{lo}, {hi}] is empty or invalid"
            )));
        }
        let mut cuts: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|b| b.is_finite() && *b > lo && *b < hi)
            .collect();
        cuts.push(lo);
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * hi);

        let mut radial_panels = Vec::new();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let pieces = ((b - a) / rule.panel_width).ceil().max(1.0) as usize;
            let h = (b - a) / pieces as f64;
            for p in 0..pieces {
                let pa = a + p as f64 * h;
                let pb = if p + 1 == pieces {
                    b
                } else {
                    a + (p + 1) as f64 * h
                };
                radial_panels.push((pa, pb));
            }
        }

        let (x, w) = gauss_legendre(rule.gauss_order);
        let mut radii = Vec::with_capacity(radial_panels.len() * rule.gauss_order);
        let mut radial_weights = Vec::with_capacity(radii.capacity());
        for &(a, b) in &radial_panels {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (xi, wi) in x.iter().zip(&w) {
                let rho = mid + half * xi;
                radii.push(rho);
                radial_weights.push(wi * half * rho);
            }
        }
        let units = unit_circle(rule.n_theta);
        Ok(Self {
            domain,
            radial_panels,
            gauss_order: rule.gauss_order,
            n_theta: rule.n_theta,
            radii,
            radial_weights,
            units,
        })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn center(&self) -> Complex64 {
        self.domain.center()
    }

    pub fn radial_panels(&self) -> &[(f64, f64)] {
        &self.radial_panels
    }

    pub fn gauss_order(&self) -> usize {
        self.gauss_order
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    /// `exp(2πi j / n_theta)` for `j = 0..n_theta`.
    pub fn units(&self) -> &[Complex64] {
        &self.units
    }

    pub fn angular_weight(&self) -> f64 {
        2.0 * PI / self.n_theta as f64
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, ring: usize, j: usize) -> Complex64 {
        self.center() + self.units[j] * self.radii[ring]
    }

    /// All `(node, weight)` pairs, ring by ring.
    pub fn nodes(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        let aw = self.angular_weight();
        self.radii.iter().enumerate().flat_map(move |(i, _)| {
            (0..self.n_theta).map(move |j| (self.node(i, j), self.radial_weights[i] * aw))
        })
    }

    pub fn weight_sum(&self) -> f64 {
        self.radial_weights.iter().sum::<f64>() * 2.0 * PI
    }

    /// Sum of `weight * f(node)`. Each ring is summed first, then rings are
    /// combined in increasing radius, so the result is reproducible.
    pub fn integrate<F>(&self, f: F) -> Result<Complex64>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let mut total = Complex64::new(0.0, 0.0);
        for (i, &wr) in self.radial_weights.iter().enumerate() {
            let mut ring = Complex64::new(0.0, 0.0);
            for j in 0..self.n_theta {
                let z = self.node(i, j);
                let v = f(z);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(QuadratureError::NonFinite { node: z, value: v });
                }
                ring += v;
            }
            total += ring * wr;
        }
        Ok(total * self.angular_weight())
    }

    pub fn integrate_real<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(Complex64) -> f64,
    {
        self.integrate(|z| Complex64::new(f(z), 0.0)).map(|v| v.re)
    }
}

pub(crate) fn unit_circle(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64))
        .collect()
}

/// Radii, measured from `center`, at which the origin-centred circles
/// `|w| = c` for `c` in `circles` meet the disk of radius `r_max` about
/// `center`. These are the panel breaks that bracket every crossing.
pub fn breaks_for_center(center: Complex64, circles: &[f64], r_max: f64) -> Vec<f64> {
    let d = center.norm();
    let mut out = Vec::new();
    for &c in circles {
        for rho in [(d - c).abs(), d + c] {
            if rho > 0.0 && rho < r_max {
                out.push(rho);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// `∫_{B(center, r)} f dv`, with panel breaks placed where the
/// origin-centred circles `circles` cross the disk.
pub fn integrate_disk<F>(
    f: F,
    center: Complex64,
    r: f64,
    rule: &QuadratureRule,
    circles: &[f64],
) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let grid = PolarGrid::new(
        Domain::Disk { center, r },
        rule,
        &breaks_for_center(center, circles, r),
    )?;
    grid.integrate(f)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneIntegral {
    pub value: f64,
    /// Upper bound for `∫_{|z|>R} e^{-2φ} dv`, from `φ(ρ) >= φ(0) + m ρ²/4`.
    pub tail_bound: f64,
    /// Set when `tail_bound` exceeds the requested tolerance.
    pub tail_warning: bool,
}

/// `∫_{|z|<=R} f(z) e^{-2φ(z)} dv(z)` for a radial weight.
pub fn integrate_plane_weighted<F>(
    f: F,
    weight: &RadialWeight,
    r: f64,
    rule: &QuadratureRule,
    tail_tol: f64,
) -> Result<PlaneIntegral>
where
    F: Fn(Complex64) -> f64,
{
    let grid = PolarGrid::new(Domain::PlaneTruncated { r }, rule, &[])?;
    let value = grid.integrate_real(|z| {
        let v = f(z);
        if v == 0.0 {
            0.0
        } else {
            v * (-2.0 * weight.phi(z.norm())).exp()
        }
    })?;
    let m = weight.lower_bound();
    let tail_bound = 2.0 * PI / m * (-2.0 * weight.phi(0.0) - 0.5 * m * r * r).exp();
    Ok(PlaneIntegral {
        value,
        tail_bound,
        tail_warning: tail_bound > tail_tol,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactnessEntry {
    pub a: usize,
    pub b: usize,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactnessReport {
    pub entries: Vec<ExactnessEntry>,
    pub max_rel_error: f64,
}

/// Error table for `u^a ū^b`, `u = w - center`, with `a + b <= max_degree`,
/// integrated over a disk grid. Errors are relative to `∫|u|^{a+b}`.
pub fn exactness_report(grid: &PolarGrid, max_degree: usize) -> Result<ExactnessReport> {
    let r = match grid.domain() {
        Domain::Disk { r, .. } => r,
        Domain::PlaneTruncated { r } => r,
        Domain::Annulus { .. } => {
            return Err(QuadratureError::InvalidGrid(
                "exactness report needs a disk grid".into(),
            ))
        }
    };
    let center = grid.center();
    let mut entries = Vec::new();
    let mut max_rel_error: f64 = 0.0;
    for deg in 0..=max_degree {
        let scale = 2.0 * PI * r.powi(deg as i32 + 2) / (deg as f64 + 2.0);
        for a in 0..=deg {
            let b = deg - a;
            let got = grid.integrate(|w| {
                let u = w - center;
                u.powi(a as i32) * u.conj().powi(b as i32)
            })?;
            let exact = if a == b { scale } else { 0.0 };
            let rel_error = (got - exact).norm() / scale;
            max_rel_error = max_rel_error.max(rel_error);
            entries.push(ExactnessEntry { a, b, rel_error });
        }
    }
    Ok(ExactnessReport {
        entries,
        max_rel_error,
    })
}

/// Settings for [`integrate_radial_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveRule {
    pub order: usize,
    pub panel_width: f64,
    pub rel_tol: f64,
    pub max_depth: usize,
}

impl Default for AdaptiveRule {
    fn default() -> Self {
        Self {
            order: 12,
            panel_width: 0.5,
            rel_tol: 1e-13,
            max_depth: 40,
        }
    }
}

/// One-dimensional adaptive Gauss–Legendre integration of `f` over `[a, b]`.
///
/// Panels never straddle `breaks`. A panel is bisected until the difference
/// between its estimate and the sum of its halves falls below
/// `rel_tol * scale`, where `scale` is the magnitude of a first full pass.
pub fn integrate_radial_adaptive<F>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    rule: &AdaptiveRule,
) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    if !(a.is_finite() && b.is_finite() && b >= a) {
        return Err(QuadratureError::InvalidGrid(format!(
            "invalid interval [{a}, {b}]"
        )));
    }
    if b == a {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (x, w) = gauss_legendre(rule.order);
    let panel = |lo: f64, hi: f64| -> Result<Complex64> {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut s = Complex64::new(0.0, 0.0);
        for (xi, wi) in x.iter().zip(&w) {
            let t = mid + half * xi;
            let v = f(t);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(QuadratureError::NonFinite {
                    node: Complex64::new(t, 0.0),
                    value: v,
                });
            }
            s += v * *wi;
        }
        Ok(s * half)
    };

    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|t| *t > a && *t < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut panels = Vec::new();
    for c in cuts.windows(2) {
        let pieces = ((c[1] - c[0]) / rule.panel_width).ceil().max(1.0) as usize;
        let h = (c[1] - c[0]) / pieces as f64;
        for p in 0..pieces {
            let lo = c[0] + p as f64 * h;
            let hi = if p + 1 == pieces { c[1] } else { lo + h };
            panels.push((lo, hi));
        }
    }

    // First pass on halves so the scale is not fooled by a coarse miss.
    let mut first = Vec::with_capacity(panels.len());
    let mut scale = 0.0;
    for &(lo, hi) in &panels {
        let mid = 0.5 * (lo + hi);
        let whole = panel(lo, hi)?;
        let left = panel(lo, mid)?;
        let right = panel(mid, hi)?;
        scale += left.norm() + right.norm();
        first.push((whole, left, right));
    }
    let tol = rule.rel_tol * scale;
    let length = b - a;

    #[allow(clippy::too_many_arguments)]
    fn refine<P>(
        panel: &P,
        lo: f64,
        hi: f64,
        whole: Complex64,
        left: Complex64,
        right: Complex64,
        tol: f64,
        length: f64,
        depth: usize,
    ) -> Result<Complex64>
    where
        P: Fn(f64, f64) -> Result<Complex64>,
    {
        let refined = left + right;
        let budget =
            (tol * (hi - lo) / length).max(64.0 * f64::EPSILON * (left.norm() + right.norm()));
        if depth == 0 || (refined - whole).norm() <= budget {
            return Ok(refined);
        }
        let mid = 0.5 * (lo + hi);
        let q1 = 0.5 * (lo + mid);
        let q3 = 0.5 * (mid + hi);
        let l = refine(
            panel,
            lo,
            mid,
            left,
            panel(lo, q1)?,
            panel(q1, mid)?,
            tol,
            length,
            depth - 1,
        )?;
        let r = refine(
            panel,
            mid,
            hi,
            right,
            panel(mid, q3)?,
            panel(q3, hi)?,
            tol,
            length,
            depth - 1,
        )?;
        Ok(l + r)
    }

    let mut total = Complex64::new(0.0, 0.0);
    for (&(lo, hi), &(whole, left, right)) in panels.iter().zip(&first) {
        total += refine(
            &panel,
            lo,
            hi,
            whole,
            left,
            right,
            tol,
            length,
            rule.max_depth,
        )?;
    }
    Ok(total)
}
