//! Radial weights, the monomial orthonormal basis of `F²_φ`, its reproducing
//! kernel and coefficient extraction against the basis.
//!
//! For a radial weight the monomials `z^k` are mutually orthogonal in
//! `L²(e^{-2φ} dv)`, so `e_k = z^k / √c_k` with
//! `c_k = 2π ∫₀^∞ ρ^{2k+1} e^{-2φ(ρ)} dρ` is an orthonormal basis. All norms
//! are kept as `ln c_k`; `k!` alone overflows a double near `k = 170`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::quadrature::{
    integrate_radial_adaptive, AdaptiveRule, Domain, PolarGrid, QuadratureError, QuadratureRule,
};

/// Largest monomial degree a basis may hold unless configured otherwise.
pub const DEFAULT_MAX_DEGREE: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("monomial degree {k} exceeds basis maximum {max}")]
    DegreeOutOfRange { k: usize, max: usize },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

pub type Result<T> = std::result::Result<T, FockError>;

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum WeightProfile {
    /// `φ(z) = α|z|²`.
    Gaussian { alpha: f64 },
    /// A radial `φ` together with its Laplacian `φ'' + φ'/ρ`.
    Custom {
        label: String,
        phi: RadialFn,
        laplacian: RadialFn,
    },
}

impl fmt::Debug for WeightProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightProfile::Gaussian { alpha } => write!(f, "Gaussian {{ alpha: {alpha} }}"),
            WeightProfile::Custom { label, .. } => write!(f, "Custom {{ label: {label:?} }}"),
        }
    }
}

/// A radial weight with claimed curvature bounds `m <= Δφ <= M`.
#[derive(Debug, Clone)]
pub struct RadialWeight {
    profile: WeightProfile,
    lower: f64,
    upper: f64,
}

impl RadialWeight {
    pub fn gaussian(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(FockError::InvalidWeight(format!(
                "gaussian alpha must be positive, got {alpha}"
            )));
        }
        Ok(Self {
            profile: WeightProfile::Gaussian { alpha },
            lower: 4.0 * alpha,
            upper: 4.0 * alpha,
        })
    }

    /// `e^{-2φ} = e^{-|z|²}`, i.e. `α = 1/2`.
    pub fn classical() -> Self {
        Self::gaussian(0.5).expect("alpha = 1/2 is valid")
    }

    /// A custom radial profile. The Laplacian is sampled on `[0, r_max]` and
    /// must stay inside `[m, M]`.
    pub fn custom(
        label: impl Into<String>,
        phi: RadialFn,
        laplacian: RadialFn,
        m: f64,
        big_m: f64,
        r_max: f64,
    ) -> Result<Self> {
        if !(m.is_finite() && big_m.is_finite() && m > 0.0 && m <= big_m) {
            return Err(FockError::InvalidWeight(format!(
                "curvature bounds must satisfy 0 < m <= M, got m={m}, M={big_m}"
            )));
        }
        if !phi(0.0).is_finite() {
            return Err(FockError::InvalidWeight("phi(0) is not finite".into()));
        }
        const SAMPLES: usize = 4000;
        let slack = 1e-12 * big_m;
        for i in 0..=SAMPLES {
            let rho = r_max * i as f64 / SAMPLES as f64;
            let lap = laplacian(rho);
            let val = phi(rho);
            if !lap.is_finite() || !val.is_finite() {
                return Err(FockError::InvalidWeight(format!(
                    "profile not finite at rho={rho}"
                )));
            }
            if lap < m - slack || lap > big_m + slack {
                return Err(FockError::InvalidWeight(format!(
                    "laplacian {lap} at rho={rho} outside [{m}, {big_m}]"
                )));
            }
        }
        Ok(Self {
            profile: WeightProfile::Custom {
                label: label.into(),
                phi,
                laplacian,
            },
            lower: m,
            upper: big_m,
        })
    }

    pub fn profile(&self) -> &WeightProfile {
        &self.profile
    }

    pub fn gaussian_alpha(&self) -> Option<f64> {
        match self.profile {
            WeightProfile::Gaussian { alpha } => Some(alpha),
            WeightProfile::Custom { .. } => None,
        }
    }

    pub fn phi(&self, rho: f64) -> f64 {
        match &self.profile {
            WeightProfile::Gaussian { alpha } => alpha * rho * rho,
            WeightProfile::Custom { phi, .. } => phi(rho),
        }
    }

    pub fn laplacian(&self, rho: f64) -> f64 {
        match &self.profile {
            WeightProfile::Gaussian { alpha } => 4.0 * alpha,
            WeightProfile::Custom { laplacian, .. } => laplacian(rho),
        }
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower
    }

    pub fn upper_bound(&self) -> f64 {
        self.upper
    }

    /// Truncation radius `√(20/m) + 2` for plain weighted integrals.
    pub fn default_plane_radius(&self) -> f64 {
        (20.0 / self.lower).sqrt() + 2.0
    }

    /// `ln c_k` with `c_k = ∫|z|^{2k} e^{-2φ} dv`.
    pub fn log_monomial_norm(&self, k: usize) -> Result<f64> {
        match &self.profile {
            WeightProfile::Gaussian { alpha } => {
                // π k! / (2α)^{k+1}
                let log_fact: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
                Ok(PI.ln() + log_fact - (k as f64 + 1.0) * (2.0 * alpha).ln())
            }
            WeightProfile::Custom { .. } => self.log_radial_moment(2.0 * k as f64 + 1.0),
        }
    }

    /// `ln(2π ∫₀^∞ ρ^{power} e^{-2φ(ρ)} dρ)` by adaptive quadrature around
    /// the peak of the log integrand.
    pub(crate) fn log_radial_moment(&self, power: f64) -> Result<f64> {
        let h = |rho: f64| power * rho.ln() - 2.0 * self.phi(rho);
        let (peak_at, peak) = self.log_peak(power);
        let end = self.decay_radius(&h, peak_at, peak, 80.0);
        let integral = integrate_radial_adaptive(
            |rho| {
                if rho <= 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new((h(rho) - peak).exp(), 0.0)
                }
            },
            0.0,
            end,
            &[peak_at],
            &AdaptiveRule::default(),
        )?
        .re;
        if !(integral.is_finite() && integral > 0.0) {
            return Err(FockError::InvalidWeight(format!(
                "radial moment of order {power} is not integrable"
            )));
        }
        Ok((2.0 * PI).ln() + peak + integral.ln())
    }

    /// Location and value of the maximum of `power·ln ρ − 2φ(ρ)`.
    fn log_peak(&self, power: f64) -> (f64, f64) {
        let h = |rho: f64| power * rho.ln() - 2.0 * self.phi(rho);
        // φ grows at least like mρ²/4, so the peak lies below this radius.
        let guess = ((power.max(1.0) + 1.0) / self.lower).sqrt() * 2.0 + 1.0;
        let steps = 4000;
        let mut best = (guess / steps as f64, f64::NEG_INFINITY);
        for i in 1..=steps {
            let rho = guess * i as f64 / steps as f64;
            let v = h(rho);
            if v > best.1 {
                best = (rho, v);
            }
        }
        // golden-section polish
        let step = guess / steps as f64;
        let (mut a, mut b) = ((best.0 - step).max(1e-300), best.0 + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if h(c) > h(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let rho = 0.5 * (a + b);
        (rho, h(rho).max(best.1))
    }

    /// First radius beyond `from` at which `h` has dropped `depth` below `peak`.
    fn decay_radius<H: Fn(f64) -> f64>(&self, h: &H, from: f64, peak: f64, depth: f64) -> f64 {
        let mut rho = from.max(0.5);
        let step = 0.25;
        while h(rho) > peak - depth {
            rho += step;
        }
        rho
    }
}

/// The first `n_max + 1` normalized monomials `e_k = z^k / √c_k`.
#[derive(Debug, Clone)]
pub struct FockBasis {
    weight: RadialWeight,
    log_norms: Vec<f64>,
}

impl FockBasis {
    pub fn new(weight: RadialWeight, n_max: usize) -> Result<Self> {
        let log_norms = match weight.gaussian_alpha() {
            Some(alpha) => {
                // c_{k+1}/c_k = (k+1)/(2α)
                let mut out = Vec::with_capacity(n_max + 1);
                let mut acc = PI.ln() - (2.0 * alpha).ln();
                out.push(acc);
                for k in 0..n_max {
                    acc += ((k as f64 + 1.0) / (2.0 * alpha)).ln();
                    out.push(acc);
                }
                out
            }
            None => (0..=n_max)
                .map(|k| weight.log_monomial_norm(k))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(Self { weight, log_norms })
    }

    pub fn classical(n_max: usize) -> Self {
        Self::new(RadialWeight::classical(), n_max).expect("gaussian basis construction")
    }

    pub fn weight(&self) -> &RadialWeight {
        &self.weight
    }

    pub fn n_max(&self) -> usize {
        self.log_norms.len() - 1
    }

    pub fn log_norms(&self) -> &[f64] {
        &self.log_norms
    }

    pub fn log_norm(&self, k: usize) -> Result<f64> {
        self.log_norms
            .get(k)
            .copied()
            .ok_or(FockError::DegreeOutOfRange {
                k,
                max: self.n_max(),
            })
    }

    pub fn check_degree(&self, k: usize) -> Result<()> {
        self.log_norm(k).map(|_| ())
    }

    /// `e_k(z)`; returns 0 when the magnitude underflows.
    pub fn basis_eval(&self, k: usize, z: Complex64) -> Result<Complex64> {
        let ln_c = self.log_norm(k)?;
        if k == 0 {
            return Ok(Complex64::new((-0.5 * ln_c).exp(), 0.0));
        }
        let rho = z.norm();
        if rho == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mag = (k as f64 * rho.ln() - 0.5 * ln_c).exp();
        Ok(Complex64::from_polar(mag, k as f64 * z.arg()))
    }

    /// Partial reproducing kernel `Σ_{k<=terms} e_k(w) conj(e_k(z))`.
    pub fn kernel_eval(&self, w: Complex64, z: Complex64, terms: usize) -> Result<Complex64> {
        self.check_degree(terms)?;
        let mut sum = Complex64::new(0.0, 0.0);
        let rw = w.norm();
        let rz = z.norm();
        let phase = w.arg() - z.arg();
        for k in 0..=terms {
            let ln_c = self.log_norms[k];
            if k == 0 {
                sum += (-ln_c).exp();
                continue;
            }
            if rw == 0.0 || rz == 0.0 {
                break;
            }
            let mag = (k as f64 * (rw.ln() + rz.ln()) - ln_c).exp();
            sum += Complex64::from_polar(mag, k as f64 * phase);
        }
        Ok(sum)
    }

    /// Radius past which `|e_k|² e^{-2φ}` carries no mass above `e^{-75}`
    /// relative to its peak, for every `k <= k_max`.
    pub fn cover_radius(&self, k_max: usize) -> f64 {
        let power = 2.0 * k_max as f64 + 1.0;
        let (peak_at, peak) = self.weight.log_peak(power);
        let h = |rho: f64| power * rho.ln() - 2.0 * self.weight.phi(rho);
        self.weight.decay_radius(&h, peak_at, peak, 75.0)
    }

    /// A truncated-plane grid wide enough for `e_0..e_{k_max}` (plus
    /// `extra_degree` powers of growth from a symbol), with enough angular
    /// nodes to resolve frequencies up to `max_frequency` without aliasing.
    pub fn plane_grid(
        &self,
        k_max: usize,
        extra_degree: usize,
        max_frequency: usize,
        rule: &QuadratureRule,
        breaks: &[f64],
    ) -> Result<PolarGrid> {
        let r = self.cover_radius(k_max + extra_degree);
        let n_theta = rule
            .n_theta
            .max((2 * max_frequency + 16).next_multiple_of(8));
        let rule = rule.with_n_theta(n_theta);
        Ok(PolarGrid::new(Domain::PlaneTruncated { r }, &rule, breaks)?)
    }

    /// `ln |e_k(ρ)| − φ(ρ)` for each ring of `grid` and each `k <= k_max`,
    /// laid out ring-major.
    pub(crate) fn log_radial_table(&self, grid: &PolarGrid, k_max: usize) -> Result<Vec<f64>> {
        self.check_degree(k_max)?;
        let mut out = Vec::with_capacity(grid.radii().len() * (k_max + 1));
        for &rho in grid.radii() {
            let ln_rho = rho.ln();
            let phi = self.weight.phi(rho);
            for k in 0..=k_max {
                out.push(k as f64 * ln_rho - 0.5 * self.log_norms[k] - phi);
            }
        }
        Ok(out)
    }

    /// `⟨f, e_m⟩_φ` for `m = 0..=m_max` on a plane grid.
    pub fn project_coeffs<F>(&self, f: F, m_max: usize, grid: &PolarGrid) -> Result<Vec<Complex64>>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let table = self.log_radial_table(grid, m_max)?;
        let n_theta = grid.n_theta();
        let units = grid.units();
        let aw = grid.angular_weight();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m_max + 1];
        let mut values = vec![Complex64::new(0.0, 0.0); n_theta];
        for (i, (&rho, &wr)) in grid.radii().iter().zip(grid.radial_weights()).enumerate() {
            for (j, v) in values.iter_mut().enumerate() {
                let z = grid.center() + units[j] * rho;
                let fz = f(z);
                if !(fz.re.is_finite() && fz.im.is_finite()) {
                    return Err(QuadratureError::NonFinite { node: z, value: fz }.into());
                }
                *v = fz;
            }
            let row = &table[i * (m_max + 1)..(i + 1) * (m_max + 1)];
            for (m, coeff) in coeffs.iter_mut().enumerate() {
                // Σ_j f_j e^{-i m θ_j}, exact phase lookup
                let mut s = Complex64::new(0.0, 0.0);
                for (j, v) in values.iter().enumerate() {
                    let idx = (n_theta - (m * j) % n_theta) % n_theta;
                    s += v * units[idx];
                }
                // e_m conj carries e^{-φ}; the remaining e^{-φ} is in the row too
                let radial = (row[m] - self.weight.phi(rho)).exp();
                *coeff += s * (wr * aw * radial);
            }
        }
        Ok(coeffs)
    }

    /// `‖f‖²_φ` on a plane grid.
    pub fn norm_sqr<F>(&self, f: F, grid: &PolarGrid) -> Result<f64>
    where
        F: Fn(Complex64) -> Complex64,
    {
        Ok(grid.integrate_real(|z| {
            let v = f(z).norm_sqr();
            if v == 0.0 {
                0.0
            } else {
                v * (-2.0 * self.weight.phi(z.norm())).exp()
            }
        })?)
    }
}
