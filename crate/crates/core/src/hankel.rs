//! Finite sections of `H_f = (I − P) M_f : F²_φ → L²_φ`.
//!
//! With `A_{mk} = ⟨f e_k, e_m⟩` (`m <= M`, `k <= N`) and
//! `B_{jk} = ⟨f e_k, f e_j⟩`, the truncated normal operator is
//! `H_f* H_f ≈ B − Aᴴ A`, because `‖H_f e_k‖² = ‖f e_k‖² − ‖P(f e_k)‖²`.
//!
//! For a symbol `e^{iνθ} g(ρ)` the product `f e_k` has a single angular
//! frequency, so `P(f e_k)` is a multiple of `e_{k+ν}` and `H_f* H_f` is
//! diagonal in the monomial basis: [`single_frequency_spectrum`] evaluates
//! those diagonal entries directly as one-dimensional radial integrals.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::fock::{FockBasis, FockError};
use crate::quadrature::{Domain, PolarGrid, QuadratureError, QuadratureRule};
use crate::spectra::{
    self, ComplexMatrix, HermitianMatrix, SingularSpectrum, SpectraError, TruncationMeta,
};
use crate::symbols::{FrequencyView, Symbol};

/// Eigenvalues of the normal matrix in `(-PSD_TOL, 0)` are rounding noise.
pub const PSD_TOL: f64 = 1e-8;
/// A diagonal entry of the normal matrix below `-INCONSISTENCY_TOL` means the
/// projection truncation is too small for the quadrature in use.
pub const INCONSISTENCY_TOL: f64 = 1e-6;
/// Radial nodes whose share of the mass is below `e^{-700}` are dropped.
const NEGLIGIBLE_LOG_MASS: f64 = 700.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HankelError {
    #[error("projection truncation M={m} must be >= domain truncation N={n}")]
    BadTruncation { n: usize, m: usize },
    #[error("index {index} exceeds the basis maximum {max}")]
    Truncation { index: usize, max: usize },
    #[error("normal matrix entry {value:e} at ({row}, {row}) is negative: M too small")]
    TruncationInconsistency { row: usize, value: f64 },
    #[error("symbol is not single-frequency")]
    NotSingleFrequency,
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

pub type Result<T> = std::result::Result<T, HankelError>;

/// Projection truncation `N + 16 + max(|ν|, deg)`.
pub fn default_projection_truncation(n: usize, symbol: &Symbol) -> usize {
    let shift = symbol
        .frequency_of()
        .map(|nu| nu.unsigned_abs() as usize)
        .unwrap_or(0)
        .max(symbol.growth_degree());
    n + 16 + shift
}

/// The truncation pair `(N, M)` for a symbol on a basis, with the angular
/// spectra of `f` and `|f|²` precomputed on every quadrature ring.
pub struct HankelModel {
    basis: Arc<FockBasis>,
    symbol: Symbol,
    n: usize,
    m: usize,
    grid: PolarGrid,
    /// `ln|e_k(ρ_i)| − φ(ρ_i)`, ring-major, `k <= max(N, M)`.
    log_radial: Vec<f64>,
    /// Per ring: `Σ_j f(ρ_i u_j) u_j^d` for `d = -M..=N`.
    f_modes: Vec<Vec<Complex64>>,
    /// Per ring: `Σ_j |f(ρ_i u_j)|² u_j^d` for `d = -N..=N`.
    f2_modes: Vec<Vec<Complex64>>,
}

impl std::fmt::Debug for HankelModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HankelModel")
            .field("symbol", &self.symbol.to_string())
            .field("n", &self.n)
            .field("m", &self.m)
            .field("rings", &self.grid.radii().len())
            .field("n_theta", &self.grid.n_theta())
            .finish()
    }
}

impl HankelModel {
    pub fn new(
        basis: Arc<FockBasis>,
        symbol: Symbol,
        n: usize,
        m: usize,
        rule: &QuadratureRule,
    ) -> Result<Self> {
        if m < n {
            return Err(HankelError::BadTruncation { n, m });
        }
        let top = m.max(n);
        if top > basis.n_max() {
            return Err(HankelError::Truncation {
                index: top,
                max: basis.n_max(),
            });
        }
        let grid = basis.plane_grid(
            top,
            symbol.growth_degree(),
            n + m + 1,
            rule,
            symbol.break_radii(),
        )?;
        let log_radial = basis.log_radial_table(&grid, top)?;
        let n_theta = grid.n_theta();
        let units = grid.units();

        let rings: Vec<(Vec<Complex64>, Vec<Complex64>)> = grid
            .radii()
            .par_iter()
            .map(|&rho| -> Result<_> {
                let values: Vec<Complex64> = (0..n_theta)
                    .map(|j| {
                        let z = units[j] * rho;
                        let v = symbol.eval(z);
                        if v.re.is_finite() && v.im.is_finite() {
                            Ok(v)
                        } else {
                            Err(QuadratureError::NonFinite { node: z, value: v })
                        }
                    })
                    .collect::<std::result::Result<_, _>>()?;
                let sq: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
                let modes = |d: i64| -> Complex64 {
                    let mut s = Complex64::new(0.0, 0.0);
                    for (j, v) in values.iter().enumerate() {
                        let idx = (d * j as i64).rem_euclid(n_theta as i64) as usize;
                        s += v * units[idx];
                    }
                    s
                };
                let modes2 = |d: i64| -> Complex64 {
                    let mut s = Complex64::new(0.0, 0.0);
                    for (j, v) in sq.iter().enumerate() {
                        let idx = (d * j as i64).rem_euclid(n_theta as i64) as usize;
                        s += units[idx] * *v;
                    }
                    s
                };
                let f_modes = (-(m as i64)..=n as i64).map(modes).collect();
                let f2_modes = (-(n as i64)..=n as i64).map(modes2).collect();
                Ok((f_modes, f2_modes))
            })
            .collect::<Result<_>>()?;
        let (f_modes, f2_modes) = rings.into_iter().unzip();

        Ok(Self {
            basis,
            symbol,
            n,
            m,
            grid,
            log_radial,
            f_modes,
            f2_modes,
        })
    }

    /// Model with `M` from [`default_projection_truncation`].
    pub fn with_default_m(
        basis: Arc<FockBasis>,
        symbol: Symbol,
        n: usize,
        rule: &QuadratureRule,
    ) -> Result<Self> {
        let m = default_projection_truncation(n, &symbol);
        Self::new(basis, symbol, n, m, rule)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    fn stride(&self) -> usize {
        self.m.max(self.n) + 1
    }

    fn radial_pair(&self, ring: usize, j: usize, k: usize) -> f64 {
        let row = &self.log_radial[ring * self.stride()..];
        (row[j] + row[k]).exp()
    }

    /// `A_{mk} = ⟨f e_k, e_m⟩_φ`, `(M+1) × (N+1)`.
    pub fn cross_matrix(&self) -> ComplexMatrix {
        let aw = self.grid.angular_weight();
        let weights = self.grid.radial_weights();
        let mut a = ComplexMatrix::zeros(self.m + 1, self.n + 1);
        for row in 0..=self.m {
            for col in 0..=self.n {
                // frequency offset d = col − row, stored at index d + M
                let d = (col as i64 - row as i64 + self.m as i64) as usize;
                let mut s = Complex64::new(0.0, 0.0);
                for (i, w) in weights.iter().enumerate() {
                    s += self.f_modes[i][d] * (w * self.radial_pair(i, row, col));
                }
                a.set(row, col, s * aw);
            }
        }
        a
    }

    /// `B_{jk} = ⟨f e_k, f e_j⟩_φ`, `(N+1) × (N+1)`.
    pub fn gram_matrix(&self) -> Result<HermitianMatrix> {
        let aw = self.grid.angular_weight();
        let weights = self.grid.radial_weights();
        let size = self.n + 1;
        let mut data = vec![Complex64::new(0.0, 0.0); size * size];
        for j in 0..size {
            for k in 0..size {
                let d = (k as i64 - j as i64 + self.n as i64) as usize;
                let mut s = Complex64::new(0.0, 0.0);
                for (i, w) in weights.iter().enumerate() {
                    s += self.f2_modes[i][d] * (w * self.radial_pair(i, j, k));
                }
                data[j * size + k] = s * aw;
            }
        }
        Ok(HermitianMatrix::new(size, data)?)
    }

    /// `B − Aᴴ A`, the finite section of `H_f* H_f`.
    pub fn normal_matrix(&self) -> Result<HermitianMatrix> {
        let a = self.cross_matrix();
        let b = self.gram_matrix()?;
        let ata = a.gram();
        let size = self.n + 1;
        let mut data = Vec::with_capacity(size * size);
        for j in 0..size {
            for k in 0..size {
                data.push(b.get(j, k) - ata.get(j, k));
            }
        }
        let h = HermitianMatrix::new(size, data)?;
        for row in 0..size {
            let v = h.get(row, row).re;
            if v < -INCONSISTENCY_TOL {
                return Err(HankelError::TruncationInconsistency { row, value: v });
            }
        }
        Ok(h)
    }

    /// Sorted singular values of the finite section via the Jacobi solver.
    pub fn singular_values(&self) -> Result<SingularSpectrum> {
        let h = self.normal_matrix()?;
        let meta = TruncationMeta {
            n: self.n,
            m: self.m,
            tol: PSD_TOL,
        };
        Ok(spectra::singular_values_from_normal(&h, PSD_TOL, meta)?)
    }

    /// `√(trace(B − Aᴴ A))`, computed from the matrix entries alone.
    pub fn hs_norm_direct(&self) -> Result<f64> {
        let a = self.cross_matrix();
        let b = self.gram_matrix()?;
        let trace: f64 = (0..=self.n)
            .map(|k| b.get(k, k).re - a.column_norm_sqr(k))
            .sum();
        Ok(trace.max(0.0).sqrt())
    }
}

/// Closed-form path for a single-frequency symbol: `s_k(H_f)` for
/// `k = 0..=k_max`, mode-indexed.
///
/// `s_k² = ‖f e_k‖² − |⟨f e_k, e_{k+ν}⟩|²` is the variance of `g / ρ^ν`
/// under the radial density of `|e_{k+ν}|² e^{−2φ}`, scaled by `c_{k+ν}/c_k`.
/// It is evaluated as a sum of squared pairwise differences, so modes far
/// below machine epsilon relative to `‖f e_k‖` keep their relative accuracy.
pub fn single_frequency_spectrum(
    view: &FrequencyView,
    basis: &FockBasis,
    k_max: usize,
) -> Result<SingularSpectrum> {
    let nu = view.nu as i64;
    let top = (k_max as i64 + nu.max(0)) as usize;
    if top > basis.n_max() {
        return Err(HankelError::Truncation {
            index: top,
            max: basis.n_max(),
        });
    }
    let modes: Vec<f64> = (0..=k_max)
        .into_par_iter()
        .map(|k| single_frequency_mode(view, basis, k))
        .collect::<Result<_>>()?;
    let meta = TruncationMeta {
        n: k_max,
        m: top,
        tol: 0.0,
    };
    Ok(SingularSpectrum::from_modes(modes, meta)?)
}

pub fn single_frequency_spectrum_of(
    symbol: &Symbol,
    basis: &FockBasis,
    k_max: usize,
) -> Result<SingularSpectrum> {
    let view = symbol
        .frequency_view()
        .ok_or(HankelError::NotSingleFrequency)?;
    single_frequency_spectrum(&view, basis, k_max)
}

fn single_frequency_mode(view: &FrequencyView, basis: &FockBasis, k: usize) -> Result<f64> {
    let weight = basis.weight();
    let nu = view.nu as i64;
    let target = k as i64 + nu;
    let growth = view.profile.growth().max(nu as f64).max(0.0);
    let reach = k.max(target.max(0) as usize) + growth.ceil() as usize + 1;
    let end = basis.cover_radius(reach);
    let power = 2 * target.max(k as i64) as usize + 1;
    let mut breaks = Vec::new();
    for c in view.profile.break_radii() {
        breaks.extend(graded_breaks(c, power, weight, end));
    }
    let grid = PolarGrid::new(
        Domain::Disk {
            center: Complex64::new(0.0, 0.0),
            r: end,
        },
        &QuadratureRule::default().with_n_theta(8),
        &breaks,
    )?;
    let log_two_pi = (2.0 * PI).ln();

    if target < 0 {
        // f e_k is orthogonal to every e_m: s_k = ‖f e_k‖
        let log_ck = basis.log_norm(k)?;
        let mut sum = 0.0;
        for (rho, w) in grid.radii().iter().zip(grid.radial_weights()) {
            let g = view.radial(*rho).norm_sqr();
            if g > 0.0 {
                let l = w.ln() + 2.0 * k as f64 * rho.ln() - 2.0 * weight.phi(*rho) - log_ck;
                sum += g * (l + log_two_pi).exp();
            }
        }
        return Ok(sum.sqrt());
    }

    // With u = g / ρ^ν and the probability density dν ∝ ρ^{2t+1} e^{−2φ} dρ,
    // s_k² = (c_t / c_k) · ½ ∬ |u(x) − u(y)|² dν(x) dν(y).
    let t = target as usize;
    let log_ct = basis.log_norm(t)?;
    let log_ck = basis.log_norm(k)?;
    let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(grid.radii().len());
    let mut log_peak = f64::NEG_INFINITY;
    for (rho, w) in grid.radii().iter().zip(grid.radial_weights()) {
        let l = w.ln() + 2.0 * t as f64 * rho.ln() - 2.0 * weight.phi(*rho) - log_ct + log_two_pi;
        log_peak = log_peak.max(l);
        nodes.push((l, view.profile.eval_shifted(*rho, view.nu)));
    }
    let mut kept: Vec<(f64, f64)> = nodes
        .into_iter()
        .filter(|(l, _)| *l > log_peak - NEGLIGIBLE_LOG_MASS)
        .map(|(l, v)| (l.exp(), v))
        .collect();
    let spread = weighted_variance(&mut kept) * view.coeff.norm_sqr();
    let value = spread * (log_ct - log_ck).exp();
    if !value.is_finite() {
        return Err(QuadratureError::NonFinite {
            node: Complex64::new(k as f64, 0.0),
            value: Complex64::new(value, 0.0),
        }
        .into());
    }
    Ok(value.sqrt())
}

/// Variance of `v` under the weights `w` (not necessarily normalized), as
/// `Σ w_i r_i² / W³` with `r_i = Σ_j w_j (v_i − v_j)`. Each `r_i` is built from
/// prefix sums over strictly smaller and strictly larger values, so tied
/// values contribute exactly nothing. Sorts `nodes` by value.
fn weighted_variance(nodes: &mut [(f64, f64)]) -> f64 {
    nodes.sort_by(|a, b| a.1.total_cmp(&b.1));
    let total: f64 = nodes.iter().map(|(w, _)| w).sum();
    if total <= 0.0 {
        return 0.0;
    }
    // groups of equal values
    let mut groups: Vec<(f64, f64)> = Vec::new();
    for &(w, v) in nodes.iter() {
        match groups.last_mut() {
            Some((gw, gv)) if *gv == v => *gw += w,
            _ => groups.push((w, v)),
        }
    }
    // suffix sums over strictly larger values, accumulated from the top
    let mut suffix = vec![(0.0, 0.0); groups.len() + 1];
    for i in (0..groups.len()).rev() {
        let (gw, gv) = groups[i];
        suffix[i] = (suffix[i + 1].0 + gw, suffix[i + 1].1 + gw * gv);
    }
    let mut below_w = 0.0;
    let mut below_s = 0.0;
    let mut acc = 0.0;
    for (i, &(gw, gv)) in groups.iter().enumerate() {
        let (above_w, above_s) = suffix[i + 1];
        let r = (gv * below_w - below_s) - (above_s - gv * above_w);
        acc += gw * r * r;
        below_w += gw;
        below_s += gw * gv;
    }
    acc / (total * total * total)
}

/// `c` plus radii on both sides of it spaced so that the density
/// `ρ^power e^{-2φ}` changes by about `e^6` per panel, out to `e^{-100}`.
fn graded_breaks(c: f64, power: usize, weight: &crate::fock::RadialWeight, end: f64) -> Vec<f64> {
    const STEP_LOG: f64 = 6.0;
    const DEPTH_LOG: f64 = 100.0;
    let slope = |rho: f64| {
        let h = 1e-6 * rho.max(1.0);
        let dphi =
            (weight.phi(rho + h) - weight.phi((rho - h).max(0.0))) / (rho + h - (rho - h).max(0.0));
        (power as f64 / rho - 2.0 * dphi).abs()
    };
    let mut out = vec![c];
    for dir in [-1.0, 1.0] {
        let mut rho = c;
        let mut dropped = 0.0;
        while dropped < DEPTH_LOG && out.len() < 200 {
            let g = slope(rho).max(1e-12);
            let step = (STEP_LOG / g).min(0.5);
            let next = rho + dir * step;
            if next <= 0.0 || next >= end {
                break;
            }
            dropped += g * step;
            rho = next;
            out.push(rho);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `Γ(k, 1) / (k−1)! = e^{−1} Σ_{j<k} 1/j!` and the complementary tail.
    fn upper_regularized(k: usize) -> f64 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for j in 0..k {
            if j > 0 {
                term /= j as f64;
            }
            sum += term;
        }
        sum * (-1f64).exp()
    }

    const E1_ONE: f64 = 0.219_383_934_395_520_27;

    fn model(symbol: &str, n: usize, m: usize) -> HankelModel {
        HankelModel::new(
            Arc::new(FockBasis::classical(200)),
            Symbol::parse(symbol).unwrap(),
            n,
            m,
            &QuadratureRule::default(),
        )
        .unwrap()
    }

    #[test]
    fn cross_matrix_of_z() {
        let a = model("poly(0,1)", 10, 20).cross_matrix();
        for row in 0..=20 {
            for col in 0..=10 {
                let expect = if row == col + 1 {
                    ((col + 1) as f64).sqrt()
                } else {
                    0.0
                };
                assert!(
                    (a.get(row, col) - expect).norm() < 1e-10,
                    "({row},{col}) {}",
                    a.get(row, col)
                );
            }
        }
    }

    #[test]
    fn cross_matrix_of_xia() {
        let a = model("xia", 8, 12).cross_matrix();
        assert!((a.get(0, 1).re - (-1f64).exp()).abs() < 1e-12);
        for k in 1..=8usize {
            // Γ(k,1)/√(k!(k−1)!) = Q(k,1) √((k−1)!/k!)
            let expect = upper_regularized(k) / (k as f64).sqrt();
            assert!((a.get(k - 1, k).re - expect).abs() < 1e-12);
        }
        for row in 0..=12 {
            for col in 0..=8 {
                if row + 1 != col {
                    assert!(a.get(row, col).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn zero_symbol_gives_zero() {
        let m = model("poly(0)", 6, 10);
        assert_eq!(m.cross_matrix().max_abs(), 0.0);
        assert_eq!(m.normal_matrix().unwrap().max_abs(), 0.0);
        assert_eq!(m.hs_norm_direct().unwrap(), 0.0);
    }

    #[test]
    fn gram_examples() {
        let one = model("poly(1)", 12, 12).gram_matrix().unwrap();
        for j in 0..=12 {
            for k in 0..=12 {
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((one.get(j, k) - expect).norm() < 1e-9);
            }
        }
        let xia = model("xia", 10, 10).gram_matrix().unwrap();
        assert!((xia.get(0, 0).re - E1_ONE).abs() < 1e-12);
        for k in 1..=10usize {
            // Γ(k,1)/k!
            let expect = upper_regularized(k) / k as f64;
            assert!((xia.get(k, k).re - expect).abs() < 1e-12);
        }
        let z = model("poly(0,1)", 10, 12).gram_matrix().unwrap();
        for j in 0..=10 {
            for k in 0..=10 {
                let expect = if j == k { (k + 1) as f64 } else { 0.0 };
                assert!((z.get(j, k) - expect).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn analytic_symbol_has_zero_hankel() {
        for s in ["poly(0,1)", "poly(1,0,2-1i)", "poly(0,0,0,1)"] {
            let sym = Symbol::parse(s).unwrap();
            let n = 12;
            let m = n + sym.growth_degree();
            let h = model(s, n, m).normal_matrix().unwrap();
            assert!(h.max_abs() <= 1e-9, "{s}: {}", h.max_abs());
        }
    }

    #[test]
    fn bad_truncation() {
        let err = HankelModel::new(
            Arc::new(FockBasis::classical(50)),
            Symbol::xia(),
            10,
            5,
            &QuadratureRule::default(),
        )
        .unwrap_err();
        assert_eq!(err, HankelError::BadTruncation { n: 10, m: 5 });
        let err = HankelModel::new(
            Arc::new(FockBasis::classical(50)),
            Symbol::xia(),
            10,
            60,
            &QuadratureRule::default(),
        )
        .unwrap_err();
        assert!(matches!(err, HankelError::Truncation { .. }));
    }

    #[test]
    fn variance_of_two_levels_is_exact() {
        let tiny = 1e-40;
        let mut nodes = vec![(0.3, 1.0), (tiny, 0.0), (0.7, 1.0)];
        let v = weighted_variance(&mut nodes);
        let expect = tiny * 1.0 / ((1.0 + tiny) * (1.0 + tiny));
        assert!((v / expect - 1.0).abs() < 1e-14, "{v} {expect}");
        let mut flat = vec![(0.2, 5.0), (0.8, 5.0)];
        assert_eq!(weighted_variance(&mut flat), 0.0);
        let mut spread = vec![(0.5, -1.0), (0.5, 1.0)];
        assert!((weighted_variance(&mut spread) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn default_m() {
        assert_eq!(default_projection_truncation(24, &Symbol::xia()), 41);
        assert_eq!(
            default_projection_truncation(10, &Symbol::parse("poly(1,0,1)").unwrap()),
            28
        );
    }

    #[test]
    fn closed_form_first_modes() {
        let basis = FockBasis::classical(100);
        let xia = single_frequency_spectrum_of(&Symbol::xia(), &basis, 40).unwrap();
        let modes = xia.mode_indexed().unwrap();
        assert!((modes[0] - E1_ONE.sqrt()).abs() < 1e-12);
        let e = (-1f64).exp();
        assert!((modes[1] - (e - e * e).sqrt()).abs() < 1e-12);
        let cx = single_frequency_spectrum_of(&Symbol::xia().conj(), &basis, 40).unwrap();
        assert!((cx.mode_indexed().unwrap()[0] - (E1_ONE - e * e).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_incomplete_gamma_oracle() {
        let basis = FockBasis::classical(2100);
        let cx = single_frequency_spectrum_of(&Symbol::xia().conj(), &basis, 2000).unwrap();
        let modes = cx.mode_indexed().unwrap();
        for k in [1usize, 2, 5, 10, 50, 200, 1000, 2000] {
            // s_k² = Q(k,1)/k − Q(k+1,1)²/(k+1)
            let q0 = upper_regularized(k);
            let q1 = upper_regularized(k + 1);
            let expect = (q0 / k as f64 - q1 * q1 / (k as f64 + 1.0)).sqrt();
            assert!(
                (modes[k] - expect).abs() <= 1e-9 * expect.max(1e-3),
                "k={k} got {} expect {expect}",
                modes[k]
            );
        }
    }

    #[test]
    fn xia_modes_decay_superexponentially() {
        let basis = FockBasis::classical(400);
        let xia = single_frequency_spectrum_of(&Symbol::xia(), &basis, 300).unwrap();
        let modes = xia.mode_indexed().unwrap();
        for (k, mode) in modes.iter().enumerate().take(30).skip(1) {
            // s_k² = (Q(k,1)/k)(1 − Q(k,1)); 1 − Q via the tail e^{−1} Σ_{j>=k} 1/j!
            let mut term = 1.0;
            for j in 1..=k {
                term /= j as f64;
            }
            let mut tail = 0.0;
            let mut t = term;
            for j in k..k + 40 {
                tail += t;
                t /= (j + 1) as f64;
            }
            let p = tail * (-1f64).exp();
            let expect = (upper_regularized(k) / k as f64 * p).sqrt();
            assert!((mode / expect - 1.0).abs() < 1e-8, "k={k} {mode} {expect}");
        }
        assert!(modes[200..].iter().all(|s| *s < 1e-100));
    }

    #[test]
    fn dense_matches_closed_form() {
        let basis = Arc::new(FockBasis::classical(100));
        for s in ["xia", "conj(xia)"] {
            let sym = Symbol::parse(s).unwrap();
            let dense = HankelModel::new(
                basis.clone(),
                sym.clone(),
                24,
                40,
                &QuadratureRule::default(),
            )
            .unwrap()
            .singular_values()
            .unwrap();
            let closed = single_frequency_spectrum_of(&sym, &basis, 24).unwrap();
            for (a, b) in dense.values().iter().zip(closed.values()) {
                assert!((a - b).abs() < 1e-6, "{s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn hs_norm_trace_identity() {
        let basis = Arc::new(FockBasis::classical(100));
        let m = HankelModel::new(
            basis.clone(),
            Symbol::xia(),
            24,
            40,
            &QuadratureRule::default(),
        )
        .unwrap();
        let closed = single_frequency_spectrum_of(&Symbol::xia(), &basis, 24).unwrap();
        let direct = m.hs_norm_direct().unwrap();
        assert!((direct - closed.hilbert_schmidt()).abs() < 1e-7);
        let eig = m.singular_values().unwrap().hilbert_schmidt();
        assert!((direct - eig).abs() < 1e-8);
    }

    #[test]
    fn cross_support_flips_under_conjugation() {
        let a = model("radial(nu=2, g=invr_outside(1))", 8, 14).cross_matrix();
        let b = model("radial(nu=-2, g=invr_outside(1))", 8, 14).cross_matrix();
        for row in 0..=14 {
            for col in 0..=8 {
                if row != col + 2 {
                    assert!(a.get(row, col).norm() < 1e-12);
                }
                if row + 2 != col {
                    assert!(b.get(row, col).norm() < 1e-12);
                }
            }
        }
        assert!(a.get(2, 0).norm() > 1e-3);
        assert!(b.get(0, 2).norm() > 1e-3);
        let _ = c(0.0, 0.0);
    }

    #[test]
    fn monotone_in_projection_truncation() {
        let basis = Arc::new(FockBasis::classical(100));
        let sym = Symbol::general(
            "mixed",
            Arc::new(|z: Complex64| {
                let r = z.norm();
                if r >= 1.0 {
                    1.0 / z + z.conj() / (1.0 + r * r * r)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
            vec![1.0],
            true,
        );
        let rule = QuadratureRule::default();
        let small = HankelModel::new(basis.clone(), sym.clone(), 12, 14, &rule).unwrap();
        let big = HankelModel::new(basis, sym, 12, 24, &rule).unwrap();
        let (s1, s2) = (
            small.singular_values().unwrap(),
            big.singular_values().unwrap(),
        );
        for (a, b) in s1.values().iter().zip(s2.values()) {
            assert!(*b <= a + 1e-9, "{b} > {a}");
        }
    }
}
