//! Self checks: closed form against dense finite sections, eigensolver
//! fixtures, quadrature and basis identities, and oscillation inequalities on
//! seeded random draws.

use std::sync::Arc;

use fhl_core::hankel::single_frequency_spectrum_of;
use fhl_core::oscillation::{self, disk_rule, DiskSample};
use fhl_core::quadrature::exactness_report;
use fhl_core::spectra::{jacobi_eigen, psd_clip};
use fhl_core::{
    Complex64, Domain, FockBasis, HankelModel, HermitianMatrix, PolarGrid, QuadratureRule, Symbol,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::report::{Table, Verdict};
use crate::CliError;

/// Symbols exercised by the property checks.
pub const SHIPPED_SYMBOLS: [&str; 10] = [
    "xia",
    "conj(xia)",
    "indicator(1)",
    "indicator(2.5)",
    "radial(nu=2, g=invr_outside(1))",
    "radial(nu=-3, g=invr_outside(1.5))",
    "radial(nu=1, g=indicator(2))",
    "poly(0,1)",
    "poly(1,0,1)",
    "conj(poly(0,1))",
];

pub fn shipped_symbols() -> Vec<Symbol> {
    SHIPPED_SYMBOLS
        .iter()
        .map(|s| Symbol::parse(s).expect("shipped symbols parse"))
        .collect()
}

struct Checks {
    table: Table,
    verdicts: Vec<Verdict>,
}

impl Checks {
    /// Records `value <= tol`.
    fn bound(&mut self, name: impl Into<String>, value: f64, tol: f64) {
        let name = name.into();
        let passed = value <= tol;
        self.table.push(vec![
            name.as_str().into(),
            value.into(),
            tol.into(),
            passed.into(),
        ]);
        self.verdicts.push(Verdict::new(
            name,
            passed,
            format!("{value:.3e} <= {tol:.0e}"),
        ));
    }
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn core<T, E: Into<fhl_core::Error>>(r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Core(e.into()))
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    let mut data = vec![c64(0.0, 0.0); n * n];
    for i in 0..n {
        data[i * n + i] = c64(rng.gen_range(-3.0..3.0), 0.0);
        for j in i + 1..n {
            let v = c64(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            data[i * n + j] = v;
            data[j * n + i] = v.conj();
        }
    }
    HermitianMatrix::new(n, data).expect("constructed Hermitian")
}

/// `U diag(λ) Uᴴ` with `U` from Gram-Schmidt on random vectors.
fn hermitian_with_spectrum(rng: &mut ChaCha8Rng, lam: &[f64]) -> HermitianMatrix {
    let n = lam.len();
    let mut cols: Vec<Vec<Complex64>> = Vec::new();
    while cols.len() < n {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        for c in &cols {
            let dot: Complex64 = (0..n).map(|i| c[i].conj() * v[i]).sum();
            for i in 0..n {
                v[i] -= dot * c[i];
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        cols.push(v);
    }
    let mut data = vec![c64(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = (0..n)
                .map(|k| cols[k][i] * lam[k] * cols[k][j].conj())
                .sum();
        }
    }
    // exact Hermitian symmetry after rounding
    for i in 0..n {
        data[i * n + i] = c64(data[i * n + i].re, 0.0);
        for j in i + 1..n {
            data[j * n + i] = data[i * n + j].conj();
        }
    }
    HermitianMatrix::new(n, data).expect("constructed Hermitian")
}

fn spectra_checks(checks: &mut Checks, c: &ExperimentConfig) -> Result<(), CliError> {
    let m = c.m.unwrap_or(c.n + 16).max(c.n + 1);
    let basis = Arc::new(FockBasis::classical(m));
    let rule = QuadratureRule::default();
    for name in ["xia", "conj(xia)"] {
        let sym = Symbol::parse(name).expect("literal symbol");
        let model = core(HankelModel::new(basis.clone(), sym.clone(), c.n, m, &rule))?;
        let dense = core(model.singular_values())?;
        let closed = core(single_frequency_spectrum_of(&sym, &basis, c.n))?;
        checks.bound(
            format!("dense_vs_closed[{name}]"),
            max_gap(dense.values(), closed.values()),
            1e-6,
        );
        let hs = dense.hilbert_schmidt();
        let direct = core(model.hs_norm_direct())?;
        checks.bound(
            format!("hilbert_schmidt_trace[{name}]"),
            (hs - direct).abs() / direct.max(1e-300),
            1e-8,
        );
    }

    let fixtures: [(&str, Vec<Complex64>, [f64; 2]); 3] = [
        (
            "diag",
            vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(2.0, 0.0)],
            [2.0, 1.0],
        ),
        (
            "real",
            vec![c64(2.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(2.0, 0.0)],
            [3.0, 1.0],
        ),
        (
            "complex",
            vec![c64(1.0, 0.0), c64(0.0, 1.0), c64(0.0, -1.0), c64(1.0, 0.0)],
            [2.0, 0.0],
        ),
    ];
    for (name, data, expect) in fixtures {
        let eig = core(jacobi_eigen(&core(HermitianMatrix::new(2, data))?, 1e-15))?;
        checks.bound(
            format!("jacobi_fixture[{name}]"),
            max_gap(&eig, &expect),
            1e-12,
        );
    }

    let clipped = core(psd_clip(&[1.0, -1e-10], 1e-8))?;
    checks.bound(
        "psd_clip_small_negative",
        max_gap(&clipped, &[1.0, 0.0]),
        0.0,
    );
    let rejected = psd_clip(&[-1e-3], 1e-8).is_err();
    checks.bound(
        "psd_clip_rejects_negative",
        if rejected { 0.0 } else { 1.0 },
        0.0,
    );

    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut worst2 = 0.0f64;
    for _ in 0..50 {
        let mat = random_hermitian(&mut rng, 2);
        let (a, d, b) = (mat.get(0, 0).re, mat.get(1, 1).re, mat.get(0, 1));
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        let eig = core(jacobi_eigen(&mat, 1e-15))?;
        worst2 = worst2.max(max_gap(&eig, &[mean + rad, mean - rad]));
    }
    checks.bound("jacobi_characteristic_2x2", worst2, 1e-10);

    let mut worst3 = 0.0f64;
    for _ in 0..20 {
        let mut lam: Vec<f64> = (0..3).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let mat = hermitian_with_spectrum(&mut rng, &lam);
        lam.sort_by(|a, b| b.total_cmp(a));
        let eig = core(jacobi_eigen(&mat, 1e-15))?;
        worst3 = worst3.max(max_gap(&eig, &lam));
    }
    checks.bound("jacobi_characteristic_3x3", worst3, 1e-10);

    let mut worst_inv = 0.0f64;
    for n in [4usize, 8, 16] {
        let mat = random_hermitian(&mut rng, n);
        let eig = core(jacobi_eigen(&mat, 1e-15))?;
        let trace: f64 = eig.iter().sum();
        let frob = eig.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = mat.frobenius().max(1.0);
        worst_inv = worst_inv
            .max((trace - mat.trace()).abs() / scale)
            .max((frob - mat.frobenius()).abs() / scale);
    }
    checks.bound("jacobi_trace_frobenius", worst_inv, 1e-10);
    Ok(())
}

fn quadrature_checks(checks: &mut Checks) -> Result<(), CliError> {
    let mut worst = 0.0f64;
    for order in [4usize, 8, 12, 20] {
        let rule = QuadratureRule::default().with_gauss_order(order);
        for domain in [
            Domain::Disk {
                center: c64(0.3, -1.2),
                r: 1.7,
            },
            Domain::PlaneTruncated { r: 6.0 },
        ] {
            let grid = core(PolarGrid::new(domain, &rule, &[]))?;
            worst = worst.max(core(exactness_report(&grid, 2 * order - 2))?.max_rel_error);
        }
    }
    checks.bound("quadrature_exactness", worst, 1e-10);

    let basis = FockBasis::classical(60);
    let rule = QuadratureRule::default();
    let grid = core(basis.plane_grid(40, 0, 40, &rule, &[]))?;
    let mut gap = 0.0f64;
    for j in 0..=40usize {
        let coeffs = core(basis.project_coeffs(|z| basis.basis_eval(j, z).unwrap(), 40, &grid))?;
        for (m, v) in coeffs.iter().enumerate() {
            let expect = if m == j { 1.0 } else { 0.0 };
            gap = gap.max((v - expect).norm());
        }
    }
    checks.bound("basis_gram_identity", gap, 1e-9);
    Ok(())
}

fn symbol_checks(checks: &mut Checks, seed: u64) -> Result<(), CliError> {
    let symbols = shipped_symbols();
    let basis = Arc::new(FockBasis::classical(200));
    let rule = QuadratureRule::default();

    // relative excess of captured mass over total mass, per column
    let mut excess = 0.0f64;
    for sym in &symbols {
        let model = core(HankelModel::with_default_m(
            basis.clone(),
            sym.clone(),
            16,
            &rule,
        ))?;
        let a = model.cross_matrix();
        let b = core(model.gram_matrix())?;
        for k in 0..=16 {
            let total = b.get(k, k).re;
            let captured = a.column_norm_sqr(k);
            excess = excess.max((captured - total) / total.max(1e-300));
        }
    }
    checks.bound("bessel_inequality", excess.max(0.0), 1e-10);

    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let degree = 25;
    let disk = disk_rule(&rule, degree);
    let mut violation = 0.0f64;
    for _ in 0..100 {
        let sym = &symbols[rng.gen_range(0..symbols.len())];
        let z = c64(rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0));
        let r = rng.gen_range(0.5..2.0);
        let sample = core(DiskSample::new(sym, z, r, &disk))?;
        let g = sample.g(2.0, degree, 1e-9).value;
        let mo = sample.mo(2.0);
        violation = violation.max(g - mo * (1.0 + 1e-12) - 1e-13);
    }
    checks.bound("g_below_mo", violation.max(0.0), 0.0);

    let mut mismatches = 0usize;
    for sym in &symbols {
        let f = sym.clone();
        let bar = Symbol::general(
            format!("conj of {sym}"),
            Arc::new(move |w| f.eval(w).conj()),
            sym.break_radii().to_vec(),
            sym.is_bounded(),
        );
        for _ in 0..5 {
            let z = c64(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let a = core(oscillation::mo(sym, z, 1.0, 2.0, &rule))?;
            let b = core(oscillation::mo(&bar, z, 1.0, 2.0, &rule))?;
            mismatches += usize::from(a.to_bits() != b.to_bits());
        }
    }
    checks.bound("mo_conjugation_exact", mismatches as f64, 0.0);
    Ok(())
}

pub fn run(c: &ExperimentConfig) -> Result<(Table, Vec<Verdict>), CliError> {
    let mut checks = Checks {
        table: Table::new(&["check", "value", "tolerance", "passed"]),
        verdicts: Vec::new(),
    };
    spectra_checks(&mut checks, c)?;
    quadrature_checks(&mut checks)?;
    symbol_checks(&mut checks, c.seed)?;
    Ok((checks.table, checks.verdicts))
}
