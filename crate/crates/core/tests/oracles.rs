//! End-to-end checks of the core numerics against independent closed forms.

use std::sync::Arc;

use fhl_core::oscillation::{self, DiskSample};
use fhl_core::quadrature::exactness_report;
use fhl_core::spectra::{jacobi_eigen, ComplexMatrix};
use fhl_core::{
    single_frequency_spectrum_of, Complex64, Domain, FockBasis, HankelModel, HermitianMatrix,
    PolarGrid, QuadratureRule, Symbol,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const E1_ONE: f64 = 0.219_383_934_395_520_27;

fn inv_e() -> f64 {
    (-1f64).exp()
}

/// `Q(k, 1) = Γ(k, 1)/(k−1)! = e^{-1} Σ_{j<k} 1/j!`.
fn q_upper(k: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for j in 0..k {
        if j > 0 {
            term /= j as f64;
        }
        sum += term;
    }
    sum * inv_e()
}

/// `P(k, 1) = e^{-1} Σ_{j>=k} 1/j!`, summed from the small end.
fn p_lower(k: usize) -> f64 {
    let mut log_term = 0.0;
    for j in 1..=k {
        log_term -= (j as f64).ln();
    }
    let mut term = log_term.exp();
    let mut sum = 0.0;
    let mut j = k;
    while term > sum * 1e-18 {
        sum += term;
        j += 1;
        term /= j as f64;
    }
    sum * inv_e()
}

fn shipped_symbols() -> Vec<Symbol> {
    [
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
    ]
    .iter()
    .map(|s| Symbol::parse(s).unwrap())
    .collect()
}

#[test]
fn xia_family_modes_match_incomplete_gamma() {
    let basis = FockBasis::classical(2100);
    let xia = single_frequency_spectrum_of(&Symbol::xia(), &basis, 60).unwrap();
    let bar = single_frequency_spectrum_of(&Symbol::xia().conj(), &basis, 2000).unwrap();
    let xs = xia.mode_indexed().unwrap();
    let bs = bar.mode_indexed().unwrap();

    assert!((xs[0] - E1_ONE.sqrt()).abs() < 1e-13);
    assert!((bs[0] - (E1_ONE - inv_e() * inv_e()).sqrt()).abs() < 1e-13);
    for (k, x) in xs.iter().enumerate().take(61).skip(1) {
        let expect = (q_upper(k) * p_lower(k) / k as f64).sqrt();
        assert!(
            (x / expect - 1.0).abs() < 1e-9,
            "xia k={k}: {x} vs {expect}"
        );
    }
    for k in [1usize, 3, 10, 100, 500, 1999, 2000] {
        let (q0, q1) = (q_upper(k), q_upper(k + 1));
        // ‖f̄ e_k‖² = Q(k,1)/k, ⟨f̄ e_k, e_{k+1}⟩ = Q(k+1,1)/√(k+1)
        let expect = (q0 / k as f64 - q1 * q1 / (k + 1) as f64).sqrt();
        assert!(
            (bs[k] / expect - 1.0).abs() < 1e-8,
            "conj k={k}: {} vs {expect}",
            bs[k]
        );
    }
}

#[test]
fn first_singular_values() {
    let basis = FockBasis::classical(64);
    let xs = single_frequency_spectrum_of(&Symbol::xia(), &basis, 4).unwrap();
    let bs = single_frequency_spectrum_of(&Symbol::xia().conj(), &basis, 4).unwrap();
    let xs = xs.mode_indexed().unwrap();
    assert!((xs[0] - 0.46838).abs() < 1e-4);
    assert!((xs[1] - 0.48223).abs() < 1e-4);
    assert!((bs.mode_indexed().unwrap()[0] - 0.28991).abs() < 1e-4);
    // s_1(xia) = √(e^{-1} − e^{-2})
    assert!((xs[1] - (inv_e() - inv_e() * inv_e()).sqrt()).abs() < 1e-13);
}

#[test]
fn hankel_oracles_across_paths() {
    let basis = Arc::new(FockBasis::classical(120));
    let rule = QuadratureRule::default();
    for s in ["xia", "conj(xia)", "radial(nu=2, g=invr_outside(1))"] {
        let sym = Symbol::parse(s).unwrap();
        let dense = HankelModel::new(basis.clone(), sym.clone(), 24, 40, &rule)
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
fn bessel_inequality_on_shipped_symbols() {
    let basis = Arc::new(FockBasis::classical(200));
    let rule = QuadratureRule::default();
    for sym in shipped_symbols() {
        let model = HankelModel::with_default_m(basis.clone(), sym.clone(), 16, &rule).unwrap();
        let a = model.cross_matrix();
        let b = model.gram_matrix().unwrap();
        for k in 0..=16 {
            let captured = a.column_norm_sqr(k);
            let total = b.get(k, k).re;
            assert!(
                captured <= total * (1.0 + 1e-10) + 1e-12,
                "{sym} k={k}: {captured} > {total}"
            );
        }
        if sym.is_bounded() {
            let grid = basis
                .plane_grid(60, 0, 60, &rule, sym.break_radii())
                .unwrap();
            let f = |z| sym.eval(z);
            let norm = basis.norm_sqr(f, &grid).unwrap();
            let coeffs = basis.project_coeffs(f, 60, &grid).unwrap();
            let captured: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
            assert!(captured <= norm * (1.0 + 1e-10), "{sym}");
        }
    }
}

#[test]
fn quadrature_exactness_on_disks_and_planes() {
    for order in [4usize, 8, 12, 20] {
        let rule = QuadratureRule::default().with_gauss_order(order);
        for domain in [
            Domain::Disk {
                center: Complex64::new(0.3, -1.2),
                r: 1.7,
            },
            Domain::PlaneTruncated { r: 6.0 },
        ] {
            let grid = PolarGrid::new(domain, &rule, &[]).unwrap();
            let report = exactness_report(&grid, 2 * order - 2).unwrap();
            assert!(report.max_rel_error <= 1e-10, "{domain:?} order {order}");
        }
    }
}

#[test]
fn basis_gram_is_identity() {
    let basis = FockBasis::classical(60);
    let rule = QuadratureRule::default();
    let grid = basis.plane_grid(40, 0, 40, &rule, &[]).unwrap();
    for j in 0..=40usize {
        let coeffs = basis
            .project_coeffs(|z| basis.basis_eval(j, z).unwrap(), 40, &grid)
            .unwrap();
        for (m, c) in coeffs.iter().enumerate() {
            let expect = if m == j { 1.0 } else { 0.0 };
            assert!((c - expect).norm() <= 1e-9, "⟨e_{j}, e_{m}⟩ = {c}");
        }
    }
}

#[test]
fn g_below_mo_on_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let symbols = shipped_symbols();
    let rule = oscillation::disk_rule(&QuadratureRule::default(), 25);
    for _ in 0..100 {
        let sym = &symbols[rng.gen_range(0..symbols.len())];
        let z = Complex64::new(rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0));
        let r = rng.gen_range(0.5..2.0);
        let sample = DiskSample::new(sym, z, r, &rule).unwrap();
        let g = sample.g(2.0, 25, 1e-9).value;
        let mo = sample.mo(2.0);
        assert!(g <= mo * (1.0 + 1e-12) + 1e-13, "{sym} at {z}: {g} > {mo}");
    }
}

#[test]
fn mo_conjugation_is_exact() {
    let rule = QuadratureRule::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for sym in shipped_symbols() {
        let bar = Symbol::general(
            "bar",
            {
                let f = sym.clone();
                Arc::new(move |w| f.eval(w).conj())
            },
            sym.break_radii().to_vec(),
            sym.is_bounded(),
        );
        for _ in 0..5 {
            let z = Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let a = oscillation::mo(&sym, z, 1.0, 2.0, &rule).unwrap();
            let b = oscillation::mo(&bar, z, 1.0, 2.0, &rule).unwrap();
            assert_eq!(a.to_bits(), b.to_bits(), "{sym} at {z}");
        }
    }
}

#[test]
fn jacobi_characteristic_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let a = rng.gen_range(-3.0..3.0);
        let d = rng.gen_range(-3.0..3.0);
        let b = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let m = HermitianMatrix::new(
            2,
            vec![Complex64::new(a, 0.0), b, b.conj(), Complex64::new(d, 0.0)],
        )
        .unwrap();
        let eig = jacobi_eigen(&m, 1e-15).unwrap();
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        assert!((eig[0] - (mean + rad)).abs() <= 1e-10);
        assert!((eig[1] - (mean - rad)).abs() <= 1e-10);
    }
    // 3×3 with a known spectrum: U diag(λ) Uᴴ for a unitary U built from two columns
    for _ in 0..20 {
        let lam = [
            rng.gen_range(-4.0..4.0),
            rng.gen_range(-4.0..4.0),
            rng.gen_range(-4.0..4.0),
        ];
        let mut cols: Vec<[Complex64; 3]> = Vec::new();
        while cols.len() < 3 {
            let mut v = [Complex64::new(0.0, 0.0); 3];
            for x in v.iter_mut() {
                *x = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            for c in &cols {
                let dot: Complex64 = (0..3).map(|i| c[i].conj() * v[i]).sum();
                for i in 0..3 {
                    v[i] -= dot * c[i];
                }
            }
            let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            for x in v.iter_mut() {
                *x /= n;
            }
            cols.push(v);
        }
        let mut data = vec![Complex64::new(0.0, 0.0); 9];
        for i in 0..3 {
            for j in 0..3 {
                data[i * 3 + j] = (0..3)
                    .map(|k| cols[k][i] * lam[k] * cols[k][j].conj())
                    .sum();
            }
        }
        let m = HermitianMatrix::new(3, data).unwrap();
        let eig = jacobi_eigen(&m, 1e-15).unwrap();
        let mut expect = lam.to_vec();
        expect.sort_by(|a, b| b.total_cmp(a));
        for (e, x) in eig.iter().zip(&expect) {
            assert!((e - x).abs() <= 1e-10, "{eig:?} vs {expect:?}");
        }
    }
}

#[test]
fn zero_and_analytic_symbols_have_no_hankel_part() {
    let basis = Arc::new(FockBasis::classical(100));
    let rule = QuadratureRule::default();
    for s in ["poly(0,1)", "poly(2-1i,0,0+3i)", "poly(0)"] {
        let sym = Symbol::parse(s).unwrap();
        let model = HankelModel::with_default_m(basis.clone(), sym, 20, &rule).unwrap();
        assert!(model.normal_matrix().unwrap().max_abs() <= 1e-9, "{s}");
    }
    let empty = ComplexMatrix::zeros(2, 2);
    assert_eq!(empty.max_abs(), 0.0);
}
