//! Acceptance criteria, one line per criterion. Exits nonzero if any fails.

use std::f64::consts::{LN_2, PI, SQRT_2};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use fhl_cli::experiments::{partial_sum, spectrum_for};
use fhl_cli::{Cell, Experiment, ExperimentConfig, RunReport};
use fhl_core::{
    single_frequency_spectrum_of, FockBasis, HankelModel, QuadratureRule, RadialWeight, Symbol,
};

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn FnOnce() -> Outcome + 'a>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(
    experiment: Experiment,
    tweak: impl FnOnce(&mut ExperimentConfig),
) -> Result<RunReport, String> {
    let mut c = ExperimentConfig::defaults(experiment);
    tweak(&mut c);
    c.validate().map_err(|e| e.to_string())?;
    fhl_cli::run(&c).map_err(|e| format!("{experiment} failed: {e}"))
}

fn col(report: &RunReport, name: &str) -> usize {
    report
        .columns
        .iter()
        .position(|c| c == name)
        .unwrap_or_else(|| panic!("missing column {name}"))
}

fn real(cell: &Cell) -> f64 {
    cell.as_f64().expect("numeric cell")
}

/// Value in `target` of the first row whose `keys` columns equal the given numbers.
fn lookup(report: &RunReport, keys: &[(&str, f64)], target: &str) -> Result<f64, String> {
    let t = col(report, target);
    report
        .rows
        .iter()
        .find(|row| keys.iter().all(|(k, v)| real(&row[col(report, k)]) == *v))
        .map(|row| real(&row[t]))
        .ok_or_else(|| format!("no row {keys:?}"))
}

fn lookup_named<'a>(
    report: &'a RunReport,
    quantity: &str,
    radius: f64,
) -> Result<&'a Vec<Cell>, String> {
    let q = col(report, "quantity");
    let r = col(report, "radius");
    report
        .rows
        .iter()
        .find(|row| row[q] == Cell::Text(quantity.into()) && real(&row[r]) == radius)
        .ok_or_else(|| format!("no {quantity} row at {radius}"))
}

fn flag(report: &RunReport, keys: &[(&str, f64)], target: &str) -> Result<bool, String> {
    let t = col(report, target);
    report
        .rows
        .iter()
        .find(|row| keys.iter().all(|(k, v)| real(&row[col(report, k)]) == *v))
        .and_then(|row| row[t].as_bool())
        .ok_or_else(|| format!("no flag row {keys:?}"))
}

fn all_verdicts_pass(report: &RunReport) -> Result<(), String> {
    match report.verdicts.iter().find(|v| !v.passed) {
        None => Ok(()),
        Some(v) => Err(format!("verdict {} failed: {}", v.check, v.detail)),
    }
}

fn bcp_report() -> Result<RunReport, String> {
    run(Experiment::BcpSweep, |c| {
        c.symbol = "xia".into();
        c.p = vec![0.5, 1.0, 1.5, 2.0];
        c.k = 2000;
    })
}

fn criterion_1(bcp: &RunReport) -> Outcome {
    let s = |k: f64| lookup(bcp, &[("p", 1.0), ("K", k)], "partial_sum_conj_f");
    let (a, b, c) = (s(500.0)?, s(1000.0)?, s(2000.0)?);
    for inc in [b - a, c - b] {
        ensure((inc - 0.693).abs() <= 0.07, || {
            format!("conj increment per doubling {inc:.4} outside 0.693 +- 0.07")
        })?;
    }
    let basis = FockBasis::classical(2001);
    let f =
        single_frequency_spectrum_of(&Symbol::xia(), &basis, 2000).map_err(|e| e.to_string())?;
    let drift = partial_sum(&f, 1.0, 2000) - partial_sum(&f, 1.0, 50);
    ensure(drift.abs() < 1e-6, || {
        format!("xia sum drifts by {drift:.3e} from K=50 to 2000")
    })?;
    for p in [0.5, 1.0] {
        ensure(flag(bcp, &[("p", p)], "divergence_flag_conj_f")?, || {
            format!("conj flag false at p={p}")
        })?;
    }
    for p in [0.5, 1.0, 1.5, 2.0] {
        ensure(!flag(bcp, &[("p", p)], "divergence_flag_f")?, || {
            format!("xia flag true at p={p}")
        })?;
    }
    Ok(format!(
        "conj increments {:.4}, {:.4}; xia drift {drift:.1e}",
        b - a,
        c - b
    ))
}

fn criterion_2(bcp: &RunReport) -> Outcome {
    let inc = |p: f64, column: &str| -> Result<f64, String> {
        Ok(lookup(bcp, &[("p", p), ("K", 2000.0)], column)?
            - lookup(bcp, &[("p", p), ("K", 1000.0)], column)?)
    };
    let i2 = inc(2.0, "partial_sum_conj_f")?;
    let i15 = inc(1.5, "partial_sum_conj_f")?;
    ensure(i2 < 1e-3, || format!("p=2 conj increment {i2:.3e} >= 1e-3"))?;
    ensure(i15 < 0.02, || {
        format!("p=1.5 conj increment {i15:.3e} >= 0.02")
    })?;
    for p in [1.5, 2.0] {
        let fi = inc(p, "partial_sum_f")?;
        ensure(fi.abs() < 1e-6, || {
            format!("xia increment {fi:.3e} at p={p}")
        })?;
        for column in ["partial_sum_f", "partial_sum_conj_f"] {
            let v = lookup(bcp, &[("p", p), ("K", 2000.0)], column)?;
            ensure(v.is_finite(), || format!("{column} not finite at p={p}"))?;
        }
        ensure(!flag(bcp, &[("p", p)], "divergence_flag_conj_f")?, || {
            format!("conj flag true at p={p}")
        })?;
    }
    Ok(format!("conj increments p=2 {i2:.2e}, p=1.5 {i15:.4}"))
}

fn criterion_3() -> Outcome {
    let basis = FockBasis::classical(1001);
    let rule = QuadratureRule::default();
    let weight = RadialWeight::classical();
    let bar =
        spectrum_for(&Symbol::xia().conj(), &weight, 1000, &rule).map_err(|e| e.to_string())?;
    let modes = bar
        .mode_indexed()
        .ok_or("conj spectrum is not mode-indexed")?;
    let (lo, hi) = (200..=1000)
        .map(|k| k as f64 * modes[k])
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    ensure(lo >= 0.9 && hi <= 1.1, || {
        format!("k s_k spans [{lo:.4}, {hi:.4}]")
    })?;
    let f = single_frequency_spectrum_of(&Symbol::xia(), &basis, 2).map_err(|e| e.to_string())?;
    let f = f.mode_indexed().unwrap();
    for (got, want, name) in [
        (f[0], 0.46838, "s_0(f)"),
        (f[1], 0.48223, "s_1(f)"),
        (modes[0], 0.28991, "s_0(conj f)"),
    ] {
        ensure((got - want).abs() <= 1e-4, || {
            format!("{name} = {got:.6}, want {want}")
        })?;
    }
    Ok(format!(
        "k s_k in [{lo:.4}, {hi:.4}]; s_0 {:.5}, s_1 {:.5}, conj s_0 {:.5}",
        f[0], f[1], modes[0]
    ))
}

fn criterion_4() -> Outcome {
    let basis = Arc::new(FockBasis::classical(60));
    let rule = QuadratureRule::default();
    let mut worst = 0.0f64;
    for s in ["xia", "conj(xia)"] {
        let sym = Symbol::parse(s).unwrap();
        let dense = HankelModel::new(basis.clone(), sym.clone(), 24, 40, &rule)
            .and_then(|m| m.singular_values())
            .map_err(|e| format!("{s}: {e}"))?;
        let closed = single_frequency_spectrum_of(&sym, &basis, 24).map_err(|e| e.to_string())?;
        ensure(dense.len() == closed.len(), || {
            format!("{s}: length mismatch")
        })?;
        for (a, b) in dense.values().iter().zip(closed.values()) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-6, || format!("max gap {worst:.3e}"))?;
    Ok(format!("max gap {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let r = run(Experiment::IdaCheck, |c| {
        c.symbol = "xia".into();
        c.degree = 25;
        c.q = 2.0;
        c.r = 1.0;
        c.radii = vec![2.0, 3.0, 4.0, 8.0];
    })?;
    let mut worst = 0.0f64;
    for radius in [2.0, 3.0, 4.0, 8.0] {
        let g = real(&lookup_named(&r, "g", radius)?[2]);
        worst = worst.max(g);
    }
    ensure(worst <= 1e-6, || {
        format!("max G at sample points {worst:.3e}")
    })?;
    let inner = real(&lookup_named(&r, "max_g_inner", 2.0)?[2]);
    ensure(inner.is_finite(), || "inner max not finite".into())?;
    let anchor = real(&lookup_named(&r, "partial_norm", 4.0)?[2]);
    let mut drift = 0.0f64;
    for radius in [5.0, 6.0, 7.0, 8.0] {
        drift = drift.max((real(&lookup_named(&r, "partial_norm", radius)?[2]) - anchor).abs());
    }
    ensure(drift <= 1e-6, || {
        format!("L1 norm drifts {drift:.3e} beyond R=4")
    })?;
    Ok(format!(
        "max G {worst:.1e}; max over |z|<2 {inner:.4}; drift {drift:.1e}"
    ))
}

fn criterion_6() -> Outcome {
    let r = run(Experiment::MoDecay, |c| {
        c.symbol = "conj(xia)".into();
        c.radii = vec![8.0, 16.0, 32.0];
        c.p = vec![2.0];
        c.r = 1.0;
    })?;
    let mut seen = Vec::new();
    for radius in [8.0, 16.0, 32.0] {
        let v = lookup(&r, &[("radius", radius)], "mo_times_radius_sq")?;
        ensure((0.65..=0.75).contains(&v), || {
            format!("|z|^2 MO = {v:.4} at |z|={radius}")
        })?;
        seen.push(format!("{v:.4}"));
    }
    Ok(format!("|z|^2 MO = {}", seen.join(", ")))
}

fn criterion_7() -> Outcome {
    let r = run(Experiment::ImoIntegral, |c| {
        c.symbol = "conj(xia)".into();
        c.p = vec![1.0, 2.0];
        c.r_max = 32.0;
        c.delta = 0.5;
        c.r = 1.0;
    })?;
    let limit = SQRT_2 * PI * LN_2;
    let mut incs = Vec::new();
    for (a, b) in [(8.0, 16.0), (16.0, 32.0)] {
        let inc = lookup(&r, &[("p", 1.0), ("r_in", a), ("r_out", b)], "increment")?;
        ensure((inc / limit - 1.0).abs() <= 0.15, || {
            format!("p=1 ring {a}..{b} increment {inc:.4} vs {limit:.4}")
        })?;
        incs.push(inc);
    }
    let tail = lookup(
        &r,
        &[("p", 2.0), ("r_in", 16.0), ("r_out", 32.0)],
        "increment",
    )?;
    ensure(tail < 0.01, || {
        format!("p=2 ring 16..32 increment {tail:.3e}")
    })?;
    Ok(format!(
        "p=1 rings {:.4}, {:.4} (limit {limit:.4}); p=2 tail {tail:.1e}",
        incs[0], incs[1]
    ))
}

fn criterion_8() -> Outcome {
    let sq = run(Experiment::EntireSymbol, |c| {
        c.symbol = "poly(0,0,1)".into();
        c.radii = vec![0.0, 1.0, 5.0];
    })?;
    let g = real(&lookup_named(&sq, "g_lattice_max", sq.config.r_max)?[2]);
    ensure(g <= 1e-8, || format!("max lattice G for z^2 is {g:.3e}"))?;
    for radius in [0.0, 1.0, 5.0] {
        let got = real(&lookup_named(&sq, "mo_sqr", radius)?[2]);
        let want = 2.0 * radius * radius + 1.0 / 3.0;
        ensure((got - want).abs() <= 1e-6, || {
            format!("MO^2 {got} vs {want} at |z|={radius}")
        })?;
    }
    let growth = lookup_named(&sq, "bmo_growth", sq.config.r_max)?[2].as_bool();
    ensure(growth == Some(true), || {
        "BMO growth flag not raised for z^2".into()
    })?;

    let lin = run(Experiment::EntireSymbol, |c| c.symbol = "poly(0,1)".into())?;
    let entry = real(&lookup_named(&lin, "normal_max_entry", lin.config.n as f64)?[2]);
    ensure(entry <= 1e-9, || {
        format!("normal matrix entry {entry:.3e} for z")
    })?;
    let diverging = lookup_named(&lin, "imo_diverging", lin.config.r_max)?[2].as_bool();
    ensure(diverging == Some(true), || {
        "IMO report for z does not diverge".into()
    })?;
    all_verdicts_pass(&sq)?;
    all_verdicts_pass(&lin)?;
    Ok(format!(
        "z^2: max G {g:.1e}; z: max normal entry {entry:.1e}"
    ))
}

fn probes(symbol: &str) -> Result<Vec<f64>, String> {
    let r = run(Experiment::CompactnessProbe, |c| {
        c.symbol = symbol.into();
        c.lambdas = vec![0.0, 2.0, 4.0, 8.0];
    })?;
    let p = col(&r, "probe");
    Ok(r.rows.iter().map(|row| real(&row[p])).collect())
}

fn criterion_9() -> Outcome {
    let xia = probes("xia")?;
    let bar = probes("conj(xia)")?;
    let zbar = probes("conj(poly(0,1))")?;
    for (name, v) in [("xia", &xia), ("conj(xia)", &bar)] {
        ensure(v.windows(2).all(|w| w[1] < w[0]), || {
            format!("{name} probes {v:.4?}")
        })?;
    }
    ensure((xia[0] - 0.83017).abs() <= 1e-4, || {
        format!("probe(0) = {:.6}", xia[0])
    })?;
    let last = *zbar.last().unwrap();
    ensure(last >= 0.5 * zbar[0] && last > 0.1, || {
        format!("conj(z) probes {zbar:.4?}")
    })?;
    Ok(format!(
        "xia {xia:.4?}; conj(xia) {bar:.4?}; conj(z) stays at {last:.4}"
    ))
}

fn run_binary(args: &[&str], out: &Path) -> Result<Vec<u8>, String> {
    let output = Command::new(env!("CARGO_BIN_EXE_fhl"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("FHL_OUT")
        .env_remove("FHL_FORMAT")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(output.status.success(), || {
        format!(
            "fhl {args:?} exited {:?}: {}",
            output.status.code(),
            String::from_utf8_lossy(&output.stderr)
        )
    })?;
    let stdout = String::from_utf8_lossy(&output.stdout);
    ensure(stdout.trim() == out.display().to_string(), || {
        format!("stdout was {stdout:?}")
    })?;
    std::fs::read(out).map_err(|e| e.to_string())
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let report = run(Experiment::Validate, |c| c.seed = 17)?;
    all_verdicts_pass(&report)?;
    let first = run_binary(&["validate", "--seed", "17"], &dir.path().join("a.csv"))?;
    let second = run_binary(&["validate", "--seed", "17"], &dir.path().join("b.csv"))?;
    ensure(first == second, || {
        "validate CSV differs between runs".into()
    })?;
    let sweep_a = run_binary(
        &["bcp-sweep", "--K", "400", "--seed", "5"],
        &dir.path().join("c.csv"),
    )?;
    let sweep_b = run_binary(
        &["bcp-sweep", "--K", "400", "--seed", "5"],
        &dir.path().join("d.csv"),
    )?;
    ensure(sweep_a == sweep_b, || {
        "bcp-sweep CSV differs between runs".into()
    })?;
    Ok(format!(
        "{}/{} property checks; reports byte-identical",
        report.passed_count(),
        report.verdicts.len()
    ))
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let bcp = bcp_report();
    let criteria: Vec<(&str, Check)> = vec![
        (
            "no Schatten symmetry at p=1",
            Box::new(|| criterion_1(bcp.as_ref()?)),
        ),
        (
            "convergence for p>1",
            Box::new(|| criterion_2(bcp.as_ref()?)),
        ),
        ("spectral rate and first values", Box::new(criterion_3)),
        ("dense and closed form agree", Box::new(criterion_4)),
        ("G vanishes off the cut", Box::new(criterion_5)),
        ("MO asymptotics", Box::new(criterion_6)),
        ("IMO dichotomy", Box::new(criterion_7)),
        ("entire symbols", Box::new(criterion_8)),
        ("compactness probe", Box::new(criterion_9)),
        ("property suites and determinism", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.into_iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2}: PASS  {title}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {title}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
