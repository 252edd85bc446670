//! Command-line surface and resolved experiment configuration.
//!
//! Precedence is flag, then `FHL_*` environment variable, then the
//! per-experiment default.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Registered experiments, in listing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    BcpSweep,
    MoDecay,
    ImoIntegral,
    IdaCheck,
    EntireSymbol,
    CompactnessProbe,
    Validate,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::BcpSweep,
        Experiment::MoDecay,
        Experiment::ImoIntegral,
        Experiment::IdaCheck,
        Experiment::EntireSymbol,
        Experiment::CompactnessProbe,
        Experiment::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::BcpSweep => "bcp-sweep",
            Experiment::MoDecay => "mo-decay",
            Experiment::ImoIntegral => "imo-integral",
            Experiment::IdaCheck => "ida-check",
            Experiment::EntireSymbol => "entire-symbol",
            Experiment::CompactnessProbe => "compactness-probe",
            Experiment::Validate => "validate",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::BcpSweep => {
                "Schatten partial sums of H_f and H_conj(f) with divergence flags per p"
            }
            Experiment::MoDecay => "MO_{p,r}(f) at points on the real axis, scaled by |z|^2",
            Experiment::ImoIntegral => "lattice integral of MO_{2,r}(f)^p over doubling rings",
            Experiment::IdaCheck => "G_{q,r}(f) at sample points and its truncated L^s norm",
            Experiment::EntireSymbol => {
                "G, MO, BMO growth and the Hankel normal matrix for a polynomial symbol"
            }
            Experiment::CompactnessProbe => {
                "projection residual of translates of f as the shift grows"
            }
            Experiment::Validate => "cross-oracle and eigensolver self checks",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown experiment `{s}` (run `fhl list` for the registry)"
                ))
            })
    }
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "fhl",
    version,
    about = "Numerical lab for Hankel operators on weighted Fock spaces",
    allow_negative_numbers = true
)]
pub struct Args {
    /// Experiment name, or `list` to print the registry
    pub experiment: String,
    /// Symbol in the grammar `xia | poly(..) | conj(..) | radial(nu=.., g=..) | indicator(..)`
    #[arg(long)]
    pub symbol: Option<String>,
    /// `classical`, `gaussian:<alpha>` or a path to a JSON weight file
    #[arg(long)]
    pub weight: Option<String>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Comma-separated exponents
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Polynomial degree for G
    #[arg(long = "D")]
    pub degree: Option<usize>,
    /// Lattice spacing
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "Rmax")]
    pub r_max: Option<f64>,
    /// Comma-separated sample radii
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Comma-separated translation lengths
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long, env = "FHL_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, env = "FHL_FORMAT", value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads
    #[arg(long, env = "FHL_THREADS")]
    pub threads: Option<usize>,
}

/// Fully resolved knobs for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub symbol: String,
    pub weight: String,
    #[serde(rename = "N")]
    pub n: usize,
    /// `None` picks the default projection truncation.
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[serde(rename = "K")]
    pub k: usize,
    pub p: Vec<f64>,
    pub r: f64,
    pub q: f64,
    #[serde(rename = "D")]
    pub degree: usize,
    pub delta: f64,
    #[serde(rename = "Rmax")]
    pub r_max: f64,
    pub radii: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub tol: f64,
    pub format: Format,
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = Self {
            experiment,
            symbol: "xia".into(),
            weight: "classical".into(),
            n: 24,
            m: None,
            k: 2000,
            p: vec![2.0],
            r: 1.0,
            q: 2.0,
            degree: 25,
            delta: 0.5,
            r_max: 8.0,
            radii: Vec::new(),
            lambdas: Vec::new(),
            tol: 1e-9,
            format: Format::Csv,
            seed: 0,
            out: None,
        };
        match experiment {
            Experiment::BcpSweep => c.p = vec![0.5, 1.0, 1.5, 2.0],
            Experiment::MoDecay => {
                c.symbol = "conj(xia)".into();
                c.radii = vec![2.0, 4.0, 8.0, 16.0, 32.0];
            }
            Experiment::ImoIntegral => {
                c.symbol = "conj(xia)".into();
                c.p = vec![1.0, 2.0];
                c.r_max = 32.0;
            }
            Experiment::IdaCheck => {
                c.p = vec![1.0];
                c.radii = vec![2.0, 3.0, 4.0, 8.0];
            }
            Experiment::EntireSymbol => {
                c.symbol = "poly(0,0,1)".into();
                c.p = vec![1.0];
                c.radii = vec![0.0, 1.0, 5.0];
            }
            Experiment::CompactnessProbe => {
                c.m = Some(40);
                c.lambdas = vec![0.0, 2.0, 4.0, 8.0];
            }
            Experiment::Validate => c.m = Some(40),
        }
        c
    }

    /// Applies explicit flags over the experiment defaults and checks ranges.
    pub fn from_args(args: &Args) -> Result<Self, CliError> {
        let experiment: Experiment = args.experiment.parse()?;
        let mut c = Self::defaults(experiment);
        if let Some(s) = &args.symbol {
            c.symbol = s.clone();
        }
        if let Some(w) = &args.weight {
            c.weight = w.clone();
        }
        if let Some(n) = args.n {
            c.n = n;
        }
        if args.m.is_some() {
            c.m = args.m;
        }
        if let Some(k) = args.k {
            c.k = k;
        }
        if let Some(p) = &args.p {
            c.p = p.clone();
        }
        if let Some(r) = args.r {
            c.r = r;
        }
        if let Some(q) = args.q {
            c.q = q;
        }
        if let Some(d) = args.degree {
            c.degree = d;
        }
        if let Some(d) = args.delta {
            c.delta = d;
        }
        if let Some(r) = args.r_max {
            c.r_max = r;
        }
        if let Some(r) = &args.radii {
            c.radii = r.clone();
        }
        if let Some(l) = &args.lambdas {
            c.lambdas = l.clone();
        }
        if let Some(f) = args.format {
            c.format = f;
        }
        if let Some(s) = args.seed {
            c.seed = s;
        }
        c.out = args.out.clone();
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        if self.p.is_empty() {
            return usage("--p needs at least one value".into());
        }
        if let Some(p) = self.p.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return usage(format!("--p values must be positive, got {p}"));
        }
        for (name, v) in [
            ("--r", self.r),
            ("--delta", self.delta),
            ("--Rmax", self.r_max),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return usage(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.q.is_finite() && self.q >= 1.0) {
            return usage(format!("--q must be >= 1, got {}", self.q));
        }
        if self.k < 4 {
            return usage(format!("--K must be at least 4, got {}", self.k));
        }
        if let Some(m) = self.m {
            if m < self.n {
                return usage(format!("--M ({m}) must be >= --N ({})", self.n));
            }
        }
        if self.degree > 60 {
            return usage(format!("--D must be <= 60, got {}", self.degree));
        }
        if let Some(r) = self.radii.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return usage(format!("--radii must be nonnegative, got {r}"));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !l.is_finite()) {
            return usage(format!("--lambdas must be finite, got {l}"));
        }
        Ok(())
    }

    /// Report path: `--out`/`FHL_OUT`, else `fhl-<experiment>.<ext>`.
    pub fn out_path(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            PathBuf::from(format!(
                "fhl-{}.{}",
                self.experiment,
                self.format.extension()
            ))
        })
    }
}
