//! `--weight` parsing.
//!
//! A weight file is JSON describing
//! `φ(ρ) = alpha·ρ² + beta·√(1+ρ²) + gamma·ln(1+ρ²)` together with the
//! curvature bounds `m`, `M` that the Laplacian must respect:
//!
//! ```json
//! { "alpha": 0.5, "beta": 0.1, "gamma": 0.0, "m": 2.0, "M": 2.2 }
//! ```

use std::path::Path;
use std::sync::Arc;

use fhl_core::RadialWeight;
use serde::Deserialize;

use crate::CliError;

/// Radius up to which a file weight's Laplacian is sampled.
pub const DEFAULT_SAMPLE_RADIUS: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightFile {
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub gamma: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub r_max: Option<f64>,
}

impl WeightFile {
    pub fn into_weight(self, label: &str) -> Result<RadialWeight, CliError> {
        let WeightFile {
            alpha,
            beta,
            gamma,
            m,
            big_m,
            r_max,
        } = self;
        if ![alpha, beta, gamma].iter().all(|v| v.is_finite()) {
            return Err(CliError::Usage(format!(
                "weight file {label}: coefficients must be finite"
            )));
        }
        let phi = Arc::new(move |rho: f64| {
            let s = 1.0 + rho * rho;
            alpha * rho * rho + beta * s.sqrt() + gamma * s.ln()
        });
        // Δ√(1+ρ²) = (1+ρ²)^{-3/2} + (1+ρ²)^{-1/2}, Δ ln(1+ρ²) = 4/(1+ρ²)²
        let laplacian = Arc::new(move |rho: f64| {
            let s = 1.0 + rho * rho;
            4.0 * alpha + beta * (s.powf(-1.5) + s.powf(-0.5)) + 4.0 * gamma / (s * s)
        });
        RadialWeight::custom(
            label,
            phi,
            laplacian,
            m,
            big_m,
            r_max.unwrap_or(DEFAULT_SAMPLE_RADIUS),
        )
        .map_err(|e| CliError::Usage(format!("weight file {label}: {e}")))
    }
}

pub fn parse_weight(spec: &str) -> Result<RadialWeight, CliError> {
    let spec = spec.trim();
    if spec == "classical" {
        return Ok(RadialWeight::classical());
    }
    if let Some(alpha) = spec.strip_prefix("gaussian:") {
        let alpha: f64 = alpha
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad gaussian parameter in `{spec}`")))?;
        return RadialWeight::gaussian(alpha)
            .map_err(|e| CliError::Usage(format!("weight `{spec}`: {e}")));
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Usage(format!(
            "weight `{spec}` is neither `classical`, `gaussian:<alpha>` nor a readable file: {e}"
        ))
    })?;
    let file: WeightFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("weight file {spec}: {e}")))?;
    file.into_weight(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_weights() {
        let w = parse_weight("classical").unwrap();
        assert_eq!(w.gaussian_alpha(), Some(0.5));
        assert_eq!(
            parse_weight("gaussian:0.75").unwrap().gaussian_alpha(),
            Some(0.75)
        );
        assert!(parse_weight("gaussian:-1").is_err());
        assert!(parse_weight("gaussian:x").is_err());
        assert!(parse_weight("/no/such/weight.json").is_err());
    }

    #[test]
    fn file_weight_laplacian_matches_finite_differences() {
        let file = WeightFile {
            alpha: 0.5,
            beta: 0.3,
            gamma: 0.1,
            m: 2.0,
            big_m: 3.0,
            r_max: Some(20.0),
        };
        let w = file.into_weight("test").unwrap();
        for rho in [0.3, 1.0, 2.5, 7.0] {
            let h = 1e-4;
            let d2 = (w.phi(rho + h) - 2.0 * w.phi(rho) + w.phi(rho - h)) / (h * h);
            let d1 = (w.phi(rho + h) - w.phi(rho - h)) / (2.0 * h);
            let fd = d2 + d1 / rho;
            assert!((fd - w.laplacian(rho)).abs() < 1e-5, "rho={rho}");
        }
    }

    #[test]
    fn file_weight_checks_curvature_bounds() {
        let file = WeightFile {
            alpha: 0.5,
            beta: 1.0,
            gamma: 0.0,
            m: 2.0,
            big_m: 2.5,
            r_max: None,
        };
        // Laplacian at 0 is 2 + 2 = 4 > M
        assert!(file.into_weight("tight").is_err());
    }

    #[test]
    fn file_weight_round_trip_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.json");
        std::fs::write(
            &path,
            r#"{"alpha": 0.5, "gamma": 0.05, "m": 2.0, "M": 2.3}"#,
        )
        .unwrap();
        let w = parse_weight(path.to_str().unwrap()).unwrap();
        assert!((w.laplacian(0.0) - 2.2).abs() < 1e-12);
        std::fs::write(&path, r#"{"alpha": 0.5, "m": 2.0, "M": 2.3, "extra": 1}"#).unwrap();
        assert!(parse_weight(path.to_str().unwrap()).is_err());
    }
}
