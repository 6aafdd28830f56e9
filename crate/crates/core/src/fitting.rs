//! Power-law fit `p_c = A · z^(−γ)` by linear least squares on log-log axes.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::fmt_sig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("need at least two distinct z values")]
    DegenerateZ,
    #[error("point {label:?}: {reason}")]
    InvalidPoint { label: String, reason: String },
    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub label: String,
    pub z: u32,
    pub p_c: f64,
    /// Standard uncertainty of `p_c`.
    pub u: f64,
}

impl ThresholdPoint {
    pub fn new(label: impl Into<String>, z: u32, p_c: f64, u: f64) -> Self {
        ThresholdPoint {
            label: label.into(),
            z,
            p_c,
            u,
        }
    }

    fn validate(&self) -> Result<(), FitError> {
        let bad = |reason: &str| FitError::InvalidPoint {
            label: self.label.clone(),
            reason: reason.to_string(),
        };
        if self.z < 1 {
            return Err(bad("z must be at least 1"));
        }
        if !(self.p_c > 0.0 && self.p_c < 1.0) {
            return Err(bad("p_c must lie in (0, 1)"));
        }
        if !(self.u >= 0.0 && self.u.is_finite()) {
            return Err(bad("u must be finite and nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    #[default]
    Uniform,
    /// Weights `1/σ²` with `σ = u / p_c`, the uncertainty of `ln p_c`.
    InverseVariance,
}

impl std::str::FromStr for Weighting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Weighting::Uniform),
            "inverse-variance" => Ok(Weighting::InverseVariance),
            other => Err(format!(
                "unknown weighting {other:?}; expected uniform or inverse-variance"
            )),
        }
    }
}

impl std::fmt::Display for Weighting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Weighting::Uniform => "uniform",
            Weighting::InverseVariance => "inverse-variance",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub gamma: f64,
    pub gamma_stderr: f64,
    pub amplitude: f64,
    pub n_points: usize,
    pub weighting: Weighting,
    /// `ln p_c − ln(A z^−γ)` per input point, in input order.
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl PowerLawFit {
    pub fn predict(&self, z: f64) -> f64 {
        self.amplitude * z.powf(-self.gamma)
    }
}

pub fn fit_power_law(
    points: &[ThresholdPoint],
    weighting: Weighting,
) -> Result<PowerLawFit, FitError> {
    if points.len() < 3 {
        return Err(FitError::TooFewPoints(points.len()));
    }
    for p in points {
        p.validate()?;
        if weighting == Weighting::InverseVariance && p.u == 0.0 {
            return Err(FitError::InvalidPoint {
                label: p.label.clone(),
                reason: "inverse-variance weighting needs u > 0".into(),
            });
        }
    }
    if points.iter().all(|p| p.z == points[0].z) {
        return Err(FitError::DegenerateZ);
    }

    // Sum in a canonical order so the result is exactly permutation invariant.
    let mut data: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|p| {
            let w = match weighting {
                Weighting::Uniform => 1.0,
                Weighting::InverseVariance => (p.p_c / p.u).powi(2),
            };
            ((p.z as f64).ln(), p.p_c.ln(), w)
        })
        .collect();
    data.sort_by(|a, b| a.partial_cmp(b).expect("finite"));

    let sw: f64 = data.iter().map(|d| d.2).sum();
    let mx = data.iter().map(|d| d.2 * d.0).sum::<f64>() / sw;
    let my = data.iter().map(|d| d.2 * d.1).sum::<f64>() / sw;
    let sxx: f64 = data.iter().map(|d| d.2 * (d.0 - mx).powi(2)).sum();
    let sxy: f64 = data.iter().map(|d| d.2 * (d.0 - mx) * (d.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;

    let residuals: Vec<f64> = points
        .iter()
        .map(|p| p.p_c.ln() - (intercept + slope * (p.z as f64).ln()))
        .collect();
    let n = points.len() as f64;
    let gamma_stderr = match weighting {
        Weighting::Uniform => {
            let ssr: f64 = data
                .iter()
                .map(|d| (d.1 - (intercept + slope * d.0)).powi(2))
                .sum();
            (ssr / (n - 2.0) / sxx).sqrt()
        }
        Weighting::InverseVariance => (1.0 / sxx).sqrt(),
    };

    Ok(PowerLawFit {
        gamma: -slope,
        gamma_stderr,
        amplitude: intercept.exp(),
        n_points: points.len(),
        weighting,
        residuals,
    })
}

/// Reads `label,z,p_c,u` rows (with that header).
pub fn read_points_csv<R: Read>(input: R) -> Result<Vec<ThresholdPoint>, FitError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| FitError::Parse {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let expected = ["label", "z", "p_c", "u"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(FitError::Parse {
            line: 1,
            reason: format!("expected header {}", expected.join(",")),
        });
    }
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| FitError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| {
            record.get(i).ok_or_else(|| FitError::Parse {
                line,
                reason: format!("missing {name}"),
            })
        };
        let parse_err = |name: &str, raw: &str| FitError::Parse {
            line,
            reason: format!("cannot parse {name} from {raw:?}"),
        };
        let label = field(0, "label")?.to_string();
        let z_raw = field(1, "z")?;
        let z = z_raw.parse().map_err(|_| parse_err("z", z_raw))?;
        let p_raw = field(2, "p_c")?;
        let p_c = p_raw.parse().map_err(|_| parse_err("p_c", p_raw))?;
        let u_raw = field(3, "u")?;
        let u = u_raw.parse().map_err(|_| parse_err("u", u_raw))?;
        let point = ThresholdPoint { label, z, p_c, u };
        point.validate().map_err(|e| FitError::Parse {
            line,
            reason: e.to_string(),
        })?;
        points.push(point);
    }
    Ok(points)
}

/// Plot-ready rows `label,z,p_c,fitted_p_c`.
pub fn write_fit_csv<W: Write>(
    points: &[ThresholdPoint],
    fit: &PowerLawFit,
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "label,z,p_c,fitted_p_c")?;
    for p in points {
        let label = if p.label.contains([',', '"']) {
            format!("\"{}\"", p.label.replace('"', "\"\""))
        } else {
            p.label.clone()
        };
        writeln!(
            out,
            "{},{},{},{}",
            label,
            p.z,
            fmt_sig(p.p_c),
            fmt_sig(fit.predict(p.z as f64))
        )?;
    }
    Ok(())
}
