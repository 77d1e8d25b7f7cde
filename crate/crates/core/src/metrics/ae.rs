//! Combined accuracy/efficiency scoring.
//!
//! The mark is the product of an accuracy percentage and a power efficiency
//! (frames per second per watt). Coverage summarizes several normalized
//! components as the area of the radar polygon they span, relative to the
//! full polygon; the polygon construction (equal-angle axes, unit radius
//! bound) is this crate's definition, since only the components and their
//! normalization direction are externally specified.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::metrics::MetricsError;

/// Whether a larger raw value is better (throughput) or worse (power).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Maximize,
    Minimize,
}

/// One radar axis: a raw value, its normalization bound, and direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageComponent {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub direction: Direction,
}

impl CoverageComponent {
    /// Normalized radius in [0, 1]; minimize-direction values are inverted.
    fn radius(&self) -> f64 {
        let r = (self.value / self.bound).clamp(0.0, 1.0);
        match self.direction {
            Direction::Maximize => r,
            Direction::Minimize => 1.0 - r,
        }
    }
}

/// Frames per second per watt.
pub fn efficiency(fps: f64, watts: f64) -> Result<f64, MetricsError> {
    if !crate::params::positive(watts) {
        return Err(MetricsError::NonpositivePower(watts));
    }
    Ok(fps / watts)
}

/// Product of an accuracy percentage and an efficiency. Inputs are expected
/// non-negative.
pub fn ae_mark(accuracy_pct: f64, efficiency: f64) -> f64 {
    accuracy_pct * efficiency
}

/// Radar-polygon area spanned by the components, as a percentage of the
/// full regular polygon.
pub fn ae_coverage(components: &[CoverageComponent]) -> Result<f64, MetricsError> {
    if components.len() < 3 {
        return Err(MetricsError::FewerThanThreeComponents(components.len()));
    }
    for c in components {
        if !crate::params::positive(c.bound) {
            return Err(MetricsError::InvalidInput(format!(
                "component '{}' needs a positive bound",
                c.name
            )));
        }
    }
    let k = components.len();
    // Polygon area with axes at equal angles is (sin(2pi/k)/2) * sum r_i r_{i+1};
    // the unit polygon has r_i = 1 everywhere, so the ratio drops the sine.
    let sum: f64 = (0..k)
        .map(|i| components[i].radius() * components[(i + 1) % k].radius())
        .sum();
    Ok(100.0 * sum / k as f64)
}

/// Measurement inputs for a full scoring block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeInput {
    /// Accuracy percentage (typically IDF1).
    pub accuracy: f64,
    pub fps: f64,
    pub watts: f64,
    pub components: Vec<CoverageComponent>,
}

impl AeInput {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if !crate::params::positive(self.watts) {
            return Err(MetricsError::NonpositivePower(self.watts));
        }
        if !(0.0..=100.0).contains(&self.accuracy) {
            return Err(MetricsError::InvalidInput(format!(
                "accuracy must be in [0, 100], got {}",
                self.accuracy
            )));
        }
        if self.fps < 0.0 {
            return Err(MetricsError::InvalidInput(format!(
                "negative fps {}",
                self.fps
            )));
        }
        Ok(())
    }
}

/// Computed scoring block for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeBlock {
    pub accuracy: f64,
    pub fps: f64,
    pub watts: f64,
    pub efficiency: f64,
    pub mark: f64,
    /// Present when at least three coverage components were supplied.
    pub coverage: Option<f64>,
}

/// Scores a validated input.
pub fn ae_block(input: &AeInput) -> Result<AeBlock, MetricsError> {
    input.validate()?;
    let eff = efficiency(input.fps, input.watts)?;
    let coverage = if input.components.is_empty() {
        None
    } else {
        Some(ae_coverage(&input.components)?)
    };
    Ok(AeBlock {
        accuracy: input.accuracy,
        fps: input.fps,
        watts: input.watts,
        efficiency: eff,
        mark: ae_mark(input.accuracy, eff),
        coverage,
    })
}

/// Reads a measurement file: `fps <f>`, `watts <f>`, `accuracy <f>`, and
/// `component <name> <value> <bound> <max|min>` lines, `#` comments.
pub fn load_ae_input(path: &Path) -> Result<AeInput, MetricsError> {
    let text = std::fs::read_to_string(path).map_err(|e| MetricsError::Io(e.to_string()))?;
    parse_ae_input(&text)
}

pub fn parse_ae_input(text: &str) -> Result<AeInput, MetricsError> {
    let mut fps = None;
    let mut watts = None;
    let mut accuracy = None;
    let mut components = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse_f64 = |s: &str| {
            s.parse::<f64>().map_err(|_| MetricsError::Parse {
                line: line_no,
                message: format!("could not parse '{s}' as a number"),
            })
        };
        match fields.as_slice() {
            ["fps", v] => fps = Some(parse_f64(v)?),
            ["watts", v] => watts = Some(parse_f64(v)?),
            ["accuracy", v] => accuracy = Some(parse_f64(v)?),
            ["component", name, value, bound, dir] => {
                let direction = match *dir {
                    "max" => Direction::Maximize,
                    "min" => Direction::Minimize,
                    other => {
                        return Err(MetricsError::Parse {
                            line: line_no,
                            message: format!("direction must be max or min, got '{other}'"),
                        })
                    }
                };
                components.push(CoverageComponent {
                    name: (*name).to_string(),
                    value: parse_f64(value)?,
                    bound: parse_f64(bound)?,
                    direction,
                });
            }
            _ => {
                return Err(MetricsError::Parse {
                    line: line_no,
                    message: format!("unrecognized measurement line '{line}'"),
                })
            }
        }
    }
    let missing = |what: &str| MetricsError::InvalidInput(format!("missing '{what}' key"));
    Ok(AeInput {
        accuracy: accuracy.ok_or_else(|| missing("accuracy"))?,
        fps: fps.ok_or_else(|| missing("fps"))?,
        watts: watts.ok_or_else(|| missing("watts"))?,
        components,
    })
}
