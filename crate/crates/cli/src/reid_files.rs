//! Gallery and query files for ranked re-identification evaluation.
//!
//! One sample per line: `item <identity> <camera> <dim> v1 ... vdim`,
//! `#` comments.

use std::path::Path;

use reidsim_core::metrics::ReidSample;
use reidsim_core::FeatureVector;

pub fn load_reid_samples(path: &Path) -> Result<Vec<ReidSample>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_reid_samples(&text)
}

pub fn parse_reid_samples(text: &str) -> Result<Vec<ReidSample>, String> {
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 4 || fields[0] != "item" {
            return Err(format!(
                "line {line_no}: expected 'item <identity> <camera> <dim> values...'"
            ));
        }
        let identity: u64 = fields[1]
            .parse()
            .map_err(|_| format!("line {line_no}: bad identity '{}'", fields[1]))?;
        let camera: u64 = fields[2]
            .parse()
            .map_err(|_| format!("line {line_no}: bad camera '{}'", fields[2]))?;
        let dim: usize = fields[3]
            .parse()
            .map_err(|_| format!("line {line_no}: bad dimension '{}'", fields[3]))?;
        if fields.len() != 4 + dim {
            return Err(format!(
                "line {line_no}: expected {dim} values, got {}",
                fields.len() - 4
            ));
        }
        let mut values = Vec::with_capacity(dim);
        for v in &fields[4..] {
            values.push(
                v.parse::<f32>()
                    .map_err(|_| format!("line {line_no}: bad value '{v}'"))?,
            );
        }
        samples.push(ReidSample {
            identity,
            camera,
            feature: FeatureVector(values),
        });
    }
    Ok(samples)
}
