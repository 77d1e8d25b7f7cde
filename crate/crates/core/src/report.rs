//! Report emission: JSON, a flat CSV, and a static SVG summary.
//!
//! Output is byte-deterministic for a given report: field order is fixed,
//! maps are sorted, and floats are formatted with fixed precision in the
//! text formats.

use std::path::{Path, PathBuf};

use crate::sim::RunReport;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown report format '{0}' (expected csv, json, or svg)")]
    UnknownFormat(String),
}

/// Output formats for [`write_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = ReportError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

/// Flat `section,key,value` rows covering every report field.
pub fn to_csv(report: &RunReport) -> String {
    let mut out = String::from("section,key,value\n");
    let mut row = |section: &str, key: &str, value: String| {
        out.push_str(&format!("{section},{key},{value}\n"));
    };
    row("meta", "cameras", report.cameras.len().to_string());
    row("meta", "frames", report.frames.to_string());
    row(
        "meta",
        "truth_identities",
        report.truth_identities.to_string(),
    );

    let measures =
        |row: &mut dyn FnMut(&str, &str, String), scope: &str, m: &crate::metrics::IdMeasures| {
            row(scope, "idp", fmt(m.idp));
            row(scope, "idr", fmt(m.idr));
            row(scope, "idf1", fmt(m.idf1));
            row(scope, "idtp", m.idtp.to_string());
            row(scope, "idfp", m.idfp.to_string());
            row(scope, "idfn", m.idfn.to_string());
        };
    measures(&mut row, "multi", &report.multi);
    for cam in &report.per_camera {
        let scope = format!("camera:{}", cam.camera);
        measures(&mut row, &scope, &cam.measures);
    }

    row("tracking", "id_switches", report.id_switches.to_string());
    row(
        "tracking",
        "ownership_violations",
        report.ownership_violations.to_string(),
    );
    row(
        "tracking",
        "global_identities_created",
        report.global_identities_created.to_string(),
    );

    row("messages", "query", report.messages.query.to_string());
    row(
        "messages",
        "update_feature",
        report.messages.update_feature.to_string(),
    );
    row("messages", "release", report.messages.release.to_string());
    row(
        "messages",
        "match_reply",
        report.messages.match_reply.to_string(),
    );
    row(
        "messages",
        "replies_delivered",
        report.messages.replies_delivered.to_string(),
    );
    row(
        "messages",
        "stale_replies",
        report.messages.stale_replies.to_string(),
    );

    row(
        "transport",
        "channel_dropped",
        report.transport.channel_dropped.to_string(),
    );
    row(
        "transport",
        "codec_mismatches",
        report.transport.codec_mismatches.to_string(),
    );
    row(
        "transport",
        "hypothesis_conflicts",
        report.transport.hypothesis_conflicts.to_string(),
    );

    row(
        "server",
        "malformed_dropped",
        report.server.malformed_dropped.to_string(),
    );
    row(
        "server",
        "unknown_node",
        report.server.unknown_node.to_string(),
    );
    row("server", "unknown_id", report.server.unknown_id.to_string());
    row("server", "not_owner", report.server.not_owner.to_string());
    row(
        "server",
        "capacity_deadlocks",
        report.server.capacity_deadlocks.to_string(),
    );
    row("server", "evictions", report.server.evictions.to_string());

    if let Some(ae) = &report.ae {
        row("ae", "accuracy", fmt(ae.accuracy));
        row("ae", "fps", fmt(ae.fps));
        row("ae", "watts", fmt(ae.watts));
        row("ae", "efficiency", fmt(ae.efficiency));
        row("ae", "mark", fmt(ae.mark));
        if let Some(cov) = ae.coverage {
            row("ae", "coverage", fmt(cov));
        }
    }
    for (i, w) in report.warnings.iter().enumerate() {
        row(
            "warning",
            &(i + 1).to_string(),
            format!("\"{}\"", w.replace('"', "'")),
        );
    }
    out
}

/// Static summary figure: per-camera IDF1 bars (plus the multi-camera bar)
/// and an IDP-versus-IDR scatter.
pub fn to_svg(report: &RunReport) -> String {
    let bar_count = report.per_camera.len() + 1;
    let bar_w = 40.0;
    let gap = 24.0;
    let chart_h = 180.0;
    let left = 50.0;
    let top = 30.0;
    let width = (left + (bar_w + gap) * bar_count as f64 + 320.0).max(640.0);
    let height = top + chart_h + 60.0;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{left}\" y=\"18\" font-size=\"13\">IDF1 by camera (%)</text>\n"
    ));

    let mut bars: Vec<(String, f64)> = vec![("multi".to_string(), report.multi.idf1)];
    for cam in &report.per_camera {
        bars.push((format!("cam{}", cam.camera), cam.measures.idf1));
    }
    for (i, (label, idf1)) in bars.iter().enumerate() {
        let x = left + (bar_w + gap) * i as f64;
        let h = chart_h * idf1 / 100.0;
        let y = top + chart_h - h;
        svg.push_str(&format!(
            "  <rect class=\"bar\" x=\"{x:.1}\" y=\"{y:.1}\" width=\"{bar_w:.1}\" height=\"{h:.1}\" fill=\"#e8902a\"/>\n"
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"middle\">{label}</text>\n",
            x + bar_w / 2.0,
            top + chart_h + 14.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
            x + bar_w / 2.0,
            y - 4.0,
            fmt_short(*idf1)
        ));
    }

    // IDP-vs-IDR scatter to the right of the bars.
    let sc_left = left + (bar_w + gap) * bars.len() as f64 + 60.0;
    let sc_size = chart_h;
    svg.push_str(&format!(
        "  <text x=\"{sc_left}\" y=\"18\" font-size=\"13\">IDP vs IDR (%)</text>\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"{sc_left:.1}\" y=\"{top:.1}\" width=\"{sc_size:.1}\" height=\"{sc_size:.1}\" fill=\"none\" stroke=\"#888\"/>\n"
    ));
    let mut points: Vec<(String, f64, f64)> =
        vec![("multi".to_string(), report.multi.idr, report.multi.idp)];
    for cam in &report.per_camera {
        points.push((
            format!("cam{}", cam.camera),
            cam.measures.idr,
            cam.measures.idp,
        ));
    }
    for (label, idr, idp) in &points {
        let x = sc_left + sc_size * idr / 100.0;
        let y = top + sc_size * (1.0 - idp / 100.0);
        svg.push_str(&format!(
            "  <circle class=\"pt\" cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"4\" fill=\"#2a6fe8\"/>\n"
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"9\">{label}</text>\n",
            x + 6.0,
            y + 3.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn fmt_short(v: f64) -> String {
    format!("{v:.1}")
}

/// Writes the requested formats as `report.<ext>` under `dir`, returning the
/// paths written.
pub fn write_report(
    report: &RunReport,
    dir: &Path,
    formats: &[Format],
) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for format in formats {
        let (name, body) = match format {
            Format::Json => ("report.json", to_json(report)),
            Format::Csv => ("report.csv", to_csv(report)),
            Format::Svg => ("report.svg", to_svg(report)),
        };
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
