//! Command-line harness for the tracking simulator.
//!
//! Subcommands: `run` executes a scripted scenario end to end and emits
//! reports; `metrics` scores a hypothesis track file against ground truth;
//! `reid-eval` computes ranked re-identification metrics over gallery/query
//! files; `ae` combines accuracy and efficiency measurements into a score.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation error,
//! 3 invariant violation.

mod config;
mod reid_files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use reidsim_core::metrics::ae::{ae_block, load_ae_input, AeInput};
use reidsim_core::metrics::ident::load_trackset;
use reidsim_core::metrics::{cmc, id_measures, id_measures_per_camera, mean_average_precision};
use reidsim_core::report::{write_report, Format};
use reidsim_core::scenario::load_scenario;
use reidsim_core::sim::{audit_decodes_cleanly, latency_independence, run_sim};

#[derive(Parser)]
#[command(
    name = "reidsim",
    version,
    about = "Multi-camera re-identification simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario under a deterministic logical clock and emit reports.
    Run {
        /// Run configuration file (key-value text).
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated report formats (csv, json, svg).
        #[arg(long, value_delimiter = ',')]
        format: Option<Vec<String>>,
        /// Capture all channel traffic, dump it, and verify the schema.
        #[arg(long)]
        audit_privacy: bool,
        /// Run the scenario at latency 0 and 10^6 and require identical
        /// local assignments.
        #[arg(long)]
        self_test_latency: bool,
    },
    /// Score a hypothesis track file against a truth track file.
    Metrics {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        hyp: PathBuf,
        /// Association IoU threshold.
        #[arg(long, default_value_t = 0.3)]
        iou_threshold: f64,
    },
    /// Ranked re-identification metrics over gallery and query files.
    ReidEval {
        #[arg(long)]
        gallery: PathBuf,
        #[arg(long)]
        query: PathBuf,
        /// Rank for the cumulative match characteristic.
        #[arg(long, default_value_t = 1)]
        rank: usize,
        /// Exclude same-camera, same-identity gallery items per query.
        #[arg(long)]
        exclude_same_camera: bool,
    },
    /// Accuracy-times-efficiency scoring from measurements.
    Ae {
        #[arg(long)]
        fps: f64,
        #[arg(long)]
        watts: f64,
        /// Accuracy percentage (typically IDF1).
        #[arg(long)]
        accuracy: f64,
        /// Measurement file with coverage components.
        #[arg(long)]
        coverage: Option<PathBuf>,
    },
}

enum CliError {
    Validation(String),
    Invariant(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Invariant(m) => m,
        }
    }
}

fn validation(e: impl ToString) -> CliError {
    CliError::Validation(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run {
            config,
            out,
            format,
            audit_privacy,
            self_test_latency,
        } => cmd_run(config, out, format, audit_privacy, self_test_latency),
        Command::Metrics {
            truth,
            hyp,
            iou_threshold,
        } => cmd_metrics(truth, hyp, iou_threshold),
        Command::ReidEval {
            gallery,
            query,
            rank,
            exclude_same_camera,
        } => cmd_reid_eval(gallery, query, rank, exclude_same_camera),
        Command::Ae {
            fps,
            watts,
            accuracy,
            coverage,
        } => cmd_ae(fps, watts, accuracy, coverage),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn cmd_run(
    config_path: PathBuf,
    out: Option<PathBuf>,
    format: Option<Vec<String>>,
    audit_privacy: bool,
    self_test_latency: bool,
) -> Result<(), CliError> {
    let mut config = config::load_run_config(&config_path).map_err(CliError::Validation)?;
    if let Some(out) = out {
        config.out_dir = out;
    }
    if let Some(formats) = format {
        config.formats = formats
            .iter()
            .map(|f| f.parse::<Format>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(validation)?;
    }
    config.options.audit_privacy = audit_privacy;

    let scenario = load_scenario(&config.scenario).map_err(validation)?;

    let ae = match &config.measurements {
        Some(path) => {
            let input: AeInput = load_ae_input(path).map_err(validation)?;
            Some(ae_block(&input).map_err(validation)?)
        }
        None => None,
    };

    let mut latency_ok = true;
    if self_test_latency {
        let check = latency_independence(&scenario, &config.options).map_err(validation)?;
        latency_ok = check.independent;
        println!(
            "latency self-test: {} ({} mismatched frames)",
            if check.independent {
                "independent"
            } else {
                "DEPENDENT"
            },
            check.mismatched_frames
        );
    }

    let mut output = run_sim(&scenario, &config.options).map_err(validation)?;
    output.report.ae = ae;

    let written =
        write_report(&output.report, &config.out_dir, &config.formats).map_err(validation)?;
    for path in &written {
        println!("wrote {}", path.display());
    }

    if let Some(frames) = &output.audit_frames {
        let mut blob = Vec::new();
        for frame in frames {
            blob.extend_from_slice(frame);
        }
        let audit_path = config.out_dir.join("audit.bin");
        std::fs::write(&audit_path, &blob).map_err(validation)?;
        match audit_decodes_cleanly(frames) {
            Ok(n) => println!(
                "privacy audit: {} frames, {} bytes, all decode to schema variants",
                n,
                blob.len()
            ),
            Err(e) => {
                return Err(CliError::Invariant(format!(
                    "privacy audit failed: channel bytes do not decode ({e})"
                )))
            }
        }
        println!("wrote {}", audit_path.display());
    }

    let r = &output.report;
    println!(
        "multi-camera: IDP {:.2} IDR {:.2} IDF1 {:.2}",
        r.multi.idp, r.multi.idr, r.multi.idf1
    );
    println!(
        "id switches: {}; ownership violations: {}; global identities: {}",
        r.id_switches, r.ownership_violations, r.global_identities_created
    );
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }

    if !latency_ok {
        return Err(CliError::Invariant(
            "latency self-test found dependent assignments".into(),
        ));
    }
    if r.invariant_violations() > 0 {
        return Err(CliError::Invariant(format!(
            "{} invariant violations recorded in the report",
            r.invariant_violations()
        )));
    }
    Ok(())
}

fn cmd_metrics(truth: PathBuf, hyp: PathBuf, iou_threshold: f64) -> Result<(), CliError> {
    let truth = load_trackset(&truth).map_err(validation)?;
    let hyp = load_trackset(&hyp).map_err(validation)?;
    let multi = id_measures(&truth, &hyp, iou_threshold);
    println!(
        "multi IDP {:.4} IDR {:.4} IDF1 {:.4} (IDTP {} IDFP {} IDFN {})",
        multi.idp, multi.idr, multi.idf1, multi.idtp, multi.idfp, multi.idfn
    );
    for (camera, m) in id_measures_per_camera(&truth, &hyp, iou_threshold) {
        println!(
            "camera {camera} IDP {:.4} IDR {:.4} IDF1 {:.4} (IDTP {} IDFP {} IDFN {})",
            m.idp, m.idr, m.idf1, m.idtp, m.idfp, m.idfn
        );
    }
    Ok(())
}

fn cmd_reid_eval(
    gallery: PathBuf,
    query: PathBuf,
    rank: usize,
    exclude_same_camera: bool,
) -> Result<(), CliError> {
    let gallery = reid_files::load_reid_samples(&gallery).map_err(CliError::Validation)?;
    let query = reid_files::load_reid_samples(&query).map_err(CliError::Validation)?;
    let cmc_r = cmc(&gallery, &query, rank, exclude_same_camera).map_err(validation)?;
    let map = mean_average_precision(&gallery, &query).map_err(validation)?;
    println!("CMC({rank}) {cmc_r:.4}");
    println!("mAP {map:.4}");
    Ok(())
}

fn cmd_ae(fps: f64, watts: f64, accuracy: f64, coverage: Option<PathBuf>) -> Result<(), CliError> {
    let components = match &coverage {
        Some(path) => load_ae_input(path).map_err(validation)?.components,
        None => Vec::new(),
    };
    let input = AeInput {
        accuracy,
        fps,
        watts,
        components,
    };
    let block = ae_block(&input).map_err(validation)?;
    println!("efficiency {:.4} FPS/W", block.efficiency);
    println!("mark {:.4}", block.mark);
    if let Some(cov) = block.coverage {
        println!("coverage {cov:.4}%");
    }
    Ok(())
}
