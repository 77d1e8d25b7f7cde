//! Run configuration files: key-value text mapping onto the simulator
//! options and output settings.
//!
//! ```text
//! scenario <path>        # relative paths resolve against the config file
//! seed <n>               # mandatory; runs take no entropy from the clock
//! out <dir>              # default "out"
//! format json,csv,svg    # default json
//! capacity <n>           # global database capacity, default 1024
//! latency <ticks>        # overrides the scenario's channel latency
//! jitter <ticks>         # overrides the scenario's channel jitter
//! measurements <path>    # optional fps/watts/accuracy file for scoring
//! theta_key <n>          theta_conf <f>   theta_euc <f>   beta_euc <f>
//! theta_iou <f>          life_max <n>     predict_horizon <n>   history_len <n>
//! ```

use std::path::{Path, PathBuf};

use reidsim_core::report::Format;
use reidsim_core::sim::SimOptions;
use reidsim_core::SystemParams;

#[derive(Debug)]
pub struct RunConfig {
    pub scenario: PathBuf,
    pub options: SimOptions,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
    pub measurements: Option<PathBuf>,
}

pub fn load_run_config(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_run_config(&text, base)
}

pub fn parse_run_config(text: &str, base: &Path) -> Result<RunConfig, String> {
    let mut scenario: Option<PathBuf> = None;
    let mut seed: Option<u64> = None;
    let mut out_dir = PathBuf::from("out");
    let mut formats = vec![Format::Json];
    let mut measurements = None;
    let mut params = SystemParams::default();
    let mut capacity = 1024usize;
    let mut latency = None;
    let mut jitter = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| format!("line {line_no}: expected '<key> <value>'"))?;
        let value = value.trim();
        let parse = |what: &str| -> Result<f64, String> {
            value
                .parse()
                .map_err(|_| format!("line {line_no}: bad {what} '{value}'"))
        };
        let parse_int = |what: &str| -> Result<u64, String> {
            value
                .parse()
                .map_err(|_| format!("line {line_no}: bad {what} '{value}'"))
        };
        match key {
            "scenario" => scenario = Some(base.join(value)),
            "seed" => seed = Some(parse_int("seed")?),
            "out" => out_dir = base.join(value),
            "format" => {
                formats = value
                    .split(',')
                    .map(|f| {
                        f.parse::<Format>()
                            .map_err(|e| format!("line {line_no}: {e}"))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
            }
            "measurements" => measurements = Some(base.join(value)),
            "capacity" => capacity = parse_int("capacity")? as usize,
            "latency" => latency = Some(parse_int("latency")?),
            "jitter" => jitter = Some(parse_int("jitter")?),
            "theta_key" => params.theta_key = parse_int("theta_key")? as usize,
            "theta_conf" => params.theta_conf = parse("theta_conf")?,
            "theta_euc" => params.theta_euc = parse("theta_euc")?,
            "beta_euc" => params.beta_euc = parse("beta_euc")?,
            "theta_iou" => params.theta_iou = parse("theta_iou")?,
            "life_max" => params.life_max = parse_int("life_max")? as u32,
            "predict_horizon" => params.predict_horizon = parse_int("predict_horizon")? as usize,
            "history_len" => params.history_len = parse_int("history_len")? as usize,
            other => return Err(format!("line {line_no}: unknown key '{other}'")),
        }
    }

    let scenario = scenario.ok_or("config is missing the 'scenario' key")?;
    let seed = seed.ok_or("config is missing the mandatory 'seed' key")?;
    params.validate().map_err(|e| e.to_string())?;

    Ok(RunConfig {
        scenario,
        options: SimOptions {
            params,
            capacity,
            seed,
            latency_override: latency,
            jitter_override: jitter,
            audit_privacy: false,
        },
        out_dir,
        formats,
        measurements,
    })
}
