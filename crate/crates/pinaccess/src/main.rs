//! Command-line front end.
//!
//! Exit codes: 0 when the library verifies cleanly, 2 when violations
//! were found, 1 for configuration or tool failures.

use clap::Parser;
use pinaccess::pipeline::{run, RunConfig};
use pinaccess::techlib::Scale;
use pinaccess::testgen::{Connectivity, Method, Mode};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "pinaccess",
    about = "Detect pin-accessibility problems in standard-cell libraries by routing hostile abutment testcells and attributing DRC violations per cell"
)]
struct Cli {
    /// Library file to verify
    #[arg(long)]
    lib: Option<PathBuf>,
    /// Testcell generation method: conventional | synopsys | proposed
    #[arg(long)]
    method: Option<String>,
    /// Verification mode: single_cell_only | cell_by_cell_only |
    /// all_combo_in_one_cell_only | all
    #[arg(long)]
    mode: Option<String>,
    /// Pin connectivity strategy: aligned | random
    #[arg(long)]
    connectivity: Option<String>,
    /// Run seed (falls back to PINACCESS_SEED, then 1)
    #[arg(long)]
    seed: Option<u64>,
    /// Random power-strap blockage: on | off
    #[arg(long)]
    straps: Option<String>,
    /// Rule margin factor, e.g. 1.25 or 5/4
    #[arg(long = "margin-scale")]
    margin_scale: Option<String>,
    /// Worker pool size for per-testcell parallelism
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// DRC rule name to suppress (repeatable)
    #[arg(long = "ignore-rule")]
    ignore_rule: Vec<String>,
    /// Key = value config file; flags given on the command line win
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_scale(s: &str) -> Result<Scale, String> {
    let bad = || format!("invalid margin scale `{s}`");
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| bad())?;
        let den: i64 = den.trim().parse().map_err(|_| bad())?;
        if den <= 0 {
            return Err(bad());
        }
        return Ok(Scale::new(num, den));
    }
    match s.split_once('.') {
        None => {
            let v: i64 = s.trim().parse().map_err(|_| bad())?;
            Ok(Scale::from_integer(v))
        }
        Some((whole, frac)) => {
            let whole: i64 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
            if frac.is_empty() || frac.len() > 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let den = 10i64.pow(frac.len() as u32);
            let num: i64 = frac.parse().map_err(|_| bad())?;
            Ok(Scale::new(whole * den + num, den))
        }
    }
}

fn parse_config_file(path: &PathBuf) -> Result<BTreeMap<String, Vec<String>>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("{}:{}: expected key = value", path.display(), idx + 1));
        };
        out.entry(key.trim().to_string()).or_default().push(value.trim().to_string());
    }
    Ok(out)
}

fn build_config(cli: &Cli) -> Result<RunConfig, String> {
    let file = match &cli.config {
        Some(path) => parse_config_file(path)?,
        None => BTreeMap::new(),
    };
    let file_one = |key: &str| file.get(key).and_then(|v| v.last()).cloned();

    let lib = cli
        .lib
        .clone()
        .or_else(|| file_one("lib").map(PathBuf::from))
        .ok_or_else(|| "missing --lib".to_string())?;
    let out = cli
        .out
        .clone()
        .or_else(|| file_one("out").map(PathBuf::from))
        .ok_or_else(|| "missing --out".to_string())?;

    let mut config = RunConfig::new(lib, out);

    if let Some(m) = cli.method.clone().or_else(|| file_one("method")) {
        config.method = Method::parse(&m).ok_or_else(|| format!("unknown method `{m}`"))?;
    }
    if let Some(m) = cli.mode.clone().or_else(|| file_one("mode")) {
        config.mode = Mode::parse(&m).ok_or_else(|| format!("unknown mode `{m}`"))?;
    }
    if let Some(c) = cli.connectivity.clone().or_else(|| file_one("connectivity")) {
        config.connectivity = Connectivity::parse(&c).ok_or_else(|| format!("unknown connectivity `{c}`"))?;
    }
    let env_seed = std::env::var("PINACCESS_SEED").ok().and_then(|s| s.parse().ok());
    if let Some(s) = cli
        .seed
        .or_else(|| file_one("seed").and_then(|s| s.parse().ok()))
        .or(env_seed)
    {
        config.seed = s;
    }
    if let Some(s) = cli.straps.clone().or_else(|| file_one("straps")) {
        config.straps = match s.as_str() {
            "on" => true,
            "off" => false,
            other => return Err(format!("straps must be on or off, got `{other}`")),
        };
    }
    if let Some(m) = cli.margin_scale.clone().or_else(|| file_one("margin-scale")) {
        config.margin_scale = parse_scale(&m)?;
    }
    if let Some(w) = cli.workers.or_else(|| file_one("workers").and_then(|s| s.parse().ok())) {
        config.workers = w;
    }
    config.ignore_rules = if cli.ignore_rule.is_empty() {
        file.get("ignore-rule").cloned().unwrap_or_default()
    } else {
        cli.ignore_rule.clone()
    };
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("pinaccess: {msg}");
            return ExitCode::from(1);
        }
    };
    match run(&config) {
        Ok(outcome) => {
            if let Some(warning) = &outcome.warning {
                eprintln!("pinaccess: warning: {warning}");
            }
            let m = &outcome.summary.metrics;
            println!(
                "{} testcells, {} cells with violations, {} bytes written, {:.3}s",
                outcome.summary.testcells.len(),
                m.cells_with_violations,
                m.output_bytes,
                m.wall_time_seconds
            );
            println!("report: {}", config.out_dir.join("summary.txt").display());
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(err) => {
            eprintln!("pinaccess: {err}");
            ExitCode::from(1)
        }
    }
}
