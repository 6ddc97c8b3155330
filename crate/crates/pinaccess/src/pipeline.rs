//! End-to-end run orchestration: profile the library, enumerate
//! testcells, assign connectivity, emit netlist/placement files, plan
//! straps, route, check, attribute, and report. Testcells are processed
//! by a bounded worker pool over immutable inputs; results are merged in
//! enumeration order so output bytes do not depend on the worker count.

use crate::drc::{self, IgnoreSet};
use crate::formats::{emit_def, emit_verilog};
use crate::geom::Dbu;
use crate::report::{self, RunSummary, TestcellResult};
use crate::router::{build_grid, extract_connectivity, plan_straps, route, RouterConfig};
use crate::seed;
use crate::techlib::{
    parse_library, profile_library, scale_rules, serialize_library, CellMaster, LibraryProfile, Scale,
    TechRules, L_M2,
};
use crate::testgen::{assign_connectivity, enumerate_testcells, Connectivity, Method, Mode, TestcellSpec};
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Library(#[from] crate::techlib::LibraryError),
    #[error(transparent)]
    Testgen(#[from] crate::testgen::TestgenError),
    #[error(transparent)]
    Format(#[from] crate::formats::FormatError),
    #[error(transparent)]
    Route(#[from] crate::router::RouteError),
    #[error(transparent)]
    Drc(#[from] crate::drc::DrcError),
    #[error(transparent)]
    Report(#[from] crate::report::ReportError),
    #[error("io {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("internal check failed: {0}")]
    Internal(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

/// Full run configuration. Flags override a config file, which overrides
/// these defaults.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub library_path: PathBuf,
    pub method: Method,
    pub mode: Mode,
    pub connectivity: Connectivity,
    pub seed: u64,
    pub straps: bool,
    pub margin_scale: Scale,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub ignore_rules: Vec<String>,
}

impl RunConfig {
    pub fn new(library_path: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            library_path: library_path.into(),
            method: Method::Proposed,
            mode: Mode::All,
            connectivity: Connectivity::Random,
            seed: 1,
            straps: false,
            margin_scale: Scale::from_integer(1),
            workers: 1,
            out_dir: out_dir.into(),
            ignore_rules: Vec::new(),
        }
    }

    fn validate(&self) -> Result<(), PipelineError> {
        if self.workers < 1 {
            return Err(PipelineError::Config("workers must be at least 1".into()));
        }
        if self.margin_scale < Scale::from_integer(1) {
            return Err(PipelineError::Config("margin scale must be at least 1".into()));
        }
        Ok(())
    }

    fn fingerprint(&self) -> String {
        format!(
            "method={:?};mode={:?};connectivity={:?};seed={};straps={};margin={};ignore={}",
            self.method,
            self.mode,
            self.connectivity,
            self.seed,
            self.straps,
            self.margin_scale,
            self.ignore_rules.join("|"),
        )
    }
}

/// Outcome of a finished run.
#[derive(Debug)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub violations_found: bool,
    pub warning: Option<String>,
}

impl RunOutcome {
    /// 0 when clean, 2 when violations were found. Tool errors exit 1
    /// before an outcome exists.
    pub fn exit_code(&self) -> i32 {
        if self.violations_found {
            2
        } else {
            0
        }
    }
}

struct Processed {
    id: String,
    verilog: String,
    def: String,
    route_dump: String,
    result: TestcellResult,
    attributions: Vec<(String, usize)>,
}

fn process_testcell(
    spec: &TestcellSpec,
    profile: &LibraryProfile,
    scaled: &TechRules,
    ignore: &IgnoreSet,
    config: &RunConfig,
) -> Result<Processed, PipelineError> {
    let connected = assign_connectivity(spec, profile, config.connectivity, config.seed)?;
    let verilog = emit_verilog(&connected, profile)?;
    let def = emit_def(&connected);

    let strap_seed = seed::sub_seed(config.seed, &format!("straps:{}", spec.id));
    let straps = plan_straps(connected.die_area, &profile.rules, strap_seed, config.straps);
    let grid = build_grid(&connected, profile, &straps)?;
    let router_config = RouterConfig { max_iterations: 20, worker_count: config.workers };
    let db = route(&connected, &grid, &profile.rules, &router_config);

    // independent connectivity oracle must agree with the router on
    // every run
    let verdicts = extract_connectivity(&db, &profile.rules);
    for (net, verdict) in db.nets.iter().zip(&verdicts) {
        if net.status != verdict.status {
            return Err(PipelineError::Internal(format!(
                "router and extractor disagree on {}/{}: {} vs {}",
                spec.id,
                net.name,
                net.status.as_str(),
                verdict.status.as_str()
            )));
        }
    }

    let mut violations = drc::check_drc(&connected, &db, profile, scaled, ignore);
    violations.extend(drc::connectivity_violations(&db, &verdicts, scaled, ignore));
    let halo = profile.rules.layer(L_M2).pitch;
    let violations = drc::attribute(violations, &connected, profile, halo);

    let mut attribution_counts: BTreeMap<String, usize> = BTreeMap::new();
    for v in &violations {
        for m in &v.masters {
            *attribution_counts.entry(m.clone()).or_default() += 1;
        }
    }
    Ok(Processed {
        id: spec.id.clone(),
        verilog,
        def,
        route_dump: db.dump(),
        result: TestcellResult::from_violations(&spec.id, &violations),
        attributions: attribution_counts.into_iter().collect(),
    })
}

/// Work split for an incremental run.
#[derive(Debug, PartialEq, Eq)]
pub struct WorkPlan {
    pub run: BTreeSet<String>,
    pub carry: BTreeSet<String>,
}

/// Decide which testcells need regeneration: everything whose input
/// hash differs from the previous manifest, plus everything new. With no
/// previous manifest, the full set runs.
pub fn incremental_scope(current: &[(String, u64)], previous: Option<&[(String, u64)]>) -> WorkPlan {
    let mut plan = WorkPlan { run: BTreeSet::new(), carry: BTreeSet::new() };
    let prev: BTreeMap<&str, u64> = previous
        .map(|m| m.iter().map(|(id, h)| (id.as_str(), *h)).collect())
        .unwrap_or_default();
    for (id, hash) in current {
        if prev.get(id.as_str()) == Some(hash) {
            plan.carry.insert(id.clone());
        } else {
            plan.run.insert(id.clone());
        }
    }
    plan
}

/// Hash of everything that feeds one testcell: the rule deck, the full
/// definitions of the masters it places, and the run options.
pub fn testcell_input_hash(
    spec: &TestcellSpec,
    rules: &TechRules,
    cells: &[CellMaster],
    fingerprint: &str,
) -> u64 {
    let mut masters: BTreeSet<&str> = spec.instances.iter().map(|p| p.master.as_str()).collect();
    let referenced: Vec<CellMaster> = cells
        .iter()
        .filter(|c| masters.remove(c.name.as_str()))
        .cloned()
        .collect();
    let text = format!(
        "{}\n{}\n{}\n{}",
        spec.id,
        fingerprint,
        serialize_library(rules, &referenced),
        spec.instances.len()
    );
    seed::fnv1a64(text.as_bytes())
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    std::fs::write(path, contents).map_err(io_err(path))
}

fn read_manifest(path: &Path) -> Option<Vec<(String, u64)>> {
    let text = std::fs::read_to_string(path).ok()?;
    let mut lines = text.lines();
    if lines.next()? != "testcell_id,input_hash" {
        return None;
    }
    let mut out = Vec::new();
    for line in lines {
        let (id, hash) = line.split_once(',')?;
        let hash = u64::from_str_radix(hash, 16).ok()?;
        out.push((id.to_string(), hash));
    }
    Some(out)
}

fn read_summary_rows(path: &Path) -> Option<BTreeMap<String, TestcellResult>> {
    let text = std::fs::read_to_string(path).ok()?;
    let mut lines = text.lines();
    if lines.next()? != "testcell_id,drc_count,masters,types" {
        return None;
    }
    let mut out = BTreeMap::new();
    for line in lines {
        let fields: Vec<&str> = line.splitn(4, ',').collect();
        if fields.len() != 4 {
            return None;
        }
        let split = |s: &str| -> Vec<String> {
            if s.is_empty() {
                Vec::new()
            } else {
                s.split(';').map(|x| x.to_string()).collect()
            }
        };
        out.insert(
            fields[0].to_string(),
            TestcellResult {
                id: fields[0].to_string(),
                drc_count: fields[1].parse().ok()?,
                masters: split(fields[2]),
                types: split(fields[3]),
            },
        );
    }
    Some(out)
}

fn read_attributions(path: &Path) -> Option<BTreeMap<String, Vec<(String, usize)>>> {
    let text = std::fs::read_to_string(path).ok()?;
    let mut lines = text.lines();
    if lines.next()? != "testcell_id,master,count" {
        return None;
    }
    let mut out: BTreeMap<String, Vec<(String, usize)>> = BTreeMap::new();
    for line in lines {
        let fields: Vec<&str> = line.splitn(3, ',').collect();
        if fields.len() != 3 {
            return None;
        }
        out.entry(fields[0].to_string())
            .or_default()
            .push((fields[1].to_string(), fields[2].parse().ok()?));
    }
    Some(out)
}

/// Run the whole pipeline on an already-parsed library.
pub fn run_pipeline(
    rules: &TechRules,
    cells: &[CellMaster],
    config: &RunConfig,
) -> Result<RunOutcome, PipelineError> {
    let started = std::time::Instant::now();
    config.validate()?;
    let ignore = IgnoreSet::parse(&config.ignore_rules)?;
    let scaled = scale_rules(rules, config.margin_scale)?;
    let profile = profile_library(rules, cells)?;
    let specs = enumerate_testcells(&profile, config.method, config.mode)?;

    std::fs::create_dir_all(&config.out_dir).map_err(io_err(&config.out_dir))?;

    let fingerprint = config.fingerprint();
    let hashes: Vec<(String, u64)> = specs
        .iter()
        .map(|s| (s.id.clone(), testcell_input_hash(s, rules, cells, &fingerprint)))
        .collect();

    let manifest_path = config.out_dir.join("manifest.csv");
    let mut warning = None;
    let previous = if manifest_path.exists() {
        match read_manifest(&manifest_path) {
            Some(m) => Some(m),
            None => {
                warning = Some("manifest.csv is corrupt; rerunning the full set".to_string());
                None
            }
        }
    } else {
        None
    };
    let mut plan = incremental_scope(&hashes, previous.as_deref());

    // carrying a testcell forward needs its previous report row and its
    // artifacts on disk
    let prev_rows = read_summary_rows(&config.out_dir.join("summary.csv")).unwrap_or_default();
    let prev_attr = read_attributions(&config.out_dir.join("attribution.csv")).unwrap_or_default();
    let carried: Vec<String> = plan.carry.iter().cloned().collect();
    for id in carried {
        let complete = prev_rows.contains_key(&id)
            && prev_attr.contains_key(&id)
            && ["v", "def", "route"]
                .iter()
                .all(|ext| config.out_dir.join(format!("{id}.{ext}")).exists());
        if !complete {
            plan.carry.remove(&id);
            plan.run.insert(id);
        }
    }

    let to_run: Vec<&TestcellSpec> = specs.iter().filter(|s| plan.run.contains(&s.id)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| PipelineError::Config(format!("worker pool: {e}")))?;
    let processed: Vec<Result<Processed, PipelineError>> = pool.install(|| {
        use rayon::prelude::*;
        to_run
            .par_iter()
            .map(|spec| process_testcell(spec, &profile, &scaled, &ignore, config))
            .collect()
    });
    let mut fresh: BTreeMap<String, Processed> = BTreeMap::new();
    for p in processed {
        let p = p?;
        fresh.insert(p.id.clone(), p);
    }

    // write artifacts for fresh testcells
    for p in fresh.values() {
        write_file(&config.out_dir.join(format!("{}.v", p.id)), &p.verilog)?;
        write_file(&config.out_dir.join(format!("{}.def", p.id)), &p.def)?;
        write_file(&config.out_dir.join(format!("{}.route", p.id)), &p.route_dump)?;
    }

    // merge results in enumeration order
    let mut results: Vec<TestcellResult> = Vec::with_capacity(specs.len());
    let mut attributions: Vec<(String, usize)> = Vec::new();
    for spec in &specs {
        if let Some(p) = fresh.get(&spec.id) {
            results.push(p.result.clone());
            attributions.extend(p.attributions.iter().cloned());
        } else {
            results.push(prev_rows[&spec.id].clone());
            attributions.extend(prev_attr[&spec.id].iter().cloned());
        }
    }

    let mut output_bytes = 0u64;
    for spec in &specs {
        for ext in ["v", "def", "route"] {
            let path = config.out_dir.join(format!("{}.{ext}", spec.id));
            output_bytes += std::fs::metadata(&path).map_err(io_err(&path))?.len();
        }
    }

    let wall = started.elapsed().as_secs_f64();
    let summary = report::collect_metrics(&results, &attributions, &profile, wall, output_bytes);

    write_file(&config.out_dir.join("summary.txt"), &report::render_summary(&results))?;

    let mut csv = String::from("testcell_id,drc_count,masters,types\n");
    for r in &results {
        csv.push_str(&format!("{},{},{},{}\n", r.id, r.drc_count, r.masters.join(";"), r.types.join(";")));
    }
    write_file(&config.out_dir.join("summary.csv"), &csv)?;

    let mut attr_csv = String::from("testcell_id,master,count\n");
    for spec in &specs {
        let list: &[(String, usize)] = match fresh.get(&spec.id) {
            Some(p) => &p.attributions,
            None => &prev_attr[&spec.id],
        };
        for (master, count) in list {
            attr_csv.push_str(&format!("{},{},{}\n", spec.id, master, count));
        }
    }
    write_file(&config.out_dir.join("attribution.csv"), &attr_csv)?;

    let hist = report::width_histogram(&profile, 1)?;
    let mut hist_csv = String::from("bucket,fraction\n");
    for (bucket, fraction) in hist {
        hist_csv.push_str(&format!("{bucket},{fraction}\n"));
    }
    write_file(&config.out_dir.join("histogram.csv"), &hist_csv)?;

    let m = &summary.metrics;
    let metrics_csv = format!(
        "metric,value\nwall_time_seconds,{:.3}\noutput_bytes,{}\ncells_with_violations,{}\n",
        m.wall_time_seconds, m.output_bytes, m.cells_with_violations
    );
    write_file(&config.out_dir.join("metrics.csv"), &metrics_csv)?;

    let mut manifest_csv = String::from("testcell_id,input_hash\n");
    for (id, hash) in &hashes {
        manifest_csv.push_str(&format!("{id},{hash:016x}\n"));
    }
    write_file(&manifest_path, &manifest_csv)?;

    let violations_found = results.iter().any(|r| r.drc_count > 0);
    Ok(RunOutcome { summary, violations_found, warning })
}

/// File-based entry point: parse the library, then run.
pub fn run(config: &RunConfig) -> Result<RunOutcome, PipelineError> {
    let text = std::fs::read_to_string(&config.library_path).map_err(io_err(&config.library_path))?;
    let (rules, cells) = parse_library(&text)?;
    run_pipeline(&rules, &cells, config)
}

/// Default attribution halo: one horizontal-layer pitch.
pub fn default_halo(rules: &TechRules) -> Dbu {
    rules.layer(L_M2).pitch
}
