//! The pipeline stages. Each reads its upstream artifacts from the output directory,
//! writes its own under `<out>/<stage>/` and records a manifest.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use avfrontier::frontier::{
    self, convex_hull_frontier, fit_frontier, headroom_report, pareto_report, pareto_set, HeadroomMode, RunSummary,
};
use avfrontier::ingest::{self, derive_kinematics, pixel_to_meter};
use avfrontier::metrics::{self, compute_metrics, Dataset, ModelEncoding};
use avfrontier::objectives::{self, build_objectives, ObjectiveVector};
use avfrontier::synth::{synthetic_datasets, write_raw_table, SynthConfig};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::{sha256_file, sha256_hex, StageManifest};
use crate::report::{histogram_specs, valid_values, Histogram};

pub const STAGES: [&str; 5] = ["ingest", "metrics", "objectives", "pareto", "report"];

pub const METRICS_FILE: &str = "metrics/metrics.csv";
pub const OBJECTIVES_FILE: &str = "objectives/objectives.csv";
pub const SUMMARY_FILE: &str = "pareto/summary.json";
pub const LATTICE_FILE: &str = "pareto/lattice.csv";

pub fn frames_file(name: &str) -> String {
    format!("ingest/frames_{name}.csv")
}

/// Running context shared by the stages.
pub struct Run<'a> {
    pub cfg: &'a RunConfig,
    pub out: PathBuf,
    config_digest: String,
}

impl<'a> Run<'a> {
    pub fn new(cfg: &'a RunConfig) -> Self {
        let mut hashed = cfg.clone();
        hashed.out_dir = PathBuf::new();
        Self { cfg, out: cfg.out_dir.clone(), config_digest: sha256_hex(hashed.canonical().as_bytes()) }
    }

    fn stage_dir(&self, stage: &'static str) -> Result<PathBuf, CliError> {
        let dir = self.out.join(stage);
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(stage, &dir, e))?;
        Ok(dir)
    }

    fn manifest(&self, stage: &str) -> StageManifest {
        StageManifest::new(stage, &self.config_digest, self.cfg.seed)
    }

    /// Open an upstream artifact, recording its digest; a missing file maps to `missing`.
    fn upstream(
        &self,
        m: &mut StageManifest,
        rel: &str,
        missing: impl FnOnce(PathBuf) -> CliError,
    ) -> Result<Vec<u8>, CliError> {
        let path = self.out.join(rel);
        if !path.is_file() {
            return Err(missing(path));
        }
        let bytes = std::fs::read(&path).map_err(|e| CliError::io("read", &path, e))?;
        m.inputs.insert(rel.to_string(), sha256_hex(&bytes));
        Ok(bytes)
    }

    fn emit(&self, m: &mut StageManifest, stage: &'static str, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.out.join(rel);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(stage, &path, e))?;
        m.outputs.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }
}

fn core(stage: &'static str) -> impl Fn(avfrontier::Error) -> CliError {
    move |e| CliError::from_core(stage, e)
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("serializable");
    v.push(b'\n');
    v
}

fn missing(stage: &'static str, upstream: &'static str) -> impl FnOnce(PathBuf) -> CliError {
    move |path| CliError::MissingUpstream { stage, upstream, path }
}

pub fn cmd_ingest(run: &Run<'_>) -> Result<StageManifest, CliError> {
    const STAGE: &str = "ingest";
    let cfg = run.cfg;
    if cfg.inputs.is_empty() {
        return Err(CliError::Config("no inputs configured".into()));
    }
    run.stage_dir(STAGE)?;
    let mut m = run.manifest(STAGE);
    for input in &cfg.inputs {
        if !input.path.is_file() {
            return Err(CliError::Config(format!("input `{}`: {} does not exist", input.name, input.path.display())));
        }
        let digest = sha256_file(&input.path).map_err(|e| CliError::io(STAGE, &input.path, e))?;
        m.inputs.insert(format!("input:{}", input.name), digest);
        let loaded = ingest::load_trajectories(&input.path, &cfg.ingest.schema, cfg.dt).map_err(core(STAGE))?;
        if loaded.dropped_rows > 0 {
            log::warn!("ingest `{}`: dropped {} malformed rows", input.name, loaded.dropped_rows);
        }
        let mut tracks = loaded.tracks;
        pixel_to_meter(&mut tracks, &cfg.ingest.transform).map_err(core(STAGE))?;
        for t in &mut tracks {
            derive_kinematics(t, cfg.ingest.smoothing.as_ref(), cfg.ingest.kinematics, cfg.dt).map_err(core(STAGE))?;
        }
        let mut buf = Vec::new();
        ingest::write_frames_table(&mut buf, &tracks).map_err(core(STAGE))?;
        run.emit(&mut m, STAGE, &frames_file(&input.name), &buf)?;
    }
    m.write(&run.out.join(STAGE))?;
    Ok(m)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MetricsReport {
    diagnostics: metrics::MetricsDiagnostics,
    frozen_models: bool,
}

pub fn cmd_metrics(run: &Run<'_>) -> Result<StageManifest, CliError> {
    const STAGE: &str = "metrics";
    let cfg = run.cfg;
    let mut m = run.manifest(STAGE);
    let mut datasets = Vec::new();
    for input in &cfg.inputs {
        let bytes = run.upstream(&mut m, &frames_file(&input.name), missing(STAGE, "ingest"))?;
        let tracks = ingest::read_frames_table(&bytes[..], cfg.dt).map_err(core(STAGE))?;
        datasets.push(Dataset { group: input.name.clone(), tracks, topology: input.topology() });
    }
    if datasets.is_empty() {
        return Err(CliError::Config("no inputs configured".into()));
    }
    let frozen = match &cfg.models.frozen {
        Some(path) => {
            let f = File::open(path).map_err(|e| CliError::io(STAGE, path, e))?;
            let digest = sha256_file(path).map_err(|e| CliError::io(STAGE, path, e))?;
            m.inputs.insert("input:frozen_models".into(), digest);
            Some(metrics::read_models(BufReader::new(f)).map_err(core(STAGE))?)
        }
        None => None,
    };
    let out = compute_metrics(&datasets, &cfg.metrics, frozen.as_ref()).map_err(core(STAGE))?;
    run.stage_dir(STAGE)?;

    let mut buf = Vec::new();
    metrics::write_metrics_table(&mut buf, &out.records).map_err(core(STAGE))?;
    run.emit(&mut m, STAGE, METRICS_FILE, &buf)?;
    let mut buf = Vec::new();
    metrics::write_models(&mut buf, &out.models, cfg.models.encoding).map_err(core(STAGE))?;
    let models_file = match cfg.models.encoding {
        ModelEncoding::Json => "metrics/models.json",
        ModelEncoding::Binary => "metrics/models.bin",
    };
    run.emit(&mut m, STAGE, models_file, &buf)?;
    let report = MetricsReport { diagnostics: out.diagnostics, frozen_models: frozen.is_some() };
    run.emit(&mut m, STAGE, "metrics/diagnostics.json", &json_bytes(&report))?;
    m.write(&run.out.join(STAGE))?;
    Ok(m)
}

/// Effect of the neighbour count on the imputed cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnSensitivity {
    pub k: usize,
    pub mean_abs_change: f64,
    pub max_abs_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputationSummary {
    pub n_rows: usize,
    pub dropped_outliers: usize,
    /// Imputed cells per objective (S, E, I).
    pub n_imputed: [usize; 3],
    pub k: usize,
    pub sensitivity: Vec<KnnSensitivity>,
    pub warnings: Vec<String>,
}

fn imputed_cells(v: &[ObjectiveVector]) -> Vec<f64> {
    v.iter().flat_map(|o| (0..3).filter(|&d| o.imputed[d]).map(move |d| o.scores[d].unwrap_or(f64::NAN))).collect()
}

pub fn cmd_objectives(run: &Run<'_>) -> Result<StageManifest, CliError> {
    const STAGE: &str = "objectives";
    let cfg = run.cfg;
    let mut m = run.manifest(STAGE);
    let bytes = run.upstream(&mut m, METRICS_FILE, missing(STAGE, "metrics"))?;
    let records = metrics::read_metrics_table(&bytes[..], cfg.dt).map_err(core(STAGE))?;
    let obj = build_objectives(&records, &cfg.objectives, None).map_err(core(STAGE))?;

    let base = imputed_cells(&obj.vectors);
    let mut sensitivity = Vec::new();
    for k in [1, 3, 10].into_iter().filter(|k| *k != cfg.objectives.knn_k) {
        let alt_cfg = objectives::ObjectivesConfig { knn_k: k, ..cfg.objectives.clone() };
        let Ok(alt) = build_objectives(&records, &alt_cfg, None) else { continue };
        let diffs: Vec<f64> = base.iter().zip(imputed_cells(&alt.vectors)).map(|(a, b)| (a - b).abs()).collect();
        let mean = if diffs.is_empty() { 0.0 } else { diffs.iter().sum::<f64>() / diffs.len() as f64 };
        sensitivity.push(KnnSensitivity {
            k,
            mean_abs_change: mean,
            max_abs_change: diffs.iter().copied().fold(0.0, f64::max),
        });
    }
    let summary = ImputationSummary {
        n_rows: obj.vectors.len(),
        dropped_outliers: obj.dropped_outliers,
        n_imputed: [0, 1, 2].map(|d| obj.vectors.iter().filter(|v| v.imputed[d]).count()),
        k: cfg.objectives.knn_k,
        sensitivity,
        warnings: obj.warnings.clone(),
    };

    run.stage_dir(STAGE)?;
    let mut buf = Vec::new();
    objectives::write_objectives_table(&mut buf, &obj.vectors).map_err(core(STAGE))?;
    run.emit(&mut m, STAGE, OBJECTIVES_FILE, &buf)?;
    let mut buf = Vec::new();
    objectives::write_contexts(&mut buf, &obj.contexts).map_err(core(STAGE))?;
    buf.push(b'\n');
    run.emit(&mut m, STAGE, "objectives/contexts.json", &buf)?;
    run.emit(&mut m, STAGE, "objectives/imputation.json", &json_bytes(&summary))?;
    m.write(&run.out.join(STAGE))?;
    Ok(m)
}

/// Run summary document: the frontier statistics plus the imputation record when the
/// objectives stage left one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDocument {
    #[serde(flatten)]
    pub run: RunSummary,
    pub imputation: Option<ImputationSummary>,
}

pub fn cmd_pareto(run: &Run<'_>) -> Result<(StageManifest, SummaryDocument), CliError> {
    const STAGE: &str = "pareto";
    let cfg = run.cfg;
    let mut m = run.manifest(STAGE);
    let bytes = run.upstream(&mut m, OBJECTIVES_FILE, missing(STAGE, "objectives"))?;
    let vectors = objectives::read_objectives_table(&bytes[..], cfg.dt).map_err(core(STAGE))?;
    let imputation = match run.out.join("objectives/imputation.json").is_file() {
        true => {
            let b = run.upstream(&mut m, "objectives/imputation.json", missing(STAGE, "objectives"))?;
            serde_json::from_slice(&b).ok()
        }
        false => None,
    };
    let points: Vec<[f64; 3]> = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.complete().ok_or_else(|| CliError::Schema {
                stage: STAGE,
                source: avfrontier::Error::Schema(format!("objectives row {} has a missing score", i + 2)),
            })
        })
        .collect::<Result<_, _>>()?;
    if points.is_empty() {
        return Err(CliError::Schema {
            stage: STAGE,
            source: avfrontier::Error::InsufficientData("objectives table is empty".into()),
        });
    }

    let result = pareto_set(&points);
    let pareto_pts: Vec<[f64; 3]> = result.indices.iter().map(|&i| points[i]).collect();
    let mut notices = Vec::new();
    let fcfg = &cfg.pareto.frontier;
    let model = match fit_frontier(&pareto_pts, fcfg) {
        Ok(model) => Some(model),
        Err(e @ (avfrontier::Error::InsufficientData(_) | avfrontier::Error::Fit(_))) => {
            notices.push(format!("frontier skipped: {e}"));
            None
        }
        Err(e) => return Err(CliError::from_core(STAGE, e)),
    };
    let headroom = match (cfg.pareto.headroom, &model) {
        (HeadroomMode::Surface, Some(model)) => {
            headroom_report(&points, &model.surface_points(), HeadroomMode::Surface)
        }
        (HeadroomMode::Surface, None) => {
            notices.push("headroom skipped: no fitted frontier surface".into());
            None
        }
        (HeadroomMode::Set, _) => headroom_report(&points, &pareto_pts, HeadroomMode::Set),
    };
    let hull = cfg.pareto.hull.then(|| convex_hull_frontier(&pareto_pts, fcfg.dependent_axis));
    if hull.as_ref().is_some_and(|h| h.degenerate) {
        notices.push("convex hull degenerate: fewer than four non-coplanar Pareto points".into());
    }
    let summary = SummaryDocument {
        run: pareto_report(&result, model.as_ref(), headroom.as_ref(), hull.as_ref(), notices),
        imputation,
    };

    run.stage_dir(STAGE)?;
    let mut buf = Vec::new();
    frontier::write_pareto_table(&mut buf, &result).map_err(core(STAGE))?;
    run.emit(&mut m, STAGE, "pareto/pareto.csv", &buf)?;
    if let Some(model) = &model {
        let mut buf = Vec::new();
        frontier::write_lattice(&mut buf, model).map_err(core(STAGE))?;
        run.emit(&mut m, STAGE, LATTICE_FILE, &buf)?;
    } else {
        remove_stale(&run.out.join(LATTICE_FILE));
    }
    if let Some(h) = &headroom {
        let mut buf = Vec::new();
        frontier::write_headroom_table(&mut buf, h).map_err(core(STAGE))?;
        run.emit(&mut m, STAGE, "pareto/headroom.csv", &buf)?;
    } else {
        remove_stale(&run.out.join("pareto/headroom.csv"));
    }
    match &hull {
        Some(h) if !h.degenerate => {
            let mut buf = Vec::new();
            frontier::write_hull_facets(&mut buf, h, &pareto_pts, &result.indices).map_err(core(STAGE))?;
            run.emit(&mut m, STAGE, "pareto/hull.csv", &buf)?;
        }
        _ => remove_stale(&run.out.join("pareto/hull.csv")),
    }
    run.emit(&mut m, STAGE, SUMMARY_FILE, &json_bytes(&summary))?;
    m.write(&run.out.join(STAGE))?;
    Ok((m, summary))
}

fn remove_stale(path: &Path) {
    let _ = std::fs::remove_file(path);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramEntry {
    pub metric: String,
    pub column: String,
    pub file: String,
    pub threshold: f64,
    pub n_valid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportIndex {
    pub histograms: Vec<HistogramEntry>,
    pub lattice: Option<String>,
    pub summary: String,
    pub notices: Vec<String>,
}

pub fn cmd_report(run: &Run<'_>) -> Result<(StageManifest, ReportIndex), CliError> {
    const STAGE: &str = "report";
    let cfg = run.cfg;
    let mut m = run.manifest(STAGE);
    let dep = |upstream: &'static str| move |path| CliError::ReportDependency { upstream, path };
    let metrics_bytes = run.upstream(&mut m, METRICS_FILE, dep("metrics"))?;
    let summary_bytes = run.upstream(&mut m, SUMMARY_FILE, dep("pareto"))?;
    let records = metrics::read_metrics_table(&metrics_bytes[..], cfg.dt).map_err(core(STAGE))?;
    run.stage_dir(STAGE)?;

    let mut notices = Vec::new();
    let mut histograms = Vec::new();
    for (metric, column, threshold) in histogram_specs(&cfg.report.thresholds) {
        let file = format!("report/hist_{metric}.csv");
        let values = valid_values(&records, metric);
        let Some(h) = Histogram::build(&values, cfg.report.bins) else {
            notices.push(format!("{metric} histogram omitted: no valid values"));
            remove_stale(&run.out.join(&file));
            continue;
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::from_core(STAGE, e.into());
        w.write_record(["bin_lo", "bin_hi", "count"]).map_err(io)?;
        for k in 0..h.counts.len() {
            w.write_record([h.edges[k].to_string(), h.edges[k + 1].to_string(), h.counts[k].to_string()])
                .map_err(io)?;
        }
        let buf = w.into_inner().map_err(|e| CliError::io(STAGE, Path::new(&file), e.into_error()))?;
        run.emit(&mut m, STAGE, &file, &buf)?;
        histograms.push(HistogramEntry {
            metric: metric.into(),
            column: column.into(),
            file,
            threshold,
            n_valid: h.total(),
        });
    }
    let lattice = if run.out.join(LATTICE_FILE).is_file() {
        let b = run.upstream(&mut m, LATTICE_FILE, dep("pareto"))?;
        run.emit(&mut m, STAGE, "report/lattice.csv", &b)?;
        Some("report/lattice.csv".to_string())
    } else {
        notices.push("frontier lattice omitted: the pareto stage fitted no surface".into());
        remove_stale(&run.out.join("report/lattice.csv"));
        None
    };
    run.emit(&mut m, STAGE, "report/summary.json", &summary_bytes)?;
    let index = ReportIndex { histograms, lattice, summary: "report/summary.json".into(), notices };
    run.emit(&mut m, STAGE, "report/index.json", &json_bytes(&index))?;
    m.write(&run.out.join(STAGE))?;
    Ok((m, index))
}

/// Write the bundled synthetic scenarios to `dir` together with a config that runs the
/// whole pipeline on them. Returns the config path.
pub fn cmd_synth(dir: &Path, seed: u64) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io("synth", dir, e))?;
    let mut config = format!("# Generated by `avfrontier synth`.\nseed = {seed}\nout_dir = \"out\"\n");
    for ds in synthetic_datasets(seed, &SynthConfig::default()) {
        let path = dir.join(format!("{}.csv", ds.name));
        let f = File::create(&path).map_err(|e| CliError::io("synth", &path, e))?;
        let mut w = BufWriter::new(f);
        write_raw_table(&mut w, &ds.rows).map_err(core("synth"))?;
        w.flush().map_err(|e| CliError::io("synth", &path, e))?;
        let adjacency: Vec<String> = ds.topology.adjacency.iter().map(|(a, b)| format!("[\"{a}\", \"{b}\"]")).collect();
        config.push_str(&format!(
            "\n[[inputs]]\nname = \"{}\"\npath = \"{}.csv\"\nadjacency = [{}]\nlane_width = {}\n",
            ds.name,
            ds.name,
            adjacency.join(", "),
            ds.topology.lane_width
        ));
    }
    let path = dir.join("run.toml");
    std::fs::write(&path, config).map_err(|e| CliError::io("synth", &path, e))?;
    Ok(path)
}

pub fn run_all(run: &Run<'_>) -> Result<(SummaryDocument, ReportIndex), CliError> {
    cmd_ingest(run)?;
    cmd_metrics(run)?;
    cmd_objectives(run)?;
    let (_, summary) = cmd_pareto(run)?;
    let (_, index) = cmd_report(run)?;
    Ok((summary, index))
}
