use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hforecast::artifacts::{topics_version, ArtifactLayout, TopicsStamp};
use hforecast::collabnet::{pagerank, CollabGraph};
use hforecast::corpus::{
    load_cache, parse_corpus, validate_corpus, write_aminer, write_cache, CorpusSnapshot, CorpusStore, ParseReport,
    ValidationReport, Year,
};
use hforecast::evalkit::{
    author_correlations, correlation_text, default_groups, eval_table, igr_table, igr_text, jackknife, jackknife_table,
    label_correlations, random_baseline, regression_metrics, response_curves, response_curves_tsv, run_protocol,
    split_indices, CorrelationRow, EvalReport, IgrRow, JackknifeReport, ProtocolConfig, RegressionMetrics,
};
use hforecast::factorlab::{build_author_dataset, Dataset, DatasetSpec, FutureHSource, SnapshotContext};
use hforecast::learners::{
    fit_linear_regression, predict_linear, BuiltinLearner, LearnerKind, ModelParams, TrainedModel,
};
use hforecast::persist::{derive_seed, write_atomic};
use hforecast::pipeline::{labeled_dataset, PipelineConfig};
use hforecast::scholarmetrics::distribution_stats_with;
use hforecast::synth::{generate, SynthConfig};
use hforecast::topicmodel::{fit_snapshot_topics, DocTopics, TopicModel};
use hforecast_service::{Artifacts, ServeConfig};
use serde::{Deserialize, Serialize};

use crate::{Cli, CliError, Command, SpecArgs, TargetArg};

/// Configuration embedded in every artifact and report. Paths are left out
/// so artifacts do not depend on where the cache lives.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_checksum: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Year>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_t: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_h: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<DatasetSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub learners: Vec<LearnerKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topics: Option<PipelineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topics_version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthConfig>,
}

impl RunConfig {
    fn new(command: &str) -> Self {
        RunConfig {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            ..Default::default()
        }
    }

    fn value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("run config serializes")
    }
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    run_config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("report serializes");
    s.push(b'\n');
    s
}

fn write_json<T: Serialize>(path: &Path, rc: &RunConfig, body: T) -> Result<(), CliError> {
    write_atomic(path, &to_json(&Stamped { run_config: rc, body }))?;
    Ok(())
}

struct Session<'a> {
    layout: ArtifactLayout,
    out: &'a mut dyn Write,
}

impl Session<'_> {
    fn store(&self) -> Result<Arc<CorpusStore>, CliError> {
        let path = self.layout.corpus_cache();
        if !path.exists() {
            return Err(CliError::MissingArtifact(format!(
                "no corpus cache at {}; run `hforecast ingest --corpus FILE` first",
                path.display()
            )));
        }
        let store = load_cache(&path, None)?.expect("no checksum requested");
        Ok(Arc::new(store))
    }

    /// Snapshot context from the stored topic model for `t`.
    fn context(&self, store: &Arc<CorpusStore>, t: Year) -> Result<(SnapshotContext, TopicsStamp, String), CliError> {
        let model_path = self.layout.topic_model(t);
        if !model_path.exists() {
            return Err(CliError::MissingArtifact(format!(
                "no topic model for t = {t}; run `hforecast topics --t {t}` first"
            )));
        }
        let stamp: TopicsStamp = serde_json::from_slice(&std::fs::read(self.layout.topics_config(t))?)
            .map_err(|e| CliError::Config(format!("topic sidecar: {e}")))?;
        if stamp.corpus_checksum != store.checksum() {
            return Err(CliError::MissingArtifact(format!(
                "topic model for t = {t} was fit on a different corpus; rerun `hforecast topics --t {t}`"
            )));
        }
        let model = TopicModel::load(&model_path)?;
        let version = topics_version(model.k, &std::fs::read(&model_path)?);
        let docs = DocTopics::load(&self.layout.doc_topics(t))?;
        let ctx = SnapshotContext::build(store.clone(), t, model, docs, &stamp.config.pagerank)?;
        Ok((ctx, stamp, version))
    }

    fn regressor(&self, t: Year, delta_t: u32) -> Result<TrainedModel, CliError> {
        let path = self.layout.hindex_model(t, delta_t);
        if !path.exists() {
            return Err(CliError::MissingArtifact(format!(
                "no h-index model for t = {t}, dt = {delta_t}; run `hforecast train-hindex --t {t} --dt {delta_t}` first"
            )));
        }
        Ok(TrainedModel::load(&path)?)
    }

    /// Loads the cached dataset for `spec` when it was built from the same
    /// corpus and topic model; builds and caches it otherwise.
    fn dataset(&mut self, spec: &DatasetSpec) -> Result<(Dataset, RunConfig), CliError> {
        let store = self.store()?;
        let t = spec.t;
        let topics_path = self.layout.topic_model(t);
        let mut rc = RunConfig::new("featurize");
        rc.corpus_checksum = Some(store.checksum().to_string());
        rc.spec = Some(spec.clone());
        let regressor = match spec.future_h_source {
            FutureHSource::Observed => None,
            FutureHSource::Predicted => Some(self.regressor(t, spec.delta_t)?),
        };
        let path = self.layout.dataset(spec);
        let sidecar = run_sidecar(&path);
        let stamp: Option<TopicsStamp> = std::fs::read(self.layout.topics_config(t))
            .ok()
            .and_then(|b| serde_json::from_slice(&b).ok());
        if let (Some(stamp), Ok(bytes)) = (stamp, std::fs::read(&topics_path)) {
            rc.topics_version = Some(topics_version(stamp.config.lda.k, &bytes));
            rc.topics = Some(stamp.config);
        }
        let regressor_tag = regressor.as_ref().map(TrainedModel::version_tag);
        if let (Ok(raw), true) = (std::fs::read(&sidecar), path.exists()) {
            if let Ok(prev) = serde_json::from_slice::<DatasetStamp>(&raw) {
                if prev.run_config == rc && prev.regressor == regressor_tag && rc.topics_version.is_some() {
                    let ds = Dataset::load(&path)?;
                    if &ds.spec == spec {
                        log::info!("reusing dataset {}", path.display());
                        return Ok((ds, rc));
                    }
                }
            }
        }
        let (ctx, stamp, version) = self.context(&store, t)?;
        rc.topics = Some(stamp.config);
        rc.topics_version = Some(version);
        let ds = labeled_dataset(&ctx, spec, regressor.as_ref())?;
        ds.save(&path)?;
        write_atomic(
            &sidecar,
            &to_json(&DatasetStamp {
                run_config: rc.clone(),
                regressor: regressor_tag,
            }),
        )?;
        Ok((ds, rc))
    }

    fn report_path(&self, kind: &str, spec: &DatasetSpec, ext: &str) -> PathBuf {
        let stem = self.layout.dataset(spec);
        let stem = stem.file_stem().expect("dataset path has a name").to_string_lossy();
        self.layout.reports().join(format!("{kind}-{stem}.{ext}"))
    }
}

#[derive(Serialize, Deserialize)]
struct DatasetStamp {
    run_config: RunConfig,
    regressor: Option<String>,
}

fn run_sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".run.json");
    PathBuf::from(s)
}

fn with_protocol(mut rc: RunConfig, command: &str, eval: &crate::EvalArgs) -> (RunConfig, ProtocolConfig) {
    let cfg = ProtocolConfig {
        runs: eval.runs,
        seed: eval.seed,
        threshold: eval.threshold,
    };
    rc.command = command.to_string();
    rc.seed = Some(eval.seed);
    rc.protocol = Some(cfg);
    (rc, cfg)
}

#[derive(Serialize)]
struct ExperimentBody<'a> {
    num_examples: usize,
    positive_rate: f64,
    reports: &'a [EvalReport],
}

#[derive(Serialize)]
struct HindexBody {
    model_version: String,
    num_authors: usize,
    intercept: f64,
    coefficients: Vec<(String, f64)>,
    in_sample: RegressionMetrics,
    held_out_r2_mean: Option<f64>,
    held_out_mae_mean: f64,
    held_out_runs: usize,
}

#[derive(Serialize)]
struct SnapshotBody {
    t: Year,
    visible_papers: usize,
    active_authors: usize,
    citation_links: u64,
    mean_author_h: f64,
    max_author_h: u32,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Runs one parsed command line, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::debug!("worker pool already initialized");
        }
    }
    let mut s = Session {
        layout: ArtifactLayout::new(cli.cache_dir),
        out,
    };
    match cli.command {
        Command::Ingest { corpus } => ingest(&mut s, &corpus),
        Command::Validate { corpus } => validate(&mut s, corpus.as_deref()),
        Command::Snapshot { t } => snapshot(&mut s, t),
        Command::Topics(args) => topics(&mut s, args.t, args.pipeline()),
        Command::Graph { t } => graph(&mut s, t),
        Command::Featurize(args) => featurize(&mut s, &args),
        Command::TrainHindex { t, dt, min_h, runs, seed } => train_hindex(&mut s, t, dt, min_h, runs, seed),
        Command::TrainImpact { spec, learner, seed } => train_impact(&mut s, &spec, learner, seed),
        Command::Experiment { spec, learners, eval } => experiment(&mut s, &spec, learners, &eval),
        Command::Jackknife { spec, learner, eval } => jackknife_cmd(&mut s, &spec, learner, &eval),
        Command::Igr { spec, bins } => igr(&mut s, &spec, bins),
        Command::Correlate { spec, target, bins } => correlate(&mut s, &spec, target, bins),
        Command::Stats {
            t,
            paper_threshold,
            h_threshold,
        } => stats(&mut s, t, paper_threshold, h_threshold),
        Command::Serve {
            bind,
            t,
            dt,
            learner,
            mode,
            static_dir,
        } => serve(
            &mut s,
            bind,
            ServeConfig {
                t,
                delta_t: dt,
                learner,
                mode: mode.into(),
            },
            static_dir.as_deref(),
        ),
        Command::Synth {
            out,
            authors,
            papers,
            seed,
        } => synth(&mut s, &out, authors, papers, seed),
    }
}

fn ingest(s: &mut Session, corpus: &Path) -> Result<(), CliError> {
    let (store, report) = parse_corpus(BufReader::new(File::open(corpus)?))?;
    write_cache(&store, &s.layout.corpus_cache())?;
    let validation = validate_corpus(&store);
    let mut rc = RunConfig::new("ingest");
    rc.corpus_checksum = Some(report.checksum.clone());

    #[derive(Serialize)]
    struct Body<'a> {
        parse: &'a ParseReport,
        validation: &'a ValidationReport,
    }
    write_json(&s.layout.ingest_report(), &rc, Body { parse: &report, validation: &validation })?;
    writeln!(
        s.out,
        "ingested {} of {} records ({} skipped, {} dangling references)",
        report.papers_kept,
        report.records_read,
        report.skipped.len(),
        report.dangling_references
    )?;
    writeln!(s.out, "checksum {}", report.checksum)?;
    writeln!(s.out, "cache {}", s.layout.corpus_cache().display())?;
    Ok(())
}

fn validate(s: &mut Session, corpus: Option<&Path>) -> Result<(), CliError> {
    let (store, parse) = match corpus {
        Some(p) => {
            let (store, report) = parse_corpus(BufReader::new(File::open(p)?))?;
            (Arc::new(store), Some(report))
        }
        None => (s.store()?, None),
    };
    let report = validate_corpus(&store);
    if let Some(p) = &parse {
        writeln!(s.out, "{:<20}{}", "skipped records", p.skipped.len())?;
        for e in p.skipped.iter().take(20) {
            writeln!(s.out, "  line {}: {:?}", e.line, e.kind)?;
        }
    }
    write!(s.out, "{}", report.summary())?;
    let mut rc = RunConfig::new("validate");
    rc.corpus_checksum = Some(store.checksum().to_string());

    #[derive(Serialize)]
    struct Body<'a> {
        #[serde(skip_serializing_if = "Option::is_none")]
        parse: Option<&'a ParseReport>,
        validation: &'a ValidationReport,
    }
    write_json(
        &s.layout.reports().join("validation.json"),
        &rc,
        Body { parse: parse.as_ref(), validation: &report },
    )
}

fn snapshot(s: &mut Session, t: Year) -> Result<(), CliError> {
    let store = s.store()?;
    let snap = CorpusSnapshot::build(store.clone(), t);
    let hs: Vec<u32> = snap.active_authors().map(|a| snap.author_h(a)).collect();
    let body = SnapshotBody {
        t,
        visible_papers: snap.num_visible(),
        active_authors: hs.len(),
        citation_links: snap.visible_papers().map(|p| u64::from(snap.citations(p))).sum(),
        mean_author_h: if hs.is_empty() { 0.0 } else { hs.iter().map(|h| f64::from(*h)).sum::<f64>() / hs.len() as f64 },
        max_author_h: hs.iter().copied().max().unwrap_or(0),
    };
    writeln!(s.out, "snapshot year      {}", body.t)?;
    writeln!(s.out, "visible papers     {}", body.visible_papers)?;
    writeln!(s.out, "active authors     {}", body.active_authors)?;
    writeln!(s.out, "citation links     {}", body.citation_links)?;
    writeln!(s.out, "mean author h      {:.4}", body.mean_author_h)?;
    writeln!(s.out, "max author h       {}", body.max_author_h)?;
    let mut rc = RunConfig::new("snapshot");
    rc.corpus_checksum = Some(store.checksum().to_string());
    rc.t = Some(t);
    write_json(&s.layout.reports().join(format!("snapshot-t{t}.json")), &rc, body)
}

fn topics(s: &mut Session, t: Year, config: PipelineConfig) -> Result<(), CliError> {
    let store = s.store()?;
    let snap = CorpusSnapshot::build(store.clone(), t);
    if snap.is_empty() {
        return Err(CliError::Config(format!("no papers visible at t = {t}")));
    }
    let (model, docs) = fit_snapshot_topics(&snap, &config.lda, config.scope)?;
    let model_path = s.layout.topic_model(t);
    model.save(&model_path)?;
    docs.save(&s.layout.doc_topics(t))?;
    let stamp = TopicsStamp {
        t,
        corpus_checksum: store.checksum().to_string(),
        config,
    };
    write_atomic(&s.layout.topics_config(t), &to_json(&stamp))?;
    let words = model.top_words_text(10);
    write_atomic(&s.layout.root().join("topics").join(format!("t{t}.words.txt")), words.as_bytes())?;
    let version = topics_version(model.k, &std::fs::read(&model_path)?);
    writeln!(s.out, "{words}")?;
    writeln!(s.out, "topics_version {version}")?;
    Ok(())
}

fn graph(s: &mut Session, t: Year) -> Result<(), CliError> {
    let store = s.store()?;
    let snap = CorpusSnapshot::build(store.clone(), t);
    let stamp: Option<TopicsStamp> = std::fs::read(s.layout.topics_config(t))
        .ok()
        .and_then(|b| serde_json::from_slice(&b).ok());
    let pr_cfg = stamp.map(|st| st.config.pagerank).unwrap_or_default();
    let g = CollabGraph::build(&snap);
    let pr = pagerank(&g, &pr_cfg).map_err(|e| CliError::Config(format!("collaboration graph: {e}")))?;
    let mut rows: Vec<(String, usize, f64)> = g
        .nodes()
        .iter()
        .map(|a| (store.author(*a).name.clone(), g.degree(*a), pr.get(*a)))
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let mut table = String::from("author\tdegree\tpagerank\n");
    for (name, d, p) in &rows {
        table.push_str(&format!("{name}\t{d}\t{p}\n"));
    }
    write_atomic(&s.layout.graph_table(t), table.as_bytes())?;
    let mut edges = Vec::new();
    g.write_edge_list(&store, &mut edges)?;
    write_atomic(&s.layout.root().join("graph").join(format!("t{t}.edges.tsv")), &edges)?;

    writeln!(s.out, "nodes {}  edges {}  pagerank iterations {} (converged: {})", g.num_nodes(), g.num_edges(), pr.iterations, pr.converged)?;
    rows.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    for (name, d, p) in rows.iter().take(10) {
        writeln!(s.out, "{p:.6}\t{d}\t{name}")?;
    }
    Ok(())
}

fn featurize(s: &mut Session, args: &SpecArgs) -> Result<(), CliError> {
    let spec = args.spec();
    let (ds, _) = s.dataset(&spec)?;
    writeln!(
        s.out,
        "{} examples, {} factors, positive rate {:.4}",
        ds.len(),
        ds.feature_names.len(),
        ds.positive_rate()
    )?;
    writeln!(s.out, "dataset {}", s.layout.dataset(&spec).display())?;
    Ok(())
}

fn train_hindex(s: &mut Session, t: Year, dt: u32, min_h: u32, runs: usize, seed: u64) -> Result<(), CliError> {
    let store = s.store()?;
    let ds = build_author_dataset(&store, t, dt, min_h)?;
    let names: Vec<String> = hforecast::factorlab::AUTHOR_FEATURES.iter().map(|n| n.to_string()).collect();
    let x = ds.matrix();
    let y = ds.targets();
    let cur = ds.current_h();
    let mut rc = RunConfig::new("train-hindex");
    rc.corpus_checksum = Some(store.checksum().to_string());
    rc.t = Some(t);
    rc.delta_t = Some(dt);
    rc.min_h = Some(min_h);
    rc.seed = Some(seed);
    let model = fit_linear_regression(&x, &y, &names)?.with_run_config(rc.value());

    let clipped = |m: &TrainedModel, rows: &[usize]| -> Result<Vec<f64>, CliError> {
        rows.iter()
            .map(|i| Ok(predict_linear(m, &x[*i], cur[*i])?.value))
            .collect()
    };
    let all: Vec<usize> = (0..x.len()).collect();
    let in_sample = regression_metrics(&clipped(&model, &all)?, &y)?;
    let mut r2s = Vec::new();
    let mut maes = Vec::new();
    for r in 0..runs {
        let (train, test) = split_indices(x.len(), derive_seed(seed, r as u64))?;
        let tx: Vec<Vec<f64>> = train.iter().map(|i| x[*i].clone()).collect();
        let ty: Vec<f64> = train.iter().map(|i| y[*i]).collect();
        let m = fit_linear_regression(&tx, &ty, &names)?;
        let truths: Vec<f64> = test.iter().map(|i| y[*i]).collect();
        let rm = regression_metrics(&clipped(&m, &test)?, &truths)?;
        if let Some(r2) = rm.r2 {
            r2s.push(r2);
        }
        maes.push(rm.mae);
    }
    let path = s.layout.hindex_model(t, dt);
    model.save(&path)?;
    let version = model.version_tag();
    let ModelParams::Linear(p) = &model.params else {
        unreachable!("linear regression yields linear params")
    };
    let (intercept, coef) = p.unstandardized(&model.standardization);
    let body = HindexBody {
        model_version: version.clone(),
        num_authors: x.len(),
        intercept,
        coefficients: names.iter().cloned().zip(coef).collect(),
        in_sample,
        held_out_r2_mean: (!r2s.is_empty()).then(|| mean(&r2s)),
        held_out_mae_mean: if maes.is_empty() { f64::NAN } else { mean(&maes) },
        held_out_runs: runs,
    };
    writeln!(s.out, "authors {}  (t = {t}, dt = {dt}, min_h = {min_h})", body.num_authors)?;
    writeln!(s.out, "intercept {:.6}", body.intercept)?;
    for (n, c) in &body.coefficients {
        writeln!(s.out, "  {n:<14}{c:.6}")?;
    }
    match in_sample.r2 {
        Some(r2) => writeln!(s.out, "in-sample R2 {r2:.4}  MAE {:.4}", in_sample.mae)?,
        None => writeln!(s.out, "in-sample R2 undefined  MAE {:.4}", in_sample.mae)?,
    }
    if let Some(r2) = body.held_out_r2_mean {
        writeln!(s.out, "held-out R2 {r2:.4}  MAE {:.4} over {runs} half splits", body.held_out_mae_mean)?;
    }
    writeln!(s.out, "model {}", path.display())?;
    writeln!(s.out, "model_version {version}")?;
    write_json(&s.layout.reports().join(format!("hindex-t{t}-dt{dt}.json")), &rc, body)
}

fn train_impact(s: &mut Session, args: &SpecArgs, learner: LearnerKind, seed: u64) -> Result<(), CliError> {
    let spec = args.spec();
    let (ds, mut rc) = s.dataset(&spec)?;
    rc.command = "train-impact".into();
    rc.learners = vec![learner];
    rc.seed = Some(seed);
    let model = BuiltinLearner::new(learner)
        .train(&ds.matrix(), &ds.labels(), &ds.feature_names, seed)?
        .with_run_config(rc.value());
    let path = s.layout.impact_model(&spec, learner);
    model.save(&path)?;
    writeln!(s.out, "{} examples, positive rate {:.4}", ds.len(), ds.positive_rate())?;
    writeln!(s.out, "model {}", path.display())?;
    writeln!(s.out, "model_version {}", model.version_tag())?;
    Ok(())
}

fn experiment(s: &mut Session, args: &SpecArgs, learners: Vec<LearnerKind>, eval: &crate::EvalArgs) -> Result<(), CliError> {
    let spec = args.spec();
    let (ds, rc) = s.dataset(&spec)?;
    let learners = if learners.is_empty() {
        LearnerKind::CLASSIFIERS.to_vec()
    } else {
        learners
    };
    if let Some(k) = learners.iter().find(|k| **k == LearnerKind::LinearRegression) {
        return Err(CliError::Config(format!("{} is not a classifier", k.short())));
    }
    let (mut rc, cfg) = with_protocol(rc, "experiment", eval);
    rc.learners = learners.clone();
    let mut reports = vec![random_baseline(&ds, &cfg)?];
    for k in &learners {
        log::info!("evaluating {}", k.short());
        reports.push(run_protocol(&ds, &BuiltinLearner::new(*k), &cfg)?);
    }
    let table = eval_table(&reports);
    writeln!(s.out, "{} examples, positive rate {:.4}\n", ds.len(), ds.positive_rate())?;
    write!(s.out, "{table}")?;
    write_atomic(&s.report_path("experiment", &spec, "txt"), table.as_bytes())?;
    let path = s.report_path("experiment", &spec, "json");
    write_json(
        &path,
        &rc,
        ExperimentBody {
            num_examples: ds.len(),
            positive_rate: ds.positive_rate(),
            reports: &reports,
        },
    )?;
    writeln!(s.out, "\nreport {}", path.display())?;
    Ok(())
}

fn jackknife_cmd(s: &mut Session, args: &SpecArgs, learner: LearnerKind, eval: &crate::EvalArgs) -> Result<(), CliError> {
    let spec = args.spec();
    let (ds, rc) = s.dataset(&spec)?;
    let (mut rc, cfg) = with_protocol(rc, "jackknife", eval);
    rc.learners = vec![learner];
    let groups = default_groups(&ds);
    let report: JackknifeReport = jackknife(&ds, &groups, &BuiltinLearner::new(learner), &cfg)?;
    let table = jackknife_table(&report);
    write!(s.out, "{table}")?;
    write_atomic(&s.report_path("jackknife", &spec, "txt"), table.as_bytes())?;
    write_json(&s.report_path("jackknife", &spec, "json"), &rc, &report)
}

fn igr(s: &mut Session, args: &SpecArgs, bins: usize) -> Result<(), CliError> {
    if bins < 2 {
        return Err(CliError::Config("--bins must be at least 2".into()));
    }
    let spec = args.spec();
    let (ds, mut rc) = s.dataset(&spec)?;
    rc.command = "igr".into();
    rc.bins = Some(bins);
    let rows: Vec<IgrRow> = igr_table(&ds, bins);
    let text = igr_text(&rows);
    write!(s.out, "{text}")?;
    write_atomic(&s.report_path("igr", &spec, "txt"), text.as_bytes())?;

    #[derive(Serialize)]
    struct Body<'a> {
        rows: &'a [IgrRow],
    }
    write_json(&s.report_path("igr", &spec, "json"), &rc, Body { rows: &rows })
}

fn correlate(s: &mut Session, args: &SpecArgs, target: TargetArg, bins: usize) -> Result<(), CliError> {
    let spec = args.spec();

    #[derive(Serialize)]
    struct Body<'a> {
        target: &'a str,
        rows: &'a [CorrelationRow],
    }
    match target {
        TargetArg::Label => {
            let (ds, mut rc) = s.dataset(&spec)?;
            rc.command = "correlate".into();
            rc.bins = Some(bins);
            let rows = label_correlations(&ds);
            let text = correlation_text(&rows);
            write!(s.out, "{text}")?;
            write_atomic(&s.report_path("correlate", &spec, "txt"), text.as_bytes())?;
            let curves = response_curves(&ds, bins);
            write_atomic(&s.report_path("curves", &spec, "tsv"), response_curves_tsv(&curves).as_bytes())?;
            write_json(&s.report_path("correlate", &spec, "json"), &rc, Body { target: "label", rows: &rows })
        }
        TargetArg::FutureH => {
            let store = s.store()?;
            let ds = build_author_dataset(&store, spec.t, spec.delta_t, spec.min_h)?;
            let mut rc = RunConfig::new("correlate");
            rc.corpus_checksum = Some(store.checksum().to_string());
            rc.t = Some(spec.t);
            rc.delta_t = Some(spec.delta_t);
            rc.min_h = Some(spec.min_h);
            let rows = author_correlations(&ds);
            let text = correlation_text(&rows);
            writeln!(s.out, "{} authors", ds.examples.len())?;
            write!(s.out, "{text}")?;
            let stem = format!("correlate-authors-t{}-dt{}-h{}", spec.t, spec.delta_t, spec.min_h);
            write_atomic(&s.layout.reports().join(format!("{stem}.txt")), text.as_bytes())?;
            write_json(
                &s.layout.reports().join(format!("{stem}.json")),
                &rc,
                Body { target: "future-h", rows: &rows },
            )
        }
    }
}

fn stats(s: &mut Session, t: Year, paper_threshold: u32, h_threshold: u32) -> Result<(), CliError> {
    let store = s.store()?;
    let snap = CorpusSnapshot::build(store.clone(), t);
    let report = distribution_stats_with(&snap, paper_threshold, h_threshold);
    let text = report.to_text();
    write!(s.out, "{text}")?;
    let mut rc = RunConfig::new("stats");
    rc.corpus_checksum = Some(store.checksum().to_string());
    rc.t = Some(t);
    write_atomic(&s.layout.reports().join(format!("stats-t{t}.txt")), text.as_bytes())?;
    write_json(&s.layout.reports().join(format!("stats-t{t}.json")), &rc, &report)
}

fn serve(s: &mut Session, bind: std::net::SocketAddr, cfg: ServeConfig, static_dir: Option<&Path>) -> Result<(), CliError> {
    let artifacts = Artifacts::load(&s.layout, &cfg);
    if !artifacts.is_complete() {
        for m in &artifacts.missing {
            writeln!(s.out, "missing: {m}")?;
        }
        writeln!(s.out, "serving with incomplete artifacts; health reports 503")?;
    }
    writeln!(s.out, "listening on http://{bind}")?;
    s.out.flush()?;
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(hforecast_service::serve(artifacts, bind, static_dir))?;
    Ok(())
}

fn synth(s: &mut Session, out: &Path, authors: usize, papers: usize, seed: u64) -> Result<(), CliError> {
    let cfg = SynthConfig {
        num_authors: authors,
        num_papers: papers,
        seed,
        ..Default::default()
    };
    let raw = generate(&cfg);
    hforecast::persist::write_atomic_with(out, |f| {
        let mut w = BufWriter::new(f);
        write_aminer(&raw, &mut w)?;
        w.flush()
    })?;
    writeln!(s.out, "wrote {} papers to {}", raw.len(), out.display())?;
    Ok(())
}
