//! Command-line surface.
//!
//! Every text output opens with a provenance header naming the tool
//! version, the output format and the run configuration (inputs and
//! parameters, never the output paths), so identical runs write identical
//! bytes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use tcomfort_core::calib::{calibrate_rig, RansacParams};
use tcomfort_core::comfort::dataset::AssemblyOptions;
use tcomfort_core::comfort::{
    assemble_dataset, correlation_table, cross_validate, majority_baseline, polyfit_trend, train, Dataset, FrameFeatures, Hyperparameters, ModelKind, Scheme,
    Split,
};
use tcomfort_core::conditioning::{condition_series, ConditioningReport, TimeSeries};
use tcomfort_core::sim::{Protocol, SimConfig};
use tcomfort_core::thermal::RoiReading;
use tcomfort_core::{ReadingKind, Region, Statistic};

use crate::error::{read_text, write_file, CliError, Result};
use crate::formats::{self, provenance};
use crate::manifest::load_session;
use crate::pipeline::{process_session, ExtractOptions};
use crate::svg::{self, Line};

#[derive(Debug, Parser)]
#[command(name = "tcomfort", version, about = "Visual/thermal facial thermometry and personal comfort models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Checkerboard correspondences to a rig prior.
    Calibrate(CalibrateArgs),
    /// Session to per-frame homography log.
    Register(RegisterArgs),
    /// Session and prior to a features table.
    Extract(ExtractArgs),
    /// Features to conditioned features and an outlier report.
    Condition(ConditionArgs),
    /// Features and votes to a labeled dataset.
    Dataset(DatasetArgs),
    /// Datasets and room log to a correlation table.
    Correlate(CorrelateArgs),
    /// Dataset to a model artifact.
    Train(TrainArgs),
    /// Cross-validated evaluation of a dataset.
    Eval(EvalArgs),
    /// Simulated session directory.
    Simulate(SimulateArgs),
    /// Tables to TSV and SVG plots.
    Report(ReportArgs),
}

fn named<T>(from: fn(&str) -> Option<T>, what: &'static str) -> impl Fn(&str) -> std::result::Result<T, String> + Clone {
    move |s| from(s).ok_or_else(|| format!("unknown {what} {s:?}"))
}

fn scheme_arg(s: &str) -> std::result::Result<Scheme, String> {
    named(Scheme::from_name, "scheme")(s)
}
fn kind_arg(s: &str) -> std::result::Result<ReadingKind, String> {
    named(ReadingKind::from_name, "reading kind")(s)
}
fn model_arg(s: &str) -> std::result::Result<ModelKind, String> {
    named(ModelKind::from_name, "model kind")(s)
}
fn split_arg(s: &str) -> std::result::Result<Split, String> {
    named(Split::from_name, "split")(s)
}
fn statistic_arg(s: &str) -> std::result::Result<Statistic, String> {
    named(Statistic::from_name, "statistic")(s)
}
fn protocol_arg(s: &str) -> std::result::Result<Protocol, String> {
    named(Protocol::from_name, "protocol")(s)
}
fn regions_arg(s: &str) -> std::result::Result<Vec<Region>, String> {
    s.split(',').map(|r| named(Region::from_name, "region")(r.trim())).collect()
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Correspondence files, one per checkerboard view.
    #[arg(long = "correspondences", required = true, num_args = 1..)]
    pub views: Vec<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SessionArgs {
    /// Session manifest.
    #[arg(long)]
    pub session: PathBuf,
    /// Rig prior used when a frame cannot be registered.
    #[arg(long)]
    pub prior: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct RegisterArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    #[arg(long, value_parser = statistic_arg, default_value = "mean")]
    pub statistic: Statistic,
    /// Read only this kind; default is every kind the frames support.
    #[arg(long, value_parser = kind_arg)]
    pub kind: Option<ReadingKind>,
    /// Omit the eye regions (always omitted for exp2 sessions).
    #[arg(long)]
    pub no_eyes: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the registration log.
    #[arg(long)]
    pub registration_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConditionArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub votes: PathBuf,
    #[arg(long)]
    pub room: Option<PathBuf>,
    /// Append room temperature as a feature (requires --room).
    #[arg(long)]
    pub with_room: bool,
    #[arg(long, value_parser = scheme_arg, default_value = "four_class")]
    pub scheme: Scheme,
    #[arg(long, value_parser = kind_arg, default_value = "skin_temperature_C")]
    pub kind: ReadingKind,
    /// Comma-separated; default is every region present in the features.
    #[arg(long, value_parser = regions_arg)]
    pub regions: Option<Vec<Region>>,
    #[arg(long, default_value = "s01")]
    pub subject_id: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[arg(long = "dataset", required = true, num_args = 1..)]
    pub datasets: Vec<PathBuf>,
    #[arg(long)]
    pub room: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HyperArgs {
    #[arg(long, default_value_t = 100)]
    pub trees: u32,
    #[arg(long, default_value_t = 2)]
    pub min_leaf: u32,
    #[arg(long, default_value_t = 6)]
    pub k: u32,
    #[arg(long, default_value_t = 1.0)]
    pub svm_c: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub svm_tol: f64,
}

impl HyperArgs {
    fn get(&self) -> Result<Hyperparameters> {
        if self.trees == 0 || self.min_leaf == 0 || self.k == 0 || !(self.svm_c > 0.0) || !(self.svm_tol > 0.0) {
            return Err(CliError::Usage("hyperparameters must be positive".into()));
        }
        Ok(Hyperparameters { n_trees: self.trees, min_leaf: self.min_leaf, k: self.k, svm_c: self.svm_c, svm_tol: self.svm_tol })
    }

    fn config(&self) -> String {
        format!("trees={} min_leaf={} k={} svm_c={} svm_tol={}", self.trees, self.min_leaf, self.k, self.svm_c, self.svm_tol)
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_parser = model_arg)]
    pub model: ModelKind,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_parser = model_arg)]
    pub model: ModelKind,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, value_parser = split_arg, default_value = "blocked_by_vote")]
    pub split: Split,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = protocol_arg)]
    pub protocol: Protocol,
    #[arg(long)]
    pub seed: u64,
    /// `key=value` overrides of the subject and camera models.
    #[arg(long)]
    pub subject: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A features, dataset, correlation or evaluation table.
    #[arg(long)]
    pub input: PathBuf,
    /// Conditioned features to overlay on raw features.
    #[arg(long)]
    pub conditioned: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn p(path: &Path) -> String {
    path.display().to_string()
}

/// Runs a parsed command and returns the summary line for stdout.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Calibrate(a) => calibrate(a),
        Command::Register(a) => register(a),
        Command::Extract(a) => extract(a),
        Command::Condition(a) => condition(a),
        Command::Dataset(a) => dataset(a),
        Command::Correlate(a) => correlate(a),
        Command::Train(a) => train_cmd(a),
        Command::Eval(a) => eval(a),
        Command::Simulate(a) => simulate(a),
        Command::Report(a) => report(a),
    }
}

fn calibrate(a: CalibrateArgs) -> Result<String> {
    let views = a.views.iter().map(|v| formats::parse_correspondences(&read_text(v)?, v)).collect::<Result<Vec<_>>>()?;
    let rig = calibrate_rig(&views, &RansacParams::with_seed(a.seed))?;
    let inputs: Vec<String> = a.views.iter().map(|v| p(v)).collect();
    let header = provenance("rig_prior", &format!("subcommand=calibrate correspondences={} seed={}", inputs.join(","), a.seed));
    write_file(&a.out, formats::prior_to_text(&rig, &header).as_bytes())?;
    Ok(format!("rms_residual_px={} frames_used={} inlier_fraction={}", rig.rms_residual, rig.frames_used, rig.inlier_fraction))
}

fn load_prior(path: Option<&Path>) -> Result<Option<tcomfort_core::RigCalibration>> {
    path.map(|p| formats::parse_prior(&read_text(p)?, p)).transpose()
}

fn session_config(s: &SessionArgs) -> String {
    let prior = s.prior.as_deref().map_or("none".into(), p);
    format!("session={} prior={prior} seed={}", p(&s.session), s.seed)
}

fn register(a: RegisterArgs) -> Result<String> {
    let session = load_session(&a.session.session)?;
    let prior = load_prior(a.session.prior.as_deref())?;
    let opts = ExtractOptions { seed: a.session.seed, include_eyes: true, statistic: Statistic::Mean, kind: None };
    let outcomes = process_session(&session, prior.as_ref(), None, &opts, a.session.jobs)?;
    let records: Vec<_> = outcomes.into_iter().map(|o| o.registration).collect();
    let header = provenance("registration_log", &format!("subcommand=register {}", session_config(&a.session)));
    write_file(&a.out, formats::registration_log_to_text(&records, &header).as_bytes())?;
    let fallback = records.iter().filter(|r| r.result.used_fallback).count();
    Ok(format!("frames={} fallback={fallback}", records.len()))
}

fn extract(a: ExtractArgs) -> Result<String> {
    let session = load_session(&a.session.session)?;
    let prior = load_prior(a.session.prior.as_deref())?;
    let landmarks = formats::FileLandmarks::load(&session.manifest.landmarks)?;
    // the far exp2 geometry leaves the eyes a pixel or two wide
    let include_eyes = !a.no_eyes && session.manifest.protocol_id != "exp2";
    let opts = ExtractOptions { seed: a.session.seed, include_eyes, statistic: a.statistic, kind: a.kind };
    let outcomes = process_session(&session, prior.as_ref(), Some(&landmarks), &opts, a.session.jobs)?;
    let kind = a.kind.map_or("all", ReadingKind::name);
    let config = format!("subcommand=extract {} statistic={} kind={kind} include_eyes={include_eyes}", session_config(&a.session), a.statistic.name());
    let mut readings = Vec::new();
    let mut warnings = 0;
    for o in &outcomes {
        for w in &o.warnings {
            eprintln!("warning frame={} message={w:?}", o.registration.frame_id);
            warnings += 1;
        }
        readings.extend_from_slice(&o.readings);
    }
    write_file(&a.out, formats::features_to_text(&readings, &provenance("features", &config)).as_bytes())?;
    if let Some(log) = &a.registration_log {
        let records: Vec<_> = outcomes.into_iter().map(|o| o.registration).collect();
        write_file(log, formats::registration_log_to_text(&records, &provenance("registration_log", &config)).as_bytes())?;
    }
    Ok(format!("readings={} warnings={warnings}", readings.len()))
}

pub type SeriesReport = (Region, ReadingKind, ConditioningReport);

/// Conditions every (region, kind) series of a features table. Returns
/// the conditioned readings sorted by timestamp, kind and region.
pub fn condition_features(rows: &[RoiReading]) -> Result<(Vec<RoiReading>, Vec<SeriesReport>)> {
    let mut out = Vec::with_capacity(rows.len());
    let mut reports = Vec::new();
    for ((region, kind), series) in formats::group_features(rows) {
        let ts = TimeSeries::new(series.iter().map(|r| (r.timestamp_ms, r.value)).collect())?;
        let (cond, report) = condition_series(&ts);
        out.extend(series.iter().zip(cond.samples()).map(|(r, &(_, value))| RoiReading { value, ..*r }));
        reports.push((region, kind, report));
    }
    out.sort_by_key(|r| (r.timestamp_ms, r.kind, r.region));
    Ok((out, reports))
}

fn condition(a: ConditionArgs) -> Result<String> {
    let rows = formats::parse_features(&read_text(&a.features)?, &a.features)?;
    let (out, reports) = condition_features(&rows)?;
    let config = format!("subcommand=condition features={} hampel_window=5 hampel_k=3 moving_average=5", p(&a.features));
    write_file(&a.out, formats::features_to_text(&out, &provenance("features", &config)).as_bytes())?;
    write_file(&a.report, formats::conditioning_report_to_text(&reports, &provenance("conditioning_report", &config)).as_bytes())?;
    let removed: usize = reports.iter().map(|r| r.2.n_outliers_removed).sum();
    Ok(format!("series={} outliers_removed={removed}", reports.len()))
}

fn room_series(path: &Path) -> Result<TimeSeries> {
    let rows = formats::parse_room(&read_text(path)?, path)?;
    Ok(TimeSeries::new(rows.iter().map(|r| (r.timestamp_ms, r.temp_c)).collect())?)
}

/// Per-frame values of one reading kind and the regions seen, in
/// canonical region order.
pub fn frame_features(rows: &[RoiReading], kind: ReadingKind) -> (Vec<FrameFeatures>, Vec<Region>) {
    let mut frames: BTreeMap<u64, BTreeMap<Region, f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.kind == kind) {
        frames.entry(r.timestamp_ms).or_default().insert(r.region, r.value);
    }
    let regions = Region::ALL.into_iter().filter(|g| frames.values().any(|f| f.contains_key(g))).collect();
    (frames.into_iter().map(|(timestamp_ms, values)| FrameFeatures { timestamp_ms, values }).collect(), regions)
}

fn dataset(a: DatasetArgs) -> Result<String> {
    let rows = formats::parse_features(&read_text(&a.features)?, &a.features)?;
    let votes = formats::parse_votes(&read_text(&a.votes)?, &a.votes)?;
    if a.with_room && a.room.is_none() {
        return Err(CliError::Usage("--with-room requires --room".into()));
    }
    let room = a.room.as_deref().map(room_series).transpose()?;
    let (frames, seen) = frame_features(&rows, a.kind);
    let regions = a.regions.clone().unwrap_or(seen);
    if regions.is_empty() {
        return Err(CliError::Session(format!("no {} readings in {}", a.kind.name(), p(&a.features))));
    }
    let opts = AssemblyOptions { subject_id: a.subject_id.clone(), scheme: a.scheme, kind: a.kind, regions, with_room: a.with_room };
    let d = assemble_dataset(&frames, &votes, room.as_ref(), &opts)?;
    let names: Vec<&str> = opts.regions.iter().map(|r| r.name()).collect();
    let config = format!(
        "subcommand=dataset features={} votes={} room={} with_room={} scheme={} kind={} regions={} subject_id={}",
        p(&a.features),
        p(&a.votes),
        a.room.as_deref().map_or("none".into(), p),
        a.with_room,
        a.scheme.name(),
        a.kind.name(),
        names.join(","),
        a.subject_id
    );
    write_file(&a.out, formats::dataset_to_text(&d, &provenance("dataset", &config)).as_bytes())?;
    let counts: Vec<String> = d.class_counts().iter().map(|(l, c)| format!("{}:{c}", l.name())).collect();
    Ok(format!("records={} votes={} classes={}", d.len(), d.vote_times.len(), counts.join(",")))
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    formats::parse_dataset(&read_text(path)?, path)
}

fn correlate(a: CorrelateArgs) -> Result<String> {
    let room = room_series(&a.room)?;
    let mut series = Vec::new();
    for path in &a.datasets {
        let d = load_dataset(path)?;
        for (j, &region) in d.regions.iter().enumerate() {
            let ts = TimeSeries::new(d.records.iter().map(|r| (r.timestamp_ms, r.values[j])).collect())?;
            series.push((region, d.kind, ts));
        }
    }
    let table = correlation_table(&series, &room)?;
    let inputs: Vec<String> = a.datasets.iter().map(|d| p(d)).collect();
    let mut header = provenance("correlation", &format!("subcommand=correlate dataset={} room={}", inputs.join(","), p(&a.room)));
    let mut kinds: Vec<ReadingKind> = table.cells.iter().map(|c| c.kind).collect();
    kinds.dedup();
    let mut best = Vec::new();
    for k in kinds {
        let b = table.best_region(k).map_or("NA", Region::name);
        header.push_str(&format!("# best_region {}={b}\n", k.name()));
        best.push(format!("{}={b}", k.name()));
    }
    write_file(&a.out, formats::correlation_to_text(&table, &header).as_bytes())?;
    Ok(format!("best_region {}", best.join(" ")))
}

fn train_cmd(a: TrainArgs) -> Result<String> {
    let d = load_dataset(&a.dataset)?;
    let config = format!("subcommand=train dataset={} model={} seed={} {}", p(&a.dataset), a.model.name(), a.seed, a.hyper.config());
    let mut m = train(a.model, &d, &a.hyper.get()?, a.seed)?;
    m.provenance = format!("tcomfort {} {config}", formats::VERSION);
    write_file(&a.out, &m.to_bytes())?;
    Ok(format!("model={} records={} dim={}", a.model.name(), d.len(), m.dim()))
}

fn eval(a: EvalArgs) -> Result<String> {
    if a.folds < 2 {
        return Err(CliError::Usage("--folds must be at least 2".into()));
    }
    let d = load_dataset(&a.dataset)?;
    let r = cross_validate(&d, a.model, a.folds, a.split, &a.hyper.get()?, a.seed)?;
    let config = format!(
        "subcommand=eval dataset={} model={} folds={} split={} seed={} {}",
        p(&a.dataset),
        a.model.name(),
        a.folds,
        a.split.name(),
        a.seed,
        a.hyper.config()
    );
    let baseline = majority_baseline(&d);
    write_file(&a.out, formats::eval_report_to_text(&r, baseline, &provenance("eval_report", &config)).as_bytes())?;
    Ok(format!("accuracy={} majority_baseline={baseline}", r.accuracy))
}

fn simulate(a: SimulateArgs) -> Result<String> {
    let mut cfg = SimConfig::new(a.protocol, a.seed);
    let mut config = format!("subcommand=simulate protocol={} seed={}", cfg.protocol.id.name(), a.seed);
    if let Some(path) = &a.subject {
        crate::simulate::apply_overrides(&mut cfg, &read_text(path)?, path)?;
        config.push_str(&format!(" subject={}", p(path)));
    }
    let s = crate::simulate::write_session(&cfg, &a.out, &provenance("simulation", &config))?;
    Ok(format!("frames={} votes={}", s.n_frames(), s.votes.len()))
}

fn table_format(text: &str) -> Option<&str> {
    text.lines().next()?.strip_prefix("# tcomfort ")?.split_whitespace().find_map(|t| t.strip_prefix("format="))
}

fn tsv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&r.join("\t"));
        s.push('\n');
    }
    s
}

fn minutes(t: u64, t0: u64) -> f64 {
    (t - t0) as f64 / 60_000.0
}

fn report(a: ReportArgs) -> Result<String> {
    let text = read_text(&a.input)?;
    let format = table_format(&text).ok_or_else(|| CliError::format(&a.input, 1, "missing provenance header"))?;
    let mut written = Vec::new();
    let mut emit = |name: String, body: String| -> Result<()> {
        write_file(&a.out.join(&name), body.as_bytes())?;
        written.push(name);
        Ok(())
    };
    match format {
        "features" => {
            let raw = formats::group_features(&formats::parse_features(&text, &a.input)?);
            let cond = match &a.conditioned {
                Some(c) => Some(formats::group_features(&formats::parse_features(&read_text(c)?, c)?)),
                None => None,
            };
            let t0 = raw.values().flatten().map(|r| r.timestamp_ms).min().unwrap_or(0);
            for ((region, kind), series) in &raw {
                let stem = format!("{}_{}", region.name(), kind.name());
                let conditioned = cond.as_ref().and_then(|c| c.get(&(*region, *kind)));
                let mut rows = Vec::new();
                let mut lines = vec![Line { label: "raw", points: series.iter().map(|r| (minutes(r.timestamp_ms, t0), r.value)).collect(), dashed: false }];
                rows.extend(series.iter().map(|r| vec![r.timestamp_ms.to_string(), "raw".into(), r.value.to_string()]));
                if let Some(c) = conditioned {
                    lines.push(Line { label: "conditioned", points: c.iter().map(|r| (minutes(r.timestamp_ms, t0), r.value)).collect(), dashed: false });
                    rows.extend(c.iter().map(|r| vec![r.timestamp_ms.to_string(), "conditioned".into(), r.value.to_string()]));
                }
                let title = format!("{} {}", region.name(), kind.name());
                emit(format!("{stem}_series.tsv"), tsv("timestamp_ms\tseries\tvalue", rows))?;
                emit(format!("{stem}_series.svg"), svg::line_plot(&title, "minutes", kind.name(), &lines))?;

                let base = conditioned.unwrap_or(series);
                let x: Vec<f64> = base.iter().map(|r| minutes(r.timestamp_ms, t0)).collect();
                let y: Vec<f64> = base.iter().map(|r| r.value).collect();
                if let Ok(fit) = polyfit_trend(&x, &y, 6) {
                    let rows = base.iter().zip(&fit.fitted).map(|(r, f)| vec![r.timestamp_ms.to_string(), r.value.to_string(), f.to_string()]);
                    emit(format!("{stem}_trend.tsv"), tsv("timestamp_ms\tvalue\ttrend", rows))?;
                    let lines = [
                        Line { label: "value", points: x.iter().copied().zip(y.iter().copied()).collect(), dashed: false },
                        Line { label: "degree-6 trend", points: x.iter().copied().zip(fit.fitted.iter().copied()).collect(), dashed: true },
                    ];
                    emit(format!("{stem}_trend.svg"), svg::line_plot(&format!("{title} trend"), "minutes", kind.name(), &lines))?;
                }
            }
        }
        "dataset" => {
            let d = formats::parse_dataset(&text, &a.input)?;
            let t0 = d.records.first().map_or(0, |r| r.timestamp_ms);
            for (j, region) in d.regions.iter().enumerate() {
                let stem = format!("{}_{}", region.name(), d.kind.name());
                let rows = d.records.iter().map(|r| vec![r.timestamp_ms.to_string(), r.label.name().into(), r.values[j].to_string()]);
                emit(format!("{stem}_dataset.tsv"), tsv("timestamp_ms\tlabel\tvalue", rows))?;
                let line = Line { label: region.name(), points: d.records.iter().map(|r| (minutes(r.timestamp_ms, t0), r.values[j])).collect(), dashed: false };
                emit(format!("{stem}_dataset.svg"), svg::line_plot(&stem, "minutes", d.kind.name(), &[line]))?;
            }
        }
        "eval_report" => {
            let (labels, rows) = formats::parse_confusion(&text, &a.input)?;
            let table = labels.iter().zip(&rows).map(|(l, r)| std::iter::once(l.clone()).chain(r.iter().map(u64::to_string)).collect());
            emit("confusion.tsv".into(), tsv(&format!("true\\predicted\t{}", labels.join("\t")), table))?;
            emit("confusion.svg".into(), svg::confusion_grid("confusion matrix", &labels, &rows))?;
        }
        "correlation" => {
            let rows = formats::data_lines(&text).skip(1).map(|(_, l)| l.split(',').map(str::to_string).collect());
            emit("correlation.tsv".into(), tsv("region\tkind\tr\tn", rows))?;
        }
        other => return Err(CliError::format(&a.input, 1, format!("no report for format {other}"))),
    }
    Ok(format!("files={}", written.len()))
}
