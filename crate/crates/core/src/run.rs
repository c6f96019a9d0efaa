//! Configuration-driven runs: one function per command-line subcommand.
//!
//! Every JSON artifact carries `schema_version`, the command, the seed and the
//! effective configuration, and each run writes that configuration back as
//! `config.toml` so it can be replayed exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{mcb, metrics, murphy_difference, murphy_scores, theta_grid, write_metrics_csv, McbResult, MetricReport, MurphyCurve, MurphyDifference};
use crate::lp::{lp_irf, IrfResult, LpConfig};
use crate::sampler::{fit, forecast, write_draws_csv, FitData, FitSummary, ForecastResult, McmcConfig, ModelSpec, PosteriorDraws, Preset, SCHEMA_VERSION};
use crate::screen::{screen_all, CausalReport, ScreenConfig};
use crate::timeseries::{align, diagnostics, load_csv, read_csv, write_series_csv, AlignWarning, DiagnosticsReport, TimeSeries, Transform, YearMonth};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ingest,
    Diagnose,
    Screen,
    Fit,
    Forecast,
    Evaluate,
    Irf,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Ingest,
        Command::Diagnose,
        Command::Screen,
        Command::Fit,
        Command::Forecast,
        Command::Evaluate,
        Command::Irf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Diagnose => "diagnose",
            Command::Screen => "screen",
            Command::Fit => "fit",
            Command::Forecast => "forecast",
            Command::Evaluate => "evaluate",
            Command::Irf => "irf",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown subcommand {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Wide CSV: one date column plus one column per series.
    pub path: Option<PathBuf>,
    /// Defaults to the first column.
    pub date_column: Option<String>,
    pub target: Option<String>,
    /// Explicit predictor list; every other column when absent.
    pub predictors: Option<Vec<String>>,
    pub exclude: Vec<String>,
    /// A `screen.json` artifact whose retained variables become the predictors.
    pub retained_from: Option<PathBuf>,
    /// Drop months before this one.
    pub start: Option<YearMonth>,
    /// Last training month; later months are held out.
    pub train_end: Option<YearMonth>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Replaces `components` when set.
    pub preset: Option<Preset>,
    #[serde(flatten)]
    pub spec: ModelSpec,
}

impl ModelConfig {
    pub fn resolved(&self) -> ModelSpec {
        let mut spec = self.spec.clone();
        if let Some(p) = self.preset {
            spec.components = p.components();
        }
        spec
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastConfig {
    pub horizon: usize,
    pub level: f64,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self { horizon: 12, level: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct IrfConfig {
    /// Defaults to the target.
    pub response: Option<String>,
    pub shocks: Vec<String>,
    pub controls: Vec<String>,
    #[serde(flatten)]
    pub lp: LpConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// CSV of point forecasts: a date column plus one column per model.
    pub forecasts: Option<PathBuf>,
    /// Columns to evaluate; all when empty.
    pub models: Vec<String>,
    /// Pair for the Murphy difference; the first two models when absent.
    pub compare: Option<[String; 2]>,
    pub theta_points: usize,
    pub theta_pad: f64,
    /// CSV of errors for multiple comparisons: a label column then one column per model.
    pub mcb_errors: Option<PathBuf>,
    pub mcb_alpha: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            forecasts: None,
            models: Vec::new(),
            compare: None,
            theta_points: 501,
            theta_pad: 0.01,
            mcb_errors: None,
            mcb_alpha: 0.05,
        }
    }
}

/// Everything a run needs. The global `seed` overrides the module seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub data: DataConfig,
    /// Column name to transform, applied before alignment.
    pub transforms: BTreeMap<String, Transform>,
    pub model: ModelConfig,
    pub mcmc: McmcConfig,
    pub forecast: ForecastConfig,
    pub screen: ScreenConfig,
    pub irf: IrfConfig,
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("out"),
            data: DataConfig::default(),
            transforms: BTreeMap::new(),
            model: ModelConfig::default(),
            mcmc: McmcConfig::default(),
            forecast: ForecastConfig::default(),
            screen: ScreenConfig::default(),
            irf: IrfConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub data: Option<PathBuf>,
    pub target: Option<String>,
    pub preset: Option<Preset>,
    pub horizon: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Applies overrides and propagates the global seed.
    pub fn resolve(mut self, o: Overrides) -> Self {
        if let Some(v) = o.data {
            self.data.path = Some(v);
        }
        if let Some(v) = o.target {
            self.data.target = Some(v);
        }
        if let Some(v) = o.preset {
            self.model.preset = Some(v);
        }
        if let Some(v) = o.horizon {
            self.forecast.horizon = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.out {
            self.out = v;
        }
        self.mcmc.seed = self.seed;
        self.screen.seed = self.seed;
        self
    }
}

#[derive(Serialize)]
struct Artifact<'a, T: Serialize> {
    schema_version: &'static str,
    command: &'static str,
    seed: u64,
    config: &'a RunConfig,
    result: T,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

struct Writer<'a> {
    cfg: &'a RunConfig,
    command: Command,
    written: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(cfg: &'a RunConfig, command: Command) -> Result<Self> {
        fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
        let mut w = Self {
            cfg,
            command,
            written: Vec::new(),
        };
        let toml = cfg.to_toml()?;
        w.bytes("config.toml", toml.as_bytes())?;
        Ok(w)
    }

    fn bytes(&mut self, name: &str, data: &[u8]) -> Result<()> {
        let path = self.cfg.out.join(name);
        fs::write(&path, data).map_err(io_err(&path))?;
        self.written.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, result: T) -> Result<()> {
        let a = Artifact {
            schema_version: SCHEMA_VERSION,
            command: self.command.name(),
            seed: self.cfg.seed,
            config: self.cfg,
            result,
        };
        let mut text = serde_json::to_string_pretty(&a).map_err(|e| Error::Config(e.to_string()))?;
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    fn csv(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.bytes(name, &buf)
    }
}

/// Transformed target and predictors.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub target: TimeSeries,
    pub predictors: Vec<TimeSeries>,
    /// Every column after transforms, target included.
    pub all: Vec<TimeSeries>,
}

impl Dataset {
    pub fn series(&self, name: &str) -> Result<&TimeSeries> {
        self.all
            .iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::Schema(format!("no column named {name:?}")))
    }

    /// Target up to the training cutoff.
    pub fn train_target(&self, end: Option<YearMonth>) -> Result<TimeSeries> {
        match end {
            Some(e) => self.target.slice(None, Some(e)),
            None => Ok(self.target.clone()),
        }
    }
}

fn retained_from(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    v.pointer("/result/retained")
        .and_then(|r| r.as_array())
        .ok_or_else(|| Error::Schema(format!("{} has no result.retained list", path.display())))?
        .iter()
        .map(|s| {
            s.as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::Schema("retained entries must be strings".into()))
        })
        .collect()
}

/// Loads the data file, applies transforms and picks the predictor set.
pub fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    let path = cfg.data.path.as_ref().ok_or_else(|| Error::Config("no data path (set data.path or --data)".into()))?;
    let target_name = cfg.data.target.as_ref().ok_or_else(|| Error::Config("no target (set data.target or --target)".into()))?;
    let raw = load_csv(path, cfg.data.date_column.as_deref())?;
    for name in cfg.transforms.keys() {
        if !raw.iter().any(|s| s.name() == name) {
            return Err(Error::Config(format!("transform given for unknown column {name:?}")));
        }
    }
    let mut all = Vec::with_capacity(raw.len());
    for s in raw {
        let t = cfg.transforms.get(s.name()).copied().unwrap_or(Transform::Identity);
        let mut s = crate::timeseries::apply_transform(&s, t)?;
        if let Some(start) = cfg.data.start {
            s = s.slice(Some(start), None)?;
        }
        all.push(s);
    }
    let target = all
        .iter()
        .find(|s| s.name() == target_name)
        .cloned()
        .ok_or_else(|| Error::Schema(format!("target column {target_name:?} not found")))?;
    let wanted: Vec<String> = if let Some(p) = &cfg.data.retained_from {
        retained_from(p)?
    } else if let Some(p) = &cfg.data.predictors {
        p.clone()
    } else {
        all.iter().map(|s| s.name().to_string()).filter(|n| n != target_name).collect()
    };
    let mut predictors = Vec::new();
    for name in wanted.iter().filter(|n| !cfg.data.exclude.contains(n) && *n != target_name) {
        let s = all
            .iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::Schema(format!("predictor column {name:?} not found")))?;
        predictors.push(s.clone());
    }
    Ok(Dataset { target, predictors, all })
}

/// Runs one subcommand and returns the files written.
pub fn run(command: Command, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    if command != Command::Evaluate || cfg.data.path.is_some() {
        // fail on bad data before creating any output
        load_dataset(cfg)?;
    }
    let mut w = Writer::new(cfg, command)?;
    match command {
        Command::Ingest => ingest(cfg, &mut w)?,
        Command::Diagnose => diagnose(cfg, &mut w)?,
        Command::Screen => screen(cfg, &mut w)?,
        Command::Fit => {
            let (post, _) = fit_model(cfg)?;
            write_fit(&post, &mut w)?;
        }
        Command::Forecast => {
            let (post, data) = fit_model(cfg)?;
            write_fit(&post, &mut w)?;
            let f = forecast_from(cfg, &post, &data)?;
            write_forecast(&f, &mut w)?;
        }
        Command::Evaluate => evaluate(cfg, &mut w)?,
        Command::Irf => irf(cfg, &mut w)?,
    }
    Ok(w.written)
}

#[derive(Serialize)]
struct IngestSummary<'a> {
    rows: usize,
    start: YearMonth,
    end: YearMonth,
    target: &'a str,
    columns: &'a [String],
    warnings: &'a [AlignWarning],
}

fn ingest(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let ds = load_dataset(cfg)?;
    let a = align(&ds.target, &ds.predictors)?;
    let d = &a.design;
    let target = TimeSeries::from_dated(d.target_name(), d.dates(), d.target())?;
    let mut cols = vec![target];
    for (j, name) in d.column_names().iter().enumerate() {
        cols.push(TimeSeries::from_dated(name, d.dates(), &d.column(j))?);
    }
    w.csv("aligned.csv", |b| write_series_csv(b, &cols.iter().collect::<Vec<_>>()))?;
    w.json(
        "ingest.json",
        IngestSummary {
            rows: d.n(),
            start: d.dates()[0],
            end: *d.dates().last().unwrap(),
            target: d.target_name(),
            columns: d.column_names(),
            warnings: &a.warnings,
        },
    )
}

fn diagnose(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let ds = load_dataset(cfg)?;
    let mut reports: Vec<(String, DiagnosticsReport)> = Vec::new();
    for s in std::iter::once(&ds.target).chain(&ds.predictors) {
        reports.push((s.name().to_string(), diagnostics(s, None)?));
    }
    w.csv("diagnostics.csv", |b| {
        let mut c = csv::Writer::from_writer(b);
        let na = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| v.to_string());
        let err = |e: csv::Error| Error::Io {
            path: "diagnostics.csv".into(),
            source: std::io::Error::other(e),
        };
        c.write_record(["series", "n", "min", "q1", "median", "mean", "q3", "max", "sd", "cov", "entropy", "skewness", "kurtosis", "hurst"])
            .map_err(err)?;
        for (name, r) in &reports {
            c.write_record([
                name.clone(),
                r.n.to_string(),
                r.min.to_string(),
                r.q1.to_string(),
                r.median.to_string(),
                r.mean.to_string(),
                r.q3.to_string(),
                r.max.to_string(),
                r.sd.to_string(),
                r.cov.to_string(),
                r.entropy.to_string(),
                na(r.skewness),
                na(r.excess_kurtosis),
                na(r.hurst),
            ])
            .map_err(err)?;
        }
        c.flush().map_err(|source| Error::Io {
            path: "diagnostics.csv".into(),
            source,
        })
    })?;
    let map: BTreeMap<&str, &DiagnosticsReport> = reports.iter().map(|(n, r)| (n.as_str(), r)).collect();
    w.json("diagnostics.json", map)
}

#[derive(Serialize)]
struct ScreenArtifact<'a> {
    report: &'a CausalReport,
    retained: Vec<String>,
    warnings: &'a [AlignWarning],
}

fn screen(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let ds = load_dataset(cfg)?;
    let a = align(&ds.train_target(cfg.data.train_end)?, &ds.predictors)?;
    let report = screen_all(&a.design, &cfg.screen);
    w.csv("screen.csv", |b| report.write_csv(b))?;
    w.json(
        "screen.json",
        ScreenArtifact {
            retained: report.retained(),
            report: &report,
            warnings: &a.warnings,
        },
    )
}

/// Fits the configured model on the training sample.
pub fn fit_model(cfg: &RunConfig) -> Result<(PosteriorDraws, Dataset)> {
    let ds = load_dataset(cfg)?;
    let y = ds.train_target(cfg.data.train_end)?;
    let data = if ds.predictors.is_empty() {
        FitData::univariate(&y)
    } else {
        FitData::from(align(&y, &ds.predictors)?.design.model_inputs())
    };
    let post = fit(&cfg.model.resolved(), &data, &cfg.mcmc)?;
    Ok((post, ds))
}

fn write_fit(post: &PosteriorDraws, w: &mut Writer) -> Result<()> {
    let summary = FitSummary::new(post)?;
    w.csv("inclusion.csv", |b| {
        let mut c = csv::Writer::from_writer(b);
        let err = |e: csv::Error| Error::Io {
            path: "inclusion.csv".into(),
            source: std::io::Error::other(e),
        };
        c.write_record(["variable", "probability", "mean_beta_if_included"]).map_err(err)?;
        for i in &summary.inclusion {
            let beta = i.mean_beta_if_included.map_or_else(|| "NA".to_string(), |v| v.to_string());
            c.write_record([i.name.clone(), i.probability.to_string(), beta]).map_err(err)?;
        }
        c.flush().map_err(|source| Error::Io {
            path: "inclusion.csv".into(),
            source,
        })
    })?;
    w.csv("draws.csv", |b| write_draws_csv(post, b))?;
    w.json("fit.json", &summary)
}

/// Forecasts `cfg.forecast.horizon` months past the fitted sample, reading
/// future predictor values from the data.
pub fn forecast_from(cfg: &RunConfig, post: &PosteriorDraws, ds: &Dataset) -> Result<ForecastResult> {
    let h = cfg.forecast.horizon;
    let x = if post.n_predictors() == 0 {
        None
    } else {
        let start = post.start.ok_or_else(|| Error::InsufficientData("fit carries no dates".into()))?;
        let first = start.add_months(post.n as i64);
        let mut x = DMatrix::zeros(h, post.n_predictors());
        for (j, name) in post.predictor_names.iter().enumerate() {
            let s = ds.series(name)?;
            for i in 0..h {
                let date = first.add_months(i as i64);
                x[(i, j)] = s.get(date).ok_or_else(|| {
                    Error::InsufficientData(format!("predictor {name:?} unobserved at {date}; forecasts need future predictor values"))
                })?;
            }
        }
        Some(x)
    };
    forecast(post, x.as_ref(), h, cfg.forecast.level, cfg.seed)
}

fn write_forecast(f: &ForecastResult, w: &mut Writer) -> Result<()> {
    if let Some(start) = f.start {
        let cols = [("mean", &f.mean), ("median", &f.median), ("lower", &f.lower), ("upper", &f.upper)]
            .into_iter()
            .map(|(n, v)| TimeSeries::from_values(n, start, v))
            .collect::<Result<Vec<_>>>()?;
        w.csv("forecast.csv", |b| write_series_csv(b, &cols.iter().collect::<Vec<_>>()))?;
    }
    w.json("forecast.json", f)
}

#[derive(Serialize)]
struct ModelMetrics {
    model: String,
    metrics: MetricReport,
}

#[derive(Serialize)]
struct Evaluation {
    metrics: Vec<ModelMetrics>,
    murphy: MurphyCurve,
    difference: Option<(String, String, MurphyDifference)>,
    mcb: Option<McbResult>,
}

fn read_mcb_errors(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let schema = |e: csv::Error| Error::Schema(format!("{}: {e}", path.display()));
    let header = r.headers().map_err(schema)?.clone();
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(schema)?;
        let row = rec
            .iter()
            .skip(1)
            .enumerate()
            .map(|(j, c)| {
                c.trim().parse::<f64>().map_err(|_| Error::Cell {
                    row: i + 1,
                    column: names.get(j).cloned().unwrap_or_default(),
                    message: format!("not a number: {c:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != names.len() {
            return Err(Error::Schema(format!("{}: row {} has {} values for {} models", path.display(), i + 1, row.len(), names.len())));
        }
        rows.push(row);
    }
    let m = DMatrix::from_fn(rows.len(), names.len(), |i, j| rows[i][j]);
    Ok((names, m))
}

fn evaluate(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let e = &cfg.eval;
    let path = e.forecasts.as_ref().ok_or_else(|| Error::Config("no forecasts file (set eval.forecasts)".into()))?;
    let ds = load_dataset(cfg)?;
    let columns = read_csv(fs::File::open(path).map_err(io_err(path))?, None)?;
    let models: Vec<&TimeSeries> = if e.models.is_empty() {
        columns.iter().collect()
    } else {
        e.models
            .iter()
            .map(|m| {
                columns
                    .iter()
                    .find(|s| s.name() == m)
                    .ok_or_else(|| Error::Schema(format!("forecast column {m:?} not found")))
            })
            .collect::<Result<_>>()?
    };
    if models.is_empty() {
        return Err(Error::Schema("forecast file has no model columns".into()));
    }
    let first = models[0];
    let dates: Vec<YearMonth> = (0..first.len()).map(|i| first.date(i)).collect();
    let actual: Vec<f64> = dates
        .iter()
        .map(|d| ds.target.get(*d).ok_or_else(|| Error::Alignment(format!("target unobserved at forecast month {d}"))))
        .collect::<Result<_>>()?;
    let train: Vec<f64> = if dates[0] > ds.target.start() {
        ds.target.slice(None, Some(dates[0].add_months(-1)))?.observed()
    } else {
        Vec::new()
    };
    let mut named = Vec::new();
    for m in &models {
        let f: Vec<f64> = dates
            .iter()
            .map(|d| m.get(*d).ok_or_else(|| Error::Alignment(format!("model {:?} has no forecast for {d}", m.name()))))
            .collect::<Result<_>>()?;
        named.push((m.name().to_string(), f));
    }
    let reports: Vec<(String, MetricReport)> = named
        .iter()
        .map(|(n, f)| Ok((n.clone(), metrics(&actual, f, &train)?)))
        .collect::<Result<_>>()?;
    let pooled: Vec<f64> = actual.iter().chain(named.iter().flat_map(|(_, f)| f)).copied().collect();
    let grid = theta_grid(&pooled, e.theta_points, e.theta_pad)?;
    let curve = murphy_scores(&actual, &named, &grid)?;
    let pair = match &e.compare {
        Some([a, b]) => Some((a.clone(), b.clone())),
        None if named.len() >= 2 => Some((named[0].0.clone(), named[1].0.clone())),
        None => None,
    };
    let difference = match pair {
        Some((a, b)) => {
            let get = |n: &str| {
                named
                    .iter()
                    .find(|(m, _)| m == n)
                    .map(|(_, f)| f)
                    .ok_or_else(|| Error::Config(format!("compare names unknown model {n:?}")))
            };
            let d = murphy_difference(&actual, get(&a)?, get(&b)?, &grid)?;
            Some((a, b, d))
        }
        None => None,
    };
    let mcb = match &e.mcb_errors {
        Some(p) => {
            let (names, m) = read_mcb_errors(p)?;
            Some(mcb(&m, &names, e.mcb_alpha)?)
        }
        None => None,
    };
    w.csv("metrics.csv", |b| write_metrics_csv(&reports, b))?;
    w.csv("murphy.csv", |b| {
        let mut c = csv::Writer::from_writer(b);
        let err = |e: csv::Error| Error::Io {
            path: "murphy.csv".into(),
            source: std::io::Error::other(e),
        };
        let mut header = vec!["theta".to_string()];
        header.extend(curve.models.iter().cloned());
        c.write_record(&header).map_err(err)?;
        for (i, th) in curve.theta.iter().enumerate() {
            let mut rec = vec![th.to_string()];
            rec.extend(curve.scores.iter().map(|s| s[i].to_string()));
            c.write_record(&rec).map_err(err)?;
        }
        c.flush().map_err(|source| Error::Io {
            path: "murphy.csv".into(),
            source,
        })
    })?;
    w.json(
        "evaluation.json",
        Evaluation {
            metrics: reports.into_iter().map(|(model, metrics)| ModelMetrics { model, metrics }).collect(),
            murphy: curve,
            difference,
            mcb,
        },
    )
}

fn irf(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let ds = load_dataset(cfg)?;
    let ic = &cfg.irf;
    if ic.shocks.is_empty() {
        return Err(Error::Config("no shock variables (set irf.shocks)".into()));
    }
    let response = ds.series(ic.response.as_deref().unwrap_or(ds.target.name()))?;
    let mut panels: Vec<IrfResult> = Vec::new();
    for shock in &ic.shocks {
        let mut others = vec![ds.series(shock)?.clone()];
        for c in &ic.controls {
            others.push(ds.series(c)?.clone());
        }
        let a = align(response, &others)?;
        let d = &a.design;
        let col = |name: &str| {
            d.column_names()
                .iter()
                .position(|n| n == name)
                .map(|j| d.column(j))
                .ok_or_else(|| Error::Alignment(format!("{name:?} dropped during alignment (constant over the sample)")))
        };
        let s = col(shock)?;
        let controls: Vec<Vec<f64>> = ic.controls.iter().map(|c| col(c)).collect::<Result<_>>()?;
        let refs: Vec<&[f64]> = controls.iter().map(Vec::as_slice).collect();
        panels.push(lp_irf(d.target(), &s, &refs, (shock, response.name()), &ic.controls, &ic.lp)?);
    }
    w.csv("irf.csv", |b| {
        let mut c = csv::Writer::from_writer(b);
        let err = |e: csv::Error| Error::Io {
            path: "irf.csv".into(),
            source: std::io::Error::other(e),
        };
        c.write_record(["shock", "response", "h", "point", "se", "lower", "upper"]).map_err(err)?;
        for p in &panels {
            for q in &p.points {
                c.write_record([
                    p.shock.clone(),
                    p.response.clone(),
                    q.h.to_string(),
                    q.point.to_string(),
                    q.se.to_string(),
                    q.lower.to_string(),
                    q.upper.to_string(),
                ])
                .map_err(err)?;
            }
        }
        c.flush().map_err(|source| Error::Io {
            path: "irf.csv".into(),
            source,
        })
    })?;
    w.json("irf.json", &panels)
}
