use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, ValueEnum};
use hrv_core::angular::top_k_angles;
use hrv_core::dataio::{self, ReturnKind};
use hrv_core::hrv::{self, branch_distances, branch_transform, Alpha0Mode, MarginalEstimator};
use hrv_core::risk::{self, RatioStudyConfig, Threshold, WedgeChoice};
use hrv_core::simgen::{self, Model, SimConfig};
use hrv_core::tailest;
use hrv_core::{Branch, DetectConfig, HrvReport, RiskQuery, Wedge};
use serde::Serialize;

use crate::args::{parse_pair, parse_quantiles, usage, KSelection, Output, SampleInput, SeedArg, WedgeArgs};

fn write_json<T: Serialize>(value: &T, out: &Output) -> anyhow::Result<()> {
    let mut w = out.writer()?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    /// Full dependence on the diagonal.
    Example1,
    /// Strong dependence on the wedge of angles [0.4, 0.6].
    Example2,
}

pub fn simulate(a: SimulateArgs) -> anyhow::Result<()> {
    let model = match a.model {
        ModelArg::Example1 => Model::Example1,
        ModelArg::Example2 => Model::Example2,
    };
    let sample = simgen::simulate(&SimConfig { n: a.n, seed: a.seed.seed, model })
        .map_err(|e| usage(e.to_string()))?;
    dataio::write_sample_to(&sample, a.out.writer()?)?;
    Ok(())
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Above,
    Below,
    Both,
}

impl BranchArg {
    fn branches(self) -> &'static [Branch] {
        match self {
            BranchArg::Above => &[Branch::AboveWedge],
            BranchArg::Below => &[Branch::BelowWedge],
            BranchArg::Both => &Branch::BOTH,
        }
    }
}

/// Univariate data for the tail estimators: one column, or the distances of
/// a bivariate sample to a wedge when `--branch` is given.
#[derive(Args)]
pub struct TailInput {
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Zero-based column for univariate input.
    #[arg(long, default_value_t = 0, conflicts_with = "branch")]
    column: usize,
    /// Use distances to the wedge on this side instead of a column.
    #[arg(long, value_enum)]
    branch: Option<BranchArg>,
    /// Columns of the bivariate sample when `--branch` is given.
    #[arg(long, value_name = "C1,C2", default_value = "0,1", value_parser = parse_pair::<usize>)]
    cols: (usize, usize),
    #[command(flatten)]
    wedge: WedgeArgs,
}

impl TailInput {
    fn read(&self) -> anyhow::Result<Vec<f64>> {
        match self.branch {
            None => Ok(dataio::read_column_csv(&self.input, self.column)?),
            Some(b) => {
                let points = dataio::read_xy_csv_columns(&self.input, self.cols)?;
                let w = self.wedge.resolve(&points)?;
                Ok(b.branches()
                    .iter()
                    .flat_map(|&br| branch_distances(&points, &w, br))
                    .collect())
            }
        }
    }
}

#[derive(Args)]
pub struct TailArgs {
    #[command(flatten)]
    input: TailInput,
    #[command(flatten)]
    k: KSelection,
    #[command(flatten)]
    out: Output,
}

pub enum TailEstimator {
    Hill,
    Qq,
}

pub fn hill(a: TailArgs, est: TailEstimator) -> anyhow::Result<()> {
    let data = a.input.read()?;
    if let Some(k) = a.k.k {
        let v = match est {
            TailEstimator::Hill => tailest::hill(&data, k)?,
            TailEstimator::Qq => tailest::qq_slope(&data, k)?,
        };
        writeln!(a.out.writer()?, "{v}")?;
        return Ok(());
    }
    let positive = tailest::positive_descending(&data).len();
    let ks = a.k.grid(positive.saturating_sub(1))?;
    let curve = match est {
        TailEstimator::Hill => tailest::hill_curve(&data, &ks)?,
        TailEstimator::Qq => tailest::qq_curve(&data, &ks)?,
    };
    dataio::write_curve_to(&curve, a.out.writer()?)?;
    Ok(())
}

#[derive(Args)]
pub struct AltHillArgs {
    #[command(flatten)]
    input: TailInput,
    #[arg(long, default_value_t = 0.10)]
    theta_min: f64,
    #[arg(long, default_value_t = 0.95)]
    theta_max: f64,
    #[arg(long, default_value_t = 0.01)]
    theta_step: f64,
    #[command(flatten)]
    out: Output,
}

pub fn althill(a: AltHillArgs) -> anyhow::Result<()> {
    if !(a.theta_step > 0.0 && a.theta_min <= a.theta_max) {
        return Err(usage("theta grid needs theta_min <= theta_max and a positive step"));
    }
    let steps = ((a.theta_max - a.theta_min) / a.theta_step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| a.theta_min + i as f64 * a.theta_step)
        .collect();
    let data = a.input.read()?;
    let curve = tailest::alt_hill_curve(&data, &grid).map_err(|e| match e {
        hrv_core::Error::InvalidArgument(m) => usage(m),
        e => e.into(),
    })?;
    dataio::write_curve_to(&curve, a.out.writer()?)?;
    Ok(())
}

#[derive(Args)]
pub struct HillishArgs {
    /// CSV with xi and eta columns, or a bivariate sample with `--branch`.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    #[arg(long, value_name = "C1,C2", default_value = "0,1", value_parser = parse_pair::<usize>)]
    cols: (usize, usize),
    /// Derive `(xi, eta)` from the points on this side of the wedge.
    #[arg(long, value_enum)]
    branch: Option<SideArg>,
    #[command(flatten)]
    wedge: WedgeArgs,
    /// Break ties in eta with tiny seeded noise.
    #[arg(long)]
    jitter_seed: Option<u64>,
    #[command(flatten)]
    k: KSelection,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Above,
    Below,
}

pub fn hillish(a: HillishArgs) -> anyhow::Result<()> {
    let (xi, eta) = match a.branch {
        None => {
            let s = dataio::read_xy_csv_columns(&a.input, a.cols)?;
            (s.iter().map(|p| p.x1).collect::<Vec<_>>(), s.iter().map(|p| p.x2).collect())
        }
        Some(side) => {
            let points = dataio::read_xy_csv_columns(&a.input, a.cols)?;
            let w = a.wedge.resolve(&points)?;
            let branch = match side {
                SideArg::Above => Branch::AboveWedge,
                SideArg::Below => Branch::BelowWedge,
            };
            let d = branch_transform(&points, &w, branch)?;
            (d.xi, d.eta)
        }
    };
    let eta = match a.jitter_seed {
        Some(seed) => tailest::jitter_ties(&eta, seed),
        None => eta,
    };
    if let Some(k) = a.k.k {
        let pos = tailest::hillish(&xi, &eta, k)?;
        let neg_eta: Vec<f64> = eta.iter().map(|v| -v).collect();
        let neg = tailest::hillish(&xi, &neg_eta, k)?;
        writeln!(a.out.writer()?, "{pos},{neg}")?;
        return Ok(());
    }
    let ks = a.k.grid(xi.len())?;
    let (pos, neg) = tailest::hillish_pair_curve(&xi, &eta, &ks)?;
    let k_col: Vec<f64> = pos.entries().iter().map(|e| e.k as f64).collect();
    let pos_col: Vec<f64> = pos.values().collect();
    let neg_col: Vec<f64> = neg.values().collect();
    dataio::write_columns_to(&["k", "eta", "neg_eta"], &[&k_col, &pos_col, &neg_col], a.out.writer()?)?;
    Ok(())
}

#[derive(Args)]
pub struct DiamondArgs {
    #[command(flatten)]
    input: SampleInput,
    /// Number of largest L1 norms to keep.
    #[arg(long, default_value_t = 200)]
    k_angles: usize,
    #[command(flatten)]
    out: Output,
}

pub fn diamond(a: DiamondArgs) -> anyhow::Result<()> {
    let points = a.input.read()?;
    let angles = top_k_angles(&points, a.k_angles)?;
    dataio::write_angles_to(&angles, a.out.writer()?)?;
    Ok(())
}

#[derive(Args)]
pub struct WedgeFitArgs {
    #[command(flatten)]
    input: SampleInput,
    #[arg(long, default_value_t = 200)]
    k_angles: usize,
    #[arg(long, value_name = "LOW,HIGH", default_value = "0.05,0.95", value_parser = parse_quantiles)]
    q: (f64, f64),
    #[command(flatten)]
    out: Output,
}

#[derive(Serialize)]
struct WedgeFitOutput {
    k_angles: usize,
    /// Angles in the open first quadrant that entered the quantiles.
    angles_used: usize,
    q_low: f64,
    q_high: f64,
    a_l: f64,
    a_u: f64,
    theta_l: f64,
    theta_u: f64,
    valid: bool,
    degenerate: bool,
}

pub fn wedge_fit(a: WedgeFitArgs) -> anyhow::Result<()> {
    let points = a.input.read()?;
    let wa = WedgeArgs { al: None, au: None, k_angles: a.k_angles, q: a.q };
    let fit = wa.fit(&points)?;
    let used = top_k_angles(&points, a.k_angles)?.first_quadrant_thetas().len();
    write_json(
        &WedgeFitOutput {
            k_angles: a.k_angles,
            angles_used: used,
            q_low: a.q.0,
            q_high: a.q.1,
            a_l: fit.wedge.a_l(),
            a_u: fit.wedge.a_u(),
            theta_l: fit.theta_l,
            theta_u: fit.theta_u,
            valid: fit.valid,
            degenerate: fit.degenerate,
        },
        &a.out,
    )
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Hill,
    Qq,
}

#[derive(Clone, Copy, ValueEnum)]
enum Alpha0ModeArg {
    Pooled,
    PerBranch,
}

/// Flags override the configuration loaded with `--config`.
#[derive(Args)]
pub struct DetectArgs {
    #[command(flatten)]
    input: SampleInput,
    /// Detection config, or a previous report whose embedded config is reused.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long)]
    al: Option<f64>,
    #[arg(long)]
    au: Option<f64>,
    #[arg(long)]
    k_angles: Option<usize>,
    /// Angle quantiles for the fitted wedge; ignored when --al/--au are given.
    #[arg(long, value_name = "LOW,HIGH", value_parser = parse_quantiles)]
    q: Option<(f64, f64)>,
    #[arg(long)]
    k_marginal: Option<usize>,
    #[arg(long, value_enum)]
    estimator: Option<EstimatorArg>,
    #[arg(long)]
    k_alpha0: Option<usize>,
    #[arg(long, value_enum)]
    alpha0_mode: Option<Alpha0ModeArg>,
    /// Hillish summaries over `k` in `[lo·n, hi·n]`.
    #[arg(long, value_name = "LO,HI", value_parser = parse_pair::<f64>)]
    stable_range: Option<(f64, f64)>,
    #[arg(long)]
    hillish_step: Option<usize>,
    #[arg(long)]
    alpha_margin: Option<f64>,
    #[arg(long)]
    hillish_band: Option<f64>,
    #[arg(long)]
    jitter_seed: Option<u64>,
    /// Also write the empirical hidden angular measure as CSV.
    #[arg(long, value_name = "PATH")]
    measure_out: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

fn load_config(path: &PathBuf) -> anyhow::Result<DetectConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let inner = match value.get("config") {
        Some(c) if value.get("schema_version").is_some() => c.clone(),
        _ => value,
    };
    Ok(serde_json::from_value(inner)?)
}

impl DetectArgs {
    fn resolve(&self) -> anyhow::Result<DetectConfig> {
        let mut c = match &self.config {
            Some(p) => load_config(p)?,
            None => DetectConfig::default(),
        };
        match (self.al, self.au) {
            (Some(a_l), Some(a_u)) => {
                c.wedge = Some(Wedge::new(a_l, a_u).map_err(|e| usage(e.to_string()))?)
            }
            (None, None) => {}
            _ => return Err(usage("--al and --au must be given together")),
        }
        if let Some(q) = self.q {
            (c.q_low, c.q_high) = q;
            if self.al.is_none() {
                c.wedge = None;
            }
        }
        if let Some(v) = self.k_angles {
            c.k_angles = v;
        }
        if let Some(v) = self.k_marginal {
            c.k_marginal = Some(v);
        }
        if let Some(v) = self.estimator {
            c.marginal_estimator = match v {
                EstimatorArg::Hill => MarginalEstimator::Hill,
                EstimatorArg::Qq => MarginalEstimator::Qq,
            };
        }
        if let Some(v) = self.k_alpha0 {
            c.k_alpha0 = Some(v);
        }
        if let Some(v) = self.alpha0_mode {
            c.alpha0_mode = match v {
                Alpha0ModeArg::Pooled => Alpha0Mode::Pooled,
                Alpha0ModeArg::PerBranch => Alpha0Mode::PerBranch,
            };
        }
        if let Some(v) = self.stable_range {
            c.stable_range = v;
        }
        if let Some(v) = self.hillish_step {
            c.hillish_step = Some(v);
        }
        if let Some(v) = self.alpha_margin {
            c.alpha_margin = v;
        }
        if let Some(v) = self.hillish_band {
            c.hillish_band = v;
        }
        if let Some(v) = self.jitter_seed {
            c.jitter_seed = Some(v);
        }
        if !(0.0..1.0).contains(&c.q_low) || !(c.q_low < c.q_high && c.q_high <= 1.0) {
            return Err(usage(format!(
                "quantile pair must satisfy 0 <= low < high <= 1, got ({}, {})",
                c.q_low, c.q_high
            )));
        }
        let (lo, hi) = c.stable_range;
        if !(lo > 0.0 && lo <= hi && hi < 1.0) {
            return Err(usage(format!("stable range must satisfy 0 < lo <= hi < 1, got ({lo}, {hi})")));
        }
        Ok(c)
    }
}

pub fn hrv_detect(a: DetectArgs) -> anyhow::Result<()> {
    let config = a.resolve()?;
    let points = a.input.read()?;
    let report: HrvReport = hrv::detect(&points, &config)?;
    if let (Some(path), Some(s0)) = (&a.measure_out, &report.s0) {
        dataio::write_measure(s0, path)?;
    }
    dataio::write_report_to(&report, a.out.writer()?)?;
    Ok(())
}

#[derive(Args)]
pub struct RiskArgs {
    #[command(flatten)]
    input: SampleInput,
    #[command(flatten)]
    wedge: WedgeArgs,
    /// Slope of the half-plane boundary `x2 - c·x1 = x`.
    #[arg(long)]
    c: f64,
    /// Threshold.
    #[arg(long)]
    x: f64,
    /// Fix the distance threshold b0 and derive k (the default, with b0 = 2).
    #[arg(long, conflicts_with = "k")]
    b0: Option<f64>,
    /// Use the k farthest points; b0 is the k-th distance.
    #[arg(long)]
    k: Option<usize>,
    /// Known hidden index; estimated by Hill on the distances otherwise.
    #[arg(long)]
    alpha0: Option<f64>,
    /// Order statistics for estimating alpha0; defaults to 2% of the sample.
    #[arg(long, conflicts_with = "alpha0")]
    k_alpha0: Option<usize>,
    #[command(flatten)]
    out: Output,
}

#[derive(Serialize)]
struct RiskOutput {
    query: RiskQuery,
    wedge: Wedge,
    #[serde(flatten)]
    estimate: hrv_core::RiskEstimate,
}

pub fn risk(a: RiskArgs) -> anyhow::Result<()> {
    let query = RiskQuery::new(a.c, a.x).map_err(|e| usage(e.to_string()))?;
    let points = a.input.read()?;
    let w = a.wedge.resolve(&points)?;
    let threshold = match (a.k, a.b0) {
        (Some(k), _) => Threshold::Count(k),
        (None, b0) => Threshold::Distance(b0.unwrap_or(2.0)),
    };
    let alpha0 = match a.alpha0 {
        Some(v) => v,
        None => {
            let k = a.k_alpha0.unwrap_or_else(|| hrv::default_k(points.len()));
            hrv::estimate_alpha0(&points, &w, k, &Branch::BOTH)?
        }
    };
    let estimate = risk::risk_estimate(&points, &w, &query, alpha0, threshold)?;
    if estimate.above_one {
        eprintln!("warning: estimate {} exceeds 1; the asymptotic formula is outside its range", estimate.p_hat);
    }
    write_json(&RiskOutput { query, wedge: w, estimate }, &a.out)
}

#[derive(Args)]
pub struct RatioStudyArgs {
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[command(flatten)]
    seed: SeedArg,
    /// Distance threshold b0; k follows from it in each replication.
    #[arg(long, conflicts_with = "k")]
    b0: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// Fixed wedge for both estimates; the estimated one is fitted otherwise.
    #[arg(long, requires = "au")]
    al: Option<f64>,
    #[arg(long, requires = "al")]
    au: Option<f64>,
    #[arg(long, default_value_t = 100)]
    k_angles: usize,
    #[arg(long, value_name = "LOW,HIGH", default_value = "0.05,0.95", value_parser = parse_quantiles)]
    q: (f64, f64),
    #[arg(long)]
    k_alpha0: Option<usize>,
    #[arg(long, value_name = "X,...", default_value = "1,4", value_delimiter = ',')]
    xs: Vec<f64>,
    /// Per-replication ratios as CSV.
    #[arg(long, value_name = "PATH")]
    rows_out: Option<PathBuf>,
    /// Summary CSV; standard output when omitted.
    #[command(flatten)]
    out: Output,
}

pub fn ratio_study(a: RatioStudyArgs) -> anyhow::Result<()> {
    let mut config = match (a.al, a.au) {
        (Some(a_l), Some(a_u)) => {
            RatioStudyConfig::with_wedge(Wedge::new(a_l, a_u).map_err(|e| usage(e.to_string()))?)
        }
        _ => RatioStudyConfig {
            estimated_wedge: WedgeChoice::Fitted {
                k_angles: a.k_angles,
                q_low: a.q.0,
                q_high: a.q.1,
            },
            ..RatioStudyConfig::default()
        },
    };
    config.seed = a.seed.seed;
    config.k_alpha0 = a.k_alpha0;
    config.threshold = match (a.k, a.b0) {
        (Some(k), _) => Threshold::Count(k),
        (None, b0) => Threshold::Distance(b0.unwrap_or(2.0)),
    };
    config.xs = a.xs.clone();
    if config.xs.iter().any(|x| x.is_nan() || *x <= 0.0) {
        return Err(usage("thresholds must be positive"));
    }
    if a.reps == 0 {
        return Err(usage("--reps must be at least 1"));
    }
    let table = risk::ratio_study(a.reps, a.n, &config)?;
    if table.wedge_conflicts > 0 {
        eprintln!(
            "warning: {} of {} estimated wedges had a_u >= c for some query",
            table.wedge_conflicts, a.reps
        );
    }
    if let Some(p) = &a.rows_out {
        dataio::write_study_rows_to(&table, std::fs::File::create(p)?)?;
    }
    dataio::write_study_summary_to(&table, a.out.writer()?)?;
    Ok(())
}

#[derive(Args)]
pub struct DegreesArgs {
    /// Edge list: `src dst` per line, whitespace or comma separated.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    #[command(flatten)]
    out: Output,
}

pub fn degrees(a: DegreesArgs) -> anyhow::Result<()> {
    let records = dataio::edges_to_degrees(&a.input)?;
    dataio::write_degrees_to(&records, a.out.writer()?)?;
    Ok(())
}

#[derive(Args)]
pub struct ReturnsArgs {
    /// Price CSV; a non-numeric first row is treated as a header.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Zero-based price columns; two columns give a bivariate sample `x1,x2`.
    #[arg(long, value_name = "C[,C2]", default_value = "0", value_delimiter = ',')]
    cols: Vec<usize>,
    /// Log returns instead of simple returns.
    #[arg(long)]
    log: bool,
    #[command(flatten)]
    out: Output,
}

pub fn returns(a: ReturnsArgs) -> anyhow::Result<()> {
    if a.cols.is_empty() || a.cols.len() > 2 {
        return Err(usage("--cols takes one or two columns"));
    }
    let kind = if a.log { ReturnKind::Log } else { ReturnKind::Simple };
    let file = std::fs::File::open(&a.input)
        .map_err(|_| hrv_core::Error::FileNotFound(a.input.clone()))?;
    let rows = dataio::read_numeric_columns(file, &a.cols)?;
    let series = (0..a.cols.len())
        .map(|j| {
            let prices: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            dataio::prices_to_returns(&prices, kind).map(|s| s.returns)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let names: &[&str] = if series.len() == 2 { &["x1", "x2"] } else { &["r"] };
    let cols: Vec<&[f64]> = series.iter().map(Vec::as_slice).collect();
    dataio::write_columns_to(names, &cols, a.out.writer()?)?;
    Ok(())
}

