//! Argument groups shared by several subcommands.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::Args;
use hrv_core::angular::{fit_wedge_from_thetas, top_k_angles};
use hrv_core::dataio;
use hrv_core::{Point2, Sample2, Wedge, WedgeFit};

/// Invalid flag combination detected after parsing; exits with status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn parse_pair<T: std::str::FromStr>(s: &str) -> Result<(T, T), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected two comma-separated values, got {s:?}"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<T>()
            .map_err(|_| format!("cannot parse {v:?}"))
    };
    Ok((parse(a)?, parse(b)?))
}

/// Quantile pair with `0 <= low < high <= 1`.
pub fn parse_quantiles(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = parse_pair::<f64>(s)?;
    if !((0.0..1.0).contains(&lo) && lo < hi && hi <= 1.0) {
        return Err(format!("need 0 <= low < high <= 1, got ({lo}, {hi})"));
    }
    Ok((lo, hi))
}

#[derive(Args, Clone)]
pub struct SampleInput {
    /// Bivariate CSV; a non-numeric first row is treated as a header.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Zero-based columns holding x1 and x2.
    #[arg(long, value_name = "C1,C2", default_value = "0,1", value_parser = parse_pair::<usize>)]
    pub cols: (usize, usize),
}

impl SampleInput {
    pub fn read(&self) -> anyhow::Result<Sample2> {
        Ok(dataio::read_xy_csv_columns(&self.input, self.cols)?)
    }
}

/// Explicit slopes win over fitting; fitting keeps the first-quadrant angles
/// of the `k_angles` largest L1 norms.
#[derive(Args, Clone)]
pub struct WedgeArgs {
    /// Lower wedge slope a_l.
    #[arg(long, requires = "au")]
    pub al: Option<f64>,
    /// Upper wedge slope a_u.
    #[arg(long, requires = "al")]
    pub au: Option<f64>,
    /// Number of largest L1 norms whose angles fit the wedge.
    #[arg(long, default_value_t = 200)]
    pub k_angles: usize,
    /// Angle quantiles for the fitted wedge. 0.05,0.95 follows the simulation
    /// study; 0.25,0.75 (interquartile) and 0.1,0.9 are used for the social
    /// network and stock return examples.
    #[arg(long, value_name = "LOW,HIGH", default_value = "0.05,0.95", value_parser = parse_quantiles)]
    pub q: (f64, f64),
}

impl WedgeArgs {
    pub fn explicit(&self) -> anyhow::Result<Option<Wedge>> {
        match (self.al, self.au) {
            (Some(a_l), Some(a_u)) => Ok(Some(
                Wedge::new(a_l, a_u).map_err(|e| usage(e.to_string()))?,
            )),
            _ => Ok(None),
        }
    }

    pub fn fit(&self, points: &[Point2]) -> anyhow::Result<WedgeFit> {
        let angles = top_k_angles(points, self.k_angles)?;
        Ok(fit_wedge_from_thetas(
            &angles.first_quadrant_thetas(),
            self.q.0,
            self.q.1,
        )?)
    }

    pub fn resolve(&self, points: &[Point2]) -> anyhow::Result<Wedge> {
        match self.explicit()? {
            Some(w) => Ok(w),
            None => Ok(self.fit(points)?.wedge),
        }
    }
}

#[derive(Args, Clone)]
pub struct Output {
    /// Destination file; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl Output {
    pub fn writer(&self) -> anyhow::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

#[derive(Args, Clone)]
pub struct SeedArg {
    /// Seed for every random draw.
    #[arg(long, env = "HRV_SEED", default_value_t = 1)]
    pub seed: u64,
}

/// A single `k` or a grid `k_min..=k_max` with step.
#[derive(Args, Clone)]
pub struct KSelection {
    /// Single order statistic count; prints one value.
    #[arg(long, conflicts_with_all = ["k_min", "k_max", "k_step"])]
    pub k: Option<usize>,
    #[arg(long)]
    pub k_min: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Defaults to a step giving about 200 grid points.
    #[arg(long)]
    pub k_step: Option<usize>,
}

impl KSelection {
    /// Grid bounded by `limit`, the largest admissible `k`.
    pub fn grid(&self, limit: usize) -> anyhow::Result<Vec<usize>> {
        let lo = self.k_min.unwrap_or(2);
        let hi = self.k_max.unwrap_or(limit);
        if lo == 0 || lo > hi {
            return Err(usage(format!("empty k range {lo}..={hi}")));
        }
        let step = self.k_step.unwrap_or(((hi - lo) / 200).max(1));
        if step == 0 {
            return Err(usage("k step must be positive"));
        }
        Ok(hrv_core::tailest::k_grid(lo, hi, step))
    }
}
