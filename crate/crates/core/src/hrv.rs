//! Hidden regular variation detection.
//!
//! After the wedge carrying the primary limit measure is removed, each side
//! of it is studied through a pair `(xi, eta)`:
//!
//! - above: `xi = (Z2 - a_u·Z1)/sqrt(1 + a_u²)`, `eta = Z2/Z1`
//! - below: `xi = (a_l·Z1 - Z2)/sqrt(1 + a_l²)`, `eta = Z1/Z2`
//!
//! `xi` is the distance to the wedge. Its tail index `alpha0` must be at
//! least the marginal index `alpha` for hidden regular variation, and the
//! pair must look like a product measure in its conditional extreme value
//! limit, which the Hillish curves for `eta` and `-eta` check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angular::{
    exceedances, fit_wedge_from_thetas, measure_from_exceedances, top_k_angles,
    EmpiricalAngularMeasure,
};
use crate::error::{Error, Result};
use crate::geometry::{dist_to_wedge, signed_excess, Branch, Point2, Wedge};
use crate::tailest::{self, EstimatorCurve};

pub const SCHEMA_VERSION: u32 = 1;

/// Branch coordinates of the points strictly on one side of the wedge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchData {
    pub branch: Branch,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
}

impl BranchData {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// Distances to the wedge of all points strictly on `branch`'s side,
/// including upper-half-plane points beyond the first quadrant that are
/// nearest to the upper ray.
pub fn branch_distances(points: &[Point2], w: &Wedge, branch: Branch) -> Vec<f64> {
    points
        .iter()
        .filter_map(|p| match dist_to_wedge(p, w) {
            Ok((d, b)) if b == branch && d > 0.0 => Some(d),
            _ => None,
        })
        .collect()
}

/// `(xi, eta)` for the points strictly on `branch`'s side whose slope ratio
/// is defined (`Z1 > 0` above, `Z2 > 0` below).
pub fn branch_transform(points: &[Point2], w: &Wedge, branch: Branch) -> Result<BranchData> {
    let mut xi = Vec::new();
    let mut eta = Vec::new();
    for p in points {
        let (num, den) = match branch {
            Branch::AboveWedge => (p.x2, p.x1),
            Branch::BelowWedge => (p.x1, p.x2),
        };
        if den <= 0.0 || w.branch_of(p) != Some(branch) {
            continue;
        }
        let x = signed_excess(p, w, branch);
        if x > 0.0 {
            xi.push(x);
            eta.push(num / den);
        }
    }
    if xi.is_empty() {
        return Err(Error::EmptyBranch(branch));
    }
    Ok(BranchData { branch, xi, eta })
}

/// Hill estimate of `alpha0` from the distances of the points on the given
/// sides of the wedge, pooled.
pub fn estimate_alpha0(points: &[Point2], w: &Wedge, k: usize, branches: &[Branch]) -> Result<f64> {
    let mut d = Vec::new();
    for &b in branches {
        d.extend(branch_distances(points, w, b));
    }
    if d.len() < k + 1 {
        return Err(Error::InsufficientExceedances {
            needed: k + 1,
            got: d.len(),
        });
    }
    tailest::hill(&d, k)
}

/// `k`-th largest distance to the wedge among points outside it, the
/// estimate of `b0(n/k)`.
pub fn estimate_b0(points: &[Point2], w: &Wedge, k: usize) -> Result<f64> {
    let ex = exceedances(points, w);
    if k == 0 || ex.len() < k {
        return Err(Error::InsufficientExceedances {
            needed: k.max(1),
            got: ex.len(),
        });
    }
    Ok(ex[k - 1].r)
}

/// Dual of [`estimate_b0`]: the number of points at distance `>= b0`.
pub fn implied_k(points: &[Point2], w: &Wedge, b0: f64) -> usize {
    exceedances(points, w).iter().filter(|g| g.r >= b0).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginalEstimator {
    Hill,
    Qq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alpha0Mode {
    /// One Hill estimate over both sides; drives both branch verdicts.
    Pooled,
    /// Separate Hill estimates per side.
    PerBranch,
}

/// Tunables for [`detect`]. `None` sizes resolve from the sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectConfig {
    /// Order statistics for the marginal index; default `floor(0.02·n)`.
    pub k_marginal: Option<usize>,
    pub marginal_estimator: MarginalEstimator,
    /// Number of largest L1 norms whose angles fit the wedge.
    pub k_angles: usize,
    pub q_low: f64,
    pub q_high: f64,
    /// Explicit wedge; wins over fitting.
    pub wedge: Option<Wedge>,
    /// Order statistics for `alpha0` and `b0`; default `floor(0.02·n)`.
    pub k_alpha0: Option<usize>,
    pub alpha0_mode: Alpha0Mode,
    /// Hillish summaries use `k` in `[floor(lo·n), floor(hi·n)]`.
    pub stable_range: (f64, f64),
    /// Step of the Hillish `k` grid; default spreads about 200 points.
    pub hillish_step: Option<usize>,
    /// HRV needs `alpha0 - alpha` above this.
    pub alpha_margin: f64,
    /// Hillish curves must stay within `1 ± band`.
    pub hillish_band: f64,
    /// Seed for breaking ties in `eta` with tiny noise; off when `None`.
    pub jitter_seed: Option<u64>,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            k_marginal: None,
            marginal_estimator: MarginalEstimator::Hill,
            k_angles: 200,
            q_low: 0.05,
            q_high: 0.95,
            wedge: None,
            k_alpha0: None,
            alpha0_mode: Alpha0Mode::Pooled,
            stable_range: (0.005, 0.05),
            hillish_step: None,
            alpha_margin: 0.3,
            hillish_band: 0.15,
            jitter_seed: None,
        }
    }
}

const RECOMMENDED_MIN_N: usize = 1000;

/// Default order-statistic count, `floor(0.02·n)` but at least 2.
pub fn default_k(n: usize) -> usize {
    (n / 50).max(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillishSummary {
    pub k_min: usize,
    pub k_max: usize,
    pub mean_eta: f64,
    pub mean_neg_eta: f64,
    pub max_dev_eta: f64,
    pub max_dev_neg_eta: f64,
    pub within_band: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillishRow {
    pub k: usize,
    pub eta: f64,
    pub neg_eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub branch: Branch,
    /// Points with defined `(xi, eta)` on this side.
    pub count: usize,
    pub alpha0: Option<f64>,
    pub hillish: Option<HillishSummary>,
    pub curve: Vec<HillishRow>,
    pub hrv_supported: bool,
    pub hrv_doubtful: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WedgeSource {
    Explicit,
    Fitted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrvReport {
    pub schema_version: u32,
    pub config: DetectConfig,
    pub n: usize,
    pub wedge: Wedge,
    pub wedge_source: WedgeSource,
    pub theta_l: f64,
    pub theta_u: f64,
    pub wedge_valid: bool,
    pub alpha_hat: f64,
    pub alpha_hat_x1: f64,
    pub alpha_hat_x2: f64,
    pub alpha0_pooled: Option<f64>,
    pub alpha0_above: Option<f64>,
    pub alpha0_below: Option<f64>,
    pub b0_hat: Option<f64>,
    pub k_used: usize,
    /// Angles of the `k_used` points farthest from the wedge.
    pub s0: Option<EmpiricalAngularMeasure>,
    pub branches: Vec<BranchReport>,
    pub flags: Vec<String>,
}

impl HrvReport {
    pub fn branch(&self, b: Branch) -> Option<&BranchReport> {
        self.branches.iter().find(|r| r.branch == b)
    }
}

fn marginal_index(values: &[f64], k: usize, est: MarginalEstimator) -> Result<f64> {
    match est {
        MarginalEstimator::Hill => tailest::hill(values, k),
        MarginalEstimator::Qq => tailest::qq_slope(values, k),
    }
}

fn summarize(curves: &(EstimatorCurve, EstimatorCurve), band: f64) -> Option<HillishSummary> {
    let (a, b) = curves;
    let first = a.entries().first()?;
    let last = a.entries().last()?;
    let mean = |c: &EstimatorCurve| c.values().sum::<f64>() / c.len() as f64;
    let max_dev = |c: &EstimatorCurve| c.values().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    let (dev_a, dev_b) = (max_dev(a), max_dev(b));
    Some(HillishSummary {
        k_min: first.k,
        k_max: last.k,
        mean_eta: mean(a),
        mean_neg_eta: mean(b),
        max_dev_eta: dev_a,
        max_dev_neg_eta: dev_b,
        within_band: dev_a <= band && dev_b <= band,
    })
}

struct BranchAnalysis {
    count: usize,
    curves: Option<(EstimatorCurve, EstimatorCurve)>,
}

fn analyze_branch(
    points: &[Point2],
    w: &Wedge,
    branch: Branch,
    n: usize,
    config: &DetectConfig,
) -> Result<BranchAnalysis> {
    let data = match branch_transform(points, w, branch) {
        Ok(d) => d,
        Err(Error::EmptyBranch(_)) => return Ok(BranchAnalysis { count: 0, curves: None }),
        Err(e) => return Err(e),
    };
    let m = data.len();
    let (lo, hi) = config.stable_range;
    let k_min = ((lo * n as f64).floor() as usize).max(2);
    let k_max = ((hi * n as f64).floor() as usize).min(m);
    if k_min > k_max {
        return Ok(BranchAnalysis { count: m, curves: None });
    }
    let step = config
        .hillish_step
        .unwrap_or(((k_max - k_min) / 200).max(1))
        .max(1);
    let ks = tailest::k_grid(k_min, k_max, step);
    let eta = match config.jitter_seed {
        Some(seed) => tailest::jitter_ties(&data.eta, seed),
        None => data.eta,
    };
    let curves = tailest::hillish_pair_curve(&data.xi, &eta, &ks)?;
    Ok(BranchAnalysis {
        count: m,
        curves: Some(curves),
    })
}

/// Runs the detection pipeline: marginal index, wedge, hidden index per
/// side, Hillish diagnostics and verdict flags.
pub fn detect(points: &[Point2], config: &DetectConfig) -> Result<HrvReport> {
    let n = points.len();
    let (lo, hi) = config.stable_range;
    if !(lo > 0.0 && lo <= hi && hi < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "stable range must satisfy 0 < lo <= hi < 1, got ({lo}, {hi})"
        )));
    }
    let mut flags = Vec::new();
    if n < RECOMMENDED_MIN_N {
        flags.push(format!(
            "sample size {n} is below the recommended {RECOMMENDED_MIN_N}"
        ));
    }

    let k_marginal = config.k_marginal.unwrap_or_else(|| default_k(n));
    let x1: Vec<f64> = points.iter().map(|p| p.x1).collect();
    let x2: Vec<f64> = points.iter().map(|p| p.x2).collect();
    let alpha_hat_x1 = marginal_index(&x1, k_marginal, config.marginal_estimator)?;
    let alpha_hat_x2 = marginal_index(&x2, k_marginal, config.marginal_estimator)?;
    let alpha_hat = 0.5 * (alpha_hat_x1 + alpha_hat_x2);

    let (wedge, wedge_source) = match config.wedge {
        Some(w) => (w, WedgeSource::Explicit),
        None => {
            let angles = top_k_angles(points, config.k_angles.min(n))?;
            let fit = fit_wedge_from_thetas(
                &angles.first_quadrant_thetas(),
                config.q_low,
                config.q_high,
            )?;
            if fit.degenerate {
                flags.push("fitted wedge collapsed to a single ray".to_string());
            }
            (fit.wedge, WedgeSource::Fitted)
        }
    };
    if !wedge.is_valid_for_equal_tails() {
        flags.push(format!(
            "wedge violates a_l <= 1 <= a_u ({}, {}); incompatible with tail-equivalent margins",
            wedge.a_l(),
            wedge.a_u()
        ));
    }
    let outside_domain = points
        .iter()
        .filter(|p| matches!(dist_to_wedge(p, &wedge), Err(Error::OutsideDomain { .. })))
        .count();
    if outside_domain > 0 {
        flags.push(format!(
            "{outside_domain} points outside the first quadrant and upper region were ignored"
        ));
    }

    let k_alpha0 = config.k_alpha0.unwrap_or_else(|| default_k(n));
    let side_estimate = |branches: &[Branch]| -> Option<f64> {
        let count: usize = branches
            .iter()
            .map(|&b| branch_distances(points, &wedge, b).len())
            .sum();
        if count < 3 {
            return None;
        }
        estimate_alpha0(points, &wedge, k_alpha0.min(count - 1), branches).ok()
    };
    let alpha0_pooled = side_estimate(&Branch::BOTH);
    let alpha0_above = side_estimate(&[Branch::AboveWedge]);
    let alpha0_below = side_estimate(&[Branch::BelowWedge]);

    let ex = exceedances(points, &wedge);
    let k_used = k_alpha0.min(ex.len().saturating_sub(1)).max(1);
    let s0 = if ex.is_empty() {
        flags.push("no exceedances: every point lies inside the wedge".to_string());
        None
    } else {
        Some(measure_from_exceedances(&ex, k_used)?)
    };
    let b0_hat = s0.as_ref().map(|m| m.threshold);

    let analyses = Branch::BOTH
        .par_iter()
        .map(|&b| analyze_branch(points, &wedge, b, n, config))
        .collect::<Result<Vec<_>>>()?;

    let mut branches = Vec::with_capacity(2);
    for (&branch, analysis) in Branch::BOTH.iter().zip(analyses) {
        let alpha0 = match config.alpha0_mode {
            Alpha0Mode::Pooled => alpha0_pooled,
            Alpha0Mode::PerBranch => match branch {
                Branch::AboveWedge => alpha0_above,
                Branch::BelowWedge => alpha0_below,
            },
        };
        let hillish = analysis
            .curves
            .as_ref()
            .and_then(|c| summarize(c, config.hillish_band));
        let curve: Vec<HillishRow> = analysis
            .curves
            .as_ref()
            .map(|(a, b)| {
                a.entries()
                    .iter()
                    .zip(b.entries())
                    .map(|(x, y)| HillishRow {
                        k: x.k,
                        eta: x.value,
                        neg_eta: y.value,
                    })
                    .collect()
            })
            .unwrap_or_default();

        let gap = alpha0.map(|a0| a0 - alpha_hat);
        let within = hillish.is_some_and(|h| h.within_band);
        let hrv_supported = gap.is_some_and(|g| g > config.alpha_margin) && within;
        let hrv_doubtful = gap.is_some_and(|g| g.abs() <= config.alpha_margin);

        if analysis.count == 0 {
            flags.push(format!("{branch}: no exceedances"));
        } else if hillish.is_none() {
            flags.push(format!(
                "{branch}: {} points, too few for the Hillish stable range",
                analysis.count
            ));
        }
        match gap {
            Some(g) if g < -config.alpha_margin => flags.push(format!(
                "{branch}: alpha0 below alpha by {:.3}; necessary condition alpha0 >= alpha fails",
                -g
            )),
            Some(_) if hrv_doubtful => flags.push(format!(
                "{branch}: alpha0 ≈ alpha (gap within {}); HRV doubtful",
                config.alpha_margin
            )),
            _ => {}
        }
        if let Some(h) = hillish {
            if !h.within_band {
                flags.push(format!(
                    "{branch}: Hillish curves leave 1 ± {} (max deviations {:.3}, {:.3})",
                    config.hillish_band, h.max_dev_eta, h.max_dev_neg_eta
                ));
            }
        }
        if hrv_supported {
            flags.push(format!("{branch}: HRV supported"));
        }
        branches.push(BranchReport {
            branch,
            count: analysis.count,
            alpha0,
            hillish,
            curve,
            hrv_supported,
            hrv_doubtful,
        });
    }

    Ok(HrvReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        n,
        wedge,
        wedge_source,
        theta_l: wedge.theta_l(),
        theta_u: wedge.theta_u(),
        wedge_valid: wedge.is_valid_for_equal_tails(),
        alpha_hat,
        alpha_hat_x1,
        alpha_hat_x2,
        alpha0_pooled,
        alpha0_above,
        alpha0_below,
        b0_hat,
        k_used,
        s0,
        branches,
        flags,
    })
}
