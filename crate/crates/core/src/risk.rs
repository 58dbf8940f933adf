//! Rare-event probabilities for half-planes `{z : z2 - c·z1 > x}` with
//! `c > a_u`. Such regions miss the wedge, so the first-order MRV limit gives
//! them zero mass; the hidden regime gives
//!
//! `p_hat(x) = x^-alpha0 · (k/n) · b0^alpha0 · (1/k) Σ (mu2 - c·mu1)_+^alpha0`
//!
//! over the atoms `mu` of the empirical hidden angular measure.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angular::{exceedances, fit_wedge, measure_from_exceedances, top_k_angles};
use crate::angular::EmpiricalAngularMeasure;
use crate::error::{Error, Result};
use crate::geometry::{Branch, GPolarPoint, Point2, Wedge};
use crate::hrv::{default_k, estimate_alpha0};
use crate::simgen::{example2_draw, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskQuery {
    /// Slope of the half-plane boundary.
    pub c: f64,
    /// Threshold.
    pub x: f64,
}

impl RiskQuery {
    pub fn new(c: f64, x: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("slope c must be positive, got {c}")));
        }
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::NonPositiveThreshold(x));
        }
        Ok(Self { c, x })
    }

    fn check_against(&self, w: &Wedge) -> Result<()> {
        if self.c <= w.a_u() {
            return Err(Error::WedgeConflict { c: self.c, a_u: w.a_u() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub p_hat: f64,
    pub alpha0_used: f64,
    pub b0_used: f64,
    pub k_used: usize,
    pub n: usize,
    /// The asymptotic formula exceeded one; reported unclamped.
    pub above_one: bool,
}

/// How many exceedances feed the angular measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    /// Use the `k` farthest points; `b0` is the `k`-th distance.
    Count(usize),
    /// Fix `b0`; `k` is the number of points at distance `>= b0`.
    Distance(f64),
}

/// The estimator formula for a given measure and scaling.
pub fn risk_from_measure(
    measure: &EmpiricalAngularMeasure,
    n: usize,
    b0: f64,
    alpha0: f64,
    query: &RiskQuery,
) -> f64 {
    let k = measure.k() as f64;
    let mean: f64 = measure
        .atoms
        .iter()
        .map(|a| {
            let excess = a.mu.x2 - query.c * a.mu.x1;
            if excess > 0.0 {
                excess.powf(alpha0)
            } else {
                0.0
            }
        })
        .sum::<f64>()
        / k;
    query.x.powf(-alpha0) * (k / n as f64) * b0.powf(alpha0) * mean
}

fn implied_count(ex: &[GPolarPoint], b0: f64) -> Result<usize> {
    match ex.iter().filter(|g| g.r >= b0).count() {
        0 => Err(Error::NothingBeyondThreshold(b0)),
        k => Ok(k),
    }
}

pub fn risk_estimate(
    points: &[Point2],
    w: &Wedge,
    query: &RiskQuery,
    alpha0: f64,
    threshold: Threshold,
) -> Result<RiskEstimate> {
    query.check_against(w)?;
    if !(alpha0 > 0.0 && alpha0.is_finite()) {
        return Err(Error::NonPositiveAlpha(alpha0));
    }
    let ex = exceedances(points, w);
    let (k, b0) = match threshold {
        Threshold::Count(k) => {
            let m = measure_from_exceedances(&ex, k)?;
            (k, m.threshold)
        }
        Threshold::Distance(b0) => {
            if !(b0 > 0.0 && b0.is_finite()) {
                return Err(Error::NonPositiveThreshold(b0));
            }
            (implied_count(&ex, b0)?, b0)
        }
    };
    let measure = measure_from_exceedances(&ex, k)?;
    let p_hat = risk_from_measure(&measure, points.len(), b0, alpha0, query);
    Ok(RiskEstimate {
        p_hat,
        alpha0_used: alpha0,
        b0_used: b0,
        k_used: k,
        n: points.len(),
        above_one: p_hat > 1.0,
    })
}

/// Half-planes of the strong-dependence reference model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `P(X2 - 2·X1 > x)`
    P1,
    /// `P(X2 - 3·X1 > x)`
    P2,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::P1, Variant::P2];

    pub fn slope(&self) -> f64 {
        match self {
            Variant::P1 => 2.0,
            Variant::P2 => 3.0,
        }
    }
}

/// Closed form for the strong-dependence model:
/// `p1(x) = (5/84)·x^-2.5`, `p2(x) = (5/112)·x^-2.5`.
///
/// Only the light-tailed component with angle `Θ2 < 1/(1+c)` reaches the
/// half-plane, and `Θ2` has density `1.25` there, so the constant is
/// `0.5 · 1.25 · ∫_0^{1/(1+c)} (1 - (1+c)t)^2.5 dt = 0.625 / ((1+c)·3.5)`.
pub fn exact_p_example2(variant: Variant, x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::NonPositiveThreshold(x));
    }
    let constant = match variant {
        Variant::P1 => 5.0 / 84.0,
        Variant::P2 => 5.0 / 112.0,
    };
    Ok(constant * x.powf(-2.5))
}

/// Where the estimated wedge comes from in each replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WedgeChoice {
    Fixed(Wedge),
    /// Quantiles of the angles of the `k_angles` largest L1 norms.
    Fitted { k_angles: usize, q_low: f64, q_high: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RatioStudyConfig {
    pub seed: u64,
    /// Exceedance threshold shared by both estimators.
    pub threshold: Threshold,
    /// Wedge for the known-parameter estimate `p_bar`.
    pub known_wedge: Wedge,
    /// Hidden index for `p_bar`.
    pub known_alpha0: f64,
    /// Wedge for the fully estimated `p_hat`.
    pub estimated_wedge: WedgeChoice,
    /// Hill order statistics for `alpha0` in `p_hat`; defaults to
    /// [`default_k`].
    pub k_alpha0: Option<usize>,
    pub xs: Vec<f64>,
}

impl Default for RatioStudyConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            threshold: Threshold::Distance(2.0),
            known_wedge: true_wedge_example2(),
            known_alpha0: 2.5,
            estimated_wedge: WedgeChoice::Fitted {
                k_angles: 100,
                q_low: 0.05,
                q_high: 0.95,
            },
            k_alpha0: None,
            xs: vec![1.0, 4.0],
        }
    }
}

impl RatioStudyConfig {
    /// Both estimators on the same, possibly misspecified, wedge.
    pub fn with_wedge(w: Wedge) -> Self {
        Self {
            known_wedge: w,
            estimated_wedge: WedgeChoice::Fixed(w),
            ..Self::default()
        }
    }
}

/// Angular support `[0.4, 0.6]` of the heavy component, as slopes.
pub fn true_wedge_example2() -> Wedge {
    Wedge::from_angles(0.4, 0.6).expect("constant angles are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Known `alpha0` and wedge.
    PBar1,
    /// Estimated `alpha0` and wedge.
    PHat1,
    PBar2,
    PHat2,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [Quantity::PBar1, Quantity::PHat1, Quantity::PBar2, Quantity::PHat2];

    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::PBar1 => "pbar1",
            Quantity::PHat1 => "phat1",
            Quantity::PBar2 => "pbar2",
            Quantity::PHat2 => "phat2",
        }
    }

    pub fn variant(&self) -> Variant {
        match self {
            Quantity::PBar1 | Quantity::PHat1 => Variant::P1,
            Quantity::PBar2 | Quantity::PHat2 => Variant::P2,
        }
    }

    pub fn is_known(&self) -> bool {
        matches!(self, Quantity::PBar1 | Quantity::PBar2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub rep: usize,
    pub quantity: Quantity,
    pub x: f64,
    /// Estimate divided by the exact probability.
    pub ratio: f64,
}

/// Boxplot statistics of one `(quantity, x)` cell; quartiles interpolate
/// linearly between order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub quantity: Quantity,
    pub x: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyTable {
    pub rows: Vec<StudyRow>,
    pub summary: Vec<SummaryRow>,
    /// Replications whose estimated wedge had `a_u >= c` for some query
    /// slope. The formula is still evaluated for them.
    pub wedge_conflicts: usize,
}

impl StudyTable {
    pub fn cell(&self, quantity: Quantity, x: f64) -> Option<&SummaryRow> {
        self.summary.iter().find(|s| s.quantity == quantity && s.x == x)
    }
}

/// Linear interpolation between order statistics of sorted data.
pub fn interpolated_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

struct Replication {
    cells: Vec<(Quantity, f64, f64)>,
    conflict: bool,
}

fn replication(n: usize, seed: u64, config: &RatioStudyConfig) -> Result<Replication> {
    let mut rng = rng_from_seed(seed);
    let sample: Vec<Point2> = (0..n).map(|_| example2_draw(&mut rng).0).collect();

    let hat_wedge = match config.estimated_wedge {
        WedgeChoice::Fixed(w) => w,
        WedgeChoice::Fitted { k_angles, q_low, q_high } => {
            fit_wedge(&top_k_angles(&sample, k_angles)?, q_low, q_high)?.wedge
        }
    };

    let conflict = Variant::ALL.iter().any(|v| v.slope() <= hat_wedge.a_u());
    let mut out = Vec::with_capacity(4 * config.xs.len());
    for (wedge, known) in [(config.known_wedge, true), (hat_wedge, false)] {
        let ex = exceedances(&sample, &wedge);
        let (k, b0) = match config.threshold {
            Threshold::Count(k) => (k, measure_from_exceedances(&ex, k)?.threshold),
            Threshold::Distance(b0) => (implied_count(&ex, b0)?, b0),
        };
        let measure = measure_from_exceedances(&ex, k)?;
        let alpha0 = if known {
            config.known_alpha0
        } else {
            let k_hill = config.k_alpha0.unwrap_or_else(|| default_k(n));
            estimate_alpha0(&sample, &wedge, k_hill, &Branch::BOTH)?
        };
        for variant in Variant::ALL {
            let quantity = match (variant, known) {
                (Variant::P1, true) => Quantity::PBar1,
                (Variant::P1, false) => Quantity::PHat1,
                (Variant::P2, true) => Quantity::PBar2,
                (Variant::P2, false) => Quantity::PHat2,
            };
            for &x in &config.xs {
                let query = RiskQuery::new(variant.slope(), x)?;
                let p = risk_from_measure(&measure, n, b0, alpha0, &query);
                out.push((quantity, x, p / exact_p_example2(variant, x)?));
            }
        }
    }
    Ok(Replication { cells: out, conflict })
}

/// Replicated comparison of the known-parameter and fully estimated risk
/// estimates against the closed form. Replication `i` draws a fresh sample
/// seeded with `seed + i`, so results do not depend on scheduling.
pub fn ratio_study(reps: usize, n: usize, config: &RatioStudyConfig) -> Result<StudyTable> {
    if reps == 0 {
        return Err(Error::InvalidArgument("need at least one replication".into()));
    }
    let per_rep = (0..reps)
        .into_par_iter()
        .map(|i| replication(n, config.seed.wrapping_add(i as u64), config))
        .collect::<Result<Vec<_>>>()?;

    let wedge_conflicts = per_rep.iter().filter(|r| r.conflict).count();
    let rows: Vec<StudyRow> = per_rep
        .into_iter()
        .enumerate()
        .flat_map(|(rep, r)| {
            r.cells.into_iter().map(move |(quantity, x, ratio)| StudyRow {
                rep,
                quantity,
                x,
                ratio,
            })
        })
        .collect();

    let mut summary = Vec::new();
    for quantity in Quantity::ALL {
        for &x in &config.xs {
            let mut v: Vec<f64> = rows
                .iter()
                .filter(|r| r.quantity == quantity && r.x == x)
                .map(|r| r.ratio)
                .collect();
            v.sort_by(f64::total_cmp);
            summary.push(SummaryRow {
                quantity,
                x,
                min: v[0],
                q1: interpolated_quantile(&v, 0.25),
                median: interpolated_quantile(&v, 0.5),
                q3: interpolated_quantile(&v, 0.75),
                max: v[v.len() - 1],
            });
        }
    }
    Ok(StudyTable {
        rows,
        summary,
        wedge_conflicts,
    })
}
