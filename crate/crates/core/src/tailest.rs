//! Tail-index estimators for one-dimensional data and the Hillish statistic
//! for pairs.
//!
//! All estimators work on the decreasing order statistics
//! `X_(1) >= X_(2) >= ...` of the strictly positive part of the input;
//! nonpositive values are discarded first so that quantities such as
//! `(Z2 - a_u·Z1)_+` can be passed directly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One point of an estimator plot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub value: f64,
    /// Grid exponent for altHill curves, where `k = ceil(n^theta)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

/// Estimate plotted against the number of upper order statistics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimatorCurve {
    entries: Vec<CurvePoint>,
}

impl EstimatorCurve {
    /// Validates ordering and finiteness.
    ///
    /// k-indexed curves need strictly increasing `k`. theta-indexed curves
    /// (every entry has a `theta`) need strictly increasing `theta`; their `k`
    /// is only nondecreasing since `ceil(n^theta)` can repeat on a fine grid.
    pub fn from_entries(entries: Vec<CurvePoint>) -> Result<Self> {
        let by_theta = !entries.is_empty() && entries.iter().all(|e| e.theta.is_some());
        for e in &entries {
            if !e.value.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "curve value at k={} is not finite",
                    e.k
                )));
            }
        }
        for pair in entries.windows(2) {
            let ordered = if by_theta {
                pair[0].theta < pair[1].theta && pair[0].k <= pair[1].k
            } else {
                pair[0].k < pair[1].k
            };
            if !ordered {
                return Err(Error::InvalidArgument(format!(
                    "curve entries out of order at k={}",
                    pair[1].k
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[CurvePoint] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn has_theta(&self) -> bool {
        self.entries.first().is_some_and(|e| e.theta.is_some())
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.value)
    }

    /// Entries with `k_min <= k <= k_max`.
    pub fn window(&self, k_min: usize, k_max: usize) -> impl Iterator<Item = &CurvePoint> {
        self.entries
            .iter()
            .filter(move |e| e.k >= k_min && e.k <= k_max)
    }
}

/// `Hillish` needs the ranks of the concomitants among the top `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcomitantRanks {
    pub k: usize,
    /// `ranks[j-1] = N_j`, with `1 <= N_j <= k`.
    pub ranks: Vec<usize>,
}

/// Strictly positive values in decreasing order.
pub fn positive_descending(data: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = data.iter().copied().filter(|x| *x > 0.0).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn check_k(desc: &[f64], k: usize, raw_len: usize) -> Result<()> {
    if k < 2 || raw_len < k + 1 {
        return Err(Error::InsufficientData {
            needed: (k + 1).max(3),
            got: raw_len,
        });
    }
    if desc.len() < k + 1 {
        return Err(Error::NonPositiveTail {
            needed: k + 1,
            got: desc.len(),
        });
    }
    Ok(())
}

/// Hill estimate of the tail index,
/// `[ (1/k) Σ_{i<=k} log(X_(i)/X_(k+1)) ]^-1`.
pub fn hill(data: &[f64], k: usize) -> Result<f64> {
    let desc = positive_descending(data);
    check_k(&desc, k, data.len())?;
    hill_sorted(&desc, k)
}

/// [`hill`] on data already filtered and sorted by [`positive_descending`].
pub fn hill_sorted(desc: &[f64], k: usize) -> Result<f64> {
    check_k(desc, k, desc.len())?;
    let anchor = desc[k].ln();
    let mean = desc[..k].iter().map(|x| x.ln() - anchor).sum::<f64>() / k as f64;
    invert_mean_excess(mean)
}

fn invert_mean_excess(mean: f64) -> Result<f64> {
    if mean > 0.0 {
        Ok(1.0 / mean)
    } else {
        Err(Error::DegenerateFit("top order statistics are all equal"))
    }
}

/// Hill estimates over a grid of `k`, sharing one sort and a prefix sum of
/// logs.
pub fn hill_curve(data: &[f64], ks: &[usize]) -> Result<EstimatorCurve> {
    let desc = positive_descending(data);
    let logs: Vec<f64> = desc.iter().map(|x| x.ln()).collect();
    let mut prefix = Vec::with_capacity(logs.len() + 1);
    prefix.push(0.0);
    for l in &logs {
        prefix.push(prefix.last().unwrap() + l);
    }
    let entries = ks
        .iter()
        .map(|&k| {
            check_k(&desc, k, data.len())?;
            let mean = prefix[k] / k as f64 - logs[k];
            Ok(CurvePoint {
                k,
                value: invert_mean_excess(mean)?,
                theta: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EstimatorCurve::from_entries(entries)
}

/// Default altHill grid: theta from 0.10 to 0.95 in steps of 0.01.
pub fn default_theta_grid() -> Vec<f64> {
    (10..=95).map(|i| i as f64 / 100.0).collect()
}

/// `k = ceil(n^theta)`, kept within `[2, n-1]`.
pub fn alt_hill_k(n: usize, theta: f64) -> usize {
    let k = (n as f64).powf(theta).ceil() as usize;
    k.min(n.saturating_sub(1)).max(2)
}

/// Hill estimates indexed by `theta` with `k = ceil(n^theta)`, where `n` is
/// the number of strictly positive values.
pub fn alt_hill_curve(data: &[f64], theta_grid: &[f64]) -> Result<EstimatorCurve> {
    if theta_grid.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
        return Err(Error::InvalidArgument("theta grid must lie in (0,1)".into()));
    }
    if theta_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "theta grid must be strictly increasing".into(),
        ));
    }
    let desc = positive_descending(data);
    let n = desc.len();
    if n < 3 {
        return Err(Error::NonPositiveTail { needed: 3, got: n });
    }
    let ks: Vec<usize> = theta_grid.iter().map(|&t| alt_hill_k(n, t)).collect();
    let entries = theta_grid
        .iter()
        .zip(&ks)
        .map(|(&theta, &k)| {
            Ok(CurvePoint {
                k,
                value: hill_sorted(&desc, k)?,
                theta: Some(theta),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EstimatorCurve::from_entries(entries)
}

/// QQ-slope estimate: the least-squares slope `s` of
/// `{(log((k+1)/j), log(X_(j)/X_(k+1))) : j = 1..k}`, returned as `1/s`.
pub fn qq_slope(data: &[f64], k: usize) -> Result<f64> {
    let desc = positive_descending(data);
    check_k(&desc, k, data.len())?;
    qq_slope_sorted(&desc, k)
}

pub fn qq_slope_sorted(desc: &[f64], k: usize) -> Result<f64> {
    check_k(desc, k, desc.len())?;
    let anchor = desc[k].ln();
    let log_k1 = ((k + 1) as f64).ln();
    let xs: Vec<f64> = (1..=k).map(|j| log_k1 - (j as f64).ln()).collect();
    let ys: Vec<f64> = desc[..k].iter().map(|x| x.ln() - anchor).collect();
    let kf = k as f64;
    let mx = xs.iter().sum::<f64>() / kf;
    let my = ys.iter().sum::<f64>() / kf;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    if slope > 0.0 && slope.is_finite() {
        Ok(1.0 / slope)
    } else {
        Err(Error::DegenerateFit("QQ ordinates are constant"))
    }
}

pub fn qq_curve(data: &[f64], ks: &[usize]) -> Result<EstimatorCurve> {
    let desc = positive_descending(data);
    let entries = ks
        .iter()
        .map(|&k| {
            check_k(&desc, k, data.len())?;
            Ok(CurvePoint {
                k,
                value: qq_slope_sorted(&desc, k)?,
                theta: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EstimatorCurve::from_entries(entries)
}

/// Indices ordering `xi` decreasingly; ties keep the original index order.
fn descending_order(xi: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..xi.len()).collect();
    idx.sort_by(|&a, &b| xi[b].total_cmp(&xi[a]));
    idx
}

fn check_pair(xi: &[f64], eta: &[f64], k: usize) -> Result<()> {
    if xi.len() != eta.len() {
        return Err(Error::LengthMismatch {
            left: xi.len(),
            right: eta.len(),
        });
    }
    if k < 2 || k > xi.len() {
        return Err(Error::InsufficientData {
            needed: k.max(2),
            got: xi.len(),
        });
    }
    Ok(())
}

fn ranks_of_top(concomitants: &[f64], k: usize) -> Vec<usize> {
    let top = &concomitants[..k];
    let mut sorted = top.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    top.iter()
        .map(|v| sorted.partition_point(|s| s.total_cmp(v).is_le()))
        .collect()
}

/// Ranks `N_j = #{l <= k : eta*_l <= eta*_j}` of the concomitants of the `k`
/// largest `xi`.
pub fn concomitant_ranks(xi: &[f64], eta: &[f64], k: usize) -> Result<ConcomitantRanks> {
    check_pair(xi, eta, k)?;
    let order = descending_order(xi);
    let conc: Vec<f64> = order[..k].iter().map(|&i| eta[i]).collect();
    Ok(ConcomitantRanks {
        k,
        ranks: ranks_of_top(&conc, k),
    })
}

fn hillish_from_ranks(ranks: &[usize]) -> f64 {
    let k = ranks.len() as f64;
    ranks
        .iter()
        .enumerate()
        .map(|(j, &n)| (k / (j + 1) as f64).ln() * (k / n as f64).ln())
        .sum::<f64>()
        / k
}

/// `Hillish_k = (1/k) Σ_{j<=k} log(k/j)·log(k/N_j)`.
pub fn hillish(xi: &[f64], eta: &[f64], k: usize) -> Result<f64> {
    let ranks = concomitant_ranks(xi, eta, k)?;
    Ok(hillish_from_ranks(&ranks.ranks))
}

/// Hillish over a grid of `k`, sorting `xi` once.
pub fn hillish_curve(xi: &[f64], eta: &[f64], ks: &[usize]) -> Result<EstimatorCurve> {
    if xi.len() != eta.len() {
        return Err(Error::LengthMismatch {
            left: xi.len(),
            right: eta.len(),
        });
    }
    for &k in ks {
        check_pair(xi, eta, k)?;
    }
    if ks.is_empty() {
        return Ok(EstimatorCurve::default());
    }
    let order = descending_order(xi);
    let kmax = *ks.iter().max().unwrap();
    let conc: Vec<f64> = order[..kmax].iter().map(|&i| eta[i]).collect();
    let entries: Vec<CurvePoint> = ks
        .par_iter()
        .map(|&k| CurvePoint {
            k,
            value: hillish_from_ranks(&ranks_of_top(&conc, k)),
            theta: None,
        })
        .collect();
    EstimatorCurve::from_entries(entries)
}

/// Hillish curves for `(xi, eta)` and `(xi, -eta)`. Both tend to one exactly
/// when the conditional extreme value limit of the pair is a product measure.
pub fn hillish_pair_curve(
    xi: &[f64],
    eta: &[f64],
    ks: &[usize],
) -> Result<(EstimatorCurve, EstimatorCurve)> {
    let neg: Vec<f64> = eta.iter().map(|v| -v).collect();
    Ok((hillish_curve(xi, eta, ks)?, hillish_curve(xi, &neg, ks)?))
}

/// Adds seeded uniform noise of relative size 1e-9 to break ties in
/// discrete data such as degree counts.
pub fn jitter_ties(values: &[f64], seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    values
        .iter()
        .map(|&v| {
            let scale = if v == 0.0 { 1e-9 } else { 1e-9 * v.abs() };
            v + scale * (rng.gen::<f64>() - 0.5)
        })
        .collect()
}

/// Inclusive arithmetic grid `start, start+step, ..., <= end`.
pub fn k_grid(start: usize, end: usize, step: usize) -> Vec<usize> {
    if step == 0 || start > end {
        return Vec::new();
    }
    (start..=end).step_by(step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pareto_quantiles(n: usize, alpha: f64) -> Vec<f64> {
        (1..=n).map(|j| (n as f64 / j as f64).powf(1.0 / alpha)).collect()
    }

    #[test]
    fn hill_hand_case() {
        let data = [3f64.exp(), 2f64.exp(), 1f64.exp()];
        let a = hill(&data, 2).unwrap();
        assert!((a - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn hill_on_exact_quantiles() {
        let data = pareto_quantiles(1000, 1.0);
        let a = hill(&data, 100).unwrap();
        // brute force: mean of log((k+1)/j) for j = 1..k
        let k = 100;
        let mean: f64 = (1..=k)
            .map(|j| ((k + 1) as f64 / j as f64).ln())
            .sum::<f64>()
            / k as f64;
        assert!((a - 1.0 / mean).abs() < 1e-9);
        assert!((a - 1.0).abs() < 0.15);
    }

    #[test]
    fn hill_scale_invariant() {
        let data = pareto_quantiles(500, 2.0);
        let scaled: Vec<f64> = data.iter().map(|x| 7.0 * x).collect();
        let a = hill(&data, 50).unwrap();
        let b = hill(&scaled, 50).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn hill_errors() {
        assert!(matches!(hill(&[1.0, 2.0], 2), Err(Error::InsufficientData { .. })));
        assert!(matches!(hill(&[3.0, 2.0, 1.0], 1), Err(Error::InsufficientData { .. })));
        assert!(matches!(
            hill(&[3.0, 2.0, -1.0, 0.0], 2),
            Err(Error::NonPositiveTail { .. })
        ));
        assert!(matches!(hill(&[2.0, 2.0, 2.0], 2), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn hill_drops_nonpositive() {
        let mut data = vec![3f64.exp(), 2f64.exp(), 1f64.exp()];
        data.extend([-5.0, 0.0]);
        assert!((hill(&data, 2).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn hill_curve_matches_pointwise() {
        let data = pareto_quantiles(300, 1.7);
        let ks = k_grid(2, 200, 7);
        let curve = hill_curve(&data, &ks).unwrap();
        for e in curve.entries() {
            assert!((e.value - hill(&data, e.k).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn alt_hill_k_rule() {
        assert_eq!(alt_hill_k(10_000, 0.5), 100);
        assert_eq!(alt_hill_k(10, 0.01), 2);
        assert_eq!(alt_hill_k(10, 0.999), 9);
    }

    #[test]
    fn alt_hill_entries_are_hill() {
        let data = pareto_quantiles(10_000, 1.3);
        let curve = alt_hill_curve(&data, &[0.5]).unwrap();
        let e = curve.entries()[0];
        assert_eq!(e.k, 100);
        assert_eq!(e.theta, Some(0.5));
        assert_eq!(e.value, hill(&data, 100).unwrap());
    }

    #[test]
    fn alt_hill_flat_on_quantiles() {
        // quantiles c·j^(-1/alpha) give Hill values near alpha for every k
        let data: Vec<f64> = (1..=5000).map(|j| 3.0 * (j as f64).powf(-1.0 / 2.0)).collect();
        let curve = alt_hill_curve(&data, &[0.3, 0.5, 0.7, 0.9]).unwrap();
        for v in curve.values() {
            assert!((v - 2.0).abs() < 0.25, "{v}");
        }
    }

    #[test]
    fn alt_hill_rejects_bad_grid() {
        let data = pareto_quantiles(100, 1.0);
        assert!(alt_hill_curve(&data, &[0.5, 0.4]).is_err());
        assert!(alt_hill_curve(&data, &[0.0, 0.4]).is_err());
    }

    #[test]
    fn qq_exact_quantiles() {
        for alpha in [0.8, 1.5, 2.5] {
            let data = pareto_quantiles(1000, alpha);
            let a = qq_slope(&data, 100).unwrap();
            assert!((a - alpha).abs() < 0.05, "{a} vs {alpha}");
        }
    }

    #[test]
    fn qq_scale_invariant_and_degenerate() {
        let data = pareto_quantiles(400, 1.2);
        let scaled: Vec<f64> = data.iter().map(|x| 0.01 * x).collect();
        let a = qq_slope(&data, 40).unwrap();
        assert!((a - qq_slope(&scaled, 40).unwrap()).abs() < 1e-12 * a);
        assert!(matches!(qq_slope(&[5.0; 10], 4), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn concomitant_examples() {
        let r = concomitant_ranks(&[5.0, 3.0], &[10.0, 20.0], 2).unwrap();
        assert_eq!(r.ranks, vec![1, 2]);
        let r = concomitant_ranks(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0], 3).unwrap();
        assert_eq!(r.ranks, vec![3, 3, 3]);
        let r = concomitant_ranks(&[1.0, 2.0, 3.0], &[9.0, 8.0, 7.0], 3).unwrap();
        assert_eq!(r.ranks, vec![1, 2, 3]);
        assert!(matches!(
            concomitant_ranks(&[1.0, 2.0], &[1.0], 2),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn xi_ties_break_by_index() {
        // equal xi: first index comes first, so eta* = (1, 2, 0)
        let r = concomitant_ranks(&[1.0, 1.0, 0.5], &[1.0, 2.0, 0.0], 2).unwrap();
        assert_eq!(r.ranks, vec![1, 2]);
        let r = concomitant_ranks(&[1.0, 1.0, 0.5], &[2.0, 1.0, 0.0], 2).unwrap();
        assert_eq!(r.ranks, vec![2, 1]);
    }

    #[test]
    fn hillish_hand_cases() {
        let h = hillish(&[5.0, 3.0], &[10.0, 20.0], 2).unwrap();
        assert!((h - 2f64.ln().powi(2) / 2.0).abs() < 1e-12);
        assert!((h - 0.24023).abs() < 1e-5);

        let xi = [4.0, 3.0, 2.0, 1.0];
        let eta = [1.0, 2.0, 3.0, 4.0];
        let h = hillish(&xi, &eta, 4).unwrap();
        let direct: f64 = (1..=4).map(|j| (4.0 / j as f64).ln().powi(2)).sum::<f64>() / 4.0;
        assert!((h - direct).abs() < 1e-12);
        assert!((h - 0.621_256_511_100_289_7).abs() < 1e-12);
    }

    #[test]
    fn hillish_curve_matches_pointwise() {
        let xi: Vec<f64> = (0..200).map(|i| ((i * 37) % 200) as f64).collect();
        let eta: Vec<f64> = (0..200).map(|i| ((i * 91) % 113) as f64).collect();
        let ks = k_grid(2, 200, 9);
        let (c1, c2) = hillish_pair_curve(&xi, &eta, &ks).unwrap();
        let neg: Vec<f64> = eta.iter().map(|v| -v).collect();
        for (a, b) in c1.entries().iter().zip(c2.entries()) {
            assert_eq!(a.value, hillish(&xi, &eta, a.k).unwrap());
            assert_eq!(b.value, hillish(&xi, &neg, b.k).unwrap());
        }
        let (c1, _) = hillish_pair_curve(&[5.0, 3.0], &[10.0, 20.0], &[2]).unwrap();
        assert!((c1.entries()[0].value - 2f64.ln().powi(2) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn jitter_breaks_ties_deterministically() {
        let v = vec![2.0; 50];
        let a = jitter_ties(&v, 3);
        assert_eq!(a, jitter_ties(&v, 3));
        let mut s = a.clone();
        s.sort_by(f64::total_cmp);
        s.dedup();
        // the noise lives on a grid of a few million representable values
        assert!(s.len() >= 48, "{}", s.len());
        assert!(a.iter().all(|x| (x - 2.0).abs() <= 2e-9));
    }

    #[test]
    fn curve_validation() {
        let p = |k, value| CurvePoint { k, value, theta: None };
        assert!(EstimatorCurve::from_entries(vec![p(3, 1.0), p(3, 1.0)]).is_err());
        assert!(EstimatorCurve::from_entries(vec![p(3, f64::NAN)]).is_err());
        assert!(EstimatorCurve::from_entries(vec![p(2, 1.0), p(5, 1.0)]).is_ok());
    }
}
