//! Threshold-based angular analysis.
//!
//! The primary dependence structure is read off the diamond plot: keep the
//! `k` observations with the largest L1 norm and look at their angles
//! `theta1 = x1/(|x1|+|x2|)`. Quantiles of those angles give the wedge.
//! Once the wedge is removed, the GPOLAR angles of the points farthest from
//! it give the empirical hidden angular measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{gpolar, wedge_from_angles, Branch, Point2, Wedge};

/// Angles of the `k` observations with the largest L1 norm, in decreasing
/// norm order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularSample {
    pub k: usize,
    pub thetas: Vec<f64>,
    pub norms: Vec<f64>,
    /// The retained observations, aligned with `thetas`.
    pub points: Vec<Point2>,
}

impl AngularSample {
    /// Angles of retained points strictly inside the open first quadrant.
    ///
    /// For data on the whole plane (returns) only these angles describe the
    /// first-quadrant wedge.
    pub fn first_quadrant_thetas(&self) -> Vec<f64> {
        self.points
            .iter()
            .zip(&self.thetas)
            .filter(|(p, _)| p.x1 > 0.0 && p.x2 > 0.0)
            .map(|(_, t)| *t)
            .collect()
    }
}

/// Selects the `k` points of largest `|x1| + |x2|`; equal norms keep input
/// order.
pub fn top_k_angles(points: &[Point2], k: usize) -> Result<AngularSample> {
    let mut idx: Vec<usize> = (0..points.len())
        .filter(|&i| !points[i].is_zero())
        .collect();
    if k == 0 || idx.len() < k {
        return Err(Error::InsufficientData {
            needed: k.max(1),
            got: idx.len(),
        });
    }
    idx.sort_by(|&a, &b| points[b].l1_norm().total_cmp(&points[a].l1_norm()));
    idx.truncate(k);
    let retained: Vec<Point2> = idx.iter().map(|&i| points[i]).collect();
    Ok(AngularSample {
        k,
        thetas: retained.iter().map(|p| p.x1 / p.l1_norm()).collect(),
        norms: retained.iter().map(Point2::l1_norm).collect(),
        points: retained,
    })
}

/// Nearest-rank empirical quantile: the `ceil(q·m)`-th smallest value
/// (the minimum for `q = 0`).
pub fn nearest_rank_quantile(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    let rank = ((q * m as f64).ceil() as usize).clamp(1, m);
    sorted[rank - 1]
}

/// Fitted wedge and the diagnostics that go with it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WedgeFit {
    pub wedge: Wedge,
    pub theta_l: f64,
    pub theta_u: f64,
    /// `a_l <= 1 <= a_u`.
    pub valid: bool,
    /// The quantiles coincide and the wedge is a single ray.
    pub degenerate: bool,
}

pub fn fit_wedge(angles: &AngularSample, q_low: f64, q_high: f64) -> Result<WedgeFit> {
    fit_wedge_from_thetas(&angles.thetas, q_low, q_high)
}

/// Wedge spanned by the `q_low` and `q_high` nearest-rank quantiles of
/// `thetas`. Violations of `a_l <= 1 <= a_u` are flagged, not clamped.
pub fn fit_wedge_from_thetas(thetas: &[f64], q_low: f64, q_high: f64) -> Result<WedgeFit> {
    if !(0.0..1.0).contains(&q_low) || !(q_low < q_high && q_high <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "quantile pair must satisfy 0 <= q_low < q_high <= 1, got ({q_low}, {q_high})"
        )));
    }
    if thetas.is_empty() {
        return Err(Error::EmptyAngles);
    }
    let mut sorted = thetas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let theta_l = nearest_rank_quantile(&sorted, q_low);
    let theta_u = nearest_rank_quantile(&sorted, q_high);
    let wedge = wedge_from_angles(theta_l, theta_u)?;
    Ok(WedgeFit {
        wedge,
        theta_l,
        theta_u,
        valid: wedge.is_valid_for_equal_tails(),
        degenerate: theta_l == theta_u,
    })
}

/// One atom of the empirical hidden angular measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub mu: Point2,
    pub weight: f64,
    pub branch: Branch,
}

/// `S0_hat = (1/k) Σ δ_{mu_i}` over the `k` points farthest from the wedge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalAngularMeasure {
    pub atoms: Vec<Atom>,
    /// Distance of the `k`-th farthest point, the estimate of `b0(n/k)`.
    pub threshold: f64,
}

impl EmpiricalAngularMeasure {
    pub fn k(&self) -> usize {
        self.atoms.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Mass of the atoms satisfying `pred`.
    pub fn mass_where(&self, pred: impl Fn(&Atom) -> bool) -> f64 {
        self.atoms.iter().filter(|a| pred(a)).map(|a| a.weight).sum()
    }
}

/// GPOLAR coordinates of every point strictly outside the wedge, in
/// decreasing distance (ties in input order). Points inside, on the boundary
/// or outside the geometric domain are skipped.
pub fn exceedances(points: &[Point2], w: &Wedge) -> Vec<crate::geometry::GPolarPoint> {
    let mut out: Vec<_> = points.iter().filter_map(|p| gpolar(p, w).ok()).collect();
    out.sort_by(|a, b| b.r.total_cmp(&a.r));
    out
}

pub fn empirical_s0(points: &[Point2], w: &Wedge, k: usize) -> Result<EmpiricalAngularMeasure> {
    let ex = exceedances(points, w);
    measure_from_exceedances(&ex, k)
}

pub(crate) fn measure_from_exceedances(
    ex: &[crate::geometry::GPolarPoint],
    k: usize,
) -> Result<EmpiricalAngularMeasure> {
    if k == 0 || ex.len() < k {
        return Err(Error::InsufficientExceedances {
            needed: k.max(1),
            got: ex.len(),
        });
    }
    let weight = 1.0 / k as f64;
    Ok(EmpiricalAngularMeasure {
        atoms: ex[..k]
            .iter()
            .map(|g| Atom {
                mu: g.mu,
                weight,
                branch: g.branch,
            })
            .collect(),
        threshold: ex[k - 1].r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::dist_to_wedge;
    use crate::simgen::{gen_example1, gen_example2};

    #[test]
    fn top_k_examples() {
        let pts = vec![Point2::new(10.0, 10.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let a = top_k_angles(&pts, 1).unwrap();
        assert_eq!(a.thetas, vec![0.5]);
        assert_eq!(a.norms, vec![20.0]);

        let all = top_k_angles(&pts, 3).unwrap();
        assert_eq!(all.thetas, vec![0.5, 1.0, 0.0]);
        assert!(matches!(top_k_angles(&pts, 4), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn top_k_skips_origin() {
        let pts = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 2.0)];
        assert!(top_k_angles(&pts, 2).is_err());
        assert_eq!(top_k_angles(&pts, 1).unwrap().thetas.len(), 1);
    }

    #[test]
    fn example2_top_angles_in_band() {
        let s = gen_example2(30_000, 2024);
        let a = top_k_angles(&s, 100).unwrap();
        let inside = a.thetas.iter().filter(|t| (0.38..=0.62).contains(*t)).count();
        assert!(inside >= 90, "{inside}");
    }

    #[test]
    fn quantile_nearest_rank() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(nearest_rank_quantile(&v, 0.0), 1.0);
        assert_eq!(nearest_rank_quantile(&v, 0.2), 1.0);
        assert_eq!(nearest_rank_quantile(&v, 0.21), 2.0);
        assert_eq!(nearest_rank_quantile(&v, 0.5), 3.0);
        assert_eq!(nearest_rank_quantile(&v, 1.0), 5.0);
    }

    #[test]
    fn fit_wedge_min_max() {
        let f = fit_wedge_from_thetas(&[0.55, 0.4, 0.5, 0.6, 0.45], 0.0, 1.0).unwrap();
        assert_eq!((f.theta_l, f.theta_u), (0.4, 0.6));
        assert!((f.wedge.a_l() - 2.0 / 3.0).abs() < 1e-12);
        assert!((f.wedge.a_u() - 1.5).abs() < 1e-12);
        assert!(f.valid && !f.degenerate);
    }

    #[test]
    fn fit_wedge_flags() {
        let f = fit_wedge_from_thetas(&[0.3, 0.3, 0.3], 0.1, 0.9).unwrap();
        assert!(f.degenerate);
        assert!(!f.valid);
        assert!(matches!(fit_wedge_from_thetas(&[], 0.1, 0.9), Err(Error::EmptyAngles)));
        assert!(fit_wedge_from_thetas(&[0.5], 0.9, 0.1).is_err());
        assert!(matches!(
            fit_wedge_from_thetas(&[-0.2, 0.5], 0.0, 1.0),
            Err(Error::OutOfRangeAngle { .. })
        ));
    }

    #[test]
    fn fit_wedge_scale_invariant() {
        let s = gen_example2(5_000, 9);
        let scaled: Vec<Point2> = s.iter().map(|p| p.scale(13.5)).collect();
        let a = fit_wedge(&top_k_angles(&s, 200).unwrap(), 0.05, 0.95).unwrap();
        let b = fit_wedge(&top_k_angles(&scaled, 200).unwrap(), 0.05, 0.95).unwrap();
        assert!((a.theta_l - b.theta_l).abs() < 1e-12);
        assert!((a.theta_u - b.theta_u).abs() < 1e-12);
    }

    #[test]
    fn s0_small_case() {
        let w = Wedge::new(0.5, 2.0).unwrap();
        let pts = vec![
            Point2::new(1.0, 5.0),
            Point2::new(1.0, 1.0),
            Point2::new(6.0, 1.0),
            Point2::new(0.0, 2.0),
        ];
        let m = empirical_s0(&pts, &w, 3).unwrap();
        assert_eq!(m.k(), 3);
        assert!(m.atoms.iter().all(|a| (a.weight - 1.0 / 3.0).abs() < 1e-15));
        assert!((m.total_mass() - 1.0).abs() < 1e-12);
        for a in &m.atoms {
            let (d, _) = dist_to_wedge(&a.mu, &w).unwrap();
            assert!((d - 1.0).abs() < 1e-9);
        }
        assert!(matches!(
            empirical_s0(&pts, &w, 4),
            Err(Error::InsufficientExceedances { needed: 4, got: 3 })
        ));
    }

    #[test]
    fn s0_example1_two_atoms() {
        let s = gen_example1(100_000, 77);
        let m = empirical_s0(&s, &Wedge::DIAG, 300).unwrap();
        let r2 = 2f64.sqrt();
        let near = |a: &Atom, x: f64, y: f64| {
            (a.mu.x1 - r2 * x).abs() < 1e-9 && (a.mu.x2 - r2 * y).abs() < 1e-9
        };
        let upper = m.mass_where(|a| near(a, 2.0, 3.0));
        let lower = m.mass_where(|a| near(a, 2.0, 1.0));
        assert!((upper + lower - 1.0).abs() < 1e-9);
        assert!((upper - 0.5).abs() < 0.08, "{upper}");
        assert!((lower - 0.5).abs() < 0.08, "{lower}");
    }
}
