//! Cone geometry in the plane: the forbidden wedge
//! `{x : a_l·x1 <= x2 <= a_u·x1}`, L2 distances to it, the L1 "diamond"
//! projection and generalized polar (GPOLAR) coordinates.
//!
//! GPOLAR maps a point outside the wedge to `(r, mu)` where `r` is its L2
//! distance to the wedge and `mu = x / r` lies on the generalized unit sphere,
//! the pair of lines parallel to the wedge rays at distance one.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bivariate observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

/// Ordered collection of observations.
pub type Sample2 = Vec<Point2>;

impl Point2 {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    /// Builds a point, rejecting NaN and infinite coordinates.
    pub fn try_new(x1: f64, x2: f64) -> Result<Self> {
        if x1.is_finite() && x2.is_finite() {
            Ok(Self { x1, x2 })
        } else {
            Err(Error::NonFinitePoint { x1, x2 })
        }
    }

    pub fn l1_norm(&self) -> f64 {
        self.x1.abs() + self.x2.abs()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(c * self.x1, c * self.x2)
    }

    pub fn is_zero(&self) -> bool {
        self.x1 == 0.0 && self.x2 == 0.0
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x1, x2): (f64, f64)) -> Self {
        Self::new(x1, x2)
    }
}

/// Which side of the wedge a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `x2 > a_u·x1`
    #[serde(rename = "above")]
    AboveWedge,
    /// `x2 < a_l·x1`
    #[serde(rename = "below")]
    BelowWedge,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::AboveWedge, Branch::BelowWedge];

    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::AboveWedge => "above",
            Branch::BelowWedge => "below",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The forbidden zone `{x in R+^2 : a_l·x1 <= x2 <= a_u·x1}`.
///
/// With `a_l = a_u = 1` this is the diagonal ray. Wedges with
/// `a_l > 1` or `a_u < 1` can be built, but they cannot carry the limit
/// measure of a vector with tail-equivalent margins; see
/// [`Wedge::is_valid_for_equal_tails`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WedgeRepr", into = "WedgeRepr")]
pub struct Wedge {
    a_l: f64,
    a_u: f64,
}

#[derive(Serialize, Deserialize)]
struct WedgeRepr {
    a_l: f64,
    a_u: f64,
}

impl TryFrom<WedgeRepr> for Wedge {
    type Error = Error;

    fn try_from(r: WedgeRepr) -> Result<Self> {
        Wedge::new(r.a_l, r.a_u)
    }
}

impl From<Wedge> for WedgeRepr {
    fn from(w: Wedge) -> Self {
        Self { a_l: w.a_l, a_u: w.a_u }
    }
}

impl Wedge {
    /// The diagonal `[diag]`.
    pub const DIAG: Wedge = Wedge { a_l: 1.0, a_u: 1.0 };

    pub fn new(a_l: f64, a_u: f64) -> Result<Self> {
        let ok = a_l.is_finite() && a_u.is_finite() && a_l > 0.0 && a_l <= a_u;
        if ok {
            Ok(Self { a_l, a_u })
        } else {
            Err(Error::InvalidWedge { a_l, a_u })
        }
    }

    /// Builds the wedge whose diamond-plot angles `theta1 = x1/(x1+x2)` span
    /// `[theta_l, theta_u]`: `a_l = 1/theta_u - 1`, `a_u = 1/theta_l - 1`.
    pub fn from_angles(theta_l: f64, theta_u: f64) -> Result<Self> {
        wedge_from_angles(theta_l, theta_u)
    }

    pub fn a_l(&self) -> f64 {
        self.a_l
    }

    pub fn a_u(&self) -> f64 {
        self.a_u
    }

    /// Diamond angle of the upper boundary ray, `1/(1 + a_u)`.
    pub fn theta_l(&self) -> f64 {
        1.0 / (1.0 + self.a_u)
    }

    /// Diamond angle of the lower boundary ray, `1/(1 + a_l)`.
    pub fn theta_u(&self) -> f64 {
        1.0 / (1.0 + self.a_l)
    }

    /// `a_l <= 1 <= a_u`, required when both margins share a tail index.
    pub fn is_valid_for_equal_tails(&self) -> bool {
        self.a_l <= 1.0 && 1.0 <= self.a_u
    }

    pub fn is_diagonal(&self) -> bool {
        self.a_l == 1.0 && self.a_u == 1.0
    }

    /// Closed wedge membership, boundary included.
    pub fn contains(&self, p: &Point2) -> bool {
        self.a_l * p.x1 <= p.x2 && p.x2 <= self.a_u * p.x1
    }

    /// Side of the wedge, or `None` for points inside or on the boundary.
    pub fn branch_of(&self, p: &Point2) -> Option<Branch> {
        if p.x2 > self.a_u * p.x1 {
            Some(Branch::AboveWedge)
        } else if p.x2 < self.a_l * p.x1 {
            Some(Branch::BelowWedge)
        } else {
            None
        }
    }

    /// Slope of the boundary ray facing `branch`.
    pub fn slope(&self, branch: Branch) -> f64 {
        match branch {
            Branch::AboveWedge => self.a_u,
            Branch::BelowWedge => self.a_l,
        }
    }
}

impl fmt::Display for Wedge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "wedge(a_l={}, a_u={})", self.a_l, self.a_u)
    }
}

/// Generalized polar coordinates of a point outside a wedge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GPolarPoint {
    pub r: f64,
    pub mu: Point2,
    pub branch: Branch,
}

impl GPolarPoint {
    /// `r · mu`.
    pub fn inverse(&self) -> Point2 {
        gpolar_inverse(self.r, &self.mu)
    }
}

/// L1-normalized angular coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiamondPoint {
    pub theta1: f64,
    pub theta2: f64,
    pub norm: f64,
}

/// Traditional L1 polar transform `(|x1|+|x2|, x1/(|x1|+|x2|))`.
pub fn l1_polar(p: &Point2) -> Result<(f64, f64)> {
    if p.is_zero() {
        return Err(Error::ZeroPoint);
    }
    let r = p.l1_norm();
    Ok((r, p.x1 / r))
}

/// Projection onto the L1 unit sphere (the diamond).
pub fn to_diamond(p: &Point2) -> Result<DiamondPoint> {
    if p.is_zero() {
        return Err(Error::ZeroPoint);
    }
    let norm = p.l1_norm();
    Ok(DiamondPoint {
        theta1: p.x1 / norm,
        theta2: p.x2 / norm,
        norm,
    })
}

pub fn wedge_from_angles(theta_l: f64, theta_u: f64) -> Result<Wedge> {
    let ok = theta_l > 0.0 && theta_l <= theta_u && theta_u < 1.0;
    if !ok {
        return Err(Error::OutOfRangeAngle { theta_l, theta_u });
    }
    Wedge::new(1.0 / theta_u - 1.0, 1.0 / theta_l - 1.0)
}

/// Points the wedge distance formulas apply to: the closed first quadrant,
/// plus the part of the upper half-plane whose nearest wedge ray is the
/// upper one (see [`region_filter_upper`]).
fn in_domain(p: &Point2, w: &Wedge) -> bool {
    let first_quadrant = p.x1 >= 0.0 && p.x2 >= 0.0;
    first_quadrant || in_upper_region(p, w.a_u)
}

fn in_upper_region(p: &Point2, a_u: f64) -> bool {
    p.x2 > 0.0 && p.x2 - a_u * p.x1 > 0.0 && p.x1 + a_u * p.x2 > 0.0
}

/// L2 distance from `p` to the wedge and the side it lies on.
///
/// Boundary points have distance zero and are reported as
/// [`Error::InsideForbiddenZone`], like interior points.
pub fn dist_to_wedge(p: &Point2, w: &Wedge) -> Result<(f64, Branch)> {
    if !in_domain(p, w) {
        return Err(Error::OutsideDomain { x1: p.x1, x2: p.x2 });
    }
    let branch = w.branch_of(p).ok_or(Error::InsideForbiddenZone { x1: p.x1, x2: p.x2 })?;
    Ok((signed_excess(p, w, branch), branch))
}

/// `(x2 - a_u·x1)/sqrt(1 + a_u²)` above, `(a_l·x1 - x2)/sqrt(1 + a_l²)` below.
/// Positive exactly when `p` lies strictly on the given side.
pub(crate) fn signed_excess(p: &Point2, w: &Wedge, branch: Branch) -> f64 {
    match branch {
        Branch::AboveWedge => (p.x2 - w.a_u * p.x1) / w.a_u.hypot(1.0),
        Branch::BelowWedge => (w.a_l * p.x1 - p.x2) / w.a_l.hypot(1.0),
    }
}

/// GPOLAR transform relative to the wedge.
pub fn gpolar(p: &Point2, w: &Wedge) -> Result<GPolarPoint> {
    let (r, branch) = dist_to_wedge(p, w)?;
    if r <= 0.0 {
        // Underflow for points within rounding of a boundary ray.
        return Err(Error::InsideForbiddenZone { x1: p.x1, x2: p.x2 });
    }
    Ok(GPolarPoint {
        r,
        mu: Point2::new(p.x1 / r, p.x2 / r),
        branch,
    })
}

pub fn gpolar_inverse(r: f64, mu: &Point2) -> Point2 {
    mu.scale(r)
}

/// Keeps points with `x2 > 0`, `x2 - a_u·x1 > 0` and `x1 + a_u·x2 > 0`:
/// above the upper wedge ray, and with a positive projection onto it so that
/// the upper ray is the nearest part of the wedge. Used for data on the whole
/// plane, such as returns.
pub fn region_filter_upper(points: &[Point2], w: &Wedge) -> Sample2 {
    points
        .iter()
        .filter(|p| in_upper_region(p, w.a_u))
        .copied()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn l1_polar_examples() {
        assert_eq!(l1_polar(&Point2::new(3.0, 1.0)).unwrap(), (4.0, 0.75));
        assert_eq!(l1_polar(&Point2::new(0.0, 5.0)).unwrap(), (5.0, 0.0));
        assert_eq!(l1_polar(&Point2::new(-2.0, 2.0)).unwrap(), (4.0, -0.5));
        assert!(matches!(l1_polar(&Point2::new(0.0, 0.0)), Err(Error::ZeroPoint)));
    }

    #[test]
    fn diamond_examples() {
        let d = to_diamond(&Point2::new(3.0, 1.0)).unwrap();
        assert_eq!((d.theta1, d.theta2, d.norm), (0.75, 0.25, 4.0));
        let d = to_diamond(&Point2::new(1.0, 1.0)).unwrap();
        assert_eq!((d.theta1, d.theta2, d.norm), (0.5, 0.5, 2.0));
        let d = to_diamond(&Point2::new(-1.0, 3.0)).unwrap();
        assert_eq!((d.theta1, d.theta2, d.norm), (-0.25, 0.75, 4.0));
        assert!(to_diamond(&Point2::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn wedge_from_angles_examples() {
        let w = wedge_from_angles(0.4, 0.6).unwrap();
        assert!(close(w.a_l(), 2.0 / 3.0, TOL));
        assert!(close(w.a_u(), 1.5, TOL));
        // rounded to the two decimals printed for the simulated wedge
        assert!((w.a_l() - 0.67).abs() < 0.005);

        let w = wedge_from_angles(0.4479, 0.5305).unwrap();
        assert!((w.a_l() - 0.885).abs() < 0.0005, "{}", w.a_l());
        assert!((w.a_u() - 1.233).abs() < 0.0005, "{}", w.a_u());

        assert_eq!(wedge_from_angles(0.5, 0.5).unwrap(), Wedge::DIAG);
        assert!(Wedge::DIAG.is_diagonal());
    }

    #[test]
    fn wedge_from_angles_rejects_out_of_range() {
        for (l, u) in [(0.0, 0.5), (0.6, 0.4), (0.2, 1.0), (-0.1, 0.5), (f64::NAN, 0.5)] {
            assert!(matches!(
                wedge_from_angles(l, u),
                Err(Error::OutOfRangeAngle { .. })
            ));
        }
    }

    #[test]
    fn angles_round_trip() {
        let w = wedge_from_angles(0.37, 0.58).unwrap();
        assert!(close(w.theta_l(), 0.37, TOL));
        assert!(close(w.theta_u(), 0.58, TOL));
    }

    #[test]
    fn wedge_validation() {
        assert!(Wedge::new(0.0, 1.0).is_err());
        assert!(Wedge::new(2.0, 1.0).is_err());
        assert!(Wedge::new(1.0, f64::INFINITY).is_err());
        let w = Wedge::new(1.2, 2.0).unwrap();
        assert!(!w.is_valid_for_equal_tails());
        assert!(Wedge::new(0.67, 1.5).unwrap().is_valid_for_equal_tails());
    }

    #[test]
    fn dist_examples() {
        let w = Wedge::new(0.67, 1.5).unwrap();
        let (d, b) = dist_to_wedge(&Point2::new(0.0, 1.0), &w).unwrap();
        assert!(close(d, 1.0 / 3.25f64.sqrt(), TOL));
        assert!((d - 0.5547).abs() < 1e-4);
        assert_eq!(b, Branch::AboveWedge);

        let (d, b) = dist_to_wedge(&Point2::new(3.0, 1.0), &Wedge::DIAG).unwrap();
        assert!(close(d, 2.0 / 2f64.sqrt(), TOL));
        assert_eq!(b, Branch::BelowWedge);

        assert!(matches!(
            dist_to_wedge(&Point2::new(1.0, 1.0), &w),
            Err(Error::InsideForbiddenZone { .. })
        ));
    }

    #[test]
    fn boundary_points_are_inside() {
        let w = Wedge::new(0.5, 2.0).unwrap();
        for p in [Point2::new(1.0, 2.0), Point2::new(2.0, 1.0), Point2::new(0.0, 0.0)] {
            assert!(matches!(
                dist_to_wedge(&p, &w),
                Err(Error::InsideForbiddenZone { .. })
            ));
        }
    }

    #[test]
    fn dist_rejects_points_outside_domain() {
        let w = Wedge::new(0.5, 2.0).unwrap();
        assert!(matches!(
            dist_to_wedge(&Point2::new(-1.0, -1.0), &w),
            Err(Error::OutsideDomain { .. })
        ));
        assert!(matches!(
            dist_to_wedge(&Point2::new(3.0, -1.0), &w),
            Err(Error::OutsideDomain { .. })
        ));
        // second quadrant, nearest to the upper ray
        assert!(dist_to_wedge(&Point2::new(-1.0, 2.0), &w).is_ok());
    }

    #[test]
    fn gpolar_examples() {
        let g = gpolar(&Point2::new(3.0, 1.0), &Wedge::DIAG).unwrap();
        assert!(close(g.r, 2f64.sqrt(), TOL));
        assert!(close(g.mu.x1, 3.0 / 2f64.sqrt(), TOL));
        assert!(close(g.mu.x2, 1.0 / 2f64.sqrt(), TOL));

        let w = Wedge::new(0.67, 1.5).unwrap();
        let g = gpolar(&Point2::new(0.0, 3.25f64.sqrt()), &w).unwrap();
        assert!(close(g.r, 1.0, TOL));
        assert!(close(g.mu.x2, 3.25f64.sqrt(), TOL));

        let w = Wedge::new(0.5, 2.0).unwrap();
        let g = gpolar(&Point2::new(2.0, 6.0), &w).unwrap();
        assert!(close(g.r, 2.0 / 5f64.sqrt(), TOL));
        assert!((g.mu.x1 - 2.23607).abs() < 1e-5);
        assert!((g.mu.x2 - 6.70820).abs() < 1e-5);
        assert_eq!(g.branch, Branch::AboveWedge);
        let back = g.inverse();
        assert!(close(back.x1, 2.0, TOL) && close(back.x2, 6.0, TOL));
    }

    #[test]
    fn region_filter_examples() {
        let w = Wedge::new(0.698, 1.545).unwrap();
        let pts = vec![
            Point2::new(-1.0, 2.0),
            Point2::new(-3.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(-1.0, -2.0),
        ];
        assert_eq!(region_filter_upper(&pts, &w), vec![Point2::new(-1.0, 2.0)]);
        assert!(region_filter_upper(&[], &w).is_empty());
    }
}
