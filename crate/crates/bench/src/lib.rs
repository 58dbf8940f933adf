//! Shared fixtures for the criterion benchmarks.

use hrv_core::simgen;
use hrv_core::{Point2, Wedge};

/// Strong-dependence sample used across benchmarks.
pub fn example2(n: usize) -> Vec<Point2> {
    simgen::gen_example2(n, 0xbe7c)
}

/// Wedge matching the angular support of [`example2`].
pub fn true_wedge() -> Wedge {
    Wedge::from_angles(0.4, 0.6).expect("valid angles")
}
