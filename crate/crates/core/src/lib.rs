//! Detection of multivariate regular variation (MRV) with strong asymptotic
//! dependence in bivariate heavy-tailed data, hidden regular variation (HRV)
//! after a wedge-shaped cone is removed, and estimation of rare-event
//! probabilities for half-plane regions that the first-order MRV limit
//! assigns zero mass.
//!
//! Modules, bottom-up:
//!
//! - [`geometry`]: wedges, distances to a wedge, L1 and generalized polar
//!   coordinates.
//! - [`tailest`]: Hill, altHill, QQ-slope and the Hillish statistic.
//! - [`angular`]: top-k angle extraction, quantile wedge fitting, the
//!   empirical hidden angular measure.
//! - [`hrv`]: branch transforms, hidden index and scaling estimates, the
//!   detection report.
//! - [`risk`]: half-plane risk estimates, the closed-form oracle for the
//!   strong-dependence model and the replication study.
//! - [`simgen`]: seeded generators for the two reference models.
//! - [`dataio`]: CSV/JSON ingestion and emission.

pub mod angular;
pub mod dataio;
pub mod error;
pub mod geometry;
pub mod hrv;
pub mod risk;
pub mod simgen;
pub mod tailest;

pub use angular::{AngularSample, Atom, EmpiricalAngularMeasure, WedgeFit};
pub use dataio::{DegreeRecord, ReturnKind, ReturnSeries};
pub use error::{Error, Result};
pub use geometry::{Branch, DiamondPoint, GPolarPoint, Point2, Sample2, Wedge};
pub use hrv::{BranchData, DetectConfig, HrvReport};
pub use risk::{RiskEstimate, RiskQuery};
pub use simgen::{Model, SimConfig};
pub use tailest::{ConcomitantRanks, CurvePoint, EstimatorCurve};
