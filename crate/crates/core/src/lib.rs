//! Occlusion-pattern-aware disparity estimation for 4D light fields.
//!
//! The crate is organized around a deterministic plane-sweep pipeline:
//!
//! - [`lightfield`] — the N×N sub-aperture grid, angular coordinates,
//!   directional view lines, and container/PFM I/O.
//! - [`synth`] — a layered-scene renderer with analytic ground-truth
//!   disparity and per-view occlusion masks, used as the test oracle.
//! - [`patterns`] — one-sided occlusion pattern families over a view line
//!   and their angular down/upsampling.
//! - [`photometric`] — backward warping to the central view, per-view
//!   residuals, masked pattern costs, and thresholded pattern selection.
//! - [`objective`] — the pattern-aware photometric loss, edge-aware
//!   smoothness, and the combined objective.
//! - [`estimator`] — cost-volume construction over disparity candidates,
//!   box aggregation, hard/soft regression, and confidence-gated refinement.
//! - [`metrics`] — MSE×100, BadPix(ε), and disparity/error map rendering.
//! - [`suite`] — end-to-end runs of the synthetic scene suite with a
//!   machine-readable report.

pub mod error;
pub mod estimator;
pub mod lightfield;
pub mod metrics;
pub mod objective;
pub mod patterns;
pub mod photometric;
pub mod suite;
pub mod synth;

pub use error::{Error, Result};
pub use estimator::{CostVolume, EstimateOutput, Preset, Regression, SweepConfig};
pub use lightfield::{Direction, DisparityMap, GridOffset, ImageBuf, LightField, ViewLine};
pub use metrics::{badpix, mse_x100, EvalMask, MetricsReport};
pub use objective::{LossBreakdown, LossConstants};
pub use patterns::{OcclusionPattern, PatternSet};
pub use photometric::{PatternCosts, ResidualStack};
pub use synth::{GroundTruth, Layer, Region, SceneSpec, Texture};
