//! Threshold aggregation over linearly moving 3-D points.
//!
//! Points move as `x(t) = x0 + vx·t` on each axis and are indexed by their
//! six-dimensional dual `(vx, x0, vy, y0, vz, z0)`. A grid of skew-aware
//! buckets summarizes the data; estimated operators sweep a moving query box
//! through those buckets, while exact operators work on the raw points.

pub mod bench;
pub mod cases;
pub mod datagen;
pub mod error;
pub mod estimate;
pub mod exact;
pub mod index;
pub mod intervals;
pub mod io;
pub mod maximize;
pub mod model;
pub mod poly;
pub mod sort;
pub mod sweep;

pub use error::{Error, Result};
pub use estimate::{count_range, max_count, threshold_range, MaxCountResult};
pub use exact::{exact_count_function, exact_count_range, exact_max_count, exact_threshold_ops, CountStepFunction};
pub use index::{GridConfig, MovingIndex, SkewAwareBucket};
pub use intervals::{threshold_stats, IntervalSet, ThresholdStats};
pub use maximize::{Extremum, SweepParams};
pub use model::{normalize_query, Hex6, QueryBox, TimeInterval, EPS_TIME};
