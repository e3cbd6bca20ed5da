pub mod embedding;
pub mod error;
pub mod homology;
pub mod scalar;
pub mod signals;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub mod landscapes;
pub mod baselines;
pub mod learn;
pub mod pipeline;

/// Double precision versions of the main generic types.
pub type TimeSeriesF64 = signals::TimeSeries<f64>;
pub type SegmentF64 = signals::Segment<f64>;
pub type PointCloudF64 = embedding::PointCloud<f64>;
pub type DiagramF64 = homology::PersistenceDiagram<f64>;
pub type LandscapeF64 = landscapes::Landscape<f64>;
pub type DatasetF64 = learn::Dataset<f64>;
pub type ModelF64 = learn::Model<f64>;

/// Single precision versions.
pub type TimeSeriesF32 = signals::TimeSeries<f32>;
pub type PointCloudF32 = embedding::PointCloud<f32>;
pub type DiagramF32 = homology::PersistenceDiagram<f32>;
pub type LandscapeF32 = landscapes::Landscape<f32>;
pub type DatasetF32 = learn::Dataset<f32>;
