//! Numerical laboratory for metric surfaces: induced length metrics on
//! triangle meshes, Hausdorff content and co-area checks, tripod embeddings
//! of metric triangles, polyhedral fillings and approximations, and discrete
//! conformal modulus. [`experiments::run`] runs the registered experiment
//! suite and returns versioned [`ExperimentReport`]s.

pub mod approx;
pub mod error;
pub mod experiments;
pub mod filling;
pub mod geom;
pub mod graph;
pub mod measure;
pub mod mesh_io;
pub mod metric;
pub mod modulus;
pub mod report;
pub mod spaces;
pub mod tripod;

pub use error::{Error, Result};
pub use geom::{Norm, Point};
pub use metric::{
    geodesic, gromov_product, induced_length_metric, metric_axioms_check, Ambient, EdgeId, FaceId,
    MetricSurfaceMesh, PathPolyline, SampledMetricSpace, Stop, VertexId, ViolationReport,
};
pub use modulus::{ModulusResult, Quad, QuadModuli, SolverOptions};
pub use report::{compare_reports, Assertion, Basis, ExperimentReport, ReportDiff, Tolerances};
