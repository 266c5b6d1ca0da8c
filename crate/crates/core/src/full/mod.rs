//! Brute-force staggered walk on the full vertex set `(S, y)`.
//!
//! The graph has vertices `(S, y)` with `S` an `r`-subset of `[N]` and
//! `y ∉ S`. Two tessellations cover its edges: alpha polygons group the
//! vertices sharing `S`, beta polygons group those sharing `S ∪ {y}`.
//! One walk step reflects about the uniform vector of every alpha polygon,
//! then of every beta polygon.

mod microsim;
mod queries;
mod sampling;
mod state;
mod tessellation;
mod vertex;
mod walk;

pub use microsim::{CorrespondenceAudit, MicrosimRun, TwoRegisterSim, TwoRegisterState};
pub use queries::{query_accounting, QueryCounts};
pub use sampling::{sample_many, sample_measurement, Measurement, MeasurementSampler, SampleSummary};
pub use state::{DumpHeader, FullState, DUMP_FORMAT_VERSION};
pub use tessellation::{build_tessellations, edge_cover_defects, Partition, TessellationCover};
pub use vertex::{enumerate_vertices, SubsetRanker, Vertex, VertexTable};
pub use walk::{
    apply_phase_flip, apply_polygon_reflection, project_onto_eta, run_full_algorithm, EtaProjection, FullRun,
    FullWalk,
};

/// Default upper bound on state-vector dimensions.
pub const DEFAULT_CAP: u128 = 10_000_000;
