//! Reflection diagnostics: moving-plane sweeps on height fields, reflection
//! of the pseudo-stream function, and the edge-point derivative table at the
//! trough.

mod height;
mod stream;

pub use height::{
    asymmetry_norm, check_monotone_streamlines, moving_plane_sweep_height, phase_align,
    reflect_height, CaseTag, CurvatureSign, MonotonicityReport, ReflectionField, ReflectionReport,
    TouchingPoint,
};
pub use stream::{
    phase_align_stream, reflect_stream, serrin_edge_check, stream_asymmetry_norm, EdgeEntry,
    EdgePointTable, ReflectionSample, StreamReflection,
};
