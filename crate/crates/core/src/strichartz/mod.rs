//! Measurement suites for the dispersive estimates: admissible pairs, Strichartz norms
//! on fixed and semiclassical windows, local smoothing with a periodic weight, the
//! scaling symmetry and the admissibility-diagram line data.

mod diagram;
mod pairs;
mod samples;
mod scaling;
mod smoothing;
mod suite;

pub use diagram::{admissibility_diagram, DiagramKind, DiagramLine, Ratio};
pub use pairs::{admissible_pairs, standard_pairs, AdmissiblePair, ADMISSIBILITY_TOLERANCE};
pub use samples::Samples;
pub use scaling::{compress, scaling_diagnostics, Loss, ScalingConfig, ScalingRatio, ScalingReport, COMPRESSION_TOLERANCE};
pub use smoothing::{
    centroid, local_smoothing_suite, periodic_distance, periodic_weight, smoothing_sweep, SmoothingProbe, SmoothingSweep,
};
pub use suite::{
    band_data, data_norm, strichartz_band_sweep, strichartz_suite, BandData, BandSweep, BandSweepRow, PairFit,
    StrichartzReport, SubintervalSum, SuiteMode, BAND_LEAKAGE_LIMIT,
};
