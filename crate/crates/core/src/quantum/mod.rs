//! Dense pure and mixed states on small product spaces, POVM measurement, and
//! the standard distinguishability measures between two density matrices.

mod distinguish;
mod povm;
mod state;

pub use distinguish::{
    fidelity, helstrom_pe, purify, trace_distance, transition_probability, uhlmann_unitary, DistinguishabilityReport,
    UhlmannResult, HELSTROM_TIE_TOLERANCE,
};
pub use povm::{
    collapse, embed, measure, measure_on, probabilities, sample_index, MeasurementSample, Povm, COMPLETENESS_TOLERANCE,
    MIN_TOTAL_PROBABILITY,
};
pub use state::{tensor, DensityMatrix, QuantumState, StateVector, NORM_TOLERANCE};
