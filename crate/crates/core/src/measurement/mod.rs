//! Premeasurement couplings, state transformers and repeatability, and the
//! trigger-state model of a detector array polluted by systems identical to
//! the measured one.

mod bcl;
mod traces;
mod trigger;

pub use bcl::{
    apparatus_state, build_unitary, premeasure, premeasure_with, probability_reproducibility, random_spec,
    repeatability_check, BCLSpec, Completion, EigenGroup, OutcomeSet, PremeasurementResult, RepeatabilityReport,
    StateTransformer, ORTH_TOL, REPEAT_TOL,
};
pub use traces::{trace_of_expansion, trace_on_subspace};
pub use trigger::{
    prop22_max, prop23_check, random_model, random_pollution, trigger_states, BlockOperator, Pollution, Prop23Report,
    TriggerComponent, TriggerModel, TriggerStates, PAULI_TOL,
};
