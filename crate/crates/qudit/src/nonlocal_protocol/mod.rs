//! Two-qudit gates between separated parties, assisted by shared Bell pairs and classical bits.

mod ops;
mod protocol;
mod register;
mod trace;

pub use ops::{
    exp_i_hermitian, full_unitary_resources, nonlocal_controlled_phase, nonlocal_cv, nonlocal_full_unitary,
    step4_commutation_check, step4_commutator_norm, synthesis_factors, two_qudit_state_synth, FullOutcome,
    GateOutcome, ProtocolRun, SynthesisFactors, SynthesisOutcome, FULL_EXHAUSTIVE_CAP,
};
pub use protocol::{flip, BranchMode, BranchRun, ControlledGate, LocalGate, Round, EXHAUSTIVE_CAP};
pub use register::{Basis, HybridRegister};
pub use trace::{EventKind, ProtocolTrace, TraceEvent};
