//! The coin-tossing protocol: block states, parity mixtures, the joint state
//! under attack, and complete runs with transcripts.

mod exact;
mod joint;
mod lockstep;
mod mixture;
mod params;
mod run;
mod source;
mod transcript;

pub use exact::{
    attack_distribution, exact_distribution, honest_distribution, OutcomeDistribution, MAX_BRANCHES, PRUNE_PROBABILITY,
};
pub use joint::{entangled_commitment, split_after_announcement, steer, steer_with, JointState, SteerOutcome};
pub use lockstep::{compare_attack_traces, compare_honest_traces, compare_traces, TraceComparison};
pub use mixture::{
    parity_mixture, parity_mixture_from_blocks, parity_mixture_of_length, product_ket, ParityMixture, Party,
};
pub use params::{
    block_state, effective_for, effective_params, phi, psi, EffectiveParams, ProtocolParams, QubitAmplitudes,
    Representation,
};
pub use run::{run_attack, run_attack_with, run_honest, run_honest_with, seeded_source, Attacker};
pub use source::{OutcomeSource, Recording, RngSource};
pub use transcript::{verify_result, AttackRecord, Outcome, RunKind, Transcript, RNG_ALGORITHM};
