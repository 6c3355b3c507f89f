//! Jump rates of both processes, the event-driven sampler and the exact
//! finite-state generator.

mod generator;
pub mod log;
mod params;
mod simulate;
mod transitions;

pub use generator::{
    apply_generator, asep_jump_images, fasep_jump_images, generator_apply_exact, intertwining_exact, state_key,
    IntertwiningMismatch, IntertwiningReport, JumpImages, StateKey,
};
pub use params::{weak_asym_params, WeakAsymParams};
pub use simulate::{replay, same_state, simulate_ctmc, simulate_replica, Event, Record, Trajectory, SAFETY_MARGIN};
pub use transitions::{
    apply_asep, apply_fasep, enabled_transitions_asep, enabled_transitions_fasep, RateKind, Transition,
    TransitionKind,
};
