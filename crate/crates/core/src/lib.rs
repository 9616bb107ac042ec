//! Two-register state-vector simulation of quantum drawer search.
//!
//! Register `B` holds the problem-setting (which drawer hides the ball),
//! register `A` the solution a searcher produces. The crate provides:
//!
//! * a dense state-vector kernel with partial projection, seeded sampling,
//!   and on-the-fly unitary programs ([`state`], [`grover`]);
//! * the search itself in a standard and a certainty (phase-matched) variant,
//!   with oracle-query counting ([`grover`]);
//! * the four measurement/evolution diagrams - ordinary, relativized
//!   (projection deferred), time-symmetrization instance, and relativized
//!   loop - plus the loop's forward reading, with consistency checks
//!   ([`pipelines`], [`trace`]);
//! * enumeration of the even bit sharings and the sweep over them
//!   ([`sharing`]);
//! * classical baselines with and without advance knowledge of half the
//!   solution's bits, and the query-count comparison ([`classical`]);
//! * the entangled-pair correlation case ([`epr`]).

pub mod classical;
pub mod epr;
pub mod error;
pub mod grover;
pub mod layout;
pub mod pipelines;
pub mod sharing;
pub mod state;
pub mod trace;

pub use error::{Error, Result};
pub use grover::{
    plan_variant, run_search, search_program, Direction, GateStep, GroverVariant, QueryCounter,
    UnitaryProgram, VariantKind,
};
pub use layout::{Register, RegisterLayout};
pub use pipelines::{
    check_trace_identities, deferred_equivalence_tvd, loop_forward_reading, run_ordinary,
    run_relativized, run_relativized_loop, run_timesym_instance, IdentityReport, Selection,
};
pub use sharing::{enumerate_sharings, reduction_factor, sweep_instances, Sharing, SweepMode};
pub use state::{
    fidelity, outcome_distribution, project, sample_measure, MeasurementSpec, StateVector,
};
pub use trace::{render_table, StateLabel, TimeDirection, Trace, TraceEvent, TraceKind};

#[cfg(test)]
mod tests {
    // Values are immutable after construction and move freely across threads.
    #[test]
    fn core_values_are_send_and_sync() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<crate::StateVector>();
        assert_send_sync::<crate::UnitaryProgram>();
        assert_send_sync::<crate::Trace>();
        assert_send_sync::<crate::Sharing>();
        assert_send_sync::<crate::MeasurementSpec>();
        assert_send_sync::<crate::GroverVariant>();
    }
}
