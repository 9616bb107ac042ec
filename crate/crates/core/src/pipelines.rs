//! The four measurement/evolution diagrams and their consistency checks.
//!
//! All pipelines use the certainty search variant for the computation between
//! the two measurements: the unitary must carry each setting onto its
//! solution with probability 1, or the deferred projections and backward legs
//! would not land on the states the diagrams claim.
//!
//! * [`run_ordinary`] - initial measurement of the full setting, forward
//!   computation, final measurement that leaves the state unchanged.
//! * [`run_relativized`] - the initial projection deferred past the
//!   computation, so the selection happens at the final measurement.
//! * [`run_timesym_instance`] - an even sharing: half the bits selected at
//!   the initial measurement, the other half at the final one, whose outcome
//!   is propagated backward by the adjoint computation.
//! * [`run_relativized_loop`] - the loop with the initial selection deferred
//!   entirely: the backward leg carries a superposition of the `√N` settings
//!   consistent with the final selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grover::{plan_variant, search_program, Direction, UnitaryProgram, VariantKind};
use crate::layout::{Register, RegisterLayout};
use crate::sharing::Sharing;
use crate::state::{fidelity, project, sample_measure, MeasurementSpec, StateVector};
use crate::trace::{StateLabel, TimeDirection, Trace, TraceKind, TraceOp};

/// Minimum fidelity for the diagram identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// How the setting is chosen for a pipeline run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// A given setting value.
    Setting(u64),
    /// Sample the initial measurement with this seed.
    Seeded(u64),
}

fn certainty_program(layout: RegisterLayout) -> Result<UnitaryProgram> {
    let variant = plan_variant(layout.register_dim() as u64, VariantKind::Certainty)?;
    Ok(search_program(layout, &variant))
}

fn check_setting(layout: RegisterLayout, setting: u64) -> Result<()> {
    if setting >= layout.register_dim() as u64 {
        return Err(Error::InvalidSetting {
            setting,
            n_drawers: layout.register_dim() as u64,
        });
    }
    Ok(())
}

/// Initial measurement selects the full setting, the computation produces the
/// solution, the final measurement confirms it. Returns the trace and the
/// setting that was selected.
pub fn run_ordinary(layout: RegisterLayout, selection: Selection) -> Result<(Trace, u64)> {
    let uniform = StateVector::uniform(layout);
    let (setting, outcome, selected) = match selection {
        Selection::Setting(b) => {
            check_setting(layout, b)?;
            let spec = MeasurementSpec::full_forced(layout, Register::B, b);
            let (state, _) = project(&uniform, &spec)?;
            (b, layout.value_bits(b), state)
        }
        Selection::Seeded(seed) => {
            let spec = MeasurementSpec::full(layout, Register::B);
            let (bits, state) = sample_measure(&uniform, &spec, seed)?;
            let positions: Vec<u32> = (0..layout.n_bits()).collect();
            (layout.value_from_bits(&positions, &bits), bits, state)
        }
    };
    let program = certainty_program(layout)?;
    let evolved = program.apply(&selected, Direction::Forward)?;

    // The final measurement of the solution must leave the state unchanged.
    let final_spec = MeasurementSpec::full_forced(layout, Register::A, setting);
    let (post, probability) = project(&evolved, &final_spec)?;
    let f = fidelity(&post, &evolved)?;
    if probability < 1.0 - IDENTITY_TOLERANCE || f < 1.0 - IDENTITY_TOLERANCE {
        return Err(Error::IdentityCheckFailed {
            identity: "final_measurement_leaves_state_unchanged".into(),
            fidelity: f.min(probability),
        });
    }

    let mut trace = Trace::new(TraceKind::Ordinary);
    trace.push_state(StateLabel::T1Premeasure, TimeDirection::None, uniform);
    trace.push_op(
        TraceOp::Measure {
            register: Register::B,
            positions: (0..layout.n_bits()).collect(),
            outcome,
        },
        TimeDirection::None,
    );
    trace.push_state(StateLabel::T1Selected, TimeDirection::None, selected);
    trace.push_op(TraceOp::Unitary, TimeDirection::Forward);
    trace.push_state(StateLabel::ForwardEvolved, TimeDirection::Forward, evolved);
    trace.validate()?;
    Ok((trace, setting))
}

/// The same process described with the initial projection deferred past the
/// computation: the final measurement of the solution performs the whole
/// selection.
pub fn run_relativized(layout: RegisterLayout, setting: u64) -> Result<Trace> {
    check_setting(layout, setting)?;
    let uniform = StateVector::uniform(layout);
    let program = certainty_program(layout)?;
    let evolved = program.apply(&uniform, Direction::Forward)?;
    let spec = MeasurementSpec::full_forced(layout, Register::A, setting);
    let (selected, _) = project(&evolved, &spec)?;

    let mut trace = Trace::new(TraceKind::Relativized);
    trace.push_state(StateLabel::T1Premeasure, TimeDirection::None, uniform);
    trace.push_op(TraceOp::Unitary, TimeDirection::Forward);
    trace.push_state(StateLabel::ForwardEvolved, TimeDirection::Forward, evolved);
    trace.push_op(
        TraceOp::Measure {
            register: Register::A,
            positions: (0..layout.n_bits()).collect(),
            outcome: layout.value_bits(setting),
        },
        TimeDirection::None,
    );
    trace.push_state(StateLabel::T2Selected, TimeDirection::None, selected);
    trace.validate()?;
    Ok(trace)
}

/// One time-symmetrization instance: the initial measurement selects the
/// sharing's `B` bits, the final measurement selects the complementary `A`
/// bits, and the final outcome propagates backward by the adjoint
/// computation, replacing the initial selection.
pub fn run_timesym_instance(
    layout: RegisterLayout,
    sharing: &Sharing,
    initial_bits: &[bool],
    final_bits: &[bool],
) -> Result<Trace> {
    let uniform = StateVector::uniform(layout);
    let spec_b = MeasurementSpec::forced(
        layout,
        Register::B,
        sharing.initial_positions(),
        initial_bits,
    )?;
    let (selected, _) = project(&uniform, &spec_b)?;
    let program = certainty_program(layout)?;
    let evolved = program.apply(&selected, Direction::Forward)?;
    let spec_a =
        MeasurementSpec::forced(layout, Register::A, sharing.final_positions(), final_bits)?;
    let (post, _) = project(&evolved, &spec_a)?;
    let backward = program.apply(&post, Direction::Adjoint)?;

    let mut trace = Trace::new(TraceKind::TimesymInstance);
    trace.push_state(StateLabel::T1Premeasure, TimeDirection::None, uniform);
    trace.push_op(
        TraceOp::Measure {
            register: Register::B,
            positions: sharing.initial_positions().to_vec(),
            outcome: initial_bits.to_vec(),
        },
        TimeDirection::None,
    );
    trace.push_state(StateLabel::T1Selected, TimeDirection::None, selected);
    trace.push_op(TraceOp::Unitary, TimeDirection::Forward);
    trace.push_state(StateLabel::ForwardEvolved, TimeDirection::Forward, evolved);
    trace.push_op(
        TraceOp::Measure {
            register: Register::A,
            positions: sharing.final_positions().to_vec(),
            outcome: final_bits.to_vec(),
        },
        TimeDirection::None,
    );
    trace.push_state(StateLabel::T2Selected, TimeDirection::None, post);
    trace.push_op(TraceOp::Unitary, TimeDirection::Backward);
    trace.push_state(
        StateLabel::BackwardEvolved,
        TimeDirection::Backward,
        backward,
    );
    trace.validate()?;
    Ok(trace)
}

/// The loop as seen by the problem-solver: no initial selection at all, a
/// final selection of the sharing's `A` bits, and a backward leg carrying the
/// superposition of every setting consistent with it.
pub fn run_relativized_loop(
    layout: RegisterLayout,
    sharing: &Sharing,
    final_bits: &[bool],
) -> Result<Trace> {
    let uniform = StateVector::uniform(layout);
    let program = certainty_program(layout)?;
    let evolved = program.apply(&uniform, Direction::Forward)?;
    let spec_a =
        MeasurementSpec::forced(layout, Register::A, sharing.final_positions(), final_bits)?;
    let (post, _) = project(&evolved, &spec_a)?;
    let backward = program.apply(&post, Direction::Adjoint)?;

    let mut trace = Trace::new(TraceKind::RelativizedLoop);
    trace.push_state(StateLabel::T1Premeasure, TimeDirection::None, uniform);
    trace.push_op(TraceOp::Unitary, TimeDirection::Forward);
    trace.push_state(StateLabel::ForwardEvolved, TimeDirection::Forward, evolved);
    trace.push_op(
        TraceOp::Measure {
            register: Register::A,
            positions: sharing.final_positions().to_vec(),
            outcome: final_bits.to_vec(),
        },
        TimeDirection::None,
    );
    trace.push_state(StateLabel::T2Selected, TimeDirection::None, post);
    trace.push_op(TraceOp::Unitary, TimeDirection::Backward);
    trace.push_state(
        StateLabel::BackwardEvolved,
        TimeDirection::Backward,
        backward,
    );
    trace.validate()?;
    Ok(trace)
}

/// The loop's bottom line read in the usual left-to-right way: the backward
/// leg's state, evolved forward, reproduces the post-selection state.
pub fn loop_forward_reading(loop_trace: &Trace) -> Result<Trace> {
    let backward =
        loop_trace
            .state(StateLabel::BackwardEvolved)
            .ok_or(Error::MissingTraceState {
                label: "backward_evolved",
            })?;
    let program = certainty_program(backward.layout())?;
    let evolved = program.apply(backward, Direction::Forward)?;

    let mut trace = Trace::new(TraceKind::LoopForwardReading);
    trace.push_state(
        StateLabel::T1Selected,
        TimeDirection::None,
        backward.clone(),
    );
    trace.push_op(TraceOp::Unitary, TimeDirection::Forward);
    trace.push_state(StateLabel::ForwardEvolved, TimeDirection::Forward, evolved);
    trace.validate()?;
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub fidelity: f64,
}

/// Fidelities of the three diagram identities, all at or above
/// [`IDENTITY_TOLERANCE`] (the function errs on the first one below it).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub setting: String,
    pub sharing: String,
    pub checks: Vec<IdentityCheck>,
}

/// Verify, for one setting and one sharing, that the diagrams agree:
///
/// 1. the instance's final selected state is the ordinary final state;
/// 2. the instance's backward leg, evolved forward, is the ordinary final
///    state (the bottom line read left to right);
/// 3. the loop's backward leg, evolved forward, is the loop's post-selection
///    state.
pub fn check_trace_identities(
    layout: RegisterLayout,
    setting: u64,
    sharing: &Sharing,
) -> Result<IdentityReport> {
    let (ordinary, _) = run_ordinary(layout, Selection::Setting(setting))?;
    let ordinary_final =
        ordinary
            .state(StateLabel::ForwardEvolved)
            .ok_or(Error::MissingTraceState {
                label: "forward_evolved",
            })?;
    let program = certainty_program(layout)?;

    let instance = run_timesym_instance(
        layout,
        sharing,
        &sharing.initial_bits_of(layout, setting),
        &sharing.final_bits_of(layout, setting),
    )?;
    let require = |label: StateLabel, trace: &Trace| -> Result<StateVector> {
        trace.state(label).cloned().ok_or(Error::MissingTraceState {
            label: label.name(),
        })
    };

    let mut checks = Vec::with_capacity(3);
    let mut push = |identity: &str, fidelity_value: f64| -> Result<()> {
        checks.push(IdentityCheck {
            identity: identity.to_string(),
            fidelity: fidelity_value,
        });
        if fidelity_value < 1.0 - IDENTITY_TOLERANCE {
            return Err(Error::IdentityCheckFailed {
                identity: identity.to_string(),
                fidelity: fidelity_value,
            });
        }
        Ok(())
    };

    let selected = require(StateLabel::T2Selected, &instance)?;
    push(
        "timesym_final_matches_ordinary_final",
        fidelity(&selected, ordinary_final)?,
    )?;

    let backward = require(StateLabel::BackwardEvolved, &instance)?;
    let replayed = program.apply(&backward, Direction::Forward)?;
    push(
        "timesym_backward_leg_forwards_to_ordinary_final",
        fidelity(&replayed, ordinary_final)?,
    )?;

    let loop_trace =
        run_relativized_loop(layout, sharing, &sharing.final_bits_of(layout, setting))?;
    let reading = loop_forward_reading(&loop_trace)?;
    let read_final = require(StateLabel::ForwardEvolved, &reading)?;
    let loop_post = require(StateLabel::T2Selected, &loop_trace)?;
    push(
        "loop_forward_reading_matches_post_selection",
        fidelity(&read_final, &loop_post)?,
    )?;

    Ok(IdentityReport {
        setting: layout.format_value(setting),
        sharing: sharing.label(),
        checks,
    })
}

/// Total variation distance between the joint outcome distributions of the
/// ordinary and the deferred (relativized) descriptions, accounting for the
/// randomness of the initial selection.
pub fn deferred_equivalence_tvd(layout: RegisterLayout) -> Result<f64> {
    let uniform = StateVector::uniform(layout);
    let program = certainty_program(layout)?;
    let dim = layout.joint_dim();

    // Ordinary: select a setting first, then evolve and read out.
    let selection_probs = uniform.register_marginal(Register::B);
    let mut ordinary = vec![0.0f64; dim];
    for b in layout.values() {
        let p_b = selection_probs[b as usize];
        if p_b == 0.0 {
            continue;
        }
        let spec = MeasurementSpec::full_forced(layout, Register::B, b);
        let (selected, _) = project(&uniform, &spec)?;
        let evolved = program.apply(&selected, Direction::Forward)?;
        for (idx, z) in evolved.amplitudes().iter().enumerate() {
            ordinary[idx] += p_b * z.norm_sqr();
        }
    }

    // Relativized: evolve first, select at the end.
    let evolved = program.apply(&uniform, Direction::Forward)?;
    let tvd = 0.5
        * evolved
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(idx, z)| (z.norm_sqr() - ordinary[idx]).abs())
            .sum::<f64>();
    Ok(tvd)
}
