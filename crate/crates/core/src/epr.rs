//! Entangled-pair variant of the loop: a maximally correlated pair, a
//! separation step that leaves both computational projectors alone, and the
//! first measurement outcome carried backward to before the separation.

use crate::error::{Error, Result};
use crate::grover::{Direction, GateStep, UnitaryProgram};
use crate::layout::{Register, RegisterLayout};
use crate::state::{outcome_distribution, project, MeasurementSpec, StateVector};
use crate::trace::{StateLabel, TimeDirection, Trace, TraceKind, TraceOp};

/// One bit per register: the pair `(|0⟩_B|0⟩_A + |1⟩_B|1⟩_A)/√2`.
pub fn pair_layout() -> RegisterLayout {
    RegisterLayout::new(1).expect("one bit per register is a valid layout")
}

pub fn entangled_pair() -> StateVector {
    StateVector::from_joint_support(pair_layout(), &[(0, 0), (1, 1)])
}

/// A separated entangled pair and which side gets measured first.
///
/// Separation is modeled as any program that commutes with the computational
/// projectors of both sides, i.e. one that is diagonal in the joint basis; it
/// relabels phases but never moves probability between basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct EprScenario {
    separation: UnitaryProgram,
    first_measured: Register,
}

impl EprScenario {
    /// Separation that does nothing (the default).
    pub fn identity(first_measured: Register) -> Self {
        Self {
            separation: UnitaryProgram::identity(pair_layout()),
            first_measured,
        }
    }

    /// Separation by a nontrivial diagonal program: phase `φ` on the matched
    /// components.
    pub fn with_phase(phase: f64, first_measured: Register) -> Self {
        Self {
            separation: UnitaryProgram::from_steps(
                pair_layout(),
                vec![GateStep::PhaseOracle(phase)],
            ),
            first_measured,
        }
    }

    /// Use a caller-supplied separation program, rejecting any step that
    /// fails to commute with the single-side projectors.
    pub fn with_separation(separation: UnitaryProgram, first_measured: Register) -> Result<Self> {
        for step in separation.steps() {
            match step {
                GateStep::Oracle | GateStep::PhaseOracle(_) => {}
                other => {
                    return Err(Error::NonCommutingSeparation {
                        step: format!("{other:?}"),
                    })
                }
            }
        }
        Ok(Self {
            separation,
            first_measured,
        })
    }

    pub fn first_measured(&self) -> Register {
        self.first_measured
    }

    pub fn second_side(&self) -> Register {
        match self.first_measured {
            Register::B => Register::A,
            Register::A => Register::B,
        }
    }
}

/// Run the loop: separate, measure the first side (forced outcome), carry
/// the result backward by the adjoint separation to before the two sides
/// parted.
pub fn run_epr(scenario: &EprScenario, forced_first_outcome: bool) -> Result<Trace> {
    let layout = pair_layout();
    let pair = entangled_pair();
    let separated = scenario.separation.apply(&pair, Direction::Forward)?;
    let spec =
        MeasurementSpec::full_forced(layout, scenario.first_measured, forced_first_outcome as u64);
    let (selected, _) = project(&separated, &spec)?;
    let backward = scenario.separation.apply(&selected, Direction::Adjoint)?;

    let mut trace = Trace::new(TraceKind::Epr);
    trace.push_state(StateLabel::T1Premeasure, TimeDirection::None, pair);
    trace.push_op(TraceOp::Unitary, TimeDirection::Forward);
    trace.push_state(
        StateLabel::ForwardEvolved,
        TimeDirection::Forward,
        separated,
    );
    trace.push_op(
        TraceOp::Measure {
            register: scenario.first_measured,
            positions: vec![0],
            outcome: vec![forced_first_outcome],
        },
        TimeDirection::None,
    );
    trace.push_state(StateLabel::T2Selected, TimeDirection::None, selected);
    trace.push_op(TraceOp::Unitary, TimeDirection::Backward);
    trace.push_state(
        StateLabel::BackwardEvolved,
        TimeDirection::Backward,
        backward,
    );
    trace.validate()?;
    Ok(trace)
}

/// Probability that the second measurement agrees with the first, computed
/// as one minus the mismatched-component weight of the post-measurement
/// state. The mismatched amplitudes are written as exact zeros by the
/// projection and stay zero under any diagonal separation, so agreement on a
/// normalized state is exactly 1.
pub fn agreement_probability(trace: &Trace) -> Result<f64> {
    let selected = trace
        .state(StateLabel::T2Selected)
        .ok_or(Error::MissingTraceState {
            label: "t2_selected",
        })?;
    let layout = selected.layout();
    let mismatch: f64 = layout
        .values()
        .flat_map(|b| layout.values().map(move |a| (b, a)))
        .filter(|(b, a)| b != a)
        .map(|(b, a)| selected.amplitude(b, a).norm_sqr())
        .sum();
    Ok(1.0 - mismatch)
}

/// Largest change the first-side measurement makes to the other side's
/// marginal distribution: compares the unmeasured marginal against the
/// outcome-weighted average of the collapsed marginals.
pub fn no_signaling_deviation(scenario: &EprScenario) -> Result<f64> {
    let layout = pair_layout();
    let pair = entangled_pair();
    let separated = scenario.separation.apply(&pair, Direction::Forward)?;
    let second = scenario.second_side();

    let before = separated.register_marginal(second);
    let first_spec = MeasurementSpec::full(layout, scenario.first_measured);
    let outcome_probs = outcome_distribution(&separated, &first_spec);

    let mut averaged = vec![0.0f64; before.len()];
    for (outcome, &p) in outcome_probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let spec = MeasurementSpec::full_forced(layout, scenario.first_measured, outcome as u64);
        let (collapsed, _) = project(&separated, &spec)?;
        for (value, q) in collapsed.register_marginal(second).iter().enumerate() {
            averaged[value] += p * q;
        }
    }
    Ok(before
        .iter()
        .zip(&averaged)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Fidelity of the backward leg evolved forward against the post-measurement
/// state (the loop's bottom line read left to right).
pub fn loop_parity_fidelity(scenario: &EprScenario, trace: &Trace) -> Result<f64> {
    let backward = trace
        .state(StateLabel::BackwardEvolved)
        .ok_or(Error::MissingTraceState {
            label: "backward_evolved",
        })?;
    let selected = trace
        .state(StateLabel::T2Selected)
        .ok_or(Error::MissingTraceState {
            label: "t2_selected",
        })?;
    let replayed = scenario.separation.apply(backward, Direction::Forward)?;
    crate::state::fidelity(&replayed, selected)
}
