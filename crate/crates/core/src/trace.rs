//! Labeled traces of the measurement/evolution diagrams and their two
//! serializations.
//!
//! A [`Trace`] is an alternating list of states and operations. The text form
//! lays events out on a zigzag grid (states at the `t1` column on the left,
//! states at the `t2` column on the right, arrows between). The structured
//! form is one record per event with a sparse amplitude list, suitable for
//! line-delimited output and exact round-tripping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::Register;
use crate::state::StateVector;

/// Which diagram a trace reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceKind {
    /// Initial measurement, forward computation, final measurement.
    Ordinary,
    /// Initial projection deferred past the computation.
    Relativized,
    /// Even split of the selection between the two measurements, with the
    /// final outcome propagated backward.
    TimesymInstance,
    /// The deferred-projection causal loop.
    RelativizedLoop,
    /// Bottom line of the loop read in the usual left-to-right way.
    LoopForwardReading,
    /// Entangled-pair variant of the loop.
    Epr,
}

impl TraceKind {
    pub fn name(&self) -> &'static str {
        match self {
            TraceKind::Ordinary => "ordinary",
            TraceKind::Relativized => "relativized",
            TraceKind::TimesymInstance => "timesym_instance",
            TraceKind::RelativizedLoop => "relativized_loop",
            TraceKind::LoopForwardReading => "loop_forward_reading",
            TraceKind::Epr => "epr",
        }
    }

    fn allows_backward(&self) -> bool {
        matches!(
            self,
            TraceKind::TimesymInstance | TraceKind::RelativizedLoop | TraceKind::Epr
        )
    }
}

/// Position of a state in the diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateLabel {
    T1Premeasure,
    T1Selected,
    ForwardEvolved,
    T2Selected,
    BackwardEvolved,
}

impl StateLabel {
    pub fn name(&self) -> &'static str {
        match self {
            StateLabel::T1Premeasure => "t1_premeasure",
            StateLabel::T1Selected => "t1_selected",
            StateLabel::ForwardEvolved => "forward_evolved",
            StateLabel::T2Selected => "t2_selected",
            StateLabel::BackwardEvolved => "backward_evolved",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeDirection {
    Forward,
    Backward,
    None,
}

impl TimeDirection {
    pub fn name(&self) -> &'static str {
        match self {
            TimeDirection::Forward => "forward",
            TimeDirection::Backward => "backward",
            TimeDirection::None => "none",
        }
    }
}

/// Operation descriptor sitting between two states.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceOp {
    /// Projective measurement of a bit subset with a known outcome.
    Measure {
        register: Register,
        positions: Vec<u32>,
        outcome: Vec<bool>,
    },
    /// The search program (or its adjoint, per the event direction).
    Unitary,
}

impl TraceOp {
    fn describe(&self, direction: TimeDirection, n_bits: u32) -> String {
        match self {
            TraceOp::Measure {
                register,
                positions,
                outcome,
            } => {
                let bits: String = outcome.iter().map(|&v| if v { '1' } else { '0' }).collect();
                format!(
                    "measure {} -> {bits}",
                    observable_label(*register, positions, n_bits)
                )
            }
            TraceOp::Unitary => match direction {
                TimeDirection::Backward => "unitary_adjoint".to_string(),
                _ => "unitary".to_string(),
            },
        }
    }
}

/// Short name for a measured observable: the full register, or a bit subset.
pub fn observable_label(register: Register, positions: &[u32], n_bits: u32) -> String {
    if positions.len() == n_bits as usize {
        return register.to_string();
    }
    if n_bits == 2 && positions == [0] {
        return format!("{register}_l");
    }
    if n_bits == 2 && positions == [1] {
        return format!("{register}_r");
    }
    let list = positions
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(",");
    format!("{register}[{list}]")
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    State {
        label: StateLabel,
        direction: TimeDirection,
        state: StateVector,
    },
    Op {
        op: TraceOp,
        direction: TimeDirection,
    },
}

/// An ordered diagram: states and operations, alternating, states at both
/// ends.
#[derive(Debug, Clone)]
pub struct Trace {
    pub kind: TraceKind,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn new(kind: TraceKind) -> Self {
        Self {
            kind,
            events: Vec::new(),
        }
    }

    pub(crate) fn push_state(
        &mut self,
        label: StateLabel,
        direction: TimeDirection,
        state: StateVector,
    ) {
        self.events.push(TraceEvent::State {
            label,
            direction,
            state,
        });
    }

    pub(crate) fn push_op(&mut self, op: TraceOp, direction: TimeDirection) {
        self.events.push(TraceEvent::Op { op, direction });
    }

    /// First state carrying `label`, if any.
    pub fn state(&self, label: StateLabel) -> Option<&StateVector> {
        self.events.iter().find_map(|e| match e {
            TraceEvent::State {
                label: l, state, ..
            } if *l == label => Some(state),
            _ => None,
        })
    }

    pub fn final_state(&self) -> &StateVector {
        self.events
            .iter()
            .rev()
            .find_map(|e| match e {
                TraceEvent::State { state, .. } => Some(state),
                _ => None,
            })
            .expect("trace holds at least one state")
    }

    /// Structural checks: alternation, state ends, normalization, and the
    /// rule that backward propagation only appears in loop-bearing kinds.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Error::IdentityCheckFailed {
            identity: msg,
            fidelity: 0.0,
        };
        if self.events.is_empty() {
            return Err(fail("trace is empty".into()));
        }
        for (i, event) in self.events.iter().enumerate() {
            let is_state = matches!(event, TraceEvent::State { .. });
            if is_state != (i % 2 == 0) {
                return Err(fail(format!("event {i}: states and ops must alternate")));
            }
            match event {
                TraceEvent::State {
                    direction, state, ..
                } => {
                    if (state.norm_sq() - 1.0).abs() > 1e-10 {
                        return Err(fail(format!("event {i}: state not normalized")));
                    }
                    if *direction == TimeDirection::Backward && !self.kind.allows_backward() {
                        return Err(fail(format!(
                            "event {i}: backward state in {} trace",
                            self.kind.name()
                        )));
                    }
                }
                TraceEvent::Op { direction, .. } => {
                    if *direction == TimeDirection::Backward && !self.kind.allows_backward() {
                        return Err(fail(format!(
                            "event {i}: backward op in {} trace",
                            self.kind.name()
                        )));
                    }
                }
            }
        }
        if self.events.len().is_multiple_of(2) {
            return Err(fail("trace must end on a state".into()));
        }
        Ok(())
    }

    /// One record per event, preceded by a `trace:<kind>` header record.
    pub fn to_records(&self) -> Vec<TraceRecord> {
        let n_bits = self.final_state().layout().n_bits();
        let mut records = vec![TraceRecord {
            label: format!("trace:{}", self.kind.name()),
            direction: TimeDirection::None.name().to_string(),
            amplitudes: None,
        }];
        for event in &self.events {
            records.push(match event {
                TraceEvent::State {
                    label,
                    direction,
                    state,
                } => TraceRecord {
                    label: label.name().to_string(),
                    direction: direction.name().to_string(),
                    amplitudes: Some(sparse_amplitudes(state)),
                },
                TraceEvent::Op { op, direction } => TraceRecord {
                    label: op.describe(*direction, n_bits),
                    direction: direction.name().to_string(),
                    amplitudes: None,
                },
            });
        }
        records
    }
}

/// One line of structured output: an event label, its time direction, and
/// (for states) the sparse amplitude list as `(bits_B, bits_A, re, im)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub label: String,
    pub direction: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub amplitudes: Option<Vec<AmplitudeEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeEntry(pub String, pub String, pub f64, pub f64);

fn sparse_amplitudes(state: &StateVector) -> Vec<AmplitudeEntry> {
    let layout = state.layout();
    state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm_sqr() > 1e-24)
        .map(|(idx, z)| {
            let (b, a) = layout.split_index(idx);
            AmplitudeEntry(layout.format_value(b), layout.format_value(a), z.re, z.im)
        })
        .collect()
}

pub fn records_to_jsonl(records: &[TraceRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("records serialize"))
        .map(|line| line + "\n")
        .collect()
}

pub fn records_from_jsonl(input: &str) -> Result<Vec<TraceRecord>> {
    input
        .lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| serde_json::from_str(line).map_err(|e| Error::Parse(e.to_string())))
        .collect()
}

// ---------------------------------------------------------------------------
// Text rendering
// ---------------------------------------------------------------------------

/// Render one state as a ket expression, dropping normalization the way the
/// diagrams do: a product of register superpositions when the state factors,
/// a sum of joint kets otherwise.
pub fn format_state(state: &StateVector) -> String {
    let layout = state.layout();
    let m = layout.register_dim();
    let tol = 1e-9;

    // Collect the B x A amplitude matrix and its largest entry.
    let amp = |b: usize, a: usize| state.amplitude(b as u64, a as u64);
    let (mut b0, mut a0, mut max) = (0, 0, 0.0f64);
    for b in 0..m {
        for a in 0..m {
            let norm = amp(b, a).norm();
            if norm > max {
                max = norm;
                b0 = b;
                a0 = a;
            }
        }
    }
    if max < tol {
        return "0".to_string();
    }

    // Rank-1 check: state = (Σ u_b |b⟩_B)(Σ v_a |a⟩_A).
    let u: Vec<num_complex::Complex64> = (0..m).map(|b| amp(b, a0)).collect();
    let v: Vec<num_complex::Complex64> = (0..m).map(|a| amp(b0, a) / amp(b0, a0)).collect();
    let rank_one = (0..m).all(|b| (0..m).all(|a| (amp(b, a) - u[b] * v[a]).norm() < tol * max));

    if rank_one {
        let left = format_factor(&u, Register::B, layout.n_bits(), tol);
        let right = format_factor(&v, Register::A, layout.n_bits(), tol);
        format!("{left} {right}")
    } else {
        let mut terms = Vec::new();
        let reference = amp(b0, a0);
        for b in 0..m {
            for a in 0..m {
                let z = amp(b, a);
                if z.norm() < tol * max {
                    continue;
                }
                let ket = format!(
                    "|{}>_B |{}>_A",
                    layout.format_value(b as u64),
                    layout.format_value(a as u64)
                );
                terms.push(term_with_ratio(z / reference, &ket, tol));
            }
        }
        join_terms(terms)
    }
}

fn format_factor(
    coeffs: &[num_complex::Complex64],
    register: Register,
    n_bits: u32,
    tol: f64,
) -> String {
    let layout = crate::layout::RegisterLayout::new(n_bits).expect("valid layout");
    let max = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let reference = *coeffs
        .iter()
        .find(|z| z.norm() > tol * max)
        .expect("factor has support");
    let mut terms = Vec::new();
    for (value, z) in coeffs.iter().enumerate() {
        if z.norm() < tol * max {
            continue;
        }
        let ket = format!("|{}>_{register}", layout.format_value(value as u64));
        terms.push(term_with_ratio(z / reference, &ket, tol));
    }
    if terms.len() == 1 && !terms[0].starts_with('-') && !terms[0].starts_with('(') {
        return terms.into_iter().next().unwrap();
    }
    format!("({})", join_terms(terms))
}

/// Format a single term given its amplitude relative to the reference term.
fn term_with_ratio(ratio: num_complex::Complex64, ket: &str, tol: f64) -> String {
    if (ratio - 1.0).norm() < tol {
        ket.to_string()
    } else if (ratio + 1.0).norm() < tol {
        format!("-{ket}")
    } else {
        format!("({:+.4}{:+.4}i) {ket}", ratio.re, ratio.im)
    }
}

fn join_terms(terms: Vec<String>) -> String {
    let mut out = String::new();
    for (i, term) in terms.iter().enumerate() {
        if i == 0 {
            out.push_str(term);
        } else if let Some(stripped) = term.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(stripped);
        } else {
            out.push_str(" + ");
            out.push_str(term);
        }
    }
    out
}

/// A row of the zigzag grid: optional left state, middle arrow, right state.
#[derive(Default)]
struct GridRow {
    left: String,
    mid: String,
    right: String,
}

#[derive(Clone, Copy, PartialEq)]
enum Column {
    Left,
    Right,
}

/// Header cells naming the two measurement times and the arrow between them.
fn header_row(trace: &Trace, n_bits: u32) -> GridRow {
    let measured = |register: Register| -> Option<String> {
        trace.events.iter().find_map(|e| match e {
            TraceEvent::Op {
                op:
                    TraceOp::Measure {
                        register: r,
                        positions,
                        ..
                    },
                ..
            } if *r == register => Some(observable_label(register, positions, n_bits)),
            _ => None,
        })
    };
    let full =
        |register: Register| observable_label(register, &(0..n_bits).collect::<Vec<_>>(), n_bits);
    let mid = if trace.kind.allows_backward() {
        "t1 <-> t2".to_string()
    } else {
        "t1 -> t2".to_string()
    };
    let (left, right) = match trace.kind {
        // The initial measurement of B is part of both descriptions, even
        // when its projection is deferred past the computation.
        TraceKind::Ordinary | TraceKind::Relativized => (
            format!("time t1, meas. of {}", full(Register::B)),
            format!("time t2, meas. of {}", full(Register::A)),
        ),
        TraceKind::TimesymInstance => (
            format!(
                "time t1, meas. of {}",
                measured(Register::B).unwrap_or_else(|| full(Register::B))
            ),
            format!(
                "time t2, meas. of {}",
                measured(Register::A).unwrap_or_else(|| full(Register::A))
            ),
        ),
        TraceKind::RelativizedLoop => {
            // The initial half is the positional complement of the final one.
            let final_positions = trace.events.iter().find_map(|e| match e {
                TraceEvent::Op {
                    op: TraceOp::Measure { positions, .. },
                    ..
                } => Some(positions.clone()),
                _ => None,
            });
            let initial: Vec<u32> = (0..n_bits)
                .filter(|p| final_positions.as_ref().is_none_or(|f| !f.contains(p)))
                .collect();
            (
                format!(
                    "time t1, meas. of {}",
                    observable_label(Register::B, &initial, n_bits)
                ),
                format!(
                    "time t2, meas. of {}",
                    measured(Register::A).unwrap_or_else(|| full(Register::A))
                ),
            )
        }
        TraceKind::LoopForwardReading => ("time t1".to_string(), "time t2".to_string()),
        TraceKind::Epr => {
            let first = measured(Register::B)
                .or_else(|| measured(Register::A))
                .unwrap_or_default();
            ("time t1".to_string(), format!("time t2, meas. of {first}"))
        }
    };
    GridRow { left, mid, right }
}

/// Render a trace as one ASCII table in the diagram layout: `t1`-side states
/// in the left column, `t2`-side states in the right column, unitary arrows
/// between them and projection arrows (`vv`) under the state they act on.
pub fn render_table(trace: &Trace, title: &str) -> String {
    let n_bits = trace.final_state().layout().n_bits();
    let column_of = |label: StateLabel| match label {
        StateLabel::T1Premeasure | StateLabel::T1Selected | StateLabel::BackwardEvolved => {
            Column::Left
        }
        StateLabel::ForwardEvolved | StateLabel::T2Selected => Column::Right,
    };
    let solo = |col: Column, text: String| match col {
        Column::Left => GridRow {
            left: text,
            ..GridRow::default()
        },
        Column::Right => GridRow {
            right: text,
            ..GridRow::default()
        },
    };

    let mut rows: Vec<GridRow> = vec![header_row(trace, n_bits), GridRow::default()];
    // State held back so a unitary arrow can join it with its partner row.
    let mut pending: Option<String> = None;
    let mut last_col = Column::Left;

    // Emit a state; hold it instead when the event after it is a unitary.
    let place_state = |idx: usize,
                       rows: &mut Vec<GridRow>,
                       pending: &mut Option<String>,
                       last_col: &mut Column| {
        if let Some(TraceEvent::State { label, state, .. }) = trace.events.get(idx) {
            let text = format_state(state);
            let col = column_of(*label);
            *last_col = col;
            let joins_unitary = matches!(
                trace.events.get(idx + 1),
                Some(TraceEvent::Op {
                    op: TraceOp::Unitary,
                    ..
                })
            );
            if joins_unitary {
                *pending = Some(text);
            } else {
                rows.push(solo(col, text));
            }
        }
    };

    place_state(0, &mut rows, &mut pending, &mut last_col);
    let mut i = 1;
    while i + 1 < trace.events.len() {
        if let TraceEvent::Op { op, direction } = &trace.events[i] {
            match op {
                TraceOp::Unitary => {
                    if let TraceEvent::State { label, state, .. } = &trace.events[i + 1] {
                        let text = format_state(state);
                        last_col = column_of(*label);
                        let held = pending.take().unwrap_or_default();
                        rows.push(match direction {
                            TimeDirection::Backward => GridRow {
                                left: text,
                                mid: "<= U+ <=".to_string(),
                                right: held,
                            },
                            _ => GridRow {
                                left: held,
                                mid: "=> U  =>".to_string(),
                                right: text,
                            },
                        });
                    }
                }
                TraceOp::Measure {
                    register,
                    positions,
                    outcome,
                } => {
                    let bits: String = outcome.iter().map(|&v| if v { '1' } else { '0' }).collect();
                    let note = format!(
                        "  vv {} -> {bits}",
                        observable_label(*register, positions, n_bits)
                    );
                    rows.push(solo(last_col, note));
                    place_state(i + 1, &mut rows, &mut pending, &mut last_col);
                }
            }
        }
        i += 2;
    }

    // Column widths over the rows that use the grid.
    let left_width = rows
        .iter()
        .filter(|r| !r.mid.is_empty() || !r.right.is_empty())
        .map(|r| r.left.len())
        .max()
        .unwrap_or(0);
    let mid_width = rows.iter().map(|r| r.mid.len()).max().unwrap_or(0);

    let mut out = String::new();
    out.push_str(title);
    out.push('\n');
    for row in &rows {
        let line = if row.mid.is_empty() && row.right.is_empty() {
            row.left.clone()
        } else {
            format!(
                "{:<lw$} {:^mw$} {}",
                row.left,
                row.mid,
                row.right,
                lw = left_width,
                mw = mid_width,
            )
        };
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::RegisterLayout;

    fn layout(n: u32) -> RegisterLayout {
        RegisterLayout::new(n).unwrap()
    }

    #[test]
    fn format_factored_states() {
        let lay = layout(2);
        let uniform = StateVector::uniform(lay);
        assert_eq!(
            format_state(&uniform),
            "(|00>_B + |01>_B + |10>_B + |11>_B) (|00>_A + |01>_A + |10>_A + |11>_A)"
        );
        let selected = StateVector::from_b_support(lay, &[0b01]);
        assert_eq!(
            format_state(&selected),
            "|01>_B (|00>_A + |01>_A + |10>_A + |11>_A)"
        );
        let solved = StateVector::basis(lay, 0b01, 0b01);
        assert_eq!(format_state(&solved), "|01>_B |01>_A");
    }

    #[test]
    fn format_entangled_sum() {
        let lay = layout(2);
        let s = StateVector::from_joint_support(lay, &[(1, 1), (3, 3)]);
        assert_eq!(format_state(&s), "|01>_B |01>_A + |11>_B |11>_A");
    }

    #[test]
    fn records_round_trip() {
        let lay = layout(2);
        let mut trace = Trace::new(TraceKind::Ordinary);
        trace.push_state(
            StateLabel::T1Premeasure,
            TimeDirection::None,
            StateVector::uniform(lay),
        );
        trace.push_op(
            TraceOp::Measure {
                register: Register::B,
                positions: vec![0, 1],
                outcome: vec![false, true],
            },
            TimeDirection::None,
        );
        trace.push_state(
            StateLabel::T1Selected,
            TimeDirection::None,
            StateVector::from_b_support(lay, &[1]),
        );
        trace.validate().unwrap();

        let records = trace.to_records();
        let jsonl = records_to_jsonl(&records);
        let parsed = records_from_jsonl(&jsonl).unwrap();
        assert_eq!(records, parsed);
        assert_eq!(parsed[0].label, "trace:ordinary");
        assert_eq!(parsed[2].label, "measure B -> 01");
    }

    #[test]
    fn validate_rejects_backward_in_ordinary() {
        let lay = layout(1);
        let mut trace = Trace::new(TraceKind::Ordinary);
        trace.push_state(
            StateLabel::T1Premeasure,
            TimeDirection::Backward,
            StateVector::uniform(lay),
        );
        assert!(trace.validate().is_err());
    }

    #[test]
    fn validate_rejects_nonalternating_events() {
        let lay = layout(1);
        let mut trace = Trace::new(TraceKind::Ordinary);
        trace.push_state(
            StateLabel::T1Premeasure,
            TimeDirection::None,
            StateVector::uniform(lay),
        );
        trace.push_state(
            StateLabel::T1Selected,
            TimeDirection::None,
            StateVector::uniform(lay),
        );
        assert!(trace.validate().is_err());
    }
}
