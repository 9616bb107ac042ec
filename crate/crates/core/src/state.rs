//! Dense complex state vectors over the joint `B ⊗ A` basis.
//!
//! States are kept normalized after every public operation; probability
//! bookkeeping is returned separately where an operation discards amplitude
//! (projection). Equality of states is always judged through [`fidelity`],
//! which is invariant under a global phase.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::layout::{Register, RegisterLayout};

/// Projections with less than this much squared amplitude are treated as
/// projections onto a null subspace.
pub const IMPOSSIBLE_OUTCOME_THRESHOLD: f64 = 1e-12;

/// Amplitude agreement tolerance for state assertions.
pub const AMP_TOLERANCE: f64 = 1e-10;

/// A measurement of a subset of one register's bits, optionally with the
/// outcome forced to given values (a post-selected projection).
///
/// `positions` and `forced` are aligned: `forced[i]` is the required value of
/// bit `positions[i]`. Positions count from the left of the printed bitstring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementSpec {
    register: Register,
    positions: Vec<u32>,
    forced: Option<Vec<bool>>,
}

impl MeasurementSpec {
    /// Measurement of a subset of bit positions, sampled rather than forced.
    pub fn subset(layout: RegisterLayout, register: Register, positions: &[u32]) -> Result<Self> {
        Self::validate_positions(layout, positions)?;
        Ok(Self {
            register,
            positions: positions.to_vec(),
            forced: None,
        })
    }

    /// Measurement of a bit subset with the outcome forced.
    pub fn forced(
        layout: RegisterLayout,
        register: Register,
        positions: &[u32],
        values: &[bool],
    ) -> Result<Self> {
        Self::validate_positions(layout, positions)?;
        if values.len() != positions.len() {
            return Err(Error::InvalidMeasurementSpec(format!(
                "{} forced values for {} positions",
                values.len(),
                positions.len()
            )));
        }
        Ok(Self {
            register,
            positions: positions.to_vec(),
            forced: Some(values.to_vec()),
        })
    }

    /// Measurement of the full register.
    pub fn full(layout: RegisterLayout, register: Register) -> Self {
        Self {
            register,
            positions: (0..layout.n_bits()).collect(),
            forced: None,
        }
    }

    /// Full-register measurement forced to `value` (realizes "the outcome
    /// came out `value`").
    pub fn full_forced(layout: RegisterLayout, register: Register, value: u64) -> Self {
        let positions: Vec<u32> = (0..layout.n_bits()).collect();
        let values = positions.iter().map(|&p| layout.bit_of(value, p)).collect();
        Self {
            register,
            positions,
            forced: Some(values),
        }
    }

    fn validate_positions(layout: RegisterLayout, positions: &[u32]) -> Result<()> {
        if positions.is_empty() {
            return Err(Error::InvalidMeasurementSpec("empty bit subset".into()));
        }
        for (i, &p) in positions.iter().enumerate() {
            if p >= layout.n_bits() {
                return Err(Error::InvalidMeasurementSpec(format!(
                    "bit position {p} out of range for {} bits",
                    layout.n_bits()
                )));
            }
            if positions[..i].contains(&p) {
                return Err(Error::InvalidMeasurementSpec(format!(
                    "duplicate bit position {p}"
                )));
            }
        }
        Ok(())
    }

    pub fn register(&self) -> Register {
        self.register
    }

    pub fn positions(&self) -> &[u32] {
        &self.positions
    }

    pub fn forced_values(&self) -> Option<&[bool]> {
        self.forced.as_deref()
    }

    /// Same measurement with the outcome pinned to `values`.
    pub fn with_outcome(&self, values: &[bool]) -> Self {
        debug_assert_eq!(values.len(), self.positions.len());
        Self {
            register: self.register,
            positions: self.positions.clone(),
            forced: Some(values.to_vec()),
        }
    }

    /// Does register content `value` agree with `values` on this bit subset?
    fn matches(&self, layout: RegisterLayout, value: u64, values: &[bool]) -> bool {
        self.positions
            .iter()
            .zip(values)
            .all(|(&p, &v)| layout.bit_of(value, p) == v)
    }

    /// Decode an outcome index (bits in position order, first position most
    /// significant) into per-position values.
    fn decode_outcome(&self, outcome: usize) -> Vec<bool> {
        let k = self.positions.len();
        (0..k).map(|i| (outcome >> (k - 1 - i)) & 1 == 1).collect()
    }
}

/// Complex amplitudes over the joint computational basis of registers `B`
/// and `A`.
///
/// `PartialEq` is exact amplitude equality; physical comparisons go through
/// [`fidelity`] or [`StateVector::max_amp_distance`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Uniform superposition of every joint basis vector: each amplitude is
    /// the real, positive value `2^-n`.
    pub fn uniform(layout: RegisterLayout) -> Self {
        let amp = Complex64::new(1.0 / layout.register_dim() as f64, 0.0);
        Self {
            layout,
            amps: vec![amp; layout.joint_dim()],
        }
    }

    /// The joint basis state `|b⟩_B |a⟩_A`.
    pub fn basis(layout: RegisterLayout, b: u64, a: u64) -> Self {
        let mut amps = vec![Complex64::ZERO; layout.joint_dim()];
        amps[layout.joint_index(b, a)] = Complex64::ONE;
        Self { layout, amps }
    }

    /// Equal superposition of the given settings in `B`, tensor the uniform
    /// state of `A`: `(Σ_b |b⟩_B) ⊗ uniform_A`, normalized.
    pub fn from_b_support(layout: RegisterLayout, settings: &[u64]) -> Self {
        let m = layout.register_dim();
        let amp = Complex64::new(1.0 / ((settings.len() * m) as f64).sqrt(), 0.0);
        let mut amps = vec![Complex64::ZERO; layout.joint_dim()];
        for &b in settings {
            for a in 0..m as u64 {
                amps[layout.joint_index(b, a)] = amp;
            }
        }
        Self { layout, amps }
    }

    /// Equal superposition of the given joint basis states, normalized.
    pub fn from_joint_support(layout: RegisterLayout, support: &[(u64, u64)]) -> Self {
        let amp = Complex64::new(1.0 / (support.len() as f64).sqrt(), 0.0);
        let mut amps = vec![Complex64::ZERO; layout.joint_dim()];
        for &(b, a) in support {
            amps[layout.joint_index(b, a)] = amp;
        }
        Self { layout, amps }
    }

    /// Build from raw amplitudes, normalizing. Errors if the vector is
    /// (numerically) zero or has the wrong length.
    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != layout.joint_dim() {
            return Err(Error::InvalidMeasurementSpec(format!(
                "amplitude vector length {} does not match joint dimension {}",
                amps.len(),
                layout.joint_dim()
            )));
        }
        let mut state = Self { layout, amps };
        let norm_sq = state.norm_sq();
        if norm_sq < IMPOSSIBLE_OUTCOME_THRESHOLD {
            return Err(Error::ImpossibleOutcome {
                probability: norm_sq,
            });
        }
        state.renormalize();
        Ok(state)
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn amplitude(&self, b: u64, a: u64) -> Complex64 {
        self.amps[self.layout.joint_index(b, a)]
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub(crate) fn renormalize(&mut self) {
        let norm = self.norm_sq().sqrt();
        for z in &mut self.amps {
            *z /= norm;
        }
    }

    fn check_layout(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch {
                left: self.layout.n_bits(),
                right: other.layout.n_bits(),
            });
        }
        Ok(())
    }

    /// Probability distribution over one register's contents.
    pub fn register_marginal(&self, register: Register) -> Vec<f64> {
        let m = self.layout.register_dim();
        let mut probs = vec![0.0; m];
        for (idx, z) in self.amps.iter().enumerate() {
            let (b, a) = self.layout.split_index(idx);
            let value = match register {
                Register::B => b,
                Register::A => a,
            };
            probs[value as usize] += z.norm_sqr();
        }
        probs
    }

    /// Settings with more than `tol` marginal probability in `B`.
    pub fn b_support(&self, tol: f64) -> Vec<u64> {
        self.register_marginal(Register::B)
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > tol)
            .map(|(b, _)| b as u64)
            .collect()
    }

    /// Maximum amplitude difference to `other`, entry by entry.
    pub fn max_amp_distance(&self, other: &Self) -> Result<f64> {
        self.check_layout(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }
}

/// Squared overlap `|⟨a|b⟩|²`; 1 iff the states are equal up to a global
/// phase, 0 iff orthogonal.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    a.check_layout(b)?;
    let overlap: Complex64 = a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum();
    Ok(overlap.norm_sqr().clamp(0.0, 1.0))
}

/// Exact probability of each outcome of the measured bit subset, indexed by
/// the outcome bits in position order.
pub fn outcome_distribution(state: &StateVector, spec: &MeasurementSpec) -> Vec<f64> {
    let layout = state.layout;
    let n_outcomes = 1 << spec.positions().len();
    let mut probs = vec![0.0; n_outcomes];
    for (idx, z) in state.amps.iter().enumerate() {
        let (b, a) = layout.split_index(idx);
        let content = match spec.register() {
            Register::B => b,
            Register::A => a,
        };
        let mut outcome = 0usize;
        for &p in spec.positions() {
            outcome = (outcome << 1) | layout.bit_of(content, p) as usize;
        }
        probs[outcome] += z.norm_sqr();
    }
    probs
}

/// Project onto the subspace where the spec's bits take their forced values.
///
/// Returns the renormalized post-measurement state together with the
/// probability of the outcome (the squared norm of the unnormalized
/// projection). Projecting onto a subspace holding less than
/// [`IMPOSSIBLE_OUTCOME_THRESHOLD`] probability is an error.
pub fn project(state: &StateVector, spec: &MeasurementSpec) -> Result<(StateVector, f64)> {
    let values = spec.forced_values().ok_or(Error::MissingForcedOutcome)?;
    let layout = state.layout;
    let mut amps = state.amps.clone();
    let mut probability = 0.0;
    for (idx, z) in amps.iter_mut().enumerate() {
        let (b, a) = layout.split_index(idx);
        let content = match spec.register() {
            Register::B => b,
            Register::A => a,
        };
        if spec.matches(layout, content, values) {
            probability += z.norm_sqr();
        } else {
            *z = Complex64::ZERO;
        }
    }
    if probability < IMPOSSIBLE_OUTCOME_THRESHOLD {
        return Err(Error::ImpossibleOutcome { probability });
    }
    let mut projected = StateVector { layout, amps };
    projected.renormalize();
    Ok((projected, probability))
}

/// Sample an outcome of the measured bits from the exact marginal
/// distribution and collapse the state accordingly.
///
/// The draw is deterministic for a fixed seed.
pub fn sample_measure(
    state: &StateVector,
    spec: &MeasurementSpec,
    seed: u64,
) -> Result<(Vec<bool>, StateVector)> {
    let probs = outcome_distribution(state, spec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw: f64 = rng.gen();
    let mut acc = 0.0;
    let mut picked = probs.len() - 1;
    for (outcome, &p) in probs.iter().enumerate() {
        acc += p;
        if draw < acc {
            picked = outcome;
            break;
        }
    }
    // A rounding tail can land the draw past the accumulated mass on an
    // outcome of zero probability; fall back to the most likely outcome.
    if probs[picked] < IMPOSSIBLE_OUTCOME_THRESHOLD {
        picked = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
    }
    let values = spec.decode_outcome(picked);
    let (collapsed, _) = project(state, &spec.with_outcome(&values))?;
    Ok((values, collapsed))
}
