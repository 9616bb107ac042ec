//! Even sharings of the setting's bits between the two measurements, their
//! enumeration, and the sweep that checks every instance lands on the same
//! final state.

use itertools::Itertools;
use rand::{seq::SliceRandom, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::RegisterLayout;
use crate::pipelines;
use crate::state::fidelity;
use crate::trace::StateLabel;

/// An even split of the `n` bit positions: the initial measurement selects
/// the `B` bits at `initial`, the final measurement selects the `A` bits at
/// the complementary positions. Together the two outcomes name one setting.
///
/// For odd `n` the initial half gets the extra bit: `|initial| = ⌈n/2⌉`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sharing {
    n_bits: u32,
    initial: Vec<u32>,
    final_: Vec<u32>,
}

impl Sharing {
    pub fn new(n_bits: u32, initial_positions: &[u32]) -> Result<Self> {
        let expected = n_bits.div_ceil(2) as usize;
        let mut initial: Vec<u32> = initial_positions.to_vec();
        initial.sort_unstable();
        initial.dedup();
        if initial.len() != initial_positions.len() {
            return Err(Error::InvalidSharing("duplicate bit positions".into()));
        }
        if initial.len() != expected {
            return Err(Error::InvalidSharing(format!(
                "initial half must hold {expected} of {n_bits} bits, got {}",
                initial.len()
            )));
        }
        if initial.iter().any(|&p| p >= n_bits) {
            return Err(Error::InvalidSharing(format!(
                "bit position out of range for {n_bits} bits"
            )));
        }
        let final_ = (0..n_bits).filter(|p| !initial.contains(p)).collect();
        Ok(Self {
            n_bits,
            initial,
            final_,
        })
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    /// `B` bit positions selected by the initial measurement.
    pub fn initial_positions(&self) -> &[u32] {
        &self.initial
    }

    /// `A` bit positions selected by the final measurement (the complement).
    pub fn final_positions(&self) -> &[u32] {
        &self.final_
    }

    /// The initial-half bits of a concrete setting.
    pub fn initial_bits_of(&self, layout: RegisterLayout, setting: u64) -> Vec<bool> {
        self.initial
            .iter()
            .map(|&p| layout.bit_of(setting, p))
            .collect()
    }

    /// The final-half bits of a concrete setting.
    pub fn final_bits_of(&self, layout: RegisterLayout, setting: u64) -> Vec<bool> {
        self.final_
            .iter()
            .map(|&p| layout.bit_of(setting, p))
            .collect()
    }

    /// Compact label, e.g. `B{0}|A{1}`.
    pub fn label(&self) -> String {
        let join = |ps: &[u32]| ps.iter().map(|p| p.to_string()).join(",");
        format!("B{{{}}}|A{{{}}}", join(&self.initial), join(&self.final_))
    }
}

/// Every even sharing for a register size, in lexicographic order of the
/// initial bit subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharingFamily {
    pub n_bits: u32,
    pub sharings: Vec<Sharing>,
}

/// Enumerate all `C(n, ⌈n/2⌉)` even sharings.
pub fn enumerate_sharings(n_bits: u32) -> Result<SharingFamily> {
    let layout = RegisterLayout::new(n_bits)?; // range check
    let half = n_bits.div_ceil(2) as usize;
    let sharings = (0..layout.n_bits())
        .combinations(half)
        .map(|subset| Sharing::new(n_bits, &subset).expect("enumerated subsets are valid"))
        .collect();
    Ok(SharingFamily { n_bits, sharings })
}

/// Candidate-space sizes before and after the loop: `2^n` settings shrink to
/// the `2^(n - ⌈n/2⌉)` settings consistent with the final-half selection.
pub fn reduction_factor(n_bits: u32) -> (u64, u64) {
    let before = 1u64 << n_bits;
    let after = 1u64 << (n_bits - n_bits.div_ceil(2));
    (before, after)
}

/// How much of the sharing family a sweep visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Exhaustive,
    /// Random subset of the family, seeded; bounds runtime at large `n`.
    Sampled {
        count: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub sharing: String,
    pub fidelity: f64,
    pub pass: bool,
}

/// Per-sharing fidelities against the ordinary final state, plus the summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub setting: String,
    pub entries: Vec<SweepEntry>,
    pub pass_count: usize,
    pub min_fidelity: f64,
    pub all_pass: bool,
}

/// Run the time-symmetrization instance for every sharing of the family and
/// compare each final selected state against the ordinary description's
/// final state.
pub fn sweep_instances(
    layout: RegisterLayout,
    setting: u64,
    mode: SweepMode,
) -> Result<SweepReport> {
    let family = enumerate_sharings(layout.n_bits())?;
    let mut picked: Vec<&Sharing> = family.sharings.iter().collect();
    if let SweepMode::Sampled { count, seed } = mode {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        picked.shuffle(&mut rng);
        picked.truncate(count.max(1));
        picked.sort_by_key(|s| s.initial_positions().to_vec());
    }

    let (ordinary, _) = pipelines::run_ordinary(layout, pipelines::Selection::Setting(setting))?;
    let ordinary_final =
        ordinary
            .state(StateLabel::ForwardEvolved)
            .ok_or(Error::MissingTraceState {
                label: "forward_evolved",
            })?;

    let mut entries = Vec::with_capacity(picked.len());
    for sharing in picked {
        let trace = pipelines::run_timesym_instance(
            layout,
            sharing,
            &sharing.initial_bits_of(layout, setting),
            &sharing.final_bits_of(layout, setting),
        )?;
        let selected = trace
            .state(StateLabel::T2Selected)
            .ok_or(Error::MissingTraceState {
                label: "t2_selected",
            })?;
        let f = fidelity(selected, ordinary_final)?;
        entries.push(SweepEntry {
            sharing: sharing.label(),
            fidelity: f,
            pass: f >= 1.0 - 1e-9,
        });
    }
    let pass_count = entries.iter().filter(|e| e.pass).count();
    let min_fidelity = entries.iter().map(|e| e.fidelity).fold(1.0, f64::min);
    let all_pass = pass_count == entries.len();
    Ok(SweepReport {
        setting: layout.format_value(setting),
        entries,
        pass_count,
        min_fidelity,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_bit_family_is_left_then_right() {
        let family = enumerate_sharings(2).unwrap();
        assert_eq!(family.sharings.len(), 2);
        assert_eq!(family.sharings[0].initial_positions(), &[0]);
        assert_eq!(family.sharings[0].final_positions(), &[1]);
        assert_eq!(family.sharings[1].initial_positions(), &[1]);
        assert_eq!(family.sharings[1].final_positions(), &[0]);
    }

    #[test]
    fn family_sizes_match_binomials() {
        assert_eq!(enumerate_sharings(4).unwrap().sharings.len(), 6);
        // Odd n: the initial half takes the extra bit.
        let family = enumerate_sharings(3).unwrap();
        assert_eq!(family.sharings.len(), 3);
        for sharing in &family.sharings {
            assert_eq!(sharing.initial_positions().len(), 2);
            assert_eq!(sharing.final_positions().len(), 1);
        }
    }

    #[test]
    fn family_has_no_duplicates() {
        for n in 1..=6 {
            let family = enumerate_sharings(n).unwrap();
            let mut subsets: Vec<_> = family
                .sharings
                .iter()
                .map(|s| s.initial_positions().to_vec())
                .collect();
            let len = subsets.len();
            subsets.sort();
            subsets.dedup();
            assert_eq!(subsets.len(), len);
        }
    }

    #[test]
    fn enumerate_rejects_out_of_range() {
        assert!(enumerate_sharings(0).is_err());
        assert!(enumerate_sharings(9).is_err());
    }

    #[test]
    fn sharing_validation() {
        assert!(Sharing::new(2, &[0, 1]).is_err()); // too many
        assert!(Sharing::new(2, &[2]).is_err()); // out of range
        assert!(Sharing::new(4, &[1, 1]).is_err()); // duplicate
        let s = Sharing::new(4, &[0, 2]).unwrap();
        assert_eq!(s.final_positions(), &[1, 3]);
        assert_eq!(s.label(), "B{0,2}|A{1,3}");
    }

    #[test]
    fn loop_supports_of_both_sharings_intersect_in_the_setting() {
        let layout = RegisterLayout::new(2).unwrap();
        let setting = 0b11u64;
        let mut supports = Vec::new();
        for sharing in &enumerate_sharings(2).unwrap().sharings {
            let trace = pipelines::run_relativized_loop(
                layout,
                sharing,
                &sharing.final_bits_of(layout, setting),
            )
            .unwrap();
            let backward = trace.state(StateLabel::BackwardEvolved).unwrap();
            supports.push(backward.b_support(1e-9));
        }
        assert_eq!(supports[0], vec![0b01, 0b11]);
        assert_eq!(supports[1], vec![0b10, 0b11]);
        let intersection: Vec<u64> = supports[0]
            .iter()
            .filter(|b| supports[1].contains(b))
            .copied()
            .collect();
        assert_eq!(intersection, vec![setting]);
    }

    #[test]
    fn sweep_confirms_every_sharing_for_one_setting() {
        let layout = RegisterLayout::new(2).unwrap();
        let report = sweep_instances(layout, 0b01, SweepMode::Exhaustive).unwrap();
        assert_eq!(report.entries.len(), 2);
        assert!(report.all_pass);
        assert!(report.min_fidelity >= 1.0 - 1e-9);
    }

    #[test]
    fn sweep_report_round_trips_through_json() {
        let layout = RegisterLayout::new(2).unwrap();
        let report = sweep_instances(layout, 0b10, SweepMode::Exhaustive).unwrap();
        let line = serde_json::to_string(&report).unwrap();
        let parsed: SweepReport = serde_json::from_str(&line).unwrap();
        assert_eq!(report, parsed);
    }

    #[test]
    fn sampled_sweep_is_deterministic_and_bounded() {
        let layout = RegisterLayout::new(4).unwrap();
        let mode = SweepMode::Sampled { count: 3, seed: 9 };
        let r1 = sweep_instances(layout, 0b0101, mode).unwrap();
        let r2 = sweep_instances(layout, 0b0101, mode).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1.entries.len(), 3);
        assert!(r1.all_pass);
    }

    #[test]
    fn reduction_factors() {
        assert_eq!(reduction_factor(2), (4, 2));
        assert_eq!(reduction_factor(4), (16, 4));
        assert_eq!(reduction_factor(8), (256, 16));
        // Even n: the reduced space is the square root of the original.
        for n in [2u32, 4, 6, 8] {
            let (before, after) = reduction_factor(n);
            assert_eq!(after * after, before);
        }
    }
}
