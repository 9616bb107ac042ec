//! Classical drawer-search query counts and the query-count comparison
//! against the quantum search.
//!
//! The query model: one classical query opens one drawer; one quantum query
//! is one oracle application. A classical searcher may stop without opening
//! the last candidate drawer, since an empty sweep of all but one pins the
//! ball by elimination.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grover::{plan_variant, run_search, VariantKind};
use crate::layout::RegisterLayout;
use crate::state::StateVector;

/// What the searcher knows before opening any drawer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    /// No advance information: every drawer is a candidate.
    Blind,
    /// The ball is known to sit in one of these drawers.
    HalfInfo { known: Vec<u64> },
}

impl Strategy {
    fn candidates(&self, n_drawers: u64) -> Vec<u64> {
        match self {
            Strategy::Blind => (0..n_drawers).collect(),
            Strategy::HalfInfo { known } => known.clone(),
        }
    }
}

/// Open drawers in `query_order` (skipping non-candidates) until the ball's
/// location is known, and return how many were opened. The last unopened
/// candidate never needs opening.
pub fn classical_search(
    n_drawers: u64,
    strategy: &Strategy,
    setting: u64,
    query_order: &[u64],
) -> Result<u64> {
    if setting >= n_drawers {
        return Err(Error::InvalidSetting { setting, n_drawers });
    }
    let candidates = strategy.candidates(n_drawers);
    if !candidates.contains(&setting) {
        return Err(Error::StrategyContract { setting });
    }
    let mut remaining = candidates.len() as u64;
    let mut queries = 0;
    for &drawer in query_order {
        if !candidates.contains(&drawer) {
            continue;
        }
        if remaining == 1 {
            break; // the ball is pinned by elimination
        }
        queries += 1;
        if drawer == setting {
            break;
        }
        remaining -= 1;
    }
    Ok(queries)
}

/// Worst-case queries over every setting, for a fixed canonical order. The
/// count depends only on the candidate set size, so one order suffices; the
/// brute-force sweeps below confirm order independence at small sizes.
pub fn worst_case_queries(n_drawers: u64, strategy: &Strategy) -> Result<u64> {
    let order: Vec<u64> = (0..n_drawers).collect();
    let candidates = strategy.candidates(n_drawers);
    let mut worst = 0;
    for &setting in &candidates {
        worst = worst.max(classical_search(n_drawers, strategy, setting, &order)?);
    }
    Ok(worst)
}

/// Worst-case queries over every setting and every query order; exponential,
/// for small candidate sets only.
pub fn brute_force_worst_case(n_drawers: u64, strategy: &Strategy) -> Result<u64> {
    let candidates = strategy.candidates(n_drawers);
    let mut worst = 0;
    for order in candidates.iter().copied().permutations(candidates.len()) {
        for &setting in &candidates {
            worst = worst.max(classical_search(n_drawers, strategy, setting, &order)?);
        }
    }
    Ok(worst)
}

/// Expected queries under a uniform setting and a uniform query order, from
/// the position of the ball within the candidate order.
pub fn average_case_queries(candidate_count: u64) -> f64 {
    let m = candidate_count;
    if m <= 1 {
        return 0.0;
    }
    let mut total = 0u64;
    for position in 1..=m {
        // Opening stops at the ball, or one early when the ball is last.
        total += position.min(m - 1);
    }
    total as f64 / m as f64
}

/// Query counts for one drawer count: quantum against the blind and the
/// advance-knowledge classical searcher.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryReport {
    pub n_drawers: u64,
    pub classical_blind_worst: u64,
    pub classical_half_worst: u64,
    pub quantum_queries: u64,
    pub quantum_success: f64,
    /// `ceil((π/4)·√N) + 1`, the budget the quantum count must stay within.
    pub query_bound: u64,
    pub within_bound: bool,
    pub classical_blind_avg: f64,
    pub classical_half_avg: f64,
}

/// Subset realizing the advance knowledge for a given setting: the `2^⌊n/2⌋`
/// settings that agree with it on the leading `⌈n/2⌉` bits.
pub fn half_info_subset(layout: RegisterLayout, setting: u64) -> Vec<u64> {
    let low_bits = layout.n_bits() / 2;
    let base = setting >> low_bits << low_bits;
    (0..1u64 << low_bits).map(|tail| base | tail).collect()
}

/// Compare quantum and classical query counts for each drawer count.
pub fn verify_rule(n_list: &[u64], kind: VariantKind) -> Result<Vec<QueryReport>> {
    let mut reports = Vec::with_capacity(n_list.len());
    for &n_drawers in n_list {
        let variant = plan_variant(n_drawers, kind)?;
        let layout = RegisterLayout::new(n_drawers.trailing_zeros())?;

        // Quantum: run on a definite setting and measure queries and success.
        let setting = 0u64;
        let input = StateVector::from_b_support(layout, &[setting]);
        let (output, counter) = run_search(&input, &variant)?;
        let quantum_success = output
            .amplitude(setting, setting)
            .norm_sqr()
            .clamp(0.0, 1.0);

        let half = Strategy::HalfInfo {
            known: half_info_subset(layout, setting),
        };
        let classical_blind_worst = worst_case_queries(n_drawers, &Strategy::Blind)?;
        let classical_half_worst = worst_case_queries(n_drawers, &half)?;
        let half_count = 1u64 << (layout.n_bits() / 2);

        let query_bound =
            (std::f64::consts::PI / 4.0 * (n_drawers as f64).sqrt()).ceil() as u64 + 1;
        reports.push(QueryReport {
            n_drawers,
            classical_blind_worst,
            classical_half_worst,
            quantum_queries: counter.oracle_calls,
            quantum_success,
            query_bound,
            within_bound: counter.oracle_calls <= query_bound,
            classical_blind_avg: average_case_queries(n_drawers),
            classical_half_avg: average_case_queries(half_count),
        });
    }
    Ok(reports)
}

/// Aligned text table of query reports.
pub fn render_query_table(reports: &[QueryReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>6} {:>12} {:>12} {:>9} {:>12} {:>7} {:>11} {:>10}\n",
        "N", "blind-worst", "half-worst", "quantum", "success", "bound", "blind-avg", "half-avg"
    ));
    for r in reports {
        out.push_str(&format!(
            "{:>6} {:>12} {:>12} {:>9} {:>12.10} {:>7} {:>11.4} {:>10.4}\n",
            r.n_drawers,
            r.classical_blind_worst,
            r.classical_half_worst,
            r.quantum_queries,
            r.quantum_success,
            r.query_bound,
            r.classical_blind_avg,
            r.classical_half_avg,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_drawers_blind_worst_case_is_three() {
        assert_eq!(worst_case_queries(4, &Strategy::Blind).unwrap(), 3);
        assert_eq!(brute_force_worst_case(4, &Strategy::Blind).unwrap(), 3);
    }

    #[test]
    fn four_drawers_half_info_takes_one_query() {
        let strategy = Strategy::HalfInfo {
            known: vec![0b01, 0b11],
        };
        // Ball in 11, the order opens 01 first: not there, so it must be in 11.
        let queries = classical_search(4, &strategy, 0b11, &[0b01, 0b00, 0b10, 0b11]).unwrap();
        assert_eq!(queries, 1);
        assert_eq!(worst_case_queries(4, &strategy).unwrap(), 1);
    }

    #[test]
    fn sixteen_drawers_half_info_worst_case_by_brute_force() {
        let layout = RegisterLayout::new(4).unwrap();
        let setting = 0b0110;
        let strategy = Strategy::HalfInfo {
            known: half_info_subset(layout, setting),
        };
        assert_eq!(brute_force_worst_case(16, &strategy).unwrap(), 3);
    }

    #[test]
    fn half_info_worst_case_is_subset_independent() {
        // Any size-4 subset of 16 drawers containing the setting costs at
        // most 3 queries, whatever the order within it.
        let setting = 5u64;
        for others in (0..16u64).filter(|&d| d != setting).combinations(3) {
            let mut known = others.clone();
            known.push(setting);
            known.sort_unstable();
            let strategy = Strategy::HalfInfo { known };
            assert_eq!(brute_force_worst_case(16, &strategy).unwrap(), 3);
        }
    }

    #[test]
    fn blind_worst_case_matches_elimination_count() {
        for n in [2u64, 4, 8, 16, 32, 64, 128, 256] {
            assert_eq!(worst_case_queries(n, &Strategy::Blind).unwrap(), n - 1);
        }
    }

    #[test]
    fn missing_setting_violates_contract() {
        let strategy = Strategy::HalfInfo {
            known: vec![0b00, 0b10],
        };
        assert!(matches!(
            classical_search(4, &strategy, 0b01, &[0, 1, 2, 3]),
            Err(Error::StrategyContract { .. })
        ));
    }

    #[test]
    fn average_case_closed_form() {
        // Σ min(k, m-1)/m = (m-1)(m+2)/(2m).
        for m in [2u64, 4, 16] {
            let expected = (m - 1) as f64 * (m + 2) as f64 / (2 * m) as f64;
            assert!((average_case_queries(m) - expected).abs() < 1e-12);
        }
        assert_eq!(average_case_queries(1), 0.0);
    }

    #[test]
    fn verify_rule_four_drawers_row() {
        let reports = verify_rule(&[4], VariantKind::Certainty).unwrap();
        let r = &reports[0];
        assert_eq!(r.classical_blind_worst, 3);
        assert_eq!(r.classical_half_worst, 1);
        assert_eq!(r.quantum_queries, 1);
        assert!((r.quantum_success - 1.0).abs() < 1e-12);
        assert!(r.within_bound);
    }

    #[test]
    fn verify_rule_scales_with_the_square_root() {
        let reports = verify_rule(&[4, 16, 64, 256], VariantKind::Certainty).unwrap();
        for r in &reports {
            let sqrt_n = (r.n_drawers as f64).sqrt();
            assert_eq!(r.classical_blind_worst, r.n_drawers - 1);
            assert_eq!(r.classical_half_worst, sqrt_n as u64 - 1);
            assert!(r.quantum_success >= 1.0 - 1e-9);
            assert!(r.within_bound);
            let ratio = r.quantum_queries as f64 / sqrt_n;
            assert!(
                (0.25..=1.0).contains(&ratio),
                "N = {}: {ratio}",
                r.n_drawers
            );
        }
        assert_eq!(reports[1].classical_half_worst, 3);
        assert!(reports[1].quantum_queries <= 4);
        assert_eq!(reports[3].classical_half_worst, 15);
        assert!(reports[3].quantum_queries <= 14);
    }

    #[test]
    fn verify_rule_rejects_non_power_of_two() {
        assert!(verify_rule(&[12], VariantKind::Standard).is_err());
    }

    #[test]
    fn reports_round_trip_through_json() {
        let reports = verify_rule(&[4, 16], VariantKind::Certainty).unwrap();
        for report in &reports {
            let line = serde_json::to_string(report).unwrap();
            let parsed: QueryReport = serde_json::from_str(&line).unwrap();
            assert_eq!(report, &parsed);
        }
    }
}
