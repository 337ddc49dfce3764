//! Aggregate counts from the IRMA2 irbesartan trial.
//!
//! Outcome is nephropathy at 24 months; the test is the baseline albumin
//! excretion rate (AER) in µg/min, eligibility 20 to 200.

use crate::likelihood::{
    DichotomousLikelihoods, GaussianParams, LikelihoodOrigin, OutcomeModel, StratumCounts, TailAreas,
};
use crate::trial_data::{AggregateBin, Arm, ArmSet, DatasetMeta, SegmentRule, TrialDataset};

pub const PLACEBO: &str = "placebo";
pub const IRBESARTAN_150: &str = "irbesartan-150";
pub const IRBESARTAN_300: &str = "irbesartan-300";

pub const ELIGIBILITY: (f64, f64) = (20.0, 200.0);
pub const OUTCOME_THRESHOLD: f64 = 200.0;
pub const SEGMENT_THRESHOLD: f64 = 80.0;
pub const BIN_EDGES: [f64; 6] = [20.0, 40.0, 80.0, 120.0, 160.0, 200.0];

/// (events, total) per AER band, lowest band first.
const PLACEBO_COUNTS: [(u64, u64); 5] = [(1, 77), (9, 57), (9, 32), (9, 23), (2, 7)];
const IRB150_COUNTS: [(u64, u64); 5] = [(0, 59), (5, 66), (7, 33), (3, 16), (4, 13)];
const IRB300_COUNTS: [(u64, u64); 5] = [(1, 68), (4, 74), (4, 37), (0, 11), (1, 2)];

pub fn meta() -> DatasetMeta {
    DatasetMeta {
        eligibility: ELIGIBILITY,
        outcome_threshold: Some(OUTCOME_THRESHOLD),
        control: PLACEBO.into(),
        arms: Some(vec![PLACEBO.into(), IRBESARTAN_150.into(), IRBESARTAN_300.into()]),
        name: Some("irma2".into()),
    }
}

fn arm(label: &str) -> Arm {
    Arm::new(label).expect("static label")
}

/// The 15 aggregate bins (5 AER bands x 3 arms).
pub fn builtin_irma2() -> TrialDataset {
    let mut bins = Vec::with_capacity(15);
    for (label, counts) in [(PLACEBO, PLACEBO_COUNTS), (IRBESARTAN_150, IRB150_COUNTS), (IRBESARTAN_300, IRB300_COUNTS)]
    {
        for (w, (events, total)) in BIN_EDGES.windows(2).zip(counts) {
            bins.push(AggregateBin::new(w[0], w[1], arm(label), events, total).expect("static bin"));
        }
    }
    TrialDataset::new("irma2", vec![], bins, ELIGIBILITY, Some(OUTCOME_THRESHOLD), arm(PLACEBO))
        .expect("static dataset")
}

pub fn placebo() -> ArmSet {
    ArmSet::single(arm(PLACEBO))
}

pub fn irbesartan_pooled() -> ArmSet {
    ArmSet::new([arm(IRBESARTAN_150), arm(IRBESARTAN_300)]).expect("non-empty")
}

/// The groups reported in the prior-estimation tables, in table order.
pub fn report_groups() -> Vec<ArmSet> {
    vec![placebo(), irbesartan_pooled(), ArmSet::single(arm(IRBESARTAN_150)), ArmSet::single(arm(IRBESARTAN_300))]
}

/// Placebo up to `threshold`, either irbesartan dose above it.
pub fn segmental_rule(threshold: f64) -> SegmentRule {
    SegmentRule::threshold_split(threshold, placebo(), irbesartan_pooled()).expect("valid split")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LikelihoodTable {
    Placebo,
    Irbesartan,
    Pooled,
    Segmental,
}

/// Published counts for P(AER > 80 | outcome stratum).
///
/// The placebo cell prints "20/19"; 19/29 is the count-consistent reading.
/// The irbesartan non-outcome total (346) and the segmental non-outcome
/// counts (47/171) come from subject-level data and cannot be recovered
/// from the bins.
pub fn published_likelihoods(column: LikelihoodTable) -> DichotomousLikelihoods {
    let counts = match column {
        LikelihoodTable::Placebo => StratumCounts::new(19, 29, 42, 166),
        LikelihoodTable::Irbesartan => StratumCounts::new(20, 30, 92, 346),
        LikelihoodTable::Pooled => StratumCounts::new(39, 59, 134, 512),
        LikelihoodTable::Segmental => StratumCounts::new(19, 29, 47, 171),
    };
    DichotomousLikelihoods::from_counts(SEGMENT_THRESHOLD, counts, LikelihoodOrigin::Published).expect("static counts")
}

/// ln(AER) Gaussians fitted to the segmental subjects (placebo <= 80,
/// irbesartan > 80), rendered to two decimals.
pub fn published_segmental_model() -> OutcomeModel {
    OutcomeModel {
        with_outcome: GaussianParams { mu: 4.54, sigma: 0.42, n: 29 },
        without_outcome: GaussianParams { mu: 3.65, sigma: 0.91, n: 171 },
    }
}

/// Lower-tail areas at ln 80 stated alongside the parametric prior table.
pub fn stated_tail_areas() -> TailAreas {
    TailAreas { threshold: SEGMENT_THRESHOLD, below_with: 0.360, below_without: 0.787 }
}

/// Outcome-stratum parameters quoted in the prose next to the tail area
/// 0.360; they differ from the tabulated 4.54 / 0.42.
pub const TEXT_OUTCOME_PARAMS: (f64, f64) = (4.45, 0.450);

/// Observed full-trial event counts by arm (bottom row of the count table).
pub fn observed_totals() -> [(&'static str, u64, u64); 3] {
    [(PLACEBO, 30, 196), (IRBESARTAN_150, 19, 187), (IRBESARTAN_300, 10, 192)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        let ds = builtin_irma2();
        assert_eq!(ds.bins.len(), 15);
        let b = ds.bins.iter().find(|b| b.arm.label() == PLACEBO && b.lo == 120.0).unwrap();
        assert_eq!((b.events, b.total), (9, 23));
        let b = ds.bins.iter().find(|b| b.arm.label() == IRBESARTAN_300 && b.lo == 160.0).unwrap();
        assert_eq!((b.events, b.total), (1, 2));
        for (label, e, t) in observed_totals() {
            let c = ds.arm_counts(&ArmSet::single(arm(label)));
            assert_eq!((c.events, c.total), (e, t), "{label}");
        }
    }

    #[test]
    fn published_segmental_ratios() {
        let l = published_likelihoods(LikelihoodTable::Segmental);
        assert_eq!(l.p_high_given_outcome, 19.0 / 29.0);
        assert_eq!(l.p_high_given_no_outcome, 47.0 / 171.0);
    }
}
