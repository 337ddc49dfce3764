//! Calibration of posterior curves and interval estimates for proportions
//! and rearranged priors.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::bayes::{estimate_prior, segment_side, LikelihoodSource, Method, PosteriorCurve};
use crate::error::{Error, Result};
use crate::likelihood::{solve_cells, DichotomousLikelihoods, LikelihoodOrigin, SegmentCells, Side, StratumCounts};
use crate::rng;
use crate::trial_data::{ArmSet, Counts, SegmentRule, SubjectRecord, TrialDataset};

/// Largest fraction of bootstrap or simulation replicates allowed to fail.
pub const MAX_FAILURE_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub n: usize,
    pub mean_posterior: f64,
    pub target_prevalence: f64,
    pub delta: f64,
}

/// Mean of the curve's probabilities at each record's baseline, against the
/// curve's prior.
pub fn calibration_check(curve: &PosteriorCurve, records: &[SubjectRecord]) -> Result<CalibrationReport> {
    if records.is_empty() {
        return Err(Error::InsufficientData("calibration needs at least one record".into()));
    }
    let mut sum = 0.0;
    for r in records {
        sum += curve.probability_at(r.baseline)?;
    }
    let mean_posterior = sum / records.len() as f64;
    let target_prevalence = curve.prior.prior_probability;
    Ok(CalibrationReport {
        n: records.len(),
        mean_posterior,
        target_prevalence,
        delta: mean_posterior - target_prevalence,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    ExactBinomial,
    Bootstrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub method: IntervalMethod,
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("confidence level {level} outside (0, 1)")))
    }
}

/// `x` with `I_x(a, b) = target`, by bisection.
fn beta_quantile(a: f64, b: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Clopper-Pearson interval.
pub fn exact_binomial_ci(events: u64, total: u64, level: f64) -> Result<IntervalEstimate> {
    if total == 0 || events > total {
        return Err(Error::Domain(format!("need 0 <= events <= total, total >= 1 (got {events}/{total})")));
    }
    check_level(level)?;
    let alpha = 1.0 - level;
    let (x, n) = (events as f64, total as f64);
    let lo = if events == 0 { 0.0 } else { beta_quantile(x, n - x + 1.0, alpha / 2.0) };
    let hi = if events == total { 1.0 } else { beta_quantile(x + 1.0, n - x, 1.0 - alpha / 2.0) };
    Ok(IntervalEstimate { point: x / n, lo, hi, level, method: IntervalMethod::ExactBinomial })
}

/// Linear-interpolation quantile of sorted values.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let i = h.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (h - i as f64) * (sorted[j] - sorted[i])
}

/// What one group contributes to a bootstrap replicate.
#[derive(Debug, Clone, Copy)]
struct GroupInputs {
    segment: Counts,
    side: Side,
    /// For identified likelihoods: whether the group is the whole low
    /// (`true`) or high (`false`) segment arm set, whose counts are then
    /// taken from the resampled cells.
    cell: Option<bool>,
}

fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("valid binomial").sample(rng)
}

/// Splits `enrolled` draws over (events, non-events, rest) of a segment.
fn multinomial_cell<R: Rng + ?Sized>(rng: &mut R, enrolled: u64, cell: Counts) -> Counts {
    let n = enrolled as f64;
    let pe = cell.events as f64 / n;
    let pf = cell.non_events() as f64 / n;
    let events = binomial(rng, enrolled, pe);
    let rest_p = if pe < 1.0 { (pf / (1.0 - pe)).min(1.0) } else { 0.0 };
    let non = binomial(rng, enrolled - events, rest_p);
    Counts { events, total: events + non }
}

fn redraw<R: Rng + ?Sized>(rng: &mut R, c: Counts) -> Counts {
    Counts { events: binomial(rng, c.total, c.events as f64 / c.total.max(1) as f64), total: c.total }
}

/// Percentile bootstrap interval for one group's rearranged prior.
/// See [`bootstrap_prior_cis`].
pub fn bootstrap_prior_ci(
    data: &TrialDataset,
    rule: &SegmentRule,
    source: &LikelihoodSource,
    group: &ArmSet,
    replicates: usize,
    level: f64,
    seed: u64,
) -> Result<IntervalEstimate> {
    let mut v = bootstrap_prior_cis(data, rule, source, std::slice::from_ref(group), replicates, level, seed)?;
    Ok(v.pop().expect("one group"))
}

/// Percentile bootstrap intervals for several groups' rearranged priors,
/// all computed from the same resamples.
///
/// Replicate `i` draws from stream `i` of `seed`. What is resampled follows
/// the likelihood source:
///
/// * identified shared likelihoods: each segment arm's enrolment is split
///   multinomially over (segment events, segment non-events, elsewhere) and
///   the likelihoods re-solved;
/// * tabulated likelihood counts: segment events and both high counts are
///   redrawn binomially;
/// * tail areas: only the segment events are redrawn.
///
/// A replicate whose segment has no non-events, or whose likelihood ratio
/// cannot be formed, is skipped for that group; more than 10% skipped is an
/// error. Each interval is extended if needed to contain its point estimate.
pub fn bootstrap_prior_cis(
    data: &TrialDataset,
    rule: &SegmentRule,
    source: &LikelihoodSource,
    groups: &[ArmSet],
    replicates: usize,
    level: f64,
    seed: u64,
) -> Result<Vec<IntervalEstimate>> {
    if replicates < 1000 {
        return Err(Error::InvalidInput(format!("bootstrap needs at least 1000 replicates (got {replicates})")));
    }
    check_level(level)?;
    let threshold = source.threshold();
    let identified = matches!(
        source,
        LikelihoodSource::Dichotomous(DichotomousLikelihoods { origin: LikelihoodOrigin::SharedIdentified, .. })
    );
    let cells = if identified { Some(SegmentCells::from_design(data, rule, threshold)?) } else { None };

    let mut inputs = Vec::with_capacity(groups.len());
    let mut points = Vec::with_capacity(groups.len());
    for group in groups {
        let seg = rule
            .segment_for(group)
            .ok_or_else(|| Error::InvalidInput(format!("no segment is allocated to {}", group.label())))?;
        let side = segment_side(&seg.range, threshold)?;
        let segment = data.counts_in(&seg.range, group)?;
        let lr = source.ratio(side)?;
        points.push(
            estimate_prior(segment.events, segment.non_events(), lr, &group.label(), source.method())?
                .prior_probability,
        );
        let cell = (identified && seg.arms == *group).then_some(seg.range.hi == threshold);
        inputs.push(GroupInputs { segment, side, cell });
    }

    let draws: Vec<Vec<Option<f64>>> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i as u64);
            bootstrap_replicate(&inputs, cells, source, &mut rng)
        })
        .collect();

    let alpha = 1.0 - level;
    (0..groups.len())
        .map(|g| {
            let mut values: Vec<f64> = draws.iter().filter_map(|d| d[g]).collect();
            let skipped = replicates - values.len();
            if skipped as f64 > MAX_FAILURE_FRACTION * replicates as f64 {
                return Err(Error::Instability { skipped, total: replicates });
            }
            values.sort_by(f64::total_cmp);
            let point = points[g];
            Ok(IntervalEstimate {
                point,
                lo: quantile_sorted(&values, alpha / 2.0).min(point),
                hi: quantile_sorted(&values, 1.0 - alpha / 2.0).max(point),
                level,
                method: IntervalMethod::Bootstrap,
            })
        })
        .collect()
}

fn bootstrap_replicate<R: Rng + ?Sized>(
    inputs: &[GroupInputs],
    cells: Option<SegmentCells>,
    source: &LikelihoodSource,
    rng: &mut R,
) -> Vec<Option<f64>> {
    // likelihood ratios for (below, above), or None when unavailable
    let mut resampled_cells = None;
    let ratios: Option<(Option<f64>, Option<f64>)> = match (source, cells) {
        (LikelihoodSource::Dichotomous(d), Some(cells)) => {
            let low = multinomial_cell(rng, cells.low_enrolled, cells.low);
            let high = multinomial_cell(rng, cells.high_enrolled, cells.high);
            resampled_cells = Some((low, high));
            solve_cells(&SegmentCells { low, high, ..cells }).ok().map(|s| {
                let r = DichotomousLikelihoods {
                    p_high_given_outcome: s.p_high_given_outcome,
                    p_high_given_no_outcome: s.p_high_given_no_outcome,
                    ..*d
                };
                (r.ratio(Side::Below).ok(), r.ratio(Side::Above).ok())
            })
        }
        (LikelihoodSource::Dichotomous(d), None) => match d.counts {
            Some(c) => {
                let redrawn = StratumCounts {
                    events_high: binomial(rng, c.events_total, d.p_high_given_outcome),
                    nonevents_high: binomial(rng, c.nonevents_total, d.p_high_given_no_outcome),
                    ..c
                };
                DichotomousLikelihoods::from_counts(d.threshold, redrawn, d.origin)
                    .ok()
                    .map(|r| (r.ratio(Side::Below).ok(), r.ratio(Side::Above).ok()))
            }
            None => Some((d.ratio(Side::Below).ok(), d.ratio(Side::Above).ok())),
        },
        (LikelihoodSource::Tail(t), _) => Some((t.ratio(Side::Below).ok(), t.ratio(Side::Above).ok())),
    };
    inputs
        .iter()
        .map(|g| {
            let segment = match (g.cell, resampled_cells) {
                (Some(true), Some((low, _))) => low,
                (Some(false), Some((_, high))) => high,
                _ => redraw(rng, g.segment),
            };
            let (below, above) = ratios?;
            let lr = match g.side {
                Side::Below => below,
                Side::Above => above,
            }?;
            estimate_prior(segment.events, segment.non_events(), lr, "", Method::CountBased)
                .ok()
                .map(|p| p.prior_probability)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::{posterior_curve, Grid, PriorEstimate};
    use crate::irma2::{self, LikelihoodTable};
    use crate::likelihood::{identify_shared_likelihoods, GaussianParams, OutcomeModel};
    use crate::trial_data::Arm;

    #[test]
    fn clopper_pearson_examples() {
        let ci = exact_binomial_ci(0, 10, 0.95).unwrap();
        assert_eq!(ci.lo, 0.0);
        assert!((ci.hi - (1.0 - 0.025f64.powf(0.1))).abs() < 1e-10);
        let ci = exact_binomial_ci(196, 196, 0.95).unwrap();
        assert_eq!(ci.hi, 1.0);
        assert!((ci.lo - 0.025f64.powf(1.0 / 196.0)).abs() < 1e-10);
        // scipy beta.ppf reference
        let ci = exact_binomial_ci(30, 196, 0.95).unwrap();
        assert!((ci.lo - 0.105_714_6).abs() < 1e-6, "{ci:?}");
        assert!((ci.hi - 0.211_238_6).abs() < 1e-6, "{ci:?}");
        let ci = exact_binomial_ci(10, 134, 0.95).unwrap();
        assert!((ci.lo - 0.03637).abs() < 1e-5 && (ci.hi - 0.13296).abs() < 1e-5);
        assert!(exact_binomial_ci(3, 2, 0.95).is_err());
        assert!(exact_binomial_ci(1, 2, 1.0).is_err());
    }

    fn flat_curve(p: f64) -> PosteriorCurve {
        let g = GaussianParams { mu: 4.0, sigma: 0.5, n: 10 };
        let model = OutcomeModel { with_outcome: g, without_outcome: g };
        let prior =
            PriorEstimate::from_observed("placebo", true, Counts { events: (p * 1000.0) as u64, total: 1000 }).unwrap();
        posterior_curve(&model, &prior, &Grid::new(20.0, 200.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn calibration_of_flat_curve() {
        let curve = flat_curve(0.2);
        let arm = Arm::new("placebo").unwrap();
        let recs: Vec<SubjectRecord> = [25.0, 77.3, 199.9]
            .iter()
            .map(|&b| SubjectRecord { baseline: b, arm: arm.clone(), outcome: false, outcome_value: None })
            .collect();
        let r = calibration_check(&curve, &recs).unwrap();
        assert!((r.mean_posterior - 0.2).abs() < 1e-12 && r.delta.abs() < 1e-12);
        let out = [SubjectRecord { baseline: 250.0, arm, outcome: false, outcome_value: None }];
        assert!(matches!(calibration_check(&curve, &out), Err(Error::OutOfRange { .. })));
        assert!(calibration_check(&curve, &[]).is_err());
    }

    #[test]
    fn bootstrap_identified_irma2_placebo() {
        let ds = irma2::builtin_irma2();
        let rule = irma2::segmental_rule(80.0);
        let src = LikelihoodSource::Dichotomous(identify_shared_likelihoods(&ds, &rule, 80.0).unwrap());
        let ci = bootstrap_prior_ci(&ds, &rule, &src, &irma2::placebo(), 2000, 0.95, 11).unwrap();
        assert!(ci.lo <= ci.point && ci.point <= ci.hi);
        assert!((ci.lo - 0.077).abs() <= 0.03, "{ci:?}");
        assert!((ci.hi - 0.245).abs() <= 0.03, "{ci:?}");
        assert!(ci.lo < 0.145 && 0.145 < ci.hi);
        let again = bootstrap_prior_ci(&ds, &rule, &src, &irma2::placebo(), 2000, 0.95, 11).unwrap();
        assert_eq!(ci, again);
    }

    #[test]
    fn bootstrap_published_counts_and_tail() {
        let ds = irma2::builtin_irma2();
        let rule = irma2::segmental_rule(80.0);
        let src = LikelihoodSource::Dichotomous(irma2::published_likelihoods(LikelihoodTable::Segmental));
        let ci = bootstrap_prior_ci(&ds, &rule, &src, &irma2::placebo(), 1000, 0.95, 3).unwrap();
        assert!((ci.point - 0.145).abs() < 1e-3);
        assert!(ci.lo < ci.point && ci.point < ci.hi);
        let tail = LikelihoodSource::Tail(irma2::stated_tail_areas());
        let ct = bootstrap_prior_ci(&ds, &rule, &tail, &irma2::irbesartan_pooled(), 1000, 0.95, 3).unwrap();
        assert!(ct.lo < ct.point && ct.point < ct.hi);
        assert!(bootstrap_prior_ci(&ds, &rule, &tail, &irma2::placebo(), 999, 0.95, 3).is_err());
    }

    #[test]
    fn bootstrap_all_events_is_unstable() {
        let arm = Arm::new("placebo").unwrap();
        let t = Arm::new("t").unwrap();
        let bins = vec![
            crate::trial_data::AggregateBin::new(20.0, 80.0, arm.clone(), 5, 5).unwrap(),
            crate::trial_data::AggregateBin::new(80.0, 200.0, t, 2, 10).unwrap(),
        ];
        let ds = TrialDataset::new("x", vec![], bins, (20.0, 200.0), None, arm).unwrap();
        let rule = SegmentRule::standard(&ds, 80.0).unwrap();
        let tail = LikelihoodSource::Tail(irma2::stated_tail_areas());
        assert!(bootstrap_prior_ci(&ds, &rule, &tail, &irma2::placebo(), 1000, 0.95, 1).is_err());
    }
}
