//! The odds-form Bayes rearrangement and the curves built from it.
//!
//! Within a segment the observed outcome odds equal the arm's prior odds
//! times the likelihood ratio of landing in that segment, so the prior odds
//! are recovered as `conditional_odds / lr`. Posterior curves then apply the
//! point likelihood ratio at each test value to those prior odds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{point_likelihood_ratio, DichotomousLikelihoods, OutcomeModel, Side, TailAreas};
use crate::trial_data::{ArmSet, Counts, Interval, SegmentRule, TrialDataset};

pub fn odds_from_prob(p: f64) -> Result<f64> {
    if p == 1.0 {
        return Err(Error::InfiniteOdds);
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1)")));
    }
    Ok(p / (1.0 - p))
}

/// `o / (1 + o)`; infinite odds map to 1.
pub fn prob_from_odds(o: f64) -> f64 {
    if o.is_infinite() {
        1.0
    } else {
        o / (1.0 + o)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CountBased,
    ParametricTail,
    /// Full-range prevalence, no rearrangement.
    Observed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorEstimate {
    pub group: String,
    pub control: bool,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segment: Option<Interval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    pub events: u64,
    pub non_events: u64,
    pub conditional_odds: f64,
    pub likelihood_ratio: f64,
    pub prior_odds: f64,
    pub prior_probability: f64,
    /// Set when the segment has no events and the prior is zero.
    pub degenerate: bool,
    /// Full-range counts for the group, when the data extend beyond its segment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<Counts>,
}

impl PriorEstimate {
    pub fn observed_probability(&self) -> Option<f64> {
        self.observed.and_then(|c| c.proportion())
    }

    /// A prior taken straight from full-range counts.
    pub fn from_observed(group: &str, control: bool, counts: Counts) -> Result<Self> {
        let mut p = estimate_prior(counts.events, counts.non_events(), 1.0, group, Method::Observed)?;
        p.control = control;
        p.observed = Some(counts);
        Ok(p)
    }
}

/// Rearranges Bayes' rule: prior odds = (events / non_events) / lr.
pub fn estimate_prior(events: u64, non_events: u64, lr: f64, group: &str, method: Method) -> Result<PriorEstimate> {
    if non_events == 0 {
        return Err(Error::InsufficientData(format!(
            "{group}: segment has no non-events, conditional odds are infinite"
        )));
    }
    if !(lr > 0.0) || !lr.is_finite() {
        return Err(Error::Underflow(format!("{group}: likelihood ratio {lr} is not positive and finite")));
    }
    let conditional_odds = events as f64 / non_events as f64;
    let prior_odds = conditional_odds / lr;
    Ok(PriorEstimate {
        group: group.to_string(),
        control: false,
        method,
        segment: None,
        side: None,
        events,
        non_events,
        conditional_odds,
        likelihood_ratio: lr,
        prior_odds,
        prior_probability: prob_from_odds(prior_odds),
        degenerate: events == 0,
        observed: None,
    })
}

/// Source of the segment likelihood ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LikelihoodSource {
    Dichotomous(DichotomousLikelihoods),
    Tail(TailAreas),
}

impl LikelihoodSource {
    pub fn from_model(model: &OutcomeModel, threshold: f64) -> Result<Self> {
        Ok(LikelihoodSource::Tail(TailAreas::from_model(model, threshold)?))
    }

    pub fn threshold(&self) -> f64 {
        match self {
            LikelihoodSource::Dichotomous(d) => d.threshold,
            LikelihoodSource::Tail(t) => t.threshold,
        }
    }

    pub fn method(&self) -> Method {
        match self {
            LikelihoodSource::Dichotomous(_) => Method::CountBased,
            LikelihoodSource::Tail(_) => Method::ParametricTail,
        }
    }

    pub fn ratio(&self, side: Side) -> Result<f64> {
        match self {
            LikelihoodSource::Dichotomous(d) => d.ratio(side),
            LikelihoodSource::Tail(t) => t.ratio(side),
        }
    }
}

/// Which side of `threshold` a segment lies on.
pub fn segment_side(range: &Interval, threshold: f64) -> Result<Side> {
    if range.hi <= threshold {
        Ok(Side::Below)
    } else if range.lo >= threshold {
        Ok(Side::Above)
    } else {
        Err(Error::InvalidInput(format!(
            "segment ({}, {}] spans the likelihood threshold {threshold}",
            range.lo, range.hi
        )))
    }
}

/// One prior per requested group, each estimated from the segment its arms
/// are allocated to. The method follows the likelihood source.
pub fn estimate_all_priors(
    data: &TrialDataset,
    rule: &SegmentRule,
    source: &LikelihoodSource,
    groups: &[ArmSet],
) -> Result<Vec<PriorEstimate>> {
    rule.check_arms(data)?;
    let threshold = source.threshold();
    let control = ArmSet::single(data.control.clone());
    groups
        .iter()
        .map(|group| {
            let seg = rule
                .segment_for(group)
                .ok_or_else(|| Error::InvalidInput(format!("no segment is allocated to {}", group.label())))?;
            let side = segment_side(&seg.range, threshold)?;
            let counts = data.counts_in(&seg.range, group)?;
            let lr = source.ratio(side)?;
            let mut p = estimate_prior(counts.events, counts.non_events(), lr, &group.label(), source.method())?;
            p.segment = Some(seg.range);
            p.side = Some(side);
            p.control = *group == control;
            let full = data.arm_counts(group);
            p.observed = (full != counts).then_some(full);
            Ok(p)
        })
        .collect()
}

/// `1 / (1 + (1/prior_odds)(1/lr))`.
pub fn posterior_probability(prior_odds: f64, lr: f64) -> f64 {
    prob_from_odds(prior_odds * lr)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo > 0.0) || !(hi > lo) || !(step > 0.0) || !hi.is_finite() {
            return Err(Error::GridMismatch(format!("invalid grid ({lo}, {hi}, {step})")));
        }
        Ok(Grid { lo, hi, step })
    }

    /// Grid values `lo + i * step` up to `hi`; no accumulated increments.
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub value: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorCurve {
    pub group: String,
    pub prior: PriorEstimate,
    pub grid: Grid,
    pub points: Vec<CurvePoint>,
}

impl PosteriorCurve {
    /// Linear interpolation between adjacent grid points.
    pub fn probability_at(&self, value: f64) -> Result<f64> {
        let first = self.points.first().map(|p| p.value).unwrap_or(f64::NAN);
        let last = self.points.last().map(|p| p.value).unwrap_or(f64::NAN);
        if !(value >= first && value <= last) {
            return Err(Error::OutOfRange { value, lo: first, hi: last });
        }
        let i = self.points.partition_point(|p| p.value < value);
        if i == 0 {
            return Ok(self.points[0].probability);
        }
        let (a, b) = (self.points[i - 1], self.points[i]);
        let t = (value - a.value) / (b.value - a.value);
        Ok(a.probability + t * (b.probability - a.probability))
    }
}

pub fn posterior_curve(model: &OutcomeModel, prior: &PriorEstimate, grid: &Grid) -> Result<PosteriorCurve> {
    if !(prior.prior_odds > 0.0) || !prior.prior_odds.is_finite() {
        return Err(Error::Degenerate(format!(
            "{}: prior odds {} cannot anchor a curve",
            prior.group, prior.prior_odds
        )));
    }
    let points = grid
        .values()
        .into_iter()
        .map(|value| CurvePoint {
            value,
            probability: posterior_probability(prior.prior_odds, point_likelihood_ratio(model, value)),
        })
        .collect();
    Ok(PosteriorCurve { group: prior.group.clone(), prior: prior.clone(), grid: *grid, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrPoint {
    pub value: f64,
    pub arr: f64,
}

/// Control probability minus treatment probability; positive is benefit.
pub fn arr_curve(control: &PosteriorCurve, treatment: &PosteriorCurve) -> Result<Vec<ArrPoint>> {
    if control.grid != treatment.grid || control.points.len() != treatment.points.len() {
        return Err(Error::GridMismatch(format!("{} and {} use different grids", control.group, treatment.group)));
    }
    control
        .points
        .iter()
        .zip(&treatment.points)
        .map(|(c, t)| {
            if c.value != t.value {
                return Err(Error::GridMismatch(format!("grid values {} and {} differ", c.value, t.value)));
            }
            Ok(ArrPoint { value: c.value, arr: c.probability - t.probability })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSummary {
    pub relative_risk: f64,
    pub odds_ratio: f64,
    pub prior_control: PriorEstimate,
    pub prior_treatment: PriorEstimate,
}

pub fn effect_summary(control: &PriorEstimate, treatment: &PriorEstimate) -> Result<EffectSummary> {
    if !(control.prior_probability > 0.0) || !(control.prior_odds > 0.0) {
        return Err(Error::Degenerate(format!("control prior for {} is zero", control.group)));
    }
    Ok(EffectSummary {
        relative_risk: treatment.prior_probability / control.prior_probability,
        odds_ratio: treatment.prior_odds / control.prior_odds,
        prior_control: control.clone(),
        prior_treatment: treatment.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irma2::{self, LikelihoodTable};
    use crate::likelihood::GaussianParams;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn odds_algebra() {
        assert_eq!(odds_from_prob(0.5).unwrap(), 1.0);
        assert!(close(prob_from_odds(0.169), 0.1446, 1e-4));
        let p = 0.07652;
        assert!(close(prob_from_odds(odds_from_prob(p).unwrap()), p, 1e-12));
        assert_eq!(odds_from_prob(1.0), Err(Error::InfiniteOdds));
    }

    #[test]
    fn estimate_prior_examples() {
        let lr = (1.0 - 0.655) / (1.0 - 0.275);
        let p = estimate_prior(10, 124, lr, "placebo", Method::CountBased).unwrap();
        assert!(close(p.prior_odds, 0.169, 5e-4));
        assert!(close(p.prior_probability, 0.145, 5e-4));
        let p = estimate_prior(19, 93, 0.655 / 0.275, "irbesartan", Method::CountBased).unwrap();
        assert!(close(p.prior_probability, 0.079, 5e-4));
        let p = estimate_prior(7, 50, 1.0, "x", Method::CountBased).unwrap();
        assert_eq!(p.prior_odds, 7.0 / 50.0);
        let p = estimate_prior(0, 50, 2.0, "x", Method::CountBased).unwrap();
        assert!(p.degenerate && p.prior_probability == 0.0);
        assert!(estimate_prior(3, 0, 1.0, "x", Method::CountBased).is_err());
        assert!(matches!(estimate_prior(3, 5, 0.0, "x", Method::CountBased), Err(Error::Underflow(_))));
    }

    #[test]
    fn count_based_priors_from_published_likelihoods() {
        let ds = irma2::builtin_irma2();
        let src = LikelihoodSource::Dichotomous(irma2::published_likelihoods(LikelihoodTable::Segmental));
        let priors = estimate_all_priors(&ds, &irma2::segmental_rule(80.0), &src, &irma2::report_groups()).unwrap();
        let got: Vec<f64> = priors.iter().map(|p| p.prior_probability).collect();
        for (g, want) in got.iter().zip([0.145, 0.079, 0.109, 0.045]) {
            assert!(close(*g, want, 1e-3), "{got:?}");
        }
        assert!(priors[0].control && !priors[1].control);
        assert_eq!(priors[0].observed, Some(Counts { events: 30, total: 196 }));
        assert_eq!(priors[1].side, Some(Side::Above));
    }

    #[test]
    fn parametric_priors_from_stated_tail_areas() {
        let ds = irma2::builtin_irma2();
        let src = LikelihoodSource::Tail(irma2::stated_tail_areas());
        let priors = estimate_all_priors(&ds, &irma2::segmental_rule(80.0), &src, &irma2::report_groups()).unwrap();
        for (p, want) in priors.iter().zip([0.150, 0.064, 0.089, 0.036]) {
            assert!(close(p.prior_probability, want, 1e-3), "{} {}", p.group, p.prior_probability);
            assert_eq!(p.method, Method::ParametricTail);
        }
    }

    #[test]
    fn posterior_examples() {
        assert!(close(posterior_probability(0.169, 1.0), 0.1446, 1e-4));
        assert!(close(posterior_probability(0.169, 3.76), 0.389, 1e-3));
        assert!(close(posterior_probability(0.0857, 3.76), 0.244, 1e-3));
    }

    #[test]
    fn flat_model_gives_flat_curve() {
        let g = GaussianParams { mu: 4.0, sigma: 0.5, n: 10 };
        let model = OutcomeModel { with_outcome: g, without_outcome: g };
        let prior = estimate_prior(10, 124, 0.5, "placebo", Method::CountBased).unwrap();
        let curve = posterior_curve(&model, &prior, &Grid::new(20.0, 200.0, 1.0).unwrap()).unwrap();
        assert_eq!(curve.points.len(), 181);
        assert!(curve.points.iter().all(|p| close(p.probability, prior.prior_probability, 1e-15)));
    }

    #[test]
    fn column5_curve_values() {
        let model = irma2::published_segmental_model();
        let prior = estimate_prior(10, 124, (10.0 / 29.0) / (124.0 / 171.0), "placebo", Method::CountBased).unwrap();
        let curve = posterior_curve(&model, &prior, &Grid::new(20.0, 200.0, 1.0).unwrap()).unwrap();
        assert!(close(curve.probability_at(40.0).unwrap(), 0.045, 1e-3));
        assert!(close(curve.probability_at(140.0).unwrap(), 0.389, 1e-3));
        let rct = PriorEstimate::from_observed("placebo", true, Counts { events: 30, total: 196 }).unwrap();
        let rct_curve = posterior_curve(&model, &rct, &curve.grid).unwrap();
        assert!(rct_curve.points.iter().zip(&curve.points).all(|(r, s)| r.probability >= s.probability));
        assert!(curve.probability_at(10.0).is_err());
    }

    #[test]
    fn arr_grid_mismatch() {
        let model = irma2::published_segmental_model();
        let prior = estimate_prior(10, 124, 1.0, "a", Method::CountBased).unwrap();
        let a = posterior_curve(&model, &prior, &Grid::new(20.0, 200.0, 1.0).unwrap()).unwrap();
        let b = posterior_curve(&model, &prior, &Grid::new(20.0, 200.0, 2.0).unwrap()).unwrap();
        assert!(matches!(arr_curve(&a, &b), Err(Error::GridMismatch(_))));
        assert!(arr_curve(&a, &a).unwrap().iter().all(|p| p.arr == 0.0));
    }

    #[test]
    fn effect_summary_examples() {
        let c = estimate_prior(10, 124, (10.0 / 29.0) / (124.0 / 171.0), "placebo", Method::CountBased).unwrap();
        let t = estimate_prior(19, 93, (19.0 / 29.0) / (47.0 / 171.0), "irbesartan", Method::CountBased).unwrap();
        let e = effect_summary(&c, &t).unwrap();
        assert!(close(e.relative_risk, 0.545, 2e-3));
        assert!(close(e.odds_ratio, 0.507, 2e-3));
        let same = effect_summary(&c, &c).unwrap();
        assert_eq!((same.relative_risk, same.odds_ratio), (1.0, 1.0));
        let rc = PriorEstimate::from_observed("placebo", true, Counts { events: 30, total: 196 }).unwrap();
        let rt = PriorEstimate::from_observed("irbesartan", false, Counts { events: 29, total: 379 }).unwrap();
        // direct: (29/350) / (30/166)
        assert!(close(effect_summary(&rc, &rt).unwrap().odds_ratio, (29.0 / 350.0) / (30.0 / 166.0), 1e-12));
        assert!(close(effect_summary(&rc, &rt).unwrap().odds_ratio, 0.459, 1e-3));
        let zero = estimate_prior(0, 10, 1.0, "z", Method::CountBased).unwrap();
        assert!(effect_summary(&zero, &t).is_err());
    }
}
