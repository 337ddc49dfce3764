//! Outcome-conditional distributions of the baseline test and the
//! likelihood ratios derived from them.
//!
//! The test value is modelled as log-normal within each outcome stratum:
//! `ln(value) ~ N(mu, sigma^2)`. Three flavours of likelihood ratio are
//! provided: point (ratio of densities at a value), tail (ratio of areas
//! beyond a threshold) and dichotomous (ratio of counted proportions).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{gaussian_ln_pdf, normal_cdf, normal_sf};
use crate::trial_data::{ArmSet, Counts, Interval, SegmentRule, TrialDataset};

/// Denominator floor for tail and dichotomous ratios.
pub const MIN_TAIL_PROBABILITY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub mu: f64,
    pub sigma: f64,
    pub n: u64,
}

impl GaussianParams {
    pub fn new(mu: f64, sigma: f64, n: u64) -> Result<Self> {
        if !mu.is_finite() || !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("invalid Gaussian (mu {mu}, sigma {sigma})")));
        }
        Ok(GaussianParams { mu, sigma, n })
    }

    pub fn ln_pdf(&self, ln_value: f64) -> f64 {
        gaussian_ln_pdf(ln_value, self.mu, self.sigma)
    }

    /// P(ln X <= ln_value).
    pub fn cdf(&self, ln_value: f64) -> f64 {
        normal_cdf((ln_value - self.mu) / self.sigma)
    }

    pub fn sf(&self, ln_value: f64) -> f64 {
        normal_sf((ln_value - self.mu) / self.sigma)
    }
}

/// Mean and sample standard deviation (n - 1 divisor) of `ln(values)`.
pub fn fit_log_gaussian(values: &[f64]) -> Result<GaussianParams> {
    if values.len() < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 values to fit, got {}", values.len())));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("value {v} has no real logarithm")));
    }
    if values.iter().all(|v| *v == values[0]) {
        return Err(Error::Degenerate(format!("all {} values equal {}", values.len(), values[0])));
    }
    let n = values.len() as f64;
    let mean = values.iter().map(|v| v.ln()).sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v.ln() - mean).powi(2)).sum();
    GaussianParams::new(mean, (ss / (n - 1.0)).sqrt(), values.len() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeModel {
    #[serde(rename = "with")]
    pub with_outcome: GaussianParams,
    #[serde(rename = "without")]
    pub without_outcome: GaussianParams,
}

impl OutcomeModel {
    /// Fits both strata from subject records.
    pub fn fit(data: &TrialDataset) -> Result<Self> {
        let pick = |outcome: bool| -> Vec<f64> {
            data.records.iter().filter(|r| r.outcome == outcome).map(|r| r.baseline).collect()
        };
        let with_outcome = fit_log_gaussian(&pick(true)).map_err(|e| stratum_error(e, "outcome"))?;
        let without_outcome = fit_log_gaussian(&pick(false)).map_err(|e| stratum_error(e, "no-outcome"))?;
        Ok(OutcomeModel { with_outcome, without_outcome })
    }

    /// ln of the point likelihood ratio at `value`.
    pub fn ln_likelihood_ratio(&self, value: f64) -> f64 {
        let x = value.ln();
        self.with_outcome.ln_pdf(x) - self.without_outcome.ln_pdf(x)
    }
}

fn stratum_error(e: Error, stratum: &str) -> Error {
    match e {
        Error::InsufficientData(m) => Error::InsufficientData(format!("{stratum} stratum: {m}")),
        Error::Degenerate(m) => Error::Degenerate(format!("{stratum} stratum: {m}")),
        other => other,
    }
}

/// Ratio of the outcome density to the no-outcome density of `ln(value)`.
/// `value` must be positive.
pub fn point_likelihood_ratio(model: &OutcomeModel, value: f64) -> f64 {
    model.ln_likelihood_ratio(value).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Below,
    Above,
}

/// Lower-tail areas of both strata at a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailAreas {
    pub threshold: f64,
    pub below_with: f64,
    pub below_without: f64,
}

impl TailAreas {
    pub fn from_model(model: &OutcomeModel, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0) {
            return Err(Error::Domain(format!("threshold {threshold} must be positive")));
        }
        let t = threshold.ln();
        Ok(TailAreas { threshold, below_with: model.with_outcome.cdf(t), below_without: model.without_outcome.cdf(t) })
    }

    pub fn ratio(&self, side: Side) -> Result<f64> {
        let (num, den) = match side {
            Side::Below => (self.below_with, self.below_without),
            Side::Above => (1.0 - self.below_with, 1.0 - self.below_without),
        };
        ratio_checked(num, den, side)
    }
}

fn ratio_checked(num: f64, den: f64, side: Side) -> Result<f64> {
    if den < MIN_TAIL_PROBABILITY {
        return Err(Error::Underflow(format!("{side:?} probability in the no-outcome stratum is {den:e}")));
    }
    if num < MIN_TAIL_PROBABILITY {
        return Err(Error::Underflow(format!("{side:?} probability in the outcome stratum is {num:e}")));
    }
    Ok(num / den)
}

/// Ratio of tail areas beyond `threshold`, outcome over no outcome.
pub fn tail_likelihood_ratio(model: &OutcomeModel, threshold: f64, side: Side) -> Result<f64> {
    if !(threshold > 0.0) {
        return Err(Error::Domain(format!("threshold {threshold} must be positive")));
    }
    let t = threshold.ln();
    let (num, den) = match side {
        Side::Below => (model.with_outcome.cdf(t), model.without_outcome.cdf(t)),
        Side::Above => (model.with_outcome.sf(t), model.without_outcome.sf(t)),
    };
    ratio_checked(num, den, side)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumCounts {
    pub events_high: u64,
    pub events_total: u64,
    pub nonevents_high: u64,
    pub nonevents_total: u64,
}

impl StratumCounts {
    pub const fn new(events_high: u64, events_total: u64, nonevents_high: u64, nonevents_total: u64) -> Self {
        StratumCounts { events_high, events_total, nonevents_high, nonevents_total }
    }
}

/// Where a set of dichotomous likelihoods came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LikelihoodOrigin {
    /// Counted directly from the data supplied.
    Empirical,
    /// Copied from a published table.
    Published,
    /// Solved from segment counts and arm enrolment totals.
    SharedIdentified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DichotomousLikelihoods {
    pub threshold: f64,
    pub p_high_given_outcome: f64,
    pub p_high_given_no_outcome: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<StratumCounts>,
    pub origin: LikelihoodOrigin,
}

impl DichotomousLikelihoods {
    pub fn from_counts(threshold: f64, counts: StratumCounts, origin: LikelihoodOrigin) -> Result<Self> {
        if counts.events_total == 0 {
            return Err(Error::InsufficientData("no subjects in the outcome stratum".into()));
        }
        if counts.nonevents_total == 0 {
            return Err(Error::InsufficientData("no subjects in the no-outcome stratum".into()));
        }
        if counts.events_high > counts.events_total || counts.nonevents_high > counts.nonevents_total {
            return Err(Error::InvalidInput("stratum high count exceeds its total".into()));
        }
        Ok(DichotomousLikelihoods {
            threshold,
            p_high_given_outcome: counts.events_high as f64 / counts.events_total as f64,
            p_high_given_no_outcome: counts.nonevents_high as f64 / counts.nonevents_total as f64,
            counts: Some(counts),
            origin,
        })
    }

    /// Likelihood ratio for a result on `side` of the threshold:
    /// `(1 - a) / (1 - b)` below, `a / b` above.
    pub fn ratio(&self, side: Side) -> Result<f64> {
        let (a, b) = (self.p_high_given_outcome, self.p_high_given_no_outcome);
        match side {
            Side::Below => ratio_checked(1.0 - a, 1.0 - b, side),
            Side::Above => ratio_checked(a, b, side),
        }
    }
}

/// Proportions above `threshold` in each outcome stratum, pooled over all arms.
pub fn empirical_dichotomous(data: &TrialDataset, threshold: f64) -> Result<DichotomousLikelihoods> {
    let all = ArmSet::new(data.arms())?;
    let (low, high) = split_counts(data, threshold, &all)?;
    let counts = StratumCounts {
        events_high: high.events,
        events_total: low.events + high.events,
        nonevents_high: high.non_events(),
        nonevents_total: low.non_events() + high.non_events(),
    };
    DichotomousLikelihoods::from_counts(threshold, counts, LikelihoodOrigin::Empirical)
}

fn split_counts(data: &TrialDataset, threshold: f64, arms: &ArmSet) -> Result<(Counts, Counts)> {
    let low = data.counts_in(&Interval::new(0.0, threshold)?, arms)?;
    let high = data.counts_in(&Interval::new(threshold, f64::INFINITY)?, arms)?;
    Ok((low, high))
}

/// Segment counts for a two-segment design, each with the enrolment of the
/// arm set it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentCells {
    pub low_enrolled: u64,
    pub low: Counts,
    pub high_enrolled: u64,
    pub high: Counts,
}

impl SegmentCells {
    /// Reads the cells for a rule split at `threshold`: the segment ending at
    /// the threshold is "low", the one starting there is "high".
    pub fn from_design(data: &TrialDataset, rule: &SegmentRule, threshold: f64) -> Result<Self> {
        let segs = rule.segments();
        let low = segs.iter().find(|s| s.range.hi == threshold);
        let high = segs.iter().find(|s| s.range.lo == threshold);
        let (Some(low), Some(high)) = (low, high) else {
            return Err(Error::InvalidInput(format!("segment rule is not split at threshold {threshold}")));
        };
        let (elo, ehi) = data.eligibility;
        if segs.len() != 2 || low.range.lo > elo || high.range.hi < ehi {
            return Err(Error::InvalidInput("identification needs two segments covering the eligibility range".into()));
        }
        if low.arms.iter().any(|a| high.arms.contains(a)) {
            return Err(Error::InvalidInput("an arm is allocated to both segments".into()));
        }
        let low_enrolled = data.arm_counts(&low.arms).total;
        let high_enrolled = data.arm_counts(&high.arms).total;
        if low_enrolled == 0 || high_enrolled == 0 {
            return Err(Error::InsufficientData("both arms required".into()));
        }
        Ok(SegmentCells {
            low_enrolled,
            low: data.counts_in(&low.range, &low.arms)?,
            high_enrolled,
            high: data.counts_in(&high.range, &high.arms)?,
        })
    }
}

/// Solution of the shared-likelihood segment equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharedSolution {
    pub p_high_given_outcome: f64,
    pub p_high_given_no_outcome: f64,
    pub prior_low_arm: f64,
    pub prior_high_arm: f64,
    /// Set when the equations had no admissible solution and the values
    /// maximise the constrained multinomial likelihood instead.
    #[serde(default)]
    pub constrained: bool,
}

/// Solves for the likelihoods shared by both arms.
///
/// With `a = P(high | outcome)`, `b = P(high | no outcome)` and arm priors
/// `p_l`, `p_h`, the fractions of each arm's enrolment observed in its
/// segment satisfy
///
/// ```text
/// e_l = p_l (1 - a)      f_l = (1 - p_l)(1 - b)
/// e_h = p_h a            f_h = (1 - p_h) b
/// ```
///
/// Eliminating the priors and `b` leaves a quadratic in `a`. Of its roots
/// the admissible one with the largest `a - b` is returned. A negative
/// discriminant is treated as zero.
pub fn solve_shared(e_l: f64, f_l: f64, e_h: f64, f_h: f64) -> Result<SharedSolution> {
    let qa = f_l + f_h - 1.0;
    let qb = (1.0 - e_l) * (1.0 - f_h) + e_h - f_l - f_l * e_h;
    let qc = -e_h * (1.0 - e_l - f_l);

    let mut roots = Vec::with_capacity(2);
    if qa.abs() < 1e-14 {
        if qb.abs() > 1e-300 {
            roots.push(-qc / qb);
        }
    } else {
        // Sampling noise can push the discriminant below zero; the vertex
        // is then the value of `a` with the smallest residual.
        let disc = qb * qb - 4.0 * qa * qc;
        let sq = disc.max(0.0).sqrt();
        // numerically stable pair
        let q = -0.5 * (qb + qb.signum() * sq);
        if q != 0.0 {
            roots.push(q / qa);
            roots.push(qc / q);
        } else {
            roots.push(-qb / (2.0 * qa));
        }
    }

    roots
        .into_iter()
        .filter_map(|a| {
            if !(a > e_h && a < 1.0 - e_l) || !(a > 0.0) {
                return None;
            }
            let b = f_h * a / (a - e_h);
            let prior_low_arm = e_l / (1.0 - a);
            let prior_high_arm = e_h / a;
            let ok = b > 0.0 && b < 1.0 && (0.0..1.0).contains(&prior_low_arm) && (0.0..1.0).contains(&prior_high_arm);
            ok.then_some(SharedSolution {
                p_high_given_outcome: a,
                p_high_given_no_outcome: b,
                prior_low_arm,
                prior_high_arm,
                constrained: false,
            })
        })
        .max_by(|x, y| {
            let dx = x.p_high_given_outcome - x.p_high_given_no_outcome;
            let dy = y.p_high_given_outcome - y.p_high_given_no_outcome;
            dx.total_cmp(&dy)
        })
        .ok_or_else(|| Error::Identification("no admissible solution of the segment equations".into()))
}

/// Closed-form solution of the segment equations when one is admissible,
/// otherwise the constrained maximum-likelihood fit from
/// [`fit_shared_mle`]. With four free parameters and four independent cell
/// frequencies the two agree whenever the former exists.
pub fn solve_cells(cells: &SegmentCells) -> Result<SharedSolution> {
    let nl = cells.low_enrolled as f64;
    let nh = cells.high_enrolled as f64;
    solve_shared(
        cells.low.events as f64 / nl,
        cells.low.non_events() as f64 / nl,
        cells.high.events as f64 / nh,
        cells.high.non_events() as f64 / nh,
    )
    .or_else(|_| fit_shared_mle(cells))
}

fn xlogy(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else if x > 0.0 {
        k * x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Maximises `e ln p + f ln(1 - p) + r ln(c + p d)` over `p` in `[0, 1]`;
/// the objective is concave so the stationary point is found from a
/// quadratic. Returns `(p, value)`.
fn profile_arm_prior(e: f64, f: f64, r: f64, c: f64, d: f64) -> (f64, f64) {
    let g = |p: f64| xlogy(e, p) + xlogy(f, 1.0 - p) + xlogy(r, c + p * d);
    let n = e + f + r;
    let qa = -d * n;
    let qb = d * (e + r) - c * (e + f);
    let qc = e * c;
    let mut candidates = vec![0.0, 1.0];
    if qa.abs() < 1e-300 {
        if qb != 0.0 {
            candidates.push(-qc / qb);
        }
    } else {
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
        let q = -0.5 * (qb + qb.signum() * disc);
        if q != 0.0 {
            candidates.push(q / qa);
            candidates.push(qc / q);
        }
    }
    candidates
        .into_iter()
        .filter(|p| (0.0..=1.0).contains(p))
        .map(|p| (p, g(p)))
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .expect("boundary candidates are always present")
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Maximum-likelihood likelihoods and priors for a two-segment design.
///
/// Each arm's enrolment falls multinomially into (segment events, segment
/// non-events, outside the segment). The arm priors are profiled out in
/// closed form and the two likelihoods found by simplex search on the logit
/// scale, started from a coarse grid restricted to `a > b`.
pub fn fit_shared_mle(cells: &SegmentCells) -> Result<SharedSolution> {
    let el = cells.low.events as f64;
    let fl = cells.low.non_events() as f64;
    let rl = (cells.low_enrolled - cells.low.total) as f64;
    let eh = cells.high.events as f64;
    let fh = cells.high.non_events() as f64;
    let rh = (cells.high_enrolled - cells.high.total) as f64;
    let profile = |a: f64, b: f64| {
        // low arm: outcome cell p(1-a), non-outcome (1-p)(1-b), rest b + p(a-b)
        let (pl, ll) = profile_arm_prior(el, fl, rl, b, a - b);
        let ll = ll + xlogy(el, 1.0 - a) + xlogy(fl, 1.0 - b);
        // high arm: p a, (1-p) b, rest (1-b) + p(b-a)
        let (ph, lh) = profile_arm_prior(eh, fh, rh, 1.0 - b, b - a);
        let lh = lh + xlogy(eh, a) + xlogy(fh, b);
        (pl, ph, ll + lh)
    };
    let objective = |x: &[f64]| {
        let v = -profile(logistic(x[0]), logistic(x[1])).2;
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let grid = [0.1, 0.3, 0.5, 0.7, 0.9];
    let start = grid
        .iter()
        .flat_map(|&a| grid.iter().filter(move |&&b| b < a).map(move |&b| (a, b)))
        .map(|(a, b): (f64, f64)| [(a / (1.0 - a)).ln(), (b / (1.0 - b)).ln()])
        .min_by(|x, y| objective(x).total_cmp(&objective(y)))
        .expect("non-empty grid");
    let (x, fx) = crate::optim::nelder_mead(objective, &start, 0.5, 1e-10, 2000);
    if !fx.is_finite() {
        return Err(Error::Identification("segment likelihood has no finite maximum".into()));
    }
    let (a, b) = (logistic(x[0]), logistic(x[1]));
    let (pl, ph, _) = profile(a, b);
    Ok(SharedSolution {
        p_high_given_outcome: a,
        p_high_given_no_outcome: b,
        prior_low_arm: pl,
        prior_high_arm: ph,
        constrained: true,
    })
}

/// Dichotomous likelihoods shared by both arms of a segmental design,
/// identified from segment counts and each arm's enrolment.
pub fn identify_shared_likelihoods(
    data: &TrialDataset,
    rule: &SegmentRule,
    threshold: f64,
) -> Result<DichotomousLikelihoods> {
    let cells = SegmentCells::from_design(data, rule, threshold)?;
    let s = solve_cells(&cells)?;
    Ok(DichotomousLikelihoods {
        threshold,
        p_high_given_outcome: s.p_high_given_outcome,
        p_high_given_no_outcome: s.p_high_given_no_outcome,
        counts: None,
        origin: LikelihoodOrigin::SharedIdentified,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    Outcome,
    NoOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumSummary {
    pub group: String,
    pub stratum: Stratum,
    pub params: Option<GaussianParams>,
    pub high: u64,
    pub total: u64,
    pub p_high: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub threshold: f64,
    pub strata: Vec<StratumSummary>,
    pub max_mu_gap: Option<f64>,
    pub max_sigma_gap: Option<f64>,
    pub max_likelihood_gap: Option<f64>,
}

impl IndependenceReport {
    pub fn get(&self, group: &str, stratum: Stratum) -> Option<&StratumSummary> {
        self.strata.iter().find(|s| s.group == group && s.stratum == stratum)
    }
}

/// Compares control and pooled treatment arms within each outcome stratum.
pub fn check_intervention_independence(data: &TrialDataset, threshold: f64) -> Result<IndependenceReport> {
    let control = ArmSet::single(data.control.clone());
    let treated = data.treatment_arms().ok_or_else(|| Error::InsufficientData("both arms required".into()))?;
    let mut strata = Vec::with_capacity(4);
    for group in [&control, &treated] {
        let (low, high) = split_counts(data, threshold, group)?;
        for stratum in [Stratum::Outcome, Stratum::NoOutcome] {
            let is_outcome = stratum == Stratum::Outcome;
            let (h, t) = if is_outcome {
                (high.events, low.events + high.events)
            } else {
                (high.non_events(), low.non_events() + high.non_events())
            };
            let values: Vec<f64> = data
                .records
                .iter()
                .filter(|r| group.contains(&r.arm) && r.outcome == is_outcome)
                .map(|r| r.baseline)
                .collect();
            let (params, flag) = if !data.bins.iter().any(|b| group.contains(&b.arm)) || !values.is_empty() {
                match fit_log_gaussian(&values) {
                    Ok(p) => (Some(p), None),
                    Err(e) => (None, Some(e.to_string())),
                }
            } else {
                (None, Some("aggregate bins only; no subject values to fit".into()))
            };
            strata.push(StratumSummary {
                group: group.label(),
                stratum,
                params,
                high: h,
                total: t,
                p_high: (t > 0).then(|| h as f64 / t as f64),
                flag,
            });
        }
    }
    let gap = |f: &dyn Fn(&StratumSummary) -> Option<f64>| -> Option<f64> {
        [Stratum::Outcome, Stratum::NoOutcome]
            .iter()
            .filter_map(|s| {
                let c = strata.iter().find(|x| x.group == control.label() && x.stratum == *s)?;
                let t = strata.iter().find(|x| x.group == treated.label() && x.stratum == *s)?;
                Some((f(c)? - f(t)?).abs())
            })
            .reduce(f64::max)
    };
    let max_mu_gap = gap(&|s| s.params.map(|p| p.mu));
    let max_sigma_gap = gap(&|s| s.params.map(|p| p.sigma));
    let max_likelihood_gap = gap(&|s| s.p_high);
    Ok(IndependenceReport { threshold, strata, max_mu_gap, max_sigma_gap, max_likelihood_gap })
}
