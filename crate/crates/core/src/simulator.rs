//! Synthetic trials that satisfy the intervention-independence assumption by
//! construction, and Monte Carlo comparisons of segmental estimates against
//! the full randomised result.
//!
//! Each subject's outcome is drawn first from its arm's true prior; the
//! baseline is then drawn from the outcome-conditional log-Gaussian truncated
//! to the eligibility range, by inverse-CDF sampling. Randomness comes from
//! ChaCha8 with one stream per replicate, see [`crate::rng`].

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{estimate_all_priors, posterior_curve, Grid, LikelihoodSource, PosteriorCurve, PriorEstimate};
use crate::error::{Error, Result};
use crate::likelihood::{identify_shared_likelihoods, DichotomousLikelihoods, GaussianParams, OutcomeModel};
use crate::normal::TruncatedNormal;
use crate::rng;
use crate::trial_data::{apply_segment_filter, Arm, ArmSet, SegmentRule, SubjectRecord, TrialDataset};
use crate::validation::{bootstrap_prior_cis, MAX_FAILURE_FRACTION};

pub const CONTROL_ARM: &str = "placebo";
pub const TREATMENT_ARM: &str = "treatment";

const MIN_TRUNCATION_MASS: f64 = 1e-6;

/// Location and scale of ln(end-of-study value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueModel {
    pub mu: f64,
    pub sigma: f64,
}

fn default_outcome_threshold() -> f64 {
    200.0
}

fn default_bootstrap_replicates() -> usize {
    1000
}

fn default_level() -> f64 {
    0.95
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_control: u64,
    pub n_treatment: u64,
    pub true_prior_control: f64,
    pub true_prior_treatment: f64,
    pub model: OutcomeModel,
    pub eligibility_range: (f64, f64),
    /// Segment split: control at or below, treatment above.
    pub threshold: f64,
    pub replicates: usize,
    pub seed: u64,
    /// End-of-study value model; defaults to the with-outcome baseline
    /// Gaussian shifted up by ln 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome_value: Option<ValueModel>,
    #[serde(default = "default_outcome_threshold")]
    pub outcome_threshold: f64,
    /// Bootstrap replicates per trial for interval coverage; 0 disables it.
    #[serde(default = "default_bootstrap_replicates")]
    pub bootstrap_replicates: usize,
    #[serde(default = "default_level")]
    pub level: f64,
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            // serde names the offending field between backticks
            let field = msg.split('`').nth(1).unwrap_or("<json>").to_string();
            Error::Config { field, message: msg }
        })
    }

    pub fn value_model(&self) -> ValueModel {
        self.outcome_value.unwrap_or(ValueModel {
            mu: self.model.with_outcome.mu + std::f64::consts::LN_2,
            sigma: self.model.with_outcome.sigma,
        })
    }

    fn check_prior(field: &str, p: f64, open: bool) -> Result<()> {
        let ok = if open { p > 0.0 && p < 1.0 } else { (0.0..1.0).contains(&p) };
        if ok {
            Ok(())
        } else {
            let range = if open { "(0, 1)" } else { "[0, 1)" };
            Err(Error::config(field, format!("{p} is outside {range}")))
        }
    }

    /// Checks needed to generate data. Priors may be zero.
    pub fn validate_generation(&self) -> Result<()> {
        if self.n_control + self.n_treatment == 0 {
            return Err(Error::config("n_control", "at least one subject is required"));
        }
        Self::check_prior("true_prior_control", self.true_prior_control, false)?;
        Self::check_prior("true_prior_treatment", self.true_prior_treatment, false)?;
        let (lo, hi) = self.eligibility_range;
        if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
            return Err(Error::config("eligibility_range", format!("({lo}, {hi}) is not a positive finite range")));
        }
        if !(self.threshold > lo && self.threshold < hi) {
            return Err(Error::config("threshold", format!("{} must lie inside ({lo}, {hi})", self.threshold)));
        }
        for (field, g) in
            [("model.with.sigma", self.model.with_outcome), ("model.without.sigma", self.model.without_outcome)]
        {
            if !(g.sigma > 0.0) || !g.mu.is_finite() {
                return Err(Error::config(field, format!("needs finite mu and sigma > 0 (got {}, {})", g.mu, g.sigma)));
            }
        }
        let v = self.value_model();
        if !(v.sigma > 0.0) || !v.mu.is_finite() {
            return Err(Error::config("outcome_value.sigma", "needs finite mu and sigma > 0"));
        }
        if !(self.outcome_threshold > 0.0) {
            return Err(Error::config("outcome_threshold", "must be positive"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::config("level", format!("{} is outside (0, 1)", self.level)));
        }
        Ok(())
    }

    /// Checks needed for a comparison run.
    pub fn validate(&self) -> Result<()> {
        self.validate_generation()?;
        Self::check_prior("true_prior_control", self.true_prior_control, true)?;
        Self::check_prior("true_prior_treatment", self.true_prior_treatment, true)?;
        if self.n_control == 0 {
            return Err(Error::config("n_control", "must be positive"));
        }
        if self.n_treatment == 0 {
            return Err(Error::config("n_treatment", "must be positive"));
        }
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be positive"));
        }
        if self.bootstrap_replicates != 0 && self.bootstrap_replicates < 1000 {
            return Err(Error::config("bootstrap_replicates", "must be 0 or at least 1000"));
        }
        Ok(())
    }
}

struct Samplers {
    baseline: [TruncatedNormal; 2],
    value: [TruncatedNormal; 2],
}

impl Samplers {
    fn new(cfg: &SimConfig) -> Result<Self> {
        let (lo, hi) = (cfg.eligibility_range.0.ln(), cfg.eligibility_range.1.ln());
        let trunc = |field: &str, g: GaussianParams| -> Result<TruncatedNormal> {
            let t = TruncatedNormal::new(g.mu, g.sigma, lo, hi).map_err(|e| Error::config(field, e.to_string()))?;
            if t.mass() < MIN_TRUNCATION_MASS {
                return Err(Error::config(
                    field,
                    format!("only {:.3e} of the mass lies in the eligibility range", t.mass()),
                ));
            }
            Ok(t)
        };
        let v = cfg.value_model();
        let cut = cfg.outcome_threshold.ln();
        let tail = |field: &str, lo: f64, hi: f64| -> Result<TruncatedNormal> {
            let t = TruncatedNormal::new(v.mu, v.sigma, lo, hi).map_err(|e| Error::config(field, e.to_string()))?;
            if t.mass() < MIN_TRUNCATION_MASS {
                return Err(Error::config(
                    field,
                    "end-of-study value model puts no mass on one side of the outcome threshold",
                ));
            }
            Ok(t)
        };
        Ok(Samplers {
            baseline: [
                trunc("model.without", cfg.model.without_outcome)?,
                trunc("model.with", cfg.model.with_outcome)?,
            ],
            value: [tail("outcome_value", f64::NEG_INFINITY, cut)?, tail("outcome_value", cut, f64::INFINITY)?],
        })
    }
}

/// One synthetic trial; replicate `index` uses stream `index` of the seed.
pub fn generate_trial(cfg: &SimConfig, index: u64) -> Result<TrialDataset> {
    cfg.validate_generation()?;
    let samplers = Samplers::new(cfg)?;
    let control = Arm::new(CONTROL_ARM)?;
    let treatment = Arm::new(TREATMENT_ARM)?;
    let mut rng = rng::stream(cfg.seed, index);
    let (lo, hi) = cfg.eligibility_range;
    let mut records = Vec::with_capacity((cfg.n_control + cfg.n_treatment) as usize);
    for (arm, n, prior) in
        [(&control, cfg.n_control, cfg.true_prior_control), (&treatment, cfg.n_treatment, cfg.true_prior_treatment)]
    {
        for _ in 0..n {
            let outcome = rng.random::<f64>() < prior;
            let k = outcome as usize;
            let baseline = samplers.baseline[k].sample(&mut rng).exp().clamp(lo, hi);
            let mut value = samplers.value[k].sample(&mut rng).exp();
            // keep the flag and the value consistent after rounding
            if outcome && value <= cfg.outcome_threshold {
                value = f64::from_bits(cfg.outcome_threshold.to_bits() + 1);
            } else if !outcome && value > cfg.outcome_threshold {
                value = cfg.outcome_threshold;
            }
            records.push(SubjectRecord { baseline, arm: arm.clone(), outcome, outcome_value: Some(value) });
        }
    }
    TrialDataset::new(
        format!("simulated-{}-{index}", cfg.seed),
        records,
        vec![],
        cfg.eligibility_range,
        Some(cfg.outcome_threshold),
        control,
    )
}

/// Priors for control and treatment from a segmental design, using
/// likelihoods identified from the segment counts.
pub fn identified_priors(
    data: &TrialDataset,
    rule: &SegmentRule,
    threshold: f64,
) -> Result<(DichotomousLikelihoods, Vec<PriorEstimate>)> {
    let lik = identify_shared_likelihoods(data, rule, threshold)?;
    let groups: Vec<ArmSet> = rule.segments().iter().map(|s| s.arms.clone()).collect();
    let priors = estimate_all_priors(data, rule, &LikelihoodSource::Dichotomous(lik), &groups)?;
    Ok((lik, priors))
}

/// Priors from tail areas of a model fitted to the segmental subjects.
pub fn parametric_priors(
    data: &TrialDataset,
    rule: &SegmentRule,
    threshold: f64,
) -> Result<(OutcomeModel, Vec<PriorEstimate>)> {
    let seg = apply_segment_filter(data, rule)?;
    let model = OutcomeModel::fit(&seg)?;
    let groups: Vec<ArmSet> = rule.segments().iter().map(|s| s.arms.clone()).collect();
    let priors = estimate_all_priors(data, rule, &LikelihoodSource::from_model(&model, threshold)?, &groups)?;
    Ok((model, priors))
}

fn odds_ratio(control: f64, treatment: f64) -> Option<f64> {
    let r = (treatment / (1.0 - treatment)) / (control / (1.0 - control));
    r.is_finite().then_some(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRow {
    pub replicate: usize,
    pub rct_control: f64,
    pub rct_treatment: f64,
    pub rct_odds_ratio: Option<f64>,
    pub segmental_control: Option<f64>,
    pub segmental_treatment: Option<f64>,
    pub segmental_odds_ratio: Option<f64>,
    pub parametric_control: Option<f64>,
    pub parametric_treatment: Option<f64>,
    pub parametric_odds_ratio: Option<f64>,
    pub ci_control_lo: Option<f64>,
    pub ci_control_hi: Option<f64>,
    pub ci_treatment_lo: Option<f64>,
    pub ci_treatment_hi: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: String,
    pub arm: String,
    pub truth: f64,
    pub n: usize,
    pub mean: f64,
    pub bias: f64,
    pub sd: f64,
    pub rmse: f64,
    /// Monte Carlo standard error of the mean.
    pub mc_se: f64,
}

impl EstimatorSummary {
    pub fn from_values(estimator: &str, arm: &str, truth: f64, values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd =
            if n > 1 { (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
        let rmse = (values.iter().map(|v| (v - truth).powi(2)).sum::<f64>() / n as f64).sqrt();
        Some(EstimatorSummary {
            estimator: estimator.to_string(),
            arm: arm.to_string(),
            truth,
            n,
            mean,
            bias: mean - truth,
            sd,
            rmse,
            mc_se: sd / (n as f64).sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub replicates: usize,
    pub failures: usize,
    pub estimators: Vec<EstimatorSummary>,
    pub coverage_control: Option<f64>,
    pub coverage_treatment: Option<f64>,
}

impl ComparisonSummary {
    pub fn get(&self, estimator: &str, arm: &str) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.estimator == estimator && e.arm == arm)
    }

    /// Recomputes the summary from per-replicate rows.
    pub fn from_rows(cfg: &SimConfig, rows: &[ReplicateRow]) -> Self {
        let collect = |f: &dyn Fn(&ReplicateRow) -> Option<f64>| -> Vec<f64> { rows.iter().filter_map(f).collect() };
        let (tc, tt) = (cfg.true_prior_control, cfg.true_prior_treatment);
        let specs: [(&str, &str, f64, Vec<f64>); 6] = [
            ("rct", CONTROL_ARM, tc, collect(&|r| Some(r.rct_control))),
            ("rct", TREATMENT_ARM, tt, collect(&|r| Some(r.rct_treatment))),
            ("segmental", CONTROL_ARM, tc, collect(&|r| r.segmental_control)),
            ("segmental", TREATMENT_ARM, tt, collect(&|r| r.segmental_treatment)),
            ("parametric", CONTROL_ARM, tc, collect(&|r| r.parametric_control)),
            ("parametric", TREATMENT_ARM, tt, collect(&|r| r.parametric_treatment)),
        ];
        let estimators = specs.iter().filter_map(|(e, a, t, v)| EstimatorSummary::from_values(e, a, *t, v)).collect();
        let coverage = |lo: fn(&ReplicateRow) -> Option<f64>, hi: fn(&ReplicateRow) -> Option<f64>, truth: f64| {
            let hits: Vec<bool> = rows.iter().filter_map(|r| Some(lo(r)? <= truth && truth <= hi(r)?)).collect();
            (!hits.is_empty()).then(|| hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64)
        };
        ComparisonSummary {
            replicates: rows.len(),
            failures: rows.iter().filter(|r| r.failure.is_some()).count(),
            estimators,
            coverage_control: coverage(|r| r.ci_control_lo, |r| r.ci_control_hi, tc),
            coverage_treatment: coverage(|r| r.ci_treatment_lo, |r| r.ci_treatment_hi, tt),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub config: SimConfig,
    pub rows: Vec<ReplicateRow>,
    pub summary: ComparisonSummary,
}

impl ComparisonReport {
    pub fn rows_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::InvalidInput(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn run_replicate(cfg: &SimConfig, index: usize) -> Result<ReplicateRow> {
    let data = generate_trial(cfg, index as u64)?;
    let control = ArmSet::single(Arm::new(CONTROL_ARM)?);
    let treatment = ArmSet::single(Arm::new(TREATMENT_ARM)?);
    let rct_control = data.arm_counts(&control).proportion().unwrap_or(0.0);
    let rct_treatment = data.arm_counts(&treatment).proportion().unwrap_or(0.0);
    let mut row = ReplicateRow {
        replicate: index,
        rct_control,
        rct_treatment,
        rct_odds_ratio: odds_ratio(rct_control, rct_treatment),
        segmental_control: None,
        segmental_treatment: None,
        segmental_odds_ratio: None,
        parametric_control: None,
        parametric_treatment: None,
        parametric_odds_ratio: None,
        ci_control_lo: None,
        ci_control_hi: None,
        ci_treatment_lo: None,
        ci_treatment_hi: None,
        failure: None,
    };
    let rule = SegmentRule::threshold_split(cfg.threshold, control.clone(), treatment.clone())?;
    let mut failures = vec![];
    match identified_priors(&data, &rule, cfg.threshold) {
        Ok((lik, priors)) => {
            let (c, t) = (priors[0].prior_probability, priors[1].prior_probability);
            row.segmental_control = Some(c);
            row.segmental_treatment = Some(t);
            row.segmental_odds_ratio = odds_ratio(c, t);
            if cfg.bootstrap_replicates > 0 {
                let seed = rng::substream(cfg.seed, index as u64, 1).random::<u64>();
                let src = LikelihoodSource::Dichotomous(lik);
                let groups = [control.clone(), treatment.clone()];
                match bootstrap_prior_cis(&data, &rule, &src, &groups, cfg.bootstrap_replicates, cfg.level, seed) {
                    Ok(cis) => {
                        row.ci_control_lo = Some(cis[0].lo);
                        row.ci_control_hi = Some(cis[0].hi);
                        row.ci_treatment_lo = Some(cis[1].lo);
                        row.ci_treatment_hi = Some(cis[1].hi);
                    }
                    Err(e) => failures.push(format!("bootstrap: {e}")),
                }
            }
        }
        Err(e) => failures.push(format!("segmental: {e}")),
    }
    match parametric_priors(&data, &rule, cfg.threshold) {
        Ok((_, priors)) => {
            let (c, t) = (priors[0].prior_probability, priors[1].prior_probability);
            row.parametric_control = Some(c);
            row.parametric_treatment = Some(t);
            row.parametric_odds_ratio = odds_ratio(c, t);
        }
        Err(e) => failures.push(format!("parametric: {e}")),
    }
    if !failures.is_empty() {
        row.failure = Some(failures.join("; "));
    }
    Ok(row)
}

/// Generates `cfg.replicates` trials and compares segmental estimates with
/// the full-trial proportions. Replicates run in parallel; rows come back in
/// replicate order so the report does not depend on scheduling.
pub fn run_comparison(cfg: &SimConfig) -> Result<ComparisonReport> {
    cfg.validate()?;
    Samplers::new(cfg)?;
    let rows = (0..cfg.replicates).into_par_iter().map(|i| run_replicate(cfg, i)).collect::<Result<Vec<_>>>()?;
    let failed = rows.iter().filter(|r| r.failure.is_some()).count();
    if failed as f64 > MAX_FAILURE_FRACTION * rows.len() as f64 {
        return Err(Error::Instability { skipped: failed, total: rows.len() });
    }
    let summary = ComparisonSummary::from_rows(cfg, &rows);
    Ok(ComparisonReport { config: cfg.clone(), rows, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub threshold: f64,
    pub events: u64,
    pub non_events: u64,
    pub model: OutcomeModel,
    pub likelihoods: DichotomousLikelihoods,
    pub control: PosteriorCurve,
    pub treatment: PosteriorCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSkip {
    pub threshold: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    pub skipped: Vec<SweepSkip>,
}

/// Point-likelihood model fitted to the segmental subjects, identified
/// priors, and one posterior curve per segment group.
pub fn segmental_curves(
    data: &TrialDataset,
    rule: &SegmentRule,
    split: f64,
    grid: &Grid,
) -> Result<(OutcomeModel, DichotomousLikelihoods, Vec<PosteriorCurve>)> {
    let model = OutcomeModel::fit(&apply_segment_filter(data, rule)?)?;
    let (lik, priors) = identified_priors(data, rule, split)?;
    let curves = priors.iter().map(|p| posterior_curve(&model, p, grid)).collect::<Result<Vec<_>>>()?;
    Ok((model, lik, curves))
}

/// Repeats the segmental analysis with the outcome redefined as
/// `outcome_value > t` for each `t`. A threshold leaving fewer than two
/// subjects in an outcome stratum is skipped and reported.
pub fn sweep_outcome_threshold(
    data: &TrialDataset,
    thresholds: &[f64],
    rule: &SegmentRule,
    split: f64,
    grid: &Grid,
) -> Result<SweepResult> {
    if !data.has_records() || data.records.iter().any(|r| r.outcome_value.is_none()) {
        return Err(Error::InsufficientData("sweep needs subject records with outcome values".into()));
    }
    let mut out = SweepResult::default();
    for &t in thresholds {
        let relabelled = data.relabel_outcomes(t)?;
        let seg = apply_segment_filter(&relabelled, rule)?;
        let events = seg.records.iter().filter(|r| r.outcome).count() as u64;
        let non_events = seg.records.len() as u64 - events;
        match segmental_curves(&relabelled, rule, split, grid) {
            Ok((model, likelihoods, mut curves)) if curves.len() == 2 => {
                let treatment = curves.pop().expect("two curves");
                let control = curves.pop().expect("two curves");
                out.entries.push(SweepEntry {
                    threshold: t,
                    events,
                    non_events,
                    model,
                    likelihoods,
                    control,
                    treatment,
                });
            }
            Ok(_) => out.skipped.push(SweepSkip { threshold: t, reason: "rule must have two segments".into() }),
            Err(e) => out.skipped.push(SweepSkip { threshold: t, reason: e.to_string() }),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irma2;

    pub(crate) fn irma2_config(n: u64, replicates: usize) -> SimConfig {
        SimConfig {
            n_control: n,
            n_treatment: n,
            true_prior_control: 0.153,
            true_prior_treatment: 0.077,
            model: irma2::published_segmental_model(),
            eligibility_range: (20.0, 200.0),
            threshold: 80.0,
            replicates,
            seed: 42,
            outcome_value: None,
            outcome_threshold: 200.0,
            bootstrap_replicates: 0,
            level: 0.95,
        }
    }

    #[test]
    fn degenerate_quota() {
        let mut cfg = irma2_config(0, 1);
        cfg.n_control = 1;
        cfg.true_prior_control = 0.0;
        let d = generate_trial(&cfg, 0).unwrap();
        assert_eq!(d.records.len(), 1);
        assert!(!d.records[0].outcome);
        cfg.n_control = 0;
        assert!(matches!(generate_trial(&cfg, 0), Err(Error::Config { .. })));
    }

    #[test]
    fn generation_is_deterministic_and_consistent() {
        let cfg = irma2_config(500, 1);
        let a = generate_trial(&cfg, 3).unwrap();
        let b = generate_trial(&cfg, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_trial(&cfg, 4).unwrap());
        for r in &a.records {
            assert!((20.0..=200.0).contains(&r.baseline));
            assert_eq!(r.outcome, r.outcome_value.unwrap() > 200.0);
        }
    }

    #[test]
    fn config_errors_name_fields() {
        let mut cfg = irma2_config(10, 1);
        cfg.true_prior_control = 1.5;
        match cfg.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "true_prior_control"),
            other => panic!("{other:?}"),
        }
        let mut cfg = irma2_config(10, 1);
        cfg.threshold = 250.0;
        assert!(matches!(cfg.validate(), Err(Error::Config { field, .. }) if field == "threshold"));
        let mut cfg = irma2_config(10, 1);
        cfg.model.with_outcome.mu = 40.0;
        assert!(matches!(generate_trial(&cfg, 0), Err(Error::Config { field, .. }) if field == "model.with"));
    }

    #[test]
    fn single_replicate_summary_equals_row() {
        let cfg = irma2_config(300, 1);
        let rep = run_comparison(&cfg).unwrap();
        assert_eq!(rep.rows.len(), 1);
        let row = &rep.rows[0];
        let s = rep.summary.get("segmental", CONTROL_ARM).unwrap();
        assert_eq!(Some(s.mean), row.segmental_control);
        assert_eq!(s.sd, 0.0);
        assert_eq!(rep.summary.get("rct", TREATMENT_ARM).unwrap().mean, row.rct_treatment);
        assert_eq!(ComparisonSummary::from_rows(&cfg, &rep.rows), rep.summary);
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let cfg = irma2_config(10, 2);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(SimConfig::from_json(&text).unwrap(), cfg);
        let v = cfg.value_model();
        assert!((v.mu - (4.54 + 2f64.ln())).abs() < 1e-12 && v.sigma == 0.42);
        assert!(SimConfig::from_json("{\"n_control\": 1}").is_err());
    }
}
