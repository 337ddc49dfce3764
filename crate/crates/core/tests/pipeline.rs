use approx::assert_abs_diff_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use segmental_core::bayes::{effect_summary, posterior_curve, Grid, Method, PriorEstimate};
use segmental_core::irma2;
use segmental_core::likelihood::{check_intervention_independence, fit_log_gaussian, GaussianParams, OutcomeModel};
use segmental_core::simulator::{
    generate_trial, identified_priors, segmental_curves, sweep_outcome_threshold, SimConfig, CONTROL_ARM, TREATMENT_ARM,
};
use segmental_core::trial_data::{
    reconstruct_records_from_bins, Arm, ArmSet, Counts, ReconstructionStrategy, SegmentRule, TrialDataset,
};
use segmental_core::validation::calibration_check;
use segmental_core::Error;

fn config(n: u64, pc: f64, pt: f64, seed: u64) -> SimConfig {
    SimConfig {
        n_control: n,
        n_treatment: n,
        true_prior_control: pc,
        true_prior_treatment: pt,
        model: irma2::published_segmental_model(),
        eligibility_range: (20.0, 200.0),
        threshold: 80.0,
        replicates: 1,
        seed,
        outcome_value: None,
        outcome_threshold: 200.0,
        bootstrap_replicates: 0,
        level: 0.95,
    }
}

fn rule() -> SegmentRule {
    SegmentRule::threshold_split(
        80.0,
        ArmSet::single(Arm::new(CONTROL_ARM).unwrap()),
        ArmSet::single(Arm::new(TREATMENT_ARM).unwrap()),
    )
    .unwrap()
}

fn density(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Composite Simpson rule with 4000 panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let n = 4000;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn mass(g: GaussianParams, lo: f64, hi: f64) -> f64 {
    simpson(|x| density(x, g.mu, g.sigma), lo.ln(), hi.ln())
}

/// Mean and variance of ln(value) for `g` truncated to `(lo, hi]`.
fn truncated_moments(g: GaussianParams, lo: f64, hi: f64) -> (f64, f64) {
    let m = mass(g, lo, hi);
    let (a, b) = (lo.ln(), hi.ln());
    let mean = simpson(|x| x * density(x, g.mu, g.sigma), a, b) / m;
    let var = simpson(|x| (x - mean).powi(2) * density(x, g.mu, g.sigma), a, b) / m;
    (mean, var)
}

fn prior_with_probability(group: &str, p: f64) -> PriorEstimate {
    PriorEstimate {
        group: group.into(),
        control: true,
        method: Method::Observed,
        segment: None,
        side: None,
        events: 0,
        non_events: 0,
        conditional_odds: p / (1.0 - p),
        likelihood_ratio: 1.0,
        prior_odds: p / (1.0 - p),
        prior_probability: p,
        degenerate: false,
        observed: None,
    }
}

/// Bin shares and event rates against the truncated model, cell by cell at
/// 3 standard errors. Forty cells from one draw would give a family-wise
/// false alarm about one time in ten, so counts are pooled over ten
/// independent trials of 100,000 per arm.
#[test]
fn generated_bins_match_truncated_model() {
    let n = 100_000u64;
    let trials = 10;
    let cfg = config(n, 0.153, 0.077, 11);
    let m = cfg.model;
    let (m1, m0) = (mass(m.with_outcome, 20.0, 200.0), mass(m.without_outcome, 20.0, 200.0));
    for (label, p) in [(CONTROL_ARM, cfg.true_prior_control), (TREATMENT_ARM, cfg.true_prior_treatment)] {
        let arm = Arm::new(label).unwrap();
        let mut pooled = vec![Counts::default(); irma2::BIN_EDGES.len() - 1];
        for i in 0..trials {
            let data = generate_trial(&cfg, i).unwrap();
            let bins = segmental_core::trial_data::bin_counts(&data, &irma2::BIN_EDGES, &arm).unwrap();
            for (c, b) in pooled.iter_mut().zip(&bins) {
                *c += Counts { events: b.events, total: b.total };
            }
        }
        let total = (n * trials) as f64;
        for (c, w) in pooled.iter().zip(irma2::BIN_EDGES.windows(2)) {
            let (lo, hi) = (w[0], w[1]);
            let with = p * mass(m.with_outcome, lo, hi) / m1;
            let share = with + (1.0 - p) * mass(m.without_outcome, lo, hi) / m0;
            let rate = with / share;
            let observed_share = c.total as f64 / total;
            let se_share = (share * (1.0 - share) / total).sqrt();
            assert!(
                (observed_share - share).abs() < 3.0 * se_share,
                "{label} ({lo}, {hi}]: share {observed_share} vs {share}"
            );
            let observed_rate = c.events as f64 / c.total as f64;
            let se_rate = (rate * (1.0 - rate) / (total * share)).sqrt();
            assert!(
                (observed_rate - rate).abs() < 3.0 * se_rate,
                "{label} ({lo}, {hi}]: rate {observed_rate} vs {rate}"
            );
        }
    }
}

#[test]
fn model_conditional_draws_match_truncated_means() {
    let data = irma2::builtin_irma2();
    let placebo: Vec<_> = data.bins.iter().filter(|b| b.arm.label() == irma2::PLACEBO).cloned().collect();
    let model = irma2::published_segmental_model();
    let records = reconstruct_records_from_bins(&placebo, &ReconstructionStrategy::ModelConditional { model, seed: 7 });
    assert_eq!(records.len(), 196);
    for b in &placebo {
        for outcome in [true, false] {
            let xs: Vec<f64> = records
                .iter()
                .filter(|r| r.outcome == outcome && r.baseline > b.lo && r.baseline <= b.hi)
                .map(|r| r.baseline.ln())
                .collect();
            let expected = if outcome { b.events } else { b.total - b.events };
            assert_eq!(xs.len() as u64, expected);
            if xs.is_empty() {
                continue;
            }
            let g = if outcome { model.with_outcome } else { model.without_outcome };
            let (mean, var) = truncated_moments(g, b.lo, b.hi);
            let se = (var / xs.len() as f64).sqrt();
            let got = xs.iter().sum::<f64>() / xs.len() as f64;
            assert!((got - mean).abs() < 3.0 * se, "bin ({}, {}] outcome {outcome}: {got} vs {mean}", b.lo, b.hi);
        }
    }
}

#[test]
fn fit_recovers_gaussian_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let normal = Normal::<f64>::new(3.65, 0.91).unwrap();
    let values: Vec<f64> = (0..100_000).map(|_| normal.sample(&mut rng).exp()).collect();
    let g = fit_log_gaussian(&values).unwrap();
    assert_abs_diff_eq!(g.mu, 3.65, epsilon = 0.01);
    assert_abs_diff_eq!(g.sigma, 0.91, epsilon = 0.01);
}

#[test]
fn simulated_trials_satisfy_independence() {
    let data = generate_trial(&config(10_000, 0.153, 0.077, 5), 0).unwrap();
    let report = check_intervention_independence(&data, 80.0).unwrap();
    assert!(report.max_mu_gap.unwrap() < 0.05, "{:?}", report.max_mu_gap);
    assert!(report.max_likelihood_gap.unwrap() < 0.03, "{:?}", report.max_likelihood_gap);
}

#[test]
fn fitted_strata_converge_to_truncated_generator() {
    let cfg = config(50_000, 0.153, 0.077, 9);
    let data = generate_trial(&cfg, 0).unwrap();
    let report = check_intervention_independence(&data, 80.0).unwrap();
    assert!(report.max_mu_gap.unwrap() < 0.02, "{:?}", report.max_mu_gap);
    for s in &report.strata {
        let g = match s.stratum {
            segmental_core::likelihood::Stratum::Outcome => cfg.model.with_outcome,
            segmental_core::likelihood::Stratum::NoOutcome => cfg.model.without_outcome,
        };
        let (mean, _) = truncated_moments(g, 20.0, 200.0);
        let fitted = s.params.unwrap().mu;
        assert!((fitted - mean).abs() < 0.02, "{} {:?}: {fitted} vs {mean}", s.group, s.stratum);
    }
}

#[test]
fn identified_priors_recover_known_truth() {
    let data = generate_trial(&config(20_000, 0.15, 0.08, 21), 0).unwrap();
    let (_, priors) = identified_priors(&data, &rule(), 80.0).unwrap();
    assert_abs_diff_eq!(priors[0].prior_probability, 0.15, epsilon = 0.01);
    assert_abs_diff_eq!(priors[1].prior_probability, 0.08, epsilon = 0.01);
}

/// The rearranged prior carries the sampling error of the identified
/// likelihoods as well as the segment counts, so its spread around the
/// full-trial proportion exceeds the binomial standard error (about 2.4x for
/// the control arm at this size). Agreement is checked as zero mean
/// difference across trials.
#[test]
fn rearranged_priors_match_full_trial_counts() {
    let trials = 200;
    let mut diffs = [vec![], vec![]];
    let mut within = [0, 0];
    for i in 0..trials {
        let data = generate_trial(&config(20_000, 0.153, 0.077, 500), i).unwrap();
        let (_, priors) = identified_priors(&data, &rule(), 80.0).unwrap();
        for (k, p) in priors.iter().enumerate() {
            let q = p.observed.unwrap().proportion().unwrap();
            let se = (q * (1.0 - q) / 20_000.0).sqrt();
            diffs[k].push(p.prior_probability - q);
            within[k] += ((p.prior_probability - q).abs() < 3.0 * se) as usize;
        }
    }
    for (k, d) in diffs.iter().enumerate() {
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        println!("arm {k}: mean difference {mean:.5}, sd {sd:.5}, within 3 binomial SE in {}/{trials}", within[k]);
        assert!(mean.abs() < 3.0 * sd / n.sqrt(), "arm {k}: mean difference {mean} (sd {sd})");
    }
}

#[test]
fn sweep_at_native_threshold_is_the_standard_pipeline() {
    let data = generate_trial(&config(5_000, 0.153, 0.077, 31), 0).unwrap();
    let grid = Grid::new(20.0, 200.0, 1.0).unwrap();
    let (model, lik, curves) = segmental_curves(&data, &rule(), 80.0, &grid).unwrap();
    let sweep = sweep_outcome_threshold(&data, &[200.0], &rule(), 80.0, &grid).unwrap();
    assert!(sweep.skipped.is_empty());
    let e = &sweep.entries[0];
    assert_eq!(e.model, model);
    assert_eq!(e.likelihoods, lik);
    assert_eq!(e.control, curves[0]);
    assert_eq!(e.treatment, curves[1]);
}

#[test]
fn sweep_priors_fall_as_outcome_threshold_rises() {
    let data = generate_trial(&config(20_000, 0.153, 0.077, 41), 0).unwrap();
    let grid = Grid::new(20.0, 200.0, 1.0).unwrap();
    let thresholds = [100.0, 150.0, 200.0, 250.0, 300.0, 350.0];
    let sweep = sweep_outcome_threshold(&data, &thresholds, &rule(), 80.0, &grid).unwrap();
    assert!(sweep.skipped.is_empty(), "{:?}", sweep.skipped);
    for w in sweep.entries.windows(2) {
        for (a, b) in [(&w[0].control, &w[1].control), (&w[0].treatment, &w[1].treatment)] {
            assert!(
                b.prior.prior_probability < a.prior.prior_probability,
                "{} at {} -> {}: {} then {}",
                a.group,
                w[0].threshold,
                w[1].threshold,
                a.prior.prior_probability,
                b.prior.prior_probability
            );
        }
    }
    // direct counts of the relabelled outcome fall in step
    let direct = |t: f64, label: &str| {
        let arms = ArmSet::single(Arm::new(label).unwrap());
        data.relabel_outcomes(t).unwrap().arm_counts(&arms).proportion().unwrap()
    };
    for w in thresholds.windows(2) {
        for label in [CONTROL_ARM, TREATMENT_ARM] {
            assert!(direct(w[1], label) < direct(w[0], label));
        }
    }
    // at the native threshold the rearranged priors track the direct counts
    let native = sweep.entries.iter().find(|e| e.threshold == 200.0).unwrap();
    assert_abs_diff_eq!(native.control.prior.prior_probability, direct(200.0, CONTROL_ARM), epsilon = 0.01);
    assert_abs_diff_eq!(native.treatment.prior.prior_probability, direct(200.0, TREATMENT_ARM), epsilon = 0.01);
}

#[test]
fn sweep_needs_outcome_values() {
    let data = irma2::builtin_irma2();
    let grid = Grid::new(20.0, 200.0, 1.0).unwrap();
    let err = sweep_outcome_threshold(&data, &[200.0], &irma2::segmental_rule(80.0), 80.0, &grid).unwrap_err();
    assert!(matches!(err, Error::InsufficientData(_)));
}

/// The generator truncates each stratum to the eligibility range
/// separately, so the untruncated generating densities are not the densities
/// of the eligible population. The curve is built from the model fitted to
/// the drawn records with the sample prevalence as its prior.
#[test]
fn calibration_on_generating_model() {
    let mut cfg = config(50_000, 0.153, 0.077, 51);
    cfg.n_treatment = 1;
    let data = generate_trial(&cfg, 0).unwrap();
    let control: Vec<_> = data.records.iter().filter(|r| r.arm.label() == CONTROL_ARM).cloned().collect();
    let fitted =
        TrialDataset::new("control", control.clone(), vec![], (20.0, 200.0), None, Arm::new(CONTROL_ARM).unwrap())
            .unwrap();
    let model = OutcomeModel::fit(&fitted).unwrap();
    let p = control.iter().filter(|r| r.outcome).count() as f64 / control.len() as f64;
    let grid = Grid::new(20.0, 200.0, 1.0).unwrap();
    let curve = posterior_curve(&model, &prior_with_probability(CONTROL_ARM, p), &grid).unwrap();
    let report = calibration_check(&curve, &control).unwrap();
    assert_eq!(report.n, 50_000);
    assert!(report.delta.abs() < 0.01, "{report:?}");
}

#[test]
fn calibration_error_shrinks_with_n() {
    // components well inside (20, 200] so truncation is negligible
    let model = OutcomeModel {
        with_outcome: GaussianParams::new(60f64.ln(), 0.2, 0).unwrap(),
        without_outcome: GaussianParams::new(50f64.ln(), 0.2, 0).unwrap(),
    };
    let p = 0.2;
    let grid = Grid::new(20.0, 200.0, 0.5).unwrap();
    let curve = posterior_curve(&model, &prior_with_probability("g", p), &grid).unwrap();
    let mut rms = vec![];
    for n in [1_000u64, 10_000, 100_000] {
        let mut ss = 0.0;
        for seed in 0..8 {
            let mut cfg = config(n, p, 0.1, 1000 + seed);
            cfg.model = model;
            cfg.n_treatment = 1;
            let data = generate_trial(&cfg, 0).unwrap();
            let control: Vec<_> = data.records.iter().filter(|r| r.arm.label() == CONTROL_ARM).cloned().collect();
            ss += calibration_check(&curve, &control).unwrap().delta.powi(2);
        }
        rms.push((ss / 8.0).sqrt());
    }
    assert!(rms[0] > rms[1] && rms[1] > rms[2], "{rms:?}");
    assert!(rms[2] < 0.002, "{rms:?}");
}

#[test]
fn full_trial_odds_ratio_from_counts() {
    let c = PriorEstimate::from_observed("placebo", true, Counts { events: 30, total: 196 }).unwrap();
    let t = PriorEstimate::from_observed("irbesartan", false, Counts { events: 29, total: 379 }).unwrap();
    let e = effect_summary(&c, &t).unwrap();
    assert_abs_diff_eq!(e.odds_ratio, 0.459, epsilon = 0.001);
}

#[test]
fn bins_only_dataset_is_not_subject_level() {
    let data = irma2::builtin_irma2();
    assert!(!data.has_records());
    assert!(OutcomeModel::fit(&data).is_err());
}
