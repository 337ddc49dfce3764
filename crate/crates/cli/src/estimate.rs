use serde::Serialize;

use segmental_core::bayes::{effect_summary, estimate_all_priors, EffectSummary, LikelihoodSource, PriorEstimate};
use segmental_core::irma2::{self, LikelihoodTable};
use segmental_core::likelihood::{
    empirical_dichotomous, identify_shared_likelihoods, GaussianParams, OutcomeModel, Side, TailAreas,
};
use segmental_core::trial_data::{apply_segment_filter, ArmSet, SegmentRule, TrialDataset};
use segmental_core::validation::{bootstrap_prior_cis, IntervalEstimate};

use crate::fail::{CliError, CONFIG};
use crate::input::{load, parse_list, read_json};
use crate::output::{csv, emit, fmt3, fmt3_opt, table, to_json, OutDir};
use crate::{EstimateArgs, Format, LikelihoodArg, MethodArg};

#[derive(Serialize)]
struct EstimateOutput<'a> {
    method: MethodArg,
    threshold: f64,
    likelihoods: &'a LikelihoodSource,
    priors: &'a [PriorEstimate],
    effects: &'a [EffectSummary],
    #[serde(skip_serializing_if = "Option::is_none")]
    intervals: Option<&'a [IntervalEstimate]>,
    notes: &'a [String],
}

fn groups_for(data: &TrialDataset, builtin: bool) -> Result<Vec<ArmSet>, CliError> {
    if builtin {
        return Ok(irma2::report_groups());
    }
    let treated = data.treatment_arms().ok_or_else(|| {
        CliError::new(crate::fail::INSUFFICIENT, "both arms required: the dataset has only the control arm")
    })?;
    let mut groups = vec![ArmSet::single(data.control.clone()), treated.clone()];
    if treated.iter().count() > 1 {
        groups.extend(treated.iter().map(|a| ArmSet::single(a.clone())));
    }
    Ok(groups)
}

/// Lower-tail area of the outcome stratum at `t` under each parameter set.
fn tail_note(t: f64) -> String {
    let area = |mu: f64, sigma: f64| GaussianParams { mu, sigma, n: 0 }.cdf(t.ln());
    let tab = irma2::published_segmental_model().with_outcome;
    let (qmu, qsd) = irma2::TEXT_OUTCOME_PARAMS;
    format!(
        "outcome-stratum area below {t}: stated {:.3}; tabulated parameters ({:.2}, {:.2}) give {:.3}; quoted parameters ({qmu:.2}, {qsd:.3}) give {:.3}",
        irma2::stated_tail_areas().below_with,
        tab.mu,
        tab.sigma,
        area(tab.mu, tab.sigma),
        area(qmu, qsd)
    )
}

fn source_for(
    args: &EstimateArgs,
    data: &TrialDataset,
    rule: &SegmentRule,
    t: f64,
    builtin: bool,
    notes: &mut Vec<String>,
) -> Result<LikelihoodSource, CliError> {
    match args.method {
        MethodArg::Count => {
            let which = args.likelihoods.unwrap_or(if builtin && t == irma2::SEGMENT_THRESHOLD {
                LikelihoodArg::Published
            } else {
                LikelihoodArg::Shared
            });
            let lik = match which {
                LikelihoodArg::Published => {
                    if !(builtin && t == irma2::SEGMENT_THRESHOLD) {
                        return Err(CliError::new(
                            CONFIG,
                            "--likelihoods published is only available for --builtin irma2 at threshold 80",
                        ));
                    }
                    irma2::published_likelihoods(LikelihoodTable::Segmental)
                }
                LikelihoodArg::Shared => identify_shared_likelihoods(data, rule, t)?,
                LikelihoodArg::Pooled => empirical_dichotomous(data, t)?,
            };
            let counts = lik.counts.map_or(String::new(), |c| {
                format!(" ({}/{} and {}/{})", c.events_high, c.events_total, c.nonevents_high, c.nonevents_total)
            });
            notes.push(format!(
                "P(above {t} | outcome) = {:.3}, P(above {t} | no outcome) = {:.3}{counts}",
                lik.p_high_given_outcome, lik.p_high_given_no_outcome
            ));
            Ok(LikelihoodSource::Dichotomous(lik))
        }
        MethodArg::Tail => {
            let areas = if let Some(s) = &args.tail_areas {
                let v = parse_list("tail-areas", s, 2)?;
                TailAreas { threshold: t, below_with: v[0], below_without: v[1] }
            } else {
                let model: OutcomeModel = match (&args.model, builtin) {
                    (Some(p), _) => read_json(p)?,
                    (None, true) => irma2::published_segmental_model(),
                    (None, false) => OutcomeModel::fit(&apply_segment_filter(data, rule)?)?,
                };
                TailAreas::from_model(&model, t)?
            };
            notes.push(format!(
                "areas below {t}: outcome {:.3}, no outcome {:.3}; ratios below {:.3}, above {:.3}",
                areas.below_with,
                areas.below_without,
                areas.ratio(Side::Below)?,
                areas.ratio(Side::Above)?
            ));
            if builtin {
                notes.push(tail_note(t));
            }
            Ok(LikelihoodSource::Tail(areas))
        }
    }
}

fn segment_label(p: &PriorEstimate) -> String {
    match p.segment {
        Some(s) if s.lo <= 0.0 => format!("<={}", s.hi),
        Some(s) if s.hi.is_infinite() => format!(">{}", s.lo),
        Some(s) => format!("({},{}]", s.lo, s.hi),
        None => "-".into(),
    }
}

pub fn run(args: &EstimateArgs) -> Result<(), CliError> {
    let loaded = load(&args.data)?;
    let builtin = loaded.builtin.is_some();
    let data = loaded.data;
    let t = args
        .threshold
        .or(builtin.then_some(irma2::SEGMENT_THRESHOLD))
        .ok_or_else(|| CliError::new(CONFIG, "--threshold is required"))?;
    let rule = if builtin { irma2::segmental_rule(t) } else { SegmentRule::standard(&data, t)? };
    let groups = groups_for(&data, builtin)?;
    // surface boundary problems before anything else
    for s in rule.segments() {
        data.counts_in(&s.range, &s.arms)?;
    }

    let mut notes = vec![];
    let source = source_for(args, &data, &rule, t, builtin, &mut notes)?;
    let priors = estimate_all_priors(&data, &rule, &source, &groups)?;
    for p in priors.iter().filter(|p| p.degenerate) {
        notes.push(format!("{}: no events in segment, prior set to 0", p.group));
    }
    let control = priors.iter().find(|p| p.control).unwrap_or(&priors[0]);
    let effects =
        priors.iter().filter(|p| !p.control).map(|p| effect_summary(control, p)).collect::<Result<Vec<_>, _>>()?;
    let intervals = if args.bootstrap > 0 {
        Some(bootstrap_prior_cis(&data, &rule, &source, &groups, args.bootstrap, args.level, args.seed)?)
    } else {
        None
    };

    let mut headers =
        vec!["group", "segment", "events", "non_events", "cond_odds", "lr", "prior_odds", "prior_p", "observed_p"];
    if intervals.is_some() {
        headers.extend(["ci_lo", "ci_hi"]);
    }
    let rows: Vec<Vec<String>> = priors
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut r = vec![
                p.group.clone(),
                segment_label(p),
                p.events.to_string(),
                p.non_events.to_string(),
                fmt3(p.conditional_odds),
                fmt3(p.likelihood_ratio),
                fmt3(p.prior_odds),
                fmt3(p.prior_probability),
                fmt3_opt(p.observed_probability()),
            ];
            if let Some(iv) = &intervals {
                r.push(fmt3(iv[i].lo));
                r.push(fmt3(iv[i].hi));
            }
            r
        })
        .collect();

    let output = EstimateOutput {
        method: args.method,
        threshold: t,
        likelihoods: &source,
        priors: &priors,
        effects: &effects,
        intervals: intervals.as_deref(),
        notes: &notes,
    };
    match args.common.format {
        Format::Table => {
            let mut text = table(&headers, &rows);
            for e in &effects {
                text.push_str(&format!(
                    "{} vs {}: relative risk {}, odds ratio {}",
                    e.prior_treatment.group,
                    e.prior_control.group,
                    fmt3(e.relative_risk),
                    fmt3(e.odds_ratio)
                ));
                if let (Some(c), Some(tr)) =
                    (e.prior_control.observed_probability(), e.prior_treatment.observed_probability())
                {
                    let or = (tr / (1.0 - tr)) / (c / (1.0 - c));
                    text.push_str(&format!(" (observed: relative risk {}, odds ratio {})", fmt3(tr / c), fmt3(or)));
                }
                text.push('\n');
            }
            for n in &notes {
                text.push_str(&format!("note: {n}\n"));
            }
            emit(&text)
        }
        Format::Json => emit(&to_json(&output)),
        Format::Csv => emit(&csv(&headers, &rows)),
    }

    let mut dir = OutDir::new(args.common.out.as_deref())?;
    dir.write("priors.json", &to_json(&priors))?;
    dir.write("estimate.json", &to_json(&output))?;
    dir.finish("estimate", &loaded.inputs, args, (args.bootstrap > 0).then_some(args.seed))
}
