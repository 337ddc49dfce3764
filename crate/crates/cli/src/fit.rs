use serde::Serialize;

use segmental_core::irma2;
use segmental_core::likelihood::{check_intervention_independence, IndependenceReport, OutcomeModel, Stratum};
use segmental_core::trial_data::{
    apply_segment_filter, reconstruct_records_from_bins, ReconstructionStrategy, SegmentRule, TrialDataset,
};

use crate::fail::{CliError, INSUFFICIENT};
use crate::input::{load, read_json};
use crate::output::{csv, emit, fmt3, fmt3_opt, table, to_json, OutDir};
use crate::{FitArgs, Format, Reconstruct};

#[derive(Serialize)]
struct FitOutput<'a> {
    model: &'a OutcomeModel,
    fitted_on: &'a str,
    independence: &'a IndependenceReport,
}

/// Subject records for fitting, expanding bins when asked to.
fn with_records(args: &FitArgs, data: TrialDataset, builtin: bool) -> Result<TrialDataset, CliError> {
    if data.bins.is_empty() {
        return Ok(data);
    }
    let Some(how) = args.reconstruct else {
        return Err(CliError::new(
            INSUFFICIENT,
            "dataset has aggregate bins only; pass --reconstruct midpoint|model-conditional",
        ));
    };
    let midpoint = reconstruct_records_from_bins(&data.bins, &ReconstructionStrategy::Midpoint);
    let strategy = match how {
        Reconstruct::Midpoint => ReconstructionStrategy::Midpoint,
        Reconstruct::ModelConditional => {
            let model = match (&args.model, builtin) {
                (Some(p), _) => read_json(p)?,
                (None, true) => irma2::published_segmental_model(),
                // two passes: fit at midpoints, then draw from that fit
                (None, false) => OutcomeModel::fit(&replace_bins(&data, midpoint.clone())?)?,
            };
            ReconstructionStrategy::ModelConditional { model, seed: args.seed }
        }
    };
    let records = match strategy {
        ReconstructionStrategy::Midpoint => midpoint,
        ref s => reconstruct_records_from_bins(&data.bins, s),
    };
    replace_bins(&data, records)
}

fn replace_bins(
    data: &TrialDataset,
    mut records: Vec<segmental_core::trial_data::SubjectRecord>,
) -> Result<TrialDataset, CliError> {
    let mut all = data.records.clone();
    all.append(&mut records);
    Ok(TrialDataset::new(
        data.name.clone(),
        all,
        vec![],
        data.eligibility,
        data.outcome_threshold,
        data.control.clone(),
    )?)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn run(args: &FitArgs) -> Result<(), CliError> {
    let loaded = load(&args.data)?;
    let builtin = loaded.builtin.is_some();
    let data = with_records(args, loaded.data, builtin)?;
    if data.treatment_arms().is_none() {
        return Err(CliError::new(INSUFFICIENT, "both arms required: the dataset has only the control arm"));
    }
    let threshold =
        if args.all_subjects { None } else { args.threshold.or(builtin.then_some(irma2::SEGMENT_THRESHOLD)) };

    let (fit_data, fitted_on) = match threshold {
        Some(t) => {
            let rule = if builtin { irma2::segmental_rule(t) } else { SegmentRule::standard(&data, t)? };
            (apply_segment_filter(&data, &rule)?, "segmental")
        }
        None => (data.clone(), "all"),
    };
    let model = OutcomeModel::fit(&fit_data)?;
    let split = threshold.unwrap_or_else(|| median(data.records.iter().map(|r| r.baseline).collect()));
    let independence = check_intervention_independence(&data, split)?;

    let out = FitOutput { model: &model, fitted_on, independence: &independence };
    let headers = ["group", "stratum", "n", "mean ln", "sd ln", "above", "p_above"];
    let mut rows: Vec<Vec<String>> = vec![];
    for (label, g) in [("segmental outcome", model.with_outcome), ("segmental no outcome", model.without_outcome)] {
        let label = if fitted_on == "all" { label.replace("segmental", "all") } else { label.to_string() };
        rows.push(vec![label, "-".into(), g.n.to_string(), fmt3(g.mu), fmt3(g.sigma), "-".into(), "-".into()]);
    }
    for s in &independence.strata {
        let stratum = match s.stratum {
            Stratum::Outcome => "outcome",
            Stratum::NoOutcome => "no outcome",
        };
        rows.push(vec![
            s.group.clone(),
            stratum.into(),
            s.total.to_string(),
            fmt3_opt(s.params.map(|p| p.mu)),
            fmt3_opt(s.params.map(|p| p.sigma)),
            s.high.to_string(),
            fmt3_opt(s.p_high),
        ]);
    }

    match args.common.format {
        Format::Table => {
            let mut text = table(&headers, &rows);
            text.push_str(&format!(
                "split {} | max gap: mu {} sigma {} p_above {}\n",
                fmt3(split),
                fmt3_opt(independence.max_mu_gap),
                fmt3_opt(independence.max_sigma_gap),
                fmt3_opt(independence.max_likelihood_gap)
            ));
            emit(&text)
        }
        Format::Json => emit(&to_json(&out)),
        Format::Csv => emit(&csv(&headers, &rows)),
    }

    let mut dir = OutDir::new(args.common.out.as_deref())?;
    dir.write("model.json", &to_json(&model))?;
    dir.write("independence.json", &to_json(&independence))?;
    dir.finish("fit", &loaded.inputs, args, Some(args.seed))
}
