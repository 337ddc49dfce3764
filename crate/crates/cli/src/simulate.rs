use segmental_core::simulator::{run_comparison, SimConfig};

use crate::fail::CliError;
use crate::input::read_text;
use crate::output::{csv, emit, fmt3, fmt3_opt, table, to_json, OutDir};
use crate::{Format, SimulateArgs};

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let mut cfg = SimConfig::from_json(&read_text(&args.config)?)?;
    if let Some(r) = args.replicates {
        cfg.replicates = r;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let report = run_comparison(&cfg)?;
    let s = &report.summary;

    let headers = ["estimator", "arm", "truth", "n", "mean", "bias", "sd", "rmse", "mc_se"];
    let rows: Vec<Vec<String>> = s
        .estimators
        .iter()
        .map(|e| {
            vec![
                e.estimator.clone(),
                e.arm.clone(),
                fmt3(e.truth),
                e.n.to_string(),
                fmt3(e.mean),
                fmt3(e.bias),
                fmt3(e.sd),
                fmt3(e.rmse),
                fmt3(e.mc_se),
            ]
        })
        .collect();
    match args.format {
        Format::Table => {
            let mut text = table(&headers, &rows);
            text.push_str(&format!(
                "replicates {} | failures {} | interval coverage: control {}, treatment {}\n",
                s.replicates,
                s.failures,
                fmt3_opt(s.coverage_control),
                fmt3_opt(s.coverage_treatment)
            ));
            emit(&text)
        }
        Format::Json => emit(&to_json(s)),
        Format::Csv => emit(&csv(&headers, &rows)),
    }

    let mut dir = OutDir::new(Some(&args.out))?;
    dir.write("report.json", &to_json(&report))?;
    dir.write("replicates.csv", &report.rows_csv()?)?;
    dir.finish("simulate", &[args.config.display().to_string()], args, Some(cfg.seed))
}
