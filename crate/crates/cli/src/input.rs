use std::path::Path;

use serde::de::DeserializeOwned;

use segmental_core::irma2;
use segmental_core::trial_data::{parse_dataset, CsvFormat, DatasetMeta, TrialDataset};

use crate::fail::{CliError, CONFIG, PARSE};
use crate::{Builtin, DataArgs};

pub struct Loaded {
    pub data: TrialDataset,
    pub builtin: Option<Builtin>,
    pub inputs: Vec<String>,
}

/// Comma-separated reals, exactly `n` of them.
pub fn parse_list(flag: &str, text: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let parts: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match parts {
        Ok(v) if v.len() == n && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(CliError::new(CONFIG, format!("--{flag} expects {n} comma-separated numbers, got {text:?}"))),
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::new(PARSE, format!("{}: {e}", path.display())))
}

pub fn load(args: &DataArgs) -> Result<Loaded, CliError> {
    if let Some(b) = args.builtin {
        return Ok(match b {
            Builtin::Irma2 => {
                Loaded { data: irma2::builtin_irma2(), builtin: Some(b), inputs: vec!["builtin:irma2".into()] }
            }
        });
    }
    let path = args.data.as_ref().expect("clap requires --data or --builtin");
    let text = read_text(path)?;
    let first = text.lines().next().unwrap_or("").trim();
    let format = if first.starts_with("lo,") { CsvFormat::Bin } else { CsvFormat::Subject };
    let eligibility = match &args.eligibility {
        Some(s) => {
            let v = parse_list("eligibility", s, 2)?;
            (v[0], v[1])
        }
        None => (0.0, f64::INFINITY),
    };
    let meta = DatasetMeta {
        eligibility,
        outcome_threshold: args.outcome_threshold,
        control: args.control.clone(),
        arms: None,
        name: path.file_stem().map(|s| s.to_string_lossy().into_owned()),
    };
    let data = parse_dataset(&text, format, &meta)?;
    Ok(Loaded { data, builtin: None, inputs: vec![path.display().to_string()] })
}
