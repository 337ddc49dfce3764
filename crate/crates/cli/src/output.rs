use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::fail::CliError;

pub fn fmt3(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.3}")
    } else {
        v.to_string()
    }
}

pub fn fmt3_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), fmt3)
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable output");
    s.push('\n');
    s
}

/// Left-aligned first column, right-aligned rest.
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<String>| -> String {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| if i == 0 { format!("{c:<w$}", w = width[i]) } else { format!("{c:>w$}", w = width[i]) })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = line(headers.iter().map(|s| s.to_string()).collect());
    out.push('\n');
    out.push_str(&"-".repeat(width.iter().sum::<usize>() + 2 * (width.len().saturating_sub(1))));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.clone()));
        out.push('\n');
    }
    out
}

/// Plain CSV; fields here never contain separators or quotes.
pub fn csv(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = headers.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    inputs: &'a [String],
    parameters: serde_json::Value,
    versions: BTreeMap<&'static str, &'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    outputs: &'a [String],
}

/// Collects files written under an output directory and finishes with a
/// manifest listing them.
pub struct OutDir {
    dir: Option<PathBuf>,
    written: Vec<String>,
}

impl OutDir {
    pub fn new(dir: Option<&Path>) -> Result<Self, CliError> {
        if let Some(d) = dir {
            std::fs::create_dir_all(d).map_err(|e| CliError::write(d, e))?;
        }
        Ok(OutDir { dir: dir.map(Path::to_path_buf), written: vec![] })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::write(&path, e))?;
        self.written.push(path.display().to_string());
        Ok(())
    }

    pub fn finish<P: Serialize>(
        self,
        command: &str,
        inputs: &[String],
        params: &P,
        seed: Option<u64>,
    ) -> Result<(), CliError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let manifest = Manifest {
            command,
            inputs,
            parameters: serde_json::to_value(params).expect("serialisable flags"),
            versions: BTreeMap::from([
                ("segmental-cli", env!("CARGO_PKG_VERSION")),
                ("segmental-core", segmental_core::VERSION),
            ]),
            seed,
            outputs: &self.written,
        };
        let path = dir.join("manifest.json");
        std::fs::write(&path, to_json(&manifest)).map_err(|e| CliError::write(&path, e))
    }
}

/// Prints `text` for the requested format.
pub fn emit(text: &str) {
    print!("{text}");
}
