use std::path::Path;

use slicer_core::SimulationConfig;

use crate::CliError;

/// One named simulation setup run over a list of seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub config: SimulationConfig,
    pub seeds: Vec<u64>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.seeds.is_empty() {
            return Err(CliError::Usage(format!("{}: empty seed list", self.name)));
        }
        let stem_ok = !self.name.is_empty()
            && self
                .name
                .chars()
                .all(|ch| ch.is_ascii_alphanumeric() || matches!(ch, '-' | '_' | '.'))
            && !self.name.starts_with('.');
        if !stem_ok {
            return Err(CliError::Usage(format!(
                "{:?} is not a valid file stem",
                self.name
            )));
        }
        self.config.validate()?;
        Ok(())
    }
}

/// Parses flat `key=value` text. `#` starts a comment; blank lines are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "line {}: expected key=value, got {line:?}",
                lineno + 1
            ))
        })?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

/// Applies `pairs` in order; later keys win.
pub fn apply_overrides(
    config: &mut SimulationConfig,
    pairs: &[(String, String)],
) -> Result<(), CliError> {
    for (k, v) in pairs {
        config.set(k, v)?;
    }
    Ok(())
}
