//! Run settings merged from an optional JSON file and the command line.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use spectral_shell::bench::{BenchmarkCase, CaseId, StudyMode};
use spectral_shell::element::Formulation;
use spectral_shell::geometry::Scenario;
use spectral_shell::solver::SolverConfig;

/// Contents of `--config`. Every field is optional; flags override them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    /// Built-in case name or path to a case JSON file.
    pub case: Option<String>,
    pub order: Option<usize>,
    pub mesh: Option<[usize; 2]>,
    pub orders: Option<Vec<usize>>,
    pub meshes: Option<Vec<[usize; 2]>>,
    pub mode: Option<StudyMode>,
    pub scenario: Option<Scenario>,
    pub formulation: Option<Formulation>,
    pub out: Option<PathBuf>,
    pub solver: Option<SolverConfig>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Resolves a built-in name or a JSON file path.
pub fn resolve_case(spec: &str) -> Result<BenchmarkCase> {
    if let Ok(id) = spec.parse::<CaseId>() {
        return Ok(BenchmarkCase::builtin(id));
    }
    let path = Path::new(spec);
    if path.exists() {
        return BenchmarkCase::load(path).with_context(|| format!("loading case {spec}"));
    }
    bail!("unknown case `{spec}`: not a built-in name (scordelis, hemisphere, freeform, freeform-nurbs) or an existing file")
}

/// Parses `NxM` (or a single `N` for `NxN`).
pub fn parse_mesh(s: &str) -> Result<[usize; 2], String> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad mesh `{s}` (expected NxM)"));
    let m = match parts.as_slice() {
        [n] => [num(n)?; 2],
        [a, b] => [num(a)?, num(b)?],
        _ => return Err(format!("bad mesh `{s}` (expected NxM)")),
    };
    if m[0] == 0 || m[1] == 0 {
        return Err(format!("bad mesh `{s}`: counts must be positive"));
    }
    Ok(m)
}

pub fn parse_mode(s: &str) -> Result<StudyMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "p" | "p-refine" => Ok(StudyMode::PRefine),
        "h" | "h-refine" => Ok(StudyMode::HRefine),
        other => Err(format!("unknown study mode `{other}` (expected p or h)")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meshes() {
        assert_eq!(parse_mesh("3x2").unwrap(), [3, 2]);
        assert_eq!(parse_mesh("4").unwrap(), [4, 4]);
        assert!(parse_mesh("0x1").is_err());
        assert!(parse_mesh("2x2x2").is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"odrer": 4}"#).is_err());
        let c: FileConfig = serde_json::from_str(r#"{"order": 4, "solver": {"load_steps": 2}}"#).unwrap();
        assert_eq!(c.solver.unwrap().load_steps, 2);
    }
}
