use std::path::Path;

use anyhow::{Context, Result};
use mpnc_core::generate::{random_scenario, GeneratorParams};
use mpnc_core::{Scenario, ScenarioConfig};
use sha2::{Digest, Sha256};

use crate::{ParamArgs, RandomKind, SourceArgs};

/// Input that could not be read or parsed (exit 2).
#[derive(Debug)]
pub struct Unreadable(pub String);

impl std::fmt::Display for Unreadable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Unreadable {}

/// Structurally invalid scenario (exit 1).
#[derive(Debug)]
pub struct Invalid(pub Vec<String>);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid scenario ({} violation(s))", self.0.len())?;
        for v in &self.0 {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Invalid {}

pub struct Loaded {
    pub config: ScenarioConfig,
    pub scenario: Scenario,
    /// File path, `builtin:fig2` or `random:<kind>:<seed>`.
    pub label: String,
    /// SHA-256 of the file bytes, or of the serialized scenario.
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn generator(kind: RandomKind) -> GeneratorParams {
    match kind {
        RandomKind::Small => GeneratorParams::small(),
        RandomKind::Thirty => GeneratorParams::thirty_node(),
    }
}

pub fn read_config(path: &Path) -> Result<(ScenarioConfig, String)> {
    let bytes = std::fs::read(path).map_err(|e| Unreadable(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| Unreadable(format!("{} is not UTF-8", path.display())))?;
    let config =
        ScenarioConfig::from_json(text).map_err(|e| Unreadable(format!("cannot parse {}: {e}", path.display())))?;
    Ok((config, sha256_hex(&bytes)))
}

pub fn build(config: &ScenarioConfig) -> Result<Scenario> {
    let violations = mpnc_core::topology::validate(config);
    if !violations.is_empty() {
        return Err(Invalid(violations.iter().map(|v| v.to_string()).collect()).into());
    }
    Scenario::from_config(config).context("building scenario")
}

pub fn load(src: &SourceArgs, params: &ParamArgs) -> Result<Loaded> {
    let (mut config, label, sha256) = match (&src.scenario, src.random) {
        (Some(path), _) => {
            let (config, sha) = read_config(path)?;
            (config, path.display().to_string(), sha)
        }
        (None, Some(kind)) => {
            let config = random_scenario(&generator(kind), src.seed)?;
            let sha = sha256_hex(config.to_json()?.as_bytes());
            let name = match kind {
                RandomKind::Small => "small",
                RandomKind::Thirty => "thirty",
            };
            (config, format!("random:{name}:{}", src.seed), sha)
        }
        (None, None) => {
            let config = ScenarioConfig::fig2();
            let sha = sha256_hex(config.to_json()?.as_bytes());
            (config, "builtin:fig2".to_string(), sha)
        }
    };
    let p = &mut config.params;
    p.r = params.r.unwrap_or(p.r);
    p.kappa = params.kappa.unwrap_or(p.kappa);
    p.eta = params.eta.unwrap_or(p.eta);
    p.step = params.step.unwrap_or(p.step);
    p.n_large = params.steps_large.unwrap_or(p.n_large);
    p.n_small = params.steps_small.unwrap_or(p.n_small);
    let scenario = build(&config)?;
    Ok(Loaded {
        config,
        scenario,
        label,
        sha256,
    })
}
