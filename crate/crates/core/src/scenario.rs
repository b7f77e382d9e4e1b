//! On-disk scenario schema and built-in scenarios.
//!
//! A scenario file is UTF-8 JSON:
//!
//! ```json
//! {
//!   "nodes": ["n1", "n2", "n3"],
//!   "links": [{"from": "n1", "to": "n2", "cost": 2.8}],
//!   "symmetric": true,
//!   "flows": [{"id": 1, "src": "n1", "dst": "n3", "load": 4.73,
//!              "paths": [["n1", "n2", "n3"]]}],
//!   "hyperlinks": "auto",
//!   "params": {"r": -100.0, "kappa": 0.5, "eta": 0.05, "step": 1.0,
//!              "n_small": 20, "n_large": 50}
//! }
//! ```
//!
//! `hyperlinks` is either the string `"auto"` or a list of
//! `{"node": .., "side_a": {"flow": id, "path": k}, "side_b": {..}}` where
//! `path` is the 1-based index into the flow's path list.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub from: NodeId,
    pub to: NodeId,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub id: usize,
    pub src: NodeId,
    pub dst: NodeId,
    pub load: f64,
    pub paths: Vec<Vec<NodeId>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SideRef {
    /// Flow id as declared in `flows`.
    pub flow: usize,
    /// 1-based path index.
    pub path: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperLinkDecl {
    pub node: NodeId,
    pub side_a: SideRef,
    pub side_b: SideRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoTag {
    #[serde(rename = "auto")]
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperLinkSpec {
    Auto(AutoTag),
    Explicit(Vec<HyperLinkDecl>),
}

impl Default for HyperLinkSpec {
    fn default() -> Self {
        HyperLinkSpec::Auto(AutoTag::Auto)
    }
}

/// Numeric run parameters carried by a scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunParams {
    pub r: f64,
    pub kappa: f64,
    pub eta: f64,
    pub step: f64,
    pub n_small: usize,
    pub n_large: usize,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            r: -100.0,
            kappa: 0.5,
            eta: 0.05,
            step: 1.0,
            n_small: 20,
            n_large: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkSpec>,
    #[serde(default)]
    pub symmetric: bool,
    pub flows: Vec<FlowSpec>,
    #[serde(default)]
    pub hyperlinks: HyperLinkSpec,
    #[serde(default)]
    pub params: RunParams,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// The three-flow, eight-node reverse-carpooling example: loads 4.73,
    /// 2.69, 3.56 and symmetric link costs.
    pub fn fig2() -> Self {
        let n = |k: u32| format!("n{k}");
        let link = |a: u32, b: u32, cost: f64| LinkSpec {
            from: n(a),
            to: n(b),
            cost,
        };
        let path = |seq: &[u32]| seq.iter().map(|&k| n(k)).collect::<Vec<_>>();
        ScenarioConfig {
            nodes: (1..=8).map(n).collect(),
            links: vec![
                link(1, 2, 2.8),
                link(2, 3, 1.6),
                link(3, 4, 1.8),
                link(2, 5, 1.3),
                link(5, 4, 2.1),
                link(2, 6, 1.7),
                link(4, 8, 2.9),
                link(8, 6, 2.2),
                link(5, 7, 1.9),
                link(7, 1, 2.6),
            ],
            symmetric: true,
            flows: vec![
                FlowSpec {
                    id: 1,
                    src: n(1),
                    dst: n(4),
                    load: 4.73,
                    paths: vec![path(&[1, 2, 3, 4]), path(&[1, 2, 5, 4])],
                },
                FlowSpec {
                    id: 2,
                    src: n(4),
                    dst: n(6),
                    load: 2.69,
                    paths: vec![path(&[4, 3, 2, 6]), path(&[4, 8, 6])],
                },
                FlowSpec {
                    id: 3,
                    src: n(5),
                    dst: n(1),
                    load: 3.56,
                    paths: vec![path(&[5, 7, 1]), path(&[5, 2, 1])],
                },
            ],
            hyperlinks: HyperLinkSpec::default(),
            params: RunParams::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperlinks_field_accepts_auto_and_lists() {
        let auto: HyperLinkSpec = serde_json::from_str("\"auto\"").unwrap();
        assert_eq!(auto, HyperLinkSpec::default());
        let explicit: HyperLinkSpec = serde_json::from_str(
            r#"[{"node":"n2","side_a":{"flow":1,"path":2},"side_b":{"flow":3,"path":2}}]"#,
        )
        .unwrap();
        match explicit {
            HyperLinkSpec::Explicit(v) => assert_eq!(v[0].side_b, SideRef { flow: 3, path: 2 }),
            other => panic!("unexpected {other:?}"),
        }
        assert!(serde_json::from_str::<HyperLinkSpec>("\"manual\"").is_err());
    }

    #[test]
    fn params_default_when_omitted() {
        let cfg = ScenarioConfig::from_json(
            r#"{"nodes":["a","b"],"links":[{"from":"a","to":"b","cost":1}],
                "flows":[{"id":1,"src":"a","dst":"b","load":1,"paths":[["a","b"]]}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.params, RunParams::default());
        assert!(!cfg.symmetric);
    }

    #[test]
    fn fig2_round_trips() {
        let cfg = ScenarioConfig::fig2();
        let back = ScenarioConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }
}
