use std::path::Path;

use anyhow::{Context, Result};
use mpnc_core::dynamics::Trajectory;
use mpnc_core::{RunParams, Scenario, SplitState};
use serde::Serialize;

pub fn build_id() -> String {
    format!("mpnc {} ({})", env!("CARGO_PKG_VERSION"), env!("MPNC_GIT_DESCRIBE"))
}

/// `(flow index, path index)` in column order: flows by id, paths in order.
fn split_columns(scn: &Scenario) -> Vec<(usize, usize)> {
    let mut flows: Vec<usize> = (0..scn.flows.len()).collect();
    flows.sort_by_key(|&i| scn.flows[i].id);
    flows
        .into_iter()
        .flat_map(|i| (0..scn.flows[i].paths.len()).map(move |p| (i, p)))
        .collect()
}

pub fn trajectory_header(scn: &Scenario) -> Vec<String> {
    let mut header = vec!["t".to_string()];
    header.extend(
        split_columns(scn)
            .into_iter()
            .map(|(i, p)| format!("x_{}_{}", scn.flows[i].id, p + 1)),
    );
    header.extend((1..=scn.hyperlinks.len()).map(|h| format!("y_{h}")));
    header.extend(["cost_exact", "cost_smoothed", "wardrop_gap"].map(String::from));
    header
}

pub struct Row<'a> {
    pub t: f64,
    pub x: &'a SplitState,
    /// `None` for methods without capacities (cells left empty).
    pub y: Option<&'a [f64]>,
    pub cost_exact: f64,
    pub cost_smoothed: f64,
    pub wardrop_gap: f64,
}

pub fn write_trajectory<'a>(path: &Path, scn: &Scenario, rows: impl IntoIterator<Item = Row<'a>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(trajectory_header(scn))?;
    let columns = split_columns(scn);
    for row in rows {
        let mut rec = vec![row.t.to_string()];
        rec.extend(columns.iter().map(|&(i, p)| row.x.get(i, p).to_string()));
        match row.y {
            Some(y) => rec.extend(y.iter().map(|v| v.to_string())),
            None => rec.extend(std::iter::repeat(String::new()).take(scn.hyperlinks.len())),
        }
        rec.extend([row.cost_exact, row.cost_smoothed, row.wardrop_gap].map(|v| v.to_string()));
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn trajectory_rows(traj: &Trajectory) -> impl Iterator<Item = Row<'_>> {
    traj.records.iter().map(|r| Row {
        t: r.t,
        x: &r.x,
        y: (!r.y.is_empty()).then_some(r.y.as_slice()),
        cost_exact: r.cost_exact,
        cost_smoothed: r.cost_smoothed,
        wardrop_gap: r.wardrop_gap,
    })
}

#[derive(Serialize)]
pub struct ScenarioInfo {
    pub source: String,
    pub sha256: String,
    pub flow_ids: Vec<usize>,
}

#[derive(Serialize)]
pub struct FinalState {
    pub cost_exact: f64,
    pub cost_smoothed: f64,
    pub wardrop_gap: f64,
    /// Indexed like the scenario's flows (see `flow_ids`), paths in order.
    pub x: Vec<Vec<f64>>,
    pub y: Option<Vec<f64>>,
}

#[derive(Serialize)]
pub struct Summary {
    pub method: String,
    pub scenario: ScenarioInfo,
    pub params: RunParams,
    pub build: String,
    pub converged: bool,
    pub tol: f64,
    #[serde(rename = "final")]
    pub final_state: FinalState,
    /// Exact cost at the end of the schedule, before settling.
    pub schedule_cost_exact: Option<f64>,
    pub iterations: usize,
    /// Large steps in which a flow ran out of integration steps.
    pub truncated_phases: Option<usize>,
    pub lp_residual: Option<f64>,
    pub seconds: f64,
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}
