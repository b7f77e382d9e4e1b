use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use mpnc_core::baselines::{
    compare_report, oracle_wardrop, run_coupled_from, run_dd_from, run_no_coding_from, solve_optimal, Comparison,
    Method, MethodOutcome,
};
use mpnc_core::cost::{finite_diff_check, smoothed_total_cost, GradCheck};
use mpnc_core::dynamics::params_from;
use mpnc_core::generate::{random_scenario, random_state};
use mpnc_core::{ScenarioConfig, SmoothingParams, SystemState};
use serde::Serialize;

use crate::output::{self, build_id, FinalState, Row, ScenarioInfo, Summary};
use crate::source::{self, Invalid, Loaded, Unreadable};
use crate::{MethodArg, ParamArgs, RandomKind, SourceArgs};

/// Central differences are not attempted for sharper smoothing than this.
pub const GRADCHECK_MIN_R: f64 = -20.0;

/// LP solutions with a larger constraint violation are reported as failed.
const LP_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Invalid = 1,
    Unreadable = 2,
    Check = 3,
    Failure = 4,
}

impl Exit {
    pub fn of_error(e: &anyhow::Error) -> Exit {
        for cause in e.chain() {
            if cause.is::<Unreadable>() {
                return Exit::Unreadable;
            }
            if cause.is::<Invalid>() {
                return Exit::Invalid;
            }
            if let Some(core) = cause.downcast_ref::<mpnc_core::Error>() {
                return match core {
                    mpnc_core::Error::Invalid(_) => Exit::Invalid,
                    mpnc_core::Error::Json(_) => Exit::Unreadable,
                    _ => Exit::Failure,
                };
            }
        }
        Exit::Failure
    }
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> Self {
        ExitCode::from(e as u8)
    }
}

pub fn validate(file: &Path) -> Result<Exit> {
    let (config, _) = source::read_config(file)?;
    let violations = mpnc_core::topology::validate(&config);
    if !violations.is_empty() {
        println!("{}: {} violation(s)", file.display(), violations.len());
        for v in &violations {
            println!("  - {v}");
        }
        return Ok(Exit::Invalid);
    }
    let scn = source::build(&config)?;
    println!(
        "{}: ok ({} nodes, {} links, {} flows, {} paths, {} hyper-links)",
        file.display(),
        scn.network.nodes().len(),
        scn.network.links().len(),
        scn.flows.len(),
        scn.num_paths(),
        scn.hyperlinks.len()
    );
    for h in &scn.hyperlinks {
        println!(
            "  y_{} at {}: flow {} path {} <-> flow {} path {}",
            h.id + 1,
            h.coding_node,
            scn.flows[h.side_a.flow].id,
            h.side_a.path + 1,
            scn.flows[h.side_b.flow].id,
            h.side_b.path + 1
        );
    }
    Ok(Exit::Ok)
}

fn read_init(path: &Path) -> Result<SystemState> {
    let text = std::fs::read_to_string(path).map_err(|e| Unreadable(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Unreadable(format!("cannot parse {}: {e}", path.display())).into())
}

fn info(loaded: &Loaded) -> ScenarioInfo {
    ScenarioInfo {
        source: loaded.label.clone(),
        sha256: loaded.sha256.clone(),
        flow_ids: loaded.scenario.flows.iter().map(|f| f.id).collect(),
    }
}

pub fn run(method: MethodArg, src: &SourceArgs, params: &ParamArgs, init: Option<&Path>, out: &Path) -> Result<Exit> {
    let loaded = source::load(src, params)?;
    let scn = &loaded.scenario;
    let (sp, bnn, ctrl) = params_from(&loaded.config.params)?;
    let init = init.map(read_init).transpose()?;
    if let Some(st) = &init {
        st.x.check(scn).context("initial state")?;
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let methods: Vec<Method> = match method {
        MethodArg::Dd => vec![Method::Dd],
        MethodArg::Cd => vec![Method::Cd],
        MethodArg::Nocoding => vec![Method::NoCoding],
        MethodArg::Oracle => vec![Method::Oracle],
        MethodArg::All => Method::ALL.to_vec(),
    };
    let mut exit = Exit::Ok;
    for m in methods {
        let start = Instant::now();
        let csv_path = out.join(format!("{m}_trajectory.csv"));
        let summary = if m == Method::Oracle {
            let sol = solve_optimal(scn)?;
            let seconds = start.elapsed().as_secs_f64();
            let state = SystemState {
                x: sol.x.clone(),
                y: sol.y.clone(),
            };
            let smoothed = smoothed_total_cost(&state, scn, &sp);
            let gap = oracle_wardrop(&sol, scn, &sp, ctrl.equilibrium_tol).wardrop_gap;
            output::write_trajectory(
                &csv_path,
                scn,
                [Row {
                    t: 0.0,
                    x: &sol.x,
                    y: Some(&sol.y.0),
                    cost_exact: sol.cost,
                    cost_smoothed: smoothed,
                    wardrop_gap: gap,
                }],
            )?;
            Summary {
                method: m.to_string(),
                scenario: info(&loaded),
                params: loaded.config.params,
                build: build_id(),
                converged: sol.residual <= LP_RESIDUAL_TOL,
                tol: LP_RESIDUAL_TOL,
                final_state: FinalState {
                    cost_exact: sol.cost,
                    cost_smoothed: smoothed,
                    wardrop_gap: gap,
                    x: sol.x.0.clone(),
                    y: Some(sol.y.0.clone()),
                },
                schedule_cost_exact: None,
                iterations: sol.iterations,
                truncated_phases: None,
                lp_residual: Some(sol.residual),
                seconds,
            }
        } else {
            let o: MethodOutcome = match m {
                Method::Dd => run_dd_from(scn, &sp, &bnn, &ctrl, init.as_ref())?,
                Method::Cd => run_coupled_from(scn, &sp, &bnn, &ctrl, init.as_ref().map(|s| &s.x))?,
                _ => run_no_coding_from(scn, &bnn, &ctrl, init.as_ref().map(|s| &s.x))?,
            };
            let seconds = start.elapsed().as_secs_f64();
            output::write_trajectory(&csv_path, scn, output::trajectory_rows(&o.trajectory))?;
            Summary {
                method: m.to_string(),
                scenario: info(&loaded),
                params: loaded.config.params,
                build: build_id(),
                converged: o.wardrop_gap <= ctrl.equilibrium_tol,
                tol: ctrl.equilibrium_tol,
                final_state: FinalState {
                    cost_exact: o.cost_exact,
                    cost_smoothed: o.cost_smoothed,
                    wardrop_gap: o.wardrop_gap,
                    x: o.x.0.clone(),
                    y: o.y.as_ref().map(|y| y.0.clone()),
                },
                schedule_cost_exact: Some(o.schedule_cost_exact),
                iterations: o.iterations,
                truncated_phases: Some(o.trajectory.phases.iter().filter(|p| p.truncated).count()),
                lp_residual: None,
                seconds,
            }
        };
        output::write_json(&out.join(format!("{m}_summary.json")), &summary)?;
        println!(
            "{m}: cost {} gap {:.3e} iterations {} ({:.3} s){}",
            summary.final_state.cost_exact,
            summary.final_state.wardrop_gap,
            summary.iterations,
            summary.seconds,
            if summary.converged { "" } else { " NOT CONVERGED" }
        );
        if !summary.converged {
            exit = Exit::Check;
        }
    }
    Ok(exit)
}

#[derive(Serialize)]
struct GradReport {
    scenario: ScenarioInfo,
    r: f64,
    states: usize,
    step: f64,
    tol: f64,
    skipped: bool,
    max_rel_err_x: Option<f64>,
    max_rel_err_y: Option<f64>,
    passed: bool,
}

pub fn gradcheck(src: &SourceArgs, r: f64, states: usize, step: f64, tol: f64, out: Option<&Path>) -> Result<Exit> {
    let loaded = source::load(src, &ParamArgs::default())?;
    let scn = &loaded.scenario;
    let mut report = GradReport {
        scenario: info(&loaded),
        r,
        states,
        step,
        tol,
        skipped: true,
        max_rel_err_x: None,
        max_rel_err_y: None,
        passed: true,
    };
    if r < GRADCHECK_MIN_R {
        let _ = SmoothingParams::new(r)?;
        println!("skipped: central differences are unreliable for r < {GRADCHECK_MIN_R} (got r = {r})");
    } else {
        let sp = SmoothingParams::new(r)?;
        let mut worst = GradCheck {
            max_rel_err_x: 0.0,
            max_rel_err_y: 0.0,
        };
        for seed in 0..states as u64 {
            let g = finite_diff_check(&random_state(scn, seed), scn, &sp, step);
            worst.max_rel_err_x = worst.max_rel_err_x.max(g.max_rel_err_x);
            worst.max_rel_err_y = worst.max_rel_err_y.max(g.max_rel_err_y);
        }
        report.skipped = false;
        report.max_rel_err_x = Some(worst.max_rel_err_x);
        report.max_rel_err_y = Some(worst.max_rel_err_y);
        report.passed = worst.max() <= tol;
        println!(
            "r = {r}, {states} states: payoff max rel err {:.3e}, capacity gradient max rel err {:.3e}: {}",
            worst.max_rel_err_x,
            worst.max_rel_err_y,
            if report.passed { "PASS" } else { "FAIL" }
        );
    }
    if let Some(path) = out {
        output::write_json(path, &report)?;
    }
    Ok(if report.passed { Exit::Ok } else { Exit::Check })
}

#[derive(Serialize)]
struct CompareFile<'a> {
    scenario: ScenarioInfo,
    params: mpnc_core::RunParams,
    build: String,
    comparison: &'a Comparison,
}

pub fn compare(src: &SourceArgs, params: &ParamArgs, out: Option<&Path>) -> Result<Exit> {
    let loaded = source::load(src, params)?;
    let scn = &loaded.scenario;
    let (sp, bnn, ctrl) = params_from(&loaded.config.params)?;
    let start = Instant::now();
    let cmp = compare_report(scn, &sp, &bnn, &ctrl)?;
    let total = start.elapsed().as_secs_f64();
    println!("{:<10} {:>14} {:>12} {:>11} {:>9}", "method", "cost_exact", "wardrop_gap", "iterations", "seconds");
    for row in &cmp.rows {
        println!(
            "{:<10} {:>14.6} {:>12.3e} {:>11} {:>9.3}",
            row.method.to_string(),
            row.cost_exact,
            row.wardrop_gap,
            row.iterations,
            row.seconds
        );
    }
    let o = &cmp.ordering;
    let mark = |b: bool| if b { "ok" } else { "VIOLATED" };
    println!(
        "ordering: oracle <= dd {}, oracle <= cd {}, dd <= nocoding {}, cd <= nocoding {}; dd <= cd {} (informational)",
        mark(o.oracle_le_dd),
        mark(o.oracle_le_cd),
        mark(o.dd_le_nocoding),
        mark(o.cd_le_nocoding),
        mark(o.dd_le_cd)
    );
    println!("runtime {total:.3} s");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut w = csv::Writer::from_path(dir.join("comparison.csv"))?;
        w.write_record(["method", "cost_exact", "wardrop_gap", "iterations", "seconds"])?;
        for row in &cmp.rows {
            w.write_record([
                row.method.to_string(),
                row.cost_exact.to_string(),
                row.wardrop_gap.to_string(),
                row.iterations.to_string(),
                row.seconds.to_string(),
            ])?;
        }
        w.flush()?;
        output::write_json(
            &dir.join("comparison.json"),
            &CompareFile {
                scenario: info(&loaded),
                params: loaded.config.params,
                build: build_id(),
                comparison: &cmp,
            },
        )?;
    }
    Ok(if o.passed() { Exit::Ok } else { Exit::Check })
}

fn emit(config: &ScenarioConfig, out: Option<&Path>) -> Result<Exit> {
    let text = config.to_json()? + "\n";
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(Exit::Ok)
}

pub fn fig2(out: Option<&Path>) -> Result<Exit> {
    emit(&ScenarioConfig::fig2(), out)
}

pub fn generate(kind: RandomKind, seed: u64, out: Option<&Path>) -> Result<Exit> {
    emit(&random_scenario(&source::generator(kind), seed)?, out)
}
