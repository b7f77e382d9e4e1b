//! Comparison systems: coupled dynamics, no coding, and the exact optimum.
//!
//! Every dynamic method runs the same schedule (`n_large * n_small` small time
//! units of BNN) and is then settled to a Wardrop equilibrium of its own
//! payoffs, so methods are compared at equilibrium rather than at whatever
//! residual mass the schedule leaves on dominated paths.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cost::{
    coupled_exact_cost, exact_total_cost, rebate_grad_y, smoothed_total_cost, CapacityState, SmoothingParams,
    SplitState, SystemState,
};
use crate::dynamics::{
    equilibrate, run_decoupled, run_population, stationarity_gap, wardrop_check, BnnParams, ControllerParams,
    Coupled, Decoupled, EquilibriumReport, PayoffModel, Trajectory, Uncoded,
};
use crate::error::{Error, Result};
use crate::simplex::{Cmp, LinearProgram};
use crate::topology::{HyperLink, Scenario};

/// Gap at which terminal settling stops.
pub const SETTLE_TOL: f64 = 1e-9;
/// Upper bound on settling sweeps.
pub const SETTLE_SWEEPS: usize = 200_000;
/// Ordering checks allow this much slack.
pub const ORDER_SLACK: f64 = 1e-6;
/// The grid verifier refuses larger instances.
pub const GRID_MAX_PATHS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dd,
    Cd,
    NoCoding,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Oracle, Method::Dd, Method::Cd, Method::NoCoding];

    pub fn name(self) -> &'static str {
        match self {
            Method::Dd => "dd",
            Method::Cd => "cd",
            Method::NoCoding => "nocoding",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown method {s:?}")))
    }
}

/// Final state of one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub x: SplitState,
    /// Capacities, for methods that have them.
    pub y: Option<CapacityState>,
    pub cost_exact: f64,
    /// The method's own smoothed potential at the final state.
    pub cost_smoothed: f64,
    /// Exact cost at the end of the schedule, before settling.
    pub schedule_cost_exact: f64,
    pub wardrop_gap: f64,
    /// Small time units plus settling steps, or simplex pivots.
    pub iterations: usize,
    #[serde(skip)]
    pub trajectory: Trajectory,
}

fn total_units(bnn: &BnnParams, ctrl: &ControllerParams) -> usize {
    bnn.n_small * ctrl.n_large
}

fn population_method(
    method: Method,
    model: &impl PayoffModel,
    scn: &Scenario,
    bnn: &BnnParams,
    ctrl: &ControllerParams,
    init: Option<&SplitState>,
) -> Result<MethodOutcome> {
    bnn.validate()?;
    let loads = scn.loads();
    let init = init.cloned().unwrap_or_else(|| SplitState::uniform(scn));
    init.check(scn)?;
    let units = total_units(bnn, ctrl);
    let (x, trajectory) = run_population(model, &init, &loads, bnn, units)?;
    let schedule_cost_exact = model.exact_cost(&x);
    let settled = equilibrate(&x, model, &loads, SETTLE_TOL, SETTLE_SWEEPS)?;
    Ok(MethodOutcome {
        method,
        cost_exact: model.exact_cost(&settled.x),
        cost_smoothed: model.potential(&settled.x),
        schedule_cost_exact,
        wardrop_gap: settled.gap,
        iterations: units + settled.steps,
        x: settled.x,
        y: None,
        trajectory,
    })
}

/// BNN with payoffs equal to the path base costs.
pub fn run_no_coding(scn: &Scenario, bnn: &BnnParams, ctrl: &ControllerParams) -> Result<MethodOutcome> {
    run_no_coding_from(scn, bnn, ctrl, None)
}

/// [`run_no_coding`] from a given split instead of the uniform one.
pub fn run_no_coding_from(
    scn: &Scenario,
    bnn: &BnnParams,
    ctrl: &ControllerParams,
    init: Option<&SplitState>,
) -> Result<MethodOutcome> {
    population_method(Method::NoCoding, &Uncoded { scn }, scn, bnn, ctrl, init)
}

/// BNN on the smoothed coupled cost, with the same `r` as the decoupled run.
pub fn run_coupled(scn: &Scenario, sp: &SmoothingParams, bnn: &BnnParams, ctrl: &ControllerParams) -> Result<MethodOutcome> {
    run_coupled_from(scn, sp, bnn, ctrl, None)
}

/// [`run_coupled`] from a given split instead of the uniform one.
pub fn run_coupled_from(
    scn: &Scenario,
    sp: &SmoothingParams,
    bnn: &BnnParams,
    ctrl: &ControllerParams,
    init: Option<&SplitState>,
) -> Result<MethodOutcome> {
    population_method(Method::Cd, &Coupled { scn, sp: *sp }, scn, bnn, ctrl, init)
}

/// Two-timescale decoupled dynamics, settled at the final capacities.
pub fn run_dd(scn: &Scenario, sp: &SmoothingParams, bnn: &BnnParams, ctrl: &ControllerParams) -> Result<MethodOutcome> {
    run_dd_from(scn, sp, bnn, ctrl, None)
}

/// [`run_dd`] from a given state instead of the uniform split with zero
/// capacities.
pub fn run_dd_from(
    scn: &Scenario,
    sp: &SmoothingParams,
    bnn: &BnnParams,
    ctrl: &ControllerParams,
    init: Option<&SystemState>,
) -> Result<MethodOutcome> {
    let run = run_decoupled(scn, sp, bnn, ctrl, init.cloned())?;
    let schedule_cost_exact = exact_total_cost(&run.state, scn);
    let model = Decoupled {
        scn,
        sp: *sp,
        y: &run.state.y,
    };
    let settled = equilibrate(&run.state.x, &model, &scn.loads(), SETTLE_TOL, SETTLE_SWEEPS)?;
    let state = SystemState {
        x: settled.x,
        y: run.state.y,
    };
    Ok(MethodOutcome {
        method: Method::Dd,
        cost_exact: exact_total_cost(&state, scn),
        cost_smoothed: smoothed_total_cost(&state, scn, sp),
        schedule_cost_exact,
        wardrop_gap: settled.gap,
        iterations: total_units(bnn, ctrl) + settled.steps,
        x: state.x,
        y: Some(state.y),
        trajectory: run.trajectory,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub x: SplitState,
    pub y: CapacityState,
    pub cost: f64,
    /// Simplex pivots.
    pub iterations: usize,
    /// Largest LP constraint violation.
    pub residual: f64,
}

/// Range of capacities that minimize the exact cost of `h` at fixed flows:
/// from `min(x_a, x_b)` up to the rate of the costlier side.
pub fn optimal_capacity_interval(h: &HyperLink, x_a: f64, x_b: f64) -> (f64, f64) {
    let lo = x_a.min(x_b);
    let a_max = h.alpha_max();
    let hi = [(h.side_a.alpha, x_a), (h.side_b.alpha, x_b)]
        .into_iter()
        .filter(|(a, _)| *a == a_max)
        .map(|(_, x)| x)
        .fold(lo, f64::max);
    (lo, hi)
}

/// Minimizes the exact cost over flows and capacities as a linear program.
///
/// Variables are the splits, the capacities, and one `m <= min(x, y)` per
/// hyper-link side. Where the exact optimum leaves a capacity free on an
/// interval, the capacity is placed where the smoothed payoffs (at the
/// scenario's `r`) are closest to a Wardrop equilibrium; this does not change
/// the exact cost.
pub fn solve_optimal(scn: &Scenario) -> Result<OracleSolution> {
    let shape = SplitState::uniform(scn);
    let n_x = scn.num_paths();
    let n_h = scn.hyperlinks.len();
    let (y0, ma0, mb0) = (n_x, n_x + n_h, n_x + 2 * n_h);
    let xi = |flow: usize, path: usize| -> usize { scn.flows[..flow].iter().map(|f| f.paths.len()).sum::<usize>() + path };

    let mut c = vec![0.0; n_x + 3 * n_h];
    for (i, hps) in scn.hyperpaths.iter().enumerate() {
        for (p, hp) in hps.iter().enumerate() {
            c[xi(i, p)] = hp.base_cost;
        }
    }
    for h in &scn.hyperlinks {
        c[y0 + h.id] = h.alpha_max();
        c[ma0 + h.id] = -h.side_a.alpha;
        c[mb0 + h.id] = -h.side_b.alpha;
    }
    let mut lp = LinearProgram::new(c);
    for (i, f) in scn.flows.iter().enumerate() {
        let terms: Vec<_> = (0..f.paths.len()).map(|p| (xi(i, p), 1.0)).collect();
        lp.add_sparse(&terms, Cmp::Eq, f.load);
    }
    for h in &scn.hyperlinks {
        for (m, side) in [(ma0, &h.side_a), (mb0, &h.side_b)] {
            lp.add_sparse(&[(m + h.id, 1.0), (xi(side.flow, side.path), -1.0)], Cmp::Le, 0.0);
            lp.add_sparse(&[(m + h.id, 1.0), (y0 + h.id, -1.0)], Cmp::Le, 0.0);
        }
    }
    let sol = lp.solve()?;
    let mut x = shape.with_flat(&sol.x[..n_x]);
    // Clear simplex round-off so every flow carries exactly its load.
    for (row, f) in x.0.iter_mut().zip(&scn.flows) {
        let m: f64 = row.iter().sum();
        if m > 0.0 {
            row.iter_mut().for_each(|v| *v *= f.load / m);
        }
    }
    let sp = SmoothingParams::new(scn.params.r)?;
    let y = select_capacities(scn, &x, &sp);
    let state = SystemState { x, y };
    Ok(OracleSolution {
        cost: exact_total_cost(&state, scn),
        x: state.x,
        y: state.y,
        iterations: sol.iterations,
        residual: sol.residual,
    })
}

/// Coordinate search over each hyper-link's optimal interval for the
/// capacities with the smallest smoothed Wardrop gap.
fn select_capacities(scn: &Scenario, x: &SplitState, sp: &SmoothingParams) -> CapacityState {
    const GRID: usize = 400;
    let loads = scn.loads();
    let intervals: Vec<(f64, f64)> = scn
        .hyperlinks
        .iter()
        .map(|h| optimal_capacity_interval(h, x.get(h.side_a.flow, h.side_a.path), x.get(h.side_b.flow, h.side_b.path)))
        .collect();
    let mut state = SystemState {
        x: x.clone(),
        y: CapacityState(intervals.iter().map(|(lo, _)| *lo).collect()),
    };
    let gap = |st: &SystemState| stationarity_gap(&st.x, &crate::cost::payoffs(st, scn, sp), &loads);
    let mut best = gap(&state);
    for _ in 0..4 {
        let before = best;
        for (h, &(lo, hi)) in intervals.iter().enumerate() {
            if hi <= lo {
                continue;
            }
            for k in 0..=GRID {
                let mut trial = state.clone();
                trial.y.0[h] = lo + (hi - lo) * k as f64 / GRID as f64;
                let g = gap(&trial);
                if g < best {
                    best = g;
                    state = trial;
                }
            }
        }
        if best >= before {
            break;
        }
    }
    state.y
}

/// Wardrop diagnostics of the oracle state under the smoothed payoffs.
pub fn oracle_wardrop(sol: &OracleSolution, scn: &Scenario, sp: &SmoothingParams, tol: f64) -> EquilibriumReport {
    let state = SystemState {
        x: sol.x.clone(),
        y: sol.y.clone(),
    };
    wardrop_check(&state, scn, sp, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution {
    pub x: SplitState,
    /// Exact cost with every capacity at its optimum `min(x_a, x_b)`.
    pub cost: f64,
    pub evaluations: usize,
}

/// Independent check of [`solve_optimal`] on small instances.
///
/// Capacities are profiled out (the best `y_h` is `min(x_a, x_b)`), leaving a
/// convex piecewise-linear function of the splits. It is minimized by an
/// exhaustive grid over every flow's simplex followed by windowed searches on
/// successively halved grids.
pub fn grid_optimum(scn: &Scenario) -> Result<GridSolution> {
    if scn.num_paths() > GRID_MAX_PATHS {
        return Err(Error::Parameter(format!(
            "grid verifier handles at most {GRID_MAX_PATHS} split variables, got {}",
            scn.num_paths()
        )));
    }
    const DIVISIONS: usize = 24;
    let loads = scn.loads();
    let per_flow: Vec<Vec<Vec<f64>>> = scn
        .flows
        .iter()
        .map(|f| compositions(DIVISIONS, f.paths.len()).into_iter().map(|c| c.iter().map(|&k| f.load * k as f64 / DIVISIONS as f64).collect()).collect())
        .collect();
    let mut evaluations = 0;
    let (mut best_x, mut best) = search_product(&per_flow, scn, &mut evaluations);
    let mut h: Vec<f64> = loads.iter().map(|l| l / DIVISIONS as f64).collect();
    while h.iter().zip(&loads).any(|(h, l)| *h > 1e-10 * l.max(1.0)) {
        let candidates: Vec<Vec<Vec<f64>>> = best_x
            .0
            .iter()
            .zip(&h)
            .zip(&loads)
            .map(|((row, &step), &load)| window(row, step, load))
            .collect();
        let (x, cost) = search_product(&candidates, scn, &mut evaluations);
        if cost < best {
            best = cost;
            best_x = x;
        }
        h.iter_mut().for_each(|v| *v *= 0.5);
    }
    Ok(GridSolution {
        x: best_x,
        cost: best,
        evaluations,
    })
}

/// All ways to write `n` as an ordered sum of `k` non-negative parts.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|first| {
            compositions(n - first, k - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Points within two grid steps of `row` on its simplex.
fn window(row: &[f64], step: f64, load: f64) -> Vec<Vec<f64>> {
    let k = row.len();
    if k == 1 {
        return vec![row.to_vec()];
    }
    let mut out = Vec::new();
    let offsets = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let mut idx = vec![0usize; k - 1];
    loop {
        let mut point: Vec<f64> = (0..k - 1).map(|j| row[j] + offsets[idx[j]] * step).collect();
        let rest = load - point.iter().sum::<f64>();
        if point.iter().all(|v| *v >= 0.0) && rest >= -1e-12 * load.max(1.0) {
            point.push(rest.max(0.0));
            out.push(point);
        }
        let mut j = 0;
        while j < k - 1 {
            idx[j] += 1;
            if idx[j] < offsets.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == k - 1 {
            return out;
        }
    }
}

fn search_product(per_flow: &[Vec<Vec<f64>>], scn: &Scenario, evaluations: &mut usize) -> (SplitState, f64) {
    let mut idx = vec![0usize; per_flow.len()];
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let x = SplitState(idx.iter().zip(per_flow).map(|(&i, c)| c[i].clone()).collect());
        let cost = coupled_exact_cost(&x, scn);
        *evaluations += 1;
        if best.as_ref().is_none_or(|(_, b)| cost < *b) {
            best = Some((idx.clone(), cost));
        }
        let mut j = 0;
        while j < idx.len() {
            idx[j] += 1;
            if idx[j] < per_flow[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == idx.len() {
            break;
        }
    }
    let (idx, cost) = best.expect("at least one grid point");
    (SplitState(idx.iter().zip(per_flow).map(|(&i, c)| c[i].clone()).collect()), cost)
}

/// Best capacity for `h` at fixed flows under the smoothed cost: the root
/// of the (increasing) capacity derivative, or zero.
pub fn smoothed_best_capacity(h: &HyperLink, x_a: f64, x_b: f64, sp: &SmoothingParams) -> f64 {
    let grad = |y: f64| -rebate_grad_y(h, x_a, x_b, y, sp);
    let (mut lo, mut hi) = (0.0, 2.0 * x_a.max(x_b) + 1.0);
    if grad(lo) >= 0.0 {
        return 0.0;
    }
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if grad(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smoothed cost with every capacity at its best value for the flows.
struct Profiled<'a> {
    scn: &'a Scenario,
    sp: SmoothingParams,
}

impl Profiled<'_> {
    fn state(&self, x: &SplitState) -> SystemState {
        let y = self
            .scn
            .hyperlinks
            .iter()
            .map(|h| smoothed_best_capacity(h, x.get(h.side_a.flow, h.side_a.path), x.get(h.side_b.flow, h.side_b.path), &self.sp))
            .collect();
        SystemState {
            x: x.clone(),
            y: CapacityState(y),
        }
    }
}

impl PayoffModel for Profiled<'_> {
    fn payoffs(&self, x: &SplitState) -> Vec<Vec<f64>> {
        crate::cost::payoffs(&self.state(x), self.scn, &self.sp)
    }

    fn potential(&self, x: &SplitState) -> f64 {
        smoothed_total_cost(&self.state(x), self.scn, &self.sp)
    }

    fn exact_cost(&self, x: &SplitState) -> f64 {
        exact_total_cost(&self.state(x), self.scn)
    }
}

/// Minimum of the smoothed cost over flows and capacities.
///
/// The capacities are eliminated exactly (one convex problem each), and the
/// resulting convex function of the splits is minimized with settled BNN.
pub fn minimize_smoothed(scn: &Scenario, sp: &SmoothingParams) -> Result<(SystemState, f64)> {
    let model = Profiled { scn, sp: *sp };
    let settled = equilibrate(&SplitState::uniform(scn), &model, &scn.loads(), 1e-6, SETTLE_SWEEPS)?;
    let state = model.state(&settled.x);
    let cost = smoothed_total_cost(&state, scn, sp);
    Ok((state, cost))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingCheck {
    pub oracle_le_dd: bool,
    pub oracle_le_cd: bool,
    pub dd_le_nocoding: bool,
    pub cd_le_nocoding: bool,
    /// Reported, not required.
    pub dd_le_cd: bool,
}

impl OrderingCheck {
    pub fn passed(&self) -> bool {
        self.oracle_le_dd && self.oracle_le_cd && self.dd_le_nocoding && self.cd_le_nocoding
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: Method,
    pub cost_exact: f64,
    pub x: SplitState,
    pub y: Option<CapacityState>,
    pub iterations: usize,
    pub wardrop_gap: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Oracle, DD, CD, no coding, in that order.
    pub rows: Vec<ComparisonRow>,
    pub ordering: OrderingCheck,
}

impl Comparison {
    pub fn cost(&self, method: Method) -> f64 {
        self.rows.iter().find(|r| r.method == method).map_or(f64::NAN, |r| r.cost_exact)
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

fn row(o: MethodOutcome, seconds: f64) -> ComparisonRow {
    ComparisonRow {
        method: o.method,
        cost_exact: o.cost_exact,
        x: o.x,
        y: o.y,
        iterations: o.iterations,
        wardrop_gap: o.wardrop_gap,
        seconds,
    }
}

/// Runs all four methods (concurrently) and checks the cost ordering.
pub fn compare_report(scn: &Scenario, sp: &SmoothingParams, bnn: &BnnParams, ctrl: &ControllerParams) -> Result<Comparison> {
    let (oracle, dd, cd, nc) = std::thread::scope(|s| {
        let oracle = s.spawn(|| timed(|| solve_optimal(scn)));
        let dd = s.spawn(|| timed(|| run_dd(scn, sp, bnn, ctrl)));
        let cd = s.spawn(|| timed(|| run_coupled(scn, sp, bnn, ctrl)));
        let nc = s.spawn(|| timed(|| run_no_coding(scn, bnn, ctrl)));
        (
            oracle.join().expect("oracle thread"),
            dd.join().expect("dd thread"),
            cd.join().expect("cd thread"),
            nc.join().expect("no-coding thread"),
        )
    });
    let (oracle, t_oracle) = oracle?;
    let oracle_wardrop = oracle_wardrop(&oracle, scn, sp, f64::INFINITY).wardrop_gap;
    let rows = vec![
        ComparisonRow {
            method: Method::Oracle,
            cost_exact: oracle.cost,
            x: oracle.x,
            y: Some(oracle.y),
            iterations: oracle.iterations,
            wardrop_gap: oracle_wardrop,
            seconds: t_oracle,
        },
        dd.map(|(o, t)| row(o, t))?,
        cd.map(|(o, t)| row(o, t))?,
        nc.map(|(o, t)| row(o, t))?,
    ];
    if let Some(bad) = rows.iter().find(|r| !r.cost_exact.is_finite()) {
        return Err(Error::NonFinite {
            what: "final cost",
            t: bad.seconds,
        });
    }
    let cost = |m: Method| rows.iter().find(|r| r.method == m).map(|r| r.cost_exact).unwrap_or(f64::NAN);
    let le = |a: f64, b: f64| a <= b + ORDER_SLACK;
    let ordering = OrderingCheck {
        oracle_le_dd: le(cost(Method::Oracle), cost(Method::Dd)),
        oracle_le_cd: le(cost(Method::Oracle), cost(Method::Cd)),
        dd_le_nocoding: le(cost(Method::Dd), cost(Method::NoCoding)),
        cd_le_nocoding: le(cost(Method::Cd), cost(Method::NoCoding)),
        dd_le_cd: le(cost(Method::Dd), cost(Method::Cd)),
    };
    Ok(Comparison { rows, ordering })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{random_scenario, GeneratorParams};
    use crate::scenario::ScenarioConfig;
    use approx::assert_abs_diff_eq;

    fn fig2() -> Scenario {
        Scenario::from_config(&ScenarioConfig::fig2()).unwrap()
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("lp".parse::<Method>().is_err());
    }

    #[test]
    fn no_coding_on_fig2() {
        let scn = fig2();
        let o = run_no_coding(&scn, &BnnParams::default(), &ControllerParams::default()).unwrap();
        assert_abs_diff_eq!(o.cost_exact, 57.641, epsilon = 1e-6);
        assert!(o.x.get(2, 0) < 1e-9);
        assert_abs_diff_eq!(o.x.mass(1), 2.69, epsilon = 1e-12);
    }

    #[test]
    fn oracle_on_fig2() {
        let scn = fig2();
        let sol = solve_optimal(&scn).unwrap();
        assert_abs_diff_eq!(sol.cost, 50.685, epsilon = 1e-6);
        let expected = [[2.69, 2.04], [2.69, 0.0], [0.0, 3.56]];
        for (row, want) in sol.x.0.iter().zip(expected) {
            for (v, w) in row.iter().zip(want) {
                assert_abs_diff_eq!(*v, w, epsilon = 1e-2);
            }
        }
        assert!(sol.residual < 1e-9);
    }

    #[test]
    fn oracle_capacities_stay_in_the_optimal_interval() {
        let scn = fig2();
        let sol = solve_optimal(&scn).unwrap();
        for h in &scn.hyperlinks {
            let (lo, hi) = optimal_capacity_interval(h, sol.x.get(h.side_a.flow, h.side_a.path), sol.x.get(h.side_b.flow, h.side_b.path));
            let y = sol.y.0[h.id];
            assert!(y >= lo - 1e-12 && y <= hi + 1e-12, "{y} not in [{lo}, {hi}]");
        }
    }

    #[test]
    fn zero_loads_cost_nothing() {
        let scn = fig2().with_loads(&[0.0, 0.0, 0.0]).unwrap();
        let sol = solve_optimal(&scn).unwrap();
        assert_eq!(sol.cost, 0.0);
        assert!(sol.x.flat().iter().chain(&sol.y.0).all(|v| *v == 0.0));
    }

    #[test]
    fn grid_verifier_agrees_on_fig2() {
        let scn = fig2();
        let grid = grid_optimum(&scn).unwrap();
        let lp = solve_optimal(&scn).unwrap();
        assert!((grid.cost - lp.cost).abs() <= 1e-3 * lp.cost, "{} vs {}", grid.cost, lp.cost);
    }

    #[test]
    fn capacity_interval_cases() {
        let scn = fig2();
        let h = &scn.hyperlinks[0];
        let (lo, hi) = optimal_capacity_interval(h, 1.0, 1.0);
        assert_eq!((lo, hi), (1.0, 1.0));
        let a_is_max = h.side_a.alpha >= h.side_b.alpha;
        let (lo, hi) = optimal_capacity_interval(h, 3.0, 1.0);
        assert_eq!(lo, 1.0);
        assert_eq!(hi, if a_is_max { 3.0 } else { 1.0 });
    }

    #[test]
    fn smoothed_best_capacity_zeroes_the_derivative() {
        let scn = fig2();
        let sp = SmoothingParams::new(-20.0).unwrap();
        let h = &scn.hyperlinks[0];
        let y = smoothed_best_capacity(h, 2.0, 3.0, &sp);
        assert!(y > 0.0);
        assert!(rebate_grad_y(h, 2.0, 3.0, y, &sp).abs() < 1e-9);
    }

    #[test]
    fn compositions_count() {
        // C(n + k - 1, k - 1)
        assert_eq!(compositions(4, 3).len(), 15);
        assert!(compositions(4, 3).iter().all(|c| c.iter().sum::<usize>() == 4));
    }

    #[test]
    fn coupled_with_one_flow_is_no_coding() {
        let cfg = ScenarioConfig::fig2();
        let single = ScenarioConfig {
            flows: cfg.flows[..1].to_vec(),
            ..cfg
        };
        let scn = Scenario::from_config(&single).unwrap();
        assert!(scn.hyperlinks.is_empty());
        let sp = SmoothingParams::new(-100.0).unwrap();
        let (bnn, ctrl) = (BnnParams::default(), ControllerParams::default());
        let cd = run_coupled(&scn, &sp, &bnn, &ctrl).unwrap();
        let nc = run_no_coding(&scn, &bnn, &ctrl).unwrap();
        assert_abs_diff_eq!(cd.cost_exact, nc.cost_exact, epsilon = 1e-9);
        assert_abs_diff_eq!(cd.cost_exact, solve_optimal(&scn).unwrap().cost, epsilon = 1e-9);
    }

    #[test]
    fn grid_verifier_agrees_on_random_two_flow_instances() {
        let params = GeneratorParams {
            flows: 2,
            min_paths: 2,
            max_paths: 3,
            ..GeneratorParams::small()
        };
        for seed in 500..505 {
            let scn = Scenario::from_config(&random_scenario(&params, seed).unwrap()).unwrap();
            let grid = grid_optimum(&scn).unwrap();
            let lp = solve_optimal(&scn).unwrap();
            assert!((grid.cost - lp.cost).abs() <= 1e-3 * lp.cost, "seed {seed}: {} vs {}", grid.cost, lp.cost);
        }
    }
}
