//! Two-timescale decoupled dynamics.
//!
//! Fast timescale: every flow moves mass between its hyper-paths with the
//! (cost-minimizing) Brown-von Neumann-Nash field at fixed capacities.
//! Slow timescale: every hyper-link moves its capacity along the negative
//! gradient of the smoothed cost, which at a Wardrop equilibrium depends only
//! on the hyper-link's own two flow rates.
//!
//! Both flows are integrated with explicit Euler. A step is accepted only if
//! it does not raise the smoothed cost; otherwise it is split in halves.
//! The smoothed cost is the Lyapunov function of both continuous flows, so
//! this only shortens steps where the Euler discretization would overshoot a
//! kink of the r-mean.

use serde::{Deserialize, Serialize};

use crate::cost::{
    self, capacity_gradients, coupled_exact_cost, coupled_payoffs, coupled_smoothed_cost, exact_total_cost,
    smoothed_rebate, smoothed_total_cost, CapacityState, SmoothingParams, SplitState, SystemState,
};
use crate::error::{Error, Result};
use crate::scenario::RunParams;
use crate::topology::Scenario;

/// Usage threshold relative to flow load.
pub const USED_FRACTION: f64 = 1e-6;

/// Longest step [`equilibrate`] attempts.
const MAX_SETTLE_STEP: f64 = 1e12;

/// [`equilibrate`] gives up after this many sweeps without an accepted step.
const MAX_IDLE_SWEEPS: usize = 200;

/// Trial Euler steps allowed per flow and small time unit.
pub const MAX_TRIALS: usize = 256;

/// Steps shorter than `eta * MIN_SUBSTEP` are not attempted.
const MIN_SUBSTEP: f64 = 1.0 / (1u64 << 40) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BnnParams {
    /// Length of one small time unit.
    pub eta: f64,
    /// Small time units per large step.
    pub n_small: usize,
    pub renormalize: bool,
}

impl Default for BnnParams {
    fn default() -> Self {
        BnnParams {
            eta: 0.05,
            n_small: 20,
            renormalize: true,
        }
    }
}

impl BnnParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) || self.n_small == 0 {
            return Err(Error::Parameter(format!("bad BNN parameters {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerParams {
    pub kappa: f64,
    /// Length of one large time unit.
    pub step: f64,
    pub n_large: usize,
    /// Wardrop gap above which a large step is flagged as not equilibrated.
    pub equilibrium_tol: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        ControllerParams {
            kappa: 0.5,
            step: 1.0,
            n_large: 50,
            equilibrium_tol: 1e-3,
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(self.kappa) && ok(self.step) && ok(self.equilibrium_tol)) || self.n_large == 0 {
            return Err(Error::Parameter(format!("bad controller parameters {self:?}")));
        }
        Ok(())
    }
}

/// Splits scenario run parameters into smoothing, BNN and controller parts.
pub fn params_from(run: &RunParams) -> Result<(SmoothingParams, BnnParams, ControllerParams)> {
    let sp = SmoothingParams::new(run.r)?;
    let bnn = BnnParams {
        eta: run.eta,
        n_small: run.n_small,
        renormalize: true,
    };
    let ctrl = ControllerParams {
        kappa: run.kappa,
        step: run.step,
        n_large: run.n_large,
        ..ControllerParams::default()
    };
    bnn.validate()?;
    ctrl.validate()?;
    Ok((sp, bnn, ctrl))
}

/// Payoffs and potential of a population game over the split state.
pub trait PayoffModel {
    fn payoffs(&self, x: &SplitState) -> Vec<Vec<f64>>;
    /// Smoothed cost; payoffs are its partial derivatives.
    fn potential(&self, x: &SplitState) -> f64;
    /// Exact (min-based) cost of the state.
    fn exact_cost(&self, x: &SplitState) -> f64;
    /// True when the potential is a sum of per-flow terms, so that flows
    /// evolve independently.
    fn separable(&self) -> bool {
        false
    }
}

/// Hyper-link model at fixed capacities.
pub struct Decoupled<'a> {
    pub scn: &'a Scenario,
    pub sp: SmoothingParams,
    pub y: &'a CapacityState,
}

impl Decoupled<'_> {
    fn state(&self, x: &SplitState) -> SystemState {
        SystemState {
            x: x.clone(),
            y: self.y.clone(),
        }
    }
}

impl PayoffModel for Decoupled<'_> {
    fn payoffs(&self, x: &SplitState) -> Vec<Vec<f64>> {
        cost::payoffs(&self.state(x), self.scn, &self.sp)
    }

    fn potential(&self, x: &SplitState) -> f64 {
        smoothed_total_cost(&self.state(x), self.scn, &self.sp)
    }

    fn exact_cost(&self, x: &SplitState) -> f64 {
        exact_total_cost(&self.state(x), self.scn)
    }

    fn separable(&self) -> bool {
        true
    }
}

/// Coding savings tied directly to `min(x_a, x_b)`.
pub struct Coupled<'a> {
    pub scn: &'a Scenario,
    pub sp: SmoothingParams,
}

impl PayoffModel for Coupled<'_> {
    fn payoffs(&self, x: &SplitState) -> Vec<Vec<f64>> {
        coupled_payoffs(x, self.scn, &self.sp)
    }

    fn potential(&self, x: &SplitState) -> f64 {
        coupled_smoothed_cost(x, self.scn, &self.sp)
    }

    fn exact_cost(&self, x: &SplitState) -> f64 {
        coupled_exact_cost(x, self.scn)
    }
}

/// No coding: payoffs are the path base costs.
pub struct Uncoded<'a> {
    pub scn: &'a Scenario,
}

impl PayoffModel for Uncoded<'_> {
    fn payoffs(&self, _x: &SplitState) -> Vec<Vec<f64>> {
        self.scn
            .hyperpaths
            .iter()
            .map(|hps| hps.iter().map(|hp| hp.base_cost).collect())
            .collect()
    }

    fn potential(&self, x: &SplitState) -> f64 {
        cost::base_cost(x, self.scn)
    }

    fn exact_cost(&self, x: &SplitState) -> f64 {
        cost::base_cost(x, self.scn)
    }

    fn separable(&self) -> bool {
        true
    }
}

/// BNN field of one flow:
/// `gamma^p = max(mean_payoff - F^p, 0)`, `dx^p = m gamma^p - x^p sum gamma`.
pub fn bnn_field(flow: usize, x: &[f64], payoffs: &[f64]) -> Result<Vec<f64>> {
    let mass: f64 = x.iter().sum();
    if !(mass > 0.0) {
        return Err(Error::DegenerateFlow(flow));
    }
    let mean = x.iter().zip(payoffs).map(|(x, f)| x * f).sum::<f64>() / mass;
    let gamma: Vec<f64> = payoffs.iter().map(|f| (mean - f).max(0.0)).collect();
    let total: f64 = gamma.iter().sum();
    Ok(x.iter().zip(&gamma).map(|(x, g)| mass * g - x * total).collect())
}

/// `dx_i/dt` under the hyper-link payoffs.
pub fn bnn_derivative(flow: usize, state: &SystemState, scn: &Scenario, sp: &SmoothingParams) -> Result<Vec<f64>> {
    let f: Vec<f64> = (0..state.x.flow(flow).len())
        .map(|p| cost::payoff(flow, p, state, scn, sp))
        .collect();
    bnn_field(flow, state.x.flow(flow), &f)
}

/// One explicit Euler step of length `eta`, clamped at zero and (optionally)
/// rescaled so every flow carries exactly its load.
pub fn bnn_step(
    x: &SplitState,
    model: &impl PayoffModel,
    loads: &[f64],
    eta: f64,
    renormalize: bool,
) -> Result<SplitState> {
    let f = model.payoffs(x);
    euler_from(x, &f, loads, eta, renormalize)
}

fn euler_from(x: &SplitState, payoffs: &[Vec<f64>], loads: &[f64], eta: f64, renormalize: bool) -> Result<SplitState> {
    let mut out = Vec::with_capacity(x.0.len());
    for (i, (row, f)) in x.0.iter().zip(payoffs).enumerate() {
        if loads[i] == 0.0 {
            out.push(vec![0.0; row.len()]);
            continue;
        }
        let dx = bnn_field(i, row, f)?;
        let mut next: Vec<f64> = row.iter().zip(&dx).map(|(v, d)| (v + eta * d).max(0.0)).collect();
        if renormalize {
            let m: f64 = next.iter().sum();
            if !(m > 0.0) {
                return Err(Error::DegenerateFlow(i));
            }
            let scale = loads[i] / m;
            next.iter_mut().for_each(|v| *v *= scale);
        }
        out.push(next);
    }
    Ok(SplitState(out))
}

/// Outcome of [`integrate_bnn`].
#[derive(Debug, Clone, PartialEq)]
pub struct Integration {
    pub x: SplitState,
    /// Accepted Euler steps.
    pub accepted: usize,
    /// Set when some flow ran out of trial steps before reaching `dt`.
    pub truncated: bool,
}

/// Integrates the BNN flow for time `dt`, halving the Euler step whenever a
/// trial step would raise the potential and doubling it after a success.
///
/// For separable models each flow is integrated on its own with its own step
/// length, so a stiff flow does not hold the others back. At most
/// [`MAX_TRIALS`] trial steps are spent per flow (or per state, for coupled
/// models) before the integration stops short.
pub fn integrate_bnn(
    x: &SplitState,
    model: &impl PayoffModel,
    loads: &[f64],
    dt: f64,
    renormalize: bool,
) -> Result<Integration> {
    let groups: Vec<Vec<usize>> = if model.separable() {
        (0..x.0.len()).map(|i| vec![i]).collect()
    } else {
        vec![(0..x.0.len()).collect()]
    };
    let mut cur = x.clone();
    let mut cur_cost = model.potential(&cur);
    let mut payoffs = model.payoffs(&cur);
    let mut accepted = 0;
    let mut truncated = false;
    for group in groups {
        let mut remaining = dt;
        let mut tau = dt;
        let mut trials = 0;
        while remaining > dt * 1e-12 {
            if trials == MAX_TRIALS {
                truncated = true;
                break;
            }
            trials += 1;
            tau = tau.min(remaining);
            let step = euler_from(&cur, &payoffs, loads, tau, renormalize)?;
            let mut trial = cur.clone();
            for &i in &group {
                trial.0[i] = step.0[i].clone();
            }
            let trial_cost = model.potential(&trial);
            if trial_cost <= cur_cost {
                remaining -= tau;
                cur = trial;
                cur_cost = trial_cost;
                payoffs = model.payoffs(&cur);
                accepted += 1;
                tau *= 2.0;
            } else {
                tau *= 0.5;
                if tau < dt * MIN_SUBSTEP {
                    // No descent at any resolvable step: numerically stationary.
                    break;
                }
            }
        }
    }
    Ok(Integration { x: cur, accepted, truncated })
}

/// Worst violation of the Wardrop conditions: payoff spread over used paths,
/// or an unused path paying less than the mean.
pub fn stationarity_gap(x: &SplitState, f: &[Vec<f64>], loads: &[f64]) -> f64 {
    gap_with_threshold(x, f, loads, USED_FRACTION)
}

/// Like [`stationarity_gap`], but a path counts as used when its mass exceeds
/// `frac * load`.
fn gap_with_threshold(x: &SplitState, f: &[Vec<f64>], loads: &[f64], frac: f64) -> f64 {
    let lambdas = mean_payoffs(x, f);
    x.0.iter()
        .zip(f)
        .zip(loads)
        .zip(&lambdas)
        .map(|(((row, fr), &load), &lambda)| {
            if !lambda.is_finite() {
                return 0.0;
            }
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut unused: f64 = 0.0;
            for (&v, &fp) in row.iter().zip(fr) {
                if v > frac * load {
                    lo = lo.min(fp);
                    hi = hi.max(fp);
                } else {
                    unused = unused.max(lambda - fp);
                }
            }
            unused.max(if hi >= lo { hi - lo } else { 0.0 })
        })
        .fold(0.0, f64::max)
}

/// Result of [`equilibrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Settled {
    pub x: SplitState,
    /// [`stationarity_gap`] at `x`.
    pub gap: f64,
    /// Accepted per-flow steps.
    pub steps: usize,
}

/// Drives the flows to a Wardrop equilibrium of `model` with BNN Euler steps
/// taken flow by flow, each flow with its own step length. A flow's step
/// doubles after it is accepted (so paths bound for extinction are
/// eventually clamped to zero) and halves whenever the potential would rise.
/// Stops once the gap, counting every path with positive mass as used, is at
/// most `tol`, or after `max_sweeps`.
///
/// Under the hyper-link model the potential is separable across flows at
/// fixed capacities, so the per-flow steps commute.
pub fn equilibrate(
    x: &SplitState,
    model: &impl PayoffModel,
    loads: &[f64],
    tol: f64,
    max_sweeps: usize,
) -> Result<Settled> {
    let n = x.0.len();
    let mut cur = x.clone();
    let mut cur_cost = model.potential(&cur);
    let mut tau = vec![1e-3; n];
    let mut f = model.payoffs(&cur);
    let mut steps = 0;
    let mut idle = 0;
    let row_gap = |x: &SplitState, f: &[Vec<f64>], i: usize| {
        gap_with_threshold(&SplitState(vec![x.0[i].clone()]), &f[i..=i], &loads[i..=i], 0.0)
    };
    for _ in 0..max_sweeps {
        if gap_with_threshold(&cur, &f, loads, 0.0) <= tol || idle >= MAX_IDLE_SWEEPS {
            break;
        }
        let mut moved = false;
        for i in 0..n {
            if loads[i] == 0.0 || tau[i] < 1e-15 {
                continue;
            }
            let gap_i = row_gap(&cur, &f, i);
            if gap_i <= tol {
                continue;
            }
            let dx = bnn_field(i, &cur.0[i], &f[i])?;
            let mut row: Vec<f64> = cur.0[i].iter().zip(&dx).map(|(v, d)| (v + tau[i] * d).max(0.0)).collect();
            let m: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v *= loads[i] / m);
            if row == cur.0[i] {
                tau[i] = (2.0 * tau[i]).min(MAX_SETTLE_STEP);
                continue;
            }
            let mut trial = cur.clone();
            trial.0[i] = row;
            let trial_cost = model.potential(&trial);
            // Within round-off of the potential, progress is judged by the gap.
            let flat = trial_cost - cur_cost <= 8.0 * f64::EPSILON * cur_cost.abs().max(1.0);
            let mut trial_f = None;
            let accept = trial_cost <= cur_cost || {
                flat && {
                    let tf = model.payoffs(&trial);
                    let better = row_gap(&trial, &tf, i) < gap_i;
                    trial_f = Some(tf);
                    better
                }
            };
            if accept {
                cur = trial;
                cur_cost = trial_cost;
                f = trial_f.unwrap_or_else(|| model.payoffs(&cur));
                tau[i] = (2.0 * tau[i]).min(MAX_SETTLE_STEP);
                moved = true;
                steps += 1;
            } else {
                tau[i] *= 0.5;
            }
        }
        idle = if moved { 0 } else { idle + 1 };
    }
    if !cur_cost.is_finite() {
        return Err(Error::NonFinite {
            what: "potential",
            t: f64::NAN,
        });
    }
    let gap = stationarity_gap(&cur, &f, loads);
    Ok(Settled { x: cur, gap, steps })
}

/// One row of a trajectory, taken after every small time unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    /// Large step this record belongs to.
    pub phase: usize,
    pub x: SplitState,
    /// Empty for models without capacities.
    pub y: Vec<f64>,
    pub cost_exact: f64,
    pub cost_smoothed: f64,
    /// Mass-weighted mean payoff per flow.
    pub mean_payoff: Vec<f64>,
    pub wardrop_gap: f64,
    /// The integrator ran out of trial steps during this unit.
    pub truncated: bool,
}

/// Summary of one large step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub index: usize,
    /// Smoothed cost right after the capacity update, before re-equilibration.
    pub start_smoothed: f64,
    /// Post-equilibration smoothed cost, `H(Y_k)`.
    pub end_smoothed: f64,
    pub end_exact: f64,
    pub wardrop_gap: f64,
    /// Set when the phase ended with `wardrop_gap > equilibrium_tol`.
    pub flagged: bool,
    /// Some unit of the phase was cut short; see [`integrate_bnn`].
    pub truncated: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<Record>,
    pub phases: Vec<Phase>,
}

impl Trajectory {
    /// Largest increase of the smoothed cost between consecutive points of
    /// any small-timescale phase (0 when non-increasing everywhere).
    pub fn max_small_step_increase(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for ph in &self.phases {
            let mut prev = ph.start_smoothed;
            for r in self.records.iter().filter(|r| r.phase == ph.index) {
                worst = worst.max(r.cost_smoothed - prev);
                prev = r.cost_smoothed;
            }
        }
        worst
    }

    /// Largest relative increase of `H(Y_k)` between consecutive unflagged
    /// large steps.
    pub fn max_large_step_increase(&self) -> f64 {
        let h: Vec<f64> = self
            .phases
            .iter()
            .filter(|p| !p.flagged)
            .map(|p| p.end_smoothed)
            .collect();
        h.windows(2)
            .map(|w| (w[1] - w[0]) / w[0].abs().max(1.0))
            .fold(0.0, f64::max)
    }
}

fn mean_payoffs(x: &SplitState, f: &[Vec<f64>]) -> Vec<f64> {
    x.0.iter()
        .zip(f)
        .map(|(row, fr)| {
            let m: f64 = row.iter().sum();
            if m > 0.0 {
                row.iter().zip(fr).map(|(a, b)| a * b).sum::<f64>() / m
            } else {
                f64::NAN
            }
        })
        .collect()
}

fn make_record(
    t: f64,
    phase: usize,
    x: &SplitState,
    y: &[f64],
    model: &impl PayoffModel,
    loads: &[f64],
    truncated: bool,
) -> Result<Record> {
    let f = model.payoffs(x);
    let cost_exact = model.exact_cost(x);
    let cost_smoothed = model.potential(x);
    if !cost_exact.is_finite() {
        return Err(Error::NonFinite { what: "exact cost", t });
    }
    if !cost_smoothed.is_finite() {
        return Err(Error::NonFinite { what: "smoothed cost", t });
    }
    Ok(Record {
        t,
        phase,
        x: x.clone(),
        y: y.to_vec(),
        cost_exact,
        cost_smoothed,
        mean_payoff: mean_payoffs(x, &f),
        wardrop_gap: payoff_spread(x, &f, loads),
        truncated,
    })
}

/// `n_small` small time units at fixed capacities. Records start at `t0`.
pub fn run_small_timescale(
    x: &SplitState,
    y: &[f64],
    model: &impl PayoffModel,
    loads: &[f64],
    bnn: &BnnParams,
    phase: usize,
    t0: f64,
) -> Result<(SplitState, Vec<Record>)> {
    let mut cur = x.clone();
    let mut records = Vec::with_capacity(bnn.n_small);
    for k in 0..bnn.n_small {
        let step = integrate_bnn(&cur, model, loads, bnn.eta, bnn.renormalize)?;
        cur = step.x;
        let t = t0 + (k + 1) as f64 * bnn.eta;
        records.push(make_record(t, phase, &cur, y, model, loads, step.truncated)?);
    }
    Ok((cur, records))
}

/// `dH/dy_h = -dT~/dy_h`; local to the hyper-link.
pub fn capacity_gradient(h: usize, state: &SystemState, scn: &Scenario, sp: &SmoothingParams) -> f64 {
    let hl = &scn.hyperlinks[h];
    let xa = state.x.get(hl.side_a.flow, hl.side_a.path);
    let xb = state.x.get(hl.side_b.flow, hl.side_b.path);
    -cost::rebate_grad_y(hl, xa, xb, state.y.0[h], sp)
}

/// Projected Euler step `y' = max(0, y - step * kappa * grad)`.
pub fn capacity_step(y: &CapacityState, gradients: &[f64], kappa: f64, step: f64) -> CapacityState {
    CapacityState(
        y.0.iter()
            .zip(gradients)
            .map(|(y, g)| (y - step * kappa * g).max(0.0))
            .collect(),
    )
}

/// Integrates every hyper-link's controller over one large time unit with
/// flows frozen, halving a hyper-link's step whenever it would shrink its own
/// smoothed rebate.
pub fn advance_capacities(state: &SystemState, scn: &Scenario, sp: &SmoothingParams, ctrl: &ControllerParams) -> CapacityState {
    let mut y = state.y.clone();
    for h in &scn.hyperlinks {
        let xa = state.x.get(h.side_a.flow, h.side_a.path);
        let xb = state.x.get(h.side_b.flow, h.side_b.path);
        let rebate = |v: f64| smoothed_rebate(h, xa, xb, v, sp);
        let mut cur = y.0[h.id];
        let mut cur_rebate = rebate(cur);
        let mut remaining = ctrl.step;
        let mut tau = ctrl.step;
        while remaining > ctrl.step * 1e-12 {
            tau = tau.min(remaining);
            let grad = -cost::rebate_grad_y(h, xa, xb, cur, sp);
            let next = capacity_step(&CapacityState(vec![cur]), &[grad], ctrl.kappa, tau).0[0];
            if next == cur {
                break;
            }
            let next_rebate = rebate(next);
            if next_rebate >= cur_rebate {
                remaining -= tau;
                cur = next;
                cur_rebate = next_rebate;
                tau *= 2.0;
            } else {
                tau *= 0.5;
                if tau < ctrl.step * MIN_SUBSTEP {
                    break;
                }
            }
        }
        y.0[h.id] = cur;
    }
    y
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoupledRun {
    pub state: SystemState,
    pub trajectory: Trajectory,
    pub report: EquilibriumReport,
}

/// Runs `n_large` rounds of (capacity update, `n_small` BNN units) from
/// `init`, or from the uniform split with zero capacities.
pub fn run_decoupled(
    scn: &Scenario,
    sp: &SmoothingParams,
    bnn: &BnnParams,
    ctrl: &ControllerParams,
    init: Option<SystemState>,
) -> Result<DecoupledRun> {
    bnn.validate()?;
    ctrl.validate()?;
    let loads = scn.loads();
    let mut state = init.unwrap_or_else(|| SystemState::initial(scn));
    state.check(scn)?;
    let mut traj = Trajectory::default();
    {
        let model = Decoupled { scn, sp: *sp, y: &state.y };
        traj.records.push(make_record(0.0, 0, &state.x, &state.y.0, &model, &loads, false)?);
    }
    let mut t = 0.0;
    for k in 0..ctrl.n_large {
        state.y = advance_capacities(&state, scn, sp, ctrl);
        if state.y.0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "capacity", t });
        }
        let model = Decoupled { scn, sp: *sp, y: &state.y };
        let start_smoothed = model.potential(&state.x);
        let (x, records) = run_small_timescale(&state.x, &state.y.0, &model, &loads, bnn, k + 1, t)?;
        t = records.last().map_or(t, |r| r.t);
        let last = records.last().expect("n_small >= 1");
        traj.phases.push(Phase {
            index: k + 1,
            start_smoothed,
            end_smoothed: last.cost_smoothed,
            end_exact: last.cost_exact,
            wardrop_gap: last.wardrop_gap,
            flagged: last.wardrop_gap > ctrl.equilibrium_tol,
            truncated: records.iter().any(|r| r.truncated),
        });
        traj.records.extend(records);
        state.x = x;
    }
    let report = wardrop_check(&state, scn, sp, ctrl.equilibrium_tol);
    Ok(DecoupledRun {
        state,
        trajectory: traj,
        report,
    })
}

/// Runs a capacity-free model (coupled or uncoded) for `n_units` BNN units.
pub fn run_population(
    model: &impl PayoffModel,
    init: &SplitState,
    loads: &[f64],
    bnn: &BnnParams,
    n_units: usize,
) -> Result<(SplitState, Trajectory)> {
    let mut traj = Trajectory::default();
    traj.records.push(make_record(0.0, 0, init, &[], model, loads, false)?);
    let params = BnnParams { n_small: n_units, ..*bnn };
    let start = model.potential(init);
    let (x, records) = run_small_timescale(init, &[], model, loads, &params, 1, 0.0)?;
    if let Some(last) = records.last() {
        traj.phases.push(Phase {
            index: 1,
            start_smoothed: start,
            end_smoothed: last.cost_smoothed,
            end_exact: last.cost_exact,
            wardrop_gap: last.wardrop_gap,
            flagged: false,
            truncated: records.iter().any(|r| r.truncated),
        });
    }
    traj.records.extend(records);
    Ok((x, traj))
}

/// Spread of payoffs over used paths, worst flow.
pub fn payoff_spread(x: &SplitState, f: &[Vec<f64>], loads: &[f64]) -> f64 {
    x.0.iter()
        .zip(f)
        .zip(loads)
        .map(|((row, fr), &load)| {
            let used = row.iter().zip(fr).filter(|(v, _)| **v > USED_FRACTION * load).map(|(_, f)| *f);
            let (lo, hi) = used.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            if hi >= lo {
                hi - lo
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEquilibrium {
    pub payoff: f64,
    pub usage: f64,
    pub used: bool,
    /// `F - lambda` on unused paths.
    pub slack: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowEquilibrium {
    pub flow_id: usize,
    /// Mass-weighted mean payoff.
    pub lambda: f64,
    pub paths: Vec<PathEquilibrium>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub flows: Vec<FlowEquilibrium>,
    /// Worst spread of payoffs over used paths.
    pub wardrop_gap: f64,
    /// Worst `lambda - F` over unused paths (0 if none is better).
    pub unused_violation: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Wardrop diagnostics for arbitrary payoffs.
pub fn equilibrium_report(scn: &Scenario, x: &SplitState, f: &[Vec<f64>], tol: f64) -> EquilibriumReport {
    let loads = scn.loads();
    let lambdas = mean_payoffs(x, f);
    let mut unused_violation: f64 = 0.0;
    let flows = scn
        .flows
        .iter()
        .enumerate()
        .map(|(i, flow)| {
            let lambda = lambdas[i];
            let paths = x.0[i]
                .iter()
                .zip(&f[i])
                .map(|(&usage, &payoff)| {
                    let used = usage > USED_FRACTION * loads[i];
                    let slack = (!used).then_some(payoff - lambda);
                    if let Some(s) = slack {
                        if s.is_finite() {
                            unused_violation = unused_violation.max(-s);
                        }
                    }
                    PathEquilibrium {
                        payoff,
                        usage,
                        used,
                        slack,
                    }
                })
                .collect();
            FlowEquilibrium {
                flow_id: flow.id,
                lambda,
                paths,
            }
        })
        .collect();
    let wardrop_gap = payoff_spread(x, f, &loads);
    EquilibriumReport {
        flows,
        wardrop_gap,
        unused_violation,
        tol,
        passed: wardrop_gap <= tol && unused_violation <= tol,
    }
}

/// Checks that used paths share a payoff and unused paths pay no less.
pub fn wardrop_check(state: &SystemState, scn: &Scenario, sp: &SmoothingParams, tol: f64) -> EquilibriumReport {
    let f = cost::payoffs(state, scn, sp);
    equilibrium_report(scn, &state.x, &f, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    /// `max |F - lambda|` over used paths.
    pub stationarity: f64,
    /// `max (lambda - F)^+` over unused paths.
    pub complementarity: f64,
    /// `max |sum_p x^p - load|`.
    pub feasibility: f64,
    pub tol: f64,
    pub passed: bool,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.complementarity).max(self.feasibility)
    }
}

/// First-order optimality residuals of the smoothed cost over the split
/// simplex, with `lambda_i` the mass-weighted mean payoff.
pub fn kkt_check(state: &SystemState, scn: &Scenario, sp: &SmoothingParams, tol: f64) -> KktResiduals {
    let f = cost::payoffs(state, scn, sp);
    kkt_residuals(scn, &state.x, &f, tol)
}

pub fn kkt_residuals(scn: &Scenario, x: &SplitState, f: &[Vec<f64>], tol: f64) -> KktResiduals {
    let loads = scn.loads();
    let lambdas = mean_payoffs(x, f);
    let (mut stat, mut comp, mut feas) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..x.0.len() {
        feas = feas.max((x.mass(i) - loads[i]).abs());
        if !lambdas[i].is_finite() {
            continue;
        }
        for (&v, &fp) in x.0[i].iter().zip(&f[i]) {
            if v > USED_FRACTION * loads[i] {
                stat = stat.max((fp - lambdas[i]).abs());
            } else {
                comp = comp.max(lambdas[i] - fp);
            }
        }
    }
    let mut out = KktResiduals {
        stationarity: stat,
        complementarity: comp,
        feasibility: feas,
        tol,
        passed: false,
    };
    out.passed = out.max() <= tol;
    out
}

/// Gradient of the smoothed cost in every coordinate, for diagnostics.
pub fn smoothed_gradient(state: &SystemState, scn: &Scenario, sp: &SmoothingParams) -> (Vec<Vec<f64>>, Vec<f64>) {
    (cost::payoffs(state, scn, sp), capacity_gradients(state, scn, sp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioConfig;
    use approx::assert_abs_diff_eq;

    struct Fixed(Vec<Vec<f64>>);

    impl PayoffModel for Fixed {
        fn payoffs(&self, _x: &SplitState) -> Vec<Vec<f64>> {
            self.0.clone()
        }
        fn potential(&self, x: &SplitState) -> f64 {
            x.0.iter().zip(&self.0).flat_map(|(a, b)| a.iter().zip(b).map(|(a, b)| a * b)).sum()
        }
        fn exact_cost(&self, x: &SplitState) -> f64 {
            self.potential(x)
        }
    }

    fn fig2() -> Scenario {
        Scenario::from_config(&ScenarioConfig::fig2()).unwrap()
    }

    #[test]
    fn equal_payoffs_freeze() {
        let dx = bnn_field(0, &[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(dx, vec![0.0; 3]);
    }

    #[test]
    fn hand_evaluated_field() {
        let dx = bnn_field(0, &[1.0, 1.0], &[2.0, 4.0]).unwrap();
        assert_eq!(dx, vec![1.0, -1.0]);
    }

    #[test]
    fn zero_mass_is_degenerate() {
        assert!(matches!(bnn_field(3, &[0.0, 0.0], &[1.0, 2.0]), Err(Error::DegenerateFlow(3))));
    }

    #[test]
    fn field_conserves_mass() {
        let dx = bnn_field(0, &[0.3, 1.7, 0.0, 2.2], &[5.0, 1.0, 0.5, 7.0]).unwrap();
        assert!(dx.iter().sum::<f64>().abs() < 1e-14);
    }

    #[test]
    fn extinct_better_path_resurfaces() {
        let dx = bnn_field(0, &[2.0, 0.0], &[3.0, 1.0]).unwrap();
        assert!(dx[1] > 0.0);
    }

    #[test]
    fn euler_step_examples() {
        let m = Fixed(vec![vec![2.0, 4.0]]);
        let x = SplitState(vec![vec![1.0, 1.0]]);
        let next = bnn_step(&x, &m, &[2.0], 0.1, true).unwrap();
        assert_abs_diff_eq!(next.0[0][0], 1.1, epsilon = 1e-12);
        assert_abs_diff_eq!(next.0[0][1], 0.9, epsilon = 1e-12);

        let still = Fixed(vec![vec![3.0, 3.0]]);
        assert_eq!(bnn_step(&x, &still, &[2.0], 0.1, true).unwrap(), x);

        // Path 1 costs far more: an oversized step drives it below zero.
        let m = Fixed(vec![vec![10.0, 0.0]]);
        let x = SplitState(vec![vec![0.01, 1.99]]);
        let next = bnn_step(&x, &m, &[2.0], 100.0, true).unwrap();
        assert_eq!(next.0[0][0], 0.0);
        assert_abs_diff_eq!(next.0[0][1], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn capacity_step_examples() {
        let y = CapacityState(vec![1.0, 0.0, 30.0]);
        assert_eq!(capacity_step(&y, &[0.0, 0.0, 0.0], 0.5, 1.0), y);
        let next = capacity_step(&y, &[0.0, -1.3, 2.8], 0.5, 1.0);
        assert!(next.0[1] > 0.0);
        assert_abs_diff_eq!(next.0[2], 30.0 - 0.5 * 2.8, epsilon = 1e-12);
        assert_eq!(capacity_step(&y, &[5.0, 0.0, 0.0], 0.5, 1.0).0[0], 0.0);
    }

    #[test]
    fn capacity_gradient_signs() {
        let scn = fig2();
        let sp = SmoothingParams::new(-100.0).unwrap();
        let mut st = SystemState::initial(&scn);
        st.y = CapacityState(vec![50.0, 50.0]);
        // y >> flows: capacity shrinks at max alpha
        assert_abs_diff_eq!(capacity_gradient(0, &st, &scn, &sp), 2.8, epsilon = 1e-9);
        assert_abs_diff_eq!(capacity_gradient(1, &st, &scn, &sp), 1.8, epsilon = 1e-9);
        st.y = CapacityState(vec![0.01, 0.01]);
        assert!(capacity_gradient(0, &st, &scn, &sp) < -1.2);
    }

    #[test]
    fn small_timescale_descends_and_conserves() {
        let scn = fig2();
        let sp = SmoothingParams::new(-100.0).unwrap();
        let y = CapacityState(vec![2.0, 2.0]);
        let model = Decoupled { scn: &scn, sp, y: &y };
        let loads = scn.loads();
        let x0 = SplitState::uniform(&scn);
        let (x, recs) = run_small_timescale(&x0, &y.0, &model, &loads, &BnnParams::default(), 1, 0.0).unwrap();
        let mut prev = model.potential(&x0);
        for r in &recs {
            assert!(r.cost_smoothed <= prev + 1e-12);
            prev = r.cost_smoothed;
            for i in 0..3 {
                assert!((r.x.mass(i) - loads[i]).abs() <= 1e-12 * loads[i]);
            }
        }
        assert!(x.0.iter().flatten().all(|v| *v >= 0.0));
    }

    #[test]
    fn single_flow_without_coding_settles_on_cheapest_path() {
        let mut cfg = ScenarioConfig::fig2();
        cfg.flows = vec![cfg.flows[2].clone()];
        let scn = Scenario::from_config(&cfg).unwrap();
        let sp = SmoothingParams::new(-100.0).unwrap();
        let run = run_decoupled(&scn, &sp, &BnnParams::default(), &ControllerParams::default(), None).unwrap();
        assert!(run.state.x.get(0, 0) < run.state.x.get(0, 1));
        let model = Decoupled { scn: &scn, sp, y: &run.state.y };
        let settled = equilibrate(&run.state.x, &model, &scn.loads(), 1e-9, 100_000).unwrap();
        assert!(settled.gap <= 1e-9);
        let x = settled.x.flow(0);
        assert!(x[0] < 1e-6 * 3.56, "{x:?}");
        assert_abs_diff_eq!(x[1], 3.56, epsilon = 1e-3 * 3.56);
    }

    #[test]
    fn wardrop_and_kkt_on_simple_states() {
        let scn = fig2();
        let sp = SmoothingParams::new(-100.0).unwrap();
        let mut st = SystemState::initial(&scn);
        st.y = CapacityState(vec![0.0, 0.0]);
        // flow 3 split over paths with different base cost
        let rep = wardrop_check(&st, &scn, &sp, 0.05);
        assert!(!rep.passed);
        assert_abs_diff_eq!(rep.wardrop_gap, 0.4, epsilon = 1e-9);
        assert!(!kkt_check(&st, &scn, &sp, 0.05).passed);

        st.x = SplitState(vec![vec![2.0, 2.73], vec![1.0, 1.69], vec![0.0, 3.56]]);
        let rep = wardrop_check(&st, &scn, &sp, 1e-9);
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.flows[2].paths[0].slack.map(|s| (s * 1e9).round() / 1e9), Some(0.4));
        assert!(kkt_check(&st, &scn, &sp, 1e-9).passed);
    }
}
