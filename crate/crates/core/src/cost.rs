//! Cost arithmetic: exact min-based costs, r-mean smoothed costs, rebates,
//! payoffs and analytic gradients.
//!
//! Conventions: payoffs are costs per unit rate (lower is better) and equal
//! the partial derivatives of the smoothed total cost.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{HyperLink, Scenario, Side};

/// Default zero-flow guard.
pub const DEFAULT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingParams {
    pub r: f64,
    pub floor: f64,
}

impl SmoothingParams {
    pub fn new(r: f64) -> Result<Self> {
        Self::with_floor(r, DEFAULT_FLOOR)
    }

    pub fn with_floor(r: f64, floor: f64) -> Result<Self> {
        if !(r < 0.0) || !r.is_finite() {
            return Err(Error::InvalidExponent(r));
        }
        if !(floor > 0.0) {
            return Err(Error::Parameter(format!("floor must be positive, got {floor}")));
        }
        Ok(SmoothingParams { r, floor })
    }

    /// `M_r(a, b)` with inputs below the floor treated as zero.
    pub fn mean(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if lo < self.floor {
            return 0.0;
        }
        stable_mean(lo, hi, self.r)
    }

    /// `(u / M_r(u, v))^(r-1)`, the weight that appears in every partial
    /// derivative of an r-mean term. Both arguments are raised to the floor.
    pub fn ratio_weight(&self, u: f64, v: f64) -> f64 {
        let u = u.max(self.floor);
        let v = v.max(self.floor);
        // (u / M_r)^r = 2 / (1 + (v/u)^r); overflow of (v/u)^r sends it to 0.
        let q = 2.0 / (1.0 + (v / u).powf(self.r));
        q.powf((self.r - 1.0) / self.r)
    }
}

// m * ((1 + (M/m)^r) / 2)^(1/r) with 0 < m <= M
fn stable_mean(lo: f64, hi: f64, r: f64) -> f64 {
    lo * ((1.0 + (hi / lo).powf(r)) / 2.0).powf(1.0 / r)
}

/// Generalized r-mean of two non-negative values; `M_r(0, b) = 0`.
pub fn r_mean(a: f64, b: f64, r: f64) -> Result<f64> {
    if !(r < 0.0) {
        return Err(Error::InvalidExponent(r));
    }
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if lo <= 0.0 {
        return Ok(0.0);
    }
    Ok(stable_mean(lo, hi, r))
}

/// Per-flow, per-path traffic split `x_i^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitState(pub Vec<Vec<f64>>);

impl SplitState {
    /// Each flow's load spread evenly over its paths.
    pub fn uniform(scn: &Scenario) -> Self {
        SplitState(
            scn.flows
                .iter()
                .map(|f| vec![f.load / f.paths.len() as f64; f.paths.len()])
                .collect(),
        )
    }

    pub fn get(&self, flow: usize, path: usize) -> f64 {
        self.0[flow][path]
    }

    pub fn flow(&self, flow: usize) -> &[f64] {
        &self.0[flow]
    }

    pub fn mass(&self, flow: usize) -> f64 {
        self.0[flow].iter().sum()
    }

    pub fn flat(&self) -> Vec<f64> {
        self.0.iter().flatten().copied().collect()
    }

    /// Checks shape, sign and per-flow mass against `scn` (relative mass
    /// tolerance 1e-9).
    pub fn check(&self, scn: &Scenario) -> Result<()> {
        if self.0.len() != scn.flows.len() {
            return Err(Error::Parameter(format!(
                "split has {} flows, scenario has {}",
                self.0.len(),
                scn.flows.len()
            )));
        }
        for (row, f) in self.0.iter().zip(&scn.flows) {
            if row.len() != f.paths.len() {
                return Err(Error::Parameter(format!("flow {} expects {} paths", f.id, f.paths.len())));
            }
            if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::Parameter(format!("flow {} has a negative or non-finite split", f.id)));
            }
            let m: f64 = row.iter().sum();
            if (m - f.load).abs() > 1e-9 * f.load.max(1.0) {
                return Err(Error::Parameter(format!("flow {} carries {m}, load is {}", f.id, f.load)));
            }
        }
        Ok(())
    }

    /// Rebuilds a state with the same shape as `self` from a flat vector.
    pub fn with_flat(&self, flat: &[f64]) -> Self {
        let mut it = flat.iter().copied();
        SplitState(
            self.0
                .iter()
                .map(|row| row.iter().map(|_| it.next().expect("flat length")).collect())
                .collect(),
        )
    }
}

/// Per-hyper-link capacity `y_h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityState(pub Vec<f64>);

impl CapacityState {
    pub fn zeros(scn: &Scenario) -> Self {
        CapacityState(vec![0.0; scn.hyperlinks.len()])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub x: SplitState,
    pub y: CapacityState,
}

impl SystemState {
    /// [`SplitState::check`] plus non-negative, finite capacities.
    pub fn check(&self, scn: &Scenario) -> Result<()> {
        self.x.check(scn)?;
        if self.y.0.len() != scn.hyperlinks.len() || self.y.0.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Parameter(format!(
                "expected {} non-negative capacities",
                scn.hyperlinks.len()
            )));
        }
        Ok(())
    }

    pub fn initial(scn: &Scenario) -> Self {
        SystemState {
            x: SplitState::uniform(scn),
            y: CapacityState::zeros(scn),
        }
    }

    fn sides(&self, h: &HyperLink) -> (f64, f64) {
        (
            self.x.get(h.side_a.flow, h.side_a.path),
            self.x.get(h.side_b.flow, h.side_b.path),
        )
    }
}

/// `T(h) = a_a min(x_a, y) + a_b min(x_b, y) - max(a_a, a_b) y`; may be negative.
pub fn exact_rebate(h: &HyperLink, x_a: f64, x_b: f64, y: f64) -> f64 {
    h.side_a.alpha * x_a.min(y) + h.side_b.alpha * x_b.min(y) - h.alpha_max() * y
}

pub fn smoothed_rebate(h: &HyperLink, x_a: f64, x_b: f64, y: f64, sp: &SmoothingParams) -> f64 {
    h.side_a.alpha * sp.mean(x_a, y) + h.side_b.alpha * sp.mean(x_b, y) - h.alpha_max() * y
}

/// Uncoded cost `sum beta x`.
pub fn base_cost(x: &SplitState, scn: &Scenario) -> f64 {
    scn.hyperpaths
        .iter()
        .zip(&x.0)
        .flat_map(|(hps, xs)| hps.iter().zip(xs).map(|(hp, &v)| hp.base_cost * v))
        .sum()
}

pub fn exact_total_cost(state: &SystemState, scn: &Scenario) -> f64 {
    let rebates: f64 = scn
        .hyperlinks
        .iter()
        .map(|h| {
            let (a, b) = state.sides(h);
            exact_rebate(h, a, b, state.y.0[h.id])
        })
        .sum();
    base_cost(&state.x, scn) - rebates
}

pub fn smoothed_total_cost(state: &SystemState, scn: &Scenario, sp: &SmoothingParams) -> f64 {
    let rebates: f64 = scn
        .hyperlinks
        .iter()
        .map(|h| {
            let (a, b) = state.sides(h);
            smoothed_rebate(h, a, b, state.y.0[h.id], sp)
        })
        .sum();
    base_cost(&state.x, scn) - rebates
}

/// `F_i^p = beta_i^p - sum_h (alpha/2) (x_i^p / M_r(x_i^p, y_h))^(r-1)`.
pub fn payoff(flow: usize, path: usize, state: &SystemState, scn: &Scenario, sp: &SmoothingParams) -> f64 {
    let hp = &scn.hyperpaths[flow][path];
    let x = state.x.get(flow, path);
    hp.base_cost
        - hp.hyperlinks
            .iter()
            .map(|&(h, side)| {
                let alpha = scn.hyperlinks[h].side(side).alpha;
                0.5 * alpha * sp.ratio_weight(x, state.y.0[h])
            })
            .sum::<f64>()
}

/// Payoffs of every hyper-path, indexed like the split state.
pub fn payoffs(state: &SystemState, scn: &Scenario, sp: &SmoothingParams) -> Vec<Vec<f64>> {
    (0..scn.flows.len())
        .map(|i| {
            (0..scn.flows[i].paths.len())
                .map(|p| payoff(i, p, state, scn, sp))
                .collect()
        })
        .collect()
}

/// `dT~/dy_h`.
pub fn rebate_grad_y(h: &HyperLink, x_a: f64, x_b: f64, y: f64, sp: &SmoothingParams) -> f64 {
    0.5 * h.side_a.alpha * sp.ratio_weight(y, x_a) + 0.5 * h.side_b.alpha * sp.ratio_weight(y, x_b)
        - h.alpha_max()
}

/// `dC~/dy_h` for every hyper-link.
pub fn capacity_gradients(state: &SystemState, scn: &Scenario, sp: &SmoothingParams) -> Vec<f64> {
    scn.hyperlinks
        .iter()
        .map(|h| {
            let (a, b) = state.sides(h);
            -rebate_grad_y(h, a, b, state.y.0[h.id], sp)
        })
        .collect()
}

/// Exact cost of the coupled (no hyper-link) model: coding saves
/// `min(alpha) * min(x_a, x_b)` at every coding point.
pub fn coupled_exact_cost(x: &SplitState, scn: &Scenario) -> f64 {
    let savings: f64 = scn
        .hyperlinks
        .iter()
        .map(|h| {
            h.alpha_min() * x.get(h.side_a.flow, h.side_a.path).min(x.get(h.side_b.flow, h.side_b.path))
        })
        .sum();
    base_cost(x, scn) - savings
}

pub fn coupled_smoothed_cost(x: &SplitState, scn: &Scenario, sp: &SmoothingParams) -> f64 {
    let savings: f64 = scn
        .hyperlinks
        .iter()
        .map(|h| h.alpha_min() * sp.mean(x.get(h.side_a.flow, h.side_a.path), x.get(h.side_b.flow, h.side_b.path)))
        .sum();
    base_cost(x, scn) - savings
}

pub fn coupled_payoffs(x: &SplitState, scn: &Scenario, sp: &SmoothingParams) -> Vec<Vec<f64>> {
    scn.hyperpaths
        .iter()
        .map(|hps| {
            hps.iter()
                .map(|hp| {
                    let own = x.get(hp.flow, hp.path);
                    hp.base_cost
                        - hp.hyperlinks
                            .iter()
                            .map(|&(h, side)| {
                                let h = &scn.hyperlinks[h];
                                let other = match side {
                                    Side::A => &h.side_b,
                                    Side::B => &h.side_a,
                                };
                                0.5 * h.alpha_min() * sp.ratio_weight(own, x.get(other.flow, other.path))
                            })
                            .sum::<f64>()
                })
                .collect()
        })
        .collect()
}

/// Central difference of `f` along coordinate `k`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, point: &[f64], k: usize, step: f64) -> f64 {
    let mut p = point.to_vec();
    p[k] = point[k] + step;
    let up = f(&p);
    p[k] = point[k] - step;
    let down = f(&p);
    (up - down) / (2.0 * step)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradCheck {
    /// Worst payoff mismatch against `dC~/dx`.
    pub max_rel_err_x: f64,
    /// Worst `dC~/dy` mismatch.
    pub max_rel_err_y: f64,
}

impl GradCheck {
    pub fn max(&self) -> f64 {
        self.max_rel_err_x.max(self.max_rel_err_y)
    }
}

/// Relative error with a unit floor on the denominator.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / numeric.abs().max(1.0)
}

/// Compares analytic payoffs and capacity gradients with central differences
/// of the smoothed total cost at `state`. Split coordinates are perturbed
/// independently (mass is not conserved by the probe).
pub fn finite_diff_check(state: &SystemState, scn: &Scenario, sp: &SmoothingParams, step: f64) -> GradCheck {
    let nx = scn.num_paths();
    let mut point = state.x.flat();
    point.extend_from_slice(&state.y.0);
    let cost = |v: &[f64]| {
        let s = SystemState {
            x: state.x.with_flat(&v[..nx]),
            y: CapacityState(v[nx..].to_vec()),
        };
        smoothed_total_cost(&s, scn, sp)
    };
    let analytic_x: Vec<f64> = payoffs(state, scn, sp).into_iter().flatten().collect();
    let analytic_y = capacity_gradients(state, scn, sp);
    let max_x = analytic_x
        .iter()
        .enumerate()
        .map(|(k, &a)| rel_err(a, central_difference(cost, &point, k, step)))
        .fold(0.0, f64::max);
    let max_y = analytic_y
        .iter()
        .enumerate()
        .map(|(k, &a)| rel_err(a, central_difference(cost, &point, nx + k, step)))
        .fold(0.0, f64::max);
    GradCheck {
        max_rel_err_x: max_x,
        max_rel_err_y: max_y,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioConfig;
    use crate::topology::HyperLinkSide;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn hl(alpha_a: f64, alpha_b: f64) -> HyperLink {
        let side = |alpha| HyperLinkSide {
            flow: 0,
            path: 0,
            next_hop: "n".into(),
            alpha,
        };
        HyperLink {
            id: 0,
            coding_node: "k".into(),
            side_a: side(alpha_a),
            side_b: side(alpha_b),
        }
    }

    fn sp(r: f64) -> SmoothingParams {
        SmoothingParams::new(r).unwrap()
    }

    fn fig2() -> Scenario {
        Scenario::from_config(&ScenarioConfig::fig2()).unwrap()
    }

    fn table3_lp() -> SystemState {
        SystemState {
            x: SplitState(vec![vec![2.69, 2.04], vec![2.69, 0.0], vec![0.0, 3.56]]),
            y: CapacityState(vec![3.56, 2.69]),
        }
    }

    #[test]
    fn r_mean_examples() {
        assert_abs_diff_eq!(r_mean(3.7, 3.7, -5.0).unwrap(), 3.7, epsilon = 1e-12);
        assert_abs_diff_eq!(r_mean(1.0, 2.0, -100.0).unwrap(), 2f64.powf(0.01), epsilon = 1e-7);
        assert_abs_diff_eq!(r_mean(1.0, 2.0, -100.0).unwrap(), 1.0069556, epsilon = 1e-7);
        assert_eq!(r_mean(0.0, 5.0, -100.0).unwrap(), 0.0);
        assert!(matches!(r_mean(1.0, 2.0, 0.0), Err(Error::InvalidExponent(_))));
        assert!(matches!(r_mean(1.0, 2.0, 2.0), Err(Error::InvalidExponent(_))));
        assert!(SmoothingParams::new(1.0).is_err());
    }

    #[test]
    fn r_mean_does_not_overflow_at_extreme_ratios() {
        let m = r_mean(1e-6, 1e6, -100.0).unwrap();
        assert!(m.is_finite());
        assert_abs_diff_eq!(m, 1e-6 * 2f64.powf(0.01), epsilon = 1e-15);
    }

    #[test]
    fn exact_rebate_examples() {
        assert_abs_diff_eq!(exact_rebate(&hl(1.3, 2.8), 2.04, 3.56, 3.56), 2.652, epsilon = 1e-12);
        assert_eq!(exact_rebate(&hl(1.3, 2.8), 0.0, 0.0, 0.0), 0.0);
        assert_abs_diff_eq!(exact_rebate(&hl(1.0, 1.0), 0.0, 1.0, 2.0), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn smoothed_rebate_examples() {
        let s = sp(-100.0);
        assert_eq!(smoothed_rebate(&hl(1.3, 2.8), 2.0, 3.0, 0.0, &s), 0.0);
        assert_abs_diff_eq!(smoothed_rebate(&hl(1.3, 2.8), 1.0, 1.0, 1.0, &s), 1.3, epsilon = 1e-12);
        let h = hl(1.3, 2.8);
        let (xa, xb, y) = (2.04, 3.56, 3.56);
        let gap = (smoothed_rebate(&h, xa, xb, y, &s) - exact_rebate(&h, xa, xb, y)).abs();
        assert!(gap <= (1.3 + 2.8) * y * (2f64.powf(0.01) - 1.0));
    }

    #[test]
    fn fig2_costs() {
        let scn = fig2();
        let zero = SystemState {
            x: SplitState(vec![vec![0.0; 2]; 3]),
            y: CapacityState(vec![0.0; 2]),
        };
        assert_eq!(exact_total_cost(&zero, &scn), 0.0);
        assert_eq!(smoothed_total_cost(&zero, &scn, &sp(-100.0)), 0.0);

        let mut lp = table3_lp();
        assert_abs_diff_eq!(base_cost(&lp.x, &scn), 57.641, epsilon = 1e-9);
        assert_abs_diff_eq!(exact_total_cost(&lp, &scn), 50.685, epsilon = 1e-9);
        lp.y = CapacityState(vec![0.0, 0.0]);
        assert_abs_diff_eq!(exact_total_cost(&lp, &scn), 57.641, epsilon = 1e-9);
    }

    #[test]
    fn payoff_limits() {
        let scn = fig2();
        let s = sp(-100.0);
        let mut st = table3_lp();
        // flow 2 path 2 has no hyper-links
        assert_eq!(payoff(1, 1, &st, &scn, &s), scn.flows[1].paths[1].base_cost);
        // x >> y: discount vanishes
        st.x.0[0][1] = 3.0;
        st.y.0[0] = 1.0;
        assert_abs_diff_eq!(payoff(0, 1, &st, &scn, &s), 6.2, epsilon = 1e-12);
        // x << y: discount -> alpha * 2^(-1/r)... to first order alpha
        st.x.0[0][1] = 0.5;
        st.y.0[0] = 3.0;
        let expected = 6.2 - 0.5 * 1.3 * 2f64.powf((s.r - 1.0) / s.r);
        assert_abs_diff_eq!(payoff(0, 1, &st, &scn, &s), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(6.2 - payoff(0, 1, &st, &scn, &s), 1.3, epsilon = 0.01);
    }

    #[test]
    fn rebate_grad_y_limits() {
        let s = sp(-100.0);
        let h = hl(1.3, 2.8);
        assert_abs_diff_eq!(rebate_grad_y(&h, 1.0, 2.0, 50.0, &s), -2.8, epsilon = 1e-9);
        assert_abs_diff_eq!(rebate_grad_y(&h, 10.0, 20.0, 0.5, &s), 1.3, epsilon = 0.03);
        assert_abs_diff_eq!(rebate_grad_y(&hl(2.0, 2.0), 1.5, 1.5, 1.5, &s), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_flow_payoff_is_finite() {
        let scn = fig2();
        let s = sp(-100.0);
        let st = table3_lp();
        for row in payoffs(&st, &scn, &s) {
            assert!(row.iter().all(|v| v.is_finite()));
        }
        let z = SystemState {
            x: SplitState(vec![vec![0.0; 2]; 3]),
            y: CapacityState(vec![0.0; 2]),
        };
        assert!(capacity_gradients(&z, &scn, &s).iter().all(|g| g.is_finite()));
    }

    #[test]
    fn linear_path_gradient_is_exact() {
        let scn = fig2();
        let s = sp(-8.0);
        let st = table3_lp();
        let point = st.x.flat();
        // flow 2 path 2 is x index 3
        let f = |v: &[f64]| {
            smoothed_total_cost(
                &SystemState {
                    x: st.x.with_flat(v),
                    y: st.y.clone(),
                },
                &scn,
                &s,
            )
        };
        let fd = central_difference(f, &point, 3, 0.5);
        assert_abs_diff_eq!(payoff(1, 1, &st, &scn, &s), fd, epsilon = 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences_at_interior_state() {
        let scn = fig2();
        let st = SystemState {
            x: SplitState(vec![vec![2.1, 2.63], vec![1.7, 0.99], vec![1.2, 2.36]]),
            y: CapacityState(vec![2.2, 1.9]),
        };
        let g = finite_diff_check(&st, &scn, &sp(-8.0), 1e-5);
        assert!(g.max() <= 1e-4, "{g:?}");
    }

    #[test]
    fn coupled_cost_profiles_out_capacity() {
        // With y chosen at min(x_a, x_b) the exact rebate equals the coupled saving.
        let scn = fig2();
        let mut st = table3_lp();
        st.y = CapacityState(vec![2.04, 2.69]);
        assert_abs_diff_eq!(coupled_exact_cost(&st.x, &scn), exact_total_cost(&st, &scn), epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn sandwich(a in 1e-3f64..1e3, b in 1e-3f64..1e3, r in prop::sample::select(vec![-10.0, -50.0, -100.0])) {
            let m = r_mean(a, b, r).unwrap();
            let lo = a.min(b);
            prop_assert!(m >= lo * (1.0 - 1e-12));
            prop_assert!(m <= lo * 2f64.powf(-1.0 / r) * (1.0 + 1e-12));
        }

        #[test]
        fn smoothing_error_shrinks_with_r(
            xs in prop::collection::vec(0.1f64..5.0, 6),
            ys in prop::collection::vec(0.1f64..5.0, 2),
        ) {
            let scn = fig2();
            let st = SystemState {
                x: SplitState(vec![xs[0..2].to_vec(), xs[2..4].to_vec(), xs[4..6].to_vec()]),
                y: CapacityState(ys),
            };
            let exact = exact_total_cost(&st, &scn);
            let gaps: Vec<f64> = [-10.0, -50.0, -100.0]
                .iter()
                .map(|&r| (smoothed_total_cost(&st, &scn, &sp(r)) - exact).abs())
                .collect();
            prop_assert!(gaps[0] >= gaps[1] - 1e-12 && gaps[1] >= gaps[2] - 1e-12, "{:?}", gaps);
        }

        #[test]
        fn smoothed_cost_convex_in_each_block(
            a in prop::collection::vec(0.1f64..5.0, 8),
            b in prop::collection::vec(0.1f64..5.0, 8),
        ) {
            let scn = fig2();
            let s = sp(-10.0);
            let mk = |v: &[f64]| SystemState {
                x: SplitState(vec![v[0..2].to_vec(), v[2..4].to_vec(), v[4..6].to_vec()]),
                y: CapacityState(v[6..8].to_vec()),
            };
            let mid: Vec<f64> = a.iter().zip(&b).map(|(p, q)| 0.5 * (p + q)).collect();
            // X block, Y fixed at a's
            let mut xb = b.clone();
            xb[6..].copy_from_slice(&a[6..]);
            let mut xm = mid.clone();
            xm[6..].copy_from_slice(&a[6..]);
            let c = |v: &[f64]| smoothed_total_cost(&mk(v), &scn, &s);
            prop_assert!(c(&xm) <= 0.5 * (c(&a) + c(&xb)) + 1e-9);
            // Y block, X fixed at a's
            let mut yb = a.clone();
            yb[6..].copy_from_slice(&b[6..]);
            let mut ym = a.clone();
            ym[6..].copy_from_slice(&mid[6..]);
            prop_assert!(c(&ym) <= 0.5 * (c(&a) + c(&yb)) + 1e-9);
        }

        #[test]
        fn no_capacity_means_no_rebate(xs in prop::collection::vec(0.0f64..5.0, 6)) {
            let scn = fig2();
            let st = SystemState {
                x: SplitState(vec![xs[0..2].to_vec(), xs[2..4].to_vec(), xs[4..6].to_vec()]),
                y: CapacityState(vec![0.0, 0.0]),
            };
            prop_assert!((exact_total_cost(&st, &scn) - base_cost(&st.x, &scn)).abs() < 1e-12);
        }
    }
}
