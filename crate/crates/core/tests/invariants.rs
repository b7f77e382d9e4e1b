use mpnc_core::baselines;
use mpnc_core::cost::{exact_total_cost, smoothed_total_cost};
use mpnc_core::dynamics::{self, integrate_bnn, Coupled, Decoupled, PayoffModel};
use mpnc_core::generate::{random_scenario, random_state, GeneratorParams};
use mpnc_core::{CapacityState, Scenario, ScenarioConfig, SmoothingParams, SystemState};
use proptest::prelude::*;

fn fig2() -> Scenario {
    Scenario::from_config(&ScenarioConfig::fig2()).unwrap()
}

fn small(seed: u64) -> Scenario {
    Scenario::from_config(&random_scenario(&GeneratorParams::small(), seed).unwrap()).unwrap()
}

fn assert_feasible(scn: &Scenario, state: &SystemState) -> Result<(), TestCaseError> {
    for (i, f) in scn.flows.iter().enumerate() {
        prop_assert!((state.x.mass(i) - f.load).abs() <= 1e-12 * f.load, "mass {} vs {}", state.x.mass(i), f.load);
        prop_assert!(state.x.flow(i).iter().all(|v| *v >= 0.0));
    }
    prop_assert!(state.y.0.iter().all(|v| *v >= 0.0));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bnn_step_conserves_mass_and_lowers_potential(seed in 0u64..10_000, state_seed in 0u64..10_000, dt in 0.001f64..2.0) {
        let scn = small(seed);
        let state = random_state(&scn, state_seed);
        let sp = SmoothingParams::new(-100.0).unwrap();
        let model = Decoupled { scn: &scn, sp, y: &state.y };
        let step = integrate_bnn(&state.x, &model, &scn.loads(), dt, true).unwrap();
        let next = SystemState { x: step.x, y: state.y.clone() };
        assert_feasible(&scn, &next)?;
        prop_assert!(model.potential(&next.x) <= model.potential(&state.x));
    }

    #[test]
    fn coupled_step_lowers_potential(state_seed in 0u64..10_000, dt in 0.001f64..2.0) {
        let scn = fig2();
        let state = random_state(&scn, state_seed);
        let model = Coupled { scn: &scn, sp: SmoothingParams::new(-50.0).unwrap() };
        let step = integrate_bnn(&state.x, &model, &scn.loads(), dt, true).unwrap();
        prop_assert!(model.potential(&step.x) <= model.potential(&state.x));
    }

    #[test]
    fn capacity_update_keeps_y_non_negative_and_lowers_cost(state_seed in 0u64..10_000, kappa in 0.01f64..5.0) {
        let scn = fig2();
        let state = random_state(&scn, state_seed);
        let sp = SmoothingParams::new(-100.0).unwrap();
        let ctrl = dynamics::ControllerParams { kappa, ..Default::default() };
        let y = dynamics::advance_capacities(&state, &scn, &sp, &ctrl);
        let next = SystemState { x: state.x.clone(), y };
        assert_feasible(&scn, &next)?;
        prop_assert!(smoothed_total_cost(&next, &scn, &sp) <= smoothed_total_cost(&state, &scn, &sp));
    }

    #[test]
    fn oracle_bounds_every_feasible_state(seed in 0u64..10_000, state_seed in 0u64..10_000) {
        let scn = small(seed);
        let oracle = baselines::solve_optimal(&scn).unwrap();
        let state = random_state(&scn, state_seed);
        prop_assert!(oracle.cost <= exact_total_cost(&state, &scn) + 1e-9);
        let zero = SystemState { x: state.x.clone(), y: CapacityState::zeros(&scn) };
        prop_assert!(oracle.cost <= exact_total_cost(&zero, &scn) + 1e-9);
    }

    #[test]
    fn generated_scenarios_round_trip(seed in 0u64..10_000) {
        let cfg = random_scenario(&GeneratorParams::small(), seed).unwrap();
        let back = ScenarioConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        prop_assert_eq!(&cfg, &back);
        prop_assert!(Scenario::from_config(&back).is_ok());
    }
}

#[test]
fn short_runs_stay_feasible_on_random_scenarios() {
    let sp = SmoothingParams::new(-100.0).unwrap();
    let bnn = dynamics::BnnParams::default();
    let ctrl = dynamics::ControllerParams {
        n_large: 5,
        ..Default::default()
    };
    for seed in 0..10 {
        let scn = small(seed);
        let init = random_state(&scn, seed);
        let run = dynamics::run_decoupled(&scn, &sp, &bnn, &ctrl, Some(init)).unwrap();
        for rec in &run.trajectory.records {
            let state = SystemState {
                x: rec.x.clone(),
                y: CapacityState(rec.y.clone()),
            };
            assert_feasible(&scn, &state).unwrap();
        }
        assert_eq!(run.trajectory.max_small_step_increase(), 0.0);
    }
}
