use criterion::{criterion_group, criterion_main, Criterion};
use mpnc_core::baselines;
use mpnc_core::cost::{capacity_gradients, payoffs};
use mpnc_core::dynamics::params_from;
use mpnc_core::generate::{random_scenario, random_state, GeneratorParams};
use mpnc_core::{Scenario, ScenarioConfig};

fn fig2(c: &mut Criterion) {
    let scn = Scenario::from_config(&ScenarioConfig::fig2()).unwrap();
    let (sp, bnn, ctrl) = params_from(&scn.params).unwrap();
    let state = random_state(&scn, 1);

    c.bench_function("fig2/payoffs", |b| b.iter(|| payoffs(&state, &scn, &sp)));
    c.bench_function("fig2/capacity_gradients", |b| b.iter(|| capacity_gradients(&state, &scn, &sp)));
    c.bench_function("fig2/oracle", |b| b.iter(|| baselines::solve_optimal(&scn).unwrap()));
    c.bench_function("fig2/dd", |b| b.iter(|| baselines::run_dd(&scn, &sp, &bnn, &ctrl).unwrap()));
    c.bench_function("fig2/cd", |b| b.iter(|| baselines::run_coupled(&scn, &sp, &bnn, &ctrl).unwrap()));
}

fn thirty_node(c: &mut Criterion) {
    let scn = Scenario::from_config(&random_scenario(&GeneratorParams::thirty_node(), 2).unwrap()).unwrap();
    let (sp, bnn, ctrl) = params_from(&scn.params).unwrap();
    let mut group = c.benchmark_group("thirty");
    group.sample_size(10);
    group.bench_function("oracle", |b| b.iter(|| baselines::solve_optimal(&scn).unwrap()));
    group.bench_function("dd", |b| b.iter(|| baselines::run_dd(&scn, &sp, &bnn, &ctrl).unwrap()));
    group.finish();
}

criterion_group!(benches, fig2, thirty_node);
criterion_main!(benches);
