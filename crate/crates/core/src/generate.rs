//! Seeded random scenarios.
//!
//! Networks are a ring with random chords and symmetric link costs. Flows come
//! in opposing pairs: the second flow of a pair runs between the same
//! endpoints in reverse and reuses one of the first flow's paths backwards,
//! which creates reverse-carpooling opportunities at every interior node of
//! that path. Candidates whose hyper-links would conflict are redrawn.

use petgraph::algo::astar;
use petgraph::graph::{NodeIndex, UnGraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::{CapacityState, SplitState, SystemState};
use crate::error::{Error, Result};
use crate::scenario::{FlowSpec, HyperLinkSpec, LinkSpec, RunParams, ScenarioConfig};
use crate::topology::Scenario;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    pub nodes: usize,
    /// Random chords added to the ring.
    pub chords: usize,
    pub flows: usize,
    pub min_paths: usize,
    pub max_paths: usize,
    /// Reject candidates without any hyper-link.
    pub require_coding: bool,
    pub max_attempts: usize,
}

impl GeneratorParams {
    /// Up to five flows with one to three paths on a small network.
    pub fn small() -> Self {
        GeneratorParams {
            nodes: 8,
            chords: 6,
            flows: 5,
            min_paths: 1,
            max_paths: 3,
            require_coding: false,
            max_attempts: 200,
        }
    }

    /// Thirty nodes, six flows, two or three paths each.
    pub fn thirty_node() -> Self {
        GeneratorParams {
            nodes: 30,
            chords: 30,
            flows: 6,
            min_paths: 2,
            max_paths: 3,
            require_coding: true,
            max_attempts: 500,
        }
    }
}

/// Draws a valid scenario; the same seed always yields the same scenario.
pub fn random_scenario(params: &GeneratorParams, seed: u64) -> Result<ScenarioConfig> {
    if params.nodes < 3 || params.flows == 0 || params.min_paths == 0 || params.min_paths > params.max_paths {
        return Err(Error::Parameter(format!("bad generator parameters {params:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..params.max_attempts {
        let Some(cfg) = candidate(params, &mut rng) else {
            continue;
        };
        match Scenario::from_config(&cfg) {
            Ok(scn) if !params.require_coding || !scn.hyperlinks.is_empty() => return Ok(cfg),
            _ => continue,
        }
    }
    Err(Error::Parameter(format!(
        "no valid scenario after {} attempts (seed {seed})",
        params.max_attempts
    )))
}

/// A strictly interior state: every split and capacity positive, each flow
/// carrying exactly its load, capacities around the mean rate of their sides.
pub fn random_state(scn: &Scenario, seed: u64) -> SystemState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = SplitState(
        scn.flows
            .iter()
            .map(|f| {
                let w: Vec<f64> = (0..f.paths.len()).map(|_| rng.gen_range(0.2..1.0)).collect();
                let total: f64 = w.iter().sum();
                w.iter().map(|w| f.load * w / total).collect()
            })
            .collect(),
    );
    let y = scn
        .hyperlinks
        .iter()
        .map(|h| {
            let mid = 0.5 * (x.get(h.side_a.flow, h.side_a.path) + x.get(h.side_b.flow, h.side_b.path));
            mid * rng.gen_range(0.5..1.5)
        })
        .collect();
    SystemState { x, y: CapacityState(y) }
}

fn name(k: usize) -> String {
    format!("v{k}")
}

fn candidate(params: &GeneratorParams, rng: &mut ChaCha8Rng) -> Option<ScenarioConfig> {
    let n = params.nodes;
    let mut graph = UnGraph::<(), f64>::with_capacity(n, n + params.chords);
    let idx: Vec<NodeIndex> = (0..n).map(|_| graph.add_node(())).collect();
    let cost = |rng: &mut ChaCha8Rng| (rng.gen_range(10..=30) as f64) / 10.0;
    for k in 0..n {
        let c = cost(rng);
        graph.add_edge(idx[k], idx[(k + 1) % n], c);
    }
    let mut added = 0;
    for _ in 0..params.chords * 20 {
        if added == params.chords {
            break;
        }
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a == b || graph.find_edge(idx[a], idx[b]).is_some() {
            continue;
        }
        let c = cost(rng);
        graph.add_edge(idx[a], idx[b], c);
        added += 1;
    }

    let mut flows: Vec<FlowSpec> = Vec::with_capacity(params.flows);
    for j in 0..params.flows {
        let target = rng.gen_range(params.min_paths..=params.max_paths);
        let (src, dst, mut paths) = if j % 2 == 1 {
            let prev = &flows[j - 1];
            let seed_path = prev.paths.choose(rng)?.iter().rev().cloned().collect::<Vec<_>>();
            (prev.dst.clone(), prev.src.clone(), vec![seed_path])
        } else {
            let mut ends: Vec<usize> = (0..n).collect();
            ends.shuffle(rng);
            (name(ends[0]), name(ends[1]), Vec::new())
        };
        let s = idx[src[1..].parse::<usize>().ok()?];
        let t = idx[dst[1..].parse::<usize>().ok()?];
        for _ in 0..30 {
            if paths.len() == target {
                break;
            }
            let noise: Vec<f64> = (0..graph.edge_count()).map(|_| rng.gen_range(1.0..2.0)).collect();
            let found = astar(
                &graph,
                s,
                |v| v == t,
                |e| *e.weight() * noise[petgraph::visit::EdgeRef::id(&e).index()],
                |_| 0.0,
            );
            if let Some((_, route)) = found {
                let route: Vec<String> = route.iter().map(|v| name(v.index())).collect();
                if route.len() >= 2 && !paths.contains(&route) {
                    paths.push(route);
                }
            }
        }
        if paths.len() < params.min_paths {
            return None;
        }
        flows.push(FlowSpec {
            id: j + 1,
            src,
            dst,
            load: rng.gen_range(100..=500) as f64 / 100.0,
            paths,
        });
    }

    let links = graph
        .edge_indices()
        .map(|e| {
            let (a, b) = graph.edge_endpoints(e).expect("edge");
            LinkSpec {
                from: name(a.index()),
                to: name(b.index()),
                cost: graph[e],
            }
        })
        .collect();
    Some(ScenarioConfig {
        nodes: (0..n).map(name).collect(),
        links,
        symmetric: true,
        flows,
        hyperlinks: HyperLinkSpec::default(),
        params: RunParams::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_states_are_interior_and_feasible() {
        let scn = Scenario::from_config(&ScenarioConfig::fig2()).unwrap();
        for seed in 0..10 {
            let st = random_state(&scn, seed);
            st.check(&scn).unwrap();
            assert!(st.x.flat().iter().chain(&st.y.0).all(|v| *v > 0.0));
        }
        assert_eq!(random_state(&scn, 3), random_state(&scn, 3));
    }

    #[test]
    fn same_seed_same_scenario() {
        let p = GeneratorParams::small();
        assert_eq!(random_scenario(&p, 7).unwrap(), random_scenario(&p, 7).unwrap());
    }

    #[test]
    fn small_scenarios_respect_bounds() {
        let p = GeneratorParams::small();
        for seed in 0..20 {
            let cfg = random_scenario(&p, seed).unwrap();
            assert!(cfg.flows.len() <= 5);
            assert!(cfg.flows.iter().all(|f| (1..=3).contains(&f.paths.len())));
            Scenario::from_config(&cfg).unwrap();
        }
    }

    #[test]
    fn thirty_node_scenarios_have_coding() {
        let p = GeneratorParams::thirty_node();
        for seed in 0..3 {
            let scn = Scenario::from_config(&random_scenario(&p, seed).unwrap()).unwrap();
            assert_eq!(scn.network.nodes().len(), 30);
            assert_eq!(scn.flows.len(), 6);
            assert!(scn.flows.iter().all(|f| (2..=3).contains(&f.paths.len())));
            assert!(!scn.hyperlinks.is_empty());
        }
    }
}
