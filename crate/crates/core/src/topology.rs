//! Network, flows, hyper-links and hyper-paths.
//!
//! A hyper-link `n_k[(i,p,n_i),(j,q,n_j)]` is a broadcast point at node
//! `n_k` where packets of flow `i` on path `p` (next hop `n_i`) can be XORed
//! with packets of flow `j` on path `q` (next hop `n_j`). A hyper-path is a
//! physical path together with every hyper-link that touches it, at most one
//! per node.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::scenario::{HyperLinkDecl, HyperLinkSpec, RunParams, ScenarioConfig, SideRef};

pub type NodeId = String;

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    pub cost: f64,
}

/// Directed graph of nodes and cost-weighted wireless links.
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    links: Vec<Link>,
    costs: HashMap<(usize, usize), f64>,
    symmetric: bool,
}

impl Network {
    /// Builds the network, materializing reverse links when `symmetric`.
    /// Endpoints must exist; use [`validate`] first for a full diagnosis.
    pub fn new(nodes: Vec<NodeId>, declared: &[Link], symmetric: bool) -> Result<Self> {
        let index: HashMap<NodeId, usize> =
            nodes.iter().enumerate().map(|(k, n)| (n.clone(), k)).collect();
        let mut costs = HashMap::new();
        let mut links = Vec::new();
        let mut insert = |from: &NodeId, to: &NodeId, cost: f64| -> Result<()> {
            let (Some(&a), Some(&b)) = (index.get(from), index.get(to)) else {
                return Err(Error::Invalid(vec![Violation::UnknownNode(
                    if index.contains_key(from) { to.clone() } else { from.clone() },
                )]));
            };
            if costs.insert((a, b), cost).is_none() {
                links.push(Link {
                    from: from.clone(),
                    to: to.clone(),
                    cost,
                });
            }
            Ok(())
        };
        for l in declared {
            insert(&l.from, &l.to, l.cost)?;
        }
        if symmetric {
            for l in declared {
                insert(&l.to, &l.from, l.cost)?;
            }
        }
        Ok(Network {
            nodes,
            index,
            links,
            costs,
            symmetric,
        })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn link_cost(&self, from: &str, to: &str) -> Option<f64> {
        let a = self.node_index(from)?;
        let b = self.node_index(to)?;
        self.costs.get(&(a, b)).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalPath {
    pub nodes: Vec<NodeId>,
    /// Sum of link costs along the path (beta).
    pub base_cost: f64,
}

impl PhysicalPath {
    fn position(&self, node: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == node)
    }

    /// `(predecessor, successor)` of an interior node.
    pub fn neighbours(&self, node: &str) -> Option<(&NodeId, &NodeId)> {
        let k = self.position(node)?;
        if k == 0 || k + 1 >= self.nodes.len() {
            return None;
        }
        Some((&self.nodes[k - 1], &self.nodes[k + 1]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    pub id: usize,
    pub source: NodeId,
    pub dest: NodeId,
    pub load: f64,
    pub paths: Vec<PhysicalPath>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperLinkSide {
    /// Position of the flow in the scenario's flow list.
    pub flow: usize,
    /// 0-based path index within the flow.
    pub path: usize,
    pub next_hop: NodeId,
    /// Cost of the link from the coding node to `next_hop`.
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperLink {
    pub id: usize,
    pub coding_node: NodeId,
    pub side_a: HyperLinkSide,
    pub side_b: HyperLinkSide,
}

impl HyperLink {
    pub fn side(&self, side: Side) -> &HyperLinkSide {
        match side {
            Side::A => &self.side_a,
            Side::B => &self.side_b,
        }
    }

    /// Broadcast cost per unit of coded rate.
    pub fn alpha_max(&self) -> f64 {
        self.side_a.alpha.max(self.side_b.alpha)
    }

    pub fn alpha_min(&self) -> f64 {
        self.side_a.alpha.min(self.side_b.alpha)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperPath {
    pub flow: usize,
    pub path: usize,
    pub base_cost: f64,
    /// Hyper-link ids touching this path and which side of each it occupies.
    pub hyperlinks: Vec<(usize, Side)>,
}

/// A structural problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Violation {
    DuplicateNode(NodeId),
    UnknownNode(NodeId),
    NegativeLinkCost { from: NodeId, to: NodeId },
    NonFiniteLinkCost { from: NodeId, to: NodeId },
    SelfLoop(NodeId),
    DuplicateLink { from: NodeId, to: NodeId },
    AsymmetricCost { from: NodeId, to: NodeId },
    DuplicateFlow(usize),
    NonPositiveLoad(usize),
    NoPaths(usize),
    PathEndpoints { flow: usize, path: usize },
    NonSimplePath { flow: usize, path: usize },
    NotALink { flow: usize, path: usize, from: NodeId, to: NodeId },
    UnknownFlowPath(SideRef),
    SameSide { node: NodeId },
    NotInterior { node: NodeId, side: SideRef },
    DuplicateHyperLink { node: NodeId },
    ConflictingHyperLinks { node: NodeId, flow: usize, path: usize },
    BadParameter(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateNode(n) => write!(f, "duplicate node {n}"),
            UnknownNode(n) => write!(f, "unknown node {n}"),
            NegativeLinkCost { from, to } => write!(f, "negative link cost on {from} -> {to}"),
            NonFiniteLinkCost { from, to } => write!(f, "non-finite link cost on {from} -> {to}"),
            SelfLoop(n) => write!(f, "self-loop at {n}"),
            DuplicateLink { from, to } => write!(f, "duplicate link {from} -> {to}"),
            AsymmetricCost { from, to } => {
                write!(f, "asymmetric cost on {from} <-> {to} in a symmetric network")
            }
            DuplicateFlow(id) => write!(f, "duplicate flow id {id}"),
            NonPositiveLoad(id) => write!(f, "flow {id} has non-positive load"),
            NoPaths(id) => write!(f, "flow {id} has no paths"),
            PathEndpoints { flow, path } => {
                write!(f, "flow {flow} path {path} does not run from source to destination")
            }
            NonSimplePath { flow, path } => write!(f, "flow {flow} path {path} repeats a node"),
            NotALink {
                flow,
                path,
                from,
                to,
            } => write!(f, "flow {flow} path {path} uses missing link {from} -> {to}"),
            UnknownFlowPath(s) => write!(f, "hyper-link references unknown flow {} path {}", s.flow, s.path),
            SameSide { node } => write!(f, "hyper-link at {node} pairs a flow path with itself"),
            NotInterior { node, side } => write!(
                f,
                "node {node} is not interior to flow {} path {}",
                side.flow, side.path
            ),
            DuplicateHyperLink { node } => write!(f, "duplicate hyper-link at {node}"),
            ConflictingHyperLinks { node, flow, path } => write!(
                f,
                "conflicting hyper-links at node {node} on flow {flow} path {path}"
            ),
            BadParameter(msg) => write!(f, "bad parameter: {msg}"),
        }
    }
}

/// Returns every structural violation in `cfg`; empty means valid.
pub fn validate(cfg: &ScenarioConfig) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut seen = HashSet::new();
    for n in &cfg.nodes {
        if !seen.insert(n.as_str()) {
            out.push(Violation::DuplicateNode(n.clone()));
        }
    }
    let known = |id: &str| seen.contains(id);

    let mut declared: HashMap<(&str, &str), f64> = HashMap::new();
    for l in &cfg.links {
        for end in [&l.from, &l.to] {
            if !known(end) {
                out.push(Violation::UnknownNode(end.clone()));
            }
        }
        if l.from == l.to {
            out.push(Violation::SelfLoop(l.from.clone()));
        }
        if !l.cost.is_finite() {
            out.push(Violation::NonFiniteLinkCost {
                from: l.from.clone(),
                to: l.to.clone(),
            });
        } else if l.cost < 0.0 {
            out.push(Violation::NegativeLinkCost {
                from: l.from.clone(),
                to: l.to.clone(),
            });
        }
        if declared.insert((&l.from, &l.to), l.cost).is_some() {
            out.push(Violation::DuplicateLink {
                from: l.from.clone(),
                to: l.to.clone(),
            });
        }
    }
    if cfg.symmetric {
        for l in &cfg.links {
            if let Some(&back) = declared.get(&(l.to.as_str(), l.from.as_str())) {
                if back != l.cost && l.from < l.to {
                    out.push(Violation::AsymmetricCost {
                        from: l.from.clone(),
                        to: l.to.clone(),
                    });
                }
            }
        }
    }
    let has_link = |a: &str, b: &str| {
        declared.contains_key(&(a, b)) || (cfg.symmetric && declared.contains_key(&(b, a)))
    };

    let mut flow_ids = HashSet::new();
    for f in &cfg.flows {
        if !flow_ids.insert(f.id) {
            out.push(Violation::DuplicateFlow(f.id));
        }
        if !(f.load.is_finite() && f.load > 0.0) {
            out.push(Violation::NonPositiveLoad(f.id));
        }
        for end in [&f.src, &f.dst] {
            if !known(end) {
                out.push(Violation::UnknownNode(end.clone()));
            }
        }
        if f.paths.is_empty() {
            out.push(Violation::NoPaths(f.id));
        }
        for (k, p) in f.paths.iter().enumerate() {
            let path = k + 1;
            let mut dangling = false;
            for n in p {
                if !known(n) {
                    out.push(Violation::UnknownNode(n.clone()));
                    dangling = true;
                }
            }
            if p.first() != Some(&f.src) || p.last() != Some(&f.dst) {
                out.push(Violation::PathEndpoints { flow: f.id, path });
            }
            if p.iter().collect::<HashSet<_>>().len() != p.len() {
                out.push(Violation::NonSimplePath { flow: f.id, path });
            }
            if !dangling {
                for w in p.windows(2) {
                    if !has_link(&w[0], &w[1]) {
                        out.push(Violation::NotALink {
                            flow: f.id,
                            path,
                            from: w[0].clone(),
                            to: w[1].clone(),
                        });
                    }
                }
            }
        }
    }

    let p = &cfg.params;
    if !(p.r < 0.0) {
        out.push(Violation::BadParameter(format!("r must be negative, got {}", p.r)));
    }
    for (name, v) in [("kappa", p.kappa), ("eta", p.eta), ("step", p.step)] {
        if !(v.is_finite() && v > 0.0) {
            out.push(Violation::BadParameter(format!("{name} must be positive, got {v}")));
        }
    }
    if p.n_small == 0 || p.n_large == 0 {
        out.push(Violation::BadParameter("step counts must be at least 1".into()));
    }

    // Hyper-link checks need a sound network and flow set.
    if out.is_empty() {
        match build_parts(cfg) {
            Ok((_, flows, hyperlinks)) => {
                out.extend(conflicts(&flows, &hyperlinks));
            }
            Err(Error::Invalid(v)) => out.extend(v),
            Err(e) => out.push(Violation::BadParameter(e.to_string())),
        }
    }

    let mut unique = HashSet::new();
    out.retain(|v| unique.insert(v.clone()));
    out
}

/// Sum of link costs along `nodes`; a single node costs nothing.
pub fn path_base_cost(nodes: &[NodeId], net: &Network) -> Result<f64> {
    nodes.windows(2).try_fold(0.0, |acc, w| {
        net.link_cost(&w[0], &w[1])
            .map(|c| acc + c)
            .ok_or_else(|| Error::MissingLink {
                from: w[0].clone(),
                to: w[1].clone(),
            })
    })
}

fn make_side(net: &Network, flows: &[Flow], flow: usize, path: usize, node: &str) -> Option<HyperLinkSide> {
    let p = &flows[flow].paths[path];
    let (_, next) = p.neighbours(node)?;
    Some(HyperLinkSide {
        flow,
        path,
        next_hop: next.clone(),
        alpha: net.link_cost(node, next)?,
    })
}

/// Enumerates reverse-carpooling opportunities: node `n_k` interior to two
/// distinct flow paths that traverse both adjacent links in opposite
/// directions. Ids follow (node, flow id, path index) order.
pub fn detect_hyperlinks(net: &Network, flows: &[Flow]) -> Vec<HyperLink> {
    // (flow id, path index, flow position) sorted so side A is the smaller pair
    let mut members: Vec<(usize, usize, usize)> = flows
        .iter()
        .enumerate()
        .flat_map(|(fi, f)| (0..f.paths.len()).map(move |p| (f.id, p, fi)))
        .collect();
    members.sort_unstable();

    let mut found: BTreeSet<(usize, (usize, usize), (usize, usize))> = BTreeSet::new();
    let mut lookup = HashMap::new();
    for (ai, &(fa, pa, ia)) in members.iter().enumerate() {
        for &(fb, pb, ib) in &members[ai + 1..] {
            let path_a = &flows[ia].paths[pa];
            let path_b = &flows[ib].paths[pb];
            for node in &path_a.nodes {
                let (Some((pred_a, succ_a)), Some((pred_b, succ_b))) =
                    (path_a.neighbours(node), path_b.neighbours(node))
                else {
                    continue;
                };
                if pred_a == succ_b && pred_b == succ_a {
                    let k = net.node_index(node).expect("validated node");
                    found.insert((k, (fa, pa), (fb, pb)));
                    lookup.insert((fa, pa), ia);
                    lookup.insert((fb, pb), ib);
                }
            }
        }
    }

    found
        .into_iter()
        .enumerate()
        .map(|(id, (k, (fa, pa), (fb, pb)))| {
            let node = &net.nodes()[k];
            HyperLink {
                id,
                coding_node: node.clone(),
                side_a: make_side(net, flows, lookup[&(fa, pa)], pa, node).expect("interior"),
                side_b: make_side(net, flows, lookup[&(fb, pb)], pb, node).expect("interior"),
            }
        })
        .collect()
}

fn resolve_explicit(net: &Network, flows: &[Flow], decls: &[HyperLinkDecl]) -> Result<Vec<HyperLink>> {
    let by_id: HashMap<usize, usize> = flows.iter().enumerate().map(|(k, f)| (f.id, k)).collect();
    let mut violations = Vec::new();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for d in decls {
        if !net.contains(&d.node) {
            violations.push(Violation::UnknownNode(d.node.clone()));
            continue;
        }
        let resolve = |s: SideRef| -> std::result::Result<HyperLinkSide, Violation> {
            let fi = *by_id.get(&s.flow).ok_or(Violation::UnknownFlowPath(s))?;
            if s.path == 0 || s.path > flows[fi].paths.len() {
                return Err(Violation::UnknownFlowPath(s));
            }
            make_side(net, flows, fi, s.path - 1, &d.node).ok_or(Violation::NotInterior {
                node: d.node.clone(),
                side: s,
            })
        };
        if d.side_a == d.side_b {
            violations.push(Violation::SameSide { node: d.node.clone() });
            continue;
        }
        let key = (d.node.clone(), d.side_a.min(d.side_b), d.side_a.max(d.side_b));
        if !seen.insert(key) {
            violations.push(Violation::DuplicateHyperLink { node: d.node.clone() });
            continue;
        }
        match (resolve(d.side_a), resolve(d.side_b)) {
            (Ok(a), Ok(b)) => out.push(HyperLink {
                id: out.len(),
                coding_node: d.node.clone(),
                side_a: a,
                side_b: b,
            }),
            (a, b) => violations.extend(a.err().into_iter().chain(b.err())),
        }
    }
    if violations.is_empty() {
        Ok(out)
    } else {
        Err(Error::Invalid(violations))
    }
}

fn conflicts(flows: &[Flow], hyperlinks: &[HyperLink]) -> Vec<Violation> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for h in hyperlinks {
        for s in [&h.side_a, &h.side_b] {
            if !seen.insert((s.flow, s.path, h.coding_node.as_str())) {
                out.push(Violation::ConflictingHyperLinks {
                    node: h.coding_node.clone(),
                    flow: flows[s.flow].id,
                    path: s.path + 1,
                });
            }
        }
    }
    out
}

/// One hyper-path per (flow, path), carrying every hyper-link that names it.
pub fn build_hyperpaths(flows: &[Flow], hyperlinks: &[HyperLink]) -> Result<Vec<Vec<HyperPath>>> {
    if let Some(Violation::ConflictingHyperLinks { node, flow, path }) =
        conflicts(flows, hyperlinks).into_iter().next()
    {
        return Err(Error::ConflictingHyperLinks { node, flow, path });
    }
    let mut out: Vec<Vec<HyperPath>> = flows
        .iter()
        .enumerate()
        .map(|(fi, f)| {
            f.paths
                .iter()
                .enumerate()
                .map(|(p, path)| HyperPath {
                    flow: fi,
                    path: p,
                    base_cost: path.base_cost,
                    hyperlinks: Vec::new(),
                })
                .collect()
        })
        .collect();
    for h in hyperlinks {
        out[h.side_a.flow][h.side_a.path].hyperlinks.push((h.id, Side::A));
        out[h.side_b.flow][h.side_b.path].hyperlinks.push((h.id, Side::B));
    }
    Ok(out)
}

fn build_parts(cfg: &ScenarioConfig) -> Result<(Network, Vec<Flow>, Vec<HyperLink>)> {
    let links: Vec<Link> = cfg
        .links
        .iter()
        .map(|l| Link {
            from: l.from.clone(),
            to: l.to.clone(),
            cost: l.cost,
        })
        .collect();
    let net = Network::new(cfg.nodes.clone(), &links, cfg.symmetric)?;
    let flows = cfg
        .flows
        .iter()
        .map(|f| {
            let paths = f
                .paths
                .iter()
                .map(|p| {
                    Ok(PhysicalPath {
                        nodes: p.clone(),
                        base_cost: path_base_cost(p, &net)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Flow {
                id: f.id,
                source: f.src.clone(),
                dest: f.dst.clone(),
                load: f.load,
                paths,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let hyperlinks = match &cfg.hyperlinks {
        HyperLinkSpec::Auto(_) => detect_hyperlinks(&net, &flows),
        HyperLinkSpec::Explicit(decls) => resolve_explicit(&net, &flows, decls)?,
    };
    Ok((net, flows, hyperlinks))
}

/// A validated, fully resolved scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub network: Network,
    pub flows: Vec<Flow>,
    pub hyperlinks: Vec<HyperLink>,
    /// Indexed `[flow][path]`.
    pub hyperpaths: Vec<Vec<HyperPath>>,
    pub params: RunParams,
}

impl Scenario {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let violations = validate(cfg);
        if !violations.is_empty() {
            return Err(Error::Invalid(violations));
        }
        let (network, flows, hyperlinks) = build_parts(cfg)?;
        let hyperpaths = build_hyperpaths(&flows, &hyperlinks)?;
        Ok(Scenario {
            network,
            flows,
            hyperlinks,
            hyperpaths,
            params: cfg.params,
        })
    }

    /// Same topology with different loads. Zero loads are allowed here so
    /// that degenerate what-if instances can be priced.
    pub fn with_loads(&self, loads: &[f64]) -> Result<Self> {
        if loads.len() != self.flows.len() {
            return Err(Error::Parameter(format!(
                "expected {} loads, got {}",
                self.flows.len(),
                loads.len()
            )));
        }
        if let Some(bad) = loads.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::Parameter(format!("load must be non-negative, got {bad}")));
        }
        let mut out = self.clone();
        for (f, &l) in out.flows.iter_mut().zip(loads) {
            f.load = l;
        }
        Ok(out)
    }

    pub fn loads(&self) -> Vec<f64> {
        self.flows.iter().map(|f| f.load).collect()
    }

    /// Number of split variables `x_i^p`.
    pub fn num_paths(&self) -> usize {
        self.flows.iter().map(|f| f.paths.len()).sum()
    }
}
