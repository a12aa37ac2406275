//! Stacked multi-chip connectivity graphs.
//!
//! Chips tile the plane in a `chip_rows × chip_cols` grid, each carrying an
//! `qubit_rows × qubit_cols` lattice on every qubit layer; consecutive qubit
//! layers are separated by one carrier layer. Node ids are
//! `chip_{r}_{c}_L{layer}_q{x}_{y}` with in-chip coordinates; exported `x`, `y`
//! are global lattice coordinates.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use petgraph::algo::{connected_components, is_bipartite_undirected};
use petgraph::graph::{NodeIndex, UnGraph};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest node count a scheme may request.
pub const MAX_NODES: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeClass {
    Planar,
    Lateral,
    Vertical,
    Selective,
}

impl EdgeClass {
    fn dot_style(self) -> &'static str {
        match self {
            EdgeClass::Planar => "color=black",
            EdgeClass::Lateral => "color=blue",
            EdgeClass::Vertical => "color=orange, penwidth=2",
            EdgeClass::Selective => "color=red, style=dashed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopoNode {
    pub id: String,
    pub layer: usize,
    pub x: i64,
    pub y: i64,
    pub chip: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopoEdge {
    pub a: String,
    pub b: String,
    pub class: EdgeClass,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StackLayer {
    Qubits,
    Carrier,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyGraph {
    pub nodes: Vec<TopoNode>,
    pub edges: Vec<TopoEdge>,
    /// Bottom to top: qubit layers with a carrier between each pair.
    pub layers: Vec<StackLayer>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyScheme {
    pub chip_rows: usize,
    pub chip_cols: usize,
    pub qubit_rows: usize,
    pub qubit_cols: usize,
    pub layers: usize,
    /// Join every aligned pair of adjacent-layer qubits.
    #[serde(default = "default_true")]
    pub full_vertical: bool,
    /// Extra interlayer links between named nodes.
    #[serde(default)]
    pub selective: Vec<(String, String)>,
}

fn default_true() -> bool {
    true
}

impl TopologyScheme {
    pub fn new(chips: (usize, usize), qubits: (usize, usize), layers: usize) -> Self {
        Self {
            chip_rows: chips.0,
            chip_cols: chips.1,
            qubit_rows: qubits.0,
            qubit_cols: qubits.1,
            layers,
            full_vertical: true,
            selective: Vec::new(),
        }
    }

    pub fn with_selective(mut self, edges: Vec<(String, String)>) -> Self {
        self.selective = edges;
        self
    }

    fn validate(&self) -> Result<()> {
        let counts = [self.chip_rows, self.chip_cols, self.qubit_rows, self.qubit_cols, self.layers];
        if counts.contains(&0) {
            return Err(Error::InvalidInput("topology counts must all be at least 1".into()));
        }
        let total = counts.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c));
        if total.is_none_or(|t| t > MAX_NODES) {
            return Err(Error::InvalidInput(format!("topology exceeds {MAX_NODES} nodes")));
        }
        Ok(())
    }
}

/// Parses `"RxC"` (also `×` or `X`) into positive `(R, C)`.
pub fn parse_dims(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidInput(format!("expected ROWSxCOLS, got `{s}`"));
    let mut parts = s.trim().split(['x', 'X', '×']);
    let r = parts.next().ok_or_else(bad)?.trim().parse::<usize>().map_err(|_| bad())?;
    let c = parts.next().ok_or_else(bad)?.trim().parse::<usize>().map_err(|_| bad())?;
    if parts.next().is_some() || r == 0 || c == 0 {
        return Err(bad());
    }
    Ok((r, c))
}

/// Parses `"a:b,c:d"` into node-id pairs.
pub fn parse_edge_list(s: &str) -> Result<Vec<(String, String)>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| match p.split_once(':') {
            Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => Ok((a.trim().to_string(), b.trim().to_string())),
            _ => Err(Error::InvalidInput(format!("expected NODE:NODE, got `{p}`"))),
        })
        .collect()
}

pub fn node_id(chip: (usize, usize), layer: usize, q: (usize, usize)) -> String {
    format!("chip_{}_{}_L{layer}_q{}_{}", chip.0, chip.1, q.0, q.1)
}

fn key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

pub fn build_topology(scheme: &TopologyScheme) -> Result<TopologyGraph> {
    scheme.validate()?;
    let (m, n) = (scheme.qubit_rows, scheme.qubit_cols);
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for l in 0..scheme.layers {
        for r in 0..scheme.chip_rows {
            for c in 0..scheme.chip_cols {
                for y in 0..m {
                    for x in 0..n {
                        nodes.push(TopoNode {
                            id: node_id((r, c), l, (x, y)),
                            layer: l,
                            x: (c * n + x) as i64,
                            y: (r * m + y) as i64,
                            chip: format!("chip_{r}_{c}"),
                        });
                    }
                }
            }
        }
    }
    let mut push = |a: String, b: String, class| edges.push(TopoEdge { a, b, class });
    for l in 0..scheme.layers {
        for r in 0..scheme.chip_rows {
            for c in 0..scheme.chip_cols {
                for y in 0..m {
                    for x in 0..n {
                        let here = node_id((r, c), l, (x, y));
                        if x + 1 < n {
                            push(here.clone(), node_id((r, c), l, (x + 1, y)), EdgeClass::Planar);
                        }
                        if y + 1 < m {
                            push(here.clone(), node_id((r, c), l, (x, y + 1)), EdgeClass::Planar);
                        }
                    }
                }
                // Facing boundary qubits of the chip to the right and above.
                if c + 1 < scheme.chip_cols {
                    for y in 0..m {
                        push(node_id((r, c), l, (n - 1, y)), node_id((r, c + 1), l, (0, y)), EdgeClass::Lateral);
                    }
                }
                if r + 1 < scheme.chip_rows {
                    for x in 0..n {
                        push(node_id((r, c), l, (x, m - 1)), node_id((r + 1, c), l, (x, 0)), EdgeClass::Lateral);
                    }
                }
            }
        }
    }
    let layer_of: HashMap<&str, usize> = nodes.iter().map(|nd| (nd.id.as_str(), nd.layer)).collect();
    let mut selective = BTreeSet::new();
    for (a, b) in &scheme.selective {
        let (la, lb) = match (layer_of.get(a.as_str()), layer_of.get(b.as_str())) {
            (Some(la), Some(lb)) => (*la, *lb),
            _ => return Err(Error::InvalidInput(format!("selective edge {a}:{b} names an unknown node"))),
        };
        if la.abs_diff(lb) != 1 {
            return Err(Error::InvalidInput(format!(
                "selective edge {a}:{b} joins layers {la} and {lb}, which are not adjacent"
            )));
        }
        if !selective.insert(key(a, b)) {
            return Err(Error::InvalidInput(format!("selective edge {a}:{b} is listed twice")));
        }
    }
    if scheme.full_vertical {
        for l in 0..scheme.layers.saturating_sub(1) {
            for r in 0..scheme.chip_rows {
                for c in 0..scheme.chip_cols {
                    for y in 0..m {
                        for x in 0..n {
                            let (a, b) = (node_id((r, c), l, (x, y)), node_id((r, c), l + 1, (x, y)));
                            // A declared selective link replaces the aligned one.
                            if !selective.contains(&key(&a, &b)) {
                                push(a, b, EdgeClass::Vertical);
                            }
                        }
                    }
                }
            }
        }
    }
    for (a, b) in &scheme.selective {
        push(a.clone(), b.clone(), EdgeClass::Selective);
    }
    let mut layers = Vec::new();
    for l in 0..scheme.layers {
        if l > 0 {
            layers.push(StackLayer::Carrier);
        }
        layers.push(StackLayer::Qubits);
    }
    Ok(TopologyGraph { nodes, edges, layers })
}

impl TopologyGraph {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("topology serializes")
    }

    /// Parses a graph and checks that ids are unique and edges reference
    /// known nodes. Geometric rules are left to [`validate_topology`].
    pub fn from_json(s: &str) -> Result<Self> {
        let g: TopologyGraph = serde_json::from_str(s)?;
        let mut seen = BTreeSet::new();
        for nd in &g.nodes {
            if !seen.insert(nd.id.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate node `{}`", nd.id)));
            }
        }
        for e in &g.edges {
            for end in [&e.a, &e.b] {
                if !seen.contains(end.as_str()) {
                    return Err(Error::InvalidInput(format!("edge endpoint `{end}` is not a node")));
                }
            }
            if e.a == e.b {
                return Err(Error::InvalidInput(format!("self-loop on `{}`", e.a)));
            }
        }
        Ok(g)
    }

    pub fn count(&self, class: EdgeClass) -> usize {
        self.edges.iter().filter(|e| e.class == class).count()
    }

    /// Graphviz export; `pos` carries the given layout when present.
    pub fn to_dot(&self, layout: Option<&PlanarLayout>) -> String {
        let mut out = String::from("graph topology {\n  node [shape=circle];\n");
        let pos: HashMap<&str, (i64, i64)> = layout
            .map(|l| l.nodes.iter().map(|n| (n.id.as_str(), (n.x, n.y))).collect())
            .unwrap_or_default();
        for nd in &self.nodes {
            let (x, y) = pos.get(nd.id.as_str()).copied().unwrap_or((nd.x, nd.y));
            let _ = writeln!(out, "  \"{}\" [layer={}, pos=\"{x},{y}!\"];", nd.id, nd.layer);
        }
        for e in &self.edges {
            let _ = writeln!(out, "  \"{}\" -- \"{}\" [{}];", e.a, e.b, e.class.dot_style());
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutNode {
    pub id: String,
    pub layer: usize,
    pub x: i64,
    pub y: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanarLayout {
    pub nodes: Vec<LayoutNode>,
    pub edges: Vec<TopoEdge>,
}

impl PlanarLayout {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }
}

/// Places the layers side by side along x, one empty column apart, keeping
/// in-layer coordinates. Every edge is carried over with its class.
pub fn unfold_planar(graph: &TopologyGraph) -> PlanarLayout {
    let min_x = graph.nodes.iter().map(|n| n.x).min().unwrap_or(0);
    let max_x = graph.nodes.iter().map(|n| n.x).max().unwrap_or(0);
    let width = max_x - min_x + 2;
    PlanarLayout {
        nodes: graph
            .nodes
            .iter()
            .map(|n| LayoutNode {
                id: n.id.clone(),
                layer: n.layer,
                x: n.x + width * n.layer as i64,
                y: n.y,
            })
            .collect(),
        edges: graph.edges.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub a: String,
    pub b: String,
    pub class: EdgeClass,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub nodes: usize,
    pub edges: BTreeMap<EdgeClass, usize>,
    /// Degree → number of nodes.
    pub degree_histogram: BTreeMap<usize, usize>,
    pub max_degree: usize,
    pub components: usize,
    pub bipartite: bool,
    /// Edges that break the geometric rule of their class.
    pub violations: Vec<Violation>,
    /// Nodes whose degree exceeds 4 planar + one per adjacent qubit layer
    /// + incident selective links.
    pub overloaded: Vec<String>,
}

impl TopologyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Degree statistics, connectivity and rule violations. Never fails.
pub fn validate_topology(graph: &TopologyGraph) -> TopologyReport {
    let mut g = UnGraph::<(), ()>::new_undirected();
    let index: HashMap<&str, NodeIndex> = graph.nodes.iter().map(|n| (n.id.as_str(), g.add_node(()))).collect();
    let node: HashMap<&str, &TopoNode> = graph.nodes.iter().map(|n| (n.id.as_str(), n)).collect();
    let layers: BTreeSet<usize> = graph.nodes.iter().map(|n| n.layer).collect();
    let mut degree: HashMap<&str, usize> = HashMap::new();
    let mut selective_deg: HashMap<&str, usize> = HashMap::new();
    let mut violations = Vec::new();
    let mut edges = BTreeMap::new();
    for e in &graph.edges {
        *edges.entry(e.class).or_insert(0) += 1;
        let (Some(a), Some(b)) = (node.get(e.a.as_str()), node.get(e.b.as_str())) else {
            violations.push(Violation {
                a: e.a.clone(),
                b: e.b.clone(),
                class: e.class,
                reason: "unknown endpoint".into(),
            });
            continue;
        };
        g.add_edge(index[e.a.as_str()], index[e.b.as_str()], ());
        *degree.entry(e.a.as_str()).or_insert(0) += 1;
        *degree.entry(e.b.as_str()).or_insert(0) += 1;
        let manhattan = (a.x - b.x).abs() + (a.y - b.y).abs();
        let dl = a.layer.abs_diff(b.layer);
        let reason = match e.class {
            EdgeClass::Planar if dl != 0 || a.chip != b.chip || manhattan != 1 => {
                Some("planar edge must join same-chip, same-layer lattice neighbors")
            }
            EdgeClass::Lateral if dl != 0 || a.chip == b.chip || manhattan != 1 => {
                Some("lateral edge must join facing boundary qubits of adjacent chips")
            }
            EdgeClass::Vertical if dl != 1 => Some("vertical edge must join adjacent qubit layers"),
            EdgeClass::Vertical if manhattan != 0 => Some("vertical edge must join aligned qubits"),
            EdgeClass::Selective if dl != 1 => Some("selective edge must join adjacent qubit layers"),
            _ => None,
        };
        if e.class == EdgeClass::Selective {
            *selective_deg.entry(e.a.as_str()).or_insert(0) += 1;
            *selective_deg.entry(e.b.as_str()).or_insert(0) += 1;
        }
        if let Some(r) = reason {
            violations.push(Violation {
                a: e.a.clone(),
                b: e.b.clone(),
                class: e.class,
                reason: r.into(),
            });
        }
    }
    let mut degree_histogram = BTreeMap::new();
    let mut overloaded = Vec::new();
    for n in &graph.nodes {
        let d = degree.get(n.id.as_str()).copied().unwrap_or(0);
        *degree_histogram.entry(d).or_insert(0) += 1;
        let neighbours = [n.layer.checked_sub(1), Some(n.layer + 1)]
            .into_iter()
            .flatten()
            .filter(|l| layers.contains(l))
            .count();
        if d > 4 + neighbours + selective_deg.get(n.id.as_str()).copied().unwrap_or(0) {
            overloaded.push(n.id.clone());
        }
    }
    let bipartite = g.node_indices().all(|start| is_bipartite_undirected(&g, start));
    TopologyReport {
        nodes: graph.nodes.len(),
        edges,
        max_degree: degree_histogram.keys().max().copied().unwrap_or(0),
        degree_histogram,
        components: connected_components(&g),
        bipartite,
        violations,
        overloaded,
    }
}
