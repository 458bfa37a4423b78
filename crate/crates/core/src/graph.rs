//! Genus-labelled multigraphs with ordered legs.
//!
//! A [`MarkedGraph`] is the combinatorial type of a stable punctured curve:
//! vertices carry a genus, edges may be loops or parallel, and the `n` legs
//! carry the distinct labels `1..=n`. Vertices are stored densely; the ids
//! given to [`MarkedGraph::new`] are only used to report errors.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque vertex identifier used in the JSON exchange format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub i64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: VertexId,
    pub genus: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    pub vertex: VertexId,
    pub label: u32,
}

/// One slot in the star of a vertex. A loop shows up as two slots carrying
/// the same edge index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeSlot {
    Edge(usize),
    Leg(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("graph is disconnected: vertex {0} is unreachable")]
    DisconnectedGraph(VertexId),
    #[error("vertex {vertex} is unstable (genus {genus}, valence {valence})")]
    UnstableVertex {
        vertex: VertexId,
        genus: u32,
        valence: usize,
    },
    #[error("leg labels must be exactly 1..=n without repeats (offending label {0})")]
    BadLegLabels(u32),
    #[error("reference to unknown vertex {0}")]
    DanglingReference(VertexId),
    #[error("vertex id {0} is used twice")]
    DuplicateVertex(VertexId),
    #[error("leg {0} is not an internal edge")]
    IsLeg(u32),
    #[error("no internal edge with index {0}")]
    NoSuchEdge(usize),
    #[error("malformed graph json: {0}")]
    Json(String),
}

/// Connected, stable, genus-labelled multigraph with legs `1..=n`.
///
/// Edge endpoints are normalised so that `edges[i].0 <= edges[i].1`; a loop
/// has equal endpoints. `legs[i]` is the vertex carrying the leg labelled
/// `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MarkedGraph {
    genus: Vec<u32>,
    edges: Vec<(usize, usize)>,
    legs: Vec<usize>,
}

impl MarkedGraph {
    /// Validates raw data and builds a graph. Vertex ids are opaque and are
    /// replaced by their position in `vertices`.
    pub fn new(
        vertices: &[Vertex],
        edges: &[(VertexId, VertexId)],
        legs: &[Leg],
    ) -> Result<Self, GraphError> {
        let mut index = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.id, i).is_some() {
                return Err(GraphError::DuplicateVertex(v.id));
            }
        }
        let lookup = |id: VertexId| {
            index
                .get(&id)
                .copied()
                .ok_or(GraphError::DanglingReference(id))
        };

        let mut dense_edges = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            dense_edges.push((lookup(a)?, lookup(b)?));
        }

        let n = legs.len();
        let mut dense_legs = vec![usize::MAX; n];
        for leg in legs {
            let v = lookup(leg.vertex)?;
            let label = leg.label as usize;
            if label == 0 || label > n || dense_legs[label - 1] != usize::MAX {
                return Err(GraphError::BadLegLabels(leg.label));
            }
            dense_legs[label - 1] = v;
        }

        let genus: Vec<u32> = vertices.iter().map(|v| v.genus).collect();
        Self::build(genus, dense_edges, dense_legs).map_err(|e| match e {
            // Re-express dense indices through the caller's ids.
            GraphError::DisconnectedGraph(VertexId(i)) => {
                GraphError::DisconnectedGraph(vertices[i as usize].id)
            }
            GraphError::UnstableVertex {
                vertex: VertexId(i),
                genus,
                valence,
            } => GraphError::UnstableVertex {
                vertex: vertices[i as usize].id,
                genus,
                valence,
            },
            other => other,
        })
    }

    /// Builds from dense indices. Errors report dense indices as ids.
    pub(crate) fn build(
        genus: Vec<u32>,
        edges: Vec<(usize, usize)>,
        legs: Vec<usize>,
    ) -> Result<Self, GraphError> {
        let nv = genus.len();
        if nv == 0 {
            return Err(GraphError::EmptyGraph);
        }
        for &(a, b) in &edges {
            for x in [a, b] {
                if x >= nv {
                    return Err(GraphError::DanglingReference(VertexId(x as i64)));
                }
            }
        }
        for &v in &legs {
            if v >= nv {
                return Err(GraphError::DanglingReference(VertexId(v as i64)));
            }
        }
        let edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        let g = MarkedGraph { genus, edges, legs };

        let mut seen = vec![false; nv];
        let adj = g.adjacency();
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(GraphError::DisconnectedGraph(VertexId(v as i64)));
        }

        for v in 0..nv {
            let valence = g.valence(v);
            if 2 * g.genus[v] as usize + valence <= 2 {
                return Err(GraphError::UnstableVertex {
                    vertex: VertexId(v as i64),
                    genus: g.genus[v],
                    valence,
                });
            }
        }
        Ok(g)
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.genus.len()];
        for &(a, b) in &self.edges {
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        adj
    }

    pub fn num_vertices(&self) -> usize {
        self.genus.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_legs(&self) -> usize {
        self.legs.len()
    }

    pub fn vertex_genus(&self, v: usize) -> u32 {
        self.genus[v]
    }

    pub fn vertex_genera(&self) -> &[u32] {
        &self.genus
    }

    /// Internal edges as normalised `(min, max)` vertex pairs.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Vertex carrying each leg, indexed by `label - 1`.
    pub fn legs(&self) -> &[usize] {
        &self.legs
    }

    pub fn leg_vertex(&self, label: u32) -> Option<usize> {
        (label as usize)
            .checked_sub(1)
            .and_then(|i| self.legs.get(i).copied())
    }

    pub fn is_loop(&self, e: usize) -> bool {
        let (a, b) = self.edges[e];
        a == b
    }

    /// Loops count twice, other edges and legs once.
    pub fn valence(&self, v: usize) -> usize {
        let edge_ends: usize = self
            .edges
            .iter()
            .map(|&(a, b)| (a == v) as usize + (b == v) as usize)
            .sum();
        edge_ends + self.legs.iter().filter(|&&x| x == v).count()
    }

    /// All slots at `v`: edges in index order (loops twice), then legs by label.
    pub fn star(&self, v: usize) -> Vec<EdgeSlot> {
        let mut slots = Vec::new();
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            if a == v {
                slots.push(EdgeSlot::Edge(i));
            }
            if b == v {
                slots.push(EdgeSlot::Edge(i));
            }
        }
        for (i, &x) in self.legs.iter().enumerate() {
            if x == v {
                slots.push(EdgeSlot::Leg(i as u32 + 1));
            }
        }
        slots
    }

    /// First Betti number `|E| - |V| + 1` (graph is connected).
    pub fn betti_number(&self) -> usize {
        self.edges.len() + 1 - self.genus.len()
    }

    /// `b1 + sum of vertex genera`.
    pub fn total_genus(&self) -> usize {
        self.betti_number() + self.genus.iter().map(|&g| g as usize).sum::<usize>()
    }

    /// Every vertex has genus 0 and valence 3.
    pub fn is_trivalent(&self) -> bool {
        (0..self.num_vertices()).all(|v| self.genus[v] == 0 && self.valence(v) == 3)
    }

    pub fn is_tree(&self) -> bool {
        self.betti_number() == 0
    }

    /// Contracts an internal edge. A non-loop edge merges its endpoints and
    /// sums their genera; a loop is deleted and its vertex gains one genus.
    pub fn contract_edge(&self, e: EdgeSlot) -> Result<MarkedGraph, GraphError> {
        let e = match e {
            EdgeSlot::Leg(label) => return Err(GraphError::IsLeg(label)),
            EdgeSlot::Edge(e) if e >= self.edges.len() => return Err(GraphError::NoSuchEdge(e)),
            EdgeSlot::Edge(e) => e,
        };
        let (u, v) = self.edges[e];
        let mut genus = self.genus.clone();
        let mut edges = self.edges.clone();
        edges.remove(e);
        if u == v {
            genus[u] += 1;
            return Ok(MarkedGraph {
                genus,
                edges,
                legs: self.legs.clone(),
            });
        }
        // u < v: fold v into u and close the gap left by v.
        genus[u] += genus[v];
        genus.remove(v);
        let relabel = |x: usize| {
            let x = if x == v { u } else { x };
            if x > v {
                x - 1
            } else {
                x
            }
        };
        let edges = edges
            .into_iter()
            .map(|(a, b)| {
                let (a, b) = (relabel(a), relabel(b));
                (a.min(b), a.max(b))
            })
            .collect();
        let legs = self.legs.iter().map(|&x| relabel(x)).collect();
        Ok(MarkedGraph { genus, edges, legs })
    }

    pub fn canonical_form(&self) -> CanonicalLabel {
        self.canonical_order().0
    }

    /// Isomorphic copy with vertices in canonical position and edges sorted.
    /// Two isomorphic graphs yield identical values.
    pub fn canonicalize(&self) -> MarkedGraph {
        let (_, position) = self.canonical_order();
        self.relabelled(&position)
    }

    pub fn is_isomorphic(&self, other: &MarkedGraph) -> bool {
        self.num_vertices() == other.num_vertices()
            && self.num_edges() == other.num_edges()
            && self.num_legs() == other.num_legs()
            && self.canonical_form() == other.canonical_form()
    }

    /// Applies `position[v]` as the new index of `v` and sorts the edges.
    pub(crate) fn relabelled(&self, position: &[usize]) -> MarkedGraph {
        let mut genus = vec![0; self.genus.len()];
        for (v, &p) in position.iter().enumerate() {
            genus[p] = self.genus[v];
        }
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(a, b)| {
                let (a, b) = (position[a], position[b]);
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        let legs = self.legs.iter().map(|&v| position[v]).collect();
        MarkedGraph { genus, edges, legs }
    }

    fn encode(&self, position: &[usize]) -> Vec<u32> {
        let nv = self.genus.len();
        let mut by_pos = vec![0usize; nv];
        for (v, &p) in position.iter().enumerate() {
            by_pos[p] = v;
        }
        let mut code = vec![nv as u32, self.edges.len() as u32, self.legs.len() as u32];
        for &v in &by_pos {
            code.push(self.genus[v]);
        }
        let mut pairs: Vec<(u32, u32)> = self
            .edges
            .iter()
            .map(|&(a, b)| {
                let (a, b) = (position[a] as u32, position[b] as u32);
                (a.min(b), a.max(b))
            })
            .collect();
        pairs.sort_unstable();
        for (a, b) in pairs {
            code.push(a);
            code.push(b);
        }
        code.extend(self.legs.iter().map(|&v| position[v] as u32));
        code
    }

    /// Colour refinement followed by individualisation over every residual
    /// cell; the lexicographically least encoding wins.
    fn canonical_order(&self) -> (CanonicalLabel, Vec<usize>) {
        let nv = self.genus.len();
        let mut multiplicity: Vec<BTreeMap<usize, u32>> = vec![BTreeMap::new(); nv];
        let mut loops = vec![0u32; nv];
        for &(a, b) in &self.edges {
            if a == b {
                loops[a] += 1;
            } else {
                *multiplicity[a].entry(b).or_default() += 1;
                *multiplicity[b].entry(a).or_default() += 1;
            }
        }
        let mut leg_labels = vec![Vec::new(); nv];
        for (i, &v) in self.legs.iter().enumerate() {
            leg_labels[v].push(i as u32 + 1);
        }
        let initial: Vec<(u32, u32, usize, Vec<u32>)> = (0..nv)
            .map(|v| {
                (
                    self.genus[v],
                    loops[v],
                    self.valence(v),
                    leg_labels[v].clone(),
                )
            })
            .collect();
        let colours = refine(&multiplicity, &rank(&initial));

        let mut best: Option<(Vec<u32>, Vec<usize>)> = None;
        self.search(&multiplicity, colours, &mut best);
        let (code, position) = best.expect("search visits at least one leaf");
        (CanonicalLabel::from_words(&code), position)
    }

    fn search(
        &self,
        multiplicity: &[BTreeMap<usize, u32>],
        colours: Vec<usize>,
        best: &mut Option<(Vec<u32>, Vec<usize>)>,
    ) {
        let nv = colours.len();
        let mut cell_size = vec![0usize; nv];
        for &c in &colours {
            cell_size[c] += 1;
        }
        let Some(target) = (0..nv).find(|&c| cell_size[c] > 1) else {
            let code = self.encode(&colours);
            if best.as_ref().is_none_or(|(b, _)| code < *b) {
                *best = Some((code, colours));
            }
            return;
        };
        for v in (0..nv).filter(|&v| colours[v] == target) {
            let split: Vec<(usize, bool)> = colours
                .iter()
                .enumerate()
                .map(|(w, &c)| (c, w != v))
                .collect();
            self.search(multiplicity, refine(multiplicity, &rank(&split)), best);
        }
    }

    pub fn to_json_value(&self) -> GraphJson {
        GraphJson {
            vertices: self
                .genus
                .iter()
                .enumerate()
                .map(|(i, &genus)| Vertex {
                    id: VertexId(i as i64),
                    genus,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|&(a, b)| [VertexId(a as i64), VertexId(b as i64)])
                .collect(),
            legs: self
                .legs
                .iter()
                .enumerate()
                .map(|(i, &v)| Leg {
                    vertex: VertexId(v as i64),
                    label: i as u32 + 1,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("graph json is always serialisable")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let raw: GraphJson =
            serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
        raw.into_graph()
    }

    /// Graphviz rendering. Legs become labelled edges to invisible phantom nodes.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("graph {name} {{\n");
        for (v, g) in self.genus.iter().enumerate() {
            out.push_str(&format!("  v{v} [label=\"g={g}\"];\n"));
        }
        for &(a, b) in &self.edges {
            out.push_str(&format!("  v{a} -- v{b};\n"));
        }
        for (i, &v) in self.legs.iter().enumerate() {
            let label = i + 1;
            out.push_str(&format!("  leg{label} [shape=point, style=invis];\n"));
            out.push_str(&format!("  v{v} -- leg{label} [label=\"{label}\"];\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// Dense ranks of `keys` in sorted order.
fn rank<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).expect("key present"))
        .collect()
}

/// Iterates neighbour-multiset refinement until the partition is stable.
/// Ranks depend only on colour signatures, never on vertex indices.
fn refine(multiplicity: &[BTreeMap<usize, u32>], colours: &[usize]) -> Vec<usize> {
    let mut colours = colours.to_vec();
    let mut classes = colours.iter().max().map_or(0, |m| m + 1);
    loop {
        let signatures: Vec<(usize, Vec<(usize, u32)>)> = (0..colours.len())
            .map(|v| {
                let mut sig: Vec<(usize, u32)> = multiplicity[v]
                    .iter()
                    .map(|(&w, &m)| (colours[w], m))
                    .collect();
                sig.sort_unstable();
                (colours[v], sig)
            })
            .collect();
        let next = rank(&signatures);
        let next_classes = next.iter().max().map_or(0, |m| m + 1);
        colours = next;
        if next_classes == classes {
            return colours;
        }
        classes = next_classes;
    }
}

/// Byte encoding of a graph up to label- and genus-preserving isomorphism.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalLabel(Vec<u8>);

impl CanonicalLabel {
    fn from_words(words: &[u32]) -> Self {
        CanonicalLabel(words.iter().flat_map(|w| w.to_be_bytes()).collect())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for CanonicalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

pub fn are_isomorphic(a: &MarkedGraph, b: &MarkedGraph) -> bool {
    a.is_isomorphic(b)
}

/// JSON exchange format for [`MarkedGraph`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<[VertexId; 2]>,
    pub legs: Vec<Leg>,
}

impl GraphJson {
    pub fn into_graph(self) -> Result<MarkedGraph, GraphError> {
        let edges: Vec<(VertexId, VertexId)> = self.edges.iter().map(|&[a, b]| (a, b)).collect();
        MarkedGraph::new(&self.vertices, &edges, &self.legs)
    }
}

/// Small named graphs used throughout the crate and its tests.
pub mod standard {
    use super::MarkedGraph;

    /// One genus-0 vertex carrying legs 1, 2, 3.
    pub fn trinode() -> MarkedGraph {
        MarkedGraph::build(vec![0], vec![], vec![0, 0, 0]).unwrap()
    }

    /// Four-leaf tree with split `{a,b | c,d}`; edge 0 is the internal edge.
    pub fn caterpillar4(split: [u32; 4]) -> MarkedGraph {
        let mut legs = vec![0; 4];
        for (i, &label) in split.iter().enumerate() {
            legs[label as usize - 1] = usize::from(i >= 2);
        }
        MarkedGraph::build(vec![0, 0], vec![(0, 1)], legs).unwrap()
    }

    /// Two loops joined by a bridge: edges `[loop a, bridge b, loop c]`.
    pub fn dumbbell() -> MarkedGraph {
        MarkedGraph::build(vec![0, 0], vec![(0, 0), (0, 1), (1, 1)], vec![]).unwrap()
    }

    /// Two vertices joined by three parallel edges.
    pub fn theta() -> MarkedGraph {
        MarkedGraph::build(vec![0, 0], vec![(0, 1); 3], vec![]).unwrap()
    }

    /// Genus-0 vertex with one loop and leg 1.
    pub fn loop_with_leg() -> MarkedGraph {
        MarkedGraph::build(vec![0], vec![(0, 0)], vec![0]).unwrap()
    }

    /// A trivalent graph of type `(g, n)` with `2g - 2 + n > 0`: a caterpillar
    /// spine whose ends are legs followed by `g` pendant loops.
    pub fn comb(g: usize, n: usize) -> Option<MarkedGraph> {
        if 2 * g + n <= 2 {
            return None;
        }
        let ends = n + g;
        let mut genus = Vec::new();
        let mut edges = Vec::new();
        let mut legs = vec![usize::MAX; n];
        // Attach end `i` (leg or pendant loop) to spine vertex `at`.
        let mut attach =
            |i: usize, at: usize, genus: &mut Vec<u32>, edges: &mut Vec<(usize, usize)>| {
                if i < n {
                    legs[i] = at;
                } else {
                    let lollipop = genus.len();
                    genus.push(0);
                    edges.push((lollipop, lollipop));
                    edges.push((at, lollipop));
                }
            };
        if ends == 2 {
            // (1,1) or (2,0): the two ends meet directly.
            genus.push(0);
            if n == 1 {
                edges.push((0, 0));
                attach(0, 0, &mut genus, &mut edges);
            } else {
                edges.push((0, 0));
                attach(1, 0, &mut genus, &mut edges);
            }
        } else {
            let spine = ends - 2;
            genus.extend(std::iter::repeat_n(0, spine));
            for s in 1..spine {
                edges.push((s - 1, s));
            }
            attach(0, 0, &mut genus, &mut edges);
            attach(1, 0, &mut genus, &mut edges);
            for s in 1..spine {
                attach(s + 1, s, &mut genus, &mut edges);
            }
            attach(ends - 1, spine - 1, &mut genus, &mut edges);
        }
        MarkedGraph::build(genus, edges, legs).ok()
    }
}
