//! Combinatorics of the stratification of the moduli of stable curves.
//!
//! Trivalent types are generated by inserting legs into smaller types and by
//! gluing two legs into an edge, then deduplicated by canonical label.
//! Stable types are the closure of the trivalent ones under edge
//! contraction.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::standard::{loop_with_leg, trinode};
use crate::graph::{CanonicalLabel, EdgeSlot, MarkedGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModuliError {
    #[error("signature (g={genus}, n={legs}) is unstable: 2g - 2 + n must be positive")]
    UnstableSignature { genus: usize, legs: usize },
}

fn check_signature(genus: usize, legs: usize) -> Result<(), ModuliError> {
    if 2 * genus + legs <= 2 {
        return Err(ModuliError::UnstableSignature { genus, legs });
    }
    Ok(())
}

/// Isomorphism class with a canonicalised representative.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GraphClass {
    pub label: CanonicalLabel,
    pub graph: MarkedGraph,
}

impl GraphClass {
    pub fn of(graph: &MarkedGraph) -> Self {
        let graph = graph.canonicalize();
        GraphClass {
            label: graph.canonical_form(),
            graph,
        }
    }

    /// Dimension of the cone of edge lengths: internal edges plus legs.
    pub fn cone_dim(&self) -> usize {
        self.graph.num_edges() + self.graph.num_legs()
    }
}

fn dedup(graphs: impl IntoIterator<Item = MarkedGraph>) -> Vec<GraphClass> {
    let mut classes = BTreeMap::new();
    for g in graphs {
        let class = GraphClass::of(&g);
        classes.entry(class.label.clone()).or_insert(class);
    }
    classes.into_values().collect()
}

/// Every way of attaching a new leg (with the next label) to the middle of
/// an edge or leg.
fn insert_leg(graph: &MarkedGraph) -> Vec<MarkedGraph> {
    let genus = graph.vertex_genera();
    let w = genus.len();
    let mut out = Vec::new();
    for e in 0..graph.num_edges() {
        let (a, b) = graph.edges()[e];
        let mut edges = graph.edges().to_vec();
        edges[e] = (a, w);
        edges.push((w, b));
        let mut legs = graph.legs().to_vec();
        legs.push(w);
        let mut genus = genus.to_vec();
        genus.push(0);
        out.push(
            MarkedGraph::build(genus, edges, legs).expect("subdividing an edge keeps stability"),
        );
    }
    for l in 0..graph.num_legs() {
        let v = graph.legs()[l];
        let mut edges = graph.edges().to_vec();
        edges.push((v, w));
        let mut legs = graph.legs().to_vec();
        legs[l] = w;
        legs.push(w);
        let mut genus = genus.to_vec();
        genus.push(0);
        out.push(
            MarkedGraph::build(genus, edges, legs).expect("subdividing a leg keeps stability"),
        );
    }
    out
}

/// Joins legs 1 and 2 into an internal edge; remaining legs shift down by two.
fn glue_first_legs(graph: &MarkedGraph) -> MarkedGraph {
    let legs = graph.legs();
    let mut edges = graph.edges().to_vec();
    edges.push((legs[0], legs[1]));
    MarkedGraph::build(graph.vertex_genera().to_vec(), edges, legs[2..].to_vec())
        .expect("gluing legs of a connected stable graph stays connected and stable")
}

fn trivalent_graphs(genus: usize, legs: usize) -> Vec<GraphClass> {
    match (genus, legs) {
        (0, 3) => vec![GraphClass::of(&trinode())],
        (1, 1) => vec![GraphClass::of(&loop_with_leg())],
        (g, n) if n >= 1 && 2 * g + n > 3 => dedup(
            trivalent_graphs(g, n - 1)
                .iter()
                .flat_map(|c| insert_leg(&c.graph)),
        ),
        (g, 0) => dedup(
            trivalent_graphs(g - 1, 2)
                .iter()
                .map(|c| glue_first_legs(&c.graph)),
        ),
        _ => unreachable!("signature checked by caller"),
    }
}

/// All trivalent genus-0-vertex classes of type `(g, n)`, sorted by label.
pub fn enumerate_trivalent(genus: usize, legs: usize) -> Result<Vec<GraphClass>, ModuliError> {
    check_signature(genus, legs)?;
    Ok(trivalent_graphs(genus, legs))
}

/// All stable classes of type `(g, n)`, sorted by label.
pub fn enumerate_stable(genus: usize, legs: usize) -> Result<Vec<GraphClass>, ModuliError> {
    let mut seen: BTreeMap<CanonicalLabel, GraphClass> = BTreeMap::new();
    let mut queue: VecDeque<GraphClass> = VecDeque::new();
    for c in enumerate_trivalent(genus, legs)? {
        seen.insert(c.label.clone(), c.clone());
        queue.push_back(c);
    }
    while let Some(c) = queue.pop_front() {
        for e in 0..c.graph.num_edges() {
            let contracted = c
                .graph
                .contract_edge(EdgeSlot::Edge(e))
                .expect("internal edge");
            let class = GraphClass::of(&contracted);
            if !seen.contains_key(&class.label) {
                seen.insert(class.label.clone(), class.clone());
                queue.push_back(class);
            }
        }
    }
    Ok(seen.into_values().collect())
}

/// Stable classes with their single-contraction Hasse diagram.
#[derive(Debug, Clone)]
pub struct StratumComplex {
    pub genus: usize,
    pub legs: usize,
    pub classes: Vec<GraphClass>,
    /// `(i, j)`: contracting one edge of class `i` gives class `j`.
    pub hasse: Vec<(usize, usize)>,
}

impl StratumComplex {
    pub fn dims(&self) -> Vec<usize> {
        self.classes.iter().map(GraphClass::cone_dim).collect()
    }

    pub fn index_of(&self, label: &CanonicalLabel) -> Option<usize> {
        self.classes.binary_search_by(|c| c.label.cmp(label)).ok()
    }

    pub fn hasse_dot(&self) -> String {
        let mut out = String::from("digraph hasse {\n");
        for (i, c) in self.classes.iter().enumerate() {
            out.push_str(&format!(
                "  c{i} [label=\"{i}: V={} E={} dim={}\"];\n",
                c.graph.num_vertices(),
                c.graph.num_edges(),
                c.cone_dim()
            ));
        }
        for &(i, j) in &self.hasse {
            out.push_str(&format!("  c{i} -> c{j};\n"));
        }
        out.push_str("}\n");
        out
    }
}

pub fn contraction_poset(genus: usize, legs: usize) -> Result<StratumComplex, ModuliError> {
    let classes = enumerate_stable(genus, legs)?;
    let index: BTreeMap<&CanonicalLabel, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (&c.label, i))
        .collect();
    let mut hasse = BTreeSet::new();
    for (i, c) in classes.iter().enumerate() {
        for e in 0..c.graph.num_edges() {
            let label = c
                .graph
                .contract_edge(EdgeSlot::Edge(e))
                .expect("internal edge")
                .canonical_form();
            hasse.insert((i, index[&label]));
        }
    }
    Ok(StratumComplex {
        genus,
        legs,
        classes,
        hasse: hasse.into_iter().collect(),
    })
}

/// A flip from a trivalent graph across a genus-0 four-valent ancestor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flip {
    /// Contracted edge in the source graph.
    pub edge: usize,
    pub neighbor: GraphClass,
    /// An edge of `neighbor.graph` whose contraction yields the same ancestor.
    pub neighbor_edge: usize,
    pub ancestor: CanonicalLabel,
}

#[derive(Debug, Clone, Copy)]
enum HalfEdge {
    EdgeEnd(usize, bool),
    Leg(usize),
}

/// Re-expansions of `graph` across each non-loop edge joining two genus-0
/// trivalent vertices, keeping the classes different from `graph`'s.
pub fn flip_neighbors(graph: &MarkedGraph) -> Vec<Flip> {
    let own = graph.canonical_form();
    let mut out: Vec<Flip> = Vec::new();
    for e in 0..graph.num_edges() {
        let (u, v) = graph.edges()[e];
        let flat = |x: usize| graph.vertex_genus(x) == 0 && graph.valence(x) == 3;
        if u == v || !flat(u) || !flat(v) {
            continue;
        }
        let mut halves = Vec::with_capacity(4);
        for (f, &(a, b)) in graph.edges().iter().enumerate() {
            if f == e {
                continue;
            }
            if a == u || a == v {
                halves.push(HalfEdge::EdgeEnd(f, false));
            }
            if b == u || b == v {
                halves.push(HalfEdge::EdgeEnd(f, true));
            }
        }
        for (l, &x) in graph.legs().iter().enumerate() {
            if x == u || x == v {
                halves.push(HalfEdge::Leg(l));
            }
        }
        debug_assert_eq!(halves.len(), 4);

        let ancestor = graph
            .contract_edge(EdgeSlot::Edge(e))
            .expect("internal edge");
        let ancestor_label = ancestor.canonical_form();
        for partner in 1..4 {
            let mut edges = graph.edges().to_vec();
            let mut legs = graph.legs().to_vec();
            for (k, h) in halves.iter().enumerate() {
                let target = if k == 0 || k == partner { u } else { v };
                match *h {
                    HalfEdge::EdgeEnd(f, second) => {
                        if second {
                            edges[f].1 = target;
                        } else {
                            edges[f].0 = target;
                        }
                    }
                    HalfEdge::Leg(l) => legs[l] = target,
                }
            }
            let expanded = MarkedGraph::build(graph.vertex_genera().to_vec(), edges, legs)
                .expect("re-expansion of a connected graph is connected and trivalent");
            let neighbor = GraphClass::of(&expanded);
            if neighbor.label == own
                || out
                    .iter()
                    .any(|f| f.edge == e && f.neighbor.label == neighbor.label)
            {
                continue;
            }
            let neighbor_edge = (0..neighbor.graph.num_edges())
                .find(|&f| {
                    neighbor
                        .graph
                        .contract_edge(EdgeSlot::Edge(f))
                        .is_ok_and(|c| c.canonical_form() == ancestor_label)
                })
                .expect("the re-expanded edge contracts back to the ancestor");
            out.push(Flip {
                edge: e,
                neighbor,
                neighbor_edge,
                ancestor: ancestor_label.clone(),
            });
        }
    }
    out
}

/// Flip graph on the trivalent classes of one signature.
#[derive(Debug, Clone)]
pub struct FlipGraph {
    pub classes: Vec<GraphClass>,
    /// `(i, j, witness)` with `i < j`, one entry per adjacent pair.
    pub flips: Vec<(usize, usize, Flip)>,
    pub connected: bool,
    /// Longest shortest path; `None` when disconnected.
    pub diameter: Option<usize>,
}

impl FlipGraph {
    pub fn flip_dot(&self) -> String {
        let mut out = String::from("graph flips {\n");
        for i in 0..self.classes.len() {
            out.push_str(&format!("  c{i};\n"));
        }
        for (i, j, _) in &self.flips {
            out.push_str(&format!("  c{i} -- c{j};\n"));
        }
        out.push_str("}\n");
        out
    }
}

fn flips_among(classes: &[GraphClass]) -> Vec<(usize, usize, Flip)> {
    let index: BTreeMap<&CanonicalLabel, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (&c.label, i))
        .collect();
    let mut pairs: BTreeMap<(usize, usize), Flip> = BTreeMap::new();
    for (i, c) in classes.iter().enumerate() {
        for flip in flip_neighbors(&c.graph) {
            let j = index[&flip.neighbor.label];
            if i < j {
                pairs.entry((i, j)).or_insert(flip);
            }
        }
    }
    pairs.into_iter().map(|((i, j), f)| (i, j, f)).collect()
}

pub fn flip_connectivity(genus: usize, legs: usize) -> Result<FlipGraph, ModuliError> {
    let classes = enumerate_trivalent(genus, legs)?;
    let flips = flips_among(&classes);
    let n = classes.len();
    let mut adj = vec![Vec::new(); n];
    for (i, j, _) in &flips {
        adj[*i].push(*j);
        adj[*j].push(*i);
    }
    let mut diameter = 0;
    let mut connected = true;
    for s in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        if dist.contains(&usize::MAX) {
            connected = false;
            break;
        }
        diameter = diameter.max(*dist.iter().max().unwrap_or(&0));
    }
    Ok(FlipGraph {
        classes,
        flips,
        connected,
        diameter: connected.then_some(diameter),
    })
}

/// `{"classes":[{"label","graph","dim"}],"hasse":[[i,j]],"flips":[[i,j,{witness}]]}`.
/// Flips are computed among the trivalent members of `classes`.
pub fn complex_json(classes: &[GraphClass], hasse: &[(usize, usize)]) -> Value {
    let trivalent: Vec<usize> = (0..classes.len())
        .filter(|&i| classes[i].graph.is_trivalent())
        .collect();
    let sub: Vec<GraphClass> = trivalent.iter().map(|&i| classes[i].clone()).collect();
    let flips: Vec<Value> = flips_among(&sub)
        .into_iter()
        .map(|(i, j, f)| {
            json!([
                trivalent[i],
                trivalent[j],
                {"ancestor": f.ancestor.to_hex(), "edges": [f.edge, f.neighbor_edge]}
            ])
        })
        .collect();
    json!({
        "classes": classes.iter().map(|c| json!({
            "label": c.label.to_hex(),
            "graph": c.graph.to_json_value(),
            "dim": c.cone_dim(),
        })).collect::<Vec<_>>(),
        "hasse": hasse.iter().map(|&(i, j)| json!([i, j])).collect::<Vec<_>>(),
        "flips": flips,
    })
}
