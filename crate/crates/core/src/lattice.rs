//! Lattice points of the weighting cones of a trivalent graph.
//!
//! A weighting assigns a nonnegative integer to every internal edge and leg.
//! It is a point of level `L` when at every vertex the three slot weights
//! `(a, b, c)` satisfy the triangle inequalities, have even sum, and obey
//! `a + b + c <= 2L` and `max(a, b, c) <= L`. A loop contributes its weight
//! to both of its slots.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contract::{contract_network, LegMode};
use crate::graph::{EdgeSlot, MarkedGraph};

/// Default cap on the number of states visited by the brute-force counter.
pub const DEFAULT_BRUTE_LIMIT: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("vertex {vertex} is not a genus-0 trivalent vertex")]
    NonTrivalentGraph { vertex: usize },
    #[error("graph is not a trivalent tree")]
    NotATree,
    #[error("brute force would visit {states} states, above the limit of {limit}")]
    InstanceTooLarge { states: String, limit: u64 },
    #[error("expected {expected} leg weights, got {found}")]
    LegCountMismatch { expected: usize, found: usize },
    #[error("weighting does not match the graph (expected {edges} edges and {legs} legs)")]
    DomainMismatch { edges: usize, legs: usize },
}

/// Classical Clebsch-Gordan condition: triangle inequalities and even sum.
pub fn admissible_triple(a: u32, b: u32, c: u32) -> bool {
    let (a, b, c) = (a as u64, b as u64, c as u64);
    a.abs_diff(b) <= c && c <= a + b && (a + b + c) % 2 == 0
}

/// Level-`L` condition: classical admissibility, every weight at most `L`,
/// and total at most `2L`.
pub fn admissible_triple_level(a: u32, b: u32, c: u32, level: u32) -> bool {
    admissible_triple(a, b, c)
        && a.max(b).max(c) <= level
        && a as u64 + b as u64 + c as u64 <= 2 * level as u64
}

/// Edge and leg weights of a graph. `legs[i]` belongs to label `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Weighting {
    pub edges: Vec<u32>,
    pub legs: Vec<u32>,
}

impl Weighting {
    pub fn zero(graph: &MarkedGraph) -> Self {
        Weighting {
            edges: vec![0; graph.num_edges()],
            legs: vec![0; graph.num_legs()],
        }
    }

    pub fn slot(&self, slot: EdgeSlot) -> u32 {
        match slot {
            EdgeSlot::Edge(e) => self.edges[e],
            EdgeSlot::Leg(l) => self.legs[l as usize - 1],
        }
    }

    pub fn matches(&self, graph: &MarkedGraph) -> bool {
        self.edges.len() == graph.num_edges() && self.legs.len() == graph.num_legs()
    }

    /// Edgewise `self >= other`.
    pub fn dominates(&self, other: &Weighting) -> bool {
        self.edges.iter().zip(&other.edges).all(|(a, b)| a >= b)
            && self.legs.iter().zip(&other.legs).all(|(a, b)| a >= b)
    }

    /// Edgewise difference; `None` if some entry would go negative.
    pub fn checked_sub(&self, other: &Weighting) -> Option<Weighting> {
        let sub = |a: &[u32], b: &[u32]| -> Option<Vec<u32>> {
            a.iter().zip(b).map(|(x, y)| x.checked_sub(*y)).collect()
        };
        Some(Weighting {
            edges: sub(&self.edges, &other.edges)?,
            legs: sub(&self.legs, &other.legs)?,
        })
    }
}

impl Add for &Weighting {
    type Output = Weighting;

    fn add(self, rhs: &Weighting) -> Weighting {
        Weighting {
            edges: self
                .edges
                .iter()
                .zip(&rhs.edges)
                .map(|(a, b)| a + b)
                .collect(),
            legs: self
                .legs
                .iter()
                .zip(&rhs.legs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// A weighting together with its level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelledWeighting {
    pub weights: Weighting,
    pub level: u32,
}

impl LevelledWeighting {
    pub fn new(edges: Vec<u32>, legs: Vec<u32>, level: u32) -> Self {
        LevelledWeighting {
            weights: Weighting { edges, legs },
            level,
        }
    }

    pub fn zero(graph: &MarkedGraph) -> Self {
        LevelledWeighting {
            weights: Weighting::zero(graph),
            level: 0,
        }
    }

    pub fn checked_sub(&self, other: &LevelledWeighting) -> Option<LevelledWeighting> {
        Some(LevelledWeighting {
            weights: self.weights.checked_sub(&other.weights)?,
            level: self.level.checked_sub(other.level)?,
        })
    }

    pub fn to_json_value(&self) -> WeightingJson {
        WeightingJson {
            edges: self
                .weights
                .edges
                .iter()
                .enumerate()
                .map(|(i, &w)| (i, w))
                .collect(),
            legs: self
                .weights
                .legs
                .iter()
                .enumerate()
                .map(|(i, &w)| (i as u32 + 1, w))
                .collect(),
            level: self.level,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("weighting json is always serialisable")
    }
}

impl Add for &LevelledWeighting {
    type Output = LevelledWeighting;

    fn add(self, rhs: &LevelledWeighting) -> LevelledWeighting {
        LevelledWeighting {
            weights: &self.weights + &rhs.weights,
            level: self.level + rhs.level,
        }
    }
}

/// `{"edges":{"<edge-index>":int},"legs":{"<label>":int},"level":int}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightingJson {
    pub edges: BTreeMap<usize, u32>,
    pub legs: BTreeMap<u32, u32>,
    pub level: u32,
}

impl WeightingJson {
    pub fn into_weighting(self, graph: &MarkedGraph) -> Result<LevelledWeighting, LatticeError> {
        let mismatch = LatticeError::DomainMismatch {
            edges: graph.num_edges(),
            legs: graph.num_legs(),
        };
        let edges_ok = self.edges.keys().copied().eq(0..graph.num_edges());
        let legs_ok = self.legs.keys().copied().eq(1..=graph.num_legs() as u32);
        if !edges_ok || !legs_ok {
            return Err(mismatch);
        }
        Ok(LevelledWeighting::new(
            self.edges.into_values().collect(),
            self.legs.into_values().collect(),
            self.level,
        ))
    }
}

/// Exact lattice-point count.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CountResult {
    pub value: BigUint,
}

impl CountResult {
    pub fn to_u64(&self) -> Option<u64> {
        self.value.to_u64()
    }
}

impl From<BigUint> for CountResult {
    fn from(value: BigUint) -> Self {
        CountResult { value }
    }
}

impl From<u64> for CountResult {
    fn from(value: u64) -> Self {
        CountResult {
            value: BigUint::from(value),
        }
    }
}

impl PartialEq<u64> for CountResult {
    fn eq(&self, other: &u64) -> bool {
        self.value == BigUint::from(*other)
    }
}

impl fmt::Display for CountResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Slot triples of every vertex; fails unless all vertices are genus 0 and
/// trivalent.
pub fn trivalent_stars(graph: &MarkedGraph) -> Result<Vec<[EdgeSlot; 3]>, LatticeError> {
    (0..graph.num_vertices())
        .map(|v| {
            let star = graph.star(v);
            if graph.vertex_genus(v) != 0 || star.len() != 3 {
                return Err(LatticeError::NonTrivalentGraph { vertex: v });
            }
            Ok([star[0], star[1], star[2]])
        })
        .collect()
}

fn check_legs(graph: &MarkedGraph, leaf_weights: &[u32]) -> Result<(), LatticeError> {
    if leaf_weights.len() != graph.num_legs() {
        return Err(LatticeError::LegCountMismatch {
            expected: graph.num_legs(),
            found: leaf_weights.len(),
        });
    }
    Ok(())
}

fn star_ok(star: &[EdgeSlot; 3], w: &Weighting, level: u32) -> bool {
    admissible_triple_level(w.slot(star[0]), w.slot(star[1]), w.slot(star[2]), level)
}

pub fn is_point(graph: &MarkedGraph, w: &LevelledWeighting) -> Result<bool, LatticeError> {
    let stars = trivalent_stars(graph)?;
    if !w.weights.matches(graph) {
        return Err(LatticeError::DomainMismatch {
            edges: graph.num_edges(),
            legs: graph.num_legs(),
        });
    }
    Ok(stars.iter().all(|s| star_ok(s, &w.weights, w.level)))
}

/// Number of internal-edge weightings that, with the given leg weights,
/// form a point of level `level`. Computed by tensor contraction.
pub fn count_points(
    graph: &MarkedGraph,
    leaf_weights: &[u32],
    level: u32,
) -> Result<CountResult, LatticeError> {
    let stars = trivalent_stars(graph)?;
    check_legs(graph, leaf_weights)?;
    Ok(contract_network(&stars, LegMode::Fixed(leaf_weights), level).into())
}

/// Literal loop over all `(L+1)^{#edges}` internal weightings.
pub fn count_points_bruteforce(
    graph: &MarkedGraph,
    leaf_weights: &[u32],
    level: u32,
    limit: u64,
) -> Result<CountResult, LatticeError> {
    let stars = trivalent_stars(graph)?;
    check_legs(graph, leaf_weights)?;
    let m = graph.num_edges();
    let states = BigUint::from(level as u64 + 1).pow(m as u32);
    if states > BigUint::from(limit) {
        return Err(LatticeError::InstanceTooLarge {
            states: states.to_string(),
            limit,
        });
    }
    let mut w = Weighting {
        edges: vec![0; m],
        legs: leaf_weights.to_vec(),
    };
    let mut count = 0u64;
    loop {
        if stars.iter().all(|s| star_ok(s, &w, level)) {
            count += 1;
        }
        let mut k = m;
        loop {
            if k == 0 {
                return Ok(count.into());
            }
            k -= 1;
            w.edges[k] += 1;
            if w.edges[k] <= level {
                break;
            }
            w.edges[k] = 0;
        }
    }
}

/// Streams every point counted by [`count_points`], lexicographically in
/// edge-index order.
pub fn enumerate_points(
    graph: &MarkedGraph,
    leaf_weights: &[u32],
    level: u32,
) -> Result<Points, LatticeError> {
    let stars = trivalent_stars(graph)?;
    check_legs(graph, leaf_weights)?;
    Ok(Points::new(
        graph,
        stars,
        Some(leaf_weights.to_vec()),
        level,
    ))
}

/// Streams every point of level `level` with legs free in `0..=level`.
/// Variables are ordered edges first, then legs by label.
pub fn enumerate_level_points(graph: &MarkedGraph, level: u32) -> Result<Points, LatticeError> {
    let stars = trivalent_stars(graph)?;
    Ok(Points::new(graph, stars, None, level))
}

/// Backtracking enumerator. A vertex is checked as soon as all of its
/// variables are assigned.
#[derive(Debug, Clone)]
pub struct Points {
    stars: Vec<[EdgeSlot; 3]>,
    level: u32,
    num_edges: usize,
    current: Weighting,
    /// `closes[k]`: vertices whose last variable is variable `k`.
    closes: Vec<Vec<usize>>,
    next_value: Vec<u32>,
    depth: usize,
    done: bool,
}

impl Points {
    fn new(
        graph: &MarkedGraph,
        stars: Vec<[EdgeSlot; 3]>,
        fixed_legs: Option<Vec<u32>>,
        level: u32,
    ) -> Self {
        let num_edges = graph.num_edges();
        let free_legs = fixed_legs.is_none();
        let current = Weighting {
            edges: vec![0; num_edges],
            legs: fixed_legs.unwrap_or_else(|| vec![0; graph.num_legs()]),
        };
        let num_vars = num_edges + if free_legs { graph.num_legs() } else { 0 };
        let var_of = |slot: &EdgeSlot| match *slot {
            EdgeSlot::Edge(e) => Some(e),
            EdgeSlot::Leg(l) if free_legs => Some(num_edges + l as usize - 1),
            EdgeSlot::Leg(_) => None,
        };
        let mut closes = vec![Vec::new(); num_vars];
        let mut done = false;
        for (v, star) in stars.iter().enumerate() {
            match star.iter().filter_map(var_of).max() {
                Some(k) => closes[k].push(v),
                None => done |= !star_ok(star, &current, level),
            }
        }
        Points {
            stars,
            level,
            num_edges,
            current,
            closes,
            next_value: vec![0; num_vars],
            depth: 0,
            done,
        }
    }

    fn set(&mut self, var: usize, value: u32) {
        if var < self.num_edges {
            self.current.edges[var] = value;
        } else {
            self.current.legs[var - self.num_edges] = value;
        }
    }

    fn num_vars(&self) -> usize {
        self.next_value.len()
    }
}

impl Iterator for Points {
    type Item = LevelledWeighting;

    fn next(&mut self) -> Option<LevelledWeighting> {
        loop {
            if self.done {
                return None;
            }
            if self.depth == self.num_vars() {
                let out = LevelledWeighting {
                    weights: self.current.clone(),
                    level: self.level,
                };
                if self.depth == 0 {
                    self.done = true;
                } else {
                    self.depth -= 1;
                }
                return Some(out);
            }
            let k = self.depth;
            let mut found = None;
            let mut value = self.next_value[k];
            while value <= self.level {
                self.set(k, value);
                if self.closes[k]
                    .iter()
                    .all(|&v| star_ok(&self.stars[v], &self.current, self.level))
                {
                    found = Some(value);
                    break;
                }
                value += 1;
            }
            match found {
                Some(value) => {
                    self.next_value[k] = value + 1;
                    self.depth += 1;
                    if self.depth < self.num_vars() {
                        self.next_value[self.depth] = 0;
                    }
                }
                None => {
                    if k == 0 {
                        self.done = true;
                    } else {
                        self.depth -= 1;
                    }
                }
            }
        }
    }
}

/// Count of internal weightings of a trivalent tree satisfying the
/// classical rules only (no level). Evaluated by Clebsch-Gordan
/// decomposition from the leaves towards leg 1.
pub fn count_classical(
    tree: &MarkedGraph,
    leaf_weights: &[u32],
) -> Result<CountResult, LatticeError> {
    if !tree.is_tree() || !tree.is_trivalent() {
        return Err(LatticeError::NotATree);
    }
    check_legs(tree, leaf_weights)?;
    let root = tree.legs()[0];
    let dist = subtree_distribution(tree, leaf_weights, root, EdgeSlot::Leg(1));
    Ok(dist
        .get(&leaf_weights[0])
        .cloned()
        .unwrap_or_default()
        .into())
}

/// Multiplicities of each weight on the slot `towards` at vertex `v`,
/// summed over the subtree hanging off the other two slots.
fn subtree_distribution(
    tree: &MarkedGraph,
    r: &[u32],
    v: usize,
    towards: EdgeSlot,
) -> BTreeMap<u32, BigUint> {
    let children: Vec<BTreeMap<u32, BigUint>> = tree
        .star(v)
        .into_iter()
        .filter(|&s| s != towards)
        .map(|s| match s {
            EdgeSlot::Leg(l) => BTreeMap::from([(r[l as usize - 1], BigUint::one())]),
            EdgeSlot::Edge(e) => {
                let (a, b) = tree.edges()[e];
                let other = if a == v { b } else { a };
                subtree_distribution(tree, r, other, EdgeSlot::Edge(e))
            }
        })
        .collect();
    let mut out: BTreeMap<u32, BigUint> = BTreeMap::new();
    for (&a, x) in &children[0] {
        for (&b, y) in &children[1] {
            let mut m = a.abs_diff(b);
            while m <= a + b {
                *out.entry(m).or_insert_with(BigUint::zero) += x * y;
                m += 2;
            }
        }
    }
    out
}

/// Points of level exactly `level` with all legs free in `0..=level`.
pub fn count_cox(graph: &MarkedGraph, level: u32) -> Result<CountResult, LatticeError> {
    let stars = trivalent_stars(graph)?;
    Ok(contract_network(&stars, LegMode::Free, level).into())
}
