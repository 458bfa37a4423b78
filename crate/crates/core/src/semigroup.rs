//! Analytics of the affine semigroup of lattice points of a trivalent graph:
//! Hilbert functions, the Gorenstein test through interior points, degree-one
//! generation, and edge functionals (graded valuations).

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::{CanonicalLabel, EdgeSlot, MarkedGraph};
use crate::lattice::{
    count_cox, count_points, enumerate_level_points, is_point, trivalent_stars, LatticeError,
    LevelledWeighting, Weighting,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemigroupError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("counterexample found: {}", .0.to_json())]
    CounterexampleFound(LevelledWeighting),
    #[error("functional and weighting live on different graphs")]
    GraphMismatch,
    #[error("functional values must be nonnegative")]
    NegativeFunctional,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Grading {
    /// Level-`L` piece with all legs free.
    Cox,
    /// `N`-th dilation of a fixed `(r, L)`.
    Projective { weights: Vec<u32>, level: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertTable {
    pub graph: CanonicalLabel,
    pub grading: Grading,
    pub values: Vec<BigUint>,
}

impl HilbertTable {
    /// `{"graph":hex,"grading":"cox"|"projective","base":{...},"values":["<decimal>",...]}`
    pub fn to_json_value(&self) -> Value {
        let (grading, base) = match &self.grading {
            Grading::Cox => ("cox", json!({})),
            Grading::Projective { weights, level } => {
                ("projective", json!({"weights": weights, "level": level}))
            }
        };
        json!({
            "graph": self.graph.to_hex(),
            "grading": grading,
            "base": base,
            "values": self.values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        })
    }
}

pub fn hilbert_cox(graph: &MarkedGraph, max_level: u32) -> Result<HilbertTable, SemigroupError> {
    let values = (0..=max_level)
        .map(|l| count_cox(graph, l).map(|c| c.value))
        .collect::<Result<_, _>>()?;
    Ok(HilbertTable {
        graph: graph.canonical_form(),
        grading: Grading::Cox,
        values,
    })
}

pub fn hilbert_projective(
    graph: &MarkedGraph,
    weights: &[u32],
    level: u32,
    max_dilation: u32,
) -> Result<HilbertTable, SemigroupError> {
    let mut values = Vec::with_capacity(max_dilation as usize + 1);
    for n in 0..=max_dilation {
        let scaled: Vec<u32> = weights.iter().map(|&r| r * n).collect();
        values.push(count_points(graph, &scaled, level * n)?.value);
    }
    Ok(HilbertTable {
        graph: graph.canonical_form(),
        grading: Grading::Projective {
            weights: weights.to_vec(),
            level,
        },
        values,
    })
}

/// Which inequalities must hold strictly for a point to count as interior.
///
/// Strict triangle inequalities at every slot triple and a strict level
/// inequality `a + b + c < 2L` are always required.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteriorRule {
    /// Every edge and leg weight is positive.
    pub positive_weights: bool,
    /// Every edge and leg weight is below the level.
    pub below_level: bool,
}

impl InteriorRule {
    pub const FULL: InteriorRule = InteriorRule {
        positive_weights: true,
        below_level: true,
    };
    pub const FACETS_ONLY: InteriorRule = InteriorRule {
        positive_weights: false,
        below_level: false,
    };
}

impl Default for InteriorRule {
    fn default() -> Self {
        InteriorRule::FULL
    }
}

fn strict_at(star: &[EdgeSlot; 3], w: &LevelledWeighting, rule: InteriorRule) -> bool {
    let [a, b, c] = star.map(|s| w.weights.slot(s) as u64);
    let level = w.level as u64;
    a < b + c
        && b < a + c
        && c < a + b
        && a + b + c < 2 * level
        && (!rule.positive_weights || (a > 0 && b > 0 && c > 0))
        && (!rule.below_level || (a < level && b < level && c < level))
}

pub fn is_interior(
    graph: &MarkedGraph,
    w: &LevelledWeighting,
    rule: InteriorRule,
) -> Result<bool, SemigroupError> {
    if !is_point(graph, w)? {
        return Ok(false);
    }
    let stars = trivalent_stars(graph)?;
    Ok(stars.iter().all(|s| strict_at(s, w, rule)))
}

/// Interior points of level at most `level_bound`, by increasing level.
pub fn interior_points(
    graph: &MarkedGraph,
    level_bound: u32,
    rule: InteriorRule,
) -> Result<impl Iterator<Item = LevelledWeighting>, SemigroupError> {
    let stars = trivalent_stars(graph)?;
    let mut levels = Vec::new();
    for l in 0..=level_bound {
        levels.push(enumerate_level_points(graph, l)?);
    }
    Ok(levels
        .into_iter()
        .flatten()
        .filter(move |w| stars.iter().all(|s| strict_at(s, w, rule))))
}

/// All edges and legs weighted 2 at level 4.
pub fn interior_generator(graph: &MarkedGraph) -> LevelledWeighting {
    LevelledWeighting::new(vec![2; graph.num_edges()], vec![2; graph.num_legs()], 4)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GorensteinCertificate {
    pub generator: LevelledWeighting,
    /// `(interior point, residual)` with `point = generator + residual`.
    pub witnesses: Vec<(LevelledWeighting, LevelledWeighting)>,
    /// Number of points `p` checked for `generator + p` being interior.
    pub translates_checked: usize,
}

impl GorensteinCertificate {
    /// Re-adds every witness and re-tests it against the cone.
    pub fn verify(&self, graph: &MarkedGraph, rule: InteriorRule) -> Result<bool, SemigroupError> {
        for (point, residual) in &self.witnesses {
            if &(&self.generator + residual) != point
                || !is_point(graph, residual)?
                || !is_interior(graph, point, rule)?
            {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Checks that the interior points of level `<= level_bound` are exactly
/// the translates `ω + p` of lattice points `p` by the all-2 weighting `ω`
/// of level 4.
pub fn gorenstein_check(
    graph: &MarkedGraph,
    level_bound: u32,
) -> Result<GorensteinCertificate, SemigroupError> {
    gorenstein_check_with(graph, level_bound, InteriorRule::FULL)
}

pub fn gorenstein_check_with(
    graph: &MarkedGraph,
    level_bound: u32,
    rule: InteriorRule,
) -> Result<GorensteinCertificate, SemigroupError> {
    let generator = interior_generator(graph);
    let mut witnesses = Vec::new();
    for point in interior_points(graph, level_bound, rule)? {
        match point.checked_sub(&generator) {
            Some(residual) if is_point(graph, &residual)? => witnesses.push((point, residual)),
            _ => return Err(SemigroupError::CounterexampleFound(point)),
        }
    }
    let mut translates_checked = 0;
    for l in (4..=level_bound).map(|l| l - 4) {
        for p in enumerate_level_points(graph, l)? {
            let shifted = &generator + &p;
            if !is_interior(graph, &shifted, rule)? {
                return Err(SemigroupError::CounterexampleFound(shifted));
            }
            translates_checked += 1;
        }
    }
    Ok(GorensteinCertificate {
        generator,
        witnesses,
        translates_checked,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationCertificate {
    /// Each point of positive level with level-one summands adding up to it.
    pub decompositions: Vec<(LevelledWeighting, Vec<LevelledWeighting>)>,
}

impl GenerationCertificate {
    pub fn verify(&self, graph: &MarkedGraph) -> Result<bool, SemigroupError> {
        for (point, parts) in &self.decompositions {
            let mut sum = LevelledWeighting::zero(graph);
            for q in parts {
                if q.level != 1 || !is_point(graph, q)? {
                    return Ok(false);
                }
                sum = &sum + q;
            }
            if &sum != point {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Outcome of the degree-one search on an arbitrary trivalent graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenerationReport {
    Generated(GenerationCertificate),
    Counterexample(LevelledWeighting),
}

/// Exact search: memoised depth-first subtraction of level-one points.
struct Decomposer<'a> {
    graph: &'a MarkedGraph,
    generators: Vec<LevelledWeighting>,
    /// First generator of a decomposition, or `None` when none exists.
    memo: HashMap<LevelledWeighting, Option<usize>>,
}

impl Decomposer<'_> {
    fn solvable(&mut self, p: &LevelledWeighting) -> Result<bool, SemigroupError> {
        if p.level == 0 {
            return Ok(p.weights == Weighting::zero(self.graph));
        }
        if let Some(known) = self.memo.get(p) {
            return Ok(known.is_some());
        }
        let mut found = None;
        for i in 0..self.generators.len() {
            let Some(rest) = p.checked_sub(&self.generators[i]) else {
                continue;
            };
            if is_point(self.graph, &rest)? && self.solvable(&rest)? {
                found = Some(i);
                break;
            }
        }
        self.memo.insert(p.clone(), found);
        Ok(found.is_some())
    }

    fn parts(&self, p: &LevelledWeighting) -> Vec<LevelledWeighting> {
        let mut out = Vec::new();
        let mut cur = p.clone();
        while cur.level > 0 {
            let i = self.memo[&cur].expect("solvable point");
            out.push(self.generators[i].clone());
            cur = cur
                .checked_sub(&self.generators[i])
                .expect("generator fits");
        }
        out
    }
}

/// Tries to write every point of level `1..=level_bound` as a sum of
/// level-one points. Works on any trivalent graph; only the genus-0 case
/// is expected to succeed in general.
pub fn degree_one_decompositions(
    graph: &MarkedGraph,
    level_bound: u32,
) -> Result<GenerationReport, SemigroupError> {
    let generators: Vec<LevelledWeighting> = enumerate_level_points(graph, 1)?.collect();
    let mut search = Decomposer {
        graph,
        generators,
        memo: HashMap::new(),
    };
    let mut decompositions = Vec::new();
    for l in 1..=level_bound {
        for p in enumerate_level_points(graph, l)? {
            if !search.solvable(&p)? {
                return Ok(GenerationReport::Counterexample(p));
            }
            let parts = search.parts(&p);
            decompositions.push((p, parts));
        }
    }
    Ok(GenerationReport::Generated(GenerationCertificate {
        decompositions,
    }))
}

/// Degree-one generation on a trivalent tree.
pub fn degree_one_generation_check(
    tree: &MarkedGraph,
    level_bound: u32,
) -> Result<GenerationCertificate, SemigroupError> {
    if !tree.is_tree() || !tree.is_trivalent() {
        return Err(LatticeError::NotATree.into());
    }
    match degree_one_decompositions(tree, level_bound)? {
        GenerationReport::Generated(cert) => Ok(cert),
        GenerationReport::Counterexample(p) => Err(SemigroupError::CounterexampleFound(p)),
    }
}

/// Nonnegative rational weights on edges and legs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Functional {
    pub edges: Vec<BigRational>,
    pub legs: Vec<BigRational>,
}

impl Functional {
    pub fn new(edges: Vec<BigRational>, legs: Vec<BigRational>) -> Result<Self, SemigroupError> {
        if edges.iter().chain(&legs).any(|x| x.is_negative()) {
            return Err(SemigroupError::NegativeFunctional);
        }
        Ok(Functional { edges, legs })
    }

    pub fn zero(graph: &MarkedGraph) -> Self {
        Functional {
            edges: vec![BigRational::zero(); graph.num_edges()],
            legs: vec![BigRational::zero(); graph.num_legs()],
        }
    }

    /// All internal edges carry positive weight.
    pub fn is_strict(&self) -> bool {
        self.edges.iter().all(|x| x.is_positive())
    }
}

/// `sum_e theta_e * w_e` over edges and legs.
pub fn filtration_value(
    w: &LevelledWeighting,
    theta: &Functional,
) -> Result<BigRational, SemigroupError> {
    if w.weights.edges.len() != theta.edges.len() || w.weights.legs.len() != theta.legs.len() {
        return Err(SemigroupError::GraphMismatch);
    }
    let pair = |ws: &[u32], ts: &[BigRational]| -> BigRational {
        ws.iter()
            .zip(ts)
            .map(|(&x, t)| t * BigRational::from_integer(BigInt::from(x)))
            .sum()
    };
    Ok(pair(&w.weights.edges, &theta.edges) + pair(&w.weights.legs, &theta.legs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::standard::*;
    use crate::lattice::count_points_bruteforce;

    fn ints(xs: &[i64]) -> Vec<BigRational> {
        xs.iter()
            .map(|&x| BigRational::from_integer(BigInt::from(x)))
            .collect()
    }

    fn table(values: &[u64]) -> Vec<BigUint> {
        values.iter().map(|&v| BigUint::from(v)).collect()
    }

    #[test]
    fn hilbert_cox_examples() {
        assert_eq!(
            hilbert_cox(&trinode(), 4).unwrap().values,
            table(&[1, 4, 10, 20, 35])
        );
        let db = hilbert_cox(&dumbbell(), 3).unwrap();
        assert_eq!(db.values[0], BigUint::from(1u32));
        assert_eq!(db.values[1], BigUint::from(4u32));
    }

    #[test]
    fn hilbert_projective_examples() {
        assert_eq!(
            hilbert_projective(&trinode(), &[1, 1, 0], 1, 6)
                .unwrap()
                .values,
            table(&[1; 7])
        );
        let cat = caterpillar4([1, 2, 3, 4]);
        // Brute force: the middle edge is forced to 0 at every dilation.
        let expected: Vec<BigUint> = (0..6u32)
            .map(|n| {
                count_points_bruteforce(&cat, &[n; 4], n, 1000)
                    .unwrap()
                    .value
            })
            .collect();
        assert_eq!(expected, table(&[1; 6]));
        assert_eq!(
            hilbert_projective(&cat, &[1, 1, 1, 1], 1, 5)
                .unwrap()
                .values,
            expected
        );
        // At level 2 the middle edge ranges over 0, 2, .., 2N.
        assert_eq!(
            hilbert_projective(&cat, &[1, 1, 1, 1], 2, 4)
                .unwrap()
                .values,
            table(&[1, 2, 3, 4, 5])
        );
        // (N,N,N) has odd sum exactly for odd N.
        assert_eq!(
            hilbert_projective(&trinode(), &[1, 1, 1], 3, 3)
                .unwrap()
                .values,
            table(&[1, 0, 1, 0])
        );
        assert_eq!(
            hilbert_projective(&trinode(), &[3, 0, 0], 3, 2)
                .unwrap()
                .values,
            table(&[1, 0, 0])
        );
    }

    #[test]
    fn hilbert_json_shape() {
        let t = hilbert_projective(&trinode(), &[1, 1, 0], 1, 2).unwrap();
        let v = t.to_json_value();
        assert_eq!(v["grading"], "projective");
        assert_eq!(v["base"]["level"], 1);
        assert_eq!(v["values"], json!(["1", "1", "1"]));
        assert_eq!(v["graph"], trinode().canonical_form().to_hex());
        assert_eq!(
            hilbert_cox(&trinode(), 1).unwrap().to_json_value()["base"],
            json!({})
        );
    }

    #[test]
    fn minimal_interior_points() {
        let first: Vec<_> = interior_points(&trinode(), 4, InteriorRule::FULL)
            .unwrap()
            .collect();
        assert_eq!(
            first,
            vec![LevelledWeighting::new(vec![], vec![2, 2, 2], 4)]
        );
        let first: Vec<_> = interior_points(&dumbbell(), 4, InteriorRule::FULL)
            .unwrap()
            .collect();
        assert_eq!(
            first,
            vec![LevelledWeighting::new(vec![2, 2, 2], vec![], 4)]
        );
        assert_eq!(
            interior_points(&trinode(), 3, InteriorRule::FULL)
                .unwrap()
                .count(),
            0
        );
    }

    #[test]
    fn gorenstein_examples() {
        for g in [trinode(), dumbbell(), theta()] {
            for rule in [InteriorRule::FULL, InteriorRule::FACETS_ONLY] {
                let cert = gorenstein_check_with(&g, 8, rule).unwrap();
                assert!(!cert.witnesses.is_empty());
                assert!(cert.verify(&g, rule).unwrap());
            }
        }
    }

    #[test]
    fn interior_rules_agree_on_trivalent_graphs() {
        for g in [
            trinode(),
            dumbbell(),
            loop_with_leg(),
            caterpillar4([1, 2, 3, 4]),
        ] {
            let a: Vec<_> = interior_points(&g, 7, InteriorRule::FULL)
                .unwrap()
                .collect();
            let b: Vec<_> = interior_points(&g, 7, InteriorRule::FACETS_ONLY)
                .unwrap()
                .collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn gorenstein_certificate_detects_tampering() {
        let mut cert = gorenstein_check(&trinode(), 6).unwrap();
        cert.witnesses[0].1.level += 1;
        assert!(!cert.verify(&trinode(), InteriorRule::FULL).unwrap());
    }

    #[test]
    fn degree_one_examples() {
        let cert = degree_one_generation_check(&trinode(), 4).unwrap();
        assert!(cert.verify(&trinode()).unwrap());
        let cat = caterpillar4([1, 2, 3, 4]);
        let cert = degree_one_generation_check(&cat, 3).unwrap();
        assert!(cert.verify(&cat).unwrap());
        assert_eq!(
            degree_one_generation_check(&dumbbell(), 2),
            Err(SemigroupError::Lattice(LatticeError::NotATree))
        );
    }

    #[test]
    fn degree_one_exploration_on_loop_graph() {
        // Level-one points of the loop-with-leg graph are (a; r) with
        // r even, r <= 2a, 2a + r <= 2: only (0;0) and (1;0). The point
        // (1; 2) at level 2 is not a sum of those.
        match degree_one_decompositions(&loop_with_leg(), 2).unwrap() {
            GenerationReport::Counterexample(p) => {
                assert_eq!(p, LevelledWeighting::new(vec![1], vec![2], 2));
            }
            GenerationReport::Generated(_) => panic!("expected a counterexample"),
        }
    }

    #[test]
    fn filtration_examples() {
        let w = LevelledWeighting::new(vec![], vec![2, 2, 2], 4);
        assert_eq!(
            filtration_value(&w, &Functional::zero(&trinode())).unwrap(),
            BigRational::zero()
        );
        let theta = Functional::new(vec![], ints(&[1, 1, 1])).unwrap();
        assert_eq!(filtration_value(&w, &theta).unwrap(), ints(&[6])[0]);
        let theta = Functional::new(ints(&[1, 1, 1]), vec![]).unwrap();
        let w = LevelledWeighting::new(vec![1, 0, 1], vec![], 1);
        assert_eq!(filtration_value(&w, &theta).unwrap(), ints(&[2])[0]);
        assert!(theta.is_strict());
        assert_eq!(
            filtration_value(&LevelledWeighting::new(vec![], vec![0; 3], 0), &theta),
            Err(SemigroupError::GraphMismatch)
        );
        assert_eq!(
            Functional::new(ints(&[-1]), vec![]).unwrap_err(),
            SemigroupError::NegativeFunctional
        );
    }
}
