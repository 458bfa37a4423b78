//! Exact tensor-network contraction over the internal edges of a trivalent
//! graph. Every vertex contributes a 0/1 fusion tensor (or a leg-summed
//! count tensor); factors are merged greedily by smallest intermediate size.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::graph::EdgeSlot;
use crate::lattice::admissible_triple_level;

/// How leg slots enter the vertex tensors.
#[derive(Debug, Clone, Copy)]
pub(crate) enum LegMode<'a> {
    /// Leg `l` is pinned to `weights[l - 1]`.
    Fixed(&'a [u32]),
    /// Every leg ranges over `0..=level` and is summed inside its vertex.
    Free,
}

#[derive(Debug, Clone)]
struct Factor {
    /// Sorted internal-edge indices, one axis each.
    vars: Vec<usize>,
    /// Row-major over `vars`, each axis of extent `level + 1`.
    data: Vec<BigUint>,
}

impl Factor {
    fn scalar(value: BigUint) -> Self {
        Factor {
            vars: Vec::new(),
            data: vec![value],
        }
    }
}

/// Calls `f` with every assignment of `len` digits in `0..dim`, in
/// lexicographic order.
fn for_each_assignment(len: usize, dim: u32, mut f: impl FnMut(&[u32])) {
    let mut digits = vec![0u32; len];
    loop {
        f(&digits);
        let mut k = len;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < dim {
                break;
            }
            digits[k] = 0;
        }
    }
}

fn vertex_factor(star: &[EdgeSlot; 3], legs: LegMode<'_>, level: u32) -> Factor {
    let mut vars: Vec<usize> = star
        .iter()
        .filter_map(|s| match s {
            EdgeSlot::Edge(e) => Some(*e),
            EdgeSlot::Leg(_) => None,
        })
        .collect();
    vars.sort_unstable();
    vars.dedup();
    let free_legs = match legs {
        LegMode::Free => star
            .iter()
            .filter(|s| matches!(s, EdgeSlot::Leg(_)))
            .count(),
        LegMode::Fixed(_) => 0,
    };

    let dim = level + 1;
    let mut data = Vec::with_capacity((dim as usize).pow(vars.len() as u32));
    for_each_assignment(vars.len(), dim, |edge_values| {
        let mut count = 0u64;
        for_each_assignment(free_legs, dim, |leg_values| {
            let mut next_leg = 0;
            let mut w = [0u32; 3];
            for (slot, value) in star.iter().zip(w.iter_mut()) {
                *value = match *slot {
                    EdgeSlot::Edge(e) => edge_values[vars.binary_search(&e).unwrap()],
                    EdgeSlot::Leg(l) => match legs {
                        LegMode::Fixed(r) => r[l as usize - 1],
                        LegMode::Free => {
                            next_leg += 1;
                            leg_values[next_leg - 1]
                        }
                    },
                };
            }
            if admissible_triple_level(w[0], w[1], w[2], level) {
                count += 1;
            }
        });
        data.push(BigUint::from(count));
    });
    Factor { vars, data }
}

fn flat_index(vars: &[usize], union: &[usize], values: &[u32], dim: u64) -> usize {
    let mut idx = 0u64;
    for v in vars {
        let k = union.binary_search(v).unwrap();
        idx = idx * dim + values[k] as u64;
    }
    idx as usize
}

/// Multiplies `a` and `b`, summing out every variable not listed in `keep`.
fn contract_pair(a: &Factor, b: &Factor, keep: &[usize], dim: u32) -> Factor {
    let mut union: Vec<usize> = a.vars.iter().chain(&b.vars).copied().collect();
    union.sort_unstable();
    union.dedup();
    let out_len = (dim as usize).pow(keep.len() as u32);
    let mut data = vec![BigUint::zero(); out_len];
    for_each_assignment(union.len(), dim, |values| {
        let x = &a.data[flat_index(&a.vars, &union, values, dim as u64)];
        if x.is_zero() {
            return;
        }
        let y = &b.data[flat_index(&b.vars, &union, values, dim as u64)];
        if y.is_zero() {
            return;
        }
        data[flat_index(keep, &union, values, dim as u64)] += x * y;
    });
    Factor {
        vars: keep.to_vec(),
        data,
    }
}

/// Sums `f` over the variables it holds that no other factor references.
fn sum_out_private(f: Factor, others: &[&Factor], dim: u32) -> Factor {
    let keep: Vec<usize> = f
        .vars
        .iter()
        .copied()
        .filter(|v| others.iter().any(|o| o.vars.contains(v)))
        .collect();
    if keep.len() == f.vars.len() {
        return f;
    }
    contract_pair(&f, &Factor::scalar(BigUint::one()), &keep, dim)
}

/// `(no shared variable, result rank, i, j)`, minimised.
type PairKey = (bool, usize, usize, usize);

/// Exact number of internal-edge weightings admissible at every vertex.
pub(crate) fn contract_network(stars: &[[EdgeSlot; 3]], legs: LegMode<'_>, level: u32) -> BigUint {
    let dim = level + 1;
    let mut factors: Vec<Factor> = stars
        .iter()
        .map(|s| vertex_factor(s, legs, level))
        .collect();

    // Loops live inside a single vertex factor: trace them out up front.
    for i in 0..factors.len() {
        let f = std::mem::replace(&mut factors[i], Factor::scalar(BigUint::zero()));
        let others: Vec<&Factor> = factors
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, g)| g)
            .collect();
        factors[i] = sum_out_private(f, &others, dim);
    }

    while factors.len() > 1 {
        // Smallest result first; sharing a variable beats an outer product;
        // ties resolve to the earliest pair.
        let mut best: Option<(PairKey, Vec<usize>)> = None;
        for i in 0..factors.len() {
            for j in i + 1..factors.len() {
                let shares = factors[i].vars.iter().any(|v| factors[j].vars.contains(v));
                let mut union: Vec<usize> = factors[i]
                    .vars
                    .iter()
                    .chain(&factors[j].vars)
                    .copied()
                    .collect();
                union.sort_unstable();
                union.dedup();
                let keep: Vec<usize> = union
                    .into_iter()
                    .filter(|v| {
                        factors
                            .iter()
                            .enumerate()
                            .any(|(k, f)| k != i && k != j && f.vars.contains(v))
                    })
                    .collect();
                let key = (!shares, keep.len(), i, j);
                if best.as_ref().is_none_or(|(b, _)| key < *b) {
                    best = Some((key, keep));
                }
            }
        }
        let ((_, _, i, j), keep) = best.expect("at least two factors");
        let b = factors.remove(j);
        let a = factors.remove(i);
        factors.push(contract_pair(&a, &b, &keep, dim));
    }

    let last = factors.pop().expect("graph has a vertex");
    last.data.iter().sum()
}
