//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use vk_core::graph::standard::{caterpillar4, comb, dumbbell, loop_with_leg, theta, trinode};
use vk_core::lattice::{
    count_classical, count_points, count_points_bruteforce, enumerate_level_points, is_point,
    DEFAULT_BRUTE_LIMIT,
};
use vk_core::moduli::{enumerate_trivalent, flip_connectivity};
use vk_core::semigroup::{
    degree_one_generation_check, filtration_value, gorenstein_check, hilbert_cox, Functional,
    InteriorRule,
};
use vk_core::verlinde::{
    factorization_4point, fusion_coeff, verlinde, verlinde_closed_form, FactorizationRecursion,
    FusionQuery, VerlindeInstance,
};
use vk_core::{LevelledWeighting, MarkedGraph};

const SEED: u64 = 0x5eed_2026;
const CROSS_METHOD_BUDGET: Duration = Duration::from_secs(120);
const GORENSTEIN_BUDGET: Duration = Duration::from_secs(60);
const ENUMERATION_BUDGET: Duration = Duration::from_secs(300);

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(start: Instant, budget: Duration) -> Outcome {
    let took = start.elapsed();
    ensure!(took <= budget, "took {:.1?}, budget {:?}", took, budget);
    Ok(format!("{took:.1?}"))
}

fn vectors(len: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=max).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn trees_up_to(n: usize) -> Vec<MarkedGraph> {
    (3..=n)
        .flat_map(|k| enumerate_trivalent(0, k).unwrap())
        .map(|c| c.graph)
        .collect()
}

fn cross_method_agreement() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    for level in 0..=6u32 {
        let mut recursion = FactorizationRecursion::new(level);
        for genus in 0..=2usize {
            for n in 0..=4usize {
                for r in vectors(n, level) {
                    let inst = VerlindeInstance::new(genus, r.clone(), level);
                    let count = verlinde(&inst);
                    let closed =
                        verlinde_closed_form(&inst).map_err(|e| format!("{inst:?}: {e}"))?;
                    let factor = recursion.value(genus, &r);
                    ensure!(
                        count == closed && count.value == factor,
                        "{inst:?}: count {count}, closed {closed}, factor {factor}"
                    );
                    if genus == 0 && n == 4 {
                        let h4 = factorization_4point(r[0], r[1], r[2], r[3], level);
                        ensure!(h4 == count, "{inst:?}: four-point {h4} vs count {count}");
                    }
                    checked += 1;
                }
            }
        }
    }
    within(start, CROSS_METHOD_BUDGET).map(|t| format!("{checked} instances in {t}"))
}

fn graph_independence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut checked = 0usize;
    for (g, n) in [(0, 4), (0, 5), (0, 6), (1, 1), (1, 2), (2, 0), (2, 1)] {
        let classes = enumerate_trivalent(g, n).unwrap();
        for _ in 0..50 {
            let level = rng.gen_range(0..=5u32);
            let r: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=level)).collect();
            let expected = verlinde(&VerlindeInstance::new(g, r.clone(), level));
            for c in &classes {
                let got = count_points(&c.graph, &r, level).map_err(|e| e.to_string())?;
                ensure!(
                    got == expected,
                    "({g},{n}) r={r:?} L={level}: {} gives {got}, expected {expected}",
                    c.label
                );
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} counts"))
}

fn known_values() -> Outcome {
    for level in 0..=20u32 {
        let v = verlinde(&VerlindeInstance::new(1, vec![], level));
        ensure!(v == u64::from(level) + 1, "genus 1 at level {level}: {v}");
    }
    let v = verlinde(&VerlindeInstance::new(2, vec![], 1));
    ensure!(v == 4, "genus 2 at level 1: {v}");
    let cox = hilbert_cox(&trinode(), 10).map_err(|e| e.to_string())?;
    for level in 0..=10u32 {
        for r in vectors(3, level) {
            let v = verlinde(&VerlindeInstance::new(0, r.clone(), level));
            let n = fusion_coeff(FusionQuery {
                a: r[0],
                b: r[1],
                c: r[2],
                level,
            });
            ensure!(
                v == u64::from(n),
                "fusion {r:?} at level {level}: {v} vs {n}"
            );
        }
        let l = u64::from(level);
        let binom = BigUint::from((l + 3) * (l + 2) * (l + 1) / 6);
        let got = &cox.values[level as usize];
        ensure!(
            *got == binom,
            "trinode Cox count at level {level}: {got} vs {binom}"
        );
    }
    Ok("genus 1, genus 2, fusion and Cox values".into())
}

fn oracle_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED ^ 4);
    let mut checked = 0usize;
    let signatures = [
        (0, 4),
        (0, 5),
        (0, 6),
        (0, 7),
        (1, 1),
        (1, 2),
        (1, 3),
        (2, 0),
        (2, 1),
        (2, 2),
        (3, 0),
    ];
    for (g, n) in signatures {
        for c in enumerate_trivalent(g, n).unwrap() {
            if c.graph.num_edges() > 6 {
                continue;
            }
            for level in 0..=4u32 {
                for _ in 0..20 {
                    let r: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=level + 1)).collect();
                    let fast = count_points(&c.graph, &r, level).map_err(|e| e.to_string())?;
                    let slow = count_points_bruteforce(&c.graph, &r, level, DEFAULT_BRUTE_LIMIT)
                        .map_err(|e| e.to_string())?;
                    ensure!(
                        fast == slow,
                        "{} r={r:?} L={level}: {fast} vs brute force {slow}",
                        c.label
                    );
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} comparisons"))
}

fn tree_stabilization() -> Outcome {
    let mut checked = 0usize;
    for tree in trees_up_to(5) {
        for r in vectors(tree.num_legs(), 4) {
            let total: u32 = r.iter().sum();
            let classical = count_classical(&tree, &r).map_err(|e| e.to_string())?;
            let mut previous = BigUint::zero();
            for level in 0..=total + 1 {
                let c = count_points(&tree, &r, level).map_err(|e| e.to_string())?;
                ensure!(c.value >= previous, "r={r:?}: count drops at level {level}");
                if level >= total {
                    ensure!(
                        c == classical,
                        "r={r:?} L={level}: {c} vs classical {classical}"
                    );
                }
                previous = c.value;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} leaf vectors"))
}

fn gorenstein() -> Outcome {
    let start = Instant::now();
    let mut interior = 0usize;
    for (name, graph) in [
        ("trinode", trinode()),
        ("caterpillar", caterpillar4([1, 2, 3, 4])),
        ("dumbbell", dumbbell()),
        ("theta", theta()),
        ("loop with leg", loop_with_leg()),
    ] {
        let cert = gorenstein_check(&graph, 8).map_err(|e| format!("{name}: {e}"))?;
        ensure!(
            cert.verify(&graph, InteriorRule::FULL)
                .map_err(|e| e.to_string())?,
            "{name}: certificate does not re-verify"
        );
        interior += cert.witnesses.len();
    }
    within(start, GORENSTEIN_BUDGET).map(|t| format!("{interior} interior points in {t}"))
}

fn degree_one_generation() -> Outcome {
    let mut points = 0usize;
    for tree in trees_up_to(5) {
        let cert = degree_one_generation_check(&tree, 3).map_err(|e| e.to_string())?;
        ensure!(
            cert.verify(&tree).map_err(|e| e.to_string())?,
            "certificate does not re-verify"
        );
        points += cert.decompositions.len();
    }
    Ok(format!("{points} points decomposed"))
}

fn enumeration_and_flips() -> Outcome {
    let start = Instant::now();
    for (n, expected) in [(3, 1), (4, 3), (5, 15), (6, 105), (7, 945)] {
        let found = enumerate_trivalent(0, n).unwrap().len();
        ensure!(
            found == expected,
            "(0,{n}): {found} classes, expected {expected}"
        );
    }
    let found = enumerate_trivalent(2, 0).unwrap().len();
    ensure!(found == 2, "(2,0): {found} classes, expected 2");
    for (g, n) in [(0, 4), (0, 5), (0, 6), (2, 0), (1, 2)] {
        let flips = flip_connectivity(g, n).unwrap();
        ensure!(flips.connected, "flip graph of ({g},{n}) is disconnected");
    }
    within(start, ENUMERATION_BUDGET)
}

fn random_functional(rng: &mut StdRng, graph: &MarkedGraph) -> Functional {
    let mut q = || {
        BigRational::new(
            BigInt::from(rng.gen_range(0..30)),
            BigInt::from(rng.gen_range(1..8)),
        )
    };
    let edges = (0..graph.num_edges()).map(|_| q()).collect();
    let legs = (0..graph.num_legs()).map(|_| q()).collect();
    Functional::new(edges, legs).unwrap()
}

fn valuation_additivity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED ^ 9);
    let graphs = [
        trinode(),
        caterpillar4([1, 2, 3, 4]),
        dumbbell(),
        theta(),
        loop_with_leg(),
        comb(0, 5).unwrap(),
        comb(1, 2).unwrap(),
    ];
    for graph in &graphs {
        let pools: Vec<Vec<LevelledWeighting>> = (1..=4)
            .map(|l| enumerate_level_points(graph, l).unwrap().collect())
            .collect();
        for _ in 0..1000 {
            let a = &pools[rng.gen_range(0..4)];
            let b = &pools[rng.gen_range(0..4)];
            let (w1, w2) = (&a[rng.gen_range(0..a.len())], &b[rng.gen_range(0..b.len())]);
            let theta = random_functional(&mut rng, graph);
            let sum = w1 + w2;
            ensure!(
                is_point(graph, &sum).map_err(|e| e.to_string())?,
                "sum of points is not a point"
            );
            let lhs = filtration_value(&sum, &theta).map_err(|e| e.to_string())?;
            let rhs = filtration_value(w1, &theta).map_err(|e| e.to_string())?
                + filtration_value(w2, &theta).map_err(|e| e.to_string())?;
            ensure!(
                lhs == rhs,
                "{} + {}: {lhs} vs {rhs}",
                w1.to_json(),
                w2.to_json()
            );
        }
    }
    Ok(format!("{} graphs x 1000 pairs", graphs.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("cross-method agreement", cross_method_agreement),
        ("graph independence", graph_independence),
        ("known values", known_values),
        ("brute-force oracle", oracle_equivalence),
        ("tree stabilization and monotonicity", tree_stabilization),
        ("Gorenstein property", gorenstein),
        ("degree-one generation on trees", degree_one_generation),
        (
            "graph enumeration and flip connectivity",
            enumeration_and_flips,
        ),
        ("valuation additivity", valuation_additivity),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
