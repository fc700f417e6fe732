//! Shared test-side oracles, independent of the library's solving paths:
//! a small DPLL satisfiability decider for exported CNFs, and seeded
//! random graph / tree builders.
#![allow(dead_code)] // each test binary uses its own subset

use illusion_core::cnf::CnfFormula;
use illusion_core::network::SocialNetwork;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Unit-propagating exhaustive SAT check returning a model. Independent of
/// `cnf::brute_force_sat` (no shared search code) and fast enough for the
/// counter-heavy exported CNFs, whose auxiliaries all propagate.
pub fn dpll_model(f: &CnfFormula) -> Option<Vec<bool>> {
    fn go(clauses: &[Vec<i32>], mut assign: Vec<Option<bool>>) -> Option<Vec<bool>> {
        loop {
            let mut unit: Option<i32> = None;
            let mut all_satisfied = true;
            for clause in clauses {
                let mut satisfied = false;
                let mut unassigned = 0usize;
                let mut last = 0i32;
                for &lit in clause {
                    match assign[(lit.unsigned_abs() - 1) as usize] {
                        Some(v) if v == (lit > 0) => {
                            satisfied = true;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            unassigned += 1;
                            last = lit;
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                all_satisfied = false;
                match unassigned {
                    0 => return None,
                    1 => {
                        unit = Some(last);
                        break;
                    }
                    _ => {}
                }
            }
            if all_satisfied {
                return Some(assign.into_iter().map(|v| v.unwrap_or(false)).collect());
            }
            match unit {
                Some(lit) => assign[(lit.unsigned_abs() - 1) as usize] = Some(lit > 0),
                None => break,
            }
        }
        let var = assign.iter().position(Option::is_none).expect("some variable is free");
        for value in [false, true] {
            let mut next = assign.clone();
            next[var] = Some(value);
            if let Some(model) = go(clauses, next) {
                return Some(model);
            }
        }
        None
    }
    go(f.clauses(), vec![None; f.variable_count()])
}

pub fn dpll_sat(f: &CnfFormula) -> bool {
    dpll_model(f).is_some()
}

/// Seeded Erdos-Renyi graph with edge probability `num/den`.
pub fn random_graph(n: usize, num: u32, den: u32, seed: u64) -> SocialNetwork {
    let edges = illusion_core::cnf::seeded_pairs(n, num, den, seed);
    SocialNetwork::from_edges(n, &edges).expect("generated pairs are valid")
}

/// Seeded uniform random labelled tree on `n >= 2` nodes via a Pruefer
/// sequence.
pub fn random_tree(n: usize, seed: u64) -> SocialNetwork {
    assert!(n >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n == 2 {
        return SocialNetwork::from_edges(2, &[(0, 1)]).unwrap();
    }
    let pruefer: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &v in &pruefer {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut used = vec![false; n];
    for &v in &pruefer {
        let leaf = (0..n).find(|&u| degree[u] == 1 && !used[u]).expect("a leaf exists");
        edges.push((leaf, v));
        used[leaf] = true;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&u| degree[u] == 1 && !used[u]).collect();
    edges.push((rest[0], rest[1]));
    SocialNetwork::from_edges(n, &edges).expect("a tree is a simple graph")
}
