#![allow(dead_code)]

use std::collections::HashMap;

use baker_core::{AtomKey, EnDistribution, MapParams, StatisticMode};

/// Sums `μ_{i_0} Π p_{i_t i_{t+1}}` over all `4^n` region sequences, grouped
/// the way the exact recursion keys its atoms. Uses its own copy of the
/// stationary weights and transition probabilities.
pub fn brute_force(
    params: &MapParams<f64>,
    n: usize,
    mode: StatisticMode,
) -> HashMap<AtomKey, f64> {
    let ell = params.ell();
    let d = 1.0 + 4.0 * ell;
    let mu = [
        2.0 * ell / d,
        (1.0 - 2.0 * ell) / d,
        2.0 * ell / d,
        2.0 * ell / d,
    ];
    let to_right = [0.0, 0.0, 0.5, 0.5];
    let to_left = [2.0 * ell, 1.0 - 2.0 * ell, 0.0, 0.0];
    let p = [to_right, to_left, to_right, to_left];
    let mut out = HashMap::new();
    let mut seq = vec![0usize; n];
    for code in 0..4usize.pow(n as u32) {
        let mut c = code;
        for s in seq.iter_mut() {
            *s = c % 4;
            c /= 4;
        }
        let mut w = mu[seq[0]];
        for t in 1..n {
            w *= p[seq[t - 1]][seq[t]];
        }
        if w == 0.0 {
            continue;
        }
        let mut counts = [0u32; 4];
        for &s in &seq {
            counts[s] += 1;
        }
        let key = match mode {
            StatisticMode::Equilibrium => AtomKey::Lattice(counts[0] as i64 - counts[3] as i64),
            StatisticMode::Dissipative => AtomKey::Lattice(counts[1] as i64 - counts[2] as i64),
            StatisticMode::Generic => AtomKey::Counts(counts),
        };
        *out.entry(key).or_insert(0.0) += w;
    }
    out
}

/// Largest per-atom absolute difference between the recursion and enumeration.
pub fn max_atom_error(dist: &EnDistribution, oracle: &HashMap<AtomKey, f64>) -> f64 {
    let mut err = 0.0f64;
    for atom in &dist.atoms {
        err = err.max((atom.prob() - oracle.get(&atom.key).copied().unwrap_or(0.0)).abs());
    }
    for (key, &w) in oracle {
        if !dist.atoms.iter().any(|a| a.key == *key) {
            err = err.max(w);
        }
    }
    err
}

/// Largest `|P(k) - P(-k)|` over a lattice distribution.
pub fn asymmetry(dist: &EnDistribution) -> f64 {
    let probs: HashMap<i64, f64> = dist
        .atoms
        .iter()
        .map(|a| match a.key {
            AtomKey::Lattice(k) => (k, a.prob()),
            AtomKey::Counts(_) => panic!("lattice distribution expected"),
        })
        .collect();
    probs
        .iter()
        .map(|(k, p)| (p - probs.get(&-k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}
