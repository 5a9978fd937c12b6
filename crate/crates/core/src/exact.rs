//! Exact distribution of `n Λ̄_n` under the stationary coarse chain.
//!
//! A forward recursion over `(region, statistic)` in log space. Three statistic
//! modes keep the state small:
//!
//! * `q = 0`: `Λ_B = Λ_C = 0` and `Λ_D = -Λ_A`, so `n Λ̄_n = (n_A - n_D) Λ_A`.
//! * `q = 1/2 - 2 ell`: `Λ_A = Λ_D = 0` and `Λ_C = -Λ_B`, so `n Λ̄_n = (n_B - n_C) Λ_B`.
//! * otherwise the full occupation counts `(n_A, n_B, n_C)` are tracked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{MapParams, Region};
use crate::markov::{coarse_measure, transition_matrix};

/// Size limits for the recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DpLimits {
    /// Largest `n` for the one-dimensional lattice modes.
    pub lattice_max_n: usize,
    /// Largest `n` when all three counts are tracked.
    pub generic_max_n: usize,
}

impl Default for DpLimits {
    fn default() -> Self {
        DpLimits {
            lattice_max_n: 2000,
            generic_max_n: 100,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatisticMode {
    /// Tracks `n_A - n_D`.
    Equilibrium,
    /// Tracks `n_B - n_C`.
    Dissipative,
    /// Tracks `(n_A, n_B, n_C)`.
    Generic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AtomKey {
    /// Integer lattice coordinate; the value is `k * unit`.
    Lattice(i64),
    /// Occupation counts of `A, B, C, D`.
    Counts([u32; 4]),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub key: AtomKey,
    /// Value of `n Λ̄_n`.
    pub value: f64,
    pub ln_prob: f64,
}

impl Atom {
    pub fn prob(&self) -> f64 {
        self.ln_prob.exp()
    }
}

/// Atoms of the law of `n Λ̄_n`, sorted by value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnDistribution {
    pub n: usize,
    pub mode: StatisticMode,
    /// Lattice spacing in the lattice modes.
    pub unit: Option<f64>,
    pub atoms: Vec<Atom>,
}

impl EnDistribution {
    pub fn total_probability(&self) -> f64 {
        self.atoms.iter().map(Atom::prob).sum()
    }

    /// Mean of `Λ̄_n`.
    pub fn mean_lambda_bar(&self) -> f64 {
        self.atoms.iter().map(|a| a.prob() * a.value).sum::<f64>() / self.n as f64
    }

    /// Probability that `Λ̄_n` lies in the open interval `(lo, hi)`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        let n = self.n as f64;
        self.atoms
            .iter()
            .filter(|a| a.value / n > lo && a.value / n < hi)
            .map(Atom::prob)
            .sum()
    }
}

pub fn statistic_mode(params: &MapParams<f64>) -> StatisticMode {
    if params.q() == 0.0 {
        StatisticMode::Equilibrium
    } else if params.is_dissipative_family() {
        StatisticMode::Dissipative
    } else {
        StatisticMode::Generic
    }
}

#[inline]
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Log transition weights, `NEG_INFINITY` for forbidden moves.
fn log_tables(params: &MapParams<f64>) -> ([f64; 4], [[f64; 4]; 4]) {
    let mu = coarse_measure(params.ell()).expect("validated params");
    let p = transition_matrix(params.ell()).expect("validated params");
    let ln_mu = mu.mu.map(f64::ln);
    let ln_p = p.p.map(|row| row.map(f64::ln));
    (ln_mu, ln_p)
}

pub fn exact_en_distribution(params: &MapParams<f64>, n: usize) -> Result<EnDistribution> {
    exact_en_distribution_with(params, n, DpLimits::default())
}

pub fn exact_en_distribution_with(
    params: &MapParams<f64>,
    n: usize,
    limits: DpLimits,
) -> Result<EnDistribution> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let mode = statistic_mode(params);
    match mode {
        StatisticMode::Equilibrium | StatisticMode::Dissipative => {
            if n > limits.lattice_max_n {
                return Err(Error::Capacity(format!(
                    "n = {n} exceeds the exact-recursion limit {}",
                    limits.lattice_max_n
                )));
            }
            Ok(lattice_dp(params, n, mode))
        }
        StatisticMode::Generic => {
            if n > limits.generic_max_n {
                return Err(Error::Capacity(format!(
                    "n = {n} exceeds the exact-recursion limit {} for generic (ell, q)",
                    limits.generic_max_n
                )));
            }
            Ok(generic_dp(params, n))
        }
    }
}

// Ties (a zero unit) fall back to the key so the order stays symmetric.
fn sort_atoms(atoms: &mut [Atom]) {
    atoms.sort_by(|a, b| {
        (a.value + 0.0)
            .total_cmp(&(b.value + 0.0))
            .then(a.key.cmp(&b.key))
    });
}

fn lattice_dp(params: &MapParams<f64>, n: usize, mode: StatisticMode) -> EnDistribution {
    let (step, unit): ([i64; 4], f64) = match mode {
        StatisticMode::Equilibrium => ([1, 0, 0, -1], params.lambda_local(Region::A)),
        _ => ([0, 1, -1, 0], params.lambda_local(Region::B)),
    };
    let (ln_mu, ln_p) = log_tables(params);
    let width = 2 * n + 1;
    let off = n as i64;
    let mut cur = vec![vec![f64::NEG_INFINITY; width]; 4];
    let mut next = cur.clone();
    for r in 0..4 {
        cur[r][(step[r] + off) as usize] = ln_mu[r];
    }
    for t in 1..n {
        // After t + 1 symbols the statistic lies in [-(t+1), t+1].
        let reach = t as i64 + 1;
        for (to, row) in next.iter_mut().enumerate() {
            row.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
            for k in -reach..=reach {
                let src = k - step[to];
                if src.abs() > t as i64 {
                    continue;
                }
                let si = (src + off) as usize;
                let mut acc = f64::NEG_INFINITY;
                for from in 0..4 {
                    let w = ln_p[from][to];
                    if w == f64::NEG_INFINITY {
                        continue;
                    }
                    acc = log_add(acc, cur[from][si] + w);
                }
                row[(k + off) as usize] = acc;
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let mut atoms = Vec::new();
    for k in -off..=off {
        let idx = (k + off) as usize;
        let lp = (0..4).fold(f64::NEG_INFINITY, |acc, r| log_add(acc, cur[r][idx]));
        if lp > f64::NEG_INFINITY {
            atoms.push(Atom {
                key: AtomKey::Lattice(k),
                value: k as f64 * unit,
                ln_prob: lp,
            });
        }
    }
    sort_atoms(&mut atoms);
    EnDistribution {
        n,
        mode,
        unit: Some(unit),
        atoms,
    }
}

fn generic_dp(params: &MapParams<f64>, n: usize) -> EnDistribution {
    let (ln_mu, ln_p) = log_tables(params);
    let lambdas = params.lambdas();
    let side = n + 1;
    let idx = |a: usize, b: usize, c: usize| (a * side + b) * side + c;
    let size = side * side * side;
    let mut cur = vec![vec![f64::NEG_INFINITY; size]; 4];
    let mut next = cur.clone();
    let unit_counts = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 0]];
    for r in 0..4 {
        let [a, b, c] = unit_counts[r];
        cur[r][idx(a, b, c)] = ln_mu[r];
    }
    for t in 1..n {
        for row in next.iter_mut() {
            row.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
        }
        // Sources have a + b + c <= t.
        for a in 0..=t {
            for b in 0..=(t - a) {
                for c in 0..=(t - a - b) {
                    let si = idx(a, b, c);
                    for from in 0..4 {
                        let lp = cur[from][si];
                        if lp == f64::NEG_INFINITY {
                            continue;
                        }
                        for to in 0..4 {
                            let w = ln_p[from][to];
                            if w == f64::NEG_INFINITY {
                                continue;
                            }
                            let [da, db, dc] = unit_counts[to];
                            let ti = idx(a + da, b + db, c + dc);
                            next[to][ti] = log_add(next[to][ti], lp + w);
                        }
                    }
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let mut atoms = Vec::new();
    for a in 0..=n {
        for b in 0..=(n - a) {
            for c in 0..=(n - a - b) {
                let i = idx(a, b, c);
                let lp = (0..4).fold(f64::NEG_INFINITY, |acc, r| log_add(acc, cur[r][i]));
                if lp > f64::NEG_INFINITY {
                    let d = n - a - b - c;
                    let counts = [a as u32, b as u32, c as u32, d as u32];
                    atoms.push(Atom {
                        key: AtomKey::Counts(counts),
                        value: counts_value(&counts, &lambdas),
                        ln_prob: lp,
                    });
                }
            }
        }
    }
    sort_atoms(&mut atoms);
    EnDistribution {
        n,
        mode: StatisticMode::Generic,
        unit: None,
        atoms,
    }
}

/// Maps occupation counts to `n Λ̄_n` exactly as the recursion does, so
/// simulated and exact values coincide bitwise on shared atoms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StatisticValue {
    mode: StatisticMode,
    lambdas: [f64; 4],
}

impl StatisticValue {
    pub fn new(params: &MapParams<f64>) -> Self {
        StatisticValue {
            mode: statistic_mode(params),
            lambdas: params.lambdas(),
        }
    }

    #[inline]
    pub fn value(&self, counts: &[u32; 4]) -> f64 {
        match self.mode {
            StatisticMode::Equilibrium => {
                (counts[0] as i64 - counts[3] as i64) as f64 * self.lambdas[0]
            }
            StatisticMode::Dissipative => {
                (counts[1] as i64 - counts[2] as i64) as f64 * self.lambdas[1]
            }
            StatisticMode::Generic => counts_value(counts, &self.lambdas),
        }
    }
}

/// `Σ_i n_i Λ_i`, evaluated in a fixed order so equal counts give equal bits.
#[inline]
pub fn counts_value(counts: &[u32; 4], lambdas: &[f64; 4]) -> f64 {
    counts[0] as f64 * lambdas[0]
        + counts[1] as f64 * lambdas[1]
        + counts[2] as f64 * lambdas[2]
        + counts[3] as f64 * lambdas[3]
}
