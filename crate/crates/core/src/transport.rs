//! Current `Ψ = (0, 1, -1, 0)` on regions `A..D`, bias algebra and Green-Kubo
//! sums `L = Σ_{k=0}^{N-1} [⟨Ψ_k Ψ_0⟩ - ⟨Ψ⟩²]`, by simulation and from the
//! coarse chain.

use serde::{Deserialize, Serialize};

use crate::ensemble::{evolve, Reducer, SimConfig, DEFAULT_BURN_IN};
use crate::error::{Error, Result};
use crate::map::{MapParams, MapVariant, Point, Region, ReversalScheme};
use crate::markov::{coarse_measure, transition_matrix};

/// The current observable: `+1` on `B`, `-1` on `C`.
pub const PSI: [f64; 4] = [0.0, 1.0, -1.0, 0.0];

/// Relative drift of the last quarter of the partial sums accepted as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 0.01;

#[inline]
pub fn psi(r: Region) -> f64 {
    PSI[r.index()]
}

pub fn psi_is_odd() -> bool {
    Region::ALL
        .iter()
        .all(|&r| psi(r.reversed(ReversalScheme::Q3)) == -psi(r))
}

fn check_ell(ell: f64) -> Result<()> {
    if ell > 0.0 && ell <= 0.25 {
        Ok(())
    } else {
        Err(Error::Domain(format!("ell = {ell} outside (0, 1/4]")))
    }
}

/// Stationary mean of `Ψ`, `(1 - 4 ell) / (1 + 4 ell)`.
pub fn mean_current(ell: f64) -> Result<f64> {
    check_ell(ell)?;
    Ok((1.0 - 4.0 * ell) / (1.0 + 4.0 * ell))
}

/// `b = 2 - 1 / (1 - 2 ell)`, in `[0, 1)`.
pub fn bias_of_ell(ell: f64) -> Result<f64> {
    check_ell(ell)?;
    Ok(2.0 - 1.0 / (1.0 - 2.0 * ell))
}

pub fn ell_of_bias(b: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&b) {
        return Err(Error::Domain(format!("bias {b} outside [0, 1)")));
    }
    Ok((1.0 - 1.0 / (2.0 - b)) / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnsembleMode {
    /// Burn-in from uniform points; `⟨Ψ⟩` is the stationary mean current.
    Stationary,
    /// Uniform initial points without burn-in and `⟨Ψ⟩ = 0`.
    MicrocanonicalEquilibrium,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GKConfig {
    pub params: MapParams<f64>,
    pub variant: MapVariant,
    pub n_ens: usize,
    pub n_iter: usize,
    pub seed: u64,
    pub mode: EnsembleMode,
    /// Used in stationary mode only.
    pub burn_in: usize,
}

impl GKConfig {
    pub fn new(params: MapParams<f64>, mode: EnsembleMode) -> Self {
        GKConfig {
            params,
            variant: MapVariant::ReversibleM,
            n_ens: 100_000,
            n_iter: 50,
            seed: 0,
            mode,
            burn_in: DEFAULT_BURN_IN,
        }
    }

    /// Equilibrium at `ell = 1/4`, `q = 0`.
    pub fn equilibrium() -> Self {
        Self::new(
            MapParams::new(0.25, 0.0).expect("valid parameters"),
            EnsembleMode::MicrocanonicalEquilibrium,
        )
    }

    pub fn sim_config(&self) -> SimConfig<f64> {
        let burn_in = match self.mode {
            EnsembleMode::Stationary => self.burn_in,
            EnsembleMode::MicrocanonicalEquilibrium => 0,
        };
        SimConfig::new(self.params, self.variant)
            .with_sizes(self.n_ens, self.n_iter, burn_in)
            .with_seed(self.seed)
    }

    pub fn mean_psi(&self) -> Result<f64> {
        match self.mode {
            EnsembleMode::Stationary => mean_current(self.params.ell()),
            EnsembleMode::MicrocanonicalEquilibrium => Ok(0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GKResult {
    pub l_value: f64,
    /// Correlation terms for `k = 0..N-1`, after subtracting `⟨Ψ⟩²`.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub stderr: f64,
    pub mean_psi: f64,
    /// `|P_{N-1} - P_{N-1-N/4}|`.
    pub drift: f64,
    pub converged: bool,
    /// Modulus of the subleading eigenvalue of the coarse chain (exact only).
    pub gamma: Option<f64>,
    /// Bound on the neglected tail `Σ_{k>=N} |c_k|` (exact only).
    pub tail_bound: Option<f64>,
}

fn finish(terms: Vec<f64>, stderr: f64, mean_psi: f64) -> GKResult {
    let partial_sums: Vec<f64> = terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    let n = partial_sums.len();
    let l_value = partial_sums.last().copied().unwrap_or(0.0);
    let drift = if n > 0 {
        (l_value - partial_sums[n - 1 - n / 4]).abs()
    } else {
        0.0
    };
    GKResult {
        l_value,
        converged: drift <= CONVERGENCE_TOLERANCE * l_value.abs(),
        terms,
        partial_sums,
        stderr,
        mean_psi,
        drift,
        gamma: None,
        tail_bound: None,
    }
}

struct GkReducer {
    n_iter: usize,
    mean_sq: f64,
}

struct GkAcc {
    sums: Vec<f64>,
    totals: Vec<f64>,
    psi0: f64,
    run: f64,
}

impl Reducer<f64> for GkReducer {
    type Acc = GkAcc;
    fn init(&self) -> GkAcc {
        GkAcc {
            sums: vec![0.0; self.n_iter],
            totals: Vec::new(),
            psi0: 0.0,
            run: 0.0,
        }
    }
    fn begin_member(&self, acc: &mut GkAcc, _: u64) {
        acc.run = 0.0;
    }
    fn observe(&self, acc: &mut GkAcc, t: usize, _: Point<f64>, r: Region) {
        let v = psi(r);
        if t == 0 {
            acc.psi0 = v;
        }
        let prod = v * acc.psi0;
        acc.sums[t] += prod;
        acc.run += prod;
    }
    fn end_member(&self, acc: &mut GkAcc, _: u64, _: Point<f64>) {
        acc.totals.push(acc.run - self.n_iter as f64 * self.mean_sq);
    }
    fn merge(&self, into: &mut GkAcc, other: GkAcc) {
        for (a, b) in into.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        into.totals.extend(other.totals);
    }
}

/// Ensemble estimate of the Green-Kubo sum with standard error across members.
pub fn green_kubo_estimate(config: &GKConfig) -> Result<GKResult> {
    if config.n_ens < 2 || config.n_iter == 0 {
        return Err(Error::Domain("need n_ens >= 2 and n_iter >= 1".into()));
    }
    let mean_psi = config.mean_psi()?;
    let mean_sq = mean_psi * mean_psi;
    let acc = evolve(
        &config.sim_config(),
        &GkReducer {
            n_iter: config.n_iter,
            mean_sq,
        },
    )?;
    let n = config.n_ens as f64;
    let terms = acc.sums.iter().map(|s| s / n - mean_sq).collect();
    let mean = acc.totals.iter().sum::<f64>() / n;
    let var = acc.totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(finish(terms, (var / n).sqrt(), mean_psi))
}

/// Green-Kubo sum of the coarse chain: `c_k = ψᵀ diag(μ) P^k ψ - ⟨Ψ⟩²`.
pub fn green_kubo_exact(ell: f64, k_max: usize) -> Result<GKResult> {
    check_ell(ell)?;
    if k_max == 0 {
        return Err(Error::Domain("k_max must be at least 1".into()));
    }
    let p = transition_matrix(ell)?;
    let mu = coarse_measure(ell)?;
    let mean_psi = mu.expect(&PSI);
    let mean_sq = mean_psi * mean_psi;
    let mut v = PSI;
    let mut terms = Vec::with_capacity(k_max);
    for _ in 0..k_max {
        let corr: f64 = (0..4).map(|i| mu.mu[i] * PSI[i] * v[i]).sum();
        terms.push(corr - mean_sq);
        v = p.right_apply(v);
    }
    let gamma = p.second_eigenvalue_modulus();
    let tail = if gamma < 1e-12 {
        0.0
    } else {
        let c = terms.get(1).map_or(0.0, |t| t.abs()) / gamma;
        c * gamma.powi(k_max as i32) / (1.0 - gamma)
    };
    let mut out = finish(terms, 0.0, mean_psi);
    out.gamma = Some(gamma);
    out.tail_bound = Some(tail);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub bias: f64,
    pub ell: f64,
    pub l_value: f64,
    pub stderr: f64,
    pub converged: bool,
}

/// Stationary Green-Kubo estimates along the family `q = 1/2 - 2 ell(b)` with
/// the default strip. Sizes, variant and seed come from `base`.
pub fn bias_sweep(biases: &[f64], base: &GKConfig) -> Result<Vec<SweepRow>> {
    biases
        .iter()
        .map(|&bias| {
            let ell = ell_of_bias(bias)?;
            let cfg = GKConfig {
                params: MapParams::dissipative(ell)?,
                mode: EnsembleMode::Stationary,
                ..*base
            };
            let r = green_kubo_estimate(&cfg)?;
            Ok(SweepRow {
                bias,
                ell,
                l_value: r.l_value,
                stderr: r.stderr,
                converged: r.converged,
            })
        })
        .collect()
}
