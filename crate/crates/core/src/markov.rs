//! Closed-form projected dynamics: the 2×2 transfer operator on the halves
//! `[0, 1/2)`, `[1/2, 1]`, the 4×4 coarse transition matrix on `{A, B, C, D}`,
//! their stationary vectors, the mean contraction rate and detailed-balance reports.
//!
//! The transition structure depends on `ell` only; `q` enters through the Jacobians.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{MapParams, Region, ReversalScheme};
use crate::scalar::Scalar;

fn check_ell<S: Scalar>(ell: S) -> Result<()> {
    if ell > S::zero() && ell <= S::lit(0.25) {
        Ok(())
    } else {
        Err(Error::Domain(format!("ell = {ell} outside (0, 1/4]")))
    }
}

/// Piecewise constant density of the x-projection of the invariant measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectedDensity<S> {
    /// Density on `[0, 1/2)`.
    pub rho_l: S,
    /// Density on `[1/2, 1]`.
    pub rho_r: S,
}

impl<S: Scalar> ProjectedDensity<S> {
    pub fn at(&self, x: S) -> S {
        if x < S::lit(0.5) {
            self.rho_l
        } else {
            self.rho_r
        }
    }
}

/// Transfer operator of the projected Perron-Frobenius equation, acting on
/// `(rho_l, rho_r)`. Columns sum to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix2<S> {
    pub m: [[S; 2]; 2],
}

impl<S: Scalar> TransferMatrix2<S> {
    pub fn apply(&self, v: [S; 2]) -> [S; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Both eigenvalues, leading first. For a column-stochastic 2×2 matrix they
    /// are `1` and `trace - 1`.
    pub fn eigenvalues(&self) -> [S; 2] {
        [S::one(), self.m[0][0] + self.m[1][1] - S::one()]
    }

    pub fn spectral_gap(&self) -> S {
        S::one() - self.eigenvalues()[1].abs()
    }
}

pub fn transfer_matrix<S: Scalar>(ell: S) -> Result<TransferMatrix2<S>> {
    check_ell(ell)?;
    let two = S::lit(2.0);
    let half = S::lit(0.5);
    Ok(TransferMatrix2 {
        m: [[S::one() - two * ell, half], [two * ell, half]],
    })
}

/// Fixed point of [`transfer_matrix`], normalised so that `rho_l/2 + rho_r/2 = 1`.
/// Independent of `q`.
pub fn stationary_density<S: Scalar>(ell: S) -> Result<ProjectedDensity<S>> {
    check_ell(ell)?;
    let denom = S::one() + S::lit(4.0) * ell;
    Ok(ProjectedDensity {
        rho_l: S::lit(2.0) / denom,
        rho_r: S::lit(8.0) * ell / denom,
    })
}

/// Row-stochastic coarse transition matrix, `p[from][to]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix4<S> {
    pub p: [[S; 4]; 4],
}

impl<S: Scalar> TransitionMatrix4<S> {
    #[inline]
    pub fn get(&self, from: Region, to: Region) -> S {
        self.p[from.index()][to.index()]
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, v: [S; 4]) -> [S; 4] {
        let mut out = [S::zero(); 4];
        for (i, vi) in v.iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                *o = *o + *vi * self.p[i][j];
            }
        }
        out
    }

    /// Matrix times column vector.
    pub fn right_apply(&self, v: [S; 4]) -> [S; 4] {
        let mut out = [S::zero(); 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).fold(S::zero(), |acc, j| acc + self.p[i][j] * v[j]);
        }
        out
    }

    pub fn row_sums(&self) -> [S; 4] {
        self.p.map(|row| row.iter().fold(S::zero(), |a, &b| a + b))
    }
}

impl TransitionMatrix4<f64> {
    /// All eigenvalue moduli, sorted in decreasing order.
    pub fn eigenvalue_moduli(&self) -> [f64; 4] {
        let m = Matrix4::from_fn(|i, j| self.p[i][j]);
        let mut moduli: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm()).collect();
        moduli.sort_by(|a, b| b.total_cmp(a));
        [moduli[0], moduli[1], moduli[2], moduli[3]]
    }

    /// Modulus of the subleading eigenvalue; the decay rate of connected correlations.
    pub fn second_eigenvalue_modulus(&self) -> f64 {
        self.eigenvalue_moduli()[1]
    }
}

pub fn transition_matrix<S: Scalar>(ell: S) -> Result<TransitionMatrix4<S>> {
    check_ell(ell)?;
    let z = S::zero();
    let half = S::lit(0.5);
    let two_ell = S::lit(2.0) * ell;
    let stay = S::one() - two_ell;
    Ok(TransitionMatrix4 {
        p: [
            [z, z, half, half],
            [two_ell, stay, z, z],
            [z, z, half, half],
            [two_ell, stay, z, z],
        ],
    })
}

/// Stationary measure of the coarse chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarseMeasure<S> {
    pub mu: [S; 4],
}

impl<S: Scalar> CoarseMeasure<S> {
    #[inline]
    pub fn get(&self, r: Region) -> S {
        self.mu[r.index()]
    }

    /// Expectation of a region observable.
    pub fn expect(&self, phi: &[S; 4]) -> S {
        self.mu
            .iter()
            .zip(phi)
            .fold(S::zero(), |acc, (m, f)| acc + *m * *f)
    }
}

pub fn coarse_measure<S: Scalar>(ell: S) -> Result<CoarseMeasure<S>> {
    check_ell(ell)?;
    let denom = S::one() + S::lit(4.0) * ell;
    let small = S::lit(2.0) * ell / denom;
    Ok(CoarseMeasure {
        mu: [small, (S::one() - S::lit(2.0) * ell) / denom, small, small],
    })
}

/// Steady-state mean of the phase space contraction rate, `-Σ_i μ_i ln J_i`.
pub fn mean_lambda<S: Scalar>(params: &MapParams<S>) -> S {
    let mu = coarse_measure(params.ell()).expect("validated params");
    Region::ALL.iter().fold(S::zero(), |acc, &r| {
        acc + mu.get(r) * params.lambda_local(r)
    })
}

/// One ordered pair in a detailed-balance comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbPair {
    pub from: Region,
    pub to: Region,
    /// Joint weight `μ_i p_ij` of the forward transition.
    pub forward: f64,
    /// Joint weight `μ_{Qj} p_{Qj,Qi}` of the reversed transition.
    pub reverse: f64,
}

impl DbPair {
    pub fn mismatch(&self) -> f64 {
        (self.forward - self.reverse).abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbReport {
    pub ell: f64,
    pub q: f64,
    pub scheme: ReversalScheme,
    pub pairs: Vec<DbPair>,
    pub max_mismatch: f64,
}

impl DbReport {
    pub fn pair(&self, from: Region, to: Region) -> Option<&DbPair> {
        self.pairs.iter().find(|p| p.from == from && p.to == to)
    }
}

/// Compares forward and time-reversed joint weights for every allowed transition.
/// `q` is carried for reporting only: the weights depend on `ell` alone.
pub fn db_report(params: &MapParams<f64>, scheme: ReversalScheme) -> DbReport {
    let ell = params.ell();
    let p = transition_matrix(ell).expect("validated params");
    // Joint weights are formed as (numerator of μ_i × p_ij) / (1 + 4 ell) so that
    // analytically equal products of the same factors agree bitwise.
    let (small, large) = (2.0 * ell, 1.0 - 2.0 * ell);
    let mu_num = [small, large, small, small];
    let denom = 1.0 + 4.0 * ell;
    let joint = |i: Region, j: Region| mu_num[i.index()] * p.get(i, j) / denom;
    let mut pairs = Vec::new();
    for from in Region::ALL {
        for to in Region::ALL {
            let pij = p.get(from, to);
            if pij <= 0.0 {
                continue;
            }
            let (qi, qj) = (from.reversed(scheme), to.reversed(scheme));
            pairs.push(DbPair {
                from,
                to,
                forward: joint(from, to),
                reverse: joint(qj, qi),
            });
        }
    }
    let max_mismatch = pairs.iter().map(DbPair::mismatch).fold(0.0, f64::max);
    DbReport {
        ell,
        q: params.q(),
        scheme,
        pairs,
        max_mismatch,
    }
}
