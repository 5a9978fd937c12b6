//! Battery of analytic invariants. Each check is cheap and deterministic.

use serde::{Deserialize, Serialize};

use crate::exact::exact_en_distribution;
use crate::map::{check_reversibility, MapParams, MapVariant, Region, ReversalScheme};
use crate::markov::{
    coarse_measure, db_report, mean_lambda, stationary_density, transfer_matrix, transition_matrix,
};
use crate::transport::{bias_of_ell, ell_of_bias, green_kubo_exact, mean_current, psi_is_odd};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, err: f64, tol: f64) -> Check {
    Check {
        name: name.to_string(),
        passed: err <= tol,
        detail: format!("error {err:.3e}, tolerance {tol:.1e}"),
    }
}

const ELLS: [f64; 6] = [0.02, 0.05, 0.1, 0.15, 0.2, 0.25];

fn max_over(f: impl Fn(f64) -> f64) -> f64 {
    ELLS.iter().map(|&l| f(l)).fold(0.0, f64::max)
}

pub fn run_selftest() -> Vec<Check> {
    let mut out = Vec::new();

    out.push(check(
        "projected density is a fixed point of the transfer matrix",
        max_over(|ell| {
            let t = transfer_matrix(ell).unwrap();
            let rho = stationary_density(ell).unwrap();
            let img = t.apply([rho.rho_l, rho.rho_r]);
            (img[0] - rho.rho_l).abs().max((img[1] - rho.rho_r).abs())
        }),
        1e-14,
    ));
    out.push(check(
        "coarse measure is stationary and normalised",
        max_over(|ell| {
            let mu = coarse_measure(ell).unwrap();
            let img = transition_matrix(ell).unwrap().left_apply(mu.mu);
            let drift = img
                .iter()
                .zip(mu.mu)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            drift.max((mu.mu.iter().sum::<f64>() - 1.0).abs())
        }),
        1e-14,
    ));
    out.push(check(
        "transition matrix rows sum to one",
        max_over(|ell| {
            transition_matrix(ell)
                .unwrap()
                .row_sums()
                .iter()
                .map(|s| (s - 1.0).abs())
                .fold(0.0, f64::max)
        }),
        1e-15,
    ));
    out.push(check(
        "mean contraction rate vanishes at q = 0",
        max_over(|ell| mean_lambda(&MapParams::new(ell, 0.0).unwrap()).abs()),
        1e-14,
    ));
    out.push(check(
        "mean contraction rate on the dissipative family",
        max_over(|ell| {
            let params = MapParams::dissipative(ell).unwrap();
            let closed = (1.0 - 4.0 * ell) / (1.0 + 4.0 * ell) * (2.0 * (1.0 - 2.0 * ell)).ln();
            (mean_lambda(&params) - closed).abs()
        }),
        1e-14,
    ));
    out.push(check(
        "detailed balance at q = 0 under Q4",
        max_over(|ell| {
            db_report(&MapParams::new(ell, 0.0).unwrap(), ReversalScheme::Q4).max_mismatch
        }),
        0.0,
    ));
    out.push(check(
        "time reversal M G M = G at q = 0",
        [0.05, 0.15, 0.25]
            .iter()
            .map(|&ell| {
                let r = check_reversibility(
                    &MapParams::new(ell, 0.0).unwrap(),
                    MapVariant::ReversibleM,
                    2000,
                    1,
                );
                r.max_deviation.max(r.max_jacobian_pairing)
            })
            .fold(0.0, f64::max),
        1e-12,
    ));
    out.push(check(
        "jacobians pair under region reversal",
        max_over(|ell| {
            let eq = MapParams::new(ell, 0.0).unwrap();
            let diss = MapParams::dissipative(ell).unwrap();
            Region::ALL
                .iter()
                .map(|&r| {
                    let a = eq.jacobian(r) * eq.jacobian(r.reversed(ReversalScheme::Q4)) - 1.0;
                    let b = diss.jacobian(r) * diss.jacobian(r.reversed(ReversalScheme::Q3)) - 1.0;
                    a.abs().max(b.abs())
                })
                .fold(0.0, f64::max)
        }),
        1e-14,
    ));
    out.push(check(
        "exact distribution is normalised with the stationary mean",
        [
            MapParams::dissipative(0.15).unwrap(),
            MapParams::new(0.1, 0.0).unwrap(),
            MapParams::new(0.1, 0.13).unwrap(),
        ]
        .iter()
        .map(|params| {
            let d = exact_en_distribution(params, 100).unwrap();
            (d.total_probability() - 1.0)
                .abs()
                .max((d.mean_lambda_bar() - mean_lambda(params)).abs())
        })
        .fold(0.0, f64::max),
        1e-12,
    ));
    out.push(check(
        "equilibrium distribution is symmetric",
        {
            let d = exact_en_distribution(&MapParams::new(0.15, 0.0).unwrap(), 60).unwrap();
            let m = d.atoms.len();
            (0..m)
                .map(|i| (d.atoms[i].prob() - d.atoms[m - 1 - i].prob()).abs())
                .fold(0.0, f64::max)
        },
        1e-14,
    ));
    out.push(check(
        "Green-Kubo sum at ell = 1/4 is 3/4",
        (green_kubo_exact(0.25, 20).unwrap().l_value - 0.75).abs(),
        1e-14,
    ));
    out.push(check(
        "mean current equals mu_B - mu_C",
        max_over(|ell| {
            let mu = coarse_measure(ell).unwrap();
            (mean_current(ell).unwrap() - (mu.mu[1] - mu.mu[2])).abs()
        }),
        1e-15,
    ));
    out.push(check(
        "bias inverts",
        max_over(|ell| (ell_of_bias(bias_of_ell(ell).unwrap()).unwrap() - ell).abs()),
        1e-14,
    ));
    out.push(Check {
        name: "current is odd under Q3".into(),
        passed: psi_is_odd(),
        detail: String::new(),
    });
    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn battery_passes() {
        for c in super::run_selftest() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
