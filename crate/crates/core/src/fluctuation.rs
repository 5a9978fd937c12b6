//! Finite-n statistics of the contraction rate: histograms `π_n` of
//! `e_n = Λ̄_n / ⟨Λ⟩` on cells `(p - δ, p + δ)`, rate functions, the
//! fluctuation-relation check and parabola fits.
//!
//! `Λ̄_n` is the average of `n` local rates over regions `i_0..i_{n-1}`.
//! Monte Carlo segments are non-overlapping windows of each member's observed
//! trajectory; a trailing partial window is dropped.

// Parameter checks are written as !(x > 0) so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ensemble::{evolve, Reducer, SimConfig};
use crate::error::{Error, Result};
use crate::exact::{log_add, EnDistribution, StatisticValue};
use crate::map::{MapParams, Point, Region, ReversalScheme};
use crate::scalar::Scalar;
use crate::stats::{chi_square_two_sample, TestOutcome};

/// `-(1/n) Σ ln J(i_k)` over the given regions.
pub fn lambda_time_average<S: Scalar>(regions: &[Region], params: &MapParams<S>) -> Result<S> {
    if regions.is_empty() {
        return Err(Error::Domain("empty region sequence".into()));
    }
    let sum = regions
        .iter()
        .fold(S::zero(), |acc, &r| acc + params.lambda_local(r));
    Ok(sum / S::from_usize(regions.len()).expect("length fits scalar"))
}

/// The time-reversed coarse path: reverse order, then map each region through `Q`.
pub fn reverse_path(regions: &[Region], scheme: ReversalScheme) -> Vec<Region> {
    regions.iter().rev().map(|r| r.reversed(scheme)).collect()
}

/// Region occupation counts of consecutive length-`n` windows.
pub struct SegmentCounts {
    pub n: usize,
}

impl<S: Scalar> Reducer<S> for SegmentCounts {
    type Acc = (Vec<[u32; 4]>, [u32; 4]);
    fn init(&self) -> Self::Acc {
        (Vec::new(), [0; 4])
    }
    fn begin_member(&self, acc: &mut Self::Acc, _: u64) {
        acc.1 = [0; 4];
    }
    fn observe(&self, acc: &mut Self::Acc, t: usize, _: Point<S>, r: Region) {
        acc.1[r.index()] += 1;
        if (t + 1).is_multiple_of(self.n) {
            acc.0.push(acc.1);
            acc.1 = [0; 4];
        }
    }
    fn merge(&self, into: &mut Self::Acc, other: Self::Acc) {
        into.0.extend(other.0);
    }
}

pub fn segment_counts<S: Scalar>(cfg: &SimConfig<S>, n: usize) -> Result<Vec<[u32; 4]>> {
    if n == 0 {
        return Err(Error::Domain("segment length must be at least 1".into()));
    }
    let needed = (cfg.samples() / n as u64) * 16;
    if needed > cfg.memory_budget {
        return Err(Error::MemoryBudget {
            needed,
            budget: cfg.memory_budget,
        });
    }
    Ok(evolve(cfg, &SegmentCounts { n })?.0)
}

/// Values of `n Λ̄_n` for every complete segment, in member order.
pub fn segment_sums(cfg: &SimConfig<f64>, n: usize) -> Result<Vec<f64>> {
    let value = StatisticValue::new(&cfg.params);
    Ok(segment_counts(cfg, n)?
        .iter()
        .map(|c| value.value(c))
        .collect())
}

/// Coordinate along which `π_n` is binned.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PiAxis {
    /// `e_n = Λ̄_n / ⟨Λ⟩`.
    Normalized { mean_lambda: f64 },
    /// `n Λ̄_n`, for equilibrium where `⟨Λ⟩ = 0`.
    Raw,
}

impl PiAxis {
    /// Normalised axis, refusing a vanishing mean.
    pub fn normalized(mean_lambda: f64) -> Result<Self> {
        if mean_lambda.abs() < 1e-14 {
            Err(Error::ZeroMeanLambda)
        } else {
            Ok(PiAxis::Normalized { mean_lambda })
        }
    }

    fn coordinate(&self, n: usize, sum: f64) -> f64 {
        match *self {
            PiAxis::Normalized { mean_lambda } => sum / (n as f64 * mean_lambda),
            PiAxis::Raw => sum,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FRConfig {
    pub n: usize,
    pub delta: f64,
    /// Cell centres, ascending and symmetric about zero.
    pub p_grid: Vec<f64>,
    /// Minimum Monte Carlo count for a cell to enter ratios and fits.
    pub min_count: u64,
}

pub const DEFAULT_SPACING: f64 = 0.1;
pub const DEFAULT_MIN_COUNT: u64 = 25;

impl FRConfig {
    /// Cells of width `spacing` centred on `k * spacing`, `|k * spacing| <= p_max`.
    pub fn tiling(n: usize, spacing: f64, p_max: f64) -> Result<Self> {
        if !(spacing > 0.0) || !(p_max >= 0.0) {
            return Err(Error::Domain(
                "spacing must be positive and p_max nonnegative".into(),
            ));
        }
        let k = (p_max / spacing + 1e-9).floor() as i64;
        let cfg = FRConfig {
            n,
            delta: spacing / 2.0,
            p_grid: (-k..=k).map(|i| i as f64 * spacing).collect(),
            min_count: DEFAULT_MIN_COUNT,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// One cell per lattice atom: centres `k * unit`, `δ = unit / 2`.
    pub fn atom_resolved(n: usize, unit: f64, p_max: f64) -> Result<Self> {
        Self::tiling(n, unit, p_max)
    }

    /// Cells of `2m` consecutive nonzero atoms, with `m` chosen so the cell width
    /// is close to `target`. Each cell holds as many odd as even lattice sites,
    /// which removes the period-two modulation of atom weights. The atom at zero
    /// is left uncovered.
    pub fn commensurate(n: usize, unit: f64, target: f64, p_max: f64) -> Result<Self> {
        if !(unit > 0.0) || !(target > 0.0) {
            return Err(Error::Domain(
                "unit and target width must be positive".into(),
            ));
        }
        let m = ((target / (2.0 * unit)).round() as i64).max(1);
        let width = 2 * m;
        let mut positive = Vec::new();
        let mut j = 0i64;
        loop {
            let centre = (width * j + m) as f64 * unit + 0.5 * unit;
            if centre - m as f64 * unit > p_max {
                break;
            }
            positive.push(centre);
            j += 1;
        }
        let mut p_grid: Vec<f64> = positive.iter().rev().map(|p| -p).collect();
        p_grid.extend(positive);
        let cfg = FRConfig {
            n,
            delta: m as f64 * unit,
            p_grid,
            min_count: DEFAULT_MIN_COUNT,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_min_count(mut self, min_count: u64) -> Self {
        self.min_count = min_count;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        if !(self.delta > 0.0) {
            return Err(Error::Domain("delta must be positive".into()));
        }
        if self.p_grid.is_empty() {
            return Err(Error::Domain("empty p grid".into()));
        }
        let len = self.p_grid.len();
        let scale = self.p_grid.iter().fold(1.0f64, |m, p| m.max(p.abs()));
        for i in 0..len {
            if (self.p_grid[i] + self.p_grid[len - 1 - i]).abs() > 1e-12 * scale {
                return Err(Error::Domain("p grid is not symmetric about 0".into()));
            }
            if i + 1 < len && self.p_grid[i + 1] - self.p_grid[i] < 2.0 * self.delta * (1.0 - 1e-9)
            {
                return Err(Error::Domain(
                    "cells overlap: spacing smaller than 2 delta".into(),
                ));
            }
        }
        Ok(())
    }

    /// Index of the cell whose open interval contains `v`.
    pub fn cell_of(&self, v: f64) -> Option<usize> {
        let i = self.p_grid.partition_point(|&p| p < v);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter(|&j| j < self.p_grid.len())
            .find(|&j| (v - self.p_grid[j]).abs() < self.delta)
    }
}

/// Lattice spacing of `e_n` for lattice-mode exact distributions.
pub fn e_lattice_unit(dist: &EnDistribution, mean_lambda: f64) -> Option<f64> {
    dist.unit.map(|u| (u / (dist.n as f64 * mean_lambda)).abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PiSourceKind {
    MonteCarlo,
    ExactDp,
}

pub enum PiSource<'a> {
    /// Segment values of `n Λ̄_n`.
    MonteCarlo(&'a [f64]),
    ExactDp(&'a EnDistribution),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiHistogram {
    pub n: usize,
    pub delta: f64,
    pub p: Vec<f64>,
    pub ln_mass: Vec<f64>,
    /// Monte Carlo cell counts.
    pub counts: Option<Vec<u64>>,
    /// Number of Monte Carlo segments, 0 for exact input.
    pub total: u64,
    pub source: PiSourceKind,
    pub axis: PiAxis,
    pub min_count: u64,
}

impl PiHistogram {
    pub fn mass(&self, i: usize) -> f64 {
        self.ln_mass[i].exp()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.ln_mass.iter().map(|l| l.exp()).collect()
    }

    pub fn admissible(&self, i: usize) -> bool {
        match &self.counts {
            Some(c) => c[i] >= self.min_count.max(1),
            None => self.ln_mass[i] > f64::NEG_INFINITY,
        }
    }

    /// Standard error of `ln π` in cell `i`; zero for exact input.
    pub fn ln_stderr(&self, i: usize) -> f64 {
        match &self.counts {
            Some(c) if c[i] > 0 => {
                let pi = c[i] as f64 / self.total as f64;
                ((1.0 - pi) / c[i] as f64).sqrt()
            }
            Some(_) => f64::INFINITY,
            None => 0.0,
        }
    }

    /// Index of the cell with the largest mass.
    pub fn peak(&self) -> usize {
        (0..self.p.len())
            .max_by(|&a, &b| self.ln_mass[a].total_cmp(&self.ln_mass[b]))
            .expect("nonempty grid")
    }
}

pub fn estimate_pi(config: &FRConfig, source: PiSource<'_>, axis: PiAxis) -> Result<PiHistogram> {
    config.validate()?;
    if let PiAxis::Normalized { mean_lambda } = axis {
        PiAxis::normalized(mean_lambda)?;
    }
    let cells = config.p_grid.len();
    let n = config.n;
    match source {
        PiSource::MonteCarlo(sums) => {
            if sums.is_empty() {
                return Err(Error::Domain("no segments".into()));
            }
            let mut counts = vec![0u64; cells];
            for &s in sums {
                if let Some(i) = config.cell_of(axis.coordinate(n, s)) {
                    counts[i] += 1;
                }
            }
            let total = sums.len() as u64;
            let ln_mass = counts
                .iter()
                .map(|&c| (c as f64 / total as f64).ln())
                .collect();
            Ok(PiHistogram {
                n,
                delta: config.delta,
                p: config.p_grid.clone(),
                ln_mass,
                counts: Some(counts),
                total,
                source: PiSourceKind::MonteCarlo,
                axis,
                min_count: config.min_count,
            })
        }
        PiSource::ExactDp(dist) => {
            if dist.n != n {
                return Err(Error::Domain(format!(
                    "distribution is for n = {}, config has n = {n}",
                    dist.n
                )));
            }
            let mut ln_mass = vec![f64::NEG_INFINITY; cells];
            for atom in &dist.atoms {
                if let Some(i) = config.cell_of(axis.coordinate(n, atom.value)) {
                    ln_mass[i] = log_add(ln_mass[i], atom.ln_prob);
                }
            }
            Ok(PiHistogram {
                n,
                delta: config.delta,
                p: config.p_grid.clone(),
                ln_mass,
                counts: None,
                total: 0,
                source: PiSourceKind::ExactDp,
                axis,
                min_count: config.min_count,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub p: f64,
    pub zeta: f64,
    pub stderr: f64,
}

/// `ζ_n(p) = -(1/n) ln π_n(B_{p,δ})` on admissible cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFunction {
    pub n: usize,
    pub points: Vec<RatePoint>,
}

impl RateFunction {
    pub fn argmin(&self) -> Option<&RatePoint> {
        self.points.iter().min_by(|a, b| a.zeta.total_cmp(&b.zeta))
    }

    pub fn at(&self, p: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|pt| (pt.p - p).abs() < 1e-9)
            .map(|pt| pt.zeta)
    }

    /// Second divided differences over consecutive admissible cells.
    pub fn second_differences(&self) -> Vec<f64> {
        self.points
            .windows(3)
            .map(|w| {
                let s1 = (w[1].zeta - w[0].zeta) / (w[1].p - w[0].p);
                let s2 = (w[2].zeta - w[1].zeta) / (w[2].p - w[1].p);
                2.0 * (s2 - s1) / (w[2].p - w[0].p)
            })
            .collect()
    }

    pub fn is_convex(&self, tol: f64) -> bool {
        self.second_differences().iter().all(|&d| d >= -tol)
    }
}

pub fn rate_function(pi: &PiHistogram) -> Result<RateFunction> {
    let n = pi.n as f64;
    let points: Vec<RatePoint> = (0..pi.p.len())
        .filter(|&i| pi.admissible(i))
        .map(|i| RatePoint {
            p: pi.p[i],
            zeta: -pi.ln_mass[i] / n,
            stderr: pi.ln_stderr(i) / n,
        })
        .collect();
    if points.is_empty() {
        return Err(Error::Domain("histogram has no admissible cell".into()));
    }
    Ok(RateFunction { n: pi.n, points })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrPoint {
    pub p: f64,
    pub c: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrCheck {
    pub n: usize,
    pub points: Vec<FrPoint>,
    /// Least-squares slope of `c(p)` against `p` through the origin.
    pub slope: f64,
    pub slope_stderr: f64,
}

impl FrCheck {
    pub fn at(&self, p: f64) -> Option<&FrPoint> {
        self.points.iter().find(|pt| (pt.p - p).abs() < 1e-9)
    }
}

/// `c(p) = ln(π(p)/π(-p)) / (n ⟨Λ⟩)`. On the raw axis the unnormalised
/// `ln(π(s)/π(-s))` is returned and `mean_lambda` is ignored.
pub fn fr_check(pi: &PiHistogram, mean_lambda: f64) -> Result<FrCheck> {
    let scale = match pi.axis {
        PiAxis::Normalized { .. } => {
            PiAxis::normalized(mean_lambda)?;
            pi.n as f64 * mean_lambda
        }
        PiAxis::Raw => 1.0,
    };
    let len = pi.p.len();
    let tol = 1e-9 * pi.p.iter().fold(1.0f64, |m, p| m.max(p.abs()));
    let mut points = Vec::new();
    for i in 0..len {
        let j = len - 1 - i;
        let p = pi.p[i];
        if p <= tol || (pi.p[j] + p).abs() > tol {
            continue;
        }
        if !(pi.admissible(i) && pi.admissible(j)) {
            continue;
        }
        let c = (pi.ln_mass[i] - pi.ln_mass[j]) / scale;
        let se = (pi.ln_stderr(i).powi(2) + pi.ln_stderr(j).powi(2)).sqrt() / scale.abs();
        points.push(FrPoint { p, c, stderr: se });
    }
    if points.is_empty() {
        return Err(Error::InsufficientNegativeFluctuations);
    }
    let spp: f64 = points.iter().map(|pt| pt.p * pt.p).sum();
    let slope = points.iter().map(|pt| pt.p * pt.c).sum::<f64>() / spp;
    let slope_stderr = points
        .iter()
        .map(|pt| (pt.p * pt.stderr).powi(2))
        .sum::<f64>()
        .sqrt()
        / spp;
    Ok(FrCheck {
        n: pi.n,
        points,
        slope,
        slope_stderr,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParabolaFit {
    pub a: f64,
    pub b: f64,
    /// Root mean square residual.
    pub residual: f64,
    pub points: usize,
}

/// Least squares fit of `a (p - 1)^2 + b`.
pub fn fit_parabola(zeta: &RateFunction) -> Result<ParabolaFit> {
    let pts = &zeta.points;
    if pts.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "{} points, need at least 3",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|pt| (pt.p - 1.0).powi(2)).collect();
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = pts.iter().map(|pt| pt.zeta).sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if sxx <= 1e-14 * xbar.abs().max(1.0).powi(2) * m {
        return Err(Error::DegenerateFit(
            "all points share the same (p - 1)^2".into(),
        ));
    }
    let sxy: f64 = xs
        .iter()
        .zip(pts)
        .map(|(x, pt)| (x - xbar) * (pt.zeta - ybar))
        .sum();
    let a = sxy / sxx;
    let b = ybar - a * xbar;
    let residual = (xs
        .iter()
        .zip(pts)
        .map(|(x, pt)| (pt.zeta - a * x - b).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(ParabolaFit {
        a,
        b,
        residual,
        points: pts.len(),
    })
}

/// `2 ⟨Λ⟩ / (n Var Λ̄_n)`, the finite-n version of the ratio `2⟨Λ⟩/C_2`.
pub fn variance_ratio(dist: &EnDistribution) -> f64 {
    let n = dist.n as f64;
    let mean = dist.atoms.iter().map(|a| a.prob() * a.value).sum::<f64>();
    let second = dist
        .atoms
        .iter()
        .map(|a| a.prob() * a.value * a.value)
        .sum::<f64>();
    let var_sum = second - mean * mean;
    2.0 * (mean / n) / (var_sum / n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub test: TestOutcome,
    /// Segment values agree bitwise, in order.
    pub identical: bool,
    pub segments_a: usize,
    pub segments_b: usize,
}

/// Two-sample chi-square on the histograms of segment values `n Λ̄_n`.
pub fn variant_equivalence_test(
    a: &SimConfig<f64>,
    b: &SimConfig<f64>,
    n: usize,
    alpha: f64,
) -> Result<EquivalenceReport> {
    let sa = segment_sums(a, n)?;
    let sb = segment_sums(b, n)?;
    Ok(equivalence_from_sums(&sa, &sb, alpha))
}

pub fn equivalence_from_sums(sa: &[f64], sb: &[f64], alpha: f64) -> EquivalenceReport {
    // Atoms are keyed on a 1e-9 grid; rounding differences between equal
    // atoms are many orders smaller.
    let key = |v: f64| (v * 1e9).round() as i64;
    let mut table: BTreeMap<i64, (u64, u64)> = BTreeMap::new();
    for &v in sa {
        table.entry(key(v)).or_default().0 += 1;
    }
    for &v in sb {
        table.entry(key(v)).or_default().1 += 1;
    }
    let (ca, cb): (Vec<u64>, Vec<u64>) = table.values().copied().unzip();
    EquivalenceReport {
        test: chi_square_two_sample(&ca, &cb, alpha),
        identical: sa.len() == sb.len()
            && sa.iter().zip(sb).all(|(x, y)| x.to_bits() == y.to_bits()),
        segments_a: sa.len(),
        segments_b: sb.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::exact_en_distribution;
    use crate::markov::mean_lambda;
    use approx::assert_abs_diff_eq;

    #[test]
    fn time_average_examples() {
        let params = MapParams::new(0.15, 0.2).unwrap();
        let v = lambda_time_average(&[Region::B; 10], &params).unwrap();
        assert_abs_diff_eq!(v, 1.4f64.ln(), epsilon = 1e-15);
        let eq = MapParams::new(0.15, 0.0).unwrap();
        let path = [Region::A, Region::D, Region::D, Region::A];
        assert_abs_diff_eq!(
            lambda_time_average(&path, &eq).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert!(lambda_time_average(&[], &eq).is_err());
    }

    #[test]
    fn reversed_path_negates_average() {
        let path = [
            Region::A,
            Region::C,
            Region::D,
            Region::B,
            Region::B,
            Region::C,
        ];
        let eq = MapParams::new(0.1, 0.0).unwrap();
        let fwd = lambda_time_average(&path, &eq).unwrap();
        let rev = lambda_time_average(&reverse_path(&path, ReversalScheme::Q4), &eq).unwrap();
        assert_abs_diff_eq!(fwd, -rev, epsilon = 1e-15);
        let diss = MapParams::dissipative(0.1).unwrap();
        let fwd = lambda_time_average(&path, &diss).unwrap();
        let rev = lambda_time_average(&reverse_path(&path, ReversalScheme::Q3), &diss).unwrap();
        assert_abs_diff_eq!(fwd, -rev, epsilon = 1e-15);
    }

    #[test]
    fn grids() {
        let t = FRConfig::tiling(10, 0.1, 1.0).unwrap();
        assert_eq!(t.p_grid.len(), 21);
        assert_eq!(t.delta, 0.05);
        assert_eq!(t.cell_of(0.26), Some(13));
        assert_eq!(t.cell_of(-1.04), Some(0));
        assert_eq!(t.cell_of(1.06), None);
        let c = FRConfig::commensurate(10, 0.02, 0.1, 1.0).unwrap();
        // m = round(0.1 / 0.04) = 3 atoms each side of the centre of a 6-atom cell.
        assert_abs_diff_eq!(c.delta, 0.06, epsilon = 1e-15);
        let first = c.p_grid.iter().copied().find(|&p| p > 0.0).unwrap();
        assert_abs_diff_eq!(first, 0.07, epsilon = 1e-15);
        assert_eq!(c.cell_of(0.0), None);
        assert_eq!(c.cell_of(0.02), c.cell_of(0.12));
        assert_ne!(c.cell_of(0.12), c.cell_of(0.14));
        let bad = FRConfig {
            n: 1,
            delta: 0.1,
            p_grid: vec![-0.1, 0.0, 0.2],
            min_count: 1,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn zero_mean_is_rejected_on_normalized_axis() {
        let dist = exact_en_distribution(&MapParams::new(0.15, 0.0).unwrap(), 10).unwrap();
        let cfg = FRConfig::tiling(10, 0.1, 1.0).unwrap();
        assert!(matches!(
            estimate_pi(
                &cfg,
                PiSource::ExactDp(&dist),
                PiAxis::Normalized { mean_lambda: 0.0 }
            ),
            Err(Error::ZeroMeanLambda)
        ));
        assert!(matches!(
            PiAxis::normalized(0.0),
            Err(Error::ZeroMeanLambda)
        ));
    }

    #[test]
    fn exact_mass_is_complete_on_covering_grid() {
        let params = MapParams::dissipative(0.15).unwrap();
        let mean = mean_lambda(&params);
        let dist = exact_en_distribution(&params, 50).unwrap();
        let cfg = FRConfig::tiling(50, 0.1, 4.5).unwrap();
        let pi = estimate_pi(
            &cfg,
            PiSource::ExactDp(&dist),
            PiAxis::normalized(mean).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(pi.masses().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn one_step_fr_value() {
        let params = MapParams::dissipative(0.15).unwrap();
        let mean = mean_lambda(&params);
        let dist = exact_en_distribution(&params, 1).unwrap();
        let unit = e_lattice_unit(&dist, mean).unwrap();
        let cfg = FRConfig::atom_resolved(1, unit, 4.5).unwrap();
        let pi = estimate_pi(
            &cfg,
            PiSource::ExactDp(&dist),
            PiAxis::normalized(mean).unwrap(),
        )
        .unwrap();
        let fr = fr_check(&pi, mean).unwrap();
        assert_eq!(fr.points.len(), 1);
        let ratio = (0.4375f64 / 0.1875).ln() / mean;
        assert_abs_diff_eq!(fr.points[0].p, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fr.points[0].c, ratio, epsilon = 1e-12);
        // A single pair: the slope is c(p) / p.
        assert_abs_diff_eq!(fr.slope, ratio / 4.0, epsilon = 1e-12);
        assert!((fr.slope - 2.518).abs() < 1e-3);
    }

    #[test]
    fn no_negative_side_is_an_error() {
        let pi = PiHistogram {
            n: 5,
            delta: 0.05,
            p: vec![-0.1, 0.0, 0.1],
            ln_mass: vec![f64::NEG_INFINITY, 0.5f64.ln(), 0.5f64.ln()],
            counts: None,
            total: 0,
            source: PiSourceKind::ExactDp,
            axis: PiAxis::Normalized { mean_lambda: 1.0 },
            min_count: 25,
        };
        assert!(matches!(
            fr_check(&pi, 1.0),
            Err(Error::InsufficientNegativeFluctuations)
        ));
    }

    #[test]
    fn parabola_recovers_exact_quadratic() {
        let points = (0..9)
            .map(|i| {
                let p = 0.25 * i as f64;
                RatePoint {
                    p,
                    zeta: 0.3 * (p - 1.0).powi(2) + 0.02,
                    stderr: 0.0,
                }
            })
            .collect();
        let fit = fit_parabola(&RateFunction { n: 10, points }).unwrap();
        assert_abs_diff_eq!(fit.a, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.b, 0.02, epsilon = 1e-12);
        assert!(fit.residual < 1e-12);

        let sym = vec![
            RatePoint {
                p: 0.5,
                zeta: 1.0,
                stderr: 0.0,
            },
            RatePoint {
                p: 1.5,
                zeta: 2.0,
                stderr: 0.0,
            },
            RatePoint {
                p: 0.5,
                zeta: 3.0,
                stderr: 0.0,
            },
        ];
        assert!(matches!(
            fit_parabola(&RateFunction { n: 1, points: sym }),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn convexity_uses_divided_differences() {
        let pts = [(-1.0, 1.0), (0.0, 0.0), (0.5, 0.25), (2.0, 4.0)]
            .iter()
            .map(|&(p, zeta)| RatePoint {
                p,
                zeta,
                stderr: 0.0,
            })
            .collect();
        let rf = RateFunction { n: 1, points: pts };
        for d in rf.second_differences() {
            assert_abs_diff_eq!(d, 2.0, epsilon = 1e-12);
        }
        assert!(rf.is_convex(0.0));
    }
}
