//! Ensemble Monte Carlo.
//!
//! Member `k` draws its initial point and all later dither from a ChaCha8 stream
//! keyed by `(seed, k)`. Members are processed in fixed-size blocks; block
//! results are merged in block order, so every reduction is independent of the
//! number of worker threads.
//!
//! At `ell = 1/4` every branch is a dyadic affine map and a floating point orbit
//! collapses onto `x = 1/2` after about 53 steps. With `refresh` enabled, each
//! step adds a uniform perturbation of one machine epsilon to `x`. The draw is
//! independent of `y`, so the `x` dynamics stays identical for `M` and `K`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{apply_n, step_m_region, MapParams, MapVariant, Point, Region, ReversalScheme};
use crate::scalar::Scalar;

const BLOCK: usize = 256;

pub const DEFAULT_BURN_IN: usize = 1000;
pub const DEFAULT_BINS: usize = 500;
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig<S> {
    pub params: MapParams<S>,
    pub variant: MapVariant,
    pub n_ens: usize,
    pub n_iter: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Machine-epsilon dither of `x` after each step.
    pub refresh: bool,
    /// Upper bound in bytes for buffers that grow with `n_ens * n_iter`.
    pub memory_budget: u64,
}

impl<S: Scalar> SimConfig<S> {
    pub fn new(params: MapParams<S>, variant: MapVariant) -> Self {
        SimConfig {
            params,
            variant,
            n_ens: 1000,
            n_iter: 1000,
            burn_in: DEFAULT_BURN_IN,
            seed: 0,
            refresh: true,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }

    pub fn with_sizes(mut self, n_ens: usize, n_iter: usize, burn_in: usize) -> Self {
        self.n_ens = n_ens;
        self.n_iter = n_iter;
        self.burn_in = burn_in;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_variant(mut self, variant: MapVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ens == 0 {
            return Err(Error::Domain("n_ens must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of observed points, `n_ens * n_iter`.
    pub fn samples(&self) -> u64 {
        self.n_ens as u64 * self.n_iter as u64
    }
}

/// The random stream of ensemble member `member`.
pub fn member_rng(seed: u64, member: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member);
    rng
}

fn uniform<S: Scalar>(rng: &mut ChaCha8Rng) -> S {
    S::lit(rng.random::<f64>())
}

fn initial_point<S: Scalar>(rng: &mut ChaCha8Rng) -> Point<S> {
    let x = uniform(rng);
    let y = uniform(rng);
    Point { x, y }
}

/// `n` i.i.d. uniform points; point `k` comes from stream `(seed, k)`.
pub fn sample_ensemble<S: Scalar>(n: usize, seed: u64) -> Result<Vec<Point<S>>> {
    if n == 0 {
        return Err(Error::Domain("ensemble size must be at least 1".into()));
    }
    Ok((0..n as u64)
        .into_par_iter()
        .map(|k| initial_point(&mut member_rng(seed, k)))
        .collect())
}

/// Streaming consumer of ensemble trajectories.
///
/// Within a member, `observe` is called for `t = 0..n_iter` with the post-burn-in
/// point and its region. `merge` receives accumulators in member order.
pub trait Reducer<S: Scalar>: Sync {
    type Acc: Send;
    fn init(&self) -> Self::Acc;
    fn begin_member(&self, _acc: &mut Self::Acc, _member: u64) {}
    fn observe(&self, acc: &mut Self::Acc, t: usize, p: Point<S>, r: Region);
    fn end_member(&self, _acc: &mut Self::Acc, _member: u64, _last: Point<S>) {}
    fn merge(&self, into: &mut Self::Acc, other: Self::Acc);
}

struct Stepper<'a, S: Scalar> {
    params: &'a MapParams<S>,
    irreversible: bool,
    refresh: bool,
    eps: S,
    half: S,
}

impl<S: Scalar> Stepper<'_, S> {
    #[inline]
    fn advance(&self, p: Point<S>, rng: &mut ChaCha8Rng) -> (Point<S>, Region) {
        let (mut next, r) = step_m_region(p, self.params);
        if self.irreversible {
            next = apply_n(next, self.params);
        }
        if self.refresh {
            let u: S = uniform(rng);
            next.x = (next.x + (u - self.half) * self.eps)
                .max(S::zero())
                .min(S::one());
        }
        (next, r)
    }
}

fn run_member<S: Scalar, R: Reducer<S>>(
    cfg: &SimConfig<S>,
    stepper: &Stepper<'_, S>,
    reducer: &R,
    acc: &mut R::Acc,
    member: u64,
) {
    let mut rng = member_rng(cfg.seed, member);
    let mut p = initial_point::<S>(&mut rng);
    reducer.begin_member(acc, member);
    for _ in 0..cfg.burn_in {
        p = stepper.advance(p, &mut rng).0;
    }
    for t in 0..cfg.n_iter {
        let (next, r) = stepper.advance(p, &mut rng);
        reducer.observe(acc, t, p, r);
        p = next;
    }
    reducer.end_member(acc, member, p);
}

/// Evolves every member for `burn_in + n_iter` steps and folds the observations.
pub fn evolve<S: Scalar, R: Reducer<S>>(cfg: &SimConfig<S>, reducer: &R) -> Result<R::Acc> {
    cfg.validate()?;
    let stepper = Stepper {
        params: &cfg.params,
        irreversible: cfg.variant == MapVariant::IrreversibleK,
        refresh: cfg.refresh,
        eps: S::epsilon(),
        half: S::lit(0.5),
    };
    let blocks = cfg.n_ens.div_ceil(BLOCK);
    let parts: Vec<R::Acc> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = reducer.init();
            let start = b * BLOCK;
            let end = (start + BLOCK).min(cfg.n_ens);
            for m in start..end {
                run_member(cfg, &stepper, reducer, &mut acc, m as u64);
            }
            acc
        })
        .collect();
    let mut total = reducer.init();
    for part in parts {
        reducer.merge(&mut total, part);
    }
    Ok(total)
}

/// Collects the point each member reaches after `burn_in + n_iter` steps.
pub struct FinalPoints;

impl<S: Scalar> Reducer<S> for FinalPoints {
    type Acc = Vec<Point<S>>;
    fn init(&self) -> Self::Acc {
        Vec::new()
    }
    fn observe(&self, _: &mut Self::Acc, _: usize, _: Point<S>, _: Region) {}
    fn end_member(&self, acc: &mut Self::Acc, _: u64, last: Point<S>) {
        acc.push(last);
    }
    fn merge(&self, into: &mut Self::Acc, other: Self::Acc) {
        into.extend(other);
    }
}

pub fn evolve_final<S: Scalar>(cfg: &SimConfig<S>) -> Result<Vec<Point<S>>> {
    evolve(cfg, &FinalPoints)
}

/// Full observed trajectories, one `Vec` per member.
pub struct Trajectories;

impl<S: Scalar> Reducer<S> for Trajectories {
    type Acc = Vec<Vec<(Point<S>, Region)>>;
    fn init(&self) -> Self::Acc {
        Vec::new()
    }
    fn begin_member(&self, acc: &mut Self::Acc, _: u64) {
        acc.push(Vec::new());
    }
    fn observe(&self, acc: &mut Self::Acc, _: usize, p: Point<S>, r: Region) {
        acc.last_mut().expect("member started").push((p, r));
    }
    fn merge(&self, into: &mut Self::Acc, other: Self::Acc) {
        into.extend(other);
    }
}

fn check_budget(needed: u64, budget: u64) -> Result<()> {
    if needed > budget {
        Err(Error::MemoryBudget { needed, budget })
    } else {
        Ok(())
    }
}

/// One member's visited points with their regions.
pub type Trajectory<S> = Vec<(Point<S>, Region)>;

pub fn trajectories<S: Scalar>(cfg: &SimConfig<S>) -> Result<Vec<Trajectory<S>>> {
    let per = std::mem::size_of::<(Point<S>, Region)>() as u64;
    check_budget(cfg.samples().saturating_mul(per), cfg.memory_budget)?;
    evolve(cfg, &Trajectories)
}

/// Coarse region sequences, one per member.
pub struct RegionSequences;

impl<S: Scalar> Reducer<S> for RegionSequences {
    type Acc = Vec<Vec<Region>>;
    fn init(&self) -> Self::Acc {
        Vec::new()
    }
    fn begin_member(&self, acc: &mut Self::Acc, _: u64) {
        acc.push(Vec::new());
    }
    fn observe(&self, acc: &mut Self::Acc, _: usize, _: Point<S>, r: Region) {
        acc.last_mut().expect("member started").push(r);
    }
    fn merge(&self, into: &mut Self::Acc, other: Self::Acc) {
        into.extend(other);
    }
}

pub fn region_sequences<S: Scalar>(cfg: &SimConfig<S>) -> Result<Vec<Vec<Region>>> {
    check_budget(cfg.samples(), cfg.memory_budget)?;
    evolve(cfg, &RegionSequences)
}

/// Uniform-bin histogram on the unit square.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram2D {
    pub nx: usize,
    pub ny: usize,
    /// Row-major in `x`: bin `(ix, iy)` is at `ix * ny + iy`.
    pub counts: Vec<u64>,
    pub total: u64,
}

#[inline]
fn bin_index(v: f64, bins: usize) -> usize {
    ((v * bins as f64) as usize).min(bins - 1)
}

impl Histogram2D {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Domain(
                "histogram needs at least one bin per axis".into(),
            ));
        }
        Ok(Histogram2D {
            nx,
            ny,
            counts: vec![0; nx * ny],
            total: 0,
        })
    }

    #[inline]
    pub fn add(&mut self, x: f64, y: f64) {
        let i = bin_index(x, self.nx) * self.ny + bin_index(y, self.ny);
        self.counts[i] += 1;
        self.total += 1;
    }

    pub fn get(&self, ix: usize, iy: usize) -> u64 {
        self.counts[ix * self.ny + iy]
    }

    pub fn x_counts(&self) -> Vec<u64> {
        self.counts
            .chunks(self.ny)
            .map(|row| row.iter().sum())
            .collect()
    }

    pub fn y_counts(&self) -> Vec<u64> {
        let mut out = vec![0; self.ny];
        for row in self.counts.chunks(self.ny) {
            for (o, c) in out.iter_mut().zip(row) {
                *o += c;
            }
        }
        out
    }

    /// Marginal density of `x`, integrating to one.
    pub fn x_density(&self) -> Vec<f64> {
        let scale = self.nx as f64 / self.total as f64;
        self.x_counts().iter().map(|&c| c as f64 * scale).collect()
    }

    pub fn y_density(&self) -> Vec<f64> {
        let scale = self.ny as f64 / self.total as f64;
        self.y_counts().iter().map(|&c| c as f64 * scale).collect()
    }

    /// Mean density over the `x` range `[lo, hi)`, using whole bins.
    pub fn x_band_density(&self, lo: f64, hi: f64) -> f64 {
        let (a, b) = (bin_index(lo, self.nx), bin_index(hi, self.nx).max(1));
        let b = if hi >= 1.0 { self.nx } else { b };
        let counts = self.x_counts();
        let mass: u64 = counts[a..b].iter().sum();
        mass as f64 / self.total as f64 / ((b - a) as f64 / self.nx as f64)
    }

    pub fn merge(&mut self, other: &Histogram2D) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
    }
}

pub struct HistogramReducer {
    pub nx: usize,
    pub ny: usize,
}

impl<S: Scalar> Reducer<S> for HistogramReducer {
    type Acc = Histogram2D;
    fn init(&self) -> Self::Acc {
        Histogram2D::new(self.nx, self.ny).expect("validated bins")
    }
    fn observe(&self, acc: &mut Self::Acc, _: usize, p: Point<S>, _: Region) {
        acc.add(p.x.as_f64(), p.y.as_f64());
    }
    fn merge(&self, into: &mut Self::Acc, other: Self::Acc) {
        into.merge(&other);
    }
}

/// Histogram of the post-burn-in points.
pub fn empirical_density<S: Scalar>(
    cfg: &SimConfig<S>,
    nx: usize,
    ny: usize,
) -> Result<Histogram2D> {
    Histogram2D::new(nx, ny)?;
    evolve(cfg, &HistogramReducer { nx, ny })
}

/// Counts of observed one-step transitions `i_t -> i_{t+1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionCounts {
    pub counts: [[u64; 4]; 4],
}

impl TransitionCounts {
    pub fn row_total(&self, from: Region) -> u64 {
        self.counts[from.index()].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Empirical `p_ij` with its binomial standard error.
    pub fn frequency(&self, from: Region, to: Region) -> (f64, f64) {
        let n = self.row_total(from);
        if n == 0 {
            return (f64::NAN, f64::NAN);
        }
        let f = self.counts[from.index()][to.index()] as f64 / n as f64;
        (f, (f * (1.0 - f) / n as f64).sqrt())
    }
}

pub struct TransitionReducer;

impl<S: Scalar> Reducer<S> for TransitionReducer {
    type Acc = (TransitionCounts, Option<Region>);
    fn init(&self) -> Self::Acc {
        (TransitionCounts::default(), None)
    }
    fn begin_member(&self, acc: &mut Self::Acc, _: u64) {
        acc.1 = None;
    }
    fn observe(&self, acc: &mut Self::Acc, _: usize, _: Point<S>, r: Region) {
        if let Some(prev) = acc.1 {
            acc.0.counts[prev.index()][r.index()] += 1;
        }
        acc.1 = Some(r);
    }
    fn merge(&self, into: &mut Self::Acc, other: Self::Acc) {
        for (a, b) in into
            .0
            .counts
            .iter_mut()
            .flatten()
            .zip(other.0.counts.iter().flatten())
        {
            *a += b;
        }
    }
}

pub fn transition_counts<S: Scalar>(cfg: &SimConfig<S>) -> Result<TransitionCounts> {
    Ok(evolve(cfg, &TransitionReducer)?.0)
}

/// A mean over the ensemble with its standard error across members.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub members: usize,
}

impl Estimate {
    /// Mean and standard error of independent per-member values.
    pub fn from_members(values: &[f64]) -> Estimate {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            f64::NAN
        };
        Estimate {
            mean,
            stderr,
            members: n,
        }
    }

    /// `|mean - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }
}

/// Per-member time averages of an observable.
pub struct MemberAverage<F> {
    pub f: F,
}

impl<S, F> Reducer<S> for MemberAverage<F>
where
    S: Scalar,
    F: Fn(Point<S>, Region) -> f64 + Sync,
{
    type Acc = (Vec<f64>, f64, usize);
    fn init(&self) -> Self::Acc {
        (Vec::new(), 0.0, 0)
    }
    fn begin_member(&self, acc: &mut Self::Acc, _: u64) {
        acc.1 = 0.0;
        acc.2 = 0;
    }
    fn observe(&self, acc: &mut Self::Acc, _: usize, p: Point<S>, r: Region) {
        acc.1 += (self.f)(p, r);
        acc.2 += 1;
    }
    fn end_member(&self, acc: &mut Self::Acc, _: u64, _: Point<S>) {
        acc.0.push(acc.1 / acc.2 as f64);
    }
    fn merge(&self, into: &mut Self::Acc, other: Self::Acc) {
        into.0.extend(other.0);
    }
}

/// Time and ensemble average of `f` over the observed window.
pub fn time_average<S, F>(cfg: &SimConfig<S>, f: F) -> Result<Estimate>
where
    S: Scalar,
    F: Fn(Point<S>, Region) -> f64 + Sync,
{
    if cfg.n_iter == 0 {
        return Err(Error::Domain("time average needs n_iter >= 1".into()));
    }
    let (values, _, _) = evolve(cfg, &MemberAverage { f })?;
    Ok(Estimate::from_members(&values))
}

/// Axis-aligned rectangle `[x0, x1) × [y0, y1)`; an upper edge at 1 is closed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectSet {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl RectSet {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let ok = (0.0..=1.0).contains(&x0)
            && (0.0..=1.0).contains(&x1)
            && (0.0..=1.0).contains(&y0)
            && (0.0..=1.0).contains(&y1)
            && x0 < x1
            && y0 < y1;
        if !ok {
            return Err(Error::Domain(format!(
                "rectangle [{x0}, {x1}) x [{y0}, {y1}) is empty or leaves the unit square"
            )));
        }
        Ok(RectSet { x0, x1, y0, y1 })
    }

    pub fn unit() -> Self {
        RectSet {
            x0: 0.0,
            x1: 1.0,
            y0: 0.0,
            y1: 1.0,
        }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    #[inline]
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let inside = |v: f64, lo: f64, hi: f64| v >= lo && (v < hi || (hi == 1.0 && v == 1.0));
        inside(x, self.x0, self.x1) && inside(y, self.y0, self.y1)
    }

    /// Image under the time reversal `G`, split at `x = 1/2` so each piece lies
    /// in one branch.
    pub fn g_image(&self) -> Vec<RectSet> {
        let mut out = Vec::with_capacity(2);
        if self.x0 < 0.5 {
            let xr = self.x1.min(0.5);
            out.push(RectSet {
                x0: self.y0 / 2.0,
                x1: self.y1 / 2.0,
                y0: 2.0 * self.x0,
                y1: 2.0 * xr,
            });
        }
        if self.x1 > 0.5 {
            let xl = self.x0.max(0.5);
            out.push(RectSet {
                x0: (self.y0 + 1.0) / 2.0,
                x1: (self.y1 + 1.0) / 2.0,
                y0: 2.0 * xl - 1.0,
                y1: 2.0 * self.x1 - 1.0,
            });
        }
        out
    }
}

fn in_union(rects: &[RectSet], x: f64, y: f64) -> bool {
    rects.iter().any(|r| r.contains(x, y))
}

/// Long-run fraction of observed points inside `w`.
pub fn measure_estimate<S: Scalar>(cfg: &SimConfig<S>, w: &RectSet) -> Result<Estimate> {
    let w = *w;
    time_average(cfg, move |p: Point<S>, _| {
        f64::from(w.contains(p.x.as_f64(), p.y.as_f64()) as u8)
    })
}

/// Estimates `μ(∪a) - μ(∪b)` from one run, with the joint standard error.
pub fn measure_difference<S: Scalar>(
    cfg: &SimConfig<S>,
    a: &[RectSet],
    b: &[RectSet],
) -> Result<Estimate> {
    time_average(cfg, |p: Point<S>, _| {
        let (x, y) = (p.x.as_f64(), p.y.as_f64());
        f64::from(in_union(a, x, y) as u8) - f64::from(in_union(b, x, y) as u8)
    })
}

/// Checks `phi(Q r) = -phi(r)` to `1e-12` (relative to the largest value).
pub fn check_odd(phi: &[f64; 4], scheme: ReversalScheme) -> Result<()> {
    let scale = phi.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for r in Region::ALL {
        let (v, image) = (phi[r.index()], phi[r.reversed(scheme).index()]);
        if (v + image).abs() > 1e-12 * scale {
            return Err(Error::NotOdd {
                scheme: scheme.to_string(),
                region: r.to_string(),
                value: v,
                image,
            });
        }
    }
    Ok(())
}

/// Average of a region observable that is odd under `scheme`.
pub fn odd_observable_mean<S: Scalar>(
    cfg: &SimConfig<S>,
    phi: &[f64; 4],
    scheme: ReversalScheme,
) -> Result<Estimate> {
    check_odd(phi, scheme)?;
    let phi = *phi;
    time_average(cfg, move |_: Point<S>, r| phi[r.index()])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(ell: f64, q: f64) -> SimConfig<f64> {
        SimConfig::new(MapParams::new(ell, q).unwrap(), MapVariant::ReversibleM)
    }

    #[test]
    fn sampling_is_reproducible() {
        let a: Vec<Point<f64>> = sample_ensemble(100, 7).unwrap();
        let b: Vec<Point<f64>> = sample_ensemble(100, 7).unwrap();
        let c: Vec<Point<f64>> = sample_ensemble(100, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(sample_ensemble::<f64>(0, 1).is_err());
        // Point k does not depend on the ensemble size.
        let short: Vec<Point<f64>> = sample_ensemble(10, 7).unwrap();
        assert_eq!(&a[..10], &short[..]);
    }

    #[test]
    fn zero_iterations_return_initial_ensemble() {
        let c = cfg(0.15, 0.0).with_sizes(300, 0, 0).with_seed(3);
        assert_eq!(
            evolve_final(&c).unwrap(),
            sample_ensemble::<f64>(300, 3).unwrap()
        );
    }

    #[test]
    fn empty_strip_matches_reversible_bitwise() {
        let params = MapParams::with_strip(0.15, 0.1, 0.3, 0.0).unwrap();
        let m = SimConfig::new(params, MapVariant::ReversibleM).with_sizes(50, 200, 10);
        let k = m.with_variant(MapVariant::IrreversibleK);
        assert_eq!(trajectories(&m).unwrap(), trajectories(&k).unwrap());
    }

    #[test]
    fn memory_budget_is_enforced() {
        let mut c = cfg(0.15, 0.0).with_sizes(1000, 1000, 0);
        c.memory_budget = 10_000;
        assert!(matches!(
            region_sequences(&c),
            Err(Error::MemoryBudget { .. })
        ));
    }

    #[test]
    fn histogram_bookkeeping() {
        let h = empirical_density(&cfg(0.15, 0.0).with_sizes(64, 10, 5), 7, 3).unwrap();
        assert_eq!(h.total, 640);
        assert_eq!(h.counts.iter().sum::<u64>(), 640);
        assert_eq!(h.x_counts().iter().sum::<u64>(), 640);
        assert!((h.x_density().iter().sum::<f64>() / 7.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn g_image_examples() {
        let left = RectSet::new(0.1, 0.3, 0.2, 0.6).unwrap();
        assert_eq!(
            left.g_image(),
            vec![RectSet::new(0.1, 0.3, 0.2, 0.6).unwrap()]
        );
        let across = RectSet::new(0.25, 0.75, 0.0, 1.0).unwrap();
        let img = across.g_image();
        assert_eq!(img.len(), 2);
        assert_eq!(img[0], RectSet::new(0.0, 0.5, 0.5, 1.0).unwrap());
        assert_eq!(img[1], RectSet::new(0.5, 1.0, 0.0, 0.5).unwrap());
        let area: f64 = img.iter().map(RectSet::area).sum();
        assert!((area - across.area()).abs() < 1e-15);
        assert!(RectSet::new(0.5, 0.5, 0.0, 1.0).is_err());
        assert!(RectSet::new(0.0, 1.2, 0.0, 1.0).is_err());
    }

    #[test]
    fn unit_square_has_full_measure() {
        let e =
            measure_estimate(&cfg(0.15, 0.2).with_sizes(50, 100, 10), &RectSet::unit()).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn oddness_is_checked() {
        assert!(check_odd(&[1.0, 0.0, 0.0, -1.0], ReversalScheme::Q4).is_ok());
        assert!(check_odd(&[0.0, 1.0, -1.0, 0.0], ReversalScheme::Q3).is_ok());
        assert!(matches!(
            check_odd(&[0.0, 1.0, -1.0, 0.0], ReversalScheme::Q4),
            Err(Error::NotOdd { .. })
        ));
        let e = odd_observable_mean(
            &cfg(0.15, 0.0).with_sizes(20, 20, 0),
            &[0.0; 4],
            ReversalScheme::Q4,
        )
        .unwrap();
        assert_eq!(e.mean, 0.0);
    }

    #[test]
    fn dyadic_case_does_not_collapse() {
        let c = cfg(0.25, 0.0).with_sizes(20, 200, 200);
        let seqs = region_sequences(&c).unwrap();
        for s in seqs {
            assert!(Region::ALL.iter().all(|r| s.contains(r)));
        }
    }
}
