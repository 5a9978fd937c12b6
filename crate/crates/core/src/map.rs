//! The four-branch baker map `M`, the strip flip `N`, the composed map `K = N∘M`,
//! the time-reversal involution `G`, and the per-region Jacobians.
//!
//! Everything here is a pure function of its arguments.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Cell of the Markov partition. The cells are the x-intervals
/// `A = [0, ell)`, `B = [ell, 1/2)`, `C = [1/2, 3/4)`, `D = [3/4, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    A,
    B,
    C,
    D,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::A, Region::B, Region::C, Region::D];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Region {
        Region::ALL[i]
    }

    /// Region action of the time reversal `Q = G M`.
    pub fn reversed(self, scheme: ReversalScheme) -> Region {
        use Region::*;
        match (scheme, self) {
            (ReversalScheme::Q4, A) => D,
            (ReversalScheme::Q4, D) => A,
            (ReversalScheme::Q4, r) => r,
            (ReversalScheme::Q3, B) => C,
            (ReversalScheme::Q3, C) => B,
            (ReversalScheme::Q3, r) => r,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Region::A => "A",
            Region::B => "B",
            Region::C => "C",
            Region::D => "D",
        };
        f.write_str(s)
    }
}

/// Which region-level time reversal applies.
///
/// `Q4` belongs to the equilibrium map (`q = 0`): it swaps `A` and `D`.
/// `Q3` belongs to the dissipative family `q = 1/2 - 2 ell`: it swaps `B` and `C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReversalScheme {
    Q4,
    Q3,
}

impl fmt::Display for ReversalScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReversalScheme::Q4 => f.write_str("Q4"),
            ReversalScheme::Q3 => f.write_str("Q3"),
        }
    }
}

pub fn region_reverse(r: Region, scheme: ReversalScheme) -> Region {
    r.reversed(scheme)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MapVariant {
    /// The baker map `M` alone.
    ReversibleM,
    /// `K = N∘M`: apply `M`, then flip the lower half of the strip.
    IrreversibleK,
}

/// Parameters of one map instance.
///
/// The strip `[strip_x, strip_x + strip_eps]` is where `N` flips `y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapParams<S> {
    ell: S,
    q: S,
    strip_x: S,
    strip_eps: S,
}

impl<S: Scalar> MapParams<S> {
    /// Parameters with the default strip `strip_x = ell`, `strip_eps = 1/2 - ell`,
    /// which covers exactly region `B`.
    pub fn new(ell: S, q: S) -> Result<Self> {
        let half = S::lit(0.5);
        Self::with_strip(ell, q, ell, half - ell)
    }

    /// The dissipative family `q = 1/2 - 2 ell`. Its only equilibrium is `ell = 1/4`.
    pub fn dissipative(ell: S) -> Result<Self> {
        Self::new(ell, S::lit(0.5) - S::lit(2.0) * ell)
    }

    pub fn with_strip(ell: S, q: S, strip_x: S, strip_eps: S) -> Result<Self> {
        let zero = S::zero();
        let one = S::one();
        let quarter = S::lit(0.25);
        let half = S::lit(0.5);
        if !(ell > zero && ell <= quarter) {
            return Err(Error::Domain(format!("ell = {ell} outside (0, 1/4]")));
        }
        if !(q >= zero && q < half) {
            return Err(Error::Domain(format!("q = {q} outside [0, 1/2)")));
        }
        if !(strip_x >= zero && strip_x < one) {
            return Err(Error::Domain(format!("strip_x = {strip_x} outside [0, 1)")));
        }
        // The default strip is computed as ell + (1/2 - ell), so allow one rounding step past 1.
        if !(strip_eps >= zero && strip_x + strip_eps <= one + S::epsilon()) {
            return Err(Error::Domain(format!(
                "strip [{strip_x}, {strip_x} + {strip_eps}] not inside [0, 1]"
            )));
        }
        let params = MapParams {
            ell,
            q,
            strip_x,
            strip_eps,
        };
        if let Some(r) = Region::ALL.iter().find(|&&r| params.jacobian(r) <= zero) {
            return Err(Error::Domain(format!(
                "Jacobian of region {r} is not positive for ell = {ell}, q = {q}"
            )));
        }
        Ok(params)
    }

    pub fn ell(&self) -> S {
        self.ell
    }

    pub fn q(&self) -> S {
        self.q
    }

    pub fn strip_x(&self) -> S {
        self.strip_x
    }

    pub fn strip_eps(&self) -> S {
        self.strip_eps
    }

    /// `true` when `q` sits on the dissipative family `q = 1/2 - 2 ell` (to rounding).
    pub fn is_dissipative_family(&self) -> bool {
        let target = S::lit(0.5) - S::lit(2.0) * self.ell;
        (self.q - target).abs() <= S::lit(4.0) * S::epsilon()
    }

    pub fn jacobian(&self, r: Region) -> S {
        let (ell, q) = (self.ell, self.q);
        let one = S::one();
        let two = S::lit(2.0);
        let four = S::lit(4.0);
        match r {
            Region::A => one / (four * ell) - q / (two * ell),
            Region::B => one - q / (one - two * ell),
            Region::C => one + two * q,
            Region::D => four * ell + two * q,
        }
    }

    pub fn jacobians(&self) -> [S; 4] {
        Region::ALL.map(|r| self.jacobian(r))
    }

    /// Local phase space contraction rate `-ln J` on region `r`. The first two
    /// are written as log differences so that at `q = 0` they are exactly
    /// `ln 4ell` and `0`, and `Λ_A + Λ_D` cancels bitwise.
    pub fn lambda_local(&self, r: Region) -> S {
        let (ell, q) = (self.ell, self.q);
        let one = S::one();
        let two = S::lit(2.0);
        match r {
            Region::A => (S::lit(4.0) * ell).ln() - (one - two * q).ln(),
            Region::B => (one - two * ell).ln() - (one - two * ell - q).ln(),
            _ => -self.jacobian(r).ln(),
        }
    }

    pub fn lambdas(&self) -> [S; 4] {
        Region::ALL.map(|r| self.lambda_local(r))
    }

    /// Region of abscissa `x`; out-of-range or NaN input is a domain error.
    pub fn classify(&self, x: S) -> Result<Region> {
        if !(x >= S::zero() && x <= S::one()) {
            return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
        }
        Ok(self.region_of(x))
    }

    /// Classification without the range check. Callers guarantee `0 <= x <= 1`.
    #[inline]
    pub(crate) fn region_of(&self, x: S) -> Region {
        if x < self.ell {
            Region::A
        } else if x < S::lit(0.5) {
            Region::B
        } else if x < S::lit(0.75) {
            Region::C
        } else {
            Region::D
        }
    }
}

pub fn jacobian<S: Scalar>(r: Region, params: &MapParams<S>) -> S {
    params.jacobian(r)
}

pub fn lambda_local<S: Scalar>(r: Region, params: &MapParams<S>) -> S {
    params.lambda_local(r)
}

pub fn classify_region<S: Scalar>(x: S, params: &MapParams<S>) -> Result<Region> {
    params.classify(x)
}

/// A phase point on the unit square.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point<S> {
    pub fn new(x: S, y: S) -> Result<Self> {
        let unit = |v: S| v >= S::zero() && v <= S::one();
        if !(unit(x) && unit(y)) {
            return Err(Error::Domain(format!(
                "point ({x}, {y}) outside the unit square"
            )));
        }
        Ok(Point { x, y })
    }

    pub fn distance(&self, other: &Point<S>) -> S {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[inline]
fn clamp_unit<S: Scalar>(v: S) -> S {
    v.max(S::zero()).min(S::one())
}

/// One application of `M`, together with the region the input was in.
#[inline]
pub(crate) fn step_m_region<S: Scalar>(p: Point<S>, params: &MapParams<S>) -> (Point<S>, Region) {
    let (ell, q) = (params.ell, params.q);
    let one = S::one();
    let two = S::lit(2.0);
    let half = S::lit(0.5);
    let r = params.region_of(p.x);
    let (x, y) = match r {
        Region::A => (p.x / (two * ell) + half, (half - q) * p.y + (half + q)),
        Region::B => (
            (p.x - ell) / (one - two * ell),
            (one - two * ell - q) * p.y + (two * ell + q),
        ),
        Region::C => (two * p.x - half, (half + q) * p.y),
        Region::D => (two * p.x - S::lit(1.5), (two * ell + q) * p.y),
    };
    (
        Point {
            x: clamp_unit(x),
            y: clamp_unit(y),
        },
        r,
    )
}

pub fn step_m<S: Scalar>(p: Point<S>, params: &MapParams<S>) -> Point<S> {
    step_m_region(p, params).0
}

/// The volume preserving flip `N`: inside the strip, `y < 1/2` goes to `1 - y`.
/// A zero-width strip is empty.
#[inline]
pub fn apply_n<S: Scalar>(p: Point<S>, params: &MapParams<S>) -> Point<S> {
    let in_strip = params.strip_eps > S::zero()
        && p.x >= params.strip_x
        && p.x <= params.strip_x + params.strip_eps;
    if in_strip && p.y < S::lit(0.5) {
        Point {
            x: p.x,
            y: S::one() - p.y,
        }
    } else {
        p
    }
}

#[inline]
pub fn step<S: Scalar>(p: Point<S>, params: &MapParams<S>, variant: MapVariant) -> Point<S> {
    let m = step_m(p, params);
    match variant {
        MapVariant::ReversibleM => m,
        MapVariant::IrreversibleK => apply_n(m, params),
    }
}

/// Time reversal `G`: reflects each half square along its diagonal from the lower
/// left to the upper right corner. `G∘G` is the identity.
pub fn involution_g<S: Scalar>(p: Point<S>) -> Point<S> {
    let two = S::lit(2.0);
    let half = S::lit(0.5);
    if p.x < half {
        Point {
            x: p.y * half,
            y: clamp_unit(two * p.x),
        }
    } else {
        Point {
            x: (p.y + S::one()) * half,
            y: clamp_unit(two * p.x - S::one()),
        }
    }
}

/// Outcome of sampling the identity `F G F = G` for `F = M` or `F = K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReversibilityReport {
    pub samples: usize,
    /// Max over samples of `|F(G(F(p))) - G(p)|`.
    pub max_deviation: f64,
    /// Max over samples of `|J_M(p) J_M(G M p) - 1|`.
    pub max_jacobian_pairing: f64,
}

pub fn check_reversibility<S: Scalar>(
    params: &MapParams<S>,
    variant: MapVariant,
    sample_count: usize,
    seed: u64,
) -> ReversibilityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_deviation = 0.0f64;
    let mut max_pairing = 0.0f64;
    for _ in 0..sample_count {
        let p = Point {
            x: S::lit(rng.random::<f64>()),
            y: S::lit(rng.random::<f64>()),
        };
        let fgf = step(involution_g(step(p, params, variant)), params, variant);
        max_deviation = max_deviation.max(fgf.distance(&involution_g(p)).as_f64());

        let gm = involution_g(step_m(p, params));
        let pairing =
            params.jacobian(params.region_of(p.x)) * params.jacobian(params.region_of(gm.x));
        max_pairing = max_pairing.max((pairing - S::one()).abs().as_f64());
    }
    ReversibilityReport {
        samples: sample_count,
        max_deviation,
        max_jacobian_pairing: max_pairing,
    }
}
