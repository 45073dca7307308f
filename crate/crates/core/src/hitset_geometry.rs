//! The geometry of one target block: the anchor point z of a cylinder with
//! T^n z = h(z), the inner/outer ball sandwich of the hit set inside the
//! cylinder, weighted per-axis ball families, and the multiplicative
//! pullback region with its membership predicate.

use serde::Serialize;

use crate::beta_core::{enumerate_full, merge_intervals, Beta, BetaVector, Cylinder};
use crate::error::{Error, Result};
use crate::series_classifier::ApproxFunction;

// ---------------------------------------------------------------------------
// Lipschitz maps
// ---------------------------------------------------------------------------

/// The shape of a target map h on [0, 1).
#[derive(Clone, Debug, Serialize)]
pub enum MapKind {
    Constant(f64),
    Identity,
    Affine { slope: f64, offset: f64 },
    /// Piecewise-linear interpolation of (x, y) samples with a certified
    /// Lipschitz bound supplied by the caller (bound inference from samples
    /// would be unsound).
    Tabulated { xs: Vec<f64>, ys: Vec<f64> },
}

/// A Lipschitz map h: [0,1) → [0,1) with a certified Lipschitz constant.
#[derive(Clone, Debug, Serialize)]
pub struct LipschitzMap {
    kind: MapKind,
    lipschitz_bound: f64,
}

impl LipschitzMap {
    pub fn constant(a: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::Domain(format!("constant map value must be in [0,1), got {a}")));
        }
        Ok(LipschitzMap { kind: MapKind::Constant(a), lipschitz_bound: 0.0 })
    }

    pub fn identity() -> Self {
        LipschitzMap { kind: MapKind::Identity, lipschitz_bound: 1.0 }
    }

    /// Affine slope·x + offset. Range is not constrained at construction:
    /// the expansion-rate precondition (L < β^n) gates every use, and the
    /// anchor solve clamps to the cylinder's closed extension.
    pub fn affine(slope: f64, offset: f64) -> Result<Self> {
        if !slope.is_finite() || !offset.is_finite() {
            return Err(Error::Domain("affine coefficients must be finite".into()));
        }
        Ok(LipschitzMap { kind: MapKind::Affine { slope, offset }, lipschitz_bound: slope.abs() })
    }

    /// Piecewise-linear samples over increasing xs spanning [0, 1], values in
    /// [0, 1); the certified bound is spot-checked against the sample slopes.
    pub fn tabulated(xs: Vec<f64>, ys: Vec<f64>, lipschitz_bound: f64) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::Domain("tabulated map needs >= 2 matching samples".into()));
        }
        if xs[0] != 0.0 || *xs.last().unwrap() != 1.0 {
            return Err(Error::Domain("tabulated samples must span [0, 1]".into()));
        }
        for w in xs.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Domain("tabulated xs must be strictly increasing".into()));
            }
        }
        if ys.iter().any(|&y| !(0.0..1.0).contains(&y)) {
            return Err(Error::Domain("tabulated values must lie in [0, 1)".into()));
        }
        for i in 1..xs.len() {
            let slope = (ys[i] - ys[i - 1]).abs() / (xs[i] - xs[i - 1]);
            if slope > lipschitz_bound * (1.0 + 1e-12) {
                return Err(Error::Precondition(format!(
                    "sample slope {slope} exceeds certified Lipschitz bound {lipschitz_bound}"
                )));
            }
        }
        Ok(LipschitzMap { kind: MapKind::Tabulated { xs, ys }, lipschitz_bound })
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    /// h(x); inputs are clamped into [0, 1] (anchor solving works on the
    /// closed extension of a cylinder, which may touch 1).
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match &self.kind {
            MapKind::Constant(a) => *a,
            MapKind::Identity => x,
            MapKind::Affine { slope, offset } => slope * x + offset,
            MapKind::Tabulated { xs, ys } => {
                let i = match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
                    Ok(i) => return ys[i],
                    Err(i) => i,
                };
                // x lies strictly between xs[i-1] and xs[i].
                let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                ys[i - 1] + t * (ys[i] - ys[i - 1])
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Anchor solving
// ---------------------------------------------------------------------------

/// The unique z in the closed extended cylinder interval with β^n(z − left) = h(z).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AnchorPoint {
    pub z: f64,
    /// True when the solution landed on (or was clamped to) the right
    /// endpoint of the closed extension.
    pub on_boundary: bool,
}

fn check_expansion(beta: &Beta, n: u32, h: &LipschitzMap) -> Result<f64> {
    let bn = beta.as_f64().powi(n as i32);
    if h.lipschitz_bound() >= bn {
        return Err(Error::Precondition(format!(
            "Lipschitz bound {} must be < beta^n = {bn}",
            h.lipschitz_bound()
        )));
    }
    Ok(bn)
}

/// Solves G(z) = h(z) on the closed extension [left, left + β^(−n)] of the
/// cylinder, where G(z) = β^n(z − left) is the n-th map iterate on the
/// cylinder. G − h has slope ≥ β^n − L > 0, so the solution is unique;
/// constant/identity/affine kinds solve in closed form, tabulated by
/// bisection.
pub fn solve_anchor(beta: &Beta, cyl: &Cylinder, h: &LipschitzMap) -> Result<AnchorPoint> {
    let n = cyl.level();
    let bn = check_expansion(beta, n, h)?;
    let left = cyl.left_f64();
    let right = left + bn.recip();
    let z = match h.kind() {
        MapKind::Constant(a) => left + a / bn,
        MapKind::Identity => left * bn / (bn - 1.0),
        MapKind::Affine { slope, offset } => (bn * left + offset) / (bn - slope),
        MapKind::Tabulated { .. } => {
            // g(z) = β^n(z − left) − h(z) is increasing with g(left) ≤ 0 and
            // g(right) = 1 − h(right) > 0.
            let g = |z: f64| bn * (z - left) - h.eval(z);
            let (mut lo, mut hi) = (left, right);
            let tol = 2.0_f64.powi(-((beta.precision_bits() / 2).min(52) as i32));
            while hi - lo > tol * right.abs().max(1.0) {
                let mid = 0.5 * (lo + hi);
                if g(mid) <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    };
    let clamped = z.clamp(left, right);
    Ok(AnchorPoint { z: clamped, on_boundary: clamped >= right })
}

/// A ball B(center, radius) on the line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ball {
    pub center: f64,
    pub radius: f64,
}

/// The sandwich of the hit set {x ∈ cyl : |T^n x − h(x)| < r}: an outer ball
/// B(z, 2rβ^(−n)) that always contains it, and, when the cylinder is full,
/// an inner ball B(z, rβ^(−n)/2) contained in it. Both share the anchor
/// center, independent of r.
pub fn hit_enclosures(
    beta: &Beta,
    cyl: &Cylinder,
    h: &LipschitzMap,
    r: f64,
) -> Result<(Ball, Option<Ball>)> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain(format!("hit radius must lie in (0, 1], got {r}")));
    }
    let bn = check_expansion(beta, cyl.level(), h)?;
    // The hit set spreads r/(β^n − L) around the anchor, so the stated outer
    // radius 2rβ^(−n) is an enclosure only when L ≤ β^n/2.
    if h.lipschitz_bound() > 0.5 * bn {
        return Err(Error::Precondition(format!(
            "Lipschitz bound {} must be <= beta^n/2 = {} for the ball sandwich",
            h.lipschitz_bound(),
            0.5 * bn
        )));
    }
    let anchor = solve_anchor(beta, cyl, h)?;
    let outer = Ball { center: anchor.z, radius: 2.0 * r / bn };
    let inner = cyl.is_full().then_some(Ball { center: anchor.z, radius: 0.5 * r / bn });
    Ok((outer, inner))
}

// ---------------------------------------------------------------------------
// Hit regions
// ---------------------------------------------------------------------------

/// One anchored ball pair on an axis: the hit set around one full cylinder's
/// anchor is sandwiched between the inner and outer radii.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AxisBall {
    pub center: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
}

/// One cylinder's anchor data on an axis of a multiplicative region. The
/// pullback map is G(x) = β^n·x + g_c on the cylinder.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MultAnchor {
    pub left: f64,
    pub length: f64,
    /// Anchor point z with G(z) = h(z).
    pub z: f64,
    /// Pullback center a = h(z).
    pub a: f64,
    /// Constant part of G: g_c = −β^n·left.
    pub g_c: f64,
}

/// Whether a region carries per-axis rates (weighted) or one product
/// threshold (multiplicative).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RegionMode {
    Weighted,
    Multiplicative,
}

/// The level-n target region: per-axis anchored balls (weighted mode) or
/// per-axis pullback anchors with a product threshold (multiplicative mode).
#[derive(Clone, Debug, Serialize)]
pub enum HitRegion {
    Weighted {
        n: u32,
        axes: Vec<Vec<AxisBall>>,
    },
    Multiplicative {
        n: u32,
        /// ψ(n), the raw product threshold.
        psi_value: f64,
        /// δ = 2^d·ψ(n), the pullback product threshold.
        threshold: f64,
        axes: Vec<Vec<MultAnchor>>,
    },
}

impl HitRegion {
    pub fn dimension(&self) -> usize {
        match self {
            HitRegion::Weighted { axes, .. } => axes.len(),
            HitRegion::Multiplicative { axes, .. } => axes.len(),
        }
    }

    pub fn level(&self) -> u32 {
        match self {
            HitRegion::Weighted { n, .. } => *n,
            HitRegion::Multiplicative { n, .. } => *n,
        }
    }

    /// Pullback membership: ∏|G_i(x_i) − a_i| < δ with each x_i located in
    /// its axis cylinder.
    pub fn multiplicative_membership(&self, x: &[f64]) -> Result<bool> {
        let HitRegion::Multiplicative { threshold, axes, .. } = self else {
            return Err(Error::Unsupported("membership requires multiplicative mode".into()));
        };
        if x.len() != axes.len() {
            return Err(Error::Domain(format!(
                "point dimension {} != region dimension {}",
                x.len(),
                axes.len()
            )));
        }
        let mut product = 1.0;
        for (xi, axis) in x.iter().zip(axes) {
            let anchor = locate_anchor(axis, *xi)?;
            let beta_n = anchor_beta_n(anchor);
            product *= (beta_n * xi + anchor.g_c - anchor.a).abs();
        }
        Ok(product < *threshold)
    }

    /// Raw membership: ∏|T^n x_i − h_i(x_i)| < ψ(n), with T^n computed on
    /// each located cylinder as β^n(x − left).
    pub fn multiplicative_raw_membership(&self, maps: &[LipschitzMap], x: &[f64]) -> Result<bool> {
        let HitRegion::Multiplicative { psi_value, axes, .. } = self else {
            return Err(Error::Unsupported("membership requires multiplicative mode".into()));
        };
        if x.len() != axes.len() || maps.len() != axes.len() {
            return Err(Error::Domain("point/map dimension mismatch".into()));
        }
        let mut product = 1.0;
        for ((xi, axis), h) in x.iter().zip(axes).zip(maps) {
            let anchor = locate_anchor(axis, *xi)?;
            let beta_n = anchor_beta_n(anchor);
            product *= (beta_n * (xi - anchor.left) - h.eval(*xi)).abs();
        }
        Ok(product < *psi_value)
    }
}

fn anchor_beta_n(anchor: &MultAnchor) -> f64 {
    // g_c = −β^n·left gives β^n only when left ≠ 0; the cylinder length
    // is tail·β^(−n) which is unreliable for non-full cylinders, so the
    // builder stores full-length cylinders only and length = β^(−n).
    anchor.length.recip()
}

fn locate_anchor(axis: &[MultAnchor], x: f64) -> Result<&MultAnchor> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("point coordinate {x} outside [0, 1)")));
    }
    let idx = axis.partition_point(|a| a.left <= x);
    for a in axis[..idx].iter().rev().take(2) {
        if x >= a.left && x < a.left + a.length {
            return Ok(a);
        }
    }
    Err(Error::Domain(format!("coordinate {x} is not inside any stored full cylinder")))
}

/// Builds the level-n target region from the full cylinders of each axis.
///
/// Weighted mode needs one rate per axis; balls get inner radius
/// β_i^(−n)ψ_i(n)/2 and outer radius 2β_i^(−n)ψ_i(n) around the anchors.
/// Multiplicative mode needs a single rate; anchors a_i = h_i(z_i) with
/// product threshold δ = 2^d·ψ(n).
pub fn build_hit_region(
    betas: &BetaVector,
    rates: &[ApproxFunction],
    maps: &[LipschitzMap],
    n: u32,
    mode: RegionMode,
) -> Result<HitRegion> {
    let d = betas.d();
    if maps.len() != d {
        return Err(Error::Domain(format!("got {} maps for d={d}", maps.len())));
    }
    if n == 0 {
        return Err(Error::Domain("level n must be >= 1".into()));
    }
    for (i, h) in maps.iter().enumerate() {
        check_expansion(betas.get(i), n, h)?;
    }
    match mode {
        RegionMode::Weighted => {
            if rates.len() != d {
                return Err(Error::Domain(format!("weighted mode needs {d} rates, got {}", rates.len())));
            }
            let mut axes = Vec::with_capacity(d);
            for i in 0..d {
                let beta = betas.get(i);
                let scale = beta.as_f64().powi(-(n as i32)) * rates[i].eval(n);
                let mut balls = Vec::new();
                for cyl in enumerate_full(beta, n, None)? {
                    let anchor = solve_anchor(beta, &cyl, &maps[i])?;
                    balls.push(AxisBall {
                        center: anchor.z,
                        inner_radius: 0.5 * scale,
                        outer_radius: 2.0 * scale,
                    });
                }
                axes.push(balls);
            }
            Ok(HitRegion::Weighted { n, axes })
        }
        RegionMode::Multiplicative => {
            if rates.len() != 1 {
                return Err(Error::Domain(format!(
                    "multiplicative mode needs one rate, got {}",
                    rates.len()
                )));
            }
            let psi_value = rates[0].eval(n);
            let mut axes = Vec::with_capacity(d);
            for i in 0..d {
                let beta = betas.get(i);
                let bn = beta.as_f64().powi(n as i32);
                let mut anchors = Vec::new();
                for cyl in enumerate_full(beta, n, None)? {
                    let anchor = solve_anchor(beta, &cyl, &maps[i])?;
                    let left = cyl.left_f64();
                    anchors.push(MultAnchor {
                        left,
                        length: bn.recip(),
                        z: anchor.z,
                        a: maps[i].eval(anchor.z),
                        g_c: -bn * left,
                    });
                }
                anchors.sort_by(|a, b| a.left.partial_cmp(&b.left).unwrap());
                axes.push(anchors);
            }
            Ok(HitRegion::Multiplicative {
                n,
                psi_value,
                threshold: 2.0_f64.powi(d as i32) * psi_value,
                axes,
            })
        }
    }
}

/// Exact Lebesgue measure of the union of one weighted axis's intervals
/// (inner or outer balls) by sort-and-merge.
pub fn region_measure_1d(region: &HitRegion, axis: usize, use_inner: bool) -> Result<f64> {
    let HitRegion::Weighted { axes, .. } = region else {
        return Err(Error::Unsupported("axis measure requires weighted mode".into()));
    };
    let balls = axes
        .get(axis)
        .ok_or_else(|| Error::Domain(format!("axis {axis} out of range")))?;
    let intervals: Vec<(f64, f64)> = balls
        .iter()
        .map(|b| {
            let r = if use_inner { b.inner_radius } else { b.outer_radius };
            (b.center - r, b.center + r)
        })
        .collect();
    Ok(merge_intervals(&intervals).iter().map(|(a, b)| b - a).sum())
}
