//! Measure-theoretic estimation and certification.
//!
//! Three layers of rigor, used where each is cheapest:
//! - exact rational arithmetic for the left-anchored one-dimensional hit
//!   sets of integer bases (periodic interval unions, their pairwise
//!   correlations, and a class-merging engine for deep exact union
//!   measures),
//! - seeded Monte-Carlo estimates with finite-sample Hoeffding confidence
//!   radii for everything else,
//! - sampling-certified Hausdorff f-content bounds: grid-cover upper bounds
//!   and mass-distribution lower bounds driven by the divergence measure μ.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
#[cfg(test)]
use num_traits::ToPrimitive;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::beta_core::{enumerate_full, merge_intervals, Beta, Cylinder};
use crate::covering_engine::brute_force_fcover;
use crate::dimension_functions::DimensionFunction;
use crate::divergence_lab::{MuMeasure, RectFamily};
use crate::error::{Error, Result};
use crate::hitset_geometry::HitRegion;

// ---------------------------------------------------------------------------
// Periodic interval unions (exact, one-dimensional, left-anchored)
// ---------------------------------------------------------------------------

/// The left-anchored level-n hit set of an integer base b with h ≡ 0:
/// ⋃_k [k·b^(−n), (k + ψ(n))·b^(−n)) over k = 0, …, b^n − 1, stored by its
/// period and the relative hit fraction ψ(n) ∈ [0, 1].
#[derive(Clone, Debug)]
pub struct PeriodicUnion {
    base: u64,
    level: u32,
    hit: BigRational,
}

fn big_pow(base: u64, n: u32) -> BigInt {
    BigInt::from(base).pow(n)
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl PeriodicUnion {
    pub fn new(base: u64, level: u32, hit: BigRational) -> Result<Self> {
        if base < 2 {
            return Err(Error::Domain(format!("integer base must be >= 2, got {base}")));
        }
        if hit.is_negative() || hit > BigRational::one() {
            return Err(Error::Domain("hit fraction must lie in [0, 1]".into()));
        }
        Ok(PeriodicUnion { base, level, hit })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Period b^(−n).
    pub fn period(&self) -> BigRational {
        BigRational::new(BigInt::one(), big_pow(self.base, self.level))
    }

    /// λ([0, x) ∩ set), exact.
    pub fn prefix(&self, x: &BigRational) -> BigRational {
        let x = x.clone().min(BigRational::one()).max(BigRational::zero());
        let p = self.period();
        let ell = &self.hit * &p;
        let k = (&x / &p).floor();
        let frac = &x - &k * &p;
        k * &ell + frac.min(ell)
    }

    /// λ([a, b) ∩ set), exact.
    pub fn window_measure(&self, a: &BigRational, b: &BigRational) -> BigRational {
        self.prefix(b) - self.prefix(a)
    }

    /// Exact λ([a, b) ∩ self ∩ other).  The window endpoints must be
    /// multiples of the coarser period, so the closed form (one fine prefix
    /// per coarse period) applies.
    pub fn pair_window(
        &self,
        other: &PeriodicUnion,
        a: &BigRational,
        b: &BigRational,
    ) -> Result<BigRational> {
        if self.base != other.base {
            return Err(Error::Unsupported("mixed bases in a correlation pair".into()));
        }
        let (coarse, fine) =
            if self.level <= other.level { (self, other) } else { (other, self) };
        let p = coarse.period();
        if !(a / &p).is_integer() || !(b / &p).is_integer() {
            return Err(Error::Precondition(
                "correlation window must align with the coarser period".into(),
            ));
        }
        if b <= a {
            return Ok(BigRational::zero());
        }
        let periods = (b - a) / &p;
        // Per coarse period the coarse set contributes [0, hit·p); both sets
        // are left-anchored on the fine lattice, so the fine mass inside is
        // a prefix value, identical in every period.
        let per_period = fine.prefix(&(&coarse.hit * &p));
        Ok(periods * per_period)
    }
}

// ---------------------------------------------------------------------------
// Chung–Erdős lower bounds
// ---------------------------------------------------------------------------

/// Second-moment lower bound (Σλ(Aₙ∩W))² / Σ_{n,m} λ(Aₙ∩Aₘ∩W) for the union
/// of periodic hit sets, all measures exact.
pub fn chung_erdos_periodic(
    sets: &[PeriodicUnion],
    a: &BigRational,
    b: &BigRational,
) -> Result<BigRational> {
    let mut s1 = BigRational::zero();
    for u in sets {
        s1 += u.window_measure(a, b);
    }
    if s1.is_zero() {
        return Ok(BigRational::zero());
    }
    let mut s2 = BigRational::zero();
    for (i, u) in sets.iter().enumerate() {
        s2 += u.window_measure(a, b);
        for v in &sets[i + 1..] {
            s2 += ratio(2, 1) * u.pair_window(v, a, b)?;
        }
    }
    Ok(&s1 * &s1 / s2)
}

fn clip_merge(set: &[(f64, f64)], window: (f64, f64)) -> Vec<(f64, f64)> {
    let clipped: Vec<(f64, f64)> = set
        .iter()
        .map(|&(lo, hi)| (lo.max(window.0), hi.min(window.1)))
        .filter(|&(lo, hi)| hi > lo)
        .collect();
    merge_intervals(&clipped)
}

fn merged_len(set: &[(f64, f64)]) -> f64 {
    set.iter().map(|&(lo, hi)| hi - lo).sum()
}

fn intersect_merged(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (mut i, mut j, mut total) = (0usize, 0usize, 0.0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if hi > lo {
            total += hi - lo;
        }
        if a[i].1 <= b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    total
}

/// The same second-moment bound for explicit interval unions (weighted
/// one-dimensional regions), measures by sort-merge.
pub fn chung_erdos_from_intervals(sets: &[Vec<(f64, f64)>], window: (f64, f64)) -> f64 {
    let merged: Vec<Vec<(f64, f64)>> = sets.iter().map(|s| clip_merge(s, window)).collect();
    let s1: f64 = merged.iter().map(|s| merged_len(s)).sum();
    if s1 <= 0.0 {
        return 0.0;
    }
    let mut s2 = 0.0;
    for (i, u) in merged.iter().enumerate() {
        s2 += merged_len(u);
        for v in &merged[i + 1..] {
            s2 += 2.0 * intersect_merged(u, v);
        }
    }
    s1 * s1 / s2
}

// ---------------------------------------------------------------------------
// Exact deep union measures (the class-merging engine)
// ---------------------------------------------------------------------------

/// Exact λ of the complement ⋂_{n=n_lo}^{n_hi} Ẽ_n^c within [0, 1), for the
/// left-anchored hit sets Ẽ_n of an integer base.
///
/// The intersection refines into classes "suffix piece [o, 1) of a level-n
/// cylinder"; one subdivision step maps each class to at most two offsets
/// (the doubled partial child and the fresh hit offset ψ(n)), so the class
/// count grows at most linearly in the depth while the interval count would
/// grow like b^n.
pub fn exact_union_complement(
    base: u64,
    psi: &dyn Fn(u32) -> BigRational,
    n_lo: u32,
    n_hi: u32,
) -> Result<BigRational> {
    if base < 2 {
        return Err(Error::Domain(format!("integer base must be >= 2, got {base}")));
    }
    if n_lo == 0 || n_lo > n_hi {
        return Err(Error::Domain("need 1 <= n_lo <= n_hi".into()));
    }
    let b_big = BigInt::from(base);
    let clamp = |r: BigRational| r.max(BigRational::zero());

    let first = clamp(psi(n_lo));
    if first >= BigRational::one() {
        return Ok(BigRational::zero());
    }
    let mut classes: BTreeMap<BigRational, BigInt> = BTreeMap::new();
    classes.insert(first, big_pow(base, n_lo));

    for n in n_lo + 1..=n_hi {
        let hit = clamp(psi(n));
        if hit >= BigRational::one() {
            return Ok(BigRational::zero());
        }
        let mut next: BTreeMap<BigRational, BigInt> = BTreeMap::new();
        let mut add = |o: BigRational, c: BigInt| {
            if o < BigRational::one() {
                *next.entry(o).or_insert_with(BigInt::zero) += c;
            }
        };
        for (o, c) in &classes {
            // Split the suffix [o, 1) across the b children of the cylinder.
            let t = o * BigRational::from(b_big.clone());
            let j0 = t.floor().to_integer();
            let frac = t - BigRational::from(j0.clone());
            let full = &b_big - BigInt::one() - j0;
            add(frac.max(hit.clone()), c.clone());
            if full > BigInt::zero() {
                add(hit.clone(), c * full);
            }
        }
        classes = next;
        if classes.is_empty() {
            return Ok(BigRational::zero());
        }
    }

    let scale = BigRational::new(BigInt::one(), big_pow(base, n_hi));
    let mut total = BigRational::zero();
    for (o, c) in &classes {
        total += BigRational::from(c.clone()) * (BigRational::one() - o) * &scale;
    }
    Ok(total)
}

/// Exact λ(⋃_{n=n_lo}^{n_hi} Ẽ_n) within [0, 1); the same relative value
/// holds inside every full window aligned above n_lo by translation
/// invariance.
pub fn exact_union_measure(
    base: u64,
    psi: &dyn Fn(u32) -> BigRational,
    n_lo: u32,
    n_hi: u32,
) -> Result<BigRational> {
    Ok(BigRational::one() - exact_union_complement(base, psi, n_lo, n_hi)?)
}

// ---------------------------------------------------------------------------
// Monte-Carlo Lebesgue estimation
// ---------------------------------------------------------------------------

/// Two-sided 99% Hoeffding confidence radius for a [0,1]-bounded mean.
pub fn hoeffding_radius(samples: usize) -> f64 {
    ((2.0 / 0.01f64).ln() / (2.0 * samples as f64)).sqrt()
}

/// A truncated limsup tail ⋃_{n=n_lo}^{n_hi} region_n given by a membership
/// predicate per level.
pub struct TailSpec {
    pub dim: usize,
    pub n_lo: u32,
    pub n_hi: u32,
    member: Box<dyn Fn(u32, &[f64]) -> bool + Sync>,
}

impl TailSpec {
    pub fn new(
        dim: usize,
        n_lo: u32,
        n_hi: u32,
        member: Box<dyn Fn(u32, &[f64]) -> bool + Sync>,
    ) -> Result<Self> {
        if dim == 0 || n_lo == 0 || n_lo > n_hi {
            return Err(Error::Domain("need dim >= 1 and 1 <= n_lo <= n_hi".into()));
        }
        Ok(TailSpec { dim, n_lo, n_hi, member })
    }

    /// The left-anchored one-dimensional tail of an integer base:
    /// x ∈ region_n iff frac(b^n x) < ψ(n).
    pub fn left_anchored_1d(
        base: u64,
        n_lo: u32,
        n_hi: u32,
        psi: Box<dyn Fn(u32) -> f64 + Sync>,
    ) -> Result<Self> {
        if base < 2 {
            return Err(Error::Domain(format!("integer base must be >= 2, got {base}")));
        }
        if (n_hi as f64) * (base as f64).log2() > 52.0 {
            return Err(Error::Resource(format!(
                "b^n exceeds exact f64 range at base {base}, level {n_hi}"
            )));
        }
        let member = move |n: u32, x: &[f64]| {
            let bn = (base as f64).powi(n as i32);
            (x[0] * bn).fract() < psi(n)
        };
        Self::new(1, n_lo, n_hi, Box::new(member))
    }

    /// Tail built from precomputed weighted regions, one per level; either
    /// the inner or the outer sandwich balls define membership.
    pub fn from_weighted_regions(regions: Vec<HitRegion>, use_inner: bool) -> Result<Self> {
        let mut levels: Vec<(u32, Vec<Vec<crate::hitset_geometry::AxisBall>>)> = Vec::new();
        let mut dim = 0usize;
        for r in regions {
            let HitRegion::Weighted { n, axes } = r else {
                return Err(Error::Unsupported("tail regions must be weighted".into()));
            };
            dim = axes.len();
            levels.push((n, axes));
        }
        if levels.is_empty() {
            return Err(Error::Domain("no regions given".into()));
        }
        let n_lo = levels.iter().map(|(n, _)| *n).min().unwrap();
        let n_hi = levels.iter().map(|(n, _)| *n).max().unwrap();
        let member = move |n: u32, x: &[f64]| {
            levels.iter().filter(|(ln, _)| *ln == n).any(|(_, axes)| {
                axes.iter().zip(x).all(|(balls, &xi)| {
                    balls.iter().any(|b| {
                        let r = if use_inner { b.inner_radius } else { b.outer_radius };
                        (xi - b.center).abs() < r
                    })
                })
            })
        };
        Self::new(dim, n_lo, n_hi, Box::new(member))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (self.n_lo..=self.n_hi).any(|n| (self.member)(n, x))
    }
}

/// A Monte-Carlo measure estimate with its finite-sample confidence radius.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MeasureEstimate {
    pub estimate: f64,
    /// Two-sided 99% Hoeffding radius.
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Unbiased estimate of λ^d(⋃ region_n); deterministic given the seed.
pub fn mc_lebesgue(tail: &TailSpec, samples: usize, seed: u64) -> Result<MeasureEstimate> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    let mut x = vec![0.0f64; tail.dim];
    for _ in 0..samples {
        for xi in x.iter_mut() {
            *xi = rng.gen();
        }
        if tail.contains(&x) {
            hits += 1;
        }
    }
    Ok(MeasureEstimate {
        estimate: hits as f64 / samples as f64,
        radius: hoeffding_radius(samples),
        samples,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Hausdorff f-content bounds
// ---------------------------------------------------------------------------

/// Upper bound on H^f_∞ of a weighted region: the better of a single
/// enclosing ball and the best grid cover over the scale grid.
pub fn fcontent_upper(
    region: &HitRegion,
    f: &DimensionFunction,
    tau_grid: &[f64],
) -> Result<f64> {
    let HitRegion::Weighted { axes, .. } = region else {
        return Err(Error::Unsupported("content bounds require a weighted region".into()));
    };
    // Max-norm diameter of the bounding box.
    let mut diam = 0.0f64;
    for balls in axes {
        let lo = balls.iter().map(|b| b.center - b.outer_radius).fold(f64::INFINITY, f64::min);
        let hi = balls.iter().map(|b| b.center + b.outer_radius).fold(f64::NEG_INFINITY, f64::max);
        diam = diam.max(hi - lo);
    }
    let mut best: Option<f64> = None;
    if let Ok(v) = f.eval(diam) {
        best = Some(v);
    }
    match brute_force_fcover(region, f, tau_grid) {
        Ok(out) => {
            best = Some(best.map_or(out.best_f_volume, |b| b.min(out.best_f_volume)));
        }
        Err(Error::Resource(e)) => {
            if best.is_none() {
                return Err(Error::Resource(e));
            }
        }
        Err(e) => return Err(e),
    }
    best.ok_or_else(|| Error::Domain("region diameter outside the f domain".into()))
}

/// Upper bound on H^f_∞ of a rectangle family's support: min over the scale
/// grid of (grid cells touched)·f(cell diameter), plus the single-ball cover.
pub fn fcontent_upper_rects(
    fam: &RectFamily,
    f: &DimensionFunction,
    tau_grid: &[f64],
) -> Result<f64> {
    let mut best: Option<f64> = None;
    let mut diam = 0.0f64;
    for iv in &fam.axes {
        let lo = iv.iter().map(|&(lo, _)| lo).fold(f64::INFINITY, f64::min);
        let hi = iv.iter().map(|&(_, hi)| hi).fold(f64::NEG_INFINITY, f64::max);
        diam = diam.max(hi - lo);
    }
    if let Ok(v) = f.eval(diam) {
        best = Some(v);
    }
    for &tau in tau_grid {
        if !(tau > 0.0) || f.eval(tau).is_err() {
            continue;
        }
        let mut count = 1.0f64;
        for iv in &fam.axes {
            let axis: f64 = iv
                .iter()
                .map(|&(lo, hi)| {
                    let k_lo = (lo / tau).floor();
                    let k_hi = (hi / tau).ceil() - 1.0;
                    k_hi.max(k_lo) - k_lo + 1.0
                })
                .sum();
            count *= axis;
        }
        let v = count * f.eval(tau)?;
        best = Some(best.map_or(v, |b| b.min(v)));
    }
    best.ok_or_else(|| Error::Domain("no grid scale inside the f domain".into()))
}

/// Mass-distribution lower bound: sampled c = sup μ(B)/f(|B|) over balls,
/// giving H^f_∞(support) ≥ 1/c.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MdpReport {
    pub c_measured: f64,
    pub lower_bound: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Samples balls centered in the support across a log range of radii and
/// returns the measured mass-distribution constant and the induced lower
/// bound 1/c for H^f_∞ of the support.
pub fn mdp_lower(
    mu: &MuMeasure,
    f: &DimensionFunction,
    samples: usize,
    seed: u64,
) -> Result<MdpReport> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let fam = mu.family();
    let d = fam.axes.len();
    let min_side = fam
        .axes
        .iter()
        .flat_map(|iv| iv.iter().map(|&(lo, hi)| hi - lo))
        .fold(f64::INFINITY, f64::min);
    // Ball diameter 2r must stay inside the f domain.
    let r_hi = fam.host_radius.min((-1.0f64).exp() / 2.0);
    let r_lo = (min_side / 8.0).min(r_hi / 2.0);
    if !(r_lo > 0.0) {
        return Err(Error::Domain("degenerate support".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = 0.0f64;
    let mut x = vec![0.0f64; d];
    for _ in 0..samples {
        for (xi, iv) in x.iter_mut().zip(&fam.axes) {
            let (lo, hi) = iv[rng.gen_range(0..iv.len())];
            *xi = lo + rng.gen::<f64>() * (hi - lo);
        }
        let u: f64 = rng.gen();
        let r = (r_lo.ln() + u * (r_hi.ln() - r_lo.ln())).exp();
        let ratio = mu.mu_ball(&x, r) / f.eval(2.0 * r)?;
        c = c.max(ratio);
    }
    if !(c > 0.0) {
        return Err(Error::Domain("sampled mass-distribution constant is zero".into()));
    }
    Ok(MdpReport { c_measured: c, lower_bound: 1.0 / c, samples, seed })
}

// ---------------------------------------------------------------------------
// Full-cylinder window densities
// ---------------------------------------------------------------------------

/// λ(window ∩ Ẽ_n) / (|window|·ψ(n)) for the full-cylinder-restricted hit
/// set: equals (#full level-n cylinders inside the window)·β^(−n)/|window|,
/// independent of ψ.
pub fn tilde_en_window_ratio(beta: &Beta, window: &Cylinder, n: u32) -> Result<f64> {
    if n <= window.level() {
        return Err(Error::Domain("hit level must exceed the window level".into()));
    }
    let full = enumerate_full(beta, n, Some((window.left_f64(), window.right_f64())))?;
    let scale = (-(n as f64) * beta.as_f64().ln()).exp();
    Ok(full.len() as f64 * scale / window.length_f64())
}
