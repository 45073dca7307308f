//! Upper-bound machinery: per-scale cover counts for the level-n target
//! regions, a brute-force near-optimal f-cover oracle on grids, and the
//! hyperboloid-neighborhood cover with its measured constants.
//!
//! Balls throughout this module are max-norm balls (axis-aligned squares);
//! |B| denotes the diameter, so a grid cell of side τ is a ball with
//! |B| = τ.

use serde::Serialize;
use std::collections::BTreeSet;

use crate::beta_core::{merge_intervals, BetaVector};
use crate::dimension_functions::{DimensionFunction, R_MAX_LN};
use crate::error::{Error, Result};
use crate::hitset_geometry::HitRegion;
use crate::series_classifier::ApproxFunction;

/// Cap on retained grid cells per scale.
pub const CELL_CAP: u64 = 10_000_000;
/// Cap on materialized balls in a returned cover.
const BALL_CAP: u64 = 2_000_000;

// ---------------------------------------------------------------------------
// Per-scale cover counts
// ---------------------------------------------------------------------------

/// The asymptotic number of τ-balls needed to cover the level-n region, per
/// the per-axis trichotomy: axes in K₁ contribute β_i^(−n)/τ per cylinder,
/// axes in K₂ contribute β_i^(−n)ψ_i(n)/τ, other axes one ball each.
#[derive(Clone, Debug, Serialize)]
pub struct CoverEstimate {
    pub n: u32,
    pub tau: f64,
    pub ln_count: f64,
    pub count: f64,
    pub ln_f_volume: f64,
    pub f_volume: f64,
    pub k1: Vec<usize>,
    pub k2: Vec<usize>,
    pub neither: Vec<usize>,
}

/// count = ∏β_i^n · ∏_{K₁}(β_i^(−n)/τ) · ∏_{K₂}(β_i^(−n)ψ_i(n)/τ), with
/// f_volume = f(τ)·count.
///
/// This deliberately re-derives the index sets and products rather than
/// calling the per-level minimizer, so the two can cross-check each other.
pub fn cover_count(
    betas: &BetaVector,
    psis: &[ApproxFunction],
    f: &DimensionFunction,
    n: u32,
    tau: f64,
) -> Result<CoverEstimate> {
    let d = betas.d();
    if psis.len() != d {
        return Err(Error::Domain(format!("got {} rate functions for d={d}", psis.len())));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Domain(format!("tau must lie in (0, 1), got {tau}")));
    }
    let ln_tau = tau.ln();
    if ln_tau > R_MAX_LN {
        return Err(Error::Domain(format!("tau = {tau} lies outside the f domain (0, e^-1]")));
    }
    let mut ln_count = 0.0;
    let mut k1 = Vec::new();
    let mut k2 = Vec::new();
    let mut neither = Vec::new();
    for i in 0..d {
        let ln_beta = betas.get(i).as_f64().ln();
        let ln_bi = -(n as f64) * ln_beta;
        let ln_bpi = ln_bi + psis[i].ln_eval(n);
        ln_count += (n as f64) * ln_beta;
        if ln_bi <= ln_tau {
            k1.push(i);
            ln_count += ln_bi - ln_tau;
        }
        if ln_bpi >= ln_tau {
            k2.push(i);
            ln_count += ln_bpi - ln_tau;
        }
        if ln_bi > ln_tau && ln_bpi < ln_tau {
            neither.push(i);
        }
    }
    let ln_f_volume = f.eval_ln(ln_tau) + ln_count;
    Ok(CoverEstimate {
        n,
        tau,
        ln_count,
        count: ln_count.exp(),
        ln_f_volume,
        f_volume: ln_f_volume.exp(),
        k1,
        k2,
        neither,
    })
}

// ---------------------------------------------------------------------------
// Ball covers
// ---------------------------------------------------------------------------

/// A max-norm ball: the cube of side 2·radius centered at `center`.
#[derive(Clone, Debug, Serialize)]
pub struct BallNd {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl BallNd {
    pub fn contains(&self, x: &[f64]) -> bool {
        self.center.len() == x.len()
            && self
                .center
                .iter()
                .zip(x)
                .all(|(c, xi)| (c - xi).abs() <= self.radius * (1.0 + 1e-12))
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }
}

/// A finite ball cover with its f-volume Σ f(|B|) (or s-volume Σ|B|^s when
/// built for a monomial exponent).
#[derive(Clone, Debug, Serialize)]
pub struct BallCover {
    pub balls: Vec<BallNd>,
    pub f_volume: f64,
}

impl BallCover {
    pub fn contains(&self, x: &[f64]) -> bool {
        self.balls.iter().any(|b| b.contains(x))
    }

    /// CSV export: one line per ball, center coordinates then radius.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("center;radius\n");
        for b in &self.balls {
            let coords: Vec<String> = b.center.iter().map(|c| c.to_string()).collect();
            out.push_str(&format!("{},{}\n", coords.join(","), b.radius));
        }
        out
    }
}

/// A uniform bucket index over [0,1]^2 for fast membership queries against
/// large covers.
pub struct BallIndex<'a> {
    cover: &'a BallCover,
    res: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> BallIndex<'a> {
    pub fn new(cover: &'a BallCover) -> Result<Self> {
        let res = 256usize;
        let mut buckets = vec![Vec::new(); res * res];
        for (bi, b) in cover.balls.iter().enumerate() {
            if b.center.len() != 2 {
                return Err(Error::Unsupported("ball index supports d = 2 only".into()));
            }
            let lo = |c: f64| (((c - b.radius).max(0.0) * res as f64) as usize).min(res - 1);
            let hi = |c: f64| (((c + b.radius).min(1.0) * res as f64) as usize).min(res - 1);
            for i in lo(b.center[0])..=hi(b.center[0]) {
                for j in lo(b.center[1])..=hi(b.center[1]) {
                    buckets[i * res + j].push(bi as u32);
                }
            }
        }
        Ok(BallIndex { cover, res, buckets })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let gx = ((x[0].clamp(0.0, 1.0) * self.res as f64) as usize).min(self.res - 1);
        let gy = ((x[1].clamp(0.0, 1.0) * self.res as f64) as usize).min(self.res - 1);
        self.buckets[gx * self.res + gy]
            .iter()
            .any(|&bi| self.cover.balls[bi as usize].contains(x))
    }
}

// ---------------------------------------------------------------------------
// Brute-force grid cover oracle
// ---------------------------------------------------------------------------

/// Outcome for one grid scale of the brute-force oracle.
#[derive(Clone, Debug, Serialize)]
pub struct ScaleOutcome {
    pub tau: f64,
    /// Retained-cell count, absent when the scale was skipped.
    pub count: Option<u64>,
    pub f_volume: Option<f64>,
    pub skipped: bool,
}

/// Result of the brute-force oracle: the best single-scale grid cover over
/// the supplied scales, plus per-scale bookkeeping.
#[derive(Clone, Debug, Serialize)]
pub struct FcoverOutcome {
    pub scales: Vec<ScaleOutcome>,
    pub best_tau: f64,
    pub best_f_volume: f64,
    pub best_cover: BallCover,
    /// Per-axis retained cell indices of the best scale (for membership
    /// queries without scanning the ball list).
    pub best_axis_cells: Vec<BTreeSet<i64>>,
}

impl FcoverOutcome {
    /// Whether the best cover's cells contain x (the region is a product
    /// set, so per-axis index membership suffices).
    pub fn covers(&self, x: &[f64]) -> bool {
        x.len() == self.best_axis_cells.len()
            && x.iter().zip(&self.best_axis_cells).all(|(xi, cells)| {
                cells.contains(&((*xi / self.best_tau).floor() as i64))
            })
    }
}

/// Cell indices k with [kτ, (k+1)τ) meeting the half-open interval [a, b).
fn interval_cells(a: f64, b: f64, tau: f64, out: &mut BTreeSet<i64>) {
    if b <= a {
        return;
    }
    let k_lo = (a / tau).floor() as i64;
    let k_hi = ((b / tau).ceil() as i64) - 1;
    for k in k_lo..=k_hi.max(k_lo) {
        out.insert(k);
    }
}

/// For each scale τ in the grid, tiles space by τ-cells, keeps the cells
/// meeting the weighted region (outer balls; the region is a product of
/// per-axis interval unions), and returns the scale of minimal f-volume
/// count·f(τ). Scales whose retained-cell count exceeds the cap are skipped;
/// if every scale is skipped the call is a resource error.
pub fn brute_force_fcover(
    region: &HitRegion,
    f: &DimensionFunction,
    tau_grid: &[f64],
) -> Result<FcoverOutcome> {
    let HitRegion::Weighted { axes, .. } = region else {
        return Err(Error::Unsupported("grid oracle requires a weighted region".into()));
    };
    if axes.len() > 2 {
        return Err(Error::Unsupported("grid oracle supports d <= 2".into()));
    }
    if tau_grid.is_empty() {
        return Err(Error::Domain("empty scale grid".into()));
    }
    // Merged outer intervals per axis, fixed across scales.
    let axis_intervals: Vec<Vec<(f64, f64)>> = axes
        .iter()
        .map(|balls| {
            merge_intervals(
                &balls
                    .iter()
                    .map(|b| (b.center - b.outer_radius, b.center + b.outer_radius))
                    .collect::<Vec<_>>(),
            )
        })
        .collect();

    let mut scales = Vec::new();
    let mut best: Option<(f64, f64, Vec<BTreeSet<i64>>)> = None;
    for &tau in tau_grid {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::Domain(format!("grid scale must lie in (0, 1), got {tau}")));
        }
        if tau.ln() > R_MAX_LN {
            return Err(Error::Domain(format!("grid scale {tau} outside the f domain")));
        }
        // Cheap upper bound on retained cells before enumerating.
        let mut bound: f64 = 1.0;
        for intervals in &axis_intervals {
            let axis_bound: f64 =
                intervals.iter().map(|(a, b)| (b - a) / tau + 2.0).sum();
            bound *= axis_bound;
        }
        if !(bound <= CELL_CAP as f64) {
            scales.push(ScaleOutcome { tau, count: None, f_volume: None, skipped: true });
            continue;
        }
        let mut axis_cells: Vec<BTreeSet<i64>> = Vec::with_capacity(axis_intervals.len());
        for intervals in &axis_intervals {
            let mut cells = BTreeSet::new();
            for &(a, b) in intervals {
                interval_cells(a, b, tau, &mut cells);
            }
            axis_cells.push(cells);
        }
        let count: u64 = axis_cells.iter().map(|c| c.len() as u64).product();
        let f_volume = if count == 0 {
            0.0
        } else {
            (count as f64) * f.eval_ln(tau.ln()).exp()
        };
        scales.push(ScaleOutcome { tau, count: Some(count), f_volume: Some(f_volume), skipped: false });
        let better = match &best {
            None => true,
            Some((_, bv, _)) => f_volume < *bv,
        };
        if better {
            best = Some((tau, f_volume, axis_cells));
        }
    }
    let (best_tau, best_f_volume, best_axis_cells) = best.ok_or_else(|| {
        Error::Resource(format!("all {} grid scales exceeded the {CELL_CAP}-cell cap", tau_grid.len()))
    })?;
    let count: u64 = best_axis_cells.iter().map(|c| c.len() as u64).product();
    if count > BALL_CAP {
        return Err(Error::Resource(format!("best cover has {count} balls, cap {BALL_CAP}")));
    }
    let mut balls = Vec::with_capacity(count as usize);
    match best_axis_cells.len() {
        1 => {
            for &k in &best_axis_cells[0] {
                balls.push(BallNd {
                    center: vec![(k as f64 + 0.5) * best_tau],
                    radius: 0.5 * best_tau,
                });
            }
        }
        2 => {
            for &k in &best_axis_cells[0] {
                for &l in &best_axis_cells[1] {
                    balls.push(BallNd {
                        center: vec![(k as f64 + 0.5) * best_tau, (l as f64 + 0.5) * best_tau],
                        radius: 0.5 * best_tau,
                    });
                }
            }
        }
        _ => unreachable!("d <= 2 checked above"),
    }
    Ok(FcoverOutcome {
        scales,
        best_tau,
        best_f_volume,
        best_cover: BallCover { balls, f_volume: best_f_volume },
        best_axis_cells,
    })
}

// ---------------------------------------------------------------------------
// Hyperboloid-neighborhood cover
// ---------------------------------------------------------------------------

/// Cover of H₂(a, δ) = {x ∈ [0,1]² : ∏|x_i − a_i| < δ} by balls of diameter
/// ≥ δ, with the measured constant C = Σ|B|^s / δ^(s−1).
#[derive(Clone, Debug, Serialize)]
pub struct HyperboloidCover {
    pub cover: BallCover,
    pub s: f64,
    pub delta: f64,
    pub s_volume: f64,
    /// Σ|B|^s / δ^(s−d+1), measured for this run.
    pub measured_c: f64,
}

/// Tiles the axis-aligned rectangle [x0,x1]×[y0,y1] by balls of diameter
/// `diam`. Not clipped to the unit square: the ball counts are then
/// translation invariant in the anchor, and balls are allowed to overhang.
fn tile_rect(balls: &mut Vec<BallNd>, x0: f64, x1: f64, y0: f64, y1: f64, diam: f64) {
    if x1 <= x0 || y1 <= y0 {
        return;
    }
    let nx = ((x1 - x0) / diam).ceil().max(1.0) as u64;
    let ny = ((y1 - y0) / diam).ceil().max(1.0) as u64;
    let r = 0.5 * diam;
    for i in 0..nx {
        for j in 0..ny {
            balls.push(BallNd {
                center: vec![x0 + (i as f64 + 0.5) * diam, y0 + (j as f64 + 0.5) * diam],
                radius: r,
            });
        }
    }
}

/// Dyadic-annulus cover of the hyperboloid neighborhood (d = 2 only):
/// on the annulus |x₁ − a₁| ∈ [2^(−k−1), 2^(−k)) the region satisfies
/// |x₂ − a₂| < δ·2^(k+1), a slab covered by balls of diameter
/// min(max(δ·2^(k+2), δ), 2^(−k)); the central column |x₁ − a₁| < 2^(−K−1)
/// is covered full-height by balls of diameter ≈ 2δ.
pub fn hyperboloid_cover(a: &[f64], delta: f64, s: f64) -> Result<HyperboloidCover> {
    if a.len() != 2 {
        return Err(Error::Unsupported(format!(
            "hyperboloid cover supports d = 2 only, got d = {}",
            a.len()
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    if !(s > 1.0 && s < 2.0) {
        return Err(Error::Domain(format!("s must lie in (d-1, d) = (1, 2), got {s}")));
    }
    if a.iter().any(|&c| !(0.0..=1.0).contains(&c)) {
        return Err(Error::Domain("anchor must lie in [0,1]^2".into()));
    }
    let mut balls = Vec::new();
    if delta >= 1.0 {
        balls.push(BallNd { center: vec![0.5, 0.5], radius: 0.5 });
    } else {
        let kmax = (1.0 / delta).log2().floor() as i32;
        for k in 0..=kmax {
            let strip = 2.0_f64.powi(-k - 1);
            let half_height = (delta * 2.0_f64.powi(k + 1)).min(1.0);
            let diam = (delta * 2.0_f64.powi(k + 2)).max(delta).min(2.0_f64.powi(-k));
            let (y0, y1) = (a[1] - half_height, a[1] + half_height);
            // Right strip [a1 + 2^(-k-1), a1 + 2^(-k)) and its mirror.
            tile_rect(&mut balls, a[0] + strip, a[0] + 2.0 * strip, y0, y1, diam);
            tile_rect(&mut balls, a[0] - 2.0 * strip, a[0] - strip, y0, y1, diam);
        }
        // Core column |x1 - a1| < 2^(-kmax-1), where 2^(-kmax) ∈ (δ, 2δ]:
        // the band is unbounded there, so cover the full relevant height.
        let core = 2.0_f64.powi(-kmax - 1);
        let diam = (2.0 * core).max(delta);
        tile_rect(&mut balls, a[0] - core, a[0] + core, a[1] - 1.0, a[1] + 1.0, diam);
    }
    let s_volume: f64 = balls.iter().map(|b| b.diameter().powf(s)).sum();
    let measured_c = s_volume / delta.powf(s - 1.0);
    Ok(HyperboloidCover {
        cover: BallCover { balls, f_volume: s_volume },
        s,
        delta,
        s_volume,
        measured_c,
    })
}
