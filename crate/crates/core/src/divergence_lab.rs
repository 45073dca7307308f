//! The divergence-side construction made executable.
//!
//! For a configuration (β-vector, rate tuple Ψ, dimension function f) and a
//! level n, this module computes the diagnostic "frame": membership in the
//! index set P where the per-level weight s_n·∏β_i^n is polynomially pinned,
//! the split index m with its block cut k_j, the common rectangle scale ω_n,
//! the auxiliary rate tuple Φ, and the candidate-scale list A′_n.  On top of
//! a frame it builds the separated hyperrectangle family Δ inside a host
//! ball B(y, ω_n), equips it with the uniform-per-rectangle probability
//! measure μ, and evaluates μ-measures of arbitrary balls exactly, so the
//! three-regime ball bound μ(B(x,r)) ≪ f(r)/ω_n^d can be sampled.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::beta_core::{word_cylinder, Beta, BetaVector, DigitSeq};
use crate::dimension_functions::DimensionFunction;
use crate::error::{Error, Result};
use crate::hitset_geometry::{solve_anchor, LipschitzMap};
use crate::series_classifier::{ln_plain_scale, ln_rate_scale, sn_breakdown, ApproxFunction};

/// Absolute tolerance in log space for the lemma-style inequality checks;
/// the compared quantities are sums of a few hundred f64 terms of size ≤ 10³.
const LOG_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Block structure
// ---------------------------------------------------------------------------

/// The partition of a nondecreasing β-vector into maximal constant runs:
/// cut indices 0 = k₀ < k₁ < … < k_s = d with β strictly increasing across
/// cuts and constant within each run.
#[derive(Clone, Debug, Serialize)]
pub struct BlockStructure {
    cuts: Vec<usize>,
    values: Vec<f64>,
}

impl BlockStructure {
    /// The cut indices (k₀, …, k_s).
    pub fn cuts(&self) -> &[usize] {
        &self.cuts
    }

    /// Number of blocks s.
    pub fn num_blocks(&self) -> usize {
        self.values.len()
    }

    /// The common β value of block j (0-based).
    pub fn value(&self, j: usize) -> f64 {
        self.values[j]
    }

    /// The block (0-based) containing the 1-based coordinate index ℓ.
    pub fn block_of(&self, ell: usize) -> usize {
        debug_assert!(ell >= 1 && ell <= *self.cuts.last().unwrap());
        self.cuts.iter().position(|&k| ell <= k).unwrap() - 1
    }

    /// The upper cut k_j of the block containing the 1-based index ℓ.
    pub fn upper_cut(&self, ell: usize) -> usize {
        self.cuts[self.block_of(ell) + 1]
    }

    /// The lower cut k_{j−1} of the block containing the 1-based index ℓ.
    pub fn lower_cut(&self, ell: usize) -> usize {
        self.cuts[self.block_of(ell)]
    }
}

/// Identifies the maximal constant runs of the (sorted) β-vector.  Ties are
/// decided on the f64 images, so coordinates meant to share a block must be
/// built from the same constructor arguments.
pub fn block_structure(betas: &BetaVector) -> BlockStructure {
    let vals = betas.as_f64s();
    let mut cuts = vec![0usize];
    let mut values = Vec::new();
    let mut run_start = 0usize;
    for i in 1..=vals.len() {
        if i == vals.len() || vals[i] != vals[run_start] {
            cuts.push(i);
            values.push(vals[run_start]);
            run_start = i;
        }
    }
    BlockStructure { cuts, values }
}

/// Sorts the rate functions inside each β-block into eventually
/// nonincreasing order (largest eventual rate first), returning the sorted
/// tuple and the permutation applied (entry i holds the original index of
/// the function now in slot i).
pub fn sort_psis_within_blocks(
    blocks: &BlockStructure,
    psis: &[ApproxFunction],
) -> (Vec<ApproxFunction>, Vec<usize>) {
    let mut perm: Vec<usize> = (0..psis.len()).collect();
    for w in blocks.cuts().windows(2) {
        let (lo, hi) = (w[0], w[1]);
        perm[lo..hi].sort_by(|&a, &b| eventual_cmp(&psis[b], &psis[a]));
    }
    let sorted = perm.iter().map(|&i| psis[i].clone()).collect();
    (sorted, perm)
}

/// Compares two rate functions by their eventual pointwise order: the ratio
/// ψ_a/ψ_b is exp of a quadratic in n plus a log term, so the sign of the
/// leading nonzero coefficient decides.
fn eventual_cmp(a: &ApproxFunction, b: &ApproxFunction) -> std::cmp::Ordering {
    let ka = (a.a2(), a.a1(), a.q(), a.a0());
    let kb = (b.a2(), b.a1(), b.q(), b.a0());
    ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
}

// ---------------------------------------------------------------------------
// Membership in P
// ---------------------------------------------------------------------------

/// Diagnostics for membership of one level n in the index set P: the rate
/// tuple must be nonincreasing within each block at n, and the weight
/// s_n·∏β_i^n must lie in [n^(−2), 1].
#[derive(Clone, Debug, Serialize)]
pub struct InPReport {
    pub n: u32,
    /// ψ values nonincreasing within every block at this n.
    pub sorted_ok: bool,
    /// ln of s_n·∏β_i^n.
    pub ln_weight: f64,
    /// n^(−2) ≤ weight.
    pub lower_ok: bool,
    /// weight ≤ 1.
    pub upper_ok: bool,
    pub member: bool,
}

/// Decides n ∈ P with diagnostics.  The rate tuple is expected in
/// within-block sorted order (apply [`sort_psis_within_blocks`] first); the
/// pointwise order at this particular n is what gets checked.
pub fn in_p(
    n: u32,
    betas: &BetaVector,
    psis: &[ApproxFunction],
    f: &DimensionFunction,
) -> Result<InPReport> {
    let blocks = block_structure(betas);
    let mut sorted_ok = true;
    for w in blocks.cuts().windows(2) {
        for i in w[0]..w[1].saturating_sub(1) {
            if psis[i].ln_eval(n) + 1e-12 < psis[i + 1].ln_eval(n) {
                sorted_ok = false;
            }
        }
    }
    let sn = sn_breakdown(betas, psis, f, n)?;
    let ln_weight = sn.ln_s_n + (n as f64) * betas.ln_product();
    let lower_ok = ln_weight >= -2.0 * (n as f64).ln() - LOG_TOL;
    let upper_ok = ln_weight <= LOG_TOL;
    Ok(InPReport {
        n,
        sorted_ok,
        ln_weight,
        lower_ok,
        upper_ok,
        member: sorted_ok && lower_ok && upper_ok,
    })
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

/// Results of the numerical lemma checks attached to a frame.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LemmaChecks {
    /// The root chain (s_n·∏_{i≤ℓ}ψ_i^(−1)·∏β_i^n)^(1/(k_j−ℓ)) is
    /// nonincreasing in ℓ from k_{j−1} up to m.
    pub increase_ok: bool,
    /// ω_n ≤ β_ℓ^(−n)ψ_ℓ(n) for ℓ ≤ m.
    pub low_ok: bool,
    /// β_ℓ^(−n)ψ_ℓ(n) ≤ ω_n ≤ β_ℓ^(−n) for m < ℓ ≤ k_j.
    pub mid_ok: bool,
    /// ω_n ≥ β_ℓ^(−n) for ℓ > k_j.
    pub high_ok: bool,
}

impl LemmaChecks {
    pub fn all(&self) -> bool {
        self.increase_ok && self.low_ok && self.mid_ok && self.high_ok
    }
}

/// Everything the divergence construction needs at one level n.
#[derive(Clone, Debug, Serialize)]
pub struct DivergenceFrame {
    pub n: u32,
    pub in_p: InPReport,
    /// The split index m ∈ [0, d−1]: smallest candidate whose normalized
    /// root dominates ψ_{m+1}(n).
    pub m: usize,
    /// Upper cut of the block containing coordinate m+1.
    pub k_j: usize,
    pub ln_s_n: f64,
    pub ln_omega: f64,
    /// The common rectangle scale ω_n.
    pub omega: f64,
    /// The auxiliary rate tuple Φ(n); all zero when n ∉ P.
    pub phi: Vec<f64>,
    /// Candidate scales A′_n, ascending: plain scales of the coordinates
    /// past k_j and rate scales of the coordinates past m.
    pub a_prime: Vec<f64>,
    pub checks: LemmaChecks,
    /// Relative error of the closed-form identity
    /// (∏_{i>k_j} ω_n β_i^n)·ω_n^m·s_n·∏_{i≤m} β_i^n ψ_i(n)^(−1) = ω_n^d.
    pub identity_rel_err: f64,
}

impl DivergenceFrame {
    pub fn tau_min(&self) -> f64 {
        self.a_prime[0]
    }

    pub fn tau_max(&self) -> f64 {
        *self.a_prime.last().unwrap()
    }
}

/// Computes the frame at level n.  The rate tuple must already be
/// within-block sorted; n ∉ P still yields a frame (diagnostics mode), with
/// `in_p.member` false and Φ ≡ 0.
pub fn frame(
    n: u32,
    betas: &BetaVector,
    psis: &[ApproxFunction],
    f: &DimensionFunction,
) -> Result<DivergenceFrame> {
    let d = betas.d();
    let blocks = block_structure(betas);
    let report = in_p(n, betas, psis, f)?;
    let sn = sn_breakdown(betas, psis, f, n)?;
    let ln_s_n = sn.ln_s_n;
    let nf = n as f64;
    let ln_weight_all = ln_s_n + nf * betas.ln_product();

    // ln of (s_n · ∏_{i≤ℓ} ψ_i(n)^(−1) · ∏β_i^n)^(1/(k−ℓ)) for a block cut k.
    let ln_psi: Vec<f64> = psis.iter().map(|p| p.ln_eval(n)).collect();
    let root = |ell: usize, k: usize| -> f64 {
        let sum: f64 = ln_psi[..ell].iter().sum();
        (ln_weight_all - sum) / ((k - ell) as f64)
    };

    // m is the smallest index in [0, d−1] whose root dominates ψ_{m+1}(n).
    let mut found: Option<(usize, usize)> = None;
    for m in 0..d {
        let k_j = blocks.upper_cut(m + 1);
        if root(m, k_j) >= ln_psi[m] - LOG_TOL {
            found = Some((m, k_j));
            break;
        }
    }
    let (m, k_j) = found.ok_or_else(|| {
        Error::Domain(format!("no admissible split index m at n={n}; level too small"))
    })?;

    let ln_omega = ln_plain_scale(betas.get(m), n) + root(m, k_j);
    let omega = ln_omega.exp();

    // Φ: ψ_i/4 below the split, β_{m+1}^n ω_n/4 inside the block, 1/4 above.
    let phi: Vec<f64> = if report.member {
        (0..d)
            .map(|i| {
                if i < m {
                    psis[i].eval(n) / 4.0
                } else if i < k_j {
                    (nf * betas.get(m).as_f64().ln() + ln_omega).exp() / 4.0
                } else {
                    0.25
                }
            })
            .collect()
    } else {
        vec![0.0; d]
    };

    // A′_n ascending.
    let mut a_prime: Vec<f64> = (k_j..d)
        .map(|i| ln_plain_scale(betas.get(i), n).exp())
        .chain((m..d).map(|i| ln_rate_scale(betas.get(i), &psis[i], n).exp()))
        .collect();
    a_prime.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Root chain monotone from k_{j−1} to m.
    let k_prev = blocks.lower_cut(m + 1);
    let mut increase_ok = true;
    for ell in k_prev..m {
        if root(ell + 1, k_j) > root(ell, k_j) + LOG_TOL {
            increase_ok = false;
        }
    }

    // The three ω_n sandwich bounds, in log space.
    let mut low_ok = true;
    let mut mid_ok = true;
    let mut high_ok = true;
    for i in 0..d {
        let ln_b = ln_plain_scale(betas.get(i), n);
        let ln_bp = ln_rate_scale(betas.get(i), &psis[i], n);
        if i < m {
            low_ok &= ln_omega <= ln_bp + LOG_TOL;
        } else if i < k_j {
            mid_ok &= ln_bp <= ln_omega + LOG_TOL && ln_omega <= ln_b + LOG_TOL;
        } else {
            high_ok &= ln_omega >= ln_b - LOG_TOL;
        }
    }

    // Closed-form identity relating the rectangle count, volume, and ω_n^d.
    let mut ln_lhs = ln_s_n + (m as f64) * ln_omega;
    for i in k_j..d {
        ln_lhs += ln_omega + nf * betas.get(i).as_f64().ln();
    }
    for i in 0..m {
        ln_lhs += nf * betas.get(i).as_f64().ln() - ln_psi[i];
    }
    let ln_rhs = (d as f64) * ln_omega;
    let identity_rel_err = (ln_lhs - ln_rhs).abs() / ln_rhs.abs().max(1.0);

    Ok(DivergenceFrame {
        n,
        in_p: report,
        m,
        k_j,
        ln_s_n,
        ln_omega,
        omega,
        phi,
        a_prime,
        checks: LemmaChecks { increase_ok, low_ok, mid_ok, high_ok },
        identity_rel_err,
    })
}

/// Scan result of [`lemma_threshold`].
#[derive(Clone, Debug, Serialize)]
pub struct ThresholdReport {
    /// Smallest n₀ such that every P-member in [n₀, n_max] passes all frame
    /// checks; `None` when no member passes.
    pub threshold: Option<u32>,
    /// Number of P-members in the scanned range.
    pub members: usize,
    /// Largest P-member that failed a check, if any.
    pub last_failure: Option<u32>,
}

/// The lemma bounds hold only for sufficiently large n ∈ P; this measures
/// the empirical threshold for a configuration by scanning n ≤ n_max.
pub fn lemma_threshold(
    betas: &BetaVector,
    psis: &[ApproxFunction],
    f: &DimensionFunction,
    n_max: u32,
) -> Result<ThresholdReport> {
    let mut members = 0usize;
    let mut last_failure: Option<u32> = None;
    let mut first_member: Option<u32> = None;
    for n in 1..=n_max {
        let fr = match frame(n, betas, psis, f) {
            Ok(fr) => fr,
            // Levels below f's domain (or below the split-index existence
            // threshold) are not part of the construction.
            Err(Error::Domain(_)) => continue,
            Err(e) => return Err(e),
        };
        if !fr.in_p.member {
            continue;
        }
        members += 1;
        first_member.get_or_insert(n);
        if !fr.checks.all() || fr.identity_rel_err > 1e-9 {
            last_failure = Some(n);
        }
    }
    let threshold = match (first_member, last_failure) {
        (None, _) => None,
        (Some(first), None) => Some(first),
        (Some(_), Some(fail)) if fail < n_max => Some(fail + 1),
        _ => None,
    };
    Ok(ThresholdReport { threshold, members, last_failure })
}

// ---------------------------------------------------------------------------
// Rectangle families and the measure μ
// ---------------------------------------------------------------------------

/// The separated hyperrectangle family Δ inside a host ball B(y, ω_n).
///
/// Δ is a product family: one interval list per axis, the rectangles being
/// all per-axis combinations.  Axes up to m carry one interval of length
/// ω_n; axes in (m, k_j] one interval of length β_i^(−n)ψ_i(n); axes past
/// k_j every anchor interval of that length inside the host ball, with
/// centers separated by β_i^(−n).
#[derive(Clone, Debug, Serialize)]
pub struct RectFamily {
    pub n: u32,
    pub m: usize,
    pub k_j: usize,
    pub host_center: Vec<f64>,
    pub host_radius: f64,
    /// Per-axis closed intervals (lo, hi), disjoint and ascending.
    pub axes: Vec<Vec<(f64, f64)>>,
    /// ln of the target count ∏_{i>k_j} ω_n β_i^n.
    pub expected_ln_count: f64,
}

impl RectFamily {
    /// Number of rectangles (product of per-axis interval counts).
    pub fn count(&self) -> usize {
        self.axes.iter().map(|a| a.len()).product()
    }

    /// Smallest center-to-center distance between consecutive intervals on
    /// an axis; `None` for single-interval axes.
    pub fn min_separation(&self, axis: usize) -> Option<f64> {
        let iv = &self.axes[axis];
        iv.windows(2)
            .map(|w| (w[1].0 + w[1].1) / 2.0 - (w[0].0 + w[0].1) / 2.0)
            .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))))
    }

    /// Whether x lies in some rectangle of the family.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.axes
            .iter()
            .zip(x)
            .all(|(iv, &xi)| iv.iter().any(|&(lo, hi)| lo <= xi && xi <= hi))
    }
}

/// Anchor points of all full level-n cylinders whose left endpoint falls in
/// [lo, hi], for an integer base.  Walks digit words directly instead of
/// enumerating the full level.
fn anchors_in_window(
    beta: &Beta,
    n: u32,
    h: &LipschitzMap,
    lo: f64,
    hi: f64,
) -> Result<Vec<f64>> {
    let b = beta
        .int_value()
        .ok_or_else(|| Error::Unsupported("rectangle families require integer bases".into()))?;
    if (n as f64) * (b as f64).log2() > 52.0 {
        return Err(Error::Resource(format!("β^n overflows at base {b}, level {n}")));
    }
    let bn = (b as f64).powi(n as i32);
    let k_lo = (lo * bn).floor().max(0.0) as u64;
    let k_hi = ((hi * bn).ceil() as u64).min(bn as u64 - 1);
    if k_hi.saturating_sub(k_lo) > 100_000 {
        return Err(Error::Resource(format!(
            "{} anchor cylinders requested in one window",
            k_hi - k_lo + 1
        )));
    }
    let mut out = Vec::new();
    for k in k_lo..=k_hi {
        let mut digits = vec![0u32; n as usize];
        let mut rest = k;
        for slot in digits.iter_mut().rev() {
            *slot = (rest % b) as u32;
            rest /= b;
        }
        let cyl = word_cylinder(beta, &DigitSeq::new(digits))?
            .ok_or_else(|| Error::Domain("integer-base word unexpectedly inadmissible".into()))?;
        let z = solve_anchor(beta, &cyl, h)?.z;
        if z >= lo - 1e-12 && z <= hi + 1e-12 {
            out.push(z);
        }
    }
    Ok(out)
}

/// Builds the family Δ around the host ball B(y, ω_n).
///
/// `y` must sit within half a rate-scale of an anchor on the axes up to m
/// and (up to snapping) on an anchor beyond m.  When ω_n ≥ 1 the whole unit
/// cube degenerates to a single clipped rectangle.
pub fn build_rect_family(
    y: &[f64],
    fr: &DivergenceFrame,
    betas: &BetaVector,
    psis: &[ApproxFunction],
    maps: &[LipschitzMap],
) -> Result<RectFamily> {
    let d = betas.d();
    if y.len() != d || psis.len() != d || maps.len() != d {
        return Err(Error::Domain("y, Ψ, and map tuples must all have length d".into()));
    }
    if !betas.all_integer() {
        return Err(Error::Unsupported(
            "the divergence construction needs the full shift: integer bases only".into(),
        ));
    }
    let n = fr.n;
    let omega = fr.omega;
    let expected_ln_count: f64 = (fr.k_j..d)
        .map(|i| fr.ln_omega + (n as f64) * betas.get(i).as_f64().ln())
        .sum();

    if omega >= 1.0 {
        return Ok(RectFamily {
            n,
            m: fr.m,
            k_j: fr.k_j,
            host_center: y.to_vec(),
            host_radius: omega,
            axes: vec![vec![(0.0, 1.0)]; d],
            expected_ln_count,
        });
    }

    let mut axes = Vec::with_capacity(d);
    for i in 0..d {
        let beta = betas.get(i);
        let half = ln_rate_scale(beta, &psis[i], n).exp() / 2.0;
        let bn_inv = ln_plain_scale(beta, n).exp();
        let (wlo, whi) = (
            (y[i] - omega - 2.0 * bn_inv).max(0.0),
            (y[i] + omega + 2.0 * bn_inv).min(1.0),
        );
        let anchors = anchors_in_window(beta, n, &maps[i], wlo, whi)?;
        if anchors.is_empty() {
            return Err(Error::Domain(format!("no anchors near y on axis {}", i + 1)));
        }
        let nearest = anchors
            .iter()
            .cloned()
            .min_by(|a, b| (a - y[i]).abs().partial_cmp(&(b - y[i]).abs()).unwrap())
            .unwrap();
        let clip = |lo: f64, hi: f64| -> (f64, f64) {
            (lo.max(0.0).max(y[i] - omega), hi.min(1.0).min(y[i] + omega))
        };
        let intervals: Vec<(f64, f64)> = if i < fr.m {
            // One interval of length ω_n inside B(y_i, ω_n) ∩ B(z, half).
            if (nearest - y[i]).abs() > half + 1e-12 {
                return Err(Error::Precondition(format!(
                    "y must lie within the inner ball of an anchor on axis {}",
                    i + 1
                )));
            }
            let lo = (y[i] - omega).max(nearest - half);
            let hi = (y[i] + omega).min(nearest + half);
            let c = (lo + hi) / 2.0;
            let w = (hi - lo).min(omega) / 2.0;
            vec![clip(c - w, c + w)]
        } else if i < fr.k_j {
            // One full rate-scale interval around the snapped anchor.
            vec![clip(nearest - half, nearest + half)]
        } else {
            // Every anchor whose rate-scale interval fits inside the host.
            anchors
                .iter()
                .filter(|&&z| z - half >= y[i] - omega - 1e-15 && z + half <= y[i] + omega + 1e-15)
                .map(|&z| clip(z - half, z + half))
                .collect()
        };
        if intervals.is_empty() {
            return Err(Error::Domain(format!(
                "no anchor interval fits inside the host ball on axis {}",
                i + 1
            )));
        }
        axes.push(intervals);
    }
    Ok(RectFamily {
        n,
        m: fr.m,
        k_j: fr.k_j,
        host_center: y.to_vec(),
        host_radius: omega,
        axes,
        expected_ln_count,
    })
}

/// Axis-aligned grid of candidate host-ball centers: spacing 2ω_n across the
/// inner balls on the axes up to m, pinned to the anchors beyond m.
pub fn y_grid(
    z: &[f64],
    fr: &DivergenceFrame,
    betas: &BetaVector,
    psis: &[ApproxFunction],
    cap: usize,
) -> Result<Vec<Vec<f64>>> {
    let d = betas.d();
    if z.len() != d || psis.len() != d {
        return Err(Error::Domain("z and Ψ must have length d".into()));
    }
    let mut per_axis: Vec<Vec<f64>> = Vec::with_capacity(d);
    for i in 0..d {
        if i < fr.m {
            let half = ln_rate_scale(betas.get(i), &psis[i], fr.n).exp() / 2.0;
            let mut pts = Vec::new();
            let mut y = z[i] - half + fr.omega;
            while y <= z[i] + half {
                pts.push(y);
                y += 2.0 * fr.omega;
            }
            if pts.is_empty() {
                pts.push(z[i]);
            }
            per_axis.push(pts);
        } else {
            per_axis.push(vec![z[i]]);
        }
    }
    let total: usize = per_axis.iter().map(|p| p.len()).product();
    if total > cap {
        return Err(Error::Resource(format!("y-grid of {total} points exceeds cap {cap}")));
    }
    let mut out = vec![Vec::new()];
    for pts in &per_axis {
        out = out
            .into_iter()
            .flat_map(|pre| {
                pts.iter().map(move |&p| {
                    let mut v = pre.clone();
                    v.push(p);
                    v
                })
            })
            .collect();
    }
    Ok(out)
}

/// The probability measure μ: uniform mass 1/#Δ per rectangle with uniform
/// density inside each.
#[derive(Clone, Debug)]
pub struct MuMeasure {
    family: RectFamily,
}

impl MuMeasure {
    pub fn new(family: RectFamily) -> Result<Self> {
        for iv in &family.axes {
            if iv.iter().any(|&(lo, hi)| !(hi > lo)) {
                return Err(Error::Domain("degenerate interval in rectangle family".into()));
            }
        }
        Ok(MuMeasure { family })
    }

    pub fn family(&self) -> &RectFamily {
        &self.family
    }

    /// Exact μ(B(center, r)): because Δ is a product family, the sum over
    /// rectangles of the per-axis overlap products factorizes into a product
    /// over axes of averaged interval overlaps.
    pub fn mu_ball(&self, center: &[f64], r: f64) -> f64 {
        debug_assert_eq!(center.len(), self.family.axes.len());
        let mut total = 1.0;
        for (iv, &c) in self.family.axes.iter().zip(center) {
            let mut axis_sum = 0.0;
            for &(lo, hi) in iv {
                let overlap = (hi.min(c + r) - lo.max(c - r)).max(0.0);
                axis_sum += overlap / (hi - lo);
            }
            total *= axis_sum / iv.len() as f64;
        }
        total
    }
}

// ---------------------------------------------------------------------------
// Ball-bound sampling
// ---------------------------------------------------------------------------

/// One radius regime of the ball bound: below τ_min, between consecutive
/// A′_n scales, or between τ_max and ω_n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RadiusRegime {
    BelowAll,
    Ladder,
    AboveAll,
}

/// Sampling report for the normalized ball bound μ(B(x,r))·ω_n^d/f(r).
#[derive(Clone, Debug, Serialize)]
pub struct BallBoundReport {
    pub n: u32,
    pub samples: usize,
    pub sup_ratio: f64,
    /// (samples, sup ratio) per radius regime.
    pub per_regime: [(usize, f64); 3],
}

/// Samples `samples` balls with centers inside rectangles of the family and
/// radii stratified across the three regimes, recording the supremum of
/// μ(B)·ω_n^d/f(r).  Deterministic given the seed.
pub fn ball_bound_scan(
    fr: &DivergenceFrame,
    mu: &MuMeasure,
    f: &DimensionFunction,
    samples: usize,
    seed: u64,
) -> Result<BallBoundReport> {
    let d = mu.family().axes.len();
    let omega = fr.omega;
    let tau_min = fr.tau_min();
    let tau_max = fr.tau_max();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let regimes = [
        (tau_min / 8.0, tau_min, RadiusRegime::BelowAll),
        (tau_min, tau_max, RadiusRegime::Ladder),
        (tau_max, 0.999 * omega, RadiusRegime::AboveAll),
    ];
    let mut sup_ratio = 0.0f64;
    let mut per_regime = [(0usize, 0.0f64); 3];
    let mut produced = 0usize;
    let mut slot = 0usize;
    while produced < samples {
        let (lo, hi, _) = regimes[slot % 3];
        slot += 1;
        if !(hi > lo) || !(lo > 0.0) {
            continue;
        }
        let u: f64 = rng.gen();
        let r = (lo.ln() + u * (hi.ln() - lo.ln())).exp();
        let mut center = Vec::with_capacity(d);
        for iv in &mu.family().axes {
            let (ilo, ihi) = iv[rng.gen_range(0..iv.len())];
            center.push(ilo + rng.gen::<f64>() * (ihi - ilo));
        }
        let ratio = mu.mu_ball(&center, r) * omega.powi(d as i32) / f.eval(r)?;
        let idx = (slot - 1) % 3;
        per_regime[idx].0 += 1;
        per_regime[idx].1 = per_regime[idx].1.max(ratio);
        sup_ratio = sup_ratio.max(ratio);
        produced += 1;
    }
    if per_regime.iter().filter(|(c, _)| *c > 0).count() < 2 {
        return Err(Error::Domain("radius regimes degenerate for this frame".into()));
    }
    Ok(BallBoundReport { n: fr.n, samples: produced, sup_ratio, per_regime })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta_core::Beta;

    const PREC: usize = 128;

    fn bvec(vals: &[u64]) -> BetaVector {
        BetaVector::new(vals.iter().map(|&b| Beta::from_u64(b, PREC).unwrap()).collect()).unwrap()
    }

    /// d=1 exact configuration: β=2, ψ=2^(−n), f=r^(1/2); weight ≡ 1.
    fn config_d1() -> (BetaVector, Vec<ApproxFunction>, DimensionFunction) {
        (
            bvec(&[2]),
            vec![ApproxFunction::exp_rate(std::f64::consts::LN_2).unwrap()],
            DimensionFunction::monomial(0.5).unwrap(),
        )
    }

    /// d=2 distinct-base configuration with polynomially pinned weight:
    /// β=(2,3), ψ=(2^(−n), 3^(−n)), f=r^s(−ln r)^(−1) with s tuned so the
    /// weight is ≍ 1/n.
    fn config_d2() -> (BetaVector, Vec<ApproxFunction>, DimensionFunction) {
        let s = (6.0f64.ln() + 2.0 * 1.5f64.ln()) / (2.0 * 3.0f64.ln());
        (
            bvec(&[2, 3]),
            vec![
                ApproxFunction::exp_rate(2.0f64.ln()).unwrap(),
                ApproxFunction::exp_rate(3.0f64.ln()).unwrap(),
            ],
            DimensionFunction::new(s, 1.0, 1.0).unwrap(),
        )
    }

    /// d=3 with a tied block: β=(2,3,3), ψ=(2^(−n), 3^(−n), 3^(−n)).
    fn config_d3() -> (BetaVector, Vec<ApproxFunction>, DimensionFunction) {
        let s = (18.0f64.ln() + 2.0 * 1.5f64.ln()) / (2.0 * 3.0f64.ln());
        (
            bvec(&[2, 3, 3]),
            vec![
                ApproxFunction::exp_rate(2.0f64.ln()).unwrap(),
                ApproxFunction::exp_rate(3.0f64.ln()).unwrap(),
                ApproxFunction::exp_rate(3.0f64.ln()).unwrap(),
            ],
            DimensionFunction::new(s, 1.0, 1.0).unwrap(),
        )
    }

    /// Tied pair with a nonzero split index: β=(2,2), ψ=(n^(−0.1), 2^(−n)),
    /// f=r^1.5(−ln r)^(−0.2) forces m=1.
    fn config_m1() -> (BetaVector, Vec<ApproxFunction>, DimensionFunction) {
        (
            bvec(&[2, 2]),
            vec![
                ApproxFunction::power(-0.1).unwrap(),
                ApproxFunction::exp_rate(2.0f64.ln()).unwrap(),
            ],
            DimensionFunction::new(1.5, 0.2, 1.0).unwrap(),
        )
    }

    #[test]
    fn block_structure_examples() {
        assert_eq!(block_structure(&bvec(&[2, 2, 3])).cuts(), &[0, 2, 3]);
        assert_eq!(block_structure(&bvec(&[2, 3, 5])).cuts(), &[0, 1, 2, 3]);
        assert_eq!(block_structure(&bvec(&[4, 4, 4, 4])).cuts(), &[0, 4]);
        let b = block_structure(&bvec(&[2, 2, 3]));
        assert_eq!(b.block_of(1), 0);
        assert_eq!(b.block_of(2), 0);
        assert_eq!(b.block_of(3), 1);
        assert_eq!(b.upper_cut(1), 2);
        assert_eq!(b.lower_cut(3), 2);
    }

    #[test]
    fn within_block_sort_reorders() {
        let betas = bvec(&[2, 2]);
        let psis = vec![
            ApproxFunction::exp_rate(2.0f64.ln()).unwrap(),
            ApproxFunction::power(-0.1).unwrap(),
        ];
        let blocks = block_structure(&betas);
        let (sorted, perm) = sort_psis_within_blocks(&blocks, &psis);
        assert_eq!(perm, vec![1, 0]);
        assert!(sorted[0].ln_eval(10) >= sorted[1].ln_eval(10));
    }

    #[test]
    fn in_p_d1_exact_weight() {
        let (betas, psis, f) = config_d1();
        for n in 2..=60 {
            let rep = in_p(n, &betas, &psis, &f).unwrap();
            assert!(rep.member, "n={n} should be in P");
            assert!(rep.ln_weight.abs() <= 1e-12, "weight drifted at n={n}: {}", rep.ln_weight);
        }
    }

    #[test]
    fn in_p_rejects_growing_weight() {
        let (betas, psis, _) = config_d1();
        let f = DimensionFunction::monomial(0.4).unwrap();
        for n in 2..=40 {
            let rep = in_p(n, &betas, &psis, &f).unwrap();
            assert!(!rep.member, "n={n} should fail the upper weight gate");
            assert!(rep.ln_weight > 0.0);
        }
    }

    #[test]
    fn frame_d1_omega_equals_sn() {
        let (betas, psis, f) = config_d1();
        for n in 2..=40 {
            let fr = frame(n, &betas, &psis, &f).unwrap();
            assert_eq!(fr.m, 0);
            assert_eq!(fr.k_j, 1);
            assert!((fr.ln_omega - fr.ln_s_n).abs() <= 1e-12);
            assert!(fr.checks.all(), "lemma checks failed at n={n}: {:?}", fr.checks);
            assert!(fr.identity_rel_err <= 1e-9);
        }
    }

    #[test]
    fn frame_d2_distinct_bases() {
        let (betas, psis, f) = config_d2();
        let fr = frame(8, &betas, &psis, &f).unwrap();
        assert!(fr.in_p.member);
        assert_eq!(fr.m, 0);
        assert_eq!(fr.k_j, 1);
        assert!(fr.checks.all(), "checks: {:?}", fr.checks);
        assert!(fr.identity_rel_err <= 1e-9);
        // ω_n = 2^(−n)·(weight) with weight ≈ 1/(2n ln3).
        let expect = 2f64.powi(-8) / (16.0 * 3f64.ln());
        assert!((fr.omega / expect - 1.0).abs() < 1e-9);
    }

    #[test]
    fn thresholds_for_acceptance_configs() {
        let (b1, p1, f1) = config_d1();
        let t1 = lemma_threshold(&b1, &p1, &f1, 200).unwrap();
        assert_eq!(t1.threshold, Some(2));
        assert!(t1.members >= 190);

        let (b2, p2, f2) = config_d2();
        let t2 = lemma_threshold(&b2, &p2, &f2, 200).unwrap();
        assert_eq!(t2.threshold, Some(7));

        let (b3, p3, f3) = config_d3();
        let t3 = lemma_threshold(&b3, &p3, &f3, 200).unwrap();
        assert_eq!(t3.threshold, Some(7));
        // The tied block puts both top coordinates past k_j.
        let fr = frame(10, &b3, &p3, &f3).unwrap();
        assert_eq!((fr.m, fr.k_j), (0, 1));
    }

    #[test]
    fn frame_with_nonzero_split_index() {
        let (betas, psis, f) = config_m1();
        for n in [5u32, 10, 50, 150] {
            let fr = frame(n, &betas, &psis, &f).unwrap();
            assert!(fr.in_p.member, "n={n} not in P");
            assert_eq!(fr.m, 1, "wrong split at n={n}");
            assert_eq!(fr.k_j, 2);
            assert!(fr.checks.all(), "checks at n={n}: {:?}", fr.checks);
            assert!(fr.identity_rel_err <= 1e-9);
        }
    }

    #[test]
    fn phi_product_tracks_weight() {
        for (betas, psis, f) in [config_d2(), config_d3(), config_m1()] {
            let d = betas.d();
            for n in [8u32, 12, 20] {
                let fr = frame(n, &betas, &psis, &f).unwrap();
                if !fr.in_p.member {
                    continue;
                }
                let ln_phi: f64 = fr.phi.iter().map(|p| p.ln()).sum();
                let expect = fr.in_p.ln_weight - (d as f64) * 4.0f64.ln();
                assert!(
                    (ln_phi - expect).abs() <= 1e-9,
                    "Φ product off at n={n}: {ln_phi} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn rect_family_d1_single_interval() {
        let (betas, psis, f) = config_d1();
        let fr = frame(6, &betas, &psis, &f).unwrap();
        assert!((fr.omega - 2f64.powi(-6)).abs() < 1e-15);
        let maps = vec![LipschitzMap::constant(0.0).unwrap()];
        // Anchor of the word for k=21: z = 21/64.
        let y = vec![21.0 / 64.0];
        let fam = build_rect_family(&y, &fr, &betas, &psis, &maps).unwrap();
        assert_eq!(fam.count(), 1);
        let (lo, hi) = fam.axes[0][0];
        // Side length is the rate scale 2^(−6)·ψ(6) = 2^(−12).
        assert!((hi - lo - 2f64.powi(-12)).abs() < 1e-15);
        assert!(lo >= y[0] - fr.omega && hi <= y[0] + fr.omega);
    }

    #[test]
    fn rect_family_d2_counts_and_separation() {
        let (betas, psis, f) = config_d2();
        let fr = frame(8, &betas, &psis, &f).unwrap();
        let maps = vec![LipschitzMap::constant(0.0).unwrap(); 2];
        let y = vec![128.0 / 256.0, 3280.0 / 6561.0];
        let fam = build_rect_family(&y, &fr, &betas, &psis, &maps).unwrap();
        assert_eq!(fam.axes[0].len(), 1);
        let count = fam.count() as f64;
        let target = fam.expected_ln_count.exp();
        assert!(
            count <= 4.0 * target && count >= target / 4.0,
            "count {count} vs target {target}"
        );
        let sep = fam.min_separation(1).unwrap();
        assert!(sep >= 3f64.powi(-8) * 0.999, "separation {sep}");
        // Every rectangle sits inside the host ball.
        for &(lo, hi) in &fam.axes[1] {
            assert!(lo >= y[1] - fr.omega - 1e-12 && hi <= y[1] + fr.omega + 1e-12);
        }
    }

    #[test]
    fn mu_product_matches_direct_sum() {
        use rand::Rng;
        use rand::SeedableRng;
        let (betas, psis, f) = config_d2();
        let fr = frame(9, &betas, &psis, &f).unwrap();
        let maps = vec![LipschitzMap::constant(0.0).unwrap(); 2];
        let y = vec![256.0 / 512.0, 9841.0 / 19683.0];
        let fam = build_rect_family(&y, &fr, &betas, &psis, &maps).unwrap();
        let mu = MuMeasure::new(fam.clone()).unwrap();
        let total = fam.count() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let c = [
                y[0] + (rng.gen::<f64>() - 0.5) * 2.0 * fr.omega,
                y[1] + (rng.gen::<f64>() - 0.5) * 2.0 * fr.omega,
            ];
            let r = fr.tau_min() * (fr.omega / fr.tau_min()).powf(rng.gen::<f64>());
            // Direct sum over the cartesian product of axis intervals.
            let mut direct = 0.0;
            for &(l0, h0) in &fam.axes[0] {
                for &(l1, h1) in &fam.axes[1] {
                    let o0 = (h0.min(c[0] + r) - l0.max(c[0] - r)).max(0.0) / (h0 - l0);
                    let o1 = (h1.min(c[1] + r) - l1.max(c[1] - r)).max(0.0) / (h1 - l1);
                    direct += o0 * o1 / total;
                }
            }
            let fast = mu.mu_ball(&c, r);
            assert!((fast - direct).abs() <= 1e-12 * direct.max(1e-300).max(fast));
        }
        // Total mass: a huge ball captures everything.
        assert!((mu.mu_ball(&y, 1.0) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn ball_bound_scan_spans_regimes() {
        let (betas, psis, f) = config_d2();
        let fr = frame(8, &betas, &psis, &f).unwrap();
        let maps = vec![LipschitzMap::constant(0.0).unwrap(); 2];
        let y = vec![128.0 / 256.0, 3280.0 / 6561.0];
        let fam = build_rect_family(&y, &fr, &betas, &psis, &maps).unwrap();
        let mu = MuMeasure::new(fam).unwrap();
        let rep = ball_bound_scan(&fr, &mu, &f, 300, 17).unwrap();
        assert_eq!(rep.samples, 300);
        assert!(rep.sup_ratio.is_finite() && rep.sup_ratio > 0.0);
        for (count, sup) in rep.per_regime {
            assert!(count > 0, "a radius regime went unsampled");
            assert!(sup.is_finite());
        }
    }

    #[test]
    fn y_grid_pins_upper_axes() {
        let (betas, psis, f) = config_m1();
        let fr = frame(10, &betas, &psis, &f).unwrap();
        assert_eq!(fr.m, 1);
        let z = vec![0.5, 0.25];
        let grid = y_grid(&z, &fr, &betas, &psis, 4096).unwrap();
        assert!(!grid.is_empty());
        let half = ln_rate_scale(betas.get(0), &psis[0], 10).exp() / 2.0;
        for y in &grid {
            assert_eq!(y[1], z[1]);
            assert!((y[0] - z[0]).abs() <= half + 1e-15);
        }
        // Spacing between consecutive first-axis grid points is 2ω.
        if grid.len() >= 2 {
            let gap = grid[1][0] - grid[0][0];
            assert!((gap - 2.0 * fr.omega).abs() <= 1e-15);
        }
    }

    #[test]
    fn degenerate_omega_clips_to_unit_cube() {
        let (betas, psis, f) = config_d1();
        let mut fr = frame(6, &betas, &psis, &f).unwrap();
        fr.omega = 1.5;
        fr.ln_omega = 1.5f64.ln();
        let maps = vec![LipschitzMap::constant(0.0).unwrap()];
        let fam = build_rect_family(&[0.5], &fr, &betas, &psis, &maps).unwrap();
        assert_eq!(fam.count(), 1);
        assert_eq!(fam.axes[0][0], (0.0, 1.0));
    }

    #[test]
    fn non_integer_base_rejected() {
        let betas = BetaVector::new(vec![Beta::golden(PREC)]).unwrap();
        let psis = vec![ApproxFunction::exp_rate(0.3).unwrap()];
        let f = DimensionFunction::monomial(0.5).unwrap();
        let fr = frame(12, &betas, &psis, &f).unwrap();
        let maps = vec![LipschitzMap::constant(0.0).unwrap()];
        assert!(matches!(
            build_rect_family(&[0.4], &fr, &betas, &psis, &maps),
            Err(Error::Unsupported(_))
        ));
    }
}
