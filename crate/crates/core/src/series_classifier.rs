//! The per-level optimal scale s_n, symbolic series convergence, and the
//! zero-full dichotomy verdicts.
//!
//! The rate functions ψ live in the parametric family
//! ψ(n) = exp(a₀ + a₁n + a₂n²)·n^q, so the log of every series term is a
//! quadratic in n plus log-n terms. Convergence is decided exactly on the
//! coefficients, with no numerical summation; boundary cases (vanishing
//! leading coefficients) resolve by the explicit lexicographic rule in
//! [`decide_series`]. Arbitrary non-parametric terms get the numeric
//! partial-sum mode, which never claims a verdict.

use serde::Serialize;

use crate::beta_core::{Beta, BetaVector};
use crate::dimension_functions::{
    comparable, compare, precsim, strictly_precedes, DimensionFunction, Relation, R_MAX_LN,
};
use crate::error::{Error, Result};

/// Coefficients this close to zero are treated as exactly zero when deciding
/// convergence. Boundary configurations (e.g. the critical exponent
/// s = log6/(log2+t)) are built from f64 logarithms, so an exact real zero
/// appears as a residual of a few ulps (~1e-16); genuine nonzero coefficients
/// in this family are macroscopic.
pub const COEFF_SNAP_EPS: f64 = 1e-11;

fn snap(x: f64) -> f64 {
    if x.abs() < COEFF_SNAP_EPS {
        0.0
    } else {
        x
    }
}

// ---------------------------------------------------------------------------
// ApproxFunction
// ---------------------------------------------------------------------------

/// A rate function ψ(n) = exp(a₀ + a₁n + a₂n²)·n^q.
///
/// Invariants: a₂ ≤ 0; if a₂ = 0 then a₁ ≤ 0 (targets shrink); ψ(n) ≤ 1 for
/// all n ≥ n₀, with n₀ computed and reported at construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ApproxFunction {
    a0: f64,
    a1: f64,
    a2: f64,
    q: f64,
    n0: u32,
}

impl ApproxFunction {
    pub fn new(a0: f64, a1: f64, a2: f64, q: f64) -> Result<Self> {
        for (name, v) in [("a0", a0), ("a1", a1), ("a2", a2), ("q", q)] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("coefficient {name} must be finite, got {v}")));
            }
        }
        if a2 > 0.0 {
            return Err(Error::Domain(format!("need a2 <= 0 (shrinking targets), got a2={a2}")));
        }
        if a2 == 0.0 && a1 > 0.0 {
            return Err(Error::Domain(format!(
                "need a1 <= 0 when a2 = 0 (shrinking targets), got a1={a1}"
            )));
        }
        let mut f = ApproxFunction { a0, a1, a2, q, n0: 0 };
        f.n0 = f.find_n0()?;
        Ok(f)
    }

    /// ψ(n) = e^(−c·n).
    pub fn exp_rate(c: f64) -> Result<Self> {
        Self::new(0.0, -c, 0.0, 0.0)
    }

    /// ψ(n) = e^(−c·n²).
    pub fn gaussian(c: f64) -> Result<Self> {
        Self::new(0.0, 0.0, -c, 0.0)
    }

    /// ψ(n) = n^q (q ≤ 0 for validity).
    pub fn power(q: f64) -> Result<Self> {
        Self::new(0.0, 0.0, 0.0, q)
    }

    /// ψ ≡ 1.
    pub fn one() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0).expect("constant 1 is valid")
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Smallest n₀ with ψ(n) ≤ 1 for every n ≥ n₀.
    pub fn n0(&self) -> u32 {
        self.n0
    }

    pub fn ln_eval(&self, n: u32) -> f64 {
        let x = n as f64;
        self.a0 + self.a1 * x + self.a2 * x * x + self.q * x.ln()
    }

    pub fn eval(&self, n: u32) -> f64 {
        self.ln_eval(n).exp()
    }

    pub fn is_constant_one(&self) -> bool {
        self.a0 == 0.0 && self.a1 == 0.0 && self.a2 == 0.0 && self.q == 0.0
    }

    /// Symbolic form of ln ψ(n) as a log-polynomial in n.
    fn sym(&self) -> LogPoly {
        LogPoly { n2: self.a2, n1: self.a1, logn: self.q, c: self.a0 }
    }

    fn find_n0(&self) -> Result<u32> {
        // ln ψ(x) = a0 + a1·x + a2·x² + q·ln x has derivative
        // (2a2·x² + a1·x + q)/x, so beyond the largest positive root of the
        // numerator it is monotone, with tail direction fixed by the leading
        // nonzero coefficient (≤ 0 by the invariants, unless ψ is n^q with
        // q >= 0 or constant).
        let tail_nonincreasing = self.a2 < 0.0
            || (self.a2 == 0.0 && self.a1 < 0.0)
            || (self.a2 == 0.0 && self.a1 == 0.0 && self.q < 0.0);
        if !tail_nonincreasing {
            // Constant (a0 + q·ln n with q = 0) or growing n^q.
            return if self.q == 0.0 && self.a0 <= 0.0 {
                Ok(1)
            } else {
                Err(Error::Domain(format!(
                    "psi never settles below 1 (a0={}, q={})",
                    self.a0, self.q
                )))
            };
        }
        let turn = largest_positive_root(2.0 * self.a2, self.a1, self.q).unwrap_or(0.0);
        let start = (turn.ceil().max(1.0)) as u64;
        const SCAN_CAP: u64 = 10_000_000;
        let mut hit: Option<u64> = None;
        for n in start..start + SCAN_CAP {
            if self.ln_eval(n as u32) <= 0.0 {
                hit = Some(n);
                break;
            }
        }
        let mut n0 = hit.ok_or_else(|| {
            Error::Resource("could not locate n0 with psi(n) <= 1 within scan cap".into())
        })?;
        // Extend the validated range down while psi stays <= 1.
        while n0 > 1 && self.ln_eval((n0 - 1) as u32) <= 0.0 {
            n0 -= 1;
        }
        u32::try_from(n0).map_err(|_| Error::Resource("n0 exceeds u32 range".into()))
    }
}

/// Largest positive root of ax² + bx + c, if any.
fn largest_positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
    if a == 0.0 {
        if b == 0.0 {
            return None;
        }
        let r = -c / b;
        return (r > 0.0).then_some(r);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sd = disc.sqrt();
    let r1 = (-b + sd) / (2.0 * a);
    let r2 = (-b - sd) / (2.0 * a);
    let m = r1.max(r2);
    (m > 0.0).then_some(m)
}

// ---------------------------------------------------------------------------
// Shared per-level scale expressions
// ---------------------------------------------------------------------------

/// ln of the plain candidate scale β^(−n).
pub fn ln_plain_scale(beta: &Beta, n: u32) -> f64 {
    -(n as f64) * beta.as_f64().ln()
}

/// ln of the rate candidate scale β^(−n)·ψ(n).
///
/// Every series in this crate that evaluates a term at β^(−n)ψ(n) goes
/// through this one expression, so coinciding series coincide bitwise.
pub fn ln_rate_scale(beta: &Beta, psi: &ApproxFunction, n: u32) -> f64 {
    ln_plain_scale(beta, n) + psi.ln_eval(n)
}

// ---------------------------------------------------------------------------
// SnBreakdown
// ---------------------------------------------------------------------------

/// One candidate scale τ ∈ A_n with its index sets and objective value.
#[derive(Clone, Debug, Serialize)]
pub struct CandidateEval {
    /// Axis index i the candidate comes from.
    pub axis: usize,
    /// False for τ = β_i^(−n), true for τ = β_i^(−n)ψ_i(n).
    pub with_rate: bool,
    pub ln_tau: f64,
    pub tau: f64,
    /// K₁(τ) = {i : β_i^(−n) ≤ τ}.
    pub k1: Vec<usize>,
    /// K₂(τ) = {i : β_i^(−n)ψ_i(n) ≥ τ}.
    pub k2: Vec<usize>,
    /// ln of f(τ)·∏_{K₁} β_i^(−n)/τ · ∏_{K₂} β_i^(−n)ψ_i(n)/τ.
    pub ln_value: f64,
}

/// Exhaustive evaluation of the per-level minimum s_n over the candidate
/// scales A_n = {β_i^(−n)} ∪ {β_i^(−n)ψ_i(n)}.
#[derive(Clone, Debug, Serialize)]
pub struct SnBreakdown {
    pub n: u32,
    pub candidates: Vec<CandidateEval>,
    /// Index into `candidates` of the minimizing scale τ*.
    pub argmin: usize,
    pub ln_s_n: f64,
}

impl SnBreakdown {
    pub fn s_n(&self) -> f64 {
        self.ln_s_n.exp()
    }

    pub fn tau_star(&self) -> f64 {
        self.candidates[self.argmin].tau
    }

    pub fn ln_tau_star(&self) -> f64 {
        self.candidates[self.argmin].ln_tau
    }
}

/// Computes s_n(Ψ, f) by exhaustive evaluation over the ≤ 2d candidates.
pub fn sn_breakdown(
    betas: &BetaVector,
    psis: &[ApproxFunction],
    f: &DimensionFunction,
    n: u32,
) -> Result<SnBreakdown> {
    let d = betas.d();
    if psis.len() != d {
        return Err(Error::Domain(format!("got {} rate functions for d={d}", psis.len())));
    }
    if n == 0 {
        return Err(Error::Domain("level n must be >= 1".into()));
    }
    for (i, psi) in psis.iter().enumerate() {
        if psi.ln_eval(n) > 0.0 {
            return Err(Error::Domain(format!(
                "psi_{} (n) > 1 at n={n}; normalized from n0={}",
                i + 1,
                psi.n0()
            )));
        }
    }
    let ln_b: Vec<f64> = (0..d).map(|i| ln_plain_scale(betas.get(i), n)).collect();
    let ln_bp: Vec<f64> =
        (0..d).map(|i| ln_rate_scale(betas.get(i), &psis[i], n)).collect();

    // Every candidate must lie in f's domain (0, e^-1]; the largest is the
    // plain scale of the smallest base.
    let max_ln = ln_b.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max_ln > R_MAX_LN {
        let n_min = (1.0 / betas.get(0).as_f64().ln()).ceil() as u32;
        return Err(Error::Domain(format!(
            "candidate scale exceeds e^-1 at n={n}; need n >= {n_min}"
        )));
    }

    let mut candidates = Vec::with_capacity(2 * d);
    for (with_rate, taus) in [(false, &ln_b), (true, &ln_bp)] {
        for (axis, &ln_tau) in taus.iter().enumerate() {
            let k1: Vec<usize> = (0..d).filter(|&i| ln_b[i] <= ln_tau).collect();
            let k2: Vec<usize> = (0..d).filter(|&i| ln_bp[i] >= ln_tau).collect();
            let mut ln_value = f.eval_ln(ln_tau);
            for &i in &k1 {
                ln_value += ln_b[i] - ln_tau;
            }
            for &i in &k2 {
                ln_value += ln_bp[i] - ln_tau;
            }
            candidates.push(CandidateEval {
                axis,
                with_rate,
                ln_tau,
                tau: ln_tau.exp(),
                k1,
                k2,
                ln_value,
            });
        }
    }
    // Ties go to the later candidate, so rate scales win over plain scales
    // that coincide with them; coinciding series then pick identical values.
    let mut argmin = 0;
    for (i, c) in candidates.iter().enumerate() {
        if c.ln_value <= candidates[argmin].ln_value {
            argmin = i;
        }
    }
    let ln_s_n = candidates[argmin].ln_value;
    Ok(SnBreakdown { n, candidates, argmin, ln_s_n })
}

/// ln of the rectangle series term s_n·∏β_i^n.
pub fn rectangle_ln_term(
    betas: &BetaVector,
    psis: &[ApproxFunction],
    f: &DimensionFunction,
    n: u32,
) -> Result<f64> {
    let sn = sn_breakdown(betas, psis, f, n)?;
    Ok(sn.ln_s_n + (n as f64) * betas.ln_product())
}

/// ln of the d=1 multiplicative series term β^n·g(β^(−n)ψ(n)).
pub fn multiplicative_d1_ln_term(
    beta: &Beta,
    psi: &ApproxFunction,
    g: &DimensionFunction,
    n: u32,
) -> f64 {
    (n as f64) * beta.as_f64().ln() + g.eval_ln(ln_rate_scale(beta, psi, n))
}

// ---------------------------------------------------------------------------
// Symbolic asymptotics
// ---------------------------------------------------------------------------

/// γ·n² + λ·n + q·ln n + c, the shape of every candidate log-value.
#[derive(Clone, Copy, Debug, PartialEq)]
struct LogPoly {
    n2: f64,
    n1: f64,
    logn: f64,
    c: f64,
}

impl LogPoly {
    const ZERO: LogPoly = LogPoly { n2: 0.0, n1: 0.0, logn: 0.0, c: 0.0 };

    fn add(self, o: LogPoly) -> LogPoly {
        LogPoly { n2: self.n2 + o.n2, n1: self.n1 + o.n1, logn: self.logn + o.logn, c: self.c + o.c }
    }

    fn sub(self, o: LogPoly) -> LogPoly {
        LogPoly { n2: self.n2 - o.n2, n1: self.n1 - o.n1, logn: self.logn - o.logn, c: self.c - o.c }
    }

    fn scale(self, k: f64) -> LogPoly {
        LogPoly { n2: k * self.n2, n1: k * self.n1, logn: k * self.logn, c: k * self.c }
    }
}

/// Tolerant comparison of one coefficient pair: rounding residue counts as a
/// tie so that eventual order falls through to the next coefficient.
fn coeff_cmp(a: f64, b: f64) -> std::cmp::Ordering {
    let tol = COEFF_SNAP_EPS * (1.0 + a.abs().max(b.abs()));
    if (a - b).abs() <= tol {
        std::cmp::Ordering::Equal
    } else {
        a.partial_cmp(&b).expect("finite coefficients")
    }
}

/// Eventual order of two log-polynomials as n → ∞, decided lexicographically
/// on (n², n, log n) coefficients with the constant as final tie-break.
fn lex_cmp(a: LogPoly, b: LogPoly) -> std::cmp::Ordering {
    coeff_cmp(a.n2, b.n2)
        .then_with(|| coeff_cmp(a.n1, b.n1))
        .then_with(|| coeff_cmp(a.logn, b.logn))
        .then_with(|| coeff_cmp(a.c, b.c))
}

/// Asymptotic form of a positive series term a_n:
/// ln a_n = γn² + λn + q·ln n + u·ln ln n + ln_const + O(1).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AsymptoticForm {
    pub gamma: f64,
    pub lambda: f64,
    pub q: f64,
    pub u: f64,
    /// Constant part of the log term (not used by the convergence rule, but
    /// needed to predict term values).
    pub ln_const: f64,
    /// True when the O(1) remainder is nonzero (log-of-log expansions).
    pub bounded_remainder: bool,
}

impl AsymptoticForm {
    /// Predicted ln a_n (remainder dropped).
    pub fn ln_term(&self, n: u32) -> f64 {
        let x = n as f64;
        let mut v = self.gamma * x * x + self.lambda * x + self.q * x.ln() + self.ln_const;
        if self.u != 0.0 {
            v += self.u * x.ln().ln();
        }
        v
    }
}

/// A candidate's symbolic value: log-polynomial plus a possible ln ln n term.
#[derive(Clone, Copy, Debug)]
struct SymValue {
    poly: LogPoly,
    u: f64,
    remainder: bool,
}

impl SymValue {
    fn add_poly(mut self, p: LogPoly) -> SymValue {
        self.poly = self.poly.add(p);
        self
    }

    fn lex_cmp(self, o: SymValue) -> std::cmp::Ordering {
        coeff_cmp(self.poly.n2, o.poly.n2)
            .then_with(|| coeff_cmp(self.poly.n1, o.poly.n1))
            .then_with(|| coeff_cmp(self.poly.logn, o.poly.logn))
            .then_with(|| coeff_cmp(self.u, o.u))
            .then_with(|| coeff_cmp(self.poly.c, o.poly.c))
    }
}

/// Symbolic ln f(τ(n)) for a scale with ln τ(n) given as a log-polynomial.
fn f_applied_sym(f: &DimensionFunction, tau: LogPoly) -> SymValue {
    let mut poly = tau.scale(f.s);
    poly.c += f.scale.ln();
    let mut u = 0.0;
    let mut remainder = false;
    if f.p != 0.0 {
        // ln(−ln τ) expands by the leading nonzero coefficient of −ln τ.
        if snap(tau.n2) < 0.0 {
            poly.logn += -2.0 * f.p;
            poly.c += -f.p * (-tau.n2).ln();
            remainder = true;
        } else if snap(tau.n1) < 0.0 {
            poly.logn += -f.p;
            poly.c += -f.p * (-tau.n1).ln();
            remainder = true;
        } else if snap(tau.logn) < 0.0 {
            u = -f.p;
            poly.c += -f.p * (-tau.logn).ln();
            remainder = true;
        } else {
            // Constant scale: −ln τ = −c ≥ 1 on the domain.
            poly.c += -f.p * (-tau.c).ln();
        }
    }
    SymValue { poly, u, remainder }
}

/// Which critical series to analyze.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SeriesTarget {
    /// Σ s_n(Ψ, f)·∏β_i^n.
    Rectangle,
    /// Σ β^n·g(β^(−n)ψ(n)) (d = 1 multiplicative).
    MultiplicativeD1,
    /// Σ β_d^(dn)·ψ(n)^(−d+1)·f(β_d^(−n)ψ(n)) (d ≥ 2 multiplicative).
    Multiplicative,
    /// Σ f(2^(−n)e^(−nt))·6^n (two-base target, fast rate t > log 3).
    TwoBaseFast { t: f64 },
    /// Σ f(3^(−n)e^(−n²))·9^n·e^(n²−nt) (two-base target, slow rate t ≤ log 3).
    TwoBaseSlow { t: f64 },
}

/// Asymptotic form of the chosen series' terms, found by identifying the
/// eventually-minimal candidate branch of s_n symbolically.
///
/// For the two-base targets the β/ψ arguments are ignored (the bases and
/// rates are fixed by the target).
pub fn series_asymptotics(
    betas: &BetaVector,
    psis: &[ApproxFunction],
    f: &DimensionFunction,
    target: SeriesTarget,
) -> Result<AsymptoticForm> {
    let value = match target {
        SeriesTarget::Rectangle => {
            let d = betas.d();
            if psis.len() != d {
                return Err(Error::Domain(format!("got {} rate functions for d={d}", psis.len())));
            }
            let plain: Vec<LogPoly> = (0..d)
                .map(|i| LogPoly { n1: -betas.get(i).as_f64().ln(), ..LogPoly::ZERO })
                .collect();
            let rate: Vec<LogPoly> = (0..d).map(|i| plain[i].add(psis[i].sym())).collect();
            let mut best: Option<SymValue> = None;
            for tau in plain.iter().chain(rate.iter()) {
                let mut v = f_applied_sym(f, *tau);
                for p in &plain {
                    if lex_cmp(*p, *tau) != std::cmp::Ordering::Greater {
                        v.poly = v.poly.add(p.sub(*tau));
                    }
                }
                for r in &rate {
                    if lex_cmp(*r, *tau) != std::cmp::Ordering::Less {
                        v.poly = v.poly.add(r.sub(*tau));
                    }
                }
                // Later candidates win ties, matching sn_breakdown.
                best = match best {
                    Some(b) if v.lex_cmp(b) == std::cmp::Ordering::Greater => Some(b),
                    _ => Some(v),
                };
            }
            let s_n = best.expect("at least one candidate");
            s_n.add_poly(LogPoly { n1: betas.ln_product(), ..LogPoly::ZERO })
        }
        SeriesTarget::MultiplicativeD1 => {
            let beta_ln = betas.get(0).as_f64().ln();
            let tau = LogPoly { n1: -beta_ln, ..LogPoly::ZERO }.add(psis[0].sym());
            f_applied_sym(f, tau).add_poly(LogPoly { n1: beta_ln, ..LogPoly::ZERO })
        }
        SeriesTarget::Multiplicative => {
            let d = betas.d() as f64;
            let beta_d_ln = betas.get(betas.d() - 1).as_f64().ln();
            let psi = psis.last().ok_or_else(|| Error::Domain("need a rate function".into()))?;
            let tau = LogPoly { n1: -beta_d_ln, ..LogPoly::ZERO }.add(psi.sym());
            f_applied_sym(f, tau)
                .add_poly(LogPoly { n1: d * beta_d_ln, ..LogPoly::ZERO })
                .add_poly(psi.sym().scale(1.0 - d))
        }
        SeriesTarget::TwoBaseFast { t } => {
            let tau = LogPoly { n1: -(2.0_f64.ln() + t), ..LogPoly::ZERO };
            f_applied_sym(f, tau).add_poly(LogPoly { n1: 6.0_f64.ln(), ..LogPoly::ZERO })
        }
        SeriesTarget::TwoBaseSlow { t } => {
            let tau = LogPoly { n2: -1.0, n1: -(3.0_f64.ln()), ..LogPoly::ZERO };
            f_applied_sym(f, tau).add_poly(LogPoly {
                n2: 1.0,
                n1: 2.0 * 3.0_f64.ln() - t,
                ..LogPoly::ZERO
            })
        }
    };
    Ok(AsymptoticForm {
        gamma: snap(value.poly.n2),
        lambda: snap(value.poly.n1),
        q: snap(value.poly.logn),
        u: snap(value.u),
        ln_const: value.poly.c,
        bounded_remainder: value.remainder,
    })
}

/// Convergence verdict for a series of positive terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SeriesVerdict {
    Converges,
    Diverges,
}

/// Decides Σ a_n with ln a_n = γn² + λn + q·ln n + u·ln ln n + O(1):
/// the first nonzero of (γ, λ) settles it; at γ = λ = 0 the series is a
/// log-weighted p-series, decided by q, then u.
pub fn decide_series(form: &AsymptoticForm) -> SeriesVerdict {
    use SeriesVerdict::*;
    let g = snap(form.gamma);
    if g < 0.0 {
        return Converges;
    }
    if g > 0.0 {
        return Diverges;
    }
    let l = snap(form.lambda);
    if l < 0.0 {
        return Converges;
    }
    if l > 0.0 {
        return Diverges;
    }
    let q = snap(form.q);
    if q < -1.0 {
        return Converges;
    }
    if q > -1.0 {
        return Diverges;
    }
    if snap(form.u) < -1.0 {
        Converges
    } else {
        Diverges
    }
}

// ---------------------------------------------------------------------------
// Dichotomy verdicts
// ---------------------------------------------------------------------------

/// One named hypothesis with its outcome and a short explanation.
#[derive(Clone, Debug, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub pass: bool,
    pub note: String,
}

impl HypothesisCheck {
    fn new(name: &str, pass: bool, note: impl Into<String>) -> Self {
        HypothesisCheck { name: name.into(), pass, note: note.into() }
    }
}

/// Zero/full conclusion of a dichotomy law.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Conclusion {
    MeasureZero,
    FullMeasure,
    HypothesisFailed(String),
}

/// The user-facing answer: hypothesis checks, series asymptotics, and the
/// zero-full conclusion.
#[derive(Clone, Debug)]
pub struct DichotomyVerdict {
    /// "rectangle" | "multiplicative_d1" | "multiplicative" | "w2star".
    pub tag: &'static str,
    pub hypothesis_checks: Vec<HypothesisCheck>,
    pub series_form: Option<AsymptoticForm>,
    pub series_verdict: Option<SeriesVerdict>,
    /// Set when the decisive coefficients were on the boundary (γ = λ = 0)
    /// and the verdict was resolved by the lower-order rule.
    pub boundary_detail: Option<String>,
    pub conclusion: Conclusion,
    pub notes: Vec<String>,
}

impl DichotomyVerdict {
    pub fn hypotheses_pass(&self) -> bool {
        self.hypothesis_checks.iter().all(|h| h.pass)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let verdict = match (self.series_verdict, &self.boundary_detail) {
            (None, _) => serde_json::Value::Null,
            (Some(v), None) => serde_json::json!(format!("{v:?}")),
            (Some(v), Some(detail)) => serde_json::json!(format!("{v:?} ({detail})")),
        };
        let conclusion = match &self.conclusion {
            Conclusion::MeasureZero => serde_json::json!("MeasureZero"),
            Conclusion::FullMeasure => serde_json::json!("FullMeasure"),
            Conclusion::HypothesisFailed(r) => {
                serde_json::json!({ "HypothesisFailed": r })
            }
        };
        serde_json::json!({
            "tag": self.tag,
            "hypothesis_checks": self.hypothesis_checks,
            "series": self.series_form.map(|s| serde_json::json!({
                "gamma": s.gamma, "lambda": s.lambda, "q": s.q, "u": s.u,
            })),
            "verdict": verdict,
            "conclusion": conclusion,
            "notes": self.notes,
        })
    }
}

fn boundary_detail_for(form: &AsymptoticForm) -> Option<String> {
    if snap(form.gamma) == 0.0 && snap(form.lambda) == 0.0 {
        Some(format!("boundary resolved at q={}, u={}", snap(form.q), snap(form.u)))
    } else {
        None
    }
}

/// Sorts rate functions within blocks of equal β so that within each block
/// they are eventually nonincreasing; returns the permutation applied.
fn sort_within_blocks(betas: &BetaVector, psis: &[ApproxFunction]) -> (Vec<ApproxFunction>, Vec<usize>) {
    let d = betas.d();
    let mut perm: Vec<usize> = (0..d).collect();
    let mut start = 0;
    while start < d {
        let b = betas.get(start).as_f64();
        let mut end = start + 1;
        while end < d && betas.get(end).as_f64() == b {
            end += 1;
        }
        // Eventually-larger psi first (descending eventual order).
        perm[start..end].sort_by(|&i, &j| lex_cmp(psis[j].sym(), psis[i].sym()));
        start = end;
    }
    let sorted = perm.iter().map(|&i| psis[i]).collect();
    (sorted, perm)
}

/// Dichotomy verdict for the weighted shrinking-target set on ∏[0,1] with
/// bases β_1 ≤ … ≤ β_d and per-axis rates Ψ: zero or full H^f measure by
/// the series Σ s_n(Ψ,f)·∏β_i^n.
pub fn rectangle_verdict(
    betas: &BetaVector,
    psis: &[ApproxFunction],
    f: &DimensionFunction,
) -> Result<DichotomyVerdict> {
    let d = betas.d();
    if psis.len() != d {
        return Err(Error::Domain(format!("got {} rate functions for d={d}", psis.len())));
    }
    let (psis, perm) = sort_within_blocks(betas, psis);
    let mut checks = Vec::new();

    let f_le_d = precsim(f, &DimensionFunction::monomial(d as f64)?);
    checks.push(HypothesisCheck::new(
        "f_precsim_d",
        f_le_d,
        format!("f ⪯ r^{d} (growth at most the ambient dimension)"),
    ));
    for k in 1..d {
        let ok = comparable(f, &DimensionFunction::monomial(k as f64)?);
        checks.push(HypothesisCheck::new(
            &format!("comparable_with_r{k}"),
            ok,
            format!("f comparable with r^{k}"),
        ));
    }

    let form = series_asymptotics(betas, &psis, f, SeriesTarget::Rectangle)?;
    let verdict = decide_series(&form);
    let all_integer = betas.all_integer();
    // Integer bases are needed only on the divergence (full measure) side.
    let integer_gate_pass = all_integer || verdict == SeriesVerdict::Converges;
    checks.push(HypothesisCheck::new(
        "integer_bases_on_divergence_side",
        integer_gate_pass,
        if all_integer {
            "all bases are integers".to_string()
        } else if integer_gate_pass {
            "non-integer base, but the series converges (zero side holds for all bases)".to_string()
        } else {
            "non-integer β on divergence side".to_string()
        },
    ));

    let n0 = psis.iter().map(|p| p.n0()).max().unwrap_or(1);
    let notes = vec![
        format!("series starts at n0={n0} (rates normalized to psi <= 1)"),
        format!("within-block rate permutation: {perm:?}"),
    ];

    let structural_pass = checks.iter().all(|h| h.pass);
    let conclusion = if !structural_pass {
        let reason = checks
            .iter()
            .find(|h| !h.pass)
            .map(|h| h.note.clone())
            .unwrap_or_else(|| "hypothesis failed".into());
        Conclusion::HypothesisFailed(reason)
    } else {
        match verdict {
            SeriesVerdict::Converges => Conclusion::MeasureZero,
            SeriesVerdict::Diverges => Conclusion::FullMeasure,
        }
    };
    Ok(DichotomyVerdict {
        tag: "rectangle",
        hypothesis_checks: checks,
        boundary_detail: boundary_detail_for(&form),
        series_form: Some(form),
        series_verdict: Some(verdict),
        conclusion,
        notes,
    })
}

/// Dichotomy verdict for the multiplicative shrinking-target set.
///
/// d = 1: requires g ⪯ r, series Σ β^n·g(β^(−n)ψ(n)).
/// d ≥ 2: requires (d−1) ≺ f ⪯ r^s for some s ∈ (d−1, d), decided on the
/// exponents; series Σ β_d^(dn)·ψ(n)^(−d+1)·f(β_d^(−n)ψ(n)).
pub fn multiplicative_verdict(
    betas: &BetaVector,
    psi: &ApproxFunction,
    fg: &DimensionFunction,
) -> Result<DichotomyVerdict> {
    let d = betas.d();
    let mut checks = Vec::new();
    let (tag, form) = if d == 1 {
        let ok = precsim(fg, &DimensionFunction::monomial(1.0)?);
        checks.push(HypothesisCheck::new("g_precsim_1", ok, "g ⪯ r"));
        let psis = [*psi];
        (
            "multiplicative_d1",
            series_asymptotics(betas, &psis, fg, SeriesTarget::MultiplicativeD1)?,
        )
    } else {
        // Exists s ∈ (d−1, d) with (d−1) ≺ f ⪯ r^s. Lower bound: strict
        // order against r^(d−1). Upper bound: f ⪯ r^s for some s < d needs
        // s_f < d and s_f + p_f < d (pick s just below d).
        let df = d as f64;
        let lower = strictly_precedes(&DimensionFunction::monomial(df - 1.0)?, fg);
        let upper = fg.s < df && fg.s + fg.p < df;
        checks.push(HypothesisCheck::new(
            "d_minus_1_strictly_precedes_f",
            lower,
            format!("r^{} ≺ f", d - 1),
        ));
        checks.push(HypothesisCheck::new(
            "f_precsim_s_below_d",
            upper,
            if upper {
                format!("f ⪯ r^s for some s ∈ ({}, {d})", d - 1)
            } else {
                "f ⪯ s < d fails".to_string()
            },
        ));
        let psis = [*psi];
        ("multiplicative", series_asymptotics(betas, &psis, fg, SeriesTarget::Multiplicative)?)
    };
    let verdict = decide_series(&form);
    let structural_pass = checks.iter().all(|h| h.pass);
    let conclusion = if !structural_pass {
        let reason = checks
            .iter()
            .find(|h| !h.pass)
            .map(|h| h.note.clone())
            .unwrap_or_else(|| "hypothesis failed".into());
        Conclusion::HypothesisFailed(reason)
    } else {
        match verdict {
            SeriesVerdict::Converges => Conclusion::MeasureZero,
            SeriesVerdict::Diverges => Conclusion::FullMeasure,
        }
    };
    Ok(DichotomyVerdict {
        tag,
        hypothesis_checks: checks,
        boundary_detail: boundary_detail_for(&form),
        series_form: Some(form),
        series_verdict: Some(verdict),
        conclusion,
        notes: vec![format!("series starts at n0={}", psi.n0())],
    })
}

/// Hausdorff dimension of the two-base target set: min(1, (log2+log3)/(log2+t)).
pub fn w2star_hdim(t: f64) -> f64 {
    let v = (2.0_f64.ln() + 3.0_f64.ln()) / (2.0_f64.ln() + t);
    v.min(1.0)
}

/// Dichotomy verdict for the two-base (β=2, β=3) target set with rate e^(−nt):
/// four branches split on t vs log 3 and on the position of f relative to r.
pub fn w2star_verdict(t: f64, f: &DimensionFunction) -> Result<DichotomyVerdict> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("need t > 0, got {t}")));
    }
    let one = DimensionFunction::monomial(1.0)?;
    let one_le_f = precsim(&one, f);
    let f_lt_one = strictly_precedes(f, &one);
    let rel_one = compare(f, &one).relation;
    let mut checks = Vec::new();

    let f_le_2 = precsim(f, &DimensionFunction::monomial(2.0)?);
    checks.push(HypothesisCheck::new("f_precsim_2", f_le_2, "f ⪯ r^2"));
    let comparable_one = rel_one != Relation::Incomparable;
    checks.push(HypothesisCheck::new(
        "comparable_with_r",
        comparable_one,
        "f comparable with r (either r ⪯ f or f ⪯ r)",
    ));

    let log3 = 3.0_f64.ln();
    let fast = t > log3;
    let mut notes = vec![
        format!("t = {t} ({} log 3)", if fast { ">" } else { "<=" }),
        format!("hausdorff dimension of the target set: {}", w2star_hdim(t)),
    ];

    let betas = BetaVector::new(vec![Beta::from_u64(2, 64)?, Beta::from_u64(3, 64)?])?;
    let dummy_psis =
        [ApproxFunction::exp_rate(t)?, ApproxFunction::new(0.0, 0.0, -1.0, 0.0)?];

    let mut form = None;
    let mut verdict = None;
    let conclusion = if !checks.iter().all(|h| h.pass) {
        let reason = checks
            .iter()
            .find(|h| !h.pass)
            .map(|h| h.note.clone())
            .unwrap_or_else(|| "hypothesis failed".into());
        Conclusion::HypothesisFailed(reason)
    } else if fast {
        if one_le_f {
            notes.push("r ⪯ f forces measure zero directly; no series needed".into());
            Conclusion::MeasureZero
        } else {
            // f ≺ 1 (comparability holds and r ⪯ f fails).
            let fm = series_asymptotics(&betas, &dummy_psis, f, SeriesTarget::TwoBaseFast { t })?;
            let v = decide_series(&fm);
            form = Some(fm);
            verdict = Some(v);
            match v {
                SeriesVerdict::Converges => Conclusion::MeasureZero,
                SeriesVerdict::Diverges => Conclusion::FullMeasure,
            }
        }
    } else if f_lt_one {
        notes.push("f ≺ r below the critical rate: H^f is infinite (full)".into());
        Conclusion::FullMeasure
    } else {
        // r ⪯ f; need f ⪯ r^(1 + log2/log3) for the series branch.
        let s_cap = 1.0 + 2.0_f64.ln() / 3.0_f64.ln();
        let cap_ok = precsim(f, &DimensionFunction::monomial(s_cap)?);
        checks.push(HypothesisCheck::new(
            "f_precsim_slow_cap",
            cap_ok,
            format!("f ⪯ r^{s_cap:.6} (slow-rate series branch)"),
        ));
        if !cap_ok {
            Conclusion::HypothesisFailed(format!("f ⪯ r^{s_cap:.6} fails on the slow-rate branch"))
        } else {
            let fm = series_asymptotics(&betas, &dummy_psis, f, SeriesTarget::TwoBaseSlow { t })?;
            let v = decide_series(&fm);
            form = Some(fm);
            verdict = Some(v);
            match v {
                SeriesVerdict::Converges => Conclusion::MeasureZero,
                SeriesVerdict::Diverges => Conclusion::FullMeasure,
            }
        }
    };

    Ok(DichotomyVerdict {
        tag: "w2star",
        hypothesis_checks: checks,
        boundary_detail: form.as_ref().and_then(boundary_detail_for),
        series_form: form,
        series_verdict: verdict,
        conclusion,
        notes,
    })
}

// ---------------------------------------------------------------------------
// Numeric partial-sum mode (non-parametric terms)
// ---------------------------------------------------------------------------

/// Partial sums of an arbitrary positive series given by ln a_n. This mode
/// never claims convergence or divergence; it reports the sum and the last
/// few terms so a human can inspect the tail.
#[derive(Clone, Debug, Serialize)]
pub struct PartialSumReport {
    pub n_start: u32,
    pub n_end: u32,
    pub partial_sum: f64,
    pub tail_terms: Vec<f64>,
    pub verdict: &'static str,
}

pub fn numeric_partial_sums<F: Fn(u32) -> f64>(
    ln_term: F,
    n_start: u32,
    n_end: u32,
) -> Result<PartialSumReport> {
    if n_start == 0 || n_end < n_start {
        return Err(Error::Domain(format!("bad summation range [{n_start}, {n_end}]")));
    }
    let mut sum = 0.0;
    let mut tail = Vec::new();
    for n in n_start..=n_end {
        let term = ln_term(n).exp();
        sum += term;
        tail.push(term);
        if tail.len() > 8 {
            tail.remove(0);
        }
    }
    Ok(PartialSumReport {
        n_start,
        n_end,
        partial_sum: sum,
        tail_terms: tail,
        verdict: "Undetermined",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta_core::Beta;

    fn beta(x: f64) -> Beta {
        Beta::from_f64(x, 128).unwrap()
    }

    fn bv(xs: &[f64]) -> BetaVector {
        BetaVector::new(xs.iter().map(|&x| beta(x)).collect()).unwrap()
    }

    fn mono(s: f64) -> DimensionFunction {
        DimensionFunction::monomial(s).unwrap()
    }

    #[test]
    fn approx_validation_and_n0() {
        assert!(ApproxFunction::gaussian(1.0).is_ok());
        assert!(ApproxFunction::exp_rate(0.5).is_ok());
        assert_eq!(ApproxFunction::power(-2.0).unwrap().n0(), 1);
        assert!(ApproxFunction::power(0.5).is_err());
        assert!(ApproxFunction::new(0.0, 0.3, 0.0, 0.0).is_err()); // growing
        assert!(ApproxFunction::new(0.5, 0.0, 0.0, 0.0).is_err()); // constant > 1
        // e^(0.5 - n) dips below 1 at n = 1 already.
        assert_eq!(ApproxFunction::new(0.5, -1.0, 0.0, 0.0).unwrap().n0(), 1);
        // n^2·e^(-n/2) exceeds 1 on 2 <= n <= 8; ln psi(n) = 2 ln n - n/2.
        let f = ApproxFunction::new(0.0, -0.5, 0.0, 2.0).unwrap();
        assert!(f.ln_eval(3) > 0.0);
        assert_eq!(f.n0(), 9);
        assert!(f.ln_eval(9) <= 0.0);
        assert!(f.ln_eval(8) > 0.0);
    }

    #[test]
    fn sn_d1_critical_exponent() {
        // beta = 2, psi = 2^(-n), f = r^(1/2): tau* = 4^(-n), s_n·2^n = 1.
        let betas = bv(&[2.0]);
        let psis = [ApproxFunction::exp_rate(2.0_f64.ln()).unwrap()];
        let f = mono(0.5);
        for n in 2..=40 {
            let sn = sn_breakdown(&betas, &psis, &f, n).unwrap();
            let expected_ln_tau = -2.0 * (n as f64) * 2.0_f64.ln();
            assert!((sn.ln_tau_star() - expected_ln_tau).abs() < 1e-9, "n={n}");
            let term = sn.ln_s_n + (n as f64) * 2.0_f64.ln();
            assert!(term.abs() < 1e-9, "s_n·2^n = 1 at n={n}, got ln {term}");
            let c = &sn.candidates[sn.argmin];
            assert!(c.k1.is_empty());
            assert_eq!(c.k2, vec![0]);
        }
    }

    #[test]
    fn sn_worked_two_base_example() {
        // d=2, beta=(2,3), psi1=e^(-1.2n), psi2=e^(-n^2), f=r^0.9, n=3.
        let betas = bv(&[2.0, 3.0]);
        let psis =
            [ApproxFunction::exp_rate(1.2).unwrap(), ApproxFunction::gaussian(1.0).unwrap()];
        let f = mono(0.9);
        let sn = sn_breakdown(&betas, &psis, &f, 3).unwrap();
        let tau_expected = 0.125 * (-3.6_f64).exp();
        assert!((sn.tau_star() - tau_expected).abs() < 1e-12);
        assert!((sn.tau_star() - 0.003415).abs() < 1e-6);
        assert!((sn.s_n() - 0.006024).abs() < 1e-5);
        assert!((sn.s_n() * 216.0 - 1.301).abs() < 1e-3);
        let c = &sn.candidates[sn.argmin];
        assert!(c.k1.is_empty());
        assert_eq!(c.k2, vec![0]);
    }

    #[test]
    fn sn_degenerate_constant_rate() {
        // psi ≡ 1 makes both candidates coincide: s_n = f(2^(-n)).
        let betas = bv(&[2.0]);
        let psis = [ApproxFunction::one()];
        let f = mono(0.7);
        for n in 2..=12 {
            let sn = sn_breakdown(&betas, &psis, &f, n).unwrap();
            let expected = f.eval(2.0_f64.powi(-(n as i32))).unwrap();
            assert!((sn.s_n() - expected).abs() < 1e-12 * expected);
            assert_eq!(sn.candidates[0].ln_tau, sn.candidates[1].ln_tau);
        }
    }

    #[test]
    fn sn_domain_error_reports_minimum_level() {
        let betas = bv(&[2.0]);
        let psis = [ApproxFunction::one()];
        let err = sn_breakdown(&betas, &psis, &mono(0.5), 1).unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "{err}");
        assert!(err.to_string().contains("need n >= 2"), "{err}");
    }

    #[test]
    fn asymptotics_rectangle_d1_critical() {
        let betas = bv(&[2.0]);
        let psis = [ApproxFunction::exp_rate(2.0_f64.ln()).unwrap()];
        let form =
            series_asymptotics(&betas, &psis, &mono(0.5), SeriesTarget::Rectangle).unwrap();
        assert_eq!(form.gamma, 0.0);
        assert_eq!(form.lambda, 0.0);
        assert_eq!(form.q, 0.0);
        assert_eq!(form.u, 0.0);
    }

    #[test]
    fn asymptotics_two_base_fast() {
        let t = 2.0;
        let s = 0.5;
        let betas = bv(&[2.0, 3.0]);
        let psis = [ApproxFunction::exp_rate(t).unwrap(), ApproxFunction::gaussian(1.0).unwrap()];
        let form =
            series_asymptotics(&betas, &psis, &mono(s), SeriesTarget::TwoBaseFast { t }).unwrap();
        let expected = 6.0_f64.ln() - s * (2.0_f64.ln() + t);
        assert!((form.lambda - expected).abs() < 1e-12);
        assert_eq!(form.gamma, 0.0);
        assert_eq!(form.q, 0.0);
        assert_eq!(form.u, 0.0);
    }

    #[test]
    fn asymptotics_multiplicative_d2() {
        let s = 1.02;
        let betas = bv(&[2.0, 3.0]);
        let psis = [ApproxFunction::exp_rate(1.0).unwrap(), ApproxFunction::exp_rate(1.0).unwrap()];
        let form =
            series_asymptotics(&betas, &psis, &mono(s), SeriesTarget::Multiplicative).unwrap();
        let expected = 2.0 * 3.0_f64.ln() + 1.0 - s * (3.0_f64.ln() + 1.0);
        assert!((form.lambda - expected).abs() < 1e-12);
    }

    #[test]
    fn decide_series_rules() {
        let form = |gamma, lambda, q, u| AsymptoticForm {
            gamma,
            lambda,
            q,
            u,
            ln_const: 0.0,
            bounded_remainder: false,
        };
        assert_eq!(decide_series(&form(0.0, 0.0, 0.0, 0.0)), SeriesVerdict::Diverges);
        assert_eq!(decide_series(&form(0.0, 0.0, -2.0, 0.0)), SeriesVerdict::Converges);
        assert_eq!(decide_series(&form(0.0, 0.0, -1.0, 0.0)), SeriesVerdict::Diverges);
        assert_eq!(decide_series(&form(0.0, 0.0, -1.0, -2.0)), SeriesVerdict::Converges);
        assert_eq!(decide_series(&form(-0.1, 5.0, 0.0, 0.0)), SeriesVerdict::Converges);
        assert_eq!(decide_series(&form(0.0, 1e-14, -3.0, 0.0)), SeriesVerdict::Converges);
    }

    #[test]
    fn asymptotics_match_direct_terms() {
        // Predicted log terms (constant included) stay within a uniform
        // factor of the directly computed terms s_n·∏β_i^n.
        let configs: Vec<(BetaVector, Vec<ApproxFunction>, DimensionFunction)> = vec![
            (
                bv(&[2.0]),
                vec![ApproxFunction::exp_rate(2.0_f64.ln()).unwrap()],
                mono(0.5),
            ),
            (
                bv(&[2.0, 3.0]),
                vec![
                    ApproxFunction::exp_rate(1.2).unwrap(),
                    ApproxFunction::gaussian(1.0).unwrap(),
                ],
                mono(0.9),
            ),
            (
                bv(&[2.0, 3.0]),
                vec![
                    ApproxFunction::exp_rate(2.0).unwrap(),
                    ApproxFunction::gaussian(1.0).unwrap(),
                ],
                DimensionFunction::new(0.9, 0.5, 1.0).unwrap(),
            ),
        ];
        for (betas, psis, f) in &configs {
            let form = series_asymptotics(betas, psis, f, SeriesTarget::Rectangle).unwrap();
            for n in 3..=50 {
                let direct = rectangle_ln_term(betas, psis, f, n).unwrap();
                let predicted = form.ln_term(n);
                assert!(
                    (direct - predicted).abs() <= 8.0_f64.ln(),
                    "factor-8 band violated at n={n}: direct={direct}, predicted={predicted}"
                );
            }
        }
    }

    #[test]
    fn rectangle_verdict_examples() {
        // Divergent critical case: full measure.
        let v = rectangle_verdict(
            &bv(&[2.0]),
            &[ApproxFunction::exp_rate(2.0_f64.ln()).unwrap()],
            &mono(0.5),
        )
        .unwrap();
        assert_eq!(v.conclusion, Conclusion::FullMeasure);
        assert_eq!(v.series_verdict, Some(SeriesVerdict::Diverges));

        // Boundary exponent: lambda = 0, q = 0 still diverges (full).
        let s = 6.0_f64.ln() / (2.0_f64.ln() + 2.0);
        let v = rectangle_verdict(
            &bv(&[2.0, 3.0]),
            &[ApproxFunction::exp_rate(2.0).unwrap(), ApproxFunction::gaussian(1.0).unwrap()],
            &mono(s),
        )
        .unwrap();
        assert_eq!(v.conclusion, Conclusion::FullMeasure);
        let form = v.series_form.unwrap();
        assert_eq!(form.gamma, 0.0);
        assert_eq!(form.lambda, 0.0);
        assert_eq!(form.q, 0.0);
        assert!(v.boundary_detail.is_some());

        // Non-integer base with a divergent series: hypothesis gate.
        let v = rectangle_verdict(
            &bv(&[2.0, 2.5]),
            &[ApproxFunction::exp_rate(0.1).unwrap(), ApproxFunction::exp_rate(0.1).unwrap()],
            &mono(0.3),
        )
        .unwrap();
        assert_eq!(v.series_verdict, Some(SeriesVerdict::Diverges));
        assert!(matches!(&v.conclusion, Conclusion::HypothesisFailed(r) if r.contains("non-integer")));

        // Non-integer base on the convergence side is fine.
        let v = rectangle_verdict(
            &bv(&[2.0, 2.5]),
            &[ApproxFunction::exp_rate(0.1).unwrap(), ApproxFunction::exp_rate(0.1).unwrap()],
            &mono(1.9),
        )
        .unwrap();
        assert_eq!(v.conclusion, Conclusion::MeasureZero);
    }

    #[test]
    fn multiplicative_verdict_examples() {
        // d=1, psi = n^(-2), g = r: series Σ n^(-2) converges.
        let v = multiplicative_verdict(
            &bv(&[2.0]),
            &ApproxFunction::power(-2.0).unwrap(),
            &mono(1.0),
        )
        .unwrap();
        assert_eq!(v.tag, "multiplicative_d1");
        assert_eq!(v.conclusion, Conclusion::MeasureZero);
        let form = v.series_form.unwrap();
        assert_eq!(form.lambda, 0.0);
        assert!((form.q + 2.0).abs() < 1e-12);

        // d=2, boundary exponent diverges: full measure.
        let s = (2.0 * 3.0_f64.ln() + 1.0) / (3.0_f64.ln() + 1.0);
        let v = multiplicative_verdict(
            &bv(&[2.0, 3.0]),
            &ApproxFunction::exp_rate(1.0).unwrap(),
            &mono(s),
        )
        .unwrap();
        assert_eq!(v.tag, "multiplicative");
        assert_eq!(v.conclusion, Conclusion::FullMeasure);
        assert!(v.boundary_detail.is_some());
        assert!((s - 1.5235).abs() < 1e-3);
        assert!(1.0 < s && s < 2.0);

        // d=2, f = r^2 fails the upper exponent bound.
        let v = multiplicative_verdict(
            &bv(&[2.0, 3.0]),
            &ApproxFunction::exp_rate(1.0).unwrap(),
            &mono(2.0),
        )
        .unwrap();
        assert!(matches!(&v.conclusion, Conclusion::HypothesisFailed(r) if r.contains("f ⪯ s < d")));
    }

    #[test]
    fn w2star_verdict_examples() {
        // Fast rate, r ⪯ f: measure zero with no series needed.
        let v = w2star_verdict(2.0, &mono(1.0)).unwrap();
        assert_eq!(v.conclusion, Conclusion::MeasureZero);
        assert!(v.series_form.is_none());

        // Slow rate, f ≺ r: infinite measure (full).
        let v = w2star_verdict(1.0, &mono(0.9)).unwrap();
        assert_eq!(v.conclusion, Conclusion::FullMeasure);

        // Fast rate at the boundary exponent: divergent series, full.
        let s = 6.0_f64.ln() / (2.0_f64.ln() + 2.0);
        let v = w2star_verdict(2.0, &mono(s)).unwrap();
        assert_eq!(v.conclusion, Conclusion::FullMeasure);
        assert_eq!(v.series_verdict, Some(SeriesVerdict::Diverges));
        assert!(v.boundary_detail.is_some());

        // f incomparable with r: hypothesis failure.
        let f = DimensionFunction::new(1.5, -1.0, 1.0).unwrap();
        let v = w2star_verdict(2.0, &f).unwrap();
        assert!(matches!(v.conclusion, Conclusion::HypothesisFailed(_)));
    }

    #[test]
    fn w2star_hdim_values() {
        assert_eq!(w2star_hdim(0.5), 1.0);
        let v = w2star_hdim(2.0);
        assert!((v - (6.0_f64.ln() / (2.0_f64.ln() + 2.0))).abs() < 1e-15);
        assert!((v - 0.665).abs() < 1e-3);
    }

    #[test]
    fn d1_reduction_terms_agree_exactly() {
        // For g ⪯ r the rectangle series and the d=1 multiplicative series
        // coincide term by term, bit for bit.
        let cases = [
            (2.0, ApproxFunction::exp_rate(0.7).unwrap(), mono(0.8)),
            (2.5, ApproxFunction::power(-1.5).unwrap(), mono(1.0)),
            (3.0, ApproxFunction::gaussian(0.3).unwrap(), DimensionFunction::new(0.6, 0.25, 2.0).unwrap()),
        ];
        for (b, psi, g) in cases {
            let betas = bv(&[b]);
            for n in 2..=30 {
                let rect = rectangle_ln_term(&betas, &[psi], &g, n).unwrap();
                let mult = multiplicative_d1_ln_term(betas.get(0), &psi, &g, n);
                assert_eq!(rect.to_bits(), mult.to_bits(), "b={b} n={n}");
            }
        }
    }

    #[test]
    fn scale_invariance_of_verdicts() {
        let betas = bv(&[2.0, 3.0]);
        let psis =
            [ApproxFunction::exp_rate(2.0).unwrap(), ApproxFunction::gaussian(1.0).unwrap()];
        for s in [0.4, 6.0_f64.ln() / (2.0_f64.ln() + 2.0), 0.9, 1.3] {
            let f = mono(s);
            let scaled = f.with_scale(7.25).unwrap();
            let v1 = rectangle_verdict(&betas, &psis, &f).unwrap();
            let v2 = rectangle_verdict(&betas, &psis, &scaled).unwrap();
            assert_eq!(v1.conclusion, v2.conclusion, "s={s}");
        }
    }

    #[test]
    fn verdict_json_shape() {
        // t = 2 > log 3, f = r^0.9 ≺ r: series converges (0.9 > log6/(log2+2)).
        let v = w2star_verdict(2.0, &mono(0.9)).unwrap();
        let j = v.to_json();
        assert_eq!(j["tag"], "w2star");
        assert!(j["hypothesis_checks"].as_array().unwrap().len() >= 2);
        assert!(j["series"]["gamma"].is_number());
        assert_eq!(j["conclusion"], "MeasureZero");
    }

    #[test]
    fn partial_sum_mode_reports_undetermined() {
        let rep = numeric_partial_sums(|n| -2.0 * (n as f64).ln(), 1, 1000).unwrap();
        assert_eq!(rep.verdict, "Undetermined");
        assert!((rep.partial_sum - std::f64::consts::PI * std::f64::consts::PI / 6.0).abs() < 1e-2);
        assert_eq!(rep.tail_terms.len(), 8);
    }
}
