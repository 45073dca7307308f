//! Exact β-expansion digits, admissibility, cylinder intervals, and
//! full-cylinder enumeration/counting for arbitrary real β > 1.
//!
//! The admissibility machinery is built on one primitive: recursive interval
//! subdivision. A node of the subdivision tree is a cylinder together with
//! its "tail" t ∈ (0,1], the length of the image of the cylinder under the
//! n-fold map (so the cylinder interval has length t·β^(−n), and t = 1 means
//! the cylinder is full). The children of a node with tail t carry digits
//! 0,…,⌈βt⌉−1; a child with digit j has tail min(1, βt−j). A word is
//! admissible iff walking it through this tree never runs out of digits.
//!
//! Counting without enumeration: grouping tree nodes by their tail value
//! shows every non-full node's tail lies on the forward orbit of 1, which
//! yields a convolution recursion for the number of full words driven by the
//! greedy expansion of 1 (see `count_full_words`). The recursion is exact
//! big-integer arithmetic and is cross-validated against the enumerator in
//! the test suite; it exists because word counts grow like β^n while the
//! enumerator is capped.

use crate::error::{Error, Result};
use crate::prec::{Mp, DEFAULT_PRECISION_BITS};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

/// Default cap on the number of cylinders a single enumeration call may
/// produce before reporting a resource error.
pub const DEFAULT_ENUM_CAP: usize = 50_000_000;

/// The dynamical base β > 1 with its working precision.
#[derive(Clone, Debug)]
pub struct Beta {
    value: Mp,
    value_f64: f64,
    is_integer: bool,
    int_value: Option<u64>,
    precision_bits: usize,
}

impl Beta {
    /// Integer base β ≥ 2.
    pub fn from_u64(b: u64, precision_bits: usize) -> Result<Self> {
        if b < 2 {
            return Err(Error::Domain(format!("beta must exceed 1, got {b}")));
        }
        Ok(Beta {
            value: Mp::from_u64(b, precision_bits),
            value_f64: b as f64,
            is_integer: true,
            int_value: Some(b),
            precision_bits,
        })
    }

    /// Base given by an exact binary double (e.g. 2.5, 1.5).
    pub fn from_f64(x: f64, precision_bits: usize) -> Result<Self> {
        if !(x > 1.0) || !x.is_finite() {
            return Err(Error::Domain(format!("beta must exceed 1, got {x}")));
        }
        if x.fract() == 0.0 {
            return Self::from_u64(x as u64, precision_bits);
        }
        Ok(Beta {
            value: Mp::from_f64(x, precision_bits),
            value_f64: x,
            is_integer: false,
            int_value: None,
            precision_bits,
        })
    }

    /// β = (1+√5)/2.
    pub fn golden(precision_bits: usize) -> Self {
        let value = Mp::golden_ratio(precision_bits);
        let value_f64 = value.to_f64();
        Beta { value, value_f64, is_integer: false, int_value: None, precision_bits }
    }

    /// β = π.
    pub fn pi_value(precision_bits: usize) -> Self {
        let value = Mp::pi(precision_bits);
        let value_f64 = value.to_f64();
        Beta { value, value_f64, is_integer: false, int_value: None, precision_bits }
    }

    pub fn with_default_precision_u64(b: u64) -> Result<Self> {
        Self::from_u64(b, DEFAULT_PRECISION_BITS)
    }

    pub fn value(&self) -> &Mp {
        &self.value
    }

    pub fn as_f64(&self) -> f64 {
        self.value_f64
    }

    pub fn is_integer(&self) -> bool {
        self.is_integer
    }

    pub fn int_value(&self) -> Option<u64> {
        self.int_value
    }

    pub fn precision_bits(&self) -> usize {
        self.precision_bits
    }

    /// Largest digit of the alphabet {0, …, ⌈β⌉−1}.
    pub fn alphabet_max(&self) -> u32 {
        match self.int_value {
            Some(b) => (b - 1) as u32,
            None => self.value_f64.floor() as u32,
        }
    }

    /// Snapping threshold for "this multiprecision value is an integer in
    /// the reals": far above accumulated rounding error, far below any
    /// genuine non-integer gap reachable at desk scale.
    fn snap_eps(&self) -> f64 {
        2.0_f64.powi(-((self.precision_bits / 2) as i32))
    }

    /// Check that n subdivision levels stay within the precision budget
    /// (errors grow like β^n·2^(−p)).
    fn check_depth(&self, n: u32) -> Result<()> {
        let bits_used = (n as f64) * self.value_f64.log2();
        if bits_used > (self.precision_bits as f64) / 2.0 - 8.0 {
            return Err(Error::Precondition(format!(
                "level {n} at base {} needs more than the configured {} precision bits",
                self.value_f64, self.precision_bits
            )));
        }
        Ok(())
    }

    /// β·t split into integer part and fractional tail, with snapping of
    /// real-exact integers (e.g. the terminating orbit of 1 for β=(1+√5)/2).
    fn mul_split(&self, t: &Mp) -> (u64, Mp) {
        let x = self.value.mul(t);
        let k = x.floor_u64();
        if x.dist_to_nearest_int() < self.snap_eps() {
            let rounded = Mp::from_f64(x.to_f64().round(), self.precision_bits);
            let k = rounded.to_f64() as u64;
            (k, Mp::zero(self.precision_bits))
        } else {
            (k, x.sub(&Mp::from_u64(k, self.precision_bits)))
        }
    }
}

/// An ordered tuple of bases 1 < β_1 ≤ … ≤ β_d.
#[derive(Clone, Debug)]
pub struct BetaVector {
    betas: Vec<Beta>,
}

impl BetaVector {
    pub fn new(betas: Vec<Beta>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::Domain("need at least one base".into()));
        }
        for w in betas.windows(2) {
            if w[0].as_f64() > w[1].as_f64() {
                return Err(Error::Domain("betas must be nondecreasing".into()));
            }
        }
        Ok(BetaVector { betas })
    }

    pub fn d(&self) -> usize {
        self.betas.len()
    }

    pub fn get(&self, i: usize) -> &Beta {
        &self.betas[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Beta> {
        self.betas.iter()
    }

    pub fn all_integer(&self) -> bool {
        self.betas.iter().all(|b| b.is_integer())
    }

    pub fn as_f64s(&self) -> Vec<f64> {
        self.betas.iter().map(|b| b.as_f64()).collect()
    }

    /// Sum of ln β_i (the log of the per-level cylinder-count product).
    pub fn ln_product(&self) -> f64 {
        self.betas.iter().map(|b| b.as_f64().ln()).sum()
    }
}

/// A finite digit word in the alphabet of a base.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitSeq {
    pub digits: Vec<u32>,
}

impl DigitSeq {
    pub fn new(digits: Vec<u32>) -> Self {
        DigitSeq { digits }
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Digits concatenated without separator (alphabets in this toolkit
    /// have at most 10 symbols).
    pub fn compact(&self) -> String {
        self.digits.iter().map(|d| d.to_string()).collect()
    }
}

impl std::fmt::Display for DigitSeq {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.compact())
    }
}

/// A level-n cylinder: an admissible word together with its exact interval
/// [left, left+length) and fullness flag.
#[derive(Clone, Debug)]
pub struct Cylinder {
    pub word: DigitSeq,
    left: Mp,
    /// Image length of the cylinder under the n-fold map; 1 means full.
    tail: Mp,
    tail_is_one: bool,
    level: u32,
    /// Conservative bound on absolute endpoint rounding error.
    pub length_error: f64,
    beta_pow_neg_n: Mp,
}

impl Cylinder {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn left(&self) -> &Mp {
        &self.left
    }

    pub fn left_f64(&self) -> f64 {
        self.left.to_f64()
    }

    /// Exact interval length tail·β^(−n).
    pub fn length(&self) -> Mp {
        self.tail.mul(&self.beta_pow_neg_n)
    }

    pub fn length_f64(&self) -> f64 {
        self.length().to_f64()
    }

    pub fn right_f64(&self) -> f64 {
        self.left_f64() + self.length_f64()
    }

    /// β^(−n) for this cylinder's level (the length of a full cylinder).
    pub fn full_length(&self) -> &Mp {
        &self.beta_pow_neg_n
    }

    pub fn is_full(&self) -> bool {
        self.tail_is_one
    }

    /// Image length of the cylinder under the n-fold map (1 iff full).
    pub fn tail(&self) -> &Mp {
        &self.tail
    }

    /// Re-decide fullness from the interval length alone, honouring the
    /// tracked rounding error. Errors with `Indeterminate` when the gap
    /// between `length` and β^(−n) is inside the error band.
    pub fn decide_full(&self) -> Result<bool> {
        let gap = self.beta_pow_neg_n.sub(&self.length()).to_f64();
        if gap.abs() <= self.length_error {
            Ok(true)
        } else if gap > 2.0 * self.length_error {
            Ok(false)
        } else {
            Err(Error::Indeterminate(format!(
                "length gap {gap:.3e} inside error band {:.3e}",
                self.length_error
            )))
        }
    }
}

/// Serializable flat record for CSV/JSON export.
#[derive(Clone, Debug, Serialize)]
pub struct CylinderRecord {
    pub word: String,
    pub left: f64,
    pub length: f64,
    pub is_full: bool,
}

impl From<&Cylinder> for CylinderRecord {
    fn from(c: &Cylinder) -> Self {
        CylinderRecord {
            word: c.word.compact(),
            left: c.left_f64(),
            length: c.length_f64(),
            is_full: c.is_full(),
        }
    }
}

/// CSV line `word;left;length;is_full`.
pub fn cylinder_csv_line(c: &Cylinder) -> String {
    format!("{};{};{};{}", c.word.compact(), c.left_f64(), c.length_f64(), c.is_full())
}

fn length_error_bound(beta: &Beta, n: u32) -> f64 {
    // Each subdivision level performs a bounded number of correctly rounded
    // operations on quantities ≤ β; fold the β-powered error growth into a
    // conservative linear-in-n bound (depth is pre-checked so that
    // β^n·2^(−p) is negligible against this).
    ((3 * n + 8) as f64) * 2.0_f64.powi(2 - (beta.precision_bits() as i32))
}

/// First n digits of the greedy β-expansion of x ∈ [0,1).
pub fn beta_digits(x: f64, beta: &Beta, n: u32) -> Result<DigitSeq> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("x must lie in [0,1), got {x}")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    beta.check_depth(n)?;
    let mut t = Mp::from_f64(x, beta.precision_bits());
    let mut digits = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let (k, rest) = beta.mul_split(&t);
        digits.push(k as u32);
        t = rest;
    }
    Ok(DigitSeq::new(digits))
}

/// Greedy expansion of 1: digits d_k = ⌊β·t_(k−1)⌋ along the orbit
/// t_k = β·t_(k−1) − d_k starting at t_0 = 1, with exact termination
/// detection. For integer β this is (β, 0, 0, …) terminating immediately.
#[derive(Clone, Debug)]
pub struct OneExpansion {
    pub digits: Vec<u32>,
    /// Some(m): the orbit hits 0 after emitting digit m (1-based).
    pub terminated: Option<usize>,
}

pub fn one_expansion(beta: &Beta, n: u32) -> Result<OneExpansion> {
    if let Some(b) = beta.int_value() {
        let mut digits = vec![0u32; n as usize];
        if n >= 1 {
            digits[0] = b as u32;
        }
        return Ok(OneExpansion { digits, terminated: Some(1) });
    }
    beta.check_depth(n)?;
    let mut t = Mp::one(beta.precision_bits());
    let mut digits = Vec::with_capacity(n as usize);
    let mut terminated = None;
    for k in 1..=n {
        if terminated.is_some() {
            digits.push(0);
            continue;
        }
        let (d, rest) = beta.mul_split(&t);
        digits.push(d as u32);
        if rest.is_zero() {
            terminated = Some(k as usize);
        }
        t = rest;
    }
    Ok(OneExpansion { digits, terminated })
}

/// The length-n prefix of the quasi-greedy expansion of 1: the
/// lexicographically largest sequence every shift of which is admissible.
/// Equals the greedy expansion of 1 when that does not terminate; when the
/// greedy expansion terminates as (d_1,…,d_m) it is (d_1,…,d_(m−1),d_m−1)
/// repeated cyclically.
pub fn quasi_greedy_one(beta: &Beta, n: u32) -> Result<DigitSeq> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let exp = one_expansion(beta, n)?;
    match exp.terminated {
        None => Ok(DigitSeq::new(exp.digits)),
        Some(m) => {
            let mut period: Vec<u32> = exp.digits[..m].to_vec();
            let last = period.last_mut().expect("nonempty period");
            *last -= 1;
            let digits = (0..n as usize).map(|i| period[i % m]).collect();
            Ok(DigitSeq::new(digits))
        }
    }
}

/// Number of admissible words of length n (the level-n cylinder count),
/// exactly, via the orbit-of-1 convolution recursion.
pub fn count_words(beta: &Beta, n: u32) -> Result<BigUint> {
    if let Some(b) = beta.int_value() {
        return Ok(BigUint::from(b).pow(n));
    }
    let (full, exp) = full_counts(beta, n)?;
    let mut total = full[n as usize].clone();
    let live = match exp.terminated {
        Some(m) => m - 1,
        None => n as usize,
    };
    for j in 1..=std::cmp::min(live, n as usize) {
        total += &full[(n as usize) - j];
    }
    Ok(total)
}

/// Number of full words of length n, exactly.
pub fn count_full(beta: &Beta, n: u32) -> Result<BigUint> {
    if let Some(b) = beta.int_value() {
        return Ok(BigUint::from(b).pow(n));
    }
    let (full, _) = full_counts(beta, n)?;
    Ok(full[n as usize].clone())
}

/// Full-word counts F_0..F_n with F_n = Σ_k d_k·F_(n−k) where d is the
/// greedy expansion of 1. Grouping subdivision-tree nodes by tail value
/// proves the recursion: a full node spawns ⌊β⌋ full children, and the node
/// whose tail is the k-th orbit point of 1 spawns d_(k+1) full children.
fn full_counts(beta: &Beta, n: u32) -> Result<(Vec<BigUint>, OneExpansion)> {
    let exp = one_expansion(beta, n)?;
    let mut full: Vec<BigUint> = Vec::with_capacity(n as usize + 1);
    full.push(BigUint::one());
    for m in 1..=(n as usize) {
        let mut acc = BigUint::zero();
        for k in 1..=m {
            let d = exp.digits[k - 1];
            if d > 0 {
                acc += &full[m - k] * BigUint::from(d);
            }
        }
        full.push(acc);
    }
    Ok((full, exp))
}

fn root(beta: &Beta) -> Cylinder {
    let p = beta.precision_bits();
    Cylinder {
        word: DigitSeq::new(vec![]),
        left: Mp::zero(p),
        tail: Mp::one(p),
        tail_is_one: true,
        level: 0,
        length_error: length_error_bound(beta, 0),
        beta_pow_neg_n: Mp::one(p),
    }
}

/// Children of a cylinder in the subdivision tree, in digit order.
pub fn children(beta: &Beta, cyl: &Cylinder) -> Result<Vec<Cylinder>> {
    let p = beta.precision_bits();
    let n1 = cyl.level + 1;
    beta.check_depth(n1)?;
    let scale = cyl.beta_pow_neg_n.div(beta.value());
    let (digit_count, last_tail) = if cyl.tail_is_one {
        match beta.int_value() {
            Some(b) => (b, None),
            None => {
                let k = beta.as_f64().floor() as u64;
                (k + 1, Some(beta.value().sub(&Mp::from_u64(k, p))))
            }
        }
    } else {
        let (k, rest) = beta.mul_split(&cyl.tail);
        if rest.is_zero() {
            (k, None)
        } else {
            (k + 1, Some(rest))
        }
    };
    let mut out = Vec::with_capacity(digit_count as usize);
    for j in 0..digit_count {
        let mut word = cyl.word.digits.clone();
        word.push(j as u32);
        let left = cyl.left.add(&Mp::from_u64(j, p).mul(&scale));
        let is_last = j + 1 == digit_count;
        let (tail, tail_is_one) = if is_last {
            match &last_tail {
                Some(t) => (t.clone(), false),
                None => (Mp::one(p), true),
            }
        } else {
            (Mp::one(p), true)
        };
        out.push(Cylinder {
            word: DigitSeq::new(word),
            left,
            tail,
            tail_is_one,
            level: n1,
            length_error: length_error_bound(beta, n1),
            beta_pow_neg_n: scale.clone(),
        });
    }
    Ok(out)
}

fn enumerate_with<F: FnMut(&Cylinder) -> bool>(
    beta: &Beta,
    n: u32,
    cap: usize,
    keep: &mut F,
    out: &mut Vec<Cylinder>,
) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    beta.check_depth(n)?;
    let mut stack = vec![root(beta)];
    while let Some(node) = stack.pop() {
        if node.level == n {
            if keep(&node) {
                if out.len() >= cap {
                    return Err(Error::Resource(format!(
                        "enumeration cap of {cap} cylinders exceeded at base {} level {n}",
                        beta.as_f64()
                    )));
                }
                out.push(node);
            }
            continue;
        }
        let mut kids = children(beta, &node)?;
        // DFS with a stack reverses order; push children in reverse so the
        // output is canonical lexicographic.
        kids.reverse();
        stack.extend(kids);
    }
    Ok(())
}

/// All level-n cylinders in lexicographic word order.
pub fn enumerate_cylinders(beta: &Beta, n: u32) -> Result<Vec<Cylinder>> {
    enumerate_cylinders_capped(beta, n, DEFAULT_ENUM_CAP)
}

pub fn enumerate_cylinders_capped(beta: &Beta, n: u32, cap: usize) -> Result<Vec<Cylinder>> {
    let mut out = Vec::new();
    enumerate_with(beta, n, cap, &mut |_| true, &mut out)?;
    Ok(out)
}

/// All full level-n cylinders, optionally restricted to those contained in
/// `window` = [window.0, window.1).
pub fn enumerate_full(beta: &Beta, n: u32, window: Option<(f64, f64)>) -> Result<Vec<Cylinder>> {
    enumerate_full_capped(beta, n, window, DEFAULT_ENUM_CAP)
}

pub fn enumerate_full_capped(
    beta: &Beta,
    n: u32,
    window: Option<(f64, f64)>,
    cap: usize,
) -> Result<Vec<Cylinder>> {
    let mut out = Vec::new();
    let mut keep = |c: &Cylinder| {
        if !c.is_full() {
            return false;
        }
        match window {
            None => true,
            Some((a, b)) => c.left_f64() >= a && c.right_f64() <= b,
        }
    };
    enumerate_with(beta, n, cap, &mut keep, &mut out)?;
    Ok(out)
}

/// Walk a word through the subdivision tree; `None` when inadmissible.
pub fn word_cylinder(beta: &Beta, word: &DigitSeq) -> Result<Option<Cylinder>> {
    beta.check_depth(word.len() as u32)?;
    let mut node = root(beta);
    for &d in &word.digits {
        let kids = children(beta, &node)?;
        match kids.into_iter().find(|c| *c.word.digits.last().unwrap() == d) {
            Some(next) => node = next,
            None => return Ok(None),
        }
    }
    Ok(Some(node))
}

/// Subdivision-based admissibility (the authoritative criterion).
pub fn is_admissible(beta: &Beta, word: &DigitSeq) -> Result<bool> {
    Ok(word_cylinder(beta, word)?.is_some())
}

/// Lexicographic admissibility cross-check: every shift of the word must be
/// lexicographically at most the quasi-greedy expansion of 1.
pub fn is_admissible_lex(beta: &Beta, word: &DigitSeq) -> Result<bool> {
    let n = word.len();
    if n == 0 {
        return Ok(true);
    }
    let qg = quasi_greedy_one(beta, n as u32)?;
    for k in 0..n {
        let shifted = &word.digits[k..];
        if shifted > &qg.digits[..shifted.len()] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Report from covering [0,1) by full cylinders of levels N..=depth.
#[derive(Clone, Debug, Serialize)]
pub struct CoverageReport {
    pub start_level: u32,
    pub depth: u32,
    /// (level, uncovered measure after merging this level's full cylinders).
    pub residuals: Vec<(u32, f64)>,
    /// Geometric decay factor the residual must respect: 1 − 1/β.
    pub decay_factor: f64,
    /// Residual at each level ≤ decay_factor^(level−N+1) (small slack for
    /// endpoint rounding).
    pub geometric_bound_ok: bool,
}

impl CoverageReport {
    pub fn final_uncovered(&self) -> f64 {
        self.residuals.last().map(|&(_, u)| u).unwrap_or(1.0)
    }
}

/// Measure how much of [0,1) the full cylinders of levels N..=depth cover.
/// The uncovered remainder must decay at least geometrically with factor
/// 1 − 1/β.
pub fn full_cover_check(beta: &Beta, start: u32, depth: u32) -> Result<CoverageReport> {
    if depth < start || start == 0 {
        return Err(Error::Domain("need 1 <= start <= depth".into()));
    }
    let mut covered: Vec<(f64, f64)> = Vec::new();
    let mut residuals = Vec::new();
    for n in start..=depth {
        for c in enumerate_full(beta, n, None)? {
            covered.push((c.left_f64(), c.right_f64()));
        }
        covered = merge_intervals(&covered);
        let measure: f64 = covered.iter().map(|&(a, b)| b - a).sum();
        residuals.push((n, (1.0 - measure).max(0.0)));
    }
    let decay_factor = 1.0 - 1.0 / beta.as_f64();
    let geometric_bound_ok = residuals
        .iter()
        .all(|&(n, u)| u <= decay_factor.powi((n - start + 1) as i32) + 1e-12);
    Ok(CoverageReport { start_level: start, depth, residuals, decay_factor, geometric_bound_ok })
}

/// Sort-and-merge a list of half-open intervals into disjoint ones.
pub fn merge_intervals(intervals: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = intervals.iter().copied().filter(|&(a, b)| b > a).collect();
    v.sort_by(|x, y| x.partial_cmp(y).expect("finite endpoints"));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: usize = DEFAULT_PRECISION_BITS;

    fn beta_f(x: f64) -> Beta {
        Beta::from_f64(x, P).unwrap()
    }

    #[test]
    fn digits_dyadic() {
        let b = Beta::from_u64(2, P).unwrap();
        assert_eq!(beta_digits(0.5, &b, 4).unwrap().digits, vec![1, 0, 0, 0]);
    }

    #[test]
    fn digits_base3_half() {
        let b = Beta::from_u64(3, P).unwrap();
        assert_eq!(beta_digits(0.5, &b, 3).unwrap().digits, vec![1, 1, 1]);
    }

    #[test]
    fn digits_golden() {
        let b = Beta::golden(P);
        let x = b.as_f64() - 1.0;
        assert_eq!(beta_digits(x, &b, 3).unwrap().digits, vec![1, 0, 0]);
    }

    #[test]
    fn digits_domain_error() {
        let b = Beta::from_u64(2, P).unwrap();
        assert!(beta_digits(1.0, &b, 3).is_err());
        assert!(beta_digits(-0.1, &b, 3).is_err());
    }

    #[test]
    fn quasi_greedy_integer_bases() {
        let b2 = Beta::from_u64(2, P).unwrap();
        assert_eq!(quasi_greedy_one(&b2, 5).unwrap().digits, vec![1; 5]);
        let b3 = Beta::from_u64(3, P).unwrap();
        assert_eq!(quasi_greedy_one(&b3, 3).unwrap().digits, vec![2; 3]);
    }

    #[test]
    fn quasi_greedy_golden() {
        let b = Beta::golden(P);
        assert_eq!(quasi_greedy_one(&b, 6).unwrap().digits, vec![1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn enumerate_dyadic() {
        let b = Beta::from_u64(2, P).unwrap();
        let cyls = enumerate_cylinders(&b, 3).unwrap();
        assert_eq!(cyls.len(), 8);
        for c in &cyls {
            assert!((c.length_f64() - 0.125).abs() < 1e-30);
            assert!(c.is_full());
        }
    }

    #[test]
    fn enumerate_two_point_five_level1() {
        let b = beta_f(2.5);
        let cyls = enumerate_cylinders(&b, 1).unwrap();
        let lens: Vec<f64> = cyls.iter().map(|c| c.length_f64()).collect();
        assert_eq!(lens.len(), 3);
        assert!((lens[0] - 0.4).abs() < 1e-25);
        assert!((lens[1] - 0.4).abs() < 1e-25);
        assert!((lens[2] - 0.2).abs() < 1e-25);
        assert!(!cyls[2].is_full());
    }

    #[test]
    fn enumerate_golden_level2() {
        let b = Beta::golden(P);
        let cyls = enumerate_cylinders(&b, 2).unwrap();
        let words: Vec<String> = cyls.iter().map(|c| c.word.compact()).collect();
        assert_eq!(words, vec!["00", "01", "10"]);
    }

    #[test]
    fn fullness_examples() {
        let b = Beta::golden(P);
        let c = word_cylinder(&b, &DigitSeq::new(vec![0, 1])).unwrap().unwrap();
        assert!(!c.is_full());
        assert!(!c.decide_full().unwrap());
        let b25 = beta_f(2.5);
        let c = word_cylinder(&b25, &DigitSeq::new(vec![2])).unwrap().unwrap();
        assert!(!c.is_full());
        let b2 = Beta::from_u64(2, P).unwrap();
        for c in enumerate_cylinders(&b2, 4).unwrap() {
            assert!(c.is_full());
            assert!(c.decide_full().unwrap());
        }
    }

    #[test]
    fn full_enumeration_examples() {
        let b3 = Beta::from_u64(3, P).unwrap();
        assert_eq!(enumerate_full(&b3, 4, None).unwrap().len(), 81);

        let g = Beta::golden(P);
        let full3: Vec<String> =
            enumerate_full(&g, 3, None).unwrap().iter().map(|c| c.word.compact()).collect();
        assert_eq!(full3, vec!["000", "010", "100"]);

        let b2 = Beta::from_u64(2, P).unwrap();
        let w: Vec<String> = enumerate_full(&b2, 2, Some((0.0, 0.5)))
            .unwrap()
            .iter()
            .map(|c| c.word.compact())
            .collect();
        assert_eq!(w, vec!["00", "01"]);
    }

    #[test]
    fn counts_agree_with_enumeration() {
        for (b, max_n) in [
            (beta_f(1.5), 12u32),
            (Beta::golden(P), 14),
            (beta_f(2.5), 10),
            (Beta::pi_value(P), 9),
        ] {
            for n in 1..=max_n {
                let enumd = enumerate_cylinders(&b, n).unwrap();
                let full = enumd.iter().filter(|c| c.is_full()).count();
                assert_eq!(
                    count_words(&b, n).unwrap(),
                    BigUint::from(enumd.len()),
                    "word count base {} level {n}",
                    b.as_f64()
                );
                assert_eq!(
                    count_full(&b, n).unwrap(),
                    BigUint::from(full),
                    "full count base {} level {n}",
                    b.as_f64()
                );
            }
        }
    }

    #[test]
    fn counts_integer_base_exact() {
        let b = Beta::from_u64(3, P).unwrap();
        assert_eq!(count_words(&b, 9).unwrap(), BigUint::from(19683u32));
        assert_eq!(count_full(&b, 9).unwrap(), BigUint::from(19683u32));
    }

    #[test]
    fn digit_interval_consistency_sampled() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for b in [beta_f(2.5), Beta::golden(P), Beta::from_u64(2, P).unwrap()] {
            let n = 6;
            let cyls = enumerate_cylinders(&b, n).unwrap();
            for _ in 0..200 {
                let x: f64 = rng.gen();
                let d = beta_digits(x, &b, n).unwrap();
                let host = cyls
                    .iter()
                    .find(|c| c.left_f64() <= x && x < c.right_f64())
                    .expect("partition covers x");
                assert_eq!(d, host.word, "x={x} base {}", b.as_f64());
            }
        }
    }

    #[test]
    fn partition_invariant() {
        for b in [beta_f(1.5), Beta::golden(P), beta_f(2.5), Beta::pi_value(P)] {
            let n = 8;
            let cyls = enumerate_cylinders(&b, n).unwrap();
            let total: f64 = cyls.iter().map(|c| c.length_f64()).sum();
            let tol = (n as f64) * 2.0_f64.powi(4 - P as i32) + 1e-12;
            assert!((total - 1.0).abs() <= tol, "partition sums to {total}");
            for w in cyls.windows(2) {
                // endpoint values pass through f64 conversion, so allow
                // f64-scale slack on top of the tracked multiprecision error
                assert!(w[0].right_f64() <= w[1].left_f64() + w[0].length_error + 1e-12);
            }
        }
    }

    #[test]
    fn lex_admissibility_matches_subdivision() {
        for b in [Beta::golden(P), beta_f(2.5)] {
            let n = 7;
            let cyls = enumerate_cylinders(&b, n).unwrap();
            let admissible: std::collections::HashSet<Vec<u32>> =
                cyls.iter().map(|c| c.word.digits.clone()).collect();
            // all words over the alphabet at this level
            let amax = b.alphabet_max();
            let mut all = vec![vec![]];
            for _ in 0..n {
                let mut next = Vec::new();
                for w in &all {
                    for d in 0..=amax {
                        let mut w2: Vec<u32> = w.clone();
                        w2.push(d);
                        next.push(w2);
                    }
                }
                all = next;
            }
            for w in all {
                let seq = DigitSeq::new(w.clone());
                let sub = admissible.contains(&w);
                let lex = is_admissible_lex(&b, &seq).unwrap();
                assert_eq!(sub, lex, "word {:?} base {}", w, b.as_f64());
                assert_eq!(sub, is_admissible(&b, &seq).unwrap());
            }
        }
    }

    #[test]
    fn concatenation_of_full_words() {
        let b = Beta::golden(P);
        let full2 = enumerate_full(&b, 2, None).unwrap();
        let full3 = enumerate_full(&b, 3, None).unwrap();
        for u in &full2 {
            for v in &full3 {
                let mut w = u.word.digits.clone();
                w.extend_from_slice(&v.word.digits);
                let c = word_cylinder(&b, &DigitSeq::new(w)).unwrap().expect("uv admissible");
                assert!(c.is_full(), "uv full");
                let prod = u.length_f64() * v.length_f64();
                assert!((c.length_f64() - prod).abs() < 1e-20);
            }
        }
    }

    #[test]
    fn cover_check_full_shift() {
        let b = Beta::from_u64(2, P).unwrap();
        let r = full_cover_check(&b, 1, 1).unwrap();
        assert!(r.final_uncovered() < 1e-12);
        assert!(r.geometric_bound_ok);
    }

    #[test]
    fn cover_check_golden() {
        let b = Beta::golden(P);
        let r = full_cover_check(&b, 2, 8).unwrap();
        let bound = (1.0 - 1.0 / b.as_f64()).powi(7);
        assert!(r.final_uncovered() <= bound + 1e-9, "uncovered {}", r.final_uncovered());
        assert!(r.geometric_bound_ok);
    }

    #[test]
    fn cover_check_two_point_five() {
        let b = beta_f(2.5);
        let r = full_cover_check(&b, 1, 6).unwrap();
        assert!(r.final_uncovered() <= 0.6_f64.powi(6) + 1e-9);
        assert!(r.geometric_bound_ok);
    }

    #[test]
    fn enumeration_cap_respected() {
        let b = Beta::from_u64(2, P).unwrap();
        let err = enumerate_cylinders_capped(&b, 10, 100).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    #[test]
    fn merge_intervals_basic() {
        let m = merge_intervals(&[(0.0, 0.5), (0.25, 0.75), (0.8, 0.9)]);
        assert_eq!(m, vec![(0.0, 0.75), (0.8, 0.9)]);
    }
}
