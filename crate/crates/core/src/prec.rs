//! Thin wrapper around `astro_float::BigFloat` fixing a working precision.
//!
//! Endpoint arithmetic for cylinder subdivision is done at a configurable
//! precision (`precision_bits`, default 128). Every operation is correctly
//! rounded, so per-operation relative error is at most `2^(1-p)`; callers
//! accumulate conservative absolute bounds from the operation counts.

use astro_float::{BigFloat, Consts, RoundingMode};

/// Default working precision in bits for endpoint arithmetic.
pub const DEFAULT_PRECISION_BITS: usize = 128;

const RM: RoundingMode = RoundingMode::ToEven;

/// A multiprecision real carrying its working precision.
#[derive(Clone, Debug)]
pub struct Mp {
    v: BigFloat,
    p: usize,
}

impl Mp {
    pub fn from_f64(x: f64, p: usize) -> Self {
        Mp { v: BigFloat::from_f64(x, p), p }
    }

    pub fn from_u64(x: u64, p: usize) -> Self {
        Mp { v: BigFloat::from_u64(x, p), p }
    }

    pub fn zero(p: usize) -> Self {
        Mp { v: BigFloat::from_u64(0, p), p }
    }

    pub fn one(p: usize) -> Self {
        Mp { v: BigFloat::from_u64(1, p), p }
    }

    /// (1+sqrt(5))/2 at precision `p`.
    pub fn golden_ratio(p: usize) -> Self {
        let five = BigFloat::from_u64(5, p + 64);
        let sqrt5 = five.sqrt(p + 64, RM);
        let one = BigFloat::from_u64(1, p + 64);
        let two = BigFloat::from_u64(2, p + 64);
        let v = one.add(&sqrt5, p + 64, RM).div(&two, p, RM);
        Mp { v, p }
    }

    pub fn pi(p: usize) -> Self {
        let mut cc = Consts::new().expect("constants cache");
        Mp { v: cc.pi(p, RM), p }
    }

    /// Parse a decimal literal at precision `p`.
    pub fn parse(s: &str, p: usize) -> Option<Self> {
        let mut cc = Consts::new().ok()?;
        let v = BigFloat::parse(s, astro_float::Radix::Dec, p, RM, &mut cc);
        if v.is_nan() {
            None
        } else {
            Some(Mp { v, p })
        }
    }

    pub fn precision_bits(&self) -> usize {
        self.p
    }

    pub fn add(&self, rhs: &Mp) -> Mp {
        Mp { v: self.v.add(&rhs.v, self.p, RM), p: self.p }
    }

    pub fn sub(&self, rhs: &Mp) -> Mp {
        Mp { v: self.v.sub(&rhs.v, self.p, RM), p: self.p }
    }

    pub fn mul(&self, rhs: &Mp) -> Mp {
        Mp { v: self.v.mul(&rhs.v, self.p, RM), p: self.p }
    }

    pub fn div(&self, rhs: &Mp) -> Mp {
        Mp { v: self.v.div(&rhs.v, self.p, RM), p: self.p }
    }

    pub fn mul_u64(&self, k: u64) -> Mp {
        self.mul(&Mp::from_u64(k, self.p))
    }

    pub fn sub_u64(&self, k: u64) -> Mp {
        self.sub(&Mp::from_u64(k, self.p))
    }

    pub fn recip(&self) -> Mp {
        Mp { v: self.v.reciprocal(self.p, RM), p: self.p }
    }

    /// self^k by binary exponentiation (k >= 0).
    pub fn powi(&self, k: u64) -> Mp {
        let mut acc = Mp::one(self.p);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn neg(&self) -> Mp {
        Mp { v: self.v.neg(), p: self.p }
    }

    pub fn abs(&self) -> Mp {
        let mut v = self.v.clone();
        v.set_sign(astro_float::Sign::Pos);
        Mp { v, p: self.p }
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn cmp(&self, rhs: &Mp) -> std::cmp::Ordering {
        self.v.partial_cmp(&rhs.v).expect("finite comparison")
    }

    pub fn lt(&self, rhs: &Mp) -> bool {
        self.cmp(rhs) == std::cmp::Ordering::Less
    }

    pub fn le(&self, rhs: &Mp) -> bool {
        self.cmp(rhs) != std::cmp::Ordering::Greater
    }

    /// Largest integer <= self, as u64 (self must be >= 0 and small).
    pub fn floor_u64(&self) -> u64 {
        let f = self.v.floor();
        // floor of our values is always a small nonnegative integer
        // (a digit bound or similar), so f64 round-trip is exact.
        let x = mp_to_f64(&f, self.p);
        debug_assert!(x >= 0.0 && x < 2.0_f64.powi(52));
        x.round() as u64
    }

    /// Distance to the nearest integer, as f64 (for snapping decisions).
    pub fn dist_to_nearest_int(&self) -> f64 {
        let fl = Mp { v: self.v.floor(), p: self.p };
        let frac = self.sub(&fl).to_f64();
        frac.min(1.0 - frac).abs()
    }

    pub fn to_f64(&self) -> f64 {
        mp_to_f64(&self.v, self.p)
    }
}

/// Convert a BigFloat to f64 via its raw mantissa/exponent parts.
/// (The crate exposes no public f64 conversion.)
fn mp_to_f64(v: &BigFloat, _p: usize) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    if v.is_nan() {
        return f64::NAN;
    }
    if v.is_inf_pos() {
        return f64::INFINITY;
    }
    if v.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let (words, _n, sign, e, _inexact) = v.as_raw_parts().expect("finite number");
    // Mantissa words are little-endian; value = sign * 0.m * 2^e with the
    // top bit of the last word being the 1/2 place.
    let hi = *words.last().expect("nonempty mantissa") as f64;
    let lo = if words.len() >= 2 { words[words.len() - 2] as f64 } else { 0.0 };
    let m = (hi + lo / 18446744073709551616.0) / 18446744073709551616.0;
    let mag = m * 2.0_f64.powi(e);
    match sign {
        astro_float::Sign::Pos => mag,
        astro_float::Sign::Neg => -mag,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_f64() {
        for x in [0.0, 0.5, 1.0, 2.5, 0.1, 1e-30, 123456.789] {
            let m = Mp::from_f64(x, 128);
            assert_eq!(m.to_f64(), x, "roundtrip {x}");
        }
        let m = Mp::from_f64(-0.75, 128);
        assert_eq!(m.to_f64(), -0.75);
    }

    #[test]
    fn golden_ratio_value() {
        let phi = Mp::golden_ratio(128);
        assert!((phi.to_f64() - 1.618033988749895).abs() < 1e-15);
        // phi^2 = phi + 1
        let lhs = phi.mul(&phi);
        let rhs = phi.add(&Mp::one(128));
        assert!(lhs.sub(&rhs).to_f64().abs() < 1e-35);
    }

    #[test]
    fn pi_value() {
        let pi = Mp::pi(128);
        assert!((pi.to_f64() - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn arithmetic_and_floor() {
        let p = 128;
        let a = Mp::from_f64(2.5, p);
        let b = a.mul(&Mp::from_f64(0.4, p));
        assert!((b.to_f64() - 1.0).abs() < 1e-30);
        assert_eq!(Mp::from_f64(3.99, p).floor_u64(), 3);
        assert_eq!(Mp::from_f64(4.0, p).floor_u64(), 4);
    }

    #[test]
    fn snapping_distance() {
        let p = 128;
        let phi = Mp::golden_ratio(p);
        // phi * (phi - 1) = 1 exactly in the reals
        let prod = phi.mul(&phi.sub(&Mp::one(p)));
        assert!(prod.dist_to_nearest_int() < 2.0_f64.powi(-100));
    }

    #[test]
    fn parse_decimal() {
        let m = Mp::parse("2.5", 128).unwrap();
        assert_eq!(m.to_f64(), 2.5);
        assert!(Mp::parse("not a number", 128).is_none());
    }
}
