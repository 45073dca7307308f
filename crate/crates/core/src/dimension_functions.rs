//! The parametric dimension-function family f(r) = scale·r^s·(−log r)^(−p)
//! on (0, e^(−1)], and the growth partial order used by the dichotomy
//! hypotheses, decided symbolically.
//!
//! f ⪯ g means f(y)/g(y) ≤ f(x)/g(x) for all 0 < x < y in the domain, i.e.
//! the ratio f/g is nonincreasing towards 0. With Δs = s_f − s_g and
//! Δp = p_f − p_g the ratio is r^(Δs)·(−log r)^(−Δp); its log-derivative
//! sign is sign(Δs·L + Δp) with L = −log r ≥ 1 on the domain, which gives
//! the exact symbolic rule implemented by [`precsim`].

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Upper end of the common domain: r ≤ e^(−1) keeps −log r ≥ 1.
pub const R_MAX_LN: f64 = -1.0;

/// f(r) = scale · r^s · (−log r)^(−p) on (0, e^(−1)].
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct DimensionFunction {
    pub s: f64,
    pub p: f64,
    pub scale: f64,
}

impl DimensionFunction {
    /// A dimension function must be nondecreasing with f(0+) = 0:
    /// s > 0, or s = 0 with p < 0.
    pub fn new(s: f64, p: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Domain(format!("scale must be positive, got {scale}")));
        }
        if !s.is_finite() || !p.is_finite() || s < 0.0 {
            return Err(Error::Domain(format!("invalid exponents s={s}, p={p}")));
        }
        if s == 0.0 && p >= 0.0 {
            return Err(Error::Domain(
                "dimension function must be nondecreasing: need s > 0, or s = 0 with p < 0".into(),
            ));
        }
        Ok(DimensionFunction { s, p, scale })
    }

    /// The monomial r^k.
    pub fn monomial(k: f64) -> Result<Self> {
        Self::new(k, 0.0, 1.0)
    }

    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        Self::new(self.s, self.p, scale)
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || r.ln() > R_MAX_LN {
            return Err(Error::Domain(format!("r must lie in (0, e^-1], got {r}")));
        }
        Ok(self.eval_ln(r.ln()).exp())
    }

    /// ln f at ln r (callers working in log space avoid underflow).
    pub fn eval_ln(&self, ln_r: f64) -> f64 {
        debug_assert!(ln_r <= R_MAX_LN + 1e-12);
        self.scale.ln() + self.s * ln_r - self.p * (-ln_r).ln()
    }

    /// Parse "r^S" or "r^S*log^-P" (e.g. "r^0.9", "r^1*log^-0.5").
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let rest = t
            .strip_prefix("r^")
            .ok_or_else(|| Error::Domain(format!("cannot parse dimension function '{t}'")))?;
        let (s_part, p) = match rest.split_once("*log^") {
            None => (rest, 0.0),
            Some((s_part, p_part)) => {
                let pexp: f64 = p_part
                    .parse()
                    .map_err(|_| Error::Domain(format!("bad log exponent in '{t}'")))?;
                // "log^-P" denotes (−log r)^(-P); the stored p is the
                // negated exponent, so p = -pexp.
                (s_part, -pexp)
            }
        };
        let s: f64 =
            s_part.parse().map_err(|_| Error::Domain(format!("bad power exponent in '{t}'")))?;
        Self::new(s, p, 1.0)
    }
}

impl std::fmt::Display for DimensionFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.scale != 1.0 {
            write!(f, "{}*", self.scale)?;
        }
        write!(f, "r^{}", self.s)?;
        if self.p != 0.0 {
            write!(f, "*log^{}", -self.p)?;
        }
        Ok(())
    }
}

/// Outcome of comparing two dimension functions under the growth order.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// f ⪯ g (non-strict; in this family this only occurs as `Equivalent`
    /// or `Strict`, the variant exists for API completeness).
    Precsim,
    /// f ≺ g.
    Strict,
    /// f ≍ g.
    Equivalent,
    /// g ⪯ f.
    Reverse,
    /// g ≺ f.
    ReverseStrict,
    /// Neither f ⪯ g nor g ⪯ f.
    Incomparable,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderVerdict {
    pub relation: Relation,
    /// A pair (x, y) with x < y violating the defining inequality in both
    /// directions, recorded when incomparable.
    pub witness: Option<(f64, f64)>,
}

/// Symbolic test for f ⪯ g.
pub fn precsim(f: &DimensionFunction, g: &DimensionFunction) -> bool {
    let ds = f.s - g.s;
    let dp = f.p - g.p;
    (ds < 0.0 && ds + dp <= 0.0) || (ds == 0.0 && dp <= 0.0)
}

/// Symbolic test for f ≺ g.
pub fn strictly_precedes(f: &DimensionFunction, g: &DimensionFunction) -> bool {
    let ds = f.s - g.s;
    let dp = f.p - g.p;
    precsim(f, g) && (ds < 0.0 || dp < 0.0)
}

pub fn compare(f: &DimensionFunction, g: &DimensionFunction) -> OrderVerdict {
    let ds = f.s - g.s;
    let dp = f.p - g.p;
    if ds == 0.0 && dp == 0.0 {
        return OrderVerdict { relation: Relation::Equivalent, witness: None };
    }
    if precsim(f, g) {
        let relation =
            if strictly_precedes(f, g) { Relation::Strict } else { Relation::Precsim };
        return OrderVerdict { relation, witness: None };
    }
    if precsim(g, f) {
        let relation =
            if strictly_precedes(g, f) { Relation::ReverseStrict } else { Relation::Reverse };
        return OrderVerdict { relation, witness: None };
    }
    OrderVerdict { relation: Relation::Incomparable, witness: incomparability_witness(f, g) }
}

pub fn compare_monomial(f: &DimensionFunction, k: f64) -> OrderVerdict {
    compare(f, &DimensionFunction { s: k, p: 0.0, scale: 1.0 })
}

/// f and g are comparable if one ⪯ the other.
pub fn comparable(f: &DimensionFunction, g: &DimensionFunction) -> bool {
    precsim(f, g) || precsim(g, f)
}

/// Search a log grid for x < y with f(y)/g(y) > f(x)/g(x) (violating f ⪯ g)
/// and also a pair violating g ⪯ f.
fn incomparability_witness(f: &DimensionFunction, g: &DimensionFunction) -> Option<(f64, f64)> {
    let ratio = |ln_r: f64| f.eval_ln(ln_r) - g.eval_ln(ln_r);
    let grid: Vec<f64> = (0..200).map(|i| -1.0 - 0.25 * i as f64).collect();
    // Walking the grid towards r = 0, a spot where the ratio drops gives
    // x < y (x = smaller r) with f(y)/g(y) > f(x)/g(x): a violation of
    // f ⪯ g.
    for w in grid.windows(2) {
        let (ln_y, ln_x) = (w[0], w[1]);
        if ratio(ln_x) < ratio(ln_y) - 1e-13 {
            return Some((ln_x.exp(), ln_y.exp()));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn df(s: f64, p: f64) -> DimensionFunction {
        DimensionFunction::new(s, p, 1.0).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert!((df(2.0, 0.0).eval(0.25).unwrap() - 0.0625).abs() < 1e-15);
        let v = df(1.0, -1.0).eval((-2.0_f64).exp()).unwrap();
        assert!((v - 2.0 * (-2.0_f64).exp()).abs() < 1e-15);
        let v = df(1.0, 0.5).eval((-4.0_f64).exp()).unwrap();
        assert!((v - (-4.0_f64).exp() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn eval_domain() {
        assert!(df(1.0, 0.0).eval(0.5).is_err());
        assert!(df(1.0, 0.0).eval(0.0).is_err());
        assert!(df(1.0, 0.0).eval(0.3).is_ok());
    }

    #[test]
    fn nondecreasing_enforced() {
        assert!(DimensionFunction::new(0.0, 0.5, 1.0).is_err());
        assert!(DimensionFunction::new(-0.5, 0.0, 1.0).is_err());
        assert!(DimensionFunction::new(0.0, -1.0, 1.0).is_ok());
    }

    #[test]
    fn compare_examples() {
        assert_eq!(compare(&df(0.9, 0.0), &df(1.0, 0.0)).relation, Relation::Strict);
        // g = r^s precedes f = r^s·(−log r)^(−1/2) strictly
        let f = df(1.0, 0.5);
        let g = df(1.0, 0.0);
        assert_eq!(compare(&g, &f).relation, Relation::Strict);
        assert_eq!(compare(&f, &g).relation, Relation::ReverseStrict);
        assert_eq!(compare(&f, &f).relation, Relation::Equivalent);
    }

    #[test]
    fn compare_monomial_examples() {
        assert_eq!(compare_monomial(&df(1.5, 0.0), 1.0).relation, Relation::ReverseStrict);
        assert_eq!(compare_monomial(&df(1.0, 0.0), 1.0).relation, Relation::Equivalent);
        assert_eq!(compare_monomial(&df(1.0, 1.0), 1.0).relation, Relation::ReverseStrict);
    }

    #[test]
    fn scale_does_not_affect_order() {
        let f = DimensionFunction::new(0.9, 0.0, 17.0).unwrap();
        let g = DimensionFunction::new(1.0, 0.0, 0.01).unwrap();
        assert_eq!(compare(&f, &g).relation, Relation::Strict);
    }

    #[test]
    fn incomparable_with_witness() {
        // Δs = −1, Δp = +2: the ratio r^(−1)(−log r)^(−2) is not monotone on
        // the domain (its log-derivative changes sign at −log r = 2).
        let f = df(1.0, 2.0);
        let g = df(2.0, 0.0);
        let v = compare(&f, &g);
        assert_eq!(v.relation, Relation::Incomparable);
        let (x, y) = v.witness.expect("witness recorded");
        assert!(x < y);
        let ratio = |r: f64| f.eval(r).unwrap().ln() - g.eval(r).unwrap().ln();
        assert!(ratio(y) > ratio(x), "witness violates the order");
    }

    #[test]
    fn grid_soundness() {
        // whenever ⪯ is claimed, the sampled ratio is monotone nonincreasing
        // in r on a 10^3-point log grid
        let cases = [
            (df(0.9, 0.0), df(1.0, 0.0)),
            (df(1.0, 0.0), df(1.0, -0.5)),
            (df(0.5, 3.0), df(1.0, -2.0)),
            (df(1.0, 0.25), df(1.0, 0.25)),
        ];
        for (f, g) in cases {
            if !precsim(&f, &g) {
                continue;
            }
            let mut prev: Option<f64> = None;
            for i in 0..1000 {
                let ln_r = -1.0 - 0.05 * i as f64;
                let ratio = f.eval_ln(ln_r) - g.eval_ln(ln_r);
                if let Some(pr) = prev {
                    // moving towards r=0: ratio must not decrease
                    assert!(ratio >= pr - 1e-9, "monotone ratio for {f} vs {g}");
                }
                prev = Some(ratio);
            }
        }
    }

    #[test]
    fn transitivity_sampled() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                df(rng.gen_range(0.1..2.0), rng.gen_range(-2.0..2.0))
            };
            let (f, g, h) = (mk(&mut rng), mk(&mut rng), mk(&mut rng));
            if precsim(&f, &g) && precsim(&g, &h) {
                assert!(precsim(&f, &h), "transitivity {f} {g} {h}");
            }
        }
    }

    #[test]
    fn strictness_limit_heuristic() {
        // on comparable pairs, ≺ coincides with genuine growth of the
        // reciprocal ratio deep into the domain (heuristic cross-check of
        // the symbolic rule; the symbolic rule is authoritative)
        let cases = [
            (df(0.9, 0.0), df(1.0, 0.0)),
            (df(1.0, 0.0), df(1.0, -1.5)),
            (df(1.0, 0.25), df(1.0, 0.25)),
        ];
        for (f, g) in cases {
            // f ≺ g means f/g blows up towards r = 0
            let ratio_growth =
                (f.eval_ln(-40.0) - g.eval_ln(-40.0)) - (f.eval_ln(-1.0) - g.eval_ln(-1.0));
            let strict = strictly_precedes(&f, &g);
            assert_eq!(strict, ratio_growth > 0.1, "{f} vs {g}");
        }
    }

    #[test]
    fn parse_forms() {
        let f = DimensionFunction::parse("r^0.9").unwrap();
        assert_eq!((f.s, f.p), (0.9, 0.0));
        let f = DimensionFunction::parse("r^1*log^-0.5").unwrap();
        assert_eq!((f.s, f.p), (1.0, 0.5));
        assert!(DimensionFunction::parse("r^-1").is_err());
        assert!(DimensionFunction::parse("garbage").is_err());
    }
}
