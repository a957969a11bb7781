use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Div, Mul};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::enumeration::{ratio_to_f64, ExactScalar};

/// Base of a power factor.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    Prime(u64),
    Pi,
}

/// A positive number `(1 + c·√3) · Π base^exponent` with rational exponents.
///
/// Equality is exact: a product of rational prime powers lies in `Q(√3)`
/// only as `r` or `r√3`, so a quotient equals one iff its form is trivial.
#[derive(Clone, Debug)]
pub struct Radical {
    surd: BigRational,
    powers: BTreeMap<Base, Ratio<i64>>,
}

fn factor(n: &BigInt) -> Vec<(u64, i64)> {
    let mut n = n.to_u64().expect("constants use small integers");
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        let mut e = 0;
        while n % d == 0 {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

impl Radical {
    pub fn one() -> Self {
        Self {
            surd: BigRational::zero(),
            powers: BTreeMap::new(),
        }
    }

    fn with_power(mut self, base: Base, e: Ratio<i64>) -> Self {
        let slot = self.powers.entry(base).or_insert_with(Ratio::zero);
        *slot += e;
        if slot.is_zero() {
            self.powers.remove(&base);
        }
        self
    }

    /// A positive rational.
    pub fn rational(r: &BigRational) -> Self {
        assert!(r.is_positive(), "radicals are positive");
        let mut out = Self::one();
        for (p, e) in factor(r.numer()) {
            out = out.with_power(Base::Prime(p), Ratio::from_integer(e));
        }
        for (p, e) in factor(r.denom()) {
            out = out.with_power(Base::Prime(p), Ratio::from_integer(-e));
        }
        out
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Self::rational(&BigRational::new(n.into(), d.into()))
    }

    /// A positive element `x + y√3` of `Q(√3)`.
    pub fn scalar(s: &ExactScalar) -> Self {
        assert!(s.to_f64() > 0.0, "radicals are positive");
        let (x, y) = (s.rational_part(), s.surd_part());
        if y.is_zero() {
            return Self::rational(x);
        }
        if x.is_zero() {
            return Self::rational(y).with_power(Base::Prime(3), Ratio::new(1, 2));
        }
        if x.is_positive() {
            let mut out = Self::rational(x);
            out.surd = y / x;
            return out;
        }
        // x + y√3 = y√3·(1 + (x/3y)·√3) with y > 0.
        let mut out = Self::rational(y).with_power(Base::Prime(3), Ratio::new(1, 2));
        out.surd = x / (BigRational::from_integer(3.into()) * y);
        out
    }

    /// The same number as an element of `Q(√3)`, when it is one.
    pub fn as_scalar(&self) -> Option<ExactScalar> {
        let mut out = ExactScalar::new(BigRational::one(), self.surd.clone());
        for (&b, &e) in &self.powers {
            let Base::Prime(p) = b else { return None };
            let (whole, half) = if e.is_integer() {
                (e.to_integer(), false)
            } else if p == 3 && *e.denom() == 2 {
                ((e - Ratio::new(1, 2)).to_integer(), true)
            } else {
                return None;
            };
            let base = BigRational::from_integer(p.into());
            let factor = if whole >= 0 {
                num_traits::pow(base, whole as usize)
            } else {
                num_traits::pow(base.recip(), (-whole) as usize)
            };
            out = out * ExactScalar::from_ratio(factor);
            if half {
                out = out * ExactScalar::sqrt3();
            }
        }
        Some(out)
    }

    fn is_one(&self) -> bool {
        self.surd.is_zero() && self.powers.is_empty()
    }

    /// `base^e` for a prime base.
    pub fn prime_power(p: u64, e: Ratio<i64>) -> Self {
        Self::one().with_power(Base::Prime(p), e)
    }

    pub fn pi_power(e: Ratio<i64>) -> Self {
        Self::one().with_power(Base::Pi, e)
    }

    /// Rational power; defined when there is no `1 + c√3` factor.
    pub fn pow(&self, e: Ratio<i64>) -> Option<Self> {
        if !self.surd.is_zero() {
            return None;
        }
        let mut out = Self::one();
        for (&b, &x) in &self.powers {
            out = out.with_power(b, x * e);
        }
        Some(out)
    }

    pub fn recip(&self) -> Self {
        let mut out = Self::one();
        for (&b, &x) in &self.powers {
            out = out.with_power(b, -x);
        }
        if self.surd.is_zero() {
            return out;
        }
        // 1/(1 + c√3) = (1 − c√3)/(1 − 3c²)
        let c = &self.surd;
        let norm = BigRational::one() - BigRational::from_integer(3.into()) * c * c;
        out * Self::scalar(
            &(ExactScalar::new(BigRational::one(), -c.clone())
                * ExactScalar::from_ratio(norm.recip())),
        )
    }

    /// The same number as a single root `(n/m)^(1/d)`, when it is a surd-free
    /// product of prime powers with some fractional exponent.
    pub fn root_form(&self) -> Option<String> {
        if !self.surd.is_zero() || self.powers.values().all(|e| e.is_integer()) {
            return None;
        }
        let d = self
            .powers
            .values()
            .fold(1i64, |acc, e| num_integer::lcm(acc, *e.denom()));
        let (mut num, mut den) = (1u64, 1u64);
        for (&b, &e) in &self.powers {
            let Base::Prime(p) = b else { return None };
            let k = (e * d).to_integer();
            let factor = p.checked_pow(u32::try_from(k.unsigned_abs()).ok()?)?;
            if k > 0 {
                num = num.checked_mul(factor)?;
            } else {
                den = den.checked_mul(factor)?;
            }
        }
        let inner = if den == 1 {
            num.to_string()
        } else {
            format!("({num}/{den})")
        };
        Some(format!("{inner}^(1/{d})"))
    }

    pub fn to_f64(&self) -> f64 {
        let mut v = 1.0 + ratio_to_f64(&self.surd) * 3f64.sqrt();
        for (&b, &e) in &self.powers {
            let base = match b {
                Base::Prime(p) => p as f64,
                Base::Pi => std::f64::consts::PI,
            };
            v *= base.powf(*e.numer() as f64 / *e.denom() as f64);
        }
        v
    }
}

impl Mul for Radical {
    type Output = Radical;
    fn mul(self, rhs: Radical) -> Radical {
        // (1 + a√3)(1 + b√3) = (1 + 3ab) + (a + b)√3
        let (a, b) = (&self.surd, &rhs.surd);
        let unit = ExactScalar::new(
            BigRational::one() + BigRational::from_integer(3.into()) * a * b,
            a + b,
        );
        let mut out = Radical::scalar(&unit);
        for (&base, &e) in self.powers.iter().chain(&rhs.powers) {
            out = out.with_power(base, e);
        }
        out
    }
}

impl PartialEq for Radical {
    fn eq(&self, other: &Self) -> bool {
        (self.clone() / other.clone()).is_one()
    }
}

impl Eq for Radical {}

impl Div for Radical {
    type Output = Radical;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Radical) -> Radical {
        self * rhs.recip()
    }
}

impl fmt::Display for Radical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.surd.is_zero() {
            parts.push(format!("(1 + {}·√3)", self.surd));
        }
        for (&b, &e) in &self.powers {
            let base = match b {
                Base::Prime(p) => p.to_string(),
                Base::Pi => "π".to_string(),
            };
            if e.is_integer() && e == Ratio::one() {
                parts.push(base);
            } else if e.is_integer() {
                parts.push(format!("{base}^{e}"));
            } else {
                parts.push(format!("{base}^({e})"));
            }
        }
        if parts.is_empty() {
            return f.write_str("1");
        }
        f.write_str(&parts.join("·"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms_compare_exactly() {
        let two_thirds = Radical::frac(2, 3);
        let p = two_thirds.pow(Ratio::new(2, 3)).unwrap();
        let h = Radical::frac(1, 12).pow(Ratio::new(1, 3)).unwrap();
        assert_eq!(p.clone() / (h.clone() * h), Radical::frac(4, 1));
        assert!((p.to_f64() - (2f64 / 3.0).powf(2.0 / 3.0)).abs() < 1e-15);
        assert_eq!(p.root_form().as_deref(), Some("(4/9)^(1/3)"));
        assert_eq!(
            Radical::frac(16, 3)
                .pow(Ratio::new(1, 3))
                .unwrap()
                .root_form()
                .as_deref(),
            Some("(16/3)^(1/3)")
        );
        assert_eq!(Radical::frac(9, 2).root_form(), None);
    }

    #[test]
    fn surd_factors_invert() {
        let x = Radical::scalar(
            &(ExactScalar::one() + ExactScalar::sqrt3() * ExactScalar::from_frac(1, 6)),
        );
        assert_eq!(x.clone() * x.recip(), Radical::one());
        assert!((x.to_f64() - (1.0 + 3f64.sqrt() / 6.0)).abs() < 1e-15);
        let root3 = Radical::scalar(&ExactScalar::sqrt3());
        assert_eq!(root3.clone() * root3.clone(), Radical::frac(3, 1));
        // (1 + √3/6)·√3 = 1/2 + √3 in two spellings.
        let direct = Radical::scalar(&(ExactScalar::from_frac(1, 2) + ExactScalar::sqrt3()));
        assert_eq!(x * root3, direct);
    }
}
