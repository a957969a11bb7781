//! Exact scalars in the ring ℚ[√3].
//!
//! Every weight of the square-lattice and type II models is rational; the
//! type I weights need one extra generator √3. A single type covers both,
//! with the irrational part identically zero in the rational case.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `rat + surd·√3` with both parts reduced rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    rat: BigRational,
    surd: BigRational,
}

impl ExactScalar {
    pub fn new(rat: BigRational, surd: BigRational) -> Self {
        Self { rat, surd }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_ratio(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_frac(num: i64, den: i64) -> Self {
        Self::from_ratio(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_ratio(rat: BigRational) -> Self {
        Self::new(rat, BigRational::zero())
    }

    /// The generator √3.
    pub fn sqrt3() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rat
    }

    pub fn surd_part(&self) -> &BigRational {
        &self.surd
    }

    pub fn is_rational(&self) -> bool {
        self.surd.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.surd.is_zero()
    }

    /// The rational value, if the √3 part vanishes.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.rat)
    }

    /// Field norm `rat² − 3·surd²`; nonzero for nonzero elements since √3 ∉ ℚ.
    fn norm(&self) -> BigRational {
        &self.rat * &self.rat - BigRational::from_integer(3.into()) * &self.surd * &self.surd
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        let n = self.norm();
        Self::new(&self.rat / &n, -&self.surd / &n)
    }

    /// Exact sign, decided by comparing squares when the parts disagree.
    pub fn signum(&self) -> Ordering {
        let a = self.rat.cmp(&BigRational::zero());
        let b = self.surd.cmp(&BigRational::zero());
        match (a, b) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (x, y) if x == y => x,
            (x, _) => {
                // Opposite signs: |rat| vs |surd|·√3.
                let lhs = &self.rat * &self.rat;
                let rhs = BigRational::from_integer(3.into()) * &self.surd * &self.surd;
                match lhs.cmp(&rhs) {
                    Ordering::Greater => x,
                    Ordering::Less => x.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.rat) + ratio_to_f64(&self.surd) * 3f64.sqrt()
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }
}

/// Nearest double to a big rational, robust to numerators beyond the f64 range.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(x) = r.to_f64() {
        if x.is_finite() {
            return x;
        }
    }
    let (n, d) = (r.numer(), r.denom());
    let shift = n.bits() as i64 - d.bits() as i64;
    let scaled = if shift > 0 {
        BigRational::new(n.clone(), d.clone() << shift as usize)
    } else {
        BigRational::new(n.clone() << (-shift) as usize, d.clone())
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

impl PartialOrd for ExactScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.rat.is_zero(), self.surd.is_zero()) {
            (_, true) => write!(f, "{}", self.rat),
            (true, false) => write!(f, "({})√3", self.surd),
            (false, false) => {
                if self.surd.is_negative() {
                    write!(f, "{} - ({})√3", self.rat, -&self.surd)
                } else {
                    write!(f, "{} + ({})√3", self.rat, self.surd)
                }
            }
        }
    }
}

impl From<BigRational> for ExactScalar {
    fn from(r: BigRational) -> Self {
        Self::from_ratio(r)
    }
}

impl From<i64> for ExactScalar {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl<'a> Add<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn add(self, o: &ExactScalar) -> ExactScalar {
        ExactScalar::new(&self.rat + &o.rat, &self.surd + &o.surd)
    }
}

impl<'a> Sub<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn sub(self, o: &ExactScalar) -> ExactScalar {
        ExactScalar::new(&self.rat - &o.rat, &self.surd - &o.surd)
    }
}

impl<'a> Mul<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn mul(self, o: &ExactScalar) -> ExactScalar {
        if self.is_rational() && o.is_rational() {
            return ExactScalar::from_ratio(&self.rat * &o.rat);
        }
        let three = BigRational::from_integer(3.into());
        ExactScalar::new(
            &self.rat * &o.rat + three * &self.surd * &o.surd,
            &self.rat * &o.surd + &self.surd * &o.rat,
        )
    }
}

impl<'a> Div<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn div(self, o: &ExactScalar) -> ExactScalar {
        if self.is_rational() && o.is_rational() {
            return ExactScalar::from_ratio(&self.rat / &o.rat);
        }
        self * &o.recip()
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for ExactScalar {
            type Output = ExactScalar;
            fn $m(self, o: ExactScalar) -> ExactScalar {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $m(self, o: &ExactScalar) -> ExactScalar {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar::new(-self.rat, -self.surd)
    }
}

impl AddAssign<&ExactScalar> for ExactScalar {
    fn add_assign(&mut self, o: &ExactScalar) {
        self.rat += &o.rat;
        self.surd += &o.surd;
    }
}

impl SubAssign<&ExactScalar> for ExactScalar {
    fn sub_assign(&mut self, o: &ExactScalar) {
        self.rat -= &o.rat;
        self.surd -= &o.surd;
    }
}

impl MulAssign<&ExactScalar> for ExactScalar {
    fn mul_assign(&mut self, o: &ExactScalar) {
        *self = &*self * o;
    }
}

impl std::iter::Sum for ExactScalar {
    fn sum<I: Iterator<Item = ExactScalar>>(iter: I) -> Self {
        iter.fold(ExactScalar::zero(), |mut acc, x| {
            acc += &x;
            acc
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt3_squares_to_three() {
        assert_eq!(ExactScalar::sqrt3().pow(2), ExactScalar::from_int(3));
    }

    #[test]
    fn reciprocal_round_trips() {
        let x = ExactScalar::from_frac(1, 2) - ExactScalar::sqrt3() * ExactScalar::from_frac(1, 4);
        assert_eq!(&x * &x.recip(), ExactScalar::one());
    }

    #[test]
    fn sign_of_mixed_elements() {
        // 2 − √3 > 0, 1 − √3 < 0, 7/4 − √3 > 0 (49/16 > 3).
        let s3 = ExactScalar::sqrt3();
        assert_eq!(
            (ExactScalar::from_int(2) - s3.clone()).signum(),
            Ordering::Greater
        );
        assert_eq!(
            (ExactScalar::from_int(1) - s3.clone()).signum(),
            Ordering::Less
        );
        assert_eq!(
            (ExactScalar::from_frac(7, 4) - s3).signum(),
            Ordering::Greater
        );
    }

    #[test]
    fn huge_ratio_to_f64() {
        let big = BigRational::new(BigInt::from(3) << 2000usize, BigInt::from(1) << 2000usize);
        assert!((ratio_to_f64(&big) - 3.0).abs() < 1e-15);
    }
}
