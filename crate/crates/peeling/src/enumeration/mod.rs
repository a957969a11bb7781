//! Counting sequences and Boltzmann weights of the three map families.
//!
//! All quantities are exact ([`ExactScalar`]) and memoized lazily per model.
//! The growth constant `C(p)` carries an irrational global factor, so it is
//! only exposed through ratios; internally each model keeps `C(p)/C(p_min)`.
//!
//! ```
//! use peeling::enumeration::{count_maps, partition_z, ModelId};
//! use peeling::ExactScalar;
//!
//! assert_eq!(count_maps(ModelId::TypeII, 1, 3).unwrap(), 4u32.into());
//! assert_eq!(partition_z(ModelId::TypeII, 2).unwrap(), ExactScalar::from_frac(9, 8));
//! ```

mod float;
mod scalar;
mod series;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use float::{ln_c, ln_count, ln_z};
pub use scalar::{ratio_to_f64, ExactScalar};
pub(crate) use series::jump_sums;
pub use series::{
    identity_suite, HypergeometricSeries, IdentityCheck, IdentityReport, TailEnclosure,
};

/// The three map families.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelId {
    /// Triangulations without loops (multiple edges allowed).
    TypeII,
    /// General triangulations (loops allowed).
    TypeI,
    /// Quadrangulations; boundary sizes are half-perimeters.
    Quad,
}

impl ModelId {
    pub const ALL: [ModelId; 3] = [ModelId::TypeII, ModelId::TypeI, ModelId::Quad];

    /// Smallest admissible boundary size (half-perimeter for `Quad`).
    pub fn min_boundary(self) -> u32 {
        match self {
            ModelId::TypeII => 2,
            ModelId::TypeI | ModelId::Quad => 1,
        }
    }

    /// Critical weight per inner vertex.
    pub fn vertex_weight(self) -> ExactScalar {
        match self {
            ModelId::TypeII => ExactScalar::from_frac(2, 27),
            // 1/(12√3) = √3/36
            ModelId::TypeI => ExactScalar::sqrt3() * ExactScalar::from_frac(1, 36),
            ModelId::Quad => ExactScalar::from_frac(1, 12),
        }
    }

    pub fn vertex_weight_f64(self) -> f64 {
        match self {
            ModelId::TypeII => 2.0 / 27.0,
            ModelId::TypeI => 1.0 / (12.0 * 3f64.sqrt()),
            ModelId::Quad => 1.0 / 12.0,
        }
    }

    /// Exponential growth rate of `C(p)` in the boundary size.
    pub fn boundary_growth(self) -> u32 {
        match self {
            ModelId::TypeII => 9,
            ModelId::TypeI => 12,
            ModelId::Quad => 54,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::TypeII => "type2",
            ModelId::TypeI => "type1",
            ModelId::Quad => "quad",
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            ModelId::TypeII => 0,
            ModelId::TypeI => 1,
            ModelId::Quad => 2,
        }
    }

    pub(crate) fn check_boundary(self, p: u32) -> Result<()> {
        if p < self.min_boundary() {
            return Err(Error::Domain(format!(
                "{} boundary size must be >= {}, got {p}",
                self.as_str(),
                self.min_boundary()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "type2" | "typeII" | "TypeII" => Ok(ModelId::TypeII),
            "type1" | "typeI" | "TypeI" => Ok(ModelId::TypeI),
            "quad" | "Quad" => Ok(ModelId::Quad),
            other => Err(Error::Argument(format!("unknown model '{other}'"))),
        }
    }
}

fn factorials() -> &'static RwLock<Vec<BigUint>> {
    static F: OnceLock<RwLock<Vec<BigUint>>> = OnceLock::new();
    F.get_or_init(|| RwLock::new(vec![BigUint::one()]))
}

/// `n!` from a shared growing table.
pub(crate) fn factorial(n: u64) -> BigUint {
    let n = n as usize;
    {
        let t = factorials().read().expect("factorial table poisoned");
        if n < t.len() {
            return t[n].clone();
        }
    }
    let mut t = factorials().write().expect("factorial table poisoned");
    while t.len() <= n {
        let k = t.len();
        let next = &t[k - 1] * BigUint::from(k);
        t.push(next);
    }
    t[n].clone()
}

/// `m!!` for `m ≥ −1`, with `(−1)!! = 0!! = 1`.
pub(crate) fn double_factorial(m: i64) -> BigUint {
    assert!(m >= -1, "double factorial of {m}");
    let mut acc = BigUint::one();
    let mut k = m;
    while k > 1 {
        acc *= BigUint::from(k as u64);
        k -= 2;
    }
    acc
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn rpow(num: i64, den: i64, e: u32) -> BigRational {
    let b = BigRational::new(BigInt::from(num), BigInt::from(den));
    num_traits::pow(b, e as usize)
}

fn fact(n: i64) -> BigUint {
    assert!(n >= 0, "factorial of {n}");
    factorial(n as u64)
}

/// Closed-form count of maps with `n` inner vertices and boundary `p`.
fn count_closed_form(model: ModelId, n: u32, p: u32) -> BigUint {
    let (n, p) = (n as i64, p as i64);
    match model {
        ModelId::TypeII => {
            let num =
                (BigUint::one() << (n + 1) as usize) * fact(2 * p - 3) * fact(2 * p + 3 * n - 4);
            let den = fact(p - 2) * fact(p - 2) * fact(n) * fact(2 * p + 2 * n - 2);
            exact_quotient(num, den)
        }
        ModelId::TypeI => {
            // 4^{n−1} is fractional at n = 0; fold it into the denominator.
            let mut num =
                BigUint::from(p as u64) * fact(2 * p) * double_factorial(2 * p + 3 * n - 5);
            let mut den = fact(p) * fact(p) * fact(n) * double_factorial(2 * p + n - 1);
            if n == 0 {
                den *= 4u32;
            } else {
                num <<= (2 * (n - 1)) as usize;
            }
            exact_quotient(num, den)
        }
        ModelId::Quad => {
            let mut num = fact(3 * p) * fact(3 * p - 3 + 2 * n);
            let mut den = fact(n) * fact(p) * fact(2 * p - 1) * fact(n + 3 * p - 1);
            if n == 0 {
                den *= 3u32;
            } else {
                num *= BigUint::from(3u32).pow((n - 1) as u32);
            }
            exact_quotient(num, den)
        }
    }
}

fn exact_quotient(num: BigUint, den: BigUint) -> BigUint {
    let (q, r) = num_integer::Integer::div_rem(&num, &den);
    assert!(r.is_zero(), "closed-form count is not an integer");
    q
}

/// `Z(p)` from the closed forms.
fn z_closed_form(model: ModelId, p: u32) -> ExactScalar {
    let pi = p as i64;
    match model {
        ModelId::TypeII => {
            let r = ratio(fact(2 * pi - 4), fact(pi - 2) * fact(pi)) * rpow(9, 4, p - 1);
            ExactScalar::from_ratio(r)
        }
        ModelId::TypeI => {
            if p == 1 {
                // (2 − √3)/4
                return ExactScalar::from_frac(1, 2)
                    - ExactScalar::sqrt3() * ExactScalar::from_frac(1, 4);
            }
            // 6^p (2p−5)!! / (8√3 p!) = √3 · 6^p (2p−5)!! / (24 p!)
            let r = ratio(
                BigUint::from(6u32).pow(p) * double_factorial(2 * pi - 5),
                BigUint::from(24u32) * fact(pi),
            );
            ExactScalar::new(BigRational::zero(), r)
        }
        ModelId::Quad => {
            if p == 1 {
                return ExactScalar::from_frac(4, 3);
            }
            let r = ratio(
                BigUint::from(8u32).pow(p) * fact(3 * pi - 4),
                fact(pi - 2) * fact(2 * pi),
            );
            ExactScalar::from_ratio(r)
        }
    }
}

/// `C(p)` with the model-wide irrational constant dropped.
fn c_closed_form(model: ModelId, p: u32) -> ExactScalar {
    let pi = p as i64;
    let r = match model {
        ModelId::TypeII => ratio(fact(2 * pi - 3), fact(pi - 2) * fact(pi - 2)) * rpow(9, 4, p),
        ModelId::TypeI => {
            // 3^{p−2} p (2p)! / (p!)²
            let base = ratio(BigUint::from(p) * fact(2 * pi), fact(pi) * fact(pi));
            if p >= 2 {
                base * BigRational::from_integer(BigInt::from(3u32).pow(p - 2))
            } else {
                base / BigRational::from_integer(3.into())
            }
        }
        ModelId::Quad => ratio(
            BigUint::from(8u32).pow(p - 1) * fact(3 * pi),
            fact(pi) * fact(2 * pi - 1),
        ),
    };
    ExactScalar::from_ratio(r)
}

/// Lazily grown exact tables for one model.
pub struct WeightTable {
    model: ModelId,
    z: RwLock<Vec<ExactScalar>>,
    c: RwLock<Vec<ExactScalar>>,
    counts: RwLock<HashMap<(u32, u32), BigUint>>,
}

impl WeightTable {
    /// The process-wide table for `model`.
    pub fn get(model: ModelId) -> &'static WeightTable {
        static T: OnceLock<[WeightTable; 3]> = OnceLock::new();
        let all = T.get_or_init(|| ModelId::ALL.map(WeightTable::new));
        &all[model.index()]
    }

    fn new(model: ModelId) -> Self {
        Self {
            model,
            z: RwLock::new(Vec::new()),
            c: RwLock::new(Vec::new()),
            counts: RwLock::new(HashMap::new()),
        }
    }

    pub fn model(&self) -> ModelId {
        self.model
    }

    fn lookup(
        &self,
        cell: &RwLock<Vec<ExactScalar>>,
        p: u32,
        make: fn(ModelId, u32) -> ExactScalar,
    ) -> Result<ExactScalar> {
        self.model.check_boundary(p)?;
        let idx = (p - self.model.min_boundary()) as usize;
        {
            let t = cell.read().expect("weight table poisoned");
            if idx < t.len() {
                return Ok(t[idx].clone());
            }
        }
        let mut t = cell.write().expect("weight table poisoned");
        while t.len() <= idx {
            let q = self.model.min_boundary() + t.len() as u32;
            t.push(make(self.model, q));
        }
        Ok(t[idx].clone())
    }

    /// Number of maps with `n` inner vertices and boundary `p`.
    pub fn count(&self, n: u32, p: u32) -> Result<BigUint> {
        self.model.check_boundary(p)?;
        if self.model == ModelId::TypeI && (n, p) == (0, 1) {
            return Err(Error::Domain(
                "type1 count undefined at (n, p) = (0, 1)".into(),
            ));
        }
        if let Some(v) = self
            .counts
            .read()
            .expect("count table poisoned")
            .get(&(n, p))
        {
            return Ok(v.clone());
        }
        let v = count_closed_form(self.model, n, p);
        self.counts
            .write()
            .expect("count table poisoned")
            .insert((n, p), v.clone());
        Ok(v)
    }

    /// Boltzmann partition function `Z(p)`.
    pub fn z(&self, p: u32) -> Result<ExactScalar> {
        self.lookup(&self.z, p, z_closed_form)
    }

    /// `Z'(p)`: `Z(p)` with the trivial one-edge map removed (only differs at `p = 2`, type II).
    pub fn z_prime(&self, p: u32) -> Result<ExactScalar> {
        let z = self.z(p)?;
        Ok(if self.model == ModelId::TypeII && p == 2 {
            z - ExactScalar::one()
        } else {
            z
        })
    }

    /// `C(p)` up to the model-wide constant.
    pub fn c_scaled(&self, p: u32) -> Result<ExactScalar> {
        self.lookup(&self.c, p, c_closed_form)
    }

    /// `C(p)/C(q)`.
    pub fn c_ratio(&self, p: u32, q: u32) -> Result<ExactScalar> {
        if p == q {
            self.model.check_boundary(p)?;
            return Ok(ExactScalar::one());
        }
        Ok(self.c_scaled(p)? / self.c_scaled(q)?)
    }

    /// `h(p−k)/h(p)` with `h(p) = g^{−p} C(p)` on the admissible half-line and 0 below it.
    pub fn h_ratio(&self, p: u32, k: i64) -> Result<ExactScalar> {
        self.model.check_boundary(p)?;
        let target = p as i64 - k;
        if target < self.model.min_boundary() as i64 {
            return Ok(ExactScalar::zero());
        }
        let g = self.model.boundary_growth() as i64;
        let scale = if k >= 0 {
            ExactScalar::from_int(g).pow(k as u32)
        } else {
            ExactScalar::from_frac(1, g).pow((-k) as u32)
        };
        Ok(scale * self.c_ratio(target as u32, p)?)
    }
}

/// Exact number of maps of the family with `n` inner vertices and boundary `p`.
pub fn count_maps(model: ModelId, n: u32, p: u32) -> Result<BigUint> {
    WeightTable::get(model).count(n, p)
}

/// Exact partition function `Z(p)`.
pub fn partition_z(model: ModelId, p: u32) -> Result<ExactScalar> {
    WeightTable::get(model).z(p)
}

/// Exact `C(p)/C(q)`.
pub fn c_ratio(model: ModelId, p: u32, q: u32) -> Result<ExactScalar> {
    WeightTable::get(model).c_ratio(p, q)
}

/// Exact `h(p−k)/h(p)`.
pub fn h_ratio(model: ModelId, p: u32, k: i64) -> Result<ExactScalar> {
    WeightTable::get(model).h_ratio(p, k)
}

/// Martingale weight `f(p) = (p/2)(p−1)(2p−3)` for `p ≥ 3`, with `f(2) = 9`.
pub fn hole_weight(p: u32) -> BigRational {
    match p {
        0 | 1 => BigRational::zero(),
        2 => BigRational::from_integer(9.into()),
        _ => {
            let p = BigInt::from(p);
            BigRational::new(&p * (&p - 1) * (BigInt::from(2) * &p - 3), BigInt::from(2))
        }
    }
}

/// Double-precision `f(p)`.
pub fn hole_weight_f64(p: u32) -> f64 {
    match p {
        0 | 1 => 0.0,
        2 => 9.0,
        _ => {
            let p = p as f64;
            0.5 * p * (p - 1.0) * (2.0 * p - 3.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(count_maps(ModelId::TypeII, 0, 2).unwrap(), BigUint::one());
        assert_eq!(
            count_maps(ModelId::TypeII, 1, 3).unwrap(),
            BigUint::from(4u32)
        );
        assert_eq!(count_maps(ModelId::TypeII, 0, 3).unwrap(), BigUint::one());
        assert_eq!(count_maps(ModelId::TypeI, 0, 2).unwrap(), BigUint::one());
        assert_eq!(count_maps(ModelId::TypeI, 1, 1).unwrap(), BigUint::one());
        assert_eq!(count_maps(ModelId::Quad, 0, 1).unwrap(), BigUint::one());
        assert!(matches!(
            count_maps(ModelId::TypeI, 0, 1),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            count_maps(ModelId::TypeII, 0, 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn partition_values() {
        assert_eq!(
            partition_z(ModelId::TypeII, 2).unwrap(),
            ExactScalar::from_frac(9, 8)
        );
        assert_eq!(
            partition_z(ModelId::Quad, 2).unwrap(),
            ExactScalar::from_frac(16, 3)
        );
        let z1 = partition_z(ModelId::TypeI, 1).unwrap();
        assert_eq!(
            z1,
            ExactScalar::from_frac(1, 2) - ExactScalar::sqrt3() * ExactScalar::from_frac(1, 4)
        );
        let z2 = partition_z(ModelId::TypeI, 2).unwrap();
        assert_eq!(z2, ExactScalar::sqrt3() * ExactScalar::from_frac(3, 4));
    }

    #[test]
    fn c_and_h_ratios() {
        assert_eq!(
            c_ratio(ModelId::TypeII, 3, 2).unwrap(),
            ExactScalar::from_frac(27, 2)
        );
        assert_eq!(
            c_ratio(ModelId::TypeII, 4, 3).unwrap(),
            ExactScalar::from_frac(45, 4)
        );
        assert_eq!(c_ratio(ModelId::TypeII, 7, 7).unwrap(), ExactScalar::one());
        assert_eq!(
            h_ratio(ModelId::TypeII, 2, -1).unwrap(),
            ExactScalar::from_frac(3, 2)
        );
        assert_eq!(
            h_ratio(ModelId::TypeII, 3, 1).unwrap(),
            ExactScalar::from_frac(2, 3)
        );
        assert_eq!(h_ratio(ModelId::TypeII, 5, 4).unwrap(), ExactScalar::zero());
    }

    #[test]
    fn hole_weights() {
        assert_eq!(hole_weight(2), BigRational::from_integer(9.into()));
        assert_eq!(hole_weight(3), BigRational::from_integer(9.into()));
        assert_eq!(hole_weight(4), BigRational::from_integer(30.into()));
        assert_eq!(hole_weight_f64(4), 30.0);
    }

    #[test]
    fn model_names_round_trip() {
        for m in ModelId::ALL {
            assert_eq!(m.as_str().parse::<ModelId>().unwrap(), m);
        }
        assert!("type3".parse::<ModelId>().is_err());
    }
}
