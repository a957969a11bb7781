use num_rational::Ratio;
use serde::Serialize;

use super::radical::Radical;
use crate::enumeration::{ExactScalar, ModelId};
use crate::error::{Error, Result};

/// One scaling constant in exact and floating form.
#[derive(Clone, Debug, PartialEq)]
pub struct Constant {
    pub name: &'static str,
    pub exact: Radical,
}

impl Constant {
    pub fn value(&self) -> f64 {
        self.exact.to_f64()
    }
}

/// Serializable view of a [`Constant`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantEntry {
    pub name: &'static str,
    pub exact: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
    pub value: f64,
}

/// Scaling constants of one model.
///
/// `t`, `a`, `b` (and `a*` for quadrangulations) are primitive; `p`, `v`,
/// `h`, `h*` are stored in their closed forms and checked against
/// `p = (8t√π/3)^{2/3}`, `v = p²b`, `h = a/p` and the `h*` relation.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsTable {
    pub model: ModelId,
    pub p: Constant,
    pub v: Constant,
    pub h: Constant,
    pub h_star: Constant,
    pub a: Constant,
    pub a_star: Option<Constant>,
    pub t: Constant,
    pub b: Constant,
    /// `h*/h`
    pub c1: Constant,
    /// `1/(p·h)`
    pub c2: Constant,
}

fn r(n: i64, d: i64) -> Ratio<i64> {
    Ratio::new(n, d)
}

fn pow(x: Radical, e: Ratio<i64>) -> Radical {
    x.pow(e).expect("closed forms are monomials")
}

fn c(name: &'static str, exact: Radical) -> Constant {
    Constant { name, exact }
}

fn check(model: ModelId, what: &str, lhs: &Radical, rhs: &Radical) -> Result<()> {
    if lhs != rhs {
        return Err(Error::Integrity(format!(
            "{model}: {what} fails: {lhs} vs {rhs}"
        )));
    }
    Ok(())
}

impl ConstantsTable {
    /// Builds the table and checks its identities in exact arithmetic.
    pub fn new(model: ModelId) -> Result<Self> {
        let sqrt_pi = Radical::pi_power(r(1, 2));
        let frac = Radical::frac;
        let (p, v, h, a, a_star, t, b) = match model {
            ModelId::TypeII => (
                pow(frac(2, 3), r(2, 3)),
                pow(frac(2, 3), r(7, 3)),
                pow(frac(12, 1), r(-1, 3)),
                frac(1, 3),
                None,
                frac(1, 4) / sqrt_pi.clone(),
                frac(2, 3),
            ),
            ModelId::TypeI => (
                Radical::prime_power(3, r(-1, 3)),
                frac(4, 1) * Radical::prime_power(3, r(-5, 3)),
                frac(1, 2) * Radical::prime_power(3, r(-1, 6)),
                frac(1, 2) / Radical::prime_power(3, r(1, 2)),
                None,
                Radical::prime_power(3, r(1, 2)) / (frac(8, 1) * sqrt_pi.clone()),
                frac(4, 3),
            ),
            ModelId::Quad => (
                Radical::prime_power(2, r(2, 3)) / frac(3, 1),
                Radical::prime_power(2, r(1, 3)),
                Radical::prime_power(2, r(-2, 3)),
                frac(1, 3),
                Some(frac(1, 2)),
                frac(1, 4) / (Radical::prime_power(3, r(1, 2)) * sqrt_pi.clone()),
                frac(9, 2),
            ),
        };
        let h_star = match model {
            ModelId::TypeII => pow(frac(16, 3), r(1, 3)),
            ModelId::TypeI => {
                let one_plus_a =
                    ExactScalar::one() + ExactScalar::sqrt3() * ExactScalar::from_frac(1, 6);
                Radical::scalar(&one_plus_a) / Radical::prime_power(3, r(-1, 3))
            }
            ModelId::Quad => frac(3, 2) / (frac(2, 1) * p.clone()),
        };

        let from_t = pow(frac(8, 3) * t.clone() * sqrt_pi, r(2, 3));
        check(model, "p = (8t√π/3)^(2/3)", &p, &from_t)?;
        check(model, "v = p²b", &v, &(p.clone() * p.clone() * b.clone()))?;
        check(model, "h = a/p", &h, &(a.clone() / p.clone()))?;
        let star_rel = match &a_star {
            None => (one_plus(&a)) / p.clone(),
            Some(s) => one_plus(s) / (frac(2, 1) * p.clone()),
        };
        check(model, "h* relation", &h_star, &star_rel)?;
        let c1 = h_star.clone() / h.clone();
        let c2 = (p.clone() * h.clone()).recip();
        if model == ModelId::TypeII {
            // h + 1/p = h·(1 + 1/a) since p·h = a.
            check(
                model,
                "h* = h + 1/p",
                &h_star,
                &(h.clone() * one_plus(&a.recip())),
            )?;
            check(model, "c1 = 4", &c1, &frac(4, 1))?;
            check(model, "c2 = 3", &c2, &frac(3, 1))?;
            check(
                model,
                "p/h² = 4",
                &(p.clone() / (h.clone() * h.clone())),
                &frac(4, 1),
            )?;
        }
        Ok(Self {
            model,
            p: c("p", p),
            v: c("v", v),
            h: c("h", h),
            h_star: c("h*", h_star),
            a: c("a", a),
            a_star: a_star.map(|s| c("a*", s)),
            t: c("t", t),
            b: c("b", b),
            c1: c("c1", c1),
            c2: c("c2", c2),
        })
    }

    pub fn entries(&self) -> Vec<ConstantEntry> {
        let mut all = vec![&self.p, &self.v, &self.h, &self.h_star, &self.a];
        all.extend(self.a_star.as_ref());
        all.extend([&self.t, &self.b, &self.c1, &self.c2]);
        all.into_iter()
            .map(|k| ConstantEntry {
                name: k.name,
                exact: k.exact.to_string(),
                root: k.exact.root_form().filter(|r| *r != k.exact.to_string()),
                value: k.value(),
            })
            .collect()
    }
}

/// `1 + x` for the rational or `√3`-rational constants used as `a`.
fn one_plus(x: &Radical) -> Radical {
    Radical::scalar(&(ExactScalar::one() + x.as_scalar().expect("a lies in Q(√3)")))
}

/// Constants of `model`; the table is validated on construction.
pub fn constants(model: ModelId) -> ConstantsTable {
    ConstantsTable::new(model).expect("constant identities hold")
}
