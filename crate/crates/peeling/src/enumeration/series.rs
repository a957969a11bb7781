//! Certified tails of positive hypergeometric series and the closed-sum identities.
//!
//! For a series `Σ w(j) a_j` with term ratio `a_{j+1}/a_j = P(j)/Q(j)` the
//! normalized tail `ρ_N = (Σ_{j>N} w(j) a_j)/a_{N+1}` solves
//! `ρ_N = w(N+1) + r_{N+1} ρ_{N+1}`. A polynomial `f` with
//! `f(N) ≥ w(N+1) + r_{N+1} f(N+1)` for every `N ≥ N₀` bounds `ρ` from above
//! on that range (telescoping), and the reverse inequality bounds it from
//! below. Both inequalities are polynomial in `N` and are
//! certified for all `N ≥ N₀` by checking that the Taylor shift to `N₀` has
//! coefficients of one sign.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{ExactScalar, ModelId, WeightTable};
use crate::error::{Error, Result};

type Poly = Vec<BigRational>;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(BigRational::zero);
            let y = b.get(i).cloned().unwrap_or_else(BigRational::zero);
            x + y
        })
        .collect()
}

fn poly_scale(a: &Poly, c: &BigRational) -> Poly {
    a.iter().map(|x| x * c).collect()
}

fn poly_eval(a: &Poly, x: &BigRational) -> BigRational {
    a.iter()
        .rev()
        .fold(BigRational::zero(), |acc, c| acc * x + c)
}

/// Coefficients of `a(x + c)`.
fn poly_shift(a: &Poly, c: &BigRational) -> Poly {
    let mut out: Poly = vec![BigRational::zero(); a.len()];
    for coef in a.iter().rev() {
        // out = out·(x + c) + coef
        let mut next = vec![BigRational::zero(); out.len()];
        for i in 0..out.len() {
            next[i] += &out[i] * c;
            if i + 1 < out.len() {
                next[i + 1] += &out[i];
            }
        }
        next[0] += coef;
        out = next;
    }
    out
}

fn poly_from_shifts(shifts: &[BigRational]) -> Poly {
    shifts.iter().fold(vec![BigRational::one()], |acc, s| {
        poly_mul(&acc, &vec![s.clone(), BigRational::one()])
    })
}

fn trim(mut a: Poly) -> Poly {
    while a.len() > 1 && a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

fn coef(a: &Poly, i: usize) -> BigRational {
    a.get(i).cloned().unwrap_or_else(BigRational::zero)
}

/// Weighted series `Σ_j w(j) a_j` with positive `a_j`, `a_{j+1}/a_j = Π(j+α_i)/Π(j+β_i)`
/// and polynomial weight `w`.
#[derive(Clone, Debug)]
pub struct HypergeometricSeries {
    num: Poly,
    den: Poly,
    weight: Poly,
}

/// Bounds `lower ≤ Σ_{j>N} w(j) a_j ≤ upper` valid for the evaluation point `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailEnclosure {
    pub lower: ExactScalar,
    pub upper: ExactScalar,
}

impl TailEnclosure {
    pub fn width(&self) -> ExactScalar {
        &self.upper - &self.lower
    }
}

/// Solves a small dense system over ℚ; `None` if singular.
#[allow(clippy::needless_range_loop)]
fn solve(mut m: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = &m[r][col] / &m[col][col];
                for c in col..n {
                    let v = &f * &m[col][c];
                    m[r][c] -= v;
                }
                let v = &f * &rhs[col];
                rhs[r] -= v;
            }
        }
    }
    Some((0..n).map(|i| &rhs[i] / &m[i][i]).collect())
}

impl HypergeometricSeries {
    /// Ratio given by the shifts `α_i` (numerator) and `β_i` (denominator), equal in number.
    pub fn new(num_shifts: &[BigRational], den_shifts: &[BigRational]) -> Self {
        assert_eq!(num_shifts.len(), den_shifts.len(), "ratio must tend to 1");
        Self {
            num: poly_from_shifts(num_shifts),
            den: poly_from_shifts(den_shifts),
            weight: vec![BigRational::one()],
        }
    }

    /// Same ratio with every term multiplied by `j` (first moment).
    pub fn moment(&self) -> Self {
        Self {
            weight: poly_mul(&self.weight, &vec![BigRational::zero(), BigRational::one()]),
            ..self.clone()
        }
    }

    /// Moment series with the weight folded into the term ratio, `b_j = j·a_j`.
    ///
    /// Its tail certificate is first order in `N` relative to `b_{N+1}`.
    pub fn moment_terms(&self) -> Self {
        Self {
            num: poly_mul(&self.num, &vec![BigRational::one(), BigRational::one()]),
            den: poly_mul(&self.den, &vec![BigRational::zero(), BigRational::one()]),
            weight: self.weight.clone(),
        }
    }

    /// `a_{j+1}/a_j`.
    pub fn ratio(&self, j: u64) -> BigRational {
        let x = BigRational::from_integer(j.into());
        poly_eval(&self.num, &x) / poly_eval(&self.den, &x)
    }

    /// `D_f(N) = (f(N) − w(N+1))Q(N+1) − P(N+1)f(N+1)`; `ρ_N ≤ f(N)` wherever `D_f ≥ 0`.
    fn defect(&self, f: &Poly) -> Poly {
        let one = BigRational::one();
        let qs = poly_shift(&self.den, &one);
        let ps = poly_shift(&self.num, &one);
        let ws = poly_shift(&self.weight, &one);
        let lhs = poly_mul(&poly_add(f, &poly_scale(&ws, &-one.clone())), &qs);
        trim(poly_add(
            &lhs,
            &poly_scale(&poly_mul(&ps, &poly_shift(f, &one)), &-one),
        ))
    }

    /// Polynomial `f` of degree `deg w + 1` cancelling the top `deg w + 2` coefficients of the defect.
    fn profile(&self) -> Option<Poly> {
        let m = self.weight.len();
        let d = self.den.len() - 1;
        let basis = |i: usize| {
            let mut e = vec![BigRational::zero(); i + 1];
            e[i] = BigRational::one();
            e
        };
        let zero = vec![BigRational::zero()];
        let d0 = self.defect(&zero);
        let cols: Vec<Poly> = (0..=m)
            .map(|i| {
                poly_add(
                    &self.defect(&basis(i)),
                    &poly_scale(&d0, &-BigRational::one()),
                )
            })
            .collect();
        // Degrees m+d−1 down to d−1.
        let rows: Vec<usize> = (0..=m).map(|r| m + d - 1 - r).collect();
        let mat = rows
            .iter()
            .map(|&deg| cols.iter().map(|c| coef(c, deg)).collect())
            .collect();
        let rhs = rows.iter().map(|&deg| -coef(&d0, deg)).collect();
        solve(mat, rhs)
    }

    fn nonnegative_from(poly: &Poly, n0: &BigRational) -> bool {
        poly_shift(poly, n0).iter().all(|c| !c.is_negative())
    }

    /// Certified tail after index `n`, given the base term `a_{n+1} > 0`.
    pub fn tail(&self, n: u64, next_term: &ExactScalar) -> Option<TailEnclosure> {
        let f = self.profile()?;
        let nn = BigRational::from_integer(n.into());
        let centre = poly_eval(&f, &nn);
        let exact = self.defect(&f);
        // A constant shift of f adds ε·(Q(N+1) − P(N+1)) to the defect.
        let one = BigRational::one();
        let gap = trim(poly_add(
            &poly_shift(&self.den, &one),
            &poly_scale(&poly_shift(&self.num, &one), &-one.clone()),
        ));
        let mut best: Option<BigRational> = None;
        if exact.iter().all(|c| c.is_zero()) {
            best = Some(BigRational::zero());
        } else {
            for k in 0..160u32 {
                let eps = BigRational::new(BigInt::one(), BigInt::one() << k as usize);
                let up = poly_add(&exact, &poly_scale(&gap, &eps));
                let lo = poly_add(&poly_scale(&exact, &-one.clone()), &poly_scale(&gap, &eps));
                if Self::nonnegative_from(&up, &nn) && Self::nonnegative_from(&lo, &nn) {
                    best = Some(eps);
                } else if best.is_some() {
                    break;
                }
            }
        }
        let eps = best?;
        let lower = ExactScalar::from_ratio(&centre - &eps);
        let upper = ExactScalar::from_ratio(&centre + &eps);
        if lower.signum() == std::cmp::Ordering::Less {
            return None;
        }
        Some(TailEnclosure {
            lower: next_term * &lower,
            upper: next_term * &upper,
        })
    }
}

/// One closed-sum identity evaluated on a truncated series.
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub name: String,
    pub target: f64,
    /// Certified enclosure of the series (both ends equal for the asymptotic check).
    pub lower: f64,
    pub upper: f64,
    /// Distance from the target to the certified interval (0 when inside).
    pub residual: f64,
    pub pass: bool,
}

/// Outcome of [`identity_suite`].
#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub model: ModelId,
    pub p_max: u32,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

struct SeriesSpec {
    name: &'static str,
    /// First index of the hypergeometric part.
    start: u32,
    /// Exact contribution of indices below `start`.
    head: ExactScalar,
    moment: bool,
    target: ExactScalar,
}

fn base_series(model: ModelId) -> HypergeometricSeries {
    match model {
        // a_j = Z(j+1) g^{−j}: ratio (j − 1/2)/(j + 2) for both triangulation families.
        ModelId::TypeII | ModelId::TypeI => HypergeometricSeries::new(&[q(-1, 2)], &[q(2, 1)]),
        ModelId::Quad => HypergeometricSeries::new(&[q(2, 3), q(1, 3)], &[q(2, 1), q(3, 2)]),
    }
}

fn specs(model: ModelId) -> Vec<SeriesSpec> {
    let s3 = ExactScalar::sqrt3();
    match model {
        ModelId::TypeII => vec![
            SeriesSpec {
                name: "sum Z(p+1) 9^-p",
                start: 1,
                head: ExactScalar::zero(),
                moment: false,
                target: ExactScalar::from_frac(1, 6),
            },
            SeriesSpec {
                name: "sum p Z(p+1) 9^-p",
                start: 1,
                head: ExactScalar::zero(),
                moment: true,
                target: ExactScalar::from_frac(1, 3),
            },
        ],
        ModelId::TypeI => {
            let z1 = WeightTable::get(ModelId::TypeI).z(1).expect("Z(1)");
            vec![
                SeriesSpec {
                    name: "generating function at 1/12",
                    start: 1,
                    head: z1,
                    moment: false,
                    // 1/2 − 1/(2√3)
                    target: ExactScalar::from_frac(1, 2) - &s3 * &ExactScalar::from_frac(1, 6),
                },
                SeriesSpec {
                    name: "sum p Z(p+1) 12^-p",
                    start: 1,
                    head: ExactScalar::zero(),
                    moment: true,
                    target: &s3 * &ExactScalar::from_frac(1, 6),
                },
            ]
        }
        ModelId::Quad => vec![
            SeriesSpec {
                name: "sum Z(k+1) 54^-k",
                start: 1,
                head: ExactScalar::from_frac(4, 3),
                moment: false,
                target: ExactScalar::from_frac(3, 2),
            },
            SeriesSpec {
                name: "sum k Z(k+1) 54^-k",
                start: 1,
                head: ExactScalar::zero(),
                moment: true,
                target: ExactScalar::from_frac(1, 2),
            },
        ],
    }
}

/// Exact enclosure `[lo, hi]` of a full series, partial sum through `p_max` plus certified tail.
fn certify(
    model: ModelId,
    spec: &SeriesSpec,
    p_max: u32,
    tail_tol: f64,
    sharp: bool,
) -> Result<(ExactScalar, ExactScalar)> {
    let table = WeightTable::get(model);
    let g = ExactScalar::from_int(model.boundary_growth() as i64);
    let base = base_series(model);
    // Terms by the exact ratio recurrence, seeded from the table.
    let mut a = table.z(spec.start + 1)? / g.pow(spec.start);
    let weight = |j: u32, a: &ExactScalar| {
        if spec.moment {
            a * &ExactScalar::from_int(j as i64)
        } else {
            a.clone()
        }
    };
    let mut partial = spec.head.clone();
    for j in spec.start..=p_max {
        partial += &weight(j, &a);
        a = &a * &ExactScalar::from_ratio(base.ratio(j as u64));
    }
    let tail = match (spec.moment, sharp) {
        (false, _) => base.tail(p_max as u64, &a),
        (true, true) => base.moment().tail(p_max as u64, &a),
        (true, false) => base
            .moment_terms()
            .tail(p_max as u64, &weight(p_max + 1, &a)),
    }
    .ok_or_else(|| {
        Error::TailTooLarge(format!(
            "{model} {}: no certified tail at p_max = {p_max}",
            spec.name
        ))
    })?;
    let width = tail.width().to_f64();
    if width > tail_tol {
        return Err(Error::TailTooLarge(format!(
            "{model} {}: certified tail width {width:e} exceeds {tail_tol:e}",
            spec.name
        )));
    }
    Ok((&partial + &tail.lower, &partial + &tail.upper))
}

/// Enclosures of `Σ a_j` and `Σ j·a_j` over the full index range of the model's jump law.
pub(crate) fn jump_sums(
    model: ModelId,
    cutoff: u32,
    tail_tol: f64,
) -> Result<[(ExactScalar, ExactScalar); 2]> {
    let s = specs(model);
    Ok([
        certify(model, &s[0], cutoff, tail_tol, true)?,
        certify(model, &s[1], cutoff, tail_tol, true)?,
    ])
}

/// Leading constant of `Z(j+1) g^{−j} j^{5/2}`.
pub(crate) fn term_tail_constant(model: ModelId) -> f64 {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    match model {
        ModelId::TypeII => 1.0 / (4.0 * sqrt_pi),
        ModelId::TypeI => 3f64.sqrt() / (8.0 * sqrt_pi),
        ModelId::Quad => 1.0 / (3.0 * std::f64::consts::PI).sqrt(),
    }
}

/// Checks the closed sums of `Z(j+1) g^{−j}` and the asymptotic tail constant.
///
/// Partial sums are exact; the remainder after `p_max` is certified to first
/// order by [`HypergeometricSeries::tail`] applied to the summed terms. If the certified interval is
/// wider than `tail_tol` the truncation cannot decide the identity.
pub fn identity_suite(model: ModelId, p_max: u32, tail_tol: f64) -> Result<IdentityReport> {
    if p_max < 2 {
        return Err(Error::Argument("p_max must be at least 2".into()));
    }
    let table = WeightTable::get(model);
    let g = ExactScalar::from_int(model.boundary_growth() as i64);
    let term = |j: u32| -> Result<ExactScalar> { Ok(table.z(j + 1)? / g.pow(j)) };
    let base = base_series(model);

    // The ratio used for the tail must agree with the exact terms.
    for j in 1..p_max.min(60) {
        let lhs = term(j + 1)?;
        let rhs = &term(j)? * &ExactScalar::from_ratio(base.ratio(j as u64));
        if lhs != rhs {
            return Err(Error::Integrity(format!(
                "{model}: term ratio mismatch at j = {j}"
            )));
        }
    }

    let mut checks = Vec::new();
    for spec in specs(model) {
        let (lo, hi) = certify(model, &spec, p_max, tail_tol, false)?;
        let inside = lo <= spec.target && spec.target <= hi;
        let residual = if inside {
            0.0
        } else {
            (spec.target.to_f64() - lo.to_f64())
                .abs()
                .min((spec.target.to_f64() - hi.to_f64()).abs())
        };
        checks.push(IdentityCheck {
            name: spec.name.to_string(),
            target: spec.target.to_f64(),
            lower: lo.to_f64(),
            upper: hi.to_f64(),
            residual,
            pass: inside && residual <= tail_tol,
        });
    }

    // Asymptotic constant of the terms.
    let expected = term_tail_constant(model);
    let t = term(p_max)?;
    let observed = t.to_f64() * (p_max as f64).powf(2.5);
    let rel = ((observed - expected) / expected).abs();
    checks.push(IdentityCheck {
        name: format!(
            "Z(p+1) p^(5/2) / {}^p -> tail constant",
            model.boundary_growth()
        ),
        target: expected,
        lower: observed,
        upper: observed,
        residual: rel,
        pass: rel < 0.01,
    });
    Ok(IdentityReport {
        model,
        p_max,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_matches_evaluation() {
        let p: Poly = vec![q(3, 1), q(-2, 1), q(1, 2)];
        let s = poly_shift(&p, &q(5, 1));
        for x in 0..4 {
            let xr = BigRational::from_integer(x.into());
            assert_eq!(poly_eval(&s, &xr), poly_eval(&p, &(&xr + q(5, 1))));
        }
    }

    #[test]
    fn single_factor_tail_is_exact() {
        // a_j ∝ Γ(j − 1/2)/Γ(j + 2) telescopes.
        let s = base_series(ModelId::TypeII);
        let t = s.tail(10, &ExactScalar::one()).unwrap();
        assert_eq!(t.lower, t.upper);
        assert_eq!(t.lower, ExactScalar::from_int(8)); // (2/3)(N + 2) at N = 10
                                                       // Σ_{j>N} j a_j = (2N + 4/3)(N + 2) a_{N+1}
        let m = s.moment().tail(10, &ExactScalar::one()).unwrap();
        assert_eq!(m.lower, m.upper);
        assert_eq!(m.lower, ExactScalar::from_int(256));
    }

    #[test]
    fn suites_pass() {
        for model in ModelId::ALL {
            let r = identity_suite(model, 400, 1e-6).unwrap();
            assert!(r.all_pass(), "{model}: {:?}", r.checks);
        }
    }

    #[test]
    fn short_truncation_is_rejected() {
        assert!(matches!(
            identity_suite(ModelId::TypeII, 5, 1e-12),
            Err(Error::TailTooLarge(_))
        ));
    }
}
