//! Limit laws, scaling constants and the estimators that compare samples with them.

mod constants;
mod radical;

pub use constants::{constants, Constant, ConstantEntry, ConstantsTable};
pub use radical::{Base, Radical};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn nonneg(name: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Argument(format!(
            "{name} must be a finite nonnegative number, got {x}"
        )));
    }
    Ok(())
}

/// `E[exp(−λ L_s)] = (1 + λs²/4)^{−3/2}`: a Gamma law of shape 3/2 and scale `s²/4`.
pub fn laplace_l(lambda: f64, s: f64) -> Result<f64> {
    nonneg("lambda", lambda)?;
    nonneg("s", s)?;
    Ok((1.0 + lambda * s * s / 4.0).powf(-1.5))
}

fn m_argument(lambda: f64, s: f64) -> f64 {
    (2.0 * lambda).powf(0.25) * s / (8.0f64 / 3.0).sqrt()
}

/// `E[exp(−λ M_s)] = 3^{3/2} cosh(x) (cosh²(x) + 2)^{−3/2}` with `x = (2λ)^{1/4} s / √(8/3)`.
pub fn laplace_m(lambda: f64, s: f64) -> Result<f64> {
    nonneg("lambda", lambda)?;
    nonneg("s", s)?;
    let c = m_argument(lambda, s).cosh();
    Ok(3f64.powf(1.5) * c * (c * c + 2.0).powf(-1.5))
}

/// The same transform through `sech x = 2e^{−x}/(1 + e^{−2x})`:
/// `3^{3/2} sech²x (1 + 2 sech²x)^{−3/2}`, which stays finite for large `x`.
pub fn laplace_m_sech(lambda: f64, s: f64) -> Result<f64> {
    nonneg("lambda", lambda)?;
    nonneg("s", s)?;
    let x = m_argument(lambda, s);
    let e = (-x).exp();
    let sech = 2.0 * e / (1.0 + e * e);
    let q = sech * sech;
    Ok(3f64.powf(1.5) * q * (1.0 + 2.0 * q).powf(-1.5))
}

/// Density of `ξ`: `x^{−5/2} e^{−1/(2x)} / √(2π)`.
pub fn xi_density(x: f64) -> Result<f64> {
    nonneg("x", x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok((-0.5 / x).exp() * x.powf(-2.5) / (2.0 * std::f64::consts::PI).sqrt())
}

/// `E[exp(−λξ)] = (1 + √(2λ)) e^{−√(2λ)}`.
pub fn xi_laplace(lambda: f64) -> Result<f64> {
    nonneg("lambda", lambda)?;
    let r = (2.0 * lambda).sqrt();
    Ok((1.0 + r) * (-r).exp())
}

/// `∫ x^k ξ(dx)` for `k ∈ {0, 1}` by quadrature after `x = 1/w²`.
pub fn xi_moment(k: u32) -> Result<f64> {
    if k > 1 {
        return Err(Error::Domain(format!("xi has no moment of order {k}")));
    }
    // x = 1/w², dx = 2 w^{−3} dw: the integrand becomes 2 w^{2 − 2k} e^{−w²/2}/√(2π).
    let f = |w: f64| {
        2.0 * w.powi(2 - 2 * k as i32) * (-0.5 * w * w).exp() / (2.0 * std::f64::consts::PI).sqrt()
    };
    Ok(simpson(f, 0.0, 40.0, 20_000))
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Reference law of a rescaled observable.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ReferenceLaw {
    /// Hull boundary length `L_s`.
    BoundaryLength { s: f64 },
    /// Hull volume `M_s`.
    Volume { s: f64 },
    /// Rescaled Boltzmann disk volume `ξ`.
    Xi,
}

impl ReferenceLaw {
    pub fn laplace(&self, lambda: f64) -> Result<f64> {
        match *self {
            ReferenceLaw::BoundaryLength { s } => laplace_l(lambda, s),
            ReferenceLaw::Volume { s } => laplace_m(lambda, s),
            ReferenceLaw::Xi => xi_laplace(lambda),
        }
    }

    pub fn density(&self, x: f64) -> Result<Option<f64>> {
        match *self {
            ReferenceLaw::BoundaryLength { s } => {
                nonneg("x", x)?;
                let scale = s * s / 4.0;
                if scale == 0.0 {
                    return Ok(None);
                }
                let g = statrs::function::gamma::gamma(1.5);
                Ok(Some(x.sqrt() * (-x / scale).exp() / (g * scale.powf(1.5))))
            }
            ReferenceLaw::Volume { .. } => Ok(None),
            ReferenceLaw::Xi => xi_density(x).map(Some),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ReferenceLaw::BoundaryLength { s } => 1.5 * s * s / 4.0,
            // −d/dλ at 0 of 3^{3/2} cosh x (cosh² x + 2)^{−3/2} with x² ∝ √λ is infinite.
            ReferenceLaw::Volume { .. } => f64::INFINITY,
            ReferenceLaw::Xi => 1.0,
        }
    }
}

/// Empirical transform at one `λ` with its bootstrap interval.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceEstimate {
    pub lambda: f64,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl LaplaceEstimate {
    pub fn covers(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    /// `(q, value)` at 0.05, 0.25, 0.5, 0.75, 0.95.
    pub quantiles: Vec<(f64, f64)>,
    pub laplace: Vec<LaplaceEstimate>,
}

/// Bootstrap resamples behind every interval.
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
/// Smallest sample accepted by [`empirical_laplace`].
pub const MIN_SAMPLES: usize = 100;

/// Sample moments, quantiles and `mean(exp(−λx))` with 95% percentile-bootstrap intervals.
pub fn empirical_laplace(samples: &[f64], lambdas: &[f64], seed: u64) -> Result<EmpiricalSummary> {
    if samples.is_empty() {
        return Err(Error::Argument("empty sample".into()));
    }
    if samples.len() < MIN_SAMPLES {
        return Err(Error::Argument(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    for &x in samples {
        nonneg("sample", x)?;
    }
    for &l in lambdas {
        nonneg("lambda", l)?;
    }
    let n = samples.len();
    let (mean, variance) = mean_variance(samples);
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let quantiles = [0.05, 0.25, 0.5, 0.75, 0.95]
        .iter()
        .map(|&q| (q, quantile_sorted(&sorted, q)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut laplace = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let terms: Vec<f64> = samples.iter().map(|&x| (-lambda * x).exp()).collect();
        let value = terms.iter().sum::<f64>() / n as f64;
        let mut boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
            .map(|_| (0..n).map(|_| terms[rng.random_range(0..n)]).sum::<f64>() / n as f64)
            .collect();
        boot.sort_by(f64::total_cmp);
        laplace.push(LaplaceEstimate {
            lambda,
            value,
            ci_low: quantile_sorted(&boot, 0.025),
            ci_high: quantile_sorted(&boot, 0.975),
        });
    }
    Ok(EmpiricalSummary {
        count: n,
        mean,
        variance,
        quantiles,
        laplace,
    })
}

/// Mean and unbiased variance.
pub fn mean_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
}

/// Outcome of a two-sample Kolmogorov–Smirnov test.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub critical: f64,
    pub p_value: f64,
    pub level: f64,
    pub passed: bool,
}

/// `sup |F_a − F_b|` with the asymptotic critical value `c(α)·√((n+m)/(nm))`,
/// `c(α) = √(−ln(α/2)/2)`.
pub fn ks_two_sample(a: &[f64], b: &[f64], level: f64) -> Result<KsOutcome> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Argument("KS test needs two nonempty samples".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Argument(format!(
            "level must lie in (0, 1), got {level}"
        )));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < n && j < m {
        let t = x[i].min(y[j]);
        while i < n && x[i] <= t {
            i += 1;
        }
        while j < m && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let critical = (-(level / 2.0).ln() / 2.0).sqrt() / ne.sqrt();
    let p_value = kolmogorov_q((ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d);
    Ok(KsOutcome {
        statistic: d,
        critical,
        p_value,
        level,
        passed: d <= critical,
    })
}

/// `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::Argument(
            "slope needs two or more positive points".into(),
        ));
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::ModelId;

    #[test]
    fn boundary_transform() {
        assert_eq!(laplace_l(0.0, 3.0).unwrap(), 1.0);
        assert!((laplace_l(4.0, 1.0).unwrap() - 2f64.powf(-1.5)).abs() < 1e-15);
        let h = 1e-5;
        for s in [0.5, 1.0, 2.0] {
            let d = (laplace_l(h, s).unwrap() - laplace_l(0.0, s).unwrap()) / h;
            assert!((-d - 3.0 * s * s / 8.0).abs() < 1e-4, "{d}");
        }
        // Gamma(3/2, scale s²/4) transform.
        for l in [0.1, 1.0, 7.5] {
            let scale: f64 = 0.25;
            assert_eq!(laplace_l(l, 1.0).unwrap(), (1.0 + scale * l).powf(-1.5));
        }
        assert!(laplace_l(-1.0, 1.0).is_err());
    }

    #[test]
    fn volume_transform_two_ways() {
        assert!((laplace_m(0.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        let grid = [0.0, 0.5, 1.0, 2.0, 4.0];
        let vals: Vec<f64> = grid.iter().map(|&l| laplace_m(l, 1.0).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        for &l in &grid[1..] {
            for s in [0.3, 1.0, 3.0] {
                let (a, b) = (laplace_m(l, s).unwrap(), laplace_m_sech(l, s).unwrap());
                assert!((a - b).abs() < 1e-12, "{a} {b}");
            }
        }
        assert!(laplace_m(1.0, -1.0).is_err());
    }

    #[test]
    fn transforms_are_log_convex() {
        let laws = [
            ReferenceLaw::BoundaryLength { s: 1.0 },
            ReferenceLaw::Volume { s: 1.0 },
            ReferenceLaw::Xi,
        ];
        for law in laws {
            let g: Vec<f64> = (0..40)
                .map(|i| law.laplace(0.1 * i as f64).unwrap().ln())
                .collect();
            assert_eq!(g[0], 0.0);
            for w in g.windows(3) {
                assert!(w[1] < w[0]);
                assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-12);
            }
        }
    }

    #[test]
    fn xi_reference_values() {
        assert_eq!(xi_laplace(0.0).unwrap(), 1.0);
        assert!((xi_laplace(0.5).unwrap() - 2.0 / std::f64::consts::E).abs() < 1e-15);
        assert!((xi_moment(0).unwrap() - 1.0).abs() < 1e-8);
        assert!((xi_moment(1).unwrap() - 1.0).abs() < 1e-6);
        assert!(xi_density(-1.0).is_err());
    }

    #[test]
    fn constants_examples() {
        let t2 = constants(ModelId::TypeII);
        assert!((t2.h_star.value() - 1.747_16).abs() < 1e-5);
        assert_eq!(t2.c1.exact, Radical::frac(4, 1));
        assert_eq!(t2.c2.exact, Radical::frac(3, 1));
        assert!((t2.p.value() / t2.h.value().powi(2) - 4.0).abs() < 1e-12);
        let quad = constants(ModelId::Quad);
        assert_eq!(quad.b.exact, Radical::frac(9, 2));
        let t1 = constants(ModelId::TypeI);
        // Hull perimeters of both triangulation types share p/h².
        let ratio =
            |k: &ConstantsTable| k.p.exact.clone() / (k.h.exact.clone() * k.h.exact.clone());
        assert_eq!(ratio(&t1), ratio(&t2));
        for m in ModelId::ALL {
            let k = constants(m);
            assert!((k.v.value() - k.p.value().powi(2) * k.b.value()).abs() < 1e-14);
            assert!((k.c2.value() - 1.0 / (k.p.value() * k.h.value())).abs() < 1e-12);
        }
    }

    #[test]
    fn empirical_laplace_examples() {
        let zeros = vec![0.0; 200];
        let s = empirical_laplace(&zeros, &[1.0], 1).unwrap();
        assert_eq!(
            (
                s.laplace[0].value,
                s.laplace[0].ci_low,
                s.laplace[0].ci_high
            ),
            (1.0, 1.0, 1.0)
        );
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let exp: Vec<f64> = (0..100_000)
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        let s = empirical_laplace(&exp, &[1.0], 3).unwrap();
        assert!(s.laplace[0].covers(0.5), "{:?}", s.laplace[0]);
        let width = |xs: &[f64]| {
            let e = empirical_laplace(xs, &[1.0], 4).unwrap().laplace[0];
            e.ci_high - e.ci_low
        };
        let ratio = width(&exp[..2_500]) / width(&exp[..10_000]);
        assert!((ratio - 2.0).abs() < 0.4, "{ratio}");
        assert!(empirical_laplace(&[], &[1.0], 0).is_err());
    }

    #[test]
    fn ks_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let same = ks_two_sample(&u, &u, 0.01).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert!(same.passed);
        let shifted: Vec<f64> = (0..10_000).map(|_| 0.5 + rng.random::<f64>()).collect();
        let apart = ks_two_sample(&u, &shifted, 0.01).unwrap();
        assert!(apart.statistic >= 0.5 && !apart.passed);
        let passes = (0..100)
            .filter(|_| {
                let s: Vec<f64> = (0..2_000).map(|_| rng.random::<f64>()).collect();
                ks_two_sample(&s[..1_000], &s[1_000..], 0.01)
                    .unwrap()
                    .passed
            })
            .count();
        assert!(passes >= 98, "{passes}");
        assert!(ks_two_sample(&[], &u, 0.01).is_err());
    }

    #[test]
    fn slopes() {
        let pts: Vec<(f64, f64)> = [1e3, 1e4, 1e5]
            .iter()
            .map(|&n: &f64| (n, 2.0 * n.powf(1.0 / 3.0)))
            .collect();
        assert!((log_log_slope(&pts).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }
}
