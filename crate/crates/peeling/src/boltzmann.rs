//! Free Boltzmann maps of the polygon: size laws, size samplers, the finite
//! peeling kernel and the recursive disk sampler.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rand::Rng;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::enumeration::{ln_count, ln_z, ExactScalar, ModelId, WeightTable};
use crate::error::{Error, Result};
use crate::mapbuild::{HalfEdgeMap, Side};

/// Default cap on the inner vertices produced by one disk.
pub const DEFAULT_MAX_VOLUME: u64 = 10_000_000;
/// Default cap on the number of terms scanned by sequential inversion.
pub const DEFAULT_MAX_TERMS: u64 = 100_000_000;

/// Exact `E|T^{(p)}| = (p−1)(2p−3)/3` for type II disks.
pub fn mean_size(p: u32) -> Result<ExactScalar> {
    if p < 2 {
        return Err(Error::Domain(format!("mean size needs p >= 2, got {p}")));
    }
    let p = p as i64;
    Ok(ExactScalar::from_frac((p - 1) * (2 * p - 3), 3))
}

/// Law of the number of inner vertices of a free Boltzmann map of the `p`-gon.
#[derive(Clone, Debug)]
pub struct BoltzmannSizeLaw {
    model: ModelId,
    p: u32,
    ln_weight: f64,
    ln_z: f64,
}

impl BoltzmannSizeLaw {
    pub fn new(model: ModelId, p: u32) -> Result<Self> {
        model.check_boundary(p)?;
        Ok(Self {
            model,
            p,
            ln_weight: model.vertex_weight_f64().ln(),
            ln_z: ln_z(model, p),
        })
    }

    pub fn model(&self) -> ModelId {
        self.model
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// `ln P(N = n)`.
    pub fn ln_pmf(&self, n: u64) -> f64 {
        if self.model == ModelId::TypeII && n >= STABLE_FROM {
            return ln_pmf_type2_large(n, self.p);
        }
        if self.model == ModelId::TypeI && self.p == 1 && n == 0 {
            return f64::NEG_INFINITY;
        }
        ln_count(self.model, n, self.p) + n as f64 * self.ln_weight - self.ln_z
    }

    pub fn pmf(&self, n: u64) -> f64 {
        self.ln_pmf(n).exp()
    }

    /// Exact `P(N = n)`.
    pub fn exact_pmf(&self, n: u32) -> Result<ExactScalar> {
        let t = WeightTable::get(self.model);
        let count = ExactScalar::from_ratio(num_rational::BigRational::from_integer(
            t.count(n, self.p)?.into(),
        ));
        Ok(count * self.model.vertex_weight().pow(n) / t.z(self.p)?)
    }

    /// `P(N = n+1)/P(N = n)` in closed form, when the family has one.
    pub fn step_ratio(&self, n: u64) -> Option<f64> {
        let (n, p) = (n as f64, self.p as f64);
        match self.model {
            ModelId::TypeII => Some(
                4.0 / 27.0
                    * (2.0 * p + 3.0 * n - 1.0)
                    * (2.0 * p + 3.0 * n - 2.0)
                    * (2.0 * p + 3.0 * n - 3.0)
                    / ((n + 1.0) * (2.0 * p + 2.0 * n) * (2.0 * p + 2.0 * n - 1.0)),
            ),
            ModelId::Quad => Some(
                0.25 * (3.0 * p + 2.0 * n - 2.0) * (3.0 * p + 2.0 * n - 1.0)
                    / ((n + 1.0) * (n + 3.0 * p)),
            ),
            ModelId::TypeI => None,
        }
    }

    /// Exact mean, known for type II.
    pub fn mean(&self) -> Option<ExactScalar> {
        (self.model == ModelId::TypeII).then(|| mean_size(self.p).expect("p >= 2"))
    }

    /// Upper bound on `P(N > n)` from the power-law envelope (type II).
    pub fn tail_residual(&self, n: u64) -> Option<f64> {
        (self.model == ModelId::TypeII).then(|| {
            let l = type2_envelope_ln(self.p).exp();
            2.0 / 3.0 * l * (n as f64 + 0.5).powf(-1.5)
        })
    }
}

const STABLE_FROM: u64 = 10_000;

/// `ln((2p−3)!) − 2 ln((p−2)!) − ln Z(p)` for type II.
fn type2_prefactor_ln(p: u32) -> f64 {
    let pf = p as f64;
    ln_gamma(2.0 * pf - 2.0) - 2.0 * ln_gamma(pf - 1.0) - ln_z(ModelId::TypeII, p)
}

/// `ln L` with `P(N = n) ≤ L n^{−5/2}` for every `n ≥ 1` (type II).
fn type2_envelope_ln(p: u32) -> f64 {
    let pf = p as f64;
    (2.0 * pf - 3.5) * 3f64.ln() + (2.5 - 2.0 * pf) * 2f64.ln()
        - 0.5 * (2.0 * std::f64::consts::PI).ln()
        + type2_prefactor_ln(p)
}

fn stirling_remainder(z: f64) -> f64 {
    let z2 = z * z;
    1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2)
}

/// Type II `ln P(N = n)` written as `ln L − (5/2) ln n + D(n)` with `D` free of cancellation.
fn ln_pmf_type2_large(n: u64, p: u32) -> f64 {
    let (nf, pf) = (n as f64, p as f64);
    let z1 = 3.0 * nf + 2.0 * pf - 3.0;
    let z2 = nf + 1.0;
    let z3 = 2.0 * nf + 2.0 * pf - 1.0;
    let d = 3.0 + (z1 - 0.5) * ((2.0 * pf - 3.0) / (3.0 * nf)).ln_1p()
        - (z2 - 0.5) * (1.0 / nf).ln_1p()
        - (z3 - 0.5) * ((2.0 * pf - 1.0) / (2.0 * nf)).ln_1p()
        + stirling_remainder(z1)
        - stirling_remainder(z2)
        - stirling_remainder(z3);
    type2_envelope_ln(p) - 2.5 * nf.ln() + d
}

/// Inversion of `u ∈ [0, 1)` through the lazily generated pmf.
pub fn size_by_inversion(law: &BoltzmannSizeLaw, u: f64, max_terms: u64) -> Result<u64> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Argument(format!(
            "uniform must lie in [0,1), got {u}"
        )));
    }
    let mut term = law.pmf(0);
    let mut acc = term;
    let mut n = 0u64;
    while acc <= u {
        if n >= max_terms {
            return Err(Error::Resource(format!(
                "size inversion did not reach {u} within {max_terms} terms"
            )));
        }
        term = match law.step_ratio(n) {
            Some(r) if term > 1e-280 => term * r,
            _ => law.pmf(n + 1),
        };
        n += 1;
        acc += term;
    }
    Ok(n)
}

/// Exact rejection envelope for one type II boundary size.
///
/// A tabulated head `[0, K]` is sampled by inversion; the rest uses the
/// bounds `P(N = n) ≤ P(N = mode)` and `P(N = n) ≤ L n^{−5/2}`.
#[derive(Debug)]
struct SizeHat {
    law: BoltzmannSizeLaw,
    cum: Vec<f64>,
    head_end: u64,
    flat_end: u64,
    flat_height: f64,
    flat_mass: f64,
    envelope: f64,
    tail_mass: f64,
}

const HEAD_MIN: u64 = 63;
const HEAD_MAX: u64 = 1023;

impl SizeHat {
    fn build(p: u32) -> Self {
        let law = BoltzmannSizeLaw::new(ModelId::TypeII, p).expect("p >= 2");
        // First n with P(n+1) < P(n).
        let (mut lo, mut hi) = (0u64, 16 * (p as u64) * (p as u64) + 16);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if law.step_ratio(mid).expect("type2") < 1.0 {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let mode = lo;
        let flat_height = law.pmf(mode);
        let envelope = type2_envelope_ln(p).exp();
        let crossing = (envelope / flat_height).powf(0.4).floor() as u64;
        let flat_end = crossing.max(mode);
        let head_end = flat_end.clamp(HEAD_MIN, HEAD_MAX);
        let mut cum = Vec::with_capacity(head_end as usize + 1);
        let mut acc = 0.0;
        for n in 0..=head_end {
            acc += law.pmf(n);
            cum.push(acc);
        }
        let start = flat_end.max(head_end);
        Self {
            law,
            cum,
            head_end,
            flat_end: start,
            flat_height,
            flat_mass: (start - head_end) as f64 * flat_height,
            envelope,
            tail_mass: 2.0 / 3.0 * envelope * (start as f64 + 0.5).powf(-1.5),
        }
    }

    /// Mass the rounded Pareto proposal puts on `n`.
    fn tail_hat(&self, n: u64) -> f64 {
        let lo = n as f64 - 0.5;
        let shrink = -(1.5 * (-1.0 / (n as f64 + 0.5)).ln_1p()).exp_m1();
        2.0 / 3.0 * self.envelope * lo.powf(-1.5) * shrink
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let head = *self.cum.last().expect("nonempty head");
        if u < head {
            return self.cum.partition_point(|&c| c <= u) as u64;
        }
        let total = self.flat_mass + self.tail_mass;
        loop {
            let pick = rng.random::<f64>() * total;
            let (n, hat) = if pick < self.flat_mass {
                let n = rng.random_range(self.head_end + 1..=self.flat_end);
                (n, self.flat_height)
            } else {
                let v: f64 = 1.0 - rng.random::<f64>();
                let y = (self.flat_end as f64 + 0.5) * v.powf(-2.0 / 3.0);
                if y >= u64::MAX as f64 / 4.0 {
                    continue;
                }
                let n = (y + 0.5).floor() as u64;
                let n = n.max(self.flat_end + 1);
                (n, self.tail_hat(n))
            };
            if rng.random::<f64>() * hat < self.law.pmf(n) {
                return n;
            }
        }
    }
}

fn hat_cache() -> &'static RwLock<HashMap<u32, Arc<SizeHat>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<SizeHat>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn shared_hat(p: u32) -> Arc<SizeHat> {
    if let Some(h) = hat_cache().read().expect("hat cache poisoned").get(&p) {
        return h.clone();
    }
    let hat = Arc::new(SizeHat::build(p));
    hat_cache()
        .write()
        .expect("hat cache poisoned")
        .entry(p)
        .or_insert(hat)
        .clone()
}

/// Draws free Boltzmann sizes.
///
/// Type II uses an exact rejection sampler with envelopes shared across
/// threads; the other families invert the pmf term by term.
#[derive(Clone, Debug)]
pub struct SizeSampler {
    model: ModelId,
    max_terms: u64,
    local: Vec<Option<Arc<SizeHat>>>,
}

impl SizeSampler {
    pub fn new(model: ModelId) -> Self {
        Self {
            model,
            max_terms: DEFAULT_MAX_TERMS,
            local: Vec::new(),
        }
    }

    pub fn with_max_terms(mut self, max_terms: u64) -> Self {
        self.max_terms = max_terms;
        self
    }

    pub fn model(&self) -> ModelId {
        self.model
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, p: u32, rng: &mut R) -> Result<u64> {
        self.model.check_boundary(p)?;
        if self.model != ModelId::TypeII {
            let law = BoltzmannSizeLaw::new(self.model, p)?;
            return size_by_inversion(&law, rng.random(), self.max_terms);
        }
        let i = p as usize;
        if i >= self.local.len() {
            self.local.resize(i + 1, None);
        }
        let hat = self.local[i].get_or_insert_with(|| shared_hat(p));
        Ok(hat.sample(rng))
    }
}

/// One draw of the inner-vertex count of a type II disk of perimeter `p`.
pub fn sample_size<R: Rng + ?Sized>(p: u32, rng: &mut R) -> Result<u64> {
    SizeSampler::new(ModelId::TypeII).sample(p, rng)
}

/// First peeling step of a free Boltzmann type II disk.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FiniteEvent {
    /// The revealed triangle has a new inner vertex.
    Grow,
    /// The third vertex lies `a` edges after the peeled edge.
    Split(u32),
}

/// Exact law of the first step of a nontrivial free Boltzmann disk.
#[derive(Clone, Debug)]
pub struct FiniteKernelRow {
    pub p: u32,
    pub events: Vec<FiniteEvent>,
    pub probs: Vec<ExactScalar>,
}

impl FiniteKernelRow {
    pub fn new(p: u32) -> Result<Self> {
        if p < 2 {
            return Err(Error::Domain(format!(
                "finite kernel needs p >= 2, got {p}"
            )));
        }
        let t = WeightTable::get(ModelId::TypeII);
        let norm = t.z_prime(p)?;
        let w = ModelId::TypeII.vertex_weight();
        let mut events = vec![FiniteEvent::Grow];
        let mut probs = vec![&w * &t.z(p + 1)? / &norm];
        for a in 1..p.saturating_sub(1) {
            events.push(FiniteEvent::Split(a));
            probs.push(t.z(a + 1)? * t.z(p - a)? / &norm);
        }
        Ok(Self { p, events, probs })
    }

    pub fn sum(&self) -> ExactScalar {
        self.probs.iter().cloned().sum()
    }

    /// Fails unless the row sums to one exactly.
    pub fn check(&self) -> Result<()> {
        let s = self.sum();
        if s != ExactScalar::one() {
            return Err(Error::Integrity(format!(
                "finite kernel row {} sums to {s}",
                self.p
            )));
        }
        Ok(())
    }
}

/// Recursive sampler of free Boltzmann type II disks, filling holes in place.
#[derive(Clone, Debug)]
pub struct DiskSampler {
    ln_z: Vec<f64>,
    max_volume: u64,
}

impl Default for DiskSampler {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_VOLUME)
    }
}

impl DiskSampler {
    pub fn new(max_volume: u64) -> Self {
        Self {
            ln_z: Vec::new(),
            max_volume,
        }
    }

    pub fn max_volume(&self) -> u64 {
        self.max_volume
    }

    fn lz(&mut self, p: u32) -> f64 {
        while self.ln_z.len() <= p as usize {
            let q = self.ln_z.len() as u32;
            self.ln_z.push(if q < 2 {
                f64::NAN
            } else {
                ln_z(ModelId::TypeII, q)
            });
        }
        self.ln_z[p as usize]
    }

    /// Draws the first step at perimeter `p ≥ 3`.
    fn draw_event<R: Rng + ?Sized>(&mut self, p: u32, rng: &mut R) -> FiniteEvent {
        let norm = self.lz(p);
        let grow = (ModelId::TypeII.vertex_weight_f64().ln() + self.lz(p + 1) - norm).exp();
        let u: f64 = rng.random();
        if u < grow {
            return FiniteEvent::Grow;
        }
        let target = u - grow;
        let mut acc = 0.0;
        let (mut lo, mut hi) = (1u32, p - 2);
        let mut last = lo;
        while lo <= hi {
            let w = (self.lz(lo + 1) + self.lz(p - lo) - norm).exp();
            acc += w;
            if target < acc {
                return FiniteEvent::Split(lo);
            }
            last = lo;
            if hi != lo {
                acc += w;
                if target < acc {
                    return FiniteEvent::Split(hi);
                }
                last = hi;
            }
            lo += 1;
            hi -= 1;
        }
        FiniteEvent::Split(last)
    }

    /// Fills the hole `face` of `map` with a free Boltzmann triangulation.
    /// Returns the number of inner vertices added.
    pub fn fill<R: Rng + ?Sized>(
        &mut self,
        map: &mut HalfEdgeMap,
        face: u32,
        rng: &mut R,
    ) -> Result<u64> {
        let p0 = map.face_degree(face) as u32;
        let mut stack = vec![(face, p0, true)];
        let mut added = 0u64;
        let trivial = (-self.lz(2)).exp();
        while let Some((f, p, fresh)) = stack.pop() {
            if p == 2 && fresh && rng.random::<f64>() < trivial {
                map.close_digon(f)?;
                continue;
            }
            let event = if p == 2 {
                FiniteEvent::Grow
            } else {
                self.draw_event(p, rng)
            };
            let e = map.face_edge(f);
            match event {
                FiniteEvent::Grow => {
                    map.peel_grow(e)?;
                    added += 1;
                    if added > self.max_volume {
                        return Err(Error::Resource(format!(
                            "disk volume exceeded {}",
                            self.max_volume
                        )));
                    }
                    stack.push((f, p + 1, false));
                }
                FiniteEvent::Split(a) => {
                    // Right part has perimeter a+1, left part p−a.
                    let right = a + 1;
                    let left = p - a;
                    let r = if right <= left {
                        map.peel_swallow(e, Side::Right, a)?
                    } else {
                        map.peel_swallow(e, Side::Left, p - 1 - a)?
                    };
                    let enclosed = r.enclosed.expect("split encloses a face");
                    let (small, big) = if right <= left {
                        (right, left)
                    } else {
                        (left, right)
                    };
                    stack.push((f, big, true));
                    stack.push((enclosed, small, true));
                }
            }
        }
        Ok(added)
    }

    /// A free Boltzmann triangulation of the `p`-gon with an external face.
    pub fn sample_disk<R: Rng + ?Sized>(&mut self, p: u32, rng: &mut R) -> Result<HalfEdgeMap> {
        let mut map = HalfEdgeMap::polygon(p)?;
        self.fill(&mut map, 0, rng)?;
        Ok(map)
    }

    /// A Boltzmann triangulation of the sphere, rooted on the glued edge.
    pub fn sample_sphere<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<HalfEdgeMap> {
        let mut map = self.sample_disk(2, rng)?;
        let outer = map.face(map.twin(map.root()));
        if map.twin(map.face_edge(outer)) == map.next(map.face_edge(outer)) {
            // The trivial disk: the sphere is the single edge.
            return Ok(map);
        }
        map.close_digon(outer)?;
        Ok(map)
    }
}

/// A type II free Boltzmann disk of perimeter `p` with the default volume cap.
pub fn sample_disk<R: Rng + ?Sized>(p: u32, rng: &mut R) -> Result<HalfEdgeMap> {
    DiskSampler::default().sample_disk(p, rng)
}

/// A type II Boltzmann sphere with the default volume cap.
pub fn sample_boltzmann_sphere<R: Rng + ?Sized>(rng: &mut R) -> Result<HalfEdgeMap> {
    DiskSampler::default().sample_sphere(rng)
}

/// Number of inner vertices of a disk produced by [`sample_disk`].
pub fn disk_volume(map: &HalfEdgeMap, p: u32) -> u64 {
    map.vertex_count() as u64 - p as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_means() {
        assert_eq!(mean_size(2).unwrap(), ExactScalar::from_frac(1, 3));
        assert_eq!(mean_size(10).unwrap(), ExactScalar::from_int(51));
        assert!(mean_size(1).is_err());
    }

    #[test]
    fn trivial_mass_at_two() {
        let law = BoltzmannSizeLaw::new(ModelId::TypeII, 2).unwrap();
        assert_eq!(law.exact_pmf(0).unwrap(), ExactScalar::from_frac(8, 9));
        assert_eq!(size_by_inversion(&law, 0.88, 100).unwrap(), 0);
        assert_eq!(size_by_inversion(&law, 0.89, 100).unwrap(), 1);
    }

    #[test]
    fn truncated_mean_at_two() {
        // Σ n pmf(n) over n ≤ N plus the envelope bound on the rest.
        let law = BoltzmannSizeLaw::new(ModelId::TypeII, 2).unwrap();
        let cut = 200_000u64;
        let mut s = 0.0;
        for n in 1..=cut {
            s += n as f64 * law.pmf(n);
        }
        let l = type2_envelope_ln(2).exp();
        let tail = 2.0 * l * (cut as f64 + 0.5).powf(-0.5);
        assert!(
            s <= 1.0 / 3.0 + 1e-9 && 1.0 / 3.0 <= s + tail + 1e-9,
            "{s} {tail}"
        );
    }

    #[test]
    fn step_ratios_match_counts() {
        for model in [ModelId::TypeII, ModelId::Quad] {
            for p in 2..10 {
                let law = BoltzmannSizeLaw::new(model, p).unwrap();
                for n in 0..20 {
                    let r = law.pmf(n + 1) / law.pmf(n);
                    let s = law.step_ratio(n).unwrap();
                    assert!((r / s - 1.0).abs() < 1e-10, "{model} p={p} n={n}");
                }
            }
        }
    }

    #[test]
    fn stable_tail_matches_direct() {
        let law = BoltzmannSizeLaw::new(ModelId::TypeII, 7).unwrap();
        for n in [2_000u64, 5_000, 20_000] {
            let direct = ln_count(ModelId::TypeII, n, 7) + n as f64 * law.ln_weight - law.ln_z;
            assert!((direct - ln_pmf_type2_large(n, 7)).abs() < 1e-8, "n={n}");
        }
    }

    #[test]
    fn envelope_dominates() {
        for p in [2u32, 3, 5, 20, 150, 1000] {
            let law = BoltzmannSizeLaw::new(ModelId::TypeII, p).unwrap();
            let ln_l = type2_envelope_ln(p);
            let mut n = 1u64;
            let mut prev = f64::NEG_INFINITY;
            while n < 1_000_000_000_000 {
                let phi = law.ln_pmf(n) + 2.5 * (n as f64).ln();
                assert!(phi <= ln_l + 1e-9, "p={p} n={n}");
                assert!(phi >= prev - 1e-9, "φ not increasing at p={p} n={n}");
                prev = phi;
                n = n + n / 7 + 1;
            }
            assert!((prev - ln_l).abs() < 1e-3);
        }
    }

    #[test]
    fn other_families_normalize() {
        for (model, p) in [
            (ModelId::TypeI, 1u32),
            (ModelId::TypeI, 4),
            (ModelId::Quad, 1),
            (ModelId::Quad, 3),
        ] {
            let law = BoltzmannSizeLaw::new(model, p).unwrap();
            let s: f64 = (0..400_000u64).map(|n| law.pmf(n)).sum();
            assert!((s - 1.0).abs() < 2e-3, "{model} p={p}: {s}");
        }
    }

    #[test]
    fn finite_rows_sum_to_one() {
        for p in 2..=60 {
            FiniteKernelRow::new(p).unwrap().check().unwrap();
        }
        let r2 = FiniteKernelRow::new(2).unwrap();
        assert_eq!(r2.probs, vec![ExactScalar::one()]);
    }

    #[test]
    fn hat_sampler_matches_pmf() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [2u32, 5, 40, 300] {
            let law = BoltzmannSizeLaw::new(ModelId::TypeII, p).unwrap();
            let mut s = SizeSampler::new(ModelId::TypeII);
            let draws = 200_000;
            let mode = (0..4 * p as u64 * p as u64 + 4)
                .max_by(|&a, &b| law.pmf(a).total_cmp(&law.pmf(b)))
                .unwrap();
            let probe = [0, 1, mode];
            let mut hits = [0u32; 3];
            let mut below = 0u32;
            let median_guess = (p as u64 * p as u64) / 2;
            for _ in 0..draws {
                let n = s.sample(p, &mut rng).unwrap();
                for (i, &q) in probe.iter().enumerate() {
                    if n == q {
                        hits[i] += 1;
                    }
                }
                if n <= median_guess {
                    below += 1;
                }
            }
            for (i, &q) in probe.iter().enumerate() {
                let pr = law.pmf(q);
                let sd = (draws as f64 * pr * (1.0 - pr)).sqrt().max(1.0);
                assert!(
                    (hits[i] as f64 - draws as f64 * pr).abs() < 5.0 * sd,
                    "p={p} n={q}"
                );
            }
            let cdf: f64 = (0..=median_guess).map(|n| law.pmf(n)).sum();
            let sd = (draws as f64 * cdf * (1.0 - cdf)).sqrt();
            assert!(
                (below as f64 - draws as f64 * cdf).abs() < 5.0 * sd,
                "p={p} cdf"
            );
        }
    }

    #[test]
    fn disks_are_valid_and_sized() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut ds = DiskSampler::default();
        for p in 2..12u32 {
            for _ in 0..200 {
                let m = ds.sample_disk(p, &mut rng).unwrap();
                m.validate(false).unwrap();
                assert_eq!(m.face_degree(m.face(m.twin(m.root()))), p as usize);
                for f in m.faces() {
                    let k = m.face_kind(f);
                    assert!(
                        k == crate::mapbuild::FaceKind::Triangle
                            || k == crate::mapbuild::FaceKind::External
                    );
                }
            }
        }
    }

    #[test]
    fn sphere_vertex_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut ds = DiskSampler::default();
        let draws = 100_000;
        let mut total = 0.0;
        let mut sq = 0.0;
        let mut trivial = 0;
        for _ in 0..draws {
            let m = ds.sample_sphere(&mut rng).unwrap();
            m.validate(false).unwrap();
            let v = m.vertex_count() as f64;
            if m.vertex_count() == 2 {
                trivial += 1;
            }
            total += v;
            sq += v * v;
        }
        let mean = total / draws as f64;
        let sd = ((sq / draws as f64 - mean * mean) / draws as f64).sqrt();
        assert!((mean - 7.0 / 3.0).abs() < 3.0 * sd + 1e-3, "{mean} ± {sd}");
        let pt = trivial as f64 / draws as f64;
        assert!((pt - 8.0 / 9.0).abs() < 0.005);
    }

    #[test]
    fn three_gon_without_growth_is_one_triangle() {
        // Split at p = 3 leaves two digons; empty fillings give one face.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ds = DiskSampler::default();
        let mut seen = 0;
        for _ in 0..2000 {
            let m = ds.sample_disk(3, &mut rng).unwrap();
            if m.vertex_count() == 3 {
                assert_eq!(m.polygon_count(), 1);
                seen += 1;
            }
        }
        assert!(seen > 0);
    }
}
