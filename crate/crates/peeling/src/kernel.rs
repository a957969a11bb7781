//! One-step peeling laws of the infinite maps and their half-plane limit `ν`.
//!
//! A row at boundary size `p` (half-perimeter for quadrangulations) is the
//! h-transform of `ν`: every event `e` that shrinks the boundary by `s_e`
//! has probability `ν(e)·h(p − s_e)/h(p)` with `h(p) = g^{−p} C(p)`.
//! [`kernel_row`] builds rows exactly; [`EventSampler`] draws from them in
//! expected constant time for any `p` by proposing from `ν` and accepting
//! with probability `h(p − s)/h(p) ≤ 1`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::enumeration::{jump_sums, ln_c, ln_z, ExactScalar, ModelId, WeightTable};
use crate::error::{Error, Result};

/// Boundary sizes up to this value get exact rows by default.
pub const DEFAULT_EXACT_CUTOFF: u32 = 200;

/// Outcome of one peeling step.
///
/// For triangulations `L(k)`/`R(k)` swallow `k` boundary edges to the left or
/// right of the peeled edge. For quadrangulations `L(j)`/`R(j)` have one
/// inner vertex and the pair events enclose two holes of odd sides `k1, k2`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PeelEvent {
    C,
    L(u32),
    R(u32),
    LPair(u32, u32),
    RPair(u32, u32),
    CPair(u32, u32),
}

impl PeelEvent {
    /// Decrease of the boundary size; `−1` for `C`.
    pub fn swallowed(self, model: ModelId) -> i64 {
        let quad = model == ModelId::Quad;
        match self {
            PeelEvent::C => -1,
            PeelEvent::L(k) | PeelEvent::R(k) => {
                if quad {
                    (k / 2) as i64
                } else {
                    k as i64
                }
            }
            PeelEvent::LPair(a, b) | PeelEvent::RPair(a, b) | PeelEvent::CPair(a, b) => {
                ((a + b) / 2) as i64
            }
        }
    }

    /// Signed change of the boundary size.
    pub fn boundary_change(self, model: ModelId) -> i64 {
        -self.swallowed(model)
    }

    /// Boundary sizes of the holes enclosed by the revealed face.
    pub fn holes(self, model: ModelId) -> [Option<u32>; 2] {
        let quad = model == ModelId::Quad;
        match self {
            PeelEvent::C => [None, None],
            PeelEvent::L(k) | PeelEvent::R(k) => [Some(if quad { k / 2 + 1 } else { k + 1 }), None],
            PeelEvent::LPair(a, b) | PeelEvent::RPair(a, b) | PeelEvent::CPair(a, b) => {
                [Some(a.div_ceil(2)), Some(b.div_ceil(2))]
            }
        }
    }
}

impl fmt::Display for PeelEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeelEvent::C => write!(f, "C"),
            PeelEvent::L(k) => write!(f, "L{k}"),
            PeelEvent::R(k) => write!(f, "R{k}"),
            PeelEvent::LPair(a, b) => write!(f, "Lpair({a},{b})"),
            PeelEvent::RPair(a, b) => write!(f, "Rpair({a},{b})"),
            PeelEvent::CPair(a, b) => write!(f, "Cpair({a},{b})"),
        }
    }
}

/// Events of a row in sampling order: `C`, `L` ascending, `R` ascending,
/// then pair events type by type in lexicographic `(k1, k2)`.
pub fn row_events(model: ModelId, p: u32) -> Vec<PeelEvent> {
    let mut out = vec![PeelEvent::C];
    let ks: Vec<u32> = match model {
        ModelId::TypeII => (1..p.saturating_sub(1)).collect(),
        ModelId::TypeI => (0..p).collect(),
        ModelId::Quad => (0..2 * p).collect(),
    };
    out.extend(ks.iter().map(|&k| PeelEvent::L(k)));
    out.extend(ks.iter().map(|&k| PeelEvent::R(k)));
    if model == ModelId::Quad {
        let pairs: Vec<(u32, u32)> = (1..2 * p)
            .step_by(2)
            .flat_map(|a| {
                (1..2 * p)
                    .step_by(2)
                    .filter(move |b| a + b < 2 * p)
                    .map(move |b| (a, b))
            })
            .collect();
        for ctor in [PeelEvent::LPair, PeelEvent::RPair, PeelEvent::CPair] {
            out.extend(pairs.iter().map(|&(a, b)| ctor(a, b)));
        }
    }
    out
}

/// Normalized transition law at one boundary size.
#[derive(Clone, Debug)]
pub struct KernelRow {
    model: ModelId,
    p: u32,
    events: Vec<PeelEvent>,
    exact: Option<ExactEntries>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

/// Exact row entries. Quad pair entries factor as `a_{j1} a_{j2} · scale_J`
/// with `J = j1 + j2`, so they are stored by factor rather than expanded.
#[derive(Clone, Debug)]
enum ExactEntries {
    Dense(Vec<ExactScalar>),
    Factored {
        dense: Vec<ExactScalar>,
        terms: Vec<ExactScalar>,
        scale: Vec<ExactScalar>,
    },
}

impl KernelRow {
    pub fn model(&self) -> ModelId {
        self.model
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[PeelEvent] {
        &self.events
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Whether exact entries are available (rows at or below the exact cutoff).
    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Exact probability of the `i`-th event.
    pub fn exact_prob(&self, i: usize) -> Option<ExactScalar> {
        match self.exact.as_ref()? {
            ExactEntries::Dense(v) => v.get(i).cloned(),
            ExactEntries::Factored {
                dense,
                terms,
                scale,
            } => {
                if i < dense.len() {
                    return Some(dense[i].clone());
                }
                match self.events.get(i)? {
                    PeelEvent::LPair(a, b) | PeelEvent::RPair(a, b) | PeelEvent::CPair(a, b) => {
                        let (j1, j2) = (((a - 1) / 2) as usize, ((b - 1) / 2) as usize);
                        Some(&(&terms[j1] * &terms[j2]) * &scale[j1 + j2])
                    }
                    _ => None,
                }
            }
        }
    }

    pub fn prob_of(&self, event: PeelEvent) -> Option<f64> {
        self.events
            .iter()
            .position(|&e| e == event)
            .map(|i| self.probs[i])
    }

    pub fn exact_prob_of(&self, event: PeelEvent) -> Option<ExactScalar> {
        let i = self.events.iter().position(|&e| e == event)?;
        self.exact_prob(i)
    }

    /// Exact sum of all entries.
    pub fn exact_sum(&self) -> Option<ExactScalar> {
        Some(match self.exact.as_ref()? {
            ExactEntries::Dense(v) => v.iter().cloned().sum(),
            ExactEntries::Factored { dense, scale, .. } => {
                let singles: ExactScalar = dense.iter().cloned().sum();
                let pairs: ExactScalar = scale
                    .iter()
                    .enumerate()
                    .map(|(j, sc)| sc * &quad_convolution(j))
                    .sum();
                singles + ExactScalar::from_int(3) * pairs
            }
        })
    }

    /// Iterator over `(event, probability)`.
    pub fn iter(&self) -> impl Iterator<Item = (PeelEvent, f64)> + '_ {
        self.events.iter().copied().zip(self.probs.iter().copied())
    }

    fn from_parts(
        model: ModelId,
        p: u32,
        events: Vec<PeelEvent>,
        exact: Option<ExactEntries>,
        probs: Vec<f64>,
    ) -> Self {
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        Self {
            model,
            p,
            events,
            exact,
            probs,
            cumulative,
        }
    }
}

/// Exact weight of `e` in the row at `p`, from the weight tables.
fn exact_entry(model: ModelId, p: u32, e: PeelEvent, inv_cp: &ExactScalar) -> Result<ExactScalar> {
    let t = WeightTable::get(model);
    let w = model.vertex_weight();
    let s = e.swallowed(model);
    let rest = (p as i64 - s) as u32;
    let c_rest = &t.c_scaled(rest)? * inv_cp;
    Ok(match e {
        PeelEvent::C => match model {
            ModelId::Quad => &(&w * &w) * &c_rest,
            _ => &w * &c_rest,
        },
        PeelEvent::L(_) | PeelEvent::R(_) => {
            let z = t.z((s + 1) as u32)?;
            let zc = &z * &c_rest;
            if model == ModelId::Quad {
                &zc * &w
            } else {
                zc
            }
        }
        PeelEvent::LPair(a, b) | PeelEvent::RPair(a, b) | PeelEvent::CPair(a, b) => {
            let za = t.z(a.div_ceil(2))?;
            let zb = t.z(b.div_ceil(2))?;
            &(&za * &zb) * &c_rest
        }
    })
}

fn exact_row(model: ModelId, p: u32) -> Result<KernelRow> {
    let events = row_events(model, p);
    let inv_cp = WeightTable::get(model).c_scaled(p)?.recip();
    let (exact, probs) = if model == ModelId::Quad {
        quad_exact_entries(p, &events, &inv_cp)?
    } else {
        let v = events
            .iter()
            .map(|&e| exact_entry(model, p, e, &inv_cp))
            .collect::<Result<Vec<_>>>()?;
        let probs = v.iter().map(ExactScalar::to_f64).collect();
        (ExactEntries::Dense(v), probs)
    };
    let row = KernelRow::from_parts(model, p, events, Some(exact), probs);
    let sum = row.exact_sum().expect("exact row");
    if sum != ExactScalar::one() {
        return Err(Error::Integrity(format!(
            "{model} row at p = {p} sums to {sum}"
        )));
    }
    Ok(row)
}

/// `Σ_{j1+j2=J} a_{j1} a_{j2}` for the quadrangulation jump law, memoized.
fn quad_convolution(big_j: usize) -> ExactScalar {
    use std::sync::{OnceLock, RwLock};
    static CONV: OnceLock<RwLock<Vec<ExactScalar>>> = OnceLock::new();
    let cell = CONV.get_or_init(|| RwLock::new(Vec::new()));
    if let Some(v) = cell.read().expect("convolution table poisoned").get(big_j) {
        return v.clone();
    }
    let nu = NuLaw::new(ModelId::Quad);
    let mut t = cell.write().expect("convolution table poisoned");
    while t.len() <= big_j {
        let j = t.len() as u32;
        let terms: Vec<ExactScalar> = (0..=j)
            .map(|i| nu.term_exact(i).expect("quad term"))
            .collect();
        let v = (0..=j as usize)
            .map(|i| &terms[i] * &terms[j as usize - i])
            .sum();
        t.push(v);
    }
    t[big_j].clone()
}

/// Quad rows: single events densely, pair events through `a_j` and `scale_J = h(m−J−1)/(54 h(m))`.
fn quad_exact_entries(
    m: u32,
    events: &[PeelEvent],
    inv_cp: &ExactScalar,
) -> Result<(ExactEntries, Vec<f64>)> {
    let t = WeightTable::get(ModelId::Quad);
    let nu = NuLaw::new(ModelId::Quad);
    let n_dense = 1 + 4 * m as usize;
    let mut dense = Vec::with_capacity(n_dense);
    for &e in &events[..n_dense] {
        dense.push(exact_entry(ModelId::Quad, m, e, inv_cp)?);
    }
    let terms: Vec<ExactScalar> = (0..m.saturating_sub(1))
        .map(|j| nu.term_exact(j))
        .collect::<Result<_>>()?;
    let scale: Vec<ExactScalar> = (0..m.saturating_sub(1))
        .map(|big_j| Ok(&t.h_ratio(m, big_j as i64 + 1)? * &ExactScalar::from_frac(1, 54)))
        .collect::<Result<_>>()?;
    let terms_f: Vec<f64> = terms.iter().map(ExactScalar::to_f64).collect();
    let scale_f: Vec<f64> = scale.iter().map(ExactScalar::to_f64).collect();
    let mut probs: Vec<f64> = dense.iter().map(ExactScalar::to_f64).collect();
    for e in &events[n_dense..] {
        if let PeelEvent::LPair(a, b) | PeelEvent::RPair(a, b) | PeelEvent::CPair(a, b) = *e {
            let (j1, j2) = (((a - 1) / 2) as usize, ((b - 1) / 2) as usize);
            probs.push(terms_f[j1] * terms_f[j2] * scale_f[j1 + j2]);
        }
    }
    Ok((
        ExactEntries::Factored {
            dense,
            terms,
            scale,
        },
        probs,
    ))
}

fn float_row(model: ModelId, p: u32) -> KernelRow {
    let events = row_events(model, p);
    let lw = model.vertex_weight_f64().ln();
    let lcp = ln_c(model, p);
    let probs = events
        .iter()
        .map(|&e| {
            let s = e.swallowed(model);
            let lrest = ln_c(model, (p as i64 - s) as u32) - lcp;
            let l = match e {
                PeelEvent::C => lrest + if model == ModelId::Quad { 2.0 * lw } else { lw },
                PeelEvent::L(_) | PeelEvent::R(_) => {
                    lrest
                        + ln_z(model, (s + 1) as u32)
                        + if model == ModelId::Quad { lw } else { 0.0 }
                }
                PeelEvent::LPair(a, b) | PeelEvent::RPair(a, b) | PeelEvent::CPair(a, b) => {
                    lrest + ln_z(model, a.div_ceil(2)) + ln_z(model, b.div_ceil(2))
                }
            };
            l.exp()
        })
        .collect();
    KernelRow::from_parts(model, p, events, None, probs)
}

/// Transition row at boundary size `p`, exact when `p ≤ DEFAULT_EXACT_CUTOFF`.
pub fn kernel_row(model: ModelId, p: u32) -> Result<KernelRow> {
    kernel_row_with_cutoff(model, p, DEFAULT_EXACT_CUTOFF)
}

/// Transition row with an explicit exact-arithmetic cutoff.
pub fn kernel_row_with_cutoff(model: ModelId, p: u32, exact_cutoff: u32) -> Result<KernelRow> {
    model.check_boundary(p)?;
    if p <= exact_cutoff {
        exact_row(model, p)
    } else {
        Ok(float_row(model, p))
    }
}

/// Row computed through log-Gamma regardless of `p`.
pub fn kernel_row_float(model: ModelId, p: u32) -> Result<KernelRow> {
    model.check_boundary(p)?;
    Ok(float_row(model, p))
}

/// Inversion of the row's cumulative distribution at `u`.
pub fn sample_event(row: &KernelRow, u: f64) -> Result<PeelEvent> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Argument(format!(
            "uniform must lie in (0,1), got {u}"
        )));
    }
    let i = row.cumulative.partition_point(|&c| c <= u);
    if i < row.events.len() {
        return Ok(row.events[i]);
    }
    // Rounding left u above the last prefix sum.
    let last = row.probs.iter().rposition(|&x| x > 0.0).unwrap_or(0);
    Ok(row.events[last])
}

/// Summary of an h-transform verification.
#[derive(Clone, Debug, PartialEq)]
pub struct HTransformReport {
    pub model: ModelId,
    pub p: u32,
    pub events_checked: usize,
}

/// Checks `q_e^{(p)} = (h(p − s_e)/h(p))·ν(e)` exactly on the row at `p`; quadrangular
/// pair events are checked once per class `(kind, s_e)`.
pub fn h_transform_check(model: ModelId, p: u32) -> Result<HTransformReport> {
    let row = exact_row(model, p)?;
    let nu = NuLaw::new(model);
    let t = WeightTable::get(model);
    let inv_cp = t.c_scaled(p)?.recip();
    let mut terms: HashMap<u32, ExactScalar> = HashMap::new();
    let mut ratios: HashMap<i64, ExactScalar> = HashMap::new();
    let mut pair_classes = HashSet::new();
    let mut checked = 0;
    for (i, e) in row.events.iter().enumerate() {
        let s = e.swallowed(model);
        let q = match *e {
            // Pair entries are a_{j1} a_{j2} times a factor of j1 + j2 alone: one event per class.
            PeelEvent::LPair(..) | PeelEvent::RPair(..) | PeelEvent::CPair(..) => {
                if !pair_classes.insert((std::mem::discriminant(e), s)) {
                    continue;
                }
                let direct = exact_entry(model, p, *e, &inv_cp)?;
                if row.exact_prob(i).as_ref() != Some(&direct) {
                    return Err(Error::Integrity(format!(
                        "{model} row at p = {p}: stored {e} differs from the weight tables"
                    )));
                }
                direct
            }
            _ => row.exact_prob(i).expect("exact row"),
        };
        if let std::collections::hash_map::Entry::Vacant(slot) = ratios.entry(s) {
            slot.insert(t.h_ratio(p, s)?);
        }
        let weight = nu.event_with_terms(*e, |k| {
            if let Some(a) = terms.get(&k) {
                return Ok(a.clone());
            }
            let a = nu.term_exact(k)?;
            terms.insert(k, a.clone());
            Ok(a)
        })?;
        let rhs = &ratios[&s] * &weight;
        if q != rhs {
            return Err(Error::Integrity(format!(
                "{model} h-transform fails at p = {p}, event {e}: {q} != {rhs}"
            )));
        }
        checked += 1;
    }
    Ok(HTransformReport {
        model,
        p,
        events_checked: checked,
    })
}

/// `h(n − 1)/h(n)` in closed form; zero when `n − 1` is below the model minimum.
pub fn h_step_down(model: ModelId, n: u32) -> f64 {
    if n <= model.min_boundary() {
        return 0.0;
    }
    let x = n as f64;
    match model {
        ModelId::TypeII => (2.0 * x - 4.0) / (2.0 * x - 3.0),
        ModelId::TypeI => 2.0 * (x - 1.0) / (2.0 * x - 1.0),
        ModelId::Quad => {
            9.0 * (2.0 * x - 1.0) * (x - 1.0) / (2.0 * (3.0 * x - 1.0) * (3.0 * x - 2.0))
        }
    }
}

/// `h(p − s)/h(p)` for `s ≥ 0`.
pub fn h_ratio_f64(model: ModelId, p: u32, s: u32) -> f64 {
    if (p as i64 - s as i64) < model.min_boundary() as i64 {
        return 0.0;
    }
    if s <= 48 {
        (0..s).map(|i| h_step_down(model, p - i)).product()
    } else {
        let g = (model.boundary_growth() as f64).ln();
        (s as f64 * g + ln_c(model, p - s) - ln_c(model, p)).exp()
    }
}

/// Probability of the boundary-growing event at `p`.
pub fn grow_probability(model: ModelId, p: u32) -> f64 {
    NuLaw::new(model).q_grow_f64() / h_step_down(model, p + 1)
}

/// The half-plane jump law `ν`, limit of the rows as `p → ∞`.
///
/// Single-hole events are driven by `a_k = Z(k+1) g^{−k}`; quadrangular
/// pair events by `a_{j1} a_{j2}/54`.
#[derive(Copy, Clone, Debug)]
pub struct NuLaw {
    model: ModelId,
}

impl NuLaw {
    pub fn new(model: ModelId) -> Self {
        Self { model }
    }

    pub fn model(&self) -> ModelId {
        self.model
    }

    /// Limit probability of the boundary-growing event.
    pub fn q_grow(&self) -> ExactScalar {
        match self.model {
            ModelId::TypeII => ExactScalar::from_frac(2, 3),
            ModelId::TypeI => ExactScalar::sqrt3() * ExactScalar::from_frac(1, 3),
            ModelId::Quad => ExactScalar::from_frac(3, 8),
        }
    }

    pub fn q_grow_f64(&self) -> f64 {
        match self.model {
            ModelId::TypeII => 2.0 / 3.0,
            ModelId::TypeI => 1.0 / 3f64.sqrt(),
            ModelId::Quad => 3.0 / 8.0,
        }
    }

    /// Smallest index `k` with `a_k > 0`.
    pub fn first_index(&self) -> u32 {
        if self.model == ModelId::TypeII {
            1
        } else {
            0
        }
    }

    /// Exact `a_k = Z(k+1) g^{−k}`.
    pub fn term_exact(&self, k: u32) -> Result<ExactScalar> {
        let t = WeightTable::get(self.model);
        let g = ExactScalar::from_int(self.model.boundary_growth() as i64);
        Ok(t.z(k + 1)? / g.pow(k))
    }

    /// `a_k` in double precision.
    pub fn term(&self, k: u32) -> f64 {
        if k < self.first_index() {
            return 0.0;
        }
        (ln_z(self.model, k + 1) - k as f64 * (self.model.boundary_growth() as f64).ln()).exp()
    }

    /// `Σ_k a_k` in closed form.
    pub fn term_total(&self) -> f64 {
        match self.model {
            ModelId::TypeII => 1.0 / 6.0,
            ModelId::TypeI => 0.5 - 0.5 / 3f64.sqrt(),
            ModelId::Quad => 1.5,
        }
    }

    /// `a_{k+1}/a_k` for `k ≥ 1`.
    pub fn term_ratio(&self, k: u32) -> f64 {
        let x = k as f64;
        match self.model {
            ModelId::TypeII | ModelId::TypeI => (x - 0.5) / (x + 2.0),
            ModelId::Quad => (x + 2.0 / 3.0) * (x + 1.0 / 3.0) / ((x + 2.0) * (x + 1.5)),
        }
    }

    /// Exact `ν(e)`.
    pub fn event_exact(&self, e: PeelEvent) -> Result<ExactScalar> {
        self.event_with_terms(e, |k| self.term_exact(k))
    }

    /// `ν(e)` with `a_k` supplied by `term`.
    fn event_with_terms(
        &self,
        e: PeelEvent,
        mut term: impl FnMut(u32) -> Result<ExactScalar>,
    ) -> Result<ExactScalar> {
        let quad = self.model == ModelId::Quad;
        Ok(match e {
            PeelEvent::C => self.q_grow(),
            PeelEvent::L(_) | PeelEvent::R(_) => {
                let a = term(e.swallowed(self.model) as u32)?;
                if quad {
                    &a * &ExactScalar::from_frac(1, 12)
                } else {
                    a
                }
            }
            PeelEvent::LPair(a, b) | PeelEvent::RPair(a, b) | PeelEvent::CPair(a, b) => {
                let x = term((a - 1) / 2)?;
                let y = term((b - 1) / 2)?;
                &(&x * &y) * &ExactScalar::from_frac(1, 54)
            }
        })
    }

    /// `ν(−k)`: total mass of events decreasing the boundary by exactly `k ≥ 0`.
    pub fn down_jump(&self, k: u32) -> f64 {
        match self.model {
            ModelId::TypeII | ModelId::TypeI => 2.0 * self.term(k),
            ModelId::Quad => {
                let singles = self.term(k) / 3.0;
                let pairs = if k >= 1 {
                    let j = k - 1;
                    (0..=j)
                        .map(|i| self.term(i) * self.term(j - i))
                        .sum::<f64>()
                        * 3.0
                        / 54.0
                } else {
                    0.0
                };
                singles + pairs
            }
        }
    }

    /// Tail exponent of `ν(−k)`.
    pub fn tail_exponent(&self) -> f64 {
        2.5
    }

    /// Constant `t` with `ν(−k) ∼ 2t k^{−5/2}`.
    pub fn tail_constant(&self) -> f64 {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        match self.model {
            ModelId::TypeII => 1.0 / (4.0 * sqrt_pi),
            ModelId::TypeI => 3f64.sqrt() / (8.0 * sqrt_pi),
            ModelId::Quad => 1.0 / (4.0 * (3.0 * std::f64::consts::PI).sqrt()),
        }
    }
}

/// Result of [`nu_moments`].
#[derive(Clone, Debug)]
pub struct NuMoments {
    pub model: ModelId,
    /// Certified enclosure of the drift `Σ_k k ν(k)`.
    pub mean_lower: f64,
    pub mean_upper: f64,
    /// `ν(−K) K^{5/2}/2` at the cutoff `K`.
    pub tail_constant: f64,
    pub expected_tail_constant: f64,
    pub cutoff: u32,
}

impl NuMoments {
    pub fn mean(&self) -> f64 {
        0.5 * (self.mean_lower + self.mean_upper)
    }
}

/// Drift of `ν` with a certified error below `tol`, and the tail constant at `K = 10⁴`.
pub fn nu_moments(model: ModelId, tol: f64) -> Result<NuMoments> {
    nu_moments_at(model, tol, 10_000)
}

/// As [`nu_moments`] with an explicit cutoff for the tail constant.
pub fn nu_moments_at(model: ModelId, tol: f64, tail_cutoff: u32) -> Result<NuMoments> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let mut cutoff = 64u32;
    let (s0, s1) = loop {
        match jump_sums(model, cutoff, tol / 8.0) {
            Ok([s0, s1]) => break (s0, s1),
            Err(Error::TailTooLarge(_)) if cutoff < 1 << 14 => cutoff *= 2,
            Err(e) => return Err(e),
        }
    };
    let drift = |a0: &ExactScalar, a1: &ExactScalar| -> ExactScalar {
        let nu = NuLaw::new(model);
        match model {
            ModelId::TypeII | ModelId::TypeI => nu.q_grow() - &ExactScalar::from_int(2) * a1,
            ModelId::Quad => {
                // 3/8 − (1/3)S1 − (1/18)(2 S0 S1 + S0²)
                let singles = a1 * &ExactScalar::from_frac(1, 3);
                let pairs = &(&(&ExactScalar::from_int(2) * &(a0 * a1)) + &(a0 * a0))
                    * &ExactScalar::from_frac(1, 18);
                &(nu.q_grow() - singles) - &pairs
            }
        }
    };
    // The drift is decreasing in both sums.
    let hi = drift(&s0.0, &s1.0).to_f64();
    let lo = drift(&s0.1, &s1.1).to_f64();
    let nu = NuLaw::new(model);
    let k = tail_cutoff as f64;
    Ok(NuMoments {
        model,
        mean_lower: lo,
        mean_upper: hi,
        tail_constant: nu.down_jump(tail_cutoff) * k.powf(2.5) / 2.0,
        expected_tail_constant: nu.tail_constant(),
        cutoff,
    })
}

/// `Σ_k h(p − k)/h(p)·ν(−k)` in double precision, including the growing step.
pub fn h_harmonic_sum(model: ModelId, p: u32) -> f64 {
    let nu = NuLaw::new(model);
    let up = nu.q_grow_f64() / h_step_down(model, p + 1);
    let down: f64 = (0..p)
        .map(|k| nu.down_jump(k) * h_ratio_f64(model, p, k))
        .sum();
    up + down
}

/// Draws peeling events for any boundary size in expected constant time.
///
/// The growing event is decided first from its closed-form probability.
/// Otherwise an event is proposed from `ν` restricted to shrinking events and
/// accepted with probability `h(p − s)/h(p)`.
#[derive(Clone, Debug)]
pub struct EventSampler {
    model: ModelId,
    nu: NuLaw,
    /// Cumulative `a_k/Σa` from `first_index`.
    cum: Vec<f64>,
    total: f64,
}

const TABLE_LEN: usize = 4096;

impl EventSampler {
    pub fn new(model: ModelId) -> Self {
        let nu = NuLaw::new(model);
        let total = nu.term_total();
        let mut cum = Vec::with_capacity(TABLE_LEN);
        let mut acc = 0.0;
        let mut a = nu.term(nu.first_index());
        for i in 0..TABLE_LEN as u32 {
            let k = nu.first_index() + i;
            if k >= 2 && i > 0 {
                a *= nu.term_ratio(k - 1);
            } else {
                a = nu.term(k);
            }
            acc += a;
            cum.push(acc / total);
        }
        Self {
            model,
            nu,
            cum,
            total,
        }
    }

    pub fn model(&self) -> ModelId {
        self.model
    }

    /// `k` with law `a_k/Σa`, or `None` once `k` exceeds `limit`.
    fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R, limit: u32) -> Option<u32> {
        let u: f64 = rng.random();
        let first = self.nu.first_index();
        for (i, &c) in self.cum.iter().enumerate() {
            let k = first + i as u32;
            if k > limit {
                return None;
            }
            if u < c {
                return Some(k);
            }
        }
        // Beyond the table: continue the ratio recurrence.
        let mut k = first + self.cum.len() as u32 - 1;
        let mut a = self.nu.term(k);
        let mut acc = *self.cum.last().expect("table") * self.total;
        let target = u * self.total;
        loop {
            a *= self.nu.term_ratio(k);
            k += 1;
            if k > limit {
                return None;
            }
            acc += a;
            if target < acc {
                return Some(k);
            }
        }
    }

    /// One event at boundary size `p`.
    pub fn sample<R: Rng + ?Sized>(&self, p: u32, rng: &mut R) -> PeelEvent {
        let grow = grow_probability(self.model, p);
        if rng.random::<f64>() < grow {
            return PeelEvent::C;
        }
        let max_swallow = p - self.model.min_boundary();
        loop {
            let (event, s) = match self.model {
                ModelId::TypeII | ModelId::TypeI => {
                    let left = rng.random::<bool>();
                    let Some(k) = self.draw_index(rng, max_swallow) else {
                        continue;
                    };
                    (
                        if left {
                            PeelEvent::L(k)
                        } else {
                            PeelEvent::R(k)
                        },
                        k,
                    )
                }
                ModelId::Quad => {
                    // Singles carry 4/5 of the shrinking mass, pairs 1/5.
                    if rng.random::<f64>() < 0.8 {
                        let side = rng.random_range(0..4u32);
                        let Some(k) = self.draw_index(rng, max_swallow) else {
                            continue;
                        };
                        let j = 2 * k + (side & 1);
                        (
                            if side < 2 {
                                PeelEvent::L(j)
                            } else {
                                PeelEvent::R(j)
                            },
                            k,
                        )
                    } else {
                        let kind = rng.random_range(0..3u32);
                        let Some(a) = self.draw_index(rng, max_swallow) else {
                            continue;
                        };
                        let Some(b) = self.draw_index(rng, max_swallow) else {
                            continue;
                        };
                        let s = a + b + 1;
                        if s > max_swallow {
                            continue;
                        }
                        let (k1, k2) = (2 * a + 1, 2 * b + 1);
                        let e = match kind {
                            0 => PeelEvent::LPair(k1, k2),
                            1 => PeelEvent::RPair(k1, k2),
                            _ => PeelEvent::CPair(k1, k2),
                        };
                        (e, s)
                    }
                }
            };
            if rng.random::<f64>() < h_ratio_f64(self.model, p, s) {
                return event;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_type2_rows() {
        let r2 = kernel_row(ModelId::TypeII, 2).unwrap();
        assert_eq!(r2.events(), &[PeelEvent::C]);
        assert_eq!(r2.exact_prob(0).unwrap(), ExactScalar::one());
        let r3 = kernel_row(ModelId::TypeII, 3).unwrap();
        let ex: Vec<_> = (0..3).map(|i| r3.exact_prob(i).unwrap()).collect();
        assert_eq!(
            ex,
            [
                ExactScalar::from_frac(5, 6),
                ExactScalar::from_frac(1, 12),
                ExactScalar::from_frac(1, 12)
            ]
        );
        assert_eq!(sample_event(&r3, 0.99).unwrap(), PeelEvent::R(1));
        assert_eq!(sample_event(&r3, 0.5).unwrap(), PeelEvent::C);
        assert_eq!(sample_event(&r3, 0.85).unwrap(), PeelEvent::L(1));
        assert!(sample_event(&r3, 1.0).is_err());
        assert!(sample_event(&r3, 0.0).is_err());
    }

    #[test]
    fn rows_sum_to_one_for_small_sizes() {
        for model in ModelId::ALL {
            for p in model.min_boundary()..30 {
                kernel_row(model, p).unwrap();
            }
        }
    }

    #[test]
    fn quad_first_row() {
        let r = kernel_row(ModelId::Quad, 1).unwrap();
        assert_eq!(
            r.exact_prob_of(PeelEvent::C).unwrap(),
            ExactScalar::from_frac(5, 9)
        );
        assert_eq!(
            r.exact_prob_of(PeelEvent::L(1)).unwrap(),
            ExactScalar::from_frac(1, 9)
        );
        // Pair entries expand to the direct product formula.
        let r = kernel_row(ModelId::Quad, 6).unwrap();
        let t = WeightTable::get(ModelId::Quad);
        let direct = &(&t.z(2).unwrap() * &t.z(3).unwrap()) * &t.c_ratio(2, 6).unwrap();
        assert_eq!(r.exact_prob_of(PeelEvent::CPair(3, 5)).unwrap(), direct);
    }

    #[test]
    fn h_transform_small() {
        for model in ModelId::ALL {
            for p in model.min_boundary()..25 {
                h_transform_check(model, p).unwrap();
            }
        }
    }

    #[test]
    fn grow_probability_matches_rows() {
        for model in ModelId::ALL {
            for p in model.min_boundary()..40 {
                let row = kernel_row(model, p).unwrap();
                let c = row.prob_of(PeelEvent::C).unwrap();
                assert!(
                    (grow_probability(model, p) - c).abs() < 1e-13,
                    "{model} {p}"
                );
            }
        }
    }

    #[test]
    fn float_rows_agree() {
        for model in ModelId::ALL {
            for p in [model.min_boundary() + 1, 17, 40] {
                let e = kernel_row(model, p).unwrap();
                let f = kernel_row_float(model, p).unwrap();
                for (x, y) in e.probs().iter().zip(f.probs()) {
                    assert!(((x - y) / x).abs() < 1e-10, "{model} {p}");
                }
            }
        }
    }

    #[test]
    fn sampler_frequencies_match_row() {
        for (model, p) in [
            (ModelId::TypeII, 7),
            (ModelId::TypeI, 4),
            (ModelId::Quad, 4),
        ] {
            let row = kernel_row(model, p).unwrap();
            let sampler = EventSampler::new(model);
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let n = 200_000;
            let mut counts = std::collections::HashMap::new();
            for _ in 0..n {
                *counts.entry(sampler.sample(p, &mut rng)).or_insert(0usize) += 1;
            }
            for (e, q) in row.iter() {
                let f = *counts.get(&e).unwrap_or(&0) as f64 / n as f64;
                let sd = (q * (1.0 - q) / n as f64).sqrt();
                assert!(
                    (f - q).abs() < 5.0 * sd + 1e-9,
                    "{model} p={p} {e}: {f} vs {q}"
                );
            }
        }
    }

    #[test]
    fn harmonic_sum_is_one() {
        for model in ModelId::ALL {
            for p in [model.min_boundary(), 5, 50, 300] {
                assert!(
                    (h_harmonic_sum(model, p) - 1.0).abs() < 1e-10,
                    "{model} {p}"
                );
            }
        }
    }

    #[test]
    fn drift_is_zero() {
        for model in ModelId::ALL {
            let m = nu_moments_at(model, 1e-8, 2000).unwrap();
            assert!(
                m.mean_lower <= 1e-8 && m.mean_upper >= -1e-8,
                "{model}: {m:?}"
            );
            assert!(m.mean_upper - m.mean_lower <= 1e-8);
        }
    }
}
