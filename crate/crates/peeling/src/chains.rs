//! Peeling processes in chain-only mode: no map is built, only the
//! perimeter, volume, layer and clock observables are tracked.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::boltzmann::SizeSampler;
use crate::enumeration::ModelId;
use crate::error::{Error, Result};
use crate::kernel::{EventSampler, PeelEvent};

/// Process-wide event sampler for `model`.
pub fn event_sampler(model: ModelId) -> &'static EventSampler {
    static S: OnceLock<[EventSampler; 3]> = OnceLock::new();
    &S.get_or_init(|| ModelId::ALL.map(EventSampler::new))[model.index()]
}

/// Stream `replica` of the generator seeded by `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Which exploration produced a trace.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Pv,
    Layers,
    Dual,
    Fpp,
    Boltzmann,
    Sphere,
    MapLayers,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Pv,
        Algorithm::Layers,
        Algorithm::Dual,
        Algorithm::Fpp,
        Algorithm::Boltzmann,
        Algorithm::Sphere,
        Algorithm::MapLayers,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Pv => "pv",
            Algorithm::Layers => "layers",
            Algorithm::Dual => "dual",
            Algorithm::Fpp => "fpp",
            Algorithm::Boltzmann => "boltzmann",
            Algorithm::Sphere => "sphere",
            Algorithm::MapLayers => "map-layers",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown algorithm '{s}'")))
    }
}

/// Perimeter/volume state. For quadrangulations `p` is the half-perimeter.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PvState {
    pub n: u64,
    pub p: u32,
    pub v: u64,
    pub total_vertices: u64,
}

/// Vertices created by the revealed face itself (not counting hole fillings).
fn new_vertices(model: ModelId, event: PeelEvent) -> u64 {
    match (model, event) {
        (ModelId::Quad, PeelEvent::C) => 2,
        (ModelId::Quad, PeelEvent::L(_) | PeelEvent::R(_)) => 1,
        (_, PeelEvent::C) => 1,
        _ => 0,
    }
}

/// The `(P, V)` peeling chain.
#[derive(Clone, Debug)]
pub struct PvChain {
    model: ModelId,
    sampler: &'static EventSampler,
    sizes: Option<SizeSampler>,
    state: PvState,
    grow_events: u64,
    hole_volume: u64,
    max_hole_volume: Option<u64>,
}

impl PvChain {
    /// Starts from the root edge. Volume tracking draws one Boltzmann size per hole.
    pub fn new(model: ModelId, track_volume: bool) -> Self {
        let p = if model == ModelId::Quad { 1 } else { 2 };
        Self {
            model,
            sampler: event_sampler(model),
            sizes: track_volume.then(|| SizeSampler::new(model)),
            state: PvState {
                n: 0,
                p,
                v: 0,
                total_vertices: 2,
            },
            grow_events: 0,
            hole_volume: 0,
            max_hole_volume: None,
        }
    }

    /// Fails with a resource error when one hole would hold more than `limit` vertices.
    pub fn with_max_hole_volume(mut self, limit: Option<u64>) -> Self {
        self.max_hole_volume = limit;
        self
    }

    pub fn model(&self) -> ModelId {
        self.model
    }

    pub fn state(&self) -> PvState {
        self.state
    }

    pub fn tracks_volume(&self) -> bool {
        self.sizes.is_some()
    }

    /// Boundary length in edges.
    pub fn perimeter_edges(&self) -> u64 {
        if self.model == ModelId::Quad {
            2 * self.state.p as u64
        } else {
            self.state.p as u64
        }
    }

    pub fn grow_events(&self) -> u64 {
        self.grow_events
    }

    /// Sum of all sampled hole volumes.
    pub fn hole_volume(&self) -> u64 {
        self.hole_volume
    }

    /// Draws one event at the current boundary without applying it.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> PeelEvent {
        self.sampler.sample(self.state.p, rng)
    }

    /// Applies `event`, sampling hole volumes when tracked.
    pub fn apply<R: Rng + ?Sized>(&mut self, event: PeelEvent, rng: &mut R) -> Result<()> {
        let model = self.model;
        let mut added = new_vertices(model, event);
        if let Some(sizes) = self.sizes.as_mut() {
            let mut drawn = 0;
            for hole in event.holes(model).into_iter().flatten() {
                let n = sizes.sample(hole, rng)?;
                if self.max_hole_volume.is_some_and(|m| n > m) {
                    return Err(Error::Resource(format!(
                        "a hole of perimeter {hole} drew {n} inner vertices"
                    )));
                }
                drawn += n;
            }
            self.hole_volume += drawn;
            added += drawn;
        }
        if event == PeelEvent::C {
            self.grow_events += 1;
        }
        let s = &mut self.state;
        s.p = (s.p as i64 + event.boundary_change(model)) as u32;
        s.total_vertices += added;
        s.n += 1;
        let boundary = if model == ModelId::Quad {
            2 * s.p as u64
        } else {
            s.p as u64
        };
        s.v = s.total_vertices - boundary;
        Ok(())
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<PeelEvent> {
        let e = self.draw(rng);
        self.apply(e, rng)?;
        Ok(e)
    }
}

/// State of the layer chain with the layer-edge tally.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerState {
    pub n: u64,
    pub p: u32,
    pub g: u32,
    pub h: u32,
    pub a_count: u64,
    pub u: u32,
    pub v: u64,
}

/// `(P, G, H)` transition under event `e` for the distance layers.
pub fn layer_transition(p: u32, g: u32, h: u32, e: PeelEvent) -> Result<(u32, u32, u32)> {
    Ok(match e {
        PeelEvent::C => (p + 1, g + 1, h),
        PeelEvent::L(k) if k >= 1 && k + 2 <= p => {
            if k < g {
                (p - k, g - k, h)
            } else {
                (p - k, 0, h)
            }
        }
        PeelEvent::R(k) if k >= 1 && k + 2 <= p => {
            if k + g < p {
                (p - k, g, h)
            } else {
                (p - k, 0, h + 1)
            }
        }
        _ => {
            return Err(Error::Argument(format!(
                "event {e} is not a type II event at p = {p}"
            )))
        }
    })
}

/// `(P, G*, H*)` transition under event `e` for the dual layers.
pub fn dual_transition(p: u32, g: u32, h: u32, e: PeelEvent) -> Result<(u32, u32, u32)> {
    Ok(match e {
        PeelEvent::C => {
            if g + 2 <= p {
                (p + 1, g + 2, h)
            } else {
                (p + 1, 0, h + 1)
            }
        }
        PeelEvent::L(k) if k >= 1 && k + 2 <= p => {
            if g + 1 == p {
                (p - k, 0, h + 1)
            } else if k <= g {
                (p - k, g - k + 1, h)
            } else {
                (p - k, 1, h)
            }
        }
        PeelEvent::R(k) if k >= 1 && k + 2 <= p => {
            if k + g + 2 <= p {
                (p - k, g + 1, h)
            } else {
                (p - k, 0, h + 1)
            }
        }
        _ => {
            return Err(Error::Argument(format!(
                "event {e} is not a type II event at p = {p}"
            )))
        }
    })
}

fn require_type2(model: ModelId) -> Result<()> {
    if model != ModelId::TypeII {
        return Err(Error::Domain(format!(
            "layer chains are type2 only, got {model}"
        )));
    }
    Ok(())
}

/// Peeling by layers in chain-only mode, started from `(2, 1, 0)`.
///
/// `A_n` is the number of layer edges absorbed so far, computed from the
/// path identity `A_n = Σ_{1≤i<H_n} P_{σ_i} + (P_{σ_{H_n}} − U_n)` for
/// `H_n ≥ 1`, and `0` before `σ_1`.
#[derive(Clone, Debug)]
pub struct LayerChain {
    pv: PvChain,
    g: u32,
    h: u32,
    closed_layers: u64,
    p_sigma: u32,
}

impl LayerChain {
    pub fn new(model: ModelId, track_volume: bool) -> Result<Self> {
        require_type2(model)?;
        Ok(Self {
            pv: PvChain::new(model, track_volume),
            g: 1,
            h: 0,
            closed_layers: 0,
            p_sigma: 2,
        })
    }

    pub fn with_max_hole_volume(mut self, limit: Option<u64>) -> Self {
        self.pv = self.pv.with_max_hole_volume(limit);
        self
    }

    pub fn pv(&self) -> &PvChain {
        &self.pv
    }

    pub fn state(&self) -> LayerState {
        let s = self.pv.state();
        let u = s.p - self.g;
        let a_count = if self.h == 0 {
            0
        } else {
            self.closed_layers + (self.p_sigma - u) as u64
        };
        LayerState {
            n: s.n,
            p: s.p,
            g: self.g,
            h: self.h,
            a_count,
            u,
            v: s.v,
        }
    }

    /// One step; returns the event and whether a new layer was reached.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(PeelEvent, bool)> {
        let p = self.pv.state().p;
        let e = self.pv.draw(rng);
        let (np, ng, nh) = layer_transition(p, self.g, self.h, e)?;
        self.pv.apply(e, rng)?;
        debug_assert_eq!(np, self.pv.state().p);
        let up = nh > self.h;
        if up {
            if self.h >= 1 {
                self.closed_layers += self.p_sigma as u64;
            }
            self.p_sigma = np;
        }
        self.g = ng;
        self.h = nh;
        Ok((e, up))
    }
}

/// State of the dual layer chain with the surrogate tally `Â*`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualLayerState {
    pub n: u64,
    pub p: u32,
    pub g_star: u32,
    pub h_star: u32,
    pub a_star_surrogate: u64,
    pub v: u64,
}

/// Dual peeling by layers in chain-only mode, started from the root face `(3, 0, 0)`.
///
/// `Â*` grows by one at every step (the peeled edge is a dual layer edge) and
/// by `k` more on a right swallow `R(k)`.
#[derive(Clone, Debug)]
pub struct DualLayerChain {
    pv: PvChain,
    g: u32,
    h: u32,
    a_hat: u64,
}

impl DualLayerChain {
    pub fn new(model: ModelId, track_volume: bool) -> Result<Self> {
        require_type2(model)?;
        let mut pv = PvChain::new(model, track_volume);
        // The root face is the first revealed triangle.
        let mut first = ChaCha8Rng::seed_from_u64(0);
        pv.apply(PeelEvent::C, &mut first)?;
        pv.state.n = 0;
        Ok(Self {
            pv,
            g: 0,
            h: 0,
            a_hat: 0,
        })
    }

    pub fn with_max_hole_volume(mut self, limit: Option<u64>) -> Self {
        self.pv = self.pv.with_max_hole_volume(limit);
        self
    }

    pub fn state(&self) -> DualLayerState {
        let s = self.pv.state();
        DualLayerState {
            n: s.n,
            p: s.p,
            g_star: self.g,
            h_star: self.h,
            a_star_surrogate: self.a_hat,
            v: s.v,
        }
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<PeelEvent> {
        let p = self.pv.state().p;
        let e = self.pv.draw(rng);
        let (_, ng, nh) = dual_transition(p, self.g, self.h, e)?;
        self.pv.apply(e, rng)?;
        self.a_hat += 1;
        if let PeelEvent::R(k) = e {
            self.a_hat += k as u64;
        }
        self.g = ng;
        self.h = nh;
        Ok(e)
    }
}

/// One row of a perimeter/volume trace.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PvRow {
    pub n: u64,
    #[serde(rename = "P")]
    pub p: u32,
    #[serde(rename = "V")]
    pub v: u64,
}

/// One row of a layer trace; for dual runs `H`, `A`, `G` hold `H*`, `Â*`, `G*`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerRow {
    pub n: u64,
    #[serde(rename = "P")]
    pub p: u32,
    #[serde(rename = "V")]
    pub v: u64,
    #[serde(rename = "H")]
    pub h: u32,
    #[serde(rename = "A")]
    pub a: u64,
    #[serde(rename = "U")]
    pub u: u32,
    #[serde(rename = "G")]
    pub g: u32,
}

/// One row of a first-passage trace; `P` counts edges.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FppRow {
    pub k: u64,
    pub tau: f64,
    #[serde(rename = "P")]
    pub p: u64,
    #[serde(rename = "V")]
    pub v: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TraceRows {
    Pv(Vec<PvRow>),
    Layers(Vec<LayerRow>),
    Fpp(Vec<FppRow>),
    Hull(Vec<HullPoint>),
    Sizes(Vec<SizeRow>),
    Spheres(Vec<SphereRow>),
}

/// One Boltzmann size draw.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeRow {
    pub draw: u64,
    #[serde(rename = "P")]
    pub p: u32,
    #[serde(rename = "V")]
    pub v: u64,
}

/// Counts of one Boltzmann sphere.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereRow {
    pub draw: u64,
    pub vertices: u64,
    pub edges: u64,
    pub faces: u64,
}

impl TraceRows {
    pub fn len(&self) -> usize {
        match self {
            TraceRows::Pv(r) => r.len(),
            TraceRows::Layers(r) => r.len(),
            TraceRows::Fpp(r) => r.len(),
            TraceRows::Hull(r) => r.len(),
            TraceRows::Sizes(r) => r.len(),
            TraceRows::Spheres(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn header(&self) -> &'static [&'static str] {
        match self {
            TraceRows::Pv(_) => &["n", "P", "V"],
            TraceRows::Layers(_) => &["n", "P", "V", "H", "A", "U", "G"],
            TraceRows::Fpp(_) => &["k", "tau", "P", "V"],
            TraceRows::Hull(_) => &["r", "P", "V"],
            TraceRows::Sizes(_) => &["draw", "P", "V"],
            TraceRows::Spheres(_) => &["draw", "vertices", "edges", "faces"],
        }
    }
}

/// Recorded run with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub model: ModelId,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub replica: u64,
    /// Set when a resource guard stopped the run early.
    pub truncated: Option<String>,
    pub rows: TraceRows,
    /// Edge list of the explored map, for map runs.
    #[serde(skip)]
    pub edge_list: Option<String>,
}

/// Recording options shared by the runners.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub track_volume: bool,
    /// Keep every `stride`-th row (the final row is always kept).
    pub stride: u64,
    /// Cap on the inner vertices of one hole; exceeding it truncates the run.
    pub max_hole_volume: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            track_volume: true,
            stride: 1,
            max_hole_volume: None,
        }
    }
}

/// Splits a step result into continue / truncate / fail.
pub(crate) fn guard<T>(r: Result<T>, truncated: &mut Option<String>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Resource(m)) => {
            *truncated = Some(m);
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn check_steps(steps: u64) -> Result<()> {
    if steps == 0 {
        return Err(Error::Argument("steps must be >= 1".into()));
    }
    Ok(())
}

fn keep(n: u64, steps: u64, stride: u64) -> bool {
    n % stride.max(1) == 0 || n == steps
}

/// Runs the `(P, V)` chain for `steps` steps.
pub fn run_pv<R: Rng + ?Sized>(
    model: ModelId,
    steps: u64,
    opts: RunOptions,
    rng: &mut R,
) -> Result<(Vec<PvRow>, Option<String>)> {
    check_steps(steps)?;
    let mut chain =
        PvChain::new(model, opts.track_volume).with_max_hole_volume(opts.max_hole_volume);
    let mut rows = vec![PvRow {
        n: 0,
        p: chain.state().p,
        v: 0,
    }];
    let mut truncated = None;
    while chain.state().n < steps {
        if guard(chain.step(rng), &mut truncated)?.is_none() {
            break;
        }
        let s = chain.state();
        if keep(s.n, steps, opts.stride) {
            rows.push(PvRow {
                n: s.n,
                p: s.p,
                v: s.v,
            });
        }
    }
    Ok((rows, truncated))
}

fn layer_row(s: LayerState) -> LayerRow {
    LayerRow {
        n: s.n,
        p: s.p,
        v: s.v,
        h: s.h,
        a: s.a_count,
        u: s.u,
        g: s.g,
    }
}

/// Runs the layer chain for `steps` steps.
pub fn run_layers<R: Rng + ?Sized>(
    model: ModelId,
    steps: u64,
    opts: RunOptions,
    rng: &mut R,
) -> Result<(Vec<LayerRow>, Option<String>)> {
    check_steps(steps)?;
    let mut chain =
        LayerChain::new(model, opts.track_volume)?.with_max_hole_volume(opts.max_hole_volume);
    let mut rows = vec![layer_row(chain.state())];
    let mut truncated = None;
    while chain.state().n < steps {
        if guard(chain.step(rng), &mut truncated)?.is_none() {
            break;
        }
        let s = chain.state();
        if keep(s.n, steps, opts.stride) {
            rows.push(layer_row(s));
        }
    }
    Ok((rows, truncated))
}

/// Runs the dual layer chain for `steps` steps.
pub fn run_dual_layers<R: Rng + ?Sized>(
    model: ModelId,
    steps: u64,
    opts: RunOptions,
    rng: &mut R,
) -> Result<(Vec<LayerRow>, Option<String>)> {
    check_steps(steps)?;
    let mut chain =
        DualLayerChain::new(model, opts.track_volume)?.with_max_hole_volume(opts.max_hole_volume);
    let row = |s: DualLayerState| LayerRow {
        n: s.n,
        p: s.p,
        v: s.v,
        h: s.h_star,
        a: s.a_star_surrogate,
        u: s.p - s.g_star,
        g: s.g_star,
    };
    let mut rows = vec![row(chain.state())];
    let mut truncated = None;
    while chain.state().n < steps {
        if guard(chain.step(rng), &mut truncated)?.is_none() {
            break;
        }
        let s = chain.state();
        if keep(s.n, steps, opts.stride) {
            rows.push(row(s));
        }
    }
    Ok((rows, truncated))
}

/// `(r, |∂B•_r|, |B•_r|)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HullPoint {
    pub r: u32,
    #[serde(rename = "P")]
    pub boundary: u32,
    #[serde(rename = "V")]
    pub volume: u64,
}

/// Runs the layer chain until `H = r_max`, recording the hull at every `σ_r`.
pub fn hull_series<R: Rng + ?Sized>(
    model: ModelId,
    r_max: u32,
    track_volume: bool,
    rng: &mut R,
) -> Result<Vec<HullPoint>> {
    if r_max == 0 {
        return Err(Error::Argument("r_max must be >= 1".into()));
    }
    let mut chain = LayerChain::new(model, track_volume)?;
    let mut out = Vec::with_capacity(r_max as usize);
    while out.len() < r_max as usize {
        let (_, up) = chain.step(rng)?;
        if up {
            let s = chain.state();
            out.push(HullPoint {
                r: s.h,
                boundary: s.p,
                volume: s.v,
            });
        }
    }
    Ok(out)
}

/// Uniform peeling with its first-passage clock.
///
/// `τ_k − τ_{k−1}` is exponential with rate equal to the boundary length in
/// edges after step `k`, so the first clock has rate 3 for triangulations.
#[derive(Clone, Debug)]
pub struct FppChain {
    pv: PvChain,
    tau: f64,
}

impl FppChain {
    pub fn new(model: ModelId, track_volume: bool) -> Self {
        Self {
            pv: PvChain::new(model, track_volume),
            tau: 0.0,
        }
    }

    pub fn with_max_hole_volume(mut self, limit: Option<u64>) -> Self {
        self.pv = self.pv.with_max_hole_volume(limit);
        self
    }

    pub fn pv(&self) -> &PvChain {
        &self.pv
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<PeelEvent> {
        let e = self.pv.step(rng)?;
        let x: f64 = Exp1.sample(rng);
        self.tau += x / self.pv.perimeter_edges() as f64;
        Ok(e)
    }
}

/// Runs uniform peeling for `steps` jumps.
pub fn run_fpp<R: Rng + ?Sized>(
    model: ModelId,
    steps: u64,
    opts: RunOptions,
    rng: &mut R,
) -> Result<(Vec<FppRow>, Option<String>)> {
    check_steps(steps)?;
    let mut chain =
        FppChain::new(model, opts.track_volume).with_max_hole_volume(opts.max_hole_volume);
    let mut rows = vec![FppRow {
        k: 0,
        tau: 0.0,
        p: chain.pv().perimeter_edges(),
        v: 0,
    }];
    let mut truncated = None;
    while chain.pv().state().n < steps {
        if guard(chain.step(rng), &mut truncated)?.is_none() {
            break;
        }
        let s = chain.pv().state();
        if keep(s.n, steps, opts.stride) {
            rows.push(FppRow {
                k: s.n,
                tau: chain.tau(),
                p: chain.pv().perimeter_edges(),
                v: s.v,
            });
        }
    }
    Ok((rows, truncated))
}

/// Runs one replica of `algorithm` and wraps it as a [`Trace`].
pub fn run_trace(
    model: ModelId,
    algorithm: Algorithm,
    steps: u64,
    opts: RunOptions,
    seed: u64,
    replica: u64,
) -> Result<Trace> {
    let mut rng = replica_rng(seed, replica);
    let (rows, truncated) = match algorithm {
        Algorithm::Pv => {
            let (r, t) = run_pv(model, steps, opts, &mut rng)?;
            (TraceRows::Pv(r), t)
        }
        Algorithm::Layers => {
            let (r, t) = run_layers(model, steps, opts, &mut rng)?;
            (TraceRows::Layers(r), t)
        }
        Algorithm::Dual => {
            let (r, t) = run_dual_layers(model, steps, opts, &mut rng)?;
            (TraceRows::Layers(r), t)
        }
        Algorithm::Fpp => {
            let (r, t) = run_fpp(model, steps, opts, &mut rng)?;
            (TraceRows::Fpp(r), t)
        }
        other => return Err(Error::Argument(format!("{other} is not a chain algorithm"))),
    };
    Ok(Trace {
        model,
        algorithm,
        seed,
        replica,
        truncated,
        rows,
        edge_list: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::kernel_row;

    #[test]
    fn hole_guard_truncates() {
        let opts = RunOptions {
            max_hole_volume: Some(0),
            ..RunOptions::default()
        };
        let (rows, truncated) =
            run_pv(ModelId::TypeII, 100_000, opts, &mut replica_rng(4, 0)).unwrap();
        assert!(truncated.is_some());
        assert!(rows.len() < 100_001);
    }

    #[test]
    fn first_step_is_growth() {
        let mut rng = replica_rng(1, 0);
        for _ in 0..100 {
            let mut c = PvChain::new(ModelId::TypeII, true);
            assert_eq!(c.step(&mut rng).unwrap(), PeelEvent::C);
            assert_eq!((c.state().p, c.state().v), (3, 0));
        }
    }

    #[test]
    fn q_rows_repartition_the_kernel() {
        for p in 2..=100u32 {
            let row = kernel_row(ModelId::TypeII, p).unwrap();
            for g in 0..p {
                let mut total = crate::ExactScalar::zero();
                for (i, &e) in row.events().iter().enumerate() {
                    let (np, ng, _) = layer_transition(p, g, 0, e).unwrap();
                    assert!(ng < np);
                    let (dp, dg, _) = dual_transition(p, g, 0, e).unwrap();
                    assert!(dg < dp && dp == np);
                    total += &row.exact_prob(i).unwrap();
                }
                assert_eq!(total, crate::ExactScalar::one());
            }
        }
    }

    #[test]
    fn vertex_accounting_is_conserved() {
        for model in ModelId::ALL {
            let mut rng = replica_rng(3, model.index() as u64);
            let mut c = PvChain::new(model, true);
            for _ in 0..20_000 {
                c.step(&mut rng).unwrap();
                let s = c.state();
                let boundary = c.perimeter_edges();
                assert_eq!(s.v + boundary, s.total_vertices);
                if model != ModelId::Quad {
                    assert_eq!(s.v + s.p as u64 - 2 - c.grow_events(), c.hole_volume());
                }
            }
        }
    }

    #[test]
    fn layers_hit_zero_at_sigma() {
        let mut rng = replica_rng(4, 0);
        let mut c = LayerChain::new(ModelId::TypeII, false).unwrap();
        let mut last_a = 0;
        let mut last_h = 0;
        let mut sigma_a = vec![];
        for _ in 0..200_000 {
            let (_, up) = c.step(&mut rng).unwrap();
            let s = c.state();
            assert!(s.h - last_h <= 1 && s.a_count >= last_a);
            if up {
                assert_eq!(s.g, 0);
                sigma_a.push((s.a_count, s.p));
            }
            last_a = s.a_count;
            last_h = s.h;
        }
        assert_eq!(sigma_a[0].0, 0);
        for w in sigma_a.windows(2) {
            assert_eq!(w[1].0 - w[0].0, w[0].1 as u64);
        }
    }

    #[test]
    fn first_clock_rate_is_three() {
        let mut rng = replica_rng(5, 0);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let mut c = FppChain::new(ModelId::TypeII, false);
            c.step(&mut rng).unwrap();
            sum += c.tau();
        }
        let mean = sum / n as f64;
        let sd = (1.0 / 3.0) / (n as f64).sqrt();
        assert!((mean - 1.0 / 3.0).abs() < 3.0 * sd, "{mean}");
    }

    #[test]
    fn runs_are_reproducible() {
        let a = run_trace(
            ModelId::TypeII,
            Algorithm::Fpp,
            1000,
            RunOptions::default(),
            1,
            0,
        )
        .unwrap();
        let b = run_trace(
            ModelId::TypeII,
            Algorithm::Fpp,
            1000,
            RunOptions::default(),
            1,
            0,
        )
        .unwrap();
        assert_eq!(a, b);
        let q = run_trace(
            ModelId::Quad,
            Algorithm::Pv,
            2000,
            RunOptions::default(),
            2,
            0,
        )
        .unwrap();
        assert_eq!(q.rows.len(), 2001);
    }

    #[test]
    fn layer_chains_reject_other_models() {
        assert!(LayerChain::new(ModelId::Quad, false).is_err());
        assert!(DualLayerChain::new(ModelId::TypeI, false).is_err());
    }
}
