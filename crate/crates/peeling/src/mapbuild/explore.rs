use rand::Rng;

use super::halfedge::{FaceId, HalfEdgeId, HalfEdgeMap, Revealed, Side};
use crate::boltzmann::DiskSampler;
use crate::chains::{event_sampler, layer_transition, LayerRow};
use crate::enumeration::ModelId;
use crate::error::{Error, Result};
use crate::kernel::PeelEvent;

/// Strategy for the holes enclosed by swallowing steps.
pub trait HoleFiller {
    /// Fills `hole` in place and returns the number of vertices added.
    fn fill<R: Rng + ?Sized>(
        &mut self,
        map: &mut HalfEdgeMap,
        hole: FaceId,
        rng: &mut R,
    ) -> Result<u64>;
}

impl HoleFiller for DiskSampler {
    fn fill<R: Rng + ?Sized>(
        &mut self,
        map: &mut HalfEdgeMap,
        hole: FaceId,
        rng: &mut R,
    ) -> Result<u64> {
        DiskSampler::fill(self, map, hole, rng)
    }
}

/// Leaves holes as [`FaceKind::Hole`](super::FaceKind::Hole) faces.
#[derive(Copy, Clone, Debug, Default)]
pub struct OpenHoles;

impl HoleFiller for OpenHoles {
    fn fill<R: Rng + ?Sized>(&mut self, _: &mut HalfEdgeMap, _: FaceId, _: &mut R) -> Result<u64> {
        Ok(0)
    }
}

/// Fills 2-gons with nothing, gluing their sides; larger holes are rejected.
#[derive(Copy, Clone, Debug, Default)]
pub struct EmptyHoles;

impl HoleFiller for EmptyHoles {
    fn fill<R: Rng + ?Sized>(
        &mut self,
        map: &mut HalfEdgeMap,
        hole: FaceId,
        _: &mut R,
    ) -> Result<u64> {
        let p = map.face_degree(hole);
        if p != 2 {
            return Err(Error::Argument(format!("a {p}-gon has no empty filling")));
        }
        map.close_digon(hole)?;
        Ok(0)
    }
}

/// Result of one explicit peeling step.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct PeelOutcome {
    pub revealed: Revealed,
    /// Vertices created by the filler.
    pub filled: u64,
    /// Boundary size of the peeled face afterwards.
    pub perimeter: u32,
}

fn peel_at<F: HoleFiller, R: Rng + ?Sized>(
    map: &mut HalfEdgeMap,
    edge: HalfEdgeId,
    p: u32,
    event: PeelEvent,
    filler: &mut F,
    rng: &mut R,
) -> Result<PeelOutcome> {
    let (revealed, perimeter) = match event {
        PeelEvent::C => (map.peel_grow(edge)?, p + 1),
        PeelEvent::L(k) | PeelEvent::R(k) if k >= 1 && k + 2 <= p => {
            let side = if matches!(event, PeelEvent::L(_)) {
                Side::Left
            } else {
                Side::Right
            };
            (map.peel_swallow(edge, side, k)?, p - k)
        }
        _ => {
            return Err(Error::Argument(format!(
                "event {event} is inadmissible at perimeter {p}"
            )))
        }
    };
    let filled = match revealed.enclosed {
        Some(hole) => filler.fill(map, hole, rng)?,
        None => 0,
    };
    Ok(PeelOutcome {
        revealed,
        filled,
        perimeter,
    })
}

/// Glues the face revealed by `event` on the boundary half-edge `edge` and
/// fills the enclosed hole with `filler`. Type II events only.
pub fn apply_peel<F: HoleFiller, R: Rng + ?Sized>(
    map: &mut HalfEdgeMap,
    edge: HalfEdgeId,
    event: PeelEvent,
    filler: &mut F,
    rng: &mut R,
) -> Result<PeelOutcome> {
    if !map.is_alive(edge) || map.face_kind(map.face(edge)).is_polygon() {
        return Err(Error::Argument(format!(
            "half-edge {edge} is not on an open boundary"
        )));
    }
    let p = map.face_degree(map.face(edge)) as u32;
    peel_at(map, edge, p, event, filler, rng)
}

/// Peeling by layers on an explicit map, started from the root edge.
///
/// Vertices carry their distance to the root vertex. The edge peeled next
/// joins the last boundary vertex at distance `H + 1` to the first one at
/// distance `H`, in boundary order.
#[derive(Clone, Debug)]
pub struct LayerExplorer<F> {
    map: HalfEdgeMap,
    filler: F,
    dist: Vec<u32>,
    layer_edge: Vec<bool>,
    current: HalfEdgeId,
    n: u64,
    p: u32,
    g: u32,
    h: u32,
    a_exact: u64,
    closed_layers: u64,
    p_sigma: u32,
    sigma: Vec<(u64, u32)>,
    checked: bool,
}

/// Sentinel distance for vertices created by a filler.
pub const UNLABELLED: u32 = u32::MAX;

impl<F: HoleFiller> LayerExplorer<F> {
    pub fn new(filler: F) -> Self {
        let map = HalfEdgeMap::trivial();
        let current = map.root();
        Self {
            map,
            filler,
            dist: vec![0, 1],
            layer_edge: vec![false; 2],
            current,
            n: 0,
            p: 2,
            g: 1,
            h: 0,
            a_exact: 0,
            closed_layers: 0,
            p_sigma: 2,
            sigma: Vec::new(),
            checked: false,
        }
    }

    /// Re-derives `(P, G, H)` from the labels after every step.
    pub fn with_checks(mut self) -> Self {
        self.checked = true;
        self
    }

    pub fn map(&self) -> &HalfEdgeMap {
        &self.map
    }

    pub fn into_map(self) -> HalfEdgeMap {
        self.map
    }

    /// Distance labels; [`UNLABELLED`] inside filled holes.
    pub fn labels(&self) -> &[u32] {
        &self.dist
    }

    pub fn steps(&self) -> u64 {
        self.n
    }

    pub fn perimeter(&self) -> u32 {
        self.p
    }

    pub fn layer(&self) -> u32 {
        self.h
    }

    pub fn next_edge(&self) -> HalfEdgeId {
        self.current
    }

    /// Layer edges strictly inside the explored region, counted on the map.
    pub fn layer_edges_absorbed(&self) -> u64 {
        self.a_exact
    }

    /// The chain formula `Σ_{i<H} P_{σ_i} + P_{σ_H} − U` on the same path.
    pub fn layer_edges_formula(&self) -> u64 {
        if self.h == 0 {
            0
        } else {
            self.closed_layers + (self.p_sigma - (self.p - self.g)) as u64
        }
    }

    /// `(σ_r, P_{σ_r})` for every layer reached so far.
    pub fn sigma(&self) -> &[(u64, u32)] {
        &self.sigma
    }

    pub fn row(&self) -> LayerRow {
        LayerRow {
            n: self.n,
            p: self.p,
            v: self.map.vertex_count() as u64 - self.p as u64,
            h: self.h,
            a: self.a_exact,
            u: self.p - self.g,
            g: self.g,
        }
    }

    fn mark(&self, h: HalfEdgeId) -> bool {
        self.layer_edge.get(h as usize).copied().unwrap_or(false)
    }

    /// One step driven by `event`, which must be admissible at the current perimeter.
    pub fn apply<R: Rng + ?Sized>(&mut self, event: PeelEvent, rng: &mut R) -> Result<()> {
        let (np, ng, nh) = layer_transition(self.p, self.g, self.h, event)?;
        let old_h = self.h;
        let e = self.current;
        let (u, v) = (self.map.origin(e), self.map.target(e));
        let mut absorbed = self.mark(e) as u64;
        let out = match event {
            PeelEvent::C => {
                let r = self.map.peel_grow(e)?;
                PeelOutcome {
                    revealed: r,
                    filled: 0,
                    perimeter: self.p + 1,
                }
            }
            _ => {
                let side = if matches!(event, PeelEvent::L(_)) {
                    Side::Left
                } else {
                    Side::Right
                };
                let k = event.swallowed(ModelId::TypeII) as u32;
                let r = self.map.peel_swallow(e, side, k)?;
                let hole = r.enclosed.expect("swallow encloses a hole");
                for h in self.map.face_cycle(hole) {
                    absorbed += self.mark(h) as u64;
                }
                let filled = self.filler.fill(&mut self.map, hole, rng)?;
                PeelOutcome {
                    revealed: r,
                    filled,
                    perimeter: self.p - k,
                }
            }
        };
        self.a_exact += absorbed;
        let du = self.dist[u as usize].min(self.dist[v as usize]);
        if let Some(x) = out.revealed.vertex {
            debug_assert_eq!(x as usize, self.dist.len());
            self.dist.push(du + 1);
        }
        self.dist.resize(self.map.vertex_count(), UNLABELLED);
        self.layer_edge.resize(self.map.half_edge_slots(), false);
        self.current = match event {
            PeelEvent::C if self.n == 0 => self.map.twin(e),
            PeelEvent::C => out.revealed.boundary[1],
            _ => out.revealed.boundary[0],
        };
        if nh > self.h {
            if self.h >= 1 {
                self.closed_layers += self.p_sigma as u64;
            }
            self.p_sigma = np;
            self.sigma.push((self.n + 1, np));
            let outer = self.map.face(self.current);
            for h in self.map.face_cycle(outer) {
                self.layer_edge[h as usize] = true;
            }
        }
        self.n += 1;
        self.p = np;
        self.g = ng;
        self.h = nh;
        if self.checked {
            self.check(out.perimeter, du, old_h)?;
        }
        Ok(())
    }

    /// Draws a type II event at the current perimeter and applies it.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<PeelEvent> {
        let event = event_sampler(ModelId::TypeII).sample(self.p, rng);
        self.apply(event, rng)?;
        Ok(event)
    }

    fn check(&self, perimeter: u32, peeled_min: u32, old_h: u32) -> Result<()> {
        let bad = |m: String| Err(Error::Integrity(format!("step {}: {m}", self.n)));
        if perimeter != self.p {
            return bad(format!(
                "map perimeter {perimeter} but chain perimeter {}",
                self.p
            ));
        }
        let cycle = self.map.face_cycle(self.map.face(self.current));
        if cycle.len() != self.p as usize {
            return bad(format!(
                "boundary has {} edges, expected {}",
                cycle.len(),
                self.p
            ));
        }
        let labels: Vec<u32> = cycle
            .iter()
            .map(|&h| self.dist[self.map.origin(h) as usize])
            .collect();
        let min = labels.iter().copied().min().unwrap_or(UNLABELLED);
        let far = labels.iter().filter(|&&d| d == min + 1).count() as u32;
        if min != self.h || labels.iter().any(|&d| d != min && d != min + 1) {
            return bad(format!(
                "boundary labels {labels:?} do not sit on layers {}, {}",
                self.h,
                self.h + 1
            ));
        }
        if far != self.g {
            return bad(format!(
                "{far} boundary vertices at distance H+1, chain says {}",
                self.g
            ));
        }
        if peeled_min != old_h {
            return bad(format!(
                "peeled triangle closest vertex at {peeled_min}, H = {old_h}"
            ));
        }
        let (a, b) = (
            self.dist[self.map.origin(self.current) as usize],
            self.dist[self.map.target(self.current) as usize],
        );
        if self.g > 0 && (a != self.h + 1 || b != self.h) {
            return bad(format!("next edge joins distances {a} -> {b}"));
        }
        Ok(())
    }

    /// Compares labels with breadth-first distances on the current map.
    pub fn verify_labels(&self) -> Result<()> {
        let bfs = self.map.distances_from(self.map.root_vertex());
        for (x, (&label, &d)) in self.dist.iter().zip(&bfs).enumerate() {
            if label != UNLABELLED && label != d {
                return Err(Error::Integrity(format!(
                    "vertex {x}: label {label}, distance {d}"
                )));
            }
        }
        Ok(())
    }
}

/// Materialized peeling by layers for `steps` steps with one row per step.
pub fn peel_by_layers_map<F: HoleFiller, R: Rng + ?Sized>(
    steps: u64,
    filler: F,
    rng: &mut R,
) -> Result<(LayerExplorer<F>, Vec<LayerRow>)> {
    if steps == 0 {
        return Err(Error::Argument("steps must be >= 1".into()));
    }
    let mut explorer = LayerExplorer::new(filler);
    let mut rows = Vec::with_capacity(steps as usize + 1);
    rows.push(explorer.row());
    for _ in 0..steps {
        explorer.step(rng)?;
        rows.push(explorer.row());
    }
    Ok((explorer, rows))
}

/// Runs the map explorer until layer `r_max` is reached; returns `P_{σ_r}` for `r = 1..=r_max`.
pub fn map_hull_perimeters<F: HoleFiller, R: Rng + ?Sized>(
    r_max: u32,
    filler: F,
    rng: &mut R,
) -> Result<Vec<u32>> {
    let mut explorer = LayerExplorer::new(filler);
    while explorer.layer() < r_max {
        explorer.step(rng)?;
    }
    Ok(explorer.sigma().iter().map(|&(_, p)| p).collect())
}
