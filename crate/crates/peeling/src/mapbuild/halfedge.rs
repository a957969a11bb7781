//! Index-based half-edge maps.
//!
//! Every face lies to the left of its half-edges. Holes and the unexplored
//! region are ordinary faces with a non-polygon [`FaceKind`].

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};

pub type HalfEdgeId = u32;
pub type FaceId = u32;
pub type VertexId = u32;

/// Marker for "no element".
pub const NIL: u32 = u32::MAX;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FaceKind {
    Triangle,
    Quad,
    /// A bounded region still to be filled.
    Hole,
    /// The unexplored or outer region.
    External,
}

impl FaceKind {
    pub fn is_polygon(self) -> bool {
        matches!(self, FaceKind::Triangle | FaceKind::Quad)
    }
}

/// Which part of a boundary a swallowing step encloses, relative to the peeled edge.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Side {
    /// Edges preceding the peeled edge along its face.
    Left,
    /// Edges following the peeled edge along its face.
    Right,
}

/// Handles created by one peeling step.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Revealed {
    /// The new polygon.
    pub face: FaceId,
    /// New half-edges left in the peeled face, in cycle order (`NIL` when absent).
    pub boundary: [HalfEdgeId; 2],
    /// Vertex created by a growing step.
    pub vertex: Option<VertexId>,
    /// Face enclosed by a swallowing step.
    pub enclosed: Option<FaceId>,
}

#[derive(Clone, Debug, Default)]
pub struct HalfEdgeMap {
    twin: Vec<u32>,
    next: Vec<u32>,
    prev: Vec<u32>,
    origin: Vec<u32>,
    face: Vec<u32>,
    alive: Vec<bool>,
    face_kind: Vec<FaceKind>,
    face_edge: Vec<u32>,
    face_alive: Vec<bool>,
    vertex_edge: Vec<u32>,
    root: HalfEdgeId,
    live_edges: usize,
    live_faces: usize,
}

impl HalfEdgeMap {
    /// A single edge bounding one external 2-cycle; the root runs from vertex 0 to vertex 1.
    pub fn trivial() -> Self {
        let mut m = Self {
            vertex_edge: vec![0, 1],
            ..Self::default()
        };
        let f = m.push_face(FaceKind::External, 0);
        m.push_half(0, f);
        m.push_half(1, f);
        m.link_twins(0, 1);
        m.link(0, 1);
        m.link(1, 0);
        m.root = 0;
        m
    }

    /// A `p`-gon whose interior is a [`FaceKind::Hole`] and exterior is external.
    ///
    /// Inner half-edge `i` runs from vertex `i` to vertex `i+1`; the root is half-edge 0.
    pub fn polygon(p: u32) -> Result<Self> {
        if p < 2 {
            return Err(Error::Domain(format!("polygon needs p >= 2, got {p}")));
        }
        let mut m = Self::default();
        let inner = m.push_face(FaceKind::Hole, 0);
        let outer = m.push_face(FaceKind::External, p);
        m.vertex_edge = (0..p).collect();
        for i in 0..p {
            m.push_half(i, inner);
        }
        for i in 0..p {
            m.push_half((i + 1) % p, outer);
        }
        for i in 0..p {
            m.link_twins(i, p + i);
            m.link(i, (i + 1) % p);
            m.link(p + i, p + (i + p - 1) % p);
        }
        m.root = 0;
        Ok(m)
    }

    fn push_half(&mut self, origin: VertexId, face: FaceId) -> HalfEdgeId {
        let id = self.twin.len() as u32;
        self.twin.push(NIL);
        self.next.push(NIL);
        self.prev.push(NIL);
        self.origin.push(origin);
        self.face.push(face);
        self.alive.push(true);
        self.live_edges += 1;
        id
    }

    fn push_face(&mut self, kind: FaceKind, edge: HalfEdgeId) -> FaceId {
        let id = self.face_kind.len() as u32;
        self.face_kind.push(kind);
        self.face_edge.push(edge);
        self.face_alive.push(true);
        self.live_faces += 1;
        id
    }

    fn push_vertex(&mut self, edge: HalfEdgeId) -> VertexId {
        self.vertex_edge.push(edge);
        self.vertex_edge.len() as u32 - 1
    }

    fn link(&mut self, a: HalfEdgeId, b: HalfEdgeId) {
        self.next[a as usize] = b;
        self.prev[b as usize] = a;
    }

    fn link_twins(&mut self, a: HalfEdgeId, b: HalfEdgeId) {
        self.twin[a as usize] = b;
        self.twin[b as usize] = a;
    }

    pub fn root(&self) -> HalfEdgeId {
        self.root
    }

    pub fn root_vertex(&self) -> VertexId {
        self.origin(self.root)
    }

    pub fn twin(&self, h: HalfEdgeId) -> HalfEdgeId {
        self.twin[h as usize]
    }

    pub fn next(&self, h: HalfEdgeId) -> HalfEdgeId {
        self.next[h as usize]
    }

    pub fn prev(&self, h: HalfEdgeId) -> HalfEdgeId {
        self.prev[h as usize]
    }

    pub fn origin(&self, h: HalfEdgeId) -> VertexId {
        self.origin[h as usize]
    }

    pub fn target(&self, h: HalfEdgeId) -> VertexId {
        self.origin[self.twin[h as usize] as usize]
    }

    pub fn face(&self, h: HalfEdgeId) -> FaceId {
        self.face[h as usize]
    }

    pub fn face_kind(&self, f: FaceId) -> FaceKind {
        self.face_kind[f as usize]
    }

    pub fn face_edge(&self, f: FaceId) -> HalfEdgeId {
        self.face_edge[f as usize]
    }

    pub fn is_face_alive(&self, f: FaceId) -> bool {
        self.face_alive[f as usize]
    }

    pub fn is_alive(&self, h: HalfEdgeId) -> bool {
        self.alive[h as usize]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_edge.len()
    }

    pub fn edge_count(&self) -> usize {
        self.live_edges / 2
    }

    pub fn face_count(&self) -> usize {
        self.live_faces
    }

    /// Capacity of the half-edge index space, dead slots included.
    pub fn half_edge_slots(&self) -> usize {
        self.twin.len()
    }

    /// Capacity of the face index space, dead slots included.
    pub fn face_slots(&self) -> usize {
        self.face_kind.len()
    }

    /// Live faces.
    pub fn faces(&self) -> impl Iterator<Item = FaceId> + '_ {
        (0..self.face_kind.len() as u32).filter(|&f| self.face_alive[f as usize])
    }

    /// Live half-edges.
    pub fn half_edges(&self) -> impl Iterator<Item = HalfEdgeId> + '_ {
        (0..self.twin.len() as u32).filter(|&h| self.alive[h as usize])
    }

    /// Half-edges of `f` in cycle order starting at its handle.
    pub fn face_cycle(&self, f: FaceId) -> Vec<HalfEdgeId> {
        let start = self.face_edge(f);
        let mut out = vec![start];
        let mut h = self.next(start);
        while h != start {
            out.push(h);
            h = self.next(h);
        }
        out
    }

    pub fn face_degree(&self, f: FaceId) -> usize {
        let start = self.face_edge(f);
        let mut n = 1;
        let mut h = self.next(start);
        while h != start {
            n += 1;
            h = self.next(h);
        }
        n
    }

    /// Number of triangles and quadrangles.
    pub fn polygon_count(&self) -> usize {
        self.faces()
            .filter(|&f| self.face_kind(f).is_polygon())
            .count()
    }

    pub fn set_face_kind(&mut self, f: FaceId, kind: FaceKind) {
        self.face_kind[f as usize] = kind;
    }

    fn require_open(&self, e: HalfEdgeId) -> Result<FaceId> {
        if e as usize >= self.twin.len() || !self.alive[e as usize] {
            return Err(Error::Argument(format!("half-edge {e} does not exist")));
        }
        let f = self.face(e);
        if self.face_kind(f).is_polygon() {
            return Err(Error::Argument(format!(
                "half-edge {e} is not on a hole or external boundary"
            )));
        }
        Ok(f)
    }

    /// Glues a triangle on `e` whose third vertex is new.
    pub fn peel_grow(&mut self, e: HalfEdgeId) -> Result<Revealed> {
        let hole = self.require_open(e)?;
        let (u, v) = (self.origin(e), self.target(e));
        let (n1, p1) = (self.next(e), self.prev(e));
        let t = self.push_face(FaceKind::Triangle, e);
        let x = self.push_vertex(NIL);
        let a = self.push_half(v, t);
        let b = self.push_half(x, t);
        let a_out = self.push_half(x, hole);
        let b_out = self.push_half(u, hole);
        self.vertex_edge[x as usize] = b;
        self.link_twins(a, a_out);
        self.link_twins(b, b_out);
        self.face[e as usize] = t;
        self.link(e, a);
        self.link(a, b);
        self.link(b, e);
        if n1 == e {
            unreachable!("a face of degree one cannot occur");
        }
        self.link(p1, b_out);
        self.link(b_out, a_out);
        self.link(a_out, n1);
        self.face_edge[hole as usize] = b_out;
        Ok(Revealed {
            face: t,
            boundary: [b_out, a_out],
            vertex: Some(x),
            enclosed: None,
        })
    }

    /// Glues a triangle on `e` whose third vertex is the origin of `h_w`, a
    /// half-edge of the same face. The part on `enclosed` side becomes a new
    /// hole; the other part keeps the face id of `e`.
    pub fn peel_to(&mut self, e: HalfEdgeId, h_w: HalfEdgeId, enclosed: Side) -> Result<Revealed> {
        let hole = self.require_open(e)?;
        if self.face(h_w) != hole || !self.alive[h_w as usize] {
            return Err(Error::Argument(
                "third vertex must lie on the peeled face".into(),
            ));
        }
        let (u, v, w) = (self.origin(e), self.target(e), self.origin(h_w));
        if w == u || w == v || h_w == e || h_w == self.next(e) {
            return Err(Error::Argument(
                "third vertex must differ from the peeled edge endpoints".into(),
            ));
        }
        let (n1, p1, pw) = (self.next(e), self.prev(e), self.prev(h_w));
        let t = self.push_face(FaceKind::Triangle, e);
        let a = self.push_half(v, t);
        let b = self.push_half(w, t);
        let a_out = self.push_half(w, hole);
        let b_out = self.push_half(u, hole);
        self.link_twins(a, a_out);
        self.link_twins(b, b_out);
        self.face[e as usize] = t;
        self.link(e, a);
        self.link(a, b);
        self.link(b, e);
        // Right part: n1 … pw, closed by a_out. Left part: h_w … p1, closed by b_out.
        self.link(pw, a_out);
        self.link(a_out, n1);
        self.link(p1, b_out);
        self.link(b_out, h_w);
        let (new_start, keep) = match enclosed {
            Side::Right => (a_out, b_out),
            Side::Left => (b_out, a_out),
        };
        let new_face = self.push_face(FaceKind::Hole, new_start);
        let mut h = new_start;
        loop {
            self.face[h as usize] = new_face;
            h = self.next(h);
            if h == new_start {
                break;
            }
        }
        self.face_edge[hole as usize] = keep;
        let boundary = match enclosed {
            Side::Right => [b_out, NIL],
            Side::Left => [a_out, NIL],
        };
        Ok(Revealed {
            face: t,
            boundary,
            vertex: None,
            enclosed: Some(new_face),
        })
    }

    /// Swallows `k ≥ 1` edges on `side` of `e`.
    pub fn peel_swallow(&mut self, e: HalfEdgeId, side: Side, k: u32) -> Result<Revealed> {
        let mut h_w = e;
        match side {
            Side::Right => {
                for _ in 0..=k {
                    h_w = self.next(h_w);
                }
            }
            Side::Left => {
                for _ in 0..k {
                    h_w = self.prev(h_w);
                }
            }
        }
        self.peel_to(e, h_w, side)
    }

    /// Closes a face of degree 2 by identifying its two sides.
    pub fn close_digon(&mut self, f: FaceId) -> Result<()> {
        let h1 = self.face_edge(f);
        let h2 = self.next(h1);
        if self.next(h2) != h1 {
            return Err(Error::Argument(format!("face {f} is not a digon")));
        }
        let (t1, t2) = (self.twin(h1), self.twin(h2));
        if t1 == h2 {
            return Err(Error::Argument("digon bounded by a single edge".into()));
        }
        self.link_twins(t1, t2);
        for h in [h1, h2] {
            self.alive[h as usize] = false;
            self.twin[h as usize] = NIL;
        }
        self.live_edges -= 2;
        self.face_alive[f as usize] = false;
        self.live_faces -= 1;
        let (x, y) = (self.origin(h1), self.origin(h2));
        self.vertex_edge[x as usize] = t2;
        self.vertex_edge[y as usize] = t1;
        if self.root == h1 {
            self.root = t2;
        } else if self.root == h2 {
            self.root = t1;
        }
        Ok(())
    }

    /// CSR adjacency over live edges.
    pub fn adjacency(&self) -> (Vec<u32>, Vec<VertexId>) {
        let n = self.vertex_count();
        let mut deg = vec![0u32; n + 1];
        for h in self.half_edges() {
            deg[self.origin(h) as usize + 1] += 1;
        }
        for i in 0..n {
            deg[i + 1] += deg[i];
        }
        let mut fill = deg.clone();
        let mut nbr = vec![0u32; self.live_edges];
        for h in self.half_edges() {
            let o = self.origin(h) as usize;
            nbr[fill[o] as usize] = self.target(h);
            fill[o] += 1;
        }
        (deg, nbr)
    }

    /// Graph distances from `source`; `u32::MAX` for unreachable vertices.
    pub fn distances_from(&self, source: VertexId) -> Vec<u32> {
        let (off, nbr) = self.adjacency();
        let mut dist = vec![u32::MAX; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[source as usize] = 0;
        queue.push_back(source);
        while let Some(x) = queue.pop_front() {
            let d = dist[x as usize] + 1;
            for &y in &nbr[off[x as usize] as usize..off[x as usize + 1] as usize] {
                if dist[y as usize] == u32::MAX {
                    dist[y as usize] = d;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Checks all structural invariants; `loops_allowed` relaxes the loop ban.
    pub fn validate(&self, loops_allowed: bool) -> Result<()> {
        let bad = |m: String| Err(Error::Integrity(m));
        for h in self.half_edges() {
            let t = self.twin(h);
            if t == NIL || t == h || !self.is_alive(t) || self.twin(t) != h {
                return bad(format!("twin is not an involution at {h}"));
            }
            let n = self.next(h);
            if !self.is_alive(n) || self.prev(n) != h {
                return bad(format!("next/prev mismatch at {h}"));
            }
            if self.face(n) != self.face(h) {
                return bad(format!("face orbit broken at {h}"));
            }
            if self.origin(n) != self.target(h) {
                return bad(format!("vertex mismatch along face at {h}"));
            }
            if !loops_allowed && self.origin(h) == self.target(h) {
                return bad(format!("loop at {h}"));
            }
            if !self.is_face_alive(self.face(h)) {
                return bad(format!("half-edge {h} in dead face"));
            }
        }
        let mut covered = 0usize;
        for f in self.faces() {
            let cycle = self.face_cycle(f);
            covered += cycle.len();
            match self.face_kind(f) {
                FaceKind::Triangle if cycle.len() != 3 => {
                    return bad(format!("triangle {f} has degree {}", cycle.len()))
                }
                FaceKind::Quad if cycle.len() != 4 => {
                    return bad(format!("quadrangle {f} has degree {}", cycle.len()))
                }
                FaceKind::Hole => {
                    let mut vs: Vec<u32> = cycle.iter().map(|&h| self.origin(h)).collect();
                    vs.sort_unstable();
                    vs.dedup();
                    if vs.len() != cycle.len() {
                        return bad(format!("hole {f} boundary is not simple"));
                    }
                }
                _ => {}
            }
        }
        if covered != self.live_edges {
            return bad("face cycles do not partition the half-edges".into());
        }
        for (v, &h) in self.vertex_edge.iter().enumerate() {
            if h == NIL || !self.is_alive(h) || self.origin(h) as usize != v {
                return bad(format!("vertex {v} has a stale handle"));
            }
        }
        let euler =
            self.vertex_count() as i64 - self.edge_count() as i64 + self.face_count() as i64;
        if euler != 2 {
            return bad(format!("Euler characteristic {euler}"));
        }
        Ok(())
    }

    /// Edge list `v_from v_to`, one line per edge, followed by face records
    /// `f kind v1 v2 …` for polygons.
    pub fn export_edge_list(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# vertices {} edges {} root {} {}",
            self.vertex_count(),
            self.edge_count(),
            self.root_vertex(),
            self.target(self.root)
        );
        for h in self.half_edges() {
            if h < self.twin(h) {
                let _ = writeln!(out, "{} {}", self.origin(h), self.target(h));
            }
        }
        for f in self.faces() {
            let kind = match self.face_kind(f) {
                FaceKind::Triangle => "triangle",
                FaceKind::Quad => "quad",
                FaceKind::Hole => "hole",
                FaceKind::External => "external",
            };
            let vs: Vec<String> = self
                .face_cycle(f)
                .iter()
                .map(|&h| self.origin(h).to_string())
                .collect();
            let _ = writeln!(out, "f {kind} {}", vs.join(" "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_and_polygon_are_valid() {
        let t = HalfEdgeMap::trivial();
        t.validate(false).unwrap();
        assert_eq!(
            (t.vertex_count(), t.edge_count(), t.face_count()),
            (2, 1, 1)
        );
        for p in 2..8 {
            let m = HalfEdgeMap::polygon(p).unwrap();
            m.validate(false).unwrap();
            assert_eq!(m.face_degree(0), p as usize);
        }
    }

    #[test]
    fn grow_then_swallow() {
        let mut m = HalfEdgeMap::trivial();
        let r = m.peel_grow(0).unwrap();
        m.validate(false).unwrap();
        assert_eq!(m.face_degree(0), 3);
        // Swallow one edge on the right of the right-most new edge.
        let s = m.peel_swallow(r.boundary[1], Side::Right, 1).unwrap();
        m.validate(false).unwrap();
        let hole = s.enclosed.unwrap();
        assert_eq!(m.face_degree(hole), 2);
        assert_eq!(m.face_degree(0), 2);
        m.close_digon(hole).unwrap();
        m.validate(false).unwrap();
        assert_eq!(m.polygon_count(), 2);
    }

    #[test]
    fn digon_of_one_edge_cannot_close() {
        let mut t = HalfEdgeMap::trivial();
        assert!(t.close_digon(0).is_err());
    }

    #[test]
    fn distances_on_polygon() {
        let m = HalfEdgeMap::polygon(6).unwrap();
        assert_eq!(m.distances_from(0), vec![0, 1, 2, 3, 2, 1]);
    }
}
