use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::halfedge::{FaceId, FaceKind, HalfEdgeMap};
use crate::boltzmann::DiskSampler;
use crate::chains::replica_rng;
use crate::enumeration::hole_weight_f64;
use crate::error::{Error, Result};

const FAR: u32 = u32::MAX;

/// Ball of radius `r` around the root vertex, its holes and its hull.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HullDecomposition {
    pub r: u32,
    /// Polygons incident to a vertex at distance at most `r − 1`.
    pub ball: Vec<FaceId>,
    /// Hole sizes in nonincreasing order.
    pub holes: Vec<u32>,
    /// Size of the hole containing the external face, if any.
    pub hull_boundary: Option<u32>,
    /// Ball plus every hole not containing the external face.
    pub hull: Vec<FaceId>,
}

/// Splits the complement of `B_r` into holes.
///
/// Faces that are not in the ball are grouped through shared edges. On an
/// explored map every open face must stay at distance at least `r`.
pub fn hull_decompose(map: &HalfEdgeMap, r: u32) -> Result<HullDecomposition> {
    if r == 0 {
        return Ok(HullDecomposition {
            r,
            ball: vec![],
            holes: vec![],
            hull_boundary: Some(2),
            hull: vec![],
        });
    }
    let dist = map.distances_from(map.root_vertex());
    let slots = map.face_slots();
    let mut in_ball = vec![false; slots];
    for f in map.faces() {
        let near = map
            .face_cycle(f)
            .iter()
            .any(|&h| dist[map.origin(h) as usize] < r);
        if !near {
            continue;
        }
        if !map.face_kind(f).is_polygon() {
            return Err(Error::Undetermined(format!(
                "an open face touches the ball of radius {r}"
            )));
        }
        in_ball[f as usize] = true;
    }
    let mut component = vec![FAR; slots];
    let mut sizes: Vec<(u32, bool, Vec<FaceId>)> = Vec::new();
    let mut queue = VecDeque::new();
    for f in map.faces() {
        if in_ball[f as usize] || component[f as usize] != FAR {
            continue;
        }
        let id = sizes.len() as u32;
        let (mut len, mut external, mut members) = (0u32, false, Vec::new());
        component[f as usize] = id;
        queue.push_back(f);
        while let Some(g) = queue.pop_front() {
            members.push(g);
            external |= map.face_kind(g) == FaceKind::External;
            for h in map.face_cycle(g) {
                let other = map.face(map.twin(h));
                if in_ball[other as usize] {
                    len += 1;
                } else if component[other as usize] == FAR {
                    component[other as usize] = id;
                    queue.push_back(other);
                }
            }
        }
        sizes.push((len, external, members));
    }
    let ball: Vec<FaceId> = map.faces().filter(|&f| in_ball[f as usize]).collect();
    let mut hull = ball.clone();
    let mut hull_boundary = None;
    let mut holes = Vec::new();
    for (len, external, members) in sizes {
        if len == 0 {
            // Nothing of the ball borders it: the trivial sphere.
            continue;
        }
        holes.push(len);
        if external {
            hull_boundary = Some(len);
        } else {
            hull.extend(members);
        }
    }
    holes.sort_unstable_by(|a, b| b.cmp(a));
    hull.sort_unstable();
    Ok(HullDecomposition {
        r,
        ball,
        holes,
        hull_boundary,
        hull,
    })
}

/// `M_r = Σ f(ℓ_i(r))` over the holes of `B_r`, with `M_0 = 1`; zero on the
/// single-edge sphere.
pub fn martingale_value(map: &HalfEdgeMap, r: u32) -> Result<f64> {
    if r == 0 {
        return Ok(1.0);
    }
    if map.polygon_count() == 0 {
        return Ok(0.0);
    }
    Ok(hull_decompose(map, r)?
        .holes
        .iter()
        .map(|&l| hole_weight_f64(l))
        .sum())
}

/// Monte Carlo estimate of `E[M_r]` at one radius.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleRow {
    pub r: u32,
    pub mean: f64,
    pub std_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub replicas: u64,
    pub rows: Vec<MartingaleRow>,
}

impl MartingaleReport {
    /// Largest `|mean − 1|` in standard errors.
    pub fn max_z(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| (row.mean - 1.0).abs() / row.std_err.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

/// Samples Boltzmann spheres and averages `M_r` for `r = 1..=r_max`.
pub fn martingale_check(r_max: u32, replicas: u64, seed: u64) -> Result<MartingaleReport> {
    if replicas < 1000 {
        return Err(Error::Argument(format!(
            "martingale check needs at least 1000 replicas, got {replicas}"
        )));
    }
    if r_max == 0 {
        return Err(Error::Argument("r_max must be >= 1".into()));
    }
    let width = r_max as usize;
    let per_sphere = (0..replicas)
        .into_par_iter()
        .map_init(DiskSampler::default, |sampler, i| -> Result<Vec<f64>> {
            let mut rng = replica_rng(seed, i);
            let sphere = sampler.sample_sphere(&mut rng)?;
            (1..=r_max).map(|r| martingale_value(&sphere, r)).collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut sum, mut sq) = (vec![0.0f64; width], vec![0.0f64; width]);
    for values in &per_sphere {
        for (i, &m) in values.iter().enumerate() {
            sum[i] += m;
            sq[i] += m * m;
        }
    }
    let n = replicas as f64;
    let rows = (0..width)
        .map(|i| {
            let mean = sum[i] / n;
            let var = (sq[i] / n - mean * mean).max(0.0) * n / (n - 1.0);
            MartingaleRow {
                r: i as u32 + 1,
                mean,
                std_err: (var / n).sqrt(),
            }
        })
        .collect();
    Ok(MartingaleReport { replicas, rows })
}

/// Dual distances from the root face, indexed by face id.
///
/// The root face is the polygon on the left of the root half-edge. Only
/// polygons are reached; open faces and dead slots stay at `u32::MAX`.
pub fn dual_distances(map: &HalfEdgeMap) -> Result<Vec<u32>> {
    let root = map.face(map.root());
    if !map.face_kind(root).is_polygon() {
        return Err(Error::Undetermined("the root face is not explored".into()));
    }
    let mut dist = vec![FAR; map.face_slots()];
    let mut queue = VecDeque::from([root]);
    dist[root as usize] = 0;
    while let Some(f) = queue.pop_front() {
        let d = dist[f as usize] + 1;
        for h in map.face_cycle(f) {
            let g = map.face(map.twin(h));
            if map.face_kind(g).is_polygon() && dist[g as usize] == FAR {
                dist[g as usize] = d;
                queue.push_back(g);
            }
        }
    }
    Ok(dist)
}

/// Radius up to which `dual` is exact: the smallest dual distance of a polygon
/// bordering an open face (`u32::MAX` on closed maps).
pub fn determined_dual_radius(map: &HalfEdgeMap, dual: &[u32]) -> u32 {
    map.faces()
        .filter(|&f| !map.face_kind(f).is_polygon())
        .flat_map(|f| map.face_cycle(f))
        .map(|h| dual[map.face(map.twin(h)) as usize])
        .min()
        .unwrap_or(FAR)
}
