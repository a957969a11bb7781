//! Explicit maps built by peeling.
//!
//! Faces lie on the left of their half-edges. Open regions (the unexplored
//! part of the infinite map, unfilled holes) are faces of kind
//! [`FaceKind::External`] or [`FaceKind::Hole`].

mod explore;
mod halfedge;
mod hull;

pub use explore::{
    apply_peel, map_hull_perimeters, peel_by_layers_map, EmptyHoles, HoleFiller, LayerExplorer,
    OpenHoles, PeelOutcome, UNLABELLED,
};
pub use halfedge::{FaceId, FaceKind, HalfEdgeId, HalfEdgeMap, Revealed, Side, VertexId, NIL};
pub use hull::{
    determined_dual_radius, dual_distances, hull_decompose, martingale_check, martingale_value,
    HullDecomposition, MartingaleReport, MartingaleRow,
};
