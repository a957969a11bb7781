//! Replica runs for every algorithm, shaped as traces.

use rand::Rng;
use rayon::prelude::*;

use crate::boltzmann::{DiskSampler, SizeSampler, DEFAULT_MAX_VOLUME};
use crate::chains::{
    guard, replica_rng, run_trace, Algorithm, HullPoint, LayerChain, RunOptions, SizeRow,
    SphereRow, Trace, TraceRows,
};
use crate::enumeration::ModelId;
use crate::error::{Error, Result};
use crate::mapbuild::LayerExplorer;

/// How far each replica runs.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Length {
    /// Peeling steps, or draws for the Boltzmann samplers.
    Steps(u64),
    /// Layers to complete.
    Radius(u32),
}

/// A fully specified simulation.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Job {
    pub model: ModelId,
    pub algorithm: Algorithm,
    pub length: Length,
    /// Boundary of the disks drawn by [`Algorithm::Boltzmann`]; defaults to the model minimum.
    pub perimeter: Option<u32>,
    pub opts: RunOptions,
}

impl Job {
    /// Rejects unsupported combinations before any work is done.
    pub fn validate(&self) -> Result<()> {
        match self.length {
            Length::Steps(0) => return Err(Error::Argument("steps must be >= 1".into())),
            Length::Radius(0) => return Err(Error::Argument("rmax must be >= 1".into())),
            Length::Radius(_)
                if !matches!(self.algorithm, Algorithm::Layers | Algorithm::MapLayers) =>
            {
                return Err(Error::Argument(format!(
                    "--rmax applies to layers and map-layers, not {}",
                    self.algorithm
                )));
            }
            _ => {}
        }
        let type2_only = matches!(
            self.algorithm,
            Algorithm::Layers | Algorithm::Dual | Algorithm::Sphere | Algorithm::MapLayers
        );
        if type2_only && self.model != ModelId::TypeII {
            return Err(Error::Domain(format!(
                "{} runs on type2 only, got {}",
                self.algorithm, self.model
            )));
        }
        if let Some(p) = self.perimeter {
            self.model.check_boundary(p)?;
        }
        Ok(())
    }

    fn volume_cap(&self) -> u64 {
        self.opts.max_hole_volume.unwrap_or(DEFAULT_MAX_VOLUME)
    }

    /// Replica `replica` on the stream derived from `seed`.
    pub fn run(&self, seed: u64, replica: u64) -> Result<Trace> {
        self.validate()?;
        let trace = |rows, truncated, edge_list| Trace {
            model: self.model,
            algorithm: self.algorithm,
            seed,
            replica,
            truncated,
            rows,
            edge_list,
        };
        let mut rng = replica_rng(seed, replica);
        match (self.algorithm, self.length) {
            (Algorithm::Boltzmann, Length::Steps(n)) => {
                let (rows, truncated) = self.sizes(n, &mut rng)?;
                Ok(trace(TraceRows::Sizes(rows), truncated, None))
            }
            (Algorithm::Sphere, Length::Steps(n)) => {
                let (rows, truncated) = self.spheres(n, &mut rng)?;
                Ok(trace(TraceRows::Spheres(rows), truncated, None))
            }
            (Algorithm::Layers, Length::Radius(r)) => {
                let (rows, truncated) = self.hull(r, &mut rng)?;
                Ok(trace(TraceRows::Hull(rows), truncated, None))
            }
            (Algorithm::MapLayers, length) => self.map_layers(length, &mut rng, trace),
            (algorithm, Length::Steps(n)) => {
                run_trace(self.model, algorithm, n, self.opts, seed, replica)
            }
            (algorithm, Length::Radius(_)) => {
                Err(Error::Argument(format!("{algorithm} needs --steps")))
            }
        }
    }

    /// Replicas `0..count`, run in parallel and returned in index order.
    pub fn run_all(&self, seed: u64, count: u64) -> Result<Vec<Trace>> {
        self.validate()?;
        (0..count)
            .into_par_iter()
            .map(|i| self.run(seed, i))
            .collect()
    }

    fn sizes<R: Rng + ?Sized>(
        &self,
        n: u64,
        rng: &mut R,
    ) -> Result<(Vec<SizeRow>, Option<String>)> {
        let p = self.perimeter.unwrap_or(self.model.min_boundary());
        let mut sampler = SizeSampler::new(self.model);
        let mut rows = Vec::new();
        let mut truncated = None;
        for draw in 0..n {
            let r = sampler
                .sample(p, rng)
                .and_then(|v| match self.opts.max_hole_volume {
                    Some(m) if v > m => Err(Error::Resource(format!(
                        "a disk of perimeter {p} drew {v} inner vertices"
                    ))),
                    _ => Ok(v),
                });
            let Some(v) = guard(r, &mut truncated)? else {
                break;
            };
            rows.push(SizeRow { draw, p, v });
        }
        Ok((rows, truncated))
    }

    fn spheres<R: Rng + ?Sized>(
        &self,
        n: u64,
        rng: &mut R,
    ) -> Result<(Vec<SphereRow>, Option<String>)> {
        let mut sampler = DiskSampler::new(self.volume_cap());
        let mut rows = Vec::new();
        let mut truncated = None;
        for draw in 0..n {
            let Some(map) = guard(sampler.sample_sphere(rng), &mut truncated)? else {
                break;
            };
            rows.push(SphereRow {
                draw,
                vertices: map.vertex_count() as u64,
                edges: map.edge_count() as u64,
                faces: map.polygon_count() as u64,
            });
        }
        Ok((rows, truncated))
    }

    fn hull<R: Rng + ?Sized>(
        &self,
        r_max: u32,
        rng: &mut R,
    ) -> Result<(Vec<HullPoint>, Option<String>)> {
        let mut chain = LayerChain::new(self.model, self.opts.track_volume)?
            .with_max_hole_volume(self.opts.max_hole_volume);
        let mut rows = Vec::with_capacity(r_max as usize);
        let mut truncated = None;
        while rows.len() < r_max as usize {
            let Some((_, up)) = guard(chain.step(rng), &mut truncated)? else {
                break;
            };
            if up {
                let s = chain.state();
                rows.push(HullPoint {
                    r: s.h,
                    boundary: s.p,
                    volume: s.v,
                });
            }
        }
        Ok((rows, truncated))
    }

    fn map_layers<R: Rng + ?Sized>(
        &self,
        length: Length,
        rng: &mut R,
        trace: impl FnOnce(TraceRows, Option<String>, Option<String>) -> Trace,
    ) -> Result<Trace> {
        let mut explorer = LayerExplorer::new(DiskSampler::new(self.volume_cap()));
        let mut rows = vec![explorer.row()];
        let mut truncated = None;
        let done = |e: &LayerExplorer<DiskSampler>| match length {
            Length::Steps(n) => e.steps() >= n,
            Length::Radius(r) => e.layer() >= r,
        };
        while !done(&explorer) {
            if guard(explorer.step(rng), &mut truncated)?.is_none() {
                break;
            }
            let n = explorer.steps();
            if n % self.opts.stride.max(1) == 0 || done(&explorer) {
                rows.push(explorer.row());
            }
        }
        let edges = explorer.map().export_edge_list();
        Ok(trace(TraceRows::Layers(rows), truncated, Some(edges)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(algorithm: Algorithm, length: Length) -> Job {
        Job {
            model: ModelId::TypeII,
            algorithm,
            length,
            perimeter: None,
            opts: RunOptions::default(),
        }
    }

    #[test]
    fn every_algorithm_runs() {
        for algorithm in [
            Algorithm::Pv,
            Algorithm::Layers,
            Algorithm::Dual,
            Algorithm::Fpp,
            Algorithm::Boltzmann,
            Algorithm::Sphere,
            Algorithm::MapLayers,
        ] {
            let t = job(algorithm, Length::Steps(50)).run(1, 0).unwrap();
            assert!(t.rows.len() >= 50, "{algorithm}");
            assert!(t.truncated.is_none());
        }
        let hull = job(Algorithm::Layers, Length::Radius(5)).run(1, 0).unwrap();
        assert_eq!(hull.rows.len(), 5);
        let map = job(Algorithm::MapLayers, Length::Radius(3))
            .run(1, 0)
            .unwrap();
        assert!(map.edge_list.is_some());
    }

    #[test]
    fn invalid_jobs_are_rejected() {
        assert!(job(Algorithm::Pv, Length::Radius(3)).validate().is_err());
        assert!(job(Algorithm::Pv, Length::Steps(0)).validate().is_err());
        let quad = Job {
            model: ModelId::Quad,
            ..job(Algorithm::Layers, Length::Steps(10))
        };
        assert!(matches!(quad.validate(), Err(Error::Domain(_))));
    }

    #[test]
    fn replicas_are_ordered_and_reproducible() {
        let j = job(Algorithm::Fpp, Length::Steps(200));
        let a = j.run_all(9, 4).unwrap();
        let b = j.run_all(9, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[2], j.run(9, 2).unwrap());
        assert_ne!(a[0].rows, a[1].rows);
    }
}
