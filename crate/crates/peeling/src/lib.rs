//! Peeling explorations of infinite random planar maps.

pub mod boltzmann;
pub mod chains;
pub mod enumeration;
pub mod error;
pub mod kernel;
pub mod limits;
pub mod mapbuild;
pub mod runner;
pub mod verify;

pub use enumeration::{ExactScalar, ModelId};
pub use error::{Error, Result};

/// Guide chapters, compiled as doctests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/chains.md")]
    mod chains {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
