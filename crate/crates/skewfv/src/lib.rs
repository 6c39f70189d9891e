//! 2D unstructured finite-volume scalar transport with boundedness-preserving
//! corrections for mesh-skewness errors.
//!
//! The crate covers:
//! - polygonal meshes with owner/neighbour face addressing, generators for
//!   uniform, chevron-distorted, randomly distorted and triangular meshes;
//! - cell gradients (Gauss, least-squares) and point location;
//! - TVD-limited advection of the phase fraction with uncorrected, explicit
//!   and semi-implicit skewness correction (SISC);
//! - surface-normal-gradient discretisations (UC / NO / NO-NC) and the
//!   implicit modified diffusivity for interfacial species transport with a
//!   Henry-law concentration jump;
//! - a 1D finite-difference reference solution for the planar two-phase
//!   diffusion problem;
//! - case drivers, error metrics and convergence studies.

pub mod advection;
pub mod diffusion;
pub mod error;
pub mod fields;
pub mod geom;
pub mod harness;
pub mod linsys;
pub mod mesh;
pub mod oracle;
pub mod transport;

pub use error::{Error, Result};
pub use geom::Vec2;
