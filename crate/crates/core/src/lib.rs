//! Centro-affine curves, their Hill potentials, and Bäcklund transformations
//! of the KdV equation, computed on uniform periodic grids.

pub mod backlund;
pub mod curve;
pub mod error;
pub mod invariants;
pub mod io;
pub mod kdv;
pub mod linalg;
pub mod monodromy;
pub mod periodic;
pub mod selfcheck;

pub use backlund::{
    apply_tc, permutability_square, BacklundParam, BacklundResult, BianchiSquare, ParamKind,
};
pub use curve::{
    curvature, lift, project, CentroAffineCurve, HillPotential, ProjectiveCurve, TangentVector,
};
pub use error::{Error, Result};
pub use monodromy::{Branch, MonodromyMatrix};
pub use periodic::{Parity, PeriodicFn};
