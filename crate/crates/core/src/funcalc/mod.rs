//! Functional calculus for sectorial operators on matrix space.

mod calculus;
mod holfn;
pub mod identities;
mod operator;
pub mod opnorm;

pub use calculus::{
    contour_calculus, contour_calculus_auto, default_thetas, eigen_calculus, EigenPrep, eigen_calculus_dense, extended_calculus,
    imaginary_power, ray_points, resolvent, scalar_map, scale_op, sector_type, semigroup, CalculusResult,
    ContourSpec, SectorProfile, ZERO_RTOL,
};
pub use holfn::{Decay, FnClass, HolFn};
pub use operator::{matrix_spectrum, Direction, LpOperator, OpKind, TowerLevel, MAX_MATERIALIZE_DIM};
