//! Cauchy transforms and explicit ∂̄ solves on products of planar domains.
//!
//! The library evaluates the boundary Cauchy integral `S_j` and the solid
//! Cauchy transform `T_j` slice by slice on a product `D_1 × D_2` (a third
//! slice is supported for one experiment), assembles the solution operator
//! `T f = T_1 f_1 + T_2 S_1 f_2` for ∂̄-closed (0,1) data, and instruments
//! everything with sampled Hölder semi-norms. Two classical counterexample
//! scans (a Kerzman–Stein datum and a Tumanov-style three-variable datum)
//! ship as reproducible experiments behind the CLI.

pub mod cauchy;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod field;
pub mod geometry;
pub mod holder;
pub mod numeric;
pub mod quadtree;
pub mod solver;
pub mod verify;

pub use cauchy::{boundary_cauchy, compose_ts, solid_cauchy, t_one, OperatorKind, QuadratureConfig};
pub use error::{Error, Result};
pub use field::{ClosureField, FieldFunction, Wirtinger};
pub use geometry::{BoundaryCurve, Orientation, PlanarDomain, ProductDomain};
pub use holder::{HolderReport, PairScheme, PairSet};


pub type Complex = num_complex::Complex64;
