//! Exact computations for Hecke pairs and Bost–Connes type systems over Q
//! and quadratic fields.

// index loops read better than zipped iterators over parallel tables
#![allow(clippy::needless_range_loop)]

pub mod arith;
pub mod class_group;
pub mod error;
pub mod hecke;
pub mod ideal;
pub mod induction;
pub mod kms;
pub mod parse;
pub mod precision;
pub mod quad_field;
pub mod zeta;

pub use class_group::{ClassGroup, ClassKind};
pub use error::{Error, Result};
pub use hecke::{AffineElement, DoubleCosetDecomposition, HeckeFunction};
pub use ideal::{Ideal, PrimeIdeal, SplitKind};
pub use induction::{BalancedProduct, FiniteAction, FiniteGroup};
pub use precision::Beta;
pub use quad_field::{FieldElement, QuadField, UnitInfo};
