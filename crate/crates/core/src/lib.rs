pub mod atlas;
pub mod classify;
pub mod coxeter;
pub mod disc;
pub mod disc_group;
pub mod embed;
pub mod error;
pub mod expr;
pub mod fincke;
pub mod lattice;
pub mod matrix;
pub mod niemeier;
pub mod roots;
pub mod reduce;
pub mod snf;
pub mod verify;
pub mod vinberg;

pub use error::{LatticeError, Result};
pub use expr::make_standard;
pub use lattice::{GramLattice, LatticeVector, Signature};
pub use matrix::IntMatrix;
