//! Certified operator inequalities for Hermitian matrices.

pub mod cdj;
pub mod error;
pub mod entropy;
pub mod funcspec;
pub mod harness;
pub mod kantorovich;
pub mod loewner;
pub mod matrix;
pub mod phimap;
pub mod random;
pub mod sandwich;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::{CMatrix, HermitianMatrix};
