//! Spectral toolkit for Littlewood–Paley analysis, homogeneous Besov norms
//! and the Navier–Stokes–Poisson–Nernst–Planck system on a periodic box.

pub mod besov;
pub mod error;
pub mod harness;
pub mod heat;
pub mod numeric;
pub mod paraproduct;
pub mod quadrature;
pub mod littlewood_paley;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
