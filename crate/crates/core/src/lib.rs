//! Inexact-oracle first-order methods and primal-dual methods, with a small benchmark harness.

pub mod ardd;
pub mod barycenter;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod oracles;
pub mod games;
pub mod harness;
pub mod pagerank;
pub mod pg;
pub mod ot;
pub mod primal_dual;
pub mod prox;
pub mod rng;
pub mod scalar;
pub mod sigm;
pub mod trace;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Vector = Vec<f64>;
pub type Vector32 = Vec<f32>;
pub type Matrix = linalg::Mat<f64>;
pub type Matrix32 = linalg::Mat<f32>;
