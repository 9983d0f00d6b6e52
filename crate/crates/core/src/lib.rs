//! Contention resolution schemes for L-bounded products.
//!
//! The crate covers exact-selection online contention resolution (exact and
//! Monte Carlo), random-order schemes, guarantee calculators, adversarial
//! instances built from finite affine planes, brute-force oracles, and the
//! reduction from revenue management with substitutable actions.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod guarantees;
pub mod lp;
pub mod model;
pub mod ocrs;
pub mod oracles;
pub mod rcrs;
pub mod reduction;
pub mod rng;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use model::{Instance, InstanceBuilder, Item, Product};
