//! Matings of cubic polynomials with cubic Newton maps.
//!
//! Three dynamical families are supported: the double basilica
//! `z(z² + 3/2)`, the cubic family `z²(z + 3a/2)` and Newton maps of
//! `(z + 1/2 − λ)(z + 1/2 + λ)(z − 1)`.

pub mod angles;
pub mod boettcher;
pub mod error;
pub mod maps;
pub mod mating;
pub mod numerics;
pub mod params;
pub mod puzzle;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
