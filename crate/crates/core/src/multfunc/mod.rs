//! 1-bounded multiplicative functions, Dirichlet characters, archimedean
//! twists and pretentious distances.

mod character;
mod distance;
mod func;

pub use character::{CharBackend, DirichletChar};
pub use distance::{additive_moments, distance, distance_sq, distance_star, min_distance, MinDistance};
pub use func::{from_registry, MultFunc, TwistedFunc};

pub type C64 = num_complex::Complex64;
