//! Exact integer arithmetic: symbols, sieves, factorization, residue densities
//! and smooth numbers.

mod crt;
mod factor;
mod lattice;
mod modular;
mod smooth;
mod symbols;

pub use crt::{crt_count, crt_count_by_prime, crt_count_enumerate, padic_density, Constraint, Rational};
pub use factor::{
    divisors, euler_phi, factorize, is_prime, mobius, next_prime, primes_up_to, radical,
    Factorization, PrimePower, SpfSieve,
};
pub use lattice::{solve_integer_system, IntSolution};
pub use modular::{inv_mod, mul_mod, pow_mod, primitive_root, valuation};
pub use smooth::{debruijn_log_estimate, smooth_count};
pub use symbols::{jacobi, kronecker};
