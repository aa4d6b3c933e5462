//! Local factors, densities, the archimedean integral and the main-term assembler.

mod arch;
mod average;
mod charfactor;
mod main_term;
pub mod padic;

pub use arch::{arch_integral, ArchIntegral, QuadParams};
pub use average::{
    euler_factor, local_average, local_average_refine, local_average_tree, omega_l, omega_l_enumerate, DualAverage,
    LocalAverage,
};
pub use charfactor::{char_factor, char_factor_enumerate, density_r, density_rad, CharFactor};
pub use main_term::{main_term, singular_series, twisted, ATerm, ErrorBudget, MainTermParams, MainTermReport, RunParams, SingularSeries};
pub use padic::LocalSystem;

use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LocalParams {
    pub tol: f64,
    /// depth cap on valuation vectors in the tree sum
    pub nu_max: u32,
    /// level cap for residue-class refinement
    pub m_max: u32,
    pub node_cap: usize,
}

impl Default for LocalParams {
    fn default() -> Self {
        LocalParams { tol: 1e-10, nu_max: 400, m_max: 80, node_cap: 4_000_000 }
    }
}
