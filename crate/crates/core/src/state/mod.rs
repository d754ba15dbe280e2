//! Discretized quantum states: pure wavefunctions, dense density matrices and
//! which-way branch decompositions, all on a shared [`Grid`].

mod branch;
pub(crate) mod density;
mod wavefunction;

pub use branch::{Branch, BranchState};
pub use density::{density_from_branches, density_from_pure, DensityMatrix};
pub use wavefunction::{gaussian_packet, WaveFunction};

use crate::grid::Grid;

/// Tolerance on unit normalization of constructed states.
pub const NORM_TOL: f64 = 1e-12;

/// Anything that has position and momentum marginals on a grid.
///
/// Densities are per unit length (position) or per unit momentum; they sum to
/// `1/dx` and `1/dp` respectively. Momentum densities are in FFT bin order.
pub trait QuantumState {
    fn grid(&self) -> &Grid;

    /// Diagonal `ρ(x_j, x_j)`.
    fn position_density(&self) -> Vec<f64>;

    /// Diagonal of the momentum representation, `ρ(p_k, p_k)`.
    fn momentum_density(&self) -> Vec<f64>;

    /// `Tr ρ²` in the discrete measure.
    fn purity(&self) -> f64;
}
