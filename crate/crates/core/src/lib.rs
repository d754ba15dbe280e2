//! Numerical which-way gedanken experiments on a one-dimensional grid.
//!
//! Wave packets are propagated spectrally, entangled with scatterers through a
//! momentum-exchange kernel, reduced to density matrices, and measured through
//! uncertainties, fringe visibility and fringe spacing. Units have `ħ = 1`.


// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod error;
pub mod grid;
pub mod io;
pub mod measurement;
pub mod observables;
pub mod propagation;
pub mod scattering;
pub mod scenarios;
mod spectral;
pub mod state;

pub use error::{Error, Result};
pub use grid::{make_grid, Grid};
pub use io::{emit_report, parse_config, RunConfig};
pub use scenarios::{run, Scenario, ScenarioReport};
pub use state::{QuantumState, WaveFunction};

pub type C64 = num_complex::Complex64;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grids.md")]
    mod grids {}
    #[doc = include_str!("../../../book/src/propagation.md")]
    mod propagation {}
    #[doc = include_str!("../../../book/src/entanglement.md")]
    mod entanglement {}
    #[doc = include_str!("../../../book/src/fringes.md")]
    mod fringes {}
    #[doc = include_str!("../../../book/src/measurement.md")]
    mod measurement {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
}
