//! Unitary transforms between the position and momentum representations.
//!
//! Conventions: `φ(p_k) = dx/√(2π) Σ_j ψ(x_j) e^{-i p_k x_j}`, so that
//! `Σ |φ|² dp = Σ |ψ|² dx`. Momentum arrays are kept in FFT bin order.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;
use crate::C64;

/// Forward/inverse FFT plans for one grid size.
#[derive(Clone)]
pub(crate) struct Transforms {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Transforms {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Transforms {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Raw (unscaled) forward DFT in place.
    pub(crate) fn forward(&self, buf: &mut [C64]) {
        self.forward.process(buf);
    }

    /// Raw (unscaled) inverse DFT in place.
    pub(crate) fn inverse(&self, buf: &mut [C64]) {
        self.inverse.process(buf);
    }
}

/// Position amplitudes to momentum amplitudes on the conjugate lattice.
pub(crate) fn to_momentum(grid: &Grid, psi: &[C64]) -> Vec<C64> {
    let mut buf = psi.to_vec();
    Transforms::new(grid.len()).forward(&mut buf);
    let scale = grid.dx() / (2.0 * PI).sqrt();
    let x0 = grid.x_min();
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= C64::from_polar(scale, -grid.p(k) * x0);
    }
    buf
}

/// Inverse of [`to_momentum`].
pub(crate) fn to_position(grid: &Grid, phi: &[C64]) -> Vec<C64> {
    let scale = (2.0 * PI).sqrt() / (grid.dx() * grid.len() as f64);
    let x0 = grid.x_min();
    let mut buf: Vec<C64> = phi
        .iter()
        .enumerate()
        .map(|(k, v)| v * C64::from_polar(scale, grid.p(k) * x0))
        .collect();
    Transforms::new(grid.len()).inverse(&mut buf);
    buf
}
