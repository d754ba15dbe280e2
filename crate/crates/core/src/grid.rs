use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest lattice the library accepts.
pub const MIN_POINTS: usize = 16;

/// Uniform periodic 1-D lattice `x_j = x_min + j dx`, `j = 0..n`, together
/// with its conjugate momentum lattice of spacing `dp = 2π / (n dx)`.
///
/// The point `x_max` itself is not part of the lattice; it is identified with
/// `x_min` by periodicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::config(format!(
                "grid extent must satisfy x_max > x_min (got [{x_min}, {x_max}])"
            )));
        }
        if !n_points.is_power_of_two() {
            return Err(Error::config(format!(
                "n_points must be a power of two (got {n_points})"
            )));
        }
        if n_points < MIN_POINTS {
            return Err(Error::config(format!(
                "n_points must be at least {MIN_POINTS} (got {n_points})"
            )));
        }
        Ok(Grid {
            x_min,
            x_max,
            n_points,
        })
    }

    #[inline]
    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    #[inline]
    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_points
    }

    /// Always false; a grid has at least [`MIN_POINTS`] points.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn extent(&self) -> f64 {
        self.x_max - self.x_min
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.extent() / self.n_points as f64
    }

    #[inline]
    pub fn dp(&self) -> f64 {
        2.0 * PI / self.extent()
    }

    /// Largest representable momentum magnitude, `π / dx`.
    #[inline]
    pub fn p_nyquist(&self) -> f64 {
        PI / self.dx()
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Signed lattice index of FFT bin `k`: `k` for the lower half, `k - n` above.
    #[inline]
    pub fn momentum_index(&self, k: usize) -> i64 {
        let n = self.n_points as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Momentum of FFT bin `k`.
    #[inline]
    pub fn p(&self, k: usize) -> f64 {
        self.momentum_index(k) as f64 * self.dp()
    }

    /// Momenta in FFT bin order.
    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.p(k)).collect()
    }

    /// FFT bin holding the lattice momentum `m dp` (taken modulo the lattice).
    #[inline]
    pub fn bin_of_index(&self, m: i64) -> usize {
        m.rem_euclid(self.n_points as i64) as usize
    }

    /// Index of the grid point nearest to `x`, if `x` lies on the lattice span.
    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        let j = ((x - self.x_min) / self.dx()).round();
        if j < 0.0 || j >= self.n_points as f64 {
            None
        } else {
            Some(j as usize)
        }
    }

    /// Whether the momentum lattice of `other` has the same spacing as ours.
    pub fn same_momentum_spacing(&self, other: &Grid) -> bool {
        (self.dp() - other.dp()).abs() <= 1e-12 * self.dp()
    }
}

/// Shorthand for [`Grid::new`].
pub fn make_grid(x_min: f64, x_max: f64, n_points: usize) -> Result<Grid> {
    Grid::new(x_min, x_max, n_points)
}
