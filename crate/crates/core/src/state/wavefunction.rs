use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectral;
use crate::state::QuantumState;
use crate::C64;

/// Normalized complex amplitude field in the position representation.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    amp: Vec<C64>,
}

impl WaveFunction {
    /// Builds a state from raw amplitudes, normalizing so that `Σ|ψ|² dx = 1`.
    pub fn new(grid: Grid, amp: Vec<C64>) -> Result<Self> {
        if amp.len() != grid.len() {
            return Err(Error::config(format!(
                "amplitude length {} does not match grid size {}",
                amp.len(),
                grid.len()
            )));
        }
        if amp.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::config("amplitudes must be finite"));
        }
        let norm = amp.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dx();
        if norm <= 0.0 {
            return Err(Error::EmptyState("wavefunction has zero norm".into()));
        }
        let scale = norm.sqrt().recip();
        Ok(WaveFunction {
            grid,
            amp: amp.into_iter().map(|v| v * scale).collect(),
        })
    }

    /// Builds a state from momentum amplitudes in FFT bin order.
    pub fn from_momentum(grid: Grid, phi: &[C64]) -> Result<Self> {
        if phi.len() != grid.len() {
            return Err(Error::config("momentum amplitude length mismatch"));
        }
        Self::new(grid, spectral::to_position(&grid, phi))
    }

    /// Grid surrogate of a position eigenstate: one point with amplitude `1/√dx`.
    pub fn localized(grid: Grid, x: f64) -> Result<Self> {
        let j = grid
            .nearest_index(x)
            .ok_or_else(|| Error::config(format!("position {x} lies outside the grid")))?;
        let mut amp = vec![C64::new(0.0, 0.0); grid.len()];
        amp[j] = C64::new(grid.dx().sqrt().recip(), 0.0);
        Ok(WaveFunction { grid, amp })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C64] {
        &self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &WaveFunction) -> C64 {
        self.amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            * self.grid.dx()
    }

    /// Momentum amplitudes `φ(p_k)` in FFT bin order.
    pub fn to_momentum(&self) -> Vec<C64> {
        spectral::to_momentum(&self.grid, &self.amp)
    }

    /// Multiplies by `e^{i δ x}`, a rigid momentum kick of `δ`.
    pub fn kicked(&self, delta: f64) -> WaveFunction {
        let amp = self
            .amp
            .iter()
            .enumerate()
            .map(|(j, v)| v * C64::from_polar(1.0, delta * self.grid.x(j)))
            .collect();
        WaveFunction {
            grid: self.grid,
            amp,
        }
    }

    /// Restriction to the points where `keep` is true, not renormalized, with
    /// the retained probability.
    pub(crate) fn masked(&self, keep: impl Fn(f64) -> bool) -> (Vec<C64>, f64) {
        let mut kept = 0.0;
        let amp: Vec<C64> = self
            .amp
            .iter()
            .enumerate()
            .map(|(j, v)| {
                if keep(self.grid.x(j)) {
                    kept += v.norm_sqr();
                    *v
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        (amp, kept * self.grid.dx())
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, amp: Vec<C64>) -> Self {
        debug_assert_eq!(grid.len(), amp.len());
        WaveFunction { grid, amp }
    }
}

impl QuantumState for WaveFunction {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn position_density(&self) -> Vec<f64> {
        self.amp.iter().map(|v| v.norm_sqr()).collect()
    }

    fn momentum_density(&self) -> Vec<f64> {
        self.to_momentum().iter().map(|v| v.norm_sqr()).collect()
    }

    fn purity(&self) -> f64 {
        1.0
    }
}

/// Minimum-uncertainty packet `ψ(x) ∝ exp(-(x-x0)²/(4σ²) + i p0 x)`.
///
/// The width must be resolvable (`σ ≥ 4 dx`) and contained (`σ ≤ extent/8`),
/// and the momentum profile must sit well inside the lattice.
pub fn gaussian_packet(grid: &Grid, x0: f64, p0: f64, sigma_x: f64) -> Result<WaveFunction> {
    if !(sigma_x >= 4.0 * grid.dx()) {
        return Err(Error::config(format!(
            "packet width {sigma_x} is below 4 dx = {}",
            4.0 * grid.dx()
        )));
    }
    if sigma_x > grid.extent() / 8.0 {
        return Err(Error::config(format!(
            "packet width {sigma_x} exceeds extent/8 = {}",
            grid.extent() / 8.0
        )));
    }
    if x0 - 6.0 * sigma_x < grid.x_min() || x0 + 6.0 * sigma_x > grid.x_max() {
        return Err(Error::config(format!(
            "packet centre {x0} with width {sigma_x} does not fit inside the grid"
        )));
    }
    let sigma_p = 0.5 / sigma_x;
    if p0.abs() + 8.0 * sigma_p > grid.p_nyquist() {
        return Err(Error::config(format!(
            "packet momentum {p0} ± 8·{sigma_p} exceeds the lattice limit {}",
            grid.p_nyquist()
        )));
    }
    let norm = (2.0 * PI * sigma_x * sigma_x).powf(-0.25);
    let amp = grid
        .positions()
        .iter()
        .map(|&x| {
            let u = x - x0;
            C64::from_polar(norm * (-u * u / (4.0 * sigma_x * sigma_x)).exp(), p0 * x)
        })
        .collect();
    WaveFunction::new(*grid, amp)
}
