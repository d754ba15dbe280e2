use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::C64;

/// Shipped shapes of the momentum-exchange amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KernelSpec {
    /// No momentum exchange; the tag carries no which-way information.
    Identity,
    /// `|C|²` a zero-mean Gaussian of standard deviation `s`.
    Gaussian { s: f64 },
    /// `|C|²` uniform over the lens acceptance window of width `4π sin ε / λ`.
    LensAperture { lambda: f64, epsilon: f64 },
}

/// Total momentum window accepted by a lens of half-angle `epsilon` for light
/// of wavelength `lambda`: `2 h sin ε / λ` with `h = 2π`.
pub fn lens_window_width(lambda: f64, epsilon: f64) -> f64 {
    4.0 * PI * epsilon.sin() / lambda
}

/// Gaussian kernel width whose tag overlap at separation `a` equals `target`,
/// from `|D(a)| = exp(-s² a² / 2)`.
pub fn gaussian_width_for_overlap(target: f64, a: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) || !(a > 0.0) {
        return Err(Error::config(format!(
            "a Gaussian kernel reaches overlaps in (0, 1) only (target {target}, separation {a})"
        )));
    }
    Ok((-2.0 * target.ln()).sqrt() / a)
}

/// Momentum-exchange amplitudes `C(δp_j)` on the lattice `δp_j = (first + j) dp`,
/// normalized so that `Σ |C_j|² dp = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringKernel {
    spacing: f64,
    first_index: i64,
    amp: Vec<C64>,
}

impl ScatteringKernel {
    /// Kernel from user-supplied amplitudes; rescaled to unit L² norm.
    pub fn from_amplitudes(spacing: f64, first_index: i64, amp: Vec<C64>) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::config("kernel lattice spacing must be positive"));
        }
        let norm = amp.iter().map(|v| v.norm_sqr()).sum::<f64>() * spacing;
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::EmptyState("scattering kernel has zero norm".into()));
        }
        let scale = norm.sqrt().recip();
        Ok(ScatteringKernel {
            spacing,
            first_index,
            amp: amp.into_iter().map(|v| v * scale).collect(),
        })
    }

    fn from_weights(spacing: f64, first_index: i64, weights: &[f64]) -> Result<Self> {
        let amp = weights.iter().map(|w| C64::new(w.sqrt(), 0.0)).collect();
        Self::from_amplitudes(spacing, first_index, amp)
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.amp.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.amp.is_empty()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C64] {
        &self.amp
    }

    /// Integer lattice index of entry `j`.
    #[inline]
    pub fn index(&self, j: usize) -> i64 {
        self.first_index + j as i64
    }

    #[inline]
    pub fn momentum(&self, j: usize) -> f64 {
        self.index(j) as f64 * self.spacing
    }

    /// Probability of each exchange, `|C_j|² dp`; sums to one.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amp.iter().map(|v| v.norm_sqr() * self.spacing).collect()
    }

    /// `(mean, variance)` of the exchanged momentum.
    pub fn moments(&self) -> (f64, f64) {
        let w = self.probabilities();
        let mean: f64 = w.iter().enumerate().map(|(j, w)| w * self.momentum(j)).sum();
        let var: f64 = w
            .iter()
            .enumerate()
            .map(|(j, w)| {
                let d = self.momentum(j) - mean;
                w * d * d
            })
            .sum();
        (mean, var)
    }

    pub fn variance(&self) -> f64 {
        self.moments().1
    }

    /// Largest `|δp|` carried by the kernel.
    pub fn max_abs_momentum(&self) -> f64 {
        (0..self.len())
            .map(|j| self.momentum(j).abs())
            .fold(0.0, f64::max)
    }

    /// Tag overlap `D(ξ) = Σ_j |C_j|² e^{i δp_j ξ} dp` by direct quadrature.
    pub fn overlap_at(&self, xi: f64) -> C64 {
        self.probabilities()
            .iter()
            .enumerate()
            .map(|(j, w)| C64::from_polar(*w, self.momentum(j) * xi))
            .sum()
    }

    /// Checks that the kernel lives on the momentum lattice of `grid` and fits
    /// inside it.
    pub fn check_compatible(&self, grid: &Grid) -> Result<()> {
        if (self.spacing - grid.dp()).abs() > 1e-12 * grid.dp() {
            return Err(Error::config(format!(
                "kernel lattice spacing {} does not match the grid momentum spacing {}",
                self.spacing,
                grid.dp()
            )));
        }
        let half = grid.len() as i64 / 2;
        if self.first_index <= -half || self.index(self.len() - 1) >= half {
            return Err(Error::config(
                "kernel support exceeds the grid momentum lattice",
            ));
        }
        Ok(())
    }
}

/// Builds a preset kernel on the momentum lattice of `grid`.
pub fn kernel_preset(spec: &KernelSpec, grid: &Grid) -> Result<ScatteringKernel> {
    let dp = grid.dp();
    let half = grid.len() as i64 / 2;
    match *spec {
        KernelSpec::Identity => ScatteringKernel::from_weights(dp, 0, &[1.0]),
        KernelSpec::Gaussian { s } => {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::config(format!("Gaussian kernel width must be > 0 (got {s})")));
            }
            if s < 2.0 * dp {
                return Err(Error::config(format!(
                    "Gaussian kernel width {s} is below twice the momentum spacing {dp}"
                )));
            }
            let m = (10.0 * s / dp).ceil() as i64;
            if m >= half {
                return Err(Error::config(format!(
                    "Gaussian kernel width {s} does not fit the momentum lattice (|p| < {})",
                    grid.p_nyquist()
                )));
            }
            let weights: Vec<f64> = (-m..=m)
                .map(|q| {
                    let d = q as f64 * dp;
                    (-d * d / (2.0 * s * s)).exp()
                })
                .collect();
            ScatteringKernel::from_weights(dp, -m, &weights)
        }
        KernelSpec::LensAperture { lambda, epsilon } => {
            if !(lambda > 0.0) || !lambda.is_finite() {
                return Err(Error::config(format!("wavelength must be > 0 (got {lambda})")));
            }
            if !(epsilon > 0.0 && epsilon < PI / 2.0) {
                return Err(Error::config(format!(
                    "lens half-angle must lie in (0, π/2) (got {epsilon})"
                )));
            }
            let width = lens_window_width(lambda, epsilon);
            if width < 4.0 * dp {
                return Err(Error::config(format!(
                    "lens window {width} is narrower than 4 momentum cells ({})",
                    4.0 * dp
                )));
            }
            // each lattice point carries the fraction of its cell inside the window
            let edge = width / (2.0 * dp);
            let m = (edge + 0.5).ceil() as i64 - 1;
            if m >= half {
                return Err(Error::config(format!(
                    "lens window {width} does not fit the momentum lattice (|p| < {})",
                    grid.p_nyquist()
                )));
            }
            let weights: Vec<f64> = (-m..=m)
                .map(|q| {
                    let lo = (q as f64 - 0.5).max(-edge);
                    let hi = (q as f64 + 0.5).min(edge);
                    (hi - lo).max(0.0)
                })
                .collect();
            ScatteringKernel::from_weights(dp, -m, &weights)
        }
    }
}

/// `D(ξ)` sampled on a set of separations.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceKernel {
    xi: Vec<f64>,
    d: Vec<C64>,
}

impl DecoherenceKernel {
    pub fn separations(&self) -> &[f64] {
        &self.xi
    }

    pub fn values(&self) -> &[C64] {
        &self.d
    }

    /// `|D| ≤ 1`, `D(0) = 1`, and `D(-ξ) = D(ξ)*` wherever both signs are sampled.
    pub fn check_invariants(&self) -> Result<()> {
        const TOL: f64 = 1e-10;
        for (x, d) in self.xi.iter().zip(&self.d) {
            if d.norm() > 1.0 + TOL {
                return Err(Error::InvariantViolation(format!("|D({x})| = {} > 1", d.norm())));
            }
            if *x == 0.0 && (d - C64::new(1.0, 0.0)).norm() > TOL {
                return Err(Error::InvariantViolation(format!("D(0) = {d}")));
            }
            if let Some(i) = self.xi.iter().position(|y| *y == -*x) {
                if (self.d[i] - d.conj()).norm() > TOL {
                    return Err(Error::InvariantViolation(format!(
                        "D(-{x}) is not the conjugate of D({x})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Tag overlaps `D(ξ)` at the given separations, by quadrature over `|C|²`.
pub fn decoherence_kernel(c: &ScatteringKernel, xi_grid: &[f64]) -> DecoherenceKernel {
    DecoherenceKernel {
        xi: xi_grid.to_vec(),
        d: xi_grid.iter().map(|&x| c.overlap_at(x)).collect(),
    }
}
