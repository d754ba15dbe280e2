use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectral::Transforms;
use crate::state::{BranchState, QuantumState, WaveFunction};
use crate::C64;

/// Tolerances of the density-matrix invariants.
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-8;

/// Dense density matrix `ρ(x_j, x_k)` over a grid, stored row-major.
///
/// The discrete trace is `Σ_j ρ_jj dx = 1`; as an operator on grid functions
/// the matrix acts as `(ρf)_j = Σ_k ρ_jk f_k dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    grid: Grid,
    rho: Vec<C64>,
}

impl DensityMatrix {
    /// Wraps a raw matrix after checking Hermiticity and rescaling to unit trace.
    pub fn from_matrix(grid: Grid, rho: Vec<C64>) -> Result<Self> {
        let n = grid.len();
        if rho.len() != n * n {
            return Err(Error::config(format!(
                "density matrix has {} entries, expected {}",
                rho.len(),
                n * n
            )));
        }
        let mut dm = DensityMatrix { grid, rho };
        let herm = dm.hermiticity_error();
        let scale = dm.rho.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        if herm > HERMITIAN_TOL * scale {
            return Err(Error::InvariantViolation(format!(
                "matrix is not Hermitian (max deviation {herm:e})"
            )));
        }
        let tr = dm.trace();
        if !(tr > 0.0) {
            return Err(Error::EmptyState("density matrix has non-positive trace".into()));
        }
        dm.rho.iter_mut().for_each(|v| *v /= tr);
        Ok(dm)
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, rho: Vec<C64>) -> Self {
        debug_assert_eq!(rho.len(), grid.len() * grid.len());
        DensityMatrix { grid, rho }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.rho[j * self.dim() + k]
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.rho
    }

    pub fn row(&self, j: usize) -> &[C64] {
        let n = self.dim();
        &self.rho[j * n..(j + 1) * n]
    }

    pub(crate) fn into_parts(self) -> (Grid, Vec<C64>) {
        (self.grid, self.rho)
    }

    /// `Σ_j ρ_jj dx`; the imaginary part is dropped.
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|j| self.get(j, j).re).sum::<f64>() * self.grid.dx()
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .into_par_iter()
            .map(|j| {
                (j..n)
                    .map(|k| (self.get(j, k) - self.get(k, j).conj()).norm())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `Σ_{j≠k} |ρ_jk| dx`: total magnitude of the position coherences,
    /// measured in the same units as the trace.
    pub fn coherence_norm(&self) -> f64 {
        let n = self.dim();
        let total: f64 = (0..n)
            .into_par_iter()
            .map(|j| {
                self.row(j)
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, v)| v.norm())
                    .sum::<f64>()
            })
            .collect::<Vec<_>>()
            .iter()
            .sum();
        total * self.grid.dx()
    }

    /// Eigenvalues of `ρ dx` (which sum to the trace), ascending.
    ///
    /// Dense diagonalization; intended for grids of a few hundred points.
    pub fn spectrum(&self) -> Vec<f64> {
        let n = self.dim();
        let dx = self.grid.dx();
        let m = DMatrix::from_fn(n, n, |j, k| self.get(j, k) * dx);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Smallest eigenvalue of `ρ dx`.
    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum().first().copied().unwrap_or(0.0)
    }

    /// Checks Hermiticity, unit trace and purity bound; positivity too when
    /// `check_psd` is set (costly, dense eigensolve).
    pub fn check_invariants(&self, check_psd: bool) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvariantViolation(format!(
                "Hermiticity deviation {herm:e}"
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvariantViolation(format!("trace {tr}")));
        }
        let purity = self.purity();
        if purity > 1.0 + PSD_TOL {
            return Err(Error::InvariantViolation(format!("purity {purity} > 1")));
        }
        if check_psd {
            let min = self.min_eigenvalue();
            if min < -PSD_TOL {
                return Err(Error::InvariantViolation(format!(
                    "negative eigenvalue {min:e}"
                )));
            }
        }
        Ok(())
    }

    /// Full momentum representation `ρ(p_k, p_l)` (FFT bin order), via a
    /// transform along both indices.
    pub fn to_momentum_matrix(&self) -> Vec<C64> {
        let n = self.dim();
        let g = self.grid;
        let scale = g.dx() * g.dx() / (2.0 * PI);
        let fft = Transforms::new(n);
        let phase: Vec<C64> = (0..n)
            .map(|k| C64::from_polar(1.0, -g.p(k) * g.x_min()))
            .collect();
        // column index: Σ_l ρ_jl e^{+i p' x_l}, then row index: Σ_j e^{-i p x_j} (...)
        let mut m = self.rho.clone();
        m.par_chunks_mut(n).for_each(|row| {
            fft.inverse(row);
        });
        let mut t = transpose(&m, n);
        t.par_chunks_mut(n).for_each(|col| fft.forward(col));
        let mut out = transpose(&t, n);
        out.par_chunks_mut(n).enumerate().for_each(|(k, row)| {
            for (l, v) in row.iter_mut().enumerate() {
                *v *= phase[k] * phase[l].conj() * scale;
            }
        });
        out
    }
}

pub(crate) fn transpose(m: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    const B: usize = 32;
    for jb in (0..n).step_by(B) {
        for kb in (0..n).step_by(B) {
            for j in jb..(jb + B).min(n) {
                for k in kb..(kb + B).min(n) {
                    out[k * n + j] = m[j * n + k];
                }
            }
        }
    }
    out
}

impl QuantumState for DensityMatrix {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn position_density(&self) -> Vec<f64> {
        (0..self.dim()).map(|j| self.get(j, j).re).collect()
    }

    /// Diagonal of the doubly transformed matrix. On the periodic lattice
    /// `e^{-ip_k(x_j - x_l)}` depends only on `(j - l) mod n`, so the diagonal
    /// is one FFT of the wrapped-diagonal sums, O(n²) instead of O(n² log n).
    fn momentum_density(&self) -> Vec<f64> {
        let n = self.dim();
        let mut wrapped: Vec<C64> = (0..n)
            .into_par_iter()
            .map(|m| (0..n).map(|j| self.get(j, (j + n - m) % n)).sum::<C64>())
            .collect();
        Transforms::new(n).forward(&mut wrapped);
        let scale = self.grid.dx() * self.grid.dx() / (2.0 * PI);
        wrapped.iter().map(|v| v.re * scale).collect()
    }

    fn purity(&self) -> f64 {
        let dx = self.grid.dx();
        let n = self.dim();
        let rows: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|j| self.row(j).iter().map(|v| v.norm_sqr()).sum::<f64>())
            .collect();
        rows.iter().sum::<f64>() * dx * dx
    }
}

/// Projector `ρ(x, x') = ψ(x) ψ*(x')`.
pub fn density_from_pure(wf: &WaveFunction) -> DensityMatrix {
    let g = *wf.grid();
    let n = g.len();
    let psi = wf.amplitudes();
    let mut rho = vec![C64::new(0.0, 0.0); n * n];
    rho.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        for (k, v) in row.iter_mut().enumerate() {
            *v = psi[j] * psi[k].conj();
        }
    });
    DensityMatrix::from_parts_unchecked(g, rho)
}

/// `ρ(x,x') = Σ_jk c_j c_k* G_jk ψ_j(x) ψ_k*(x')`, renormalized to unit trace.
pub fn density_from_branches(bs: &BranchState) -> Result<DensityMatrix> {
    let g = *bs.grid();
    let n = g.len();
    let coef = bs.coefficient_matrix();
    let k = bs.len();
    let waves: Vec<&[C64]> = bs.branches().iter().map(|b| b.wave.amplitudes()).collect();
    let mut rho = vec![C64::new(0.0, 0.0); n * n];
    rho.par_chunks_mut(n).enumerate().for_each(|(x, row)| {
        // a_k(x) = Σ_j A_jk ψ_j(x)
        let a: Vec<C64> = (0..k)
            .map(|kk| (0..k).map(|jj| coef[jj * k + kk] * waves[jj][x]).sum())
            .collect();
        for (xp, v) in row.iter_mut().enumerate() {
            *v = (0..k).map(|kk| a[kk] * waves[kk][xp].conj()).sum();
        }
    });
    DensityMatrix::from_matrix(g, rho)
}
