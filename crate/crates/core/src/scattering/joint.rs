use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scattering::reduced::kicked_columns;
use crate::scattering::ScatteringKernel;
use crate::spectral;
use crate::state::{DensityMatrix, WaveFunction};
use crate::C64;

/// Particle plus scatterer tag after the interaction, in the momentum
/// representation `Ψ(P, K)`: rows are particle momentum bins, columns tag
/// momentum bins, both in FFT order.
#[derive(Debug, Clone)]
pub struct JointState {
    electron: Grid,
    tag: Grid,
    amp: Vec<C64>,
}

impl JointState {
    pub fn electron_grid(&self) -> &Grid {
        &self.electron
    }

    pub fn tag_grid(&self) -> &Grid {
        &self.tag
    }

    /// Row-major `n_e × n_t` amplitudes.
    pub fn amplitudes(&self) -> &[C64] {
        &self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.electron.dp() * self.tag.dp()
    }

    /// Partial trace over the tag, returned in the particle's position basis.
    pub fn trace_out_tag(&self) -> Result<DensityMatrix> {
        let ne = self.electron.len();
        let nt = self.tag.len();
        let dpt = self.tag.dp();
        let columns: Vec<Vec<C64>> = (0..nt)
            .into_par_iter()
            .filter_map(|k| {
                let col: Vec<C64> = (0..ne).map(|p| self.amp[p * nt + k]).collect();
                if col.iter().all(|v| v.norm_sqr() == 0.0) {
                    None
                } else {
                    Some(spectral::to_position(&self.electron, &col))
                }
            })
            .collect();
        let mut rho = vec![C64::new(0.0, 0.0); ne * ne];
        rho.par_chunks_mut(ne).enumerate().for_each(|(j, row)| {
            for chi in &columns {
                let a = chi[j] * dpt;
                for (v, b) in row.iter_mut().zip(chi) {
                    *v += a * b.conj();
                }
            }
        });
        DensityMatrix::from_matrix(self.electron, rho)
    }
}

fn check_tag_grid(c: &ScatteringKernel, tag: &Grid, electron: &Grid) -> Result<()> {
    if !tag.same_momentum_spacing(electron) {
        return Err(Error::config(
            "tag grid must share the particle's momentum spacing",
        ));
    }
    c.check_compatible(tag)
}

/// Joint state for a plane-wave scatterer: `Ψ(P, K) = C(K) φ(P - K)` up to
/// the sign of the exchanged momentum, with the tag carrying `-δ`.
pub fn build_joint_state(
    wf: &WaveFunction,
    c: &ScatteringKernel,
    tag_grid: &Grid,
) -> Result<JointState> {
    let eg = *wf.grid();
    check_tag_grid(c, tag_grid, &eg)?;
    c.check_compatible(&eg)?;
    let ne = eg.len();
    let nt = tag_grid.len();
    let cols = kicked_columns(wf, c);
    let mut amp = vec![C64::new(0.0, 0.0); ne * nt];
    let scale = 1.0 / tag_grid.dp().sqrt();
    for (j, col) in cols.iter().enumerate() {
        let k = tag_grid.bin_of_index(-c.index(j));
        for (p, v) in col.iter().enumerate() {
            amp[p * nt + k] += v * c.spacing().sqrt() * scale;
        }
    }
    normalized(eg, *tag_grid, amp)
}

/// Joint state when the scatterer arrives as a packet `photon`:
/// `Ψ(P, K) = Σ_δ C(δ) φ(P - δ) φ_ph(K + δ) dδ`.
pub fn build_joint_state_with_photon(
    wf: &WaveFunction,
    c: &ScatteringKernel,
    photon: &WaveFunction,
) -> Result<JointState> {
    let eg = *wf.grid();
    let tg = *photon.grid();
    check_tag_grid(c, &tg, &eg)?;
    c.check_compatible(&eg)?;
    let ne = eg.len();
    let nt = tg.len();
    let cols = kicked_columns(wf, c);
    let mut amp = vec![C64::new(0.0, 0.0); ne * nt];
    for (j, col) in cols.iter().enumerate() {
        let tag_phi = photon.kicked(-c.momentum(j)).to_momentum();
        let w = c.spacing();
        amp.par_chunks_mut(nt).enumerate().for_each(|(p, row)| {
            let a = col[p] * w;
            for (v, t) in row.iter_mut().zip(&tag_phi) {
                *v += a * t;
            }
        });
    }
    normalized(eg, tg, amp)
}

fn normalized(electron: Grid, tag: Grid, mut amp: Vec<C64>) -> Result<JointState> {
    let norm = amp.iter().map(|v| v.norm_sqr()).sum::<f64>() * electron.dp() * tag.dp();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::EmptyState("joint state has zero norm".into()));
    }
    let s = 1.0 / norm.sqrt();
    amp.iter_mut().for_each(|v| *v *= s);
    Ok(JointState { electron, tag, amp })
}
