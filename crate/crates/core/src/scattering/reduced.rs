use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::propagation::{Aperture, ApertureKind};
use crate::scattering::ScatteringKernel;
use crate::spectral::{self, Transforms};
use crate::state::{Branch, BranchState, DensityMatrix, QuantumState, WaveFunction};
use crate::C64;

/// `D` at every lattice lag: entry `m` holds `D(m dx)` for `m` taken modulo `n`.
///
/// The kernel sits on the grid's momentum lattice, so
/// `D(m dx) = Σ_q |C_q|² dp e^{2πi q m / n}` is one inverse DFT.
pub fn lag_profile(c: &ScatteringKernel, grid: &Grid) -> Result<Vec<C64>> {
    c.check_compatible(grid)?;
    let mut buf = vec![C64::new(0.0, 0.0); grid.len()];
    for (j, w) in c.probabilities().iter().enumerate() {
        buf[grid.bin_of_index(c.index(j))] += *w;
    }
    Transforms::new(grid.len()).inverse(&mut buf);
    Ok(buf)
}

/// Particle state right after an instantaneous scattering, kept as the
/// pre-scattering wavefunction plus the kernel.
///
/// Its marginals are exact and cost O(n · kernel) or O(n log n), so large
/// grids never need the dense matrix; [`scatter_reduced`] builds that matrix
/// when it is wanted.
#[derive(Debug, Clone)]
pub struct ScatteredState {
    wave: WaveFunction,
    kernel: ScatteringKernel,
    lag: Vec<C64>,
}

impl ScatteredState {
    pub fn wave(&self) -> &WaveFunction {
        &self.wave
    }

    pub fn kernel(&self) -> &ScatteringKernel {
        &self.kernel
    }

    /// `D(m dx)` per lattice lag.
    pub fn lags(&self) -> &[C64] {
        &self.lag
    }
}

/// Wraps `wf` and `c` into a [`ScatteredState`].
pub fn scatter(wf: &WaveFunction, c: &ScatteringKernel) -> Result<ScatteredState> {
    let lag = lag_profile(c, wf.grid())?;
    Ok(ScatteredState {
        wave: wf.clone(),
        kernel: c.clone(),
        lag,
    })
}

impl QuantumState for ScatteredState {
    fn grid(&self) -> &Grid {
        self.wave.grid()
    }

    fn position_density(&self) -> Vec<f64> {
        let d0 = self.lag[0].re;
        self.wave
            .amplitudes()
            .iter()
            .map(|v| v.norm_sqr() * d0)
            .collect()
    }

    /// `Σ_q |C_q|² dp · |φ(p - δp_q)|²`, a circular convolution on the lattice.
    fn momentum_density(&self) -> Vec<f64> {
        let g = self.wave.grid();
        let n = g.len();
        let base = self.wave.momentum_density();
        let w = self.kernel.probabilities();
        (0..n)
            .map(|k| {
                w.iter()
                    .enumerate()
                    .map(|(j, wj)| {
                        let src = (k as i64 - self.kernel.index(j)).rem_euclid(n as i64) as usize;
                        wj * base[src]
                    })
                    .sum()
            })
            .collect()
    }

    /// `Σ_m |D_m|² R_m dx²` with `R` the circular autocorrelation of `|ψ|²`.
    fn purity(&self) -> f64 {
        let g = self.wave.grid();
        let n = g.len();
        let fft = Transforms::new(n);
        let mut dens: Vec<C64> = self
            .wave
            .amplitudes()
            .iter()
            .map(|v| C64::new(v.norm_sqr(), 0.0))
            .collect();
        fft.forward(&mut dens);
        let mut auto: Vec<C64> = dens.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect();
        fft.inverse(&mut auto);
        let inv_n = 1.0 / n as f64;
        let sum: f64 = auto
            .iter()
            .zip(&self.lag)
            .map(|(r, d)| r.re * inv_n * d.norm_sqr())
            .sum();
        sum * g.dx() * g.dx()
    }
}

/// Reduced particle state `ρ(x,x') = ψ(x) ψ*(x') D(x - x')` as a dense matrix.
pub fn scatter_reduced(wf: &WaveFunction, c: &ScatteringKernel) -> Result<DensityMatrix> {
    let g = *wf.grid();
    let n = g.len();
    let lag = lag_profile(c, &g)?;
    let psi = wf.amplitudes();
    let mut rho = vec![C64::new(0.0, 0.0); n * n];
    rho.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        for (l, v) in row.iter_mut().enumerate() {
            *v = psi[j] * psi[l].conj() * lag[(j + n - l) % n];
        }
    });
    Ok(DensityMatrix::from_parts_unchecked(g, rho))
}

/// `C̃(ξ) = Σ_q C_q e^{i δp_q ξ} dp` at every lattice lag (modulo `n`).
fn amplitude_lag_profile(c: &ScatteringKernel, grid: &Grid) -> Result<Vec<C64>> {
    c.check_compatible(grid)?;
    let mut buf = vec![C64::new(0.0, 0.0); grid.len()];
    for (j, a) in c.amplitudes().iter().enumerate() {
        buf[grid.bin_of_index(c.index(j))] += a * c.spacing();
    }
    Transforms::new(grid.len()).inverse(&mut buf);
    Ok(buf)
}

/// Reduced state when the incident photon is itself a wave packet.
///
/// In position space the joint amplitude is `ψ(x) ψ_ph(r) C̃(x - r)`, so
/// `ρ(x,x') = ψ(x) ψ*(x') Σ_r |ψ_ph(r)|² C̃(x-r) C̃*(x'-r) dr`, renormalized.
/// For a plane-wave photon this reduces to [`scatter_reduced`]. Dense O(n³);
/// meant for small grids.
pub fn scatter_reduced_with_photon(
    wf: &WaveFunction,
    c: &ScatteringKernel,
    photon: &WaveFunction,
) -> Result<DensityMatrix> {
    let g = *wf.grid();
    if photon.grid() != &g {
        return Err(Error::config("photon and particle must share one grid"));
    }
    let n = g.len();
    let ct = amplitude_lag_profile(c, &g)?;
    let pd = photon.position_density();
    let psi = wf.amplitudes();
    // M[x][r] = C̃(x - r) √(|ψ_ph(r)|² dr)
    let m: Vec<C64> = (0..n * n)
        .map(|i| {
            let (x, r) = (i / n, i % n);
            ct[(x + n - r) % n] * (pd[r] * g.dx()).sqrt()
        })
        .collect();
    let mut rho = vec![C64::new(0.0, 0.0); n * n];
    rho.par_chunks_mut(n).enumerate().for_each(|(x, row)| {
        let mx = &m[x * n..(x + 1) * n];
        for (xp, v) in row.iter_mut().enumerate() {
            let mxp = &m[xp * n..(xp + 1) * n];
            let s: C64 = mx.iter().zip(mxp).map(|(a, b)| a * b.conj()).sum();
            *v = psi[x] * psi[xp].conj() * s;
        }
    });
    DensityMatrix::from_matrix(g, rho)
}

/// Splits a post-aperture state into one branch per slit, tagged by the
/// scatterer state of that slit.
///
/// Branch `j` is the restriction of `wf` to slit `j`, renormalized, with weight
/// `√P_j`. Tags of slits centred at `r_j`, `r_k` overlap as `G_jk = D(r_j - r_k)`,
/// evaluated at the slit centres.
pub fn entangle_at_slits(
    wf_post_aperture: &WaveFunction,
    ap: &Aperture,
    c: &ScatteringKernel,
) -> Result<BranchState> {
    let g = *wf_post_aperture.grid();
    ap.validate_on(&g)?;
    let centers = ap.slit_centers();
    let mut branches = Vec::with_capacity(centers.len());
    let mut kept_centers = Vec::with_capacity(centers.len());
    for &rc in &centers {
        let (amp, prob) = wf_post_aperture.masked(|x| ap.in_slit(rc, x, &g));
        if prob > 0.0 {
            branches.push(Branch {
                wave: WaveFunction::new(g, amp)?,
                weight: C64::new(prob.sqrt(), 0.0),
            });
            kept_centers.push(rc);
        }
    }
    if branches.is_empty() {
        return Err(Error::EmptyState(
            "wavefunction has no support on the slits".into(),
        ));
    }
    if ap.kind == ApertureKind::Single {
        debug_assert_eq!(branches.len(), 1);
    }
    let k = branches.len();
    let mut gram = vec![C64::new(0.0, 0.0); k * k];
    for j in 0..k {
        for l in 0..k {
            gram[j * k + l] = if j == l {
                C64::new(1.0, 0.0)
            } else {
                c.overlap_at(kept_centers[j] - kept_centers[l])
            };
        }
    }
    BranchState::new(branches, gram)
}

/// Momentum amplitudes of `ψ e^{iδx}` for every exchange of the kernel,
/// each scaled by `C(δ)`. Shared by the joint-state oracles.
pub(crate) fn kicked_columns(wf: &WaveFunction, c: &ScatteringKernel) -> Vec<Vec<C64>> {
    (0..c.len())
        .map(|j| {
            let kicked = wf.kicked(c.momentum(j));
            let amp = c.amplitudes()[j];
            spectral::to_momentum(wf.grid(), kicked.amplitudes())
                .into_iter()
                .map(|v| v * amp)
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::observables::{momentum_moments, position_moments};
    use crate::scattering::{kernel_preset, KernelSpec};
    use crate::state::{density_from_pure, gaussian_packet};

    #[test]
    fn identity_kernel_leaves_the_state_pure() {
        let g = Grid::new(-10.0, 10.0, 128).unwrap();
        let wf = gaussian_packet(&g, 0.3, 1.0, 1.0).unwrap();
        let k = kernel_preset(&KernelSpec::Identity, &g).unwrap();
        let rho = scatter_reduced(&wf, &k).unwrap();
        let pure = density_from_pure(&wf);
        for (a, b) in rho.as_slice().iter().zip(pure.as_slice()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn position_diagonal_is_untouched() {
        let g = Grid::new(-10.0, 10.0, 256).unwrap();
        let wf = gaussian_packet(&g, -0.5, 2.0, 0.9).unwrap();
        for spec in [
            KernelSpec::Gaussian { s: 1.0 },
            KernelSpec::LensAperture {
                lambda: 0.5,
                epsilon: PI / 6.0,
            },
        ] {
            let k = kernel_preset(&spec, &g).unwrap();
            let rho = scatter_reduced(&wf, &k).unwrap();
            rho.check_invariants(true).unwrap();
            for (a, b) in rho.position_density().iter().zip(wf.position_density()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn factored_state_matches_dense_matrix() {
        let g = Grid::new(-10.0, 10.0, 256).unwrap();
        let wf = gaussian_packet(&g, 0.0, 0.0, 1.0).unwrap();
        let k = kernel_preset(&KernelSpec::Gaussian { s: 0.7 }, &g).unwrap();
        let rho = scatter_reduced(&wf, &k).unwrap();
        let st = scatter(&wf, &k).unwrap();
        for (a, b) in rho.momentum_density().iter().zip(st.momentum_density()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((rho.purity() - st.purity()).abs() < 1e-10);
        assert!(st.purity() < 1.0);
    }

    #[test]
    fn gaussian_scattering_adds_momentum_variance() {
        let g = Grid::new(-40.0, 40.0, 1024).unwrap();
        let wf = gaussian_packet(&g, 0.0, 0.0, 1.0).unwrap();
        let k = kernel_preset(&KernelSpec::Gaussian { s: 1.0 }, &g).unwrap();
        let st = scatter(&wf, &k).unwrap();
        let (_, sx0) = position_moments(&wf);
        let (_, sx1) = position_moments(&st);
        let (_, sp1) = momentum_moments(&st);
        assert!((sx0 - sx1).abs() < 1e-9);
        assert!((sp1 - 1.25_f64.sqrt()).abs() < 1e-3 * 1.25_f64.sqrt(), "{sp1}");
    }

    #[test]
    fn slit_tags_follow_the_decoherence_kernel() {
        let g = Grid::new(-20.0, 20.0, 2048).unwrap();
        let wf = gaussian_packet(&g, 0.0, 0.0, 1.0).unwrap();
        let ap = Aperture::double(0.0, 0.2, 1.0).unwrap();
        let post = crate::propagation::apply_aperture(&wf, &ap).unwrap().wave;

        let id = kernel_preset(&KernelSpec::Identity, &g).unwrap();
        let bs = entangle_at_slits(&post, &ap, &id).unwrap();
        assert_eq!(bs.len(), 2);
        assert!((bs.gram(0, 1) - C64::new(1.0, 0.0)).norm() < 1e-12);

        // boxcar of width W = 2π/a: D(a) sits on the first zero of the sinc
        let lens = KernelSpec::LensAperture {
            lambda: 1.0,
            epsilon: PI / 6.0,
        };
        let bs = entangle_at_slits(&post, &ap, &kernel_preset(&lens, &g).unwrap()).unwrap();
        assert!(bs.gram(0, 1).norm() < 1e-12);

        let gauss = kernel_preset(&KernelSpec::Gaussian { s: 1.177 }, &g).unwrap();
        let bs = entangle_at_slits(&post, &ap, &gauss).unwrap();
        // exp(-1.177²/2) = 0.500241398534476
        assert!((bs.gram(0, 1).norm() - 0.500_241_398_534_475_8).abs() < 1e-9);

        let single = Aperture::single(0.0, 0.4).unwrap();
        let post1 = crate::propagation::apply_aperture(&wf, &single).unwrap().wave;
        let bs = entangle_at_slits(&post1, &single, &gauss).unwrap();
        assert_eq!(bs.len(), 1);
    }

    #[test]
    fn plane_wave_photon_limit() {
        let g = Grid::new(-12.0, 12.0, 128).unwrap();
        let wf = gaussian_packet(&g, 0.0, 0.5, 0.8).unwrap();
        let k = kernel_preset(&KernelSpec::Gaussian { s: 1.0 }, &g).unwrap();
        // uniform |ψ_ph|² is the plane-wave photon
        let flat = WaveFunction::new(g, vec![C64::new(1.0, 0.0); g.len()]).unwrap();
        let a = scatter_reduced_with_photon(&wf, &k, &flat).unwrap();
        let b = scatter_reduced(&wf, &k).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).norm() < 1e-10);
        }
    }
}
