//! Free evolution through the spectral propagator, and slit apertures.
//!
//! The free propagator is diagonal in momentum, so evolving for time `t` is
//! one FFT, a phase `exp(-i p² t / 2m)` and an inverse FFT. This is exactly
//! unitary on the lattice. The lattice is periodic: anything reaching the edge
//! re-enters on the far side. Leakage is monitored via [`boundary_probability`]
//! and reported as a warning, never absorbed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectral::Transforms;
use crate::state::{BranchState, DensityMatrix, QuantumState, WaveFunction};
use crate::C64;

/// Probability in the edge bands above which a wrap-around warning is raised.
pub const LEAK_WARN: f64 = 1e-6;

/// Width of each edge band, as a fraction of the grid extent.
pub const EDGE_BAND: f64 = 1.0 / 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApertureKind {
    Single,
    Double,
}

/// Opaque screen with one or two fully transmitting slits of width `width`.
/// For a double slit `separation` is the centre-to-centre distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aperture {
    pub kind: ApertureKind,
    pub center: f64,
    pub width: f64,
    pub separation: f64,
}

impl Aperture {
    pub fn single(center: f64, width: f64) -> Result<Self> {
        let ap = Aperture {
            kind: ApertureKind::Single,
            center,
            width,
            separation: 0.0,
        };
        ap.check_geometry()?;
        Ok(ap)
    }

    pub fn double(center: f64, width: f64, separation: f64) -> Result<Self> {
        let ap = Aperture {
            kind: ApertureKind::Double,
            center,
            width,
            separation,
        };
        ap.check_geometry()?;
        Ok(ap)
    }

    fn check_geometry(&self) -> Result<()> {
        if !(self.width > 0.0) || !self.center.is_finite() {
            return Err(Error::config(format!(
                "slit width must be positive (got {})",
                self.width
            )));
        }
        if self.kind == ApertureKind::Double && !(self.separation > self.width) {
            return Err(Error::config(format!(
                "slit separation {} must exceed slit width {} so the slits do not overlap",
                self.separation, self.width
            )));
        }
        Ok(())
    }

    /// Checks the grid-dependent invariants: `w ≥ 4 dx` and containment.
    pub fn validate_on(&self, grid: &Grid) -> Result<()> {
        self.check_geometry()?;
        if self.width < 4.0 * grid.dx() {
            return Err(Error::config(format!(
                "slit width {} is below 4 dx = {}",
                self.width,
                4.0 * grid.dx()
            )));
        }
        let half = self.width / 2.0;
        for c in self.slit_centers() {
            if c - half < grid.x_min() || c + half >= grid.x_max() {
                return Err(Error::config(format!(
                    "slit at {c} (width {}) lies outside the grid",
                    self.width
                )));
            }
        }
        Ok(())
    }

    /// Slit centres in ascending order.
    pub fn slit_centers(&self) -> Vec<f64> {
        match self.kind {
            ApertureKind::Single => vec![self.center],
            ApertureKind::Double => vec![
                self.center - self.separation / 2.0,
                self.center + self.separation / 2.0,
            ],
        }
    }

    /// Whether `x` lies inside the slit centred at `slit_center`.
    pub(crate) fn in_slit(&self, slit_center: f64, x: f64, grid: &Grid) -> bool {
        // small slack so that points sitting exactly on an edge are kept symmetrically
        (x - slit_center).abs() <= self.width / 2.0 + 1e-9 * grid.dx()
    }

    pub fn is_open(&self, x: f64, grid: &Grid) -> bool {
        self.slit_centers()
            .into_iter()
            .any(|c| self.in_slit(c, x, grid))
    }
}

/// Post-selected state behind an aperture and the probability of getting there.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmitted {
    pub wave: WaveFunction,
    pub transmission: f64,
}

/// Multiplies by the indicator of the open region and renormalizes.
pub fn apply_aperture(wf: &WaveFunction, ap: &Aperture) -> Result<Transmitted> {
    let grid = *wf.grid();
    ap.validate_on(&grid)?;
    let (amp, transmission) = wf.masked(|x| ap.is_open(x, &grid));
    if !(transmission > 0.0) {
        return Err(Error::EmptyState(
            "no probability is transmitted through the aperture".into(),
        ));
    }
    Ok(Transmitted {
        wave: WaveFunction::new(grid, amp)?,
        transmission,
    })
}

/// Probability found in the outer [`EDGE_BAND`] of the grid on either side.
pub fn boundary_probability<S: QuantumState + ?Sized>(state: &S) -> f64 {
    let g = state.grid();
    let band = ((g.len() as f64 * EDGE_BAND).ceil() as usize).max(1);
    let dens = state.position_density();
    let n = dens.len();
    (dens[..band].iter().sum::<f64>() + dens[n - band..].iter().sum::<f64>()) * g.dx()
}

fn check_evolution_args(t: f64, mass: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::config(format!("propagation time must be >= 0 (got {t})")));
    }
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::config(format!("mass must be > 0 (got {mass})")));
    }
    Ok(())
}

fn warn_on_leak<S: QuantumState + ?Sized>(state: &S, what: &str) {
    let leak = boundary_probability(state);
    if leak > LEAK_WARN {
        log::warn!(
            "{what}: probability {leak:.3e} near the grid edge; periodic wrap-around may distort the result"
        );
    }
}

/// Spectral free-evolution operator for one grid, time and mass.
struct FreeEvolution {
    fft: Transforms,
    /// `exp(-i p_k² t / 2m) / n` per FFT bin; the `1/n` completes the inverse FFT.
    phase: Vec<C64>,
}

impl FreeEvolution {
    fn new(grid: &Grid, t: f64, mass: f64) -> Self {
        let n = grid.len();
        let inv_n = 1.0 / n as f64;
        let phase = (0..n)
            .map(|k| {
                let p = grid.p(k);
                C64::from_polar(inv_n, -p * p * t / (2.0 * mass))
            })
            .collect();
        FreeEvolution {
            fft: Transforms::new(n),
            phase,
        }
    }

    fn apply(&self, buf: &mut [C64]) {
        self.fft.forward(buf);
        buf.iter_mut().zip(&self.phase).for_each(|(v, ph)| *v *= ph);
        self.fft.inverse(buf);
    }

    /// `v ← (U v*)*`, i.e. right multiplication of a row vector by `U†`.
    fn apply_adjoint_on_row(&self, row: &mut [C64]) {
        row.iter_mut().for_each(|v| *v = v.conj());
        self.apply(row);
        row.iter_mut().for_each(|v| *v = v.conj());
    }
}

/// `ψ(t) = F⁻¹ e^{-i p² t/2m} F ψ`.
pub fn propagate_free(wf: &WaveFunction, t: f64, mass: f64) -> Result<WaveFunction> {
    check_evolution_args(t, mass)?;
    if t == 0.0 {
        return Ok(wf.clone());
    }
    let grid = *wf.grid();
    let mut buf = wf.amplitudes().to_vec();
    FreeEvolution::new(&grid, t, mass).apply(&mut buf);
    let out = WaveFunction::from_parts_unchecked(grid, buf);
    warn_on_leak(&out, "free propagation");
    Ok(out)
}

/// `ρ(t) = U ρ U†`, applied as a transform along both matrix indices.
pub fn propagate_density(rho: &DensityMatrix, t: f64, mass: f64) -> Result<DensityMatrix> {
    check_evolution_args(t, mass)?;
    if t == 0.0 {
        return Ok(rho.clone());
    }
    let grid = *rho.grid();
    let n = grid.len();
    let op = FreeEvolution::new(&grid, t, mass);
    let (_, mut m) = rho.clone().into_parts();
    m.par_chunks_mut(n).for_each(|row| op.apply_adjoint_on_row(row));
    let mut mt = crate::state::density::transpose(&m, n);
    drop(m);
    mt.par_chunks_mut(n).for_each(|col| op.apply(col));
    let out = DensityMatrix::from_parts_unchecked(grid, crate::state::density::transpose(&mt, n));
    warn_on_leak(&out, "density propagation");
    Ok(out)
}

/// Evolves every branch; tags are untouched because their own evolution is
/// unitary and drops out of the overlaps.
pub fn propagate_branches(bs: &BranchState, t: f64, mass: f64) -> Result<BranchState> {
    bs.map_waves(|wf| propagate_free(wf, t, mass))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::observables::{momentum_moments, position_moments};
    use crate::state::{density_from_branches, density_from_pure, gaussian_packet, Branch};

    fn grid() -> Grid {
        Grid::new(-20.0, 20.0, 512).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let wf = gaussian_packet(&grid(), 1.0, 2.0, 1.0).unwrap();
        assert_eq!(propagate_free(&wf, 0.0, 1.0).unwrap(), wf);
        let rho = density_from_pure(&wf);
        assert_eq!(propagate_density(&rho, 0.0, 1.0).unwrap(), rho);
    }

    #[test]
    fn gaussian_spreading_matches_analytic_width() {
        // σ(t)² = σ0² (1 + (t / (2 m σ0²))²)  ⇒  σ(2) = √2 for σ0 = m = 1.
        let wf = gaussian_packet(&grid(), 0.0, 0.0, 1.0).unwrap();
        let out = propagate_free(&wf, 2.0, 1.0).unwrap();
        let (_, sx) = position_moments(&out);
        assert!((sx - 2f64.sqrt()).abs() < 1e-3 * 2f64.sqrt(), "{sx}");

        // cross-check against direct quadrature of the analytic evolved density
        let s2 = 2.0_f64;
        let quad_var: f64 = {
            let (a, b, n) = (-20.0_f64, 20.0_f64, 20000usize);
            let h = (b - a) / n as f64;
            let dens = |x: f64| (-x * x / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt();
            (0..n).map(|i| a + (i as f64 + 0.5) * h).map(|x| x * x * dens(x) * h).sum()
        };
        assert!((quad_var.sqrt() - sx).abs() < 1e-3);
    }

    #[test]
    fn momentum_density_is_conserved() {
        let wf = gaussian_packet(&grid(), -1.0, 1.5, 0.7).unwrap();
        let out = propagate_free(&wf, 3.3, 0.8).unwrap();
        for (a, b) in wf.momentum_density().iter().zip(out.momentum_density()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_evolution_matches_pure_evolution() {
        let g = Grid::new(-10.0, 10.0, 128).unwrap();
        let wf = gaussian_packet(&g, -1.0, 2.0, 0.8).unwrap();
        let rho_t = propagate_density(&density_from_pure(&wf), 1.7, 1.0).unwrap();
        let expect = density_from_pure(&propagate_free(&wf, 1.7, 1.0).unwrap());
        for (a, b) in rho_t.as_slice().iter().zip(expect.as_slice()) {
            assert!((a - b).norm() < 1e-9);
        }
        rho_t.check_invariants(true).unwrap();
        assert!((rho_t.purity() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn incoherent_mixture_evolves_branchwise() {
        let g = Grid::new(-16.0, 16.0, 256).unwrap();
        let a = gaussian_packet(&g, -3.0, 0.5, 0.6).unwrap();
        let b = gaussian_packet(&g, 3.0, -0.5, 0.6).unwrap();
        let w = C64::new(0.5_f64.sqrt(), 0.0);
        let bs = BranchState::pair(
            Branch { wave: a.clone(), weight: w },
            Branch { wave: b.clone(), weight: w },
            C64::new(0.0, 0.0),
        )
        .unwrap();
        let rho = density_from_branches(&bs).unwrap();
        let rho_t = propagate_density(&rho, 2.0, 1.0).unwrap();
        // Oracle: propagate branches separately and add intensities.
        let ia = propagate_free(&a, 2.0, 1.0).unwrap().position_density();
        let ib = propagate_free(&b, 2.0, 1.0).unwrap().position_density();
        for (j, v) in rho_t.position_density().iter().enumerate() {
            assert!((v - 0.5 * (ia[j] + ib[j])).abs() < 1e-10);
        }
        assert!((rho_t.purity() - rho.purity()).abs() < 1e-9);
        assert!((rho_t.trace() - 1.0).abs() < 1e-9);
        assert!(rho_t.hermiticity_error() < 1e-9);
    }

    #[test]
    fn evolution_composes() {
        let wf = gaussian_packet(&grid(), 0.0, 1.0, 0.5).unwrap();
        let two_step = propagate_free(&propagate_free(&wf, 0.7, 1.0).unwrap(), 1.1, 1.0).unwrap();
        let one_step = propagate_free(&wf, 1.8, 1.0).unwrap();
        for (a, b) in two_step.amplitudes().iter().zip(one_step.amplitudes()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn uncertainties_are_continuous_at_the_slit() {
        let g = Grid::new(-20.0, 20.0, 1024).unwrap();
        let wf = gaussian_packet(&g, 0.0, 0.0, 2.0).unwrap();
        let ap = Aperture::double(0.0, 1.0, 3.0).unwrap();
        let after = apply_aperture(&wf, &ap).unwrap().wave;
        let later = propagate_free(&after, 1e-6, 1.0).unwrap();
        let (_, sx0) = position_moments(&after);
        let (_, sp0) = momentum_moments(&after);
        let (_, sx1) = position_moments(&later);
        let (_, sp1) = momentum_moments(&later);
        assert!((sx0 - sx1).abs() < 1e-4);
        assert!((sp0 - sp1).abs() < 1e-4);
    }

    #[test]
    fn bad_time_or_mass_is_rejected() {
        let wf = gaussian_packet(&grid(), 0.0, 0.0, 1.0).unwrap();
        assert!(propagate_free(&wf, -1.0, 1.0).is_err());
        assert!(propagate_free(&wf, 1.0, 0.0).is_err());
    }

    #[test]
    fn double_slit_splits_wide_packet_into_equal_lobes() {
        let g = Grid::new(-20.0, 20.0, 2048).unwrap();
        let wf = gaussian_packet(&g, 0.0, 0.0, 2.5).unwrap();
        let ap = Aperture::double(0.0, 0.2, 1.0).unwrap();
        let out = apply_aperture(&wf, &ap).unwrap();
        let dens = out.wave.position_density();
        let left: f64 = g.positions().iter().zip(&dens).filter(|(x, _)| **x < 0.0).map(|(_, d)| d).sum();
        let right: f64 = g.positions().iter().zip(&dens).filter(|(x, _)| **x > 0.0).map(|(_, d)| d).sum();
        assert!(((left - right) * g.dx()).abs() < 1e-12);
        assert!(((left + right) * g.dx() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wide_slit_passes_the_packet_unchanged() {
        let g = grid();
        let wf = gaussian_packet(&g, 0.0, 0.0, 1.0).unwrap();
        let ap = Aperture::single(0.0, 30.0).unwrap();
        let out = apply_aperture(&wf, &ap).unwrap();
        assert!((out.transmission - 1.0).abs() < 1e-12);
        for (a, b) in out.wave.amplitudes().iter().zip(wf.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn narrow_slit_transmission_matches_quadrature() {
        let g = Grid::new(-20.0, 20.0, 2048).unwrap();
        let wf = gaussian_packet(&g, 0.0, 0.0, 1.0).unwrap();
        let ap = Aperture::single(0.0, 0.2).unwrap();
        let out = apply_aperture(&wf, &ap).unwrap();
        // Oracle 1: direct quadrature of the analytic |ψ|² over the open grid cells.
        let dens = |x: f64| (-x * x / 2.0).exp() / (2.0 * PI).sqrt();
        let open: Vec<f64> = g.positions().into_iter().filter(|x| x.abs() <= 0.1).collect();
        let quad: f64 = open.iter().map(|&x| dens(x)).sum::<f64>() * g.dx();
        assert!((out.transmission - quad).abs() < 1e-12);
        // Oracle 2: continuum value erf(0.1/√2) = 0.0796556745540580, up to
        // the width the open cells really cover.
        let covered = open.len() as f64 * g.dx();
        let erf_value = 0.079_655_674_554_057_96;
        assert!((out.transmission - erf_value * covered / 0.2).abs() < 1e-4);
    }

    #[test]
    fn blocked_packet_is_an_error() {
        let g = grid();
        let wf = WaveFunction::localized(g, -5.0).unwrap();
        let ap = Aperture::single(5.0, 1.0).unwrap();
        assert!(matches!(apply_aperture(&wf, &ap), Err(Error::EmptyState(_))));
    }

    #[test]
    fn aperture_geometry_is_validated() {
        assert!(Aperture::double(0.0, 1.0, 0.5).is_err());
        assert!(Aperture::single(0.0, -1.0).is_err());
        let g = grid();
        assert!(Aperture::single(0.0, g.dx()).unwrap().validate_on(&g).is_err());
        assert!(Aperture::single(19.9, 1.0).unwrap().validate_on(&g).is_err());
    }
}
