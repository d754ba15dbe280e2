//! Ideal measurement on a finite-level system, position detection, and the
//! Landau–Peierls transition probability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{DensityMatrix, WaveFunction};
use crate::C64;

const DISCRETE_NORM_TOL: f64 = 1e-12;

/// A state `Σ_k c_k |σ_k⟩` of a K-level system, with the measured observable
/// diagonal in the same basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteState {
    coeffs: Vec<C64>,
    eigenvalues: Vec<f64>,
}

impl DiscreteState {
    /// Normalizes `coeffs`. Needs `K ≥ 2` and one eigenvalue per level.
    pub fn new(coeffs: Vec<C64>, eigenvalues: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::config("a discrete state needs at least 2 levels"));
        }
        if coeffs.len() != eigenvalues.len() {
            return Err(Error::config(format!(
                "{} coefficients but {} eigenvalues",
                coeffs.len(),
                eigenvalues.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite())
            || eigenvalues.iter().any(|a| !a.is_finite())
        {
            return Err(Error::config("non-finite discrete state"));
        }
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if norm <= 0.0 {
            return Err(Error::EmptyState("all coefficients vanish".into()));
        }
        let s = 1.0 / norm.sqrt();
        Ok(Self {
            coeffs: coeffs.into_iter().map(|c| c * s).collect(),
            eigenvalues,
        })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `⟨ψ|A^n|ψ⟩` computed from the state vector.
    pub fn moment(&self, n: u32) -> f64 {
        // A is diagonal, so A^n ψ is elementwise; keep the vector form anyway
        // to stay independent of the measured weights.
        self.coeffs
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, a)| (c.conj() * (c * a.powi(n as i32))).re)
            .sum()
    }

    pub fn std(&self) -> f64 {
        (self.moment(2) - self.moment(1).powi(2)).max(0.0).sqrt()
    }

    pub fn purity(&self) -> f64 {
        let n: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        n * n
    }
}

/// Mixed state of the system after the apparatus records the level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredState {
    /// Row-major `K × K` reduced density matrix.
    rho: Vec<C64>,
    eigenvalues: Vec<f64>,
}

impl MeasuredState {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.rho[j * self.dim() + k]
    }

    /// Diagonal weights `ρ_kk`.
    pub fn weights(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.get(k, k).re).collect()
    }

    /// `Tr(ρ A^n)`.
    pub fn moment(&self, n: u32) -> f64 {
        self.weights()
            .iter()
            .zip(&self.eigenvalues)
            .map(|(w, a)| w * a.powi(n as i32))
            .sum()
    }

    pub fn std(&self) -> f64 {
        (self.moment(2) - self.moment(1).powi(2)).max(0.0).sqrt()
    }

    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn max_coherence(&self) -> f64 {
        let k = self.dim();
        (0..k * k)
            .filter(|i| i / k != i % k)
            .map(|i| self.rho[i].norm())
            .fold(0.0, f64::max)
    }
}

/// Couples the system to an apparatus with orthonormal pointer states,
/// `Σ_k c_k |σ_k⟩|α_k⟩`, and traces the apparatus out.
pub fn von_neumann_measure(s: &DiscreteState) -> MeasuredState {
    let k = s.len();
    // joint amplitude Ψ[j][a] = c_j δ_ja; ρ_jl = Σ_a Ψ[j][a] Ψ*[l][a]
    let joint: Vec<C64> = (0..k * k)
        .map(|i| {
            if i / k == i % k {
                s.coeffs[i / k]
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    let mut rho = vec![C64::new(0.0, 0.0); k * k];
    for j in 0..k {
        for l in 0..k {
            rho[j * k + l] = (0..k).map(|a| joint[j * k + a] * joint[l * k + a].conj()).sum();
        }
    }
    debug_assert!(
        (rho.iter().step_by(k + 1).map(|v| v.re).sum::<f64>() - 1.0).abs() < DISCRETE_NORM_TOL
    );
    MeasuredState {
        rho,
        eigenvalues: s.eigenvalues.clone(),
    }
}

/// Detection of the particle at a definite position: the off-diagonal
/// elements vanish and the diagonal keeps `|ψ(x)|²`.
pub fn project_position_detection(wf: &WaveFunction) -> DensityMatrix {
    let g = *wf.grid();
    let n = g.len();
    let mut rho = vec![C64::new(0.0, 0.0); n * n];
    for (j, a) in wf.amplitudes().iter().enumerate() {
        rho[j * n + j] = C64::new(a.norm_sqr(), 0.0);
    }
    DensityMatrix::from_parts_unchecked(g, rho)
}

/// `sin²(Δε t/2) / Δε²`, with the limit `t²/4` at `Δε = 0`.
pub fn landau_peierls_probability(delta_e: f64, t: f64) -> f64 {
    let u = 0.5 * delta_e * t;
    if u.abs() < 1e-4 {
        let u2 = u * u;
        // sin²u/u² = 1 - u²/3 + 2u⁴/45
        return 0.25 * t * t * (1.0 - u2 / 3.0 + 2.0 * u2 * u2 / 45.0);
    }
    let s = u.sin();
    s * s / (delta_e * delta_e)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::grid::Grid;
    use crate::observables::position_moments;
    use crate::propagation::propagate_density;
    use crate::state::{density_from_pure, fixtures::lobe, gaussian_packet, QuantumState};

    #[test]
    fn basis_state_stays_pure() {
        let s = DiscreteState::new(
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            vec![1.0, -1.0],
        )
        .unwrap();
        let m = von_neumann_measure(&s);
        assert_eq!(m.weights(), vec![1.0, 0.0]);
        assert!((m.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_pair() {
        let h = C64::new(0.5f64.sqrt(), 0.0);
        let s = DiscreteState::new(vec![h, h], vec![1.0, -1.0]).unwrap();
        let m = von_neumann_measure(&s);
        assert!((m.weights()[0] - 0.5).abs() < 1e-15);
        assert!(m.moment(1).abs() < 1e-15 && (m.std() - 1.0).abs() < 1e-15);
        assert!((s.std() - 1.0).abs() < 1e-15);
        assert!((m.purity() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn random_four_level_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c: Vec<C64> = (0..4)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let s = DiscreteState::new(c, a).unwrap();
        let m = von_neumann_measure(&s);
        for n in 1..=3 {
            assert!((s.moment(n) - m.moment(n)).abs() < 1e-12);
        }
        assert!(m.max_coherence() == 0.0);
    }

    #[test]
    fn rejects_bad_states() {
        assert!(DiscreteState::new(vec![C64::new(1.0, 0.0)], vec![0.0]).is_err());
        assert!(DiscreteState::new(vec![C64::new(1.0, 0.0); 2], vec![0.0]).is_err());
        assert!(DiscreteState::new(vec![C64::new(0.0, 0.0); 2], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn detection_keeps_the_diagonal() {
        let g = Grid::new(-10.0, 10.0, 128).unwrap();
        let wf = gaussian_packet(&g, 0.0, 1.0, 1.0).unwrap();
        let rho = project_position_detection(&wf);
        for (a, b) in rho.position_density().iter().zip(wf.position_density()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(rho.coherence_norm() < 1e-10);
        assert!((position_moments(&rho).1 - position_moments(&wf).1).abs() < 1e-12);
        assert!(rho.purity() < 1.0);

        let delta = WaveFunction::localized(g, 0.0).unwrap();
        let p = project_position_detection(&delta);
        let d = density_from_pure(&delta);
        for (a, b) in p.as_slice().iter().zip(d.as_slice()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn no_coherence_revival_after_detection() {
        let g = Grid::new(-16.0, 16.0, 256).unwrap();
        let l = lobe(&g, -1.5, 0.6);
        let r = lobe(&g, 1.5, 0.6);
        let amp: Vec<C64> = l.amplitudes().iter().zip(r.amplitudes()).map(|(a, b)| a + b).collect();
        let wf = WaveFunction::new(g, amp).unwrap();
        let a = g.nearest_index(-1.5).unwrap();
        let b = g.nearest_index(1.5).unwrap();
        let t = 2.0;
        let coherent = propagate_density(&density_from_pure(&wf), t, 1.0).unwrap();
        let projected = propagate_density(&project_position_detection(&wf), t, 1.0).unwrap();
        // after evolution, the projected state still carries no ±1.5 cross term
        let mixture = {
            let pl = propagate_density(&project_position_detection(&l), t, 1.0).unwrap();
            let pr = propagate_density(&project_position_detection(&r), t, 1.0).unwrap();
            (pl, pr)
        };
        let expect = 0.5 * (mixture.0.get(a, b) + mixture.1.get(a, b));
        assert!((projected.get(a, b) - expect).norm() < 1e-10);
        assert!((coherent.get(a, b) - projected.get(a, b)).norm() > 1e-3);
    }

    #[test]
    fn landau_peierls_values() {
        assert!((landau_peierls_probability(0.0, 2.0) - 1.0).abs() < 1e-15);
        assert!((landau_peierls_probability(PI, 1.0) - 0.101_321_183_642_337_78).abs() < 1e-15);
        for n in 1..=5 {
            assert!(landau_peierls_probability(2.0 * PI * n as f64, 1.0) < 1e-30);
        }
        // series branch meets the closed form
        let t: f64 = 3.0;
        let e = 2.0 * 0.99e-4 / t;
        let closed = (0.5 * e * t).sin().powi(2) / (e * e);
        assert!((landau_peierls_probability(e, t) - closed).abs() < 1e-12);
    }
}
