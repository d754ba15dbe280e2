use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectral;
use crate::state::{QuantumState, WaveFunction};
use crate::C64;

const GRAM_TOL: f64 = 1e-10;

/// One which-way branch: a spatial wavefunction and its amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub wave: WaveFunction,
    pub weight: C64,
}

/// Particle state entangled with normalized which-way tags,
/// `Σ_j c_j |ψ_j⟩|τ_j⟩`, kept in factored form.
///
/// `gram[j][k] = ⟨τ_k|τ_j⟩`. The reduced particle state is
/// `ρ = Σ_jk c_j c_k* G_jk |ψ_j⟩⟨ψ_k|`; all marginals are evaluated from the
/// branches directly so no `n × n` matrix is ever formed.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    grid: Grid,
    branches: Vec<Branch>,
    gram: Vec<C64>,
}

impl BranchState {
    pub fn new(branches: Vec<Branch>, gram: Vec<C64>) -> Result<Self> {
        let k = branches.len();
        if k == 0 {
            return Err(Error::EmptyState("branch state needs at least one branch".into()));
        }
        if gram.len() != k * k {
            return Err(Error::InvalidEntanglement(format!(
                "Gram matrix has {} entries for {k} branches",
                gram.len()
            )));
        }
        let grid = *branches[0].wave.grid();
        if branches.iter().any(|b| b.wave.grid() != &grid) {
            return Err(Error::config("all branches must share one grid"));
        }
        validate_gram(&gram, k)?;
        let bs = BranchState {
            grid,
            branches,
            gram,
        };
        if !(bs.raw_trace() > 0.0) {
            return Err(Error::EmptyState("branch weights vanish".into()));
        }
        Ok(bs)
    }

    /// Two branches whose tags overlap as `γ = G_12 = ⟨τ_2|τ_1⟩`.
    pub fn pair(first: Branch, second: Branch, gamma: C64) -> Result<Self> {
        let one = C64::new(1.0, 0.0);
        BranchState::new(vec![first, second], vec![one, gamma, gamma.conj(), one])
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.branches.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    #[inline]
    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    #[inline]
    pub fn gram(&self, j: usize, k: usize) -> C64 {
        self.gram[j * self.len() + k]
    }

    /// Applies `f` to every branch wavefunction, keeping weights and tags.
    pub fn map_waves<F>(&self, f: F) -> Result<BranchState>
    where
        F: Fn(&WaveFunction) -> Result<WaveFunction>,
    {
        let branches = self
            .branches
            .iter()
            .map(|b| {
                Ok(Branch {
                    wave: f(&b.wave)?,
                    weight: b.weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        BranchState::new(branches, self.gram.clone())
    }

    /// `S_jk = ⟨ψ_j|ψ_k⟩`.
    fn overlap_matrix(&self) -> Vec<C64> {
        let k = self.len();
        let mut s = vec![C64::new(0.0, 0.0); k * k];
        for a in 0..k {
            for b in 0..k {
                s[a * k + b] = self.branches[a].wave.inner(&self.branches[b].wave);
            }
        }
        s
    }

    fn unnormalized_coefficients(&self) -> Vec<C64> {
        let k = self.len();
        let mut a = vec![C64::new(0.0, 0.0); k * k];
        for j in 0..k {
            for l in 0..k {
                a[j * k + l] =
                    self.branches[j].weight * self.branches[l].weight.conj() * self.gram(j, l);
            }
        }
        a
    }

    fn raw_trace(&self) -> f64 {
        let k = self.len();
        let a = self.unnormalized_coefficients();
        let s = self.overlap_matrix();
        // Tr ρ = Σ_jl A_jl ⟨ψ_l|ψ_j⟩
        (0..k)
            .flat_map(|j| (0..k).map(move |l| (j, l)))
            .map(|(j, l)| a[j * k + l] * s[l * k + j])
            .sum::<C64>()
            .re
    }

    /// `A_jl = c_j c_l* G_jl / Tr`, so that `ρ = Σ A_jl |ψ_j⟩⟨ψ_l|` has unit trace.
    pub(crate) fn coefficient_matrix(&self) -> Vec<C64> {
        let tr = self.raw_trace();
        self.unnormalized_coefficients()
            .into_iter()
            .map(|v| v / tr)
            .collect()
    }

    fn bilinear_density(&self, fields: &[Vec<C64>]) -> Vec<f64> {
        let k = self.len();
        let a = self.coefficient_matrix();
        let n = fields[0].len();
        (0..n)
            .map(|x| {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..k {
                    for l in 0..k {
                        acc += a[j * k + l] * fields[j][x] * fields[l][x].conj();
                    }
                }
                acc.re
            })
            .collect()
    }
}

fn validate_gram(gram: &[C64], k: usize) -> Result<()> {
    for j in 0..k {
        if (gram[j * k + j] - C64::new(1.0, 0.0)).norm() > GRAM_TOL {
            return Err(Error::InvalidEntanglement(format!(
                "tag {j} is not normalized (G_jj = {})",
                gram[j * k + j]
            )));
        }
        for l in 0..k {
            if (gram[j * k + l] - gram[l * k + j].conj()).norm() > GRAM_TOL {
                return Err(Error::InvalidEntanglement(
                    "Gram matrix is not Hermitian".into(),
                ));
            }
        }
    }
    let m = DMatrix::from_fn(k, k, |j, l| gram[j * k + l]);
    let min = m
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min < -GRAM_TOL {
        return Err(Error::InvalidEntanglement(format!(
            "Gram matrix is not positive semidefinite (eigenvalue {min:e})"
        )));
    }
    Ok(())
}

impl QuantumState for BranchState {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn position_density(&self) -> Vec<f64> {
        let fields: Vec<Vec<C64>> = self
            .branches
            .iter()
            .map(|b| b.wave.amplitudes().to_vec())
            .collect();
        self.bilinear_density(&fields)
    }

    fn momentum_density(&self) -> Vec<f64> {
        let fields: Vec<Vec<C64>> = self
            .branches
            .iter()
            .map(|b| spectral::to_momentum(&self.grid, b.wave.amplitudes()))
            .collect();
        self.bilinear_density(&fields)
    }

    /// `Tr(A S A S)` with `S_jk = ⟨ψ_j|ψ_k⟩`.
    fn purity(&self) -> f64 {
        let k = self.len();
        let a = self.coefficient_matrix();
        let s = self.overlap_matrix();
        let mul = |x: &[C64], y: &[C64]| {
            let mut out = vec![C64::new(0.0, 0.0); k * k];
            for i in 0..k {
                for j in 0..k {
                    out[i * k + j] = (0..k).map(|m| x[i * k + m] * y[m * k + j]).sum();
                }
            }
            out
        };
        // ρ = Σ A_jl |ψ_j⟩⟨ψ_l| ⇒ Tr ρ² = Σ A_jl ⟨ψ_l|ψ_m⟩ A_mn ⟨ψ_n|ψ_j⟩
        let as_ = mul(&a, &s);
        let sq = mul(&as_, &as_);
        (0..k).map(|i| sq[i * k + i]).sum::<C64>().re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::fixtures::lobe;
    use crate::state::{density_from_branches, density_from_pure};

    fn grid() -> Grid {
        Grid::new(-8.0, 8.0, 128).unwrap()
    }

    fn pair(gamma: f64) -> BranchState {
        let g = grid();
        let w = C64::new(0.5_f64.sqrt(), 0.0);
        BranchState::pair(
            Branch {
                wave: lobe(&g, -2.0, 1.0),
                weight: w,
            },
            Branch {
                wave: lobe(&g, 2.0, 1.0),
                weight: w,
            },
            C64::new(gamma, 0.0),
        )
        .unwrap()
    }

    #[test]
    fn identical_tags_reproduce_the_pure_superposition() {
        let bs = pair(1.0);
        let g = grid();
        let sum: Vec<C64> = bs.branches()[0]
            .wave
            .amplitudes()
            .iter()
            .zip(bs.branches()[1].wave.amplitudes())
            .map(|(a, b)| a + b)
            .collect();
        let pure = density_from_pure(&WaveFunction::new(g, sum).unwrap());
        let mixed = density_from_branches(&bs).unwrap();
        for (a, b) in pure.as_slice().iter().zip(mixed.as_slice()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn orthogonal_tags_give_incoherent_mixture() {
        let bs = pair(0.0);
        let rho = density_from_branches(&bs).unwrap();
        let i = rho.position_density();
        let a = bs.branches()[0].wave.position_density();
        let b = bs.branches()[1].wave.position_density();
        for j in 0..i.len() {
            assert!((i[j] - 0.5 * (a[j] + b[j])).abs() < 1e-12);
        }
        let g = grid();
        let ja = g.nearest_index(-2.0).unwrap();
        let jb = g.nearest_index(2.0).unwrap();
        assert!(rho.get(ja, jb).norm() < 1e-14);
        assert!((rho.purity() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn factored_marginals_match_dense_matrix() {
        for gamma in [0.0, 0.3, 0.8, 1.0] {
            let bs = pair(gamma);
            let rho = density_from_branches(&bs).unwrap();
            rho.check_invariants(true).unwrap();
            for (a, b) in bs.position_density().iter().zip(rho.position_density()) {
                assert!((a - b).abs() < 1e-10);
            }
            for (a, b) in bs.momentum_density().iter().zip(rho.momentum_density()) {
                assert!((a - b).abs() < 1e-10);
            }
            assert!((bs.purity() - rho.purity()).abs() < 1e-10);
            assert!((bs.purity() - (1.0 + gamma * gamma) / 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn purity_decreases_with_tag_overlap() {
        let purities: Vec<f64> = [1.0, 0.75, 0.5, 0.25, 0.0]
            .iter()
            .map(|&g| density_from_branches(&pair(g)).unwrap().purity())
            .collect();
        assert!(purities.windows(2).all(|w| w[1] < w[0]), "{purities:?}");
    }

    #[test]
    fn rejects_invalid_gram() {
        let g = grid();
        let b = Branch {
            wave: lobe(&g, 0.0, 1.0),
            weight: C64::new(1.0, 0.0),
        };
        let err = BranchState::pair(b.clone(), b.clone(), C64::new(1.5, 0.0)).unwrap_err();
        assert!(matches!(err, Error::InvalidEntanglement(_)), "{err}");
        let one = C64::new(1.0, 0.0);
        let bad_diag = BranchState::new(vec![b.clone(), b], vec![one, one * 0.2, one * 0.2, one * 0.9]);
        assert!(matches!(bad_diag, Err(Error::InvalidEntanglement(_))));
    }
}
