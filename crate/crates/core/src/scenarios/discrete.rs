use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io::{RunConfig, StateKind};
use crate::measurement::{landau_peierls_probability, von_neumann_measure, DiscreteState};
use crate::scenarios::{Profile, ScenarioReport};
use crate::C64;

/// Coefficients drawn uniformly from the unit square in each component.
pub(crate) fn random_coefficients(rng: &mut ChaCha8Rng, k: usize) -> Vec<C64> {
    (0..k)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn discrete_state(cfg: &RunConfig) -> Result<DiscreteState> {
    let v = &cfg.von_neumann;
    let k = v.levels;
    let coeffs = match v.state {
        StateKind::Random => random_coefficients(&mut ChaCha8Rng::seed_from_u64(v.seed), k),
        StateKind::Uniform => vec![C64::new(1.0, 0.0); k],
        StateKind::Basis => {
            let mut c = vec![C64::new(0.0, 0.0); k];
            c[v.basis_index] = C64::new(1.0, 0.0);
            c
        }
    };
    let eigenvalues = v
        .eigenvalues
        .clone()
        .unwrap_or_else(|| (0..k).map(|j| j as f64).collect());
    DiscreteState::new(coeffs, eigenvalues)
}

/// Ideal measurement of a K-level observable: moments before and after.
pub fn run_von_neumann(cfg: &RunConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(cfg);
    let state = discrete_state(cfg)?;
    let measured = von_neumann_measure(&state);
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        let (b, a) = (state.moment(n), measured.moment(n));
        report.metric(&format!("moment_{n}_before"), b);
        report.metric(&format!("moment_{n}_after"), a);
        worst = worst.max((a - b).abs());
    }
    report.metric("max_moment_change", worst);
    report.metric("std_before", state.std());
    report.metric("std_after", measured.std());
    report.metric("max_coherence_after", measured.max_coherence());
    report.purity_before = Some(state.purity());
    report.purity_after = Some(measured.purity());
    report.series.insert("weights".into(), measured.weights());
    report
        .series
        .insert("eigenvalues".into(), state.eigenvalues().to_vec());
    Ok(report)
}

/// Largest `u` in `(0, 2π)` with `sin²(u/2)/(u/2)² = 1/2`, by bisection.
fn half_maximum_phase() -> f64 {
    let f = |u: f64| {
        let h = 0.5 * u;
        (h.sin() / h).powi(2) - 0.5
    };
    let (mut lo, mut hi) = (1e-3, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Scan of the transition probability `sin²(Δε t/2)/Δε²` over `Δε`,
/// normalized to unit peak, with its zeros and central half width.
pub fn run_landau_peierls(cfg: &RunConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(cfg);
    let lp = &cfg.landau_peierls;
    let t = lp.time;
    let step = lp.de_max / (lp.n_scan - 1) as f64;
    let de: Vec<f64> = (0..lp.n_scan).map(|j| j as f64 * step).collect();
    let peak = landau_peierls_probability(0.0, t);
    let curve: Vec<f64> = de.iter().map(|e| landau_peierls_probability(*e, t) / peak).collect();

    // interior local minima of the sampled curve
    let zeros: Vec<f64> = (1..curve.len() - 1)
        .filter(|&j| curve[j] <= curve[j - 1] && curve[j] < curve[j + 1])
        .map(|j| de[j])
        .collect();
    if zeros.is_empty() {
        report.warn(format!(
            "no zero found below Δε = {}; the first lies at 2π/t = {}",
            lp.de_max,
            2.0 * PI / t
        ));
    }
    let worst_zero_offset = zeros
        .iter()
        .enumerate()
        .map(|(n, z)| (z - 2.0 * PI * (n + 1) as f64 / t).abs())
        .fold(0.0, f64::max);
    if zeros.len() > 1 && worst_zero_offset > step {
        return Err(Error::InvariantViolation(format!(
            "scanned zeros are {worst_zero_offset} away from 2πn/t"
        )));
    }
    let u_half = half_maximum_phase();
    report.metric("peak_probability", peak);
    report.metric("scan_step", step);
    report.metric("zero_offset_max", worst_zero_offset);
    report.metric("half_width_at_half_maximum", u_half / t);
    report.metric("half_width_times_t", u_half);
    report.series.insert("zeros".into(), zeros);
    report.profile = Some(Profile {
        x: de,
        values: curve,
    });
    Ok(report)
}
