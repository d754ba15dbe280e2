use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::io::{DoubleSlitMode, KernelKind, RunConfig};
use crate::measurement::project_position_detection;
use crate::observables::{
    central_lobe_width, central_window, fringe_spacing, intensity, robertson_record, visibility,
};
use crate::propagation::{
    apply_aperture, boundary_probability, propagate_branches, propagate_free, LEAK_WARN,
};
use crate::scattering::{entangle_at_slits, kernel_preset, scatter, KernelSpec};
use crate::scenarios::{Profile, ScenarioReport};
use crate::state::{BranchState, QuantumState};
use crate::C64;

/// Full width at half maximum of `sinc²(π x w / λd)` in units of `λd/w`.
const SINC2_FWHM: f64 = 0.885_892_941_378_904_8;

/// Warnings about the far-field and periodic-grid assumptions.
fn geometry_warnings(report: &mut ScenarioReport, cfg: &RunConfig, grid: &Grid, scale: f64) {
    let lambda = cfg.wavelength();
    let d = cfg.propagation.distance;
    if d < 5.0 * scale * scale / lambda {
        report.warn(format!(
            "distance {d} is not far-field for feature size {scale} (want d >= 5 a²/λ = {})",
            5.0 * scale * scale / lambda
        ));
    }
    if lambda * d > grid.extent() * grid.dx() {
        report.warn(format!(
            "λd = {} exceeds L·dx = {}; periodic images of the aperture reach the screen",
            lambda * d,
            grid.extent() * grid.dx()
        ));
    }
}

fn leak_warning<S: QuantumState + ?Sized>(report: &mut ScenarioReport, stage: &str, state: &S) {
    let leak = boundary_probability(state);
    report.metric(&format!("boundary_probability_{stage}"), leak);
    if leak > LEAK_WARN {
        report.warn(format!(
            "{stage}: probability {leak:.3e} near the grid edge (threshold {LEAK_WARN:e})"
        ));
    }
}

/// A packet through one slit, onto the screen, then detected there.
pub fn run_single_slit(cfg: &RunConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(cfg);
    let grid = cfg.build_grid()?;
    let ap = cfg.build_aperture()?;
    let wf = cfg.build_packet(&grid)?;
    report.stage("incident", robertson_record(&wf)?);

    let passed = apply_aperture(&wf, &ap)?;
    report.stage("aperture", robertson_record(&passed.wave)?);
    report.metric("transmission", passed.transmission);
    geometry_warnings(&mut report, cfg, &grid, ap.width);

    let screen = propagate_free(&passed.wave, cfg.flight_time(), cfg.propagation.mass)?;
    leak_warning(&mut report, "screen", &screen);
    let before = report.stage("screen", robertson_record(&screen)?);

    let detected = project_position_detection(&screen);
    let after = report.stage("detected", robertson_record(&detected)?);

    let i_before = intensity(&screen);
    let i_after = intensity(&detected);
    let max_diff = i_before
        .iter()
        .zip(&i_after)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    report.metric("intensity_projection_max_diff", max_diff);
    let amp_sum: f64 = screen.amplitudes().iter().map(|a| a.norm()).sum();
    report.metric(
        "coherence_norm_before",
        (amp_sum * amp_sum - screen.norm_sqr()) * grid.dx(),
    );
    report.metric("coherence_norm_after", detected.coherence_norm());

    let lambda_d = cfg.wavelength() * cfg.propagation.distance;
    match central_lobe_width(&i_before, &grid) {
        Ok(w) => report.metric("central_lobe_fwhm", w),
        Err(e) => report.warn(format!("central lobe width: {e}")),
    }
    // the open width is a whole number of grid cells
    let covered = grid.positions().iter().filter(|x| ap.is_open(**x, &grid)).count() as f64 * grid.dx();
    report.metric("aperture_covered_width", covered);
    report.metric("expected_central_lobe_fwhm", SINC2_FWHM * lambda_d / covered);
    // a single slit has no two-slit fringes; record what the estimator sees
    let window = central_window(grid.len(), cfg.analysis.window_fraction);
    if let Ok(s) = fringe_spacing(&i_before, &grid, window) {
        report.warn(format!(
            "single-slit pattern shows side-lobe spacing {s}; this is not a two-slit fringe"
        ));
    }

    report.before = Some(before);
    report.after = Some(after);
    report.purity_before = Some(screen.purity());
    report.purity_after = Some(detected.purity());
    report.profile = Some(Profile {
        x: grid.positions(),
        values: i_before,
    });
    Ok(report)
}

/// Pure superposition of the same branches: the fixed-diaphragm pattern.
fn coherent_reference(bs: &BranchState) -> Result<BranchState> {
    let k = bs.len();
    BranchState::new(bs.branches().to_vec(), vec![C64::new(1.0, 0.0); k * k])
}

/// Two slits, an optional which-way interaction at the slits, and the
/// screen pattern it leaves.
pub fn run_double_slit(cfg: &RunConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(cfg);
    let grid = cfg.build_grid()?;
    let ap = cfg.build_aperture()?;
    let a = ap.separation;
    let mode = cfg.double_slit.mode;
    let spec = match mode {
        DoubleSlitMode::Fixed => {
            if cfg.kernel.kind != KernelKind::Identity {
                report.warn("a fixed diaphragm takes up no momentum; the kernel is ignored".into());
            }
            KernelSpec::Identity
        }
        DoubleSlitMode::Recoiling | DoubleSlitMode::Photon => cfg.kernel_spec()?,
    };
    let kernel = kernel_preset(&spec, &grid)?;

    let wf = cfg.build_packet(&grid)?;
    report.stage("incident", robertson_record(&wf)?);
    let passed = apply_aperture(&wf, &ap)?;
    report.metric("transmission", passed.transmission);
    geometry_warnings(&mut report, cfg, &grid, a);

    // Moments just after the interaction come from the exact reduced state;
    // the branch model below keeps one tag per slit and is used for the screen.
    let before = report.stage("aperture", robertson_record(&passed.wave)?);
    let scattered = scatter(&passed.wave, &kernel)?;
    let after = report.stage("interaction", robertson_record(&scattered)?);
    if after.std_p < before.std_p * (1.0 - 1e-12) {
        return Err(Error::InvariantViolation(format!(
            "momentum spread fell from {} to {} in the interaction",
            before.std_p, after.std_p
        )));
    }

    let branches = entangle_at_slits(&passed.wave, &ap, &kernel)?;
    let overlap = match mode {
        DoubleSlitMode::Fixed => 1.0,
        _ => kernel.overlap_at(a).norm(),
    };
    report.tag_overlap = Some(overlap);
    report.metric("kernel_variance", kernel.variance());
    report.metric("purity_after_exact", scattered.purity());

    let t = cfg.flight_time();
    let m = cfg.propagation.mass;
    let screen = propagate_branches(&branches, t, m)?;
    leak_warning(&mut report, "screen", &screen);
    report.stage("screen", robertson_record(&screen)?);
    let pattern = intensity(&screen);

    let window = central_window(grid.len(), cfg.analysis.window_fraction);
    let v = visibility(&pattern, window.clone())?;
    report.visibility = Some(v);
    let expected = cfg.wavelength() * cfg.propagation.distance / a;
    report.expected_fringe_spacing = Some(expected);
    match fringe_spacing(&pattern, &grid, window.clone()) {
        Ok(s) => {
            report.fringe_spacing = Some(s);
            let periods = window.len() as f64 * grid.dx() / s;
            if periods < 3.0 {
                report.warn(format!(
                    "visibility window spans {periods:.2} fringe periods; at least 3 are wanted"
                ));
            }
        }
        Err(e) if v <= 0.1 => log::info!("no fringe spacing at visibility {v}: {e}"),
        Err(e) => report.warn(format!("fringe spacing: {e}")),
    }

    if mode != DoubleSlitMode::Fixed {
        let reference = coherent_reference(&screen)?;
        report.reference = Some(Profile {
            x: grid.positions(),
            values: intensity(&reference),
        });
    }

    report.before = Some(before);
    report.after = Some(after);
    report.purity_before = Some(passed.wave.purity());
    report.purity_after = Some(screen.purity());
    report.profile = Some(Profile {
        x: grid.positions(),
        values: pattern,
    });
    Ok(report)
}

