use crate::error::{Error, Result};
use crate::io::RunConfig;
use crate::observables::{intensity, robertson_record};
use crate::scattering::scatter;
use crate::scenarios::{Profile, ScenarioReport};
use crate::state::QuantumState;

/// Heisenberg's microscope without the semiclassical story: a packet scatters
/// one photon and the reduced state is compared with the incoming one.
pub fn run_microscope(cfg: &RunConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(cfg);
    let grid = cfg.build_grid()?;
    let wf = cfg.build_packet(&grid)?;
    let kernel = cfg.build_kernel(&grid)?;

    let before = report.stage("incident", robertson_record(&wf)?);
    let scattered = scatter(&wf, &kernel)?;
    let after = report.stage("scattered", robertson_record(&scattered)?);

    let rel_dx = (after.std_x - before.std_x).abs() / before.std_x;
    if rel_dx > 1e-6 {
        return Err(Error::InvariantViolation(format!(
            "position spread changed by {rel_dx:e} relative"
        )));
    }
    let kernel_var = kernel.variance();
    report.metric("kernel_variance", kernel_var);
    report.metric(
        "expected_std_p_after",
        (before.std_p.powi(2) + kernel_var).sqrt(),
    );
    report.metric("std_x_relative_change", rel_dx);
    report.metric("std_p_increase", after.std_p - before.std_p);
    report.before = Some(before);
    report.after = Some(after);
    report.purity_before = Some(wf.purity());
    report.purity_after = Some(scattered.purity());
    report.profile = Some(Profile {
        x: grid.positions(),
        values: intensity(&scattered),
    });
    Ok(report)
}
