use std::f64::consts::PI;

use gedanken::io::{parse_config, DoubleSlitMode, RunConfig};
use gedanken::scattering::lens_window_width;
use gedanken::{run, Scenario, ScenarioReport};

fn cfg(s: Scenario, sets: &[&str]) -> RunConfig {
    let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
    parse_config(s, None, &sets).unwrap()
}

fn go(s: Scenario, sets: &[&str]) -> ScenarioReport {
    run(&cfg(s, sets)).unwrap()
}

#[test]
fn microscope_identity_changes_nothing() {
    let r = go(Scenario::Microscope, &["kernel.kind=identity"]);
    let (b, a) = (r.before.unwrap(), r.after.unwrap());
    for (x, y) in [
        (b.mean_x, a.mean_x),
        (b.std_x, a.std_x),
        (b.mean_p, a.mean_p),
        (b.std_p, a.std_p),
        (b.robertson_gap, a.robertson_gap),
        (r.purity_before.unwrap(), r.purity_after.unwrap()),
    ] {
        assert!((x - y).abs() < 1e-12, "{x} vs {y}");
    }
}

#[test]
fn microscope_gaussian_kernel() {
    let r = go(Scenario::Microscope, &[]);
    let (b, a) = (r.before.unwrap(), r.after.unwrap());
    assert!((b.std_p - 0.5).abs() < 1e-9);
    assert!((a.std_p - 1.25_f64.sqrt()).abs() < 1e-3);
    assert!((a.std_x - b.std_x).abs() < 1e-6 * b.std_x);
    assert!(a.robertson_gap > 0.0);
    assert!(r.purity_after.unwrap() < 1.0);
}

#[test]
fn microscope_lens_adds_boxcar_variance() {
    let r = go(
        Scenario::Microscope,
        &["kernel.kind=lens-aperture", "kernel.lambda=0.5", "kernel.epsilon=0.5235987755982988"],
    );
    let w = lens_window_width(0.5, PI / 6.0);
    let (b, a) = (r.before.unwrap(), r.after.unwrap());
    let added = a.std_p.powi(2) - b.std_p.powi(2);
    assert!((added - w * w / 12.0).abs() < 5e-3 * w * w / 12.0, "{added}");
}

#[test]
fn wide_slit_passes_the_packet() {
    let r = go(Scenario::SingleSlit, &["aperture.width=30"]);
    assert!((r.metrics["transmission"] - 1.0).abs() < 1e-12);
    let incident = &r.stages[0].record;
    let aperture = &r.stages[1].record;
    assert_eq!(incident, aperture);
}

#[test]
fn single_slit_lobe_scales_inversely_with_width() {
    let mut products = Vec::new();
    for w in ["0.5", "0.75", "1.0"] {
        let r = go(Scenario::SingleSlit, &[&format!("aperture.width={w}")]);
        let fwhm = r.metrics["central_lobe_fwhm"];
        let expected = r.metrics["expected_central_lobe_fwhm"];
        assert!((fwhm - expected).abs() < 0.02 * expected, "w={w}: {fwhm} vs {expected}");
        products.push(fwhm * r.metrics["aperture_covered_width"]);
    }
    let lo = products.iter().cloned().fold(f64::MAX, f64::min);
    let hi = products.iter().cloned().fold(f64::MIN, f64::max);
    assert!(hi / lo - 1.0 < 0.02, "{products:?}");
}

#[test]
fn detection_erases_coherence_but_not_intensity() {
    let r = go(Scenario::SingleSlit, &[]);
    assert!(r.metrics["intensity_projection_max_diff"] < 1e-12);
    assert!(r.metrics["coherence_norm_before"] > 1.0);
    assert!(r.metrics["coherence_norm_after"] < 1e-10);
    assert!(r.after.unwrap().std_p >= r.before.unwrap().std_p);
    assert!(r.purity_after.unwrap() < r.purity_before.unwrap());
}

#[test]
fn fixed_diaphragm_fringes() {
    let r = go(Scenario::DoubleSlit, &[]);
    assert!(r.visibility.unwrap() > 0.99);
    assert!((r.fringe_spacing.unwrap() - 5.0).abs() < 0.1);
    assert_eq!(r.expected_fringe_spacing, Some(5.0));
    assert!(r.reference.is_none());
}

#[test]
fn recoiling_without_exchange_is_the_fixed_case() {
    let fixed = go(Scenario::DoubleSlit, &[]);
    let recoil = go(Scenario::DoubleSlit, &["double_slit.mode=recoiling"]);
    assert_eq!(recoil.config.double_slit.mode, DoubleSlitMode::Recoiling);
    let pairs = [
        (fixed.visibility, recoil.visibility),
        (fixed.fringe_spacing, recoil.fringe_spacing),
        (fixed.tag_overlap, recoil.tag_overlap),
        (fixed.purity_after, recoil.purity_after),
    ];
    for (a, b) in pairs {
        assert!((a.unwrap() - b.unwrap()).abs() < 1e-9);
    }
    for (a, b) in fixed.stages.iter().zip(&recoil.stages) {
        assert!((a.record.std_p - b.record.std_p).abs() < 1e-9);
        assert!((a.record.std_x - b.record.std_x).abs() < 1e-9);
    }
    let (pa, pb) = (fixed.profile.unwrap(), recoil.profile.unwrap());
    for (a, b) in pa.values.iter().zip(&pb.values) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn which_way_kernels_reduce_visibility() {
    let half = go(
        Scenario::DoubleSlit,
        &["double_slit.mode=recoiling", "kernel.kind=gaussian", "kernel.overlap=0.5"],
    );
    assert!((half.tag_overlap.unwrap() - 0.5).abs() < 1e-12);
    assert!((half.visibility.unwrap() - 0.5).abs() < 0.02 * 0.5);
    assert!((half.fringe_spacing.unwrap() - 5.0).abs() < 0.1);
    assert!(half.after.unwrap().std_p >= half.before.unwrap().std_p);
    assert!(half.reference.is_some());

    let none = go(
        Scenario::DoubleSlit,
        &[
            "double_slit.mode=photon",
            "kernel.kind=lens-aperture",
            "kernel.lambda=1",
            "kernel.epsilon=0.5235987755982988",
        ],
    );
    assert!(none.tag_overlap.unwrap() < 1e-12);
    assert!(none.visibility.unwrap() < 0.02);
}

#[test]
fn fixed_mode_ignores_a_kernel() {
    let r = go(Scenario::DoubleSlit, &["kernel.kind=gaussian", "kernel.s=1"]);
    assert_eq!(r.tag_overlap, Some(1.0));
    assert!(r.warnings.iter().any(|w| w.contains("ignored")));
}

#[test]
fn von_neumann_purities() {
    let basis = go(Scenario::VonNeumann, &["von_neumann.state=basis", "von_neumann.basis_index=2"]);
    assert!((basis.purity_after.unwrap() - 1.0).abs() < 1e-15);
    let uniform = go(Scenario::VonNeumann, &["von_neumann.state=uniform"]);
    assert!((uniform.purity_before.unwrap() - 1.0).abs() < 1e-12);
    assert!((uniform.purity_after.unwrap() - 0.25).abs() < 1e-12);
    let random = go(Scenario::VonNeumann, &["von_neumann.levels=6", "von_neumann.seed=99"]);
    for n in 1..=4 {
        let b = random.metrics[&format!("moment_{n}_before")];
        let a = random.metrics[&format!("moment_{n}_after")];
        assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
    }
}

#[test]
fn landau_peierls_zeros_scale_with_time() {
    for (t, first) in [(1.0, 2.0 * PI), (2.0, PI)] {
        let r = go(Scenario::LandauPeierls, &[&format!("landau_peierls.time={t}")]);
        let zeros = &r.series["zeros"];
        let step = r.metrics["scan_step"];
        assert!((zeros[0] - first).abs() <= step);
        let hw = r.metrics["half_width_at_half_maximum"];
        assert!((hw * t - 2.783_114_756_503_02).abs() < 1e-9);
        // dense-scan oracle for the half maximum
        let p = r.profile.unwrap();
        let j = p.values.iter().position(|v| *v < 0.5).unwrap();
        assert!(p.x[j - 1] <= hw && hw <= p.x[j]);
    }
}

#[test]
fn every_report_satisfies_its_invariants() {
    for s in Scenario::ALL {
        let r = go(s, &[]);
        r.check_invariants().unwrap();
        for st in &r.stages {
            assert!(st.record.robertson_gap >= -1e-6, "{s} {}", st.stage);
        }
    }
}
