use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::propagation::Aperture;
use crate::scattering::{gaussian_width_for_overlap, kernel_preset, KernelSpec, ScatteringKernel};
use crate::scenarios::Scenario;
use crate::state::{gaussian_packet, WaveFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub x0: f64,
    /// Transverse mean momentum.
    pub p0: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApertureConfig {
    pub kind: crate::propagation::ApertureKind,
    pub center: f64,
    pub width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Identity,
    Gaussian,
    LensAperture,
}

/// Kernel section. A Gaussian takes either `s` or `overlap`, the tag overlap
/// wanted at the slit separation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub kind: KernelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationConfig {
    /// Aperture-to-screen distance `d`.
    pub distance: f64,
    pub mass: f64,
    /// Longitudinal momentum; sets the flight time `d m / p` and `λ = 2π/p`.
    pub momentum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Fraction of the screen, centred on the pattern, used for fringe estimates.
    pub window_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DoubleSlitMode {
    /// Rigid diaphragm: no which-way tag.
    Fixed,
    /// Diaphragm recoils; its momentum record is the tag.
    Recoiling,
    /// A photon scatters off the particle just behind the slits.
    Photon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleSlitConfig {
    pub mode: DoubleSlitMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    Random,
    Uniform,
    Basis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VonNeumannConfig {
    pub levels: usize,
    pub state: StateKind,
    pub basis_index: usize,
    pub seed: u64,
    /// Observable eigenvalues; defaults to `0, 1, ..., K-1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandauPeierlsConfig {
    pub time: f64,
    pub de_max: f64,
    pub n_scan: usize,
}

/// Everything a scenario run needs. Every section is always present; the
/// ones a scenario does not read keep their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub output_dir: PathBuf,
    pub grid: GridConfig,
    pub packet: PacketConfig,
    pub aperture: ApertureConfig,
    pub kernel: KernelConfig,
    pub propagation: PropagationConfig,
    pub analysis: AnalysisConfig,
    pub double_slit: DoubleSlitConfig,
    pub von_neumann: VonNeumannConfig,
    pub landau_peierls: LandauPeierlsConfig,
}

impl RunConfig {
    /// Documented defaults for `scenario`.
    pub fn defaults(scenario: Scenario) -> Self {
        let (grid, aperture, kernel, distance, window) = match scenario {
            Scenario::SingleSlit => (
                GridConfig {
                    x_min: -40.0,
                    x_max: 40.0,
                    n_points: 2048,
                },
                ApertureConfig {
                    kind: crate::propagation::ApertureKind::Single,
                    center: 0.0,
                    width: 0.5,
                    separation: None,
                },
                KernelConfig::identity(),
                60.0,
                0.2,
            ),
            Scenario::DoubleSlit => (
                // L dx ≥ λ d keeps the hard slit edges from aliasing onto the screen
                GridConfig {
                    x_min: -160.0,
                    x_max: 160.0,
                    n_points: 16384,
                },
                ApertureConfig::double_default(),
                KernelConfig::identity(),
                100.0,
                0.05,
            ),
            _ => (
                GridConfig {
                    x_min: -40.0,
                    x_max: 40.0,
                    n_points: 4096,
                },
                ApertureConfig::double_default(),
                KernelConfig {
                    kind: KernelKind::Gaussian,
                    s: Some(1.0),
                    overlap: None,
                    lambda: None,
                    epsilon: None,
                },
                100.0,
                0.2,
            ),
        };
        RunConfig {
            scenario,
            output_dir: PathBuf::from("out").join(scenario.name()),
            grid,
            packet: PacketConfig {
                x0: 0.0,
                p0: 0.0,
                sigma: 1.0,
            },
            aperture,
            kernel,
            propagation: PropagationConfig {
                distance,
                mass: 1.0,
                momentum: 40.0 * PI,
            },
            analysis: AnalysisConfig {
                window_fraction: window,
            },
            double_slit: DoubleSlitConfig {
                mode: DoubleSlitMode::Fixed,
            },
            von_neumann: VonNeumannConfig {
                levels: 4,
                state: StateKind::Random,
                basis_index: 0,
                seed: 1,
                eigenvalues: None,
            },
            landau_peierls: LandauPeierlsConfig {
                time: 1.0,
                de_max: 12.0 * PI,
                n_scan: 6001,
            },
        }
    }

    pub fn build_grid(&self) -> Result<Grid> {
        Grid::new(self.grid.x_min, self.grid.x_max, self.grid.n_points)
    }

    pub fn build_packet(&self, grid: &Grid) -> Result<WaveFunction> {
        gaussian_packet(grid, self.packet.x0, self.packet.p0, self.packet.sigma)
    }

    pub fn build_aperture(&self) -> Result<Aperture> {
        let a = &self.aperture;
        match a.kind {
            crate::propagation::ApertureKind::Single => {
                if a.separation.is_some() {
                    return Err(Error::config("aperture.separation is only used by a double slit"));
                }
                Aperture::single(a.center, a.width)
            }
            crate::propagation::ApertureKind::Double => {
                let sep = a
                    .separation
                    .ok_or_else(|| Error::config("a double slit needs aperture.separation"))?;
                Aperture::double(a.center, a.width, sep)
            }
        }
    }

    /// Resolved kernel shape. `overlap` is turned into a Gaussian width using
    /// the slit separation.
    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        let k = &self.kernel;
        let unused = |name: &str, v: Option<f64>| -> Result<()> {
            match v {
                Some(_) => Err(Error::config(format!(
                    "kernel.{name} is not used by a {:?} kernel",
                    k.kind
                ))),
                None => Ok(()),
            }
        };
        match k.kind {
            KernelKind::Identity => {
                unused("s", k.s)?;
                unused("overlap", k.overlap)?;
                unused("lambda", k.lambda)?;
                unused("epsilon", k.epsilon)?;
                Ok(KernelSpec::Identity)
            }
            KernelKind::Gaussian => {
                unused("lambda", k.lambda)?;
                unused("epsilon", k.epsilon)?;
                match (k.s, k.overlap) {
                    (Some(s), None) => Ok(KernelSpec::Gaussian { s }),
                    (None, Some(target)) => {
                        let a = self.aperture.separation.ok_or_else(|| {
                            Error::config("kernel.overlap needs aperture.separation")
                        })?;
                        Ok(KernelSpec::Gaussian {
                            s: gaussian_width_for_overlap(target, a)?,
                        })
                    }
                    _ => Err(Error::config(
                        "a Gaussian kernel takes exactly one of kernel.s and kernel.overlap",
                    )),
                }
            }
            KernelKind::LensAperture => {
                unused("s", k.s)?;
                unused("overlap", k.overlap)?;
                match (k.lambda, k.epsilon) {
                    (Some(lambda), Some(epsilon)) => Ok(KernelSpec::LensAperture { lambda, epsilon }),
                    _ => Err(Error::config(
                        "a lens-aperture kernel needs kernel.lambda and kernel.epsilon",
                    )),
                }
            }
        }
    }

    pub fn build_kernel(&self, grid: &Grid) -> Result<ScatteringKernel> {
        kernel_preset(&self.kernel_spec()?, grid)
    }

    /// Free flight time from the aperture to the screen.
    pub fn flight_time(&self) -> f64 {
        self.propagation.distance * self.propagation.mass / self.propagation.momentum
    }

    /// de Broglie wavelength of the longitudinal motion.
    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.propagation.momentum
    }

    /// Checks every precondition that does not need a simulation.
    pub fn validate(&self) -> Result<()> {
        match self.scenario {
            Scenario::VonNeumann => return self.validate_von_neumann(),
            Scenario::LandauPeierls => return self.validate_landau_peierls(),
            _ => {}
        }
        let grid = self.build_grid()?;
        self.build_packet(&grid)?;
        let p = &self.propagation;
        for (name, v) in [("distance", p.distance), ("mass", p.mass), ("momentum", p.momentum)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(format!("propagation.{name} must be > 0 (got {v})")));
            }
        }
        let f = self.analysis.window_fraction;
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::config(format!(
                "analysis.window_fraction must lie in (0, 1] (got {f})"
            )));
        }
        match self.scenario {
            Scenario::Microscope => {
                self.build_kernel(&grid)?;
            }
            Scenario::SingleSlit => {
                let ap = self.build_aperture()?;
                if ap.kind != crate::propagation::ApertureKind::Single {
                    return Err(Error::config("single-slit needs aperture.kind = \"single\""));
                }
                ap.validate_on(&grid)?;
            }
            Scenario::DoubleSlit => {
                let ap = self.build_aperture()?;
                if ap.kind != crate::propagation::ApertureKind::Double {
                    return Err(Error::config("double-slit needs aperture.kind = \"double\""));
                }
                ap.validate_on(&grid)?;
                self.build_kernel(&grid)?;
            }
            _ => unreachable!(),
        }
        Ok(())
    }

    fn validate_von_neumann(&self) -> Result<()> {
        let v = &self.von_neumann;
        if v.levels < 2 {
            return Err(Error::config(format!(
                "von_neumann.levels must be at least 2 (got {})",
                v.levels
            )));
        }
        if v.state == StateKind::Basis && v.basis_index >= v.levels {
            return Err(Error::config(format!(
                "von_neumann.basis_index {} is out of range for {} levels",
                v.basis_index, v.levels
            )));
        }
        if let Some(e) = &v.eigenvalues {
            if e.len() != v.levels {
                return Err(Error::config(format!(
                    "von_neumann.eigenvalues has {} entries for {} levels",
                    e.len(),
                    v.levels
                )));
            }
            if e.iter().any(|a| !a.is_finite()) {
                return Err(Error::config("von_neumann.eigenvalues must be finite"));
            }
        }
        Ok(())
    }

    fn validate_landau_peierls(&self) -> Result<()> {
        let l = &self.landau_peierls;
        if !(l.time > 0.0) || !l.time.is_finite() {
            return Err(Error::config(format!("landau_peierls.time must be > 0 (got {})", l.time)));
        }
        if !(l.de_max > 0.0) || !l.de_max.is_finite() {
            return Err(Error::config(format!(
                "landau_peierls.de_max must be > 0 (got {})",
                l.de_max
            )));
        }
        if l.n_scan < 3 {
            return Err(Error::config(format!(
                "landau_peierls.n_scan must be at least 3 (got {})",
                l.n_scan
            )));
        }
        Ok(())
    }

    /// TOML text that parses back to this configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration is always representable as TOML")
    }
}

impl KernelConfig {
    fn identity() -> Self {
        KernelConfig {
            kind: KernelKind::Identity,
            s: None,
            overlap: None,
            lambda: None,
            epsilon: None,
        }
    }
}

impl ApertureConfig {
    fn double_default() -> Self {
        ApertureConfig {
            kind: crate::propagation::ApertureKind::Double,
            center: 0.0,
            width: 0.2,
            separation: Some(1.0),
        }
    }
}

/// Merges `over` into `base`. A kernel section that names a different kind
/// replaces the default kernel instead of merging with it.
fn merge(base: &mut Table, over: Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) => {
                let new_kind = key == "kernel"
                    && o.get("kind").is_some()
                    && o.get("kind") != b.get("kind");
                if new_kind {
                    *b = o;
                } else {
                    merge(b, o);
                }
            }
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

fn parse_override(item: &str) -> Result<(Vec<String>, Value)> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override `{item}` is not of the form key=value")))?;
    let path: Vec<String> = key.trim().split('.').map(|s| s.trim().to_string()).collect();
    if path.iter().any(|s| s.is_empty()) {
        return Err(Error::config(format!("override `{item}` has an empty key segment")));
    }
    let raw = raw.trim();
    // a bare word like `gaussian` is taken as a string
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((path, value))
}

fn nest(path: &[String], value: Value) -> Table {
    let mut t = Table::new();
    match path {
        [last] => {
            t.insert(last.clone(), value);
        }
        [head, rest @ ..] => {
            t.insert(head.clone(), Value::Table(nest(rest, value)));
        }
        [] => {}
    }
    t
}

fn layered(
    scenario: Scenario,
    file: Option<(&str, Table)>,
    overrides: &[String],
) -> Result<RunConfig> {
    let defaults = RunConfig::defaults(scenario);
    let mut table = Table::try_from(&defaults).expect("defaults serialize to a table");
    let source = file.as_ref().map(|(name, _)| name.to_string()).unwrap_or_else(|| "<defaults>".into());
    if let Some((_, t)) = file {
        if let Some(s) = t.get("scenario") {
            if s.as_str() != Some(scenario.name()) {
                return Err(Error::config(format!(
                    "{source} is for scenario {s}, not \"{}\"",
                    scenario.name()
                )));
            }
        }
        merge(&mut table, t);
    }
    for item in overrides {
        let (path, value) = parse_override(item)?;
        if path[0] == "scenario" {
            return Err(Error::config("the scenario is chosen on the command line, not with --set"));
        }
        merge(&mut table, nest(&path, value));
    }
    let cfg: RunConfig = Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Parse {
        path: source,
        message: e.message().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Builds a validated configuration for `scenario` from its defaults, an
/// optional TOML file, and `key=value` overrides, later layers winning.
pub fn parse_config(scenario: Scenario, path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    match path {
        None => layered(scenario, None, overrides),
        Some(p) => {
            let name = p.display().to_string();
            let text = std::fs::read_to_string(p).map_err(|e| Error::Parse {
                path: name.clone(),
                message: format!("cannot read configuration: {e}"),
            })?;
            let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
                path: name.clone(),
                message: e.to_string(),
            })?;
            layered(scenario, Some((&name, table)), overrides)
        }
    }
}

/// [`parse_config`] for configuration text already in memory.
pub fn parse_config_str(scenario: Scenario, text: &str, overrides: &[String]) -> Result<RunConfig> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
        path: "<string>".into(),
        message: e.to_string(),
    })?;
    layered(scenario, Some(("<string>", table)), overrides)
}
