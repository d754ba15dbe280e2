//! End-to-end runners for the five gedanken experiments.

mod discrete;
mod microscope;
mod slits;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::RunConfig;
use crate::observables::{UncertaintyRecord, ROBERTSON_TOL};

pub use discrete::{run_landau_peierls, run_von_neumann};
pub use microscope::run_microscope;
pub use slits::{run_double_slit, run_single_slit};

/// Version of the `summary.json` layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Microscope,
    SingleSlit,
    DoubleSlit,
    VonNeumann,
    LandauPeierls,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Microscope,
        Scenario::SingleSlit,
        Scenario::DoubleSlit,
        Scenario::VonNeumann,
        Scenario::LandauPeierls,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Microscope => "microscope",
            Scenario::SingleSlit => "single-slit",
            Scenario::DoubleSlit => "double-slit",
            Scenario::VonNeumann => "von-neumann",
            Scenario::LandauPeierls => "landau-peierls",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
                Error::config(format!("unknown scenario `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// A sampled curve: positions (or scan values) and the quantity on them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Profile {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

/// An uncertainty record attached to a named stage of the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    #[serde(flatten)]
    pub record: UncertaintyRecord,
}

/// Outcome of a scenario run; serialized as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub config: RunConfig,
    /// State just before the interaction the scenario is about.
    pub before: Option<UncertaintyRecord>,
    /// State just after it.
    pub after: Option<UncertaintyRecord>,
    /// Every continuum state the run produced, in order.
    pub stages: Vec<StageRecord>,
    pub visibility: Option<f64>,
    pub fringe_spacing: Option<f64>,
    pub expected_fringe_spacing: Option<f64>,
    /// `|D(a)|` at the slit separation.
    pub tag_overlap: Option<f64>,
    pub purity_before: Option<f64>,
    pub purity_after: Option<f64>,
    pub metrics: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub warnings: Vec<String>,
    /// Wall-clock time; the only field that differs between identical runs.
    pub duration_s: f64,
    #[serde(skip)]
    pub profile: Option<Profile>,
    #[serde(skip)]
    pub reference: Option<Profile>,
}

impl ScenarioReport {
    fn new(config: &RunConfig) -> Self {
        ScenarioReport {
            schema_version: SCHEMA_VERSION,
            scenario: config.scenario,
            config: config.clone(),
            before: None,
            after: None,
            stages: Vec::new(),
            visibility: None,
            fringe_spacing: None,
            expected_fringe_spacing: None,
            tag_overlap: None,
            purity_before: None,
            purity_after: None,
            metrics: BTreeMap::new(),
            series: BTreeMap::new(),
            warnings: Vec::new(),
            duration_s: 0.0,
            profile: None,
            reference: None,
        }
    }

    fn stage(&mut self, name: &str, record: UncertaintyRecord) -> UncertaintyRecord {
        self.stages.push(StageRecord {
            stage: name.into(),
            record,
        });
        record
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    /// Every number finite, visibility in range, Robertson bound on every stage.
    pub fn check_invariants(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvariantViolation(format!("report field {what}")));
        let mut scalars: Vec<(String, f64)> = vec![("duration_s".into(), self.duration_s)];
        for (name, v) in [
            ("visibility", self.visibility),
            ("fringe_spacing", self.fringe_spacing),
            ("expected_fringe_spacing", self.expected_fringe_spacing),
            ("tag_overlap", self.tag_overlap),
            ("purity_before", self.purity_before),
            ("purity_after", self.purity_after),
        ] {
            if let Some(v) = v {
                scalars.push((name.into(), v));
            }
        }
        scalars.extend(self.metrics.iter().map(|(k, v)| (k.clone(), *v)));
        for (k, s) in &self.series {
            scalars.extend(s.iter().map(|v| (k.clone(), *v)));
        }
        let records = self
            .before
            .iter()
            .chain(self.after.iter())
            .chain(self.stages.iter().map(|s| &s.record));
        for r in records {
            for v in [r.mean_x, r.std_x, r.mean_p, r.std_p, r.robertson_gap] {
                scalars.push(("uncertainty record".into(), v));
            }
            if r.robertson_gap < -ROBERTSON_TOL {
                return bad("robertson_gap below -1e-6");
            }
        }
        if let Some((name, _)) = scalars.iter().find(|(_, v)| !v.is_finite()) {
            return bad(&format!("{name} is not finite"));
        }
        if let Some(v) = self.visibility {
            if !(0.0..=1.0 + 1e-9).contains(&v) {
                return bad(&format!("visibility {v} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Runs the scenario named in `cfg` after validating the configuration.
pub fn run(cfg: &RunConfig) -> Result<ScenarioReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut report = match cfg.scenario {
        Scenario::Microscope => run_microscope(cfg),
        Scenario::SingleSlit => run_single_slit(cfg),
        Scenario::DoubleSlit => run_double_slit(cfg),
        Scenario::VonNeumann => run_von_neumann(cfg),
        Scenario::LandauPeierls => run_landau_peierls(cfg),
    }?;
    report.duration_s = start.elapsed().as_secs_f64();
    report.check_invariants()?;
    Ok(report)
}
