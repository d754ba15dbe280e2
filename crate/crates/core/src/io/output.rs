use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::scenarios::{Profile, ScenarioReport};

pub const SUMMARY_FILE: &str = "summary.json";
pub const INTENSITY_FILE: &str = "intensity.csv";
pub const REFERENCE_FILE: &str = "intensity_reference.csv";
pub const CONFIG_FILE: &str = "config.toml";

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn csv(profile: &Profile) -> String {
    let mut out = String::with_capacity(profile.x.len() * 48);
    out.push_str("x,I\n");
    for (x, i) in profile.x.iter().zip(&profile.values) {
        // `{:?}` prints the shortest text that parses back to the same f64
        writeln!(out, "{x:?},{i:?}").unwrap();
    }
    out
}

/// Writes `summary.json`, `intensity.csv`, `intensity_reference.csv` when the
/// report carries a reference pattern, and `config.toml` echoing the run
/// configuration. Returns the paths written.
pub fn emit_report(report: &ScenarioReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::InvariantViolation(format!("report is not serializable: {e}")))?;
    written.push(write(dir.join(SUMMARY_FILE), &(json + "\n"))?);
    if let Some(p) = &report.profile {
        written.push(write(dir.join(INTENSITY_FILE), &csv(p))?);
    }
    if let Some(p) = &report.reference {
        written.push(write(dir.join(REFERENCE_FILE), &csv(p))?);
    }
    written.push(write(dir.join(CONFIG_FILE), &report.config.to_toml())?);
    Ok(written)
}

/// Reads a two-column `x,I` file written by [`emit_report`].
pub fn read_intensity_csv(path: &Path) -> Result<Profile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, msg: &str| Error::Parse {
        path: path.display().to_string(),
        message: format!("line {line}: {msg}"),
    };
    let mut lines = text.lines();
    if lines.next() != Some("x,I") {
        return Err(bad(1, "expected header `x,I`"));
    }
    let mut profile = Profile::default();
    for (k, line) in lines.enumerate() {
        let (x, i) = line.split_once(',').ok_or_else(|| bad(k + 2, "expected two columns"))?;
        let x: f64 = x.parse().map_err(|_| bad(k + 2, "bad x value"))?;
        let i: f64 = i.parse().map_err(|_| bad(k + 2, "bad I value"))?;
        profile.x.push(x);
        profile.values.push(i);
    }
    Ok(profile)
}
