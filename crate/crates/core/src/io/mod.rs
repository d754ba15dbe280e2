//! Run configuration and report files.

mod config;
mod output;

pub use config::{
    parse_config, parse_config_str, AnalysisConfig, ApertureConfig, DoubleSlitConfig,
    DoubleSlitMode, GridConfig, KernelConfig, KernelKind, LandauPeierlsConfig, PacketConfig,
    PropagationConfig, RunConfig, StateKind, VonNeumannConfig,
};
pub use output::{emit_report, read_intensity_csv, SUMMARY_FILE};
