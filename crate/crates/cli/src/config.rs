//! TOML configuration file.
//!
//! ```toml
//! seed = 7                     # master seed, default 0
//!
//! [lattice]
//! L = 24                       # even, at least 6; default 24
//! boundary = "periodic"        # or "open"; default periodic
//!
//! [mix]
//! p1 = 0.5                     # default 0.5
//! p2 = 0.0                     # default 0.0
//!
//! [schedule]                   # all counts in units of L² checks
//! total_steps_factor = 100
//! burn_in_factor = 50
//! sample_stride_factor = 1
//! n_runs = 32
//!
//! [output]
//! directory = "."              # default current directory
//! formats = ["csv"]            # any of "csv", "pgm", "svg"
//!
//! [sweep]                      # needed by `sweep` only
//! L_list = [12, 24]
//! p1_list = [0.4, 0.5]
//! p2_list = [0.0]
//! ```
//!
//! Unknown keys are rejected. Every section and key is optional.

use std::path::{Path, PathBuf};

use bacon_circuit::ensemble::{GridPoint, RunConfig, Schedule};
use bacon_circuit::lattice::{Boundary, LatticeSpec, MixChances, MIN_L};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    #[serde(rename = "L", default = "default_l")]
    pub l: usize,
    #[serde(default)]
    pub boundary: Boundary,
}

fn default_l() -> usize {
    24
}

impl Default for LatticeSection {
    fn default() -> Self {
        Self { l: default_l(), boundary: Boundary::Periodic }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixSection {
    #[serde(default = "half")]
    pub p1: f64,
    #[serde(default)]
    pub p2: f64,
}

fn half() -> f64 {
    0.5
}

impl Default for MixSection {
    fn default() -> Self {
        Self { p1: 0.5, p2: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleSection {
    pub total_steps_factor: u32,
    pub burn_in_factor: u32,
    pub sample_stride_factor: u32,
    pub n_runs: usize,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        let s = Schedule::default();
        Self {
            total_steps_factor: s.total_steps_factor,
            burn_in_factor: s.burn_in_factor,
            sample_stride_factor: s.sample_stride_factor,
            n_runs: s.n_runs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Pgm,
    Svg,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: PathBuf::from("."), formats: vec![Format::Csv] }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(rename = "L_list")]
    pub l_list: Vec<usize>,
    pub p1_list: Vec<f64>,
    pub p2_list: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub lattice: LatticeSection,
    #[serde(default)]
    pub mix: MixSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub output: OutputSection,
    pub sweep: Option<SweepSection>,
}

/// A parsed configuration plus the text it came from, for echoing.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: Config,
    pub source: String,
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("invalid config key `{key}`: {msg}"))
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, CliError> {
        let config: Config = toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {}", e.message())))?;
        config.validate()?;
        Ok(config)
    }

    /// Checks every value; errors name the offending key.
    pub fn validate(&self) -> Result<(), CliError> {
        check_l("lattice.L", self.lattice.l)?;
        check_p("mix.p1", self.mix.p1)?;
        check_p("mix.p2", self.mix.p2)?;
        let s = &self.schedule;
        if s.n_runs == 0 {
            return Err(invalid("schedule.n_runs", "must be at least 1"));
        }
        if s.sample_stride_factor == 0 {
            return Err(invalid("schedule.sample_stride_factor", "must be at least 1"));
        }
        if s.burn_in_factor >= s.total_steps_factor {
            return Err(invalid("schedule.burn_in_factor", "must be below total_steps_factor"));
        }
        if let Some(sw) = &self.sweep {
            for (key, list) in [("sweep.p1_list", &sw.p1_list), ("sweep.p2_list", &sw.p2_list)] {
                if list.is_empty() {
                    return Err(invalid(key, "must not be empty"));
                }
                for &p in list {
                    check_p(key, p)?;
                }
            }
            if sw.l_list.is_empty() {
                return Err(invalid("sweep.L_list", "must not be empty"));
            }
            for &l in &sw.l_list {
                check_l("sweep.L_list", l)?;
            }
        }
        Ok(())
    }

    pub fn schedule(&self) -> Schedule {
        let s = &self.schedule;
        Schedule {
            total_steps_factor: s.total_steps_factor,
            burn_in_factor: s.burn_in_factor,
            sample_stride_factor: s.sample_stride_factor,
            n_runs: s.n_runs,
        }
    }

    /// Configuration carrying the raw master seed; grid points derive their
    /// own seeds from it.
    pub fn template(&self) -> Result<RunConfig, CliError> {
        let lattice = LatticeSpec::new(self.lattice.l, self.lattice.boundary).map_err(|e| invalid("lattice.L", e))?;
        let mix = MixChances::new(self.mix.p1, self.mix.p2).map_err(|e| invalid("mix", e))?;
        RunConfig::new(lattice, mix, self.schedule(), self.seed).map_err(|e| invalid("schedule", e))
    }

    /// Run configuration for the single configured point, seeded exactly as
    /// the same point of a sweep.
    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        self.template()?.at_point(&self.point()).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn point(&self) -> GridPoint {
        GridPoint { l: self.lattice.l, p1: self.mix.p1, p2: self.mix.p2 }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}

fn check_l(key: &str, l: usize) -> Result<(), CliError> {
    if !l.is_multiple_of(2) {
        return Err(invalid(key, format!("L must be even (got {l})")));
    }
    if l < MIN_L {
        return Err(invalid(key, format!("L must be at least {MIN_L} (got {l})")));
    }
    Ok(())
}

fn check_p(key: &str, p: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(key, format!("probability must lie in [0, 1] (got {p})")));
    }
    Ok(())
}

impl LoadedConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Ok(Self { config: Config::parse(&source)?, source })
    }

    pub fn defaults() -> Self {
        Self { config: Config::default(), source: String::new() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = Config::parse("").unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.lattice.l, 24);
        assert_eq!(c.schedule.n_runs, 32);
    }

    #[test]
    fn full_file_parses() {
        let c = Config::parse(
            r#"
            seed = 9
            [lattice]
            L = 12
            boundary = "open"
            [mix]
            p1 = 0.25
            p2 = 0.1
            [schedule]
            n_runs = 4
            [output]
            directory = "out"
            formats = ["csv", "svg"]
            [sweep]
            L_list = [12]
            p1_list = [0.4, 0.5]
            p2_list = [0.0]
            "#,
        )
        .unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.lattice.boundary, Boundary::Open);
        assert!(c.wants(Format::Svg) && !c.wants(Format::Pgm));
        assert_eq!(c.sweep.unwrap().p1_list, vec![0.4, 0.5]);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = Config::parse("[mix]\np3 = 0.1\n").unwrap_err().to_string();
        assert!(err.contains("p3"), "{err}");
    }

    #[test]
    fn odd_l_rejected() {
        let err = Config::parse("[lattice]\nL = 13\n").unwrap_err().to_string();
        assert!(err.contains("L must be even") && err.contains("lattice.L"), "{err}");
    }

    #[test]
    fn bad_probability_names_key() {
        let err = Config::parse("[mix]\np2 = 1.5\n").unwrap_err().to_string();
        assert!(err.contains("mix.p2"), "{err}");
        let err = Config::parse("[sweep]\nL_list=[12]\np1_list=[2.0]\np2_list=[0.0]\n").unwrap_err().to_string();
        assert!(err.contains("sweep.p1_list"), "{err}");
    }
}
