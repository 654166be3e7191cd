//! Run configuration: a versioned JSON document naming one experiment and
//! the physical sections it needs.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qsim_core::{DetectorModel, EmitterParams, HomConfig, ModulatorConfig, Polarization};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Hbt,
    Lifetime,
    Spectrum,
    Hom,
    BesselSweep,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Hbt => "hbt",
            Experiment::Lifetime => "lifetime",
            Experiment::Spectrum => "spectrum",
            Experiment::Hom => "hom",
            Experiment::BesselSweep => "bessel-sweep",
        }
    }

    fn stochastic(self) -> bool {
        matches!(self, Experiment::Hbt | Experiment::Lifetime | Experiment::Hom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TagFormat {
    #[default]
    Binary,
    Csv,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Relative to the working directory.
    pub output_dir: PathBuf,
    #[serde(default)]
    pub tag_format: TagFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emitter: Option<EmitterSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulator: Option<ModulatorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hom: Option<HomSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbt: Option<HbtSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetime: Option<LifetimeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterSection {
    pub lifetime_ps: f64,
    #[serde(default = "one")]
    pub rabi_over_decay: f64,
    /// Total coherence decay rate over the population decay rate.
    #[serde(default = "one")]
    pub dephasing_over_decay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    #[serde(default)]
    pub jitter_ps: f64,
    #[serde(default)]
    pub dead_time_ps: u64,
    #[serde(default = "one")]
    pub efficiency: f64,
    #[serde(default)]
    pub dark_rate_hz: f64,
}

impl Default for DetectorSection {
    fn default() -> Self {
        DetectorSection {
            jitter_ps: 0.0,
            dead_time_ps: 0,
            efficiency: 1.0,
            dark_rate_hz: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulatorSection {
    #[serde(default)]
    pub modulation_index: f64,
    pub drive_ghz: f64,
    #[serde(default)]
    pub drive_phase: f64,
    #[serde(default = "hundred")]
    pub source_linewidth_mhz: f64,
    #[serde(default = "hundred")]
    pub etalon_linewidth_mhz: f64,
    /// Highest sideband order in the comb fits.
    #[serde(default = "default_max_order")]
    pub max_order: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomSection {
    #[serde(default = "default_arm_delay")]
    pub arm_delay_ps: f64,
    pub mode_overlap: f64,
    pub coherence_time_ps: f64,
    #[serde(default = "default_pairs")]
    pub pairs: u64,
    #[serde(default = "default_bin")]
    pub bin_ps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HbtSection {
    #[serde(default = "default_photons")]
    pub photons: u64,
    #[serde(default = "default_bin")]
    pub bin_ps: u64,
    #[serde(default = "default_hbt_window")]
    pub window_ps: u64,
}

impl Default for HbtSection {
    fn default() -> Self {
        HbtSection {
            photons: default_photons(),
            bin_ps: default_bin(),
            window_ps: default_hbt_window(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifetimeSection {
    #[serde(default = "default_pulses")]
    pub pulses: u64,
    #[serde(default = "default_period")]
    pub period_ps: u64,
    #[serde(default = "default_lifetime_bin")]
    pub bin_ps: u64,
    #[serde(default = "default_lifetime_window")]
    pub window_ps: u64,
    /// Start of the fitted tail; filled in from the detector jitter when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_start_ps: Option<f64>,
}

impl Default for LifetimeSection {
    fn default() -> Self {
        LifetimeSection {
            pulses: default_pulses(),
            period_ps: default_period(),
            bin_ps: default_lifetime_bin(),
            window_ps: default_lifetime_window(),
            fit_start_ps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub beta_min: f64,
    #[serde(default = "pi")]
    pub beta_max: f64,
    #[serde(default = "default_beta_step")]
    pub beta_step: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            beta_min: 0.0,
            beta_max: PI,
            beta_step: default_beta_step(),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn hundred() -> f64 {
    100.0
}
fn pi() -> f64 {
    PI
}
fn default_max_order() -> u32 {
    8
}
fn default_arm_delay() -> f64 {
    qsim_core::optics::DEFAULT_ARM_DELAY_PS
}
fn default_pairs() -> u64 {
    1_000_000
}
fn default_bin() -> u64 {
    64
}
fn default_photons() -> u64 {
    1_000_000
}
fn default_hbt_window() -> u64 {
    20_000
}
fn default_pulses() -> u64 {
    1_000_000
}
// 80 MHz repetition
fn default_period() -> u64 {
    12_500
}
fn default_lifetime_bin() -> u64 {
    16
}
fn default_lifetime_window() -> u64 {
    6_000
}
fn default_beta_step() -> f64 {
    0.1
}

/// Reads and parses a config; type errors carry the JSON path of the field.
pub fn load(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> CliResult<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Validation(inner.to_string())
        } else {
            CliError::field(&path, inner)
        }
    })?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(CliError::field(
            "schema_version",
            format!("unsupported version {} (expected {SCHEMA_VERSION})", cfg.schema_version),
        ));
    }
    Ok(cfg)
}

fn need<'a, T>(section: &'a Option<T>, name: &str, exp: Experiment) -> CliResult<&'a T> {
    section
        .as_ref()
        .ok_or_else(|| CliError::field(name, format!("section is required for experiment {}", exp.name())))
}

fn positive(field: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::field(field, format!("must be finite and > 0, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(CliError::field(field, format!("must be finite and >= 0, got {v}")))
    }
}

fn unit_interval(field: &str, v: f64) -> CliResult<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(CliError::field(field, format!("must lie in [0, 1], got {v}")))
    }
}

fn at_least(field: &str, v: u64, min: u64) -> CliResult<()> {
    if v >= min {
        Ok(())
    } else {
        Err(CliError::field(field, format!("must be >= {min}, got {v}")))
    }
}

impl RunConfig {
    /// Checks section presence and field domains, then fills the defaulted
    /// sections so the result can be written out as the effective config.
    pub fn resolve(mut self) -> CliResult<RunConfig> {
        let exp = self.experiment;
        if exp.stochastic() && self.seed.is_none() {
            return Err(CliError::field("seed", format!("required for experiment {}", exp.name())));
        }
        match exp {
            Experiment::Hbt => {
                need(&self.emitter, "emitter", exp)?;
                self.detector.get_or_insert_with(Default::default);
                self.hbt.get_or_insert_with(Default::default);
            }
            Experiment::Lifetime => {
                need(&self.emitter, "emitter", exp)?;
                let jitter = self.detector.get_or_insert_with(Default::default).jitter_ps;
                let l = self.lifetime.get_or_insert_with(Default::default);
                if l.fit_start_ps.is_none() {
                    l.fit_start_ps = Some(4.0 * jitter + l.bin_ps as f64);
                }
            }
            Experiment::Spectrum => {
                need(&self.modulator, "modulator", exp)?;
            }
            Experiment::Hom => {
                need(&self.emitter, "emitter", exp)?;
                need(&self.hom, "hom", exp)?;
                self.detector.get_or_insert_with(Default::default);
            }
            Experiment::BesselSweep => {
                need(&self.modulator, "modulator", exp)?;
                self.sweep.get_or_insert_with(Default::default);
            }
        }
        self.check_fields()?;
        Ok(self)
    }

    fn check_fields(&self) -> CliResult<()> {
        if self.output_dir.as_os_str().is_empty() {
            return Err(CliError::field("output_dir", "must not be empty"));
        }
        if let Some(e) = &self.emitter {
            positive("emitter.lifetime_ps", e.lifetime_ps)?;
            non_negative("emitter.rabi_over_decay", e.rabi_over_decay)?;
            non_negative("emitter.dephasing_over_decay", e.dephasing_over_decay)?;
        }
        if let Some(d) = &self.detector {
            non_negative("detector.jitter_ps", d.jitter_ps)?;
            unit_interval("detector.efficiency", d.efficiency)?;
            non_negative("detector.dark_rate_hz", d.dark_rate_hz)?;
        }
        if let Some(m) = &self.modulator {
            non_negative("modulator.modulation_index", m.modulation_index)?;
            positive("modulator.drive_ghz", m.drive_ghz)?;
            if !m.drive_phase.is_finite() {
                return Err(CliError::field("modulator.drive_phase", "must be finite"));
            }
            positive("modulator.source_linewidth_mhz", m.source_linewidth_mhz)?;
            positive("modulator.etalon_linewidth_mhz", m.etalon_linewidth_mhz)?;
            at_least("modulator.max_order", m.max_order as u64, 1)?;
        }
        if let Some(h) = &self.hom {
            positive("hom.arm_delay_ps", h.arm_delay_ps)?;
            unit_interval("hom.mode_overlap", h.mode_overlap)?;
            positive("hom.coherence_time_ps", h.coherence_time_ps)?;
            at_least("hom.pairs", h.pairs, 1)?;
            at_least("hom.bin_ps", h.bin_ps, 1)?;
        }
        if let Some(h) = &self.hbt {
            at_least("hbt.photons", h.photons, 1)?;
            at_least("hbt.bin_ps", h.bin_ps, 1)?;
            at_least("hbt.window_ps", h.window_ps, h.bin_ps)?;
        }
        if let Some(l) = &self.lifetime {
            at_least("lifetime.pulses", l.pulses, 1)?;
            at_least("lifetime.bin_ps", l.bin_ps, 1)?;
            at_least("lifetime.window_ps", l.window_ps, l.bin_ps)?;
            if 2 * l.window_ps >= l.period_ps {
                return Err(CliError::field(
                    "lifetime.window_ps",
                    format!("must be below half the period ({} ps)", l.period_ps),
                ));
            }
            if let Some(s) = l.fit_start_ps {
                non_negative("lifetime.fit_start_ps", s)?;
                if s >= l.window_ps as f64 {
                    return Err(CliError::field("lifetime.fit_start_ps", "must lie inside the window"));
                }
            }
        }
        if let Some(s) = &self.sweep {
            non_negative("sweep.beta_min", s.beta_min)?;
            positive("sweep.beta_step", s.beta_step)?;
            if !(s.beta_max.is_finite() && s.beta_max >= s.beta_min) {
                return Err(CliError::field("sweep.beta_max", "must be finite and >= beta_min"));
            }
        }
        Ok(())
    }

    pub fn emitter_params(&self) -> CliResult<EmitterParams> {
        let e = need(&self.emitter, "emitter", self.experiment)?;
        EmitterParams::from_lifetime(e.lifetime_ps * 1e-12, e.rabi_over_decay, e.dephasing_over_decay)
            .map_err(|err| CliError::from(err).context("emitter"))
    }

    pub fn detector_model(&self) -> DetectorModel {
        let d = self.detector.clone().unwrap_or_default();
        DetectorModel {
            jitter_sigma: d.jitter_ps,
            dead_time: d.dead_time_ps,
            efficiency: d.efficiency,
            dark_rate: d.dark_rate_hz,
        }
    }

    pub fn modulator_config(&self) -> Option<CliResult<ModulatorConfig>> {
        self.modulator.as_ref().map(|m| {
            ModulatorConfig::new(m.modulation_index, m.drive_ghz * 1e9, m.drive_phase)
                .map_err(|err| CliError::from(err).context("modulator"))
        })
    }

    pub fn hom_config(&self, polarization: Polarization) -> CliResult<HomConfig> {
        let h = need(&self.hom, "hom", self.experiment)?;
        Ok(HomConfig {
            arm_delay: h.arm_delay_ps,
            mode_overlap: h.mode_overlap,
            coherence_time: h.coherence_time_ps * 1e-12,
            polarization,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}
