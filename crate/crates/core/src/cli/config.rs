//! Run configuration: presets, overrides, sweep axis and resolution to a concrete device.
//!
//! Config files are JSON with flat keys named after the command-line flags
//! (`t_d` for `--t-d`). A CSV written by `run` can be used as a config file
//! too: its `# config:` header line holds the fully resolved configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CliError, CliResult};
use crate::device::{Device, DeviceKind, DEFAULT_MAX_ORDER};
use crate::harmonic::DEFAULT_ORDER;

/// Field sidebands `|n| <= DEFAULT_HARMONICS` are written by default.
pub const DEFAULT_HARMONICS: usize = 3;

/// Prefix of the header line that carries the resolved configuration.
pub const CONFIG_LINE_PREFIX: &str = "# config: ";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// α = 0.98, ρ = 0.97, t_d = 2 ps, β = 0.0942; FMMR 6 GHz detuned, CMMR/DCMMR bias 0.12, MZI quadrature.
    Paper,
    /// The `paper` preset with every ring lossless (α = 1).
    LosslessUnitarity,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::Paper, Preset::LosslessUnitarity];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Paper => "paper",
            Preset::LosslessUnitarity => "lossless-unitarity",
        }
    }

    /// Preset device at `rf_frequency_hz`.
    pub fn device(&self, kind: DeviceKind, rf_frequency_hz: f64) -> Device {
        let d = Device::paper(kind, rf_frequency_hz);
        match self {
            Preset::Paper => d,
            Preset::LosslessUnitarity => d.lossless(),
        }
    }
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| CliError::config(format!("unknown preset '{s}' (expected paper or lossless-unitarity)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    /// RF frequency, Hz.
    Frequency,
    /// The device bias knob, rad: FMMR loop phase, CMMR/DCMMR coupler bias, MZI bias.
    Bias,
    /// Modulation depth β, rad.
    Drive,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Frequency => "frequency",
            SweepAxis::Bias => "bias",
            SweepAxis::Drive => "drive",
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            SweepAxis::Frequency => "Hz",
            SweepAxis::Bias | SweepAxis::Drive => "rad",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// `AXIS START..STOP [points=N] [spacing=linear|log]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl SweepSpec {
    pub fn new(axis: SweepAxis, start: f64, stop: f64, points: usize, spacing: Spacing) -> CliResult<Self> {
        let spec = Self {
            axis,
            start,
            stop,
            points,
            spacing,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> CliResult<()> {
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(CliError::config("sweep bounds must be finite"));
        }
        if self.points == 0 {
            return Err(CliError::config("sweep needs at least one point"));
        }
        if self.points > 1 && !(self.start < self.stop) {
            return Err(CliError::config(format!(
                "sweep start {} must be below stop {}",
                self.start, self.stop
            )));
        }
        if self.spacing == Spacing::Log && !(self.start > 0.0) {
            return Err(CliError::config("log spacing needs a positive start"));
        }
        Ok(())
    }

    /// Sweep points; the first and last equal `start` and `stop` exactly.
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == last {
                    return self.stop;
                }
                let t = i as f64 / last as f64;
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * t,
                    Spacing::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

impl fmt::Display for SweepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let spacing = match self.spacing {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        };
        write!(
            f,
            "{} {}..{} points={} spacing={}",
            self.axis.name(),
            self.start,
            self.stop,
            self.points,
            spacing
        )
    }
}

impl FromStr for SweepSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let mut tokens = s.split_whitespace();
        let axis = match tokens.next() {
            Some("frequency") => SweepAxis::Frequency,
            Some("bias") => SweepAxis::Bias,
            Some("drive") => SweepAxis::Drive,
            other => {
                return Err(CliError::config(format!(
                    "sweep axis {other:?} is not one of frequency, bias, drive"
                )))
            }
        };
        let range = tokens
            .next()
            .ok_or_else(|| CliError::config("sweep needs a START..STOP range"))?;
        let (a, b) = range
            .split_once("..")
            .ok_or_else(|| CliError::config(format!("sweep range '{range}' is not START..STOP")))?;
        let start = parse_si(a).map_err(CliError::config)?;
        let stop = parse_si(b).map_err(CliError::config)?;
        let mut points = 1;
        let mut spacing = Spacing::Linear;
        for tok in tokens {
            match tok.split_once('=') {
                Some(("points", v)) => {
                    points = v
                        .parse()
                        .map_err(|_| CliError::config(format!("points '{v}' is not a count")))?
                }
                Some(("spacing", "linear")) => spacing = Spacing::Linear,
                Some(("spacing", "log")) => spacing = Spacing::Log,
                _ => return Err(CliError::config(format!("unrecognized sweep option '{tok}'"))),
            }
        }
        Self::new(axis, start, stop, points, spacing)
    }
}

impl TryFrom<String> for SweepSpec {
    type Error = CliError;

    fn try_from(s: String) -> CliResult<Self> {
        s.parse()
    }
}

impl From<SweepSpec> for String {
    fn from(s: SweepSpec) -> String {
        s.to_string()
    }
}

/// Parses a number with an optional SI suffix (`p n u m k M G T`), e.g. `5G`, `2p`, `1.5e9`.
pub fn parse_si(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (body, scale) = match s.chars().last() {
        Some('p') => (&s[..s.len() - 1], 1e-12),
        Some('n') => (&s[..s.len() - 1], 1e-9),
        Some('u') => (&s[..s.len() - 1], 1e-6),
        Some('m') => (&s[..s.len() - 1], 1e-3),
        Some('k') => (&s[..s.len() - 1], 1e3),
        Some('M') => (&s[..s.len() - 1], 1e6),
        Some('G') => (&s[..s.len() - 1], 1e9),
        Some('T') => (&s[..s.len() - 1], 1e12),
        _ => (s, 1.0),
    };
    let v: f64 = body.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(if scale == 1.0 { v } else { v * scale })
}

/// Everything a `run` needs. All fields are optional so that a config file and
/// command-line flags can be merged; [`RunConfig::resolve`] fills the rest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<DeviceKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fsr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rf_phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rf_phase_offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combine_phase: Option<f64>,
    /// Fixed RF frequency for bias and drive sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonics: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_check: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

macro_rules! merge_fields {
    ($base:expr, $over:expr, $($f:ident),*) => {
        RunConfig { $($f: $over.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid config JSON: {e}")))
    }

    /// Reads a JSON config, or the `# config:` line of a CSV written by `run`.
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        if text.trim_start().starts_with('{') {
            return Self::from_json(&text);
        }
        let lines: Vec<&str> = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .filter_map(|l| l.strip_prefix(CONFIG_LINE_PREFIX))
            .collect();
        match lines.as_slice() {
            [json] => Self::from_json(json),
            [] => Err(CliError::config(format!(
                "{} is neither JSON nor a CSV with a config header",
                path.display()
            ))),
            _ => Err(CliError::config(format!(
                "{} holds several configurations; pass one of them as JSON",
                path.display()
            ))),
        }
    }

    /// `overrides` wins wherever it has a value.
    pub fn merged(self, overrides: RunConfig) -> RunConfig {
        merge_fields!(
            self,
            overrides,
            device,
            preset,
            alpha,
            rho,
            bias,
            beta,
            t_d,
            fsr,
            rf_phase,
            rf_phase_offset,
            combine_phase,
            frequency,
            sweep,
            order,
            harmonics,
            oracle_check,
            output
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }

    pub fn resolve(&self) -> CliResult<ResolvedRun> {
        let kind = self
            .device
            .ok_or_else(|| CliError::config("no device given (fmmr, cmmr, dcmmr or mzi)"))?;
        let sweep = self.sweep.ok_or_else(|| CliError::config("no sweep given"))?;
        sweep.validate()?;
        let preset = self.preset.unwrap_or(Preset::Paper);

        let conflict = |name: &str| CliError::config(format!("{name} is fixed while sweeping {}", sweep.axis.name()));
        let frequency = match (sweep.axis, self.frequency) {
            (SweepAxis::Frequency, Some(_)) => return Err(conflict("frequency")),
            (SweepAxis::Frequency, None) => sweep.start,
            (_, Some(f)) => f,
            (_, None) => {
                return Err(CliError::config(format!(
                    "a {} sweep needs a fixed --frequency",
                    sweep.axis.name()
                )))
            }
        };
        if sweep.axis == SweepAxis::Bias && self.bias.is_some() {
            return Err(conflict("bias"));
        }
        if sweep.axis == SweepAxis::Drive && self.beta.is_some() {
            return Err(conflict("beta"));
        }
        let t_d = match (self.t_d, self.fsr) {
            (Some(_), Some(_)) => return Err(CliError::config("t_d and fsr are mutually exclusive")),
            (Some(t), None) => Some(t),
            (None, Some(fsr)) if fsr > 0.0 => Some(1.0 / fsr),
            (None, Some(fsr)) => return Err(CliError::config(format!("fsr {fsr} must be positive"))),
            (None, None) => None,
        };

        let mut device = preset.device(kind, frequency);
        if let Some(a) = self.alpha {
            device = set_alpha(device, a)?;
        }
        if let Some(r) = self.rho {
            device = set_rho(device, r)?;
        }
        if let Some(t) = t_d {
            device = set_delay(device, t)?;
        }
        if let Some(b) = self.bias {
            device = device.with_bias(b);
        }
        if let Some(b) = self.beta {
            device = device.with_beta(b);
        }
        if let Some(p) = self.rf_phase {
            device = device.with_rf_phase(p);
        }
        if self.rf_phase_offset.is_some() || self.combine_phase.is_some() {
            device = set_dcmmr_phases(device, self.rf_phase_offset, self.combine_phase)?;
        }

        let order = self.order.unwrap_or(DEFAULT_ORDER);
        if order == 0 || order > DEFAULT_MAX_ORDER {
            return Err(CliError::config(format!("order {order} outside 1..={DEFAULT_MAX_ORDER}")));
        }
        let harmonics = self.harmonics.unwrap_or(DEFAULT_HARMONICS);
        if harmonics > order {
            return Err(CliError::config(format!("harmonics {harmonics} exceeds order {order}")));
        }

        let resolved = ResolvedRun {
            config: echo(kind, preset, &device, sweep, order, harmonics, self.oracle_check.unwrap_or(false)),
            base: device,
            sweep,
            order,
            harmonics,
            oracle_check: self.oracle_check.unwrap_or(false),
            output: self.output.clone(),
        };
        for v in sweep.values() {
            resolved.device_at(v).validate()?;
        }
        Ok(resolved)
    }
}

/// The fully resolved configuration as written to the CSV header; running it again
/// reproduces the same table.
fn echo(
    kind: DeviceKind,
    preset: Preset,
    device: &Device,
    sweep: SweepSpec,
    order: usize,
    harmonics: usize,
    oracle_check: bool,
) -> RunConfig {
    let mut c = RunConfig {
        device: Some(kind),
        preset: Some(preset),
        sweep: Some(sweep),
        order: Some(order),
        harmonics: Some(harmonics),
        oracle_check: Some(oracle_check),
        ..RunConfig::default()
    };
    if sweep.axis != SweepAxis::Bias {
        c.bias = Some(device.bias());
    }
    if sweep.axis != SweepAxis::Drive {
        c.beta = Some(device.beta());
    }
    if sweep.axis != SweepAxis::Frequency {
        c.frequency = Some(device.rf_frequency_hz());
    }
    match device {
        Device::Fmmr(p) => {
            c.alpha = Some(p.alpha);
            c.rho = Some(p.rho);
            c.t_d = Some(p.delay_s);
            c.rf_phase = Some(p.rf_phase);
        }
        Device::Cmmr(p) => {
            c.alpha = Some(p.alpha);
            c.t_d = Some(p.delay_s);
            c.rf_phase = Some(p.rf_phase);
        }
        Device::Dcmmr(p) => {
            c.alpha = Some(p.ring1.alpha);
            c.t_d = Some(p.ring1.delay_s);
            c.rf_phase = Some(p.ring1.rf_phase);
            c.rf_phase_offset = Some(p.rf_phase_offset);
            c.combine_phase = Some(p.combine_phase);
        }
        Device::Mzi(p) => {
            c.rf_phase = Some(p.rf_phase);
        }
    }
    c
}

fn not_applicable(name: &str, device: &Device) -> CliError {
    CliError::config(format!("{name} does not apply to {}", device.kind()))
}

fn set_alpha(device: Device, alpha: f64) -> CliResult<Device> {
    Ok(match device {
        Device::Fmmr(mut p) => {
            p.alpha = alpha;
            Device::Fmmr(p)
        }
        Device::Cmmr(mut p) => {
            p.alpha = alpha;
            Device::Cmmr(p)
        }
        Device::Dcmmr(mut p) => {
            p.ring1.alpha = alpha;
            Device::Dcmmr(p.resynced())
        }
        d @ Device::Mzi(_) => return Err(not_applicable("alpha", &d)),
    })
}

fn set_rho(device: Device, rho: f64) -> CliResult<Device> {
    match device {
        Device::Fmmr(p) => Ok(Device::Fmmr(p.with_rho(rho))),
        d => Err(not_applicable("rho", &d)),
    }
}

fn set_delay(device: Device, delay_s: f64) -> CliResult<Device> {
    Ok(match device {
        Device::Fmmr(mut p) => {
            p.delay_s = delay_s;
            Device::Fmmr(p)
        }
        Device::Cmmr(mut p) => {
            p.delay_s = delay_s;
            Device::Cmmr(p)
        }
        Device::Dcmmr(mut p) => {
            p.ring1.delay_s = delay_s;
            Device::Dcmmr(p.resynced())
        }
        d @ Device::Mzi(_) => return Err(not_applicable("t_d/fsr", &d)),
    })
}

fn set_dcmmr_phases(device: Device, rf_phase_offset: Option<f64>, combine_phase: Option<f64>) -> CliResult<Device> {
    match device {
        Device::Dcmmr(mut p) => {
            p.rf_phase_offset = rf_phase_offset.unwrap_or(p.rf_phase_offset);
            p.combine_phase = combine_phase.unwrap_or(p.combine_phase);
            Ok(Device::Dcmmr(p.resynced()))
        }
        d => Err(not_applicable("rf_phase_offset/combine_phase", &d)),
    }
}

/// A validated run: the base device plus the axis that varies.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedRun {
    pub config: RunConfig,
    pub base: Device,
    pub sweep: SweepSpec,
    /// Requested truncation order; the sweep may raise it.
    pub order: usize,
    pub harmonics: usize,
    pub oracle_check: bool,
    pub output: Option<PathBuf>,
}

impl ResolvedRun {
    pub fn device_at(&self, value: f64) -> Device {
        match self.sweep.axis {
            SweepAxis::Frequency => self.base.with_rf_frequency(value),
            SweepAxis::Bias => self.base.with_bias(value),
            SweepAxis::Drive => self.base.with_beta(value),
        }
    }
}
