//! Time-domain delay-line oracle.
//!
//! Each device is stepped in the carrier-rotating frame with a fixed step
//! `dt = t_d / P`. The ring is an exact `P`-sample circular buffer, the
//! coupler acts instantaneously, and the round-trip factor
//! `α·e^{i·loop_phase}·(drive)` is applied as the field enters the delay
//! line, so the buffer output at time `t` carries the drive value of
//! `t - t_d`. After the transient has decayed the output is projected onto
//! `e^{-inΩt}` over an integer number of RF periods. The RF period must be an
//! integer number of steps, so the projection has no leakage.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::cmmr::CmmrParams;
use crate::device::Device;
use crate::error::{Error, Result};
use crate::harmonic::{ComplexSpectrum, HarmonicWindow};

/// Absolute floor of the relative-error denominator in [`cross_validate`].
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-15;

/// Sidebands weaker than this fraction of the strongest compared sideband
/// (160 dB down) are compared on an absolute scale.
pub const DEFAULT_PEAK_FLOOR: f64 = 1e-8;

/// Transient decays to `e^{-SETTLE_E_FOLDS}` of its start before sampling.
const SETTLE_E_FOLDS: f64 = 30.0;

const COMMENSURATE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TdConfig {
    /// `P`; the time step is `t_d / P`. For the delay-free MZI it is `T_RF / P`.
    pub samples_per_round_trip: usize,
    /// `K`, discarded round trips.
    pub settle_round_trips: usize,
    /// `Q`, RF periods in the analysis window.
    pub analysis_rf_periods: usize,
}

impl TdConfig {
    pub const MIN_SAMPLES_PER_ROUND_TRIP: usize = 64;

    /// Smallest `K` that settles `device` with the given `P` and `Q`.
    pub fn for_device(device: &Device, samples_per_round_trip: usize, analysis_rf_periods: usize) -> Result<Self> {
        let config = Self {
            samples_per_round_trip,
            settle_round_trips: required_settle_round_trips(device)?,
            analysis_rf_periods,
        };
        config.validate(device)?;
        Ok(config)
    }

    pub fn validate(&self, device: &Device) -> Result<()> {
        if self.samples_per_round_trip < Self::MIN_SAMPLES_PER_ROUND_TRIP {
            return Err(Error::Config(format!(
                "samples_per_round_trip {} below {}",
                self.samples_per_round_trip,
                Self::MIN_SAMPLES_PER_ROUND_TRIP
            )));
        }
        if self.analysis_rf_periods == 0 {
            return Err(Error::Config("analysis window needs at least one RF period".into()));
        }
        let need = required_settle_round_trips(device)?;
        if self.settle_round_trips < need {
            return Err(Error::Config(format!(
                "settle_round_trips {} below the {need} required for this device",
                self.settle_round_trips
            )));
        }
        Ok(())
    }

    pub fn time_step(&self, device: &Device) -> f64 {
        match device.delay_s() {
            Some(td) => td / self.samples_per_round_trip as f64,
            None => 1.0 / (device.rf_frequency_hz() * self.samples_per_round_trip as f64),
        }
    }
}

/// Geometric-mean magnitude of the round-trip gain over one RF period.
pub fn loop_gain(device: &Device) -> f64 {
    fn cmmr_gain(p: &CmmrParams) -> f64 {
        let samples = 4096;
        let mean_log = (0..samples)
            .map(|j| {
                let u = TAU * j as f64 / samples as f64;
                (p.bias_phase / 2.0 + p.beta * u.cos()).cos().abs().ln()
            })
            .sum::<f64>()
            / samples as f64;
        p.alpha * mean_log.exp()
    }
    match device {
        Device::Fmmr(p) => p.alpha * p.rho,
        Device::Cmmr(p) => cmmr_gain(p),
        Device::Dcmmr(p) => cmmr_gain(&p.ring1).max(cmmr_gain(&p.ring2)),
        Device::Mzi(_) => 0.0,
    }
}

/// `ceil(30 / (1 - g))` round trips for loop gain `g`.
pub fn required_settle_round_trips(device: &Device) -> Result<usize> {
    let g = loop_gain(device);
    if !(g < 1.0) {
        return Err(Error::Config(format!(
            "loop gain {g} does not decay; the time-domain oracle cannot settle"
        )));
    }
    Ok((SETTLE_E_FOLDS / (1.0 - g)).ceil() as usize)
}

/// Samples per RF period for `f` at step `dt`, or a configuration error naming the nearest
/// commensurate frequency.
pub fn samples_per_rf_period(rf_frequency_hz: f64, dt: f64) -> Result<usize> {
    let snapped = snap_frequency(rf_frequency_hz, dt)?;
    if (snapped - rf_frequency_hz).abs() > COMMENSURATE_TOLERANCE * rf_frequency_hz {
        return Err(Error::Config(format!(
            "f_RF = {rf_frequency_hz:.9e} Hz is not commensurate with dt = {dt:.6e} s; nearest commensurate frequency is {snapped:.9e} Hz"
        )));
    }
    Ok((1.0 / (rf_frequency_hz * dt)).round() as usize)
}

/// Nearest frequency whose period is an integer number (≥ 2) of steps `dt`.
pub fn snap_frequency(rf_frequency_hz: f64, dt: f64) -> Result<f64> {
    if !(rf_frequency_hz > 0.0) || !(dt > 0.0) {
        return Err(Error::Config("RF frequency and time step must be positive".into()));
    }
    let q = (1.0 / (rf_frequency_hz * dt)).round().max(2.0);
    Ok(1.0 / (q * dt))
}

/// Steady-state output samples of one time-domain run.
#[derive(Clone, Debug, PartialEq)]
pub struct TdRun {
    pub samples: Vec<Complex64>,
    /// Absolute step index of `samples[0]`.
    pub start_index: usize,
    pub samples_per_rf_period: usize,
    pub dt: f64,
    pub rf_frequency_hz: f64,
}

struct RingLine {
    buffer: Vec<Complex64>,
    gain: Complex64,
}

impl RingLine {
    fn new(len: usize, alpha: f64, loop_phase: f64) -> Self {
        Self {
            buffer: vec![Complex64::new(0.0, 0.0); len],
            gain: Complex64::from_polar(alpha, loop_phase),
        }
    }
}

fn cmmr_step(line: &mut RingLine, slot: usize, p: &CmmrParams, drive: f64, a: Complex64) -> Complex64 {
    let c = line.buffer[slot];
    let theta = p.bias_phase / 2.0 + p.beta * drive;
    let (s, k) = theta.sin_cos();
    let cross = Complex64::new(0.0, -s);
    let b = k * c + cross * a;
    line.buffer[slot] = line.gain * b;
    k * a + cross * c
}

/// Runs `device` for `K` round trips plus `Q` RF periods and keeps the last `Q` periods.
pub fn simulate_device_td(device: &Device, config: &TdConfig) -> Result<TdRun> {
    config.validate(device)?;
    let f = device.rf_frequency_hz();
    let dt = config.time_step(device);
    let q = samples_per_rf_period(f, dt)?;
    let p_len = config.samples_per_round_trip;
    let settle = match device {
        Device::Mzi(_) => 0,
        _ => config.settle_round_trips * p_len,
    };
    let total = settle + config.analysis_rf_periods * q;
    let a = Complex64::new(1.0, 0.0);
    // exact periodic phase u_j = 2π·(j mod q)/q
    let drive_at = |j: usize, rf_phase: f64| (TAU * (j % q) as f64 / q as f64 + rf_phase).cos();
    let mut samples = Vec::with_capacity(total - settle);

    match device {
        Device::Fmmr(p) => {
            p.validate()?;
            let mut line = RingLine::new(p_len, p.alpha, p.loop_phase);
            let i_tau = Complex64::new(0.0, p.tau);
            for j in 0..total {
                let slot = j % p_len;
                let c = line.buffer[slot];
                let b = p.rho * c + i_tau * a;
                let d = p.rho * a + i_tau * c;
                let m = Complex64::from_polar(1.0, p.beta * drive_at(j, p.rf_phase));
                line.buffer[slot] = line.gain * m * b;
                if j >= settle {
                    samples.push(d);
                }
            }
        }
        Device::Cmmr(p) => {
            p.validate()?;
            let mut line = RingLine::new(p_len, p.alpha, p.loop_phase);
            for j in 0..total {
                let d = cmmr_step(&mut line, j % p_len, p, drive_at(j, p.rf_phase), a);
                if j >= settle {
                    samples.push(d);
                }
            }
        }
        Device::Dcmmr(p) => {
            p.validate()?;
            let mut l1 = RingLine::new(p_len, p.ring1.alpha, p.ring1.loop_phase);
            let mut l2 = RingLine::new(p_len, p.ring2.alpha, p.ring2.loop_phase);
            let split = a / 2f64.sqrt();
            let combine = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, p.combine_phase);
            for j in 0..total {
                let slot = j % p_len;
                let d1 = cmmr_step(&mut l1, slot, &p.ring1, drive_at(j, p.ring1.rf_phase), split);
                let d2 = cmmr_step(&mut l2, slot, &p.ring2, drive_at(j, p.ring2.rf_phase), split);
                if j >= settle {
                    samples.push(d1 / 2f64.sqrt() + combine * d2);
                }
            }
        }
        Device::Mzi(p) => {
            p.validate()?;
            for j in 0..total {
                let theta = p.bias_phase / 2.0 + p.beta * drive_at(j, p.rf_phase);
                samples.push(Complex64::new(0.0, -theta.sin()) * a);
            }
        }
    }
    Ok(TdRun {
        samples,
        start_index: settle,
        samples_per_rf_period: q,
        dt,
        rf_frequency_hz: f,
    })
}

/// Projects the run onto `e^{-inΩt}`, `|n| <= window.order()`.
pub fn dft_harmonics(run: &TdRun, window: HarmonicWindow) -> Result<ComplexSpectrum> {
    let q = run.samples_per_rf_period;
    if q == 0 || run.samples.is_empty() || run.samples.len() % q != 0 {
        return Err(Error::shape(format!(
            "{} samples is not a whole number of {q}-sample RF periods",
            run.samples.len()
        )));
    }
    let twiddle: Vec<Complex64> = (0..q)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / q as f64))
        .collect();
    let s = run.samples.len() as f64;
    let amplitudes = window
        .indices()
        .map(|n| {
            let step = n.rem_euclid(q as i64) as usize;
            let mut idx = (run.start_index % q) * step % q;
            let mut acc = Complex64::new(0.0, 0.0);
            for v in &run.samples {
                acc += v * twiddle[idx];
                idx += step;
                if idx >= q {
                    idx -= q;
                }
            }
            acc / s
        })
        .collect();
    ComplexSpectrum::new(window, amplitudes, TAU * run.rf_frequency_hz)
}

/// Frequency-domain vs time-domain comparison of the output sidebands `|n| <= 3`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossValidation {
    pub snapped_frequency_hz: f64,
    pub max_relative_error: f64,
    /// `(n, relative error)` for `n = -3..=3`.
    pub per_harmonic: Vec<(i64, f64)>,
    pub frequency_domain: ComplexSpectrum,
    pub time_domain: ComplexSpectrum,
}

pub const CROSS_VALIDATED_HARMONICS: i64 = 3;

/// Snaps the device frequency to the time grid, solves both ways and compares.
///
/// Relative error is `|fd - td| / max(|td|, floor)`. A sideband that is zero by
/// symmetry has no meaningful relative error, so `floor` scales with the
/// largest compared sideband: `floor = max(RELATIVE_ERROR_FLOOR, peak_floor·max|td|)`.
/// [`DEFAULT_PEAK_FLOOR`] is the usual choice.
pub fn cross_validate(
    device: &Device,
    window: HarmonicWindow,
    config: &TdConfig,
    peak_floor: f64,
) -> Result<CrossValidation> {
    let dt = config.time_step(device);
    let snapped = match device {
        Device::Mzi(_) => device.rf_frequency_hz(),
        _ => snap_frequency(device.rf_frequency_hz(), dt)?,
    };
    let dev = device.with_rf_frequency(snapped);
    let fd = dev.solve(window)?;
    let run = simulate_device_td(&dev, config)?;
    let td = dft_harmonics(&run, window)?;
    let peak = (-CROSS_VALIDATED_HARMONICS..=CROSS_VALIDATED_HARMONICS)
        .map(|n| td.get(n).norm())
        .fold(0.0, f64::max);
    let floor = RELATIVE_ERROR_FLOOR.max(peak_floor * peak);
    let per_harmonic: Vec<(i64, f64)> = (-CROSS_VALIDATED_HARMONICS..=CROSS_VALIDATED_HARMONICS)
        .map(|n| {
            let t = td.get(n);
            (n, (fd.get(n) - t).norm() / t.norm().max(floor))
        })
        .collect();
    let max_relative_error = per_harmonic.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(CrossValidation {
        snapped_frequency_hz: snapped,
        max_relative_error,
        per_harmonic,
        frequency_domain: fd,
        time_domain: td,
    })
}
