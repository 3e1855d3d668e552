//! Square-law detection and linearity metrics.
//!
//! The detected intensity `|E(t)|²` of a sideband field `Σ d_m e^{-imΩt}` has
//! harmonics `I_n = Σ_m conj(d_m)·d_{m+n}` (coefficient of `e^{-inΩt}`),
//! with `I_0 = Σ|d_m|²` and `I_{-n} = conj(I_n)`.
//!
//! Levels are electrical: `20·log10(2|I_n| / P_ref)`, the photocurrent
//! harmonic relative to the current of an unmodulated carrier of power
//! `P_ref` (1 unless stated).

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::composite::MziBaselineParams;
use crate::device::Device;
use crate::error::{Error, Result};
use crate::harmonic::{ComplexSpectrum, HarmonicWindow};

/// Small-signal drive window for intercept fits and IP3 comparisons.
pub const SMALL_SIGNAL_DRIVE: (f64, f64) = (1e-3, 3e-2);

/// Largest per-point deviation from a constrained-slope fit, dB. One-sided
/// compression that tilts a fitted slope by 0.01 across the 29.5 dB window
/// leaves about this much at the window edge.
pub const MAX_FIT_RESIDUAL_DB: f64 = 0.3;

/// Drive at which [`ip3_improvement_vs_mzi`] evaluates the device by default.
pub const DEFAULT_IP3_DRIVE: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq)]
pub struct IntensityHarmonics {
    coefficients: Vec<Complex64>,
}

impl IntensityHarmonics {
    /// `I_0..=I_{n_out}`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn max_harmonic(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `I_n` for any sign of `n` inside the computed range.
    pub fn get(&self, n: i64) -> Option<Complex64> {
        let c = *self.coefficients.get(n.unsigned_abs() as usize)?;
        Some(if n < 0 { c.conj() } else { c })
    }

    /// Average detected power `I_0`.
    pub fn dc(&self) -> f64 {
        self.coefficients[0].re
    }
}

pub fn intensity_harmonics(d: &ComplexSpectrum, n_out: usize) -> Result<IntensityHarmonics> {
    let order = d.window().order();
    if n_out > order {
        return Err(Error::shape(format!(
            "intensity harmonic {n_out} requested from a field window of order {order}"
        )));
    }
    let amps = d.amplitudes();
    let coefficients = (0..=n_out)
        .map(|n| {
            amps.iter()
                .zip(&amps[n..])
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
        })
        .collect();
    Ok(IntensityHarmonics { coefficients })
}

/// `20·log10(2|I_n|)`; `-∞` when the harmonic vanishes.
pub fn harmonic_level_db(intensity: &IntensityHarmonics, n: usize) -> Result<f64> {
    harmonic_level_db_ref(intensity, n, 1.0)
}

/// [`harmonic_level_db`] relative to an input optical power `reference` instead of 1.
pub fn harmonic_level_db_ref(intensity: &IntensityHarmonics, n: usize, reference: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("harmonic levels are defined for n >= 1"));
    }
    if !(reference > 0.0) {
        return Err(Error::domain("reference power must be positive"));
    }
    let c = intensity
        .coefficients
        .get(n)
        .ok_or_else(|| Error::shape(format!("harmonic {n} was not computed")))?;
    let amp = 2.0 * c.norm() / reference;
    Ok(if amp == 0.0 {
        f64::NEG_INFINITY
    } else {
        20.0 * amp.log10()
    })
}

/// Detected harmonic levels of one device at one RF frequency.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearityReport {
    pub frequency_hz: f64,
    /// `I_0`.
    pub dc_power: f64,
    /// Requested harmonic levels, dB.
    pub levels_db: BTreeMap<usize, f64>,
    /// Drive-referred intercept, `20·log10(β)` units.
    pub iip3_proxy_db: Option<f64>,
    /// Fundamental level at the intercept.
    pub oip3_proxy_db: Option<f64>,
    pub fundamental_slope: Option<f64>,
    pub h3_slope: Option<f64>,
}

impl LinearityReport {
    pub fn level(&self, n: usize) -> Option<f64> {
        self.levels_db.get(&n).copied()
    }

    pub fn fundamental_db(&self) -> Option<f64> {
        self.level(1)
    }

    pub fn h2_db(&self) -> Option<f64> {
        self.level(2)
    }

    pub fn h3_db(&self) -> Option<f64> {
        self.level(3)
    }
}

fn report_from_field(d: &ComplexSpectrum, frequency_hz: f64, harmonics: &[usize]) -> Result<LinearityReport> {
    let n_max = harmonics.iter().copied().max().unwrap_or(0);
    let intensity = intensity_harmonics(d, n_max)?;
    let mut levels_db = BTreeMap::new();
    for &n in harmonics {
        levels_db.insert(n, harmonic_level_db(&intensity, n)?);
    }
    Ok(LinearityReport {
        frequency_hz,
        dc_power: intensity.dc(),
        levels_db,
        iip3_proxy_db: None,
        oip3_proxy_db: None,
        fundamental_slope: None,
        h3_slope: None,
    })
}

/// Detected levels of `harmonics` at each frequency, in input order. Points are solved in parallel.
pub fn response_sweep(
    device: &Device,
    frequencies: &[f64],
    harmonics: &[usize],
    window: HarmonicWindow,
) -> Result<Vec<LinearityReport>> {
    if frequencies.is_empty() {
        return Err(Error::domain("empty frequency list"));
    }
    if harmonics.contains(&0) {
        return Err(Error::domain("harmonic 0 is reported as dc_power, not as a level"));
    }
    frequencies
        .par_iter()
        .map(|&f| {
            let d = device.with_rf_frequency(f).solve(window)?;
            report_from_field(&d, f, harmonics).map_err(|e| e.at_frequency(f))
        })
        .collect()
}

/// Fundamental and third-harmonic level of `device` at drive `beta`.
fn h1_h3(device: &Device, beta: f64, window: HarmonicWindow, reference: f64) -> Result<(f64, f64)> {
    let d = device.with_beta(beta).solve(window)?;
    let i = intensity_harmonics(&d, 3)?;
    Ok((harmonic_level_db_ref(&i, 1, reference)?, harmonic_level_db_ref(&i, 3, reference)?))
}

/// Options for [`ip3_improvement_with`].
#[derive(Clone, Copy, Debug)]
pub struct Ip3Options {
    pub drive: f64,
    pub window: HarmonicWindow,
    /// Input power the dB levels are referenced to.
    pub reference_power: f64,
}

impl Default for Ip3Options {
    fn default() -> Self {
        Self {
            drive: DEFAULT_IP3_DRIVE,
            window: HarmonicWindow::default(),
            reference_power: 1.0,
        }
    }
}

/// Outcome of the equal-fundamental comparison against a quadrature MZI.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ip3Comparison {
    pub frequency_hz: f64,
    pub device_drive: f64,
    pub mzi_drive: f64,
    pub fundamental_db: f64,
    pub device_h3_db: f64,
    pub mzi_h3_db: f64,
    /// `(H3_mzi - H3_device) / 2`.
    pub improvement_db: f64,
}

/// IP3 improvement over a quadrature-biased MZI producing the same fundamental at `frequency_hz`.
pub fn ip3_improvement_vs_mzi(device: &Device, frequency_hz: f64) -> Result<f64> {
    ip3_improvement_with(device, frequency_hz, Ip3Options::default()).map(|c| c.improvement_db)
}

pub fn ip3_improvement_with(device: &Device, frequency_hz: f64, options: Ip3Options) -> Result<Ip3Comparison> {
    let dev = device.with_rf_frequency(frequency_hz);
    let (fund, h3) = h1_h3(&dev, options.drive, options.window, options.reference_power)
        .map_err(|e| e.at_frequency(frequency_hz))?;
    if !fund.is_finite() {
        return Err(Error::Search(format!(
            "device produces no fundamental at {frequency_hz:.4e} Hz"
        )));
    }
    let mzi = Device::Mzi(MziBaselineParams::quadrature(0.0, frequency_hz));
    let level = |beta: f64| h1_h3(&mzi, beta, options.window, options.reference_power).map(|(f, _)| f);

    // MZI fundamental rises monotonically with drive up to 2β ≈ 1.84
    let (mut lo, mut hi) = (1e-8f64, 0.9f64);
    let (f_lo, f_hi) = (level(lo)?, level(hi)?);
    if !(f_lo <= fund && fund <= f_hi) {
        return Err(Error::Search(format!(
            "fundamental {fund:.3} dB outside MZI range [{f_lo:.3}, {f_hi:.3}] dB"
        )));
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if level(mid)? < fund {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-14 {
            break;
        }
    }
    let mzi_drive = (lo * hi).sqrt();
    let (_, mzi_h3) = h1_h3(&mzi, mzi_drive, options.window, options.reference_power)?;
    Ok(Ip3Comparison {
        frequency_hz,
        device_drive: options.drive,
        mzi_drive,
        fundamental_db: fund,
        device_h3_db: h3,
        mzi_h3_db: mzi_h3,
        improvement_db: (mzi_h3 - h3) / 2.0,
    })
}

/// Constrained-slope intercept fit over `drive_grid` (β values).
///
/// Fundamental and H3 levels are fitted against `20·log10(β)` with slopes
/// fixed at 1 and 3; their crossing is the drive-referred intercept. Free
/// least-squares slopes are reported alongside.
pub fn ip3_fit(
    device: &Device,
    frequency_hz: f64,
    drive_grid: &[f64],
    window: HarmonicWindow,
) -> Result<LinearityReport> {
    let (lo, hi) = SMALL_SIGNAL_DRIVE;
    if drive_grid.len() < 6 {
        return Err(Error::domain("intercept fit needs at least 6 drive points"));
    }
    if let Some(b) = drive_grid.iter().find(|b| !(lo * (1.0 - 1e-12)..=hi * (1.0 + 1e-12)).contains(*b)) {
        return Err(Error::domain(format!("drive {b} outside small-signal window [{lo}, {hi}]")));
    }
    let dev = device.with_rf_frequency(frequency_hz);
    let points = drive_grid
        .par_iter()
        .map(|&b| h1_h3(&dev, b, window, 1.0).map(|(f, h)| (20.0 * b.log10(), f, h)))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_frequency(frequency_hz))?;
    if points.iter().any(|(_, f, h)| !f.is_finite() || !h.is_finite()) {
        return Err(Error::FitQuality("a harmonic vanished inside the fit window".into()));
    }

    let n = points.len() as f64;
    let c1 = points.iter().map(|(x, f, _)| f - x).sum::<f64>() / n;
    let c3 = points.iter().map(|(x, _, h)| h - 3.0 * x).sum::<f64>() / n;
    let worst = points
        .iter()
        .map(|(x, f, h)| (f - x - c1).abs().max((h - 3.0 * x - c3).abs()))
        .fold(0.0, f64::max);
    if worst > MAX_FIT_RESIDUAL_DB {
        return Err(Error::FitQuality(format!(
            "constrained-slope residual {worst:.4} dB exceeds {MAX_FIT_RESIDUAL_DB} dB"
        )));
    }
    let iip3 = (c1 - c3) / 2.0;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let fundamental_slope = ls_slope(&xs, &points.iter().map(|p| p.1).collect::<Vec<_>>());
    let h3_slope = ls_slope(&xs, &points.iter().map(|p| p.2).collect::<Vec<_>>());

    let d = dev.solve(window)?;
    let mut report = report_from_field(&d, frequency_hz, &[1, 2, 3])?;
    report.iip3_proxy_db = Some(iip3);
    report.oip3_proxy_db = Some(iip3 + c1);
    report.fundamental_slope = Some(fundamental_slope);
    report.h3_slope = Some(h3_slope);
    Ok(report)
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Log-spaced drive grid over the small-signal window.
pub fn default_drive_grid(points: usize) -> Vec<f64> {
    let (lo, hi) = SMALL_SIGNAL_DRIVE;
    let points = points.max(2);
    (0..points)
        .map(|j| lo * (hi / lo).powf(j as f64 / (points - 1) as f64))
        .collect()
}

/// Spurious-free dynamic range `(2/3)·(intercept - noise floor)`, in dB·Hz^{2/3}.
pub fn sfdr(intercept_db: f64, noise_floor_db_hz: f64) -> Result<f64> {
    if !intercept_db.is_finite() || !noise_floor_db_hz.is_finite() {
        return Err(Error::domain("non-finite SFDR input"));
    }
    if noise_floor_db_hz >= intercept_db {
        return Err(Error::domain(format!(
            "noise floor {noise_floor_db_hz} dB/Hz is not below intercept {intercept_db} dB"
        )));
    }
    Ok(2.0 / 3.0 * (intercept_db - noise_floor_db_hz))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::bessel_first_kind;
    use crate::device::DeviceKind;
    use std::f64::consts::TAU;

    fn spectrum(order: usize, entries: &[(i64, Complex64)]) -> ComplexSpectrum {
        let w = HarmonicWindow::new(order);
        let mut s = ComplexSpectrum::zeros(w, 1.0);
        for (n, v) in entries {
            s.set(*n, *v).unwrap();
        }
        s
    }

    #[test]
    fn unmodulated_carrier() {
        let i = intensity_harmonics(&spectrum(3, &[(0, Complex64::new(1.0, 0.0))]), 3).unwrap();
        assert_eq!(i.dc(), 1.0);
        for n in 1..=3 {
            assert_eq!(i.coefficients()[n], Complex64::new(0.0, 0.0));
            assert_eq!(harmonic_level_db(&i, n).unwrap(), f64::NEG_INFINITY);
        }
    }

    #[test]
    fn two_line_spectrum() {
        let s = spectrum(3, &[(0, Complex64::new(1.0, 0.0)), (1, Complex64::new(0.1, 0.0))]);
        let i = intensity_harmonics(&s, 2).unwrap();
        assert!((i.dc() - 1.01).abs() < 1e-15);
        assert!((i.coefficients()[1] - Complex64::new(0.1, 0.0)).norm() < 1e-15);
        assert_eq!(i.coefficients()[2], Complex64::new(0.0, 0.0));
        assert_eq!(i.get(-1), Some(i.coefficients()[1].conj()));
    }

    #[test]
    fn too_many_harmonics() {
        let s = spectrum(2, &[]);
        assert!(matches!(intensity_harmonics(&s, 3), Err(Error::Shape(_))));
    }

    #[test]
    fn level_definitions() {
        let s = spectrum(2, &[(0, Complex64::new(1.0, 0.0)), (1, Complex64::new(0.5, 0.0))]);
        let i = intensity_harmonics(&s, 1).unwrap();
        assert!(harmonic_level_db(&i, 1).unwrap().abs() < 1e-12);
        let s = spectrum(2, &[(0, Complex64::new(1.0, 0.0)), (1, Complex64::new(0.005, 0.0))]);
        let i = intensity_harmonics(&s, 1).unwrap();
        assert!((harmonic_level_db(&i, 1).unwrap() + 40.0).abs() < 1e-9);
        assert!(harmonic_level_db(&i, 0).is_err());
        assert!(harmonic_level_db(&i, 2).is_err());
    }

    #[test]
    fn mzi_level_matches_sampled_intensity() {
        // direct sampling of |E(t)|² = sin²(π/4 + β cos u) over one period
        let beta = 0.0471;
        let samples = 4096;
        let i1: Complex64 = (0..samples)
            .map(|j| {
                let u = TAU * j as f64 / samples as f64;
                let p = (std::f64::consts::FRAC_PI_4 + beta * u.cos()).sin().powi(2);
                p * Complex64::from_polar(1.0, u)
            })
            .sum::<Complex64>()
            / samples as f64;
        let want = 20.0 * (2.0 * i1.norm()).log10();
        let d = Device::Mzi(MziBaselineParams::quadrature(beta, 5e9))
            .solve(HarmonicWindow::new(16))
            .unwrap();
        let got = harmonic_level_db(&intensity_harmonics(&d, 1).unwrap(), 1).unwrap();
        assert!((got - want).abs() < 0.01);
        // and the closed form: 2|I_1| = J_1(2β)
        let closed = 20.0 * bessel_first_kind(1, 2.0 * beta).unwrap().log10();
        assert!((got - closed).abs() < 1e-9);
    }

    #[test]
    fn sweep_preserves_order_and_handles_empty_request() {
        let dev = Device::paper(DeviceKind::Cmmr, 5e9);
        let freqs = [50e9, 5e9, 20e9];
        let r = response_sweep(&dev, &freqs, &[], HarmonicWindow::new(12)).unwrap();
        assert_eq!(r.len(), 3);
        for (rep, f) in r.iter().zip(freqs) {
            assert_eq!(rep.frequency_hz, f);
            assert!(rep.levels_db.is_empty());
            assert!(rep.dc_power > 0.0);
        }
        assert!(response_sweep(&dev, &[], &[1], HarmonicWindow::new(4)).is_err());
    }

    #[test]
    fn sweep_annotates_failing_frequency() {
        let dev = Device::Fmmr(crate::fmmr::FmmrParams::new(1.0, 1.0, 2e-12, 0.0, 0.0, 1e9));
        let err = response_sweep(&dev, &[3e9], &[1], HarmonicWindow::new(2)).unwrap_err();
        assert!(matches!(err, Error::AtFrequency { frequency_hz, .. } if frequency_hz == 3e9));
    }

    #[test]
    fn mzi_against_itself_has_no_improvement() {
        let dev = Device::Mzi(MziBaselineParams::quadrature(0.01, 1e9));
        let imp = ip3_improvement_vs_mzi(&dev, 100e9).unwrap();
        assert!(imp.abs() < 1e-6);
    }

    #[test]
    fn mzi_intercept_closed_form() {
        // small-signal J_1(2β) ≈ β and J_3(2β) ≈ β³/6 cross at β = √6
        let dev = Device::Mzi(MziBaselineParams::quadrature(0.01, 1e9));
        let r = ip3_fit(&dev, 10e9, &default_drive_grid(8), HarmonicWindow::new(16)).unwrap();
        let want = 20.0 * 6f64.sqrt().log10();
        assert!((r.iip3_proxy_db.unwrap() - want).abs() < 0.1);
        assert!((r.fundamental_slope.unwrap() - 1.0).abs() < 0.01);
        assert!((r.h3_slope.unwrap() - 3.0).abs() < 0.03);
    }

    #[test]
    fn fit_rejects_bad_grids() {
        let dev = Device::paper(DeviceKind::Mzi, 1e9);
        let w = HarmonicWindow::new(8);
        assert!(ip3_fit(&dev, 1e9, &default_drive_grid(5), w).is_err());
        let mut g = default_drive_grid(6);
        g[5] = 0.1;
        assert!(ip3_fit(&dev, 1e9, &g, w).is_err());
    }

    #[test]
    fn fit_quality_error_outside_small_signal() {
        // a bar-biased MZI detects sin²(β cos u): no odd harmonics to fit
        let dev = Device::paper(DeviceKind::Mzi, 1e9).with_bias(0.0);
        let r = ip3_fit(&dev, 1e9, &default_drive_grid(6), HarmonicWindow::new(8));
        assert!(matches!(r, Err(Error::FitQuality(_))));
    }

    #[test]
    fn sfdr_definitions() {
        assert!((sfdr(0.0, -160.0).unwrap() - 106.666_666_666_666_67).abs() < 1e-9);
        let base = sfdr(0.0, -150.0).unwrap();
        assert!((sfdr(12.0, -150.0).unwrap() - base - 8.0).abs() < 1e-12);
        assert_eq!(sfdr(5.0, -150.0).unwrap() - sfdr(5.0, -150.0).unwrap(), 0.0);
        assert!(sfdr(-170.0, -160.0).is_err());
    }
}
