//! Self-check report: time-domain cross-validation plus the invariant suite
//! for one device preset.

use num_complex::Complex64;

use super::config::Preset;
use crate::composite::DcmmrParams;
use crate::detection::ip3_improvement_vs_mzi;
use crate::device::{Device, DeviceKind};
use crate::error::Result;
use crate::fmmr::all_pass_response;
use crate::harmonic::{ComplexSpectrum, HarmonicWindow, CONVERGENCE_TOLERANCE};
use crate::td::{cross_validate, TdConfig, DEFAULT_PEAK_FLOOR};

pub const ORACLE_TOLERANCE: f64 = 1e-6;
pub const UNITARITY_TOLERANCE: f64 = 1e-10;
pub const REDUCTION_TOLERANCE: f64 = 1e-12;
pub const FIELD_H2_TOLERANCE: f64 = 1e-8;
pub const CHECK_FREQUENCIES_HZ: [f64; 3] = [5e9, 50e9, 100e9];

/// Orders allowed for power-conservation checks, which need the truncation tail to vanish.
const UNITARITY_MAX_ORDER: usize = 192;

/// `(frequency, target, tolerance)` for the IP3 improvement over a quadrature MZI;
/// a `None` tolerance means "below target".
pub const IP3_TARGETS: [(f64, f64, Option<f64>); 4] = [
    (5e9, 3.0, None),
    (50e9, 10.0, Some(2.0)),
    (100e9, 12.5, Some(2.0)),
    (200e9, 17.0, Some(2.0)),
];

pub const IP3_SENSITIVITY_BIASES: [f64; 7] = [0.10, 0.11, 0.12, 0.13, 0.14, 0.15, 0.16];

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    /// Informational lines that do not affect the verdict.
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .checks
            .iter()
            .map(|c| format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
            .collect();
        out.extend(self.notes.iter().map(|n| format!("NOTE {n}")));
        out
    }

    fn push(&mut self, name: String, passed: bool, detail: String) {
        self.checks.push(Check { name, passed, detail });
    }
}

fn ghz(f: f64) -> String {
    format!("{}GHz", f / 1e9)
}

/// Undriven output predicted by the static transfer functions.
fn static_response(device: &Device) -> Complex64 {
    match device {
        Device::Fmmr(p) => all_pass_response(p.alpha, p.rho, p.loop_phase),
        Device::Cmmr(p) => all_pass_response(p.alpha, (p.bias_phase / 2.0).cos(), p.loop_phase),
        Device::Dcmmr(p) => {
            let single = all_pass_response(p.ring1.alpha, (p.ring1.bias_phase / 2.0).cos(), p.ring1.loop_phase);
            0.5 * single * (1.0 + Complex64::from_polar(1.0, p.combine_phase))
        }
        Device::Mzi(p) => Complex64::new(0.0, -(p.bias_phase / 2.0).sin()),
    }
}

fn sideband_error(d: &ComplexSpectrum, carrier: Complex64) -> f64 {
    d.window()
        .indices()
        .map(|n| {
            let want = if n == 0 { carrier } else { Complex64::new(0.0, 0.0) };
            (d.get(n) - want).norm()
        })
        .fold(0.0, f64::max)
}

fn is_lossless_ring(device: &Device) -> bool {
    match device {
        Device::Fmmr(p) => p.alpha == 1.0,
        Device::Cmmr(p) => p.alpha == 1.0,
        _ => false,
    }
}

pub fn verify(kind: DeviceKind, preset: Preset) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let window = HarmonicWindow::default();

    for f in CHECK_FREQUENCIES_HZ {
        let device = preset.device(kind, f);

        let config = TdConfig::for_device(&device, 256, 4)?;
        let cv = cross_validate(&device, window, &config, DEFAULT_PEAK_FLOOR)?;
        report.push(
            format!("oracle@{}", ghz(f)),
            cv.max_relative_error < ORACLE_TOLERANCE,
            format!(
                "max relative error {:.3e} over |n| <= 3 (f_RF snapped to {:.6e} Hz, limit {ORACLE_TOLERANCE:e})",
                cv.max_relative_error, cv.snapped_frequency_hz
            ),
        );

        let converged = device.solve_converged(window, UNITARITY_MAX_ORDER)?;
        let power = converged.output.power();
        if is_lossless_ring(&device) {
            let err = (power - 1.0).abs();
            report.push(
                format!("unitarity@{}", ghz(f)),
                err < UNITARITY_TOLERANCE,
                format!("sum |d_n|^2 = {power:.15} at N = {} (|error| {err:.2e})", converged.order),
            );
        } else {
            report.push(
                format!("passivity@{}", ghz(f)),
                power <= 1.0 + UNITARITY_TOLERANCE,
                format!("sum |d_n|^2 = {power:.12} <= 1"),
            );
        }

        let undriven = device.with_beta(0.0);
        let err = sideband_error(&undriven.solve(window)?, static_response(&undriven));
        report.push(
            format!("beta0-reduction@{}", ghz(f)),
            err < REDUCTION_TOLERANCE,
            format!("max |d_n - static response| = {err:.2e}"),
        );

        let coarse = device.solve(HarmonicWindow::new(16))?;
        let fine = device.solve(HarmonicWindow::new(32))?;
        let change = coarse.max_abs_diff(&fine, 5);
        report.push(
            format!("truncation@{}", ghz(f)),
            change < CONVERGENCE_TOLERANCE,
            format!("N = 16 -> 32 moves d_n (|n| <= 5) by {change:.2e}"),
        );

        if let Device::Dcmmr(p) = device {
            let d = device.solve(window)?;
            let h2 = d.get(2).norm().max(d.get(-2).norm());
            report.push(
                format!("field-h2-cancellation@{}", ghz(f)),
                h2 <= FIELD_H2_TOLERANCE,
                format!("max |d_±2| = {h2:.3e} (limit {FIELD_H2_TOLERANCE:e})"),
            );
            if f == CHECK_FREQUENCIES_HZ[0] {
                report.notes.push(dcmmr_cancellation_note(&p));
            }
        }
    }

    if kind == DeviceKind::Cmmr && preset == Preset::Paper {
        report.notes.extend(ip3_sensitivity_lines()?);
    }
    Ok(report)
}

fn dcmmr_cancellation_note(p: &DcmmrParams) -> String {
    format!(
        "dcmmr field sidebands pick up 1 + e^(i(combine - n*offset)); with offset {:.4} rad both d_+2 and d_-2 vanish only if 4*offset = 0 mod 2pi",
        p.rf_phase_offset
    )
}

/// Measured IP3 improvements against their targets, plus a bias sweep for every
/// frequency that misses.
pub fn ip3_sensitivity_lines() -> Result<Vec<String>> {
    let base = Device::paper(DeviceKind::Cmmr, 50e9);
    let mut lines = Vec::new();
    for (f, target, tol) in IP3_TARGETS {
        let measured = ip3_improvement_vs_mzi(&base, f)?;
        let (ok, want) = match tol {
            Some(t) => ((measured - target).abs() <= t, format!("{target} ± {t} dB")),
            None => (measured < target, format!("< {target} dB")),
        };
        lines.push(format!(
            "ip3 improvement vs mzi @{}: {measured:.2} dB (target {want}) {}",
            ghz(f),
            if ok { "within" } else { "outside" }
        ));
        if !ok {
            let sweep = IP3_SENSITIVITY_BIASES
                .iter()
                .map(|&b| ip3_improvement_vs_mzi(&base.with_bias(b), f).map(|v| format!("{b:.2}:{v:.2}")))
                .collect::<Result<Vec<_>>>()?;
            lines.push(format!("ip3 bias sensitivity @{} (bias:dB): {}", ghz(f), sweep.join(" ")));
        }
    }
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmmr_default_preset_passes() {
        let r = verify(DeviceKind::Fmmr, Preset::Paper).unwrap();
        assert!(r.passed(), "{:#?}", r.lines());
        assert!(r.checks.iter().any(|c| c.name.starts_with("oracle")));
    }

    #[test]
    fn cmmr_lossless_is_unitary() {
        let r = verify(DeviceKind::Cmmr, Preset::LosslessUnitarity).unwrap();
        assert!(r.checks.iter().any(|c| c.name.starts_with("unitarity")));
        assert!(r.passed(), "{:#?}", r.lines());
    }

    #[test]
    fn static_responses() {
        let d = Device::paper(DeviceKind::Mzi, 1e9).with_beta(0.0);
        assert!((static_response(&d).norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }
}
