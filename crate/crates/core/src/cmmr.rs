//! Coupling-modulated ring (CMMR).
//!
//! The ring closes through a push-pull Mach-Zehnder coupler. With the arm
//! phase difference `2Θ(t)`, `Θ(t) = φ_DC/2 + β·cos(ω_RF t + θ_RF)`, the coupler
//! acts instantaneously as the lossless 2x2
//!
//! ```text
//! [ b ]   [ cos Θ     -i·sin Θ ] [ c ]     c: ring return
//! [ d ] = [ -i·sin Θ   cos Θ   ] [ a ]     a: bus input
//! ```
//!
//! so in the sideband basis `M1` (bar) is the Toeplitz operator of `cos Θ(t)`,
//! `M2` (cross) that of `-i·sin Θ(t)`, and the ring itself is the diagonal
//! `M3 = α·e^{i(loop_phase + n·ω_RF·t_d)}`:
//!
//! ```text
//! b = (I - M1·M3)⁻¹ · M2·a
//! d = M1·a + M2·M3·b
//! ```
//!
//! `φ_DC = 0` is the zero-coupling (bar) state; `φ_DC = 2·acos(α)` is critical
//! coupling on resonance.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmmr::{RingSolution, PAPER_ALPHA, PAPER_BETA, PAPER_DELAY_S};
use crate::harmonic::{
    solve_feedback, trig_drive_kernels, ComplexSpectrum, DelayDiagonal, HarmonicOperator, HarmonicWindow,
};

/// Linearization bias between zero and critical coupling.
pub const PAPER_LINEAR_BIAS: f64 = 0.12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmmrParams {
    pub alpha: f64,
    pub delay_s: f64,
    /// Ring round-trip carrier phase; 0 is on resonance.
    pub loop_phase: f64,
    /// MZI arm bias difference measured from the zero-coupling point, `[0, 2π)`.
    pub bias_phase: f64,
    /// Per-arm push-pull depth, radians.
    pub beta: f64,
    pub rf_frequency_hz: f64,
    pub rf_phase: f64,
}

impl CmmrParams {
    /// α = 0.98, t_d = 2 ps, β = 0.0942, on resonance, bias 0.12 rad.
    pub fn paper(rf_frequency_hz: f64) -> Self {
        Self {
            alpha: PAPER_ALPHA,
            delay_s: PAPER_DELAY_S,
            loop_phase: 0.0,
            bias_phase: PAPER_LINEAR_BIAS,
            beta: PAPER_BETA,
            rf_frequency_hz,
            rf_phase: 0.0,
        }
    }

    pub fn with_bias(mut self, bias_phase: f64) -> Self {
        self.bias_phase = bias_phase;
        self
    }

    pub fn rf_angular_frequency(&self) -> f64 {
        TAU * self.rf_frequency_hz
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.alpha,
            self.delay_s,
            self.loop_phase,
            self.bias_phase,
            self.beta,
            self.rf_frequency_hz,
            self.rf_phase,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::domain("non-finite CMMR parameter"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::domain(format!("alpha {} outside (0, 1]", self.alpha)));
        }
        if self.beta < 0.0 {
            return Err(Error::domain(format!("modulation depth {} must be non-negative", self.beta)));
        }
        if self.delay_s <= 0.0 {
            return Err(Error::domain("round-trip delay must be positive"));
        }
        if !(0.0..TAU).contains(&self.bias_phase) {
            return Err(Error::domain(format!("bias phase {} outside [0, 2π)", self.bias_phase)));
        }
        if self.rf_frequency_hz < 0.0 {
            return Err(Error::domain("RF frequency must be non-negative"));
        }
        Ok(())
    }
}

/// Bias at which the undriven coupler's bar transmission equals `alpha`.
pub fn critical_coupling_bias(alpha: f64) -> f64 {
    2.0 * alpha.clamp(-1.0, 1.0).acos()
}

/// `(M1, M2)`: bar `cos Θ(t)` and cross `-i·sin Θ(t)` operators of the modulated coupler.
pub fn mzi_coupler_operators(
    bias_phase: f64,
    beta: f64,
    rf_phase: f64,
    window: HarmonicWindow,
) -> Result<(HarmonicOperator, HarmonicOperator)> {
    let (cos, sin) = trig_drive_kernels(bias_phase / 2.0, beta, rf_phase, window)?;
    let cross = sin.scaled(Complex64::new(0.0, -1.0));
    Ok((cos.to_operator(), cross.to_operator()))
}

/// `M3`, the lossy delay of one ring round trip.
pub fn ring_feedback_operator(params: &CmmrParams, window: HarmonicWindow) -> Result<HarmonicOperator> {
    params.validate()?;
    let delay = DelayDiagonal::new(window, params.loop_phase, params.rf_angular_frequency() * params.delay_s)?;
    Ok(delay.to_operator().scaled(Complex64::new(params.alpha, 0.0)))
}

pub fn solve_cmmr(params: &CmmrParams, window: HarmonicWindow) -> Result<RingSolution> {
    params.validate()?;
    let (m1, m2) = mzi_coupler_operators(params.bias_phase, params.beta, params.rf_phase, window)?;
    let m3 = ring_feedback_operator(params, window)?;
    let w_rf = params.rf_angular_frequency();
    let input = ComplexSpectrum::carrier(window, w_rf, Complex64::new(1.0, 0.0));

    let forcing = m2.apply(&input)?;
    let circulating = solve_feedback(&m1.compose(&m3)?, &forcing)?;
    let through = m1.apply(&input)?;
    let from_ring = m2.compose(&m3)?.apply(&circulating)?;
    let amplitudes = through
        .amplitudes()
        .iter()
        .zip(from_ring.amplitudes())
        .map(|(t, r)| t + r)
        .collect();
    let output = ComplexSpectrum::new(window, amplitudes, w_rf)?;
    Ok(RingSolution { circulating, output })
}
