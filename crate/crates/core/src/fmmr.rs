//! Resonance-frequency-modulated ring (FMMR).
//!
//! A phase modulator sits inside an all-pass ring. Per round trip the
//! circulating field picks up `α·e^{i·loop_phase}·e^{iβ·cos(ω_RF t + θ_RF)}`
//! and the delay `t_d`. The point coupler is `[[ρ, iτ], [iτ, ρ]]`:
//!
//! ```text
//! b = ρ·c + iτ·a        (into the ring)
//! d = ρ·a + iτ·c        (bus output)
//! c = M·b               (one round trip)
//! ```
//!
//! The output uses `+iτ` on the ring return. With that sign the undriven
//! response is the all-pass `(ρ - αe^{iθ}) / (1 - ραe^{iθ})` and the lossless
//! ring conserves power exactly.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{
    phase_drive_kernel, solve_feedback, ComplexSpectrum, DelayDiagonal, HarmonicOperator, HarmonicWindow,
};

/// Round-trip time for a 500 GHz free spectral range.
pub const PAPER_DELAY_S: f64 = 2e-12;
pub const PAPER_ALPHA: f64 = 0.98;
pub const PAPER_RHO: f64 = 0.97;
pub const PAPER_BETA: f64 = 0.0942;
/// Laser-to-resonance detuning used for the FMMR frequency response.
pub const PAPER_DETUNING_HZ: f64 = 6e9;

const COUPLER_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FmmrParams {
    /// Round-trip field transmission, `(0, 1]`.
    pub alpha: f64,
    pub delay_s: f64,
    /// Carrier round-trip phase plus DC bias phase, radians.
    pub loop_phase: f64,
    /// Self-coupling.
    pub rho: f64,
    /// Cross-coupling; `ρ² + τ² = 1`.
    pub tau: f64,
    pub beta: f64,
    pub rf_frequency_hz: f64,
    pub rf_phase: f64,
}

impl FmmrParams {
    /// Lossless coupler with `τ = √(1 - ρ²)`.
    pub fn new(alpha: f64, rho: f64, delay_s: f64, loop_phase: f64, beta: f64, rf_frequency_hz: f64) -> Self {
        Self {
            alpha,
            delay_s,
            loop_phase,
            rho,
            tau: (1.0 - rho * rho).max(0.0).sqrt(),
            beta,
            rf_frequency_hz,
            rf_phase: 0.0,
        }
    }

    /// α = 0.98, ρ = 0.97, t_d = 2 ps, β = 0.0942, laser detuned 6 GHz from resonance.
    pub fn paper(rf_frequency_hz: f64) -> Self {
        Self::new(
            PAPER_ALPHA,
            PAPER_RHO,
            PAPER_DELAY_S,
            detuning_to_loop_phase(PAPER_DETUNING_HZ, PAPER_DELAY_S),
            PAPER_BETA,
            rf_frequency_hz,
        )
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self.tau = (1.0 - rho * rho).max(0.0).sqrt();
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
            self.rho,
            self.tau,
            self.beta,
            self.rf_frequency_hz,
            self.rf_phase,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::domain("non-finite FMMR parameter"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::domain(format!("alpha {} outside (0, 1]", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.rho) || self.tau < 0.0 {
            return Err(Error::domain(format!("coupling rho {} / tau {} invalid", self.rho, self.tau)));
        }
        if (self.rho * self.rho + self.tau * self.tau - 1.0).abs() > COUPLER_TOLERANCE {
            return Err(Error::domain("coupler is not lossless: rho^2 + tau^2 != 1"));
        }
        if self.beta < 0.0 {
            return Err(Error::domain(format!("modulation depth {} must be non-negative", self.beta)));
        }
        if self.delay_s <= 0.0 {
            return Err(Error::domain("round-trip delay must be positive"));
        }
        if self.rf_frequency_hz < 0.0 {
            return Err(Error::domain("RF frequency must be non-negative"));
        }
        Ok(())
    }
}

/// Loop phase that puts the ring resonance `detuning_hz` above the laser.
pub fn detuning_to_loop_phase(detuning_hz: f64, delay_s: f64) -> f64 {
    -TAU * detuning_hz * delay_s
}

/// Circulating (`b`) and bus-output (`d`) sidebands of a ring device.
#[derive(Clone, Debug, PartialEq)]
pub struct RingSolution {
    pub circulating: ComplexSpectrum,
    pub output: ComplexSpectrum,
}

/// `M = D·T`: modulation `α·e^{i·loop_phase}·e^{iβcos(ω_RF t + θ_RF)}`, then the delay.
/// The delay diagonal carries `n·ω_RF·t_d` on the output row.
pub fn fmmr_round_trip_operator(params: &FmmrParams, window: HarmonicWindow) -> Result<HarmonicOperator> {
    params.validate()?;
    let kernel = phase_drive_kernel(params.beta, params.rf_phase, window)?
        .scaled(Complex64::from_polar(params.alpha, params.loop_phase));
    let delay = DelayDiagonal::new(window, 0.0, params.rf_angular_frequency() * params.delay_s)?;
    delay.to_operator().compose(&kernel.to_operator())
}

pub fn solve_fmmr(params: &FmmrParams, window: HarmonicWindow) -> Result<RingSolution> {
    let m = fmmr_round_trip_operator(params, window)?;
    let w_rf = params.rf_angular_frequency();
    let input = ComplexSpectrum::carrier(window, w_rf, Complex64::new(1.0, 0.0));
    let i_tau = Complex64::new(0.0, params.tau);
    let rho = Complex64::new(params.rho, 0.0);

    let forcing = input.scaled(i_tau);
    let circulating = solve_feedback(&m.scaled(rho), &forcing)?;
    let returned = m.apply(&circulating)?;
    let amplitudes = input
        .amplitudes()
        .iter()
        .zip(returned.amplitudes())
        .map(|(a, c)| rho * a + i_tau * c)
        .collect();
    let output = ComplexSpectrum::new(window, amplitudes, w_rf)?;
    Ok(RingSolution { circulating, output })
}

/// Classical undriven all-pass response `(ρ - αe^{iθ}) / (1 - ραe^{iθ})`.
pub fn all_pass_response(alpha: f64, rho: f64, loop_phase: f64) -> Complex64 {
    let loop_gain = Complex64::from_polar(alpha, loop_phase);
    (rho - loop_gain) / (1.0 - rho * loop_gain)
}

/// Anti-resonant loop phase.
pub const ANTI_RESONANCE: f64 = PI;
