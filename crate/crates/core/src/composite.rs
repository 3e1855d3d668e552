//! Dual-CMMR (DCMMR) linearized modulator and the standalone MZI baseline.
//!
//! The DCMMR splits the laser with an ideal -3 dB splitter into two identical
//! CMMRs whose RF drives differ by `rf_phase_offset`, then recombines them
//! with a -3 dB combiner after a static optical phase `combine_phase` on the
//! second arm: `d = (d¹ + e^{i·combine_phase}·d²) / 2`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cmmr::{solve_cmmr, CmmrParams};
use crate::error::{Error, Result};
use crate::fmmr::PAPER_BETA;
use crate::harmonic::{trig_drive_kernels, ComplexSpectrum, HarmonicWindow};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DcmmrParams {
    pub ring1: CmmrParams,
    pub ring2: CmmrParams,
    pub rf_phase_offset: f64,
    pub combine_phase: f64,
}

impl DcmmrParams {
    /// Two copies of `ring`, the second driven `rf_phase_offset` later.
    pub fn from_ring(ring: CmmrParams, rf_phase_offset: f64, combine_phase: f64) -> Self {
        let ring2 = CmmrParams {
            rf_phase: ring.rf_phase + rf_phase_offset,
            ..ring
        };
        Self {
            ring1: ring,
            ring2,
            rf_phase_offset,
            combine_phase,
        }
    }

    /// 90° RF offset, 90° optical combine.
    pub fn quadrature(ring: CmmrParams) -> Self {
        Self::from_ring(ring, FRAC_PI_2, FRAC_PI_2)
    }

    pub fn paper(rf_frequency_hz: f64) -> Self {
        Self::quadrature(CmmrParams::paper(rf_frequency_hz))
    }

    /// Rebuilds ring 2 from ring 1 after ring 1 was edited.
    pub fn resynced(self) -> Self {
        Self::from_ring(self.ring1, self.rf_phase_offset, self.combine_phase)
    }

    pub fn validate(&self) -> Result<()> {
        self.ring1.validate()?;
        self.ring2.validate()?;
        if !self.rf_phase_offset.is_finite() || !self.combine_phase.is_finite() {
            return Err(Error::domain("non-finite DCMMR phase"));
        }
        let expected = CmmrParams {
            rf_phase: self.ring1.rf_phase + self.rf_phase_offset,
            ..self.ring1
        };
        let phase_ok = (self.ring2.rf_phase - expected.rf_phase).abs() < 1e-12;
        if !phase_ok || (CmmrParams { rf_phase: expected.rf_phase, ..self.ring2 }) != expected {
            return Err(Error::domain(
                "ring2 must equal ring1 apart from an RF phase shifted by rf_phase_offset",
            ));
        }
        Ok(())
    }
}

pub fn solve_dcmmr(params: &DcmmrParams, window: HarmonicWindow) -> Result<ComplexSpectrum> {
    params.validate()?;
    let d1 = solve_cmmr(&params.ring1, window)?.output;
    let d2 = solve_cmmr(&params.ring2, window)?.output;
    let combine = Complex64::from_polar(1.0, params.combine_phase);
    let amplitudes = d1
        .amplitudes()
        .iter()
        .zip(d2.amplitudes())
        .map(|(a, b)| 0.5 * (a + combine * b))
        .collect();
    ComplexSpectrum::new(window, amplitudes, d1.rf_angular_frequency())
}

/// Combine phase that minimizes `max(|d_2|, |d_-2|)` for the given rings, with that residual.
///
/// The coarse scan covers the whole circle; the minimum is then refined by golden section.
pub fn second_harmonic_null(params: &DcmmrParams, window: HarmonicWindow) -> Result<(f64, f64)> {
    let d1 = solve_cmmr(&params.ring1, window)?.output;
    let d2 = solve_cmmr(&params.ring2, window)?.output;
    let residual = |phi: f64| {
        let c = Complex64::from_polar(1.0, phi);
        let p = 0.5 * (d1.get(2) + c * d2.get(2));
        let m = 0.5 * (d1.get(-2) + c * d2.get(-2));
        p.norm().max(m.norm())
    };
    let steps = 720;
    let (mut best, mut best_val) = (0.0, f64::INFINITY);
    for j in 0..steps {
        let phi = TAU * j as f64 / steps as f64;
        let v = residual(phi);
        if v < best_val {
            best = phi;
            best_val = v;
        }
    }
    let (mut lo, mut hi) = (best - TAU / steps as f64, best + TAU / steps as f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if residual(x1) < residual(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let phi = 0.5 * (lo + hi);
    Ok((phi.rem_euclid(TAU), residual(phi)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MziBaselineParams {
    /// Arm bias difference; `π/2` is quadrature.
    pub bias_phase: f64,
    pub beta: f64,
    pub rf_frequency_hz: f64,
    pub rf_phase: f64,
}

impl MziBaselineParams {
    pub fn quadrature(beta: f64, rf_frequency_hz: f64) -> Self {
        Self {
            bias_phase: FRAC_PI_2,
            beta,
            rf_frequency_hz,
            rf_phase: 0.0,
        }
    }

    pub fn paper(rf_frequency_hz: f64) -> Self {
        Self::quadrature(PAPER_BETA, rf_frequency_hz)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.bias_phase, self.beta, self.rf_frequency_hz, self.rf_phase]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::domain("non-finite MZI parameter"));
        }
        if self.beta < 0.0 {
            return Err(Error::domain(format!("modulation depth {} must be non-negative", self.beta)));
        }
        if self.rf_frequency_hz < 0.0 {
            return Err(Error::domain("RF frequency must be non-negative"));
        }
        Ok(())
    }
}

/// Cross-port field `-i·sin(φ_b/2 + β·cos(ω_RF t + θ_RF))` of a lone push-pull MZI.
pub fn solve_mzi_baseline(params: &MziBaselineParams, window: HarmonicWindow) -> Result<ComplexSpectrum> {
    params.validate()?;
    let (_, sin) = trig_drive_kernels(params.bias_phase / 2.0, params.beta, params.rf_phase, window)?;
    let w_rf = TAU * params.rf_frequency_hz;
    // the input is a pure carrier, so the output is column 0 of the Toeplitz operator
    let amplitudes = window
        .indices()
        .map(|n| Complex64::new(0.0, -1.0) * sin.coefficient(n))
        .collect();
    ComplexSpectrum::new(window, amplitudes, w_rf)
}

/// Bias of a full-cross MZI.
pub const MZI_FULL_CROSS: f64 = PI;
