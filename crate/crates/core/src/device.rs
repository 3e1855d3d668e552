use serde::{Deserialize, Serialize};

use crate::cmmr::{solve_cmmr, CmmrParams};
use crate::composite::{solve_dcmmr, solve_mzi_baseline, DcmmrParams, MziBaselineParams};
use crate::error::{Error, Result};
use crate::fmmr::{solve_fmmr, FmmrParams};
use crate::harmonic::{ComplexSpectrum, HarmonicWindow, CONVERGENCE_TOLERANCE};

/// Upper bound on the truncation order reached by [`Device::solve_converged`].
pub const DEFAULT_MAX_ORDER: usize = 96;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceKind {
    Fmmr,
    Cmmr,
    Dcmmr,
    Mzi,
}

impl DeviceKind {
    pub const ALL: [DeviceKind; 4] = [DeviceKind::Fmmr, DeviceKind::Cmmr, DeviceKind::Dcmmr, DeviceKind::Mzi];

    pub fn name(&self) -> &'static str {
        match self {
            DeviceKind::Fmmr => "fmmr",
            DeviceKind::Cmmr => "cmmr",
            DeviceKind::Dcmmr => "dcmmr",
            DeviceKind::Mzi => "mzi",
        }
    }
}

impl std::str::FromStr for DeviceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DeviceKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown device '{s}' (expected fmmr, cmmr, dcmmr or mzi)")))
    }
}

impl std::fmt::Display for DeviceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Any of the modulators the crate can solve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "device", rename_all = "lowercase")]
pub enum Device {
    Fmmr(FmmrParams),
    Cmmr(CmmrParams),
    Dcmmr(DcmmrParams),
    Mzi(MziBaselineParams),
}

/// Output field plus the truncation bookkeeping behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergedOutput {
    pub output: ComplexSpectrum,
    /// Order of the reported spectrum.
    pub order: usize,
    /// Largest `|d_n(N) - d_n(2N)|` over the reported window.
    pub change: f64,
    pub converged: bool,
}

impl Device {
    pub fn paper(kind: DeviceKind, rf_frequency_hz: f64) -> Self {
        match kind {
            DeviceKind::Fmmr => Device::Fmmr(FmmrParams::paper(rf_frequency_hz)),
            DeviceKind::Cmmr => Device::Cmmr(CmmrParams::paper(rf_frequency_hz)),
            DeviceKind::Dcmmr => Device::Dcmmr(DcmmrParams::paper(rf_frequency_hz)),
            DeviceKind::Mzi => Device::Mzi(MziBaselineParams::paper(rf_frequency_hz)),
        }
    }

    pub fn kind(&self) -> DeviceKind {
        match self {
            Device::Fmmr(_) => DeviceKind::Fmmr,
            Device::Cmmr(_) => DeviceKind::Cmmr,
            Device::Dcmmr(_) => DeviceKind::Dcmmr,
            Device::Mzi(_) => DeviceKind::Mzi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Device::Fmmr(p) => p.validate(),
            Device::Cmmr(p) => p.validate(),
            Device::Dcmmr(p) => p.validate(),
            Device::Mzi(p) => p.validate(),
        }
    }

    /// Bus-output field sidebands for a unit carrier input.
    pub fn solve(&self, window: HarmonicWindow) -> Result<ComplexSpectrum> {
        let out = match self {
            Device::Fmmr(p) => solve_fmmr(p, window).map(|s| s.output),
            Device::Cmmr(p) => solve_cmmr(p, window).map(|s| s.output),
            Device::Dcmmr(p) => solve_dcmmr(p, window),
            Device::Mzi(p) => solve_mzi_baseline(p, window),
        };
        out.map_err(|e| e.at_frequency(self.rf_frequency_hz()))
    }

    /// Solves at `N` and `2N`; reports the order-`N` spectrum and whether it moved by less than
    /// the convergence tolerance.
    pub fn solve_checked(&self, window: HarmonicWindow) -> Result<ConvergedOutput> {
        let coarse = self.solve(window)?;
        let fine = self.solve(window.doubled())?;
        let change = coarse.max_abs_diff(&fine, window.order());
        Ok(ConvergedOutput {
            output: coarse,
            order: window.order(),
            change,
            converged: change < CONVERGENCE_TOLERANCE,
        })
    }

    /// Doubles the order from `window` until [`Device::solve_checked`] converges or `max_order`
    /// is reached.
    pub fn solve_converged(&self, window: HarmonicWindow, max_order: usize) -> Result<ConvergedOutput> {
        let mut w = window;
        loop {
            let out = self.solve_checked(w)?;
            if out.converged || w.order() * 2 > max_order {
                return Ok(out);
            }
            w = w.doubled();
        }
    }

    pub fn rf_frequency_hz(&self) -> f64 {
        match self {
            Device::Fmmr(p) => p.rf_frequency_hz,
            Device::Cmmr(p) => p.rf_frequency_hz,
            Device::Dcmmr(p) => p.ring1.rf_frequency_hz,
            Device::Mzi(p) => p.rf_frequency_hz,
        }
    }

    pub fn beta(&self) -> f64 {
        match self {
            Device::Fmmr(p) => p.beta,
            Device::Cmmr(p) => p.beta,
            Device::Dcmmr(p) => p.ring1.beta,
            Device::Mzi(p) => p.beta,
        }
    }

    /// The bias knob of each device: loop phase for the FMMR, coupler/MZI bias otherwise.
    pub fn bias(&self) -> f64 {
        match self {
            Device::Fmmr(p) => p.loop_phase,
            Device::Cmmr(p) => p.bias_phase,
            Device::Dcmmr(p) => p.ring1.bias_phase,
            Device::Mzi(p) => p.bias_phase,
        }
    }

    pub fn with_rf_frequency(self, f: f64) -> Self {
        match self {
            Device::Fmmr(p) => Device::Fmmr(FmmrParams { rf_frequency_hz: f, ..p }),
            Device::Cmmr(p) => Device::Cmmr(CmmrParams { rf_frequency_hz: f, ..p }),
            Device::Dcmmr(mut p) => {
                p.ring1.rf_frequency_hz = f;
                Device::Dcmmr(p.resynced())
            }
            Device::Mzi(p) => Device::Mzi(MziBaselineParams { rf_frequency_hz: f, ..p }),
        }
    }

    pub fn with_beta(self, beta: f64) -> Self {
        match self {
            Device::Fmmr(p) => Device::Fmmr(FmmrParams { beta, ..p }),
            Device::Cmmr(p) => Device::Cmmr(CmmrParams { beta, ..p }),
            Device::Dcmmr(mut p) => {
                p.ring1.beta = beta;
                Device::Dcmmr(p.resynced())
            }
            Device::Mzi(p) => Device::Mzi(MziBaselineParams { beta, ..p }),
        }
    }

    pub fn with_bias(self, bias: f64) -> Self {
        match self {
            Device::Fmmr(p) => Device::Fmmr(FmmrParams { loop_phase: bias, ..p }),
            Device::Cmmr(p) => Device::Cmmr(p.with_bias(bias)),
            Device::Dcmmr(mut p) => {
                p.ring1.bias_phase = bias;
                Device::Dcmmr(p.resynced())
            }
            Device::Mzi(p) => Device::Mzi(MziBaselineParams { bias_phase: bias, ..p }),
        }
    }

    pub fn with_rf_phase(self, rf_phase: f64) -> Self {
        match self {
            Device::Fmmr(p) => Device::Fmmr(FmmrParams { rf_phase, ..p }),
            Device::Cmmr(p) => Device::Cmmr(CmmrParams { rf_phase, ..p }),
            Device::Dcmmr(mut p) => {
                p.ring1.rf_phase = rf_phase;
                Device::Dcmmr(p.resynced())
            }
            Device::Mzi(p) => Device::Mzi(MziBaselineParams { rf_phase, ..p }),
        }
    }

    /// Same device with every ring made lossless (α = 1).
    pub fn lossless(self) -> Self {
        match self {
            Device::Fmmr(p) => Device::Fmmr(FmmrParams { alpha: 1.0, ..p }),
            Device::Cmmr(p) => Device::Cmmr(CmmrParams { alpha: 1.0, ..p }),
            Device::Dcmmr(mut p) => {
                p.ring1.alpha = 1.0;
                Device::Dcmmr(p.resynced())
            }
            m @ Device::Mzi(_) => m,
        }
    }

    /// Round-trip delay, `None` for the MZI.
    pub fn delay_s(&self) -> Option<f64> {
        match self {
            Device::Fmmr(p) => Some(p.delay_s),
            Device::Cmmr(p) => Some(p.delay_s),
            Device::Dcmmr(p) => Some(p.ring1.delay_s),
            Device::Mzi(_) => None,
        }
    }
}
