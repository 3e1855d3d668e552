//! Modulation depth from drive voltage.
//!
//! With `Vπ = (Vπ·L) / L` the phase swing of a push-pull arm is `π·V/Vπ`;
//! the literal convention `β = V/Vπ` drops the `π`. Neither reproduces the
//! preset depth 0.0942 for 2.1 V on a 300 µm electrode at 4 V·cm
//! (0.04948 and 0.01575), so presets store β directly.

use std::f64::consts::PI;

use super::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaConventions {
    /// Half-wave voltage of the electrode, volts.
    pub vpi: f64,
    /// `π·V/Vπ`.
    pub phase: f64,
    /// `V/Vπ`.
    pub literal: f64,
}

pub fn beta_from_voltage(v_volts: f64, vpi_l_volt_cm: f64, electrode_length_cm: f64) -> CliResult<BetaConventions> {
    if !(v_volts >= 0.0) || !v_volts.is_finite() {
        return Err(CliError::config(format!("voltage {v_volts} must be non-negative")));
    }
    if !(vpi_l_volt_cm > 0.0) || !vpi_l_volt_cm.is_finite() {
        return Err(CliError::config(format!("Vpi*L {vpi_l_volt_cm} must be positive")));
    }
    if !(electrode_length_cm > 0.0) || !electrode_length_cm.is_finite() {
        return Err(CliError::config(format!(
            "electrode length {electrode_length_cm} must be positive"
        )));
    }
    let vpi = vpi_l_volt_cm / electrode_length_cm;
    Ok(BetaConventions {
        vpi,
        phase: PI * v_volts / vpi,
        literal: v_volts / vpi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_wave_voltage_gives_pi() {
        let b = beta_from_voltage(4.0 / 0.03, 4.0, 0.03).unwrap();
        assert!((b.phase - PI).abs() < 1e-12);
        assert!((b.literal - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_voltage() {
        let b = beta_from_voltage(0.0, 4.0, 0.03).unwrap();
        assert_eq!((b.phase, b.literal), (0.0, 0.0));
    }

    #[test]
    fn preset_drive_numbers() {
        let b = beta_from_voltage(2.1, 4.0, 0.03).unwrap();
        assert!((b.literal - 0.01575).abs() < 1e-12);
        assert!((b.phase - 0.049480084294039).abs() < 1e-12);
        assert!((b.phase - 0.0942).abs() > 0.04 && (b.literal - 0.0942).abs() > 0.07);
    }

    #[test]
    fn invalid_inputs() {
        assert!(beta_from_voltage(-1.0, 4.0, 0.03).is_err());
        assert!(beta_from_voltage(1.0, 0.0, 0.03).is_err());
        assert!(beta_from_voltage(1.0, 4.0, -0.03).is_err());
    }
}
