//! Harmonic-balance analysis of electro-optic micro-ring modulators.
//!
//! A periodically driven optical loop is represented in a truncated basis of
//! optical sidebands `ω0 + n·ω_RF`, `n ∈ -N..=N`. Phase and coupling
//! modulation become Toeplitz operators whose bands are Bessel functions of
//! the drive depth (Jacobi–Anger expansion), the ring delay becomes a diagonal
//! phase operator, and the steady state of the feedback loop is one small
//! dense linear solve.
//!
//! Modules:
//!
//! - [`bessel`], [`harmonic`]: sideband algebra shared by all devices.
//! - [`fmmr`]: resonance-frequency-modulated ring.
//! - [`cmmr`]: coupling-modulated ring (MZI coupler inside the loop).
//! - [`composite`]: dual-CMMR linearized geometry and the standalone MZI baseline.
//! - [`detection`]: detected intensity harmonics, dB levels, IP3 and SFDR.
//! - [`td`]: brute-force time-domain delay-line simulation used as an oracle.
//! - [`device`]: a closed enum over the four device types.
//! - [`cli`]: configuration, sweeps and CSV emission behind the `ringmod` binary.

pub mod bessel;
pub mod cli;
pub mod cmmr;
pub mod composite;
pub mod detection;
pub mod device;
pub mod error;
pub mod fmmr;
pub mod harmonic;
pub mod td;

pub use error::{Error, Result};
pub use num_complex::Complex64;
