//! Truncated harmonic-domain algebra.
//!
//! Fields are written `E(t) = Σ_n x_n·e^{-i(ω0 + n·ω_RF)t}`. A memoryless
//! periodic multiplier `g(u) = Σ_k f_k·e^{-iku}`, `u = ω_RF·t`, maps sideband
//! `n` onto `m` with weight `f_{m-n}`: a Toeplitz operator. A pure delay `t_d`
//! multiplies sideband `n` by `e^{i(ω0 + n·ω_RF)t_d}`: a diagonal operator.
//! Every device in this crate is a composition of those two pieces plus
//! scalar couplers, closed by one dense solve of `(I - A)x = f`.

use std::f64::consts::{PI, TAU};
use std::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_first_kind;
use crate::error::{Error, Result};

/// Truncation order used when callers have no reason to pick another.
pub const DEFAULT_ORDER: usize = 24;

/// Largest condition number accepted by [`solve_feedback`].
pub const MAX_CONDITION: f64 = 1e12;

/// Sideband agreement required between orders `N` and `2N` for a result to count as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Symmetric sideband window `-N..=N`; index 0 is the optical carrier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HarmonicWindow {
    order: usize,
}

impl HarmonicWindow {
    pub fn new(order: usize) -> Self {
        Self { order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Always `2·order + 1`.
    pub fn size(&self) -> usize {
        2 * self.order + 1
    }

    pub fn indices(&self) -> RangeInclusive<i64> {
        let n = self.order as i64;
        -n..=n
    }

    pub fn contains(&self, n: i64) -> bool {
        n.unsigned_abs() as usize <= self.order
    }

    /// Storage position of harmonic `n`, if inside the window.
    pub fn position(&self, n: i64) -> Option<usize> {
        self.contains(n).then(|| (n + self.order as i64) as usize)
    }

    pub fn harmonic_at(&self, position: usize) -> i64 {
        position as i64 - self.order as i64
    }

    pub fn doubled(&self) -> Self {
        Self::new(self.order * 2)
    }
}

impl Default for HarmonicWindow {
    fn default() -> Self {
        Self::new(DEFAULT_ORDER)
    }
}

/// Complex field amplitudes of the sidebands in a window, normalized to `|a_0| = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSpectrum {
    window: HarmonicWindow,
    amplitudes: Vec<Complex64>,
    rf_angular_frequency: f64,
}

impl ComplexSpectrum {
    pub fn new(
        window: HarmonicWindow,
        amplitudes: Vec<Complex64>,
        rf_angular_frequency: f64,
    ) -> Result<Self> {
        if amplitudes.len() != window.size() {
            return Err(Error::shape(format!(
                "{} amplitudes for a window of size {}",
                amplitudes.len(),
                window.size()
            )));
        }
        if let Some(pos) = amplitudes.iter().position(|a| !a.is_finite()) {
            return Err(Error::domain(format!(
                "non-finite amplitude at harmonic {}",
                window.harmonic_at(pos)
            )));
        }
        Ok(Self {
            window,
            amplitudes,
            rf_angular_frequency,
        })
    }

    pub fn zeros(window: HarmonicWindow, rf_angular_frequency: f64) -> Self {
        Self {
            window,
            amplitudes: vec![Complex64::new(0.0, 0.0); window.size()],
            rf_angular_frequency,
        }
    }

    /// Unmodulated input: only `a_0` set.
    pub fn carrier(window: HarmonicWindow, rf_angular_frequency: f64, a0: Complex64) -> Self {
        let mut s = Self::zeros(window, rf_angular_frequency);
        s.amplitudes[window.order()] = a0;
        s
    }

    pub(crate) fn from_vector(
        window: HarmonicWindow,
        v: DVector<Complex64>,
        rf_angular_frequency: f64,
    ) -> Result<Self> {
        Self::new(window, v.iter().copied().collect(), rf_angular_frequency)
    }

    pub(crate) fn to_vector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.amplitudes)
    }

    pub fn window(&self) -> HarmonicWindow {
        self.window
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn rf_angular_frequency(&self) -> f64 {
        self.rf_angular_frequency
    }

    pub fn rf_frequency_hz(&self) -> f64 {
        self.rf_angular_frequency / TAU
    }

    /// Amplitude of harmonic `n`; zero outside the window.
    pub fn get(&self, n: i64) -> Complex64 {
        self.window
            .position(n)
            .map(|p| self.amplitudes[p])
            .unwrap_or_default()
    }

    pub fn set(&mut self, n: i64, value: Complex64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::domain("non-finite amplitude"));
        }
        let p = self
            .window
            .position(n)
            .ok_or_else(|| Error::shape(format!("harmonic {n} outside window of order {}", self.window.order())))?;
        self.amplitudes[p] = value;
        Ok(())
    }

    /// `Σ|x_n|²`, the average optical power carried by the spectrum.
    pub fn power(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.power().sqrt()
    }

    /// Re-expresses the spectrum in another window, zero-padding or truncating.
    pub fn resized(&self, window: HarmonicWindow) -> Self {
        let amplitudes = window.indices().map(|n| self.get(n)).collect();
        Self {
            window,
            amplitudes,
            rf_angular_frequency: self.rf_angular_frequency,
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            window: self.window,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
            rf_angular_frequency: self.rf_angular_frequency,
        }
    }

    /// `max_{|n| <= max_harmonic} |x_n - y_n|`, treating missing entries as zero.
    pub fn max_abs_diff(&self, other: &ComplexSpectrum, max_harmonic: usize) -> f64 {
        let n = max_harmonic as i64;
        (-n..=n)
            .map(|k| (self.get(k) - other.get(k)).norm())
            .fold(0.0, f64::max)
    }

    /// Evaluates the baseband (carrier-rotating frame) field at RF phase `u = ω_RF·t`.
    pub fn evaluate(&self, u: f64) -> Complex64 {
        self.window
            .indices()
            .zip(&self.amplitudes)
            .map(|(n, a)| a * Complex64::from_polar(1.0, -(n as f64) * u))
            .sum()
    }
}

/// Fourier coefficients `f_k`, `k ∈ -2N..=2N`, of a periodic function of the RF phase.
///
/// With the project convention `g(u) = Σ_k f_k·e^{-iku}`, the operator on a
/// window of order `N` needs exactly the `4N + 1` coefficients stored here.
#[derive(Clone, Debug, PartialEq)]
pub struct ToeplitzKernel {
    window: HarmonicWindow,
    coefficients: Vec<Complex64>,
}

impl ToeplitzKernel {
    pub fn from_coefficients(window: HarmonicWindow, coefficients: Vec<Complex64>) -> Result<Self> {
        let expected = 4 * window.order() + 1;
        if coefficients.len() != expected {
            return Err(Error::shape(format!(
                "{} kernel coefficients, expected {expected}",
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("non-finite kernel coefficient"));
        }
        Ok(Self {
            window,
            coefficients,
        })
    }

    /// Builds a kernel from `k ↦ f_k`.
    pub fn from_fn(window: HarmonicWindow, f: impl Fn(i64) -> Complex64) -> Result<Self> {
        let m = 2 * window.order() as i64;
        Self::from_coefficients(window, (-m..=m).map(f).collect())
    }

    pub fn identity(window: HarmonicWindow) -> Self {
        Self::shift(window, 0)
    }

    /// Multiplier `e^{-ik·u}`: moves sideband `n` to `n + k`.
    pub fn shift(window: HarmonicWindow, k: i64) -> Self {
        let m = 2 * window.order() as i64;
        Self {
            window,
            coefficients: (-m..=m)
                .map(|j| if j == k { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
                .collect(),
        }
    }

    pub fn window(&self) -> HarmonicWindow {
        self.window
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// `f_k`; zero beyond `|k| = 2N`.
    pub fn coefficient(&self, k: i64) -> Complex64 {
        let m = 2 * self.window.order() as i64;
        if k.abs() > m {
            Complex64::new(0.0, 0.0)
        } else {
            self.coefficients[(k + m) as usize]
        }
    }

    /// `Σ_k |f_k|²`.
    pub fn parseval_sum(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Reconstructs `g(u)` from the stored coefficients.
    pub fn evaluate(&self, u: f64) -> Complex64 {
        let m = 2 * self.window.order() as i64;
        (-m..=m)
            .zip(&self.coefficients)
            .map(|(k, c)| c * Complex64::from_polar(1.0, -(k as f64) * u))
            .sum()
    }

    /// Largest deviation between the reconstruction and `g` over `8N + 1` equally spaced phases.
    pub fn reconstruction_error(&self, g: impl Fn(f64) -> Complex64) -> f64 {
        let samples = 8 * self.window.order() + 1;
        (0..samples)
            .map(|j| {
                let u = TAU * j as f64 / samples as f64;
                (self.evaluate(u) - g(u)).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            window: self.window,
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
        }
    }

    /// Dense `(2N+1)²` matrix with entries `f_{m-n}`.
    pub fn to_operator(&self) -> HarmonicOperator {
        let size = self.window.size();
        let matrix = DMatrix::from_fn(size, size, |row, col| {
            self.coefficient(row as i64 - col as i64)
        });
        HarmonicOperator {
            window: self.window,
            matrix,
        }
    }
}

/// Round-trip delay as a diagonal: entry `n` is `e^{i(θ0 + n·ω_RF·t_d)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelayDiagonal {
    window: HarmonicWindow,
    carrier_phase: f64,
    rf_phase_step: f64,
}

impl DelayDiagonal {
    /// `carrier_phase` is reduced modulo 2π.
    pub fn new(window: HarmonicWindow, carrier_phase: f64, rf_phase_step: f64) -> Result<Self> {
        if !carrier_phase.is_finite() || !rf_phase_step.is_finite() {
            return Err(Error::domain("non-finite delay phase"));
        }
        Ok(Self {
            window,
            carrier_phase: wrap_phase(carrier_phase),
            rf_phase_step,
        })
    }

    pub fn carrier_phase(&self) -> f64 {
        self.carrier_phase
    }

    pub fn rf_phase_step(&self) -> f64 {
        self.rf_phase_step
    }

    pub fn entry(&self, n: i64) -> Complex64 {
        Complex64::from_polar(1.0, self.carrier_phase + n as f64 * self.rf_phase_step)
    }

    pub fn to_operator(&self) -> HarmonicOperator {
        HarmonicOperator::diagonal(self.window, |n| self.entry(n))
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Dense linear operator on the spectra of one window.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicOperator {
    window: HarmonicWindow,
    matrix: DMatrix<Complex64>,
}

impl HarmonicOperator {
    pub fn zeros(window: HarmonicWindow) -> Self {
        Self {
            window,
            matrix: DMatrix::zeros(window.size(), window.size()),
        }
    }

    pub fn identity(window: HarmonicWindow) -> Self {
        Self {
            window,
            matrix: DMatrix::identity(window.size(), window.size()),
        }
    }

    pub fn diagonal(window: HarmonicWindow, entry: impl Fn(i64) -> Complex64) -> Self {
        let mut matrix = DMatrix::zeros(window.size(), window.size());
        for (p, n) in window.indices().enumerate() {
            matrix[(p, p)] = entry(n);
        }
        Self { window, matrix }
    }

    pub fn from_matrix(window: HarmonicWindow, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != window.size() || matrix.ncols() != window.size() {
            return Err(Error::shape(format!(
                "{}x{} matrix for a window of size {}",
                matrix.nrows(),
                matrix.ncols(),
                window.size()
            )));
        }
        Ok(Self { window, matrix })
    }

    pub fn window(&self) -> HarmonicWindow {
        self.window
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Entry coupling input harmonic `n` into output harmonic `m`.
    pub fn entry(&self, m: i64, n: i64) -> Complex64 {
        match (self.window.position(m), self.window.position(n)) {
            (Some(r), Some(c)) => self.matrix[(r, c)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn apply(&self, x: &ComplexSpectrum) -> Result<ComplexSpectrum> {
        self.check_window(x.window())?;
        ComplexSpectrum::from_vector(self.window, &self.matrix * x.to_vector(), x.rf_angular_frequency())
    }

    /// `self · other` (apply `other` first).
    pub fn compose(&self, other: &HarmonicOperator) -> Result<HarmonicOperator> {
        self.check_window(other.window)?;
        Ok(Self {
            window: self.window,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            window: self.window,
            matrix: &self.matrix * factor,
        }
    }

    pub fn add(&self, other: &HarmonicOperator) -> Result<HarmonicOperator> {
        self.check_window(other.window)?;
        Ok(Self {
            window: self.window,
            matrix: &self.matrix + &other.matrix,
        })
    }

    fn check_window(&self, other: HarmonicWindow) -> Result<()> {
        if other != self.window {
            return Err(Error::shape(format!(
                "operator window order {} vs operand order {}",
                self.window.order(),
                other.order()
            )));
        }
        Ok(())
    }
}

/// Jacobi–Anger coefficients of `e^{i·depth·cos(u + rf_phase)}`: `f_k = i^k J_k(depth) e^{-ik·rf_phase}`.
/// `depth` may be negative here.
fn jacobi_anger(depth: f64, rf_phase: f64, window: HarmonicWindow) -> Result<ToeplitzKernel> {
    let m = 2 * window.order() as i32;
    let mut coefficients = Vec::with_capacity((2 * m + 1) as usize);
    for k in -m..=m {
        let j = bessel_first_kind(k, depth)?;
        let phase = PI / 2.0 * k as f64 - k as f64 * rf_phase;
        coefficients.push(Complex64::from_polar(j, phase));
    }
    ToeplitzKernel::from_coefficients(window, coefficients)
}

/// Kernel of the unimodular drive `t ↦ e^{iβ·cos(ω_RF t + θ_RF)}`.
pub fn phase_drive_kernel(depth: f64, rf_phase: f64, window: HarmonicWindow) -> Result<ToeplitzKernel> {
    if !(depth >= 0.0) {
        return Err(Error::domain(format!("modulation depth {depth} must be non-negative")));
    }
    jacobi_anger(depth, rf_phase, window)
}

/// Kernels of `cos(x + β·cos(u + θ_RF))` and `sin(x + β·cos(u + θ_RF))`.
pub fn trig_drive_kernels(
    half_bias: f64,
    depth: f64,
    rf_phase: f64,
    window: HarmonicWindow,
) -> Result<(ToeplitzKernel, ToeplitzKernel)> {
    if !half_bias.is_finite() {
        return Err(Error::domain("non-finite bias"));
    }
    let plus = phase_drive_kernel(depth, rf_phase, window)?;
    let minus = jacobi_anger(-depth, rf_phase, window)?;
    let ep = Complex64::from_polar(1.0, half_bias);
    let em = ep.conj();
    let cos: Vec<Complex64> = plus
        .coefficients()
        .iter()
        .zip(minus.coefficients())
        .map(|(p, q)| 0.5 * (ep * p + em * q))
        .collect();
    let sin: Vec<Complex64> = plus
        .coefficients()
        .iter()
        .zip(minus.coefficients())
        .map(|(p, q)| (ep * p - em * q) / (2.0 * I))
        .collect();
    Ok((
        ToeplitzKernel::from_coefficients(window, cos)?,
        ToeplitzKernel::from_coefficients(window, sin)?,
    ))
}

/// `out_m = Σ_n f_{m-n}·in_n` over the window.
pub fn apply_toeplitz(kernel: &ToeplitzKernel, spectrum: &ComplexSpectrum) -> Result<ComplexSpectrum> {
    let window = kernel.window();
    if spectrum.window() != window {
        return Err(Error::shape(format!(
            "kernel window order {} vs spectrum order {}",
            window.order(),
            spectrum.window().order()
        )));
    }
    let out = window
        .indices()
        .map(|m| {
            window
                .indices()
                .map(|n| kernel.coefficient(m - n) * spectrum.get(n))
                .sum()
        })
        .collect();
    ComplexSpectrum::new(window, out, spectrum.rf_angular_frequency())
}

/// Solves `(I - A)x = forcing` by dense LU, rejecting systems with a 1-norm
/// condition estimate above [`MAX_CONDITION`].
pub fn solve_feedback(loop_operator: &HarmonicOperator, forcing: &ComplexSpectrum) -> Result<ComplexSpectrum> {
    let window = loop_operator.window();
    if forcing.window() != window {
        return Err(Error::shape(format!(
            "loop operator order {} vs forcing order {}",
            window.order(),
            forcing.window().order()
        )));
    }
    let size = window.size();
    let system = DMatrix::<Complex64>::identity(size, size) - loop_operator.matrix();
    let lu = system.clone().lu();
    let inverse = lu.try_inverse().ok_or(Error::Singular {
        condition: f64::INFINITY,
    })?;
    let condition = norm1(&system) * norm1(&inverse);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::Singular { condition });
    }
    let rhs = forcing.to_vector();
    let mut x = &inverse * &rhs;
    // one step of iterative refinement
    let residual = &rhs - &system * &x;
    x += &inverse * residual;
    ComplexSpectrum::from_vector(window, x, forcing.rf_angular_frequency())
}

/// `‖(I - A)x - forcing‖ / ‖forcing‖`.
pub fn feedback_residual(
    loop_operator: &HarmonicOperator,
    x: &ComplexSpectrum,
    forcing: &ComplexSpectrum,
) -> f64 {
    let size = loop_operator.window().size();
    let system = DMatrix::<Complex64>::identity(size, size) - loop_operator.matrix();
    let r = system * x.to_vector() - forcing.to_vector();
    let scale = forcing.norm();
    if scale == 0.0 {
        r.norm()
    } else {
        r.norm() / scale
    }
}

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn window_shape() {
        let w = HarmonicWindow::new(3);
        assert_eq!(w.size(), 7);
        assert_eq!(w.position(0), Some(3));
        assert_eq!(w.position(-3), Some(0));
        assert_eq!(w.position(4), None);
        assert_eq!(w.harmonic_at(6), 3);
        assert_eq!(HarmonicWindow::default().order(), 24);
    }

    #[test]
    fn spectrum_rejects_bad_input() {
        let w = HarmonicWindow::new(1);
        assert!(matches!(ComplexSpectrum::new(w, vec![c(0.0, 0.0); 2], 1.0), Err(Error::Shape(_))));
        assert!(matches!(
            ComplexSpectrum::new(w, vec![c(0.0, 0.0), c(f64::NAN, 0.0), c(0.0, 0.0)], 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn undriven_kernel_is_identity() {
        let w = HarmonicWindow::new(8);
        let k = phase_drive_kernel(0.0, 1.234, w).unwrap();
        for j in -16..=16 {
            let want = if j == 0 { 1.0 } else { 0.0 };
            assert!((k.coefficient(j) - c(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn phase_kernel_magnitudes() {
        let w = HarmonicWindow::new(8);
        let k = phase_drive_kernel(0.0942, 0.0, w).unwrap();
        assert!((k.coefficient(1).norm() - 0.047048).abs() < 1e-6);
        assert!((k.parseval_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rf_phase_is_a_time_shift() {
        let w = HarmonicWindow::new(8);
        let k0 = phase_drive_kernel(0.5, 0.0, w).unwrap();
        let k1 = phase_drive_kernel(0.5, PI / 2.0, w).unwrap();
        for j in -16..=16i64 {
            let a = k0.coefficient(j);
            let b = k1.coefficient(j);
            assert!((a.norm() - b.norm()).abs() < 1e-15);
            let rotated = a * Complex64::from_polar(1.0, -(j as f64) * PI / 2.0);
            assert!((rotated - b).norm() < 1e-15);
        }
    }

    #[test]
    fn negative_depth_rejected() {
        let w = HarmonicWindow::new(2);
        assert!(matches!(phase_drive_kernel(-0.1, 0.0, w), Err(Error::Domain(_))));
        assert!(trig_drive_kernels(0.0, -0.1, 0.0, w).is_err());
    }

    #[test]
    fn trig_kernels_static_limits() {
        let w = HarmonicWindow::new(4);
        let (cos, sin) = trig_drive_kernels(0.0, 0.0, 0.0, w).unwrap();
        assert!((cos.coefficient(0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(sin.coefficients().iter().all(|v| v.norm() < 1e-15));
        let (cos, sin) = trig_drive_kernels(PI / 2.0, 0.0, 0.0, w).unwrap();
        assert!(cos.coefficients().iter().all(|v| v.norm() < 1e-15));
        assert!((sin.coefficient(0) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn kernels_reconstruct_their_functions() {
        let w = HarmonicWindow::new(8);
        let (beta, theta, x) = (0.7, 0.3, 0.4);
        let p = phase_drive_kernel(beta, theta, w).unwrap();
        assert!(p.reconstruction_error(|u| Complex64::from_polar(1.0, beta * (u + theta).cos())) < 1e-12);
        let (cs, sn) = trig_drive_kernels(x, beta, theta, w).unwrap();
        assert!(cs.reconstruction_error(|u| c((x + beta * (u + theta).cos()).cos(), 0.0)) < 1e-12);
        assert!(sn.reconstruction_error(|u| c((x + beta * (u + theta).cos()).sin(), 0.0)) < 1e-12);
    }

    #[test]
    fn toeplitz_identity_and_shift() {
        let w = HarmonicWindow::new(3);
        let mut s = ComplexSpectrum::zeros(w, 1.0);
        s.set(0, c(0.3, -0.2)).unwrap();
        s.set(-2, c(1.0, 0.5)).unwrap();
        assert_eq!(apply_toeplitz(&ToeplitzKernel::identity(w), &s).unwrap(), s);
        let carrier = ComplexSpectrum::carrier(w, 1.0, c(1.0, 0.0));
        let up = apply_toeplitz(&ToeplitzKernel::shift(w, 1), &carrier).unwrap();
        for n in w.indices() {
            let want = if n == 1 { 1.0 } else { 0.0 };
            assert_eq!(up.get(n), c(want, 0.0));
        }
    }

    #[test]
    fn toeplitz_window_mismatch() {
        let k = ToeplitzKernel::identity(HarmonicWindow::new(2));
        let s = ComplexSpectrum::zeros(HarmonicWindow::new(3), 1.0);
        assert!(matches!(apply_toeplitz(&k, &s), Err(Error::Shape(_))));
    }

    #[test]
    fn delay_entries_unimodular() {
        let w = HarmonicWindow::new(5);
        let d = DelayDiagonal::new(w, 7.5, 0.0628).unwrap();
        assert!(d.carrier_phase() < TAU);
        for n in w.indices() {
            assert!((d.entry(n).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn feedback_trivial_cases() {
        let w = HarmonicWindow::new(2);
        let mut f = ComplexSpectrum::zeros(w, 1.0);
        f.set(0, c(0.4, 0.1)).unwrap();
        f.set(1, c(-0.2, 0.0)).unwrap();
        let x = solve_feedback(&HarmonicOperator::zeros(w), &f).unwrap();
        assert!(x.max_abs_diff(&f, 2) < 1e-15);

        let w0 = HarmonicWindow::new(0);
        let f0 = ComplexSpectrum::carrier(w0, 1.0, c(1.0, -1.0));
        let half = HarmonicOperator::identity(w0).scaled(c(0.5, 0.0));
        let x0 = solve_feedback(&half, &f0).unwrap();
        assert!((x0.get(0) - c(2.0, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn feedback_singular() {
        let w = HarmonicWindow::new(1);
        let f = ComplexSpectrum::carrier(w, 1.0, c(1.0, 0.0));
        let err = solve_feedback(&HarmonicOperator::identity(w), &f).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }

    #[test]
    fn operator_entry_lookup() {
        let w = HarmonicWindow::new(2);
        let k = ToeplitzKernel::from_fn(w, |j| c(j as f64, 0.0)).unwrap();
        let op = k.to_operator();
        assert_eq!(op.entry(2, -1), c(3.0, 0.0));
        assert_eq!(op.entry(3, 0), c(0.0, 0.0));
    }
}
