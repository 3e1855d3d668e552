use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ringmod::bessel::bessel_first_kind;
use ringmod::cmmr::{critical_coupling_bias, mzi_coupler_operators, ring_feedback_operator, solve_cmmr, CmmrParams};
use ringmod::composite::{solve_mzi_baseline, MziBaselineParams};
use ringmod::detection::{ip3_improvement_vs_mzi, response_sweep};
use ringmod::device::{Device, DeviceKind};
use ringmod::fmmr::{fmmr_round_trip_operator, FmmrParams, PAPER_ALPHA, PAPER_BETA, PAPER_RHO};
use ringmod::harmonic::{
    apply_toeplitz, phase_drive_kernel, solve_feedback, trig_drive_kernels, ComplexSpectrum, HarmonicWindow,
    ToeplitzKernel,
};
use ringmod::td::{
    cross_validate, dft_harmonics, simulate_device_td, snap_frequency, TdConfig, RELATIVE_ERROR_FLOOR,
};
use ringmod::Complex64;

/// `J_n(x)` from the ascending series `Σ_k (-1)^k (x/2)^{2k+n} / (k!(k+n)!)`.
fn bessel_series(n: u32, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..60 {
        term *= -half * half / (k as f64 * (k + n) as f64);
        sum += term;
    }
    sum
}

/// `(1/2π)∫ g(u)·e^{+i·n·u} du` by the trapezoid rule, exact for band-limited periodic `g`.
fn fourier_coefficient(n: i64, g: impl Fn(f64) -> Complex64) -> Complex64 {
    let m = 4096;
    (0..m)
        .map(|j| {
            let u = TAU * j as f64 / m as f64;
            g(u) * Complex64::from_polar(1.0, n as f64 * u)
        })
        .sum::<Complex64>()
        / m as f64
}

// ---- Bessel and kernels ----

#[test]
fn bessel_drive_depth_values_match_series() {
    let j1 = bessel_first_kind(1, 0.0942).unwrap();
    assert!((j1 - 0.047048).abs() <= 1e-6, "{j1}");
    assert!((j1 - bessel_series(1, 0.0942)).abs() <= 1e-15);
    let j2 = bessel_first_kind(2, 0.0942).unwrap();
    // the ascending series gives 1.108385e-3 at this argument
    assert!((j2 - 1.108385e-3).abs() <= 1e-7, "{j2}");
    assert!((j2 - bessel_series(2, 0.0942)).abs() <= 1e-16);
}

#[test]
fn phase_kernel_first_band_is_j1() {
    let k = phase_drive_kernel(0.0942, 0.0, HarmonicWindow::new(8)).unwrap();
    assert!((k.coefficient(1).norm() - 0.047048).abs() <= 1e-6);
    assert!((k.coefficient(1).norm() - bessel_series(1, 0.0942)).abs() <= 1e-15);
}

#[test]
fn cos_kernel_dc_matches_quadrature() {
    let (x, beta) = (0.06, 0.0471);
    let (cos, _) = trig_drive_kernels(x, beta, 0.0, HarmonicWindow::new(8)).unwrap();
    let closed = x.cos() * bessel_series(0, beta);
    let quad = fourier_coefficient(0, |u| Complex64::new((x + beta * u.cos()).cos(), 0.0));
    assert!((closed - 0.997647012173137).abs() <= 1e-9, "{closed}");
    assert!((cos.coefficient(0) - quad).norm() <= 1e-9);
    assert!((cos.coefficient(0).re - closed).abs() <= 1e-9);
}

#[test]
fn toeplitz_action_equals_dense_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let w = HarmonicWindow::new(4);
    let mut draw = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let coefficients: Vec<Complex64> = (0..17).map(|_| draw()).collect();
    let input: Vec<Complex64> = (0..9).map(|_| draw()).collect();
    let kernel = ToeplitzKernel::from_coefficients(w, coefficients).unwrap();
    let spectrum = ComplexSpectrum::new(w, input.clone(), TAU * 1e9).unwrap();

    let dense = DMatrix::from_fn(9, 9, |m, n| kernel.coefficient(m as i64 - n as i64));
    let want = dense * DVector::from_vec(input);
    let got = apply_toeplitz(&kernel, &spectrum).unwrap();
    for (g, w) in got.amplitudes().iter().zip(want.iter()) {
        assert!((g - w).norm() <= 1e-14);
    }
}

// ---- ring operators ----

#[test]
fn scalar_feedback_at_resonance() {
    let w = HarmonicWindow::new(4);
    let p = FmmrParams::new(PAPER_ALPHA, PAPER_RHO, 2e-12, 0.0, 0.0, 10e9);
    let loop_op = fmmr_round_trip_operator(&p, w).unwrap().scaled(Complex64::new(PAPER_RHO, 0.0));
    let forcing = ComplexSpectrum::carrier(w, p.rf_angular_frequency(), Complex64::new(1.0, 0.0));
    let x = solve_feedback(&loop_op, &forcing).unwrap();
    let want = 1.0 / (1.0 - PAPER_ALPHA * PAPER_RHO);
    assert!((x.get(0).re - 20.2429).abs() <= 1e-4);
    assert!((x.get(0) - want).norm() <= 1e-12);
}

#[test]
fn fmmr_operator_first_band() {
    let p = FmmrParams::new(PAPER_ALPHA, PAPER_RHO, 2e-12, 0.0, PAPER_BETA, 10e9);
    let m = fmmr_round_trip_operator(&p, HarmonicWindow::new(8)).unwrap();
    assert!((m.entry(1, 0).norm() - 0.046107).abs() <= 1e-6);
    for (row, col) in [(3i64, -2i64), (-4, 1), (0, 0), (2, 2)] {
        let band = PAPER_ALPHA * bessel_series((row - col).unsigned_abs() as u32, PAPER_BETA).abs();
        assert!((m.entry(row, col).norm() - band).abs() <= 1e-15);
    }
}

#[test]
fn coupler_at_critical_bias_matches_loss() {
    let bias = critical_coupling_bias(PAPER_ALPHA);
    assert!((bias - 0.400670).abs() <= 1e-6, "{bias}");
    let (m1, _) = mzi_coupler_operators(bias, 0.0, 0.0, HarmonicWindow::new(4)).unwrap();
    for n in -4..=4 {
        assert!((m1.entry(n, n).norm() - PAPER_ALPHA).abs() <= 1e-15);
    }
}

#[test]
fn cmmr_critical_coupling_nulls_carrier() {
    let p = CmmrParams {
        beta: 0.0,
        ..CmmrParams::paper(10e9).with_bias(critical_coupling_bias(PAPER_ALPHA))
    };
    let d = solve_cmmr(&p, HarmonicWindow::new(4)).unwrap().output;
    assert!(d.get(0).norm() <= 1e-6);
}

#[test]
fn cmmr_delay_steps_by_rf_phase() {
    let p = CmmrParams::paper(5e9);
    let m3 = ring_feedback_operator(&p, HarmonicWindow::new(4)).unwrap();
    let step = TAU * 5e9 * 2e-12;
    assert!((step - TAU * 0.01).abs() < 1e-15);
    for n in -4..4 {
        let ratio = m3.entry(n + 1, n + 1) / m3.entry(n, n);
        assert!((ratio - Complex64::from_polar(1.0, step)).norm() <= 1e-12);
        assert!((m3.entry(n, n).norm() - PAPER_ALPHA).abs() <= 1e-15);
    }
}

#[test]
fn mzi_first_sideband_matches_quadrature() {
    let beta = 0.0471;
    let d = solve_mzi_baseline(&MziBaselineParams::quadrature(beta, 10e9), HarmonicWindow::new(8)).unwrap();
    let quad = fourier_coefficient(1, |u| Complex64::new(0.0, -(FRAC_PI_2 / 2.0 + beta * u.cos()).sin()));
    assert!((d.get(1).norm() - quad.norm()).abs() <= 1e-9);
    assert!((d.get(1) - quad).norm() <= 1e-9);
}

// ---- detection ----

#[test]
fn fmmr_roll_off_peaks_near_five_gigahertz() {
    let device = Device::paper(DeviceKind::Fmmr, 1e9);
    let freqs: Vec<f64> = (1..=100).map(|k| k as f64 * 1e9).collect();
    let table = response_sweep(&device, &freqs, &[1], HarmonicWindow::default()).unwrap();
    let levels: Vec<f64> = table.iter().map(|r| r.fundamental_db().unwrap()).collect();
    let peak = (0..levels.len()).max_by(|&a, &b| levels[a].total_cmp(&levels[b])).unwrap();
    let peak_hz = freqs[peak];
    let falling = (9..levels.len() - 1).all(|i| levels[i + 1] < levels[i]);
    assert!(falling, "fundamental not monotonically decreasing above 10 GHz");
    assert!((peak_hz - 5e9).abs() <= 1e9, "fundamental peaks at {} GHz", peak_hz / 1e9);
}

#[test]
fn cmmr_bias_015_response_is_flat() {
    let device = Device::paper(DeviceKind::Cmmr, 1e9).with_bias(0.15);
    let freqs: Vec<f64> = (1..=40).map(|k| k as f64 * 5e9).collect();
    let table = response_sweep(&device, &freqs, &[1], HarmonicWindow::default()).unwrap();
    let levels: Vec<f64> = table.iter().map(|r| r.fundamental_db().unwrap()).collect();
    let (lo, hi) = levels.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    assert!(hi - lo <= 3.0, "fundamental spans {:.2} dB over 5-200 GHz", hi - lo);
}

#[test]
fn ip3_improvement_at_five_gigahertz_is_small() {
    let v = ip3_improvement_vs_mzi(&Device::paper(DeviceKind::Cmmr, 5e9), 5e9).unwrap();
    assert!(v.abs() < 3.0, "{v}");
}

#[test]
fn ip3_improvement_at_fifty_and_hundred_gigahertz() {
    let device = Device::paper(DeviceKind::Cmmr, 50e9);
    let at50 = ip3_improvement_vs_mzi(&device, 50e9).unwrap();
    let at100 = ip3_improvement_vs_mzi(&device, 100e9).unwrap();
    assert!((at50 - 10.0).abs() <= 2.0, "{at50}");
    assert!((at100 - 12.5).abs() <= 2.0, "{at100}");
}

#[test]
fn ip3_improvement_at_two_hundred_gigahertz() {
    let v = ip3_improvement_vs_mzi(&Device::paper(DeviceKind::Cmmr, 200e9), 200e9).unwrap();
    assert!((v - 17.0).abs() <= 2.0, "measured {v:.2} dB");
}

// ---- time-domain oracle ----

fn settled(device: &Device, p: usize, q: usize) -> (Device, TdConfig) {
    let config = TdConfig::for_device(device, p, q).unwrap();
    let f = match device {
        Device::Mzi(_) => device.rf_frequency_hz(),
        _ => snap_frequency(device.rf_frequency_hz(), config.time_step(device)).unwrap(),
    };
    (device.with_rf_frequency(f), config)
}

fn td_spectrum(device: &Device, config: &TdConfig) -> ComplexSpectrum {
    dft_harmonics(&simulate_device_td(device, config).unwrap(), HarmonicWindow::new(6)).unwrap()
}

#[test]
fn td_halving_time_step_is_converged() {
    for kind in [DeviceKind::Fmmr, DeviceKind::Cmmr, DeviceKind::Dcmmr, DeviceKind::Mzi] {
        let (device, coarse) = settled(&Device::paper(kind, 50e9), 256, 4);
        let fine = TdConfig { samples_per_round_trip: 512, ..coarse };
        let a = td_spectrum(&device, &coarse);
        let b = td_spectrum(&device, &fine);
        let change = a.max_abs_diff(&b, 3);
        assert!(change < 1e-9, "{kind}: {change:e}");
    }
}

#[test]
fn td_doubling_settle_time_is_converged() {
    for kind in [DeviceKind::Fmmr, DeviceKind::Cmmr, DeviceKind::Dcmmr] {
        let (device, config) = settled(&Device::paper(kind, 50e9), 256, 4);
        let longer = TdConfig { settle_round_trips: 2 * config.settle_round_trips, ..config };
        let change = td_spectrum(&device, &config).max_abs_diff(&td_spectrum(&device, &longer), 3);
        assert!(change < 1e-12, "{kind}: {change:e}");
    }
}

#[test]
fn td_lossless_rings_conserve_power() {
    for kind in [DeviceKind::Fmmr, DeviceKind::Cmmr] {
        for f in [5e9, 50e9] {
            // α = 1 with a partially transmitting coupler keeps the loop gain below one
            let device = Device::paper(kind, f).lossless();
            let (device, config) = settled(&device, 256, 4);
            let run = simulate_device_td(&device, &config).unwrap();
            let power = run.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / run.samples.len() as f64;
            assert!((power - 1.0).abs() <= 1e-10, "{kind} @ {f:e}: {power}");
        }
    }
}

#[test]
fn td_fmmr_cross_validates_at_five_gigahertz() {
    let device = Device::paper(DeviceKind::Fmmr, 5e9);
    let config = TdConfig::for_device(&device, 256, 4).unwrap();
    let cv = cross_validate(&device, HarmonicWindow::default(), &config, 0.0).unwrap();
    assert!(cv.max_relative_error < 1e-6, "{:?}", cv.per_harmonic);
}

#[test]
fn td_cmmr_cross_validates_at_fifty_gigahertz() {
    let device = Device::paper(DeviceKind::Cmmr, 50e9);
    let config = TdConfig::for_device(&device, 256, 4).unwrap();
    let cv = cross_validate(&device, HarmonicWindow::default(), &config, 0.0).unwrap();
    assert!(cv.max_relative_error < 1e-6, "{:?}", cv.per_harmonic);
}

#[test]
fn td_undriven_devices_cross_validate_exactly() {
    for kind in [DeviceKind::Fmmr, DeviceKind::Cmmr, DeviceKind::Dcmmr, DeviceKind::Mzi] {
        let device = Device::paper(kind, 50e9).with_beta(0.0);
        let config = TdConfig::for_device(&device, 256, 4).unwrap();
        let cv = cross_validate(&device, HarmonicWindow::default(), &config, 0.0).unwrap();
        assert!(cv.max_relative_error < 1e-12, "{kind}: {:?} (floor {RELATIVE_ERROR_FLOOR:e})", cv.per_harmonic);
    }
}

#[test]
fn td_rejects_non_commensurate_frequency() {
    let device = Device::paper(DeviceKind::Fmmr, PI * 1e10);
    let config = TdConfig::for_device(&device, 256, 4).unwrap();
    let err = simulate_device_td(&device, &config).unwrap_err().to_string();
    assert!(err.contains("nearest commensurate frequency"), "{err}");
}
