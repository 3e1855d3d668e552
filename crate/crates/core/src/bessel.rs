//! Bessel functions of the first kind, integer order.
//!
//! Drive depths in this crate are well below one radian, so the working
//! regime is small arguments. For `|x| <= 2` the ascending series converges
//! in a handful of terms without cancellation; above that, Miller's downward
//! recurrence normalized by `J0 + 2·ΣJ_2k = 1` is used.

use crate::error::{Error, Result};

/// Largest supported `|x|`.
pub const MAX_ARGUMENT: f64 = 20.0;

const SERIES_LIMIT: f64 = 2.0;

/// `J_k(x)` accurate to about `1e-15` absolute for `|x| <= 20`.
pub fn bessel_first_kind(order: i32, x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > MAX_ARGUMENT {
        return Err(Error::domain(format!(
            "Bessel argument {x} outside supported range |x| <= {MAX_ARGUMENT}"
        )));
    }
    let k = order.unsigned_abs();
    // J_{-k}(x) = (-1)^k J_k(x) and J_k(-x) = (-1)^k J_k(x)
    let mut sign = 1.0;
    if order < 0 && k % 2 == 1 {
        sign = -sign;
    }
    if x < 0.0 && k % 2 == 1 {
        sign = -sign;
    }
    let ax = x.abs();
    let value = if ax == 0.0 {
        if k == 0 {
            1.0
        } else {
            0.0
        }
    } else if ax <= SERIES_LIMIT {
        ascending_series(k, ax)
    } else {
        miller(k, ax)
    };
    Ok(sign * value)
}

/// All orders `0..=max_order` at once; entry `k` is `J_k(x)`.
pub fn bessel_table(max_order: u32, x: f64) -> Result<Vec<f64>> {
    (0..=max_order as i32)
        .map(|k| bessel_first_kind(k, x))
        .collect()
}

fn ascending_series(k: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // (x/2)^k / k!, built as a product so large k underflows to zero instead of overflowing
    let mut term = 1.0;
    for j in 1..=k {
        term *= half / j as f64;
        if term == 0.0 {
            return 0.0;
        }
    }
    let q = half * half;
    let mut sum = term;
    let mut m = 0u32;
    loop {
        m += 1;
        term *= -q / (m as f64 * (m + k) as f64);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() || m > 200 {
            break;
        }
    }
    sum
}

fn miller(k: u32, x: f64) -> f64 {
    const RESCALE_ABOVE: f64 = 1e250;
    let start_from = k.max(x.ceil() as u32);
    // start well above the turning point so the backward recurrence settles on the minimal solution
    let mut m = start_from + 30 + (40.0 * start_from as f64).sqrt() as u32;
    if m % 2 == 1 {
        m += 1;
    }
    let two_over_x = 2.0 / x;
    let mut upper = 0.0; // J_{j+1}
    let mut current = 1e-300; // J_j
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for j in (1..=m).rev() {
        let lower = j as f64 * two_over_x * current - upper;
        upper = current;
        current = lower;
        // `current` now holds J_{j-1}
        if j - 1 == k {
            wanted = current;
        }
        if (j - 1) % 2 == 0 && j - 1 > 0 {
            norm += 2.0 * current;
        }
        if current.abs() > RESCALE_ABOVE {
            current /= RESCALE_ABOVE;
            upper /= RESCALE_ABOVE;
            norm /= RESCALE_ABOVE;
            wanted /= RESCALE_ABOVE;
        }
    }
    norm += current;
    wanted / norm
}
