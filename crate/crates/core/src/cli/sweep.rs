//! Sweep evaluation and CSV emission.
//!
//! Rows are solved in parallel and collected in sweep order, so the output
//! bytes do not depend on the thread count.

use std::io::Write;

use rayon::prelude::*;

use super::config::{ResolvedRun, CONFIG_LINE_PREFIX};
use super::{format_number, CliError, CliResult};
use crate::detection::{harmonic_level_db, intensity_harmonics};
use crate::device::{Device, DEFAULT_MAX_ORDER};
use crate::harmonic::{ComplexSpectrum, HarmonicWindow, CONVERGENCE_TOLERANCE};
use crate::td::{cross_validate, TdConfig, DEFAULT_PEAK_FLOOR};

/// Every `CONVERGENCE_STRIDE`-th row (and the last) is re-solved at `2N`.
pub const CONVERGENCE_STRIDE: usize = 20;

/// Detected intensity harmonics written as dB levels.
pub const LEVEL_HARMONICS: usize = 3;

/// Samples per round trip and RF periods used by `--oracle-check`.
pub const ORACLE_SAMPLES_PER_ROUND_TRIP: usize = 256;
pub const ORACLE_RF_PERIODS: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub field: ComplexSpectrum,
    pub dc_power: f64,
    /// `level_db[k - 1]` for harmonic `k`.
    pub level_db: [f64; LEVEL_HARMONICS],
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceCheck {
    pub row: usize,
    pub change: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleCheck {
    pub snapped_frequency_hz: f64,
    pub max_relative_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub run: ResolvedRun,
    /// Truncation order the rows were solved at.
    pub order: usize,
    pub checks: Vec<ConvergenceCheck>,
    pub rows: Vec<SweepRow>,
    pub oracle: Option<OracleCheck>,
}

impl SweepTable {
    pub fn all_converged(&self) -> bool {
        self.checks.iter().all(|c| c.converged)
    }
}

/// Rows re-solved at `2N`: every [`CONVERGENCE_STRIDE`]-th row and the last one.
pub fn checked_rows(points: usize) -> Vec<usize> {
    let mut rows: Vec<usize> = (0..points).step_by(CONVERGENCE_STRIDE).collect();
    if points > 0 && rows.last() != Some(&(points - 1)) {
        rows.push(points - 1);
    }
    rows
}

fn solve_row(device: &Device, value: f64, window: HarmonicWindow) -> crate::Result<SweepRow> {
    let field = device.solve(window)?;
    let intensity = intensity_harmonics(&field, LEVEL_HARMONICS)?;
    let mut level_db = [0.0; LEVEL_HARMONICS];
    for (k, slot) in level_db.iter_mut().enumerate() {
        *slot = harmonic_level_db(&intensity, k + 1)?;
    }
    Ok(SweepRow {
        value,
        field,
        dc_power: intensity.dc(),
        level_db,
        converged: false,
    })
}

/// Solves the sweep, doubling the order (up to 96) until the sampled rows converge.
pub fn run_sweep(run: &ResolvedRun) -> CliResult<SweepTable> {
    let values = run.sweep.values();
    let sampled = checked_rows(values.len());
    let mut order = run.order;
    let checks = loop {
        let window = HarmonicWindow::new(order);
        let checks = sampled
            .par_iter()
            .map(|&i| {
                run.device_at(values[i])
                    .solve_checked(window)
                    .map(|c| ConvergenceCheck {
                        row: i,
                        change: c.change,
                        converged: c.converged,
                    })
            })
            .collect::<crate::Result<Vec<_>>>()?;
        if checks.iter().all(|c| c.converged) || order * 2 > DEFAULT_MAX_ORDER {
            break checks;
        }
        order *= 2;
    };

    let window = HarmonicWindow::new(order);
    let mut rows = values
        .par_iter()
        .map(|&v| solve_row(&run.device_at(v), v, window))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut current = true;
    let mut next_check = checks.iter().peekable();
    for (i, row) in rows.iter_mut().enumerate() {
        if let Some(c) = next_check.next_if(|c| c.row == i) {
            current = c.converged;
        }
        row.converged = current;
    }

    let oracle = if run.oracle_check {
        let device = run.device_at(values[0]);
        let config = TdConfig::for_device(&device, ORACLE_SAMPLES_PER_ROUND_TRIP, ORACLE_RF_PERIODS)?;
        let cv = cross_validate(&device, window, &config, DEFAULT_PEAK_FLOOR)?;
        Some(OracleCheck {
            snapped_frequency_hz: cv.snapped_frequency_hz,
            max_relative_error: cv.max_relative_error,
        })
    } else {
        None
    };

    Ok(SweepTable {
        run: run.clone(),
        order,
        checks,
        rows,
        oracle,
    })
}

fn signed(n: i64) -> String {
    if n > 0 {
        format!("+{n}")
    } else {
        n.to_string()
    }
}

/// Column names; `with_series` prepends a `series` column.
pub fn csv_columns(harmonics: usize, with_series: bool) -> Vec<String> {
    let h = harmonics as i64;
    let mut cols = Vec::new();
    if with_series {
        cols.push("series".to_string());
    }
    cols.push("sweep_value".to_string());
    cols.extend((-h..=h).map(|n| format!("abs_d{}", signed(n))));
    cols.extend((-h..=h).map(|n| format!("arg_d{}", signed(n))));
    cols.push("I0".to_string());
    cols.extend((1..=LEVEL_HARMONICS).map(|k| format!("level_db_h{k}")));
    cols.push("convergence_ok".to_string());
    cols
}

/// Comment lines describing the columns, shared by `run` and `repro`.
pub fn units_header(table: &SweepTable) -> Vec<String> {
    let axis = table.run.sweep.axis;
    vec![
        format!(
            "# units: sweep_value = {} [{}]; abs_d* = |d_n| per unit input field; arg_d* = arg d_n [rad]; I0 = mean detected power per unit input power; level_db_hk = 20*log10(2|I_k|) [dB re input power]",
            axis.name(),
            axis.unit()
        ),
        format!(
            "# convergence: rows {} re-solved at 2N; convergence_ok = 1 when the latest checked row at or before it moved by less than {CONVERGENCE_TOLERANCE:e} (max |d_n|, |n| <= N)",
            table
                .checks
                .iter()
                .map(|c| c.row.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ),
        format!(
            "# order: N = {} (requested {}, doubled while the check fails, cap {DEFAULT_MAX_ORDER})",
            table.order, table.run.order
        ),
    ]
}

fn oracle_header(table: &SweepTable) -> Option<String> {
    table.oracle.as_ref().map(|o| {
        format!(
            "# oracle: time-domain cross-check at f_RF = {} Hz, max relative error {} (|n| <= 3)",
            format_number(o.snapped_frequency_hz),
            format_number(o.max_relative_error)
        )
    })
}

pub fn write_rows(out: &mut (impl Write + ?Sized), table: &SweepTable, series: Option<&str>) -> std::io::Result<()> {
    let h = table.run.harmonics as i64;
    for row in &table.rows {
        let mut fields: Vec<String> = Vec::new();
        if let Some(s) = series {
            fields.push(s.to_string());
        }
        fields.push(format_number(row.value));
        fields.extend((-h..=h).map(|n| format_number(row.field.get(n).norm())));
        fields.extend((-h..=h).map(|n| format_number(row.field.get(n).arg())));
        fields.push(format_number(row.dc_power));
        fields.extend(row.level_db.iter().map(|l| format_number(*l)));
        fields.push(if row.converged { "1" } else { "0" }.to_string());
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// The full CSV of a single `run`.
pub fn write_csv(out: &mut (impl Write + ?Sized), table: &SweepTable) -> std::io::Result<()> {
    writeln!(
        out,
        "# ringmod run: {} sweep {}",
        table.run.base.kind(),
        table.run.sweep
    )?;
    writeln!(out, "{CONFIG_LINE_PREFIX}{}", table.run.config.to_json())?;
    for line in units_header(table) {
        writeln!(out, "{line}")?;
    }
    if let Some(line) = oracle_header(table) {
        writeln!(out, "{line}")?;
    }
    writeln!(out, "{}", csv_columns(table.run.harmonics, false).join(","))?;
    write_rows(out, table, None)
}

pub fn csv_string(table: &SweepTable) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, table).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

/// One-line summary for stderr.
pub fn summary(table: &SweepTable) -> String {
    let ok = table.checks.iter().filter(|c| c.converged).count();
    let mut s = format!(
        "{} rows, N = {}, convergence {}/{} checked rows ok",
        table.rows.len(),
        table.order,
        ok,
        table.checks.len()
    );
    if let Some(o) = &table.oracle {
        s.push_str(&format!(", oracle max relative error {:.3e}", o.max_relative_error));
    }
    s
}

pub fn strict_failure(table: &SweepTable) -> Option<CliError> {
    if table.all_converged() {
        return None;
    }
    let worst = table
        .checks
        .iter()
        .filter(|c| !c.converged)
        .map(|c| c.row)
        .collect::<Vec<_>>();
    Some(CliError {
        code: super::EXIT_CONVERGENCE,
        message: format!("truncation did not converge at N = {} for rows {worst:?}", table.order),
    })
}
