//! Figure-reproduction presets. Each figure is one or more labelled sweeps
//! written into a single CSV with a leading `series` column.

use std::f64::consts::PI;
use std::io::Write;

use super::config::{Preset, RunConfig, SweepAxis, SweepSpec, Spacing};
use super::sweep::{csv_columns, run_sweep, units_header, write_rows, SweepTable};
use super::{CliError, CliResult};
use crate::cmmr::critical_coupling_bias;
use crate::device::DeviceKind;
use crate::fmmr::PAPER_ALPHA;

pub const FIGURE_IDS: [&str; 9] = [
    "fig2a", "fig2b", "fig3", "fig4a", "fig4b", "fig5", "fig6", "fig7b", "fig8",
];

/// Second bias of the two-bias CMMR response; only the first (0.15) is given with the figure.
/// 0.40 rad sits next to critical coupling (0.4007 rad at α = 0.98).
pub const FIG5_SECOND_BIAS: f64 = 0.40;

pub struct Figure {
    pub id: &'static str,
    pub title: &'static str,
    pub notes: Vec<String>,
    pub series: Vec<(String, RunConfig)>,
}

fn sweep(axis: SweepAxis, start: f64, stop: f64, points: usize, spacing: Spacing) -> SweepSpec {
    SweepSpec::new(axis, start, stop, points, spacing).expect("figure sweeps are valid")
}

fn paper(device: DeviceKind, sweep: SweepSpec) -> RunConfig {
    RunConfig {
        device: Some(device),
        preset: Some(Preset::Paper),
        sweep: Some(sweep),
        ..RunConfig::default()
    }
}

fn fmmr_detuning_sweep(f: f64) -> RunConfig {
    RunConfig {
        frequency: Some(f),
        ..paper(DeviceKind::Fmmr, sweep(SweepAxis::Bias, -PI, PI, 361, Spacing::Linear))
    }
}

fn cmmr_bias_sweep(f: f64) -> RunConfig {
    RunConfig {
        frequency: Some(f),
        ..paper(DeviceKind::Cmmr, sweep(SweepAxis::Bias, 0.0, PI, 361, Spacing::Linear))
    }
}

pub fn figure(id: &str) -> CliResult<Figure> {
    let frequency_axis = |stop: f64| sweep(SweepAxis::Frequency, 1e9, stop, 100, Spacing::Linear);
    let fig = match id {
        "fig2a" | "fig2b" => {
            let f = if id == "fig2a" { 5e9 } else { 50e9 };
            Figure {
                id: if id == "fig2a" { "fig2a" } else { "fig2b" },
                title: "FMMR field sidebands d0, d±1, d±2 vs ring loop phase",
                notes: vec![format!(
                    "axes: sweep_value = ring loop phase [rad] over -pi..pi (0 = on resonance); f_RF = {} GHz; alpha 0.98, rho 0.97, beta 0.0942",
                    f / 1e9
                )],
                series: vec![(format!("f={}GHz", f / 1e9), fmmr_detuning_sweep(f))],
            }
        }
        "fig3" => Figure {
            id: "fig3",
            title: "FMMR detected intensity response vs RF frequency",
            notes: vec![
                "axes: sweep_value = f_RF [Hz], 1-100 GHz; level_db_h1/h2 are the first and second harmonic".into(),
                "bias: loop phase for 6 GHz laser-resonance detuning (-2*pi*6e9*t_d)".into(),
            ],
            series: vec![("fmmr".into(), paper(DeviceKind::Fmmr, frequency_axis(100e9)))],
        },
        "fig4a" | "fig4b" => {
            let f = if id == "fig4a" { 5e9 } else { 50e9 };
            Figure {
                id: if id == "fig4a" { "fig4a" } else { "fig4b" },
                title: "CMMR field sidebands d0, d±1, d±2 vs coupler bias",
                notes: vec![format!(
                    "axes: sweep_value = coupler bias [rad] over 0..pi (0 = zero coupling, {:.6} = critical coupling); f_RF = {} GHz",
                    critical_coupling_bias(PAPER_ALPHA),
                    f / 1e9
                )],
                series: vec![(format!("f={}GHz", f / 1e9), cmmr_bias_sweep(f))],
            }
        }
        "fig5" => {
            let series = [0.15, FIG5_SECOND_BIAS]
                .into_iter()
                .map(|b| {
                    (
                        format!("bias={b}"),
                        RunConfig {
                            bias: Some(b),
                            ..paper(DeviceKind::Cmmr, frequency_axis(100e9))
                        },
                    )
                })
                .collect();
            Figure {
                id: "fig5",
                title: "CMMR detected intensity response vs RF frequency at two biases",
                notes: vec![
                    "axes: sweep_value = f_RF [Hz], 1-100 GHz".into(),
                    format!(
                        "bias: 0.15 rad and {FIG5_SECOND_BIAS} rad; the second value is an assumption (next to critical coupling, {:.6} rad)",
                        critical_coupling_bias(PAPER_ALPHA)
                    ),
                ],
                series,
            }
        }
        "fig6" => Figure {
            id: "fig6",
            title: "CMMR fundamental, second and third harmonic vs RF frequency",
            notes: vec!["axes: sweep_value = f_RF [Hz], 1-200 GHz; bias 0.12 rad (between zero and critical coupling)".into()],
            series: vec![("cmmr".into(), paper(DeviceKind::Cmmr, frequency_axis(200e9)))],
        },
        "fig7b" => Figure {
            id: "fig7b",
            title: "DCMMR fundamental, second and third harmonic vs RF frequency",
            notes: vec![
                "axes: sweep_value = f_RF [Hz], 1-200 GHz; bias 0.12 rad on both rings".into(),
                "rings driven 90 degrees apart in RF phase, recombined with a 90 degree optical phase".into(),
            ],
            series: vec![("dcmmr".into(), paper(DeviceKind::Dcmmr, frequency_axis(200e9)))],
        },
        "fig8" => {
            let drive = sweep(SweepAxis::Drive, 1e-3, 0.3, 61, Spacing::Log);
            let series = [DeviceKind::Cmmr, DeviceKind::Dcmmr, DeviceKind::Mzi]
                .into_iter()
                .map(|k| {
                    (
                        k.name().to_string(),
                        RunConfig {
                            frequency: Some(100e9),
                            ..paper(k, drive)
                        },
                    )
                })
                .collect();
            Figure {
                id: "fig8",
                title: "fundamental, H2 and H3 vs drive at 100 GHz: CMMR, DCMMR and MZI",
                notes: vec![
                    "axes: sweep_value = beta [rad], 1e-3..0.3 log-spaced; f_RF = 100 GHz".into(),
                    "bias: CMMR/DCMMR 0.12 rad; MZI at quadrature (pi/2)".into(),
                ],
                series,
            }
        }
        other => {
            return Err(CliError::config(format!(
                "unknown figure '{other}'; valid ids: {}",
                FIGURE_IDS.join(", ")
            )))
        }
    };
    Ok(fig)
}

/// Solves every series of a figure.
pub fn run_figure(fig: &Figure) -> CliResult<Vec<(String, SweepTable)>> {
    fig.series
        .iter()
        .map(|(label, config)| Ok((label.clone(), run_sweep(&config.resolve()?)?)))
        .collect()
}

pub fn write_figure(out: &mut (impl Write + ?Sized), fig: &Figure, tables: &[(String, SweepTable)]) -> std::io::Result<()> {
    writeln!(out, "# ringmod repro {}: {}", fig.id, fig.title)?;
    for note in &fig.notes {
        writeln!(out, "# {note}")?;
    }
    for (label, table) in tables {
        writeln!(out, "# series {label}: {}", table.run.config.to_json())?;
        for line in units_header(table) {
            writeln!(out, "# [{label}] {}", line.trim_start_matches("# "))?;
        }
    }
    let harmonics = tables.first().map(|t| t.1.run.harmonics).unwrap_or(0);
    writeln!(out, "{}", csv_columns(harmonics, true).join(","))?;
    for (label, table) in tables {
        write_rows(out, table, Some(label))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_figure_resolves() {
        for id in FIGURE_IDS {
            let fig = figure(id).unwrap();
            assert_eq!(fig.id, id);
            assert!(!fig.notes.is_empty());
            for (_, c) in &fig.series {
                c.resolve().unwrap();
            }
        }
    }

    #[test]
    fn unknown_figure_lists_ids() {
        let err = figure("fig9").err().unwrap();
        assert_eq!(err.code, super::super::EXIT_CONFIG);
        assert!(err.message.contains("fig7b"));
    }

    #[test]
    fn fig5_documents_second_bias() {
        let fig = figure("fig5").unwrap();
        assert_eq!(fig.series.len(), 2);
        assert!(fig.notes.iter().any(|n| n.contains("assumption")));
    }
}
