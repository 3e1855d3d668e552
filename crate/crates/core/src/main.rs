use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ringmod::cli::config::{parse_si, Preset, RunConfig, SweepSpec};
use ringmod::cli::repro::{figure, run_figure, write_figure};
use ringmod::cli::sweep::{run_sweep, strict_failure, summary, write_csv};
use ringmod::cli::verify::verify;
use ringmod::cli::voltage::beta_from_voltage;
use ringmod::cli::{CliError, CliResult, EXIT_VERIFY};
use ringmod::device::DeviceKind;

#[derive(Parser)]
#[command(name = "ringmod", version, about = "Harmonic analysis of electro-optic micro-ring modulators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep one parameter and write sidebands and detected harmonic levels as CSV.
    Run(RunArgs),
    /// Emit the sweep behind a named figure preset.
    Repro {
        /// fig2a, fig2b, fig3, fig4a, fig4b, fig5, fig6, fig7b or fig8
        id: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Cross-check against the time-domain oracle and run the invariant suite.
    Verify {
        #[arg(long)]
        device: DeviceKind,
        #[arg(long, default_value = "paper")]
        preset: Preset,
    },
    /// Modulation depth for a drive voltage.
    BetaFromVoltage {
        /// Drive amplitude, volts.
        #[arg(long, value_parser = parse_si)]
        voltage: f64,
        /// Vπ·L, volt·cm.
        #[arg(long, value_parser = parse_si)]
        vpi_l: f64,
        /// Electrode length, cm.
        #[arg(long, value_parser = parse_si)]
        length: f64,
        /// Report β = V/Vπ instead of π·V/Vπ.
        #[arg(long)]
        paper_beta_convention: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON config, or a CSV written by `run`; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    device: Option<DeviceKind>,
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long, value_parser = parse_si)]
    alpha: Option<f64>,
    /// FMMR coupler self-coupling.
    #[arg(long, value_parser = parse_si)]
    rho: Option<f64>,
    /// FMMR loop phase, CMMR/DCMMR coupler bias or MZI bias, rad.
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    bias: Option<f64>,
    #[arg(long, value_parser = parse_si)]
    beta: Option<f64>,
    /// Round-trip delay, s.
    #[arg(long = "t-d", value_parser = parse_si)]
    t_d: Option<f64>,
    /// Free spectral range, Hz (alternative to --t-d).
    #[arg(long, value_parser = parse_si)]
    fsr: Option<f64>,
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    rf_phase: Option<f64>,
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    rf_phase_offset: Option<f64>,
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    combine_phase: Option<f64>,
    /// Fixed RF frequency for bias and drive sweeps, Hz.
    #[arg(long, value_parser = parse_si)]
    frequency: Option<f64>,
    /// AXIS START..STOP [points=N] [spacing=linear|log]; quote the whole spec when START is negative.
    #[arg(long, num_args = 1..=4, value_name = "SPEC")]
    sweep: Option<Vec<String>>,
    /// Truncation order N.
    #[arg(long)]
    order: Option<usize>,
    /// Field sidebands |n| <= HARMONICS written to the CSV.
    #[arg(long)]
    harmonics: Option<usize>,
    /// Cross-check the first sweep point against the time-domain oracle.
    #[arg(long)]
    oracle_check: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Exit with code 4 when the convergence check fails.
    #[arg(long)]
    strict: bool,
}

impl RunArgs {
    fn to_config(&self) -> CliResult<RunConfig> {
        let sweep = match &self.sweep {
            Some(tokens) => Some(tokens.join(" ").parse::<SweepSpec>()?),
            None => None,
        };
        Ok(RunConfig {
            device: self.device,
            preset: self.preset,
            alpha: self.alpha,
            rho: self.rho,
            bias: self.bias,
            beta: self.beta,
            t_d: self.t_d,
            fsr: self.fsr,
            rf_phase: self.rf_phase,
            rf_phase_offset: self.rf_phase_offset,
            combine_phase: self.combine_phase,
            frequency: self.frequency,
            sweep,
            order: self.order,
            harmonics: self.harmonics,
            oracle_check: self.oracle_check.then_some(true),
            output: self.output.clone(),
        })
    }
}

fn with_output(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::config(format!("cannot create {}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            write(&mut w).and_then(|_| w.flush()).map_err(CliError::io)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w).and_then(|_| w.flush()).map_err(CliError::io)
        }
    }
}

fn run(args: RunArgs) -> CliResult<()> {
    let file = match &args.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let resolved = file.merged(args.to_config()?).resolve()?;
    let table = run_sweep(&resolved)?;
    with_output(resolved.output.as_deref(), |w| write_csv(&mut *w, &table))?;
    eprintln!("ringmod run: {}", summary(&table));
    if let Some(o) = &table.oracle {
        if o.max_relative_error >= 1e-6 {
            eprintln!("warning: oracle max relative error {:.3e} exceeds 1e-6", o.max_relative_error);
        }
    }
    if args.strict {
        if let Some(err) = strict_failure(&table) {
            return Err(err);
        }
    } else if !table.all_converged() {
        eprintln!("warning: truncation did not converge at N = {}", table.order);
    }
    Ok(())
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Repro { id, output } => {
            let fig = figure(&id)?;
            let tables = run_figure(&fig)?;
            with_output(output.as_deref(), |w| write_figure(&mut *w, &fig, &tables))?;
            for (label, t) in &tables {
                eprintln!("ringmod repro {id} [{label}]: {}", summary(t));
            }
            Ok(())
        }
        Command::Verify { device, preset } => {
            let report = verify(device, preset)?;
            for line in report.lines() {
                println!("{line}");
            }
            if report.passed() {
                println!("verify {device} {}: all checks passed", preset.name());
                Ok(())
            } else {
                Err(CliError {
                    code: EXIT_VERIFY,
                    message: format!("failed checks: {}", report.failures().join(", ")),
                })
            }
        }
        Command::BetaFromVoltage {
            voltage,
            vpi_l,
            length,
            paper_beta_convention,
        } => {
            let b = beta_from_voltage(voltage, vpi_l, length)?;
            let chosen = if paper_beta_convention { b.literal } else { b.phase };
            println!("beta = {chosen}");
            println!("vpi = {} V", b.vpi);
            println!(
                "pi*V/Vpi = {}{}",
                b.phase,
                if paper_beta_convention { "" } else { " (selected)" }
            );
            println!(
                "V/Vpi = {}{}",
                b.literal,
                if paper_beta_convention { " (selected)" } else { "" }
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code)
        }
    }
}
