use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use spinsqueeze::initial_state::parse_angle;
use spinsqueeze::sweep::{
    figure_preset, find_sssd, render, run_sweep, Format, PGrid, SssdQuantity, Source, SweepSpec,
};
use spinsqueeze::verify::{verify, VerifyOptions};
use spinsqueeze::{ChannelKind, Knob, SystemConfig};

/// Spin squeezing and pairwise entanglement of a one-axis twisted ensemble
/// under amplitude damping, depolarizing or phase damping, optionally
/// protected by a weak measurement before the channel and a reversal after it.
#[derive(Parser)]
#[command(name = "spinsqueeze", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the decoherence strength p and write one row per grid point.
    Sweep(SweepArgs),
    /// Run a figure preset (fig1a..fig4d): N = 12 over p in [0, 1] with step 0.005.
    ///
    /// fig1: amplitude damping at theta = 0.1pi, m = 2, 4, 30.
    /// fig2: amplitude damping at theta = 1.8pi, m = 4, 8, 70.
    /// fig3: depolarizing at theta = 1.8pi, n = 2, 10, 500.
    /// fig4: phase damping at theta = 1.8pi, m = 1, 0.5, 0.01.
    /// Variant `a` of each figure is the bare channel (see `sweep --bypass`).
    Figure {
        /// Preset id, e.g. fig2b.
        id: String,
        #[arg(long, default_value = "csv")]
        format: Format,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find the smallest p at which a squeezing or entanglement measure vanishes.
    ///
    /// Prints p* to 1e-8, or `none` when the quantity stays positive on [0, 1).
    Sssd {
        #[command(flatten)]
        system: SystemArgs,
        /// zeta2, zeta3 or concurrence.
        #[arg(long)]
        quantity: SssdQuantity,
    },
    /// Compare the closed forms with the exact post-selection oracle.
    ///
    /// Prints a JSON report. Exits with status 1 if the initial-state match,
    /// amplitude-damping exactness or oracle self-consistency fails.
    Verify {
        /// Restrict to one or more channels (default: all).
        #[arg(long = "channel")]
        channels: Vec<ChannelKind>,
        #[arg(long, default_value_t = 6)]
        n_spins: usize,
    },
}

#[derive(Args)]
#[group(id = "knob", required = true, multiple = false)]
struct KnobArgs {
    /// Weak-measurement strength m; n follows from the channel constraint.
    #[arg(long)]
    m: Option<f64>,
    /// Reversal strength n; m follows from the channel constraint.
    #[arg(long)]
    n: Option<f64>,
    /// Bare channel: no weak measurement and no reversal (M = N = identity),
    /// so the channel constraint does not apply. Figure variants `a` use this.
    #[arg(long)]
    bypass: bool,
}

impl KnobArgs {
    fn knob(&self) -> Knob {
        match (self.m, self.n) {
            (Some(m), _) => Knob::M(m),
            (_, Some(n)) => Knob::N(n),
            _ => Knob::Bypass,
        }
    }
}

fn angle(text: &str) -> std::result::Result<f64, String> {
    parse_angle(text).map_err(|e| e.to_string())
}

#[derive(Args)]
struct SystemArgs {
    /// adc (amplitude damping), dpc (depolarizing) or pdc (phase damping).
    #[arg(long)]
    channel: ChannelKind,
    /// Twist angle in radians, or as a multiple of pi (`1.8pi`).
    #[arg(long, value_parser = angle)]
    theta: f64,
    #[arg(long, default_value_t = 12)]
    n_spins: usize,
    #[command(flatten)]
    knob: KnobArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// `start:stop:step` or a comma-separated list of points in [0, 1].
    #[arg(long, default_value = "0:1:0.005")]
    p_grid: PGrid,
    /// closed (explicit formulas), oracle (exact post-selection) or both.
    #[arg(long, default_value = "closed")]
    source: Source,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(spec: &SweepSpec) -> Result<()> {
    let rows = run_sweep(spec)?;
    let bytes = render(spec, &rows);
    match &spec.output {
        Some(path) => {
            fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?
        }
        None => io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sweep(args) => {
            let spec = SweepSpec {
                kind: args.system.channel,
                theta: args.system.theta,
                n_spins: args.system.n_spins,
                knob: args.system.knob.knob(),
                grid: args.p_grid,
                source: args.source,
                format: args.format,
                output: args.out,
            };
            emit(&spec)?;
        }
        Command::Figure { id, format, out } => {
            let mut spec = figure_preset(&id)?;
            spec.format = format;
            spec.output = out;
            emit(&spec)?;
        }
        Command::Sssd { system, quantity } => {
            let cfg = SystemConfig::new(system.n_spins, system.theta)?;
            let outcome = find_sssd(system.channel, &cfg, system.knob.knob(), quantity)?;
            println!("{outcome}");
        }
        Command::Verify { channels, n_spins } => {
            let mut opts = VerifyOptions { n_spins, ..Default::default() };
            if !channels.is_empty() {
                opts.channels = channels;
            }
            let report = verify(&opts)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
