//! `knudsen`: temperature-jump and Kramers layers from the reduced moment systems.

mod commands;
mod records;
mod text;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use knudsen_core::profiles::{ConvergenceIndexing, Spacing, REFERENCE_KN};
use knudsen_core::verification::VerifyLevel;
use knudsen_core::KnudsenError;

#[derive(Parser, Debug)]
#[command(name = "knudsen", version, about = "Knudsen-layer solutions of linearized moment equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Temperature jump coefficient and layer modes for one odd order.
    TemperatureJump {
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[command(flatten)]
        physics: Physics,
        #[command(flatten)]
        out: Output,
    },
    /// Viscous slip coefficient and layer modes for one even order.
    Kramers {
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[command(flatten)]
        physics: Physics,
        #[command(flatten)]
        out: Output,
    },
    /// Jump coefficients over the reference grid of accommodation and order.
    Table1 {
        #[command(flatten)]
        out: Output,
    },
    /// Convergence orders of the jump coefficient.
    Table2 {
        /// Largest convergence index; indices run from 6.
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(6..=8))]
        k_max: u32,
        #[arg(long, value_enum, default_value_t = IndexingArg::FromKPlusOne)]
        indexing: IndexingArg,
        #[command(flatten)]
        out: Output,
    },
    /// Jump coefficient as a function of the accommodation coefficient.
    SweepChi {
        #[arg(long, default_value_t = 13)]
        order: usize,
        #[arg(long, default_value_t = 0.01)]
        chi_min: f64,
        #[arg(long, default_value_t = 1.0)]
        chi_max: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = SpacingArg::Linear)]
        spacing: SpacingArg,
        #[arg(long, default_value_t = REFERENCE_KN)]
        kn: f64,
        #[arg(long, default_value_t = 1.0)]
        pr: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Sampled layer profile.
    Profile {
        #[arg(long, value_enum, default_value_t = KindArg::Temperature)]
        kind: KindArg,
        /// Defaults to 3 for temperature and 4 for Kramers.
        #[arg(long)]
        order: Option<usize>,
        #[command(flatten)]
        physics: Physics,
        /// Defaults to 0 for linear and 1e-3 for geometric spacing.
        #[arg(long)]
        ymin: Option<f64>,
        /// Defaults to 60 times the widest layer.
        #[arg(long)]
        ymax: Option<f64>,
        #[arg(long, default_value_t = 400)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = SpacingArg::Geometric)]
        spacing: SpacingArg,
        #[command(flatten)]
        out: Output,
    },
    /// Run the oracle suites. Exits with status 2 if any check fails.
    Verify {
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
        #[command(flatten)]
        out: Output,
    },
    /// Dump the nonzero coupling-block entries.
    Matrix {
        #[arg(long, value_enum, default_value_t = KindArg::Temperature)]
        kind: KindArg,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 1.0)]
        pr: f64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct Physics {
    #[arg(long, default_value_t = 1.0)]
    chi: f64,
    #[arg(long, default_value_t = REFERENCE_KN)]
    kn: f64,
    #[arg(long, default_value_t = 1.0)]
    pr: f64,
    /// Far-field heat flux, or shear stress for Kramers.
    #[arg(long, default_value_t = 1.0)]
    flux: f64,
}

#[derive(Args, Debug, Clone)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SpacingArg {
    Linear,
    Geometric,
}

impl From<SpacingArg> for Spacing {
    fn from(s: SpacingArg) -> Self {
        match s {
            SpacingArg::Linear => Spacing::Linear,
            SpacingArg::Geometric => Spacing::Geometric,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum IndexingArg {
    FromKPlusOne,
    FromK,
}

impl From<IndexingArg> for ConvergenceIndexing {
    fn from(i: IndexingArg) -> Self {
        match i {
            IndexingArg::FromKPlusOne => ConvergenceIndexing::FromKPlusOne,
            IndexingArg::FromK => ConvergenceIndexing::FromK,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum KindArg {
    Temperature,
    Kramers,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum LevelArg {
    Quick,
    Full,
}

impl From<LevelArg> for VerifyLevel {
    fn from(l: LevelArg) -> Self {
        match l {
            LevelArg::Quick => VerifyLevel::Quick,
            LevelArg::Full => VerifyLevel::Full,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Verification,
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Verification => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl From<KnudsenError> for Failure {
    fn from(e: KnudsenError) -> Self {
        match e {
            KnudsenError::InvalidOrder { .. }
            | KnudsenError::InvalidParameter { .. }
            | KnudsenError::IndexOutOfRange { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

/// Rendered output plus whether the run counts as a failure.
struct Rendered {
    body: String,
    verification_failed: bool,
}

fn render<T: serde::Serialize>(record: &T, format: Format, text: impl FnOnce(&T) -> String) -> Rendered {
    let body = match format {
        Format::Text => text(record),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(record).expect("records serialize");
            s.push('\n');
            s
        }
    };
    Rendered {
        body,
        verification_failed: false,
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let (rendered, out) = match command {
        Command::TemperatureJump { order, physics, out } => {
            let r = commands::temperature_jump(order, physics.chi, physics.kn, physics.pr, physics.flux)?;
            (render(&r, out.format, text::temperature_jump), out)
        }
        Command::Kramers { order, physics, out } => {
            let r = commands::kramers(order, physics.chi, physics.kn, physics.pr, physics.flux)?;
            (render(&r, out.format, text::kramers), out)
        }
        Command::Table1 { out } => (render(&commands::table1()?, out.format, text::table1), out),
        Command::Table2 { k_max, indexing, out } => {
            let r = commands::table2(k_max, indexing.into())?;
            (render(&r, out.format, text::table2), out)
        }
        Command::SweepChi {
            order,
            chi_min,
            chi_max,
            samples,
            spacing,
            kn,
            pr,
            out,
        } => {
            let r = commands::sweep_chi(order, chi_min, chi_max, samples, spacing.into(), kn, pr)?;
            (render(&r, out.format, text::sweep_chi), out)
        }
        Command::Profile {
            kind,
            order,
            physics,
            ymin,
            ymax,
            samples,
            spacing,
            out,
        } => {
            let grid = commands::GridRequest {
                ymin,
                ymax,
                samples,
                spacing: spacing.into(),
            };
            let r = match kind {
                KindArg::Temperature => commands::temperature_profile(
                    order.unwrap_or(3),
                    physics.chi,
                    physics.kn,
                    physics.pr,
                    physics.flux,
                    &grid,
                )?,
                KindArg::Kramers => commands::kramers_profile(
                    order.unwrap_or(4),
                    physics.chi,
                    physics.kn,
                    physics.pr,
                    physics.flux,
                    &grid,
                )?,
            };
            (render(&r, out.format, text::profile), out)
        }
        Command::Verify { level, out } => {
            let r = commands::verify(level.into());
            let mut rendered = render(&r, out.format, text::verify);
            rendered.verification_failed = !r.report.all_passed();
            (rendered, out)
        }
        Command::Matrix { kind, order, pr, out } => {
            let r = commands::matrix(kind == KindArg::Kramers, order, pr)?;
            (render(&r, out.format, text::matrix), out)
        }
    };

    match &out.output {
        Some(path) => fs::write(path, &rendered.body)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut stdout = io::stdout().lock();
            // a closed pipe is not an error worth reporting
            let _ = stdout.write_all(rendered.body.as_bytes());
        }
    }
    if rendered.verification_failed {
        return Err(Failure::Verification);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Numerical(m) => eprintln!("numerical failure: {m}"),
                Failure::Verification => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
