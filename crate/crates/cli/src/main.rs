use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pathdepth::arch::{Arch, ShortcutPolicy};
use pathdepth::depth::DepthOptions;
use pathdepth::{archspec, ImageShape, Network};
use pathdepth_cli::record::{ConventionChoice, DEFAULT_ORACLE_CAP};
use pathdepth_cli::render::{record_table, records_csv, records_json, tradeoff_csv, tradeoff_json};
use pathdepth_cli::tables::{load_weights, parse_reference_accuracy, SHIPPED_ACCURACY};
use pathdepth_cli::{
    analyze_all, load_reference_accuracy, tradeoff, AnalysisRecord, AnalyzeOptions, CliError,
    Source,
};

#[derive(Parser)]
#[command(
    name = "pathdepth",
    version,
    about = "Static depth and cost analysis of CNN graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one network.
    Analyze {
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
        arch: Option<Arch>,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// One CSV row per network, in the order given.
    Compare {
        /// Built-in names or archspec paths.
        sources: Vec<String>,
        /// Analyze every built-in architecture.
        #[arg(long)]
        all: bool,
        /// Analyze sources one at a time.
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Join MACs and parameters with reference accuracy, sorted by MACs.
    Tradeoff {
        sources: Vec<String>,
        #[arg(long)]
        all: bool,
        /// `architecture,top1` CSV; defaults to the shipped table.
        #[arg(long)]
        accuracy: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the canonical archspec text of a network.
    Export {
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
        arch: Option<Arch>,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value = "3x224x224", value_parser = parse_shape)]
        input_shape: ImageShape,
        #[arg(long, default_value_t = 1000)]
        classes: u64,
        #[arg(long, default_value = "projection")]
        shortcut: ShortcutPolicy,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Layer,
    Module,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value = "3x224x224", value_parser = parse_shape)]
    input_shape: ImageShape,
    #[arg(long, default_value_t = 1000)]
    classes: u64,
    #[arg(long, default_value = "1.0,0.9,0.7,0.5", value_delimiter = ',')]
    gamma: Vec<f64>,
    #[arg(long, value_enum, default_value = "both")]
    depth_convention: Convention,
    #[arg(long, default_value = "projection")]
    shortcut: ShortcutPolicy,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Cross-check path counts by explicit enumeration.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    oracle_cap: u64,
    /// Count fully connected layers as depth.
    #[arg(long, value_enum, default_value = "on")]
    fc_depth: Switch,
    /// Floating-point path counts (no overflow, inexact).
    #[arg(long)]
    approx: bool,
    /// `length,weight` CSV of custom path weights.
    #[arg(long)]
    weights: Option<PathBuf>,
}

fn parse_shape(s: &str) -> Result<ImageShape, String> {
    let dims: Vec<&str> = s.split(['x', 'X']).collect();
    let parsed: Result<Vec<u64>, _> = dims.iter().map(|d| d.parse::<u64>()).collect();
    match parsed.as_deref() {
        Ok(&[c, h, w]) if c > 0 && h > 0 && w > 0 => Ok(ImageShape {
            channels: c,
            height: h,
            width: w,
        }),
        _ => Err(format!("expected CxHxW with positive integers, got '{s}'")),
    }
}

impl Common {
    fn options(&self) -> Result<AnalyzeOptions, CliError> {
        let custom_weights = match &self.weights {
            Some(p) => Some(load_weights(p)?),
            None => None,
        };
        Ok(AnalyzeOptions {
            input_shape: self.input_shape,
            classes: self.classes,
            gammas: self.gamma.clone(),
            convention: match self.depth_convention {
                Convention::Layer => ConventionChoice::Layer,
                Convention::Module => ConventionChoice::Module,
                Convention::Both => ConventionChoice::Both,
            },
            shortcut: self.shortcut,
            depth: DepthOptions {
                count_fc: matches!(self.fc_depth, Switch::On),
            },
            oracle_cap: self.oracle.then_some(self.oracle_cap),
            approximate: self.approx,
            custom_weights,
        })
    }
}

fn sources(names: &[String], all: bool) -> Result<Vec<Source>, CliError> {
    let mut out = if all {
        Source::all_builtins()
    } else {
        Vec::new()
    };
    out.extend(names.iter().map(|n| Source::parse(n)));
    if out.is_empty() {
        return Err(CliError::input(
            "no sources given (name architectures or archspec files, or pass --all)",
        ));
    }
    Ok(out)
}

fn single(arch: Option<Arch>, spec: Option<PathBuf>) -> Source {
    match (arch, spec) {
        (Some(a), _) => Source::Builtin(a),
        (None, Some(p)) => Source::File(p),
        (None, None) => unreachable!("clap requires one of --arch/--spec"),
    }
}

fn warn(records: &[AnalysisRecord]) {
    let mut err = std::io::stderr().lock();
    for r in records {
        for w in &r.warnings {
            let _ = writeln!(err, "warning: {}: {w}", r.architecture);
        }
    }
}

fn render(
    records: &[AnalysisRecord],
    format: Format,
    convention: ConventionChoice,
) -> Result<String, CliError> {
    match format {
        Format::Csv => records_csv(records),
        Format::Json => records_json(records),
        Format::Table => Ok(records
            .iter()
            .map(|r| record_table(r, convention))
            .collect::<Vec<_>>()
            .join("\n")),
    }
}

fn execute(command: Command) -> Result<String, CliError> {
    match command {
        Command::Analyze { arch, spec, common } => {
            let opts = common.options()?;
            let records = analyze_all(&[single(arch, spec)], &opts, false)?;
            warn(&records);
            render(&records, common.format, opts.convention)
        }
        Command::Compare {
            sources: names,
            all,
            sequential,
            common,
        } => {
            let opts = common.options()?;
            let records = analyze_all(&sources(&names, all)?, &opts, !sequential)?;
            warn(&records);
            // compare is a CSV command; table output falls back to CSV
            match common.format {
                Format::Json => records_json(&records),
                _ => records_csv(&records),
            }
        }
        Command::Tradeoff {
            sources: names,
            all,
            accuracy,
            common,
        } => {
            let opts = common.options()?;
            let table = match accuracy {
                Some(p) => load_reference_accuracy(&p)?,
                None => parse_reference_accuracy(SHIPPED_ACCURACY)?,
            };
            let records = analyze_all(&sources(&names, all)?, &opts, true)?;
            let rows = tradeoff(&records, &table)?;
            match common.format {
                Format::Json => tradeoff_json(&rows),
                _ => tradeoff_csv(&rows),
            }
        }
        Command::Export {
            arch,
            spec,
            input_shape,
            classes,
            shortcut,
        } => {
            let opts = AnalyzeOptions {
                input_shape,
                classes,
                shortcut,
                ..Default::default()
            };
            let (_, graph) = single(arch, spec).load(&opts)?;
            let net = Network::new(graph).map_err(CliError::input)?;
            Ok(archspec::serialize(&net))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("{}", CliError::input(first).line());
            return ExitCode::from(1);
        }
    };
    match execute(cli.command) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(out.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
