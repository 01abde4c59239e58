//! Command-line front end for the Y-00 workbench.
//!
//! `y00 [global flags] <subcommand>` resolves a [`RunConfig`] from an optional
//! config file and flag overrides, runs one experiment and writes a report
//! envelope as CSV or JSON to stdout or `--out`.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::analysis::{self, EntropyOptions};
use commands::attack::{self, AttackOptions};
use commands::sweep::{self, SweepOptions};
use commands::{read_file, simulate, Outcome};
pub use config::{Entries, RunConfig};
pub use error::{CliError, CliResult};
use report::{Format, ReportEnvelope};

#[derive(Debug, Parser)]
#[command(name = "y00", version, about = "Y-00 coherent-state cipher workbench")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master RNG seed (overrides `rng.seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report format; defaults to csv for simulate and sweep, json otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Override a config entry, e.g. `--set protocol.S=0.5`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bit error rates of Bob and of Eve's wedge attack with and without the key.
    Simulate {
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        shards: Option<usize>,
    },
    /// Eve's mixed-state Helstrom bound over a range of M or S.
    Sweep {
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated ascending values; `a..b` expands to integers.
        #[arg(long)]
        values: Option<String>,
        /// Add a log10 decryption-failure column.
        #[arg(long)]
        failprob: bool,
    },
    /// Known-plaintext wedge attack: candidate sets and brute-force seed ranking.
    Attack {
        #[arg(long)]
        known_plaintext: Option<PathBuf>,
        #[arg(long)]
        band_constant: Option<f64>,
        /// `mod2`, `const0`, `const1` or a `j bit` table file.
        #[arg(long)]
        l_rule: Option<String>,
    },
    /// Exact conditional entropies of the wedge channel.
    Entropy {
        #[arg(long)]
        l_rule: Option<String>,
        /// Also minimise H(R|L,K) over every one-bit rule (N = 1).
        #[arg(long)]
        search_rules: bool,
    },
    /// log10 probability that key-holding wedge decryption fails.
    Failprob,
    /// Energy advantage (dB) of the optimal receiver over heterodyne detection.
    Advantage {
        #[arg(long)]
        target: Option<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Sweep { .. } => "sweep",
            Command::Attack { .. } => "attack",
            Command::Entropy { .. } => "entropy",
            Command::Failprob => "failprob",
            Command::Advantage { .. } => "advantage",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Simulate { .. } | Command::Sweep { .. } => Format::Csv,
            _ => Format::Json,
        }
    }
}

fn entries(global: &GlobalArgs) -> CliResult<Entries> {
    let mut entries = match &global.config {
        Some(path) => Entries::parse(&read_file(path)?)?,
        None => Entries::default(),
    };
    for o in &global.overrides {
        entries.apply_override(o)?;
    }
    if let Some(seed) = global.seed {
        entries
            .set("rng.seed", &seed.to_string())
            .map_err(error::usage)?;
    }
    Ok(entries)
}

fn dispatch(command: &Command, cfg: &RunConfig, entries: &Entries) -> CliResult<Outcome> {
    match command {
        Command::Simulate { .. } => simulate::run(cfg),
        Command::Sweep {
            axis,
            values,
            failprob,
        } => {
            let opts =
                SweepOptions::resolve(axis.as_deref(), values.as_deref(), *failprob, entries)?;
            sweep::run(cfg, &opts)
        }
        Command::Attack {
            known_plaintext,
            band_constant,
            l_rule,
        } => {
            let opts = AttackOptions::resolve(
                known_plaintext.as_deref(),
                *band_constant,
                l_rule.as_deref(),
                entries,
            )?;
            attack::run(cfg, &opts)
        }
        Command::Entropy {
            l_rule,
            search_rules,
        } => {
            let opts = EntropyOptions::resolve(l_rule.as_deref(), *search_rules, entries)?;
            analysis::entropy(cfg, &opts)
        }
        Command::Failprob => analysis::failprob(cfg),
        Command::Advantage { target } => {
            let target = match target {
                Some(t) => *t,
                None => entries
                    .parsed("advantage.target")?
                    .unwrap_or(analysis::DEFAULT_TARGET),
            };
            analysis::advantage(target)
        }
    }
}

/// Run a parsed command and return the rendered report.
pub fn execute(cli: &Cli) -> CliResult<String> {
    let entries = entries(&cli.global)?;
    let cfg = RunConfig::resolve(&entries)?;
    let run = || dispatch(&cli.command, &cfg, &entries);
    let outcome = match cli.command {
        Command::Simulate {
            shards: Some(0), ..
        } => {
            return Err(error::usage("--shards must be at least 1"));
        }
        Command::Simulate {
            shards: Some(threads),
            ..
        } => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| error::usage(format!("cannot start {threads} shards: {e}")))?
            .install(run)?,
        _ => run()?,
    };

    let mut echo = vec![("command".to_string(), cli.command.name().to_string())];
    echo.extend(cfg.echo());
    echo.extend(outcome.options);
    let format = match cli.global.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => cli.command.default_format(),
    };
    Ok(ReportEnvelope::new(echo, outcome.payload).render(format))
}

/// Parse arguments, run, write the report; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = execute(&cli).and_then(|text| match &cli.global.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("y00: {e}");
            e.exit_code()
        }
    }
}
