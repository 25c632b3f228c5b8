//! `dyst` — trace-driven simulator and analysis workbench for history covert
//! channels.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "dyst",
    about = "History covert channel simulator, parameter optimizer and detection workbench",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one transmission over a trace and write the transcript.
    Sim {
        /// Experiment configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "dyst-out")]
        out_dir: PathBuf,
        /// Override the trace source with a .jsonl or .pcap file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Also write the warden-view covert and filtered traces.
        #[arg(long)]
        write_traces: bool,
    },
    /// Evaluate the variant grid, emit the (distance, bandwidth) CSV and the
    /// non-dominated front.
    Pareto {
        #[arg(long, default_value = "dyst-out")]
        out_dir: PathBuf,
        /// Cross-check the closed forms with counter-stream simulations
        /// (two seeds, reported side by side).
        #[arg(long)]
        mc: bool,
        /// Samples per variant and seed for --mc.
        #[arg(long, default_value_t = 10_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Evaluate only the basic family h = 14..=20.
        #[arg(long)]
        basic_only: bool,
    },
    /// All-pairs similarity tests and compressibility scores over recordings.
    Detect {
        #[arg(long, default_value = "dyst-out")]
        out_dir: PathBuf,
        /// Window length in delays for the compressibility score.
        #[arg(long, default_value_t = 1000)]
        window: usize,
        /// Recordings tagged as covert channel captures.
        #[arg(long = "covert")]
        covert: Vec<PathBuf>,
        /// Recordings tagged as filtered covert captures.
        #[arg(long = "filtered")]
        filtered: Vec<PathBuf>,
        /// Recordings tagged as legitimate captures.
        #[arg(long = "legit")]
        legit: Vec<PathBuf>,
        /// Untagged recordings (pairs computed, class summary omitted).
        #[arg()]
        untagged: Vec<PathBuf>,
    },
    /// Sweep pointer counts and compare against the direct-embedding
    /// storage channel.
    BenchMultipointer {
        #[arg(long)]
        config: PathBuf,
        /// Pointer counts, e.g. 1,2,4,8.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64,128,256")]
        pointers: Vec<u32>,
        #[arg(long, default_value = "dyst-out")]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate a synthetic Poisson trace.
    Gen {
        /// Packets per hour (overrides the preset rate).
        #[arg(long)]
        rate: Option<f64>,
        /// Environment preset: home, university or smarthome.
        #[arg(long)]
        preset: Option<String>,
        /// Trace duration in seconds.
        #[arg(long)]
        duration: f64,
        /// Fraction of packets that are packets of interest.
        #[arg(long, default_value_t = 1.0)]
        mix: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output trace file (.jsonl).
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help/version requests are success, anything else is usage
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Sim {
            config,
            seed,
            out_dir,
            trace,
            write_traces,
        } => commands::sim::run(&config, seed, &out_dir, trace.as_deref(), write_traces),
        Command::Pareto {
            out_dir,
            mc,
            samples,
            seed,
            basic_only,
        } => commands::pareto::run(&out_dir, mc, samples, seed, basic_only),
        Command::Detect {
            out_dir,
            window,
            covert,
            filtered,
            legit,
            untagged,
        } => commands::detect::run(&out_dir, window, &covert, &filtered, &legit, &untagged),
        Command::BenchMultipointer {
            config,
            pointers,
            out_dir,
            seed,
        } => commands::bench::run(&config, &pointers, &out_dir, seed),
        Command::Gen {
            rate,
            preset,
            duration,
            mix,
            seed,
            out,
        } => commands::gen::run(rate, preset.as_deref(), duration, mix, seed, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
