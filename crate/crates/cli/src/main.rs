use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use cyclewalk::WalkSpec;
use cyclewalk_cli::report::{median, write_sweep};
use cyclewalk_cli::{
    run_preset, run_sweep, run_synthesis_check, CliError, ExperimentPreset, Result, RunReport,
};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "cyclewalk",
    version,
    about = "Train and compile discrete-time quantum walks on a cycle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every sample of a preset and write traces and summaries.
    Train(RunArgs),
    /// Train a preset at several layer counts with matched seeds.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated layer counts, e.g. `4,10`.
        #[arg(long, value_delimiter = ',', required = true)]
        steps: Vec<usize>,
    },
    /// Compile Haar-random unitaries exactly and check the reconstruction.
    Synth {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        delta0: i64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        delta1: i64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = cyclewalk_cli::preset::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge finished runs into one set of aggregate tables.
    Summarize {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    /// JSON experiment description.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to `runs/<preset>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    max_updates: Option<u64>,
    #[arg(long)]
    stop_distance: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentPreset> {
        let mut preset = match (&self.preset, &self.config) {
            (Some(name), _) => ExperimentPreset::named(name)?,
            (None, Some(path)) => ExperimentPreset::from_config_file(path)?,
            (None, None) => unreachable!("clap requires one of --preset/--config"),
        };
        if let Some(seed) = self.seed {
            preset.seed = seed;
        }
        if let Some(m) = self.max_updates {
            preset.max_updates = m;
        }
        if let Some(d) = self.stop_distance {
            preset.stop_distance = d;
        }
        if let Some(s) = self.samples {
            preset.samples = s;
        }
        preset.validate()?;
        Ok(preset)
    }

    fn out_dir(&self, preset: &ExperimentPreset) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| Path::new("runs").join(&preset.name))
    }
}

#[derive(Serialize)]
struct Timing {
    runtime_seconds: f64,
    threads: usize,
}

fn write_timing(dir: &Path, started: Instant, threads: Option<usize>) -> Result<()> {
    let timing = Timing {
        runtime_seconds: started.elapsed().as_secs_f64(),
        threads: threads.unwrap_or_else(rayon::current_num_threads),
    };
    let path = dir.join("timing.json");
    let text = serde_json::to_string_pretty(&timing).expect("plain struct serializes");
    std::fs::write(&path, text + "\n").map_err(|source| CliError::Io { path, source })
}

fn describe(report: &RunReport) -> String {
    let finals = report.final_distances();
    let worst = finals.iter().copied().fold(0.0, f64::max);
    format!(
        "{}: {} samples, median final distance {:.3e}, worst {:.3e}",
        report.header.preset,
        finals.len(),
        median(&finals),
        worst
    )
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => {
            let preset = args.resolve()?;
            let dir = args.out_dir(&preset);
            let started = Instant::now();
            let report = run_preset(&preset, args.threads)?;
            report.write(&dir)?;
            write_timing(&dir, started, args.threads)?;
            println!("{} -> {}", describe(&report), dir.display());
        }
        Command::Sweep { run, steps } => {
            let preset = run.resolve()?;
            let dir = run.out_dir(&preset);
            let started = Instant::now();
            let reports = run_sweep(&preset, &steps, run.threads)?;
            write_sweep(&reports, &dir)?;
            write_timing(&dir, started, run.threads)?;
            for r in &reports {
                println!("{}", describe(r));
            }
            println!("-> {}", dir.display());
        }
        Command::Synth {
            n,
            delta0,
            delta1,
            trials,
            seed,
            out,
        } => {
            let spec = WalkSpec::new(n, delta0, delta1)?;
            let report = run_synthesis_check(&spec, trials, seed)?;
            let longest = report.schedule_lengths.iter().max().copied().unwrap_or(0);
            println!(
                "n={n} delta=({delta0},{delta1}): {trials} targets, max distance {:.3e}, longest schedule {longest} layers",
                report.max_distance
            );
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
                    path: dir.clone(),
                    source,
                })?;
                let path = dir.join("synth.json");
                let text = serde_json::to_string_pretty(&report).expect("plain struct serializes");
                std::fs::write(&path, text + "\n")
                    .map_err(|source| CliError::Io { path, source })?;
            }
        }
        Command::Summarize { runs, out } => {
            let reports = runs
                .iter()
                .map(|d| RunReport::load(d))
                .collect::<Result<Vec<_>>>()?;
            let merged = RunReport::merge(reports)?;
            merged.write_tables(&out)?;
            println!("{} -> {}", describe(&merged), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
