//! `stnmer`: run the MER classification protocol one stage at a time or
//! end to end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error,
//! 4 statistical degeneracy.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use mer_core::pipeline::{self, report, PipelineError, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "stnmer", version, about = "Nonlinear-feature classification of microelectrode recordings")]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Generate the surrogate corpus (EDF files and manifest).
    Synth,
    /// Preprocess and segment the manifest's recordings into a window index.
    Ingest,
    /// Extract the 13 features of every window.
    Features,
    /// Hold-out split and the cross-validation grid.
    Cv,
    /// Feature-group and classifier selection with paired tests.
    Select,
    /// Retrain the selected pipeline and evaluate it on the hold-out set.
    Holdout,
    /// Write the run summary and manifest.
    Report,
    /// Every stage in order.
    All,
}

fn load_config(cli: &Cli) -> Result<RunConfig, PipelineError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.set_master_seed(seed);
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), PipelineError> {
    let config = load_config(cli)?;
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(PipelineError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
    }
    let out = &config.output_dir;
    let started = Instant::now();
    match cli.command {
        Command::Synth => {
            let m = pipeline::stage_synth(&config)?;
            println!("wrote {} recordings to {}", m.recordings.len(), out.join(report::CORPUS_DIR).display());
        }
        Command::Ingest => {
            let s = pipeline::stage_ingest(&config)?;
            println!(
                "{} windows ({} inside, {} outside) from {} of {} recordings; {:.4}% of samples interpolated",
                s.windows_total,
                s.windows_inside,
                s.windows_outside,
                s.recordings_used,
                s.recordings_total,
                100.0 * s.interpolated_fraction
            );
        }
        Command::Features => {
            let t = pipeline::stage_features(&config)?;
            println!("wrote {} feature rows to {}", t.rows.len(), out.join(report::FEATURES).display());
        }
        Command::Cv => {
            let r = pipeline::stage_cv(&config)?;
            println!("wrote {} evaluation records to {}", r.len(), out.join(report::EVAL_RECORDS).display());
        }
        Command::Select => {
            let s = pipeline::stage_select(&config)?;
            println!("selected {} on {}", s.model, s.feature_group);
        }
        Command::Holdout => {
            let h = pipeline::stage_holdout(&config)?;
            print!("{}", report::holdout_text(&h));
        }
        Command::Report => {
            pipeline::stage_report(&config)?;
            println!("wrote {}", out.join(report::SUMMARY).display());
        }
        Command::All => {
            let o = pipeline::run_all(&config)?;
            println!(
                "{} windows, {} evaluation records; selected {} on {}",
                o.summary.windows_total, o.n_eval_records, o.selection.model, o.selection.feature_group
            );
            print!("{}", report::holdout_text(&o.holdout));
        }
    }
    log::info!("{:?} finished in {:.1} s", cli.command, started.elapsed().as_secs_f64());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stnmer: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
