use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use diracsim_cli::{parse_config, run_experiment, CliError, Experiment, Manifest, Result};

#[derive(Parser)]
#[command(name = "diracsim", version, about = "Dirac-equation experiments on a split-operator grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trembling motion of a free packet.
    Zitterbewegung(RunArgs),
    /// Klein tunnelling through a linear potential, 1+1 dimensions.
    Klein1d(RunArgs),
    /// Klein tunnelling in 2+1 dimensions via p_y slices.
    Klein2d(RunArgs),
    /// Landau levels, Wigner textures and their winding numbers.
    Landau(RunArgs),
    /// Two-particle bag model.
    Bag(RunArgs),
    /// Trapped-ion parameters to simulation parameters.
    #[command(name = "ion-map")]
    IonMap(RunArgs),
    /// Re-hash every file listed in a run's manifest.
    Verify {
        dir: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's output_dir, else out/<experiment>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn run(experiment: Experiment, args: &RunArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let cfg = parse_config(experiment, &text, &args.set)?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(experiment.name()));
    let manifest = run_experiment(&cfg, &out)?;
    println!("{} files written to {}", manifest.files.len() + 1, out.display());
    for (k, v) in &manifest.summary {
        println!("  {k} = {v}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Zitterbewegung(a) => run(Experiment::Zitterbewegung, a),
        Command::Klein1d(a) => run(Experiment::Klein1d, a),
        Command::Klein2d(a) => run(Experiment::Klein2d, a),
        Command::Landau(a) => run(Experiment::Landau, a),
        Command::Bag(a) => run(Experiment::Bag, a),
        Command::IonMap(a) => run(Experiment::IonMap, a),
        Command::Verify { dir } => Manifest::read(dir).and_then(|m| {
            m.verify(dir)?;
            println!("{} files match", m.files.len());
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("diracsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
