use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eais_harness::config::{read_config_file, ConfigFile};
use eais_harness::emit::emit_results;
use eais_harness::error::{HarnessError, Result};
use eais_harness::experiment::{exact_probabilities, run_experiment, Quartiles};
use eais_harness::presets::{preset, presets};
use ensemble_ais::Variant;

#[derive(Parser)]
#[command(name = "eais", version, about = "Run ensemble AIS experiments and inspect their results")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or a preset name.
    Run {
        target: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicates: Option<usize>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replicates run concurrently; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        variant: Option<Variant>,
    },
    /// Exact probability table of a spin-model preset.
    Enumerate {
        model: String,
        /// Write `index,probability` here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in presets.
    Presets,
    /// Compare one metric between two result directories.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        metric: String,
    },
}

fn resolve_target(target: &str) -> Result<ConfigFile> {
    let path = Path::new(target);
    if path.is_file() {
        read_config_file(path)
    } else if preset(target).is_some() {
        Ok(ConfigFile { model: Some(target.to_string()), ..Default::default() })
    } else {
        Err(HarnessError::config(format!("'{target}' is neither a config file nor a preset name")))
    }
}

fn run(
    target: &str,
    seed: Option<u64>,
    replicates: Option<usize>,
    out: Option<PathBuf>,
    jobs: usize,
    variant: Option<Variant>,
) -> Result<bool> {
    let mut file = resolve_target(target)?;
    file.seed = seed.or(file.seed);
    file.replicates = replicates.or(file.replicates);
    file.output = out.or(file.output);
    file.variant = variant.or(file.variant);
    let config = file.resolve()?;

    let result = run_experiment(&config, jobs)?;
    let written = emit_results(&result, &config.output)?;

    println!("{} / {} : {} replicate(s) in {:.2}s", config.model_name, config.variant, config.replicates, result.elapsed);
    for (metric, values) in result.final_values() {
        let q = Quartiles::of(&values);
        println!("  {metric:<18} median {:>12.6}  [{:.6}, {:.6}]", q.median, q.q1, q.q3);
    }
    for f in &result.failures {
        eprintln!("replicate {} failed: {}", f.replicate, f.message);
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(result.failures.is_empty())
}

fn enumerate(model: &str, out: Option<PathBuf>) -> Result<()> {
    let p = preset(model).ok_or_else(|| HarnessError::config(format!("unknown model '{model}'")))?;
    let probs = exact_probabilities(&p.model)?;
    let mut text = String::from("index,probability\n");
    for (i, p) in probs.iter().enumerate() {
        // 17 significant digits round-trip every f64
        text.push_str(&format!("{i},{p:.16e}\n"));
    }
    match out {
        Some(path) => eais_harness::emit::write_atomic(&path, text.as_bytes()),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| HarnessError::io("<stdout>", e)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Run { target, seed, replicates, out, jobs, variant } => {
            run(&target, seed, replicates, out, jobs, variant).map(|clean| if clean { 0 } else { 2 })
        }
        Command::Enumerate { model, out } => enumerate(&model, out).map(|_| 0),
        Command::Presets => {
            for p in presets() {
                println!("{:<20} N={:<6} L={:<5} {}", p.name, p.particles, p.steps, p.summary);
            }
            Ok(0)
        }
        Command::Compare { a, b, metric } => eais_harness::compare::compare(&a, &b, &metric).map(|c| {
            print!("{}", c.render(&a.display().to_string(), &b.display().to_string()));
            0
        }),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
