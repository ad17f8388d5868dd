//! Command-line front end: generate, validate and inspect dataset directories.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use microworld::export::{self, Format};
use microworld::instancegen::{self, dataset, DatasetSpec, Generator, Split, BUILTIN_DATASETS};

#[derive(Parser)]
#[command(name = "microworld", version, about = "Image-caption agreement dataset generator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one split of a dataset into a directory.
    Generate {
        /// Built-in dataset name or path to a TOML config.
        #[arg(long)]
        dataset: String,
        #[arg(long)]
        split: Split,
        #[arg(long)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// jsonl+png, tensor or both.
        #[arg(long, default_value = "jsonl+png")]
        format: Format,
        /// Emit only instances bearing this partition tag.
        #[arg(long)]
        partition: Option<String>,
        /// Disable pixel noise.
        #[arg(long)]
        no_noise: bool,
        /// Replace a directory holding a different dataset.
        #[arg(long)]
        force: bool,
    },
    /// Re-check labels, captions, tensors and digests of a dataset directory.
    Validate { dir: PathBuf },
    /// Print the stored record of one instance.
    Inspect {
        dir: PathBuf,
        #[arg(long)]
        index: u64,
        #[arg(long)]
        split: Option<Split>,
    },
    /// List the built-in datasets with their split constraints.
    Datasets,
    /// Print the config of a built-in dataset as TOML.
    Config { name: String },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate {
            dataset,
            split,
            count,
            seed,
            out,
            format,
            partition,
            no_noise,
            force,
        } => {
            let mut spec = DatasetSpec::resolve(&dataset).map_err(anyhow::Error::msg)?;
            if no_noise {
                spec = spec.without_noise();
            }
            if let Some(tag) = partition {
                spec = dataset::restrict_partition(&spec, &tag).with_context(|| {
                    format!("known tags: {}", spec.known_tags().into_iter().collect::<Vec<_>>().join("; "))
                })?;
            }
            let instances = instancegen::generate_split(&spec, split, count, seed)?;
            let manifest = export::write_dataset_dir(&instances, &out, format, &spec, seed, force)?;
            println!(
                "wrote {count} {split} instances of {} to {} ({} files)",
                manifest.dataset,
                out.display(),
                manifest.files.len() + 1
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { dir } => {
            let report = export::validate_dataset(&dir)?;
            for v in &report.violations {
                println!("{v}");
            }
            println!(
                "{} records, {} files checked, {} violations",
                report.records_checked,
                report.files_checked,
                report.violations.len()
            );
            Ok(if report.is_clean() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Inspect { dir, index, split } => {
            let record = export::inspect(&dir, split, index)?;
            let field = |k: &str| record.get(k).cloned().unwrap_or_default();
            println!("caption: {}", field("caption").as_str().unwrap_or_default());
            println!("label: {}", field("label"));
            println!("partition_tag: {}", field("partition_tag").as_str().unwrap_or_default());
            println!("world: {:#}", field("world"));
            Ok(ExitCode::SUCCESS)
        }
        Command::Datasets => {
            for name in BUILTIN_DATASETS {
                let spec = dataset::builtin_dataset(name)?;
                println!("{}", describe(&spec)?);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Config { name } => {
            print!("{}", dataset::builtin_dataset(&name)?.to_toml());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn describe(spec: &DatasetSpec) -> Result<String> {
    let Generator::Atomic(atomic) = &spec.generator else {
        bail!("{} is not atomic", spec.name);
    };
    let mut lines = vec![spec.name.clone()];
    for split in Split::ALL {
        let ws = atomic.splits.get(split);
        let counts: Vec<String> = ws.count_choices.iter().map(ToString::to_string).collect();
        let mut line = format!(
            "  {:<10} counts {{{}}}, {} combinations",
            split.name(),
            counts.join(","),
            ws.allowed_combinations.len()
        );
        if !ws.held_out_combinations.is_empty() {
            let held: Vec<String> = ws.held_out_combinations.iter().map(ToString::to_string).collect();
            line.push_str(&format!(" + held out: {}", held.join(", ")));
        }
        lines.push(line);
    }
    let patterns: Vec<String> = atomic
        .captions
        .patterns
        .iter()
        .filter(|(_, w)| **w > 0.0)
        .map(|(p, _)| format!("{p:?}").to_lowercase())
        .collect();
    lines.push(format!("  captions   {}", patterns.join(", ")));
    Ok(lines.join("\n"))
}
