use clap::Parser;
use std::path::PathBuf;

/// Run a summand-lab task described by a JSON config.
#[derive(Parser)]
#[command(name = "summand-lab", version)]
struct Args {
    /// Path to the run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` in the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Replaces the config's seed.
    #[arg(long)]
    seed_override: Option<u64>,
    /// Suppress the summary on stdout.
    #[arg(long)]
    quiet: bool,
}

fn main() {
    let args = Args::parse();
    let code = summand_lab::cli::run(
        &args.config,
        args.out_dir.as_deref(),
        args.seed_override,
        args.quiet,
    );
    std::process::exit(code);
}
