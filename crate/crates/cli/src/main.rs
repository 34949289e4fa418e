use anyhow::Result;
use clap::{Parser, Subcommand};

use gsav_cli::commands::{bench, fit, prefilter, render, toy};
use gsav_cli::{init_threads, serve};

/// Relightable Gaussian head avatars: bake lights, render, fit and serve.
#[derive(Debug, Parser)]
#[command(name = "gsav", version)]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "GSAV_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    Toy(toy::ToyArgs),
    Prefilter(prefilter::PrefilterArgs),
    Render(render::RenderArgs),
    Fit(fit::FitArgs),
    Bench(bench::BenchArgs),
    Serve(serve::ServeArgs),
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    init_threads(cli.threads)?;
    match &cli.command {
        Command::Toy(a) => toy::run(a),
        Command::Prefilter(a) => prefilter::run(a),
        Command::Render(a) => render::run(a),
        Command::Fit(a) => fit::run(a),
        Command::Bench(a) => bench::run(a).map(|_| ()),
        Command::Serve(a) => tokio::runtime::Runtime::new()?.block_on(serve::run(a)),
    }
}
