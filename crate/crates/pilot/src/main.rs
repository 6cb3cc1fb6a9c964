use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use pilot::{api, repl, Config, System};
use pilot_bench::{emit, run_suite, BenchConfig, Suite};
use pilot_core::robot::RobotSim;
use pilot_core::skills::scan_skills;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "pilot", version, about = "Multi-agent tool orchestration for a social robot")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the console API (and the simulator API when no robot URL is set).
    Serve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `api_port` from the config.
        #[arg(long)]
        port: Option<u16>,
    },
    /// Interactive console on stdin/stdout.
    Repl {
        #[arg(long)]
        config: PathBuf,
    },
    /// Skill library operations.
    Skills {
        #[command(subcommand)]
        command: SkillsCommand,
    },
    /// Run a benchmark suite and write a JSON report plus a text table.
    Bench {
        /// route, sensorbind, taskparser, fastthinking, toolext, latency or all
        suite: String,
        #[arg(long, default_value_t = 5)]
        runs: u32,
        #[arg(long, default_value_t = 2025)]
        seed: u64,
        /// Report path; with `all`, a directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a standalone robot simulator over HTTP.
    RobotSim {
        #[arg(long, default_value_t = 8090)]
        port: u16,
    },
}

#[derive(Subcommand)]
enum SkillsCommand {
    List {
        #[arg(long)]
        dir: PathBuf,
    },
}

async fn shutdown_signal() {
    let _ = tokio::signal::ctrl_c().await;
}

async fn serve(config: PathBuf, port: Option<u16>) -> anyhow::Result<()> {
    let config = Config::load(&config)?;
    let port = port.unwrap_or(config.api_port);
    let system = Arc::new(System::start(config).await?);
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await.with_context(|| format!("binding port {port}"))?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    api::serve(api::router(system.clone()), listener, shutdown_signal()).await?;
    system.stop().await?;
    Ok(())
}

async fn bench(suite: &str, runs: u32, seed: u64, out: PathBuf) -> anyhow::Result<()> {
    let cfg = BenchConfig { runs, seed, ..BenchConfig::default() };
    let (suites, dir) = if suite == "all" { (Suite::ALL.to_vec(), true) } else { (vec![suite.parse::<Suite>()?], false) };
    for s in suites {
        let report = run_suite(s, &cfg).await?;
        let path = if dir { out.join(format!("{s}.json")) } else { out.clone() };
        let (json, txt) = emit(&report, &path)?;
        print!("{}", report.table());
        println!("wrote {} and {}", json.display(), txt.display());
    }
    Ok(())
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().command {
        Command::Serve { config, port } => serve(config, port).await,
        Command::Repl { config } => {
            let system = System::start(Config::load(&config)?).await?;
            let stdin = std::io::stdin();
            repl::run(&system, stdin.lock(), std::io::stdout()).await?;
            Ok(())
        }
        Command::Skills { command: SkillsCommand::List { dir } } => {
            if !dir.is_dir() {
                bail!("{} is not a directory", dir.display());
            }
            let report = scan_skills(&dir)?;
            for s in report.inventory.iter() {
                let params: Vec<&str> = s.params.keys().map(String::as_str).collect();
                println!("{:<24} {:<40} params: [{}]", s.name, s.description, params.join(", "));
            }
            for w in &report.warnings {
                eprintln!("skipped {}: {}", w.file.display(), w.reason);
            }
            Ok(())
        }
        Command::Bench { suite, runs, seed, out } => bench(&suite, runs, seed, out).await,
        Command::RobotSim { port } => {
            let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
            eprintln!("robot simulator on {}", listener.local_addr()?);
            api::serve(api::robot_routes(RobotSim::new()), listener, shutdown_signal()).await?;
            Ok(())
        }
    }
}
