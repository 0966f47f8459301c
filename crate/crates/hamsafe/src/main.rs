use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hamsafe::commands::{
    certify_cmd, gen_data_cmd, read_config, simulate_cmd, sweep_cmd, train_cmd, CmdResult, ScenarioConfig,
};
use hamsafe::output::write_json;

#[derive(Parser)]
#[command(name = "hamsafe", version, about = "Learned SE(3) Hamiltonian dynamics with certified safe tracking")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overwrite outputs and allow disturbance bounds above the certified cap.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a flight dataset from the ground-truth plant.
    GenData(Common),
    /// Train a Hamiltonian model on a dataset.
    Train(Common),
    /// Compute the robustness certificate for a set of gains.
    Certify(Common),
    /// Run one scenario.
    Simulate(Common),
    /// Run a scenario over several disturbance bounds.
    Sweep(Common),
}

fn run(cli: Cli) -> CmdResult<()> {
    match cli.cmd {
        Cmd::GenData(c) => {
            let p = gen_data_cmd(&read_config(&c.config)?, c.seed, &c.out, c.force)?;
            println!("wrote {}", p.display());
        }
        Cmd::Train(c) => {
            let ck = train_cmd(&read_config(&c.config)?, c.seed, &c.out, c.force)?;
            if let Some(r) = &ck.report {
                println!("loss {:.6e} -> {:.6e}", r.initial_loss, r.final_loss);
            }
            println!("delta_d estimate {:.6e}", ck.delta_d);
        }
        Cmd::Certify(c) => {
            let report = certify_cmd(&read_config(&c.config)?)?;
            write_json(&c.out, "certificate.json", &report, c.force)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Cmd::Simulate(c) => {
            let cfg: ScenarioConfig = read_config(&c.config)?;
            let s = simulate_cmd(&cfg, c.seed, &c.out, c.force)?;
            println!("{}", serde_json::to_string_pretty(&s)?);
        }
        Cmd::Sweep(c) => {
            for e in sweep_cmd(&read_config(&c.config)?, c.seed, &c.out, c.force)? {
                println!(
                    "delta_d {:>8}  min_dist {:.4}  min_dE {:.4}  safe {}",
                    e.delta_d, e.summary.min_dist, e.summary.min_de, e.summary.safe
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
