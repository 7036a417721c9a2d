use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use risloc::geometry::{forward_sensing, Point};
use risloc::harness::sweep::GridIndex;
use risloc::harness::{random_scene, simulate, SweepConfig};
use risloc::rng::{stream, Stream};

#[derive(Parser)]
#[command(name = "risloc", version, about = "RIS-aided passive radar localization simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sweep and write the results CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; a `.json` sidecar with the resolved config is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// `dotted.key=value`, applied on top of the config file.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Parse and validate a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Draw the scene of one trial and print it as JSON.
    Scene {
        #[arg(long)]
        config: PathBuf,
        /// Emit the node and target layout.
        #[arg(long)]
        render: bool,
        /// Trial index within the first grid point.
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

#[derive(Serialize)]
struct SceneTarget {
    position: Point,
    theta_ris_deg: f64,
    tau_s: f64,
    los_to_pr: bool,
}

#[derive(Serialize)]
struct SceneView {
    cell: [f64; 2],
    ap: Point,
    ris: Point,
    pr: Point,
    ris_boresight_deg: f64,
    pr_boresight_deg: f64,
    ap_los_to_pr: bool,
    seed: u64,
    targets: Vec<SceneTarget>,
}

fn scene(config: &SweepConfig, trial: usize) -> risloc::Result<SceneView> {
    let g = GridIndex { snr: 0, m: 0, k: 0 };
    let seed = config.scene_seed(g, trial);
    let layout = config.scenario.layout()?;
    let pts = random_scene(
        &mut stream(seed, Stream::Scene),
        config.axes.targets[0],
        &layout,
        &config.scene,
        &config.delay_window(&layout),
    )?;
    let targets = pts
        .into_iter()
        .map(|p| {
            let s = forward_sensing(p, &layout)?;
            Ok(SceneTarget {
                position: p,
                theta_ris_deg: s.theta_ris_deg,
                tau_s: s.tau_s,
                los_to_pr: config.scenario.target_los,
            })
        })
        .collect::<risloc::Result<Vec<_>>>()?;
    Ok(SceneView {
        cell: config.scenario.cell,
        ap: layout.ap,
        ris: layout.ris,
        pr: layout.pr,
        ris_boresight_deg: layout.ris_boresight_deg,
        pr_boresight_deg: layout.pr_boresight_deg,
        ap_los_to_pr: config.scenario.ap_los,
        seed,
        targets,
    })
}

fn run(cli: Cli) -> risloc::Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            trials,
            seed,
            threads,
            overrides,
        } => {
            let mut c = SweepConfig::load(&config, &overrides)?;
            if let Some(o) = out {
                c.output = Some(o);
            }
            if let Some(t) = trials {
                c.trials = t;
            }
            if let Some(s) = seed {
                c.master_seed = s;
            }
            if threads.is_some() {
                c.threads = threads;
            }
            let rows = simulate(&c)?;
            if let Some(path) = &c.output {
                eprintln!("wrote {} rows to {}", rows.len(), path.display());
            }
        }
        Command::Validate { config, overrides } => {
            let c = SweepConfig::load(&config, &overrides)?;
            c.validate()?;
            println!(
                "ok: {} grid points x {} trials",
                c.grid_points(),
                c.trials
            );
        }
        Command::Scene {
            config,
            render,
            trial,
            overrides,
        } => {
            let c = SweepConfig::load(&config, &overrides)?;
            c.validate()?;
            let view = scene(&c, trial)?;
            if render {
                println!("{}", serde_json::to_string_pretty(&view).expect("scene serializes"));
            } else {
                println!("{} targets, seed {}", view.targets.len(), view.seed);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
