use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quadruped_core::kinematics::{leg_fk, leg_ik, LegId, Vec3};
use quadruped_server::{load_config, run_scenario, serve, Config, Scenario};

#[derive(Parser)]
#[command(name = "quadsim", version, about = "Quadruped kinematic twin: live teleop server and headless runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the control loop and accept teleop clients over WebSocket at /ws.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides `server.port` from the config.
        #[arg(long)]
        port: Option<u16>,
    },
    /// Run a scenario headless and write per-tick CSV telemetry.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Load and validate a config file.
    CheckConfig { path: PathBuf },
    /// Solve one leg's inverse kinematics for a foot target in the hip frame (meters).
    Ik {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        /// FL, FR, BL or BR.
        #[arg(long, default_value = "FL")]
        leg: LegId,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn config_or_default(path: Option<PathBuf>) -> Result<Config, String> {
    match path {
        Some(p) => load_config(&p).map_err(|e| format!("{}: {e}", p.display())),
        None => Ok(Config::default()),
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Serve { config, port } => {
            let mut config = config_or_default(config)?;
            if let Some(port) = port {
                config.server.port = port;
            }
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            rt.block_on(serve(config)).map_err(|e| e.to_string())
        }
        Command::Run { config, scenario, out } => {
            let config = config_or_default(config)?;
            let scenario = Scenario::load(&scenario, &config.default_command)
                .map_err(|e| format!("{}: {e}", scenario.display()))?;
            let summary = run_scenario(&config, &scenario, &out).map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?);
            Ok(())
        }
        Command::CheckConfig { path } => {
            let c = load_config(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let g = c.geometry();
            println!(
                "ok: links {:.3}/{:.3}/{:.3} m, control {} Hz, sim dt {} s, server {}:{}",
                g.l_hip, g.l_upper, g.l_lower, c.controller.rate_hz, c.sim.dt, c.server.bind, c.server.port
            );
            Ok(())
        }
        Command::Ik { x, y, z, leg, config } => {
            let g = *config_or_default(config)?.geometry();
            let target = Vec3::new(x, y, z);
            let a = leg_ik(&target, &g, leg).map_err(|e| format!("{leg}: {e}"))?;
            let err = leg_fk(&a, &g, leg).distance(&target);
            println!("leg {leg}");
            for (name, v) in [("theta1 (hip)", a.theta1), ("theta2 (upper)", a.theta2), ("theta3 (knee)", a.theta3)] {
                println!("  {name:<15} {v:>12.9} rad  {:>10.4} deg", v.to_degrees());
            }
            println!("  fk residual     {err:.3e} m");
            Ok(())
        }
    }
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
