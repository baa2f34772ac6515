//! Headless scenario execution with per-tick CSV telemetry.
//!
//! Column order (fixed; one header row, then one row per control tick):
//!
//! | columns | meaning |
//! |---|---|
//! | `time` | simulated time at the end of the tick, s |
//! | `cmd_<leg>_<joint>` ×12 | joint angles commanded by the controller, rad |
//! | `sim_<leg>_<joint>` ×12 | joint angles reached by the simulated servos, rad |
//! | `odom_x`, `odom_y`, `odom_heading` | planar odometry, m / m / rad |
//! | `stance_<leg>` ×4 | 1 if the foot is in ground contact, else 0 |
//! | `com_margin` | signed CoM distance to the support polygon edge, m; empty with fewer than 3 contacts |
//!
//! Legs are ordered `fl, fr, bl, br`; joints `hip, upper, knee`. Numbers are
//! written in Rust's shortest round-trip form, so identical runs give identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use quadruped_core::controller::ControlError;
use quadruped_core::kinematics::LegId;
use quadruped_core::simulator::Pose2;
use serde::Serialize;
use thiserror::Error;

use crate::config::Config;
use crate::control_loop::ControlLoop;
use crate::scenario::Scenario;

pub const JOINT_NAMES: [&str; 3] = ["hip", "upper", "knee"];

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot write telemetry: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot write telemetry: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Control(#[from] ControlError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub ticks: u64,
    /// Path length of the odometry track, m.
    pub distance: f64,
    pub final_pose: Pose2,
    /// Smallest margin over ticks with at least three contacts; `None` if there were none.
    pub min_com_margin: Option<f64>,
    /// Ticks with fewer than three feet on the ground.
    pub degenerate_support_ticks: u64,
    pub min_stance_count: usize,
    pub ik_failures: u64,
}

/// Header row, in column order.
pub fn csv_header() -> Vec<String> {
    let joints = |prefix: &str| {
        LegId::ALL
            .iter()
            .flat_map(|leg| JOINT_NAMES.iter().map(move |j| format!("{prefix}_{}_{j}", leg.name().to_lowercase())))
            .collect::<Vec<_>>()
    };
    let mut h = vec!["time".to_string()];
    h.extend(joints("cmd"));
    h.extend(joints("sim"));
    h.extend(["odom_x", "odom_y", "odom_heading"].map(String::from));
    h.extend(LegId::ALL.iter().map(|leg| format!("stance_{}", leg.name().to_lowercase())));
    h.push("com_margin".into());
    h
}

/// Number of control ticks a scenario of `duration` seconds runs for.
pub fn tick_count(config: &Config, duration: f64) -> u64 {
    (duration * config.controller.rate_hz).round() as u64
}

pub fn run_scenario_to<W: Write>(config: &Config, scenario: &Scenario, out: W) -> Result<Summary, RunError> {
    let mut lp = ControlLoop::new(config)?;
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(csv_header())?;

    let mut summary = Summary {
        ticks: 0,
        distance: 0.0,
        final_pose: lp.state().odometry,
        min_com_margin: None,
        degenerate_support_ticks: 0,
        min_stance_count: 4,
        ik_failures: 0,
    };
    let rate = config.controller.rate_hz;
    let mut row: Vec<String> = Vec::with_capacity(33);
    for k in 0..tick_count(config, scenario.duration()) {
        let command = scenario.command_at(k as f64 / rate, &config.default_command);
        let prev = lp.state().odometry;
        let t = lp.tick(&command)?;
        let s = &t.state;

        summary.ticks += 1;
        summary.distance += (s.odometry.x - prev.x).hypot(s.odometry.y - prev.y);
        summary.ik_failures += t.diagnostics.len() as u64;
        summary.min_stance_count = summary.min_stance_count.min(s.stance_count());
        match s.com_margin {
            Some(m) => summary.min_com_margin = Some(summary.min_com_margin.map_or(m, |v: f64| v.min(m))),
            None => summary.degenerate_support_ticks += 1,
        }

        row.clear();
        row.push(s.time.to_string());
        row.extend(t.frame.joints.iter().map(f64::to_string));
        row.extend(s.joints.iter().map(f64::to_string));
        row.extend([s.odometry.x, s.odometry.y, s.odometry.heading].iter().map(f64::to_string));
        row.extend(s.stance.iter().map(|&c| if c { "1" } else { "0" }.to_string()));
        row.push(s.com_margin.map(|m| m.to_string()).unwrap_or_default());
        csv.write_record(&row)?;
    }
    summary.final_pose = lp.state().odometry;
    csv.flush()?;
    Ok(summary)
}

pub fn run_scenario(config: &Config, scenario: &Scenario, out_path: impl AsRef<Path>) -> Result<Summary, RunError> {
    let file = BufWriter::new(File::create(out_path)?);
    run_scenario_to(config, scenario, file)
}
