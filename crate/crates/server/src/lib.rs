//! Boundary of the quadruped stack: configuration, the teleop wire protocol,
//! the live WebSocket service and the headless scenario runner.

pub mod config;
pub mod control_loop;
pub mod run;
pub mod scenario;
pub mod serve;
pub mod wire;

pub use config::{load_config, Config, ConfigError};
pub use control_loop::ControlLoop;
pub use run::{run_scenario, run_scenario_to, RunError, Summary};
pub use scenario::{Keyframe, Scenario, ScenarioError};
pub use serve::{serve, start, ServeError, ServerHandle};
pub use wire::{decode, encode, Envelope, WireMessage, PROTOCOL_VERSION};
