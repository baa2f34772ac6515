//! TOML configuration for the whole stack.
//!
//! Every section and every key is optional; absent values take the defaults
//! listed in `config/default.toml`. Unknown keys are rejected so a typo never
//! silently falls back to a default. Angles in this file are in degrees where
//! the key says `_deg`, radians otherwise; lengths are meters.

use std::path::Path;

use quadruped_core::controller::{BodyCommand, BodyLimits, CommandLimits, ControllerConfig, SlewRates, TeleopCommand};
use quadruped_core::gait::{GaitCommand, GaitLimits, GaitPattern, LeanParams, SideWalkMode};
use quadruped_core::kinematics::{Interval, LegGeometry, Mounts};
use quadruped_core::simulator::{ServoModel, SimConfig};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid value for `{field}`")]
    Validation { field: String },
}

impl ConfigError {
    fn invalid(section: &str, field: &str) -> Self {
        ConfigError::Validation { field: format!("{section}.{field}") }
    }
}

/// Simulation step settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    /// Integration step, seconds. The control period must be a whole multiple of it.
    pub dt: f64,
    pub contact_epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerSettings {
    pub bind: String,
    pub port: u16,
    /// StateMsg broadcast rate, Hz.
    pub state_rate_hz: f64,
}

/// Fully validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub controller: ControllerConfig,
    /// Command used until an operator (or scenario keyframe) says otherwise.
    pub default_command: TeleopCommand,
    pub servo: ServoModel,
    pub sim: SimSettings,
    pub server: ServerSettings,
}

impl Default for Config {
    fn default() -> Self {
        RawConfig::default().resolve().expect("built-in defaults are valid")
    }
}

impl Config {
    pub fn geometry(&self) -> &LegGeometry {
        &self.controller.geometry
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            geometry: self.controller.geometry,
            mounts: self.controller.mounts,
            servo: self.servo,
            contact_epsilon: self.sim.contact_epsilon,
        }
    }

    pub fn control_dt(&self) -> f64 {
        self.controller.dt()
    }

    /// Simulator steps per control tick.
    pub fn substeps(&self) -> u32 {
        (self.control_dt() / self.sim.dt).round() as u32
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map(|s| line_col(text, s.start)).unwrap_or((0, 0));
            ConfigError::Parse { line, column, message: e.message().to_string() }
        })?;
        raw.resolve()
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Config, ConfigError> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    Config::from_toml_str(&text)
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawGeometry {
    l_hip: f64,
    l_upper: f64,
    l_lower: f64,
    hip_limits_deg: [f64; 2],
    upper_limits_deg: [f64; 2],
    lower_limits_deg: [f64; 2],
}

impl Default for RawGeometry {
    fn default() -> Self {
        let g = LegGeometry::default();
        Self {
            l_hip: g.l_hip,
            l_upper: g.l_upper,
            l_lower: g.l_lower,
            hip_limits_deg: [-90.0, 90.0],
            upper_limits_deg: [-70.0, 170.0],
            lower_limits_deg: [30.0, 130.0],
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawMounts {
    /// Half distance between front and back hips.
    x: f64,
    /// Half distance between left and right hips.
    y: f64,
}

impl Default for RawMounts {
    fn default() -> Self {
        Self { x: 0.120, y: 0.055 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawGait {
    pattern: GaitPattern,
    side_walk_mode: SideWalkMode,
    swing_height: f64,
    stance_depth: f64,
    cycle_period: f64,
    limits: GaitLimits,
}

impl Default for RawGait {
    fn default() -> Self {
        let g = GaitCommand::default();
        Self {
            pattern: g.pattern,
            side_walk_mode: g.side_walk_mode,
            swing_height: g.swing_height,
            stance_depth: g.stance_depth,
            cycle_period: g.cycle_period,
            limits: GaitLimits::default(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawBody {
    height: f64,
    min_height: f64,
    max_height: f64,
    max_angle_deg: f64,
}

impl Default for RawBody {
    fn default() -> Self {
        let l = BodyLimits::default();
        Self {
            height: BodyCommand::default().height,
            min_height: l.min_height,
            max_height: l.max_height,
            max_angle_deg: l.max_angle.to_degrees(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawController {
    rate_hz: f64,
    sit_height: f64,
    posture_ramp: f64,
    gait_blend: f64,
    slew: SlewRates,
    lean: LeanParams,
}

impl Default for RawController {
    fn default() -> Self {
        let c = ControllerConfig::default();
        Self {
            rate_hz: c.rate_hz,
            sit_height: c.sit_height,
            posture_ramp: c.posture_ramp,
            gait_blend: c.gait_blend,
            slew: c.slew,
            lean: c.lean,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSim {
    dt: Option<f64>,
    contact_epsilon: f64,
}

impl Default for RawSim {
    fn default() -> Self {
        Self { dt: None, contact_epsilon: SimConfig::default().contact_epsilon }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawServer {
    bind: String,
    port: u16,
    state_rate_hz: f64,
}

impl Default for RawServer {
    fn default() -> Self {
        Self { bind: "127.0.0.1".into(), port: 8765, state_rate_hz: 30.0 }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    geometry: RawGeometry,
    mounts: RawMounts,
    gait: RawGait,
    body: RawBody,
    controller: RawController,
    servo: ServoModel,
    sim: RawSim,
    server: RawServer,
}

impl RawConfig {
    fn resolve(self) -> Result<Config, ConfigError> {
        let RawConfig { geometry: g, mounts, gait, body, controller: c, servo, sim, server } = self;

        let interval = |v: [f64; 2]| Interval::from_degrees(v[0], v[1]);
        let geometry = LegGeometry {
            l_hip: g.l_hip,
            l_upper: g.l_upper,
            l_lower: g.l_lower,
            hip_limits: interval(g.hip_limits_deg),
            upper_limits: interval(g.upper_limits_deg),
            lower_limits: interval(g.lower_limits_deg),
        };
        geometry.validate().map_err(|f| {
            // Limits are written in degrees in the file; point at the key the user typed.
            let key = if f.ends_with("_limits") { format!("{f}_deg") } else { f.to_string() };
            ConfigError::invalid("geometry", &key)
        })?;

        if !(mounts.x.is_finite() && mounts.x > 0.0) {
            return Err(ConfigError::invalid("mounts", "x"));
        }
        if !(mounts.y.is_finite() && mounts.y > 0.0) {
            return Err(ConfigError::invalid("mounts", "y"));
        }

        let gait_limits = gait.limits;
        validate_gait_limits(&gait_limits)?;
        let body_limits = BodyLimits {
            min_height: body.min_height,
            max_height: body.max_height,
            max_angle: body.max_angle_deg.to_radians(),
        };
        body_limits.validate().map_err(|f| match f {
            "max_angle" => ConfigError::invalid("body", "max_angle_deg"),
            _ => ConfigError::invalid("body", "min_height"),
        })?;

        let gait_cmd = GaitCommand {
            pattern: gait.pattern,
            side_walk_mode: gait.side_walk_mode,
            step_length_x: 0.0,
            step_length_y: 0.0,
            swing_height: gait.swing_height,
            stance_depth: gait.stance_depth,
            cycle_period: gait.cycle_period,
        };
        gait_cmd.validate(&gait_limits).map_err(|f| ConfigError::invalid("gait", f))?;
        if !(gait_limits.min_cycle_period..=gait_limits.max_cycle_period).contains(&gait_cmd.cycle_period) {
            return Err(ConfigError::invalid("gait", "cycle_period"));
        }
        if !(body.height >= body_limits.min_height && body.height <= body_limits.max_height) {
            return Err(ConfigError::invalid("body", "height"));
        }

        let controller = ControllerConfig {
            geometry,
            mounts: Mounts::symmetric(mounts.x, mounts.y),
            rate_hz: c.rate_hz,
            limits: CommandLimits { gait: gait_limits, body: body_limits },
            slew: c.slew,
            lean: c.lean,
            sit_height: c.sit_height,
            posture_ramp: c.posture_ramp,
            gait_blend: c.gait_blend,
        };
        controller.validate().map_err(|f| match f {
            "rate_hz" | "sit_height" | "posture_ramp" | "gait_blend" | "slew" | "lean" => {
                ConfigError::invalid("controller", f)
            }
            other => ConfigError::invalid("body", other),
        })?;

        servo.validate().map_err(|f| ConfigError::invalid("servo", f))?;

        let control_dt = controller.dt();
        let sim_dt = sim.dt.unwrap_or(control_dt);
        let ratio = control_dt / sim_dt;
        if !(sim_dt > 0.0 && sim_dt.is_finite()) || ratio < 1.0 - 1e-9 || (ratio - ratio.round()).abs() > 1e-9 {
            return Err(ConfigError::invalid("sim", "dt"));
        }
        if !(sim.contact_epsilon >= 0.0 && sim.contact_epsilon.is_finite()) {
            return Err(ConfigError::invalid("sim", "contact_epsilon"));
        }

        if !(server.state_rate_hz > 0.0 && server.state_rate_hz.is_finite()) {
            return Err(ConfigError::invalid("server", "state_rate_hz"));
        }
        if server.bind.trim().is_empty() {
            return Err(ConfigError::invalid("server", "bind"));
        }

        Ok(Config {
            controller,
            default_command: TeleopCommand {
                start: false,
                walk: false,
                gait: gait_cmd,
                body: BodyCommand { height: body.height, ..BodyCommand::default() },
                timestamp: 0.0,
            },
            servo,
            sim: SimSettings { dt: sim_dt, contact_epsilon: sim.contact_epsilon },
            server: ServerSettings { bind: server.bind, port: server.port, state_rate_hz: server.state_rate_hz },
        })
    }
}

fn validate_gait_limits(l: &GaitLimits) -> Result<(), ConfigError> {
    let checks = [
        ("max_step_x", l.max_step_x >= 0.0 && l.max_step_x.is_finite()),
        ("max_step_y", l.max_step_y >= 0.0 && l.max_step_y.is_finite()),
        ("max_swing_height", l.max_swing_height >= 0.0 && l.max_swing_height.is_finite()),
        ("max_stance_depth", l.max_stance_depth >= 0.0 && l.max_stance_depth.is_finite()),
        ("min_cycle_period", l.min_cycle_period > 0.0),
        ("max_cycle_period", l.max_cycle_period >= l.min_cycle_period && l.max_cycle_period.is_finite()),
    ];
    match checks.iter().find(|(_, ok)| !ok) {
        Some((f, _)) => Err(ConfigError::Validation { field: format!("gait.limits.{f}") }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(text: &str) -> String {
        match Config::from_toml_str(text) {
            Err(ConfigError::Validation { field }) => field,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn empty_document_gives_defaults() {
        let c = Config::from_toml_str("").unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.controller.rate_hz, 100.0);
        assert_eq!(c.servo.max_torque, 7.0);
        assert_eq!(c.server.state_rate_hz, 30.0);
        assert_eq!(c.substeps(), 1);
        assert_eq!(*c.geometry(), LegGeometry::default());
    }

    #[test]
    fn validation_names_the_field() {
        assert_eq!(field_of("[gait]\ncycle_period = 0.0\n"), "gait.cycle_period");
        assert_eq!(field_of("[geometry]\nl_upper = -1.0\n"), "geometry.l_upper");
        assert_eq!(field_of("[geometry]\nlower_limits_deg = [130.0, 30.0]\n"), "geometry.lower_limits_deg");
        assert_eq!(field_of("[controller]\nrate_hz = 0.0\n"), "controller.rate_hz");
        assert_eq!(field_of("[sim]\ndt = 0.003\n"), "sim.dt");
        assert_eq!(field_of("[servo]\nmax_speed = 0.0\n"), "servo.max_speed");
        assert_eq!(field_of("[body]\nheight = 0.5\n"), "body.height");
        assert_eq!(field_of("[gait.limits]\nmax_cycle_period = 0.1\n"), "gait.limits.max_cycle_period");
    }

    #[test]
    fn unknown_keys_report_line() {
        match Config::from_toml_str("[servo]\nmax_speed = 5.0\nmax_sped = 2.0\n") {
            Err(ConfigError::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("max_sped"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(Config::from_toml_str("[nonsense]\n"), Err(ConfigError::Parse { line: 1, .. })));
        assert!(matches!(
            Config::from_toml_str("[gait]\ncycle_period = \"x\"\n"),
            Err(ConfigError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn sim_substeps() {
        let c = Config::from_toml_str("[sim]\ndt = 0.0025\n").unwrap();
        assert_eq!(c.substeps(), 4);
    }
}
