//! Scripted teleop sessions.
//!
//! A scenario file is TOML:
//!
//! ```toml
//! duration = 10.0
//!
//! [[keyframe]]
//! time = 0.0
//! start = true
//!
//! [[keyframe]]
//! time = 1.5
//! walk = true
//! pattern = "walk"
//! step_length_x = 0.04
//! ```
//!
//! Each keyframe only lists what changes; everything else is inherited from
//! the previous keyframe (the first inherits the config's default command).
//! A keyframe holds from its time until the next one.

use std::path::Path;

use quadruped_core::controller::TeleopCommand;
use quadruped_core::gait::{GaitPattern, SideWalkMode};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("keyframe {index}: time must be finite and strictly greater than the previous keyframe's")]
    NonIncreasing { index: usize },
    #[error("duration {duration} is shorter than the last keyframe time {last}")]
    DurationTooShort { duration: f64, last: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keyframe {
    pub time: f64,
    pub command: TeleopCommand,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    keyframes: Vec<Keyframe>,
    duration: f64,
}

impl Scenario {
    pub fn new(keyframes: Vec<Keyframe>, duration: f64) -> Result<Self, ScenarioError> {
        let mut prev = f64::NEG_INFINITY;
        for (index, k) in keyframes.iter().enumerate() {
            if !(k.time.is_finite() && k.time >= 0.0 && k.time > prev) {
                return Err(ScenarioError::NonIncreasing { index });
            }
            prev = k.time;
        }
        let last = keyframes.last().map_or(0.0, |k| k.time);
        if !(duration.is_finite() && duration >= last && duration >= 0.0) {
            return Err(ScenarioError::DurationTooShort { duration, last });
        }
        Ok(Self { keyframes, duration })
    }

    /// No keyframes: the robot stays as the defaults leave it.
    pub fn empty(duration: f64) -> Result<Self, ScenarioError> {
        Self::new(Vec::new(), duration)
    }

    pub fn keyframes(&self) -> &[Keyframe] {
        &self.keyframes
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Command in force at `time`; `base` before the first keyframe.
    pub fn command_at(&self, time: f64, base: &TeleopCommand) -> TeleopCommand {
        let idx = self.keyframes.partition_point(|k| k.time <= time);
        let mut cmd = if idx == 0 { *base } else { self.keyframes[idx - 1].command };
        cmd.timestamp = time;
        cmd
    }

    pub fn from_toml_str(text: &str, base: &TeleopCommand) -> Result<Self, ScenarioError> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.span().map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1),
            message: e.message().to_string(),
        })?;
        let mut current = *base;
        let keyframes = raw
            .keyframe
            .iter()
            .map(|k| {
                current = k.apply(&current);
                current.timestamp = k.time;
                Keyframe { time: k.time, command: current }
            })
            .collect();
        Self::new(keyframes, raw.duration)
    }

    pub fn load(path: impl AsRef<Path>, base: &TeleopCommand) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text, base)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    duration: f64,
    #[serde(default)]
    keyframe: Vec<RawKeyframe>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKeyframe {
    time: f64,
    start: Option<bool>,
    walk: Option<bool>,
    pattern: Option<GaitPattern>,
    side_walk_mode: Option<SideWalkMode>,
    step_length_x: Option<f64>,
    step_length_y: Option<f64>,
    swing_height: Option<f64>,
    stance_depth: Option<f64>,
    cycle_period: Option<f64>,
    height: Option<f64>,
    roll: Option<f64>,
    pitch: Option<f64>,
    yaw: Option<f64>,
}

impl RawKeyframe {
    fn apply(&self, prev: &TeleopCommand) -> TeleopCommand {
        let mut c = *prev;
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field { $target = v; })*
            };
        }
        set! {
            start => c.start,
            walk => c.walk,
            pattern => c.gait.pattern,
            side_walk_mode => c.gait.side_walk_mode,
            step_length_x => c.gait.step_length_x,
            step_length_y => c.gait.step_length_y,
            swing_height => c.gait.swing_height,
            stance_depth => c.gait.stance_depth,
            cycle_period => c.gait.cycle_period,
            height => c.body.height,
            roll => c.body.roll,
            pitch => c.body.pitch,
            yaw => c.body.yaw,
        }
        c
    }
}
