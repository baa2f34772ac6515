//! Fixed-rate control pipeline: command → gait plan → body IK → leg IK.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gait::{FootPlan, GaitCommand, GaitLimits, GaitPattern, GaitPlanner, LeanParams, SideWalkMode};
use crate::kinematics::{
    body_targets, leg_ik, neutral_stance, BodyPose, FootTarget, IkError, JointAngles, LegGeometry, LegId, Mounts, Vec3,
};

/// Operator-controlled body posture. The lateral lean is owned by the gait.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyCommand {
    pub height: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl Default for BodyCommand {
    fn default() -> Self {
        Self { height: 0.17, roll: 0.0, pitch: 0.0, yaw: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BodyLimits {
    pub min_height: f64,
    pub max_height: f64,
    /// Symmetric soft limit on roll, pitch and yaw, radians.
    pub max_angle: f64,
}

impl Default for BodyLimits {
    fn default() -> Self {
        Self { min_height: 0.08, max_height: 0.24, max_angle: 25f64.to_radians() }
    }
}

impl BodyLimits {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.min_height > 0.0 && self.min_height < self.max_height) {
            return Err("min_height");
        }
        if !(self.max_angle >= 0.0 && self.max_angle.is_finite()) {
            return Err("max_angle");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommandLimits {
    pub gait: GaitLimits,
    pub body: BodyLimits,
}

/// One full teleop command as it arrives from an operator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TeleopCommand {
    pub start: bool,
    pub walk: bool,
    pub gait: GaitCommand,
    pub body: BodyCommand,
    pub timestamp: f64,
}

impl TeleopCommand {
    /// Brings every field inside `limits`. Never fails.
    pub fn clamped(&self, limits: &CommandLimits) -> TeleopCommand {
        let b = &limits.body;
        let angle = |v: f64| if v.is_finite() { v.clamp(-b.max_angle, b.max_angle) } else { 0.0 };
        let height = if self.body.height.is_finite() {
            self.body.height.clamp(b.min_height, b.max_height)
        } else {
            BodyCommand::default().height.clamp(b.min_height, b.max_height)
        };
        TeleopCommand {
            start: self.start,
            walk: self.walk,
            gait: self.gait.clamped(&limits.gait),
            body: BodyCommand {
                height,
                roll: angle(self.body.roll),
                pitch: angle(self.body.pitch),
                yaw: angle(self.body.yaw),
            },
            timestamp: if self.timestamp.is_finite() { self.timestamp } else { 0.0 },
        }
    }
}

/// Maximum slew of each numeric command field, per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlewRates {
    pub height: f64,
    pub angle: f64,
    pub step: f64,
    pub cycle_period: f64,
}

impl Default for SlewRates {
    fn default() -> Self {
        Self { height: 0.2, angle: 90f64.to_radians(), step: 0.1, cycle_period: 1.0 }
    }
}

fn slew(prev: f64, next: f64, max_delta: f64) -> f64 {
    let d = next - prev;
    if d.abs() <= max_delta {
        next
    } else {
        prev + max_delta.copysign(d)
    }
}

/// Moves each numeric field of `prev` toward `next` by at most `rate * dt`.
pub fn smooth_command(prev: &TeleopCommand, next: &TeleopCommand, dt: f64, rates: &SlewRates) -> TeleopCommand {
    let (p, n) = (&prev.gait, &next.gait);
    let step = rates.step * dt;
    let ang = rates.angle * dt;
    TeleopCommand {
        start: next.start,
        walk: next.walk,
        timestamp: next.timestamp,
        gait: GaitCommand {
            pattern: n.pattern,
            side_walk_mode: n.side_walk_mode,
            step_length_x: slew(p.step_length_x, n.step_length_x, step),
            step_length_y: slew(p.step_length_y, n.step_length_y, step),
            swing_height: slew(p.swing_height, n.swing_height, step),
            stance_depth: slew(p.stance_depth, n.stance_depth, step),
            cycle_period: slew(p.cycle_period, n.cycle_period, rates.cycle_period * dt),
        },
        body: BodyCommand {
            height: slew(prev.body.height, next.body.height, rates.height * dt),
            roll: slew(prev.body.roll, next.body.roll, ang),
            pitch: slew(prev.body.pitch, next.body.pitch, ang),
            yaw: slew(prev.body.yaw, next.body.yaw, ang),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerMode {
    #[default]
    Idle,
    Standing,
    Walking,
}

/// Mode transition graph: Idle ↔ Standing via `start`, Standing ↔ Walking via `walk`.
/// Dropping `start` returns to Idle from any mode.
pub fn apply_command(mode: ControllerMode, cmd: &TeleopCommand) -> ControllerMode {
    use ControllerMode::*;
    if !cmd.start {
        return Idle;
    }
    match (mode, cmd.walk) {
        (Idle, _) => Standing,
        (Standing, true) => Walking,
        (Standing, false) => Standing,
        (Walking, true) => Walking,
        (Walking, false) => Standing,
    }
}

/// Joint targets for one tick, ordered [FL, FR, BL, BR] × [hip, upper, lower].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointCommandFrame {
    pub tick: u64,
    pub time: f64,
    pub mode: ControllerMode,
    pub joints: [f64; 12],
    /// Body pose the joints realize, including the gait lean.
    pub body: BodyPose,
    /// Footholds in the neutral frame (ground plane z = 0).
    pub planned_feet: [Vec3; 4],
    /// Hip-frame targets handed to leg IK.
    pub targets: [FootTarget; 4],
    pub planned_stance: [bool; 4],
    pub gait_phase: f64,
}

impl JointCommandFrame {
    pub fn leg(&self, leg: LegId) -> JointAngles {
        let i = leg.index() * 3;
        JointAngles::new(self.joints[i], self.joints[i + 1], self.joints[i + 2])
    }
}

pub fn pack_joints(legs: &[JointAngles; 4]) -> [f64; 12] {
    let mut out = [0.0; 12];
    for (i, a) in legs.iter().enumerate() {
        out[i * 3..i * 3 + 3].copy_from_slice(&a.to_array());
    }
    out
}

pub fn unpack_joints(joints: &[f64; 12]) -> [JointAngles; 4] {
    std::array::from_fn(|i| JointAngles::new(joints[i * 3], joints[i * 3 + 1], joints[i * 3 + 2]))
}

/// Non-fatal IK failure: the leg held its previous angles this tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IkDiagnostic {
    pub tick: u64,
    pub leg: LegId,
    pub message_kind: IkFailureKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IkFailureKind {
    Unreachable,
    JointLimit,
    NonFinite,
}

impl From<&IkError> for IkFailureKind {
    fn from(e: &IkError) -> Self {
        match e {
            IkError::Unreachable { .. } => IkFailureKind::Unreachable,
            IkError::JointLimitViolation { .. } => IkFailureKind::JointLimit,
            IkError::NonFinite { .. } => IkFailureKind::NonFinite,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("controller not initialized")]
    NotInitialized,
    #[error("invalid time step {0}")]
    InvalidDt(f64),
    #[error("invalid controller configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("initial posture unreachable: {0}")]
    InitialPose(IkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub geometry: LegGeometry,
    pub mounts: Mounts,
    pub rate_hz: f64,
    pub limits: CommandLimits,
    pub slew: SlewRates,
    pub lean: LeanParams,
    /// Body height in Idle.
    pub sit_height: f64,
    /// Duration of the sit ↔ stand height ramp, seconds.
    pub posture_ramp: f64,
    /// Time to fade the gait in or out, seconds.
    pub gait_blend: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            geometry: LegGeometry::default(),
            mounts: Mounts::default(),
            rate_hz: 100.0,
            limits: CommandLimits::default(),
            slew: SlewRates::default(),
            lean: LeanParams::default(),
            sit_height: 0.10,
            posture_ramp: 1.0,
            gait_blend: 0.25,
        }
    }
}

impl ControllerConfig {
    pub fn dt(&self) -> f64 {
        1.0 / self.rate_hz
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        self.geometry.validate()?;
        self.limits.body.validate()?;
        if !(self.rate_hz > 0.0 && self.rate_hz.is_finite()) {
            return Err("rate_hz");
        }
        if !(self.sit_height >= self.limits.body.min_height && self.sit_height <= self.limits.body.max_height) {
            return Err("sit_height");
        }
        if self.posture_ramp.is_nan() || self.posture_ramp <= 0.0 {
            return Err("posture_ramp");
        }
        if self.gait_blend.is_nan() || self.gait_blend <= 0.0 {
            return Err("gait_blend");
        }
        let s = &self.slew;
        if ![s.height, s.angle, s.step, s.cycle_period].iter().all(|r| *r > 0.0 && r.is_finite()) {
            return Err("slew");
        }
        if !(self.lean.amplitude.is_finite() && self.lean.ramp >= 0.0 && self.lean.ramp <= 0.5) {
            return Err("lean");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TickOutput {
    pub frame: JointCommandFrame,
    pub diagnostics: Vec<IkDiagnostic>,
}

/// Owns all pipeline state. One instance per robot; driven by a single loop.
#[derive(Debug, Clone)]
pub struct Controller {
    cfg: ControllerConfig,
    planner: GaitPlanner,
    neutral_feet: [Vec3; 4],
    mode: ControllerMode,
    command: TeleopCommand,
    phase: f64,
    /// 0 = seated, 1 = at the commanded height.
    posture: f64,
    /// Fraction of the gait displacements applied.
    gait_amplitude: f64,
    active_gait: (GaitPattern, SideWalkMode),
    joints: Option<[JointAngles; 4]>,
    tick: u64,
    time: f64,
}

impl Controller {
    /// Builds an uninitialized controller; call [`Controller::initialize`] before ticking.
    pub fn new(cfg: ControllerConfig) -> Self {
        let default_cmd = TeleopCommand::default().clamped(&cfg.limits);
        Self {
            planner: GaitPlanner::new(cfg.mounts, cfg.lean),
            neutral_feet: neutral_stance(&cfg.geometry, &cfg.mounts),
            mode: ControllerMode::Idle,
            command: default_cmd,
            phase: 0.0,
            posture: 0.0,
            gait_amplitude: 0.0,
            active_gait: (default_cmd.gait.pattern, default_cmd.gait.side_walk_mode),
            joints: None,
            tick: 0,
            time: 0.0,
            cfg,
        }
    }

    /// Validates the configuration and solves the seated posture.
    pub fn initialize(&mut self) -> Result<(), ControlError> {
        self.cfg.validate().map_err(ControlError::InvalidConfig)?;
        let pose = self.seated_pose();
        let targets = body_targets(&pose, &self.neutral_feet, &self.cfg.mounts);
        let mut legs = [JointAngles::default(); 4];
        for leg in LegId::ALL {
            legs[leg.index()] =
                leg_ik(&targets[leg.index()], &self.cfg.geometry, leg).map_err(ControlError::InitialPose)?;
        }
        self.joints = Some(legs);
        Ok(())
    }

    pub fn ready(cfg: ControllerConfig) -> Result<Self, ControlError> {
        let mut c = Self::new(cfg);
        c.initialize()?;
        Ok(c)
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    /// Body pose the controller holds in Idle; also its pose right after initialization.
    pub fn seated_pose(&self) -> BodyPose {
        BodyPose::level(self.cfg.sit_height)
    }

    pub fn mode(&self) -> ControllerMode {
        self.mode
    }

    pub fn gait_phase(&self) -> f64 {
        self.phase
    }

    pub fn command(&self) -> &TeleopCommand {
        &self.command
    }

    pub fn joints(&self) -> Option<[JointAngles; 4]> {
        self.joints
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    fn approach(value: f64, target: f64, step: f64) -> f64 {
        slew(value, target, step).clamp(0.0, 1.0)
    }

    /// Runs one pipeline iteration and returns the joint frame for this tick.
    pub fn control_tick(&mut self, cmd: &TeleopCommand, dt: f64) -> Result<TickOutput, ControlError> {
        let prev_joints = self.joints.ok_or(ControlError::NotInitialized)?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(ControlError::InvalidDt(dt));
        }

        let wanted = cmd.clamped(&self.cfg.limits);
        self.command = smooth_command(&self.command, &wanted, dt, &self.cfg.slew);
        let cmd = self.command;

        let mut next_mode = apply_command(self.mode, &cmd);
        if next_mode == ControllerMode::Walking && self.mode != ControllerMode::Walking && self.posture < 1.0 {
            next_mode = ControllerMode::Standing;
        }
        self.mode = next_mode;

        let posture_target = if self.mode == ControllerMode::Idle { 0.0 } else { 1.0 };
        self.posture = Self::approach(self.posture, posture_target, dt / self.cfg.posture_ramp);

        let requested_gait = (cmd.gait.pattern, cmd.gait.side_walk_mode);
        let walking = self.mode == ControllerMode::Walking;
        let amp_target = if walking && requested_gait == self.active_gait { 1.0 } else { 0.0 };
        self.gait_amplitude = Self::approach(self.gait_amplitude, amp_target, dt / self.cfg.gait_blend);
        if self.gait_amplitude == 0.0 && (!walking || requested_gait != self.active_gait) {
            self.phase = 0.0;
            self.active_gait = requested_gait;
        }
        if walking {
            self.phase = crate::gait::wrap_phase(self.phase + dt / cmd.gait.cycle_period);
        }

        let plan = if self.gait_amplitude > 0.0 {
            let gait_cmd = GaitCommand { pattern: self.active_gait.0, side_walk_mode: self.active_gait.1, ..cmd.gait };
            self.planner.plan(self.phase, &gait_cmd)
        } else {
            FootPlan::neutral(self.phase)
        };

        let sit = self.cfg.sit_height;
        let body = BodyPose {
            height: sit + self.posture * (cmd.body.height - sit),
            roll: self.posture * cmd.body.roll,
            pitch: self.posture * cmd.body.pitch,
            yaw: self.posture * cmd.body.yaw,
            lateral_shift: self.gait_amplitude * plan.lateral_shift,
        };
        let planned_feet: [Vec3; 4] =
            std::array::from_fn(|i| self.neutral_feet[i] + plan.displacement[i] * self.gait_amplitude);
        let targets = body_targets(&body, &planned_feet, &self.cfg.mounts);

        let mut legs = prev_joints;
        let mut diagnostics = Vec::new();
        for leg in LegId::ALL {
            match leg_ik(&targets[leg.index()], &self.cfg.geometry, leg) {
                Ok(a) => legs[leg.index()] = a,
                Err(e) => diagnostics.push(IkDiagnostic { tick: self.tick, leg, message_kind: (&e).into() }),
            }
        }
        self.joints = Some(legs);

        let frame = JointCommandFrame {
            tick: self.tick,
            time: self.time + dt,
            mode: self.mode,
            joints: pack_joints(&legs),
            body,
            planned_feet,
            targets,
            planned_stance: if self.gait_amplitude > 0.0 { plan.stance } else { [true; 4] },
            gait_phase: self.phase,
        };
        self.tick += 1;
        self.time += dt;
        Ok(TickOutput { frame, diagnostics })
    }
}

/// A command tagged with the order in which the mailbox accepted it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stamped<T = TeleopCommand> {
    pub arrival: u64,
    pub command: T,
}

/// Latest-wins single-slot mailbox shared between command writers and the tick loop.
///
/// `T` is usually a [`TeleopCommand`]; transports may wrap it with their own
/// metadata (e.g. the sender's sequence number).
#[derive(Debug)]
pub struct CommandMailbox<T = TeleopCommand> {
    slot: Mutex<Option<Stamped<T>>>,
    counter: AtomicU64,
}

impl<T> Default for CommandMailbox<T> {
    fn default() -> Self {
        Self { slot: Mutex::new(None), counter: AtomicU64::new(0) }
    }
}

impl<T: Clone> CommandMailbox<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces the pending command. Returns its arrival number.
    pub fn post(&self, command: T) -> u64 {
        let mut slot = self.slot.lock().unwrap_or_else(|e| e.into_inner());
        // Numbered under the lock so arrival order matches slot order.
        let arrival = self.counter.fetch_add(1, Ordering::Relaxed) + 1;
        *slot = Some(Stamped { arrival, command });
        arrival
    }

    /// The most recent command, left in place for subsequent ticks.
    pub fn snapshot(&self) -> Option<Stamped<T>> {
        self.slot.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn posted(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }
}
