//! Kinematic twin of the robot.
//!
//! Joints track commanded frames through a rate-limited servo model. Feet are
//! placed with forward kinematics under the frame's body height, roll and
//! pitch; planar motion (x, y, heading) comes from the rigid motion of the
//! stance feet, so the body moves exactly as far as its planted feet push it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{unpack_joints, JointCommandFrame};
use crate::gait::com_margin;
use crate::kinematics::{leg_fk, rot_x, rot_y, BodyPose, Interval, JointAngles, LegGeometry, LegId, Mounts, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServoModel {
    /// rad/s. `f64::INFINITY` makes the servos track commands exactly.
    pub max_speed: f64,
    /// N·m. Carried for reference; the twin does not simulate torque.
    pub max_torque: f64,
}

impl Default for ServoModel {
    fn default() -> Self {
        Self { max_speed: 7.0, max_torque: 7.0 }
    }
}

impl ServoModel {
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.max_speed.is_nan() || self.max_speed <= 0.0 {
            return Err("max_speed");
        }
        if !(self.max_torque > 0.0 && self.max_torque.is_finite()) {
            return Err("max_torque");
        }
        Ok(())
    }
}

/// Rate-limited first-order tracking, pinned to `limits`.
pub fn servo_step(current: f64, commanded: f64, dt: f64, model: &ServoModel, limits: &Interval) -> f64 {
    let max_delta = model.max_speed * dt;
    let delta = commanded - current;
    let next = if delta.abs() <= max_delta { commanded } else { current + max_delta.copysign(delta) };
    limits.clamp(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose2 {
    /// Applies a motion expressed in this pose's own frame.
    pub fn compose(&self, dx: f64, dy: f64, dheading: f64) -> Pose2 {
        let (s, c) = self.heading.sin_cos();
        Pose2 { x: self.x + c * dx - s * dy, y: self.y + s * dx + c * dy, heading: self.heading + dheading }
    }

    pub fn transform(&self, p: (f64, f64)) -> (f64, f64) {
        let (s, c) = self.heading.sin_cos();
        (self.x + c * p.0 - s * p.1, self.y + s * p.0 + c * p.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub time: f64,
    pub joints: [f64; 12],
    pub joint_velocities: [f64; 12],
    pub odometry: Pose2,
    pub feet_world: [Vec3; 4],
    /// Feet relative to the body center in a gravity-aligned frame that turns with the heading.
    pub feet_local: [Vec3; 4],
    pub stance: [bool; 4],
    pub com_margin: Option<f64>,
    pub body: BodyPose,
}

impl RobotState {
    pub fn stance_count(&self) -> usize {
        self.stance.iter().filter(|s| **s).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no stance feet: odometry frozen")]
pub struct NoStanceFeet;

/// Body motion `(dx, dy, dheading)`, in the previous body frame, that best
/// explains how the stance feet moved relative to the body.
///
/// Solves the 2-D orthogonal Procrustes problem `prev ≈ R·new + t` over the
/// feet in stance. A single foot gives a pure translation.
pub fn odometry_update(
    prev_feet: &[Vec3; 4],
    new_feet: &[Vec3; 4],
    stance: &[bool; 4],
) -> Result<(f64, f64, f64), NoStanceFeet> {
    let idx: Vec<usize> = (0..4).filter(|&i| stance[i]).collect();
    if idx.is_empty() {
        return Err(NoStanceFeet);
    }
    let n = idx.len() as f64;
    let centroid = |f: &[Vec3; 4]| {
        let (sx, sy) = idx.iter().fold((0.0, 0.0), |(sx, sy), &i| (sx + f[i].x, sy + f[i].y));
        (sx / n, sy / n)
    };
    let cp = centroid(prev_feet);
    let cn = centroid(new_feet);
    let (mut dot, mut cross) = (0.0, 0.0);
    for &i in &idx {
        let (px, py) = (prev_feet[i].x - cp.0, prev_feet[i].y - cp.1);
        let (qx, qy) = (new_feet[i].x - cn.0, new_feet[i].y - cn.1);
        dot += qx * px + qy * py;
        cross += qx * py - qy * px;
    }
    let dtheta = if idx.len() > 1 { cross.atan2(dot) } else { 0.0 };
    let (s, c) = dtheta.sin_cos();
    let tx = cp.0 - (c * cn.0 - s * cn.1);
    let ty = cp.1 - (s * cn.0 + c * cn.1);
    Ok((tx, ty, dtheta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub geometry: LegGeometry,
    pub mounts: Mounts,
    pub servo: ServoModel,
    pub contact_epsilon: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            geometry: LegGeometry::default(),
            mounts: Mounts::default(),
            servo: ServoModel::default(),
            contact_epsilon: 1e-4,
        }
    }
}

/// Feet relative to the body center in the heading-aligned level frame.
pub fn feet_local(joints: &[f64; 12], body: &BodyPose, cfg: &SimConfig) -> [Vec3; 4] {
    let tilt = rot_y(body.pitch) * rot_x(body.roll);
    let legs = unpack_joints(joints);
    LegId::ALL.map(|leg| {
        let hip = leg_fk(&legs[leg.index()], &cfg.geometry, leg);
        tilt * (hip + cfg.mounts.get(leg)) + Vec3::new(0.0, 0.0, body.height)
    })
}

fn contact(feet: &[Vec3; 4], eps: f64) -> [bool; 4] {
    feet.map(|f| f.z <= eps)
}

fn world_feet(pose: &Pose2, local: &[Vec3; 4]) -> [Vec3; 4] {
    local.map(|f| {
        let (x, y) = pose.transform((f.x, f.y));
        Vec3::new(x, y, f.z)
    })
}

fn margin(feet: &[Vec3; 4], stance: &[bool; 4], pose: &Pose2) -> Option<f64> {
    let pts: Vec<(f64, f64)> = (0..4).filter(|&i| stance[i]).map(|i| (feet[i].x, feet[i].y)).collect();
    com_margin(&pts, (pose.x, pose.y)).ok()
}

/// Builds the state of a robot holding `joints` under `body`, at the world origin.
pub fn initial_state(joints: [f64; 12], body: BodyPose, cfg: &SimConfig) -> RobotState {
    let local = feet_local(&joints, &body, cfg);
    let stance = contact(&local, cfg.contact_epsilon);
    let odometry = Pose2::default();
    let feet_world = world_feet(&odometry, &local);
    RobotState {
        time: 0.0,
        joints,
        joint_velocities: [0.0; 12],
        odometry,
        com_margin: margin(&feet_world, &stance, &odometry),
        feet_world,
        feet_local: local,
        stance,
        body,
    }
}

/// Outcome of one integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    pub state: RobotState,
    /// Set when no foot stayed planted across the step.
    pub odometry_frozen: bool,
}

/// Advances the twin by `dt` toward `frame`. Pure: the input state is untouched.
pub fn step(state: &RobotState, frame: &JointCommandFrame, dt: f64, cfg: &SimConfig) -> StepOutput {
    let limits = cfg.geometry.limits();
    let mut joints = state.joints;
    let mut vel = [0.0; 12];
    for i in 0..12 {
        joints[i] = servo_step(state.joints[i], frame.joints[i], dt, &cfg.servo, &limits[i % 3]);
        vel[i] = (joints[i] - state.joints[i]) / dt;
    }
    let body = frame.body;
    let local = feet_local(&joints, &body, cfg);
    let stance = contact(&local, cfg.contact_epsilon);
    let planted: [bool; 4] = std::array::from_fn(|i| stance[i] && state.stance[i]);

    let (odometry, frozen) = match odometry_update(&state.feet_local, &local, &planted) {
        Ok((dx, dy, dh)) => (state.odometry.compose(dx, dy, dh), false),
        Err(NoStanceFeet) => (state.odometry, true),
    };
    let feet_world = world_feet(&odometry, &local);
    let state = RobotState {
        time: state.time + dt,
        joints,
        joint_velocities: vel,
        odometry,
        com_margin: margin(&feet_world, &stance, &odometry),
        feet_world,
        feet_local: local,
        stance,
        body,
    };
    StepOutput { state, odometry_frozen: frozen }
}

/// Owns a [`RobotState`] and steps it in place.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SimConfig,
    state: RobotState,
}

impl Simulator {
    pub fn new(cfg: SimConfig, joints: [f64; 12], body: BodyPose) -> Self {
        let state = initial_state(joints, body, &cfg);
        Self { cfg, state }
    }

    pub fn state(&self) -> &RobotState {
        &self.state
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn step(&mut self, frame: &JointCommandFrame, dt: f64) -> StepOutput {
        let out = step(&self.state, frame, dt, &self.cfg);
        self.state = out.state;
        out
    }

    /// Hip-frame foot positions implied by the simulated joints.
    pub fn hip_feet(&self) -> [Vec3; 4] {
        let legs: [JointAngles; 4] = unpack_joints(&self.state.joints);
        LegId::ALL.map(|leg| leg_fk(&legs[leg.index()], &self.cfg.geometry, leg))
    }
}
