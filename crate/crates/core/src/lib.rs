//! Kinematics, gait generation, control pipeline and kinematic twin for a
//! 12-DoF quadruped with three-joint legs (hip roll, upper-leg pitch, knee).

pub mod controller;
pub mod gait;
pub mod kinematics;
pub mod simulator;

pub use controller::{
    apply_command, smooth_command, BodyCommand, CommandLimits, CommandMailbox, ControlError, Controller,
    ControllerConfig, ControllerMode, JointCommandFrame, SlewRates, TeleopCommand,
};
pub use gait::{com_margin, GaitCommand, GaitPattern, GaitPlanner, SideWalkMode};
pub use kinematics::{
    body_ik, body_rotation, leg_fk, leg_ik, reachable, BodyPose, FootTarget, IkError, JointAngles, LegGeometry, LegId,
    Mounts, RotationMatrix, Vec3,
};
pub use simulator::{RobotState, ServoModel, SimConfig, Simulator};
