//! The closed loop shared by the live server and the headless runner:
//! controller tick, then as many simulator substeps as the config asks for.

use quadruped_core::controller::{ControlError, Controller, IkDiagnostic, JointCommandFrame, TeleopCommand};
use quadruped_core::simulator::{RobotState, Simulator};

use crate::config::Config;

#[derive(Debug, Clone)]
pub struct LoopTick {
    pub frame: JointCommandFrame,
    pub state: RobotState,
    pub diagnostics: Vec<IkDiagnostic>,
}

#[derive(Debug, Clone)]
pub struct ControlLoop {
    controller: Controller,
    sim: Simulator,
    dt: f64,
    sim_dt: f64,
    substeps: u32,
}

impl ControlLoop {
    /// Starts seated: the twin's joints are the controller's initial posture.
    pub fn new(config: &Config) -> Result<Self, ControlError> {
        let controller = Controller::ready(config.controller)?;
        let joints = controller.joints().ok_or(ControlError::NotInitialized)?;
        let sim = Simulator::new(
            config.sim_config(),
            quadruped_core::controller::pack_joints(&joints),
            controller.seated_pose(),
        );
        let substeps = config.substeps().max(1);
        Ok(Self { controller, sim, dt: config.control_dt(), sim_dt: config.control_dt() / substeps as f64, substeps })
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    pub fn state(&self) -> &RobotState {
        self.sim.state()
    }

    /// Control period, seconds.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn tick(&mut self, command: &TeleopCommand) -> Result<LoopTick, ControlError> {
        let out = self.controller.control_tick(command, self.dt)?;
        for _ in 0..self.substeps {
            self.sim.step(&out.frame, self.sim_dt);
        }
        Ok(LoopTick { frame: out.frame, state: *self.sim.state(), diagnostics: out.diagnostics })
    }
}
