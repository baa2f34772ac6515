//! Teleop wire protocol, version "1".
//!
//! One JSON object per WebSocket text frame:
//!
//! ```json
//! {"version":"1","seq":7,"type":"cmd","command":{...}}
//! ```
//!
//! `type` is one of `cmd`, `state`, `ping`, `pong`, `err`. Every sender numbers
//! its own messages with a strictly increasing `seq`. Field names are
//! snake_case, angles are radians, lengths meters.

use quadruped_core::controller::{ControllerMode, IkDiagnostic, TeleopCommand};
use quadruped_core::simulator::RobotState;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PROTOCOL_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub version: String,
    pub seq: u64,
    #[serde(flatten)]
    pub message: WireMessage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WireMessage {
    Cmd(CmdMsg),
    State(Box<StateMsg>),
    Ping(PingMsg),
    Pong(PongMsg),
    Err(ErrMsg),
}

/// Client → server: the full operator command. Clamped on arrival.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmdMsg {
    pub command: TeleopCommand,
}

/// Server → client snapshot of the control loop and the twin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMsg {
    pub tick: u64,
    pub mode: ControllerMode,
    pub gait_phase: f64,
    /// `seq` of the CmdMsg the controller is currently following, if any.
    pub command_seq: Option<u64>,
    /// The (clamped) command the controller is currently following.
    pub command: TeleopCommand,
    pub commanded_joints: [f64; 12],
    pub robot: RobotState,
    /// IK failures since the previous StateMsg.
    pub diagnostics: Vec<IkDiagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PingMsg {
    pub nonce: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PongMsg {
    pub nonce: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrCode {
    Malformed,
    UnsupportedVersion,
    OutOfOrder,
    UnexpectedType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrMsg {
    pub code: ErrCode,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("malformed message: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported protocol version {0:?}")]
    UnsupportedVersion(String),
}

impl DecodeError {
    pub fn code(&self) -> ErrCode {
        match self {
            DecodeError::Malformed(_) => ErrCode::Malformed,
            DecodeError::UnsupportedVersion(_) => ErrCode::UnsupportedVersion,
        }
    }
}

impl Envelope {
    pub fn new(seq: u64, message: WireMessage) -> Self {
        Self { version: PROTOCOL_VERSION.to_string(), seq, message }
    }
}

/// Serializes to compact JSON. Non-finite floats have no JSON form and become `null`.
pub fn encode(env: &Envelope) -> String {
    serde_json::to_string(env).expect("envelope serialization is infallible")
}

pub fn decode(text: &str) -> Result<Envelope, DecodeError> {
    let env: Envelope = serde_json::from_str(text)?;
    if env.version != PROTOCOL_VERSION {
        return Err(DecodeError::UnsupportedVersion(env.version));
    }
    Ok(env)
}

/// Per-connection outgoing sequence counter, starting at 1.
#[derive(Debug, Default)]
pub struct Sequencer {
    last: u64,
}

impl Sequencer {
    pub fn wrap(&mut self, message: WireMessage) -> Envelope {
        self.last += 1;
        Envelope::new(self.last, message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cmd_layout_is_flat_and_snake_case() {
        let env = Envelope::new(3, WireMessage::Cmd(CmdMsg { command: TeleopCommand::default() }));
        let v: serde_json::Value = serde_json::from_str(&encode(&env)).unwrap();
        assert_eq!(v["version"], "1");
        assert_eq!(v["seq"], 3);
        assert_eq!(v["type"], "cmd");
        assert_eq!(v["command"]["gait"]["pattern"], "trot");
        assert_eq!(v["command"]["gait"]["side_walk_mode"], "linear");
        assert_eq!(v["command"]["body"]["height"], 0.17);
    }

    #[test]
    fn rejects_other_versions_and_garbage() {
        let text = r#"{"version":"2","seq":1,"type":"ping","nonce":4}"#;
        assert!(matches!(decode(text), Err(DecodeError::UnsupportedVersion(v)) if v == "2"));
        assert!(matches!(decode("{"), Err(DecodeError::Malformed(_))));
        assert!(matches!(decode(r#"{"version":"1","seq":1,"type":"warp"}"#), Err(DecodeError::Malformed(_))));
        assert!(matches!(decode(r#"{"version":"1","type":"ping","nonce":1}"#), Err(DecodeError::Malformed(_))));
        let ok = decode(r#"{"version":"1","seq":9,"type":"ping","nonce":4}"#).unwrap();
        assert_eq!(ok.message, WireMessage::Ping(PingMsg { nonce: 4 }));
    }

    #[test]
    fn sequencer_counts_from_one() {
        let mut s = Sequencer::default();
        assert_eq!(s.wrap(WireMessage::Pong(PongMsg { nonce: 0 })).seq, 1);
        assert_eq!(s.wrap(WireMessage::Pong(PongMsg { nonce: 0 })).seq, 2);
    }
}
