#![allow(dead_code)]

use std::path::PathBuf;
use std::time::Duration;

use futures::{SinkExt, StreamExt};
use proptest::prelude::*;
use quadruped_core::controller::{BodyCommand, ControllerMode, IkDiagnostic, IkFailureKind, TeleopCommand};
use quadruped_core::gait::{GaitCommand, GaitPattern, SideWalkMode};
use quadruped_core::kinematics::{BodyPose, LegId, Vec3};
use quadruped_core::simulator::{Pose2, RobotState};
use quadruped_server::wire::*;
use quadruped_server::{load_config, Config, Scenario};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

pub fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

pub fn shipped_config() -> Config {
    load_config(repo_path("config/default.toml")).unwrap()
}

pub fn shipped_scenario(name: &str, config: &Config) -> Scenario {
    Scenario::load(repo_path(&format!("scenarios/{name}.toml")), &config.default_command).unwrap()
}

// ---- strategies -------------------------------------------------------

pub fn finite() -> impl Strategy<Value = f64> {
    any::<f64>().prop_filter("finite", |v| v.is_finite())
}

fn vec3() -> impl Strategy<Value = Vec3> {
    (finite(), finite(), finite()).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn leg() -> impl Strategy<Value = LegId> {
    prop::sample::select(LegId::ALL.to_vec())
}

pub fn teleop_command() -> impl Strategy<Value = TeleopCommand> {
    let gait = (
        prop::sample::select(vec![GaitPattern::Trot, GaitPattern::Walk]),
        prop::sample::select(vec![SideWalkMode::Linear, SideWalkMode::Rotation]),
        finite(),
        finite(),
        finite(),
        finite(),
        finite(),
    )
        .prop_map(|(pattern, side_walk_mode, sx, sy, sh, sd, cp)| GaitCommand {
            pattern,
            side_walk_mode,
            step_length_x: sx,
            step_length_y: sy,
            swing_height: sh,
            stance_depth: sd,
            cycle_period: cp,
        });
    let body = (finite(), finite(), finite(), finite()).prop_map(|(height, roll, pitch, yaw)| BodyCommand {
        height,
        roll,
        pitch,
        yaw,
    });
    (any::<bool>(), any::<bool>(), gait, body, finite())
        .prop_map(|(start, walk, gait, body, timestamp)| TeleopCommand { start, walk, gait, body, timestamp })
}

fn robot_state() -> impl Strategy<Value = RobotState> {
    let pose = (finite(), finite(), finite(), finite(), finite())
        .prop_map(|(height, roll, pitch, yaw, lateral_shift)| BodyPose { height, roll, pitch, yaw, lateral_shift });
    (
        finite(),
        prop::array::uniform12(finite()),
        prop::array::uniform12(finite()),
        (finite(), finite(), finite()).prop_map(|(x, y, heading)| Pose2 { x, y, heading }),
        prop::array::uniform4(vec3()),
        prop::array::uniform4(vec3()),
        prop::array::uniform4(any::<bool>()),
        prop::option::of(finite()),
        pose,
    )
        .prop_map(
            |(time, joints, joint_velocities, odometry, feet_world, feet_local, stance, com_margin, body)| RobotState {
                time,
                joints,
                joint_velocities,
                odometry,
                feet_world,
                feet_local,
                stance,
                com_margin,
                body,
            },
        )
}

fn diagnostic() -> impl Strategy<Value = IkDiagnostic> {
    (
        any::<u64>(),
        leg(),
        prop::sample::select(vec![IkFailureKind::Unreachable, IkFailureKind::JointLimit, IkFailureKind::NonFinite]),
    )
        .prop_map(|(tick, leg, message_kind)| IkDiagnostic { tick, leg, message_kind })
}

fn state_msg() -> impl Strategy<Value = StateMsg> {
    (
        any::<u64>(),
        prop::sample::select(vec![ControllerMode::Idle, ControllerMode::Standing, ControllerMode::Walking]),
        finite(),
        prop::option::of(any::<u64>()),
        teleop_command(),
        prop::array::uniform12(finite()),
        robot_state(),
        prop::collection::vec(diagnostic(), 0..4),
    )
        .prop_map(|(tick, mode, gait_phase, command_seq, command, commanded_joints, robot, diagnostics)| {
            StateMsg { tick, mode, gait_phase, command_seq, command, commanded_joints, robot, diagnostics }
        })
}

pub fn wire_message() -> impl Strategy<Value = WireMessage> {
    prop_oneof![
        teleop_command().prop_map(|command| WireMessage::Cmd(CmdMsg { command })),
        state_msg().prop_map(|s| WireMessage::State(Box::new(s))),
        any::<u64>().prop_map(|nonce| WireMessage::Ping(PingMsg { nonce })),
        any::<u64>().prop_map(|nonce| WireMessage::Pong(PongMsg { nonce })),
        (
            prop::sample::select(vec![
                ErrCode::Malformed,
                ErrCode::UnsupportedVersion,
                ErrCode::OutOfOrder,
                ErrCode::UnexpectedType
            ]),
            any::<String>()
        )
            .prop_map(|(code, message)| WireMessage::Err(ErrMsg { code, message })),
    ]
}

pub fn envelope() -> impl Strategy<Value = Envelope> {
    (any::<u64>(), wire_message()).prop_map(|(seq, m)| Envelope::new(seq, m))
}

// ---- loopback client --------------------------------------------------

pub type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

pub async fn connect(addr: std::net::SocketAddr) -> Ws {
    let (ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/ws")).await.unwrap();
    ws
}

pub async fn send(ws: &mut Ws, env: &Envelope) {
    ws.send(Message::Text(encode(env).into())).await.unwrap();
}

/// Next protocol message, or `None` once the server closes the connection.
pub async fn recv(ws: &mut Ws) -> Option<Envelope> {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(5), ws.next()).await.expect("server went silent")?;
        match msg {
            Ok(Message::Text(t)) => return Some(decode(t.as_str()).unwrap()),
            Ok(Message::Close(_)) | Err(_) => return None,
            Ok(_) => continue,
        }
    }
}

/// Skips messages until one satisfies `pred` on a state snapshot.
pub async fn wait_for_state(ws: &mut Ws, mut pred: impl FnMut(&StateMsg) -> bool) -> StateMsg {
    for _ in 0..600 {
        if let Some(Envelope { message: WireMessage::State(s), .. }) = recv(ws).await {
            if pred(&s) {
                return *s;
            }
        }
    }
    panic!("no matching state within 600 messages");
}
