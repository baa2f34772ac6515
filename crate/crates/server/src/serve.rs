//! Live teleop service.
//!
//! The control loop runs on its own OS thread at the configured rate whether
//! or not anyone is connected. Clients talk to it only through the
//! latest-wins [`CommandMailbox`] (commands in) and a broadcast channel of
//! [`StateMsg`] snapshots (state out); a slow client lags and skips
//! snapshots instead of stalling the loop.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use quadruped_core::controller::{CommandLimits, CommandMailbox, ControlError, TeleopCommand};
use thiserror::Error;
use tokio::sync::{broadcast, oneshot, watch};

use crate::config::Config;
use crate::control_loop::ControlLoop;
use crate::wire::{self, CmdMsg, ErrCode, ErrMsg, PongMsg, Sequencer, StateMsg, WireMessage};

/// What the mailbox carries: a clamped command plus the sender's `seq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireCommand {
    pub seq: u64,
    pub command: TeleopCommand,
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("server I/O: {0}")]
    Io(#[from] std::io::Error),
}

struct Shared {
    mailbox: CommandMailbox<WireCommand>,
    limits: CommandLimits,
    states: broadcast::Sender<Arc<StateMsg>>,
    stopping: watch::Receiver<bool>,
}

pub struct ServerHandle {
    addr: SocketAddr,
    shared: Arc<Shared>,
    stop_loop: Arc<AtomicBool>,
    stop_clients: watch::Sender<bool>,
    stop_http: Option<oneshot::Sender<()>>,
    http: tokio::task::JoinHandle<std::io::Result<()>>,
    control: Option<JoinHandle<Result<(), ControlError>>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Total commands accepted from all clients.
    pub fn commands_received(&self) -> u64 {
        self.shared.mailbox.posted()
    }

    /// Stops accepting connections, disconnects clients and joins the control loop.
    pub async fn shutdown(mut self) -> Result<(), ServeError> {
        self.stop_loop.store(true, Ordering::Relaxed);
        let _ = self.stop_clients.send(true);
        if let Some(tx) = self.stop_http.take() {
            let _ = tx.send(());
        }
        let http = (&mut self.http).await.map_err(|e| std::io::Error::other(e.to_string()))?;
        http?;
        if let Some(control) = self.control.take() {
            tokio::task::spawn_blocking(move || control.join())
                .await
                .map_err(|e| std::io::Error::other(e.to_string()))?
                .map_err(|_| std::io::Error::other("control loop panicked"))??;
        }
        Ok(())
    }
}

/// Binds `addr` (port 0 picks a free port) and starts the loop and the socket service.
pub async fn start(config: Config, addr: &str) -> Result<ServerHandle, ServeError> {
    let control_loop = ControlLoop::new(&config)?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServeError::Bind { addr: addr.to_string(), source })?;
    let local = listener.local_addr()?;

    let (states, _) = broadcast::channel(16);
    let (stop_clients, stopping) = watch::channel(false);
    let shared =
        Arc::new(Shared { mailbox: CommandMailbox::new(), limits: config.controller.limits, states, stopping });

    let stop_loop = Arc::new(AtomicBool::new(false));
    let control = {
        let shared = Arc::clone(&shared);
        let stop = Arc::clone(&stop_loop);
        std::thread::Builder::new()
            .name("control-loop".into())
            .spawn(move || run_loop(control_loop, &config, &shared, &stop))?
    };

    let router = Router::new().route("/ws", get(upgrade)).with_state(Arc::clone(&shared));
    let (stop_http, http_stopped) = oneshot::channel::<()>();
    let http = tokio::spawn(async move {
        axum::serve(listener, router)
            .with_graceful_shutdown(async {
                let _ = http_stopped.await;
            })
            .await
    });

    Ok(ServerHandle {
        addr: local,
        shared,
        stop_loop,
        stop_clients,
        stop_http: Some(stop_http),
        http,
        control: Some(control),
    })
}

/// Runs the service on the configured address until Ctrl-C.
pub async fn serve(config: Config) -> Result<(), ServeError> {
    let addr = format!("{}:{}", config.server.bind, config.server.port);
    let handle = start(config, &addr).await?;
    println!("listening on ws://{}/ws", handle.local_addr());
    tokio::signal::ctrl_c().await?;
    handle.shutdown().await
}

fn run_loop(mut lp: ControlLoop, config: &Config, shared: &Shared, stop: &AtomicBool) -> Result<(), ControlError> {
    let period = Duration::from_secs_f64(lp.dt());
    let state_period = 1.0 / config.server.state_rate_hz;
    let mut next_state_time = 0.0;
    let mut pending_diagnostics = Vec::new();
    let mut deadline = Instant::now();

    while !stop.load(Ordering::Relaxed) {
        let (seq, command) = match shared.mailbox.snapshot() {
            Some(s) => (Some(s.command.seq), s.command.command),
            None => (None, config.default_command),
        };
        let t = lp.tick(&command)?;
        if pending_diagnostics.len() < 256 {
            pending_diagnostics.extend(t.diagnostics);
        }

        if t.state.time + 1e-9 >= next_state_time {
            next_state_time += state_period;
            let msg = StateMsg {
                tick: t.frame.tick,
                mode: t.frame.mode,
                gait_phase: t.frame.gait_phase,
                command_seq: seq,
                command,
                commanded_joints: t.frame.joints,
                robot: t.state,
                diagnostics: std::mem::take(&mut pending_diagnostics),
            };
            // No receivers is fine: the loop never waits for clients.
            let _ = shared.states.send(Arc::new(msg));
        }

        deadline += period;
        let now = Instant::now();
        if deadline > now {
            std::thread::sleep(deadline - now);
        } else if now - deadline > period {
            // Fell behind (e.g. the host was suspended); resume from now instead of bursting.
            deadline = now;
        }
    }
    Ok(())
}

async fn upgrade(ws: WebSocketUpgrade, State(shared): State<Arc<Shared>>) -> Response {
    ws.on_upgrade(move |socket| client(socket, shared))
}

enum Inbound {
    Reply(Option<WireMessage>),
    Fatal(ErrMsg),
}

fn handle_text(text: &str, last_seq: &mut Option<u64>, shared: &Shared) -> Inbound {
    let env = match wire::decode(text) {
        Ok(env) => env,
        Err(e) => return Inbound::Fatal(ErrMsg { code: e.code(), message: e.to_string() }),
    };
    if last_seq.is_some_and(|last| env.seq <= last) {
        return Inbound::Fatal(ErrMsg {
            code: ErrCode::OutOfOrder,
            message: format!("seq {} does not follow {}", env.seq, last_seq.unwrap_or(0)),
        });
    }
    *last_seq = Some(env.seq);
    match env.message {
        WireMessage::Cmd(CmdMsg { command }) => {
            shared.mailbox.post(WireCommand { seq: env.seq, command: command.clamped(&shared.limits) });
            Inbound::Reply(None)
        }
        WireMessage::Ping(p) => Inbound::Reply(Some(WireMessage::Pong(PongMsg { nonce: p.nonce }))),
        WireMessage::Pong(_) | WireMessage::Err(_) => Inbound::Reply(None),
        WireMessage::State(_) => Inbound::Fatal(ErrMsg {
            code: ErrCode::UnexpectedType,
            message: "clients may not send state messages".into(),
        }),
    }
}

async fn client(socket: WebSocket, shared: Arc<Shared>) {
    let (mut sink, mut stream) = socket.split();
    let mut states = shared.states.subscribe();
    let mut stopping = shared.stopping.clone();
    let mut seq = Sequencer::default();
    let mut last_in = None;

    loop {
        let outgoing = tokio::select! {
            _ = stopping.changed() => break,
            st = states.recv() => match st {
                Ok(msg) => WireMessage::State(Box::new((*msg).clone())),
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => break,
            },
            incoming = stream.next() => {
                let reply = match incoming {
                    None | Some(Err(_)) | Some(Ok(Message::Close(_))) => break,
                    Some(Ok(Message::Text(text))) => match handle_text(text.as_str(), &mut last_in, &shared) {
                        Inbound::Reply(Some(reply)) => reply,
                        Inbound::Reply(None) => continue,
                        Inbound::Fatal(err) => WireMessage::Err(err),
                    },
                    Some(Ok(Message::Binary(_))) => WireMessage::Err(ErrMsg {
                        code: ErrCode::Malformed,
                        message: "binary frames are not part of the protocol".into(),
                    }),
                    Some(Ok(_)) => continue,
                };
                if let WireMessage::Err(_) = reply {
                    // Protocol violation: explain, then drop this client only.
                    let text = wire::encode(&seq.wrap(reply));
                    let _ = sink.send(Message::Text(text.into())).await;
                    let _ = sink.send(Message::Close(None)).await;
                    break;
                }
                reply
            }
        };
        if sink.send(Message::Text(wire::encode(&seq.wrap(outgoing)).into())).await.is_err() {
            break;
        }
    }
}
