//! One planner per session, stepped on a dedicated thread.
//!
//! The thread is the only writer. It drains the inbox at each step
//! boundary, applies the commands, steps if running, and publishes a
//! [`Frame`] through a `watch` channel. A slow reader only ever sees the
//! newest frame, so it cannot hold the planner back.

use std::collections::VecDeque;
use std::sync::{Arc, Condvar, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use amrrt_core::env::ObstacleId;
use amrrt_core::metrics::AssistingMetric;
use amrrt_core::planner::{Planner, PlannerConfig, VariantRegistry};
use amrrt_core::{Environment, Rect, State};
use tokio::sync::{mpsc, watch};

use crate::protocol::{ErrorPayload, Frame, ObstacleView, RemoveObstacle};
use crate::ServiceError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Command {
    SetGoal { seq: u64, goal: State },
    AddObstacle { seq: u64, rect: Rect },
    RemoveObstacle { seq: u64, which: RemoveObstacle },
    Pause { seq: u64 },
    Resume { seq: u64 },
}

impl Command {
    pub fn seq(&self) -> u64 {
        match *self {
            Command::SetGoal { seq, .. }
            | Command::AddObstacle { seq, .. }
            | Command::RemoveObstacle { seq, .. }
            | Command::Pause { seq }
            | Command::Resume { seq } => seq,
        }
    }
}

#[derive(Debug, Default)]
struct InboxState {
    queue: VecDeque<Command>,
    closed: bool,
}

/// Bounded command queue. A queued `SetGoal` is dropped when a newer one
/// arrives.
#[derive(Debug)]
pub struct Inbox {
    state: Mutex<InboxState>,
    ready: Condvar,
    cap: usize,
}

impl Inbox {
    pub fn new(cap: usize) -> Self {
        Inbox { state: Mutex::new(InboxState::default()), ready: Condvar::new(), cap: cap.max(1) }
    }

    pub fn push(&self, cmd: Command) -> Result<(), ServiceError> {
        let mut s = self.state.lock().expect("inbox poisoned");
        if s.closed {
            return Err(ServiceError::Closed);
        }
        if matches!(cmd, Command::SetGoal { .. }) {
            s.queue.retain(|c| !matches!(c, Command::SetGoal { .. }));
        }
        if s.queue.len() >= self.cap {
            return Err(ServiceError::InboxFull);
        }
        s.queue.push_back(cmd);
        self.ready.notify_all();
        Ok(())
    }

    pub fn drain(&self) -> Vec<Command> {
        self.state.lock().expect("inbox poisoned").queue.drain(..).collect()
    }

    pub fn len(&self) -> usize {
        self.state.lock().expect("inbox poisoned").queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Blocks until a command is queued, the inbox closes, or `deadline`.
    pub fn wait_until(&self, deadline: Instant) {
        let mut s = self.state.lock().expect("inbox poisoned");
        while s.queue.is_empty() && !s.closed {
            let now = Instant::now();
            if now >= deadline {
                return;
            }
            s = self.ready.wait_timeout(s, deadline - now).expect("inbox poisoned").0;
        }
    }

    pub fn close(&self) {
        self.state.lock().expect("inbox poisoned").closed = true;
        self.ready.notify_all();
    }

    pub fn is_closed(&self) -> bool {
        self.state.lock().expect("inbox poisoned").closed
    }
}

/// Everything needed to start a session's planner.
#[derive(Clone, Debug)]
pub struct SessionSpec {
    pub env: Environment,
    pub variant: String,
    pub start: State,
    pub config: PlannerConfig,
    pub metric: Arc<dyn AssistingMetric>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SessionOptions {
    pub snapshot_interval: Duration,
    /// Sleep out the rest of `dt` after each step so the agent moves in
    /// real time.
    pub realtime: bool,
    pub inbox_cap: usize,
}

impl Default for SessionOptions {
    fn default() -> Self {
        SessionOptions { snapshot_interval: Duration::from_millis(100), realtime: true, inbox_cap: 64 }
    }
}

pub struct Session {
    pub id: u64,
    inbox: Arc<Inbox>,
    frames: watch::Receiver<Arc<Frame>>,
    errors: mpsc::UnboundedReceiver<ErrorPayload>,
    thread: Option<JoinHandle<()>>,
}

impl Session {
    /// Builds the planner and starts its thread, paused.
    pub fn start(id: u64, spec: SessionSpec, opts: SessionOptions) -> Result<Session, ServiceError> {
        spec.config.validate()?;
        let variant = VariantRegistry::standard().get(&spec.variant)?.clone();
        let planner = variant.build(spec.env, spec.start, &spec.config, spec.metric)?;
        let inbox = Arc::new(Inbox::new(opts.inbox_cap));
        let (frame_tx, frames) = watch::channel(Arc::new(frame(&planner, true)));
        let (error_tx, errors) = mpsc::unbounded_channel();
        let worker = Worker { planner, paused: true, inbox: inbox.clone(), frames: frame_tx, errors: error_tx, opts };
        let thread = std::thread::Builder::new()
            .name(format!("session-{id}"))
            .spawn(move || worker.run())
            .expect("spawn session thread");
        Ok(Session { id, inbox, frames, errors, thread: Some(thread) })
    }

    pub fn send(&self, cmd: Command) -> Result<(), ServiceError> {
        self.inbox.push(cmd)
    }

    /// Receiver of the newest frame; starts out holding the opening frame.
    pub fn frames(&self) -> watch::Receiver<Arc<Frame>> {
        self.frames.clone()
    }

    /// Next asynchronous command failure.
    pub async fn next_error(&mut self) -> Option<ErrorPayload> {
        self.errors.recv().await
    }

    /// Stops the thread and waits for it.
    pub fn close(mut self) {
        self.inbox.close();
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        // The thread sees the flag at its next boundary and exits.
        self.inbox.close();
    }
}

fn frame(planner: &Planner, paused: bool) -> Frame {
    Frame {
        planner: planner.snapshot(),
        path_nodes: planner.path_nodes().to_vec(),
        obstacles: planner
            .env()
            .dynamic_obstacles()
            .map(|(id, r)| ObstacleView { id: id.0, min: r.min, max: r.max })
            .collect(),
        paused,
    }
}

fn overlaps(a: &Rect, b: &Rect) -> bool {
    (0..2).all(|i| a.min.0[i] <= b.max.0[i] && b.min.0[i] <= a.max.0[i])
}

struct Worker {
    planner: Planner,
    paused: bool,
    inbox: Arc<Inbox>,
    frames: watch::Sender<Arc<Frame>>,
    errors: mpsc::UnboundedSender<ErrorPayload>,
    opts: SessionOptions,
}

impl Worker {
    fn run(mut self) {
        let mut next_tick = Instant::now() + self.opts.snapshot_interval;
        loop {
            if self.inbox.is_closed() || self.frames.is_closed() {
                return;
            }
            let cmds = self.inbox.drain();
            let applied = !cmds.is_empty();
            for c in cmds {
                if let Err(e) = self.apply(c) {
                    let _ = self.errors.send(ErrorPayload { message: e.to_string(), reply_to: Some(c.seq()) });
                }
            }
            if self.paused {
                if !applied {
                    self.inbox.wait_until(next_tick);
                }
            } else {
                let t0 = Instant::now();
                self.planner.step();
                if self.opts.realtime {
                    let dt = Duration::from_secs_f64(self.planner.config().dt);
                    if let Some(rest) = dt.checked_sub(t0.elapsed()) {
                        std::thread::sleep(rest);
                    }
                }
            }
            let now = Instant::now();
            if applied || now >= next_tick {
                self.frames.send_replace(Arc::new(frame(&self.planner, self.paused)));
                next_tick = now + self.opts.snapshot_interval;
            }
        }
    }

    fn apply(&mut self, cmd: Command) -> Result<(), ServiceError> {
        match cmd {
            Command::SetGoal { goal, .. } => self.planner.set_goal(goal)?,
            Command::AddObstacle { rect, .. } => {
                self.planner.add_obstacle(rect)?;
            }
            Command::RemoveObstacle { which: RemoveObstacle::Id { id }, .. } => {
                self.planner.remove_obstacle(ObstacleId(id))?;
            }
            Command::RemoveObstacle { which: RemoveObstacle::Area(area), .. } => {
                let hit: Vec<ObstacleId> =
                    self.planner.env().dynamic_obstacles().filter(|(_, r)| overlaps(r, &area)).map(|(id, _)| id).collect();
                if hit.is_empty() {
                    return Err(ServiceError::NothingToRemove);
                }
                for id in hit {
                    self.planner.remove_obstacle(id)?;
                }
            }
            Command::Pause { .. } => self.paused = true,
            Command::Resume { .. } => self.paused = false,
        }
        Ok(())
    }
}
