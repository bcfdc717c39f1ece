//! Wire format. Every frame is one JSON text message
//! `{"kind": "...", "seq": n, "payload": {...}}`; states are `[x, y]` in
//! meters.

use amrrt_core::planner::{PlannerConfig, PlannerSnapshot, Stats};
use amrrt_core::tree::NodeId;
use amrrt_core::{Rect, State};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Hello,
    SetGoal,
    AddObstacle,
    RemoveObstacle,
    Pause,
    Resume,
    Snapshot,
    Error,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::Hello,
        Kind::SetGoal,
        Kind::AddObstacle,
        Kind::RemoveObstacle,
        Kind::Pause,
        Kind::Resume,
        Kind::Snapshot,
        Kind::Error,
    ];
}

/// Client request that opens a session. Every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Open {
    /// Fixture id, see `GET /maps`.
    pub map: Option<String>,
    pub variant: Option<String>,
    pub start: Option<State>,
    /// Missing fields take the server's defaults.
    pub config: Option<PlannerConfig>,
}

/// Server reply once a session is running.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Welcome {
    pub session: u64,
    pub map: String,
    pub variant: String,
    pub width: f64,
    pub height: f64,
    pub cell_size: f64,
    pub start: State,
    pub config: PlannerConfig,
}

/// `hello` goes both ways: the client opens, the server welcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Hello {
    Welcome(Welcome),
    Open(Open),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetGoal {
    pub goal: State,
}

/// Removes one obstacle by id, or every dynamic obstacle overlapping an
/// area.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RemoveObstacle {
    Id { id: u64 },
    Area(Rect),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstacleView {
    pub id: u64,
    pub min: State,
    pub max: State,
}

/// Tree arrays indexed alike. `parents[root]` is null, a null cost is +∞.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TreeView {
    pub root: u32,
    pub positions: Vec<State>,
    pub parents: Vec<Option<u32>>,
    pub costs: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub agent: State,
    pub goal: Option<State>,
    pub path: Vec<State>,
    /// Possibly subsampled; `stats.size` is always the full node count.
    pub tree: TreeView,
    pub stats: Stats,
    pub obstacles: Vec<ObstacleView>,
    pub paused: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorPayload {
    pub message: String,
    /// `seq` of the offending client message, when it could be read.
    pub reply_to: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Body {
    Hello(Hello),
    SetGoal(SetGoal),
    AddObstacle(Rect),
    RemoveObstacle(RemoveObstacle),
    Pause,
    Resume,
    Snapshot(Box<Snapshot>),
    Error(ErrorPayload),
}

impl Body {
    pub fn kind(&self) -> Kind {
        match self {
            Body::Hello(_) => Kind::Hello,
            Body::SetGoal(_) => Kind::SetGoal,
            Body::AddObstacle(_) => Kind::AddObstacle,
            Body::RemoveObstacle(_) => Kind::RemoveObstacle,
            Body::Pause => Kind::Pause,
            Body::Resume => Kind::Resume,
            Body::Snapshot(_) => Kind::Snapshot,
            Body::Error(_) => Kind::Error,
        }
    }

    pub fn error(message: impl Into<String>, reply_to: Option<u64>) -> Body {
        Body::Error(ErrorPayload { message: message.into(), reply_to })
    }
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("malformed message: {0}")]
    Envelope(serde_json::Error),
    #[error("malformed {kind:?} payload: {source}")]
    Payload {
        kind: Kind,
        seq: u64,
        #[source]
        source: serde_json::Error,
    },
    #[error("{kind:?} takes no payload")]
    UnexpectedPayload { kind: Kind, seq: u64 },
}

impl ProtocolError {
    /// Sequence number of the offending message, if the envelope parsed.
    pub fn seq(&self) -> Option<u64> {
        match self {
            ProtocolError::Envelope(_) => None,
            ProtocolError::Payload { seq, .. } | ProtocolError::UnexpectedPayload { seq, .. } => Some(*seq),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Envelope", into = "Envelope")]
pub struct Message {
    pub seq: u64,
    pub body: Body,
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    kind: Kind,
    seq: u64,
    #[serde(default)]
    payload: Value,
}

impl Message {
    pub fn new(seq: u64, body: Body) -> Self {
        Message { seq, body }
    }

    pub fn kind(&self) -> Kind {
        self.body.kind()
    }

    pub fn encode(&self) -> String {
        serde_json::to_string(self).expect("messages always serialize")
    }

    pub fn decode(text: &str) -> Result<Message, ProtocolError> {
        let env: Envelope = serde_json::from_str(text).map_err(ProtocolError::Envelope)?;
        Message::try_from(env)
    }
}

impl TryFrom<Envelope> for Message {
    type Error = ProtocolError;

    fn try_from(e: Envelope) -> Result<Self, ProtocolError> {
        let (kind, seq) = (e.kind, e.seq);
        fn parse<T: serde::de::DeserializeOwned>(kind: Kind, seq: u64, v: Value) -> Result<T, ProtocolError> {
            serde_json::from_value(v).map_err(|source| ProtocolError::Payload { kind, seq, source })
        }
        let empty = |v: &Value| v.is_null() || v.as_object().is_some_and(|o| o.is_empty());
        let body = match kind {
            Kind::Hello => Body::Hello(if e.payload.is_null() {
                Hello::Open(Open::default())
            } else {
                parse(kind, seq, e.payload)?
            }),
            Kind::SetGoal => Body::SetGoal(parse(kind, seq, e.payload)?),
            Kind::AddObstacle => Body::AddObstacle(parse(kind, seq, e.payload)?),
            Kind::RemoveObstacle => Body::RemoveObstacle(parse(kind, seq, e.payload)?),
            Kind::Pause | Kind::Resume if !empty(&e.payload) => {
                return Err(ProtocolError::UnexpectedPayload { kind, seq })
            }
            Kind::Pause => Body::Pause,
            Kind::Resume => Body::Resume,
            Kind::Snapshot => Body::Snapshot(Box::new(parse(kind, seq, e.payload)?)),
            Kind::Error => Body::Error(parse(kind, seq, e.payload)?),
        };
        Ok(Message { seq, body })
    }
}

impl From<Message> for Envelope {
    fn from(m: Message) -> Self {
        let kind = m.kind();
        let to = |v: Result<Value, serde_json::Error>| v.expect("payloads always serialize");
        let payload = match m.body {
            Body::Hello(h) => to(serde_json::to_value(h)),
            Body::SetGoal(g) => to(serde_json::to_value(g)),
            Body::AddObstacle(r) => to(serde_json::to_value(r)),
            Body::RemoveObstacle(r) => to(serde_json::to_value(r)),
            Body::Pause | Body::Resume => Value::Object(Default::default()),
            Body::Snapshot(s) => to(serde_json::to_value(*s)),
            Body::Error(e) => to(serde_json::to_value(e)),
        };
        Envelope { kind, seq: m.seq, payload }
    }
}

/// The copy a session publishes between iterations; turned into a
/// [`Snapshot`] by the connection, off the planner thread.
#[derive(Clone, Debug)]
pub struct Frame {
    pub planner: PlannerSnapshot,
    pub path_nodes: Vec<NodeId>,
    pub obstacles: Vec<ObstacleView>,
    pub paused: bool,
}

impl Frame {
    /// At most `cap` tree nodes, sampled at a uniform stride. The root and
    /// the path are always kept, so the cap is exceeded only by a path
    /// longer than it. A kept node's parent becomes its nearest kept
    /// ancestor.
    pub fn to_snapshot(&self, cap: usize) -> Snapshot {
        let t = &self.planner.tree;
        let n = t.positions.len();
        let tree = if n <= cap {
            TreeView {
                root: t.root,
                positions: t.positions.clone(),
                parents: t.parents.clone(),
                costs: t.costs.clone(),
            }
        } else {
            subsample(self, cap)
        };
        Snapshot {
            agent: self.planner.agent,
            goal: self.planner.goal,
            path: self.planner.path.clone(),
            tree,
            stats: self.planner.stats.clone(),
            obstacles: self.obstacles.clone(),
            paused: self.paused,
        }
    }
}

fn subsample(frame: &Frame, cap: usize) -> TreeView {
    let t = &frame.planner.tree;
    let n = t.positions.len();
    let mut kept = vec![false; n];
    kept[t.root as usize] = true;
    for p in &frame.path_nodes {
        if p.index() < n {
            kept[p.index()] = true;
        }
    }
    let rest: Vec<usize> = (0..n).filter(|&i| !kept[i]).collect();
    let must = n - rest.len();
    let budget = cap.saturating_sub(must).min(rest.len());
    for j in 0..budget {
        kept[rest[j * rest.len() / budget]] = true;
    }

    // Nearest kept proper ancestor, memoised along each walk.
    const UNKNOWN: u32 = u32::MAX;
    let mut anc = vec![UNKNOWN; n];
    let mut walk = Vec::new();
    for i in 0..n {
        let mut v = i;
        while let Some(p) = t.parents[v].map(|p| p as usize) {
            if kept[p] {
                anc[v] = p as u32;
                break;
            }
            if anc[p] != UNKNOWN {
                anc[v] = anc[p];
                break;
            }
            walk.push(v);
            v = p;
        }
        let found = anc[v];
        for w in walk.drain(..) {
            anc[w] = found;
        }
    }

    let mut remap = vec![UNKNOWN; n];
    let mut view = TreeView::default();
    for i in (0..n).filter(|&i| kept[i]) {
        remap[i] = view.positions.len() as u32;
        view.positions.push(t.positions[i]);
        view.costs.push(t.costs[i]);
    }
    for i in (0..n).filter(|&i| kept[i]) {
        view.parents.push((anc[i] != UNKNOWN).then(|| remap[anc[i] as usize]));
    }
    view.root = remap[t.root as usize];
    view
}
