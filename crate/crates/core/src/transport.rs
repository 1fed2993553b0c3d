//! Worker-to-worker messaging with exact byte accounting.
//!
//! Wire encodings (little-endian, fixed width):
//!
//! * sync: `vertex u64 | count u8 | count x (position u8 | value 8 bytes)`
//! * aux list: `vertex u64 | count u32 | count x entry u64`
//! * control: `kind u8 | superstep u32 | n_change u64 | active u64 | flag u8`
//!
//! `bytes_data` counts sync and aux frames that cross a worker boundary;
//! control frames are tallied separately in `bytes_control`.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::model::{AttrPos, AttrValue, AttributeSchema, VertexId};
use crate::partition::WorkerId;

pub const DEFAULT_BARRIER_TIMEOUT: Duration = Duration::from_secs(60);
pub const CONTROL_FRAME_LEN: u64 = 22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("no route to worker {0}")]
    UnknownWorker(WorkerId),
    #[error("barrier for superstep {superstep} timed out after {timeout:?} ({arrived} of {expected} workers arrived)")]
    BarrierTimeout {
        superstep: u32,
        arrived: usize,
        expected: usize,
        timeout: Duration,
    },
    #[error("worker {worker} reported superstep {got}, barrier is at {expected}")]
    SuperstepMismatch {
        worker: WorkerId,
        got: u32,
        expected: u32,
    },
    #[error("run aborted: {0}")]
    Aborted(String),
    #[error("malformed frame: {0}")]
    Malformed(String),
}

/// Host-to-guest update carrying the synchronized attribute slots.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncMessage {
    pub target: WorkerId,
    pub vertex: VertexId,
    /// Ascending positions with their values.
    pub payload: Vec<(AttrPos, AttrValue)>,
}

impl SyncMessage {
    pub fn encoded_len(payload_entries: usize) -> u64 {
        9 + 9 * payload_entries as u64
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::encoded_len(self.payload.len()) as usize);
        out.extend_from_slice(&self.vertex.to_le_bytes());
        out.push(self.payload.len() as u8);
        for (pos, value) in &self.payload {
            out.push(*pos as u8);
            out.extend_from_slice(&value.to_bits().to_le_bytes());
        }
        out
    }

    pub fn decode(
        target: WorkerId,
        bytes: &[u8],
        schema: &AttributeSchema,
    ) -> Result<SyncMessage, TransportError> {
        let bad = |m: &str| TransportError::Malformed(m.into());
        if bytes.len() < 9 {
            return Err(bad("sync frame shorter than header"));
        }
        let vertex = u64::from_le_bytes(bytes[0..8].try_into().unwrap());
        let count = bytes[8] as usize;
        if bytes.len() as u64 != Self::encoded_len(count) {
            return Err(bad("sync frame length disagrees with entry count"));
        }
        let mut payload = Vec::with_capacity(count);
        let mut last = 0;
        for entry in bytes[9..].chunks_exact(9) {
            let pos = entry[0] as AttrPos;
            if pos <= last {
                return Err(bad("payload positions not strictly ascending"));
            }
            last = pos;
            let kind = schema.kind(pos).map_err(|e| bad(&e.to_string()))?;
            let bits = u64::from_le_bytes(entry[1..9].try_into().unwrap());
            payload.push((pos, AttrValue::from_bits(kind, bits)));
        }
        Ok(SyncMessage {
            target,
            vertex,
            payload,
        })
    }
}

/// Auxiliary id-list payload (used for neighbor-set exchange).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxMessage {
    pub target: WorkerId,
    pub vertex: VertexId,
    pub entries: Vec<u64>,
}

impl AuxMessage {
    pub fn encoded_len(entries: usize) -> u64 {
        12 + 8 * entries as u64
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::encoded_len(self.entries.len()) as usize);
        out.extend_from_slice(&self.vertex.to_le_bytes());
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for e in &self.entries {
            out.extend_from_slice(&e.to_le_bytes());
        }
        out
    }

    pub fn decode(target: WorkerId, bytes: &[u8]) -> Result<AuxMessage, TransportError> {
        if bytes.len() < 12 {
            return Err(TransportError::Malformed(
                "aux frame shorter than header".into(),
            ));
        }
        let vertex = u64::from_le_bytes(bytes[0..8].try_into().unwrap());
        let count = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        if bytes.len() as u64 != Self::encoded_len(count) {
            return Err(TransportError::Malformed(
                "aux frame length mismatch".into(),
            ));
        }
        let entries = bytes[12..]
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(AuxMessage {
            target,
            vertex,
            entries,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlKind {
    BarrierReport,
    BarrierRelease,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlMessage {
    pub kind: ControlKind,
    pub superstep: u32,
    pub n_change_local: u64,
    pub active_local: u64,
    pub activated_any: bool,
}

impl ControlMessage {
    pub fn report(superstep: u32, n_change_local: u64, active_local: u64) -> Self {
        ControlMessage {
            kind: ControlKind::BarrierReport,
            superstep,
            n_change_local,
            active_local,
            activated_any: n_change_local > 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CommStats {
    pub bytes_data: u64,
    pub bytes_control: u64,
    pub messages: u64,
}

/// Global aggregates released to every worker at a barrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BarrierResult {
    pub superstep: u32,
    pub n_change_total: u64,
    pub active_total: u64,
    pub any_active: bool,
    /// Counters as of the moment the barrier released.
    pub comm: CommStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Sync,
    Aux,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub kind: FrameKind,
    pub from: WorkerId,
    pub bytes: Vec<u8>,
}

/// Messaging contract between workers.
///
/// Frames sent during superstep `i` become readable through [`Transport::take_inbox`]
/// once the barrier of superstep `i` returns, and not before.
pub trait Transport: Send + Sync {
    fn workers(&self) -> usize;

    fn send(&self, from: WorkerId, to: WorkerId, frame: Frame) -> Result<(), TransportError>;

    fn barrier(
        &self,
        worker: WorkerId,
        report: ControlMessage,
    ) -> Result<BarrierResult, TransportError>;

    fn take_inbox(&self, worker: WorkerId) -> Vec<Frame>;

    fn comm_stats(&self) -> CommStats;

    /// Wakes every waiter with an error; used when one worker fails.
    fn abort(&self, reason: &str);

    fn send_sync(&self, from: WorkerId, msg: &SyncMessage) -> Result<(), TransportError> {
        let frame = Frame {
            kind: FrameKind::Sync,
            from,
            bytes: msg.encode(),
        };
        self.send(from, msg.target, frame)
    }

    fn send_aux(&self, from: WorkerId, msg: &AuxMessage) -> Result<(), TransportError> {
        let frame = Frame {
            kind: FrameKind::Aux,
            from,
            bytes: msg.encode(),
        };
        self.send(from, msg.target, frame)
    }
}

#[derive(Debug, Default)]
struct BarrierState {
    generation: u64,
    arrived: usize,
    superstep: u32,
    n_change: u64,
    active: u64,
    any_active: bool,
    released: Option<BarrierResult>,
}

/// In-process transport: per-receiver mailboxes, double-buffered by superstep.
pub struct InProcessTransport {
    k: usize,
    pending: Vec<Mutex<Vec<Frame>>>,
    ready: Vec<Mutex<Vec<Frame>>>,
    bytes_data: AtomicU64,
    bytes_control: AtomicU64,
    messages: AtomicU64,
    state: Mutex<BarrierState>,
    released: Condvar,
    aborted: AtomicBool,
    abort_reason: Mutex<String>,
    timeout: Duration,
    shuffle: Option<Mutex<ChaCha8Rng>>,
}

impl InProcessTransport {
    pub fn new(k: usize) -> Self {
        InProcessTransport {
            k,
            pending: (0..k).map(|_| Mutex::new(Vec::new())).collect(),
            ready: (0..k).map(|_| Mutex::new(Vec::new())).collect(),
            bytes_data: AtomicU64::new(0),
            bytes_control: AtomicU64::new(0),
            messages: AtomicU64::new(0),
            state: Mutex::new(BarrierState::default()),
            released: Condvar::new(),
            aborted: AtomicBool::new(false),
            abort_reason: Mutex::new(String::new()),
            timeout: DEFAULT_BARRIER_TIMEOUT,
            shuffle: None,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Interleaves frames from different senders in a seeded random order on
    /// delivery, keeping each sender's own order intact.
    pub fn with_shuffle(mut self, seed: u64) -> Self {
        self.shuffle = Some(Mutex::new(ChaCha8Rng::seed_from_u64(seed)));
        self
    }

    fn aborted_error(&self) -> TransportError {
        TransportError::Aborted(self.abort_reason.lock().unwrap().clone())
    }

    fn deliver(&self) {
        for w in 0..self.k {
            let mut frames = std::mem::take(&mut *self.pending[w].lock().unwrap());
            if let Some(rng) = &self.shuffle {
                frames = interleave(frames, &mut rng.lock().unwrap());
            }
            self.ready[w].lock().unwrap().extend(frames);
        }
    }
}

/// Random merge of per-sender queues.
fn interleave(frames: Vec<Frame>, rng: &mut ChaCha8Rng) -> Vec<Frame> {
    let mut senders: Vec<WorkerId> = frames.iter().map(|f| f.from).collect();
    senders.shuffle(rng);
    let mut queues: std::collections::BTreeMap<WorkerId, std::collections::VecDeque<Frame>> =
        Default::default();
    for f in frames {
        queues.entry(f.from).or_default().push_back(f);
    }
    senders
        .into_iter()
        .map(|s| queues.get_mut(&s).unwrap().pop_front().unwrap())
        .collect()
}

impl Transport for InProcessTransport {
    fn workers(&self) -> usize {
        self.k
    }

    fn send(&self, from: WorkerId, to: WorkerId, frame: Frame) -> Result<(), TransportError> {
        if to >= self.k {
            return Err(TransportError::UnknownWorker(to));
        }
        if from >= self.k {
            return Err(TransportError::UnknownWorker(from));
        }
        if to != from {
            self.bytes_data
                .fetch_add(frame.bytes.len() as u64, Ordering::Relaxed);
            self.messages.fetch_add(1, Ordering::Relaxed);
        }
        self.pending[to].lock().unwrap().push(frame);
        Ok(())
    }

    fn barrier(
        &self,
        worker: WorkerId,
        report: ControlMessage,
    ) -> Result<BarrierResult, TransportError> {
        if worker >= self.k {
            return Err(TransportError::UnknownWorker(worker));
        }
        let mut st = self.state.lock().unwrap();
        if self.aborted.load(Ordering::SeqCst) {
            return Err(self.aborted_error());
        }
        if st.arrived == 0 {
            st.superstep = report.superstep;
        } else if st.superstep != report.superstep {
            let err = TransportError::SuperstepMismatch {
                worker,
                got: report.superstep,
                expected: st.superstep,
            };
            drop(st);
            self.abort(&err.to_string());
            return Err(err);
        }
        st.arrived += 1;
        st.n_change += report.n_change_local;
        st.active += report.active_local;
        st.any_active |= report.activated_any;

        if st.arrived == self.k {
            self.deliver();
            self.bytes_control
                .fetch_add(2 * CONTROL_FRAME_LEN * self.k as u64, Ordering::Relaxed);
            let result = BarrierResult {
                superstep: st.superstep,
                n_change_total: st.n_change,
                active_total: st.active,
                any_active: st.any_active,
                comm: self.comm_stats(),
            };
            st.arrived = 0;
            st.n_change = 0;
            st.active = 0;
            st.any_active = false;
            st.released = Some(result);
            st.generation += 1;
            self.released.notify_all();
            return Ok(result);
        }

        let generation = st.generation;
        let deadline = Instant::now() + self.timeout;
        loop {
            let now = Instant::now();
            if now >= deadline {
                let err = TransportError::BarrierTimeout {
                    superstep: st.superstep,
                    arrived: st.arrived,
                    expected: self.k,
                    timeout: self.timeout,
                };
                drop(st);
                self.abort(&err.to_string());
                return Err(err);
            }
            let (guard, _) = self.released.wait_timeout(st, deadline - now).unwrap();
            st = guard;
            if st.generation != generation {
                return Ok(st.released.expect("released result"));
            }
            if self.aborted.load(Ordering::SeqCst) {
                return Err(self.aborted_error());
            }
        }
    }

    fn take_inbox(&self, worker: WorkerId) -> Vec<Frame> {
        std::mem::take(&mut *self.ready[worker].lock().unwrap())
    }

    fn comm_stats(&self) -> CommStats {
        CommStats {
            bytes_data: self.bytes_data.load(Ordering::Relaxed),
            bytes_control: self.bytes_control.load(Ordering::Relaxed),
            messages: self.messages.load(Ordering::Relaxed),
        }
    }

    fn abort(&self, reason: &str) {
        {
            let mut r = self.abort_reason.lock().unwrap();
            if r.is_empty() {
                *r = reason.to_owned();
            }
        }
        self.aborted.store(true, Ordering::SeqCst);
        let _st = self.state.lock().unwrap();
        self.released.notify_all();
    }
}
