//! Bulk-synchronous execution of neighborhood expressions.
//!
//! Each superstep every worker evaluates the expression over its active
//! hosts, publishes the results only after the whole compute phase (so all
//! reads observe the previous superstep), ships changed critical attributes
//! to guest copies, and meets the other workers at a barrier. The global
//! change count reported there decides between neighbor activation (inverse
//! index lookups) and all activation for the next superstep.

mod expr;
mod probe;
mod stats;

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

pub use expr::{
    stream_key, ExprError, ExprResult, IterationMode, IterationPlan, ListExpression, Neighbor,
    NeighborhoodExpression, VertexView,
};
pub use probe::{ConsistencyProbe, Violation};
pub use stats::{ActivationMode, ActivationPolicy, PlanOutcome, SuperstepStats, SyncPolicy};

use crate::ingest::Graph;
use crate::model::{
    value_equal, AttrPos, AttrValue, AttributeSchema, SchemaError, VertexId, VertexValue,
};
use crate::partition::{build_dual_index, build_partitions, Partition, PartitionError, Slot};
use crate::store::{write_segments, AccessRecord, IndexStore, StoreError, StoreMode};
use crate::transport::{
    AuxMessage, BarrierResult, CommStats, ControlMessage, FrameKind, InProcessTransport,
    SyncMessage, Transport, TransportError, DEFAULT_BARRIER_TIMEOUT,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("expression failed at vertex {vertex} in superstep {superstep}: {message}")]
    Expression {
        vertex: VertexId,
        superstep: u32,
        message: String,
    },
    #[error("superstep limit of {0} exceeded")]
    SuperstepLimit(u32),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error(
        "worker {worker} received an update for vertex {vertex}, which is not one of its guests"
    )]
    Misrouted { worker: usize, vertex: VertexId },
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub workers: usize,
    /// Absolute activation threshold; `None` means `n / 50`.
    pub theta: Option<u64>,
    pub activation: ActivationPolicy,
    pub sync: SyncPolicy,
    pub store_mode: StoreMode,
    /// Where disk-mode segment files go; a scratch directory when unset.
    pub store_dir: Option<PathBuf>,
    pub seed: u64,
    pub max_supersteps: Option<u32>,
    pub barrier_timeout: Duration,
    /// Record every disk index read.
    pub audit: bool,
    /// Deliver cross-sender messages in a seeded random order.
    pub shuffle_seed: Option<u64>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            workers: 1,
            theta: None,
            activation: ActivationPolicy::Auto,
            sync: SyncPolicy::Critical,
            store_mode: StoreMode::Memory,
            store_dir: None,
            seed: 0,
            max_supersteps: None,
            barrier_timeout: DEFAULT_BARRIER_TIMEOUT,
            audit: false,
            shuffle_seed: None,
        }
    }
}

pub const DEFAULT_THETA_DENOMINATOR: u64 = 50;

/// Temporary directory removed on drop.
struct ScratchDir(PathBuf);

impl ScratchDir {
    fn create() -> std::io::Result<Self> {
        static COUNTER: AtomicU64 = AtomicU64::new(0);
        let n = COUNTER.fetch_add(1, Ordering::Relaxed);
        let dir = std::env::temp_dir().join(format!("nbexpr-{}-{n}", std::process::id()));
        std::fs::create_dir_all(&dir)?;
        Ok(ScratchDir(dir))
    }
}

impl Drop for ScratchDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

struct Worker {
    part: Partition,
    store: IndexStore,
    /// Per local slot; hosts are authoritative, guests are copies.
    values: Vec<VertexValue>,
    aux: Vec<Vec<u64>>,
}

#[derive(Clone, Copy)]
enum Work<'a> {
    Values(&'a dyn NeighborhoodExpression),
    Lists(&'a dyn ListExpression),
}

struct PlanCtx<'a> {
    transport: &'a dyn Transport,
    schema: &'a AttributeSchema,
    plan: &'a IterationPlan,
    critical: &'a [AttrPos],
    policy: ActivationPolicy,
    theta: u64,
    seed: u64,
    base_superstep: u32,
    plan_index: u32,
    max_supersteps: Option<u32>,
    probe: Option<&'a ConsistencyProbe>,
    comm_base: CommStats,
}

#[derive(Default)]
struct WorkerTrace {
    stats: Vec<SuperstepStats>,
    barriers: Vec<BarrierResult>,
}

pub struct Engine {
    cfg: EngineConfig,
    schema: AttributeSchema,
    n: u64,
    theta: u64,
    workers: Vec<Worker>,
    transport: Arc<dyn Transport>,
    superstep: u32,
    plans: u32,
    stats: Vec<SuperstepStats>,
    barrier_log: Vec<Vec<BarrierResult>>,
    probe: Option<Arc<ConsistencyProbe>>,
    started: bool,
    _scratch: Option<ScratchDir>,
}

impl Engine {
    pub fn build(
        graph: &Graph,
        schema: AttributeSchema,
        cfg: EngineConfig,
    ) -> Result<Self, EngineError> {
        let mut transport =
            InProcessTransport::new(cfg.workers.max(1)).with_timeout(cfg.barrier_timeout);
        if let Some(seed) = cfg.shuffle_seed {
            transport = transport.with_shuffle(seed);
        }
        Self::with_transport(graph, schema, cfg, Arc::new(transport))
    }

    pub fn with_transport(
        graph: &Graph,
        schema: AttributeSchema,
        cfg: EngineConfig,
        transport: Arc<dyn Transport>,
    ) -> Result<Self, EngineError> {
        if cfg.workers == 0 {
            return Err(PartitionError::NoWorkers.into());
        }
        if transport.workers() != cfg.workers {
            return Err(EngineError::Config(format!(
                "transport routes {} workers, config asks for {}",
                transport.workers(),
                cfg.workers
            )));
        }
        let parts = build_partitions(graph, cfg.workers)?;
        let mut scratch = None;
        let dir = match (&cfg.store_mode, &cfg.store_dir) {
            (StoreMode::Disk, Some(d)) => Some(d.clone()),
            (StoreMode::Disk, None) => {
                let s = ScratchDir::create().map_err(|source| StoreError::Io {
                    path: std::env::temp_dir(),
                    source,
                })?;
                let d = s.0.clone();
                scratch = Some(s);
                Some(d)
            }
            (StoreMode::Memory, _) => None,
        };
        let mut workers = Vec::with_capacity(parts.len());
        for part in parts {
            let idx = build_dual_index(&part, graph)?;
            let mut store = match &dir {
                Some(d) => {
                    let paths = write_segments(part.worker, &idx, d)?;
                    IndexStore::open(&paths)?
                }
                None => IndexStore::in_memory(idx),
            };
            store.set_mode(cfg.store_mode)?;
            store.set_audit(cfg.audit);
            workers.push(Worker {
                values: vec![schema.default_value(); part.len()],
                aux: vec![Vec::new(); part.len()],
                part,
                store,
            });
        }
        let n = graph.n() as u64;
        Ok(Engine {
            theta: cfg.theta.unwrap_or(n / DEFAULT_THETA_DENOMINATOR),
            barrier_log: vec![Vec::new(); cfg.workers],
            cfg,
            schema,
            n,
            workers,
            transport,
            superstep: 0,
            plans: 0,
            stats: Vec::new(),
            probe: None,
            started: false,
            _scratch: scratch,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn num_vertices(&self) -> u64 {
        self.n
    }

    pub fn theta(&self) -> u64 {
        self.theta
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.workers
            .iter()
            .any(|w| w.part.slot(v).is_some_and(|s| w.part.is_host(s)))
    }

    pub fn partitions(&self) -> impl Iterator<Item = &Partition> {
        self.workers.iter().map(|w| &w.part)
    }

    /// Total supersteps executed so far, across plans.
    pub fn supersteps(&self) -> u32 {
        self.superstep
    }

    pub fn stats(&self) -> &[SuperstepStats] {
        &self.stats
    }

    /// Barrier results as observed by each worker.
    pub fn barrier_log(&self) -> &[Vec<BarrierResult>] {
        &self.barrier_log
    }

    pub fn comm_stats(&self) -> CommStats {
        self.transport.comm_stats()
    }

    pub fn set_probe(&mut self, probe: Arc<ConsistencyProbe>) {
        self.probe = Some(probe);
    }

    pub fn access_logs(&self) -> Vec<&[AccessRecord]> {
        self.workers.iter().map(|w| w.store.access_log()).collect()
    }

    /// `(peak resident index bytes, disk-mode bound)` per worker.
    pub fn index_residency(&self) -> Vec<(usize, Option<usize>)> {
        self.workers
            .iter()
            .map(|w| (w.store.peak_resident_bytes(), w.store.disk_resident_bound()))
            .collect()
    }

    /// Host values ascending by id.
    pub fn host_values(&self) -> Vec<(VertexId, VertexValue)> {
        let mut out: Vec<(VertexId, VertexValue)> = self
            .workers
            .iter()
            .flat_map(|w| {
                w.part
                    .hosts()
                    .iter()
                    .map(|&s| (w.part.id(s), w.values[s as usize].clone()))
            })
            .collect();
        out.sort_by_key(|(id, _)| *id);
        out
    }

    /// Every local copy on one worker: `(id, is_host, value)`.
    pub fn local_values(&self, worker: usize) -> Vec<(VertexId, bool, VertexValue)> {
        let w = &self.workers[worker];
        (0..w.part.len() as Slot)
            .map(|s| {
                (
                    w.part.id(s),
                    w.part.is_host(s),
                    w.values[s as usize].clone(),
                )
            })
            .collect()
    }

    pub fn init(&mut self, ne: &dyn NeighborhoodExpression) -> Result<PlanOutcome, EngineError> {
        self.run_plan(&IterationPlan::init(), ne)
    }

    pub fn run_plan(
        &mut self,
        plan: &IterationPlan,
        ne: &dyn NeighborhoodExpression,
    ) -> Result<PlanOutcome, EngineError> {
        self.execute(plan, Work::Values(ne))
    }

    /// One superstep computing an auxiliary id list per host, exchanged with
    /// guests and visible through [`Neighbor::aux`] afterwards.
    pub fn run_lists(&mut self, f: &dyn ListExpression) -> Result<PlanOutcome, EngineError> {
        self.execute(
            &IterationPlan::fixed(1, crate::partition::AccessMode::All),
            Work::Lists(f),
        )
    }

    fn execute(
        &mut self,
        plan: &IterationPlan,
        work: Work<'_>,
    ) -> Result<PlanOutcome, EngineError> {
        if let IterationMode::Fixed(0) = plan.mode {
            return Err(EngineError::Config(
                "fixed iteration count must be at least 1".into(),
            ));
        }
        for &p in &plan.critical {
            self.schema.check(p)?;
        }
        let plan_index = self.plans;
        self.plans += 1;
        if self.n == 0 {
            return Ok(PlanOutcome {
                supersteps: 0,
                n_change: Vec::new(),
            });
        }
        if !self.started {
            for w in &mut self.workers {
                w.store.start();
            }
            self.started = true;
        }
        let critical = if self.cfg.sync == SyncPolicy::Full || plan.critical.is_empty() {
            self.schema.all_positions()
        } else {
            plan.critical.clone()
        };
        let ctx = PlanCtx {
            transport: self.transport.as_ref(),
            schema: &self.schema,
            plan,
            critical: &critical,
            policy: self.cfg.activation,
            theta: self.theta,
            seed: self.cfg.seed,
            base_superstep: self.superstep,
            plan_index,
            max_supersteps: self.cfg.max_supersteps,
            probe: self.probe.as_deref(),
            comm_base: self.transport.comm_stats(),
        };

        let results: Vec<Result<WorkerTrace, EngineError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = self
                .workers
                .iter_mut()
                .map(|w| {
                    let ctx = &ctx;
                    scope.spawn(move || {
                        let r = run_worker(w, ctx, work);
                        if let Err(e) = &r {
                            ctx.transport.abort(&e.to_string());
                        }
                        r
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker thread panicked"))
                .collect()
        });

        let mut traces = Vec::with_capacity(results.len());
        let mut first_err = None;
        for r in results {
            match r {
                Ok(t) => traces.push(t),
                Err(EngineError::Transport(TransportError::Aborted(_))) if first_err.is_some() => {}
                Err(e @ EngineError::Transport(TransportError::Aborted(_))) => {
                    first_err.get_or_insert(e);
                }
                Err(e) => {
                    // prefer the root cause over the abort it triggered elsewhere
                    if matches!(
                        first_err,
                        None | Some(EngineError::Transport(TransportError::Aborted(_)))
                    ) {
                        first_err = Some(e);
                    }
                }
            }
        }
        if let Some(e) = first_err {
            return Err(e);
        }
        let lead = &traces[0];
        let outcome = PlanOutcome {
            supersteps: lead.stats.len() as u32,
            n_change: lead.stats.iter().map(|s| s.n_change).collect(),
        };
        self.superstep += outcome.supersteps;
        self.stats.extend(lead.stats.iter().cloned());
        for (log, t) in self.barrier_log.iter_mut().zip(&traces) {
            log.extend(t.barriers.iter().copied());
        }
        Ok(outcome)
    }
}

fn expr_error(part: &Partition, slot: Slot, superstep: u32, message: String) -> EngineError {
    EngineError::Expression {
        vertex: part.id(slot),
        superstep,
        message,
    }
}

fn run_worker(
    w: &mut Worker,
    ctx: &PlanCtx<'_>,
    work: Work<'_>,
) -> Result<WorkerTrace, EngineError> {
    let me = w.part.worker;
    let mut trace = WorkerTrace::default();
    let mut active: Vec<Slot> = w.part.hosts().to_vec();
    let mut mode = ActivationMode::Start;
    let mut prev_bytes = ctx.comm_base.bytes_data;
    let mut step = 0u32;

    loop {
        if let IterationMode::Fixed(n) = ctx.plan.mode {
            if step >= n {
                break;
            }
        }
        let superstep = ctx.base_superstep + step + 1;
        if ctx.max_supersteps.is_some_and(|max| superstep > max) {
            return Err(EngineError::SuperstepLimit(ctx.max_supersteps.unwrap()));
        }
        let started = Instant::now();
        w.store.begin_superstep(superstep);

        // compute: results stay in a shadow list until every active vertex ran
        let mut value_updates: Vec<(Slot, VertexValue)> = Vec::new();
        let mut list_updates: Vec<(Slot, Vec<u64>)> = Vec::new();
        for &v in &active {
            let neighbors = w.store.neighbors_at(v, ctx.plan.access)?;
            let view = VertexView {
                slot: v,
                part: &w.part,
                values: &w.values,
                aux: &w.aux,
                neighbors,
                superstep,
                seed: ctx.seed,
            };
            match work {
                Work::Values(ne) => {
                    let out = ne
                        .evaluate(&view)
                        .map_err(|e| expr_error(&w.part, v, superstep, e.0))?;
                    if let Some(new) = out {
                        ctx.schema
                            .value(new.slots().to_vec())
                            .map_err(|e| expr_error(&w.part, v, superstep, e.to_string()))?;
                        if new != w.values[v as usize] {
                            value_updates.push((v, new));
                        }
                    }
                }
                Work::Lists(f) => {
                    let list = f
                        .evaluate(&view)
                        .map_err(|e| expr_error(&w.part, v, superstep, e.0))?;
                    if list != w.aux[v as usize] {
                        list_updates.push((v, list));
                    }
                }
            }
        }

        // publish
        let mut changed: Vec<Slot> = Vec::new();
        for (v, new) in value_updates {
            let old = std::mem::replace(&mut w.values[v as usize], new);
            if !value_equal(&old, &w.values[v as usize], ctx.critical)? {
                changed.push(v);
            }
        }
        for (v, list) in list_updates {
            w.aux[v as usize] = list;
            changed.push(v);
        }

        // sync changed hosts to their guests
        for &v in &changed {
            let vertex = w.part.id(v);
            match work {
                Work::Values(_) => {
                    let value = &w.values[v as usize];
                    let payload = ctx
                        .critical
                        .iter()
                        .map(|&p| value.get(p).map(|x| (p, x)))
                        .collect::<Result<Vec<_>, _>>()?;
                    for &target in w.part.guest_workers(v) {
                        ctx.transport.send_sync(
                            me,
                            &SyncMessage {
                                target,
                                vertex,
                                payload: payload.clone(),
                            },
                        )?;
                    }
                }
                Work::Lists(_) => {
                    for &target in w.part.guest_workers(v) {
                        ctx.transport.send_aux(
                            me,
                            &AuxMessage {
                                target,
                                vertex,
                                entries: w.aux[v as usize].clone(),
                            },
                        )?;
                    }
                }
            }
        }

        let report = ControlMessage::report(superstep, changed.len() as u64, active.len() as u64);
        let res = ctx.transport.barrier(me, report)?;

        // apply guest updates delivered at the barrier
        let mut touched: Vec<Slot> = Vec::new();
        for frame in ctx.transport.take_inbox(me) {
            let (vertex, slot) = match frame.kind {
                FrameKind::Sync => {
                    let msg = SyncMessage::decode(me, &frame.bytes, ctx.schema)?;
                    let slot = guest_slot(&w.part, msg.vertex)?;
                    for (p, x) in msg.payload {
                        w.values[slot as usize].set(p, x)?;
                    }
                    (msg.vertex, slot)
                }
                FrameKind::Aux => {
                    let msg = AuxMessage::decode(me, &frame.bytes)?;
                    let slot = guest_slot(&w.part, msg.vertex)?;
                    w.aux[slot as usize] = msg.entries;
                    (msg.vertex, slot)
                }
            };
            debug_assert_eq!(w.part.id(slot), vertex);
            touched.push(slot);
        }

        let (next_mode, next_active) = next_active_set(
            w,
            &changed,
            &touched,
            res.n_change_total,
            ctx.policy,
            ctx.theta,
        )?;

        if let Some(probe) = ctx.probe {
            // synchronized attributes, then the exchanged auxiliary list
            let pick = |s: Slot| -> Vec<_> {
                ctx.critical
                    .iter()
                    .map(|&p| w.values[s as usize].get(p).expect("validated position"))
                    .chain(w.aux[s as usize].iter().map(|&x| AttrValue::Int(x as i64)))
                    .collect()
            };
            let hosts = w
                .part
                .hosts()
                .iter()
                .map(|&s| (w.part.id(s), pick(s)))
                .collect();
            let guests = w.part.guests().map(|s| (w.part.id(s), pick(s))).collect();
            probe.record(superstep, me, hosts, guests);
        }

        trace.barriers.push(res);
        trace.stats.push(SuperstepStats {
            superstep,
            plan: ctx.plan_index,
            n_change: res.n_change_total,
            active_count: res.active_total,
            activation_mode_used: mode,
            bytes_data_delta: res.comm.bytes_data - prev_bytes,
            wall_time: started.elapsed(),
        });
        prev_bytes = res.comm.bytes_data;
        active = next_active;
        mode = next_mode;
        step += 1;

        if ctx.plan.mode == IterationMode::UntilQuiescent && res.n_change_total == 0 {
            break;
        }
    }
    Ok(trace)
}

fn guest_slot(part: &Partition, vertex: VertexId) -> Result<Slot, EngineError> {
    part.slot(vertex)
        .filter(|&s| !part.is_host(s))
        .ok_or(EngineError::Misrouted {
            worker: part.worker,
            vertex,
        })
}

/// Chooses the activation mode from the global change count and builds the
/// next local active set.
fn next_active_set(
    w: &mut Worker,
    changed: &[Slot],
    touched_guests: &[Slot],
    n_change_total: u64,
    policy: ActivationPolicy,
    theta: u64,
) -> Result<(ActivationMode, Vec<Slot>), EngineError> {
    let mode = match policy {
        ActivationPolicy::Auto if n_change_total < theta => ActivationMode::Neighbor,
        ActivationPolicy::Auto | ActivationPolicy::All => ActivationMode::All,
        ActivationPolicy::Neighbor => ActivationMode::Neighbor,
    };
    if n_change_total == 0 {
        return Ok((mode, Vec::new()));
    }
    if mode == ActivationMode::All {
        return Ok((mode, w.part.hosts().to_vec()));
    }
    let mut next: Vec<Slot> = changed.to_vec();
    for &x in changed.iter().chain(touched_guests) {
        next.extend(w.store.inverse_at(x)?);
    }
    next.sort_unstable();
    next.dedup();
    Ok((mode, next))
}
