//! Orchestration behind the command line: ingest, build, execute, dump.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::algorithms::{by_name, AlgoParams, Algorithm};
use crate::engine::{
    ActivationPolicy, Engine, EngineConfig, EngineError, SuperstepStats, SyncPolicy,
    DEFAULT_THETA_DENOMINATOR,
};
use crate::ingest::{ingest, EdgeList, Graph, IngestError};
use crate::model::{AttributeSchema, VertexId, VertexValue};
use crate::oracle::RawGraph;
use crate::store::StoreMode;
use crate::transport::CommStats;
use crate::verify::{check, VerifyError, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INGEST: i32 = 2;
pub const EXIT_RUN: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error("ingest failed: {0}")]
    Ingest(#[from] IngestError),
    #[error("{phase} failed: {source}")]
    Engine {
        phase: &'static str,
        #[source]
        source: EngineError,
    },
    #[error("writing {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("verification could not run: {0}")]
    Verify(#[from] VerifyError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => EXIT_USAGE,
            RunError::Ingest(_) => EXIT_INGEST,
            RunError::Engine { .. } | RunError::Output { .. } => EXIT_RUN,
            RunError::Verify(_) => EXIT_VERIFY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theta {
    /// `n / 50`.
    Default,
    Absolute(u64),
    /// `n / denominator`.
    Fraction(u64),
}

impl Theta {
    pub fn resolve(self, n: u64) -> u64 {
        match self {
            Theta::Default => n / DEFAULT_THETA_DENOMINATOR,
            Theta::Absolute(t) => t,
            Theta::Fraction(d) => n / d,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub algo: String,
    pub workers: usize,
    pub theta: Theta,
    pub activation: ActivationPolicy,
    pub sync: SyncPolicy,
    pub store: StoreMode,
    pub store_dir: Option<PathBuf>,
    pub seed: u64,
    pub params: AlgoParams,
    pub results: Option<PathBuf>,
    pub metrics: Option<PathBuf>,
    pub audit: bool,
    pub max_supersteps: Option<u32>,
    pub undirected: bool,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, algo: &str) -> Self {
        RunConfig {
            input: input.into(),
            algo: algo.to_string(),
            workers: 1,
            theta: Theta::Default,
            activation: ActivationPolicy::Auto,
            sync: SyncPolicy::Critical,
            store: StoreMode::Memory,
            store_dir: None,
            seed: 0,
            params: AlgoParams::default(),
            results: None,
            metrics: None,
            audit: false,
            max_supersteps: None,
            undirected: false,
        }
    }
}

/// What a run measured. Wall time covers only engine execution, not
/// loading, index construction or result dumping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub algo: String,
    pub workers: usize,
    pub n: u64,
    pub m: u64,
    pub theta: u64,
    pub seed: u64,
    pub superstep_count: u32,
    #[serde(rename = "total_wall_time_us", serialize_with = "micros")]
    pub total_wall_time: Duration,
    #[serde(flatten)]
    pub comm: CommStats,
    /// Triangle total, for `tc`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triangles: Option<i64>,
    #[serde(skip)]
    pub supersteps: Vec<SuperstepStats>,
}

fn micros<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(d.as_micros() as u64)
}

#[derive(Serialize)]
struct Line<'a, T: Serialize> {
    record: &'static str,
    #[serde(flatten)]
    body: &'a T,
}

impl MetricsReport {
    /// One `superstep` record per superstep, then one `summary` record.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        for s in &self.supersteps {
            serde_json::to_writer(
                &mut w,
                &Line {
                    record: "superstep",
                    body: s,
                },
            )?;
            writeln!(w)?;
        }
        serde_json::to_writer(
            &mut w,
            &Line {
                record: "summary",
                body: self,
            },
        )?;
        writeln!(w)
    }
}

pub struct RunOutcome {
    pub algo: Box<dyn Algorithm>,
    pub schema: AttributeSchema,
    /// The input as ingested, before any symmetrization for the algorithm.
    pub input: EdgeList,
    pub values: Vec<(VertexId, VertexValue)>,
    pub metrics: MetricsReport,
}

impl RunOutcome {
    pub fn raw_graph(&self) -> RawGraph {
        RawGraph::new(
            self.input.vertices.iter().copied(),
            self.input.edges.iter().copied(),
            self.input.directed,
        )
    }
}

fn engine_err(phase: &'static str) -> impl Fn(EngineError) -> RunError {
    move |source| RunError::Engine { phase, source }
}

/// Ingest, execute and, when paths are configured, write results and metrics.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    if cfg.workers == 0 {
        return Err(RunError::Usage("--workers must be at least 1".into()));
    }
    if cfg.theta == Theta::Fraction(0) {
        return Err(RunError::Usage("--theta-frac must be at least 1".into()));
    }
    let params = AlgoParams {
        seed: cfg.seed,
        ..cfg.params.clone()
    };
    let algo = by_name(&cfg.algo, &params).map_err(|e| RunError::Usage(e.to_string()))?;
    let input = ingest(&cfg.input, cfg.undirected)?;
    let list = if algo.undirected() && input.directed {
        input.symmetrized()
    } else {
        input.clone()
    };
    let graph = Graph::from_edges(&list);
    let n = graph.n() as u64;
    let theta = cfg.theta.resolve(n);
    let schema = algo.schema();
    let mut engine = Engine::build(
        &graph,
        schema.clone(),
        EngineConfig {
            workers: cfg.workers,
            theta: Some(theta),
            activation: cfg.activation,
            sync: cfg.sync,
            store_mode: cfg.store,
            store_dir: cfg.store_dir.clone(),
            seed: cfg.seed,
            max_supersteps: cfg.max_supersteps,
            audit: cfg.audit,
            ..Default::default()
        },
    )
    .map_err(engine_err("setup"))?;

    let started = Instant::now();
    algo.execute(&mut engine).map_err(engine_err("execution"))?;
    let total_wall_time = started.elapsed();

    let triangles = if algo.name() == "tc" {
        Some(crate::algorithms::TriangleCount::total(&engine).map_err(engine_err("execution"))?)
    } else {
        None
    };
    let comm = engine.comm_stats();
    let metrics = MetricsReport {
        algo: algo.name().to_string(),
        workers: cfg.workers,
        n,
        m: graph.m(),
        theta,
        seed: cfg.seed,
        superstep_count: engine.supersteps(),
        total_wall_time,
        comm,
        triangles,
        supersteps: engine.stats().to_vec(),
    };
    let values = engine.host_values();
    drop(engine);

    if let Some(path) = &cfg.results {
        write_file(path, |w| write_results(w, algo.as_ref(), &values))?;
    }
    if let Some(path) = &cfg.metrics {
        write_file(path, |w| metrics.write_jsonl(w))?;
    }
    Ok(RunOutcome {
        algo,
        schema,
        input,
        values,
        metrics,
    })
}

/// Runs and checks the result against the matching oracle or validator.
pub fn verify(cfg: &RunConfig) -> Result<(RunOutcome, VerifyReport), RunError> {
    let outcome = run(cfg)?;
    let params = AlgoParams {
        seed: cfg.seed,
        ..cfg.params.clone()
    };
    let report = check(
        &cfg.algo,
        &outcome.schema,
        &outcome.values,
        &outcome.raw_graph(),
        &params,
    )?;
    Ok((outcome, report))
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<(), RunError> {
    let wrap = |source| RunError::Output {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
    f(&mut w).map_err(wrap)?;
    w.flush().map_err(wrap)
}

/// `id<TAB>value...` per vertex, ascending id.
pub fn write_results<W: Write>(
    mut w: W,
    algo: &dyn Algorithm,
    values: &[(VertexId, VertexValue)],
) -> io::Result<()> {
    for (id, v) in values {
        writeln!(w, "{id}\t{}", algo.format(v))?;
    }
    Ok(())
}
