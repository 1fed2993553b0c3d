//! Benchmark algorithms written as neighborhood-expression programs.
//!
//! Each algorithm declares its attribute schema and drives the engine through
//! one or more iteration plans. All of them are registered by name for the CLI.

mod bfs;
mod cc;
mod color;
mod kcore;
mod matching;
mod mis;
mod pagerank;
mod triangles;

pub use bfs::Bfs;
pub use cc::ConnectedComponents;
pub use color::Coloring;
pub use kcore::KCore;
pub use matching::MaximalMatching;
pub use mis::MaximalIndependentSet;
pub use pagerank::{PageRank, PersonalizedPageRank};
pub use triangles::TriangleCount;

use crate::engine::{Engine, EngineError};
use crate::model::{AttrPos, AttributeSchema, VertexId, VertexValue};

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_ITERATIONS: u32 = 10;

pub const NAMES: [&str; 9] = ["bfs", "cc", "pr", "ppr", "core", "color", "mis", "mm", "tc"];

/// A program: schema plus the sequence of plans it runs.
pub trait Algorithm: Send + Sync {
    fn name(&self) -> &'static str;

    fn schema(&self) -> AttributeSchema;

    /// Undirected-only algorithms run on the symmetrized input.
    fn undirected(&self) -> bool {
        true
    }

    fn execute(&self, engine: &mut Engine) -> Result<(), EngineError>;

    /// Positions written to the results file.
    fn output(&self) -> Vec<AttrPos>;

    fn format(&self, value: &VertexValue) -> String {
        self.output()
            .into_iter()
            .map(|p| value.get(p).map(|x| x.to_string()).unwrap_or_default())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgoParams {
    pub source: Option<VertexId>,
    pub damping: f64,
    pub iterations: u32,
    pub seed: u64,
}

impl Default for AlgoParams {
    fn default() -> Self {
        AlgoParams {
            source: None,
            damping: DEFAULT_DAMPING,
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
        }
    }
}

pub fn by_name(name: &str, params: &AlgoParams) -> Result<Box<dyn Algorithm>, EngineError> {
    let source = || {
        params
            .source
            .ok_or_else(|| EngineError::Param(format!("`{name}` needs a source vertex")))
    };
    if params.iterations == 0 {
        return Err(EngineError::Param(
            "iteration count must be at least 1".into(),
        ));
    }
    Ok(match name {
        "bfs" => Box::new(Bfs::new(source()?)),
        "cc" => Box::new(ConnectedComponents),
        "pr" => Box::new(PageRank::new(params.damping, params.iterations)),
        "ppr" => Box::new(PersonalizedPageRank::new(
            source()?,
            params.damping,
            params.iterations,
        )),
        "core" => Box::new(KCore),
        "color" => Box::new(Coloring),
        "mis" => Box::new(MaximalIndependentSet::new(params.seed)),
        "mm" => Box::new(MaximalMatching::new(params.seed)),
        "tc" => Box::new(TriangleCount),
        other => return Err(EngineError::Param(format!("unknown algorithm `{other}`"))),
    })
}

pub(crate) fn require_vertex(engine: &Engine, v: VertexId) -> Result<(), EngineError> {
    if engine.contains(v) {
        Ok(())
    } else {
        Err(EngineError::Param(format!(
            "vertex {v} is not in the graph"
        )))
    }
}

/// Sum of one integer attribute over all hosts.
pub fn sum_int(engine: &Engine, pos: AttrPos) -> Result<i64, EngineError> {
    let mut total = 0;
    for (_, v) in engine.host_values() {
        total += v.int(pos)?;
    }
    Ok(total)
}
