//! The user-facing side of the engine: neighborhood expressions, the
//! read-only vertex view they receive, and iteration plans.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{AttrPos, SchemaError, VertexId, VertexValue};
use crate::partition::{AccessMode, Degree, Partition, Slot};
use crate::store::SlotList;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct ExprError(pub String);

impl From<SchemaError> for ExprError {
    fn from(e: SchemaError) -> Self {
        ExprError(e.to_string())
    }
}

/// New value for the vertex, or `None` to leave it untouched.
pub type ExprResult = Result<Option<VertexValue>, ExprError>;

/// A pure function of a vertex's own value and its direct neighbors' values.
pub trait NeighborhoodExpression: Sync {
    fn evaluate(&self, v: &VertexView<'_>) -> ExprResult;
}

impl<F> NeighborhoodExpression for F
where
    F: Fn(&VertexView<'_>) -> ExprResult + Sync,
{
    fn evaluate(&self, v: &VertexView<'_>) -> ExprResult {
        self(v)
    }
}

/// Computes an auxiliary id list for a vertex (neighbor-set exchange).
pub trait ListExpression: Sync {
    fn evaluate(&self, v: &VertexView<'_>) -> Result<Vec<u64>, ExprError>;
}

impl<F> ListExpression for F
where
    F: Fn(&VertexView<'_>) -> Result<Vec<u64>, ExprError> + Sync,
{
    fn evaluate(&self, v: &VertexView<'_>) -> Result<Vec<u64>, ExprError> {
        self(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterationMode {
    UntilQuiescent,
    Fixed(u32),
}

/// One `ITER` / `ITER_N` call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationPlan {
    pub mode: IterationMode,
    /// Positions synchronized to guests; empty means all.
    pub critical: Vec<AttrPos>,
    pub access: AccessMode,
}

impl IterationPlan {
    pub fn until_quiescent(access: AccessMode) -> Self {
        IterationPlan {
            mode: IterationMode::UntilQuiescent,
            critical: Vec::new(),
            access,
        }
    }

    pub fn fixed(n: u32, access: AccessMode) -> Self {
        IterationPlan {
            mode: IterationMode::Fixed(n),
            critical: Vec::new(),
            access,
        }
    }

    /// Single-superstep setup plan synchronizing every attribute.
    pub fn init() -> Self {
        Self::fixed(1, AccessMode::All)
    }

    pub fn critical(mut self, positions: impl IntoIterator<Item = AttrPos>) -> Self {
        self.critical = positions.into_iter().collect();
        self.critical.sort_unstable();
        self.critical.dedup();
        self
    }
}

/// A neighbor as seen from a host during evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Neighbor<'a> {
    pub id: VertexId,
    pub value: &'a VertexValue,
    pub degree: Degree,
    aux: &'a [u64],
}

impl<'a> Neighbor<'a> {
    /// The neighbor's auxiliary list, if one was exchanged.
    pub fn aux(&self) -> &'a [u64] {
        self.aux
    }
}

/// Everything an expression may read: its own state and its neighbors.
pub struct VertexView<'a> {
    pub(crate) slot: Slot,
    pub(crate) part: &'a Partition,
    pub(crate) values: &'a [VertexValue],
    pub(crate) aux: &'a [Vec<u64>],
    pub(crate) neighbors: SlotList<'a>,
    pub(crate) superstep: u32,
    pub(crate) seed: u64,
}

impl<'a> VertexView<'a> {
    pub fn id(&self) -> VertexId {
        self.part.id(self.slot)
    }

    pub fn value(&self) -> &'a VertexValue {
        &self.values[self.slot as usize]
    }

    pub fn degree(&self) -> Degree {
        self.part.degree(self.slot)
    }

    pub fn aux(&self) -> &'a [u64] {
        &self.aux[self.slot as usize]
    }

    /// Vertex count of the whole graph.
    pub fn num_vertices(&self) -> u64 {
        self.part.global_n
    }

    /// Global superstep number (1-based, counted across plans).
    pub fn superstep(&self) -> u32 {
        self.superstep
    }

    /// Neighbors under the plan's access mode, ascending by id.
    pub fn neighbors(&self) -> impl Iterator<Item = Neighbor<'a>> + '_ {
        let part = self.part;
        let values = self.values;
        let aux = self.aux;
        self.neighbors.clone().map(move |s| Neighbor {
            id: part.id(s),
            value: &values[s as usize],
            degree: part.degree(s),
            aux: &aux[s as usize],
        })
    }

    /// Random stream keyed by (seed, vertex, superstep); independent of the
    /// worker layout.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(stream_key(self.seed, self.id(), self.superstep))
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream_key(seed: u64, vertex: VertexId, superstep: u32) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ vertex) ^ superstep as u64)
}
