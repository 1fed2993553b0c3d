use crate::engine::{Engine, EngineError, ExprError, ExprResult, IterationPlan, VertexView};
use crate::model::{AttrKind, AttrPos, AttributeSchema, VertexId};
use crate::partition::AccessMode;

use super::{require_vertex, Algorithm};

const RANK: AttrPos = 1;

/// Damped in-flow `a * sum(u.rank / |N_out(u)|)` over in-neighbors. Vertices
/// without out-edges contribute nothing, so their mass leaks.
fn inflow(v: &VertexView<'_>, damping: f64) -> Result<f64, ExprError> {
    let mut sum = 0.0;
    for nb in v.neighbors() {
        // an in-neighbor has at least one out-edge: the one to us
        sum += nb.value.float(RANK)? / nb.degree.out_deg as f64;
    }
    Ok(damping * sum)
}

fn schema() -> AttributeSchema {
    AttributeSchema::new([("rank", AttrKind::Float64)]).unwrap()
}

/// `rank = (1 - a)/n + a * sum(u.rank / |N_out(u)|)` for a fixed number of
/// synchronous iterations from the uniform vector.
#[derive(Debug, Clone)]
pub struct PageRank {
    pub damping: f64,
    pub iterations: u32,
}

impl PageRank {
    pub fn new(damping: f64, iterations: u32) -> Self {
        PageRank {
            damping,
            iterations,
        }
    }
}

impl Algorithm for PageRank {
    fn name(&self) -> &'static str {
        "pr"
    }

    fn schema(&self) -> AttributeSchema {
        schema()
    }

    fn undirected(&self) -> bool {
        false
    }

    fn execute(&self, engine: &mut Engine) -> Result<(), EngineError> {
        let a = self.damping;
        engine.init(&|v: &VertexView<'_>| -> ExprResult {
            let mut val = v.value().clone();
            val.set_float(RANK, 1.0 / v.num_vertices() as f64)?;
            Ok(Some(val))
        })?;
        engine.run_plan(
            &IterationPlan::fixed(self.iterations, AccessMode::In),
            &|v: &VertexView<'_>| -> ExprResult {
                let teleport = (1.0 - a) / v.num_vertices() as f64;
                let rank = teleport + inflow(v, a)?;
                let mut val = v.value().clone();
                val.set_float(RANK, rank)?;
                Ok(Some(val))
            },
        )?;
        Ok(())
    }

    fn output(&self) -> Vec<AttrPos> {
        vec![RANK]
    }
}

/// PageRank with all teleport mass returned to a single source; starts from
/// the indicator vector of the source.
#[derive(Debug, Clone)]
pub struct PersonalizedPageRank {
    pub source: VertexId,
    pub damping: f64,
    pub iterations: u32,
}

impl PersonalizedPageRank {
    pub fn new(source: VertexId, damping: f64, iterations: u32) -> Self {
        PersonalizedPageRank {
            source,
            damping,
            iterations,
        }
    }
}

impl Algorithm for PersonalizedPageRank {
    fn name(&self) -> &'static str {
        "ppr"
    }

    fn schema(&self) -> AttributeSchema {
        schema()
    }

    fn undirected(&self) -> bool {
        false
    }

    fn execute(&self, engine: &mut Engine) -> Result<(), EngineError> {
        require_vertex(engine, self.source)?;
        let (a, source) = (self.damping, self.source);
        engine.init(&|v: &VertexView<'_>| -> ExprResult {
            let mut val = v.value().clone();
            val.set_float(RANK, if v.id() == source { 1.0 } else { 0.0 })?;
            Ok(Some(val))
        })?;
        engine.run_plan(
            &IterationPlan::fixed(self.iterations, AccessMode::In),
            &|v: &VertexView<'_>| -> ExprResult {
                let teleport = if v.id() == source { 1.0 - a } else { 0.0 };
                let rank = teleport + inflow(v, a)?;
                let mut val = v.value().clone();
                val.set_float(RANK, rank)?;
                Ok(Some(val))
            },
        )?;
        Ok(())
    }

    fn output(&self) -> Vec<AttrPos> {
        vec![RANK]
    }
}
