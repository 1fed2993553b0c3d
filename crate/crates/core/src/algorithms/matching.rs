use crate::engine::{Engine, EngineError, ExprResult, IterationPlan, VertexView};
use crate::model::{AttrKind, AttrPos, AttributeSchema, VertexValue};
use crate::partition::AccessMode;

use super::Algorithm;

const PARTNER: AttrPos = 1;
const PROPOSAL: AttrPos = 2;
const ACCEPT: AttrPos = 3;

pub const UNMATCHED: i64 = -1;

/// Maximal matching in propose / accept / decide rounds. An unmatched vertex
/// proposes to its smallest unmatched neighbor and accepts its smallest
/// proposer; a pair matches when both proposed to and accepted each other.
/// The smallest vertex with an unmatched neighbor always gets matched, so
/// rounds stop once a decide step changes nothing.
#[derive(Debug, Clone)]
pub struct MaximalMatching {
    /// Unused by the min-id rules; kept so every randomized algorithm takes one.
    pub seed: u64,
}

impl MaximalMatching {
    pub fn new(seed: u64) -> Self {
        MaximalMatching { seed }
    }
}

fn with(value: &VertexValue, pos: AttrPos, x: i64) -> ExprResult {
    if value.int(pos)? == x {
        return Ok(None);
    }
    let mut val = value.clone();
    val.set_int(pos, x)?;
    Ok(Some(val))
}

fn propose(v: &VertexView<'_>) -> ExprResult {
    let me = v.value();
    let mut target = UNMATCHED;
    if me.int(PARTNER)? == UNMATCHED {
        for nb in v.neighbors() {
            if nb.value.int(PARTNER)? == UNMATCHED {
                target = nb.id as i64;
                break;
            }
        }
    }
    with(me, PROPOSAL, target)
}

fn accept(v: &VertexView<'_>) -> ExprResult {
    let me = v.value();
    let mut chosen = UNMATCHED;
    if me.int(PARTNER)? == UNMATCHED {
        for nb in v.neighbors() {
            if nb.value.int(PARTNER)? == UNMATCHED && nb.value.int(PROPOSAL)? == v.id() as i64 {
                chosen = nb.id as i64;
                break;
            }
        }
    }
    with(me, ACCEPT, chosen)
}

fn decide(v: &VertexView<'_>) -> ExprResult {
    let me = v.value();
    let target = me.int(PROPOSAL)?;
    if me.int(PARTNER)? != UNMATCHED || target == UNMATCHED || me.int(ACCEPT)? != target {
        return Ok(None);
    }
    let id = v.id() as i64;
    for nb in v.neighbors() {
        if nb.id as i64 == target {
            if nb.value.int(PROPOSAL)? == id && nb.value.int(ACCEPT)? == id {
                return with(me, PARTNER, target);
            }
            break;
        }
    }
    Ok(None)
}

impl Algorithm for MaximalMatching {
    fn name(&self) -> &'static str {
        "mm"
    }

    fn schema(&self) -> AttributeSchema {
        AttributeSchema::new([
            ("partner", AttrKind::Int64),
            ("proposal", AttrKind::Int64),
            ("accept", AttrKind::Int64),
        ])
        .unwrap()
    }

    fn execute(&self, engine: &mut Engine) -> Result<(), EngineError> {
        engine.init(&|v: &VertexView<'_>| -> ExprResult {
            let mut val = v.value().clone();
            for p in [PARTNER, PROPOSAL, ACCEPT] {
                val.set_int(p, UNMATCHED)?;
            }
            Ok(Some(val))
        })?;
        let step = |pos| IterationPlan::fixed(1, AccessMode::All).critical([pos]);
        loop {
            engine.run_plan(&step(PROPOSAL), &propose)?;
            engine.run_plan(&step(ACCEPT), &accept)?;
            if engine.run_plan(&step(PARTNER), &decide)?.total_changes() == 0 {
                return Ok(());
            }
        }
    }

    fn output(&self) -> Vec<AttrPos> {
        vec![PARTNER]
    }
}
