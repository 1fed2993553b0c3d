use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{stream_key, Engine, EngineError, ExprResult, IterationPlan, VertexView};
use crate::model::{AttrKind, AttrPos, AttributeSchema};
use crate::partition::AccessMode;

use super::Algorithm;

const STATE: AttrPos = 1;
const PRIO: AttrPos = 2;

pub const UNDECIDED: i64 = 0;
pub const IN_SET: i64 = 1;
pub const OUT_OF_SET: i64 = 2;

/// Luby-style maximal independent set. Each round undecided vertices draw a
/// priority, local maxima among undecided neighbors join (ties to the higher
/// id), and their neighbors drop out.
#[derive(Debug, Clone)]
pub struct MaximalIndependentSet {
    pub seed: u64,
}

impl MaximalIndependentSet {
    pub fn new(seed: u64) -> Self {
        MaximalIndependentSet { seed }
    }

    /// Ids of the vertices in the set.
    pub fn members(engine: &Engine) -> Result<Vec<u64>, EngineError> {
        let mut out = Vec::new();
        for (id, v) in engine.host_values() {
            if v.int(STATE)? == IN_SET {
                out.push(id);
            }
        }
        Ok(out)
    }
}

fn step(access: AccessMode, pos: AttrPos) -> IterationPlan {
    IterationPlan::fixed(1, access).critical([pos])
}

impl Algorithm for MaximalIndependentSet {
    fn name(&self) -> &'static str {
        "mis"
    }

    fn schema(&self) -> AttributeSchema {
        AttributeSchema::new([("in_set", AttrKind::Int64), ("prio", AttrKind::Int64)]).unwrap()
    }

    fn execute(&self, engine: &mut Engine) -> Result<(), EngineError> {
        let seed = self.seed;
        let draw = move |v: &VertexView<'_>| -> ExprResult {
            if v.value().int(STATE)? != UNDECIDED {
                return Ok(None);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(stream_key(seed, v.id(), v.superstep()));
            let mut val = v.value().clone();
            val.set_int(PRIO, (rng.gen::<u64>() >> 1) as i64)?;
            Ok(Some(val))
        };
        let select = |v: &VertexView<'_>| -> ExprResult {
            let me = v.value();
            if me.int(STATE)? != UNDECIDED {
                return Ok(None);
            }
            let key = (me.int(PRIO)?, v.id());
            for nb in v.neighbors() {
                if nb.value.int(STATE)? == UNDECIDED && (nb.value.int(PRIO)?, nb.id) > key {
                    return Ok(None);
                }
            }
            let mut val = me.clone();
            val.set_int(STATE, IN_SET)?;
            Ok(Some(val))
        };
        let exclude = |v: &VertexView<'_>| -> ExprResult {
            let me = v.value();
            if me.int(STATE)? != UNDECIDED {
                return Ok(None);
            }
            for nb in v.neighbors() {
                if nb.value.int(STATE)? == IN_SET {
                    let mut val = me.clone();
                    val.set_int(STATE, OUT_OF_SET)?;
                    return Ok(Some(val));
                }
            }
            Ok(None)
        };

        loop {
            engine.run_plan(&step(AccessMode::All, PRIO), &draw)?;
            let joined = engine.run_plan(&step(AccessMode::All, STATE), &select)?;
            // with undecided vertices left, the global maximum always joins
            if joined.total_changes() == 0 {
                return Ok(());
            }
            engine.run_plan(&step(AccessMode::All, STATE), &exclude)?;
        }
    }

    fn output(&self) -> Vec<AttrPos> {
        vec![STATE]
    }

    fn format(&self, value: &crate::model::VertexValue) -> String {
        match value.int(STATE) {
            Ok(IN_SET) => "1".into(),
            _ => "0".into(),
        }
    }
}
