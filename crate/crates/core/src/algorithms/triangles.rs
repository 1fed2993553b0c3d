use crate::engine::{Engine, EngineError, ExprError, ExprResult, IterationPlan, VertexView};
use crate::model::{AttrKind, AttrPos, AttributeSchema};
use crate::partition::AccessMode;

use super::{sum_int, Algorithm};

const TRI: AttrPos = 1;

fn count_common(a: &[u64], b: &[u64]) -> i64 {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Triangle counting over a degree ordering. Phase one stores each vertex's
/// higher-ranked neighbors (by `(deg, id)`) as an auxiliary list; phase two
/// counts, for every higher neighbor `u` of `v`, the common entries of both
/// lists. Each triangle is counted once, at its lowest-ranked corner.
#[derive(Debug, Clone, Copy)]
pub struct TriangleCount;

impl TriangleCount {
    pub fn total(engine: &Engine) -> Result<i64, EngineError> {
        sum_int(engine, TRI)
    }
}

impl Algorithm for TriangleCount {
    fn name(&self) -> &'static str {
        "tc"
    }

    fn schema(&self) -> AttributeSchema {
        AttributeSchema::new([("tri", AttrKind::Int64)]).unwrap()
    }

    fn execute(&self, engine: &mut Engine) -> Result<(), EngineError> {
        engine.run_lists(&|v: &VertexView<'_>| -> Result<Vec<u64>, ExprError> {
            let rank = (v.degree().deg, v.id());
            Ok(v.neighbors()
                .filter(|nb| (nb.degree.deg, nb.id) > rank)
                .map(|nb| nb.id)
                .collect())
        })?;
        engine.run_plan(
            &IterationPlan::fixed(1, AccessMode::All),
            &|v: &VertexView<'_>| -> ExprResult {
                let higher = v.aux();
                let mut count = 0;
                for nb in v.neighbors() {
                    if higher.binary_search(&nb.id).is_ok() {
                        count += count_common(higher, nb.aux());
                    }
                }
                let mut val = v.value().clone();
                val.set_int(TRI, count)?;
                Ok(Some(val))
            },
        )?;
        Ok(())
    }

    fn output(&self) -> Vec<AttrPos> {
        vec![TRI]
    }
}
