use crate::engine::{Engine, EngineError, ExprResult, IterationPlan, VertexView};
use crate::model::{AttrKind, AttrPos, AttributeSchema};
use crate::partition::AccessMode;

use super::Algorithm;

const LABEL: AttrPos = 1;

/// Label propagation: every vertex ends with the smallest id in its component.
#[derive(Debug, Clone, Copy)]
pub struct ConnectedComponents;

impl Algorithm for ConnectedComponents {
    fn name(&self) -> &'static str {
        "cc"
    }

    fn schema(&self) -> AttributeSchema {
        AttributeSchema::new([("label", AttrKind::Int64)]).unwrap()
    }

    fn execute(&self, engine: &mut Engine) -> Result<(), EngineError> {
        engine.init(&|v: &VertexView<'_>| -> ExprResult {
            let mut val = v.value().clone();
            val.set_int(LABEL, v.id() as i64)?;
            Ok(Some(val))
        })?;
        engine.run_plan(
            &IterationPlan::until_quiescent(AccessMode::All),
            &|v: &VertexView<'_>| -> ExprResult {
                let own = v.value().int(LABEL)?;
                let mut min = own;
                for nb in v.neighbors() {
                    min = min.min(nb.value.int(LABEL)?);
                }
                if min == own {
                    return Ok(None);
                }
                let mut val = v.value().clone();
                val.set_int(LABEL, min)?;
                Ok(Some(val))
            },
        )?;
        Ok(())
    }

    fn output(&self) -> Vec<AttrPos> {
        vec![LABEL]
    }
}
