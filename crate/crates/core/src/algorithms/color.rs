use crate::engine::{Engine, EngineError, ExprResult, IterationPlan, VertexView};
use crate::model::{AttrKind, AttrPos, AttributeSchema};
use crate::partition::AccessMode;

use super::Algorithm;

const DEG: AttrPos = 1;
const COLOR: AttrPos = 2;

fn init(v: &VertexView<'_>) -> ExprResult {
    let mut val = v.value().clone();
    val.set_int(DEG, v.degree().deg as i64)?;
    val.set_int(COLOR, -1)?;
    Ok(Some(val))
}

/// Greedy coloring by priority: higher degree first, ties to the higher id.
/// A vertex waits until every higher-priority neighbor has a color, then
/// takes the smallest color none of them uses. Only `color` is synchronized.
#[derive(Debug, Clone, Copy)]
pub struct Coloring;

impl Algorithm for Coloring {
    fn name(&self) -> &'static str {
        "color"
    }

    fn schema(&self) -> AttributeSchema {
        AttributeSchema::new([("deg", AttrKind::Int64), ("color", AttrKind::Int64)]).unwrap()
    }

    fn execute(&self, engine: &mut Engine) -> Result<(), EngineError> {
        engine.init(&init)?;
        engine.run_plan(
            &IterationPlan::until_quiescent(AccessMode::All).critical([COLOR]),
            &|v: &VertexView<'_>| -> ExprResult {
                let me = v.value();
                if me.int(COLOR)? != -1 {
                    return Ok(None);
                }
                let deg = me.int(DEG)?;
                let mut used = Vec::new();
                for nb in v.neighbors() {
                    let nb_deg = nb.value.int(DEG)?;
                    if nb_deg > deg || (nb_deg == deg && nb.id > v.id()) {
                        let c = nb.value.int(COLOR)?;
                        if c == -1 {
                            return Ok(None);
                        }
                        used.push(c);
                    }
                }
                used.sort_unstable();
                let mut color = 0;
                for c in used {
                    if c == color {
                        color += 1;
                    } else if c > color {
                        break;
                    }
                }
                let mut val = me.clone();
                val.set_int(COLOR, color)?;
                Ok(Some(val))
            },
        )?;
        Ok(())
    }

    fn output(&self) -> Vec<AttrPos> {
        vec![COLOR]
    }
}
