use crate::engine::{Engine, EngineError, ExprResult, IterationPlan, VertexView};
use crate::model::{AttrKind, AttrPos, AttributeSchema};
use crate::partition::AccessMode;

use super::Algorithm;

const EST: AttrPos = 1;

/// Largest `h <= cap` such that at least `h` of `values` are `>= h`.
pub(crate) fn h_index(values: &mut [i64], cap: i64) -> i64 {
    values.sort_unstable_by(|a, b| b.cmp(a));
    let mut h = 0;
    for (i, &x) in values.iter().enumerate() {
        let k = i as i64 + 1;
        if k > cap || x < k {
            break;
        }
        h = k;
    }
    h
}

/// Coreness by repeated local h-index updates starting from the degree.
#[derive(Debug, Clone, Copy)]
pub struct KCore;

impl Algorithm for KCore {
    fn name(&self) -> &'static str {
        "core"
    }

    fn schema(&self) -> AttributeSchema {
        AttributeSchema::new([("core", AttrKind::Int64)]).unwrap()
    }

    fn execute(&self, engine: &mut Engine) -> Result<(), EngineError> {
        engine.init(&|v: &VertexView<'_>| -> ExprResult {
            let mut val = v.value().clone();
            val.set_int(EST, v.degree().deg as i64)?;
            Ok(Some(val))
        })?;
        engine.run_plan(
            &IterationPlan::until_quiescent(AccessMode::All),
            &|v: &VertexView<'_>| -> ExprResult {
                let own = v.value().int(EST)?;
                let mut ests = v
                    .neighbors()
                    .map(|nb| nb.value.int(EST))
                    .collect::<Result<Vec<_>, _>>()?;
                let h = h_index(&mut ests, own);
                if h == own {
                    return Ok(None);
                }
                let mut val = v.value().clone();
                val.set_int(EST, h)?;
                Ok(Some(val))
            },
        )?;
        Ok(())
    }

    fn output(&self) -> Vec<AttrPos> {
        vec![EST]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::testutil::{cfg, ints, run};

    #[test]
    fn h_index_cases() {
        assert_eq!(h_index(&mut [], 5), 0);
        assert_eq!(h_index(&mut [3, 3, 3], 5), 3);
        assert_eq!(h_index(&mut [3, 3, 3], 2), 2);
        assert_eq!(h_index(&mut [1, 5, 2, 4], 9), 2);
    }

    #[test]
    fn triangle() {
        let e = run(&KCore, &[(1, 2), (2, 3), (1, 3)], &[], false, cfg(2));
        assert_eq!(ints(&e, EST), vec![(1, 2), (2, 2), (3, 2)]);
    }

    #[test]
    fn star_is_one_core() {
        let e = run(
            &KCore,
            &[(1, 2), (1, 3), (1, 4), (1, 5)],
            &[],
            false,
            cfg(3),
        );
        assert!(ints(&e, EST).iter().all(|&(_, c)| c == 1));
    }

    #[test]
    fn triangle_with_tail() {
        let e = run(
            &KCore,
            &[(1, 2), (2, 3), (1, 3), (3, 4)],
            &[7],
            false,
            cfg(2),
        );
        assert_eq!(ints(&e, EST), vec![(1, 2), (2, 2), (3, 2), (4, 1), (7, 0)]);
    }
}
