use crate::engine::{Engine, EngineError, ExprResult, IterationPlan, VertexView};
use crate::model::{AttrKind, AttrPos, AttributeSchema, VertexId, INT_MAX};
use crate::partition::AccessMode;

use super::{require_vertex, Algorithm};

const DIS: AttrPos = 1;

/// Hop distance from a source along in-neighbor reads:
/// `dis = min(dis, in_nb.dis + 1)`.
#[derive(Debug, Clone)]
pub struct Bfs {
    pub source: VertexId,
}

impl Bfs {
    pub fn new(source: VertexId) -> Self {
        Bfs { source }
    }
}

impl Algorithm for Bfs {
    fn name(&self) -> &'static str {
        "bfs"
    }

    fn schema(&self) -> AttributeSchema {
        AttributeSchema::new([("dis", AttrKind::Int64)]).unwrap()
    }

    fn undirected(&self) -> bool {
        false
    }

    fn execute(&self, engine: &mut Engine) -> Result<(), EngineError> {
        require_vertex(engine, self.source)?;
        let source = self.source;
        engine.init(&|v: &VertexView<'_>| -> ExprResult {
            let mut val = v.value().clone();
            val.set_int(DIS, if v.id() == source { 0 } else { INT_MAX })?;
            Ok(Some(val))
        })?;
        engine.run_plan(
            &IterationPlan::until_quiescent(AccessMode::In),
            &|v: &VertexView<'_>| -> ExprResult {
                let own = v.value().int(DIS)?;
                let mut best = own;
                for nb in v.neighbors() {
                    best = best.min(nb.value.int(DIS)? + 1);
                }
                if best == own {
                    return Ok(None);
                }
                let mut val = v.value().clone();
                val.set_int(DIS, best)?;
                Ok(Some(val))
            },
        )?;
        Ok(())
    }

    fn output(&self) -> Vec<AttrPos> {
        vec![DIS]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::testutil::{cfg, ints, run};

    const FIVE: [(u64, u64); 5] = [(1, 2), (1, 4), (2, 3), (2, 5), (4, 5)];

    #[test]
    fn five_vertex_graph_distances() {
        for k in [1, 3] {
            let e = run(&Bfs::new(1), &FIVE, &[], false, cfg(k));
            assert_eq!(ints(&e, DIS), vec![(1, 0), (2, 1), (3, 2), (4, 1), (5, 2)]);
        }
    }

    #[test]
    fn singleton_source() {
        let e = run(&Bfs::new(9), &[(1, 2)], &[9], false, cfg(2));
        assert_eq!(ints(&e, DIS), vec![(1, INT_MAX), (2, INT_MAX), (9, 0)]);
    }

    #[test]
    fn path_graph() {
        let e = run(&Bfs::new(1), &[(1, 2), (2, 3)], &[], false, cfg(2));
        assert_eq!(ints(&e, DIS), vec![(1, 0), (2, 1), (3, 2)]);
    }

    #[test]
    fn directed_follows_out_edges() {
        let e = run(&Bfs::new(2), &[(1, 2), (2, 3)], &[], true, cfg(2));
        assert_eq!(ints(&e, DIS), vec![(1, INT_MAX), (2, 0), (3, 1)]);
    }

    #[test]
    fn first_superstep_changes_exactly_the_source_neighbors() {
        let e = run(&Bfs::new(2), &FIVE, &[], false, cfg(3));
        // superstep 1 is the init plan; 2 is the first main superstep
        assert_eq!(e.stats()[1].n_change, 3);
        assert_eq!(e.stats()[2].n_change, 1);
    }

    #[test]
    fn unknown_source_is_rejected() {
        let list = crate::ingest::EdgeList::from_pairs([(1, 2)], true);
        let g = crate::ingest::Graph::from_edges(&list);
        let algo = Bfs::new(42);
        let mut e = Engine::build(&g, algo.schema(), cfg(1)).unwrap();
        assert!(matches!(algo.execute(&mut e), Err(EngineError::Param(_))));
    }
}
