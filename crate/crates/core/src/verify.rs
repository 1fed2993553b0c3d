//! Engine results checked against the oracles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::algorithms::AlgoParams;
use crate::model::{AttributeSchema, SchemaError, VertexId, VertexValue};
use crate::oracle::{oracle_run, OracleError, OracleParams, OracleResult, RawGraph};

/// Per-vertex relative tolerance for floating-point results.
pub const REL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("no oracle or validator for `{0}`")]
    Unsupported(String),
    #[error("result schema has no attribute `{0}`")]
    MissingAttribute(&'static str),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    /// `None` for whole-graph results (triangle totals, validator failures).
    pub vertex: Option<VertexId>,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub algo: String,
    pub checked: usize,
    pub divergence: Option<Divergence>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.divergence.is_none()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.divergence {
            None => write!(f, "{}: pass ({} values checked)", self.algo, self.checked),
            Some(d) => {
                write!(f, "{}: FAIL", self.algo)?;
                if let Some(v) = d.vertex {
                    write!(f, " at vertex {v}")?;
                }
                write!(f, ": expected {}, found {}", d.expected, d.found)
            }
        }
    }
}

fn attribute(algo: &str) -> Option<&'static str> {
    Some(match algo {
        "bfs" => "dis",
        "cc" => "label",
        "pr" | "ppr" => "rank",
        "core" => "core",
        "color" => "color",
        "tc" => "tri",
        "mis" => "in_set",
        "mm" => "partner",
        _ => return None,
    })
}

pub fn close(expected: f64, found: f64) -> bool {
    expected == found || (expected - found).abs() <= REL_TOL * expected.abs().max(found.abs())
}

fn first_mismatch<T: PartialEq + fmt::Display>(
    expected: &BTreeMap<VertexId, T>,
    found: &BTreeMap<VertexId, T>,
    same: impl Fn(&T, &T) -> bool,
) -> Option<Divergence> {
    let ids: BTreeSet<VertexId> = expected.keys().chain(found.keys()).copied().collect();
    for v in ids {
        let show = |x: Option<&T>| x.map_or_else(|| "nothing".to_string(), |x| x.to_string());
        let (e, f) = (expected.get(&v), found.get(&v));
        let ok = matches!((e, f), (Some(a), Some(b)) if same(a, b));
        if !ok {
            return Some(Divergence {
                vertex: Some(v),
                expected: show(e),
                found: show(f),
            });
        }
    }
    None
}

/// Compares one finished run against the oracle (or validator) for `algo`.
pub fn check(
    algo: &str,
    schema: &AttributeSchema,
    values: &[(VertexId, VertexValue)],
    raw: &RawGraph,
    params: &AlgoParams,
) -> Result<VerifyReport, VerifyError> {
    let name = attribute(algo).ok_or_else(|| VerifyError::Unsupported(algo.to_string()))?;
    let pos = schema
        .position(name)
        .ok_or(VerifyError::MissingAttribute(name))?;
    let mut oparams = OracleParams {
        source: params.source,
        damping: params.damping,
        iterations: params.iterations,
        candidate: None,
    };
    let oracle_name = match algo {
        "mis" | "mm" => {
            let mut cand = BTreeMap::new();
            for (v, x) in values {
                cand.insert(*v, x.int(pos)?);
            }
            oparams.candidate = Some(cand);
            if algo == "mis" {
                "validate_mis"
            } else {
                "validate_mm"
            }
        }
        other => other,
    };
    let divergence = match oracle_run(oracle_name, raw, &oparams)? {
        OracleResult::Ints(expected) => {
            let mut found = BTreeMap::new();
            for (v, x) in values {
                found.insert(*v, x.int(pos)?);
            }
            first_mismatch(&expected, &found, |a, b| a == b)
        }
        OracleResult::Floats(expected) => {
            let mut found = BTreeMap::new();
            for (v, x) in values {
                found.insert(*v, x.float(pos)?);
            }
            first_mismatch(&expected, &found, |a, b| close(*a, *b))
        }
        OracleResult::Count(expected) => {
            let mut total = 0i64;
            for (_, x) in values {
                total += x.int(pos)?;
            }
            (total != expected as i64).then(|| Divergence {
                vertex: None,
                expected: expected.to_string(),
                found: total.to_string(),
            })
        }
        OracleResult::Verdict(problem) => problem.map(|msg| Divergence {
            vertex: None,
            expected: format!("a valid {algo} result"),
            found: msg,
        }),
    };
    Ok(VerifyReport {
        algo: algo.to_string(),
        checked: values.len(),
        divergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{by_name, Algorithm};
    use crate::engine::{Engine, EngineConfig};
    use crate::ingest::{EdgeList, Graph};

    fn run(algo: &dyn Algorithm, list: &EdgeList, k: usize) -> Vec<(VertexId, VertexValue)> {
        let list = if algo.undirected() {
            list.symmetrized()
        } else {
            list.clone()
        };
        let mut e = Engine::build(
            &Graph::from_edges(&list),
            algo.schema(),
            EngineConfig {
                workers: k,
                ..Default::default()
            },
        )
        .unwrap();
        algo.execute(&mut e).unwrap();
        e.host_values()
    }

    fn random_graph(n: u64, seed: u64) -> EdgeList {
        let mut state = seed;
        let mut list = EdgeList::new(false);
        for a in 1..=n {
            list.add_vertex(a);
            for b in a + 1..=n {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                if state >> 59 < 2 {
                    list.add_edge(a, b);
                }
            }
        }
        list
    }

    fn raw(list: &EdgeList) -> RawGraph {
        RawGraph::new(
            list.vertices.iter().copied(),
            list.edges.iter().copied(),
            list.directed,
        )
    }

    #[test]
    fn every_algorithm_passes_on_a_random_graph() {
        let list = random_graph(100, 5);
        let params = AlgoParams {
            source: Some(1),
            seed: 7,
            ..Default::default()
        };
        for name in crate::algorithms::NAMES {
            let algo = by_name(name, &params).unwrap();
            let values = run(algo.as_ref(), &list, 4);
            let report = check(name, &algo.schema(), &values, &raw(&list), &params).unwrap();
            assert!(report.passed(), "{report}");
            assert_eq!(report.checked, 100);
        }
    }

    #[test]
    fn corrupted_output_names_the_vertex() {
        let list = random_graph(50, 9);
        let params = AlgoParams {
            source: Some(1),
            ..Default::default()
        };
        let algo = by_name("bfs", &params).unwrap();
        let mut values = run(algo.as_ref(), &list, 2);
        let i = values.iter().position(|(v, _)| *v == 17).unwrap();
        let old = values[i].1.int(1).unwrap();
        values[i].1.set_int(1, old + 1).unwrap();
        let report = check("bfs", &algo.schema(), &values, &raw(&list), &params).unwrap();
        let d = report.divergence.clone().unwrap();
        assert_eq!(d.vertex, Some(17));
        assert_eq!(d.found, (old + 1).to_string());
        assert!(report.to_string().contains("vertex 17"));
    }

    #[test]
    fn corrupted_matching_fails_validation() {
        let list = random_graph(40, 3);
        let params = AlgoParams::default();
        let algo = by_name("mm", &params).unwrap();
        let mut values = run(algo.as_ref(), &list, 3);
        for (_, v) in values.iter_mut() {
            v.set_int(1, -1).unwrap();
        }
        let report = check("mm", &algo.schema(), &values, &raw(&list), &params).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn missing_vertex_is_a_divergence() {
        let list = random_graph(20, 1);
        let params = AlgoParams::default();
        let algo = by_name("cc", &params).unwrap();
        let mut values = run(algo.as_ref(), &list, 2);
        values.pop();
        let report = check("cc", &algo.schema(), &values, &raw(&list), &params).unwrap();
        assert_eq!(report.divergence.unwrap().found, "nothing");
    }

    #[test]
    fn relative_tolerance() {
        assert!(close(1.0, 1.0 + 1e-10));
        assert!(!close(1.0, 1.0 + 1e-8));
        assert!(close(0.0, 0.0));
        assert!(!close(0.0, 1e-300));
    }
}
