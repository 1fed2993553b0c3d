//! Text graph ingestion.
//!
//! Two line formats are accepted, detected from the first data line:
//!
//! * adjacency: `id<TAB>nb1 nb2 ...` (a line with a tab)
//! * edge pairs: `src dst` (whitespace separated, no tab)
//!
//! Lines starting with `#` or `%` and blank lines are skipped. Self-loops and
//! duplicate edges are dropped; `undirected` adds the reverse of every edge.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{GraphMeta, VertexId};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineFormat {
    Adjacency,
    EdgePairs,
}

/// Deduplicated, self-loop-free edge list as read from input.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EdgeList {
    /// Every vertex that appears in the input, ascending.
    pub vertices: BTreeSet<VertexId>,
    /// Directed edge records, sorted and unique.
    pub edges: BTreeSet<(VertexId, VertexId)>,
    pub directed: bool,
}

impl EdgeList {
    pub fn new(directed: bool) -> Self {
        EdgeList {
            directed,
            ..Default::default()
        }
    }

    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (VertexId, VertexId)>,
        undirected: bool,
    ) -> Self {
        let mut list = EdgeList::new(!undirected);
        for (u, v) in pairs {
            list.add_edge(u, v);
        }
        list
    }

    pub fn add_vertex(&mut self, v: VertexId) {
        self.vertices.insert(v);
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) {
        self.vertices.insert(u);
        self.vertices.insert(v);
        if u == v {
            return;
        }
        self.edges.insert((u, v));
        if !self.directed {
            self.edges.insert((v, u));
        }
    }

    /// Returns an undirected copy (every edge mirrored).
    pub fn symmetrized(&self) -> EdgeList {
        let mut out = EdgeList::new(false);
        out.vertices = self.vertices.clone();
        for &(u, v) in &self.edges {
            out.add_edge(u, v);
        }
        out
    }

    pub fn meta(&self) -> GraphMeta {
        GraphMeta {
            n: self.vertices.len() as u64,
            m: self.edges.len() as u64,
            directed: self.directed,
            schema: None,
        }
    }

    /// Writes the adjacency text format (one line per vertex, out-neighbors).
    pub fn dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut edges = self.edges.iter().peekable();
        for &v in &self.vertices {
            write!(w, "{v}\t")?;
            let mut first = true;
            while let Some(&&(_, dst)) = edges.peek().filter(|(src, _)| *src == v) {
                if !first {
                    write!(w, " ")?;
                }
                write!(w, "{dst}")?;
                first = false;
                edges.next();
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn parse_id(tok: &str, line: usize) -> Result<VertexId, IngestError> {
    let id: VertexId = tok.parse().map_err(|_| IngestError::Malformed {
        line,
        msg: format!("`{tok}` is not a vertex id"),
    })?;
    if id > i64::MAX as u64 {
        return Err(IngestError::Malformed {
            line,
            msg: format!("vertex id {id} exceeds {}", i64::MAX),
        });
    }
    Ok(id)
}

pub fn parse_str(text: &str, undirected: bool) -> Result<EdgeList, IngestError> {
    let mut list = EdgeList::new(!undirected);
    let mut format = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let trimmed = raw.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let fmt = *format.get_or_insert(if trimmed.contains('\t') {
            LineFormat::Adjacency
        } else {
            LineFormat::EdgePairs
        });
        match fmt {
            LineFormat::Adjacency => {
                let (head, rest) = trimmed.split_once('\t').ok_or(IngestError::Malformed {
                    line: lineno,
                    msg: "expected `id<TAB>neighbors`".into(),
                })?;
                let src = parse_id(head.trim(), lineno)?;
                list.add_vertex(src);
                for tok in rest.split_whitespace() {
                    let dst = parse_id(tok, lineno)?;
                    list.add_edge(src, dst);
                }
            }
            LineFormat::EdgePairs => {
                let toks: Vec<&str> = trimmed.split_whitespace().collect();
                if toks.len() != 2 {
                    return Err(IngestError::Malformed {
                        line: lineno,
                        msg: format!("expected `src dst`, found {} fields", toks.len()),
                    });
                }
                let src = parse_id(toks[0], lineno)?;
                let dst = parse_id(toks[1], lineno)?;
                list.add_edge(src, dst);
            }
        }
    }
    Ok(list)
}

pub fn ingest(path: &Path, undirected: bool) -> Result<EdgeList, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_str(&text, undirected)
}

/// Dense in-memory adjacency over an [`EdgeList`].
///
/// Internal index `i` is the rank of the external id in ascending order, so
/// comparing dense indices is the same as comparing external ids.
#[derive(Debug, Clone)]
pub struct Graph {
    ids: Vec<VertexId>,
    out_adj: Vec<Vec<u32>>,
    in_adj: Vec<Vec<u32>>,
    directed: bool,
    m: u64,
}

impl Graph {
    pub fn from_edges(list: &EdgeList) -> Graph {
        let ids: Vec<VertexId> = list.vertices.iter().copied().collect();
        let n = ids.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        let dense = |v: VertexId| ids.binary_search(&v).expect("edge endpoint registered") as u32;
        for &(u, v) in &list.edges {
            let (du, dv) = (dense(u), dense(v));
            out_adj[du as usize].push(dv);
            in_adj[dv as usize].push(du);
        }
        // edges iterate sorted by (src, dst): out lists are sorted already
        for l in &mut in_adj {
            l.sort_unstable();
        }
        Graph {
            ids,
            out_adj,
            in_adj,
            directed: list.directed,
            m: list.edges.len() as u64,
        }
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn id(&self, dense: u32) -> VertexId {
        self.ids[dense as usize]
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn dense(&self, id: VertexId) -> Option<u32> {
        self.ids.binary_search(&id).ok().map(|i| i as u32)
    }

    pub fn out_neighbors(&self, v: u32) -> &[u32] {
        &self.out_adj[v as usize]
    }

    pub fn in_neighbors(&self, v: u32) -> &[u32] {
        &self.in_adj[v as usize]
    }

    /// Sorted union of in- and out-neighbors.
    pub fn all_neighbors(&self, v: u32) -> Vec<u32> {
        if !self.directed {
            return self.out_adj[v as usize].clone();
        }
        let mut all: Vec<u32> = self.out_adj[v as usize]
            .iter()
            .chain(&self.in_adj[v as usize])
            .copied()
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn adjacency_line() {
        let g = parse_str("1\t2 4\n", false).unwrap();
        assert_eq!(
            g.edges.iter().copied().collect::<Vec<_>>(),
            vec![(1, 2), (1, 4)]
        );
        assert_eq!(g.vertices.len(), 3);
    }

    #[test]
    fn adjacency_without_neighbors() {
        let g = parse_str("1\t\n", false).unwrap();
        assert!(g.edges.is_empty());
        assert!(g.vertices.contains(&1));
    }

    #[test]
    fn dedup_and_self_loops() {
        let g = parse_str("1 2\n1 2\n3 3\n", false).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.vertices.len(), 3);
        let u = parse_str("1 2\n2 1\n", true).unwrap();
        assert_eq!(u.edges.len(), 2);
    }

    #[test]
    fn malformed_reports_line() {
        let err = parse_str("# c\n1 2\n3 x\n", false).unwrap_err();
        assert!(
            matches!(err, IngestError::Malformed { line: 3, .. }),
            "{err}"
        );
        assert!(parse_str("1 2 3\n", false).is_err());
        assert!(parse_str("9223372036854775808 1\n", false).is_err());
    }

    #[test]
    fn empty_file_is_empty_graph() {
        let g = parse_str("", false).unwrap();
        assert!(g.vertices.is_empty());
        assert_eq!(Graph::from_edges(&g).n(), 0);
    }

    #[test]
    fn sparse_ids_are_ranked() {
        let g = Graph::from_edges(&parse_str("100 7\n7 55\n", false).unwrap());
        assert_eq!(g.ids(), &[7, 55, 100]);
        assert_eq!(g.out_neighbors(g.dense(100).unwrap()), &[0]);
        assert_eq!(g.in_neighbors(g.dense(55).unwrap()), &[0]);
        assert_eq!(g.all_neighbors(0), vec![1, 2]);
    }

    proptest! {
        #[test]
        fn dump_then_ingest_is_idempotent(
            pairs in proptest::collection::vec((0u64..40, 0u64..40), 0..120),
            undirected in any::<bool>(),
        ) {
            let first = EdgeList::from_pairs(pairs, undirected);
            let mut buf = Vec::new();
            first.dump(&mut buf).unwrap();
            let again = parse_str(std::str::from_utf8(&buf).unwrap(), undirected).unwrap();
            prop_assert_eq!(&again.edges, &first.edges);
            prop_assert_eq!(&again.vertices, &first.vertices);
        }
    }
}
