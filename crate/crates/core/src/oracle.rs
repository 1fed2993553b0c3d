//! Single-machine reference implementations.
//!
//! Everything here works from the raw vertex and edge lists with plain
//! sequential code, so agreement with the engine says something.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::model::{VertexId, INT_MAX};

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("no oracle named `{0}`")]
    UnknownName(String),
    #[error("`{0}` needs a source vertex present in the graph")]
    Source(String),
    #[error("`{0}` validates an engine result; none was given")]
    MissingCandidate(String),
    #[error("triangle oracles disagree: intersection {fast}, enumeration {brute}")]
    SelfCheck { fast: u64, brute: u64 },
}

/// Input as read, before any engine-side processing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawGraph {
    pub vertices: BTreeSet<VertexId>,
    pub edges: BTreeSet<(VertexId, VertexId)>,
    pub directed: bool,
}

impl RawGraph {
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
        directed: bool,
    ) -> Self {
        let mut vs: BTreeSet<VertexId> = vertices.into_iter().collect();
        let mut es = BTreeSet::new();
        for (u, v) in edges {
            vs.insert(u);
            vs.insert(v);
            if u != v {
                es.insert((u, v));
                if !directed {
                    es.insert((v, u));
                }
            }
        }
        RawGraph {
            vertices: vs,
            edges: es,
            directed,
        }
    }

    fn out_adjacency(&self) -> BTreeMap<VertexId, Vec<VertexId>> {
        let mut adj: BTreeMap<VertexId, Vec<VertexId>> =
            self.vertices.iter().map(|&v| (v, Vec::new())).collect();
        for &(u, v) in &self.edges {
            adj.get_mut(&u).unwrap().push(v);
        }
        adj
    }

    /// Both directions merged, sorted, no duplicates.
    fn undirected_adjacency(&self) -> BTreeMap<VertexId, Vec<VertexId>> {
        let mut sets: BTreeMap<VertexId, BTreeSet<VertexId>> = self
            .vertices
            .iter()
            .map(|&v| (v, BTreeSet::new()))
            .collect();
        for &(u, v) in &self.edges {
            sets.get_mut(&u).unwrap().insert(v);
            sets.get_mut(&v).unwrap().insert(u);
        }
        sets.into_iter()
            .map(|(v, s)| (v, s.into_iter().collect()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleParams {
    pub source: Option<VertexId>,
    pub damping: f64,
    pub iterations: u32,
    /// Engine output to check, for the `validate_*` names.
    pub candidate: Option<BTreeMap<VertexId, i64>>,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            source: None,
            damping: 0.85,
            iterations: 10,
            candidate: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleResult {
    Ints(BTreeMap<VertexId, i64>),
    Floats(BTreeMap<VertexId, f64>),
    Count(u64),
    /// Validator outcome: `None` when the candidate is valid.
    Verdict(Option<String>),
}

pub const NAMES: [&str; 9] = [
    "bfs",
    "cc",
    "pr",
    "ppr",
    "core",
    "color",
    "tc",
    "validate_mis",
    "validate_mm",
];

pub fn oracle_run(
    name: &str,
    g: &RawGraph,
    params: &OracleParams,
) -> Result<OracleResult, OracleError> {
    let source = || {
        params
            .source
            .filter(|s| g.vertices.contains(s))
            .ok_or_else(|| OracleError::Source(name.to_string()))
    };
    let candidate = || {
        params
            .candidate
            .as_ref()
            .ok_or_else(|| OracleError::MissingCandidate(name.to_string()))
    };
    Ok(match name {
        "bfs" => OracleResult::Ints(bfs(g, source()?)),
        "cc" => OracleResult::Ints(components(g)),
        "pr" => OracleResult::Floats(pagerank(g, params.damping, params.iterations, None)),
        "ppr" => OracleResult::Floats(pagerank(
            g,
            params.damping,
            params.iterations,
            Some(source()?),
        )),
        "core" => OracleResult::Ints(coreness(g)),
        "color" => OracleResult::Ints(greedy_coloring(g)),
        "tc" => {
            let fast = triangles(g);
            if g.vertices.len() <= 60 {
                let brute = triangles_brute(g);
                if brute != fast {
                    return Err(OracleError::SelfCheck { fast, brute });
                }
            }
            OracleResult::Count(fast)
        }
        "validate_mis" => {
            let set = candidate()?
                .iter()
                .filter(|(_, &x)| x == 1)
                .map(|(&v, _)| v)
                .collect();
            OracleResult::Verdict(validate_mis(g, &set).err())
        }
        "validate_mm" => OracleResult::Verdict(validate_mm(g, candidate()?).err()),
        other => return Err(OracleError::UnknownName(other.to_string())),
    })
}

/// Hop distances along out-edges; unreachable vertices get `INT_MAX`.
pub fn bfs(g: &RawGraph, source: VertexId) -> BTreeMap<VertexId, i64> {
    let adj = g.out_adjacency();
    let mut dist: BTreeMap<VertexId, i64> = g.vertices.iter().map(|&v| (v, INT_MAX)).collect();
    let mut queue = VecDeque::new();
    dist.insert(source, 0);
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let d = dist[&u];
        for &v in &adj[&u] {
            if dist[&v] == INT_MAX {
                dist.insert(v, d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Largest finite distance from the source.
pub fn eccentricity(g: &RawGraph, source: VertexId) -> i64 {
    bfs(g, source)
        .values()
        .copied()
        .filter(|&d| d != INT_MAX)
        .max()
        .unwrap_or(0)
}

/// Union-find over undirected edges; label = smallest id in the component.
pub fn components(g: &RawGraph) -> BTreeMap<VertexId, i64> {
    let ids: Vec<VertexId> = g.vertices.iter().copied().collect();
    let index: BTreeMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(u, v) in &g.edges {
        let (a, b) = (find(&mut parent, index[&u]), find(&mut parent, index[&v]));
        // ids are sorted, so the smaller index is the smaller id
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        parent[hi] = lo;
    }
    (0..ids.len())
        .map(|i| (ids[i], ids[find(&mut parent, i)] as i64))
        .collect()
}

/// Synchronous power iteration with the same leak rule for vertices without
/// out-edges. `source` switches to personalized teleport.
pub fn pagerank(
    g: &RawGraph,
    damping: f64,
    iterations: u32,
    source: Option<VertexId>,
) -> BTreeMap<VertexId, f64> {
    let ids: Vec<VertexId> = g.vertices.iter().copied().collect();
    let n = ids.len();
    let index: BTreeMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut out_deg = vec![0usize; n];
    for &(u, _) in &g.edges {
        out_deg[index[&u]] += 1;
    }
    let teleport: Vec<f64> = match source {
        None => vec![1.0 / n as f64; n],
        Some(s) => (0..n)
            .map(|i| if ids[i] == s { 1.0 } else { 0.0 })
            .collect(),
    };
    let mut rank = teleport.clone();
    for _ in 0..iterations {
        let mut flow = vec![0.0; n];
        for &(u, v) in &g.edges {
            let i = index[&u];
            flow[index[&v]] += rank[i] / out_deg[i] as f64;
        }
        rank = (0..n)
            .map(|i| (1.0 - damping) * teleport[i] + damping * flow[i])
            .collect();
    }
    ids.into_iter().zip(rank).collect()
}

/// Min-degree peeling on the undirected graph.
pub fn coreness(g: &RawGraph) -> BTreeMap<VertexId, i64> {
    let adj = g.undirected_adjacency();
    let mut deg: BTreeMap<VertexId, usize> = adj.iter().map(|(&v, nb)| (v, nb.len())).collect();
    let mut queue: BTreeSet<(usize, VertexId)> = deg.iter().map(|(&v, &d)| (d, v)).collect();
    let mut core = BTreeMap::new();
    let mut k = 0;
    while let Some((d, v)) = queue.pop_first() {
        k = k.max(d);
        core.insert(v, k as i64);
        for u in &adj[&v] {
            if core.contains_key(u) {
                continue;
            }
            let du = deg.get_mut(u).unwrap();
            queue.remove(&(*du, *u));
            *du -= 1;
            queue.insert((*du, *u));
        }
    }
    core
}

/// Sequential greedy in descending `(degree, id)` order.
pub fn greedy_coloring(g: &RawGraph) -> BTreeMap<VertexId, i64> {
    let adj = g.undirected_adjacency();
    let mut order: Vec<(usize, VertexId)> = adj.iter().map(|(&v, nb)| (nb.len(), v)).collect();
    order.sort_unstable_by(|a, b| b.cmp(a));
    let mut color: BTreeMap<VertexId, i64> = BTreeMap::new();
    for (_, v) in order {
        let used: BTreeSet<i64> = adj[&v]
            .iter()
            .filter_map(|u| color.get(u).copied())
            .collect();
        let c = (0..).find(|c| !used.contains(c)).unwrap();
        color.insert(v, c);
    }
    color
}

/// Triangles via sorted adjacency intersection, each counted at its
/// smallest-id corner.
pub fn triangles(g: &RawGraph) -> u64 {
    let adj = g.undirected_adjacency();
    let mut total = 0;
    for (&u, nu) in &adj {
        for &v in nu.iter().filter(|&&v| v > u) {
            let nv = &adj[&v];
            let (mut i, mut j) = (0, 0);
            while i < nu.len() && j < nv.len() {
                match nu[i].cmp(&nv[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        if nu[i] > v {
                            total += 1;
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
    total
}

/// Every vertex triple, tested against an adjacency matrix.
pub fn triangles_brute(g: &RawGraph) -> u64 {
    let ids: Vec<VertexId> = g.vertices.iter().copied().collect();
    let n = ids.len();
    let index: BTreeMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut m = vec![vec![false; n]; n];
    for &(u, v) in &g.edges {
        let (a, b) = (index[&u], index[&v]);
        m[a][b] = true;
        m[b][a] = true;
    }
    let mut total = 0;
    for a in 0..n {
        for b in a + 1..n {
            if !m[a][b] {
                continue;
            }
            total += (b + 1..n).filter(|&c| m[a][c] && m[b][c]).count() as u64;
        }
    }
    total
}

/// Independent: no edge inside the set. Maximal: every outside vertex has a
/// neighbor inside.
pub fn validate_mis(g: &RawGraph, set: &BTreeSet<VertexId>) -> Result<(), String> {
    let adj = g.undirected_adjacency();
    if let Some(v) = set.iter().find(|v| !adj.contains_key(v)) {
        return Err(format!("vertex {v} is not in the graph"));
    }
    for (&v, nb) in &adj {
        let inside = nb.iter().find(|u| set.contains(u));
        match (set.contains(&v), inside) {
            (true, Some(u)) => {
                return Err(format!(
                    "vertices {v} and {u} are adjacent and both in the set"
                ))
            }
            (false, None) => return Err(format!("vertex {v} could join the set")),
            _ => {}
        }
    }
    Ok(())
}

/// `partner` maps each vertex to its mate or -1. Checks symmetry, that mates
/// are adjacent, and that no edge joins two unmatched vertices.
pub fn validate_mm(g: &RawGraph, partner: &BTreeMap<VertexId, i64>) -> Result<(), String> {
    let adj = g.undirected_adjacency();
    let mate = |v: VertexId| partner.get(&v).copied();
    for (&v, nb) in &adj {
        let p = mate(v).ok_or_else(|| format!("vertex {v} has no entry"))?;
        if p == -1 {
            if let Some(u) = nb.iter().find(|&&u| mate(u) == Some(-1)) {
                return Err(format!("edge ({v}, {u}) joins two unmatched vertices"));
            }
            continue;
        }
        let u = p as VertexId;
        if nb.binary_search(&u).is_err() {
            return Err(format!("vertex {v} is matched to non-neighbor {p}"));
        }
        if mate(u) != Some(v as i64) {
            return Err(format!(
                "vertex {v} is matched to {u}, which is matched to {:?}",
                mate(u)
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn undirected(pairs: &[(u64, u64)]) -> RawGraph {
        RawGraph::new([], pairs.iter().copied(), false)
    }

    fn k(n: u64) -> RawGraph {
        undirected(
            &(1..=n)
                .flat_map(|a| (a + 1..=n).map(move |b| (a, b)))
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn bfs_on_path() {
        let g = undirected(&[(1, 2), (2, 3)]);
        assert_eq!(bfs(&g, 1).into_values().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(eccentricity(&g, 1), 2);
        assert_eq!(eccentricity(&g, 2), 1);
    }

    #[test]
    fn components_take_min_id() {
        let g = RawGraph::new([9], [(5, 3), (3, 4), (7, 8)], false);
        let cc: Vec<_> = components(&g).into_iter().collect();
        assert_eq!(cc, vec![(3, 3), (4, 3), (5, 3), (7, 7), (8, 7), (9, 9)]);
    }

    #[test]
    fn coreness_examples() {
        assert_eq!(
            coreness(&k(3)).into_values().collect::<Vec<_>>(),
            vec![2, 2, 2]
        );
        assert!(coreness(&undirected(&[(1, 2), (1, 3), (1, 4), (1, 5)]))
            .values()
            .all(|&c| c == 1));
        let g = RawGraph::new([7], [(1, 2), (2, 3), (1, 3), (3, 4)], false);
        assert_eq!(
            coreness(&g).into_values().collect::<Vec<_>>(),
            vec![2, 2, 2, 1, 0]
        );
    }

    #[test]
    fn greedy_coloring_on_triangle() {
        assert_eq!(
            greedy_coloring(&k(3)).into_values().collect::<Vec<_>>(),
            vec![2, 1, 0]
        );
    }

    #[test]
    fn triangle_counts() {
        assert_eq!(triangles(&k(3)), 1);
        assert_eq!(triangles(&k(4)), 4);
        assert_eq!(triangles(&k(6)), 20);
        assert_eq!(triangles_brute(&k(6)), 20);
    }

    #[test]
    fn pagerank_star() {
        let g = RawGraph::new([], [(2, 1), (3, 1), (4, 1)], true);
        let r = pagerank(&g, 0.85, 1, None);
        assert!((r[&1] - 0.675).abs() < 1e-15);
        let p = pagerank(&RawGraph::new([], [(1, 2), (2, 1)], true), 0.85, 1, Some(1));
        assert!((p[&1] - 0.15).abs() < 1e-15 && (p[&2] - 0.85).abs() < 1e-15);
    }

    #[test]
    fn validators() {
        let path = undirected(&[(1, 2), (2, 3)]);
        assert!(validate_mis(&path, &[1, 3].into()).is_ok());
        assert!(validate_mis(&path, &[2].into()).is_ok());
        assert!(validate_mis(&path, &[1, 2].into()).is_err());
        assert!(validate_mis(&path, &[1].into()).is_err());

        let ok: BTreeMap<_, _> = [(1, 2), (2, 1), (3, -1)].into();
        assert!(validate_mm(&path, &ok).is_ok());
        let lonely: BTreeMap<_, _> = [(1, -1), (2, -1), (3, -1)].into();
        assert!(validate_mm(&path, &lonely).is_err());
        let one_sided: BTreeMap<_, _> = [(1, 2), (2, 3), (3, 2)].into();
        assert!(validate_mm(&path, &one_sided).is_err());
        let far: BTreeMap<_, _> = [(1, 3), (3, 1), (2, -1)].into();
        assert!(validate_mm(&path, &far).is_err());
    }

    #[test]
    fn run_by_name() {
        let g = k(4);
        assert_eq!(
            oracle_run("tc", &g, &OracleParams::default()),
            Ok(OracleResult::Count(4))
        );
        assert!(matches!(
            oracle_run("bfs", &g, &OracleParams::default()),
            Err(OracleError::Source(_))
        ));
        assert!(matches!(
            oracle_run("nope", &g, &OracleParams::default()),
            Err(OracleError::UnknownName(_))
        ));
        assert!(matches!(
            oracle_run("validate_mm", &g, &OracleParams::default()),
            Err(OracleError::MissingCandidate(_))
        ));
        let params = OracleParams {
            candidate: Some([(1, 1), (2, 0), (3, 0), (4, 0)].into()),
            ..Default::default()
        };
        assert_eq!(
            oracle_run("validate_mis", &g, &params),
            Ok(OracleResult::Verdict(None))
        );
    }

    #[test]
    fn triangle_oracles_agree_on_random_graphs() {
        let mut state = 12345u64;
        for n in [5u64, 20, 45, 60] {
            let mut edges = Vec::new();
            for a in 1..=n {
                for b in a + 1..=n {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    if state >> 60 < 5 {
                        edges.push((a, b));
                    }
                }
            }
            let g = undirected(&edges);
            assert_eq!(triangles(&g), triangles_brute(&g));
        }
    }
}
