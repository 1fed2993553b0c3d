//! Hash partitioning with one-hop guest replication and the dual neighbor index.
//!
//! Every worker owns a set of host vertices. Any neighbor of a host that lives
//! on another worker gets a read-only guest copy, so each host can evaluate its
//! expression against purely local data. Local vertices (hosts and guests) are
//! addressed by [`Slot`], the rank of the vertex id among all local ids.

use std::borrow::Cow;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::ingest::Graph;
use crate::model::VertexId;

pub type WorkerId = usize;

/// Index into a worker's local vertex table.
pub type Slot = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("worker {worker}: host {host} references vertex {missing} which is not local")]
    Dangling {
        worker: WorkerId,
        host: VertexId,
        missing: VertexId,
    },
}

/// Which neighbors an expression reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccessMode {
    In,
    Out,
    All,
}

/// Placement of vertices onto workers.
pub trait Placement: Send + Sync {
    fn worker_of(&self, v: VertexId, k: usize) -> WorkerId;
}

/// `id mod k`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ModuloPlacement;

impl Placement for ModuloPlacement {
    fn worker_of(&self, v: VertexId, k: usize) -> WorkerId {
        (v % k as u64) as WorkerId
    }
}

pub fn assign_worker(v: VertexId, k: usize) -> Result<WorkerId, PartitionError> {
    if k == 0 {
        return Err(PartitionError::NoWorkers);
    }
    Ok(ModuloPlacement.worker_of(v, k))
}

/// Degrees in the full input graph. For undirected graphs all three agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Degree {
    pub in_deg: u32,
    pub out_deg: u32,
    /// Number of distinct neighbors in either direction.
    pub deg: u32,
}

/// One worker's vertex layout: hosts, guests and the guest directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub worker: WorkerId,
    pub workers: usize,
    pub directed: bool,
    /// Total vertex count of the whole graph.
    pub global_n: u64,
    ids: Vec<VertexId>,
    is_host: Vec<bool>,
    owners: Vec<WorkerId>,
    degrees: Vec<Degree>,
    hosts: Vec<Slot>,
    /// Per host slot: remote workers holding a guest copy, ascending.
    directory: Vec<Vec<WorkerId>>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, slot: Slot) -> VertexId {
        self.ids[slot as usize]
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn slot(&self, id: VertexId) -> Option<Slot> {
        self.ids.binary_search(&id).ok().map(|s| s as Slot)
    }

    pub fn is_host(&self, slot: Slot) -> bool {
        self.is_host[slot as usize]
    }

    pub fn owner(&self, slot: Slot) -> WorkerId {
        self.owners[slot as usize]
    }

    pub fn degree(&self, slot: Slot) -> Degree {
        self.degrees[slot as usize]
    }

    /// Host slots, ascending by id.
    pub fn hosts(&self) -> &[Slot] {
        &self.hosts
    }

    pub fn guests(&self) -> impl Iterator<Item = Slot> + '_ {
        (0..self.ids.len() as Slot).filter(move |&s| !self.is_host(s))
    }

    pub fn host_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.hosts.iter().map(move |&s| self.id(s))
    }

    pub fn guest_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.guests().map(move |s| self.id(s))
    }

    /// Remote workers that hold a guest copy of the host at `slot`.
    pub fn guest_workers(&self, slot: Slot) -> &[WorkerId] {
        &self.directory[slot as usize]
    }
}

fn degree_of(graph: &Graph, v: u32) -> Degree {
    Degree {
        in_deg: graph.in_neighbors(v).len() as u32,
        out_deg: graph.out_neighbors(v).len() as u32,
        deg: graph.all_neighbors(v).len() as u32,
    }
}

pub fn build_partitions(graph: &Graph, k: usize) -> Result<Vec<Partition>, PartitionError> {
    build_partitions_with(graph, k, &ModuloPlacement)
}

pub fn build_partitions_with(
    graph: &Graph,
    k: usize,
    placement: &dyn Placement,
) -> Result<Vec<Partition>, PartitionError> {
    if k == 0 {
        return Err(PartitionError::NoWorkers);
    }
    let n = graph.n();
    let owner: Vec<WorkerId> = graph
        .ids()
        .iter()
        .map(|&id| placement.worker_of(id, k))
        .collect();
    let neighbors: Vec<Vec<u32>> = (0..n as u32).map(|v| graph.all_neighbors(v)).collect();

    let mut local: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); k];
    for v in 0..n {
        local[owner[v]].insert(v as u32);
        for &u in &neighbors[v] {
            local[owner[v]].insert(u);
        }
    }

    let parts = local
        .into_iter()
        .enumerate()
        .map(|(w, members)| {
            let dense: Vec<u32> = members.into_iter().collect();
            let is_host: Vec<bool> = dense.iter().map(|&v| owner[v as usize] == w).collect();
            let hosts = is_host
                .iter()
                .enumerate()
                .filter(|(_, h)| **h)
                .map(|(s, _)| s as Slot)
                .collect();
            let directory = dense
                .iter()
                .zip(&is_host)
                .map(|(&v, &host)| {
                    if !host {
                        return Vec::new();
                    }
                    let remote: BTreeSet<WorkerId> = neighbors[v as usize]
                        .iter()
                        .map(|&u| owner[u as usize])
                        .filter(|&o| o != w)
                        .collect();
                    remote.into_iter().collect()
                })
                .collect();
            Partition {
                worker: w,
                workers: k,
                directed: graph.directed(),
                global_n: n as u64,
                ids: dense.iter().map(|&v| graph.id(v)).collect(),
                owners: dense.iter().map(|&v| owner[v as usize]).collect(),
                degrees: dense.iter().map(|&v| degree_of(graph, v)).collect(),
                is_host,
                hosts,
                directory,
            }
        })
        .collect();
    Ok(parts)
}

/// Per-vertex neighbor lists `N(v,w)` (hosts only) and inverse lists `I(v,w)`
/// (every local vertex).
///
/// Undirected graphs keep a single neighbor list in the `out` position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualNeighborIndex {
    pub(crate) directed: bool,
    pub(crate) ids: Vec<VertexId>,
    pub(crate) is_host: Vec<bool>,
    pub(crate) in_lists: Vec<Vec<Slot>>,
    pub(crate) out_lists: Vec<Vec<Slot>>,
    pub(crate) inverse: Vec<Vec<Slot>>,
}

impl DualNeighborIndex {
    pub fn len(&self) -> usize {
        self.inverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inverse.is_empty()
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn id(&self, slot: Slot) -> VertexId {
        self.ids[slot as usize]
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn is_host(&self, slot: Slot) -> bool {
        self.is_host[slot as usize]
    }

    pub fn neighbors(&self, slot: Slot, mode: AccessMode) -> Cow<'_, [Slot]> {
        let s = slot as usize;
        select_neighbors(self.directed, &self.in_lists[s], &self.out_lists[s], mode)
    }

    pub fn inverse(&self, slot: Slot) -> &[Slot] {
        &self.inverse[slot as usize]
    }

    pub(crate) fn raw_lists(&self, slot: Slot) -> (&[Slot], &[Slot], &[Slot]) {
        let s = slot as usize;
        (&self.in_lists[s], &self.out_lists[s], &self.inverse[s])
    }
}

/// Applies an access mode to a record's stored in/out lists.
pub(crate) fn select_neighbors<'a>(
    directed: bool,
    ins: &'a [Slot],
    outs: &'a [Slot],
    mode: AccessMode,
) -> Cow<'a, [Slot]> {
    if !directed {
        return Cow::Borrowed(outs);
    }
    match mode {
        AccessMode::In => Cow::Borrowed(ins),
        AccessMode::Out => Cow::Borrowed(outs),
        AccessMode::All => Cow::Owned(merge_sorted(ins, outs)),
    }
}

fn merge_sorted(a: &[Slot], b: &[Slot]) -> Vec<Slot> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn build_dual_index(p: &Partition, graph: &Graph) -> Result<DualNeighborIndex, PartitionError> {
    let len = p.len();
    let mut in_lists = vec![Vec::new(); len];
    let mut out_lists = vec![Vec::new(); len];
    let mut inverse: Vec<Vec<Slot>> = vec![Vec::new(); len];

    let to_local = |host: Slot, dense: &[u32]| -> Result<Vec<Slot>, PartitionError> {
        dense
            .iter()
            .map(|&u| {
                let id = graph.id(u);
                p.slot(id).ok_or(PartitionError::Dangling {
                    worker: p.worker,
                    host: p.id(host),
                    missing: id,
                })
            })
            .collect()
    };

    for &h in p.hosts() {
        let dense = graph.dense(p.id(h)).expect("host exists in graph");
        // graph adjacency is sorted by dense index, which orders like ids and slots
        out_lists[h as usize] = to_local(h, graph.out_neighbors(dense))?;
        if p.directed {
            in_lists[h as usize] = to_local(h, graph.in_neighbors(dense))?;
        }
        let all = select_neighbors(
            p.directed,
            &in_lists[h as usize],
            &out_lists[h as usize],
            AccessMode::All,
        )
        .into_owned();
        for u in all {
            inverse[u as usize].push(h);
        }
    }
    // hosts are visited ascending, so every inverse list is already sorted
    Ok(DualNeighborIndex {
        directed: p.directed,
        ids: p.ids.clone(),
        is_host: p.is_host.clone(),
        in_lists,
        out_lists,
        inverse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::EdgeList;
    use std::collections::{BTreeMap, BTreeSet};

    fn five_vertex_graph() -> Graph {
        Graph::from_edges(&EdgeList::from_pairs(
            [(1, 2), (1, 4), (2, 3), (2, 5), (4, 5)],
            true,
        ))
    }

    fn ids_of(p: &Partition, slots: &[Slot]) -> Vec<VertexId> {
        slots.iter().map(|&s| p.id(s)).collect()
    }

    #[test]
    fn assignment() {
        assert_eq!(assign_worker(12345, 1).unwrap(), 0);
        assert_eq!(assign_worker(1, 0), Err(PartitionError::NoWorkers));
        let a = assign_worker(1_000_000_000, 7).unwrap();
        assert!(a < 7);
        assert_eq!(a, assign_worker(1_000_000_000, 7).unwrap());
        let w = |v| assign_worker(v, 3).unwrap();
        assert_eq!(w(1), w(4));
        assert_eq!(w(2), w(5));
        assert!(w(3) != w(1) && w(3) != w(2) && w(1) != w(2));
    }

    #[test]
    fn five_vertex_guests() {
        let parts = build_partitions(&five_vertex_graph(), 3).unwrap();
        let w1 = &parts[1];
        let w2 = &parts[2];
        let w3 = &parts[0];
        assert_eq!(w1.host_ids().collect::<Vec<_>>(), vec![1, 4]);
        assert_eq!(w1.guest_ids().collect::<Vec<_>>(), vec![2, 5]);
        assert_eq!(w2.guest_ids().collect::<Vec<_>>(), vec![1, 3, 4]);
        assert_eq!(w3.guest_ids().collect::<Vec<_>>(), vec![2]);
        let v2 = w2.slot(2).unwrap();
        assert_eq!(w2.guest_workers(v2), &[0, 1]);
    }

    #[test]
    fn five_vertex_dual_index() {
        let g = five_vertex_graph();
        let parts = build_partitions(&g, 3).unwrap();
        let idx: Vec<_> = parts
            .iter()
            .map(|p| build_dual_index(p, &g).unwrap())
            .collect();
        let (w1, w2, w3) = (&parts[1], &parts[2], &parts[0]);
        let v2 = w2.slot(2).unwrap();
        assert_eq!(
            ids_of(w2, &idx[2].neighbors(v2, AccessMode::All)),
            vec![1, 3, 5]
        );
        assert_eq!(ids_of(w2, idx[2].inverse(v2)), vec![5]);
        assert_eq!(ids_of(w1, idx[1].inverse(w1.slot(2).unwrap())), vec![1]);
        assert_eq!(ids_of(w3, idx[0].inverse(w3.slot(2).unwrap())), vec![3]);
    }

    #[test]
    fn single_worker_has_no_guests() {
        let parts = build_partitions(&five_vertex_graph(), 1).unwrap();
        assert_eq!(parts[0].guests().count(), 0);
        assert!(parts[0]
            .hosts()
            .iter()
            .all(|&h| parts[0].guest_workers(h).is_empty()));
    }

    #[test]
    fn dangling_reference_is_reported() {
        let g = five_vertex_graph();
        let mut p = build_partitions(&g, 3).unwrap().remove(1);
        // drop guest v2 from worker 1's table
        let s = p.slot(2).unwrap() as usize;
        p.ids.remove(s);
        p.is_host.remove(s);
        p.owners.remove(s);
        p.degrees.remove(s);
        p.directory.remove(s);
        p.hosts = (0..p.ids.len() as Slot)
            .filter(|&x| p.is_host[x as usize])
            .collect();
        assert!(matches!(
            build_dual_index(&p, &g),
            Err(PartitionError::Dangling { missing: 2, .. })
        ));
    }

    /// Random simple graph from a seeded LCG, independent of the engine RNG.
    fn random_edges(n: u64, p_permille: u64, seed: u64, undirected: bool) -> EdgeList {
        let mut state = seed;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 33) % 1000
        };
        let mut list = EdgeList::new(!undirected);
        for v in 0..n {
            list.add_vertex(v);
        }
        for u in 0..n {
            for v in 0..n {
                if u != v && next() < p_permille {
                    list.add_edge(u, v);
                }
            }
        }
        list
    }

    #[test]
    fn lani_completeness_against_raw_adjacency() {
        for directed in [false, true] {
            let raw = random_edges(50, 100, 3, !directed);
            let mut oracle: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
            for &(u, v) in &raw.edges {
                oracle.entry(u).or_default().insert(v);
                oracle.entry(v).or_default().insert(u);
            }
            let g = Graph::from_edges(&raw);
            let parts = build_partitions(&g, 4).unwrap();
            let mut hosts_seen = BTreeSet::new();
            for p in &parts {
                let idx = build_dual_index(p, &g).unwrap();
                for &h in p.hosts() {
                    assert!(hosts_seen.insert(p.id(h)));
                    let got: BTreeSet<_> = ids_of(p, &idx.neighbors(h, AccessMode::All))
                        .into_iter()
                        .collect();
                    assert_eq!(got, oracle.get(&p.id(h)).cloned().unwrap_or_default());
                }
                // guest minimality
                for guest in p.guests() {
                    assert!(!idx.inverse(guest).is_empty());
                }
            }
            assert_eq!(hosts_seen.len(), g.n());
        }
    }

    #[test]
    fn inverse_is_transpose_of_neighbor_lists() {
        for (k, seed) in [(1, 1), (2, 2), (3, 3), (5, 4), (8, 5)] {
            let raw = random_edges(120, 60, seed, seed % 2 == 0);
            let g = Graph::from_edges(&raw);
            for p in build_partitions(&g, k).unwrap() {
                let idx = build_dual_index(&p, &g).unwrap();
                for x in 0..p.len() as Slot {
                    for &h in p.hosts() {
                        let in_n = idx.neighbors(h, AccessMode::All).contains(&x);
                        let in_i = idx.inverse(x).contains(&h);
                        assert_eq!(
                            in_n,
                            in_i,
                            "worker {} x={} h={}",
                            p.worker,
                            p.id(x),
                            p.id(h)
                        );
                    }
                }
                // directory entry exists iff a host on that worker references us
                for &h in p.hosts() {
                    for &w in p.guest_workers(h) {
                        assert_ne!(w, p.worker);
                    }
                }
            }
        }
    }

    #[test]
    fn directory_matches_remote_guests() {
        let raw = random_edges(80, 50, 9, true);
        let g = Graph::from_edges(&raw);
        let parts = build_partitions(&g, 4).unwrap();
        for p in &parts {
            for &h in p.hosts() {
                let id = p.id(h);
                let holders: Vec<WorkerId> = parts
                    .iter()
                    .filter(|q| q.worker != p.worker && q.slot(id).is_some())
                    .map(|q| q.worker)
                    .collect();
                assert_eq!(p.guest_workers(h), holders.as_slice());
            }
        }
    }

    #[test]
    fn deterministic_build() {
        let raw = random_edges(60, 80, 11, false);
        let g = Graph::from_edges(&raw);
        let a = build_partitions(&g, 3).unwrap();
        let b = build_partitions(&g, 3).unwrap();
        assert_eq!(a, b);
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(
                build_dual_index(p, &g).unwrap(),
                build_dual_index(q, &g).unwrap()
            );
        }
    }
}
