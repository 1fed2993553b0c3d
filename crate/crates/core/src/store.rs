//! Semi-cached index storage.
//!
//! Vertex values stay in memory; the dual neighbor index of each worker is
//! written to a segment file and read back one vertex record at a time. Each
//! record is located through an in-memory offset table and fetched with a
//! single contiguous read into a reusable buffer.
//!
//! Segment file layout (little-endian):
//!
//! ```text
//! header : magic "G3SI" | version u32 | flags u32 (bit 0 = directed) | records u64
//! record : id u64 | host u8 | n_in u32 | n_out u32 | n_inv u32
//!          | n_in + n_out + n_inv slot entries (u32 each)
//! ```
//!
//! The offset sidecar holds `(id u64, offset u64)` pairs sorted by id; the
//! position of a pair is the vertex's local slot.

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::VertexId;
use crate::partition::{AccessMode, DualNeighborIndex, Slot};

pub const MAGIC: &[u8; 4] = b"G3SI";
pub const VERSION: u32 = 1;
pub const FILE_HEADER_LEN: u64 = 20;
pub const RECORD_HEADER_LEN: usize = 21;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: corrupt segment ({msg})")]
    Corrupt { path: PathBuf, msg: String },
    #[error("vertex {0} is not stored on this worker")]
    UnknownVertex(VertexId),
    #[error("vertex {0} is a guest; neighbor lists exist only for hosts")]
    NotHost(VertexId),
    #[error("store mode can only change before the engine starts")]
    ModeLocked,
    #[error("disk mode requested but no segment file is attached")]
    NoSegment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreMode {
    Disk,
    Memory,
}

/// One audited index read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccessRecord {
    pub superstep: u32,
    pub vertex: VertexId,
    pub offset: u64,
    pub len: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentPaths {
    pub segment: PathBuf,
    pub offsets: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Writes `worker-<w>.seg` and `worker-<w>.off` under `dir`.
pub fn write_segments(
    worker: usize,
    idx: &DualNeighborIndex,
    dir: &Path,
) -> Result<SegmentPaths, StoreError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let paths = SegmentPaths {
        segment: dir.join(format!("worker-{worker}.seg")),
        offsets: dir.join(format!("worker-{worker}.off")),
    };
    let seg = File::create(&paths.segment).map_err(io_err(&paths.segment))?;
    let mut seg = BufWriter::new(seg);
    let mut table = Vec::with_capacity(idx.len() * 16);

    let mut write = || -> io::Result<()> {
        seg.write_all(MAGIC)?;
        seg.write_all(&VERSION.to_le_bytes())?;
        seg.write_all(&(idx.directed() as u32).to_le_bytes())?;
        seg.write_all(&(idx.len() as u64).to_le_bytes())?;
        let mut offset = FILE_HEADER_LEN;
        for slot in 0..idx.len() as Slot {
            let (ins, outs, inv) = idx.raw_lists(slot);
            table.extend_from_slice(&idx.id(slot).to_le_bytes());
            table.extend_from_slice(&offset.to_le_bytes());
            seg.write_all(&idx.id(slot).to_le_bytes())?;
            seg.write_all(&[idx.is_host(slot) as u8])?;
            for list in [ins, outs, inv] {
                seg.write_all(&(list.len() as u32).to_le_bytes())?;
            }
            for list in [ins, outs, inv] {
                for s in list {
                    seg.write_all(&s.to_le_bytes())?;
                }
            }
            offset += (RECORD_HEADER_LEN + 4 * (ins.len() + outs.len() + inv.len())) as u64;
        }
        seg.flush()
    };
    write().map_err(io_err(&paths.segment))?;
    fs::write(&paths.offsets, &table).map_err(io_err(&paths.offsets))?;
    Ok(paths)
}

/// A decoded record view over either an in-memory index or a read buffer.
struct Record<'a> {
    host: bool,
    ins: Entries<'a>,
    outs: Entries<'a>,
    inv: Entries<'a>,
}

#[derive(Clone, Copy)]
enum Entries<'a> {
    Words(&'a [Slot]),
    Bytes(&'a [u8]),
}

impl<'a> Entries<'a> {
    fn len(&self) -> usize {
        match self {
            Entries::Words(w) => w.len(),
            Entries::Bytes(b) => b.len() / 4,
        }
    }

    fn get(&self, i: usize) -> Slot {
        match self {
            Entries::Words(w) => w[i],
            Entries::Bytes(b) => u32::from_le_bytes(b[4 * i..4 * i + 4].try_into().unwrap()),
        }
    }
}

/// Sorted slot list returned by index reads; a directed `All` read is the
/// merged, deduplicated union of the in and out lists.
#[derive(Clone)]
pub struct SlotList<'a> {
    a: Entries<'a>,
    b: Option<Entries<'a>>,
    i: usize,
    j: usize,
}

impl<'a> SlotList<'a> {
    fn single(a: Entries<'a>) -> Self {
        SlotList {
            a,
            b: None,
            i: 0,
            j: 0,
        }
    }

    fn union(a: Entries<'a>, b: Entries<'a>) -> Self {
        SlotList {
            a,
            b: Some(b),
            i: 0,
            j: 0,
        }
    }
}

impl Iterator for SlotList<'_> {
    type Item = Slot;

    fn next(&mut self) -> Option<Slot> {
        let next_a = (self.i < self.a.len()).then(|| self.a.get(self.i));
        let next_b = match &self.b {
            Some(b) if self.j < b.len() => Some(b.get(self.j)),
            _ => None,
        };
        match (next_a, next_b) {
            (None, None) => None,
            (Some(x), None) => {
                self.i += 1;
                Some(x)
            }
            (None, Some(y)) => {
                self.j += 1;
                Some(y)
            }
            (Some(x), Some(y)) => {
                if x <= y {
                    self.i += 1;
                }
                if y <= x {
                    self.j += 1;
                }
                Some(x.min(y))
            }
        }
    }
}

struct DiskSegment {
    path: PathBuf,
    file: File,
    directed: bool,
    ids: Vec<VertexId>,
    /// `offsets[i]..offsets[i + 1]` is record `i`; the last entry is the file end.
    offsets: Vec<u64>,
    buf: Vec<u8>,
}

impl DiskSegment {
    fn open(paths: &SegmentPaths) -> Result<Self, StoreError> {
        let path = paths.segment.clone();
        let corrupt = |msg: &str| StoreError::Corrupt {
            path: path.clone(),
            msg: msg.into(),
        };
        let mut file = File::open(&path).map_err(io_err(&path))?;
        let file_len = file.metadata().map_err(io_err(&path))?.len();
        let mut header = [0u8; FILE_HEADER_LEN as usize];
        file.read_exact(&mut header).map_err(io_err(&path))?;
        if &header[0..4] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(corrupt(&format!("unsupported version {version}")));
        }
        let directed = u32::from_le_bytes(header[8..12].try_into().unwrap()) & 1 == 1;
        let count = u64::from_le_bytes(header[12..20].try_into().unwrap()) as usize;

        let table = fs::read(&paths.offsets).map_err(io_err(&paths.offsets))?;
        if table.len() != count * 16 {
            return Err(corrupt("offset table length disagrees with record count"));
        }
        let mut ids = Vec::with_capacity(count);
        let mut offsets = Vec::with_capacity(count + 1);
        for pair in table.chunks_exact(16) {
            ids.push(u64::from_le_bytes(pair[0..8].try_into().unwrap()));
            offsets.push(u64::from_le_bytes(pair[8..16].try_into().unwrap()));
        }
        offsets.push(file_len);
        if offsets
            .windows(2)
            .any(|w| w[0] + RECORD_HEADER_LEN as u64 > w[1])
            || ids.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(corrupt("offset table not sorted"));
        }
        let max_record = offsets.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0);
        Ok(DiskSegment {
            path,
            file,
            directed,
            ids,
            offsets,
            buf: vec![0; max_record as usize],
        })
    }

    fn table_bytes(&self) -> usize {
        (self.ids.len() + self.offsets.len()) * 8
    }

    /// One seek and one contiguous read of the whole record.
    fn fetch(&mut self, slot: Slot) -> Result<(u64, u64), StoreError> {
        let s = slot as usize;
        let (start, end) = (self.offsets[s], self.offsets[s + 1]);
        let len = (end - start) as usize;
        self.file
            .seek(SeekFrom::Start(start))
            .map_err(io_err(&self.path))?;
        self.file
            .read_exact(&mut self.buf[..len])
            .map_err(io_err(&self.path))?;
        Ok((start, len as u64))
    }

    fn record(&self, slot: Slot, len: usize) -> Result<Record<'_>, StoreError> {
        let b = &self.buf[..len];
        let word = |at: usize| u32::from_le_bytes(b[at..at + 4].try_into().unwrap()) as usize;
        let id = u64::from_le_bytes(b[0..8].try_into().unwrap());
        let (n_in, n_out, n_inv) = (word(9), word(13), word(17));
        if id != self.ids[slot as usize] || RECORD_HEADER_LEN + 4 * (n_in + n_out + n_inv) != len {
            return Err(StoreError::Corrupt {
                path: self.path.clone(),
                msg: format!("record for slot {slot} does not match its table entry"),
            });
        }
        let body = &b[RECORD_HEADER_LEN..];
        let (ins, rest) = body.split_at(4 * n_in);
        let (outs, inv) = rest.split_at(4 * n_out);
        Ok(Record {
            host: b[8] != 0,
            ins: Entries::Bytes(ins),
            outs: Entries::Bytes(outs),
            inv: Entries::Bytes(inv),
        })
    }

    fn decode_all(&mut self) -> Result<DualNeighborIndex, StoreError> {
        let n = self.ids.len();
        let mut idx = DualNeighborIndex {
            directed: self.directed,
            ids: self.ids.clone(),
            is_host: Vec::with_capacity(n),
            in_lists: Vec::with_capacity(n),
            out_lists: Vec::with_capacity(n),
            inverse: Vec::with_capacity(n),
        };
        for slot in 0..n as Slot {
            let (_, len) = self.fetch(slot)?;
            let rec = self.record(slot, len as usize)?;
            let collect = |e: Entries<'_>| (0..e.len()).map(|i| e.get(i)).collect::<Vec<_>>();
            idx.is_host.push(rec.host);
            idx.in_lists.push(collect(rec.ins));
            idx.out_lists.push(collect(rec.outs));
            idx.inverse.push(collect(rec.inv));
        }
        Ok(idx)
    }
}

/// Per-worker index handle serving reads from disk or memory.
pub struct IndexStore {
    mode: StoreMode,
    started: bool,
    memory: Option<DualNeighborIndex>,
    disk: Option<DiskSegment>,
    audit: Option<Vec<AccessRecord>>,
    superstep: u32,
    peak_resident: usize,
}

impl IndexStore {
    pub fn in_memory(idx: DualNeighborIndex) -> Self {
        let mut store = IndexStore {
            mode: StoreMode::Memory,
            started: false,
            memory: Some(idx),
            disk: None,
            audit: None,
            superstep: 0,
            peak_resident: 0,
        };
        store.note_resident();
        store
    }

    pub fn open(paths: &SegmentPaths) -> Result<Self, StoreError> {
        let mut store = IndexStore {
            mode: StoreMode::Disk,
            started: false,
            memory: None,
            disk: Some(DiskSegment::open(paths)?),
            audit: None,
            superstep: 0,
            peak_resident: 0,
        };
        store.note_resident();
        Ok(store)
    }

    pub fn mode(&self) -> StoreMode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: StoreMode) -> Result<(), StoreError> {
        if self.started {
            return Err(StoreError::ModeLocked);
        }
        match mode {
            StoreMode::Memory if self.memory.is_none() => {
                let disk = self.disk.as_mut().ok_or(StoreError::NoSegment)?;
                self.memory = Some(disk.decode_all()?);
            }
            StoreMode::Disk if self.disk.is_none() => return Err(StoreError::NoSegment),
            _ => {}
        }
        self.mode = mode;
        if mode == StoreMode::Disk {
            // disk mode never keeps a decoded copy resident
            self.memory = None;
        }
        self.peak_resident = 0;
        self.note_resident();
        Ok(())
    }

    /// Locks the tier; called by the engine before the first superstep.
    pub fn start(&mut self) {
        self.started = true;
    }

    pub fn set_audit(&mut self, on: bool) {
        self.audit = on.then(Vec::new);
    }

    pub fn begin_superstep(&mut self, superstep: u32) {
        self.superstep = superstep;
    }

    pub fn access_log(&self) -> &[AccessRecord] {
        self.audit.as_deref().unwrap_or(&[])
    }

    pub fn take_access_log(&mut self) -> Vec<AccessRecord> {
        self.audit.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        match (&self.memory, &self.disk) {
            (Some(m), _) => m.len(),
            (None, Some(d)) => d.ids.len(),
            (None, None) => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn ids(&self) -> &[VertexId] {
        match (self.mode, &self.memory, &self.disk) {
            (StoreMode::Memory, Some(m), _) => m.ids(),
            (_, _, Some(d)) => &d.ids,
            _ => &[],
        }
    }

    pub fn slot_of(&self, v: VertexId) -> Result<Slot, StoreError> {
        self.ids()
            .binary_search(&v)
            .map(|s| s as Slot)
            .map_err(|_| StoreError::UnknownVertex(v))
    }

    /// Bytes of index data currently held in memory.
    pub fn resident_bytes(&self) -> usize {
        match self.mode {
            StoreMode::Disk => self
                .disk
                .as_ref()
                .map(|d| d.table_bytes() + d.buf.capacity())
                .unwrap_or(0),
            StoreMode::Memory => self
                .memory
                .as_ref()
                .map(|m| {
                    let lists: usize = (0..m.len())
                        .map(|s| {
                            m.in_lists[s].capacity()
                                + m.out_lists[s].capacity()
                                + m.inverse[s].capacity()
                        })
                        .sum();
                    m.len() * 9 + lists * 4
                })
                .unwrap_or(0),
        }
    }

    pub fn peak_resident_bytes(&self) -> usize {
        self.peak_resident
    }

    /// Resident ceiling for disk mode: offset table plus one record buffer.
    pub fn disk_resident_bound(&self) -> Option<usize> {
        let d = self.disk.as_ref()?;
        let max_record = d.offsets.windows(2).map(|w| (w[1] - w[0]) as usize).max();
        Some(d.table_bytes() + max_record.unwrap_or(0))
    }

    fn note_resident(&mut self) {
        self.peak_resident = self.peak_resident.max(self.resident_bytes());
    }

    fn load(&mut self, slot: Slot) -> Result<Record<'_>, StoreError> {
        match self.mode {
            StoreMode::Memory => {
                let m = self.memory.as_ref().expect("memory tier loaded");
                let s = slot as usize;
                Ok(Record {
                    host: m.is_host[s],
                    ins: Entries::Words(&m.in_lists[s]),
                    outs: Entries::Words(&m.out_lists[s]),
                    inv: Entries::Words(&m.inverse[s]),
                })
            }
            StoreMode::Disk => {
                let (offset, len) = self.disk.as_mut().expect("disk tier").fetch(slot)?;
                let superstep = self.superstep;
                let vertex = self.disk.as_ref().unwrap().ids[slot as usize];
                if let Some(log) = &mut self.audit {
                    log.push(AccessRecord {
                        superstep,
                        vertex,
                        offset,
                        len,
                    });
                }
                self.note_resident();
                self.disk.as_ref().unwrap().record(slot, len as usize)
            }
        }
    }

    fn directed(&self) -> bool {
        match self.mode {
            StoreMode::Memory => self.memory.as_ref().is_some_and(|m| m.directed()),
            StoreMode::Disk => self.disk.as_ref().is_some_and(|d| d.directed),
        }
    }

    fn check_slot(&self, slot: Slot) -> Result<(), StoreError> {
        if (slot as usize) < self.len() {
            Ok(())
        } else {
            Err(StoreError::UnknownVertex(slot as VertexId))
        }
    }

    /// Neighbor list of a host, filtered by access mode.
    pub fn neighbors_at(
        &mut self,
        slot: Slot,
        mode: AccessMode,
    ) -> Result<SlotList<'_>, StoreError> {
        self.check_slot(slot)?;
        let directed = self.directed();
        let id = self.ids()[slot as usize];
        let rec = self.load(slot)?;
        if !rec.host {
            return Err(StoreError::NotHost(id));
        }
        Ok(match (directed, mode) {
            (false, _) | (true, AccessMode::Out) => SlotList::single(rec.outs),
            (true, AccessMode::In) => SlotList::single(rec.ins),
            (true, AccessMode::All) => SlotList::union(rec.ins, rec.outs),
        })
    }

    pub fn inverse_at(&mut self, slot: Slot) -> Result<SlotList<'_>, StoreError> {
        self.check_slot(slot)?;
        let rec = self.load(slot)?;
        Ok(SlotList::single(rec.inv))
    }

    pub fn read_neighbors(
        &mut self,
        v: VertexId,
        mode: AccessMode,
    ) -> Result<Vec<Slot>, StoreError> {
        let slot = self.slot_of(v)?;
        Ok(self.neighbors_at(slot, mode)?.collect())
    }

    pub fn read_inverse(&mut self, v: VertexId) -> Result<Vec<Slot>, StoreError> {
        let slot = self.slot_of(v)?;
        Ok(self.inverse_at(slot)?.collect())
    }

    /// Decodes the full index regardless of tier.
    pub fn decode(&mut self) -> Result<DualNeighborIndex, StoreError> {
        match (&self.memory, &mut self.disk) {
            (Some(m), _) if self.mode == StoreMode::Memory => Ok(m.clone()),
            (_, Some(d)) => d.decode_all(),
            _ => Err(StoreError::NoSegment),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{EdgeList, Graph};
    use crate::partition::{build_dual_index, build_partitions, Partition};
    use proptest::prelude::*;

    fn five_vertex() -> (Vec<Partition>, Vec<DualNeighborIndex>) {
        let g = Graph::from_edges(&EdgeList::from_pairs(
            [(1, 2), (1, 4), (2, 3), (2, 5), (4, 5)],
            true,
        ));
        let parts = build_partitions(&g, 3).unwrap();
        let idx = parts
            .iter()
            .map(|p| build_dual_index(p, &g).unwrap())
            .collect();
        (parts, idx)
    }

    fn ids(p: &Partition, slots: &[Slot]) -> Vec<VertexId> {
        slots.iter().map(|&s| p.id(s)).collect()
    }

    #[test]
    fn five_vertex_segment_reads() {
        let dir = tempfile::tempdir().unwrap();
        let (parts, idx) = five_vertex();
        let paths = write_segments(2, &idx[2], dir.path()).unwrap();
        let mut store = IndexStore::open(&paths).unwrap();
        let n = store.read_neighbors(2, AccessMode::All).unwrap();
        assert_eq!(ids(&parts[2], &n), vec![1, 3, 5]);
        assert_eq!(ids(&parts[2], &store.read_inverse(2).unwrap()), vec![5]);
        assert_eq!(store.read_neighbors(2, AccessMode::All).unwrap(), n);
        assert!(matches!(
            store.read_neighbors(1, AccessMode::All),
            Err(StoreError::NotHost(1))
        ));
        assert!(matches!(
            store.read_inverse(9),
            Err(StoreError::UnknownVertex(9))
        ));

        let paths1 = write_segments(1, &idx[1], dir.path()).unwrap();
        let mut w1 = IndexStore::open(&paths1).unwrap();
        assert_eq!(ids(&parts[1], &w1.read_inverse(2).unwrap()), vec![1]);
    }

    #[test]
    fn isolated_vertex_reads_empty() {
        let mut list = EdgeList::from_pairs([(1, 2)], true);
        list.add_vertex(7);
        let g = Graph::from_edges(&list);
        let p = build_partitions(&g, 1).unwrap().remove(0);
        let mut store = IndexStore::in_memory(build_dual_index(&p, &g).unwrap());
        assert!(store.read_neighbors(7, AccessMode::All).unwrap().is_empty());
        assert!(store.read_inverse(7).unwrap().is_empty());
    }

    #[test]
    fn empty_partition_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let g = Graph::from_edges(&EdgeList::from_pairs([(3, 6)], true));
        // ids 3 and 6 are both multiples of 3, so worker 1 is empty
        let parts = build_partitions(&g, 3).unwrap();
        assert!(parts[1].is_empty());
        let idx = build_dual_index(&parts[1], &g).unwrap();
        let paths = write_segments(1, &idx, dir.path()).unwrap();
        let mut store = IndexStore::open(&paths).unwrap();
        assert_eq!(store.decode().unwrap(), idx);
        assert_eq!(store.disk_resident_bound(), Some(8));
    }

    #[test]
    fn mode_switching() {
        let dir = tempfile::tempdir().unwrap();
        let (_, idx) = five_vertex();
        let paths = write_segments(2, &idx[2], dir.path()).unwrap();
        let mut store = IndexStore::open(&paths).unwrap();
        store.set_audit(true);
        store.set_mode(StoreMode::Memory).unwrap();
        let mem = store.read_neighbors(2, AccessMode::All).unwrap();
        assert!(store.access_log().is_empty());
        store.set_mode(StoreMode::Disk).unwrap();
        store.start();
        assert_eq!(store.read_neighbors(2, AccessMode::All).unwrap(), mem);
        assert_eq!(store.access_log().len(), 1);
        assert!(matches!(
            store.set_mode(StoreMode::Memory),
            Err(StoreError::ModeLocked)
        ));

        let mut mem_only = IndexStore::in_memory(idx[2].clone());
        assert!(matches!(
            mem_only.set_mode(StoreMode::Disk),
            Err(StoreError::NoSegment)
        ));
    }

    #[test]
    fn corrupt_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let (_, idx) = five_vertex();
        let paths = write_segments(0, &idx[0], dir.path()).unwrap();
        let mut bytes = fs::read(&paths.segment).unwrap();
        bytes[0] = b'X';
        fs::write(&paths.segment, bytes).unwrap();
        assert!(matches!(
            IndexStore::open(&paths),
            Err(StoreError::Corrupt { .. })
        ));
    }

    #[test]
    fn write_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let (_, idx) = five_vertex();
        let a = write_segments(2, &idx[2], &dir.path().join("a")).unwrap();
        let b = write_segments(2, &idx[2], &dir.path().join("b")).unwrap();
        assert_eq!(fs::read(&a.segment).unwrap(), fs::read(&b.segment).unwrap());
        assert_eq!(fs::read(&a.offsets).unwrap(), fs::read(&b.offsets).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn segments_round_trip_and_reads_are_contiguous(
            pairs in proptest::collection::vec((0u64..200, 0u64..200), 0..600),
            undirected in any::<bool>(),
            k in 1usize..5,
        ) {
            let dir = tempfile::tempdir().unwrap();
            let mut list = EdgeList::from_pairs(pairs, undirected);
            for v in 0..200 { list.add_vertex(v); }
            let g = Graph::from_edges(&list);
            for p in build_partitions(&g, k).unwrap() {
                let idx = build_dual_index(&p, &g).unwrap();
                let paths = write_segments(p.worker, &idx, dir.path()).unwrap();
                let mut store = IndexStore::open(&paths).unwrap();
                prop_assert_eq!(&store.decode().unwrap(), &idx);
                store.set_audit(true);
                store.start();
                for &h in p.hosts() {
                    for mode in [AccessMode::In, AccessMode::Out, AccessMode::All] {
                        let got: Vec<Slot> = store.neighbors_at(h, mode).unwrap().collect();
                        prop_assert_eq!(got, idx.neighbors(h, mode).into_owned());
                    }
                }
                for s in 0..p.len() as Slot {
                    let got: Vec<Slot> = store.inverse_at(s).unwrap().collect();
                    prop_assert_eq!(got.as_slice(), idx.inverse(s));
                }
                let bound = store.disk_resident_bound().unwrap();
                prop_assert!(store.peak_resident_bytes() <= bound);
                for rec in store.access_log() {
                    let slot = store.slot_of(rec.vertex).unwrap() as usize;
                    let d = store.disk.as_ref().unwrap();
                    prop_assert_eq!(rec.offset, d.offsets[slot]);
                    prop_assert_eq!(rec.offset + rec.len, d.offsets[slot + 1]);
                }
            }
        }
    }
}
