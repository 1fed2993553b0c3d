//! Barrier-time snapshots used to audit host/guest consistency.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use crate::model::{AttrValue, VertexId};
use crate::partition::WorkerId;

#[derive(Debug, Default)]
struct StepSnapshot {
    hosts: HashMap<VertexId, Vec<AttrValue>>,
    guests: Vec<(WorkerId, VertexId, Vec<AttrValue>)>,
}

/// A guest whose synchronized attributes disagree with its host.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub superstep: u32,
    pub worker: WorkerId,
    pub vertex: VertexId,
    pub host: Vec<AttrValue>,
    pub guest: Vec<AttrValue>,
}

/// Collects, per superstep, every worker's host and guest values restricted
/// to the plan's critical positions (plus any auxiliary list), after incoming
/// updates are applied.
#[derive(Debug, Default)]
pub struct ConsistencyProbe {
    steps: Mutex<BTreeMap<u32, StepSnapshot>>,
}

impl ConsistencyProbe {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(
        &self,
        superstep: u32,
        worker: WorkerId,
        hosts: Vec<(VertexId, Vec<AttrValue>)>,
        guests: Vec<(VertexId, Vec<AttrValue>)>,
    ) {
        let mut steps = self.steps.lock().unwrap();
        let snap = steps.entry(superstep).or_default();
        snap.hosts.extend(hosts);
        snap.guests
            .extend(guests.into_iter().map(|(v, vals)| (worker, v, vals)));
    }

    pub fn barriers(&self) -> usize {
        self.steps.lock().unwrap().len()
    }

    pub fn guest_checks(&self) -> usize {
        self.steps
            .lock()
            .unwrap()
            .values()
            .map(|s| s.guests.len())
            .sum()
    }

    pub fn violations(&self) -> Vec<Violation> {
        let steps = self.steps.lock().unwrap();
        let mut out = Vec::new();
        for (&superstep, snap) in steps.iter() {
            for (worker, vertex, guest) in &snap.guests {
                let host = snap.hosts.get(vertex).cloned().unwrap_or_default();
                if &host != guest {
                    out.push(Violation {
                        superstep,
                        worker: *worker,
                        vertex: *vertex,
                        host,
                        guest: guest.clone(),
                    });
                }
            }
        }
        out
    }

    pub fn clear(&self) {
        self.steps.lock().unwrap().clear();
    }
}
