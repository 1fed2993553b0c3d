use std::time::Duration;

use serde::Serialize;

/// How the active set of a superstep was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationMode {
    /// First superstep of a plan: every host is active.
    Start,
    /// Only changed vertices and their inverse-index entries.
    Neighbor,
    /// Every host.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivationPolicy {
    /// Neighbor mode while the global change count is below theta, else all.
    Auto,
    Neighbor,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncPolicy {
    /// Send only each plan's critical positions.
    Critical,
    /// Send every attribute.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperstepStats {
    /// Global superstep number, 1-based across all plans.
    pub superstep: u32,
    /// Index of the plan this superstep belongs to.
    pub plan: u32,
    pub n_change: u64,
    pub active_count: u64,
    pub activation_mode_used: ActivationMode,
    pub bytes_data_delta: u64,
    #[serde(rename = "wall_time_us", serialize_with = "micros")]
    pub wall_time: Duration,
}

fn micros<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(d.as_micros() as u64)
}

/// Summary of one executed plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanOutcome {
    pub supersteps: u32,
    /// Global change count reported at each barrier of the plan.
    pub n_change: Vec<u64>,
}

impl PlanOutcome {
    pub fn last_n_change(&self) -> u64 {
        self.n_change.last().copied().unwrap_or(0)
    }

    pub fn total_changes(&self) -> u64 {
        self.n_change.iter().sum()
    }
}
