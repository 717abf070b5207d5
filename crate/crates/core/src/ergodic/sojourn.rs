use serde::Serialize;

use super::ErgodicError;

/// Maximal run of steps `entry..exit` spent in the box neighborhood of a vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SojournEvent {
    pub vertex: usize,
    pub entry: u64,
    /// First step outside; `None` while the run ends inside.
    pub exit: Option<u64>,
    /// `ln φ` at the first step inside (`m = 4`).
    pub log_phi_at_entry: Option<f64>,
    /// `ln φ` at the last step before entering (`m = 4`, entry > 0).
    pub log_phi_before_entry: Option<f64>,
}

impl SojournEvent {
    /// Observed both entering and leaving.
    pub fn is_complete(&self) -> bool {
        self.entry > 0 && self.exit.is_some()
    }

    pub fn length(&self, total_steps: u64) -> u64 {
        self.exit.unwrap_or(total_steps) - self.entry
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SojournTable {
    pub m: usize,
    pub epsilon: f64,
    pub total_steps: u64,
    pub events: Vec<SojournEvent>,
}

impl SojournTable {
    pub fn new(m: usize, epsilon: f64, total_steps: u64, events: Vec<SojournEvent>) -> Self {
        Self {
            m,
            epsilon,
            total_steps,
            events,
        }
    }

    /// Visited vertices in order, repeats collapsed.
    pub fn visits(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.events.iter().map(|e| e.vertex).collect();
        v.dedup();
        v
    }

    /// Lengths of complete sojourns at `vertex`.
    pub fn complete_lengths(&self, vertex: usize) -> Vec<u64> {
        self.events
            .iter()
            .filter(|e| e.vertex == vertex && e.is_complete())
            .map(|e| e.length(self.total_steps))
            .collect()
    }

    /// Number of steps in `[start, end)` spent outside every neighborhood.
    pub fn outside_count(&self, start: u64, end: u64) -> u64 {
        let end = end.min(self.total_steps);
        if start >= end {
            return 0;
        }
        let inside: u64 = self
            .events
            .iter()
            .map(|e| {
                let (a, b) = (e.entry.max(start), e.exit.unwrap_or(self.total_steps).min(end));
                b.saturating_sub(a)
            })
            .sum();
        end - start - inside
    }
}

/// Allowed transitions between consecutive visited vertices for the canonical
/// class-3 orientation (0-based): the cycles `1→4→3→2→1`, `1→4→2→1`, `1→4→3→1`.
pub const CANONICAL_ROUTE_EDGES: [(usize, usize); 6] = [(0, 3), (3, 2), (3, 1), (2, 1), (2, 0), (1, 0)];

/// True iff every transition is admissible and the sequence returns to vertex
/// 1 at least twice after first reaching it.
pub fn route_check(visits: &[usize]) -> bool {
    let edges_ok = visits.windows(2).all(|w| CANONICAL_ROUTE_EDGES.contains(&(w[0], w[1])));
    let Some(first) = visits.iter().position(|&v| v == 0) else {
        return false;
    };
    let cycles = visits[first + 1..].iter().filter(|&&v| v == 0).count();
    edges_ok && cycles >= 2
}

/// Nondecreasing complete-sojourn lengths at `vertex` from the second onward,
/// allowing `floor(count · violations_per_ten / 10)` decreases.
pub fn sojourn_growth(table: &SojournTable, vertex: usize, violations_per_ten: u32) -> Result<bool, ErgodicError> {
    let lengths = table.complete_lengths(vertex);
    if lengths.len() < 3 {
        return Err(ErgodicError::TooFewSojourns {
            vertex,
            found: lengths.len(),
        });
    }
    Ok(growth_violations(&lengths) <= lengths.len() * violations_per_ten as usize / 10)
}

fn growth_violations(lengths: &[u64]) -> usize {
    lengths[1..].windows(2).filter(|w| w[1] < w[0]).count()
}

/// `[0,10), [10,100), …` clipped to `steps`.
pub fn decade_windows(steps: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let (mut lo, mut hi) = (0u64, 10u64);
    while lo < steps {
        out.push((lo, hi.min(steps)));
        lo = hi;
        hi = hi.saturating_mul(10);
    }
    out
}

/// Fraction of steps outside every vertex neighborhood per window.
pub fn outside_fraction_trend(table: &SojournTable, windows: &[(u64, u64)]) -> Vec<((u64, u64), f64)> {
    windows
        .iter()
        .filter(|(a, b)| a < b)
        .map(|&(a, b)| {
            let len = b.min(table.total_steps).saturating_sub(a);
            let frac = if len == 0 {
                0.0
            } else {
                table.outside_count(a, b) as f64 / len as f64
            };
            ((a, b), frac)
        })
        .collect()
}

pub fn is_nonincreasing(trend: &[((u64, u64), f64)]) -> bool {
    trend.windows(2).all(|w| w[1].1 <= w[0].1)
}
