//! Per-iteration diagnostics emitted by the refinement operators.

/// Snapshot of the refined field after one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    /// 1-based iteration number within the pass that produced the record.
    pub iteration: usize,
    /// Fraction of pixels whose recomputed EPR is out of range (default
    /// bounds and floor).
    pub out_of_range_fraction: f64,
    /// Mean-normalized interior L2 of the incompressibility residual
    /// ε₁₁ + 2·ε₂₂ of the just-updated field.
    pub residual_l2: f64,
    /// Largest absolute lateral-displacement update this iteration, mm,
    /// taken over the whole grid.
    pub max_update_mm: f64,
}

/// Ordered per-iteration records for one refinement pass (or a composition
/// of passes, concatenated in execution order).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RefinementTrace {
    records: Vec<TraceRecord>,
}

impl RefinementTrace {
    /// An empty trace.
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends one record.
    pub fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    /// Appends all of `other`'s records (used when composing passes).
    pub fn extend(&mut self, other: RefinementTrace) {
        self.records.extend(other.records);
    }

    /// All records in execution order.
    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    /// Number of iterations actually executed.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// True when no iteration ran.
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The final record, if any iteration ran.
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }
}
