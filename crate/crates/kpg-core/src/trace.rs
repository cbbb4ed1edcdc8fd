//! Flat trace rows shared by training loops, solvers, and certificate
//! suites.
//!
//! Every experiment in this crate reports progress as a sequence of rows
//! keyed by `(update, k)` where `update` counts committed parameter updates
//! and `k` the reasoning level inside one update. Metrics that do not apply
//! to a given row stay `None` and serialize to empty CSV fields, so one
//! schema covers every experiment kind.

/// One observation from a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    /// Index of the committed update step this row belongs to (0-based).
    pub update: usize,
    /// Reasoning level inside the update (1-based; 0 for rows that summarize
    /// a whole update or a static quantity).
    pub k: usize,
    /// Agent index when the row is about a single agent.
    pub agent: Option<usize>,
    /// Euclidean distance between the level-k and level-(k-1) joint
    /// parameters.
    pub step_dist: Option<f64>,
    /// Distance from the level-k joint parameters to the reference point.
    pub dist_star: Option<f64>,
    /// Certificate bound attached to this row by a verification suite.
    pub bound_t1: Option<f64>,
    /// Scalar return recorded at this row (mean objective across agents, or
    /// the exact return of a tabular policy).
    pub ret: Option<f64>,
}

impl TraceRow {
    /// Row with all metrics absent.
    pub fn new(update: usize, k: usize) -> Self {
        TraceRow {
            update,
            k,
            agent: None,
            step_dist: None,
            dist_star: None,
            bound_t1: None,
            ret: None,
        }
    }
}

/// Ordered collection of trace rows from one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub rows: Vec<TraceRow>,
}

impl ConvergenceTrace {
    pub fn new() -> Self {
        ConvergenceTrace { rows: Vec::new() }
    }

    pub fn push(&mut self, row: TraceRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = TraceRow>) {
        self.rows.extend(rows);
    }

    /// Rows belonging to a single update step.
    pub fn rows_for_update(&self, update: usize) -> impl Iterator<Item = &TraceRow> {
        self.rows.iter().filter(move |r| r.update == update)
    }

    /// Largest update index present, if any rows exist.
    pub fn last_update(&self) -> Option<usize> {
        self.rows.iter().map(|r| r.update).max()
    }

    /// True when rows are sorted by `(update, k)` and all step distances are
    /// non-negative.
    pub fn is_well_formed(&self) -> bool {
        let ordered = self
            .rows
            .windows(2)
            .all(|w| (w[0].update, w[0].k) <= (w[1].update, w[1].k));
        let non_negative = self
            .rows
            .iter()
            .all(|r| r.step_dist.is_none_or(|d| d >= 0.0));
        ordered && non_negative
    }
}
