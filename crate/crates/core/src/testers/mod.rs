//! One-sided testers and the Poissonized histogram distinguisher.

mod graph;
mod poisson;
mod sequence;

pub use graph::{bidirectional_hfree_tester, read_out_list, unidirectional_hfree_tester};
pub use poisson::{
    calibrate_threshold, poisson_histogram_distinguisher, sample_histogram, HistogramScorer, Threshold,
};
pub use sequence::k_occurrence_tester;

use crate::embed::is_embedding;
use crate::graph::{BoundedDigraph, Vertex};
use crate::occurrence::IntSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

/// Evidence behind a reject.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Host vertex of each pattern vertex, indexed by pattern vertex − 1.
    Embedding(Vec<Vertex>),
    /// A value and `k` distinct positions holding it.
    Occurrence { value: usize, positions: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TesterVerdict {
    pub decision: Decision,
    pub queries_used: u64,
    pub witness: Option<Witness>,
}

impl TesterVerdict {
    pub fn accept(queries_used: u64) -> Self {
        TesterVerdict {
            decision: Decision::Accept,
            queries_used,
            witness: None,
        }
    }

    pub fn reject(queries_used: u64, witness: Witness) -> Self {
        TesterVerdict {
            decision: Decision::Reject,
            queries_used,
            witness: Some(witness),
        }
    }

    pub fn rejected(&self) -> bool {
        self.decision == Decision::Reject
    }

    /// Re-checks an embedding witness against the full graph. Accepts
    /// trivially hold.
    pub fn witness_valid_in_graph(&self, host: &BoundedDigraph, pattern: &BoundedDigraph) -> bool {
        match (&self.decision, &self.witness) {
            (Decision::Accept, _) => true,
            (Decision::Reject, Some(Witness::Embedding(map))) => is_embedding(host, pattern, map),
            _ => false,
        }
    }

    /// Re-checks an occurrence witness: the positions are distinct, hold the
    /// value, and the value occurs exactly `k` times in `s`.
    pub fn witness_valid_in_sequence(&self, s: &IntSequence, k: usize) -> bool {
        match (&self.decision, &self.witness) {
            (Decision::Accept, _) => true,
            (Decision::Reject, Some(Witness::Occurrence { value, positions })) => {
                let mut sorted = positions.clone();
                sorted.sort_unstable();
                sorted.dedup();
                sorted.len() == k
                    && sorted.iter().all(|&a| a >= 1 && a <= s.len() && s.get(a) == *value)
                    && s.counts().get(value) == Some(&k)
            }
            _ => false,
        }
    }
}

/// Aggregate of a batch of trials on property-satisfying ("yes") and far
/// ("no") inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentStats {
    pub trials: usize,
    pub accept_rate_on_yes: f64,
    pub reject_rate_on_no: f64,
    /// Mean over all yes and no runs.
    pub mean_queries: f64,
    pub mean_queries_yes: f64,
    pub mean_queries_no: f64,
    pub max_queries: u64,
    pub budget: Option<u64>,
}

impl ExperimentStats {
    /// Pairs up verdicts from `trials` yes-runs and `trials` no-runs.
    pub fn from_verdicts(yes: &[TesterVerdict], no: &[TesterVerdict], budget: Option<u64>) -> Self {
        let mean = |v: &[TesterVerdict]| {
            if v.is_empty() {
                0.0
            } else {
                v.iter().map(|x| x.queries_used as f64).sum::<f64>() / v.len() as f64
            }
        };
        let rate = |v: &[TesterVerdict], want: Decision| {
            if v.is_empty() {
                0.0
            } else {
                v.iter().filter(|x| x.decision == want).count() as f64 / v.len() as f64
            }
        };
        let all = yes.len() + no.len();
        ExperimentStats {
            trials: yes.len().max(no.len()),
            accept_rate_on_yes: rate(yes, Decision::Accept),
            reject_rate_on_no: rate(no, Decision::Reject),
            mean_queries: if all == 0 {
                0.0
            } else {
                (mean(yes) * yes.len() as f64 + mean(no) * no.len() as f64) / all as f64
            },
            mean_queries_yes: mean(yes),
            mean_queries_no: mean(no),
            max_queries: yes.iter().chain(no).map(|v| v.queries_used).max().unwrap_or(0),
            budget,
        }
    }

    /// `|P[accept | yes] - P[accept | no]|`.
    pub fn advantage(&self) -> f64 {
        (self.accept_rate_on_yes - (1.0 - self.reject_rate_on_no)).abs()
    }
}
