use std::collections::{BTreeSet, HashMap};

use rand::Rng;

use super::{TesterVerdict, Witness};
use crate::error::{Error, Result};
use crate::reduction::SequenceAccess;
use crate::seed::{rng_for, Stream};

/// Samples `budget` positions uniformly with replacement and rejects iff
/// some value shows up at `k` distinct positions. With `budget >= n` every
/// position is read once instead.
///
/// Needs `k >= cap`, so that `k` sightings prove exactly `k` occurrences.
pub fn k_occurrence_tester<S: SequenceAccess>(
    seq: &mut S,
    k: usize,
    budget: u64,
    seed: u64,
) -> Result<TesterVerdict> {
    if k == 0 || k < seq.cap() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must be positive and at least the sequence cap {}",
            seq.cap()
        )));
    }
    let n = seq.len();
    let start = seq.query_count();
    let mut seen: HashMap<usize, BTreeSet<usize>> = HashMap::new();
    let mut visit = |seq: &mut S, a: usize| {
        let b = seq.query(a);
        let positions = seen.entry(b).or_default();
        positions.insert(a);
        (positions.len() == k).then(|| Witness::Occurrence {
            value: b,
            positions: positions.iter().copied().collect(),
        })
    };
    if budget >= n as u64 {
        for a in 1..=n {
            if let Some(w) = visit(seq, a) {
                return Ok(TesterVerdict::reject(seq.query_count() - start, w));
            }
        }
    } else if n > 0 {
        let mut rng = rng_for(seed, Stream::Tester, 2);
        for _ in 0..budget {
            let a = rng.random_range(1..=n);
            if let Some(w) = visit(seq, a) {
                return Ok(TesterVerdict::reject(seq.query_count() - start, w));
            }
        }
    }
    Ok(TesterVerdict::accept(seq.query_count() - start))
}
