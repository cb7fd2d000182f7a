use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use num::{BigInt, BigRational};

use crate::error::{Error, Result};
use crate::graph::parse_numbers;

/// A sequence of positive integers in which no value occurs more than `cap`
/// times. Positions are 1-based in the public API.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntSequence {
    values: Vec<usize>,
    cap: usize,
}

impl IntSequence {
    pub fn new(values: Vec<usize>, cap: usize) -> Result<Self> {
        if let Some(pos) = values.iter().position(|&v| v == 0) {
            return Err(Error::ZeroValue { position: pos + 1 });
        }
        let seq = IntSequence { values, cap };
        if let Some((&value, _)) = seq.counts().iter().find(|(_, &c)| c > cap) {
            return Err(Error::OccurrenceCapExceeded { value, cap });
        }
        Ok(seq)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// Value at 1-based position `a`.
    pub fn get(&self, a: usize) -> usize {
        self.values[a - 1]
    }

    /// Occurrence count of every distinct value.
    pub fn counts(&self) -> HashMap<usize, usize> {
        let mut counts = HashMap::new();
        for &v in &self.values {
            *counts.entry(v).or_insert(0) += 1;
        }
        counts
    }

    pub fn distinct_count(&self) -> usize {
        self.counts().len()
    }

    /// For each position, how many earlier positions hold the same value.
    pub fn occurrence_ranks(&self) -> Vec<u32> {
        let mut seen: HashMap<usize, u32> = HashMap::new();
        self.values
            .iter()
            .map(|&v| {
                let r = seen.entry(v).or_insert(0);
                let rank = *r;
                *r += 1;
                rank
            })
            .collect()
    }

    /// File format: `n k` on the first line, the values on the second.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.cap);
        let body: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", body.join(" "));
        out
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "missing `n k` header"))?;
        let head = parse_numbers(header, origin, hline)?;
        let [n, cap] = head[..] else {
            return Err(Error::parse(origin, hline, "header must be `n k`"));
        };
        let mut values = Vec::with_capacity(n);
        for (lineno, line) in lines {
            values.extend(parse_numbers(line, origin, lineno)?);
        }
        if values.len() != n {
            return Err(Error::parse(
                origin,
                hline,
                format!("header declares {n} values, found {}", values.len()),
            ));
        }
        IntSequence::new(values, cap)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Frequency of frequencies: `counts[i]` distinct values occur exactly `i`
/// times.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Histogram {
    pub counts: BTreeMap<usize, usize>,
}

impl Histogram {
    pub fn from_counts<'a>(occurrences: impl IntoIterator<Item = &'a usize>) -> Self {
        let mut counts = BTreeMap::new();
        for &c in occurrences {
            if c > 0 {
                *counts.entry(c).or_insert(0) += 1;
            }
        }
        Histogram { counts }
    }

    pub fn get(&self, i: usize) -> usize {
        self.counts.get(&i).copied().unwrap_or(0)
    }

    pub fn distinct(&self) -> usize {
        self.counts.values().sum()
    }

    /// `sum_i i * counts[i]`, the length of the sequence it came from.
    pub fn total(&self) -> usize {
        self.counts.iter().map(|(i, c)| i * c).sum()
    }
}

pub fn histogram(s: &IntSequence) -> Histogram {
    Histogram::from_counts(s.counts().values())
}

/// True iff no value occurs exactly `k` times.
pub fn is_k_occurrence_free(s: &IntSequence, k: usize) -> bool {
    histogram(s).get(k) == 0
}

/// Exact distance to `k`-occurrence-freeness as a fraction of positions.
///
/// Each value occurring exactly `k` times needs one position rewritten (to a
/// fresh value), and one rewrite can break at most one such value.
pub fn occurrence_farness(s: &IntSequence, k: usize) -> BigRational {
    if s.is_empty() {
        return BigRational::from_integer(BigInt::from(0));
    }
    BigRational::new(BigInt::from(histogram(s).get(k)), BigInt::from(s.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[usize], cap: usize) -> IntSequence {
        IntSequence::new(v.to_vec(), cap).unwrap()
    }

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn histogram_examples() {
        let h = histogram(&seq(&[1, 2, 1, 3, 2, 1, 4], 3));
        assert_eq!(h.counts, BTreeMap::from([(1, 2), (2, 1), (3, 1)]));
        assert_eq!(h.total(), 7);
        let h = histogram(&seq(&[4, 9, 2, 7], 1));
        assert_eq!(h.counts, BTreeMap::from([(1, 4)]));
        assert_eq!(histogram(&seq(&[5, 5], 2)).counts, BTreeMap::from([(2, 1)]));
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            IntSequence::new(vec![1, 0], 2),
            Err(Error::ZeroValue { position: 2 })
        ));
        assert!(matches!(
            IntSequence::new(vec![1, 1, 1], 2),
            Err(Error::OccurrenceCapExceeded { value: 1, cap: 2 })
        ));
    }

    #[test]
    fn freeness_and_farness() {
        assert!(!is_k_occurrence_free(&seq(&[1, 1, 1], 3), 3));
        assert_eq!(occurrence_farness(&seq(&[1, 1, 1], 3), 3), ratio(1, 3));
        assert!(is_k_occurrence_free(&seq(&[], 3), 3));
        assert_eq!(occurrence_farness(&seq(&[], 3), 3), ratio(0, 1));
        assert_eq!(occurrence_farness(&seq(&[1, 2, 1, 2], 3), 3), ratio(0, 1));
    }

    #[test]
    fn ranks_count_earlier_occurrences() {
        assert_eq!(seq(&[1, 2, 1, 3, 2, 1], 3).occurrence_ranks(), vec![0, 0, 1, 0, 1, 2]);
    }

    #[test]
    fn text_format() {
        let s = seq(&[1, 2, 1, 3, 2, 1], 3);
        assert_eq!(s.to_text(), "6 3\n1 2 1 3 2 1\n");
        assert_eq!(IntSequence::parse(&s.to_text(), "x").unwrap(), s);
        assert!(IntSequence::parse("3 3\n1 2\n", "x").is_err());
        assert!(matches!(
            IntSequence::parse("4 3\n1 1 1 1\n", "x"),
            Err(Error::OccurrenceCapExceeded { .. })
        ));
    }
}
