use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use super::ExperimentStats;
use crate::config::HistogramStatistic;
use crate::error::{Error, Result};
use crate::occurrence::distribution::rational_to_f64;
use crate::occurrence::family::minimal_realization;
use crate::occurrence::{build_sequence_from_distribution, FrequencyDistribution, Histogram, IntSequence};
use crate::seed::{derive_seed, rng_for, Stream};

/// Draws `Poisson(s)` positions uniformly with replacement and returns the
/// histogram of the sampled values with the sample count.
pub fn sample_histogram<R: Rng>(seq: &IntSequence, s: f64, rng: &mut R) -> Result<(Histogram, u64)> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!("bad expected sample count {s}")));
    }
    let n = seq.len();
    if s == 0.0 || n == 0 {
        return Ok((Histogram::default(), 0));
    }
    let poisson = Poisson::new(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let draws = poisson.sample(rng) as u64;
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for _ in 0..draws {
        *counts.entry(seq.get(rng.random_range(1..=n))).or_insert(0) += 1;
    }
    Ok((Histogram::from_counts(counts.values()), draws))
}

fn ln_factorial(j: usize) -> f64 {
    (2..=j).map(|x| (x as f64).ln()).sum()
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Log of the expected number of values seen exactly `j` times when each
/// value of frequency `i` gets `Poisson(i * s / n)` samples.
fn ln_expected_seen(probs: &[f64], distinct: f64, s: f64, n: f64, j: usize) -> f64 {
    let terms: Vec<f64> = probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(idx, &p)| {
            let lambda = (idx + 1) as f64 * s / n;
            p.ln() + j as f64 * lambda.ln() - lambda - ln_factorial(j)
        })
        .collect();
    distinct.ln() + log_sum_exp(&terms)
}

/// Maps a sample histogram to a real score. Larger means "looks like `q`".
#[derive(Debug, Clone)]
pub struct HistogramScorer {
    statistic: HistogramStatistic,
    k: usize,
    p: (Vec<f64>, f64),
    q: (Vec<f64>, f64),
    s: f64,
    n: f64,
    weights: Vec<f64>,
}

const CACHED_WEIGHTS: usize = 64;

impl HistogramScorer {
    pub fn new(
        statistic: HistogramStatistic,
        p: &FrequencyDistribution,
        q: &FrequencyDistribution,
        n: usize,
        s: f64,
    ) -> Self {
        let side = |d: &FrequencyDistribution| {
            let mean = rational_to_f64(&d.mean());
            (d.to_f64(), n as f64 / mean)
        };
        let mut scorer = HistogramScorer {
            statistic,
            k: p.k().max(q.k()),
            p: side(p),
            q: side(q),
            s,
            n: n as f64,
            weights: Vec::new(),
        };
        scorer.weights = (0..CACHED_WEIGHTS).map(|j| scorer.weight(j)).collect();
        scorer
    }

    fn weight(&self, j: usize) -> f64 {
        if j == 0 || self.s <= 0.0 || self.n <= 0.0 {
            return 0.0;
        }
        let b = ln_expected_seen(&self.q.0, self.q.1, self.s, self.n, j);
        let a = ln_expected_seen(&self.p.0, self.p.1, self.s, self.n, j);
        if a.is_finite() && b.is_finite() {
            b - a
        } else {
            0.0
        }
    }

    pub fn score(&self, h: &Histogram) -> f64 {
        match self.statistic {
            HistogramStatistic::AtLeastHalfK => {
                let half = self.k.div_ceil(2);
                h.counts.range(half..).map(|(_, &c)| c as f64).sum()
            }
            HistogramStatistic::LogLikelihoodRatio => h
                .counts
                .iter()
                .map(|(&j, &c)| {
                    let w = self.weights.get(j).copied().unwrap_or_else(|| self.weight(j));
                    c as f64 * w
                })
                .sum(),
        }
    }
}

/// A decision rule on scores: accept (say "yes") iff the score is at most
/// `value`, or above it when `accept_below` is false.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub value: f64,
    pub accept_below: bool,
}

impl Threshold {
    pub fn accepts(&self, score: f64) -> bool {
        (score <= self.value) == self.accept_below
    }
}

/// The threshold rule with the largest empirical advantage on the given
/// scores. Ties go to the more accepting threshold.
pub fn calibrate_threshold(yes: &[f64], no: &[f64]) -> Threshold {
    let mut candidates: Vec<f64> = yes.iter().chain(no).copied().collect();
    candidates.sort_by(|a, b| b.total_cmp(a));
    candidates.dedup();
    candidates.push(f64::NEG_INFINITY);
    let frac = |xs: &[f64], t: f64| {
        if xs.is_empty() {
            0.0
        } else {
            xs.iter().filter(|&&x| x <= t).count() as f64 / xs.len() as f64
        }
    };
    let mut best = Threshold {
        value: f64::INFINITY,
        accept_below: true,
    };
    let mut best_gain = 0.0;
    for &t in &candidates {
        let gain = frac(yes, t) - frac(no, t);
        if gain > best_gain {
            best_gain = gain;
            best = Threshold { value: t, accept_below: true };
        }
        if -gain > best_gain {
            best_gain = -gain;
            best = Threshold { value: t, accept_below: false };
        }
    }
    best
}

struct TrialScores {
    yes: f64,
    no: f64,
    samples: u64,
}

#[allow(clippy::too_many_arguments)]
fn score_trials(
    p: &FrequencyDistribution,
    q: &FrequencyDistribution,
    n: usize,
    s: f64,
    trials: usize,
    seed: u64,
    stream: Stream,
    scorer: &HistogramScorer,
) -> Result<Vec<TrialScores>> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = derive_seed(seed, stream, t as u64);
            let a = build_sequence_from_distribution(p, n, derive_seed(trial_seed, Stream::Family, 0))?;
            let b = build_sequence_from_distribution(q, n, derive_seed(trial_seed, Stream::Family, 1))?;
            let (ha, sa) = sample_histogram(&a, s, &mut rng_for(trial_seed, Stream::Tester, 0))?;
            let (hb, sb) = sample_histogram(&b, s, &mut rng_for(trial_seed, Stream::Tester, 1))?;
            Ok(TrialScores {
                yes: scorer.score(&ha),
                no: scorer.score(&hb),
                samples: sa + sb,
            })
        })
        .collect()
}

/// Builds fresh `p`- and `q`-realizing sequences per trial, hands a
/// histogram of `Poisson(s)` samples from each to a fixed statistic, and
/// reports the distinguishing advantage. The threshold is fit on a separate
/// batch of `trials` calibration trials.
pub fn poisson_histogram_distinguisher(
    p: &FrequencyDistribution,
    q: &FrequencyDistribution,
    n: usize,
    s: f64,
    trials: usize,
    seed: u64,
    statistic: HistogramStatistic,
) -> Result<ExperimentStats> {
    if trials < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 trials, got {trials}")));
    }
    for d in [p, q] {
        let step = minimal_realization(d)?.length;
        if n == 0 || !n.is_multiple_of(step) {
            let below = n / step * step;
            return Err(Error::Unrealizable {
                n,
                lower: (below > 0).then_some(below),
                upper: below + step,
            });
        }
    }
    let scorer = HistogramScorer::new(statistic, p, q, n, s);
    let calib = score_trials(p, q, n, s, trials, seed, Stream::Calibration, &scorer)?;
    let yes: Vec<f64> = calib.iter().map(|t| t.yes).collect();
    let no: Vec<f64> = calib.iter().map(|t| t.no).collect();
    let rule = calibrate_threshold(&yes, &no);
    let eval = score_trials(p, q, n, s, trials, seed, Stream::Trial, &scorer)?;
    let m = eval.len() as f64;
    let accepted_yes = eval.iter().filter(|t| rule.accepts(t.yes)).count() as f64;
    let rejected_no = eval.iter().filter(|t| !rule.accepts(t.no)).count() as f64;
    let samples: Vec<u64> = eval.iter().map(|t| t.samples).collect();
    Ok(ExperimentStats {
        trials,
        accept_rate_on_yes: accepted_yes / m,
        reject_rate_on_no: rejected_no / m,
        mean_queries: samples.iter().sum::<u64>() as f64 / (2.0 * m),
        mean_queries_yes: f64::NAN,
        mean_queries_no: f64::NAN,
        max_queries: 0,
        budget: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::occurrence::{make_p, make_q};

    #[test]
    fn zero_samples_give_no_advantage() {
        let (p, q) = (make_p(3).unwrap(), make_q(3).unwrap());
        let stats =
            poisson_histogram_distinguisher(&p, &q, 600, 0.0, 100, 1, HistogramStatistic::LogLikelihoodRatio)
                .unwrap();
        assert_eq!(stats.advantage(), 0.0);
        assert_eq!(stats.mean_queries, 0.0);
    }

    #[test]
    fn preconditions() {
        let (p, q) = (make_p(3).unwrap(), make_q(3).unwrap());
        let stat = HistogramStatistic::AtLeastHalfK;
        assert!(matches!(
            poisson_histogram_distinguisher(&p, &q, 600, 5.0, 99, 1, stat),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            poisson_histogram_distinguisher(&p, &q, 601, 5.0, 100, 1, stat),
            Err(Error::Unrealizable { n: 601, .. })
        ));
    }

    #[test]
    fn calibration_picks_separating_side() {
        let t = calibrate_threshold(&[0.0, 1.0, 2.0], &[5.0, 6.0, 7.0]);
        assert!(t.accept_below && t.accepts(2.0) && !t.accepts(5.0));
        let t = calibrate_threshold(&[5.0, 6.0], &[0.0, 1.0]);
        assert!(!t.accept_below && t.accepts(5.0) && !t.accepts(1.0));
        let t = calibrate_threshold(&[0.0; 4], &[0.0; 4]);
        assert!(t.accepts(0.0));
    }

    #[test]
    fn llr_weights_favour_triples() {
        let (p, q) = (make_p(3).unwrap(), make_q(3).unwrap());
        let scorer = HistogramScorer::new(HistogramStatistic::LogLikelihoodRatio, &p, &q, 60_000, 7665.0);
        assert!(scorer.weight(3) > scorer.weight(2));
        let half = HistogramScorer::new(HistogramStatistic::AtLeastHalfK, &p, &q, 60_000, 7665.0);
        let h = Histogram::from_counts(&[1, 2, 2, 3]);
        assert_eq!(half.score(&h), 3.0);
    }

    #[test]
    fn sample_counts_match_histogram() {
        let s = crate::occurrence::generate_family_instance(crate::occurrence::Family::B, 3, 600, 2).unwrap();
        let (h, draws) = sample_histogram(&s, 50.0, &mut rng_for(1, Stream::Tester, 0)).unwrap();
        assert_eq!(h.total() as u64, draws);
    }
}
