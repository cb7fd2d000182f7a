//! Exact frequency distributions and the moment identities behind the hard
//! sequence families.
//!
//! For `k >= 2` the pair `p`, `q` lives on frequencies `1..=k`. `p` puts no
//! mass on `k` (its sequences are `k`-occurrence-free) while `q` puts at
//! least `2^-k` there, yet their first `k - 1` moments differ by a single
//! common factor `rho`.

use std::fmt::Write as _;

use num::{BigInt, BigRational, One, Signed, Zero};

use super::sequence::{histogram, IntSequence};
use crate::error::{Error, Result};

fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

fn rat(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// `binom(n, r)` as an exact integer.
pub fn binomial(n: u32, r: u32) -> BigInt {
    if r > n {
        return BigInt::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigInt::one();
    for i in 0..r {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// The alternating-sign binomial vector `((-1)^i * binom(k, i))` for `i = 1..=k`.
pub fn alternating_binomials(k: u32) -> Vec<BigInt> {
    (1..=k)
        .map(|i| {
            let b = binomial(k, i);
            if i % 2 == 1 {
                -b
            } else {
                b
            }
        })
        .collect()
}

/// Multiplies the `k x k` Vandermonde matrix `V[j][i] = i^j`
/// (`j = 0..k`, `i = 1..=k`) by `vector`.
pub fn vandermonde_apply(k: u32, vector: &[BigInt]) -> Vec<BigInt> {
    (0..k)
        .map(|j| {
            (1..=k)
                .zip(vector)
                .map(|(i, x)| BigInt::from(i).pow(j) * x)
                .sum()
        })
        .collect()
}

/// True iff `V * vector = (-1, 0, ..., 0)` exactly.
pub fn alternating_identity_holds_for(k: u32, vector: &[BigInt]) -> bool {
    if vector.len() != k as usize {
        return false;
    }
    let image = vandermonde_apply(k, vector);
    image
        .iter()
        .enumerate()
        .all(|(j, x)| if j == 0 { *x == int(-1) } else { x.is_zero() })
}

/// Checks the Vandermonde identity for the alternating binomial vector.
pub fn alternating_binomial_identity_check(k: u32) -> bool {
    alternating_identity_holds_for(k, &alternating_binomials(k))
}

/// A distribution over frequencies `1..=k` with exact rational masses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyDistribution {
    probs: Vec<BigRational>,
}

impl FrequencyDistribution {
    /// `probs[i - 1]` is the mass on frequency `i`. Masses must be
    /// non-negative and sum to exactly 1.
    pub fn new(probs: Vec<BigRational>) -> Result<Self> {
        let dist = FrequencyDistribution { probs };
        dist.validate()?;
        Ok(dist)
    }

    /// Skips validation; used by negative controls.
    pub fn new_unchecked(probs: Vec<BigRational>) -> Self {
        FrequencyDistribution { probs }
    }

    pub fn validate(&self) -> Result<()> {
        if self.probs.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if self.probs.iter().any(Signed::is_negative) {
            return Err(Error::InvalidDistribution("negative mass".into()));
        }
        if self.total() != BigRational::one() {
            return Err(Error::InvalidDistribution(format!("masses sum to {}", self.total())));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    /// Mass on frequency `i` (1-based); zero outside the support.
    pub fn prob(&self, i: usize) -> BigRational {
        i.checked_sub(1)
            .and_then(|idx| self.probs.get(idx))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn total(&self) -> BigRational {
        self.probs.iter().sum()
    }

    /// `E[X^j] = sum_i probs[i] * i^j`.
    pub fn moment(&self, j: u32) -> BigRational {
        self.probs
            .iter()
            .enumerate()
            .map(|(idx, p)| p * BigRational::from_integer(BigInt::from(idx + 1).pow(j)))
            .sum()
    }

    pub fn mean(&self) -> BigRational {
        self.moment(1)
    }

    /// Report format: `k`, then one `i num/den` line per frequency.
    pub fn to_report(&self) -> String {
        let mut out = format!("{}\n", self.k());
        for (idx, p) in self.probs.iter().enumerate() {
            let _ = writeln!(out, "{} {}/{}", idx + 1, p.numer(), p.denom());
        }
        out
    }

    /// Per-frequency masses as floats, for sampling-side statistics.
    pub fn to_f64(&self) -> Vec<f64> {
        self.probs.iter().map(rational_to_f64).collect()
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Free function form of [`FrequencyDistribution::moment`].
pub fn moment(dist: &FrequencyDistribution, j: u32) -> BigRational {
    dist.moment(j)
}

/// The frequency variable of a sequence: the occurrence count of a uniformly
/// random distinct value, supported on `1..=cap`.
pub fn frequency_distribution(s: &IntSequence) -> Result<FrequencyDistribution> {
    if s.is_empty() {
        return Err(Error::EmptySequence);
    }
    let hist = histogram(s);
    let distinct = BigInt::from(hist.distinct());
    let support = s.cap().max(hist.counts.keys().copied().max().unwrap_or(0));
    let probs = (1..=support)
        .map(|i| rat(BigInt::from(hist.get(i)), distinct.clone()))
        .collect();
    Ok(FrequencyDistribution { probs })
}

fn pow2(e: u32) -> BigInt {
    BigInt::one() << e as usize
}

// binom(k, i) / 2^(k-1) on frequencies of parity `odd`, zero elsewhere.
fn half_mass(k: u32, odd: bool) -> Vec<BigRational> {
    parity_masses(k, odd, pow2(k - 1))
}

// binom(k, i) / (2^(k-1) - 1) on frequencies of parity `odd`, zero elsewhere.
fn reduced_mass(k: u32, odd: bool) -> Vec<BigRational> {
    parity_masses(k, odd, pow2(k - 1) - 1)
}

fn parity_masses(k: u32, odd: bool, den: BigInt) -> Vec<BigRational> {
    (1..=k)
        .map(|i| {
            if (i % 2 == 1) == odd {
                rat(binomial(k, i), den.clone())
            } else {
                BigRational::zero()
            }
        })
        .collect()
}

fn check_k(k: u32) -> Result<()> {
    if k < 2 {
        Err(Error::InvalidArgument(format!("k must be at least 2, got {k}")))
    } else {
        Ok(())
    }
}

/// The `k`-occurrence-free side of the hard pair.
pub fn make_p(k: u32) -> Result<FrequencyDistribution> {
    check_k(k)?;
    let probs = if k.is_multiple_of(2) {
        half_mass(k, true)
    } else {
        reduced_mass(k, false)
    };
    Ok(FrequencyDistribution { probs })
}

/// The far side of the hard pair.
pub fn make_q(k: u32) -> Result<FrequencyDistribution> {
    check_k(k)?;
    let probs = if k.is_multiple_of(2) {
        reduced_mass(k, false)
    } else {
        half_mass(k, true)
    };
    Ok(FrequencyDistribution { probs })
}

/// The common moment ratio `rho` between `q` and `p`.
pub fn proportionality_factor(k: u32) -> Result<BigRational> {
    check_k(k)?;
    let one = BigRational::one();
    Ok(if k.is_multiple_of(2) {
        &one + rat(BigInt::one(), pow2(k - 1) - 1)
    } else {
        &one - rat(BigInt::one(), pow2(k - 1))
    })
}

/// Checks `q_i = rho * p_i + (rho - 1) * (-1)^i binom(k, i)` for every `i`.
pub fn check_pq_linear_relation_for(
    k: u32,
    p: &FrequencyDistribution,
    q: &FrequencyDistribution,
    rho: &BigRational,
) -> bool {
    if p.k() != k as usize || q.k() != k as usize {
        return false;
    }
    let shift = rho - BigRational::one();
    alternating_binomials(k)
        .into_iter()
        .enumerate()
        .all(|(idx, alt)| {
            let rhs = rho * &p.probs[idx] + &shift * BigRational::from_integer(alt);
            rhs == q.probs[idx]
        })
}

pub fn check_pq_linear_relation(k: u32) -> Result<bool> {
    Ok(check_pq_linear_relation_for(
        k,
        &make_p(k)?,
        &make_q(k)?,
        &proportionality_factor(k)?,
    ))
}

/// Moment ratios `E[Y^j] / E[X^j]` for `j = 1..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProportionalityWitness {
    pub k: u32,
    /// The first ratio; every other ratio must equal it.
    pub rho: BigRational,
    pub moment_ratios: Vec<BigRational>,
}

impl ProportionalityWitness {
    pub fn validates(&self) -> bool {
        self.moment_ratios.iter().all(|r| *r == self.rho)
    }
}

/// Compares the first `k - 1` moments of `q` against those of `p`.
pub fn verify_proportional_moments(
    p: &FrequencyDistribution,
    q: &FrequencyDistribution,
    k: u32,
) -> Result<ProportionalityWitness> {
    check_k(k)?;
    let mut ratios = Vec::with_capacity(k as usize - 1);
    for j in 1..k {
        let mp = p.moment(j);
        if mp.is_zero() {
            return Err(Error::ZeroMoment { j });
        }
        ratios.push(q.moment(j) / mp);
    }
    Ok(ProportionalityWitness {
        k,
        rho: ratios[0].clone(),
        moment_ratios: ratios,
    })
}
