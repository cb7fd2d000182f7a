//! Sequences that realize a frequency distribution exactly, and the two hard
//! families built from `p` and `q`.

use num::{BigInt, Integer, One, ToPrimitive};
use rand::seq::SliceRandom;

use super::distribution::{make_p, make_q, FrequencyDistribution};
use super::sequence::IntSequence;
use crate::error::{Error, Result};
use crate::seed::{rng_for, Stream};

/// The smallest exact realization of a distribution: `distinct` values, of
/// which `per_frequency[i - 1]` occur exactly `i` times, over `length`
/// positions. Every realizable length is a multiple of `length`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalRealization {
    pub distinct: usize,
    pub length: usize,
    pub per_frequency: Vec<usize>,
}

pub fn minimal_realization(dist: &FrequencyDistribution) -> Result<MinimalRealization> {
    dist.validate()?;
    let lcd = dist
        .probs()
        .iter()
        .fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
    let per_frequency: Vec<BigInt> = dist
        .probs()
        .iter()
        .map(|p| (p * num::BigRational::from_integer(lcd.clone())).to_integer())
        .collect();
    let length: BigInt = per_frequency
        .iter()
        .enumerate()
        .map(|(idx, c)| c * BigInt::from(idx + 1))
        .sum();
    let to_usize = |b: &BigInt| {
        b.to_usize()
            .ok_or_else(|| Error::InvalidDistribution("realization too large".into()))
    };
    Ok(MinimalRealization {
        distinct: to_usize(&lcd)?,
        length: to_usize(&length)?,
        per_frequency: per_frequency.iter().map(to_usize).collect::<Result<_>>()?,
    })
}

fn unrealizable(n: usize, step: usize) -> Error {
    let below = n / step * step;
    Error::Unrealizable {
        n,
        lower: (below > 0).then_some(below),
        upper: below + step,
    }
}

/// A sequence of length `n` whose frequency variable is exactly `dist`.
///
/// Values are numbered from 1, lowest frequency first; positions are then
/// shuffled with a stream derived from `seed`.
pub fn build_sequence_from_distribution(
    dist: &FrequencyDistribution,
    n: usize,
    seed: u64,
) -> Result<IntSequence> {
    let min = minimal_realization(dist)?;
    if !n.is_multiple_of(min.length) {
        return Err(unrealizable(n, min.length));
    }
    let scale = n / min.length;
    let mut values = Vec::with_capacity(n);
    let mut next_value = 1;
    for (idx, &count) in min.per_frequency.iter().enumerate() {
        for _ in 0..count * scale {
            values.extend(std::iter::repeat_n(next_value, idx + 1));
            next_value += 1;
        }
    }
    debug_assert_eq!(values.len(), n);
    values.shuffle(&mut rng_for(seed, Stream::Shuffle, 0));
    IntSequence::new(values, dist.k())
}

/// The two hard families: `A` realizes `p` (property holds), `B` realizes
/// `q` (far from it).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    A,
    B,
}

impl Family {
    pub fn distribution(self, k: u32) -> Result<FrequencyDistribution> {
        match self {
            Family::A => make_p(k),
            Family::B => make_q(k),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Family::A => "A",
            Family::B => "B",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Family::A),
            "B" | "b" => Ok(Family::B),
            other => Err(Error::InvalidArgument(format!("unknown family `{other}`"))),
        }
    }
}

pub fn generate_family_instance(family: Family, k: u32, n: usize, seed: u64) -> Result<IntSequence> {
    build_sequence_from_distribution(&family.distribution(k)?, n, seed)
}

/// Smallest length realizable by both families at this `k`.
pub fn joint_realizable_step(k: u32) -> Result<usize> {
    let a = minimal_realization(&make_p(k)?)?.length;
    let b = minimal_realization(&make_q(k)?)?.length;
    Ok(a.lcm(&b))
}

/// Checks `n` against both families, suggesting neighbours if it fails.
pub fn check_joint_realizable(k: u32, n: usize) -> Result<()> {
    let step = joint_realizable_step(k)?;
    if n == 0 || !n.is_multiple_of(step) {
        Err(unrealizable(n, step))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::occurrence::distribution::frequency_distribution;
    use crate::occurrence::sequence::{histogram, occurrence_farness};
    use num::BigRational;

    #[test]
    fn p3_at_twelve_is_all_pairs() {
        let s = build_sequence_from_distribution(&make_p(3).unwrap(), 12, 1).unwrap();
        let h = histogram(&s);
        assert_eq!(h.get(2), 6);
        assert_eq!(h.distinct(), 6);
    }

    #[test]
    fn q3_at_twelve() {
        let s = build_sequence_from_distribution(&make_q(3).unwrap(), 12, 1).unwrap();
        let h = histogram(&s);
        assert_eq!((h.get(1), h.get(3), h.distinct()), (6, 2, 8));
        assert_eq!(
            occurrence_farness(&s, 3),
            BigRational::new(1.into(), 6.into())
        );
        assert_eq!(frequency_distribution(&s).unwrap(), make_q(3).unwrap());
    }

    #[test]
    fn q3_at_thirteen_is_unrealizable() {
        let err = build_sequence_from_distribution(&make_q(3).unwrap(), 13, 1).unwrap_err();
        assert!(matches!(
            err,
            Error::Unrealizable { n: 13, lower: Some(12), upper: 18 }
        ));
    }

    #[test]
    fn minimal_realizations() {
        let m = minimal_realization(&make_q(3).unwrap()).unwrap();
        assert_eq!(m, MinimalRealization { distinct: 4, length: 6, per_frequency: vec![3, 0, 1] });
        assert_eq!(minimal_realization(&make_p(3).unwrap()).unwrap().length, 2);
        assert_eq!(joint_realizable_step(3).unwrap(), 6);
        assert!(check_joint_realizable(3, 6000).is_ok());
        assert!(check_joint_realizable(3, 6001).is_err());
    }

    #[test]
    fn shuffle_depends_on_seed_only() {
        let q = make_q(3).unwrap();
        let a = build_sequence_from_distribution(&q, 60, 5).unwrap();
        let b = build_sequence_from_distribution(&q, 60, 5).unwrap();
        let c = build_sequence_from_distribution(&q, 60, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn family_parse() {
        assert_eq!("B".parse::<Family>().unwrap(), Family::B);
        assert!("C".parse::<Family>().is_err());
    }
}
