//! Integer sequences with an occurrence cap, their frequency statistics, and
//! the moment-matched hard families.

pub mod distribution;
pub mod family;
pub mod sequence;

pub use distribution::{
    alternating_binomial_identity_check, alternating_binomials, binomial,
    check_pq_linear_relation, frequency_distribution, make_p, make_q, moment,
    proportionality_factor, verify_proportional_moments, FrequencyDistribution,
    ProportionalityWitness,
};
pub use family::{build_sequence_from_distribution, generate_family_instance, Family};
pub use sequence::{histogram, is_k_occurrence_free, occurrence_farness, Histogram, IntSequence};
