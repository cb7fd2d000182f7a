//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::HashMap;
use std::path::Path;
use std::time::{Duration, Instant};

use num::{BigInt, BigRational, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hfree_lab::config::TesterConfig;
use hfree_lab::embed::count_subgraph_copies;
use hfree_lab::experiment::{
    cmd_verify, execute, manifest_path_for, poisson_cells, replay, separation_cells, Job, PoissonParams,
    SeparationParams, TesterKind,
};
use hfree_lab::graph::patterns::{star, three_source_example};
use hfree_lab::occurrence::{
    generate_family_instance, make_p, make_q, occurrence_farness, Family, IntSequence,
};
use hfree_lab::reduction::{build_offline, consistency_check_with};
use hfree_lab::PatternDecomposition;

const C1_LIMIT: Duration = Duration::from_secs(1);
const C2_LIMIT: Duration = Duration::from_secs(5);
const C3_LIMIT: Duration = Duration::from_secs(60);
const C4_LIMIT: Duration = Duration::from_secs(10);
const C6_LIMIT: Duration = Duration::from_secs(600);
const C7_LIMIT: Duration = Duration::from_secs(300);

const REJECT_HIGH: f64 = 2.0 / 3.0;
const REJECT_LOW: f64 = 0.1;
const QUERY_RATIO: f64 = 2.0;
const ADV_SMALL: f64 = 0.1;
const ADV_LARGE: f64 = 0.5;

fn binom(n: i64, r: i64) -> BigInt {
    (0..r).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// Test-side p, q and rho built straight from the binomial formulas.
fn oracle_pq(k: u32) -> (Vec<BigRational>, Vec<BigRational>, BigRational) {
    let k = k as i64;
    let two = BigInt::from(2).pow((k - 1) as u32);
    let half_on_odd: Vec<BigRational> = (1..=k)
        .map(|i| if i % 2 == 1 { BigRational::new(binom(k, i), two.clone()) } else { BigRational::zero() })
        .collect();
    let reduced_on_even: Vec<BigRational> = (1..=k)
        .map(|i| if i % 2 == 0 { BigRational::new(binom(k, i), &two - 1) } else { BigRational::zero() })
        .collect();
    if k % 2 == 0 {
        let rho = BigRational::one() + BigRational::new(BigInt::one(), &two - 1);
        (half_on_odd, reduced_on_even, rho)
    } else {
        let rho = BigRational::one() - BigRational::new(BigInt::one(), two);
        (reduced_on_even, half_on_odd, rho)
    }
}

fn oracle_moment(d: &[BigRational], j: u32) -> BigRational {
    d.iter()
        .enumerate()
        .map(|(idx, p)| p * BigRational::from_integer(BigInt::from(idx + 1).pow(j)))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// Number of values occurring exactly `k` times, by direct counting.
fn oracle_exact_k(values: &[usize], k: usize) -> usize {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &v in values {
        *counts.entry(v).or_default() += 1;
    }
    counts.values().filter(|&&c| c == k).count()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let report = cmd_verify(12, false).expect("verify runs");
    let mut oracle_ok = true;
    for k in 2..=12u32 {
        let (p, q, rho) = oracle_pq(k);
        let lp = make_p(k).unwrap();
        let lq = make_q(k).unwrap();
        oracle_ok &= lp.probs() == p.as_slice() && lq.probs() == q.as_slice();
        let sum = |d: &[BigRational]| d.iter().fold(BigRational::zero(), |a, b| a + b);
        oracle_ok &= sum(&p).is_one() && sum(&q).is_one();
        oracle_ok &= p[k as usize - 1].is_zero();
        oracle_ok &= q[k as usize - 1] >= BigRational::new(BigInt::one(), BigInt::from(2).pow(k));
        for j in 1..k {
            oracle_ok &= oracle_moment(&q, j) == &rho * oracle_moment(&p, j);
        }
        for (i, (pi, qi)) in p.iter().zip(&q).enumerate() {
            let sign = if (i + 1) % 2 == 0 { 1 } else { -1 };
            let alt = BigRational::from_integer(BigInt::from(sign) * binom(k as i64, i as i64 + 1));
            oracle_ok &= *qi == &rho * pi + (&rho - BigRational::one()) * alt;
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: report.all_pass() && report.rows.len() == 11 && oracle_ok && elapsed < C1_LIMIT,
        detail: format!("11 rows all_pass={} oracle={} in {:?}", report.all_pass(), oracle_ok, elapsed),
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let mut ok = true;
    for k in [2u32, 3, 4, 5] {
        let (_, q, _) = oracle_pq(k);
        let bound = &q[k as usize - 1] / BigRational::from_integer(BigInt::from(k));
        for (family, step) in [
            (Family::A, hfree_lab::occurrence::family::minimal_realization(&make_p(k).unwrap()).unwrap().length),
            (Family::B, hfree_lab::occurrence::family::minimal_realization(&make_q(k).unwrap()).unwrap().length),
        ] {
            let largest = 100_000 / step * step;
            for n in [step, 10 * step, 1000 / step * step, largest] {
                if n == 0 {
                    continue;
                }
                for seed in 0..2 {
                    let s = generate_family_instance(family, k, n, seed).unwrap();
                    checked += 1;
                    ok &= s.len() == n;
                    match family {
                        Family::A => ok &= oracle_exact_k(s.values(), k as usize) == 0,
                        Family::B => {
                            let far = BigRational::new(
                                BigInt::from(oracle_exact_k(s.values(), k as usize)),
                                BigInt::from(n),
                            );
                            ok &= far >= bound && occurrence_farness(&s, k as usize) == far;
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: ok && elapsed < C2_LIMIT,
        detail: format!("{checked} instances, n up to 1e5, in {elapsed:?}"),
    }
}

/// Every sequence of length `n` over `1..=m` with no value above `cap`
/// occurrences.
fn sequences(n: usize, m: usize, cap: usize, out: &mut Vec<Vec<usize>>) {
    fn rec(n: usize, m: usize, cap: usize, cur: &mut Vec<usize>, counts: &mut [usize], out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 1..=m {
            if counts[v] < cap {
                counts[v] += 1;
                cur.push(v);
                rec(n, m, cap, cur, counts, out);
                cur.pop();
                counts[v] -= 1;
            }
        }
    }
    rec(n, m, cap, &mut Vec::new(), &mut vec![0; m + 1], out);
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let patterns = [("2-star", star(2)), ("3-star", star(3)), ("fig1", three_source_example())];
    let mut cases = 0usize;
    let mut bad = Vec::new();
    for (name, h) in &patterns {
        let dec = PatternDecomposition::new(h).unwrap();
        let kh = dec.k();
        for cap in [2usize, 3] {
            if cap > kh {
                continue;
            }
            for n in 0..=8 {
                let mut all = Vec::new();
                sequences(n, 4.min(n.max(1)), cap, &mut all);
                for (idx, values) in all.into_iter().enumerate() {
                    let s = IntSequence::new(values.clone(), cap).unwrap();
                    let off = build_offline(&s, &dec, (n * 100_000 + idx) as u64).unwrap();
                    let got = count_subgraph_copies(&off.graph, h).unwrap();
                    let want = oracle_exact_k(&values, kh) as u128;
                    cases += 1;
                    if got != want && bad.len() < 5 {
                        bad.push(format!("{name} {values:?}: {got} != {want}"));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: bad.is_empty() && elapsed < C3_LIMIT,
        detail: format!("{cases} (pattern, sequence) cases in {elapsed:?} {}", bad.join("; ")),
    }
}

fn random_sequence(rng: &mut ChaCha8Rng, n: usize, cap: usize) -> IntSequence {
    let mut counts = vec![0usize; n + 1];
    let mut values = Vec::with_capacity(n);
    while values.len() < n {
        let v = rng.random_range(1..=n);
        if counts[v] < cap {
            counts[v] += 1;
            values.push(v);
        }
    }
    IntSequence::new(values, cap).unwrap()
}

fn criteria_4_5() -> (Outcome, Outcome) {
    let start = Instant::now();
    let patterns = [star(2), star(3), three_source_example()];
    let decs: Vec<_> = patterns.iter().map(|h| PatternDecomposition::new(h).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut consistent, mut thrifty, mut probes) = (0, 0, 0);
    for case in 0..100 {
        let dec = &decs[case % decs.len()];
        let n = rng.random_range(1..=50);
        let s = random_sequence(&mut rng, n, dec.k());
        let seed = rng.random();
        let report = consistency_check_with(&s, dec, seed, seed, rng.random(), None).unwrap();
        probes += report.probes;
        consistent += report.consistent() as usize;
        thrifty += (report.sequence_queries <= report.source_positions_probed as u64
            && report.center_sequence_queries == 0) as usize;
    }
    let elapsed = start.elapsed();
    (
        Outcome {
            pass: consistent == 100 && elapsed < C4_LIMIT,
            detail: format!("{consistent}/100 pairs consistent over {probes} probes in {elapsed:?}"),
        },
        Outcome {
            pass: thrifty == 100,
            detail: format!("{thrifty}/100 sweeps within the query allowance"),
        },
    )
}

fn frozen_config() -> TesterConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/testers.conf");
    TesterConfig::read(&path).expect("frozen tester config")
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let params = SeparationParams {
        k: 3,
        ns: vec![6_000, 60_000],
        trials: 200,
        seed: 2024,
        config: frozen_config(),
    };
    let cells = separation_cells(&params).expect("separation runs");
    let elapsed = start.elapsed();
    let get = |n: usize, t: TesterKind| cells.iter().find(|c| c.n == n && c.tester == t).unwrap();
    let mut ok = elapsed < C6_LIMIT;
    let mut lines = Vec::new();
    for n in [6_000, 60_000] {
        let bi = get(n, TesterKind::Bidirectional);
        let lo = get(n, TesterKind::UnidirectionalLow);
        let hi = get(n, TesterKind::UnidirectionalHigh);
        ok &= bi.stats.reject_rate_on_no >= REJECT_HIGH;
        ok &= hi.stats.reject_rate_on_no >= REJECT_HIGH;
        ok &= lo.stats.reject_rate_on_no <= REJECT_LOW;
        for c in [bi, lo, hi] {
            ok &= c.stats.accept_rate_on_yes == 1.0 && c.audit_ok;
        }
        lines.push(format!(
            "n={n}: bi rej {:.3} q {:.1}; uni@{} rej {:.3}; uni@{} rej {:.3}",
            bi.stats.reject_rate_on_no,
            bi.stats.mean_queries,
            lo.budget,
            lo.stats.reject_rate_on_no,
            hi.budget,
            hi.stats.reject_rate_on_no
        ));
    }
    let q_small = get(6_000, TesterKind::Bidirectional).stats.mean_queries;
    let q_large = get(60_000, TesterKind::Bidirectional).stats.mean_queries;
    let spread = q_small.max(q_large) / q_small.min(q_large);
    ok &= spread < QUERY_RATIO;
    Outcome {
        pass: ok,
        detail: format!("{}; bi query spread {spread:.3} in {elapsed:?}", lines.join("; ")),
    }
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let n = 60_000usize;
    let small = (n as f64).sqrt().ceil() as u64;
    let large = 5 * (n as f64).cbrt().powi(2).ceil() as u64;
    let params = PoissonParams {
        k: 3,
        n,
        s_list: vec![small, large],
        trials: 500,
        seed: 77,
        config: frozen_config(),
    };
    let cells = poisson_cells(&params).expect("poisson runs");
    let elapsed = start.elapsed();
    let adv = |s: u64| cells.iter().find(|c| c.s == s).unwrap().stats.advantage();
    let (a_small, a_large) = (adv(small), adv(large));
    Outcome {
        pass: a_small <= ADV_SMALL && a_large >= ADV_LARGE && elapsed < C7_LIMIT,
        detail: format!(
            "advantage {a_small:.3} at s={small}, {a_large:.3} at s={large} ({}) in {elapsed:?}",
            params.config.statistic.label()
        ),
    }
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let jobs = [
        Job::Separation(SeparationParams {
            k: 3,
            ns: vec![600, 1200],
            trials: 200,
            seed: 5,
            config: frozen_config(),
        }),
        Job::Poisson(PoissonParams {
            k: 3,
            n: 6000,
            s_list: vec![0, 80, 600],
            trials: 100,
            seed: 5,
            config: frozen_config(),
        }),
    ];
    let mut ok = true;
    for (i, job) in jobs.iter().enumerate() {
        let first = dir.path().join(format!("run{i}.csv"));
        let second = dir.path().join(format!("replay{i}.csv"));
        execute(job, &first, 4).unwrap();
        replay(&manifest_path_for(&first), Some(&second), 1).unwrap();
        let a = std::fs::read(&first).unwrap();
        let b = std::fs::read(&second).unwrap();
        ok &= !a.is_empty() && a == b;
    }
    Outcome {
        pass: ok,
        detail: "separation and poisson manifests replayed with 4 vs 1 threads".into(),
    }
}

fn main() {
    let mut results = vec![
        ("1 exact identities", criterion_1()),
        ("2 family correctness", criterion_2()),
        ("3 reduction oracle check", criterion_3()),
    ];
    let (c4, c5) = criteria_4_5();
    results.push(("4 lazy/offline consistency", c4));
    results.push(("5 query thrift", c5));
    results.push(("6 empirical separation", criterion_6()));
    results.push(("7 poissonized indistinguishability", criterion_7()));
    results.push(("8 reproducibility", criterion_8()));
    let mut failed = 0;
    for (name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {name}: {tag} ({})", o.detail);
        failed += !o.pass as usize;
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
