//! Orchestration behind the command-line tool: identity checks, instance
//! generation, reduction, the separation benchmark, the Poisson benchmark,
//! run manifests and replay.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num::{BigInt, BigRational, One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::TesterConfig;
use crate::embed::count_subgraph_copies;
use crate::error::{Error, Result};
use crate::graph::patterns::star;
use crate::graph::BoundedDigraph;
use crate::occurrence::distribution::check_pq_linear_relation_for;
use crate::occurrence::family::check_joint_realizable;
use crate::occurrence::{
    alternating_binomial_identity_check, generate_family_instance, histogram, make_p, make_q,
    occurrence_farness, proportionality_factor, verify_proportional_moments, Family,
    FrequencyDistribution, Histogram, IntSequence,
};
use crate::oracle::{OracleSession, QueryModel};
use crate::pattern::PatternDecomposition;
use crate::reduction::{build_offline, distance_transfer, MeteredSequence, OfflineReduction, ReductionOracle};
use crate::seed::{derive_seed, Stream};
use crate::testers::{
    bidirectional_hfree_tester, poisson_histogram_distinguisher, unidirectional_hfree_tester,
    ExperimentStats, TesterVerdict,
};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Formats a rational as `num/den`.
pub fn fmt_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

// ---------------------------------------------------------------- verify

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyRow {
    pub k: u32,
    pub identity: bool,
    pub linear: bool,
    pub sums: bool,
    pub p_k_zero: bool,
    pub q_k_bound: bool,
    pub moments: bool,
}

impl VerifyRow {
    pub fn pass(&self) -> bool {
        self.identity && self.linear && self.sums && self.p_k_zero && self.q_k_bound && self.moments
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(VerifyRow::pass)
    }

    pub fn render(&self) -> String {
        let mark = |b: bool| if b { "pass" } else { "FAIL" };
        let mut out = String::from("k\tidentity\tlinear\tsums\tp_k=0\tq_k>=2^-k\tmoments\tresult\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.k,
                mark(r.identity),
                mark(r.linear),
                mark(r.sums),
                mark(r.p_k_zero),
                mark(r.q_k_bound),
                mark(r.moments),
                mark(r.pass())
            );
        }
        out
    }
}

/// Shifts mass from `q_1` to `q_2`. Only used to exercise failing rows.
fn corrupt(q: &FrequencyDistribution) -> FrequencyDistribution {
    let mut probs = q.probs().to_vec();
    let delta = BigRational::new(BigInt::one(), BigInt::from(1000));
    probs[0] = &probs[0] - &delta;
    probs[1] = &probs[1] + &delta;
    FrequencyDistribution::new_unchecked(probs)
}

pub fn verify_row(k: u32, corrupt_q: bool) -> Result<VerifyRow> {
    let p = make_p(k)?;
    let mut q = make_q(k)?;
    if corrupt_q {
        q = corrupt(&q);
    }
    let rho = proportionality_factor(k)?;
    let one = BigRational::one();
    let bound = BigRational::new(BigInt::one(), BigInt::one() << k as usize);
    let moments = match verify_proportional_moments(&p, &q, k) {
        Ok(w) => w.validates() && w.rho == rho,
        Err(_) => false,
    };
    Ok(VerifyRow {
        k,
        identity: alternating_binomial_identity_check(k),
        linear: check_pq_linear_relation_for(k, &p, &q, &rho),
        sums: p.total() == one && q.total() == one,
        p_k_zero: p.prob(k as usize).is_zero(),
        q_k_bound: q.prob(k as usize) >= bound,
        moments,
    })
}

pub fn cmd_verify(k_max: u32, corrupt_q: bool) -> Result<VerifyReport> {
    if k_max < 2 {
        return Err(Error::InvalidArgument(format!("kmax must be at least 2, got {k_max}")));
    }
    let rows = (2..=k_max).map(|k| verify_row(k, corrupt_q)).collect::<Result<_>>()?;
    Ok(VerifyReport { rows })
}

// ---------------------------------------------------------------- gen

#[derive(Debug, Clone)]
pub struct GenOutcome {
    pub sequence: IntSequence,
    pub histogram: Histogram,
    pub farness: BigRational,
}

impl GenOutcome {
    pub fn report(&self) -> String {
        let hist: Vec<String> = self.histogram.counts.iter().map(|(i, c)| format!("{i}:{c}")).collect();
        format!(
            "n {}\ndistinct {}\nhistogram {}\nfarness {}\n",
            self.sequence.len(),
            self.histogram.distinct(),
            hist.join(" "),
            fmt_rational(&self.farness)
        )
    }
}

pub fn cmd_gen(family: Family, k: u32, n: usize, seed: u64) -> Result<GenOutcome> {
    let sequence = generate_family_instance(family, k, n, seed)?;
    Ok(GenOutcome {
        histogram: histogram(&sequence),
        farness: occurrence_farness(&sequence, k as usize),
        sequence,
    })
}

// ---------------------------------------------------------------- reduce

#[derive(Debug, Clone)]
pub struct ReduceOutcome {
    pub decomposition: PatternDecomposition,
    pub offline: OfflineReduction,
    pub copies: u128,
    pub farness: BigRational,
    pub transferred: BigRational,
}

impl ReduceOutcome {
    pub fn report(&self) -> String {
        let g = &self.offline.graph;
        let mut out = self.decomposition.report();
        let _ = writeln!(out, "vertices {}", g.vertex_count());
        let _ = writeln!(out, "edges {}", g.edge_count());
        let _ = writeln!(out, "copies {}", self.copies);
        let _ = writeln!(out, "sequence_farness {}", fmt_rational(&self.farness));
        let _ = writeln!(out, "graph_farness_lower_bound {}", fmt_rational(&self.transferred));
        out
    }
}

pub fn cmd_reduce(pattern: &BoundedDigraph, sequence: &IntSequence, seed: u64) -> Result<ReduceOutcome> {
    let decomposition = PatternDecomposition::new(pattern)?;
    let k = decomposition.k();
    if sequence.cap() != k {
        return Err(Error::CapMismatch { cap: sequence.cap(), k });
    }
    let offline = build_offline(sequence, &decomposition, seed)?;
    let copies = count_subgraph_copies(&offline.graph, pattern)?;
    let farness = occurrence_farness(sequence, k);
    let transferred = distance_transfer(&farness, pattern.degree_bound().max(1), &decomposition)?;
    Ok(ReduceOutcome {
        decomposition,
        offline,
        copies,
        farness,
        transferred,
    })
}

// ---------------------------------------------------------------- budgets

/// `ceil(x)`, ignoring floating-point noise just above an integer.
fn ceil_tol(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as u64
    } else {
        x.ceil() as u64
    }
}

/// `ceil(n^((1 - 1/k) / 2))`, the below-threshold budget.
pub fn low_budget(k: u32, n: usize) -> u64 {
    ceil_tol((n as f64).powf((1.0 - 1.0 / k as f64) / 2.0))
}

/// `ceil(c * n^(1 - 1/k))`.
pub fn high_budget(k: u32, n: usize, c: f64) -> u64 {
    ceil_tol(c * (n as f64).powf(1.0 - 1.0 / k as f64))
}

/// Distance parameter handed to the bidirectional tester:
/// `q_k / (k * d * (n_comp + n_center))`.
pub fn tester_eps(k: u32, dec: &PatternDecomposition) -> Result<BigRational> {
    let q = make_q(k)?;
    let far = q.prob(k as usize) / BigRational::from_integer(BigInt::from(k));
    distance_transfer(&far, dec.pattern().degree_bound(), dec)
}

// ---------------------------------------------------------------- separation

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationParams {
    pub k: u32,
    pub ns: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub config: TesterConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TesterKind {
    Bidirectional,
    UnidirectionalLow,
    UnidirectionalHigh,
}

impl TesterKind {
    pub fn label(self) -> &'static str {
        match self {
            TesterKind::Bidirectional => "bidirectional",
            TesterKind::UnidirectionalLow => "unidirectional_low",
            TesterKind::UnidirectionalHigh => "unidirectional_high",
        }
    }
}

/// One `(k, n, tester)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationCell {
    pub k: u32,
    pub n: usize,
    pub tester: TesterKind,
    /// Vertex samples for the bidirectional tester, queries otherwise.
    pub budget: u64,
    pub stats: ExperimentStats,
    /// Mean sequence queries behind a unidirectional run (0 for bidirectional).
    pub mean_sequence_queries: f64,
    /// Every reject carried a witness that re-verified on the full graph, and
    /// no run spent more sequence queries than graph queries.
    pub audit_ok: bool,
}

#[derive(Debug, Serialize)]
struct SeparationCsvRow<'a> {
    run_id: &'a str,
    k: u32,
    n: usize,
    seed: u64,
    trials: usize,
    tester: &'static str,
    budget_unit: &'static str,
    budget: u64,
    accept_rate_yes: f64,
    reject_rate_no: f64,
    mean_queries: f64,
    mean_queries_yes: f64,
    mean_queries_no: f64,
    max_queries: u64,
    mean_sequence_queries: f64,
    audit_ok: bool,
}

struct RunRecord {
    verdict: TesterVerdict,
    sequence_queries: u64,
    audit_ok: bool,
}

struct TrialRecord {
    runs: [[RunRecord; 2]; 3],
}

fn run_trial(
    k: u32,
    n: usize,
    dec: &PatternDecomposition,
    eps: &BigRational,
    budgets: (u64, u64),
    cfg: &TesterConfig,
    trial_seed: u64,
) -> Result<TrialRecord> {
    let pattern = dec.pattern();
    let reduction_seed = derive_seed(trial_seed, Stream::TypeDraw, 0);
    let tester_seed = derive_seed(trial_seed, Stream::Tester, 0);
    let mut per_family = Vec::with_capacity(2);
    for (idx, family) in [Family::A, Family::B].into_iter().enumerate() {
        let seq = generate_family_instance(family, k, n, derive_seed(trial_seed, Stream::Family, idx as u64))?;
        let offline = build_offline(&seq, dec, reduction_seed)?;
        let mut bi_session = OracleSession::new(&offline.graph, QueryModel::Bidirectional);
        let bi = bidirectional_hfree_tester(&mut bi_session, dec, eps, cfg, tester_seed)?;
        let bi_ok = bi.queries_used == bi_session.query_count()
            && bi.witness_valid_in_graph(&offline.graph, pattern);
        let uni = |budget: u64| -> Result<RunRecord> {
            let oracle = ReductionOracle::new(MeteredSequence::new(&seq), dec, reduction_seed);
            let mut session = OracleSession::new(oracle, QueryModel::Unidirectional);
            let verdict = unidirectional_hfree_tester(&mut session, dec, budget, cfg, tester_seed)?;
            let sequence_queries = session.inner().sequence_queries();
            let audit_ok = verdict.queries_used == session.query_count()
                && verdict.queries_used <= budget
                && sequence_queries <= verdict.queries_used
                && verdict.witness_valid_in_graph(&offline.graph, pattern);
            Ok(RunRecord {
                verdict,
                sequence_queries,
                audit_ok,
            })
        };
        let low = uni(budgets.0)?;
        let high = uni(budgets.1)?;
        per_family.push([
            RunRecord {
                verdict: bi,
                sequence_queries: 0,
                audit_ok: bi_ok,
            },
            low,
            high,
        ]);
    }
    let b = per_family.pop().expect("two families");
    let a = per_family.pop().expect("two families");
    let [a0, a1, a2] = a;
    let [b0, b1, b2] = b;
    Ok(TrialRecord {
        runs: [[a0, b0], [a1, b1], [a2, b2]],
    })
}

/// Runs every cell of the separation benchmark. Trials run on the current
/// rayon pool and are aggregated in index order.
pub fn separation_cells(params: &SeparationParams) -> Result<Vec<SeparationCell>> {
    let k = params.k;
    if params.trials < 200 {
        return Err(Error::InvalidArgument(format!(
            "separation needs at least 200 trials, got {}",
            params.trials
        )));
    }
    let pattern = star(k as usize);
    let dec = PatternDecomposition::new(&pattern)?;
    let eps = tester_eps(k, &dec)?;
    let samples = (params.config.c_bi / num::ToPrimitive::to_f64(&eps).unwrap_or(f64::NAN))
        .ceil()
        .max(1.0) as u64;
    let mut ns = params.ns.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut cells = Vec::new();
    for &n in &ns {
        check_joint_realizable(k, n)?;
        let oracle_size = (n * (dec.n_comp() + dec.n_center()) * (pattern.degree_bound() + 1)) as u64;
        let clamp = |b: u64, label: &str| {
            if b > oracle_size {
                log::warn!("{label} budget {b} exceeds oracle size {oracle_size} at n = {n}; clamped");
                oracle_size
            } else {
                b
            }
        };
        let budgets = (
            clamp(low_budget(k, n), "low"),
            clamp(high_budget(k, n, params.config.c_uni), "high"),
        );
        let base = derive_seed(params.seed, Stream::Trial, n as u64);
        let records: Vec<TrialRecord> = (0..params.trials)
            .into_par_iter()
            .map(|t| {
                let trial_seed = derive_seed(base, Stream::Trial, t as u64);
                run_trial(k, n, &dec, &eps, budgets, &params.config, trial_seed)
            })
            .collect::<Result<_>>()?;
        let kinds = [
            (TesterKind::Bidirectional, samples, None),
            (TesterKind::UnidirectionalLow, budgets.0, Some(budgets.0)),
            (TesterKind::UnidirectionalHigh, budgets.1, Some(budgets.1)),
        ];
        for (slot, (kind, budget, enforced)) in kinds.into_iter().enumerate() {
            let yes: Vec<TesterVerdict> = records.iter().map(|r| r.runs[slot][0].verdict.clone()).collect();
            let no: Vec<TesterVerdict> = records.iter().map(|r| r.runs[slot][1].verdict.clone()).collect();
            let all = records.iter().flat_map(|r| &r.runs[slot]);
            let total_seq: u64 = all.clone().map(|x| x.sequence_queries).sum();
            let audit_ok = all.clone().all(|x| x.audit_ok);
            cells.push(SeparationCell {
                k,
                n,
                tester: kind,
                budget,
                stats: ExperimentStats::from_verdicts(&yes, &no, enforced),
                mean_sequence_queries: total_seq as f64 / (2 * params.trials) as f64,
                audit_ok,
            });
        }
    }
    Ok(cells)
}

fn separation_csv(params: &SeparationParams, cells: &[SeparationCell], run_id: &str) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in cells {
        w.serialize(SeparationCsvRow {
            run_id,
            k: c.k,
            n: c.n,
            seed: params.seed,
            trials: c.stats.trials,
            tester: c.tester.label(),
            budget_unit: if c.tester == TesterKind::Bidirectional { "samples" } else { "queries" },
            budget: c.budget,
            accept_rate_yes: c.stats.accept_rate_on_yes,
            reject_rate_no: c.stats.reject_rate_on_no,
            mean_queries: c.stats.mean_queries,
            mean_queries_yes: c.stats.mean_queries_yes,
            mean_queries_no: c.stats.mean_queries_no,
            max_queries: c.stats.max_queries,
            mean_sequence_queries: c.mean_sequence_queries,
            audit_ok: c.audit_ok,
        })?;
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv flush failed: {e}")))
}

// ---------------------------------------------------------------- poisson

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonParams {
    pub k: u32,
    pub n: usize,
    pub s_list: Vec<u64>,
    pub trials: usize,
    pub seed: u64,
    pub config: TesterConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonCell {
    pub s: u64,
    pub stats: ExperimentStats,
}

#[derive(Debug, Serialize)]
struct PoissonCsvRow<'a> {
    run_id: &'a str,
    k: u32,
    n: usize,
    seed: u64,
    trials: usize,
    budget: u64,
    statistic: &'static str,
    accept_rate_yes: f64,
    reject_rate_no: f64,
    advantage: f64,
    mean_samples: f64,
}

pub fn poisson_cells(params: &PoissonParams) -> Result<Vec<PoissonCell>> {
    let p = make_p(params.k)?;
    let q = make_q(params.k)?;
    let mut s_list = params.s_list.clone();
    s_list.sort_unstable();
    s_list.dedup();
    s_list
        .into_iter()
        .map(|s| {
            let seed = derive_seed(params.seed, Stream::Calibration, s);
            let stats = poisson_histogram_distinguisher(
                &p,
                &q,
                params.n,
                s as f64,
                params.trials,
                seed,
                params.config.statistic,
            )?;
            Ok(PoissonCell { s, stats })
        })
        .collect()
}

fn poisson_csv(params: &PoissonParams, cells: &[PoissonCell], run_id: &str) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in cells {
        w.serialize(PoissonCsvRow {
            run_id,
            k: params.k,
            n: params.n,
            seed: params.seed,
            trials: params.trials,
            budget: c.s,
            statistic: params.config.statistic.label(),
            accept_rate_yes: c.stats.accept_rate_on_yes,
            reject_rate_no: c.stats.reject_rate_on_no,
            advantage: c.stats.advantage(),
            mean_samples: c.stats.mean_queries,
        })?;
    }
    finish_csv(w)
}

// ---------------------------------------------------------------- jobs and manifests

/// First 16 hex digits of a SHA-256 over the command, its arguments, the
/// seed, the artifact version and the tester config.
pub fn compute_run_id(command: &str, args: &[(String, String)], seed: u64, config: &TesterConfig) -> String {
    let mut canon = format!("command={command}\n");
    for (k, v) in args {
        let _ = writeln!(canon, "arg.{k}={v}");
    }
    let _ = writeln!(canon, "seed={seed}");
    let _ = writeln!(canon, "version={ARTIFACT_VERSION}");
    canon.push_str(&config.to_text());
    let digest = Sha256::digest(canon.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// A benchmark whose CSV output is fully determined by its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Separation(SeparationParams),
    Poisson(PoissonParams),
}

fn join_list<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn parse_list<T: std::str::FromStr>(key: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad value `{x}` for {key}")))
        })
        .collect()
}

impl Job {
    pub fn command(&self) -> &'static str {
        match self {
            Job::Separation(_) => "separation",
            Job::Poisson(_) => "poisson",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Job::Separation(p) => p.seed,
            Job::Poisson(p) => p.seed,
        }
    }

    pub fn config(&self) -> &TesterConfig {
        match self {
            Job::Separation(p) => &p.config,
            Job::Poisson(p) => &p.config,
        }
    }

    /// Parameters other than seed and config, in a fixed order.
    pub fn args(&self) -> Vec<(String, String)> {
        let kv = |k: &str, v: String| (k.to_string(), v);
        match self {
            Job::Separation(p) => vec![
                kv("k", p.k.to_string()),
                kv("n", join_list(&p.ns)),
                kv("trials", p.trials.to_string()),
            ],
            Job::Poisson(p) => vec![
                kv("k", p.k.to_string()),
                kv("n", p.n.to_string()),
                kv("s", join_list(&p.s_list)),
                kv("trials", p.trials.to_string()),
            ],
        }
    }

    /// Hash of everything that determines the CSV body.
    pub fn run_id(&self) -> String {
        compute_run_id(self.command(), &self.args(), self.seed(), self.config())
    }

    /// Runs on the current rayon pool and returns the CSV bytes.
    pub fn run(&self) -> Result<Vec<u8>> {
        let run_id = self.run_id();
        match self {
            Job::Separation(p) => separation_csv(p, &separation_cells(p)?, &run_id),
            Job::Poisson(p) => poisson_csv(p, &poisson_cells(p)?, &run_id),
        }
    }

    pub fn from_manifest(m: &RunManifest) -> Result<Job> {
        let get = |key: &str| {
            m.args
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::InvalidArgument(format!("manifest lacks arg.{key}")))
        };
        let one = |key: &str| -> Result<usize> {
            get(key)?
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad arg.{key}")))
        };
        match m.command.as_str() {
            "separation" => Ok(Job::Separation(SeparationParams {
                k: one("k")? as u32,
                ns: parse_list("n", get("n")?)?,
                trials: one("trials")?,
                seed: m.seed,
                config: m.config.clone(),
            })),
            "poisson" => Ok(Job::Poisson(PoissonParams {
                k: one("k")? as u32,
                n: one("n")?,
                s_list: parse_list("s", get("s")?)?,
                trials: one("trials")?,
                seed: m.seed,
                config: m.config.clone(),
            })),
            other => Err(Error::InvalidArgument(format!("cannot replay command `{other}`"))),
        }
    }
}

/// Plain-text record of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub run_id: String,
    pub command: String,
    pub args: Vec<(String, String)>,
    pub seed: u64,
    pub version: String,
    pub config: TesterConfig,
    pub jobs: usize,
    pub started: u64,
    pub finished: u64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "run_id = {}", self.run_id);
        let _ = writeln!(out, "command = {}", self.command);
        for (k, v) in &self.args {
            let _ = writeln!(out, "arg.{k} = {v}");
        }
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "seed_derivation = splitmix64(base, stream, index)");
        let _ = writeln!(out, "version = {}", self.version);
        for line in self.config.to_text().lines() {
            let _ = writeln!(out, "config.{line}");
        }
        let _ = writeln!(out, "jobs = {}", self.jobs);
        let _ = writeln!(out, "started = {}", self.started);
        let _ = writeln!(out, "finished = {}", self.finished);
        for p in &self.outputs {
            let _ = writeln!(out, "output = {}", p.display());
        }
        out
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut m = RunManifest {
            run_id: String::new(),
            command: String::new(),
            args: Vec::new(),
            seed: 0,
            version: String::new(),
            config: TesterConfig::default(),
            jobs: 1,
            started: 0,
            finished: 0,
            outputs: Vec::new(),
        };
        let mut config_text = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, lineno, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| Error::parse(origin, lineno, format!("bad number `{v}`")))
            };
            match key {
                "run_id" => m.run_id = value.to_string(),
                "command" => m.command = value.to_string(),
                "seed" => m.seed = num(value)?,
                "version" => m.version = value.to_string(),
                "jobs" => m.jobs = num(value)? as usize,
                "started" => m.started = num(value)?,
                "finished" => m.finished = num(value)?,
                "output" => m.outputs.push(PathBuf::from(value)),
                "seed_derivation" => {}
                _ => {
                    if let Some(arg) = key.strip_prefix("arg.") {
                        m.args.push((arg.to_string(), value.to_string()));
                    } else if let Some(c) = key.strip_prefix("config.") {
                        let _ = writeln!(config_text, "{c} = {value}");
                    } else {
                        return Err(Error::parse(origin, lineno, format!("unknown key `{key}`")));
                    }
                }
            }
        }
        m.config = TesterConfig::parse(&config_text, origin)?;
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

impl RunManifest {
    /// Manifest for a one-shot command that is not replayed.
    pub fn one_shot(command: &str, args: Vec<(String, String)>, seed: u64, outputs: Vec<PathBuf>) -> Self {
        let config = TesterConfig::default();
        let stamp = now();
        RunManifest {
            run_id: compute_run_id(command, &args, seed, &config),
            command: command.to_string(),
            args,
            seed,
            version: ARTIFACT_VERSION.to_string(),
            config,
            jobs: 1,
            started: stamp,
            finished: stamp,
            outputs,
        }
    }
}

/// Where the manifest for an output file lives.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// `PROPTEST_JOBS` if set, else `requested`, else the number of cores.
pub fn resolve_jobs(requested: Option<usize>) -> usize {
    let env = std::env::var("PROPTEST_JOBS").ok().and_then(|v| v.trim().parse().ok());
    env.or(requested)
        .filter(|&j| j > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Runs `job` on a pool of `jobs` threads, writes the CSV to `out` and its
/// manifest next to it.
pub fn execute(job: &Job, out: &Path, jobs: usize) -> Result<RunManifest> {
    let started = now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let body = pool.install(|| job.run())?;
    std::fs::write(out, &body).map_err(|e| Error::io(out, e))?;
    let manifest = RunManifest {
        run_id: job.run_id(),
        command: job.command().to_string(),
        args: job.args(),
        seed: job.seed(),
        version: ARTIFACT_VERSION.to_string(),
        config: job.config().clone(),
        jobs,
        started,
        finished: now(),
        outputs: vec![out.to_path_buf()],
    };
    manifest.write(&manifest_path_for(out))?;
    Ok(manifest)
}

/// Re-runs the job a manifest describes, writing to `out` (or the recorded
/// output when `None`).
pub fn replay(manifest_path: &Path, out: Option<&Path>, jobs: usize) -> Result<RunManifest> {
    let recorded = RunManifest::read(manifest_path)?;
    let job = Job::from_manifest(&recorded)?;
    if job.run_id() != recorded.run_id {
        return Err(Error::InvalidArgument(format!(
            "manifest run_id {} does not match its parameters ({})",
            recorded.run_id,
            job.run_id()
        )));
    }
    let target = match out {
        Some(p) => p.to_path_buf(),
        None => recorded
            .outputs
            .first()
            .cloned()
            .ok_or_else(|| Error::InvalidArgument("manifest lists no output".into()))?,
    };
    execute(&job, &target, jobs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::patterns::three_source_example;

    #[test]
    fn verify_small_and_corrupted() {
        let r = cmd_verify(2, false).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.all_pass());
        let bad = cmd_verify(4, true).unwrap();
        assert!(!bad.all_pass());
        assert!(bad.render().contains("FAIL"));
        assert!(cmd_verify(1, false).is_err());
    }

    #[test]
    fn gen_examples() {
        let b = cmd_gen(Family::B, 3, 12, 1).unwrap();
        assert_eq!(b.histogram.distinct(), 8);
        assert!(b.report().contains("farness 1/6"));
        let a = cmd_gen(Family::A, 3, 12, 1).unwrap();
        assert!(a.farness.is_zero());
        assert!(matches!(
            cmd_gen(Family::B, 3, 13, 1),
            Err(Error::Unrealizable { lower: Some(12), upper: 18, .. })
        ));
    }

    #[test]
    fn reduce_examples() {
        let s = IntSequence::new(vec![1, 2, 1, 3, 2, 1], 3).unwrap();
        let out = cmd_reduce(&three_source_example(), &s, 2).unwrap();
        assert_eq!(out.offline.graph.vertex_count(), 30);
        assert_eq!(out.copies, 1);
        assert!(out.report().contains("copies 1\n"));
        let distinct = IntSequence::new(vec![1, 2, 3], 2).unwrap();
        assert_eq!(cmd_reduce(&star(2), &distinct, 0).unwrap().copies, 0);
        assert!(matches!(cmd_reduce(&star(2), &s, 0), Err(Error::CapMismatch { cap: 3, k: 2 })));
    }

    #[test]
    fn budgets() {
        assert_eq!(low_budget(3, 6000), 19);
        assert_eq!(low_budget(3, 8000), 20);
        assert_eq!(low_budget(3, 60000), 40);
        assert_eq!(high_budget(3, 8000, 2.0), 800);
        let dec = PatternDecomposition::new(&star(3)).unwrap();
        assert_eq!(tester_eps(3, &dec).unwrap(), BigRational::new(1.into(), 72.into()));
    }

    #[test]
    fn manifest_round_trip() {
        let job = Job::Poisson(PoissonParams {
            k: 3,
            n: 600,
            s_list: vec![0, 10],
            trials: 100,
            seed: 9,
            config: TesterConfig::default(),
        });
        let m = RunManifest {
            run_id: job.run_id(),
            command: job.command().into(),
            args: job.args(),
            seed: 9,
            version: ARTIFACT_VERSION.into(),
            config: TesterConfig::default(),
            jobs: 2,
            started: 1,
            finished: 2,
            outputs: vec![PathBuf::from("x.csv")],
        };
        let back = RunManifest::parse(&m.to_text(), "m").unwrap();
        assert_eq!(back, m);
        assert_eq!(Job::from_manifest(&back).unwrap(), job);
    }

    #[test]
    fn separation_needs_trials() {
        let params = SeparationParams {
            k: 3,
            ns: vec![600],
            trials: 10,
            seed: 0,
            config: TesterConfig::default(),
        };
        assert!(separation_cells(&params).is_err());
    }
}
