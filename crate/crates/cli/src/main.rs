use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use hfree_lab::config::TesterConfig;
use hfree_lab::experiment::{
    cmd_gen, cmd_reduce, cmd_verify, execute, manifest_path_for, replay, resolve_jobs, Job, PoissonParams,
    RunManifest, SeparationParams,
};
use hfree_lab::occurrence::{Family, IntSequence};
use hfree_lab::BoundedDigraph;

#[derive(Debug, Parser)]
#[command(name = "hfree-lab", version, about = "Hard instances and query-metered testers for subgraph-freeness")]
struct Cli {
    /// Log at debug level.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the exact identities behind the p/q pair for k = 2..=kmax.
    Verify {
        #[arg(long)]
        kmax: u32,
        #[arg(long, hide = true)]
        corrupt_q: bool,
    },
    /// Generate a sequence from family A (p) or B (q).
    Gen {
        #[arg(long = "class")]
        class: Family,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the reduced graph of a sequence for a pattern.
    Reduce {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        sequence: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bidirectional vs unidirectional testers on reduced hard instances.
    Separation {
        #[arg(long)]
        k: u32,
        #[arg(long = "n", required = true)]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        run: RunOptions,
    },
    /// Distinguishing advantage of a histogram statistic on Poissonized samples.
    Poisson {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: usize,
        #[arg(long = "s", required = true)]
        s_list: Vec<u64>,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        run: RunOptions,
    },
    /// Re-run the job recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        /// Defaults to the output recorded in the manifest.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Debug, clap::Args)]
struct RunOptions {
    /// Tester constants; defaults to the built-in frozen values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads. `PROPTEST_JOBS` overrides this.
    #[arg(long)]
    jobs: Option<usize>,
}

impl RunOptions {
    fn config(&self) -> Result<TesterConfig> {
        Ok(match &self.config {
            Some(p) => TesterConfig::read(p)?,
            None => TesterConfig::default(),
        })
    }
}

fn sidecar(out: &Path, ext: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run_job(job: Job, out: &Path, jobs: Option<usize>) -> Result<()> {
    let jobs = resolve_jobs(jobs);
    let manifest = execute(&job, out, jobs)?;
    println!("run_id {}", manifest.run_id);
    println!("wrote {}", out.display());
    println!("manifest {}", manifest_path_for(out).display());
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Verify { kmax, corrupt_q } => {
            let report = cmd_verify(kmax, corrupt_q)?;
            print!("{}", report.render());
            return Ok(if report.all_pass() { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
        Command::Gen { class, k, n, seed, out } => {
            let g = cmd_gen(class, k, n, seed)?;
            g.sequence.write(&out)?;
            print!("{}", g.report());
        }
        Command::Reduce { pattern, sequence, seed, out } => {
            let h = BoundedDigraph::read_edge_list(&pattern)?;
            let s = IntSequence::read(&sequence)?;
            let r = cmd_reduce(&h, &s, seed)?;
            let types = sidecar(&out, ".types");
            let report_path = sidecar(&out, ".report");
            r.offline.graph.write_edge_list(&out)?;
            write(&types, &r.offline.sidecar())?;
            let report = r.report();
            write(&report_path, &report)?;
            let args = vec![
                ("pattern".to_string(), pattern.display().to_string()),
                ("sequence".to_string(), sequence.display().to_string()),
            ];
            RunManifest::one_shot("reduce", args, seed, vec![out.clone(), types, report_path])
                .write(&manifest_path_for(&out))?;
            print!("{report}");
        }
        Command::Separation { k, ns, trials, seed, out, run } => {
            let params = SeparationParams { k, ns, trials, seed, config: run.config()? };
            run_job(Job::Separation(params), &out, run.jobs)?;
        }
        Command::Poisson { k, n, s_list, trials, seed, out, run } => {
            if trials < 100 {
                bail!("poisson needs at least 100 trials, got {trials}");
            }
            let params = PoissonParams { k, n, s_list, trials, seed, config: run.config()? };
            run_job(Job::Poisson(params), &out, run.jobs)?;
        }
        Command::Replay { manifest, out, jobs } => {
            let m = replay(&manifest, out.as_deref(), resolve_jobs(jobs))?;
            println!("run_id {}", m.run_id);
            for o in &m.outputs {
                println!("wrote {}", o.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
