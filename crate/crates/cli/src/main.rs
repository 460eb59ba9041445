mod config;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bisect_core::algorithms::ParamOverrides;
use bisect_core::harness::{
    self, GeneratorKind, GeneratorSpec, Lemma, RunOptions, SweepJob, SweepRow, Verdict,
};
use bisect_core::opt::{exact_opt_capped, DEFAULT_STATE_CAP};
use bisect_core::{
    nonneg_bezout, oracle, trace, verify, AlgorithmKind, BisectError, ComponentSet, IcbParameters, Instance,
    Partition, Result,
};

use config::Config;

#[derive(Debug, Parser)]
#[command(name = "bisect", version, about = "Online bisection simulator and oracles")]
struct Cli {
    /// JSON config file; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one algorithm on one generated instance.
    Simulate(SimArgs),
    /// Run many seeds (and algorithms) in parallel.
    Sweep(SweepArgs),
    /// Run the built-in self-checks.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Query the partition oracles for a list of component sizes.
    Oracle {
        #[command(subcommand)]
        query: OracleQuery,
    },
    /// Non-negative Bezout certificate: `bezout A... -- B...`.
    Bezout {
        #[arg(required = true)]
        a: Vec<u64>,
        #[arg(last = true, required = true)]
        b: Vec<u64>,
    },
    /// Exact offline optimum and epoch lower bound for a recorded trace.
    Opt {
        #[arg(long)]
        trace: PathBuf,
        /// Number of elements; inferred from --p0 or the trace otherwise.
        #[arg(long)]
        n: Option<usize>,
        /// Initial partition as a 0/1 string (default: first half on side 0).
        #[arg(long)]
        p0: Option<String>,
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        cap: u128,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Number of elements (even).
    #[arg(long)]
    n: Option<usize>,
    /// Number of requests.
    #[arg(long = "T", short = 'T')]
    t: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    w: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// uniform, adaptive_cut or merge_script.
    #[arg(long = "gen")]
    generator: Option<String>,
    /// Merge-script block sizes, e.g. 2,4,8 (default: doubling).
    #[arg(long, value_delimiter = ',')]
    script: Option<Vec<usize>>,
    /// Output directory (also settable through BISECT_OUT_DIR).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Abort with exit code 2 on the first monitor violation.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct SimArgs {
    /// icb, cb or static.
    #[arg(long)]
    alg: Option<String>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated algorithm names.
    #[arg(long, value_delimiter = ',')]
    alg: Option<Vec<String>>,
    /// Number of seeds, starting at --seed.
    #[arg(long)]
    seeds: Option<u64>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Subcommand)]
enum OracleQuery {
    /// Number of preserving balanced partitions.
    Count(SizesArg),
    /// Whether any preserving balanced partition exists.
    Exists(SizesArg),
    /// Closest preserving partition to --prev.
    Closest {
        #[command(flatten)]
        sizes: SizesArg,
        /// Previous partition as a 0/1 string (default: first half on side 0).
        #[arg(long)]
        prev: Option<String>,
    },
    /// Uniform draws from the preserving partitions.
    Sample {
        #[command(flatten)]
        sizes: SizesArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        draws: usize,
    },
}

#[derive(Debug, Args)]
struct SizesArg {
    /// Component sizes; components occupy consecutive elements.
    sizes: Vec<usize>,
    /// Sizes as a JSON array instead, e.g. '[2,1,1]'.
    #[arg(long, conflicts_with = "sizes")]
    json: Option<String>,
}

impl SizesArg {
    fn set(&self) -> Result<ComponentSet> {
        let sizes = match &self.json {
            Some(text) => serde_json::from_str::<Vec<usize>>(text)
                .map_err(|e| BisectError::usage(format!("bad sizes JSON: {e}")))?,
            None => self.sizes.clone(),
        };
        if sizes.is_empty() {
            return Err(BisectError::usage("no component sizes given"));
        }
        ComponentSet::from_sizes(&sizes)
    }
}

/// Flags merged over the config file.
struct Resolved {
    n: usize,
    t: usize,
    seed: u64,
    overrides: ParamOverrides,
    generator: GeneratorKind,
    script: Vec<usize>,
    out_dir: PathBuf,
    strict: bool,
}

fn resolve(args: RunArgs, cfg: &Config) -> Result<Resolved> {
    let n = args
        .n
        .or(cfg.n)
        .ok_or_else(|| BisectError::usage("--n is required"))?;
    bisect_core::model::check_universe(n)?;
    let generator = args
        .generator
        .or(cfg.generator.clone())
        .unwrap_or_else(|| "uniform".into())
        .parse()?;
    Ok(Resolved {
        n,
        t: args.t.or(cfg.t).unwrap_or(5 * n),
        seed: args.seed.or(cfg.seed).unwrap_or(0),
        overrides: ParamOverrides {
            q: args.q.or(cfg.q),
            w: args.w.or(cfg.w),
            d: args.d.or(cfg.d),
        },
        generator,
        script: args.script.or(cfg.script.clone()).unwrap_or_default(),
        out_dir: config::out_dir(args.out_dir, cfg),
        strict: args.strict || cfg.strict.unwrap_or(false),
    })
}

fn params_blob(o: &ParamOverrides) -> Option<serde_json::Value> {
    (o.q.is_some() || o.w.is_some() || o.d.is_some())
        .then(|| serde_json::to_value(o).expect("overrides serialize"))
}

fn warn_on_defaults(kind: AlgorithmKind, n: usize, o: &ParamOverrides) -> Result<()> {
    if kind != AlgorithmKind::Icb {
        return Ok(());
    }
    let p = IcbParameters::with_overrides(n, *o)?;
    let v = p.violations();
    if !v.is_empty() {
        eprintln!(
            "warning: ICB parameters q = {}, w = {}, d = {} are outside the analysed regime ({}); lemma monitors will be skipped",
            p.q,
            p.w,
            p.d,
            v.join("; ")
        );
    }
    Ok(())
}

fn io_err(path: &Path, e: std::io::Error) -> BisectError {
    BisectError::Io(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?))
}

fn job(kind: AlgorithmKind, r: &Resolved, seed: u64) -> SweepJob {
    SweepJob {
        algorithm: kind,
        params: params_blob(&r.overrides),
        generator: GeneratorSpec {
            kind: r.generator,
            n: r.n,
            t: r.t,
            seed,
        },
        timeline: r.script.clone(),
        alg_seed: seed,
    }
}

fn simulate(args: SimArgs, cfg: &Config) -> Result<()> {
    let kind: AlgorithmKind = args.alg.or(cfg.alg.clone()).unwrap_or_else(|| "icb".into()).parse()?;
    let r = resolve(args.run, cfg)?;
    warn_on_defaults(kind, r.n, &r.overrides)?;
    let opts = RunOptions {
        monitors: Lemma::ALL.to_vec(),
        strict: r.strict,
    };
    let out = harness::run_job(&job(kind, &r, r.seed), &opts)?;

    let csv_path = r.out_dir.join("steps.csv");
    let report_path = r.out_dir.join("report.json");
    let trace_path = r.out_dir.join("trace.jsonl");
    let mut w = create(&csv_path)?;
    out.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&report_path)?;
    writeln!(w, "{}", out.report.to_json())?;
    w.flush()?;
    let mut w = create(&trace_path)?;
    out.write_trace(&mut w)?;
    w.flush()?;

    let rep = &out.report;
    println!(
        "{} n={} T={}: total {} (service {}, switching {}, rebalancing {}), {} finished epochs",
        rep.algorithm,
        rep.n,
        rep.requests,
        rep.total_cost,
        rep.service_cost,
        rep.switching_cost,
        rep.rebalancing_cost,
        rep.epochs_finished
    );
    for (lemma, verdict) in &rep.verdicts {
        println!("  {lemma}: {}", verdict_name(*verdict));
    }
    println!("wrote {}, {}, {}", csv_path.display(), report_path.display(), trace_path.display());
    Ok(())
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Skipped => "skipped",
    }
}

fn sweep(args: SweepArgs, cfg: &Config) -> Result<()> {
    let names = args
        .alg
        .or(cfg.alg.clone().map(|a| vec![a]))
        .unwrap_or_else(|| vec!["icb".into(), "cb".into(), "static".into()]);
    let kinds = names.iter().map(|s| s.parse()).collect::<Result<Vec<AlgorithmKind>>>()?;
    let seeds = args.seeds.or(cfg.seeds).unwrap_or(10);
    let r = resolve(args.run, cfg)?;
    for &k in &kinds {
        warn_on_defaults(k, r.n, &r.overrides)?;
    }
    let jobs: Vec<SweepJob> = kinds
        .iter()
        .flat_map(|&k| (r.seed..r.seed + seeds).map(move |s| (k, s)))
        .map(|(k, s)| job(k, &r, s))
        .collect();
    let opts = RunOptions {
        monitors: Lemma::ALL.to_vec(),
        strict: r.strict,
    };
    let reports = harness::sweep(&jobs, &opts);

    let path = r.out_dir.join("sweep.csv");
    let mut wr = csv::Writer::from_writer(create(&path)?);
    let mut first_err = None;
    let mut failed = 0;
    for (job, rep) in jobs.iter().zip(reports) {
        match rep {
            Ok(rep) => {
                let row = SweepRow::new(job, &rep);
                failed += usize::from(row.monitors_failed > 0);
                wr.serialize(row).map_err(|e| BisectError::Io(e.to_string()))?;
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    wr.flush()?;
    println!("{} runs, {failed} with failing monitors; wrote {}", jobs.len(), path.display());
    match first_err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn verify_cmd(seed: u64) -> Result<bool> {
    let checks = verify::run_all(seed)?;
    let mut ok = true;
    for c in &checks {
        ok &= c.passed;
        println!(
            "{}: {} ({} cases){}",
            c.name,
            if c.passed { "pass" } else { "FAIL" },
            c.cases,
            if c.detail.is_empty() { String::new() } else { format!(": {}", c.detail) }
        );
    }
    Ok(ok)
}

fn prev_partition(bits: Option<&str>, n: usize) -> Result<Partition> {
    let p = match bits {
        Some(b) => Partition::parse_bits(b)?,
        None => Partition::halves(n)?,
    };
    if p.n() != n {
        return Err(BisectError::UniverseMismatch(p.n(), n));
    }
    Ok(p)
}

fn oracle_cmd(query: OracleQuery) -> Result<()> {
    match query {
        OracleQuery::Count(s) => println!("{}", oracle::count_preserving(&s.set()?)),
        OracleQuery::Exists(s) => println!("{}", oracle::exists_preserving(&s.set()?)),
        OracleQuery::Closest { sizes, prev } => {
            let set = sizes.set()?;
            let prev = prev_partition(prev.as_deref(), set.n())?;
            match oracle::closest_preserving(&set, &prev)? {
                Some((p, d)) => println!("{}", serde_json::json!({"partition": p.to_bits(), "dist": d})),
                None => println!("null"),
            }
        }
        OracleQuery::Sample { sizes, seed, draws } => {
            let set = sizes.set()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..draws {
                println!("{}", oracle::sample_uniform(&set, &mut rng)?);
            }
        }
    }
    Ok(())
}

fn bezout_cmd(a: Vec<u64>, b: Vec<u64>) -> Result<()> {
    let a: BTreeSet<u64> = a.into_iter().collect();
    let b: BTreeSet<u64> = b.into_iter().collect();
    let cert = nonneg_bezout(&a, &b)?;
    println!("{}", serde_json::to_string_pretty(&cert.to_json()).expect("json"));
    Ok(())
}

fn opt_cmd(trace_path: &Path, n: Option<usize>, p0: Option<String>, cap: u128) -> Result<()> {
    let file = File::open(trace_path).map_err(|e| io_err(trace_path, e))?;
    let records = trace::read_trace(BufReader::new(file))?;
    let n = match (n, &p0) {
        (Some(n), _) => n,
        (None, Some(bits)) => Partition::parse_bits(bits)?.n(),
        (None, None) => {
            let max = records.iter().map(|r| r.u.0.max(r.v.0)).max().unwrap_or(1);
            (max + 2) & !1
        }
    };
    let p0 = prev_partition(p0.as_deref(), n)?;
    let inst = Instance::from_trace(p0, &records)?;
    let bound = bisect_core::epoch_lower_bound(&records);
    match exact_opt_capped(&inst, cap) {
        Ok(v) => println!("{}", serde_json::json!({"n": n, "requests": inst.len(), "opt": v, "epoch_lower_bound": bound})),
        Err(BisectError::Capacity { states, cap }) => {
            eprintln!("exact OPT skipped: {states} partition states exceed the cap of {cap}");
            println!("{}", serde_json::json!({"n": n, "requests": inst.len(), "opt": null, "epoch_lower_bound": bound}));
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    let cfg = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate(args) => simulate(args, &cfg)?,
        Command::Sweep(args) => sweep(args, &cfg)?,
        Command::Verify { seed } => {
            if !verify_cmd(seed)? {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Oracle { query } => oracle_cmd(query)?,
        Command::Bezout { a, b } => bezout_cmd(a, b)?,
        Command::Opt { trace, n, p0, cap } => opt_cmd(&trace, n, p0, cap)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e @ BisectError::Monitor { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
