//! The `spi` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 solve failure (including an
//! unidentifiable planting), 3 I/O or file-format error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::fourier::{distribution_complexity, predicate_lowest_degree, predicate_spectrum, witnesses_of_degree, Complexity, FourierReport};
use crate::instances::io::{read_instance, write_instance, CspFile, GoldreichFile, InstanceFile, SbmFile};
use crate::instances::{
    majority_predicate, parity_predicate, sample_bipartite_block, sample_goldreich, sample_planted_csp,
    BlockModelParams, HiddenPartition, PlantingDistribution,
};
use crate::reduction::{csp_to_bipartite, goldreich_to_bipartite, LeftLiteral, ReducedInstance, ReductionOptions, SignHandling, Thinning};
use crate::solver::{spi_solve, SolveMode, SolverConfig};

use super::{load_sweep_spec, run_sweep, solve_csp_end_to_end, solve_goldreich_end_to_end, write_sweep_csv, HarnessError, PipelineOptions, PipelineStatus};

#[derive(Debug, Parser)]
#[command(name = "spi", version, about = "Planted CSP recovery by reduction to a bipartite block model and subsampled power iteration")]
struct Cli {
    /// Seed for generation and solving (default 0; for sweeps, overrides the spec).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write results here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Result format (instance files are always JSON lines).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Suppress the summary on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a bipartite block model.
    GenSbm {
        #[arg(long)]
        n1: usize,
        #[arg(long)]
        n2: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        p: f64,
        /// Do not store the hidden partition.
        #[arg(long)]
        no_truth: bool,
    },
    /// Sample a planted CSP.
    GenCsp {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        q: DistributionArgs,
        #[arg(long)]
        no_sigma: bool,
    },
    /// Sample a Goldreich-style predicate instance.
    GenGoldreich {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        predicate: PredicateArgs,
        #[arg(long)]
        no_sigma: bool,
    },
    /// Report distribution complexity and the correlated subset.
    AnalyzeQ {
        #[command(flatten)]
        q: DistributionArgs,
        /// Analyse a predicate instead, e.g. `--predicate-preset parity:3`.
        #[arg(long, conflicts_with_all = ["weights", "preset"])]
        predicate: Option<String>,
        #[arg(long, conflicts_with_all = ["weights", "preset", "predicate"])]
        predicate_preset: Option<String>,
        /// List every subset of the minimal size with a nonzero coefficient.
        #[arg(long)]
        all_witnesses: bool,
    },
    /// Reduce a CSP or Goldreich file to a block model file.
    Reduce {
        #[arg(long, short)]
        input: PathBuf,
        #[command(flatten)]
        reduction: ReductionArgs,
    },
    /// Recover the left partition of a block model file.
    Solve {
        #[arg(long, short)]
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Solve a CSP or Goldreich file end to end.
    SolveCsp {
        #[arg(long, short)]
        input: PathBuf,
        #[command(flatten)]
        reduction: ReductionArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run a recovery-rate sweep from a TOML or JSON spec.
    Sweep {
        #[arg(long, short)]
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        /// Leave the runtime column empty for reproducible output.
        #[arg(long)]
        no_wall_clock: bool,
    },
}

#[derive(Debug, Args)]
struct DistributionArgs {
    /// Comma-separated weights over the 2^k sign patterns.
    #[arg(long)]
    weights: Option<String>,
    /// `ksat:K`, `xor:K:ETA` or `uniform:K`.
    #[arg(long, conflicts_with = "weights")]
    preset: Option<String>,
}

#[derive(Debug, Args)]
struct PredicateArgs {
    /// Comma-separated ±1 table over the 2^k sign patterns.
    #[arg(long)]
    predicate: Option<String>,
    /// `parity:K`, `majority:K` or `const:K`.
    #[arg(long, conflicts_with = "predicate")]
    predicate_preset: Option<String>,
}

#[derive(Debug, Args)]
struct ReductionArgs {
    #[arg(long, value_enum, default_value_t = ThinningArg::Dedup)]
    thinning: ThinningArg,
    /// Target ratio for Poisson thinning.
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = LeftArg::First)]
    left: LeftArg,
    #[arg(long, value_enum, default_value_t = SignsArg::Fold)]
    signs: SignsArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ThinningArg {
    Dedup,
    Poisson,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LeftArg {
    First,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SignsArg {
    Fold,
    Discard,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 10.0)]
    t_factor: f64,
    /// Number of sub-graphs, overriding `t_factor`.
    #[arg(long = "rounds")]
    t: Option<usize>,
    /// Edge density used for centering instead of the observed one.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    window_start: f64,
    #[arg(long, default_value_t = 1.0)]
    window_end: f64,
    /// Use the dense reference implementation.
    #[arg(long)]
    dense: bool,
}

impl ReductionArgs {
    fn options(&self, seed: u64) -> ReductionOptions {
        ReductionOptions {
            thinning: match self.thinning {
                ThinningArg::Dedup => Thinning::Dedup,
                ThinningArg::Poisson => Thinning::Poisson { epsilon: self.epsilon },
            },
            left: match self.left {
                LeftArg::First => LeftLiteral::First,
                LeftArg::Random => LeftLiteral::RandomPosition,
            },
            signs: match self.signs {
                SignsArg::Fold => SignHandling::Fold,
                SignsArg::Discard => SignHandling::Discard,
            },
            seed,
        }
    }
}

impl SolverArgs {
    fn config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            t_factor: self.t_factor,
            t_override: self.t,
            window: (self.window_start, self.window_end),
            seed,
            p_override: self.p,
            mode: if self.dense { SolveMode::DenseReference } else { SolveMode::ImplicitSparse },
        }
    }
}

/// Failure classes, one per nonzero exit code.
enum Failure {
    Usage(String),
    Solve(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Solve(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Solve(m) | Failure::Io(m) => m,
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let msg = e.to_string();
        match e {
            HarnessError::Io(_) | HarnessError::Path { .. } | HarnessError::Format(_) | HarnessError::Csv(_) => Failure::Io(msg),
            HarnessError::Input(_) | HarnessError::Instance(_) => Failure::Usage(msg),
            HarnessError::Fourier(_) | HarnessError::Reduction(_) | HarnessError::Solve(_) => Failure::Solve(msg),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, Failure> {
    text.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| usage(format!("cannot parse {what} entry {s:?}"))))
        .collect()
}

fn preset_parts(text: &str) -> (&str, Vec<&str>) {
    let mut parts = text.split(':');
    let name = parts.next().unwrap_or("");
    (name, parts.collect())
}

fn parse_k(arg: Option<&&str>, preset: &str) -> Result<usize, Failure> {
    arg.and_then(|s| s.parse().ok())
        .filter(|k| (1..=20).contains(k))
        .ok_or_else(|| usage(format!("preset {preset:?} needs an arity between 1 and 20")))
}

impl DistributionArgs {
    fn distribution(&self) -> Result<PlantingDistribution, Failure> {
        match (&self.weights, &self.preset) {
            (Some(w), _) => PlantingDistribution::new(parse_list(w, "weight")?).map_err(|e| usage(e.to_string())),
            (None, Some(preset)) => {
                let (name, args) = preset_parts(preset);
                let k = parse_k(args.first(), preset)?;
                match (name, args.len()) {
                    ("ksat", 1) => Ok(PlantingDistribution::k_sat(k)),
                    ("uniform", 1) => Ok(PlantingDistribution::uniform(k)),
                    ("xor", 2) => {
                        let eta = args[1].parse().map_err(|_| usage(format!("bad noise level in {preset:?}")))?;
                        PlantingDistribution::noisy_xor(k, eta).map_err(|e| usage(e.to_string()))
                    }
                    _ => Err(usage(format!("unknown distribution preset {preset:?}"))),
                }
            }
            (None, None) => Err(usage("give --weights or --preset")),
        }
    }
}

fn predicate_from(table: Option<&String>, preset: Option<&String>) -> Result<Vec<i8>, Failure> {
    match (table, preset) {
        (Some(t), _) => {
            let table = parse_list::<i8>(t, "predicate")?;
            predicate_spectrum(&table).map_err(|e| usage(e.to_string()))?;
            Ok(table)
        }
        (None, Some(preset)) => {
            let (name, args) = preset_parts(preset);
            let k = parse_k(args.first(), preset)?;
            match (name, args.len()) {
                ("parity", 1) => Ok(parity_predicate(k)),
                ("majority", 1) => Ok(majority_predicate(k)),
                ("const", 1) => Ok(vec![1; 1 << k]),
                _ => Err(usage(format!("unknown predicate preset {preset:?}"))),
            }
        }
        (None, None) => Err(usage("give --predicate or --predicate-preset")),
    }
}

struct Ctx {
    seed: u64,
    output: Option<PathBuf>,
    format: Option<Format>,
    quiet: bool,
}

impl Ctx {
    fn emit(&self, bytes: &[u8]) -> Result<(), Failure> {
        let written = match &self.output {
            Some(path) => std::fs::write(path, bytes),
            None => std::io::stdout().lock().write_all(bytes),
        };
        written.map_err(|e| Failure::Io(format!("cannot write output: {e}")))
    }

    fn emit_json<T: Serialize>(&self, value: &T) -> Result<(), Failure> {
        let mut text = serde_json::to_vec_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
        text.push(b'\n');
        self.emit(&text)
    }

    fn emit_instance(&self, file: &InstanceFile) -> Result<(), Failure> {
        if self.format == Some(Format::Csv) {
            return Err(usage("instance files are JSON lines; --format csv does not apply"));
        }
        let mut buf = Vec::new();
        write_instance(&mut buf, file).map_err(|e| Failure::Io(e.to_string()))?;
        self.emit(&buf)
    }

    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn read_file(path: &Path) -> Result<InstanceFile, Failure> {
    let file = File::open(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    read_instance(BufReader::new(file)).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>, Failure>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.into_inner().map_err(|e| Failure::Io(e.to_string()))
}

fn signs_csv(header: [&str; 2], signs: &[i8]) -> Result<Vec<u8>, Failure> {
    csv_bytes(&header, signs.iter().enumerate().map(|(i, s)| [i.to_string(), s.to_string()]))
}

fn fourier_csv(reports: &[FourierReport]) -> Result<Vec<u8>, Failure> {
    csv_bytes(
        &["r", "S", "coefficient", "delta"],
        reports.iter().map(|f| {
            let subset = f.subset.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
            [serde_json::to_string(&f.r).unwrap_or_default().trim_matches('"').to_string(), subset, f.coefficient.to_string(), f.delta.to_string()]
        }),
    )
}

fn reduced_file(reduced: ReducedInstance, seed: u64) -> SbmFile {
    SbmFile {
        delta: reduced.delta,
        p: reduced.p_equiv,
        seed,
        reduction: Some(reduced.sidecar()),
        truth: reduced.truth,
        graph: reduced.graph,
    }
}

#[derive(Serialize)]
struct AnalyzeOutput {
    #[serde(flatten)]
    report: FourierReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    witnesses: Option<Vec<FourierReport>>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let ctx = Ctx { seed: cli.seed.unwrap_or(0), output: cli.output, format: cli.format, quiet: cli.quiet };
    let seed = ctx.seed;
    match cli.command {
        Command::GenSbm { n1, n2, delta, p, no_truth } => {
            let params = BlockModelParams { n1, n2, delta, p, seed };
            if cli.print_config {
                return ctx.emit_json(&params);
            }
            let (graph, truth) = sample_bipartite_block(&params, None).map_err(|e| usage(e.to_string()))?;
            ctx.note(format!("sampled {} edges", graph.edges.len()));
            let truth = (!no_truth).then_some(truth);
            ctx.emit_instance(&InstanceFile::Sbm(SbmFile { delta, p, seed, reduction: None, truth, graph }))
        }
        Command::GenCsp { n, m, q, no_sigma } => {
            let q = q.distribution()?;
            if cli.print_config {
                return ctx.emit_json(&serde_json::json!({ "n": n, "m": m, "seed": seed, "weights": q.weights() }));
            }
            let mut instance = sample_planted_csp(&q, n, m, seed).map_err(|e| usage(e.to_string()))?;
            if no_sigma {
                instance.sigma = None;
            }
            ctx.note(format!("sampled {m} clauses over {n} variables"));
            ctx.emit_instance(&InstanceFile::Csp(CspFile { seed, distribution: q, instance }))
        }
        Command::GenGoldreich { n, m, predicate, no_sigma } => {
            let predicate = predicate_from(predicate.predicate.as_ref(), predicate.predicate_preset.as_ref())?;
            if cli.print_config {
                return ctx.emit_json(&serde_json::json!({ "n": n, "m": m, "seed": seed, "predicate": predicate }));
            }
            let mut instance = sample_goldreich(&predicate, n, m, seed).map_err(|e| usage(e.to_string()))?;
            if no_sigma {
                instance.sigma = None;
            }
            ctx.note(format!("sampled {m} constraints over {n} variables"));
            ctx.emit_instance(&InstanceFile::Goldreich(GoldreichFile { seed, instance }))
        }
        Command::AnalyzeQ { q, predicate, predicate_preset, all_witnesses } => {
            let (report, witnesses) = if predicate.is_some() || predicate_preset.is_some() {
                let table = predicate_from(predicate.as_ref(), predicate_preset.as_ref())?;
                if cli.print_config {
                    return ctx.emit_json(&serde_json::json!({ "predicate": table }));
                }
                (predicate_lowest_degree(&table).map_err(|e| usage(e.to_string()))?, None)
            } else {
                let q = q.distribution()?;
                if cli.print_config {
                    return ctx.emit_json(&serde_json::json!({ "weights": q.weights() }));
                }
                let report = distribution_complexity(&q);
                let witnesses = match (all_witnesses, report.r) {
                    (true, Complexity::Finite(r)) if r > 0 => Some(
                        witnesses_of_degree(&q, r)
                            .into_iter()
                            .map(|(subset, coefficient)| FourierReport {
                                r: report.r,
                                subset,
                                coefficient,
                                delta: 1.0 + (1u64 << q.k()) as f64 * coefficient,
                            })
                            .collect(),
                    ),
                    _ => None,
                };
                (report, witnesses)
            };
            ctx.note(format!("complexity {}", serde_json::to_string(&report.r).unwrap_or_default()));
            match ctx.format {
                Some(Format::Csv) => {
                    let rows = witnesses.unwrap_or_else(|| vec![report]);
                    ctx.emit(&fourier_csv(&rows)?)
                }
                _ => ctx.emit_json(&AnalyzeOutput { report, witnesses }),
            }
        }
        Command::Reduce { input, reduction } => {
            let options = reduction.options(seed);
            if cli.print_config {
                return ctx.emit_json(&options);
            }
            let reduced = match read_file(&input)? {
                InstanceFile::Csp(file) => {
                    let report = distribution_complexity(&file.distribution);
                    csp_to_bipartite(&file.instance, &report, &options).map_err(|e| Failure::Solve(e.to_string()))?
                }
                InstanceFile::Goldreich(file) => {
                    let report = predicate_lowest_degree(&file.instance.predicate).map_err(|e| Failure::Solve(e.to_string()))?;
                    goldreich_to_bipartite(&file.instance, &report, &options).map_err(|e| Failure::Solve(e.to_string()))?
                }
                InstanceFile::Sbm(_) => return Err(usage("reduce expects a csp or goldreich file")),
            };
            ctx.note(format!(
                "{} constraints kept, {} edges, delta {}, p_equiv {:.3e}",
                reduced.constraints_kept,
                reduced.graph.edges.len(),
                reduced.delta,
                reduced.p_equiv
            ));
            ctx.emit_instance(&InstanceFile::Sbm(reduced_file(reduced, seed)))
        }
        Command::Solve { input, solver } => {
            let config = solver.config(seed);
            if cli.print_config {
                return ctx.emit_json(&config);
            }
            let file = match read_file(&input)? {
                InstanceFile::Sbm(file) => file,
                _ => return Err(usage("solve expects a block model file; use solve-csp for constraint files")),
            };
            let truth: Option<&HiddenPartition> = file.truth.as_ref();
            let result = spi_solve(&file.graph, &config, truth).map_err(|e| Failure::Solve(e.to_string()))?;
            match result.overlap {
                Some(o) => ctx.note(format!("T = {}, overlap {o:.4}", result.t)),
                None => ctx.note(format!("T = {}", result.t)),
            }
            match ctx.format {
                Some(Format::Csv) => ctx.emit(&signs_csv(["vertex", "sign"], &result.signs)?),
                _ => ctx.emit_json(&result),
            }
        }
        Command::SolveCsp { input, reduction, solver } => {
            let options = PipelineOptions { reduction: reduction.options(seed), solver: solver.config(seed) };
            if cli.print_config {
                return ctx.emit_json(&options);
            }
            let report = match read_file(&input)? {
                InstanceFile::Csp(file) => solve_csp_end_to_end(&file.instance, &file.distribution, &options)?,
                InstanceFile::Goldreich(file) => solve_goldreich_end_to_end(&file.instance, &options)?,
                InstanceFile::Sbm(_) => return Err(usage("solve-csp expects a csp or goldreich file")),
            };
            match report.overlap {
                Some(o) => ctx.note(format!("{:?} route, overlap {o:.4}", report.route)),
                None => ctx.note(format!("{:?} route", report.route)),
            }
            match ctx.format {
                Some(Format::Csv) => ctx.emit(&signs_csv(["variable", "value"], &report.assignment)?)?,
                _ => ctx.emit_json(&report)?,
            }
            if report.status == PipelineStatus::Unidentifiable {
                return Err(Failure::Solve("planting distribution is unidentifiable".into()));
            }
            Ok(())
        }
        Command::Sweep { config, workers, no_wall_clock } => {
            let mut spec = load_sweep_spec(&config).map_err(|e| match e {
                HarnessError::Path { .. } => Failure::Io(e.to_string()),
                other => usage(other.to_string()),
            })?;
            if workers.is_some() {
                spec.workers = workers;
            }
            if no_wall_clock {
                spec.wall_clock = false;
            }
            if let Some(seed) = cli.seed {
                spec.seed = seed;
            }
            let ctx = Ctx { output: ctx.output.or(spec.output.take()), ..ctx };
            if cli.print_config {
                return ctx.emit_json(&spec);
            }
            let rows = run_sweep(&spec)?;
            ctx.note(format!("{} rows", rows.len()));
            match ctx.format {
                Some(Format::Json) => ctx.emit_json(&rows),
                _ => {
                    let mut buf = Vec::new();
                    write_sweep_csv(&mut buf, &rows)?;
                    ctx.emit(&buf)
                }
            }
        }
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            failure.code()
        }
    }
}
