//! Command-line front-end: parsers, solvers, oracles and generators behind
//! one binary with line-oriented `key=value` reports.
//!
//! Exit codes: 0 on success, 1 on parse, domain or usage errors, 2 when a
//! capability cap is exceeded.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use shrub::domset_solver::{min_dominating_set, DEFAULT_TRIALS, RNG_NAME};
use shrub::engine::{ChainMode, EvalOptions};
use shrub::graph::{parse_graph, LabeledGraph};
use shrub::hom_solver::{hom_table, oct_minimum, parse_pattern, q_coloring_count, HomInstance, HomOptions};
use shrub::is_solver::{is_coefficient, is_polynomial_with};
use shrub::lcsgen::{build_reduction, pad_to_power_of_two, parse_lcs};
use shrub::maxcut_solver::{MaxCutOptions, MaxCutSolver};
use shrub::oracle;
use shrub::tree_model::{parse_tree_model, random_model, RandomModelSpec, TreeModel};
use shrub::Error;

#[derive(Parser, Debug)]
#[command(name = "shrub", version, about = "Counting and optimization on graphs given with bounded-depth tree-models")]
struct Cli {
    /// Add wall-clock time to reports; omitted by default so that reports
    /// are byte-identical across runs.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a tree-model and list every structural problem.
    Validate { model: PathBuf },
    /// Write the graph a tree-model defines.
    Realize {
        model: PathBuf,
        #[arg(short = 'o')]
        output: Option<PathBuf>,
    },
    /// Run a solver on a tree-model.
    Solve {
        #[command(subcommand)]
        problem: SolveCommand,
    },
    /// Brute-force answer on a graph file, or on the graph a model realizes.
    Oracle {
        problem: OracleProblem,
        input: PathBuf,
        /// Pattern file for `hom`.
        #[arg(long)]
        pattern: Option<PathBuf>,
        /// Target length for `lcs`; defaults to the file's `t`.
        #[arg(long)]
        t: Option<usize>,
    },
    /// Generate instances.
    Gen {
        #[command(subcommand)]
        kind: GenCommand,
    },
    /// Sweep random models and print one CSV row per run.
    Bench(BenchArgs),
}

#[derive(Subcommand, Debug)]
enum SolveCommand {
    /// Independent set polynomial.
    Is {
        model: PathBuf,
        #[arg(long)]
        memoize: bool,
        /// Compute only the coefficient of `x^p`.
        #[arg(long, value_name = "P")]
        coeff: Option<usize>,
        /// Expand every chain term instead of collapsing it.
        #[arg(long)]
        inclusion_exclusion: bool,
    },
    /// Maximum cut.
    Maxcut {
        model: PathBuf,
        /// Keep computed node values (on unless set to false).
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        memoize: bool,
    },
    /// Minimum dominating set (randomized; never below the optimum).
    Domset {
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Weighted list homomorphism counts by cardinality and weight.
    Hom {
        model: PathBuf,
        #[arg(long)]
        pattern: PathBuf,
        /// Graph file with the same vertices supplying lists and weights.
        #[arg(long)]
        overlay: Option<PathBuf>,
        #[arg(long)]
        memoize: bool,
        /// Evaluate whole prime fields with per-node tables.
        #[arg(long)]
        fast: bool,
    },
    /// Proper q-colourings.
    Qcol {
        model: PathBuf,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        fast: bool,
    },
    /// Minimum odd cycle transversal.
    Oct {
        model: PathBuf,
        #[arg(long)]
        fast: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum OracleProblem {
    Is,
    Maxcut,
    Domset,
    Oct,
    Hom,
    Lcs,
    Alpha,
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Build the independent set reduction of an LCS instance.
    Lcs {
        input: PathBuf,
        #[arg(short = 'o')]
        output: PathBuf,
        /// Also write the graph here.
        #[arg(long, value_name = "PATH")]
        emit_graph: Option<PathBuf>,
        /// Report the goal.
        #[arg(long)]
        emit_goal: bool,
    },
    /// A random tree-model.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o')]
        output: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BenchProblem {
    Is,
    Maxcut,
    Domset,
    Oct,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_enum, default_value_t = BenchProblem::Is)]
    problem: BenchProblem,
    /// Comma-separated depths; empty for an empty sweep.
    #[arg(long, default_value = "", value_delimiter = ',')]
    d: Vec<String>,
    #[arg(long, default_value = "", value_delimiter = ',')]
    k: Vec<String>,
    #[arg(long, default_value = "", value_delimiter = ',')]
    n: Vec<String>,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    memoize: bool,
    #[arg(short = 'o')]
    output: Option<PathBuf>,
}

/// Failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if e.is_capability() { 2 } else { 1 }, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, msg: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Ordered `key=value` lines.
#[derive(Debug, Default)]
struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    fn new(command: &str) -> Self {
        let mut r = Report::default();
        r.put("command", command);
        r
    }

    fn put(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    fn input(&mut self, path: &Path, text: &str) {
        self.put("input", path.display());
        self.put("input_sha256", hex(&Sha256::digest(text.as_bytes())));
    }

    fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure { code: 1, msg: format!("{}: {e}", path.display()) })
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| Failure { code: 1, msg: format!("{}: {e}", path.display()) })
}

fn load_model(path: &Path, report: &mut Report) -> CliResult<TreeModel> {
    let text = read(path)?;
    report.input(path, &text);
    let m = parse_tree_model(&text)?;
    m.ensure_valid()?;
    report.put("n", m.n());
    report.put("k", m.k());
    report.put("d", m.depth());
    Ok(m)
}

/// A graph file, or the graph a model file realizes.
fn load_graph(path: &Path, report: &mut Report) -> CliResult<LabeledGraph> {
    let text = read(path)?;
    report.input(path, &text);
    let g = if text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#')) == Some("shrubmodel 1") {
        let m = parse_tree_model(&text)?;
        m.ensure_valid()?;
        m.realize()
    } else {
        parse_graph(&text)?
    };
    report.put("n", g.n());
    report.put("m", g.edge_count());
    Ok(g)
}

/// Worker count from `SHRUB_THREADS`, default 1.
fn threads() -> usize {
    std::env::var("SHRUB_THREADS").ok().and_then(|v| v.parse().ok()).filter(|&t| t >= 1).unwrap_or(1)
}

fn run(cli: Cli) -> CliResult<Report> {
    let start = Instant::now();
    let mut report = match cli.command {
        Command::Validate { model } => validate(&model)?,
        Command::Realize { model, output } => realize(&model, output.as_deref())?,
        Command::Solve { problem } => solve(problem)?,
        Command::Oracle { problem, input, pattern, t } => run_oracle(problem, &input, pattern.as_deref(), t)?,
        Command::Gen { kind } => generate(kind)?,
        Command::Bench(args) => bench(&args)?,
    };
    if cli.timing {
        report.put("wall_ms", format!("{:.3}", start.elapsed().as_secs_f64() * 1e3));
    }
    Ok(report)
}

fn validate(path: &Path) -> CliResult<Report> {
    let mut report = Report::new("validate");
    let text = read(path)?;
    report.input(path, &text);
    let diags = match parse_tree_model(&text) {
        Ok(m) => m.validate(),
        Err(e) => vec![e.to_string()],
    };
    report.put("valid", diags.is_empty());
    for d in &diags {
        report.put("diagnostic", d);
    }
    if diags.is_empty() {
        Ok(report)
    } else {
        Err(Failure { code: 1, msg: report.render().trim_end().to_string() })
    }
}

fn realize(path: &Path, output: Option<&Path>) -> CliResult<Report> {
    let mut report = Report::new("realize");
    let m = load_model(path, &mut report)?;
    let g = m.realize();
    report.put("edges", g.edge_count());
    match output {
        Some(out) => {
            write(out, &g.to_text())?;
            report.put("output", out.display());
        }
        None => {
            for (u, v) in g.edges() {
                report.put("edge", format!("{u} {v}"));
            }
        }
    }
    Ok(report)
}

fn hom_opts(memoize: bool, fast: bool) -> HomOptions {
    HomOptions { eval: EvalOptions { memoize, ..EvalOptions::default() }, batched: fast, ..HomOptions::default() }
}

fn solve(problem: SolveCommand) -> CliResult<Report> {
    match problem {
        SolveCommand::Is { model, memoize, coeff, inclusion_exclusion } => {
            let mut report = Report::new("solve is");
            let m = load_model(&model, &mut report)?;
            let chain = if inclusion_exclusion { ChainMode::InclusionExclusion } else { ChainMode::Collapsed };
            let opts = EvalOptions { chain, memoize };
            report.put("memoize", memoize);
            report.put("chain", format!("{chain:?}").to_lowercase());
            if let Some(p) = coeff {
                report.put("coefficient_index", p);
                report.put("coefficient", is_coefficient(&m, p, opts)?);
                return Ok(report);
            }
            let run = is_polynomial_with(&m, opts)?;
            let alpha = run.coeffs.iter().rposition(|c| *c != 0u32.into()).unwrap_or(0);
            report.put("coefficients", join(&run.coeffs[..=alpha]));
            report.put("answer", alpha);
            report.put("primes", run.primes.len());
            report.put("evaluations", run.stats.evaluations);
            report.put("is_calls", run.stats.is_calls);
            report.put("tis_calls", run.stats.tis_calls);
            report.put("max_frames", run.stats.max_frames);
            report.put("max_frame_residues", run.stats.max_frame_residues);
            report.put("memo_entries", run.stats.memo_entries);
            Ok(report)
        }
        SolveCommand::Maxcut { model, memoize } => {
            let mut report = Report::new("solve maxcut");
            let m = load_model(&model, &mut report)?;
            let solver = MaxCutSolver::new(&m, MaxCutOptions { memoize, ..MaxCutOptions::default() })?;
            let answer = solver.max_cut()?;
            let stats = solver.stats();
            report.put("memoize", memoize);
            report.put("answer", answer);
            report.put("primes", stats.primes_in_schedule);
            report.put("node_calls", stats.node_calls);
            report.put("kane_evals", stats.kane_evals);
            report.put("memo_entries", stats.memo_entries);
            Ok(report)
        }
        SolveCommand::Domset { model, trials, seed } => {
            let mut report = Report::new("solve domset");
            let m = load_model(&model, &mut report)?;
            let run = min_dominating_set(&m, trials, seed)?;
            report.put("rng", RNG_NAME);
            report.put("seed", seed);
            report.put("trials", trials);
            report.put("trial_seeds", join(&run.seeds));
            report.put("trial_answers", join(&run.trials));
            report.put("answer", run.answer);
            Ok(report)
        }
        SolveCommand::Hom { model, pattern, overlay, memoize, fast } => {
            let mut report = Report::new("solve hom");
            let m = load_model(&model, &mut report)?;
            let ptext = read(&pattern)?;
            report.put("pattern", pattern.display());
            report.put("pattern_sha256", hex(&Sha256::digest(ptext.as_bytes())));
            let h = parse_pattern(&ptext)?;
            let inst = match overlay {
                Some(path) => {
                    let text = read(&path)?;
                    report.put("overlay", path.display());
                    report.put("overlay_sha256", hex(&Sha256::digest(text.as_bytes())));
                    HomInstance::with_overlay(m, h, &parse_graph(&text)?)?
                }
                None => HomInstance::new(m, h),
            };
            let table = hom_table(&inst, hom_opts(memoize, fast))?;
            report.put("total", table.total());
            for ((c, w), count) in &table.counts {
                report.put("count", format!("{c} {w} {count}"));
            }
            report.put("primes", table.primes.len());
            report.put("is_calls", table.stats.is_calls);
            report.put("tis_calls", table.stats.tis_calls);
            report.put("max_frames", table.stats.max_frames);
            Ok(report)
        }
        SolveCommand::Qcol { model, q, fast } => {
            let mut report = Report::new("solve qcol");
            let m = load_model(&model, &mut report)?;
            report.put("q", q);
            report.put("answer", q_coloring_count(&m, q, hom_opts(false, fast))?);
            Ok(report)
        }
        SolveCommand::Oct { model, fast } => {
            let mut report = Report::new("solve oct");
            let m = load_model(&model, &mut report)?;
            report.put("answer", oct_minimum(&m, hom_opts(false, fast))?);
            Ok(report)
        }
    }
}

fn run_oracle(problem: OracleProblem, input: &Path, pattern: Option<&Path>, t: Option<usize>) -> CliResult<Report> {
    let name = format!("{problem:?}").to_lowercase();
    let mut report = Report::new(&format!("oracle {name}"));
    if problem == OracleProblem::Lcs {
        let text = read(input)?;
        report.input(input, &text);
        let inst = parse_lcs(&text)?;
        let t = t.unwrap_or(inst.t);
        report.put("t", t);
        report.put("answer", oracle::brute_lcs(&inst.strings, t)?);
        return Ok(report);
    }
    let g = load_graph(input, &mut report)?;
    match problem {
        OracleProblem::Is => report.put("coefficients", join(oracle::brute_is_polynomial(&g)?)),
        OracleProblem::Maxcut => report.put("answer", oracle::brute_max_cut(&g)?),
        OracleProblem::Domset => report.put("answer", oracle::brute_min_domset(&g)?),
        OracleProblem::Oct => report.put("answer", oracle::brute_oct(&g)?),
        OracleProblem::Alpha => report.put("answer", oracle::independence_number(&g)),
        OracleProblem::Hom => {
            let path = pattern.ok_or_else(|| Failure { code: 1, msg: "oracle hom needs --pattern".to_string() })?;
            let h = parse_pattern(&read(path)?)?;
            let table = oracle::brute_hom_table(&g, &h)?;
            report.put("total", table.values().sum::<num_bigint::BigUint>());
            for ((c, w), count) in &table {
                report.put("count", format!("{c} {w} {count}"));
            }
        }
        OracleProblem::Lcs => unreachable!("handled above"),
    }
    Ok(report)
}

fn generate(kind: GenCommand) -> CliResult<Report> {
    match kind {
        GenCommand::Lcs { input, output, emit_graph, emit_goal } => {
            let mut report = Report::new("gen lcs");
            let text = read(&input)?;
            report.input(&input, &text);
            let inst = pad_to_power_of_two(&parse_lcs(&text)?);
            let out = build_reduction(&inst)?;
            write(&output, &out.model.clone().canonical_names().to_text())?;
            report.put("N", inst.n);
            report.put("t", inst.t);
            report.put("r", inst.r());
            report.put("n", out.graph.n());
            report.put("edges", out.graph.edge_count());
            report.put("k", out.model.k());
            report.put("d", out.model.depth());
            report.put("output", output.display());
            if let Some(path) = emit_graph {
                write(&path, &out.graph.to_text())?;
                report.put("graph", path.display());
            }
            if emit_goal {
                report.put("goal", out.goal);
            }
            Ok(report)
        }
        GenCommand::Random { n, k, d, density, seed, output } => {
            let mut report = Report::new("gen random");
            check_spec(n, k, d, density)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_model(&mut rng, RandomModelSpec { n, k, d, density }).canonical_names();
            report.put("seed", seed);
            report.put("n", m.n());
            report.put("k", m.k());
            report.put("d", m.depth());
            let text = m.to_text();
            match output {
                Some(path) => {
                    write(&path, &text)?;
                    report.put("output", path.display());
                }
                None => report.put("model_sha256", hex(&Sha256::digest(text.as_bytes()))),
            }
            Ok(report)
        }
    }
}

fn check_spec(n: usize, k: usize, d: usize, density: f64) -> CliResult<()> {
    if n == 0 || k == 0 || d == 0 || !(0.0..=1.0).contains(&density) {
        return Err(Failure { code: 1, msg: "random models need n, k, d ≥ 1 and density in [0, 1]".to_string() });
    }
    Ok(())
}

const BENCH_HEADER: &str = "problem,n,k,d,seed,status,answer,time_us,primes,calls,max_frames";

#[derive(Debug, Clone, Copy)]
struct BenchCell {
    n: usize,
    k: usize,
    d: usize,
    seed: u64,
}

fn parse_list(items: &[String], what: &str) -> CliResult<Vec<usize>> {
    items.iter().filter(|s| !s.is_empty()).map(|s| s.trim().parse().map_err(|_| Failure { code: 1, msg: format!("bad {what} value {s:?}") })).collect()
}

/// One CSV row; the flag is true when a capability cap was hit.
fn bench_row(problem: BenchProblem, cell: BenchCell, density: f64, memoize: bool) -> (String, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(cell.seed);
    let m = random_model(&mut rng, RandomModelSpec { n: cell.n, k: cell.k, d: cell.d, density });
    let start = Instant::now();
    let result: shrub::Result<(String, usize, u64, usize)> = match problem {
        BenchProblem::Is => is_polynomial_with(&m, EvalOptions { memoize, ..EvalOptions::default() }).map(|run| {
            let alpha = run.coeffs.iter().rposition(|c| *c != 0u32.into()).unwrap_or(0);
            (alpha.to_string(), run.primes.len(), run.stats.is_calls + run.stats.tis_calls, run.stats.max_frames)
        }),
        BenchProblem::Maxcut => MaxCutSolver::new(&m, MaxCutOptions { memoize, ..MaxCutOptions::default() }).and_then(|s| {
            let answer = s.max_cut()?;
            let st = s.stats();
            Ok((answer.to_string(), st.primes_in_schedule, st.node_calls, 0))
        }),
        BenchProblem::Domset => min_dominating_set(&m, DEFAULT_TRIALS, cell.seed).map(|r| (r.answer.to_string(), 0, r.trials.len() as u64, 0)),
        BenchProblem::Oct => oct_minimum(&m, hom_opts(memoize, true)).map(|a| (a.to_string(), 0, 0, 0)),
    };
    let us = start.elapsed().as_micros();
    let name = format!("{problem:?}").to_lowercase();
    let BenchCell { n, k, d, seed } = cell;
    match result {
        Ok((answer, primes, calls, frames)) => (format!("{name},{n},{k},{d},{seed},ok,{answer},{us},{primes},{calls},{frames}"), false),
        Err(e) => {
            let status = if e.is_capability() { "capability" } else { "error" };
            (format!("{name},{n},{k},{d},{seed},{status},,{us},,,"), e.is_capability())
        }
    }
}

fn bench(args: &BenchArgs) -> CliResult<Report> {
    let (ds, ks, ns) = (parse_list(&args.d, "d")?, parse_list(&args.k, "k")?, parse_list(&args.n, "n")?);
    let mut cells = Vec::new();
    for &d in &ds {
        for &k in &ks {
            for &n in &ns {
                check_spec(n, k, d, args.density)?;
                let seed = args.seed.wrapping_add(cells.len() as u64);
                cells.push(BenchCell { n, k, d, seed });
            }
        }
    }
    let workers = threads().min(cells.len().max(1));
    let mut rows: Vec<Option<(String, bool)>> = vec![None; cells.len()];
    std::thread::scope(|scope| {
        let chunks: Vec<_> = rows.chunks_mut(cells.len().div_ceil(workers).max(1)).zip(cells.chunks(cells.len().div_ceil(workers).max(1))).collect();
        for (out, work) in chunks {
            scope.spawn(move || {
                for (slot, &cell) in out.iter_mut().zip(work) {
                    *slot = Some(bench_row(args.problem, cell, args.density, args.memoize));
                }
            });
        }
    });
    let mut csv = format!("{BENCH_HEADER}\n");
    let mut capped = false;
    for (row, cap) in rows.into_iter().flatten() {
        csv.push_str(&row);
        csv.push('\n');
        capped |= cap;
    }
    let mut report = Report::new("bench");
    report.put("rows", cells.len());
    report.put("threads", workers);
    match &args.output {
        Some(path) => {
            write(path, &csv)?;
            report.put("output", path.display());
        }
        None => print!("{csv}"),
    }
    if capped {
        report.put("capability_rows", true);
        return Err(Failure { code: 2, msg: report.render().trim_end().to_string() });
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(report) => {
            print!("{}", report.render());
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
