use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use idla_core::blocks::{enumerate_blocks, BlockDocument, BlockKind};
use idla_core::bounds::{bounds_report, BoundsMode, BoundsReport};
use idla_core::harness::{
    bijection_experiment, dominance_experiment, estimate_on, least_action_experiment, non_concentration_experiment,
    ratio_experiment, star_clique_experiment, table_reproduce, write_estimate_csv, write_table_csv, EstimateOptions,
    EstimateRow, ExperimentReport, RatioOptions, TableOptions, TableRow,
};
use idla_core::idla::{run, RunConfig};
use idla_core::{generate, Graph, GraphSpec, Vertex};

#[derive(Parser)]
#[command(name = "idla", version, about = "Internal DLA dispersion on finite graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one process and print its result as JSON.
    Simulate(SimulateArgs),
    /// Monte Carlo estimate of the dispersion time.
    Estimate(EstimateArgs),
    /// Upper and lower dispersion bounds from exact walk quantities.
    Bounds(BoundsArgs),
    /// Run a verification experiment; exits 1 if a verdict fails.
    Verify(VerifyArgs),
    /// Normalized dispersion table across families and sizes.
    Table(TableArgs),
    /// List every valid block with `m` steps in total, one JSON per line.
    Enumerate(EnumerateArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Graph as `family:params`, e.g. `cycle:64`, `torus:2:16`, `custom:edges.txt`.
    #[arg(long)]
    graph: String,
    /// Origin vertex; defaults to the family's documented origin.
    #[arg(long)]
    origin: Option<Vertex>,
}

impl GraphArgs {
    fn load(&self) -> Result<(GraphSpec, Graph, Vertex)> {
        let spec: GraphSpec = self.graph.parse()?;
        let graph = generate(&spec).with_context(|| format!("building {}", self.graph))?;
        let origin = self.origin.unwrap_or_else(|| spec.default_origin());
        Ok((spec, graph, origin))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProcessArg {
    Seq,
    Par,
    Unif,
}

#[derive(Args)]
struct ProcessArgs {
    #[arg(long, value_enum, default_value = "seq")]
    process: ProcessArg,
    #[arg(long)]
    lazy: bool,
    /// Continuous time: Exp(1) clocks for seq, Poisson scheduling for unif.
    #[arg(long)]
    continuous: bool,
}

impl ProcessArgs {
    fn config(&self) -> RunConfig {
        let base = match self.process {
            ProcessArg::Seq => RunConfig::sequential(),
            ProcessArg::Par => RunConfig::parallel(),
            ProcessArg::Unif => RunConfig::uniform(),
        };
        let base = base.lazy(self.lazy);
        if self.continuous {
            base.continuous()
        } else {
            base
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    process: ProcessArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the run's block (and timing, if any) to this JSON file.
    #[arg(long)]
    emit_block: Option<PathBuf>,
    /// Also report the first round with fewer than 2^k - 1 active particles (parallel only).
    #[arg(long)]
    partial_k: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    process: ProcessArgs,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.9,0.99")]
    quantiles: Vec<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write the empirical distribution as `value cdf` lines.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Spectral,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Experiment {
    Dominance,
    Bijection,
    Ratios,
    StarClique,
    LeastAction,
    NonConcentration,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    experiment: Experiment,
    /// Required by dominance, bijection and ratios.
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    origin: Option<Vertex>,
    /// Size for the star-clique, least-action and non-concentration experiments.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 6)]
    m_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    lazy_tol: f64,
    #[arg(long, default_value_t = 0.1)]
    ctu_tol: f64,
    /// Expected par/seq mean ratio; adds a verdict when given.
    #[arg(long)]
    par_seq_target: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    par_seq_tol: f64,
    /// Accepted star/clique ratio band.
    #[arg(long, value_delimiter = ',', default_value = "1.8,2.2")]
    band: Vec<f64>,
    /// Required gap, in combined standard errors, for least-action.
    #[arg(long, default_value_t = 3.0)]
    sigmas: f64,
    /// Non-concentration: required share of runs below mean/5.
    #[arg(long, default_value_t = 0.25)]
    low_fraction: f64,
    /// Non-concentration: required share of runs above 4x the median.
    #[arg(long, default_value_t = 0.25)]
    high_fraction: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    families: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest graph for which exact t_hit, t_mix and lambda2 are computed.
    #[arg(long, default_value_t = 512)]
    exact_cap: usize,
    /// CSV destination; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for `{family}_{seq,par}.dat` files of `n normalized` lines.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Seq,
    Par,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum, default_value = "seq")]
    kind: KindArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every verdict passed.
fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Simulate(a) => simulate(a).map(|_| true),
        Command::Estimate(a) => estimate(a).map(|_| true),
        Command::Bounds(a) => bounds(a).map(|_| true),
        Command::Verify(a) => verify(a),
        Command::Table(a) => table(a).map(|_| true),
        Command::Enumerate(a) => enumerate(a).map(|_| true),
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let (_, graph, origin) = a.graph.load()?;
    let mut config = a.process.config();
    if let Some(k) = a.partial_k {
        config = config.with_partial_k(k);
    }
    let out = run(&graph, origin, &config, a.seed)?;
    if let Some(path) = &a.emit_block {
        BlockDocument::new(&out.block, out.timing.as_ref()).write(path)?;
    }
    emit(&serde_json::to_string_pretty(&out.result)?)?;
    Ok(())
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let (spec, graph, origin) = a.graph.load()?;
    let config = a.process.config();
    let opts = EstimateOptions { quantiles: a.quantiles.clone(), keep_values: a.plot_data.is_some() };
    let est = estimate_on(&graph, origin, &config, a.trials, a.seed, &opts)?;
    if let (Some(path), Some(values)) = (&a.plot_data, &est.values) {
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let mut w = create(path)?;
        for (k, v) in sorted.iter().enumerate() {
            writeln!(w, "{v} {}", (k + 1) as f64 / sorted.len() as f64)?;
        }
        w.flush()?;
    }
    match a.format {
        Format::Csv => write_estimate_csv(&[EstimateRow::new(&spec, graph.n(), origin, &config, &est)], io::stdout())?,
        Format::Json => {
            let mut est = est;
            est.values = None;
            emit(&serde_json::to_string_pretty(&est)?)?;
        }
    }
    Ok(())
}

fn bounds(a: BoundsArgs) -> Result<()> {
    let (_, graph, _) = a.graph.load()?;
    let mode = match a.mode {
        ModeArg::Exact => BoundsMode::ExactSubsets,
        ModeArg::Spectral => BoundsMode::SpectralEstimate,
    };
    let report = bounds_report(&graph, mode)?;
    match a.format {
        Format::Json => emit(&serde_json::to_string_pretty(&report)?)?,
        Format::Csv => write_bounds_csv(&report, io::stdout())?,
    }
    Ok(())
}

fn write_bounds_csv<W: Write>(report: &BoundsReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["quantity", "value"])?;
    let mut row = |name: &str, value: f64| w.write_record([name.to_string(), value.to_string()]);
    row("n", report.n as f64)?;
    row("basic_upper", report.basic_upper)?;
    row("refined_parallel_upper", report.refined_parallel_upper)?;
    row("refined_sequential_upper", report.refined_sequential_upper)?;
    row("lower_degree", report.lower_degree)?;
    if let Some(tree) = report.lower_tree {
        row("lower_tree", tree)?;
    }
    row("lower_mixing", report.lower_mixing)?;
    row("t_mix", report.t_mix)?;
    for (j, m) in report.set_hitting_terms.iter().enumerate() {
        row(&format!("set_hitting_m{}", j + 1), *m)?;
    }
    w.flush()?;
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<bool> {
    let graph_spec = || -> Result<GraphSpec> {
        match &a.graph {
            Some(g) => Ok(g.parse()?),
            None => bail!("this experiment needs --graph"),
        }
    };
    let size = || a.n.context("this experiment needs --n");
    let origin = |spec: &GraphSpec| a.origin.unwrap_or_else(|| spec.default_origin());
    let report: ExperimentReport = match a.experiment {
        Experiment::Dominance => {
            let spec = graph_spec()?;
            dominance_experiment(&spec, origin(&spec), a.trials.unwrap_or(10_000), a.seed)?
        }
        Experiment::Bijection => {
            let spec = graph_spec()?;
            bijection_experiment(&spec, origin(&spec), a.m_max)?
        }
        Experiment::Ratios => {
            let spec = graph_spec()?;
            let opts = RatioOptions {
                lazy_tol: a.lazy_tol,
                ctu_tol: a.ctu_tol,
                par_seq_target: a.par_seq_target,
                par_seq_tol: a.par_seq_tol,
            };
            ratio_experiment(&spec, origin(&spec), a.trials.unwrap_or(2000), a.seed, &opts)?
        }
        Experiment::StarClique => {
            let [lo, hi] = a.band[..] else { bail!("--band takes two values") };
            star_clique_experiment(size()?, a.trials.unwrap_or(500), a.seed, (lo, hi))?
        }
        Experiment::LeastAction => least_action_experiment(size()?, a.trials.unwrap_or(500), a.seed, a.sigmas)?,
        Experiment::NonConcentration => {
            non_concentration_experiment(size()?, a.trials.unwrap_or(500), a.seed, a.low_fraction, a.high_fraction)?
        }
    };
    if a.json {
        emit(&report.to_json()?)?;
    } else {
        emit(report.render().trim_end())?;
    }
    Ok(report.passed())
}

fn table(a: TableArgs) -> Result<()> {
    let opts = TableOptions { trials: a.trials, seed: a.seed, exact_cap: a.exact_cap };
    let rows = table_reproduce(&a.families, &a.sizes, &opts)?;
    match &a.out {
        Some(path) => write_table_csv(&rows, create(path)?)?,
        None => write_table_csv(&rows, io::stdout())?,
    }
    if let Some(dir) = &a.plot_data {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for family in &a.families {
            let of_family: Vec<&TableRow> = rows.iter().filter(|r| &r.family == family).collect();
            for (label, pick) in [("seq", true), ("par", false)] {
                let mut w = create(&dir.join(format!("{family}_{label}.dat")))?;
                for r in &of_family {
                    writeln!(w, "{} {}", r.n, if pick { r.seq_normalized } else { r.par_normalized })?;
                }
                w.flush()?;
            }
        }
    }
    Ok(())
}

fn enumerate(a: EnumerateArgs) -> Result<()> {
    let (_, graph, origin) = a.graph.load()?;
    let kind = match a.kind {
        KindArg::Seq => BlockKind::Sequential,
        KindArg::Par => BlockKind::Parallel,
    };
    let blocks = enumerate_blocks(&graph, origin, a.m, kind)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for block in &blocks {
        writeln!(out, "{}", serde_json::to_string(block)?)?;
    }
    eprintln!("{} blocks", blocks.len());
    Ok(())
}

fn emit(text: &str) -> Result<()> {
    writeln!(io::stdout().lock(), "{text}")?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}
