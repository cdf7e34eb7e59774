//! Command-line front end for generating, embedding and verifying trees.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use tree_l1::bench::{run_instance, BenchMode};
use tree_l1::coloring::monotone_coloring;
use tree_l1::embedder::{embed, EmbedError, EmbedOptions};
use tree_l1::gen;
use tree_l1::kary::embed_kary;
use tree_l1::output::{coord_rows, OutputDocument, BENCH_HEADER};
use tree_l1::scales::ScaleTable;
use tree_l1::tree::{parse_tree, RootedTree};
use tree_l1::verify::{distortion, isometric_baseline};

#[derive(Parser)]
#[command(name = "tree-l1", version, about = "Embed tree metrics into l1 and verify distortion")]
struct Cli {
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated tree in the text format.
    Gen(GenArgs),
    /// Embed a tree and report its distortion.
    Embed(EmbedArgs),
    /// Run the k-ary warm-up embedding.
    Kary(KaryArgs),
    /// Recompute the distortion of a coordinate document against a tree.
    Verify(VerifyArgs),
    /// Write the exact one-coordinate-per-edge embedding.
    Baseline(BaselineArgs),
    /// Sweep a tree family and emit one CSV row per run.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Path,
    Kary,
    Random,
    CaterpillarStar,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct GenArgs {
    family: Family,
    /// `path N`, `kary K H`, `random N MAX_DEGREE`, `caterpillar-star H`.
    params: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedArgs {
    tree: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    retries: usize,
    #[arg(long)]
    target: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write dense coordinate arrays instead of index/value pairs.
    #[arg(long)]
    dense: bool,
    /// Refuse trees with more vertices than this.
    #[arg(long, default_value_t = 2000)]
    max_n: usize,
    #[arg(long)]
    dump_coloring: Option<PathBuf>,
    #[arg(long)]
    dump_scales: Option<PathBuf>,
}

#[derive(Args)]
struct KaryArgs {
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 4)]
    h: usize,
    #[arg(long, default_value_t = 1.0 / 28.0)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to 200 times the vertex count.
    #[arg(long)]
    max_rounds: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dense: bool,
}

#[derive(Args)]
struct VerifyArgs {
    coords: PathBuf,
    tree: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    max_n: usize,
}

#[derive(Args)]
struct BaselineArgs {
    tree: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dense: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Pipeline,
    Baseline,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Heights for `kary` and `caterpillar-star`, vertex counts otherwise.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    #[arg(long, value_enum, default_value_t = Mode::Pipeline)]
    mode: Mode,
    #[arg(long, default_value_t = 2)]
    arity: usize,
    #[arg(long, default_value_t = 4)]
    max_degree: usize,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1)]
    retries: usize,
    #[arg(long)]
    target: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn read_tree(path: &Path, max_n: Option<usize>) -> Result<RootedTree> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let tree = parse_tree(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(cap) = max_n {
        if tree.len() > cap {
            bail!("tree has {} vertices, above the limit of {cap}", tree.len());
        }
    }
    Ok(tree)
}

fn generate(family: Family, params: &[usize], seed: u64) -> Result<RootedTree> {
    let want = |k: usize| -> Result<()> {
        if params.len() != k {
            bail!("expected {k} parameters, got {}", params.len());
        }
        Ok(())
    };
    Ok(match family {
        Family::Path => {
            want(1)?;
            gen::path(params[0])?
        }
        Family::Kary => {
            want(2)?;
            gen::kary(params[0], params[1])?
        }
        Family::Random => {
            want(2)?;
            gen::random(params[0], params[1], seed)?
        }
        Family::CaterpillarStar => {
            want(1)?;
            gen::caterpillar_star(params[0])?
        }
    })
}

fn cmd_gen(a: GenArgs) -> Result<ExitCode> {
    let tree = generate(a.family, &a.params, a.seed)?;
    write_output(a.out.as_deref(), &tree.to_text())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_embed(a: EmbedArgs) -> Result<ExitCode> {
    let tree = read_tree(&a.tree, Some(a.max_n))?;
    if a.dump_coloring.is_some() || a.dump_scales.is_some() {
        let (ct, _) = tree.contract_zero_edges();
        let chi = monotone_coloring(&ct);
        if let Some(p) = &a.dump_coloring {
            fs::write(p, chi.dump(&ct))?;
        }
        if let Some(p) = &a.dump_scales {
            let text = match ScaleTable::build(&ct, &chi) {
                Ok(table) => table.dump(),
                Err(_) => String::new(),
            };
            fs::write(p, text)?;
        }
    }
    let opts = EmbedOptions {
        k: a.k,
        delta: a.delta,
        target: a.target,
        retries: a.retries,
    };
    let (result, met) = match embed(&tree, a.eps, a.seed, &opts) {
        Ok(r) => (r, true),
        Err(EmbedError::RetryBudgetExhausted(r)) => (*r, false),
        Err(e) => return Err(e.into()),
    };
    let text = match a.format {
        Format::Json => OutputDocument::from_embedding(&result, a.dense).to_json(),
        Format::Csv => {
            let row = tree_l1::output::BenchRow {
                family: a.tree.display().to_string().replace(',', "_"),
                n: tree.len(),
                eps: result.eps,
                dim: result.dim,
                expansion: result.report.expansion,
                contraction: result.report.contraction,
                distortion: result.report.distortion,
                attempts: result.attempts,
                millis: 0,
                status: if met { "ok" } else { "target-missed" }.into(),
            };
            format!("{BENCH_HEADER}\n{}\n", row.to_csv())
        }
    };
    write_output(a.out.as_deref(), &text)?;
    if met {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "target distortion {} not met: best {} after {} attempts",
            result.target, result.report.distortion, result.attempts
        );
        Ok(ExitCode::from(2))
    }
}

fn cmd_kary(a: KaryArgs) -> Result<ExitCode> {
    let n = gen::kary(a.k, a.h)?.len();
    let budget = a.max_rounds.unwrap_or(200 * n as u64);
    let e = match embed_kary(a.k, a.h, a.eps, a.seed, budget) {
        Ok(e) => e,
        Err(err @ tree_l1::kary::KaryError::RoundBudgetExceeded { .. }) => {
            eprintln!("{err}");
            return Ok(ExitCode::from(2));
        }
        Err(err) => return Err(err.into()),
    };
    let coords = e.coords.to_sparse();
    let report = distortion(&coords, &e.tree)?;
    let dim = e.labels.dimension();
    let mut doc = OutputDocument::from_report(&report, coord_rows(&coords, dim, a.dense), dim);
    doc.eps = Some(a.eps);
    doc.k = Some(a.k);
    doc.h = Some(a.h);
    doc.t = vec![e.labels.t];
    doc.m = vec![e.labels.m];
    doc.seed = Some(a.seed);
    doc.attempts = e.rounds;
    write_output(a.out.as_deref(), &doc.to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: VerifyArgs) -> Result<ExitCode> {
    let tree = read_tree(&a.tree, Some(a.max_n))?;
    let text = fs::read_to_string(&a.coords).with_context(|| format!("reading {}", a.coords.display()))?;
    let input: OutputDocument = serde_json::from_str(&text).context("parsing coordinate document")?;
    let coords = input.sparse_coords();
    let report = distortion(&coords, &tree)?;
    let mut doc = OutputDocument::from_report(&report, Vec::new(), input.dim);
    doc.eps = input.eps;
    doc.delta = input.delta;
    doc.k = input.k;
    doc.t = input.t;
    doc.m = input.m;
    doc.seed = input.seed;
    doc.attempts = input.attempts;
    write_output(a.out.as_deref(), &doc.to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_baseline(a: BaselineArgs) -> Result<ExitCode> {
    let tree = read_tree(&a.tree, None)?;
    let coords = isometric_baseline(&tree);
    let report = distortion(&coords, &tree)?;
    let dim = tree.num_edges();
    let doc = OutputDocument::from_report(&report, coord_rows(&coords, dim, a.dense), dim);
    write_output(a.out.as_deref(), &doc.to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(a: BenchArgs) -> Result<ExitCode> {
    let name = match a.family {
        Family::Path => "path",
        Family::Kary => "kary",
        Family::Random => "random",
        Family::CaterpillarStar => "caterpillar-star",
    };
    let mut jobs = Vec::new();
    for &size in &a.sizes {
        for &eps in &a.eps {
            for &seed in &a.seeds {
                jobs.push((size, eps, seed));
            }
        }
    }
    let mode = match a.mode {
        Mode::Pipeline => BenchMode::Pipeline,
        Mode::Baseline => BenchMode::Baseline,
    };
    let opts = EmbedOptions {
        k: a.k,
        delta: a.delta,
        target: a.target,
        retries: a.retries,
    };
    let rows: Vec<String> = jobs
        .par_iter()
        .map(|&(size, eps, seed)| {
            let params = match a.family {
                Family::Kary => vec![a.arity, size],
                Family::Random => vec![size, a.max_degree],
                _ => vec![size],
            };
            match generate(a.family, &params, seed) {
                Ok(tree) => run_instance(name, &tree, eps, seed, mode, &opts).to_csv(),
                Err(e) => format!("{name},0,{eps},0,NaN,NaN,NaN,0,0,error: {e}").replace("\n", " "),
            }
        })
        .collect();
    let mut text = String::from(BENCH_HEADER);
    text.push('\n');
    for r in rows {
        text.push_str(&r);
        text.push('\n');
    }
    write_output(a.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Embed(a) => cmd_embed(a),
        Command::Kary(a) => cmd_kary(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Baseline(a) => cmd_baseline(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
