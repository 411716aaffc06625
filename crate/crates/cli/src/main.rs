use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use impactlab::callgraph::{self, BuildOptions, CallGraph, FieldOrientation, GraphVariant};
use impactlab::corpus;
use impactlab::evalpipe::{self, EvalConfig, ReportFormat, UnboundedPolicy};
use impactlab::frontend::compile_dir;
use impactlab::interpreter::{run_suite, DEFAULT_STEP_BUDGET};
use impactlab::mutgen::{self, Manifest, ManifestEntry, MutationOperator};

/// Measure call-graph impact prediction against mutation testing.
#[derive(Parser, Debug)]
#[command(name = "impactlab", version, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build one call-graph variant and export it.
    Graph(GraphArgs),
    /// Enumerate, sample and classify the mutants of one operator.
    Mutate(MutateArgs),
    /// Run the full pipeline and write ledger, reports and timings.
    Evaluate(EvaluateArgs),
    /// Render the propagation picture of one mutant from a ledger.
    Viz(VizArgs),
    /// Check every corpus project against its recorded statistics.
    VerifyCorpus(VerifyArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum GraphFormat {
    Json,
    Dot,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Orientation {
    /// reader -> field -> writer
    Formal,
    /// writer -> field -> reader
    Figure,
}

impl From<Orientation> for FieldOrientation {
    fn from(o: Orientation) -> Self {
        match o {
            Orientation::Formal => FieldOrientation::Formal,
            Orientation::Figure => FieldOrientation::Figure,
        }
    }
}

fn parse_variant(s: &str) -> Result<GraphVariant, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_operator(s: &str) -> Result<MutationOperator, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Project directory holding *.moo files.
    dir: PathBuf,
    /// Graph variant: s, b, h or f.
    #[arg(long, default_value = "b", value_parser = parse_variant)]
    variant: GraphVariant,
    #[arg(long, value_enum, default_value_t = GraphFormat::Json)]
    format: GraphFormat,
    /// Orientation of field edges in variant f.
    #[arg(long, value_enum, default_value_t = Orientation::Formal)]
    field_orientation: Orientation,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Maximum number of mutants per (project, operator).
    #[arg(long, default_value_t = 3000, value_parser = clap::value_parser!(u64).range(1..))]
    cap: u64,
    /// Seed for mutant sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluation steps allowed per test before it counts as timed out.
    #[arg(long, default_value_t = DEFAULT_STEP_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    step_budget: u64,
    /// Worker threads [default: available parallelism].
    #[arg(long, env = "IMPACTLAB_WORKERS", value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
}

impl RunArgs {
    fn config(&self) -> EvalConfig {
        EvalConfig {
            cap: self.cap as usize,
            seed: self.seed,
            step_budget: self.step_budget,
            workers: self
                .workers
                .map_or_else(evalpipe::default_workers, |w| w as usize),
            ..EvalConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct MutateArgs {
    /// Project directory holding *.moo files.
    dir: PathBuf,
    /// Mutation operator: ABS, AOR, LCR, ROR or UOI.
    #[arg(long, value_parser = parse_operator)]
    op: MutationOperator,
    #[command(flatten)]
    run: RunArgs,
    /// Manifest output file (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Project directory holding *.moo files.
    dir: PathBuf,
    /// Graph variants, comma separated.
    #[arg(long, default_value = "b", value_delimiter = ',', value_parser = parse_variant)]
    variant: Vec<GraphVariant>,
    /// Mutation operators, comma separated.
    #[arg(long, default_value = "ABS,AOR,LCR,ROR,UOI", value_delimiter = ',', value_parser = parse_operator)]
    op: Vec<MutationOperator>,
    #[command(flatten)]
    run: RunArgs,
    /// Drop unbounded mutants from K instead of scoring them zero.
    #[arg(long)]
    exclude_unbounded: bool,
    /// Orientation of field edges in variant f.
    #[arg(long, value_enum, default_value_t = Orientation::Formal)]
    field_orientation: Orientation,
    /// Repetitions for the timing measurements.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(3..))]
    timing_reps: u64,
    /// Output directory for ledger.jsonl, report.csv, report.md, timing.csv
    /// and one manifest per operator.
    #[arg(short, long, default_value = "impactlab-out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct VizArgs {
    /// Project directory the ledger was computed from.
    dir: PathBuf,
    /// Ledger written by `evaluate`.
    #[arg(long)]
    ledger: PathBuf,
    /// Mutant id as it appears in the ledger.
    #[arg(long)]
    mutant: String,
    /// Graph variant to draw.
    #[arg(long, default_value = "b", value_parser = parse_variant)]
    variant: GraphVariant,
    /// Orientation of field edges in variant f.
    #[arg(long, value_enum, default_value_t = Orientation::Formal)]
    field_orientation: Orientation,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Corpus root [default: the bundled corpus].
    root: Option<PathBuf>,
    /// Rewrite every expected.json from the current sources instead of
    /// checking them.
    #[arg(long)]
    bless: bool,
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn build_graph(dir: &Path, variant: GraphVariant, orientation: Orientation) -> Result<CallGraph> {
    let checked = compile_dir(dir)?;
    Ok(callgraph::build_with(
        &checked,
        variant,
        BuildOptions {
            field_orientation: orientation.into(),
        },
    ))
}

fn cmd_graph(a: &GraphArgs) -> Result<()> {
    let g = build_graph(&a.dir, a.variant, a.field_orientation)?;
    let text = match a.format {
        GraphFormat::Json => g.to_json() + "\n",
        GraphFormat::Dot => g.to_dot(),
    };
    emit(a.output.as_deref(), &text)
}

fn cmd_mutate(a: &MutateArgs) -> Result<()> {
    let config = a.run.config();
    let checked = compile_dir(&a.dir)?;
    let baseline = evalpipe::baseline(&checked, config.step_budget)?;
    let mutants = mutgen::sample(
        &mutgen::all_mutants(&checked, a.op),
        config.cap,
        config.seed,
    );
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| anyhow!("cannot start worker pool: {e}"))?;
    let entries = pool.install(|| {
        use rayon::prelude::*;
        mutants
            .par_iter()
            .map(|m| {
                let run = mutgen::run_mutant(&checked, m, &baseline, config.step_budget)?;
                Ok(ManifestEntry::new(m, run.viability))
            })
            .collect::<impactlab::Result<Vec<_>>>()
    })?;
    let manifest = Manifest {
        project: evalpipe::project_name(&a.dir),
        operator: a.op,
        seed: config.seed,
        mutants: entries,
    };
    emit(a.output.as_deref(), &manifest.to_json())
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let config = EvalConfig {
        unbounded: if a.exclude_unbounded {
            UnboundedPolicy::Exclude
        } else {
            UnboundedPolicy::Keep
        },
        field_orientation: a.field_orientation.into(),
        ..a.run.config()
    };
    let variants = unique(&a.variant);
    let ops = unique(&a.op);
    let checked = compile_dir(&a.dir)?;
    let name = evalpipe::project_name(&a.dir);
    let eval = evalpipe::evaluate_checked(&name, &checked, &variants, &ops, &config)?;
    let timing = evalpipe::timings(
        &name,
        &checked,
        &variants,
        a.timing_reps as usize,
        config.step_budget,
    )?;

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let write = |file: &str, text: &str| {
        let p = a.out.join(file);
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
    };
    write("ledger.jsonl", &eval.ledger_jsonl()?)?;
    write(
        "report.csv",
        &evalpipe::render_report(&eval.reports(), ReportFormat::Csv),
    )?;
    write(
        "report.md",
        &evalpipe::render_report(&eval.reports(), ReportFormat::Markdown),
    )?;
    write("timing.csv", &evalpipe::render_timings_csv(&timing))?;
    for m in &eval.manifests {
        write(&format!("manifest-{}.json", m.operator), &m.to_json())?;
    }
    eprintln!(
        "{}: {} run(s), {} killed mutant record(s) -> {}",
        name,
        eval.runs.len(),
        eval.runs.iter().map(|r| r.ledger.len()).sum::<usize>(),
        a.out.display()
    );
    Ok(())
}

fn unique<T: PartialEq + Copy>(xs: &[T]) -> Vec<T> {
    let mut out = Vec::new();
    for &x in xs {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn cmd_viz(a: &VizArgs) -> Result<()> {
    let text =
        fs::read_to_string(&a.ledger).with_context(|| format!("reading {}", a.ledger.display()))?;
    let records = evalpipe::ledger_from_jsonl(&text)?;
    let for_mutant: Vec<_> = records.iter().filter(|r| r.mutant == a.mutant).collect();
    if for_mutant.is_empty() {
        bail!("mutant `{}` is not in the ledger", a.mutant);
    }
    let Some(record) = for_mutant.iter().find(|r| r.variant == a.variant) else {
        let have: Vec<String> = for_mutant.iter().map(|r| r.variant.to_string()).collect();
        bail!(
            "the ledger has mutant `{}` only for variant(s) {}, not {}",
            a.mutant,
            have.join(", "),
            a.variant
        );
    };
    let checked = compile_dir(&a.dir)?;
    let graph = callgraph::build_with(
        &checked,
        a.variant,
        BuildOptions {
            field_orientation: a.field_orientation.into(),
        },
    );
    emit(
        a.output.as_deref(),
        &evalpipe::render_impact_dot(&graph, record)?,
    )
}

fn cmd_verify(a: &VerifyArgs) -> Result<bool> {
    let root = a.root.clone().unwrap_or_else(corpus::default_root);
    if a.bless {
        for dir in corpus::project_dirs(&root)? {
            let name = evalpipe::project_name(&dir);
            let checked = compile_dir(&dir.join("src")).with_context(|| name.clone())?;
            let suite = run_suite(&checked, DEFAULT_STEP_BUDGET)?;
            if !suite.all_pass() {
                let failing: Vec<String> = suite.failing().iter().map(|t| t.to_string()).collect();
                bail!(
                    "{name}: baseline suite is not green: {}",
                    failing.join(", ")
                );
            }
            let stats = corpus::observed_stats(&checked);
            let path = dir.join("expected.json");
            fs::write(&path, serde_json::to_string_pretty(&stats)? + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
            println!("{name}: recorded");
        }
        return Ok(true);
    }
    let mut all_ok = true;
    for check in corpus::verify_corpus(&root)? {
        if check.ok() {
            println!("{}: pass", check.name);
        } else {
            all_ok = false;
            println!("{}: FAIL", check.name);
            for m in &check.mismatches {
                println!("    {m}");
            }
        }
    }
    Ok(all_ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Graph(a) => cmd_graph(a).map(|_| true),
        Command::Mutate(a) => cmd_mutate(a).map(|_| true),
        Command::Evaluate(a) => cmd_evaluate(a).map(|_| true),
        Command::Viz(a) => cmd_viz(a).map(|_| true),
        Command::VerifyCorpus(a) => cmd_verify(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
