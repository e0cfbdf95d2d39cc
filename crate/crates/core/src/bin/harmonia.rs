use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use harmonia::estimate::sample_joint;
use harmonia::model_file::{load_model, ModelDocument};
use harmonia::modelgen::{copy_model, correlated_pair_counterexample, independent_model, try_random_model, ModelSpec};
use harmonia::placement::{optimal_head_position_joint, Aggregate, Objective, Placement, SearchOptions};
use harmonia::sweep::{model_summary, run_verify, search_summary, write_profile_csv, AggregateChoice, InfoUnit, RunConfig};
use harmonia::typology::{bundled_rows, parse_rows, typology_report};
use harmonia::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "harmonia", version, about = "Exact predictability analysis of head placement")]
struct Cli {
    /// JSON run configuration; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance in nats.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, short = 'o', global = true)]
    out: Option<PathBuf>,
    /// Omit the timestamp header line from CSV output.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep random or given models through every relation check.
    Verify(VerifyArgs),
    /// Predictability at every stage for every head position.
    Profile(ProfileArgs),
    /// Verb-position counts and recomputed percentages.
    Typology(TypologyArgs),
    /// Write a model file.
    Gen(GenArgs),
    /// Draw sequences from a model.
    Sample(SampleArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Random models per (n, alphabet size) cell.
    #[arg(long)]
    sweep_size: Option<usize>,
    /// Comma-separated dependent counts.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Comma-separated alphabet sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Verify these model files instead of random models.
    #[arg(long = "model")]
    models: Vec<PathBuf>,
    #[arg(long)]
    witness_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    aggregate: Option<AggregateArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AggregateArg {
    Min,
    Mean,
}

impl From<AggregateArg> for AggregateChoice {
    fn from(a: AggregateArg) -> Self {
        match a {
            AggregateArg::Min => AggregateChoice::Min,
            AggregateArg::Mean => AggregateChoice::Mean,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ObjectiveArg {
    Head,
    Dependent,
    Remainder,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    model: PathBuf,
    #[arg(long, value_enum, default_value = "head")]
    objective: ObjectiveArg,
    /// Stage for the remainder objective.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Dependent production order, e.g. 2,1,3.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    aggregate: Option<AggregateArg>,
    /// Report bits instead of nats.
    #[arg(long)]
    bits: bool,
}

#[derive(Args, Debug)]
struct TypologyArgs {
    /// CSV with columns source,unit,order_position,frequency,percentage.
    path: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(subcommand)]
    generator: Generator,
    /// Print the summary in bits.
    #[arg(long, global = true)]
    bits: bool,
}

#[derive(Subcommand, Debug)]
enum Generator {
    /// Each dependent copies the head with a symmetric noise rate.
    Copy {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Dirichlet-random prior and conditional tables.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        head_size: usize,
        /// One size for every dependent, or a comma-separated list.
        #[arg(long, value_delimiter = ',', default_value = "2")]
        dep_sizes: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        concentration: f64,
    },
    /// Every variable uniform and independent.
    Independent {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        size: usize,
    },
    /// Two dependents correlated with each other but not with the head.
    Counterexample,
}

#[derive(Args, Debug)]
struct SampleArgs {
    model: PathBuf,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    /// 1-based head position in the sequence.
    #[arg(long, default_value_t = 1)]
    head_position: usize,
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<usize>>,
    /// Write value labels instead of indices where the alphabet has them.
    #[arg(long)]
    labels: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("HARMONIA_THREADS") {
        match threads.parse::<usize>() {
            Ok(t) if t > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => {
                eprintln!("error: HARMONIA_THREADS must be a positive integer, got `{threads}`");
                return ExitCode::from(2);
            }
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = cli.tol {
        cfg.tolerance = tol;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.no_timestamp {
        cfg.timestamp = false;
    }
    match cli.command {
        Command::Verify(args) => verify(cfg, args),
        Command::Profile(args) => profile(&cfg, args),
        Command::Typology(args) => typology(&cfg, args),
        Command::Gen(args) => gen(&cfg, args),
        Command::Sample(args) => sample(&cfg, args),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Where human-readable notes go: stdout when the data went to a file.
fn note(cfg: &RunConfig, text: &str) {
    if cfg.out.is_some() {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
}

fn csv_output(cfg: &RunConfig) -> Result<Box<dyn Write>> {
    let mut out = open_output(cfg.out.as_deref())?;
    if cfg.timestamp {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        writeln!(out, "# generated_at_unix={now}")?;
    }
    Ok(out)
}

fn verify(mut cfg: RunConfig, args: VerifyArgs) -> Result<ExitCode> {
    if let Some(s) = args.sweep_size {
        cfg.sweep_size = s;
    }
    if let Some(n) = args.n {
        cfg.n_values = n;
    }
    if let Some(sizes) = args.sizes {
        cfg.sizes = sizes;
    }
    if !args.models.is_empty() {
        cfg.models = args.models;
    }
    if args.witness_dir.is_some() {
        cfg.witness_dir = args.witness_dir;
    }
    if let Some(a) = args.aggregate {
        cfg.aggregate = a.into();
    }
    cfg.validate()?;
    let report = run_verify(&cfg)?;
    let mut out = csv_output(&cfg)?;
    report.write_csv(&mut out)?;
    out.flush()?;
    drop(out);

    let mut summary = format!(
        "{} models, {} checks, {} failures\n",
        report.models(),
        report.checks(),
        report.failures()
    );
    for (id, c) in report.all_checks().filter(|(_, c)| !c.holds) {
        summary.push_str(&format!(
            "FAIL {id} {} {} {}: lhs {} rhs {} slack {}\n",
            c.theorem, c.name, c.relation, c.lhs.0, c.rhs.0, c.slack
        ));
    }
    for w in &report.witnesses {
        summary.push_str(&format!("witness written to {}\n", w.display()));
    }
    eprint!("{summary}");
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn profile(cfg: &RunConfig, args: ProfileArgs) -> Result<ExitCode> {
    let joint = load_model(&args.model)?.joint()?;
    let objective = match args.objective {
        ObjectiveArg::Head => Objective::HeadPredictability,
        ObjectiveArg::Dependent => Objective::DependentPredictability,
        ObjectiveArg::Remainder => Objective::RemainderAtK(args.k),
    };
    let aggregate: Aggregate = args.aggregate.map(AggregateChoice::from).unwrap_or(cfg.aggregate).into();
    let options = SearchOptions {
        aggregate,
        dependent_order: args.order,
        tol: cfg.tolerance,
    };
    let search = optimal_head_position_joint(&joint, objective, &options)?;
    let unit = if args.bits { InfoUnit::Bits } else { InfoUnit::Nats };
    let mut out = csv_output(cfg)?;
    write_profile_csv(&search, unit, &mut out)?;
    out.flush()?;
    drop(out);
    note(cfg, &search_summary(&search, unit));
    Ok(ExitCode::SUCCESS)
}

fn typology(cfg: &RunConfig, args: TypologyArgs) -> Result<ExitCode> {
    let rows = match &args.path {
        Some(p) => parse_rows(File::open(p)?).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?,
        None => bundled_rows(),
    };
    let report = typology_report(&rows)?;
    if cfg.out.is_some() {
        let mut out = csv_output(cfg)?;
        report.write_csv(&mut out)?;
        out.flush()?;
    }
    print!("{report}");
    let flagged = report.discrepancies();
    if !flagged.is_empty() {
        println!("{} published percentages differ from the counts by more than 0.05", flagged.len());
    }
    println!("all groups increasing: {}", report.all_increasing());
    Ok(ExitCode::SUCCESS)
}

fn gen(cfg: &RunConfig, args: GenArgs) -> Result<ExitCode> {
    let mut meta = Map::new();
    let doc = match args.generator {
        Generator::Copy { n, size, noise } => {
            meta.insert("generator".into(), Value::from("copy"));
            meta.insert("noise".into(), Value::from(noise));
            ModelDocument::from_factored(&copy_model(n, size, noise)?, meta)
        }
        Generator::Random {
            n,
            head_size,
            dep_sizes,
            concentration,
        } => {
            let dep_sizes = match dep_sizes.as_slice() {
                [one] => vec![*one; n],
                many if many.len() == n => many.to_vec(),
                many => {
                    return Err(Error::InvalidArgument(format!(
                        "--dep-sizes gives {} sizes for n = {n}",
                        many.len()
                    )))
                }
            };
            let spec = ModelSpec {
                head_size,
                dep_sizes,
                concentration,
                seed: cfg.seed,
            };
            meta.insert("generator".into(), Value::from("random"));
            meta.insert("seed".into(), Value::from(cfg.seed));
            meta.insert("concentration".into(), Value::from(concentration));
            ModelDocument::from_factored(&try_random_model(&spec)?, meta)
        }
        Generator::Independent { n, size } => {
            meta.insert("generator".into(), Value::from("independent"));
            ModelDocument::from_factored(&independent_model(n, size), meta)
        }
        Generator::Counterexample => {
            meta.insert("generator".into(), Value::from("counterexample"));
            ModelDocument::from_joint(&correlated_pair_counterexample(), meta)?
        }
    };
    let joint = doc.clone().into_model()?.joint()?;
    let mut out = open_output(cfg.out.as_deref())?;
    out.write_all(doc.to_json().as_bytes())?;
    out.flush()?;
    drop(out);
    let unit = if args.bits { InfoUnit::Bits } else { InfoUnit::Nats };
    note(cfg, &model_summary(&joint, unit)?);
    Ok(ExitCode::SUCCESS)
}

fn sample(cfg: &RunConfig, args: SampleArgs) -> Result<ExitCode> {
    let model = load_model(&args.model)?;
    let n = model.n();
    let order = args.order.unwrap_or_else(|| (1..=n).collect());
    let placement = Placement::new(n, args.head_position, order)?;
    let samples = sample_joint(&model.joint()?, &placement, args.count, cfg.seed)?;
    let mut out = csv_output(cfg)?;
    samples.write_csv(&mut out, args.labels)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}
