use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sdgattack::attacks::{apply_attack, AttackKind, AttackSpec};
use sdgattack::downstream::{feature_importances, train, tstr, ClassifierConfig, ClassifierSuite};
use sdgattack::experiment::{self, fixtures, run_experiment, ExperimentConfig};
use sdgattack::generators::{
    fit, GeneratorConfig, GeneratorFamily, DEFAULT_COMPONENTS, DEFAULT_EPOCHS,
};
use sdgattack::metrics::{fidelity_report, DEFAULT_BINS};
use sdgattack::tabular::{infer_schema, load_csv_with_schema, save_csv, Dataset, Schema};
use sdgattack::{Error, Result, Seed};

#[derive(Parser)]
#[command(
    name = "sdgattack",
    version,
    about = "Quality-degradation attacks on tabular synthetic data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply one attack to a CSV and write the attacked CSV.
    Attack(AttackArgs),
    /// Fit a generator on a CSV and write synthetic rows.
    Generate(GenerateArgs),
    /// Fidelity and train-on-synthetic/test-on-real utility between two CSVs.
    Evaluate(EvaluateArgs),
    /// Run an experiment sweep from a config file.
    Run(RunArgs),
    /// Write the bundled datasets and their schema files.
    Fixtures(FixtureArgs),
}

#[derive(Args)]
struct SchemaArgs {
    /// Schema file describing the CSV columns.
    #[arg(long, conflicts_with = "target")]
    schema: Option<PathBuf>,
    /// Infer the schema from the data, with this column as the label.
    #[arg(long, required_unless_present = "schema")]
    target: Option<String>,
    /// Most distinct values an inferred numeric column may have and still be categorical.
    #[arg(long, default_value_t = 20)]
    max_categories: usize,
}

impl SchemaArgs {
    fn schema_for(&self, csv: &Path) -> Result<Schema> {
        match (&self.schema, &self.target) {
            (Some(path), _) => Schema::load(path),
            (None, Some(target)) => Schema::new(infer_schema(csv, self.max_categories)?, target),
            (None, None) => unreachable!("clap requires one of --schema or --target"),
        }
    }

    fn load(&self, csv: &Path) -> Result<Dataset> {
        load_csv_with_schema(csv, &self.schema_for(csv)?)
    }
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long)]
    kind: AttackKind,
    #[arg(long, default_value_t = 0.0)]
    ratio: f64,
    #[arg(long, default_value_t = 2.0)]
    scale: f64,
    #[arg(long, default_value_t = 10.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Upper bound on --ratio.
    #[arg(long)]
    budget: Option<f64>,
    #[command(flatten)]
    schema: SchemaArgs,
    input: PathBuf,
    output: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value = "gmm")]
    family: GeneratorFamily,
    #[arg(long, default_value_t = DEFAULT_COMPONENTS)]
    components: usize,
    #[arg(long, default_value_t = DEFAULT_EPOCHS)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rows to sample; defaults to the input row count.
    #[arg(long)]
    rows: Option<usize>,
    #[command(flatten)]
    schema: SchemaArgs,
    input: PathBuf,
    output: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    real: PathBuf,
    synth: PathBuf,
    /// Held-out real data for utility; defaults to REAL.
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    schema: SchemaArgs,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Run with this single seed instead of the config's seeds.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct FixtureArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn attack(args: &AttackArgs) -> Result<()> {
    let data = args.schema.load(&args.input)?;
    let spec = AttackSpec {
        kind: args.kind,
        ratio: args.ratio,
        scale: args.scale,
        sigma: args.sigma,
        seed: Seed(args.seed),
        budget: args.budget,
        ..AttackSpec::default()
    };
    let ranking = if args.kind == AttackKind::FeatureImportance {
        let forest = train(
            &ClassifierConfig::random_forest().with_seed(Seed(args.seed)),
            &data,
        )?;
        Some(feature_importances(&forest)?)
    } else {
        None
    };
    let out = apply_attack(&spec, Some(&data), Some(&data), ranking.as_ref())?;
    save_csv(&out.data, &args.output)
}

fn generate(args: &GenerateArgs) -> Result<()> {
    let data = args.schema.load(&args.input)?;
    let config = GeneratorConfig {
        family: args.family,
        components: args.components,
        max_epochs: args.epochs,
        tolerance: args.tolerance,
        bins: args.bins,
        seed: Seed(args.seed),
    };
    let model = fit(&config, &data)?;
    let synth = model.sample(
        args.rows.unwrap_or(data.n_rows()),
        Seed(args.seed).derive("sample"),
    )?;
    save_csv(&synth, &args.output)
}

fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let schema = args.schema.schema_for(&args.real)?;
    let real = load_csv_with_schema(&args.real, &schema)?;
    let synth = load_csv_with_schema(&args.synth, &schema)?;
    let test = match &args.test {
        Some(p) => load_csv_with_schema(p, &schema)?,
        None => real.clone(),
    };
    let report = fidelity_report(&real, &synth, args.bins)?;
    let mut out = std::io::stdout().lock();
    report.write_csv(&mut out)?;
    let utility = tstr(
        &synth,
        &test,
        &ClassifierSuite::default().reseeded(Seed(args.seed)),
    )?;
    writeln!(
        out,
        "classifier,accuracy\nlogreg,{}\nrandom_forest,{}\nmlp,{}",
        utility.acc_lr, utility.acc_rf, utility.acc_mlp
    )
    .map_err(|e| Error::io("<stdout>", e))
}

fn run(args: &RunArgs) -> Result<()> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seeds = vec![seed];
    }
    let dir = config.output_dir(args.out_dir.as_deref());
    let (records, report) = run_experiment(&config)?;
    let failed = records.iter().filter(|r| r.metrics().is_none()).count();
    let written = experiment::write_outputs(&dir, &records, &report, &config.output.formats)?;
    println!("{} runs, {failed} failed", records.len());
    if report.is_empty() {
        println!("no attacks configured; report skipped");
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn write_fixtures(args: &FixtureArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out_dir).map_err(|e| sdgattack::Error::Io {
        path: args.out_dir.clone(),
        source: e,
    })?;
    for name in fixtures::FIXTURE_NAMES {
        let rows = fixtures::default_rows(name).expect("bundled fixture");
        let data = fixtures::fixture(name, rows, Seed(args.seed))?;
        let csv = args.out_dir.join(format!("{name}.csv"));
        save_csv(&data, &csv)?;
        data.schema()
            .save(args.out_dir.join(format!("{name}.schema.toml")))?;
        println!("wrote {}", csv.display());
    }
    Ok(())
}

fn is_broken_pipe(e: &Error) -> bool {
    let io = match e {
        Error::Io { source, .. } => Some(source),
        Error::Csv(c) => match c.kind() {
            csv::ErrorKind::Io(source) => Some(source),
            _ => None,
        },
        _ => None,
    };
    io.is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Attack(a) => attack(a),
        Command::Generate(a) => generate(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Run(a) => run(a),
        Command::Fixtures(a) => write_fixtures(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // a closed pipe downstream (e.g. `| head`) is not a failure
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
