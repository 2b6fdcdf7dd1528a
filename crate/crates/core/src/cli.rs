//! The `equalizer` command-line tool.
//!
//! Five subcommands cover the whole workflow: `demo-data` emits the bundled
//! demonstration cohort, `generate` fits a generator and samples from it,
//! `audit` scores a synthetic dataset against its reference, `augment`
//! repairs under-covered subgroups with filtered synthetic rows, and
//! `compare` diffs two audit reports.
//!
//! Every run prints its resolved configuration to stderr, and runs with
//! identical arguments and input files write byte-identical artifacts.
//! Library log verbosity is controlled by the `EQUALIZER_LOG` environment
//! variable.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dataset::{
    default_demo_spec, generate_demo_cohort, load_csv, load_schema, save_csv, save_schema, Dataset,
};
use crate::equalizer::{self, EqualizerConfig, Strategy, SubgroupLog, SubgroupStatus};
use crate::error::Result;
use crate::generators::{build_generator, generator_names, GeneratorConfig};
use crate::report::{
    build_audit, canonical_json, compare_reports, emit_audit_json, load_audit_json, svg,
    AuditOptions,
};

/// Clean run.
pub const EXIT_OK: u8 = 0;
/// Unknown flag, subcommand, or unparsable value.
pub const EXIT_USAGE: u8 = 1;
/// Data or validation failure (bad files, schema violations, bad config).
pub const EXIT_DATA: u8 = 2;
/// Augmentation finished but left at least one subgroup below τ.
pub const EXIT_PARTIAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "equalizer",
    version,
    about = "Audits subgroup representation in synthetic tabular data and \
             repairs under-covered subgroups with filtered synthetic rows"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the bundled demonstration cohort and its schema sidecar.
    DemoData(DemoDataArgs),
    /// Audit a synthetic dataset against its reference.
    Audit(AuditArgs),
    /// Fill under-covered subgroups with filtered synthetic rows.
    Augment(AugmentArgs),
    /// Fit a generator and sample unconditioned records from it.
    Generate(GenerateArgs),
    /// Diff two audit reports produced by `audit`.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
struct DemoDataArgs {
    /// Number of rows to generate.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; the schema sidecar lands next to it as `<stem>.schema.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct AuditArgs {
    /// Reference dataset (CSV).
    #[arg(long)]
    real: PathBuf,
    /// Dataset under audit (CSV).
    #[arg(long)]
    synthetic: PathBuf,
    /// Schema JSON governing both files.
    #[arg(long)]
    schema: PathBuf,
    /// Comma-separated attribute columns (default: the schema's protected set).
    #[arg(long, value_delimiter = ',')]
    attrs: Option<Vec<String>>,
    /// Coverage threshold recorded in the report.
    #[arg(long, default_value_t = 150)]
    tau: usize,
    /// Report JSON path; written to stdout when omitted.
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Sunburst SVG path.
    #[arg(long)]
    out_svg: Option<PathBuf>,
    /// Tier-histogram SVG path.
    #[arg(long)]
    out_histogram: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AugmentArgs {
    /// Dataset to augment (CSV).
    #[arg(long)]
    real: PathBuf,
    /// Schema JSON.
    #[arg(long)]
    schema: PathBuf,
    /// Coverage threshold: subgroups below it are filled up to it.
    #[arg(long, default_value_t = 150)]
    tau: usize,
    #[arg(long, default_value_t = 50)]
    batch_size: usize,
    /// Discriminator-AUC acceptance threshold in (0, 1].
    #[arg(long, default_value_t = 0.85)]
    alpha: f64,
    #[arg(long, default_value = "cond-empirical",
          value_parser = PossibleValuesParser::new(generator_names()))]
    generator: String,
    /// Pool CSV for the external generator.
    #[arg(long)]
    pool: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Conditional)]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Batches to try per subgroup before giving up.
    #[arg(long, default_value_t = 50)]
    max_attempts: u64,
    /// Augmented CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Per-subgroup augmentation log (JSON).
    #[arg(long)]
    log_json: Option<PathBuf>,
    /// Comma-separated subgroup columns (default: the schema's protected set).
    #[arg(long, value_delimiter = ',')]
    attrs: Option<Vec<String>>,
    /// One-class SVM ν.
    #[arg(long, default_value_t = 0.05)]
    nu: f64,
    /// One-class SVM RBF γ (default: 1 / one-hot dimension).
    #[arg(long)]
    gamma: Option<f64>,
    /// Additive smoothing for cond-empirical and chowliu.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Keep whole accepted batches instead of truncating at the gap.
    #[arg(long)]
    overshoot: bool,
    /// Worker threads for per-subgroup processing.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Training dataset (CSV) the generator is fitted on.
    #[arg(long)]
    model_from: PathBuf,
    /// Schema JSON.
    #[arg(long)]
    schema: PathBuf,
    /// Number of rows to sample.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "cond-empirical",
          value_parser = PossibleValuesParser::new(generator_names()))]
    generator: String,
    /// Pool CSV for the external generator.
    #[arg(long)]
    pool: Option<PathBuf>,
    /// Additive smoothing for cond-empirical and chowliu.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Sampled CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Baseline audit report (JSON).
    #[arg(long)]
    before: PathBuf,
    /// Follow-up audit report (JSON).
    #[arg(long)]
    after: PathBuf,
    /// Comparison JSON path; written to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// CLI spelling of the augmentation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Conditional,
    PerSubgroup,
}

impl StrategyArg {
    fn flag_name(self) -> &'static str {
        match self {
            StrategyArg::Conditional => "conditional",
            StrategyArg::PerSubgroup => "per-subgroup",
        }
    }
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Conditional => Strategy::Conditional,
            StrategyArg::PerSubgroup => Strategy::PerSubgroup,
        }
    }
}

/// Shape of the `--log-json` artifact written by `augment`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentLog {
    /// Semantic configuration only: scheduling knobs and output paths are
    /// excluded so identical inputs give byte-identical logs regardless of
    /// `--jobs` or where the artifacts land.
    pub config: BTreeMap<String, String>,
    pub generator: String,
    pub fully_filled: bool,
    pub added_rows: usize,
    pub subgroups: Vec<SubgroupLog>,
}

/// Parses `std::env::args` and runs the tool; returns the process exit code.
pub fn run() -> u8 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    init_logging();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("EQUALIZER_LOG", "warn");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::DemoData(args) => demo_data(args),
        Command::Audit(args) => audit(args),
        Command::Augment(args) => augment(args),
        Command::Generate(args) => generate(args),
        Command::Compare(args) => compare(args),
    }
}

fn echo_line(map: &BTreeMap<String, String>) -> String {
    map.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn print_echo(map: &BTreeMap<String, String>) {
    eprintln!("resolved config: {}", echo_line(map));
}

/// `data.csv` → `data.schema.json`.
fn schema_sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("schema.json")
}

fn entry(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}

fn demo_data(args: DemoDataArgs) -> Result<u8> {
    let echo = BTreeMap::from([
        entry("command", "demo-data"),
        entry("n", args.n),
        entry("seed", args.seed),
        entry("out", args.out.display()),
    ]);
    print_echo(&echo);
    let cohort = generate_demo_cohort(&default_demo_spec(args.n, args.seed))?;
    save_csv(&cohort, &args.out)?;
    let sidecar = schema_sidecar_path(&args.out);
    save_schema(&cohort.schema, &sidecar)?;
    eprintln!(
        "wrote {} rows to {} (schema: {})",
        cohort.len(),
        args.out.display(),
        sidecar.display()
    );
    Ok(EXIT_OK)
}

fn audit(args: AuditArgs) -> Result<u8> {
    let schema = load_schema(&args.schema)?;
    let real = load_csv(&args.real, &schema)?;
    let synthetic = load_csv(&args.synthetic, &schema)?;
    let attributes = match &args.attrs {
        Some(a) => a.clone(),
        None => schema.protected_columns(),
    };
    let ring_order = svg::default_ring_order(&schema);
    let echo = BTreeMap::from([
        entry("command", "audit"),
        entry("real", args.real.display()),
        entry("synthetic", args.synthetic.display()),
        entry("schema", args.schema.display()),
        entry("attrs", attributes.join(",")),
        entry("ring_order", ring_order.join(",")),
        entry("tau", args.tau),
    ]);
    print_echo(&echo);
    let options = AuditOptions {
        real_id: args.real.display().to_string(),
        synthetic_id: args.synthetic.display().to_string(),
        attributes: Some(attributes),
        ring_order: Some(ring_order),
        tau: args.tau,
        config: echo.clone(),
    };
    let report = build_audit(&real, &synthetic, &options)?;
    match &args.out_json {
        Some(path) => emit_audit_json(&report, path)?,
        None => print!("{}", canonical_json(&report)?),
    }
    let desc = echo_line(&echo);
    if let Some(path) = &args.out_svg {
        svg::render_sunburst_svg(&report.sunburst, &desc, path)?;
    }
    if let Some(path) = &args.out_histogram {
        svg::render_histogram_svg(&report.tier_histogram, &desc, path)?;
    }
    eprintln!(
        "audited {} subgroups: {} adequate, {} extreme",
        report.tier_histogram.total(),
        report.tier_histogram.adequate,
        report.tier_histogram.extreme()
    );
    Ok(EXIT_OK)
}

fn augment(args: AugmentArgs) -> Result<u8> {
    let schema = load_schema(&args.schema)?;
    let real = load_csv(&args.real, &schema)?;
    let pool = match &args.pool {
        Some(path) => Some(load_csv(path, &schema)?),
        None => None,
    };
    let attributes = match &args.attrs {
        Some(a) => a.clone(),
        None => schema.protected_columns(),
    };

    // The embedded echo carries only settings that shape the result, so the
    // log is byte-identical across --jobs values and output locations.
    let mut embedded = BTreeMap::from([
        entry("command", "augment"),
        entry("real", args.real.display()),
        entry("generator", &args.generator),
        entry("tau", args.tau),
        entry("batch_size", args.batch_size),
        entry("alpha", args.alpha),
        entry("strategy", args.strategy.flag_name()),
        entry("seed", args.seed),
        entry("max_attempts", args.max_attempts),
        entry("attrs", attributes.join(",")),
        entry("nu", args.nu),
        entry("overshoot", args.overshoot),
    ]);
    if let Some(g) = args.gamma {
        embedded.insert("gamma".into(), g.to_string());
    }
    if let Some(e) = args.epsilon {
        embedded.insert("epsilon".into(), e.to_string());
    }
    if let Some(path) = &args.pool {
        embedded.insert("pool".into(), path.display().to_string());
    }
    let mut echo = embedded.clone();
    echo.insert("jobs".into(), args.jobs.to_string());
    echo.insert("out".into(), args.out.display().to_string());
    if let Some(path) = &args.log_json {
        echo.insert("log_json".into(), path.display().to_string());
    }
    print_echo(&echo);

    let generator = build_generator(
        &args.generator,
        &GeneratorConfig {
            epsilon: args.epsilon,
            pool,
        },
    )?;
    let config = EqualizerConfig {
        tau: args.tau,
        batch_size: args.batch_size,
        alpha: args.alpha,
        strategy: args.strategy.into(),
        max_attempts: args.max_attempts,
        master_seed: args.seed,
        subgroup_columns: Some(attributes),
        nu: args.nu,
        gamma: args.gamma,
        epsilon: args.epsilon,
        overshoot: args.overshoot,
        jobs: args.jobs,
    };
    let result = equalizer::run(&real, generator.as_ref(), &config)?;
    save_csv(&result.augmented, &args.out)?;
    if let Some(path) = &args.log_json {
        let log = AugmentLog {
            config: embedded,
            generator: result.generator.clone(),
            fully_filled: result.fully_filled(),
            added_rows: result.added_rows(),
            subgroups: result.logs.clone(),
        };
        fs::write(path, canonical_json(&log)?)?;
    }
    eprintln!(
        "targeted {} subgroups, added {} rows, wrote {} rows to {}",
        result.logs.len(),
        result.added_rows(),
        result.augmented.len(),
        args.out.display()
    );
    let partial: Vec<String> = result
        .logs
        .iter()
        .filter(|l| l.status == SubgroupStatus::Partial)
        .map(|l| format!("{} ({}/{})", l.pattern.key(&real.schema), l.filled, l.gap))
        .collect();
    if partial.is_empty() {
        Ok(EXIT_OK)
    } else {
        for p in &partial {
            eprintln!("partial: {p}");
        }
        Ok(EXIT_PARTIAL)
    }
}

fn generate(args: GenerateArgs) -> Result<u8> {
    let schema = load_schema(&args.schema)?;
    let data = load_csv(&args.model_from, &schema)?;
    let pool = match &args.pool {
        Some(path) => Some(load_csv(path, &schema)?),
        None => None,
    };
    let mut echo = BTreeMap::from([
        entry("command", "generate"),
        entry("model_from", args.model_from.display()),
        entry("schema", args.schema.display()),
        entry("generator", &args.generator),
        entry("n", args.n),
        entry("seed", args.seed),
        entry("out", args.out.display()),
    ]);
    if let Some(e) = args.epsilon {
        echo.insert("epsilon".into(), e.to_string());
    }
    if let Some(path) = &args.pool {
        echo.insert("pool".into(), path.display().to_string());
    }
    print_echo(&echo);
    let generator = build_generator(
        &args.generator,
        &GeneratorConfig {
            epsilon: args.epsilon,
            pool,
        },
    )?;
    let model = generator.fit(&data)?;
    let batch = model.sample(args.n, args.seed, None)?;
    let sampled = Dataset::new(schema, batch.rows)?;
    save_csv(&sampled, &args.out)?;
    eprintln!(
        "sampled {} rows from {} into {}",
        sampled.len(),
        batch.origin,
        args.out.display()
    );
    Ok(EXIT_OK)
}

fn compare(args: CompareArgs) -> Result<u8> {
    let echo = BTreeMap::from([
        entry("command", "compare"),
        entry("before", args.before.display()),
        entry("after", args.after.display()),
    ]);
    print_echo(&echo);
    let before = load_audit_json(&args.before)?;
    let after = load_audit_json(&args.after)?;
    let cmp = compare_reports(&before, &after)?;
    match &args.out {
        Some(path) => fs::write(path, canonical_json(&cmp)?)?,
        None => print!("{}", canonical_json(&cmp)?),
    }
    eprintln!(
        "{} subgroups changed tier ({} adequate before, {} after)",
        cmp.transitions.len(),
        cmp.before.adequate,
        cmp.after.adequate
    );
    Ok(EXIT_OK)
}
