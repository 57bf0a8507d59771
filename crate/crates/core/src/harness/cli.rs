use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::config::{default_lambda, parse_list, train_config_from_kv, DataSettings, FigureConfig, KvConfig};
use super::experiment::{
    build_task_list, circuit_for, describe_ewc, final_accuracies, run_figure, write_file, write_run_artifacts,
};
use super::figures::{builtin_config, FIGURE_IDS};
use super::plot::render_svg;
use super::tasks::{default_data_dir, DataContext, TaskSpec};
use crate::data::write_dataset;
use crate::error::{Error, Result};
use crate::learn::{continual_run, EwcSettings, FisherMode, LearningCurve, Split};

#[derive(Parser, Debug)]
#[command(name = "qontinual", version, about = "Continual learning experiments for variational quantum classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a dataset cache (`NAME_train.csv`, `NAME_test.csv`, `NAME_manifest.txt`).
    GenData(GenDataArgs),
    /// Train on a single task.
    Train(TrainArgs),
    /// Train on a sequence of tasks, optionally with EWC.
    Continual(ContinualArgs),
    /// Run a task sequence once per EWC strength.
    Sweep(SweepArgs),
    /// Render a learning-curve CSV as SVG.
    Plot(PlotArgs),
    /// Run the shipped experiment for a figure.
    Reproduce(ReproduceArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataKind {
    MnistPair,
    MnistPermuted,
    Tof,
    Spt,
}

#[derive(Args, Debug, Clone, Default)]
pub struct DataFlags {
    /// Dataset cache directory [default: $QONTINUAL_DATA_DIR or the repository's data/]
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// MNIST images IDX file (optionally gzipped)
    #[arg(long)]
    pub images: Option<PathBuf>,
    /// MNIST labels IDX file (optionally gzipped)
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonFlags {
    /// key=value config file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Circuit layers
    #[arg(long)]
    pub layers: Option<usize>,
    #[command(flatten)]
    pub data: DataFlags,
}

#[derive(Args, Debug)]
pub struct GenDataArgs {
    pub kind: DataKind,
    /// First digit (mnist kinds)
    #[arg(long)]
    pub a: Option<u8>,
    /// Second digit (mnist kinds)
    #[arg(long)]
    pub b: Option<u8>,
    /// Training samples per class
    #[arg(long, visible_alias = "n")]
    pub n_train: Option<usize>,
    /// Test samples per class
    #[arg(long)]
    pub n_test: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory [default: the data directory]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataFlags,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Task: mnist-pair:A:B, mnist-permuted:A:B, tof, spt or cache:NAME
    #[arg(long)]
    pub task: Option<String>,
    /// Cached dataset name (same as --task cache:NAME)
    #[arg(long, conflicts_with = "task")]
    pub dataset: Option<String>,
    #[arg(long, default_value = "out/train")]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonFlags,
}

#[derive(Args, Debug)]
pub struct ContinualArgs {
    /// Comma-separated task list
    #[arg(long)]
    pub tasks: Option<String>,
    #[arg(long, value_parser = ["on", "off"])]
    pub ewc: Option<String>,
    /// EWC strength, or one per task separated by commas
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long, value_parser = ["diag", "full"])]
    pub fisher: Option<String>,
    #[arg(long, default_value = "out/continual")]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonFlags,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub tasks: Option<String>,
    /// Comma-separated EWC strengths
    #[arg(long, default_value = "1,3,10,30,100,300")]
    pub lambdas: String,
    #[arg(long, value_parser = ["diag", "full"], default_value = "diag")]
    pub fisher: String,
    #[arg(long, default_value = "out/sweep")]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonFlags,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    pub curve: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    #[arg(value_parser = FIGURE_IDS)]
    pub figure: String,
    /// Output directory [default: out/<figure>]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonFlags,
}

fn load_kv(common: &CommonFlags) -> Result<KvConfig> {
    let mut kv = match &common.config {
        Some(p) => KvConfig::load(p)?,
        None => KvConfig::default(),
    };
    apply_overrides(&mut kv, common);
    Ok(kv)
}

fn apply_overrides(kv: &mut KvConfig, c: &CommonFlags) {
    if let Some(v) = c.seed {
        kv.set("seed", v);
    }
    if let Some(v) = c.epochs {
        kv.set("epochs", v);
    }
    if let Some(v) = c.batch_size {
        kv.set("batch_size", v);
    }
    if let Some(v) = c.learning_rate {
        kv.set("learning_rate", v);
    }
    if let Some(v) = c.layers {
        kv.set("n_layers", v);
    }
    if let Some(p) = &c.data.images {
        kv.set("mnist_images", p.display());
    }
    if let Some(p) = &c.data.labels {
        kv.set("mnist_labels", p.display());
    }
}

fn data_dir(flags: &DataFlags, kv: &KvConfig) -> PathBuf {
    flags.data_dir.clone().or_else(|| kv.get("data_dir").map(PathBuf::from)).unwrap_or_else(default_data_dir)
}

fn print_finals(curve: &LearningCurve) {
    println!("task,final_test_accuracy");
    for (task, acc) in final_accuracies(curve) {
        println!("{task},{acc:.4}");
    }
}

fn cmd_gen_data(args: GenDataArgs) -> Result<()> {
    let mut kv = KvConfig::default();
    if let Some(p) = &args.data.images {
        kv.set("mnist_images", p.display());
    }
    if let Some(p) = &args.data.labels {
        kv.set("mnist_labels", p.display());
    }
    let keys = match args.kind {
        DataKind::MnistPair | DataKind::MnistPermuted => ("mnist_train_per_class", "mnist_test_per_class"),
        DataKind::Tof => ("tof_train_per_class", "tof_test_per_class"),
        DataKind::Spt => ("spt_train_per_class", "spt_test_per_class"),
    };
    if let Some(n) = args.n_train {
        kv.set(keys.0, n);
    }
    if let Some(n) = args.n_test {
        kv.set(keys.1, n);
    }
    let dir = data_dir(&args.data, &kv);
    let spec = match args.kind {
        DataKind::MnistPair | DataKind::MnistPermuted => {
            let (Some(a), Some(b)) = (args.a, args.b) else {
                return Err(Error::invalid("mnist kinds need --a and --b"));
            };
            let s = format!("{}:{a}:{b}", if args.kind == DataKind::MnistPair { "mnist-pair" } else { "mnist-permuted" });
            s.parse::<TaskSpec>()?
        }
        DataKind::Tof => TaskSpec::Tof,
        DataKind::Spt => TaskSpec::Spt,
    };
    let ctx = DataContext::new(DataSettings::from_kv(&kv, dir.clone())?, args.seed);
    let mut ds = ctx.build(&spec)?;
    ds.provenance.insert(0, ("master_seed".into(), args.seed.to_string()));
    let out = args.out.unwrap_or(dir);
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    for p in write_dataset(&ds, &out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn tasks_from(kv: &KvConfig, flag: Option<&str>) -> Result<Vec<TaskSpec>> {
    let list = flag.or(kv.get("tasks")).ok_or_else(|| Error::invalid("no tasks given (use --tasks or `tasks=` in the config)"))?;
    let specs: Vec<TaskSpec> = parse_list(list)?;
    if specs.is_empty() {
        return Err(Error::invalid("empty task list"));
    }
    Ok(specs)
}

fn run_sequence(
    kv: &KvConfig,
    flags: &DataFlags,
    specs: &[TaskSpec],
    ewc: &EwcSettings,
    out: &Path,
    stem: &str,
) -> Result<LearningCurve> {
    let train = train_config_from_kv(kv)?;
    let n_layers = kv.parse_or("n_layers", 10)?;
    let ctx = DataContext::new(DataSettings::from_kv(kv, data_dir(flags, kv))?, train.seed);
    let tasks = build_task_list(&ctx, specs)?;
    let (spec, circuit) = circuit_for(&tasks, n_layers)?;
    let outcome = continual_run(&circuit, &tasks, &train, ewc)?;
    let title = format!("{} ({})", tasks.iter().map(|t| t.name.as_str()).collect::<Vec<_>>().join(" → "), describe_ewc(ewc));
    for p in write_run_artifacts(out, stem, &title, &spec, &outcome)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(outcome.curve)
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let kv = load_kv(&args.common)?;
    let spec: TaskSpec = match (&args.task, &args.dataset, kv.get("task")) {
        (Some(t), _, _) => t.parse()?,
        (None, Some(d), _) => TaskSpec::Cached(d.clone()),
        (None, None, Some(t)) => t.parse()?,
        _ => return Err(Error::invalid("train needs --task or --dataset")),
    };
    let stem = spec.name();
    let curve = run_sequence(&kv, &args.common.data, &[spec], &EwcSettings::off(), &args.out, &stem)?;
    println!("task,final_train_accuracy,final_test_accuracy");
    let train = curve.final_accuracy(&stem, Split::Train).unwrap_or(f64::NAN);
    let test = curve.final_accuracy(&stem, Split::Test).unwrap_or(f64::NAN);
    println!("{stem},{train:.4},{test:.4}");
    Ok(())
}

fn ewc_from(kv: &KvConfig, ewc: Option<&str>, lambda: Option<&str>, fisher: Option<&str>) -> Result<EwcSettings> {
    let on = match ewc.or(kv.get("ewc")).unwrap_or("off") {
        "on" => true,
        "off" => false,
        other => return Err(Error::invalid(format!("ewc must be on or off, got {other:?}"))),
    };
    let lambda_text = lambda.or(kv.get("lambda"));
    if !on {
        if lambda_text.is_some() {
            eprintln!("warning: EWC is off, so the EWC strength (lambda) is ignored");
        }
        return Ok(EwcSettings::off());
    }
    let mode: FisherMode = fisher.or(kv.get("fisher")).unwrap_or("diag").parse()?;
    let lambdas = match lambda_text {
        Some(t) => parse_list::<f64>(t).map_err(|_| Error::invalid(format!("bad lambda list {t:?}")))?,
        None => vec![default_lambda(mode)],
    };
    Ok(EwcSettings { enabled: true, lambdas, mode })
}

fn cmd_continual(args: ContinualArgs) -> Result<()> {
    let kv = load_kv(&args.common)?;
    let specs = tasks_from(&kv, args.tasks.as_deref())?;
    let ewc = ewc_from(&kv, args.ewc.as_deref(), args.lambda.as_deref(), args.fisher.as_deref())?;
    let curve = run_sequence(&kv, &args.common.data, &specs, &ewc, &args.out, "continual")?;
    let mut summary = String::from("task,final_test_accuracy\n");
    for (task, acc) in final_accuracies(&curve) {
        summary.push_str(&format!("{task},{acc}\n"));
    }
    write_file(&args.out.join("summary.txt"), &summary)?;
    print_finals(&curve);
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let kv = load_kv(&args.common)?;
    let specs = tasks_from(&kv, args.tasks.as_deref())?;
    let mode: FisherMode = args.fisher.parse()?;
    let lambdas: Vec<f64> = parse_list(&args.lambdas)?;
    if lambdas.is_empty() {
        return Err(Error::invalid("empty lambda list"));
    }
    let mut table = String::from("lambda,task,final_test_accuracy\n");
    for &lambda in &lambdas {
        eprintln!("lambda {lambda}");
        let ewc = EwcSettings { enabled: true, lambdas: vec![lambda], mode };
        let curve = run_sequence(&kv, &args.common.data, &specs, &ewc, &args.out, &format!("lambda_{lambda}"))?;
        for (task, acc) in final_accuracies(&curve) {
            table.push_str(&format!("{lambda},{task},{acc}\n"));
        }
    }
    write_file(&args.out.join("sweep.csv"), &table)?;
    print!("{table}");
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> Result<()> {
    let text = fs::read_to_string(&args.curve).map_err(|e| Error::io(&args.curve, e))?;
    let curve = LearningCurve::from_csv(&text, &args.curve.display().to_string())?;
    let title = args.title.unwrap_or_else(|| {
        args.curve.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    });
    write_file(&args.out, &render_svg(&curve, &title))
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<()> {
    let mut kv = match &args.common.config {
        Some(p) => KvConfig::load(p)?,
        None => {
            let text = builtin_config(&args.figure).ok_or_else(|| {
                Error::invalid(format!("unknown figure {:?}; valid ids: {}", args.figure, FIGURE_IDS.join(", ")))
            })?;
            KvConfig::parse(text, &format!("{}.conf", args.figure))?
        }
    };
    apply_overrides(&mut kv, &args.common);
    let fig = FigureConfig::from_kv(&kv, data_dir(&args.common.data, &kv))?;
    let out = args.out.unwrap_or_else(|| PathBuf::from("out").join(&args.figure));
    let records = run_figure(&fig, &out, &mut |msg| eprintln!("{msg}"))?;
    write_file(&out.join("config.conf"), &kv.to_text())?;
    println!("experiment,variant,task,final_test_accuracy");
    for r in &records {
        for (task, acc) in final_accuracies(&r.outcome.curve) {
            println!("{},{},{task},{acc:.4}", r.experiment, r.variant);
        }
    }
    eprintln!("wrote artifacts to {}", out.display());
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData(a) => cmd_gen_data(a),
        Command::Train(a) => cmd_train(a),
        Command::Continual(a) => cmd_continual(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Plot(a) => cmd_plot(a),
        Command::Reproduce(a) => cmd_reproduce(a),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
