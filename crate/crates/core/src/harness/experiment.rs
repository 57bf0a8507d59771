use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::{ExperimentConfig, FigureConfig, Variant};
use super::plot::render_svg;
use super::tasks::{DataContext, TaskSpec};
use crate::ansatz::{AnsatzSpec, Circuit};
use crate::error::{Error, Result};
use crate::learn::{continual_run, Checkpoint, ContinualOutcome, EwcSettings, LearningCurve, Split, Task, TrainConfig};

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Circuit sized to the tasks' inputs.
pub fn circuit_for(tasks: &[Task], n_layers: usize) -> Result<(AnsatzSpec, Circuit)> {
    let first = tasks.first().ok_or_else(|| Error::invalid("no tasks"))?;
    let n_qubits = first.train[0].state.n_qubits();
    let spec = AnsatzSpec::new(n_qubits, n_layers);
    let circuit = Circuit::from_spec(&spec)?;
    Ok((spec, circuit))
}

pub fn checkpoint_of(spec: &AnsatzSpec, outcome: &ContinualOutcome) -> Checkpoint {
    Checkpoint {
        n_qubits: spec.n_qubits,
        n_layers: spec.n_layers,
        params: outcome.params.clone(),
        anchors: outcome.anchors.clone(),
    }
}

/// Final test accuracy of each task in a curve.
pub fn final_accuracies(curve: &LearningCurve) -> Vec<(String, f64)> {
    curve.tasks().into_iter().filter_map(|t| curve.final_accuracy(&t, Split::Test).map(|a| (t, a))).collect()
}

/// Outputs of one (experiment, variant) run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub experiment: String,
    pub variant: String,
    pub curve_path: PathBuf,
    pub outcome: ContinualOutcome,
}

/// Artifact paths written for a run: curve CSV, SVG and checkpoint.
pub fn write_run_artifacts(
    out_dir: &Path,
    stem: &str,
    title: &str,
    spec: &AnsatzSpec,
    outcome: &ContinualOutcome,
) -> Result<[PathBuf; 3]> {
    let curve_path = out_dir.join(format!("{stem}_curve.csv"));
    let svg_path = out_dir.join(format!("{stem}.svg"));
    let ckpt_path = out_dir.join(format!("{stem}.ckpt"));
    write_file(&curve_path, &outcome.curve.to_csv())?;
    write_file(&svg_path, &render_svg(&outcome.curve, title))?;
    write_file(&ckpt_path, &checkpoint_of(spec, outcome).to_text())?;
    Ok([curve_path, svg_path, ckpt_path])
}

fn build_tasks(ctx: &DataContext, specs: &[TaskSpec], cache: &mut BTreeMap<String, Task>) -> Result<Vec<Task>> {
    let mut tasks = Vec::with_capacity(specs.len());
    for spec in specs {
        let name = spec.name();
        if !cache.contains_key(&name) {
            let ds = ctx.build(spec)?;
            cache.insert(name.clone(), Task::from_dataset(&ds)?.renamed(name.clone()));
        }
        tasks.push(cache[&name].clone());
    }
    Ok(tasks)
}

fn run_experiment(
    exp: &ExperimentConfig,
    tasks: &[Task],
    n_layers: usize,
    train: &TrainConfig,
    out_dir: &Path,
    log: &mut dyn FnMut(&str),
) -> Result<Vec<RunRecord>> {
    let (spec, circuit) = circuit_for(tasks, n_layers)?;
    let mut records = Vec::new();
    for Variant { name, ewc } in &exp.variants {
        log(&format!("{}: variant {name}", exp.name));
        let outcome = continual_run(&circuit, tasks, train, ewc)?;
        let stem = format!("{}_{name}", exp.name);
        let title = format!("{} ({})", exp.name, describe_ewc(ewc));
        let [curve_path, ..] = write_run_artifacts(out_dir, &stem, &title, &spec, &outcome)?;
        records.push(RunRecord { experiment: exp.name.clone(), variant: name.clone(), curve_path, outcome });
    }
    Ok(records)
}

pub fn describe_ewc(ewc: &EwcSettings) -> String {
    if ewc.enabled {
        let lambdas: Vec<String> = ewc.lambdas.iter().map(|l| l.to_string()).collect();
        format!("EWC {} λ={}", ewc.mode.as_str(), lambdas.join("/"))
    } else {
        "no EWC".into()
    }
}

/// Summary table: one final test accuracy per (experiment, variant, task).
pub fn summary_text(figure: &str, records: &[RunRecord]) -> String {
    let mut out = format!("# {figure}: final test accuracy per task and variant\nexperiment,variant,task,final_test_accuracy\n");
    for r in records {
        for (task, acc) in final_accuracies(&r.outcome.curve) {
            writeln!(out, "{},{},{task},{acc}", r.experiment, r.variant).unwrap();
        }
    }
    out
}

/// Runs every experiment of a figure and writes its artifacts plus
/// `summary.txt` into `out_dir`.
pub fn run_figure(fig: &FigureConfig, out_dir: &Path, log: &mut dyn FnMut(&str)) -> Result<Vec<RunRecord>> {
    let ctx = DataContext::new(fig.data.clone(), fig.train.seed);
    let mut cache = BTreeMap::new();
    let mut records = Vec::new();
    for exp in &fig.experiments {
        log(&format!("{}: building tasks", exp.name));
        let tasks = build_tasks(&ctx, &exp.tasks, &mut cache)?;
        records.extend(run_experiment(exp, &tasks, fig.n_layers, &fig.train, out_dir, log)?);
    }
    write_file(&out_dir.join("summary.txt"), &summary_text(&fig.figure, &records))?;
    Ok(records)
}

pub fn build_task_list(ctx: &DataContext, specs: &[TaskSpec]) -> Result<Vec<Task>> {
    build_tasks(ctx, specs, &mut BTreeMap::new())
}
