use std::f64::consts::TAU;

use rayon::prelude::*;

use super::adam::{adam_step, AdamState};
use super::curve::{CurveEntry, LearningCurve, Split};
use super::fisher::{fisher, EwcAnchor, FisherMode, MAX_FULL_FISHER_PARAMS};
use super::loss::{bce_loss, loss_and_gradient};
use crate::ansatz::{Circuit, ParameterVector};
use crate::data::{Dataset, EncodedSample};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, SplitMix64};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
    pub prob_clip_epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 40,
            batch_size: 64,
            learning_rate: 0.01,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
            prob_clip_epsilon: 1e-7,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        if self.batch_size < 1 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        for (name, b) in [("beta1", self.adam_beta1), ("beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::invalid(format!("Adam {name} must be in [0, 1), got {b}")));
            }
        }
        if !(self.adam_epsilon > 0.0) {
            return Err(Error::invalid("Adam epsilon must be positive"));
        }
        if !(self.prob_clip_epsilon > 0.0 && self.prob_clip_epsilon < 0.5) {
            return Err(Error::invalid("probability clip must be in (0, 0.5)"));
        }
        Ok(())
    }
}

/// A task with its samples already encoded as circuit inputs.
#[derive(Debug, Clone)]
pub struct Task {
    pub name: String,
    pub train: Vec<EncodedSample>,
    pub test: Vec<EncodedSample>,
}

impl Task {
    pub fn from_dataset(ds: &Dataset) -> Result<Self> {
        ds.validate()?;
        Ok(Self { name: ds.name.clone(), train: ds.encode_train()?, test: ds.encode_test()? })
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Uniform angles on `[0, 2π)`.
pub fn init_params(n_params: usize, seed: u64) -> ParameterVector {
    let mut rng = SplitMix64::new(seed);
    ParameterVector::new((0..n_params).map(|_| rng.uniform(0.0, TAU)).collect())
}

/// Accuracy (threshold `p₁ > 0.5`) and mean BCE on a split.
pub fn evaluate(circuit: &Circuit, params: &ParameterVector, samples: &[EncodedSample], clip: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::invalid("cannot evaluate an empty split"));
    }
    let outputs: Vec<(bool, f64)> = samples
        .par_iter()
        .map(|s| {
            let p = circuit.forward(params.as_slice(), &s.state)?;
            Ok((u8::from(p > 0.5) == s.label, bce_loss(p, s.label, clip)))
        })
        .collect::<Result<_>>()?;
    let n = samples.len() as f64;
    let correct = outputs.iter().filter(|(ok, _)| *ok).count() as f64;
    let loss = outputs.iter().map(|(_, l)| l).sum::<f64>() / n;
    Ok((correct / n, loss))
}

fn check_task(circuit: &Circuit, task: &Task) -> Result<()> {
    if task.train.is_empty() || task.test.is_empty() {
        return Err(Error::invalid(format!("task {} has an empty split", task.name)));
    }
    if let Some(s) = task.train.iter().chain(&task.test).find(|s| s.state.n_qubits() != circuit.n_qubits()) {
        return Err(Error::invalid(format!(
            "task {} has {}-qubit inputs, circuit has {} qubits",
            task.name,
            s.state.n_qubits(),
            circuit.n_qubits()
        )));
    }
    Ok(())
}

/// Train on one task. After every epoch the curve records train and test
/// accuracy of `task` and test accuracy of each task in `monitored`.
#[allow(clippy::too_many_arguments)]
pub fn train_task(
    circuit: &Circuit,
    params: ParameterVector,
    task: &Task,
    config: &TrainConfig,
    anchors: &[EwcAnchor],
    monitored: &[&Task],
    phase: usize,
) -> Result<(ParameterVector, LearningCurve)> {
    config.validate()?;
    check_task(circuit, task)?;
    for m in monitored {
        check_task(circuit, m)?;
    }
    if params.len() != circuit.n_params() {
        return Err(Error::invalid(format!("expected {} parameters, got {}", circuit.n_params(), params.len())));
    }
    let clip = config.prob_clip_epsilon;
    let mut params = params;
    let mut adam = AdamState::new(params.len());
    let mut curve = LearningCurve::default();
    let mut order: Vec<usize> = (0..task.train.len()).collect();
    for epoch in 1..=config.epochs {
        SplitMix64::new(derive_seed(config.seed, &format!("shuffle/{phase}/{epoch}"))).shuffle(&mut order);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&EncodedSample> = chunk.iter().map(|&i| &task.train[i]).collect();
            let (_, grad) = loss_and_gradient(circuit, params.as_slice(), &batch, anchors, clip)?;
            adam_step(&mut adam, params.as_mut_slice(), &grad, config);
        }
        let mut record = |name: &str, split: Split, samples: &[EncodedSample]| -> Result<()> {
            let (accuracy, loss) = evaluate(circuit, &params, samples, clip)?;
            curve.entries.push(CurveEntry { phase, epoch, task: name.to_string(), split, accuracy, loss });
            Ok(())
        };
        record(&task.name, Split::Train, &task.train)?;
        record(&task.name, Split::Test, &task.test)?;
        for m in monitored {
            record(&m.name, Split::Test, &m.test)?;
        }
    }
    Ok((params, curve))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EwcSettings {
    pub enabled: bool,
    /// Strength for each task's anchor; a single value applies to all.
    pub lambdas: Vec<f64>,
    pub mode: FisherMode,
}

impl EwcSettings {
    pub fn off() -> Self {
        Self { enabled: false, lambdas: vec![0.0], mode: FisherMode::Diagonal }
    }

    pub fn diagonal(lambda: f64) -> Self {
        Self { enabled: true, lambdas: vec![lambda], mode: FisherMode::Diagonal }
    }

    pub fn full(lambda: f64) -> Self {
        Self { enabled: true, lambdas: vec![lambda], mode: FisherMode::Full }
    }

    pub fn lambda_for(&self, task_index: usize) -> f64 {
        match self.lambdas.len() {
            0 => 0.0,
            1 => self.lambdas[0],
            _ => self.lambdas[task_index],
        }
    }

    fn validate(&self, n_tasks: usize, n_params: usize) -> Result<()> {
        if !self.enabled {
            return Ok(());
        }
        if self.lambdas.len() > 1 && self.lambdas.len() < n_tasks.saturating_sub(1) {
            return Err(Error::invalid(format!(
                "{} EWC strengths given for {n_tasks} tasks",
                self.lambdas.len()
            )));
        }
        if self.lambdas.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(Error::invalid("EWC strengths must be finite and ≥ 0"));
        }
        if self.mode == FisherMode::Full && n_params > MAX_FULL_FISHER_PARAMS {
            return Err(Error::invalid(format!(
                "full Fisher matrix limited to {MAX_FULL_FISHER_PARAMS} parameters, model has {n_params}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ContinualOutcome {
    pub params: ParameterVector,
    pub curve: LearningCurve,
    pub anchors: Vec<EwcAnchor>,
}

/// Train `tasks` in order from a seeded random start. With EWC enabled,
/// each finished task except the last leaves an anchor built from its
/// training set that penalises all later phases. Every earlier task's test
/// accuracy is tracked in the curve whether or not EWC is on.
pub fn continual_run(circuit: &Circuit, tasks: &[Task], config: &TrainConfig, ewc: &EwcSettings) -> Result<ContinualOutcome> {
    if tasks.is_empty() {
        return Err(Error::invalid("continual run needs at least one task"));
    }
    for (i, t) in tasks.iter().enumerate() {
        if tasks[..i].iter().any(|o| o.name == t.name) {
            return Err(Error::invalid(format!("duplicate task name {}", t.name)));
        }
    }
    config.validate()?;
    ewc.validate(tasks.len(), circuit.n_params())?;
    let mut params = init_params(circuit.n_params(), derive_seed(config.seed, "init"));
    let mut curve = LearningCurve::default();
    let mut anchors = Vec::new();
    for (i, task) in tasks.iter().enumerate() {
        let monitored: Vec<&Task> = tasks[..i].iter().collect();
        let (trained, phase_curve) = train_task(circuit, params, task, config, &anchors, &monitored, i + 1)?;
        params = trained;
        curve.extend(phase_curve);
        if ewc.enabled && i + 1 < tasks.len() {
            let f = fisher(ewc.mode, circuit, &params, &task.train, config.prob_clip_epsilon)?;
            anchors.push(EwcAnchor::new(task.name.clone(), params.clone(), f, ewc.lambda_for(i), ewc.mode)?);
        }
    }
    Ok(ContinualOutcome { params, curve, anchors })
}
