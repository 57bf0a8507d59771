use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const CURVE_HEADER: &str = "phase,epoch,task,split,accuracy,loss";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveEntry {
    /// 1-based index of the task being trained.
    pub phase: usize,
    /// 1-based epoch within the phase.
    pub epoch: usize,
    pub task: String,
    pub split: Split,
    pub accuracy: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LearningCurve {
    pub entries: Vec<CurveEntry>,
}

impl LearningCurve {
    pub fn extend(&mut self, other: LearningCurve) {
        self.entries.extend(other.entries);
    }

    /// Accuracy on `task`/`split` at the last recorded epoch.
    pub fn final_accuracy(&self, task: &str, split: Split) -> Option<f64> {
        self.entries.iter().rev().find(|e| e.task == task && e.split == split).map(|e| e.accuracy)
    }

    /// Highest accuracy for `task`/`split` within a phase.
    pub fn peak_accuracy(&self, phase: usize, task: &str, split: Split) -> Option<f64> {
        self.entries
            .iter()
            .filter(|e| e.phase == phase && e.task == task && e.split == split)
            .map(|e| e.accuracy)
            .fold(None, |m, a| Some(m.map_or(a, |m: f64| m.max(a))))
    }

    /// Accuracy at the end of `phase`.
    pub fn phase_final_accuracy(&self, phase: usize, task: &str, split: Split) -> Option<f64> {
        self.entries
            .iter()
            .rev()
            .find(|e| e.phase == phase && e.task == task && e.split == split)
            .map(|e| e.accuracy)
    }

    /// Task names in order of first appearance.
    pub fn tasks(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.task) {
                out.push(e.task.clone());
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CURVE_HEADER);
        out.push('\n');
        for e in &self.entries {
            writeln!(out, "{},{},{},{},{},{}", e.phase, e.epoch, e.task, e.split.as_str(), e.accuracy, e.loss).unwrap();
        }
        out
    }

    /// Parse a curve CSV; errors name the offending line.
    pub fn from_csv(text: &str, source: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim_end() == CURVE_HEADER => {}
            _ => return Err(Error::at_line(source, 1, format!("expected header `{CURVE_HEADER}`"))),
        }
        let mut entries = Vec::new();
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |msg: String| Error::at_line(source, lineno, msg);
            let f: Vec<&str> = line.trim_end().split(',').collect();
            if f.len() != 6 {
                return Err(bad(format!("expected 6 fields, found {}", f.len())));
            }
            let int = |s: &str| s.parse::<usize>().map_err(|e| bad(format!("bad integer {s:?}: {e}")));
            let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("bad number {s:?}: {e}")));
            let split = match f[3] {
                "train" => Split::Train,
                "test" => Split::Test,
                other => return Err(bad(format!("unknown split {other:?}"))),
            };
            let accuracy = num(f[4])?;
            if !(0.0..=1.0).contains(&accuracy) {
                return Err(bad(format!("accuracy {accuracy} outside [0, 1]")));
            }
            if f[2].is_empty() {
                return Err(bad("empty task name".into()));
            }
            entries.push(CurveEntry {
                phase: int(f[0])?,
                epoch: int(f[1])?,
                task: f[2].to_string(),
                split,
                accuracy,
                loss: num(f[5])?,
            });
        }
        if entries.is_empty() {
            return Err(Error::at_line(source, 2, "curve has no data rows"));
        }
        Ok(Self { entries })
    }
}
