//! `key=value` configuration files and the experiment description built
//! from them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::tasks::TaskSpec;
use crate::error::{Error, Result};
use crate::learn::{EwcSettings, FisherMode, TrainConfig};

/// Ordered `key=value` map. Blank lines and `#` comments are ignored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvConfig {
    values: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::at_line(source, i + 1, "expected `key=value`"));
            };
            let k = k.trim();
            if k.is_empty() || k.contains(char::is_whitespace) {
                return Err(Error::at_line(source, i + 1, format!("bad key {k:?}")));
            }
            if values.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::at_line(source, i + 1, format!("duplicate key {k}")));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| Error::invalid(format!("config key {key}: bad value {v:?}: {e}"))),
        }
    }

    pub fn to_text(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

/// Data set sizes and input locations shared by every task of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSettings {
    pub data_dir: PathBuf,
    pub mnist_images: Option<PathBuf>,
    pub mnist_labels: Option<PathBuf>,
    pub mnist_train_per_class: usize,
    pub mnist_test_per_class: usize,
    pub tof_train_per_class: usize,
    pub tof_test_per_class: usize,
    pub spt_train_per_class: usize,
    pub spt_test_per_class: usize,
}

impl DataSettings {
    pub fn from_kv(kv: &KvConfig, data_dir: PathBuf) -> Result<Self> {
        Ok(Self {
            data_dir,
            mnist_images: kv.get("mnist_images").map(PathBuf::from),
            mnist_labels: kv.get("mnist_labels").map(PathBuf::from),
            mnist_train_per_class: kv.parse_or("mnist_train_per_class", 400)?,
            mnist_test_per_class: kv.parse_or("mnist_test_per_class", 100)?,
            tof_train_per_class: kv.parse_or("tof_train_per_class", 500)?,
            tof_test_per_class: kv.parse_or("tof_test_per_class", 100)?,
            spt_train_per_class: kv.parse_or("spt_train_per_class", 200)?,
            spt_test_per_class: kv.parse_or("spt_test_per_class", 50)?,
        })
    }
}

pub fn train_config_from_kv(kv: &KvConfig) -> Result<TrainConfig> {
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        epochs: kv.parse_or("epochs", d.epochs)?,
        batch_size: kv.parse_or("batch_size", d.batch_size)?,
        learning_rate: kv.parse_or("learning_rate", d.learning_rate)?,
        adam_beta1: kv.parse_or("adam_beta1", d.adam_beta1)?,
        adam_beta2: kv.parse_or("adam_beta2", d.adam_beta2)?,
        adam_epsilon: kv.parse_or("adam_epsilon", d.adam_epsilon)?,
        seed: kv.parse_or("seed", d.seed)?,
        prob_clip_epsilon: kv.parse_or("prob_clip_epsilon", d.prob_clip_epsilon)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Default EWC strength for a Fisher mode.
pub fn default_lambda(mode: FisherMode) -> f64 {
    match mode {
        FisherMode::Diagonal => 10.0,
        FisherMode::Full => 1.0,
    }
}

/// One way of running a task sequence: without EWC or with a given Fisher
/// mode and strength. Written `off`, `diag`, `diag:30`, `full:300`, or with one
/// strength per anchor as `diag:100/300`.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub name: String,
    pub ewc: EwcSettings,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (mode, lambda) = match s.split_once(':') {
            Some((m, l)) => (m, Some(l)),
            None => (s, None),
        };
        if mode == "off" {
            if lambda.is_some() {
                return Err(Error::invalid(format!("variant {s:?}: `off` takes no strength")));
            }
            return Ok(Self { name: "off".into(), ewc: EwcSettings::off() });
        }
        let mode: FisherMode = mode.parse()?;
        let lambdas = match lambda {
            Some(l) => l
                .split('/')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::invalid(format!("variant {s:?}: bad strength: {e}")))?,
            None => vec![default_lambda(mode)],
        };
        let ewc = EwcSettings { enabled: true, lambdas, mode };
        Ok(Self { name: mode.as_str().to_string(), ewc })
    }
}

pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: Into<Error>,
{
    s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(|p| p.parse::<T>().map_err(Into::into)).collect()
}

/// A task sequence run under one or more variants.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub tasks: Vec<TaskSpec>,
    pub variants: Vec<Variant>,
}

/// Everything a `reproduce` run needs: shared settings and the experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureConfig {
    pub figure: String,
    pub n_layers: usize,
    pub train: TrainConfig,
    pub data: DataSettings,
    pub experiments: Vec<ExperimentConfig>,
}

impl FigureConfig {
    /// Reads `experiments=a,b` and for each name `a.tasks=…` and
    /// `a.variants=…`.
    pub fn from_kv(kv: &KvConfig, data_dir: PathBuf) -> Result<Self> {
        let figure = kv.get("figure").ok_or_else(|| Error::invalid("config lacks `figure`"))?.to_string();
        let names = kv.get("experiments").ok_or_else(|| Error::invalid("config lacks `experiments`"))?;
        let mut experiments = Vec::new();
        for name in names.split(',').map(str::trim).filter(|n| !n.is_empty()) {
            let key = |suffix: &str| format!("{name}.{suffix}");
            let tasks: Vec<TaskSpec> =
                parse_list(kv.get(&key("tasks")).ok_or_else(|| Error::invalid(format!("config lacks `{}`", key("tasks"))))?)?;
            let variants: Vec<Variant> = parse_list(kv.get(&key("variants")).unwrap_or("off"))?;
            if tasks.is_empty() || variants.is_empty() {
                return Err(Error::invalid(format!("experiment {name} needs tasks and variants")));
            }
            check_unique(tasks.iter().map(TaskSpec::name), "task")?;
            check_unique(variants.iter().map(|v| v.name.clone()), "variant")?;
            experiments.push(ExperimentConfig { name: name.to_string(), tasks, variants });
        }
        if experiments.is_empty() {
            return Err(Error::invalid("config lists no experiments"));
        }
        check_unique(experiments.iter().map(|e| e.name.clone()), "experiment")?;
        let known_prefixes: Vec<String> = experiments.iter().map(|e| format!("{}.", e.name)).collect();
        for k in kv.keys() {
            if k.contains('.') && !known_prefixes.iter().any(|p| k.starts_with(p.as_str())) {
                return Err(Error::invalid(format!("config key {k} names no listed experiment")));
            }
        }
        Ok(Self {
            figure,
            n_layers: kv.parse_or("n_layers", 10)?,
            train: train_config_from_kv(kv)?,
            data: DataSettings::from_kv(kv, data_dir)?,
            experiments,
        })
    }
}

fn check_unique(names: impl Iterator<Item = String>, what: &str) -> Result<()> {
    let mut seen: Vec<String> = Vec::new();
    for n in names {
        if seen.contains(&n) {
            return Err(Error::invalid(format!("duplicate {what} name {n}")));
        }
        seen.push(n);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_parse() {
        let kv = KvConfig::parse("# c\nseed = 3\n\nepochs=2\n", "x").unwrap();
        assert_eq!(kv.get("seed"), Some("3"));
        assert_eq!(train_config_from_kv(&kv).unwrap().epochs, 2);
        let err = KvConfig::parse("a=1\nbogus\n", "f.conf").unwrap_err();
        assert!(err.to_string().contains("f.conf:2"));
        assert!(KvConfig::parse("a=1\na=2\n", "x").is_err());
        assert!(train_config_from_kv(&KvConfig::parse("epochs=0", "x").unwrap()).is_err());
    }

    #[test]
    fn variants() {
        let v: Vec<Variant> = parse_list("off, diag, full:300").unwrap();
        assert!(!v[0].ewc.enabled);
        assert_eq!(v[1].ewc.lambdas, vec![10.0]);
        assert_eq!(v[2].ewc.mode, FisherMode::Full);
        assert_eq!(v[2].ewc.lambdas, vec![300.0]);
        assert_eq!("diag:100/300".parse::<Variant>().unwrap().ewc.lambdas, vec![100.0, 300.0]);
        assert!("diag:100/x".parse::<Variant>().is_err());
        assert!("off:3".parse::<Variant>().is_err());
        assert!("l2".parse::<Variant>().is_err());
    }

    #[test]
    fn figure_config() {
        let kv = KvConfig::parse(
            "figure=f\nexperiments=a\na.tasks=tof,mnist-pair:0:9\na.variants=off,diag:30\nepochs=3\n",
            "x",
        )
        .unwrap();
        let f = FigureConfig::from_kv(&kv, PathBuf::from("d")).unwrap();
        assert_eq!(f.experiments[0].tasks.len(), 2);
        assert_eq!(f.train.epochs, 3);
        let bad = KvConfig::parse("figure=f\nexperiments=a\na.tasks=tof\nb.tasks=spt\n", "x").unwrap();
        assert!(FigureConfig::from_kv(&bad, PathBuf::from("d")).is_err());
    }
}
