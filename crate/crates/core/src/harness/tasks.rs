use std::cell::OnceCell;
use std::env;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::config::DataSettings;
use crate::data::{load_mnist_idx, permute_pixels, read_dataset, select_pair, Dataset, RawImageSet};
use crate::error::{Error, Result};
use crate::physics::{gen_spt_dataset, gen_tof_dataset, SptSampling, TofSampling};
use crate::rng::derive_seed;

pub const DATA_DIR_ENV: &str = "QONTINUAL_DATA_DIR";

/// `QONTINUAL_DATA_DIR` if set, otherwise the `data/` directory of this
/// source tree.
pub fn default_data_dir() -> PathBuf {
    match env::var_os(DATA_DIR_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"),
    }
}

const IMAGE_CANDIDATES: [&str; 3] = ["train-images-idx3-ubyte.gz", "train-images-idx3-ubyte", "mnist5k-images-idx3-ubyte.gz"];
const LABEL_CANDIDATES: [&str; 3] = ["train-labels-idx1-ubyte.gz", "train-labels-idx1-ubyte", "mnist5k-labels-idx1-ubyte.gz"];

fn find_idx(dir: &Path, candidates: &[&str]) -> PathBuf {
    let base = dir.join("mnist");
    candidates.iter().map(|c| base.join(c)).find(|p| p.exists()).unwrap_or_else(|| base.join(candidates[0]))
}

/// MNIST IDX paths: explicit settings first, else the first file found
/// under `<data_dir>/mnist/`.
pub fn mnist_paths(settings: &DataSettings) -> (PathBuf, PathBuf) {
    let images = settings.mnist_images.clone().unwrap_or_else(|| find_idx(&settings.data_dir, &IMAGE_CANDIDATES));
    let labels = settings.mnist_labels.clone().unwrap_or_else(|| find_idx(&settings.data_dir, &LABEL_CANDIDATES));
    (images, labels)
}

/// A task as written in configs and on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskSpec {
    /// `mnist-pair:A:B`
    MnistPair { a: u8, b: u8 },
    /// `mnist-permuted:A:B`, the same selection with pixels permuted.
    MnistPermuted { a: u8, b: u8 },
    Tof,
    Spt,
    /// `cache:NAME`, a dataset previously written by `gen-data`.
    Cached(String),
}

impl TaskSpec {
    pub fn name(&self) -> String {
        match self {
            TaskSpec::MnistPair { a, b } => format!("mnist_{a}_{b}"),
            TaskSpec::MnistPermuted { a, b } => format!("mnist_{a}_{b}_perm"),
            TaskSpec::Tof => "tof".into(),
            TaskSpec::Spt => "spt".into(),
            TaskSpec::Cached(n) => n.clone(),
        }
    }
}

fn parse_pair(s: &str, rest: &[&str]) -> Result<(u8, u8)> {
    let digit = |d: &str| -> Result<u8> {
        match d.parse::<u8>() {
            Ok(v) if v <= 9 => Ok(v),
            _ => Err(Error::invalid(format!("task {s:?}: bad digit {d:?}"))),
        }
    };
    match rest {
        [a, b] => {
            let (a, b) = (digit(a)?, digit(b)?);
            if a == b {
                return Err(Error::invalid(format!("task {s:?}: digits must differ")));
            }
            Ok((a, b))
        }
        _ => Err(Error::invalid(format!("task {s:?}: expected <kind>:<digit>:<digit>"))),
    }
}

impl FromStr for TaskSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts[0] {
            "mnist-pair" => parse_pair(s, &parts[1..]).map(|(a, b)| TaskSpec::MnistPair { a, b }),
            "mnist-permuted" => parse_pair(s, &parts[1..]).map(|(a, b)| TaskSpec::MnistPermuted { a, b }),
            "tof" if parts.len() == 1 => Ok(TaskSpec::Tof),
            "spt" if parts.len() == 1 => Ok(TaskSpec::Spt),
            "cache" if parts.len() == 2 && !parts[1].is_empty() => Ok(TaskSpec::Cached(parts[1].to_string())),
            _ => Err(Error::invalid(format!(
                "unknown task {s:?} (expected mnist-pair:A:B, mnist-permuted:A:B, tof, spt or cache:NAME)"
            ))),
        }
    }
}

/// Builds datasets for task specs, loading the MNIST files at most once.
pub struct DataContext {
    pub settings: DataSettings,
    pub seed: u64,
    mnist: OnceCell<RawImageSet>,
}

impl DataContext {
    pub fn new(settings: DataSettings, seed: u64) -> Self {
        Self { settings, seed, mnist: OnceCell::new() }
    }

    pub fn mnist(&self) -> Result<&RawImageSet> {
        if let Some(raw) = self.mnist.get() {
            return Ok(raw);
        }
        let (images, labels) = mnist_paths(&self.settings);
        let raw = load_mnist_idx(&images, &labels)?;
        Ok(self.mnist.get_or_init(|| raw))
    }

    pub fn tof_sampling(&self) -> TofSampling {
        TofSampling {
            n_train_per_class: self.settings.tof_train_per_class,
            n_test_per_class: self.settings.tof_test_per_class,
            ..TofSampling::default()
        }
    }

    pub fn spt_sampling(&self) -> SptSampling {
        SptSampling {
            n_train_per_class: self.settings.spt_train_per_class,
            n_test_per_class: self.settings.spt_test_per_class,
            ..SptSampling::default()
        }
    }

    pub fn mnist_pair(&self, a: u8, b: u8) -> Result<Dataset> {
        let s = &self.settings;
        select_pair(self.mnist()?, a, b, s.mnist_train_per_class, s.mnist_test_per_class, derive_seed(self.seed, "data/mnist"))
    }

    pub fn build(&self, spec: &TaskSpec) -> Result<Dataset> {
        match spec {
            TaskSpec::MnistPair { a, b } => self.mnist_pair(*a, *b),
            TaskSpec::MnistPermuted { a, b } => {
                permute_pixels(&self.mnist_pair(*a, *b)?, derive_seed(self.seed, "data/permutation"))
            }
            TaskSpec::Tof => gen_tof_dataset(&self.tof_sampling(), derive_seed(self.seed, "data/tof")),
            TaskSpec::Spt => gen_spt_dataset(&self.spt_sampling(), derive_seed(self.seed, "data/spt")),
            TaskSpec::Cached(name) => read_dataset(&self.settings.data_dir, name),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_specs() {
        assert_eq!("mnist-pair:0:9".parse::<TaskSpec>().unwrap(), TaskSpec::MnistPair { a: 0, b: 9 });
        assert_eq!("mnist-permuted:2:8".parse::<TaskSpec>().unwrap().name(), "mnist_2_8_perm");
        assert_eq!("cache:foo".parse::<TaskSpec>().unwrap().name(), "foo");
        for bad in ["mnist-pair:3:3", "mnist-pair:1", "mnist-pair:1:10", "tof:1", "cache:", "cifar"] {
            assert!(bad.parse::<TaskSpec>().is_err(), "{bad}");
        }
    }
}
