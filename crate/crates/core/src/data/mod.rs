//! Labelled binary-classification datasets and their quantum encoding.

pub mod cache;
pub mod idx;
pub mod image;

use num_complex::Complex64;

pub use self::cache::{read_dataset, write_dataset};
pub use self::idx::{load_mnist_idx, RawImage, RawImageSet};
pub use self::image::downsample_16;

use crate::error::{Error, Result};
use crate::qsim::StateVector;
use crate::rng::{derive_seed, SplitMix64};

/// Default per-class split sizes for MNIST digit pairs.
pub const DEFAULT_TRAIN_PER_CLASS: usize = 1000;
pub const DEFAULT_TEST_PER_CLASS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum SampleInput {
    /// Nonnegative intensities, amplitude-encoded on use.
    Features(Vec<f64>),
    /// A quantum state fed to the circuit as is.
    State(StateVector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub input: SampleInput,
    pub label: u8,
}

impl LabeledSample {
    pub fn features(features: Vec<f64>, label: u8) -> Self {
        Self { input: SampleInput::Features(features), label }
    }

    pub fn state(state: StateVector, label: u8) -> Self {
        Self { input: SampleInput::State(state), label }
    }

    pub fn encode(&self) -> Result<EncodedSample> {
        let state = match &self.input {
            SampleInput::Features(f) => amplitude_encode(f)?,
            SampleInput::State(s) => s.clone(),
        };
        Ok(EncodedSample { state, label: self.label })
    }

    /// Qubit count of the circuit input this sample becomes.
    pub fn n_qubits(&self) -> usize {
        match &self.input {
            SampleInput::Features(f) => f.len().trailing_zeros() as usize,
            SampleInput::State(s) => s.n_qubits(),
        }
    }
}

/// A sample ready for the circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSample {
    pub state: StateVector,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub train: Vec<LabeledSample>,
    pub test: Vec<LabeledSample>,
    pub seed: u64,
    /// Ordered `key=value` audit trail of how the dataset was produced.
    pub provenance: Vec<(String, String)>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, train: Vec<LabeledSample>, test: Vec<LabeledSample>, seed: u64) -> Result<Self> {
        let ds = Self { name: name.into(), train, test, seed, provenance: Vec::new() };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.chars().any(|c| c.is_whitespace() || c == ',') {
            return Err(Error::invalid(format!("dataset name {:?} must be non-empty without whitespace or commas", self.name)));
        }
        for (split, samples) in [("train", &self.train), ("test", &self.test)] {
            for label in [0, 1] {
                if !samples.iter().any(|s| s.label == label) {
                    return Err(Error::invalid(format!("{} {split} split has no samples of class {label}", self.name)));
                }
            }
            if let Some(s) = samples.iter().find(|s| s.label > 1) {
                return Err(Error::invalid(format!("label {} is not binary", s.label)));
            }
        }
        let n = self.train[0].n_qubits();
        if self.train.iter().chain(&self.test).any(|s| s.n_qubits() != n) {
            return Err(Error::invalid(format!("{}: samples disagree on input width", self.name)));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.train[0].n_qubits()
    }

    pub fn is_feature_based(&self) -> bool {
        self.train.iter().chain(&self.test).all(|s| matches!(s.input, SampleInput::Features(_)))
    }

    pub fn encode_train(&self) -> Result<Vec<EncodedSample>> {
        self.train.iter().map(LabeledSample::encode).collect()
    }

    pub fn encode_test(&self) -> Result<Vec<EncodedSample>> {
        self.test.iter().map(LabeledSample::encode).collect()
    }
}

/// `|ψ⟩ = Σ_k f_k/‖f‖ |k⟩` for a nonnegative, nonzero vector whose length
/// is a power of two.
pub fn amplitude_encode(features: &[f64]) -> Result<StateVector> {
    if features.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid("features must be finite and nonnegative"));
    }
    let max = features.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(Error::invalid("cannot encode an all-zero feature vector"));
    }
    // Scaling by the maximum first keeps the norm free of overflow.
    let scaled: Vec<f64> = features.iter().map(|v| v / max).collect();
    let norm = scaled.iter().map(|v| v * v).sum::<f64>().sqrt();
    StateVector::from_amplitudes(scaled.into_iter().map(|v| Complex64::new(v / norm, 0.0)).collect())
}

/// Digit-pair task: class 0 is `digit_a`, class 1 is `digit_b`, features are
/// the 16×16 row-major reductions of the 28×28 images.
pub fn select_pair(
    raw: &RawImageSet,
    digit_a: u8,
    digit_b: u8,
    n_train_per_class: usize,
    n_test_per_class: usize,
    seed: u64,
) -> Result<Dataset> {
    if digit_a == digit_b {
        return Err(Error::invalid(format!("digit pair needs two distinct digits, got {digit_a} twice")));
    }
    if digit_a > 9 || digit_b > 9 {
        return Err(Error::invalid("digits must be in 0..=9"));
    }
    if n_train_per_class == 0 || n_test_per_class == 0 {
        return Err(Error::invalid("split sizes must be positive"));
    }
    if (raw.rows, raw.cols) != (image::MNIST_SIDE, image::MNIST_SIDE) {
        return Err(Error::invalid(format!("expected 28×28 images, got {}×{}", raw.rows, raw.cols)));
    }
    let need = n_train_per_class + n_test_per_class;
    let mut train = Vec::with_capacity(2 * n_train_per_class);
    let mut test = Vec::with_capacity(2 * n_test_per_class);
    for (label, digit) in [(0u8, digit_a), (1u8, digit_b)] {
        let mut idx: Vec<usize> =
            raw.images.iter().enumerate().filter(|(_, im)| im.label == digit).map(|(i, _)| i).collect();
        if idx.len() < need {
            return Err(Error::invalid(format!(
                "digit {digit}: need {need} images, only {} available",
                idx.len()
            )));
        }
        SplitMix64::new(derive_seed(seed, &format!("select/{digit}"))).shuffle(&mut idx);
        for (k, &i) in idx[..need].iter().enumerate() {
            let pixels: Vec<f64> = raw.images[i].pixels.iter().map(|&p| p as f64).collect();
            let features = downsample_16(&pixels)?;
            if !features.iter().any(|&v| v > 0.0) {
                return Err(Error::invalid(format!("image {i} reduces to an all-zero image")));
            }
            let sample = LabeledSample::features(features, label);
            if k < n_train_per_class {
                train.push(sample);
            } else {
                test.push(sample);
            }
        }
    }
    let mut rng = SplitMix64::new(derive_seed(seed, "select/order"));
    rng.shuffle(&mut train);
    rng.shuffle(&mut test);
    let mut ds = Dataset::new(format!("mnist_{digit_a}_{digit_b}"), train, test, seed)?;
    ds.provenance = vec![
        ("kind".into(), "mnist-pair".into()),
        ("digit_a".into(), digit_a.to_string()),
        ("digit_b".into(), digit_b.to_string()),
        ("n_train_per_class".into(), n_train_per_class.to_string()),
        ("n_test_per_class".into(), n_test_per_class.to_string()),
        ("seed".into(), seed.to_string()),
    ];
    Ok(ds)
}

/// Uniform permutation of `0..len` drawn from `seed`.
pub fn pixel_permutation(len: usize, seed: u64) -> Vec<usize> {
    SplitMix64::new(derive_seed(seed, "permute")).permutation(len)
}

pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// Rearrange every sample so that `new[k] = old[perm[k]]`.
pub fn apply_permutation(dataset: &Dataset, perm: &[usize]) -> Result<Dataset> {
    let permute = |s: &LabeledSample| match &s.input {
        SampleInput::Features(f) if f.len() == perm.len() => {
            Ok(LabeledSample::features(perm.iter().map(|&p| f[p]).collect(), s.label))
        }
        SampleInput::Features(f) => {
            Err(Error::invalid(format!("permutation of length {} applied to {} features", perm.len(), f.len())))
        }
        SampleInput::State(_) => Err(Error::invalid("pixel permutation needs a feature-based dataset")),
    };
    Ok(Dataset {
        name: dataset.name.clone(),
        train: dataset.train.iter().map(permute).collect::<Result<_>>()?,
        test: dataset.test.iter().map(permute).collect::<Result<_>>()?,
        seed: dataset.seed,
        provenance: dataset.provenance.clone(),
    })
}

/// The same task behind one fixed pixel shuffle shared by all samples.
pub fn permute_pixels(dataset: &Dataset, seed: u64) -> Result<Dataset> {
    if !dataset.is_feature_based() {
        return Err(Error::invalid("pixel permutation needs a feature-based dataset"));
    }
    let width = match &dataset.train[0].input {
        SampleInput::Features(f) => f.len(),
        SampleInput::State(_) => unreachable!(),
    };
    let mut out = apply_permutation(dataset, &pixel_permutation(width, seed))?;
    out.name = format!("{}_perm", dataset.name);
    out.provenance.push(("permutation_seed".into(), seed.to_string()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_raw(per_digit: usize) -> RawImageSet {
        let mut images = Vec::new();
        for digit in 0..10u8 {
            for k in 0..per_digit {
                let pixels = (0..784).map(|i| ((i * (digit as usize + 3) + k * 7) % 256) as u8).collect();
                images.push(RawImage { pixels, label: digit });
            }
        }
        RawImageSet { rows: 28, cols: 28, images }
    }

    #[test]
    fn encode_basis_and_uniform() {
        let mut e0 = vec![0.0; 256];
        e0[0] = 1.0;
        assert_eq!(amplitude_encode(&e0).unwrap(), StateVector::zero(8).unwrap());
        let s = amplitude_encode(&[1.0; 256]).unwrap();
        assert!(s.amplitudes().iter().all(|a| (a.re - 1.0 / 16.0).abs() < 1e-15 && a.im == 0.0));
    }

    #[test]
    fn encode_rejects_bad_vectors() {
        assert!(amplitude_encode(&[0.0; 256]).is_err());
        let mut v = vec![1.0; 256];
        v[3] = -0.5;
        assert!(amplitude_encode(&v).is_err());
        assert!(amplitude_encode(&[1.0; 255]).is_err());
    }

    #[test]
    fn pair_selection_is_deterministic() {
        let raw = synthetic_raw(30);
        let a = select_pair(&raw, 0, 9, 20, 5, 7).unwrap();
        let b = select_pair(&raw, 0, 9, 20, 5, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.train.len(), 40);
        assert_eq!(a.test.len(), 10);
        assert!(a.train.iter().chain(&a.test).all(|s| matches!(&s.input, SampleInput::Features(f) if f.len() == 256)));
        assert_ne!(a, select_pair(&raw, 0, 9, 20, 5, 8).unwrap());
    }

    #[test]
    fn pair_selection_errors() {
        let raw = synthetic_raw(10);
        assert!(select_pair(&raw, 3, 3, 2, 2, 1).is_err());
        assert!(select_pair(&raw, 0, 9, 9, 2, 1).is_err());
    }

    #[test]
    fn permutation_round_trip() {
        let raw = synthetic_raw(12);
        let ds = select_pair(&raw, 2, 8, 8, 4, 3).unwrap();
        let perm = pixel_permutation(256, 99);
        let permuted = apply_permutation(&ds, &perm).unwrap();
        let back = apply_permutation(&permuted, &inverse_permutation(&perm)).unwrap();
        assert_eq!(back.train, ds.train);
        assert_eq!(back.test, ds.test);
        assert_eq!(permute_pixels(&ds, 5).unwrap(), permute_pixels(&ds, 5).unwrap());
        for (a, b) in ds.train.iter().zip(&permute_pixels(&ds, 5).unwrap().train) {
            assert_eq!(a.label, b.label);
            let (SampleInput::Features(x), SampleInput::Features(y)) = (&a.input, &b.input) else { panic!() };
            let mut x = x.clone();
            let mut y = y.clone();
            x.sort_by(f64::total_cmp);
            y.sort_by(f64::total_cmp);
            assert_eq!(x, y);
        }
    }

    #[test]
    fn permute_rejects_state_datasets() {
        let s = |l| LabeledSample::state(StateVector::zero(2).unwrap(), l);
        let ds = Dataset::new("q", vec![s(0), s(1)], vec![s(0), s(1)], 0).unwrap();
        assert!(permute_pixels(&ds, 1).is_err());
    }

    #[test]
    fn dataset_needs_both_classes() {
        let f = |l| LabeledSample::features(vec![1.0; 4], l);
        assert!(Dataset::new("x", vec![f(0), f(0)], vec![f(0), f(1)], 0).is_err());
        assert!(Dataset::new("x", vec![f(0), f(1)], vec![f(1)], 0).is_err());
        assert!(Dataset::new("bad name", vec![f(0), f(1)], vec![f(0), f(1)], 0).is_err());
    }
}
