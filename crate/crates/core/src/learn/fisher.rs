use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::loss::sample_loss_gradient;
use crate::ansatz::{Circuit, ParameterVector};
use crate::data::EncodedSample;
use crate::error::{Error, Result};

/// Largest parameter count for which a dense Fisher matrix is built.
pub const MAX_FULL_FISHER_PARAMS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FisherMode {
    Diagonal,
    Full,
}

impl FisherMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FisherMode::Diagonal => "diag",
            FisherMode::Full => "full",
        }
    }
}

impl std::str::FromStr for FisherMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diag" | "diagonal" => Ok(FisherMode::Diagonal),
            "full" => Ok(FisherMode::Full),
            other => Err(Error::invalid(format!("unknown Fisher mode {other:?} (expected diag or full)"))),
        }
    }
}

/// Empirical Fisher information of the classifier's log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherInfo {
    pub diagonal: Vec<f64>,
    pub full: Option<DMatrix<f64>>,
}

impl FisherInfo {
    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }
}

/// An earlier task's optimum with its penalty weights.
#[derive(Debug, Clone, PartialEq)]
pub struct EwcAnchor {
    pub task_name: String,
    pub theta_star: ParameterVector,
    pub fisher: FisherInfo,
    pub lambda: f64,
    pub mode: FisherMode,
}

impl EwcAnchor {
    pub fn new(
        task_name: impl Into<String>,
        theta_star: ParameterVector,
        fisher: FisherInfo,
        lambda: f64,
        mode: FisherMode,
    ) -> Result<Self> {
        let a = Self { task_name: task_name.into(), theta_star, fisher, lambda, mode };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("EWC strength must be finite and ≥ 0, got {}", self.lambda)));
        }
        let n = self.theta_star.len();
        if self.fisher.diagonal.len() != n {
            return Err(Error::invalid(format!(
                "anchor {}: θ* has {n} entries but the Fisher diagonal has {}",
                self.task_name,
                self.fisher.diagonal.len()
            )));
        }
        if self.fisher.diagonal.iter().any(|f| !(*f >= 0.0)) {
            return Err(Error::invalid("Fisher diagonal entries must be nonnegative"));
        }
        match (&self.mode, &self.fisher.full) {
            (FisherMode::Full, None) => Err(Error::invalid("full-mode anchor needs a full Fisher matrix")),
            (FisherMode::Full, Some(m)) if m.nrows() != n || m.ncols() != n => {
                Err(Error::invalid("full Fisher matrix has the wrong shape"))
            }
            _ => Ok(()),
        }
    }

    fn delta(&self, params: &[f64]) -> Vec<f64> {
        params.iter().zip(self.theta_star.as_slice()).map(|(a, b)| a - b).collect()
    }

    /// `Σ Fᵢ dᵢ²` or `dᵀ F d` with `d = θ − θ*` (without λ).
    pub fn penalty(&self, params: &[f64]) -> f64 {
        let d = self.delta(params);
        match self.mode {
            FisherMode::Diagonal => d.iter().zip(&self.fisher.diagonal).map(|(d, f)| f * d * d).sum(),
            FisherMode::Full => {
                let m = self.fisher.full.as_ref().expect("validated");
                let d = DVector::from_vec(d);
                d.dot(&(m * &d))
            }
        }
    }

    /// Gradient of [`penalty`](Self::penalty).
    pub fn penalty_gradient(&self, params: &[f64]) -> Vec<f64> {
        let d = self.delta(params);
        match self.mode {
            FisherMode::Diagonal => d.iter().zip(&self.fisher.diagonal).map(|(d, f)| 2.0 * f * d).collect(),
            FisherMode::Full => {
                let m = self.fisher.full.as_ref().expect("validated");
                (m * DVector::from_vec(d)).iter().map(|v| 2.0 * v).collect()
            }
        }
    }
}

/// Per-sample gradients of `log p(y|x;θ)`, in sample order.
fn log_likelihood_gradients(
    circuit: &Circuit,
    params: &[f64],
    samples: &[EncodedSample],
    clip: f64,
) -> Result<Vec<Vec<f64>>> {
    if samples.is_empty() {
        return Err(Error::invalid("Fisher information needs at least one sample"));
    }
    samples
        .par_iter()
        .map(|s| {
            let (_, g) = sample_loss_gradient(circuit, params, s, clip)?;
            Ok(g.into_iter().map(|v| -v).collect())
        })
        .collect()
}

fn mean_squares(grads: &[Vec<f64>], n_params: usize) -> Vec<f64> {
    let mut diag = vec![0.0; n_params];
    for g in grads {
        for (d, v) in diag.iter_mut().zip(g) {
            *d += v * v;
        }
    }
    let n = grads.len() as f64;
    diag.iter_mut().for_each(|d| *d /= n);
    diag
}

/// `Fᵢ = (1/N) Σ (∂ᵢ log p(y|x;θ))²` over the labelled samples.
pub fn fisher_diagonal(circuit: &Circuit, params: &[f64], samples: &[EncodedSample], clip: f64) -> Result<FisherInfo> {
    let grads = log_likelihood_gradients(circuit, params, samples, clip)?;
    Ok(FisherInfo { diagonal: mean_squares(&grads, params.len()), full: None })
}

/// `F = (1/N) Σ g gᵀ`; the diagonal is accumulated exactly as in
/// [`fisher_diagonal`].
pub fn fisher_full(circuit: &Circuit, params: &[f64], samples: &[EncodedSample], clip: f64) -> Result<FisherInfo> {
    let n = params.len();
    if n > MAX_FULL_FISHER_PARAMS {
        return Err(Error::invalid(format!(
            "full Fisher matrix limited to {MAX_FULL_FISHER_PARAMS} parameters, model has {n}"
        )));
    }
    let grads = log_likelihood_gradients(circuit, params, samples, clip)?;
    let mut full = DMatrix::<f64>::zeros(n, n);
    for g in &grads {
        let v = DVector::from_column_slice(g);
        full.ger(1.0, &v, &v, 1.0);
    }
    full /= grads.len() as f64;
    let diagonal = mean_squares(&grads, n);
    for (i, d) in diagonal.iter().enumerate() {
        full[(i, i)] = *d;
    }
    Ok(FisherInfo { diagonal, full: Some(full) })
}

pub fn fisher(
    mode: FisherMode,
    circuit: &Circuit,
    params: &ParameterVector,
    samples: &[EncodedSample],
    clip: f64,
) -> Result<FisherInfo> {
    match mode {
        FisherMode::Diagonal => fisher_diagonal(circuit, params.as_slice(), samples, clip),
        FisherMode::Full => fisher_full(circuit, params.as_slice(), samples, clip),
    }
}
