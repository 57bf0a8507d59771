use rayon::prelude::*;

use super::fisher::EwcAnchor;
use crate::ansatz::Circuit;
use crate::data::EncodedSample;
use crate::error::{Error, Result};

/// Binary cross-entropy of the class-1 probability, with `p₁` clamped to
/// `[clip, 1 − clip]`.
pub fn bce_loss(p1: f64, label: u8, clip: f64) -> f64 {
    let p = p1.clamp(clip, 1.0 - clip);
    if label == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// `∂ bce / ∂p₁`; zero where the clamp is active.
pub fn bce_derivative(p1: f64, label: u8, clip: f64) -> f64 {
    if p1 < clip || p1 > 1.0 - clip {
        return 0.0;
    }
    if label == 1 {
        -1.0 / p1
    } else {
        1.0 / (1.0 - p1)
    }
}

/// Loss of one sample and its parameter gradient.
pub fn sample_loss_gradient(circuit: &Circuit, params: &[f64], s: &EncodedSample, clip: f64) -> Result<(f64, Vec<f64>)> {
    let (p1, mut grad) = circuit.forward_with_gradient(params, &s.state)?;
    let dl = bce_derivative(p1, s.label, clip);
    grad.iter_mut().for_each(|g| *g *= dl);
    Ok((bce_loss(p1, s.label, clip), grad))
}

fn check_anchors(params: &[f64], anchors: &[EwcAnchor]) -> Result<()> {
    for a in anchors {
        if a.theta_star.len() != params.len() {
            return Err(Error::invalid(format!(
                "anchor {} has {} parameters, model has {}",
                a.task_name,
                a.theta_star.len(),
                params.len()
            )));
        }
    }
    Ok(())
}

/// `Σ_t λ_t · penalty_t(θ)`.
pub fn ewc_penalty(params: &[f64], anchors: &[EwcAnchor]) -> Result<f64> {
    check_anchors(params, anchors)?;
    Ok(anchors.iter().filter(|a| a.lambda != 0.0).map(|a| a.lambda * a.penalty(params)).sum())
}

fn add_penalty_gradient(params: &[f64], anchors: &[EwcAnchor], grad: &mut [f64]) {
    for a in anchors.iter().filter(|a| a.lambda != 0.0) {
        for (g, p) in grad.iter_mut().zip(a.penalty_gradient(params)) {
            *g += a.lambda * p;
        }
    }
}

/// Mean BCE over the batch plus every anchor's penalty, and the gradient.
/// Per-sample work runs in parallel; the reduction is in sample order.
pub fn loss_and_gradient(
    circuit: &Circuit,
    params: &[f64],
    batch: &[&EncodedSample],
    anchors: &[EwcAnchor],
    clip: f64,
) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    check_anchors(params, anchors)?;
    let per_sample: Vec<(f64, Vec<f64>)> = batch
        .par_iter()
        .map(|s| sample_loss_gradient(circuit, params, s, clip))
        .collect::<Result<_>>()?;
    let n = batch.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; params.len()];
    for (l, g) in &per_sample {
        loss += l;
        for (acc, v) in grad.iter_mut().zip(g) {
            *acc += v;
        }
    }
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    loss += ewc_penalty(params, anchors)?;
    add_penalty_gradient(params, anchors, &mut grad);
    Ok((loss, grad))
}

pub fn total_loss(circuit: &Circuit, params: &[f64], batch: &[EncodedSample], anchors: &[EwcAnchor], clip: f64) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    check_anchors(params, anchors)?;
    let losses: Vec<f64> = batch
        .par_iter()
        .map(|s| circuit.forward(params, &s.state).map(|p| bce_loss(p, s.label, clip)))
        .collect::<Result<_>>()?;
    Ok(losses.iter().sum::<f64>() / batch.len() as f64 + ewc_penalty(params, anchors)?)
}

pub fn loss_gradient(
    circuit: &Circuit,
    params: &[f64],
    batch: &[EncodedSample],
    anchors: &[EwcAnchor],
    clip: f64,
) -> Result<Vec<f64>> {
    let refs: Vec<&EncodedSample> = batch.iter().collect();
    loss_and_gradient(circuit, params, &refs, anchors, clip).map(|(_, g)| g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::ParameterVector;
    use crate::learn::fisher::{FisherInfo, FisherMode};
    use crate::qsim::{Gate, StateVector};

    const CLIP: f64 = 1e-7;

    fn one_param_anchor(lambda: f64, f: f64, theta_star: f64) -> EwcAnchor {
        EwcAnchor::new(
            "a",
            ParameterVector::new(vec![theta_star]),
            FisherInfo { diagonal: vec![f], full: None },
            lambda,
            FisherMode::Diagonal,
        )
        .unwrap()
    }

    fn rx_circuit() -> Circuit {
        Circuit::new(1, 1, 0, vec![Gate::rx(0, 0)]).unwrap()
    }

    fn zero_sample(label: u8) -> EncodedSample {
        EncodedSample { state: StateVector::zero(1).unwrap(), label }
    }

    #[test]
    fn bce_values() {
        assert!((bce_loss(0.5, 0, CLIP) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((bce_loss(0.5, 1, CLIP) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((bce_loss(1.0 - CLIP, 1, CLIP) - CLIP).abs() < 1e-12);
        assert!((bce_loss(1.0, 1, CLIP) - CLIP).abs() < 1e-12);
        let big = bce_loss(0.0, 1, CLIP);
        assert!(big.is_finite() && (big + CLIP.ln()).abs() < 1e-12);
    }

    #[test]
    fn penalty_arithmetic() {
        let circuit = rx_circuit();
        let batch = [zero_sample(0)];
        let anchor = one_param_anchor(2.0, 3.0, 0.25);
        let plain = total_loss(&circuit, &[0.75], &batch, &[], CLIP).unwrap();
        let with = total_loss(&circuit, &[0.75], &batch, std::slice::from_ref(&anchor), CLIP).unwrap();
        assert!((with - plain - 1.5).abs() < 1e-14);
        let at_star = total_loss(&circuit, &[0.25], &batch, std::slice::from_ref(&anchor), CLIP).unwrap();
        assert_eq!(at_star, total_loss(&circuit, &[0.25], &batch, &[], CLIP).unwrap());

        let g_plain = loss_gradient(&circuit, &[0.75], &batch, &[], CLIP).unwrap();
        let g_with = loss_gradient(&circuit, &[0.75], &batch, &[anchor], CLIP).unwrap();
        assert!((g_with[0] - g_plain[0] - 6.0).abs() < 1e-14);
    }

    #[test]
    fn zero_fisher_contributes_nothing() {
        let circuit = rx_circuit();
        let batch = [zero_sample(1)];
        let a = one_param_anchor(5.0, 0.0, -1.0);
        assert_eq!(
            loss_gradient(&circuit, &[0.3], &batch, &[a], CLIP).unwrap(),
            loss_gradient(&circuit, &[0.3], &batch, &[], CLIP).unwrap()
        );
    }

    #[test]
    fn single_rx_gradient_is_analytic() {
        // p₁ = (1 − cos θ)/2 ⇒ dp₁/dθ = sin θ / 2; label 1 ⇒ dL/dp₁ = −1/p₁.
        let circuit = rx_circuit();
        for theta in [0.3, 1.1, 2.0, -2.5] {
            let p1 = (1.0 - f64::cos(theta)) / 2.0;
            let g = loss_gradient(&circuit, &[theta], &[zero_sample(1)], &[], CLIP).unwrap();
            let expected = -(theta.sin() / 2.0) / p1;
            assert!((g[0] - expected).abs() < 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn mismatched_anchor_rejected() {
        let circuit = rx_circuit();
        let a = EwcAnchor::new(
            "b",
            ParameterVector::new(vec![0.0, 0.0]),
            FisherInfo { diagonal: vec![1.0, 1.0], full: None },
            1.0,
            FisherMode::Diagonal,
        )
        .unwrap();
        assert!(total_loss(&circuit, &[0.0], &[zero_sample(0)], &[a], CLIP).is_err());
    }
}
