use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use qontinual::ansatz::{build_circuit, forward, AnsatzSpec, ParameterVector};
use qontinual::qsim::{apply_gate, Axis, Gate, StateVector};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn one_qubit(axis: Axis, theta: f64) -> DMatrix<Complex64> {
    let (cs, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    match axis {
        Axis::X => DMatrix::from_row_slice(2, 2, &[c(cs, 0.0), c(0.0, sn), c(0.0, sn), c(cs, 0.0)]),
        Axis::Z => DMatrix::from_row_slice(2, 2, &[c(cs, sn), c(0.0, 0.0), c(0.0, 0.0), c(cs, -sn)]),
    }
}

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

fn eye(d: usize) -> DMatrix<Complex64> {
    DMatrix::identity(d, d)
}

/// Full 2ⁿ×2ⁿ matrix of a gate, qubit 0 being the leftmost tensor factor.
fn gate_matrix(n: usize, gate: &Gate, theta: f64) -> DMatrix<Complex64> {
    match *gate {
        Gate::Rotation { axis, target, .. } => {
            let mut m = DMatrix::identity(1, 1);
            for q in 0..n {
                m = kron(&m, &if q == target { one_qubit(axis, theta) } else { eye(2) });
            }
            m
        }
        Gate::Cnot { control, target } => {
            let p0 = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
            let p1 = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
            let x = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
            let (mut a, mut b) = (DMatrix::identity(1, 1), DMatrix::identity(1, 1));
            for q in 0..n {
                a = kron(&a, &if q == control { p0.clone() } else { eye(2) });
                b = kron(&b, &if q == control { p1.clone() } else if q == target { x.clone() } else { eye(2) });
            }
            a + b
        }
    }
}

fn to_vec(s: &StateVector) -> DVector<Complex64> {
    DVector::from_column_slice(s.amplitudes())
}

fn random_state(n: usize, seed: &[f64]) -> StateVector {
    let d = 1 << n;
    let amps: Vec<Complex64> = (0..d).map(|i| c(seed[2 * i % seed.len()] - 0.5, seed[(2 * i + 1) % seed.len()] - 0.5)).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn marginal_one(s: &StateVector, q: usize) -> f64 {
    s.prob_one(q).unwrap()
}

fn gate_strategy(n: usize) -> impl Strategy<Value = Gate> {
    prop_oneof![
        (0..n).prop_map(|t| Gate::rx(t, 0)),
        (0..n).prop_map(|t| Gate::rz(t, 0)),
        (0..n, 1..n).prop_map(move |(ctl, off)| Gate::cnot(ctl, (ctl + off) % n)),
    ]
}

#[test]
fn kronecker_oracle_small_registers() {
    let seeds: Vec<f64> = (0..64).map(|i| ((i * 37 + 11) % 101) as f64 / 101.0).collect();
    for n in 1..=3 {
        let mut gates = Vec::new();
        for t in 0..n {
            gates.push(Gate::rx(t, 0));
            gates.push(Gate::rz(t, 0));
            for u in 0..n {
                if u != t {
                    gates.push(Gate::cnot(t, u));
                }
            }
        }
        for (k, g) in gates.iter().enumerate() {
            let theta = 0.37 + 0.91 * k as f64;
            let s = random_state(n, &seeds[k..]);
            let expected = gate_matrix(n, g, theta) * to_vec(&s);
            let got = apply_gate(s, g, theta).unwrap();
            for (a, b) in got.amplitudes().iter().zip(expected.iter()) {
                assert!((a - b).norm() < 1e-12, "n={n} gate={g:?}");
            }
        }
    }
}

#[test]
fn forward_matches_matrix_circuit() {
    for (n, l) in [(2, 1), (3, 2)] {
        let spec = AnsatzSpec::new(n, l);
        let gates = build_circuit(&spec).unwrap();
        let params: Vec<f64> = (0..spec.param_count()).map(|i| (i as f64 * 0.731).sin() * 3.0).collect();
        let seeds: Vec<f64> = (0..32).map(|i| ((i * 53 + 7) % 97) as f64 / 97.0).collect();
        let input = random_state(n, &seeds);
        let mut u = DMatrix::<Complex64>::identity(1 << n, 1 << n);
        for g in &gates {
            let theta = g.param_index().map_or(0.0, |i| params[i]);
            u = gate_matrix(n, g, theta) * u;
        }
        let out = u * to_vec(&input);
        // p₁ of qubit 0 = weight of the upper half of the basis.
        let p1: f64 = out.iter().skip(1 << (n - 1)).map(|a| a.norm_sqr()).sum();
        let got = forward(&spec, &ParameterVector::new(params), &input).unwrap();
        assert!((got - p1).abs() < 1e-12, "spec({n},{l}): {got} vs {p1}");
    }
}

#[test]
fn forward_is_4pi_periodic_and_bounded() {
    let spec = AnsatzSpec::new(3, 2);
    let input = StateVector::basis(3, 5).unwrap();
    let base: Vec<f64> = (0..spec.param_count()).map(|i| 0.4 * i as f64).collect();
    let p0 = forward(&spec, &ParameterVector::new(base.clone()), &input).unwrap();
    assert!((0.0..=1.0).contains(&p0));
    for i in 0..base.len() {
        let mut shifted = base.clone();
        shifted[i] += 4.0 * std::f64::consts::PI;
        let p = forward(&spec, &ParameterVector::new(shifted), &input).unwrap();
        assert!((p - p0).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn norm_is_preserved(amps in prop::collection::vec(-1.0f64..1.0, 16), gate in gate_strategy(3), theta in -10.0f64..10.0) {
        prop_assume!(amps.iter().map(|a| a * a).sum::<f64>() > 1e-3);
        let s = random_state(3, &amps.iter().map(|a| a + 0.5).collect::<Vec<_>>());
        let out = apply_gate(s, &gate, theta).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn inverse_rotation_undoes_gate(amps in prop::collection::vec(0.0f64..1.0, 16), gate in gate_strategy(3), theta in -10.0f64..10.0) {
        let s = random_state(3, &amps);
        let back_angle = if matches!(gate, Gate::Cnot { .. }) { 0.0 } else { -theta };
        let out = apply_gate(apply_gate(s.clone(), &gate, theta).unwrap(), &gate, back_angle).unwrap();
        for (a, b) in out.amplitudes().iter().zip(s.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn gates_act_locally(amps in prop::collection::vec(0.0f64..1.0, 16), gate in gate_strategy(3), theta in -10.0f64..10.0) {
        let s = random_state(3, &amps);
        let out = apply_gate(s.clone(), &gate, theta).unwrap();
        let untouched: Vec<usize> = match gate {
            Gate::Rotation { target, .. } => (0..3).filter(|&q| q != target).collect(),
            Gate::Cnot { control, target } => (0..3).filter(|&q| q != target).chain([control]).collect(),
        };
        for q in untouched {
            prop_assert!((marginal_one(&out, q) - marginal_one(&s, q)).abs() < 1e-12);
        }
    }
}
