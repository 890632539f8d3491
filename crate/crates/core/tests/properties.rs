use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use qbm_core::decomposition::{
    count_gates, decompose_ccry, decompose_controlled_rotation, distance_up_to_phase, unitary, Axis,
};
use qbm_core::gradient::{covariance_gradient, exact_energy, exact_gradient, finite_difference_gradient, CovarianceSample};
use qbm_core::model::{build_circuit, exact_distribution, AncillaLayout, QbmParameters, QbmShape, Regulator};
use qbm_core::pauli::{DenseMatrix, Pauli, PauliHamiltonian, PauliString};
use qbm_core::sim::{Gate, StateVector};
use qbm_core::validation::native_unitary;
use qbm_core::wavefunction::{assemble, TrialWaveFunction};

type CMat = DMatrix<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn pauli_matrix(p: Pauli) -> CMat {
    let i = Complex64::new(0.0, 1.0);
    let z = c(0.0);
    match p {
        Pauli::I => CMat::from_row_slice(2, 2, &[c(1.0), z, z, c(1.0)]),
        Pauli::X => CMat::from_row_slice(2, 2, &[z, c(1.0), c(1.0), z]),
        Pauli::Y => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        Pauli::Z => CMat::from_row_slice(2, 2, &[c(1.0), z, z, c(-1.0)]),
    }
}

/// Independent dense Hamiltonian: symbol 0 is the rightmost Kronecker factor.
fn oracle_matrix(h: &PauliHamiltonian) -> CMat {
    let dim = 1 << h.n_qubits();
    let mut out = CMat::zeros(dim, dim);
    for term in h.terms() {
        let mut m = CMat::from_element(1, 1, c(1.0));
        for &p in term.string.ops() {
            m = pauli_matrix(p).kronecker(&m);
        }
        out += m * c(term.coefficient);
    }
    out
}

fn to_nalgebra(m: &DenseMatrix) -> CMat {
    CMat::from_row_slice(m.dim, m.dim, &m.data)
}

fn pauli_strategy() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn hamiltonian_strategy(max_qubits: usize) -> impl Strategy<Value = PauliHamiltonian> {
    (1..=max_qubits).prop_flat_map(|n| {
        prop::collection::vec((-2.0f64..2.0, prop::collection::vec(pauli_strategy(), n)), 1..6).prop_map(
            move |terms| {
                PauliHamiltonian::new(n, terms.into_iter().map(|(c, ops)| (c, PauliString::new(ops)))).unwrap()
            },
        )
    })
}

fn state_strategy(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|v| {
            let amps: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            amps.into_iter().map(|a| a / norm).collect()
        })
}

fn shape_strategy(max_total: usize) -> impl Strategy<Value = QbmShape> {
    (1..max_total, 1..max_total, any::<bool>())
        .prop_filter("total size", move |(n, m, _)| n + m <= max_total)
        .prop_map(|(n, m, reused)| {
            let layout = if reused {
                AncillaLayout::SingleReused
            } else {
                AncillaLayout::OnePerPair
            };
            QbmShape::new(n, m, layout).unwrap()
        })
}

fn params_for(shape: &QbmShape, values: &[f64]) -> QbmParameters {
    let t = QbmParameters::zeros(shape, false);
    t.with_flat(&values[..t.n_params()])
}

/// Brute-force visible marginal with direct exponentials and explicit spins.
fn boltzmann_oracle(shape: &QbmShape, p: &QbmParameters) -> Vec<f64> {
    let (n, m) = (shape.n_visible, shape.n_hidden);
    let spin = |bits: u64, i: usize| if bits >> i & 1 == 0 { 1.0 } else { -1.0 };
    let mut weights = vec![0.0; 1 << n];
    for (v, slot) in weights.iter_mut().enumerate() {
        for h in 0..1u64 << m {
            let mut e = 0.0;
            for i in 0..n {
                e += p.a[i] * spin(v as u64, i);
                for j in 0..m {
                    e += p.w[i * m + j] * spin(v as u64, i) * spin(h, j);
                }
            }
            for j in 0..m {
                e += p.b[j] * spin(h, j);
            }
            *slot += e.exp();
        }
    }
    let z: f64 = weights.iter().sum();
    weights.iter().map(|w| w / z).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn hamiltonian_is_hermitian_and_matches_oracle(h in hamiltonian_strategy(6)) {
        let dense = to_nalgebra(&h.dense_matrix(12).unwrap());
        let oracle = oracle_matrix(&h);
        prop_assert!((&dense - &oracle).norm() < 1e-12);
        prop_assert!((&dense - dense.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn matrix_free_action_matches_dense(
        (h, psi) in hamiltonian_strategy(5).prop_flat_map(|h| {
            let n = h.n_qubits();
            (Just(h), state_strategy(n))
        })
    ) {
        let got = h.apply_dense(&psi).unwrap();
        let want = oracle_matrix(&h) * DVector::from_vec(psi);
        for (a, b) in got.iter().zip(want.iter()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn text_round_trip(h in hamiltonian_strategy(6)) {
        let back = PauliHamiltonian::parse(&h.to_text()).unwrap();
        prop_assert_eq!(back, h);
    }

    #[test]
    fn variational_bound_holds(h in hamiltonian_strategy(4), shape_seed in 0usize..2, values in prop::collection::vec(-1.0f64..1.0, 64)) {
        let n = h.n_qubits();
        let layout = if shape_seed == 0 { AncillaLayout::OnePerPair } else { AncillaLayout::SingleReused };
        let shape = QbmShape::new(n, 2, layout).unwrap();
        let params = params_for(&shape, &values);
        let e = exact_energy(&h, &shape, &params, Regulator::NONE);
        prop_assume!(e.is_ok());
        let ground = oracle_matrix(&h).symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(e.unwrap() >= ground - 1e-9);
    }

    #[test]
    fn unitary_gates_preserve_norm(angles in prop::collection::vec(-7.0f64..7.0, 8), targets in prop::collection::vec(0usize..4, 8)) {
        let mut state = StateVector::zero(4);
        for (k, (&angle, &t)) in angles.iter().zip(&targets).enumerate() {
            let other = (t + 1 + k % 3) % 4;
            let third = (0..4).find(|q| *q != t && *q != other).unwrap();
            let gate = match k % 5 {
                0 => Gate::Ry { target: t, angle },
                1 => Gate::Rz { target: t, angle },
                2 => Gate::Cnot { control: other, target: t },
                3 => Gate::ControlledRy { control: other, control_state: k % 2 == 0, target: t, angle },
                _ => Gate::DoublyControlledRy { controls: [other, third], control_states: [k % 2 == 0, true], target: t, angle },
            };
            state.apply(&gate).unwrap();
            prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_control_equals_x_conjugation(angle in -7.0f64..7.0, s1 in any::<bool>(), s2 in any::<bool>()) {
        let gate = native_unitary(&Gate::DoublyControlledRy { controls: [0, 1], control_states: [s1, s2], target: 2, angle }, 3).unwrap();
        let base = to_nalgebra(&native_unitary(&Gate::DoublyControlledRy { controls: [0, 1], control_states: [true, true], target: 2, angle }, 3).unwrap());
        let x = pauli_matrix(Pauli::X);
        let id = pauli_matrix(Pauli::I);
        let flip = |on: bool| if !on { x.clone() } else { id.clone() };
        // Qubit 0 is the rightmost factor.
        let conj = id.kronecker(&flip(s2)).kronecker(&flip(s1));
        let want = &conj * base * &conj;
        prop_assert!((to_nalgebra(&gate) - want).norm() < 1e-12);
    }

    #[test]
    fn circuit_matches_boltzmann_oracle(shape in shape_strategy(6), values in prop::collection::vec(-1.0f64..1.0, 64)) {
        let params = params_for(&shape, &values);
        let built = build_circuit(&shape, &params, Regulator::NONE).unwrap();
        let (sim, success) = built.exact_visible().unwrap();
        prop_assert!(success > 0.0 && success <= 1.0 + 1e-12);
        for (v, want) in boltzmann_oracle(&shape, &params).into_iter().enumerate() {
            prop_assert!((sim.probability(v as u64) - want).abs() < 1e-10);
        }
    }

    #[test]
    fn layouts_agree(n in 1usize..3, m in 1usize..3, values in prop::collection::vec(-1.5f64..1.5, 64)) {
        let per_pair = QbmShape::new(n, m, AncillaLayout::OnePerPair).unwrap();
        let reused = QbmShape::new(n, m, AncillaLayout::SingleReused).unwrap();
        let params = params_for(&per_pair, &values);
        let (a, sa) = build_circuit(&per_pair, &params, Regulator::NONE).unwrap().exact_visible().unwrap();
        let (b, sb) = build_circuit(&reused, &params, Regulator::NONE).unwrap().exact_visible().unwrap();
        prop_assert!(a.max_abs_difference(&b) < 1e-10);
        prop_assert!((sa - sb).abs() < 1e-10);
    }

    #[test]
    fn assembled_wavefunction_is_normalized(shape in shape_strategy(5), values in prop::collection::vec(-1.0f64..1.0, 64)) {
        let params = params_for(&shape, &values);
        let dist = exact_distribution(&shape, &params, Regulator::NONE).unwrap();
        if let Ok(psi) = assemble(&dist, &params) {
            prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_weights_factorize(n in 1usize..4, m in 1usize..3, a in prop::collection::vec(-2.0f64..2.0, 3), b in prop::collection::vec(-2.0f64..2.0, 2)) {
        let shape = QbmShape::new(n, m, AncillaLayout::OnePerPair).unwrap();
        let params = QbmParameters { a: a[..n].to_vec(), b: b[..m].to_vec(), ..QbmParameters::zeros(&shape, false) };
        let dist = exact_distribution(&shape, &params, Regulator::NONE).unwrap();
        for v in 0..1u64 << n {
            let want: f64 = (0..n)
                .map(|i| {
                    let s = if v >> i & 1 == 0 { 1.0 } else { -1.0 };
                    (s * a[i]).exp() / (2.0 * a[i].cosh())
                })
                .product();
            prop_assert!((dist.probability(v) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_difference(
        h in hamiltonian_strategy(2).prop_filter("two qubits", |h| h.n_qubits() == 2),
        values in prop::collection::vec(-1.0f64..1.0, 16),
        k in prop_oneof![Just(1.0), 1.0f64..4.0],
        reused in any::<bool>(),
    ) {
        let layout = if reused { AncillaLayout::SingleReused } else { AncillaLayout::OnePerPair };
        let shape = QbmShape::new(2, 2, layout).unwrap();
        let params = params_for(&shape, &values);
        let reg = Regulator::new(k).unwrap();
        let analytic = exact_gradient(&h, &shape, &params, reg);
        prop_assume!(analytic.as_ref().is_ok_and(|r| r.flagged == 0));
        let analytic = analytic.unwrap().gradient.flat();
        let numeric = finite_difference_gradient(&h, &shape, &params, reg, 1e-5).unwrap().flat();
        for (a, f) in analytic.iter().zip(&numeric) {
            prop_assert!((a - f).abs() <= (1e-5 * f.abs()).max(1e-7), "analytic {a} numeric {f}");
        }
    }

    #[test]
    fn covariance_is_shift_invariant(
        raw in prop::collection::vec((0.01f64..1.0, -3.0f64..3.0, prop::collection::vec(-2.0f64..2.0, 5)), 2..20),
        shift in -100.0f64..100.0,
    ) {
        let samples: Vec<CovarianceSample> = raw.iter().map(|(w, e, d)| CovarianceSample { weight: *w, e_loc: *e, d: d.clone() }).collect();
        let shifted: Vec<CovarianceSample> = samples.iter().map(|s| CovarianceSample { d: s.d.iter().map(|x| x + shift).collect(), ..s.clone() }).collect();
        let g0 = covariance_gradient(&samples).unwrap();
        let g1 = covariance_gradient(&shifted).unwrap();
        for (a, b) in g0.iter().zip(&g1) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn small_step_descends(h in hamiltonian_strategy(2).prop_filter("two qubits", |h| h.n_qubits() == 2), values in prop::collection::vec(-1.0f64..1.0, 16)) {
        let shape = QbmShape::new(2, 1, AncillaLayout::OnePerPair).unwrap();
        let params = params_for(&shape, &values);
        let report = exact_gradient(&h, &shape, &params, Regulator::NONE);
        prop_assume!(report.as_ref().is_ok_and(|r| r.flagged == 0 && r.gradient.norm() > 1e-6));
        let report = report.unwrap();
        let g = report.gradient.flat();
        let eta = 1e-4 / report.gradient.norm().max(1.0);
        let next: Vec<f64> = params.flat().iter().zip(&g).map(|(p, gi)| p - eta * gi).collect();
        let e1 = exact_energy(&h, &shape, &params.with_flat(&next), Regulator::NONE).unwrap();
        prop_assert!(e1 <= report.energy + 1e-15);
    }

    #[test]
    fn finite_difference_error_shrinks_with_step(values in prop::collection::vec(-1.0f64..1.0, 16)) {
        let h = PauliHamiltonian::parse("0.7 XZ\n-0.4 ZZ\n0.9 IX").unwrap();
        let shape = QbmShape::new(2, 1, AncillaLayout::OnePerPair).unwrap();
        let params = params_for(&shape, &values);
        let analytic = exact_gradient(&h, &shape, &params, Regulator::NONE);
        prop_assume!(analytic.as_ref().is_ok_and(|r| r.flagged == 0));
        let analytic = analytic.unwrap().gradient.flat();
        let err = |eps: f64| {
            let fd = finite_difference_gradient(&h, &shape, &params, Regulator::NONE, eps).unwrap().flat();
            fd.iter().zip(&analytic).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let (coarse, fine) = (err(1e-2), err(1e-3));
        // Central differences are second order: a tenfold smaller step cuts
        // the truncation error roughly a hundredfold.
        prop_assert!(fine <= coarse / 20.0 || fine < 1e-9, "coarse {coarse} fine {fine}");
    }

    #[test]
    fn decompositions_match_native(angle in -2.0 * std::f64::consts::PI..2.0 * std::f64::consts::PI, s1 in any::<bool>(), s2 in any::<bool>()) {
        let seq = decompose_ccry(angle, [0, 1], [s1, s2], 2);
        let native = native_unitary(&Gate::DoublyControlledRy { controls: [0, 1], control_states: [s1, s2], target: 2, angle }, 3).unwrap();
        prop_assert!(distance_up_to_phase(&unitary(&seq, 3), &native) < 1e-12);
        let counts = count_gates(&seq, 3);
        prop_assert_eq!((counts.two_qubit, counts.one_qubit_rotations), (8, 6));
        prop_assert_eq!(counts.x_gates, 2 * (!s1 as usize + !s2 as usize));
        prop_assert!(counts.depth <= counts.total());
    }

    #[test]
    fn controlled_rotations_match_oracle_for_every_axis(angle in -2.0 * std::f64::consts::PI..2.0 * std::f64::consts::PI, state in any::<bool>()) {
        for (axis, p) in [(Axis::X, Pauli::X), (Axis::Y, Pauli::Y), (Axis::Z, Pauli::Z)] {
            let seq = decompose_controlled_rotation(axis, angle, 0, state, 1);
            // R(θ) = cos(θ/2) I − i sin(θ/2) P on the target (qubit 1, left factor).
            let r = pauli_matrix(Pauli::I) * c((angle / 2.0).cos()) - pauli_matrix(p) * Complex64::new(0.0, (angle / 2.0).sin());
            let mut want = CMat::identity(4, 4);
            for col in 0..4 {
                if (col & 1 == 1) == state {
                    let t = col >> 1;
                    for row_t in 0..2 {
                        want[((row_t << 1) | (col & 1), col)] = r[(row_t, t)];
                    }
                }
            }
            let got = to_nalgebra(&unitary(&seq, 2));
            let got_dense = DenseMatrix { dim: 4, data: got.transpose().iter().copied().collect() };
            let want_dense = DenseMatrix { dim: 4, data: want.transpose().iter().copied().collect() };
            prop_assert!(distance_up_to_phase(&got_dense, &want_dense) < 1e-12);
        }
    }
}

#[test]
fn trial_wavefunction_dense_round_trip() {
    let amps = [c(0.6), c(0.0), Complex64::new(0.0, -0.8), c(0.0)];
    let psi = TrialWaveFunction::from_dense(2, &amps);
    assert_eq!(psi.to_dense(), amps.to_vec());
}
