//! Self-check suites run by `qbm validate`: simulated circuit against the
//! brute-force Boltzmann distribution, analytic gradient against central
//! differences, and gate decompositions against the native gates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use crate::decomposition::{decompose_ccry, distance_up_to_phase, unitary, PhysicalGate};
use crate::error::Result;
use crate::gradient::{exact_gradient, finite_difference_gradient, DEFAULT_FD_EPSILON};
use crate::model::{build_circuit, exact_distribution, AncillaLayout, QbmParameters, QbmShape, Regulator};
use crate::optimizer::derive_seed;
use crate::pauli::{DenseMatrix, Pauli, PauliHamiltonian, PauliString};
use crate::sim::{Gate, StateVector};

pub const CIRCUIT_TOLERANCE: f64 = 1e-10;
pub const GRADIENT_RELATIVE_TOLERANCE: f64 = 1e-5;
pub const GRADIENT_ABSOLUTE_FLOOR: f64 = 1e-7;
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-12;

/// Deliberate corruption used to check that a suite can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Perturbs the first rotation angle of every built circuit.
    Circuit,
    /// Flips the sign of every analytic gradient component.
    Gradient,
    /// Perturbs one rotation angle of every decomposition.
    Decomposition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidationConfig {
    pub seed: u64,
    pub trials: usize,
    pub fault: Option<Fault>,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 20,
            fault: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub trials: usize,
    pub passed: bool,
    /// Largest observed error, scaled so that 1.0 is the tolerance.
    pub worst_ratio: f64,
    pub note: Option<String>,
}

/// Uniform draw from `[-scale, scale]` for every parameter.
pub fn random_parameters(shape: &QbmShape, scale: f64, phase: bool, rng: &mut impl Rng) -> QbmParameters {
    let template = QbmParameters::zeros(shape, phase);
    let flat: Vec<f64> = (0..template.n_params())
        .map(|_| rng.random_range(-scale..=scale))
        .collect();
    template.with_flat(&flat)
}

/// Random Hamiltonian with `n_terms` Pauli strings and coefficients in [−1, 1].
pub fn random_hamiltonian(n_qubits: usize, n_terms: usize, rng: &mut impl Rng) -> Result<PauliHamiltonian> {
    let symbols = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let terms: Vec<(f64, PauliString)> = (0..n_terms)
        .map(|_| {
            let ops = (0..n_qubits).map(|_| symbols[rng.random_range(0..4)]).collect();
            (rng.random_range(-1.0..=1.0), PauliString::new(ops))
        })
        .collect();
    PauliHamiltonian::new(n_qubits, terms)
}

fn finish(name: &str, trials: usize, worst_ratio: f64) -> SuiteResult {
    let note = (trials == 0).then(|| "no trials requested; passing vacuously".to_string());
    if trials == 0 {
        log::warn!("suite {name}: zero trials, nothing was checked");
    }
    SuiteResult {
        name: name.to_string(),
        trials,
        passed: worst_ratio <= 1.0,
        worst_ratio,
        note,
    }
}

fn corrupt_first_angle(circuit: &mut crate::sim::Circuit) {
    if let Some(Gate::Ry { angle, .. }) = circuit.ops_mut().first_mut() {
        *angle += 0.1;
    }
}

/// Built circuit versus brute-force enumeration for (1,1), (2,2), (2,3) in both layouts.
pub fn circuit_suite(cfg: &ValidationConfig) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 1));
    let mut worst: f64 = 0.0;
    for (n, m) in [(1, 1), (2, 2), (2, 3)] {
        for layout in [AncillaLayout::OnePerPair, AncillaLayout::SingleReused] {
            let shape = QbmShape::new(n, m, layout)?;
            for _ in 0..cfg.trials {
                let params = random_parameters(&shape, 1.0, false, &mut rng);
                let mut built = build_circuit(&shape, &params, Regulator::NONE)?;
                if cfg.fault == Some(Fault::Circuit) {
                    corrupt_first_angle(&mut built.circuit);
                }
                let (sim, _) = built.exact_visible()?;
                let oracle = exact_distribution(&shape, &params, Regulator::NONE)?;
                worst = worst.max(sim.max_abs_difference(&oracle) / CIRCUIT_TOLERANCE);
            }
        }
    }
    Ok(finish("circuit_vs_boltzmann", cfg.trials, worst))
}

/// Analytic covariance gradient versus central differences on (2,2) with
/// random two-qubit Hamiltonians, alternating between no regulator and auto.
pub fn gradient_suite(cfg: &ValidationConfig) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 2));
    let shape = QbmShape::new(2, 2, AncillaLayout::SingleReused)?;
    let mut worst: f64 = 0.0;
    for trial in 0..cfg.trials {
        let h = random_hamiltonian(2, 4, &mut rng)?;
        let params = random_parameters(&shape, 1.0, false, &mut rng);
        let reg = if trial % 2 == 0 {
            Regulator::NONE
        } else {
            crate::model::regulator_for(&params, crate::model::RegulatorMode::Auto)?
        };
        let analytic = exact_gradient(&h, &shape, &params, reg)?.gradient.flat();
        let numeric = finite_difference_gradient(&h, &shape, &params, reg, DEFAULT_FD_EPSILON)?.flat();
        let sign = if cfg.fault == Some(Fault::Gradient) { -1.0 } else { 1.0 };
        for (a, f) in analytic.iter().zip(&numeric) {
            let allowed = (GRADIENT_RELATIVE_TOLERANCE * f.abs()).max(GRADIENT_ABSOLUTE_FLOOR);
            worst = worst.max((sign * a - f).abs() / allowed);
        }
    }
    Ok(finish("gradient_vs_finite_difference", cfg.trials, worst))
}

/// Dense unitary of a native simulator gate, built column by column.
pub fn native_unitary(gate: &Gate, n_qubits: usize) -> Result<DenseMatrix> {
    let dim = 1usize << n_qubits;
    let mut out = DenseMatrix::zeros(dim);
    for col in 0..dim {
        let mut amps = vec![Complex64::default(); dim];
        amps[col] = Complex64::new(1.0, 0.0);
        let mut state = StateVector::from_amplitudes(amps)?;
        state.apply(gate)?;
        for (row, a) in state.amplitudes().iter().enumerate() {
            out.data[row * dim + col] = *a;
        }
    }
    Ok(out)
}

/// Decomposed doubly controlled Ry versus the native gate for random angles
/// in [−2π, 2π] and random control polarities.
pub fn decomposition_suite(cfg: &ValidationConfig) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 3));
    let mut worst: f64 = 0.0;
    let two_pi = 2.0 * std::f64::consts::PI;
    for _ in 0..cfg.trials {
        let angle = rng.random_range(-two_pi..=two_pi);
        let control_states = [rng.random_bool(0.5), rng.random_bool(0.5)];
        let mut seq = decompose_ccry(angle, [0, 1], control_states, 2);
        if cfg.fault == Some(Fault::Decomposition) {
            if let Some(PhysicalGate::Rotation { angle, .. }) =
                seq.iter_mut().find(|g| matches!(g, PhysicalGate::Rotation { .. }))
            {
                *angle += 0.1;
            }
        }
        let native = native_unitary(
            &Gate::DoublyControlledRy {
                controls: [0, 1],
                control_states,
                target: 2,
                angle,
            },
            3,
        )?;
        worst = worst.max(distance_up_to_phase(&unitary(&seq, 3), &native) / DECOMPOSITION_TOLERANCE);
    }
    Ok(finish("decomposition_equivalence", cfg.trials, worst))
}

pub fn run_all(cfg: &ValidationConfig) -> Result<Vec<SuiteResult>> {
    Ok(vec![circuit_suite(cfg)?, gradient_suite(cfg)?, decomposition_suite(cfg)?])
}
