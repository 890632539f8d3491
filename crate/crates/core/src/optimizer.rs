//! Plain gradient descent with a constant learning rate.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QbmError, Result};
use crate::gradient::{self, GradientVector, DEFAULT_FD_EPSILON};
use crate::model::{build_circuit, exact_distribution, regulator_for, QbmParameters, QbmShape, Regulator, RegulatorMode};
use crate::pauli::PauliHamiltonian;
use crate::wavefunction::{assemble, TrialWaveFunction};

/// Consecutive small energy changes that end a run.
pub const ENERGY_PATIENCE: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeMode {
    Sign,
    Phase,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimationMode {
    Exact,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_iters: usize,
    pub grad_norm_tol: f64,
    pub energy_change_tol: f64,
    pub seed: u64,
    pub init_scale: f64,
    pub mode: EstimationMode,
    pub shots: u64,
    pub regulator: RegulatorMode,
    pub node: NodeMode,
    /// Step for finite-difference gradients (phase node).
    pub fd_epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            max_iters: 2000,
            grad_norm_tol: 1e-8,
            energy_change_tol: 1e-12,
            seed: 0,
            init_scale: 0.1,
            mode: EstimationMode::Exact,
            shots: 10_000,
            regulator: RegulatorMode::Off,
            node: NodeMode::Sign,
            fd_epsilon: DEFAULT_FD_EPSILON,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(QbmError::InvalidConfig(msg));
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return bad(format!("learning rate {} must be a nonnegative number", self.learning_rate));
        }
        if !(self.grad_norm_tol >= 0.0) || !(self.energy_change_tol >= 0.0) {
            return bad("tolerances must be nonnegative".into());
        }
        if !(self.init_scale > 0.0) || !self.init_scale.is_finite() {
            return bad(format!("init scale {} must be positive", self.init_scale));
        }
        if self.mode == EstimationMode::Sampled && self.shots == 0 {
            return bad("sampled mode needs at least one shot".into());
        }
        if self.mode == EstimationMode::Sampled && self.node == NodeMode::Phase {
            return bad("phase-node training is only supported in exact mode".into());
        }
        if !(self.fd_epsilon > 0.0) {
            return bad(format!("finite-difference step {} must be positive", self.fd_epsilon));
        }
        if let RegulatorMode::Fixed(k) = self.regulator {
            Regulator::new(k)?;
        }
        Ok(())
    }
}

/// SplitMix64 mix of `(seed, index)`, used to key per-iteration sample streams.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draws in `[−s, s]` for every parameter except `d`, which is drawn
/// from `±[s/2, s]` to keep the sign node away from zero.
pub fn initialize(shape: &QbmShape, config: &TrainConfig) -> Result<QbmParameters> {
    let s = config.init_scale;
    if !(s > 0.0) || !s.is_finite() {
        return Err(QbmError::InvalidConfig(format!("init scale {s} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut draw = |k: usize| (0..k).map(|_| rng.random_range(-s..=s)).collect::<Vec<_>>();
    let a = draw(shape.n_visible);
    let b = draw(shape.n_hidden);
    let w = draw(shape.n_pairs());
    let c = draw(shape.n_visible);
    let phase = config.node == NodeMode::Phase;
    let gamma = phase.then(|| draw(shape.n_visible));
    let delta = phase.then(|| draw(1)[0]);
    let magnitude = rng.random_range(s / 2.0..=s);
    let d = if rng.random::<bool>() { magnitude } else { -magnitude };
    Ok(QbmParameters {
        a,
        b,
        w,
        c,
        d,
        gamma,
        delta,
    })
}

/// Model wave function under the configured estimation mode, plus the
/// post-selection acceptance rate when sampled.
pub fn evaluate_wavefunction(
    shape: &QbmShape,
    params: &QbmParameters,
    reg: Regulator,
    config: &TrainConfig,
    iteration: u64,
) -> Result<(TrialWaveFunction, Option<f64>)> {
    match config.mode {
        EstimationMode::Exact => Ok((assemble(&exact_distribution(shape, params, reg)?, params)?, None)),
        EstimationMode::Sampled => {
            let built = build_circuit(shape, params, reg)?;
            let (dist, counts) = built.sample_visible(config.shots, derive_seed(config.seed, iteration))?;
            Ok((assemble(&dist, params)?, Some(counts.acceptance_rate())))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub params: QbmParameters,
    /// Energy of the parameters before the update.
    pub energy: f64,
    pub gradient: GradientVector,
    pub acceptance_rate: Option<f64>,
    pub flagged: usize,
}

/// One update `p ← p − η ∂_p⟨H⟩`. Iteration `iteration` samples from its own
/// stream in sampled mode.
pub fn step(
    params: &QbmParameters,
    h: &PauliHamiltonian,
    shape: &QbmShape,
    config: &TrainConfig,
    iteration: u64,
) -> Result<StepOutcome> {
    let reg = regulator_for(params, config.regulator)?;
    let (energy, grad, acceptance_rate, flagged) = if params.has_phase() {
        let psi = assemble(&exact_distribution(shape, params, reg)?, params)?;
        let energy = gradient::expectation(&psi, h)?;
        let grad = gradient::finite_difference_gradient(h, shape, params, reg, config.fd_epsilon)?;
        (energy, grad, None, 0)
    } else {
        let (psi, acceptance) = evaluate_wavefunction(shape, params, reg, config, iteration)?;
        let report = gradient::gradient(&psi, h, shape, params, reg)?;
        (report.energy, report.gradient, acceptance, report.flagged)
    };
    let updated: Vec<f64> = params
        .flat()
        .iter()
        .zip(grad.flat())
        .map(|(p, g)| p - config.learning_rate * g)
        .collect();
    Ok(StepOutcome {
        params: params.with_flat(&updated),
        energy,
        gradient: grad,
        acceptance_rate,
        flagged,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iter: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub acceptance_rate: Option<f64>,
    pub flagged_samples: usize,
    pub elapsed_ms: f64,
}

pub type TrainTrace = Vec<TraceEntry>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientNorm,
    EnergyStalled,
    MaxIters,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: QbmParameters,
    pub trace: TrainTrace,
    pub final_energy: f64,
    pub wavefunction: TrialWaveFunction,
    pub stop_reason: StopReason,
}

#[derive(Debug, thiserror::Error)]
#[error("training failed after {} iterations: {source}", trace.len())]
pub struct TrainError {
    #[source]
    pub source: QbmError,
    pub trace: TrainTrace,
}

/// Runs gradient descent from [`initialize`]d parameters.
pub fn train(h: &PauliHamiltonian, shape: &QbmShape, config: &TrainConfig) -> std::result::Result<TrainOutcome, TrainError> {
    let fail = |source| TrainError {
        source,
        trace: TrainTrace::new(),
    };
    config.validate().map_err(fail)?;
    if h.n_qubits() != shape.n_visible {
        return Err(fail(QbmError::DimensionMismatch {
            expected: shape.n_visible,
            found: h.n_qubits(),
        }));
    }
    let params = initialize(shape, config).map_err(fail)?;
    train_from(h, shape, config, params)
}

/// Runs gradient descent from the given starting point.
pub fn train_from(
    h: &PauliHamiltonian,
    shape: &QbmShape,
    config: &TrainConfig,
    mut params: QbmParameters,
) -> std::result::Result<TrainOutcome, TrainError> {
    let mut trace = TrainTrace::new();
    let fail = |source, trace: &TrainTrace| TrainError {
        source,
        trace: trace.clone(),
    };
    config.validate().map_err(|e| fail(e, &trace))?;
    params.validate(shape).map_err(|e| fail(e, &trace))?;
    let start = Instant::now();
    let mut stop_reason = StopReason::MaxIters;
    let mut stalled = 0;
    let mut previous: Option<f64> = None;

    for iter in 0..config.max_iters {
        let out = step(&params, h, shape, config, iter as u64).map_err(|e| fail(e, &trace))?;
        let grad_norm = out.gradient.norm();
        trace.push(TraceEntry {
            iter,
            energy: out.energy,
            grad_norm,
            acceptance_rate: out.acceptance_rate,
            flagged_samples: out.flagged,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        log::debug!("iter {iter}: energy {:.12} |grad| {grad_norm:.3e}", out.energy);
        if grad_norm <= config.grad_norm_tol {
            stop_reason = StopReason::GradientNorm;
            break;
        }
        if let Some(prev) = previous {
            if (out.energy - prev).abs() <= config.energy_change_tol {
                stalled += 1;
            } else {
                stalled = 0;
            }
        }
        previous = Some(out.energy);
        params = out.params;
        if stalled >= ENERGY_PATIENCE {
            stop_reason = StopReason::EnergyStalled;
            break;
        }
    }

    let reg = regulator_for(&params, config.regulator).map_err(|e| fail(e, &trace))?;
    let (wavefunction, _) = evaluate_wavefunction(shape, &params, reg, config, config.max_iters as u64)
        .map_err(|e| fail(e, &trace))?;
    let final_energy = gradient::expectation(&wavefunction, h).map_err(|e| fail(e, &trace))?;
    Ok(TrainOutcome {
        params,
        trace,
        final_energy,
        wavefunction,
        stop_reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradient::exact_energy;
    use crate::model::AncillaLayout;

    fn one_one() -> QbmShape {
        QbmShape::new(1, 1, AncillaLayout::OnePerPair).unwrap()
    }

    #[test]
    fn initialization_guards_and_determinism() {
        let s = QbmShape::new(2, 3, AncillaLayout::OnePerPair).unwrap();
        let bad = TrainConfig {
            init_scale: 0.0,
            ..TrainConfig::default()
        };
        assert!(initialize(&s, &bad).is_err());
        let cfg = TrainConfig {
            seed: 42,
            ..TrainConfig::default()
        };
        assert_eq!(initialize(&s, &cfg).unwrap(), initialize(&s, &cfg).unwrap());
    }

    #[test]
    fn initialization_bounds_over_many_seeds() {
        let s = QbmShape::new(2, 2, AncillaLayout::OnePerPair).unwrap();
        for seed in 0..500 {
            let cfg = TrainConfig {
                seed,
                ..TrainConfig::default()
            };
            let p = initialize(&s, &cfg).unwrap();
            assert!(p.flat().iter().all(|x| x.abs() <= 0.1));
            assert!(p.d.abs() >= 0.05);
        }
    }

    #[test]
    fn identity_hamiltonian_step_is_stationary() {
        let s = one_one();
        let h = PauliHamiltonian::parse("1 I").unwrap();
        let p = initialize(&s, &TrainConfig::default()).unwrap();
        let out = step(&p, &h, &s, &TrainConfig::default(), 0).unwrap();
        for (x, y) in out.params.flat().iter().zip(p.flat()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let s = one_one();
        let h = PauliHamiltonian::parse("1 Z").unwrap();
        let p = initialize(&s, &TrainConfig::default()).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        let out = step(&p, &h, &s, &cfg, 0).unwrap();
        assert_eq!(out.params, p);
        assert_eq!(out.energy, exact_energy(&h, &s, &p, Regulator::NONE).unwrap());
    }

    #[test]
    fn single_step_descends_on_z() {
        let s = one_one();
        let h = PauliHamiltonian::parse("1 Z").unwrap();
        let mut p = QbmParameters::zeros(&s, false);
        p.d = 0.1;
        for eta in [0.01, 0.05, 0.1] {
            let cfg = TrainConfig {
                learning_rate: eta,
                ..TrainConfig::default()
            };
            let out = step(&p, &h, &s, &cfg, 0).unwrap();
            let after = exact_energy(&h, &s, &out.params, Regulator::NONE).unwrap();
            assert!(after <= out.energy, "eta {eta}: {after} > {}", out.energy);
        }
    }

    #[test]
    fn zero_iterations_report_initial_energy() {
        let s = one_one();
        let h = PauliHamiltonian::parse("1 Z").unwrap();
        let cfg = TrainConfig {
            max_iters: 0,
            ..TrainConfig::default()
        };
        let out = train(&h, &s, &cfg).unwrap();
        assert!(out.trace.is_empty());
        let p = initialize(&s, &cfg).unwrap();
        assert_eq!(out.params, p);
        assert!((out.final_energy - exact_energy(&h, &s, &p, Regulator::NONE).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported_with_empty_trace() {
        let s = one_one();
        let h = PauliHamiltonian::parse("1 ZZ").unwrap();
        let err = train(&h, &s, &TrainConfig::default()).unwrap_err();
        assert!(err.trace.is_empty());
        assert!(matches!(err.source, QbmError::DimensionMismatch { .. }));
    }

    #[test]
    fn config_validation() {
        let cfg = TrainConfig {
            mode: EstimationMode::Sampled,
            shots: 0,
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = TrainConfig {
            mode: EstimationMode::Sampled,
            node: NodeMode::Phase,
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = TrainConfig {
            regulator: RegulatorMode::Fixed(0.2),
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn seeds_differ_per_iteration() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(9, 4), derive_seed(9, 4));
    }
}
