//! Minimal state-vector simulator.
//!
//! Supports exactly the operations the Boltzmann-machine circuits need:
//! single-qubit Ry/Rz/X, CNOT, CZ, singly and doubly controlled Ry with
//! arbitrary control polarity, mid-circuit measurement with optional
//! post-selection, and reset. Qubit 0 is the least significant bit of the
//! amplitude index.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QbmError, Result};

/// Branches with probability below this cannot be post-selected.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Ry {
        target: usize,
        angle: f64,
    },
    Rz {
        target: usize,
        angle: f64,
    },
    X {
        target: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    Cz {
        a: usize,
        b: usize,
    },
    /// Ry on `target` when `control` reads `control_state`.
    ControlledRy {
        control: usize,
        control_state: bool,
        target: usize,
        angle: f64,
    },
    /// Ry on `target` when both controls read their `control_states`.
    DoublyControlledRy {
        controls: [usize; 2],
        control_states: [bool; 2],
        target: usize,
        angle: f64,
    },
    Measure {
        qubit: usize,
    },
    Reset {
        qubit: usize,
    },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Ry { target, .. } | Gate::Rz { target, .. } | Gate::X { target } => vec![target],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Cz { a, b } => vec![a, b],
            Gate::ControlledRy {
                control, target, ..
            } => vec![control, target],
            Gate::DoublyControlledRy {
                controls, target, ..
            } => vec![controls[0], controls[1], target],
            Gate::Measure { qubit } | Gate::Reset { qubit } => vec![qubit],
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Ry { angle, .. }
            | Gate::Rz { angle, .. }
            | Gate::ControlledRy { angle, .. }
            | Gate::DoublyControlledRy { angle, .. } => Some(angle),
            _ => None,
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, Gate::Measure { .. } | Gate::Reset { .. })
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let qubits = self.qubits();
        for (k, &q) in qubits.iter().enumerate() {
            if q >= n_qubits {
                return Err(QbmError::QubitOutOfRange {
                    index: q,
                    qubits: n_qubits,
                });
            }
            if qubits[..k].contains(&q) {
                return Err(QbmError::RepeatedQubit(q));
            }
        }
        if let Some(angle) = self.angle() {
            if !angle.is_finite() {
                return Err(QbmError::NonFiniteAngle(angle));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            ops: Vec::new(),
        }
    }

    /// Appends `gate`, returning its op index.
    pub fn push(&mut self, gate: Gate) -> Result<usize> {
        gate.validate(self.n_qubits)?;
        self.ops.push(gate);
        Ok(self.ops.len() - 1)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[Gate] {
        &self.ops
    }

    pub fn ops_mut(&mut self) -> &mut [Gate] {
        &mut self.ops
    }
}

/// Required measurement outcomes, keyed by op index of the `Measure` gate.
pub type PostSelection = BTreeMap<usize, bool>;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩ on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        StateVector {
            n_qubits,
            amplitudes,
        }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() {
            return Err(QbmError::DimensionMismatch {
                expected: amplitudes.len().next_power_of_two().trailing_zeros() as usize,
                found: amplitudes.len(),
            });
        }
        Ok(StateVector {
            n_qubits: amplitudes.len().trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability that `qubit` reads 1.
    pub fn probability_one(&self, qubit: usize) -> f64 {
        let bit = 1usize << qubit;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Marginal distribution over `qubits`; bit k of the key is `qubits[k]`.
    pub fn marginal(&self, qubits: &[usize]) -> BTreeMap<u64, f64> {
        let mut out = BTreeMap::new();
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let key = qubits
                .iter()
                .enumerate()
                .fold(0u64, |acc, (k, &q)| acc | ((((i >> q) & 1) as u64) << k));
            *out.entry(key).or_insert(0.0) += p;
        }
        out
    }

    fn rotate_y(&mut self, target: usize, angle: f64, controls: &[(usize, bool)]) {
        let (s, c) = (angle / 2.0).sin_cos();
        let bit = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & bit != 0 || !controls.iter().all(|&(q, st)| ((i >> q) & 1 == 1) == st) {
                continue;
            }
            let a0 = self.amplitudes[i];
            let a1 = self.amplitudes[i | bit];
            self.amplitudes[i] = a0 * c - a1 * s;
            self.amplitudes[i | bit] = a0 * s + a1 * c;
        }
    }

    fn flip(&mut self, target: usize, control: Option<usize>) {
        let bit = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 && control.is_none_or(|q| (i >> q) & 1 == 1) {
                self.amplitudes.swap(i, i | bit);
            }
        }
    }

    /// Applies a gate in place. `Measure` and `Reset` are rejected here; use
    /// the projection methods instead.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match *gate {
            Gate::Ry { target, angle } => self.rotate_y(target, angle, &[]),
            Gate::Rz { target, angle } => {
                let bit = 1usize << target;
                let lo = Complex64::from_polar(1.0, -angle / 2.0);
                let hi = Complex64::from_polar(1.0, angle / 2.0);
                for (i, a) in self.amplitudes.iter_mut().enumerate() {
                    *a *= if i & bit == 0 { lo } else { hi };
                }
            }
            Gate::X { target } => self.flip(target, None),
            Gate::Cnot { control, target } => self.flip(target, Some(control)),
            Gate::Cz { a, b } => {
                let mask = (1usize << a) | (1usize << b);
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    if i & mask == mask {
                        *amp = -*amp;
                    }
                }
            }
            Gate::ControlledRy {
                control,
                control_state,
                target,
                angle,
            } => self.rotate_y(target, angle, &[(control, control_state)]),
            Gate::DoublyControlledRy {
                controls,
                control_states,
                target,
                angle,
            } => self.rotate_y(
                target,
                angle,
                &[(controls[0], control_states[0]), (controls[1], control_states[1])],
            ),
            Gate::Measure { .. } | Gate::Reset { .. } => {
                return Err(QbmError::InvalidConfig(
                    "non-unitary op passed to StateVector::apply".into(),
                ))
            }
        }
        Ok(())
    }

    /// Projects `qubit` onto `outcome` and renormalizes, returning the
    /// pre-projection probability of that outcome.
    pub fn project(&mut self, qubit: usize, outcome: bool) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(QbmError::QubitOutOfRange {
                index: qubit,
                qubits: self.n_qubits,
            });
        }
        let p1 = self.probability_one(qubit);
        let p = if outcome { p1 } else { 1.0 - p1 };
        if p < MIN_BRANCH_PROBABILITY {
            return Err(QbmError::PostSelectionImpossible {
                qubit,
                outcome: outcome as u8,
                probability: p,
            });
        }
        let bit = 1usize << qubit;
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        Ok(p)
    }

    /// Projection followed by returning the qubit to |0⟩.
    pub fn measure_and_reset(&mut self, qubit: usize, outcome: bool) -> Result<f64> {
        let p = self.project(qubit, outcome)?;
        if outcome {
            self.flip(qubit, None);
        }
        Ok(p)
    }

    /// Collapses `qubit` at random, returning the observed bit.
    fn collapse(&mut self, qubit: usize, rng: &mut impl Rng) -> bool {
        let p1 = self.probability_one(qubit);
        let outcome = rng.random::<f64>() < p1;
        // A zero-probability branch is never drawn, so projection cannot fail.
        self.project(qubit, outcome)
            .expect("sampled branch has positive probability");
        outcome
    }
}

/// Functional form of [`StateVector::apply`].
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

/// Functional form of [`StateVector::project`].
pub fn project_and_renormalize(
    state: &StateVector,
    qubit: usize,
    outcome: bool,
) -> Result<(StateVector, f64)> {
    let mut out = state.clone();
    let p = out.project(qubit, outcome)?;
    Ok((out, p))
}

/// Functional form of [`StateVector::measure_and_reset`].
pub fn measure_and_reset(state: &StateVector, qubit: usize, outcome: bool) -> Result<(StateVector, f64)> {
    let mut out = state.clone();
    let p = out.measure_and_reset(qubit, outcome)?;
    Ok((out, p))
}

/// Runs `circuit` on |0…0⟩ without sampling.
///
/// Post-selected measurements become projections and the returned success
/// probability is the product of their branch probabilities. Measurements
/// without a required outcome are deferred to the final state and leave it
/// untouched. A reset is only representable when the qubit is in a definite
/// state, which holds right after a post-selected measurement.
pub fn run_exact(circuit: &Circuit, post_select: &PostSelection) -> Result<(StateVector, f64)> {
    let mut state = StateVector::zero(circuit.n_qubits());
    let mut success = 1.0;
    for (idx, gate) in circuit.ops().iter().enumerate() {
        match *gate {
            Gate::Measure { qubit } => {
                if let Some(&outcome) = post_select.get(&idx) {
                    success *= state.project(qubit, outcome)?;
                }
            }
            Gate::Reset { qubit } => {
                let p1 = state.probability_one(qubit);
                if p1 > 1.0 - 1e-12 {
                    state.flip(qubit, None);
                } else if p1 > 1e-12 {
                    return Err(QbmError::NonPureReset(qubit));
                }
            }
            _ => state.apply(gate)?,
        }
    }
    Ok((state, success))
}

/// Result of a shot-sampled run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleCounts {
    /// Counts over recorded outcomes. Bit k of a key is the outcome of the
    /// k-th measurement that carries no post-selection requirement.
    pub counts: BTreeMap<u64, u64>,
    pub accepted: u64,
    pub rejected: u64,
}

impl SampleCounts {
    pub fn shots(&self) -> u64 {
        self.accepted + self.rejected
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.shots() as f64
    }
}

/// Per-shot generator: stream `shot` of a ChaCha8 keyed by `seed`, so every
/// shot is reproducible independently of evaluation order.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// One trajectory. Returns the recorded bits, or `None` when a post-selected
/// measurement disagreed.
fn run_trajectory(
    circuit: &Circuit,
    post_select: &PostSelection,
    start: usize,
    mut state: StateVector,
    rng: &mut impl Rng,
) -> Option<u64> {
    let mut record = 0u64;
    let mut n_recorded = 0;
    for (idx, gate) in circuit.ops().iter().enumerate().skip(start) {
        match *gate {
            Gate::Measure { qubit } => {
                let outcome = state.collapse(qubit, rng);
                match post_select.get(&idx) {
                    Some(&required) if required != outcome => return None,
                    Some(_) => {}
                    None => {
                        record |= (outcome as u64) << n_recorded;
                        n_recorded += 1;
                    }
                }
            }
            Gate::Reset { qubit } => {
                if state.collapse(qubit, rng) {
                    state.flip(qubit, None);
                }
            }
            _ => state
                .apply(gate)
                .expect("gates are validated when pushed onto the circuit"),
        }
    }
    Some(record)
}

fn unitary_prefix(circuit: &Circuit) -> Result<(usize, StateVector)> {
    let start = circuit
        .ops()
        .iter()
        .position(|g| !g.is_unitary())
        .unwrap_or(circuit.ops().len());
    let mut prefix = StateVector::zero(circuit.n_qubits());
    for gate in &circuit.ops()[..start] {
        prefix.apply(gate)?;
    }
    Ok((start, prefix))
}

fn run_shot_range(
    circuit: &Circuit,
    post_select: &PostSelection,
    start: usize,
    prefix: &StateVector,
    shots: std::ops::Range<u64>,
    seed: u64,
) -> Vec<Option<u64>> {
    shots
        .into_par_iter()
        .map(|shot| {
            let mut rng = shot_rng(seed, shot);
            run_trajectory(circuit, post_select, start, prefix.clone(), &mut rng)
        })
        .collect()
}

fn tally(outcomes: impl IntoIterator<Item = Option<u64>>, shots: u64) -> Result<SampleCounts> {
    let mut counts = BTreeMap::new();
    let mut accepted = 0;
    for record in outcomes.into_iter().flatten() {
        *counts.entry(record).or_insert(0) += 1;
        accepted += 1;
    }
    let rejected = shots - accepted;
    if accepted == 0 {
        return Err(QbmError::EmptySample { shots, rejected });
    }
    Ok(SampleCounts {
        counts,
        accepted,
        rejected,
    })
}

/// Executes `shots` independent trajectories with random measurement collapse,
/// discarding shots that fail post-selection.
///
/// Shots run in parallel; each draws from its own stream `(seed, shot index)`
/// and results are reduced in shot order, so output depends only on the inputs.
pub fn run_sampled(
    circuit: &Circuit,
    post_select: &PostSelection,
    shots: u64,
    seed: u64,
) -> Result<SampleCounts> {
    if shots == 0 {
        return Err(QbmError::ZeroShots);
    }
    let (start, prefix) = unitary_prefix(circuit)?;
    tally(run_shot_range(circuit, post_select, start, &prefix, 0..shots, seed), shots)
}

/// Runs shots `0, 1, 2, …` until `target` of them pass post-selection or
/// `max_shots` have been spent. Shots past the `target`-th accepted one are
/// dropped, so a smaller target always yields a prefix of a larger one.
pub fn run_until_accepted(
    circuit: &Circuit,
    post_select: &PostSelection,
    target: u64,
    max_shots: u64,
    seed: u64,
) -> Result<SampleCounts> {
    if target == 0 || max_shots == 0 {
        return Err(QbmError::ZeroShots);
    }
    let (start, prefix) = unitary_prefix(circuit)?;
    let mut outcomes: Vec<Option<u64>> = Vec::new();
    let mut accepted = 0u64;
    while accepted < target && (outcomes.len() as u64) < max_shots {
        let done = outcomes.len() as u64;
        let rate = if done == 0 { 1.0 } else { (accepted.max(1) as f64) / done as f64 };
        let wanted = ((target - accepted) as f64 / rate * 1.1).ceil() as u64 + 64;
        let end = done.saturating_add(wanted).min(max_shots);
        let batch = run_shot_range(circuit, post_select, start, &prefix, done..end, seed);
        for outcome in batch {
            if accepted == target {
                break;
            }
            accepted += outcome.is_some() as u64;
            outcomes.push(outcome);
        }
    }
    if accepted < target {
        log::warn!("shot budget {max_shots} exhausted with {accepted} of {target} accepted shots");
    }
    let shots = outcomes.len() as u64;
    tally(outcomes, shots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Complex64, re: f64) -> bool {
        (a - Complex64::new(re, 0.0)).norm() < 1e-12
    }

    #[test]
    fn ry_pi_flips_zero() {
        let s = apply_gate(&StateVector::zero(1), &Gate::Ry { target: 0, angle: PI }).unwrap();
        assert!(close(s.amplitudes()[0], 0.0));
        assert!(close(s.amplitudes()[1], 1.0));
    }

    #[test]
    fn ry_half_pi_gives_plus() {
        let s = apply_gate(&StateVector::zero(1), &Gate::Ry { target: 0, angle: PI / 2.0 }).unwrap();
        let h = 0.5f64.sqrt();
        assert!(close(s.amplitudes()[0], h));
        assert!(close(s.amplitudes()[1], h));
    }

    #[test]
    fn unsatisfied_double_control_is_identity() {
        let g = Gate::DoublyControlledRy {
            controls: [0, 1],
            control_states: [true, true],
            target: 2,
            angle: 1.234,
        };
        let s = apply_gate(&StateVector::zero(3), &g).unwrap();
        assert_eq!(s, StateVector::zero(3));
    }

    #[test]
    fn invalid_gates_are_rejected() {
        let mut c = Circuit::new(2);
        assert!(matches!(
            c.push(Gate::X { target: 2 }),
            Err(QbmError::QubitOutOfRange { index: 2, qubits: 2 })
        ));
        assert!(matches!(
            c.push(Gate::Cnot { control: 1, target: 1 }),
            Err(QbmError::RepeatedQubit(1))
        ));
        assert!(matches!(
            c.push(Gate::Ry { target: 0, angle: f64::NAN }),
            Err(QbmError::NonFiniteAngle(_))
        ));
        assert!(StateVector::zero(1).apply(&Gate::X { target: 3 }).is_err());
    }

    #[test]
    fn projection_cases() {
        let plus = apply_gate(&StateVector::zero(1), &Gate::Ry { target: 0, angle: PI / 2.0 }).unwrap();
        let (s, p) = project_and_renormalize(&plus, 0, true).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!(close(s.amplitudes()[1], 1.0));

        let (s, p) = project_and_renormalize(&StateVector::zero(1), 0, false).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(s, StateVector::zero(1));

        assert!(matches!(
            project_and_renormalize(&StateVector::zero(1), 0, true),
            Err(QbmError::PostSelectionImpossible { .. })
        ));
        assert!(project_and_renormalize(&StateVector::zero(1), 4, true).is_err());
    }

    #[test]
    fn measure_and_reset_cases() {
        let one = apply_gate(&StateVector::zero(1), &Gate::X { target: 0 }).unwrap();
        let (s, p) = measure_and_reset(&one, 0, true).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(s, StateVector::zero(1));

        let plus = apply_gate(&StateVector::zero(1), &Gate::Ry { target: 0, angle: PI / 2.0 }).unwrap();
        let (s, p) = measure_and_reset(&plus, 0, true).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!(close(s.amplitudes()[0], 1.0));

        assert!(measure_and_reset(&StateVector::zero(1), 0, true).is_err());
    }

    #[test]
    fn run_exact_basics() {
        let (s, p) = run_exact(&Circuit::new(1), &PostSelection::new()).unwrap();
        assert_eq!(s, StateVector::zero(1));
        assert_eq!(p, 1.0);

        let mut c = Circuit::new(1);
        c.push(Gate::Ry { target: 0, angle: PI / 2.0 }).unwrap();
        let m = c.push(Gate::Measure { qubit: 0 }).unwrap();
        let (s, p) = run_exact(&c, &PostSelection::from([(m, true)])).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!(close(s.amplitudes()[1], 1.0));
    }

    #[test]
    fn run_exact_rejects_reset_of_superposed_qubit() {
        let mut c = Circuit::new(1);
        c.push(Gate::Ry { target: 0, angle: 1.0 }).unwrap();
        c.push(Gate::Reset { qubit: 0 }).unwrap();
        assert_eq!(run_exact(&c, &PostSelection::new()), Err(QbmError::NonPureReset(0)));
    }

    #[test]
    fn sampled_deterministic_circuit() {
        let mut c = Circuit::new(2);
        c.push(Gate::Ry { target: 0, angle: 0.0 }).unwrap();
        c.push(Gate::Ry { target: 1, angle: 0.0 }).unwrap();
        c.push(Gate::Measure { qubit: 0 }).unwrap();
        c.push(Gate::Measure { qubit: 1 }).unwrap();
        let r = run_sampled(&c, &PostSelection::new(), 100, 7).unwrap();
        assert_eq!(r.counts, BTreeMap::from([(0, 100)]));
        assert_eq!(r.rejected, 0);
    }

    #[test]
    fn sampled_fair_coin() {
        let mut c = Circuit::new(1);
        c.push(Gate::Ry { target: 0, angle: PI / 2.0 }).unwrap();
        c.push(Gate::Measure { qubit: 0 }).unwrap();
        let r = run_sampled(&c, &PostSelection::new(), 100_000, 11).unwrap();
        let freq = r.counts[&1] as f64 / 1e5;
        // 6σ of a fair binomial at 1e5 trials is ≈ 0.0095.
        assert!((freq - 0.5).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn sampled_impossible_post_selection() {
        let mut c = Circuit::new(1);
        let m = c.push(Gate::Measure { qubit: 0 }).unwrap();
        let err = run_sampled(&c, &PostSelection::from([(m, true)]), 100, 0).unwrap_err();
        assert_eq!(err, QbmError::EmptySample { shots: 100, rejected: 100 });
        assert_eq!(run_sampled(&c, &PostSelection::new(), 0, 0), Err(QbmError::ZeroShots));
    }

    #[test]
    fn sampled_runs_are_reproducible() {
        let mut c = Circuit::new(2);
        c.push(Gate::Ry { target: 0, angle: 1.1 }).unwrap();
        c.push(Gate::ControlledRy { control: 0, control_state: true, target: 1, angle: 2.0 }).unwrap();
        let m = c.push(Gate::Measure { qubit: 1 }).unwrap();
        c.push(Gate::Reset { qubit: 1 }).unwrap();
        c.push(Gate::Measure { qubit: 0 }).unwrap();
        let ps = PostSelection::from([(m, true)]);
        let a = run_sampled(&c, &ps, 5000, 3).unwrap();
        let b = run_sampled(&c, &ps, 5000, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.rejected > 0);
        // Only shots with qubit 0 set can pass.
        assert_eq!(a.counts.keys().copied().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn accepted_target_runs_are_nested() {
        let mut c = Circuit::new(2);
        c.push(Gate::Ry { target: 0, angle: 1.1 }).unwrap();
        c.push(Gate::Ry { target: 1, angle: 2.0 }).unwrap();
        let m = c.push(Gate::Measure { qubit: 1 }).unwrap();
        c.push(Gate::Measure { qubit: 0 }).unwrap();
        let ps = PostSelection::from([(m, true)]);
        let small = run_until_accepted(&c, &ps, 300, 1 << 20, 7).unwrap();
        let large = run_until_accepted(&c, &ps, 900, 1 << 20, 7).unwrap();
        assert_eq!(small.accepted, 300);
        assert_eq!(large.accepted, 900);
        let direct = run_sampled(&c, &ps, small.shots(), 7).unwrap();
        assert_eq!(direct, small);
        assert!(large.shots() > small.shots());
        let capped = run_until_accepted(&c, &ps, 900, 50, 7).unwrap();
        assert_eq!(capped.shots(), 50);
    }
}
