//! Decomposition of controlled rotations into one-qubit rotations, CNOT/CZ
//! and X, plus gate-count, width/depth and shot-budget reports.
//!
//! A controlled rotation is `R(θ/2)·CNOT·R(−θ/2)·CNOT` on the target (CZ in
//! place of CNOT for x-rotations). A doubly controlled rotation is three
//! controlled rotations with half angles interleaved with two CNOTs between
//! the controls, giving 8 two-qubit gates and 6 rotations. Controls on |0⟩
//! are realized by conjugating that control with X.

use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use crate::error::{QbmError, Result};
use crate::model::{build_circuit, AncillaLayout, QbmCircuit, QbmParameters, QbmShape, Regulator};
use crate::optimizer::NodeMode;
use crate::pauli::DenseMatrix;
use crate::sim::{Circuit, Gate, PostSelection};

/// Default multiplier in the shot heuristic `C·2^n`.
pub const DEFAULT_SHOT_CONSTANT: u64 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Gate set of a backend offering one-qubit rotations, CNOT, CZ and X.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PhysicalGate {
    Rotation { axis: Axis, qubit: usize, angle: f64 },
    Cnot { control: usize, target: usize },
    Cz { a: usize, b: usize },
    X { qubit: usize },
}

impl PhysicalGate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            PhysicalGate::Rotation { qubit, .. } | PhysicalGate::X { qubit } => vec![qubit],
            PhysicalGate::Cnot { control, target } => vec![control, target],
            PhysicalGate::Cz { a, b } => vec![a, b],
        }
    }
}

fn conjugate_zero_controls(controls: &[(usize, bool)], body: Vec<PhysicalGate>) -> Vec<PhysicalGate> {
    let flips: Vec<PhysicalGate> = controls
        .iter()
        .filter(|(_, state)| !state)
        .map(|&(qubit, _)| PhysicalGate::X { qubit })
        .collect();
    let mut out = flips.clone();
    out.extend(body);
    out.extend(flips);
    out
}

fn controlled_rotation_core(axis: Axis, angle: f64, control: usize, target: usize) -> Vec<PhysicalGate> {
    let entangler = match axis {
        Axis::X => PhysicalGate::Cz { a: control, b: target },
        Axis::Y | Axis::Z => PhysicalGate::Cnot { control, target },
    };
    vec![
        PhysicalGate::Rotation {
            axis,
            qubit: target,
            angle: angle / 2.0,
        },
        entangler,
        PhysicalGate::Rotation {
            axis,
            qubit: target,
            angle: -angle / 2.0,
        },
        entangler,
    ]
}

/// Rotation about `axis` on `target`, applied when `control` reads `control_state`.
pub fn decompose_controlled_rotation(
    axis: Axis,
    angle: f64,
    control: usize,
    control_state: bool,
    target: usize,
) -> Vec<PhysicalGate> {
    conjugate_zero_controls(
        &[(control, control_state)],
        controlled_rotation_core(axis, angle, control, target),
    )
}

/// Controlled Ry(θ) as Ry(θ/2)–CNOT–Ry(−θ/2)–CNOT.
pub fn decompose_cry(angle: f64, control: usize, target: usize) -> Vec<PhysicalGate> {
    decompose_controlled_rotation(Axis::Y, angle, control, true, target)
}

/// Rotation on `target` applied when both controls read their states.
pub fn decompose_doubly_controlled_rotation(
    axis: Axis,
    angle: f64,
    controls: [usize; 2],
    control_states: [bool; 2],
    target: usize,
) -> Vec<PhysicalGate> {
    let [c1, c2] = controls;
    let link = PhysicalGate::Cnot {
        control: c1,
        target: c2,
    };
    let mut body = controlled_rotation_core(axis, angle / 2.0, c2, target);
    body.push(link);
    body.extend(controlled_rotation_core(axis, -angle / 2.0, c2, target));
    body.push(link);
    body.extend(controlled_rotation_core(axis, angle / 2.0, c1, target));
    conjugate_zero_controls(&[(c1, control_states[0]), (c2, control_states[1])], body)
}

pub fn decompose_ccry(angle: f64, controls: [usize; 2], control_states: [bool; 2], target: usize) -> Vec<PhysicalGate> {
    decompose_doubly_controlled_rotation(Axis::Y, angle, controls, control_states, target)
}

fn apply_physical(state: &mut [Complex64], gate: &PhysicalGate) {
    match *gate {
        PhysicalGate::Rotation { axis, qubit, angle } => {
            let (s, c) = (angle / 2.0).sin_cos();
            let i = Complex64::new(0.0, 1.0);
            // Row-major 2×2 rotation matrix.
            let m = match axis {
                Axis::X => [Complex64::new(c, 0.0), -i * s, -i * s, Complex64::new(c, 0.0)],
                Axis::Y => [
                    Complex64::new(c, 0.0),
                    Complex64::new(-s, 0.0),
                    Complex64::new(s, 0.0),
                    Complex64::new(c, 0.0),
                ],
                Axis::Z => [
                    Complex64::from_polar(1.0, -angle / 2.0),
                    Complex64::default(),
                    Complex64::default(),
                    Complex64::from_polar(1.0, angle / 2.0),
                ],
            };
            let bit = 1usize << qubit;
            for k in 0..state.len() {
                if k & bit == 0 {
                    let (a0, a1) = (state[k], state[k | bit]);
                    state[k] = m[0] * a0 + m[1] * a1;
                    state[k | bit] = m[2] * a0 + m[3] * a1;
                }
            }
        }
        PhysicalGate::Cnot { control, target } => {
            let (cb, tb) = (1usize << control, 1usize << target);
            for k in 0..state.len() {
                if k & cb != 0 && k & tb == 0 {
                    state.swap(k, k | tb);
                }
            }
        }
        PhysicalGate::Cz { a, b } => {
            let mask = (1usize << a) | (1usize << b);
            for (k, amp) in state.iter_mut().enumerate() {
                if k & mask == mask {
                    *amp = -*amp;
                }
            }
        }
        PhysicalGate::X { qubit } => {
            let bit = 1usize << qubit;
            for k in 0..state.len() {
                if k & bit == 0 {
                    state.swap(k, k | bit);
                }
            }
        }
    }
}

/// Unitary of a gate sequence on `n_qubits` qubits (column k = image of |k⟩).
pub fn unitary(gates: &[PhysicalGate], n_qubits: usize) -> DenseMatrix {
    let dim = 1usize << n_qubits;
    let mut out = DenseMatrix::zeros(dim);
    for col in 0..dim {
        let mut state = vec![Complex64::default(); dim];
        state[col] = Complex64::new(1.0, 0.0);
        for g in gates {
            apply_physical(&mut state, g);
        }
        for (row, amp) in state.into_iter().enumerate() {
            out.data[row * dim + col] = amp;
        }
    }
    out
}

/// Largest elementwise deviation between `a` and `e^{iφ}·b` for the best global phase φ.
pub fn distance_up_to_phase(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    assert_eq!(a.dim, b.dim, "matrix dimensions");
    let overlap: Complex64 = a.data.iter().zip(&b.data).map(|(x, y)| y.conj() * x).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - phase * y).norm())
        .fold(0.0, f64::max)
}

fn to_sim_gate(g: &PhysicalGate) -> Result<Gate> {
    Ok(match *g {
        PhysicalGate::Rotation {
            axis: Axis::Y,
            qubit,
            angle,
        } => Gate::Ry { target: qubit, angle },
        PhysicalGate::Rotation {
            axis: Axis::Z,
            qubit,
            angle,
        } => Gate::Rz { target: qubit, angle },
        PhysicalGate::Rotation { axis: Axis::X, .. } => {
            return Err(QbmError::InvalidConfig("the simulator has no Rx gate".into()))
        }
        PhysicalGate::Cnot { control, target } => Gate::Cnot { control, target },
        PhysicalGate::Cz { a, b } => Gate::Cz { a, b },
        PhysicalGate::X { qubit } => Gate::X { target: qubit },
    })
}

/// Physical expansion of one simulator gate; `None` for measurement and reset.
pub fn expand_gate(g: &Gate) -> Option<Vec<PhysicalGate>> {
    Some(match *g {
        Gate::Ry { target, angle } => vec![PhysicalGate::Rotation {
            axis: Axis::Y,
            qubit: target,
            angle,
        }],
        Gate::Rz { target, angle } => vec![PhysicalGate::Rotation {
            axis: Axis::Z,
            qubit: target,
            angle,
        }],
        Gate::X { target } => vec![PhysicalGate::X { qubit: target }],
        Gate::Cnot { control, target } => vec![PhysicalGate::Cnot { control, target }],
        Gate::Cz { a, b } => vec![PhysicalGate::Cz { a, b }],
        Gate::ControlledRy {
            control,
            control_state,
            target,
            angle,
        } => decompose_controlled_rotation(Axis::Y, angle, control, control_state, target),
        Gate::DoublyControlledRy {
            controls,
            control_states,
            target,
            angle,
        } => decompose_ccry(angle, controls, control_states, target),
        Gate::Measure { .. } | Gate::Reset { .. } => return None,
    })
}

/// Rewrites every controlled rotation of `built` into the physical gate set,
/// carrying post-selection requirements over to the new op indices.
pub fn decompose_qbm_circuit(built: &QbmCircuit) -> Result<QbmCircuit> {
    let mut circuit = Circuit::new(built.circuit.n_qubits());
    let mut post_select = PostSelection::new();
    for (idx, g) in built.circuit.ops().iter().enumerate() {
        match expand_gate(g) {
            Some(seq) => {
                for pg in &seq {
                    circuit.push(to_sim_gate(pg)?)?;
                }
            }
            None => {
                let new_idx = circuit.push(*g)?;
                if let Some(&outcome) = built.post_select.get(&idx) {
                    post_select.insert(new_idx, outcome);
                }
            }
        }
    }
    Ok(QbmCircuit {
        shape: built.shape,
        circuit,
        post_select,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalGateCounts {
    pub two_qubit: usize,
    pub one_qubit_rotations: usize,
    pub x_gates: usize,
    /// Longest chain of gates sharing qubits.
    pub depth: usize,
    pub width: usize,
}

impl PhysicalGateCounts {
    pub fn total(&self) -> usize {
        self.two_qubit + self.one_qubit_rotations + self.x_gates
    }
}

/// Counts and depth of a physical sequence. Depth only lets gates on
/// disjoint qubits share a layer; no algebraic merging is attempted.
pub fn count_gates(gates: &[PhysicalGate], width: usize) -> PhysicalGateCounts {
    let mut counts = PhysicalGateCounts {
        width,
        ..PhysicalGateCounts::default()
    };
    let mut frontier = vec![0usize; width];
    for g in gates {
        match g {
            PhysicalGate::Rotation { .. } => counts.one_qubit_rotations += 1,
            PhysicalGate::Cnot { .. } | PhysicalGate::Cz { .. } => counts.two_qubit += 1,
            PhysicalGate::X { .. } => counts.x_gates += 1,
        }
        let qubits = g.qubits();
        let level = qubits.iter().map(|&q| frontier[q]).max().unwrap_or(0) + 1;
        for q in qubits {
            frontier[q] = level;
        }
    }
    counts.depth = frontier.into_iter().max().unwrap_or(0);
    counts
}

/// Physical expansion of all unitary ops of a circuit, measurements and resets
/// acting as barriers on their qubit only.
pub fn physical_sequence(circuit: &Circuit) -> Vec<PhysicalGate> {
    circuit.ops().iter().filter_map(expand_gate).flatten().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntanglingStageCounts {
    /// Counts with every doubly controlled gate treated as |11⟩-controlled.
    pub idealized: PhysicalGateCounts,
    /// X gates added by the |0⟩-controls of the mixed-polarity layers.
    pub polarity_x_gates: usize,
}

fn entangling_stage(shape: &QbmShape, idealized: bool) -> Vec<PhysicalGate> {
    let mut gates = Vec::new();
    for i in 0..shape.n_visible {
        for j in 0..shape.n_hidden {
            let controls = [shape.visible_qubit(i), shape.hidden_qubit(j)];
            for states in [[false, false], [false, true], [true, false], [true, true]] {
                let states = if idealized { [true, true] } else { states };
                gates.extend(decompose_ccry(1.0, controls, states, shape.ancilla_qubit(i, j)));
            }
        }
    }
    gates
}

/// Decomposed cost of all `nm` entangling layers.
pub fn count_entangling_stage(shape: &QbmShape) -> EntanglingStageCounts {
    let idealized = count_gates(&entangling_stage(shape, true), shape.n_qubits());
    let actual = count_gates(&entangling_stage(shape, false), shape.n_qubits());
    EntanglingStageCounts {
        idealized,
        polarity_x_gates: actual.x_gates,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub n_visible: usize,
    pub n_hidden: usize,
    pub layout: AncillaLayout,
    pub node: NodeMode,
    pub width: usize,
    pub entangling_stage: EntanglingStageCounts,
    /// Whole sampling circuit after decomposition, including the bias layer
    /// and the X conjugations.
    pub full_circuit: PhysicalGateCounts,
    pub mid_circuit_measurements: usize,
    pub resets: usize,
    pub parameter_count: usize,
    /// Degrees of freedom of a general real n-qubit state, 2^n − 1.
    pub dof_count: u64,
    pub shot_constant: u64,
    pub recommended_shots: u64,
}

pub fn resource_report(shape: &QbmShape, node: NodeMode) -> Result<ResourceReport> {
    resource_report_with(shape, node, DEFAULT_SHOT_CONSTANT)
}

pub fn resource_report_with(shape: &QbmShape, node: NodeMode, shot_constant: u64) -> Result<ResourceReport> {
    let n = shape.n_visible;
    let params = QbmParameters::zeros(shape, node == NodeMode::Phase);
    let built = build_circuit(shape, &params, Regulator::NONE)?;
    let full_circuit = count_gates(&physical_sequence(&built.circuit), shape.n_qubits());
    let resets = built
        .circuit
        .ops()
        .iter()
        .filter(|g| matches!(g, Gate::Reset { .. }))
        .count();
    let mid_circuit_measurements = if shape.layout == AncillaLayout::SingleReused {
        built.post_select.len()
    } else {
        0
    };
    let dof_count = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    let recommended_shots = 1u64
        .checked_shl(n as u32)
        .and_then(|s| s.checked_mul(shot_constant))
        .unwrap_or(u64::MAX);
    Ok(ResourceReport {
        n_visible: n,
        n_hidden: shape.n_hidden,
        layout: shape.layout,
        node,
        width: shape.n_qubits(),
        entangling_stage: count_entangling_stage(shape),
        full_circuit,
        mid_circuit_measurements,
        resets,
        parameter_count: params.n_params(),
        dof_count,
        shot_constant,
        recommended_shots,
    })
}
