//! Boltzmann-machine parameters, circuit construction and the brute-force
//! distribution oracle.
//!
//! Eigenvalue convention: a qubit reading 0 has σz-eigenvalue +1, reading 1
//! has eigenvalue −1. Visible qubit `i` is bit `i` of a visible index and
//! hidden qubit `j` is bit `j` of a hidden index.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{QbmError, Result};
use crate::sim::{self, Circuit, Gate, PostSelection, SampleCounts};
use crate::wavefunction::VisibleDistribution;

/// Largest `n + m` enumerated by [`exact_distribution`].
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// σz eigenvalue of bit `i` of `bits`.
#[inline]
pub fn spin(bits: u64, i: usize) -> f64 {
    if (bits >> i) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AncillaLayout {
    /// One ancilla per visible–hidden pair, all measured at the end.
    OnePerPair,
    /// A single ancilla measured and reset after every entangling layer.
    SingleReused,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QbmShape {
    pub n_visible: usize,
    pub n_hidden: usize,
    pub layout: AncillaLayout,
}

impl QbmShape {
    pub fn new(n_visible: usize, n_hidden: usize, layout: AncillaLayout) -> Result<Self> {
        if n_visible == 0 || n_hidden == 0 {
            return Err(QbmError::ShapeMismatch(format!(
                "layers must be nonempty, got ({n_visible}, {n_hidden})"
            )));
        }
        if n_visible > 63 || n_hidden > 63 {
            return Err(QbmError::CapExceeded {
                qubits: n_visible.max(n_hidden),
                cap: 63,
            });
        }
        Ok(QbmShape {
            n_visible,
            n_hidden,
            layout,
        })
    }

    pub fn n_pairs(&self) -> usize {
        self.n_visible * self.n_hidden
    }

    pub fn n_ancillas(&self) -> usize {
        match self.layout {
            AncillaLayout::OnePerPair => self.n_pairs(),
            AncillaLayout::SingleReused => 1,
        }
    }

    /// Register width: `n + m + nm` or `n + m + 1`.
    pub fn n_qubits(&self) -> usize {
        self.n_visible + self.n_hidden + self.n_ancillas()
    }

    pub fn visible_qubit(&self, i: usize) -> usize {
        i
    }

    pub fn hidden_qubit(&self, j: usize) -> usize {
        self.n_visible + j
    }

    pub fn ancilla_qubit(&self, i: usize, j: usize) -> usize {
        let base = self.n_visible + self.n_hidden;
        match self.layout {
            AncillaLayout::OnePerPair => base + i * self.n_hidden + j,
            AncillaLayout::SingleReused => base,
        }
    }
}

/// Trainable parameters. `w` is stored row-major, `w[i * m + j]` = w_ij.
/// `gamma`/`delta` are present exactly when the phase node is in use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QbmParameters {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub w: Vec<f64>,
    pub c: Vec<f64>,
    pub d: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl QbmParameters {
    pub fn zeros(shape: &QbmShape, phase: bool) -> Self {
        let n = shape.n_visible;
        QbmParameters {
            a: vec![0.0; n],
            b: vec![0.0; shape.n_hidden],
            w: vec![0.0; shape.n_pairs()],
            c: vec![0.0; n],
            d: 0.0,
            gamma: phase.then(|| vec![0.0; n]),
            delta: phase.then_some(0.0),
        }
    }

    pub fn has_phase(&self) -> bool {
        self.gamma.is_some()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.b.len() + j]
    }

    pub fn validate(&self, shape: &QbmShape) -> Result<()> {
        let n = shape.n_visible;
        let m = shape.n_hidden;
        let check = |name: &str, len: usize, want: usize| {
            if len == want {
                Ok(())
            } else {
                Err(QbmError::ShapeMismatch(format!("{name} has length {len}, expected {want}")))
            }
        };
        check("a", self.a.len(), n)?;
        check("b", self.b.len(), m)?;
        check("w", self.w.len(), n * m)?;
        check("c", self.c.len(), n)?;
        match (&self.gamma, self.delta) {
            (Some(g), Some(_)) => check("gamma", g.len(), n)?,
            (None, None) => {}
            _ => {
                return Err(QbmError::ShapeMismatch(
                    "gamma and delta must be given together".into(),
                ))
            }
        }
        if let Some(bad) = self.flat().into_iter().find(|x| !x.is_finite()) {
            return Err(QbmError::NonFiniteParameter(bad));
        }
        Ok(())
    }

    /// Canonical flat order: a, b, w, c, d, then gamma, delta if present.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        out.extend(&self.a);
        out.extend(&self.b);
        out.extend(&self.w);
        out.extend(&self.c);
        out.push(self.d);
        if let (Some(g), Some(delta)) = (&self.gamma, self.delta) {
            out.extend(g);
            out.push(delta);
        }
        out
    }

    /// Inverse of [`flat`](Self::flat), using `self` as the layout template.
    pub fn with_flat(&self, values: &[f64]) -> Self {
        assert_eq!(values.len(), self.n_params(), "flat parameter length");
        let (n, m) = (self.a.len(), self.b.len());
        let mut it = values.iter().copied();
        let mut take = |k: usize| it.by_ref().take(k).collect::<Vec<_>>();
        let a = take(n);
        let b = take(m);
        let w = take(n * m);
        let c = take(n);
        let d = take(1)[0];
        let (gamma, delta) = if self.has_phase() {
            (Some(take(n)), Some(take(1)[0]))
        } else {
            (None, None)
        };
        QbmParameters {
            a,
            b,
            w,
            c,
            d,
            gamma,
            delta,
        }
    }

    pub fn n_params(&self) -> usize {
        let n = self.a.len();
        let base = n + self.b.len() + self.w.len() + n + 1;
        if self.has_phase() {
            base + n + 1
        } else {
            base
        }
    }

    /// `a`, `b`, `w` divided by `k`; sign/phase parameters untouched.
    pub fn scaled(&self, reg: Regulator) -> Self {
        let k = reg.value();
        let div = |v: &[f64]| v.iter().map(|x| x / k).collect::<Vec<_>>();
        QbmParameters {
            a: div(&self.a),
            b: div(&self.b),
            w: div(&self.w),
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegulatorMode {
    Off,
    Auto,
    Fixed(f64),
}

/// Divisor `k ≥ 1` applied to `a`, `b` and `w` before the circuit is built.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Regulator(f64);

impl Regulator {
    pub const NONE: Regulator = Regulator(1.0);

    pub fn new(k: f64) -> Result<Self> {
        if !(k >= 1.0) || !k.is_finite() {
            return Err(QbmError::InvalidRegulator(k));
        }
        Ok(Regulator(k))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Regulator {
    fn default() -> Self {
        Regulator::NONE
    }
}

/// Auto mode uses `k = max(1, Σ|w_ij|)`.
pub fn regulator_for(params: &QbmParameters, mode: RegulatorMode) -> Result<Regulator> {
    match mode {
        RegulatorMode::Off => Ok(Regulator::NONE),
        RegulatorMode::Auto => Regulator::new(params.w.iter().map(|w| w.abs()).sum::<f64>().max(1.0)),
        RegulatorMode::Fixed(k) => Regulator::new(k),
    }
}

/// Ry angle that leaves a qubit in |1⟩ with probability e^{−p}/(e^{p}+e^{−p}).
///
/// tan(θ/2) = e^{−p}, which stays accurate at both tails.
pub fn linear_angle(p: f64) -> Result<f64> {
    if !p.is_finite() {
        return Err(QbmError::NonFiniteParameter(p));
    }
    Ok(2.0 * (-p).exp().atan())
}

fn angle_for_probability(log_p: f64) -> f64 {
    // sin²(θ/2) = e^{log_p}, with the complement taken through expm1.
    let p = log_p.exp();
    let q = -log_p.exp_m1();
    2.0 * p.sqrt().atan2(q.sqrt())
}

/// `(θ⁺, θ⁻)` with sin²(θ±/2) = e^{±w}/e^{|w|}. θ⁺ is used for even-parity
/// control states, θ⁻ for odd parity.
pub fn coupling_angles(w: f64) -> Result<(f64, f64)> {
    if !w.is_finite() {
        return Err(QbmError::NonFiniteParameter(w));
    }
    Ok((
        angle_for_probability(w - w.abs()),
        angle_for_probability(-w - w.abs()),
    ))
}

/// A built circuit together with its post-selection requirements.
#[derive(Clone, Debug, PartialEq)]
pub struct QbmCircuit {
    pub shape: QbmShape,
    pub circuit: Circuit,
    pub post_select: PostSelection,
}

impl QbmCircuit {
    /// Visible–hidden joint distribution after post-selection, keyed by
    /// `v | h << n`.
    pub fn joint_distribution(&self) -> Result<(BTreeMap<u64, f64>, f64)> {
        let (state, success) = sim::run_exact(&self.circuit, &self.post_select)?;
        let data: Vec<usize> = (0..self.shape.n_visible + self.shape.n_hidden).collect();
        Ok((state.marginal(&data), success))
    }

    /// Visible marginal of the simulated state and the post-selection success probability.
    pub fn exact_visible(&self) -> Result<(VisibleDistribution, f64)> {
        let (state, success) = sim::run_exact(&self.circuit, &self.post_select)?;
        let visible: Vec<usize> = (0..self.shape.n_visible).collect();
        Ok((
            VisibleDistribution::exact(self.shape.n_visible, state.marginal(&visible)),
            success,
        ))
    }

    /// Shot-sampled visible distribution. The first `n` recorded bits of each
    /// shot are the visible readout.
    pub fn sample_visible(&self, shots: u64, seed: u64) -> Result<(VisibleDistribution, SampleCounts)> {
        let raw = sim::run_sampled(&self.circuit, &self.post_select, shots, seed)?;
        Ok((self.visible_counts(&raw), raw))
    }

    /// Like [`QbmCircuit::sample_visible`] but stops once `target` shots pass
    /// post-selection (or `max_shots` are spent).
    pub fn sample_visible_accepted(
        &self,
        target: u64,
        max_shots: u64,
        seed: u64,
    ) -> Result<(VisibleDistribution, SampleCounts)> {
        let raw = sim::run_until_accepted(&self.circuit, &self.post_select, target, max_shots, seed)?;
        Ok((self.visible_counts(&raw), raw))
    }

    fn visible_counts(&self, raw: &SampleCounts) -> VisibleDistribution {
        let mask = (1u64 << self.shape.n_visible) - 1;
        let mut visible = BTreeMap::new();
        for (&key, &count) in &raw.counts {
            *visible.entry(key & mask).or_insert(0) += count;
        }
        VisibleDistribution::from_counts(self.shape.n_visible, visible)
    }
}

/// Builds the sampling circuit: single-qubit Ry layer for the biases, one
/// entangling layer of four doubly controlled Ry gates per visible–hidden
/// pair with its ancilla post-selected on |1⟩, then readout of the visible
/// and hidden registers.
pub fn build_circuit(shape: &QbmShape, params: &QbmParameters, reg: Regulator) -> Result<QbmCircuit> {
    params.validate(shape)?;
    let scaled = params.scaled(reg);
    let mut circuit = Circuit::new(shape.n_qubits());
    let mut post_select = PostSelection::new();

    for (i, &a) in scaled.a.iter().enumerate() {
        circuit.push(Gate::Ry {
            target: shape.visible_qubit(i),
            angle: linear_angle(a)?,
        })?;
    }
    for (j, &b) in scaled.b.iter().enumerate() {
        circuit.push(Gate::Ry {
            target: shape.hidden_qubit(j),
            angle: linear_angle(b)?,
        })?;
    }

    for i in 0..shape.n_visible {
        for j in 0..shape.n_hidden {
            let (plus, minus) = coupling_angles(scaled.weight(i, j))?;
            let controls = [shape.visible_qubit(i), shape.hidden_qubit(j)];
            let target = shape.ancilla_qubit(i, j);
            for states in [[false, false], [false, true], [true, false], [true, true]] {
                let angle = if states[0] == states[1] { plus } else { minus };
                circuit.push(Gate::DoublyControlledRy {
                    controls,
                    control_states: states,
                    target,
                    angle,
                })?;
            }
            if shape.layout == AncillaLayout::SingleReused {
                let m = circuit.push(Gate::Measure { qubit: target })?;
                post_select.insert(m, true);
                circuit.push(Gate::Reset { qubit: target })?;
            }
        }
    }

    if shape.layout == AncillaLayout::OnePerPair {
        for i in 0..shape.n_visible {
            for j in 0..shape.n_hidden {
                let m = circuit.push(Gate::Measure {
                    qubit: shape.ancilla_qubit(i, j),
                })?;
                post_select.insert(m, true);
            }
        }
    }

    for i in 0..shape.n_visible {
        circuit.push(Gate::Measure {
            qubit: shape.visible_qubit(i),
        })?;
    }
    for j in 0..shape.n_hidden {
        circuit.push(Gate::Measure {
            qubit: shape.hidden_qubit(j),
        })?;
    }

    Ok(QbmCircuit {
        shape: *shape,
        circuit,
        post_select,
    })
}

/// E(v, h) = Σ a_i v_i + Σ b_j h_j + Σ w_ij v_i h_j with regulated parameters.
pub fn energy_of(
    shape: &QbmShape,
    v: u64,
    h: u64,
    params: &QbmParameters,
    reg: Regulator,
) -> Result<f64> {
    params.validate(shape)?;
    let (n, m) = (shape.n_visible, shape.n_hidden);
    if v >> n != 0 || h >> m != 0 {
        return Err(QbmError::ShapeMismatch(format!(
            "configuration ({v:#b}, {h:#b}) does not fit a ({n}, {m}) machine"
        )));
    }
    Ok(raw_energy(n, m, v, h, &params.scaled(reg)))
}

fn raw_energy(n: usize, m: usize, v: u64, h: u64, p: &QbmParameters) -> f64 {
    let mut e = 0.0;
    for i in 0..n {
        e += p.a[i] * spin(v, i);
    }
    for j in 0..m {
        let hj = spin(h, j);
        e += p.b[j] * hj;
        for i in 0..n {
            e += p.w[i * m + j] * spin(v, i) * hj;
        }
    }
    e
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Brute-force p(v) = Σ_h exp(E(v,h)) / Z over all hidden configurations.
pub fn exact_distribution(
    shape: &QbmShape,
    params: &QbmParameters,
    reg: Regulator,
) -> Result<VisibleDistribution> {
    exact_distribution_capped(shape, params, reg, DEFAULT_ENUMERATION_CAP)
}

pub fn exact_distribution_capped(
    shape: &QbmShape,
    params: &QbmParameters,
    reg: Regulator,
    cap: usize,
) -> Result<VisibleDistribution> {
    params.validate(shape)?;
    let (n, m) = (shape.n_visible, shape.n_hidden);
    if n + m > cap {
        return Err(QbmError::CapExceeded { qubits: n + m, cap });
    }
    let scaled = params.scaled(reg);
    let log_marginals: Vec<f64> = (0..1u64 << n)
        .map(|v| {
            let energies: Vec<f64> = (0..1u64 << m).map(|h| raw_energy(n, m, v, h, &scaled)).collect();
            log_sum_exp(&energies)
        })
        .collect();
    let log_z = log_sum_exp(&log_marginals);
    let entries = log_marginals
        .iter()
        .enumerate()
        .map(|(v, lm)| (v as u64, (lm - log_z).exp()))
        .collect();
    Ok(VisibleDistribution::exact(n, entries))
}

/// Probability that every ancilla post-selection succeeds.
pub fn acceptance_rate_exact(shape: &QbmShape, params: &QbmParameters, reg: Regulator) -> Result<f64> {
    let built = build_circuit(shape, params, reg)?;
    let (_, success) = sim::run_exact(&built.circuit, &built.post_select)?;
    Ok(success)
}
