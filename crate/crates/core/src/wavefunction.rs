//! Trial wave functions a(v) = s(v)·√p(v) built from a visible distribution
//! and a sign (or phase) node.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QbmError, Result};
use crate::model::{spin, QbmParameters};

/// Bitstring for basis index `v`; character `i` is qubit `i`.
pub fn bitstring(v: u64, n: usize) -> String {
    (0..n).map(|i| if (v >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Inverse of [`bitstring`].
pub fn parse_bitstring(s: &str) -> Option<u64> {
    if s.is_empty() || s.len() > 63 {
        return None;
    }
    s.chars().enumerate().try_fold(0u64, |acc, (i, ch)| match ch {
        '0' => Some(acc),
        '1' => Some(acc | 1 << i),
        _ => None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Exact,
    Sampled { total_accepted: u64 },
}

/// Probabilities (exact) or counts (sampled) over visible bitstrings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisibleDistribution {
    n: usize,
    entries: BTreeMap<u64, f64>,
    kind: DistributionKind,
}

impl VisibleDistribution {
    /// Exact distribution; entries are renormalized to sum to one.
    pub fn exact(n: usize, entries: BTreeMap<u64, f64>) -> Self {
        let total: f64 = entries.values().sum();
        let entries = entries.into_iter().map(|(k, p)| (k, p / total)).collect();
        VisibleDistribution {
            n,
            entries,
            kind: DistributionKind::Exact,
        }
    }

    pub fn from_counts(n: usize, counts: BTreeMap<u64, u64>) -> Self {
        let total_accepted = counts.values().sum();
        VisibleDistribution {
            n,
            entries: counts.into_iter().map(|(k, c)| (k, c as f64)).collect(),
            kind: DistributionKind::Sampled { total_accepted },
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    /// Raw weights: probabilities for exact kind, counts for sampled kind.
    pub fn entries(&self) -> &BTreeMap<u64, f64> {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.values().all(|&w| w == 0.0)
    }

    fn total(&self) -> f64 {
        match self.kind {
            DistributionKind::Exact => 1.0,
            DistributionKind::Sampled { total_accepted } => total_accepted as f64,
        }
    }

    /// Probability (exact) or relative frequency (sampled) of `v`.
    pub fn probability(&self, v: u64) -> f64 {
        self.entries.get(&v).copied().unwrap_or(0.0) / self.total()
    }

    /// ½ Σ_v |p(v) − q(v)|.
    pub fn total_variation(&self, other: &VisibleDistribution) -> f64 {
        let keys: std::collections::BTreeSet<u64> =
            self.entries.keys().chain(other.entries.keys()).copied().collect();
        0.5 * keys
            .into_iter()
            .map(|v| (self.probability(v) - other.probability(v)).abs())
            .sum::<f64>()
    }

    pub fn max_abs_difference(&self, other: &VisibleDistribution) -> f64 {
        (0..1u64 << self.n)
            .map(|v| (self.probability(v) - other.probability(v)).abs())
            .fold(0.0, f64::max)
    }
}

/// Sparse amplitudes over visible bitstrings.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialWaveFunction {
    n: usize,
    amplitudes: BTreeMap<u64, Complex64>,
    normalized: bool,
}

impl TrialWaveFunction {
    pub fn from_map(n: usize, amplitudes: BTreeMap<u64, Complex64>) -> Self {
        TrialWaveFunction {
            n,
            amplitudes,
            normalized: false,
        }
    }

    pub fn from_dense(n: usize, amplitudes: &[Complex64]) -> Self {
        assert_eq!(amplitudes.len(), 1 << n, "dense amplitude length");
        Self::from_map(
            n,
            amplitudes
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm_sqr() > 0.0)
                .map(|(v, a)| (v as u64, *a))
                .collect(),
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn amplitude(&self, v: u64) -> Complex64 {
        self.amplitudes.get(&v).copied().unwrap_or_default()
    }

    /// Stored entries in index order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.amplitudes.iter().map(|(&v, &a)| (v, a))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(QbmError::DegenerateWaveFunction);
        }
        for a in self.amplitudes.values_mut() {
            *a /= norm;
        }
        self.normalized = true;
        Ok(self)
    }

    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); 1 << self.n];
        for (v, a) in self.iter() {
            out[v as usize] = a;
        }
        out
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.amplitudes.values().all(|a| a.im.abs() <= tol)
    }

    /// Export lines `<bitstring> <re> <im>`, one per basis state in index order.
    pub fn to_export_text(&self) -> String {
        let mut out = String::new();
        for v in 0..1u64 << self.n {
            let a = self.amplitude(v);
            let _ = writeln!(out, "{} {:e} {:e}", bitstring(v, self.n), a.re, a.im);
        }
        out
    }
}

/// s(v) = tanh(Σ c_i v_i + d).
pub fn sign_node(v: u64, c: &[f64], d: f64) -> f64 {
    node_argument(v, c, d).tanh()
}

fn node_argument(v: u64, c: &[f64], d: f64) -> f64 {
    c.iter().enumerate().map(|(i, ci)| ci * spin(v, i)).sum::<f64>() + d
}

/// s(v) = tanh(Σ (c_k + iγ_k) v_k + d + iδ).
pub fn phase_node(v: u64, c: &[f64], gamma: &[f64], d: f64, delta: f64) -> Result<Complex64> {
    let z = Complex64::new(node_argument(v, c, d), node_argument(v, gamma, delta));
    if z.cosh().norm() < 1e-14 {
        return Err(QbmError::DegenerateNode);
    }
    Ok(z.tanh())
}

/// Node value for `v` under whichever node the parameters carry.
pub fn node_value(v: u64, params: &QbmParameters) -> Result<Complex64> {
    match (&params.gamma, params.delta) {
        (Some(gamma), Some(delta)) => phase_node(v, &params.c, gamma, params.d, delta),
        _ => Ok(Complex64::new(sign_node(v, &params.c, params.d), 0.0)),
    }
}

/// a(v) = s(v)·√p̂(v), L2-normalized. Bitstrings missing from a sampled
/// distribution get amplitude zero.
pub fn assemble(dist: &VisibleDistribution, params: &QbmParameters) -> Result<TrialWaveFunction> {
    if dist.is_empty() {
        return Err(QbmError::EmptyDistribution);
    }
    if params.c.len() != dist.n_qubits() {
        return Err(QbmError::ShapeMismatch(format!(
            "sign node has {} inputs, distribution has {} qubits",
            params.c.len(),
            dist.n_qubits()
        )));
    }
    let mut amplitudes = BTreeMap::new();
    for &v in dist.entries().keys() {
        let p = dist.probability(v);
        if p > 0.0 {
            amplitudes.insert(v, node_value(v, params)? * p.sqrt());
        }
    }
    TrialWaveFunction::from_map(dist.n_qubits(), amplitudes).normalize()
}

fn pattern_matches(values: impl Iterator<Item = f64>, pattern: &[bool]) -> bool {
    // A pattern is matched up to a global sign; zero values match nothing.
    let signs: Vec<f64> = values.collect();
    let direct = signs.iter().zip(pattern).all(|(&s, &p)| if p { s > 0.0 } else { s < 0.0 });
    let flipped = signs.iter().zip(pattern).all(|(&s, &p)| if p { s < 0.0 } else { s > 0.0 });
    direct || flipped
}

/// Searches `grid^(n+1)` sign-node parameters `(c_1..c_n, d)` for one whose
/// signs reproduce `pattern` (indexed by basis state, `true` = positive) up to
/// a global sign. Returns the first hit.
pub fn find_sign_node_realization(pattern: &[bool], grid: &[f64]) -> Option<(Vec<f64>, f64)> {
    assert!(pattern.len().is_power_of_two(), "pattern covers 2^n states");
    let n = pattern.len().trailing_zeros() as usize;
    let dims = n + 1;
    let total = grid.len().checked_pow(dims as u32)?;
    let mut point = vec![0.0; dims];
    for flat in 0..total {
        let mut rem = flat;
        for slot in point.iter_mut() {
            *slot = grid[rem % grid.len()];
            rem /= grid.len();
        }
        let (c, d) = (&point[..n], point[n]);
        if pattern_matches((0..pattern.len() as u64).map(|v| sign_node(v, c, d)), pattern) {
            return Some((c.to_vec(), d));
        }
    }
    None
}

/// Reference node with one free parameter per basis state, s(v) = tanh(θ_v).
#[derive(Clone, Debug, PartialEq)]
pub struct FreeSignNode {
    pub theta: Vec<f64>,
}

impl FreeSignNode {
    /// Parameters realizing `pattern`.
    pub fn realizing(pattern: &[bool]) -> Self {
        FreeSignNode {
            theta: pattern.iter().map(|&p| if p { 1.0 } else { -1.0 }).collect(),
        }
    }

    pub fn value(&self, v: u64) -> f64 {
        self.theta[v as usize].tanh()
    }

    pub fn realizes(&self, pattern: &[bool]) -> bool {
        pattern.len() == self.theta.len()
            && pattern_matches((0..pattern.len() as u64).map(|v| self.value(v)), pattern)
    }
}
