//! Pauli-decomposed Hamiltonians.
//!
//! A Hamiltonian is a real-weighted sum of Pauli strings. Symbol `i` of a
//! string acts on visible qubit `i`, which is bit `i` of a basis-state index
//! (qubit 0 is the least significant bit). Strings are applied matrix-free:
//! a Pauli word maps each basis state to exactly one other basis state with a
//! phase in {±1, ±i}.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QbmError, Result};
use crate::wavefunction::TrialWaveFunction;

/// Coefficients with magnitude below this are dropped when a Hamiltonian is built.
pub const ZERO_COEFFICIENT: f64 = 1e-15;

/// Default qubit cap for dense expansion and exact diagonalization.
pub const DEFAULT_DENSE_CAP: usize = 12;

/// Krylov subspace size between Lanczos restarts.
const KRYLOV_DIMENSION: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// 2×2 matrix in row-major order.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

/// A tensor product of single-qubit Pauli operators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    ops: Vec<Pauli>,
    x_mask: u64,
    z_mask: u64,
    n_y: u32,
}

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        let mut x_mask = 0u64;
        let mut z_mask = 0u64;
        let mut n_y = 0;
        for (i, op) in ops.iter().enumerate() {
            match op {
                Pauli::I => {}
                Pauli::X => x_mask |= 1 << i,
                Pauli::Z => z_mask |= 1 << i,
                Pauli::Y => {
                    x_mask |= 1 << i;
                    z_mask |= 1 << i;
                    n_y += 1;
                }
            }
        }
        PauliString {
            ops,
            x_mask,
            z_mask,
            n_y,
        }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// Bits flipped by the string (positions holding X or Y).
    pub fn flip_mask(&self) -> u64 {
        self.x_mask
    }

    /// Image of basis state `b`: returns `(b', phase)` with `P|b⟩ = phase·|b'⟩`.
    #[inline]
    pub fn act(&self, b: u64) -> (u64, Complex64) {
        let sign = if (b & self.z_mask).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        let phase = match self.n_y % 4 {
            0 => Complex64::new(sign, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-sign, 0.0),
            _ => Complex64::new(0.0, -sign),
        };
        (b ^ self.x_mask, phase)
    }

    /// Matrix element `⟨v|P|v ⊕ flip⟩`, the only nonzero entry of row `v`.
    #[inline]
    pub fn row_element(&self, v: u64) -> (u64, Complex64) {
        let source = v ^ self.x_mask;
        let (_, phase) = self.act(source);
        (source, phase)
    }
}

impl FromStr for PauliString {
    type Err = QbmError;

    fn from_str(s: &str) -> Result<Self> {
        parse_string(s, 0)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in &self.ops {
            write!(f, "{}", op.as_char())?;
        }
        Ok(())
    }
}

fn parse_string(s: &str, line: usize) -> Result<PauliString> {
    let ops = s
        .chars()
        .map(|c| Pauli::from_char(c).ok_or(QbmError::IllegalSymbol { line, symbol: c }))
        .collect::<Result<Vec<_>>>()?;
    if ops.is_empty() {
        return Err(QbmError::MalformedLine { line });
    }
    if ops.len() > 63 {
        return Err(QbmError::CapExceeded {
            qubits: ops.len(),
            cap: 63,
        });
    }
    Ok(PauliString::new(ops))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub string: PauliString,
}

/// Real-weighted sum of Pauli strings over a fixed number of qubits.
///
/// Terms are kept in first-appearance order with duplicates merged, so
/// every sum over terms runs in a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliHamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl PauliHamiltonian {
    pub fn new(n_qubits: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(QbmError::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut merged: Vec<PauliTerm> = Vec::new();
        let mut index: HashMap<PauliString, usize> = HashMap::new();
        for (coefficient, string) in terms {
            if !coefficient.is_finite() {
                return Err(QbmError::NonFiniteCoefficient(coefficient));
            }
            if string.len() != n_qubits {
                return Err(QbmError::DimensionMismatch {
                    expected: n_qubits,
                    found: string.len(),
                });
            }
            match index.get(&string) {
                Some(&k) => merged[k].coefficient += coefficient,
                None => {
                    index.insert(string.clone(), merged.len());
                    merged.push(PauliTerm {
                        coefficient,
                        string,
                    });
                }
            }
        }
        merged.retain(|t| t.coefficient.abs() >= ZERO_COEFFICIENT);
        Ok(PauliHamiltonian {
            n_qubits,
            terms: merged,
        })
    }

    /// Parse the line format `<coefficient> <pauli string>`; `#` lines and
    /// blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n_qubits: Option<usize> = None;
        let mut raw = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = trimmed.split_whitespace();
            let (coef_tok, string_tok) = match (fields.next(), fields.next(), fields.next()) {
                (Some(c), Some(s), None) => (c, s),
                _ => return Err(QbmError::MalformedLine { line: line_no }),
            };
            let coefficient: f64 = coef_tok
                .parse()
                .map_err(|_| QbmError::MalformedCoefficient {
                    line: line_no,
                    token: coef_tok.to_string(),
                })?;
            if !coefficient.is_finite() {
                return Err(QbmError::MalformedCoefficient {
                    line: line_no,
                    token: coef_tok.to_string(),
                });
            }
            let string = parse_string(string_tok, line_no)?;
            let expected = *n_qubits.get_or_insert(string.len());
            if string.len() != expected {
                return Err(QbmError::InconsistentLength {
                    line: line_no,
                    expected,
                    found: string.len(),
                });
            }
            raw.push((coefficient, string));
        }
        match n_qubits {
            None => Err(QbmError::EmptyHamiltonian),
            Some(n) => PauliHamiltonian::new(n, raw),
        }
    }

    /// Serialize to the same line format `parse` reads.
    pub fn to_text(&self) -> String {
        self.terms
            .iter()
            .map(|t| format!("{:e} {}\n", t.coefficient, t.string))
            .collect()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Upper bound on the spectral radius, Σ|c_k|.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    /// `c·P|ψ⟩` for a single term.
    pub fn apply_term(term: &PauliTerm, psi: &TrialWaveFunction) -> Result<TrialWaveFunction> {
        if psi.n_qubits() != term.string.len() {
            return Err(QbmError::DimensionMismatch {
                expected: term.string.len(),
                found: psi.n_qubits(),
            });
        }
        let out = psi
            .iter()
            .map(|(b, amp)| {
                let (target, phase) = term.string.act(b);
                (target, amp * phase * term.coefficient)
            })
            .collect();
        Ok(TrialWaveFunction::from_map(psi.n_qubits(), out))
    }

    /// `H|ψ⟩` over the sparse support of ψ.
    pub fn apply(&self, psi: &TrialWaveFunction) -> Result<TrialWaveFunction> {
        if psi.n_qubits() != self.n_qubits {
            return Err(QbmError::DimensionMismatch {
                expected: self.n_qubits,
                found: psi.n_qubits(),
            });
        }
        let mut out = std::collections::BTreeMap::new();
        for term in &self.terms {
            for (b, amp) in psi.iter() {
                let (target, phase) = term.string.act(b);
                *out.entry(target).or_insert(Complex64::new(0.0, 0.0)) +=
                    amp * phase * term.coefficient;
            }
        }
        Ok(TrialWaveFunction::from_map(self.n_qubits, out))
    }

    /// `⟨v|H|ψ⟩` for one basis state, touching one amplitude per term.
    pub fn row_dot(&self, v: u64, amplitude: impl Fn(u64) -> Complex64) -> Complex64 {
        self.terms.iter().fold(Complex64::new(0.0, 0.0), |acc, t| {
            let (source, phase) = t.string.row_element(v);
            acc + amplitude(source) * phase * t.coefficient
        })
    }

    /// `H·x` for a dense vector of length 2^n.
    pub fn apply_dense(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let dim = 1usize << self.n_qubits;
        if x.len() != dim {
            return Err(QbmError::DimensionMismatch {
                expected: self.n_qubits,
                found: x.len().trailing_zeros() as usize,
            });
        }
        let mut y = vec![Complex64::new(0.0, 0.0); dim];
        for t in &self.terms {
            for (b, amp) in x.iter().enumerate() {
                let (target, phase) = t.string.act(b as u64);
                y[target as usize] += amp * phase * t.coefficient;
            }
        }
        Ok(y)
    }

    /// Kronecker-product expansion into a dense 2^n × 2^n matrix.
    pub fn dense_matrix(&self, cap: usize) -> Result<DenseMatrix> {
        if self.n_qubits > cap {
            return Err(QbmError::CapExceeded {
                qubits: self.n_qubits,
                cap,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut total = DenseMatrix::zeros(dim);
        for t in &self.terms {
            // Qubit 0 is the least significant bit, so it is the rightmost
            // Kronecker factor.
            let mut m = DenseMatrix::identity(1);
            for op in t.string.ops().iter().rev() {
                m = m.kron(&DenseMatrix::from_2x2(op.matrix()));
            }
            for (acc, x) in total.data.iter_mut().zip(&m.data) {
                *acc += x * t.coefficient;
            }
        }
        Ok(total)
    }
}

impl FromStr for PauliHamiltonian {
    type Err = QbmError;

    fn from_str(s: &str) -> Result<Self> {
        PauliHamiltonian::parse(s)
    }
}

impl fmt::Display for PauliHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Row-major complex square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    fn from_2x2(m: [[Complex64; 2]; 2]) -> Self {
        DenseMatrix {
            dim: 2,
            data: vec![m[0][0], m[0][1], m[1][0], m[1][1]],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    /// `self ⊗ rhs`.
    pub fn kron(&self, rhs: &DenseMatrix) -> DenseMatrix {
        let dim = self.dim * rhs.dim;
        let mut out = DenseMatrix::zeros(dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.get(i, j);
                for k in 0..rhs.dim {
                    for l in 0..rhs.dim {
                        out.data[(i * rhs.dim + k) * dim + j * rhs.dim + l] = a * rhs.get(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }
}

#[derive(Clone, Debug)]
pub struct EigenConfig {
    pub cap: usize,
    /// Budget of Hamiltonian applications per eigenpair.
    pub max_iters: usize,
    /// Residual ‖Hx − Ex‖ required for convergence, relative to Σ|c_k| + 1.
    pub tolerance: f64,
    /// Eigenvalues within this distance of the ground energy count as degenerate.
    pub degeneracy_tolerance: f64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            cap: DEFAULT_DENSE_CAP,
            max_iters: 20_000,
            tolerance: 1e-10,
            degeneracy_tolerance: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    /// Unit-norm ground state, dense over 2^n basis states.
    pub state: Vec<Complex64>,
    /// Orthonormal basis of the (numerically) degenerate ground space; its
    /// first element is `state`.
    pub ground_space: Vec<Vec<Complex64>>,
    pub degenerate: bool,
    pub iterations: usize,
}

impl GroundState {
    /// Weight of `psi` inside the ground space, Σ_k |⟨g_k|ψ⟩|² for unit ψ.
    pub fn fidelity(&self, psi: &[Complex64]) -> f64 {
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        let weight = self
            .ground_space
            .iter()
            .map(|g| inner(g, psi).norm_sqr())
            .sum::<f64>()
            / norm;
        // Rounding can push a full projection a few ulps past 1.
        weight.min(1.0)
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn normalize(x: &mut [Complex64]) -> f64 {
    let norm = x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in x.iter_mut() {
        *a /= norm;
    }
    norm
}

fn project_out(x: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for g in basis {
        let overlap = inner(g, x);
        for (xi, gi) in x.iter_mut().zip(g) {
            *xi -= overlap * gi;
        }
    }
}

fn axpy(y: &mut [Complex64], alpha: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Lowest eigenpair of `H` restricted to the orthogonal complement of `found`,
/// by restarted Lanczos with full reorthogonalization. Each restart begins
/// from the previous Ritz vector.
fn lanczos_lowest(
    h: &PauliHamiltonian,
    found: &[Vec<Complex64>],
    cfg: &EigenConfig,
    seed: u64,
) -> Result<(f64, Vec<Complex64>, usize)> {
    let dim = 1usize << h.n_qubits();
    let krylov_max = (dim - found.len()).min(KRYLOV_DIMENSION);
    let scale = h.norm_bound() + 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    project_out(&mut x, found);
    normalize(&mut x);
    let mut matvecs = 0;
    let mut energy = f64::NAN;
    while matvecs < cfg.max_iters {
        let mut basis = vec![x];
        let mut alphas = Vec::new();
        let mut betas = Vec::new();
        loop {
            let q = basis.last().expect("basis starts non-empty");
            let mut w = h.apply_dense(q)?;
            matvecs += 1;
            let alpha = inner(q, &w).re;
            alphas.push(alpha);
            // Two passes of classical Gram–Schmidt keep the basis orthogonal.
            for _ in 0..2 {
                project_out(&mut w, &basis);
                project_out(&mut w, found);
            }
            let beta = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if basis.len() == krylov_max || beta < 1e-13 * scale || matvecs >= cfg.max_iters {
                break;
            }
            betas.push(beta);
            for a in w.iter_mut() {
                *a /= beta;
            }
            basis.push(w);
        }
        let k = alphas.len();
        let mut t = nalgebra::DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alphas[i];
            if i + 1 < k {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = nalgebra::SymmetricEigen::new(t);
        let lowest = (0..k)
            .min_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]))
            .expect("tridiagonal matrix is non-empty");
        let mut ritz = vec![Complex64::default(); dim];
        for (i, q) in basis.iter().enumerate() {
            axpy(&mut ritz, Complex64::new(eig.eigenvectors[(i, lowest)], 0.0), q);
        }
        project_out(&mut ritz, found);
        normalize(&mut ritz);
        let hx = h.apply_dense(&ritz)?;
        matvecs += 1;
        energy = inner(&ritz, &hx).re;
        let residual = ritz
            .iter()
            .zip(&hx)
            .map(|(a, b)| (b - a * energy).norm_sqr())
            .sum::<f64>()
            .sqrt();
        x = ritz;
        if residual <= cfg.tolerance * scale {
            return Ok((energy, x, matvecs));
        }
    }
    Err(QbmError::NotConverged {
        iterations: matvecs,
        energy,
    })
}

/// Smallest eigenvalue and eigenvector(s) of `H`, matrix-free.
///
/// Degenerate ground spaces are detected by deflation and reported through
/// `degenerate`/`ground_space`; the returned `state` is an arbitrary member.
pub fn ground_state_exact(h: &PauliHamiltonian, cfg: &EigenConfig) -> Result<GroundState> {
    if h.n_qubits() > cfg.cap {
        return Err(QbmError::CapExceeded {
            qubits: h.n_qubits(),
            cap: cfg.cap,
        });
    }
    let dim = 1usize << h.n_qubits();
    let (energy, state, iterations) = lanczos_lowest(h, &[], cfg, 0x5eed)?;
    let mut space = vec![state.clone()];
    let mut total_iters = iterations;
    while space.len() < dim {
        let (e, v, it) = lanczos_lowest(h, &space, cfg, 0x5eed + space.len() as u64)?;
        total_iters += it;
        if (e - energy).abs() > cfg.degeneracy_tolerance {
            break;
        }
        space.push(v);
    }
    Ok(GroundState {
        energy,
        state,
        degenerate: space.len() > 1,
        ground_space: space,
        iterations: total_iters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parses_two_term_example() {
        let h = PauliHamiltonian::parse("2.0 XIZ\n-3.0 IYY").unwrap();
        assert_eq!(h.n_qubits(), 3);
        assert_eq!(h.terms().len(), 2);
        assert_eq!(h.terms()[0].coefficient, 2.0);
        assert_eq!(h.terms()[1].coefficient, -3.0);
        assert_eq!(h.terms()[0].string.to_string(), "XIZ");
    }

    #[test]
    fn parses_identity_and_merges_duplicates() {
        let h = PauliHamiltonian::parse("1.0 III").unwrap();
        assert_eq!(h.terms().len(), 1);
        assert!(h.terms()[0].string.is_identity());

        let h = PauliHamiltonian::parse("1.0 XZ\n2.0 XZ").unwrap();
        assert_eq!(h.terms().len(), 1);
        assert_eq!(h.terms()[0].coefficient, 3.0);
    }

    #[test]
    fn skips_comments_and_accepts_scientific_notation() {
        let h = PauliHamiltonian::parse("# header\n\n  -2.5e-1 ZZ \n").unwrap();
        assert_eq!(h.terms()[0].coefficient, -0.25);
    }

    #[test]
    fn cancelling_terms_are_dropped() {
        let h = PauliHamiltonian::parse("1.0 Z\n-1.0 Z").unwrap();
        assert!(h.terms().is_empty());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            PauliHamiltonian::parse("abc XZ"),
            Err(QbmError::MalformedCoefficient { line: 1, .. })
        ));
        assert!(matches!(
            PauliHamiltonian::parse("1.0 XQ"),
            Err(QbmError::IllegalSymbol { symbol: 'Q', .. })
        ));
        assert!(matches!(
            PauliHamiltonian::parse("1.0 XZ\n1.0 XZZ"),
            Err(QbmError::InconsistentLength {
                line: 2,
                expected: 2,
                found: 3
            })
        ));
        assert_eq!(PauliHamiltonian::parse("# nothing\n"), Err(QbmError::EmptyHamiltonian));
        assert_eq!(PauliHamiltonian::parse(""), Err(QbmError::EmptyHamiltonian));
        assert!(matches!(
            PauliHamiltonian::parse("1.0"),
            Err(QbmError::MalformedLine { line: 1 })
        ));
        assert!(PauliHamiltonian::parse("inf Z").is_err());
    }

    #[test]
    fn single_term_actions() {
        let alpha = c(0.6, 0.0);
        let beta = c(0.0, 0.8);
        let psi = TrialWaveFunction::from_dense(1, &[alpha, beta]);
        let z = PauliHamiltonian::parse("1 Z").unwrap();
        let out = PauliHamiltonian::apply_term(&z.terms()[0], &psi).unwrap();
        assert_eq!(out.amplitude(0), alpha);
        assert_eq!(out.amplitude(1), -beta);

        let zero = TrialWaveFunction::from_dense(1, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let x = PauliHamiltonian::parse("1 X").unwrap();
        let out = PauliHamiltonian::apply_term(&x.terms()[0], &zero).unwrap();
        assert_eq!(out.amplitude(1), c(1.0, 0.0));
        assert_eq!(out.amplitude(0), c(0.0, 0.0));

        let y = PauliHamiltonian::parse("1 Y").unwrap();
        let out = PauliHamiltonian::apply_term(&y.terms()[0], &zero).unwrap();
        assert_eq!(out.amplitude(1), c(0.0, 1.0));
    }

    #[test]
    fn apply_rejects_dimension_mismatch() {
        let h = PauliHamiltonian::parse("1 ZZ").unwrap();
        let psi = TrialWaveFunction::from_dense(1, &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(h.apply(&psi).is_err());
        assert!(PauliHamiltonian::apply_term(&h.terms()[0], &psi).is_err());
    }

    #[test]
    fn two_term_example_on_all_zeros() {
        let h = PauliHamiltonian::parse("2.0 XIZ\n-3.0 IYY").unwrap();
        let mut basis = vec![c(0.0, 0.0); 8];
        basis[0] = c(1.0, 0.0);
        let psi = TrialWaveFunction::from_dense(3, &basis);
        let out = h.apply(&psi).unwrap();
        // "100" is qubit 0 set (index 1); "011" is qubits 1 and 2 set (index 6).
        assert!((out.amplitude(0b001) - c(2.0, 0.0)).norm() < 1e-15);
        assert!((out.amplitude(0b110) - c(3.0, 0.0)).norm() < 1e-15);
        let dense = h.dense_matrix(DEFAULT_DENSE_CAP).unwrap().mul_vec(&basis);
        for (b, amp) in dense.iter().enumerate() {
            assert!((out.amplitude(b as u64) - amp).norm() < 1e-14);
        }
    }

    #[test]
    fn dense_single_qubit_matrices() {
        let z = PauliHamiltonian::parse("1.0 Z").unwrap().dense_matrix(12).unwrap();
        assert_eq!(z.data, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let x = PauliHamiltonian::parse("1.0 X").unwrap().dense_matrix(12).unwrap();
        assert_eq!(x.data, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn dense_two_term_example_is_traceless_and_hermitian() {
        let m = PauliHamiltonian::parse("2.0 XIZ\n-3.0 IYY")
            .unwrap()
            .dense_matrix(12)
            .unwrap();
        assert_eq!(m.dim, 8);
        assert!(m.trace().norm() < 1e-15);
        assert!(m.is_hermitian(0.0));
    }

    #[test]
    fn dense_cap_enforced() {
        let h = PauliHamiltonian::parse("1.0 ZZZZ").unwrap();
        assert!(matches!(h.dense_matrix(3), Err(QbmError::CapExceeded { .. })));
    }

    #[test]
    fn ground_state_of_z() {
        let h = PauliHamiltonian::parse("1.0 Z").unwrap();
        let g = ground_state_exact(&h, &EigenConfig::default()).unwrap();
        assert!((g.energy + 1.0).abs() < 1e-12);
        assert!((g.state[1].norm() - 1.0).abs() < 1e-6);
        assert!(!g.degenerate);
    }

    #[test]
    fn ground_state_of_minus_x() {
        let h = PauliHamiltonian::parse("-1.0 X").unwrap();
        let g = ground_state_exact(&h, &EigenConfig::default()).unwrap();
        assert!((g.energy + 1.0).abs() < 1e-12);
        let plus = [c(0.5f64.sqrt(), 0.0), c(0.5f64.sqrt(), 0.0)];
        assert!((g.fidelity(&plus) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ground_state_cap() {
        let h = PauliHamiltonian::parse("1.0 ZZZ").unwrap();
        let cfg = EigenConfig {
            cap: 2,
            ..EigenConfig::default()
        };
        assert!(matches!(ground_state_exact(&h, &cfg), Err(QbmError::CapExceeded { .. })));
    }

    #[test]
    fn two_term_example_ground_space_is_fourfold() {
        // The two words anticommute, so H² = (4 + 9)·I and the spectrum is ±√13,
        // each four-fold degenerate.
        let h = PauliHamiltonian::parse("2.0 XIZ\n-3.0 IYY").unwrap();
        let g = ground_state_exact(&h, &EigenConfig::default()).unwrap();
        assert!((g.energy + 13f64.sqrt()).abs() < 1e-10);
        assert!(g.degenerate);
        assert_eq!(g.ground_space.len(), 4);
    }
}
