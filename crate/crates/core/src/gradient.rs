//! Energy estimator and its parameter gradient.
//!
//! The analytic gradient is the covariance form
//! `∂_p⟨H⟩ = 2⟨E_loc D_p⟩ − 2⟨E_loc⟩⟨D_p⟩` with local energies
//! `E_loc(v) = ⟨v|H|ψ⟩ / a(v)` and logarithmic derivatives
//! `D_p(v) = ∂_p log a(v)`, where all averages are taken under |a(v)|².
//! For a sampled wave function the support and weights come from the
//! sampled amplitudes, so each observed `v` carries its count times s²(v).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QbmError, Result};
use crate::model::{exact_distribution, spin, QbmParameters, QbmShape, Regulator};
use crate::pauli::PauliHamiltonian;
use crate::wavefunction::{assemble, sign_node, TrialWaveFunction, VisibleDistribution};

/// |s(v)| is clamped to this inside log-derivatives; samples hitting the
/// clamp are flagged and left out of gradient averages.
pub const SIGN_CLAMP: f64 = 1e-8;

/// Amplitudes below this are not divided by.
pub const AMPLITUDE_FLOOR: f64 = 1e-150;

/// Default central-difference step.
pub const DEFAULT_FD_EPSILON: f64 = 1e-5;

/// Gradient laid out like [`QbmParameters`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientVector {
    pub da: Vec<f64>,
    pub db: Vec<f64>,
    pub dw: Vec<f64>,
    pub dc: Vec<f64>,
    pub dd: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dgamma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ddelta: Option<f64>,
}

impl GradientVector {
    pub fn from_flat(template: &QbmParameters, values: &[f64]) -> Self {
        let p = template.with_flat(values);
        GradientVector {
            da: p.a,
            db: p.b,
            dw: p.w,
            dc: p.c,
            dd: p.d,
            dgamma: p.gamma,
            ddelta: p.delta,
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend(&self.da);
        out.extend(&self.db);
        out.extend(&self.dw);
        out.extend(&self.dc);
        out.push(self.dd);
        if let (Some(g), Some(delta)) = (&self.dgamma, self.ddelta) {
            out.extend(g);
            out.push(delta);
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.flat().iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// One term of a covariance estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalEnergySample {
    pub v: u64,
    pub e_loc: Complex64,
    pub weight: f64,
}

/// ⟨v|H|ψ⟩ / a(v), matrix-free.
pub fn local_energy(v: u64, psi: &TrialWaveFunction, h: &PauliHamiltonian) -> Result<Complex64> {
    if psi.n_qubits() != h.n_qubits() {
        return Err(QbmError::DimensionMismatch {
            expected: h.n_qubits(),
            found: psi.n_qubits(),
        });
    }
    let a = psi.amplitude(v);
    if a.norm() < AMPLITUDE_FLOOR {
        return Err(QbmError::DegenerateWaveFunction);
    }
    Ok(h.row_dot(v, |b| psi.amplitude(b)) / a)
}

/// ⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩ over the support of ψ.
pub fn expectation(psi: &TrialWaveFunction, h: &PauliHamiltonian) -> Result<f64> {
    if psi.n_qubits() != h.n_qubits() {
        return Err(QbmError::DimensionMismatch {
            expected: h.n_qubits(),
            found: psi.n_qubits(),
        });
    }
    let norm = psi.norm_sqr();
    if !(norm > 0.0) {
        return Err(QbmError::DegenerateWaveFunction);
    }
    let total: Complex64 = psi
        .iter()
        .map(|(v, a)| a.conj() * h.row_dot(v, |b| psi.amplitude(b)))
        .sum();
    Ok(total.re / norm)
}

/// Energy of the wave function assembled from `dist`; for a sampled
/// distribution this is the s²-reweighted sample mean of the local energy.
pub fn expectation_from_distribution(
    dist: &VisibleDistribution,
    params: &QbmParameters,
    h: &PauliHamiltonian,
) -> Result<f64> {
    expectation(&assemble(dist, params)?, h)
}

/// Energy of the exact (brute-force) model wave function.
pub fn exact_energy(
    h: &PauliHamiltonian,
    shape: &QbmShape,
    params: &QbmParameters,
    reg: Regulator,
) -> Result<f64> {
    expectation_from_distribution(&exact_distribution(shape, params, reg)?, params, h)
}

/// Per-parameter log-derivatives for one visible configuration, in the flat
/// parameter order.
#[derive(Clone, Debug, PartialEq)]
pub struct LogDerivatives {
    pub values: Vec<f64>,
    /// |s(v)| fell below [`SIGN_CLAMP`].
    pub flagged: bool,
}

/// D_p(v) = ∂_p log a(v) for the sign-node model.
///
/// With the regulator frozen, `a`, `b`, `w` enter the model as `p/k`, so
/// their derivatives carry a factor `1/k`. Constant offsets that cancel in
/// the covariance are omitted.
pub fn log_derivatives(
    v: u64,
    shape: &QbmShape,
    params: &QbmParameters,
    reg: Regulator,
) -> Result<LogDerivatives> {
    if params.has_phase() {
        return Err(QbmError::AnalyticGradientUnavailable);
    }
    params.validate(shape)?;
    let (n, m) = (shape.n_visible, shape.n_hidden);
    let k = reg.value();
    let scaled = params.scaled(reg);
    let mut values = Vec::with_capacity(params.n_params());

    for i in 0..n {
        values.push(0.5 * spin(v, i) / k);
    }
    let tanh_g: Vec<f64> = (0..m)
        .map(|j| {
            let g = scaled.b[j] + (0..n).map(|i| scaled.w[i * m + j] * spin(v, i)).sum::<f64>();
            g.tanh()
        })
        .collect();
    for t in &tanh_g {
        values.push(0.5 * t / k);
    }
    for i in 0..n {
        for t in &tanh_g {
            values.push(0.5 * t * spin(v, i) / k);
        }
    }

    let s = sign_node(v, &params.c, params.d);
    let flagged = s.abs() < SIGN_CLAMP;
    let s_clamped = if flagged {
        SIGN_CLAMP.copysign(if s == 0.0 { 1.0 } else { s })
    } else {
        s
    };
    let ds = 1.0 / s_clamped - s_clamped;
    for i in 0..n {
        values.push(spin(v, i) * ds);
    }
    values.push(ds);

    Ok(LogDerivatives { values, flagged })
}

/// Weighted sample for [`covariance_gradient`].
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceSample {
    pub weight: f64,
    /// Real part of the local energy.
    pub e_loc: f64,
    pub d: Vec<f64>,
}

/// `2⟨E D_p⟩ − 2⟨E⟩⟨D_p⟩` under the normalized sample weights.
pub fn covariance_gradient(samples: &[CovarianceSample]) -> Result<Vec<f64>> {
    let total: f64 = samples.iter().map(|s| s.weight).sum();
    if samples.is_empty() || !(total > 0.0) {
        return Err(QbmError::DegenerateWaveFunction);
    }
    let dim = samples[0].d.len();
    let mean_e = samples.iter().map(|s| s.weight * s.e_loc).sum::<f64>() / total;
    let mut mean_d = vec![0.0; dim];
    for s in samples {
        let wn = s.weight / total;
        for (k, dk) in s.d.iter().enumerate() {
            mean_d[k] += wn * dk;
        }
    }
    // Evaluated in the centered form 2⟨(E − ⟨E⟩)(D − ⟨D⟩)⟩.
    let mut out = vec![0.0; dim];
    for s in samples {
        let wn = s.weight / total;
        let e = s.e_loc - mean_e;
        for (k, dk) in s.d.iter().enumerate() {
            out[k] += 2.0 * wn * e * (dk - mean_d[k]);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientReport {
    pub gradient: GradientVector,
    pub energy: f64,
    pub local_energies: Vec<LocalEnergySample>,
    /// Samples excluded because the sign node hit the clamp.
    pub flagged: usize,
    pub samples: usize,
}

impl GradientReport {
    pub fn flagged_fraction(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.flagged as f64 / self.samples as f64
        }
    }
}

/// Analytic gradient over the support of `psi`, which must be the sign-node
/// wave function of `params` (exact or sampled).
pub fn gradient(
    psi: &TrialWaveFunction,
    h: &PauliHamiltonian,
    shape: &QbmShape,
    params: &QbmParameters,
    reg: Regulator,
) -> Result<GradientReport> {
    if params.has_phase() {
        return Err(QbmError::AnalyticGradientUnavailable);
    }
    if psi.n_qubits() != h.n_qubits() || psi.n_qubits() != shape.n_visible {
        return Err(QbmError::DimensionMismatch {
            expected: shape.n_visible,
            found: psi.n_qubits(),
        });
    }
    let energy = expectation(psi, h)?;
    let mut samples = Vec::new();
    let mut local_energies = Vec::new();
    let mut flagged = 0;
    let mut seen = 0;
    for (v, a) in psi.iter() {
        let weight = a.norm_sqr();
        if weight == 0.0 {
            continue;
        }
        seen += 1;
        let d = log_derivatives(v, shape, params, reg)?;
        if d.flagged || a.norm() < AMPLITUDE_FLOOR {
            flagged += 1;
            continue;
        }
        let e_loc = local_energy(v, psi, h)?;
        local_energies.push(LocalEnergySample { v, e_loc, weight });
        samples.push(CovarianceSample {
            weight,
            e_loc: e_loc.re,
            d: d.values,
        });
    }
    if flagged * 100 > seen {
        log::warn!("{flagged} of {seen} configurations hit the sign-node clamp");
    }
    let flat = covariance_gradient(&samples)?;
    Ok(GradientReport {
        gradient: GradientVector::from_flat(params, &flat),
        energy,
        local_energies,
        flagged,
        samples: seen,
    })
}

/// Analytic gradient of the exact model wave function.
pub fn exact_gradient(
    h: &PauliHamiltonian,
    shape: &QbmShape,
    params: &QbmParameters,
    reg: Regulator,
) -> Result<GradientReport> {
    let psi = assemble(&exact_distribution(shape, params, reg)?, params)?;
    gradient(&psi, h, shape, params, reg)
}

/// Central differences of the exact-mode energy, one parameter at a time.
/// Works for both node kinds.
pub fn finite_difference_gradient(
    h: &PauliHamiltonian,
    shape: &QbmShape,
    params: &QbmParameters,
    reg: Regulator,
    eps: f64,
) -> Result<GradientVector> {
    if !(eps > 0.0) {
        return Err(QbmError::InvalidConfig(format!("finite-difference step {eps} must be positive")));
    }
    let base = params.flat();
    let mut grad = Vec::with_capacity(base.len());
    for k in 0..base.len() {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[k] += eps;
        minus[k] -= eps;
        let ep = exact_energy(h, shape, &params.with_flat(&plus), reg)?;
        let em = exact_energy(h, shape, &params.with_flat(&minus), reg)?;
        grad.push((ep - em) / (2.0 * eps));
    }
    Ok(GradientVector::from_flat(params, &grad))
}
