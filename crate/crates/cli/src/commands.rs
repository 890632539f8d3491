use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use serde::Serialize;

use qbm_core::decomposition::{resource_report_with, ResourceReport};
use qbm_core::model::{
    acceptance_rate_exact, build_circuit, exact_distribution, regulator_for, QbmParameters, QbmShape,
    DEFAULT_ENUMERATION_CAP,
};
use qbm_core::optimizer::{self, NodeMode, StopReason, TraceEntry};
use qbm_core::pauli::{ground_state_exact, EigenConfig, PauliHamiltonian, DEFAULT_DENSE_CAP};
use qbm_core::validation::{self, Fault, ValidationConfig};
use qbm_core::wavefunction::bitstring;

use crate::config::{RunConfig, RunFlags};
use crate::output::{json_bytes, write_all_atomic};

/// Largest register simulated just to report the exact acceptance rate.
const EXACT_ACCEPTANCE_WIDTH: usize = 24;

fn load_hamiltonian(path: &Path) -> anyhow::Result<PauliHamiltonian> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading Hamiltonian {}", path.display()))?;
    PauliHamiltonian::parse(&text).with_context(|| format!("parsing Hamiltonian {}", path.display()))
}

#[derive(Serialize)]
struct Metadata {
    started_unix_ms: u128,
    wall_time_ms: f64,
    version: &'static str,
}

#[derive(Serialize)]
struct TrainSummary {
    initial_energy: f64,
    final_energy: f64,
    exact_ground_energy: Option<f64>,
    energy_gap: Option<f64>,
    fidelity: Option<f64>,
    ground_space_dimension: Option<usize>,
    iterations: usize,
    stop_reason: StopReason,
    flagged_samples: usize,
    parameters: QbmParameters,
    wavefunction_file: &'static str,
    metadata: Metadata,
}

fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

fn trace_lines(trace: &[TraceEntry]) -> anyhow::Result<Vec<u8>> {
    let mut out = Vec::new();
    for entry in trace {
        serde_json::to_writer(&mut out, entry)?;
        out.push(b'\n');
    }
    Ok(out)
}

pub fn train(flags: &RunFlags) -> anyhow::Result<()> {
    let started = unix_ms();
    let clock = Instant::now();
    let mut cfg = RunConfig::from_flags(flags)?;
    let Some(h_path) = cfg.hamiltonian.clone() else {
        bail!("no Hamiltonian given; pass --hamiltonian or set it in the config");
    };
    let Some(out) = cfg.out.clone() else {
        bail!("no output directory given; pass --out or set it in the config");
    };
    let h = load_hamiltonian(&h_path)?;
    let shape = cfg.resolve_shape(Some(h.n_qubits()))?;
    cfg.train.validate()?;

    let outcome = optimizer::train(&h, &shape, &cfg.train).map_err(|e| {
        anyhow::anyhow!("{e}").context(format!("{} iterations completed before the failure", e.trace.len()))
    })?;

    let ground = if h.n_qubits() <= DEFAULT_DENSE_CAP {
        Some(ground_state_exact(&h, &EigenConfig::default())?)
    } else {
        log::warn!("{} qubits exceeds the exact-solver cap; skipping the reference comparison", h.n_qubits());
        None
    };
    let fidelity = ground.as_ref().map(|g| g.fidelity(&outcome.wavefunction.to_dense()));
    let summary = TrainSummary {
        initial_energy: outcome.trace.first().map_or(outcome.final_energy, |e| e.energy),
        final_energy: outcome.final_energy,
        exact_ground_energy: ground.as_ref().map(|g| g.energy),
        energy_gap: ground.as_ref().map(|g| outcome.final_energy - g.energy),
        fidelity,
        ground_space_dimension: ground.as_ref().map(|g| g.ground_space.len()),
        iterations: outcome.trace.len(),
        stop_reason: outcome.stop_reason,
        flagged_samples: outcome.trace.iter().map(|e| e.flagged_samples).sum(),
        parameters: outcome.params.clone(),
        wavefunction_file: "wavefunction.txt",
        metadata: Metadata {
            started_unix_ms: started,
            wall_time_ms: clock.elapsed().as_secs_f64() * 1e3,
            version: env!("CARGO_PKG_VERSION"),
        },
    };

    write_all_atomic(
        &out,
        &[
            ("config.json", json_bytes(&cfg)?),
            ("trace.jsonl", trace_lines(&outcome.trace)?),
            ("summary.json", json_bytes(&summary)?),
            ("wavefunction.txt", outcome.wavefunction.to_export_text().into_bytes()),
        ],
    )?;

    println!("final energy: {:.12}", summary.final_energy);
    if let (Some(e0), Some(f)) = (summary.exact_ground_energy, fidelity) {
        println!("exact ground energy: {e0:.12}");
        println!("fidelity: {f:.9}");
    }
    println!("iterations: {} ({:?})", summary.iterations, summary.stop_reason);
    println!("outputs: {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct ExactReport {
    ground_energy: f64,
    degenerate: bool,
    ground_space_dimension: usize,
    hermitian: bool,
    /// "dense" when the full matrix was compared with its adjoint, otherwise
    /// "structural" (real coefficients on Pauli strings).
    hermiticity_check: &'static str,
    top_states: Vec<(String, f64)>,
}

pub fn exact(hamiltonian: &Path, top: usize, cap: usize, out: Option<&PathBuf>) -> anyhow::Result<()> {
    let h = load_hamiltonian(hamiltonian)?;
    let cfg = EigenConfig {
        cap,
        ..EigenConfig::default()
    };
    let ground = ground_state_exact(&h, &cfg)?;
    // Dense check where the matrix is cheap to hold; beyond that a sum of
    // Pauli strings with real coefficients is Hermitian by construction.
    let (hermitian, hermiticity_check) = if h.n_qubits() <= 10 {
        (h.dense_matrix(cap)?.is_hermitian(1e-12), "dense")
    } else {
        (true, "structural")
    };
    if !hermitian {
        bail!("Hamiltonian matrix is not Hermitian");
    }
    let mut weights: Vec<(u64, f64)> = ground
        .state
        .iter()
        .enumerate()
        .map(|(v, a)| (v as u64, a.norm_sqr()))
        .collect();
    weights.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let report = ExactReport {
        ground_energy: ground.energy,
        degenerate: ground.degenerate,
        ground_space_dimension: ground.ground_space.len(),
        hermitian,
        hermiticity_check,
        top_states: weights
            .iter()
            .take(top)
            .map(|&(v, w)| (bitstring(v, h.n_qubits()), w))
            .collect(),
    };
    println!("ground energy: {:.12}", report.ground_energy);
    println!("hermitian: {} ({} check)", report.hermitian, report.hermiticity_check);
    println!(
        "ground space dimension: {}{}",
        report.ground_space_dimension,
        if report.degenerate { " (degenerate)" } else { "" }
    );
    println!("top basis states:");
    for (b, w) in &report.top_states {
        println!("  {b} {w:.9}");
    }
    if let Some(dir) = out {
        write_all_atomic(dir, &[("exact.json", json_bytes(&report)?)])?;
    }
    Ok(())
}

pub fn resources_text(r: &ResourceReport) -> String {
    let stage = &r.entangling_stage.idealized;
    let full = &r.full_circuit;
    let mut lines = vec![
        format!(
            "shape: {} visible, {} hidden, layout {}, node {}",
            r.n_visible,
            r.n_hidden,
            serde_json::to_string(&r.layout).unwrap_or_default().trim_matches('"'),
            serde_json::to_string(&r.node).unwrap_or_default().trim_matches('"'),
        ),
        format!("width: {} qubits", r.width),
        format!(
            "entangling stage: {} two-qubit gates, {} one-qubit rotations",
            stage.two_qubit, stage.one_qubit_rotations
        ),
        format!(
            "entangling stage X gates for |0>-controls: {}",
            r.entangling_stage.polarity_x_gates
        ),
        format!(
            "full circuit: {} two-qubit, {} rotations, {} X, depth {}",
            full.two_qubit, full.one_qubit_rotations, full.x_gates, full.depth
        ),
        format!(
            "mid-circuit measurements: {}, resets: {}",
            r.mid_circuit_measurements, r.resets
        ),
        format!(
            "parameters: {} vs {} degrees of freedom",
            r.parameter_count, r.dof_count
        ),
        format!(
            "recommended shots: {} (C = {} times 2^n)",
            r.recommended_shots, r.shot_constant
        ),
        "not counted: SWAP gates needed on hardware with limited connectivity".to_string(),
    ];
    lines.push(String::new());
    lines.join("\n")
}

pub fn resources(
    shape: &QbmShape,
    node: NodeMode,
    shot_constant: u64,
    json: bool,
    out: Option<&PathBuf>,
) -> anyhow::Result<()> {
    let report = resource_report_with(shape, node, shot_constant)?;
    if json {
        print!("{}", String::from_utf8(json_bytes(&report)?)?);
    } else {
        print!("{}", resources_text(&report));
    }
    if let Some(dir) = out {
        write_all_atomic(dir, &[("resources.json", json_bytes(&report)?)])?;
    }
    Ok(())
}

/// Returns whether every suite passed.
pub fn validate(seed: u64, trials: usize, fault: Option<Fault>) -> anyhow::Result<bool> {
    if trials == 0 {
        eprintln!("warning: --trials 0 checks nothing; suites pass vacuously");
    }
    let cfg = ValidationConfig { seed, trials, fault };
    let mut all = true;
    for suite in validation::run_all(&cfg)? {
        all &= suite.passed;
        println!(
            "suite {}: {} (trials {}, worst error / tolerance {:.3e})",
            suite.name,
            if suite.passed { "PASS" } else { "FAIL" },
            suite.trials,
            suite.worst_ratio
        );
    }
    Ok(all)
}

#[derive(Serialize)]
struct SampleReport {
    n_visible: usize,
    n_hidden: usize,
    layout: qbm_core::model::AncillaLayout,
    regulator: f64,
    seed: u64,
    shots: u64,
    accepted: u64,
    rejected: u64,
    acceptance_rate: f64,
    exact_acceptance_rate: Option<f64>,
    counts: BTreeMap<String, u64>,
    total_variation: Option<f64>,
    parameters: QbmParameters,
}

pub fn sample(flags: &RunFlags, params_path: Option<&Path>, accepted_target: Option<u64>) -> anyhow::Result<()> {
    let mut cfg = RunConfig::from_flags(flags)?;
    let h_qubits = match &cfg.hamiltonian {
        Some(p) => Some(load_hamiltonian(p)?.n_qubits()),
        None => None,
    };
    let params = match params_path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading parameters {}", p.display()))?;
            let params: QbmParameters =
                serde_json::from_str(&text).with_context(|| format!("parsing parameters {}", p.display()))?;
            if cfg.n_visible.is_none() && h_qubits.is_none() {
                cfg.n_visible = Some(params.a.len());
            }
            if cfg.n_hidden.is_none() {
                cfg.n_hidden = Some(params.b.len());
            }
            Some(params)
        }
        None => None,
    };
    let shape = cfg.resolve_shape(h_qubits)?;
    let params = match params {
        Some(p) => {
            p.validate(&shape)?;
            p
        }
        None => optimizer::initialize(&shape, &cfg.train)?,
    };
    let reg = regulator_for(&params, cfg.train.regulator)?;
    let built = build_circuit(&shape, &params, reg)?;
    let seed = cfg.train.seed;
    let (dist, raw) = match accepted_target {
        Some(target) => {
            let budget = flags.shots.unwrap_or(u64::MAX);
            built.sample_visible_accepted(target, budget, seed)?
        }
        None => built.sample_visible(cfg.train.shots, seed)?,
    };
    let mask = (1u64 << shape.n_visible) - 1;
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for (&key, &count) in &raw.counts {
        *counts.entry(bitstring(key & mask, shape.n_visible)).or_insert(0) += count;
    }
    let total_variation = if shape.n_visible + shape.n_hidden <= DEFAULT_ENUMERATION_CAP {
        Some(exact_distribution(&shape, &params, reg)?.total_variation(&dist))
    } else {
        None
    };
    let exact_acceptance_rate = if shape.n_qubits() <= EXACT_ACCEPTANCE_WIDTH {
        Some(acceptance_rate_exact(&shape, &params, reg)?)
    } else {
        None
    };
    let report = SampleReport {
        n_visible: shape.n_visible,
        n_hidden: shape.n_hidden,
        layout: shape.layout,
        regulator: reg.value(),
        seed,
        shots: raw.shots(),
        accepted: raw.accepted,
        rejected: raw.rejected,
        acceptance_rate: raw.acceptance_rate(),
        exact_acceptance_rate,
        counts,
        total_variation,
        parameters: params,
    };
    match &cfg.out {
        Some(dir) => {
            write_all_atomic(
                dir,
                &[("config.json", json_bytes(&cfg)?), ("sample.json", json_bytes(&report)?)],
            )?;
            println!(
                "accepted {} of {} shots (rate {:.6})",
                report.accepted, report.shots, report.acceptance_rate
            );
            if let Some(tv) = report.total_variation {
                println!("total variation to exact distribution: {tv:.6}");
            }
            println!("outputs: {}", dir.display());
        }
        None => print!("{}", String::from_utf8(json_bytes(&report)?)?),
    }
    Ok(())
}
