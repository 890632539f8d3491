use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use qbm_core::model::{AncillaLayout, QbmShape, RegulatorMode};
use qbm_core::optimizer::{EstimationMode, NodeMode, TrainConfig};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum NodeArg {
    Sign,
    Phase,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LayoutArg {
    PerPair,
    Reused,
}

pub fn parse_regulator(s: &str) -> Result<RegulatorMode, String> {
    match s {
        "off" => Ok(RegulatorMode::Off),
        "auto" => Ok(RegulatorMode::Auto),
        other => {
            let k: f64 = other
                .parse()
                .map_err(|_| format!("expected off, auto or a number >= 1, got {other:?}"))?;
            if k >= 1.0 && k.is_finite() {
                Ok(RegulatorMode::Fixed(k))
            } else {
                Err(format!("regulator {k} must be a finite number >= 1"))
            }
        }
    }
}

/// Flags shared by the run-style subcommands. Anything given here overrides
/// the JSON config.
#[derive(Args, Debug, Default, Clone)]
pub struct RunFlags {
    /// JSON run configuration; flags take precedence over its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Pauli Hamiltonian text file
    #[arg(long)]
    pub hamiltonian: Option<PathBuf>,
    #[arg(long)]
    pub n_visible: Option<usize>,
    #[arg(long)]
    pub n_hidden: Option<usize>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub node: Option<NodeArg>,
    #[arg(long, value_enum)]
    pub layout: Option<LayoutArg>,
    /// off, auto, or a fixed divisor k >= 1
    #[arg(long, value_parser = parse_regulator)]
    pub regulator: Option<RegulatorMode>,
    /// Learning rate
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Half-width of the uniform initialization interval
    #[arg(long)]
    pub init_scale: Option<f64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Run configuration as stored in JSON. Missing shape fields are filled in
/// from the Hamiltonian during resolution.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub hamiltonian: Option<PathBuf>,
    pub n_visible: Option<usize>,
    pub n_hidden: Option<usize>,
    pub layout: Option<AncillaLayout>,
    pub train: TrainConfig,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Config file (if any) with flag overrides applied.
    pub fn from_flags(flags: &RunFlags) -> anyhow::Result<Self> {
        let mut cfg = match &flags.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        if let Some(p) = &flags.hamiltonian {
            cfg.hamiltonian = Some(p.clone());
        }
        if let Some(n) = flags.n_visible {
            cfg.n_visible = Some(n);
        }
        if let Some(m) = flags.n_hidden {
            cfg.n_hidden = Some(m);
        }
        if let Some(l) = flags.layout {
            cfg.layout = Some(match l {
                LayoutArg::PerPair => AncillaLayout::OnePerPair,
                LayoutArg::Reused => AncillaLayout::SingleReused,
            });
        }
        if let Some(o) = &flags.out {
            cfg.out = Some(o.clone());
        }
        let t = &mut cfg.train;
        if let Some(s) = flags.shots {
            t.shots = s;
        }
        if let Some(s) = flags.seed {
            t.seed = s;
        }
        if let Some(m) = flags.mode {
            t.mode = match m {
                ModeArg::Exact => EstimationMode::Exact,
                ModeArg::Sampled => EstimationMode::Sampled,
            };
        }
        if let Some(n) = flags.node {
            t.node = match n {
                NodeArg::Sign => NodeMode::Sign,
                NodeArg::Phase => NodeMode::Phase,
            };
        }
        if let Some(r) = flags.regulator {
            t.regulator = r;
        }
        if let Some(eta) = flags.eta {
            t.learning_rate = eta;
        }
        if let Some(k) = flags.max_iters {
            t.max_iters = k;
        }
        if let Some(s) = flags.init_scale {
            t.init_scale = s;
        }
        Ok(cfg)
    }

    /// Fills unset shape fields: `n_visible` from the Hamiltonian, `n_hidden`
    /// defaults to `n_visible`, layout to one ancilla per pair.
    pub fn resolve_shape(&mut self, hamiltonian_qubits: Option<usize>) -> anyhow::Result<QbmShape> {
        let n = match (self.n_visible, hamiltonian_qubits) {
            (Some(n), Some(hq)) if n != hq => {
                bail!("--n-visible {n} does not match the {hq}-qubit Hamiltonian")
            }
            (Some(n), _) => n,
            (None, Some(hq)) => hq,
            (None, None) => bail!("the visible layer size is unknown; pass --n-visible or --hamiltonian"),
        };
        let m = self.n_hidden.unwrap_or(n);
        let layout = self.layout.unwrap_or(AncillaLayout::OnePerPair);
        self.n_visible = Some(n);
        self.n_hidden = Some(m);
        self.layout = Some(layout);
        Ok(QbmShape::new(n, m, layout)?)
    }
}
