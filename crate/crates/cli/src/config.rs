//! Turning command-line flags into an architecture, hardware parameters and
//! compile options.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use nacc_core::arch::{default_r_int, default_r_restr, side_for, DEFAULT_SPACING_UM};
use nacc_core::divide::DivideOptions;
use nacc_core::embed::DEFAULT_EMBED_LIMIT;
use nacc_core::{parse_qasm, CompileOptions, CzCircuit, ExecMode, Factor, GridArch, HardwareParams, TransferTimeModel};

#[derive(Debug, Clone, Args)]
pub struct ArchFlags {
    /// Atom spacing d in micrometres.
    #[arg(long = "d-um", default_value_t = DEFAULT_SPACING_UM)]
    pub d_um: f64,
    /// Interaction radius in units of d, e.g. `2`, `1.5` or `sqrt:2`.
    #[arg(long = "r-int", default_value_t = default_r_int())]
    pub r_int: Factor,
    /// Restriction radius in units of d.
    #[arg(long = "r-restr", default_value_t = default_r_restr())]
    pub r_restr: Factor,
    /// Grid side; defaults to the smallest square holding every qubit.
    #[arg(long)]
    pub grid: Option<usize>,
}

impl ArchFlags {
    pub fn arch_for(&self, n: usize) -> Result<GridArch> {
        let side = self.grid.unwrap_or_else(|| side_for(n.max(1)));
        if side * side < n {
            bail!("a {side}x{side} grid cannot hold {n} qubits");
        }
        Ok(GridArch::new(side, self.d_um, self.r_int, self.r_restr)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CompileFlags {
    /// Rydberg-stage packing.
    #[arg(long, default_value_t = ExecMode::Serial)]
    pub mode: ExecMode,
    /// Embeddings enumerated per subcircuit before choosing the closest.
    #[arg(long = "embed-limit", default_value_t = DEFAULT_EMBED_LIMIT)]
    pub embed_limit: usize,
}

impl CompileFlags {
    pub fn options(&self) -> CompileOptions {
        CompileOptions {
            mode: self.mode,
            divide: DivideOptions {
                embed_limit: self.embed_limit.max(1),
                ..DivideOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ParamFlags {
    /// Hardware parameter file (TOML, or JSON when the name ends in .json).
    #[arg(long, env = "DASATOM_PARAMS")]
    pub params: Option<PathBuf>,
    /// Override one parameter, e.g. `--param f_cz=0.99`; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long = "transfer-model")]
    pub transfer_model: Option<TransferTimeModel>,
}

impl ParamFlags {
    pub fn load(&self) -> Result<HardwareParams> {
        let mut p = match &self.params {
            Some(path) => load_params(path)?,
            None => HardwareParams::default(),
        };
        for kv in &self.overrides {
            let (k, v) = kv.split_once('=').with_context(|| format!("expected KEY=VALUE, got `{kv}`"))?;
            let v: f64 = v.trim().parse().with_context(|| format!("bad value in `{kv}`"))?;
            p.set(k.trim(), v).map_err(anyhow::Error::msg)?;
        }
        if let Some(m) = self.transfer_model {
            p.transfer_time_model = m;
        }
        p.validate()?;
        Ok(p)
    }
}

pub fn load_params(path: &Path) -> Result<HardwareParams> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let p = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    } else {
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    };
    Ok(p)
}

/// Reads OpenQASM 2, or the canonical `qubits n` / `cz a b` dump.
pub fn load_circuit(path: &Path) -> Result<CzCircuit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let canonical = text.trim_start().starts_with("qubits");
    let c = if canonical {
        CzCircuit::from_canonical(&text).map_err(anyhow::Error::new)
    } else {
        parse_qasm(&text).map_err(anyhow::Error::new)
    };
    c.with_context(|| format!("parsing {}", path.display()))
}

pub fn circuit_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}
