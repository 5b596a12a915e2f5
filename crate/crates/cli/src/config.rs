//! Run configuration: a single JSON document, every field optional.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nmlab_core::correlations::{CorrelationConfig, MeasuredSide};
use nmlab_core::nonmarkov::{Measure, MeasureSettings, OptConfig, RhpConfig, TimeGrid};
use nmlab_core::register::{CircuitVariant, DynamicsScheme, InputState, Interpolation};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    /// Three blocks on `t ∈ [0, 1]` via fractional powers.
    Block,
    /// One gate per unit time.
    Gates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VariantName {
    /// SWAP-terminated circuit, output on `S`.
    Swap,
    /// Original protocol, output on `E2`.
    Bbc,
}

pub fn scheme_of(name: SchemeName, variant: VariantName) -> DynamicsScheme {
    let interpolation = match name {
        SchemeName::Block => Interpolation::BlockLog,
        SchemeName::Gates => Interpolation::GateByGate,
    };
    let variant = match variant {
        VariantName::Swap => CircuitVariant::SwapTerminated,
        VariantName::Bbc => CircuitVariant::OriginalBbc,
    };
    DynamicsScheme::new(interpolation, variant)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Overrides the scheme of `fig2`.
    pub scheme: Option<SchemeName>,
    /// Overrides each figure's default p values.
    pub p_grid: Option<Vec<f64>>,
    /// Time samples per unit time on the default grids.
    pub steps_per_unit: usize,
    /// Overrides each figure's default time window and sample count.
    pub time_grid: Option<TimeGrid>,
    /// System input for the correlation figures.
    pub input: Option<InputState>,
    /// Input pair for the trace-distance figures.
    pub pair: Option<[InputState; 2]>,
    /// Measures computed by `fig2`.
    pub measures: Vec<Measure>,
    pub optimizer: OptConfig,
    pub rhp: RhpConfig,
    pub measured_side: MeasuredSide,
    pub threshold_cutoff: f64,
    pub out_dir: PathBuf,
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scheme: None,
            p_grid: None,
            steps_per_unit: 200,
            time_grid: None,
            input: None,
            pair: None,
            measures: Measure::ALL.to_vec(),
            optimizer: OptConfig::default(),
            rhp: RhpConfig::default(),
            measured_side: MeasuredSide::System,
            threshold_cutoff: 1e-4,
            out_dir: PathBuf::from("out"),
            workers: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(ps) = &self.p_grid {
            if ps.is_empty() {
                bail!("p_grid must not be empty");
            }
            if let Some(p) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                bail!("p_grid value {p} outside [0, 1]");
            }
        }
        if !(1..=100_000).contains(&self.steps_per_unit) {
            bail!("steps_per_unit must be in 1..=100000");
        }
        if let Some(g) = &self.time_grid {
            TimeGrid::new(g.t0, g.t1, g.n)?;
        }
        for s in self.input.iter().chain(self.pair.iter().flatten()) {
            s.ket()?;
        }
        if self.measures.is_empty() {
            bail!("measures must not be empty");
        }
        let o = &self.optimizer;
        if o.coarse_theta < 2 || o.coarse_phi < 1 || o.refine_rounds > 30 {
            bail!("optimizer needs coarse_theta ≥ 2, coarse_phi ≥ 1, refine_rounds ≤ 30");
        }
        if !(self.rhp.eps > 0.0 && self.rhp.eps < 0.5) || !(self.rhp.tol > 0.0 && self.rhp.tol < 1.0) {
            bail!("rhp.eps must be in (0, 0.5) and rhp.tol in (0, 1)");
        }
        if !(self.threshold_cutoff >= 0.0) {
            bail!("threshold_cutoff must be non-negative");
        }
        if self.workers == Some(0) {
            bail!("workers must be at least 1");
        }
        Ok(())
    }

    /// SHA-256 of the config with the fields that cannot change any output
    /// (`out_dir`, `workers`) reset.
    pub fn hash(&self) -> String {
        let canonical = Self { out_dir: PathBuf::new(), workers: None, ..self.clone() };
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn measure_settings(&self) -> MeasureSettings {
        MeasureSettings { opt: self.optimizer, rhp: self.rhp }
    }

    pub fn correlation_config(&self) -> CorrelationConfig {
        CorrelationConfig { measured: self.measured_side, opt: self.optimizer }
    }

    /// Configured time grid, or the whole domain of `scheme` at `steps_per_unit`.
    pub fn grid_for(&self, scheme: DynamicsScheme) -> TimeGrid {
        self.time_grid.unwrap_or_else(|| TimeGrid::for_scheme(scheme, self.steps_per_unit))
    }

    /// Grid on `[t0, t1]` at `steps_per_unit`, unless overridden.
    pub fn window(&self, t0: f64, t1: f64) -> TimeGrid {
        self.time_grid.unwrap_or_else(|| {
            let n = ((t1 - t0) * self.steps_per_unit as f64).round() as usize + 1;
            TimeGrid { t0, t1, n: n.max(2) }
        })
    }

    /// Worker count: config, then `NMLAB_WORKERS`, then rayon's default.
    pub fn resolved_workers(&self) -> Result<Option<usize>> {
        if let Some(w) = self.workers {
            return Ok(Some(w));
        }
        match std::env::var("NMLAB_WORKERS") {
            Ok(v) => {
                let w: usize = v.trim().parse().with_context(|| format!("NMLAB_WORKERS={v:?} is not a count"))?;
                if w == 0 {
                    bail!("NMLAB_WORKERS must be at least 1");
                }
                Ok(Some(w))
            }
            Err(_) => Ok(None),
        }
    }
}
