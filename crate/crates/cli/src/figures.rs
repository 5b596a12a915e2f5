//! Figure-data sweeps. Each figure yields one [`Table`].

use anyhow::Result;
use nmlab_core::correlations::correlation_trajectory_on;
use nmlab_core::nonmarkov::{evaluate, p_grid, MapTrajectory, Measure};
use nmlab_core::register::{DynamicsScheme, InputState, Propagator, WernerParam, Wire};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{scheme_of, RunConfig, SchemeName, VariantName};
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FigureId {
    /// Non-Markovianity measures against p (block dynamics).
    Fig2,
    /// BLP measure against p (gate-by-gate dynamics).
    #[value(name = "fig2_inset")]
    Fig2Inset,
    /// Trace distance of S for |0⟩, |1⟩ at p = 0, t ∈ [5, 8].
    Fig3,
    /// Trace distance of E2 in the original protocol, per p.
    Fig4,
    /// Correlations across S | E1E2, block dynamics, input |0⟩.
    Fig5,
    /// Same with gate-by-gate dynamics, input |0⟩.
    Fig6,
    /// Same with gate-by-gate dynamics, input |+⟩.
    Fig7,
}

impl FigureId {
    pub const ALL: [FigureId; 7] = [
        FigureId::Fig2,
        FigureId::Fig2Inset,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
        FigureId::Fig7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig2Inset => "fig2_inset",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

pub const CORRELATION_COLUMNS: [&str; 5] = ["t", "p", "neg", "discord", "classical"];

fn werner_params(ps: &[f64]) -> Result<Vec<WernerParam>> {
    Ok(ps.iter().map(|&p| WernerParam::new(p)).collect::<nmlab_core::Result<_>>()?)
}

fn ps_or(cfg: &RunConfig, default: Vec<f64>) -> Vec<f64> {
    cfg.p_grid.clone().unwrap_or(default)
}

pub fn run_figure(fig: FigureId, cfg: &RunConfig) -> Result<Table> {
    cfg.validate()?;
    match fig {
        FigureId::Fig2 => {
            let scheme = scheme_of(cfg.scheme.unwrap_or(SchemeName::Block), VariantName::Swap);
            measure_sweep(fig.name(), scheme, &cfg.measures, &ps_or(cfg, p_grid(0.01)), cfg)
        }
        FigureId::Fig2Inset => {
            measure_sweep(fig.name(), DynamicsScheme::GATES, &[Measure::Blp], &ps_or(cfg, p_grid(0.01)), cfg)
        }
        FigureId::Fig3 => fig3(cfg),
        FigureId::Fig4 => fig4(cfg),
        FigureId::Fig5 => {
            correlation_sweep(fig.name(), DynamicsScheme::BLOCK, cfg.input.unwrap_or_else(InputState::zero), cfg)
        }
        FigureId::Fig6 => {
            correlation_sweep(fig.name(), DynamicsScheme::GATES, cfg.input.unwrap_or_else(InputState::zero), cfg)
        }
        FigureId::Fig7 => {
            correlation_sweep(fig.name(), DynamicsScheme::GATES, cfg.input.unwrap_or_else(InputState::plus), cfg)
        }
    }
}

/// Rows `(p, N_m…)` for the selected measures.
pub fn measure_sweep(
    name: &str,
    scheme: DynamicsScheme,
    measures: &[Measure],
    ps: &[f64],
    cfg: &RunConfig,
) -> Result<Table> {
    let columns: Vec<String> =
        std::iter::once("p".to_string()).chain(measures.iter().map(|m| format!("N_{}", m.name()))).collect();
    let prop = Propagator::new(scheme);
    let grid = cfg.grid_for(scheme);
    let settings = cfg.measure_settings();
    let rows = werner_params(ps)?
        .par_iter()
        .map(|&p| {
            let mut row = vec![p.value()];
            for &m in measures {
                row.push(evaluate(m, &prop, p, grid, &settings)?.value);
            }
            Ok(row)
        })
        .collect::<nmlab_core::Result<Vec<_>>>()?;
    Ok(Table { name: name.to_string(), columns, rows })
}

fn input_pair(cfg: &RunConfig) -> [InputState; 2] {
    cfg.pair.unwrap_or([InputState::zero(), InputState::one()])
}

fn fig3(cfg: &RunConfig) -> Result<Table> {
    let [a, b] = input_pair(cfg);
    let p = WernerParam::new(0.0)?;
    let traj = MapTrajectory::new(&Propagator::new(DynamicsScheme::GATES), p, cfg.window(5.0, 8.0), Wire::S)?;
    let mut table = Table::new("fig3", &["t", "D"]);
    for (&t, d) in traj.times().iter().zip(traj.distance_curve(&a, &b)?) {
        table.push(vec![t, d]);
    }
    Ok(table)
}

fn fig4(cfg: &RunConfig) -> Result<Table> {
    let [a, b] = input_pair(cfg);
    let prop = Propagator::new(DynamicsScheme::BBC_GATES);
    let grid = cfg.grid_for(DynamicsScheme::BBC_GATES);
    let ps = werner_params(&ps_or(cfg, vec![0.0, 0.25, 0.5, 0.75, 1.0]))?;
    let blocks = ps
        .par_iter()
        .map(|&p| {
            let traj = MapTrajectory::new(&prop, p, grid, Wire::E2)?;
            let d = traj.distance_curve(&a, &b)?;
            Ok(traj.times().iter().zip(d).map(|(&t, d)| vec![p.value(), t, d]).collect::<Vec<_>>())
        })
        .collect::<nmlab_core::Result<Vec<_>>>()?;
    Ok(Table { name: "fig4".into(), columns: vec!["p".into(), "t".into(), "D".into()], rows: blocks.concat() })
}

/// Rows `(t, p, neg, discord, classical)`, ordered by `p` then `t`.
fn correlation_sweep(name: &str, scheme: DynamicsScheme, psi: InputState, cfg: &RunConfig) -> Result<Table> {
    let prop = Propagator::new(scheme);
    let grid = cfg.grid_for(scheme);
    let ccfg = cfg.correlation_config();
    let ps = werner_params(&ps_or(cfg, p_grid(0.05)))?;
    let blocks = ps
        .par_iter()
        .map(|&p| correlation_trajectory_on(&prop, &psi, p, grid, &ccfg))
        .collect::<nmlab_core::Result<Vec<_>>>()?;
    let mut table = Table::new(name, &CORRELATION_COLUMNS);
    for s in blocks.into_iter().flatten() {
        table.push(vec![s.t, s.p, s.neg, s.discord, s.classical]);
    }
    Ok(table)
}
