//! Experiment configuration (JSON).

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use qphom::presets::Preset;
use qphom::qpcore::input::{CoefficientSpec, Number};
use qphom::Route;
use serde::{Deserialize, Serialize};

/// A preset name or an inline coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSource {
    Preset(String),
    Inline(CoefficientSpec),
}

/// Points along each axis: an explicit list, or `count` uniform points from
/// `min` to `max` inclusive (tensor product in higher dimension).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Uniform { min: f64, max: f64, count: usize },
    Points(Vec<Vec<f64>>),
}

impl Grid {
    pub fn points(&self, d: usize) -> Vec<Vec<f64>> {
        match self {
            Grid::Points(p) => p.clone(),
            Grid::Uniform { min, max, count } => {
                let axis: Vec<f64> = match count {
                    0 => Vec::new(),
                    1 => vec![*min],
                    c => (0..*c).map(|i| min + (max - min) * i as f64 / (*c - 1) as f64).collect(),
                };
                let mut out = vec![Vec::new()];
                for _ in 0..d {
                    out = out
                        .into_iter()
                        .flat_map(|p| {
                            axis.iter().map(move |v| {
                                let mut q = p.clone();
                                q.push(*v);
                                q
                            })
                        })
                        .collect();
                }
                out
            }
        }
    }

    /// `min:max:count` or a comma-separated list of 1D points.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() == 3 {
            return Ok(Grid::Uniform {
                min: parse_number(parts[0])?,
                max: parse_number(parts[1])?,
                count: parts[2].trim().parse().with_context(|| format!("bad count in {s:?}"))?,
            });
        }
        Ok(Grid::Points(parse_list(s)?.into_iter().map(|v| vec![v]).collect()))
    }
}

/// The test function for the transform stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSource {
    Named(String),
    Samples { samples: PathBuf },
}

/// Sampled test function file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFile {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Lift,
    Eig,
    Cell,
    Tensor,
    Transform,
    Direct,
}

impl Stage {
    pub const ALL: [Stage; 6] = [Stage::Lift, Stage::Eig, Stage::Cell, Stage::Tensor, Stage::Transform, Stage::Direct];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Lift => "lift",
            Stage::Eig => "eig",
            Stage::Cell => "cell",
            Stage::Tensor => "tensor",
            Stage::Transform => "transform",
            Stage::Direct => "direct",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Eigenpair residual tolerance.
    pub eig: f64,
    /// Injectivity scan bound for the winding matrix.
    pub p_check: usize,
    /// Samples for the line coercivity estimate.
    pub coercivity_samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { eig: 1e-10, p_check: qphom::qpcore::DEFAULT_P_CHECK, coercivity_samples: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub coefficient: CoefficientSource,
    /// Replaces the winding matrix of the coefficient.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<Vec<Number>>>,
    pub deltas: Vec<f64>,
    pub n: usize,
    pub h: f64,
    pub eta_grid: Grid,
    /// Route whose extrapolated tensor feeds the direct solver.
    pub route: Route,
    pub transform_delta: f64,
    pub transform_n: usize,
    pub function: FunctionSource,
    pub epsilons: Vec<f64>,
    pub xis: Grid,
    pub direct_epsilons: Vec<f64>,
    pub cells_per_eps: usize,
    pub tolerances: Tolerances,
    pub stages: Vec<Stage>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            coefficient: CoefficientSource::Preset(Preset::QpSinSqrt2.name().into()),
            lambda: None,
            deltas: vec![1e-1, 1e-2, 1e-3, 1e-4],
            n: 16,
            h: 1e-3,
            eta_grid: Grid::Uniform { min: -0.45, max: 0.45, count: 19 },
            route: Route::Cell,
            transform_delta: 1e-3,
            transform_n: 8,
            function: FunctionSource::Named("gaussian".into()),
            epsilons: (3..=8).map(|k| 2f64.powi(-k)).collect(),
            xis: Grid::Uniform { min: -1.0, max: 1.0, count: 9 },
            direct_epsilons: (4..=9).map(|k| 2f64.powi(-k)).collect(),
            cells_per_eps: 32,
            tolerances: Tolerances::default(),
            stages: Stage::ALL.to_vec(),
        }
    }
}

fn decreasing(name: &str, v: &[f64]) -> Result<()> {
    ensure!(!v.is_empty(), "{name} must be nonempty");
    ensure!(v.iter().all(|x| x.is_finite() && *x > 0.0), "{name} must be positive");
    ensure!(v.windows(2).all(|w| w[1] < w[0]), "{name} must be strictly decreasing");
    Ok(())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec()?;
        decreasing("deltas", &self.deltas)?;
        ensure!(self.deltas.iter().all(|d| *d < 1.0), "deltas must lie in (0, 1)");
        ensure!(self.transform_delta > 0.0 && self.transform_delta < 1.0, "transform_delta must lie in (0, 1)");
        ensure!(self.n > 0 && self.transform_n > 0, "truncation must be positive");
        ensure!(self.h > 0.0 && self.h < 0.5, "h must lie in (0, 1/2)");
        decreasing("epsilons", &self.epsilons)?;
        decreasing("direct_epsilons", &self.direct_epsilons)?;
        ensure!(!self.eta_grid.points(1).is_empty(), "eta_grid must be nonempty");
        ensure!(!self.xis.points(1).is_empty(), "xis must be nonempty");
        ensure!(self.cells_per_eps >= 16, "cells_per_eps must be at least 16");
        let t = &self.tolerances;
        ensure!(t.eig > 0.0 && t.p_check > 0 && t.coercivity_samples > 0, "tolerances must be positive");
        ensure!(!self.stages.is_empty(), "no stages requested");
        if let FunctionSource::Named(name) = &self.function {
            ensure!(name == "gaussian" || name == "bump", "unknown test function {name:?}");
        }
        Ok(())
    }

    /// The coefficient with any winding override applied.
    pub fn spec(&self) -> Result<CoefficientSpec> {
        let mut spec = match &self.coefficient {
            CoefficientSource::Preset(name) => Preset::from_name(name)?.spec(),
            CoefficientSource::Inline(spec) => spec.clone(),
        };
        if let Some(l) = &self.lambda {
            spec.lambda = Some(l.clone());
        }
        Ok(spec)
    }
}

pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    match s.parse::<f64>() {
        Ok(v) => Ok(v),
        Err(_) => Ok(qphom::qpcore::input::eval_expr(s)?),
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s.split(',').map(parse_number).collect::<Result<_>>()?;
    if v.is_empty() {
        bail!("empty list");
    }
    Ok(v)
}

/// `"1;sqrt(2)"`: rows separated by `;`, entries by `,`.
pub fn parse_lambda(s: &str) -> Result<Vec<Vec<Number>>> {
    s.split(';')
        .map(|row| row.split(',').map(|v| parse_number(v).map(Number::Value)).collect())
        .collect()
}
