//! Pipeline stages. Each stage turns the configuration into named output
//! files plus a JSON summary; results are cached whole.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{bail, ensure, Context as _, Result};
use qphom::blochtransform::{transform_convergence, CompactFunction};
use qphom::cell::CellProblem;
use qphom::directsolver::{convergence_report, decreasing_trend, refinement_change, MeshPolicy};
use qphom::qpcore::input::CoefficientSpec;
use qphom::qpcore::{
    coercivity_estimate, detect_module, kozlov_diagnostic, lift, torus_coercivity, LiftedMedium, QPMatrix, WindingMap,
    FREQ_TOL,
};
use qphom::tensor::{delta_continuation, Continuation};
use qphom::{BlochProblem, Error as CoreError, Route};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cache::Cache;
use crate::config::{ExperimentConfig, FunctionSource, SampleFile, Stage};

/// Files and summary produced by a stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageOutput {
    pub files: BTreeMap<String, String>,
    pub summary: Value,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CacheStatus {
    Hit,
    Miss,
    Off,
}

pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub spec: CoefficientSpec,
    pub seed: u64,
    /// Effective tensor handed to the direct stage.
    pub q_star: Option<f64>,
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a ExperimentConfig, seed: u64) -> Result<Self> {
        Ok(Self { cfg, spec: cfg.spec()?, seed, q_star: None })
    }

    fn matrix(&self) -> Result<QPMatrix<f64>> {
        Ok(self.spec.to_matrix()?)
    }

    fn winding(&self, a: &QPMatrix<f64>) -> Result<WindingMap<f64>> {
        let p = self.cfg.tolerances.p_check;
        Ok(match self.spec.winding(p)? {
            Some(w) => w,
            None => detect_module(&a.frequencies(), p, FREQ_TOL)?,
        })
    }

    fn medium(&self) -> Result<LiftedMedium<f64>> {
        let a = self.matrix()?;
        let w = self.winding(&a)?;
        Ok(LiftedMedium::new(&a, w)?)
    }

    /// Canonical cache key: every input that affects the stage's numbers.
    pub fn key(&self, stage: Stage) -> String {
        let c = self.cfg;
        let params = match stage {
            Stage::Lift => json!({"p_check": c.tolerances.p_check, "samples": c.tolerances.coercivity_samples, "seed": self.seed}),
            Stage::Eig => json!({"deltas": c.deltas, "n": c.n, "eta": c.eta_grid, "tol": c.tolerances.eig}),
            Stage::Cell => json!({"deltas": c.deltas, "n": c.n}),
            Stage::Tensor => json!({"deltas": c.deltas, "n": c.n, "h": c.h, "tol": c.tolerances.eig, "route": c.route}),
            Stage::Transform => json!({
                "delta": c.transform_delta, "n": c.transform_n, "function": c.function,
                "epsilons": c.epsilons, "xis": c.xis, "tol": c.tolerances.eig,
                "samples": self.sample_digest(),
            }),
            Stage::Direct => json!({"epsilons": c.direct_epsilons, "cells_per_eps": c.cells_per_eps, "q": self.q_star}),
        };
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "stage": stage.name(),
            "coefficient": self.spec,
            "p_check": c.tolerances.p_check,
            "params": params,
        })
        .to_string()
    }

    fn sample_digest(&self) -> Option<String> {
        match &self.cfg.function {
            FunctionSource::Samples { samples } => std::fs::read(samples).ok().map(|b| crate::cache::digest(&b)),
            FunctionSource::Named(_) => None,
        }
    }

    /// Runs `stage`, going through `cache` when present.
    pub fn run(&self, stage: Stage, cache: Option<&Cache>) -> Result<(StageOutput, CacheStatus)> {
        let Some(cache) = cache else {
            return Ok((self.compute(stage)?, CacheStatus::Off));
        };
        let key = self.key(stage);
        if let Some(bytes) = cache.lookup(&key) {
            match serde_json::from_slice(&bytes) {
                Ok(out) => return Ok((out, CacheStatus::Hit)),
                Err(e) => log::warn!("unreadable cache payload for stage {}: {e}", stage.name()),
            }
        }
        let out = self.compute(stage)?;
        cache.store(&key, &serde_json::to_vec(&out)?)?;
        Ok((out, CacheStatus::Miss))
    }

    pub fn compute(&self, stage: Stage) -> Result<StageOutput> {
        match stage {
            Stage::Lift => self.lift(),
            Stage::Eig => self.eig(),
            Stage::Cell => self.cell(),
            Stage::Tensor => self.tensor(),
            Stage::Transform => self.transform(),
            Stage::Direct => self.direct(),
        }
    }

    fn lift(&self) -> Result<StageOutput> {
        let a = self.matrix()?;
        let w = self.winding(&a)?;
        let b = lift(&a, &w)?;
        let d = w.d();
        let mut round_trip: f64 = 0.0;
        for i in 0..64 {
            let x: Vec<f64> = (0..d).map(|k| -20.0 + 0.6361 * i as f64 + 0.37 * k as f64).collect();
            let direct = a.eval(&x);
            for (u, v) in b.restrict(&w, &x).iter().zip(&direct) {
                round_trip = round_trip.max((u - v).norm());
            }
        }
        let mut warnings = Vec::new();
        let bound = w.checked_bound();
        if bound != usize::MAX && bound < self.cfg.tolerances.p_check {
            warnings.push(format!("injectivity checked only up to |p| ≤ {bound}"));
        }
        let estimate = match coercivity_estimate(&a, self.cfg.tolerances.coercivity_samples, self.seed) {
            Ok(v) => v,
            Err(CoreError::CoercivityViolation { estimate }) => {
                warnings.push(format!("coefficient is not coercive (sampled minimum {estimate})"));
                estimate
            }
            Err(e) => return Err(e.into()),
        };
        let alpha = torus_coercivity(&b);
        if alpha <= 0.0 {
            warnings.push(format!("lifted field is not coercive on the torus (α ≈ {alpha})"));
        }
        let summary = json!({
            "dim": a.dim(),
            "size": a.size(),
            "m": w.m(),
            "lambda": w.rows(),
            "periodic": w.is_periodic(),
            "injectivity_bound": (bound != usize::MAX).then_some(bound),
            "fourier_modes": b.len(),
            "round_trip_error": round_trip,
            "kozlov": kozlov_diagnostic(&w, 2.0, 50),
            "coercivity_estimate": estimate,
            "torus_alpha": alpha,
            "coercive": alpha > 0.0 && estimate > 0.0,
            "sup_bound": b.sup_bound(),
            "mean": b.mean(),
        });
        Ok(StageOutput { files: files([("lift.json", pretty(&summary)?)]), summary, warnings })
    }

    fn eig(&self) -> Result<StageOutput> {
        let m = self.medium()?;
        let d = m.d();
        let etas = self.cfg.eta_grid.points(d);
        ensure!(etas.iter().all(|e| e.len() == d), "eta grid points must have {d} components");
        let mut csv = String::from("delta,");
        for k in 0..d {
            write!(csv, "eta{k},")?;
        }
        csv.push_str("lambda,gap,residual,near_degenerate\n");
        let mut warnings = Vec::new();
        let mut min_gap = f64::INFINITY;
        for &delta in &self.cfg.deltas {
            let prob = BlochProblem::new(&m, delta, self.cfg.n)?;
            for (eta, row) in etas.iter().zip(prob.eigen_sweep(&etas, self.cfg.tolerances.eig)) {
                match row {
                    Ok(r) => {
                        write!(csv, "{},", num(delta))?;
                        for v in &r.eta {
                            write!(csv, "{},", num(*v))?;
                        }
                        writeln!(csv, "{},{},{},{}", num(r.lambda), num(r.gap), num(r.residual), r.near_degenerate)?;
                        min_gap = min_gap.min(r.gap);
                        if r.near_degenerate {
                            warnings.push(format!("λ₁ not simple at δ = {delta}, η = {eta:?}"));
                        }
                    }
                    Err(e) => warnings.push(format!("δ = {delta}, η = {eta:?}: {e}")),
                }
            }
        }
        let summary = json!({"rows": etas.len() * self.cfg.deltas.len(), "min_gap": min_gap});
        Ok(StageOutput { files: files([("eig.csv", csv)]), summary, warnings })
    }

    fn cell(&self) -> Result<StageOutput> {
        let m = self.medium()?;
        let n = self.cfg.n;
        let records: Vec<Value> = self
            .cfg
            .deltas
            .par_iter()
            .map(|&delta| -> Result<Value> {
                let cp = CellProblem::new(&m, delta, n)?;
                let correctors = cp.solve_all()?;
                let tensor = qphom::cell::tensor_from_cell(&correctors, &m)?;
                let cs: Vec<Value> = correctors
                    .iter()
                    .map(|c| {
                        json!({"l": c.l, "residual": c.residual, "l2_norm": c.l2_norm(), "l1_norm": c.l1_norm(), "energy": c.energy})
                    })
                    .collect();
                Ok(json!({"delta": delta, "n": n, "tensor": tensor, "correctors": cs}))
            })
            .collect::<Result<_>>()?;
        let summary = json!({ "cell": records });
        Ok(StageOutput { files: files([("cell.json", pretty(&summary)?)]), summary, warnings: Vec::new() })
    }

    fn tensor(&self) -> Result<StageOutput> {
        let m = self.medium()?;
        let c = self.cfg;
        let (cell, hess) = rayon::join(
            || delta_continuation(&m, &c.deltas, c.n, Route::Cell, c.h, c.tolerances.eig),
            || delta_continuation(&m, &c.deltas, c.n, Route::Hessian, c.h, c.tolerances.eig),
        );
        let (cell, hess) = (cell?, hess?);
        let cross: Vec<Value> = cell
            .schedule
            .iter()
            .zip(&hess.schedule)
            .map(|(a, b)| {
                let gap = a.distance(b);
                let bound = 1e-6 * (1.0 + a.max_abs()) + b.diagnostics.richardson.unwrap_or(0.0);
                json!({"delta": a.delta, "gap": gap, "bound": bound, "agree": gap <= bound})
            })
            .collect();
        let mut warnings = Vec::new();
        for (name, cont) in [("cell", &cell), ("hessian", &hess)] {
            collect_warnings(name, cont, &mut warnings);
        }
        for row in &cross {
            if row["agree"] == json!(false) {
                warnings.push(format!("routes disagree at δ = {}", row["delta"]));
            }
        }
        let chosen = match c.route {
            Route::Hessian => &hess,
            _ => &cell,
        };
        let summary = json!({
            "route": c.route,
            "q_star": chosen.tensor.q,
            "d": chosen.tensor.d,
            "n": c.n,
            "h": c.h,
            "deltas": c.deltas,
            "cell": cell,
            "hessian": hess,
            "cross_route": cross,
        });
        Ok(StageOutput { files: files([("tensor.json", pretty(&summary)?)]), summary, warnings })
    }

    fn test_function(&self, d: usize) -> Result<CompactFunction<f64>> {
        Ok(match &self.cfg.function {
            FunctionSource::Named(name) if name == "gaussian" => CompactFunction::gaussian(d, 8.0)?,
            FunctionSource::Named(name) if name == "bump" => CompactFunction::bump(d, 2.0)?,
            FunctionSource::Named(name) => bail!("unknown test function {name:?}"),
            FunctionSource::Samples { samples } => {
                let text = std::fs::read_to_string(samples).with_context(|| format!("reading {}", samples.display()))?;
                let s: SampleFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", samples.display()))?;
                CompactFunction::from_samples(s.lo, s.hi, s.cells, s.values, qphom::blochtransform::BOUNDARY_TOL)?
            }
        })
    }

    fn transform(&self) -> Result<StageOutput> {
        let m = self.medium()?;
        let d = m.d();
        let c = self.cfg;
        let prob = BlochProblem::new(&m, c.transform_delta, c.transform_n)?;
        let g = self.test_function(d)?;
        let xis = c.xis.points(d);
        let conv = transform_convergence(&g, &prob, &c.epsilons, &xis, c.tolerances.eig)?;
        let mut csv = String::new();
        for k in 0..d {
            write!(csv, "xi{k},")?;
        }
        csv.push_str("epsilon,re,im,abs_error\n");
        let mut warnings = Vec::new();
        for t in &conv.tables {
            for r in &t.rows {
                for v in &r.xi {
                    write!(csv, "{},", num(*v))?;
                }
                let err = (r.value - r.reference).norm();
                writeln!(csv, "{},{},{},{}", num(t.epsilon), num(r.value.re), num(r.value.im), num(err))?;
            }
            warnings.extend(t.warnings.iter().map(|w| format!("ε = {}: {w}", t.epsilon)));
        }
        let errors: Vec<f64> = conv.rows.iter().map(|r| r.sup_error).collect();
        let summary = json!({
            "delta": c.transform_delta,
            "n": c.transform_n,
            "rows": conv.rows,
            "slope": conv.slope,
            "decreasing": decreasing_trend(&errors, 0),
        });
        Ok(StageOutput {
            files: files([("transform.csv", csv), ("transform.json", pretty(&summary)?)]),
            summary,
            warnings,
        })
    }

    fn direct(&self) -> Result<StageOutput> {
        let q = self.q_star.context("the direct stage needs an effective tensor")?;
        let a = self.matrix()?;
        ensure!(a.dim() == 1 && a.size() == 1, "the direct solver needs a scalar one-dimensional coefficient");
        let coef = a.entry(0, 0);
        let policy = MeshPolicy { cells_per_eps: self.cfg.cells_per_eps, ..MeshPolicy::default() };
        let one = |_: f64| 1.0;
        let eps = &self.cfg.direct_epsilons;
        let (rows, fine) = rayon::join(
            || convergence_report(coef, q, &one, eps, policy),
            || convergence_report(coef, q, &one, eps, policy.refined()),
        );
        let (rows, fine) = (rows?, fine?);
        let change = refinement_change(&rows, &fine);
        let mut csv = String::from("epsilon,n_cells,l2_error,flux_error\n");
        for r in &rows {
            writeln!(csv, "{},{},{},{}", num(r.eps), r.n_cells, num(r.l2_error), num(r.flux_error))?;
        }
        let l2: Vec<f64> = rows.iter().map(|r| r.l2_error).collect();
        let fl: Vec<f64> = rows.iter().map(|r| r.flux_error).collect();
        let mut warnings = Vec::new();
        if change >= 0.1 {
            warnings.push(format!("mesh refinement changes the report by {:.1}%", 100.0 * change));
        }
        let summary = json!({
            "q_star": q,
            "refinement_change": change,
            "l2_decreasing": decreasing_trend(&l2, 1),
            "flux_decreasing": decreasing_trend(&fl, 1),
        });
        Ok(StageOutput { files: files([("direct.csv", csv), ("direct.json", pretty(&summary)?)]), summary, warnings })
    }
}

fn collect_warnings(name: &str, cont: &Continuation<f64>, out: &mut Vec<String>) {
    let t = &cont.tensor;
    if t.diagnostics.no_extrapolation {
        out.push(format!("{name} route: no extrapolation"));
    }
    for s in &cont.schedule {
        out.extend(s.diagnostics.warnings.iter().map(|w| format!("{name} route, δ = {}: {w}", s.delta)));
    }
    out.extend(t.diagnostics.warnings.iter().map(|w| format!("{name} route: {w}")));
}

/// Shortest round-trip form, in exponent notation for small magnitudes.
fn num(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn files<const K: usize>(items: [(&str, String); K]) -> BTreeMap<String, String> {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn pretty(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// `q*` from a tensor report or a literal number.
pub fn read_q_source(src: &str) -> Result<f64> {
    if let Ok(v) = crate::config::parse_number(src) {
        return Ok(v);
    }
    let text = std::fs::read_to_string(src).with_context(|| format!("reading {src}"))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {src}"))?;
    let q = v["q_star"].as_array().context("tensor report has no q_star")?;
    ensure!(q.len() == 1, "the direct solver needs a 1 × 1 tensor");
    q[0].as_f64().context("q_star is not a number")
}

/// `q*` from a tensor stage summary.
pub fn q_from_summary(summary: &Value) -> Result<f64> {
    let q = summary["q_star"].as_array().context("tensor summary has no q_star")?;
    ensure!(q.len() == 1, "the direct solver needs a 1 × 1 tensor, got {} entries", q.len());
    q[0].as_f64().context("q_star is not a number")
}
