//! Stage graph execution and the run record.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context as _, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::cache::{digest, Cache};
use crate::config::{ExperimentConfig, Stage};
use crate::stages::{q_from_summary, CacheStatus, Context, StageOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache: Option<CacheStatus>,
    pub seconds: f64,
    pub files: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Value>,
}

impl StageRecord {
    fn skipped(stage: Stage, why: String) -> Self {
        Self {
            stage,
            status: Status::Skipped,
            cache: None,
            seconds: 0.0,
            files: Vec::new(),
            warnings: Vec::new(),
            error: Some(why),
            summary: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub version: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub stages: Vec<StageRecord>,
    pub warnings: Vec<String>,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.stages.iter().all(|s| s.status == Status::Ok)
    }

    pub fn stage(&self, stage: Stage) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == stage)
    }
}

/// Requested stages plus everything they depend on. Every stage needs the
/// lift; the direct stage needs the tensor unless `q*` is supplied.
pub fn closure(requested: &[Stage], q_supplied: bool) -> BTreeSet<Stage> {
    let mut set: BTreeSet<Stage> = requested.iter().copied().collect();
    set.insert(Stage::Lift);
    if set.contains(&Stage::Direct) && !q_supplied {
        set.insert(Stage::Tensor);
    }
    set
}

fn execute(ctx: &Context<'_>, stage: Stage, cache: Option<&Cache>, out: &Path) -> StageRecord {
    let start = Instant::now();
    let result = ctx.run(stage, cache).and_then(|(o, c)| write_files(out, &o).map(|()| (o, c)));
    let seconds = start.elapsed().as_secs_f64();
    match result {
        Ok((o, c)) => {
            for w in &o.warnings {
                log::warn!("{}: {w}", stage.name());
            }
            StageRecord {
                stage,
                status: Status::Ok,
                cache: Some(c),
                seconds,
                files: o.files.keys().cloned().collect(),
                warnings: o.warnings,
                error: None,
                summary: Some(o.summary),
            }
        }
        Err(e) => StageRecord {
            stage,
            status: Status::Failed,
            cache: None,
            seconds,
            files: Vec::new(),
            warnings: Vec::new(),
            error: Some(format!("{e:#}")),
            summary: None,
        },
    }
}

fn write_files(out: &Path, o: &StageOutput) -> Result<()> {
    for (name, body) in &o.files {
        let path = out.join(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Runs `requested` (with dependencies) and writes outputs plus `run.json`
/// into `out`.
pub fn run(
    cfg: &ExperimentConfig,
    seed: u64,
    requested: &[Stage],
    q_override: Option<f64>,
    cache: Option<&Cache>,
    out: &Path,
) -> Result<RunRecord> {
    cfg.validate()?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let stages = closure(requested, q_override.is_some());
    let mut ctx = Context::new(cfg, seed)?;
    let mut records = Vec::new();

    let lift = execute(&ctx, Stage::Lift, cache, out);
    let gate = match (&lift.status, &lift.summary) {
        (Status::Ok, Some(s)) if s["coercive"] == Value::Bool(false) => Some("coefficient is not coercive".to_string()),
        (Status::Ok, _) => None,
        _ => Some("lift failed".to_string()),
    };
    records.push(lift);

    let middle: Vec<Stage> = [Stage::Eig, Stage::Cell, Stage::Tensor, Stage::Transform]
        .into_iter()
        .filter(|s| stages.contains(s))
        .collect();
    match &gate {
        Some(why) => records.extend(middle.iter().map(|s| StageRecord::skipped(*s, why.clone()))),
        None => records.extend(middle.par_iter().map(|s| execute(&ctx, *s, cache, out)).collect::<Vec<_>>()),
    }

    if stages.contains(&Stage::Direct) {
        let q = match (q_override, &gate) {
            (_, Some(why)) => Err(why.clone()),
            (Some(q), None) => Ok(q),
            (None, None) => match records.iter().find(|r| r.stage == Stage::Tensor) {
                Some(StageRecord { status: Status::Ok, summary: Some(s), .. }) => {
                    q_from_summary(s).map_err(|e| format!("{e:#}"))
                }
                _ => Err("tensor stage failed".to_string()),
            },
        };
        records.push(match q {
            Ok(q) => {
                ctx.q_star = Some(q);
                execute(&ctx, Stage::Direct, cache, out)
            }
            Err(why) => StageRecord::skipped(Stage::Direct, why),
        });
    }

    let warnings = records.iter().flat_map(|r| r.warnings.iter().map(move |w| format!("{}: {w}", r.stage.name()))).collect();
    let record = RunRecord {
        version: env!("CARGO_PKG_VERSION"),
        config_hash: digest(format!("{}\n{seed}", serde_json::to_string(cfg)?).as_bytes()),
        seed,
        config: cfg.clone(),
        stages: records,
        warnings,
    };
    let path = out.join("run.json");
    std::fs::write(&path, serde_json::to_string_pretty(&record)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(record)
}
