//! Training configuration: a TOML file layered over the defaults, then
//! `--set` overrides, then dedicated flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use procflow::train::{Regime, TrainPlan};
use toml::{Table, Value};

#[derive(Args)]
pub struct TrainArgs {
    /// TOML training plan.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub source: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<PathBuf>,
    #[arg(long)]
    pub validation: Option<PathBuf>,
    /// Checkpoint to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Metric trace to write, one JSON object per step.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
    #[arg(long, env = "PROCFLOW_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub step_swap: bool,
    /// Synonym file; enables word replacement.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Run k-fold cross-validation over the target corpus instead of
    /// writing a checkpoint.
    #[arg(long, value_name = "FOLDS")]
    pub cross_validate: Option<usize>,
    /// Override any plan field, e.g. `target_phase.decay_steps=200`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum RegimeArg {
    TargetOnly,
    SourceOnly,
    DomainAdaptation,
}

impl TrainArgs {
    pub fn plan(&self) -> Result<TrainPlan> {
        let mut table = Table::try_from(TrainPlan::default()).context("encoding default plan")?;
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let mut file: Table = toml::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?;
            resolve_lexicon(&mut file, path.parent().unwrap_or(Path::new(".")));
            merge(&mut table, file);
        }
        for item in &self.overrides {
            let (key, value) = item
                .split_once('=')
                .with_context(|| format!("override {item:?} is not KEY=VALUE"))?;
            set(&mut table, key.trim(), parse_value(value.trim()))?;
        }
        let mut plan: TrainPlan = Value::Table(table)
            .try_into()
            .context("invalid training plan")?;
        if let Some(r) = self.regime {
            plan.regime = match r {
                RegimeArg::TargetOnly => Regime::TargetOnly,
                RegimeArg::SourceOnly => Regime::SourceOnly,
                RegimeArg::DomainAdaptation => Regime::DomainAdaptation,
            };
        }
        if let Some(seed) = self.seed {
            plan.seed = seed;
        }
        if let Some(lr) = self.lr {
            plan.optimizer.initial_lr = lr;
        }
        if self.step_swap {
            plan.augment.step_swap = true;
        }
        if let Some(lexicon) = &self.lexicon {
            plan.augment.word_replace = true;
            plan.augment.lexicon = Some(lexicon.clone());
        }
        plan.validate()?;
        Ok(plan)
    }
}

/// Lexicon paths in a config file are relative to that file.
fn resolve_lexicon(file: &mut Table, base: &Path) {
    if let Some(Value::Table(augment)) = file.get_mut("augment") {
        if let Some(Value::String(p)) = augment.get_mut("lexicon") {
            if Path::new(p.as_str()).is_relative() {
                *p = base.join(&*p).to_string_lossy().into_owned();
            }
        }
    }
}

fn merge(base: &mut Table, overlay: Table) {
    for (k, v) in overlay {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// TOML literal when it parses as one, otherwise a bare string.
fn parse_value(text: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {text}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(text.to_owned()))
}

fn set(table: &mut Table, key: &str, value: Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty());
    let Some(last) = last else {
        bail!("empty override key");
    };
    let mut cursor = table;
    for p in parts {
        let entry = cursor
            .entry(p.to_owned())
            .or_insert_with(|| Value::Table(Table::new()));
        match entry {
            Value::Table(t) => cursor = t,
            _ => bail!("override {key}: {p} is not a table"),
        }
    }
    cursor.insert(last.to_owned(), value);
    Ok(())
}
