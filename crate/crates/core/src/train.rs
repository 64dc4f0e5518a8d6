//! Optimization, learning-rate schedules and the training regimes.

use std::path::PathBuf;

use ndarray::ArrayD;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::augment::{augment_corpus, AugmentConfig, SynonymLexicon};
use crate::corpus::{make_folds, select, DatasetPair};
use crate::error::{Error, Result};
use crate::graph::FlowGraph;
use crate::metrics::Prf;
use crate::numeric::{fnv1a, Gradients, ParamStore};
use crate::parser::{EdgeModelConfig, EdgeParser};
use crate::tagger::{NodeModelConfig, NodeTagger};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub initial_lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            initial_lr: 5.0e-5,
            weight_decay: 1.0e-5,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_lr > 0.0) || !(self.weight_decay >= 0.0) {
            return Err(Error::Config(
                "optimizer needs initial_lr > 0 and weight_decay >= 0".into(),
            ));
        }
        let beta_ok = |b: f64| (0.0..1.0).contains(&b);
        if !beta_ok(self.beta1) || !beta_ok(self.beta2) || !(self.epsilon > 0.0) {
            return Err(Error::Config("optimizer betas must lie in [0, 1) and epsilon > 0".into()));
        }
        Ok(())
    }
}

/// Batch size and schedule of one training phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub batch_size: usize,
    pub warmup_steps: usize,
    pub decay_steps: usize,
    #[serde(default)]
    pub floor_lr: f64,
}

impl PhaseConfig {
    pub fn source_default() -> Self {
        PhaseConfig {
            batch_size: 5,
            warmup_steps: 500,
            decay_steps: 4500,
            floor_lr: 0.0,
        }
    }

    pub fn target_default() -> Self {
        PhaseConfig {
            batch_size: 3,
            warmup_steps: 100,
            decay_steps: 900,
            floor_lr: 0.0,
        }
    }

    pub fn total_steps(&self) -> usize {
        self.warmup_steps + self.decay_steps
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.decay_steps == 0 || !(self.floor_lr >= 0.0) {
            return Err(Error::Config(
                "phase needs batch_size > 0, decay_steps > 0 and floor_lr >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Linear warmup to the initial rate, then cosine annealing to the floor.
pub fn lr_at(step: usize, opt: &OptimizerConfig, phase: &PhaseConfig) -> f64 {
    lr_at_time(step as f64, opt, phase)
}

/// The same schedule at a fractional step.
pub fn lr_at_time(t: f64, opt: &OptimizerConfig, phase: &PhaseConfig) -> f64 {
    let (warmup, decay) = (phase.warmup_steps as f64, phase.decay_steps as f64);
    if t < warmup {
        return opt.initial_lr * t / warmup;
    }
    if t > warmup + decay {
        return phase.floor_lr;
    }
    if decay == 0.0 {
        return opt.initial_lr;
    }
    let progress = (t - warmup) / decay;
    let cosine = 0.5 * (1.0 + (std::f64::consts::PI * progress).cos());
    phase.floor_lr + (opt.initial_lr - phase.floor_lr) * cosine
}

/// Adam with weight decay applied directly to the parameters.
#[derive(Clone, Debug)]
pub struct AdamW {
    config: OptimizerConfig,
    first: Vec<ArrayD<f64>>,
    second: Vec<ArrayD<f64>>,
    steps: i32,
}

impl AdamW {
    pub fn new(store: &ParamStore, config: OptimizerConfig) -> Self {
        let zeros = || -> Vec<ArrayD<f64>> {
            store
                .params()
                .iter()
                .map(|p| ArrayD::zeros(p.value.raw_dim()))
                .collect()
        };
        AdamW {
            config,
            first: zeros(),
            second: zeros(),
            steps: 0,
        }
    }

    /// One update at rate `lr`. A non-finite gradient aborts the step and
    /// leaves parameters and moments untouched.
    pub fn step(&mut self, store: &mut ParamStore, grads: &Gradients, lr: f64) -> Result<()> {
        if !grads.is_finite() {
            return Err(Error::NonFinite(format!(
                "gradient at optimizer step {}",
                self.steps + 1
            )));
        }
        self.steps += 1;
        let c = &self.config;
        let correct1 = 1.0 - c.beta1.powi(self.steps);
        let correct2 = 1.0 - c.beta2.powi(self.steps);
        let decay = 1.0 - lr * c.weight_decay;
        for (((value, g), m), v) in store
            .values_mut()
            .zip(grads.blocks())
            .zip(&mut self.first)
            .zip(&mut self.second)
        {
            ndarray::Zip::from(value)
                .and(g)
                .and(m)
                .and(v)
                .for_each(|p, &g, m, v| {
                    *m = c.beta1 * *m + (1.0 - c.beta1) * g;
                    *v = c.beta2 * *v + (1.0 - c.beta2) * g * g;
                    let update = (*m / correct1) / ((*v / correct2).sqrt() + c.epsilon);
                    *p = *p * decay - lr * update;
                });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    TargetOnly,
    SourceOnly,
    DomainAdaptation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Node,
    Edge,
}

/// Which snapshot a phase hands on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// Best validation score among evaluated steps; the earliest wins ties.
    /// Falls back to the final step without validation data.
    #[default]
    BestValidation,
    FinalStep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentSettings {
    pub step_swap: bool,
    pub word_replace: bool,
    /// Synonym file used by word replacement.
    pub lexicon: Option<PathBuf>,
    pub max_swaps_per_example: usize,
    pub replacements_per_example: usize,
    pub replace_probability: f64,
}

impl Default for AugmentSettings {
    fn default() -> Self {
        let d = AugmentConfig::default();
        AugmentSettings {
            step_swap: false,
            word_replace: false,
            lexicon: None,
            max_swaps_per_example: d.max_swaps_per_example,
            replacements_per_example: d.replacements_per_example,
            replace_probability: d.replace_probability,
        }
    }
}

impl AugmentSettings {
    pub fn config(&self, seed: u64) -> AugmentConfig {
        AugmentConfig {
            max_swaps_per_example: self.max_swaps_per_example,
            replacements_per_example: self.replacements_per_example,
            replace_probability: self.replace_probability,
            seed,
        }
    }
}

/// Everything needed to reproduce one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainPlan {
    pub regime: Regime,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
    pub source_phase: PhaseConfig,
    pub target_phase: PhaseConfig,
    pub augment: AugmentSettings,
    pub selection: Selection,
    /// Validation is scored every this many steps and at each phase's end.
    pub eval_interval: usize,
    pub node_model: NodeModelConfig,
    pub edge_model: EdgeModelConfig,
}

impl Default for TrainPlan {
    fn default() -> Self {
        TrainPlan {
            regime: Regime::DomainAdaptation,
            seed: 0,
            optimizer: OptimizerConfig::default(),
            source_phase: PhaseConfig::source_default(),
            target_phase: PhaseConfig::target_default(),
            augment: AugmentSettings::default(),
            selection: Selection::default(),
            eval_interval: 100,
            node_model: NodeModelConfig::default(),
            edge_model: EdgeModelConfig::default(),
        }
    }
}

impl TrainPlan {
    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate()?;
        self.source_phase.validate()?;
        self.target_phase.validate()?;
        self.node_model.encoder.validate()?;
        self.edge_model.encoder.validate()?;
        self.edge_model.biaffine.validate()?;
        self.edge_model.loss.validate()?;
        self.augment.config(self.seed).validate()?;
        if self.eval_interval == 0 {
            return Err(Error::Config("eval_interval must be positive".into()));
        }
        Ok(())
    }
}

/// A model the training loop can optimize.
pub trait Trainable: Clone + Send + Sync {
    fn store(&self) -> &ParamStore;
    fn store_mut(&mut self) -> &mut ParamStore;
    fn loss_and_grad(&self, gold: &FlowGraph) -> Result<(f64, Gradients)>;
    /// Model-selection metric on held-out graphs: higher is better.
    fn validation_score(&self, graphs: &[FlowGraph]) -> Result<f64>;
    /// Test metric used by cross-validation.
    fn evaluate(&self, graphs: &[FlowGraph]) -> Result<Prf>;
}

impl Trainable for NodeTagger {
    fn store(&self) -> &ParamStore {
        &self.store
    }
    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }
    fn loss_and_grad(&self, gold: &FlowGraph) -> Result<(f64, Gradients)> {
        NodeTagger::loss_and_grad(self, gold)
    }
    fn validation_score(&self, graphs: &[FlowGraph]) -> Result<f64> {
        Ok(NodeTagger::evaluate(self, graphs).f1)
    }
    fn evaluate(&self, graphs: &[FlowGraph]) -> Result<Prf> {
        Ok(NodeTagger::evaluate(self, graphs))
    }
}

impl Trainable for EdgeParser {
    fn store(&self) -> &ParamStore {
        &self.store
    }
    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }
    fn loss_and_grad(&self, gold: &FlowGraph) -> Result<(f64, Gradients)> {
        EdgeParser::loss_and_grad(self, gold)
    }
    fn validation_score(&self, graphs: &[FlowGraph]) -> Result<f64> {
        Ok(EdgeParser::evaluate(self, graphs)?.f1)
    }
    fn evaluate(&self, graphs: &[FlowGraph]) -> Result<Prf> {
        EdgeParser::evaluate(self, graphs)
    }
}

#[derive(Clone, Debug)]
pub enum TrainedModel {
    Node(NodeTagger),
    Edge(EdgeParser),
}

impl TrainedModel {
    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        match self {
            TrainedModel::Node(m) => m.save(path),
            TrainedModel::Edge(m) => m.save(path),
        }
    }

    pub fn evaluate(&self, graphs: &[FlowGraph]) -> Result<Prf> {
        match self {
            TrainedModel::Node(m) => Trainable::evaluate(m, graphs),
            TrainedModel::Edge(m) => Trainable::evaluate(m, graphs),
        }
    }
}

/// One row of the metric trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub phase: String,
    pub step: usize,
    pub lr: f64,
    /// Mean loss over the step's batch.
    pub loss: f64,
    pub validation: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<M> {
    pub model: M,
    pub trace: Vec<TraceEntry>,
}

struct Phase<'a> {
    name: &'static str,
    data: Vec<FlowGraph>,
    config: &'a PhaseConfig,
}

fn phases<'a>(
    plan: &'a TrainPlan,
    data: &DatasetPair,
    lexicon: Option<&SynonymLexicon>,
) -> Result<Vec<Phase<'a>>> {
    let target = || -> Result<Phase<'a>> {
        if data.target.is_empty() {
            return Err(Error::EmptySplit("target"));
        }
        let a = &plan.augment;
        let lexicon = if a.word_replace {
            Some(lexicon.ok_or_else(|| {
                Error::Config("word replacement is enabled but no lexicon was given".into())
            })?)
        } else {
            None
        };
        let expanded = if a.step_swap || lexicon.is_some() {
            augment_corpus(&data.target, &a.config(plan.seed), a.step_swap, lexicon)
        } else {
            data.target.clone()
        };
        Ok(Phase {
            name: "target",
            data: expanded,
            config: &plan.target_phase,
        })
    };
    let source = || Phase {
        name: "source",
        data: data.source.clone(),
        config: &plan.source_phase,
    };
    Ok(match plan.regime {
        Regime::TargetOnly => vec![target()?],
        Regime::SourceOnly => {
            if data.source.is_empty() {
                return Err(Error::EmptySplit("source"));
            }
            vec![source()]
        }
        Regime::DomainAdaptation => {
            let target = target()?;
            if data.source.is_empty() {
                vec![target]
            } else {
                vec![source(), target]
            }
        }
    })
}

fn check_valid(graphs: &[FlowGraph]) -> Result<()> {
    for g in graphs {
        if let Some(v) = g.validate().violations.first() {
            return Err(Error::InvalidRecord {
                id: g.document.id.clone(),
                message: v.to_string(),
            });
        }
    }
    Ok(())
}

/// Trains `model` in place under `plan`. Each phase starts a fresh
/// optimizer and hands its selected snapshot to the next phase.
pub fn train_model<M: Trainable>(
    mut model: M,
    plan: &TrainPlan,
    data: &DatasetPair,
    lexicon: Option<&SynonymLexicon>,
) -> Result<TrainOutcome<M>> {
    plan.validate()?;
    check_valid(&data.source)?;
    check_valid(&data.target)?;
    check_valid(&data.validation)?;
    let mut trace = Vec::new();
    for phase in phases(plan, data, lexicon)? {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed ^ fnv1a(phase.name.as_bytes()));
        let mut optimizer = AdamW::new(model.store(), plan.optimizer.clone());
        let batch = phase.config.batch_size.min(phase.data.len());
        let total = phase.config.total_steps();
        let mut queue: Vec<usize> = Vec::new();
        let mut best: Option<(f64, ParamStore)> = None;

        for step in 1..=total {
            if queue.len() < batch {
                let mut epoch: Vec<usize> = (0..phase.data.len()).collect();
                epoch.shuffle(&mut rng);
                // New epochs go behind the leftover indices of the old one.
                epoch.extend(queue.drain(..));
                queue = epoch;
            }
            let picked: Vec<usize> = queue.split_off(queue.len() - batch);
            let results = picked
                .par_iter()
                .map(|&i| model.loss_and_grad(&phase.data[i]))
                .collect::<Vec<_>>();
            let mut grads = model.store().zero_grads();
            let mut loss = 0.0;
            for r in results {
                let (l, g) = r?;
                loss += l;
                grads.add_assign(&g);
            }
            let scale = 1.0 / batch as f64;
            grads.scale(scale);
            let lr = lr_at(step, &plan.optimizer, phase.config);
            optimizer.step(model.store_mut(), &grads, lr)?;

            let evaluate = step % plan.eval_interval == 0 || step == total;
            let validation = if evaluate && !data.validation.is_empty() {
                Some(model.validation_score(&data.validation)?)
            } else {
                None
            };
            if let (Some(score), Selection::BestValidation) = (validation, plan.selection) {
                if best.as_ref().is_none_or(|(b, _)| score > *b) {
                    best = Some((score, model.store().clone()));
                }
            }
            log::debug!("{} step {step}: lr {lr:.3e} loss {:.4}", phase.name, loss * scale);
            trace.push(TraceEntry {
                phase: phase.name.to_owned(),
                step,
                lr,
                loss: loss * scale,
                validation,
            });
        }
        if let Some((score, store)) = best {
            log::info!("{} phase selected validation score {score:.4}", phase.name);
            *model.store_mut() = store;
        }
    }
    Ok(TrainOutcome { model, trace })
}

/// Builds a fresh model of `kind` from the plan and trains it.
pub fn train(
    plan: &TrainPlan,
    data: &DatasetPair,
    kind: ModelKind,
    lexicon: Option<&SynonymLexicon>,
) -> Result<TrainOutcome<TrainedModel>> {
    Ok(match kind {
        ModelKind::Node => {
            let model = NodeTagger::new(plan.node_model.clone(), plan.seed)?;
            let out = train_model(model, plan, data, lexicon)?;
            TrainOutcome {
                model: TrainedModel::Node(out.model),
                trace: out.trace,
            }
        }
        ModelKind::Edge => {
            let model = EdgeParser::new(plan.edge_model.clone(), plan.seed)?;
            let out = train_model(model, plan, data, lexicon)?;
            TrainOutcome {
                model: TrainedModel::Edge(out.model),
                trace: out.trace,
            }
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub scores: Prf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub rounds: Vec<RoundReport>,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f1: f64,
}

/// Rotating-fold cross-validation over a target corpus. `source` feeds the
/// source phase of regimes that use it.
pub fn run_cross_validation(
    source: &[FlowGraph],
    corpus: &[FlowGraph],
    plan: &TrainPlan,
    kind: ModelKind,
    fold_count: usize,
    lexicon: Option<&SynonymLexicon>,
) -> Result<CvReport> {
    let folds = make_folds(corpus, fold_count, plan.seed)?;
    let mut rounds = Vec::with_capacity(fold_count);
    for r in 0..fold_count {
        let split = folds.round(r);
        let data = DatasetPair {
            source: source.to_vec(),
            target: select(corpus, &split.train),
            validation: select(corpus, &split.validation),
        };
        let test = select(corpus, &split.test);
        let outcome = train(plan, &data, kind, lexicon)?;
        let scores = outcome.model.evaluate(&test)?;
        log::info!("round {r}: f1 {:.4}", scores.f1);
        rounds.push(RoundReport {
            round: r,
            train: split.train.len(),
            validation: split.validation.len(),
            test: split.test.len(),
            scores,
        });
    }
    let mean = |f: fn(&Prf) -> f64| rounds.iter().map(|r| f(&r.scores)).sum::<f64>() / rounds.len() as f64;
    Ok(CvReport {
        mean_precision: mean(|p| p.precision),
        mean_recall: mean(|p| p.recall),
        mean_f1: mean(|p| p.f1),
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::EncoderConfig;
    use crate::synthetic::{generate_corpus, SyntheticDomain};

    fn opt() -> OptimizerConfig {
        OptimizerConfig::default()
    }

    #[test]
    fn schedule_points() {
        let src = PhaseConfig::source_default();
        assert_eq!(lr_at(0, &opt(), &src), 0.0);
        assert_eq!(lr_at(500, &opt(), &src), 5.0e-5);
        assert_eq!(lr_at(500 + 2250, &opt(), &src), 2.5e-5);
        assert_eq!(lr_at(5000, &opt(), &src), 0.0);
        assert_eq!(lr_at(6000, &opt(), &src), 0.0);
        let eps = 1e-12;
        assert!((lr_at(499, &opt(), &src) - lr_at(500, &opt(), &src)).abs() < 1e-7 + eps);
    }

    #[test]
    fn zero_warmup_starts_at_peak() {
        let p = PhaseConfig {
            batch_size: 1,
            warmup_steps: 0,
            decay_steps: 10,
            floor_lr: 1e-6,
        };
        assert_eq!(lr_at(0, &opt(), &p), 5.0e-5);
        assert_eq!(lr_at(11, &opt(), &p), 1e-6);
    }

    fn one_param(value: f64) -> ParamStore {
        let mut s = ParamStore::new();
        s.add("w", ArrayD::from_elem(ndarray::IxDyn(&[2]), value));
        s
    }

    #[test]
    fn first_adam_step_moves_by_lr() {
        let config = OptimizerConfig {
            weight_decay: 0.0,
            ..opt()
        };
        let mut s = one_param(1.0);
        let mut g = s.zero_grads();
        g.vector_mut(s.id("w").unwrap()).assign(&ndarray::arr1(&[0.3, -2.0]));
        let mut adam = AdamW::new(&s, config);
        adam.step(&mut s, &g, 0.1).unwrap();
        let w = s.vector(s.id("w").unwrap());
        // Bias-corrected first step: m̂/√v̂ = sign(g) up to epsilon.
        assert!((w[0] - 0.9).abs() < 1e-6 && (w[1] - 1.1).abs() < 1e-6);
    }

    #[test]
    fn decoupled_decay_shrinks() {
        let mut s = one_param(2.0);
        let g = s.zero_grads();
        let mut adam = AdamW::new(&s, OptimizerConfig { weight_decay: 0.1, ..opt() });
        adam.step(&mut s, &g, 0.5).unwrap();
        assert_eq!(s.vector(s.id("w").unwrap())[0], 2.0 * (1.0 - 0.05));
    }

    #[test]
    fn zero_gradient_zero_decay_is_identity() {
        let mut s = one_param(0.7);
        let before = s.clone();
        let g = s.zero_grads();
        let mut adam = AdamW::new(&s, OptimizerConfig { weight_decay: 0.0, ..opt() });
        for _ in 0..5 {
            adam.step(&mut s, &g, 0.1).unwrap();
        }
        assert_eq!(s, before);
    }

    #[test]
    fn non_finite_gradient_aborts() {
        let mut s = one_param(1.0);
        let mut g = s.zero_grads();
        g.vector_mut(s.id("w").unwrap())[0] = f64::NAN;
        let before = s.clone();
        let mut adam = AdamW::new(&s, opt());
        assert!(matches!(adam.step(&mut s, &g, 0.1), Err(Error::NonFinite(_))));
        assert_eq!(s, before);
    }

    #[test]
    fn quadratic_descends_after_warmup() {
        let target = [3.0, -1.0];
        let mut s = one_param(0.0);
        let id = s.id("w").unwrap();
        let phase = PhaseConfig {
            batch_size: 1,
            warmup_steps: 20,
            decay_steps: 180,
            floor_lr: 0.0,
        };
        let config = OptimizerConfig {
            initial_lr: 0.05,
            weight_decay: 0.0,
            ..opt()
        };
        let mut adam = AdamW::new(&s, config.clone());
        let loss = |s: &ParamStore| {
            let w = s.vector(id);
            (0..2).map(|i| (w[i] - target[i]).powi(2)).sum::<f64>()
        };
        let mut previous = f64::INFINITY;
        for step in 1..=phase.total_steps() {
            let w = s.vector(id).to_owned();
            let mut g = s.zero_grads();
            for i in 0..2 {
                g.vector_mut(id)[i] = 2.0 * (w[i] - target[i]);
            }
            adam.step(&mut s, &g, lr_at(step, &config, &phase)).unwrap();
            let l = loss(&s);
            if step > phase.warmup_steps {
                assert!(l <= previous, "step {step}: {l} > {previous}");
            }
            previous = l;
        }
        let start = target.iter().map(|t| t * t).sum::<f64>();
        assert!(previous < 0.1 * start, "{previous}");
    }

    fn tiny_plan(regime: Regime) -> TrainPlan {
        let encoder = EncoderConfig {
            embedding_dim: 8,
            hidden_dim: 8,
            buckets: 64,
            lowercase: true,
        };
        let mut plan = TrainPlan {
            regime,
            seed: 3,
            optimizer: OptimizerConfig {
                initial_lr: 1e-2,
                ..opt()
            },
            source_phase: PhaseConfig {
                batch_size: 2,
                warmup_steps: 2,
                decay_steps: 6,
                floor_lr: 0.0,
            },
            target_phase: PhaseConfig {
                batch_size: 2,
                warmup_steps: 1,
                decay_steps: 4,
                floor_lr: 0.0,
            },
            eval_interval: 2,
            ..TrainPlan::default()
        };
        plan.node_model.encoder = encoder.clone();
        plan.edge_model.encoder = encoder;
        plan.edge_model.biaffine.arc_dim = 4;
        plan.edge_model.biaffine.label_dim = 4;
        plan
    }

    fn data() -> DatasetPair {
        DatasetPair {
            source: generate_corpus(&SyntheticDomain::cooking(), 4, 1),
            target: generate_corpus(&SyntheticDomain::crafts(), 3, 2),
            validation: generate_corpus(&SyntheticDomain::crafts(), 2, 3),
        }
    }

    #[test]
    fn training_is_deterministic() {
        for kind in [ModelKind::Node, ModelKind::Edge] {
            let a = train(&tiny_plan(Regime::DomainAdaptation), &data(), kind, None).unwrap();
            let b = train(&tiny_plan(Regime::DomainAdaptation), &data(), kind, None).unwrap();
            assert_eq!(a.trace, b.trace);
            assert_eq!(a.trace.len(), 8 + 5);
        }
    }

    #[test]
    fn empty_source_matches_target_only() {
        let mut d = data();
        d.source.clear();
        let da = train(&tiny_plan(Regime::DomainAdaptation), &d, ModelKind::Node, None).unwrap();
        let to = train(&tiny_plan(Regime::TargetOnly), &d, ModelKind::Node, None).unwrap();
        assert_eq!(da.trace, to.trace);
    }

    #[test]
    fn regimes_check_their_splits() {
        let mut d = data();
        d.source.clear();
        let err = train(&tiny_plan(Regime::SourceOnly), &d, ModelKind::Node, None).unwrap_err();
        assert!(matches!(err, Error::EmptySplit("source")));
        let mut d = data();
        d.target.clear();
        let err = train(&tiny_plan(Regime::TargetOnly), &d, ModelKind::Node, None).unwrap_err();
        assert!(matches!(err, Error::EmptySplit("target")));
        // Source-only ignores the target split entirely.
        let out = train(&tiny_plan(Regime::SourceOnly), &d, ModelKind::Node, None).unwrap();
        assert!(out.trace.iter().all(|t| t.phase == "source"));
    }

    #[test]
    fn word_replacement_needs_a_lexicon() {
        let mut plan = tiny_plan(Regime::TargetOnly);
        plan.augment.word_replace = true;
        assert!(matches!(
            train(&plan, &data(), ModelKind::Node, None),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn cross_validation_rounds() {
        let corpus = generate_corpus(&SyntheticDomain::crafts(), 6, 9);
        let mut plan = tiny_plan(Regime::TargetOnly);
        plan.target_phase.decay_steps = 2;
        let report = run_cross_validation(&[], &corpus, &plan, ModelKind::Node, 6, None).unwrap();
        assert_eq!(report.rounds.len(), 6);
        assert!(report.rounds.iter().all(|r| r.test == 4 && r.train == 1));
        let mean = report.rounds.iter().map(|r| r.scores.f1).sum::<f64>() / 6.0;
        assert!((report.mean_f1 - mean).abs() < 1e-15);
    }
}
