use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use procflow::augment::{augment_corpus, AugmentConfig, SynonymLexicon};
use procflow::corpus::{graph_from_line, load_corpus, make_folds, save_corpus, DatasetPair};
use procflow::metrics::agreement;
use procflow::pipeline::predict_corpus;
use procflow::report::{corpus_stats, evaluate, format_stats, EvalMode};
use procflow::synthetic::{generate_corpus, SyntheticDomain};
use procflow::train::{run_cross_validation, train, ModelKind};
use procflow::{EdgeParser, NodeTagger};

mod plan;

#[derive(Parser)]
#[command(name = "procflow", version, about = "Flow-graph prediction for procedural texts")]
struct Cli {
    /// Log more (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every record of a corpus and list violations.
    Validate { corpus: PathBuf },
    /// Per-domain corpus statistics.
    Stats {
        corpus: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print the cross-validation fold of every document.
    Folds {
        corpus: PathBuf,
        #[arg(long, default_value_t = 6)]
        folds: usize,
        #[arg(long, env = "PROCFLOW_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Expand a corpus with step swaps and synonym replacement.
    Augment(AugmentArgs),
    /// Train the node tagger.
    TrainNode(plan::TrainArgs),
    /// Train the edge parser.
    TrainEdge(plan::TrainArgs),
    /// Predict flow graphs for the documents of a corpus.
    Predict {
        /// Node checkpoint; required unless --gold-nodes is given.
        #[arg(long)]
        node: Option<PathBuf>,
        #[arg(long)]
        edge: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Keep the input nodes and predict edges only.
        #[arg(long)]
        gold_nodes: bool,
    },
    /// Score predictions against gold annotations.
    Evaluate {
        #[arg(long)]
        predicted: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        json: bool,
    },
    /// Agreement of annotation B against annotation A taken as gold.
    Agreement { a: PathBuf, b: PathBuf },
    /// Write a synthetic corpus from the built-in grammar.
    Synthesize {
        #[arg(long, value_enum)]
        domain: DomainArg,
        #[arg(long)]
        count: usize,
        #[arg(long, env = "PROCFLOW_SEED", default_value_t = 0)]
        seed: u64,
        /// Probability that a step flows into the next one rather than a
        /// random later step; lower values give more parallel branches.
        #[arg(long)]
        next_step_flow: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct AugmentArgs {
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    step_swap: bool,
    /// Synonym file; enables word replacement.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    max_swaps: usize,
    #[arg(long, default_value_t = 10)]
    replacements: usize,
    #[arg(long, default_value_t = 0.5)]
    probability: f64,
    #[arg(long, env = "PROCFLOW_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Node,
    Edge,
    Pipeline,
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Cooking,
    Crafts,
}

/// A task-level negative result, reported with exit code 1.
struct Failed;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failed)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<std::result::Result<(), Failed>> {
    match command {
        Command::Validate { corpus } => return validate(&corpus),
        Command::Stats { corpus, json } => {
            let stats = corpus_stats(&load(&corpus)?);
            if json {
                println!("{}", serde_json::to_string_pretty(&stats)?);
            } else {
                print!("{}", format_stats(&stats));
            }
        }
        Command::Folds { corpus, folds, seed } => {
            let graphs = load(&corpus)?;
            let split = make_folds(&graphs, folds, seed)?;
            for (g, fold) in graphs.iter().zip(&split.assignments) {
                println!("{fold}\t{}", g.document.id);
            }
        }
        Command::Augment(args) => augment(args)?,
        Command::TrainNode(args) => train_command(args, ModelKind::Node)?,
        Command::TrainEdge(args) => train_command(args, ModelKind::Edge)?,
        Command::Predict {
            node,
            edge,
            corpus,
            out,
            gold_nodes,
        } => {
            let tagger = match (node, gold_nodes) {
                (_, true) => None,
                (Some(path), false) => Some(
                    NodeTagger::load(&path)
                        .with_context(|| format!("loading node checkpoint {}", path.display()))?,
                ),
                (None, false) => bail!("--node is required unless --gold-nodes is given"),
            };
            let parser = EdgeParser::load(&edge)
                .with_context(|| format!("loading edge checkpoint {}", edge.display()))?;
            let graphs = load(&corpus)?;
            let predicted = predict_corpus(tagger.as_ref(), &parser, &graphs)?;
            save_corpus(&predicted, &out)
                .with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Evaluate {
            predicted,
            gold,
            mode,
            json,
        } => {
            let mode = match mode {
                ModeArg::Node => EvalMode::Node,
                ModeArg::Edge => EvalMode::Edge,
                ModeArg::Pipeline => EvalMode::Pipeline,
            };
            let report = evaluate(&load(&predicted)?, &load(&gold)?, mode)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{report}");
            }
        }
        Command::Agreement { a, b } => {
            let result = agreement(&load(&a)?, &load(&b)?)?;
            for (name, p) in [("nodes", result.nodes), ("edges", result.edges)] {
                println!(
                    "{name}\tP {:.4}\tR {:.4}\tF1 {:.4}",
                    p.precision, p.recall, p.f1
                );
            }
        }
        Command::Synthesize {
            domain,
            count,
            seed,
            next_step_flow,
            out,
        } => {
            let mut domain = match domain {
                DomainArg::Cooking => SyntheticDomain::cooking(),
                DomainArg::Crafts => SyntheticDomain::crafts(),
            };
            if let Some(p) = next_step_flow {
                if !(0.0..=1.0).contains(&p) {
                    bail!("--next-step-flow {p} outside [0, 1]");
                }
                domain.next_step_flow = p;
            }
            save_corpus(&generate_corpus(&domain, count, seed), &out)
                .with_context(|| format!("writing {}", out.display()))?;
        }
    }
    Ok(Ok(()))
}

fn load(path: &Path) -> Result<Vec<procflow::FlowGraph>> {
    load_corpus(path).with_context(|| format!("reading corpus {}", path.display()))
}

/// Prints one line per violation. Unreadable input is an error; records
/// that parse but break an invariant are a negative result.
fn validate(path: &Path) -> Result<std::result::Result<(), Failed>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut failed = false;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let g = match graph_from_line(&line) {
            Ok(g) => g,
            Err(message) => {
                failed = true;
                writeln!(out, "line {}: {message}", i + 1)?;
                continue;
            }
        };
        for v in g.validate().violations {
            failed = true;
            writeln!(out, "{}: {v}", g.document.id)?;
        }
    }
    Ok(if failed { Err(Failed) } else { Ok(()) })
}

fn augment(args: AugmentArgs) -> Result<()> {
    let graphs = load(&args.corpus)?;
    let config = AugmentConfig {
        max_swaps_per_example: args.max_swaps,
        replacements_per_example: args.replacements,
        replace_probability: args.probability,
        seed: args.seed,
    };
    config.validate()?;
    let lexicon = args
        .lexicon
        .as_ref()
        .map(|p| SynonymLexicon::load(p).with_context(|| format!("reading lexicon {}", p.display())))
        .transpose()?;
    let expanded = augment_corpus(&graphs, &config, args.step_swap, lexicon.as_ref());
    log::info!("{} documents expanded to {}", graphs.len(), expanded.len());
    save_corpus(&expanded, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn train_command(args: plan::TrainArgs, kind: ModelKind) -> Result<()> {
    let plan = args.plan()?;
    let lexicon = match &plan.augment.lexicon {
        Some(p) if plan.augment.word_replace => Some(
            SynonymLexicon::load(p).with_context(|| format!("reading lexicon {}", p.display()))?,
        ),
        _ => None,
    };
    let optional = |p: &Option<PathBuf>| -> Result<Vec<procflow::FlowGraph>> {
        p.as_deref().map(load).transpose().map(Option::unwrap_or_default)
    };
    let source = optional(&args.source)?;
    let target = optional(&args.target)?;

    if let Some(folds) = args.cross_validate {
        let report = run_cross_validation(&source, &target, &plan, kind, folds, lexicon.as_ref())?;
        println!("{:<6} {:>6} {:>6} {:>6} {:>9} {:>9} {:>9}", "round", "train", "valid", "test", "P", "R", "F1");
        for r in &report.rounds {
            println!(
                "{:<6} {:>6} {:>6} {:>6} {:>9.4} {:>9.4} {:>9.4}",
                r.round, r.train, r.validation, r.test, r.scores.precision, r.scores.recall, r.scores.f1
            );
        }
        println!(
            "{:<6} {:>6} {:>6} {:>6} {:>9.4} {:>9.4} {:>9.4}",
            "mean", "", "", "", report.mean_precision, report.mean_recall, report.mean_f1
        );
        return Ok(());
    }

    let Some(out) = &args.out else {
        bail!("--out is required unless --cross-validate is given");
    };
    let data = DatasetPair {
        source,
        target,
        validation: optional(&args.validation)?,
    };
    let outcome = train(&plan, &data, kind, lexicon.as_ref())?;
    outcome
        .model
        .save(out)
        .with_context(|| format!("writing checkpoint {}", out.display()))?;
    if let Some(path) = &args.trace {
        let mut w = BufWriter::new(
            fs::File::create(path).with_context(|| format!("writing {}", path.display()))?,
        );
        for entry in &outcome.trace {
            writeln!(w, "{}", serde_json::to_string(entry)?)?;
        }
        w.flush()?;
    }
    let last = outcome.trace.last().expect("training runs at least one step");
    let best = outcome
        .trace
        .iter()
        .filter_map(|t| t.validation)
        .fold(None, |b: Option<f64>, v| Some(b.map_or(v, |b| b.max(v))));
    println!(
        "trained {} steps; final loss {:.5}; best validation {}",
        outcome.trace.len(),
        last.loss,
        best.map_or("n/a".to_owned(), |v| format!("{v:.4}"))
    );
    Ok(())
}
