//! Command implementations.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use tm_rbe::classifier::{MultiClassifier, TrainParams};
use tm_rbe::datasets::{self, ArtificialSpec, LabeledDataset, Split, Vocabulary};
use tm_rbe::embedder::{self, CorpusIndex, EmbedParams, Window};
use tm_rbe::probe::{self, ProbeTarget, SweepAxis, SweepConfig};
use tm_rbe::rbe::{self, RbeSetup};

use crate::config::resolve;
use crate::error::{CliError, CliResult};
use crate::out::{provenance, OutDir};
use crate::{EmbedArgs, GenArgs, ProbeArgs, RbeArgs, SweepArgs, TrainArgs};

const TRAIN_REPORT: &str = "train_report.csv";
const TRAIN_REPORT_HEADER: &str = "dataset,s,T,clauses,epochs,accuracy,seed,wall_ms";

pub fn gen_artificial(args: GenArgs) -> CliResult<()> {
    let ctx = args.common.resolve()?;
    let cfg = &ctx.cfg;
    let spec = ArtificialSpec {
        num_features: resolve(args.features, cfg, "features", 20)?,
        train_n: resolve(args.train_n, cfg, "train-n", 5000)?,
        test_n: resolve(args.test_n, cfg, "test-n", 5000)?,
        noise: resolve(args.noise, cfg, "noise", 0.25)?,
        background_rate: resolve(args.background_rate, cfg, "background-rate", 1.0)?,
        unique_per_class: resolve(args.unique, cfg, "unique", 5)?,
        classes: resolve(args.classes, cfg, "classes", 2)?,
        seed: ctx.seed,
    };
    spec.validate().map_err(CliError::from)?;
    let out = OutDir::create(ctx.out_dir)?;
    let (train, test) = datasets::gen_artificial(&spec).map_err(CliError::from)?;
    train
        .write_cache_file(out.file("train.tmds"))
        .map_err(CliError::from)?;
    test.write_cache_file(out.file("test.tmds"))
        .map_err(CliError::from)?;
    let line = provenance("gen-artificial", ctx.seed, &format!("{spec:?}"));
    out.write_csv("artificial_spec.csv", &line, |w| {
        use std::io::Write;
        write!(w, "{}", spec.to_csv())?;
        Ok(())
    })?;
    println!(
        "wrote {} train and {} test examples over {} features to {}",
        train.len(),
        test.len(),
        spec.num_features,
        out.path().display()
    );
    Ok(())
}

/// Loads a dataset pair from caches or raw labeled text.
fn load_pair(
    train_path: &Path,
    test_path: &Path,
    max_vocab: usize,
) -> CliResult<(LabeledDataset, LabeledDataset, String)> {
    let name = train_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    let is_cache = train_path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("tmds"));
    if is_cache {
        let train = LabeledDataset::read_cache_file(train_path).map_err(CliError::from)?;
        let test = LabeledDataset::read_cache_file(test_path).map_err(CliError::from)?;
        if train.vocab_size() != test.vocab_size() || train.classes() != test.classes() {
            return Err(CliError::data(
                "train/test caches disagree on vocabulary or class count",
            ));
        }
        return Ok((train, test, name));
    }
    let (train_docs, train_labels) =
        datasets::load_labeled_text(train_path).map_err(CliError::from)?;
    let (test_docs, test_labels) =
        datasets::load_labeled_text(test_path).map_err(CliError::from)?;
    if train_docs.is_empty() {
        eprintln!("warning: {} is empty", train_path.display());
    }
    let vocab = Vocabulary::build(train_docs.iter().flatten(), max_vocab)
        .map_err(CliError::from)?;
    let classes = train_labels
        .iter()
        .chain(&test_labels)
        .copied()
        .max()
        .map_or(1, |l| l + 1);
    let mk = |docs: &[Vec<String>], labels: &[u32], split| -> CliResult<LabeledDataset> {
        let examples = docs.iter().map(|d| datasets::binarize(d, &vocab)).collect();
        LabeledDataset::new(examples, labels.to_vec(), vocab.len(), classes, split, 0)
            .map_err(CliError::from)
    };
    let train = mk(&train_docs, &train_labels, Split::Train)?;
    let test = mk(&test_docs, &test_labels, Split::Test)?;
    Ok((train, test, name))
}

struct TrainCell {
    accuracy: f64,
    wall_ms: u128,
}

fn train_once(
    train: &LabeledDataset,
    test: &LabeledDataset,
    params: &TrainParams,
    seed: u64,
    timing: bool,
) -> CliResult<TrainCell> {
    let t0 = Instant::now();
    let clf = MultiClassifier::train(train, params, seed).map_err(CliError::from)?;
    let accuracy = clf.accuracy(test).map_err(CliError::from)?;
    let wall_ms = if timing { t0.elapsed().as_millis() } else { 0 };
    Ok(TrainCell { accuracy, wall_ms })
}

fn report_row(
    dataset: &str,
    params: &TrainParams,
    cell: &TrainCell,
    seed: u64,
) -> String {
    format!(
        "{dataset},{},{},{},{},{},{seed},{}",
        params.model.specificity,
        params.model.margin,
        params.model.clauses,
        params.epochs,
        cell.accuracy,
        cell.wall_ms
    )
}

pub fn train(args: TrainArgs) -> CliResult<()> {
    let ctx = args.common.resolve()?;
    let model = args.model.resolve(&ctx.cfg)?;
    let epochs = resolve(args.epochs, &ctx.cfg, "epochs", 5)?;
    let max_vocab = resolve(args.max_vocab, &ctx.cfg, "max-vocab", 40_000)?;
    let params = TrainParams { model, epochs };
    let (train, test, name) = load_pair(&args.train, &args.test, max_vocab)?;
    let out = OutDir::create(ctx.out_dir)?;
    let cell = train_once(&train, &test, &params, ctx.seed, ctx.timing)?;
    let line = provenance("train", ctx.seed, &format!("{params:?} {name}"));
    let row = report_row(&name, &params, &cell, ctx.seed);
    out.append_csv_row(TRAIN_REPORT, &line, TRAIN_REPORT_HEADER, &row)?;
    println!("{TRAIN_REPORT_HEADER}");
    println!("{row}");
    Ok(())
}

pub fn sweep(args: SweepArgs) -> CliResult<()> {
    let ctx = args.train_args.common.resolve()?;
    let model = args.train_args.model.resolve(&ctx.cfg)?;
    let epochs = resolve(args.train_args.epochs, &ctx.cfg, "epochs", 5)?;
    let max_vocab = resolve(args.train_args.max_vocab, &ctx.cfg, "max-vocab", 40_000)?;
    let values = parse_values(&args.values)?;
    let axis = args.axis.as_str();
    if axis != "s" && axis != "T" {
        return Err(CliError::usage(format!(
            "--axis must be `s` or `T`, got `{axis}`"
        )));
    }
    let (train, test, name) = load_pair(&args.train_args.train, &args.train_args.test, max_vocab)?;
    let out = OutDir::create(ctx.out_dir)?;

    let cells: Vec<(f64, CliResult<TrainCell>)> = values
        .par_iter()
        .map(|&value| {
            let mut params = TrainParams {
                model: model.clone(),
                epochs,
            };
            match axis {
                "s" => params.model.specificity = value,
                _ => params.model.margin = value as i64,
            }
            if let Err(e) = params.model.validate() {
                return (value, Err(CliError::from(e)));
            }
            (
                value,
                train_once(&train, &test, &params, ctx.seed, ctx.timing),
            )
        })
        .collect();

    let canonical = format!("sweep {axis} {values:?} {model:?} epochs={epochs} {name}");
    let line = provenance("sweep", ctx.seed, &canonical);
    let mut accs = Vec::new();
    for (value, outcome) in &cells {
        match outcome {
            Ok(cell) => {
                let mut params = TrainParams {
                    model: model.clone(),
                    epochs,
                };
                match axis {
                    "s" => params.model.specificity = *value,
                    _ => params.model.margin = *value as i64,
                }
                let row = report_row(&name, &params, cell, ctx.seed);
                out.append_csv_row(TRAIN_REPORT, &line, TRAIN_REPORT_HEADER, &row)?;
                accs.push((*value, Some(cell.accuracy)));
            }
            Err(e) => {
                eprintln!("sweep cell {axis}={value} failed: {e}");
                accs.push((*value, None));
            }
        }
    }

    let file = format!("sweep_{}.csv", axis.to_lowercase());
    let setup = match axis {
        "s" => format!("T={};clauses={}", model.margin, model.clauses),
        _ => format!("s={};clauses={}", model.specificity, model.clauses),
    };
    out.write_csv(&file, &line, |w| {
        use std::io::Write;
        let header: Vec<String> = accs.iter().map(|(v, _)| format!("{axis}={v}")).collect();
        writeln!(w, "dataset,{},setup", header.join(","))?;
        let row: Vec<String> = accs
            .iter()
            .map(|(_, a)| a.map_or(String::new(), |a| a.to_string()))
            .collect();
        writeln!(w, "{name},{},{setup}", row.join(","))?;
        Ok(())
    })?;
    println!("wrote {}", out.file(&file).display());
    Ok(())
}

/// Builds a corpus index and vocabulary from a one-document-per-line file.
fn load_corpus(path: &Path, max_vocab: usize) -> CliResult<(CorpusIndex, Vocabulary)> {
    let docs = datasets::load_text_corpus(path).map_err(CliError::from)?;
    let vocab = Vocabulary::build(docs.iter().flatten(), max_vocab).map_err(CliError::from)?;
    let feature_docs: Vec<Vec<u32>> = docs
        .iter()
        .map(|d| {
            let mut ids: Vec<u32> = d.iter().filter_map(|t| vocab.feature_id(t)).collect();
            ids.sort_unstable();
            ids.dedup();
            ids
        })
        .collect();
    let index = CorpusIndex::from_documents(feature_docs, vocab.len()).map_err(CliError::from)?;
    Ok((index, vocab))
}

fn window_from(count: usize, proportion: Option<f64>) -> Window {
    match proportion {
        Some(p) => Window::Proportion(p),
        None => Window::Count(count),
    }
}

pub fn embed(args: EmbedArgs) -> CliResult<()> {
    let ctx = args.common.resolve()?;
    let model = args.model.resolve(&ctx.cfg)?;
    let window_count = resolve(args.window, &ctx.cfg, "window", 25)?;
    let window_proportion = match args.window_proportion {
        Some(p) => Some(p),
        None => ctx.cfg.get("window-proportion")?,
    };
    let epochs = resolve(args.epochs, &ctx.cfg, "epochs", 1)?;
    let q1_prob = resolve(args.q1_prob, &ctx.cfg, "q1-prob", 0.5)?;
    let max_vocab = resolve(args.max_vocab, &ctx.cfg, "max-vocab", 40_000)?;
    let probe_clause = resolve(args.probe_clause, &ctx.cfg, "probe-clause", 0)?;

    let (index, vocab) = load_corpus(&args.corpus, max_vocab)?;
    let target = vocab
        .feature_id(&args.tw)
        .ok_or_else(|| CliError::from(tm_rbe::Error::UnknownToken(args.tw.clone())))?;
    let rounds_per_epoch = match args.rounds_per_epoch {
        Some(r) => r,
        None => ctx
            .cfg
            .get("rounds-per-epoch")?
            .unwrap_or_else(|| index.len()),
    };
    let rounds = match args.rounds {
        Some(r) => r,
        None => ctx
            .cfg
            .get("rounds")?
            .unwrap_or(epochs * rounds_per_epoch),
    };
    let params = EmbedParams {
        model,
        window: window_from(window_count, window_proportion),
        rounds,
        q1_probability: q1_prob,
    };
    params.validate().map_err(CliError::from)?;
    let out = OutDir::create(ctx.out_dir)?;
    let canonical = format!("embed {params:?} tw={} corpus={}", args.tw, args.corpus.display());
    let line = provenance("embed", ctx.seed, &canonical);

    let mut snapshots = Vec::new();
    let result = embedder::embed_word_observed(&index, target, &params, ctx.seed, |round, m| {
        if args.probe && rounds_per_epoch > 0 && round % rounds_per_epoch == 0 {
            if let Ok(snap) = probe::snapshot(m, probe_clause, round) {
                snapshots.push((round / rounds_per_epoch, snap));
            }
        }
    })
    .map_err(CliError::from)?;

    let json = result.to_json(Some(&args.tw)).map_err(CliError::from)?;
    std::fs::write(out.file("embedding.json"), json)?;
    for (epoch, snap) in &snapshots {
        out.write_csv(&format!("state_epoch_{epoch}.csv"), &line, |w| {
            probe::write_snapshot_csv(snap, w)
        })?;
        out.write_csv(&format!("hist_epoch_{epoch}.csv"), &line, |w| {
            probe::write_histogram_csv(snap, w)
        })?;
    }
    let included: usize = result.clauses.iter().map(Vec::len).sum();
    println!(
        "embedded `{}` (feature {target}) over {} rounds ({} with q=1); {} literals included across {} clauses; wrote {}",
        args.tw,
        params.rounds,
        result.rounds_q1,
        included,
        result.clauses.len(),
        out.file("embedding.json").display()
    );
    Ok(())
}

fn parse_values(raw: &str) -> CliResult<Vec<f64>> {
    let values: Result<Vec<f64>, _> = raw
        .split(',')
        .filter(|v| !v.trim().is_empty())
        .map(|v| v.trim().parse())
        .collect();
    let values = values.map_err(|e| CliError::usage(format!("--values: {e}")))?;
    if values.is_empty() {
        return Err(CliError::usage("--values must list at least one number"));
    }
    Ok(values)
}

fn parse_setups(raw: &str) -> CliResult<Vec<RbeSetup>> {
    let mut setups = Vec::new();
    for part in raw.split(',').filter(|p| !p.trim().is_empty()) {
        let (s, t) = part.split_once(':').ok_or_else(|| {
            CliError::usage(format!("--setups entry `{part}`: expected `s:T`"))
        })?;
        let specificity: f64 = s
            .trim()
            .parse()
            .map_err(|e| CliError::usage(format!("--setups `{part}`: {e}")))?;
        let margin: i64 = t
            .trim()
            .parse()
            .map_err(|e| CliError::usage(format!("--setups `{part}`: {e}")))?;
        setups.push(RbeSetup { specificity, margin });
    }
    if setups.is_empty() {
        return Err(CliError::usage("--setups must list at least one s:T pair"));
    }
    Ok(setups)
}

pub fn rbe(args: RbeArgs) -> CliResult<()> {
    let ctx = args.common.resolve()?;
    let model = args.model.resolve(&ctx.cfg)?;
    let epochs = resolve(args.epochs, &ctx.cfg, "epochs", 5)?;
    let max_vocab = resolve(args.max_vocab, &ctx.cfg, "max-vocab", 40_000)?;
    let setups = parse_setups(&args.setups)?;
    let (train, test, name) = load_pair(&args.train, &args.test, max_vocab)?;
    let base = TrainParams { model, epochs };
    let out = OutDir::create(ctx.out_dir)?;

    let outcome = rbe::rbe_grid(&train, &test, &setups, &base, ctx.seed).map_err(CliError::from)?;
    for (setup, e) in &outcome.failures {
        eprintln!(
            "rbe cell (s={}, T={}) failed: {e}",
            setup.specificity, setup.margin
        );
    }
    let canonical = format!("rbe {setups:?} {base:?} {name}");
    let line = provenance("rbe", ctx.seed, &canonical);
    out.write_csv("rbe_report.csv", &line, |w| {
        rbe::write_rbe_csv(&outcome.reports, &name, w)
    })?;
    for r in &outcome.reports {
        println!(
            "s={} T={} original={} negated={} ratio={:.3} accuracy={:.4}",
            r.setup.specificity,
            r.setup.margin,
            r.n_original,
            r.n_negated,
            r.rbe_ratio,
            r.accuracy.unwrap_or(f64::NAN)
        );
    }
    println!("wrote {}", out.file("rbe_report.csv").display());
    Ok(())
}

pub fn probe(args: ProbeArgs) -> CliResult<()> {
    let ctx = args.common.resolve()?;
    let model = args.model.resolve(&ctx.cfg)?;
    let window_count = resolve(args.window, &ctx.cfg, "window", 25)?;
    let epochs = resolve(args.epochs, &ctx.cfg, "epochs", 5)?;
    let checkpoint_every = resolve(args.checkpoint_every, &ctx.cfg, "checkpoint-every", 1)?;
    let q1_prob = resolve(args.q1_prob, &ctx.cfg, "q1-prob", 0.5)?;
    let max_vocab = resolve(args.max_vocab, &ctx.cfg, "max-vocab", 40_000)?;
    let probe_clause = resolve(args.probe_clause, &ctx.cfg, "probe-clause", 0)?;
    let axis = match args.axis.as_str() {
        "epochs" => SweepAxis::Epochs,
        "s" => SweepAxis::Specificity,
        "T" => SweepAxis::Margin,
        other => {
            return Err(CliError::usage(format!(
                "--axis must be `epochs`, `s`, or `T`, got `{other}`"
            )))
        }
    };
    let values = parse_values(&args.values)?;
    let (index, vocab) = load_corpus(&args.corpus, max_vocab)?;
    let target = vocab
        .feature_id(&args.tw)
        .ok_or_else(|| CliError::from(tm_rbe::Error::UnknownToken(args.tw.clone())))?;
    let rounds_per_epoch = match args.rounds_per_epoch {
        Some(r) => Some(r),
        None => ctx.cfg.get("rounds-per-epoch")?,
    };
    let boundary = model.boundary;
    let cfg = SweepConfig {
        embed: EmbedParams {
            model,
            window: Window::Count(window_count),
            rounds: 0,
            q1_probability: q1_prob,
        },
        epochs,
        rounds_per_epoch,
        checkpoint_every,
        target_clause: if args.all_clauses {
            ProbeTarget::AllClauses
        } else {
            ProbeTarget::Clause(probe_clause)
        },
        seed: ctx.seed,
    };
    let out = OutDir::create(ctx.out_dir)?;
    let outcome = probe::run_sweep(&index, target, axis, &values, &cfg).map_err(CliError::from)?;
    for (value, e) in &outcome.failures {
        eprintln!("probe cell {}={} failed: {e}", axis.label(), value);
    }
    let canonical = format!(
        "probe {} {values:?} {cfg_embed:?} epochs={epochs} tw={}",
        axis.label(),
        args.tw,
        cfg_embed = cfg.embed
    );
    let line = provenance("probe", ctx.seed, &canonical);
    let file = format!("probe_{}.csv", axis.label().to_lowercase());
    out.write_csv(&file, &line, |w| {
        probe::write_sweep_csv(axis, &outcome.rows, boundary, ctx.seed, w)
    })?;
    println!(
        "wrote {} ({} checkpoint rows, {} failed cells)",
        out.file(&file).display(),
        outcome.rows.len(),
        outcome.failures.len()
    );
    Ok(())
}
