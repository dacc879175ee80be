//! Acceptance suite: engine-correctness properties and trend reproduction on
//! the bundled artificial benchmark. One test per criterion; each prints a
//! PASS line with its measurements. Run with:
//!
//! ```text
//! cargo test -p tm-rbe-cli --test acceptance -- --nocapture --test-threads 1
//! ```

use std::fs;
use std::path::Path;

use tm_rbe::automata::{ClauseBank, EvaluationMode, LiteralVector};
use tm_rbe::classifier::{MultiClassifier, TrainParams};
use tm_rbe::datasets::{gen_artificial, ArtificialSpec};
use tm_rbe::embedder::{CorpusIndex, EmbedParams, Window};
use tm_rbe::model::{CoalescedModel, ModelParams};
use tm_rbe::probe::{run_sweep, ProbeTarget, SweepAxis, SweepConfig};
use tm_rbe::rbe::{rbe_grid, RbeSetup};
use tm_rbe::rng::clause_rng;

/// Benchmark configuration shared by the trend criteria: the library's
/// artificial defaults at the documented trend-check training length.
fn trend_spec(seed: u64) -> ArtificialSpec {
    ArtificialSpec {
        seed,
        ..ArtificialSpec::default()
    }
}

const TREND_EPOCHS: usize = 25;
const TREND_SEEDS: [u64; 3] = [1, 2, 3];

fn trend_params(clauses: usize, margin: i64, specificity: f64) -> TrainParams {
    TrainParams {
        model: ModelParams {
            clauses,
            margin,
            specificity,
            boundary: 2048,
            ..ModelParams::default()
        },
        epochs: TREND_EPOCHS,
    }
}

fn accuracy_for(spec: &ArtificialSpec, params: &TrainParams, seed: u64) -> f64 {
    let (train, test) = gen_artificial(spec).unwrap();
    let clf = MultiClassifier::train(&train, params, seed).unwrap();
    clf.accuracy(&test).unwrap()
}

// ---------------------------------------------------------------- criterion 1

#[test]
fn criterion_01_clause_oracle() {
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for trial in 0..1000u64 {
        let m = 1 + (trial % 8) as usize;
        let boundary = 2 + (trial % 13) as u32;
        let mut bank = ClauseBank::new(1, m, boundary, trial).unwrap();
        // Scatter deterministic pseudo-random states.
        let mut s = trial.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
        for k in 0..2 * m {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            bank.set_state(0, k, (s >> 33) as u32 % (2 * boundary)).unwrap();
        }
        let states = bank.clause_states(0).to_vec();
        for bits in 0..(1u32 << m) {
            let presence: Vec<bool> = (0..m).map(|i| bits >> i & 1 == 1).collect();
            let x = LiteralVector::from_presence(&presence).unwrap();
            for mode in [EvaluationMode::Learn, EvaluationMode::Predict] {
                // Independent oracle: direct conjunction over raw states.
                let included: Vec<usize> =
                    (0..2 * m).filter(|&k| states[k] >= boundary).collect();
                let expected = if included.is_empty() {
                    mode == EvaluationMode::Learn
                } else {
                    included.iter().all(|&k| x.bit(k))
                };
                checked += 1;
                if bank.clause_output(0, &x, mode).unwrap() != expected {
                    mismatches += 1;
                }
            }
        }
    }
    assert_eq!(mismatches, 0, "clause oracle mismatches: {mismatches}");
    println!("criterion 1 (clause oracle, {checked} evaluations): PASS");
}

// ---------------------------------------------------------------- criterion 2

#[test]
fn criterion_02_negation_invariant() {
    let mut s = 0xDEAD_BEEFu64;
    for trial in 0..10_000usize {
        let m = 1 + trial % 64;
        let presence: Vec<bool> = (0..m)
            .map(|_| {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                s >> 63 == 1
            })
            .collect();
        let x = LiteralVector::from_presence(&presence).unwrap();
        for i in 0..m {
            assert_eq!(x.bit(m + i), !x.bit(i), "negation violated at {i}");
        }
    }
    println!("criterion 2 (negation invariant, 10000 inputs): PASS");
}

// ---------------------------------------------------------------- criterion 3

#[test]
fn criterion_03_feedback_statistics() {
    let trials = 100_000u32;
    let m = 8usize;
    let boundary = 1u32 << 14;
    // Half the literals true: originals 0..4 plus negations of 4..8.
    let presence = [true, true, true, true, false, false, false, false];
    let x = LiteralVector::from_presence(&presence).unwrap();
    for (si, &s) in [1.0f64, 2.0, 5.0, 20.0].iter().enumerate() {
        let mut bank = ClauseBank::new(1, m, boundary, si as u64).unwrap();
        let mut rng = clause_rng(1000 + si as u64, 0);
        let mut ups = 0u64;
        let mut downs = 0u64;
        for _ in 0..trials {
            for k in 0..2 * m {
                bank.set_state(0, k, boundary - 1).unwrap();
            }
            let before = bank.clause_states(0).to_vec();
            // Empty clause fires in Learn mode; boost off measures (s-1)/s.
            bank.type_i(0, &x, s, false, &mut rng).unwrap();
            for (k, (&b, &a)) in before.iter().zip(bank.clause_states(0)).enumerate() {
                if x.bit(k) {
                    ups += u64::from(a > b);
                } else {
                    downs += u64::from(a < b);
                }
            }
        }
        let denom = f64::from(trials) * m as f64;
        let up_rate = ups as f64 / denom;
        let down_rate = downs as f64 / denom;
        let expect_up = (s - 1.0) / s;
        let expect_down = 1.0 / s;
        assert!(
            (up_rate - expect_up).abs() < 0.01,
            "s={s}: increment rate {up_rate} vs {expect_up}"
        );
        assert!(
            (down_rate - expect_down).abs() < 0.01,
            "s={s}: decrement rate {down_rate} vs {expect_down}"
        );
        println!(
            "criterion 3 (feedback statistics, s={s}): PASS \
             (inc {up_rate:.4} vs {expect_up:.4}, dec {down_rate:.4} vs {expect_down:.4})"
        );
    }
}

// ---------------------------------------------------------------- criterion 4

fn rigged(n: usize, positive: usize, margin: i64, seed: u64) -> CoalescedModel {
    let params = ModelParams {
        clauses: n,
        margin,
        specificity: 2.0,
        boundary: 16,
        ..ModelParams::default()
    };
    let mut m = CoalescedModel::new(params, 2, seed).unwrap();
    for j in 0..n {
        m.set_weight(j, if j < positive { 1 } else { -1 }).unwrap();
    }
    m
}

#[test]
fn criterion_04_margin_gating() {
    let x = LiteralVector::from_presence(&[true, false]).unwrap();

    // v = T with q = 1: bit-exact no-op.
    let mut m = rigged(200, 150, 100, 5); // raw = 100 = T
    let states = m.bank().states().to_vec();
    let weights = m.weights().to_vec();
    for _ in 0..200 {
        m.update(&x, true).unwrap();
    }
    assert_eq!(m.bank().states(), &states[..]);
    assert_eq!(m.weights(), &weights[..]);

    // v = -T with q = 1: every clause selected on every update.
    let mut m = rigged(200, 50, 100, 6); // raw = -100 = -T
    let trials = 500;
    let mut selected = 0u64;
    for _ in 0..trials {
        let before = m.weights().to_vec();
        m.update(&x, true).unwrap();
        selected += m
            .weights()
            .iter()
            .zip(&before)
            .filter(|(a, b)| a != b)
            .count() as u64;
        for j in 0..200 {
            m.set_weight(j, if j < 50 { 1 } else { -1 }).unwrap();
            for k in 0..m.bank().width() {
                m.set_state(j, k, 15).unwrap();
            }
        }
    }
    let freq = selected as f64 / (trials * 200) as f64;
    assert_eq!(freq, 1.0, "selection frequency at v=-T must be exactly 1");
    println!("criterion 4 (margin gating): PASS (no-op at v=T, freq {freq} at v=-T)");
}

// ---------------------------------------------------------------- criterion 5

fn tm(args: &[&str]) {
    tm_rbe_cli::run(std::iter::once("tm-rbe").chain(args.iter().copied()))
        .unwrap_or_else(|e| panic!("command {args:?} failed: {e}"));
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_05_command_determinism() {
    let base = tempfile::tempdir().unwrap();
    let corpus = base.path().join("corpus.txt");
    let mut text = String::new();
    for i in 0..20 {
        if i % 2 == 0 {
            text.push_str(&format!("alpha beta w{} w{}\n", i % 5, 5 + i % 7));
        } else {
            text.push_str(&format!("gamma w{} w{}\n", i % 5, 5 + i % 7));
        }
    }
    fs::write(&corpus, text).unwrap();
    let corpus = corpus.to_str().unwrap();

    let data = base.path().join("data");
    tm(&[
        "gen-artificial",
        "--out-dir",
        data.to_str().unwrap(),
        "--seed",
        "9",
        "--train-n",
        "300",
        "--test-n",
        "100",
    ]);
    let train = data.join("train.tmds");
    let test = data.join("test.tmds");
    let train = train.to_str().unwrap();
    let test = test.to_str().unwrap();

    let commands: Vec<(&str, Vec<String>)> = vec![
        (
            "gen-artificial",
            vec!["gen-artificial", "--seed", "9", "--train-n", "150", "--test-n", "50"]
                .into_iter()
                .map(String::from)
                .collect(),
        ),
        (
            "train",
            [
                "train", "--train", train, "--test", test, "--seed", "4", "--clauses", "16",
                "--margin", "8", "--states", "64", "--epochs", "2",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        ),
        (
            "sweep",
            [
                "sweep", "--axis", "s", "--values", "1,5", "--train", train, "--test", test,
                "--seed", "4", "--clauses", "16", "--margin", "8", "--states", "64", "--epochs",
                "2",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        ),
        (
            "embed",
            [
                "embed", "--corpus", corpus, "--tw", "alpha", "--seed", "3", "--epochs", "3",
                "--clauses", "8", "--margin", "8", "--states", "64", "--window", "3", "--probe",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        ),
        (
            "rbe",
            [
                "rbe", "--train", train, "--test", test, "--setups", "1:32,5:8", "--seed", "6",
                "--clauses", "12", "--states", "64", "--epochs", "2",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        ),
        (
            "probe",
            [
                "probe", "--corpus", corpus, "--tw", "alpha", "--axis", "T", "--values", "2,20",
                "--seed", "8", "--clauses", "6", "--margin", "8", "--states", "64", "--window",
                "3", "--epochs", "2",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        ),
    ];

    for (name, args) in &commands {
        let run_a = tempfile::tempdir().unwrap();
        let run_b = tempfile::tempdir().unwrap();
        for dir in [&run_a, &run_b] {
            let mut full: Vec<&str> = args.iter().map(String::as_str).collect();
            full.push("--out-dir");
            let out = dir.path().to_str().unwrap();
            full.push(out);
            tm(&full);
        }
        let a = dir_bytes(run_a.path());
        let b = dir_bytes(run_b.path());
        assert_eq!(
            a.iter().map(|(n, _)| n).collect::<Vec<_>>(),
            b.iter().map(|(n, _)| n).collect::<Vec<_>>(),
            "{name}: file sets differ"
        );
        for ((na, ba), (_, bb)) in a.iter().zip(&b) {
            assert_eq!(ba, bb, "{name}: {na} differs between identical runs");
        }
        println!("criterion 5 (determinism, {name}: {} files byte-identical): PASS", a.len());
    }
}

// ------------------------------------------------------------- criteria 6-8

#[test]
fn criterion_06_s_sweep_argmax_and_gap() {
    let svals = [1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0];
    let margin = 10_000;
    let mut argmax_votes = 0;
    let mut gap_votes = 0;
    for &seed in &TREND_SEEDS {
        let spec = trend_spec(100 + seed);
        let accs: Vec<f64> = svals
            .iter()
            .map(|&s| accuracy_for(&spec, &trend_params(100, margin, s), seed))
            .collect();
        let argmax = accs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let gap = accs[0] - accs[6];
        println!(
            "criterion 6 seed {seed}: accs {:?} argmax s={} gap {:.1}pt",
            accs.iter().map(|a| (a * 1000.0).round() / 10.0).collect::<Vec<_>>(),
            svals[argmax],
            gap * 100.0
        );
        if argmax == 0 {
            argmax_votes += 1;
        }
        if gap >= 0.05 {
            gap_votes += 1;
        }
    }
    assert!(
        argmax_votes * 2 > TREND_SEEDS.len(),
        "accuracy argmax at s=1 in only {argmax_votes}/3 seeds"
    );
    assert!(
        gap_votes * 2 > TREND_SEEDS.len(),
        "acc(s=1) - acc(s=50) >= 5pt in only {gap_votes}/3 seeds"
    );
    println!(
        "criterion 6 (s-sweep: argmax@s=1 {argmax_votes}/3, gap>=5pt {gap_votes}/3): PASS"
    );
}

#[test]
fn criterion_07_t_sweep_interior_maximum() {
    let tvals = [4i64, 8, 16, 32, 64, 128, 256];
    let mut gap_votes = 0;
    let mut interior_votes = 0;
    for &seed in &TREND_SEEDS {
        let spec = trend_spec(100 + seed);
        let accs: Vec<f64> = tvals
            .iter()
            .map(|&t| accuracy_for(&spec, &trend_params(100, t, 5.0), seed))
            .collect();
        let argmax = accs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let gap = accs[4] - accs[0];
        println!(
            "criterion 7 seed {seed}: accs {:?} argmax T={} gap(T64-T4) {:.1}pt",
            accs.iter().map(|a| (a * 1000.0).round() / 10.0).collect::<Vec<_>>(),
            tvals[argmax],
            gap * 100.0
        );
        if gap >= 0.03 {
            gap_votes += 1;
        }
        if argmax != 0 {
            interior_votes += 1;
        }
    }
    assert!(
        gap_votes * 2 > TREND_SEEDS.len(),
        "acc(T=64) - acc(T=4) >= 3pt in only {gap_votes}/3 seeds"
    );
    assert!(
        interior_votes * 2 > TREND_SEEDS.len(),
        "maximum sits at T=4 in {}/3 seeds",
        TREND_SEEDS.len() - interior_votes
    );
    println!(
        "criterion 7 (T-sweep: gap>=3pt {gap_votes}/3, interior max {interior_votes}/3): PASS"
    );
}

#[test]
fn criterion_08_rbe_grid_ratio_ordering() {
    let setups = [
        RbeSetup { specificity: 1.0, margin: 256 },
        RbeSetup { specificity: 3.0, margin: 128 },
        RbeSetup { specificity: 10.0, margin: 32 },
        RbeSetup { specificity: 50.0, margin: 8 },
    ];
    let mut order_votes = 0;
    let mut extreme_votes = 0;
    for &seed in &TREND_SEEDS {
        let spec = trend_spec(100 + seed);
        let (train, test) = gen_artificial(&spec).unwrap();
        let base = trend_params(100, 128, 5.0);
        let out = rbe_grid(&train, &test, &setups, &base, seed).unwrap();
        assert!(out.failures.is_empty());
        let ratios: Vec<f64> = out.reports.iter().map(|r| r.rbe_ratio).collect();
        println!(
            "criterion 8 seed {seed}: ratios {:?}",
            ratios.iter().map(|r| (r * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        );
        if ratios.windows(2).all(|w| w[0] > w[1]) {
            order_votes += 1;
        }
        if ratios[0] >= 0.9 && ratios[3] <= 0.1 {
            extreme_votes += 1;
        }
    }
    assert!(
        order_votes * 2 > TREND_SEEDS.len(),
        "rbe_ratio strictly decreasing in only {order_votes}/3 seeds"
    );
    assert!(
        extreme_votes * 2 > TREND_SEEDS.len(),
        "ratio extremes (>=0.9 at (1,256), <=0.1 at (50,8)) in only {extreme_votes}/3 seeds"
    );
    println!(
        "criterion 8 (RbE grid: decreasing {order_votes}/3, extremes {extreme_votes}/3): PASS"
    );
}

// ---------------------------------------------------------------- criterion 9

/// Sparse, text-like synthetic corpus (union of a window covers only a small
/// slice of the vocabulary): the target (feature 0) appears in ~40% of
/// documents with context drawn from one feature group, the rest draw from
/// another, plus shared background tokens.
fn probe_corpus(seed: u64) -> CorpusIndex {
    let m = 500u32;
    let docs_n = 1500usize;
    let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(7);
    let mut next = |bound: u64| {
        s = s
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (s >> 33) % bound
    };
    let mut docs = Vec::with_capacity(docs_n);
    for _ in 0..docs_n {
        let mut doc = Vec::new();
        let with_target = next(100) < 40;
        if with_target {
            doc.push(0u32);
            for _ in 0..6 {
                doc.push(1 + next(99) as u32); // context group A
            }
        } else {
            for _ in 0..6 {
                doc.push(100 + next(200) as u32); // context group B
            }
        }
        for _ in 0..2 {
            doc.push(300 + next(200) as u32); // shared background
        }
        docs.push(doc);
    }
    CorpusIndex::from_documents(docs, m as usize).unwrap()
}

#[test]
fn criterion_09_state_space_trends() {
    let index = probe_corpus(400);
    let seed = 21;
    let base = SweepConfig {
        embed: EmbedParams {
            model: ModelParams {
                clauses: 8,
                margin: 100,
                specificity: 5.0,
                boundary: 512,
                ..ModelParams::default()
            },
            window: Window::Count(10),
            rounds: 0,
            q1_probability: 0.5,
        },
        epochs: 25,
        rounds_per_epoch: Some(200),
        checkpoint_every: 1,
        target_clause: ProbeTarget::Clause(0),
        seed,
    };

    // Epochs 5 -> 50: deeper forgetting of originals.
    let out = run_sweep(&index, 0, SweepAxis::Epochs, &[5.0, 50.0], &base).unwrap();
    assert!(out.failures.is_empty());
    let final_mean = |rows: &[tm_rbe::probe::SweepRow], v: f64| {
        rows.iter()
            .filter(|r| r.value == v)
            .last()
            .unwrap()
            .summary
            .mean_state_original
    };
    let e5 = final_mean(&out.rows, 5.0);
    let e50 = final_mean(&out.rows, 50.0);
    assert!(
        e50 < e5,
        "mean_state_original must fall as epochs grow: {e50} !< {e5}"
    );
    println!("criterion 9a (epochs 5->50: mean original {e5:.1} -> {e50:.1}): PASS");

    // s 3 -> 40: shallower forgetting.
    let out = run_sweep(&index, 0, SweepAxis::Specificity, &[3.0, 40.0], &base).unwrap();
    assert!(out.failures.is_empty());
    let s3 = final_mean(&out.rows, 3.0);
    let s40 = final_mean(&out.rows, 40.0);
    assert!(
        s40 > s3,
        "mean_state_original must rise with s: {s40} !> {s3}"
    );
    println!("criterion 9b (s 3->40: mean original {s3:.1} -> {s40:.1}): PASS");

    // T 2 -> 200: fewer originals included.
    let out = run_sweep(&index, 0, SweepAxis::Margin, &[2.0, 200.0], &base).unwrap();
    assert!(out.failures.is_empty());
    let final_frac = |rows: &[tm_rbe::probe::SweepRow], v: f64| {
        rows.iter()
            .filter(|r| r.value == v)
            .last()
            .unwrap()
            .summary
            .frac_included_original
    };
    let t2 = final_frac(&out.rows, 2.0);
    let t200 = final_frac(&out.rows, 200.0);
    assert!(
        t200 < t2,
        "frac_included_original must fall with T: {t200} !< {t2}"
    );
    println!("criterion 9c (T 2->200: frac included {t2:.4} -> {t200:.4}): PASS");
}

// --------------------------------------------------------------- criterion 10

#[test]
fn criterion_10_noise_free_smoke() {
    let spec = ArtificialSpec {
        noise: 0.0,
        ..ArtificialSpec::default()
    };
    let (train, test) = gen_artificial(&spec).unwrap();
    let params = TrainParams {
        model: ModelParams {
            clauses: 20,
            margin: 16,
            specificity: 5.0,
            boundary: 64,
            ..ModelParams::default()
        },
        epochs: 3,
    };
    let clf = MultiClassifier::train(&train, &params, 11).unwrap();
    let acc = clf.accuracy(&test).unwrap();
    assert_eq!(acc, 1.0, "separable data must reach 100% within 3 epochs");
    println!("criterion 10 (noise-free smoke, accuracy {acc}): PASS");
}
