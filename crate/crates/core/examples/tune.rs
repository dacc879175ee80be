// Scratch harness for picking artificial-dataset defaults. Not shipped.
// Usage: tune <check> <epochs> <noise> <bg_rate> <m> [T] [clauses] [N] [classes] [test_n] [nseeds]
//   check: s | t | rbe | all

use rayon::prelude::*;

use tm_rbe::classifier::{MultiClassifier, TrainParams};
use tm_rbe::datasets::{gen_artificial, ArtificialSpec};
use tm_rbe::model::ModelParams;
use tm_rbe::rbe::{rbe_grid, RbeSetup};

struct Cfg {
    epochs: usize,
    noise: f64,
    background_rate: f64,
    num_features: usize,
    t_for_s_sweep: i64,
    clauses: usize,
    states: u32,
    classes: u32,
    test_n: usize,
    nseeds: u64,
}

fn spec_with(cfg: &Cfg, seed: u64) -> ArtificialSpec {
    ArtificialSpec {
        noise: cfg.noise,
        background_rate: cfg.background_rate,
        num_features: cfg.num_features,
        classes: cfg.classes,
        test_n: cfg.test_n,
        seed,
        ..ArtificialSpec::default()
    }
}

fn train_acc(spec: &ArtificialSpec, s: f64, t: i64, clauses: usize, states: u32, epochs: usize, seed: u64) -> f64 {
    let (train, test) = gen_artificial(spec).unwrap();
    let params = TrainParams {
        model: ModelParams {
            clauses,
            margin: t,
            specificity: s,
            boundary: states,
            ..ModelParams::default()
        },
        epochs,
    };
    let clf = MultiClassifier::train(&train, &params, seed).unwrap();
    clf.accuracy(&test).unwrap()
}

fn fmt(accs: &[f64]) -> Vec<f64> {
    accs.iter().map(|a| (a * 1000.0).round() / 10.0).collect()
}

fn check_s(cfg: &Cfg) {
    let svals = [1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0];
    let mut argmax_wins = 0;
    let mut gap_wins = 0;
    let rows: Vec<(u64, Vec<f64>)> = (1..=cfg.nseeds)
        .into_par_iter()
        .map(|seed| {
            let spec = spec_with(cfg, 100 + seed);
            let accs: Vec<f64> = svals
                .par_iter()
                .map(|&s| train_acc(&spec, s, cfg.t_for_s_sweep, cfg.clauses, cfg.states, cfg.epochs, seed))
                .collect();
            (seed, accs)
        })
        .collect();
    for (seed, accs) in rows {
        let argmax = accs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let gap = (accs[0] - accs[6]) * 100.0;
        if argmax == 0 {
            argmax_wins += 1;
        }
        if gap >= 5.0 {
            gap_wins += 1;
        }
        println!(
            "  [s] seed={seed} accs={:?} argmax=s{} gap={:.1}",
            fmt(&accs),
            svals[argmax],
            gap
        );
    }
    println!("  [s] argmax@s1 {argmax_wins}/{}, gap>=5 {gap_wins}/{}", cfg.nseeds, cfg.nseeds);
}

fn check_t(cfg: &Cfg) {
    let tvals = [4i64, 8, 16, 32, 64, 128, 256];
    let mut shape_wins = 0;
    let mut gap_wins = 0;
    let rows: Vec<(u64, Vec<f64>)> = (1..=3u64)
        .into_par_iter()
        .map(|seed| {
            let spec = spec_with(cfg, 100 + seed);
            let accs: Vec<f64> = tvals
                .par_iter()
                .map(|&t| train_acc(&spec, 5.0, t, cfg.clauses, cfg.states, cfg.epochs, seed))
                .collect();
            (seed, accs)
        })
        .collect();
    for (seed, accs) in rows {
        let argmax = accs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let gap = (accs[4] - accs[0]) * 100.0;
        if argmax != 0 {
            shape_wins += 1;
        }
        if gap >= 3.0 {
            gap_wins += 1;
        }
        println!(
            "  [t] seed={seed} accs={:?} argmax=T{} gap64_4={:.1}",
            fmt(&accs),
            tvals[argmax],
            gap
        );
    }
    println!("  [t] interior-max {shape_wins}/3, gap>=3 {gap_wins}/3");
}

fn check_rbe(cfg: &Cfg) {
    let setups = [
        RbeSetup { specificity: 1.0, margin: 256 },
        RbeSetup { specificity: 3.0, margin: 128 },
        RbeSetup { specificity: 10.0, margin: 32 },
        RbeSetup { specificity: 50.0, margin: 8 },
    ];
    let mut ratio_wins = 0;
    let mut extreme_wins = 0;
    let mut acc_order_wins = 0;
    for seed in 1..=3u64 {
        let spec = spec_with(cfg, 100 + seed);
        let (train, test) = gen_artificial(&spec).unwrap();
        let base = TrainParams {
            model: ModelParams {
                clauses: cfg.clauses,
                boundary: cfg.states,
                ..ModelParams::default()
            },
            epochs: cfg.epochs,
        };
        let out = rbe_grid(&train, &test, &setups, &base, seed).unwrap();
        let ratios: Vec<f64> = out.reports.iter().map(|r| r.rbe_ratio).collect();
        let accs: Vec<f64> = out.reports.iter().map(|r| r.accuracy.unwrap()).collect();
        let decreasing = ratios.windows(2).all(|w| w[0] > w[1]);
        let extremes = ratios[0] >= 0.9 && ratios[3] <= 0.1;
        let acc_order = accs.windows(2).all(|w| w[0] > w[1]);
        if decreasing {
            ratio_wins += 1;
        }
        if extremes {
            extreme_wins += 1;
        }
        if acc_order {
            acc_order_wins += 1;
        }
        println!(
            "  [rbe] seed={seed} ratios={:?} accs={:?} dec={decreasing} ext={extremes} accord={acc_order}",
            ratios.iter().map(|r| (r * 100.0).round() / 100.0).collect::<Vec<_>>(),
            fmt(&accs),
        );
    }
    println!("  [rbe] decreasing {ratio_wins}/3, extremes {extreme_wins}/3, acc-order {acc_order_wins}/3");
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let check = args.get(1).map(String::as_str).unwrap_or("all");
    let cfg = Cfg {
        epochs: args.get(2).and_then(|a| a.parse().ok()).unwrap_or(5),
        noise: args.get(3).and_then(|a| a.parse().ok()).unwrap_or(0.25),
        background_rate: args.get(4).and_then(|a| a.parse().ok()).unwrap_or(1.0),
        num_features: args.get(5).and_then(|a| a.parse().ok()).unwrap_or(20),
        t_for_s_sweep: args.get(6).and_then(|a| a.parse().ok()).unwrap_or(1000),
        clauses: args.get(7).and_then(|a| a.parse().ok()).unwrap_or(100),
        states: args.get(8).and_then(|a| a.parse().ok()).unwrap_or(2048),
        classes: args.get(9).and_then(|a| a.parse().ok()).unwrap_or(2),
        test_n: args.get(10).and_then(|a| a.parse().ok()).unwrap_or(5000),
        nseeds: args.get(11).and_then(|a| a.parse().ok()).unwrap_or(3),
    };
    println!(
        "epochs={} noise={} bg={} m={} T_s={} clauses={} N={} classes={}",
        cfg.epochs, cfg.noise, cfg.background_rate, cfg.num_features, cfg.t_for_s_sweep,
        cfg.clauses, cfg.states, cfg.classes
    );
    match check {
        "s" => check_s(&cfg),
        "t" => check_t(&cfg),
        "rbe" => check_rbe(&cfg),
        "all" => {
            check_s(&cfg);
            check_t(&cfg);
            check_rbe(&cfg);
        }
        other => eprintln!("unknown check {other}"),
    }
}
