use std::path::PathBuf;

use bugb::benchmark::{
    aggregate, default_checkpoints, mean_stderr, result_rows, run_experiment, write_results_csv, ExperimentConfig,
    PolicyId, ResultRow,
};
use bugb::environments::{Environment, FunctionId, TestFunction};
use bugb::optimizer::{run_episode, BugbConfig};
use bugb::rng::{stream, StreamPurpose};
use bugb::snapshot::predict_snapshot;
use bugb::Grid;
use rand::Rng;
use rand_distr::StandardNormal;

fn small(function: FunctionId, policy: PolicyId, noise: f64, horizon: usize, reps: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        noise,
        horizon,
        replications: reps,
        seed,
        ..ExperimentConfig::new(function, policy)
    }
}

fn golden_configs() -> Vec<ExperimentConfig> {
    vec![
        small(FunctionId::F1, PolicyId::Uniform, 0.0, 10, 3, 7),
        small(FunctionId::F2, PolicyId::Bugb, 0.1, 30, 3, 3),
        small(FunctionId::F3, PolicyId::BugbNoGrad, 1.0, 30, 3, 3),
        small(FunctionId::F1, PolicyId::GpUcb, 1.0, 30, 3, 3),
        small(FunctionId::F2, PolicyId::MabUcbTuned, 1.0, 30, 3, 3),
        small(FunctionId::F3, PolicyId::GradAscent, 0.5, 30, 3, 3),
    ]
}

fn results_bytes(configs: &[ExperimentConfig], workers: usize) -> Vec<u8> {
    let mut rows: Vec<ResultRow> = Vec::new();
    for cfg in configs {
        let records = run_experiment(cfg, workers).unwrap();
        let agg = aggregate(&records, &default_checkpoints(cfg.horizon)).unwrap();
        rows.extend(result_rows(cfg, &agg));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    write_results_csv(&path, &rows).unwrap();
    std::fs::read(path).unwrap()
}

#[test]
fn golden_results_file() {
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden_results.csv");
    let bytes = results_bytes(&golden_configs(), 1);
    if std::env::var_os("BUGB_BLESS").is_some() {
        std::fs::write(&golden, &bytes).unwrap();
    }
    let frozen = std::fs::read(&golden).expect("golden file missing; run once with BUGB_BLESS=1");
    assert_eq!(String::from_utf8(bytes).unwrap(), String::from_utf8(frozen).unwrap());
}

#[test]
fn workers_do_not_change_output() {
    let configs = golden_configs();
    let sequential = results_bytes(&configs, 1);
    for workers in [2, 3, 8] {
        assert_eq!(results_bytes(&configs, workers), sequential, "workers = {workers}");
    }
}

#[test]
fn reruns_are_identical() {
    let cfg = small(FunctionId::F2, PolicyId::Bugb, 1.0, 50, 5, 99);
    assert_eq!(run_experiment(&cfg, 1).unwrap(), run_experiment(&cfg, 1).unwrap());
}

#[test]
fn uniform_matches_closed_form() {
    for id in FunctionId::ALL {
        let cfg = small(id, PolicyId::Uniform, 1.0, 250, 1000, 0);
        let grid = cfg.grid().unwrap();
        let f = TestFunction::builtin(id);
        let values: Vec<f64> = grid.points().iter().map(|&x| f.value(x)).collect();
        let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let expected = 250.0 * (best - mean);
        let agg = aggregate(&run_experiment(&cfg, 1).unwrap(), &[250]).unwrap();
        let stat = agg.final_stat().unwrap();
        assert!(
            (stat.mean - expected).abs() <= 3.0 * stat.stderr,
            "{id}: {} vs {expected}",
            stat.mean
        );
    }
}

#[test]
fn aggregate_recovers_known_mean() {
    let mut rng = stream(4, 0, StreamPurpose::Policy);
    let samples: Vec<f64> = (0..1000)
        .map(|_| 3.0 + 2.0 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let (mean, se) = mean_stderr(&samples);
    assert!((mean - 3.0).abs() <= 4.0 * 2.0 / 1000f64.sqrt());
    assert!((se - 2.0 / 1000f64.sqrt()).abs() < 0.01);
}

#[test]
fn low_noise_episode_settles_on_the_optimum() {
    let grid = Grid::uniform(0.0, 1.0, 100).unwrap();
    let cfg = ExperimentConfig {
        noise: 0.01,
        ..ExperimentConfig::new(FunctionId::F1, PolicyId::Bugb)
    };
    let mut settled = 0;
    for seed in 0..100 {
        let mut env = Environment::new(
            TestFunction::builtin(FunctionId::F1),
            grid.clone(),
            0.01,
            0.01,
            stream(seed, 0, StreamPurpose::Environment),
        )
        .unwrap();
        let (best, _) = env.grid_optimum();
        let config: BugbConfig = bugb::benchmark::bugb_config(&cfg, grid.clone());
        let mut rng = stream(seed, 0, StreamPurpose::Policy);
        let record = run_episode(config, &mut env, 100, &mut rng).unwrap();
        let mut tail = record.chosen[75..].to_vec();
        tail.sort_unstable();
        if tail[12].abs_diff(best) <= 3 {
            settled += 1;
        }
    }
    assert!(settled >= 95, "settled near the optimum in {settled} of 100 runs");
}

#[test]
fn five_observations_track_a_smooth_function() {
    let cfg = ExperimentConfig {
        noise: 0.01,
        ..ExperimentConfig::new(FunctionId::F1, PolicyId::Bugb)
    };
    let rows = predict_snapshot(&cfg, 5, 0.99, 0).unwrap();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r.covers_truth()));
}
