use mvprobit::io::{self, SummaryRecord};
use mvprobit::sim::{simulate_dataset, SimConfig};
use mvprobit::{cmc_combine, make_shard_plan, pie_combine, run_chain, run_sharded, ModelConfig, ShardMode};

fn config() -> ModelConfig {
    ModelConfig { n_factors: 1, n_iter: 80, burn_in: 30, seed: 12, keep_draws: true, ..Default::default() }
}

#[test]
fn chain_summary_roundtrips_bitwise() {
    let (data, _) = simulate_dataset(&SimConfig { n: 300, m: 3, p: 2, true_factors: 1, ..Default::default() }).unwrap();
    let summary = run_chain(&data, &config(), 0.5, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("shard.txt");
    io::save_summary(&summary, &path).unwrap();
    assert_eq!(io::load_summary(&path).unwrap(), SummaryRecord::Chain(summary));
}

/// Fitting shard files independently, then combining the saved summaries,
/// reproduces the in-memory sharded run exactly.
#[test]
fn file_based_fits_match_in_memory_run() {
    let (data, _) = simulate_dataset(&SimConfig { n: 600, m: 3, p: 2, true_factors: 1, seed: 4, ..Default::default() }).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let data_path = dir.path().join("data.csv");
    io::save_dataset(&data, &data_path).unwrap();
    let loaded = io::load_dataset(&data_path).unwrap();
    assert_eq!(loaded, data);

    let plan = make_shard_plan(600, 3, ShardMode::ByCount, 8).unwrap();
    let plan_path = dir.path().join("plan.txt");
    io::save_plan(&plan, &plan_path).unwrap();
    let plan = io::load_plan(&plan_path).unwrap();

    let mut from_files = Vec::new();
    for s in 0..plan.n_shards() {
        let shard_path = dir.path().join(format!("shard-{s}.csv"));
        io::save_dataset(&loaded.select_rows(&plan.rows(s)), &shard_path).unwrap();
        let shard = io::load_dataset(&shard_path).unwrap();
        let eps: f64 = io::fmt_real(plan.epsilons[s]).parse().unwrap();
        let summary = run_chain(&shard, &config(), eps, s as u64).unwrap();
        let out = dir.path().join(format!("fit-{s}.txt"));
        io::save_summary(&summary, &out).unwrap();
        from_files.push(io::load_summary(&out).unwrap().into_chain().unwrap());
    }
    let in_memory = run_sharded(&data, &plan, &config(), 2).unwrap();
    assert_eq!(pie_combine(&from_files).unwrap(), pie_combine(&in_memory).unwrap());
    assert_eq!(cmc_combine(&from_files).unwrap(), cmc_combine(&in_memory).unwrap());
}
