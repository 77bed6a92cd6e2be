use std::path::Path;

use mvprobit::io::{self, FileDigest, RunManifest};
use mvprobit::probit::DEFAULT_QUANTILE_GRID;
use mvprobit::sim::{self, SimConfig};
use mvprobit::{
    cmc_combine, make_shard_plan, pie_combine, run_chain, run_sharded, CombineMethod, CombinedPosterior, Dataset,
    Error, ModelConfig, PosteriorSummary, Result, ShardMode, ShardPlan,
};

use super::{
    ClusterArgs, CombineArgs, Command, DesignArgs, FitArgs, MetricsArgs, ModelArgs, PipelineArgs, ScreenArgs,
    ShardArgs, SimulateArgs, SplitArgs,
};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Split(a) => split(a),
        Command::Fit(a) => fit(a),
        Command::Combine(a) => combine(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Metrics(a) => metrics(a),
        Command::Cluster(a) => cluster(a),
        Command::Screen(a) => screen(a),
    }
}

fn sim_config(design: &DesignArgs, default_factors: usize, seed: u64) -> SimConfig {
    SimConfig {
        n: design.n,
        m: design.m,
        p: design.p,
        true_factors: design.true_factors.unwrap_or(default_factors),
        include_intercept: !design.no_intercept,
        seed,
        replicate_id: design.replicate,
        ..Default::default()
    }
}

fn model_config(m: &ModelArgs, seed: u64) -> Result<ModelConfig> {
    let config = ModelConfig {
        n_factors: m.factors,
        prior_variance: m.prior_variance,
        n_iter: m.iter,
        burn_in: m.burn_in,
        thin: m.thin,
        seed,
        quantile_grid: m.grid.clone().unwrap_or_else(|| DEFAULT_QUANTILE_GRID.to_vec()),
        keep_draws: m.keep_draws,
    };
    config.validate()?;
    Ok(config)
}

fn shard_mode(s: ShardArgs) -> (usize, ShardMode) {
    match (s.shards, s.shard_size) {
        (Some(k), _) => (k, ShardMode::ByCount),
        (None, Some(size)) => (size, ShardMode::BySize),
        // clap requires exactly one of the two.
        (None, None) => unreachable!("shard arguments are validated by the parser"),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::from(e).context(format!("creating {}", dir.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::from(e).context(format!("writing {}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn shard_file(s: usize) -> String {
    format!("shard-{s:03}")
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let cfg = sim_config(&a.design, 2, a.seed);
    let (data, truth) = sim::simulate_dataset(&cfg)?;
    io::save_dataset(&data, &a.data)?;
    io::save_truth(&truth, data.response_names(), data.predictor_names(), &a.truth)
}

fn write_shards(data: &Dataset, plan: &ShardPlan, dir: &Path) -> Result<()> {
    for s in 0..plan.n_shards() {
        let shard = data.select_rows(&plan.rows(s));
        io::save_dataset(&shard, &dir.join(format!("{}.csv", shard_file(s))))?;
    }
    Ok(())
}

fn split(a: SplitArgs) -> Result<()> {
    let data = io::load_dataset(&a.data)?;
    let (s, mode) = shard_mode(a.shards);
    let plan = make_shard_plan(data.n_rows(), s, mode, a.seed)?;
    create_dir(&a.out)?;
    write_shards(&data, &plan, &a.out)?;
    io::save_plan(&plan, &a.out.join("plan.txt"))
}

fn fit(a: FitArgs) -> Result<()> {
    let data = io::load_dataset(&a.shard)?;
    let config = model_config(&a.model, a.seed)?;
    let summary = run_chain(&data, &config, a.epsilon, a.stream_id)?;
    io::save_summary(&summary, &a.out)
}

fn combine_summaries(method: CombineMethod, shards: &[PosteriorSummary]) -> Result<CombinedPosterior> {
    match method {
        CombineMethod::Cmc => cmc_combine(shards),
        CombineMethod::Pie => pie_combine(shards),
    }
}

fn combine(a: CombineArgs) -> Result<()> {
    let shards = a
        .summaries
        .iter()
        .map(|p| io::load_summary(p)?.into_chain().map_err(|e| e.context(p.display().to_string())))
        .collect::<Result<Vec<_>>>()?;
    let combined = combine_summaries(a.method.into(), &shards)?;
    io::save_combined(&combined, &a.out)
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn pipeline(a: PipelineArgs) -> Result<()> {
    create_dir(&a.out)?;
    let data_path = a.out.join("data.csv");
    let data = match &a.data {
        Some(src) => {
            let data = io::load_dataset(src)?;
            std::fs::copy(src, &data_path)?;
            data
        }
        None => {
            let design = DesignArgs {
                n: a.n.expect("required without --data"),
                m: a.m.expect("required without --data"),
                p: a.p.expect("required without --data"),
                true_factors: a.true_factors,
                no_intercept: a.no_intercept,
                replicate: 0,
            };
            let (data, truth) = sim::simulate_dataset(&sim_config(&design, a.model.factors, a.seed))?;
            io::save_dataset(&data, &data_path)?;
            io::save_truth(&truth, data.response_names(), data.predictor_names(), &a.out.join("truth.txt"))?;
            data
        }
    };

    let method: CombineMethod = a.method.into();
    let mut config = model_config(&a.model, a.seed)?;
    config.keep_draws |= method == CombineMethod::Cmc;
    let (s, mode) = shard_mode(a.shards);
    let plan = make_shard_plan(data.n_rows(), s, mode, a.seed)?;
    io::save_plan(&plan, &a.out.join("plan.txt"))?;

    let results = run_sharded(&data, &plan, &config, a.parallelism)?;
    let shard_dir = a.out.join("shards");
    create_dir(&shard_dir)?;
    let mut outputs = Vec::new();
    for r in &results {
        let name = format!("shards/{}.txt", shard_file(r.shard_id));
        io::save_summary(&r.summary, &a.out.join(&name))?;
        outputs.push(name);
    }
    let summaries: Vec<PosteriorSummary> = results.into_iter().map(|r| r.summary).collect();
    let combined = combine_summaries(method, &summaries)?;
    io::save_combined(&combined, &a.out.join("combined.txt"))?;
    outputs.push("combined.txt".into());

    let with_sidecars: Vec<String> = outputs
        .into_iter()
        .flat_map(|name| {
            let sidecar = format!("{name}.draws");
            let exists = a.out.join(&sidecar).exists();
            std::iter::once(name).chain(exists.then_some(sidecar))
        })
        .collect();
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        created_unix: unix_now(),
        config,
        dataset: FileDigest::of(&a.out, "data.csv")?,
        plan: FileDigest::of(&a.out, "plan.txt")?,
        outputs: with_sidecars
            .iter()
            .map(|name| FileDigest::of(&a.out, name))
            .collect::<Result<_>>()?,
    };
    manifest.save(&a.out.join("manifest.json"))
}

fn load_combined(path: &Path) -> Result<CombinedPosterior> {
    io::load_summary(path)?
        .into_combined()
        .map_err(|e| e.context(path.display().to_string()))
}

fn metrics(a: MetricsArgs) -> Result<()> {
    if a.summaries.len() != a.truths.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} summaries but {} truth files",
            a.summaries.len(),
            a.truths.len()
        )));
    }
    let mut combined = Vec::with_capacity(a.summaries.len());
    let mut truths = Vec::with_capacity(a.truths.len());
    for (summary_path, truth_path) in a.summaries.iter().zip(&a.truths) {
        let c = load_combined(summary_path)?;
        let (truth, responses, predictors) = io::load_truth(truth_path)?;
        let layout = &c.quantiles.layout;
        if layout.response_names != responses || layout.predictor_names != predictors {
            return Err(Error::DimensionMismatch(format!(
                "{} and {} describe different responses or predictors",
                summary_path.display(),
                truth_path.display()
            )));
        }
        combined.push(c);
        truths.push(truth);
    }
    let report = sim::evaluate(&combined, &truths, a.estimator.into())?;
    emit(a.out.as_deref(), &io::metrics_table(&report))
}

fn cluster(a: ClusterArgs) -> Result<()> {
    let record = io::load_summary(&a.summary)?;
    let table = record.quantiles();
    let r_hat = table.at_level(0.5)?.r;
    let tree = sim::correlation_distance_clustering(&r_hat, &table.layout.response_names, a.linkage.into())?;
    emit(a.out.as_deref(), &io::dendrogram_text(&tree))
}

fn screen(a: ScreenArgs) -> Result<()> {
    let record = io::load_summary(&a.summary)?;
    let rows = sim::screen_table(record.quantiles(), &a.predictor)?;
    emit(a.out.as_deref(), &io::screen_table_text(&a.predictor, &rows))
}
