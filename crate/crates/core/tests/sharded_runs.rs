use mvprobit::probit::{coefficient_conditional, loading_conditional};
use mvprobit::sim::{simulate_dataset, SimConfig};
use mvprobit::{cmc_combine, make_shard_plan, pie_combine, run_chain, run_sharded, ModelConfig, ShardMode};
use nalgebra::{DMatrix, DVector};

fn fixture(n: usize) -> mvprobit::Dataset {
    let cfg = SimConfig { n, m: 3, p: 2, true_factors: 1, seed: 5, ..Default::default() };
    simulate_dataset(&cfg).unwrap().0
}

fn config() -> ModelConfig {
    ModelConfig { n_factors: 1, n_iter: 120, burn_in: 40, thin: 2, seed: 9, keep_draws: true, ..Default::default() }
}

#[test]
fn single_shard_equals_full_chain() {
    let data = fixture(500);
    let plan = make_shard_plan(500, 1, ShardMode::ByCount, 3).unwrap();
    assert_eq!(plan.epsilons, vec![1.0]);
    let sharded = run_sharded(&data, &plan, &config(), 1).unwrap();
    let full = run_chain(&data, &config(), 1.0, 0).unwrap();
    assert_eq!(sharded[0].summary, full);

    let pie = pie_combine(&sharded).unwrap();
    assert_eq!(pie.quantiles, full.quantiles);
    assert!(pie.draws.is_none());
    let cmc = cmc_combine(&sharded).unwrap();
    assert_eq!(cmc.draws.as_ref(), full.draws.as_ref());
}

#[test]
fn results_do_not_depend_on_parallelism() {
    let data = fixture(800);
    let plan = make_shard_plan(800, 4, ShardMode::ByCount, 3).unwrap();
    let serial = run_sharded(&data, &plan, &config(), 1).unwrap();
    let parallel = run_sharded(&data, &plan, &config(), 4).unwrap();
    for (a, b) in serial.iter().zip(&parallel) {
        assert_eq!(a.shard_id, b.shard_id);
        assert_eq!(a.summary, b.summary);
    }
    assert_eq!(pie_combine(&serial).unwrap(), pie_combine(&parallel).unwrap());
}

#[test]
fn shard_bookkeeping() {
    let data = fixture(4000);
    let plan = make_shard_plan(4000, 1000, ShardMode::BySize, 0).unwrap();
    let cfg = ModelConfig { n_iter: 30, burn_in: 10, thin: 1, keep_draws: false, ..config() };
    let results = run_sharded(&data, &plan, &cfg, 2).unwrap();
    assert_eq!(results.len(), 4);
    for (s, r) in results.iter().enumerate() {
        assert_eq!(r.shard_id, s);
        assert_eq!(r.n_kept, 20);
        assert_eq!(r.epsilon, 0.25);
        assert!(r.summary.draws.is_none());
    }
}

#[test]
fn plan_must_cover_the_dataset() {
    let data = fixture(100);
    let plan = make_shard_plan(99, 2, ShardMode::ByCount, 0).unwrap();
    assert_eq!(run_sharded(&data, &plan, &config(), 1).unwrap_err().kind(), "dimension-mismatch");
}

/// With S equal shards the fractionated prior precisions add back to the
/// full prior precision `1 / v`, in both the coefficient and loading updates.
#[test]
fn fractionated_priors_recombine() {
    let v = 1e6;
    for s in [2usize, 4, 5, 8] {
        let eps = 1.0 / s as f64;
        // A zero design isolates the prior term: covariance = (eps / v)^{-1} I.
        let design = DMatrix::zeros(3, 2);
        let resid = DVector::zeros(3);
        for moments in [
            coefficient_conditional(&design, &resid, v, eps).unwrap(),
            loading_conditional(&design, &resid, v, eps).unwrap(),
        ] {
            let prior_precision = 1.0 / moments.covariance[(0, 0)];
            assert!((s as f64 * prior_precision * v - 1.0).abs() < 1e-12);
            assert_eq!(moments.covariance[(0, 1)], 0.0);
        }
    }
}
