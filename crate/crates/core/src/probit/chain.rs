use super::config::ModelConfig;
use super::data::Dataset;
use super::state::ChainState;
use super::summary::{ParameterLayout, PosteriorSummary, QuantileTable};
use super::updates::{update_latents_and_factors, update_loadings, CoefficientKernel};
use crate::error::{Error, Result};
use crate::kernels::RngStream;

/// Release builds scan the state for non-finite values this often.
const FINITE_CHECK_INTERVAL: usize = 100;

/// Runs one Gibbs chain on `data` with priors fractionated by `epsilon`
/// (`epsilon = 1` is the full-data sampler) and random stream
/// `(config.seed, stream_id)`.
///
/// Each sweep refreshes latents and factor scores row by row, then the
/// coefficient rows, then the loading rows, and stores the identified
/// `(B~, R)` for every kept iteration.
pub fn run_chain(
    data: &Dataset,
    config: &ModelConfig,
    epsilon: f64,
    stream_id: u64,
) -> Result<PosteriorSummary> {
    config.validate()?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    let mut rng = RngStream::new(config.seed, stream_id);
    let mut state = ChainState::initialize(data, config.n_factors, &mut rng);
    let coefficients = CoefficientKernel::new(data.x(), config.prior_variance, epsilon)?;

    let layout = ParameterLayout::new(
        data.response_names().to_vec(),
        data.predictor_names().to_vec(),
    );
    let n_params = layout.n_params();
    let n_kept = config.n_kept();
    let mut draws: Vec<Vec<f64>> = (0..n_params).map(|_| Vec::with_capacity(n_kept)).collect();
    let mut flat = vec![0.0; n_params];

    for iter in 0..config.n_iter {
        let at = |e: Error| e.context(format!("iteration {iter}"));
        update_latents_and_factors(&mut state, data, &mut rng).map_err(at)?;
        coefficients.apply(&mut state, data, &mut rng);
        update_loadings(&mut state, data, config.prior_variance, epsilon, &mut rng).map_err(at)?;

        let check = cfg!(debug_assertions)
            || (iter + 1) % FINITE_CHECK_INTERVAL == 0
            || iter + 1 == config.n_iter;
        if check && !state.is_finite() {
            return Err(Error::NonFinite { iteration: iter });
        }

        if iter >= config.burn_in && (iter - config.burn_in).is_multiple_of(config.thin) {
            layout.flatten_into(&state.identify(), &mut flat);
            for (column, v) in draws.iter_mut().zip(&flat) {
                column.push(*v);
            }
        }
    }
    debug_assert_eq!(draws[0].len(), n_kept);

    let quantiles = QuantileTable::from_draws(layout, &config.quantile_grid, &draws);
    Ok(PosteriorSummary {
        quantiles,
        draws: config.keep_draws.then_some(draws),
        n_kept,
    })
}
