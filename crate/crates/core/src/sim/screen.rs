use crate::combine::CombinedPosterior;
use crate::error::{Error, Result};
use crate::probit::QuantileTable;

/// Posterior summary of one response's coefficient on the screened predictor.
#[derive(Clone, Debug, PartialEq)]
pub struct ScreenRow {
    pub response: String,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    /// The 95% interval lies entirely on one side of zero.
    pub excludes_zero: bool,
}

/// Flags every response whose coefficient on `predictor` has a 95%
/// interval that excludes zero.
pub fn significance_screen(combined: &CombinedPosterior, predictor: &str) -> Result<Vec<ScreenRow>> {
    screen_table(&combined.quantiles, predictor)
}

pub fn screen_table(table: &QuantileTable, predictor: &str) -> Result<Vec<ScreenRow>> {
    let layout = &table.layout;
    let p = layout
        .predictor_names
        .iter()
        .position(|name| name == predictor)
        .ok_or_else(|| Error::UnknownPredictor(predictor.to_string()))?;
    let (lo, mid, hi) = (
        table.level_index(0.025)?,
        table.level_index(0.5)?,
        table.level_index(0.975)?,
    );
    Ok(layout
        .response_names
        .iter()
        .enumerate()
        .map(|(m, response)| {
            let row = &table.values[layout.coefficient_index(m, p)];
            ScreenRow {
                response: response.clone(),
                median: row[mid],
                lower: row[lo],
                upper: row[hi],
                excludes_zero: row[lo] > 0.0 || row[hi] < 0.0,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probit::ParameterLayout;

    fn table(intervals: &[(f64, f64)]) -> QuantileTable {
        let m = intervals.len();
        let layout = ParameterLayout::new((0..m).map(|i| format!("y{i}")).collect(), vec!["x".into()]);
        let mut values: Vec<Vec<f64>> = intervals.iter().map(|(l, u)| vec![*l, 0.5 * (l + u), *u]).collect();
        values.extend((0..layout.n_correlations()).map(|_| vec![0.0; 3]));
        QuantileTable {
            means: values.iter().map(|r| r[1]).collect(),
            layout,
            grid: vec![0.025, 0.5, 0.975],
            values,
        }
    }

    #[test]
    fn flags_follow_interval_signs() {
        let t = table(&[(0.1, 0.5), (-0.1, 0.5), (-0.5, -0.1)]);
        let rows = screen_table(&t, "x").unwrap();
        let flags: Vec<bool> = rows.iter().map(|r| r.excludes_zero).collect();
        assert_eq!(flags, vec![true, false, true]);
        assert_eq!(rows[1].median, 0.2);
    }

    #[test]
    fn unknown_predictor() {
        let t = table(&[(0.1, 0.5), (0.1, 0.5)]);
        assert_eq!(screen_table(&t, "age").unwrap_err().kind(), "unknown-predictor");
    }
}
