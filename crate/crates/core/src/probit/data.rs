use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Binary responses `Y` (N x M) with predictors `X` (N x P).
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    y: DMatrix<u8>,
    x: DMatrix<f64>,
    response_names: Vec<String>,
    predictor_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        y: DMatrix<u8>,
        x: DMatrix<f64>,
        response_names: Vec<String>,
        predictor_names: Vec<String>,
    ) -> Result<Self> {
        if y.nrows() == 0 {
            return Err(Error::EmptyInput("dataset has no rows".into()));
        }
        if y.nrows() != x.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "Y has {} rows but X has {}",
                y.nrows(),
                x.nrows()
            )));
        }
        if y.ncols() < 2 {
            return Err(Error::InvalidParameter(format!(
                "at least 2 responses are required, got {}",
                y.ncols()
            )));
        }
        if x.ncols() < 1 {
            return Err(Error::InvalidParameter("at least 1 predictor is required".into()));
        }
        if response_names.len() != y.ncols() || predictor_names.len() != x.ncols() {
            return Err(Error::DimensionMismatch(
                "name lists do not match matrix widths".into(),
            ));
        }
        if let Some(((r, c), v)) = y
            .iter()
            .enumerate()
            .map(|(i, v)| ((i % y.nrows(), i / y.nrows()), v))
            .find(|(_, v)| **v > 1)
        {
            return Err(Error::Parse {
                row: r + 1,
                column: response_names[c].clone(),
                message: format!("response value {v} is not 0 or 1"),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("predictors must be finite".into()));
        }
        Ok(Dataset {
            y,
            x,
            response_names,
            predictor_names,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.y.nrows()
    }

    pub fn n_responses(&self) -> usize {
        self.y.ncols()
    }

    pub fn n_predictors(&self) -> usize {
        self.x.ncols()
    }

    pub fn y(&self) -> &DMatrix<u8> {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn response_names(&self) -> &[String] {
        &self.response_names
    }

    pub fn predictor_names(&self) -> &[String] {
        &self.predictor_names
    }

    /// The sub-dataset made of `rows`, in the order given.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            y: self.y.select_rows(rows),
            x: self.x.select_rows(rows),
            response_names: self.response_names.clone(),
            predictor_names: self.predictor_names.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn rejects_non_binary() {
        let y = DMatrix::from_row_slice(2, 2, &[0, 1, 2, 0]);
        let x = DMatrix::from_element(2, 1, 1.0);
        let err = Dataset::new(y, x, names("y", 2), names("x", 1)).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "y0");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_single_response_and_row_mismatch() {
        let x = DMatrix::from_element(2, 1, 1.0);
        assert!(Dataset::new(DMatrix::zeros(2, 1), x.clone(), names("y", 1), names("x", 1)).is_err());
        assert!(Dataset::new(DMatrix::zeros(3, 2), x, names("y", 2), names("x", 1)).is_err());
    }

    #[test]
    fn selects_rows_in_order() {
        let y = DMatrix::from_row_slice(3, 2, &[0, 1, 1, 0, 1, 1]);
        let x = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        let d = Dataset::new(y, x, names("y", 2), names("x", 1)).unwrap();
        let s = d.select_rows(&[2, 0]);
        assert_eq!(s.n_rows(), 2);
        assert_eq!(s.x()[(0, 0)], 3.0);
        assert_eq!(s.y()[(1, 1)], 1);
    }
}
