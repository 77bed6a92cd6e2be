//! Ground-truth files written next to simulated datasets.

use std::path::Path;

use nalgebra::DMatrix;

use super::{check_names, check_version, join_reals, read_text, version_line, write_text, Lines};
use crate::error::Result;
use crate::sim::SimTruth;

const KIND: &str = "mvprobit-truth";

/// Matrix sections in file order.
const SECTIONS: [&str; 4] = ["b_true", "r_true", "b_generator", "theta_generator"];

pub fn save_truth(truth: &SimTruth, response_names: &[String], predictor_names: &[String], path: &Path) -> Result<()> {
    check_names(response_names)?;
    check_names(predictor_names)?;
    let mut out = String::new();
    out.push_str(&version_line(KIND));
    out.push('\n');
    out.push_str(&format!("responses: {}\n", response_names.join(",")));
    out.push_str(&format!("predictors: {}\n", predictor_names.join(",")));
    out.push_str(&format!("factors: {}\n", truth.theta_generator.ncols()));
    let matrices = [&truth.b_true, &truth.r_true, &truth.b_generator, &truth.theta_generator];
    for (name, m) in SECTIONS.iter().zip(matrices) {
        out.push_str(name);
        out.push_str(":\n");
        for row in m.row_iter() {
            let values: Vec<f64> = row.iter().copied().collect();
            out.push_str(&join_reals(&values));
            out.push('\n');
        }
    }
    out.push_str("end\n");
    write_text(path, &out)
}

/// Ground truth plus the response and predictor names it was written with.
pub fn load_truth(path: &Path) -> Result<(SimTruth, Vec<String>, Vec<String>)> {
    let text = read_text(path)?;
    let mut lines = Lines::new(path, &text);
    check_version(lines.first(), KIND, path)?;
    let responses = lines.names_field("responses")?;
    let predictors = lines.names_field("predictors")?;
    let factors = lines.usize_field("factors")?;
    let (m, p) = (responses.len(), predictors.len());
    let shapes = [(m, p), (m, m), (m, p), (m, factors)];
    let mut matrices = Vec::with_capacity(4);
    for (name, (rows, cols)) in SECTIONS.iter().zip(shapes) {
        lines.expect(&format!("{name}:"))?;
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let line = lines.next_line()?;
            let row = lines.reals(line, name)?;
            if row.len() != cols {
                return Err(lines.error(format!("{name}: row has {} values, expected {cols}", row.len())));
            }
            values.extend(row);
        }
        matrices.push(DMatrix::from_row_slice(rows, cols, &values));
    }
    lines.expect("end")?;
    let mut it = matrices.into_iter();
    let mut next = || it.next().expect("four sections");
    let truth = SimTruth {
        b_true: next(),
        r_true: next(),
        b_generator: next(),
        theta_generator: next(),
    };
    Ok((truth, responses, predictors))
}
