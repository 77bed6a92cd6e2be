//! Delimited dataset files: a header row naming response columns `y:<name>`
//! and predictor columns `x:<name>`, then one row per observation.

use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;

use super::{check_names, fmt_real, write_text};
use crate::error::{Error, Result};
use crate::probit::Dataset;

enum Column {
    Response(usize),
    Predictor(usize),
}

/// Parses a dataset from delimited text. Row numbers in errors count data
/// rows from 1.
pub fn parse_dataset<R: Read>(reader: R) -> Result<Dataset> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = csv.records();
    let header = match records.next() {
        None => return Err(Error::EmptyInput("dataset file is empty".into())),
        Some(h) => h.map_err(csv_error)?,
    };

    let mut columns = Vec::with_capacity(header.len());
    let mut response_names = Vec::new();
    let mut predictor_names = Vec::new();
    for (i, name) in header.iter().enumerate() {
        if let Some(n) = name.strip_prefix("y:") {
            columns.push(Column::Response(response_names.len()));
            response_names.push(n.to_string());
        } else if let Some(n) = name.strip_prefix("x:") {
            columns.push(Column::Predictor(predictor_names.len()));
            predictor_names.push(n.to_string());
        } else {
            return Err(header_error(format!(
                "column {} ({name:?}) lacks a y: or x: prefix",
                i + 1
            )));
        }
    }
    if response_names.is_empty() || predictor_names.is_empty() {
        return Err(header_error("need at least one y: and one x: column".into()));
    }
    for names in [&response_names, &predictor_names] {
        if let Some(dup) = names.iter().enumerate().find(|(i, n)| names[..*i].contains(n)) {
            return Err(header_error(format!("duplicate column name {:?}", dup.1)));
        }
    }
    check_names(&response_names).map_err(|e| header_error(e.to_string()))?;
    check_names(&predictor_names).map_err(|e| header_error(e.to_string()))?;

    let column_name = |i: usize| header[i].to_string();
    let (m, p) = (response_names.len(), predictor_names.len());
    let mut y = Vec::new();
    let mut x = Vec::new();
    let mut n = 0;
    for record in records {
        let record = record.map_err(csv_error)?;
        n += 1;
        if record.len() == 1 && record[0].is_empty() && columns.len() > 1 {
            return Err(Error::Parse { row: n, column: column_name(0), message: "blank line".into() });
        }
        if record.len() != columns.len() {
            return Err(Error::Parse {
                row: n,
                column: column_name(record.len().min(columns.len() - 1)),
                message: format!("expected {} fields, found {}", columns.len(), record.len()),
            });
        }
        let mut y_row = vec![0u8; m];
        let mut x_row = vec![0.0; p];
        for (i, (cell, col)) in record.iter().zip(&columns).enumerate() {
            let err = |message: String| Error::Parse { row: n, column: column_name(i), message };
            if cell.is_empty() {
                return Err(err("missing value".into()));
            }
            match *col {
                Column::Response(j) => {
                    y_row[j] = match cell {
                        "0" => 0,
                        "1" => 1,
                        _ => return Err(err(format!("response value {cell:?} is not 0 or 1"))),
                    }
                }
                Column::Predictor(j) => {
                    let v: f64 = cell
                        .parse()
                        .map_err(|_| err(format!("predictor value {cell:?} is not a number")))?;
                    if !v.is_finite() {
                        return Err(err(format!("predictor value {cell:?} is not finite")));
                    }
                    x_row[j] = v;
                }
            }
        }
        y.extend(y_row);
        x.extend(x_row);
    }
    if n == 0 {
        return Err(Error::EmptyInput("dataset has a header but no rows".into()));
    }
    Dataset::new(
        DMatrix::from_row_slice(n, m, &y),
        DMatrix::from_row_slice(n, p, &x),
        response_names,
        predictor_names,
    )
}

fn header_error(message: String) -> Error {
    Error::Parse { row: 0, column: "header".into(), message }
}

fn csv_error(e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { row: row.saturating_sub(1), column: String::new(), message: e.to_string() }
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
    parse_dataset(std::io::BufReader::new(file)).map_err(|e| e.context(path.display().to_string()))
}

/// Writes `data` in the format read by [`load_dataset`]; reals keep 17
/// significant digits so the round trip is exact.
pub fn save_dataset(data: &Dataset, path: &Path) -> Result<()> {
    write_text(path, &dataset_text(data))
}

pub(crate) fn dataset_text(data: &Dataset) -> String {
    let mut out = String::new();
    let header: Vec<String> = data
        .response_names()
        .iter()
        .map(|n| format!("y:{n}"))
        .chain(data.predictor_names().iter().map(|n| format!("x:{n}")))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    let (y, x) = (data.y(), data.x());
    for i in 0..data.n_rows() {
        let cells: Vec<String> = (0..data.n_responses())
            .map(|j| y[(i, j)].to_string())
            .chain((0..data.n_predictors()).map(|j| fmt_real(x[(i, j)])))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dataset> {
        parse_dataset(text.as_bytes())
    }

    #[test]
    fn parses_prefixed_header() {
        let d = parse("y:a,y:b,x:age\n0,1,3.5\n1,1,-2\n").unwrap();
        assert_eq!((d.n_rows(), d.n_responses(), d.n_predictors()), (2, 2, 1));
        assert_eq!(d.response_names(), ["a", "b"]);
        assert_eq!(d.x()[(1, 0)], -2.0);
        assert_eq!(d.y()[(0, 1)], 1);
    }

    #[test]
    fn interleaved_columns_keep_their_roles() {
        let d = parse("x:c,y:a,x:d,y:b\n1,0,2,1\n").unwrap();
        assert_eq!(d.predictor_names(), ["c", "d"]);
        assert_eq!(d.y()[(0, 1)], 1);
        assert_eq!(d.x()[(0, 1)], 2.0);
    }

    #[test]
    fn non_binary_cell_names_row_and_column() {
        match parse("y:a,y:b,x:age\n0,1,3\n1,2,4\n").unwrap_err() {
            Error::Parse { row, column, .. } => assert_eq!((row, column.as_str()), (2, "y:b")),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn missing_value_and_bad_header() {
        match parse("y:a,y:b,x:age\n0,,3\n").unwrap_err() {
            Error::Parse { row, column, message } => {
                assert_eq!((row, column.as_str()), (1, "y:b"));
                assert!(message.contains("missing"));
            }
            e => panic!("unexpected {e:?}"),
        }
        assert_eq!(parse("a,y:b,x:c\n0,1,2\n").unwrap_err().kind(), "parse");
        assert_eq!(parse("y:a,y:b\n0,1\n").unwrap_err().kind(), "parse");
        assert_eq!(parse("y:a,y:b,x:c\n0,1\n").unwrap_err().kind(), "parse");
        assert_eq!(parse("y:a,y:b,x:c\n0,1,inf\n").unwrap_err().kind(), "parse");
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(parse("").unwrap_err().kind(), "empty-input");
        assert_eq!(parse("y:a,y:b,x:c\n").unwrap_err().kind(), "empty-input");
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let d = parse("y:a,y:b,x:one,x:z\n0,1,1,0.1\n1,0,1,-3.3333333333333335\n").unwrap();
        let again = parse(&dataset_text(&d)).unwrap();
        assert_eq!(d, again);
    }
}
