//! Posterior summary files.
//!
//! ```text
//! mvprobit-summary 1.0
//! method: chain | cmc | pie
//! n_shards: <S>
//! n_kept: <T>
//! median_r_psd: true | false | n/a
//! responses: <comma-separated>
//! predictors: <comma-separated>
//! grid: <comma-separated levels>
//! draws: none | <file name> little-endian
//! parameter<TAB>mean<TAB><level>...
//! <one tab-separated row per parameter>
//! end
//! ```
//!
//! The draw sidecar lives next to the summary and holds `draws[param][t]`
//! as little-endian `f64` after a fixed header.

use std::path::{Path, PathBuf};

use super::{check_names, check_version, fmt_real, join_reals, parse_real, read_text, version_line, write_text, Lines};
use crate::combine::{CombineMethod, CombinedPosterior};
use crate::error::{Error, Result};
use crate::probit::{ParameterLayout, PosteriorSummary, QuantileTable};

const KIND: &str = "mvprobit-summary";
const SIDECAR_MAGIC: &[u8; 8] = b"MVPDRAWS";
const SIDECAR_HEADER: usize = 8 + 4 + 4 + 8 + 8;
const LITTLE_ENDIAN: u32 = 0;

/// A summary file's contents: a single chain or a combined posterior.
#[derive(Clone, Debug, PartialEq)]
pub enum SummaryRecord {
    Chain(PosteriorSummary),
    Combined(CombinedPosterior),
}

impl SummaryRecord {
    pub fn quantiles(&self) -> &QuantileTable {
        match self {
            SummaryRecord::Chain(s) => &s.quantiles,
            SummaryRecord::Combined(c) => &c.quantiles,
        }
    }

    pub fn draws(&self) -> Option<&Vec<Vec<f64>>> {
        match self {
            SummaryRecord::Chain(s) => s.draws.as_ref(),
            SummaryRecord::Combined(c) => c.draws.as_ref(),
        }
    }

    pub fn n_kept(&self) -> usize {
        match self {
            SummaryRecord::Chain(s) => s.n_kept,
            SummaryRecord::Combined(c) => c.n_kept,
        }
    }

    /// The chain summary, or a configuration error for a combined record.
    pub fn into_chain(self) -> Result<PosteriorSummary> {
        match self {
            SummaryRecord::Chain(s) => Ok(s),
            SummaryRecord::Combined(c) => Err(Error::Configuration(format!(
                "expected a per-shard summary, found a {} combined summary",
                c.method
            ))),
        }
    }

    /// The combined posterior; a chain summary is treated as one shard.
    pub fn into_combined(self) -> Result<CombinedPosterior> {
        match self {
            SummaryRecord::Combined(c) => Ok(c),
            SummaryRecord::Chain(s) => crate::combine::pie_combine(&[s]),
        }
    }
}

struct Header<'a> {
    method: &'a str,
    n_shards: usize,
    median_r_psd: Option<bool>,
}

pub fn save_summary(summary: &PosteriorSummary, path: &Path) -> Result<()> {
    let header = Header { method: "chain", n_shards: 1, median_r_psd: None };
    write_summary(path, &header, &summary.quantiles, summary.n_kept, summary.draws.as_deref())
}

pub fn save_combined(combined: &CombinedPosterior, path: &Path) -> Result<()> {
    let header = Header {
        method: combined.method.as_str(),
        n_shards: combined.n_shards,
        median_r_psd: Some(combined.median_correlation_psd),
    };
    write_summary(path, &header, &combined.quantiles, combined.n_kept, combined.draws.as_deref())
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".draws");
    path.with_file_name(name)
}

fn write_summary(
    path: &Path,
    header: &Header,
    table: &QuantileTable,
    n_kept: usize,
    draws: Option<&[Vec<f64>]>,
) -> Result<()> {
    check_names(&table.layout.response_names)?;
    check_names(&table.layout.predictor_names)?;
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    line(version_line(KIND));
    line(format!("method: {}", header.method));
    line(format!("n_shards: {}", header.n_shards));
    line(format!("n_kept: {n_kept}"));
    line(format!(
        "median_r_psd: {}",
        header.median_r_psd.map_or("n/a".to_string(), |b| b.to_string())
    ));
    line(format!("responses: {}", table.layout.response_names.join(",")));
    line(format!("predictors: {}", table.layout.predictor_names.join(",")));
    line(format!("grid: {}", join_reals(&table.grid)));
    let sidecar = sidecar_path(path);
    match draws {
        Some(_) => line(format!(
            "draws: {} little-endian",
            sidecar.file_name().unwrap_or_default().to_string_lossy()
        )),
        None => line("draws: none".into()),
    }
    let mut columns = vec!["parameter".to_string(), "mean".to_string()];
    columns.extend(table.grid.iter().map(|q| fmt_real(*q)));
    line(columns.join("\t"));
    for ((name, row), mean) in table.parameter_names().iter().zip(&table.values).zip(&table.means) {
        let mut cells = vec![name.clone(), fmt_real(*mean)];
        cells.extend(row.iter().map(|v| fmt_real(*v)));
        line(cells.join("\t"));
    }
    line("end".into());

    if let Some(draws) = draws {
        std::fs::write(&sidecar, encode_draws(draws))
            .map_err(|e| Error::from(e).context(format!("writing {}", sidecar.display())))?;
    } else if sidecar.exists() {
        // A stale sidecar from an earlier run would otherwise be picked up.
        std::fs::remove_file(&sidecar)?;
    }
    write_text(path, &out)
}

fn encode_draws(draws: &[Vec<f64>]) -> Vec<u8> {
    let n_draws = draws.first().map_or(0, Vec::len);
    let mut bytes = Vec::with_capacity(SIDECAR_HEADER + 8 * draws.len() * n_draws);
    bytes.extend_from_slice(SIDECAR_MAGIC);
    bytes.extend_from_slice(&super::FORMAT_MAJOR.to_le_bytes());
    bytes.extend_from_slice(&LITTLE_ENDIAN.to_le_bytes());
    bytes.extend_from_slice(&(draws.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&(n_draws as u64).to_le_bytes());
    for row in draws {
        for v in row {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    bytes
}

fn decode_draws(bytes: &[u8], path: &Path, n_params: usize, n_kept: usize) -> Result<Vec<Vec<f64>>> {
    let format = |message: String| Error::Format { path: path.to_path_buf(), message };
    if bytes.len() < SIDECAR_HEADER {
        return Err(Error::Truncated(path.to_path_buf()));
    }
    if &bytes[..8] != SIDECAR_MAGIC {
        return Err(format("not a draw sidecar".into()));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
    let major = u32_at(8);
    if major != super::FORMAT_MAJOR {
        return Err(Error::VersionMismatch { found: major.to_string(), expected: super::FORMAT_MAJOR });
    }
    if u32_at(12) != LITTLE_ENDIAN {
        return Err(format("unsupported byte order".into()));
    }
    let (rows, cols) = (u64_at(16) as usize, u64_at(24) as usize);
    if rows != n_params || cols != n_kept {
        return Err(format(format!(
            "sidecar holds {rows}x{cols} draws, summary declares {n_params}x{n_kept}"
        )));
    }
    let body = &bytes[SIDECAR_HEADER..];
    let expected = rows.checked_mul(cols).and_then(|c| c.checked_mul(8)).ok_or_else(|| format("sidecar dimensions overflow".into()))?;
    if body.len() < expected {
        return Err(Error::Truncated(path.to_path_buf()));
    }
    if body.len() > expected {
        return Err(format("trailing bytes after the draws".into()));
    }
    Ok((0..rows)
        .map(|r| {
            body[8 * cols * r..8 * cols * (r + 1)]
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect()
        })
        .collect())
}

pub fn load_summary(path: &Path) -> Result<SummaryRecord> {
    let text = read_text(path)?;
    let mut lines = Lines::new(path, &text);
    check_version(lines.first(), KIND, path)?;
    let method = lines.field("method")?.to_string();
    let n_shards = lines.usize_field("n_shards")?;
    let n_kept = lines.usize_field("n_kept")?;
    let psd = match lines.field("median_r_psd")? {
        "true" => Some(true),
        "false" => Some(false),
        "n/a" => None,
        other => return Err(lines.error(format!("median_r_psd: unexpected {other:?}"))),
    };
    let layout = ParameterLayout::new(lines.names_field("responses")?, lines.names_field("predictors")?);
    let grid = lines.reals_field("grid")?;
    let draws_field = lines.field("draws")?.to_string();

    let names = layout.parameter_names();
    let mut expected_columns = vec!["parameter".to_string(), "mean".to_string()];
    expected_columns.extend(grid.iter().map(|q| fmt_real(*q)));
    let columns = lines.next_line()?;
    if columns != expected_columns.join("\t") {
        return Err(lines.error("table header does not match the grid".into()));
    }
    let mut values = Vec::with_capacity(names.len());
    let mut means = Vec::with_capacity(names.len());
    for name in &names {
        let row = lines.next_line()?;
        if row == "end" {
            return Err(Error::Truncated(path.to_path_buf()));
        }
        let mut cells = row.split('\t');
        if cells.next() != Some(name.as_str()) {
            return Err(lines.error(format!("expected parameter {name}, found {row:?}")));
        }
        let reals: Vec<f64> = cells.map(|c| parse_real(c, path, name)).collect::<Result<_>>()?;
        if reals.len() != grid.len() + 1 {
            return Err(lines.error(format!("parameter {name} has {} values", reals.len())));
        }
        means.push(reals[0]);
        values.push(reals[1..].to_vec());
    }
    lines.expect("end")?;

    let draws = match draws_field.as_str() {
        "none" => None,
        field => {
            let file = field
                .strip_suffix(" little-endian")
                .ok_or_else(|| lines.error(format!("draws: unsupported declaration {field:?}")))?;
            let sidecar = path.with_file_name(file);
            let bytes = std::fs::read(&sidecar)
                .map_err(|e| Error::from(e).context(format!("reading {}", sidecar.display())))?;
            Some(decode_draws(&bytes, &sidecar, names.len(), n_kept)?)
        }
    };
    let quantiles = QuantileTable { layout, grid, values, means };
    let method_error = || lines.error(format!("method {method:?} does not match the header"));
    match method.as_str() {
        "chain" => {
            if n_shards != 1 || psd.is_some() {
                return Err(method_error());
            }
            Ok(SummaryRecord::Chain(PosteriorSummary { quantiles, draws, n_kept }))
        }
        other => {
            let method: CombineMethod = other.parse()?;
            let median_correlation_psd = psd.ok_or_else(method_error)?;
            Ok(SummaryRecord::Combined(CombinedPosterior {
                method,
                quantiles,
                draws,
                n_shards,
                n_kept,
                median_correlation_psd,
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combine::{cmc_combine, pie_combine};

    fn summary(with_draws: bool, offset: f64) -> PosteriorSummary {
        let layout = ParameterLayout::new(vec!["a".into(), "b".into()], vec!["x".into()]);
        let draws: Vec<Vec<f64>> = (0..3)
            .map(|p| (0..50).map(|t| offset + ((t * 7 + p * 13) % 17) as f64 / 7.0 - 0.1).collect())
            .collect();
        let quantiles = QuantileTable::from_draws(layout, &[0.025, 0.5, 0.975], &draws);
        PosteriorSummary { quantiles, draws: with_draws.then_some(draws), n_kept: 50 }
    }

    #[test]
    fn three_parameter_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.txt");
        for with_draws in [true, false] {
            let s = summary(with_draws, 0.3);
            save_summary(&s, &path).unwrap();
            assert_eq!(load_summary(&path).unwrap(), SummaryRecord::Chain(s));
            assert_eq!(sidecar_path(&path).exists(), with_draws);
        }
    }

    #[test]
    fn combined_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let shards = [summary(true, 0.0), summary(true, 1.0)];
        for c in [cmc_combine(&shards).unwrap(), pie_combine(&shards).unwrap()] {
            let path = dir.path().join(format!("{}.txt", c.method));
            save_combined(&c, &path).unwrap();
            assert_eq!(load_summary(&path).unwrap(), SummaryRecord::Combined(c));
        }
    }

    #[test]
    fn rejects_future_major_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.txt");
        save_summary(&summary(true, 0.0), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();

        std::fs::write(&path, text.replacen("mvprobit-summary 1.0", "mvprobit-summary 2.0", 1)).unwrap();
        assert_eq!(load_summary(&path).unwrap_err().kind(), "version-mismatch");

        let cut: String = text.lines().take(11).map(|l| format!("{l}\n")).collect();
        std::fs::write(&path, cut).unwrap();
        assert_eq!(load_summary(&path).unwrap_err().kind(), "truncated-file");

        std::fs::write(&path, &text).unwrap();
        let side = sidecar_path(&path);
        let bytes = std::fs::read(&side).unwrap();
        std::fs::write(&side, &bytes[..bytes.len() - 3]).unwrap();
        assert_eq!(load_summary(&path).unwrap_err().kind(), "truncated-file");
    }

    #[test]
    fn quantile_only_summary_cannot_feed_cmc() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.txt");
        save_summary(&summary(false, 0.0), &path).unwrap();
        let s = load_summary(&path).unwrap().into_chain().unwrap();
        assert_eq!(cmc_combine(&[s]).unwrap_err().kind(), "method-requires-draws");
    }

    #[test]
    fn mismatched_grid_is_a_configuration_error() {
        let a = summary(false, 0.0);
        let mut b = summary(false, 0.0);
        b.quantiles.grid[1] = 0.6;
        assert_eq!(pie_combine(&[a, b]).unwrap_err().kind(), "configuration");
    }
}
