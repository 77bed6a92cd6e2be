//! Tab-separated report tables, each preceded by a version line.

use std::fmt::Write as _;

use super::{fmt_real, version_line};
use crate::sim::{BenchmarkRow, Dendrogram, MetricReport, ScreenRow, ShardSpec};

const METRIC_COLUMNS: &str = "n_replicates\tmse\tmse_se\tcoverage\tcoverage_se\tmae\tmae_se\tmean_ci_width\twidth_se";

fn metric_cells(r: &MetricReport) -> String {
    let reals = [r.mse, r.mse_se, r.coverage, r.coverage_se, r.mae, r.mae_se, r.mean_ci_width, r.width_se];
    let mut out = r.n_replicates.to_string();
    for v in reals {
        out.push('\t');
        out.push_str(&fmt_real(v));
    }
    out
}

pub fn metrics_table(report: &MetricReport) -> String {
    format!("{}\n{METRIC_COLUMNS}\n{}\n", version_line("mvprobit-metrics"), metric_cells(report))
}

pub fn benchmark_table(rows: &[BenchmarkRow]) -> String {
    let mut out = format!("{}\nn\tshard_spec\tn_shards\tmethod\t{METRIC_COLUMNS}\n", version_line("mvprobit-benchmark"));
    for row in rows {
        let spec = match row.shards {
            ShardSpec::Count(s) => format!("count={s}"),
            ShardSpec::Size(s) => format!("size={s}"),
        };
        let _ = writeln!(out, "{}\t{spec}\t{}\t{}\t{}", row.n, row.n_shards, row.method, metric_cells(&row.report));
    }
    out
}

pub fn dendrogram_text(tree: &Dendrogram) -> String {
    format!("{}\n{}", version_line("mvprobit-dendrogram"), tree.to_text())
}

pub fn screen_table_text(predictor: &str, rows: &[ScreenRow]) -> String {
    let mut out = format!(
        "{}\npredictor: {predictor}\nresponse\tmedian\tlower\tupper\texcludes_zero\n",
        version_line("mvprobit-screen")
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.response,
            fmt_real(r.median),
            fmt_real(r.lower),
            fmt_real(r.upper),
            r.excludes_zero
        );
    }
    out
}
