//! Shard plan files: header fields, then the shard id of every row.

use std::path::Path;

use super::{check_version, join_reals, read_text, version_line, write_text, Lines};
use crate::error::Result;
use crate::shard::ShardPlan;

const KIND: &str = "mvprobit-plan";

pub(crate) fn plan_text(plan: &ShardPlan) -> String {
    let mut out = String::with_capacity(16 * plan.n_rows());
    out.push_str(&version_line(KIND));
    out.push('\n');
    out.push_str(&format!("n_rows: {}\n", plan.n_rows()));
    out.push_str(&format!("n_shards: {}\n", plan.n_shards()));
    out.push_str(&format!("seed: {}\n", plan.seed));
    let sizes: Vec<String> = plan.shard_sizes.iter().map(usize::to_string).collect();
    out.push_str(&format!("sizes: {}\n", sizes.join(",")));
    out.push_str(&format!("epsilons: {}\n", join_reals(&plan.epsilons)));
    out.push_str("assignments:\n");
    for a in &plan.assignments {
        out.push_str(&a.to_string());
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

pub fn save_plan(plan: &ShardPlan, path: &Path) -> Result<()> {
    write_text(path, &plan_text(plan))
}

/// Reads a plan and checks its partition invariants.
pub fn load_plan(path: &Path) -> Result<ShardPlan> {
    let text = read_text(path)?;
    let mut lines = Lines::new(path, &text);
    check_version(lines.first(), KIND, path)?;
    let n_rows = lines.usize_field("n_rows")?;
    let n_shards = lines.usize_field("n_shards")?;
    let seed_text = lines.field("seed")?;
    let seed = seed_text.parse().map_err(|_| lines.error(format!("seed: {seed_text:?}")))?;
    let sizes_text = lines.field("sizes")?;
    let shard_sizes = sizes_text
        .split(',')
        .map(|s| s.parse::<usize>().map_err(|_| lines.error(format!("sizes: {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let epsilons = lines.reals_field("epsilons")?;
    lines.expect("assignments:")?;
    let mut assignments = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let line = lines.next_line()?;
        if line == "end" {
            return Err(crate::error::Error::Truncated(path.to_path_buf()));
        }
        assignments.push(line.parse().map_err(|_| lines.error(format!("assignment {line:?}")))?);
    }
    lines.expect("end")?;
    let plan = ShardPlan { assignments, shard_sizes, epsilons, seed };
    if plan.n_shards() != n_shards {
        return Err(lines.error(format!("{n_shards} shards declared, {} sizes listed", plan.n_shards())));
    }
    plan.validate().map_err(|e| e.context(path.display().to_string()))?;
    Ok(plan)
}
