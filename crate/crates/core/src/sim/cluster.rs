use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Linkage {
    Average,
    Complete,
}

/// One agglomeration step. Leaves are nodes `0..n`; the cluster created
/// by merge `i` is node `n + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dendrogram {
    pub labels: Vec<String>,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Leaf labels in the left-to-right order of the drawn tree.
    pub fn leaf_order(&self) -> Vec<usize> {
        let n = self.labels.len();
        if self.merges.is_empty() {
            return (0..n).collect();
        }
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![n + self.merges.len() - 1];
        while let Some(node) = stack.pop() {
            if node < n {
                order.push(node);
            } else {
                let m = &self.merges[node - n];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
        order
    }

    /// Leaves under `node`.
    pub fn members(&self, node: usize) -> Vec<usize> {
        let n = self.labels.len();
        if node < n {
            return vec![node];
        }
        let m = &self.merges[node - n];
        let mut out = self.members(m.left);
        out.extend(self.members(m.right));
        out.sort_unstable();
        out
    }

    /// Tab-separated merge table followed by the leaf order, ready for plotting.
    pub fn to_text(&self) -> String {
        let mut out = String::from("step\tleft\tright\theight\tsize\n");
        for (i, m) in self.merges.iter().enumerate() {
            let _ = writeln!(out, "{i}\t{}\t{}\t{:.16e}\t{}", self.node_label(m.left), self.node_label(m.right), m.height, m.size);
        }
        out.push_str("leaf_order");
        for leaf in self.leaf_order() {
            out.push('\t');
            out.push_str(&self.labels[leaf]);
        }
        out.push('\n');
        out
    }

    fn node_label(&self, node: usize) -> String {
        let n = self.labels.len();
        if node < n {
            self.labels[node].clone()
        } else {
            format!("#{}", node - n)
        }
    }
}

/// Agglomerative clustering of the responses with distance `1 - r_ij`.
///
/// Ties between equally close pairs go to the pair with the smallest
/// indices, so the tree is deterministic.
pub fn correlation_distance_clustering(
    r_hat: &DMatrix<f64>,
    labels: &[String],
    linkage: Linkage,
) -> Result<Dendrogram> {
    let n = r_hat.nrows();
    if r_hat.ncols() != n || labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "correlation matrix is {}x{} with {} labels",
            n,
            r_hat.ncols(),
            labels.len()
        )));
    }
    for i in 0..n {
        if (r_hat[(i, i)] - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("diagonal entry {i} is not 1")));
        }
        for j in i + 1..n {
            if (r_hat[(i, j)] - r_hat[(j, i)]).abs() > 1e-9 {
                return Err(Error::NotSymmetric(format!("entries ({i},{j}) and ({j},{i}) differ")));
            }
        }
    }

    // Active clusters: node id, size, and distances to every other active cluster.
    let mut nodes: Vec<usize> = (0..n).collect();
    let mut sizes: Vec<usize> = vec![1; n];
    let mut dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 1.0 - r_hat[(i, j)]).collect())
        .collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    while nodes.len() > 1 {
        let k = nodes.len();
        let (mut bi, mut bj) = (0, 1);
        for i in 0..k {
            for j in i + 1..k {
                if dist[i][j] < dist[bi][bj] {
                    bi = i;
                    bj = j;
                }
            }
        }
        let height = dist[bi][bj];
        let (si, sj) = (sizes[bi], sizes[bj]);
        let merged: Vec<f64> = (0..k)
            .map(|o| match linkage {
                Linkage::Average => (si as f64 * dist[bi][o] + sj as f64 * dist[bj][o]) / (si + sj) as f64,
                Linkage::Complete => dist[bi][o].max(dist[bj][o]),
            })
            .collect();
        let (a, b) = (nodes[bi], nodes[bj]);
        merges.push(Merge {
            left: a.min(b),
            right: a.max(b),
            height,
            size: si + sj,
        });
        // Reuse slot bi for the new cluster and drop slot bj.
        for o in 0..k {
            dist[bi][o] = merged[o];
            dist[o][bi] = merged[o];
        }
        dist[bi][bi] = 0.0;
        nodes[bi] = n + merges.len() - 1;
        sizes[bi] = si + sj;
        nodes.remove(bj);
        sizes.remove(bj);
        dist.remove(bj);
        for row in dist.iter_mut() {
            row.remove(bj);
        }
    }
    Ok(Dendrogram {
        labels: labels.to_vec(),
        merges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn identity_is_equidistant() {
        let d = correlation_distance_clustering(&DMatrix::identity(4, 4), &labels(4), Linkage::Average).unwrap();
        assert_eq!(d.merges.len(), 3);
        assert!(d.merges.iter().all(|m| (m.height - 1.0).abs() < 1e-15));
    }

    #[test]
    fn nearest_pair_first() {
        let r = dmatrix![1.0, 0.8, 0.1; 0.8, 1.0, 0.3; 0.1, 0.3, 1.0];
        let d = correlation_distance_clustering(&r, &labels(3), Linkage::Average).unwrap();
        assert_eq!((d.merges[0].left, d.merges[0].right), (0, 1));
        assert!((d.merges[0].height - 0.2).abs() < 1e-12);
        // Average of 0.9 and 0.7.
        assert!((d.merges[1].height - 0.8).abs() < 1e-12);
        let c = correlation_distance_clustering(&r, &labels(3), Linkage::Complete).unwrap();
        assert!((c.merges[1].height - 0.9).abs() < 1e-12);
    }

    #[test]
    fn blocks_merge_before_crossing() {
        let n = 6;
        let r = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else if (i < 3) == (j < 3) { 0.9 } else { 0.0 });
        let d = correlation_distance_clustering(&r, &labels(n), Linkage::Average).unwrap();
        for m in &d.merges[..4] {
            let members = d.members(m.left).into_iter().chain(d.members(m.right));
            let sides: Vec<bool> = members.map(|i| i < 3).collect();
            assert!(sides.iter().all(|s| *s == sides[0]));
        }
        assert!((d.merges[4].height - 1.0).abs() < 1e-12);
        assert!(d.merges.windows(2).all(|w| w[0].height <= w[1].height));
        assert_eq!(d.leaf_order().len(), n);
        assert!(d.to_text().starts_with("step\tleft"));
    }

    #[test]
    fn rejects_asymmetric() {
        let r = dmatrix![1.0, 0.5; 0.4, 1.0];
        assert_eq!(
            correlation_distance_clustering(&r, &labels(2), Linkage::Average).unwrap_err().kind(),
            "not-symmetric"
        );
    }
}
