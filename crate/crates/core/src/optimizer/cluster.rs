//! Basin identification by nearest-better clustering.
//!
//! A point with no better point within the clustering radius is a basin
//! representative; every other point attaches to its nearest better
//! neighbor, and chains of such links partition the sample into basins.
//! "Better" orders by (objective, index), so exact ties are broken
//! deterministically.

use super::{scaled_distance, EvaluatedPoint};

/// One basin: member indices into the input slice, plus the best member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    /// Index of the basin's best point.
    pub best: usize,
    /// All member indices, best included, in input order.
    pub members: Vec<usize>,
}

/// A partition of evaluated points into basins.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
    /// Clustering radius in the unit hypercube.
    pub radius: f64,
}

impl ClusterSet {
    /// Cluster id of each input point, aligned with the input slice.
    pub fn assignment(&self, n_points: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; n_points];
        for (cid, cluster) in self.clusters.iter().enumerate() {
            for &m in &cluster.members {
                out[m] = cid;
            }
        }
        out
    }
}

fn better(points: &[EvaluatedPoint], a: usize, b: usize) -> bool {
    points[a]
        .objective
        .total_cmp(&points[b].objective)
        .then(a.cmp(&b))
        .is_lt()
}

/// Partitions `points` into basins with clustering radius `d`.
pub fn cluster_basins(points: &[EvaluatedPoint], d: f64) -> ClusterSet {
    let n = points.len();
    // parent[i] = nearest better point within d, or i for basin bests.
    let mut parent = vec![0usize; n];
    for i in 0..n {
        let mut nearest: Option<(f64, usize)> = None;
        for j in 0..n {
            if j == i || !better(points, j, i) {
                continue;
            }
            let dist = scaled_distance(&points[i].scaled, &points[j].scaled);
            if dist > d {
                continue;
            }
            let replace = match nearest {
                None => true,
                Some((best_dist, best_j)) => {
                    dist < best_dist || (dist == best_dist && j < best_j)
                }
            };
            if replace {
                nearest = Some((dist, j));
            }
        }
        parent[i] = nearest.map_or(i, |(_, j)| j);
    }

    // Follow chains to the roots; chains strictly improve the objective, so
    // they terminate.
    let mut root = vec![0usize; n];
    for (i, slot) in root.iter_mut().enumerate() {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        *slot = r;
    }

    let mut roots: Vec<usize> = (0..n).filter(|&i| root[i] == i).collect();
    roots.sort_unstable();
    let mut clusters: Vec<Cluster> = roots
        .iter()
        .map(|&r| Cluster {
            best: r,
            members: Vec::new(),
        })
        .collect();
    for (i, r) in root.iter().enumerate() {
        let cid = roots.binary_search(r).unwrap();
        clusters[cid].members.push(i);
    }
    ClusterSet {
        clusters,
        radius: d,
    }
}
