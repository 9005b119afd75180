//! Best allocation with at most one agent per project.
//!
//! Edge weights are `max{f_j({i}) − c_ij, 0}`, which is exactly the revenue of
//! project `j` when `i` is its only agent, so a maximum-weight matching is the
//! revenue-optimal single-agent allocation.

use crate::instance::{Allocation, Instance};

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedBipartiteGraph {
    /// `weights[i][j]` for agent `i`, project `j`; all entries are ≥ 0.
    weights: Vec<Vec<f64>>,
    n_projects: usize,
}

impl WeightedBipartiteGraph {
    /// Negative entries are clamped to zero.
    pub fn new(weights: Vec<Vec<f64>>, n_projects: usize) -> Self {
        let weights = weights
            .into_iter()
            .map(|row| row.into_iter().map(|w| w.max(0.0)).collect())
            .collect();
        WeightedBipartiteGraph { weights, n_projects }
    }

    pub fn weight(&self, agent: usize, project: usize) -> f64 {
        self.weights[agent][project]
    }

    pub fn n_agents(&self) -> usize {
        self.weights.len()
    }

    pub fn n_projects(&self) -> usize {
        self.n_projects
    }

    /// Total weight of the edges used by `alloc`.
    pub fn total(&self, alloc: &Allocation) -> f64 {
        alloc
            .assignment()
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|j| self.weights[i][j]))
            .sum()
    }
}

pub fn build_graph(inst: &Instance) -> WeightedBipartiteGraph {
    let weights = (0..inst.n_agents())
        .map(|i| {
            (0..inst.n_projects())
                .map(|j| (inst.singleton(j, i) - inst.cost(i, j)).max(0.0))
                .collect()
        })
        .collect();
    WeightedBipartiteGraph::new(weights, inst.n_projects())
}

/// Minimum-cost perfect assignment on a square matrix (rows to columns).
/// Returns `col_of_row`.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let k = cost.len();
    if k == 0 {
        return Vec::new();
    }
    // 1-based potentials; column 0 is the virtual root.
    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut row_of_col = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for row in 1..=k {
        row_of_col[0] = row;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of_row = vec![0usize; k];
    for j in 1..=k {
        if row_of_col[j] > 0 {
            col_of_row[row_of_col[j] - 1] = j - 1;
        }
    }
    col_of_row
}

/// Maximum-weight matching between `rows` and `cols` of `w`; returns
/// `(agent, project)` pairs with positive weight and their total.
fn best_matching(w: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> (Vec<(usize, usize)>, f64) {
    let k = rows.len().max(cols.len());
    if rows.is_empty() || cols.is_empty() {
        return (Vec::new(), 0.0);
    }
    let cost: Vec<Vec<f64>> = (0..k)
        .map(|r| {
            (0..k)
                .map(|c| match (rows.get(r), cols.get(c)) {
                    (Some(&i), Some(&j)) => -w[i][j],
                    _ => 0.0,
                })
                .collect()
        })
        .collect();
    let assign = hungarian(&cost);
    let mut pairs = Vec::new();
    let mut total = 0.0;
    for (r, &c) in assign.iter().enumerate() {
        if let (Some(&i), Some(&j)) = (rows.get(r), cols.get(c)) {
            if w[i][j] > 0.0 {
                pairs.push((i, j));
                total += w[i][j];
            }
        }
    }
    (pairs, total)
}

/// Maximum-weight matching as an allocation with at most one agent per project.
///
/// Zero-weight edges are never used. Among optimal matchings the
/// lexicographically smallest assignment vector is returned, ordering
/// "unassigned" before every project index.
pub fn max_weight_matching(g: &WeightedBipartiteGraph) -> Allocation {
    let n = g.n_agents();
    let m = g.n_projects();
    let w = &g.weights;
    let all_rows: Vec<usize> = (0..n).collect();
    let all_cols: Vec<usize> = (0..m).collect();
    let (_, best) = best_matching(w, &all_rows, &all_cols);
    let tol = 1e-12 * best.max(1.0);

    let mut alloc = Allocation::empty(n);
    let mut used = vec![false; m];
    let mut fixed = 0.0;
    for i in 0..n {
        let rest: Vec<usize> = (i + 1..n).collect();
        let mut options: Vec<Option<usize>> = vec![None];
        options.extend((0..m).filter(|&j| !used[j] && w[i][j] > 0.0).map(Some));
        for opt in options {
            let gain = opt.map_or(0.0, |j| w[i][j]);
            let cols: Vec<usize> = (0..m).filter(|&j| !used[j] && Some(j) != opt).collect();
            let (_, tail) = best_matching(w, &rest, &cols);
            if fixed + gain + tail >= best - tol {
                if let Some(j) = opt {
                    used[j] = true;
                    alloc.assign(i, Some(j));
                }
                fixed += gain;
                break;
            }
        }
    }
    alloc
}
