//! Nondominated sorting, crowding distance and the crowded-comparison operator.

use std::cmp::Ordering;

use rand::Rng;

use crate::{Nsga2Error, ObjectiveVector};

/// Pareto dominance for minimization: `a` is no worse in every objective and
/// strictly better in at least one.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<bool, Nsga2Error> {
    if a.len() != b.len() {
        return Err(Nsga2Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(dominates_slice(a.values(), b.values()))
}

pub(crate) fn dominates_slice(a: &[f64], b: &[f64]) -> bool {
    let mut strictly_better = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly_better = true;
        }
    }
    strictly_better
}

/// Ordered nondomination layers. Layer `l` (0-based) holds rank `l + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParetoFront {
    layers: Vec<Vec<usize>>,
}

impl ParetoFront {
    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<Vec<usize>> {
        self.layers
    }

    /// First (nondominated) layer; empty for an empty population.
    pub fn first(&self) -> &[usize] {
        self.layers.first().map(Vec::as_slice).unwrap_or(&[])
    }

    /// 1-based rank of every member, indexed like the sorted population.
    pub fn ranks(&self) -> Vec<usize> {
        let n = self.layers.iter().map(Vec::len).sum();
        let mut ranks = vec![0; n];
        for (l, layer) in self.layers.iter().enumerate() {
            for &i in layer {
                ranks[i] = l + 1;
            }
        }
        ranks
    }
}

/// Deb's fast nondominated sort: domination counters plus dominated sets,
/// then layer peeling. Indices refer to positions in `objectives`.
pub fn fast_nondominated_sort(objectives: &[ObjectiveVector]) -> Result<ParetoFront, Nsga2Error> {
    let n = objectives.len();
    if let Some(first) = objectives.first() {
        if let Some(bad) = objectives.iter().find(|o| o.len() != first.len()) {
            return Err(Nsga2Error::LengthMismatch(first.len(), bad.len()));
        }
    }

    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counter = vec![0usize; n];
    let mut current = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if dominates_slice(objectives[i].values(), objectives[j].values()) {
                dominated_by[i].push(j);
            } else if dominates_slice(objectives[j].values(), objectives[i].values()) {
                counter[i] += 1;
            }
        }
        if counter[i] == 0 {
            current.push(i);
        }
    }

    let mut layers = Vec::new();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                counter[j] -= 1;
                if counter[j] == 0 {
                    next.push(j);
                }
            }
        }
        layers.push(std::mem::replace(&mut current, next));
    }
    Ok(ParetoFront { layers })
}

/// Crowding distance of each member of one front.
///
/// Boundary members of every objective get `+inf`. An objective whose values
/// are all equal contributes nothing.
pub fn crowding_distance(front: &[&ObjectiveVector]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let mut distance = vec![0.0; n];
    let objectives = front[0].len();
    let mut order: Vec<usize> = (0..n).collect();
    for m in 0..objectives {
        order.sort_by(|&a, &b| {
            front[a].0[m]
                .total_cmp(&front[b].0[m])
                .then(a.cmp(&b))
        });
        let lo = front[order[0]].0[m];
        let hi = front[order[n - 1]].0[m];
        let range = hi - lo;
        if !(range > 0.0) || !range.is_finite() {
            continue;
        }
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        for k in 1..n - 1 {
            let i = order[k];
            if distance[i].is_finite() {
                distance[i] += (front[order[k + 1]].0[m] - front[order[k - 1]].0[m]) / range;
            }
        }
    }
    distance
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    First,
    Second,
}

/// Crowded comparison: lower rank wins; within a rank the larger crowding
/// distance wins. Exact ties are settled by a coin drawn from `rng`.
pub fn crowded_compare<R: Rng + ?Sized>(
    a: (usize, f64),
    b: (usize, f64),
    rng: &mut R,
) -> Winner {
    let by_rank = a.0.cmp(&b.0);
    let ord = if by_rank != Ordering::Equal {
        by_rank.reverse()
    } else {
        a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal)
    };
    match ord {
        Ordering::Greater => Winner::First,
        Ordering::Less => Winner::Second,
        Ordering::Equal => {
            if rng.gen_bool(0.5) {
                Winner::First
            } else {
                Winner::Second
            }
        }
    }
}
