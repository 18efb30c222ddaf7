//! Fixed-start open-path TSP: nearest-neighbour construction from several
//! first moves, improved by 2-opt and Or-opt until no move helps.

use serde::{Deserialize, Serialize};

use super::sequence::CostMatrix;
use crate::error::{CoreError, Result};

/// Number of different first moves tried during construction.
const STARTS: usize = 10;
const EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    /// Matrix indices (>= 1) of reachable regions, in visiting order.
    pub order: Vec<usize>,
    /// Matrix indices of regions unreachable from the start, ascending.
    pub unreachable: Vec<usize>,
    /// Open-path cost of `order` starting at index 0.
    pub cost: f64,
}

impl Tour {
    /// Full visiting sequence with unreachable regions last.
    pub fn sequence(&self) -> Vec<usize> {
        self.order.iter().chain(&self.unreachable).copied().collect()
    }
}

/// Cost of visiting `order` from index 0 without returning.
pub fn tour_cost(m: &CostMatrix, order: &[usize]) -> f64 {
    let mut prev = 0;
    let mut total = 0.0;
    for &i in order {
        total += m.get(prev, i);
        prev = i;
    }
    total
}

pub fn solve_tsp(m: &CostMatrix) -> Result<Tour> {
    if m.size() < 2 {
        return Err(CoreError::EmptyMatrix);
    }
    let (reachable, unreachable): (Vec<usize>, Vec<usize>) =
        (1..m.size()).partition(|&i| m.get(0, i).is_finite());
    if reachable.is_empty() {
        return Ok(Tour {
            order: Vec::new(),
            unreachable,
            cost: 0.0,
        });
    }
    let mut firsts = reachable.clone();
    firsts.sort_by(|&a, &b| m.get(0, a).total_cmp(&m.get(0, b)).then(a.cmp(&b)));
    firsts.truncate(STARTS);

    let mut best: Option<(f64, Vec<usize>)> = None;
    for first in firsts {
        let mut order = nearest_neighbour(m, &reachable, first);
        improve(m, &mut order);
        let cost = tour_cost(m, &order);
        if best.as_ref().is_none_or(|(c, _)| cost < c - EPS) {
            best = Some((cost, order));
        }
    }
    let (cost, order) = best.unwrap();
    Ok(Tour {
        order,
        unreachable,
        cost,
    })
}

fn nearest_neighbour(m: &CostMatrix, nodes: &[usize], first: usize) -> Vec<usize> {
    let mut left: Vec<usize> = nodes.iter().copied().filter(|&i| i != first).collect();
    let mut order = vec![first];
    while !left.is_empty() {
        let cur = *order.last().unwrap();
        let (k, _) = left
            .iter()
            .enumerate()
            .min_by(|(_, &a), (_, &b)| m.get(cur, a).total_cmp(&m.get(cur, b)).then(a.cmp(&b)))
            .unwrap();
        order.push(left.remove(k));
    }
    order
}

/// Best-improvement local search over 2-opt and Or-opt moves.
fn improve(m: &CostMatrix, order: &mut Vec<usize>) {
    loop {
        let base = tour_cost(m, order);
        let mut best_delta = -EPS;
        let mut best_move: Option<Vec<usize>> = None;
        if let Some((delta, i, j)) = best_two_opt(m, order) {
            if delta < best_delta {
                best_delta = delta;
                let mut next = order.clone();
                next[i..=j].reverse();
                best_move = Some(next);
            }
        }
        if let Some((delta, next)) = best_or_opt(m, order, base) {
            if delta < best_delta {
                best_move = Some(next);
            }
        }
        match best_move {
            Some(next) => *order = next,
            None => return,
        }
    }
}

/// Best segment reversal `order[i..=j]`, as (delta, i, j).
fn best_two_opt(m: &CostMatrix, order: &[usize]) -> Option<(f64, usize, usize)> {
    let n = order.len();
    let at = |k: usize| if k == 0 { 0 } else { order[k - 1] };
    let mut best: Option<(f64, usize, usize)> = None;
    // positions in the path including the start: p[0] = 0, p[k] = order[k-1]
    for i in 1..n {
        for j in (i + 1)..=n {
            let (a, b, c) = (at(i - 1), at(i), at(j));
            let mut delta = m.get(a, c) - m.get(a, b);
            if j < n {
                let d = at(j + 1);
                delta += m.get(b, d) - m.get(c, d);
            }
            if best.is_none_or(|(bd, _, _)| delta < bd) {
                best = Some((delta, i - 1, j - 1));
            }
        }
    }
    best
}

/// Best relocation of a segment of 1 to 3 regions, optionally reversed.
fn best_or_opt(m: &CostMatrix, order: &[usize], base: f64) -> Option<(f64, Vec<usize>)> {
    let n = order.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for len in 1..=3.min(n.saturating_sub(1)) {
        for start in 0..=(n - len) {
            let segment = &order[start..start + len];
            let mut rest: Vec<usize> = order[..start].to_vec();
            rest.extend_from_slice(&order[start + len..]);
            for pos in 0..=rest.len() {
                if pos == start {
                    continue;
                }
                for reversed in [false, true] {
                    if reversed && len == 1 {
                        continue;
                    }
                    let mut next = Vec::with_capacity(n);
                    next.extend_from_slice(&rest[..pos]);
                    if reversed {
                        next.extend(segment.iter().rev());
                    } else {
                        next.extend_from_slice(segment);
                    }
                    next.extend_from_slice(&rest[pos..]);
                    let delta = tour_cost(m, &next) - base;
                    if best.as_ref().is_none_or(|(bd, _)| delta < *bd) {
                        best = Some((delta, next));
                    }
                }
            }
        }
    }
    best
}
