//! Pareto dominance, the nondominated archive and hypervolume.
//!
//! All objectives are minimized. Hypervolume uses the WFG recursion on
//! exclusive contributions with a sweep-line base case for two objectives.

use serde::{Deserialize, Serialize};

use crate::space::Location;

/// `a` dominates `b`: no worse in every objective and strictly better in one.
///
/// # Panics
///
/// If `a` and `b` differ in length.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    assert_eq!(a.len(), b.len(), "outcomes differ in objective count");
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        strict |= x < y;
    }
    strict
}

/// `a` is no worse than `b` in every objective.
pub fn weakly_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Nondominated subset, keeping the first of any group of equal points.
pub fn nondominated(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        if out.iter().any(|q| weakly_dominates(q, p)) {
            continue;
        }
        out.retain(|q| !dominates(p, q));
        out.push(p.clone());
    }
    out
}

/// Points strictly inside the reference box, i.e. with a positive box volume.
fn inside(points: &[Vec<f64>], r: &[f64]) -> Vec<Vec<f64>> {
    points
        .iter()
        .filter(|p| p.iter().zip(r).all(|(x, rr)| x < rr))
        .cloned()
        .collect()
}

/// Volume dominated by `front` and bounded by `r`.
///
/// Points outside the reference box contribute nothing; dominated points are
/// filtered before the recursion.
pub fn hypervolume(front: &[Vec<f64>], r: &[f64]) -> f64 {
    if front.is_empty() {
        return 0.0;
    }
    let pts = nondominated(&inside(front, r));
    wfg(pts, r)
}

/// Hypervolume gained by adding `candidate` to `front`. Zero when the
/// candidate is weakly dominated or lies outside the reference box.
pub fn hvi(front: &[Vec<f64>], r: &[f64], candidate: &[f64]) -> f64 {
    if !candidate.iter().zip(r).all(|(x, rr)| x < rr) {
        return 0.0;
    }
    let pts = inside(front, r);
    if pts.iter().any(|p| weakly_dominates(p, candidate)) {
        return 0.0;
    }
    exclusive(candidate, &pts, r).max(0.0)
}

fn box_volume(p: &[f64], r: &[f64]) -> f64 {
    p.iter().zip(r).map(|(x, rr)| rr - x).product()
}

/// Volume dominated by `p` but by none of `others`.
fn exclusive(p: &[f64], others: &[Vec<f64>], r: &[f64]) -> f64 {
    let limited: Vec<Vec<f64>> = others
        .iter()
        .map(|q| q.iter().zip(p).map(|(a, b)| a.max(*b)).collect())
        .collect();
    box_volume(p, r) - wfg(nondominated(&limited), r)
}

/// WFG on a mutually nondominated set strictly inside the box.
fn wfg(mut pts: Vec<Vec<f64>>, r: &[f64]) -> f64 {
    match (pts.len(), r.len()) {
        (0, _) => 0.0,
        (1, _) => box_volume(&pts[0], r),
        (_, 1) => r[0] - pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min),
        (_, 2) => sweep_2d(pts, r),
        _ => {
            let last = r.len() - 1;
            pts.sort_by(|a, b| b[last].total_cmp(&a[last]));
            (0..pts.len())
                .map(|i| exclusive(&pts[i], &pts[i + 1..], r))
                .sum()
        }
    }
}

fn sweep_2d(mut pts: Vec<Vec<f64>>, r: &[f64]) -> f64 {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut volume = 0.0;
    let mut ceiling = r[1];
    for p in &pts {
        if p[1] < ceiling {
            volume += (r[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    volume
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub location: Location,
    pub outcome: Vec<f64>,
    pub source: usize,
}

/// Mutually nondominated set of observed outcomes with a fixed reference point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
    reference: Vec<f64>,
}

impl ParetoArchive {
    pub fn new(reference: Vec<f64>) -> Self {
        ParetoArchive {
            entries: Vec::new(),
            reference,
        }
    }

    /// Adds the outcome unless an existing entry weakly dominates it, and
    /// drops every entry it dominates. Returns whether it was accepted.
    pub fn insert(&mut self, location: Location, outcome: Vec<f64>, source: usize) -> bool {
        assert_eq!(outcome.len(), self.reference.len(), "outcome arity");
        if outcome.iter().any(|v| !v.is_finite())
            || self.entries.iter().any(|e| weakly_dominates(&e.outcome, &outcome))
        {
            return false;
        }
        self.entries.retain(|e| !dominates(&outcome, &e.outcome));
        self.entries.push(ArchiveEntry {
            location,
            outcome,
            source,
        });
        true
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn front(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|e| e.outcome.clone()).collect()
    }

    pub fn hypervolume(&self) -> f64 {
        hypervolume(&self.front(), &self.reference)
    }
}
