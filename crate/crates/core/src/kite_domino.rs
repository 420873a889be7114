//! Kite–domino tiles derived from a pinwheel patch.
//!
//! Two unit triangles that share their whole hypotenuse form either a
//! 1×2 rectangle (a domino: the second triangle is the first one turned by
//! a half turn about the hypotenuse midpoint) or a kite with sides 1, 1, 2, 2
//! (the second is the mirror image of the first across the hypotenuse).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::exact::{orientation, ExactPoint};
use crate::substitution::{Patch, PlacedTriangle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairKind {
    Kite,
    Domino,
}

impl PairKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PairKind::Kite => "kite",
            PairKind::Domino => "domino",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TilePair {
    pub first: usize,
    pub second: usize,
    pub kind: PairKind,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchReport {
    pub pairs: Vec<TilePair>,
    /// Unpaired tiles whose hypotenuse lies on the patch boundary.
    pub boundary_unmatched: Vec<usize>,
    /// Unpaired tiles whose hypotenuse does not lie on the boundary.
    pub interior_unmatched: Vec<usize>,
    pub kite_count: usize,
    pub domino_count: usize,
}

impl MatchReport {
    pub fn unmatched(&self) -> usize {
        self.boundary_unmatched.len() + self.interior_unmatched.len()
    }
}

pub fn classify_pair(t1: &PlacedTriangle, t2: &PlacedTriangle) -> Result<PairKind> {
    if t1 == t2 {
        return Err(Error::Corruption("a tile cannot pair with itself".into()));
    }
    let (s, l) = (t1.s(), t1.l());
    if t2.s() == s && t2.l() == l && t2.r() != t1.r() {
        // Equal distances to two distinct points fix r2 up to the mirror
        // across the line through them.
        let d = |a: &ExactPoint, b: &ExactPoint| (a - b).norm_sq();
        if d(t2.r(), s) == d(t1.r(), s) && d(t2.r(), l) == d(t1.r(), l) {
            return Ok(PairKind::Kite);
        }
    }
    if t2.s() == l && t2.l() == s && t2.r() == &(&(s + l) - t1.r()) {
        return Ok(PairKind::Domino);
    }
    Err(Error::Corruption(format!(
        "tiles ({}, {}, {}) and ({}, {}, {}) are neither kite nor domino",
        t1.r(),
        t1.s(),
        t1.l(),
        t2.r(),
        t2.s(),
        t2.l()
    )))
}

fn hypotenuse_key(t: &PlacedTriangle) -> (ExactPoint, ExactPoint) {
    let (a, b) = (t.s().clone(), t.l().clone());
    if a.to_string() <= b.to_string() {
        (a, b)
    } else {
        (b, a)
    }
}

fn on_outline(outline: &PlacedTriangle, a: &ExactPoint, b: &ExactPoint) -> bool {
    let v = outline.vertices();
    (0..3).any(|i| {
        let (p, q) = (v[i], v[(i + 1) % 3]);
        orientation(p, q, a) == 0 && orientation(p, q, b) == 0
    })
}

/// Matches tiles across shared hypotenuses.
pub fn pair_tiles(patch: &Patch) -> Result<MatchReport> {
    let tiles = patch.tiles();
    let mut by_hyp: HashMap<(ExactPoint, ExactPoint), Vec<usize>> = HashMap::new();
    for (i, t) in tiles.iter().enumerate() {
        by_hyp.entry(hypotenuse_key(t)).or_default().push(i);
    }
    let mut report = MatchReport::default();
    let mut groups: Vec<_> = by_hyp.into_iter().collect();
    groups.sort_by_key(|(_, idx)| idx[0]);
    for ((a, b), idx) in groups {
        match idx.as_slice() {
            [i] => {
                if on_outline(patch.outline(), &a, &b) {
                    report.boundary_unmatched.push(*i);
                } else {
                    report.interior_unmatched.push(*i);
                }
            }
            [i, j] => {
                let kind = classify_pair(&tiles[*i], &tiles[*j])?;
                match kind {
                    PairKind::Kite => report.kite_count += 1,
                    PairKind::Domino => report.domino_count += 1,
                }
                report.pairs.push(TilePair { first: *i, second: *j, kind });
            }
            _ => {
                return Err(Error::Corruption(format!(
                    "hypotenuse {a} - {b} shared by {} tiles",
                    idx.len()
                )))
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KdStats {
    pub depth: u32,
    pub kite_fraction: f64,
    pub domino_fraction: f64,
    pub pairs: usize,
}

/// Kite and domino fractions over matched pairs.
pub fn kd_stats(depth: u32, report: &MatchReport) -> KdStats {
    let n = report.pairs.len();
    let (kf, df) = if n == 0 {
        (0.0, 0.0)
    } else {
        (report.kite_count as f64 / n as f64, report.domino_count as f64 / n as f64)
    };
    KdStats { depth, kite_fraction: kf, domino_fraction: df, pairs: n }
}

/// [`kd_stats`] for each requested depth.
pub fn kd_series(depths: &[u32]) -> Result<Vec<KdStats>> {
    depths
        .iter()
        .map(|&d| {
            let patch = crate::substitution::generate_patch(d)?;
            Ok(kd_stats(d, &pair_tiles(&patch)?))
        })
        .collect()
}
