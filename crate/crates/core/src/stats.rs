//! Control points, exact pair-distance histograms and shell frequencies.
//!
//! Pair counting embeds all points into a common integer grid (scale
//! `2^a 5^b`), runs a cell-list search with `i128` squared distances and
//! converts each distinct squared distance back into a [`DistanceKey`].
//! Partial histograms from worker threads are merged by exact key, so the
//! result does not depend on scheduling.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_rational::Rational64;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{
    orientation, rotation_membership, DistanceKey, ExactPoint, ExactScalar,
};
use crate::lattice::r2;
use crate::substitution::{control_point, Patch};

/// Default erosion margin of the sampling window.
pub const DEFAULT_MARGIN: i64 = 3;

/// One control point per tile, in tile order.
pub fn control_points(patch: &Patch) -> Result<Vec<ExactPoint>> {
    let pts: Vec<ExactPoint> =
        patch.tiles().par_iter().map(control_point).collect::<Result<_>>()?;
    let mut seen = HashSet::with_capacity(pts.len());
    for p in &pts {
        if !seen.insert(p) {
            return Err(Error::Corruption(format!("duplicate control point {p}")));
        }
    }
    Ok(pts)
}

/// The triangular region a patch covers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    vertices: [ExactPoint; 3],
    sign: i8,
}

impl Region {
    pub fn triangle(a: ExactPoint, b: ExactPoint, c: ExactPoint) -> Result<Self> {
        let sign = orientation(&a, &b, &c);
        if sign == 0 {
            return Err(Error::DegenerateTriangle);
        }
        Ok(Region { vertices: [a, b, c], sign })
    }

    pub fn of_patch(patch: &Patch) -> Self {
        let t = patch.outline();
        Self::triangle(t.r().clone(), t.s().clone(), t.l().clone()).expect("outline is a triangle")
    }

    pub fn area(&self) -> ExactScalar {
        let [a, b, c] = &self.vertices;
        (b - a).cross(&(c - a)).abs().div_pow2(1)
    }

    fn edges(&self) -> impl Iterator<Item = (&ExactPoint, &ExactPoint)> {
        (0..3).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % 3]))
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| (b - a).norm_sq().to_f64().sqrt()).sum()
    }

    pub fn inradius(&self) -> f64 {
        2.0 * self.area().to_f64() / self.perimeter()
    }

    /// True when `p` is inside the region at distance at least `margin`
    /// from every edge, decided exactly.
    pub fn contains_eroded(&self, p: &ExactPoint, margin: &ExactScalar) -> bool {
        let m2 = margin * margin;
        self.edges().all(|(a, b)| {
            let e = b - a;
            let c = e.cross(&(p - a));
            let c = if self.sign < 0 { -c } else { c };
            c.signum() >= 0 && &c * &c >= &m2 * &e.norm_sq()
        })
    }
}

/// Which points may serve as the first point `x` of a pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Window {
    Full,
    Eroded { margin: ExactScalar },
}

impl Window {
    pub fn eroded(margin: i64) -> Self {
        Window::Eroded { margin: ExactScalar::from_int(margin) }
    }

    /// Window area: exact region area, or the inner parallel triangle at
    /// distance `margin`, which is similar with ratio `(rho - m) / rho`.
    pub fn area(&self, region: &Region) -> Result<f64> {
        let full = region.area().to_f64();
        match self {
            Window::Full => Ok(full),
            Window::Eroded { margin } => {
                let m = margin.to_f64();
                if m < 0.0 {
                    return Err(Error::InvalidInput("negative erosion margin".into()));
                }
                let rho = region.inradius();
                if m >= rho {
                    return Err(Error::EmptyWindow(format!("margin {m} >= inradius {rho}")));
                }
                Ok(full * ((rho - m) / rho).powi(2))
            }
        }
    }

    fn admits(&self, region: &Region, p: &ExactPoint) -> bool {
        match self {
            Window::Full => true,
            Window::Eroded { margin } => region.contains_eroded(p, margin),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Window::Full => "full".into(),
            Window::Eroded { margin } => format!("eroded(margin={})", margin.to_f64()),
        }
    }
}

/// Ordered-pair counts by exact squared distance.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceHistogram {
    pub entries: BTreeMap<DistanceKey, u64>,
    pub window_area: f64,
    /// Points inside the window.
    pub point_count: usize,
    pub r_max_sq: DistanceKey,
}

impl DistanceHistogram {
    pub fn count(&self, key: &DistanceKey) -> u64 {
        self.entries.get(key).copied().unwrap_or(0)
    }

    pub fn total_pairs(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn density(&self) -> f64 {
        self.point_count as f64 / self.window_area
    }
}

struct Embedded {
    coords: Vec<(i64, i64)>,
    two: u32,
    five: u32,
}

fn embed(points: &[ExactPoint]) -> Result<Embedded> {
    let (two, five) = points
        .iter()
        .map(ExactPoint::denominator_exps)
        .fold((0, 0), |(a, b), (c, d)| (a.max(c), b.max(d)));
    let coords = points
        .iter()
        .map(|p| {
            let x = p.x.scaled_numerator(two, five).to_i64();
            let y = p.y.scaled_numerator(two, five).to_i64();
            match (x, y) {
                (Some(x), Some(y)) if x.unsigned_abs() < 1 << 62 && y.unsigned_abs() < 1 << 62 => {
                    Ok((x, y))
                }
                _ => Err(Error::Guard(format!("point {p} does not fit the integer grid"))),
            }
        })
        .collect::<Result<_>>()?;
    Ok(Embedded { coords, two, five })
}

/// Ordered-pair counts `(x, y)`, `x != y`, `x` among `centres`, squared
/// distance at most `max_sq` in embedded units.
fn count_pairs(coords: &[(i64, i64)], centres: &[usize], max_sq: i128) -> HashMap<i128, u64> {
    let cell = (max_sq as f64).sqrt().ceil() as i64 + 1;
    let cell_of = |&(x, y): &(i64, i64)| (x.div_euclid(cell), y.div_euclid(cell));
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by_key(|&i| cell_of(&coords[i]));
    let sorted: Vec<(i64, i64)> = order.iter().map(|&i| coords[i]).collect();
    let mut ranges: HashMap<(i64, i64), (usize, usize)> = HashMap::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || cell_of(&sorted[i]) != cell_of(&sorted[start]) {
            ranges.insert(cell_of(&sorted[start]), (start, i));
            start = i;
        }
    }
    centres
        .par_chunks(1024)
        .map(|chunk| {
            let mut local: HashMap<i128, u64> = HashMap::new();
            for &i in chunk {
                let (x, y) = coords[i];
                let (cx, cy) = cell_of(&coords[i]);
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        let Some(&(a, b)) = ranges.get(&(cx + dx, cy + dy)) else {
                            continue;
                        };
                        for &(qx, qy) in &sorted[a..b] {
                            let ex = i128::from(qx - x);
                            let ey = i128::from(qy - y);
                            let d = ex * ex + ey * ey;
                            if d != 0 && d <= max_sq {
                                *local.entry(d).or_default() += 1;
                            }
                        }
                    }
                }
            }
            local
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        })
}

fn exact_pair_counts(
    points: &[ExactPoint],
    centres: &[usize],
    r_max_sq: &DistanceKey,
) -> Result<BTreeMap<DistanceKey, u64>> {
    if points.is_empty() {
        return Ok(BTreeMap::new());
    }
    let emb = embed(points)?;
    let max_sq = r_max_sq
        .floor_scaled(emb.two, emb.five)
        .to_i128()
        .ok_or_else(|| Error::Guard("r_max_sq too large for the integer grid".into()))?;
    let raw = count_pairs(&emb.coords, centres, max_sq);
    Ok(raw
        .into_iter()
        .map(|(d, c)| (DistanceKey::from_scaled(d, emb.two, emb.five), c))
        .collect())
}

/// Ordered pairs `(x, y)`, `x != y`, with `x` in the window and
/// `|x - y|^2 <= r_max_sq`. Partners `y` range over all points.
pub fn pair_histogram(
    points: &[ExactPoint],
    region: &Region,
    r_max_sq: &DistanceKey,
    window: &Window,
) -> Result<DistanceHistogram> {
    let window_area = window.area(region)?;
    let centres: Vec<usize> = (0..points.len())
        .into_par_iter()
        .filter(|&i| window.admits(region, &points[i]))
        .collect();
    if centres.is_empty() {
        return Err(Error::EmptyWindow("no points inside the window".into()));
    }
    Ok(DistanceHistogram {
        entries: exact_pair_counts(points, &centres, r_max_sq)?,
        window_area,
        point_count: centres.len(),
        r_max_sq: r_max_sq.clone(),
    })
}

/// One row of the reference frequency table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceRow {
    pub r_sq: DistanceKey,
    pub eta: Rational64,
    /// Marked values were themselves estimated from large patches.
    pub starred: bool,
}

/// Shell frequencies for small distances; starred rows are numerical
/// estimates rather than exact values.
pub fn eta_exact_reference() -> Vec<ReferenceRow> {
    const ROWS: [(u64, u32, i64, i64, bool); 13] = [
        (0, 0, 1, 1, false),
        (1, 1, 5, 11, false),
        (1, 0, 439, 165, false),
        (8, 1, 1, 2, false),
        (9, 1, 67, 165, false),
        (49, 2, 4, 165, false),
        (2, 0, 7, 2, true),
        (13, 1, 142, 165, false),
        (81, 2, 4, 165, false),
        (17, 1, 10, 11, true),
        (4, 0, 3, 1, true),
        (113, 2, 8, 165, true),
        (5, 0, 73, 15, true),
    ];
    ROWS.iter()
        .map(|&(s, ell, p, q, starred)| ReferenceRow {
            r_sq: if s == 0 { DistanceKey::zero() } else { DistanceKey::new(s, ell) },
            eta: Rational64::new(p, q),
            starred,
        })
        .collect()
}

pub fn reference_lookup(key: &DistanceKey) -> Option<ReferenceRow> {
    eta_exact_reference().into_iter().find(|r| &r.r_sq == key)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyEstimate {
    pub key: DistanceKey,
    pub pair_count: u64,
    pub eta_hat: f64,
    pub reference: Option<ReferenceRow>,
}

impl FrequencyEstimate {
    /// `eta_hat / eta_exact - 1` when a reference value exists.
    pub fn relative_deviation(&self) -> Option<f64> {
        self.reference.as_ref().map(|r| {
            let exact = *r.eta.numer() as f64 / *r.eta.denom() as f64;
            self.eta_hat / exact - 1.0
        })
    }
}

/// `eta_hat = pair_count / window_area` per key. The zero key reports the
/// window's self-pairs, i.e. the point density (expected 1).
pub fn eta_estimate(h: &DistanceHistogram) -> Result<Vec<FrequencyEstimate>> {
    if h.point_count == 0 {
        return Err(Error::EmptyWindow("histogram has no points".into()));
    }
    let zero = DistanceKey::zero();
    let mut out = vec![FrequencyEstimate {
        pair_count: h.point_count as u64,
        eta_hat: h.density(),
        reference: reference_lookup(&zero),
        key: zero,
    }];
    out.extend(h.entries.iter().map(|(k, &c)| FrequencyEstimate {
        key: k.clone(),
        pair_count: c,
        eta_hat: c as f64 / h.window_area,
        reference: reference_lookup(k),
    }));
    Ok(out)
}

/// Outcome of the exact coordinate and distance checks on a point set.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PropositionReport {
    pub points_checked: usize,
    pub keys_checked: usize,
    /// Points outside every rotated copy `R_{n theta} Z^2`.
    pub rotation_failures: Vec<ExactPoint>,
    /// Points with a power of two in a coordinate denominator.
    pub coordinate_failures: Vec<ExactPoint>,
    /// Squared distances not of the form `(p^2 + q^2) / 5^ell`.
    pub distance_failures: Vec<DistanceKey>,
}

impl PropositionReport {
    pub fn passed(&self) -> bool {
        self.rotation_failures.is_empty()
            && self.coordinate_failures.is_empty()
            && self.distance_failures.is_empty()
    }
}

/// True when `key = (p^2 + q^2) / 5^ell` with no power of 4 left over.
pub fn is_five_adic_sum_of_squares(key: &DistanceKey) -> Result<bool> {
    if key.residual_two_exp() != 0 {
        return Ok(false);
    }
    let s = key
        .s()
        .to_u64()
        .ok_or_else(|| Error::Guard(format!("numerator of {key} too large")))?;
    Ok(r2(s)? > 0)
}

/// Checks every point for rotated-lattice membership (with verified
/// witnesses) and `Z[1/5]` coordinates, and every distinct pair squared
/// distance up to `r_max_sq` for the sum-of-two-squares form.
pub fn proposition_checks(points: &[ExactPoint], r_max_sq: &DistanceKey) -> Result<PropositionReport> {
    let per_point: Vec<(bool, bool)> = points
        .par_iter()
        .map(|p| {
            let member = p.is_origin() || rotation_membership(p)?.is_member();
            let z5 = p.x.two_exp() == 0 && p.y.two_exp() == 0;
            Ok((member, z5))
        })
        .collect::<Result<_>>()?;
    let mut report = PropositionReport { points_checked: points.len(), ..Default::default() };
    for (p, (member, z5)) in points.iter().zip(per_point) {
        if !member {
            report.rotation_failures.push(p.clone());
        }
        if !z5 {
            report.coordinate_failures.push(p.clone());
        }
    }
    let centres: Vec<usize> = (0..points.len()).collect();
    let keys = exact_pair_counts(points, &centres, r_max_sq)?;
    report.keys_checked = keys.len();
    for k in keys.keys() {
        if !is_five_adic_sum_of_squares(k)? {
            report.distance_failures.push(k.clone());
        }
    }
    Ok(report)
}

/// Frequency of a two-point motif up to congruence: unordered pairs at the
/// motif's distance per unit window area, i.e. `eta(r) / 2`.
pub fn motif_frequency(
    points: &[ExactPoint],
    region: &Region,
    window: &Window,
    motif: &[ExactPoint],
) -> Result<f64> {
    if motif.len() != 2 {
        return Err(Error::Unsupported(format!(
            "motifs of {} points (only pairs are supported)",
            motif.len()
        )));
    }
    let key = crate::exact::squared_distance(&motif[0], &motif[1]);
    if key.is_zero() {
        return Err(Error::InvalidInput("degenerate motif".into()));
    }
    let h = pair_histogram(points, region, &key, window)?;
    Ok(h.count(&key) as f64 / h.window_area / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::squared_distance;
    use crate::substitution::generate_patch;

    fn brute(points: &[ExactPoint], r_max_sq: &DistanceKey) -> BTreeMap<DistanceKey, u64> {
        let mut out = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            for (j, q) in points.iter().enumerate() {
                if i != j {
                    let k = squared_distance(p, q);
                    if &k <= r_max_sq {
                        *out.entry(k).or_default() += 1;
                    }
                }
            }
        }
        out
    }

    fn big_region() -> Region {
        Region::triangle(
            ExactPoint::from_ints(-10, -10),
            ExactPoint::from_ints(30, -10),
            ExactPoint::from_ints(-10, 30),
        )
        .unwrap()
    }

    #[test]
    fn collinear_points() {
        let pts: Vec<_> = (0..3).map(|i| ExactPoint::from_ints(i, 0)).collect();
        let h = pair_histogram(&pts, &big_region(), &DistanceKey::new(10, 0), &Window::Full).unwrap();
        let got: Vec<_> = h.entries.iter().map(|(k, &c)| (k.clone(), c)).collect();
        assert_eq!(got, vec![(DistanceKey::new(1, 0), 4), (DistanceKey::new(4, 0), 2)]);
        assert_eq!(h.window_area, 800.0);
    }

    #[test]
    fn control_point_counts() {
        assert_eq!(control_points(&generate_patch(0).unwrap()).unwrap(), vec![ExactPoint::origin()]);
        let pts = control_points(&generate_patch(2).unwrap()).unwrap();
        assert_eq!(pts.len(), 25);
        assert!(pts.iter().all(|p| p.denominator_exps().0 == 0));
    }

    #[test]
    fn depth_two_matches_brute_force() {
        let patch = generate_patch(2).unwrap();
        let pts = control_points(&patch).unwrap();
        let region = Region::of_patch(&patch);
        for rmax in [DistanceKey::new(1, 1), DistanceKey::new(10, 0)] {
            let h = pair_histogram(&pts, &region, &rmax, &Window::Full).unwrap();
            assert_eq!(h.entries, brute(&pts, &rmax));
            assert_eq!(h.window_area, 25.0);
        }
    }

    #[test]
    fn mixed_denominators_match_brute_force() {
        let h = |n, a, b| ExactScalar::new(n, a, b);
        let pts = vec![
            ExactPoint::new(h(1, 1, 0), h(3, 2, 0)),
            ExactPoint::new(h(-2, 0, 1), h(7, 1, 1)),
            ExactPoint::new(h(0, 0, 0), h(1, 0, 2)),
            ExactPoint::new(h(5, 2, 1), h(-1, 0, 0)),
        ];
        let rmax = DistanceKey::new(9, 0);
        let hist = pair_histogram(&pts, &big_region(), &rmax, &Window::Full).unwrap();
        assert_eq!(hist.entries, brute(&pts, &rmax));
    }

    #[test]
    fn eroded_window_membership_is_exact() {
        let region = Region::triangle(
            ExactPoint::from_ints(0, 0),
            ExactPoint::from_ints(10, 0),
            ExactPoint::from_ints(0, 10),
        )
        .unwrap();
        let m = ExactScalar::from_int(1);
        assert!(region.contains_eroded(&ExactPoint::from_ints(1, 1), &m));
        assert!(!region.contains_eroded(&ExactPoint::from_ints(1, 0), &m));
        assert!(!region.contains_eroded(&ExactPoint::from_ints(20, 20), &ExactScalar::zero()));
        let w = Window::eroded(1);
        let rho = region.inradius();
        assert!((w.area(&region).unwrap() - 50.0 * ((rho - 1.0) / rho).powi(2)).abs() < 1e-12);
        assert!(matches!(Window::eroded(100).area(&region), Err(Error::EmptyWindow(_))));
    }

    #[test]
    fn empty_window_rejected() {
        let pts = vec![ExactPoint::from_ints(0, 0)];
        let region = Region::triangle(
            ExactPoint::from_ints(0, 0),
            ExactPoint::from_ints(10, 0),
            ExactPoint::from_ints(0, 10),
        )
        .unwrap();
        let r = pair_histogram(&pts, &region, &DistanceKey::new(1, 0), &Window::eroded(1));
        assert!(matches!(r, Err(Error::EmptyWindow(_))));
    }

    #[test]
    fn reference_table() {
        let t = eta_exact_reference();
        assert_eq!(t.len(), 13);
        let one = reference_lookup(&DistanceKey::new(1, 0)).unwrap();
        assert_eq!(one.eta, Rational64::new(439, 165));
        assert_eq!(reference_lookup(&DistanceKey::zero()).unwrap().eta, Rational64::new(1, 1));
        let five = reference_lookup(&DistanceKey::new(5, 0)).unwrap();
        assert_eq!((five.eta, five.starred), (Rational64::new(73, 15), true));
        assert!(!reference_lookup(&DistanceKey::new(8, 1)).unwrap().starred);
    }

    #[test]
    fn eta_estimate_rows() {
        let pts: Vec<_> = (0..3).map(|i| ExactPoint::from_ints(i, 0)).collect();
        let h = pair_histogram(&pts, &big_region(), &DistanceKey::new(10, 0), &Window::Full).unwrap();
        let est = eta_estimate(&h).unwrap();
        assert!(est[0].key.is_zero());
        assert_eq!(est[0].pair_count, 3);
        assert_eq!(est[1].eta_hat, 4.0 / 800.0);
        assert!(est[1].reference.is_some());
    }

    #[test]
    fn proposition_checks_catch_adversarial_points() {
        let mut pts = control_points(&generate_patch(3).unwrap()).unwrap();
        let r5 = DistanceKey::new(5, 0);
        assert!(proposition_checks(&pts, &r5).unwrap().passed());
        let h = |n, a, b| ExactScalar::new(n, a, b);
        pts.push(ExactPoint::new(h(1, 1, 0), ExactScalar::zero()));
        let rep = proposition_checks(&pts, &r5).unwrap();
        assert_eq!(rep.coordinate_failures.len(), 1);
        pts.pop();
        pts.push(ExactPoint::new(h(1, 0, 1), h(2, 0, 1)));
        let rep = proposition_checks(&pts, &r5).unwrap();
        assert_eq!(rep.rotation_failures, vec![ExactPoint::new(h(1, 0, 1), h(2, 0, 1))]);
    }

    #[test]
    fn five_adic_sum_of_squares() {
        assert!(is_five_adic_sum_of_squares(&DistanceKey::new(13, 1)).unwrap());
        assert!(!is_five_adic_sum_of_squares(&DistanceKey::new(3, 0)).unwrap());
        assert!(!is_five_adic_sum_of_squares(&"1/2".parse().unwrap()).unwrap());
    }

    #[test]
    fn motif_validation() {
        let pts = control_points(&generate_patch(3).unwrap()).unwrap();
        let region = Region::of_patch(&generate_patch(3).unwrap());
        let o = ExactPoint::origin();
        assert!(matches!(
            motif_frequency(&pts, &region, &Window::Full, &[o.clone(), o.clone()]),
            Err(Error::InvalidInput(_))
        ));
        let tri = [o.clone(), ExactPoint::from_ints(1, 0), ExactPoint::from_ints(0, 1)];
        assert!(matches!(
            motif_frequency(&pts, &region, &Window::Full, &tri),
            Err(Error::Unsupported(_))
        ));
        // r^2 = 3 has no exact representative in this ring; 1/4 is another
        // squared distance that never occurs between control points.
        let quarter = [o.clone(), ExactPoint::new(ExactScalar::new(1, 1, 0), ExactScalar::zero())];
        assert_eq!(motif_frequency(&pts, &region, &Window::Full, &quarter).unwrap(), 0.0);
        let unit = [o, ExactPoint::from_ints(0, 1)];
        let h = pair_histogram(&pts, &region, &DistanceKey::new(1, 0), &Window::Full).unwrap();
        let eta = h.count(&DistanceKey::new(1, 0)) as f64 / h.window_area;
        assert!(eta > 0.0);
        assert_eq!(motif_frequency(&pts, &region, &Window::Full, &unit).unwrap(), eta / 2.0);
    }
}
