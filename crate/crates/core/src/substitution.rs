//! Pinwheel substitution on the (1, 2, √5) right triangle.
//!
//! A big triangle is inflated by the complex factor `2 + i` and then cut
//! into five congruent copies of the unit prototile. The cut is written in
//! barycentric coordinates on the parent's `(r, s, l)` vertices, so one
//! table serves both chiralities and every placement.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{orientation, point_in_triangle, Containment, ExactPoint, ExactScalar};

/// Default cap on patch depth (5^8 = 390 625 tiles).
pub const DEFAULT_MAX_DEPTH: u32 = 8;

/// A (1, 2, √5) right triangle scaled by `√5^scale_exp`.
///
/// `r` is the right-angle vertex, `s` the far end of the short leg and `l`
/// the far end of the long leg. The hypotenuse is `s`–`l`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlacedTriangle {
    r: ExactPoint,
    s: ExactPoint,
    l: ExactPoint,
    chirality: i8,
    scale_exp: u32,
}

impl PlacedTriangle {
    /// Rejects degenerate vertex triples. Side lengths are not checked here;
    /// see [`PlacedTriangle::check_shape`].
    pub fn new(r: ExactPoint, s: ExactPoint, l: ExactPoint, scale_exp: u32) -> Result<Self> {
        let chirality = orientation(&r, &l, &s);
        if chirality == 0 {
            return Err(Error::DegenerateTriangle);
        }
        Ok(PlacedTriangle { r, s, l, chirality, scale_exp })
    }

    pub fn r(&self) -> &ExactPoint {
        &self.r
    }

    pub fn s(&self) -> &ExactPoint {
        &self.s
    }

    pub fn l(&self) -> &ExactPoint {
        &self.l
    }

    pub fn chirality(&self) -> i8 {
        self.chirality
    }

    pub fn scale_exp(&self) -> u32 {
        self.scale_exp
    }

    pub fn vertices(&self) -> [&ExactPoint; 3] {
        [&self.r, &self.s, &self.l]
    }

    /// Twice the signed area, as `(s - r) x (l - r)`.
    pub fn doubled_signed_area(&self) -> ExactScalar {
        (&self.s - &self.r).cross(&(&self.l - &self.r))
    }

    pub fn area(&self) -> ExactScalar {
        self.doubled_signed_area().abs().div_pow2(1)
    }

    /// Checks the exact side lengths `5^m`, `4 * 5^m` and `5^(m+1)`.
    pub fn check_shape(&self) -> std::result::Result<(), String> {
        let unit = ExactScalar::new(5i64.pow(self.scale_exp), 0, 0);
        let short = (&self.r - &self.s).norm_sq();
        let long = (&self.r - &self.l).norm_sq();
        let hyp = (&self.s - &self.l).norm_sq();
        if short != unit || long != unit.mul_int(4) || hyp != unit.mul_int(5) {
            return Err(format!(
                "squared sides ({}, {}, {}) are not (1, 4, 5) x 5^{}",
                short.to_f64(),
                long.to_f64(),
                hyp.to_f64(),
                self.scale_exp
            ));
        }
        if self.chirality != orientation(&self.r, &self.l, &self.s) {
            return Err("stored chirality disagrees with vertex orientation".into());
        }
        Ok(())
    }

    pub fn translate(&self, t: &ExactPoint) -> Self {
        self.map(|p| p + t)
    }

    /// Applies an isometry-like point map. Chirality is recomputed.
    pub fn map(&self, f: impl Fn(&ExactPoint) -> ExactPoint) -> Self {
        let (r, s, l) = (f(&self.r), f(&self.s), f(&self.l));
        let chirality = orientation(&r, &l, &s);
        PlacedTriangle { r, s, l, chirality, scale_exp: self.scale_exp }
    }
}

/// The prototile containing `(1/2,-1/2), (-1/2,-1/2), (-1/2,3/2)`.
pub fn seed() -> PlacedTriangle {
    let h = |n: i64| ExactScalar::new(n, 1, 0);
    PlacedTriangle::new(
        ExactPoint::new(h(-1), h(-1)),
        ExactPoint::new(h(1), h(-1)),
        ExactPoint::new(h(-1), h(3)),
        0,
    )
    .expect("seed is non-degenerate")
}

/// Multiplication of every vertex by `2 + i`.
pub fn inflate(t: &PlacedTriangle) -> PlacedTriangle {
    let f = |p: &ExactPoint| p.mul_gaussian(2, 1);
    PlacedTriangle {
        r: f(&t.r),
        s: f(&t.s),
        l: f(&t.l),
        chirality: t.chirality,
        scale_exp: t.scale_exp + 1,
    }
}

type Weights = [(i64, u32, u32); 3];

// Barycentric weights on (R, S, L), each entry n / (2^a 5^b).
const W_F: Weights = [(0, 0, 0), (4, 0, 1), (1, 0, 1)];
const W_M: Weights = [(1, 1, 0), (0, 0, 0), (1, 1, 0)];
const W_G: Weights = [(0, 0, 0), (2, 0, 1), (3, 0, 1)];
const W_H: Weights = [(1, 1, 0), (2, 0, 1), (1, 1, 1)];

fn combine(w: &Weights, t: &PlacedTriangle) -> ExactPoint {
    let mut acc = ExactPoint::origin();
    for (&(n, a, b), v) in w.iter().zip(t.vertices()) {
        if n != 0 {
            acc = &acc + &v.scale(&ExactScalar::new(n, a, b));
        }
    }
    acc
}

/// Relative chirality of the five children with respect to their parent.
pub const CHILD_CHIRALITY: [i8; 5] = [-1, -1, 1, 1, -1];

/// Cuts a triangle of scale `m >= 1` into five triangles of scale `m - 1`.
pub fn subdivide(t: &PlacedTriangle) -> Result<[PlacedTriangle; 5]> {
    if t.scale_exp == 0 {
        return Err(Error::ScaleMismatch("cannot subdivide a unit tile".into()));
    }
    let f = combine(&W_F, t);
    let m = combine(&W_M, t);
    let g = combine(&W_G, t);
    let h = combine(&W_H, t);
    let k = t.scale_exp - 1;
    let mk = |r: &ExactPoint, s: &ExactPoint, l: &ExactPoint, rel: i8| PlacedTriangle {
        r: r.clone(),
        s: s.clone(),
        l: l.clone(),
        chirality: rel * t.chirality,
        scale_exp: k,
    };
    Ok([
        mk(&f, &t.s, &t.r, CHILD_CHIRALITY[0]),
        mk(&h, &t.r, &m, CHILD_CHIRALITY[1]),
        mk(&h, &f, &m, CHILD_CHIRALITY[2]),
        mk(&g, &m, &f, CHILD_CHIRALITY[3]),
        mk(&g, &m, &t.l, CHILD_CHIRALITY[4]),
    ])
}

/// `u + (v - u)/2 + (w - u)/4` with `u` the right-angle vertex, `v` the
/// other end of the unit edge and `w` the remaining vertex.
pub fn control_point(t: &PlacedTriangle) -> Result<ExactPoint> {
    if t.scale_exp != 0 {
        return Err(Error::ScaleMismatch(format!(
            "control points are defined on unit tiles, got scale 5^{}",
            t.scale_exp
        )));
    }
    let u = &t.r;
    Ok(&(u + &(&t.s - u).div_pow2(1)) + &(&t.l - u).div_pow2(2))
}

/// A patch of unit tiles obtained by subdividing `inflate^depth(seed)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Patch {
    depth: u32,
    outline: PlacedTriangle,
    tiles: Vec<PlacedTriangle>,
}

impl Patch {
    /// Assembles a patch from parts; used when reading patch files.
    pub fn from_parts(depth: u32, tiles: Vec<PlacedTriangle>) -> Self {
        Patch { depth, outline: outline(depth), tiles }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// The inflated seed whose subdivision this patch is.
    pub fn outline(&self) -> &PlacedTriangle {
        &self.outline
    }

    pub fn tiles(&self) -> &[PlacedTriangle] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }
}

/// `inflate^depth(seed())`.
pub fn outline(depth: u32) -> PlacedTriangle {
    (0..depth).fold(seed(), |t, _| inflate(&t))
}

pub fn generate_patch(depth: u32) -> Result<Patch> {
    generate_patch_with_limit(depth, DEFAULT_MAX_DEPTH)
}

/// Tiles come out in depth-first order by child index, independent of the
/// number of worker threads.
pub fn generate_patch_with_limit(depth: u32, max_depth: u32) -> Result<Patch> {
    if depth > max_depth {
        return Err(Error::Capacity { depth, max: max_depth });
    }
    let top = outline(depth);
    let mut tiles = vec![top.clone()];
    for _ in 0..depth {
        let next: Vec<[PlacedTriangle; 5]> =
            tiles.par_iter().map(subdivide).collect::<Result<_>>()?;
        tiles = next.into_iter().flatten().collect();
    }
    Ok(Patch { depth, outline: top, tiles })
}

/// Every subdivision performed while building a depth-`depth` patch,
/// verified with [`verify_partition`]. Returns the number of checks.
pub fn verify_all_subdivisions(depth: u32) -> Result<usize> {
    let mut level = vec![outline(depth)];
    let mut checked = 0;
    for _ in 0..depth {
        let next: Vec<[PlacedTriangle; 5]> = level
            .par_iter()
            .map(|p| {
                let kids = subdivide(p)?;
                verify_partition(p, &kids)?;
                Ok(kids)
            })
            .collect::<Result<_>>()?;
        checked += next.len();
        level = next.into_iter().flatten().collect();
    }
    Ok(checked)
}

/// True when some edge of `a` (or of `b`) has the whole other triangle on
/// its closed outer side.
fn separated(a: &PlacedTriangle, b: &PlacedTriangle) -> bool {
    let edge_separates = |t: &PlacedTriangle, o: &PlacedTriangle| {
        let v = t.vertices();
        let sign = orientation(v[0], v[1], v[2]);
        (0..3).any(|i| {
            let (p, q) = (v[i], v[(i + 1) % 3]);
            o.vertices().iter().all(|w| orientation(p, q, w) * sign <= 0)
        })
    };
    edge_separates(a, b) || edge_separates(b, a)
}

/// Exact check that `children` tile `parent`: unit-scale shape, per-child
/// area, containment, and pairwise disjoint interiors. Order of the
/// children does not matter.
pub fn verify_partition(parent: &PlacedTriangle, children: &[PlacedTriangle]) -> Result<()> {
    let fail = |child: usize, reason: String| Err(Error::Partition { child, reason });
    if children.len() != 5 {
        return fail(children.len(), format!("expected 5 children, got {}", children.len()));
    }
    if parent.scale_exp == 0 {
        return fail(0, "parent is a unit tile".into());
    }
    let child_area = ExactScalar::new(5i64.pow(parent.scale_exp - 1), 0, 0);
    let mut total = ExactScalar::zero();
    for (i, c) in children.iter().enumerate() {
        if c.scale_exp + 1 != parent.scale_exp {
            return fail(i, "child scale is not one level below the parent".into());
        }
        let a = c.area();
        if a != child_area {
            return fail(i, format!("area mismatch: {} instead of {}", a.to_f64(), child_area.to_f64()));
        }
        total = &total + &a;
    }
    if total != parent.area() {
        return fail(4, "child areas do not sum to the parent area".into());
    }
    for (i, c) in children.iter().enumerate() {
        if let Err(reason) = c.check_shape() {
            return fail(i, reason);
        }
        for v in c.vertices() {
            if point_in_triangle(v, parent.vertices())? == Containment::Outside {
                return fail(i, format!("vertex {v} lies outside the parent"));
            }
        }
    }
    for j in 0..5 {
        for i in 0..j {
            if !separated(&children[i], &children[j]) {
                return fail(j, format!("interior overlaps child {i}"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::squared_distance;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn p(x: i64, y: i64) -> ExactPoint {
        ExactPoint::from_ints(x, y)
    }

    fn reference_big() -> PlacedTriangle {
        PlacedTriangle::new(p(0, 0), p(-1, 2), p(4, 2), 1).unwrap()
    }

    #[test]
    fn seed_vertices_and_control_point() {
        let t = seed();
        let h = |n| ExactScalar::new(n, 1, 0);
        assert_eq!(t.r(), &ExactPoint::new(h(-1), h(-1)));
        assert_eq!(squared_distance(t.r(), t.s()), crate::exact::DistanceKey::new(1, 0));
        assert_eq!(control_point(&t).unwrap(), ExactPoint::origin());
        t.check_shape().unwrap();
    }

    #[test]
    fn inflate_examples() {
        assert_eq!(p(0, 0).mul_gaussian(2, 1), p(0, 0));
        assert_eq!(p(1, 0).mul_gaussian(2, 1), p(2, 1));
        let t = seed();
        let big = inflate(&t);
        assert_eq!(
            (big.r() - big.s()).norm_sq(),
            (t.r() - t.s()).norm_sq().mul_int(5)
        );
        assert_eq!(big.chirality(), t.chirality());
        big.check_shape().unwrap();
    }

    #[test]
    fn subdivide_reference_triangle() {
        let big = reference_big();
        big.check_shape().unwrap();
        let kids = subdivide(&big).unwrap();
        let expected = [
            (p(0, 2), p(-1, 2), p(0, 0)),
            (p(0, 1), p(0, 0), p(2, 1)),
            (p(0, 1), p(0, 2), p(2, 1)),
            (p(2, 2), p(2, 1), p(0, 2)),
            (p(2, 2), p(2, 1), p(4, 2)),
        ];
        for (k, (r, s, l)) in kids.iter().zip(expected.iter()) {
            assert_eq!((k.r(), k.s(), k.l()), (r, s, l));
            k.check_shape().unwrap();
        }
        let verts: HashSet<_> = kids.iter().flat_map(|k| k.vertices()).cloned().collect();
        let want: HashSet<_> =
            [p(0, 0), p(-1, 2), p(4, 2), p(0, 2), p(2, 1), p(2, 2), p(0, 1)].into_iter().collect();
        assert_eq!(verts, want);
        let rel: Vec<i8> = kids.iter().map(|k| k.chirality() * big.chirality()).collect();
        assert_eq!(rel, CHILD_CHIRALITY);
        verify_partition(&big, &kids).unwrap();
    }

    #[test]
    fn unit_tile_cannot_subdivide() {
        assert!(matches!(subdivide(&seed()), Err(Error::ScaleMismatch(_))));
    }

    #[test]
    fn control_point_examples() {
        let t = PlacedTriangle::new(p(0, 0), p(0, 1), p(2, 0), 0).unwrap();
        let half = ExactScalar::new(1, 1, 0);
        assert_eq!(control_point(&t).unwrap(), ExactPoint::new(half.clone(), half));
        assert!(control_point(&inflate(&t)).is_err());
        let c = control_point(&t).unwrap();
        assert_eq!(point_in_triangle(&c, t.vertices()).unwrap(), Containment::Inside);
    }

    #[test]
    fn generate_small_patches() {
        let p0 = generate_patch(0).unwrap();
        assert_eq!(p0.tiles(), &[seed()]);
        let p3 = generate_patch(3).unwrap();
        assert_eq!(p3.len(), 125);
        let mut area = ExactScalar::zero();
        for t in p3.tiles() {
            t.check_shape().unwrap();
            area = &area + &t.area();
        }
        assert_eq!(area, ExactScalar::from_int(125));
        let p2 = generate_patch(2).unwrap();
        let origin = ExactPoint::origin();
        assert!(p2.tiles().iter().any(|t| control_point(t).unwrap() == origin));
        // c3 of the inflated seed carries the origin.
        let c3 = &subdivide(&inflate(&seed())).unwrap()[2];
        assert_eq!(control_point(c3).unwrap(), origin);
    }

    #[test]
    fn depth_cap_is_enforced() {
        assert!(matches!(generate_patch(9), Err(Error::Capacity { depth: 9, max: 8 })));
        assert!(generate_patch_with_limit(3, 2).unwrap_err().is_resource_guard());
    }

    #[test]
    fn verify_partition_rejects_perturbation() {
        let big = reference_big();
        let mut kids = subdivide(&big).unwrap().to_vec();
        let fifth = ExactScalar::new(1, 0, 1);
        let r = kids[1].r() + &ExactPoint::new(fifth, ExactScalar::zero());
        kids[1] = PlacedTriangle::new(r, kids[1].s().clone(), kids[1].l().clone(), 0).unwrap();
        match verify_partition(&big, &kids) {
            Err(Error::Partition { child, reason }) => {
                assert_eq!(child, 1);
                assert!(reason.contains("area"), "{reason}");
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn verify_partition_accepts_reordering() {
        let big = reference_big();
        let mut kids = subdivide(&big).unwrap().to_vec();
        kids.reverse();
        kids.swap(0, 2);
        verify_partition(&big, &kids).unwrap();
    }

    #[test]
    fn verify_partition_detects_overlap() {
        let big = reference_big();
        let mut kids = subdivide(&big).unwrap().to_vec();
        kids[4] = kids[3].clone();
        assert!(matches!(verify_partition(&big, &kids), Err(Error::Partition { child: 4, .. })));
    }

    #[test]
    fn all_subdivisions_to_depth_four() {
        assert_eq!(verify_all_subdivisions(4).unwrap(), 1 + 5 + 25 + 125);
    }

    #[test]
    fn control_points_stay_in_z_fifth() {
        let patch = generate_patch(4).unwrap();
        for t in patch.tiles() {
            let c = control_point(t).unwrap();
            assert_eq!(c.denominator_exps().0, 0);
            assert_eq!(point_in_triangle(&c, t.vertices()).unwrap(), Containment::Inside);
        }
    }

    fn arb_parent() -> impl Strategy<Value = PlacedTriangle> {
        (-20i64..20, -20i64..20, 0u32..3, any::<bool>(), 0i64..4).prop_map(
            |(x, y, rot, mirror, nrot)| {
                let mut t = (0..=rot).fold(seed(), |t, _| inflate(&t));
                if mirror {
                    t = t.map(|q| ExactPoint::new(-&q.x, q.y.clone()));
                }
                t = t.map(|q| crate::exact::rotate_theta(q, nrot));
                t.translate(&ExactPoint::from_ints(x, y))
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn chirality_pattern_is_constant(parent in arb_parent()) {
            let kids = subdivide(&parent).unwrap();
            for (k, rel) in kids.iter().zip(CHILD_CHIRALITY) {
                prop_assert_eq!(orientation(k.r(), k.l(), k.s()), rel * parent.chirality());
            }
            verify_partition(&parent, &kids).unwrap();
        }

        #[test]
        fn control_point_translation_equivariant(x in -9i64..9, y in -9i64..9, d in 1u32..3) {
            let tau = ExactPoint::new(ExactScalar::new(x, 0, d), ExactScalar::new(y, 1, 0));
            let t = seed();
            prop_assert_eq!(
                control_point(&t.translate(&tau)).unwrap(),
                &control_point(&t).unwrap() + &tau
            );
        }
    }
}
