//! Square-lattice side: shelling numbers `r2(n)`, shells of general planar
//! lattices and their duals, the radial Poisson pair, and the idealized
//! powder made of rotated copies of `Z^2`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Primes are sieved up to this bound; `r2` factors any `n <= SIEVE_LIMIT^2`.
pub const SIEVE_LIMIT: u64 = 1_000_000;

/// Upper bound accepted by [`r2_bruteforce`].
pub const BRUTEFORCE_LIMIT: u64 = 100_000_000;

/// Default enumeration budget for [`lattice_shelling`].
pub const DEFAULT_POINT_BUDGET: u64 = 10_000_000;

struct Sieve {
    /// Smallest prime factor for every n <= SIEVE_LIMIT (0 and 1 map to 0).
    spf: Vec<u32>,
    primes: Vec<u32>,
}

fn sieve() -> &'static Sieve {
    static SIEVE: OnceLock<Sieve> = OnceLock::new();
    SIEVE.get_or_init(|| {
        let n = SIEVE_LIMIT as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            for &p in &primes {
                let m = i * p as usize;
                if p > spf[i] || m > n {
                    break;
                }
                spf[m] = p;
            }
        }
        Sieve { spf, primes }
    })
}

/// Prime factorization as ascending `(p, e)` pairs.
pub fn factorize(n: u64) -> Result<Vec<(u64, u32)>> {
    if n == 0 {
        return Err(Error::InvalidInput("cannot factor 0".into()));
    }
    if n > SIEVE_LIMIT * SIEVE_LIMIT {
        return Err(Error::Guard(format!("{n} exceeds the factorization bound")));
    }
    let sv = sieve();
    let mut out: Vec<(u64, u32)> = Vec::new();
    let push = |p: u64, out: &mut Vec<(u64, u32)>| match out.last_mut() {
        Some((q, e)) if *q == p => *e += 1,
        _ => out.push((p, 1)),
    };
    let mut m = n;
    if m > SIEVE_LIMIT {
        for &p in &sv.primes {
            let p = u64::from(p);
            if p * p > m || m <= SIEVE_LIMIT {
                break;
            }
            while m % p == 0 {
                push(p, &mut out);
                m /= p;
            }
        }
        if m > SIEVE_LIMIT {
            // no factor up to sqrt(m): prime
            push(m, &mut out);
            return Ok(out);
        }
    }
    while m > 1 {
        let p = u64::from(sv.spf[m as usize]);
        push(p, &mut out);
        m /= p;
    }
    Ok(out)
}

/// Number of ordered, signed representations `n = p^2 + q^2`.
pub fn r2(n: u64) -> Result<u64> {
    if n == 0 {
        return Ok(1);
    }
    let mut prod = 4u64;
    for (p, e) in factorize(n)? {
        match p % 4 {
            1 => prod *= u64::from(e) + 1,
            3 if e % 2 == 1 => return Ok(0),
            _ => {}
        }
    }
    Ok(prod)
}

/// Direct enumeration of `r2(n)`.
pub fn r2_bruteforce(n: u64) -> Result<u64> {
    if n > BRUTEFORCE_LIMIT {
        return Err(Error::Guard(format!("{n} exceeds the brute-force guard")));
    }
    let m = (n as f64).sqrt() as i64 + 1;
    let n = n as i64;
    let mut count = 0;
    for p in -m..=m {
        let rest = n - p * p;
        if rest < 0 {
            continue;
        }
        let q = (rest as f64).sqrt().round() as i64;
        for c in [q - 1, q, q + 1] {
            if c >= 0 && c * c == rest {
                count += if c == 0 { 1 } else { 2 };
                break;
            }
        }
    }
    Ok(count)
}

/// One shell of `Z^2`: squared radius `n`, radius and `r2(n)` points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellingEntry {
    pub n: u64,
    pub r: f64,
    pub eta_sq: u64,
}

/// Non-empty shells of `Z^2` with `n <= n_max`, ascending.
pub fn shelling(n_max: u64) -> Result<Vec<ShellingEntry>> {
    let mut out = Vec::new();
    for n in 0..=n_max {
        let eta_sq = r2(n)?;
        if eta_sq > 0 {
            out.push(ShellingEntry { n, r: (n as f64).sqrt(), eta_sq });
        }
    }
    Ok(out)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A planar lattice spanned by two rational vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBasis {
    pub b1: [BigRational; 2],
    pub b2: [BigRational; 2],
}

impl LatticeBasis {
    pub fn new(b1: [BigRational; 2], b2: [BigRational; 2]) -> Result<Self> {
        let b = LatticeBasis { b1, b2 };
        if b.determinant().is_zero() {
            return Err(Error::SingularBasis);
        }
        Ok(b)
    }

    /// Basis from integer numerators over a common denominator.
    pub fn from_ratios(b1: [(i64, i64); 2], b2: [(i64, i64); 2]) -> Result<Self> {
        Self::new(
            [rat(b1[0].0, b1[0].1), rat(b1[1].0, b1[1].1)],
            [rat(b2[0].0, b2[0].1), rat(b2[1].0, b2[1].1)],
        )
    }

    pub fn square() -> Self {
        Self::from_ratios([(1, 1), (0, 1)], [(0, 1), (1, 1)]).expect("identity")
    }

    pub fn determinant(&self) -> BigRational {
        &self.b1[0] * &self.b2[1] - &self.b1[1] * &self.b2[0]
    }

    /// Points per unit area, `1 / |det|`.
    pub fn density(&self) -> BigRational {
        self.determinant().abs().recip()
    }
}

/// Inverse transpose of the basis matrix `[b1 b2]`.
pub fn dual_basis(basis: &LatticeBasis) -> Result<LatticeBasis> {
    let det = basis.determinant();
    if det.is_zero() {
        return Err(Error::SingularBasis);
    }
    // M = [[a, c], [b, d]] with columns b1 = (a, b), b2 = (c, d);
    // M^{-T} = (1/det) [[d, -b], [-c, a]], columns are the dual vectors.
    let [a, b] = basis.b1.clone();
    let [c, d] = basis.b2.clone();
    LatticeBasis::new([&d / &det, -&c / &det], [-&b / &det, &a / &det])
}

/// Exact squared radii up to `r_max_sq` with their multiplicities.
pub type Shells = Vec<(BigRational, u64)>;

pub fn lattice_shelling(basis: &LatticeBasis, r_max_sq: &BigRational) -> Result<Shells> {
    lattice_shelling_with_budget(basis, r_max_sq, DEFAULT_POINT_BUDGET)
}

pub fn lattice_shelling_with_budget(
    basis: &LatticeBasis,
    r_max_sq: &BigRational,
    budget: u64,
) -> Result<Shells> {
    let inv = dual_basis(basis)?;
    // Coefficient i of v = m b1 + n b2 is <v, dual_i>, so |coef| <= |dual_i| |v|.
    let norm = |v: &[BigRational; 2]| {
        let x = v[0].to_f64().unwrap_or(f64::INFINITY);
        let y = v[1].to_f64().unwrap_or(f64::INFINITY);
        (x * x + y * y).sqrt()
    };
    let rmax = r_max_sq.to_f64().unwrap_or(f64::INFINITY).max(0.0).sqrt();
    let m_max = (norm(&inv.b1) * rmax).floor() as i64 + 1;
    let n_max = (norm(&inv.b2) * rmax).floor() as i64 + 1;
    let count = (2 * m_max as u64 + 1).saturating_mul(2 * n_max as u64 + 1);
    if count > budget {
        return Err(Error::Guard(format!("lattice enumeration needs {count} points")));
    }
    let mut shells: BTreeMap<BigRational, u64> = BTreeMap::new();
    for m in -m_max..=m_max {
        let mm = BigRational::from_integer(m.into());
        for n in -n_max..=n_max {
            let nn = BigRational::from_integer(n.into());
            let x = &mm * &basis.b1[0] + &nn * &basis.b2[0];
            let y = &mm * &basis.b1[1] + &nn * &basis.b2[1];
            let r2 = &x * &x + &y * &y;
            if &r2 <= r_max_sq {
                *shells.entry(r2).or_default() += 1;
            }
        }
    }
    Ok(shells.into_iter().collect())
}

/// Ring data `(squared radius, weight)` on both sides of the radial
/// Poisson summation formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadialPsfPair {
    /// Shells of the lattice with weights `eta(r)`.
    pub lhs: Vec<(BigRational, BigRational)>,
    /// Shells of the dual lattice with weights `dens * eta*(r)`.
    pub rhs: Vec<(BigRational, BigRational)>,
    pub density: BigRational,
}

fn weighted(shells: Shells, w: &BigRational) -> Vec<(BigRational, BigRational)> {
    shells
        .into_iter()
        .map(|(r, m)| (r, w * BigRational::from_integer(m.into())))
        .collect()
}

pub fn radial_psf_pair(basis: &LatticeBasis, r_max_sq: &BigRational) -> Result<RadialPsfPair> {
    let dual = dual_basis(basis)?;
    let density = basis.density();
    Ok(RadialPsfPair {
        lhs: weighted(lattice_shelling(basis, r_max_sq)?, &BigRational::one()),
        rhs: weighted(lattice_shelling(&dual, r_max_sq)?, &density),
        density,
    })
}

/// The pair for `5^{-ell/2} Z^2`, which has no rational basis but rational
/// squared radii: shells at `n / 5^ell` with weight `r2(n)`, dual shells at
/// `5^ell n` with weight `5^ell r2(n)`.
pub fn scaled_square_psf_pair(ell: u32, r_max_sq: &BigRational) -> Result<RadialPsfPair> {
    let five_l = BigRational::from_integer(BigInt::from(5u32).pow(ell));
    let bound = |scale: &BigRational| -> Result<u64> {
        (r_max_sq * scale)
            .floor()
            .to_integer()
            .to_u64()
            .ok_or_else(|| Error::InvalidInput("r_max_sq out of range".into()))
    };
    let side = |n_max: u64, scale: &BigRational, w: &BigRational| -> Result<Vec<_>> {
        shelling(n_max)?
            .into_iter()
            .map(|e| {
                Ok((
                    BigRational::from_integer(e.n.into()) * scale,
                    w * BigRational::from_integer(e.eta_sq.into()),
                ))
            })
            .collect()
    };
    let inv = five_l.recip();
    Ok(RadialPsfPair {
        lhs: side(bound(&five_l)?, &inv, &BigRational::one())?,
        rhs: side(bound(&inv)?, &five_l, &five_l)?,
        density: five_l,
    })
}

/// Idealized powder: `N` copies of `Z^2` rotated by `j * angle`, clipped to
/// the closed disc of radius `radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowderModel {
    pub grains: u32,
    pub angle: f64,
    pub radius: f64,
}

impl Default for PowderModel {
    fn default() -> Self {
        PowderModel { grains: 8, angle: 1.0, radius: 50.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowderPoint {
    pub x: f64,
    pub y: f64,
    pub grain: u32,
    pub weight: f64,
}

/// Cross-grain points closer than this count as coincident.
pub const COINCIDENCE_EPS: f64 = 1e-9;

fn validate(model: &PowderModel) -> Result<()> {
    if model.grains == 0 || !(model.radius > 0.0) || !model.angle.is_finite() {
        return Err(Error::InvalidInput(format!("bad powder model {model:?}")));
    }
    Ok(())
}

fn lattice_disc(radius: f64) -> Vec<(i64, i64)> {
    let m = radius.floor() as i64;
    let r2 = radius * radius;
    let mut out = Vec::new();
    for x in -m..=m {
        for y in -m..=m {
            if ((x * x + y * y) as f64) <= r2 {
                out.push((x, y));
            }
        }
    }
    out
}

/// Uniform grid of buckets over the plane for fixed-radius searches.
struct Buckets {
    cell: f64,
    map: std::collections::HashMap<(i64, i64), Vec<usize>>,
}

impl Buckets {
    fn new(points: &[PowderPoint], cell: f64) -> Self {
        let mut map: std::collections::HashMap<(i64, i64), Vec<usize>> = Default::default();
        for (i, p) in points.iter().enumerate() {
            map.entry(Self::key(cell, p.x, p.y)).or_default().push(i);
        }
        Buckets { cell, map }
    }

    fn key(cell: f64, x: f64, y: f64) -> (i64, i64) {
        ((x / cell).floor() as i64, (y / cell).floor() as i64)
    }

    fn near(&self, x: f64, y: f64) -> impl Iterator<Item = usize> + '_ {
        let (cx, cy) = Self::key(self.cell, x, y);
        (-1..=1)
            .flat_map(move |dx| (-1..=1).map(move |dy| (cx + dx, cy + dy)))
            .filter_map(move |k| self.map.get(&k))
            .flatten()
            .copied()
    }
}

pub fn powder_pointset(model: &PowderModel) -> Result<Vec<PowderPoint>> {
    validate(model)?;
    let base = lattice_disc(model.radius);
    let w = 1.0 / f64::from(model.grains);
    let mut pts = Vec::with_capacity(base.len() * model.grains as usize);
    for j in 1..=model.grains {
        let (s, c) = (f64::from(j) * model.angle).sin_cos();
        for &(x, y) in &base {
            let (x, y) = (x as f64, y as f64);
            pts.push(PowderPoint { x: c * x - s * y, y: s * x + c * y, grain: j, weight: w });
        }
    }
    let buckets = Buckets::new(&pts, 1.0);
    for (i, p) in pts.iter().enumerate() {
        if p.x == 0.0 && p.y == 0.0 {
            continue;
        }
        for j in buckets.near(p.x, p.y) {
            let q = &pts[j];
            if j != i
                && q.grain != p.grain
                && (p.x - q.x).hypot(p.y - q.y) < COINCIDENCE_EPS
            {
                return Err(Error::Coincidence(format!(
                    "grains {} and {} share ({:.6}, {:.6}); choose a different angle",
                    p.grain, q.grain, p.x, p.y
                )));
            }
        }
    }
    Ok(pts)
}

/// Same-grain shells (exact integer `n`) and the binned cross-grain
/// background of the powder autocorrelation, per unit window area.
#[derive(Clone, Debug, PartialEq)]
pub struct PowderDecomposition {
    /// `n -> summed pair weight / area` for same-grain ordered pairs, `n >= 1`.
    pub same_grain: BTreeMap<u64, f64>,
    /// Cross-grain ordered-pair weight / area in bins `[i*dr, (i+1)*dr)`.
    pub cross_grain: Vec<f64>,
    pub bin_width: f64,
    pub r_cut: f64,
    /// Area of the disc the first point of each pair is drawn from.
    pub window_area: f64,
    /// Number of centre points inside the window.
    pub centres: usize,
}

impl PowderDecomposition {
    pub fn same_grain_total(&self) -> f64 {
        self.same_grain.values().sum()
    }

    pub fn cross_grain_total(&self) -> f64 {
        self.cross_grain.iter().sum()
    }
}

/// Ordered pairs `(x, y)`, `x != y`, with `x` in the disc of radius
/// `radius - r_cut` and `|x - y| <= r_cut`. Each pair weighs `1/N^2`.
pub fn powder_decomposition(model: &PowderModel, r_cut: f64, bin_width: f64) -> Result<PowderDecomposition> {
    if !(r_cut > 0.0) || !(bin_width > 0.0) {
        return Err(Error::InvalidInput("r_cut and bin width must be positive".into()));
    }
    let inner = model.radius - r_cut;
    if !(inner > 0.0) {
        return Err(Error::EmptyWindow(format!(
            "radius {} leaves no room for r_cut {}",
            model.radius, r_cut
        )));
    }
    let pts = powder_pointset(model)?;
    let buckets = Buckets::new(&pts, r_cut);
    let n_bins = (r_cut / bin_width).ceil() as usize;
    let w = 1.0 / (f64::from(model.grains) * f64::from(model.grains));
    let grid = lattice_disc(model.radius);
    let per_grain = grid.len();
    let mut same: BTreeMap<u64, u64> = BTreeMap::new();
    let mut cross = vec![0u64; n_bins];
    let mut centres = 0;
    for (i, p) in pts.iter().enumerate() {
        if p.x.hypot(p.y) > inner {
            continue;
        }
        centres += 1;
        for j in buckets.near(p.x, p.y) {
            if j == i {
                continue;
            }
            let q = &pts[j];
            let d = (p.x - q.x).hypot(p.y - q.y);
            if d > r_cut {
                continue;
            }
            if q.grain == p.grain {
                // exact squared distance from the unrotated lattice coordinates
                let (a, b) = (grid[i % per_grain], grid[j % per_grain]);
                let n = ((a.0 - b.0).pow(2) + (a.1 - b.1).pow(2)) as u64;
                *same.entry(n).or_default() += 1;
            } else {
                let bin = ((d / bin_width) as usize).min(n_bins - 1);
                cross[bin] += 1;
            }
        }
    }
    let area = std::f64::consts::PI * inner * inner;
    Ok(PowderDecomposition {
        same_grain: same.into_iter().map(|(n, c)| (n, c as f64 * w / area)).collect(),
        cross_grain: cross.into_iter().map(|c| c as f64 * w / area).collect(),
        bin_width,
        r_cut,
        window_area: area,
        centres,
    })
}

/// A ring of the square-lattice powder pattern.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ring {
    pub n: u64,
    pub r: f64,
    pub intensity: u64,
}

/// Rings at `r = sqrt(n)`, `1 <= n <= n_max`, with intensity `r2(n)`.
pub fn powder_rings(n_max: u64) -> Result<Vec<Ring>> {
    if n_max < 1 {
        return Err(Error::InvalidInput("n_max must be at least 1".into()));
    }
    Ok(shelling(n_max)?
        .into_iter()
        .filter(|e| e.n >= 1)
        .map(|e| Ring { n: e.n, r: e.r, intensity: e.eta_sq })
        .collect())
}
