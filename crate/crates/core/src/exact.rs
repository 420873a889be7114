//! Exact arithmetic over the ring of rationals whose denominators are
//! products of powers of 2 and 5.
//!
//! Every coordinate that appears in a pinwheel patch lives in this ring:
//! subdivision introduces halves and fifths, control points add quarters.
//! Values are kept in a normalized `num / (2^a * 5^b)` form so that
//! equality and hashing are structural.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

fn pow5(e: u32) -> BigInt {
    BigInt::from(5u32).pow(e)
}

/// `num / (2^two_exp * 5^five_exp)`, always normalized.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    num: BigInt,
    two_exp: u32,
    five_exp: u32,
}

impl ExactScalar {
    /// Builds the normalized representative of `num / (2^two_exp * 5^five_exp)`.
    pub fn new(num: impl Into<BigInt>, two_exp: u32, five_exp: u32) -> Self {
        let mut num = num.into();
        if num.is_zero() {
            return Self::zero();
        }
        let mut two_exp = two_exp;
        let mut five_exp = five_exp;
        if two_exp > 0 {
            let tz = num.trailing_zeros().unwrap_or(0).min(u64::from(two_exp)) as u32;
            if tz > 0 {
                num >>= tz;
                two_exp -= tz;
            }
        }
        let five = BigInt::from(5u32);
        while five_exp > 0 {
            let (q, r) = num.div_rem(&five);
            if !r.is_zero() {
                break;
            }
            num = q;
            five_exp -= 1;
        }
        ExactScalar { num, two_exp, five_exp }
    }

    pub fn zero() -> Self {
        ExactScalar { num: BigInt::zero(), two_exp: 0, five_exp: 0 }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        ExactScalar { num: BigInt::from(n), two_exp: 0, five_exp: 0 }
    }

    /// `n / 2^two_exp / 5^five_exp` for a machine integer numerator.
    pub fn frac(n: i64, two_exp: u32, five_exp: u32) -> Self {
        Self::new(n, two_exp, five_exp)
    }

    pub fn num(&self) -> &BigInt {
        &self.num
    }

    pub fn two_exp(&self) -> u32 {
        self.two_exp
    }

    pub fn five_exp(&self) -> u32 {
        self.five_exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.two_exp == 0 && self.five_exp == 0
    }

    pub fn signum(&self) -> i8 {
        match self.num.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        ExactScalar { num: self.num.abs(), ..self.clone() }
    }

    /// Division by `2^k`.
    pub fn div_pow2(&self, k: u32) -> Self {
        Self::new(self.num.clone(), self.two_exp + k, self.five_exp)
    }

    /// Division by `5^k`.
    pub fn div_pow5(&self, k: u32) -> Self {
        Self::new(self.num.clone(), self.two_exp, self.five_exp + k)
    }

    pub fn mul_int(&self, k: i64) -> Self {
        Self::new(&self.num * k, self.two_exp, self.five_exp)
    }

    /// Numerator rescaled to the common denominator `2^two_exp * 5^five_exp`.
    /// Both targets must be at least the scalar's own exponents.
    pub fn scaled_numerator(&self, two_exp: u32, five_exp: u32) -> BigInt {
        debug_assert!(two_exp >= self.two_exp && five_exp >= self.five_exp);
        (&self.num << (two_exp - self.two_exp)) * pow5(five_exp - self.five_exp)
    }

    pub fn to_f64(&self) -> f64 {
        let n = self.num.to_f64().unwrap_or(f64::NAN);
        n / 2f64.powi(self.two_exp as i32) / 5f64.powi(self.five_exp as i32)
    }

    /// Parses an `n:a:b` token, a plain integer, a terminating decimal
    /// (`2.5`), or a fraction `p/q` whose denominator has no prime factors
    /// other than 2 and 5.
    pub fn parse_number(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains(':') {
            return s.parse();
        }
        let bad = || Error::InvalidInput(format!("not an exact 2,5-adic number: {s:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let mut q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            let mut p = p;
            if q.is_negative() {
                q = -q;
                p = -p;
            }
            let mut a = 0;
            let mut b = 0;
            while q.is_even() {
                q >>= 1;
                a += 1;
            }
            let five = BigInt::from(5);
            while (&q % &five).is_zero() {
                q /= &five;
                b += 1;
            }
            if !q.is_one() {
                return Err(bad());
            }
            return Ok(Self::new(p, a, b));
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let neg = int.starts_with('-');
            let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
            let mut n: BigInt = digits.parse().map_err(|_| bad())?;
            if neg {
                n = -n;
            }
            let k = frac.len() as u32;
            return Ok(Self::new(n, k, k));
        }
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Self::new(n, 0, 0))
    }
}

impl Default for ExactScalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for ExactScalar {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.num, self.two_exp, self.five_exp)
    }
}

impl FromStr for ExactScalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut it = s.trim().split(':');
        let bad = || Error::InvalidInput(format!("bad scalar token {s:?}"));
        let num: BigInt = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let a: u32 = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let b: u32 = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if it.next().is_some() {
            return Err(bad());
        }
        Ok(Self::new(num, a, b))
    }
}

impl<'a> Add<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;

    fn add(self, rhs: &ExactScalar) -> ExactScalar {
        if self.two_exp == rhs.two_exp && self.five_exp == rhs.five_exp {
            return ExactScalar::new(&self.num + &rhs.num, self.two_exp, self.five_exp);
        }
        let a = self.two_exp.max(rhs.two_exp);
        let b = self.five_exp.max(rhs.five_exp);
        ExactScalar::new(self.scaled_numerator(a, b) + rhs.scaled_numerator(a, b), a, b)
    }
}

impl<'a> Sub<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;

    fn sub(self, rhs: &ExactScalar) -> ExactScalar {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;

    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        ExactScalar::new(
            &self.num * &rhs.num,
            self.two_exp + rhs.two_exp,
            self.five_exp + rhs.five_exp,
        )
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;

    fn neg(self) -> ExactScalar {
        ExactScalar { num: -&self.num, two_exp: self.two_exp, five_exp: self.five_exp }
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;

    fn neg(self) -> ExactScalar {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident, $t:ty) => {
        impl $tr<$t> for $t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a $t> for $t {
            type Output = $t;
            fn $m(self, rhs: &'a $t) -> $t {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add, ExactScalar);
forward_owned!(Sub, sub, ExactScalar);
forward_owned!(Mul, mul, ExactScalar);

impl PartialOrd for ExactScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

/// A point of the plane with exact coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ExactPoint {
    pub x: ExactScalar,
    pub y: ExactScalar,
}

impl ExactPoint {
    pub fn new(x: ExactScalar, y: ExactScalar) -> Self {
        ExactPoint { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        ExactPoint { x: x.into(), y: y.into() }
    }

    pub fn origin() -> Self {
        Self::default()
    }

    pub fn is_origin(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn scale(&self, k: &ExactScalar) -> Self {
        ExactPoint { x: &self.x * k, y: &self.y * k }
    }

    pub fn div_pow2(&self, k: u32) -> Self {
        ExactPoint { x: self.x.div_pow2(k), y: self.y.div_pow2(k) }
    }

    pub fn dot(&self, other: &Self) -> ExactScalar {
        &self.x * &other.x + &self.y * &other.y
    }

    /// z-component of the cross product `self x other`.
    pub fn cross(&self, other: &Self) -> ExactScalar {
        &self.x * &other.y - &self.y * &other.x
    }

    pub fn norm_sq(&self) -> ExactScalar {
        self.dot(self)
    }

    /// Multiplication by the Gaussian integer `a + b i`.
    pub fn mul_gaussian(&self, a: i64, b: i64) -> Self {
        ExactPoint {
            x: self.x.mul_int(a) - self.y.mul_int(b),
            y: self.x.mul_int(b) + self.y.mul_int(a),
        }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }

    /// Largest power-of-two and power-of-five exponents over both coordinates.
    pub fn denominator_exps(&self) -> (u32, u32) {
        (self.x.two_exp().max(self.y.two_exp()), self.x.five_exp().max(self.y.five_exp()))
    }
}

impl<'a> Add<&'a ExactPoint> for &'a ExactPoint {
    type Output = ExactPoint;

    fn add(self, rhs: &ExactPoint) -> ExactPoint {
        ExactPoint { x: &self.x + &rhs.x, y: &self.y + &rhs.y }
    }
}

impl<'a> Sub<&'a ExactPoint> for &'a ExactPoint {
    type Output = ExactPoint;

    fn sub(self, rhs: &ExactPoint) -> ExactPoint {
        ExactPoint { x: &self.x - &rhs.x, y: &self.y - &rhs.y }
    }
}

impl Neg for &ExactPoint {
    type Output = ExactPoint;

    fn neg(self) -> ExactPoint {
        ExactPoint { x: -&self.x, y: -&self.y }
    }
}

forward_owned!(Add, add, ExactPoint);
forward_owned!(Sub, sub, ExactPoint);

impl fmt::Display for ExactPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};{}", self.x, self.y)
    }
}

impl FromStr for ExactPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (x, y) = s
            .trim()
            .split_once(';')
            .ok_or_else(|| Error::InvalidInput(format!("bad point token {s:?}")))?;
        Ok(ExactPoint { x: x.parse()?, y: y.parse()? })
    }
}

/// Reduced squared distance `s / (5^ell * 4^residual_two_exp)`.
///
/// `5 ∤ s` whenever `ell > 0`, and `4 ∤ s` whenever `residual_two_exp > 0`,
/// so the triple is canonical. Zero is `(0, 0, 0)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DistanceKey {
    s: BigInt,
    ell: u32,
    residual_two_exp: u32,
}

impl DistanceKey {
    pub fn zero() -> Self {
        DistanceKey { s: BigInt::zero(), ell: 0, residual_two_exp: 0 }
    }

    /// Key for the squared distance `s / 5^ell`.
    pub fn new(s: u64, ell: u32) -> Self {
        Self::from_scalar(&ExactScalar::new(s, 0, ell)).expect("non-negative")
    }

    /// Key for a non-negative exact value.
    pub fn from_scalar(v: &ExactScalar) -> Result<Self> {
        if v.signum() < 0 {
            return Err(Error::InvalidInput("negative squared distance".into()));
        }
        if v.is_zero() {
            return Ok(Self::zero());
        }
        let mut s = v.num().clone();
        let mut a = v.two_exp();
        if a % 2 == 1 {
            s <<= 1;
            a += 1;
        }
        Ok(DistanceKey { s, ell: v.five_exp(), residual_two_exp: a / 2 })
    }

    /// Key for `d / (4^two_pow * 25^five_pow)`, the form produced by
    /// integer-embedded coordinates.
    pub fn from_scaled(d: impl Into<BigInt>, two_pow: u32, five_pow: u32) -> Self {
        let v = ExactScalar::new(d.into(), 2 * two_pow, 2 * five_pow);
        Self::from_scalar(&v).expect("squared lengths are non-negative")
    }

    pub fn s(&self) -> &BigInt {
        &self.s
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn residual_two_exp(&self) -> u32 {
        self.residual_two_exp
    }

    pub fn is_zero(&self) -> bool {
        self.s.is_zero()
    }

    pub fn to_scalar(&self) -> ExactScalar {
        ExactScalar::new(self.s.clone(), 2 * self.residual_two_exp, self.ell)
    }

    pub fn value_f64(&self) -> f64 {
        self.to_scalar().to_f64()
    }

    pub fn radius_f64(&self) -> f64 {
        self.value_f64().sqrt()
    }

    /// Human-readable rational form, e.g. `8/5`, `49/25`, `2`.
    pub fn to_fraction_string(&self) -> String {
        let v = self.to_scalar();
        let den = (BigInt::one() << v.two_exp()) * pow5(v.five_exp());
        if den.is_one() {
            v.num().to_string()
        } else {
            format!("{}/{}", v.num(), den)
        }
    }

    /// `floor(value * 4^two_pow * 25^five_pow)`.
    pub fn floor_scaled(&self, two_pow: u32, five_pow: u32) -> BigInt {
        let v = self.to_scalar();
        let num = (v.num() << (2 * two_pow)) * pow5(2 * five_pow);
        let den = (BigInt::one() << v.two_exp()) * pow5(v.five_exp());
        num.div_floor(&den)
    }
}

impl fmt::Display for DistanceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_fraction_string())
    }
}

impl PartialOrd for DistanceKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DistanceKey {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = (&self.s << (2 * other.residual_two_exp)) * pow5(other.ell);
        let rhs = (&other.s << (2 * self.residual_two_exp)) * pow5(self.ell);
        lhs.cmp(&rhs)
    }
}

impl FromStr for DistanceKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_scalar(&ExactScalar::parse_number(s)?)
    }
}

pub fn squared_distance(p: &ExactPoint, q: &ExactPoint) -> DistanceKey {
    DistanceKey::from_scalar(&(p - q).norm_sq()).expect("norms are non-negative")
}

/// Signed valuations of a point, read as a complex number, at the two
/// Gaussian primes above 5.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GaussianValuation {
    /// Valuation at `2 + i`.
    pub v_plus: i64,
    /// Valuation at `2 - i`.
    pub v_minus: i64,
}

/// Number of times `(2 + sign*i)` divides the Gaussian integer `x + iy`.
fn gaussian_prime_valuation(mut x: BigInt, mut y: BigInt, sign: i64) -> i64 {
    let five = BigInt::from(5);
    let mut v = 0;
    loop {
        // (x + iy) / (2 + s i) = (x + iy)(2 - s i) / 5
        let re: BigInt = &x * 2 + &y * sign;
        let im: BigInt = &y * 2 - &x * sign;
        if !(&re % &five).is_zero() || !(&im % &five).is_zero() {
            return v;
        }
        x = re / &five;
        y = im / &five;
        v += 1;
    }
}

pub fn gaussian_valuations(p: &ExactPoint) -> Result<GaussianValuation> {
    if p.is_origin() {
        return Err(Error::ZeroPoint);
    }
    let (a, b) = p.denominator_exps();
    let x = p.x.scaled_numerator(a, b);
    let y = p.y.scaled_numerator(a, b);
    let b = i64::from(b);
    Ok(GaussianValuation {
        v_plus: gaussian_prime_valuation(x.clone(), y.clone(), 1) - b,
        v_minus: gaussian_prime_valuation(x, y, -1) - b,
    })
}

/// Rotation by `theta = 2 arctan(1/2)` applied `n` times (negative `n`
/// rotates backwards). `R_theta = (1/5) [[3, -4], [4, 3]]`.
pub fn rotate_theta(p: &ExactPoint, n: i64) -> ExactPoint {
    let mut q = p.clone();
    let (c, s) = if n >= 0 { (3, 4) } else { (3, -4) };
    for _ in 0..n.unsigned_abs() {
        q = ExactPoint {
            x: (q.x.mul_int(c) - q.y.mul_int(s)).div_pow5(1),
            y: (q.x.mul_int(s) + q.y.mul_int(c)).div_pow5(1),
        };
    }
    q
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RotationMembership {
    /// `p` lies in `R_{n theta} Z^2` exactly for `lo <= n <= hi`.
    Member { lo: i64, hi: i64 },
    NotMember,
}

impl RotationMembership {
    pub fn is_member(&self) -> bool {
        matches!(self, RotationMembership::Member { .. })
    }

    pub fn contains(&self, n: i64) -> bool {
        match *self {
            RotationMembership::Member { lo, hi } => lo <= n && n <= hi,
            RotationMembership::NotMember => false,
        }
    }
}

/// All `n` with `p ∈ R_{n theta} Z^2`, derived from the Gaussian valuations
/// and then confirmed by applying `R_theta^{-n}` exactly.
pub fn rotation_membership(p: &ExactPoint) -> Result<RotationMembership> {
    let v = gaussian_valuations(p)?;
    if p.x.two_exp() > 0 || p.y.two_exp() > 0 || v.v_plus + v.v_minus < 0 {
        return Ok(RotationMembership::NotMember);
    }
    let (lo, hi) = (-v.v_minus, v.v_plus);
    for n in lo..=hi {
        let q = rotate_theta(p, -n);
        if !(q.x.is_integer() && q.y.is_integer()) {
            return Err(Error::Corruption(format!(
                "valuation witness n={n} for {p} does not rotate into Z^2"
            )));
        }
    }
    Ok(RotationMembership::Member { lo, hi })
}

/// Sign of `(b - a) x (c - a)`.
pub fn orientation(a: &ExactPoint, b: &ExactPoint, c: &ExactPoint) -> i8 {
    (b - a).cross(&(c - a)).signum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Containment {
    Inside,
    Boundary,
    Outside,
}

pub fn point_in_triangle(p: &ExactPoint, t: [&ExactPoint; 3]) -> Result<Containment> {
    let o = orientation(t[0], t[1], t[2]);
    if o == 0 {
        return Err(Error::DegenerateTriangle);
    }
    let mut on_edge = false;
    for i in 0..3 {
        let s = orientation(t[i], t[(i + 1) % 3], p) * o;
        if s < 0 {
            return Ok(Containment::Outside);
        }
        on_edge |= s == 0;
    }
    Ok(if on_edge { Containment::Boundary } else { Containment::Inside })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sc(n: i64, a: u32, b: u32) -> ExactScalar {
        ExactScalar::new(n, a, b)
    }

    fn pt(x: ExactScalar, y: ExactScalar) -> ExactPoint {
        ExactPoint::new(x, y)
    }

    #[test]
    fn normalize_examples() {
        let v = sc(10, 0, 1);
        assert_eq!((v.num().clone(), v.two_exp(), v.five_exp()), (BigInt::from(2), 0, 0));
        let v = sc(4, 2, 0);
        assert_eq!((v.num().clone(), v.two_exp(), v.five_exp()), (BigInt::from(1), 0, 0));
        let v = sc(15, 1, 2);
        assert_eq!((v.num().clone(), v.two_exp(), v.five_exp()), (BigInt::from(3), 1, 1));
        assert_eq!(sc(0, 3, 4), ExactScalar::zero());
    }

    #[test]
    fn token_round_trip() {
        let v = sc(-7, 3, 2);
        assert_eq!(v.to_string(), "-7:3:2");
        assert_eq!("-7:3:2".parse::<ExactScalar>().unwrap(), v);
        let p = pt(sc(1, 1, 0), sc(-3, 0, 2));
        assert_eq!(p.to_string().parse::<ExactPoint>().unwrap(), p);
    }

    #[test]
    fn parse_number_forms() {
        assert_eq!(ExactScalar::parse_number("2.5").unwrap(), sc(5, 1, 0));
        assert_eq!(ExactScalar::parse_number("8/5").unwrap(), sc(8, 0, 1));
        assert_eq!(ExactScalar::parse_number("-3").unwrap(), sc(-3, 0, 0));
        assert_eq!(ExactScalar::parse_number("1:2:0").unwrap(), sc(1, 2, 0));
        assert!(ExactScalar::parse_number("1/3").is_err());
        assert!(ExactScalar::parse_number("abc").is_err());
    }

    #[test]
    fn squared_distance_examples() {
        let o = ExactPoint::origin();
        assert_eq!(squared_distance(&o, &ExactPoint::from_ints(1, 0)), DistanceKey::new(1, 0));
        let k = squared_distance(&o, &pt(sc(2, 0, 1), sc(-1, 0, 1)));
        assert_eq!((k.s().clone(), k.ell()), (BigInt::from(1), 1));
        let k = squared_distance(&o, &pt(sc(3, 0, 1), sc(4, 0, 1)));
        assert_eq!((k.s().clone(), k.ell()), (BigInt::from(1), 0));
        assert!(squared_distance(&o, &o).is_zero());
    }

    #[test]
    fn distance_key_handles_odd_two_powers() {
        // (1/2, 1/2) has squared length 1/2 = 2/4.
        let k = squared_distance(&ExactPoint::origin(), &pt(sc(1, 1, 0), sc(1, 1, 0)));
        assert_eq!((k.s().clone(), k.ell(), k.residual_two_exp()), (BigInt::from(2), 0, 1));
        assert_eq!(k.to_fraction_string(), "1/2");
        assert!((k.value_f64() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn distance_key_order_and_floor() {
        let a = DistanceKey::new(1, 1);
        let b = DistanceKey::new(1, 0);
        let c = DistanceKey::new(8, 1);
        assert!(a < b && b < c);
        assert_eq!(c.floor_scaled(0, 1), BigInt::from(40));
        assert_eq!("49/25".parse::<DistanceKey>().unwrap(), DistanceKey::new(49, 2));
    }

    #[test]
    fn valuation_examples() {
        let v = gaussian_valuations(&ExactPoint::from_ints(1, 0)).unwrap();
        assert_eq!((v.v_plus, v.v_minus), (0, 0));
        let v = gaussian_valuations(&pt(sc(3, 0, 1), sc(4, 0, 1))).unwrap();
        assert_eq!((v.v_plus, v.v_minus), (1, -1));
        let v = gaussian_valuations(&pt(sc(1, 0, 1), sc(2, 0, 1))).unwrap();
        assert_eq!((v.v_plus, v.v_minus), (-1, 0));
        assert!(matches!(gaussian_valuations(&ExactPoint::origin()), Err(Error::ZeroPoint)));
    }

    #[test]
    fn membership_examples() {
        let m = rotation_membership(&ExactPoint::from_ints(1, 0)).unwrap();
        assert!(m.contains(0));
        let p = pt(sc(3, 0, 1), sc(4, 0, 1));
        assert_eq!(rotation_membership(&p).unwrap(), RotationMembership::Member { lo: 1, hi: 1 });
        assert_eq!(rotate_theta(&p, -1), ExactPoint::from_ints(1, 0));
        let q = pt(sc(1, 0, 1), sc(2, 0, 1));
        assert_eq!(rotation_membership(&q).unwrap(), RotationMembership::NotMember);
        // Integer with 2-adic denominator is never a lattice point.
        let h = pt(sc(1, 1, 0), ExactScalar::zero());
        assert_eq!(rotation_membership(&h).unwrap(), RotationMembership::NotMember);
    }

    #[test]
    fn membership_of_five_is_wide() {
        // 5 = (2+i)(2-i) lies in R_{n theta} Z^2 for n in {-1, 0, 1}.
        let m = rotation_membership(&ExactPoint::from_ints(5, 0)).unwrap();
        assert_eq!(m, RotationMembership::Member { lo: -1, hi: 1 });
    }

    #[test]
    fn orientation_examples() {
        let o = ExactPoint::origin();
        let e1 = ExactPoint::from_ints(1, 0);
        let e2 = ExactPoint::from_ints(0, 1);
        assert_eq!(orientation(&o, &e1, &e2), 1);
        assert_eq!(orientation(&o, &e2, &e1), -1);
        assert_eq!(orientation(&o, &e1, &ExactPoint::from_ints(2, 0)), 0);
    }

    #[test]
    fn point_in_triangle_examples() {
        let t = [ExactPoint::origin(), ExactPoint::from_ints(2, 0), ExactPoint::from_ints(0, 1)];
        let tr = [&t[0], &t[1], &t[2]];
        let half = sc(1, 1, 0);
        assert_eq!(point_in_triangle(&pt(half.clone(), half), tr).unwrap(), Containment::Inside);
        assert_eq!(point_in_triangle(&t[0], tr).unwrap(), Containment::Boundary);
        assert_eq!(
            point_in_triangle(&ExactPoint::from_ints(5, 5), tr).unwrap(),
            Containment::Outside
        );
        let flat = [ExactPoint::origin(), ExactPoint::from_ints(1, 0), ExactPoint::from_ints(2, 0)];
        assert!(point_in_triangle(&t[0], [&flat[0], &flat[1], &flat[2]]).is_err());
    }

    fn arb_scalar() -> impl Strategy<Value = ExactScalar> {
        (-10_000i64..10_000, 0u32..5, 0u32..5).prop_map(|(n, a, b)| ExactScalar::new(n, a, b))
    }

    fn arb_point() -> impl Strategy<Value = ExactPoint> {
        (arb_scalar(), arb_scalar()).prop_map(|(x, y)| ExactPoint::new(x, y))
    }

    fn five_adic_valuation(v: &ExactScalar) -> i64 {
        let mut n = v.num().clone();
        let mut k = 0;
        let five = BigInt::from(5);
        while (&n % &five).is_zero() {
            n /= &five;
            k += 1;
        }
        k - i64::from(v.five_exp())
    }

    proptest! {
        #[test]
        fn normalize_idempotent(n in -100_000i64..100_000, a in 0u32..6, b in 0u32..6) {
            let v = ExactScalar::new(n, a, b);
            let w = ExactScalar::new(v.num().clone(), v.two_exp(), v.five_exp());
            prop_assert_eq!(&v, &w);
            if v.two_exp() > 0 { prop_assert!(v.num().is_odd()); }
            if v.five_exp() > 0 { prop_assert!(!(v.num() % 5u32).is_zero()); }
        }

        #[test]
        fn ring_laws(a in arb_scalar(), b in arb_scalar(), c in arb_scalar()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&(&a - &b) + &b, a.clone());
        }

        #[test]
        fn valuation_sum_is_norm_valuation(p in arb_point()) {
            prop_assume!(!p.is_origin());
            let v = gaussian_valuations(&p).unwrap();
            prop_assert_eq!(v.v_plus + v.v_minus, five_adic_valuation(&p.norm_sq()));
        }

        #[test]
        fn membership_witnesses_rotate_into_lattice(p in arb_point()) {
            prop_assume!(!p.is_origin());
            if let RotationMembership::Member { lo, hi } = rotation_membership(&p).unwrap() {
                for n in lo..=hi {
                    let q = rotate_theta(&p, -n);
                    prop_assert!(q.x.is_integer() && q.y.is_integer());
                }
            }
        }

        #[test]
        fn rotated_lattice_points_are_members(x in -50i64..50, y in -50i64..50, n in -4i64..4) {
            prop_assume!(x != 0 || y != 0);
            let p = rotate_theta(&ExactPoint::from_ints(x, y), n);
            prop_assert!(rotation_membership(&p).unwrap().contains(n));
        }

        #[test]
        fn squared_distance_translation_invariant(p in arb_point(), q in arb_point(), t in arb_point()) {
            prop_assert_eq!(squared_distance(&(&p + &t), &(&q + &t)), squared_distance(&p, &q));
            prop_assert_eq!(squared_distance(&p, &q), squared_distance(&q, &p));
        }

        #[test]
        fn distance_key_matches_f64(p in arb_point(), q in arb_point()) {
            let k = squared_distance(&p, &q);
            let (px, py) = p.to_f64();
            let (qx, qy) = q.to_f64();
            let d = (px - qx).powi(2) + (py - qy).powi(2);
            prop_assert!((k.value_f64() - d).abs() <= 1e-9 * d.max(1.0));
        }
    }
}
