//! Radial diffraction intensity from a distance histogram.
//!
//! A ring of radius `r` has the radial Fourier transform `J0(2 pi r k)`, so a
//! circularly symmetric autocorrelation `sum eta(r) mu_r` transforms shell by
//! shell. Truncating the sum at `r_max` and tapering it gives a numerical
//! approximation of the radial intensity `I(k)`.

use std::f64::consts::{FRAC_PI_4, PI};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::Ring;
use crate::stats::DistanceHistogram;

/// Largest |x| accepted by [`bessel_j0`].
pub const BESSEL_MAX_ARG: f64 = 1e6;

/// Largest wavenumber accepted by [`radial_intensity`].
pub const K_LIMIT: f64 = 16.0;

/// Default lower cut-off for peak detection (the central peak is suppressed).
pub const DEFAULT_K_MIN: f64 = 0.25;

const SERIES_RANGE: f64 = 8.0;

// Hankel asymptotic expansion, rational forms from the Cephes library.
const PP: [f64; 7] = [
    7.969_367_292_973_471e-4,
    8.283_523_921_074_408e-2,
    1.239_533_716_464_143,
    5.447_250_030_587_687,
    8.747_165_001_998_17,
    5.303_240_382_353_949,
    1.0,
];
const PQ: [f64; 7] = [
    9.244_088_105_588_637e-4,
    8.562_884_743_544_745e-2,
    1.253_527_439_010_589_5,
    5.470_977_403_304_171,
    8.761_908_832_370_695,
    5.306_052_882_353_947,
    1.0,
];
const QP: [f64; 8] = [
    -1.136_638_388_984_691_6e-2,
    -1.282_527_186_705_093_1,
    -1.955_395_442_577_359_7e1,
    -9.320_601_521_237_683e1,
    -1.776_811_679_804_880_6e2,
    -1.470_775_051_549_511_8e2,
    -5.141_053_267_665_993e1,
    -6.050_143_506_007_285,
];
const QQ: [f64; 7] = [
    6.431_782_561_181_78e1,
    8.564_300_259_769_806e2,
    3.882_401_836_054_016_3e3,
    7.240_467_741_956_525e3,
    5.930_727_011_873_169e3,
    2.062_093_316_603_278_3e3,
    2.420_057_402_402_914e2,
];

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

fn polevl(x: f64, coef: &[f64]) -> f64 {
    coef.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// Like [`polevl`] with an implicit leading coefficient of 1.
fn p1evl(x: f64, coef: &[f64]) -> f64 {
    coef.iter().fold(1.0, |acc, &c| acc * x + c)
}

/// Maclaurin series; the terms alternate and decrease once `k^2 > x^2/4`,
/// so the first neglected term bounds the truncation error.
fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * k);
        sum += term;
        if k * k > q && term.abs() < 1e-18 {
            return sum;
        }
    }
}

fn j0_hankel(x: f64) -> f64 {
    let w = 5.0 / x;
    let q = 25.0 / (x * x);
    let p = polevl(q, &PP) / polevl(q, &PQ);
    let q = polevl(q, &QP) / p1evl(q, &QQ);
    let xn = x - FRAC_PI_4;
    (p * xn.cos() - w * q * xn.sin()) * SQRT_2_OVER_PI / x.sqrt()
}

fn j0_unchecked(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_RANGE {
        j0_series(x)
    } else {
        j0_hankel(x)
    }
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("J0 of non-finite {x}")));
    }
    if x.abs() > BESSEL_MAX_ARG {
        return Err(Error::InvalidInput(format!("J0 argument {x} out of range")));
    }
    Ok(j0_unchecked(x))
}

/// Taper applied to shells as a function of `u = r / r_max`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum Taper {
    None,
    #[default]
    Bartlett,
    Gaussian(f64),
}

impl Taper {
    pub fn weight(&self, u: f64) -> f64 {
        match *self {
            Taper::None => 1.0,
            Taper::Bartlett => (1.0 - u).max(0.0),
            Taper::Gaussian(sigma) => (-0.5 * (u / sigma).powi(2)).exp(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Taper::None => "none".into(),
            Taper::Bartlett => "bartlett".into(),
            Taper::Gaussian(s) => format!("gaussian(sigma={s})"),
        }
    }
}

/// Sampled radial intensity.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialSpectrum {
    pub k: Vec<f64>,
    pub intensity: Vec<f64>,
    pub taper: Taper,
    pub window_area: f64,
    /// `(sum of tapered counts) / area`, the value at `k = 0` and a bound
    /// on `|I(k)|`.
    pub total_weight: f64,
}

/// `k_min, k_min + step, ...` up to and including `k_max` (within half a step).
pub fn k_grid(k_min: f64, k_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(k_max >= k_min) {
        return Err(Error::InvalidInput(format!("bad k grid [{k_min}, {k_max}] step {step}")));
    }
    let n = ((k_max - k_min) / step + 0.5).floor() as usize;
    Ok((0..=n).map(|i| k_min + i as f64 * step).collect())
}

/// `I(k) = (1/area) sum_r count(r) w(r / r_max) J0(2 pi r k)` over the
/// nonzero keys of `h`, in ascending key order. The `r = 0` term and the
/// mean-density background are left out, which suppresses the central
/// peak.
pub fn radial_intensity(h: &DistanceHistogram, k: &[f64], taper: Taper) -> Result<RadialSpectrum> {
    if h.entries.keys().all(|key| key.is_zero()) {
        return Err(Error::InvalidInput("empty histogram".into()));
    }
    if k.is_empty() || k.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("k grid must be non-empty and strictly increasing".into()));
    }
    if k.iter().any(|&v| !(0.0..=K_LIMIT).contains(&v)) {
        return Err(Error::InvalidInput(format!("k outside [0, {K_LIMIT}]")));
    }
    let r_max = h.r_max_sq.radius_f64();
    let terms: Vec<(f64, f64)> = h
        .entries
        .iter()
        .filter(|(key, _)| !key.is_zero())
        .map(|(key, &c)| {
            let r = key.radius_f64();
            (2.0 * PI * r, c as f64 * taper.weight(r / r_max))
        })
        .collect();
    let area = h.window_area;
    let intensity = k
        .par_iter()
        .map(|&kk| terms.iter().map(|&(tr, w)| w * j0_unchecked(tr * kk)).sum::<f64>() / area)
        .collect();
    Ok(RadialSpectrum {
        k: k.to_vec(),
        intensity,
        taper,
        window_area: area,
        total_weight: terms.iter().map(|t| t.1).sum::<f64>() / area,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub k: f64,
    pub height: f64,
    pub prominence: f64,
    /// Value at the nearest local minimum on each side.
    pub left_trough: f64,
    pub right_trough: f64,
}

pub type PeakTable = Vec<Peak>;

/// Strict local maxima with `k >= k_min` and topographic prominence at
/// least `prominence`.
pub fn detect_peaks(s: &RadialSpectrum, k_min: f64, prominence: f64) -> PeakTable {
    let y = &s.intensity;
    let n = y.len();
    let mut out = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if s.k[i] < k_min || !(y[i] > y[i - 1] && y[i] > y[i + 1]) {
            continue;
        }
        let mut l = i;
        while l > 0 && y[l - 1] <= y[l] {
            l -= 1;
        }
        let mut r = i;
        while r + 1 < n && y[r + 1] <= y[r] {
            r += 1;
        }
        let base = |range: &mut dyn Iterator<Item = usize>| {
            let mut m = y[i];
            for j in range {
                if y[j] > y[i] {
                    break;
                }
                m = m.min(y[j]);
            }
            m
        };
        let left_base = base(&mut (0..i).rev());
        let right_base = base(&mut (i + 1..n));
        let prom = y[i] - left_base.max(right_base);
        if prom >= prominence {
            out.push(Peak {
                index: i,
                k: s.k[i],
                height: y[i],
                prominence: prom,
                left_trough: y[l],
                right_trough: y[r],
            });
        }
    }
    out
}

/// Spectrum rescaled so its first peak matches the `n = 1` powder ring,
/// together with the ring bars.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub k: Vec<f64>,
    pub scaled: Vec<f64>,
    /// `(r, eta)` bars of the square-lattice powder pattern.
    pub bars: Vec<(f64, f64)>,
    pub first_peak: Peak,
    pub scale: f64,
}

pub fn overlay_powder(s: &RadialSpectrum, rings: &[Ring]) -> Result<Comparison> {
    let first_ring = rings
        .iter()
        .find(|r| r.n == 1)
        .ok_or_else(|| Error::MissingPeak("rings do not include n = 1".into()))?;
    let target = first_ring.intensity as f64;
    let first = detect_peaks(s, DEFAULT_K_MIN, 0.0)
        .into_iter()
        .filter(|p| (0.9..=1.1).contains(&p.k) && p.height > 0.0)
        .max_by(|a, b| a.height.total_cmp(&b.height))
        .ok_or_else(|| Error::MissingPeak("no positive peak in [0.9, 1.1]".into()))?;
    let h = first.height;
    Ok(Comparison {
        k: s.k.clone(),
        scaled: s.intensity.iter().map(|&v| v * target / h).collect(),
        bars: rings.iter().map(|r| (r.r, r.intensity as f64)).collect(),
        scale: target / h,
        first_peak: first,
    })
}
