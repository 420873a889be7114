//! Text file formats: patch files, CSV tables, plot script.
//!
//! Every file begins with `#` comment lines carrying the crate version, an
//! echo of the run configuration and checksums of the input files.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::diffraction::{Comparison, RadialSpectrum};
use crate::error::{Error, Result};
use crate::exact::ExactPoint;
use crate::kite_domino::MatchReport;
use crate::lattice::{PowderDecomposition, Ring};
use crate::stats::{DistanceHistogram, FrequencyEstimate};
use crate::substitution::{Patch, PlacedTriangle};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const PATCH_MAGIC: &str = "pinwheel-patch v1";

/// Comment block written at the top of each output file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Header {
    pub config: Vec<(String, String)>,
    pub inputs: Vec<(String, String)>,
}

impl Header {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.config.push((key.to_string(), value.to_string()));
        self
    }

    /// Records the sha256 of an input file.
    pub fn input(mut self, path: &Path) -> Result<Self> {
        let digest = sha256_file(path)?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        self.inputs.push((name, digest));
        Ok(self)
    }

    pub fn render(&self) -> String {
        let mut out = format!("# pinwheel {VERSION}\n");
        for (k, v) in &self.config {
            let _ = writeln!(out, "# {k}={v}");
        }
        for (name, digest) in &self.inputs {
            let _ = writeln!(out, "# input {name} sha256={digest}");
        }
        out
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = std::fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Formats like C's `%.12g`.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn write_patch(patch: &Patch, header: &Header) -> String {
    let mut out = format!("{PATCH_MAGIC} depth={}\n", patch.depth());
    out.push_str(&header.render());
    for t in patch.tiles() {
        let _ = writeln!(out, "{};{};{};{}", t.r(), t.s(), t.l(), t.chirality());
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_patch(reader: impl Read) -> Result<Patch> {
    let mut lines = BufReader::new(reader).lines();
    let first = lines.next().ok_or_else(|| parse_err(1, "empty file"))??;
    let depth = first
        .strip_prefix(PATCH_MAGIC)
        .and_then(|rest| rest.trim().strip_prefix("depth="))
        .ok_or_else(|| parse_err(1, format!("bad header {first:?}")))?
        .parse::<u32>()
        .map_err(|e| parse_err(1, e.to_string()))?;
    let mut tiles = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(';').collect();
        if parts.len() != 7 {
            return Err(parse_err(lineno, format!("expected 7 fields, found {}", parts.len())));
        }
        let pt = |a: usize| -> Result<ExactPoint> {
            format!("{};{}", parts[a], parts[a + 1])
                .parse()
                .map_err(|e: Error| parse_err(lineno, e.to_string()))
        };
        let chirality: i8 = parts[6].parse().map_err(|_| parse_err(lineno, "bad chirality"))?;
        let t = PlacedTriangle::new(pt(0)?, pt(2)?, pt(4)?, 0).map_err(|e| parse_err(lineno, e.to_string()))?;
        if t.chirality() != chirality {
            return Err(parse_err(lineno, "chirality does not match vertex orientation"));
        }
        t.check_shape().map_err(|e| parse_err(lineno, e))?;
        tiles.push(t);
    }
    Ok(Patch::from_parts(depth, tiles))
}

pub fn read_patch_file(path: &Path) -> Result<Patch> {
    read_patch(std::fs::File::open(path)?)
}

pub fn points_csv(points: &[ExactPoint], header: &Header) -> String {
    let mut out = header.render();
    for p in points {
        let _ = writeln!(out, "{p}");
    }
    out
}

pub fn histogram_csv(h: &DistanceHistogram, depth: Option<u32>, header: &Header) -> String {
    let mut out = header.render();
    let _ = writeln!(out, "# window_area={}", fmt_float(h.window_area));
    let _ = writeln!(out, "# point_count={}", h.point_count);
    if let Some(d) = depth {
        let _ = writeln!(out, "# depth={d}");
    }
    let _ = writeln!(out, "# r_max_sq={}", h.r_max_sq.to_fraction_string());
    out.push_str("s,ell,count\n");
    for (key, count) in &h.entries {
        let s = match key.residual_two_exp() {
            0 => key.s().to_string(),
            r => format!("{}/{}", key.s(), num_bigint::BigInt::from(1) << (2 * r as usize)),
        };
        let _ = writeln!(out, "{s},{},{count}", key.ell());
    }
    out
}

pub fn eta_csv(rows: &[FrequencyEstimate], header: &Header) -> String {
    let mut out = header.render();
    out.push_str("r_sq,pair_count,eta_hat,eta_exact,starred,relative_deviation\n");
    for row in rows {
        let (exact, starred) = match &row.reference {
            Some(r) => (format!("{}/{}", r.eta.numer(), r.eta.denom()), r.starred.to_string()),
            None => (String::new(), String::new()),
        };
        let dev = row.relative_deviation().map(fmt_float).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{exact},{starred},{dev}",
            row.key.to_fraction_string(),
            row.pair_count,
            fmt_float(row.eta_hat)
        );
    }
    out
}

pub fn rings_csv(rings: &[Ring], header: &Header) -> String {
    let mut out = header.render();
    out.push_str("n,r,intensity\n");
    for r in rings {
        let _ = writeln!(out, "{},{},{}", r.n, fmt_float(r.r), r.intensity);
    }
    out
}

pub fn powder_sim_csv(d: &PowderDecomposition, header: &Header) -> String {
    let mut out = header.render();
    let _ = writeln!(out, "# window_area={}", fmt_float(d.window_area));
    let _ = writeln!(out, "# centres={}", d.centres);
    let _ = writeln!(out, "# bin_width={}", fmt_float(d.bin_width));
    out.push_str("kind,key_or_bin,weight\n");
    for (n, w) in &d.same_grain {
        let _ = writeln!(out, "same,{n},{}", fmt_float(*w));
    }
    for (i, w) in d.cross_grain.iter().enumerate() {
        if *w != 0.0 {
            let _ = writeln!(out, "cross,{i},{}", fmt_float(*w));
        }
    }
    out
}

pub fn spectrum_csv(s: &RadialSpectrum, header: &Header) -> String {
    let mut out = header.render();
    let _ = writeln!(out, "# taper={}", s.taper.describe());
    out.push_str("k,intensity\n");
    for (k, i) in s.k.iter().zip(&s.intensity) {
        let _ = writeln!(out, "{},{}", fmt_float(*k), fmt_float(*i));
    }
    out
}

/// Two tables separated by a blank line.
pub fn comparison_csv(c: &Comparison, header: &Header) -> String {
    let mut out = header.render();
    let _ = writeln!(out, "# scale={}", fmt_float(c.scale));
    let _ = writeln!(out, "# first_peak_k={}", fmt_float(c.first_peak.k));
    out.push_str("k,intensity_scaled\n");
    for (k, i) in c.k.iter().zip(&c.scaled) {
        let _ = writeln!(out, "{},{}", fmt_float(*k), fmt_float(*i));
    }
    out.push_str("\nr,bar_height\n");
    for (r, h) in &c.bars {
        let _ = writeln!(out, "{},{}", fmt_float(*r), fmt_float(*h));
    }
    out
}

pub fn pairs_csv(report: &MatchReport, header: &Header) -> String {
    let mut out = header.render();
    let _ = writeln!(out, "# kites={} dominoes={}", report.kite_count, report.domino_count);
    let _ = writeln!(out, "# boundary_unmatched={}", report.boundary_unmatched.len());
    out.push_str("first_index,second_index,kind\n");
    for p in &report.pairs {
        let _ = writeln!(out, "{},{},{}", p.first, p.second, p.kind.as_str());
    }
    out
}

/// Plotting script for a comparison CSV written next to it.
pub fn plot_script(csv_name: &str) -> String {
    format!(
        r##"# pinwheel {VERSION}
# usage: python3 plot_compare.py
import matplotlib.pyplot as plt

spec, bars, cur = [], [], None
for line in open("{csv_name}"):
    line = line.strip()
    if not line or line.startswith("#"):
        continue
    if line == "k,intensity_scaled":
        cur = spec
        continue
    if line == "r,bar_height":
        cur = bars
        continue
    cur.append(tuple(map(float, line.split(","))))

fig, (top, bottom) = plt.subplots(2, 1, sharex=True)
top.plot([k for k, _ in spec], [i for _, i in spec], lw=0.8)
top.set_ylabel("pinwheel (scaled)")
bottom.vlines([r for r, _ in bars], 0, [h for _, h in bars])
bottom.set_ylabel("square lattice powder")
bottom.set_xlabel("k")
fig.savefig("compare.png", dpi=150)
"##
    )
}
