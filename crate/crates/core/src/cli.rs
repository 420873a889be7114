//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation or property failure,
//! 3 resource guard tripped. Data goes to files, diagnostics to stderr.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::diffraction::{detect_peaks, k_grid, overlay_powder, radial_intensity, Taper, DEFAULT_K_MIN};
use crate::error::{Error, Result};
use crate::exact::DistanceKey;
use crate::formats::{self, Header};
use crate::kite_domino::{kd_stats, pair_tiles};
use crate::lattice::{powder_decomposition, powder_rings, PowderModel};
use crate::stats::{
    control_points, eta_estimate, pair_histogram, proposition_checks, Region, Window, DEFAULT_MARGIN,
};
use crate::substitution::{self, generate_patch, verify_all_subdivisions, Patch};

pub const WORKERS_ENV: &str = "PINWHEEL_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "pinwheel", version, about = "Exact pinwheel tilings, pair statistics and radial diffraction")]
pub struct Cli {
    /// Worker threads (default: $PINWHEEL_WORKERS, else all cores). Never affects output.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Print the seed triangle and control-point convention to stderr.
    #[arg(long)]
    seed_info: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a patch file.
    Generate {
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the control points of a patch.
    Points {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the exact pair-distance histogram.
    Hist {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        win: WindowArgs,
        /// Squared radius cutoff, e.g. `25`, `8/5` or `1.2`.
        #[arg(long, default_value = "25")]
        r_max_sq: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Shell frequency estimates against the reference table.
    Eta {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        win: WindowArgs,
        #[arg(long, default_value = "25")]
        r_max_sq: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Square-lattice powder rings.
    Powder {
        #[arg(long, default_value_t = 10)]
        n_max: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Same-grain / cross-grain decomposition of the finite powder model.
    PowderSim {
        #[arg(long, default_value_t = 8)]
        grains: u32,
        #[arg(long, default_value_t = 50.0)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        angle: f64,
        #[arg(long, default_value_t = 3.0)]
        r_cut: f64,
        #[arg(long, default_value_t = 0.01)]
        bin_width: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Radial diffraction intensity of the control points.
    Diffract {
        #[command(flatten)]
        spec: SpectrumArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Scaled spectrum next to the powder bars, plus a plot script.
    Compare {
        #[command(flatten)]
        spec: SpectrumArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Kite and domino pairs of a patch.
    Pairs {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the exact property suite; exits 2 on any failure.
    Check {
        #[arg(long, default_value_t = 5)]
        depth: u32,
        #[arg(long, default_value = "5")]
        r_max_sq: String,
        /// Optional report file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Source {
    /// Generate a patch of this depth.
    #[arg(long, conflicts_with = "patch")]
    depth: Option<u32>,
    /// Read a patch file instead.
    #[arg(long)]
    patch: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WindowKind {
    Full,
    Eroded,
}

#[derive(Args, Debug)]
struct WindowArgs {
    #[arg(long, value_enum, default_value = "eroded")]
    window: WindowKind,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: i64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TaperKind {
    None,
    Bartlett,
    Gaussian,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    src: Source,
    #[command(flatten)]
    win: WindowArgs,
    #[arg(long, default_value_t = 40.0)]
    r_max: f64,
    #[arg(long, default_value_t = 0.0)]
    k_min: f64,
    #[arg(long, default_value_t = 4.0)]
    k_max: f64,
    #[arg(long, default_value_t = 0.001)]
    k_step: f64,
    #[arg(long, value_enum, default_value = "bartlett")]
    taper: TaperKind,
    /// Width of the Gaussian taper in units of r_max.
    #[arg(long, default_value_t = 0.4)]
    sigma: f64,
}

/// Parses `argv` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let workers = match resolve_workers(cli.workers) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 3;
        }
    };
    if cli.seed_info {
        print_seed_info();
    }
    let Some(command) = cli.command else {
        if cli.seed_info {
            return 0;
        }
        eprintln!("error: a subcommand is required (see --help)");
        return 1;
    };
    match pool.install(|| execute(command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_resource_guard() {
                3
            } else {
                2
            }
        }
    }
}

fn resolve_workers(flag: Option<usize>) -> std::result::Result<usize, String> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| format!("{WORKERS_ENV}={v:?} is not a number"))?,
            Err(_) => 0,
        },
    };
    Ok(n)
}

fn print_seed_info() {
    let t = substitution::seed();
    eprintln!("seed triangle: r={} s={} l={} chirality={}", t.r(), t.s(), t.l(), t.chirality());
    eprintln!("legs |rs|=1, |rl|=2; inflation multiplies by 2+i");
    eprintln!("control point: r + (s - r)/2 + (l - r)/4 (seed control point is the origin)");
}

fn load(src: &Source, header: Header) -> Result<(Patch, Header)> {
    match (&src.patch, src.depth) {
        (Some(path), _) => {
            let header = header.input(path)?;
            Ok((formats::read_patch_file(path)?, header))
        }
        (None, Some(d)) => Ok((generate_patch(d)?, header.with("depth", d))),
        (None, None) => Err(Error::InvalidInput("give --depth or --patch".into())),
    }
}

fn window_of(w: &WindowArgs) -> Result<Window> {
    match w.window {
        WindowKind::Full => Ok(Window::Full),
        WindowKind::Eroded if w.margin < 0 => Err(Error::InvalidInput("negative margin".into())),
        WindowKind::Eroded => Ok(Window::eroded(w.margin)),
    }
}

fn parse_r_max_sq(s: &str) -> Result<DistanceKey> {
    let key: DistanceKey = s.parse()?;
    if key.is_zero() {
        return Err(Error::InvalidInput("r_max_sq must be positive".into()));
    }
    Ok(key)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn histogram_for(patch: &Patch, win: &WindowArgs, r_max_sq: &DistanceKey) -> Result<crate::stats::DistanceHistogram> {
    let window = window_of(win)?;
    let points = control_points(patch)?;
    pair_histogram(&points, &Region::of_patch(patch), r_max_sq, &window)
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Generate { depth, out } => {
            let patch = generate_patch(depth)?;
            write(&out, &formats::write_patch(&patch, &Header::new().with("depth", depth)))?;
        }
        Command::Points { src, out } => {
            let (patch, header) = load(&src, Header::new())?;
            write(&out, &formats::points_csv(&control_points(&patch)?, &header))?;
        }
        Command::Hist { src, win, r_max_sq, out } => {
            let key = parse_r_max_sq(&r_max_sq)?;
            let (patch, header) = load(&src, Header::new())?;
            let h = histogram_for(&patch, &win, &key)?;
            let header = header.with("window", window_of(&win)?.describe());
            write(&out, &formats::histogram_csv(&h, Some(patch.depth()), &header))?;
        }
        Command::Eta { src, win, r_max_sq, out } => {
            let key = parse_r_max_sq(&r_max_sq)?;
            let (patch, header) = load(&src, Header::new())?;
            let h = histogram_for(&patch, &win, &key)?;
            let rows = eta_estimate(&h)?;
            for row in rows.iter().filter(|r| r.reference.is_some()) {
                if let Some(dev) = row.relative_deviation() {
                    eprintln!("r^2={:>8}  eta_hat={:.6}  deviation={:+.4}", row.key.to_fraction_string(), row.eta_hat, dev);
                }
            }
            let header = header
                .with("window", window_of(&win)?.describe())
                .with("r_max_sq", key.to_fraction_string());
            write(&out, &formats::eta_csv(&rows, &header))?;
        }
        Command::Powder { n_max, out } => {
            let rings = powder_rings(n_max)?;
            write(&out, &formats::rings_csv(&rings, &Header::new().with("n_max", n_max)))?;
        }
        Command::PowderSim { grains, radius, angle, r_cut, bin_width, out } => {
            if grains == 0 || !(radius > 0.0) || !angle.is_finite() {
                return Err(Error::InvalidInput("need grains >= 1, radius > 0, finite angle".into()));
            }
            let model = PowderModel { grains, angle, radius };
            let d = powder_decomposition(&model, r_cut, bin_width)?;
            let header = Header::new()
                .with("grains", grains)
                .with("radius", formats::fmt_float(radius))
                .with("angle", formats::fmt_float(angle))
                .with("r_cut", formats::fmt_float(r_cut));
            write(&out, &formats::powder_sim_csv(&d, &header))?;
        }
        Command::Diffract { spec, out } => {
            let (s, header) = spectrum(&spec)?;
            for p in detect_peaks(&s, DEFAULT_K_MIN.max(spec.k_min), 0.0).iter().filter(|p| p.height > 0.0) {
                eprintln!("peak k={:.4} height={:.4} prominence={:.4}", p.k, p.height, p.prominence);
            }
            write(&out, &formats::spectrum_csv(&s, &header))?;
        }
        Command::Compare { spec, out } => {
            let (s, header) = spectrum(&spec)?;
            let n_max = (spec.k_max * spec.k_max).floor() as u64;
            let rings = powder_rings(n_max.max(1))?;
            let c = overlay_powder(&s, &rings)?;
            write(&out, &formats::comparison_csv(&c, &header))?;
            let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let script = out.with_file_name("plot_compare.py");
            write(&script, &formats::plot_script(&name))?;
        }
        Command::Pairs { src, out } => {
            let (patch, header) = load(&src, Header::new())?;
            let report = pair_tiles(&patch)?;
            let stats = kd_stats(patch.depth(), &report);
            eprintln!(
                "kites={} dominoes={} kite_fraction={:.6} interior_unmatched={}",
                report.kite_count,
                report.domino_count,
                stats.kite_fraction,
                report.interior_unmatched.len()
            );
            write(&out, &formats::pairs_csv(&report, &header))?;
        }
        Command::Check { depth, r_max_sq, out } => return check(depth, &r_max_sq, out.as_deref()),
    }
    Ok(0)
}

fn spectrum(spec: &SpectrumArgs) -> Result<(crate::diffraction::RadialSpectrum, Header)> {
    if !(spec.r_max > 0.0) || !spec.r_max.is_finite() {
        return Err(Error::InvalidInput("r_max must be positive".into()));
    }
    let taper = match spec.taper {
        TaperKind::None => Taper::None,
        TaperKind::Bartlett => Taper::Bartlett,
        TaperKind::Gaussian if spec.sigma > 0.0 => Taper::Gaussian(spec.sigma),
        TaperKind::Gaussian => return Err(Error::InvalidInput("sigma must be positive".into())),
    };
    let k = k_grid(spec.k_min, spec.k_max, spec.k_step)?;
    let r_max_sq = DistanceKey::from_scalar(&crate::exact::ExactScalar::parse_number(&formats::fmt_float(spec.r_max * spec.r_max))?)?;
    let (patch, header) = load(&spec.src, Header::new())?;
    let h = histogram_for(&patch, &spec.win, &r_max_sq)?;
    let s = radial_intensity(&h, &k, taper)?;
    let header = header
        .with("window", window_of(&spec.win)?.describe())
        .with("r_max", formats::fmt_float(spec.r_max))
        .with("k_grid", format!("{}:{}:{}", spec.k_min, spec.k_step, spec.k_max));
    Ok((s, header))
}

fn check(depth: u32, r_max_sq: &str, out: Option<&Path>) -> Result<i32> {
    let key = parse_r_max_sq(r_max_sq)?;
    let mut lines = Vec::new();
    let mut ok = true;
    let mut record = |name: &str, pass: bool, detail: String| {
        ok &= pass;
        let line = format!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        eprintln!("{line}");
        lines.push(line);
    };
    match verify_all_subdivisions(depth) {
        Ok(n) => record("subdivision", true, format!("{n} partitions verified")),
        Err(e) if e.is_resource_guard() => return Err(e),
        Err(e) => record("subdivision", false, e.to_string()),
    }
    let patch = generate_patch(depth)?;
    let points = control_points(&patch)?;
    let rep = proposition_checks(&points, &key)?;
    record(
        "rotation membership",
        rep.rotation_failures.is_empty(),
        format!("{} points, {} failures", rep.points_checked, rep.rotation_failures.len()),
    );
    record(
        "coordinates in Z[1/5]",
        rep.coordinate_failures.is_empty(),
        format!("{} points, {} failures", rep.points_checked, rep.coordinate_failures.len()),
    );
    record(
        "distance keys",
        rep.distance_failures.is_empty(),
        format!("{} keys, {} failures", rep.keys_checked, rep.distance_failures.len()),
    );
    match pair_tiles(&patch) {
        Ok(m) => record(
            "hypotenuse matching",
            m.interior_unmatched.is_empty(),
            format!(
                "{} kites, {} dominoes, {} interior unmatched",
                m.kite_count,
                m.domino_count,
                m.interior_unmatched.len()
            ),
        ),
        Err(e) => record("hypotenuse matching", false, e.to_string()),
    }
    if let Some(path) = out {
        let mut text = Header::new().with("depth", depth).with("r_max_sq", key.to_fraction_string()).render();
        for l in &lines {
            text.push_str(l);
            text.push('\n');
        }
        write(path, &text)?;
    }
    Ok(if ok { 0 } else { 2 })
}
