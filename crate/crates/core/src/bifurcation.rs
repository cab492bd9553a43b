//! Stability of in-phase and anti-phase locking for the Stuart-Landau pair:
//! second-order eigenvalues, their zero curves in `rho`, Taylor expansions of
//! those curves, bistability bands and `(rho, tau)` parameter sweeps.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dde::{self, Attractor, Classification};
use crate::error::{Error, Result};
use crate::exec;
use crate::stuart_landau::{orbit, psi_coefficients, SLParams};

/// Bisection tolerance for [`rho_zero_numeric`].
pub const ROOT_TOL: f64 = 1e-12;

/// Half-width of the root bracket around `branch + omega tau`.
pub const BRACKET_HALF_WIDTH: f64 = 1.0;

/// Interior samples checked by [`bistability_band`].
pub const BAND_SAMPLES: usize = 16;

/// Step of the reduced-flow integration used by reduced-mode sweeps.
pub const REDUCED_STEP: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvaluePair {
    pub lambda_sync: f64,
    pub lambda_splay: f64,
}

/// Linearization of the second-order phase-difference equation at `psi = 0`
/// (sync) and `psi = pi` (splay):
///
/// `lambda_sync  = -2 eps cos th - 2 eps^2 (tau + sin^2 th / a - tau sin rho sin th)`
/// `lambda_splay =  2 eps cos th - 2 eps^2 (tau + sin^2 th / a + tau sin rho sin th)`
///
/// with `th = rho - omega tau`. Requires `delta = 0`.
pub fn eigenvalues(p: &SLParams) -> Result<EigenvaluePair> {
    orbit(p)?;
    if p.delta != 0.0 {
        return Err(Error::InvalidParameters(format!("eigenvalues require delta = 0 (got {})", p.delta)));
    }
    let (s, c) = p.theta().sin_cos();
    let e = p.eps;
    let common = p.tau + s * s / p.alpha;
    let cross = p.tau * p.rho.sin() * s;
    Ok(EigenvaluePair {
        lambda_sync: -2.0 * e * c - 2.0 * e * e * (common - cross),
        lambda_splay: 2.0 * e * c - 2.0 * e * e * (common + cross),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    Sync,
    Splay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    HalfPi,
    ThreeHalfPi,
}

impl Branch {
    pub fn value(self) -> f64 {
        match self {
            Branch::HalfPi => FRAC_PI_2,
            Branch::ThreeHalfPi => 3.0 * FRAC_PI_2,
        }
    }
}

fn eigenvalue(kind: Kind, p: &SLParams) -> Result<f64> {
    let ev = eigenvalues(p)?;
    Ok(match kind {
        Kind::Sync => ev.lambda_sync,
        Kind::Splay => ev.lambda_splay,
    })
}

/// Zero of the `kind` eigenvalue in `rho` near `branch + omega tau`, found by
/// bisection on `branch + omega tau -+ 1`. Uses `eps`, `tau` and the
/// oscillator parameters of `p`; `p.rho` is ignored.
pub fn rho_zero_numeric(kind: Kind, branch: Branch, p: &SLParams) -> Result<f64> {
    let w = orbit(p)?.omega;
    let centre = branch.value() + w * p.tau;
    let (mut lo, mut hi) = (centre - BRACKET_HALF_WIDTH, centre + BRACKET_HALF_WIDTH);
    let f = |rho: f64| eigenvalue(kind, &SLParams { rho, ..*p });
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 && f_hi == 0.0 {
        return Err(Error::NoBracket { lo, hi });
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Leading terms of the zero curves:
///
/// `sync,  pi/2 : pi/2 + w tau + eps/a + eps w^2 tau^3 / 2`
/// `splay, pi/2 : pi/2 + w tau - eps/a - 2 eps tau + eps w^2 tau^3 / 2`
/// `sync,  3pi/2: 3pi/2 + w tau - eps/a - eps w^2 tau^3 / 2`
/// `splay, 3pi/2: 3pi/2 + w tau + eps/a + 2 eps tau - eps w^2 tau^3 / 2`
pub fn rho_taylor(kind: Kind, branch: Branch, p: &SLParams) -> Result<f64> {
    let w = orbit(p)?.omega;
    if p.delta != 0.0 {
        return Err(Error::InvalidParameters(format!("zero curves require delta = 0 (got {})", p.delta)));
    }
    let (e, t) = (p.eps, p.tau);
    let cubic = 0.5 * e * w * w * t.powi(3);
    let base = branch.value() + w * t;
    Ok(match (kind, branch) {
        (Kind::Sync, Branch::HalfPi) => base + e / p.alpha + cubic,
        (Kind::Splay, Branch::HalfPi) => base - e / p.alpha - 2.0 * e * t + cubic,
        (Kind::Sync, Branch::ThreeHalfPi) => base - e / p.alpha - cubic,
        (Kind::Splay, Branch::ThreeHalfPi) => base + e / p.alpha + 2.0 * e * t - cubic,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BistabilityBand {
    pub branch: Branch,
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub empty: bool,
}

impl BistabilityBand {
    fn empty(branch: Branch) -> Self {
        BistabilityBand {
            branch,
            rho_lo: f64::NAN,
            rho_hi: f64::NAN,
            empty: true,
        }
    }

    pub fn midpoint(&self) -> Option<f64> {
        (!self.empty).then_some(0.5 * (self.rho_lo + self.rho_hi))
    }

    pub fn width(&self) -> f64 {
        if self.empty {
            0.0
        } else {
            self.rho_hi - self.rho_lo
        }
    }
}

/// Interval in `rho` between the sync and splay zero curves of `branch`
/// where both eigenvalues are negative, checked at interior samples.
pub fn bistability_band(branch: Branch, p: &SLParams) -> Result<BistabilityBand> {
    eigenvalues(p)?;
    if p.eps == 0.0 {
        return Ok(BistabilityBand::empty(branch));
    }
    let a = rho_zero_numeric(Kind::Sync, branch, p)?;
    let b = rho_zero_numeric(Kind::Splay, branch, p)?;
    let (lo, hi) = (a.min(b), a.max(b));
    if !(hi > lo) {
        return Ok(BistabilityBand::empty(branch));
    }
    for i in 1..=BAND_SAMPLES {
        let rho = lo + (hi - lo) * i as f64 / (BAND_SAMPLES + 1) as f64;
        let ev = eigenvalues(&SLParams { rho, ..*p })?;
        if !(ev.lambda_sync < 0.0 && ev.lambda_splay < 0.0) {
            return Ok(BistabilityBand::empty(branch));
        }
    }
    Ok(BistabilityBand {
        branch,
        rho_lo: lo,
        rho_hi: hi,
        empty: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepMode {
    /// Full delay system.
    Dde,
    /// Second-order phase-difference equation (first order when `delta != 0`).
    Reduced,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Probes {
    Fixed([f64; 2]),
    /// Two uniform initial offsets per cell from a seeded generator.
    Random { seed: u64 },
}

impl Default for Probes {
    fn default() -> Self {
        Probes::Fixed([0.3, PI - 0.3])
    }
}

impl Probes {
    pub fn for_cell(&self, index: usize) -> [f64; 2] {
        match *self {
            Probes::Fixed(v) => v,
            Probes::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(index as u64);
                [rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU)]
            }
        }
    }
}

/// Evenly spaced samples; `endpoint = false` excludes `hi` (periodic axes).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub endpoint: bool,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self.n {
            0 => vec![],
            1 => vec![self.lo],
            n => {
                let div = if self.endpoint { n - 1 } else { n } as f64;
                (0..n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / div).collect()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Oscillator parameters and `eps`; `rho` and `tau` come from the axes.
    pub base: SLParams,
    pub rho: Axis,
    pub tau: Axis,
    pub mode: SweepMode,
    pub probes: Probes,
    pub t_end: f64,
}

impl SweepConfig {
    /// `rho` in `[0, 2 pi)`, `tau` in `[0, 8]`, fixed probes, `T = 1000`.
    pub fn new(base: SLParams, n_rho: usize, n_tau: usize, mode: SweepMode) -> Self {
        SweepConfig {
            base,
            rho: Axis {
                lo: 0.0,
                hi: TAU,
                n: n_rho,
                endpoint: false,
            },
            tau: Axis {
                lo: 0.0,
                hi: 8.0,
                n: n_tau,
                endpoint: true,
            },
            mode,
            probes: Probes::default(),
            t_end: 1000.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    pub psi0: f64,
    pub class: Option<Attractor>,
    pub psi_final: f64,
    pub error: Option<String>,
}

impl ProbeOutcome {
    pub fn label(&self) -> &'static str {
        self.class.map_or("error", |c| c.label())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub rho: f64,
    pub tau: f64,
    pub probes: [ProbeOutcome; 2],
    /// Numeric zero curves at this `tau`, wrapped to `[0, 2 pi)`; NaN when
    /// no root is bracketed. Order: sync pi/2, splay pi/2, sync 3pi/2, splay 3pi/2.
    pub curves: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub config: SweepConfig,
    /// Row-major in `tau`: cell `(i_tau, i_rho)` at `i_tau * n_rho + i_rho`.
    pub cells: Vec<SweepCell>,
}

const CURVES: [(Kind, Branch); 4] = [
    (Kind::Sync, Branch::HalfPi),
    (Kind::Splay, Branch::HalfPi),
    (Kind::Sync, Branch::ThreeHalfPi),
    (Kind::Splay, Branch::ThreeHalfPi),
];

/// Numeric zero curves at `tau`, wrapped to `[0, 2 pi)`.
pub fn curves_at(p: &SLParams) -> [f64; 4] {
    CURVES.map(|(k, b)| rho_zero_numeric(k, b, p).map_or(f64::NAN, |r| r.rem_euclid(TAU)))
}

fn run_probe(p: &SLParams, mode: SweepMode, psi0: f64, t_end: f64) -> Result<Classification> {
    match mode {
        SweepMode::Dde => dde::classify_attractor(p, psi0, t_end),
        SweepMode::Reduced => {
            let order = if p.delta == 0.0 { 2 } else { 1 };
            let psi_final = reduced_final(p, order, psi0, t_end)?.rem_euclid(TAU);
            Ok(Classification {
                attractor: Attractor::from_psi(psi_final),
                psi_final,
            })
        }
    }
}

/// Endpoint of the RK4 reduced flow with step [`REDUCED_STEP`], stopping
/// early once the state is an exact fixed point of the step map.
fn reduced_final(p: &SLParams, order: usize, psi0: f64, t_end: f64) -> Result<f64> {
    let (a, b) = psi_coefficients(p, order)?;
    let f = |x: f64| a * x.sin() + b * (2.0 * x).sin();
    let steps = (t_end / REDUCED_STEP).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let mut x = psi0;
    for _ in 0..steps {
        let k1 = f(x);
        let k2 = f(x + 0.5 * h * k1);
        let k3 = f(x + 0.5 * h * k2);
        let k4 = f(x + h * k3);
        let next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if next == x {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Classify both probes at every `(rho, tau)` cell. Cells run in parallel;
/// failures are recorded in the cell and the sweep continues.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepTable> {
    orbit(&cfg.base)?;
    let rhos = cfg.rho.values();
    let taus = cfg.tau.values();
    let curve_rows: Vec<[f64; 4]> = exec::map_indexed(taus.len(), |i| {
        curves_at(&SLParams {
            tau: taus[i],
            ..cfg.base
        })
    });
    let n_rho = rhos.len();
    let cells = exec::map_indexed(n_rho * taus.len(), |idx| {
        let (it, ir) = (idx / n_rho, idx % n_rho);
        let p = SLParams {
            rho: rhos[ir],
            tau: taus[it],
            ..cfg.base
        };
        let psi0 = cfg.probes.for_cell(idx);
        let probes = psi0.map(|x| match run_probe(&p, cfg.mode, x, cfg.t_end) {
            Ok(c) => ProbeOutcome {
                psi0: x,
                class: Some(c.attractor),
                psi_final: c.psi_final,
                error: None,
            },
            Err(e) => ProbeOutcome {
                psi0: x,
                class: None,
                psi_final: f64::NAN,
                error: Some(e.to_string()),
            },
        });
        SweepCell {
            rho: p.rho,
            tau: p.tau,
            probes,
            curves: curve_rows[it],
        }
    });
    Ok(SweepTable { config: *cfg, cells })
}

impl SweepTable {
    /// CSV with columns `rho, tau, probe1_class, probe2_class, psi_final_1,
    /// psi_final_2, rho_sync_curve, rho_splay_curve` (the pi/2 branch), then
    /// the 3pi/2 branch curves.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "rho,tau,probe1_class,probe2_class,psi_final_1,psi_final_2,rho_sync_curve,rho_splay_curve,rho_sync_curve_3pi2,rho_splay_curve_3pi2"
        )?;
        for c in &self.cells {
            writeln!(
                w,
                "{:?},{:?},{},{},{:?},{:?},{:?},{:?},{:?},{:?}",
                c.rho,
                c.tau,
                c.probes[0].label(),
                c.probes[1].label(),
                c.probes[0].psi_final,
                c.probes[1].psi_final,
                c.curves[0],
                c.curves[1],
                c.curves[2],
                c.curves[3]
            )?;
        }
        Ok(())
    }

    /// Heatmap over `(rho, tau)`: blue where both probes end in sync, red
    /// where both end anti-phase, speckled blue/red where they split, grey
    /// otherwise. The four zero curves are overlaid as polylines.
    pub fn write_svg<W: Write>(&self, mut w: W) -> Result<()> {
        const CELL: f64 = 8.0;
        const MARGIN: f64 = 40.0;
        let rhos = self.config.rho.values();
        let taus = self.config.tau.values();
        let (nr, nt) = (rhos.len(), taus.len());
        let (width, height) = (nr as f64 * CELL, nt as f64 * CELL);
        writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
            width + 2.0 * MARGIN,
            height + 2.0 * MARGIN,
            width + 2.0 * MARGIN,
            height + 2.0 * MARGIN
        )?;
        writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
        // tau grows upward
        let cell_xy = |ir: usize, it: usize| (MARGIN + ir as f64 * CELL, MARGIN + (nt - 1 - it) as f64 * CELL);
        for (idx, c) in self.cells.iter().enumerate() {
            let (x, y) = cell_xy(idx % nr.max(1), idx / nr.max(1));
            let classes = [c.probes[0].class, c.probes[1].class];
            let fill = match classes {
                [Some(Attractor::Sync), Some(Attractor::Sync)] => Some("#2b59c3"),
                [Some(Attractor::Antiphase), Some(Attractor::Antiphase)] => Some("#d62828"),
                [Some(Attractor::Sync), Some(Attractor::Antiphase)] | [Some(Attractor::Antiphase), Some(Attractor::Sync)] => None,
                [None, _] | [_, None] => Some("#000000"),
                _ => Some("#9e9e9e"),
            };
            match fill {
                Some(f) => writeln!(w, r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{f}"/>"#)?,
                None => {
                    let q = CELL / 2.0;
                    for (dx, dy, f) in [(0.0, 0.0, "#2b59c3"), (q, 0.0, "#d62828"), (0.0, q, "#d62828"), (q, q, "#2b59c3")] {
                        writeln!(
                            w,
                            r#"<rect x="{}" y="{}" width="{q}" height="{q}" fill="{f}"/>"#,
                            x + dx,
                            y + dy
                        )?;
                    }
                }
            }
        }
        if nr > 0 && nt > 0 {
            let rho_span = self.config.rho.hi - self.config.rho.lo;
            let to_x = |rho: f64| MARGIN + (rho - self.config.rho.lo) / rho_span * width;
            let to_y = |it: usize| MARGIN + (nt - 1 - it) as f64 * CELL + CELL / 2.0;
            let styles = ["#ffffff", "#ffd166", "#ffffff", "#ffd166"];
            for (ci, style) in styles.iter().enumerate() {
                let mut segment: Vec<(f64, f64)> = Vec::new();
                let mut prev: Option<f64> = None;
                let flush = |seg: &mut Vec<(f64, f64)>, w: &mut W| -> std::io::Result<()> {
                    if seg.len() > 1 {
                        let pts: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                        writeln!(
                            w,
                            r#"<polyline points="{}" fill="none" stroke="{style}" stroke-width="1.5"/>"#,
                            pts.join(" ")
                        )?;
                    }
                    seg.clear();
                    Ok(())
                };
                for it in 0..nt {
                    let rho = self.cells[it * nr].curves[ci];
                    let inside = rho.is_finite() && rho >= self.config.rho.lo && rho <= self.config.rho.hi;
                    let jump = prev.is_some_and(|p| (rho - p).abs() > PI);
                    if !inside || jump {
                        flush(&mut segment, &mut w)?;
                    }
                    if inside {
                        segment.push((to_x(rho), to_y(it)));
                        prev = Some(rho);
                    } else {
                        prev = None;
                    }
                }
                flush(&mut segment, &mut w)?;
            }
        }
        writeln!(
            w,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">rho</text>"#,
            MARGIN + width / 2.0,
            height + 1.6 * MARGIN
        )?;
        writeln!(
            w,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">tau</text>"#,
            MARGIN / 2.0,
            MARGIN + height / 2.0
        )?;
        writeln!(w, "</svg>")?;
        Ok(())
    }
}
