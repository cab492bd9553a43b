//! Direct integration of the delay-coupled Stuart-Landau pair by the method
//! of steps: fixed-step RK4 with delayed values read from cubic Hermite
//! interpolants of already completed steps.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::C64;
use crate::stuart_landau::{orbit, OrbitData, SLNode, SLParams};

/// Steps per delay (or per period when the delay is shorter) in [`default_step`].
pub const STEPS_PER_SCALE: f64 = 200.0;

/// Distance from 0 or pi below which a final phase difference is classified.
pub const CLASSIFY_TOL: f64 = 0.1;

/// Default window of [`measured_drift`]: after the normal transient has
/// decayed, short enough that the curvature of `Psi(t)` stays negligible.
pub const DRIFT_WINDOW: (f64, f64) = (2.0, 6.0);

/// Below this modulus the phase of an oscillator is considered undefined.
pub const PHASE_MODULUS_MIN: f64 = 1e-6;

/// On-torus initial history `z_j(t) = (R + dr_j) e^{i(Omega t + phi_j)}`, `t <= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistorySpec {
    pub phases: [f64; 2],
    pub radial: [f64; 2],
}

impl HistorySpec {
    pub fn on_torus(phi1: f64, phi2: f64) -> Self {
        HistorySpec {
            phases: [phi1, phi2],
            radial: [0.0; 2],
        }
    }

    /// History with `arg z_1 - arg z_2 = psi0` and `arg z_2(0) = 0`.
    pub fn with_phase_difference(psi0: f64) -> Self {
        Self::on_torus(psi0, 0.0)
    }

    pub fn state(&self, o: &OrbitData, t: f64) -> [C64; 2] {
        [0, 1].map(|j| C64::from_polar(o.r + self.radial[j], o.omega * t + self.phases[j]))
    }

    pub fn derivative(&self, o: &OrbitData, t: f64) -> [C64; 2] {
        let z = self.state(o, t);
        [0, 1].map(|j| C64::new(0.0, o.omega) * z[j])
    }
}

/// Cubic Hermite interpolant on `[a, a + h]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermiteSegment {
    pub a: f64,
    pub h: f64,
    pub y0: [C64; 2],
    pub y1: [C64; 2],
    pub d0: [C64; 2],
    pub d1: [C64; 2],
}

impl HermiteSegment {
    fn weights(theta: f64) -> [f64; 4] {
        let t2 = theta * theta;
        let t3 = t2 * theta;
        [2.0 * t3 - 3.0 * t2 + 1.0, t3 - 2.0 * t2 + theta, -2.0 * t3 + 3.0 * t2, t3 - t2]
    }

    fn at_fraction(&self, theta: f64) -> [C64; 2] {
        let [a, b, c, d] = Self::weights(theta);
        let h = self.h;
        [0, 1].map(|j| self.y0[j] * a + self.d0[j] * (b * h) + self.y1[j] * c + self.d1[j] * (d * h))
    }

    pub fn eval(&self, t: f64) -> [C64; 2] {
        self.at_fraction((t - self.a) / self.h)
    }

    pub fn derivative(&self, t: f64) -> [C64; 2] {
        let th = (t - self.a) / self.h;
        let t2 = th * th;
        let (a, b, c, d) = (
            (6.0 * t2 - 6.0 * th) / self.h,
            3.0 * t2 - 4.0 * th + 1.0,
            (6.0 * th - 6.0 * t2) / self.h,
            3.0 * t2 - 2.0 * th,
        );
        [0, 1].map(|j| self.y0[j] * a + self.d0[j] * b + self.y1[j] * c + self.d1[j] * d)
    }
}

/// Recorded solution on the grid `t_i = i h` with dense output.
#[derive(Clone, Debug)]
pub struct DdeTrajectory {
    pub h: f64,
    pub tau: f64,
    pub orbit: OrbitData,
    pub history: HistorySpec,
    pub t: Vec<f64>,
    pub z: Vec<[C64; 2]>,
    pub dz: Vec<[C64; 2]>,
}

impl DdeTrajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn end(&self) -> f64 {
        *self.t.last().unwrap_or(&0.0)
    }

    pub fn final_state(&self) -> [C64; 2] {
        *self.z.last().expect("trajectory has the initial node")
    }

    pub fn segment(&self, i: usize) -> HermiteSegment {
        HermiteSegment {
            a: self.t[i],
            h: self.t[i + 1] - self.t[i],
            y0: self.z[i],
            y1: self.z[i + 1],
            d0: self.dz[i],
            d1: self.dz[i + 1],
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let end = self.end();
        if !(t >= -self.tau - 1e-12 && t <= end + 1e-12) {
            return Err(Error::OutsideTrajectory {
                t,
                start: -self.tau,
                end,
            });
        }
        Ok(())
    }

    /// State at time `t` in `[-tau, end]`; exact at grid nodes.
    pub fn eval(&self, t: f64) -> Result<[C64; 2]> {
        self.check_time(t)?;
        if t < 0.0 {
            return Ok(self.history.state(&self.orbit, t));
        }
        if self.len() == 1 {
            return Ok(self.z[0]);
        }
        let i = ((t / self.h).floor() as usize).min(self.len() - 2);
        if t == self.t[i] {
            return Ok(self.z[i]);
        }
        Ok(self.segment(i).eval(t))
    }

    /// `arg z_1(t) - arg z_2(t)` wrapped to `[0, 2 pi)`.
    pub fn phase_difference(&self, t: f64) -> Result<f64> {
        wrapped_difference(self.eval(t)?, t)
    }

    /// Trajectory CSV with columns `t, re z1, im z1, re z2, im z2, psi`,
    /// writing every `stride`-th node (and always the last).
    pub fn write_csv<W: Write>(&self, mut w: W, stride: usize) -> Result<()> {
        writeln!(w, "t,re_z1,im_z1,re_z2,im_z2,psi")?;
        let stride = stride.max(1);
        let last = self.len() - 1;
        for i in (0..self.len()).filter(|&i| i % stride == 0 || i == last) {
            let z = self.z[i];
            let psi = wrapped_difference(z, self.t[i])?;
            writeln!(w, "{:?},{:?},{:?},{:?},{:?},{:?}", self.t[i], z[0].re, z[0].im, z[1].re, z[1].im, psi)?;
        }
        Ok(())
    }
}

fn wrapped_difference(z: [C64; 2], t: f64) -> Result<f64> {
    for zj in z {
        if zj.norm() < PHASE_MODULUS_MIN {
            return Err(Error::PhaseUndefined { t, modulus: zj.norm() });
        }
    }
    Ok((z[0].arg() - z[1].arg()).rem_euclid(TAU))
}

/// `min(tau, 2 pi / Omega) / 200`, shrunk so that `tau` is an integer
/// number of steps.
pub fn default_step(p: &SLParams) -> Result<f64> {
    let o = orbit(p)?;
    let period = TAU / o.omega.abs();
    if p.tau == 0.0 {
        return Ok(period / STEPS_PER_SCALE);
    }
    let target = p.tau.min(period) / STEPS_PER_SCALE;
    Ok(p.tau / (p.tau / target).ceil())
}

struct Setup {
    orbit: OrbitData,
    node: SLNode,
    coupling: C64,
    h: f64,
    delay_steps: usize,
    steps: usize,
}

fn setup(p: &SLParams, t_end: f64, h: f64) -> Result<Setup> {
    let o = orbit(p)?;
    if !(h > 0.0 && h.is_finite()) || !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameters(format!("need h > 0 and t_end >= 0 (h = {h}, t_end = {t_end})")));
    }
    let (h, delay_steps) = if p.tau == 0.0 {
        (h, 0)
    } else {
        let n = (p.tau / h).round();
        if n < 1.0 || (n * h - p.tau).abs() > 1e-9 * p.tau {
            return Err(Error::StepAlignment { tau: p.tau, h });
        }
        (p.tau / n, n as usize)
    };
    let ratio = t_end / h;
    let steps = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round()
    } else {
        ratio.ceil()
    } as usize;
    Ok(Setup {
        orbit: o,
        node: SLNode::new(p),
        coupling: C64::from_polar(p.eps, p.rho),
        h,
        delay_steps,
        steps,
    })
}

impl Setup {
    fn rhs(&self, z: [C64; 2], delayed: [C64; 2]) -> [C64; 2] {
        [
            self.node.eval(z[0]) + self.coupling * (delayed[1] - z[0]),
            self.node.eval(z[1]) + self.coupling * (delayed[0] - z[1]),
        ]
    }

    fn check(&self, z: [C64; 2], t: f64) -> Result<()> {
        for zj in z {
            let m = zj.norm();
            if !(m >= 0.5 * self.orbit.r && m <= 2.0 * self.orbit.r) {
                return Err(Error::Diverged { t, modulus: m });
            }
        }
        Ok(())
    }
}

fn axpy(z: [C64; 2], a: f64, k: [C64; 2]) -> [C64; 2] {
    [z[0] + k[0] * a, z[1] + k[1] * a]
}

/// Method-of-steps RK4. Calls `visit(i, t_i, z_i, dz_i)` for every node
/// `0..=steps`, keeping only one delay interval of nodes in memory.
fn run<V>(p: &SLParams, hist: &HistorySpec, t_end: f64, h: f64, mut visit: V) -> Result<Setup>
where
    V: FnMut(usize, f64, [C64; 2], [C64; 2]),
{
    let s = setup(p, t_end, h)?;
    let (h, n) = (s.h, s.delay_steps);
    let ring_len = n + 1;
    let mut ring: Vec<([C64; 2], [C64; 2])> = vec![([C64::new(0.0, 0.0); 2], [C64::new(0.0, 0.0); 2]); ring_len];
    let mut z = hist.state(&s.orbit, 0.0);

    // delayed state at t_i + c h - tau, for c in {0, 1/2, 1}
    let delayed = |ring: &[([C64; 2], [C64; 2])], i: usize, c: f64| -> [C64; 2] {
        if i < n {
            return hist.state(&s.orbit, (i as f64 + c - n as f64) * h);
        }
        let j = i - n;
        let (y0, d0) = ring[j % ring_len];
        if c == 0.0 {
            return y0;
        }
        let (y1, d1) = ring[(j + 1) % ring_len];
        if c == 1.0 {
            return y1;
        }
        HermiteSegment {
            a: 0.0,
            h,
            y0,
            y1,
            d0,
            d1,
        }
        .at_fraction(c)
    };

    for i in 0..=s.steps {
        let t = i as f64 * h;
        let k1 = if n == 0 {
            s.rhs(z, z)
        } else {
            s.rhs(z, delayed(&ring, i, 0.0))
        };
        ring[i % ring_len] = (z, k1);
        visit(i, t, z, k1);
        if i == s.steps {
            break;
        }
        let z_next = if n == 0 {
            let y2 = axpy(z, 0.5 * h, k1);
            let k2 = s.rhs(y2, y2);
            let y3 = axpy(z, 0.5 * h, k2);
            let k3 = s.rhs(y3, y3);
            let y4 = axpy(z, h, k3);
            let k4 = s.rhs(y4, y4);
            rk4_combine(z, h, k1, k2, k3, k4)
        } else {
            let half = delayed(&ring, i, 0.5);
            let one = delayed(&ring, i, 1.0);
            let k2 = s.rhs(axpy(z, 0.5 * h, k1), half);
            let k3 = s.rhs(axpy(z, 0.5 * h, k2), half);
            let k4 = s.rhs(axpy(z, h, k3), one);
            rk4_combine(z, h, k1, k2, k3, k4)
        };
        s.check(z_next, t + h)?;
        z = z_next;
    }
    Ok(s)
}

fn rk4_combine(z: [C64; 2], h: f64, k1: [C64; 2], k2: [C64; 2], k3: [C64; 2], k4: [C64; 2]) -> [C64; 2] {
    [0, 1].map(|j| z[j] + (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0))
}

/// Integrate the coupled pair on `[0, t_end]` with step `h` (`tau / h` must
/// be a positive integer when `tau > 0`). The grid may overshoot `t_end` by
/// less than one step.
pub fn integrate_dde(p: &SLParams, hist: &HistorySpec, t_end: f64, h: f64) -> Result<DdeTrajectory> {
    let cap = setup(p, t_end, h)?.steps + 1;
    let (mut t, mut z, mut dz) = (Vec::with_capacity(cap), Vec::with_capacity(cap), Vec::with_capacity(cap));
    let s = run(p, hist, t_end, h, |_, ti, zi, di| {
        t.push(ti);
        z.push(zi);
        dz.push(di);
    })?;
    Ok(DdeTrajectory {
        h: s.h,
        tau: p.tau,
        orbit: s.orbit,
        history: *hist,
        t,
        z,
        dz,
    })
}

/// Final state only, without recording the trajectory.
pub fn final_state(p: &SLParams, hist: &HistorySpec, t_end: f64, h: f64) -> Result<(f64, [C64; 2])> {
    let mut last = (0.0, [C64::new(0.0, 0.0); 2]);
    run(p, hist, t_end, h, |_, t, z, _| last = (t, z))?;
    Ok(last)
}

/// Unwrapped phase difference sampled at every node.
pub fn phase_difference_series(p: &SLParams, hist: &HistorySpec, t_end: f64, h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut ts = Vec::new();
    let mut psi: Vec<f64> = Vec::new();
    let mut err = None;
    run(p, hist, t_end, h, |_, t, z, _| {
        if err.is_some() {
            return;
        }
        match wrapped_difference(z, t) {
            Ok(w) => {
                let v = match psi.last() {
                    Some(&prev) => prev + wrap_pi(w - prev),
                    None => w,
                };
                ts.push(t);
                psi.push(v);
            }
            Err(e) => err = Some(e),
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok((ts, psi)),
    }
}

/// Wrap to `(-pi, pi]`.
pub fn wrap_pi(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Attractor {
    Sync,
    Antiphase,
    Other(f64),
}

impl Attractor {
    /// Classify a phase difference by its distance to 0 and pi.
    pub fn from_psi(psi: f64) -> Self {
        let w = psi.rem_euclid(TAU);
        if wrap_pi(w).abs() < CLASSIFY_TOL {
            Attractor::Sync
        } else if (w - PI).abs() < CLASSIFY_TOL {
            Attractor::Antiphase
        } else {
            Attractor::Other(w)
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Attractor::Sync => "sync",
            Attractor::Antiphase => "antiphase",
            Attractor::Other(_) => "other",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub attractor: Attractor,
    pub psi_final: f64,
}

/// Integrate from the on-torus history with offset `psi0` and classify
/// `Psi(t_end)`.
pub fn classify_attractor(p: &SLParams, psi0: f64, t_end: f64) -> Result<Classification> {
    classify_attractor_with_step(p, psi0, t_end, default_step(p)?)
}

pub fn classify_attractor_with_step(p: &SLParams, psi0: f64, t_end: f64, h: f64) -> Result<Classification> {
    let (t, z) = final_state(p, &HistorySpec::with_phase_difference(psi0), t_end, h)?;
    let psi_final = wrapped_difference(z, t)?;
    Ok(Classification {
        attractor: Attractor::from_psi(psi_final),
        psi_final,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    /// Least-squares slope of the unwrapped phase difference.
    pub slope: f64,
    /// Fitted phase difference at the window midpoint, wrapped to `[0, 2 pi)`.
    pub psi_mid: f64,
}

/// Least-squares slope of the unwrapped phase difference over `window`,
/// starting from the on-torus history with offset `psi0`.
pub fn measured_drift(p: &SLParams, psi0: f64, window: (f64, f64)) -> Result<Drift> {
    measured_drift_with_step(p, psi0, window, default_step(p)?)
}

pub fn measured_drift_with_step(p: &SLParams, psi0: f64, window: (f64, f64), h: f64) -> Result<Drift> {
    let (t0, t1) = window;
    if !(t0 >= 0.0 && t1 > t0) {
        return Err(Error::InvalidParameters(format!("invalid drift window [{t0}, {t1}]")));
    }
    let (ts, psi) = phase_difference_series(p, &HistorySpec::with_phase_difference(psi0), t1, h)?;
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(&psi)
        .filter(|(t, _)| **t >= t0 - 1e-12 && **t <= t1 + 1e-12)
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameters("drift window holds fewer than two samples".into()));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let slope = sxy / sxx;
    let mid = 0.5 * (t0 + t1);
    Ok(Drift {
        slope,
        psi_mid: (ym + slope * (mid - tm)).rem_euclid(TAU),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_cubics() {
        // y = t^3 - 2t on [1, 1.5]
        let f = |t: f64| C64::new(t * t * t - 2.0 * t, 0.0);
        let df = |t: f64| C64::new(3.0 * t * t - 2.0, 0.0);
        let seg = HermiteSegment {
            a: 1.0,
            h: 0.5,
            y0: [f(1.0), f(1.0)],
            y1: [f(1.5), f(1.5)],
            d0: [df(1.0), df(1.0)],
            d1: [df(1.5), df(1.5)],
        };
        for &t in &[1.0, 1.1, 1.37, 1.5] {
            assert!((seg.eval(t)[0] - f(t)).norm() < 1e-13);
            assert!((seg.derivative(t)[1] - df(t)).norm() < 1e-12);
        }
    }

    #[test]
    fn default_step_is_aligned() {
        let p = SLParams { tau: 0.7, ..SLParams::default() };
        let h = default_step(&p).unwrap();
        assert!(((p.tau / h) - (p.tau / h).round()).abs() < 1e-9);
        assert!(h <= 0.7 / 200.0 + 1e-15);
        let q = SLParams { tau: 0.0, ..p };
        assert!((default_step(&q).unwrap() - TAU / 200.0).abs() < 1e-15);
    }

    #[test]
    fn misaligned_step_is_rejected() {
        let p = SLParams { tau: 0.5, ..SLParams::default() };
        assert!(matches!(
            integrate_dde(&p, &HistorySpec::on_torus(0.0, 0.0), 1.0, 0.3),
            Err(Error::StepAlignment { .. })
        ));
        assert!(matches!(
            integrate_dde(&p, &HistorySpec::on_torus(0.0, 0.0), 1.0, 0.7),
            Err(Error::StepAlignment { .. })
        ));
    }

    #[test]
    fn classification_thresholds() {
        assert_eq!(Attractor::from_psi(0.05), Attractor::Sync);
        assert_eq!(Attractor::from_psi(TAU - 0.05), Attractor::Sync);
        assert_eq!(Attractor::from_psi(PI + 0.09), Attractor::Antiphase);
        assert_eq!(Attractor::from_psi(1.0), Attractor::Other(1.0));
    }

    #[test]
    fn wrap_pi_range() {
        assert_eq!(wrap_pi(PI), PI);
        assert_eq!(wrap_pi(-PI), PI);
        assert!((wrap_pi(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }
}
