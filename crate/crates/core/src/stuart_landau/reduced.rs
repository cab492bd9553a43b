use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{orbit, SLParams};
use crate::error::{Error, Result};

/// Grid size of the sign-change scan in [`reduced_equilibria`].
pub const EQUILIBRIUM_SCAN_POINTS: usize = 4096;

const BISECTION_TOL: f64 = 1e-12;

/// Coefficients `(a, b)` of the reduced equation `psi' = a sin psi + b sin 2 psi`.
///
/// Order 1: `a = -2 eps [cos theta + (d/g) sin theta]`, `b = 0`.
/// Order 2 (`delta = 0`) adds `2 eps^2 tau sin rho sin theta` to `a` and sets
/// `b = -eps^2 (tau + sin^2(theta)/a)`.
pub fn psi_coefficients(p: &SLParams, order: usize) -> Result<(f64, f64)> {
    orbit(p)?;
    let (s, c) = p.theta().sin_cos();
    let first = -2.0 * p.eps * (c + p.delta / p.gamma * s);
    match order {
        1 => Ok((first, 0.0)),
        2 => {
            p.require_delta_zero("second-order phase dynamics")?;
            let e2 = p.eps * p.eps;
            Ok((first + e2 * 2.0 * p.tau * p.rho.sin() * s, -e2 * (p.tau + s * s / p.alpha)))
        }
        _ => Err(Error::UnsupportedOrder(order)),
    }
}

/// Right-hand side of the reduced phase-difference equation at `order` 1 or 2.
pub fn psi_rhs(p: &SLParams, order: usize, psi: f64) -> Result<f64> {
    let (a, b) = psi_coefficients(p, order)?;
    Ok(a * psi.sin() + b * (2.0 * psi).sin())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReducedTrajectory {
    pub t: Vec<f64>,
    pub psi: Vec<f64>,
}

/// Fixed-step RK4 for `psi' = psi_rhs(psi)`; the step is adjusted so an
/// integer number of steps reaches `t_end`. `psi` is not wrapped.
pub fn integrate_reduced(p: &SLParams, order: usize, psi0: f64, t_end: f64, h: f64) -> Result<ReducedTrajectory> {
    if !(h > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidParameters(format!("need h > 0 and t_end >= 0 (h = {h}, t_end = {t_end})")));
    }
    let (a, b) = psi_coefficients(p, order)?;
    let steps = (t_end / h).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let f = |x: f64| a * x.sin() + b * (2.0 * x).sin();
    let mut traj = ReducedTrajectory {
        t: Vec::with_capacity(steps + 1),
        psi: Vec::with_capacity(steps + 1),
    };
    let mut x = psi0;
    traj.t.push(0.0);
    traj.psi.push(x);
    for i in 0..steps {
        let k1 = f(x);
        let k2 = f(x + 0.5 * h * k1);
        let k3 = f(x + 0.5 * h * k2);
        let k4 = f(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        traj.t.push((i + 1) as f64 * h);
        traj.psi.push(x);
    }
    Ok(traj)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
    Neutral,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub psi: f64,
    /// Derivative of the right-hand side at the equilibrium.
    pub slope: f64,
    pub stability: Stability,
}

/// Equilibria of the reduced equation in `[0, 2 pi)`, located by a sign-change
/// scan and refined by bisection. If the right-hand side vanishes identically
/// only the symmetric states `0` and `pi` are returned, marked neutral.
pub fn reduced_equilibria(p: &SLParams, order: usize) -> Result<Vec<Equilibrium>> {
    let (a, b) = psi_coefficients(p, order)?;
    let f = |x: f64| a * x.sin() + b * (2.0 * x).sin();
    let n = EQUILIBRIUM_SCAN_POINTS;
    let grid: Vec<f64> = (0..=n).map(|i| TAU * i as f64 / n as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    if vals.iter().all(|&v| v == 0.0) {
        return Ok([0.0, PI]
            .iter()
            .map(|&psi| Equilibrium {
                psi,
                slope: 0.0,
                stability: Stability::Neutral,
            })
            .collect());
    }
    let mut roots = Vec::new();
    for i in 0..n {
        let (a, b) = (grid[i], grid[i + 1]);
        let (fa, fb) = (vals[i], vals[i + 1]);
        if fa == 0.0 {
            roots.push(a);
        } else if fb != 0.0 && fa.signum() != fb.signum() {
            roots.push(bisect(&f, a, b, fa));
        }
    }
    roots.iter_mut().for_each(|r| *r = r.rem_euclid(TAU));
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if roots.len() > 1 && (roots[0] + TAU - roots[roots.len() - 1]).abs() < 1e-9 {
        roots.pop();
    }
    let h = 1e-6;
    Ok(roots
        .into_iter()
        .map(|psi| {
            let slope = (f(psi + h) - f(psi - h)) / (2.0 * h);
            let stability = if slope < 0.0 {
                Stability::Stable
            } else if slope > 0.0 {
                Stability::Unstable
            } else {
                Stability::Neutral
            };
            Equilibrium { psi, slope, stability }
        })
        .collect())
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    while b - a > BISECTION_TOL {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn rhs_examples() {
        let p = SLParams { eps: 0.1, ..SLParams::default() };
        assert_eq!(psi_rhs(&p, 1, 0.0).unwrap(), 0.0);
        assert_eq!(psi_rhs(&p, 2, 0.0).unwrap(), 0.0);
        let q = SLParams { rho: 0.7, tau: 0.7, ..p };
        assert!((psi_rhs(&q, 1, FRAC_PI_2).unwrap() + 0.2).abs() < 1e-15);
        let r = SLParams { rho: FRAC_PI_2, tau: 0.0, ..p };
        for &x in &[0.3f64, 1.0, 2.5] {
            let want = -(p.eps * p.eps / p.alpha) * (2.0 * x).sin();
            assert!((psi_rhs(&r, 2, x).unwrap() - want).abs() < 1e-15);
        }
    }

    #[test]
    fn order_limits() {
        let p = SLParams::default();
        assert!(matches!(psi_rhs(&p, 3, 0.1), Err(Error::UnsupportedOrder(3))));
        let q = SLParams { delta: 0.2, ..p };
        assert!(psi_rhs(&q, 1, 0.1).is_ok());
        assert!(psi_rhs(&q, 2, 0.1).is_err());
    }

    #[test]
    fn symmetric_equilibria() {
        let p = SLParams { eps: 0.05, ..SLParams::default() };
        let eq = reduced_equilibria(&p, 1).unwrap();
        assert_eq!(eq.len(), 2);
        assert_eq!(eq[0].psi, 0.0);
        assert_eq!(eq[0].stability, Stability::Stable);
        assert!((eq[1].psi - PI).abs() < 1e-11);
        assert_eq!(eq[1].stability, Stability::Unstable);
    }

    #[test]
    fn rk4_decays_to_sync() {
        let p = SLParams { eps: 0.1, ..SLParams::default() };
        let tr = integrate_reduced(&p, 2, 1.0, 100.0, 0.01).unwrap();
        assert!(tr.psi.last().unwrap().abs() < 1e-6);
        assert_eq!(tr.t.len(), 10001);
    }
}
