//! Two identical Stuart-Landau oscillators with delayed diffusive coupling
//!
//! `z_1' = (a + i b) z_1 + (g + i d)|z_1|^2 z_1 + eps e^{i rho} (z_2(t - tau) - z_1)`
//!
//! and symmetrically for `z_2`. Provides the model adapter for the generic
//! solver, closed-form expansion terms, and the reduced dynamics of the phase
//! difference `psi = phi_1 - phi_2`.

mod closed_form;
mod reduced;

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{FourierSeries, MultiIndex, C64};
use crate::homological::{
    build_order0, reduce, Edge, Expansion, FloquetFrame, ModelSpec, NodeDynamics, Oscillator, PairCoupling,
    ReduceOptions,
};

pub use closed_form::{e1_closed, e1_hist_closed, f1_closed, f2_closed, h1_closed};
pub use reduced::{
    integrate_reduced, psi_coefficients, psi_rhs, reduced_equilibria, Equilibrium, ReducedTrajectory, Stability, EQUILIBRIUM_SCAN_POINTS,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SLParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub eps: f64,
    pub rho: f64,
    pub tau: f64,
}

impl Default for SLParams {
    fn default() -> Self {
        SLParams {
            alpha: 1.0,
            beta: 1.0,
            gamma: -1.0,
            delta: 0.0,
            eps: 0.1,
            rho: 0.0,
            tau: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitData {
    pub r: f64,
    pub omega: f64,
}

impl SLParams {
    pub fn validate(&self) -> Result<()> {
        let vals = [self.alpha, self.beta, self.gamma, self.delta, self.eps, self.rho, self.tau];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameters("non-finite parameter".into()));
        }
        if self.gamma == 0.0 {
            return Err(Error::InvalidParameters("gamma must be nonzero".into()));
        }
        if -self.alpha / self.gamma <= 0.0 {
            return Err(Error::InvalidParameters(format!(
                "-alpha/gamma = {} must be positive for a periodic orbit",
                -self.alpha / self.gamma
            )));
        }
        if self.eps < 0.0 {
            return Err(Error::InvalidParameters("eps must be nonnegative".into()));
        }
        if self.tau < 0.0 {
            return Err(Error::InvalidParameters("tau must be nonnegative".into()));
        }
        if self.beta - self.alpha * self.delta / self.gamma == 0.0 {
            return Err(Error::InvalidParameters("orbit frequency vanishes".into()));
        }
        Ok(())
    }

    /// `rho - Omega tau`, the effective coupling phase.
    pub fn theta(&self) -> f64 {
        self.rho - (self.beta - self.alpha * self.delta / self.gamma) * self.tau
    }

    pub(crate) fn require_delta_zero(&self, what: &str) -> Result<()> {
        if self.delta != 0.0 {
            return Err(Error::InvalidParameters(format!("{what} requires delta = 0 (got {})", self.delta)));
        }
        Ok(())
    }
}

/// Radius `R = sqrt(-alpha/gamma)` and frequency `Omega = beta - alpha delta / gamma`.
pub fn orbit(p: &SLParams) -> Result<OrbitData> {
    p.validate()?;
    Ok(OrbitData {
        r: (-p.alpha / p.gamma).sqrt(),
        omega: p.beta - p.alpha * p.delta / p.gamma,
    })
}

/// Single uncoupled node in real coordinates `(Re z, Im z)`.
#[derive(Clone, Copy, Debug)]
pub struct SLNode {
    pub lin: C64,
    pub cubic: C64,
}

impl SLNode {
    pub fn new(p: &SLParams) -> Self {
        SLNode {
            lin: C64::new(p.alpha, p.beta),
            cubic: C64::new(p.gamma, p.delta),
        }
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.lin * z + self.cubic * z.norm_sqr() * z
    }

    fn derivative(&self, z: C64, v: C64) -> C64 {
        self.lin * v + self.cubic * (2.0 * z.norm_sqr() * v + z * z * v.conj())
    }
}

fn cz(x: &[f64]) -> C64 {
    C64::new(x[0], x[1])
}

fn rot(a: f64) -> DMatrix<f64> {
    let (s, c) = a.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

impl NodeDynamics for SLNode {
    fn dim(&self) -> usize {
        2
    }

    fn field(&self, x: &[f64]) -> Vec<f64> {
        let w = self.eval(cz(x));
        vec![w.re, w.im]
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let z = cz(x);
        let a = self.derivative(z, C64::new(1.0, 0.0));
        let b = self.derivative(z, C64::new(0.0, 1.0));
        DMatrix::from_row_slice(2, 2, &[a.re, b.re, a.im, b.im])
    }

    fn hessian_action(&self, x: &[f64], u: &[f64], v: &[f64]) -> Vec<f64> {
        let (z, u, v) = (cz(x), cz(u), cz(v));
        let w = self.cubic * (2.0 * z.conj() * u * v + 2.0 * z * (u * v.conj() + u.conj() * v));
        vec![w.re, w.im]
    }
}

/// `e^{i rho}(z_source(t - tau) - z_target)`.
#[derive(Clone, Copy, Debug)]
pub struct RotatedDiffusive {
    pub rho: f64,
}

impl PairCoupling for RotatedDiffusive {
    fn value(&self, own: &[f64], delayed: &[f64]) -> Vec<f64> {
        let w = C64::from_polar(1.0, self.rho) * (cz(delayed) - cz(own));
        vec![w.re, w.im]
    }

    fn d_own(&self, _own: &[f64], _delayed: &[f64]) -> DMatrix<f64> {
        -rot(self.rho)
    }

    fn d_delayed(&self, _own: &[f64], _delayed: &[f64]) -> DMatrix<f64> {
        rot(self.rho)
    }
}

/// Orbit `R (cos theta, sin theta)` as a one-angle series.
pub fn orbit_series(r: f64) -> FourierSeries {
    FourierSeries::from_modes(
        1,
        2,
        1,
        true,
        [
            (MultiIndex::new(vec![1]), vec![C64::new(r / 2.0, 0.0), C64::new(0.0, -r / 2.0)]),
            (MultiIndex::new(vec![-1]), vec![C64::new(r / 2.0, 0.0), C64::new(0.0, r / 2.0)]),
        ],
    )
    .expect("orbit series shape")
}

/// The network as a generic model (coupling without the factor `eps`).
pub fn model(p: &SLParams) -> Result<ModelSpec> {
    let o = orbit(p)?;
    let node: Arc<dyn NodeDynamics> = Arc::new(SLNode::new(p));
    let osc = Oscillator {
        dynamics: node,
        orbit: orbit_series(o.r),
        omega: o.omega,
    };
    let coupling: Arc<dyn PairCoupling> = Arc::new(RotatedDiffusive { rho: p.rho });
    ModelSpec::new(
        vec![osc.clone(), osc],
        vec![
            Edge {
                target: 0,
                source: 1,
                delay: p.tau,
                coupling: coupling.clone(),
            },
            Edge {
                target: 1,
                source: 0,
                delay: p.tau,
                coupling,
            },
        ],
    )
}

/// Normal bundle `N(phi) u = (g + i d)(e^{i phi_1} u_1, e^{i phi_2} u_2)` in
/// real coordinates, row-major 4 x 2.
pub fn normal_bundle(p: &SLParams) -> FourierSeries {
    let mut rows = Vec::new();
    for r in 0..4 {
        let osc = r / 2;
        for c in 0..2 {
            let s = if c != osc {
                FourierSeries::zeros(2, 1, 1)
            } else {
                let k = MultiIndex::unit(2, osc, 1);
                if r % 2 == 0 {
                    FourierSeries::harmonic(&k, 0.0, p.gamma, -p.delta)
                } else {
                    FourierSeries::harmonic(&k, 0.0, p.delta, p.gamma)
                }
            };
            rows.push(s);
        }
    }
    FourierSeries::stack(&rows).expect("normal bundle shape")
}

/// Analytic frame with `L = -2 alpha I`; left inverses collocated per `opts`.
pub fn frame(p: &SLParams, opts: &ReduceOptions) -> Result<FloquetFrame> {
    let model = model(p)?;
    let e0 = build_order0(&model).e;
    let l = DMatrix::identity(2, 2) * (-2.0 * p.alpha);
    FloquetFrame::from_normal_bundle(&e0, normal_bundle(p), l, &opts.lattice(2), opts.order)
}

/// Run the generic solver on the Stuart-Landau pair.
pub fn reduce_sl(p: &SLParams, max_order: usize, opts: &ReduceOptions) -> Result<Expansion> {
    let model = model(p)?;
    let frame = frame(p, opts)?;
    reduce(&model, &frame, max_order, opts)
}
