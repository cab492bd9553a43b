use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fourier::FourierSeries;

/// Uncoupled vector field of a single node, `x' = F(x)`.
pub trait NodeDynamics: Send + Sync {
    fn dim(&self) -> usize;
    fn field(&self, x: &[f64]) -> Vec<f64>;
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64>;
    /// Second derivative `F''(x)[u, v]`.
    fn hessian_action(&self, x: &[f64], u: &[f64], v: &[f64]) -> Vec<f64>;
}

/// Coupling `G(x_own, x_source(t - delay))` feeding into a target node.
pub trait PairCoupling: Send + Sync {
    fn value(&self, own: &[f64], delayed: &[f64]) -> Vec<f64>;
    fn d_own(&self, own: &[f64], delayed: &[f64]) -> DMatrix<f64>;
    fn d_delayed(&self, own: &[f64], delayed: &[f64]) -> DMatrix<f64>;
}

/// One node with its periodic orbit. `orbit` is a series in a single angle
/// `theta` such that `x(t) = orbit(omega t)` solves the uncoupled system.
#[derive(Clone)]
pub struct Oscillator {
    pub dynamics: Arc<dyn NodeDynamics>,
    pub orbit: FourierSeries,
    pub omega: f64,
}

#[derive(Clone)]
pub struct Edge {
    pub target: usize,
    pub source: usize,
    pub delay: f64,
    pub coupling: Arc<dyn PairCoupling>,
}

/// Network of oscillators with pairwise delayed couplings.
#[derive(Clone)]
pub struct ModelSpec {
    pub oscillators: Vec<Oscillator>,
    pub edges: Vec<Edge>,
}

/// Orbits must satisfy the uncoupled equation to this accuracy.
pub const ORBIT_TOL: f64 = 1e-9;

impl ModelSpec {
    pub fn new(oscillators: Vec<Oscillator>, edges: Vec<Edge>) -> Result<Self> {
        let model = ModelSpec { oscillators, edges };
        model.validate()?;
        Ok(model)
    }

    /// Number of oscillators (torus dimension).
    pub fn m(&self) -> usize {
        self.oscillators.len()
    }

    /// Total state dimension.
    pub fn n(&self) -> usize {
        self.oscillators.iter().map(|o| o.dynamics.dim()).sum()
    }

    pub fn omega(&self) -> Vec<f64> {
        self.oscillators.iter().map(|o| o.omega).collect()
    }

    /// Largest edge delay.
    pub fn tau(&self) -> f64 {
        self.edges.iter().map(|e| e.delay).fold(0.0, f64::max)
    }

    /// Start of each node's block in the state vector.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.m());
        let mut acc = 0;
        for o in &self.oscillators {
            off.push(acc);
            acc += o.dynamics.dim();
        }
        off
    }

    pub fn validate(&self) -> Result<()> {
        if self.oscillators.is_empty() {
            return Err(Error::InvalidParameters("model has no oscillators".into()));
        }
        for (j, o) in self.oscillators.iter().enumerate() {
            let d = o.dynamics.dim();
            if o.orbit.torus_dim() != 1 || o.orbit.dim_out() != d {
                return Err(Error::DimensionMismatch(format!(
                    "orbit of oscillator {j} must be a one-angle series with {d} components"
                )));
            }
            let r = orbit_residual(o, 64);
            if r > ORBIT_TOL {
                return Err(Error::InvalidParameters(format!(
                    "orbit of oscillator {j} violates the uncoupled equation (residual {r:.3e})"
                )));
            }
        }
        for e in &self.edges {
            if e.target >= self.m() || e.source >= self.m() {
                return Err(Error::InvalidParameters(format!(
                    "edge {} <- {} refers to a missing oscillator",
                    e.target, e.source
                )));
            }
            if !(e.delay >= 0.0) || !e.delay.is_finite() {
                return Err(Error::InvalidParameters(format!("negative or non-finite delay {}", e.delay)));
            }
        }
        Ok(())
    }

    /// Uncoupled field `F` of the whole network.
    pub fn field(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (o, off) in self.oscillators.iter().zip(self.offsets()) {
            let d = o.dynamics.dim();
            out[off..off + d].copy_from_slice(&o.dynamics.field(&x[off..off + d]));
        }
        out
    }

    /// Block-diagonal Jacobian `F'(x)`.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.n();
        let mut out = DMatrix::zeros(n, n);
        for (o, off) in self.oscillators.iter().zip(self.offsets()) {
            let d = o.dynamics.dim();
            let j = o.dynamics.jacobian(&x[off..off + d]);
            out.view_mut((off, off), (d, d)).copy_from(&j);
        }
        out
    }

    pub fn hessian_action(&self, x: &[f64], u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (o, off) in self.oscillators.iter().zip(self.offsets()) {
            let d = o.dynamics.dim();
            let r = off..off + d;
            out[r.clone()].copy_from_slice(&o.dynamics.hessian_action(&x[r.clone()], &u[r.clone()], &v[r]));
        }
        out
    }

    /// Coupling term `G` given the current state and a lookup of delayed
    /// states `delayed(source, delay)`.
    pub fn coupling<D>(&self, x: &[f64], delayed: D) -> Vec<f64>
    where
        D: Fn(usize, f64) -> Vec<f64>,
    {
        let off = self.offsets();
        let mut out = vec![0.0; x.len()];
        for e in &self.edges {
            let dt = self.oscillators[e.target].dynamics.dim();
            let ds = self.oscillators[e.source].dynamics.dim();
            let own = &x[off[e.target]..off[e.target] + dt];
            let past = delayed(e.source, e.delay);
            let g = e.coupling.value(own, &past[..ds]);
            for (o, v) in out[off[e.target]..off[e.target] + dt].iter_mut().zip(g) {
                *o += v;
            }
        }
        out
    }

    /// Linearized coupling `D_own G . u + D_delayed G . U` around `(x, X)`.
    /// `delayed(source, delay)` returns `(X_source, U_source)` at `-delay`.
    pub fn coupling_derivative<D>(&self, x: &[f64], u: &[f64], delayed: D) -> Vec<f64>
    where
        D: Fn(usize, f64) -> (Vec<f64>, Vec<f64>),
    {
        let off = self.offsets();
        let mut out = vec![0.0; x.len()];
        for e in &self.edges {
            let dt = self.oscillators[e.target].dynamics.dim();
            let r = off[e.target]..off[e.target] + dt;
            let own = &x[r.clone()];
            let (past, du) = delayed(e.source, e.delay);
            let a = e.coupling.d_own(own, &past);
            let b = e.coupling.d_delayed(own, &past);
            let v = a * nalgebra::DVector::from_column_slice(&u[r.clone()])
                + b * nalgebra::DVector::from_column_slice(&du);
            for (o, w) in out[r].iter_mut().zip(v.iter()) {
                *o += w;
            }
        }
        out
    }
}

/// Sup-norm residual of `omega orbit'(theta) - F(orbit(theta))` on `points` angles.
pub fn orbit_residual(o: &Oscillator, points: usize) -> f64 {
    let d = o.orbit.directional_derivative(&[o.omega]);
    (0..points)
        .map(|i| {
            let th = [TAU * i as f64 / points as f64];
            let lhs = d.eval_real(&th);
            let rhs = o.dynamics.field(&o.orbit.eval_real(&th));
            lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
