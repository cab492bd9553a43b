use nalgebra::{DMatrix, DVector};

use super::frame::{mat_at, FloquetFrame};
use super::model::ModelSpec;
use crate::error::{Error, Result};
use crate::fourier::{
    collocate_real_fn, FourierSeries, Lattice, MultiIndex, PhaseHistoryField, Product, Resonance, C64,
};

/// Normal solves above this condition number are rejected.
pub const MAX_NORMAL_CONDITION: f64 = 1e10;

/// Zeroth-order solution: the uncoupled torus and its history.
#[derive(Clone, Debug)]
pub struct Order0 {
    pub e: FourierSeries,
    pub e_hist: PhaseHistoryField,
    pub f: FourierSeries,
}

/// `e0(phi) = (orbit_1(phi_1), ...)`, `E0(phi, s) = e0(phi + s omega)`, `f0 = omega`.
pub fn build_order0(model: &ModelSpec) -> Order0 {
    let m = model.m();
    let n = model.n();
    let omega = model.omega();
    let mut e = FourierSeries::zeros(m, n, 0);
    for (j, (o, off)) in model.oscillators.iter().zip(model.offsets()).enumerate() {
        for (k, c) in o.orbit.modes() {
            let mut v = vec![C64::new(0.0, 0.0); n];
            v[off..off + c.len()].copy_from_slice(c);
            e.accumulate(MultiIndex::unit(m, j, k.as_slice()[0]), &v);
        }
    }
    let e = e.assume_real(true);
    let e_hist = PhaseHistoryField::shifted_along(&e, &omega, model.tau());
    Order0 {
        e,
        e_hist,
        f: FourierSeries::constant(m, &omega),
    }
}

/// Node-block slice of a delayed history value.
fn block(model: &ModelSpec, x: &[f64], j: usize) -> Vec<f64> {
    let off = model.offsets()[j];
    x[off..off + model.oscillators[j].dynamics.dim()].to_vec()
}

fn real(v: Vec<C64>) -> Vec<f64> {
    v.into_iter().map(|z| z.re).collect()
}

/// `eta_1(phi) = G(E0(phi, .))`, sampled on `lattice` and collocated.
pub fn eta1(model: &ModelSpec, o0: &Order0, lattice: &Lattice, order: usize) -> Result<FourierSeries> {
    collocate_real_fn(lattice, order, |phi| {
        let x = o0.e.eval_real(phi);
        model.coupling(&x, |src, delay| block(model, &real(o0.e_hist.eval_unchecked(phi, -delay)), src))
    })
}

/// `eta_2 = 1/2 F''(e0)[e1, e1] - d e1/d phi . f1 + G'(E0) E1`.
///
/// The Hessian and coupling terms are sampled pointwise; the transport term
/// is a series product.
pub fn eta2(
    model: &ModelSpec,
    o0: &Order0,
    e1: &FourierSeries,
    e1_hist: &PhaseHistoryField,
    f1: &FourierSeries,
    lattice: &Lattice,
    order: usize,
) -> Result<FourierSeries> {
    let n = model.n();
    let m = model.m();
    let sampled = collocate_real_fn(lattice, order, |phi| {
        let x = o0.e.eval_real(phi);
        let u = e1.eval_real(phi);
        let mut out: Vec<f64> = model.hessian_action(&x, &u, &u).into_iter().map(|v| 0.5 * v).collect();
        let g = model.coupling_derivative(&x, &u, |src, delay| {
            (
                block(model, &real(o0.e_hist.eval_unchecked(phi, -delay)), src),
                block(model, &real(e1_hist.eval_unchecked(phi, -delay)), src),
            )
        });
        out.iter_mut().zip(g).for_each(|(a, b)| *a += b);
        out
    })?;
    let transport = e1.gradient().multiply(f1, Product::Matrix { rows: n, inner: m })?;
    Ok(sampled.sub(&transport)?.pruned(1e-15 * sampled.coefficient_l1().max(1.0)))
}

/// `H_2(phi, s) = - d E1/d phi (phi, s) . f1(phi)`.
pub fn h2(e1_hist: &PhaseHistoryField, f1: &FourierSeries) -> Result<PhaseHistoryField> {
    let n = e1_hist.dim_out();
    let m = e1_hist.torus_dim();
    Ok(e1_hist
        .gradient()
        .multiply_series(f1, Product::Matrix { rows: n, inner: m })?
        .scale(C64::new(-1.0, 0.0)))
}

#[derive(Clone, Debug)]
pub struct TangentialSolution {
    pub g: FourierSeries,
    pub f: FourierSeries,
    /// Coefficients `zeta_k` of `T+ pi eta`.
    pub zeta: FourierSeries,
    /// Nonresonant modes whose divisor is within ten times the resonance threshold.
    pub near_resonant: Vec<MultiIndex>,
}

/// Tangential equation `d_omega g + f = T+ pi eta` in normal form up to `order`:
/// resonant modes and modes beyond `order` go to `f`, the rest are divided by
/// `i <k, omega>` into `g`.
pub fn solve_tangential(
    eta: &FourierSeries,
    frame: &FloquetFrame,
    res: &Resonance,
    order: usize,
) -> Result<TangentialSolution> {
    let (n, m) = (frame.n, frame.m);
    let projected = frame.pi.multiply(eta, Product::Matrix { rows: n, inner: n })?;
    let zeta = frame
        .t_pinv
        .multiply(&projected, Product::Matrix { rows: m, inner: n })?;
    let zeta = zeta.pruned(1e-15 * zeta.coefficient_l1().max(1e-300));
    let mut g = FourierSeries::zeros(m, m, order).assume_real(true);
    let mut f = FourierSeries::zeros(m, m, order).assume_real(true);
    let mut near_resonant = Vec::new();
    for (k, c) in zeta.modes() {
        if res.is_resonant(k) || k.l1() > order {
            f.accumulate(k.clone(), c);
        } else {
            if res.is_near_resonant(k) {
                log::warn!("near-resonant mode {k} with divisor {:.3e}", k.dot(res.omega()));
                near_resonant.push(k.clone());
            }
            let d = C64::new(0.0, k.dot(res.omega()));
            let v: Vec<C64> = c.iter().map(|z| z / d).collect();
            g.accumulate(k.clone(), &v);
        }
    }
    Ok(TangentialSolution {
        g,
        f: f.real_part(),
        zeta,
        near_resonant,
    })
}

#[derive(Clone, Debug)]
pub struct NormalSolution {
    pub h: FourierSeries,
    /// Coefficients of `N+ (I - pi) eta`.
    pub rhs: FourierSeries,
}

/// Normal equation `d_omega h - L h = N+ (I - pi) eta`, mode by mode.
pub fn solve_normal(eta: &FourierSeries, frame: &FloquetFrame, res: &Resonance) -> Result<NormalSolution> {
    let (n, k) = (frame.n, frame.normal_dim());
    let projected = frame.pi.multiply(eta, Product::Matrix { rows: n, inner: n })?;
    let complement = eta.sub(&projected)?;
    let rhs = frame
        .n_pinv
        .multiply(&complement, Product::Matrix { rows: k, inner: n })?;
    let rhs = rhs.pruned(1e-15 * rhs.coefficient_l1().max(1e-300));
    let lc: DMatrix<C64> = frame.l.map(|v| C64::new(v, 0.0));
    let mut h = FourierSeries::zeros(frame.m, k, rhs.order()).assume_real(rhs.is_real_valued());
    for (mode, c) in rhs.modes() {
        let kappa = res.divisor(mode);
        let a = DMatrix::<C64>::identity(k, k) * C64::new(0.0, kappa) - &lc;
        let sv = a.clone().singular_values();
        let cond = sv.max() / sv.min();
        if !(cond <= MAX_NORMAL_CONDITION) {
            return Err(Error::IllConditioned {
                mode: mode.as_slice().to_vec(),
                cond,
            });
        }
        let b = DVector::from_column_slice(c);
        let x = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::IllConditioned { mode: mode.as_slice().to_vec(), cond })?;
        h.accumulate(mode.clone(), x.as_slice());
    }
    Ok(NormalSolution { h, rhs })
}

/// `e = T g + N h`.
pub fn assemble_e(g: &FourierSeries, h: &FourierSeries, frame: &FloquetFrame) -> Result<FourierSeries> {
    let (n, m, k) = (frame.n, frame.m, frame.normal_dim());
    let tg = frame.t.multiply(g, Product::Matrix { rows: n, inner: m })?;
    let nh = frame.normal.multiply(h, Product::Matrix { rows: n, inner: k })?;
    Ok(tg.add(&nh)?.pruned(0.0))
}

/// History field solving the transport equation with boundary value `e`:
///
/// `E(phi, s) = e(phi + s omega) + dE0/dphi(phi, s) . int_0^s f(phi + omega(s - z)) dz
///              - int_0^s H(phi + omega(s - z), z) dz`.
pub fn lift_history(
    e: &FourierSeries,
    f: &FourierSeries,
    h: &PhaseHistoryField,
    e0_hist: &PhaseHistoryField,
    res: &Resonance,
) -> Result<PhaseHistoryField> {
    let tau = e0_hist.tau();
    let n = e.dim_out();
    let m = e.torus_dim();
    let shifted = PhaseHistoryField::shifted_along(e, res.omega(), tau);
    let f_int = PhaseHistoryField::from_series(f, tau).transport_integral(res);
    let drift = e0_hist
        .gradient()
        .multiply(&f_int, Product::Matrix { rows: n, inner: m })?;
    let forced = h.transport_integral(res);
    shifted.add(&drift)?.sub(&forced)
}

/// Sup over `lattice` of `d e0/d phi . f0 - F(e0)`.
pub fn order0_residual(model: &ModelSpec, o0: &Order0, lattice: &Lattice) -> f64 {
    let n = model.n();
    let m = model.m();
    let grad = o0.e.gradient();
    crate::exec::max_indexed(lattice.len(), |i| {
        let phi = lattice.point(i);
        let x = o0.e.eval_real(&phi);
        let lhs = mat_at(&grad, n, m, &phi) * DVector::from_vec(o0.f.eval_real(&phi));
        let rhs = model.field(&x);
        lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    })
}
