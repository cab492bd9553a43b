use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::frame::{mat_at, FloquetFrame};
use super::model::ModelSpec;
use super::solve::{
    assemble_e, build_order0, eta1, eta2, h2, lift_history, solve_normal, solve_tangential,
};
use crate::error::{Error, Result};
use crate::fourier::{
    FourierSeries, HistoryDocument, Lattice, MultiIndex, PhaseHistoryField, Resonance, SeriesDocument,
    C64, DEFAULT_TOL_RES,
};

/// Highest expansion order with explicit right-hand sides.
pub const MAX_ORDER: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReduceOptions {
    /// Normal-form truncation order `K`.
    pub order: usize,
    /// Collocation points per torus axis; `None` means `4K + 1`.
    pub lattice_points: Option<usize>,
    pub tol_res: f64,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            order: 8,
            lattice_points: None,
            tol_res: DEFAULT_TOL_RES,
        }
    }
}

impl ReduceOptions {
    pub fn lattice(&self, m: usize) -> Lattice {
        Lattice::new(m, self.lattice_points.unwrap_or(4 * self.order + 1))
    }
}

/// Solution data of one expansion order.
#[derive(Clone, Debug)]
pub struct OrderTerms {
    pub f: FourierSeries,
    pub e: FourierSeries,
    pub e_hist: PhaseHistoryField,
    /// Tangential and normal coordinates of `e` (zero at order 0).
    pub g: FourierSeries,
    pub h: FourierSeries,
    /// Right-hand side `eta` of the finite-dimensional equation.
    pub eta: FourierSeries,
    /// Right-hand side `H` of the transport equation.
    pub forcing: PhaseHistoryField,
    pub near_resonant: Vec<MultiIndex>,
}

/// Torus embedding and reduced vector field, order by order in the coupling.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub omega: Vec<f64>,
    pub tau: f64,
    pub orders: Vec<OrderTerms>,
}

impl Expansion {
    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn f(&self, l: usize) -> &FourierSeries {
        &self.orders[l].f
    }

    pub fn e(&self, l: usize) -> &FourierSeries {
        &self.orders[l].e
    }

    pub fn e_hist(&self, l: usize) -> &PhaseHistoryField {
        &self.orders[l].e_hist
    }

    /// `sum_l eps^l X_l` for the series picked by `pick`.
    fn summed<F>(&self, eps: f64, pick: F) -> Result<FourierSeries>
    where
        F: Fn(&OrderTerms) -> &FourierSeries,
    {
        let mut acc = pick(&self.orders[0]).clone();
        for (l, o) in self.orders.iter().enumerate().skip(1) {
            acc = acc.add(&pick(o).scale_real(eps.powi(l as i32)))?;
        }
        Ok(acc)
    }

    pub fn f_eps(&self, eps: f64) -> Result<FourierSeries> {
        self.summed(eps, |o| &o.f)
    }

    pub fn e_eps(&self, eps: f64) -> Result<FourierSeries> {
        self.summed(eps, |o| &o.e)
    }

    pub fn e_hist_eps(&self, eps: f64) -> Result<PhaseHistoryField> {
        let mut acc = self.orders[0].e_hist.clone();
        for (l, o) in self.orders.iter().enumerate().skip(1) {
            acc = acc.add(&o.e_hist.scale(C64::new(eps.powi(l as i32), 0.0)))?;
        }
        Ok(acc)
    }

    pub fn to_document(&self) -> ExpansionDocument {
        ExpansionDocument {
            omega: self.omega.clone(),
            tau: self.tau,
            orders: self
                .orders
                .iter()
                .enumerate()
                .map(|(l, o)| OrderDocument {
                    order: l,
                    f: o.f.to_document(),
                    e: o.e.to_document(),
                    e_hist: o.e_hist.to_document(),
                })
                .collect(),
        }
    }
}

/// JSON shape of an [`Expansion`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionDocument {
    pub omega: Vec<f64>,
    pub tau: f64,
    pub orders: Vec<OrderDocument>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderDocument {
    pub order: usize,
    pub f: SeriesDocument,
    pub e: SeriesDocument,
    #[serde(rename = "E")]
    pub e_hist: HistoryDocument,
}

/// Solve the homological equations up to `max_order`.
pub fn reduce(model: &ModelSpec, frame: &FloquetFrame, max_order: usize, opts: &ReduceOptions) -> Result<Expansion> {
    if max_order > MAX_ORDER {
        return Err(Error::UnsupportedOrder(max_order));
    }
    let m = model.m();
    let n = model.n();
    let tau = model.tau();
    let omega = model.omega();
    let res = Resonance::new(&omega, opts.tol_res);
    let lattice = opts.lattice(m);
    let o0 = build_order0(model);
    let mut orders = vec![OrderTerms {
        f: o0.f.clone(),
        e: o0.e.clone(),
        e_hist: o0.e_hist.clone(),
        g: FourierSeries::zeros(m, m, 0),
        h: FourierSeries::zeros(m, n - m, 0),
        eta: FourierSeries::zeros(m, n, 0),
        forcing: PhaseHistoryField::zeros(m, n, tau),
        near_resonant: Vec::new(),
    }];
    for l in 1..=max_order {
        let (eta, forcing) = if l == 1 {
            (eta1(model, &o0, &lattice, opts.order)?, PhaseHistoryField::zeros(m, n, tau))
        } else {
            let p = &orders[1];
            (
                eta2(model, &o0, &p.e, &p.e_hist, &p.f, &lattice, opts.order)?,
                h2(&p.e_hist, &p.f)?,
            )
        };
        let tang = solve_tangential(&eta, frame, &res, opts.order)?;
        let normal = solve_normal(&eta, frame, &res)?;
        let e = assemble_e(&tang.g, &normal.h, frame)?;
        let e_hist = lift_history(&e, &tang.f, &forcing, &o0.e_hist, &res)?;
        orders.push(OrderTerms {
            f: tang.f,
            e,
            e_hist,
            g: tang.g,
            h: normal.h,
            eta,
            forcing,
            near_resonant: tang.near_resonant,
        });
    }
    Ok(Expansion { omega, tau, orders })
}

/// Sup-norm residuals of the two conjugacy equations for the eps-summed
/// expansion: `r_fin` of `de/dphi . f - F(e) - eps G(E)` over `lattice`, and
/// `r_tr` of `dE/dphi . f - dE/ds` over `lattice` times `s_points` delays.
pub fn conjugacy_residual(
    expansion: &Expansion,
    model: &ModelSpec,
    eps: f64,
    lattice: &Lattice,
    s_points: usize,
) -> Result<(f64, f64)> {
    let n = model.n();
    let m = model.m();
    let e = expansion.e_eps(eps)?;
    let f = expansion.f_eps(eps)?;
    let hist = expansion.e_hist_eps(eps)?;
    let grad_e = e.gradient();
    let grad_hist = hist.gradient();
    let ds_hist = hist.d_ds();
    let offsets = model.offsets();
    let r_fin = crate::exec::max_indexed(lattice.len(), |i| {
        let phi = lattice.point(i);
        let x = e.eval_real(&phi);
        let lhs = mat_at(&grad_e, n, m, &phi) * DVector::from_vec(f.eval_real(&phi));
        let g = model.coupling(&x, |src, delay| {
            let v: Vec<f64> = hist.eval_unchecked(&phi, -delay).into_iter().map(|z| z.re).collect();
            let d = model.oscillators[src].dynamics.dim();
            v[offsets[src]..offsets[src] + d].to_vec()
        });
        let rhs = model.field(&x);
        (0..n)
            .map(|r| (lhs[r] - rhs[r] - eps * g[r]).abs())
            .fold(0.0, f64::max)
    });
    let tau = expansion.tau;
    let s_values: Vec<f64> = if tau == 0.0 || s_points < 2 {
        vec![0.0]
    } else {
        (0..s_points).map(|j| -tau * j as f64 / (s_points - 1) as f64).collect()
    };
    let r_tr = crate::exec::max_indexed(lattice.len(), |i| {
        let phi = lattice.point(i);
        let fv = DVector::from_vec(f.eval_real(&phi));
        s_values
            .iter()
            .map(|&s| {
                let g: Vec<f64> = grad_hist.eval_unchecked(&phi, s).into_iter().map(|z| z.re).collect();
                let lhs = nalgebra::DMatrix::from_row_slice(n, m, &g) * &fv;
                let rhs = ds_hist.eval_unchecked(&phi, s);
                (0..n).map(|r| (lhs[r] - rhs[r].re).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    });
    Ok((r_fin, r_tr))
}
