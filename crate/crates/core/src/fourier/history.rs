use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::index::MultiIndex;
use super::resonance::Resonance;
use super::series::{FourierSeries, Product};
use crate::error::{Error, Result};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// One term `c exp(i<k, phi>) s^p exp(i q s)` of a [`PhaseHistoryField`].
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryTerm {
    pub k: MultiIndex,
    pub p: u32,
    pub q: f64,
    pub c: Vec<C64>,
}

impl HistoryTerm {
    fn factor(&self, phi: &[f64], s: f64) -> C64 {
        C64::from_polar(s.powi(self.p as i32), self.k.dot(phi) + self.q * s)
    }
}

/// Vector-valued function of `(phi, s)` on the torus times `[-tau, 0]`,
/// stored as a finite sum of [`HistoryTerm`]s.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseHistoryField {
    m: usize,
    dim_out: usize,
    tau: f64,
    terms: Vec<HistoryTerm>,
}

impl PhaseHistoryField {
    pub fn zeros(m: usize, dim_out: usize, tau: f64) -> Self {
        PhaseHistoryField {
            m,
            dim_out,
            tau,
            terms: Vec::new(),
        }
    }

    /// `s`-independent field equal to `e(phi)`.
    pub fn from_series(e: &FourierSeries, tau: f64) -> Self {
        let mut h = Self::zeros(e.torus_dim(), e.dim_out(), tau);
        for (k, c) in e.modes() {
            h.terms.push(HistoryTerm {
                k: k.clone(),
                p: 0,
                q: 0.0,
                c: c.clone(),
            });
        }
        h
    }

    /// `e(phi + s omega)`: mode `k` becomes a term with `q = <k, omega>`.
    pub fn shifted_along(e: &FourierSeries, omega: &[f64], tau: f64) -> Self {
        let mut h = Self::from_series(e, tau);
        for t in &mut h.terms {
            t.q = t.k.dot(omega);
        }
        h
    }

    pub fn from_terms(m: usize, dim_out: usize, tau: f64, terms: Vec<HistoryTerm>) -> Result<Self> {
        for t in &terms {
            if t.k.len() != m || t.c.len() != dim_out {
                return Err(Error::DimensionMismatch(format!(
                    "history term {} with {} values in a field with m = {m}, dim_out = {dim_out}",
                    t.k,
                    t.c.len()
                )));
            }
        }
        Ok(PhaseHistoryField { m, dim_out, tau, terms })
    }

    pub fn torus_dim(&self) -> usize {
        self.m
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn terms(&self) -> &[HistoryTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest power of `s` among the terms.
    pub fn max_power(&self) -> u32 {
        self.terms.iter().map(|t| t.p).max().unwrap_or(0)
    }

    pub fn eval(&self, phi: &[f64], s: f64) -> Result<Vec<C64>> {
        let slack = 1e-12 * self.tau.max(1.0);
        if s > slack || s < -self.tau - slack {
            return Err(Error::OutOfDomain { s, tau: self.tau });
        }
        Ok(self.eval_unchecked(phi, s))
    }

    /// Evaluate without the domain check (the closed form extends to all `s`).
    pub fn eval_unchecked(&self, phi: &[f64], s: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim_out];
        for t in &self.terms {
            let f = t.factor(phi, s);
            for (o, v) in out.iter_mut().zip(&t.c) {
                *o += v * f;
            }
        }
        out
    }

    /// The series `phi -> E(phi, s)` at a fixed `s`.
    pub fn at_s(&self, s: f64) -> FourierSeries {
        let mut out = FourierSeries::zeros(self.m, self.dim_out, 0);
        for t in &self.terms {
            let f = C64::from_polar(s.powi(t.p as i32), t.q * s);
            let c: Vec<C64> = t.c.iter().map(|v| v * f).collect();
            out.accumulate(t.k.clone(), &c);
        }
        out.pruned(0.0).assume_real(self.is_conjugate_paired(1e-12))
    }

    /// `E(phi, 0)`: terms with `p > 0` vanish.
    pub fn boundary_trace(&self) -> FourierSeries {
        self.at_s(0.0)
    }

    /// `dE/ds` by the product rule on `s^p exp(i q s)`.
    pub fn d_ds(&self) -> Self {
        let mut out = Self::zeros(self.m, self.dim_out, self.tau);
        for t in &self.terms {
            if t.q != 0.0 {
                out.terms.push(HistoryTerm {
                    k: t.k.clone(),
                    p: t.p,
                    q: t.q,
                    c: t.c.iter().map(|v| v * I * t.q).collect(),
                });
            }
            if t.p > 0 {
                out.terms.push(HistoryTerm {
                    k: t.k.clone(),
                    p: t.p - 1,
                    q: t.q,
                    c: t.c.iter().map(|v| v * t.p as f64).collect(),
                });
            }
        }
        out.normalized()
    }

    /// `s E(phi, s)`.
    pub fn times_s(&self) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.p += 1;
        }
        out
    }

    /// `dE/dphi . omega`.
    pub fn directional_derivative(&self, omega: &[f64]) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            let f = I * t.k.dot(omega);
            t.c.iter_mut().for_each(|v| *v *= f);
        }
        out.normalized()
    }

    /// Jacobian in `phi` as a row-major `dim_out x m` matrix field.
    pub fn gradient(&self) -> Self {
        let m = self.m;
        let mut out = Self::zeros(m, self.dim_out * m, self.tau);
        for t in &self.terms {
            let mut g = vec![C64::new(0.0, 0.0); self.dim_out * m];
            for (r, v) in t.c.iter().enumerate() {
                for (j, &kj) in t.k.as_slice().iter().enumerate() {
                    g[r * m + j] = I * kj as f64 * v;
                }
            }
            out.terms.push(HistoryTerm {
                k: t.k.clone(),
                p: t.p,
                q: t.q,
                c: g,
            });
        }
        out.normalized()
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.m != other.m || self.dim_out != other.dim_out {
            return Err(Error::DimensionMismatch(format!(
                "history fields (m = {}, dim_out = {}) and (m = {}, dim_out = {})",
                self.m, self.dim_out, other.m, other.dim_out
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        out.tau = self.tau.max(other.tau);
        out.terms.extend(other.terms.iter().cloned());
        Ok(out.normalized())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, a: C64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.c.iter_mut().for_each(|v| *v *= a);
        }
        out.normalized()
    }

    /// Pointwise product of two history fields.
    pub fn multiply(&self, other: &Self, rule: Product) -> Result<Self> {
        if self.m != other.m {
            return Err(Error::DimensionMismatch("history product on different tori".into()));
        }
        let dim = rule.output_dim(self.dim_out, other.dim_out)?;
        let mut out = Self::zeros(self.m, dim, self.tau.max(other.tau));
        for a in &self.terms {
            for b in &other.terms {
                let mut c = vec![C64::new(0.0, 0.0); dim];
                rule.accumulate(&a.c, &b.c, &mut c);
                out.terms.push(HistoryTerm {
                    k: a.k.add(&b.k),
                    p: a.p + b.p,
                    q: a.q + b.q,
                    c,
                });
            }
        }
        Ok(out.normalized())
    }

    /// Product with an `s`-independent series on the right.
    pub fn multiply_series(&self, other: &FourierSeries, rule: Product) -> Result<Self> {
        self.multiply(&Self::from_series(other, self.tau), rule)
    }

    /// `int_0^s E(phi + omega (s - zeta), zeta) d zeta`, in closed form.
    ///
    /// With `kappa = <k, omega>` and `mu = q - kappa`, a term contributes
    /// `c exp(i<k,phi>) exp(i kappa s) int_0^s zeta^p exp(i mu zeta) d zeta`.
    /// For `|mu|` below the resonance threshold the integral is a pure power
    /// `s^{p+1} / (p+1)`; otherwise it is `exp(i mu s) sum_j a_j s^j + b`,
    /// obtained by repeated integration by parts.
    pub fn transport_integral(&self, res: &Resonance) -> Self {
        let omega = res.omega();
        let thr = res.threshold().max(1e-300);
        let mut out = Self::zeros(self.m, self.dim_out, self.tau);
        for t in &self.terms {
            let kappa = if res.is_resonant(&t.k) { 0.0 } else { t.k.dot(omega) };
            let mu = t.q - kappa;
            if mu.abs() <= thr {
                let f = 1.0 / (t.p as f64 + 1.0);
                out.terms.push(HistoryTerm {
                    k: t.k.clone(),
                    p: t.p + 1,
                    q: kappa,
                    c: t.c.iter().map(|v| v * f).collect(),
                });
                continue;
            }
            let inv = 1.0 / (I * mu);
            let mut a = vec![inv];
            let mut b = -inv;
            for p in 1..=t.p {
                let f = -(p as f64) * inv;
                for aj in a.iter_mut() {
                    *aj *= f;
                }
                a.push(inv);
                b *= f;
            }
            for (j, aj) in a.iter().enumerate() {
                out.terms.push(HistoryTerm {
                    k: t.k.clone(),
                    p: j as u32,
                    q: t.q,
                    c: t.c.iter().map(|v| v * aj).collect(),
                });
            }
            out.terms.push(HistoryTerm {
                k: t.k.clone(),
                p: 0,
                q: kappa,
                c: t.c.iter().map(|v| v * b).collect(),
            });
        }
        out.normalized()
    }

    /// Merge terms with equal `(k, p)` and `q` agreeing to `1e-12` relative;
    /// drop vanishing terms. Term order is deterministic.
    pub fn normalized(&self) -> Self {
        let mut terms = self.terms.clone();
        terms.sort_by(|a, b| {
            a.k.cmp(&b.k)
                .then(a.p.cmp(&b.p))
                .then(a.q.partial_cmp(&b.q).unwrap_or(std::cmp::Ordering::Equal))
        });
        let mut merged: Vec<HistoryTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            if let Some(last) = merged.last_mut() {
                if last.k == t.k && last.p == t.p && (last.q - t.q).abs() <= 1e-12 * last.q.abs().max(1.0) {
                    for (a, b) in last.c.iter_mut().zip(&t.c) {
                        *a += b;
                    }
                    continue;
                }
            }
            merged.push(t);
        }
        merged.retain(|t| t.c.iter().any(|v| v.re != 0.0 || v.im != 0.0));
        PhaseHistoryField {
            m: self.m,
            dim_out: self.dim_out,
            tau: self.tau,
            terms: merged,
        }
    }

    /// Drop terms whose coefficients are all at most `tol` in magnitude.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut out = self.clone();
        out.terms.retain(|t| t.c.iter().any(|v| v.norm() > tol));
        out
    }

    /// Whether every term `(k, p, q, c)` has a partner `(-k, p, -q, conj c)`.
    pub fn is_conjugate_paired(&self, tol: f64) -> bool {
        let scale = self
            .terms
            .iter()
            .flat_map(|t| t.c.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
            .max(1.0);
        self.terms.iter().all(|t| {
            let nk = t.k.neg();
            let partner: Vec<C64> = self
                .terms
                .iter()
                .filter(|u| u.k == nk && u.p == t.p && (u.q + t.q).abs() <= 1e-12 * t.q.abs().max(1.0))
                .fold(vec![C64::new(0.0, 0.0); self.dim_out], |mut acc, u| {
                    acc.iter_mut().zip(&u.c).for_each(|(a, b)| *a += b);
                    acc
                });
            t.c.iter()
                .zip(&partner)
                .all(|(a, b)| (a - b.conj()).norm() <= tol * scale)
        })
    }

    pub fn to_document(&self) -> HistoryDocument {
        HistoryDocument {
            m: self.m,
            dim_out: self.dim_out,
            tau: self.tau,
            terms: self
                .terms
                .iter()
                .map(|t| TermDocument {
                    k: t.k.as_slice().to_vec(),
                    p: t.p,
                    q: t.q,
                    re: t.c.iter().map(|v| v.re).collect(),
                    im: t.c.iter().map(|v| v.im).collect(),
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &HistoryDocument) -> Result<Self> {
        let terms = doc
            .terms
            .iter()
            .map(|t| HistoryTerm {
                k: MultiIndex::new(t.k.clone()),
                p: t.p,
                q: t.q,
                c: t.re.iter().zip(&t.im).map(|(&r, &i)| C64::new(r, i)).collect(),
            })
            .collect();
        Self::from_terms(doc.m, doc.dim_out, doc.tau, terms)
    }
}

/// JSON shape of a [`PhaseHistoryField`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryDocument {
    pub m: usize,
    pub dim_out: usize,
    pub tau: f64,
    pub terms: Vec<TermDocument>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDocument {
    pub k: Vec<i32>,
    pub p: u32,
    pub q: f64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(k: &[i32], p: u32, q: f64, c: C64) -> PhaseHistoryField {
        PhaseHistoryField::from_terms(
            k.len(),
            1,
            1.0,
            vec![HistoryTerm {
                k: MultiIndex::new(k.to_vec()),
                p,
                q,
                c: vec![c],
            }],
        )
        .unwrap()
    }

    #[test]
    fn power_terms_vanish_on_boundary() {
        let e = single(&[1, 0], 1, 0.7, C64::new(2.0, 0.0));
        assert!(e.boundary_trace().is_empty());
    }

    #[test]
    fn d_ds_of_exponential() {
        let e = single(&[1, 0], 0, 0.7, C64::new(2.0, 1.0));
        let d = e.d_ds();
        assert_eq!(d.terms().len(), 1);
        let t = &d.terms()[0];
        assert_eq!((t.p, t.q), (0, 0.7));
        assert!((t.c[0] - I * 0.7 * C64::new(2.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn domain_is_checked() {
        let e = single(&[0, 0], 0, 0.0, C64::new(1.0, 0.0));
        assert!(e.eval(&[0.0, 0.0], -0.5).is_ok());
        assert!(matches!(e.eval(&[0.0, 0.0], 0.1), Err(Error::OutOfDomain { .. })));
        assert!(e.eval(&[0.0, 0.0], -1.5).is_err());
    }

    #[test]
    fn transport_integral_matches_quadrature() {
        let omega = [1.0, 1.0];
        let res = Resonance::with_default_tol(&omega);
        let cases = [
            single(&[1, 0], 2, 0.3, C64::new(0.5, -1.0)),
            single(&[1, -1], 1, 0.0, C64::new(1.0, 0.0)),
            single(&[2, 0], 0, 2.0, C64::new(0.0, 1.0)),
        ];
        let phi = [0.4, -1.1];
        for e in &cases {
            let integral = e.transport_integral(&res);
            for &s in &[-0.9, -0.3, 0.0] {
                // composite Simpson in zeta
                let n = 2000;
                let h = s / n as f64;
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..=n {
                    let z = i as f64 * h;
                    let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                    let arg: Vec<f64> = phi.iter().zip(&omega).map(|(p, w)| p + w * (s - z)).collect();
                    acc += e.eval_unchecked(&arg, z)[0] * w;
                }
                acc *= h / 3.0;
                let got = integral.eval_unchecked(&phi, s)[0];
                assert!((got - acc).norm() < 1e-10, "{got} vs {acc}");
            }
        }
    }
}
