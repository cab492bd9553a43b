use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::index::MultiIndex;
use super::lattice::{collocate, Lattice};
use crate::error::{Error, Result};

pub type C64 = Complex64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Operands with at most this many modes are multiplied by exact sparse
/// convolution; larger ones go through collocation.
pub const SPARSE_PRODUCT_LIMIT: usize = 64;

/// How the values of two series are combined pointwise in a product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Product {
    /// Entry-by-entry product. A dimension-1 operand is broadcast.
    Componentwise,
    /// Row-major `rows x inner` matrix times `inner x cols` matrix
    /// (`cols` is inferred from the right operand, 1 for a vector).
    Matrix { rows: usize, inner: usize },
}

impl Product {
    /// Output dimension for operands of the given value dimensions.
    pub fn output_dim(&self, da: usize, db: usize) -> Result<usize> {
        match *self {
            Product::Componentwise => {
                if da == db || db == 1 {
                    Ok(da)
                } else if da == 1 {
                    Ok(db)
                } else {
                    Err(Error::DimensionMismatch(format!(
                        "componentwise product of dimensions {da} and {db}"
                    )))
                }
            }
            Product::Matrix { rows, inner } => {
                if rows * inner != da || inner == 0 || !db.is_multiple_of(inner) {
                    return Err(Error::DimensionMismatch(format!(
                        "matrix product {rows}x{inner} with value dimensions {da} and {db}"
                    )));
                }
                Ok(rows * (db / inner))
            }
        }
    }

    /// Accumulate `a (*) b` into `out`.
    pub fn accumulate(&self, a: &[C64], b: &[C64], out: &mut [C64]) {
        match *self {
            Product::Componentwise => {
                if a.len() == b.len() {
                    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                        *o += x * y;
                    }
                } else if b.len() == 1 {
                    for (o, x) in out.iter_mut().zip(a) {
                        *o += x * b[0];
                    }
                } else {
                    for (o, y) in out.iter_mut().zip(b) {
                        *o += a[0] * y;
                    }
                }
            }
            Product::Matrix { rows, inner } => {
                let cols = b.len() / inner;
                for r in 0..rows {
                    for c in 0..cols {
                        let mut acc = C64::new(0.0, 0.0);
                        for t in 0..inner {
                            acc += a[r * inner + t] * b[t * cols + c];
                        }
                        out[r * cols + c] += acc;
                    }
                }
            }
        }
    }
}

/// Truncated Fourier expansion of a vector-valued function on the m-torus,
/// `f(phi) = sum_k c_k exp(i<k, phi>)` with `|k|_1 <= order`.
///
/// Coefficients are stored sparsely. A `real_valued` series keeps the
/// conjugate pairing `c_{-k} = conj(c_k)`; operations that preserve reality
/// propagate the flag.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSeries {
    m: usize,
    dim_out: usize,
    order: usize,
    real_valued: bool,
    modes: BTreeMap<MultiIndex, Vec<C64>>,
}

impl FourierSeries {
    pub fn zeros(m: usize, dim_out: usize, order: usize) -> Self {
        FourierSeries {
            m,
            dim_out,
            order,
            real_valued: true,
            modes: BTreeMap::new(),
        }
    }

    /// Constant real series.
    pub fn constant(m: usize, values: &[f64]) -> Self {
        let mut s = Self::zeros(m, values.len(), 0);
        if values.iter().any(|&v| v != 0.0) {
            s.modes.insert(
                MultiIndex::zero(m),
                values.iter().map(|&v| C64::new(v, 0.0)).collect(),
            );
        }
        s
    }

    /// Build from explicit modes. Repeated wavevectors accumulate; `order`
    /// is raised if a mode lies beyond it.
    pub fn from_modes<It>(m: usize, dim_out: usize, order: usize, real_valued: bool, modes: It) -> Result<Self>
    where
        It: IntoIterator<Item = (MultiIndex, Vec<C64>)>,
    {
        let mut s = Self::zeros(m, dim_out, order);
        s.real_valued = real_valued;
        for (k, c) in modes {
            if k.len() != m || c.len() != dim_out {
                return Err(Error::DimensionMismatch(format!(
                    "mode {k} with {} values in a series with m = {m}, dim_out = {dim_out}",
                    c.len()
                )));
            }
            s.order = s.order.max(k.l1());
            s.accumulate(k, &c);
        }
        s.drop_zeros();
        Ok(s)
    }

    /// Single-mode scalar series `c exp(i<k, phi>)` (complex-valued).
    pub fn monomial(k: MultiIndex, c: C64) -> Self {
        let m = k.len();
        let order = k.l1();
        let mut s = Self::zeros(m, 1, order);
        s.real_valued = k.is_zero() && c.im == 0.0;
        s.accumulate(k, &[c]);
        s.drop_zeros();
        s
    }

    /// Real scalar `a cos(<k,phi> + theta) + b sin(<k,phi> + theta)`.
    pub fn harmonic(k: &MultiIndex, theta: f64, a: f64, b: f64) -> Self {
        let m = k.len();
        if k.is_zero() {
            return Self::constant(m, &[a * theta.cos() + b * theta.sin()]);
        }
        // a cos x + b sin x = ((a - ib)/2) e^{ix} + ((a + ib)/2) e^{-ix}
        let e = C64::from_polar(1.0, theta);
        let plus = C64::new(a, -b) * 0.5 * e;
        let mut s = Self::zeros(m, 1, k.l1());
        s.accumulate(k.clone(), &[plus]);
        s.accumulate(k.neg(), &[plus.conj()]);
        s.drop_zeros();
        s
    }

    pub fn torus_dim(&self) -> usize {
        self.m
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// Declared truncation order `K`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Largest `|k|_1` among stored modes.
    pub fn support_order(&self) -> usize {
        self.modes.keys().map(MultiIndex::l1).max().unwrap_or(0)
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> impl Iterator<Item = (&MultiIndex, &Vec<C64>)> {
        self.modes.iter()
    }

    pub fn coeff(&self, k: &MultiIndex) -> Option<&[C64]> {
        self.modes.get(k).map(Vec::as_slice)
    }

    /// Coefficient vector, zeros when the mode is absent.
    pub fn coeff_or_zero(&self, k: &MultiIndex) -> Vec<C64> {
        self.modes
            .get(k)
            .cloned()
            .unwrap_or_else(|| vec![C64::new(0.0, 0.0); self.dim_out])
    }

    /// Add `c` to the coefficient of mode `k`.
    pub fn accumulate(&mut self, k: MultiIndex, c: &[C64]) {
        debug_assert_eq!(c.len(), self.dim_out);
        self.order = self.order.max(k.l1());
        let entry = self
            .modes
            .entry(k)
            .or_insert_with(|| vec![C64::new(0.0, 0.0); c.len()]);
        for (e, v) in entry.iter_mut().zip(c) {
            *e += v;
        }
    }

    fn drop_zeros(&mut self) {
        self.modes.retain(|_, c| c.iter().any(|v| v.re != 0.0 || v.im != 0.0));
    }

    /// Drop modes whose largest coefficient magnitude is `<= tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut s = self.clone();
        s.modes.retain(|_, c| c.iter().any(|v| v.norm() > tol));
        s
    }

    /// Drop modes with `|k|_1 > order` and set the declared order.
    pub fn truncated(&self, order: usize) -> Self {
        let mut s = self.clone();
        s.modes.retain(|k, _| k.l1() <= order);
        s.order = order;
        s
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order.max(self.support_order());
        self
    }

    pub fn eval(&self, phi: &[f64]) -> Vec<C64> {
        debug_assert_eq!(phi.len(), self.m);
        let mut out = vec![C64::new(0.0, 0.0); self.dim_out];
        for (k, c) in &self.modes {
            let e = C64::from_polar(1.0, k.dot(phi));
            for (o, v) in out.iter_mut().zip(c) {
                *o += v * e;
            }
        }
        out
    }

    /// Real part of [`eval`](Self::eval).
    pub fn eval_real(&self, phi: &[f64]) -> Vec<f64> {
        self.eval(phi).into_iter().map(|v| v.re).collect()
    }

    /// Sum of coefficient magnitudes, a bound on the sup norm.
    pub fn coefficient_l1(&self) -> f64 {
        self.modes.values().flatten().map(|v| v.norm()).sum()
    }

    fn check_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.m != other.m || self.dim_out != other.dim_out {
            return Err(Error::DimensionMismatch(format!(
                "{what}: (m = {}, dim_out = {}) vs (m = {}, dim_out = {})",
                self.m, self.dim_out, other.m, other.dim_out
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        let mut s = self.clone();
        s.order = self.order.max(other.order);
        s.real_valued = self.real_valued && other.real_valued;
        for (k, c) in &other.modes {
            s.accumulate(k.clone(), c);
        }
        s.drop_zeros();
        Ok(s)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale_real(-1.0))
    }

    pub fn scale(&self, a: C64) -> Self {
        let mut s = self.clone();
        for c in s.modes.values_mut() {
            for v in c.iter_mut() {
                *v *= a;
            }
        }
        s.real_valued = self.real_valued && a.im == 0.0;
        s.drop_zeros();
        s
    }

    pub fn scale_real(&self, a: f64) -> Self {
        self.scale(C64::new(a, 0.0))
    }

    /// `d/dphi . omega`: mode `k` is multiplied by `i<k, omega>`.
    pub fn directional_derivative(&self, omega: &[f64]) -> Self {
        assert_eq!(omega.len(), self.m, "omega must have one entry per torus angle");
        let mut s = self.clone();
        for (k, c) in s.modes.iter_mut() {
            let f = I * k.dot(omega);
            for v in c.iter_mut() {
                *v *= f;
            }
        }
        s.drop_zeros();
        s
    }

    /// `d/dphi_j`.
    pub fn partial(&self, j: usize) -> Self {
        let mut dir = vec![0.0; self.m];
        dir[j] = 1.0;
        self.directional_derivative(&dir)
    }

    /// Jacobian `d f / d phi` as a row-major `dim_out x m` matrix series.
    pub fn gradient(&self) -> Self {
        let m = self.m;
        let mut s = Self::zeros(m, self.dim_out * m, self.order);
        s.real_valued = self.real_valued;
        for (k, c) in &self.modes {
            let mut g = vec![C64::new(0.0, 0.0); self.dim_out * m];
            for (r, v) in c.iter().enumerate() {
                for (j, &kj) in k.as_slice().iter().enumerate() {
                    g[r * m + j] = I * kj as f64 * v;
                }
            }
            s.accumulate(k.clone(), &g);
        }
        s.drop_zeros();
        s
    }

    /// `f(phi + shift)`: mode `k` picks up `exp(i<k, shift>)`.
    pub fn shifted(&self, shift: &[f64]) -> Self {
        let mut s = self.clone();
        for (k, c) in s.modes.iter_mut() {
            let e = C64::from_polar(1.0, k.dot(shift));
            for v in c.iter_mut() {
                *v *= e;
            }
        }
        s
    }

    /// Entries `idx` of the value vector, in the given order.
    pub fn select(&self, idx: &[usize]) -> Self {
        let mut s = Self::zeros(self.m, idx.len(), self.order);
        s.real_valued = self.real_valued;
        for (k, c) in &self.modes {
            let v: Vec<C64> = idx.iter().map(|&i| c[i]).collect();
            s.accumulate(k.clone(), &v);
        }
        s.drop_zeros();
        s
    }

    pub fn component(&self, i: usize) -> Self {
        self.select(&[i])
    }

    /// Concatenate value vectors of series on the same torus.
    pub fn stack(parts: &[FourierSeries]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::DimensionMismatch("stack of zero series".into()))?;
        let m = first.m;
        let dim: usize = parts.iter().map(|p| p.dim_out).sum();
        let mut s = Self::zeros(m, dim, parts.iter().map(|p| p.order).max().unwrap_or(0));
        s.real_valued = parts.iter().all(|p| p.real_valued);
        let mut offset = 0;
        for p in parts {
            if p.m != m {
                return Err(Error::DimensionMismatch("stack of series on different tori".into()));
            }
            for (k, c) in &p.modes {
                let mut v = vec![C64::new(0.0, 0.0); dim];
                v[offset..offset + p.dim_out].copy_from_slice(c);
                s.accumulate(k.clone(), &v);
            }
            offset += p.dim_out;
        }
        s.drop_zeros();
        Ok(s)
    }

    /// Product of two series. Small operands use exact sparse convolution,
    /// larger ones collocation on a `(2(K_a + K_b) + 1)^m` lattice; either way
    /// the result is truncated to `|k|_1 <= K_a + K_b`.
    pub fn multiply(&self, other: &Self, rule: Product) -> Result<Self> {
        if self.m != other.m {
            return Err(Error::DimensionMismatch(format!(
                "product of series on T^{} and T^{}",
                self.m, other.m
            )));
        }
        let dim = rule.output_dim(self.dim_out, other.dim_out)?;
        let order = self.order + other.order;
        let real = self.real_valued && other.real_valued;
        if self.modes.len() <= SPARSE_PRODUCT_LIMIT && other.modes.len() <= SPARSE_PRODUCT_LIMIT {
            let mut s = Self::zeros(self.m, dim, order);
            s.real_valued = real;
            let mut buf = vec![C64::new(0.0, 0.0); dim];
            for (ka, ca) in &self.modes {
                for (kb, cb) in &other.modes {
                    let k = ka.add(kb);
                    if k.l1() > order {
                        continue;
                    }
                    buf.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                    rule.accumulate(ca, cb, &mut buf);
                    s.accumulate(k, &buf);
                }
            }
            s.drop_zeros();
            Ok(s)
        } else {
            let lattice = Lattice::new(self.m, 2 * order + 1);
            let samples = crate::exec::map_indexed(lattice.len(), |i| {
                let phi = lattice.point(i);
                let mut out = vec![C64::new(0.0, 0.0); dim];
                rule.accumulate(&self.eval(&phi), &other.eval(&phi), &mut out);
                out
            });
            let mut s = collocate(&lattice, &samples, order)?;
            if !real {
                s.real_valued = false;
            }
            Ok(s)
        }
    }

    /// Whether `c_{-k} = conj(c_k)` holds mode by mode to `tol`.
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        self.modes.iter().all(|(k, c)| {
            let partner = self.coeff_or_zero(&k.neg());
            c.iter().zip(&partner).all(|(a, b)| (a - b.conj()).norm() <= tol)
        }) && self.modes.keys().all(|k| {
            self.modes.contains_key(&k.neg())
                || self.modes[k].iter().all(|v| v.norm() <= tol)
        })
    }

    /// Project onto real-valued functions: `c_k <- (c_k + conj(c_{-k})) / 2`.
    pub fn real_part(&self) -> Self {
        let mut s = Self::zeros(self.m, self.dim_out, self.order);
        let keys: Vec<MultiIndex> = self
            .modes
            .keys()
            .flat_map(|k| [k.clone(), k.neg()])
            .collect();
        for k in keys {
            if s.modes.contains_key(&k) {
                continue;
            }
            let a = self.coeff_or_zero(&k);
            let b = self.coeff_or_zero(&k.neg());
            let v: Vec<C64> = a.iter().zip(&b).map(|(x, y)| (x + y.conj()) * 0.5).collect();
            s.modes.insert(k, v);
        }
        s.drop_zeros();
        s.real_valued = true;
        s
    }

    /// Mark a series as real-valued without changing coefficients.
    pub fn assume_real(mut self, real: bool) -> Self {
        self.real_valued = real;
        self
    }

    /// Largest pointwise deviation `|self - other|` over a lattice.
    pub fn max_deviation(&self, other: &Self, lattice: &Lattice) -> Result<f64> {
        let diff = self.sub(other)?;
        Ok(crate::exec::max_indexed(lattice.len(), |i| {
            diff.eval(&lattice.point(i))
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max)
        }))
    }

    pub fn to_document(&self) -> SeriesDocument {
        SeriesDocument {
            m: self.m,
            dim_out: self.dim_out,
            order: self.order,
            real_valued: self.real_valued,
            modes: self
                .modes
                .iter()
                .map(|(k, c)| ModeDocument {
                    k: k.as_slice().to_vec(),
                    re: c.iter().map(|v| v.re).collect(),
                    im: c.iter().map(|v| v.im).collect(),
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &SeriesDocument) -> Result<Self> {
        let modes = doc.modes.iter().map(|md| {
            (
                MultiIndex::new(md.k.clone()),
                md.re.iter().zip(&md.im).map(|(&r, &i)| C64::new(r, i)).collect::<Vec<_>>(),
            )
        });
        for md in &doc.modes {
            if md.re.len() != md.im.len() {
                return Err(Error::DimensionMismatch("re and im lengths differ".into()));
            }
        }
        Self::from_modes(doc.m, doc.dim_out, doc.order, doc.real_valued, modes)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(s)?)
    }
}

/// JSON shape of a [`FourierSeries`]: `{m, dim_out, K, modes: [{k, re, im}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesDocument {
    pub m: usize,
    pub dim_out: usize,
    #[serde(rename = "K")]
    pub order: usize,
    #[serde(default = "default_true")]
    pub real_valued: bool,
    pub modes: Vec<ModeDocument>,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeDocument {
    pub k: Vec<i32>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}
