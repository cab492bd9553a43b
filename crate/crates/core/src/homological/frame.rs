use nalgebra::DMatrix;

use super::model::ModelSpec;
use crate::error::{Error, Result};
use crate::exec;
use crate::fourier::{collocate_real_fn, FourierSeries, Lattice, C64};

/// Tangent and normal bundle of the unperturbed torus with the constant
/// matrix `L` governing normal linear dynamics. Matrix-valued fields are
/// stored row-major as series.
#[derive(Clone, Debug)]
pub struct FloquetFrame {
    pub n: usize,
    pub m: usize,
    /// `n x m`, columns span the tangent space.
    pub t: FourierSeries,
    /// `n x (n - m)`, columns span the normal bundle.
    pub normal: FourierSeries,
    /// `(n - m) x (n - m)`.
    pub l: DMatrix<f64>,
    /// `m x n`, left inverse of `t` annihilating `normal`.
    pub t_pinv: FourierSeries,
    /// `(n - m) x n`, left inverse of `normal` annihilating `t`.
    pub n_pinv: FourierSeries,
    /// `n x n` projection onto the tangent space along the normal bundle.
    pub pi: FourierSeries,
}

/// Diagnostics of a frame on a lattice.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FrameReport {
    /// Largest condition number of `[T | N]`.
    pub max_condition: f64,
    /// Sup of `d_omega N + N L - F'(e0) N`.
    pub pde_residual: f64,
    /// Sups of `T+ T - I`, `T+ N`, `N+ N - I`, `N+ T`.
    pub pinv_residuals: [f64; 4],
    /// Smallest `|Re lambda|` over eigenvalues of `L`.
    pub min_real_part: f64,
}

impl FrameReport {
    pub fn max_pinv_residual(&self) -> f64 {
        self.pinv_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.max_condition < 1e8 && self.pde_residual <= tol && self.max_pinv_residual() <= tol && self.min_real_part >= 1e-6
    }
}

pub(crate) fn mat_at(s: &FourierSeries, rows: usize, cols: usize, phi: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, &s.eval_real(phi))
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            v.push(m[(r, c)]);
        }
    }
    v
}

impl FloquetFrame {
    /// Build the frame from the tangent basis `T = d e0 / d phi`, a supplied
    /// normal bundle and `L`. The left inverses and the projection are the
    /// block rows of `[T | N]^{-1}` evaluated pointwise on `lattice` and
    /// collocated to order `order`.
    pub fn from_normal_bundle(
        e0: &FourierSeries,
        normal: FourierSeries,
        l: DMatrix<f64>,
        lattice: &Lattice,
        order: usize,
    ) -> Result<Self> {
        let n = e0.dim_out();
        let m = e0.torus_dim();
        let k = n - m;
        if normal.dim_out() != n * k || normal.torus_dim() != m || l.shape() != (k, k) {
            return Err(Error::DimensionMismatch(format!(
                "normal bundle must be {n}x{k} on T^{m} with L of size {k}x{k}"
            )));
        }
        let t = e0.gradient();
        let inverses = exec::map_indexed(lattice.len(), |i| {
            let phi = lattice.point(i);
            let mut a = DMatrix::zeros(n, n);
            a.view_mut((0, 0), (n, m)).copy_from(&mat_at(&t, n, m, &phi));
            a.view_mut((0, m), (n, k)).copy_from(&mat_at(&normal, n, k, &phi));
            a.try_inverse()
        });
        if inverses.iter().any(Option::is_none) {
            return Err(Error::InvalidParameters(
                "tangent and normal bundle are not transversal".into(),
            ));
        }
        let inverses: Vec<DMatrix<f64>> = inverses.into_iter().flatten().collect();
        let index_of = |phi: &[f64]| -> usize {
            let h = lattice.step();
            phi.iter()
                .fold(0, |acc, p| acc * lattice.n + ((p / h).round() as usize % lattice.n))
        };
        let t_pinv = collocate_real_fn(lattice, order, |phi| {
            row_major(&inverses[index_of(phi)].rows(0, m).into_owned())
        })?;
        let n_pinv = collocate_real_fn(lattice, order, |phi| {
            row_major(&inverses[index_of(phi)].rows(m, k).into_owned())
        })?;
        let pi = collocate_real_fn(lattice, order, |phi| {
            let tm = mat_at(&t, n, m, phi);
            row_major(&(tm * inverses[index_of(phi)].rows(0, m)))
        })?;
        let prune = |s: FourierSeries| s.pruned(1e-14);
        Ok(FloquetFrame {
            n,
            m,
            t,
            normal,
            l,
            t_pinv: prune(t_pinv),
            n_pinv: prune(n_pinv),
            pi: prune(pi),
        })
    }

    pub fn normal_dim(&self) -> usize {
        self.n - self.m
    }

    /// Check all frame invariants on `lattice`.
    pub fn check(&self, model: &ModelSpec, e0: &FourierSeries, lattice: &Lattice) -> FrameReport {
        let (n, m, k) = (self.n, self.m, self.normal_dim());
        let omega = model.omega();
        let dn = self.normal.directional_derivative(&omega);
        let per_point = exec::map_indexed(lattice.len(), |i| {
            let phi = lattice.point(i);
            let tm = mat_at(&self.t, n, m, &phi);
            let nm = mat_at(&self.normal, n, k, &phi);
            let tp = mat_at(&self.t_pinv, m, n, &phi);
            let np = mat_at(&self.n_pinv, k, n, &phi);
            let mut a = DMatrix::zeros(n, n);
            a.view_mut((0, 0), (n, m)).copy_from(&tm);
            a.view_mut((0, m), (n, k)).copy_from(&nm);
            let sv = a.singular_values();
            let cond = sv.max() / sv.min();
            let jac = model.jacobian(&e0.eval_real(&phi));
            let pde = mat_at(&dn, n, k, &phi) + &nm * &self.l - jac * &nm;
            let r = [
                (&tp * &tm - DMatrix::identity(m, m)).amax(),
                (&tp * &nm).amax(),
                (&np * &nm - DMatrix::identity(k, k)).amax(),
                (&np * &tm).amax(),
            ];
            (cond, pde.amax(), r)
        });
        let mut rep = FrameReport::default();
        for (cond, pde, r) in per_point {
            rep.max_condition = rep.max_condition.max(cond);
            rep.pde_residual = rep.pde_residual.max(pde);
            for (a, b) in rep.pinv_residuals.iter_mut().zip(r) {
                *a = a.max(b);
            }
        }
        rep.min_real_part = self
            .l
            .complex_eigenvalues()
            .iter()
            .map(|z: &C64| z.re.abs())
            .fold(f64::INFINITY, f64::min);
        rep
    }
}
