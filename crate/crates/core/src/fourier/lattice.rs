use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use super::index::ball;
use super::series::FourierSeries;
use crate::error::{Error, Result};

/// Equispaced tensor lattice on the m-torus with `n` points per axis,
/// `phi_j = 2 pi i_j / n`. Points are numbered with axis 0 varying slowest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lattice {
    pub m: usize,
    pub n: usize,
}

impl Lattice {
    pub fn new(m: usize, n: usize) -> Self {
        Lattice { m, n }
    }

    /// Smallest lattice that resolves truncation order `order`.
    pub fn for_order(m: usize, order: usize) -> Self {
        Lattice::new(m, 2 * order + 1)
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.m as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn step(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn indices(&self, mut i: usize) -> Vec<usize> {
        let mut idx = vec![0; self.m];
        for j in (0..self.m).rev() {
            idx[j] = i % self.n;
            i /= self.n;
        }
        idx
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        let h = self.step();
        self.indices(i).into_iter().map(|v| v as f64 * h).collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }
}

/// Trigonometric interpolation of lattice samples onto modes `|k|_1 <= order`.
///
/// `samples[i]` is the value vector at `lattice.point(i)`. Samples whose
/// imaginary parts are at roundoff level are treated as a real function and
/// the result is symmetrized; coefficients below `1e-15 * max|sample|` are
/// dropped.
pub fn collocate(lattice: &Lattice, samples: &[Vec<C64>], order: usize) -> Result<FourierSeries> {
    let m = lattice.m;
    if lattice.n < 2 * order + 1 {
        return Err(Error::Aliasing {
            points: lattice.n,
            order,
            need: 2 * order + 1,
        });
    }
    if samples.len() != lattice.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} samples for a lattice of {} points",
            samples.len(),
            lattice.len()
        )));
    }
    let dim = samples.first().map_or(0, Vec::len);
    if samples.iter().any(|s| s.len() != dim) {
        return Err(Error::DimensionMismatch("samples of unequal length".into()));
    }
    let scale = samples
        .iter()
        .flatten()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    if scale == 0.0 || dim == 0 {
        return Ok(FourierSeries::zeros(m, dim, order));
    }
    let real = samples
        .iter()
        .flatten()
        .all(|v| v.im.abs() <= 1e-14 * scale);

    let n = lattice.n;
    // twiddle[r] = exp(-2 pi i r / n)
    let twiddle: Vec<C64> = (0..n)
        .map(|r| C64::from_polar(1.0, -TAU * r as f64 / n as f64))
        .collect();
    let modes = ball(m, order);
    let norm = 1.0 / lattice.len() as f64;
    let coeffs = crate::exec::map_indexed(modes.len(), |mi| {
        let k = modes[mi].as_slice();
        let kmod: Vec<usize> = k.iter().map(|&v| v.rem_euclid(n as i32) as usize).collect();
        let mut acc = vec![C64::new(0.0, 0.0); dim];
        for (i, s) in samples.iter().enumerate() {
            let idx = lattice.indices(i);
            let mut r = 0usize;
            for j in 0..m {
                r += kmod[j] * idx[j];
            }
            let w = twiddle[r % n];
            for (a, v) in acc.iter_mut().zip(s) {
                *a += v * w;
            }
        }
        acc.iter_mut().for_each(|a| *a *= norm);
        acc
    });
    let threshold = 1e-15 * scale;
    let kept = modes
        .into_iter()
        .zip(coeffs)
        .filter(|(_, c)| c.iter().any(|v| v.norm() > threshold));
    let series = FourierSeries::from_modes(m, dim, order, false, kept)?;
    Ok(if real { series.real_part().with_order(order) } else { series })
}

/// Sample `f` at every lattice point (in parallel when enabled) and collocate.
pub fn collocate_fn<F>(lattice: &Lattice, order: usize, f: F) -> Result<FourierSeries>
where
    F: Fn(&[f64]) -> Vec<C64> + Sync + Send,
{
    let samples = crate::exec::map_indexed(lattice.len(), |i| f(&lattice.point(i)));
    collocate(lattice, &samples, order)
}

/// Real-valued variant of [`collocate_fn`].
pub fn collocate_real_fn<F>(lattice: &Lattice, order: usize, f: F) -> Result<FourierSeries>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync + Send,
{
    collocate_fn(lattice, order, |phi| {
        f(phi).into_iter().map(|v| C64::new(v, 0.0)).collect()
    })
    .map(|s| s.real_part().with_order(order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::index::MultiIndex;

    #[test]
    fn recovers_single_mode() {
        let lat = Lattice::new(2, 9);
        let samples: Vec<Vec<C64>> = lat
            .points()
            .map(|p| vec![C64::from_polar(1.0, p[1])])
            .collect();
        let s = collocate(&lat, &samples, 4).unwrap();
        assert_eq!(s.num_modes(), 1);
        let c = s.coeff(&MultiIndex::new(vec![0, 1])).unwrap()[0];
        assert!((c - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_samples_give_empty_series() {
        let lat = Lattice::new(2, 9);
        let samples = vec![vec![C64::new(0.0, 0.0)]; lat.len()];
        assert!(collocate(&lat, &samples, 4).unwrap().is_empty());
    }

    #[test]
    fn coarse_lattice_is_rejected() {
        let lat = Lattice::new(2, 8);
        let samples = vec![vec![C64::new(1.0, 0.0)]; lat.len()];
        assert!(matches!(
            collocate(&lat, &samples, 4),
            Err(Error::Aliasing { points: 8, order: 4, need: 9 })
        ));
    }

    #[test]
    fn point_numbering() {
        let lat = Lattice::new(2, 3);
        assert_eq!(lat.indices(5), vec![1, 2]);
        let p = lat.point(5);
        assert!((p[0] - TAU / 3.0).abs() < 1e-15);
        assert!((p[1] - 2.0 * TAU / 3.0).abs() < 1e-15);
    }
}
