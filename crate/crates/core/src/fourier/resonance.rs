use super::index::MultiIndex;
use super::series::FourierSeries;

/// Default relative resonance tolerance.
pub const DEFAULT_TOL_RES: f64 = 1e-9;

/// Resonance test for modes against a frequency vector.
///
/// When all frequencies are identical (and nonzero) resonance is decided
/// exactly by `sum_j k_j == 0`; otherwise `|<k, omega>| <= tol * |omega|_inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct Resonance {
    omega: Vec<f64>,
    tol: f64,
    identical: bool,
}

impl Resonance {
    pub fn new(omega: &[f64], tol: f64) -> Self {
        let identical = !omega.is_empty() && omega[0] != 0.0 && omega.iter().all(|&w| w == omega[0]);
        Resonance {
            omega: omega.to_vec(),
            tol,
            identical,
        }
    }

    pub fn with_default_tol(omega: &[f64]) -> Self {
        Self::new(omega, DEFAULT_TOL_RES)
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Absolute threshold on `|<k, omega>|`.
    pub fn threshold(&self) -> f64 {
        self.tol * self.omega.iter().fold(0.0_f64, |a, w| a.max(w.abs()))
    }

    pub fn is_resonant(&self, k: &MultiIndex) -> bool {
        if self.identical {
            k.component_sum() == 0
        } else {
            k.dot(&self.omega).abs() <= self.threshold()
        }
    }

    /// Divisor `<k, omega>`, exactly zero for resonant modes.
    pub fn divisor(&self, k: &MultiIndex) -> f64 {
        if self.is_resonant(k) {
            0.0
        } else {
            k.dot(&self.omega)
        }
    }

    /// Near-resonant: not classified resonant but `|<k, omega>| < 10 * threshold`.
    pub fn is_near_resonant(&self, k: &MultiIndex) -> bool {
        !self.is_resonant(k) && k.dot(&self.omega).abs() < 10.0 * self.threshold()
    }
}

/// Split a series into resonant and nonresonant parts; their sum is `a`.
pub fn split_resonant(a: &FourierSeries, res: &Resonance) -> (FourierSeries, FourierSeries) {
    let mut resonant = FourierSeries::zeros(a.torus_dim(), a.dim_out(), a.order())
        .assume_real(a.is_real_valued());
    let mut rest = resonant.clone();
    for (k, c) in a.modes() {
        if res.is_resonant(k) {
            resonant.accumulate(k.clone(), c);
        } else {
            rest.accumulate(k.clone(), c);
        }
    }
    (resonant, rest)
}
