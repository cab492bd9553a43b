use super::{orbit, SLParams};
use crate::error::Result;
use crate::fourier::{FourierSeries, MultiIndex, PhaseHistoryField, Product};

/// Wavevector of `Delta_j`: `phi_2 - phi_1` for `j = 0`, `phi_1 - phi_2` for `j = 1`.
fn delta_k(j: usize, mult: i32) -> MultiIndex {
    if j == 0 {
        MultiIndex::new(vec![-mult, mult])
    } else {
        MultiIndex::new(vec![mult, -mult])
    }
}

/// `a cos(n Delta_j) + b sin(n Delta_j)` with `Delta_j = <k_j, phi> + theta`.
fn harmonic_of_delta(j: usize, n: i32, theta: f64, a: f64, b: f64) -> FourierSeries {
    FourierSeries::harmonic(&delta_k(j, n), n as f64 * theta, a, b)
}

fn constant(v: f64) -> FourierSeries {
    FourierSeries::constant(2, &[v])
}

fn sum(parts: &[FourierSeries]) -> FourierSeries {
    parts
        .iter()
        .skip(1)
        .fold(parts[0].clone(), |acc, s| acc.add(s).expect("scalar series"))
}

/// First-order reduced field
/// `f1_j = -(d/g)(cos Delta_j - cos rho) + (sin Delta_j - sin rho)`.
pub fn f1_closed(p: &SLParams) -> Result<FourierSeries> {
    let th = p.theta();
    let r = p.delta / p.gamma;
    let comps: Vec<FourierSeries> = (0..2)
        .map(|j| {
            sum(&[
                harmonic_of_delta(j, 1, th, -r, 1.0),
                constant(r * p.rho.cos() - p.rho.sin()),
            ])
        })
        .collect();
    Ok(FourierSeries::stack(&comps)?.pruned(0.0))
}

/// Normal coordinate of the first-order embedding,
/// `h1_j = R / (2 g a) (cos Delta_j - cos rho)`.
pub fn h1_closed(p: &SLParams) -> Result<FourierSeries> {
    let o = orbit(p)?;
    let c = o.r / (2.0 * p.gamma * p.alpha);
    let comps: Vec<FourierSeries> = (0..2)
        .map(|j| sum(&[harmonic_of_delta(j, 1, p.theta(), c, 0.0), constant(-c * p.rho.cos())]))
        .collect();
    Ok(FourierSeries::stack(&comps)?.pruned(0.0))
}

/// `(cos phi_j X_j, sin phi_j X_j)` for the two oscillators, i.e. `e^{i phi_j} X_j`
/// in real coordinates, or `i e^{i phi_j} X_j` when `rotate` is set.
fn carrier_times(x: &[FourierSeries; 2], rotate: bool) -> Result<FourierSeries> {
    let mut rows = Vec::with_capacity(4);
    for (j, xj) in x.iter().enumerate() {
        let k = MultiIndex::unit(2, j, 1);
        let cos = FourierSeries::harmonic(&k, 0.0, 1.0, 0.0);
        let sin = FourierSeries::harmonic(&k, 0.0, 0.0, 1.0);
        let (re, im) = if rotate { (sin.scale_real(-1.0), cos) } else { (cos, sin) };
        rows.push(re.multiply(xj, Product::Componentwise)?);
        rows.push(im.multiply(xj, Product::Componentwise)?);
    }
    Ok(FourierSeries::stack(&rows)?.pruned(0.0))
}

fn cos_bracket(p: &SLParams, scale: f64) -> [FourierSeries; 2] {
    let th = p.theta();
    [0, 1].map(|j| sum(&[harmonic_of_delta(j, 1, th, scale, 0.0), constant(-scale * p.rho.cos())]))
}

fn sin_bracket(p: &SLParams, scale: f64) -> [FourierSeries; 2] {
    let th = p.theta();
    [0, 1].map(|j| sum(&[harmonic_of_delta(j, 1, th, 0.0, scale), constant(-scale * p.rho.sin())]))
}

/// First-order embedding for `delta = 0`:
/// `e1_j = R / (2a) e^{i phi_j} (cos Delta_j - cos rho)`.
pub fn e1_closed(p: &SLParams) -> Result<FourierSeries> {
    p.require_delta_zero("closed-form e1")?;
    let o = orbit(p)?;
    carrier_times(&cos_bracket(p, o.r / (2.0 * p.alpha)), false)
}

/// First-order history for `delta = 0`:
/// `E1_j = R/(2a) e^{i(phi_j + W s)}(cos Delta_j - cos rho)
///        + R i s e^{i(phi_j + W s)}(sin Delta_j - sin rho)`.
pub fn e1_hist_closed(p: &SLParams) -> Result<PhaseHistoryField> {
    p.require_delta_zero("closed-form E1")?;
    let o = orbit(p)?;
    let omega = [o.omega, o.omega];
    let a = carrier_times(&cos_bracket(p, o.r / (2.0 * p.alpha)), false)?;
    let b = carrier_times(&sin_bracket(p, o.r), true)?;
    let first = PhaseHistoryField::shifted_along(&a, &omega, p.tau);
    let second = PhaseHistoryField::shifted_along(&b, &omega, p.tau).times_s();
    first.add(&second)
}

/// Second-order reduced field for `delta = 0`:
///
/// `f2_j = (1/(4a) - tau/2) sin 2 theta + tau sin rho cos Delta_j
///        + ((1/(4a) + tau/2) cos 2 theta - 1/(4a)) sin 2 Delta_j
///        - (1/(4a) + tau/2) sin 2 theta cos 2 Delta_j`
///
/// with `theta = rho - Omega tau`.
pub fn f2_closed(p: &SLParams) -> Result<FourierSeries> {
    p.require_delta_zero("closed-form f2")?;
    orbit(p)?;
    let th = p.theta();
    let q = 1.0 / (4.0 * p.alpha);
    let (s2, c2) = (2.0 * th).sin_cos();
    let comps: Vec<FourierSeries> = (0..2)
        .map(|j| {
            sum(&[
                constant((q - p.tau / 2.0) * s2),
                harmonic_of_delta(j, 1, th, p.tau * p.rho.sin(), 0.0),
                harmonic_of_delta(j, 2, th, -(q + p.tau / 2.0) * s2, (q + p.tau / 2.0) * c2 - q),
            ])
        })
        .collect();
    Ok(FourierSeries::stack(&comps)?.pruned(0.0))
}
