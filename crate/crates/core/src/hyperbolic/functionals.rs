use std::f64::consts::PI;

use num_complex::Complex64;

use super::conformal::ConformalFactor;
use super::profile::RadialProfile;
use crate::error::{Error, Result};
use crate::quad::{GL5_NODES, GL5_WEIGHTS};

/// Largest exponent accepted by `exp` before the result overflows.
const EXP_LIMIT: f64 = 709.0;

/// `r = tanh(t/2)`.
pub fn euclid_radius(t: f64) -> f64 {
    (0.5 * t).tanh()
}

/// Inverse of [`euclid_radius`]: `t = 2 artanh r` for `0 ≤ r < 1`.
pub fn geodesic_radius(r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::OutsideDisc(r));
    }
    Ok(2.0 * r.atanh())
}

/// Hyperbolic distance between two points of the disc.
pub fn hyperbolic_distance(z: Complex64, w: Complex64) -> f64 {
    let q = (z - w) / (Complex64::new(1.0, 0.0) - w.conj() * z);
    2.0 * q.norm().atanh()
}

/// Hyperbolic area of the geodesic ball of radius `t`, `2π(cosh t − 1)`.
pub fn hyperbolic_ball_volume(t: f64) -> f64 {
    4.0 * PI * (0.5 * t).sinh().powi(2)
}

/// The same area written in the euclidean radius: `4π ε² / (1 − ε²)`.
pub fn ball_volume_from_euclidean(eps: f64) -> f64 {
    4.0 * PI * eps * eps / (1.0 - eps * eps)
}

/// `2π ∫ |u'|² sinh t dt`, exact for piecewise-linear `u`.
pub fn dirichlet_energy(u: &RadialProfile) -> f64 {
    let g = u.grid();
    let v = u.values();
    let nodes = g.nodes();
    let mut acc = 0.0;
    for i in 0..nodes.len() - 1 {
        let h = nodes[i + 1] - nodes[i];
        let du = v[i + 1] - v[i];
        if du != 0.0 {
            acc += du * du / (h * h) * g.cell_sinh_measure(i);
        }
    }
    2.0 * PI * acc
}

/// `(2π ∫ |u|^p ζ sinh t dt)^(1/p)`, trapezoid on nodal values with exact
/// hat-function weights.
pub fn weighted_lp_norm(u: &RadialProfile, p: f64, zeta: &ConformalFactor) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "p = {p} must be at least 1"
        )));
    }
    let z = zeta.samples(u.grid())?;
    let w = u.grid().hat_weights();
    let sum: f64 = u
        .values()
        .iter()
        .zip(&z)
        .zip(&w)
        .map(|((v, z), w)| v.abs().powf(p) * z * w)
        .sum();
    Ok((2.0 * PI * sum).powf(1.0 / p))
}

/// `2π ∫ f(u(t), t) ζ(t) sinh t dt` with five-point Gauss–Legendre per cell and
/// `u` interpolated linearly.
pub fn integrate_radial<F>(u: &RadialProfile, zeta: &ConformalFactor, mut f: F) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    zeta.check_len(u.grid())?;
    let nodes = u.grid().nodes();
    let v = u.values();
    let mut acc = 0.0;
    for i in 0..nodes.len() - 1 {
        let (a, b) = (nodes[i], nodes[i + 1]);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut cell = 0.0;
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
            let t = mid + half * x;
            let s = 0.5 * (1.0 + x);
            let ut = v[i] * (1.0 - s) + v[i + 1] * s;
            let z = zeta.eval_in_cell(u.grid(), i, t);
            cell += w * f(ut, t)? * z * t.sinh();
        }
        acc += cell * half;
    }
    Ok(2.0 * PI * acc)
}

/// `2π ∫ (e^{α u²} − 1) ζ sinh t dt`.
///
/// Fails with [`Error::Overflow`] as soon as `α u²` leaves the range of `exp`.
pub fn mt_functional(u: &RadialProfile, alpha: f64, zeta: &ConformalFactor) -> Result<f64> {
    if let Some((i, v)) = u
        .values()
        .iter()
        .enumerate()
        .find(|(_, v)| alpha * *v * *v > EXP_LIMIT)
    {
        return Err(Error::Overflow {
            t: u.grid().nodes()[i],
            exponent: alpha * v * v,
        });
    }
    integrate_radial(u, zeta, |ut, t| {
        let e = alpha * ut * ut;
        if e > EXP_LIMIT {
            return Err(Error::Overflow { t, exponent: e });
        }
        Ok(e.exp_m1())
    })
}

/// `2π ∫ u² sinh t dt`, the square of the `L²(dV_h)` norm.
pub fn l2_hyperbolic_squared(u: &RadialProfile) -> f64 {
    integrate_radial(u, &ConformalFactor::hyperbolic(), |ut, _| Ok(ut * ut))
        .expect("hyperbolic factor is closed-form")
}

/// `(2π sinh t)^(−1/2)`, the pointwise bound for unit-energy profiles.
pub fn decay_bound(t: f64) -> f64 {
    (2.0 * PI * t.sinh()).sqrt().recip()
}

/// `decay_bound(t_i) − |u_i|` at every interior node `t_i > 0`.
pub fn decay_bound_margin(u: &RadialProfile) -> Result<Vec<(f64, f64)>> {
    let e = dirichlet_energy(u);
    if e > 1.0 + 1e-9 {
        return Err(Error::EnergyExceedsOne(e));
    }
    Ok(u.grid()
        .nodes()
        .iter()
        .zip(u.values())
        .filter(|(t, _)| **t > 0.0)
        .map(|(&t, &v)| (t, decay_bound(t) - v.abs()))
        .collect())
}

/// Both sides of the hyperbolic Hardy inequality `∫|∇u|² ≥ ¼ ∫ u² dV_h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyMargin {
    pub energy: f64,
    pub quarter_l2h: f64,
}

impl HardyMargin {
    pub fn margin(&self) -> f64 {
        self.energy - self.quarter_l2h
    }
}

pub fn hardy_margin(u: &RadialProfile) -> HardyMargin {
    HardyMargin {
        energy: dirichlet_energy(u),
        quarter_l2h: 0.25 * l2_hyperbolic_squared(u),
    }
}
