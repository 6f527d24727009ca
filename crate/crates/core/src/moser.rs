//! Closed-form test functions: Moser functions `v_ε`, the `M_l` profiles, Möbius
//! recentring and the blow-up experiment for unbounded conformal factors.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hyperbolic::{
    ball_volume_from_euclidean, euclid_radius, mt_functional, ConformalFactor, GeodesicGrid,
    Grading, PlanarZeta, PowerFactor, RadialProfile, DEFAULT_T_MAX,
};

/// `ln(1/tanh(t/2))` without cancellation at either end.
fn log_inv_radius(t: f64) -> f64 {
    let q = (-t).exp();
    if t < 1.0 {
        q.ln_1p() - (-(-t).exp_m1()).ln()
    } else {
        2.0 * q.atanh()
    }
}

/// Moser function with plateau radius `ε` (euclidean) and outer radius 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoserParams {
    eps: f64,
}

impl MoserParams {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "plateau radius {eps} not in (0, 1)"
            )));
        }
        Ok(Self { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `(ln(1/ε) / 2π)^{1/2}`.
    pub fn plateau_value(&self) -> f64 {
        ((1.0 / self.eps).ln() / (2.0 * PI)).sqrt()
    }

    /// Geodesic radius of the plateau edge.
    pub fn edge(&self) -> f64 {
        2.0 * self.eps.atanh()
    }

    pub fn value_at_radius(&self, r: f64) -> f64 {
        let l = (1.0 / self.eps).ln();
        if r < self.eps {
            self.plateau_value()
        } else if r >= 1.0 {
            0.0
        } else {
            (1.0 / r).ln() / (2.0 * PI * l).sqrt()
        }
    }

    pub fn value_at_t(&self, t: f64) -> f64 {
        if t < self.edge() {
            self.plateau_value()
        } else {
            log_inv_radius(t) / (2.0 * PI * (1.0 / self.eps).ln()).sqrt()
        }
    }

    /// Default graded grid with a node on the plateau edge.
    pub fn grid(&self) -> GeodesicGrid {
        self.grid_with(Grading::default(), DEFAULT_T_MAX)
    }

    pub fn grid_with(&self, grading: Grading, t_max: f64) -> GeodesicGrid {
        GeodesicGrid::graded_with(self.edge(), t_max, grading)
            .expect("plateau edge lies inside (0, t_max) for ε < 1")
    }
}

/// Samples the Moser function on `grid`, forcing the last node to zero.
///
/// The grid must carry a node on the plateau edge `2 artanh ε`.
pub fn moser_profile(params: &MoserParams, grid: &GeodesicGrid) -> Result<RadialProfile> {
    let edge = params.edge();
    if edge >= grid.t_max() {
        return Err(Error::GridTooCoarse(edge));
    }
    let nearest = grid
        .nodes()
        .iter()
        .map(|t| (t - edge).abs())
        .fold(f64::INFINITY, f64::min);
    if nearest > 1e-9 * edge {
        return Err(Error::GridTooCoarse(edge));
    }
    let n = grid.len();
    let values = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            if i + 1 == n {
                0.0
            } else if (t - edge).abs() <= 1e-9 * edge {
                params.plateau_value()
            } else {
                params.value_at_t(t)
            }
        })
        .collect();
    RadialProfile::new(grid.clone(), values)
}

/// `M_l(r) = (log R/l)^{1/2} [χ_{[0,l)} + log(R/r)/log(R/l) χ_{[l,R)}]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlParams {
    outer: f64,
    inner: f64,
}

impl MlParams {
    pub fn new(outer: f64, inner: f64) -> Result<Self> {
        if !(inner > 0.0 && inner < outer && outer.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < l < R, got l = {inner}, R = {outer}"
            )));
        }
        Ok(Self { outer, inner })
    }

    /// Unit outer radius with `log(1/l) = p/4`, the Sobolev initializer.
    pub fn for_exponent(p: f64) -> Result<Self> {
        Self::new(1.0, (-p / 4.0).exp())
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn log_ratio(&self) -> f64 {
        (self.outer / self.inner).ln()
    }

    pub fn value_at_radius(&self, r: f64) -> f64 {
        let l = self.log_ratio();
        if r < self.inner {
            l.sqrt()
        } else if r < self.outer {
            (self.outer / r).ln() / l.sqrt()
        } else {
            0.0
        }
    }

    /// Flat Dirichlet energy `2π ∫_l^R dr / (r log(R/l))`.
    pub fn flat_energy(&self) -> f64 {
        2.0 * PI * (self.outer / self.inner).ln() / self.log_ratio()
    }

    /// `(π l² (log R/l)^{p/2})^{1/p}`, the contribution of the plateau alone to
    /// the flat `L^p` norm.
    pub fn plateau_norm_lower_bound(&self, p: f64) -> f64 {
        let ln_val = (PI * self.inner * self.inner).ln() + 0.5 * p * self.log_ratio().ln();
        (ln_val / p).exp()
    }

    pub fn grid_with(&self, grading: Grading, t_max: f64) -> Result<GeodesicGrid> {
        GeodesicGrid::graded_with(2.0 * self.inner.atanh(), t_max, grading)
    }
}

/// Samples `M_l(tanh(t/2))` on `grid`; the last node is forced to zero.
pub fn ml_profile(params: &MlParams, grid: &GeodesicGrid) -> Result<RadialProfile> {
    let n = grid.len();
    let l = params.log_ratio();
    let values = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            if i + 1 == n {
                return 0.0;
            }
            let r = euclid_radius(t);
            if params.outer == 1.0 && r >= params.inner {
                log_inv_radius(t) / l.sqrt()
            } else {
                params.value_at_radius(r)
            }
        })
        .collect();
    RadialProfile::new(grid.clone(), values)
}

/// The disc automorphism `z ↦ (z + a)/(1 + ā z)`, sending 0 to `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    a: Complex64,
}

impl Mobius {
    pub fn new(a: Complex64) -> Result<Self> {
        if !(a.norm() < 1.0) {
            return Err(Error::OutsideDisc(a.norm()));
        }
        Ok(Self { a })
    }

    pub fn center(&self) -> Complex64 {
        self.a
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (z + self.a) / (1.0 + self.a.conj() * z)
    }

    pub fn inverse(&self, w: Complex64) -> Complex64 {
        (w - self.a) / (1.0 - self.a.conj() * w)
    }

    /// `φ(z)` together with `1 − |φ(z)|²`, given `1 − |z|²`; accurate up to
    /// the boundary where the direct difference cancels.
    pub fn apply_with_defect(&self, z: Complex64, defect: f64) -> (Complex64, f64) {
        let d = (1.0 + self.a.conj() * z).norm_sqr();
        (self.apply(z), (1.0 - self.a.norm_sqr()) * defect / d)
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let d = 1.0 + self.a.conj() * z;
        (1.0 - self.a.norm_sqr()) / (d * d)
    }
}

/// Convenience alias matching the operation name.
pub fn mobius_recenter(a: Complex64) -> Result<Mobius> {
    Mobius::new(a)
}

/// Average of `ζ ∘ φ` over the circle of euclidean radius `r`.
fn circle_mean(zeta: &dyn PlanarZeta, map: &Mobius, r: f64, defect: f64) -> f64 {
    if r == 0.0 {
        return zeta.zeta(map.center());
    }
    let closeness = (1.0 - map.center().norm() * r).max(1e-12);
    let m = ((16.0 / closeness).ceil() as usize).clamp(64, 4096);
    let mut acc = 0.0;
    for k in 0..m {
        let th = 2.0 * PI * k as f64 / m as f64;
        let (w, d) = map.apply_with_defect(Complex64::from_polar(r, th), defect);
        acc += zeta.zeta_with_defect(w, d);
    }
    acc / m as f64
}

/// `min ζ(φ(x))` over a polar sample of `|x| ≤ rho`.
fn disc_min(zeta: &dyn PlanarZeta, map: &Mobius, rho: f64) -> f64 {
    let mut lo = zeta.zeta(map.center());
    for i in 1..=8 {
        let r = rho * i as f64 / 8.0;
        for k in 0..64 {
            let th = 2.0 * PI * k as f64 / 64.0;
            lo = lo.min(zeta.zeta(map.apply(Complex64::from_polar(r, th))));
        }
    }
    lo
}

/// Largest plateau radius on which `ζ ∘ φ ≥ ζ(φ(0))/2`, found by bisection.
pub fn half_value_radius(zeta: &dyn PlanarZeta, map: &Mobius) -> f64 {
    let target = 0.5 * zeta.zeta(map.center());
    let ok = |rho: f64| disc_min(zeta, map, rho) >= target;
    let top = 1.0 - 1e-12;
    if ok(top) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, top);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Centers `x_n` on the positive real axis with `ζ(x_n) = target_n`.
///
/// A constant factor cannot reach other values; the centers then default to
/// `1 − 2^{−n}`.
pub fn centers_for_targets(zeta: &PowerFactor, targets: &[f64]) -> Result<Vec<Complex64>> {
    targets
        .iter()
        .enumerate()
        .map(|(i, &target)| {
            if zeta.exponent == 0.0 {
                return Ok(Complex64::new(1.0 - 0.5f64.powi(i as i32 + 1), 0.0));
            }
            let one_minus_r2 = (target / zeta.scale).powf(-1.0 / zeta.exponent);
            if !(one_minus_r2 > 0.0 && one_minus_r2 <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "ζ never takes the value {target} inside the disc"
                )));
            }
            Ok(Complex64::new((1.0 - one_minus_r2).sqrt(), 0.0))
        })
        .collect()
}

/// Default plateau schedule `ε_n = e^{−n}`, `n = 1..=count`.
pub fn default_eps_schedule(count: usize) -> Vec<f64> {
    (1..=count).map(|n| (-(n as f64)).exp()).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct BlowupOptions {
    pub grading: Grading,
    pub t_max: f64,
}

impl Default for BlowupOptions {
    fn default() -> Self {
        Self {
            grading: Grading::coarse(),
            t_max: DEFAULT_T_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupRow {
    pub n: usize,
    pub center: Complex64,
    pub zeta_center: f64,
    pub eps: f64,
    pub half_radius: f64,
    pub mt_value: f64,
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupReport {
    pub rows: Vec<BlowupRow>,
    /// Every measured value dominates its analytic lower bound.
    pub contract_holds: bool,
    /// Lower bounds and measured values both strictly increase along the
    /// schedule.
    pub diverging: bool,
}

/// Evaluates the critical functional of the recentred Moser functions
/// `v_n ∘ φ_n^{-1}` against `ζ`.
///
/// The Moser function is radial about the origin, so the integral is computed
/// radially against the circle means of `ζ ∘ φ_n`.
pub fn blowup_experiment(
    zeta: &dyn PlanarZeta,
    centers: &[Complex64],
    eps: &[f64],
    opts: BlowupOptions,
) -> Result<BlowupReport> {
    if centers.len() != eps.len() {
        return Err(Error::InvalidArgument(format!(
            "{} centers for {} plateau radii",
            centers.len(),
            eps.len()
        )));
    }
    let mut rows = Vec::with_capacity(eps.len());
    for (i, (&c, &e)) in centers.iter().zip(eps).enumerate() {
        let n = i + 1;
        let map = Mobius::new(c)?;
        let params = MoserParams::new(e)?;
        let zc = zeta.zeta(c);
        let half_radius = half_value_radius(zeta, &map);
        if e > half_radius || disc_min(zeta, &map, e) < 0.5 * zc {
            return Err(Error::ScheduleInvalid {
                step: n,
                reason: format!("plateau radius {e} exceeds half-value radius {half_radius}"),
            });
        }
        let grid = params.grid_with(opts.grading, opts.t_max);
        let pulled: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&t| circle_mean(zeta, &map, euclid_radius(t), (0.5 * t).cosh().powi(-2)))
            .collect();
        let factor = ConformalFactor::sampled(&grid, pulled)?;
        let v = moser_profile(&params, &grid)?;
        let mt_value = mt_functional(&v, 4.0 * PI, &factor)?;
        let lower_bound = 0.5 * zc * (1.0 / (e * e) - 1.0) * ball_volume_from_euclidean(e);
        rows.push(BlowupRow {
            n,
            center: c,
            zeta_center: zc,
            eps: e,
            half_radius,
            mt_value,
            lower_bound,
        });
    }
    let contract_holds = rows.iter().all(|r| r.mt_value >= r.lower_bound);
    let diverging = contract_holds
        && rows.len() >= 2
        && rows.windows(2).all(|w| {
            w[1].lower_bound > w[0].lower_bound * (1.0 + 1e-9) && w[1].mt_value > w[0].mt_value
        });
    Ok(BlowupReport {
        rows,
        contract_holds,
        diverging,
    })
}

/// Critical functional `∫(e^{α v_ε²} − 1) ζ dV_h` along a plateau schedule.
pub fn critical_sweep(
    alpha: f64,
    eps: &[f64],
    zeta: &ConformalFactor,
    grading: Grading,
) -> Result<Vec<f64>> {
    eps.iter()
        .map(|&e| {
            let params = MoserParams::new(e)?;
            let grid = params.grid_with(grading, DEFAULT_T_MAX);
            mt_functional(&moser_profile(&params, &grid)?, alpha, zeta)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::{dirichlet_energy, hyperbolic_distance, weighted_lp_norm, Spacing};

    #[test]
    fn plateau_value_closed_form() {
        let m = MoserParams::new(0.5).unwrap();
        assert!((m.plateau_value() - 0.332_14).abs() < 1e-5);
        assert!((m.plateau_value() - (2f64.ln() / (2.0 * PI)).sqrt()).abs() < 1e-15);
        assert!(MoserParams::new(0.0).is_err());
        assert!(MoserParams::new(1.0).is_err());
    }

    #[test]
    fn log_inverse_radius_is_accurate() {
        for t in [1e-10, 1e-3, 0.5, 5.0, 30.0] {
            let direct = -(0.5 * t as f64).tanh().ln();
            assert!((log_inv_radius(t) - direct).abs() <= 1e-12 * direct.abs().max(1e-300) + 1e-15);
        }
        // Far out the function behaves like 2 e^{-t}.
        assert!((log_inv_radius(35.0) / (2.0 * (-35f64).exp()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moser_energy_is_one() {
        for eps in [0.5, 1e-1, 1e-3, 1e-6] {
            let m = MoserParams::new(eps).unwrap();
            let v = moser_profile(&m, &m.grid()).unwrap();
            let e = dirichlet_energy(&v);
            assert!((e - 1.0).abs() < 1e-6, "ε = {eps}: energy {e}");
            assert_eq!(*v.values().last().unwrap(), 0.0);
            assert_eq!(v.values()[0], m.plateau_value());
        }
    }

    #[test]
    fn moser_requires_edge_node() {
        let m = MoserParams::new(0.1).unwrap();
        let g = GeodesicGrid::uniform(10.0, 100).unwrap();
        assert!(matches!(
            moser_profile(&m, &g),
            Err(Error::GridTooCoarse(_))
        ));
    }

    #[test]
    fn moser_value_at_ln3() {
        // ε = 0.1 and t = ln 3, where r = 1/2.
        let m = MoserParams::new(0.1).unwrap();
        let v = m.value_at_t(3f64.ln());
        let expect = (1.0 / (2.0 * PI)).sqrt() * 2f64.ln() / 10f64.ln().sqrt();
        assert!((v - expect).abs() < 1e-14);
        assert!((v - 0.182_23).abs() < 1e-5);
    }

    #[test]
    fn ml_closed_forms() {
        let p = MlParams::new(1.0, (-10f64).exp()).unwrap();
        assert!((p.flat_energy() - 2.0 * PI).abs() < 1e-8);
        assert!((p.value_at_radius(0.0) - 10f64.sqrt()).abs() < 1e-12);
        assert!((p.value_at_radius(0.0) - 3.1623).abs() < 1e-4);
        assert!(MlParams::new(1.0, 1.0).is_err());
        assert!(MlParams::new(1.0, 0.0).is_err());
    }

    #[test]
    fn ml_discrete_energy_and_norm() {
        let params = MlParams::for_exponent(40.0).unwrap();
        let g = params.grid_with(Grading::default(), DEFAULT_T_MAX).unwrap();
        let u = ml_profile(&params, &g).unwrap();
        let e = dirichlet_energy(&u);
        assert!((e - 2.0 * PI).abs() < 1e-5, "{e}");
        let norm = weighted_lp_norm(&u, 40.0, &ConformalFactor::euclidean()).unwrap();
        assert!(norm >= params.plateau_norm_lower_bound(40.0));
    }

    #[test]
    fn ml_with_inner_outer_radius() {
        let params = MlParams::new(0.5, 0.05).unwrap();
        let g = GeodesicGrid::uniform(3.0, 300).unwrap();
        let u = ml_profile(&params, &g).unwrap();
        assert_eq!(u.values()[0], params.log_ratio().sqrt());
        let t_r = 2.0 * 0.5f64.atanh();
        for (&t, &v) in g.nodes().iter().zip(u.values()) {
            if t > t_r {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn mobius_basics() {
        let id = Mobius::new(Complex64::new(0.0, 0.0)).unwrap();
        let z = Complex64::new(0.3, -0.2);
        assert_eq!(id.apply(z), z);
        let a = Complex64::new(0.4, 0.5);
        let m = mobius_recenter(a).unwrap();
        assert!((m.apply(Complex64::new(0.0, 0.0)) - a).norm() < 1e-15);
        assert!((m.inverse(m.apply(z)) - z).norm() < 1e-12);
        let d0 = hyperbolic_distance(Complex64::new(0.0, 0.0), z);
        let d1 = hyperbolic_distance(m.apply(Complex64::new(0.0, 0.0)), m.apply(z));
        assert!((d0 - d1).abs() < 1e-10);
        assert!(Mobius::new(Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn moser_functional_on_constant_zeta() {
        let m = MoserParams::new(0.5).unwrap();
        let v = moser_profile(&m, &m.grid()).unwrap();
        for z0 in [1.0, 3.0] {
            let val = mt_functional(&v, 4.0 * PI, &ConformalFactor::constant(z0)).unwrap();
            assert!(val >= 2.0 * PI * z0);
        }
    }

    #[test]
    fn circle_mean_matches_closed_form() {
        // ζ = 1/(1−|x|²): the mean of ζ∘φ over |z| = r is ζ(a)(1+|a|²r²)/(1−r²).
        let zeta = |z: Complex64| 1.0 / (1.0 - z.norm_sqr());
        let a = Complex64::new(0.8, 0.0);
        let m = Mobius::new(a).unwrap();
        for r in [0.1, 0.5, 0.9] {
            let expect = zeta(a) * (1.0 + a.norm_sqr() * r * r) / (1.0 - r * r);
            assert!((circle_mean(&zeta, &m, r, 1.0 - r * r) - expect).abs() < 1e-9 * expect);
        }
    }

    #[test]
    fn blowup_on_constant_zeta_does_not_diverge() {
        let z = PowerFactor {
            scale: 1.0,
            exponent: 0.0,
        };
        let eps = default_eps_schedule(4);
        let centers = centers_for_targets(&z, &[1.0; 4]).unwrap();
        let rep = blowup_experiment(&z, &centers, &eps, BlowupOptions::default()).unwrap();
        assert!(rep.contract_holds);
        assert!(!rep.diverging);
        for r in &rep.rows {
            assert!((r.lower_bound - 2.0 * PI).abs() < 1e-9);
        }
    }

    #[test]
    fn blowup_rejects_wide_plateau() {
        let z = PowerFactor {
            scale: 1.0,
            exponent: 0.5,
        };
        let centers = centers_for_targets(&z, &[50.0]).unwrap();
        let err = blowup_experiment(&z, &centers, &[0.9], BlowupOptions::default()).unwrap_err();
        assert!(matches!(err, Error::ScheduleInvalid { .. }));
    }

    #[test]
    fn graded_grid_is_used() {
        let m = MoserParams::new(1e-3).unwrap();
        assert_eq!(m.grid().spacing(), Spacing::Graded);
    }
}
