mod common;

use std::f64::consts::PI;

use mtdisc::hyperbolic::{
    ball_volume_from_euclidean, decay_bound_margin, dirichlet_energy, euclid_radius, hardy_margin,
    hyperbolic_ball_volume, integrate_radial, rearrange, ConformalFactor, GeodesicGrid,
};
use mtdisc::moser::Mobius;
use mtdisc::sobolev::{exp_tail, measured_mt_sup, mt_series_bound, rayleigh_quotient, SpTable};
use num_complex::Complex64;
use proptest::prelude::*;

use common::unit_energy_profile;

fn raw_values() -> impl Strategy<Value = (f64, Vec<f64>)> {
    (0.3..8.0f64, prop::collection::vec(-1.0..1.0f64, 2..48))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn unit_energy_profiles_obey_the_decay_bound((t_max, raw) in raw_values()) {
        if let Some(u) = unit_energy_profile(t_max, &raw) {
            for (t, m) in decay_bound_margin(&u).unwrap() {
                prop_assert!(m >= -1e-6, "margin {m} at t = {t}");
            }
        }
    }

    #[test]
    fn hardy_inequality_holds((t_max, raw) in raw_values()) {
        if let Some(u) = unit_energy_profile(t_max, &raw) {
            let h = hardy_margin(&u);
            prop_assert!(h.margin() >= -1e-9, "{h:?}");
        }
    }

    #[test]
    fn rearrangement_is_equimeasurable(
        samples in prop::collection::vec((-5.0..5.0f64, 1e-3..3.0f64), 1..200),
        p in 1.0..4.0f64,
    ) {
        let r = rearrange(&samples).unwrap();
        let total: f64 = samples.iter().map(|s| s.1).sum();
        prop_assert!((r.total_volume() - total).abs() <= 1e-10 * total);
        let direct: f64 = samples.iter().map(|(v, w)| v.abs().powf(p) * w).sum();
        let rearranged = r.integrate(|v| v.abs().powf(p));
        prop_assert!((direct - rearranged).abs() <= 1e-10 * direct.max(1.0));
        prop_assert!(r.values().windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn ball_volume_is_consistent(t in 1e-6..30.0f64) {
        let v = hyperbolic_ball_volume(t);
        prop_assert!((v - 2.0 * PI * (t.cosh() - 1.0)).abs() <= 1e-12 * v.max(1e-300) + 1e-300);
        if t < 15.0 {
            let w = ball_volume_from_euclidean(euclid_radius(t));
            prop_assert!((v - w).abs() <= 1e-9 * v);
        }
        let grid = GeodesicGrid::uniform(t, 7).unwrap();
        let hat: f64 = grid.hat_weights().iter().sum::<f64>() * 2.0 * PI;
        prop_assert!((hat - v).abs() <= 1e-10 * v.max(1e-12));
    }

    #[test]
    fn mobius_inverse_round_trips(
        a in (0.0..0.999f64, 0.0..(2.0 * PI)),
        points in prop::collection::vec((0.0..0.999f64, 0.0..(2.0 * PI)), 100),
    ) {
        let m = Mobius::new(Complex64::from_polar(a.0, a.1)).unwrap();
        for (r, th) in points {
            let z = Complex64::from_polar(r, th);
            prop_assert!((m.inverse(m.apply(z)) - z).norm() <= 1e-12);
        }
    }

    #[test]
    fn quotient_is_scale_invariant((t_max, raw) in raw_values(), c in 0.01..100.0f64, p in 2.0..12.0f64) {
        if let Some(u) = unit_energy_profile(t_max, &raw) {
            let zeta = ConformalFactor::hyperbolic();
            let q = rayleigh_quotient(&u, p, &zeta).unwrap();
            let qs = rayleigh_quotient(&u.scaled(-c), p, &zeta).unwrap();
            prop_assert!((q - qs).abs() <= 1e-10 * q);
        }
    }

    #[test]
    fn square_of_exponential_defect_is_dominated(t in -20.0..20.0f64) {
        let lhs = t.exp_m1().powi(2);
        let rhs = exp_tail(2.0 * t);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300, "{lhs} > {rhs}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_bound_dominates_exponential_integral((t_max, raw) in raw_values(), delta in 0.05..0.95f64) {
        let zeta = ConformalFactor::hyperbolic();
        let c = mt_constant();
        let table = SpTable::new().with_value(2, 0.25).with_mt_constant(c);
        if let Some(u) = unit_energy_profile(t_max, &raw) {
            let energy = dirichlet_energy(&u);
            let lhs = integrate_radial(&u, &zeta, |v, _| Ok(v.exp_m1().powi(2))).unwrap();
            let bound = mt_series_bound(energy, delta, &table).unwrap();
            prop_assert!(lhs <= bound, "{lhs} > {bound}");
        }
    }
}

fn mt_constant() -> f64 {
    use std::sync::OnceLock;
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let eps: Vec<f64> = (1..=6).map(|k| 10f64.powi(-k)).collect();
        measured_mt_sup(&ConformalFactor::hyperbolic(), &eps).unwrap()
    })
}
