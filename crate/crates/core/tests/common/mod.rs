#![allow(dead_code)]

use mtdisc::hyperbolic::{dirichlet_energy, GeodesicGrid, RadialProfile};

/// Piecewise-linear profile on a uniform grid over `[0, t_max]` through the
/// given interior values and zero at `t_max`, scaled to unit Dirichlet energy.
pub fn unit_energy_profile(t_max: f64, values: &[f64]) -> Option<RadialProfile> {
    let grid = GeodesicGrid::uniform(t_max, values.len()).ok()?;
    let mut v = values.to_vec();
    v.push(0.0);
    let u = RadialProfile::new(grid, v).ok()?;
    let e = dirichlet_energy(&u);
    if e < 1e-12 {
        return None;
    }
    Some(u.scaled(e.sqrt().recip()))
}
