//! Radial calculus on the Poincaré disc.
//!
//! Points of the disc are addressed by their geodesic distance `t` to the
//! origin; the euclidean radius is `r = tanh(t/2)` and the hyperbolic area
//! element of a radial integrand is `2π sinh t dt`. Profiles are piecewise
//! linear in `t` on a [`GeodesicGrid`].

mod conformal;
mod functionals;
mod grid;
mod profile;
mod rearrange;

pub use conformal::{ConformalFactor, PlanarZeta, PowerFactor};
pub use functionals::{
    ball_volume_from_euclidean, decay_bound, decay_bound_margin, dirichlet_energy, euclid_radius,
    geodesic_radius, hardy_margin, hyperbolic_ball_volume, hyperbolic_distance, integrate_radial,
    l2_hyperbolic_squared, mt_functional, weighted_lp_norm, HardyMargin,
};
pub use grid::{GeodesicGrid, Grading, Spacing, DEFAULT_T_MAX};
pub use profile::RadialProfile;
pub use rearrange::{rearrange, Level, Rearrangement};
