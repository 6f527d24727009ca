//! Numerical experiments around the Moser–Trudinger inequality on conformal
//! discs.
//!
//! The crate is organised by subject:
//!
//! * [`hyperbolic`] — radial calculus on the Poincaré disc in geodesic polar
//!   coordinates (energies, weighted norms, exponential functionals, decay and
//!   Hardy estimates, symmetric decreasing rearrangement).
//! * [`moser`] — closed-form test functions (Moser functions, `M_l` profiles),
//!   Möbius recentring and the blow-up experiment for unbounded conformal
//!   factors.
//! * [`sobolev`] — best `L^p` Sobolev constants, their `8πe/p` asymptotics, the
//!   degenerate range `p < 2` on the hyperbolic disc and the exponential
//!   series bound.
//! * [`liouville`] — convex variational solvers for prescribed Gauss curvature
//!   on radial discretisations.
//! * [`domain`] — planar domains: inradius, first Dirichlet eigenvalue, the
//!   lattice-of-holes counterexample and the Koebe Jacobian check.
//! * [`cli`] — the experiment runner behind the `mtdisc` binary.

pub mod cli;
pub mod domain;
pub mod error;
pub mod hyperbolic;
pub(crate) mod linalg;
pub mod liouville;
pub mod moser;
pub mod quad;
pub mod sobolev;

pub use error::{Error, Result};
