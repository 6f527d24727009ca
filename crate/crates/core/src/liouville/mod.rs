//! Radial prescribed-curvature problems on the disc.
//!
//! Equations handled, for a radial unknown on a truncated disc:
//!
//! * `Δ_g v − K_g + K e^{2v} = 0` with `g` euclidean (`K_g = 0`), hyperbolic
//!   (`K_g = −1`) or a power conformal metric;
//! * `Δ_g v + K₁ + K₂ e^{2v} = 0` through the ratio functional `E_K`.
//!
//! The discretization is a finite-volume scheme: exact cell integrals of the
//! radial measure for the stiffness, dual-cell volumes for the lumped terms.

mod convex;
mod ratio;

pub use convex::{coercivity_constant, convex_energy, solve_dirichlet_convex, SolverOptions};
pub use ratio::{ratio_energy, solve_ratio_functional, RatioReport};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hyperbolic::{euclid_radius, GeodesicGrid, PowerFactor};
use crate::quad::gl5;

/// Radial nodes in either euclidean radius `r` or geodesic radius `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialMesh {
    Euclidean(Vec<f64>),
    Geodesic(GeodesicGrid),
}

impl RadialMesh {
    /// `nodes` equally spaced euclidean radii on `[0, r_max]`.
    pub fn euclidean_uniform(r_max: f64, nodes: usize) -> Result<Self> {
        if nodes < 3 {
            return Err(Error::InvalidGrid(format!(
                "{nodes} nodes, need at least 3"
            )));
        }
        let h = r_max / (nodes - 1) as f64;
        let mut radii: Vec<f64> = (0..nodes).map(|i| i as f64 * h).collect();
        radii[nodes - 1] = r_max;
        Self::euclidean(radii)
    }

    pub fn euclidean(radii: Vec<f64>) -> Result<Self> {
        if radii.len() < 3 {
            return Err(Error::InvalidGrid(format!(
                "{} nodes, need at least 3",
                radii.len()
            )));
        }
        if radii[0] != 0.0 {
            return Err(Error::InvalidGrid("first radius must be 0".into()));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid("radii must increase strictly".into()));
        }
        let last = radii[radii.len() - 1];
        if !(last <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "outer radius {last} leaves the disc"
            )));
        }
        Ok(Self::Euclidean(radii))
    }

    pub fn geodesic(grid: GeodesicGrid) -> Self {
        Self::Geodesic(grid)
    }

    pub fn coords(&self) -> &[f64] {
        match self {
            Self::Euclidean(r) => r,
            Self::Geodesic(g) => g.nodes(),
        }
    }

    pub fn len(&self) -> usize {
        self.coords().len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords().is_empty()
    }

    fn radius_at(&self, x: f64) -> f64 {
        match self {
            Self::Euclidean(_) => x,
            Self::Geodesic(_) => euclid_radius(x),
        }
    }

    /// Euclidean radius of every node.
    pub fn radii(&self) -> Vec<f64> {
        self.coords().iter().map(|&x| self.radius_at(x)).collect()
    }

    /// `log(2/(1−r²))` at every node, the hyperbolic log-density.
    pub fn hyperbolic_log_density(&self) -> Vec<f64> {
        match self {
            Self::Euclidean(r) => r.iter().map(|r| 2f64.ln() - (-r * r).ln_1p()).collect(),
            Self::Geodesic(g) => g
                .nodes()
                .iter()
                .map(|t| 2f64.ln() + 2.0 * (0.5 * t).cosh().ln())
                .collect(),
        }
    }

    /// Density of the radial energy measure: `2πr` or `2π sinh t`.
    fn energy_density(&self, x: f64) -> f64 {
        match self {
            Self::Euclidean(_) => 2.0 * PI * x,
            Self::Geodesic(_) => 2.0 * PI * x.sinh(),
        }
    }

    /// `∫_cell (energy density) / h²`.
    fn stiffness(&self, i: usize) -> f64 {
        let x = self.coords();
        let h = x[i + 1] - x[i];
        match self {
            Self::Euclidean(_) => PI * (x[i] + x[i + 1]) / h,
            Self::Geodesic(g) => 2.0 * PI * g.cell_sinh_measure(i) / (h * h),
        }
    }

    /// Background volume density relative to the energy measure.
    fn volume_ratio(&self, background: &Background, x: f64) -> f64 {
        let z = background.zeta();
        match self {
            Self::Euclidean(_) => {
                let s = 1.0 - x * x;
                z.at_radius(x) * 4.0 / (s * s)
            }
            Self::Geodesic(_) => z.at_t(x),
        }
    }
}

/// Background metric `g` on which the equation is posed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Background {
    Euclidean,
    Hyperbolic,
    /// `g = ζ g_h` with a closed-form power factor.
    Conformal(PowerFactor),
}

impl Background {
    pub fn zeta(&self) -> PowerFactor {
        match self {
            Self::Euclidean => PowerFactor {
                scale: 0.25,
                exponent: -2.0,
            },
            Self::Hyperbolic => PowerFactor {
                scale: 1.0,
                exponent: 0.0,
            },
            Self::Conformal(z) => *z,
        }
    }

    pub fn curvature_at_radius(&self, r: f64) -> f64 {
        match self {
            Self::Euclidean => 0.0,
            Self::Hyperbolic => -1.0,
            Self::Conformal(z) => z.curvature_at_radius(r),
        }
    }
}

/// Curvature data sampled at every mesh node (boundary included).
#[derive(Debug, Clone, PartialEq)]
pub enum CurvatureData {
    /// Prescribed curvature `K`.
    Single(Vec<f64>),
    /// `H = K − K_g`; the background supplies `K_g`.
    Split(Vec<f64>),
    /// `Δ_g v + K₁ + K₂ e^{2v} = 0`.
    Pair { k1: Vec<f64>, k2: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProblem {
    pub mesh: RadialMesh,
    pub background: Background,
    pub data: CurvatureData,
    pub boundary_value: f64,
}

impl CurvatureProblem {
    pub fn new(
        mesh: RadialMesh,
        background: Background,
        data: CurvatureData,
        boundary_value: f64,
    ) -> Result<Self> {
        let n = mesh.len();
        let fields: Vec<&Vec<f64>> = match &data {
            CurvatureData::Single(k) | CurvatureData::Split(k) => vec![k],
            CurvatureData::Pair { k1, k2 } => vec![k1, k2],
        };
        for f in fields {
            if f.len() != n {
                return Err(Error::GridMismatch(format!(
                    "{} curvature samples on {n} nodes",
                    f.len()
                )));
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("non-finite curvature sample".into()));
            }
        }
        if !boundary_value.is_finite() {
            return Err(Error::InvalidArgument("non-finite boundary value".into()));
        }
        let problem = Self {
            mesh,
            background,
            data,
            boundary_value,
        };
        let d = Discretization::new(&problem.mesh, &problem.background);
        if d.vol.iter().chain(&d.kg).any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(
                "background metric is singular on the mesh".into(),
            ));
        }
        Ok(problem)
    }

    /// Convenience constructor sampling `K` from a function of the euclidean
    /// radius.
    pub fn from_fn<F: Fn(f64) -> f64>(
        mesh: RadialMesh,
        background: Background,
        k: F,
        boundary_value: f64,
    ) -> Result<Self> {
        let samples = mesh.radii().into_iter().map(k).collect();
        Self::new(
            mesh,
            background,
            CurvatureData::Single(samples),
            boundary_value,
        )
    }

    /// `K` at every node for single and split data.
    pub fn curvature(&self) -> Option<Vec<f64>> {
        match &self.data {
            CurvatureData::Single(k) => Some(k.clone()),
            CurvatureData::Split(h) => Some(
                h.iter()
                    .zip(self.background_curvature())
                    .map(|(h, kg)| h + kg)
                    .collect(),
            ),
            CurvatureData::Pair { .. } => None,
        }
    }

    pub fn background_curvature(&self) -> Vec<f64> {
        self.mesh
            .radii()
            .into_iter()
            .map(|r| self.background.curvature_at_radius(r))
            .collect()
    }
}

/// Assembled discrete operators. Unknowns are the `N` nodes before the
/// boundary node.
#[derive(Debug, Clone)]
pub(crate) struct Discretization {
    /// Stiffness per cell.
    pub(crate) cell: Vec<f64>,
    /// Dual-cell volumes of the background metric at unknown nodes.
    pub(crate) vol: Vec<f64>,
    /// Background curvature at all nodes.
    pub(crate) kg: Vec<f64>,
}

impl Discretization {
    pub(crate) fn new(mesh: &RadialMesh, background: &Background) -> Self {
        let x = mesh.coords();
        let n = x.len() - 1;
        let cell = (0..n).map(|i| mesh.stiffness(i)).collect();
        let density = |s: f64| mesh.energy_density(s) * mesh.volume_ratio(background, s);
        let mut vol = vec![0.0; n];
        for i in 0..n {
            let mid = 0.5 * (x[i] + x[i + 1]);
            vol[i] += gl5(x[i], mid, density);
            if i + 1 < n {
                vol[i + 1] += gl5(mid, x[i + 1], density);
            }
        }
        let kg = mesh
            .radii()
            .into_iter()
            .map(|r| background.curvature_at_radius(r))
            .collect();
        Self { cell, vol, kg }
    }

    pub(crate) fn unknowns(&self) -> usize {
        self.vol.len()
    }

    /// Diagonal and off-diagonal of the stiffness on the unknowns.
    pub(crate) fn stiffness(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.unknowns();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for (i, &c) in self.cell.iter().enumerate() {
            diag[i] += c;
            if i + 1 < n {
                diag[i + 1] += c;
                off[i] = -c;
            }
        }
        (diag, off)
    }

    /// `(A v)_i` for unknown rows, with `v` including the boundary node.
    pub(crate) fn apply_full(&self, v: &[f64]) -> Vec<f64> {
        let n = self.unknowns();
        let mut out = vec![0.0; n];
        for (i, &c) in self.cell.iter().enumerate() {
            let flux = c * (v[i] - v[i + 1]);
            out[i] += flux;
            if i + 1 < n {
                out[i + 1] -= flux;
            }
        }
        out
    }
}

/// Per-node strong-form defect at the unknown nodes and its `L²(dV_g)` norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub norm: f64,
    pub values: Vec<f64>,
}

/// Defect of `v` (boundary node included) in the problem's equation.
pub fn residual(v: &[f64], problem: &CurvatureProblem) -> Result<Residual> {
    let d = Discretization::new(&problem.mesh, &problem.background);
    if v.len() != problem.mesh.len() {
        return Err(Error::GridMismatch(format!(
            "{} values on {} nodes",
            v.len(),
            problem.mesh.len()
        )));
    }
    let av = d.apply_full(v);
    let x = problem.mesh.coords();
    let mut values = Vec::with_capacity(d.unknowns());
    for i in 0..d.unknowns() {
        let e2v = checked_exp2(v[i], x[i])?;
        let lap = -av[i] / d.vol[i];
        let r = match &problem.data {
            CurvatureData::Single(k) => lap - d.kg[i] + k[i] * e2v,
            CurvatureData::Split(h) => lap + h[i] + (h[i] + d.kg[i]) * (e2v - 1.0),
            CurvatureData::Pair { k1, k2 } => lap + k1[i] + k2[i] * e2v,
        };
        values.push(r);
    }
    let norm = values
        .iter()
        .zip(&d.vol)
        .map(|(r, w)| r * r * w)
        .sum::<f64>()
        .sqrt();
    Ok(Residual { norm, values })
}

/// `e^{2v}` with an overflow trigger.
pub(crate) fn checked_exp2(v: f64, x: f64) -> Result<f64> {
    let e = 2.0 * v;
    if e > 709.0 {
        return Err(Error::Overflow { t: x, exponent: e });
    }
    Ok(e.exp())
}

/// `K_α = −(α/2)(2/(1−r²))^{2−α}` and `v_α = (α/2) log(2/(1−r²))` at the mesh
/// nodes; `v_α` solves `Δv + K_α e^{2v} = 0`.
pub fn explicit_family(alpha: f64, mesh: &RadialMesh) -> Result<(Vec<f64>, Vec<f64>)> {
    let log_rho = mesh.hyperbolic_log_density();
    if log_rho.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidGrid(
            "explicit family is singular at |x| = 1".into(),
        ));
    }
    let k = log_rho
        .iter()
        .map(|l| -0.5 * alpha * ((2.0 - alpha) * l).exp())
        .collect();
    let v = log_rho.iter().map(|l| 0.5 * alpha * l).collect();
    Ok((k, v))
}

/// Max over the nodes of `|v − u − log(2/(1−r²))|` for a euclidean solution
/// `v` and a hyperbolic solution `u` on the same mesh.
pub fn relate_backgrounds(
    v_mesh: &RadialMesh,
    v: &[f64],
    u_mesh: &RadialMesh,
    u: &[f64],
) -> Result<f64> {
    if v_mesh != u_mesh {
        return Err(Error::GridMismatch(
            "solutions live on different meshes".into(),
        ));
    }
    if v.len() != v_mesh.len() || u.len() != u_mesh.len() {
        return Err(Error::GridMismatch(
            "profile length differs from mesh".into(),
        ));
    }
    let rho = v_mesh.hyperbolic_log_density();
    Ok(v.iter()
        .zip(u)
        .zip(&rho)
        .map(|((v, u), l)| (v - u - l).abs())
        .fold(0.0, f64::max))
}
