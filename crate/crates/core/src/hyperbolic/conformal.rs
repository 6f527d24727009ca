use num_complex::Complex64;

use super::grid::GeodesicGrid;
use crate::error::{Error, Result};

/// Closed-form factor `ζ(x) = scale · (1 − |x|²)^(−exponent)` relative to the
/// hyperbolic metric.
///
/// `exponent = 0` is a constant multiple of the hyperbolic metric,
/// `scale = 1/4, exponent = −2` is the euclidean metric, and the metrics
/// `(2/(1−|x|²))^α g_e` correspond to `scale = 2^(α−2), exponent = α − 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFactor {
    pub scale: f64,
    pub exponent: f64,
}

impl PowerFactor {
    /// ζ at geodesic radius `t`, using `1 − r² = sech²(t/2)`.
    pub fn at_t(&self, t: f64) -> f64 {
        if self.exponent == 0.0 {
            return self.scale;
        }
        self.scale * (0.5 * t).cosh().powf(2.0 * self.exponent)
    }

    pub fn at_radius(&self, r: f64) -> f64 {
        if self.exponent == 0.0 {
            return self.scale;
        }
        self.scale * (1.0 - r * r).powf(-self.exponent)
    }

    /// Gauss curvature of `g = ζ g_h`.
    pub fn curvature_at_radius(&self, r: f64) -> f64 {
        -(self.exponent + 2.0) * (1.0 - r * r).powf(self.exponent) / (2.0 * self.scale)
    }

    pub fn curvature_at_t(&self, t: f64) -> f64 {
        -(self.exponent + 2.0) * (0.5 * t).cosh().powf(-2.0 * self.exponent) / (2.0 * self.scale)
    }
}

/// A conformal factor `ζ = g/g_h`, either closed-form or sampled at the nodes
/// of a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum ConformalFactor {
    Power(PowerFactor),
    Sampled(Vec<f64>),
}

impl ConformalFactor {
    pub fn hyperbolic() -> Self {
        Self::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::Power(PowerFactor {
            scale: c,
            exponent: 0.0,
        })
    }

    pub fn euclidean() -> Self {
        Self::Power(PowerFactor {
            scale: 0.25,
            exponent: -2.0,
        })
    }

    /// Factor of the metric `(2/(1−|x|²))^α g_e`.
    pub fn metric_power(alpha: f64) -> Self {
        Self::Power(PowerFactor {
            scale: 2f64.powf(alpha - 2.0),
            exponent: alpha - 2.0,
        })
    }

    /// Sampled ζ; every sample must be finite and strictly positive.
    pub fn sampled(grid: &GeodesicGrid, zeta: Vec<f64>) -> Result<Self> {
        if zeta.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} samples for a grid of {} nodes",
                zeta.len(),
                grid.len()
            )));
        }
        if let Some(z) = zeta.iter().find(|z| !(z.is_finite() && **z > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "conformal factor sample {z} is not positive"
            )));
        }
        Ok(Self::Sampled(zeta))
    }

    /// Builds ζ from samples of the euclidean-relative factor ρ via
    /// `ζ = ρ (1 − r²)² / 4`.
    pub fn from_rho_samples(grid: &GeodesicGrid, rho: &[f64]) -> Result<Self> {
        let zeta = grid
            .nodes()
            .iter()
            .zip(rho)
            .map(|(&t, &p)| p * 0.25 * (0.5 * t).cosh().powi(-4))
            .collect();
        Self::sampled(grid, zeta)
    }

    /// Samples of ζ at the nodes of `grid`.
    pub fn samples(&self, grid: &GeodesicGrid) -> Result<Vec<f64>> {
        match self {
            Self::Power(p) => Ok(grid.nodes().iter().map(|&t| p.at_t(t)).collect()),
            Self::Sampled(z) => {
                self.check_len(grid)?;
                Ok(z.clone())
            }
        }
    }

    /// Samples of the euclidean-relative factor `ρ = 4ζ/(1 − r²)²`.
    pub fn rho_samples(&self, grid: &GeodesicGrid) -> Result<Vec<f64>> {
        let zeta = self.samples(grid)?;
        Ok(grid
            .nodes()
            .iter()
            .zip(zeta)
            .map(|(&t, z)| 4.0 * z * (0.5 * t).cosh().powi(4))
            .collect())
    }

    /// ζ at `t`, interpolating linearly inside cell `cell` for sampled factors.
    pub(crate) fn eval_in_cell(&self, grid: &GeodesicGrid, cell: usize, t: f64) -> f64 {
        match self {
            Self::Power(p) => p.at_t(t),
            Self::Sampled(z) => {
                let (a, b) = (grid.nodes()[cell], grid.nodes()[cell + 1]);
                let s = (t - a) / (b - a);
                z[cell] * (1.0 - s) + z[cell + 1] * s
            }
        }
    }

    pub(crate) fn check_len(&self, grid: &GeodesicGrid) -> Result<()> {
        match self {
            Self::Sampled(z) if z.len() != grid.len() => Err(Error::GridMismatch(format!(
                "conformal factor has {} samples, grid has {} nodes",
                z.len(),
                grid.len()
            ))),
            _ => Ok(()),
        }
    }

    /// Pointwise sum of two factors on a grid.
    pub fn sum(&self, other: &Self, grid: &GeodesicGrid) -> Result<Self> {
        let a = self.samples(grid)?;
        let b = other.samples(grid)?;
        Self::sampled(grid, a.iter().zip(&b).map(|(x, y)| x + y).collect())
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Self::Power(p) => Self::Power(PowerFactor {
                scale: p.scale * c,
                exponent: p.exponent,
            }),
            Self::Sampled(z) => Self::Sampled(z.iter().map(|v| v * c).collect()),
        }
    }
}

/// A conformal factor defined on the whole disc, not necessarily radial.
pub trait PlanarZeta {
    fn zeta(&self, z: Complex64) -> f64;

    /// `ζ(z)` when `1 − |z|²` is known more accurately than `z` itself.
    fn zeta_with_defect(&self, z: Complex64, _defect: f64) -> f64 {
        self.zeta(z)
    }
}

impl PlanarZeta for PowerFactor {
    fn zeta(&self, z: Complex64) -> f64 {
        self.at_radius(z.norm())
    }

    fn zeta_with_defect(&self, _z: Complex64, defect: f64) -> f64 {
        if self.exponent == 0.0 {
            return self.scale;
        }
        self.scale * defect.powf(-self.exponent)
    }
}

impl<F: Fn(Complex64) -> f64> PlanarZeta for F {
    fn zeta(&self, z: Complex64) -> f64 {
        self(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_rho_relation_on_samples() {
        let g = GeodesicGrid::uniform(6.0, 60).unwrap();
        let eu = ConformalFactor::euclidean();
        let rho = eu.rho_samples(&g).unwrap();
        for r in rho {
            assert!((r - 1.0).abs() < 1e-12);
        }
        let hyp_rho = ConformalFactor::hyperbolic().rho_samples(&g).unwrap();
        for (&t, p) in g.nodes().iter().zip(hyp_rho) {
            let r = (0.5 * t).tanh();
            let expect = 4.0 / (1.0 - r * r).powi(2);
            assert!((p - expect).abs() <= 1e-9 * expect);
        }
        let back = ConformalFactor::from_rho_samples(&g, &vec![1.0; g.len()]).unwrap();
        let direct = eu.samples(&g).unwrap();
        if let ConformalFactor::Sampled(z) = back {
            for (a, b) in z.iter().zip(direct) {
                assert!((a - b).abs() <= 1e-15 * b.max(1e-300) + 1e-300);
            }
        }
    }

    #[test]
    fn metric_power_family() {
        let e = ConformalFactor::metric_power(0.0);
        assert_eq!(e, ConformalFactor::euclidean());
        let h = ConformalFactor::metric_power(2.0);
        assert_eq!(h, ConformalFactor::hyperbolic());
    }

    #[test]
    fn background_curvatures() {
        let hyp = PowerFactor {
            scale: 1.0,
            exponent: 0.0,
        };
        let eu = PowerFactor {
            scale: 0.25,
            exponent: -2.0,
        };
        for r in [0.0, 0.3, 0.9] {
            assert!((hyp.curvature_at_radius(r) + 1.0).abs() < 1e-15);
            assert!(eu.curvature_at_radius(r).abs() < 1e-15);
        }
        // ρ_α = (2/(1−r²))^α has curvature −(α/2)(2/(1−r²))^(2−α).
        let alpha = 1.0;
        let fam = PowerFactor {
            scale: 2f64.powf(alpha - 2.0),
            exponent: alpha - 2.0,
        };
        let r: f64 = 0.5;
        let expect = -(alpha / 2.0) * (2.0 / (1.0 - r * r)).powf(2.0 - alpha);
        assert!((fam.curvature_at_radius(r) - expect).abs() < 1e-12);
        let t = 2.0 * r.atanh();
        assert!((fam.curvature_at_t(t) - expect).abs() < 1e-12);
    }

    #[test]
    fn sampled_rejects_nonpositive() {
        let g = GeodesicGrid::uniform(1.0, 2).unwrap();
        assert!(ConformalFactor::sampled(&g, vec![1.0, 0.0, 1.0]).is_err());
        assert!(ConformalFactor::sampled(&g, vec![1.0, 1.0]).is_err());
    }
}
