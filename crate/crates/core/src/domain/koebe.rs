use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::moser::Mobius;

/// Step of the central difference used for maps without a closed-form derivative.
const FD_STEP: f64 = 1e-6;

/// Conformal maps of the unit disc.
#[derive(Clone)]
pub enum ConformalMap {
    Identity,
    /// `z ↦ (z + a)/(1 + ā z)`.
    Mobius(Mobius),
    /// `z ↦ log((1+z)/(1−z))`, onto the strip `|Im w| < π/2`.
    Strip,
    /// `z ↦ ((1+z)^β − 1)/β`, univalent for `0 < β ≤ 2`.
    Power(f64),
    /// Any analytic map; differentiated numerically.
    Custom(Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>),
}

impl fmt::Debug for ConformalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => write!(f, "Identity"),
            Self::Mobius(m) => write!(f, "Mobius({})", m.center()),
            Self::Strip => write!(f, "Strip"),
            Self::Power(b) => write!(f, "Power({b})"),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeSource {
    ClosedForm,
    FiniteDifference,
}

impl ConformalMap {
    pub fn power(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 2.0) {
            return Err(Error::InvalidArgument(format!(
                "power map needs 0 < β ≤ 2, got {beta}"
            )));
        }
        Ok(Self::Power(beta))
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        match self {
            Self::Identity => z,
            Self::Mobius(m) => m.apply(z),
            Self::Strip => ((1.0 + z) / (1.0 - z)).ln(),
            Self::Power(b) => ((1.0 + z).powf(*b) - 1.0) / b,
            Self::Custom(f) => f(z),
        }
    }

    pub fn derivative_source(&self) -> DerivativeSource {
        match self {
            Self::Custom(_) => DerivativeSource::FiniteDifference,
            _ => DerivativeSource::ClosedForm,
        }
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let d = match self {
            Self::Identity => Complex64::new(1.0, 0.0),
            Self::Mobius(m) => m.derivative(z),
            Self::Strip => 2.0 / (1.0 - z * z),
            Self::Power(b) => (1.0 + z).powf(b - 1.0),
            Self::Custom(f) => {
                let h = Complex64::new(FD_STEP, 0.0);
                (f(z + h) - f(z - h)) / (2.0 * FD_STEP)
            }
        };
        if d.re.is_finite() && d.im.is_finite() {
            Ok(d)
        } else {
            Err(Error::DerivativeUnavailable(format!("{self:?} at {z}")))
        }
    }

    /// Inradius of the image, where known in closed form.
    pub fn image_inradius(&self) -> Option<f64> {
        match self {
            Self::Identity | Self::Mobius(_) => Some(1.0),
            Self::Strip => Some(FRAC_PI_2),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Mobius(_) => "mobius",
            Self::Strip => "strip",
            Self::Power(_) => "power",
            Self::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KoebeReport {
    pub r: f64,
    pub samples: usize,
    /// `max |φ'|²(1−|z|²)²/R²`.
    pub disc_form_max: f64,
    /// `max |φ'|²(1−|z|)²/R²`; at most 16 by the covering theorem.
    pub proof_form_max: f64,
    pub argmax: Complex64,
    pub source: DerivativeSource,
}

impl KoebeReport {
    pub fn contract_holds(&self) -> bool {
        self.proof_form_max <= 16.0
    }
}

/// Samples the Jacobian `|det J| = |φ'|²` at the cell centres of an `n × n`
/// grid on `[−1, 1]²` that fall inside the disc.
pub fn koebe_check(map: &ConformalMap, r: f64, n: usize) -> Result<KoebeReport> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("R = {r} must be positive")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("empty sample grid".into()));
    }
    let r2 = r * r;
    let mut report = KoebeReport {
        r,
        samples: 0,
        disc_form_max: 0.0,
        proof_form_max: 0.0,
        argmax: Complex64::new(0.0, 0.0),
        source: map.derivative_source(),
    };
    let coord = |i: usize| -1.0 + (2 * i + 1) as f64 / n as f64;
    for j in 0..n {
        for i in 0..n {
            let z = Complex64::new(coord(i), coord(j));
            let modulus = z.norm();
            if modulus >= 1.0 {
                continue;
            }
            let jac = map.derivative(z)?.norm_sqr();
            let disc = jac * (1.0 - modulus * modulus).powi(2) / r2;
            let proof = jac * (1.0 - modulus).powi(2) / r2;
            report.samples += 1;
            report.disc_form_max = report.disc_form_max.max(disc);
            if proof > report.proof_form_max {
                report.proof_form_max = proof;
                report.argmax = z;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_form_values() {
        let rep = koebe_check(&ConformalMap::Identity, 1.01, 64).unwrap();
        assert!(rep.disc_form_max < 1.0 / (1.01 * 1.01));
        assert!(rep.contract_holds());
    }

    #[test]
    fn strip_and_mobius_obey_the_bound() {
        let strip = koebe_check(&ConformalMap::Strip, 1.6, 256).unwrap();
        assert!(strip.contract_holds(), "{}", strip.proof_form_max);
        // |w'|(1−|z|) ≤ 2/(1+|z|) ≤ 2.
        assert!(strip.proof_form_max <= 4.0 / 2.56);
        let m = ConformalMap::Mobius(Mobius::new(Complex64::new(0.6, -0.3)).unwrap());
        let rep = koebe_check(&m, 1.1, 256).unwrap();
        // |φ'|(1−|z|²) = 1 − |φ|² ≤ 1.
        assert!(rep.disc_form_max <= 1.0 / 1.21 + 1e-12);
        assert!(rep.contract_holds());
    }

    #[test]
    fn finite_differences_match_closed_forms() {
        let custom = ConformalMap::Custom(Arc::new(|z: Complex64| ((1.0 + z) / (1.0 - z)).ln()));
        for z in [Complex64::new(0.3, 0.2), Complex64::new(-0.7, 0.1)] {
            let a = custom.derivative(z).unwrap();
            let b = ConformalMap::Strip.derivative(z).unwrap();
            assert!((a - b).norm() < 1e-8 * b.norm());
        }
        let p = ConformalMap::power(1.5).unwrap();
        let z = Complex64::new(0.2, 0.5);
        let h = 1e-6;
        let fd = (p.apply(z + h) - p.apply(z - h)) / (2.0 * h);
        assert!((fd - p.derivative(z).unwrap()).norm() < 1e-8);
        assert!(ConformalMap::power(3.0).is_err());
    }

    #[test]
    fn non_finite_derivative_is_reported() {
        let bad = ConformalMap::Custom(Arc::new(|z: Complex64| {
            if z.norm() < 0.5 {
                Complex64::new(f64::NAN, 0.0)
            } else {
                z
            }
        }));
        assert!(matches!(
            koebe_check(&bad, 1.0, 3),
            Err(Error::DerivativeUnavailable(_))
        ));
    }
}
