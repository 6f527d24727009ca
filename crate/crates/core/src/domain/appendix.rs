use num_rational::Ratio;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Exact rational lattice coefficients.
pub type Rational = Ratio<i128>;

/// The plane minus the discs `D_{r_{n,m}}(n, m)`, `log r_{n,m} = −2^{|n|+|m|}`,
/// together with the plateau parameter `k` of the test function `u_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeDomainSpec {
    k: f64,
    truncation: u32,
}

impl LatticeDomainSpec {
    /// `truncation` is the largest ring `|n| + |m|` summed explicitly.
    pub fn new(k: f64, truncation: u32) -> Result<Self> {
        if !(k >= 1.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "plateau parameter k = {k} < 1"
            )));
        }
        if !(1..=60).contains(&truncation) {
            return Err(Error::InvalidArgument(format!(
                "truncation {truncation} outside 1..=60"
            )));
        }
        Ok(Self { k, truncation })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    /// `log r_{n,m}`; the radius itself underflows from ring 10 on.
    pub fn log_radius(n: i64, m: i64) -> f64 {
        -(2f64.powi((n.unsigned_abs() + m.unsigned_abs()) as i32))
    }

    /// Number of lattice points on ring `|n| + |m| = j`.
    pub fn ring_count(j: u32) -> u64 {
        if j == 0 {
            1
        } else {
            4 * j as u64
        }
    }

    /// `Σ_{|n|+|m| ≤ truncation} 2^{−(|n|+|m|)}`, exactly.
    pub fn partial_gradient_sum(&self) -> Rational {
        (0..=self.truncation).fold(Rational::from_integer(0), |acc, j| {
            acc + Rational::new(Self::ring_count(j) as i128, 1i128 << j)
        })
    }
}

/// `Σ_{(n,m) ∈ ℤ²} 2^{−(|n|+|m|)} = (1 + 2 Σ_{n≥1} 2^{−n})²`, summed as a
/// geometric series, and the energy coefficient `8 + 4·that` (in units of π).
pub fn full_lattice_coefficient() -> (Rational, Rational) {
    let half = Rational::new(1, 2);
    let tail = half / (Rational::from_integer(1) - half);
    let one_axis = Rational::from_integer(1) + Rational::from_integer(2) * tail;
    let sum = one_axis * one_axis;
    (
        sum,
        Rational::from_integer(8) + Rational::from_integer(4) * sum,
    )
}

/// `Σ_{(n,m)} r_{n,m}` over the whole lattice; terms vanish in double
/// precision from ring 10 on.
pub fn radius_sum() -> f64 {
    (0..=16u32)
        .map(|j| LatticeDomainSpec::ring_count(j) as f64 * (-(2f64.powi(j as i32))).exp())
        .sum()
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppendixReport {
    pub k: f64,
    pub truncation: u32,
    /// `8 + 4·Σ_{|n|+|m| ≤ truncation} 2^{−(|n|+|m|)}`, exact, in units of π.
    pub truncated_coefficient: Rational,
    /// `8 + 4·9 = 44`, in units of π.
    pub full_coefficient: Rational,
    pub truncated_energy_bound: f64,
    /// `44π`, valid for every `k`.
    pub energy_bound: f64,
    pub radius_sum: f64,
    /// `π k² − π Σ r_{n,m}`.
    pub l2_lower: f64,
    /// `energy_bound / l2_lower`.
    pub quotient: f64,
    /// `√2/2 + max r_{n,m}`.
    pub inradius_bound: f64,
}

/// Closed-form energy and L² bounds for `u_k = min(φ, ψ_k)`: the cap `ψ_k`
/// contributes at most `8π`, the hole at `(n, m)` exactly `4π·2^{−(|n|+|m|)}`.
pub fn appendix_report(spec: &LatticeDomainSpec) -> AppendixReport {
    let (_, full) = full_lattice_coefficient();
    let truncated =
        Rational::from_integer(8) + Rational::from_integer(4) * spec.partial_gradient_sum();
    let rs = radius_sum();
    let l2_lower = PI * spec.k * spec.k - PI * rs;
    let energy_bound = PI * to_f64(full);
    AppendixReport {
        k: spec.k,
        truncation: spec.truncation,
        truncated_coefficient: truncated,
        full_coefficient: full,
        truncated_energy_bound: PI * to_f64(truncated),
        energy_bound,
        radius_sum: rs,
        l2_lower,
        quotient: energy_bound / l2_lower,
        inradius_bound: FRAC_1_SQRT_2 + (-1f64).exp(),
    }
}
