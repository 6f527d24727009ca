use std::f64::consts::PI;

use super::grid::{GeodesicGrid, Spacing};
use super::profile::RadialProfile;
use crate::error::{Error, Result};

/// One level set of a symmetric decreasing rearrangement: the function takes
/// `value` on the shell between the previous level's outer radius and
/// `outer_radius`, which has hyperbolic area `volume`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub value: f64,
    pub volume: f64,
    pub outer_volume: f64,
    pub outer_radius: f64,
}

/// Radial step function produced by [`rearrange`].
#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement {
    levels: Vec<Level>,
}

/// Geodesic radius of the ball of hyperbolic area `v`, i.e.
/// `arccosh(1 + v/2π)` written without cancellation.
fn radius_of_volume(v: f64) -> f64 {
    2.0 * (v / (4.0 * PI)).sqrt().asinh()
}

/// Symmetric decreasing hyperbolic rearrangement of weighted samples
/// `(value, hyperbolic area)`.
///
/// Values are sorted in decreasing order and equal values are merged; level
/// `k` occupies the shell whose outer radius encloses the cumulative area of
/// the first `k` levels.
pub fn rearrange(samples: &[(f64, f64)]) -> Result<Rearrangement> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples to rearrange".into()));
    }
    for &(v, w) in samples {
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sample value {v} is not finite"
            )));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sample weight {w} is not positive"
            )));
        }
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut levels: Vec<Level> = Vec::new();
    let mut cumulative = 0.0;
    for (v, w) in sorted {
        cumulative += w;
        match levels.last_mut() {
            Some(last) if last.value == v => {
                last.volume += w;
                last.outer_volume = cumulative;
            }
            _ => levels.push(Level {
                value: v,
                volume: w,
                outer_volume: cumulative,
                outer_radius: 0.0,
            }),
        }
    }
    for l in &mut levels {
        l.outer_radius = radius_of_volume(l.outer_volume);
    }
    Ok(Rearrangement { levels })
}

impl Rearrangement {
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Outer radii of the levels.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.outer_radius).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.value).collect()
    }

    pub fn total_volume(&self) -> f64 {
        self.levels.last().map_or(0.0, |l| l.outer_volume)
    }

    /// `Σ F(value) · volume` over the levels.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.levels.iter().map(|l| f(l.value) * l.volume).sum()
    }

    /// Value of the step function at geodesic radius `t`; beyond the last
    /// level the last value is continued.
    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.levels.partition_point(|l| l.outer_radius <= t);
        self.levels[i.min(self.levels.len() - 1)].value
    }

    /// Samples the step function at the nodes of `grid`.
    pub fn sample_on(&self, grid: &GeodesicGrid) -> Result<RadialProfile> {
        RadialProfile::from_fn(grid.clone(), |t| self.value_at(t))
    }

    /// Piecewise-linear profile with a node at every level boundary: the value
    /// at the inner edge of each shell is the level's value.
    ///
    /// When levels from separate parts of the input interleave, the shell
    /// widths are unrelated to the value gaps and the energy of this profile
    /// overstates that of the rearrangement; use [`Self::sample_on`] for
    /// energy comparisons.
    pub fn to_profile(&self) -> Result<RadialProfile> {
        let mut nodes = vec![0.0];
        let mut values = Vec::with_capacity(self.levels.len() + 2);
        for l in &self.levels {
            values.push(l.value);
            nodes.push(l.outer_radius);
        }
        values.push(self.levels.last().unwrap().value);
        if nodes.len() < 3 {
            let t = nodes[1];
            nodes.insert(1, 0.5 * t);
            values.insert(1, values[0]);
        }
        RadialProfile::new(GeodesicGrid::new(nodes, Spacing::Graded)?, values)
    }
}
