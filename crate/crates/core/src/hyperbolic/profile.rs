use super::grid::GeodesicGrid;
use crate::error::{Error, Result};

/// A piecewise-linear radial function `u(t)` sampled at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: GeodesicGrid,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(grid: GeodesicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "profile value {v} is not finite"
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zero(grid: GeodesicGrid) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Samples `f(t)` at every node.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: GeodesicGrid, f: F) -> Result<Self> {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GeodesicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn has_zero_boundary(&self) -> bool {
        *self.values.last().unwrap() == 0.0
    }

    /// Value of the linear interpolant at `t` (constant beyond `T_max`).
    pub fn eval(&self, t: f64) -> f64 {
        let nodes = self.grid.nodes();
        if t >= self.grid.t_max() {
            return *self.values.last().unwrap();
        }
        let i = self.grid.cell_of(t.max(0.0));
        let s = (t - nodes[i]) / (nodes[i + 1] - nodes[i]);
        self.values[i] * (1.0 - s) + self.values[i + 1] * s
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }
}
