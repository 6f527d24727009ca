use crate::error::{Error, Result};

/// Default truncation of the geodesic axis.
pub const DEFAULT_T_MAX: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Uniform,
    Graded,
}

/// Parameters of a graded grid.
///
/// Below the anchor the grid is uniform with `core_cells` cells. Past the
/// anchor the spacing grows geometrically, `h = growth · t`, until it reaches
/// `max_spacing`; from there on it is uniform up to `t_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grading {
    pub core_cells: usize,
    pub growth: f64,
    pub max_spacing: f64,
}

impl Default for Grading {
    fn default() -> Self {
        Self {
            core_cells: 32,
            growth: 1.0 / 500.0,
            max_spacing: 2.5e-3,
        }
    }
}

impl Grading {
    /// A cheaper grading for experiments that do not need 1e-6 energies.
    pub fn coarse() -> Self {
        Self {
            core_cells: 16,
            growth: 1.0 / 60.0,
            max_spacing: 2.0e-2,
        }
    }
}

/// Strictly increasing geodesic radii `0 = t_0 < t_1 < … < t_N = T_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicGrid {
    nodes: Vec<f64>,
    spacing: Spacing,
}

impl GeodesicGrid {
    pub fn new(nodes: Vec<f64>, spacing: Spacing) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least three nodes, got {}",
                nodes.len()
            )));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidGrid(format!(
                "first node is {}, not 0",
                nodes[0]
            )));
        }
        if let Some(w) = nodes.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid(format!(
                "nodes not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        let last = *nodes.last().unwrap();
        if !last.is_finite() {
            return Err(Error::InvalidGrid("T_max must be finite".into()));
        }
        Ok(Self { nodes, spacing })
    }

    pub fn uniform(t_max: f64, cells: usize) -> Result<Self> {
        if !(t_max > 0.0) || cells < 2 {
            return Err(Error::InvalidGrid(format!(
                "uniform grid needs t_max > 0 and at least 2 cells (t_max = {t_max}, cells = {cells})"
            )));
        }
        let h = t_max / cells as f64;
        let mut nodes: Vec<f64> = (0..=cells).map(|i| i as f64 * h).collect();
        nodes[cells] = t_max;
        Self::new(nodes, Spacing::Uniform)
    }

    /// Graded grid with a node exactly at `anchor`.
    pub fn graded(anchor: f64, t_max: f64) -> Result<Self> {
        Self::graded_with(anchor, t_max, Grading::default())
    }

    pub fn graded_with(anchor: f64, t_max: f64, grading: Grading) -> Result<Self> {
        if !(anchor > 0.0 && anchor < t_max && t_max.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "graded grid needs 0 < anchor < t_max (anchor = {anchor}, t_max = {t_max})"
            )));
        }
        if grading.core_cells == 0 || !(grading.growth > 0.0) || !(grading.max_spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("bad grading {grading:?}")));
        }
        let mut nodes = Vec::new();
        let core = grading.core_cells;
        for i in 0..core {
            nodes.push(anchor * i as f64 / core as f64);
        }
        nodes.push(anchor);
        let mut t = anchor;
        loop {
            let h = (grading.growth * t).min(grading.max_spacing);
            let next = t + h;
            if next >= t_max - 0.5 * h {
                break;
            }
            nodes.push(next);
            t = next;
        }
        nodes.push(t_max);
        Self::new(nodes, Spacing::Graded)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    /// Number of nodes, `N + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }

    /// Index of the cell `[t_i, t_{i+1}]` containing `t` (clamped to the grid).
    pub fn cell_of(&self, t: f64) -> usize {
        let n = self.nodes.len();
        match self.nodes.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// `∫ sinh t dt` over cell `i`, free of cancellation for tiny cells.
    pub fn cell_sinh_measure(&self, i: usize) -> f64 {
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        2.0 * (0.5 * (a + b)).sinh() * (0.5 * (b - a)).sinh()
    }

    /// `∫ φ_i(t) sinh t dt` for the piecewise-linear hat functions `φ_i`.
    pub fn hat_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.nodes.len()];
        for i in 0..self.nodes.len() - 1 {
            let a = self.nodes[i];
            let h = self.nodes[i + 1] - a;
            let (sa, ca) = (a.sinh(), a.cosh());
            let left = sa * cosh_m1_over(h) + ca * sinh_m_id_over(h);
            let right = sa * (h.sinh() - cosh_m1_over(h)) + ca * cosh_m_sinhc(h);
            w[i] += left;
            w[i + 1] += right;
        }
        w
    }
}

/// `(cosh h − 1)/h`.
fn cosh_m1_over(h: f64) -> f64 {
    2.0 * (0.5 * h).sinh().powi(2) / h
}

/// `(sinh h − h)/h`.
fn sinh_m_id_over(h: f64) -> f64 {
    if h.abs() < 0.1 {
        let h2 = h * h;
        h2 * (1.0 / 6.0 + h2 * (1.0 / 120.0 + h2 * (1.0 / 5040.0 + h2 / 362_880.0)))
    } else {
        (h.sinh() - h) / h
    }
}

/// `cosh h − sinh(h)/h`.
fn cosh_m_sinhc(h: f64) -> f64 {
    if h.abs() < 0.1 {
        let h2 = h * h;
        h2 * (1.0 / 3.0 + h2 * (1.0 / 30.0 + h2 * (1.0 / 840.0 + h2 / 45_360.0)))
    } else {
        h.cosh() - h.sinh() / h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gl5;

    #[test]
    fn rejects_bad_nodes() {
        assert!(GeodesicGrid::new(vec![0.0, 1.0], Spacing::Uniform).is_err());
        assert!(GeodesicGrid::new(vec![0.1, 1.0, 2.0], Spacing::Uniform).is_err());
        assert!(GeodesicGrid::new(vec![0.0, 1.0, 1.0], Spacing::Uniform).is_err());
        assert!(GeodesicGrid::new(vec![0.0, 1.0, f64::INFINITY], Spacing::Uniform).is_err());
        assert!(GeodesicGrid::graded(0.0, 40.0).is_err());
        assert!(GeodesicGrid::graded(50.0, 40.0).is_err());
    }

    #[test]
    fn graded_grid_contains_anchor_and_ends_at_t_max() {
        let anchor = 2.0 * 1e-6f64.atanh();
        let g = GeodesicGrid::graded(anchor, DEFAULT_T_MAX).unwrap();
        assert!(g.nodes().iter().any(|&t| t == anchor));
        assert_eq!(g.t_max(), DEFAULT_T_MAX);
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.spacing(), Spacing::Graded);
    }

    fn composite(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let m = 64;
        let h = (b - a) / m as f64;
        (0..m)
            .map(|k| gl5(a + k as f64 * h, a + (k + 1) as f64 * h, &f))
            .sum()
    }

    #[test]
    fn hat_weights_match_quadrature() {
        let g =
            GeodesicGrid::new(vec![0.0, 1e-7, 2e-7, 0.05, 0.7, 2.0, 6.0], Spacing::Graded).unwrap();
        let w = g.hat_weights();
        let n = g.len();
        for i in 0..n {
            let mut expect = 0.0;
            if i > 0 {
                let (a, b) = (g.nodes()[i - 1], g.nodes()[i]);
                expect += composite(a, b, |t| (t - a) / (b - a) * t.sinh());
            }
            if i + 1 < n {
                let (a, b) = (g.nodes()[i], g.nodes()[i + 1]);
                expect += composite(a, b, |t| (b - t) / (b - a) * t.sinh());
            }
            let rel = (w[i] - expect).abs() / expect.abs().max(1e-300);
            assert!(rel < 1e-9, "node {i}: {} vs {}", w[i], expect);
        }
        let total: f64 = w.iter().sum();
        assert!((total - (6f64.cosh() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn cell_lookup() {
        let g = GeodesicGrid::uniform(4.0, 4).unwrap();
        assert_eq!(g.cell_of(0.0), 0);
        assert_eq!(g.cell_of(1.5), 1);
        assert_eq!(g.cell_of(4.0), 3);
        assert_eq!(g.cell_of(9.0), 3);
    }
}
