//! Planar domains: rasterized masks, inradius, the first Dirichlet eigenvalue,
//! the closed-form lattice-of-holes domain and the Koebe Jacobian check.

mod appendix;
mod distance;
mod eigen;
mod koebe;

pub use appendix::{
    appendix_report, full_lattice_coefficient, radius_sum, to_f64, AppendixReport,
    LatticeDomainSpec, Rational,
};
pub use distance::{distance_to_complement, inradius, Inradius};
pub use eigen::{lambda1_fd, lambda1_single, Lambda1Options, Lambda1Report};
pub use koebe::{koebe_check, ConformalMap, DerivativeSource, KoebeReport};

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Closed-form planar shapes that can be rasterized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Disc {
        center: [f64; 2],
        radius: f64,
    },
    /// Axis-aligned square.
    Square {
        center: [f64; 2],
        side: f64,
    },
    Annulus {
        center: [f64; 2],
        inner: f64,
        outer: f64,
    },
}

impl Shape {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            Shape::Disc { center, radius } => dist(p, center) < radius,
            Shape::Square { center, side } => {
                (p[0] - center[0]).abs() < 0.5 * side && (p[1] - center[1]).abs() < 0.5 * side
            }
            Shape::Annulus {
                center,
                inner,
                outer,
            } => {
                let d = dist(p, center);
                d > inner && d < outer
            }
        }
    }

    fn center_and_extent(&self) -> ([f64; 2], f64) {
        match *self {
            Shape::Disc { center, radius } => (center, radius),
            Shape::Square { center, side } => (center, 0.5 * side),
            Shape::Annulus { center, outer, .. } => (center, outer),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Shape::Disc { radius, .. } => radius > 0.0 && radius.is_finite(),
            Shape::Square { side, .. } => side > 0.0 && side.is_finite(),
            Shape::Annulus { inner, outer, .. } => {
                inner >= 0.0 && outer > inner && outer.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("degenerate shape {self:?}")))
        }
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Boolean inclusion on the points `origin + (i h, j h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarDomainMask {
    origin: [f64; 2],
    h: f64,
    nx: usize,
    ny: usize,
    inside: Vec<bool>,
    shape: Option<Shape>,
}

/// Header accompanying a raster file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskHeader {
    pub origin: [f64; 2],
    pub h: f64,
}

impl PlanarDomainMask {
    pub fn new(origin: [f64; 2], h: f64, nx: usize, ny: usize, inside: Vec<bool>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing {h} must be positive")));
        }
        if inside.len() != nx * ny {
            return Err(Error::InvalidGrid(format!(
                "{} flags for a {nx}×{ny} grid",
                inside.len()
            )));
        }
        if !inside.iter().any(|&b| b) {
            return Err(Error::EmptyDomain);
        }
        Ok(Self {
            origin,
            h,
            nx,
            ny,
            inside,
            shape: None,
        }
        .padded())
    }

    /// Samples `shape` on a grid of spacing `h` with the shape's centre on a
    /// grid point and at least two outside layers all round.
    pub fn rasterize(shape: Shape, h: f64) -> Result<Self> {
        shape.validate()?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing {h} must be positive")));
        }
        let (c, extent) = shape.center_and_extent();
        let m = (extent / h).ceil() as usize + 2;
        let n = 2 * m + 1;
        let origin = [c[0] - m as f64 * h, c[1] - m as f64 * h];
        let mut inside = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let p = [
                    c[0] + (i as f64 - m as f64) * h,
                    c[1] + (j as f64 - m as f64) * h,
                ];
                inside.push(shape.contains(p));
            }
        }
        if !inside.iter().any(|&b| b) {
            return Err(Error::EmptyDomain);
        }
        Ok(Self {
            origin,
            h,
            nx: n,
            ny: n,
            inside,
            shape: Some(shape),
        })
    }

    /// Halves the spacing: shapes are resampled, rasters upsampled.
    pub fn refine(&self) -> Result<Self> {
        if let Some(shape) = self.shape {
            return Self::rasterize(shape, 0.5 * self.h);
        }
        let (nx, ny) = (2 * self.nx - 1, 2 * self.ny - 1);
        let mut inside = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let (i0, j0) = (i / 2, j / 2);
                let (i1, j1) = ((i + 1) / 2, (j + 1) / 2);
                inside[j * nx + i] =
                    self.at(i0, j0) && self.at(i1, j0) && self.at(i0, j1) && self.at(i1, j1);
            }
        }
        Self::new(self.origin, 0.5 * self.h, nx, ny, inside)
    }

    /// Ensures a ring of outside points around the raster.
    fn padded(self) -> Self {
        let border = (0..self.nx).any(|i| self.at(i, 0) || self.at(i, self.ny - 1))
            || (0..self.ny).any(|j| self.at(0, j) || self.at(self.nx - 1, j));
        if !border {
            return self;
        }
        let (nx, ny) = (self.nx + 2, self.ny + 2);
        let mut inside = vec![false; nx * ny];
        for j in 0..self.ny {
            for i in 0..self.nx {
                inside[(j + 1) * nx + i + 1] = self.at(i, j);
            }
        }
        Self {
            origin: [self.origin[0] - self.h, self.origin[1] - self.h],
            h: self.h,
            nx,
            ny,
            inside,
            shape: self.shape,
        }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn shape(&self) -> Option<Shape> {
        self.shape
    }

    pub fn at(&self, i: usize, j: usize) -> bool {
        self.inside[j * self.nx + i]
    }

    pub fn flags(&self) -> &[bool] {
        &self.inside
    }

    pub fn interior_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + i as f64 * self.h,
            self.origin[1] + j as f64 * self.h,
        ]
    }

    /// Reads a PGM raster (P2 or P5); pixels above half the maximum grey level
    /// are inside. The first raster row is the top (largest y).
    pub fn from_pgm(bytes: &[u8], header: &MaskHeader) -> Result<Self> {
        let (nx, ny, maxval, pixels) = parse_pgm(bytes)?;
        let threshold = maxval as f64 / 2.0;
        let mut inside = vec![false; nx * ny];
        for row in 0..ny {
            for i in 0..nx {
                inside[(ny - 1 - row) * nx + i] = pixels[row * nx + i] as f64 > threshold;
            }
        }
        Self::new(header.origin, header.h, nx, ny, inside)
    }

    /// Reads a CSV grid of 0/1 flags; the first row is the top.
    pub fn from_csv(text: &str, header: &MaskHeader) -> Result<Self> {
        let rows: Vec<Vec<bool>> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split(',')
                    .map(|c| match c.trim() {
                        "0" => Ok(false),
                        "1" => Ok(true),
                        other => Err(Error::Parse(format!("mask entry {other:?} is not 0 or 1"))),
                    })
                    .collect::<Result<Vec<bool>>>()
            })
            .collect::<Result<_>>()?;
        let ny = rows.len();
        let nx = rows.first().map_or(0, Vec::len);
        if ny == 0 || nx == 0 || rows.iter().any(|r| r.len() != nx) {
            return Err(Error::Parse("mask rows are empty or ragged".into()));
        }
        let mut inside = vec![false; nx * ny];
        for (row, flags) in rows.iter().enumerate() {
            for (i, &b) in flags.iter().enumerate() {
                inside[(ny - 1 - row) * nx + i] = b;
            }
        }
        Self::new(header.origin, header.h, nx, ny, inside)
    }

    /// Loads `path` (`.pgm` or `.csv`) with its JSON header at `header_path`.
    pub fn load(path: &Path, header_path: &Path) -> Result<Self> {
        let header_text = std::fs::read_to_string(header_path)
            .map_err(|e| Error::Parse(format!("{}: {e}", header_path.display())))?;
        let header: MaskHeader = serde_json::from_str(&header_text)
            .map_err(|e| Error::Parse(format!("{}: {e}", header_path.display())))?;
        let bytes =
            std::fs::read(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("pgm") => Self::from_pgm(&bytes, &header),
            Some("csv") => Self::from_csv(
                std::str::from_utf8(&bytes).map_err(|e| Error::Parse(e.to_string()))?,
                &header,
            ),
            _ => Err(Error::Parse(format!(
                "{}: expected a .pgm or .csv raster",
                path.display()
            ))),
        }
    }
}

fn parse_pgm(bytes: &[u8]) -> Result<(usize, usize, u32, Vec<u32>)> {
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Parse("truncated PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token()?;
    let num = |s: String| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::Parse(format!("bad PGM header field {s:?}")))
    };
    let nx = num(token()?)?;
    let ny = num(token()?)?;
    let maxval = num(token()?)? as u32;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Parse(format!("PGM maxval {maxval} out of range")));
    }
    let count = nx * ny;
    let pixels = match magic.as_str() {
        "P2" => {
            let mut px = Vec::with_capacity(count);
            for _ in 0..count {
                px.push(num(token()?)? as u32);
            }
            px
        }
        "P5" => {
            // Exactly one whitespace byte separates the header from the data.
            let start = pos + 1;
            let width = if maxval < 256 { 1 } else { 2 };
            let data = bytes
                .get(start..start + count * width)
                .ok_or_else(|| Error::Parse("truncated PGM raster".into()))?;
            if width == 1 {
                data.iter().map(|&b| b as u32).collect()
            } else {
                data.chunks(2)
                    .map(|c| ((c[0] as u32) << 8) | c[1] as u32)
                    .collect()
            }
        }
        other => return Err(Error::Parse(format!("unsupported PGM magic {other:?}"))),
    };
    Ok((nx, ny, maxval, pixels))
}
