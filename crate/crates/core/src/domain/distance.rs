use super::PlanarDomainMask;
use crate::error::{Error, Result};

/// Inradius estimate with its error band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inradius {
    pub value: f64,
    pub band: f64,
    /// Grid point realizing the maximal distance.
    pub center: [f64; 2],
}

/// Stand-in for an infinite squared distance.
const FAR: f64 = 1e20;

/// Squared 1-D distance transform (lower envelope of parabolas).
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..f.len() {
        let fq = f[q] + (q * q) as f64;
        let mut s;
        loop {
            let p = v[k];
            s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[k] && k > 0 {
                k -= 1;
            } else {
                break;
            }
        }
        if s <= z[k] {
            v[0] = q;
            z[1] = f64::INFINITY;
        } else {
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
        }
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Euclidean distance (in length units) from every grid point to the nearest
/// outside grid point; zero outside.
pub fn distance_to_complement(mask: &PlanarDomainMask) -> Vec<f64> {
    let (nx, ny) = mask.dims();
    let mut grid: Vec<f64> = mask
        .flags()
        .iter()
        .map(|&b| if b { FAR } else { 0.0 })
        .collect();
    let len = nx.max(ny);
    let mut f = vec![0.0; len];
    let mut out = vec![0.0; len];
    let mut v = vec![0usize; len];
    let mut z = vec![0.0; len + 1];
    for j in 0..ny {
        let row = &mut grid[j * nx..(j + 1) * nx];
        f[..nx].copy_from_slice(row);
        edt_1d(&f[..nx], &mut out[..nx], &mut v, &mut z);
        row.copy_from_slice(&out[..nx]);
    }
    for i in 0..nx {
        for j in 0..ny {
            f[j] = grid[j * nx + i];
        }
        edt_1d(&f[..ny], &mut out[..ny], &mut v, &mut z);
        for j in 0..ny {
            grid[j * nx + i] = out[j];
        }
    }
    let h = mask.h();
    grid.into_iter().map(|d2| d2.sqrt() * h).collect()
}

/// `ω(Ω)`: the largest distance to the complement, less half a cell for the
/// boundary lying between an inside and an outside grid point; accurate to `h`.
pub fn inradius(mask: &PlanarDomainMask) -> Result<Inradius> {
    if mask.interior_count() == 0 {
        return Err(Error::EmptyDomain);
    }
    let d = distance_to_complement(mask);
    let (idx, max) = d.iter().enumerate().fold(
        (0, 0.0f64),
        |(bi, bm), (i, &x)| if x > bm { (i, x) } else { (bi, bm) },
    );
    let (nx, _) = mask.dims();
    let h = mask.h();
    Ok(Inradius {
        value: max - 0.5 * h,
        band: h,
        center: mask.point(idx % nx, idx / nx),
    })
}

#[cfg(test)]
mod tests {
    use super::super::Shape;
    use super::*;

    fn brute(mask: &PlanarDomainMask) -> Vec<f64> {
        let (nx, ny) = mask.dims();
        let outside: Vec<(usize, usize)> = (0..ny)
            .flat_map(|j| (0..nx).map(move |i| (i, j)))
            .filter(|&(i, j)| !mask.at(i, j))
            .collect();
        (0..ny)
            .flat_map(|j| (0..nx).map(move |i| (i, j)))
            .map(|(i, j)| {
                outside
                    .iter()
                    .map(|&(a, b)| {
                        let dx = a as f64 - i as f64;
                        let dy = b as f64 - j as f64;
                        (dx * dx + dy * dy).sqrt() * mask.h()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn matches_brute_force() {
        let shapes = [
            Shape::Annulus {
                center: [0.3, -0.1],
                inner: 0.4,
                outer: 1.0,
            },
            Shape::Square {
                center: [0.0, 0.0],
                side: 1.3,
            },
        ];
        for s in shapes {
            let m = PlanarDomainMask::rasterize(s, 0.07).unwrap();
            let fast = distance_to_complement(&m);
            let slow = brute(&m);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn geometric_inradii() {
        let h = 1.0 / 256.0;
        let cases = [
            (
                Shape::Disc {
                    center: [0.0, 0.0],
                    radius: 1.0,
                },
                1.0,
            ),
            (
                Shape::Square {
                    center: [0.0, 0.0],
                    side: 2.0,
                },
                1.0,
            ),
            (
                Shape::Annulus {
                    center: [0.0, 0.0],
                    inner: 0.5,
                    outer: 1.0,
                },
                0.25,
            ),
        ];
        for (s, truth) in cases {
            let m = PlanarDomainMask::rasterize(s, h).unwrap();
            let w = inradius(&m).unwrap();
            assert!((w.value - truth).abs() <= w.band, "{s:?}: {}", w.value);
        }
    }
}
