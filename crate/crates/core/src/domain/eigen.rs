use super::PlanarDomainMask;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Lambda1Options {
    /// Relative change of the eigenvalue estimate at which iteration stops.
    pub tol: f64,
    pub max_iterations: usize,
    /// Relative residual for each inner linear solve.
    pub solve_tol: f64,
    pub max_solve_iterations: usize,
}

impl Default for Lambda1Options {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iterations: 500,
            solve_tol: 1e-10,
            max_solve_iterations: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lambda1Report {
    pub h: f64,
    pub lambda_h: f64,
    pub lambda_half: f64,
    /// `(4 λ_{h/2} − λ_h)/3`; meaningful only for boundaries aligned with the grid.
    pub richardson: f64,
    pub iterations: [usize; 2],
}

/// One grid of the multigrid hierarchy; values live on the full rectangle and
/// vanish at outside points.
struct Level {
    nx: usize,
    ny: usize,
    h2: f64,
    inside: Vec<bool>,
}

impl Level {
    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let nx = self.nx;
        for (p, o) in out.iter_mut().enumerate() {
            *o = if self.inside[p] {
                (4.0 * u[p] - u[p - 1] - u[p + 1] - u[p - nx] - u[p + nx]) / self.h2
            } else {
                0.0
            };
        }
    }

    fn relax(&self, u: &mut [f64], f: &[f64], p: usize) {
        let nx = self.nx;
        u[p] = 0.25 * (self.h2 * f[p] + u[p - 1] + u[p + 1] + u[p - nx] + u[p + nx]);
    }

    fn forward(&self, u: &mut [f64], f: &[f64]) {
        for p in 0..u.len() {
            if self.inside[p] {
                self.relax(u, f, p);
            }
        }
    }

    fn backward(&self, u: &mut [f64], f: &[f64]) {
        for p in (0..u.len()).rev() {
            if self.inside[p] {
                self.relax(u, f, p);
            }
        }
    }

    /// Coarse grid: point `(I, J)` sits at fine `(2I, 2J)`; the border stays outside.
    fn coarsen(&self) -> Option<Level> {
        let nx = (self.nx - 1) / 2 + 1;
        let ny = (self.ny - 1) / 2 + 1;
        if nx < 5 || ny < 5 {
            return None;
        }
        let mut inside = vec![false; nx * ny];
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                inside[j * nx + i] = self.inside[2 * j * self.nx + 2 * i];
            }
        }
        if !inside.iter().any(|&b| b) {
            return None;
        }
        Some(Level {
            nx,
            ny,
            h2: 4.0 * self.h2,
            inside,
        })
    }
}

/// Fine-to-coarse weight of fine offset `d` along one axis.
fn weight(d: isize) -> f64 {
    match d {
        0 => 1.0,
        -1 | 1 => 0.5,
        _ => 0.0,
    }
}

/// Symmetric V-cycle preconditioner: forward Gauss–Seidel before the coarse
/// correction, backward after, bilinear prolongation and `R = Pᵀ/4`.
struct Multigrid {
    levels: Vec<Level>,
    sweeps: usize,
    coarse_sweeps: usize,
}

impl Multigrid {
    fn new(finest: Level) -> Self {
        let mut levels = vec![finest];
        while let Some(c) = levels.last().unwrap().coarsen() {
            levels.push(c);
        }
        Self {
            levels,
            sweeps: 2,
            coarse_sweeps: 30,
        }
    }

    fn vcycle(&self, l: usize, f: &[f64]) -> Vec<f64> {
        let lev = &self.levels[l];
        let mut u = vec![0.0; f.len()];
        if l + 1 == self.levels.len() {
            for _ in 0..self.coarse_sweeps {
                lev.forward(&mut u, f);
            }
            for _ in 0..self.coarse_sweeps {
                lev.backward(&mut u, f);
            }
            return u;
        }
        for _ in 0..self.sweeps {
            lev.forward(&mut u, f);
        }
        let mut r = vec![0.0; f.len()];
        lev.apply(&u, &mut r);
        for (r, f) in r.iter_mut().zip(f) {
            *r = f - *r;
        }
        let coarse = &self.levels[l + 1];
        let mut rc = vec![0.0; coarse.nx * coarse.ny];
        for jc in 1..coarse.ny - 1 {
            for ic in 1..coarse.nx - 1 {
                let pc = jc * coarse.nx + ic;
                if !coarse.inside[pc] {
                    continue;
                }
                let mut s = 0.0;
                for dj in -1isize..=1 {
                    for di in -1isize..=1 {
                        let q = ((2 * jc) as isize + dj) as usize * lev.nx
                            + ((2 * ic) as isize + di) as usize;
                        s += weight(di) * weight(dj) * r[q];
                    }
                }
                rc[pc] = 0.25 * s;
            }
        }
        let ec = self.vcycle(l + 1, &rc);
        for j in 0..lev.ny {
            for i in 0..lev.nx {
                let p = j * lev.nx + i;
                if !lev.inside[p] {
                    continue;
                }
                let (i0, j0) = (i / 2, j / 2);
                let (i1, j1) = ((i + 1) / 2, (j + 1) / 2);
                let at = |a: usize, b: usize| {
                    if a < coarse.nx && b < coarse.ny {
                        ec[b * coarse.nx + a]
                    } else {
                        0.0
                    }
                };
                u[p] += 0.25 * (at(i0, j0) + at(i1, j0) + at(i0, j1) + at(i1, j1));
            }
        }
        for _ in 0..self.sweeps {
            lev.backward(&mut u, f);
        }
        u
    }

    /// Preconditioned conjugate gradients for `A x = b`, warm-started at `x`.
    fn solve(&self, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<usize> {
        let a = &self.levels[0];
        let n = b.len();
        let mut r = vec![0.0; n];
        a.apply(x, &mut r);
        for (r, b) in r.iter_mut().zip(b) {
            *r = b - *r;
        }
        let bnorm = dot(b, b).sqrt();
        let target = tol * bnorm;
        let mut z = self.vcycle(0, &r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        for it in 0..max_iter {
            let rnorm = dot(&r, &r).sqrt();
            if rnorm <= target {
                return Ok(it);
            }
            a.apply(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            z = self.vcycle(0, &r);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        let rnorm = dot(&r, &r).sqrt();
        if rnorm <= target {
            Ok(max_iter)
        } else {
            Err(Error::IterationStall {
                iterations: max_iter,
                change: rnorm / bnorm,
            })
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

/// Smallest eigenvalue of the 5-point Dirichlet Laplacian on the mask, by
/// inverse power iteration with multigrid-preconditioned CG inner solves.
/// Returns the eigenvalue and the number of outer iterations.
pub fn lambda1_single(mask: &PlanarDomainMask, opts: &Lambda1Options) -> Result<(f64, usize)> {
    let (nx, ny) = mask.dims();
    let h = mask.h();
    let level = Level {
        nx,
        ny,
        h2: h * h,
        inside: mask.flags().to_vec(),
    };
    let mg = Multigrid::new(level);
    let mut u: Vec<f64> = mask
        .flags()
        .iter()
        .map(|&b| if b { 1.0 } else { 0.0 })
        .collect();
    let mut au = vec![0.0; u.len()];
    mg.levels[0].apply(&u, &mut au);
    let mut lambda = dot(&u, &au) / dot(&u, &u);
    let mut change = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let mut x: Vec<f64> = u.iter().map(|u| u / lambda).collect();
        mg.solve(&u, &mut x, opts.solve_tol, opts.max_solve_iterations)?;
        // A x ≈ u, so xᵀAx/xᵀx ≈ xᵀu/xᵀx.
        let next = dot(&x, &u) / dot(&x, &x);
        change = ((next - lambda) / next).abs();
        lambda = next;
        let norm = dot(&x, &x).sqrt();
        u = x.into_iter().map(|x| x / norm).collect();
        if change <= opts.tol {
            return Ok((lambda, it));
        }
    }
    Err(Error::IterationStall {
        iterations: opts.max_iterations,
        change,
    })
}

/// `λ₁` on the mask and on its refinement, with the Richardson combination.
pub fn lambda1_fd(mask: &PlanarDomainMask, opts: &Lambda1Options) -> Result<Lambda1Report> {
    let (lh, ih) = lambda1_single(mask, opts)?;
    let fine = mask.refine()?;
    let (lf, ifine) = lambda1_single(&fine, opts)?;
    Ok(Lambda1Report {
        h: mask.h(),
        lambda_h: lh,
        lambda_half: lf,
        richardson: (4.0 * lf - lh) / 3.0,
        iterations: [ih, ifine],
    })
}

#[cfg(test)]
mod tests {
    use super::super::Shape;
    use super::*;
    use std::f64::consts::PI;

    fn disc(radius: f64, h: f64) -> PlanarDomainMask {
        PlanarDomainMask::rasterize(
            Shape::Disc {
                center: [0.0, 0.0],
                radius,
            },
            h,
        )
        .unwrap()
    }

    #[test]
    fn square_matches_discrete_closed_form() {
        let h = 1.0 / 32.0;
        let m = PlanarDomainMask::rasterize(
            Shape::Square {
                center: [0.0, 0.0],
                side: 1.0,
            },
            h,
        )
        .unwrap();
        let (l, _) = lambda1_single(&m, &Lambda1Options::default()).unwrap();
        let exact = 8.0 / (h * h) * (PI * h / 2.0).sin().powi(2);
        assert!((l - exact).abs() < 1e-7 * exact, "{l} vs {exact}");
    }

    #[test]
    fn scaling_and_inclusion() {
        let opts = Lambda1Options::default();
        let h = 1.0 / 48.0;
        let (l1, _) = lambda1_single(&disc(1.0, h), &opts).unwrap();
        let (l2, _) = lambda1_single(&disc(2.0, h), &opts).unwrap();
        assert!((l1 / 4.0 - l2).abs() < 0.01 * l2, "{l1} {l2}");
        let (small, _) = lambda1_single(&disc(0.8, h), &opts).unwrap();
        assert!(small > l1);
        assert!((l1 - 5.78319).abs() < 0.03 * 5.78319);
    }

    #[test]
    fn richardson_pair_on_square() {
        let m = PlanarDomainMask::rasterize(
            Shape::Square {
                center: [0.0, 0.0],
                side: 1.0,
            },
            1.0 / 16.0,
        )
        .unwrap();
        let r = lambda1_fd(&m, &Lambda1Options::default()).unwrap();
        let exact = 2.0 * PI * PI;
        assert!(r.lambda_half > r.lambda_h);
        assert!((r.richardson - exact).abs() < (r.lambda_half - exact).abs());
    }

    #[test]
    fn stalls_when_starved() {
        let opts = Lambda1Options {
            max_iterations: 1,
            ..Lambda1Options::default()
        };
        assert!(matches!(
            lambda1_single(&disc(1.0, 0.1), &opts),
            Err(Error::IterationStall { .. })
        ));
    }
}
