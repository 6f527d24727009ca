use super::{checked_exp2, residual, CurvatureProblem, Discretization, RadialMesh};
use crate::error::{Error, Result};
use crate::linalg::{dot, tridiag_mul, TridiagLdl};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Euclidean norm of the discrete gradient.
    pub tol: f64,
    /// `L²(dV_g)` norm of the strong-form defect required for convergence.
    pub residual_tol: f64,
    pub max_iterations: usize,
    /// Starting profile on all nodes; the boundary entry is ignored.
    pub initial: Option<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            residual_tol: 1e-6,
            max_iterations: 200,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub mesh: RadialMesh,
    /// Solution at every node, boundary included.
    pub solution: Vec<f64>,
    pub energy: f64,
    pub gradient_norm: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every accepted step, starting with the initial guess.
    pub energy_history: Vec<f64>,
    /// Objective change of every accepted step, evaluated without
    /// cancellation; all strictly negative.
    pub step_changes: Vec<f64>,
    /// Every Newton matrix factored with strictly positive pivots.
    pub hessian_positive: bool,
    pub min_pivot: f64,
}

/// Lifted split data: zero boundary values, `K' = K e^{2c}`, `H' = K' − K_g`.
struct Lifted {
    disc: Discretization,
    k: Vec<f64>,
    h: Vec<f64>,
}

fn lift(problem: &CurvatureProblem) -> Result<Lifted> {
    let k = problem
        .curvature()
        .ok_or_else(|| Error::InvalidArgument("convex solver needs a single curvature".into()))?;
    let radii = problem.mesh.radii();
    if let Some(i) = k.iter().position(|&k| k > 0.0) {
        return Err(Error::NonConvex {
            r: radii[i],
            k: k[i],
        });
    }
    let disc = Discretization::new(&problem.mesh, &problem.background);
    let scale = checked_exp2(problem.boundary_value, radii[radii.len() - 1])?;
    let n = disc.unknowns();
    let k: Vec<f64> = k[..n].iter().map(|k| k * scale).collect();
    let h = k.iter().zip(&disc.kg).map(|(k, kg)| k - kg).collect();
    Ok(Lifted { disc, k, h })
}

/// `∫K²(1−|x|²)² dx` on a euclidean background, `∫H² dV_g` otherwise.
pub fn coercivity_constant(problem: &CurvatureProblem) -> Result<f64> {
    Ok(coercivity_parts(problem)?.iter().sum::<f64>().sqrt())
}

fn coercivity_parts(problem: &CurvatureProblem) -> Result<Vec<f64>> {
    let k = problem
        .curvature()
        .ok_or_else(|| Error::InvalidArgument("coercivity needs a single curvature".into()))?;
    let disc = Discretization::new(&problem.mesh, &problem.background);
    let radii = problem.mesh.radii();
    Ok((0..disc.unknowns())
        .map(|i| match problem.background {
            super::Background::Euclidean => {
                let s = 1.0 - radii[i] * radii[i];
                k[i] * k[i] * s * s * disc.vol[i]
            }
            _ => {
                let h = k[i] - disc.kg[i];
                h * h * disc.vol[i]
            }
        })
        .collect())
}

/// Geodesic radius beyond which the divergence heuristic is applied.
const DIVERGENCE_PROBE_EXTENT: f64 = 10.0;

fn check_coercive(problem: &CurvatureProblem) -> Result<()> {
    let parts = coercivity_parts(problem)?;
    let total: f64 = parts.iter().sum();
    if !total.is_finite() {
        return Err(Error::NotCoercive(
            "coercivity integral is not finite".into(),
        ));
    }
    // Truncated discs are coercive by Poincaré; concentration of the integral
    // only signals divergence on meshes reaching towards the ideal boundary.
    let radii = problem.mesh.radii();
    let r_max = radii[radii.len() - 1];
    if r_max < 1.0 && 2.0 * r_max.atanh() < DIVERGENCE_PROBE_EXTENT {
        return Ok(());
    }
    let x = problem.mesh.coords();
    let cut = x[0] + 0.9 * (x[x.len() - 1] - x[0]);
    let outer: f64 = parts
        .iter()
        .zip(x)
        .filter(|(_, &x)| x >= cut)
        .map(|(p, _)| p)
        .sum();
    if total > 0.0 && outer > 0.5 * total {
        return Err(Error::NotCoercive(format!(
            "{:.1}% of the coercivity integral sits in the outer tenth of the mesh",
            100.0 * outer / total
        )));
    }
    Ok(())
}

/// `½∫|∇w|² − ∫H'w dV_g − ½∫K'(e^{2w}−2w−1) dV_g` for the lifted unknowns.
fn lifted_energy(l: &Lifted, diag: &[f64], off: &[f64], w: &[f64]) -> f64 {
    let quad = 0.5 * dot(w, &tridiag_mul(diag, off, w));
    let lin: f64 = w
        .iter()
        .zip(&l.h)
        .zip(&l.disc.vol)
        .map(|((w, h), v)| h * w * v)
        .sum();
    let nl: f64 = w
        .iter()
        .zip(&l.k)
        .zip(&l.disc.vol)
        .map(|((w, k), v)| k * v * ((2.0 * w).exp_m1() - 2.0 * w))
        .sum();
    quad - lin - 0.5 * nl
}

/// `J(w + d) − J(w)` without cancellation.
fn energy_change(l: &Lifted, diag: &[f64], off: &[f64], w: &[f64], d: &[f64]) -> f64 {
    let ad = tridiag_mul(diag, off, d);
    let quad = dot(w, &ad) + 0.5 * dot(d, &ad);
    let mut lin = 0.0;
    let mut nl = 0.0;
    for i in 0..w.len() {
        lin += l.h[i] * d[i] * l.disc.vol[i];
        nl += l.k[i] * l.disc.vol[i] * ((2.0 * w[i]).exp() * (2.0 * d[i]).exp_m1() - 2.0 * d[i]);
    }
    quad - lin - 0.5 * nl
}

/// Value of the convex functional at a profile (boundary included) whose
/// boundary value matches the problem's.
pub fn convex_energy(problem: &CurvatureProblem, v: &[f64]) -> Result<f64> {
    let l = lift(problem)?;
    let (diag, off) = l.disc.stiffness();
    let c = problem.boundary_value;
    let w: Vec<f64> = v[..l.disc.unknowns()].iter().map(|v| v - c).collect();
    Ok(lifted_energy(&l, &diag, &off, &w))
}

/// Damped Newton minimization of the convex functional for `K ≤ 0`.
///
/// Constant boundary data `c` is lifted into `K e^{2c}` with zero boundary
/// values, and added back to the minimizer.
pub fn solve_dirichlet_convex(
    problem: &CurvatureProblem,
    opts: &SolverOptions,
) -> Result<SolverReport> {
    let l = lift(problem)?;
    check_coercive(problem)?;
    let (diag, off) = l.disc.stiffness();
    let n = l.disc.unknowns();
    let c = problem.boundary_value;
    let x = problem.mesh.coords();
    let mut w = match &opts.initial {
        Some(init) => {
            if init.len() != n + 1 && init.len() != n {
                return Err(Error::GridMismatch(format!(
                    "initial guess has {} values for {} nodes",
                    init.len(),
                    n + 1
                )));
            }
            init[..n].iter().map(|v| v - c).collect()
        }
        None => vec![0.0; n],
    };
    let mut energy = lifted_energy(&l, &diag, &off, &w);
    let mut history = vec![energy];
    let mut changes = Vec::new();
    let mut min_pivot = f64::INFINITY;
    let mut iterations = 0;
    let mut grad_norm;
    let mut small_step = false;
    let mut stalled = false;
    loop {
        iterations += 1;
        let mut e2w = Vec::with_capacity(n);
        for i in 0..n {
            e2w.push(checked_exp2(w[i], x[i])?);
        }
        let aw = tridiag_mul(&diag, &off, &w);
        let grad: Vec<f64> = (0..n)
            .map(|i| aw[i] - l.disc.vol[i] * (l.h[i] + l.k[i] * (e2w[i] - 1.0)))
            .collect();
        grad_norm = dot(&grad, &grad).sqrt();
        if grad_norm <= opts.tol || small_step || iterations > opts.max_iterations {
            break;
        }
        let hdiag: Vec<f64> = (0..n)
            .map(|i| diag[i] - 2.0 * l.disc.vol[i] * l.k[i] * e2w[i])
            .collect();
        let fact = match TridiagLdl::new(&hdiag, &off) {
            Some(f) => f,
            None => {
                let i = (0..n)
                    .min_by(|&a, &b| hdiag[a].total_cmp(&hdiag[b]))
                    .unwrap_or(0);
                return Err(Error::NonConvex {
                    r: problem.mesh.radii()[i],
                    k: l.k[i],
                });
            }
        };
        min_pivot = fact.pivots().iter().fold(min_pivot, |a, &b| a.min(b));
        let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
        let d = fact.solve(&neg);
        let slope = dot(&grad, &d);
        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let step: Vec<f64> = d.iter().map(|d| s * d).collect();
            if w.iter().zip(&step).any(|(w, d)| 2.0 * (w + d) > 709.0) {
                s *= 0.5;
                continue;
            }
            let change = energy_change(&l, &diag, &off, &w, &step);
            if change < 0.0 && change <= 1e-4 * s * slope {
                let scale = w.iter().fold(1.0f64, |a, v| a.max(v.abs()));
                let size = step.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                small_step = size <= 64.0 * f64::EPSILON * scale;
                for (w, d) in w.iter_mut().zip(&step) {
                    *w += d;
                }
                energy += change;
                history.push(energy);
                changes.push(change);
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            // Objective flat at working precision.
            stalled = true;
            break;
        }
    }
    let mut solution: Vec<f64> = w.iter().map(|w| w + c).collect();
    solution.push(c);
    let res = residual(&solution, problem)?;
    let converged = (grad_norm <= opts.tol || small_step || stalled)
        && iterations <= opts.max_iterations
        && res.norm <= opts.residual_tol;
    Ok(SolverReport {
        mesh: problem.mesh.clone(),
        solution,
        energy,
        gradient_norm: grad_norm,
        residual_norm: res.norm,
        iterations,
        converged,
        energy_history: history,
        step_changes: changes,
        hessian_positive: min_pivot > 0.0,
        min_pivot,
    })
}
