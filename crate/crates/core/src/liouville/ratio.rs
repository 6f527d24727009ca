use super::convex::SolverReport;
use super::{residual, CurvatureData, CurvatureProblem, Discretization, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{dot, tridiag_mul, TridiagLdl};

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    /// Shifted solution `v* − ½ log ∫K₂(e^{2v*}−1)`, boundary included.
    pub report: SolverReport,
    /// Zero-boundary minimizer of `E_K`, boundary included.
    pub minimizer: Vec<f64>,
    /// `∫K₂(e^{2v*}−1) dV_g`.
    pub integral: f64,
    pub shift: f64,
    /// Seed amplitude that entered the feasible set.
    pub seed_amplitude: Option<f64>,
}

struct Pair<'a> {
    disc: Discretization,
    k1: &'a [f64],
    k2: &'a [f64],
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Pair<'_> {
    /// `∫K₂(e^{2v}−1) dV_g`.
    fn integral(&self, v: &[f64]) -> f64 {
        v.iter()
            .enumerate()
            .map(|(i, v)| self.k2[i] * self.disc.vol[i] * (2.0 * v).exp_m1())
            .sum()
    }

    /// `E_K(v)`, or `None` outside the feasible set.
    fn energy(&self, v: &[f64]) -> Option<f64> {
        let i = self.integral(v);
        if !(i > 0.0) || !i.is_finite() {
            return None;
        }
        let quad = dot(v, &tridiag_mul(&self.diag, &self.off, v));
        let lin: f64 = v
            .iter()
            .enumerate()
            .map(|(j, v)| self.k1[j] * v * self.disc.vol[j])
            .sum();
        Some(quad - 2.0 * lin - i.ln())
    }
}

/// `E_K(v) = ∫|∇v|² − 2∫K₁v dV_g − log ∫K₂(e^{2v}−1) dV_g` for a zero-boundary
/// profile (boundary included); `None` outside the feasible set.
pub fn ratio_energy(problem: &CurvatureProblem, v: &[f64]) -> Result<Option<f64>> {
    let (k1, k2) = pair_data(problem)?;
    let disc = Discretization::new(&problem.mesh, &problem.background);
    let (diag, off) = disc.stiffness();
    let n = disc.unknowns();
    let p = Pair {
        disc,
        k1,
        k2,
        diag,
        off,
    };
    Ok(p.energy(&v[..n]))
}

fn pair_data(problem: &CurvatureProblem) -> Result<(&[f64], &[f64])> {
    match &problem.data {
        CurvatureData::Pair { k1, k2 } => Ok((k1, k2)),
        _ => Err(Error::InvalidArgument(
            "ratio functional needs a (K₁, K₂) pair".into(),
        )),
    }
}

/// Minimizes `E_K` over the feasible set `{∫K₂(e^{2v}−1) > 0}` and shifts the
/// minimizer into a solution of `Δ_g v + K₁ + K₂ e^{2v} = 0`.
///
/// Without a feasible initial guess, bumps centred at the largest `K₂` with
/// amplitudes `2^{−4}, …, 2^4` are tried in turn.
pub fn solve_ratio_functional(
    problem: &CurvatureProblem,
    opts: &SolverOptions,
) -> Result<RatioReport> {
    let (k1, k2) = pair_data(problem)?;
    if problem.boundary_value != 0.0 {
        return Err(Error::InvalidArgument(
            "the ratio functional lives on zero-boundary profiles".into(),
        ));
    }
    let disc = Discretization::new(&problem.mesh, &problem.background);
    let (diag, off) = disc.stiffness();
    let n = disc.unknowns();
    let pair = Pair {
        disc,
        k1,
        k2,
        diag,
        off,
    };
    let x = problem.mesh.coords();

    let mut seed_amplitude = None;
    let mut v = match &opts.initial {
        Some(init) if init.len() >= n && pair.energy(&init[..n]).is_some() => init[..n].to_vec(),
        _ => {
            let centre = (0..n).max_by(|&a, &b| k2[a].total_cmp(&k2[b])).unwrap_or(0);
            let width = 0.25 * (x[n] - x[0]);
            let bump: Vec<f64> = x[..n]
                .iter()
                .map(|&s| {
                    let z = (s - x[centre]) / width;
                    (1.0 - z * z).max(0.0)
                })
                .collect();
            let mut found = None;
            for e in -4..=4 {
                let a = 2f64.powi(e);
                let cand: Vec<f64> = bump.iter().map(|b| a * b).collect();
                if pair.energy(&cand).is_some() {
                    found = Some((a, cand));
                    break;
                }
            }
            let (a, cand) = found.ok_or(Error::FeasibleSetEmpty { attempts: 9 })?;
            seed_amplitude = Some(a);
            cand
        }
    };

    let mut energy = pair.energy(&v).expect("iterate is feasible");
    let mut history = vec![energy];
    let mut changes = Vec::new();
    let mut min_pivot = f64::INFINITY;
    let mut iterations = 0;
    let mut grad_norm;
    let mut stalled = false;
    let mut small_step = false;
    let base = TridiagLdl::new(
        &pair.diag.iter().map(|d| 2.0 * d).collect::<Vec<_>>(),
        &pair.off.iter().map(|o| 2.0 * o).collect::<Vec<_>>(),
    )
    .ok_or_else(|| Error::InvalidGrid("stiffness matrix is not positive definite".into()))?;
    loop {
        iterations += 1;
        let integral = pair.integral(&v);
        let e2v: Vec<f64> = v.iter().map(|v| (2.0 * v).exp()).collect();
        let q: Vec<f64> = (0..n)
            .map(|i| 2.0 * pair.disc.vol[i] * k2[i] * e2v[i] / integral)
            .collect();
        let av = tridiag_mul(&pair.diag, &pair.off, &v);
        let grad: Vec<f64> = (0..n)
            .map(|i| 2.0 * av[i] - 2.0 * pair.disc.vol[i] * k1[i] - q[i])
            .collect();
        grad_norm = dot(&grad, &grad).sqrt();
        if grad_norm <= opts.tol || small_step || iterations > opts.max_iterations {
            break;
        }
        let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
        // Hessian = 2A − diag(2q) + q qᵀ, solved by Sherman–Morrison.
        let tdiag: Vec<f64> = (0..n).map(|i| 2.0 * pair.diag[i] - 2.0 * q[i]).collect();
        let toff: Vec<f64> = pair.off.iter().map(|o| 2.0 * o).collect();
        let mut dir = None;
        if let Some(t) = TridiagLdl::new(&tdiag, &toff) {
            min_pivot = t.pivots().iter().fold(min_pivot, |a, &b| a.min(b));
            let xs = t.solve(&neg);
            let z = t.solve(&q);
            let factor = dot(&q, &xs) / (1.0 + dot(&q, &z));
            let d: Vec<f64> = xs.iter().zip(&z).map(|(x, z)| x - z * factor).collect();
            if dot(&grad, &d) < 0.0 {
                dir = Some(d);
            }
        }
        let d = dir.unwrap_or_else(|| base.solve(&neg));
        let slope = dot(&grad, &d);
        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = v.iter().zip(&d).map(|(v, d)| v + s * d).collect();
            if cand.iter().all(|c| 2.0 * c <= 709.0) {
                if let Some(ec) = pair.energy(&cand) {
                    if ec < energy && ec - energy <= 1e-4 * s * slope {
                        let scale = v.iter().fold(1.0f64, |a, v| a.max(v.abs()));
                        let size = d.iter().fold(0.0f64, |a, d| a.max((s * d).abs()));
                        small_step = size <= 64.0 * f64::EPSILON * scale;
                        v = cand;
                        changes.push(ec - energy);
                        energy = ec;
                        history.push(ec);
                        accepted = true;
                        break;
                    }
                }
            }
            s *= 0.5;
        }
        if !accepted {
            stalled = true;
            break;
        }
    }
    let integral = pair.integral(&v);
    let shift = -0.5 * integral.ln();
    let mut minimizer = v.clone();
    minimizer.push(0.0);
    let solution: Vec<f64> = minimizer.iter().map(|v| v + shift).collect();
    let res = residual(&solution, problem)?;
    let converged = (grad_norm <= opts.tol || small_step || stalled)
        && iterations <= opts.max_iterations
        && res.norm <= opts.residual_tol;
    Ok(RatioReport {
        report: SolverReport {
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
        },
        minimizer,
        integral,
        shift,
        seed_amplitude,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{Background, RadialMesh};
    use super::*;

    fn pair_problem(k2: f64) -> CurvatureProblem {
        let mesh = RadialMesh::euclidean_uniform(1.0, 1024).unwrap();
        let n = mesh.len();
        CurvatureProblem::new(
            mesh,
            Background::Euclidean,
            CurvatureData::Pair {
                k1: vec![0.0; n],
                k2: vec![k2; n],
            },
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn shifted_minimizer_solves_equation() {
        let p = pair_problem(1.0);
        let rep = solve_ratio_functional(&p, &SolverOptions::default()).unwrap();
        assert!(
            rep.report.residual_norm <= 1e-5,
            "{}",
            rep.report.residual_norm
        );
        assert!(rep.integral > 0.0);
        assert_eq!(*rep.minimizer.last().unwrap(), 0.0);
        let last = *rep.report.solution.last().unwrap();
        assert!((last - rep.shift).abs() < 1e-15);
        for w in rep.report.energy_history.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn nonpositive_k2_has_no_seed() {
        let p = pair_problem(-1.0);
        assert!(matches!(
            solve_ratio_functional(&p, &SolverOptions::default()),
            Err(Error::FeasibleSetEmpty { .. })
        ));
    }

    #[test]
    fn energy_is_evaluated_on_zero_boundary_profiles() {
        let p = pair_problem(1.0);
        let rep = solve_ratio_functional(&p, &SolverOptions::default()).unwrap();
        let e = ratio_energy(&p, &rep.minimizer).unwrap().unwrap();
        assert!((e - rep.report.energy).abs() < 1e-9 * e.abs().max(1.0));
        let nonzero = CurvatureProblem {
            boundary_value: 0.3,
            ..p
        };
        assert!(solve_ratio_functional(&nonzero, &SolverOptions::default()).is_err());
    }
}
