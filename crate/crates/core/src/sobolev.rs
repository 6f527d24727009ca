//! Best `L^p` Sobolev constants on the two disc backgrounds: descent upper
//! bounds, the Stirling lower bound, the degenerate range `p < 2`, and the
//! series bound for `∫(e^u − 1)²`.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::hyperbolic::{
    dirichlet_energy, integrate_radial, weighted_lp_norm, ConformalFactor, GeodesicGrid, Grading,
    RadialProfile, DEFAULT_T_MAX,
};
use crate::linalg::{dot, tridiag_mul, TridiagLdl};
use crate::moser::{critical_sweep, ml_profile, MlParams};

/// `8πe`, the limit of `p·S_p`.
pub const EIGHT_PI_E: f64 = 8.0 * PI * E;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Background {
    EuclideanDisc,
    HyperbolicDisc,
}

impl Background {
    pub fn zeta(self) -> ConformalFactor {
        match self {
            Background::EuclideanDisc => ConformalFactor::euclidean(),
            Background::HyperbolicDisc => ConformalFactor::hyperbolic(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Background::EuclideanDisc => "euclidean",
            Background::HyperbolicDisc => "hyperbolic",
        }
    }
}

/// `∫|∇u|² / (∫|u|^p ζ dV_h)^{2/p}`.
pub fn rayleigh_quotient(u: &RadialProfile, p: f64, zeta: &ConformalFactor) -> Result<f64> {
    let norm = weighted_lp_norm(u, p, zeta)?;
    if norm == 0.0 {
        return Err(Error::InvalidArgument(
            "quotient of the zero profile".into(),
        ));
    }
    Ok(dirichlet_energy(u) / (norm * norm))
}

#[derive(Debug, Clone, Copy)]
pub struct SpOptions {
    pub max_iterations: usize,
    /// Stop once the first-order decrease `2(E⟨g, A⁻¹g⟩/P² − 1)` drops below this.
    pub tol: f64,
    pub grading: Grading,
    pub t_max: f64,
}

impl Default for SpOptions {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            tol: 1e-12,
            grading: Grading::default(),
            t_max: DEFAULT_T_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpEstimate {
    pub p: f64,
    pub upper: f64,
    pub lower: Option<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Quotient after each accepted step, starting with the initializer.
    pub history: Vec<f64>,
}

impl SpEstimate {
    pub fn flag(&self) -> &'static str {
        if self.converged {
            "converged"
        } else {
            "max-iterations"
        }
    }
}

/// Graded grid resolving the `M_l` initializer for exponent `p`.
pub fn default_sp_grid(p: f64, opts: &SpOptions) -> Result<GeodesicGrid> {
    MlParams::for_exponent(p)?.grid_with(opts.grading, opts.t_max)
}

struct Discrete {
    diag: Vec<f64>,
    off: Vec<f64>,
    mass: Vec<f64>,
    p: f64,
}

impl Discrete {
    fn new(grid: &GeodesicGrid, p: f64, zeta: &ConformalFactor) -> Result<Self> {
        let nodes = grid.nodes();
        let n = nodes.len() - 1;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for i in 0..n {
            let h = nodes[i + 1] - nodes[i];
            let c = 2.0 * PI * grid.cell_sinh_measure(i) / (h * h);
            diag[i] += c;
            if i + 1 < n {
                diag[i + 1] += c;
                off[i] = -c;
            }
        }
        let z = zeta.samples(grid)?;
        let mass = grid
            .hat_weights()
            .iter()
            .zip(&z)
            .take(n)
            .map(|(w, z)| 2.0 * PI * w * z)
            .collect();
        Ok(Self { diag, off, mass, p })
    }

    fn energy(&self, u: &[f64]) -> f64 {
        dot(u, &tridiag_mul(&self.diag, &self.off, u))
    }

    fn power_sum(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(&self.mass)
            .map(|(v, m)| m * v.abs().powf(self.p))
            .sum()
    }

    fn log_quotient(&self, u: &[f64]) -> f64 {
        self.energy(u).ln() - 2.0 / self.p * self.power_sum(u).ln()
    }
}

fn normalize_max(u: &mut [f64]) {
    let m = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        u.iter_mut().for_each(|v| *v /= m);
    }
}

/// Minimizes the quotient over zero-boundary profiles on `grid`, starting from
/// `M_l` with `R = 1`, `log(1/l) = p/4`.
///
/// Each step moves along the energy-inner-product gradient; the unit step is
/// the nonlinear inverse iteration `u ↦ A⁻¹(|u|^{p−2}u ζ)`. Armijo backtracking
/// keeps the quotient nonincreasing.
pub fn estimate_sp_upper(
    p: f64,
    background: Background,
    grid: &GeodesicGrid,
    opts: &SpOptions,
) -> Result<SpEstimate> {
    let init = ml_profile(&MlParams::for_exponent(p)?, grid)?;
    minimize_quotient(&init, p, &background.zeta(), opts)
}

/// Quotient descent from an arbitrary nonzero zero-boundary initial profile.
pub fn minimize_quotient(
    init: &RadialProfile,
    p: f64,
    zeta: &ConformalFactor,
    opts: &SpOptions,
) -> Result<SpEstimate> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "descent requires p ≥ 2, got {p}"
        )));
    }
    let grid = init.grid();
    let disc = Discrete::new(grid, p, zeta)?;
    let fact = TridiagLdl::new(&disc.diag, &disc.off)
        .ok_or_else(|| Error::InvalidGrid("stiffness matrix is not positive definite".into()))?;
    let n = grid.len() - 1;
    let mut u = init.values()[..n].to_vec();
    normalize_max(&mut u);
    if u.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidArgument("initial profile is zero".into()));
    }
    let mut f = disc.log_quotient(&u);
    let mut history = vec![f.exp()];
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        let e = disc.energy(&u);
        let pw = disc.power_sum(&u);
        let g: Vec<f64> = u
            .iter()
            .zip(&disc.mass)
            .map(|(v, m)| m * v.abs().powf(p - 2.0) * v)
            .collect();
        let y = fact.solve(&g);
        let decrease = 2.0 * (e * dot(&g, &y) / (pw * pw) - 1.0);
        residual = decrease.max(0.0);
        if residual < opts.tol {
            converged = true;
            break;
        }
        let scale = e / pw;
        let mut s = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let mut cand: Vec<f64> = u
                .iter()
                .zip(&y)
                .map(|(a, b)| (1.0 - s) * a + s * scale * b)
                .collect();
            normalize_max(&mut cand);
            let fc = disc.log_quotient(&cand);
            if fc.is_finite() && fc <= f - 1e-4 * s * residual {
                accepted = Some((cand, fc));
                break;
            }
            s *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((cand, fc)) => {
                let stalled = f - fc <= 1e-15 * f.abs();
                u = cand;
                f = fc;
                history.push(f.exp());
                if stalled {
                    converged = true;
                    break;
                }
            }
            None => {
                // No decrease left at working precision.
                converged = true;
                break;
            }
        }
    }
    Ok(SpEstimate {
        p,
        upper: f.exp(),
        lower: None,
        iterations,
        residual,
        converged,
        history,
    })
}

/// Lower bound on `S_{2p}` from an MT constant `C`:
/// `4π / (C^{1/p} (n!)^{1/p} (n+1)^{1−n/p})`, `n = ⌊p⌋`.
pub fn sp_lower_bound_from_mt(c_mt: f64, p: f64) -> Result<f64> {
    if !(c_mt > 0.0 && c_mt.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "MT constant {c_mt} must be positive"
        )));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "p = {p} must be at least 1"
        )));
    }
    let n = p.floor();
    let ln_fact = ln_gamma(n + 1.0);
    let ln_denominator = (c_mt.ln() + ln_fact) / p + (1.0 - n / p) * (n + 1.0).ln();
    Ok(4.0 * PI * (-ln_denominator).exp())
}

/// Interpolation exponent `n(n+1−p)/p` used by the bound above.
pub fn interpolation_exponent(p: f64) -> f64 {
    let n = p.floor();
    n * (n + 1.0 - p) / p
}

/// Largest critical functional at `α = 4π` over a Moser schedule.
pub fn measured_mt_sup(zeta: &ConformalFactor, eps: &[f64]) -> Result<f64> {
    let values = critical_sweep(4.0 * PI, eps, zeta, Grading::default())?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Runs [`estimate_sp_upper`] for each exponent. When an MT constant is
/// supplied, rows with `p ≥ 2` carry the lower bound for `S_p` (the bound for
/// `S_{2q}` with `q = p/2`).
pub fn asymptotic_sweep(
    p_list: &[f64],
    background: Background,
    mt_constant: Option<f64>,
    opts: &SpOptions,
) -> Result<Vec<SpEstimate>> {
    p_list
        .iter()
        .map(|&p| {
            let grid = default_sp_grid(p, opts)?;
            let mut est = estimate_sp_upper(p, background, &grid, opts)?;
            if let Some(c) = mt_constant {
                if p >= 2.0 {
                    est.lower = Some(sp_lower_bound_from_mt(c, p / 2.0)?);
                }
            }
            Ok(est)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateRow {
    pub delta: f64,
    /// `∫_{|x|≤1−δ} |u_p|^p dV_h` by quadrature.
    pub norm_pow: f64,
    /// The same integral in closed form, `−4π log(δ(2−δ))`.
    pub norm_pow_exact: f64,
    pub quotient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateWitness {
    pub p: f64,
    /// `∫|∇u_p|² = 2π/(2−p)`.
    pub energy: f64,
    pub rows: Vec<DegenerateRow>,
}

impl DegenerateWitness {
    /// Growth of the truncated `p`-th power between consecutive rows.
    pub fn increments(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| w[1].norm_pow - w[0].norm_pow)
            .collect()
    }
}

/// Quotients of `u_p = (1−|x|²)^{1/p}` on the hyperbolic disc truncated to
/// `|x| ≤ 1−δ`.
pub fn degenerate_sp_witness(p: f64, deltas: &[f64]) -> Result<DegenerateWitness> {
    if !(1.0..2.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "degenerate witness needs 1 ≤ p < 2, got {p}"
        )));
    }
    let energy = 2.0 * PI / (2.0 - p);
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidArgument(format!("δ = {delta} not in (0, 1)")));
        }
        let t_end = 2.0 * (1.0 - delta).atanh();
        let grid = GeodesicGrid::uniform(t_end, 4000)?;
        let carrier = RadialProfile::zero(grid);
        // |u_p|^p = 1 − r² = cosh(t/2)^{−2}.
        let norm_pow = integrate_radial(&carrier, &ConformalFactor::hyperbolic(), |_, t| {
            Ok((0.5 * t).cosh().powi(-2))
        })?;
        let norm_pow_exact = -4.0 * PI * (delta * (2.0 - delta)).ln();
        rows.push(DegenerateRow {
            delta,
            norm_pow,
            norm_pow_exact,
            quotient: energy / norm_pow.powf(2.0 / p),
        });
    }
    Ok(DegenerateWitness { p, energy, rows })
}

/// Values or lower bounds of `S_p` for integer `p ≥ 2`.
///
/// Explicit entries take precedence; other exponents fall back to the Stirling
/// bound for an MT constant when one is given.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpTable {
    explicit: BTreeMap<u32, f64>,
    mt_constant: Option<f64>,
}

impl SpTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_value(mut self, p: u32, s_p: f64) -> Self {
        self.explicit.insert(p, s_p);
        self
    }

    pub fn with_mt_constant(mut self, c: f64) -> Self {
        self.mt_constant = Some(c);
        self
    }

    pub fn get(&self, p: u32) -> Option<f64> {
        if let Some(&v) = self.explicit.get(&p) {
            return Some(v);
        }
        let c = self.mt_constant?;
        sp_lower_bound_from_mt(c, p as f64 / 2.0).ok()
    }
}

/// `Σ_{p≥2} x^p/p! = eˣ − 1 − x`.
pub fn exp_tail(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x2 * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)))
    } else {
        x.exp_m1() - x
    }
}

/// Bound on `∫(e^{2u} − 2u − 1) dV_g ≥ ∫(e^u − 1)² dV_g` for a zero-boundary
/// `u` with `∫|∇u|² = energy`:
///
/// `[Σ_{p≥2} (4·energy/8πδ)^p/p!]^{1/2} · [Σ_{p≥2} (8πδ/S_p)^p/p!]^{1/2}`.
pub fn mt_series_bound(energy: f64, delta: f64, table: &SpTable) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("δ = {delta} not in (0, 1)")));
    }
    if !(energy >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "energy {energy} is negative"
        )));
    }
    let first = exp_tail(4.0 * energy / (8.0 * PI * delta));
    if first == 0.0 {
        return Ok(0.0);
    }
    let mut second = 0.0;
    let mut p = 2u32;
    loop {
        let s_p = table
            .get(p)
            .ok_or_else(|| Error::SeriesDiverges(format!("no S_p value or bound for p = {p}")))?;
        if !(s_p > 0.0) {
            return Err(Error::SeriesDiverges(format!(
                "S_{p} = {s_p} is not positive"
            )));
        }
        let ln_term = p as f64 * (8.0 * PI * delta / s_p).ln() - ln_gamma(p as f64 + 1.0);
        let term = ln_term.exp();
        second += term;
        if term < 1e-16 * second.max(1e-300) || term < 1e-300 {
            break;
        }
        if p >= 4000 {
            let root = (ln_term / p as f64).exp();
            return Err(Error::SeriesDiverges(format!(
                "terms still {term:e} at p = {p}, p-th root {root}"
            )));
        }
        p += 1;
    }
    Ok((first * second).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse_opts() -> SpOptions {
        SpOptions {
            grading: Grading::coarse(),
            ..SpOptions::default()
        }
    }

    #[test]
    fn stirling_integer_case() {
        let b = sp_lower_bound_from_mt(1.0, 2.0).unwrap();
        assert!((b - 4.0 * PI / 2f64.sqrt()).abs() < 1e-12);
        assert!((b - 8.8858).abs() < 1e-4);
    }

    #[test]
    fn stirling_large_p_and_monotone_in_c() {
        let b = sp_lower_bound_from_mt(1.0, 200.0).unwrap();
        assert!(400.0 * b >= 0.9 * EIGHT_PI_E);
        assert!(
            sp_lower_bound_from_mt(10.0, 10.0).unwrap()
                < sp_lower_bound_from_mt(1.0, 10.0).unwrap()
        );
    }

    #[test]
    fn stirling_matches_interpolation_form() {
        // Interpolating the n and n+1 moments with weight α = n(n+1−p)/p.
        for &(c, p) in &[(2.0f64, 2.5f64), (5.0, 7.3), (1.5, 11.9), (3.0, 4.0)] {
            let n = p.floor();
            let a = interpolation_exponent(p);
            let ln_norm = a / n * (c.ln() + ln_gamma(n + 1.0))
                + (1.0 - a) / (n + 1.0) * (c.ln() + ln_gamma(n + 2.0));
            let expect = 4.0 * PI * (-ln_norm).exp();
            let got = sp_lower_bound_from_mt(c, p).unwrap();
            assert!((got - expect).abs() < 1e-12 * expect, "{got} vs {expect}");
        }
    }

    #[test]
    fn quotient_is_homogeneous() {
        let params = MlParams::for_exponent(8.0).unwrap();
        let g = params.grid_with(Grading::coarse(), DEFAULT_T_MAX).unwrap();
        let u = ml_profile(&params, &g).unwrap();
        let z = ConformalFactor::euclidean();
        let q1 = rayleigh_quotient(&u, 8.0, &z).unwrap();
        let q7 = rayleigh_quotient(&u.scaled(7.0), 8.0, &z).unwrap();
        assert!((q1 - q7).abs() < 1e-10 * q1);
    }

    #[test]
    fn s2_is_first_eigenvalue_of_the_disc() {
        let opts = coarse_opts();
        let g = default_sp_grid(2.0, &opts).unwrap();
        let est = estimate_sp_upper(2.0, Background::EuclideanDisc, &g, &opts).unwrap();
        assert!(est.converged);
        assert!(
            (est.upper / 5.783_185_962_946_784 - 1.0).abs() < 0.01,
            "{}",
            est.upper
        );
    }

    #[test]
    fn descent_is_monotone_and_lowers_initializer() {
        let opts = coarse_opts();
        let g = default_sp_grid(40.0, &opts).unwrap();
        let est = estimate_sp_upper(40.0, Background::EuclideanDisc, &g, &opts).unwrap();
        for w in est.history.windows(2) {
            assert!(w[1] <= w[0]);
        }
        let pu = 40.0 * est.upper;
        assert!((40.0..=69.0).contains(&pu), "{pu}");
    }

    #[test]
    fn degenerate_witness_p1() {
        let deltas: Vec<f64> = (1..=6).map(|k| 10f64.powi(-k)).collect();
        let w = degenerate_sp_witness(1.0, &deltas).unwrap();
        assert!((w.energy - 2.0 * PI).abs() < 1e-14);
        for r in &w.rows {
            assert!((r.norm_pow - r.norm_pow_exact).abs() < 1e-6 * r.norm_pow_exact);
        }
        let incs = w.increments();
        for (inc, r) in incs.iter().zip(w.rows.windows(2)) {
            let exact = r[1].norm_pow_exact - r[0].norm_pow_exact;
            assert!((inc - exact).abs() < 1e-5 * exact);
        }
        assert!((incs.last().unwrap() - 4.0 * PI * 10f64.ln()).abs() < 1e-3);
        assert!(w.rows.last().unwrap().quotient < 0.01);
        assert!(degenerate_sp_witness(2.0, &deltas).is_err());
    }

    #[test]
    fn series_bound_zero_energy() {
        let t = SpTable::new().with_value(2, 0.25).with_mt_constant(10.0);
        assert_eq!(mt_series_bound(0.0, 0.5, &t).unwrap(), 0.0);
    }

    #[test]
    fn series_bound_rejects_incomplete_table() {
        let t = SpTable::new().with_value(2, 0.25);
        assert!(matches!(
            mt_series_bound(1.0, 0.5, &t),
            Err(Error::SeriesDiverges(_))
        ));
    }

    #[test]
    fn series_bound_detects_inconsistent_table() {
        let mut t = SpTable::new();
        for p in 2..=5000 {
            t = t.with_value(p, 1e-3);
        }
        assert!(matches!(
            mt_series_bound(1.0, 0.5, &t),
            Err(Error::SeriesDiverges(_))
        ));
    }

    #[test]
    fn exp_tail_matches_series() {
        for x in [1e-5, 1e-2, 0.7, 3.0] {
            let s: f64 = (2..40)
                .map(|p| (x as f64).powi(p) / (ln_gamma(p as f64 + 1.0)).exp())
                .sum();
            assert!((exp_tail(x) - s).abs() < 1e-12 * s);
        }
    }
}
