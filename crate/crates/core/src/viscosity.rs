//! The vanishing-viscosity sequence.
//!
//! For each k in the schedule the energy
//!
//! ```text
//!     E_k(u) = int  w(x) f(u') + eps_k (1 + u'^2) dx,    eps_k = 1/(2 k^2 A_k)
//! ```
//!
//! is strictly convex and coercive on the Dirichlet class, so it has a
//! unique discrete minimizer. Two independent solvers compute it:
//!
//! - `solve_shooting` exploits the 1D first integral: stationarity means
//!   the flux q = w f'(u') + 2 eps u' is a single constant C, so the
//!   solve reduces to a scalar root-find in C with a monotone inner
//!   inversion per cell;
//! - `solve_newton` minimizes the discrete energy directly by damped
//!   Newton with a tridiagonal Hessian, from any atom-free initial guess.
//!
//! Shooting output is canonical; Newton is the cross-check. Per-state
//! diagnostics (flux constancy, Euler-Lagrange residual against a test
//! bank, energies, gradient norms) land in `ViscosityReport`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::bv_model::{relaxed_energy, BVFunction1D, EnergyBreakdown, Grid1D, Interval};
use crate::integrand::NonAutonomousIntegrand;
#[cfg_attr(test, allow(unused_imports))] // std's inherent methods shadow it under test
use crate::math::F64Ext;

/// Default tolerance on the flux residual.
pub const DEFAULT_NEWTON_TOL: f64 = 1e-12;
/// Default iteration cap for the damped Newton minimizer.
pub const DEFAULT_NEWTON_MAX_ITER: usize = 100;

/// Which Dirichlet integral feeds A_k = 1 + int (1 + |v'|^2).
///
/// `AffineCompetitor` evaluates it once on the affine interpolant of the
/// boundary data, giving eps_k = 1/(2 k^2 A) with A constant. Feeding
/// back the previous iterate (`PreviousIterate`) makes A_k explode like
/// a power of eps_{k-1}^{-1} once gradients concentrate, which crushes
/// eps_k below the scale any fixed grid can resolve within a few steps;
/// the affine surrogate keeps the eps_k ladder on a 1/k^2 pace so the
/// concentration process stays observable across the whole schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AkSurrogate {
    AffineCompetitor,
    PreviousIterate,
}

/// Configuration of a vanishing-viscosity run.
#[derive(Clone, Debug)]
pub struct ViscosityConfig {
    pub k_max: u32,
    /// strictly increasing; default dyadic 1, 2, 4, ..., k_max
    pub k_schedule: Vec<u32>,
    pub grid: Grid1D,
    /// Dirichlet data (y1, y2)
    pub bc: (f64, f64),
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub a_surrogate: AkSurrogate,
    /// exponents for the per-state L^p gradient norms
    pub lp_probe: Vec<f64>,
    /// cross-check every state against the independent Newton minimizer
    pub verify_with_newton: bool,
}

impl ViscosityConfig {
    pub fn new(grid: Grid1D, bc: (f64, f64), k_max: u32) -> Self {
        Self {
            k_max,
            k_schedule: dyadic_schedule(k_max),
            grid,
            bc,
            newton_tol: DEFAULT_NEWTON_TOL,
            newton_max_iter: DEFAULT_NEWTON_MAX_ITER,
            a_surrogate: AkSurrogate::AffineCompetitor,
            lp_probe: vec![1.0, 1.05, 1.2, 2.0],
            verify_with_newton: true,
        }
    }
}

/// 1, 2, 4, ..., with k_max appended if it is not itself a power of two.
pub fn dyadic_schedule(k_max: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut k = 1u32;
    while k <= k_max {
        out.push(k);
        k = k.saturating_mul(2);
    }
    if *out.last().unwrap_or(&0) != k_max {
        out.push(k_max);
    }
    out
}

/// Per-state diagnostics.
#[derive(Clone, Debug)]
pub struct ViscosityReport {
    /// max_i |q_i - mean(q)| of the discrete flux
    pub flux_residual: f64,
    /// normalized Euler-Lagrange residual against the test bank
    pub el_residual: f64,
    /// relaxed energy of the state under the *true* integrand (eps = 0)
    pub energy: EnergyBreakdown,
    pub gradient_linf: f64,
    /// (p, ||u'||_{L^p}) pairs over the full domain
    pub lp_norms: Vec<(f64, f64)>,
    /// L^inf distance between the shooting and Newton solutions
    pub newton_linf_dist: f64,
}

/// One step of the sequence.
#[derive(Clone, Debug)]
pub struct ViscosityState {
    pub k: u32,
    pub a_k: f64,
    pub eps_k: f64,
    pub u: BVFunction1D,
    pub flux_c: f64,
    pub report: ViscosityReport,
}

#[derive(Debug)]
pub enum SolverError {
    /// bracket expansion for the flux constant ran away (eps <= 0 misuse)
    Bracket { eps: f64 },
    /// damped Newton failed to reach tolerance; last iterate attached
    NewtonDivergence { iterations: usize, residual: f64, last: Box<BVFunction1D> },
    /// initial guess carries atoms or misses the boundary data
    BadInit,
    /// failure inside the k-schedule, tagged with the offending k
    AtStep { k: u32, source: Box<SolverError> },
}

impl core::fmt::Display for SolverError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SolverError::Bracket { eps } => {
                write!(f, "flux bracket expansion failed (eps = {eps}); eps must be > 0")
            }
            SolverError::NewtonDivergence { iterations, residual, .. } => {
                write!(f, "Newton did not converge in {iterations} iterations (residual {residual})")
            }
            SolverError::BadInit => write!(f, "initial guess must be atom-free with correct traces"),
            SolverError::AtStep { k, source } => write!(f, "at schedule step k = {k}: {source}"),
        }
    }
}

impl core::error::Error for SolverError {}

/// Regularized energy E_eps(u) = sum_i [w_i f(d_i) + eps (1 + d_i^2)] dx.
/// The quadratic stabilizer is unweighted, exactly as in the definition
/// of the stabilized integrand.
pub fn regularized_energy(f: &NonAutonomousIntegrand, eps: f64, u: &BVFunction1D) -> f64 {
    debug_assert!(u.atoms().is_empty(), "regularized energy is for W^{{1,2}} iterates");
    let g = u.grid();
    let dx = g.dx();
    let weights = g.cell_weights(f);
    let mut acc = 0.0;
    for (i, w_i) in weights.iter().enumerate() {
        let d = u.slope(i);
        acc += (w_i * f.profile.f(d) + eps * (1.0 + d * d)) * dx;
    }
    acc
}

/// The discrete flux field q_i = w_i f'(d_i) + 2 eps d_i, one value per cell.
pub fn flux_field(f: &NonAutonomousIntegrand, eps: f64, u: &BVFunction1D) -> Vec<f64> {
    let g = u.grid();
    let weights = g.cell_weights(f);
    (0..g.m()).map(|i| weights[i] * f.profile.fprime(u.slope(i)) + 2.0 * eps * u.slope(i)).collect()
}

/// Gradient of the regularized energy with respect to the interior nodal
/// values (traces held fixed): grad_i = q_{i-1} - q_i for i = 1..m-1.
pub fn energy_gradient(f: &NonAutonomousIntegrand, eps: f64, u: &BVFunction1D) -> Vec<f64> {
    let q = flux_field(f, eps, u);
    (1..u.grid().m()).map(|i| q[i - 1] - q[i]).collect()
}

/// Solve w_i f'(d) + 2 eps d = c for d. Monotone in d, so Newton with a
/// running bracket and bisection fallback cannot escape.
fn invert_flux(
    f: &NonAutonomousIntegrand,
    w_i: f64,
    eps: f64,
    c: f64,
    d_start: f64,
    tol: f64,
) -> f64 {
    let h = |d: f64| w_i * f.profile.fprime(d) + 2.0 * eps * d - c;
    let hp = |d: f64| w_i * f.profile.fsecond(d) + 2.0 * eps;
    let mut d = if d_start.is_finite() { d_start } else { 0.0 };
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for _ in 0..200 {
        let r = h(d);
        if r.abs() <= tol {
            return d;
        }
        if r > 0.0 {
            hi = hi.min(d);
        } else {
            lo = lo.max(d);
        }
        let mut step = r / hp(d);
        if !step.is_finite() {
            step = r.signum();
        }
        let mut next = d - step;
        let inside = next > lo && next < hi;
        if !inside || !next.is_finite() {
            next = if lo.is_finite() && hi.is_finite() {
                0.5 * (lo + hi)
            } else if hi.is_finite() {
                // need to go further down
                if hi > 0.0 { -hi.max(1.0) * 2.0 } else { hi * 2.0 - 1.0 }
            } else {
                // need to go further up
                if lo < 0.0 { -lo.min(-1.0) * 2.0 } else { lo * 2.0 + 1.0 }
            };
        }
        if next == d {
            break; // bracket collapsed to one ulp
        }
        d = next;
    }
    d
}

/// First-integral shooting solver for the regularized problem.
///
/// Finds the flux constant C such that the slopes d_i = h^{-1}(C; x_i)
/// integrate to y2 - y1, by bracketing (start +-(2m+1), doubled until
/// the sign changes) followed by a bisection/secant hybrid on the
/// strictly increasing map C -> sum_i d_i dx.
pub fn solve_shooting(
    f: &NonAutonomousIntegrand,
    eps: f64,
    grid: Grid1D,
    bc: (f64, f64),
) -> Result<(BVFunction1D, f64), SolverError> {
    solve_shooting_with(f, eps, grid, bc, DEFAULT_NEWTON_TOL)
}

/// `solve_shooting` with an explicit tolerance on |Phi(C) - (y2-y1)|.
pub fn solve_shooting_with(
    f: &NonAutonomousIntegrand,
    eps: f64,
    grid: Grid1D,
    bc: (f64, f64),
    tol: f64,
) -> Result<(BVFunction1D, f64), SolverError> {
    if !(eps > 0.0) {
        return Err(SolverError::Bracket { eps });
    }
    let m = grid.m();
    let dx = grid.dx();
    let weights = grid.cell_weights(f);
    let target = bc.1 - bc.0;
    let inner_tol = 0.1 * tol;

    // warm-started slope workspace shared across Phi evaluations
    let mut d = vec![target / (grid.b() - grid.a()); m];
    let phi = |c: f64, d: &mut Vec<f64>| -> f64 {
        let tol_c = inner_tol * (1.0 + c.abs());
        let mut acc = 0.0;
        for i in 0..m {
            let di = invert_flux(f, weights[i], eps, c, d[i], tol_c);
            d[i] = di;
            acc += di;
        }
        acc * dx
    };

    // bracket C: the weight minimum m = w(c) bounds |w f'| by 2m+1 slack
    let m_w = f.weight.min_value();
    let mut c_lo = -(2.0 * m_w + 1.0);
    let mut c_hi = 2.0 * m_w + 1.0;
    let mut v_lo = phi(c_lo, &mut d);
    let mut doublings = 0;
    while v_lo > target {
        c_lo *= 2.0;
        v_lo = phi(c_lo, &mut d);
        doublings += 1;
        if doublings > 60 {
            return Err(SolverError::Bracket { eps });
        }
    }
    let mut v_hi = phi(c_hi, &mut d);
    doublings = 0;
    while v_hi < target {
        c_hi *= 2.0;
        v_hi = phi(c_hi, &mut d);
        doublings += 1;
        if doublings > 60 {
            return Err(SolverError::Bracket { eps });
        }
    }

    // bisection/secant hybrid on the strictly increasing Phi
    let ftol = tol * (1.0 + target.abs());
    let mut c = 0.5 * (c_lo + c_hi);
    for _ in 0..300 {
        // secant candidate from the bracket endpoints, midpoint fallback
        let mut cand = if (v_hi - v_lo).abs() > 0.0 {
            c_lo + (target - v_lo) * (c_hi - c_lo) / (v_hi - v_lo)
        } else {
            0.5 * (c_lo + c_hi)
        };
        let mid = 0.5 * (c_lo + c_hi);
        if !(cand > c_lo && cand < c_hi) {
            cand = mid;
        }
        // alternate toward the midpoint to keep worst-case linear shrink
        c = 0.5 * (cand + mid);
        let v = phi(c, &mut d);
        if (v - target).abs() <= ftol {
            break;
        }
        if v < target {
            c_lo = c;
            v_lo = v;
        } else {
            c_hi = c;
            v_hi = v;
        }
        if c_hi - c_lo <= f64::EPSILON * (1.0 + c.abs()) {
            break; // bracket down to ulps; Phi tolerance unreachable in f64
        }
    }
    // final slopes at the accepted C
    let _ = phi(c, &mut d);
    let mut values = Vec::with_capacity(m + 1);
    let mut acc = bc.0;
    values.push(acc);
    for di in &d {
        acc += di * dx;
        values.push(acc);
    }
    let u = BVFunction1D::new(grid, values, Vec::new()).expect("shooting output is valid");
    Ok((u, c))
}

/// Damped Newton minimizer of the regularized energy over interior nodal
/// values, traces pinned to the boundary data. Tridiagonal Hessian,
/// Armijo backtracking, termination on the max-norm of the discrete
/// Euler-Lagrange residual.
pub fn solve_newton(
    f: &NonAutonomousIntegrand,
    eps: f64,
    grid: Grid1D,
    bc: (f64, f64),
    init: &BVFunction1D,
) -> Result<BVFunction1D, SolverError> {
    solve_newton_with(f, eps, grid, bc, init, DEFAULT_NEWTON_TOL, DEFAULT_NEWTON_MAX_ITER)
}

pub fn solve_newton_with(
    f: &NonAutonomousIntegrand,
    eps: f64,
    grid: Grid1D,
    bc: (f64, f64),
    init: &BVFunction1D,
    tol: f64,
    max_iter: usize,
) -> Result<BVFunction1D, SolverError> {
    if !init.atoms().is_empty()
        || (init.trace_a() - bc.0).abs() > 1e-9 * (1.0 + bc.0.abs())
        || (init.trace_b() - bc.1).abs() > 1e-9 * (1.0 + bc.1.abs())
        || *init.grid() != grid
    {
        return Err(SolverError::BadInit);
    }
    let m = grid.m();
    let dx = grid.dx();
    let weights = grid.cell_weights(f);
    let mut values = init.values().to_vec();

    let energy = |vals: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..m {
            let d = (vals[i + 1] - vals[i]) / dx;
            acc += (weights[i] * f.profile.f(d) + eps * (1.0 + d * d)) * dx;
        }
        acc
    };

    let mut e_cur = energy(&values);
    let mut iterations = 0;
    loop {
        // flux and residual
        let mut q = Vec::with_capacity(m);
        let mut hp = Vec::with_capacity(m);
        for i in 0..m {
            let d = (values[i + 1] - values[i]) / dx;
            q.push(weights[i] * f.profile.fprime(d) + 2.0 * eps * d);
            hp.push(weights[i] * f.profile.fsecond(d) + 2.0 * eps);
        }
        let grad: Vec<f64> = (1..m).map(|i| q[i - 1] - q[i]).collect();
        let gmax = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        // the gradient is computed from differences of stored nodal values,
        // so it carries a rounding floor of order eps * |u|/dx * h'
        let vmax = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let hpmax = hp.iter().fold(0.0f64, |a, h| a.max(*h));
        let floor = 8.0 * f64::EPSILON * (vmax / dx) * hpmax;
        if gmax <= tol.max(floor) {
            let u = BVFunction1D::new(grid, values, Vec::new()).expect("newton output valid");
            return Ok(u);
        }
        if iterations >= max_iter {
            let last = BVFunction1D::new(grid, values, Vec::new()).expect("newton output valid");
            return Err(SolverError::NewtonDivergence {
                iterations,
                residual: gmax,
                last: Box::new(last),
            });
        }
        iterations += 1;

        // tridiagonal Newton system H delta = -grad, H_(i,i) = (hp_{i-1}+hp_i)/dx
        let n = m - 1;
        let mut diag: Vec<f64> = (1..m).map(|i| (hp[i - 1] + hp[i]) / dx).collect();
        let off: Vec<f64> = (1..m - 1).map(|i| -hp[i] / dx).collect();
        let mut rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
        // Thomas algorithm
        for i in 1..n {
            let w = off[i - 1] / diag[i - 1];
            diag[i] -= w * off[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut delta = vec![0.0; n];
        delta[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            delta[i] = (rhs[i] - off[i] * delta[i + 1]) / diag[i];
        }

        // Armijo backtracking on the energy. Near the minimum the
        // predicted decrease g' H^{-1} g falls below the rounding noise
        // of the energy sum itself; comparisons are meaningless there and
        // the full step is taken unconditionally (quadratic basin).
        let slope: f64 = grad.iter().zip(delta.iter()).map(|(g, d)| g * d).sum();
        let energy_noise = 32.0 * f64::EPSILON * (1.0 + e_cur.abs()) * (m as f64).sqrt();
        if slope.abs() <= energy_noise {
            for (i, dv) in delta.iter().enumerate() {
                values[i + 1] += dv;
            }
            e_cur = energy(&values);
            continue;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = values.clone();
            for (i, dv) in delta.iter().enumerate() {
                trial[i + 1] += t * dv;
            }
            let e_trial = energy(&trial);
            if e_trial <= e_cur + 1e-4 * t * slope {
                values = trial;
                e_cur = e_trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // cannot descend further; treat as converged-to-roundoff if the
            // residual is already tiny, otherwise report divergence
            let last = BVFunction1D::new(grid, values, Vec::new()).expect("newton output valid");
            if gmax <= tol * 100.0 {
                return Ok(last);
            }
            return Err(SolverError::NewtonDivergence {
                iterations,
                residual: gmax,
                last: Box::new(last),
            });
        }
    }
}

/// Smooth compactly supported test functions for the Euler-Lagrange
/// residual: unit hats at interior nodes and the first few Dirichlet
/// sinusoids sin(j pi (x-a)/(b-a)).
#[derive(Clone, Copy, Debug)]
pub enum TestFunction {
    Hat { node: usize },
    Sine { j: u32 },
}

/// Hats at every interior node plus sinusoids j = 1..=8.
pub fn default_test_bank(grid: &Grid1D) -> Vec<TestFunction> {
    let mut bank: Vec<TestFunction> =
        (1..grid.m()).map(|node| TestFunction::Hat { node }).collect();
    for j in 1..=8 {
        bank.push(TestFunction::Sine { j });
    }
    bank
}

/// max over the bank of |int D_z F_eps(x, u') phi' dx| / ||phi||_{W^{1,1}}.
/// Cell integrals use the same cell weights as the energy, so a discrete
/// minimizer scores exactly its flux-constancy defect.
pub fn el_residual(
    f: &NonAutonomousIntegrand,
    eps: f64,
    u: &BVFunction1D,
    bank: &[TestFunction],
) -> f64 {
    let g = u.grid();
    let m = g.m();
    let dx = g.dx();
    let span = g.b() - g.a();
    let q = flux_field(f, eps, u);
    let mut worst = 0.0f64;
    for t in bank {
        let (integral, norm) = match *t {
            TestFunction::Hat { node } => {
                debug_assert!(node >= 1 && node < m);
                // phi' = 1/dx on cell node-1, -1/dx on cell node
                ((q[node - 1] - q[node]), dx + 2.0)
            }
            TestFunction::Sine { j } => {
                let freq = j as f64 * core::f64::consts::PI / span;
                let mut acc = 0.0;
                for (i, qi) in q.iter().enumerate() {
                    let x = g.midpoint(i);
                    acc += qi * freq * (freq * (x - g.a())).cos() * dx;
                }
                (acc, span * 2.0 / core::f64::consts::PI + 2.0 * j as f64)
            }
        };
        worst = worst.max(integral.abs() / norm);
    }
    worst
}

/// A_k = 1 + int (1 + |v'|^2) dx for the chosen surrogate v.
fn a_value(surrogate: AkSurrogate, grid: &Grid1D, bc: (f64, f64), prev: Option<&BVFunction1D>) -> f64 {
    let affine_slope = (bc.1 - bc.0) / (grid.b() - grid.a());
    match (surrogate, prev) {
        (AkSurrogate::PreviousIterate, Some(u)) => {
            let dx = u.grid().dx();
            let mut acc = 0.0;
            for i in 0..u.grid().m() {
                let d = u.slope(i);
                acc += (1.0 + d * d) * dx;
            }
            1.0 + acc
        }
        _ => 1.0 + (1.0 + affine_slope * affine_slope) * (grid.b() - grid.a()),
    }
}

/// Run the schedule: each state solved by shooting and verified by an
/// independent Newton minimization from the affine initial guess.
pub fn run_sequence(
    f: &NonAutonomousIntegrand,
    cfg: &ViscosityConfig,
) -> Result<Vec<ViscosityState>, SolverError> {
    let mut states: Vec<ViscosityState> = Vec::with_capacity(cfg.k_schedule.len());
    let affine = BVFunction1D::affine(cfg.grid, cfg.bc.0, cfg.bc.1);
    let full = Interval::new(cfg.grid.a(), cfg.grid.b());
    let bank = default_test_bank(&cfg.grid);
    let mut prev_eps = f64::INFINITY;
    for &k in &cfg.k_schedule {
        let prev_u = states.last().map(|s: &ViscosityState| &s.u);
        let a_k = a_value(cfg.a_surrogate, &cfg.grid, cfg.bc, prev_u);
        let eps_k = 1.0 / (2.0 * (k as f64) * (k as f64) * a_k);
        debug_assert!(eps_k < prev_eps, "eps_k must decrease along the schedule");
        prev_eps = eps_k;

        let (u, flux_c) = solve_shooting_with(f, eps_k, cfg.grid, cfg.bc, cfg.newton_tol)
            .map_err(|e| SolverError::AtStep { k, source: Box::new(e) })?;
        let newton_linf_dist = if cfg.verify_with_newton {
            let verified = solve_newton_with(
                f,
                eps_k,
                cfg.grid,
                cfg.bc,
                &affine,
                cfg.newton_tol,
                cfg.newton_max_iter,
            )
            .map_err(|e| SolverError::AtStep { k, source: Box::new(e) })?;
            u.values()
                .iter()
                .zip(verified.values().iter())
                .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
        } else {
            f64::NAN
        };

        let q = flux_field(f, eps_k, &u);
        let mean_q = q.iter().sum::<f64>() / q.len() as f64;
        let flux_residual = q.iter().fold(0.0f64, |a, qi| a.max((qi - mean_q).abs()));
        let el = el_residual(f, eps_k, &u, &bank);
        let energy = relaxed_energy(&u, f, cfg.bc);
        let gradient_linf = u.slopes().iter().fold(0.0f64, |a, d| a.max(d.abs()));
        let lp_norms =
            cfg.lp_probe.iter().map(|&p| (p, u.lp_gradient_norm(p, full))).collect();

        states.push(ViscosityState {
            k,
            a_k,
            eps_k,
            u,
            flux_c,
            report: ViscosityReport {
                flux_residual,
                el_residual: el,
                energy,
                gradient_linf,
                lp_norms,
                newton_linf_dist,
            },
        });
    }
    Ok(states)
}
