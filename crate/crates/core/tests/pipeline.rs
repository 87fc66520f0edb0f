//! Cross-module integration: viscosity sequences probed against the
//! closed-form oracle at desk scale.

use bv1d_core::bv_model::Grid1D;
use bv1d_core::integrand::NonAutonomousIntegrand;
use bv1d_core::oracle;
use bv1d_core::probe::{self, JumpDetectConfig, JumpOutcome};
use bv1d_core::viscosity::{run_sequence, AkSurrogate, ViscosityConfig};

fn sequence(
    mu: f64,
    grid_exp: u32,
    m: f64,
    k_max: u32,
) -> (NonAutonomousIntegrand, Grid1D, Vec<bv1d_core::viscosity::ViscosityState>) {
    let f = NonAutonomousIntegrand::example(mu, 0.25, -1.0, 1.0).unwrap();
    let g = Grid1D::new(-1.0, 1.0, 1usize << grid_exp).unwrap();
    let mut cfg = ViscosityConfig::new(g, (0.0, m), k_max);
    cfg.verify_with_newton = false;
    cfg.lp_probe = vec![];
    let states = run_sequence(&f, &cfg).unwrap();
    (f, g, states)
}

fn detect(f: &NonAutonomousIntegrand, g: &Grid1D, states: &[bv1d_core::viscosity::ViscosityState]) -> JumpOutcome {
    let windows = probe::default_windows(g.dx(), g.b() - g.a());
    probe::jump_detect(f, states, &windows, &JumpDetectConfig::default())
}

#[test]
fn jump_error_decreases_under_grid_refinement() {
    let truth = 20.0 - oracle::compute_m0(1.4, 0.25).unwrap();
    let mut errs = Vec::new();
    for ge in [11u32, 12, 13] {
        let (f, g, states) = sequence(1.4, ge, 20.0, 512);
        match detect(&f, &g, &states) {
            JumpOutcome::Jump { size, .. } => errs.push((size - truth).abs()),
            JumpOutcome::NoJump { .. } => panic!("jump missed at 2^{ge}"),
        }
    }
    assert!(errs[1] < errs[0] && errs[2] < errs[1], "not monotone: {errs:?}");
}

#[test]
fn sobolev_sequence_classifies_nojump() {
    let (f, g, states) = sequence(1.1, 11, 20.0, 256);
    match detect(&f, &g, &states) {
        JumpOutcome::NoJump { j_last, threshold, .. } => {
            assert!(j_last < threshold);
        }
        JumpOutcome::Jump { size, .. } => panic!("spurious jump of size {size}"),
    }
}

#[test]
fn linear_iterates_have_exactly_linear_windows() {
    // with zero viscosity pressure to deviate (bc slope exactly affine
    // attainable), J(k, eps) = M eps / (b - a) for every window
    let (f, g, states) = sequence(1.4, 8, 0.0, 8);
    for s in &states {
        for e in [g.dx(), 4.0 * g.dx(), 0.25] {
            let j = s.u.eval_ac(e) - s.u.eval_ac(-e);
            assert!(j.abs() <= 1e-12);
        }
    }
    let windows = probe::default_windows(g.dx(), 2.0);
    match probe::jump_detect(&f, &states, &windows, &JumpDetectConfig::default()) {
        JumpOutcome::NoJump { .. } => {}
        JumpOutcome::Jump { .. } => panic!("zero run cannot jump"),
    }
}

#[test]
fn synthetic_linear_states_give_exactly_linear_windows() {
    // hand-built affine states: J(k, eps) = M eps / (b - a) for every
    // window, and the detector classifies NoJump
    use bv1d_core::bv_model::{BVFunction1D, EnergyBreakdown};
    use bv1d_core::viscosity::{ViscosityReport, ViscosityState};
    let m_bc = 6.0;
    let f = NonAutonomousIntegrand::example(1.4, 0.25, -1.0, 1.0).unwrap();
    let g = Grid1D::new(-1.0, 1.0, 1 << 8).unwrap();
    let states: Vec<ViscosityState> = [1u32, 2, 4]
        .iter()
        .map(|&k| ViscosityState {
            k,
            a_k: 1.0,
            eps_k: 1.0 / (2.0 * (k * k) as f64),
            u: BVFunction1D::affine(g, 0.0, m_bc),
            flux_c: 0.0,
            report: ViscosityReport {
                flux_residual: 0.0,
                el_residual: 0.0,
                energy: EnergyBreakdown::new(0.0, 0.0, 0.0),
                gradient_linf: m_bc / 2.0,
                lp_norms: vec![],
                newton_linf_dist: 0.0,
            },
        })
        .collect();
    for s in &states {
        for e in [g.dx(), 8.0 * g.dx(), 0.25] {
            // both-sided window of half-width eps spans 2 eps of a line
            // with slope M/(b-a)
            let j = s.u.eval_ac(e) - s.u.eval_ac(-e);
            assert!((j - m_bc * 2.0 * e / 2.0).abs() <= 1e-12, "J({e}) = {j}");
        }
    }
    let windows = probe::default_windows(g.dx(), 2.0);
    match probe::jump_detect(&f, &states, &windows, &JumpDetectConfig::default()) {
        JumpOutcome::NoJump { .. } => {}
        JumpOutcome::Jump { size, .. } => panic!("affine states produced a jump of {size}"),
    }
}

#[test]
fn nikolskii_of_oracle_slope_profile_is_refinement_stable() {
    // seminorm of the jump-branch slope field g(m/w) at theta = alpha/2,
    // over a fixed h-range, must not move under grid refinement
    let mut sups = Vec::new();
    for ge in [11u32, 12, 13] {
        let g = Grid1D::new(-1.0, 1.0, 1 << ge).unwrap();
        let sol = oracle::solve_jump_branch(1.4, 0.25, g, 20.0).unwrap();
        let slopes = sol.minimizer.slopes();
        let field = probe::SampledField::of_slopes(&slopes, g.a(), g.dx());
        let h_fixed: Vec<usize> = [1.0f64 / 64.0, 1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0]
            .iter()
            .map(|h| (h / g.dx()) as usize)
            .collect();
        let rep = probe::nikolskii_seminorm(
            &field,
            0.125,
            bv1d_core::bv_model::Interval::new(-0.5, 0.5),
            &h_fixed,
        );
        assert!(rep.sup.is_finite() && rep.sup > 0.0);
        sups.push(rep.sup);
    }
    let (lo, hi) = (sups.iter().cloned().fold(f64::INFINITY, f64::min),
                    sups.iter().cloned().fold(0.0f64, f64::max));
    assert!(hi / lo <= 1.05, "seminorm drifts under refinement: {sups:?}");
}

#[test]
fn oracle_branches_agree_with_viscosity_limits() {
    // jump branch: the k-limit energy approaches the oracle energy from
    // above once the same grid prices both
    let (f, g, states) = sequence(1.4, 8, 20.0, 256);
    let sol = oracle::solve(1.4, 0.25, g, 20.0).unwrap();
    let slack = 10.0 * g.dx() * 21.0;
    let last = states.last().unwrap();
    let gap = last.report.energy.total - sol.energy.total;
    assert!(gap >= -slack && gap <= 1.0, "gap {gap} outside [{}, 1]", -slack);
    let _ = f;
}

#[test]
fn previous_iterate_surrogate_freezes_concentration_early() {
    // the feedback surrogate collapses eps so fast that the late states
    // are numerically stationary; this is exactly why the affine
    // surrogate is the default
    let f = NonAutonomousIntegrand::example(1.4, 0.25, -1.0, 1.0).unwrap();
    let g = Grid1D::new(-1.0, 1.0, 1 << 10).unwrap();
    let mut cfg = ViscosityConfig::new(g, (0.0, 20.0), 64);
    cfg.a_surrogate = AkSurrogate::PreviousIterate;
    cfg.verify_with_newton = false;
    cfg.lp_probe = vec![1.2];
    let states = run_sequence(&f, &cfg).unwrap();
    let n = states.len();
    let tail_ratio = states[n - 1].report.lp_norms[0].1 / states[n - 2].report.lp_norms[0].1;
    assert!(
        (tail_ratio - 1.0).abs() <= 1e-3,
        "expected frozen tail, got ratio {tail_ratio}"
    );
    // eps collapses far below the plain 1/k^2 pace within a few steps
    // (the grid caps the feedback once concentration reaches cell scale)
    let plain = states[0].eps_k / (16.0 * 16.0);
    assert!(states[4].k == 16 && states[4].eps_k < 1e-2 * plain);
}
