//! Acceptance suite: every shipped claim, pinned to its tolerance, one
//! test per criterion. Each prints a PASS line with the measured
//! quantities when it succeeds (visible with `--nocapture`).
//!
//! Run with `cargo test -p bv1d-cli --test acceptance`.

use bv1d_core::bv_model::{perturbation_competitors, relaxed_energy, Grid1D, Interval};
use bv1d_core::integrand::{
    verify_hypotheses, MuEllipticProfile, NonAutonomousIntegrand, SampleSpec, VerifyOverrides,
};
use bv1d_core::oracle;
use bv1d_core::probe::{self, JumpDetectConfig, JumpOutcome};
use bv1d_core::rng::SplitMix64;
use bv1d_core::viscosity::{
    energy_gradient, regularized_energy, run_sequence, ViscosityConfig, ViscosityState,
};

const FIG1_MU: f64 = 1.4;
const FIG1_ALPHA: f64 = 0.25;
const FIG1_M: f64 = 20.0;

/// Wall-clock budget stated by the criterion, with no slack added; the
/// optimized test profile leaves multiples of headroom.
fn within_budget(t0: std::time::Instant, seconds: u64, what: &str) {
    let dt = t0.elapsed();
    assert!(dt <= std::time::Duration::from_secs(seconds), "{what} took {dt:?} > {seconds}s");
}

fn fig1_integrand() -> NonAutonomousIntegrand {
    NonAutonomousIntegrand::example(FIG1_MU, FIG1_ALPHA, -1.0, 1.0).unwrap()
}

fn grid(exp: u32) -> Grid1D {
    Grid1D::new(-1.0, 1.0, 1usize << exp).unwrap()
}

fn run(f: &NonAutonomousIntegrand, g: Grid1D, m: f64, k_max: u32, newton: bool) -> Vec<ViscosityState> {
    let mut cfg = ViscosityConfig::new(g, (0.0, m), k_max);
    cfg.verify_with_newton = newton;
    cfg.lp_probe = vec![1.0, 1.05, 1.2];
    run_sequence(f, &cfg).unwrap()
}

#[test]
fn criterion_1_figure1_reproduction() {
    let t0 = std::time::Instant::now();
    // mu = 1.4, alpha = 0.25, M = 20, grid 2^14, k up to 512:
    // single steep transition at 0, jump within 2% of M - M0,
    // L1 distance to the oracle minimizer <= 0.01 * M * (b - a)
    let f = fig1_integrand();
    let g = grid(14);
    let states = run(&f, g, FIG1_M, 512, true);
    let m0 = oracle::compute_m0(FIG1_MU, FIG1_ALPHA).unwrap();
    let truth = FIG1_M - m0;

    // single steep transition: the cells above half the peak slope form
    // one short contiguous block at the weight minimum
    let last = states.last().unwrap();
    let slopes = last.u.slopes();
    let peak = slopes.iter().cloned().fold(0.0f64, f64::max);
    let hot: Vec<usize> =
        (0..slopes.len()).filter(|&i| slopes[i] > 0.5 * peak).collect();
    assert!(hot.len() <= 4, "transition spread over {} cells", hot.len());
    assert_eq!(hot.last().unwrap() - hot.first().unwrap(), hot.len() - 1, "not contiguous");
    for &i in &hot {
        assert!(g.midpoint(i).abs() <= g.dx(), "steep cell away from 0");
    }

    let windows = probe::default_windows(g.dx(), 2.0);
    let outcome = probe::jump_detect(&f, &states, &windows, &JumpDetectConfig::default());
    let (location, size, accepted) = match outcome {
        JumpOutcome::Jump { location, size, accepted, .. } => (location, size, accepted),
        JumpOutcome::NoJump { .. } => panic!("figure1 run must detect a jump"),
    };
    assert!(location.abs() <= g.dx(), "jump located at {location}");
    let rel = ((size - truth) / truth).abs();
    assert!(rel <= 0.02, "jump size {size} vs {truth}: {:.3}%", rel * 100.0);
    assert!(accepted, "jump estimate did not stabilize");

    let sol = oracle::solve(FIG1_MU, FIG1_ALPHA, g, FIG1_M).unwrap();
    let mut l1 = 0.0;
    for i in 0..g.m() {
        let x = g.midpoint(i);
        l1 += (last.u.eval_ac(x) - sol.minimizer.eval(x)).abs() * g.dx();
    }
    let bound = 0.01 * FIG1_M * 2.0;
    assert!(l1 <= bound, "L1 distance {l1} > {bound}");
    within_budget(t0, 120, "criterion 1");
    println!(
        "PASS criterion 1: jump {size:.6} vs {truth:.6} ({:.3}% err), location {location:.2e}, L1 {l1:.4} <= {bound}",
        rel * 100.0
    );
}

#[test]
fn criterion_2_m0_dual_route_agreement() {
    let t0 = std::time::Instant::now();
    // 20 parameter pairs with mu > alpha + 1: generic-vs-closed-form
    // quadrature agreement to 1e-8 relative
    let mus = [1.31, 1.37, 1.43, 1.49, 1.55, 1.61, 1.67, 1.73, 1.79, 1.85];
    let alphas = [0.1, 0.25];
    let mut checked = 0;
    let mut worst = 0.0f64;
    for &mu in &mus {
        for &alpha in &alphas {
            assert!(mu > alpha + 1.0);
            let d = oracle::compute_m0_detailed(mu, alpha).unwrap();
            assert!(d.value.is_finite());
            assert!(
                d.rel_disagreement <= 1e-8,
                "routes disagree at (mu={mu}, alpha={alpha}): {:?}",
                d
            );
            worst = worst.max(d.rel_disagreement);
            checked += 1;
        }
    }
    assert_eq!(checked, 20);
    within_budget(t0, 10, "criterion 2");
    println!("PASS criterion 2: 20 pairs, worst route disagreement {worst:.3e} <= 1e-8");
}

#[test]
fn criterion_3_divergence_boundary() {
    let t0 = std::time::Instant::now();
    // mu = 1.2 <= alpha + 1: truncated estimates blow past 1e3 under
    // floor refinement and the classification is +infinity
    let e6 = oracle::m0_truncated_estimate(1.2, 0.25, 1e-6).unwrap();
    let e9 = oracle::m0_truncated_estimate(1.2, 0.25, 1e-9).unwrap();
    let e12 = oracle::m0_truncated_estimate(1.2, 0.25, 1e-12).unwrap();
    assert!(e6 < e9 && e9 < e12, "estimates must grow: {e6} {e9} {e12}");
    assert!(e12 > 1e3, "divergent estimate stuck at {e12}");
    assert!(oracle::compute_m0(1.2, 0.25).unwrap().is_infinite());

    // mu = 1.3: finite, refinement-stable to 1e-8 across three routes
    let d = oracle::compute_m0_detailed(1.3, 0.25).unwrap();
    assert!(d.value.is_finite());
    assert!(d.rel_disagreement <= 1e-8, "{d:?}");
    within_budget(t0, 10, "criterion 3");
    println!(
        "PASS criterion 3: divergent estimate reaches {e12:.3e}, M0(1.3, 0.25) = {:.9} stable to {:.2e}",
        d.value, d.rel_disagreement
    );
}

#[test]
fn criterion_4_hypothesis_suite() {
    let t0 = std::time::Instant::now();
    // (H1)-(H3) verifiers with derived lambda = (mu-1)/mu and C = 1 over
    // the parameter box; seam continuity of f, f', f'' to 1e-12
    for &mu in &[1.1, 1.4, 1.9] {
        for &alpha in &[0.1, 0.25, 0.9] {
            let f = NonAutonomousIntegrand::example(mu, alpha, -1.0, 1.0).unwrap();
            let rep = verify_hypotheses(
                &f,
                &SampleSpec::default_z(),
                &SampleSpec::default_x(-1.0, 1.0),
                777,
                VerifyOverrides::default(),
            );
            assert!(rep.all_pass(), "(mu={mu}, alpha={alpha}): {rep:?}");
            assert!((rep.lambda - (mu - 1.0) / mu).abs() < 1e-15);
            assert_eq!(rep.hoelder_c, 1.0);
            assert!(rep.hoelder_observed <= 1.0 + 1e-12);
        }
    }
    let mut mu = 1.05;
    while mu < 1.975 {
        let p = MuEllipticProfile::new(mu).unwrap();
        let left_f = (mu - 1.0) / (2.0 * mu);
        let right_f = 1.0 - 1.0 / (mu * (2.0 - mu)) + (mu - 1.0) / (2.0 * (2.0 - mu));
        assert!((left_f - right_f).abs() <= 1e-12);
        assert!((p.fprime(1.0 - 1e-15) - p.fprime(1.0 + 1e-15)).abs() <= 1e-12);
        assert!((p.fsecond(1.0 - 1e-15) - p.fsecond(1.0 + 1e-15)).abs() <= 1e-12);
        mu += 0.05;
    }
    within_budget(t0, 5, "criterion 4");
    println!("PASS criterion 4: hypotheses hold on the 3x3 parameter box, seams C^2 to 1e-12");
}

#[test]
fn criterion_5_solver_invariants() {
    let t0 = std::time::Instant::now();
    // flux constancy, shooting-vs-Newton agreement, symmetry, gradient
    // check, monotone true-F energy, all at the pinned tolerances
    let f = fig1_integrand();
    let g = grid(12);
    let states = run(&f, g, FIG1_M, 64, true);
    let mut prev_energy = f64::INFINITY;
    for s in &states {
        assert!(
            s.report.flux_residual <= 1e-8 * (1.0 + s.flux_c.abs()),
            "flux residual {} at k={}",
            s.report.flux_residual,
            s.k
        );
        assert!(
            s.report.newton_linf_dist <= 1e-8 * (1.0 + FIG1_M),
            "solver disagreement {} at k={}",
            s.report.newton_linf_dist,
            s.k
        );
        let vals = s.u.values();
        let mut sym = 0.0f64;
        for i in 0..=g.m() {
            sym = sym.max((vals[i] + vals[g.m() - i] - FIG1_M).abs());
        }
        assert!(sym <= 1e-6 * FIG1_M, "symmetry defect {sym} at k={}", s.k);
        assert!(
            s.report.energy.total <= prev_energy + 1e-10,
            "energy not monotone at k={}",
            s.k
        );
        prev_energy = s.report.energy.total;
    }

    // directional derivatives of the regularized energy vs its gradient
    let eps = 1e-3;
    let mut rng = SplitMix64::new(5150);
    let gg = grid(10);
    let values: Vec<f64> =
        (0..=gg.m()).map(|i| FIG1_M * i as f64 / gg.m() as f64 + rng.uniform(-0.3, 0.3)).collect();
    let u = bv1d_core::bv_model::BVFunction1D::new(gg, values.clone(), vec![]).unwrap();
    let grad = energy_gradient(&f, eps, &u);
    let h = 1e-6;
    for _ in 0..50 {
        let dir: Vec<f64> = (0..gg.m() - 1).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let mut vp = values.clone();
        let mut vm = values.clone();
        for (i, d) in dir.iter().enumerate() {
            vp[i + 1] += h * d;
            vm[i + 1] -= h * d;
        }
        let up = bv1d_core::bv_model::BVFunction1D::new(gg, vp, vec![]).unwrap();
        let um = bv1d_core::bv_model::BVFunction1D::new(gg, vm, vec![]).unwrap();
        let fd = (regularized_energy(&f, eps, &up) - regularized_energy(&f, eps, &um)) / (2.0 * h);
        let an: f64 = grad.iter().zip(dir.iter()).map(|(a, b)| a * b).sum();
        assert!(
            (fd - an).abs() <= 1e-6 * (1.0 + an.abs()),
            "gradient mismatch: fd {fd} vs {an}"
        );
    }
    within_budget(t0, 60, "criterion 5");
    println!("PASS criterion 5: flux/cross-solver/symmetry/gradient/monotonicity at pinned tolerances");
}

#[test]
fn criterion_6_regularity_dichotomy() {
    let t0 = std::time::Instant::now();
    // mu = 1.1: integrability below p_max stays put and the peak slope
    // stabilizes; mu = 1.4: the p = 1.2 integral keeps growing (factor
    // >= 2 between k = 64 and k = 512)
    let full = Interval::new(-1.0, 1.0);

    let f11 = NonAutonomousIntegrand::example(1.1, 0.25, -1.0, 1.0).unwrap();
    let t11 = probe::thresholds(1.1, 0.25, 1);
    assert!(1.05 < t11.p_max);
    let states11 = run(&f11, grid(12), FIG1_M, 512, true);
    let sweep11 = probe::lp_sweep(&states11, &[1.05], full);
    let ratios = sweep11.ratios(0);
    let last_ratio = *ratios.last().unwrap();
    assert!(last_ratio <= 1.05, "L^1.05 integral still growing: ratio {last_ratio}");
    let n = states11.len();
    let peak_ratio =
        states11[n - 1].report.gradient_linf / states11[n - 2].report.gradient_linf;
    assert!(peak_ratio <= 1.02, "peak slope not stabilized: {peak_ratio}");

    let f14 = fig1_integrand();
    let states14 = run(&f14, grid(18), FIG1_M, 512, false);
    let sweep14 = probe::lp_sweep(&states14, &[1.2], full);
    let idx = |k: u32| states14.iter().position(|s| s.k == k).unwrap();
    let v64 = sweep14.rows[idx(64)].1[0];
    let v512 = sweep14.rows[idx(512)].1[0];
    let growth = v512 / v64;
    assert!(growth >= 2.0, "p = 1.2 integral grew only {growth:.3}x");
    within_budget(t0, 180, "criterion 6");
    println!(
        "PASS criterion 6: mu=1.1 ratio {last_ratio:.4} <= 1.05 (p_max {:.4}), peak ratio {peak_ratio:.4}; mu=1.4 growth {growth:.2}x >= 2",
        t11.p_max
    );
}

#[test]
fn criterion_7_nikolskii_stability() {
    let t0 = std::time::Instant::now();
    // mu = 1.1: the weighted fractional quantity at the kappa-interval
    // midpoint and the Nikolskii seminorm at theta = alpha/2 are both
    // bounded within factor 1.2 across k in {64, 128, 256, 512}
    let mu = 1.1;
    let alpha = 0.25;
    let f = NonAutonomousIntegrand::example(mu, alpha, -1.0, 1.0).unwrap();
    let g = grid(12);
    let t = probe::thresholds(mu, alpha, 1);
    let (lo, hi) = t.kappa_interval.expect("kappa interval nonempty for mu = 1.1");
    let kappa = 0.5 * (lo + hi);
    let k_win = Interval::new(-0.5, 0.5);
    let states = run(&f, g, FIG1_M, 512, false);
    let h_steps = probe::default_h_steps(g.dx(), 0.5);

    let mut wf = Vec::new();
    let mut nik = Vec::new();
    for s in states.iter().filter(|s| s.k >= 64) {
        let slopes = s.u.slopes();
        let field = probe::SampledField::of_slopes(&slopes, g.a(), g.dx());
        wf.push(probe::weighted_fractional(&field, k_win, kappa, mu, alpha, 8));
        nik.push(probe::nikolskii_seminorm(&field, alpha / 2.0, k_win, &h_steps).sup);
    }
    assert_eq!(wf.len(), 4); // k = 64, 128, 256, 512
    let spread = |v: &[f64]| v.iter().cloned().fold(0.0f64, f64::max)
        / v.iter().cloned().fold(f64::INFINITY, f64::min);
    let wf_spread = spread(&wf);
    let nik_spread = spread(&nik);
    assert!(wf_spread <= 1.2, "weighted fractional spread {wf_spread}");
    assert!(nik_spread <= 1.2, "nikolskii spread {nik_spread}");
    within_budget(t0, 120, "criterion 7");
    println!(
        "PASS criterion 7: weighted-fractional spread {wf_spread:.4}, Nikolskii spread {nik_spread:.4} (kappa = {kappa})"
    );
}

#[test]
fn criterion_8_threshold_arithmetic() {
    let t0 = std::time::Instant::now();
    let t = probe::thresholds(1.4, 0.25, 1);
    assert!((t.p_max - 0.9142857142857143).abs() <= 1e-15);
    assert!((t.dim_bound - 0.875).abs() <= 1e-15);
    assert!((t.mu_dim_max - 1.0909090909090908).abs() <= 1e-15);
    assert!(t.kappa_interval.is_none());
    let t11 = probe::thresholds(1.1, 0.25, 1);
    assert!(t11.kappa_interval.is_some());
    // mu_dim_max < mu_sobolev_max over a 20x20 (alpha, n) grid
    for i in 1..=20 {
        let alpha = i as f64 / 21.0;
        for n in 1..=20u32 {
            let t = probe::thresholds(1.0 + 0.5 * alpha / n as f64, alpha, n);
            assert!(t.mu_dim_max < t.mu_sobolev_max, "(alpha={alpha}, n={n})");
        }
    }
    within_budget(t0, 1, "criterion 8");
    println!("PASS criterion 8: pinned constants and ordering on the 20x20 grid");
}

#[test]
fn criterion_9_optimality() {
    let t0 = std::time::Instant::now();
    // oracle beats 100 seeded competitors on each branch; viscosity
    // energies dominate the oracle energy within the discretization
    // slack 10 dx (1 + M), with the gap shrinking monotonically in k
    let f = fig1_integrand();
    let g = grid(9);
    let m0 = oracle::compute_m0(FIG1_MU, FIG1_ALPHA).unwrap();
    for (m, sol) in [
        (FIG1_M, oracle::solve_jump_branch(FIG1_MU, FIG1_ALPHA, g, FIG1_M).unwrap()),
        (0.6 * m0, oracle::solve_sobolev_branch(FIG1_MU, FIG1_ALPHA, g, 0.6 * m0).unwrap()),
    ] {
        let base = sol.energy.total;
        for (i, v) in perturbation_competitors(&sol.minimizer, (0.0, m), 100, 20260808)
            .iter()
            .enumerate()
        {
            let e = relaxed_energy(v, &f, (0.0, m)).total;
            assert!(base <= e + 1e-9, "competitor {i} beats oracle at M={m}: {e} < {base}");
        }
    }

    let mut worst_margin = f64::INFINITY;
    for (mu, ge) in [(FIG1_MU, 8u32), (1.1, 12u32)] {
        let fb = NonAutonomousIntegrand::example(mu, FIG1_ALPHA, -1.0, 1.0).unwrap();
        let gb = grid(ge);
        let slack = 10.0 * gb.dx() * (1.0 + FIG1_M);
        let sol = oracle::solve(mu, FIG1_ALPHA, gb, FIG1_M).unwrap();
        let states = run(&fb, gb, FIG1_M, 512, false);
        let mut prev_gap = f64::INFINITY;
        for s in &states {
            let gap = s.report.energy.total - sol.energy.total;
            assert!(gap >= -slack, "viscosity undercuts oracle at mu={mu}, k={}: gap {gap}", s.k);
            assert!(gap <= prev_gap + 1e-10, "gap not shrinking at mu={mu}, k={}", s.k);
            worst_margin = worst_margin.min(gap + slack);
            prev_gap = gap;
        }
    }
    within_budget(t0, 60, "criterion 9");
    println!(
        "PASS criterion 9: 200 competitors dominated, viscosity gaps monotone within slack (worst margin {worst_margin:.4})"
    );
}
