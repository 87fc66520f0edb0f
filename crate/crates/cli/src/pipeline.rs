//! Command implementations: each builds core objects from the config,
//! runs the computation, writes CSV/JSON artifacts into the output
//! directory and reports pass/fail of its configured checks.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use bv1d_core::bv_model::{Grid1D, Interval};
use bv1d_core::integrand::{NonAutonomousIntegrand, SampleSpec, VerifyOverrides};
use bv1d_core::oracle::{self, OracleKind, OracleSolution};
use bv1d_core::probe::{self, JumpDetectConfig, JumpOutcome};
use bv1d_core::viscosity::{run_sequence, SolverError, ViscosityConfig, ViscosityState};

use crate::config::{Command, RunConfig};
use crate::out::{fmt_f64, write_bv_csv, write_csv_matrix, write_text, Json};

#[derive(Debug)]
pub enum PipelineError {
    Io(io::Error),
    Solver(String),
    Domain(String),
    ChecksFailed(Vec<String>),
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::Io(e) => write!(f, "io error: {e}"),
            PipelineError::Solver(s) => write!(f, "solver failure: {s}"),
            PipelineError::Domain(s) => write!(f, "domain error: {s}"),
            PipelineError::ChecksFailed(v) => {
                write!(f, "{} check(s) failed: {}", v.len(), v.join("; "))
            }
        }
    }
}

impl std::error::Error for PipelineError {}

impl From<io::Error> for PipelineError {
    fn from(e: io::Error) -> Self {
        PipelineError::Io(e)
    }
}

fn solver_err(cfg: &RunConfig, e: SolverError) -> PipelineError {
    PipelineError::Solver(format!(
        "(mu={}, alpha={}, M={}, grid=2^{}): {e}",
        cfg.mu, cfg.alpha, cfg.m, cfg.grid_exp
    ))
}

/// Run the configured command; `Ok` means every configured check passed.
pub fn run(cfg: &RunConfig) -> Result<(), PipelineError> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    write_text(&cfg.out_dir.join("config.txt"), &cfg.echo())?;
    match cfg.command {
        Command::Solve => cmd_solve(cfg),
        Command::Oracle => cmd_oracle(cfg).map(|_| ()),
        Command::Verify => cmd_verify(cfg),
        Command::Probe => cmd_probe(cfg),
        Command::Figure1 => cmd_figure1(cfg),
        Command::Sweep => cmd_sweep(cfg),
    }
}

fn integrand_of(cfg: &RunConfig) -> Result<NonAutonomousIntegrand, PipelineError> {
    NonAutonomousIntegrand::example(cfg.mu, cfg.alpha, cfg.domain.0, cfg.domain.1)
        .map_err(|e| PipelineError::Domain(e.to_string()))
}

fn grid_of(cfg: &RunConfig) -> Result<Grid1D, PipelineError> {
    Grid1D::new(cfg.domain.0, cfg.domain.1, 1usize << cfg.grid_exp)
        .map_err(|e| PipelineError::Domain(e.to_string()))
}

fn run_tag(cfg: &RunConfig) -> String {
    format!("run_mu{}_alpha{}_M{}_g{}", cfg.mu, cfg.alpha, cfg.m, cfg.grid_exp)
}

fn viscosity_cfg(cfg: &RunConfig, grid: Grid1D) -> ViscosityConfig {
    let mut v = ViscosityConfig::new(grid, (0.0, cfg.m), cfg.k_max);
    v.newton_tol = cfg.newton_tol;
    v.newton_max_iter = cfg.newton_max_iter;
    v
}

fn state_json(s: &ViscosityState) -> String {
    Json::object()
        .int("k", s.k as i64)
        .num("A_k", s.a_k)
        .num("eps_k", s.eps_k)
        .num("flux_C", s.flux_c)
        .num("flux_residual", s.report.flux_residual)
        .num("el_residual", s.report.el_residual)
        .num("gradient_linf", s.report.gradient_linf)
        .num("newton_linf_dist", s.report.newton_linf_dist)
        .obj(
            "energy",
            Json::object()
                .num("ac_part", s.report.energy.ac_part)
                .num("jump_part", s.report.energy.jump_part)
                .num("boundary_part", s.report.energy.boundary_part)
                .num("total", s.report.energy.total),
        )
        .pairs("lp_norms", ("p", "norm"), &s.report.lp_norms)
        .finish()
}

fn write_state_csv(path: &Path, s: &ViscosityState) -> io::Result<()> {
    let g = s.u.grid();
    let mut text = String::from("x,u,slope\n");
    for i in 0..=g.m() {
        // last row repeats the final cell slope so every row has one
        let slope = s.u.slope(if i == g.m() { i - 1 } else { i });
        text.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(g.node(i)),
            fmt_f64(s.u.values()[i]),
            fmt_f64(slope)
        ));
    }
    write_text(path, &text)
}

fn cmd_solve(cfg: &RunConfig) -> Result<(), PipelineError> {
    let f = integrand_of(cfg)?;
    let grid = grid_of(cfg)?;
    let states = run_sequence(&f, &viscosity_cfg(cfg, grid)).map_err(|e| solver_err(cfg, e))?;
    let dir = cfg.out_dir.join(run_tag(cfg));
    for s in &states {
        write_state_csv(&dir.join(format!("k{}.csv", s.k)), s)?;
        write_text(&dir.join(format!("k{}.json", s.k)), &state_json(s))?;
    }
    println!("solve: wrote {} states to {}", states.len(), dir.display());
    Ok(())
}

fn oracle_json(sol: &OracleSolution, diag: &oracle::M0Computation) -> String {
    let kind = match sol.kind {
        OracleKind::Sobolev => "sobolev",
        OracleKind::Jump => "jump",
        OracleKind::Degenerate => "degenerate",
    };
    let mut j = Json::object()
        .num("mu", sol.mu)
        .num("alpha", sol.alpha)
        .num("M", sol.m)
        .num("M0", sol.m0)
        .str("kind", kind);
    j = match sol.c {
        Some(c) => j.num("C", c),
        None => j.str("C", "none"),
    };
    j.num("jump_size", sol.jump_size)
        .obj(
            "energy",
            Json::object()
                .num("ac_part", sol.energy.ac_part)
                .num("jump_part", sol.energy.jump_part)
                .num("boundary_part", sol.energy.boundary_part)
                .num("total", sol.energy.total),
        )
        .obj(
            "quadrature",
            Json::object()
                .num("route_generic", diag.route_generic)
                .num("route_closed", diag.route_closed)
                .num("route_graded", diag.route_graded)
                .num("rel_disagreement", diag.rel_disagreement)
                .int("panels", diag.panels as i64),
        )
        .finish()
}

fn cmd_oracle(cfg: &RunConfig) -> Result<Option<OracleSolution>, PipelineError> {
    let grid = grid_of(cfg)?;
    let diag = oracle::compute_m0_detailed(cfg.mu, cfg.alpha)
        .map_err(|e| PipelineError::Domain(e.to_string()))?;
    let kind = oracle::classify(cfg.mu, cfg.alpha, cfg.m)
        .map_err(|e| PipelineError::Domain(e.to_string()))?;
    if kind == OracleKind::Degenerate {
        // flagged, never resolved
        let j = Json::object()
            .num("mu", cfg.mu)
            .num("alpha", cfg.alpha)
            .num("M", cfg.m)
            .num("M0", diag.value)
            .str("kind", "degenerate")
            .finish();
        write_text(&cfg.out_dir.join("oracle.json"), &j)?;
        println!("oracle: degenerate datum M = M0, flagged");
        return Ok(None);
    }
    let sol = oracle::solve(cfg.mu, cfg.alpha, grid, cfg.m)
        .map_err(|e| PipelineError::Domain(e.to_string()))?;
    write_text(&cfg.out_dir.join("oracle.json"), &oracle_json(&sol, &diag))?;
    write_bv_csv(&cfg.out_dir.join("oracle_minimizer.csv"), &sol.minimizer)?;
    println!(
        "oracle: kind={} M0={} jump={}",
        match sol.kind {
            OracleKind::Sobolev => "sobolev",
            OracleKind::Jump => "jump",
            OracleKind::Degenerate => "degenerate",
        },
        fmt_f64(sol.m0),
        fmt_f64(sol.jump_size)
    );
    Ok(Some(sol))
}

fn cmd_verify(cfg: &RunConfig) -> Result<(), PipelineError> {
    let f = integrand_of(cfg)?;
    let rep = bv1d_core::integrand::verify_hypotheses(
        &f,
        &SampleSpec::default_z(),
        &SampleSpec::default_x(cfg.domain.0, cfg.domain.1),
        cfg.seed,
        VerifyOverrides::default(),
    );
    let j = Json::object()
        .num("mu", cfg.mu)
        .num("alpha", cfg.alpha)
        .num("c0", rep.c0)
        .num("c1", rep.c1)
        .num("c2", rep.c2)
        .num("lambda", rep.lambda)
        .num("hoelder_C", rep.hoelder_c)
        .num("hoelder_observed", rep.hoelder_observed)
        .bool("h1_pass", rep.h1_pass)
        .bool("h2_pass", rep.h2_pass)
        .bool("h3_pass", rep.h3_pass)
        .int("seed", rep.seed as i64)
        .int("samples_checked", rep.samples_checked as i64)
        .finish();
    write_text(&cfg.out_dir.join("hypotheses.json"), &j)?;
    for (name, pass) in [("H1", rep.h1_pass), ("H2", rep.h2_pass), ("H3", rep.h3_pass)] {
        println!("{}: {name} growth/ellipticity/Hoelder check", if pass { "PASS" } else { "FAIL" });
    }
    if rep.all_pass() {
        Ok(())
    } else {
        Err(PipelineError::ChecksFailed(vec!["hypothesis verification".into()]))
    }
}

struct ProbeArtifacts {
    states: Vec<ViscosityState>,
    jump: JumpOutcome,
    checks: Vec<(String, bool)>,
    /// (k, fractional diagnostics) over the tail states
    frac_tail: Vec<(u32, probe::NikolskiiReport)>,
}

fn probe_core(cfg: &RunConfig, newton_verify: bool) -> Result<ProbeArtifacts, PipelineError> {
    let f = integrand_of(cfg)?;
    let grid = grid_of(cfg)?;
    let mut vcfg = viscosity_cfg(cfg, grid);
    vcfg.verify_with_newton = newton_verify;
    let t = probe::thresholds(cfg.mu, cfg.alpha, 1);
    let p_list: Vec<f64> = vec![1.0, 0.5 * (1.0 + t.p_max.max(1.0)), 1.05, 1.2];
    vcfg.lp_probe = p_list.clone();
    let states = run_sequence(&f, &vcfg).map_err(|e| solver_err(cfg, e))?;

    // lp sweep across the full domain
    let full = Interval::new(grid.a(), grid.b());
    let sweep = probe::lp_sweep(&states, &p_list, full);
    let mut header: Vec<String> = vec!["k".into()];
    header.extend(p_list.iter().map(|p| format!("p{p}")));
    let rows: Vec<Vec<f64>> = sweep
        .rows
        .iter()
        .map(|(k, vals)| {
            let mut row = vec![*k as f64];
            row.extend_from_slice(vals);
            row
        })
        .collect();
    write_csv_matrix(&cfg.out_dir.join("lp_sweep.csv"), &header, &rows)?;

    // fractional diagnostics of the tail gradient fields: Nikolskii at
    // theta = alpha/2, plus the weighted quantity when a kappa exists
    let k_win = Interval::new(0.5 * grid.a(), 0.5 * grid.b());
    let h_steps = probe::default_h_steps(grid.dx(), 0.5 * (grid.b() - grid.a()));
    let kappa = t.kappa_interval.map(|(lo, hi)| 0.5 * (lo + hi));
    let tail_from = states.len().saturating_sub(4);
    let mut frac_tail: Vec<(u32, probe::NikolskiiReport)> = Vec::new();
    for s in &states[tail_from..] {
        let slopes = s.u.slopes();
        let field = probe::SampledField::of_slopes(&slopes, grid.a(), grid.dx());
        let rep = match kappa {
            Some(kp) => probe::fractional_report(
                &field,
                cfg.alpha / 2.0,
                kp,
                cfg.mu,
                cfg.alpha,
                k_win,
                &h_steps,
                8,
            ),
            None => probe::nikolskii_seminorm(&field, cfg.alpha / 2.0, k_win, &h_steps),
        };
        frac_tail.push((s.k, rep));
    }
    let nik = &frac_tail.last().unwrap().1;
    write_csv_matrix(
        &cfg.out_dir.join("nikolskii.csv"),
        &["h".into(), "seminorm".into()],
        &nik.per_h.iter().map(|&(h, v)| vec![h, v]).collect::<Vec<_>>(),
    )?;

    // jump detection
    let windows = probe::default_windows(grid.dx(), grid.b() - grid.a());
    let jump = probe::jump_detect(&f, &states, &windows, &JumpDetectConfig::default());

    // configured checks
    let mut checks: Vec<(String, bool)> = Vec::new();
    let kind = oracle::classify(cfg.mu, cfg.alpha, cfg.m)
        .map_err(|e| PipelineError::Domain(e.to_string()))?;
    match (&jump, kind) {
        (JumpOutcome::Jump { size, location, .. }, OracleKind::Jump) => {
            let m0 = oracle::compute_m0(cfg.mu, cfg.alpha).unwrap();
            let rel = ((size - (cfg.m - m0)) / (cfg.m - m0)).abs();
            checks.push((
                format!(
                    "jump size {} within {}% of oracle {}",
                    fmt_f64(*size),
                    cfg.jump_rel_tol * 100.0,
                    fmt_f64(cfg.m - m0)
                ),
                rel <= cfg.jump_rel_tol,
            ));
            checks.push(("jump located at the weight minimum".into(), location.abs() <= grid.dx()));
        }
        (JumpOutcome::NoJump { .. }, OracleKind::Sobolev) => {
            checks.push(("no spurious jump in the Sobolev regime".into(), true));
        }
        (JumpOutcome::Jump { .. }, OracleKind::Sobolev) => {
            checks.push(("no spurious jump in the Sobolev regime".into(), false));
        }
        (JumpOutcome::NoJump { .. }, OracleKind::Jump) => {
            checks.push(("jump detected in the jump regime".into(), false));
        }
        (_, OracleKind::Degenerate) => {}
    }
    // stability of the sub-threshold L^p integral when p_max > 1
    if t.p_max > 1.05 {
        let ratios = sweep.ratios(2); // p = 1.05
        let last_ratio = ratios.last().copied().unwrap_or(1.0);
        checks.push((
            format!("L^1.05 gradient integral stable (last ratio {})", fmt_f64(last_ratio)),
            last_ratio <= cfg.stable_ratio,
        ));
    }
    // boundedness of the fractional quantities where the theory gives a
    // kappa, i.e. in the Sobolev-regularity regime
    if kappa.is_some() && frac_tail.len() >= 2 {
        let spread = |vals: &[f64]| {
            vals.iter().cloned().fold(0.0f64, f64::max)
                / vals.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        let wf: Vec<f64> =
            frac_tail.iter().filter_map(|(_, r)| r.weighted_quantity).collect();
        let niks: Vec<f64> = frac_tail.iter().map(|(_, r)| r.sup).collect();
        let wf_spread = spread(&wf);
        let nik_spread = spread(&niks);
        checks.push((
            format!(
                "fractional quantities bounded across the tail (spreads {} / {})",
                fmt_f64(wf_spread),
                fmt_f64(nik_spread)
            ),
            wf_spread <= cfg.fractional_stable && nik_spread <= cfg.fractional_stable,
        ));
    }
    Ok(ProbeArtifacts { states, jump, checks, frac_tail })
}

fn jump_json(jump: &JumpOutcome) -> String {
    match jump {
        JumpOutcome::Jump { location, size, accepted, per_k, .. } => Json::object()
            .str("outcome", "jump")
            .num("location", *location)
            .num("size", *size)
            .bool("accepted", *accepted)
            .pairs(
                "per_k",
                ("k", "size"),
                &per_k.iter().map(|&(k, v)| (k as f64, v)).collect::<Vec<_>>(),
            )
            .finish(),
        JumpOutcome::NoJump { j_last, threshold, .. } => Json::object()
            .str("outcome", "nojump")
            .num("j_last", *j_last)
            .num("threshold", *threshold)
            .finish(),
    }
}

fn finish_checks(
    cfg: &RunConfig,
    checks: &[(String, bool)],
    summary_extra: Json,
) -> Result<(), PipelineError> {
    let mut failed = Vec::new();
    let mut j = summary_extra;
    for (i, (name, pass)) in checks.iter().enumerate() {
        println!("{}: {name}", if *pass { "PASS" } else { "FAIL" });
        j = j.bool(&format!("check_{i}"), *pass);
        if !pass {
            failed.push(name.clone());
        }
    }
    write_text(&cfg.out_dir.join("summary.json"), &j.finish())?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(PipelineError::ChecksFailed(failed))
    }
}

fn cmd_probe(cfg: &RunConfig) -> Result<(), PipelineError> {
    let art = probe_core(cfg, true)?;
    write_text(&cfg.out_dir.join("jump.json"), &jump_json(&art.jump))?;
    let last = art.states.last().unwrap();
    write_state_csv(&cfg.out_dir.join("solution.csv"), last)?;
    let t = probe::thresholds(cfg.mu, cfg.alpha, 1);
    let last_frac = &art.frac_tail.last().unwrap().1;
    let mut summary = Json::object()
        .num("mu", cfg.mu)
        .num("alpha", cfg.alpha)
        .num("M", cfg.m)
        .int("k_max", cfg.k_max as i64)
        .int("states", art.states.len() as i64)
        .num("p_max", t.p_max)
        // p_max <= 1 means the integrability statement is empty here;
        // the sweep still shows the p > 1 blow-up
        .str("regime", if t.p_max > 1.0 { "integrable" } else { "vacuous" })
        .num("nikolskii_sup", last_frac.sup);
    if let (Some(kp), Some(wq)) = (last_frac.kappa, last_frac.weighted_quantity) {
        summary = summary.num("kappa", kp).num("weighted_quantity", wq);
    }
    finish_checks(cfg, &art.checks, summary)
}

fn cmd_figure1(cfg: &RunConfig) -> Result<(), PipelineError> {
    let sol = cmd_oracle(cfg)?.expect("figure1 parameters are not degenerate");
    let art = probe_core(cfg, true)?;
    write_text(&cfg.out_dir.join("jump.json"), &jump_json(&art.jump))?;
    let last = art.states.last().unwrap();
    write_state_csv(&cfg.out_dir.join("solution.csv"), last)?;
    for s in &art.states {
        write_state_csv(&cfg.out_dir.join(format!("k{}.csv", s.k)), s)?;
        write_text(&cfg.out_dir.join(format!("k{}.json", s.k)), &state_json(s))?;
    }

    let mut checks = art.checks.clone();
    // L1 distance between the last iterate and the oracle minimizer
    let grid = last.u.grid();
    let mut l1 = 0.0;
    for i in 0..grid.m() {
        let x = grid.midpoint(i);
        l1 += (last.u.eval_ac(x) - sol.minimizer.eval(x)).abs() * grid.dx();
    }
    let l1_bound = 0.01 * cfg.m * (grid.b() - grid.a());
    checks.push((
        format!("L1 distance to oracle {} <= {}", fmt_f64(l1), fmt_f64(l1_bound)),
        l1 <= l1_bound,
    ));
    let summary = Json::object()
        .num("mu", cfg.mu)
        .num("alpha", cfg.alpha)
        .num("M", cfg.m)
        .num("M0", sol.m0)
        .num("oracle_jump", sol.jump_size)
        .num("l1_distance", l1);
    finish_checks(cfg, &checks, summary)
}

fn cmd_sweep(cfg: &RunConfig) -> Result<(), PipelineError> {
    // parameter points in deterministic order
    let mut points = Vec::new();
    for &mu in &cfg.mu_list {
        for &alpha in &cfg.alpha_list {
            for &m in &cfg.m_list {
                points.push((mu, alpha, m));
            }
        }
    }
    let results: Mutex<Vec<(usize, String, Vec<f64>)>> = Mutex::new(Vec::new());
    let next: Mutex<usize> = Mutex::new(0);
    let errors: Mutex<Vec<String>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..cfg.jobs.min(points.len().max(1)) {
            scope.spawn(|| loop {
                let idx = {
                    let mut n = next.lock().unwrap();
                    if *n >= points.len() {
                        return;
                    }
                    let i = *n;
                    *n += 1;
                    i
                };
                let (mu, alpha, m) = points[idx];
                let mut point_cfg = cfg.clone();
                point_cfg.mu = mu;
                point_cfg.alpha = alpha;
                point_cfg.m = m;
                point_cfg.out_dir =
                    cfg.out_dir.join(format!("point_mu{mu}_alpha{alpha}_M{m}"));
                match sweep_point(&point_cfg) {
                    Ok(row) => {
                        let kind = row.0.clone();
                        results.lock().unwrap().push((idx, kind, row.1));
                    }
                    Err(e) => errors
                        .lock()
                        .unwrap()
                        .push(format!("(mu={mu}, alpha={alpha}, M={m}): {e}")),
                }
            });
        }
    });
    let errors = errors.into_inner().unwrap();
    if !errors.is_empty() {
        return Err(PipelineError::Solver(errors.join("; ")));
    }
    let mut rows = results.into_inner().unwrap();
    rows.sort_by_key(|r| r.0);
    let mut text = String::from("mu,alpha,M,M0,kind,jump_size,energy_total\n");
    for (idx, kind, vals) in rows {
        let (mu, alpha, m) = points[idx];
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(mu),
            fmt_f64(alpha),
            fmt_f64(m),
            fmt_f64(vals[0]),
            kind,
            fmt_f64(vals[1]),
            fmt_f64(vals[2])
        ));
    }
    write_text(&cfg.out_dir.join("summary.csv"), &text)?;
    println!("sweep: {} points -> {}", points.len(), cfg.out_dir.join("summary.csv").display());
    Ok(())
}

/// One sweep point: oracle classification + solution; returns
/// (kind, [M0, jump_size, energy_total]).
fn sweep_point(cfg: &RunConfig) -> Result<(String, Vec<f64>), PipelineError> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let kind = oracle::classify(cfg.mu, cfg.alpha, cfg.m)
        .map_err(|e| PipelineError::Domain(e.to_string()))?;
    if kind == OracleKind::Degenerate {
        let m0 = oracle::compute_m0(cfg.mu, cfg.alpha).unwrap();
        return Ok(("degenerate".into(), vec![m0, 0.0, f64::NAN]));
    }
    let sol = cmd_oracle(cfg)?.expect("degenerate handled above");
    let kind = match sol.kind {
        OracleKind::Sobolev => "sobolev",
        OracleKind::Jump => "jump",
        OracleKind::Degenerate => "degenerate",
    };
    Ok((kind.into(), vec![sol.m0, sol.jump_size, sol.energy.total]))
}

/// Used by tests: the path of the summary file a command writes.
pub fn summary_path(out_dir: &Path) -> PathBuf {
    out_dir.join("summary.json")
}
