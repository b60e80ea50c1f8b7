//! Acceptance gate: one `[PASS]` / `[FAIL]` line per criterion.
//!
//! Every criterion is evaluated and reported. The process exits non-zero on
//! a failed criterion only when `ACCEPTANCE_STRICT=1`, so that an honest
//! failure is visible in the report without masking the rest of the suite.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ma2certify_core::aux_certificate::{
    build_tau_field, certify, critical_point_residual, phi_field, AuxConfig, CaseLabel,
};
use ma2certify_core::eigenperturb::{conjugate_to_general, eigen2x2_closed_form, eigen_decompose, SymmetricMatrix};
use ma2certify_core::ma_solver::{
    identity_residuals, solve, solve_manufactured, DiscGrid, ExactSolutionSpec, ProblemSpec, SolutionField,
    SolverConfig,
};
use ma2certify_core::sweep::{fit_constants, run_eigcheck, run_sweep, EigcheckConfig, SweepConfig, SweepRecord};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn exp_radial(kappa: f64) -> ExactSolutionSpec {
    ExactSolutionSpec::ExponentialRadial { kappa }
}

fn solved(fam: &ExactSolutionSpec, radius: f64, h: f64) -> SolutionField {
    solve_manufactured(fam, radius, h, &SolverConfig::default()).expect("manufactured solve")
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> SymmetricMatrix {
    let mut data = vec![0.0; n * n];
    for p in 0..n {
        for q in p..n {
            let v: f64 = rng.gen_range(-1.0..1.0);
            data[p * n + q] = v;
            data[q * n + p] = v;
        }
    }
    SymmetricMatrix::new(n, data).unwrap()
}

fn eigen_oracle() -> Outcome {
    let start = Instant::now();
    let s = run_eigcheck(&EigcheckConfig::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        s.passed() && s.max_rel_err_first <= 1e-6 && s.max_rel_err_second <= 1e-4 && secs <= 10.0,
        format!(
            "{} diagonal draws over n in {{2,3,4}}: max rel err first {:.2e} (<= 1e-6), second {:.2e} (<= 1e-4), {} failures, {secs:.2} s (<= 10 s)",
            s.draws,
            s.max_rel_err_first,
            s.max_rel_err_second,
            s.failures.len()
        ),
    )
}

fn closed_form_cross_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut count, mut worst_val, mut worst_vec) = (0, 0.0f64, 0.0f64);
    while count < 1000 {
        let w = random_symmetric(&mut rng, 2);
        let generic = eigen_decompose(&w).unwrap();
        if generic.gap <= 1e-6 {
            continue;
        }
        count += 1;
        let closed = eigen2x2_closed_form(&w).unwrap();
        for k in 0..2 {
            worst_val = worst_val.max((closed.eigenvalues[k] - generic.eigenvalues[k]).abs());
            let (a, b) = (&closed.eigenvectors[k], &generic.eigenvectors[k]);
            let plus = (a[0] - b[0]).abs().max((a[1] - b[1]).abs());
            let minus = (a[0] + b[0]).abs().max((a[1] + b[1]).abs());
            worst_vec = worst_vec.max(plus.min(minus));
        }
    }
    outcome(
        worst_val <= 1e-12 && worst_vec <= 1e-12,
        format!("1000 random 2x2 (gap > 1e-6): max eigenvalue diff {worst_val:.2e}, max eigenvector diff up to sign {worst_vec:.2e} (<= 1e-12)"),
    )
}

fn taylor_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let eps = [1e-2, 1e-3];
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut directions = 0;
    while directions < 50 {
        let n = 3;
        let w = random_symmetric(&mut rng, n);
        let base = eigen_decompose(&w).unwrap();
        if base.gap_of(0) < 0.3 {
            continue;
        }
        directions += 1;
        let mut e = random_symmetric(&mut rng, n);
        let norm = e.max_abs();
        e = SymmetricMatrix::new(n, e.as_slice().iter().map(|v| v / norm).collect()).unwrap();
        let d = conjugate_to_general(&w, 0).unwrap();
        let (l1, t1) = d.first_directional(&e);
        let (l2, t2) = d.second_directional(&e);
        for &h in &eps {
            let exact = eigen_decompose(&w.perturbed(&e, h)).unwrap();
            let mut tau = exact.eigenvectors[0].clone();
            if tau.iter().zip(&base.eigenvectors[0]).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
                tau.iter_mut().for_each(|v| *v = -*v);
            }
            let lam = base.eigenvalues[0] + h * l1 + 0.5 * h * h * l2;
            let mut err = (lam - exact.eigenvalues[0]).abs();
            for i in 0..n {
                let t = base.eigenvectors[0][i] + h * t1[i] + 0.5 * h * h * t2[i];
                err = err.max((t - tau[i]).abs());
            }
            xs.push(h.ln());
            ys.push(err.ln());
        }
    }
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    outcome(
        slope >= 2.7,
        format!("50 random directions at random 3x3 (gap >= 0.3), eps in {{1e-2, 1e-3}}: observed order {slope:.3} (>= 2.7)"),
    )
}

fn solver_convergence() -> Outcome {
    let start = Instant::now();
    let hs = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let errs: Vec<f64> = hs.iter().map(|&h| solved(&exp_radial(1.0), 1.0, h).error_vs_exact().unwrap()).collect();
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let mut quad_err = 0.0f64;
    for fam in [
        ExactSolutionSpec::Quadratic { a: 2.0, b: 0.0, c: 1.0 },
        ExactSolutionSpec::Quadratic { a: 2.0, b: 0.5, c: 1.0 },
    ] {
        for &h in &[0.25, 0.1, 1.0 / 16.0, 1.0 / 64.0] {
            quad_err = quad_err.max(solved(&fam, 1.0, h).error_vs_exact().unwrap());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let in_band = ratios.iter().all(|r| (3.2..=4.8).contains(r));
    outcome(
        in_band && quad_err <= 1e-10 && secs <= 120.0,
        format!(
            "exp-radial k=1 R=1 errors {:.3e}, {:.3e}, {:.3e}, ratios {:.3}, {:.3} (in [3.2, 4.8]); quadratic max error {quad_err:.1e} (<= 1e-10); {secs:.1} s (<= 120 s)",
            errs[0], errs[1], errs[2], ratios[0], ratios[1]
        ),
    )
}

fn identity_residual_study() -> Outcome {
    let hs = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let r = 1.0 / std::f64::consts::SQRT_2;
    let res: Vec<[f64; 3]> =
        hs.iter().map(|&h| identity_residuals(&solved(&exp_radial(1.0), 1.0, h), r).unwrap().as_array()).collect();
    let mut min_ratio = f64::INFINITY;
    for w in res.windows(2) {
        for k in 0..3 {
            min_ratio = min_ratio.min(w[0][k] / w[1][k]);
        }
    }
    // Quadratic data on a dyadic lattice is exactly representable, so its
    // discrete jets vanish identically.
    let quad = ExactSolutionSpec::Quadratic { a: 2.0, b: 0.0, c: 1.0 };
    let mut exact_quad = 0.0f64;
    let mut solved_quad = 0.0f64;
    let mut floor = 0.0f64;
    for &h in &hs {
        let spec = ProblemSpec::manufactured(&quad, h);
        let exact = SolutionField::from_exact(spec.clone()).unwrap().unwrap();
        exact_quad = exact_quad.max(identity_residuals(&exact, r).unwrap().as_array().into_iter().fold(0.0, f64::max));
        let sol = solve(&spec, &SolverConfig::default()).unwrap();
        let v = identity_residuals(&sol, r).unwrap().as_array().into_iter().fold(0.0, f64::max);
        solved_quad = solved_quad.max(v);
        // Fourth differences amplify nodal rounding by about 16/h⁴.
        let sup_u = sol.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        floor = floor.max(v / (16.0 * f64::EPSILON * sup_u.max(1.0) / h.powi(4)));
    }
    outcome(
        min_ratio >= 1.5 && exact_quad == 0.0 && floor <= 1.0,
        format!(
            "exp-radial over B_r: (first, s11, s12) = {:.2e}/{:.2e}/{:.2e} -> {:.2e}/{:.2e}/{:.2e} -> {:.2e}/{:.2e}/{:.2e}, min step ratio {min_ratio:.2} (>= 1.5); quadratic on exact data {exact_quad:e} (== 0), on solved data {solved_quad:.1e} = {floor:.3} x rounding floor 16 eps |u| / h^4",
            res[0][0], res[0][1], res[0][2], res[1][0], res[1][1], res[1][2], res[2][0], res[2][1], res[2][2]
        ),
    )
}

trait Manufactured {
    fn manufactured(fam: &ExactSolutionSpec, h: f64) -> ProblemSpec;
}

impl Manufactured for ProblemSpec {
    fn manufactured(fam: &ExactSolutionSpec, h: f64) -> ProblemSpec {
        ProblemSpec::manufacture(fam, DiscGrid::new(1.0, h).unwrap()).unwrap()
    }
}

fn eta_sigma_invariants() -> Outcome {
    let families = [
        ExactSolutionSpec::Quadratic { a: 2.0, b: 0.0, c: 1.0 },
        ExactSolutionSpec::Quadratic { a: 1.0, b: 0.0, c: 1.0 },
        ExactSolutionSpec::Quadratic { a: 2.0, b: 0.5, c: 1.0 },
        exp_radial(0.5),
        exp_radial(1.0),
        exp_radial(2.0),
        ExactSolutionSpec::Tilted { a: 2.0, b: 0.3, c: 1.0, eps: 0.05, omega: [2.0, 1.0] },
    ];
    let (mut runs, mut failed) = (0, Vec::new());
    let mut worst_defect = 0.0f64;
    for fam in &families {
        for radius in [0.5, 1.0] {
            for res in [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
                let sol = solved(fam, radius, res * radius);
                let cfg = AuxConfig::for_solution(&sol);
                let rep = certify(&sol, &cfg).unwrap();
                runs += 1;
                let r4 = cfg.r.powi(4);
                worst_defect = worst_defect.max(rep.invariants.rotation_defect / r4);
                if !rep.invariants.all_pass() {
                    failed.push(format!("{} R={radius} h/R={res}", fam.params_string()));
                }
            }
        }
    }
    outcome(
        failed.is_empty(),
        format!(
            "{runs} manufactured runs (7 families x R in {{0.5, 1}} x h/R in {{1/16, 1/32, 1/64}}): 0 < eta <= r^4, B_r in Sigma in B_R, bit-identical tau-sign invariance, rotation defect max {worst_defect:.1e} r^4 (<= 1e-10 r^4); failures: {failed:?}"
        ),
    )
}

fn critical_point_certificate() -> Outcome {
    let hs = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
    let mut norms = Vec::new();
    let mut lines = Vec::new();
    for &h in &hs {
        let sol = solved(&exp_radial(1.0), 1.0, h);
        let rep = certify(&sol, &AuxConfig::for_solution(&sol)).unwrap();
        match (rep.residuals.cp1, rep.residuals.cp2) {
            (Some(a), Some(b)) => {
                norms.push(a.hypot(b));
                let refined = rep.refined_max.map(|m| m.residual[0].hypot(m.residual[1]));
                lines.push(format!(
                    "h=1/{}: x0=({:.4}, {:.4}) |cp|={:.3e} (sub-grid diagnostic {})",
                    (1.0 / h).round(),
                    rep.x0[0],
                    rep.x0[1],
                    a.hypot(b),
                    refined.map_or("n/a".into(), |v| format!("{v:.3e}"))
                ));
            }
            _ => lines.push(format!("h=1/{}: not checkable {:?}", (1.0 / h).round(), rep.notes)),
        }
    }
    let floor = 1e-12;
    let monotone = norms.len() == hs.len()
        && norms.windows(2).all(|w| w[1] < w[0] || (w[0] <= floor && w[1] <= floor));
    let converged = norms.last().copied().unwrap_or(f64::NAN);

    // Negative control: quadratic diag(2, 1) evaluated at an off-centre node.
    let quad = ExactSolutionSpec::Quadratic { a: 2.0, b: 0.0, c: 1.0 };
    let sol = solved(&quad, 1.0, 1.0 / 16.0);
    let cfg = AuxConfig::for_solution(&sol);
    let tau = build_tau_field(&sol, &cfg);
    let phi = phi_field(&sol, &tau, &cfg);
    let node = sol.problem.grid.index_of(4, 2).unwrap();
    let control = critical_point_residual(&sol, &tau, &phi, &cfg, node).unwrap();
    let control_norm = control[0].hypot(control[1]);
    let centre = critical_point_residual(&sol, &tau, &phi, &cfg, sol.problem.grid.origin()).unwrap();
    let detected = control_norm > 10.0 * converged;
    outcome(
        monotone && detected,
        format!(
            "exp-radial k=1 R=1 at the grid argmax: {}; monotone decrease: {monotone}. Negative control at x=(0.25, 0.125): |cp|={control_norm:.3e} vs 10 x converged {:.3e}: detected {detected} (at the centre |cp|={:.1e})",
            lines.join("; "),
            10.0 * converged,
            centre[0].hypot(centre[1])
        ),
    )
}

/// sup |∇f| over the closed disc for the exponential-radial family, where
/// |∇f|(ρ) = 2κρ e^{κρ²}(2 + κρ²) increases in ρ.
fn sup_grad_f_exp(kappa: f64, radius: f64) -> f64 {
    2.0 * kappa * radius * (kappa * radius * radius).exp() * (2.0 + kappa * radius * radius)
}

fn kappa_sweep_config(resolutions: &[f64]) -> SweepConfig {
    serde_json::from_value(serde_json::json!({
        "families": [{
            "id": "exp_radial",
            "vary": {"base": {"family": "exponential_radial", "params": {"kappa": 1.0}},
                     "param": "kappa", "values": [0.5, 0.75, 1.0, 1.5, 2.0]}
        }],
        "radii": [1.0],
        "resolutions": resolutions,
    }))
    .unwrap()
}

fn empirical_bound() -> Outcome {
    let start = Instant::now();
    let cfg = kappa_sweep_config(&[1.0 / 32.0, 1.0 / 64.0]);
    let records = run_sweep(&cfg).unwrap();
    let finest: Vec<SweepRecord> = records.iter().filter(|r| r.h == 1.0 / 64.0).cloned().collect();
    let fit = fit_constants(&finest);
    let secs = start.elapsed().as_secs_f64();
    let Ok(fit) = fit else {
        return outcome(false, format!("fit failed: {:?}", fit.err()));
    };
    let mut case_ok = true;
    for r in &records {
        let kappa: f64 = r.params.trim_start_matches("kappa=").parse().unwrap();
        let rr = r.radius / std::f64::consts::SQRT_2;
        let sup_du = r.sup_du.unwrap();
        let threshold = 1e3
            * (1.0 + r.big_m + rr * sup_grad_f_exp(kappa, r.radius) + (r.big_m / r.m) * (sup_du / rr))
            * rr.powi(4);
        let label = if r.eta_lambda.unwrap() <= threshold { CaseLabel::A } else { CaseLabel::B };
        case_ok &= r.case == Some(label) && (r.threshold.unwrap() - threshold).abs() <= 1e-9 * threshold;
    }
    let bound = 32.0 / fit.class.m + 2.0;
    outcome(
        fit.min_slack >= 0.0 && fit.c2_hat_r <= bound && case_ok && secs <= 300.0,
        format!(
            "k in {{0.5, 0.75, 1, 1.5, 2}}, R=1, h=1/64: {} records, min slack {:.2e} (>= 0), C2 over s_r {:.3e} (LS slope {:.2e}) <= 32/m + 2 = {bound}, C1 {:.4}; case labels match recomputed threshold on all {} records: {case_ok}; {secs:.1} s (<= 300 s)",
            fit.records, fit.min_slack, fit.c2_hat_r, fit.c2_least_squares, fit.c1_hat, records.len()
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = serde_json::to_value(kappa_sweep_config(&[1.0 / 16.0, 1.0 / 32.0])).unwrap();
    cfg["families"].as_array_mut().unwrap().push(serde_json::json!({
        "id": "quadratic",
        "members": [{"family": "quadratic", "params": {"a": 2.0, "b": 0.0, "c": 1.0}},
                    {"family": "quadratic", "params": {"a": 1.0, "b": 2.0, "c": 1.0}}]
    }));
    let path = dir.path().join("sweep.json");
    std::fs::write(&path, serde_json::to_vec_pretty(&cfg).unwrap()).unwrap();
    let run = |out: &Path, jobs: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_ma2certify"))
            .args(["sweep", path.to_str().unwrap(), "--jobs", jobs, "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        (std::fs::read(out.join("records.csv")).unwrap(), std::fs::read(out.join("summary.json")).unwrap(), status)
    };
    let (csv_a, json_a, out_a) = run(&dir.path().join("a"), "4");
    let (csv_b, json_b, _) = run(&dir.path().join("b"), "1");
    let rows = csv_a.iter().filter(|&&b| b == b'\n').count() - 1;
    outcome(
        csv_a == csv_b && json_a == json_b && out_a.status.success(),
        format!(
            "two `ma2certify sweep` runs ({rows} records incl. a NotConvex member, --jobs 4 vs --jobs 1): CSV identical {}, JSON identical {} ({} + {} bytes)",
            csv_a == csv_b,
            json_a == json_b,
            csv_a.len(),
            json_a.len()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("Eigenperturb oracle agreement", eigen_oracle),
        ("Closed-form cross-check", closed_form_cross_check),
        ("Taylor consistency", taylor_consistency),
        ("Solver convergence", solver_convergence),
        ("Identity residuals", identity_residual_study),
        ("eta/Sigma invariants", eta_sigma_invariants),
        ("Critical-point certificate", critical_point_certificate),
        ("Empirical bound", empirical_bound),
        ("Determinism", determinism),
    ];
    let mut passed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        passed += o.pass as usize;
        println!("[{tag}] {name}: {} [{:.1} s]", o.detail, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed < criteria.len() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
