//! Acceptance gate: eight end-to-end checks, one pass/fail line each.
//!
//! Runs without the libtest harness so the report is always printed; the
//! process exits nonzero when any check fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use hodgebench::bounds::{
    ellipsoid_cases, equality_case_diagnostics, induced_norm_bound, main_lower_bound, mesh_suite,
    parallel_restriction_check, special_killing_relation, sphere_suite, trace_free_norm_bound, upper_bound_degree_p,
    xia_bound, BallCase, GeometryCase, VerdictState,
};
use hodgebench::curvature::AnalyticSurface;
use hodgebench::exterior::{binomial, duality_identity_residual, induced_endomorphism, AlternatingForm};
use hodgebench::mesh::{
    discrete_shape, generate_ball, generate_ellipsoid, generate_icosphere, generate_torus, MeshComplex,
};
use hodgebench::reilly::{
    builtin_form, builtin_function, evaluate_classical_reilly, evaluate_reilly, residuals_nonincreasing,
    BoundaryModel, ConvergenceRow, ReillyOptions,
};
use hodgebench::spectrum::{spectrum_functions, spectrum_one_forms, sphere_hodge_oracle, Family, SpectrumOptions};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
    (&a + a.transpose()) * 0.5
}

/// The 200 matrices shared by the first two checks.
fn matrix_sweep() -> Vec<DMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..200).map(|i| random_symmetric(2 + i % 7, &mut rng)).collect()
}

fn subset_sums(eta: &[f64], p: usize) -> Vec<f64> {
    let n = eta.len();
    let mut sums: Vec<f64> = (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == p)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| eta[i]).sum())
        .collect();
    sums.sort_by(f64::total_cmp);
    sums
}

fn induced_operator_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for s in matrix_sweep() {
        let n = s.nrows();
        let eta: Vec<f64> = s.clone().symmetric_eigenvalues().iter().copied().collect();
        for p in 0..=n {
            let op = induced_endomorphism(&s, p).map_err(|e| e.to_string())?;
            let got = op.sorted_eigenvalues();
            let want = subset_sums(&eta, p);
            ensure(got.len() == want.len(), || format!("n={n} p={p}: {} vs {} eigenvalues", got.len(), want.len()))?;
            for (g, w) in got.iter().zip(&want) {
                worst = worst.max((g - w).abs());
            }
        }
        let top = induced_endomorphism(&s, n).map_err(|e| e.to_string())?;
        let exact = top.matrix().nrows() == 1 && top.matrix()[(0, 0)] == s.trace();
        ensure(exact, || format!("S^[{n}] is {} but trace is {}", top.matrix(), s.trace()))?;
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-10, || format!("eigenvalue gap {worst:e}"))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("max gap {worst:.1e}, top degree exact, {elapsed:.2?}"))
}

fn duality_identity() -> Outcome {
    let mut worst = 0.0f64;
    for s in matrix_sweep() {
        for p in 0..=s.nrows() {
            worst = worst.max(duality_identity_residual(&s, p).map_err(|e| e.to_string())?);
        }
    }
    ensure(worst <= 1e-10, || format!("residual {worst:e}"))?;
    Ok(format!("max residual {worst:.1e}"))
}

fn sphere_spectrum() -> Outcome {
    let start = Instant::now();
    let mesh = generate_icosphere(4, 1.0);
    ensure(mesh.vertices().len() == 2562, || format!("{} vertices", mesh.vertices().len()))?;
    let opts = SpectrumOptions { k: 10, ..SpectrumOptions::default() };
    let functions = spectrum_functions(&mesh, &opts).map_err(|e| e.to_string())?;
    let cluster = functions.first_positive_cluster().ok_or("no positive eigenvalue")?;
    ensure((cluster.value - 2.0).abs() <= 0.02 * 2.0, || format!("λ₁ = {}", cluster.value))?;
    ensure(cluster.multiplicity == 3, || format!("multiplicity {}", cluster.multiplicity))?;
    let lambda0 = functions.lowest(Family::Coexact).ok_or("no positive function eigenvalue")?;
    let one_forms = spectrum_one_forms(&mesh, &opts).map_err(|e| e.to_string())?;
    let lambda1 = one_forms.lowest(Family::Exact).ok_or("no exact 1-form eigenvalue")?;
    let rel = (lambda1 - lambda0).abs() / lambda0;
    ensure(rel <= 1e-8, || format!("exact 1-form {lambda1} vs function {lambda0}"))?;
    for n in 1..=10 {
        for p in 1..=n {
            let got = sphere_hodge_oracle(n, p).map_err(|e| e.to_string())?;
            let want = ((p * (n - p + 1)) as f64, binomial(n + 1, p));
            ensure(got == want, || format!("n={n} p={p}: {got:?}"))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("λ₁ = {:.6} ×{}, paths agree to {rel:.1e}, {elapsed:.1?}", cluster.value, cluster.multiplicity))
}

fn analytic_ball() -> ReillyOptions {
    ReillyOptions::with_boundary(BoundaryModel::Analytic {
        surface: AnalyticSurface::sphere(vec![0.0; 3], 1.0),
    })
}

fn classical_identity() -> Outcome {
    let opts = analytic_ball();
    let x1 = builtin_function("x1").map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    for s in 1..=3 {
        let l = evaluate_classical_reilly(&generate_ball(s), &x1, &opts).map_err(|e| e.to_string())?;
        rows.push(ConvergenceRow::from_classical(s, &l));
    }
    let last = rows.last().expect("three levels");
    ensure(last.residual.abs() <= 0.05 * 4.0 * PI, || format!("x₁ residual {}", last.residual))?;
    // x₁ has a vanishing ledger by symmetry, so the quadrature residual sits
    // at rounding level; the surface-Laplacian path carries the trend
    ensure(residuals_nonincreasing(&rows, 1e-12), || format!("residuals grew: {rows:?}"))?;
    let dec: Vec<f64> = rows.iter().map(|r| r.residual_dec.map(f64::abs)).collect::<Option<_>>().ok_or("no DEC path")?;
    ensure(dec.windows(2).all(|w| w[1] < w[0]), || format!("DEC residuals {dec:?}"))?;

    let q = builtin_function("half_norm_sq").map_err(|e| e.to_string())?;
    let l = evaluate_classical_reilly(&generate_ball(3), &q, &opts).map_err(|e| e.to_string())?;
    let vol = 4.0 * PI / 3.0;
    // Δf = 3 up to sign, Hess f = Id, S = Id and f_N = -1 on the sphere
    let checks = [
        ("∫(Δf)²", l.laplacian_sq, 9.0 * vol),
        ("∫|Hess f|²", l.hessian_sq, 3.0 * vol),
        ("∫nH f_N²", l.boundary_mean, 2.0 * 4.0 * PI),
        ("rhs", l.rhs, 9.0 * vol),
    ];
    for (name, got, want) in checks {
        ensure((got - want).abs() <= 0.05 * want, || format!("{name}: {got} vs {want}"))?;
    }
    ensure(l.boundary_laplacian.abs() <= 0.05 * vol && l.boundary_shape.abs() <= 0.05 * vol, || {
        format!("tangential terms {} {}", l.boundary_laplacian, l.boundary_shape)
    })?;
    Ok(format!("x₁ residual {:.1e}, DEC residuals {:.2e} → {:.2e}; ‖x‖²/2 within 5%", last.residual, dec[0], dec[2]))
}

fn form_identity() -> Outcome {
    let mesh = generate_ball(3);
    let vol = mesh.volume();
    let l = evaluate_reilly(&mesh, &builtin_form("x2dx1").map_err(|e| e.to_string())?, &analytic_ball())
        .map_err(|e| e.to_string())?;
    ensure(l.relative_residual <= 0.05, || format!("x₂dx₁ relative residual {}", l.relative_residual))?;
    let mut worst_cancel = 0.0f64;
    for name in ["dx1", "dx1^dx2", "dx1^dx2^dx3"] {
        let w = builtin_form(name).map_err(|e| e.to_string())?;
        for opts in [analytic_ball(), ReillyOptions::default()] {
            let p = evaluate_reilly(&mesh, &w, &opts).map_err(|e| e.to_string())?;
            ensure(p.interior_max() <= 1e-3 * vol, || format!("{name}: interior {}", p.interior_max()))?;
            let scale = p.cross_term.abs().max(p.boundary_term.abs());
            let gap = (p.cross_term + p.boundary_term).abs();
            ensure(gap <= 0.05 * scale, || format!("{name} ({}): {} + {}", opts.boundary.name(), p.cross_term, p.boundary_term))?;
            if scale > 0.0 {
                worst_cancel = worst_cancel.max(gap / scale);
            }
        }
    }
    Ok(format!("x₂dx₁ relative residual {:.2e}; parallel boundary gap ≤ {worst_cancel:.2e}", l.relative_residual))
}

fn parallel_restriction() -> Outcome {
    let sphere = AnalyticSurface::sphere(vec![0.0; 3], 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut forms: Vec<AlternatingForm> = Vec::new();
    for p in 1..=2 {
        for i in 0..binomial(3, p) {
            let mut c = vec![0.0; binomial(3, p)];
            c[i] = 1.0;
            forms.push(AlternatingForm::new(3, p, c).map_err(|e| e.to_string())?);
        }
        for _ in 0..5 {
            let c = (0..binomial(3, p)).map(|_| rng.random_range(-1.0..1.0)).collect();
            forms.push(AlternatingForm::new(3, p, c).map_err(|e| e.to_string())?);
        }
    }
    let mut worst = 0.0f64;
    for xi in &forms {
        let r = parallel_restriction_check(&sphere, xi, 50, &mut rng).map_err(|e| e.to_string())?;
        worst = worst.max(r.max());
    }
    ensure(worst <= 1e-8, || format!("residual {worst:e}"))?;
    Ok(format!("{} forms, max residual {worst:.1e}", forms.len()))
}

fn bounds_suite() -> Outcome {
    let mut equalities = 0;
    for n in 1..=8 {
        for r in [1.0, 0.5, 2.0] {
            let case = GeometryCase::sphere(n, r);
            let mut verdicts = Vec::new();
            for p in 1..=(n + 1) / 2 {
                verdicts.push(main_lower_bound(&case, p).map_err(|e| e.to_string())?);
            }
            verdicts.push(xia_bound(&case).map_err(|e| e.to_string())?);
            if n % 2 == 1 && n >= 3 {
                verdicts.push(upper_bound_degree_p(&case, (n + 1) / 2).map_err(|e| e.to_string())?);
            }
            if r == 1.0 {
                for p in 0..n {
                    verdicts.push(special_killing_relation(1.0, p, n).map_err(|e| e.to_string())?.1);
                }
            }
            for v in verdicts {
                ensure(v.is_equality(1e-12), || format!("not an equality: {v:?}"))?;
                equalities += 1;
            }
        }
    }
    let all = sphere_suite(8, &[1.0, 0.5, 2.0, 3.0]).map_err(|e| e.to_string())?;
    if let Some(v) = all.iter().find(|v| v.is_violation()) {
        return Err(format!("violated: {v:?}"));
    }
    let mut worst_mesh_slack = f64::INFINITY;
    let cases = ellipsoid_cases(3, &SpectrumOptions::default()).map_err(|e| e.to_string())?;
    ensure(cases.len() == 5, || format!("{} ellipsoids", cases.len()))?;
    for case in &cases {
        for v in mesh_suite(case).map_err(|e| e.to_string())? {
            ensure(v.state == VerdictState::Satisfied, || format!("{v:?}"))?;
            worst_mesh_slack = worst_mesh_slack.min(v.slack / v.lhs.abs().max(v.rhs.abs()));
        }
    }
    let ball = generate_ball(3);
    let d = equality_case_diagnostics(BallCase::Mesh { mesh: &ball, radius: 1.0 }, 1).map_err(|e| e.to_string())?;
    ensure((d.volume_ratio - 3.0).abs() <= 0.02 * 3.0, || format!("volume ratio {}", d.volume_ratio))?;
    Ok(format!(
        "{equalities} sphere equalities, {} sphere verdicts without violation, ellipsoid relative slack ≥ {worst_mesh_slack:.2}, ball ratio {:.4}",
        all.len(),
        d.volume_ratio
    ))
}

fn generated_geometries() -> Vec<(String, MeshComplex)> {
    let mut out: Vec<(String, MeshComplex)> = (0..=4).map(|s| (format!("icosphere:{s}"), generate_icosphere(s, 1.0))).collect();
    for [a, b, c] in hodgebench::bounds::ELLIPSOID_FAMILY {
        out.push((format!("ellipsoid:{a},{b},{c}"), generate_ellipsoid(a, b, c, 3)));
    }
    out.push(("torus".into(), generate_torus(2.0, 0.7, 32, 16)));
    out.push(("ball:3 boundary".into(), generate_ball(3).boundary_surface().expect("ball has a boundary").0));
    out
}

fn property_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut tightest = 0.0f64;
    for i in 0..1000 {
        let n = 2 + i % 7;
        let p = rng.random_range(0..=n);
        let s = random_symmetric(n, &mut rng);
        let coeffs = (0..binomial(n, p)).map(|_| rng.random_range(-1.0..1.0)).collect();
        let phi = AlternatingForm::new(n, p, coeffs).map_err(|e| e.to_string())?;
        let (lhs, rhs) = induced_norm_bound(&s, &phi).map_err(|e| e.to_string())?;
        ensure(lhs <= rhs * (1.0 + 1e-12) + 1e-12, || format!("n={n} p={p}: {lhs} > {rhs}"))?;
        let free = &s - DMatrix::identity(n, n) * (s.trace() / n as f64);
        let (lhs_free, rhs_free) = trace_free_norm_bound(&free, &phi).map_err(|e| e.to_string())?;
        ensure(lhs_free <= rhs_free * (1.0 + 1e-12) + 1e-12, || {
            format!("trace-free n={n} p={p}: {lhs_free} > {rhs_free}")
        })?;
        if rhs > 0.0 {
            tightest = tightest.max(lhs / rhs);
        }
    }
    let mut vertices = 0;
    for (name, mesh) in generated_geometries() {
        let shape = discrete_shape(&mesh).map_err(|e| format!("{name}: {e}"))?;
        for (v, s) in shape.shapes.iter().enumerate() {
            for p in 1..s.dim() {
                let (a, b) = (s.sigma[p - 1] / p as f64, s.sigma[p] / (p + 1) as f64);
                ensure(a <= b + 1e-12, || format!("{name} vertex {v}: σ_{p}/{p} = {a} > {b}"))?;
            }
            vertices += 1;
        }
    }
    Ok(format!("1000 pairs (max ratio {tightest:.3}), monotone at {vertices} vertices"))
}

fn main() {
    let checks: [(&str, fn() -> Outcome); 8] = [
        ("induced operator spectrum", induced_operator_oracle),
        ("duality identity", duality_identity),
        ("sphere spectrum", sphere_spectrum),
        ("scalar Reilly identity", classical_identity),
        ("p-form Reilly identity", form_identity),
        ("parallel restriction identities", parallel_restriction),
        ("eigenvalue bounds", bounds_suite),
        ("norm inequalities and monotonicity", property_suite),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {}. {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {}. {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
