use std::fs;
use std::path::{Path, PathBuf};

use hodgebench::bounds::{
    ellipsoid_cases, equality_case_diagnostics, sphere_sweep, summary_table, BallCase, BoundVerdict, GeometryCase,
    MeshCase, Theorem, Tolerance, VerdictState,
};
use hodgebench::curvature::AnalyticSurface;
use hodgebench::mesh::io::load_mesh;
use hodgebench::mesh::{generate_ball, generate_ball_with, generate_ellipsoid, generate_icosphere, generate_torus, MeshComplex};
use hodgebench::reilly::{
    builtin_form, builtin_function, evaluate_classical_reilly, evaluate_reilly, write_convergence_csv, BoundaryModel,
    ConvergenceRow, Polynomial, ReillyOptions,
};
use hodgebench::spectrum::{spectrum_functions, spectrum_one_forms, spectrum_two_forms, Family, SpectrumOptions};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{GeometrySpec, RunConfig};
use crate::CliError;

const TOOL: &str = "hodgebench";
const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Wraps a result with the tool version and the full config.
fn envelope<T: Serialize>(config: &RunConfig, result: &T) -> String {
    let value = json!({
        "tool": TOOL,
        "version": VERSION,
        "config": config,
        "result": result,
    });
    serde_json::to_string_pretty(&value).expect("outputs serialize") + "\n"
}

/// `# hodgebench <version> config=<json>` as the first line of text outputs.
fn header(config: &RunConfig) -> String {
    format!(
        "# {TOOL} {VERSION} config={}\n",
        serde_json::to_string(config).expect("config serializes")
    )
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

enum Resolved {
    Mesh(MeshComplex),
    Sphere { n: usize, radius: f64 },
}

fn resolve(config: &RunConfig, default: Option<&str>) -> Result<(String, Resolved), CliError> {
    if let Some(path) = &config.mesh {
        return Ok((path.display().to_string(), Resolved::Mesh(load_mesh(path, None)?)));
    }
    let spec_text = config
        .geometry
        .as_deref()
        .or(default)
        .ok_or_else(|| CliError::Config("need --geometry or --mesh".into()))?;
    let spec: GeometrySpec = spec_text.parse()?;
    let mesh = match spec {
        GeometrySpec::Icosphere { subdivisions, radius } => generate_icosphere(subdivisions, radius),
        GeometrySpec::Ellipsoid { axes: [a, b, c], subdivisions } => generate_ellipsoid(a, b, c, subdivisions),
        GeometrySpec::Torus { major, minor, around, tube } => generate_torus(major, minor, around, tube),
        GeometrySpec::Ball { subdivisions, radius, shells } => {
            generate_ball_with(subdivisions, radius, shells.unwrap_or(subdivisions + 1))
        }
        GeometrySpec::Sphere { n, radius } => return Ok((spec_text.to_string(), Resolved::Sphere { n, radius })),
    };
    Ok((spec_text.to_string(), Resolved::Mesh(mesh)))
}

fn surface_of(mesh: MeshComplex) -> Result<MeshComplex, CliError> {
    if mesh.is_surface() {
        Ok(mesh)
    } else {
        Ok(mesh.boundary_surface()?.0)
    }
}

pub fn spectrum(config: &RunConfig) -> Result<(), CliError> {
    let (label, resolved) = resolve(config, None)?;
    let Resolved::Mesh(mesh) = resolved else {
        return Err(CliError::Config("closed-form spheres have no mesh spectrum; use `bounds`".into()));
    };
    let surface = surface_of(mesh)?;
    let mut opts = SpectrumOptions { k: config.k, ..SpectrumOptions::default() };
    opts.eigen.seed = config.seed;
    if let Some(t) = config.tol {
        opts.eigen.tol = t;
    }
    let degrees = match config.p {
        Some(p @ 0..=2) => vec![p],
        Some(p) => return Err(CliError::Config(format!("--p must be 0, 1 or 2 on a surface, got {p}"))),
        None => vec![0, 1, 2],
    };
    println!("{label}: {} vertices, genus {:?}", surface.vertices().len(), surface.genus());
    for p in degrees {
        let report = match p {
            0 => spectrum_functions(&surface, &opts)?,
            1 => spectrum_one_forms(&surface, &opts)?,
            _ => spectrum_two_forms(&surface, &opts)?,
        };
        let mut csv = Vec::new();
        report.write_csv(&mut csv)?;
        let csv = header(config) + &String::from_utf8(csv).expect("csv is utf-8");
        write_file(&config.out, &format!("spectrum_p{p}.json"), &envelope(config, &report))?;
        write_file(&config.out, &format!("spectrum_p{p}.csv"), &csv)?;
        let first = report.first_positive_cluster();
        println!(
            "p={p}: harmonic {}, first nonzero {} (multiplicity {}), solver {:?}",
            report.count(Family::Harmonic),
            first.map_or("-".to_string(), |c| format!("{:.10}", c.value)),
            first.map_or(0, |c| c.multiplicity),
            report.solver,
        );
    }
    Ok(())
}

enum FieldChoice {
    Function(Polynomial),
    Form(hodgebench::reilly::PolynomialForm),
}

fn resolve_field(name: &str) -> Result<FieldChoice, CliError> {
    let canonical = match name {
        "linear-x1" => "x1",
        "radial-sq" => "half_norm_sq",
        "zero" => return Ok(FieldChoice::Function(Polynomial::zero(3))),
        other => other,
    };
    if let Ok(f) = builtin_function(canonical) {
        return Ok(FieldChoice::Function(f));
    }
    Ok(FieldChoice::Form(builtin_form(canonical).map_err(|e| {
        CliError::Config(format!("{e}; functions also accept linear-x1, radial-sq, zero"))
    })?))
}

pub fn reilly(config: &RunConfig) -> Result<(), CliError> {
    let field_name = config.field.clone().unwrap_or_else(|| "linear-x1".into());
    let field = resolve_field(&field_name)?;
    // one mesh per level; a file mesh is a single level
    let meshes: Vec<(usize, MeshComplex, Option<f64>)> = if config.mesh.is_some() {
        let (_, Resolved::Mesh(m)) = resolve(config, None)? else { unreachable!() };
        vec![(0, m, None)]
    } else {
        let spec: GeometrySpec = config.geometry.as_deref().unwrap_or("ball:3").parse()?;
        let GeometrySpec::Ball { radius, shells, .. } = spec else {
            return Err(CliError::Config("reilly needs a `ball:` geometry or a --mesh".into()));
        };
        let levels = if config.levels.is_empty() {
            match spec {
                GeometrySpec::Ball { subdivisions, .. } => vec![subdivisions],
                _ => unreachable!(),
            }
        } else {
            config.levels.clone()
        };
        levels
            .into_iter()
            .map(|s| {
                let mesh = match shells {
                    Some(k) => generate_ball_with(s, radius, k),
                    None if radius == 1.0 => generate_ball(s),
                    None => generate_ball_with(s, radius, s + 1),
                };
                (s, mesh, Some(radius))
            })
            .collect()
    };
    let boundary = |radius: Option<f64>| -> Result<BoundaryModel, CliError> {
        Ok(match config.boundary.as_str() {
            "fitted" => BoundaryModel::Fitted,
            "flat" => BoundaryModel::Flat,
            _ => BoundaryModel::Analytic {
                surface: AnalyticSurface::sphere(
                    vec![0.0; 3],
                    radius.ok_or_else(|| CliError::Config("--boundary analytic needs a ball geometry".into()))?,
                ),
            },
        })
    };

    let mut rows = Vec::new();
    let mut ledgers = Vec::new();
    for (level, mesh, radius) in &meshes {
        let opts = ReillyOptions::with_boundary(boundary(*radius)?);
        let (row, ledger) = match &field {
            FieldChoice::Function(f) => {
                let l = evaluate_classical_reilly(mesh, f, &opts)?;
                (ConvergenceRow::from_classical(*level, &l), serde_json::to_value(&l).expect("ledger serializes"))
            }
            FieldChoice::Form(w) => {
                let l = evaluate_reilly(mesh, w, &opts)?;
                (ConvergenceRow::from_reilly(*level, &l), serde_json::to_value(&l).expect("ledger serializes"))
            }
        };
        println!(
            "level {level}: lhs {:.10} rhs {:.10} residual {:.3e} (relative {:.3e}) dec residual {}",
            row.lhs,
            row.rhs,
            row.residual,
            row.relative_residual,
            row.residual_dec.map_or("-".to_string(), |d| format!("{d:.3e}")),
        );
        rows.push(row);
        ledgers.push(ledger);
    }

    let result: Value = json!({ "field": field_name, "ledgers": ledgers, "convergence": rows });
    write_file(&config.out, "reilly_ledgers.json", &envelope(config, &result))?;
    let mut csv = Vec::new();
    write_convergence_csv(&mut csv, &rows)?;
    write_file(&config.out, "reilly_convergence.csv", &(header(config) + &String::from_utf8(csv).expect("utf-8")))?;

    let floor = config.tol.unwrap_or(1e-9);
    let decreasing = if config.strict_dec {
        rows.windows(2).all(|w| match (w[0].residual_dec, w[1].residual_dec) {
            (Some(a), Some(b)) => b.abs() < a.abs() || b.abs() <= floor,
            _ => false,
        })
    } else {
        hodgebench::reilly::residuals_nonincreasing(&rows, floor)
    };
    if !decreasing {
        return Err(CliError::NotDecreasing(if config.strict_dec { "DEC residual" } else { "residual" }));
    }
    Ok(())
}

pub fn bounds(config: &RunConfig) -> Result<(), CliError> {
    let theorems: Vec<Theorem> = if config.theorem.is_empty() {
        Theorem::ALL.to_vec()
    } else {
        config
            .theorem
            .iter()
            .map(|t| t.parse::<Theorem>().map_err(CliError::Config))
            .collect::<Result<_, _>>()?
    };
    let mut opts = SpectrumOptions::default();
    opts.eigen.seed = config.seed;

    let mut diagnostics = Vec::new();
    let mut verdicts: Vec<BoundVerdict> = match config.suite.as_deref() {
        Some("spheres") => {
            for n in 1..=8 {
                for p in 1..=(n + 1) / 2 {
                    if config.p.is_none_or(|q| q == p) {
                        diagnostics.push(equality_case_diagnostics(BallCase::Analytic { n, radius: 1.0 }, p)?);
                    }
                }
            }
            let ball = generate_ball(3);
            diagnostics.push(equality_case_diagnostics(BallCase::Mesh { mesh: &ball, radius: 1.0 }, 1)?);
            sphere_sweep(8, &[1.0, 0.5, 2.0], &theorems, config.p)?
        }
        Some("ellipsoids") => {
            let level = config.levels.first().copied().unwrap_or(3);
            let mut out = Vec::new();
            for case in ellipsoid_cases(level, &opts)? {
                out.extend(hodgebench::bounds::evaluate_theorems(&case, &theorems, config.p)?);
            }
            out
        }
        Some(other) => return Err(CliError::Config(format!("unknown suite `{other}`; expected spheres or ellipsoids"))),
        None => {
            let (label, resolved) = resolve(config, None)?;
            let case = match resolved {
                Resolved::Sphere { n, radius } => GeometryCase::sphere(n, radius),
                Resolved::Mesh(mesh) => GeometryCase::Mesh(Box::new(MeshCase::build(label, &mesh, &opts, true)?)),
            };
            hodgebench::bounds::evaluate_theorems(&case, &theorems, config.p)?
        }
    };
    if let Some(t) = config.tol {
        verdicts = verdicts.into_iter().map(|v| v.with_tolerance(Tolerance::Relative(t))).collect();
    }

    let table = summary_table(&verdicts);
    print!("{table}");
    let result = json!({ "verdicts": verdicts, "equality_diagnostics": diagnostics });
    write_file(&config.out, "bounds.json", &envelope(config, &result))?;
    write_file(&config.out, "bounds_summary.txt", &(header(config) + &table))?;

    let violated: Vec<&BoundVerdict> = verdicts.iter().filter(|v| v.state == VerdictState::Violated).collect();
    if !violated.is_empty() {
        return Err(CliError::Violation(
            violated.iter().map(|v| format!("{} on {} (p={:?})", v.name, v.geometry, v.p)).collect(),
        ));
    }
    Ok(())
}
