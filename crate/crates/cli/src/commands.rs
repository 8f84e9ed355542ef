use std::f64::consts::PI;

use nhphase_core::evolution::{
    cyclic_state, periodic_initial_condition, reexpress_initial_condition, PeriodicInitialCondition,
};
use nhphase_core::phases::{adiabaticity_eta, phase_report};
use nhphase_core::two_level::{
    analytic_frame, analytic_system_path, closed_form_phases, mode_index, periodic_c1, solve,
};
use nhphase_core::{
    assess_cyclicity, exact_cyclic_states, monodromy, projective_distance, EigOptions, Error, Hamiltonian,
    SystemPath, TwoLevelParams, C64,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::model::{HamiltonianFile, Model};
use crate::report::{angle, coefficient, complex_angle, cplx, emit, json_text, sweep_csv, SweepRow};
use crate::{CommonArgs, Format, GridArgs};

const ADIABATIC_LIMIT: f64 = 0.1;

fn require(v: Option<f64>, name: &str) -> CliResult<f64> {
    v.ok_or_else(|| CliError::Validation(format!("missing required parameter `{name}` (--{})", flag(name))))
}

fn flag(name: &str) -> String {
    match name {
        "phi_i" => "phi-i".into(),
        n => n.into(),
    }
}

fn builtin(args: &CommonArgs) -> CliResult<TwoLevelParams> {
    let energy = args
        .energy
        .ok_or_else(|| CliError::Validation("missing required parameter `E` (--E)".into()))?;
    let theta = require(args.theta, "theta")?;
    let phi_i = require(args.phi_i, "phi_i")?;
    let omega = require(args.omega, "omega")?;
    Ok(TwoLevelParams::new(energy, theta, phi_i, omega)?)
}

fn has_builtin_flags(args: &CommonArgs) -> bool {
    args.energy.is_some() || args.theta.is_some() || args.phi_i.is_some() || args.omega.is_some()
}

/// Exactly one model source: the file or the built-in parameters.
fn resolve_model(args: &CommonArgs) -> CliResult<Model> {
    match &args.hamiltonian_file {
        Some(file) => {
            if has_builtin_flags(args) {
                return Err(CliError::Validation(
                    "--hamiltonian-file cannot be combined with --E/--theta/--phi-i/--omega".into(),
                ));
            }
            let path = HamiltonianFile::load(file)?.into_path()?;
            Ok(Model::File {
                source: file.clone(),
                path,
            })
        }
        None => Ok(Model::TwoLevel(builtin(args)?)),
    }
}

fn builtin_only(args: &CommonArgs, command: &str) -> CliResult<()> {
    if args.hamiltonian_file.is_some() {
        return Err(CliError::Validation(format!(
            "{command} works on the built-in two-level model; --hamiltonian-file is accepted by verify and floquet"
        )));
    }
    Ok(())
}

fn json_only(args: &CommonArgs, command: &str) -> CliResult<()> {
    if args.format == Some(Format::Csv) {
        return Err(CliError::Validation(format!("{command} only writes json")));
    }
    Ok(())
}

/// `N ≥ 8`, `steps ≥ 4N`, with `N` the number of frame samples.
fn check_controls(samples: usize, steps: usize) -> CliResult<()> {
    if samples < 8 {
        return Err(CliError::Validation(format!("samples must be at least 8, got {samples}")));
    }
    if steps < 4 * samples {
        return Err(CliError::Validation(format!(
            "steps must be at least 4 x samples = {}, got {steps}",
            4 * samples
        )));
    }
    Ok(())
}

fn frame_samples(model: &Model, args: &CommonArgs) -> usize {
    match model {
        Model::TwoLevel(_) => args.samples,
        Model::File { path, .. } => path.sample_count(),
    }
}

pub fn eig_options() -> CliResult<EigOptions> {
    let mut opts = EigOptions::default();
    if let Ok(v) = std::env::var("NHPHASE_SEED") {
        opts.seed = v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("NHPHASE_SEED must be an unsigned integer, got {v:?}")))?;
    }
    Ok(opts)
}

fn params_json(p: &TwoLevelParams) -> Value {
    json!({
        "E": cplx(p.energy),
        "theta": p.theta,
        "phi_i": p.phi_i,
        "omega": p.omega,
        "period": p.period(),
    })
}

fn model_json(model: &Model) -> Value {
    match model {
        Model::TwoLevel(p) => json!({ "kind": "two-level", "params": params_json(p) }),
        Model::File { source, path } => json!({
            "kind": "file",
            "source": source.display().to_string(),
            "period": path.period(),
            "dim": path.dim(),
            "samples": path.sample_count(),
        }),
    }
}

fn controls_json(samples: usize, steps: usize, opts: &EigOptions) -> Value {
    json!({ "samples": samples, "steps": steps, "seed": opts.seed })
}

fn periodicity_json(pic: &PeriodicInitialCondition, c0: Value) -> Value {
    let status = match pic.kind {
        nhphase_core::Periodicity::Unique => "periodic",
        nhphase_core::Periodicity::AllPeriodic => "all_periodic",
    };
    json!({ "status": status, "value": c0, "sigma_min": pic.sigma_min })
}

/// The numeric `C̃_n(0)` of mode `m`, rewritten for the closed-form frame so
/// it compares with the closed-form coefficients.
fn numeric_coefficient(sp: &SystemPath, p: &TwoLevelParams, m: usize, steps: usize) -> CliResult<Value> {
    match periodic_initial_condition(sp, m, steps) {
        Ok(pic) => {
            let mut frame = analytic_frame(p, 0.0);
            if mode_index(sp, p, 1)? == 1 {
                frame.eigenvalues.swap(0, 1);
                frame.right_vectors.swap(0, 1);
                frame.left_vectors.swap(0, 1);
            }
            let c = reexpress_initial_condition(&sp.systems[0], &frame, m, &pic.c0)?;
            Ok(periodicity_json(&pic, cplx(c[0])))
        }
        Err(e) if matches!(e.root(), Error::Resonance { .. }) => Ok(json!({ "status": "resonance", "value": Value::Null, "detail": e.to_string() })),
        Err(e) => Err(e.into()),
    }
}

fn sweep_row(p: &TwoLevelParams, samples: usize) -> CliResult<SweepRow> {
    let ph = closed_form_phases(p);
    let eta = adiabaticity_eta(&analytic_system_path(p, samples)?)?;
    Ok(SweepRow {
        theta: p.theta,
        phi_i: p.phi_i,
        gamma1: ph.gamma1,
        gamma2: ph.gamma2,
        gamma_tilde1: ph.gamma_tilde1,
        gamma_tilde2: ph.gamma_tilde2,
        eta,
        c1_0: periodic_c1(p),
    })
}

pub fn two_level(args: &CommonArgs) -> CliResult<()> {
    builtin_only(args, "two-level")?;
    let p = builtin(args)?;
    check_controls(args.samples, args.steps)?;
    if args.format == Some(Format::Csv) {
        return emit(&sweep_csv(&[sweep_row(&p, args.samples)?]), args.output.as_deref());
    }
    let opts = eig_options()?;
    let sol = solve(&p)?;
    let sp = Model::TwoLevel(p).system_path(args.samples, &opts)?;
    let eta = adiabaticity_eta(&sp)?;

    let mut numeric = serde_json::Map::new();
    numeric.insert("eta".into(), json!(eta));
    for label in [1usize, 2] {
        let m = mode_index(&sp, &p, label)?;
        let r = phase_report(&sp, m)?;
        numeric.insert(format!("delta{label}"), complex_angle(r.delta));
        numeric.insert(format!("gamma{label}"), complex_angle(r.gamma));
        numeric.insert(format!("gamma_tilde{label}"), angle(r.gamma_tilde));
        numeric.insert(format!("gamma_tilde{label}_imag"), json!(r.gamma_tilde_imag));
        numeric.insert(format!("relation_residual{label}"), json!(r.relation_residual));
        numeric.insert(format!("holonomy_compensation{label}"), cplx(r.holonomy_compensation));
    }
    // C̃_1(0) belongs to the cyclic state of mode 2 and C̃_2(0) to mode 1
    numeric.insert("c1_0".into(), numeric_coefficient(&sp, &p, mode_index(&sp, &p, 2)?, args.steps)?);
    numeric.insert("c2_0".into(), numeric_coefficient(&sp, &p, mode_index(&sp, &p, 1)?, args.steps)?);

    let t = p.period();
    let out = json!({
        "command": "two-level",
        "params": params_json(&p),
        "controls": controls_json(args.samples, args.steps, &opts),
        "closed_form": {
            "gamma1": angle(sol.phases.gamma1),
            "gamma2": angle(sol.phases.gamma2),
            "gamma_tilde1": angle(sol.phases.gamma_tilde1),
            "gamma_tilde2": angle(sol.phases.gamma_tilde2),
            "delta1": complex_angle(p.energy * t),
            "delta2": complex_angle(-p.energy * t),
            "q": cplx(sol.q),
            "drive": cplx(sol.drive),
            "w_t": cplx(sol.w_t),
            "c1_0": coefficient(&sol.c1_0),
            "c2_0": coefficient(&sol.c2_0),
        },
        "numeric": Value::Object(numeric),
    });
    emit(&json_text(&out), args.output.as_deref())
}

fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    (0..count)
        .map(|k| min + (max - min) * k as f64 / (count - 1) as f64)
        .collect()
}

pub fn sweep(args: &CommonArgs, grid: &GridArgs) -> CliResult<()> {
    builtin_only(args, "sweep")?;
    if args.theta.is_some() || args.phi_i.is_some() {
        return Err(CliError::Validation(
            "sweep takes --theta-min/--theta-max/--theta-count and --phi-min/--phi-max/--phi-count instead of --theta/--phi-i".into(),
        ));
    }
    let energy = args
        .energy
        .ok_or_else(|| CliError::Validation("missing required parameter `E` (--E)".into()))?;
    let omega = require(args.omega, "omega")?;
    check_controls(args.samples, args.steps)?;
    if grid.theta_count == 0 || grid.phi_count == 0 {
        return Err(CliError::Validation("grid counts must be at least 1".into()));
    }
    if grid.theta_min > grid.theta_max || grid.phi_min > grid.phi_max {
        return Err(CliError::Validation("grid minimum exceeds maximum".into()));
    }
    let open = grid.theta_min > 0.0 && grid.theta_max < PI;
    if !open && !grid.allow_endpoints {
        return Err(CliError::Validation(
            "theta grid must lie inside (0, pi); pass --allow-endpoints for the endpoint limits".into(),
        ));
    }
    let points: Vec<(f64, f64)> = linspace(grid.theta_min, grid.theta_max, grid.theta_count)
        .into_iter()
        .flat_map(|t| linspace(grid.phi_min, grid.phi_max, grid.phi_count).into_iter().map(move |f| (t, f)))
        .collect();
    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(theta, phi_i)| sweep_row(&TwoLevelParams::new(energy, theta, phi_i, omega)?, args.samples))
        .collect::<CliResult<_>>()?;
    let text = match args.format.unwrap_or(Format::Csv) {
        Format::Csv => sweep_csv(&rows),
        Format::Json => json_text(&json!({
            "command": "sweep",
            "E": cplx(energy),
            "omega": omega,
            "rows": rows.iter().map(SweepRow::json).collect::<Vec<_>>(),
        })),
    };
    emit(&text, args.output.as_deref())
}

/// Frame index of the requested mode: a label 1|2 for the built-in model
/// (default 2), a 1-based position in the frame order at `t = 0` otherwise
/// (default 1).
fn select_mode(model: &Model, sp: &SystemPath, mode: Option<usize>) -> CliResult<(usize, usize)> {
    match model {
        Model::TwoLevel(p) => {
            let label = mode.unwrap_or(2);
            if !(1..=2).contains(&label) {
                return Err(CliError::Validation(format!("mode must be 1 or 2, got {label}")));
            }
            Ok((label, mode_index(sp, p, label)?))
        }
        Model::File { .. } => {
            let k = mode.unwrap_or(1);
            if k == 0 || k > sp.dim() {
                return Err(CliError::Validation(format!("mode must be in 1..={}, got {k}", sp.dim())));
            }
            Ok((k, k - 1))
        }
    }
}

fn with_hamiltonian<T>(model: &Model, f: impl FnOnce(&dyn Hamiltonian) -> T) -> T {
    match model {
        Model::TwoLevel(p) => f(p),
        Model::File { path, .. } => f(path),
    }
}

pub fn verify(args: &CommonArgs) -> CliResult<()> {
    json_only(args, "verify")?;
    let model = resolve_model(args)?;
    let samples = frame_samples(&model, args);
    check_controls(samples, args.steps)?;
    let opts = eig_options()?;
    let sp = model.system_path(samples, &opts)?;
    let (label, m) = select_mode(&model, &sp, args.mode)?;
    let a = with_hamiltonian(&model, |h| assess_cyclicity(h, &sp, m, args.steps))?;
    let pass = a.defect <= 10.0 * a.eta;
    let out = json!({
        "command": "verify",
        "model": model_json(&model),
        "controls": controls_json(samples, args.steps, &opts),
        "mode": label,
        "defect": a.defect,
        "eta": a.eta,
        "defect_over_eta": if a.eta > 0.0 { json!(a.defect / a.eta) } else { Value::Null },
        "criterion": "defect <= 10 eta",
        "verdict": if pass { "PASS" } else { "FAIL" },
        "regime": if a.eta >= ADIABATIC_LIMIT { "adiabatic regime violated" } else { "adiabatic" },
        "phases": {
            "total": complex_angle(a.total_phase),
            "predicted": complex_angle(a.predicted_phase),
            "measured_geometric": complex_angle(a.measured_geometric),
            "gamma_tilde": angle(a.gamma_tilde),
            "coefficient_phase": complex_angle(a.coefficient_phase),
        },
        "initial_condition": periodicity_json(&a.initial_condition, a.initial_condition.c0.iter().map(|z| cplx(*z)).collect()),
        "initial_state": a.initial_state.iter().map(|z| cplx(*z)).collect::<Vec<_>>(),
        "final_state": a.final_state.iter().map(|z| cplx(*z)).collect::<Vec<_>>(),
        "integration_error_estimate": a.estimated_error,
    });
    emit(&json_text(&out), args.output.as_deref())
}

pub fn floquet(args: &CommonArgs) -> CliResult<()> {
    json_only(args, "floquet")?;
    let model = resolve_model(args)?;
    let samples = frame_samples(&model, args);
    check_controls(samples, args.steps)?;
    let opts = eig_options()?;
    let mono = with_hamiltonian(&model, |h| monodromy(h, args.steps))?;
    let spec = exact_cyclic_states(&mono)?;

    let sp = model.system_path(samples, &opts)?;
    let eta = adiabaticity_eta(&sp)?;
    let modes: Vec<(usize, usize)> = match args.mode {
        Some(k) => vec![select_mode(&model, &sp, Some(k))?],
        None => match &model {
            Model::TwoLevel(p) => vec![(1, mode_index(&sp, p, 1)?), (2, mode_index(&sp, p, 2)?)],
            Model::File { .. } => (0..sp.dim()).map(|m| (m + 1, m)).collect(),
        },
    };
    let mut adiabatic = vec![];
    for (label, m) in modes {
        let entry = match periodic_initial_condition(&sp, m, args.steps) {
            Ok(pic) => {
                let psi = cyclic_state(&sp, m, &pic.c0)?;
                let d: Vec<f64> = spec
                    .right_vectors
                    .iter()
                    .map(|v| projective_distance(v, &psi))
                    .collect::<Result<_, _>>()?;
                let (nearest, dist) = d
                    .iter()
                    .cloned()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("at least one eigenvector");
                // well defined even when U(T) is degenerate and its eigenvectors are not
                let defect = projective_distance(&mono.u_t.matvec(&psi).map_err(Error::from)?, &psi)?;
                json!({
                    "mode": label,
                    "eigenvalue_at_t0": cplx(sp.systems[0].eigenvalues[m]),
                    "nearest_eigenvector": nearest,
                    "distance": dist,
                    "distances": d,
                    "one_period_defect": defect,
                })
            }
            Err(e) if matches!(e.root(), Error::Resonance { .. }) => json!({
                "mode": label,
                "eigenvalue_at_t0": cplx(sp.systems[0].eigenvalues[m]),
                "status": "resonance",
                "detail": e.to_string(),
            }),
            Err(e) => return Err(e.into()),
        };
        adiabatic.push(entry);
    }

    let out = json!({
        "command": "floquet",
        "model": model_json(&model),
        "controls": controls_json(samples, args.steps, &opts),
        "period": model.period(),
        "eigenvalues": spec.eigenvalues.iter().map(|z| cplx(*z)).collect::<Vec<_>>(),
        // λ = e^{iΘ}: Θ = arg λ − i ln|λ|
        "total_phases": spec.eigenvalues.iter().map(|z| complex_angle(C64::new(z.arg(), -z.norm().ln()))).collect::<Vec<_>>(),
        "eigenvectors": spec.right_vectors.iter().map(|v| v.iter().map(|z| cplx(*z)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "integration_error_estimate": mono.estimated_error,
        "eta": eta,
        "adiabatic_cyclic_states": adiabatic,
    });
    emit(&json_text(&out), args.output.as_deref())
}
