use std::path::Path;

use log::info;
use relax_core::control::{
    manifold_dimension, sample_manifold, stabilized_fixed_point, synthesize_controller, ControlSpec,
};
use relax_core::lindblad::{fixed_point, integrate_rk4, is_relaxing, Propagator};
use relax_core::linalg;
use relax_core::operators::json as matrix_json;
use relax_core::scenarios::{
    ellipsoid_residual, entanglement_vs_coupling, geometric_grid, one_spin_model, pulsed_steady_state,
    two_spin_model, OneSpinParams, PulseTrain, TwoSpinParams,
};
use relax_core::{CoherenceVector, FixedPointResult, LindbladModel};
use serde_json::json;

use crate::args::{Cli, Command, ControlArgs, Format, ModelArgs};
use crate::error::CliError;
use crate::output::{short, short_complex, Cell, Report, Table};

type Result<T> = std::result::Result<T, CliError>;

pub fn execute(cli: &Cli) -> Result<Vec<u8>> {
    let format = cli.common.format;
    let seed = cli.common.seed;
    let table = match &cli.command {
        Command::FixedPoint { model, control } => fixed_point_cmd(model, control)?,
        Command::Trajectory {
            model,
            control,
            t,
            steps,
            r0,
            dt,
        } => trajectory_cmd(model, control, *t, *steps, r0.as_deref(), *dt)?,
        Command::Synthesize { model, control, target } => synthesize_cmd(model, control.as_deref(), target)?,
        Command::ManifoldSample {
            model,
            control,
            samples,
            scale,
            rank,
        } => manifold_cmd(model, control.as_deref(), *samples, *scale, *rank, seed)?,
        Command::Ellipsoid {
            gamma1,
            gamma2,
            samples,
            scale,
        } => ellipsoid_cmd(*gamma1, *gamma2, *samples, *scale, seed)?,
        Command::SweepEntanglement {
            gamma,
            j_min,
            j_max,
            points,
        } => sweep_cmd(*gamma, *j_min, *j_max, *points)?,
        Command::Pulsed { model, control, dt } => pulsed_cmd(model, control, *dt)?,
        Command::Validate { model } => return validate_cmd(model, format)?.render(format).map_err(CliError::Write),
    };
    table.render(format).map_err(CliError::Write)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn load_model(args: &ModelArgs, table: &mut Table) -> Result<LindbladModel> {
    if let Some(path) = &args.model {
        table.param("model", path.display());
        info!("loading model from {}", path.display());
        return Ok(LindbladModel::from_json(&read(path)?)?);
    }
    if args.gamma.is_some() || args.j.is_some() {
        let (gamma, j) = (args.gamma.unwrap_or(1.0), args.j.unwrap_or(1.0));
        table.param("model", "two-spin").param("gamma", gamma).param("j", j);
        return Ok(two_spin_model(TwoSpinParams::new(gamma, j)?)?);
    }
    let (g1, g2) = (args.gamma1.unwrap_or(1.0), args.gamma2.unwrap_or(1.0));
    table.param("model", "one-spin").param("gamma1", g1).param("gamma2", g2);
    Ok(one_spin_model(OneSpinParams::new(g1, g2)?)?)
}

/// Generators only (amplitudes zero). Default: spin rotations for one
/// qubit, local Paulis otherwise.
fn load_generators(spec: Option<&str>, n_qubits: usize, table: &mut Table) -> Result<ControlSpec> {
    let spec = spec.unwrap_or(if n_qubits == 1 { "spin" } else { "local" });
    table.param("control", spec);
    let ctrl = match spec {
        "spin" if n_qubits == 1 => ControlSpec::bloch_rotations(),
        "spin" => return Err(CliError::Usage("`spin` controls need a one-qubit model".into())),
        "local" => ControlSpec::local_paulis(n_qubits)?,
        "full" => ControlSpec::full(n_qubits)?,
        path => ControlSpec::from_json(&read(Path::new(path))?, n_qubits)?,
    };
    let zeros = vec![0.0; ctrl.len()];
    Ok(ctrl.with_amplitudes(zeros)?)
}

/// Control with amplitudes; `None` when no control was requested.
fn load_control(args: &ControlArgs, n_qubits: usize, table: &mut Table) -> Result<Option<ControlSpec>> {
    let rates = [args.ux, args.uy, args.uz];
    let has_rates = rates.iter().any(Option::is_some);
    let mut ctrl = match args.control.as_deref() {
        Some(spec @ ("spin" | "local" | "full")) => Some(load_generators(Some(spec), n_qubits, table)?),
        Some(path) => {
            table.param("control", path);
            Some(ControlSpec::from_json(&read(Path::new(path))?, n_qubits)?)
        }
        None if has_rates => Some(load_generators(Some("spin"), n_qubits, table)?),
        None => None,
    };
    if has_rates {
        let spec = ctrl.as_ref().expect("set above");
        if n_qubits != 1 || spec.len() != 3 {
            return Err(CliError::Usage(
                "--ux/--uy/--uz apply to one-qubit models with three rotation generators".into(),
            ));
        }
        let mut u = spec.amplitudes().to_vec();
        for (k, (rate, name)) in rates.iter().zip(["ux", "uy", "uz"]).enumerate() {
            if let Some(r) = rate {
                u[k] = *r;
                table.param(name, r);
            }
        }
        ctrl = Some(spec.with_amplitudes(u)?);
    }
    if let Some(c) = &ctrl {
        if !has_rates {
            table.param("u", join(c.amplitudes()));
        }
    }
    Ok(ctrl)
}

fn join(values: &[f64]) -> String {
    values.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_vector(text: &str, n_qubits: usize, what: &str) -> Result<CoherenceVector> {
    let values = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(format!("--{what}: {e}")))?;
    Ok(CoherenceVector::new(n_qubits, values)?)
}

fn controlled_model(model: &LindbladModel, ctrl: Option<&ControlSpec>) -> Result<LindbladModel> {
    match ctrl {
        Some(c) if !c.is_empty() => Ok(model.with_hamiltonian(model.hamiltonian() + c.hamiltonian())?),
        _ => Ok(model.clone()),
    }
}

fn controlled_fixed_point(model: &LindbladModel, ctrl: Option<&ControlSpec>) -> Result<FixedPointResult> {
    match ctrl {
        Some(c) if !c.is_empty() => Ok(stabilized_fixed_point(model, c)?),
        _ => Ok(fixed_point(&model.affine()?)?),
    }
}

fn labels(model: &LindbladModel) -> Result<Vec<String>> {
    Ok(relax_core::operators::pauli_string_basis(model.n_qubits())?.labels().to_vec())
}

fn numbers(values: &[f64]) -> impl Iterator<Item = Cell> + '_ {
    values.iter().map(|&x| Cell::Num(x))
}

fn fixed_point_cmd(model_args: &ModelArgs, control: &ControlArgs) -> Result<Table> {
    let mut table = Table::new("fixed-point");
    let model = load_model(model_args, &mut table)?;
    let ctrl = load_control(control, model.n_qubits(), &mut table)?;
    let fp = controlled_fixed_point(&model, ctrl.as_ref())?;
    table.basis = labels(&model)?;
    table.columns = table.basis.clone();
    table.rows.push(numbers(fp.r_f.as_slice()).collect());
    table.diagnostic("relaxing", fp.relaxing);
    table.diagnostic("condition_number", format!("{:.6e}", fp.condition_number));
    table.diagnostic("residual", format!("{:.6e}", fp.residual));
    table.diagnostic("min_eigenvalue", format!("{:.6e}", linalg::min_eigenvalue(&fp.rho_f)));
    table.extra = Some(json!({ "rho_f": matrix_json::encode(&fp.rho_f) }));
    Ok(table)
}

fn trajectory_cmd(
    model_args: &ModelArgs,
    control: &ControlArgs,
    t: f64,
    steps: usize,
    r0: Option<&str>,
    dt: Option<f64>,
) -> Result<Table> {
    if steps == 0 {
        return Err(CliError::Usage("--steps must be >= 1".into()));
    }
    let mut table = Table::new("trajectory");
    let base = load_model(model_args, &mut table)?;
    let ctrl = load_control(control, base.n_qubits(), &mut table)?;
    let model = controlled_model(&base, ctrl.as_ref())?;
    let n = model.n_qubits();
    let r0 = match r0 {
        Some(text) => parse_vector(text, n, "r0")?,
        None => CoherenceVector::zeros(n),
    };
    r0.check_purity_bound()?;
    table.param("t", t).param("steps", steps).param("r0", join(r0.as_slice()));
    let rep = model.affine()?;
    let times: Vec<f64> = (0..=steps)
        .map(|k| if k == steps { t } else { t * k as f64 / steps as f64 })
        .collect();
    let states: Vec<CoherenceVector> = match dt {
        None => {
            table.param("integrator", "exact");
            let prop = Propagator::new(&rep);
            times.iter().map(|&s| prop.at(&r0, s)).collect::<relax_core::Result<_>>()?
        }
        Some(dt) => {
            table.param("integrator", "rk4").param("dt", dt);
            // integrate each output interval separately so output times are exact
            let mut out = vec![r0.clone()];
            for w in times.windows(2) {
                let last = out.last().expect("nonempty").clone();
                let path = integrate_rk4(&rep, &last, w[1] - w[0], dt)?;
                out.push(path.last().expect("nonempty").1.clone());
            }
            out
        }
    };
    table.basis = labels(&model)?;
    table.columns = std::iter::once("t".to_string())
        .chain(table.basis.iter().cloned())
        .chain(std::iter::once("purity".to_string()))
        .collect();
    for (time, r) in times.iter().zip(&states) {
        let mut row = vec![Cell::Num(*time)];
        row.extend(numbers(r.as_slice()));
        row.push(Cell::Num(r.purity()));
        table.rows.push(row);
    }
    Ok(table)
}

fn synthesize_cmd(model_args: &ModelArgs, control: Option<&str>, target: &str) -> Result<Table> {
    let mut table = Table::new("synthesize");
    let model = load_model(model_args, &mut table)?;
    let gens = load_generators(control, model.n_qubits(), &mut table)?;
    let target = parse_vector(target, model.n_qubits(), "target")?;
    table.param("target", join(target.as_slice()));
    let result = synthesize_controller(&model, gens.generators(), &target)?;
    table.basis = labels(&model)?;
    table.columns = gens
        .labels()
        .iter()
        .cloned()
        .chain(["residual".to_string(), "stabilizable".to_string()])
        .chain(table.basis.iter().map(|l| format!("achieved_{l}")))
        .collect();
    let mut row: Vec<Cell> = numbers(&result.u).collect();
    row.push(Cell::Num(result.residual));
    row.push(Cell::Bool(result.stabilizable()));
    row.extend(numbers(result.achieved_fixed_point.r_f.as_slice()));
    table.rows.push(row);
    Ok(table)
}

fn manifold_cmd(
    model_args: &ModelArgs,
    control: Option<&str>,
    samples: usize,
    scale: f64,
    rank: bool,
    seed: u64,
) -> Result<Table> {
    let mut table = Table::new("manifold-sample");
    let model = load_model(model_args, &mut table)?;
    let gens = load_generators(control, model.n_qubits(), &mut table)?;
    table
        .param("samples", samples)
        .param("scale", scale)
        .param("seed", seed)
        .param("rank", rank);
    info!("sampling {samples} fixed points");
    let sample = sample_manifold(&model, gens.generators(), samples, scale, seed)?;
    table.basis = labels(&model)?;
    let mut columns = vec!["sample".to_string()];
    columns.extend(gens.labels().iter().map(|l| format!("u_{l}")));
    columns.extend(table.basis.iter().cloned());
    columns.push("min_eigenvalue".into());
    if rank {
        columns.push("rank".into());
    }
    table.columns = columns;
    for (k, (u, fp)) in sample.amplitudes.iter().zip(&sample.points).enumerate() {
        let mut row = vec![Cell::Int(k as u64)];
        row.extend(numbers(u));
        row.extend(numbers(fp.r_f.as_slice()));
        row.push(Cell::Num(linalg::min_eigenvalue(&fp.rho_f)));
        if rank {
            row.push(match manifold_dimension(&model, gens.generators(), u) {
                Ok(r) => Cell::Int(r as u64),
                Err(e) => Cell::Text(e.to_string()),
            });
        }
        table.rows.push(row);
    }
    table.diagnostic("skipped", sample.skipped);
    Ok(table)
}

fn ellipsoid_cmd(gamma1: f64, gamma2: f64, samples: usize, scale: f64, seed: u64) -> Result<Table> {
    let mut table = Table::new("ellipsoid");
    table
        .param("gamma1", gamma1)
        .param("gamma2", gamma2)
        .param("samples", samples)
        .param("scale", scale)
        .param("seed", seed);
    let params = OneSpinParams::new(gamma1, gamma2)?;
    let model = one_spin_model(params)?;
    let gens = ControlSpec::bloch_rotations();
    let sample = sample_manifold(&model, gens.generators(), samples, scale, seed)?;
    table.basis = labels(&model)?;
    table.columns = ["sample", "ux", "uy", "uz"]
        .iter()
        .map(|s| s.to_string())
        .chain(table.basis.iter().cloned())
        .chain(std::iter::once("residual".to_string()))
        .collect();
    let mut worst: f64 = 0.0;
    for (k, (u, fp)) in sample.amplitudes.iter().zip(&sample.points).enumerate() {
        let residual = ellipsoid_residual(&fp.r_f, params);
        worst = worst.max(residual.abs());
        let mut row = vec![Cell::Int(k as u64)];
        row.extend(numbers(u));
        row.extend(numbers(fp.r_f.as_slice()));
        row.push(Cell::Num(residual));
        table.rows.push(row);
    }
    table.diagnostic("skipped", sample.skipped);
    table.diagnostic("max_abs_residual", format!("{worst:.6e}"));
    Ok(table)
}

fn sweep_cmd(gamma: f64, j_min: f64, j_max: f64, points: usize) -> Result<Table> {
    let mut table = Table::new("sweep-entanglement");
    table
        .param("gamma", gamma)
        .param("j_min", j_min)
        .param("j_max", j_max)
        .param("points", points)
        .param("control", "magic");
    let grid = geometric_grid(j_min, j_max, points)?;
    info!("sweeping {} couplings", grid.len());
    let rows = entanglement_vs_coupling(gamma, &grid)?;
    table.basis = relax_core::operators::pauli_string_basis(2)?.labels().to_vec();
    table.columns = ["j", "status", "concurrence", "eof", "fidelity"]
        .iter()
        .map(|s| s.to_string())
        .chain(table.basis.iter().cloned())
        .collect();
    let mut failed = 0;
    for row in rows {
        let mut cells = vec![Cell::Num(row.coupling)];
        match row.outcome {
            Ok(p) => {
                cells.push(Cell::Text("ok".into()));
                cells.extend([p.concurrence, p.eof, p.fidelity].map(Cell::Num));
                cells.extend(numbers(p.fixed_point.r_f.as_slice()));
            }
            Err(e) => {
                failed += 1;
                log::warn!("J = {}: {e}", row.coupling);
                cells.push(Cell::Text(e.to_string()));
                cells.extend((0..3 + table.basis.len()).map(|_| Cell::Num(f64::NAN)));
            }
        }
        table.rows.push(cells);
    }
    table.diagnostic("failed_rows", failed);
    Ok(table)
}

fn pulsed_cmd(model_args: &ModelArgs, control: &ControlArgs, dt: f64) -> Result<Table> {
    let mut table = Table::new("pulsed");
    let model = load_model(model_args, &mut table)?;
    let ctrl = load_control(control, model.n_qubits(), &mut table)?
        .unwrap_or_else(|| ControlSpec::new(vec![], vec![], vec![]).expect("empty control is valid"));
    table.param("dt", dt);
    let train = PulseTrain::new(ctrl.clone(), dt)?;
    let r = pulsed_steady_state(&model, &train)?;
    // continuous drive with the same time-averaged Hamiltonian
    let continuous = controlled_fixed_point(&model, Some(&ctrl)).ok();
    table.basis = labels(&model)?;
    table.columns = std::iter::once("dt".to_string())
        .chain(table.basis.iter().cloned())
        .chain(["distance_to_continuous".to_string()])
        .collect();
    let mut row = vec![Cell::Num(dt)];
    row.extend(numbers(r.as_slice()));
    row.push(Cell::Num(continuous.map_or(f64::NAN, |fp| fp.r_f.max_abs_diff(&r))));
    table.rows.push(row);
    if model.n_qubits() == 1 {
        table.diagnostic("transverse", format!("{:.16e}", r[0].hypot(r[1])));
    }
    Ok(table)
}

fn validate_cmd(path: &Path, format: Format) -> Result<Report> {
    let model = LindbladModel::from_json(&read(path)?)?;
    let rep = model.affine()?;
    let diag = is_relaxing(&rep);
    let mut report = Report::default();
    report.push("model", path.display().to_string());
    report.push("n_qubits", model.n_qubits());
    report.push("dissipators", model.dissipators().len());
    report.push("hermitian", true);
    report.push("relaxing", diag.relaxing);
    let fp = if diag.relaxing { Some(fixed_point(&rep)?) } else { None };
    match format {
        Format::Json => {
            report.push("spectral_abscissa", diag.spectral_abscissa);
            report.push("condition_number", diag.condition_number);
            let spectrum: Vec<[f64; 2]> = diag.spectrum.iter().map(|z| [z.re, z.im]).collect();
            report.push("spectrum", json!(spectrum));
            report.push("fixed_point", json!(fp.as_ref().map(|f| f.r_f.as_slice().to_vec())));
        }
        Format::Csv => {
            report.push("spectral_abscissa", short(diag.spectral_abscissa));
            report.push("condition_number", short(diag.condition_number));
            let spectrum: Vec<String> = diag.spectrum.iter().map(|z| short_complex(z.re, z.im)).collect();
            report.push("spectrum", spectrum.join(","));
            let fixed = fp.as_ref().map_or("none".to_string(), |f| {
                f.r_f.as_slice().iter().map(|&x| short(x)).collect::<Vec<_>>().join(",")
            });
            report.push("fixed_point", fixed);
        }
    }
    Ok(report)
}
