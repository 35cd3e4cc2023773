//! The `sh2d` subcommands.

use std::path::{Path, PathBuf};

use log::info;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sh2d_core::evolve::{self, EvolveError};
use sh2d_core::grid::snapshot;
use sh2d_core::groundstate::{self, SolveReport, SolverConfig};
use sh2d_core::pointop::EnergyElement;
use sh2d_core::potential::Potential;
use sh2d_core::{Field, PointOperator, Space};

use crate::config::{InitialDatum, LoadedConfig, Needs, RunConfig, Validated};
use crate::output::{content_hash, OutputDir};
use crate::verify;
use crate::{CliError, Command, Outcome};

#[derive(Serialize)]
struct Echo<'a> {
    command: &'a str,
    seed: u64,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct RunMeta<'a> {
    command: &'a str,
    seed: u64,
    input_hash: String,
    version: &'a str,
    outputs: Vec<String>,
}

fn needs(cmd: Command) -> Needs {
    match cmd {
        Command::Groundstate => Needs {
            lambda: true,
            potential: true,
            evolution: false,
        },
        Command::Evolve => Needs {
            lambda: false,
            potential: true,
            evolution: true,
        },
        Command::Spectrum => Needs {
            lambda: false,
            potential: false,
            evolution: false,
        },
        Command::Verify | Command::Gn => Needs {
            lambda: false,
            potential: true,
            evolution: false,
        },
    }
}

/// Validates, runs `cmd` and writes its outputs plus the config echo and run
/// metadata into `out`.
pub fn execute(cmd: Command, cfg: &LoadedConfig, seed: u64, out: &Path) -> Result<Outcome, CliError> {
    let v = cfg.validate(needs(cmd)).map_err(CliError::Config)?;
    let mut inputs: Vec<Vec<u8>> = Vec::new();
    if let Some(ev) = &cfg.config.evolution {
        if cmd == Command::Evolve {
            inputs = datum_inputs(cfg, &ev.initial)?;
        }
    }
    let op = PointOperator::new(v.params, v.spec).map_err(compute)?;
    let mut dir = OutputDir::create(out)?;
    let outcome = match cmd {
        Command::Groundstate => groundstate_cmd(&op, &v, &cfg.config, &mut dir)?,
        Command::Evolve => evolve_cmd(&op, &v, cfg, &mut dir)?,
        Command::Spectrum => spectrum_cmd(&op, &mut dir)?,
        Command::Verify => verify_cmd(&op, &v, &cfg.config, seed, &mut dir)?,
        Command::Gn => gn_cmd(&op, &v, &cfg.config, &mut dir)?,
    };
    let name = cmd.name();
    let echo = Echo {
        command: name,
        seed,
        config: &cfg.config,
    };
    dir.write_json("config.json", &echo)?;
    let echo_bytes = serde_json::to_vec(&echo).map_err(|e| CliError::Io(e.to_string()))?;
    let mut parts: Vec<&[u8]> = vec![&echo_bytes];
    parts.extend(inputs.iter().map(|b| b.as_slice()));
    let mut files = dir.files();
    files.push("run.json".into());
    files.sort();
    let meta = RunMeta {
        command: name,
        seed,
        input_hash: content_hash(&parts),
        version: env!("CARGO_PKG_VERSION"),
        outputs: files,
    };
    dir.write_json("run.json", &meta)?;
    Ok(outcome)
}

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

fn potential(v: &Validated) -> &Potential {
    v.potential.as_ref().expect("validated potential")
}

#[derive(Serialize)]
struct ProfileRow {
    r: f64,
    abs_f: f64,
    abs_v: f64,
}

fn groundstate_cmd(op: &PointOperator, v: &Validated, c: &RunConfig, dir: &mut OutputDir) -> Result<Outcome, CliError> {
    let pot = potential(v);
    let lambda = v.lambda.expect("validated lambda");
    let cfg = SolverConfig {
        lambda,
        tol: c.solver.tol,
        max_iter: c.solver.max_iter,
        symmetrize_every: c.solver.symmetrize_every,
    };
    let (elem, report) = groundstate::minimize(op, pot, &cfg, None).map_err(compute)?;
    let vfield = op.assemble(&elem).map_err(compute)?;
    dir.write_json("report.json", &report)?;
    dir.write_field("f.bin", &elem.f)?;
    dir.write_field("v.bin", &vfield)?;
    dir.write_csv("profile.csv", &radial_profile(&elem.f, &vfield))?;

    let mut lines = vec![
        format!("W = {:.12e}", report.w_value),
        format!("Lambda = {:.12e}", report.lambda_ratio),
        format!("c = {:.12e}, f(0) = {:.12e}", report.c, report.f_origin),
        format!(
            "iterations = {}, el_residual = {:.3e}, canonical_gap = {:.3e}, monotone_radial = {}",
            report.iterations, report.el_residual, report.canonical_gap, report.monotone_radial
        ),
    ];
    for e in &report.symmetrization_events {
        lines.push(format!(
            "symmetrisation event at iteration {}: W would rise by {:.3e}",
            e.iteration, e.relative_increase
        ));
    }
    if report.converged {
        Ok(Outcome::ok(lines))
    } else {
        lines.push(format!(
            "not converged: el_residual {:.3e} >= tol {:.3e} after {} iterations",
            report.el_residual, cfg.tol, report.iterations
        ));
        Ok(Outcome::new(2, lines))
    }
}

/// `(r, |f|, |v|)` along the positive first axis from the origin cell.
fn radial_profile(f: &Field, v: &Field) -> Vec<ProfileRow> {
    let spec = *f.spec();
    let n = spec.cells();
    let o = spec.origin_index();
    let h = spec.spacing();
    (0..n / 2)
        .map(|j| {
            let i = o + j * n;
            ProfileRow {
                r: j as f64 * h,
                abs_f: f.values()[i].norm(),
                abs_v: v.values()[i].norm(),
            }
        })
        .collect()
}

fn datum_inputs(cfg: &LoadedConfig, d: &InitialDatum) -> Result<Vec<Vec<u8>>, CliError> {
    let read = |p: PathBuf| std::fs::read(&p).map_err(|e| CliError::Io(format!("cannot read {}: {e}", p.display())));
    Ok(match d {
        InitialDatum::Gaussian { .. } => vec![],
        InitialDatum::File { path } => vec![read(cfg.resolve(path))?],
        InitialDatum::Groundstate { path, .. } => {
            let base = cfg.resolve(path);
            vec![read(base.join("v.bin"))?, read(base.join("report.json"))?]
        }
    })
}

fn initial_datum(op: &PointOperator, cfg: &LoadedConfig, d: &InitialDatum) -> Result<Field, CliError> {
    let spec = *op.spec();
    let load = |p: &Path| -> Result<Field, CliError> {
        let f = snapshot::load(p).map_err(|e| CliError::Io(format!("cannot load {}: {e}", p.display())))?;
        if *f.spec() != spec {
            return Err(CliError::Io(format!("{} lives on a different grid", p.display())));
        }
        f.into_space(Space::Position).map_err(compute)
    };
    match d {
        InitialDatum::Gaussian {
            amplitude,
            width,
            center,
            singular,
        } => {
            let mut u = Field::from_real_fn(spec, |x, y| {
                let r2 = (x - center[0]).powi(2) + (y - center[1]).powi(2);
                amplitude * (-r2 / (2.0 * width * width)).exp()
            });
            if *singular != 0.0 {
                let g = op.green_field_real(op.params().omega_ref()).map_err(compute)?;
                let s = singular / g.l2_norm();
                u.axpy(Complex64::new(s, 0.0), &g).map_err(compute)?;
            }
            Ok(u)
        }
        InitialDatum::File { path } => load(&cfg.resolve(path)),
        InitialDatum::Groundstate { path, rescale } => {
            let base = cfg.resolve(path);
            let v = load(&base.join("v.bin"))?;
            if !rescale {
                return Ok(v);
            }
            let text = std::fs::read_to_string(base.join("report.json"))
                .map_err(|e| CliError::Io(format!("cannot read ground-state report: {e}")))?;
            let report: SolveReport =
                serde_json::from_str(&text).map_err(|e| CliError::Io(format!("bad ground-state report: {e}")))?;
            Ok(v.scale_real(report.lambda_ratio.sqrt()))
        }
    }
}

#[derive(Serialize)]
struct EvolveSummary {
    steps: usize,
    records: usize,
    mass_drift: f64,
    energy_drift: f64,
    sup_h1alpha: f64,
    blow_up: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    modulus_stationarity: Option<f64>,
}

#[derive(Serialize)]
struct TraceRow {
    t: f64,
    mass: f64,
    energy: f64,
    h1alpha: f64,
}

fn evolve_cmd(op: &PointOperator, v: &Validated, cfg: &LoadedConfig, dir: &mut OutputDir) -> Result<Outcome, CliError> {
    let pot = potential(v);
    let ev = v.evolution.expect("validated evolution");
    let section = cfg.config.evolution.as_ref().expect("validated evolution");
    let psi0 = initial_datum(op, cfg, &section.initial)?;
    let from_groundstate = matches!(section.initial, InitialDatum::Groundstate { .. });
    let (m0, norm0) = (psi0.modulus(), psi0.l2_norm());
    let mut stationarity: f64 = 0.0;
    let trace = evolve::run_with(op, pot, &psi0, &ev, &mut |_, psi| {
        if from_groundstate {
            stationarity = stationarity.max((&psi.modulus() - &m0).l2_norm() / norm0);
        }
    });
    let trace = match trace {
        Ok(t) => t,
        Err(e @ EvolveError::NonFinite { .. }) => {
            return Ok(Outcome::new(2, vec![format!("numerical failure: {e}")]));
        }
        Err(e) => return Err(compute(e)),
    };
    let rows: Vec<TraceRow> = (0..trace.len())
        .map(|i| TraceRow {
            t: trace.times[i],
            mass: trace.mass[i],
            energy: trace.energy[i],
            h1alpha: trace.h1alpha[i],
        })
        .collect();
    dir.write_csv("trace.csv", &rows)?;
    for (k, (_, snap)) in trace.snapshots.iter().enumerate() {
        dir.write_field(&format!("snapshot_{k:05}.bin"), snap)?;
    }
    if let Some(f) = &trace.final_state {
        dir.write_field("final.bin", f)?;
    }
    let summary = EvolveSummary {
        steps: ev.steps(),
        records: trace.len(),
        mass_drift: trace.mass_drift(),
        energy_drift: trace.energy_drift(),
        sup_h1alpha: trace.sup_h1alpha(),
        blow_up: trace.blow_up,
        modulus_stationarity: from_groundstate.then_some(stationarity),
    };
    dir.write_json("evolve.json", &summary)?;
    let mut lines = vec![
        format!("records = {}, steps = {}", summary.records, summary.steps),
        format!("mass drift = {:.3e} (relative)", summary.mass_drift),
        format!("energy drift = {:.3e}", summary.energy_drift),
        format!("sup H1_alpha = {:.6e}", summary.sup_h1alpha),
    ];
    if from_groundstate {
        lines.push(format!(
            "modulus stationarity: sup_t || |psi(t)| - |psi0| || / ||psi0|| = {stationarity:.3e}"
        ));
    }
    if trace.blow_up {
        let t = trace.times.last().copied().unwrap_or(0.0);
        lines.push(format!(
            "diagnostic blow-up flag at t = {t}: H1_alpha norm exceeded {:e} x its initial value (not a numerical failure)",
            evolve::BLOW_UP_FACTOR
        ));
        return Ok(Outcome::new(3, lines));
    }
    Ok(Outcome::ok(lines))
}

#[derive(Serialize)]
struct SpectrumReport {
    e_h: f64,
    e_alpha: f64,
    relative_gap: f64,
    /// `‖φ − G/‖G‖‖` for the Green function at `ω = |e_h|`.
    eigenfunction_mismatch: f64,
}

fn spectrum_cmd(op: &PointOperator, dir: &mut OutputDir) -> Result<Outcome, CliError> {
    let (e_h, phi) = op.bound_state().map_err(compute)?;
    let e_alpha = op.params().e_alpha();
    let g = op.green_field_real(-e_h).map_err(compute)?;
    let g = g.scale_real(1.0 / g.l2_norm());
    let rep = SpectrumReport {
        e_h,
        e_alpha,
        relative_gap: ((e_h - e_alpha) / e_alpha).abs(),
        eigenfunction_mismatch: (&phi - &g).l2_norm(),
    };
    dir.write_json("spectrum.json", &rep)?;
    info!("spectrum: e_h = {e_h}");
    Ok(Outcome::ok(vec![
        format!("e_h = {:.12e}", rep.e_h),
        format!("e_alpha = {:.12e}", rep.e_alpha),
        format!("relative gap = {:.3e}", rep.relative_gap),
        format!("eigenfunction vs Green function = {:.3e}", rep.eigenfunction_mismatch),
    ]))
}

#[derive(Serialize)]
struct VerifyReport {
    seed: u64,
    c_gn: f64,
    passed: bool,
    suites: Vec<verify::SuiteResult>,
}

fn verify_cmd(op: &PointOperator, v: &Validated, c: &RunConfig, seed: u64, dir: &mut OutputDir) -> Result<Outcome, CliError> {
    let pot = potential(v);
    let trials = c.verify.trials;
    let gn = groundstate::gn_constant_estimate(op, pot, &c.gn).map_err(compute)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let suites = vec![
        verify::riesz_bfll(pot, trials, &mut rng),
        verify::polya_szego(v.spec, trials, &mut rng),
        verify::gagliardo_nirenberg(op, pot, gn.c_gn, trials, &mut rng),
        verify::self_adjoint_pairing(pot, trials, &mut rng),
    ];
    let passed = suites.iter().all(|s| s.passed);
    let lines = suites.iter().map(|s| s.summary()).collect();
    dir.write_json(
        "verify.json",
        &VerifyReport {
            seed,
            c_gn: gn.c_gn,
            passed,
            suites,
        },
    )?;
    Ok(Outcome::new(if passed { 0 } else { 2 }, lines))
}

#[derive(Serialize)]
struct GnOutput<'a> {
    #[serde(flatten)]
    report: &'a groundstate::GNReport,
    regime: sh2d_core::potential::Regime,
}

fn gn_cmd(op: &PointOperator, v: &Validated, c: &RunConfig, dir: &mut OutputDir) -> Result<Outcome, CliError> {
    let pot = potential(v);
    let rep = groundstate::gn_constant_estimate(op, pot, &c.gn).map_err(compute)?;
    dir.write_json(
        "gn.json",
        &GnOutput {
            report: &rep,
            regime: pot.regime(),
        },
    )?;
    if let Some(EnergyElement { f, .. }) = &rep.maximizer {
        dir.write_field("maximizer_f.bin", f)?;
    }
    let mut lines = vec![
        format!("C_gn = {:.12e} (p = {})", rep.c_gn, rep.p),
        format!("kappa = sqrt(2/C_gn) = {:.12e}", rep.kappa),
        format!("iterations = {}, gradient norm = {:.3e}", rep.iterations, rep.gradient_norm),
    ];
    if rep.converged {
        Ok(Outcome::ok(lines))
    } else {
        lines.push(format!("not converged: gradient norm {:.3e} > tol {:.3e}", rep.gradient_norm, c.gn.tol));
        Ok(Outcome::new(2, lines))
    }
}
