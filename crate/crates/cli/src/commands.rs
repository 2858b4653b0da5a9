use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use dnls_ist::direct::{scattering_coefficients, spectral_check, DirectConfig, DirectResult};
use dnls_ist::evolution::{evolve_rho, gauge_forward, gauge_inverse, PipelineConfig};
use dnls_ist::inverse::{chi, inverse_map, inverse_map_on, reconstruct_left, reconstruct_right, Reconstruction};
use dnls_ist::io::{self, Sidecar};
use dnls_ist::oracle::{self, Conserved, Equation, StepperConfig};
use dnls_ist::{make_dual_spectral_grid, Potential, ScatteringData, C64};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{RunConfig, Samples};
use crate::report::Recorder;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Eq {
    /// u_t = i u_xx + (|u|^2 u)_x
    Dnls1,
    /// q_t = i q_xx - q^2 conj(q)_x + (i/2) |q|^4 q
    Dnls2,
}

impl From<Eq> for Equation {
    fn from(e: Eq) -> Self {
        match e {
            Eq::Dnls1 => Equation::Dnls1,
            Eq::Dnls2 => Equation::Dnls2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Via {
    Ist,
    Pde,
    Both,
}

fn save_potential(cfg: &RunConfig, rec: &mut Recorder, name: &str, q: &Potential) -> Result<(), CliError> {
    let path = cfg.out(name);
    io::write_potential(q, &path)?;
    Sidecar::for_spatial(&q.grid, cfg.tolerances.as_map()).write(&Sidecar::path_for(&path))?;
    rec.produced(&path);
    rec.produced(&Sidecar::path_for(&path));
    Ok(())
}

fn save_scattering(cfg: &RunConfig, rec: &mut Recorder, name: &str, d: &ScatteringData) -> Result<(), CliError> {
    let path = cfg.out(name);
    io::write_scattering(d, &path)?;
    Sidecar::for_spectral(&d.grid, cfg.tolerances.as_map()).write(&Sidecar::path_for(&path))?;
    rec.produced(&path);
    rec.produced(&Sidecar::path_for(&path));
    Ok(())
}

fn direct_map(q: &Potential, pipeline: &PipelineConfig) -> Result<DirectResult, CliError> {
    Ok(scattering_coefficients(q, &make_dual_spectral_grid(&q.grid), &pipeline.direct)?)
}

fn certificate(d: &ScatteringData, direct: &DirectConfig) -> Result<Value, CliError> {
    let cert = spectral_check(d, direct.margin_floor, direct.alpha_floor)?;
    Ok(json!({
        "margin": cert.margin,
        "margin_lambda": cert.margin_lambda,
        "min_alpha": cert.min_alpha,
        "determinant_defect": d.determinant_defect(),
    }))
}

pub fn direct(cfg: &RunConfig) -> Result<(), CliError> {
    let mut rec = Recorder::new("direct");
    let q = cfg.potential()?;
    let pipeline = cfg.tolerances.pipeline();
    let d = direct_map(&q, &pipeline)?.data;
    save_scattering(cfg, &mut rec, "scattering.csv", &d)?;
    let results = json!({
        "lambda_points": d.grid.len(),
        "dlambda": d.grid.spacing(),
        "spectral": certificate(&d, &pipeline.direct)?,
    });
    rec.finish(cfg, results)?;
    Ok(())
}

fn write_samples(path: &Path, xs: &[f64], q: &[C64]) -> Result<(), CliError> {
    let mut text = String::from("x,re_q,im_q\n");
    for (x, v) in xs.iter().zip(q) {
        writeln!(text, "{x:.16e},{:.16e},{:.16e}", v.re, v.im).expect("writing to a String");
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Reconstruct at arbitrary points, using the right solve where the blend
/// weight favours it and the left solve elsewhere.
fn reconstruct_at(d: &ScatteringData, xs: &[f64], pipeline: &PipelineConfig) -> Result<Reconstruction, CliError> {
    let (right_x, left_x): (Vec<f64>, Vec<f64>) = xs.iter().partition(|&&x| chi(x) >= 0.5);
    let right = reconstruct_right(d, &right_x, &pipeline.inverse)?;
    let left = reconstruct_left(d, &left_x, &pipeline.inverse)?;
    let (mut r, mut l) = (right.q.iter().zip(&right.reports), left.q.iter().zip(&left.reports));
    let mut q = Vec::with_capacity(xs.len());
    let mut reports = Vec::with_capacity(xs.len());
    for &x in xs {
        let (v, rep) = if chi(x) >= 0.5 { r.next() } else { l.next() }.expect("partition covers every point");
        q.push(*v);
        reports.push(*rep);
    }
    Ok(Reconstruction {
        xs: xs.to_vec(),
        q,
        reports,
    })
}

pub fn inverse(cfg: &RunConfig, xs: Option<Samples>) -> Result<(), CliError> {
    let mut rec = Recorder::new("inverse");
    let d = io::read_scattering(cfg.input_path()?)?;
    let pipeline = cfg.tolerances.pipeline();
    let cert = certificate(&d, &pipeline.direct)?;
    let results = match xs {
        Some(s) => {
            let r = reconstruct_at(&d, &s.points(), &pipeline)?;
            rec.solves(&r.reports);
            let path = cfg.out("potential.csv");
            write_samples(&path, &r.xs, &r.q)?;
            rec.produced(&path);
            json!({ "points": r.xs.len(), "sup_q": sup(&r.q), "spectral": cert })
        }
        None => {
            let res = inverse_map(&d, &pipeline.inverse)?;
            rec.solves(&res.right.reports);
            rec.solves(&res.left.reports);
            save_potential(cfg, &mut rec, "potential.csv", &res.potential)?;
            json!({
                "points": res.potential.values.len(),
                "sup_q": res.potential.sup_norm(),
                "l2_q": res.potential.l2_norm(),
                "spectral": cert,
            })
        }
    };
    rec.finish(cfg, results)?;
    Ok(())
}

fn sup(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The scattering-transform solution at time `t`, on the grid of the initial field.
fn ist_solution(q0: &Potential, t: f64, eq: Eq, pipeline: &PipelineConfig, rec: &mut Recorder) -> Result<Potential, CliError> {
    let start = match eq {
        Eq::Dnls2 => q0.clone(),
        Eq::Dnls1 => gauge_forward(q0),
    };
    let data = direct_map(&start, pipeline)?.data;
    let res = inverse_map_on(&evolve_rho(&data, t), &start.grid, &pipeline.inverse)?;
    rec.solves(&res.right.reports);
    rec.solves(&res.left.reports);
    Ok(match eq {
        Eq::Dnls2 => res.potential,
        Eq::Dnls1 => gauge_inverse(&res.potential),
    })
}

fn functionals(eq: Eq, q: &Potential) -> Conserved {
    match eq {
        Eq::Dnls1 => oracle::conserved_dnls1(q),
        Eq::Dnls2 => oracle::conserved_dnls2(q),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn evolve(cfg: &RunConfig, t: f64, dt: f64, eq: Eq, via: Via) -> Result<(), CliError> {
    check_time(t, dt)?;
    let mut rec = Recorder::new("evolve");
    let q0 = cfg.potential()?;
    let pipeline = cfg.tolerances.pipeline();
    let m0 = functionals(eq, &q0).mass;
    let mut results = json!({ "t": t, "equation": eq, "via": via, "mass_initial": m0 });

    let ist = if via != Via::Pde {
        let q = ist_solution(&q0, t, eq, &pipeline, &mut rec)?;
        save_potential(cfg, &mut rec, "evolved_ist.csv", &q)?;
        results["ist_mass_drift"] = json!(rel(functionals(eq, &q).mass, m0));
        Some(q)
    } else {
        None
    };
    let pde = if via != Via::Ist {
        let q = oracle::integrate(eq.into(), &q0, &StepperConfig::new(dt, t))?;
        save_potential(cfg, &mut rec, "evolved_pde.csv", &q)?;
        results["dt"] = json!(dt);
        results["pde_mass_drift"] = json!(rel(functionals(eq, &q).mass, m0));
        Some(q)
    } else {
        None
    };
    if let (Some(a), Some(b)) = (&ist, &pde) {
        results["relative_l2_distance"] = json!(a.relative_l2_distance(b));
    }
    rec.finish(cfg, results)?;
    Ok(())
}

fn check_time(t: f64, dt: f64) -> Result<(), CliError> {
    if !(t >= 0.0 && t.is_finite() && dt > 0.0 && dt.is_finite()) {
        return Err(CliError::Usage(format!("need t >= 0 and dt > 0, got t = {t}, dt = {dt}")));
    }
    Ok(())
}

pub fn oracle(cfg: &RunConfig, t: f64, dt: f64, eq: Eq) -> Result<(), CliError> {
    check_time(t, dt)?;
    let mut rec = Recorder::new("oracle");
    let q0 = cfg.potential()?;
    let q = oracle::integrate(eq.into(), &q0, &StepperConfig::new(dt, t))?;
    save_potential(cfg, &mut rec, "oracle.csv", &q)?;
    let (c0, c1) = (functionals(eq, &q0), functionals(eq, &q));
    let results = json!({
        "t": t,
        "dt": dt,
        "equation": eq,
        "steps": (t / dt).ceil() as u64,
        "initial": c0,
        "final": c1,
        "relative_drift": {
            "mass": rel(c1.mass, c0.mass),
            "energy": rel(c1.energy, c0.energy),
            "momentum": rel(c1.momentum, c0.momentum),
        },
    });
    rec.finish(cfg, results)?;
    Ok(())
}

pub fn roundtrip(cfg: &RunConfig) -> Result<(), CliError> {
    let mut rec = Recorder::new("roundtrip");
    let q0 = cfg.potential()?;
    let pipeline = cfg.tolerances.pipeline();
    let d = direct_map(&q0, &pipeline)?.data;
    let res = inverse_map_on(&d, &q0.grid, &pipeline.inverse)?;
    rec.solves(&res.right.reports);
    rec.solves(&res.left.reports);
    save_potential(cfg, &mut rec, "roundtrip.csv", &res.potential)?;

    let diff: Vec<C64> = res.potential.values.iter().zip(&q0.values).map(|(a, b)| a - b).collect();
    let sup_abs = sup(&diff);
    let scale = q0.sup_norm();
    let sup_rel = if scale > 0.0 { sup_abs / scale } else { sup_abs };
    let tol = cfg.tolerances.roundtrip;
    let results = json!({
        "sup_error_abs": sup_abs,
        "sup_error": sup_rel,
        "l2_error": if scale > 0.0 { res.potential.relative_l2_distance(&q0) } else { res.potential.l2_norm() },
        "tolerance": tol,
        "passed": sup_rel <= tol,
        "spectral": certificate(&d, &pipeline.direct)?,
    });
    rec.finish(cfg, results)?;
    if sup_rel > tol {
        return Err(CliError::Accuracy(format!("roundtrip sup-error {sup_rel:.3e} exceeds {tol:.3e}")));
    }
    Ok(())
}

pub fn check(cfg: &RunConfig) -> Result<(), CliError> {
    let rec = Recorder::new("check");
    let pipeline = cfg.tolerances.pipeline();
    let d = match &cfg.input {
        Some(path) => io::read_scattering(path)?,
        None => direct_map(&cfg.potential()?, &pipeline)?.data,
    };
    let cert = certificate(&d, &pipeline.direct)?;
    let defect = d.determinant_defect();
    let tol = cfg.tolerances.det;
    let ok = defect.is_none_or(|v| v <= tol);
    let results = json!({ "spectral": cert, "det_tolerance": tol, "passed": ok });
    rec.finish(cfg, results)?;
    if !ok {
        return Err(CliError::DataCheck(format!(
            "determinant defect {:.3e} exceeds {tol:.3e}",
            defect.unwrap_or(f64::NAN)
        )));
    }
    Ok(())
}
