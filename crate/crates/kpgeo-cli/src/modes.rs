use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use kpgeo::acceptance;
use kpgeo::disc_family::{Background, IterationConfig};
use kpgeo::fields::snapshot::save_real;
use kpgeo::fields::GridField;
use kpgeo::geodesic::{solve_geodesic, solve_shifted, GeodesicConfig, GeodesicRun};
use kpgeo::holo::{HoloDomain, UnitDisc};
use kpgeo::nash_moser::{choose_indices, derive_schedule, NMSchedule};
use kpgeo::oracle::{compare_paths, invariant_geodesic_oracle};
use kpgeo::potential::disc_potential;
use nalgebra::DMatrix;

use crate::config::{load_torus_snapshot, Mode, RunConfig};
use crate::error::CliError;
use crate::report::{RunReport, Status};

pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let report = match cfg.mode {
        Mode::SolveGeodesic => geodesic(cfg, None)?,
        Mode::ShiftBackground => {
            let path = cfg.background.as_ref().ok_or_else(|| CliError::Config("missing background".into()))?;
            let psi0 = load_torus_snapshot(path, cfg.torus_grid())?;
            geodesic(cfg, Some(psi0))?
        }
        Mode::DiscSolve => disc(cfg)?,
        Mode::Schedule => schedule(cfg)?,
        Mode::VerifySuite => verify(cfg, None)?,
    };
    report.write(&cfg.output_dir)?;
    Ok(report)
}

fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize, report: &mut RunReport) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(dir.join(name), text)?;
    report.artifacts.push(name.to_string());
    Ok(())
}

fn schedule_json(s: &NMSchedule) -> serde_json::Value {
    serde_json::json!({
        "indices": s.indices,
        "schedule": s,
        "smallness_holds": s.smallness_holds(),
    })
}

fn geodesic_config(cfg: &RunConfig, cells: usize) -> GeodesicConfig {
    let d = GeodesicConfig::default();
    GeodesicConfig {
        theta: cfg.theta,
        window_cells: cells,
        boundary_spacing: cfg.boundary_spacing.unwrap_or(d.boundary_spacing),
        k: cfg.k,
        j: cfg.j,
        eps: cfg.epsilon_amplitude,
        target: cfg.target.unwrap_or(d.target),
        max_steps: cfg.max_steps.unwrap_or(d.max_steps),
        inflation: d.inflation,
    }
}

fn geodesic(cfg: &RunConfig, psi0: Option<GridField<f64>>) -> Result<RunReport, CliError> {
    let dir = &cfg.output_dir;
    let mut report = RunReport::new(cfg, cfg.mode);
    let phi0 = cfg.endpoint(&cfg.endpoints.phi0)?;
    let phi1 = cfg.endpoint(&cfg.endpoints.phi1)?;
    let torus = cfg.torus_grid();
    let mut steps_csv = String::from("resolution,step,residual,residual_smoothed,smoothing_error,certified_bound,bound_holds\n");
    let mut refine_csv = String::from("resolution,h,theta_variation,geodesic_residual,oracle_diff\n");
    for &cells in &cfg.resolutions {
        let gcfg = geodesic_config(cfg, cells);
        let run: GeodesicRun = match &psi0 {
            None => solve_geodesic(&gcfg, Background::flat(torus), phi0.clone(), phi1.clone())?,
            Some(p) => solve_shifted(&gcfg, p, &phi0, &phi1)?,
        };
        let tag = format!("w{cells}");

        let trace_name = format!("trace_{tag}.csv");
        run.trace.write_csv(BufWriter::new(File::create(dir.join(&trace_name))?))?;
        report.artifacts.push(trace_name);
        write_json(dir, &format!("schedule_{tag}.json"), &schedule_json(&run.schedule), &mut report)?;

        let mut path = run.path.psi.clone();
        if let Some(p) = &psi0 {
            for k in 0..path.planar_len() {
                for (v, s) in path.slice_mut(k).iter_mut().zip(&p.values) {
                    *v += s;
                }
            }
        }
        let path_name = format!("path_{tag}.gfld");
        save_real(&path, &dir.join(&path_name))?;
        report.artifacts.push(path_name);

        let oracle_diff = if psi0.is_none() && torus.ny == 1 {
            let (orc, _) = invariant_geodesic_oracle(&phi0, &phi1, cells)?;
            let d = compare_paths(&run.path, &orc, &[])?.sup_diff;
            report.residual(format!("oracle_diff[{tag}]"), d);
            Some(d)
        } else {
            None
        };

        for (k, v) in [
            ("c0_probe", run.constants.c0_probe),
            ("c_probe", run.constants.c_probe),
            ("c0", run.constants.c0),
            ("c", run.constants.c),
            ("norm_constant", run.norm_constant),
            ("h_norm_b", run.h_norm_b),
            ("f_norm_b_alpha", run.f_norm_b_alpha),
            ("schedule_a", run.schedule.a),
            ("schedule_lambda", run.schedule.lambda),
        ] {
            report.constant(format!("{k}[{tag}]"), v);
        }
        for (k, v) in [
            ("final_residual", run.final_residual),
            ("theta_variation", run.theta_variation),
            ("geodesic_residual", run.geodesic_residual),
            ("boundary_match", run.boundary_match),
            ("bound_violations", run.trace.bound_violations as f64),
            ("nm_steps", run.trace.steps.len() as f64),
        ] {
            report.residual(format!("{k}[{tag}]"), v);
        }
        for s in &run.trace.steps {
            let _ = writeln!(
                steps_csv,
                "{cells},{},{:e},{:e},{:e},{:e},{}",
                s.n, s.residual, s.residual_smoothed, s.smoothing_error, s.certified_bound, s.bound_holds
            );
        }
        let _ = writeln!(
            refine_csv,
            "{cells},{:e},{:e},{:e},{}",
            1.0 / cells as f64,
            run.theta_variation,
            run.geodesic_residual,
            oracle_diff.map(|d| format!("{d:e}")).unwrap_or_default()
        );
        if !run.trace.converged {
            report.status = Status::Diverged;
            report.notes.push(format!("{tag}: residual {:e} above target after {} steps", run.final_residual, run.trace.steps.len()));
        }
        if !run.schedule.smallness_holds() {
            report.notes.push(format!("{tag}: smallness condition on |h|_B not met (reported only)"));
        }
    }
    std::fs::write(dir.join("residual_vs_step.csv"), steps_csv)?;
    std::fs::write(dir.join("theta_variation_vs_refinement.csv"), refine_csv)?;
    report.artifacts.push("residual_vs_step.csv".into());
    report.artifacts.push("theta_variation_vs_refinement.csv".into());
    Ok(report)
}

/// Disc data interpolating `φ₀` at `σ = −1` and `φ₁` at `σ = 1`.
fn disc_data(dom: &UnitDisc, phi0: &GridField<f64>, phi1: &GridField<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(dom.len(), phi0.values.len(), |j, c| {
        let w = 0.5 * (1.0 + dom.angle(j).cos());
        (1.0 - w) * phi0.values[c] + w * phi1.values[c]
    })
}

fn disc(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let mut report = RunReport::new(cfg, Mode::DiscSolve);
    let torus = cfg.torus_grid();
    let bg = match &cfg.background {
        Some(p) => Background::new(torus, load_torus_snapshot(p, torus)?.values)?,
        None => Background::flat(torus),
    };
    let phi0 = cfg.endpoint(&cfg.endpoints.phi0)?;
    let phi1 = cfg.endpoint(&cfg.endpoints.phi1)?;
    let mut csv = String::from("cells,hcma,q_consistency,boundary,leaf_agreement,exactness_defect\n");
    for &cells in &cfg.resolutions {
        let dom = UnitDisc::new(4 * cells);
        let b = disc_potential(&dom, &bg, disc_data(&dom, &phi0, &phi1), cells, &IterationConfig::default())?;
        let r = b.residuals;
        let tag = format!("c{cells}");
        for (k, v) in [
            ("hcma", r.hcma),
            ("q_consistency", r.q_consistency),
            ("boundary", r.boundary),
            ("leaf_agreement", r.leaf_agreement),
            ("exactness_defect", r.exactness_defect),
        ] {
            report.residual(format!("{k}[{tag}]"), v);
        }
        report.constant(format!("phi_sup[{tag}]"), b.phi.sup());
        let _ = writeln!(csv, "{cells},{:e},{:e},{:e},{:e},{:e}", r.hcma, r.q_consistency, r.boundary, r.leaf_agreement, r.exactness_defect);
    }
    std::fs::write(cfg.output_dir.join("disc_residuals.csv"), csv)?;
    report.artifacts.push("disc_residuals.csv".into());
    Ok(report)
}

fn schedule(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let mut report = RunReport::new(cfg, Mode::Schedule);
    let idx = choose_indices(cfg.k, cfg.j)?;
    let p = &cfg.schedule;
    let s = derive_schedule(&idx, p.c0, p.c, cfg.epsilon_amplitude, p.h_norm_b, p.steps)?;
    let json = schedule_json(&s);
    println!("{}", serde_json::to_string_pretty(&json)?);
    write_json(&cfg.output_dir, "schedule.json", &json, &mut report)?;
    for (k, v) in [
        ("zeta", idx.zeta as f64),
        ("r", idx.r),
        ("big_b", idx.big_b),
        ("b", idx.b),
        ("k_growth", s.k_growth),
        ("lambda", s.lambda),
        ("a", s.a),
        ("a_min", s.a_min),
        ("mu", s.mu),
        ("smallness_bound", s.smallness_bound),
    ] {
        report.constant(k, v);
    }
    if !s.smallness_holds() {
        report.notes.push("smallness condition on |h|_B not met (reported only)".into());
    }
    Ok(report)
}

pub fn verify(cfg: &RunConfig, only: Option<&str>) -> Result<RunReport, CliError> {
    let selected = acceptance::select(only);
    if selected.is_empty() {
        return Err(CliError::Config(format!("--only `{}` matches no criterion or module", only.unwrap_or(""))));
    }
    let mut report = RunReport::new(cfg, Mode::VerifySuite);
    for c in selected {
        let r = acceptance::run(c);
        println!("{}", r.line());
        report.acceptance.push(r);
    }
    if report.acceptance.iter().any(|r| !r.passed) {
        report.status = Status::AcceptanceFailed;
    }
    Ok(report)
}
