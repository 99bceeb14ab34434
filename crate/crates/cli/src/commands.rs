//! The four subcommands. Each returns an [`Outcome`] once its checks ran;
//! errors mean the check could not be carried out.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use laxlab_core::fmt::float;
use laxlab_core::frame::{curvature_summary, CurvatureSummary, DiscreteForms};
use laxlab_core::laxpair::{BranchClass, LAX_LABELS};
use laxlab_core::sine_gordon::{
    energy_series, evolve, kink_field, max_error_vs_kink, metric_degeneracy, relative_energy_drift, write_phi_csv,
    DegeneracyWarning,
};
use laxlab_core::structure::EquationResidual;
use laxlab_core::{
    classify_branch, constraint_field, curvatures, discrete_forms, equivalence_report, path_defect, propagate_frames,
    reconstruct_surface, zero_curvature_residuals, DerivativeStrategy, Error, Family, GridSpec, Mat3, SGState,
};
use serde::Serialize;

use crate::scenario::Scenario;
use crate::Command;

pub enum Outcome {
    Pass(String),
    Fail(String),
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: Command,
    scenario: &'a Scenario,
}

pub fn run(command: Command, scenario: &Scenario) -> Result<Outcome> {
    let out = scenario.out_dir();
    fs::create_dir_all(out).with_context(|| format!("cannot create output directory {}", out.display()))?;
    let manifest = Manifest { tool: "laxlab", version: env!("CARGO_PKG_VERSION"), command, scenario };
    write_json(out, "run_manifest.json", &manifest)?;
    match command {
        Command::Verify => verify(scenario, out),
        Command::Solve => solve(scenario, out),
        Command::Reconstruct => reconstruct(scenario, out),
        Command::Report => report(scenario, out),
    }
}

#[derive(Serialize)]
struct EquivalenceJson<'a> {
    grid: GridSpec,
    derivative_strategy: DerivativeStrategy,
    comparison: &'a [EquationResidual],
    max_pair_discrepancy: f64,
    slot23_difference: f64,
    constraint_max_abs: f64,
}

#[derive(Serialize)]
struct BranchJson {
    #[serde(flatten)]
    class: BranchClass,
    constraint_holds: bool,
}

fn verify(sc: &Scenario, out: &Path) -> Result<Outcome> {
    let (c, s) = sc.sample(&sc.grid)?;
    let eq = equivalence_report(&c, &s)?;
    let class = classify_branch(&c, &s, sc.branch_threshold())?;
    let constraint = constraint_field(&c, &s)?;

    write_json(out, "structure_residuals.json", &eq.structure)?;
    write_json(out, "lax_residuals.json", &eq.lax)?;
    write_json(
        out,
        "equivalence.json",
        &EquivalenceJson {
            grid: eq.comparison.grid,
            derivative_strategy: eq.comparison.derivative_strategy,
            comparison: &eq.comparison.residuals,
            max_pair_discrepancy: eq.max_pair_discrepancy(),
            slot23_difference: eq.slot23_difference(),
            constraint_max_abs: constraint.max_abs(),
        },
    )?;
    write_json(out, "branch.json", &BranchJson { constraint_holds: class.constraint_holds(), class: class.clone() })?;

    let tol = sc.tolerances.residual;
    let worst = eq
        .structure
        .residuals
        .iter()
        .chain(&eq.lax.residuals)
        .max_by(|a, b| a.max_abs.total_cmp(&b.max_abs))
        .expect("residuals are never empty");
    let summary = format!("max residual {} ({}), branch {:?}", float(worst.max_abs), worst.equation, class.branch);
    if eq.structure.residuals.iter().chain(&eq.lax.residuals).all(|r| r.max_abs <= tol) {
        Ok(Outcome::Pass(format!("verify: {summary}")))
    } else {
        Ok(Outcome::Fail(format!("verify: {summary} exceeds tolerance {}", float(tol))))
    }
}

#[derive(Serialize)]
struct SolveReport {
    family: &'static str,
    steps: usize,
    dx: f64,
    dt: f64,
    cfl_ratio: f64,
    oracle: &'static str,
    max_error: f64,
    exact_energy: f64,
    energy_initial: f64,
    energy_final: f64,
    relative_energy_drift: f64,
    degeneracy_warning: Option<DegeneracyWarning>,
}

fn solve(sc: &Scenario, out: &Path) -> Result<Outcome> {
    let grid = sc.grid;
    let steps = sc.solve.steps.unwrap_or(grid.nt() - 1);
    let (state, kink) = match &sc.family {
        Family::Zero => (SGState::zero(grid, sc.solve.cfl)?, None),
        Family::SineGordonKink(p) => (SGState::kink(grid, *p, sc.solve.cfl)?, Some(*p)),
        other => anyhow::bail!("family.name: solve cannot start from {}", other.name()),
    };
    let phi = match evolve(&state, steps) {
        Ok(phi) => phi,
        Err(e @ Error::NonFinite { .. }) => return Ok(Outcome::Fail(format!("solve: {e}"))),
        Err(e) => return Err(e.into()),
    };

    let mut w = create(out, "phi.csv")?;
    write_phi_csv(&mut w, &phi, sc.solve.snapshot_stride)?;
    w.flush()?;
    let series = energy_series(&phi);
    let mut w = create(out, "energy.csv")?;
    writeln!(w, "t,energy")?;
    for (t, e) in &series {
        writeln!(w, "{},{}", float(*t), float(*e))?;
    }
    w.flush()?;

    let (oracle, max_error, exact_energy) = match kink {
        Some(p) => ("sine_gordon_kink", max_error_vs_kink(&phi, &p), p.energy()),
        None => ("zero", phi.max_abs(), 0.0),
    };
    let report = SolveReport {
        family: sc.family.name(),
        steps,
        dx: grid.dx(),
        dt: grid.dt(),
        cfl_ratio: grid.dt() / grid.dx(),
        oracle,
        max_error,
        exact_energy,
        energy_initial: series.first().map_or(0.0, |p| p.1),
        energy_final: series.last().map_or(0.0, |p| p.1),
        relative_energy_drift: relative_energy_drift(&series),
        degeneracy_warning: metric_degeneracy(&phi, sc.tolerances.degeneracy_guard),
    };
    write_json(out, "solve_report.json", &report)?;

    let summary = format!(
        "max error {} vs {oracle}, relative energy drift {}",
        float(report.max_error),
        float(report.relative_energy_drift)
    );
    match sc.tolerances.solver_error {
        Some(tol) if report.max_error.is_nan() || report.max_error > tol => {
            Ok(Outcome::Fail(format!("solve: {summary}; error exceeds tolerance {}", float(tol))))
        }
        _ => Ok(Outcome::Pass(format!("solve: {summary}"))),
    }
}

#[derive(Serialize)]
struct CurvatureJson {
    all_degenerate: bool,
    summary: Option<CurvatureSummary>,
    tolerance: f64,
    path_defect: f64,
    frame_orthonormality_defect: f64,
    perturb_u23: f64,
    degeneracy_warning: Option<DegeneracyWarning>,
}

fn write_node_curvatures(out: &Path, forms: &DiscreteForms, analytic_k: &laxlab_core::ScalarField) -> Result<()> {
    let mut w = create(out, "curvature_nodes.csv")?;
    writeln!(w, "j,n,K_disc,H_disc,K")?;
    for (j, n, f) in forms.iter() {
        writeln!(w, "{j},{n},{},{},{}", float(f.gaussian), float(f.mean), float(analytic_k.at(j, n)))?;
    }
    w.flush()?;
    Ok(())
}

fn reconstruct(sc: &Scenario, out: &Path) -> Result<Outcome> {
    let grid = sc.grid;
    let (mut c, s) = sc.sample(&grid)?;
    let factor = sc.reconstruct.perturb_u23;
    if factor != 1.0 {
        c.u23 = c.u23.scale(factor);
    }
    let frames = propagate_frames(&c, &s, Mat3::IDENTITY)?;
    let defect = path_defect(&c, &s, Mat3::IDENTITY)?;
    let mesh = reconstruct_surface(&frames, &c)?;

    let mut w = create(out, "surface.obj")?;
    mesh.write_obj(&mut w)?;
    w.flush()?;
    let mut w = create(out, "surface.csv")?;
    mesh.write_csv(&mut w)?;
    w.flush()?;

    let warning = match &sc.family {
        Family::SineGordonKink(p) => metric_degeneracy(&kink_field(grid, *p), sc.tolerances.degeneracy_guard),
        _ => None,
    };
    let tol = sc.tolerances.curvature;
    let analytic_k = curvatures(&s).gaussian;
    let (summary, forms) = match discrete_forms(&mesh) {
        Ok(forms) => (Some(curvature_summary(&forms, &analytic_k)), Some(forms)),
        Err(Error::AllDegenerate) => (None, None),
        Err(e) => return Err(e.into()),
    };
    if let Some(forms) = &forms {
        write_node_curvatures(out, forms, &analytic_k)?;
    }
    let report = CurvatureJson {
        all_degenerate: summary.is_none(),
        summary,
        tolerance: tol,
        path_defect: defect,
        frame_orthonormality_defect: frames.max_defect(),
        perturb_u23: factor,
        degeneracy_warning: warning,
    };
    write_json(out, "curvature.json", &report)?;

    let Some(summary) = report.summary else {
        return Ok(Outcome::Fail(format!(
            "reconstruct: {}; the surface has no nondegenerate interior node",
            Error::AllDegenerate
        )));
    };
    let line = format!(
        "mean K_disc {}, max relative deviation {} over {} nodes ({} degenerate), path defect {}",
        float(summary.mean_gaussian),
        float(summary.max_rel_gaussian_deviation),
        summary.evaluated_nodes,
        summary.degenerate_nodes,
        float(defect)
    );
    if summary.max_rel_gaussian_deviation <= tol {
        Ok(Outcome::Pass(format!("reconstruct: {line}")))
    } else {
        Ok(Outcome::Fail(format!("reconstruct: {line} exceeds tolerance {}", float(tol))))
    }
}

/// Residuals at or below this are rounding noise and carry no order.
const ROUNDOFF_FLOOR: f64 = 1e-12;

/// Observed order between two refinement levels, if both errors are usable.
fn observed_order(coarse: (f64, f64), fine: (f64, f64)) -> Option<f64> {
    let ((h0, e0), (h1, e1)) = (coarse, fine);
    let usable = |e: f64| e > ROUNDOFF_FLOOR && e.is_finite();
    (usable(e0) && usable(e1) && h0 != h1).then(|| (e0 / e1).ln() / (h0 / h1).ln())
}

fn report(sc: &Scenario, out: &Path) -> Result<Outcome> {
    let mut rows: Vec<(GridSpec, f64, Vec<f64>)> = Vec::new();
    for r in &sc.report.resolutions {
        let (nx, nt) = r.dims();
        let grid = sc.grid.with_resolution(nx, nt)?;
        let (c, s) = laxlab_core::sample_family(&sc.family, &grid)?;
        let lax = zero_curvature_residuals(&c.sampled_only(), &s.sampled_only())?;
        let errors = LAX_LABELS.iter().map(|l| lax.get(l).map_or(f64::NAN, |e| e.max_abs)).collect();
        rows.push((grid, grid.dx().max(grid.dt()), errors));
    }

    let mut w = create(out, "convergence.csv")?;
    let header: Vec<String> = ["nx", "nt", "h"]
        .iter()
        .map(|s| s.to_string())
        .chain(LAX_LABELS.iter().map(|l| l.to_string()))
        .chain(LAX_LABELS.iter().map(|l| format!("order_{l}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (i, (grid, h, errors)) in rows.iter().enumerate() {
        let mut cells = vec![grid.nx().to_string(), grid.nt().to_string(), float(*h).to_string()];
        cells.extend(errors.iter().map(|e| float(*e).to_string()));
        for (k, e) in errors.iter().enumerate() {
            let order = i.checked_sub(1).and_then(|p| observed_order((rows[p].1, rows[p].2[k]), (*h, *e)));
            cells.push(order.map_or("N/A".to_string(), |o| float(o).to_string()));
        }
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;

    if rows.iter().all(|(_, _, e)| e.iter().all(|v| v.is_finite())) {
        Ok(Outcome::Pass(format!("report: {} resolutions written to convergence.csv", rows.len())))
    } else {
        Ok(Outcome::Fail("report: non-finite residuals".to_string()))
    }
}
