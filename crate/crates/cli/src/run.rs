//! The subcommands. Each returns the process exit status.

use std::fs;
use std::path::{Path, PathBuf};

use bps_vortex::{
    check_inequalities, compare_with_2d, compute_observables, solve, solve_radial, to_physical,
    Comparison, ConditionMargin, InequalityReport, ObservableSummary, PhysicalReport,
    PlanarDescriptor, ProblemSetup, RadialProblem, SolveReport,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, CellParams, ConfigError, Loaded, RunConfig, SweepConfig};
use crate::output::{self, fmt_value, FieldColumns};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_VIOLATED: i32 = 3;

pub const CONDITION_WARNING: &str = "CONDITION Eq.(3.9) VIOLATED (advisory)";

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub condition_margin: ConditionMargin,
    pub solve: SolveReport,
    pub observables: ObservableSummary,
    pub inequalities: Option<InequalityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalReport>,
}

/// Summary of one solve, as recorded in a sweep manifest.
#[derive(Debug, Clone, Copy)]
pub struct RunOutcome {
    pub converged: bool,
    pub iterations: usize,
    pub flux: f64,
    pub energy: f64,
    pub margin: f64,
    pub sup_residual: f64,
}

fn io_err(path: &Path, e: std::io::Error) -> String {
    format!("{}: {e}", path.display())
}

fn write(path: &Path, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

/// Solves a validated configuration and writes `fields.csv`, `report.json`
/// and `plot.gp` into `out`. `warn` receives the advisory warning, if any.
pub fn execute(
    cfg: &RunConfig,
    out: &Path,
    warn: &mut dyn FnMut(&str),
) -> Result<RunOutcome, String> {
    let p = ProblemSetup::new(cfg.grid, &cfg.sigma, &cfg.vortices).map_err(|e| e.to_string())?;
    let margin = bps_vortex::condition_margin(&cfg.sigma, &cfg.grid).map_err(|e| e.to_string())?;
    if !margin.satisfied {
        warn(CONDITION_WARNING);
    }
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;

    let sol = solve(&p, &cfg.solver, None).map_err(|e| e.to_string())?;
    let obs = compute_observables(&sol.u, &p).map_err(|e| e.to_string())?;
    let inequalities = check_inequalities(&sol.u, &p).ok();
    let physical = match cfg.physical {
        Some(ph) => Some(to_physical(&obs.summary, ph.g, ph.v0).map_err(|e| e.to_string())?),
        None => None,
    };

    let cols = FieldColumns {
        u: &sol.u,
        f: &obs.f,
        sigma: p.sigma(),
        b: &obs.b,
    };
    write(
        &out.join("fields.csv"),
        &output::fields_csv(&cfg.grid, p.vorticity(), &cols),
    )?;
    let title = format!(
        "n = {}, L = {}, N = {}",
        p.vorticity(),
        cfg.grid.half_width(),
        cfg.grid.points_per_side()
    );
    write(&out.join("plot.gp"), &output::profile_plot(&title))?;

    let outcome = RunOutcome {
        converged: sol.report.converged,
        iterations: sol.report.iterations,
        flux: obs.summary.flux,
        energy: obs.summary.energy_dimless,
        margin: margin.margin,
        sup_residual: sol.report.final_sup_residual,
    };
    let report = RunReport {
        config: cfg.clone(),
        condition_margin: margin,
        solve: sol.report,
        observables: obs.summary,
        inequalities,
        physical,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    write(&out.join("report.json"), &(json + "\n"))?;
    Ok(outcome)
}

fn load_run(path: &Path) -> Result<Loaded<RunConfig>, ConfigError> {
    let loaded = config::load::<RunConfig>(path)?;
    loaded.validate()?;
    Ok(loaded)
}

pub fn run_solve(config_path: &Path, out_override: Option<&Path>) -> i32 {
    let loaded = match load_run(config_path) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    let out = loaded.output_dir(out_override);
    match execute(&loaded.value, &out, &mut |w| eprintln!("{w}")) {
        Ok(o) => {
            println!(
                "converged={} iterations={} sup_residual={:e} flux={} energy={} margin={}",
                o.converged, o.iterations, o.sup_residual, o.flux, o.energy, o.margin
            );
            println!("wrote {}", out.display());
            if o.converged {
                EXIT_OK
            } else {
                eprintln!(
                    "solver did not converge; partial diagnostics in {}",
                    out.join("report.json").display()
                );
                EXIT_NOT_CONVERGED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_NOT_CONVERGED
        }
    }
}

pub fn run_check(config_path: &Path) -> i32 {
    let loaded =
        match config::load::<RunConfig>(config_path).and_then(|l| l.validate_sigma().map(|_| l)) {
            Ok(l) => l,
            Err(e) => {
                eprintln!("{e}");
                return EXIT_CONFIG;
            }
        };
    let c = &loaded.value;
    let m = match bps_vortex::condition_margin(&c.sigma, &c.grid) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{}", loaded.error_at(Some("sigma"), "type", e.to_string()));
            return EXIT_CONFIG;
        }
    };
    println!("norm2 = {}", m.norm2);
    if let Some(cf) = m.closed_form_norm2 {
        println!("closed_form_norm2 = {cf}");
    }
    println!("threshold = {}", m.threshold);
    println!("margin = {}", m.margin);
    println!("satisfied = {}", m.satisfied);
    let mut ok = m.satisfied;
    if let Some(ph) = c.physical {
        match bps_vortex::observables::physical_condition(m.norm2, ph.g, ph.v0) {
            Ok(pc) => {
                println!("physical: int |sigma|^2 = {}", pc.sigma_sq_integral);
                println!("physical: v0^2/(pi g^2) = {}", pc.bound);
                println!("physical: satisfied = {}", pc.satisfied);
                ok &= pc.satisfied;
            }
            Err(e) => {
                eprintln!("{}", loaded.error_at(Some("physical"), "g", e.to_string()));
                return EXIT_CONFIG;
            }
        }
    }
    if ok {
        EXIT_OK
    } else {
        eprintln!("{CONDITION_WARNING}");
        EXIT_VIOLATED
    }
}

#[derive(Debug, Clone, Serialize)]
struct OracleReport {
    radial_problem: RadialProblem,
    radial_converged: bool,
    radial_iterations: usize,
    radial_sup_residual: f64,
    radial_flux: f64,
    flux_expected: f64,
    planar: SolveReport,
    planar_flux: f64,
    comparison: Comparison,
}

pub fn run_oracle(config_path: &Path, out_override: Option<&Path>) -> i32 {
    let loaded = match load_run(config_path) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    let c = &loaded.value;
    let settings = c.radial.clone().unwrap_or(config::RadialSettings {
        outer_radius: None,
        nodes: 4001,
    });
    let mut rp = RadialProblem::new(
        c.vortices.n,
        c.sigma.clone(),
        settings.outer_radius.unwrap_or(
            c.grid
                .half_width()
                .max(bps_vortex::radial_oracle::MIN_RADIUS),
        ),
        settings.nodes,
    );
    rp.lambda = c.vortices.lambda;
    let planar = PlanarDescriptor {
        sigma: c.sigma.clone(),
        vortices: c.vortices.clone(),
    };
    // refuse before the expensive solves
    if let Err(e) = rp.validate() {
        eprintln!(
            "{}",
            loaded.error_at(Some("radial"), "radial", e.to_string())
        );
        return EXIT_CONFIG;
    }
    if !c.vortices.all_at_origin() {
        eprintln!(
            "{}",
            loaded.error_at(
                Some("vortices"),
                "positions",
                "oracle needs all vortices at the origin"
            )
        );
        return EXIT_CONFIG;
    }

    let out = loaded.output_dir(out_override);
    let result = (|| -> Result<(OracleReport, bool), String> {
        let p = ProblemSetup::new(c.grid, &c.sigma, &c.vortices).map_err(|e| e.to_string())?;
        let sol = solve(&p, &c.solver, None).map_err(|e| e.to_string())?;
        let obs = compute_observables(&sol.u, &p).map_err(|e| e.to_string())?;
        let radial = solve_radial(&rp).map_err(|e| e.to_string())?;
        let cmp = compare_with_2d(&radial, &obs.f, &c.grid, &planar).map_err(|e| e.to_string())?;
        fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
        write(&out.join("radial.csv"), &output::radial_csv(&radial))?;
        let cols = FieldColumns {
            u: &sol.u,
            f: &obs.f,
            sigma: p.sigma(),
            b: &obs.b,
        };
        write(
            &out.join("fields.csv"),
            &output::fields_csv(&c.grid, p.vorticity(), &cols),
        )?;
        let converged = sol.report.converged && radial.converged;
        Ok((
            OracleReport {
                radial_problem: rp.clone(),
                radial_converged: radial.converged,
                radial_iterations: radial.iterations,
                radial_sup_residual: radial.sup_residual,
                radial_flux: radial.flux,
                flux_expected: obs.summary.flux_expected,
                planar: sol.report,
                planar_flux: obs.summary.flux,
                comparison: cmp,
            },
            converged,
        ))
    })();
    match result {
        Ok((report, converged)) => {
            let path = out.join("oracle.json");
            let json = serde_json::to_string_pretty(&report).unwrap_or_default();
            if let Err(e) = write(&path, &(json + "\n")) {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
            println!(
                "sup_diff={} l2_diff={} radial_flux={} planar_flux={} expected={}",
                report.comparison.sup_diff,
                report.comparison.l2_diff,
                report.radial_flux,
                report.planar_flux,
                report.flux_expected
            );
            println!("wrote {}", out.display());
            if converged {
                EXIT_OK
            } else {
                EXIT_NOT_CONVERGED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

pub const MANIFEST_HEADER: &str =
    "cell,beta,alpha,n,lambda,L,N,converged,flux,energy,condition_margin,sup_residual,status";

fn manifest_row(index: usize, p: &CellParams, outcome: &Result<RunOutcome, String>) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let head = format!(
        "{index},{},{},{},{},{},{}",
        opt(p.beta),
        opt(p.alpha),
        p.n,
        p.lambda,
        p.half_width,
        p.points
    );
    match outcome {
        Ok(o) => format!(
            "{head},{},{},{},{},{},{}",
            o.converged,
            fmt_value(o.flux),
            fmt_value(o.energy),
            fmt_value(o.margin),
            fmt_value(o.sup_residual),
            if o.converged { "ok" } else { "not_converged" }
        ),
        Err(e) => format!("{head},false,,,,,\"error: {}\"", e.replace('"', "'")),
    }
}

pub fn cell_dir(out: &Path, index: usize) -> PathBuf {
    out.join(format!("cell_{index:04}"))
}

pub fn run_sweep(config_path: &Path, out_override: Option<&Path>) -> i32 {
    let loaded = match config::load::<SweepConfig>(config_path) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    let cells = match loaded.cells() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    let base = loaded.base();
    if let Err(e) = base.validate_sigma() {
        eprintln!("{e}");
        return EXIT_CONFIG;
    }
    if let Err(m) = base.value.solver.validate() {
        eprintln!("{}", loaded.error_at(Some("solver"), "solver", m));
        return EXIT_CONFIG;
    }
    let out = base.output_dir(out_override);
    if let Err(e) = fs::create_dir_all(&out) {
        eprintln!("error: {}", io_err(&out, e));
        return EXIT_CONFIG;
    }

    let outcomes: Vec<Result<RunOutcome, String>> = cells
        .par_iter()
        .enumerate()
        .map(|(i, (_, cfg))| {
            cfg.vortices
                .validate(&cfg.grid)
                .map_err(|e| e.to_string())?;
            execute(cfg, &cell_dir(&out, i), &mut |w| eprintln!("cell {i}: {w}"))
        })
        .collect();

    let mut manifest = String::from(MANIFEST_HEADER);
    manifest.push('\n');
    let mut plots = Vec::new();
    let mut all_converged = true;
    for (i, ((params, _), outcome)) in cells.iter().zip(&outcomes).enumerate() {
        manifest.push_str(&manifest_row(i, params, outcome));
        manifest.push('\n');
        match outcome {
            Ok(o) if o.converged => {
                let label = format!(
                    "beta={} alpha={} n={}",
                    params.beta.map(|b| b.to_string()).unwrap_or("-".into()),
                    params.alpha.map(|a| a.to_string()).unwrap_or("-".into()),
                    params.n
                );
                plots.push((format!("cell_{i:04}/fields.csv"), label));
            }
            Ok(_) => all_converged = false,
            Err(e) => {
                eprintln!("cell {i}: error: {e}");
                all_converged = false;
            }
        }
    }
    let manifest_path = loaded.manifest_path(&out);
    if let Err(e) = write(&manifest_path, &manifest)
        .and_then(|_| write(&out.join("plot.gp"), &output::overlay_plot(&plots)))
    {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    println!(
        "{} cells, manifest {}",
        cells.len(),
        manifest_path.display()
    );
    if all_converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    }
}
