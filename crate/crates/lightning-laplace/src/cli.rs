//! Command-line front end: solve, demo, eval, theory.
//!
//! Exit codes: 0 success, 1 any error (bad flags, malformed files,
//! evaluation failure), 2 the solve ran but did not reach its tolerance
//! (artifacts are still written so the run can be inspected).

use crate::demos;
use crate::error::{Error, Result};
use crate::evaluator::{eval_grid, EvaluationGrid};
use crate::files::{self, EvalRow};
use crate::solver::{ablation_shifted_poles, solve, ConvergenceReport, Solution, SolverConfig};
use crate::theory::{
    energy, energy_gradient, newman_set, phi_level_grid, wedge_convergence_study, TestFn,
    WedgeProblem,
};
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "lightning",
    version,
    about = "Laplace Dirichlet solver with corner-clustered rational bases"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem given geometry and boundary-condition files.
    Solve {
        /// Geometry JSON ({"vertices": ...} or {"corners": ..., "arcs": ...}).
        #[arg(long)]
        domain: PathBuf,
        /// Boundary-condition JSON ({"arcs": [...]} or {"all": ...}).
        #[arg(long)]
        bc: PathBuf,
        /// Target sup-norm boundary error.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Pole clustering strength.
        #[arg(long)]
        sigma: Option<f64>,
        /// Cap on degrees of freedom.
        #[arg(long)]
        max_dofs: Option<usize>,
        /// Force the corner-weighted error norm.
        #[arg(long)]
        weighted: bool,
        /// Solution output path.
        #[arg(long, default_value = "solution.json")]
        out: PathBuf,
        /// Convergence-history CSV path.
        #[arg(long, default_value = "convergence.csv")]
        report: PathBuf,
    },
    /// Run a built-in demo problem end to end.
    Demo {
        /// pentagon | lshape | snowflake | isospectral | random
        name: String,
        /// Vertex count for the random demo.
        #[arg(long, default_value_t = 6)]
        m: usize,
        /// Seed for random geometry and boundary data.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        max_dofs: Option<usize>,
        /// Also run the control experiment with every pole pushed this
        /// fraction of the diameter away from its corner.
        #[arg(long)]
        ablate_shift: Option<f64>,
        /// Directory for the generated artifacts.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Evaluate a saved solution at points or on a grid.
    Eval {
        #[arg(long)]
        solution: PathBuf,
        /// CSV of x,y evaluation points.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Grid dimensions "nx,ny" over the bounding box.
        #[arg(long)]
        grid: Option<String>,
        /// Also write the gradient columns ux, uy (points mode only).
        #[arg(long)]
        grad: bool,
        #[arg(long, default_value = "eval.csv")]
        out: PathBuf,
    },
    /// Approximation-theory studies on the wedge.
    Theory {
        #[command(subcommand)]
        sub: TheoryCommand,
    },
}

#[derive(Subcommand)]
enum TheoryCommand {
    /// Convergence of the clustered interpolant for f = z^delta.
    Wedge {
        /// Singularity exponent.
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        /// Wedge half-angle in radians.
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
        theta: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Largest n; the study runs n = 4, 9, 16, ... up to this.
        #[arg(long, default_value_t = 100)]
        nmax: usize,
        /// Wedge radius.
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long, default_value = "wedge.csv")]
        out: PathBuf,
    },
    /// Export log10|phi| on a rectangle around the node/pole set.
    Levels {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        sigma: f64,
        #[arg(long, default_value = "levels.csv")]
        out: PathBuf,
    },
    /// Print the node energy of a reference set and check its gradient.
    Energy {
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
    },
}

/// Parse and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_threads();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // Help and version land here too; only real parse failures are
            // errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// LIGHTNING_THREADS caps the worker pool; unset means one thread per core.
fn init_threads() {
    if let Ok(v) = std::env::var("LIGHTNING_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve {
            domain,
            bc,
            tol,
            sigma,
            max_dofs,
            weighted,
            out,
            report,
        } => {
            let dom = files::load_domain(&domain)?;
            let data = files::load_boundary(&bc, &dom)?;
            let mut config = SolverConfig {
                tolerance: tol,
                ..SolverConfig::default()
            };
            if let Some(s) = sigma {
                config.sigma = s;
            }
            if let Some(m) = max_dofs {
                config.max_dofs = m;
            }
            if weighted {
                config.weighted_norm = Some(true);
            }
            let (sol, rep) = solve(&dom, &data, &config)?;
            files::save_solution(&out, &sol)?;
            files::write_report(&report, &rep)?;
            print_solve_summary(&sol, &rep);
            Ok(if sol.converged { 0 } else { 2 })
        }
        Command::Demo {
            name,
            m,
            seed,
            tol,
            max_dofs,
            ablate_shift,
            out_dir,
        } => {
            let dom = demos::demo_domain(&name, m, seed)?;
            let data = demos::demo_boundary(&dom, seed)?;
            std::fs::create_dir_all(&out_dir)
                .map_err(|e| Error::file(out_dir.display().to_string(), e.to_string()))?;
            let stem = |ext: &str| out_dir.join(format!("{name}.{ext}"));
            files::save_domain(&stem("geom.json"), &dom)?;
            files::save_random_boundary(&stem("bc.json"), &dom, seed, 0.5)?;
            let mut config = SolverConfig {
                tolerance: tol,
                ..SolverConfig::default()
            };
            if let Some(md) = max_dofs {
                config.max_dofs = md;
            }
            let (sol, rep) = solve(&dom, &data, &config)?;
            files::save_solution(&stem("solution.json"), &sol)?;
            files::write_report(&stem("convergence.csv"), &rep)?;
            print_solve_summary(&sol, &rep);
            if let Some(shift) = ablate_shift {
                let rows = ablation_shifted_poles(&dom, &data, &config, shift)?;
                files::write_report_csv(&stem("ablation.csv"), &rows)?;
                if let (Some(a), Some(b)) = (rep.rows.last(), rows.last()) {
                    println!(
                        "ablation: shifted-pole error {:.3e} vs clustered {:.3e} at n = {}",
                        b.error, a.error, b.n
                    );
                }
            }
            Ok(if sol.converged { 0 } else { 2 })
        }
        Command::Eval {
            solution,
            points,
            grid,
            grad,
            out,
        } => {
            let sol = files::load_solution(&solution)?;
            match (points, grid) {
                (Some(p), None) => eval_points(&sol, &p, grad, &out),
                (None, Some(g)) => {
                    if grad {
                        return Err(Error::Evaluation(
                            "--grad is only available with --points".into(),
                        ));
                    }
                    let (nx, ny) = parse_grid(&g)?;
                    let grid = eval_grid(&sol, nx, ny)?;
                    files::write_grid_csv(&out, &grid)?;
                    print_grid_summary(&grid);
                    Ok(0)
                }
                _ => Err(Error::Evaluation(
                    "pass exactly one of --points or --grid".into(),
                )),
            }
        }
        Command::Theory { sub } => theory(sub),
    }
}

fn eval_points(sol: &Solution, path: &std::path::Path, grad: bool, out: &std::path::Path) -> Result<i32> {
    let pts = files::read_points_csv(path)?;
    let t0 = Instant::now();
    let mut rows = Vec::with_capacity(pts.len());
    let mut failures = 0usize;
    for &z in &pts {
        let value = sol.eval(z);
        match value {
            Ok(u) => {
                let g = if grad { sol.eval_grad(z).ok() } else { None };
                rows.push(EvalRow::Value { z, u, grad: g });
            }
            Err(_) => {
                failures += 1;
                rows.push(EvalRow::Failed { z });
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    files::write_points_csv(out, &rows, grad)?;
    println!(
        "evaluated {} points in {:.6} s ({:.0} points/s), {} failed",
        pts.len(),
        secs,
        pts.len() as f64 / secs.max(1e-12),
        failures
    );
    if failures == pts.len() {
        return Err(Error::Evaluation(
            "every evaluation point failed (all on poles or non-finite)".into(),
        ));
    }
    Ok(0)
}

fn theory(cmd: TheoryCommand) -> Result<i32> {
    match cmd {
        TheoryCommand::Wedge {
            delta,
            theta,
            sigma,
            nmax,
            rho,
            out,
        } => {
            if nmax < 4 {
                return Err(Error::Basis("nmax must be at least 4".into()));
            }
            let ns: Vec<usize> = (2..).map(|k| k * k).take_while(|&n| n <= nmax).collect();
            let problem = WedgeProblem::new(theta, rho, sigma, TestFn::Power(delta))?;
            let study = wedge_convergence_study(&problem, &ns)?;
            files::write_wedge_csv(&out, &study)?;
            for row in &study.rows {
                println!("n = {:4}   sup error = {:.6e}", row.n, row.sup_error);
            }
            println!(
                "fit: ln(err) = {:.4} sqrt(n) + {:.4}  (R^2 = {:.4})",
                study.slope, study.intercept, study.r2
            );
            Ok(0)
        }
        TheoryCommand::Levels { n, sigma, out } => {
            let set = newman_set(n, sigma)?;
            let grid = phi_level_grid(&set, (-1.5, -1.0), (1.5, 1.0), 301, 201);
            files::write_levels_csv(&out, &grid)?;
            println!("wrote {} grid values to {}", grid.len(), out.display());
            Ok(0)
        }
        TheoryCommand::Energy { n, sigma } => {
            let set = newman_set(n, sigma)?;
            let e = energy(&set.nodes, &set.poles);
            let g = energy_gradient(&set.nodes, &set.poles);
            println!("energy = {e:.12}");
            let j = if set.nodes.len() > 1 { 1 } else { 0 };
            let h = 1e-3;
            let mut bumped = set.nodes.clone();
            bumped[j] += h;
            let di = energy(&bumped, &set.poles) - e;
            let predicted = h * g[j];
            let gap = (di - predicted).abs();
            println!(
                "perturbation check on node {j}: dI = {di:.9}, h*grad = {predicted:.9}, gap = {gap:.2e}"
            );
            if gap <= 1e-4 {
                println!("gradient check passed");
                Ok(0)
            } else {
                Err(Error::Solver(format!(
                    "energy gradient check failed: gap {gap:.3e} exceeds 1e-4"
                )))
            }
        }
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() == 2 {
        if let (Ok(nx), Ok(ny)) = (parts[0].trim().parse(), parts[1].trim().parse()) {
            return Ok((nx, ny));
        }
    }
    Err(Error::Evaluation(format!(
        "grid must look like \"200,200\", got \"{s}\""
    )))
}

fn print_solve_summary(sol: &Solution, rep: &ConvergenceReport) {
    let norm = if rep.weighted { "weighted sup" } else { "sup" };
    println!(
        "{}: boundary error {:.3e} ({norm} norm, tol {:.1e}) at n = {}, N = {} dofs, M = {} rows",
        rep.stop.as_str(),
        sol.boundary_error,
        sol.tolerance,
        sol.cluster_size,
        sol.dofs,
        sol.sample_count,
    );
    println!(
        "fine-mesh error {:.3e}, condition estimate {:.3e}, {} iterations",
        sol.fine_mesh_error,
        sol.condition_estimate,
        rep.rows.len()
    );
}

fn print_grid_summary(grid: &EvaluationGrid) {
    println!(
        "grid {} x {}: {} interior values ({:.0} points/s)",
        grid.xs.len(),
        grid.ys.len(),
        grid.interior_count,
        grid.points_per_second
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_is_not_an_error() {
        assert_eq!(run(["lightning", "--help"]), 0);
        assert_eq!(run(["lightning", "theory", "--help"]), 0);
    }

    #[test]
    fn bad_flags_exit_one() {
        assert_eq!(run(["lightning", "frobnicate"]), 1);
        assert_eq!(run(["lightning", "solve", "--no-such-flag"]), 1);
    }

    #[test]
    fn unknown_demo_exits_one() {
        assert_eq!(run(["lightning", "demo", "dodecahedron"]), 1);
    }

    #[test]
    fn missing_files_exit_one() {
        assert_eq!(
            run([
                "lightning",
                "solve",
                "--domain",
                "/nonexistent/geom.json",
                "--bc",
                "/nonexistent/bc.json"
            ]),
            1
        );
    }

    #[test]
    fn grid_spec_parsing() {
        assert_eq!(parse_grid("200,100").unwrap(), (200, 100));
        assert_eq!(parse_grid(" 8 , 9 ").unwrap(), (8, 9));
        assert!(parse_grid("200").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn energy_subcommand_passes_its_own_check() {
        assert_eq!(run(["lightning", "theory", "energy", "--n", "4", "--sigma", "2"]), 0);
    }
}
