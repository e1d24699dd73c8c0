//! The adaptive solve loop: grow the pole clusters until the boundary
//! error meets the tolerance, guard against divergence, validate the
//! winner on a finer boundary mesh.

use crate::basis::{assemble, place_poles, plan_samples, plan_samples_refined, Basis};
use crate::boundary::BoundarySpec;
use crate::error::{Error, Result};
use crate::evaluator::eval_raw;
use crate::geometry::Domain;
use crate::linsolve::{solve_ls, solve_ls_with, FitResult};
use crate::C64;
use std::time::Instant;

/// Corner jumps above this fraction of the data scale switch on the
/// corner-weighted norm automatically.
const JUMP_THRESHOLD: f64 = 1e-8;

/// Error growth factor that counts as "getting worse" for the divergence
/// stop.
const DIVERGENCE_FACTOR: f64 = 1.2;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Target sup-norm boundary error.
    pub tolerance: f64,
    /// Clustering strength.
    pub sigma: f64,
    /// Cluster-size multiplier at reentrant corners.
    pub reentrant_multiplier: usize,
    /// Hard cap on degrees of freedom; checked before each solve.
    pub max_dofs: usize,
    /// Rows per degree of freedom in the fitting grid.
    pub sample_ratio: f64,
    /// Density multiplier of the validation mesh.
    pub refinement_factor: usize,
    /// Force the corner-weighted norm on or off; `None` lets discontinuous
    /// data decide.
    pub weighted_norm: Option<bool>,
    /// Cluster sizes to sweep; `None` means 4, 9, 16, ... (squares).
    pub n_schedule: Option<Vec<usize>>,
    /// Truncation threshold handed to the least-squares solve.
    pub rtol: f64,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            tolerance: 1e-6,
            sigma: 4.0,
            reentrant_multiplier: 3,
            max_dofs: 4000,
            sample_ratio: 3.0,
            refinement_factor: 2,
            weighted_norm: None,
            n_schedule: None,
            rtol: crate::linsolve::DEFAULT_RTOL,
        }
    }
}

impl SolverConfig {
    pub fn schedule(&self) -> Vec<usize> {
        match &self.n_schedule {
            Some(v) => v.clone(),
            None => (2..=63).map(|k| k * k).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Solver("tolerance must be positive".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::Solver("sigma must be positive".into()));
        }
        if self.reentrant_multiplier == 0 {
            return Err(Error::Solver("reentrant multiplier must be positive".into()));
        }
        if !(self.sample_ratio >= 1.0) {
            return Err(Error::Solver("sample ratio must be at least 1".into()));
        }
        if self.refinement_factor < 1 {
            return Err(Error::Solver("refinement factor must be at least 1".into()));
        }
        if self.schedule().is_empty() {
            return Err(Error::Solver("empty cluster-size schedule".into()));
        }
        Ok(())
    }
}

/// One line of the convergence history.
#[derive(Debug, Clone)]
pub struct ReportRow {
    /// Cluster size at salient corners.
    pub n: usize,
    /// Degrees of freedom.
    pub dofs: usize,
    /// Fitting rows.
    pub rows: usize,
    /// Boundary error in the guiding norm.
    pub error: f64,
    /// Validation-mesh error; only the accepted row gets one.
    pub fine_error: Option<f64>,
    pub condition: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    /// Next step would exceed `max_dofs`.
    DofBudget,
    /// Error grew on two consecutive steps.
    Diverging,
    ScheduleExhausted,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::DofBudget => "dof budget reached",
            StopReason::Diverging => "error diverging",
            StopReason::ScheduleExhausted => "schedule exhausted",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<ReportRow>,
    pub stop: StopReason,
    pub weighted: bool,
}

/// A fitted approximation u = Re r with r rational.
#[derive(Debug, Clone)]
pub struct Solution {
    pub domain: Domain,
    pub basis: Basis,
    /// Complex residue-like coefficients a_j of 1/(z - z_j).
    pub pole_coefficients: Vec<C64>,
    /// Polynomial coefficients c_p of (z - z*)^p; c_0 is real.
    pub poly_coefficients: Vec<C64>,
    /// Achieved sup error on the fitting grid, in the guiding norm.
    pub boundary_error: f64,
    /// Sup error on the refined validation mesh, same norm.
    pub fine_mesh_error: f64,
    pub condition_estimate: f64,
    pub converged: bool,
    /// True when the corner-weighted norm guided the fit.
    pub weighted: bool,
    /// Tolerance the solve was aiming for.
    pub tolerance: f64,
    pub cluster_size: usize,
    pub dofs: usize,
    pub sample_count: usize,
}

impl Solution {
    /// Rebuild the complex coefficients from the stacked real solution
    /// vector. Columns come in pairs (Re g, Im g), and Re(a g) =
    /// Re(a) Re(g) - Im(a) Im(g), so a = x_re - i x_im.
    fn from_fit(
        domain: &Domain,
        basis: &Basis,
        fit: &FitResult,
        weighted: bool,
        n: usize,
        rows: usize,
    ) -> Solution {
        let n1 = basis.pole_count();
        let n2 = basis.poly_degree;
        let x = &fit.coefficients;
        let pole_coefficients = (0..n1)
            .map(|k| C64::new(x[2 * k], -x[2 * k + 1]))
            .collect();
        let mut poly_coefficients = Vec::with_capacity(n2 + 1);
        poly_coefficients.push(C64::new(x[2 * n1], 0.0));
        for p in 1..=n2 {
            poly_coefficients.push(C64::new(x[2 * n1 + p], -x[2 * n1 + n2 + p]));
        }
        Solution {
            domain: domain.clone(),
            basis: basis.clone(),
            pole_coefficients,
            poly_coefficients,
            boundary_error: if weighted {
                fit.weighted_sup_residual
            } else {
                fit.sup_residual
            },
            fine_mesh_error: f64::NAN,
            condition_estimate: fit.condition_estimate,
            converged: false,
            weighted,
            tolerance: f64::NAN,
            cluster_size: n,
            dofs: basis.dof_count(),
            sample_count: rows,
        }
    }
}

/// Whether the data jump at some corner is large enough, relative to the
/// data scale, that the plain sup norm cannot converge.
pub fn needs_weighting(data: &BoundarySpec) -> bool {
    data.max_corner_jump() > JUMP_THRESHOLD * data.data_scale()
}

// Divergence stop: the error exceeded 1.2x the running minimum on two
// consecutive iterations.
#[derive(Debug)]
struct DivergenceTracker {
    min: f64,
    streak: usize,
}

impl DivergenceTracker {
    fn new() -> DivergenceTracker {
        DivergenceTracker {
            min: f64::INFINITY,
            streak: 0,
        }
    }

    /// Feed one error value; true means stop.
    fn observe(&mut self, err: f64) -> bool {
        if err > DIVERGENCE_FACTOR * self.min {
            self.streak += 1;
        } else {
            self.streak = 0;
        }
        self.min = self.min.min(err);
        self.streak >= 2
    }
}

/// Solve the Dirichlet problem on `domain` with data `data`.
///
/// Sweeps the cluster-size schedule, keeps the best iterate, and returns it
/// once the tolerance is met or a stop rule fires. The returned solution
/// carries a validation error measured on a mesh `refinement_factor` times
/// denser than the fitting grid.
pub fn solve(
    domain: &Domain,
    data: &BoundarySpec,
    config: &SolverConfig,
) -> Result<(Solution, ConvergenceReport)> {
    config.validate()?;
    let weighted = config.weighted_norm.unwrap_or_else(|| needs_weighting(data));
    let mut rows: Vec<ReportRow> = Vec::new();
    let mut best: Option<Solution> = None;
    let mut tracker = DivergenceTracker::new();
    let mut stop = StopReason::ScheduleExhausted;
    for n in config.schedule() {
        let clusters = place_poles(domain, n, config.sigma, config.reentrant_multiplier)?;
        let basis = Basis::new(clusters, domain.center(), n.div_ceil(2));
        let dofs = basis.dof_count();
        if dofs > config.max_dofs {
            stop = StopReason::DofBudget;
            break;
        }
        let t0 = Instant::now();
        let plan = plan_samples(domain, &basis, config.sample_ratio);
        let sys = assemble(domain, data, &basis, &plan, weighted)?;
        let fit = if config.rtol == crate::linsolve::DEFAULT_RTOL {
            solve_ls(&sys)?
        } else {
            solve_ls_with(&sys, config.rtol)?
        };
        let seconds = t0.elapsed().as_secs_f64();
        let sol = Solution::from_fit(domain, &basis, &fit, weighted, n, plan.len());
        let err = sol.boundary_error;
        rows.push(ReportRow {
            n,
            dofs,
            rows: plan.len(),
            error: err,
            fine_error: None,
            condition: fit.condition_estimate,
            seconds,
        });
        if best.as_ref().is_none_or(|b| err < b.boundary_error) {
            best = Some(sol);
        }
        if err < config.tolerance {
            stop = StopReason::Converged;
            break;
        }
        if tracker.observe(err) {
            stop = StopReason::Diverging;
            break;
        }
    }
    let mut sol = best.ok_or_else(|| {
        Error::Solver(format!(
            "no iteration fit within the budget of {} degrees of freedom",
            config.max_dofs
        ))
    })?;
    sol.converged = stop == StopReason::Converged;
    sol.tolerance = config.tolerance;
    sol.fine_mesh_error = validate_on_fine_mesh(domain, data, &sol, config)?;
    if let Some(row) = rows.iter_mut().rev().find(|r| r.n == sol.cluster_size) {
        row.fine_error = Some(sol.fine_mesh_error);
    }
    Ok((
        sol,
        ConvergenceReport {
            rows,
            stop,
            weighted,
        },
    ))
}

/// Measure the accepted solution against the data on an independent,
/// denser boundary mesh, in the norm that guided the fit.
fn validate_on_fine_mesh(
    domain: &Domain,
    data: &BoundarySpec,
    sol: &Solution,
    config: &SolverConfig,
) -> Result<f64> {
    let fine = plan_samples_refined(
        domain,
        &sol.basis,
        config.sample_ratio,
        config.refinement_factor.max(2),
    );
    let mut worst = 0.0f64;
    for p in &fine.points {
        let h = data.eval(p.arc, p.t, p.position.re, p.position.im)?;
        let u = eval_raw(sol, p.position);
        let mut e = (u - h).abs();
        if sol.weighted {
            let w = domain
                .corners()
                .iter()
                .map(|c| (p.position - c.position).norm())
                .fold(f64::INFINITY, f64::min)
                / domain.diameter();
            e *= w;
        }
        worst = worst.max(e);
    }
    Ok(worst)
}

/// Convergence sweep with every pole pushed `shift` diameters further out
/// along its corner bisector, fitting grid left untouched. Destroying the
/// tapered spacing this way is the control experiment for the clustering
/// rule.
pub fn ablation_shifted_poles(
    domain: &Domain,
    data: &BoundarySpec,
    config: &SolverConfig,
    shift: f64,
) -> Result<Vec<ReportRow>> {
    config.validate()?;
    if !(shift > 0.0) {
        return Err(Error::Solver("pole shift must be positive".into()));
    }
    let weighted = config.weighted_norm.unwrap_or_else(|| needs_weighting(data));
    let offset = shift * domain.diameter();
    let mut rows = Vec::new();
    for n in config.schedule() {
        let clusters = place_poles(domain, n, config.sigma, config.reentrant_multiplier)?;
        let basis = Basis::new(clusters.clone(), domain.center(), n.div_ceil(2));
        if basis.dof_count() > config.max_dofs {
            break;
        }
        let t0 = Instant::now();
        // Samples follow the original tapered distances.
        let plan = plan_samples(domain, &basis, config.sample_ratio);
        let mut shifted = clusters;
        for c in shifted.iter_mut() {
            let b = domain.corners()[c.corner].exterior_bisector;
            let w = domain.corners()[c.corner].position;
            for (p, d) in c.poles.iter_mut().zip(c.distances.iter_mut()) {
                *d += offset;
                *p = w + *d * b;
            }
        }
        let shifted_basis = Basis::new(shifted, domain.center(), n.div_ceil(2));
        let sys = assemble(domain, data, &shifted_basis, &plan, weighted)?;
        let fit = solve_ls_with(&sys, config.rtol)?;
        rows.push(ReportRow {
            n,
            dofs: shifted_basis.dof_count(),
            rows: plan.len(),
            error: if weighted {
                fit.weighted_sup_residual
            } else {
                fit.sup_residual
            },
            fine_error: None,
            condition: fit.condition_estimate,
            seconds: t0.elapsed().as_secs_f64(),
        });
    }
    Ok(rows)
}
