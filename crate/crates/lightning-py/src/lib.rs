//! Python bindings for the lightning Laplace solver.
//!
//! Exposes the geometry, boundary-data, and solver types plus the
//! approximation-theory helpers. Complex arguments use Python's complex
//! type; points are (x, y) tuples.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lightning_laplace::boundary::BoundarySpec;
use lightning_laplace::demos;
use lightning_laplace::evaluator::eval_grid;
use lightning_laplace::files;
use lightning_laplace::geometry;
use lightning_laplace::solver::{self, SolverConfig};
use lightning_laplace::theory;

fn pyerr(e: lightning_laplace::error::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A planar domain bounded by corner-joined arcs.
#[pyclass]
struct Domain {
    inner: geometry::Domain,
}

#[pymethods]
impl Domain {
    /// Build a polygon from its vertices, listed counterclockwise.
    #[staticmethod]
    fn polygon(vertices: Vec<(f64, f64)>) -> PyResult<Self> {
        let vs: Vec<Complex64> = vertices
            .into_iter()
            .map(|(x, y)| Complex64::new(x, y))
            .collect();
        let inner = geometry::build_polygon(&vs).map_err(pyerr)?;
        Ok(Self { inner })
    }

    /// One of the built-in demo domains.
    #[staticmethod]
    #[pyo3(signature = (name, m = 6, seed = 0))]
    fn demo(name: &str, m: usize, seed: u64) -> PyResult<Self> {
        let inner = demos::demo_domain(name, m, seed).map_err(pyerr)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let inner = files::load_domain(path.as_ref()).map_err(pyerr)?;
        Ok(Self { inner })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        files::save_domain(path.as_ref(), &self.inner).map_err(pyerr)
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        self.inner.contains(Complex64::new(x, y))
    }

    fn corners(&self) -> Vec<(f64, f64)> {
        self.inner
            .corners()
            .iter()
            .map(|c| (c.position.re, c.position.im))
            .collect()
    }

    #[getter]
    fn diameter(&self) -> f64 {
        self.inner.diameter()
    }

    #[getter]
    fn arc_count(&self) -> usize {
        self.inner.arcs().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Domain({} corners, diameter {:.4})",
            self.inner.corners().len(),
            self.inner.diameter()
        )
    }
}

/// Dirichlet data, one function per boundary arc.
#[pyclass]
struct BoundaryData {
    inner: BoundarySpec,
}

#[pymethods]
impl BoundaryData {
    /// Parse one expression per arc; variables x, y, t.
    #[staticmethod]
    fn expressions(domain: &Domain, exprs: Vec<String>) -> PyResult<Self> {
        let refs: Vec<&str> = exprs.iter().map(String::as_str).collect();
        let inner = BoundarySpec::from_expressions(&domain.inner, &refs).map_err(pyerr)?;
        Ok(Self { inner })
    }

    /// The same expression on every arc.
    #[staticmethod]
    fn uniform(domain: &Domain, expr: &str) -> PyResult<Self> {
        let inner = BoundarySpec::uniform(&domain.inner, expr).map_err(pyerr)?;
        Ok(Self { inner })
    }

    /// Seeded smooth random data, independent per arc.
    #[staticmethod]
    #[pyo3(signature = (domain, seed = 0, wavelength = 0.5))]
    fn random(domain: &Domain, seed: u64, wavelength: f64) -> PyResult<Self> {
        let inner =
            BoundarySpec::random_smooth(&domain.inner, seed, wavelength).map_err(pyerr)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: &str, domain: &Domain) -> PyResult<Self> {
        let inner = files::load_boundary(path.as_ref(), &domain.inner).map_err(pyerr)?;
        Ok(Self { inner })
    }

    /// Evaluate the data at parameter t in [0, 1] along one arc.
    fn value(&self, domain: &Domain, arc: usize, t: f64) -> PyResult<f64> {
        if arc >= domain.inner.arcs().len() {
            return Err(PyValueError::new_err(format!(
                "arc index {arc} out of range"
            )));
        }
        let z = domain.inner.arcs()[arc].point(t);
        self.inner.eval(arc, t, z.re, z.im).map_err(pyerr)
    }
}

/// A solved Laplace problem: rational part plus polynomial tail.
#[pyclass]
struct Solution {
    inner: solver::Solution,
}

#[pymethods]
impl Solution {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let inner = files::load_solution(path.as_ref()).map_err(pyerr)?;
        Ok(Self { inner })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        files::save_solution(path.as_ref(), &self.inner).map_err(pyerr)
    }

    /// Harmonic value at an interior point.
    fn eval(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner.eval(Complex64::new(x, y)).map_err(pyerr)
    }

    /// Gradient (du/dx, du/dy) at an interior point.
    fn grad(&self, x: f64, y: f64) -> PyResult<(f64, f64)> {
        self.inner.eval_grad(Complex64::new(x, y)).map_err(pyerr)
    }

    /// Evaluate many points at once; returns a list of values.
    fn eval_many(&self, points: Vec<(f64, f64)>) -> PyResult<Vec<f64>> {
        let zs: Vec<Complex64> = points
            .into_iter()
            .map(|(x, y)| Complex64::new(x, y))
            .collect();
        lightning_laplace::evaluator::eval_many(&self.inner, &zs).map_err(pyerr)
    }

    /// Values on an nx-by-ny grid over the bounding box; exterior points
    /// come back as NaN. Returns (xs, ys, values) with values in y-major
    /// order: values[iy][ix].
    fn grid(&self, nx: usize, ny: usize) -> PyResult<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
        let g = eval_grid(&self.inner, nx, ny).map_err(pyerr)?;
        let rows: Vec<Vec<f64>> = g
            .values
            .chunks(g.xs.len())
            .map(|row| row.to_vec())
            .collect();
        Ok((g.xs, g.ys, rows))
    }

    #[getter]
    fn boundary_error(&self) -> f64 {
        self.inner.boundary_error
    }

    #[getter]
    fn fine_mesh_error(&self) -> f64 {
        self.inner.fine_mesh_error
    }

    #[getter]
    fn condition_estimate(&self) -> f64 {
        self.inner.condition_estimate
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn weighted(&self) -> bool {
        self.inner.weighted
    }

    #[getter]
    fn dofs(&self) -> usize {
        self.inner.dofs
    }

    #[getter]
    fn cluster_size(&self) -> usize {
        self.inner.cluster_size
    }

    #[getter]
    fn sample_count(&self) -> usize {
        self.inner.sample_count
    }

    fn __repr__(&self) -> String {
        format!(
            "Solution(N = {}, boundary error {:.3e}, converged = {})",
            self.inner.dofs, self.inner.boundary_error, self.inner.converged
        )
    }
}

/// Solve the Dirichlet problem; returns (Solution, report) where report is
/// a list of per-iteration dicts.
#[pyfunction]
#[pyo3(signature = (domain, data, tol = 1e-6, sigma = None, max_dofs = None, weighted = None))]
fn solve(
    py: Python<'_>,
    domain: &Domain,
    data: &BoundaryData,
    tol: f64,
    sigma: Option<f64>,
    max_dofs: Option<usize>,
    weighted: Option<bool>,
) -> PyResult<(Solution, Vec<Py<PyDict>>)> {
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
    config.weighted_norm = weighted;
    let (sol, report) = solver::solve(&domain.inner, &data.inner, &config).map_err(pyerr)?;
    let mut rows = Vec::with_capacity(report.rows.len());
    for r in &report.rows {
        let d = PyDict::new(py);
        d.set_item("n", r.n)?;
        d.set_item("dofs", r.dofs)?;
        d.set_item("rows", r.rows)?;
        d.set_item("error", r.error)?;
        d.set_item("fine_error", r.fine_error)?;
        d.set_item("condition", r.condition)?;
        d.set_item("seconds", r.seconds)?;
        rows.push(d.unbind());
    }
    Ok((Solution { inner: sol }, rows))
}

/// Exponentially clustered reference set: nodes on [0, 1), poles on [-1, 0).
#[pyfunction]
#[pyo3(signature = (n, sigma = 1.0))]
fn newman_set(n: usize, sigma: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let set = theory::newman_set(n, sigma).map_err(pyerr)?;
    Ok((set.nodes, set.poles))
}

/// log|phi(z)| for the reference node/pole set.
#[pyfunction]
#[pyo3(signature = (x, y, n, sigma = 1.0))]
fn phi_potential(x: f64, y: f64, n: usize, sigma: f64) -> PyResult<f64> {
    let set = theory::newman_set(n, sigma).map_err(pyerr)?;
    Ok(theory::potential(Complex64::new(x, y), &set))
}

/// Convergence study for f = z^delta on the wedge; returns a dict with the
/// per-n sup errors and the fitted root-exponential rate.
#[pyfunction]
#[pyo3(signature = (delta = 0.5, theta = std::f64::consts::FRAC_PI_4, sigma = 1.0, nmax = 100, rho = 0.5))]
fn wedge_study(
    py: Python<'_>,
    delta: f64,
    theta: f64,
    sigma: f64,
    nmax: usize,
    rho: f64,
) -> PyResult<Py<PyDict>> {
    let ns: Vec<usize> = (2..).map(|k| k * k).take_while(|&n| n <= nmax).collect();
    let problem =
        theory::WedgeProblem::new(theta, rho, sigma, theory::TestFn::Power(delta)).map_err(pyerr)?;
    let study = theory::wedge_convergence_study(&problem, &ns).map_err(pyerr)?;
    let d = PyDict::new(py);
    d.set_item("n", study.rows.iter().map(|r| r.n).collect::<Vec<_>>())?;
    d.set_item(
        "sup_error",
        study.rows.iter().map(|r| r.sup_error).collect::<Vec<_>>(),
    )?;
    d.set_item("slope", study.slope)?;
    d.set_item("intercept", study.intercept)?;
    d.set_item("r2", study.r2)?;
    Ok(d.unbind())
}

#[pymodule]
fn lightning_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Domain>()?;
    m.add_class::<BoundaryData>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(newman_set, m)?)?;
    m.add_function(wrap_pyfunction!(phi_potential, m)?)?;
    m.add_function(wrap_pyfunction!(wedge_study, m)?)?;
    Ok(())
}
