//! Point, gradient, and grid evaluation of a fitted solution.
//!
//! u(z) = Re r(z) with r(z) = sum_j a_j / (z - z_j) + sum_p c_p (z - z*)^p.
//! The pole sum is accumulated pairwise; the polynomial tail is a Horner
//! sweep. Everything here is deterministic: the same solution and the same
//! point give bit-identical values, in serial or parallel.

use crate::error::{Error, Result};
use crate::solver::Solution;
use crate::util::pairwise_sum;
use crate::C64;
use rayon::prelude::*;
use std::time::Instant;

/// Points closer to a pole than this times the diameter are refused by the
/// checked entry points.
const POLE_GUARD: f64 = 1e-14;

fn rational_value(sol: &Solution, z: C64) -> C64 {
    let poles = sol
        .pole_coefficients
        .iter()
        .zip(sol.basis.poles())
        .map(|(&a, zj)| a / (z - zj));
    let sum = pairwise_sum(poles);
    let w = z - sol.basis.center;
    let mut tail = C64::new(0.0, 0.0);
    for &c in sol.poly_coefficients.iter().rev() {
        tail = tail * w + c;
    }
    sum + tail
}

fn rational_derivative(sol: &Solution, z: C64) -> C64 {
    let poles = sol
        .pole_coefficients
        .iter()
        .zip(sol.basis.poles())
        .map(|(&a, zj)| {
            let d = z - zj;
            -a / (d * d)
        });
    let sum = pairwise_sum(poles);
    let w = z - sol.basis.center;
    let mut tail = C64::new(0.0, 0.0);
    for (p, &c) in sol.poly_coefficients.iter().enumerate().skip(1).rev() {
        tail = tail * w + c * p as f64;
    }
    sum + tail
}

/// Unchecked evaluation, for callers that already know `z` is safely away
/// from every pole (boundary fitting points, interior grid nodes).
pub fn eval_raw(sol: &Solution, z: C64) -> f64 {
    rational_value(sol, z).re
}

fn guard(sol: &Solution, z: C64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Evaluation(format!("non-finite point ({}, {})", z.re, z.im)));
    }
    let cutoff = POLE_GUARD * sol.domain.diameter();
    for zj in sol.basis.poles() {
        if (z - zj).norm() < cutoff {
            return Err(Error::Evaluation(format!(
                "point ({}, {}) is within {cutoff:.3e} of the pole at ({}, {})",
                z.re, z.im, zj.re, zj.im
            )));
        }
    }
    Ok(())
}

impl Solution {
    /// u at a single point. Fails next to a pole; poles sit just outside
    /// the boundary, so this only triggers for exterior or boundary-hugging
    /// queries.
    pub fn eval(&self, z: C64) -> Result<f64> {
        guard(self, z)?;
        Ok(eval_raw(self, z))
    }

    /// Gradient (u_x, u_y). For u = Re r this is (Re r', -Im r').
    pub fn eval_grad(&self, z: C64) -> Result<(f64, f64)> {
        guard(self, z)?;
        let d = rational_derivative(self, z);
        Ok((d.re, -d.im))
    }
}

/// Checked evaluation at many points.
pub fn eval_many(sol: &Solution, points: &[C64]) -> Result<Vec<f64>> {
    points
        .par_iter()
        .map(|&z| sol.eval(z))
        .collect::<Result<Vec<f64>>>()
}

/// Solution values on a regular grid over the bounding box. Exterior and
/// boundary nodes hold NaN.
#[derive(Debug, Clone)]
pub struct EvaluationGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major over y then x: `values[iy * xs.len() + ix]`.
    pub values: Vec<f64>,
    pub interior_count: usize,
    pub points_per_second: f64,
}

impl EvaluationGrid {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.xs.len() + ix]
    }
}

/// Evaluate on an `nx` by `ny` grid spanning the domain's bounding box.
pub fn eval_grid(sol: &Solution, nx: usize, ny: usize) -> Result<EvaluationGrid> {
    if nx < 2 || ny < 2 {
        return Err(Error::Evaluation("grid needs at least 2 points per axis".into()));
    }
    let (lo, hi) = sol.domain.bounding_box();
    let xs: Vec<f64> = (0..nx)
        .map(|i| lo.re + (hi.re - lo.re) * i as f64 / (nx - 1) as f64)
        .collect();
    let ys: Vec<f64> = (0..ny)
        .map(|j| lo.im + (hi.im - lo.im) * j as f64 / (ny - 1) as f64)
        .collect();
    let t0 = Instant::now();
    let values: Vec<f64> = ys
        .par_iter()
        .flat_map_iter(|&y| {
            xs.iter().map(move |&x| {
                let z = C64::new(x, y);
                // contains() keeps a boundary margin, which also keeps us
                // clear of every pole.
                if sol.domain.contains(z) {
                    eval_raw(sol, z)
                } else {
                    f64::NAN
                }
            })
        })
        .collect();
    let seconds = t0.elapsed().as_secs_f64();
    let interior_count = values.iter().filter(|v| v.is_finite()).count();
    Ok(EvaluationGrid {
        xs,
        ys,
        values,
        interior_count,
        points_per_second: (nx * ny) as f64 / seconds.max(1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{Basis, PoleCluster};
    use crate::boundary::BoundarySpec;
    use crate::geometry::tests::square;
    use crate::solver::{solve, SolverConfig};

    // A hand-built two-pole, quadratic-tail solution on the unit square.
    fn toy_solution() -> Solution {
        let d = square();
        let clusters = vec![
            PoleCluster {
                corner: 0,
                poles: vec![C64::new(2.0, 1.0)],
                distances: vec![(C64::new(2.0, 1.0)).norm()],
                discarded: 0,
            },
            PoleCluster {
                corner: 2,
                poles: vec![C64::new(-1.0, 2.0)],
                distances: vec![(C64::new(-1.0, 2.0) - C64::new(1.0, 1.0)).norm()],
                discarded: 0,
            },
        ];
        let basis = Basis::new(clusters, C64::new(0.5, 0.5), 2);
        Solution {
            domain: d.clone(),
            basis,
            pole_coefficients: vec![C64::new(0.7, -0.3), C64::new(-1.1, 0.4)],
            poly_coefficients: vec![
                C64::new(0.2, 0.0),
                C64::new(-0.5, 0.9),
                C64::new(0.1, -0.2),
            ],
            boundary_error: 0.0,
            fine_mesh_error: 0.0,
            condition_estimate: 1.0,
            converged: true,
            weighted: false,
            tolerance: 1e-6,
            cluster_size: 1,
            dofs: 9,
            sample_count: 0,
        }
    }

    #[test]
    fn satisfies_the_mean_value_property() {
        // Trapezoidal averaging over a circle is exponentially accurate for
        // harmonic functions, so 720 nodes pin down u(z0) to roundoff.
        // This checks harmonicity of the evaluation formula itself.
        let sol = toy_solution();
        for (z0, rho) in [
            (C64::new(0.1, 0.2), 0.5),
            (C64::new(0.5, 0.5), 0.3),
            (C64::new(0.8, 0.1), 0.25),
        ] {
            let n = 720;
            let mut acc = 0.0;
            for k in 0..n {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                acc += eval_raw(&sol, z0 + C64::from_polar(rho, th));
            }
            let mean = acc / n as f64;
            let center = eval_raw(&sol, z0);
            assert!(
                (mean - center).abs() < 1e-12 * (1.0 + center.abs()),
                "mean {mean} vs center {center}"
            );
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let sol = toy_solution();
        let h = 1e-6;
        for z in [C64::new(0.3, 0.4), C64::new(0.9, 0.9), C64::new(0.05, 0.6)] {
            let (gx, gy) = sol.eval_grad(z).unwrap();
            let fx = (eval_raw(&sol, z + C64::new(h, 0.0)) - eval_raw(&sol, z - C64::new(h, 0.0)))
                / (2.0 * h);
            let fy = (eval_raw(&sol, z + C64::new(0.0, h)) - eval_raw(&sol, z - C64::new(0.0, h)))
                / (2.0 * h);
            assert!((gx - fx).abs() < 1e-6 * (1.0 + fx.abs()), "{gx} vs {fx}");
            assert!((gy - fy).abs() < 1e-6 * (1.0 + fy.abs()), "{gy} vs {fy}");
        }
    }

    #[test]
    fn linear_tail_has_constant_gradient() {
        let mut sol = toy_solution();
        sol.pole_coefficients = vec![C64::new(0.0, 0.0); 2];
        sol.poly_coefficients = vec![C64::new(3.0, 0.0), C64::new(1.0, 0.0)];
        // u = 3 + Re(z - z*) = 3 + x - 0.5
        let (gx, gy) = sol.eval_grad(C64::new(0.3, 0.8)).unwrap();
        assert!((gx - 1.0).abs() < 1e-15);
        assert!(gy.abs() < 1e-15);
    }

    #[test]
    fn evaluation_is_bit_identical_and_parallel_safe() {
        let sol = toy_solution();
        let pts: Vec<C64> = (0..257)
            .map(|i| {
                let t = i as f64 / 257.0;
                C64::new(0.05 + 0.9 * t, 0.05 + 0.9 * (1.0 - t) * t * 3.0 % 0.9)
            })
            .collect();
        let a = eval_many(&sol, &pts).unwrap();
        let b = eval_many(&sol, &pts).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (i, &z) in pts.iter().enumerate() {
            assert_eq!(a[i].to_bits(), sol.eval(z).unwrap().to_bits());
        }
    }

    #[test]
    fn refuses_points_on_a_pole() {
        let sol = toy_solution();
        let pole = C64::new(2.0, 1.0);
        assert!(sol.eval(pole).is_err());
        assert!(sol.eval(pole + C64::new(1e-16, 0.0)).is_err());
        assert!(sol.eval(C64::new(f64::NAN, 0.0)).is_err());
        assert!(sol.eval(C64::new(0.5, 0.5)).is_ok());
    }

    #[test]
    fn grid_marks_exterior_with_nan() {
        let d = square();
        let data = BoundarySpec::uniform(&d, "1").unwrap();
        let config = SolverConfig {
            n_schedule: Some(vec![2]),
            ..SolverConfig::default()
        };
        let (sol, _) = solve(&d, &data, &config).unwrap();
        let grid = eval_grid(&sol, 21, 21).unwrap();
        assert_eq!(grid.values.len(), 441);
        // Bounding box edges lie on the boundary, so the rim is NaN.
        assert!(grid.value(0, 0).is_nan());
        assert!(grid.value(20, 10).is_nan());
        let mid = grid.value(10, 10);
        assert!((mid - 1.0).abs() < 1e-10);
        assert!(grid.interior_count > 300);
        assert!(grid.points_per_second > 0.0);
        assert!(eval_grid(&sol, 1, 5).is_err());
    }
}
