//! Dense least squares via Householder QR with column pivoting.
//!
//! The fitting matrices here are tall, dense, and brutally ill-conditioned
//! by construction: clustered poles make near-dependent columns, and the
//! scheme relies on a rank-revealing factorization with a truncation
//! threshold rather than on regularization. Columns arrive pre-scaled to
//! unit norm (see `basis::assemble`); the solver reports coefficients in
//! unscaled form.

use crate::basis::FitSystem;
use crate::error::{Error, Result};
use rayon::prelude::*;

/// Relative diagonal threshold below which R is truncated.
pub const DEFAULT_RTOL: f64 = 1e-14;

/// Least-squares fit outcome.
#[derive(Debug, Clone)]
pub struct FitResult {
    /// Coefficients of the original (unscaled) columns.
    pub coefficients: Vec<f64>,
    /// Coefficients of the unit-norm columns actually factored.
    pub scaled_coefficients: Vec<f64>,
    /// Row residuals A x - b of the weighted system.
    pub residuals: Vec<f64>,
    /// Max |residual| / weight over rows with positive weight: the sup
    /// boundary error in the plain norm.
    pub sup_residual: f64,
    /// Max |residual| as is: the sup error in the weighted norm.
    pub weighted_sup_residual: f64,
    /// Power-iteration estimate of cond(A) for the scaled matrix;
    /// infinite when R is exactly singular.
    pub condition_estimate: f64,
    /// Number of R diagonal entries kept by the truncation rule.
    pub effective_rank: usize,
}

/// Solve the assembled system with the default truncation threshold.
pub fn solve_ls(sys: &FitSystem) -> Result<FitResult> {
    solve_ls_with(sys, DEFAULT_RTOL)
}

/// Solve with an explicit relative truncation threshold `rtol`: diagonal
/// entries of R below `rtol * |R_00|` are dropped from the back-substitution.
pub fn solve_ls_with(sys: &FitSystem, rtol: f64) -> Result<FitResult> {
    let qr = QrFactors::factor(&sys.columns)?;
    let (x, rank) = qr.solve(&sys.rhs, rtol)?;
    let mut residuals = sys.rhs.iter().map(|v| -v).collect::<Vec<f64>>();
    for (col, &xj) in sys.columns.iter().zip(&x) {
        if xj != 0.0 {
            axpy(xj, col, &mut residuals);
        }
    }
    let mut sup = 0.0f64;
    let mut wsup = 0.0f64;
    for (r, &w) in residuals.iter().zip(&sys.weights) {
        wsup = wsup.max(r.abs());
        if w > 0.0 {
            sup = sup.max(r.abs() / w);
        }
    }
    let coefficients = x
        .iter()
        .zip(&sys.column_scales)
        .map(|(&xj, &s)| if s > 0.0 { xj / s } else { 0.0 })
        .collect();
    Ok(FitResult {
        coefficients,
        scaled_coefficients: x,
        residuals,
        sup_residual: sup,
        weighted_sup_residual: wsup,
        condition_estimate: qr.condition(),
        effective_rank: rank,
    })
}

/// Condition estimate of a dense column-major matrix, via QR.
pub fn condition_estimate(columns: &[Vec<f64>]) -> Result<f64> {
    Ok(QrFactors::factor(columns)?.condition())
}

/// Minimum-norm-flavored truncated least squares for a raw column-major
/// matrix. Returns the solution and the achieved residual 2-norm.
pub fn lstsq(columns: &[Vec<f64>], rhs: &[f64], rtol: f64) -> Result<(Vec<f64>, f64)> {
    let qr = QrFactors::factor(columns)?;
    let (x, _) = qr.solve(rhs, rtol)?;
    let mut r = rhs.iter().map(|v| -v).collect::<Vec<f64>>();
    for (col, &xj) in columns.iter().zip(&x) {
        if xj != 0.0 {
            axpy(xj, col, &mut r);
        }
    }
    Ok((x, nrm2(&r)))
}

/// Householder QR with column pivoting, factored through all n steps so the
/// full R is available for rank decisions and condition estimates.
pub struct QrFactors {
    /// Column j holds R entries in rows 0..j and the Householder vector in
    /// rows j.., in the pivoted order.
    cols: Vec<Vec<f64>>,
    /// R diagonal, signs included; zero marks a skipped reflector.
    rdiag: Vec<f64>,
    /// Reflector scalings 2 / v'v; zero marks an identity step.
    wscale: Vec<f64>,
    /// perm[j] = original index of factored column j.
    perm: Vec<usize>,
    m: usize,
    n: usize,
}

impl QrFactors {
    pub fn factor(columns: &[Vec<f64>]) -> Result<QrFactors> {
        let n = columns.len();
        if n == 0 {
            return Err(Error::Solver("least-squares matrix has no columns".into()));
        }
        let m = columns[0].len();
        if m < n {
            return Err(Error::Solver(format!(
                "least-squares matrix is wider than tall ({m} rows, {n} columns)"
            )));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != m {
                return Err(Error::Solver("ragged column lengths".into()));
            }
            if !col.iter().all(|v| v.is_finite()) {
                return Err(Error::Solver(format!(
                    "non-finite entry in column {j} of the least-squares matrix"
                )));
            }
        }
        let mut cols: Vec<Vec<f64>> = columns.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut norms: Vec<f64> = cols.iter().map(|c| nrm2(c)).collect();
        // Norm at the last exact recomputation, to bound downdating error.
        let mut norms_ref = norms.clone();
        let mut rdiag = vec![0.0; n];
        let mut wscale = vec![0.0; n];
        for j in 0..n {
            let p = (j..n)
                .max_by(|&a, &b| norms[a].total_cmp(&norms[b]))
                .unwrap();
            if p != j {
                cols.swap(j, p);
                norms.swap(j, p);
                norms_ref.swap(j, p);
                perm.swap(j, p);
            }
            let xnorm = nrm2(&cols[j][j..]);
            if xnorm == 0.0 {
                continue; // zero tail: identity step, rdiag stays 0
            }
            let x0 = cols[j][j];
            let alpha = if x0 >= 0.0 { -xnorm } else { xnorm };
            cols[j][j] -= alpha;
            rdiag[j] = alpha;
            let vnorm2 = dot(&cols[j][j..], &cols[j][j..]);
            let w = 2.0 / vnorm2;
            wscale[j] = w;
            let (head, tail) = cols.split_at_mut(j + 1);
            let v = &head[j][j..];
            let update = |colk: &mut Vec<f64>| {
                let s = w * dot(v, &colk[j..]);
                axpy(-s, v, &mut colk[j..]);
            };
            // Worth a parallel pass only for large panels.
            if rayon::current_num_threads() > 1 && tail.len() * (m - j) > 1 << 16 {
                tail.par_iter_mut().for_each(update);
            } else {
                tail.iter_mut().for_each(update);
            }
            for (off, colk) in tail.iter().enumerate() {
                let k = j + 1 + off;
                let t = colk[j];
                let down = (norms[k] * norms[k] - t * t).max(0.0);
                if down <= 0.0025 * norms_ref[k] * norms_ref[k] {
                    let fresh = nrm2(&colk[j + 1..]);
                    norms[k] = fresh;
                    norms_ref[k] = fresh;
                } else {
                    norms[k] = down.sqrt();
                }
            }
        }
        Ok(QrFactors {
            cols,
            rdiag,
            wscale,
            perm,
            m,
            n,
        })
    }

    /// Rank under the relative truncation rule: the longest leading run of
    /// diagonal entries at least `rtol * |R_00|`.
    pub fn rank(&self, rtol: f64) -> usize {
        let r0 = self.rdiag[0].abs();
        if r0 == 0.0 {
            return 0;
        }
        let mut rank = 0;
        for &d in &self.rdiag {
            if d.abs() < rtol * r0 {
                break;
            }
            rank += 1;
        }
        rank
    }

    /// Truncated solve: columns past the numerical rank get coefficient
    /// zero. Returns the solution in original column order and the rank.
    pub fn solve(&self, rhs: &[f64], rtol: f64) -> Result<(Vec<f64>, usize)> {
        if rhs.len() != self.m {
            return Err(Error::Solver(format!(
                "right-hand side has {} entries, matrix has {} rows",
                rhs.len(),
                self.m
            )));
        }
        if !rhs.iter().all(|v| v.is_finite()) {
            return Err(Error::Solver("non-finite right-hand side".into()));
        }
        let rank = self.rank(rtol);
        let mut qtb = rhs.to_vec();
        for j in 0..self.n {
            if self.wscale[j] == 0.0 {
                continue;
            }
            let v = &self.cols[j][j..];
            let s = self.wscale[j] * dot(v, &qtb[j..]);
            axpy(-s, v, &mut qtb[j..]);
        }
        let mut y = vec![0.0; self.n];
        for i in (0..rank).rev() {
            let mut s = qtb[i];
            for k in i + 1..rank {
                s -= self.cols[k][i] * y[k];
            }
            y[i] = s / self.rdiag[i];
        }
        let mut x = vec![0.0; self.n];
        for (j, &pj) in self.perm.iter().enumerate() {
            x[pj] = y[j];
        }
        Ok((x, rank))
    }

    /// cond(A) estimated on R: power iteration for the largest singular
    /// value, inverse iteration through triangular solves for the smallest.
    pub fn condition(&self) -> f64 {
        if self.rank(0.0) < self.n || self.rdiag.iter().any(|d| *d == 0.0) {
            return f64::INFINITY;
        }
        let n = self.n;
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * (i as f64).sin()).collect();
        normalize(&mut v);
        let mut smax = 0.0f64;
        for _ in 0..60 {
            let rv = self.r_apply(&v);
            let mut w = self.rt_apply(&rv);
            let nw = nrm2(&w);
            if nw == 0.0 {
                break;
            }
            smax = nw.sqrt();
            for x in &mut w {
                *x /= nw;
            }
            v = w;
        }
        let mut u: Vec<f64> = (0..n).map(|i| 1.0 - 0.01 * (i as f64).cos()).collect();
        normalize(&mut u);
        let mut smin_inv = 0.0f64;
        for _ in 0..60 {
            let a = match self.rt_solve(&u) {
                Some(a) => a,
                None => return f64::INFINITY,
            };
            let mut b = match self.r_solve(&a) {
                Some(b) => b,
                None => return f64::INFINITY,
            };
            let nb = nrm2(&b);
            if !nb.is_finite() {
                return f64::INFINITY;
            }
            if nb == 0.0 {
                break;
            }
            smin_inv = nb.sqrt();
            for x in &mut b {
                *x /= nb;
            }
            u = b;
        }
        if smin_inv == 0.0 {
            return f64::INFINITY;
        }
        smax * smin_inv
    }

    fn r_entry(&self, i: usize, k: usize) -> f64 {
        if i == k {
            self.rdiag[i]
        } else {
            self.cols[k][i]
        }
    }

    fn r_apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for k in i..n {
                s += self.r_entry(i, k) * v[k];
            }
            out[i] = s;
        }
        out
    }

    fn rt_apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for k in 0..n {
            let mut s = 0.0;
            for i in 0..=k {
                s += self.r_entry(i, k) * v[i];
            }
            out[k] = s;
        }
        out
    }

    fn r_solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.r_entry(i, k) * x[k];
            }
            if self.rdiag[i] == 0.0 {
                return None;
            }
            x[i] = s / self.rdiag[i];
        }
        Some(x)
    }

    fn rt_solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.n;
        let mut x = vec![0.0; n];
        for k in 0..n {
            let mut s = b[k];
            for i in 0..k {
                s -= self.r_entry(i, k) * x[i];
            }
            if self.rdiag[k] == 0.0 {
                return None;
            }
            x[k] = s / self.rdiag[k];
        }
        Some(x)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn nrm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = nrm2(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn residual_norm(columns: &[Vec<f64>], x: &[f64], rhs: &[f64]) -> f64 {
        let mut r = rhs.iter().map(|v| -v).collect::<Vec<f64>>();
        for (col, &xj) in columns.iter().zip(x) {
            axpy(xj, col, &mut r);
        }
        nrm2(&r)
    }

    #[test]
    fn identity_system() {
        let cols = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let (x, res) = lstsq(&cols, &[3.0, -1.0, 2.0], DEFAULT_RTOL).unwrap();
        assert_relative_eq!(x[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(x[1], -1.0, epsilon = 1e-14);
        assert_relative_eq!(x[2], 2.0, epsilon = 1e-14);
        assert!(res < 1e-14);
    }

    #[test]
    fn consistent_overdetermined_system() {
        // b is exactly in the column span, so the residual must vanish.
        let mut rng = StdRng::seed_from_u64(7);
        let m = 25;
        let n = 6;
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let xtrue: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut b = vec![0.0; m];
        for (col, &xj) in cols.iter().zip(&xtrue) {
            axpy(xj, col, &mut b);
        }
        let (x, res) = lstsq(&cols, &b, DEFAULT_RTOL).unwrap();
        for (a, e) in x.iter().zip(&xtrue) {
            assert_relative_eq!(a, e, max_relative = 1e-10);
        }
        assert!(res < 1e-12);
    }

    #[test]
    fn duplicated_column_is_truncated_not_blown_up() {
        let mut rng = StdRng::seed_from_u64(11);
        let m = 20;
        let base: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let other: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cols = vec![base.clone(), base.clone(), other];
        let b: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let qr = QrFactors::factor(&cols).unwrap();
        let (x, rank) = qr.solve(&b, DEFAULT_RTOL).unwrap();
        assert_eq!(rank, 2);
        assert!(x.iter().all(|v| v.is_finite() && v.abs() < 1e3));
        assert!(qr.condition().is_infinite() || qr.condition() > 1e14);
    }

    // Exact rational-arithmetic reference: solve the normal equations of a
    // random integer system in BigRational and compare residual norms.
    fn exact_normal_solve(a: &[Vec<i64>], b: &[i64]) -> Vec<BigRational> {
        let n = a.len();
        let big = |v: i64| BigRational::from(BigInt::from(v));
        let zero = || BigRational::from(BigInt::from(0));
        // G = A'A, g = A'b
        let mut g = vec![vec![zero(); n + 1]; n];
        for i in 0..n {
            for k in 0..n {
                let mut s = zero();
                for r in 0..a[i].len() {
                    s += big(a[i][r]) * big(a[k][r]);
                }
                g[i][k] = s;
            }
            let mut s = zero();
            for r in 0..a[i].len() {
                s += big(a[i][r]) * big(b[r]);
            }
            g[i][n] = s;
        }
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| g[r][col] != zero())
                .expect("singular test matrix");
            g.swap(col, piv);
            for r in 0..n {
                if r != col && g[r][col] != zero() {
                    let f = g[r][col].clone() / g[col][col].clone();
                    for c in col..=n {
                        let sub = f.clone() * g[col][c].clone();
                        g[r][c] -= sub;
                    }
                }
            }
        }
        (0..n)
            .map(|i| g[i][n].clone() / g[i][i].clone())
            .collect()
    }

    #[test]
    fn matches_exact_rational_reference() {
        let mut rng = StdRng::seed_from_u64(2024);
        let m = 30;
        let n = 10;
        let ai: Vec<Vec<i64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.random_range(-9..=9)).collect())
            .collect();
        let bi: Vec<i64> = (0..m).map(|_| rng.random_range(-9..=9)).collect();
        let xstar = exact_normal_solve(&ai, &bi);
        let to_f = |q: &BigRational| {
            let num = q.numer().to_string().parse::<f64>().unwrap();
            let den = q.denom().to_string().parse::<f64>().unwrap();
            num / den
        };
        let cols: Vec<Vec<f64>> = ai
            .iter()
            .map(|c| c.iter().map(|&v| v as f64).collect())
            .collect();
        let b: Vec<f64> = bi.iter().map(|&v| v as f64).collect();
        let best = residual_norm(
            &cols,
            &xstar.iter().map(to_f).collect::<Vec<f64>>(),
            &b,
        );
        let (x, res) = lstsq(&cols, &b, DEFAULT_RTOL).unwrap();
        assert!(
            res <= (1.0 + 1e-10) * best,
            "QR residual {res} exceeds exact optimum {best}"
        );
        for (a, e) in x.iter().zip(xstar.iter().map(to_f)) {
            assert_relative_eq!(*a, e, max_relative = 1e-8, epsilon = 1e-10);
        }
    }

    #[test]
    fn condition_of_diagonal_matrix() {
        let cols = vec![vec![1.0, 0.0], vec![0.0, 1e-8]];
        let c = condition_estimate(&cols).unwrap();
        assert_relative_eq!(c, 1e8, max_relative = 1e-2);
    }

    #[test]
    fn singular_matrix_reports_infinite_condition() {
        // Exact dependence that survives rounding bitwise: R gets a zero
        // pivot and the estimate saturates.
        let cols = vec![vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]];
        assert!(condition_estimate(&cols).unwrap().is_infinite());
        // Rank-1 data whose factored R keeps a rounding-level pivot: the
        // estimate lands at the noise floor instead of infinity.
        let cols = vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]];
        let c = condition_estimate(&cols).unwrap();
        assert!(c > 1e14, "condition {c} too small for a rank-1 matrix");
    }

    #[test]
    fn looser_truncation_stays_close() {
        // Nearly dependent columns: loosening rtol from 1e-14 to 1e-12 must
        // not change the residual much, only tame the coefficients.
        let mut rng = StdRng::seed_from_u64(5);
        let m = 40;
        let base: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut near = base.clone();
        for v in near.iter_mut() {
            *v += 1e-13 * rng.random_range(-1.0..1.0);
        }
        let third: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cols = vec![base, near, third];
        let b: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (x_tight, r_tight) = lstsq(&cols, &b, 1e-14).unwrap();
        let (x_loose, r_loose) = lstsq(&cols, &b, 1e-12).unwrap();
        assert!(r_loose <= 10.0 * r_tight.max(1e-15));
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm(&x_loose) <= norm(&x_tight) + 1.0);
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(QrFactors::factor(&[]).is_err());
        assert!(QrFactors::factor(&[vec![1.0], vec![2.0]]).is_err());
        assert!(QrFactors::factor(&[vec![1.0, f64::NAN]]).is_err());
        let qr = QrFactors::factor(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(qr.solve(&[1.0], DEFAULT_RTOL).is_err());
        assert!(qr.solve(&[1.0, f64::INFINITY], DEFAULT_RTOL).is_err());
    }
}
