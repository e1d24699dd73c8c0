//! Rational basis construction: clustered poles, boundary sampling, and
//! assembly of the least-squares system.
//!
//! Each corner w gets poles w + L d_j b, with b the exterior bisector, L
//! the local scale and tapered distances d_j = exp(-sigma (sqrt(m) -
//! sqrt(j))), j = 1..m. Reentrant corners get three times as many poles as
//! salient ones. The fitting grid mirrors the clustering: every pole at
//! distance d contributes boundary points at arc length d/3, 2d/3, d on
//! both incident arcs.

use crate::boundary::BoundarySpec;
use crate::error::{Error, Result};
use crate::geometry::{Domain, Side};
use crate::C64;
use rayon::prelude::*;
use std::collections::HashMap;

/// Sample positions closer than this (times diameter) are merged.
const MERGE_TOL: f64 = 1e-13;

/// The pole family attached to one corner.
#[derive(Debug, Clone)]
pub struct PoleCluster {
    pub corner: usize,
    /// Pole positions, sorted by increasing distance from the corner.
    pub poles: Vec<C64>,
    /// Distances from the corner, matching `poles`.
    pub distances: Vec<f64>,
    /// Poles dropped because they landed inside the domain.
    pub discarded: usize,
}

/// Place tapered pole clusters on every corner. `n` is the cluster size at
/// salient corners; reentrant corners get `reentrant_multiplier * n`.
pub fn place_poles(
    domain: &Domain,
    n: usize,
    sigma: f64,
    reentrant_multiplier: usize,
) -> Result<Vec<PoleCluster>> {
    if n == 0 {
        return Err(Error::Basis("cluster size n must be positive".into()));
    }
    if !(sigma > 0.0) {
        return Err(Error::Basis(format!("sigma must be positive, got {sigma}")));
    }
    let mut clusters = Vec::with_capacity(domain.corner_count());
    for (k, corner) in domain.corners().iter().enumerate() {
        let m = if corner.salient {
            n
        } else {
            reentrant_multiplier * n
        };
        let scale = domain.local_scale(k);
        let mut poles = Vec::with_capacity(m);
        let mut distances = Vec::with_capacity(m);
        let mut discarded = 0;
        for j in 1..=m {
            let d = scale * (-sigma * ((m as f64).sqrt() - (j as f64).sqrt())).exp();
            let p = corner.position + d * corner.exterior_bisector;
            // For large clusters the innermost distances drop below the
            // corner coordinate's rounding, and the pole collapses onto the
            // corner itself. Such a pole is no longer exterior (and would
            // blow up on a sample at the corner), so it is dropped like an
            // interior one.
            if p == corner.position || domain.contains(p) {
                discarded += 1;
                continue;
            }
            distances.push(d);
            poles.push(p);
        }
        if poles.is_empty() {
            return Err(Error::Basis(format!(
                "all {m} poles at corner {k} fell inside the domain"
            )));
        }
        clusters.push(PoleCluster {
            corner: k,
            poles,
            distances,
            discarded,
        });
    }
    Ok(clusters)
}

/// Distances of the earlier, uniform-in-j taper: exp(-sigma j / sqrt(n))
/// for j = 0..n-1. Kept for side-by-side convergence experiments.
pub fn legacy_poles(n: usize, sigma: f64) -> Vec<f64> {
    (0..n)
        .map(|j| (-sigma * j as f64 / (n as f64).sqrt()).exp())
        .collect()
}

/// The full approximation basis: pole clusters plus a polynomial tail.
#[derive(Debug, Clone)]
pub struct Basis {
    pub clusters: Vec<PoleCluster>,
    /// Expansion point of the polynomial part.
    pub center: C64,
    /// Polynomial degree N2.
    pub poly_degree: usize,
}

impl Basis {
    pub fn new(clusters: Vec<PoleCluster>, center: C64, poly_degree: usize) -> Basis {
        Basis {
            clusters,
            center,
            poly_degree,
        }
    }

    /// Total number of poles N1.
    pub fn pole_count(&self) -> usize {
        self.clusters.iter().map(|c| c.poles.len()).sum()
    }

    /// Real degrees of freedom N = 2 N1 + 2 N2 + 1 (the constant term has
    /// no imaginary part).
    pub fn dof_count(&self) -> usize {
        2 * self.pole_count() + 2 * self.poly_degree + 1
    }

    pub fn poles(&self) -> impl Iterator<Item = C64> + '_ {
        self.clusters.iter().flat_map(|c| c.poles.iter().copied())
    }
}

/// One boundary fitting point.
#[derive(Debug, Clone, Copy)]
pub struct SamplePoint {
    pub arc: usize,
    pub t: f64,
    pub position: C64,
    /// True for points induced by a pole, false for uniform fill.
    pub clustered: bool,
}

/// The boundary fitting grid.
#[derive(Debug, Clone)]
pub struct SamplePlan {
    pub points: Vec<SamplePoint>,
}

impl SamplePlan {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Build the fitting grid for `basis`: three points per pole and side, then
/// uniform fill until the row count reaches `target_ratio` times the DOF
/// count.
pub fn plan_samples(domain: &Domain, basis: &Basis, target_ratio: f64) -> SamplePlan {
    plan_samples_refined(domain, basis, target_ratio, 1)
}

/// Same clustering rule at `refinement` times the density: `3 * refinement`
/// points per pole and side, fill target scaled by `refinement`.
pub fn plan_samples_refined(
    domain: &Domain,
    basis: &Basis,
    target_ratio: f64,
    refinement: usize,
) -> SamplePlan {
    let refinement = refinement.max(1);
    let tol = MERGE_TOL * domain.diameter();
    let mut dedup = Dedup::new(tol);
    let mut points = Vec::new();
    let per_side = 3 * refinement;
    for cluster in &basis.clusters {
        for &d in &cluster.distances {
            for side in [Side::Prev, Side::Next] {
                for i in 1..=per_side {
                    let s = d * i as f64 / per_side as f64;
                    // Walks past the far corner are dropped, not clipped.
                    if let Some(bp) = domain.walk_from_corner(cluster.corner, side, s) {
                        if dedup.insert(bp.position) {
                            points.push(SamplePoint {
                                arc: bp.arc,
                                t: bp.t,
                                position: bp.position,
                                clustered: true,
                            });
                        }
                    }
                }
            }
        }
    }
    let target = (target_ratio * refinement as f64 * basis.dof_count() as f64).ceil() as usize;
    let arcs = domain.arcs();
    for round in 0..24 {
        if points.len() >= target {
            break;
        }
        let deficit = target - points.len();
        let per_arc = deficit.div_ceil(arcs.len()) + round;
        for (idx, arc) in arcs.iter().enumerate() {
            for i in 0..per_arc {
                let t = (i as f64 + 1.0) / (per_arc as f64 + 1.0);
                let p = arc.point(t);
                if dedup.insert(p) {
                    points.push(SamplePoint {
                        arc: idx,
                        t,
                        position: p,
                        clustered: false,
                    });
                }
            }
        }
    }
    SamplePlan { points }
}

// Spatial-hash deduplication of sample positions.
struct Dedup {
    tol: f64,
    cells: HashMap<(i64, i64), Vec<C64>>,
}

impl Dedup {
    fn new(tol: f64) -> Dedup {
        Dedup {
            tol: tol.max(f64::MIN_POSITIVE),
            cells: HashMap::new(),
        }
    }

    fn insert(&mut self, p: C64) -> bool {
        let cx = (p.re / self.tol).floor() as i64;
        let cy = (p.im / self.tol).floor() as i64;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = self.cells.get(&(cx + dx, cy + dy)) {
                    if v.iter().any(|q| (p - q).norm() <= self.tol) {
                        return false;
                    }
                }
            }
        }
        self.cells.entry((cx, cy)).or_default().push(p);
        true
    }
}

/// The assembled least-squares system, columns scaled to unit 2-norm.
#[derive(Debug, Clone)]
pub struct FitSystem {
    /// Scaled (and row-weighted) columns, each of length `nrows`.
    pub columns: Vec<Vec<f64>>,
    /// Weighted right-hand side.
    pub rhs: Vec<f64>,
    /// Original column 2-norms; zero marks an identically zero column.
    pub column_scales: Vec<f64>,
    /// Row weights (all 1 for the unweighted norm).
    pub weights: Vec<f64>,
    pub nrows: usize,
    pub plan: SamplePlan,
    pub basis: Basis,
}

/// Build the real least-squares system for `basis` on `plan`.
///
/// Column order: per pole z_k the pair Re 1/(z - z_k), Im 1/(z - z_k); then
/// Re (z - z*)^p for p = 0..N2; then Im (z - z*)^p for p = 1..N2. With
/// `weighted` set, rows are scaled by distance to the nearest corner over
/// the diameter.
pub fn assemble(
    domain: &Domain,
    data: &BoundarySpec,
    basis: &Basis,
    plan: &SamplePlan,
    weighted: bool,
) -> Result<FitSystem> {
    let m = plan.len();
    if m == 0 {
        return Err(Error::Assembly("sample plan is empty".into()));
    }
    let n2 = basis.poly_degree;
    let n = basis.dof_count();
    let weights: Vec<f64> = if weighted {
        plan.points
            .iter()
            .map(|p| {
                domain
                    .corners()
                    .iter()
                    .map(|c| (p.position - c.position).norm())
                    .fold(f64::INFINITY, f64::min)
                    / domain.diameter()
            })
            .collect()
    } else {
        vec![1.0; m]
    };
    let mut rhs = Vec::with_capacity(m);
    for (p, &w) in plan.points.iter().zip(&weights) {
        let h = data.eval(p.arc, p.t, p.position.re, p.position.im)?;
        rhs.push(h * w);
    }
    let poles: Vec<C64> = basis.poles().collect();
    let tiny = 1e-300;
    let pole_cols: Vec<Result<(Vec<f64>, Vec<f64>)>> = poles
        .par_iter()
        .map(|&zk| {
            let mut re = Vec::with_capacity(m);
            let mut im = Vec::with_capacity(m);
            for (p, &w) in plan.points.iter().zip(&weights) {
                let d = p.position - zk;
                if d.norm_sqr() < tiny {
                    return Err(Error::Assembly(format!(
                        "pole at ({}, {}) coincides with a sample point",
                        zk.re, zk.im
                    )));
                }
                let g = d.conj() / d.norm_sqr(); // 1 / (z - z_k)
                re.push(g.re * w);
                im.push(g.im * w);
            }
            Ok((re, im))
        })
        .collect();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n);
    for pair in pole_cols {
        let (re, im) = pair?;
        columns.push(re);
        columns.push(im);
    }
    let mut re_cols = vec![vec![0.0; m]; n2 + 1];
    let mut im_cols = vec![vec![0.0; m]; n2];
    for (i, (p, &w)) in plan.points.iter().zip(&weights).enumerate() {
        let z = p.position - basis.center;
        let mut pw = C64::new(1.0, 0.0);
        for d in 0..=n2 {
            re_cols[d][i] = pw.re * w;
            if d >= 1 {
                im_cols[d - 1][i] = pw.im * w;
            }
            pw *= z;
        }
    }
    columns.extend(re_cols);
    columns.extend(im_cols);
    debug_assert_eq!(columns.len(), n);
    let mut column_scales = Vec::with_capacity(n);
    for col in &mut columns {
        let s = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if s > 0.0 {
            for v in col.iter_mut() {
                *v /= s;
            }
        }
        column_scales.push(s);
    }
    Ok(FitSystem {
        columns,
        rhs,
        column_scales,
        weights,
        nrows: m,
        plan: plan.clone(),
        basis: basis.clone(),
    })
}
