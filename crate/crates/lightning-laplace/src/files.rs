//! File formats: geometry and boundary-condition JSON, solution JSON, and
//! the CSV exports.
//!
//! Solutions round-trip exactly: serde_json prints f64 values in shortest
//! form that parses back to the same bits, so a saved solution evaluates
//! bit-identically after loading. CSV output uses '.' decimals, UTF-8, LF.

use crate::basis::{Basis, PoleCluster};
use crate::boundary::{random_series, ArcData, BoundarySpec, Expr};
use crate::error::{Error, Result};
use crate::evaluator::EvaluationGrid;
use crate::geometry::{build_polygon, ArcKind, ArcSpec, Domain};
use crate::solver::{ConvergenceReport, ReportRow, Solution};
use crate::theory::WedgeStudy;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

fn json_err(path: &Path, e: &serde_json::Error) -> Error {
    Error::file(
        path.display().to_string(),
        format!("line {}, column {}: {e}", e.line(), e.column()),
    )
}

fn field_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::file(path.display().to_string(), msg.into())
}

// ---------------------------------------------------------------- geometry

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum ArcFile {
    Line,
    Circular {
        center: [f64; 2],
        radius: f64,
        ccw: bool,
    },
    Elliptic {
        center: [f64; 2],
        semi_major: f64,
        semi_minor: f64,
        rotation: f64,
        ccw: bool,
    },
}

/// Geometry file: either {"vertices": [[x,y], ...]} for a polygon or
/// {"corners": [[x,y], ...], "arcs": [...]} for curved boundaries.
#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct GeometryFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    corners: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    arcs: Option<Vec<ArcFile>>,
}

fn to_c64(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

fn from_c64(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn arcfile_to_spec(a: &ArcFile) -> ArcSpec {
    match a {
        ArcFile::Line => ArcSpec::Line,
        ArcFile::Circular { center, radius, ccw } => ArcSpec::Circular {
            center: to_c64(*center),
            radius: *radius,
            ccw: *ccw,
        },
        ArcFile::Elliptic {
            center,
            semi_major,
            semi_minor,
            rotation,
            ccw,
        } => ArcSpec::Elliptic {
            center: to_c64(*center),
            semi_major: *semi_major,
            semi_minor: *semi_minor,
            rotation: *rotation,
            ccw: *ccw,
        },
    }
}

fn geometry_from_file(path: &Path, g: &GeometryFile) -> Result<Domain> {
    match (&g.vertices, &g.corners, &g.arcs) {
        (Some(v), None, None) => {
            let pts: Vec<C64> = v.iter().map(|&p| to_c64(p)).collect();
            build_polygon(&pts)
        }
        (None, Some(c), Some(a)) => {
            if c.len() != a.len() {
                return Err(field_err(
                    path,
                    format!("{} corners but {} arcs; counts must match", c.len(), a.len()),
                ));
            }
            let pts: Vec<C64> = c.iter().map(|&p| to_c64(p)).collect();
            let specs: Vec<ArcSpec> = a.iter().map(arcfile_to_spec).collect();
            Domain::from_corner_arcs(&pts, &specs)
        }
        _ => Err(field_err(
            path,
            "expected either a \"vertices\" field or both \"corners\" and \"arcs\"",
        )),
    }
}

fn geometry_to_file(domain: &Domain) -> GeometryFile {
    let positions: Vec<[f64; 2]> = domain
        .corners()
        .iter()
        .map(|c| from_c64(c.position))
        .collect();
    if domain.is_polygonal() {
        GeometryFile {
            vertices: Some(positions),
            ..GeometryFile::default()
        }
    } else {
        let arcs = domain
            .arcs()
            .iter()
            .map(|arc| match &arc.kind {
                ArcKind::Line => ArcFile::Line,
                ArcKind::Circular { center, radius, sweep, .. } => ArcFile::Circular {
                    center: from_c64(*center),
                    radius: *radius,
                    ccw: *sweep > 0.0,
                },
                ArcKind::Elliptic {
                    center,
                    semi_major,
                    semi_minor,
                    rotation,
                    sweep,
                    ..
                } => ArcFile::Elliptic {
                    center: from_c64(*center),
                    semi_major: *semi_major,
                    semi_minor: *semi_minor,
                    rotation: *rotation,
                    ccw: *sweep > 0.0,
                },
            })
            .collect();
        GeometryFile {
            corners: Some(positions),
            arcs: Some(arcs),
            ..GeometryFile::default()
        }
    }
}

pub fn load_domain(path: &Path) -> Result<Domain> {
    let f = File::open(path).map_err(|e| field_err(path, e.to_string()))?;
    let g: GeometryFile =
        serde_json::from_reader(BufReader::new(f)).map_err(|e| json_err(path, &e))?;
    geometry_from_file(path, &g)
}

pub fn save_domain(path: &Path, domain: &Domain) -> Result<()> {
    write_json(path, &geometry_to_file(domain))
}

// ---------------------------------------------------- boundary conditions

#[derive(Serialize, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct RandSpec {
    pub seed: u64,
    /// Wavelength in plane units along the arc.
    pub wavelength: f64,
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(untagged)]
enum BcEntry {
    Expr(String),
    Rand { randnfun: RandSpec },
}

/// BC file: {"arcs": [entry, ...]} with one entry per arc, or
/// {"all": entry} applied to every arc. An entry is an expression string or
/// {"randnfun": {"seed": s, "wavelength": w}}. With "all", randnfun seeds
/// are offset by the arc index so arcs stay independent.
#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BcFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    arcs: Option<Vec<BcEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    all: Option<BcEntry>,
}

fn entry_to_data(
    path: &Path,
    entry: &BcEntry,
    arc_index: usize,
    arc_len: f64,
    seed_offset: bool,
) -> Result<ArcData> {
    match entry {
        BcEntry::Expr(s) => {
            let e = Expr::parse(s).map_err(|err| {
                field_err(path, format!("arc {arc_index}: {err}"))
            })?;
            Ok(ArcData::Expr(e))
        }
        BcEntry::Rand { randnfun } => {
            if !(randnfun.wavelength > 0.0) {
                return Err(field_err(
                    path,
                    format!("arc {arc_index}: randnfun wavelength must be positive"),
                ));
            }
            let seed = if seed_offset {
                randnfun.seed.wrapping_add(arc_index as u64)
            } else {
                randnfun.seed
            };
            random_series(seed, randnfun.wavelength, arc_len)
        }
    }
}

pub fn load_boundary(path: &Path, domain: &Domain) -> Result<BoundarySpec> {
    let f = File::open(path).map_err(|e| field_err(path, e.to_string()))?;
    let bc: BcFile = serde_json::from_reader(BufReader::new(f)).map_err(|e| json_err(path, &e))?;
    let m = domain.arcs().len();
    let data: Vec<ArcData> = match (&bc.arcs, &bc.all) {
        (Some(entries), None) => {
            if entries.len() != m {
                return Err(field_err(
                    path,
                    format!("\"arcs\" has {} entries, domain has {m} arcs", entries.len()),
                ));
            }
            entries
                .iter()
                .enumerate()
                .map(|(k, e)| entry_to_data(path, e, k, domain.arcs()[k].length(), false))
                .collect::<Result<_>>()?
        }
        (None, Some(entry)) => (0..m)
            .map(|k| entry_to_data(path, entry, k, domain.arcs()[k].length(), true))
            .collect::<Result<_>>()?,
        _ => {
            return Err(field_err(
                path,
                "expected exactly one of \"arcs\" or \"all\"",
            ))
        }
    };
    BoundarySpec::from_arc_data(domain, data)
}

/// Write a BC file that reproduces per-arc seeded random data: one
/// randnfun entry per arc, wavelength already in plane units.
pub fn save_random_boundary(path: &Path, domain: &Domain, seed: u64, wavelength_frac: f64) -> Result<()> {
    let entries: Vec<BcEntry> = domain
        .arcs()
        .iter()
        .enumerate()
        .map(|(k, arc)| BcEntry::Rand {
            randnfun: RandSpec {
                seed: seed.wrapping_add(k as u64),
                wavelength: wavelength_frac * arc.length(),
            },
        })
        .collect();
    write_json(
        path,
        &BcFile {
            arcs: Some(entries),
            ..BcFile::default()
        },
    )
}

pub fn save_uniform_boundary(path: &Path, expr: &str) -> Result<()> {
    write_json(
        path,
        &BcFile {
            all: Some(BcEntry::Expr(expr.to_string())),
            ..BcFile::default()
        },
    )
}

// ---------------------------------------------------------------- solution

#[derive(Serialize, Deserialize)]
struct ClusterFile {
    corner: usize,
    poles: Vec<[f64; 2]>,
    distances: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SolutionFile {
    domain: GeometryFile,
    /// Expansion point z*.
    center: [f64; 2],
    clusters: Vec<ClusterFile>,
    poly_degree: usize,
    /// a_j, matching the flattened cluster pole order.
    pole_coefficients: Vec<[f64; 2]>,
    /// c_p for p = 0..poly_degree; c_0 must be real.
    poly_coefficients: Vec<[f64; 2]>,
    n1: usize,
    n2: usize,
    dofs: usize,
    tolerance: f64,
    boundary_error: f64,
    fine_mesh_error: f64,
    condition_estimate: f64,
    converged: bool,
    weighted: bool,
    cluster_size: usize,
    sample_count: usize,
}

pub fn save_solution(path: &Path, sol: &Solution) -> Result<()> {
    let file = SolutionFile {
        domain: geometry_to_file(&sol.domain),
        center: from_c64(sol.basis.center),
        clusters: sol
            .basis
            .clusters
            .iter()
            .map(|c| ClusterFile {
                corner: c.corner,
                poles: c.poles.iter().map(|&p| from_c64(p)).collect(),
                distances: c.distances.clone(),
            })
            .collect(),
        poly_degree: sol.basis.poly_degree,
        pole_coefficients: sol.pole_coefficients.iter().map(|&a| from_c64(a)).collect(),
        poly_coefficients: sol.poly_coefficients.iter().map(|&c| from_c64(c)).collect(),
        n1: sol.basis.pole_count(),
        n2: sol.basis.poly_degree,
        dofs: sol.dofs,
        tolerance: sol.tolerance,
        boundary_error: sol.boundary_error,
        fine_mesh_error: sol.fine_mesh_error,
        condition_estimate: sol.condition_estimate,
        converged: sol.converged,
        weighted: sol.weighted,
        cluster_size: sol.cluster_size,
        sample_count: sol.sample_count,
    };
    write_json(path, &file)
}

pub fn load_solution(path: &Path) -> Result<Solution> {
    let f = File::open(path).map_err(|e| field_err(path, e.to_string()))?;
    let file: SolutionFile =
        serde_json::from_reader(BufReader::new(f)).map_err(|e| json_err(path, &e))?;
    let domain = geometry_from_file(path, &file.domain)?;
    let clusters: Vec<PoleCluster> = file
        .clusters
        .iter()
        .map(|c| {
            if c.poles.len() != c.distances.len() {
                return Err(field_err(
                    path,
                    format!(
                        "cluster at corner {}: {} poles vs {} distances",
                        c.corner,
                        c.poles.len(),
                        c.distances.len()
                    ),
                ));
            }
            if c.corner >= domain.corner_count() {
                return Err(field_err(
                    path,
                    format!("cluster corner index {} out of range", c.corner),
                ));
            }
            Ok(PoleCluster {
                corner: c.corner,
                poles: c.poles.iter().map(|&p| to_c64(p)).collect(),
                distances: c.distances.clone(),
                discarded: 0,
            })
        })
        .collect::<Result<_>>()?;
    let basis = Basis::new(clusters, to_c64(file.center), file.poly_degree);
    if basis.pole_count() != file.pole_coefficients.len() {
        return Err(field_err(
            path,
            format!(
                "{} poles but {} pole coefficients",
                basis.pole_count(),
                file.pole_coefficients.len()
            ),
        ));
    }
    if file.poly_coefficients.len() != file.poly_degree + 1 {
        return Err(field_err(
            path,
            format!(
                "poly_degree {} needs {} coefficients, file has {}",
                file.poly_degree,
                file.poly_degree + 1,
                file.poly_coefficients.len()
            ),
        ));
    }
    if file.poly_coefficients[0][1] != 0.0 {
        return Err(field_err(
            path,
            "the constant coefficient must have zero imaginary part",
        ));
    }
    Ok(Solution {
        domain,
        basis,
        pole_coefficients: file.pole_coefficients.iter().map(|&a| to_c64(a)).collect(),
        poly_coefficients: file.poly_coefficients.iter().map(|&c| to_c64(c)).collect(),
        boundary_error: file.boundary_error,
        fine_mesh_error: file.fine_mesh_error,
        condition_estimate: file.condition_estimate,
        converged: file.converged,
        weighted: file.weighted,
        tolerance: file.tolerance,
        cluster_size: file.cluster_size,
        dofs: file.dofs,
        sample_count: file.sample_count,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = File::create(path).map_err(|e| field_err(path, e.to_string()))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| json_err(path, &e))?;
    w.write_all(b"\n")
        .map_err(|e| field_err(path, e.to_string()))?;
    Ok(())
}

// --------------------------------------------------------------------- CSV

/// Convergence history: one row per iteration, fine-mesh error filled only
/// on the accepted row.
pub fn write_report_csv(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut out = String::from("n,N,M,err_sup,err_fine,cond_est,seconds\n");
    for r in rows {
        let fine = r.fine_error.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n, r.dofs, r.rows, r.error, fine, r.condition, r.seconds
        ));
    }
    write_text(path, &out)
}

pub fn write_report(path: &Path, report: &ConvergenceReport) -> Result<()> {
    write_report_csv(path, &report.rows)
}

/// Interior grid values; exterior nodes are omitted entirely.
pub fn write_grid_csv(path: &Path, grid: &EvaluationGrid) -> Result<()> {
    let mut out = String::from("x,y,u\n");
    for (j, &y) in grid.ys.iter().enumerate() {
        for (i, &x) in grid.xs.iter().enumerate() {
            let v = grid.value(i, j);
            if v.is_finite() {
                out.push_str(&format!("{x},{y},{v}\n"));
            }
        }
    }
    write_text(path, &out)
}

/// One evaluation row: failures keep their place with an error marker.
pub enum EvalRow {
    Value { z: C64, u: f64, grad: Option<(f64, f64)> },
    Failed { z: C64 },
}

pub fn write_points_csv(path: &Path, rows: &[EvalRow], with_grad: bool) -> Result<()> {
    let mut out = String::from(if with_grad { "x,y,u,ux,uy\n" } else { "x,y,u\n" });
    for row in rows {
        match row {
            EvalRow::Value { z, u, grad } => match (with_grad, grad) {
                (true, Some((ux, uy))) => {
                    out.push_str(&format!("{},{},{},{},{}\n", z.re, z.im, u, ux, uy))
                }
                (true, None) => out.push_str(&format!("{},{},{},,\n", z.re, z.im, u)),
                (false, _) => out.push_str(&format!("{},{},{}\n", z.re, z.im, u)),
            },
            EvalRow::Failed { z } => {
                if with_grad {
                    out.push_str(&format!("{},{},error,,\n", z.re, z.im));
                } else {
                    out.push_str(&format!("{},{},error\n", z.re, z.im));
                }
            }
        }
    }
    write_text(path, &out)
}

/// Points to evaluate: CSV with x,y per line; a leading "x,y" header line
/// is allowed and skipped.
pub fn read_points_csv(path: &Path) -> Result<Vec<C64>> {
    let mut f = File::open(path).map_err(|e| field_err(path, e.to_string()))?;
    let mut text = String::new();
    f.read_to_string(&mut text)
        .map_err(|e| field_err(path, e.to_string()))?;
    let mut pts = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if lineno == 0 && line.chars().any(|c| c.is_alphabetic()) {
            continue; // header
        }
        let mut parts = line.split(',');
        let bad = || field_err(path, format!("line {}: expected \"x,y\"", lineno + 1));
        let x: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let y: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        if parts.next().is_some() {
            return Err(bad());
        }
        pts.push(C64::new(x, y));
    }
    if pts.is_empty() {
        return Err(field_err(path, "no points found"));
    }
    Ok(pts)
}

pub fn write_wedge_csv(path: &Path, study: &WedgeStudy) -> Result<()> {
    let mut out = String::from("n,sup_error\n");
    for r in &study.rows {
        out.push_str(&format!("{},{}\n", r.n, r.sup_error));
    }
    write_text(path, &out)
}

pub fn write_levels_csv(path: &Path, grid: &[(f64, f64, f64)]) -> Result<()> {
    let mut out = String::from("x,y,log10_abs_phi\n");
    for &(x, y, v) in grid {
        out.push_str(&format!("{x},{y},{v}\n"));
    }
    write_text(path, &out)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let f = File::create(path).map_err(|e| field_err(path, e.to_string()))?;
    let mut w = BufWriter::new(f);
    w.write_all(text.as_bytes())
        .map_err(|e| field_err(path, e.to_string()))?;
    Ok(())
}
