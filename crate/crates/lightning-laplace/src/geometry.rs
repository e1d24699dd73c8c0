//! Planar domains bounded by line segments, circular arcs and elliptic arcs.
//!
//! A `Domain` is a closed counterclockwise chain of arcs meeting at corners.
//! Corners carry their interior angle and the exterior bisector direction,
//! which is where pole clusters are placed.

use crate::error::{Error, Result};
use crate::util::integrate;
use crate::C64;

const TAU: f64 = std::f64::consts::TAU;
const PI: f64 = std::f64::consts::PI;

/// Relative tolerance (times diameter) below which a point counts as lying
/// on the boundary, hence "not contained".
pub const BOUNDARY_TOL: f64 = 1e-14;
/// Corners this close to a straight angle are rejected: they contribute no
/// singularity and make the exterior bisector numerically meaningless.
const STRAIGHT_TOL: f64 = 1e-12;
/// Minimum opening angle of a corner; sharper corners are treated as cusps.
const CUSP_TOL: f64 = 1e-6;

/// One corner of the boundary chain.
#[derive(Debug, Clone)]
pub struct Corner {
    pub position: C64,
    /// Interior angle in (0, 2*pi), measured between the incident arc
    /// tangents; exactly pi is rejected at construction.
    pub interior_angle: f64,
    /// Unit vector pointing out of the domain, bisecting the exterior angle.
    pub exterior_bisector: C64,
    /// True when the interior angle is below pi.
    pub salient: bool,
}

/// Shape of a single boundary arc. Parameters are stored so that the arc is
/// traversed for t in [0, 1] from its start corner to its end corner.
#[derive(Debug, Clone)]
pub enum ArcKind {
    Line,
    Circular {
        center: C64,
        radius: f64,
        start_angle: f64,
        /// Signed angular sweep; positive is counterclockwise.
        sweep: f64,
    },
    Elliptic {
        center: C64,
        semi_major: f64,
        semi_minor: f64,
        /// Rotation of the major axis against the x-axis.
        rotation: f64,
        start_param: f64,
        sweep: f64,
    },
}

/// A directed boundary arc between two corners.
#[derive(Debug, Clone)]
pub struct BoundaryArc {
    pub start: C64,
    pub end: C64,
    pub kind: ArcKind,
    length: f64,
}

/// A point on the boundary, tagged with the arc it lies on.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryPoint {
    pub arc: usize,
    pub t: f64,
    pub position: C64,
}

/// Which of the two arcs incident to a corner to walk along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// The arc ending at the corner.
    Prev,
    /// The arc starting at the corner.
    Next,
}

impl BoundaryArc {
    fn line(start: C64, end: C64) -> Self {
        BoundaryArc {
            start,
            end,
            kind: ArcKind::Line,
            length: (end - start).norm(),
        }
    }

    fn circular(start: C64, end: C64, center: C64, radius: f64, ccw: bool) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::Geometry("circular arc needs positive radius".into()));
        }
        for p in [start, end] {
            let off = ((p - center).norm() - radius).abs();
            if off > 1e-9 * radius {
                return Err(Error::Geometry(format!(
                    "arc endpoint ({}, {}) is off the circle by {off:.3e}",
                    p.re, p.im
                )));
            }
        }
        let start_angle = (start - center).arg();
        let end_angle = (end - center).arg();
        let sweep = sweep_between(start_angle, end_angle, ccw)?;
        Ok(BoundaryArc {
            start,
            end,
            kind: ArcKind::Circular {
                center,
                radius,
                start_angle,
                sweep,
            },
            length: radius * sweep.abs(),
        })
    }

    fn elliptic(
        start: C64,
        end: C64,
        center: C64,
        semi_major: f64,
        semi_minor: f64,
        rotation: f64,
        ccw: bool,
    ) -> Result<Self> {
        if semi_major <= 0.0 || semi_minor <= 0.0 {
            return Err(Error::Geometry("elliptic arc needs positive semi-axes".into()));
        }
        let rot = C64::from_polar(1.0, -rotation);
        let param_of = |p: C64| -> Result<f64> {
            let q = (p - center) * rot;
            let miss = (q.re / semi_major).powi(2) + (q.im / semi_minor).powi(2) - 1.0;
            if miss.abs() > 1e-9 {
                return Err(Error::Geometry(format!(
                    "arc endpoint ({}, {}) is off the ellipse by {miss:.3e}",
                    p.re, p.im
                )));
            }
            Ok((q.im / semi_minor).atan2(q.re / semi_major))
        };
        let start_param = param_of(start)?;
        let end_param = param_of(end)?;
        let sweep = sweep_between(start_param, end_param, ccw)?;
        let speed = |t: f64| {
            let psi = start_param + t * sweep;
            sweep.abs() * (semi_major * psi.sin()).hypot(semi_minor * psi.cos())
        };
        let panels = 16.max((sweep.abs() * 8.0).ceil() as usize);
        let length = integrate(speed, 0.0, 1.0, panels);
        Ok(BoundaryArc {
            start,
            end,
            kind: ArcKind::Elliptic {
                center,
                semi_major,
                semi_minor,
                rotation,
                start_param,
                sweep,
            },
            length,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Position at parameter t in [0, 1].
    pub fn point(&self, t: f64) -> C64 {
        match self.kind {
            ArcKind::Line => self.start + t * (self.end - self.start),
            ArcKind::Circular {
                center,
                radius,
                start_angle,
                sweep,
            } => center + C64::from_polar(radius, start_angle + t * sweep),
            ArcKind::Elliptic {
                center,
                semi_major,
                semi_minor,
                rotation,
                start_param,
                sweep,
            } => {
                let psi = start_param + t * sweep;
                let q = C64::new(semi_major * psi.cos(), semi_minor * psi.sin());
                center + q * C64::from_polar(1.0, rotation)
            }
        }
    }

    /// Unit tangent in the direction of travel.
    pub fn unit_tangent(&self, t: f64) -> C64 {
        match self.kind {
            ArcKind::Line => (self.end - self.start) / self.length,
            ArcKind::Circular {
                start_angle, sweep, ..
            } => {
                let v = C64::i() * C64::from_polar(1.0, start_angle + t * sweep);
                if sweep >= 0.0 {
                    v
                } else {
                    -v
                }
            }
            ArcKind::Elliptic {
                semi_major,
                semi_minor,
                rotation,
                start_param,
                sweep,
                ..
            } => {
                let psi = start_param + t * sweep;
                let d = C64::new(-semi_major * psi.sin(), semi_minor * psi.cos())
                    * C64::from_polar(1.0, rotation);
                let d = if sweep >= 0.0 { d } else { -d };
                d / d.norm()
            }
        }
    }

    /// Parameter t at which the arc length from the start equals `s`.
    fn t_at_arclength(&self, s: f64) -> f64 {
        match self.kind {
            ArcKind::Line | ArcKind::Circular { .. } => s / self.length,
            ArcKind::Elliptic {
                semi_major,
                semi_minor,
                start_param,
                sweep,
                ..
            } => {
                let speed = |t: f64| {
                    let psi = start_param + t * sweep;
                    sweep.abs() * (semi_major * psi.sin()).hypot(semi_minor * psi.cos())
                };
                // Arc length is monotone in t; Newton from the uniform guess,
                // bisection-guarded.
                let mut lo = 0.0_f64;
                let mut hi = 1.0_f64;
                let mut t = (s / self.length).clamp(0.0, 1.0);
                for _ in 0..60 {
                    let panels = 16.max((sweep.abs() * 4.0).ceil() as usize);
                    let g = integrate(&speed, 0.0, t, panels) - s;
                    if g > 0.0 {
                        hi = t;
                    } else {
                        lo = t;
                    }
                    let dg = speed(t);
                    let mut next = t - g / dg;
                    if !(lo..=hi).contains(&next) {
                        next = 0.5 * (lo + hi);
                    }
                    if (next - t).abs() <= 1e-14 {
                        t = next;
                        break;
                    }
                    t = next;
                }
                t
            }
        }
    }

    /// Shortest distance from `z` to this arc.
    fn distance(&self, z: C64) -> f64 {
        let endpoint_min = (z - self.start).norm().min((z - self.end).norm());
        match self.kind {
            ArcKind::Line => {
                let d = self.end - self.start;
                let t = ((z - self.start).re * d.re + (z - self.start).im * d.im)
                    / (d.norm_sqr());
                if (0.0..=1.0).contains(&t) {
                    (z - (self.start + t * d)).norm()
                } else {
                    endpoint_min
                }
            }
            ArcKind::Circular {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let rel = wrap_angle((z - center).arg() - start_angle, sweep);
                if in_sweep(rel, sweep) {
                    ((z - center).norm() - radius).abs().min(endpoint_min)
                } else {
                    endpoint_min
                }
            }
            ArcKind::Elliptic { .. } => {
                // Sampled bracket plus ternary refinement; the squared
                // distance is smooth in t.
                let mut best_t = 0.0;
                let mut best = f64::INFINITY;
                const K: usize = 64;
                for i in 0..=K {
                    let t = i as f64 / K as f64;
                    let d = (z - self.point(t)).norm_sqr();
                    if d < best {
                        best = d;
                        best_t = t;
                    }
                }
                let mut lo = (best_t - 1.0 / K as f64).max(0.0);
                let mut hi = (best_t + 1.0 / K as f64).min(1.0);
                for _ in 0..70 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    if (z - self.point(m1)).norm_sqr() < (z - self.point(m2)).norm_sqr() {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                let t = 0.5 * (lo + hi);
                (z - self.point(t)).norm().min(endpoint_min)
            }
        }
    }
}

fn sweep_between(start: f64, end: f64, ccw: bool) -> Result<f64> {
    let mut d = (end - start) % TAU;
    if ccw {
        if d <= 0.0 {
            d += TAU;
        }
        if d >= TAU - 1e-12 {
            return Err(Error::Geometry("arc endpoints coincide".into()));
        }
        Ok(d)
    } else {
        if d >= 0.0 {
            d -= TAU;
        }
        if d <= -TAU + 1e-12 {
            return Err(Error::Geometry("arc endpoints coincide".into()));
        }
        Ok(d)
    }
}

fn wrap_angle(raw: f64, sweep: f64) -> f64 {
    let rel = raw.rem_euclid(TAU);
    if sweep >= 0.0 {
        rel
    } else {
        rel - TAU
    }
}

fn in_sweep(rel: f64, sweep: f64) -> bool {
    if sweep >= 0.0 {
        rel <= sweep
    } else {
        rel >= sweep
    }
}

/// Arc description used when building curved domains (endpoints come from
/// the corner list).
#[derive(Debug, Clone)]
pub enum ArcSpec {
    Line,
    Circular { center: C64, radius: f64, ccw: bool },
    Elliptic {
        center: C64,
        semi_major: f64,
        semi_minor: f64,
        rotation: f64,
        ccw: bool,
    },
}

/// A bounded, simply connected domain with a corner chain boundary.
#[derive(Debug, Clone)]
pub struct Domain {
    corners: Vec<Corner>,
    arcs: Vec<BoundaryArc>,
    center: C64,
    diameter: f64,
    polygonal: bool,
}

/// Build a domain from polygon vertices. Input may be clockwise or
/// counterclockwise; the stored orientation is always counterclockwise.
pub fn build_polygon(vertices: &[C64]) -> Result<Domain> {
    let m = vertices.len();
    if m < 3 {
        return Err(Error::Geometry(format!(
            "polygon needs at least 3 vertices, got {m}"
        )));
    }
    let scale = vertices
        .iter()
        .flat_map(|a| vertices.iter().map(move |b| (a - b).norm()))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Geometry("all vertices coincide".into()));
    }
    for i in 0..m {
        for j in i + 1..m {
            if (vertices[i] - vertices[j]).norm() <= 1e-12 * scale {
                return Err(Error::Geometry(format!(
                    "repeated vertex at ({}, {})",
                    vertices[i].re, vertices[i].im
                )));
            }
        }
    }
    let mut verts: Vec<C64> = vertices.to_vec();
    let area2: f64 = (0..m)
        .map(|k| {
            let a = verts[k];
            let b = verts[(k + 1) % m];
            a.re * b.im - b.re * a.im
        })
        .sum();
    if area2.abs() <= 1e-14 * scale * scale {
        return Err(Error::Geometry("polygon has vanishing area".into()));
    }
    if area2 < 0.0 {
        verts.reverse();
    }
    check_simple(&verts, scale)?;
    let arcs: Vec<BoundaryArc> = (0..m)
        .map(|k| BoundaryArc::line(verts[k], verts[(k + 1) % m]))
        .collect();
    Domain::from_parts(verts, arcs, true)
}

impl Domain {
    /// Build a domain from corners joined by the given arcs; `specs[k]`
    /// connects `corners[k]` to `corners[k + 1]` (cyclically). Corners must
    /// be listed so that the interior lies to the left (counterclockwise).
    pub fn from_corner_arcs(corners: &[C64], specs: &[ArcSpec]) -> Result<Domain> {
        let m = corners.len();
        if m < 2 {
            return Err(Error::Geometry(format!(
                "curved boundary needs at least 2 corners, got {m}"
            )));
        }
        if specs.len() != m {
            return Err(Error::Geometry(format!(
                "{} corners need {} arcs, got {}",
                m,
                m,
                specs.len()
            )));
        }
        let scale = corners
            .iter()
            .flat_map(|a| corners.iter().map(move |b| (a - b).norm()))
            .fold(0.0, f64::max);
        for i in 0..m {
            for j in i + 1..m {
                if (corners[i] - corners[j]).norm() <= 1e-12 * scale {
                    return Err(Error::Geometry("repeated corner".into()));
                }
            }
        }
        let mut arcs = Vec::with_capacity(m);
        for (k, spec) in specs.iter().enumerate() {
            let a = corners[k];
            let b = corners[(k + 1) % m];
            let arc = match *spec {
                ArcSpec::Line => BoundaryArc::line(a, b),
                ArcSpec::Circular { center, radius, ccw } => {
                    BoundaryArc::circular(a, b, center, radius, ccw)?
                }
                ArcSpec::Elliptic {
                    center,
                    semi_major,
                    semi_minor,
                    rotation,
                    ccw,
                } => BoundaryArc::elliptic(a, b, center, semi_major, semi_minor, rotation, ccw)?,
            };
            arcs.push(arc);
        }
        let polygonal = arcs.iter().all(|a| matches!(a.kind, ArcKind::Line));
        // Orientation via the shoelace integral over the arc chain.
        let area2: f64 = arcs
            .iter()
            .map(|arc| {
                integrate(
                    |t| {
                        let p = arc.point(t);
                        let d = arc.unit_tangent(t);
                        (p.re * d.im - p.im * d.re) * arc.speed_hint(t)
                    },
                    0.0,
                    1.0,
                    24,
                )
            })
            .sum();
        if area2 <= 0.0 {
            return Err(Error::Geometry(
                "corners must be listed counterclockwise (interior on the left)".into(),
            ));
        }
        Domain::from_parts(corners.to_vec(), arcs, polygonal)
    }

    fn from_parts(positions: Vec<C64>, arcs: Vec<BoundaryArc>, polygonal: bool) -> Result<Domain> {
        let m = positions.len();
        let mut corners = Vec::with_capacity(m);
        for k in 0..m {
            let prev = &arcs[(k + m - 1) % m];
            let next = &arcs[k];
            let d_in = -prev.unit_tangent(1.0);
            let d_out = next.unit_tangent(0.0);
            let raw = (d_in / d_out).arg();
            let interior = if raw <= 0.0 { raw + TAU } else { raw };
            if (interior - PI).abs() <= STRAIGHT_TOL {
                return Err(Error::Geometry(format!(
                    "straight angle at corner ({}, {}); drop the corner instead",
                    positions[k].re, positions[k].im
                )));
            }
            let opening = interior.min(TAU - interior);
            if opening <= CUSP_TOL
                || (opening <= CUSP_TOL
                    && !(matches!(prev.kind, ArcKind::Line) && matches!(next.kind, ArcKind::Line)))
            {
                return Err(Error::Geometry(format!(
                    "cusp at corner ({}, {}): opening angle {opening:.3e}",
                    positions[k].re, positions[k].im
                )));
            }
            let bisector = -d_out * C64::from_polar(1.0, 0.5 * interior);
            corners.push(Corner {
                position: positions[k],
                interior_angle: interior,
                exterior_bisector: bisector,
                salient: interior < PI,
            });
        }
        let mut probe: Vec<C64> = positions.clone();
        for arc in &arcs {
            for i in 1..16 {
                probe.push(arc.point(i as f64 / 16.0));
            }
        }
        let diameter = probe
            .iter()
            .flat_map(|a| probe.iter().map(move |b| (a - b).norm()))
            .fold(0.0, f64::max);
        let mut dom = Domain {
            corners,
            arcs,
            center: C64::new(0.0, 0.0),
            diameter,
            polygonal,
        };
        dom.center = dom.choose_center()?;
        Ok(dom)
    }

    pub fn corners(&self) -> &[Corner] {
        &self.corners
    }

    pub fn arcs(&self) -> &[BoundaryArc] {
        &self.arcs
    }

    pub fn corner_count(&self) -> usize {
        self.corners.len()
    }

    /// Expansion point z* for the polynomial part of the basis.
    pub fn center(&self) -> C64 {
        self.center
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn is_polygonal(&self) -> bool {
        self.polygonal
    }

    /// Minimum of the two incident arc lengths; scales the pole cluster.
    pub fn local_scale(&self, corner: usize) -> f64 {
        let m = self.arcs.len();
        self.arcs[(corner + m - 1) % m]
            .length
            .min(self.arcs[corner].length)
    }

    pub fn bounding_box(&self) -> (C64, C64) {
        let mut lo = C64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for arc in &self.arcs {
            for i in 0..=24 {
                let p = arc.point(i as f64 / 24.0);
                lo.re = lo.re.min(p.re);
                lo.im = lo.im.min(p.im);
                hi.re = hi.re.max(p.re);
                hi.im = hi.im.max(p.im);
            }
        }
        (lo, hi)
    }

    /// Shortest distance from `z` to the boundary.
    pub fn distance_to_boundary(&self, z: C64) -> f64 {
        self.arcs
            .iter()
            .map(|arc| arc.distance(z))
            .fold(f64::INFINITY, f64::min)
    }

    /// Strict interior test. Points within `BOUNDARY_TOL * diameter` of the
    /// boundary report false.
    pub fn contains(&self, z: C64) -> bool {
        if !z.re.is_finite() || !z.im.is_finite() {
            return false;
        }
        if self.distance_to_boundary(z) <= BOUNDARY_TOL * self.diameter {
            return false;
        }
        if self.polygonal {
            self.winding_number(z) != 0
        } else {
            // Parity of ray crossings; retry directions on degenerate hits.
            const GOLDEN: f64 = 2.399963229728653;
            for k in 0..16 {
                let dir = C64::from_polar(1.0, k as f64 * GOLDEN);
                if let Some(n) = self.ray_crossings(z, dir) {
                    return n % 2 == 1;
                }
            }
            // Every probe direction hit a corner or tangency; treat as
            // boundary-adjacent.
            false
        }
    }

    fn winding_number(&self, z: C64) -> i32 {
        let mut wn = 0;
        for arc in &self.arcs {
            let (p, q) = (arc.start, arc.end);
            let cross = (q.re - p.re) * (z.im - p.im) - (q.im - p.im) * (z.re - p.re);
            if p.im <= z.im {
                if q.im > z.im && cross > 0.0 {
                    wn += 1;
                }
            } else if q.im <= z.im && cross < 0.0 {
                wn -= 1;
            }
        }
        wn
    }

    fn ray_crossings(&self, z: C64, dir: C64) -> Option<usize> {
        let tol = 1e-12 * self.diameter;
        let margin = 1e-10;
        let u = dir.conj();
        let mut count = 0usize;
        for arc in &self.arcs {
            match arc.kind {
                ArcKind::Line => {
                    let a = (arc.start - z) * u;
                    let b = (arc.end - z) * u;
                    if a.im.abs() <= tol || b.im.abs() <= tol {
                        return None;
                    }
                    if (a.im > 0.0) != (b.im > 0.0) {
                        let x = a.re + (0.0 - a.im) * (b.re - a.re) / (b.im - a.im);
                        if x.abs() <= tol {
                            return None;
                        }
                        if x > 0.0 {
                            count += 1;
                        }
                    }
                }
                ArcKind::Circular {
                    center,
                    radius,
                    start_angle,
                    sweep,
                } => {
                    let c = (center - z) * u;
                    if (radius - c.im.abs()).abs() <= tol {
                        return None;
                    }
                    if c.im.abs() > radius {
                        continue;
                    }
                    let dx = (radius * radius - c.im * c.im).sqrt();
                    let theta0 = start_angle - dir.arg();
                    for x in [c.re - dx, c.re + dx] {
                        if x.abs() <= tol {
                            return None;
                        }
                        let psi = (C64::new(x, 0.0) - c).arg();
                        let rel = wrap_angle(psi - theta0, sweep);
                        let end_d = (rel - sweep).abs().min(rel.abs());
                        if end_d <= margin || (rel.abs() - sweep.abs()).abs() <= margin {
                            return None;
                        }
                        if x > 0.0 && in_sweep(rel, sweep) {
                            count += 1;
                        }
                    }
                }
                ArcKind::Elliptic {
                    center,
                    semi_major,
                    semi_minor,
                    rotation,
                    start_param,
                    sweep,
                } => {
                    let c = (center - z) * u;
                    let rot = rotation - dir.arg();
                    let a_c = semi_major * rot.sin();
                    let b_c = semi_minor * rot.cos();
                    let r = a_c.hypot(b_c);
                    let rhs = -c.im;
                    if (r - rhs.abs()).abs() <= tol.max(1e-12 * r) {
                        return None;
                    }
                    if rhs.abs() > r {
                        continue;
                    }
                    let gamma = b_c.atan2(a_c);
                    let delta = (rhs / r).clamp(-1.0, 1.0).acos();
                    for psi in [gamma + delta, gamma - delta] {
                        let x = semi_major * psi.cos() * rot.cos()
                            - semi_minor * psi.sin() * rot.sin()
                            + c.re;
                        if x.abs() <= tol {
                            return None;
                        }
                        let rel = wrap_angle(psi - start_param, sweep);
                        let end_d = (rel - sweep).abs().min(rel.abs());
                        if end_d <= margin || (rel.abs() - sweep.abs()).abs() <= margin {
                            return None;
                        }
                        if x > 0.0 && in_sweep(rel, sweep) {
                            count += 1;
                        }
                    }
                }
            }
        }
        Some(count)
    }

    /// Pick the polynomial expansion point: the corner centroid when it is
    /// interior, otherwise the best point of a 64x64 bounding-box grid,
    /// judged by clearance from the boundary.
    pub fn choose_center(&self) -> Result<C64> {
        let centroid = self.corners.iter().map(|c| c.position).sum::<C64>()
            / self.corners.len() as f64;
        if self.contains_raw(centroid) {
            return Ok(centroid);
        }
        let (lo, hi) = self.bounding_box();
        let mut best: Option<(f64, C64)> = None;
        const G: usize = 64;
        for i in 0..G {
            for j in 0..G {
                let p = C64::new(
                    lo.re + (i as f64 + 0.5) / G as f64 * (hi.re - lo.re),
                    lo.im + (j as f64 + 0.5) / G as f64 * (hi.im - lo.im),
                );
                if self.contains_raw(p) {
                    let d = self.distance_to_boundary(p);
                    if best.map_or(true, |(bd, _)| d > bd) {
                        best = Some((d, p));
                    }
                }
            }
        }
        best.map(|(_, p)| p)
            .ok_or_else(|| Error::Geometry("no interior grid point found".into()))
    }

    // contains() before `center` is initialized (used by choose_center).
    fn contains_raw(&self, z: C64) -> bool {
        if self.distance_to_boundary(z) <= BOUNDARY_TOL * self.diameter {
            return false;
        }
        if self.polygonal {
            self.winding_number(z) != 0
        } else {
            const GOLDEN: f64 = 2.399963229728653;
            for k in 0..16 {
                let dir = C64::from_polar(1.0, k as f64 * GOLDEN);
                if let Some(n) = self.ray_crossings(z, dir) {
                    return n % 2 == 1;
                }
            }
            false
        }
    }

    /// Walk a distance `dist` along the boundary away from corner `k`.
    /// Returns None when the walk leaves the incident arc.
    pub fn walk_from_corner(&self, k: usize, side: Side, dist: f64) -> Option<BoundaryPoint> {
        let m = self.arcs.len();
        let (idx, s) = match side {
            Side::Next => (k, dist),
            Side::Prev => {
                let idx = (k + m - 1) % m;
                (idx, self.arcs[idx].length - dist)
            }
        };
        let arc = &self.arcs[idx];
        if dist < 0.0 || dist > arc.length {
            return None;
        }
        let t = arc.t_at_arclength(s).clamp(0.0, 1.0);
        Some(BoundaryPoint {
            arc: idx,
            t,
            position: arc.point(t),
        })
    }

    /// Position at arc length `dist` from corner `k` along the chosen side.
    pub fn point_at_arclength(&self, k: usize, side: Side, dist: f64) -> Option<C64> {
        self.walk_from_corner(k, side, dist).map(|p| p.position)
    }

    /// Evenly spread boundary points, `per_arc` on each arc (corner
    /// positions excluded).
    pub fn boundary_samples(&self, per_arc: usize) -> Vec<BoundaryPoint> {
        let mut out = Vec::with_capacity(per_arc * self.arcs.len());
        for (idx, arc) in self.arcs.iter().enumerate() {
            for i in 0..per_arc {
                let t = (i as f64 + 1.0) / (per_arc as f64 + 1.0);
                out.push(BoundaryPoint {
                    arc: idx,
                    t,
                    position: arc.point(t),
                });
            }
        }
        out
    }

    /// Reverse the boundary orientation (used to normalize file input).
    pub fn reversed_corners(corners: &[C64]) -> Vec<C64> {
        let mut v = corners.to_vec();
        v.reverse();
        v
    }
}

impl BoundaryArc {
    // |dp/dt| relative to the unit tangent, for the shoelace quadrature.
    fn speed_hint(&self, t: f64) -> f64 {
        match self.kind {
            ArcKind::Line => self.length,
            ArcKind::Circular { radius, sweep, .. } => radius * sweep.abs(),
            ArcKind::Elliptic {
                semi_major,
                semi_minor,
                start_param,
                sweep,
                ..
            } => {
                let psi = start_param + t * sweep;
                sweep.abs() * (semi_major * psi.sin()).hypot(semi_minor * psi.cos())
            }
        }
    }
}

fn check_simple(verts: &[C64], scale: f64) -> Result<()> {
    let m = verts.len();
    let tol = 1e-12 * scale;
    for i in 0..m {
        let (a1, a2) = (verts[i], verts[(i + 1) % m]);
        for j in i + 1..m {
            if j == i || (j + 1) % m == i || (i + 1) % m == j {
                continue;
            }
            let (b1, b2) = (verts[j], verts[(j + 1) % m]);
            if segments_touch(a1, a2, b1, b2, tol) {
                return Err(Error::Geometry(format!(
                    "edges {}-{} and {}-{} intersect",
                    i,
                    (i + 1) % m,
                    j,
                    (j + 1) % m
                )));
            }
        }
    }
    Ok(())
}

fn segments_touch(a1: C64, a2: C64, b1: C64, b2: C64, tol: f64) -> bool {
    let cross = |o: C64, p: C64, q: C64| (p.re - o.re) * (q.im - o.im) - (p.im - o.im) * (q.re - o.re);
    let d1 = cross(b1, b2, a1);
    let d2 = cross(b1, b2, a2);
    let d3 = cross(a1, a2, b1);
    let d4 = cross(a1, a2, b2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on_seg = |p: C64, q: C64, x: C64| -> bool {
        let d = q - p;
        let len2 = d.norm_sqr();
        let t = ((x - p).re * d.re + (x - p).im * d.im) / len2;
        let t = t.clamp(0.0, 1.0);
        (x - (p + t * d)).norm() <= tol
    };
    on_seg(b1, b2, a1) || on_seg(b1, b2, a2) || on_seg(a1, a2, b1) || on_seg(a1, a2, b2)
}
