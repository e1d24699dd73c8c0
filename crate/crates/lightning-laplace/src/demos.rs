//! Benchmark domains: regular pentagon, L-shape, a Koch-style snowflake,
//! an isospectral drum, and seeded random polygons.

use crate::boundary::BoundarySpec;
use crate::error::{Error, Result};
use crate::geometry::{build_polygon, Domain};
use crate::C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub const DEMO_NAMES: [&str; 5] = ["pentagon", "lshape", "snowflake", "isospectral", "random"];

/// Regular pentagon of circumradius 1, one vertex straight up.
pub fn pentagon() -> Domain {
    let verts: Vec<C64> = (0..5)
        .map(|k| C64::from_polar(1.0, PI / 2.0 + 2.0 * PI * k as f64 / 5.0))
        .collect();
    build_polygon(&verts).expect("regular pentagon is simple")
}

/// The standard L: a 2x2 square minus its upper-right quadrant.
pub fn lshape() -> Domain {
    build_polygon(&[
        C64::new(0.0, 0.0),
        C64::new(2.0, 0.0),
        C64::new(2.0, 1.0),
        C64::new(1.0, 1.0),
        C64::new(1.0, 2.0),
        C64::new(0.0, 2.0),
    ])
    .expect("L-shape is simple")
}

/// Koch-style snowflake: an equilateral triangle with two rounds of
/// outward bumps, 48 vertices total (18 salient at 60 degrees, 30
/// reentrant at 240 degrees).
pub fn snowflake() -> Domain {
    let mut verts: Vec<C64> = [90.0f64, 210.0, 330.0]
        .iter()
        .map(|&deg| C64::from_polar(1.0, deg.to_radians()))
        .collect();
    for _ in 0..2 {
        let mut next = Vec::with_capacity(verts.len() * 4);
        for i in 0..verts.len() {
            let a = verts[i];
            let b = verts[(i + 1) % verts.len()];
            let step = (b - a) / 3.0;
            // Interior lies left of the CCW edge, so the bump apex goes
            // right: rotation by -60 degrees.
            let apex = a + step + step * C64::from_polar(1.0, -PI / 3.0);
            next.extend_from_slice(&[a, a + step, apex, a + 2.0 * step]);
        }
        verts = next;
    }
    build_polygon(&verts).expect("snowflake stays simple")
}

/// A seven-sided drum built from seven half-square triangles glued edge to
/// edge, the classic construction for a pair of domains that sound alike.
/// This is one standard member of that family, not a tracing of any
/// particular published figure.
pub fn isospectral() -> Domain {
    build_polygon(&[
        C64::new(1.0, 0.0),
        C64::new(2.0, 1.0),
        C64::new(-1.0, 1.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, -1.0),
        C64::new(1.0, -1.0),
    ])
    .expect("drum polygon is simple")
}

/// Random star-shaped polygon: m vertices at uniformly spaced angles with
/// radii drawn i.i.d. from U[0.5, 1.5]. Star-shaped about the origin, so
/// always simple.
pub fn random_polygon(m: usize, seed: u64) -> Result<Domain> {
    if m < 3 {
        return Err(Error::Geometry(format!(
            "a polygon needs at least 3 vertices, got {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let verts: Vec<C64> = (0..m)
        .map(|k| {
            let r = rng.random_range(0.5..1.5);
            C64::from_polar(r, 2.0 * PI * k as f64 / m as f64)
        })
        .collect();
    build_polygon(&verts)
}

/// Look up a demo domain by name. `m` and `seed` only matter for "random".
pub fn demo_domain(name: &str, m: usize, seed: u64) -> Result<Domain> {
    match name {
        "pentagon" => Ok(pentagon()),
        "lshape" => Ok(lshape()),
        "snowflake" => Ok(snowflake()),
        "isospectral" => Ok(isospectral()),
        "random" => random_polygon(m, seed),
        other => Err(Error::Geometry(format!(
            "unknown demo \"{other}\"; expected one of {}",
            DEMO_NAMES.join(", ")
        ))),
    }
}

/// The demo boundary data: independent smooth random series per side,
/// wavelength half the side length, vanishing at the corners.
pub fn demo_boundary(domain: &Domain, seed: u64) -> Result<BoundarySpec> {
    BoundarySpec::random_smooth(domain, seed, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pentagon_has_five_salient_corners() {
        let d = pentagon();
        assert_eq!(d.corner_count(), 5);
        for c in d.corners() {
            assert!(c.salient);
            assert_relative_eq!(c.interior_angle, 3.0 * PI / 5.0, max_relative = 1e-12);
        }
        assert!(d.contains(C64::new(0.0, 0.0)));
    }

    #[test]
    fn snowflake_angle_census() {
        let d = snowflake();
        assert_eq!(d.corner_count(), 48);
        let salient = d.corners().iter().filter(|c| c.salient).count();
        assert_eq!(salient, 18);
        for c in d.corners() {
            let deg = c.interior_angle.to_degrees();
            assert!(
                (deg - 60.0).abs() < 1e-9 || (deg - 240.0).abs() < 1e-9,
                "unexpected angle {deg}"
            );
        }
        // Perimeter of a scaled Koch iteration: 9 * side / ... just check
        // total length grew by (4/3)^2 over the triangle.
        let side = (d.corners()[0].position - d.corners()[4].position).norm();
        let total: f64 = d.arcs().iter().map(|a| a.length()).sum();
        let triangle_side = 3f64.sqrt();
        assert_relative_eq!(
            total,
            3.0 * triangle_side * 16.0 / 9.0,
            max_relative = 1e-12
        );
        assert!(side > 0.0);
    }

    #[test]
    fn drum_shape_checks_out() {
        let d = isospectral();
        assert_eq!(d.corner_count(), 7);
        let reentrant = d.corners().iter().filter(|c| !c.salient).count();
        assert_eq!(reentrant, 2);
        // Area from the shoelace formula: 7 half-unit triangles.
        let verts: Vec<C64> = d.corners().iter().map(|c| c.position).collect();
        let mut area = 0.0;
        for i in 0..verts.len() {
            let a = verts[i];
            let b = verts[(i + 1) % verts.len()];
            area += a.re * b.im - b.re * a.im;
        }
        assert_relative_eq!(area / 2.0, 3.5, max_relative = 1e-14);
    }

    #[test]
    fn random_polygons_are_seeded_and_bounded() {
        let a = random_polygon(10, 1).unwrap();
        let b = random_polygon(10, 1).unwrap();
        for (ca, cb) in a.corners().iter().zip(b.corners()) {
            assert_eq!(ca.position, cb.position);
        }
        let c = random_polygon(10, 2).unwrap();
        assert!(a
            .corners()
            .iter()
            .zip(c.corners())
            .any(|(x, y)| x.position != y.position));
        for corner in a.corners() {
            let r = corner.position.norm();
            assert!((0.5..=1.5).contains(&r));
        }
        assert!(random_polygon(2, 0).is_err());
        assert!(demo_domain("nope", 3, 0).is_err());
    }

    #[test]
    fn demo_boundary_is_continuous_everywhere() {
        for name in ["pentagon", "lshape", "isospectral"] {
            let d = demo_domain(name, 6, 0).unwrap();
            let data = demo_boundary(&d, 11).unwrap();
            assert!(data.continuous(), "{name} data discontinuous");
        }
    }
}
