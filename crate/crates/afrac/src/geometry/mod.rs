//! Domains: membership, distance to the boundary, boundary polylines.
//!
//! All domains answer `contains` (open-set membership) and
//! `dist_to_boundary` (unsigned distance to ∂Ω, valid inside and outside).
//! Variants:
//!
//! * [`Domain::Ball`], [`Domain::ConvexPolygon`], [`Domain::Stadium`] —
//!   analytic distances;
//! * [`Domain::GraphPatch`] — a C^{1,1} boundary graph patch used by the
//!   inner-ball and level-set operations;
//! * [`Domain::Cusp`] — B_R ∪ {|y| < R e^{−|x|/R}}, the exponentially
//!   pinching domain on which the convex boundary-band bound fails;
//! * [`Domain::Counterexample`] — a smooth non-convex domain containing the
//!   unit-scale flat boundary segment used by the regularity-gap experiment.

mod band;
mod contour;
mod counterexample;
mod cusp;
mod graph_patch;
mod point;

pub use band::{
    band_measure, level_set_lipschitz_probe, BandMeasure, ANNULUS_RATIO_CAL, BAND_AREA_CAL,
};
pub use counterexample::CounterexampleDomain;
pub use graph_patch::{inner_sphere_center, verify_inner_ball, GraphPatch};
pub use point::{clipped_length_in_annulus, dist_to_segment, pt, Point, Polyline};

use rand::Rng;

use crate::{Error, Result};

/// A planar domain Ω with membership and boundary-distance oracles.
#[derive(Debug, Clone)]
pub enum Domain {
    /// Open disc of the given center and radius.
    Ball { center: Point, radius: f64 },
    /// Strictly convex polygon, vertices counterclockwise.
    ConvexPolygon { vertices: Vec<Point> },
    /// Neighborhood of a segment: {dist to [(-L,0),(L,0)] < radius}.
    /// Convex with C^{1,1} boundary; useful where corners are disallowed.
    Stadium { half_length: f64, radius: f64 },
    /// C^{1,1} graph patch {x_n > h(x′)} ∩ B_{2κ}.
    GraphPatch(GraphPatch),
    /// B_R ∪ {|y| < R e^{−|x|/R}}: an exponentially sharp cusp pair.
    Cusp { scale: f64 },
    /// Smooth non-convex domain with a flat boundary segment [−8,−6]×{0}.
    Counterexample(CounterexampleDomain),
}

impl Domain {
    /// Validating ball constructor.
    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!("ball radius {radius} must be > 0")));
        }
        Ok(Domain::Ball { center, radius })
    }

    /// Validating polygon constructor: requires ≥ 3 vertices, strictly
    /// convex, counterclockwise.
    pub fn convex_polygon(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "polygon needs ≥ 3 vertices, got {}",
                vertices.len()
            )));
        }
        let n = vertices.len();
        let scale: f64 = vertices.iter().map(|p| p.norm()).fold(0.0, f64::max).max(1.0);
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let cross = (b - a).cross(c - b);
            if cross <= 1e-12 * scale * scale {
                return Err(Error::Precondition(format!(
                    "polygon is not strictly convex/counterclockwise at vertex {}",
                    (i + 1) % n
                )));
            }
        }
        Ok(Domain::ConvexPolygon { vertices })
    }

    /// Validating stadium constructor.
    pub fn stadium(half_length: f64, radius: f64) -> Result<Self> {
        if !(half_length >= 0.0) || !(radius > 0.0) {
            return Err(Error::InvalidParameter(
                "stadium needs half_length ≥ 0 and radius > 0".into(),
            ));
        }
        Ok(Domain::Stadium { half_length, radius })
    }

    /// Cusp domain of the given scale R.
    pub fn cusp(scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!("cusp scale {scale} must be > 0")));
        }
        Ok(Domain::Cusp { scale })
    }

    /// The non-convex counterexample domain with smoothing radius `eps_geom`.
    pub fn counterexample(eps_geom: f64) -> Result<Self> {
        Ok(Domain::Counterexample(CounterexampleDomain::new(eps_geom)?))
    }

    /// Parses the config literal:
    /// `ball(cx, cy, r)` | `polygon((x,y),...)` | `counterexample(eps_geom)`
    /// | `cusp(R)` | `stadium(half_length, radius)`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let (name, args) = split_call(t)?;
        match name {
            "ball" => {
                let v = parse_numbers(args)?;
                if v.len() != 3 {
                    return Err(Error::Config(format!(
                        "ball(cx, cy, r) takes 3 numbers, got {}",
                        v.len()
                    )));
                }
                Domain::ball(pt(v[0], v[1]), v[2])
            }
            "polygon" => {
                let tuples = crate::measure::parse_tuple_list(&format!("[{args}]"))?;
                let mut vertices = Vec::with_capacity(tuples.len());
                for tup in tuples {
                    if tup.len() != 2 {
                        return Err(Error::Config("polygon vertices are (x, y) pairs".into()));
                    }
                    vertices.push(pt(tup[0], tup[1]));
                }
                Domain::convex_polygon(vertices)
            }
            "counterexample" => {
                let v = parse_numbers(args)?;
                if v.len() != 1 {
                    return Err(Error::Config("counterexample(eps_geom) takes 1 number".into()));
                }
                Domain::counterexample(v[0])
            }
            "cusp" => {
                let v = parse_numbers(args)?;
                if v.len() != 1 {
                    return Err(Error::Config("cusp(R) takes 1 number".into()));
                }
                Domain::cusp(v[0])
            }
            "stadium" => {
                let v = parse_numbers(args)?;
                if v.len() != 2 {
                    return Err(Error::Config("stadium(half_length, radius) takes 2 numbers".into()));
                }
                Domain::stadium(v[0], v[1])
            }
            other => Err(Error::Config(format!("unknown domain literal `{other}`"))),
        }
    }

    /// Open-set membership.
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Domain::Ball { center, radius } => p.dist(*center) < *radius,
            Domain::ConvexPolygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|i| {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    (b - a).cross(p - a) > 0.0
                })
            }
            Domain::Stadium { half_length, radius } => {
                dist_to_segment(p, pt(-half_length, 0.0), pt(*half_length, 0.0)) < *radius
            }
            Domain::GraphPatch(g) => g.contains(p),
            Domain::Cusp { scale } => {
                let r = *scale;
                p.norm() < r || p.y.abs() < r * (-p.x.abs() / r).exp()
            }
            Domain::Counterexample(c) => c.phi(p) < 0.0,
        }
    }

    /// Unsigned distance to ∂Ω (valid from either side).
    pub fn dist_to_boundary(&self, p: Point) -> f64 {
        match self {
            Domain::Ball { center, radius } => (p.dist(*center) - radius).abs(),
            Domain::ConvexPolygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| dist_to_segment(p, vertices[i], vertices[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
            Domain::Stadium { half_length, radius } => {
                (dist_to_segment(p, pt(-half_length, 0.0), pt(*half_length, 0.0)) - radius).abs()
            }
            Domain::GraphPatch(g) => g.dist_to_boundary(p),
            Domain::Cusp { scale } => cusp::dist_to_boundary(*scale, p),
            Domain::Counterexample(c) => c.dist_to_boundary(p),
        }
    }

    /// Negative inside, positive outside.
    pub fn signed_distance(&self, p: Point) -> f64 {
        let d = self.dist_to_boundary(p);
        if self.contains(p) {
            -d
        } else {
            d
        }
    }

    /// Whether the variant is convex.
    pub fn is_convex(&self) -> bool {
        matches!(
            self,
            Domain::Ball { .. } | Domain::ConvexPolygon { .. } | Domain::Stadium { .. }
        )
    }

    /// Axis-aligned bounding box (min corner, max corner).  For the cusp the
    /// box covers the domain up to the export truncation of its tails.
    pub fn bbox(&self) -> (Point, Point) {
        match self {
            Domain::Ball { center, radius } => (
                pt(center.x - radius, center.y - radius),
                pt(center.x + radius, center.y + radius),
            ),
            Domain::ConvexPolygon { vertices } => {
                let mut lo = pt(f64::INFINITY, f64::INFINITY);
                let mut hi = pt(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for v in vertices {
                    lo = pt(lo.x.min(v.x), lo.y.min(v.y));
                    hi = pt(hi.x.max(v.x), hi.y.max(v.y));
                }
                (lo, hi)
            }
            Domain::Stadium { half_length, radius } => (
                pt(-half_length - radius, -radius),
                pt(half_length + radius, *radius),
            ),
            Domain::GraphPatch(g) => g.bbox(),
            Domain::Cusp { scale } => {
                let xt = cusp::truncation_x(*scale);
                (pt(-xt, -scale), pt(xt, *scale))
            }
            Domain::Counterexample(c) => c.bbox(),
        }
    }

    /// Radius of a ball about the origin containing the domain (the
    /// truncated tails for the cusp variant).
    pub fn bounding_radius(&self) -> f64 {
        let (lo, hi) = self.bbox();
        [lo, hi, pt(lo.x, hi.y), pt(hi.x, lo.y)]
            .iter()
            .map(|p| p.norm())
            .fold(0.0, f64::max)
    }

    /// Dense boundary polyline(s) with segments no longer than
    /// `target_segment` where the parametrization allows it.  Closed loops
    /// for bounded variants; the cusp tails are open curves truncated where
    /// the width falls below 1e−9·R.
    pub fn boundary_polyline(&self, target_segment: f64) -> Vec<Polyline> {
        let seg = target_segment.max(1e-6);
        match self {
            Domain::Ball { center, radius } => {
                let n = ((2.0 * std::f64::consts::PI * radius / seg).ceil() as usize).max(64);
                let pts = (0..n)
                    .map(|i| {
                        let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                        *center + Point::unit(a) * *radius
                    })
                    .collect();
                vec![Polyline::closed(pts)]
            }
            Domain::ConvexPolygon { vertices } => {
                // Subdivide edges so annulus clipping sees enough vertices
                // (clipping itself is exact; this is only for uniformity).
                let mut pts = Vec::new();
                let n = vertices.len();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let steps = ((a.dist(b) / seg).ceil() as usize).max(1);
                    for k in 0..steps {
                        pts.push(a + (b - a) * (k as f64 / steps as f64));
                    }
                }
                vec![Polyline::closed(pts)]
            }
            Domain::Stadium { half_length, radius } => {
                let mut pts = Vec::new();
                let l = *half_length;
                let r = *radius;
                let arc_n = ((std::f64::consts::PI * r / seg).ceil() as usize).max(32);
                let side_n = ((2.0 * l / seg).ceil() as usize).max(1);
                // Bottom side left→right, right cap, top side right→left, left cap.
                for k in 0..side_n {
                    let t = k as f64 / side_n as f64;
                    pts.push(pt(-l + 2.0 * l * t, -r));
                }
                for k in 0..arc_n {
                    let a = -std::f64::consts::FRAC_PI_2
                        + std::f64::consts::PI * k as f64 / arc_n as f64;
                    pts.push(pt(l, 0.0) + Point::unit(a) * r);
                }
                for k in 0..side_n {
                    let t = k as f64 / side_n as f64;
                    pts.push(pt(l - 2.0 * l * t, r));
                }
                for k in 0..arc_n {
                    let a = std::f64::consts::FRAC_PI_2
                        + std::f64::consts::PI * k as f64 / arc_n as f64;
                    pts.push(pt(-l, 0.0) + Point::unit(a) * r);
                }
                vec![Polyline::closed(pts)]
            }
            Domain::GraphPatch(g) => g.boundary_polyline(seg),
            Domain::Cusp { scale } => cusp::boundary_polyline(*scale, seg),
            Domain::Counterexample(c) => vec![Polyline::closed(c.boundary_points().to_vec())],
        }
    }

    /// Total boundary arc length inside the annulus R ≤ |x| ≤ 8R about the
    /// origin, to relative accuracy ~1e−4 (chord error of a dense polyline;
    /// the clipping itself is exact).
    pub fn annulus_boundary_area(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("annulus radius {r} must be > 0")));
        }
        let seg = (r * 2e-3).min(self.bounding_radius() * 1e-3).max(1e-9);
        let poly = self.boundary_polyline(seg);
        Ok(clipped_length_in_annulus(&poly, Point::ORIGIN, r, 8.0 * r))
    }

    /// A uniform random point of Ω with `dist_to_boundary ≥ min_dist`
    /// (rejection sampling from the bounding box).
    pub fn random_interior_point<R: Rng>(&self, rng: &mut R, min_dist: f64) -> Result<Point> {
        let (lo, hi) = self.bbox();
        for _ in 0..100_000 {
            let p = pt(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
            if self.contains(p) && self.dist_to_boundary(p) >= min_dist {
                return Ok(p);
            }
        }
        Err(Error::Precondition(format!(
            "no interior point with clearance {min_dist} found by rejection sampling"
        )))
    }
}

/// The joint distance d(x, y) = min(d(x), d(y)).
pub fn joint_distance(dom: &Domain, x: Point, y: Point) -> f64 {
    dom.dist_to_boundary(x).min(dom.dist_to_boundary(y))
}

/// A random strictly convex polygon: convex hull of `n_pts` uniform points
/// in the disc of radius `radius` about `center` (resampled until the hull
/// is strictly convex with ≥ 3 vertices).
pub fn random_convex_polygon<R: Rng>(
    rng: &mut R,
    n_pts: usize,
    center: Point,
    radius: f64,
) -> Result<Domain> {
    assert!(n_pts >= 3, "need at least 3 sample points");
    for _ in 0..64 {
        let pts: Vec<Point> = (0..n_pts)
            .map(|_| {
                let r = radius * rng.gen::<f64>().sqrt();
                let a = rng.gen::<f64>() * std::f64::consts::TAU;
                center + Point::unit(a) * r
            })
            .collect();
        let hull = convex_hull(&pts);
        if hull.len() >= 3 {
            if let Ok(dom) = Domain::convex_polygon(hull) {
                return Ok(dom);
            }
        }
    }
    Err(Error::Precondition("failed to generate a strictly convex hull".into()))
}

/// Andrew's monotone-chain convex hull (counterclockwise, strict turns).
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.dist(*b) < 1e-12);
    let n = pts.len();
    if n < 3 {
        return pts;
    }
    let scale: f64 = pts.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let strict = 1e-10 * scale * scale;
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 {
            let a = lower[lower.len() - 2];
            let b = lower[lower.len() - 1];
            if (b - a).cross(p - b) <= strict {
                lower.pop();
            } else {
                break;
            }
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 {
            let a = upper[upper.len() - 2];
            let b = upper[upper.len() - 1];
            if (b - a).cross(p - b) <= strict {
                upper.pop();
            } else {
                break;
            }
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn split_call(text: &str) -> Result<(&str, &str)> {
    let open = text
        .find('(')
        .ok_or_else(|| Error::Config(format!("expected name(args), got `{text}`")))?;
    let close = text
        .rfind(')')
        .ok_or_else(|| Error::Config(format!("missing `)` in `{text}`")))?;
    if close != text.len() - 1 || close < open {
        return Err(Error::Config(format!("malformed call `{text}`")));
    }
    Ok((text[..open].trim(), &text[open + 1..close]))
}

fn parse_numbers(args: &str) -> Result<Vec<f64>> {
    args.split(',')
        .map(|a| {
            a.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("`{}` is not a number", a.trim())))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_square() -> Domain {
        Domain::convex_polygon(vec![
            pt(0.0, 0.0),
            pt(1.0, 0.0),
            pt(1.0, 1.0),
            pt(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn ball_distances_match_formulas() {
        let b = Domain::ball(Point::ORIGIN, 3.0).unwrap();
        assert_relative_eq!(b.dist_to_boundary(Point::ORIGIN), 3.0);
        // On a ray at radius ρ < 3R: d = 3R − ρ.
        let p = Point::unit(0.7) * 1.2;
        assert_relative_eq!(b.dist_to_boundary(p), 3.0 - 1.2, max_relative = 1e-14);
        assert_relative_eq!(b.dist_to_boundary(Point::unit(2.0) * 5.0), 2.0);
    }

    #[test]
    fn square_distance_is_nearest_edge() {
        let sq = unit_square();
        assert_relative_eq!(sq.dist_to_boundary(pt(0.5, 0.25)), 0.25);
        assert!(sq.contains(pt(0.5, 0.25)));
        assert!(!sq.contains(pt(1.5, 0.25)));
        assert_relative_eq!(sq.dist_to_boundary(pt(2.0, 0.5)), 1.0);
    }

    #[test]
    fn joint_distance_examples() {
        let b1 = Domain::ball(Point::ORIGIN, 1.0).unwrap();
        assert_relative_eq!(joint_distance(&b1, Point::ORIGIN, pt(0.5, 0.0)), 0.5);
        let p = pt(0.3, 0.2);
        assert_relative_eq!(
            joint_distance(&b1, p, p),
            b1.dist_to_boundary(p),
            max_relative = 1e-15
        );
        let b3 = Domain::ball(Point::ORIGIN, 3.0).unwrap();
        assert_relative_eq!(joint_distance(&b3, pt(1.0, 0.0), pt(2.0, 0.0)), 1.0);
    }

    #[test]
    fn non_convex_vertex_lists_are_rejected() {
        let bad = Domain::convex_polygon(vec![
            pt(0.0, 0.0),
            pt(2.0, 0.0),
            pt(1.0, 0.5),
            pt(2.0, 1.0),
            pt(0.0, 1.0),
        ]);
        assert!(bad.is_err());
        // Clockwise orientation is also rejected.
        let cw = Domain::convex_polygon(vec![pt(0.0, 0.0), pt(0.0, 1.0), pt(1.0, 0.0)]);
        assert!(cw.is_err());
    }

    #[test]
    fn domain_literals_parse() {
        assert!(matches!(Domain::parse("ball(0, 0, 1)").unwrap(), Domain::Ball { .. }));
        assert!(matches!(
            Domain::parse("polygon((0,0), (1,0), (0.5, 2))").unwrap(),
            Domain::ConvexPolygon { .. }
        ));
        assert!(matches!(Domain::parse("cusp(1)").unwrap(), Domain::Cusp { .. }));
        assert!(matches!(
            Domain::parse("counterexample(0.05)").unwrap(),
            Domain::Counterexample(_)
        ));
        assert!(Domain::parse("pentagon(1,2)").is_err());
        assert!(Domain::parse("ball(0,0)").is_err());
        assert!(Domain::parse("ball(0,0,abc)").is_err());
    }

    #[test]
    fn dist_is_one_lipschitz_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let domains = vec![
            Domain::ball(pt(0.3, -0.2), 1.7).unwrap(),
            unit_square(),
            Domain::stadium(2.0, 0.7).unwrap(),
            random_convex_polygon(&mut rng, 12, Point::ORIGIN, 3.0).unwrap(),
        ];
        for dom in &domains {
            for _ in 0..2500 {
                let p = pt(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
                let q = pt(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
                let dd = (dom.dist_to_boundary(p) - dom.dist_to_boundary(q)).abs();
                assert!(dd <= p.dist(q) + 1e-9, "Lipschitz violated: {dd} vs {}", p.dist(q));
            }
        }
    }

    #[test]
    fn contains_and_distance_are_consistent_off_the_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let domains = vec![
            Domain::ball(pt(0.0, 0.0), 2.0).unwrap(),
            unit_square(),
            Domain::stadium(1.0, 0.5).unwrap(),
        ];
        for dom in &domains {
            for _ in 0..4000 {
                let p = pt(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                let d = dom.dist_to_boundary(p);
                if d > 1e-9 {
                    // Strictly positive distance ⇒ membership is decisive.
                    let inside = dom.contains(p);
                    let sd = dom.signed_distance(p);
                    assert_eq!(sd < 0.0, inside);
                }
            }
        }
    }

    #[test]
    fn annulus_boundary_area_of_circles() {
        let b = Domain::ball(Point::ORIGIN, 3.0).unwrap();
        // R=1: the full circle lies in 1 ≤ |x| ≤ 8.
        let len = b.annulus_boundary_area(1.0).unwrap();
        assert_relative_eq!(len, 6.0 * std::f64::consts::PI, max_relative = 1e-4);
        // R=4: the circle is inside the hole.
        let len = b.annulus_boundary_area(4.0).unwrap();
        assert_eq!(len, 0.0);
    }

    #[test]
    fn random_polygons_are_strictly_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let dom = random_convex_polygon(&mut rng, 20, Point::ORIGIN, 5.0).unwrap();
            if let Domain::ConvexPolygon { vertices } = &dom {
                assert!(vertices.len() >= 3);
            } else {
                panic!("expected polygon");
            }
        }
    }

    #[test]
    fn bounding_radius_covers_boundary_samples() {
        let doms = vec![
            Domain::ball(pt(1.0, 1.0), 2.0).unwrap(),
            unit_square(),
            Domain::stadium(2.0, 1.0).unwrap(),
        ];
        for dom in doms {
            let rad = dom.bounding_radius();
            for pl in dom.boundary_polyline(0.05) {
                for p in &pl.points {
                    assert!(p.norm() <= rad + 1e-9);
                }
            }
        }
    }
}
