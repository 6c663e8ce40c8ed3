//! The smooth non-convex domain with a flat boundary segment.
//!
//! The domain is the smooth union of the ball B₄ and a left "finger" lobe
//! whose top boundary contains the straight segment [−8, −6] × {0}, with the
//! lobe interior lying strictly below that segment.  Structural facts the
//! regularity-gap experiment depends on (all exercised by tests):
//!
//! * (i) B₄ ⊂ Ω and (vii) Ω ⊂ B₂₀;
//! * (ii) every (ρ, 0), ρ ∈ [−8, −6], lies on ∂Ω, with (ρ, −t) interior for
//!   0 < t < 0.1;
//! * (iii) the slice Ω ∩ {x₁ = 0} is exactly {0} × (−4, 4);
//! * (iv) (ρ, 0) is interior for ρ ∈ (−6, 4);
//! * (v) points (ρ, 0) with ρ < −8 are strictly outside (the lobe's top
//!   dives below the axis immediately left of −8, with infinitely flat,
//!   C^∞ contact at (−8, 0));
//! * (vi) an interior ball of radius 1/2 is tangent to ∂Ω at every point of
//!   the flat segment.
//!
//! The level-set function is assembled from C^∞ profiles built on the
//! exp(−1/u) mollifier step, combined with log-sum-exp smooth min/max.  The
//! smooth combiners fall back to the exact min/max once the arguments are
//! separated by 30 smoothing radii (the discarded correction is below f64
//! resolution there), which makes the invariants above hold *exactly* in
//! floating point: near the flat segment the level-set value is literally
//! `x₂`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::contour::trace_zero_contour;
use super::point::{dist_to_segment, pt, Point};
use crate::{Error, Result};

/// Radius of the main ball.
const BALL_R: f64 = 4.0;
/// The lobe is clipped to x ≤ CLIP_X (the clip corners lie inside the ball).
const CLIP_X: f64 = -3.5;
/// Smoothing radius of the lobe's top/bottom intersection (the thin end of
/// the finger); small so the flat segment and tangency zone stay exact.
const EPS_TIP: f64 = 0.02;
/// Beyond this many smoothing radii the smooth min/max fall back to the
/// exact operations (the discarded term is ≤ ε e⁻³⁰ ≈ 1e−15 ε).
const LSE_CUTOFF: f64 = 30.0;

/// Smooth non-convex domain containing the flat segment [−8,−6]×{0} ⊂ ∂Ω.
#[derive(Debug, Clone)]
pub struct CounterexampleDomain {
    eps_geom: f64,
    boundary: OnceLock<Arc<Vec<Point>>>,
}

/// C^∞ bump kernel σ(u) = exp(−1/u) for u > 0, 0 otherwise.
fn sigma(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// C^∞ step: 0 for t ≤ 0, 1 for t ≥ 1, strictly increasing between.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = sigma(t);
        a / (a + sigma(1.0 - t))
    }
}

/// Smooth minimum (log-sum-exp), exact min once |a−b| ≥ 30ε.
fn smooth_min(a: f64, b: f64, eps: f64) -> f64 {
    let d = (a - b).abs();
    if d >= LSE_CUTOFF * eps {
        a.min(b)
    } else {
        a.min(b) - eps * (-d / eps).exp().ln_1p()
    }
}

/// Smooth maximum (log-sum-exp), exact max once |a−b| ≥ 30ε.
fn smooth_max(a: f64, b: f64, eps: f64) -> f64 {
    let d = (a - b).abs();
    if d >= LSE_CUTOFF * eps {
        a.max(b)
    } else {
        a.max(b) + eps * (-d / eps).exp().ln_1p()
    }
}

/// Top boundary profile of the lobe.
///
/// ≡ 0 on [−8, −6] (the flat segment), dives to −0.9 with infinitely flat
/// contact left of −8, rises to +0.5 on [−6, −5] so the axis becomes
/// interior right of −6 and the lobe merges into the ball.
fn top_profile(x: f64) -> f64 {
    if x >= -6.0 {
        0.5 * smooth_step(x + 6.0)
    } else if x >= -8.0 {
        0.0
    } else {
        -0.9 * smooth_step((-8.0 - x) / 1.2)
    }
}

/// Depth of the lobe's bottom boundary (the lobe is −depth < y < top).
/// Rises from 0 at x = −9.4 to the plateau 1.3 at x = −8.6, so the lobe
/// pinches shut near x ≈ −8.93.
fn bottom_depth(x: f64) -> f64 {
    1.3 * smooth_step((x + 9.4) / 0.8)
}

impl CounterexampleDomain {
    /// Builds the domain with the given corner-smoothing radius (the radius
    /// used where the lobe meets the ball).  Calibrated for `eps_geom` in
    /// (0, 0.05].
    pub fn new(eps_geom: f64) -> Result<Self> {
        if !(eps_geom > 0.0 && eps_geom <= 0.05) {
            return Err(Error::InvalidParameter(format!(
                "counterexample smoothing radius must lie in (0, 0.05], got {eps_geom}"
            )));
        }
        Ok(CounterexampleDomain { eps_geom, boundary: OnceLock::new() })
    }

    pub fn eps_geom(&self) -> f64 {
        self.eps_geom
    }

    /// Level-set function: negative inside Ω, zero on ∂Ω, positive outside.
    pub fn phi(&self, p: Point) -> f64 {
        let phi_ball = p.norm() - BALL_R;
        let core = smooth_max(p.y - top_profile(p.x), -bottom_depth(p.x) - p.y, EPS_TIP);
        // Hard clip at the right end of the lobe: the clip plane meets the
        // lobe strictly inside the ball, so the kink never reaches ∂Ω.
        let phi_lobe = core.max(p.x - CLIP_X);
        smooth_min(phi_ball, phi_lobe, self.eps_geom)
    }

    /// Central-difference gradient of the level-set function.
    pub fn grad_phi(&self, p: Point) -> Point {
        let h = 1e-6;
        pt(
            (self.phi(pt(p.x + h, p.y)) - self.phi(pt(p.x - h, p.y))) / (2.0 * h),
            (self.phi(pt(p.x, p.y + h)) - self.phi(pt(p.x, p.y - h))) / (2.0 * h),
        )
    }

    /// Tight axis-aligned bounding box of Ω.
    pub fn bbox(&self) -> (Point, Point) {
        (pt(-9.05, -4.05), pt(4.05, 4.05))
    }

    /// Dense boundary polyline (one closed loop, vertices projected onto
    /// the zero level set; spacing ≈ 7e−3).  Cached per smoothing radius.
    pub fn boundary_points(&self) -> Arc<Vec<Point>> {
        self.boundary
            .get_or_init(|| {
                static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<Point>>>>> = OnceLock::new();
                let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
                let key = self.eps_geom.to_bits();
                if let Some(found) = cache.lock().unwrap().get(&key) {
                    return found.clone();
                }
                let traced = Arc::new(self.trace_boundary());
                cache.lock().unwrap().insert(key, traced.clone());
                traced
            })
            .clone()
    }

    fn trace_boundary(&self) -> Vec<Point> {
        // Box strictly containing ∂Ω, offset so no sampling row lands on
        // the flat segment's line y = 0 exactly.
        let lo = pt(-9.352, -4.361);
        let hi = pt(4.357, 4.352);
        let chains = trace_zero_contour(|p| self.phi(p), lo, hi, 2048, 1300);
        let mut main = chains
            .into_iter()
            .max_by_key(|c| c.len())
            .expect("counterexample boundary trace produced no contour");
        // The boundary is a single closed loop: drop the repeated endpoint.
        if main.len() > 2 && main[0].dist(*main.last().unwrap()) < 1e-9 {
            main.pop();
        }
        // Project each vertex onto the exact level set.
        for q in main.iter_mut() {
            *q = self.pull_to_level_set(*q);
        }
        main
    }

    /// Newton pull of a near-boundary point onto φ = 0.
    fn pull_to_level_set(&self, mut y: Point) -> Point {
        for _ in 0..6 {
            let f = self.phi(y);
            if f.abs() < 1e-13 {
                break;
            }
            let g = self.grad_phi(y);
            let g2 = g.norm_sq();
            if g2 < 1e-18 {
                break;
            }
            y = y - g * (f / g2);
        }
        y
    }

    /// Unsigned distance to ∂Ω: nearest point on the dense polyline,
    /// refined by a projected-gradient slide on the exact level set.
    pub fn dist_to_boundary(&self, p: Point) -> f64 {
        let boundary = self.boundary_points();
        let pts: &[Point] = &boundary;
        let n = pts.len();

        // Coarse scan, then exact segment distances in a window.
        let stride = 16.max(n / 512);
        let mut best_i = 0;
        let mut best_d = f64::INFINITY;
        let mut i = 0;
        while i < n {
            let d = p.dist(pts[i]);
            if d < best_d {
                best_d = d;
                best_i = i;
            }
            i += stride;
        }
        let window = 3 * stride;
        let mut poly_d = f64::INFINITY;
        for k in 0..(2 * window) {
            let idx = (best_i + n + k - window) % n;
            let a = pts[idx];
            let b = pts[(idx + 1) % n];
            let d = dist_to_segment(p, a, b);
            if d < poly_d {
                poly_d = d;
            }
        }

        // Slide the seed along ∂Ω toward the true foot of p.
        let mut y = self.pull_to_level_set(pts[best_i]);
        for _ in 0..40 {
            let g = self.grad_phi(y).normalized();
            let t = g.perp();
            let step = (p - y).dot(t);
            if step.abs() < 1e-13 {
                break;
            }
            y = self.pull_to_level_set(y + t * step.clamp(-0.05, 0.05) * 0.9);
        }
        let newton_d = if self.phi(y).abs() < 1e-9 { p.dist(y) } else { f64::INFINITY };
        poly_d.min(newton_d)
    }

    /// Exposed for structural tests: the lobe's top profile.
    #[cfg(test)]
    pub(crate) fn top(x: f64) -> f64 {
        top_profile(x)
    }

    /// Exposed for structural tests: the lobe's bottom depth.
    #[cfg(test)]
    pub(crate) fn depth(x: f64) -> f64 {
        bottom_depth(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn domain() -> CounterexampleDomain {
        CounterexampleDomain::new(0.05).unwrap()
    }

    #[test]
    fn profiles_have_designed_plateaus() {
        assert_eq!(CounterexampleDomain::top(-7.0), 0.0);
        assert_eq!(CounterexampleDomain::top(-6.0), 0.0);
        assert_eq!(CounterexampleDomain::top(-8.0), 0.0);
        assert_eq!(CounterexampleDomain::top(-4.0), 0.5);
        assert_eq!(CounterexampleDomain::top(-9.3), -0.9);
        assert_eq!(CounterexampleDomain::depth(-7.0), 1.3);
        assert_eq!(CounterexampleDomain::depth(-9.4), 0.0);
    }

    #[test]
    fn invariant_i_ball4_inside() {
        let d = domain();
        for k in 0..720 {
            let q = Point::unit(std::f64::consts::TAU * k as f64 / 720.0) * 3.999;
            assert!(d.phi(q) < 0.0, "boundary-adjacent ball point {q:?} not interior");
        }
        assert!(d.phi(Point::ORIGIN) < -3.9);
    }

    #[test]
    fn invariant_ii_flat_segment_on_boundary_with_interior_below() {
        let d = domain();
        for k in 0..=40 {
            let rho = -8.0 + 2.0 * k as f64 / 40.0;
            // φ equals x₂ exactly near the segment.
            assert_eq!(d.phi(pt(rho, 0.0)), 0.0, "segment point ({rho}, 0)");
            for t in [1e-6, 1e-3, 0.05, 0.0999] {
                assert!(d.phi(pt(rho, -t)) < 0.0, "({rho}, -{t}) should be interior");
            }
            assert!(d.phi(pt(rho, 1e-6)) > 0.0, "({rho}, +1e-6) should be exterior");
        }
    }

    #[test]
    fn invariant_iii_vertical_slice_is_exactly_minus4_4() {
        let d = domain();
        for k in 1..40 {
            let y = -4.0 + 8.0 * k as f64 / 40.0;
            assert!(d.phi(pt(0.0, y)) < 0.0);
        }
        assert_eq!(d.phi(pt(0.0, 4.0)), 0.0);
        assert_eq!(d.phi(pt(0.0, -4.0)), 0.0);
        assert!(d.phi(pt(0.0, 4.0 + 1e-9)) > 0.0);
        assert!(d.phi(pt(0.0, -4.0 - 1e-9)) > 0.0);
    }

    #[test]
    fn invariant_iv_axis_interior_right_of_minus6() {
        let d = domain();
        for rho in [-5.9, -5.0, -4.2, -3.0, -1.0, 0.0, 2.0, 3.99] {
            assert!(d.phi(pt(rho, 0.0)) < 0.0, "({rho}, 0) should be interior");
        }
    }

    #[test]
    fn invariant_v_axis_outside_left_of_minus8() {
        let d = domain();
        // The contact at (−8, 0) is infinitely flat; clearances are
        // numerically resolvable from −8.1 leftward.
        let checks = [
            (-8.1, 1e-7),
            (-8.2, 1e-3),
            (-8.5, 0.05),
            (-9.0, 0.05),
            (-12.0, 1.0),
            (-20.0, 5.0),
        ];
        for (rho, min_clearance) in checks {
            let p = pt(rho, 0.0);
            assert!(d.phi(p) > 0.0, "({rho}, 0) should be exterior");
            let dist = d.dist_to_boundary(p);
            assert!(
                dist > min_clearance,
                "({rho}, 0): distance {dist} ≤ {min_clearance}"
            );
        }
    }

    #[test]
    fn invariant_vi_interior_tangent_balls_along_segment() {
        let d = domain();
        for rho in [-8.0, -7.5, -7.0, -6.5, -6.0] {
            let center = pt(rho, -0.5);
            for k in 0..720 {
                let q = center + Point::unit(std::f64::consts::TAU * k as f64 / 720.0) * 0.5;
                assert!(
                    d.phi(q) <= 1e-12,
                    "tangent ball at ρ={rho} leaves Ω at {q:?} (φ = {:e})",
                    d.phi(q)
                );
            }
            // Tangency: the top of the ball is the segment point itself.
            assert_eq!(d.phi(pt(rho, 0.0)), 0.0);
        }
    }

    #[test]
    fn invariant_vii_contained_in_ball20() {
        let d = domain();
        for p in d.boundary_points().iter() {
            assert!(p.norm() < 20.0);
        }
        for q in [pt(-20.0, 0.0), pt(0.0, 20.0), pt(15.0, -15.0)] {
            assert!(d.phi(q) > 0.0);
        }
    }

    #[test]
    fn boundary_polyline_is_dense_and_on_the_level_set() {
        let d = domain();
        let pts = d.boundary_points();
        assert!(pts.len() > 3000, "only {} boundary vertices", pts.len());
        let mut max_gap = 0.0f64;
        for i in 0..pts.len() {
            let gap = pts[i].dist(pts[(i + 1) % pts.len()]);
            max_gap = max_gap.max(gap);
            assert!(d.phi(pts[i]).abs() < 1e-9);
        }
        assert!(max_gap < 0.02, "polyline gap {max_gap}");
    }

    #[test]
    fn distance_near_flat_segment_is_exact() {
        let d = domain();
        for (p, expected) in [
            (pt(-7.0, -0.25), 0.25),
            (pt(-6.5, 0.125), 0.125),
            (pt(-7.9, -0.01), 0.01),
        ] {
            let got = d.dist_to_boundary(p);
            assert!(
                (got - expected).abs() < 1e-6,
                "dist{p:?} = {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn distance_is_one_lipschitz_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let d = domain();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..400 {
            let p = pt(rng.gen_range(-10.0..5.0), rng.gen_range(-5.0..5.0));
            let q = pt(rng.gen_range(-10.0..5.0), rng.gen_range(-5.0..5.0));
            let dp = d.dist_to_boundary(p);
            let dq = d.dist_to_boundary(q);
            assert!((dp - dq).abs() <= p.dist(q) + 1e-9);
        }
    }

    #[test]
    fn smoothing_radius_is_validated() {
        assert!(CounterexampleDomain::new(0.0).is_err());
        assert!(CounterexampleDomain::new(0.2).is_err());
        assert!(CounterexampleDomain::new(0.05).is_ok());
        assert!(CounterexampleDomain::new(0.01).is_ok());
    }
}
