//! C^{1,1} boundary graph patches and the interior tangent-ball machinery.
//!
//! A patch is Ω = {x₂ > h(x₁)} ∩ B_{2κ} with h a C¹ quadratic spline whose
//! derivative is Lipschitz with constant K = max |h''|.  Every boundary
//! point of the graph part is touched from inside by a ball of the uniform
//! radius r = ½ min{κ, 1/K} centered along the inward normal; the
//! construction and its Monte Carlo verification live here.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use super::contour::trace_zero_contour;
use super::point::{pt, Point, Polyline};
use crate::{Error, Result};

/// C^{1,1} graph patch {x₂ > h(x₁)} ∩ B_{2κ}.
#[derive(Debug, Clone)]
pub struct GraphPatch {
    /// Piece boundaries, strictly increasing, spanning at least [−2κ, 2κ].
    knots: Vec<f64>,
    /// Piece i on [knots[i], knots[i+1]]: a + b·(x−knots[i]) + c·(x−knots[i])².
    coeffs: Vec<[f64; 3]>,
    kappa: f64,
    k_lip: f64,
    /// Sub-intervals of the span where the graph lies inside B_{2κ}.
    valid_t: Vec<(f64, f64)>,
    /// Graph/circle junction points.
    junctions: Vec<Point>,
}

impl GraphPatch {
    /// Single-piece patch with h(x) = a0 + a1·x + a2·x².
    pub fn quadratic(a0: f64, a1: f64, a2: f64, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("patch radius κ = {kappa} must be > 0")));
        }
        let x0 = -2.0 * kappa;
        let a = a0 + a1 * x0 + a2 * x0 * x0;
        let b = a1 + 2.0 * a2 * x0;
        GraphPatch::from_spline(vec![x0, 2.0 * kappa], vec![[a, b, a2]], kappa)
    }

    /// General C¹ quadratic spline; continuity of value and slope at the
    /// interior knots is verified to 1e−9.
    pub fn from_spline(knots: Vec<f64>, coeffs: Vec<[f64; 3]>, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("patch radius κ = {kappa} must be > 0")));
        }
        if knots.len() != coeffs.len() + 1 || coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "need n+1 knots for n spline pieces (n ≥ 1)".into(),
            ));
        }
        for w in knots.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParameter("knots must be strictly increasing".into()));
            }
        }
        if knots[0] > -2.0 * kappa + 1e-12 || *knots.last().unwrap() < 2.0 * kappa - 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "spline span [{}, {}] must cover [−2κ, 2κ] = [{}, {}]",
                knots[0],
                knots.last().unwrap(),
                -2.0 * kappa,
                2.0 * kappa
            )));
        }
        // C¹ continuity at interior knots.
        for i in 0..coeffs.len() - 1 {
            let w = knots[i + 1] - knots[i];
            let [a, b, c] = coeffs[i];
            let val_l = a + b * w + c * w * w;
            let slope_l = b + 2.0 * c * w;
            let [a2, b2, _] = coeffs[i + 1];
            let scale = 1.0 + val_l.abs() + slope_l.abs();
            if (val_l - a2).abs() > 1e-9 * scale || (slope_l - b2).abs() > 1e-9 * scale {
                return Err(Error::Precondition(format!(
                    "spline is not C¹ at knot {} (value gap {:e}, slope gap {:e})",
                    knots[i + 1],
                    val_l - a2,
                    slope_l - b2
                )));
            }
        }
        let k_lip = coeffs.iter().map(|c| 2.0 * c[2].abs()).fold(0.0, f64::max);
        let mut patch = GraphPatch {
            knots,
            coeffs,
            kappa,
            k_lip,
            valid_t: Vec::new(),
            junctions: Vec::new(),
        };
        patch.compute_clipping();
        Ok(patch)
    }

    /// A random single-piece quadratic patch for battery tests.
    pub fn random_quadratic<R: Rng>(rng: &mut R) -> GraphPatch {
        loop {
            let kappa = rng.gen_range(0.3..2.0);
            let a2 = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(-3.0..3.0) };
            let a1 = rng.gen_range(-1.5..1.5);
            let a0 = rng.gen_range(-0.4 * kappa..0.4 * kappa);
            if let Ok(p) = GraphPatch::quadratic(a0, a1, a2, kappa) {
                return p;
            }
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Gradient-Lipschitz bound K = max |h''|.
    pub fn k_lip(&self) -> f64 {
        self.k_lip
    }

    /// Spline value (end pieces extrapolate beyond the span).
    pub fn h(&self, x: f64) -> f64 {
        let i = self.piece_index(x);
        let t = x - self.knots[i];
        let [a, b, c] = self.coeffs[i];
        a + b * t + c * t * t
    }

    /// Spline slope.
    pub fn h_prime(&self, x: f64) -> f64 {
        let i = self.piece_index(x);
        let t = x - self.knots[i];
        let [_, b, c] = self.coeffs[i];
        b + 2.0 * c * t
    }

    fn piece_index(&self, x: f64) -> usize {
        match self
            .knots
            .binary_search_by(|k| k.total_cmp(&x))
        {
            Ok(i) => i.min(self.coeffs.len() - 1),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.coeffs.len() - 1),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.norm() < 2.0 * self.kappa && p.y > self.h(p.x)
    }

    pub fn bbox(&self) -> (Point, Point) {
        let r = 2.0 * self.kappa;
        (pt(-r, -r), pt(r, r))
    }

    /// Finds where the graph crosses the circle |p| = 2κ and the t-intervals
    /// where it lies inside.
    fn compute_clipping(&mut self) {
        let r2 = 4.0 * self.kappa * self.kappa;
        let f = |t: f64| t * t + self.h(t) * self.h(t) - r2;
        let lo = -2.0 * self.kappa;
        let hi = 2.0 * self.kappa;
        let n = 1024;
        let mut crossings = Vec::new();
        let mut prev_t = lo;
        let mut prev_v = f(lo);
        for i in 1..=n {
            let t = lo + (hi - lo) * i as f64 / n as f64;
            let v = f(t);
            if prev_v.signum() != v.signum() && prev_v.is_finite() {
                let mut a = prev_t;
                let mut b = t;
                let mut fa = prev_v;
                for _ in 0..80 {
                    let m = 0.5 * (a + b);
                    let fm = f(m);
                    if fa.signum() == fm.signum() {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                crossings.push(0.5 * (a + b));
            }
            prev_t = t;
            prev_v = v;
        }
        // Valid intervals: where f < 0 between consecutive markers.
        let mut markers = vec![lo];
        markers.extend(&crossings);
        markers.push(hi);
        let mut valid = Vec::new();
        for w in markers.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            if f(mid) < 0.0 {
                valid.push((w[0], w[1]));
            }
        }
        self.junctions = crossings.iter().map(|&t| pt(t, self.h(t))).collect();
        self.valid_t = valid;
    }

    /// Unsigned distance to ∂Ω (graph part, circle part, junctions).
    pub fn dist_to_boundary(&self, p: Point) -> f64 {
        let mut best = f64::INFINITY;
        // Circle part, valid where the foot lies above the graph.
        let r = 2.0 * self.kappa;
        let n = p.norm();
        if n > 0.0 {
            let foot = p * (r / n);
            if foot.y > self.h(foot.x) {
                best = best.min((n - r).abs());
            }
        } else {
            best = best.min(r);
        }
        for j in &self.junctions {
            best = best.min(p.dist(*j));
        }
        for &(lo, hi) in &self.valid_t {
            best = best.min(self.curve_distance(p, lo, hi));
        }
        best
    }

    /// Distance from `p` to the graph restricted to t ∈ [lo, hi].
    fn curve_distance(&self, p: Point, lo: f64, hi: f64) -> f64 {
        let f = |t: f64| {
            let dx = t - p.x;
            let dy = self.h(t) - p.y;
            dx * dx + dy * dy
        };
        let n = 64;
        let step = (hi - lo) / n as f64;
        let mut best = f(lo).min(f(hi));
        let mut prev2 = f(lo);
        let mut prev1 = f(lo + step);
        for i in 2..=n {
            let t = lo + step * i as f64;
            let cur = f(t);
            if prev1 <= prev2 && prev1 <= cur {
                best = best.min(golden_min(&f, lo + step * (i as f64 - 2.0), t));
            }
            prev2 = prev1;
            prev1 = cur;
        }
        best.min(prev1).sqrt()
    }

    /// Boundary polyline via contour extraction of the membership field.
    pub fn boundary_polyline(&self, _seg: f64) -> Vec<Polyline> {
        let r = 2.0 * self.kappa;
        let margin = 0.02 * r;
        let chains = trace_zero_contour(
            |p| (p.norm() - r).max(self.h(p.x) - p.y),
            pt(-r - margin, -r - margin),
            pt(r + margin, r + margin),
            768,
            768,
        );
        chains
            .into_iter()
            .filter(|c| c.len() > 8)
            .map(|mut c| {
                if c.len() > 2 && c[0].dist(*c.last().unwrap()) < 1e-9 {
                    c.pop();
                }
                Polyline::closed(c)
            })
            .collect()
    }
}

fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd)
}

/// Interior tangent ball at a graph boundary point:
/// r = ½ min{κ, 1/K} and q = p − r·(∇h(p′), −1)/√(|∇h(p′)|² + 1).
///
/// The guarantee B_r(q) ⊆ Ω ∩ B_{2κ} needs the full boundary point inside
/// B_κ (|p| ≤ κ, not just |p′| ≤ κ: the chain |x| < 2r + |p| ≤ 2κ uses it).
/// `kappa` and `k_lip` are passed explicitly so callers can test with
/// non-tight constants; errors if |p| > κ or p is not on the graph.
pub fn inner_sphere_center(
    patch: &GraphPatch,
    p: Point,
    kappa: f64,
    k_lip: f64,
) -> Result<(Point, f64)> {
    if p.norm() > kappa {
        return Err(Error::Precondition(format!(
            "boundary point ({}, {}) outside the guaranteed patch region |p| ≤ {kappa}",
            p.x, p.y
        )));
    }
    let hv = patch.h(p.x);
    if (p.y - hv).abs() > 1e-9 * (1.0 + hv.abs()) {
        return Err(Error::Precondition(format!(
            "point ({}, {}) is not on the boundary graph (h = {hv})",
            p.x, p.y
        )));
    }
    let r = 0.5 * if k_lip > 0.0 { kappa.min(1.0 / k_lip) } else { kappa };
    let grad = patch.h_prime(p.x);
    let denom = (grad * grad + 1.0).sqrt();
    let q = pt(p.x - r * grad / denom, p.y + r / denom);
    Ok((q, r))
}

/// Monte Carlo check that B_r(q) ⊆ Ω ∩ B_{2κ}： uniform samples of the ball
/// must satisfy x₂ > h(x₁) and |x| < 2κ.
pub fn verify_inner_ball(
    patch: &GraphPatch,
    q: Point,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    if samples < 100 {
        return Err(Error::InvalidParameter(format!(
            "need ≥ 100 samples for the inner-ball check, got {samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two_kappa = 2.0 * patch.kappa();
    for _ in 0..samples {
        let radius = r * rng.gen::<f64>().sqrt();
        let angle = rng.gen::<f64>() * std::f64::consts::TAU;
        let x = q + Point::unit(angle) * radius;
        if !(x.y > patch.h(x.x) && x.norm() < two_kappa) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flat_patch_tangent_ball_matches_hand_formula() {
        let patch = GraphPatch::quadratic(0.0, 0.0, 0.0, 1.0).unwrap();
        // K = 0: r = κ/2 and the normal is straight up.
        let (q, r) = inner_sphere_center(&patch, pt(0.0, 0.0), 1.0, 1.0).unwrap();
        assert_relative_eq!(r, 0.5);
        assert_relative_eq!(q.x, 0.0);
        assert_relative_eq!(q.y, 0.5);
        assert!(verify_inner_ball(&patch, q, r, 10_000, 7).unwrap());
        // A too-large ball dips below the boundary.
        assert!(!verify_inner_ball(&patch, q, 0.6, 10_000, 7).unwrap());
    }

    #[test]
    fn parabola_tangent_ball_matches_formula_and_contains() {
        // h(x) = x²/2 has K = 1.
        let patch = GraphPatch::quadratic(0.0, 0.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(patch.k_lip(), 1.0);
        let (q0, r0) = inner_sphere_center(&patch, pt(0.0, 0.0), 1.0, 1.0).unwrap();
        assert_relative_eq!(r0, 0.5);
        assert_relative_eq!(q0.y, 0.5);
        let p = pt(0.5, 0.125);
        let (q, r) = inner_sphere_center(&patch, p, 1.0, 1.0).unwrap();
        let denom = (1.0f64 + 0.25).sqrt();
        assert_relative_eq!(q.x, 0.5 - 0.5 * 0.5 / denom, max_relative = 1e-12);
        assert_relative_eq!(q.y, 0.125 + 0.5 / denom, max_relative = 1e-12);
        assert!(verify_inner_ball(&patch, q, r, 10_000, 42).unwrap());
    }

    #[test]
    fn off_patch_or_off_graph_points_are_rejected() {
        let patch = GraphPatch::quadratic(0.0, 0.0, 0.5, 1.0).unwrap();
        assert!(inner_sphere_center(&patch, pt(1.5, patch.h(1.5)), 1.0, 1.0).is_err());
        assert!(inner_sphere_center(&patch, pt(0.2, 0.3), 1.0, 1.0).is_err());
    }

    #[test]
    fn spline_requires_c1_continuity() {
        // Value continuous, slope jumps: rejected.
        let bad = GraphPatch::from_spline(
            vec![-2.0, 0.0, 2.0],
            vec![[0.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            1.0,
        );
        assert!(bad.is_err());
        // Proper C¹ spline accepted: 0 then x²/2 (value 0, slope 0 at knot).
        let ok = GraphPatch::from_spline(
            vec![-2.0, 0.0, 2.0],
            vec![[0.0, 0.0, 0.0], [0.0, 0.0, 0.5]],
            1.0,
        );
        assert!(ok.is_ok());
        assert_relative_eq!(ok.unwrap().h(1.0), 0.5);
    }

    #[test]
    fn distance_matches_dense_oracle() {
        let patch = GraphPatch::quadratic(0.0, 0.0, 0.5, 1.0).unwrap();
        for p in [pt(0.0, 0.5), pt(0.4, 0.3), pt(-0.8, 1.0), pt(0.0, 1.9)] {
            let got = patch.dist_to_boundary(p);
            // Oracle: dense sampling of the full boundary (graph + circle).
            let mut best = f64::INFINITY;
            let n = 300_000;
            for i in 0..=n {
                let t = -2.0 + 4.0 * i as f64 / n as f64;
                let gp = pt(t, patch.h(t));
                if gp.norm() <= 2.0 {
                    best = best.min(p.dist(gp));
                }
                let c = Point::unit(std::f64::consts::TAU * i as f64 / n as f64) * 2.0;
                if c.y >= patch.h(c.x) {
                    best = best.min(p.dist(c));
                }
            }
            assert_relative_eq!(got, best, max_relative = 1e-4, epsilon = 1e-6);
        }
    }

    #[test]
    fn thousand_random_patches_have_valid_inner_balls() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for case in 0..200 {
            let patch = GraphPatch::random_quadratic(&mut rng);
            let kappa = patch.kappa();
            // Boundary point inside B_κ (the guarantee needs |p| ≤ κ, and
            // such points always exist near x = 0 since |h(0)| < 0.4κ).
            let p = loop {
                let px = rng.gen_range(-kappa..kappa);
                let cand = pt(px, patch.h(px));
                if cand.norm() <= kappa {
                    break cand;
                }
            };
            let (q, r) = inner_sphere_center(&patch, p, kappa, patch.k_lip()).unwrap();
            assert!(
                verify_inner_ball(&patch, q, r, 2000, case).unwrap(),
                "violation for patch #{case}"
            );
        }
    }
}
