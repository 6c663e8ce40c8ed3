//! The cusp domain B_R ∪ {|y| < R e^{−|x|/R}}.
//!
//! Two exponentially pinching tails are glued to a disc; the boundary is a
//! pair of circle arcs plus four exponential branches meeting at the
//! junction abscissa x_e, the root of (x/R)² + e^{−2x/R} = 1.  On this
//! domain the convex boundary-band ray bound fails: along the positive
//! x-axis the distance to ∂Ω decays like R e^{−ρ/R}, so the sublevel set
//! {d ≤ r} starts only at ρ ≈ R log(R/r) instead of at a distance ∝ r.

use super::point::{pt, Point, Polyline};

/// Export truncation: the tails are cut where the half-width falls below
/// 1e−9·R, i.e. at |x| = R ln(1e9).
pub(crate) fn truncation_x(scale: f64) -> f64 {
    scale * 1e9f64.ln()
}

/// Junction abscissa: positive root of t² + e^{−2t} = 1, scaled by R.
pub(crate) fn junction_x(scale: f64) -> f64 {
    let f = |t: f64| t * t + (-2.0 * t).exp() - 1.0;
    let mut lo = 0.5;
    let mut hi = 1.0;
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    scale * 0.5 * (lo + hi)
}

/// Distance from `p` to ∂Ω for the cusp of the given scale.
pub(crate) fn dist_to_boundary(scale: f64, p: Point) -> f64 {
    let r = scale;
    // The domain is symmetric in both axes: fold into the first quadrant.
    let q = pt(p.x.abs(), p.y.abs());
    let xe = junction_x(r);
    let ye = r * (-xe / r).exp();
    let junction = pt(xe, ye);

    let mut best = q.dist(junction);

    // Circle arc |p| = R, |x| ≤ x_e: the unconstrained foot is valid only
    // if it lands on the arc; otherwise the constrained minimum is the
    // junction (already a candidate).
    let qn = q.norm();
    if qn == 0.0 {
        best = best.min(r);
    } else {
        let foot = q * (r / qn);
        if foot.x <= xe {
            best = best.min((qn - r).abs());
        }
    }

    // Exponential branches y = R e^{−t/R}, t ≥ x_e: right branch as seen
    // from q, and the mirrored (far-side) branch as seen from (−q.x, q.y).
    best = best.min(branch_distance(r, xe, q));
    best = best.min(branch_distance(r, xe, pt(-q.x, q.y)));
    best
}

/// Distance from `q` to the curve {(t, R e^{−t/R}) : t ≥ x_e}.
fn branch_distance(r: f64, xe: f64, q: Point) -> f64 {
    let g = |t: f64| r * (-t / r).exp();
    let f = |t: f64| {
        let dx = t - q.x;
        let dy = g(t) - q.y;
        dx * dx + dy * dy
    };
    let t_hi = q.x.max(xe) + 3.0 * r;
    let n = 96;
    let step = (t_hi - xe) / n as f64;
    let mut best = f(xe).min(f(t_hi));
    let mut prev2 = f(xe);
    let mut prev1 = f(xe + step);
    for i in 2..=n {
        let t = xe + step * i as f64;
        let cur = f(t);
        if prev1 <= prev2 && prev1 <= cur {
            // Local minimum bracketed; refine by golden-section search.
            let refined = golden_min(&f, xe + step * (i as f64 - 2.0), t);
            best = best.min(refined);
        }
        prev2 = prev1;
        prev1 = cur;
    }
    best.min(prev1).sqrt()
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

/// Boundary as two open chains (upper and lower), truncated at |x| = R ln 1e9.
pub(crate) fn boundary_polyline(scale: f64, seg: f64) -> Vec<Polyline> {
    let r = scale;
    let xe = junction_x(r);
    let xt = truncation_x(r);
    let g = |t: f64| r * (-t / r).exp();

    let mut upper: Vec<Point> = Vec::new();
    // Left tail, from the truncation toward the junction.
    let n_tail = (((xt - xe) / seg).ceil() as usize).max(16);
    for i in 0..=n_tail {
        let t = xt - (xt - xe) * i as f64 / n_tail as f64;
        upper.push(pt(-t, g(t)));
    }
    // Upper arc from (−x_e, y_e) over the top to (x_e, y_e).
    let theta_e = g(xe).atan2(xe);
    let arc_span = std::f64::consts::PI - 2.0 * theta_e;
    let n_arc = ((arc_span * r / seg).ceil() as usize).max(32);
    for i in 1..n_arc {
        let a = (std::f64::consts::PI - theta_e) - arc_span * i as f64 / n_arc as f64;
        upper.push(Point::unit(a) * r);
    }
    // Right tail.
    for i in 0..=n_tail {
        let t = xe + (xt - xe) * i as f64 / n_tail as f64;
        upper.push(pt(t, g(t)));
    }

    let lower: Vec<Point> = upper.iter().map(|p| pt(p.x, -p.y)).collect();
    vec![Polyline::open(upper), Polyline::open(lower)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::quad::{self, QuadOpts};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn junction_solves_the_intersection_equation() {
        for r in [1.0, 2.5] {
            let xe = junction_x(r);
            let t = xe / r;
            assert!((t * t + (-2.0 * t).exp() - 1.0).abs() < 1e-12);
            assert!(t > 0.9 && t < 0.95);
        }
    }

    #[test]
    fn distances_at_simple_points() {
        // Center: the circle is nearest.
        assert_relative_eq!(dist_to_boundary(1.0, Point::ORIGIN), 1.0, epsilon = 1e-9);
        // Far above: the circle again.
        assert_relative_eq!(dist_to_boundary(1.0, pt(0.0, 2.0)), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn axis_distance_deep_in_the_cusp_matches_dense_oracle() {
        let r = 1.0;
        for rho in [3.0, 5.0, 8.0] {
            let p = pt(rho, 0.0);
            let got = dist_to_boundary(r, p);
            // Dense-sampling oracle over the upper branch. Sampling can only
            // overshoot the true minimum, by at most ½ d''(t*)(Δt/2)² with
            // d'' ≈ 1/d at the bottom of the thin cusp.
            let mut best = f64::INFINITY;
            let xe = junction_x(r);
            let n = 400_000;
            let span = rho + 3.0 - xe;
            for i in 0..=n {
                let t = xe + span * i as f64 / n as f64;
                let d = p.dist(pt(t, (-t).exp()));
                best = best.min(d);
            }
            let dt = span / n as f64;
            let quantization = 0.75 * (0.5 * dt).powi(2) / got;
            assert!(got <= best + 1e-12, "analytic distance must not exceed sampled oracle");
            assert!(
                best - got <= quantization,
                "rho {rho}: oracle {best:e} vs analytic {got:e} beyond quantization {quantization:e}"
            );
            // Sanity: close to (but below) the vertical width R e^{−ρ}.
            assert!(got < (-rho).exp());
            assert!(got > 0.5 * (-rho).exp());
        }
    }

    #[test]
    fn membership_of_strip_and_ball_points() {
        let dom = Domain::cusp(1.0).unwrap();
        assert!(dom.contains(pt(10.0, 0.5 * (-10.0f64).exp())));
        assert!(!dom.contains(pt(10.0, 2.0 * (-10.0f64).exp())));
        assert!(dom.contains(pt(0.3, -0.4)));
        assert!(!dom.contains(pt(1.2, 0.9)));
        assert!(dom.contains(pt(-7.0, 0.0)));
    }

    #[test]
    fn distance_is_one_lipschitz() {
        let dom = Domain::cusp(1.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..2000 {
            let p = pt(rng.gen_range(-6.0..6.0), rng.gen_range(-2.0..2.0));
            let q = pt(rng.gen_range(-6.0..6.0), rng.gen_range(-2.0..2.0));
            let dd = (dom.dist_to_boundary(p) - dom.dist_to_boundary(q)).abs();
            assert!(dd <= p.dist(q) + 1e-9);
        }
    }

    #[test]
    fn tail_arc_length_in_annulus_matches_quadrature_oracle() {
        let dom = Domain::cusp(1.0).unwrap();
        let r = 2.0;
        let measured = dom.annulus_boundary_area(r).unwrap();
        // Oracle: 4 branches, each ∫ √(1 + e^{−2t}) dt between the norm
        // crossings |p(t)| = 2 and |p(t)| = 16 (t² + e^{−2t} = R²).
        let crossing = |target: f64| {
            let f = |t: f64| t * t + (-2.0 * t).exp() - target * target;
            let mut lo = 0.9;
            let mut hi = target + 1.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let (t1, t2) = (crossing(r), crossing(8.0 * r));
        let one_branch = quad::integrate(
            |t: f64| (1.0 + (-2.0 * t).exp()).sqrt(),
            t1,
            t2,
            &QuadOpts::default(),
        )
        .unwrap()
        .ensure_converged()
        .unwrap();
        assert_relative_eq!(measured, 4.0 * one_branch, max_relative = 1e-3);
    }
}
