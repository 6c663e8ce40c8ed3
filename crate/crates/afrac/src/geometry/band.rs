//! Boundary-band measures and level-set probes.
//!
//! The band {x ∈ Ω ∩ A : d(x) ≤ μ} inside an annulus A has area controlled
//! by μ times the boundary length in a slightly enlarged annulus.  The
//! Monte Carlo estimate here is what the calibrated band constants in the
//! test suite are frozen against.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::point::{clipped_length_in_annulus, Point};
use super::Domain;
use crate::{Error, Result};

/// Frozen calibration constant of the band-area bound
/// |{x ∈ Ω ∩ A : d(x) ≤ μ}| ≤ C·μ·|∂Ω ∩ A′|: the battery maximum of
/// band_volume / (μ·boundary_area) over the standard domain battery
/// (see the verification suite), recorded from the calibration run.
/// Regression tolerance: 1e−3 relative.
pub const BAND_AREA_CAL: f64 = 0.991;

/// Frozen bound of annulus_boundary_area(R)/R over the domain battery and
/// four octaves of R: the calibration-run maximum.  Regression tolerance:
/// 1e−3 relative.
pub const ANNULUS_RATIO_CAL: f64 = 44.213;

/// Result of a band measurement.
#[derive(Debug, Clone, Copy)]
pub struct BandMeasure {
    /// Monte Carlo estimate of |{x ∈ Ω ∩ A_{R1,R2}(P) : d(x) ≤ μ}|.
    pub band_volume: f64,
    /// Standard error of the Monte Carlo estimate.
    pub std_error: f64,
    /// Arc length of ∂Ω inside the enlarged annulus A_{R1−μ, R2+μ}(P).
    pub boundary_area: f64,
}

/// Measures the boundary band inside the annulus R1 ≤ |x−P| ≤ R2.
///
/// Preconditions: R2 − R1 > 2μ > 0 and `samples ≥ 10⁴`.  When Ω misses the
/// annulus entirely both outputs are zero (not an error).
pub fn band_measure(
    dom: &Domain,
    center: Point,
    r1: f64,
    r2: f64,
    mu: f64,
    samples: usize,
    seed: u64,
) -> Result<BandMeasure> {
    if !(r1 >= 0.0) || !(r2 > r1) {
        return Err(Error::InvalidParameter(format!(
            "annulus radii must satisfy 0 ≤ R1 < R2, got R1={r1}, R2={r2}"
        )));
    }
    if !(mu > 0.0) || !(r2 - r1 > 2.0 * mu) {
        return Err(Error::InvalidParameter(format!(
            "band width must satisfy R2 − R1 > 2μ > 0, got μ={mu}"
        )));
    }
    if samples < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "need ≥ 10000 Monte Carlo samples, got {samples}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let area = std::f64::consts::PI * (r2 * r2 - r1 * r1);
    let mut hits = 0u64;
    for _ in 0..samples {
        // Uniform in the annulus: radius from the area measure.
        let u: f64 = rng.gen();
        let radius = (r1 * r1 + u * (r2 * r2 - r1 * r1)).sqrt();
        let angle = rng.gen::<f64>() * std::f64::consts::TAU;
        let p = center + Point::unit(angle) * radius;
        if dom.contains(p) && dom.dist_to_boundary(p) <= mu {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    let band_volume = frac * area;
    let std_error = area * (frac * (1.0 - frac) / samples as f64).sqrt();

    let seg = ((r2 - r1) * 1e-3)
        .min(dom.bounding_radius() * 1e-3)
        .max(1e-9);
    let poly = dom.boundary_polyline(seg);
    let boundary_area =
        clipped_length_in_annulus(&poly, center, (r1 - mu).max(0.0), r2 + mu);

    Ok(BandMeasure { band_volume, std_error, boundary_area })
}

/// Probes the Lipschitz constant of the interior level set {d = t} of a
/// graph patch: solves d((x′, x₂)) = t for x₂ by bisection at `probes`
/// abscissae across the central patch region and returns the maximum
/// difference quotient between adjacent abscissae.
pub fn level_set_lipschitz_probe(dom: &Domain, t: f64, probes: usize) -> Result<f64> {
    let patch = match dom {
        Domain::GraphPatch(g) => g,
        _ => {
            return Err(Error::Precondition(
                "level-set probe requires the graph-patch variant".into(),
            ))
        }
    };
    // κ* is the calibrated patch constant inside which the level set is a
    // guaranteed graph.
    let kappa_star = 0.1f64.min(if patch.k_lip() > 0.0 {
        0.25 / patch.k_lip()
    } else {
        f64::INFINITY
    });
    if !(t > 0.0 && t <= 0.5 * kappa_star) {
        return Err(Error::InvalidParameter(format!(
            "level t = {t} outside (0, κ*/2] with κ* = {kappa_star}"
        )));
    }
    if probes < 100 {
        return Err(Error::InvalidParameter(format!("need ≥ 100 probes, got {probes}")));
    }

    let slope_cap = (1.0f64 + patch.k_lip() * patch.kappa()).max(2.0);
    let span = 0.5 * patch.kappa();
    let mut heights = Vec::with_capacity(probes);
    let mut xs = Vec::with_capacity(probes);
    for i in 0..probes {
        let x = -span + 2.0 * span * i as f64 / (probes - 1) as f64;
        let base = patch.h(x);
        let mut lo = base + 1e-12;
        let mut hi = base + t * slope_cap * 1.5;
        let d_at = |y: f64| dom.dist_to_boundary(Point::new(x, y));
        if !(d_at(lo) < t && d_at(hi) > t) {
            return Err(Error::Precondition(format!(
                "failed to bracket the level set at x = {x} (level exits the patch)"
            )));
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if d_at(mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        xs.push(x);
        heights.push(0.5 * (lo + hi));
    }
    let mut max_slope = 0.0f64;
    for i in 1..probes {
        let slope = (heights[i] - heights[i - 1]).abs() / (xs[i] - xs[i - 1]);
        max_slope = max_slope.max(slope);
    }
    Ok(max_slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{pt, GraphPatch};
    use approx::assert_relative_eq;

    #[test]
    fn ball_band_matches_closed_form() {
        // Ball(0,3), annulus 1..5, μ = 0.1: the band is the ring 2.9 < |x| < 3.
        let dom = Domain::ball(Point::ORIGIN, 3.0).unwrap();
        let bm = band_measure(&dom, Point::ORIGIN, 1.0, 5.0, 0.1, 400_000, 9).unwrap();
        let exact = std::f64::consts::PI * (9.0 - 2.9 * 2.9);
        assert!(
            (bm.band_volume - exact).abs() < 4.0 * bm.std_error + 1e-9,
            "band {} vs exact {exact} (σ = {})",
            bm.band_volume,
            bm.std_error
        );
        assert_relative_eq!(
            bm.boundary_area,
            6.0 * std::f64::consts::PI,
            max_relative = 1e-4
        );
    }

    #[test]
    fn square_band_matches_offset_polygon_oracle() {
        // Unit square, annulus covering it, μ = 0.05: the inner offset band
        // has exact area perimeter·μ − 4μ² (inner corners overlap-free).
        let dom = Domain::convex_polygon(vec![
            pt(0.0, 0.0),
            pt(1.0, 0.0),
            pt(1.0, 1.0),
            pt(0.0, 1.0),
        ])
        .unwrap();
        let mu = 0.05;
        let bm = band_measure(&dom, pt(0.5, 0.5), 0.1, 10.0, mu, 400_000, 21).unwrap();
        let exact = 4.0 * mu - 4.0 * mu * mu;
        assert!(
            (bm.band_volume - exact).abs() < 4.0 * bm.std_error + 1e-9,
            "band {} vs exact {exact} (σ = {})",
            bm.band_volume,
            bm.std_error
        );
        assert_relative_eq!(bm.boundary_area, 4.0, max_relative = 1e-4);
    }

    #[test]
    fn vanishing_width_vanishing_band() {
        let dom = Domain::ball(Point::ORIGIN, 2.0).unwrap();
        let bm = band_measure(&dom, Point::ORIGIN, 0.5, 3.5, 1e-4, 20_000, 3).unwrap();
        assert!(bm.band_volume < 0.02);
    }

    #[test]
    fn annulus_missing_the_domain_returns_zeros() {
        let dom = Domain::ball(Point::ORIGIN, 1.0).unwrap();
        let bm = band_measure(&dom, pt(100.0, 0.0), 1.0, 5.0, 0.1, 20_000, 4).unwrap();
        assert_eq!(bm.band_volume, 0.0);
        assert_eq!(bm.boundary_area, 0.0);
    }

    #[test]
    fn invalid_band_parameters_are_rejected() {
        let dom = Domain::ball(Point::ORIGIN, 1.0).unwrap();
        assert!(band_measure(&dom, Point::ORIGIN, 2.0, 1.0, 0.1, 20_000, 0).is_err());
        assert!(band_measure(&dom, Point::ORIGIN, 1.0, 1.1, 0.1, 20_000, 0).is_err());
        assert!(band_measure(&dom, Point::ORIGIN, 1.0, 5.0, 0.1, 100, 0).is_err());
    }

    #[test]
    fn flat_level_set_has_zero_slope() {
        let dom = Domain::GraphPatch(GraphPatch::quadratic(0.0, 0.0, 0.0, 1.0).unwrap());
        let slope = level_set_lipschitz_probe(&dom, 0.04, 200).unwrap();
        assert!(slope < 1e-7, "slope {slope}");
    }

    #[test]
    fn parabola_level_set_slope_is_bounded() {
        // h = x²/2 (K = 1): inside the central region the level-set slope
        // stays near max |h′| ≈ κ/2 = 0.5.
        let dom = Domain::GraphPatch(GraphPatch::quadratic(0.0, 0.0, 0.5, 1.0).unwrap());
        let slope = level_set_lipschitz_probe(&dom, 0.05, 300).unwrap();
        assert!(slope < 0.75, "slope {slope}");
        assert!(slope > 0.2, "slope {slope} suspiciously flat");
    }

    #[test]
    fn level_probe_validates_inputs() {
        let dom = Domain::GraphPatch(GraphPatch::quadratic(0.0, 0.0, 0.5, 1.0).unwrap());
        assert!(level_set_lipschitz_probe(&dom, 0.2, 200).is_err());
        assert!(level_set_lipschitz_probe(&dom, 0.05, 10).is_err());
        let ball = Domain::ball(Point::ORIGIN, 1.0).unwrap();
        assert!(level_set_lipschitz_probe(&ball, 0.04, 200).is_err());
    }
}
