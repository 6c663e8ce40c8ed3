//! Uniform interior geometry: inner tangent balls and boundary-band areas.
//!
//! Two geometric facts carry the boundary regularity machinery:
//!
//! * every C^{1,1} graph boundary point p admits an interior tangent ball
//!   B_r(q) ⊆ Ω ∩ B_{2κ} with radius r = ½·min{κ, 1/K} — verified here by
//!   Monte Carlo containment over random quadratic patches;
//! * the band {x ∈ annulus : d(x, ∂Ω) ≤ μ} has area ≤ C·μ·|∂Ω ∩ annulus′|,
//!   with C frozen from calibration (`BAND_AREA_CAL`), and the boundary
//!   length in the annulus (r, 8r) stays proportional to r
//!   (`ANNULUS_RATIO_CAL`).

use afrac::geometry::{
    band_measure, inner_sphere_center, pt, verify_inner_ball, Domain, GraphPatch, Point,
    ANNULUS_RATIO_CAL, BAND_AREA_CAL,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> afrac::error::Result<()> {
    // Inner tangent balls on random quadratic graph patches.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let trials = 500;
    let mut contained = 0;
    for k in 0..trials {
        let patch = GraphPatch::random_quadratic(&mut rng);
        let kappa = patch.kappa();
        let p = loop {
            let x = rng.gen_range(-0.6 * kappa..0.6 * kappa);
            let candidate = pt(x, patch.h(x));
            if candidate.norm() <= kappa {
                break candidate;
            }
        };
        let (q, r) = inner_sphere_center(&patch, p, kappa, patch.k_lip())?;
        if verify_inner_ball(&patch, q, r, 400, 1000 + k)? {
            contained += 1;
        }
    }
    println!("inner tangent balls: {contained}/{trials} random patches fully contained");
    assert_eq!(contained, trials);

    // Band areas and annulus boundary lengths over a domain battery.
    let battery: Vec<(&str, Domain)> = vec![
        ("ball(0,0,1)", Domain::ball(Point::ORIGIN, 1.0)?),
        ("stadium(1,0.5)", Domain::stadium(1.0, 0.5)?),
        (
            "triangle",
            Domain::convex_polygon(vec![pt(-1.5, -0.8), pt(1.8, -0.6), pt(0.1, 1.4)])?,
        ),
        ("counterexample(0.05)", Domain::counterexample(0.05)?),
    ];
    println!("\nband areas, μ = 4% of the bounding radius:");
    println!(
        "  {:<22} {:>12} {:>12} {:>8}",
        "domain", "band area", "μ·boundary", "ratio"
    );
    for (name, dom) in &battery {
        let scale = dom.bounding_radius();
        let mu = 0.04 * scale;
        let bm = band_measure(dom, Point::ORIGIN, 0.3 * scale, 1.1 * scale, mu, 40_000, 0)?;
        let ratio = bm.band_volume / (mu * bm.boundary_area);
        println!(
            "  {:<22} {:>12.5e} {:>12.5e} {:>8.4}",
            name,
            bm.band_volume,
            mu * bm.boundary_area,
            ratio
        );
        assert!(bm.band_volume <= BAND_AREA_CAL * mu * bm.boundary_area * 1.001 + 3.0 * bm.std_error);
    }
    println!("  frozen BAND_AREA_CAL = {BAND_AREA_CAL}");

    println!("\nboundary length in the annulus (R, 8R) about the origin, per unit R:");
    for (name, dom) in &battery {
        let mut worst = 0.0f64;
        for &r in &[0.25, 0.5, 1.0, 2.0, 4.0] {
            worst = worst.max(dom.annulus_boundary_area(r)? / r);
        }
        println!("  {:<22} max over four octaves = {worst:>9.4}", name);
        assert!(worst <= ANNULUS_RATIO_CAL * (1.0 + 1e-3));
    }
    println!("  frozen ANNULUS_RATIO_CAL = {ANNULUS_RATIO_CAL}");
    Ok(())
}
