//! Boundary-weighted Hölder norms and local exponent fitting.
//!
//! The regularity theory phrases estimates in norms ‖u‖ built from
//! d(x)^{σ+k+α}-weighted derivative sups and seminorms.  The demo shows:
//!
//! * the index split α = k + α′ with α′ ∈ (0, 1] (integer α keeps α′ = 1);
//! * the weighted norm of a Dirichlet solution across (α, σ) choices;
//! * local growth exponents recovered from synthetic fields |x·e|^γ — the
//!   numeric fit reproduces γ to two digits.

use afrac::geometry::{pt, Domain, Point};
use afrac::measure::SpectralMeasure;
use afrac::norms::{local_exponent_fit, split_alpha, weighted_norm};
use afrac::operator::GridFunction;
use afrac::solver::solve_problem;

fn main() -> afrac::error::Result<()> {
    println!("index split α = k + α′, α′ ∈ (0, 1]:");
    for &alpha in &[0.3, 0.75, 1.0, 1.4, 2.0, 2.6] {
        let (k, ap) = split_alpha(alpha)?;
        println!("  α = {alpha:>4}  →  k = {k}, α′ = {ap}");
    }

    let dom = Domain::ball(Point::ORIGIN, 1.0)?;
    let s = 0.25;
    let (u, _) = solve_problem(&dom, &SpectralMeasure::axes(), s, |_| 1.0, 2f64.powi(-6), 1e-9)?;

    println!("\nweighted norms of the unit-ball solution (s = 1/4):");
    println!("  {:>5} {:>6} {:>3} {:>5} {:>12} {:>12}", "α", "σ", "k", "α′", "seminorm", "total");
    for &(alpha, sigma) in &[(0.25, 0.0), (0.75, -0.25), (1.25, -0.25), (1.75, -0.25)] {
        let r = weighted_norm(&u, &dom, alpha, sigma)?;
        println!(
            "  {:>5} {:>6} {:>3} {:>5} {:>12.4e} {:>12.4e}",
            r.alpha, r.sigma, r.k, r.alpha_prime, r.seminorm, r.total
        );
    }

    // Exponent recovery on synthetic power fields sampled into a grid.
    println!("\nlocal exponent fits on |x·e₂|^γ (order-2 differences at the origin):");
    let box_dom = Domain::ball(Point::ORIGIN, 2.0)?;
    let h = 2f64.powi(-7);
    let scales: Vec<f64> = (0..6).map(|k| 0.05 * 1.6f64.powi(k)).collect();
    for &gamma in &[0.3, 0.75, 1.5] {
        let field = GridFunction::sample(&box_dom, h, 0.5, |p: Point| p.y.abs().powf(gamma))?;
        let (fit, r2) = local_exponent_fit(&field, Point::ORIGIN, pt(0.0, 1.0), &scales, 2)?;
        println!("  true γ = {gamma:>4}:  fitted {fit:.4}  (r² = {r2:.5})");
        assert!((fit - gamma).abs() < 0.02);
    }
    println!("\nfits recover the planted exponents within 0.02");
    Ok(())
}
