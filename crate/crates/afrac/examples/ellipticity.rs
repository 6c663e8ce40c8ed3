//! Ellipticity of spectral measures: λ(s) = min_ϖ ∫ |ω·ϖ|^{2s} da(ω).
//!
//! The operator is uniformly elliptic exactly when the measure is not
//! concentrated on a single line: λ > 0 means every direction ϖ sees mass.
//! The demo sweeps a few measures — axis atoms, atoms plus a uniform
//! density, a skewed atom pair, and a degenerate single-axis measure whose
//! λ collapses to floating-point residue.

use afrac::measure::SpectralMeasure;

fn main() -> afrac::error::Result<()> {
    let cases: Vec<(&str, SpectralMeasure)> = vec![
        ("axes (4 unit atoms)", SpectralMeasure::axes()),
        ("uniform density 1/2", SpectralMeasure::uniform_density(0.5)?),
        (
            "axes + uniform 1/4",
            SpectralMeasure::from_config_literals(
                Some("[(0, 1), (90, 1), (180, 1), (270, 1)]"),
                Some("[(0, 360, 0.25)]"),
            )?,
        ),
        (
            "skewed atoms at 0°/30°",
            SpectralMeasure::from_config_literals(
                Some("[(0, 1), (30, 1), (180, 1), (210, 1)]"),
                None,
            )?,
        ),
        (
            "degenerate: one axis only",
            SpectralMeasure::from_config_literals(Some("[(90, 1), (270, 1)]"), None)?,
        ),
    ];

    for &s in &[0.25, 0.5, 0.75] {
        println!("s = {s}");
        println!("  {:<28} {:>12} {:>10} {:>6}", "measure", "lambda", "mass", "even");
        for (name, m) in &cases {
            let lambda = m.ellipticity_lambda(s, 720)?;
            println!(
                "  {:<28} {:>12.6e} {:>10.4} {:>6}",
                name,
                lambda,
                m.total_mass(),
                m.is_even(1e-9, 360)
            );
        }
        println!();
    }

    // The coercivity profile makes the degenerate direction visible.
    let degenerate = SpectralMeasure::from_config_literals(Some("[(90, 1), (270, 1)]"), None)?;
    println!("coercivity profile of the one-axis measure at s = 1/2:");
    for k in 0..8 {
        let theta = std::f64::consts::PI * k as f64 / 8.0;
        let b = degenerate.directional_coercivity(0.5, theta)?;
        println!("  theta = {:>6.3}  integral = {b:.6}", theta);
    }
    println!("\nλ > 0 needs spanning directions; a single line of atoms fails \
              in the perpendicular direction");
    Ok(())
}
