//! Sampled fields on uniform lattices and the grid application of the
//! directional operator (−∂²₁)^s + (−∂²₂)^s.
//!
//! Nodes sit on the absolute lattice x = i·h (i ∈ ℤ), so grids of different
//! resolution over the same domain share node positions.  A node is interior
//! exactly when its position lies in Ω; all other nodes hold the value 0,
//! which is also what any query outside Ω returns (the Dirichlet exterior
//! condition u = 0 on ℝ²∖Ω).

use std::collections::HashMap;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::geometry::{Domain, Point};
use crate::{Error, Result};

use super::weights::directional_weights;
use super::{c1s, check_s};

/// A sampled field on a uniform lattice, extended by zero outside Ω.
#[derive(Debug, Clone)]
pub struct GridFunction {
    /// Position of node (0, 0); an exact lattice multiple of `h`.
    pub origin: Point,
    /// Grid spacing.
    pub h: f64,
    /// Node count along x.
    pub nx: usize,
    /// Node count along y (1 for line problems).
    pub ny: usize,
    /// Hölder exponent the field is associated with (recorded in exports).
    pub s: f64,
    /// Row-major node values (index j·nx + i); exactly 0 off the interior.
    values: Vec<f64>,
    /// Interior mask (node position strictly inside Ω).
    interior: Vec<bool>,
    /// The domain, when the field is attached to one.
    pub domain: Option<Domain>,
}

#[derive(Serialize)]
struct Sidecar {
    origin: [f64; 2],
    h: f64,
    nx: usize,
    ny: usize,
    s: f64,
}

impl GridFunction {
    /// Samples `f` on the lattice covering Ω's bounding box plus one tail
    /// cell on every side; nodes outside Ω get the value 0.
    pub fn sample<F: Fn(Point) -> f64>(dom: &Domain, h: f64, s: f64, f: F) -> Result<Self> {
        check_s(s)?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid spacing h = {h} must be > 0")));
        }
        let (lo, hi) = dom.bbox();
        let i_min = (lo.x / h).floor() as i64 - 1;
        let i_max = (hi.x / h).ceil() as i64 + 1;
        let j_min = (lo.y / h).floor() as i64 - 1;
        let j_max = (hi.y / h).ceil() as i64 + 1;
        let nx = (i_max - i_min + 1) as usize;
        let ny = (j_max - j_min + 1) as usize;
        if nx.saturating_mul(ny) > 40_000_000 {
            return Err(Error::InvalidParameter(format!(
                "grid {nx}×{ny} exceeds the 4·10⁷ node budget; raise h"
            )));
        }
        let origin = Point::new(i_min as f64 * h, j_min as f64 * h);
        let mut values = vec![0.0; nx * ny];
        let mut interior = vec![false; nx * ny];
        let mut count = 0usize;
        for j in 0..ny {
            for i in 0..nx {
                let p = Point::new(origin.x + i as f64 * h, origin.y + j as f64 * h);
                if dom.contains(p) {
                    let v = f(p);
                    if !v.is_finite() {
                        return Err(Error::InvalidParameter(format!(
                            "sampled value at ({}, {}) is not finite",
                            p.x, p.y
                        )));
                    }
                    let idx = j * nx + i;
                    values[idx] = v;
                    interior[idx] = true;
                    count += 1;
                }
            }
        }
        if count == 0 {
            return Err(Error::Precondition(
                "domain interior contains no grid node at this spacing".into(),
            ));
        }
        Ok(GridFunction { origin, h, nx, ny, s, values, interior, domain: Some(dom.clone()) })
    }

    /// A field from explicit parts (solver output path). Non-interior
    /// entries of `values` must be 0.
    pub(crate) fn from_parts(
        origin: Point,
        h: f64,
        nx: usize,
        ny: usize,
        s: f64,
        values: Vec<f64>,
        interior: Vec<bool>,
        domain: Option<Domain>,
    ) -> Self {
        debug_assert_eq!(values.len(), nx * ny);
        debug_assert_eq!(interior.len(), nx * ny);
        debug_assert!(values
            .iter()
            .zip(interior.iter())
            .all(|(v, int)| *int || *v == 0.0));
        GridFunction { origin, h, nx, ny, s, values, interior, domain }
    }

    /// Same lattice and mask, all values zero.
    pub fn zeros_like(&self) -> Self {
        GridFunction {
            origin: self.origin,
            h: self.h,
            nx: self.nx,
            ny: self.ny,
            s: self.s,
            values: vec![0.0; self.values.len()],
            interior: self.interior.clone(),
            domain: self.domain.clone(),
        }
    }

    pub fn node_point(&self, i: usize, j: usize) -> Point {
        Point::new(self.origin.x + i as f64 * self.h, self.origin.y + j as f64 * self.h)
    }

    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        self.interior[j * self.nx + i]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    /// Sets an interior node value (no-op target for exterior nodes is an
    /// error: the zero extension is an invariant, not a default).
    pub fn set_value(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        let idx = j * self.nx + i;
        if !self.interior[idx] {
            return Err(Error::InvalidParameter(format!(
                "node ({i}, {j}) is not interior; exterior values are fixed at 0"
            )));
        }
        self.values[idx] = v;
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interior_mask(&self) -> &[bool] {
        &self.interior
    }

    pub fn interior_count(&self) -> usize {
        self.interior.iter().filter(|b| **b).count()
    }

    /// Maximum |value| over interior nodes.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn node_or_zero(&self, i: i64, j: i64) -> f64 {
        if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
            0.0
        } else {
            self.values[j as usize * self.nx + i as usize]
        }
    }

    /// Field value at an arbitrary point: exactly 0 outside Ω (and off the
    /// lattice coverage), Catmull-Rom cubic interpolation of the zero-
    /// extended node values inside.
    pub fn eval(&self, p: Point) -> f64 {
        if let Some(dom) = &self.domain {
            if !dom.contains(p) {
                return 0.0;
            }
        }
        let gx = (p.x - self.origin.x) / self.h;
        let gy = (p.y - self.origin.y) / self.h;
        if self.ny == 1 {
            if (gy).abs() > 1e-9 {
                return 0.0;
            }
            let i0 = gx.floor();
            let tx = gx - i0;
            let i0 = i0 as i64;
            let col: Vec<f64> = (-1..3).map(|di| self.node_or_zero(i0 + di, 0)).collect();
            return catmull_rom(&col, tx);
        }
        let i0 = gx.floor();
        let j0 = gy.floor();
        let tx = gx - i0;
        let ty = gy - j0;
        let (i0, j0) = (i0 as i64, j0 as i64);
        let mut rows = [0.0; 4];
        for (r, dj) in (-1..3).enumerate() {
            let line: Vec<f64> = (-1..3).map(|di| self.node_or_zero(i0 + di, j0 + dj)).collect();
            rows[r] = catmull_rom(&line, tx);
        }
        catmull_rom(&rows, ty)
    }

    /// Writes the `i,j,x,y,value,interior_flag` CSV (17 significant digits,
    /// `\n` line endings: byte-identical across runs for equal inputs).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "i,j,x,y,value,interior_flag")?;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let p = self.node_point(i, j);
                writeln!(
                    out,
                    "{i},{j},{:.16e},{:.16e},{:.16e},{}",
                    p.x,
                    p.y,
                    self.values[j * self.nx + i],
                    u8::from(self.interior[j * self.nx + i])
                )?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Writes the JSON sidecar {origin, h, nx, ny, s} next to the CSV.
    pub fn write_sidecar(&self, path: &Path) -> Result<()> {
        let sidecar = Sidecar {
            origin: [self.origin.x, self.origin.y],
            h: self.h,
            nx: self.nx,
            ny: self.ny,
            s: self.s,
        };
        std::fs::write(path, serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }
}

/// Uniform Catmull-Rom cubic through 4 consecutive samples, evaluated at
/// parameter t ∈ [0, 1] between the middle two.
fn catmull_rom(v: &[f64], t: f64) -> f64 {
    let (v0, v1, v2, v3) = (v[0], v[1], v[2], v[3]);
    0.5 * (2.0 * v1
        + t * ((v2 - v0)
            + t * ((2.0 * v0 - 5.0 * v1 + 4.0 * v2 - v3)
                + t * (3.0 * (v1 - v2) + v3 - v0))))
}

/// Applies (−∂²₁)^s + (−∂²₂)^s at every interior node via the
/// closed-form line weights; non-interior nodes stay 0.
pub fn apply_ri_grid(u: &GridFunction, s: f64) -> Result<GridFunction> {
    check_s(s)?;
    if u.interior_count() == 0 {
        return Err(Error::Precondition("no interior grid node to apply the operator at".into()));
    }
    let mut out = u.zeros_like();
    out.s = s;
    let scale = c1s(s) * u.h.powf(-2.0 * s);
    let mut cache: HashMap<usize, super::weights::DirectionalWeights> = HashMap::new();

    // Rows (x-direction): contiguous windows in memory.
    for j in 0..u.ny {
        let row = &u.values[j * u.nx..(j + 1) * u.nx];
        let mask = &u.interior[j * u.nx..(j + 1) * u.nx];
        let Some((a, b)) = window(mask) else { continue };
        let m = (b - a + 1).max(2);
        let w = cache
            .entry(m)
            .or_insert_with(|| directional_weights(s, m).expect("validated parameters"));
        for i in a..=b {
            if mask[i] {
                out.values[j * u.nx + i] +=
                    scale * w.second_difference_sum(&row[a..=b], i - a, 0.0);
            }
        }
    }
    // Columns (y-direction): gathered windows.
    let mut col = vec![0.0; u.ny];
    let mut colmask = vec![false; u.ny];
    for i in 0..u.nx {
        for j in 0..u.ny {
            col[j] = u.values[j * u.nx + i];
            colmask[j] = u.interior[j * u.nx + i];
        }
        let Some((a, b)) = window(&colmask) else { continue };
        let m = (b - a + 1).max(2);
        let w = cache
            .entry(m)
            .or_insert_with(|| directional_weights(s, m).expect("validated parameters"));
        for j in a..=b {
            if colmask[j] {
                out.values[j * u.nx + i] +=
                    scale * w.second_difference_sum(&col[a..=b], j - a, 0.0);
            }
        }
    }
    Ok(out)
}

/// First and last `true` index of a mask, if any.
fn window(mask: &[bool]) -> Option<(usize, usize)> {
    let a = mask.iter().position(|b| *b)?;
    let b = mask.iter().rposition(|b| *b)?;
    Some((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;
    use crate::operator::barrier;
    use approx::assert_relative_eq;

    fn unit_ball() -> Domain {
        Domain::ball(Point::ORIGIN, 1.0).unwrap()
    }

    #[test]
    fn sampling_masks_and_zero_extension() {
        let g = GridFunction::sample(&unit_ball(), 0.25, 0.5, |_| 1.0).unwrap();
        // Lattice covers bbox + one tail cell: indices −5..5 → 11 nodes.
        assert_eq!((g.nx, g.ny), (11, 11));
        assert!(g.is_interior(5, 5));
        assert_eq!(g.value(5, 5), 1.0);
        assert!(!g.is_interior(0, 0));
        assert_eq!(g.value(0, 0), 0.0);
        // Boundary node (1, 0): |x| = 1 is not interior (strict containment).
        assert!(!g.is_interior(9, 5));
        // Point queries outside Ω are exactly zero.
        assert_eq!(g.eval(pt(2.0, 0.0)), 0.0);
        assert_eq!(g.eval(pt(0.9999, 0.9999)), 0.0);
    }

    #[test]
    fn eval_reproduces_quadratics_inside() {
        // Catmull-Rom interpolation is exact on quadratics away from the
        // zero-extension boundary layer.
        let f = |p: Point| 1.0 + p.x + 2.0 * p.y + p.x * p.x + p.x * p.y + p.y * p.y;
        let g = GridFunction::sample(&unit_ball(), 0.0625, 0.5, f).unwrap();
        for p in [pt(0.03, 0.11), pt(-0.21, 0.17), pt(0.4, -0.33)] {
            assert_relative_eq!(g.eval(p), f(p), max_relative = 1e-12);
        }
    }

    #[test]
    fn operator_on_zero_field_is_zero() {
        let g = GridFunction::sample(&unit_ball(), 0.125, 0.5, |_| 0.0).unwrap();
        let lg = apply_ri_grid(&g, 0.5).unwrap();
        assert!(lg.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn barrier_field_is_near_constant_in_the_bulk() {
        // L(1−|x|²)^s₊ = 2Γ(2) = 2 for s = ½; at h = 2^{−8} the grid values
        // must be ≈ 2 wherever d(x) ≥ 0.2.
        let s = 0.5;
        let h = 2f64.powi(-8);
        let dom = unit_ball();
        let g = GridFunction::sample(&dom, h, s, |p| barrier(p, s)).unwrap();
        let lg = apply_ri_grid(&g, s).unwrap();
        let mut worst = 0.0f64;
        for j in 0..g.ny {
            for i in 0..g.nx {
                if !g.is_interior(i, j) {
                    continue;
                }
                let p = g.node_point(i, j);
                if dom.dist_to_boundary(p) >= 0.2 {
                    worst = worst.max((lg.value(i, j) - 2.0).abs());
                }
            }
        }
        assert!(worst <= 5e-2, "max deviation {worst}");
    }

    #[test]
    fn interior_max_has_nonnegative_operator_value() {
        // u ≥ 0 with an interior max at x₀ ⇒ (Lu)(x₀) ≥ 0 by weight
        // positivity.
        let dom = unit_ball();
        let g = GridFunction::sample(&dom, 0.0625, 0.5, |p| (1.0 - p.norm_sq()).max(0.0)).unwrap();
        let lg = apply_ri_grid(&g, 0.5).unwrap();
        let mut best = (0, 0, f64::MIN);
        for j in 0..g.ny {
            for i in 0..g.nx {
                if g.is_interior(i, j) && g.value(i, j) > best.2 {
                    best = (i, j, g.value(i, j));
                }
            }
        }
        assert!(lg.value(best.0, best.1) >= 0.0);
    }

    #[test]
    fn grid_values_converge_to_pointwise_operator() {
        // Smooth compactly-supported u: grid operator converges to the
        // quadrature value with the discrepancy roughly halving per
        // refinement.
        use crate::measure::SpectralMeasure;
        use crate::operator::{apply_l_point, QuadratureConfig};
        let u = |p: Point| {
            let q = 1.0 - p.norm_sq();
            if q > 0.0 {
                q * q * q
            } else {
                0.0
            }
        };
        let x = pt(0.1875, -0.25); // lattice point at every h below
        let oracle = apply_l_point(
            &u,
            x,
            &SpectralMeasure::axes(),
            0.5,
            &QuadratureConfig::for_compact_support(1.0, 1.0),
        )
        .unwrap();
        let dom = unit_ball();
        let mut errs = Vec::new();
        for k in [4, 5, 6] {
            let h = 2f64.powi(-k);
            let g = GridFunction::sample(&dom, h, 0.5, u).unwrap();
            let lg = apply_ri_grid(&g, 0.5).unwrap();
            let i = ((x.x - g.origin.x) / h).round() as usize;
            let j = ((x.y - g.origin.y) / h).round() as usize;
            assert!(g.is_interior(i, j));
            errs.push((lg.value(i, j) - oracle).abs());
        }
        assert!(errs[2] < errs[0], "no convergence: {errs:?}");
        // Factor-of-two reduction per step, within slack 1.5.
        assert!(errs[2] <= errs[1] / 2.0 * 1.5 + 1e-4, "{errs:?}");
        assert!(errs[1] <= errs[0] / 2.0 * 1.5 + 1e-4, "{errs:?}");
    }

    #[test]
    fn csv_and_sidecar_are_deterministic() {
        let dir = std::env::temp_dir().join("afrac_grid_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let g = GridFunction::sample(&unit_ball(), 0.25, 0.5, |p| p.x + p.y).unwrap();
        let p1 = dir.join("a.csv");
        let p2 = dir.join("b.csv");
        g.write_csv(&p1).unwrap();
        g.write_csv(&p2).unwrap();
        let b1 = std::fs::read(&p1).unwrap();
        assert_eq!(b1, std::fs::read(&p2).unwrap());
        let text = String::from_utf8(b1).unwrap();
        assert!(text.starts_with("i,j,x,y,value,interior_flag\n"));
        assert!(!text.contains('\r'));
        let side = dir.join("a.json");
        g.write_sidecar(&side).unwrap();
        let parsed: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&side).unwrap()).unwrap();
        assert_eq!(parsed["h"], 0.25);
        assert_eq!(parsed["nx"], 11);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn exterior_writes_are_rejected() {
        let mut g = GridFunction::sample(&unit_ball(), 0.25, 0.5, |_| 1.0).unwrap();
        assert!(g.set_value(0, 0, 1.0).is_err());
        assert!(g.set_value(5, 5, 2.0).is_ok());
    }
}
