//! Spectral measures on the unit circle: the anisotropy of the operator.
//!
//! A measure is a finite list of nonnegative Dirac atoms at unit directions
//! plus (in dimension 2) a piecewise-constant angular density.  The two
//! derived quantities used throughout are the total mass Λ and the
//! directional coercivity constant λ = inf_ϖ ∫ |ω·ϖ|^{2s} da(ω).

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::quad::{self, QuadOpts};
use crate::{Error, Result};

/// A Dirac atom: unit direction with nonnegative weight.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Atom {
    /// Unit direction in the plane (for dimension 1 the second entry is 0).
    pub direction: [f64; 2],
    /// Nonnegative mass.
    pub weight: f64,
}

/// One piecewise-constant density piece on an angular interval (radians).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DensityPiece {
    /// Interval start angle.
    pub from: f64,
    /// Interval end angle (`from < to`, `to − from ≤ 2π`).
    pub to: f64,
    /// Constant nonnegative density value on the interval.
    pub value: f64,
}

/// A nonnegative spectral measure on S^{n−1} (n = 1 or 2).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralMeasure {
    /// Ambient dimension n (1 or 2); density pieces require n = 2.
    pub dimension: usize,
    /// Dirac atoms.
    pub atoms: Vec<Atom>,
    /// Piecewise-constant angular density (n = 2 only).
    pub density: Vec<DensityPiece>,
}

const UNIT_TOL: f64 = 1e-9;

impl SpectralMeasure {
    /// Validating constructor.
    pub fn new(dimension: usize, atoms: Vec<Atom>, density: Vec<DensityPiece>) -> Result<Self> {
        if dimension == 0 || dimension > 2 {
            return Err(Error::InvalidParameter(format!(
                "supported dimensions are 1 and 2, got {dimension}"
            )));
        }
        if dimension == 1 && !density.is_empty() {
            return Err(Error::InvalidParameter(
                "density pieces require dimension 2".into(),
            ));
        }
        for a in &atoms {
            let norm = (a.direction[0].powi(2) + a.direction[1].powi(2)).sqrt();
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidParameter(format!(
                    "atom direction ({}, {}) is not a unit vector",
                    a.direction[0], a.direction[1]
                )));
            }
            if dimension == 1 && a.direction[1] != 0.0 {
                return Err(Error::InvalidParameter(
                    "dimension-1 atoms must point along ±e1".into(),
                ));
            }
            if !(a.weight >= 0.0) || !a.weight.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "atom weight {} must be finite and ≥ 0",
                    a.weight
                )));
            }
        }
        for p in &density {
            if !(p.from < p.to) || p.to - p.from > TAU + 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "density interval [{}, {}] must be increasing with length ≤ 2π",
                    p.from, p.to
                )));
            }
            if !(p.value >= 0.0) || !p.value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "density value {} must be finite and ≥ 0",
                    p.value
                )));
            }
        }
        Ok(SpectralMeasure { dimension, atoms, density })
    }

    /// The four-atom axis measure: unit atoms at ±e₁ and ±e₂.
    ///
    /// With the crate normalization this realizes the operator
    /// (−∂²₁)ˢ + (−∂²₂)ˢ, the one discretized by the grid solver.
    pub fn axes() -> Self {
        SpectralMeasure {
            dimension: 2,
            atoms: vec![
                Atom { direction: [1.0, 0.0], weight: 1.0 },
                Atom { direction: [-1.0, 0.0], weight: 1.0 },
                Atom { direction: [0.0, 1.0], weight: 1.0 },
                Atom { direction: [0.0, -1.0], weight: 1.0 },
            ],
            density: Vec::new(),
        }
    }

    /// Atoms given as (angle in radians, weight).
    pub fn from_angle_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let atoms = atoms
            .iter()
            .map(|&(ang, w)| Atom { direction: [ang.cos(), ang.sin()], weight: w })
            .collect();
        SpectralMeasure::new(2, atoms, Vec::new())
    }

    /// Constant density `value` on all of S¹, no atoms.
    pub fn uniform_density(value: f64) -> Result<Self> {
        SpectralMeasure::new(
            2,
            Vec::new(),
            vec![DensityPiece { from: 0.0, to: TAU, value }],
        )
    }

    /// Parses the config literals `atoms = [(angle_deg, weight), ...]` and
    /// `density = [(from_deg, to_deg, value), ...]` (either may be absent,
    /// not both).
    pub fn from_config_literals(atoms: Option<&str>, density: Option<&str>) -> Result<Self> {
        let mut atom_list = Vec::new();
        if let Some(text) = atoms {
            for tup in parse_tuple_list(text)? {
                if tup.len() != 2 {
                    return Err(Error::Config(format!(
                        "atom tuples are (angle_deg, weight), got {} entries",
                        tup.len()
                    )));
                }
                let ang = tup[0].to_radians();
                atom_list.push(Atom { direction: [ang.cos(), ang.sin()], weight: tup[1] });
            }
        }
        let mut pieces = Vec::new();
        if let Some(text) = density {
            for tup in parse_tuple_list(text)? {
                if tup.len() != 3 {
                    return Err(Error::Config(format!(
                        "density tuples are (from_deg, to_deg, value), got {} entries",
                        tup.len()
                    )));
                }
                pieces.push(DensityPiece {
                    from: tup[0].to_radians(),
                    to: tup[1].to_radians(),
                    value: tup[2],
                });
            }
        }
        if atom_list.is_empty() && pieces.is_empty() {
            return Err(Error::Config("measure literal defines no atoms and no density".into()));
        }
        SpectralMeasure::new(2, atom_list, pieces)
    }

    /// Total mass Λ = ∫ da: atom weights summed, density integrated exactly.
    pub fn total_mass(&self) -> f64 {
        let atom_mass: f64 = self.atoms.iter().map(|a| a.weight).sum();
        let density_mass: f64 = self.density.iter().map(|p| (p.to - p.from) * p.value).sum();
        atom_mass + density_mass
    }

    /// The coercivity integrand of one probe direction:
    /// B(θ) = ∫ |ω·ϖ(θ)|^{2s} da(ω) with ϖ(θ) = (cos θ, sin θ).
    ///
    /// Atoms contribute `weight·|ω·ϖ|^{2s}`; density pieces are integrated
    /// adaptively to relative tolerance 1e−8.
    pub fn directional_coercivity(&self, s: f64, theta: f64) -> Result<f64> {
        check_s(s)?;
        if self.total_mass() == 0.0 {
            return Err(Error::DegenerateMeasure("measure has zero total mass".into()));
        }
        let opts = QuadOpts { rel_tol: 1e-8, ..Default::default() };
        let probe = [theta.cos(), theta.sin()];
        let mut total = 0.0;
        for a in &self.atoms {
            let dot = a.direction[0] * probe[0] + a.direction[1] * probe[1];
            total += a.weight * dot.abs().powf(2.0 * s);
        }
        for p in &self.density {
            // |cos(φ−θ)|^{2s} has C^{2s} kinks where cos vanishes; seed
            // those angles as breakpoints.
            let mut breaks = vec![p.from, p.to];
            let mut z = theta + PI / 2.0 + (((p.from - theta) / PI).floor() - 1.0) * PI;
            while z < p.to {
                if z > p.from {
                    breaks.push(z);
                }
                z += PI;
            }
            breaks.sort_by(f64::total_cmp);
            let integral = quad::integrate_with_breaks(
                |phi: f64| (phi - theta).cos().abs().powf(2.0 * s),
                &breaks,
                &opts,
            )?
            .ensure_converged()?;
            total += p.value * integral;
        }
        Ok(total)
    }

    /// Directional coercivity λ estimated as the minimum over `sample_count`
    /// equispaced probe directions of [`directional_coercivity`].  The
    /// result is an upper estimate of λ that converges to λ as
    /// `sample_count → ∞`.
    pub fn ellipticity_lambda(&self, s: f64, sample_count: usize) -> Result<f64> {
        if sample_count == 0 {
            return Err(Error::InvalidParameter("sample_count must be ≥ 1".into()));
        }
        let mut min = f64::INFINITY;
        for j in 0..sample_count {
            let theta = TAU * j as f64 / sample_count as f64;
            let total = self.directional_coercivity(s, theta)?;
            if total < min {
                min = total;
            }
        }
        Ok(min)
    }

    /// Even part of the measure: atoms split into equal ±ω pairs, density
    /// averaged with its antipodal translate.  Total mass is preserved and
    /// the operator is unchanged (it already averages over ±ρω).
    pub fn symmetrize(&self) -> Self {
        let mut atoms: Vec<Atom> = Vec::new();
        let mut push_atom = |direction: [f64; 2], weight: f64| {
            for existing in atoms.iter_mut() {
                let d = ((existing.direction[0] - direction[0]).powi(2)
                    + (existing.direction[1] - direction[1]).powi(2))
                .sqrt();
                if d < 1e-12 {
                    existing.weight += weight;
                    return;
                }
            }
            atoms.push(Atom { direction, weight });
        };
        for a in &self.atoms {
            push_atom(canonical_direction(a.direction), 0.5 * a.weight);
            push_atom(
                canonical_direction([-a.direction[0], -a.direction[1]]),
                0.5 * a.weight,
            );
        }
        atoms.sort_by(|a, b| {
            angle_of(a.direction).total_cmp(&angle_of(b.direction))
        });

        let mut density: Vec<DensityPiece> = Vec::new();
        for p in &self.density {
            for piece in normalize_piece(p.from, p.to, 0.5 * p.value) {
                density.push(piece);
            }
            for piece in normalize_piece(p.from + PI, p.to + PI, 0.5 * p.value) {
                density.push(piece);
            }
        }
        let density = merge_pieces(density);

        SpectralMeasure { dimension: self.dimension, atoms, density }
    }

    /// Density value at an angle (sum of covering pieces), for queries/tests.
    pub fn density_value_at(&self, angle: f64) -> f64 {
        let a = angle.rem_euclid(TAU);
        let mut v = 0.0;
        for p in &self.density {
            // Compare against the piece interval translated by full turns.
            for shift in [-TAU, 0.0, TAU] {
                let x = a + shift;
                if x >= p.from && x < p.to {
                    v += p.value;
                }
            }
        }
        v
    }

    /// Whether the measure is even (invariant under ω ↦ −ω) up to `tol`,
    /// probed on atoms exactly and on the density at `probes` angles.
    pub fn is_even(&self, tol: f64, probes: usize) -> bool {
        for a in &self.atoms {
            let w_here: f64 = self.atom_weight_at([a.direction[0], a.direction[1]]);
            let w_opp: f64 = self.atom_weight_at([-a.direction[0], -a.direction[1]]);
            if (w_here - w_opp).abs() > tol {
                return false;
            }
        }
        for j in 0..probes {
            let ang = TAU * (j as f64 + 0.37) / probes as f64;
            if (self.density_value_at(ang) - self.density_value_at(ang + PI)).abs() > tol {
                return false;
            }
        }
        true
    }

    fn atom_weight_at(&self, direction: [f64; 2]) -> f64 {
        self.atoms
            .iter()
            .filter(|a| {
                ((a.direction[0] - direction[0]).powi(2)
                    + (a.direction[1] - direction[1]).powi(2))
                .sqrt()
                    < 1e-12
            })
            .map(|a| a.weight)
            .sum()
    }

    /// Folds an axis-atom measure into per-axis masses (β₊+β₋ for each axis).
    ///
    /// Errors if any atom points off the coordinate axes or a density is
    /// present: the grid-line scheme only supports the directional operator.
    pub fn axis_masses(&self) -> Result<(f64, f64)> {
        if !self.density.is_empty() {
            return Err(Error::DegenerateMeasure(
                "grid scheme needs a pure axis-atom measure; density present".into(),
            ));
        }
        let mut mx = 0.0;
        let mut my = 0.0;
        for a in &self.atoms {
            let [dx, dy] = a.direction;
            if dy.abs() <= UNIT_TOL {
                mx += a.weight;
            } else if dx.abs() <= UNIT_TOL {
                my += a.weight;
            } else {
                return Err(Error::DegenerateMeasure(format!(
                    "atom at direction ({dx}, {dy}) is not on a coordinate axis"
                )));
            }
        }
        Ok((mx, my))
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("s must lie in (0,1), got {s}")));
    }
    Ok(())
}

fn angle_of(direction: [f64; 2]) -> f64 {
    direction[1].atan2(direction[0]).rem_euclid(TAU)
}

fn canonical_direction(direction: [f64; 2]) -> [f64; 2] {
    // Re-derive the direction from its angle so that antipodal images of
    // equal atoms merge exactly.
    let a = angle_of(direction);
    [a.cos(), a.sin()]
}

/// Normalizes a density piece into [0, 2π), splitting at the wrap point.
fn normalize_piece(from: f64, to: f64, value: f64) -> Vec<DensityPiece> {
    let len = to - from;
    let start = from.rem_euclid(TAU);
    let end = start + len;
    if end <= TAU + 1e-15 {
        vec![DensityPiece { from: start, to: end.min(TAU), value }]
    } else {
        vec![
            DensityPiece { from: start, to: TAU, value },
            DensityPiece { from: 0.0, to: end - TAU, value },
        ]
    }
}

/// Merges a list of pieces into a disjoint sorted piecewise representation.
fn merge_pieces(pieces: Vec<DensityPiece>) -> Vec<DensityPiece> {
    let mut cuts: Vec<f64> = Vec::new();
    for p in &pieces {
        cuts.push(p.from);
        cuts.push(p.to);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a < 1e-14 {
            continue;
        }
        let mid = 0.5 * (a + b);
        let v: f64 = pieces
            .iter()
            .filter(|p| mid >= p.from && mid < p.to)
            .map(|p| p.value)
            .sum();
        if v != 0.0 {
            // Merge with the previous piece when the value continues.
            if let Some(last) = out.last_mut() {
                let last: &mut DensityPiece = last;
                if (last.to - a).abs() < 1e-14 && (last.value - v).abs() < 1e-14 {
                    last.to = b;
                    continue;
                }
            }
            out.push(DensityPiece { from: a, to: b, value: v });
        }
    }
    out
}

/// Parses `[(a, b), (c, d, e), ...]` into rows of numbers.
pub(crate) fn parse_tuple_list(text: &str) -> Result<Vec<Vec<f64>>> {
    let t = text.trim();
    let inner = t
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::Config(format!("expected [...], got `{t}`")))?;
    let mut rows = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let open = rest
            .find('(')
            .ok_or_else(|| Error::Config(format!("expected `(` in tuple list near `{rest}`")))?;
        if !rest[..open].trim().trim_matches(',').trim().is_empty() {
            return Err(Error::Config(format!(
                "unexpected text `{}` between tuples",
                &rest[..open]
            )));
        }
        let close = rest[open..]
            .find(')')
            .map(|i| open + i)
            .ok_or_else(|| Error::Config("unbalanced parenthesis in tuple list".into()))?;
        let body = &rest[open + 1..close];
        let row: Vec<f64> = body
            .split(',')
            .map(|piece| {
                piece.trim().parse::<f64>().map_err(|_| {
                    Error::Config(format!("`{}` is not a number in tuple `{body}`", piece.trim()))
                })
            })
            .collect::<Result<_>>()?;
        if row.is_empty() {
            return Err(Error::Config("empty tuple in list".into()));
        }
        rows.push(row);
        rest = rest[close + 1..].trim().trim_start_matches(',').trim_start();
    }
    if rows.is_empty() {
        return Err(Error::Config("tuple list is empty".into()));
    }
    Ok(rows)
}
