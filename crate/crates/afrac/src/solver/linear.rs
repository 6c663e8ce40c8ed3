//! Explicit sparse form of the discrete Dirichlet operator.
//!
//! One row per interior node; within a grid line every interior pair at
//! distance k couples with −scale·W_k, and the diagonal carries
//! 2·scale·(ΣW + tail) per axis.  Couplings to exterior nodes are folded
//! into the right-hand side as zeros, which is exactly the Dirichlet
//! condition, so the matrix is strictly diagonally dominant: a symmetric
//! M-matrix, hence positive definite and inverse-positive.

use crate::operator::GridFunction;
use crate::{Error, Result};

use super::{cg, LineOperator, SolveStats};

/// CSR matrix over the interior unknowns, plus the lattice it came from.
pub struct LinearSystem {
    template: GridFunction,
    nodes: Vec<(usize, usize)>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
    diagonal: Vec<f64>,
    h: f64,
}

/// Unknown-count threshold below which a dense Cholesky factorization is
/// used instead of conjugate gradient.
const DIRECT_LIMIT: usize = 3000;

impl LinearSystem {
    pub(crate) fn build(grid: &GridFunction, s: f64, fx: f64, fy: f64) -> Result<Self> {
        let op = LineOperator::new(grid, s, fx, fy)?;
        let n = op.unknowns();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut couple = |line_nodes: &[usize], scale: f64, m: usize| {
            let w = &op.weights[&m];
            for (o, &idx) in line_nodes.iter().enumerate() {
                if idx == usize::MAX {
                    continue;
                }
                for (o2, &idx2) in line_nodes.iter().enumerate() {
                    if o2 == o || idx2 == usize::MAX {
                        continue;
                    }
                    adj[idx].push((idx2, -scale * w.weight(o.abs_diff(o2))));
                }
            }
        };
        let mut line_buf: Vec<usize> = Vec::new();
        for &(a, len, j) in &op.rows {
            line_buf.clear();
            line_buf.extend((0..len).map(|o| op.index[j * op.nx + a + o]));
            couple(&line_buf, op.scale_x, len.max(2));
        }
        for &(a, len, i) in &op.cols {
            line_buf.clear();
            line_buf.extend((0..len).map(|o| op.index[(a + o) * op.nx + i]));
            couple(&line_buf, op.scale_y, len.max(2));
        }
        drop(couple);

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (i, row) in adj.iter_mut().enumerate() {
            row.push((i, op.diagonal[i]));
            row.sort_unstable_by_key(|e| e.0);
            for &(c, v) in row.iter() {
                // Merge duplicates (possible only if both axes produced the
                // same pair, which the geometry rules out; kept for safety).
                if col_idx.last() == Some(&c) && vals.len() > row_ptr[i] {
                    *vals.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        let mut template = grid.zeros_like();
        template.s = s;
        Ok(LinearSystem {
            template,
            nodes: op.nodes,
            row_ptr,
            col_idx,
            vals,
            diagonal: op.diagonal,
            h: grid.h,
        })
    }

    /// Number of interior unknowns.
    pub fn unknowns(&self) -> usize {
        self.nodes.len()
    }

    /// Stored nonzero entries.
    pub fn nonzeros(&self) -> usize {
        self.vals.len()
    }

    /// Grid position (i, j) of each unknown, in system order.
    pub fn node_list(&self) -> &[(usize, usize)] {
        &self.nodes
    }

    /// Position of lattice node (0, 0).
    pub fn grid_origin(&self) -> crate::geometry::Point {
        self.template.origin
    }

    /// Grid spacing.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// y = A·x.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.unknowns());
        let mut y = vec![0.0; x.len()];
        for i in 0..x.len() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
        y
    }

    /// Checks the M-matrix sign pattern and strict diagonal dominance:
    /// diagonal > 0, off-diagonals ≤ tol, and diag ≥ Σ|off-diag| − tol.
    pub fn check_m_matrix(&self, tol: f64) -> Result<()> {
        for i in 0..self.unknowns() {
            let mut diag = None;
            let mut off_sum = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let (c, v) = (self.col_idx[k], self.vals[k]);
                if c == i {
                    diag = Some(v);
                } else {
                    if v > tol {
                        return Err(Error::SolverFailed(format!(
                            "positive off-diagonal {v:e} in row {i}, column {c}"
                        )));
                    }
                    off_sum += v.abs();
                }
            }
            let d = diag.ok_or_else(|| {
                Error::SolverFailed(format!("missing diagonal in row {i}"))
            })?;
            if !(d > 0.0) {
                return Err(Error::SolverFailed(format!(
                    "non-positive diagonal {d:e} in row {i}"
                )));
            }
            if d < off_sum - tol.max(1e-12 * d) {
                return Err(Error::SolverFailed(format!(
                    "row {i} not diagonally dominant: {d:e} < {off_sum:e}"
                )));
            }
        }
        Ok(())
    }

    /// Checks Aᵀ = A entrywise within `tol` (relative to the entry size).
    pub fn check_symmetry(&self, tol: f64) -> Result<()> {
        for i in 0..self.unknowns() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let (j, v) = (self.col_idx[k], self.vals[k]);
                let vt = self.entry(j, i);
                if (v - vt).abs() > tol * v.abs().max(1.0) {
                    return Err(Error::SolverFailed(format!(
                        "asymmetry at ({i}, {j}): {v:e} vs {vt:e}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(pos) => self.vals[self.row_ptr[i] + pos],
            Err(_) => 0.0,
        }
    }

    /// Extracts a field's interior values in system order; the field must
    /// live on this system's lattice.
    pub fn restrict(&self, g: &GridFunction) -> Result<Vec<f64>> {
        let t = &self.template;
        let same = g.nx == t.nx
            && g.ny == t.ny
            && (g.h - t.h).abs() <= 1e-12 * t.h
            && (g.origin.x - t.origin.x).abs() <= 1e-12
            && (g.origin.y - t.origin.y).abs() <= 1e-12;
        if !same {
            return Err(Error::Precondition(format!(
                "field lattice {}×{} at h = {} does not match the system lattice {}×{} at h = {}",
                g.nx, g.ny, g.h, t.nx, t.ny, t.h
            )));
        }
        Ok(self.nodes.iter().map(|&(i, j)| g.value(i, j)).collect())
    }

    /// Scatters system-ordered values back onto the lattice (exterior 0).
    pub fn prolong(&self, u: &[f64]) -> GridFunction {
        assert_eq!(u.len(), self.unknowns());
        let mut out = self.template.clone();
        for (k, &(i, j)) in self.nodes.iter().enumerate() {
            out.set_value(i, j, u[k]).expect("system nodes are interior");
        }
        out
    }

    /// Solves A·u = b: dense Cholesky with iterative refinement below
    /// 3000 unknowns, Jacobi-preconditioned conjugate gradient above.
    /// Fails if the final relative residual exceeds `lin_tol`.
    pub fn solve_rhs(&self, b: &[f64], lin_tol: f64) -> Result<(Vec<f64>, SolveStats)> {
        let n = self.unknowns();
        if b.len() != n {
            return Err(Error::InvalidParameter(format!(
                "right-hand side length {} does not match {} unknowns",
                b.len(),
                n
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("right-hand side not finite".into()));
        }
        if !(lin_tol > 0.0 && lin_tol < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lin_tol = {lin_tol} outside (0, 1)"
            )));
        }
        let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm_b == 0.0 {
            let stats = SolveStats { residual: 0.0, iterations: 0, h: self.h, unknowns: n };
            return Ok((vec![0.0; n], stats));
        }
        let (u, iterations) = if n < DIRECT_LIMIT {
            (self.solve_direct(b)?, 0)
        } else {
            let (u, _, its) =
                cg(|x, y| y.copy_from_slice(&self.apply(x)), &self.diagonal, b, lin_tol)?;
            (u, its)
        };
        let au = self.apply(&u);
        let residual = b
            .iter()
            .zip(&au)
            .map(|(bi, ai)| (bi - ai) * (bi - ai))
            .sum::<f64>()
            .sqrt()
            / norm_b;
        if residual > lin_tol {
            return Err(Error::SolverFailed(format!(
                "final relative residual {residual:e} exceeds the tolerance {lin_tol:e}"
            )));
        }
        let stats = SolveStats { residual, iterations, h: self.h, unknowns: n };
        Ok((u, stats))
    }

    /// Dense Cholesky LLᵀ solve with two rounds of iterative refinement.
    fn solve_direct(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.unknowns();
        let mut l = vec![0.0f64; n * n];
        for i in 0..n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                if j <= i {
                    l[i * n + j] = self.vals[k];
                }
            }
        }
        for j in 0..n {
            let mut d = l[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) {
                return Err(Error::SolverFailed(format!(
                    "Cholesky pivot {d:e} at column {j}: matrix not positive definite"
                )));
            }
            let dj = d.sqrt();
            l[j * n + j] = dj;
            for i in j + 1..n {
                let mut acc = l[i * n + j];
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                for (a, b) in ri.iter().zip(rj) {
                    acc -= a * b;
                }
                l[i * n + j] = acc / dj;
            }
        }
        let substitute = |rhs: &[f64]| -> Vec<f64> {
            let mut y = vec![0.0; n];
            for i in 0..n {
                let mut acc = rhs[i];
                for (a, b) in l[i * n..i * n + i].iter().zip(&y[..i]) {
                    acc -= a * b;
                }
                y[i] = acc / l[i * n + i];
            }
            let mut x = vec![0.0; n];
            for i in (0..n).rev() {
                let mut acc = y[i];
                for j in i + 1..n {
                    acc -= l[j * n + i] * x[j];
                }
                x[i] = acc / l[i * n + i];
            }
            x
        };
        let mut u = substitute(b);
        for _ in 0..2 {
            let au = self.apply(&u);
            let r: Vec<f64> = b.iter().zip(&au).map(|(bi, ai)| bi - ai).collect();
            let du = substitute(&r);
            for (ui, di) in u.iter_mut().zip(&du) {
                *ui += di;
            }
        }
        Ok(u)
    }
}
