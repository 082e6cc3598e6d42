//! Least-squares gradient fitting on node lattices.
//!
//! Every Poisson problem in this crate has the form
//! `min Σ_r w_r (Σ_k c_rk u_k − t_r)²` where each row `r` is a short
//! difference stencil and some nodes are pinned to zero. The normal
//! equations are a symmetric band system factored once per lattice and then
//! reused for any right-hand side.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::linalg::{BandCholesky, BandMatrix};

#[derive(Debug, Clone, Copy)]
pub(crate) struct StencilRow {
    pub weight: f64,
    pub taps: [(usize, f64); 2],
}

/// Factored normal equations of a stencil least-squares problem.
#[derive(Debug, Clone)]
pub struct GridLeastSquares {
    nodes: usize,
    rows: Vec<StencilRow>,
    unknown: Vec<Option<usize>>,
    factor: BandCholesky,
}

impl GridLeastSquares {
    pub(crate) fn new(nodes: usize, rows: Vec<StencilRow>, pinned: impl Fn(usize) -> bool) -> Result<Self> {
        let mut unknown = vec![None; nodes];
        let mut n = 0;
        for (node, slot) in unknown.iter_mut().enumerate() {
            if !pinned(node) {
                *slot = Some(n);
                n += 1;
            }
        }
        let mut bw = 0usize;
        for r in &rows {
            if let (Some(a), Some(b)) = (unknown[r.taps[0].0], unknown[r.taps[1].0]) {
                let (a, b): (usize, usize) = (a, b);
                bw = bw.max(a.abs_diff(b));
            }
        }
        let mut m = BandMatrix::zeros(n, bw);
        for r in &rows {
            for &(na, ca) in &r.taps {
                let Some(a) = unknown[na] else { continue };
                for &(nb, cb) in &r.taps {
                    let Some(b) = unknown[nb] else { continue };
                    if b <= a {
                        m.add(a, b, r.weight * ca * cb);
                    }
                }
            }
        }
        let factor = m.cholesky()?;
        Ok(Self {
            nodes,
            rows,
            unknown,
            factor,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    /// Solves for the node values given one target per stencil row.
    /// Pinned nodes are zero in the result.
    pub fn solve(&self, targets: &[f64]) -> Vec<f64> {
        assert_eq!(targets.len(), self.rows.len());
        let mut rhs = vec![0.0; self.factor.dim()];
        for (r, &t) in self.rows.iter().zip(targets) {
            if t == 0.0 {
                continue;
            }
            for &(node, c) in &r.taps {
                if let Some(u) = self.unknown[node] {
                    rhs[u] += r.weight * c * t;
                }
            }
        }
        self.factor.solve_in_place(&mut rhs);
        self.unknown
            .iter()
            .map(|u| u.map_or(0.0, |i| rhs[i]))
            .collect()
    }
}

/// Integrates a node-sampled gradient field into heights on a
/// `width × height` pixel grid, with zero height on the border.
///
/// Node gradients are averaged onto the grid edges, giving the standard
/// 5-point Laplacian system `∇²h = div g`.
#[derive(Debug, Clone)]
pub struct PoissonIntegrator {
    width: usize,
    height: usize,
    lsq: GridLeastSquares,
}

impl PoissonIntegrator {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(crate::error::invalid("integration grid must be at least 3×3"));
        }
        let idx = |x: usize, y: usize| y * width + x;
        let mut rows = Vec::with_capacity(2 * width * height);
        for y in 0..height {
            for x in 0..width - 1 {
                rows.push(StencilRow {
                    weight: 1.0,
                    taps: [(idx(x, y), -1.0), (idx(x + 1, y), 1.0)],
                });
            }
        }
        for y in 0..height - 1 {
            for x in 0..width {
                rows.push(StencilRow {
                    weight: 1.0,
                    taps: [(idx(x, y), -1.0), (idx(x, y + 1), 1.0)],
                });
            }
        }
        let lsq = GridLeastSquares::new(width * height, rows, |n| {
            let (x, y) = (n % width, n / width);
            x == 0 || y == 0 || x + 1 == width || y + 1 == height
        })?;
        Ok(Self { width, height, lsq })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// `gx`, `gy` are per-node height increments per pixel. Returns node
    /// heights, row-major. Linear in `(gx, gy)`.
    pub fn integrate(&self, gx: &[f64], gy: &[f64]) -> Vec<f64> {
        let (w, h) = (self.width, self.height);
        assert_eq!(gx.len(), w * h);
        assert_eq!(gy.len(), w * h);
        let mut targets = Vec::with_capacity(2 * w * h);
        for y in 0..h {
            for x in 0..w - 1 {
                let i = y * w + x;
                targets.push(0.5 * (gx[i] + gx[i + 1]));
            }
        }
        for y in 0..h - 1 {
            for x in 0..w {
                let i = y * w + x;
                targets.push(0.5 * (gy[i] + gy[i + w]));
            }
        }
        self.lsq.solve(&targets)
    }
}
