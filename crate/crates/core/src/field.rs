//! Vector and scalar fields on regular node lattices, with the finite
//! difference operators shared by rendering, integration and the
//! Helmholtz–Hodge decomposition.
//!
//! Derivatives use central differences at interior nodes and one-sided
//! differences on the boundary ring. With these stencils the discrete curl
//! of a gradient and the discrete divergence of a rotated gradient vanish
//! exactly at interior nodes.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Result;
use crate::grid::{Grid, GridLayout};

/// Scalar potential sampled on a field lattice.
pub type ScalarField = Grid<f64>;

/// Dense 2D vector field, e.g. gel marker displacement in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    pub layout: GridLayout,
    pub vectors: Grid<[f64; 2]>,
}

impl DisplacementField {
    pub fn new(layout: GridLayout, vectors: Grid<[f64; 2]>) -> Result<Self> {
        if vectors.shape() != (layout.cols, layout.rows) {
            return Err(crate::error::Error::ShapeMismatch {
                expected: (layout.cols, layout.rows),
                actual: vectors.shape(),
            });
        }
        Ok(Self { layout, vectors })
    }

    pub fn zeros(layout: GridLayout) -> Self {
        Self {
            layout,
            vectors: Grid::filled(layout.cols, layout.rows, [0.0; 2]),
        }
    }

    pub fn from_fn(layout: GridLayout, mut f: impl FnMut([f64; 2]) -> [f64; 2]) -> Self {
        let vectors = Grid::from_fn(layout.cols, layout.rows, |c, r| f(layout.node_position(c, r)));
        Self { layout, vectors }
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.layout.spacing()
    }

    /// Componentwise `self + other`, keeping this layout.
    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| [a[0] + b[0], a[1] + b[1]])
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| [a[0] - b[0], a[1] - b[1]])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            layout: self.layout,
            vectors: self.vectors.map(|v| [v[0] * s, v[1] * s]),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn([f64; 2], [f64; 2]) -> [f64; 2]) -> Self {
        let data: Vec<[f64; 2]> = self
            .vectors
            .as_slice()
            .iter()
            .zip(other.vectors.as_slice())
            .map(|(a, b)| f(*a, *b))
            .collect();
        Self {
            layout: self.layout,
            vectors: Grid::from_vec(self.layout.cols, self.layout.rows, data)
                .expect("fields share a layout"),
        }
    }

    /// Root mean square of the vector magnitudes.
    pub fn rms(&self) -> f64 {
        let n = self.vectors.len().max(1) as f64;
        (self
            .vectors
            .as_slice()
            .iter()
            .map(|v| v[0] * v[0] + v[1] * v[1])
            .sum::<f64>()
            / n)
            .sqrt()
    }
}

/// Stencil of the first derivative along one axis of length `n` at index
/// `i`: `(offsets, coefficients)` for unit spacing.
#[inline]
pub(crate) fn derivative_taps(i: usize, n: usize) -> [(usize, f64); 2] {
    if i == 0 {
        [(0, -1.0), (1, 1.0)]
    } else if i == n - 1 {
        [(n - 2, -1.0), (n - 1, 1.0)]
    } else {
        [(i - 1, -0.5), (i + 1, 0.5)]
    }
}

/// Gradient `(∂f/∂x, ∂f/∂y)` with node spacing `[dx, dy]`.
pub fn gradient(f: &Grid<f64>, spacing: [f64; 2]) -> Grid<[f64; 2]> {
    let (w, h) = f.shape();
    Grid::from_fn(w, h, |x, y| {
        let gx: f64 = derivative_taps(x, w)
            .iter()
            .map(|&(k, c)| c * f[(k, y)])
            .sum::<f64>()
            / spacing[0];
        let gy: f64 = derivative_taps(y, h)
            .iter()
            .map(|&(k, c)| c * f[(x, k)])
            .sum::<f64>()
            / spacing[1];
        [gx, gy]
    })
}

/// Rotated gradient `(∂ψ/∂y, −∂ψ/∂x)`, a divergence-free field.
pub fn rotated_gradient(psi: &Grid<f64>, spacing: [f64; 2]) -> Grid<[f64; 2]> {
    gradient(psi, spacing).map(|g| [g[1], -g[0]])
}

fn interior_central(
    v: &Grid<[f64; 2]>,
    spacing: [f64; 2],
    f: impl Fn([f64; 2], [f64; 2], [f64; 2], [f64; 2], [f64; 2]) -> f64,
) -> Grid<f64> {
    let (w, h) = v.shape();
    Grid::from_fn(w, h, |x, y| {
        if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
            0.0
        } else {
            f(v[(x + 1, y)], v[(x - 1, y)], v[(x, y + 1)], v[(x, y - 1)], spacing)
        }
    })
}

/// Central-difference divergence at interior nodes; zero on the boundary
/// ring.
pub fn divergence(v: &Grid<[f64; 2]>, spacing: [f64; 2]) -> Grid<f64> {
    interior_central(v, spacing, |xp, xm, yp, ym, s| {
        (xp[0] - xm[0]) / (2.0 * s[0]) + (yp[1] - ym[1]) / (2.0 * s[1])
    })
}

/// Central-difference scalar curl `∂v_y/∂x − ∂v_x/∂y` at interior nodes;
/// zero on the boundary ring.
pub fn curl(v: &Grid<[f64; 2]>, spacing: [f64; 2]) -> Grid<f64> {
    interior_central(v, spacing, |xp, xm, yp, ym, s| {
        (xp[1] - xm[1]) / (2.0 * s[0]) - (yp[0] - ym[0]) / (2.0 * s[1])
    })
}

/// RMS over interior nodes only.
pub fn interior_rms(f: &Grid<f64>) -> f64 {
    let (w, h) = f.shape();
    let mut s = 0.0;
    let mut n = 0usize;
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            s += f[(x, y)] * f[(x, y)];
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}

/// Trapezoid quadrature weight of node `(x, y)`: 1 inside, ½ on edges,
/// ¼ at corners.
#[inline]
pub fn trapezoid_weight(x: usize, y: usize, w: usize, h: usize) -> f64 {
    let wx = if x == 0 || x + 1 == w { 0.5 } else { 1.0 };
    let wy = if y == 0 || y + 1 == h { 0.5 } else { 1.0 };
    wx * wy
}

/// Trapezoid-weighted inner product of two vector fields.
pub fn weighted_inner(a: &Grid<[f64; 2]>, b: &Grid<[f64; 2]>) -> f64 {
    let (w, h) = a.shape();
    a.iter_xy()
        .map(|(x, y, u)| {
            let v = b[(x, y)];
            trapezoid_weight(x, y, w, h) * (u[0] * v[0] + u[1] * v[1])
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn potential(w: usize, h: usize) -> Grid<f64> {
        Grid::from_fn(w, h, |x, y| {
            let (x, y) = (x as f64, y as f64);
            (0.3 * x).sin() * (0.2 * y).cos() + 0.01 * x * y * y
        })
    }

    #[test]
    fn gradient_of_linear_is_exact() {
        let f = Grid::from_fn(6, 5, |x, y| 2.0 * x as f64 - 3.0 * y as f64);
        for g in gradient(&f, [1.0, 1.0]).as_slice() {
            assert!((g[0] - 2.0).abs() < 1e-12 && (g[1] + 3.0).abs() < 1e-12);
        }
        for g in gradient(&f, [2.0, 0.5]).as_slice() {
            assert!((g[0] - 1.0).abs() < 1e-12 && (g[1] + 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn curl_of_gradient_vanishes_inside() {
        let g = gradient(&potential(12, 9), [1.5, 0.7]);
        assert!(interior_rms(&curl(&g, [1.5, 0.7])) < 1e-13);
    }

    #[test]
    fn divergence_of_rotated_gradient_vanishes_inside() {
        let s = rotated_gradient(&potential(12, 9), [1.0, 1.0]);
        assert!(interior_rms(&divergence(&s, [1.0, 1.0])) < 1e-13);
    }

    #[test]
    fn gradient_is_orthogonal_to_pinned_rotated_gradient() {
        let (w, h) = (11, 9);
        let phi = potential(w, h);
        let psi = Grid::from_fn(w, h, |x, y| {
            if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                0.0
            } else {
                ((x * 31 + y * 17) % 11) as f64 - 5.0
            }
        });
        let p = gradient(&phi, [1.0, 1.0]);
        let s = rotated_gradient(&psi, [1.0, 1.0]);
        let ip = weighted_inner(&p, &s);
        let scale = weighted_inner(&p, &p).sqrt() * weighted_inner(&s, &s).sqrt();
        assert!(ip.abs() < 1e-12 * scale, "{ip} vs {scale}");
    }
}
