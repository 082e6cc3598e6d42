//! Reconstructed contact geometry: heightmaps and normal maps.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::field::gradient;
use crate::grid::Grid;

/// Contact height in millimetres on the frame's pixel grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightMap {
    mm: Grid<f64>,
    px_per_mm: f64,
}

impl HeightMap {
    pub fn new(mm: Grid<f64>, px_per_mm: f64) -> Result<Self> {
        if mm.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(invalid("heightmap contains non-finite values"));
        }
        if !(px_per_mm.is_finite() && px_per_mm > 0.0) {
            return Err(invalid("px_per_mm must be positive"));
        }
        Ok(Self { mm, px_per_mm })
    }

    pub fn zeros(width: usize, height: usize, px_per_mm: f64) -> Self {
        Self {
            mm: Grid::filled(width, height, 0.0),
            px_per_mm,
        }
    }

    pub fn values(&self) -> &Grid<f64> {
        &self.mm
    }

    pub fn width(&self) -> usize {
        self.mm.width()
    }

    pub fn height(&self) -> usize {
        self.mm.height()
    }

    pub fn px_per_mm(&self) -> f64 {
        self.px_per_mm
    }

    pub fn max(&self) -> f64 {
        self.mm.as_slice().iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.mm.as_slice().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Shifts the map so its minimum is zero.
    pub fn gauge_fixed(&self) -> Self {
        let m = self.min();
        Self {
            mm: self.mm.map(|v| v - m),
            px_per_mm: self.px_per_mm,
        }
    }

    /// Surface slope `(∂h/∂x, ∂h/∂y)` in mm per mm.
    pub fn slopes(&self) -> Grid<[f64; 2]> {
        let s = 1.0 / self.px_per_mm;
        gradient(&self.mm, [s, s])
    }

    /// Unit normals `(−h_x, −h_y, 1)/‖·‖` of the surface.
    pub fn normals(&self) -> NormalMap {
        NormalMap {
            normals: self.slopes().map(|g| normal_from_slope(g[0], g[1])),
        }
    }
}

#[inline]
pub(crate) fn normal_from_slope(gx: f64, gy: f64) -> [f64; 3] {
    let n = (gx * gx + gy * gy + 1.0).sqrt();
    [-gx / n, -gy / n, 1.0 / n]
}

/// Field of unit surface normals with positive `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalMap {
    normals: Grid<[f64; 3]>,
}

impl NormalMap {
    pub fn new(normals: Grid<[f64; 3]>) -> Result<Self> {
        for n in normals.as_slice() {
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            if !((len - 1.0).abs() <= 1e-6 && n[2] > 0.0) {
                return Err(invalid("normals must be unit length with positive z"));
            }
        }
        Ok(Self { normals })
    }

    pub fn flat(width: usize, height: usize) -> Self {
        Self {
            normals: Grid::filled(width, height, [0.0, 0.0, 1.0]),
        }
    }

    pub fn values(&self) -> &Grid<[f64; 3]> {
        &self.normals
    }

    pub fn width(&self) -> usize {
        self.normals.width()
    }

    pub fn height(&self) -> usize {
        self.normals.height()
    }
}

/// Angle between two unit vectors in degrees.
pub fn angle_deg(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0);
    d.acos().to_degrees()
}

/// Median of a list of values; `NaN` for an empty list.
pub fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_heightmap_is_rejected() {
        let g = Grid::from_fn(4, 4, |x, _| if x == 2 { f64::NAN } else { 0.0 });
        assert!(HeightMap::new(g, 1.0).is_err());
    }

    #[test]
    fn gauge_fix_pins_minimum() {
        let h = HeightMap::new(Grid::from_fn(5, 5, |x, y| (x + y) as f64 + 3.0), 2.0).unwrap();
        let g = h.gauge_fixed();
        assert_eq!(g.min(), 0.0);
        assert_eq!(g.max(), 8.0);
    }

    #[test]
    fn tilted_plane_normals() {
        // h = 0.5 x_mm  =>  n ∝ (-0.5, 0, 1)
        let ppm = 4.0;
        let h = HeightMap::new(Grid::from_fn(8, 8, |x, _| 0.5 * x as f64 / ppm), ppm).unwrap();
        let n = h.normals();
        let e = normal_from_slope(0.5, 0.0);
        for v in n.values().as_slice() {
            assert!(angle_deg(*v, e) < 1e-6);
        }
        assert!(NormalMap::new(n.values().clone()).is_ok());
    }

    #[test]
    fn normal_map_rejects_bad_vectors() {
        assert!(NormalMap::new(Grid::filled(2, 2, [0.0, 0.0, -1.0])).is_err());
        assert!(NormalMap::new(Grid::filled(2, 2, [0.0, 0.5, 0.5])).is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(alloc::vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(alloc::vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
