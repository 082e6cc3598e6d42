//! Gel surface markers.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marker {
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

/// Tracked marker positions (pixels) for one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarkerSet {
    markers: Vec<Marker>,
    pub grid_rows: usize,
    pub grid_cols: usize,
}

impl MarkerSet {
    pub fn new(markers: Vec<Marker>, grid_rows: usize, grid_cols: usize) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for m in &markers {
            if !seen.insert(m.id) {
                return Err(invalid(format!("duplicate marker id {}", m.id)));
            }
            if !(m.x.is_finite() && m.y.is_finite()) {
                return Err(invalid(format!("marker {} has a non-finite position", m.id)));
            }
        }
        Ok(Self {
            markers,
            grid_rows,
            grid_cols,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Regular `rows × cols` lattice with ids in row-major order, covering
    /// the frame with a half-spacing margin.
    pub fn lattice(rows: usize, cols: usize, width: usize, height: usize) -> Self {
        let sx = width as f64 / cols as f64;
        let sy = height as f64 / rows as f64;
        let mut markers = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                markers.push(Marker {
                    id: (r * cols + c) as u32,
                    x: (c as f64 + 0.5) * sx - 0.5,
                    y: (r as f64 + 0.5) * sy - 0.5,
                });
            }
        }
        Self {
            markers,
            grid_rows: rows,
            grid_cols: cols,
        }
    }

    pub fn markers(&self) -> &[Marker] {
        &self.markers
    }

    pub fn len(&self) -> usize {
        self.markers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }

    pub fn find(&self, id: u32) -> Option<&Marker> {
        self.markers.iter().find(|m| m.id == id)
    }

    /// Checks every marker lies within a `width × height` frame.
    pub fn check_bounds(&self, width: usize, height: usize) -> Result<()> {
        for m in &self.markers {
            if m.x < -0.5 || m.y < -0.5 || m.x > width as f64 - 0.5 || m.y > height as f64 - 0.5 {
                return Err(invalid(format!("marker {} lies outside the frame", m.id)));
            }
        }
        Ok(())
    }

    /// Pairs of `(before, after)` markers sharing an id.
    pub fn matched<'a>(&'a self, after: &'a MarkerSet) -> Vec<(&'a Marker, &'a Marker)> {
        let mut sorted: Vec<&Marker> = after.markers.iter().collect();
        sorted.sort_by_key(|m| m.id);
        self.markers
            .iter()
            .filter_map(|m| {
                sorted
                    .binary_search_by_key(&m.id, |a| a.id)
                    .ok()
                    .map(|i| (m, sorted[i]))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_ids_are_rejected() {
        let m = Marker { id: 1, x: 0.0, y: 0.0 };
        assert!(MarkerSet::new(alloc::vec![m, m], 1, 2).is_err());
    }

    #[test]
    fn lattice_is_inside_frame() {
        let s = MarkerSet::lattice(15, 15, 128, 128);
        assert_eq!(s.len(), 225);
        s.check_bounds(128, 128).unwrap();
    }

    #[test]
    fn matching_by_id() {
        let a = MarkerSet::lattice(2, 2, 10, 10);
        let b = MarkerSet::new(
            alloc::vec![Marker { id: 3, x: 1.0, y: 1.0 }, Marker { id: 9, x: 0.0, y: 0.0 }],
            2,
            2,
        )
        .unwrap();
        let m = a.matched(&b);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].0.id, 3);
    }
}
