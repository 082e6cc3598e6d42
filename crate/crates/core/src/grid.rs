//! Dense row-major rasters.

use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// A `width × height` raster stored row-major. Indexing is `(x, y)`,
/// i.e. column first.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T> Grid<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch {
                expected: (width, height),
                actual: (data.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn index_of(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<&T> {
        if x < self.width && y < self.height {
            Some(&self.data[y * self.width + x])
        } else {
            None
        }
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn ensure_same_shape<U>(&self, other: &Grid<U>) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                actual: other.shape(),
            });
        }
        Ok(())
    }

    /// Iterates `(x, y, &value)` in storage order.
    pub fn iter_xy(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let w = self.width;
        self.data.iter().enumerate().map(move |(i, v)| (i % w, i / w, v))
    }
}

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: alloc::vec![value; width * height],
        }
    }
}

impl<T> Index<(usize, usize)> for Grid<T> {
    type Output = T;

    #[inline]
    fn index(&self, (x, y): (usize, usize)) -> &T {
        &self.data[self.index_of(x, y)]
    }
}

impl<T> IndexMut<(usize, usize)> for Grid<T> {
    #[inline]
    fn index_mut(&mut self, (x, y): (usize, usize)) -> &mut T {
        let i = self.index_of(x, y);
        &mut self.data[i]
    }
}

/// Placement of a coarse `cols × rows` node lattice over a frame of
/// `frame_width × frame_height` pixels. Corner nodes sit on the corner
/// pixel centres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridLayout {
    pub cols: usize,
    pub rows: usize,
    pub frame_width: usize,
    pub frame_height: usize,
}

impl GridLayout {
    pub fn new(cols: usize, rows: usize, frame_width: usize, frame_height: usize) -> Result<Self> {
        if cols < 2 || rows < 2 || frame_width < 2 || frame_height < 2 {
            return Err(crate::error::invalid("grid layout needs at least 2×2 nodes"));
        }
        Ok(Self {
            cols,
            rows,
            frame_width,
            frame_height,
        })
    }

    /// Node spacing in pixels, `[dx, dy]`.
    pub fn spacing(&self) -> [f64; 2] {
        [
            (self.frame_width - 1) as f64 / (self.cols - 1) as f64,
            (self.frame_height - 1) as f64 / (self.rows - 1) as f64,
        ]
    }

    /// Pixel position of node `(c, r)`.
    pub fn node_position(&self, c: usize, r: usize) -> [f64; 2] {
        let [dx, dy] = self.spacing();
        [c as f64 * dx, r as f64 * dy]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_column_first() {
        let g = Grid::from_fn(3, 2, |x, y| 10 * y + x);
        assert_eq!(g[(2, 1)], 12);
        assert_eq!(g.as_slice(), &[0, 1, 2, 10, 11, 12]);
        assert_eq!(g.get(3, 0), None);
    }

    #[test]
    fn from_vec_checks_length() {
        assert!(Grid::from_vec(2, 2, alloc::vec![0.0; 3]).is_err());
    }

    #[test]
    fn layout_corners_hit_pixel_corners() {
        let l = GridLayout::new(5, 3, 129, 65).unwrap();
        assert_eq!(l.node_position(0, 0), [0.0, 0.0]);
        assert_eq!(l.node_position(4, 2), [128.0, 64.0]);
    }
}
