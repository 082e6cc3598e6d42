//! Tactile frames, rectification and background subtraction.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::linalg::solve_dense;

pub type Rgb = [f64; 3];
pub type Point2 = [f64; 2];

/// Smallest allowed frame edge in pixels.
pub const MIN_FRAME_EDGE: usize = 8;

/// Unconstrained RGB raster, e.g. a raw camera image before rectification.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbRaster {
    pub pixels: Grid<Rgb>,
}

/// Rectified image of one finger's sensing surface, intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TactileFrame {
    pixels: Grid<Rgb>,
    px_per_mm: f64,
    timestamp: f64,
}

impl TactileFrame {
    pub fn new(pixels: Grid<Rgb>, px_per_mm: f64, timestamp: f64) -> Result<Self> {
        if pixels.width() < MIN_FRAME_EDGE || pixels.height() < MIN_FRAME_EDGE {
            return Err(invalid(format!(
                "frame must be at least {MIN_FRAME_EDGE}×{MIN_FRAME_EDGE}, got {}×{}",
                pixels.width(),
                pixels.height()
            )));
        }
        if !(px_per_mm.is_finite() && px_per_mm > 0.0) {
            return Err(invalid("px_per_mm must be positive"));
        }
        if pixels
            .as_slice()
            .iter()
            .flatten()
            .any(|v| !(0.0..=1.0).contains(v))
        {
            return Err(invalid("frame intensities must lie in [0, 1]"));
        }
        Ok(Self {
            pixels,
            px_per_mm,
            timestamp,
        })
    }

    /// Builds a frame, clamping intensities into `[0, 1]` first.
    pub fn from_clamped(pixels: Grid<Rgb>, px_per_mm: f64, timestamp: f64) -> Result<Self> {
        let pixels = pixels.map(|p| p.map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) }));
        Self::new(pixels, px_per_mm, timestamp)
    }

    pub fn pixels(&self) -> &Grid<Rgb> {
        &self.pixels
    }

    pub fn width(&self) -> usize {
        self.pixels.width()
    }

    pub fn height(&self) -> usize {
        self.pixels.height()
    }

    pub fn px_per_mm(&self) -> f64 {
        self.px_per_mm
    }

    pub fn timestamp(&self) -> f64 {
        self.timestamp
    }

    pub fn with_timestamp(mut self, timestamp: f64) -> Self {
        self.timestamp = timestamp;
        self
    }
}

/// Contact frame minus background frame, values in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffFrame {
    pixels: Grid<Rgb>,
    px_per_mm: f64,
}

impl DiffFrame {
    pub fn new(pixels: Grid<Rgb>, px_per_mm: f64) -> Result<Self> {
        if pixels
            .as_slice()
            .iter()
            .flatten()
            .any(|v| !(-1.0..=1.0).contains(v))
        {
            return Err(invalid("difference values must lie in [-1, 1]"));
        }
        Ok(Self { pixels, px_per_mm })
    }

    pub fn pixels(&self) -> &Grid<Rgb> {
        &self.pixels
    }

    pub fn width(&self) -> usize {
        self.pixels.width()
    }

    pub fn height(&self) -> usize {
        self.pixels.height()
    }

    pub fn px_per_mm(&self) -> f64 {
        self.px_per_mm
    }
}

/// Pixelwise `contact − background`.
pub fn diff_image(contact: &TactileFrame, background: &TactileFrame) -> Result<DiffFrame> {
    background.pixels.ensure_same_shape(&contact.pixels)?;
    let data: Vec<Rgb> = contact
        .pixels
        .as_slice()
        .iter()
        .zip(background.pixels.as_slice())
        .map(|(c, b)| [c[0] - b[0], c[1] - b[1], c[2] - b[2]])
        .collect();
    let pixels = Grid::from_vec(contact.width(), contact.height(), data)?;
    Ok(DiffFrame {
        pixels,
        px_per_mm: contact.px_per_mm,
    })
}

/// Planar projective map `p ↦ H p` in homogeneous coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    h: [f64; 9],
}

impl Homography {
    /// Estimates the homography sending `src[k]` to `dst[k]`.
    pub fn from_correspondences(src: &[Point2; 4], dst: &[Point2; 4]) -> Result<Self> {
        check_non_degenerate(src)?;
        check_non_degenerate(dst)?;
        let mut a = [0.0; 64];
        let mut b = [0.0; 8];
        for k in 0..4 {
            let [u, v] = src[k];
            let [x, y] = dst[k];
            let r0 = 2 * k;
            let r1 = r0 + 1;
            a[r0 * 8..r0 * 8 + 8].copy_from_slice(&[u, v, 1.0, 0.0, 0.0, 0.0, -u * x, -v * x]);
            a[r1 * 8..r1 * 8 + 8].copy_from_slice(&[0.0, 0.0, 0.0, u, v, 1.0, -u * y, -v * y]);
            b[r0] = x;
            b[r1] = y;
        }
        solve_dense(&mut a, &mut b, 8).map_err(|_| Error::DegenerateHomography)?;
        Ok(Self {
            h: [b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7], 1.0],
        })
    }

    pub fn apply(&self, [u, v]: Point2) -> Point2 {
        let h = &self.h;
        let w = h[6] * u + h[7] * v + h[8];
        [
            (h[0] * u + h[1] * v + h[2]) / w,
            (h[3] * u + h[4] * v + h[5]) / w,
        ]
    }
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn check_non_degenerate(q: &[Point2; 4]) -> Result<()> {
    let scale = q
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    for i in 0..4 {
        for j in i + 1..4 {
            for k in j + 1..4 {
                if cross(q[i], q[j], q[k]).abs() <= 1e-9 * scale * scale {
                    return Err(Error::DegenerateHomography);
                }
            }
        }
    }
    Ok(())
}

fn is_convex(q: &[Point2; 4]) -> bool {
    let signs: Vec<f64> = (0..4)
        .map(|i| cross(q[i], q[(i + 1) % 4], q[(i + 2) % 4]))
        .collect();
    signs.iter().all(|s| *s > 0.0) || signs.iter().all(|s| *s < 0.0)
}

#[inline]
fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-9 {
        r
    } else {
        v
    }
}

/// Bilinear sample at pixel-centre coordinates, clamped to the raster.
pub fn sample_bilinear(img: &Grid<Rgb>, x: f64, y: f64) -> Rgb {
    let xm = (img.width() - 1) as f64;
    let ym = (img.height() - 1) as f64;
    let x = x.clamp(0.0, xm);
    let y = y.clamp(0.0, ym);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(img.width() - 1);
    let y1 = (y0 + 1).min(img.height() - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let p00 = img[(x0, y0)];
    let p10 = img[(x1, y0)];
    let p01 = img[(x0, y1)];
    let p11 = img[(x1, y1)];
    let mut out = [0.0; 3];
    for c in 0..3 {
        let top = p00[c] + fx * (p10[c] - p00[c]);
        let bot = p01[c] + fx * (p11[c] - p01[c]);
        out[c] = top + fy * (bot - top);
    }
    out
}

/// Warps the quadrilateral `corners` (top-left, top-right, bottom-right,
/// bottom-left, in raw pixel-centre coordinates) onto a full
/// `out_width × out_height` frame with bilinear resampling.
pub fn rectify_frame(
    raw: &RgbRaster,
    corners: &[Point2; 4],
    out_width: usize,
    out_height: usize,
    px_per_mm: f64,
) -> Result<TactileFrame> {
    check_non_degenerate(corners)?;
    if !is_convex(corners) {
        return Err(invalid("corners must form a convex quadrilateral"));
    }
    let (w, h) = raw.pixels.shape();
    let inside = corners.iter().all(|p| {
        p[0] >= -1e-9 && p[1] >= -1e-9 && p[0] <= (w - 1) as f64 + 1e-9 && p[1] <= (h - 1) as f64 + 1e-9
    });
    if !inside {
        return Err(invalid("corners must lie inside the raw image"));
    }
    if out_width < MIN_FRAME_EDGE || out_height < MIN_FRAME_EDGE {
        return Err(invalid("output frame too small"));
    }
    let xm = (out_width - 1) as f64;
    let ym = (out_height - 1) as f64;
    let rect = [[0.0, 0.0], [xm, 0.0], [xm, ym], [0.0, ym]];
    let hom = Homography::from_correspondences(&rect, corners)?;
    let pixels = Grid::from_fn(out_width, out_height, |u, v| {
        let [x, y] = hom.apply([u as f64, v as f64]);
        sample_bilinear(&raw.pixels, snap(x), snap(y))
    });
    TactileFrame::from_clamped(pixels, px_per_mm, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient_raster(w: usize, h: usize) -> RgbRaster {
        RgbRaster {
            pixels: Grid::from_fn(w, h, |x, y| {
                [
                    x as f64 / w as f64,
                    y as f64 / h as f64,
                    ((x * 7 + y * 13) % 17) as f64 / 17.0,
                ]
            }),
        }
    }

    #[test]
    fn identity_corners_reproduce_input_exactly() {
        let raw = gradient_raster(20, 16);
        let c = [[0.0, 0.0], [19.0, 0.0], [19.0, 15.0], [0.0, 15.0]];
        let f = rectify_frame(&raw, &c, 20, 16, 4.0).unwrap();
        assert_eq!(f.pixels(), &raw.pixels);
    }

    #[test]
    fn doubled_quad_downsamples_by_two() {
        let raw = gradient_raster(40, 30);
        let c = [[0.0, 0.0], [38.0, 0.0], [38.0, 28.0], [0.0, 28.0]];
        let f = rectify_frame(&raw, &c, 20, 15, 4.0).unwrap();
        for y in 0..15 {
            for x in 0..20 {
                assert_eq!(f.pixels()[(x, y)], raw.pixels[(2 * x, 2 * y)]);
            }
        }
    }

    #[test]
    fn collinear_corners_are_rejected() {
        let raw = gradient_raster(20, 20);
        let c = [[0.0, 0.0], [5.0, 5.0], [10.0, 10.0], [0.0, 15.0]];
        assert_eq!(
            rectify_frame(&raw, &c, 10, 10, 1.0),
            Err(Error::DegenerateHomography)
        );
    }

    #[test]
    fn concave_corners_are_rejected() {
        let raw = gradient_raster(20, 20);
        let c = [[0.0, 0.0], [15.0, 0.0], [5.0, 5.0], [0.0, 15.0]];
        assert!(matches!(
            rectify_frame(&raw, &c, 10, 10, 1.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn diff_of_equal_frames_is_zero() {
        let f = TactileFrame::new(gradient_raster(10, 10).pixels, 2.0, 0.0).unwrap();
        let d = diff_image(&f, &f).unwrap();
        assert!(d.pixels().as_slice().iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn diff_of_constant_frames() {
        let bg = TactileFrame::new(Grid::filled(8, 8, [0.5; 3]), 1.0, 0.0).unwrap();
        let c = TactileFrame::new(Grid::filled(8, 8, [0.7; 3]), 1.0, 0.0).unwrap();
        let d = diff_image(&c, &bg).unwrap();
        assert!(d
            .pixels()
            .as_slice()
            .iter()
            .flatten()
            .all(|v| (v - 0.2).abs() < 1e-12));
    }

    #[test]
    fn diff_rejects_shape_mismatch() {
        let a = TactileFrame::new(Grid::filled(8, 8, [0.5; 3]), 1.0, 0.0).unwrap();
        let b = TactileFrame::new(Grid::filled(9, 8, [0.5; 3]), 1.0, 0.0).unwrap();
        assert!(matches!(diff_image(&a, &b), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn frame_invariants_are_enforced() {
        assert!(TactileFrame::new(Grid::filled(4, 8, [0.5; 3]), 1.0, 0.0).is_err());
        assert!(TactileFrame::new(Grid::filled(8, 8, [1.5; 3]), 1.0, 0.0).is_err());
        assert!(TactileFrame::new(Grid::filled(8, 8, [0.5; 3]), 0.0, 0.0).is_err());
    }
}
