use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::{gaussian, GelModel, LightRig};
use crate::frame::{Rgb, TactileFrame};
use crate::grid::Grid;
use crate::surface::HeightMap;

fn kernel(sigma_px: f64) -> Vec<f64> {
    let r = (4.0 * sigma_px).ceil() as i64;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-0.5 * (i * i) as f64 / (sigma_px * sigma_px)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable Gaussian blur with zero padding outside the raster. Values of
/// `sigma_px` below 1e-3 return the input unchanged.
pub fn gaussian_blur(g: &Grid<f64>, sigma_px: f64) -> Grid<f64> {
    if !(sigma_px >= 1e-3) {
        return g.clone();
    }
    let k = kernel(sigma_px);
    let r = (k.len() / 2) as isize;
    let (w, h) = g.shape();
    let src = g.as_slice();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kv) in k.iter().enumerate() {
                let xx = x as isize + i as isize - r;
                if xx >= 0 && (xx as usize) < w {
                    acc += kv * row[xx as usize];
                }
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for (i, kv) in k.iter().enumerate() {
            let yy = y as isize + i as isize - r;
            if yy < 0 || yy as usize >= h {
                continue;
            }
            let src_row = &tmp[yy as usize * w..(yy as usize + 1) * w];
            let dst = &mut out[y * w..(y + 1) * w];
            for (d, s) in dst.iter_mut().zip(src_row) {
                *d += kv * s;
            }
        }
    }
    Grid::from_vec(w, h, out).expect("same shape")
}

/// Membrane response of the gel to a rigid indentation.
pub fn press(raw: &HeightMap, gel: &GelModel) -> HeightMap {
    let sigma_px = gel.membrane_sigma_mm * raw.px_per_mm();
    HeightMap::new(gaussian_blur(raw.values(), sigma_px), raw.px_per_mm()).expect("blur keeps values finite")
}

/// Shades a heightmap: each channel is the background plus the sum of
/// `intensity · max(0, n·l)` over the lights, clamped to `[0, 1]`.
pub fn render_tactile(h: &HeightMap, rig: &LightRig, gel: &GelModel) -> TactileFrame {
    let normals = h.normals();
    let pixels = normals.values().map(|n| {
        let mut c: Rgb = gel.background;
        for l in &rig.lights {
            let d = l.direction;
            let s = (n[0] * d[0] + n[1] * d[1] + n[2] * d[2]).max(0.0);
            for k in 0..3 {
                c[k] += l.color[k] * s;
            }
        }
        c.map(|v| v.clamp(0.0, 1.0))
    });
    TactileFrame::new(pixels, h.px_per_mm(), 0.0).expect("shaded values are clamped")
}

/// Adds independent Gaussian noise to every channel and clamps.
pub fn add_pixel_noise<R: Rng + ?Sized>(frame: &TactileFrame, sigma: f64, rng: &mut R) -> TactileFrame {
    if !(sigma > 0.0) {
        return frame.clone();
    }
    let px = frame.pixels().map(|p| p.map(|v| v + gaussian(rng, sigma)));
    TactileFrame::from_clamped(px, frame.px_per_mm(), frame.timestamp()).expect("clamped")
}

/// Rounds intensities to the nearest of 256 levels.
pub fn quantize_8bit(frame: &TactileFrame) -> TactileFrame {
    let px = frame.pixels().map(|p| p.map(|v| (v * 255.0).round() / 255.0));
    TactileFrame::from_clamped(px, frame.px_per_mm(), frame.timestamp()).expect("clamped")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{indent_heightmap, IndenterShape};

    #[test]
    fn blur_of_zero_is_zero_and_tiny_sigma_is_identity() {
        let z = Grid::filled(9, 7, 0.0);
        assert_eq!(gaussian_blur(&z, 2.0), z);
        let g = Grid::from_fn(9, 7, |x, y| (x * y) as f64);
        assert_eq!(gaussian_blur(&g, 1e-6), g);
    }

    #[test]
    fn spike_spreads_to_matching_second_moment() {
        let n = 41;
        let mut g = Grid::filled(n, n, 0.0);
        g[(20, 20)] = 1.0;
        let sigma = 2.5;
        let b = gaussian_blur(&g, sigma);
        let (mut m0, mut m2) = (0.0, 0.0);
        for (x, _, v) in b.iter_xy() {
            let dx = x as f64 - 20.0;
            m0 += v;
            m2 += v * dx * dx;
        }
        assert!((m0 - 1.0).abs() < 1e-12);
        assert!((m2 - sigma * sigma).abs() < 1e-3 * sigma * sigma);
        // direct Gaussian evaluation
        let c = b[(20, 20)];
        let v = b[(23, 21)];
        let expect = (-0.5 * (9.0 + 1.0) / (sigma * sigma)).exp();
        assert!((v / c - expect).abs() < 1e-12);
    }

    #[test]
    fn press_never_raises_peak() {
        let gel = GelModel::default();
        let raw = indent_heightmap(&IndenterShape::Sphere { radius_mm: 5.0 }, [15.0, 15.0], 1.0, 128, 128, gel.px_per_mm()).unwrap();
        let p = press(&raw, &gel);
        assert!(p.max() <= raw.max());
        assert!(p.min() >= 0.0);
    }

    #[test]
    fn flat_render_is_uniform() {
        let gel = GelModel::default();
        let rig = LightRig::default();
        let f = render_tactile(&HeightMap::zeros(16, 16, gel.px_per_mm()), &rig, &gel);
        let expect = 0.25 + 0.5 * 60f64.to_radians().sin();
        for p in f.pixels().as_slice() {
            for v in p {
                assert!((v - expect).abs() < 1e-12);
            }
        }
    }
}
