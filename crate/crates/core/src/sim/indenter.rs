use alloc::format;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::grid::Grid;
use crate::surface::HeightMap;

/// Rigid object pressed into the gel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndenterShape {
    Sphere {
        radius_mm: f64,
    },
    /// Six-sided pyramid standing on its apex. `base_diameter_mm` is the
    /// corner-to-corner width of the hexagonal base.
    HexPyramid {
        base_diameter_mm: f64,
        height_mm: f64,
    },
    /// Sphere carrying a jittered lattice of Gaussian bumps, e.g. seeds or
    /// drupelets. Density is bumps per mm².
    FruitSurface {
        radius_mm: f64,
        bump_density: f64,
        bump_amplitude_mm: f64,
        seed: u64,
    },
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_hash(seed: u64, i: i64, j: i64, k: u64) -> f64 {
    let h = splitmix(seed ^ splitmix((i as u64).wrapping_mul(0x1000_0000_01B3) ^ splitmix(j as u64 ^ (k << 48))));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn sphere_gap(r: f64, rho2: f64) -> Option<f64> {
    (rho2 <= r * r).then(|| r - (r * r - rho2).sqrt())
}

impl IndenterShape {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Sphere { radius_mm } => radius_mm > 0.0,
            Self::HexPyramid {
                base_diameter_mm,
                height_mm,
            } => base_diameter_mm > 0.0 && height_mm > 0.0,
            Self::FruitSurface {
                radius_mm,
                bump_density,
                bump_amplitude_mm,
                ..
            } => radius_mm > 0.0 && bump_density > 0.0 && bump_amplitude_mm >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("indenter dimensions must be positive: {self:?}")))
        }
    }

    /// Largest admissible indentation depth.
    pub fn max_depth(&self) -> f64 {
        match *self {
            Self::Sphere { radius_mm } | Self::FruitSurface { radius_mm, .. } => radius_mm,
            Self::HexPyramid { height_mm, .. } => height_mm,
        }
    }

    /// Radius of the footprint at `depth` (circumradius for the pyramid).
    pub fn contact_radius(&self, depth: f64) -> f64 {
        match *self {
            Self::Sphere { radius_mm: r } | Self::FruitSurface { radius_mm: r, .. } => {
                (2.0 * r * depth - depth * depth).max(0.0).sqrt()
            }
            Self::HexPyramid {
                base_diameter_mm,
                height_mm,
            } => 0.5 * base_diameter_mm * depth / height_mm,
        }
    }

    /// Height of the indenter surface above its lowest point at horizontal
    /// offset `(dx, dy)` mm, or `None` beyond its footprint.
    pub fn gap(&self, dx: f64, dy: f64) -> Option<f64> {
        match *self {
            Self::Sphere { radius_mm } => sphere_gap(radius_mm, dx * dx + dy * dy),
            Self::HexPyramid {
                base_diameter_mm,
                height_mm,
            } => {
                let apothem = 0.25 * base_diameter_mm * 3f64.sqrt();
                let s3 = 0.5 * 3f64.sqrt();
                let t = (s3 * dx + 0.5 * dy)
                    .abs()
                    .max(dy.abs())
                    .max((-s3 * dx + 0.5 * dy).abs())
                    / apothem;
                (t <= 1.0).then_some(height_mm * t)
            }
            Self::FruitSurface {
                radius_mm,
                bump_density,
                bump_amplitude_mm,
                seed,
            } => {
                let base = sphere_gap(radius_mm, dx * dx + dy * dy)?;
                let spacing = 1.0 / bump_density.sqrt();
                let sigma = 0.25 * spacing;
                let (ci, cj) = ((dx / spacing).floor() as i64, (dy / spacing).floor() as i64);
                let mut bumps = 0.0;
                for i in ci - 1..=ci + 1 {
                    for j in cj - 1..=cj + 1 {
                        let bx = (i as f64 + 0.2 + 0.6 * unit_hash(seed, i, j, 0)) * spacing;
                        let by = (j as f64 + 0.2 + 0.6 * unit_hash(seed, i, j, 1)) * spacing;
                        let d2 = (dx - bx) * (dx - bx) + (dy - by) * (dy - by);
                        bumps += (-0.5 * d2 / (sigma * sigma)).exp();
                    }
                }
                Some(base - bump_amplitude_mm * bumps)
            }
        }
    }
}

/// Penetration of `shape` into a flat gel when its lowest point sits at
/// `center` (mm from the frame's top-left corner) pressed `depth` mm deep.
/// Pixel `(c, r)` is sampled at `((c + ½)/px_per_mm, (r + ½)/px_per_mm)`.
pub fn indent_heightmap(
    shape: &IndenterShape,
    center: [f64; 2],
    depth: f64,
    width: usize,
    height: usize,
    px_per_mm: f64,
) -> Result<HeightMap> {
    shape.validate()?;
    if !(depth >= 0.0) {
        return Err(invalid("indentation depth must be non-negative"));
    }
    if depth > shape.max_depth() {
        return Err(invalid(format!(
            "depth {depth} mm exceeds indenter height {} mm",
            shape.max_depth()
        )));
    }
    let (wmm, hmm) = (width as f64 / px_per_mm, height as f64 / px_per_mm);
    if !(center[0] >= 0.0 && center[0] <= wmm && center[1] >= 0.0 && center[1] <= hmm) {
        return Err(invalid("indenter centre lies outside the gel"));
    }
    let g = Grid::from_fn(width, height, |c, r| {
        if depth == 0.0 {
            return 0.0;
        }
        let dx = (c as f64 + 0.5) / px_per_mm - center[0];
        let dy = (r as f64 + 0.5) / px_per_mm - center[1];
        shape.gap(dx, dy).map_or(0.0, |s| (depth - s).max(0.0))
    });
    HeightMap::new(g, px_per_mm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_depth_is_flat() {
        let h = indent_heightmap(&IndenterShape::Sphere { radius_mm: 5.0 }, [4.0, 4.0], 0.0, 32, 32, 4.0).unwrap();
        assert_eq!(h.max(), 0.0);
    }

    #[test]
    fn sphere_cap_matches_brute_force() {
        let (r, d, ppm) = (5.0, 1.0, 8.0);
        let h = indent_heightmap(&IndenterShape::Sphere { radius_mm: r }, [8.0, 8.0], d, 128, 128, ppm).unwrap();
        for (c, row, v) in h.values().iter_xy() {
            let dx = (c as f64 + 0.5) / ppm - 8.0;
            let dy = (row as f64 + 0.5) / ppm - 8.0;
            let z = r - d;
            let top = (r * r - dx * dx - dy * dy).max(0.0).sqrt();
            let expect = (top - z).max(0.0);
            assert!((v - expect).abs() < 1e-12);
            if (dx * dx + dy * dy).sqrt() > 3.0 + 1e-9 {
                assert_eq!(*v, 0.0);
            }
        }
        assert!((h.max() - d).abs() < 0.01);
        assert!((IndenterShape::Sphere { radius_mm: r }.contact_radius(d) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn pyramid_has_hexagonal_footprint() {
        let p = IndenterShape::HexPyramid {
            base_diameter_mm: 10.0,
            height_mm: 2.0,
        };
        assert_eq!(p.gap(0.0, 0.0), Some(0.0));
        // corners at the circumradius, edge midpoints at the apothem
        assert!((p.gap(5.0, 0.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((p.gap(0.0, 4.330127018922193).unwrap() - 2.0).abs() < 1e-9);
        assert!(p.gap(0.0, 4.5).is_none());
        assert!(p.gap(4.9, 0.0).is_some());
        let h = indent_heightmap(&p, [6.0, 6.0], 2.0, 96, 96, 8.0).unwrap();
        assert!((h.max() - 2.0).abs() < 0.05);
        assert!(indent_heightmap(&p, [6.0, 6.0], 2.5, 96, 96, 8.0).is_err());
    }

    #[test]
    fn fruit_bumps_are_deterministic() {
        let f = IndenterShape::FruitSurface {
            radius_mm: 10.0,
            bump_density: 0.5,
            bump_amplitude_mm: 0.1,
            seed: 7,
        };
        let a = indent_heightmap(&f, [10.0, 10.0], 0.8, 64, 64, 3.0).unwrap();
        let b = indent_heightmap(&f, [10.0, 10.0], 0.8, 64, 64, 3.0).unwrap();
        assert_eq!(a, b);
        let s = indent_heightmap(&IndenterShape::Sphere { radius_mm: 10.0 }, [10.0, 10.0], 0.8, 64, 64, 3.0).unwrap();
        assert!(a.max() > s.max());
    }

    #[test]
    fn centre_must_be_on_gel() {
        let s = IndenterShape::Sphere { radius_mm: 5.0 };
        assert!(indent_heightmap(&s, [-1.0, 3.0], 0.5, 16, 16, 1.0).is_err());
    }
}
