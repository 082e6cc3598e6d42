//! Marker motion under tangential load.
//!
//! The contact region is replaced by its equal-area disc of radius `a`.
//! A translation moves the disc interior rigidly and continues outside as
//! the potential flow around a cylinder, `a²/ρ²` decay, so the whole field
//! is curl-free. A rotation turns the interior rigidly and continues as a
//! point vortex with tangential speed `θa²/ρ`, so the field is
//! divergence-free.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::GelModel;
use crate::error::{invalid, Result};
use crate::markers::{Marker, MarkerSet};
use crate::slip::ContactMask;

/// Shear applied to the contact, in millimetres of gel-surface motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShearPattern {
    Translation([f64; 2]),
    /// Tangential displacement at the contact rim, positive
    /// counter-clockwise in image coordinates.
    Rotation(f64),
}

impl ShearPattern {
    fn magnitude_mm(&self) -> f64 {
        match *self {
            Self::Translation([x, y]) => (x * x + y * y).sqrt(),
            Self::Rotation(q) => q.abs(),
        }
    }

    fn scaled(&self, s: f64) -> Self {
        match *self {
            Self::Translation([x, y]) => Self::Translation([x * s, y * s]),
            Self::Rotation(q) => Self::Rotation(q * s),
        }
    }
}

/// Displacement in pixels at pixel point `p` for a contact disc of centre
/// `c` and radius `a` (pixels). `pattern` must already be in pixels.
pub fn shear_displacement(p: [f64; 2], c: [f64; 2], a: f64, pattern: ShearPattern) -> [f64; 2] {
    let (x, y) = (p[0] - c[0], p[1] - c[1]);
    let rho2 = x * x + y * y;
    let outside = rho2 > a * a;
    match pattern {
        ShearPattern::Translation(t) => {
            if !outside {
                return t;
            }
            let f = a * a / rho2;
            let td = (t[0] * x + t[1] * y) / rho2;
            [f * (t[0] - 2.0 * td * x), f * (t[1] - 2.0 * td * y)]
        }
        ShearPattern::Rotation(q) => {
            if a <= 0.0 {
                return [0.0, 0.0];
            }
            let theta = q / a;
            let f = if outside { theta * a * a / rho2 } else { theta };
            [-f * y, f * x]
        }
    }
}

/// Moves rest markers by the superposed `patterns` around the contact.
/// An empty mask leaves the markers at rest. Positions are clamped to the
/// frame.
pub fn deform_markers(
    rest: &MarkerSet,
    contact: &ContactMask,
    patterns: &[ShearPattern],
    gel: &GelModel,
) -> Result<MarkerSet> {
    let limit = gel.gel_size_mm / 4.0;
    if let Some(p) = patterns.iter().find(|p| !(p.magnitude_mm() < limit)) {
        return Err(invalid(alloc::format!(
            "shear {p:?} must stay below a quarter of the gel size ({limit} mm)"
        )));
    }
    let Some((c, a)) = contact.equivalent_disc() else {
        return Ok(rest.clone());
    };
    let ppm = gel.px_per_mm();
    let (wmax, hmax) = (contact.width() as f64 - 0.5, contact.height() as f64 - 0.5);
    let moved: Vec<Marker> = rest
        .markers()
        .iter()
        .map(|m| {
            let (mut x, mut y) = (m.x, m.y);
            for p in patterns {
                let d = shear_displacement([m.x, m.y], c, a, p.scaled(ppm));
                x += d[0];
                y += d[1];
            }
            Marker {
                id: m.id,
                x: x.clamp(-0.5, wmax),
                y: y.clamp(-0.5, hmax),
            }
        })
        .collect();
    MarkerSet::new(moved, rest.grid_rows, rest.grid_cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn disc_mask(n: usize, c: f64, r: f64) -> ContactMask {
        ContactMask::new(
            Grid::from_fn(n, n, |x, y| {
                let (dx, dy) = (x as f64 - c, y as f64 - c);
                dx * dx + dy * dy <= r * r
            }),
            0.3,
        )
    }

    #[test]
    fn zero_shear_keeps_rest() {
        let gel = GelModel::default();
        let rest = gel.rest_markers();
        let m = deform_markers(&rest, &disc_mask(128, 64.0, 20.0), &[ShearPattern::Translation([0.0, 0.0])], &gel).unwrap();
        assert_eq!(m, rest);
    }

    #[test]
    fn translation_moves_contact_markers_by_px_per_mm() {
        let gel = GelModel::default();
        let rest = gel.rest_markers();
        let mask = disc_mask(128, 64.0, 20.0);
        let m = deform_markers(&rest, &mask, &[ShearPattern::Translation([1.0, 0.0])], &gel).unwrap();
        let (c, a) = mask.equivalent_disc().unwrap();
        let mut inside = 0;
        for (r, d) in rest.markers().iter().zip(m.markers()) {
            let rho = ((r.x - c[0]).powi(2) + (r.y - c[1]).powi(2)).sqrt();
            if rho <= a {
                inside += 1;
                assert!((d.x - r.x - gel.px_per_mm()).abs() < 1e-12);
                assert!((d.y - r.y).abs() < 1e-12);
            }
        }
        assert!(inside > 5);
    }

    #[test]
    fn fields_are_continuous_at_rim_for_rotation() {
        let c = [0.0, 0.0];
        let a = 10.0;
        let inside = shear_displacement([0.0, a - 1e-9], c, a, ShearPattern::Rotation(2.0));
        let outside = shear_displacement([0.0, a + 1e-9], c, a, ShearPattern::Rotation(2.0));
        assert!((inside[0] - outside[0]).abs() < 1e-6);
        assert!((inside[0] + 2.0).abs() < 1e-6);
    }

    #[test]
    fn oversized_shear_is_rejected() {
        let gel = GelModel::default();
        let r = deform_markers(&gel.rest_markers(), &disc_mask(128, 64.0, 20.0), &[ShearPattern::Rotation(8.0)], &gel);
        assert!(r.is_err());
    }
}
