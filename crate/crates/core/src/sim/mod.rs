//! Synthetic tactile sensor.
//!
//! Contact geometry is produced analytically from indenter shapes, smoothed
//! by a Gaussian membrane model and shaded by three coloured directional
//! lights. Marker motion, slip sequences and compression clips are built on
//! top of that renderer. All randomness comes from an explicitly passed
//! generator.

mod indenter;
mod markers;
mod render;
mod sequence;

pub use indenter::{indent_heightmap, IndenterShape};
pub use markers::{deform_markers, shear_displacement, ShearPattern};
pub use render::{add_pixel_noise, gaussian_blur, press, quantize_8bit, render_tactile};
pub use sequence::{
    shore_to_stiffness, CompressionClipData, CompressionSetup, FruitTexture, GraspPose, GraspScene, Replica,
    SlipSequence, TactileSim,
};

use alloc::format;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::frame::Rgb;

/// Elastomer pad and camera geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct GelModel {
    pub gel_size_mm: f64,
    /// Frame edge in pixels; frames are square.
    pub resolution: usize,
    pub membrane_sigma_mm: f64,
    pub marker_rows: usize,
    pub marker_cols: usize,
    pub background: Rgb,
}

impl Default for GelModel {
    fn default() -> Self {
        Self {
            gel_size_mm: 30.0,
            resolution: 128,
            membrane_sigma_mm: 0.25,
            marker_rows: 15,
            marker_cols: 15,
            background: [0.25; 3],
        }
    }
}

impl GelModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.gel_size_mm > 0.0 && self.gel_size_mm.is_finite()) {
            return Err(invalid("gel size must be positive"));
        }
        if self.resolution < crate::frame::MIN_FRAME_EDGE {
            return Err(invalid("resolution below minimum frame size"));
        }
        if !(self.membrane_sigma_mm > 0.0) {
            return Err(invalid("membrane sigma must be positive"));
        }
        if self.marker_rows < 2 || self.marker_cols < 2 {
            return Err(invalid("marker grid needs at least 2×2 markers"));
        }
        if self.marker_rows > self.resolution || self.marker_cols > self.resolution {
            return Err(invalid("marker grid does not fit the gel"));
        }
        if self.background.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(invalid("background colour must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn px_per_mm(&self) -> f64 {
        self.resolution as f64 / self.gel_size_mm
    }

    pub fn rest_markers(&self) -> crate::markers::MarkerSet {
        crate::markers::MarkerSet::lattice(self.marker_rows, self.marker_cols, self.resolution, self.resolution)
    }
}

/// One directional light.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Light {
    /// Unit vector from the gel towards the light.
    pub direction: [f64; 3],
    pub color: Rgb,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LightRig {
    pub lights: [Light; 3],
}

impl LightRig {
    pub fn new(lights: [Light; 3]) -> Result<Self> {
        for l in &lights {
            let d = l.direction;
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            if (n - 1.0).abs() > 1e-9 || d[2] <= 0.0 {
                return Err(invalid(format!("light direction {d:?} must be unit length with positive z")));
            }
        }
        Ok(Self { lights })
    }

    /// Three lights with azimuths 120° apart, one per colour channel.
    pub fn tri_color(azimuth0_deg: f64, elevation_deg: f64, intensity: f64) -> Self {
        let el = elevation_deg.to_radians();
        let lights = core::array::from_fn(|k| {
            let az = (azimuth0_deg + 120.0 * k as f64).to_radians();
            let mut color = [0.0; 3];
            color[k] = intensity;
            Light {
                direction: [el.cos() * az.cos(), el.cos() * az.sin(), el.sin()],
                color,
            }
        });
        Self { lights }
    }

    /// The rig rotated in-plane by `angle_rad` about the optical axis.
    pub fn rotated(&self, angle_rad: f64) -> Self {
        let (s, c) = angle_rad.sin_cos();
        let mut lights = self.lights;
        for l in &mut lights {
            let [x, y, z] = l.direction;
            l.direction = [c * x - s * y, s * x + c * y, z];
        }
        Self { lights }
    }
}

impl Default for LightRig {
    fn default() -> Self {
        Self::tri_color(90.0, 60.0, 0.5)
    }
}

/// Motor current drawn for a squeeze: `I = gain·F + offset + noise`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentModel {
    pub gain_a_per_n: f64,
    pub offset_a: f64,
    pub noise_a: f64,
}

impl Default for CurrentModel {
    fn default() -> Self {
        Self {
            gain_a_per_n: 0.05,
            offset_a: 0.1,
            noise_a: 0.015,
        }
    }
}

impl CurrentModel {
    pub fn noiseless(&self, force_n: f64) -> f64 {
        self.gain_a_per_n * force_n + self.offset_a
    }

    pub fn sample<R: Rng + ?Sized>(&self, force_n: f64, rng: &mut R) -> f64 {
        self.noiseless(force_n) + gaussian(rng, self.noise_a)
    }
}

pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).map(|d| d.sample(rng)).unwrap_or(0.0)
    } else {
        0.0
    }
}
