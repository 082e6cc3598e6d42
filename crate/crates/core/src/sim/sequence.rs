use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::{
    add_pixel_noise, deform_markers, gaussian, indent_heightmap, press, render_tactile, CurrentModel, GelModel,
    IndenterShape, LightRig, ShearPattern,
};
use crate::error::{invalid, Result};
use crate::frame::TactileFrame;
use crate::markers::{Marker, MarkerSet};
use crate::slip::{segment_contact, DEFAULT_THRESHOLD_PX};
use crate::surface::HeightMap;

/// Height below which the simulator treats the gel as untouched when
/// locating the contact disc for marker motion.
const FOOTPRINT_MM: f64 = 0.02;

/// Sensor, lighting and noise settings shared by all generated data.
#[derive(Debug, Clone, PartialEq)]
pub struct TactileSim {
    pub gel: GelModel,
    pub rig: LightRig,
    pub pixel_noise: f64,
    pub marker_noise_px: f64,
    pub current: CurrentModel,
    pub fps: f64,
    pub slip_threshold_px: f64,
}

impl Default for TactileSim {
    fn default() -> Self {
        Self {
            gel: GelModel::default(),
            rig: LightRig::default(),
            pixel_noise: 0.008,
            marker_noise_px: 0.1,
            current: CurrentModel::default(),
            fps: 15.0,
            slip_threshold_px: DEFAULT_THRESHOLD_PX,
        }
    }
}

impl TactileSim {
    pub fn px_per_mm(&self) -> f64 {
        self.gel.px_per_mm()
    }

    pub fn size(&self) -> usize {
        self.gel.resolution
    }

    /// Centre of the gel in mm.
    pub fn center_mm(&self) -> [f64; 2] {
        let c = 0.5 * self.gel.gel_size_mm;
        [c, c]
    }

    /// Noiseless frame of the undisturbed gel.
    pub fn background(&self) -> TactileFrame {
        let n = self.size();
        render_tactile(&HeightMap::zeros(n, n, self.px_per_mm()), &self.rig, &self.gel)
    }

    /// Gel surface after pressing `shape` at `center` (mm) to `depth`.
    pub fn pressed(&self, shape: &IndenterShape, center: [f64; 2], depth: f64) -> Result<HeightMap> {
        let n = self.size();
        let raw = indent_heightmap(shape, center, depth, n, n, self.px_per_mm())?;
        Ok(press(&raw, &self.gel))
    }

    pub fn render(&self, h: &HeightMap) -> TactileFrame {
        render_tactile(h, &self.rig, &self.gel)
    }

    /// Adds the configured pixel noise.
    pub fn observe<R: Rng + ?Sized>(&self, frame: &TactileFrame, rng: &mut R) -> TactileFrame {
        add_pixel_noise(frame, self.pixel_noise, rng)
    }

    /// Adds the configured marker tracking noise.
    pub fn observe_markers<R: Rng + ?Sized>(&self, m: &MarkerSet, rng: &mut R) -> MarkerSet {
        if self.marker_noise_px <= 0.0 {
            return m.clone();
        }
        let moved = m
            .markers()
            .iter()
            .map(|k| Marker {
                id: k.id,
                x: k.x + gaussian(rng, self.marker_noise_px),
                y: k.y + gaussian(rng, self.marker_noise_px),
            })
            .collect();
        MarkerSet::new(moved, m.grid_rows, m.grid_cols).expect("ids unchanged")
    }

    /// Stable grasp, incipient slip and full slip of an object held against
    /// the gel.
    ///
    /// While static nothing moves. During incipient slip the object creeps
    /// and the markers under it follow, building up gel shear. At full-slip
    /// onset the object accelerates to a load-dependent speed while the gel
    /// shear relaxes, until the object reaches an end stop. Heavier loads
    /// and lower friction start slipping earlier.
    pub fn slip_sequence<R: Rng + ?Sized>(&self, scene: &GraspScene, n_frames: usize, rng: &mut R) -> Result<SlipSequence> {
        scene.validate()?;
        if n_frames < 10 {
            return Err(invalid("slip sequences need at least 10 frames"));
        }
        let ppm = self.px_per_mm();
        let n = self.size();
        let dir = scene.pose.direction();
        let a_px = scene.object.contact_radius(scene.press_depth_mm) * ppm;
        let margin = a_px + 4.0;
        let s0 = margin;
        let s_end = (n as f64 - 1.0 - margin).max(s0);
        let mid = 0.5 * (n as f64 - 1.0);

        let phases = scene.phase_onsets(n_frames);
        let u_stick = 0.5 * ppm;
        let u_kin = 0.4 * u_stick;
        let vmax = scene.full_slip_speed_px();

        let mut s = Vec::with_capacity(n_frames);
        let mut u = Vec::with_capacity(n_frames);
        let (mut sp, mut up) = (s0, 0.0);
        let mut stopped = false;
        for k in 0..n_frames {
            match phases {
                Some((_, full)) if k >= full => {
                    if !stopped {
                        let j = (k - full) as f64;
                        let v = vmax * ((j + 1.0) / 3.0).min(1.0);
                        sp = (sp + v).min(s_end);
                        up = u_kin + (u_stick - u_kin) * (-(j + 1.0) / 2.0).exp();
                        stopped = sp >= s_end;
                    }
                }
                Some((inc, full)) if k >= inc => {
                    up = u_stick * (k - inc + 1) as f64 / (full - inc) as f64;
                    sp = s0 + up;
                }
                _ => {}
            }
            s.push(sp);
            u.push(up);
        }

        let rest = self.gel.rest_markers();
        let mut frames = Vec::with_capacity(n_frames);
        let mut markers = Vec::with_capacity(n_frames);
        let mut object_track = Vec::with_capacity(n_frames);
        let mut gel_shift = Vec::with_capacity(n_frames);
        for k in 0..n_frames {
            let c_px = if dir[0] == 0.0 { [mid, s[k]] } else { [s[k], mid] };
            let c_mm = [(c_px[0] + 0.5) / ppm, (c_px[1] + 0.5) / ppm];
            let h = self.pressed(&scene.object, c_mm, scene.press_depth_mm)?;
            let frame = self.observe(&self.render(&h), rng).with_timestamp(k as f64 / self.fps);
            let shift = [dir[0] * u[k], dir[1] * u[k]];
            let footprint = segment_contact(&h, FOOTPRINT_MM)?;
            let m = deform_markers(&rest, &footprint, &[ShearPattern::Translation([shift[0] / ppm, shift[1] / ppm])], &self.gel)?;
            frames.push(frame);
            markers.push(self.observe_markers(&m, rng));
            object_track.push(c_px);
            gel_shift.push(shift);
        }
        let background = self.observe(&self.background(), rng);
        let mut labels = alloc::vec![false; n_frames];
        for k in 1..n_frames {
            let rel = relative_speed(&object_track, &gel_shift, k);
            labels[k] = rel > self.slip_threshold_px;
        }
        Ok(SlipSequence {
            frames,
            background,
            rest_markers: rest,
            markers,
            object_track,
            gel_shift,
            labels,
            incipient_onset: phases.map(|p| p.0),
            full_slip_onset: phases.map(|p| p.1),
            threshold_px: self.slip_threshold_px,
        })
    }

    /// Squeeze of a textured replica at a constant closing speed.
    ///
    /// Fruit and gel act as springs in series, so harder replicas build
    /// force and motor current faster. The fruit flattens by its own
    /// compression, widening the contact for softer replicas, and surface
    /// texture is imprinted in proportion to hardness. Closing speed,
    /// contact position and fruit radius vary per clip.
    pub fn compression_clip<R: Rng + ?Sized>(
        &self,
        replica: &Replica,
        setup: &CompressionSetup,
        n_frames: usize,
        rng: &mut R,
    ) -> Result<CompressionClipData> {
        if n_frames < 2 {
            return Err(invalid("compression clips need at least 2 frames"));
        }
        if !(replica.shore_00 > 0.0) {
            return Err(invalid("hardness must be positive"));
        }
        let (radius, density, amplitude) = replica.texture.surface();
        let k_fruit = shore_to_stiffness(replica.shore_00);
        let k_eff = 1.0 / (1.0 / k_fruit + 1.0 / setup.gel_stiffness_n_per_mm);
        let speed = 1.0 + setup.speed_jitter * (2.0 * rng.random::<f64>() - 1.0);
        let radius = radius * (1.0 + setup.radius_jitter * (2.0 * rng.random::<f64>() - 1.0));
        let c = self.center_mm();
        let ang = core::f64::consts::TAU * rng.random::<f64>();
        let off = setup.offset_jitter_mm * rng.random::<f64>().sqrt();
        let center = [c[0] + off * ang.cos(), c[1] + off * ang.sin()];
        let seed: u64 = rng.random();
        let imprint = amplitude * replica.shore_00 / REFERENCE_SHORE;

        let mut frames = Vec::with_capacity(n_frames);
        let mut force = Vec::with_capacity(n_frames);
        let mut current = Vec::with_capacity(n_frames);
        for k in 0..n_frames {
            let x = setup.max_closure_mm * speed * k as f64 / (n_frames - 1) as f64;
            let f = k_eff * x;
            let depth = f / setup.gel_stiffness_n_per_mm;
            let x_fruit = f / k_fruit;
            let r_eff = radius * (1.0 + setup.flattening * x_fruit);
            let shape = IndenterShape::FruitSurface {
                radius_mm: r_eff,
                bump_density: density,
                bump_amplitude_mm: imprint,
                seed,
            };
            let h = self.pressed(&shape, center, depth.min(0.5 * r_eff))?;
            frames.push(self.observe(&self.render(&h), rng).with_timestamp(k as f64 / self.fps));
            force.push(f);
            current.push(self.current.sample(f, rng));
        }
        Ok(CompressionClipData {
            frames,
            background: self.observe(&self.background(), rng),
            force,
            current,
        })
    }
}

fn relative_speed(track: &[[f64; 2]], shift: &[[f64; 2]], k: usize) -> f64 {
    let vo = [track[k][0] - track[k - 1][0], track[k][1] - track[k - 1][1]];
    let vm = [shift[k][0] - shift[k - 1][0], shift[k][1] - shift[k - 1][1]];
    crate::slip::speed_difference(vo, vm)
}

/// Direction of gravity relative to the sensor image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraspPose {
    /// Object slides along image `+y`.
    Top,
    /// Object slides along image `+x`.
    Side,
}

impl GraspPose {
    fn direction(self) -> [f64; 2] {
        match self {
            Self::Top => [0.0, 1.0],
            Self::Side => [1.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspScene {
    pub object: IndenterShape,
    pub press_depth_mm: f64,
    pub opening_mm: f64,
    pub pose: GraspPose,
    pub load_g: f64,
    pub friction: f64,
}

impl Default for GraspScene {
    fn default() -> Self {
        Self {
            object: IndenterShape::Sphere { radius_mm: 8.0 },
            press_depth_mm: 0.6,
            opening_mm: 20.0,
            pose: GraspPose::Top,
            load_g: 0.0,
            friction: 0.5,
        }
    }
}

impl GraspScene {
    pub fn validate(&self) -> Result<()> {
        self.object.validate()?;
        if !(0.0..=40.0).contains(&self.opening_mm) {
            return Err(invalid(format!("opening {} mm outside [0, 40]", self.opening_mm)));
        }
        if !(self.load_g >= 0.0) || !(self.friction > 0.0) {
            return Err(invalid("load must be non-negative and friction positive"));
        }
        if !(self.press_depth_mm > 0.0 && self.press_depth_mm <= self.object.max_depth()) {
            return Err(invalid("press depth must be positive and within the object"));
        }
        Ok(())
    }

    /// `(incipient onset, full-slip onset)` frames, or `None` without load.
    pub fn phase_onsets(&self, n_frames: usize) -> Option<(usize, usize)> {
        if self.load_g <= 0.0 {
            return None;
        }
        let demand = self.load_g * 0.5 / self.friction;
        let n = n_frames as f64;
        let inc = ((n * (0.30 - 0.002 * demand)).round() as usize).max(1);
        let full_gap = ((n * (0.15 - 0.001 * demand)).round() as usize).max(2);
        let full = (inc + full_gap).min(n_frames.saturating_sub(3)).max(inc + 1);
        Some((inc, full))
    }

    /// Peak object speed in full slip, px/frame.
    pub fn full_slip_speed_px(&self) -> f64 {
        14.0 + 0.15 * self.load_g
    }
}

/// Ground-truth record of a simulated slip trial.
#[derive(Debug, Clone)]
pub struct SlipSequence {
    pub frames: Vec<TactileFrame>,
    pub background: TactileFrame,
    pub rest_markers: MarkerSet,
    pub markers: Vec<MarkerSet>,
    /// Contact centre in pixels per frame.
    pub object_track: Vec<[f64; 2]>,
    /// Displacement of the gel under the contact, pixels.
    pub gel_shift: Vec<[f64; 2]>,
    pub labels: Vec<bool>,
    pub incipient_onset: Option<usize>,
    pub full_slip_onset: Option<usize>,
    pub threshold_px: f64,
}

impl SlipSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// True object-minus-gel speed at frame `k` (zero at frame 0).
    pub fn relative_speed(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            relative_speed(&self.object_track, &self.gel_shift, k)
        }
    }
}

/// Surface family of a silicone replica.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FruitTexture {
    Strawberry,
    Raspberry,
    Tomato,
}

impl FruitTexture {
    pub const ALL: [FruitTexture; 3] = [Self::Strawberry, Self::Raspberry, Self::Tomato];

    /// `(radius mm, bump density per mm², bump amplitude mm)`.
    pub fn surface(self) -> (f64, f64, f64) {
        match self {
            Self::Strawberry => (12.0, 0.35, 0.10),
            Self::Raspberry => (10.0, 0.6, 0.14),
            Self::Tomato => (13.0, 1.0, 0.0),
        }
    }

    pub fn is_textured(self) -> bool {
        self.surface().2 > 0.0
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Strawberry => "strawberry",
            Self::Raspberry => "raspberry",
            Self::Tomato => "tomato",
        }
    }
}

impl core::str::FromStr for FruitTexture {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| invalid(format!("unknown texture {s:?}")))
    }
}

const REFERENCE_SHORE: f64 = 68.4;

/// Silicone replica of a fruit with a given Shore 00 hardness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replica {
    pub texture: FruitTexture,
    pub shore_00: f64,
}

/// Replica stiffness in N/mm, increasing with Shore 00 hardness.
pub fn shore_to_stiffness(shore_00: f64) -> f64 {
    0.08 * (shore_00 / 10.0).powf(1.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionSetup {
    pub max_closure_mm: f64,
    pub gel_stiffness_n_per_mm: f64,
    /// Relative half-width of the uniform closing-speed variation.
    pub speed_jitter: f64,
    pub offset_jitter_mm: f64,
    pub radius_jitter: f64,
    /// Relative growth of the fruit's contact radius per mm of its own
    /// compression.
    pub flattening: f64,
}

impl Default for CompressionSetup {
    fn default() -> Self {
        Self {
            max_closure_mm: 3.0,
            gel_stiffness_n_per_mm: 2.0,
            speed_jitter: 0.08,
            offset_jitter_mm: 2.0,
            radius_jitter: 0.05,
            flattening: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompressionClipData {
    pub frames: Vec<TactileFrame>,
    pub background: TactileFrame,
    /// True normal force per frame, N.
    pub force: Vec<f64>,
    /// Motor current per frame, A.
    pub current: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quiet() -> TactileSim {
        TactileSim {
            pixel_noise: 0.0,
            marker_noise_px: 0.0,
            ..TactileSim::default()
        }
    }

    #[test]
    fn unloaded_scene_never_slips() {
        let sim = quiet();
        let seq = sim.slip_sequence(&GraspScene::default(), 20, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(seq.labels.iter().all(|l| !l));
        assert_eq!(seq.full_slip_onset, None);
    }

    #[test]
    fn heavier_load_slips_earlier() {
        let onset = |g: f64| {
            GraspScene {
                load_g: g,
                ..GraspScene::default()
            }
            .phase_onsets(200)
            .unwrap()
            .1
        };
        assert!(onset(50.0) < onset(20.0) && onset(20.0) < onset(10.0));
    }

    #[test]
    fn labels_follow_relative_speed() {
        let sim = quiet();
        let scene = GraspScene {
            load_g: 20.0,
            pose: GraspPose::Side,
            ..GraspScene::default()
        };
        let seq = sim.slip_sequence(&scene, 60, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert!(seq.labels.iter().any(|l| *l));
        for k in 0..seq.len() {
            assert_eq!(seq.labels[k], seq.relative_speed(k) > 10.0);
        }
        let inc = seq.incipient_onset.unwrap();
        let full = seq.full_slip_onset.unwrap();
        for k in inc + 1..full {
            assert!(seq.relative_speed(k) < 1e-9);
        }
    }

    #[test]
    fn opening_is_bounded() {
        let s = GraspScene {
            opening_mm: 41.0,
            ..GraspScene::default()
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn zero_closure_clip_is_constant() {
        let sim = quiet();
        let setup = CompressionSetup {
            max_closure_mm: 0.0,
            ..CompressionSetup::default()
        };
        let r = Replica {
            texture: FruitTexture::Strawberry,
            shore_00: 51.4,
        };
        let clip = sim.compression_clip(&r, &setup, 6, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let bg = sim.background();
        for f in &clip.frames {
            assert_eq!(f.pixels(), bg.pixels());
        }
    }

    #[test]
    fn harder_replica_draws_current_faster() {
        let sim = quiet();
        let setup = CompressionSetup {
            speed_jitter: 0.0,
            ..CompressionSetup::default()
        };
        let slope = |shore| {
            let r = Replica {
                texture: FruitTexture::Tomato,
                shore_00: shore,
            };
            let c = sim.compression_clip(&r, &setup, 8, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
            c.current[7] - c.current[0]
        };
        assert!(slope(68.4) > slope(42.2));
    }
}
