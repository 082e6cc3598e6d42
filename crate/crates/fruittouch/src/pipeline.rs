//! One perception tick per camera frame.

use fruittouch_core::force::{interpolate_markers, shear_features, HhdSolver, IdwOptions};
use fruittouch_core::frame::{diff_image, TactileFrame};
use fruittouch_core::geometry::{predict_normals, NormalIntegrator, Rgb2NormalModel};
use fruittouch_core::grid::GridLayout;
use fruittouch_core::markers::MarkerSet;
use fruittouch_core::slip::{segment_contact, ContactMask, SlipFrame, SlipTracker};
use fruittouch_core::surface::HeightMap;

use crate::config::Config;
use crate::error::Result;
use crate::io::ForceModels;

struct ShearStage {
    solver: HhdSolver,
    layout: GridLayout,
    idw: IdwOptions,
    rest: MarkerSet,
}

/// Frame difference, normals, heightmap, contact mask, slip and force.
pub struct PerceptionLoop {
    normals: Rgb2NormalModel,
    integrator: NormalIntegrator,
    background: TactileFrame,
    contact_threshold_mm: f64,
    tracker: SlipTracker,
    force: ForceModels,
    shear: Option<ShearStage>,
}

#[derive(Debug, Clone)]
pub struct TickOutput {
    pub heightmap: HeightMap,
    pub mask: ContactMask,
    pub slip: SlipFrame,
    pub normal_force_n: f64,
    /// `None` without a shear model or rest markers, or with no contact.
    pub shear_n: Option<[f64; 2]>,
}

impl PerceptionLoop {
    /// `rest` markers enable shear estimation when the force models carry a
    /// shear regressor.
    pub fn new(
        cfg: &Config,
        normals: Rgb2NormalModel,
        force: ForceModels,
        background: TactileFrame,
        rest: Option<MarkerSet>,
    ) -> Result<Self> {
        let (w, h) = (background.width(), background.height());
        let shear = match (force.shear, rest) {
            (Some(_), Some(rest)) => {
                let layout = GridLayout::new(cfg.force.grid, cfg.force.grid, w, h)?;
                Some(ShearStage {
                    solver: HhdSolver::new(layout)?,
                    layout,
                    idw: cfg.idw(),
                    rest,
                })
            }
            _ => None,
        };
        Ok(Self {
            normals,
            integrator: NormalIntegrator::new(w, h)?,
            background,
            contact_threshold_mm: cfg.slip.contact_threshold_mm,
            tracker: SlipTracker::new(cfg.slip.threshold_px, cfg.slip.smoothing_frames),
            force,
            shear,
        })
    }

    pub fn tick(&mut self, frame: &TactileFrame, markers: &MarkerSet, current_a: f64) -> Result<TickOutput> {
        let d = diff_image(frame, &self.background)?;
        let heightmap = self.integrator.integrate(&predict_normals(&d, &self.normals), d.px_per_mm())?;
        let mask = segment_contact(&heightmap, self.contact_threshold_mm)?;
        let slip = self.tracker.push(&mask, markers);
        let normal_force_n = self.force.normal.predict(current_a).max(0.0);
        let shear_n = match (&self.shear, &self.force.shear) {
            (Some(st), Some(model)) if !mask.is_empty() => {
                let v = interpolate_markers(&st.rest, markers, st.layout, st.idw)?;
                let hhd = st.solver.decompose(&v)?;
                Some(model.predict(&shear_features(&v, &hhd, &mask)?))
            }
            _ => None,
        };
        Ok(TickOutput {
            heightmap,
            mask,
            slip,
            normal_force_n,
            shear_n,
        })
    }
}
