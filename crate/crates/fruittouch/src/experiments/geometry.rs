//! Calibrate on sphere presses, then reconstruct a pyramid.

use std::time::Instant;

use fruittouch_core::frame::{diff_image, DiffFrame, TactileFrame};
use fruittouch_core::geometry::{
    build_calibration_dataset, fit_rgb2normal, predict_normals, reconstruction_error, NormalIntegrator,
    Rgb2NormalModel, SpherePress,
};
use fruittouch_core::sim::{IndenterShape, TactileSim};
use fruittouch_core::surface::{angle_deg, median, HeightMap};
use rand::Rng;

use crate::config::Config;
use crate::error::Result;

/// Calibration press centres as fractions of the gel size.
pub const CALIBRATION_SPOTS: [[f64; 2]; 4] = [[1.0 / 3.0, 1.0 / 3.0], [2.0 / 3.0, 0.4], [0.4, 2.0 / 3.0], [0.63, 0.63]];

/// Simulated calibration session: background plus sphere presses.
#[derive(Debug, Clone)]
pub struct CalibrationSession {
    pub background: TactileFrame,
    pub presses: Vec<(TactileFrame, [f64; 2])>,
}

pub fn simulate_calibration<R: Rng>(cfg: &Config, rng: &mut R) -> Result<CalibrationSession> {
    let sim = cfg.tactile_sim();
    let ball = IndenterShape::Sphere {
        radius_mm: cfg.geometry.sphere_radius_mm,
    };
    let background = sim.observe(&sim.background(), rng);
    let size = sim.gel.gel_size_mm;
    let mut presses = Vec::new();
    for s in CALIBRATION_SPOTS {
        let c = [s[0] * size, s[1] * size];
        let h = sim.pressed(&ball, c, cfg.geometry.press_depth_mm)?;
        presses.push((sim.observe(&sim.render(&h), rng), c));
    }
    Ok(CalibrationSession { background, presses })
}

/// Fits the RGB-to-normal model on a calibration session.
pub fn calibrate(cfg: &Config, session: &CalibrationSession, seed: u64) -> Result<Rgb2NormalModel> {
    let g = &cfg.geometry;
    let ball = IndenterShape::Sphere {
        radius_mm: g.sphere_radius_mm,
    };
    let diffs: Vec<DiffFrame> = session
        .presses
        .iter()
        .map(|(f, _)| diff_image(f, &session.background))
        .collect::<std::result::Result<_, _>>()?;
    let ppm = session.background.px_per_mm();
    let a = ball.contact_radius(g.press_depth_mm) * ppm;
    let presses: Vec<SpherePress> = session
        .presses
        .iter()
        .zip(&diffs)
        .map(|((_, c), d)| SpherePress {
            diff: d,
            center_px: [c[0] * ppm - 0.5, c[1] * ppm - 0.5],
            contact_radius_px: a,
            sphere_radius_mm: g.sphere_radius_mm,
        })
        .collect();
    let data = build_calibration_dataset(&presses, &cfg.calibration_options())?;
    Ok(fit_rgb2normal(&data, &cfg.fit_options(seed))?.model)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryReport {
    pub pixel_noise: f64,
    /// Pyramid heightmap MSE, mm².
    pub mse: f64,
    /// MSE when integrating the true normals, the integration floor.
    pub oracle_mse: f64,
    /// Median angular error on a held-out sphere press, degrees.
    pub sphere_median_deg: f64,
    pub true_peak_mm: f64,
    pub reconstructed_peak_mm: f64,
    pub seconds: f64,
}

pub fn pyramid() -> IndenterShape {
    IndenterShape::HexPyramid {
        base_diameter_mm: 10.0,
        height_mm: 2.0,
    }
}

/// Reconstructs a pressed pyramid with a freshly calibrated model.
pub fn run(cfg: &Config, seed: u64) -> Result<GeometryReport> {
    let start = Instant::now();
    let sim: TactileSim = cfg.tactile_sim();
    let mut rng = super::rng(seed);
    let session = simulate_calibration(cfg, &mut rng)?;
    let model = calibrate(cfg, &session, seed)?;
    let n = sim.size();
    let integ = NormalIntegrator::new(n, n)?;
    let ppm = sim.px_per_mm();

    let ball = IndenterShape::Sphere {
        radius_mm: cfg.geometry.sphere_radius_mm,
    };
    let c = sim.center_mm();
    let h = sim.pressed(&ball, [c[0], c[1] - 1.0], cfg.geometry.press_depth_mm)?;
    let d = diff_image(&sim.observe(&sim.render(&h), &mut rng), &session.background)?;
    let pred = predict_normals(&d, &model);
    let truth = h.normals();
    let errs: Vec<f64> = h
        .values()
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.05)
        .map(|(i, _)| angle_deg(pred.values().as_slice()[i], truth.values().as_slice()[i]))
        .collect();

    let h = sim.pressed(&pyramid(), c, 2.0)?;
    let d = diff_image(&sim.observe(&sim.render(&h), &mut rng), &session.background)?;
    let rec = integ.integrate(&predict_normals(&d, &model), ppm)?;
    let perfect = integ.integrate(&h.normals(), ppm)?;
    Ok(GeometryReport {
        pixel_noise: sim.pixel_noise,
        mse: reconstruction_error(&rec, &h)?,
        oracle_mse: reconstruction_error(&perfect, &h)?,
        sphere_median_deg: median(errs),
        true_peak_mm: h.max(),
        reconstructed_peak_mm: rec.max(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Integrates a reconstructed heightmap from a contact and a background.
pub fn reconstruct(model: &Rgb2NormalModel, contact: &TactileFrame, background: &TactileFrame) -> Result<HeightMap> {
    let d = diff_image(contact, background)?;
    let integ = NormalIntegrator::new(d.width(), d.height())?;
    Ok(integ.integrate(&predict_normals(&d, model), d.px_per_mm())?)
}
