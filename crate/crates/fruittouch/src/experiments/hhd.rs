//! Decomposition quality on random smooth fields.

use std::time::Instant;

use fruittouch_core::field::{curl, divergence, interior_rms, DisplacementField};
use fruittouch_core::force::{HhdResult, HhdSolver};
use fruittouch_core::grid::GridLayout;
use rand::Rng;

use crate::error::Result;

/// Sum of a few random Fourier modes plus a random affine part, so every
/// component of the decomposition is present.
pub fn random_field<R: Rng>(layout: GridLayout, rng: &mut R) -> DisplacementField {
    let w = [layout.frame_width as f64, layout.frame_height as f64];
    let modes: Vec<([f64; 2], [f64; 2], f64)> = (0..6)
        .map(|_| {
            let k = [rng.random_range(0.5..3.0) / w[0], rng.random_range(0.5..3.0) / w[1]];
            let a = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            (k, a, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let affine: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    DisplacementField::from_fn(layout, |p| {
        let mut v = [
            affine[0] + (affine[1] * p[0] + affine[2] * p[1]) / w[0],
            affine[3] + (affine[4] * p[0] + affine[5] * p[1]) / w[1],
        ];
        for (k, a, ph) in &modes {
            let s = (std::f64::consts::TAU * (k[0] * p[0] + k[1] * p[1]) + ph).sin();
            v[0] += a[0] * s;
            v[1] += a[1] * s;
        }
        v
    })
}

/// Worst-case relative errors of one decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HhdErrors {
    /// `‖P + S + H − V‖ / ‖V‖`.
    pub reconstruction: f64,
    /// Interior RMS of `curl P` over the RMS of `curl V`.
    pub curl_p: f64,
    /// Interior RMS of `div S` over the RMS of `div V`.
    pub div_s: f64,
}

pub fn errors(v: &DisplacementField, r: &HhdResult) -> HhdErrors {
    let sum = r.p.add(&r.s).add(&r.h);
    let sp = v.spacing();
    HhdErrors {
        reconstruction: sum.sub(v).rms() / v.rms(),
        curl_p: interior_rms(&curl(&r.p.vectors, sp)) / interior_rms(&curl(&v.vectors, sp)),
        div_s: interior_rms(&divergence(&r.s.vectors, sp)) / interior_rms(&divergence(&v.vectors, sp)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HhdReport {
    pub fields: usize,
    pub worst: HhdErrors,
    pub seconds: f64,
}

/// Decomposes `fields` random 32×32 fields and keeps the worst errors.
pub fn run(fields: usize, seed: u64) -> Result<HhdReport> {
    let start = Instant::now();
    let layout = GridLayout::new(32, 32, 128, 128)?;
    let solver = HhdSolver::new(layout)?;
    let mut rng = super::rng(seed);
    let mut worst = HhdErrors::default();
    for _ in 0..fields {
        let v = random_field(layout, &mut rng);
        let e = errors(&v, &solver.decompose(&v)?);
        worst.reconstruction = worst.reconstruction.max(e.reconstruction);
        worst.curl_p = worst.curl_p.max(e.curl_p);
        worst.div_s = worst.div_s.max(e.div_s);
    }
    Ok(HhdReport {
        fields,
        worst,
        seconds: start.elapsed().as_secs_f64(),
    })
}
