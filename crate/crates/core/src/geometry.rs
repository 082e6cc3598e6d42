//! Contact geometry from tactile images.
//!
//! A small perceptron maps background-subtracted colour plus pixel position
//! to the in-plane normal components `(nx, ny)`; `nz` follows from unit
//! length. Normals are turned into slopes and integrated into a heightmap
//! by a Dirichlet Poisson solve.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::frame::DiffFrame;
use crate::grid::Grid;
use crate::poisson::PoissonIntegrator;
use crate::surface::{HeightMap, NormalMap};

pub const INPUTS: usize = 5;
pub const HIDDEN: usize = 32;
pub const OUTPUTS: usize = 2;
pub const DEFAULT_SPHERE_RADIUS_MM: f64 = 5.0;

/// One calibration press of a ball of known radius.
#[derive(Debug, Clone, Copy)]
pub struct SpherePress<'a> {
    pub diff: &'a DiffFrame,
    /// Contact centre in pixel coordinates.
    pub center_px: [f64; 2],
    pub contact_radius_px: f64,
    pub sphere_radius_mm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    /// Pixels this close to the contact rim on either side are skipped,
    /// since the membrane blurs the true edge.
    pub rim_margin_px: f64,
    /// Out-of-contact pixels are taken on a lattice with this stride.
    pub background_stride: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            rim_margin_px: 1.5,
            background_stride: 4,
        }
    }
}

/// `(input features, ground-truth normal)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationDataset {
    pub samples: Vec<([f64; INPUTS], [f64; 3])>,
    pub sphere_radius_mm: f64,
}

impl CalibrationDataset {
    pub fn new(samples: Vec<([f64; INPUTS], [f64; 3])>, sphere_radius_mm: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("calibration dataset is empty"));
        }
        for (_, n) in &samples {
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            if (len - 1.0).abs() > 1e-9 {
                return Err(invalid("calibration normals must be unit length"));
            }
        }
        Ok(Self {
            samples,
            sphere_radius_mm,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Network input for pixel `(x, y)` of a `w × h` difference image:
/// the three colour differences and the position scaled to `[-1, 1]`.
#[inline]
pub fn pixel_features(diff: &DiffFrame, x: usize, y: usize) -> [f64; INPUTS] {
    let p = diff.pixels()[(x, y)];
    let sx = 2.0 / (diff.width().max(2) - 1) as f64;
    let sy = 2.0 / (diff.height().max(2) - 1) as f64;
    [p[0], p[1], p[2], x as f64 * sx - 1.0, y as f64 * sy - 1.0]
}

/// Unit normal of a sphere of radius `r` at horizontal offset `(dx, dy)`
/// from its axis: `(dx, dy, √(r² − ρ²)) / r`.
pub fn sphere_normal(dx: f64, dy: f64, r: f64) -> [f64; 3] {
    let z = (r * r - dx * dx - dy * dy).max(0.0).sqrt();
    [dx / r, dy / r, z / r]
}

/// Labels in-contact pixels with analytic sphere normals and a lattice of
/// out-of-contact pixels with the flat normal.
pub fn build_calibration_dataset(presses: &[SpherePress<'_>], opts: &CalibrationOptions) -> Result<CalibrationDataset> {
    let mut samples = Vec::new();
    let mut radius = DEFAULT_SPHERE_RADIUS_MM;
    for p in presses {
        let ppm = p.diff.px_per_mm();
        let (w, h) = (p.diff.width(), p.diff.height());
        let [cx, cy] = p.center_px;
        if !(cx >= 0.0 && cy >= 0.0 && cx <= (w - 1) as f64 && cy <= (h - 1) as f64) {
            return Err(invalid(format!("press centre {:?} lies outside the frame", p.center_px)));
        }
        if !(p.contact_radius_px > 0.0 && p.contact_radius_px < p.sphere_radius_mm * ppm) {
            return Err(invalid("contact radius must be positive and smaller than the sphere"));
        }
        radius = p.sphere_radius_mm;
        let stride = opts.background_stride.max(1);
        for y in 0..h {
            for x in 0..w {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                let rho = (dx * dx + dy * dy).sqrt();
                if rho <= p.contact_radius_px - opts.rim_margin_px {
                    let n = sphere_normal(dx / ppm, dy / ppm, p.sphere_radius_mm);
                    samples.push((pixel_features(p.diff, x, y), n));
                } else if rho >= p.contact_radius_px + opts.rim_margin_px && x % stride == 0 && y % stride == 0 {
                    samples.push((pixel_features(p.diff, x, y), [0.0, 0.0, 1.0]));
                }
            }
        }
    }
    CalibrationDataset::new(samples, radius)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimizer {
    GradientDescent,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    /// Mini-batch size; `None` trains on the full batch.
    pub batch_size: Option<usize>,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 1e-2,
            optimizer: Optimizer::Adam,
            batch_size: Some(256),
            seed: 0,
        }
    }
}

/// `5 → 32 → 32 → 2` tanh perceptron with standardised inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Rgb2NormalModel {
    params: Vec<f64>,
    mean: [f64; INPUTS],
    scale: [f64; INPUTS],
}

const SIZES: [usize; 4] = [INPUTS, HIDDEN, HIDDEN, OUTPUTS];

const fn param_count() -> usize {
    let mut n = 0;
    let mut i = 0;
    while i < 3 {
        n += SIZES[i + 1] * (SIZES[i] + 1);
        i += 1;
    }
    n
}

/// Offsets of `(weights, biases)` for layer `l`; weights are row-major
/// `out × in`.
const fn layer_offsets(l: usize) -> (usize, usize) {
    let mut off = 0;
    let mut i = 0;
    while i < l {
        off += SIZES[i + 1] * (SIZES[i] + 1);
        i += 1;
    }
    (off, off + SIZES[l + 1] * SIZES[l])
}

pub const PARAM_COUNT: usize = param_count();

/// `o·tanh(|o|)/|o|`, keeping the in-plane normal strictly inside the unit
/// disc. Returns the value and its Jacobian.
fn squash(o: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let s = (o[0] * o[0] + o[1] * o[1]).sqrt();
    let (g, dg_over_s) = if s < 1e-4 {
        let s2 = s * s;
        (1.0 - s2 / 3.0, -2.0 / 3.0 + 8.0 * s2 / 15.0)
    } else {
        let t = s.tanh();
        let g = t / s;
        let dg = ((1.0 - t * t) * s - t) / (s * s);
        (g, dg / s)
    };
    let j = [
        [g + dg_over_s * o[0] * o[0], dg_over_s * o[0] * o[1]],
        [dg_over_s * o[1] * o[0], g + dg_over_s * o[1] * o[1]],
    ];
    ([g * o[0], g * o[1]], j)
}

#[derive(Default)]
struct Cache {
    x: [f64; INPUTS],
    a1: [f64; HIDDEN],
    a2: [f64; HIDDEN],
    o: [f64; OUTPUTS],
}

fn forward(params: &[f64], x: &[f64; INPUTS], c: &mut Cache) -> [f64; 2] {
    c.x = *x;
    let (w, b) = layer_offsets(0);
    for j in 0..HIDDEN {
        let row = &params[w + j * INPUTS..w + (j + 1) * INPUTS];
        let z = params[b + j] + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
        c.a1[j] = z.tanh();
    }
    let (w, b) = layer_offsets(1);
    for j in 0..HIDDEN {
        let row = &params[w + j * HIDDEN..w + (j + 1) * HIDDEN];
        let z = params[b + j] + row.iter().zip(&c.a1).map(|(a, v)| a * v).sum::<f64>();
        c.a2[j] = z.tanh();
    }
    let (w, b) = layer_offsets(2);
    for j in 0..OUTPUTS {
        let row = &params[w + j * HIDDEN..w + (j + 1) * HIDDEN];
        c.o[j] = params[b + j] + row.iter().zip(&c.a2).map(|(a, v)| a * v).sum::<f64>();
    }
    squash(c.o).0
}

/// Accumulates `d loss / d params` for one sample given `d loss / d n`.
fn backward(params: &[f64], c: &Cache, dn: [f64; 2], grad: &mut [f64]) {
    let (_, j) = squash(c.o);
    let d_o = [
        dn[0] * j[0][0] + dn[1] * j[1][0],
        dn[0] * j[0][1] + dn[1] * j[1][1],
    ];
    let (w3, b3) = layer_offsets(2);
    let mut d_a2 = [0.0; HIDDEN];
    for (k, dok) in d_o.iter().enumerate() {
        grad[b3 + k] += dok;
        for i in 0..HIDDEN {
            grad[w3 + k * HIDDEN + i] += dok * c.a2[i];
            d_a2[i] += dok * params[w3 + k * HIDDEN + i];
        }
    }
    let (w2, b2) = layer_offsets(1);
    let mut d_a1 = [0.0; HIDDEN];
    for k in 0..HIDDEN {
        let dz = d_a2[k] * (1.0 - c.a2[k] * c.a2[k]);
        grad[b2 + k] += dz;
        let row = w2 + k * HIDDEN;
        for i in 0..HIDDEN {
            grad[row + i] += dz * c.a1[i];
            d_a1[i] += dz * params[row + i];
        }
    }
    let (w1, b1) = layer_offsets(0);
    for k in 0..HIDDEN {
        let dz = d_a1[k] * (1.0 - c.a1[k] * c.a1[k]);
        grad[b1 + k] += dz;
        for i in 0..INPUTS {
            grad[w1 + k * INPUTS + i] += dz * c.x[i];
        }
    }
}

impl Rgb2NormalModel {
    /// Randomly initialised model with identity input scaling.
    pub fn init(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; PARAM_COUNT];
        for l in 0..3 {
            let (w, b) = layer_offsets(l);
            let (fan_in, fan_out) = (SIZES[l], SIZES[l + 1]);
            let lim = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for p in &mut params[w..b] {
                *p = lim * (2.0 * rng.random::<f64>() - 1.0);
            }
        }
        Self {
            params,
            mean: [0.0; INPUTS],
            scale: [1.0; INPUTS],
        }
    }

    pub fn from_parts(params: Vec<f64>, mean: [f64; INPUTS], scale: [f64; INPUTS]) -> Result<Self> {
        if params.len() != PARAM_COUNT {
            return Err(invalid(format!("expected {PARAM_COUNT} parameters, got {}", params.len())));
        }
        if params.iter().chain(&mean).chain(&scale).any(|v| !v.is_finite()) {
            return Err(invalid("model parameters must be finite"));
        }
        Ok(Self { params, mean, scale })
    }

    pub fn layer_sizes() -> [usize; 4] {
        SIZES
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn input_mean(&self) -> [f64; INPUTS] {
        self.mean
    }

    pub fn input_scale(&self) -> [f64; INPUTS] {
        self.scale
    }

    fn standardize(&self, x: &[f64; INPUTS]) -> [f64; INPUTS] {
        core::array::from_fn(|i| (x[i] - self.mean[i]) * self.scale[i])
    }

    /// Predicted unit normal for one feature vector.
    pub fn predict_one(&self, x: &[f64; INPUTS]) -> [f64; 3] {
        let mut c = Cache::default();
        let n = forward(&self.params, &self.standardize(x), &mut c);
        let nz = (1.0 - n[0] * n[0] - n[1] * n[1]).max(0.0).sqrt();
        [n[0], n[1], nz]
    }

    /// Mean over samples of `‖n̂_xy − n_xy‖²` at parameters `params`.
    pub fn loss_at(&self, params: &[f64], data: &CalibrationDataset) -> f64 {
        let mut c = Cache::default();
        let mut s = 0.0;
        for (x, t) in &data.samples {
            let n = forward(params, &self.standardize(x), &mut c);
            s += (n[0] - t[0]).powi(2) + (n[1] - t[1]).powi(2);
        }
        s / data.len() as f64
    }

    /// Loss and its gradient over the given sample indices.
    pub fn loss_and_grad(&self, params: &[f64], data: &CalibrationDataset, idx: Option<&[usize]>) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; PARAM_COUNT];
        let mut c = Cache::default();
        let mut s = 0.0;
        let all: Vec<usize>;
        let idx = match idx {
            Some(i) => i,
            None => {
                all = (0..data.len()).collect();
                &all
            }
        };
        let inv = 1.0 / idx.len() as f64;
        for &i in idx {
            let (x, t) = &data.samples[i];
            let n = forward(params, &self.standardize(x), &mut c);
            let e = [n[0] - t[0], n[1] - t[1]];
            s += e[0] * e[0] + e[1] * e[1];
            backward(params, &c, [2.0 * e[0] * inv, 2.0 * e[1] * inv], &mut grad);
        }
        (s * inv, grad)
    }
}

/// Result of [`fit_rgb2normal`].
#[derive(Debug, Clone)]
pub struct FitReport {
    pub model: Rgb2NormalModel,
    /// Full-batch loss after each epoch.
    pub loss_history: Vec<f64>,
}

impl FitReport {
    pub fn final_loss(&self) -> f64 {
        self.loss_history.last().copied().unwrap_or(f64::NAN)
    }
}

/// Trains an [`Rgb2NormalModel`] on `data`. Deterministic for a given seed.
pub fn fit_rgb2normal(data: &CalibrationDataset, opts: &FitOptions) -> Result<FitReport> {
    if data.is_empty() {
        return Err(invalid("calibration dataset is empty"));
    }
    let n = data.len() as f64;
    let mut mean = [0.0; INPUTS];
    let mut var = [0.0; INPUTS];
    for (x, _) in &data.samples {
        for i in 0..INPUTS {
            mean[i] += x[i] / n;
        }
    }
    for (x, _) in &data.samples {
        for i in 0..INPUTS {
            var[i] += (x[i] - mean[i]).powi(2) / n;
        }
    }
    let scale = var.map(|v| if v > 1e-18 { 1.0 / v.sqrt() } else { 1.0 });
    let mut model = Rgb2NormalModel::init(opts.seed);
    model.mean = mean;
    model.scale = scale;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5EED);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let batch = opts.batch_size.unwrap_or(data.len()).clamp(1, data.len());
    let mut m1 = vec![0.0; PARAM_COUNT];
    let mut m2 = vec![0.0; PARAM_COUNT];
    let (b1, b2, eps) = (0.9, 0.999, 1e-8);
    let mut step = 0i32;
    let mut history = Vec::with_capacity(opts.epochs);
    for _ in 0..opts.epochs {
        if batch < data.len() {
            order.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let (l, g) = model.loss_and_grad(&model.params, data, Some(chunk));
            if !l.is_finite() {
                return Err(Error::Diverged);
            }
            epoch_loss += l * chunk.len() as f64 / n;
            step += 1;
            match opts.optimizer {
                Optimizer::GradientDescent => {
                    for (p, gi) in model.params.iter_mut().zip(&g) {
                        *p -= opts.learning_rate * gi;
                    }
                }
                Optimizer::Adam => {
                    let c1 = 1.0 - b1.powi(step);
                    let c2 = 1.0 - b2.powi(step);
                    for k in 0..PARAM_COUNT {
                        m1[k] = b1 * m1[k] + (1.0 - b1) * g[k];
                        m2[k] = b2 * m2[k] + (1.0 - b2) * g[k] * g[k];
                        model.params[k] -= opts.learning_rate * (m1[k] / c1) / ((m2[k] / c2).sqrt() + eps);
                    }
                }
            }
        }
        if batch < data.len() {
            history.push(epoch_loss);
        } else {
            let l = model.loss_at(&model.params, data);
            if !l.is_finite() {
                return Err(Error::Diverged);
            }
            history.push(l);
        }
    }
    if model.params.iter().any(|p| !p.is_finite()) {
        return Err(Error::Diverged);
    }
    Ok(FitReport {
        model,
        loss_history: history,
    })
}

/// Per-pixel normal inference.
pub fn predict_normals(frame: &DiffFrame, model: &Rgb2NormalModel) -> NormalMap {
    let (w, h) = (frame.width(), frame.height());
    let g = Grid::from_fn(w, h, |x, y| model.predict_one(&pixel_features(frame, x, y)));
    NormalMap::new(g.map(|n| clamp_normal(*n))).expect("squashed normals are unit")
}

fn clamp_normal(n: [f64; 3]) -> [f64; 3] {
    // keep nz strictly positive when the squash saturates in floating point
    let r2 = n[0] * n[0] + n[1] * n[1];
    if r2 < 1.0 - 1e-12 {
        return n;
    }
    let s = ((1.0 - 1e-12) / r2).sqrt();
    let (x, y) = (n[0] * s, n[1] * s);
    [x, y, (1.0 - x * x - y * y).sqrt()]
}

/// Cached Poisson solver turning normal maps into heightmaps.
#[derive(Debug, Clone)]
pub struct NormalIntegrator {
    poisson: PoissonIntegrator,
}

impl NormalIntegrator {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        Ok(Self {
            poisson: PoissonIntegrator::new(width, height)?,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.poisson.shape()
    }

    /// Integrates slopes `(−nx/nz, −ny/nz)` with zero height on the frame
    /// edge, then shifts the minimum to zero.
    pub fn integrate(&self, n: &NormalMap, px_per_mm: f64) -> Result<HeightMap> {
        if (n.width(), n.height()) != self.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                actual: (n.width(), n.height()),
            });
        }
        let s = 1.0 / px_per_mm;
        let mut gx = Vec::with_capacity(n.values().len());
        let mut gy = Vec::with_capacity(n.values().len());
        for v in n.values().as_slice() {
            if !(v[2] > 0.0) {
                return Err(invalid("normals must have positive z"));
            }
            gx.push(-v[0] / v[2] * s);
            gy.push(-v[1] / v[2] * s);
        }
        let h = self.poisson.integrate(&gx, &gy);
        let g = Grid::from_vec(n.width(), n.height(), h)?;
        if g.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSolve);
        }
        Ok(HeightMap::new(g, px_per_mm)?.gauge_fixed())
    }
}

/// One-shot form of [`NormalIntegrator::integrate`].
pub fn integrate_normals(n: &NormalMap, px_per_mm: f64) -> Result<HeightMap> {
    NormalIntegrator::new(n.width(), n.height())?.integrate(n, px_per_mm)
}

/// Mean squared height difference in mm² after shifting both maps to a
/// zero minimum.
pub fn reconstruction_error(predicted: &HeightMap, truth: &HeightMap) -> Result<f64> {
    predicted.values().ensure_same_shape(truth.values())?;
    let (pm, tm) = (predicted.min(), truth.min());
    let n = predicted.values().len() as f64;
    Ok(predicted
        .values()
        .as_slice()
        .iter()
        .zip(truth.values().as_slice())
        .map(|(p, t)| ((p - pm) - (t - tm)).powi(2))
        .sum::<f64>()
        / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_dataset(n: usize, seed: u64) -> CalibrationDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..n)
            .map(|_| {
                let x: [f64; INPUTS] = core::array::from_fn(|_| rng.random::<f64>() - 0.5);
                let n = sphere_normal(0.6 * x[0], 0.6 * x[1], 1.0);
                (x, n)
            })
            .collect();
        CalibrationDataset::new(samples, 1.0).unwrap()
    }

    #[test]
    fn squash_jacobian_matches_differences() {
        for o in [[0.3, -0.2], [2.0, 1.0], [1e-6, 2e-6], [0.0, 0.0]] {
            let (_, j) = squash(o);
            for k in 0..2 {
                let h = 1e-6;
                let mut a = o;
                let mut b = o;
                a[k] += h;
                b[k] -= h;
                let (fa, _) = squash(a);
                let (fb, _) = squash(b);
                for r in 0..2 {
                    let fd = (fa[r] - fb[r]) / (2.0 * h);
                    assert!((fd - j[r][k]).abs() < 1e-7, "{o:?} {r} {k}");
                }
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let data = toy_dataset(40, 1);
        let model = Rgb2NormalModel::init(3);
        let (_, g) = model.loss_and_grad(model.params(), &data, None);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let k = rng.random_range(0..PARAM_COUNT);
            let h = 1e-5;
            let mut p = model.params().to_vec();
            p[k] += h;
            let lp = model.loss_at(&p, &data);
            p[k] -= 2.0 * h;
            let lm = model.loss_at(&p, &data);
            let fd = (lp - lm) / (2.0 * h);
            let rel = (fd - g[k]).abs() / fd.abs().max(g[k].abs()).max(1e-8);
            assert!(rel < 1e-4, "param {k}: fd {fd} analytic {}", g[k]);
        }
    }

    #[test]
    fn constant_dataset_is_memorised() {
        let x = [0.1, -0.2, 0.05, 0.3, -0.4];
        let n = sphere_normal(0.3, 0.1, 1.0);
        let data = CalibrationDataset::new(vec![(x, n); 16], 1.0).unwrap();
        let r = fit_rgb2normal(&data, &FitOptions::default()).unwrap();
        assert!(r.final_loss() < 1e-6, "{}", r.final_loss());
        let p = r.model.predict_one(&x);
        assert!(crate::surface::angle_deg(p, n) < 0.1);
    }

    #[test]
    fn full_batch_descent_is_monotone() {
        let data = toy_dataset(64, 2);
        let opts = FitOptions {
            epochs: 60,
            optimizer: Optimizer::GradientDescent,
            batch_size: None,
            ..FitOptions::default()
        };
        let r = fit_rgb2normal(&data, &opts).unwrap();
        for w in r.loss_history.windows(2) {
            assert!(w[1] <= w[0], "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn huge_learning_rate_diverges() {
        let data = toy_dataset(32, 4);
        let opts = FitOptions {
            epochs: 50,
            learning_rate: 1e200,
            optimizer: Optimizer::GradientDescent,
            batch_size: None,
            ..FitOptions::default()
        };
        assert_eq!(fit_rgb2normal(&data, &opts).unwrap_err(), Error::Diverged);
    }

    #[test]
    fn rim_normal_matches_cap_depth() {
        let (r, d) = (5.0, 1.0);
        let a = (2.0f64 * r * d - d * d).sqrt();
        let n = sphere_normal(a, 0.0, r);
        assert!((n[2] - (r - d) / r).abs() < 1e-12);
        assert_eq!(sphere_normal(0.0, 0.0, r), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn flat_normals_integrate_to_zero() {
        let h = integrate_normals(&NormalMap::flat(20, 16), 4.0).unwrap();
        assert!(h.values().as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn reconstruction_error_ignores_offsets() {
        let a = HeightMap::new(Grid::from_fn(8, 8, |x, y| (x * y) as f64 * 0.01), 2.0).unwrap();
        let b = HeightMap::new(a.values().map(|v| v + 0.1), 2.0).unwrap();
        assert!(reconstruction_error(&a, &b).unwrap() < 1e-24);
        assert_eq!(reconstruction_error(&a, &a).unwrap(), 0.0);
    }
}
