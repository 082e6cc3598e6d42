//! Pairwise softness ranking from compression clips.
//!
//! Each clip is resampled to [`CLIP_FRAMES`] frames. Frames are pooled to a
//! 16×16 grey patch, encoded with a tanh layer plus a fixed sinusoidal
//! position code, mixed by single-head self-attention and mean-pooled.
//! Per-frame normal force goes through its own tanh projection. The two
//! parts are concatenated into a [`EMBED_DIM`]-vector, and a pair is scored
//! by `f = e_Aᵀ W e_B + b` with `W = A − Aᵀ`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::frame::DiffFrame;
use crate::sim::FruitTexture;

pub const CLIP_FRAMES: usize = 16;
pub const PATCH: usize = 16;
pub const PIXELS: usize = PATCH * PATCH;
pub const FRAME_DIM: usize = 32;
pub const FORCE_DIM: usize = 8;
pub const EMBED_DIM: usize = FRAME_DIM + FORCE_DIM;
pub const MIN_CLIP_FRAMES: usize = 4;

/// Difference frames of one squeeze with per-frame normal-force estimates.
#[derive(Debug, Clone)]
pub struct CompressionClip {
    pub frames: Vec<DiffFrame>,
    pub forces: Vec<f64>,
    pub fruit: FruitTexture,
    pub shore_00: f64,
}

impl CompressionClip {
    pub fn new(frames: Vec<DiffFrame>, forces: Vec<f64>, fruit: FruitTexture, shore_00: f64) -> Result<Self> {
        if frames.len() < MIN_CLIP_FRAMES {
            return Err(invalid(format!(
                "clips need at least {MIN_CLIP_FRAMES} frames, got {}",
                frames.len()
            )));
        }
        if forces.len() != frames.len() {
            return Err(invalid("one force estimate per frame is required"));
        }
        if forces.iter().any(|f| !(*f >= 0.0)) {
            return Err(invalid("force series must be non-negative"));
        }
        Ok(Self {
            frames,
            forces,
            fruit,
            shore_00,
        })
    }
}

/// Network input derived from a clip: pooled frames and forces, resampled
/// to [`CLIP_FRAMES`] steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipFeatures {
    pub frames: Vec<[f64; PIXELS]>,
    pub forces: [f64; CLIP_FRAMES],
    pub fruit: FruitTexture,
    pub shore_00: f64,
}

/// Mean absolute change, averaged over channels, in each block of a 16×16
/// grid. Rectifying before pooling keeps fine texture from cancelling out.
pub fn pool_frame(frame: &DiffFrame) -> [f64; PIXELS] {
    let (w, h) = (frame.width(), frame.height());
    let mut sum = [0.0; PIXELS];
    let mut cnt = [0usize; PIXELS];
    for (x, y, p) in frame.pixels().iter_xy() {
        let k = (y * PATCH / h) * PATCH + x * PATCH / w;
        sum[k] += (p[0].abs() + p[1].abs() + p[2].abs()) / 3.0;
        cnt[k] += 1;
    }
    core::array::from_fn(|k| if cnt[k] > 0 { sum[k] / cnt[k] as f64 } else { 0.0 })
}

/// Index of source frame for each of the resampled steps.
pub fn resample_indices(n: usize) -> [usize; CLIP_FRAMES] {
    core::array::from_fn(|i| ((i * (n - 1)) as f64 / (CLIP_FRAMES - 1) as f64).round() as usize)
}

impl ClipFeatures {
    pub fn from_clip(clip: &CompressionClip) -> Result<Self> {
        if clip.frames.len() < MIN_CLIP_FRAMES {
            return Err(invalid("clip too short"));
        }
        let idx = resample_indices(clip.frames.len());
        Ok(Self {
            frames: idx.iter().map(|&i| pool_frame(&clip.frames[i])).collect(),
            forces: idx.map(|i| clip.forces[i]),
            fruit: clip.fruit,
            shore_00: clip.shore_00,
        })
    }
}

fn positional(t: usize, k: usize) -> f64 {
    let freq = 1.0 / 10f64.powf((2 * (k / 2)) as f64 / FRAME_DIM as f64);
    let a = t as f64 * freq;
    if k.is_multiple_of(2) {
        a.sin()
    } else {
        a.cos()
    }
}

// parameter layout
const WE: usize = 0;
const BE: usize = WE + FRAME_DIM * PIXELS;
const WQ: usize = BE + FRAME_DIM;
const WK: usize = WQ + FRAME_DIM * FRAME_DIM;
const WV: usize = WK + FRAME_DIM * FRAME_DIM;
const WF: usize = WV + FRAME_DIM * FRAME_DIM;
const BF: usize = WF + FORCE_DIM;
const CA: usize = BF + FORCE_DIM;
const CB: usize = CA + EMBED_DIM * EMBED_DIM;
pub const RANKER_PARAMS: usize = CB + 1;

/// Clip embedder and antisymmetric bilinear comparator.
#[derive(Debug, Clone, PartialEq)]
pub struct RankerModel {
    params: Vec<f64>,
    /// `(mean, scale)` applied to pooled pixels and to forces.
    pub pixel_norm: (f64, f64),
    pub force_norm: (f64, f64),
}

struct ClipCache {
    x: Vec<[f64; PIXELS]>,
    f: [f64; CLIP_FRAMES],
    h: [[f64; FRAME_DIM]; CLIP_FRAMES],
    q: [[f64; FRAME_DIM]; CLIP_FRAMES],
    k: [[f64; FRAME_DIM]; CLIP_FRAMES],
    v: [[f64; FRAME_DIM]; CLIP_FRAMES],
    att: [[f64; CLIP_FRAMES]; CLIP_FRAMES],
    g: [[f64; FORCE_DIM]; CLIP_FRAMES],
    e: [f64; EMBED_DIM],
}

fn matvec<const N: usize>(m: &[f64], x: &[f64; N]) -> [f64; N] {
    core::array::from_fn(|i| m[i * N..(i + 1) * N].iter().zip(x).map(|(a, b)| a * b).sum())
}

impl RankerModel {
    pub fn init(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; RANKER_PARAMS];
        let mut fill = |range: core::ops::Range<usize>, lim: f64, rng: &mut ChaCha8Rng| {
            for p in &mut params[range] {
                *p = lim * (2.0 * rng.random::<f64>() - 1.0);
            }
        };
        fill(WE..BE, (6.0 / (PIXELS + FRAME_DIM) as f64).sqrt(), &mut rng);
        let lim = (3.0 / FRAME_DIM as f64).sqrt();
        fill(WQ..WF, lim, &mut rng);
        fill(WF..CA, 1.0, &mut rng);
        fill(CA..CB, 0.1, &mut rng);
        Self {
            params,
            pixel_norm: (0.0, 1.0),
            force_norm: (0.0, 1.0),
        }
    }

    pub fn from_parts(params: Vec<f64>, pixel_norm: (f64, f64), force_norm: (f64, f64)) -> Result<Self> {
        if params.len() != RANKER_PARAMS {
            return Err(invalid(format!("expected {RANKER_PARAMS} parameters, got {}", params.len())));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(invalid("ranker parameters must be finite"));
        }
        Ok(Self {
            params,
            pixel_norm,
            force_norm,
        })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn bias(&self) -> f64 {
        self.params[CB]
    }

    pub fn set_bias(&mut self, b: f64) {
        self.params[CB] = b;
    }

    /// Comparator matrix `W = A − Aᵀ`, row-major.
    pub fn comparator(&self) -> Vec<f64> {
        comparator_of(&self.params)
    }

    fn run(&self, params: &[f64], clip: &ClipFeatures) -> ClipCache {
        let (pm, ps) = self.pixel_norm;
        let (fm, fs) = self.force_norm;
        let x: Vec<[f64; PIXELS]> = clip.frames.iter().map(|fr| fr.map(|v| (v - pm) * ps)).collect();
        let f = clip.forces.map(|v| (v - fm) * fs);
        let mut c = ClipCache {
            x,
            f,
            h: [[0.0; FRAME_DIM]; CLIP_FRAMES],
            q: [[0.0; FRAME_DIM]; CLIP_FRAMES],
            k: [[0.0; FRAME_DIM]; CLIP_FRAMES],
            v: [[0.0; FRAME_DIM]; CLIP_FRAMES],
            att: [[0.0; CLIP_FRAMES]; CLIP_FRAMES],
            g: [[0.0; FORCE_DIM]; CLIP_FRAMES],
            e: [0.0; EMBED_DIM],
        };
        for t in 0..CLIP_FRAMES {
            for j in 0..FRAME_DIM {
                let row = &params[WE + j * PIXELS..WE + (j + 1) * PIXELS];
                let u: f64 = row.iter().zip(&c.x[t]).map(|(a, b)| a * b).sum::<f64>() + params[BE + j] + positional(t, j);
                c.h[t][j] = u.tanh();
            }
            c.q[t] = matvec(&params[WQ..WK], &c.h[t]);
            c.k[t] = matvec(&params[WK..WV], &c.h[t]);
            c.v[t] = matvec(&params[WV..WF], &c.h[t]);
            for j in 0..FORCE_DIM {
                c.g[t][j] = (params[WF + j] * c.f[t] + params[BF + j]).tanh();
            }
        }
        let scale = 1.0 / (FRAME_DIM as f64).sqrt();
        for t in 0..CLIP_FRAMES {
            let mut s = [0.0; CLIP_FRAMES];
            for (u, su) in s.iter_mut().enumerate() {
                *su = scale * c.q[t].iter().zip(&c.k[u]).map(|(a, b)| a * b).sum::<f64>();
            }
            let m = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for su in s.iter_mut() {
                *su = (*su - m).exp();
                z += *su;
            }
            c.att[t] = s.map(|v| v / z);
        }
        let inv = 1.0 / CLIP_FRAMES as f64;
        for t in 0..CLIP_FRAMES {
            for u in 0..CLIP_FRAMES {
                let a = c.att[t][u] * inv;
                for j in 0..FRAME_DIM {
                    c.e[j] += a * c.v[u][j];
                }
            }
            for j in 0..FORCE_DIM {
                c.e[FRAME_DIM + j] += inv * c.g[t][j];
            }
        }
        c
    }

    fn backprop(params: &[f64], c: &ClipCache, de: &[f64; EMBED_DIM], grad: &mut [f64]) {
        let inv = 1.0 / CLIP_FRAMES as f64;
        let scale = 1.0 / (FRAME_DIM as f64).sqrt();
        let d_o: [f64; FRAME_DIM] = core::array::from_fn(|j| de[j] * inv);
        let mut dv = [[0.0; FRAME_DIM]; CLIP_FRAMES];
        let mut dq = [[0.0; FRAME_DIM]; CLIP_FRAMES];
        let mut dk = [[0.0; FRAME_DIM]; CLIP_FRAMES];
        for t in 0..CLIP_FRAMES {
            let mut da = [0.0; CLIP_FRAMES];
            for u in 0..CLIP_FRAMES {
                da[u] = d_o.iter().zip(&c.v[u]).map(|(a, b)| a * b).sum();
                for j in 0..FRAME_DIM {
                    dv[u][j] += c.att[t][u] * d_o[j];
                }
            }
            let mean: f64 = (0..CLIP_FRAMES).map(|u| c.att[t][u] * da[u]).sum();
            for u in 0..CLIP_FRAMES {
                let ds = c.att[t][u] * (da[u] - mean) * scale;
                for j in 0..FRAME_DIM {
                    dq[t][j] += ds * c.k[u][j];
                    dk[u][j] += ds * c.q[t][j];
                }
            }
        }
        for t in 0..CLIP_FRAMES {
            let mut dh = [0.0; FRAME_DIM];
            for (base, d) in [(WQ, &dq[t]), (WK, &dk[t]), (WV, &dv[t])] {
                for i in 0..FRAME_DIM {
                    if d[i] == 0.0 {
                        continue;
                    }
                    let row = base + i * FRAME_DIM;
                    for j in 0..FRAME_DIM {
                        grad[row + j] += d[i] * c.h[t][j];
                        dh[j] += d[i] * params[row + j];
                    }
                }
            }
            for j in 0..FRAME_DIM {
                let du = dh[j] * (1.0 - c.h[t][j] * c.h[t][j]);
                grad[BE + j] += du;
                let row = &mut grad[WE + j * PIXELS..WE + (j + 1) * PIXELS];
                for (gk, xk) in row.iter_mut().zip(&c.x[t]) {
                    *gk += du * xk;
                }
            }
            for j in 0..FORCE_DIM {
                let dz = de[FRAME_DIM + j] * inv * (1.0 - c.g[t][j] * c.g[t][j]);
                grad[WF + j] += dz * c.f[t];
                grad[BF + j] += dz;
            }
        }
    }

    fn embed_with(&self, params: &[f64], clip: &ClipFeatures) -> [f64; EMBED_DIM] {
        self.run(params, clip).e
    }

    pub fn embed(&self, clip: &ClipFeatures) -> [f64; EMBED_DIM] {
        self.embed_with(&self.params, clip)
    }

    /// `e_Aᵀ W e_B + b`.
    pub fn compare(&self, ea: &[f64; EMBED_DIM], eb: &[f64; EMBED_DIM]) -> f64 {
        bilinear(&self.comparator(), ea, eb) + self.bias()
    }

    /// Mean binary cross-entropy over `pairs` of `(a, b, label)` clip
    /// indices, at parameters `params`.
    pub fn loss_at(&self, params: &[f64], clips: &[ClipFeatures], pairs: &[(usize, usize, f64)]) -> f64 {
        let emb: Vec<_> = clips.iter().map(|c| self.embed_with(params, c)).collect();
        let w = comparator_of(params);
        pairs
            .iter()
            .map(|&(a, b, y)| bce(bilinear(&w, &emb[a], &emb[b]) + params[CB], y))
            .sum::<f64>()
            / pairs.len() as f64
    }

    /// Loss and gradient with respect to all parameters.
    pub fn loss_and_grad(&self, params: &[f64], clips: &[ClipFeatures], pairs: &[(usize, usize, f64)]) -> (f64, Vec<f64>) {
        let caches: Vec<ClipCache> = clips.iter().map(|c| self.run(params, c)).collect();
        let w = comparator_of(params);
        let mut grad = vec![0.0; RANKER_PARAMS];
        let mut de = vec![[0.0; EMBED_DIM]; clips.len()];
        let mut gw = vec![0.0; EMBED_DIM * EMBED_DIM];
        let inv = 1.0 / pairs.len() as f64;
        let mut loss = 0.0;
        for &(a, b, y) in pairs {
            let (ea, eb) = (&caches[a].e, &caches[b].e);
            let f = bilinear(&w, ea, eb) + params[CB];
            loss += bce(f, y);
            let d = (sigmoid(f) - y) * inv;
            grad[CB] += d;
            for i in 0..EMBED_DIM {
                for j in 0..EMBED_DIM {
                    gw[i * EMBED_DIM + j] += d * ea[i] * eb[j];
                    de[a][i] += d * w[i * EMBED_DIM + j] * eb[j];
                    de[b][j] += d * w[i * EMBED_DIM + j] * ea[i];
                }
            }
        }
        for i in 0..EMBED_DIM {
            for j in 0..EMBED_DIM {
                grad[CA + i * EMBED_DIM + j] += gw[i * EMBED_DIM + j] - gw[j * EMBED_DIM + i];
            }
        }
        for (c, d) in caches.iter().zip(&de) {
            if d.iter().any(|v| *v != 0.0) {
                Self::backprop(params, c, d, &mut grad);
            }
        }
        (loss * inv, grad)
    }
}

fn comparator_of(params: &[f64]) -> Vec<f64> {
    let a = &params[CA..CB];
    let mut w = vec![0.0; EMBED_DIM * EMBED_DIM];
    for i in 0..EMBED_DIM {
        for j in 0..EMBED_DIM {
            w[i * EMBED_DIM + j] = a[i * EMBED_DIM + j] - a[j * EMBED_DIM + i];
        }
    }
    w
}

fn bilinear(w: &[f64], ea: &[f64], eb: &[f64]) -> f64 {
    let mut s = 0.0;
    for (i, a) in ea.iter().enumerate() {
        s += a * w[i * eb.len()..(i + 1) * eb.len()].iter().zip(eb).map(|(x, y)| x * y).sum::<f64>();
    }
    s
}

#[inline]
fn sigmoid(f: f64) -> f64 {
    1.0 / (1.0 + (-f).exp())
}

/// `−y log σ(f) − (1−y) log(1−σ(f))`, evaluated stably.
#[inline]
fn bce(f: f64, y: f64) -> f64 {
    f.max(0.0) - f * y + (-f.abs()).exp().ln_1p()
}

pub fn encode_clip(clip: &CompressionClip, model: &RankerModel) -> Result<[f64; EMBED_DIM]> {
    Ok(model.embed(&ClipFeatures::from_clip(clip)?))
}

pub fn compare_pair(ea: &[f64; EMBED_DIM], eb: &[f64; EMBED_DIM], model: &RankerModel) -> f64 {
    model.compare(ea, eb)
}

/// Ordered pairs `(a, b, label)` of clips from the same fruit with different
/// hardness; the label is 1 when `a` is harder.
pub fn make_pairs(clips: &[ClipFeatures], subset: &[usize]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for &a in subset {
        for &b in subset {
            let (ca, cb) = (&clips[a], &clips[b]);
            if a != b && ca.fruit == cb.fruit && ca.shore_00 != cb.shore_00 {
                out.push((a, b, if ca.shore_00 > cb.shore_00 { 1.0 } else { 0.0 }));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Keep `b` at zero when false.
    pub train_bias: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            epochs: 300,
            learning_rate: 1e-2,
            seed: 0,
            train_bias: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: RankerModel,
    /// Loss before each update, then the final loss.
    pub loss_history: Vec<f64>,
}

/// Full-batch gradient descent on pair cross-entropy.
pub fn train_ranker(clips: &[ClipFeatures], pairs: &[(usize, usize, f64)], opts: &TrainOptions) -> Result<TrainReport> {
    if pairs.is_empty() {
        return Err(invalid("no training pairs"));
    }
    for &(a, b, y) in pairs {
        if a >= clips.len() || b >= clips.len() {
            return Err(invalid("pair index out of range"));
        }
        if clips[a].fruit != clips[b].fruit {
            return Err(invalid("pairs must come from the same fruit"));
        }
        if y != 0.0 && y != 1.0 {
            return Err(invalid("pair labels must be 0 or 1"));
        }
    }
    let mut model = RankerModel::init(opts.seed);
    let used: Vec<bool> = {
        let mut u = vec![false; clips.len()];
        for &(a, b, _) in pairs {
            u[a] = true;
            u[b] = true;
        }
        u
    };
    let px: Vec<f64> = clips
        .iter()
        .zip(&used)
        .filter(|(_, u)| **u)
        .flat_map(|(c, _)| c.frames.iter().flatten().copied())
        .collect();
    let fs: Vec<f64> = clips
        .iter()
        .zip(&used)
        .filter(|(_, u)| **u)
        .flat_map(|(c, _)| c.forces)
        .collect();
    model.pixel_norm = standardizer(&px);
    model.force_norm = standardizer(&fs);
    model.set_bias(0.0);
    let mut history = Vec::with_capacity(opts.epochs + 1);
    for _ in 0..opts.epochs {
        let (l, mut g) = model.loss_and_grad(&model.params, clips, pairs);
        if !l.is_finite() {
            return Err(Error::Diverged);
        }
        history.push(l);
        if !opts.train_bias {
            g[CB] = 0.0;
        }
        for (p, gi) in model.params.iter_mut().zip(&g) {
            *p -= opts.learning_rate * gi;
        }
    }
    let l = model.loss_at(&model.params, clips, pairs);
    if !l.is_finite() {
        return Err(Error::Diverged);
    }
    history.push(l);
    Ok(TrainReport {
        model,
        loss_history: history,
    })
}

fn standardizer(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 1.0);
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, if var > 1e-24 { 1.0 / var.sqrt() } else { 1.0 })
}

/// Accuracy of pairs involving clips of one fruit and hardness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupAccuracy {
    pub fruit: FruitTexture,
    pub shore_00: f64,
    pub correct: usize,
    pub total: usize,
}

impl GroupAccuracy {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub aggregate: f64,
    pub groups: Vec<GroupAccuracy>,
}

impl AccuracyReport {
    /// Accuracy over all pairs of one fruit.
    pub fn fruit_accuracy(&self, fruit: FruitTexture) -> Option<f64> {
        let (c, t) = self
            .groups
            .iter()
            .filter(|g| g.fruit == fruit)
            .fold((0, 0), |(c, t), g| (c + g.correct, t + g.total));
        (t > 0).then(|| c as f64 / t as f64)
    }
}

/// Fraction of pairs where `f ≥ 0` agrees with the label, overall and per
/// `(fruit, hardness)`; a pair counts toward the groups of both clips.
pub fn eval_pairwise_accuracy(model: &RankerModel, clips: &[ClipFeatures], pairs: &[(usize, usize, f64)]) -> AccuracyReport {
    let emb: Vec<_> = clips.iter().map(|c| model.embed(c)).collect();
    let mut groups: Vec<GroupAccuracy> = Vec::new();
    let mut correct_total = 0;
    for &(a, b, y) in pairs {
        let f = model.compare(&emb[a], &emb[b]);
        let ok = (f >= 0.0) == (y == 1.0);
        correct_total += ok as usize;
        for c in [&clips[a], &clips[b]] {
            let idx = match groups.iter().position(|g| g.fruit == c.fruit && g.shore_00 == c.shore_00) {
                Some(i) => i,
                None => {
                    groups.push(GroupAccuracy {
                        fruit: c.fruit,
                        shore_00: c.shore_00,
                        correct: 0,
                        total: 0,
                    });
                    groups.len() - 1
                }
            };
            groups[idx].correct += ok as usize;
            groups[idx].total += 1;
        }
    }
    groups.sort_by(|a, b| a.fruit.cmp(&b.fruit).then(b.shore_00.total_cmp(&a.shore_00)));
    AccuracyReport {
        aggregate: correct_total as f64 / pairs.len().max(1) as f64,
        groups,
    }
}
