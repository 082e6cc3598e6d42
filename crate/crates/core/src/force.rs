//! Contact force estimation.
//!
//! Normal force is a linear function of the gripper motor current. Shear
//! force is regressed on features of the gel marker displacement field
//! after splitting it into curl-free, divergence-free and harmonic parts.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::field::{derivative_taps, gradient, rotated_gradient, trapezoid_weight, DisplacementField, ScalarField};
use crate::grid::{Grid, GridLayout};
use crate::linalg::lstsq;
use crate::markers::MarkerSet;
use crate::poisson::{GridLeastSquares, StencilRow};
use crate::slip::ContactMask;

/// `F_n = slope · I + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalForceModel {
    pub slope: f64,
    pub intercept: f64,
}

impl NormalForceModel {
    pub fn predict(&self, current: f64) -> f64 {
        self.slope * current + self.intercept
    }
}

/// Ordinary least squares line through `(current, force)` samples.
pub fn fit_normal_force(samples: &[(f64, f64)]) -> Result<NormalForceModel> {
    if samples.len() < 2 {
        return Err(Error::RankDeficient);
    }
    let n = samples.len() as f64;
    let mi = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mf = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(i, f) in samples {
        sxx += (i - mi) * (i - mi);
        sxy += (i - mi) * (f - mf);
    }
    let spread = samples.iter().map(|s| s.0.abs()).fold(0.0, f64::max).max(1.0);
    if !(sxx > 1e-24 * n * spread * spread) {
        return Err(Error::RankDeficient);
    }
    let slope = sxy / sxx;
    Ok(NormalForceModel {
        slope,
        intercept: mf - slope * mi,
    })
}

pub fn predict_normal_force(current: f64, model: &NormalForceModel) -> f64 {
    model.predict(current)
}

/// Coefficient of determination of `pred` against `truth`.
pub fn r_squared(pred: &[f64], truth: &[f64]) -> f64 {
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let ss_res: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    1.0 - ss_res / ss_tot
}

/// Mean absolute percentage error, in percent.
pub fn mape(pred: &[f64], truth: &[f64]) -> f64 {
    100.0 * pred.iter().zip(truth).map(|(p, t)| ((p - t) / t).abs()).sum::<f64>() / truth.len() as f64
}

pub fn mae(pred: &[f64], truth: &[f64]) -> f64 {
    pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / truth.len() as f64
}

/// Inverse-distance weighting settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdwOptions {
    pub neighbors: usize,
    pub power: f64,
}

impl Default for IdwOptions {
    fn default() -> Self {
        Self {
            neighbors: 4,
            power: 2.0,
        }
    }
}

/// Scatters per-marker displacements onto a regular lattice by inverse
/// distance weighting over the nearest markers at rest.
pub fn interpolate_markers(
    before: &MarkerSet,
    after: &MarkerSet,
    layout: GridLayout,
    opts: IdwOptions,
) -> Result<DisplacementField> {
    let pairs = before.matched(after);
    if pairs.len() < 3 {
        return Err(Error::TooFewMarkers(pairs.len()));
    }
    let k = opts.neighbors.clamp(1, pairs.len());
    let samples: Vec<([f64; 2], [f64; 2])> = pairs
        .iter()
        .map(|(a, b)| ([a.x, a.y], [b.x - a.x, b.y - a.y]))
        .collect();
    let mut near: Vec<(f64, usize)> = Vec::with_capacity(samples.len());
    let vectors = Grid::from_fn(layout.cols, layout.rows, |c, r| {
        let p = layout.node_position(c, r);
        near.clear();
        near.extend(samples.iter().enumerate().map(|(i, (q, _))| {
            let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
            (dx * dx + dy * dy, i)
        }));
        near.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0));
        let nearest = &mut near[..k];
        if let Some(&(_, i)) = nearest.iter().find(|(d2, _)| *d2 < 1e-24) {
            return samples[i].1;
        }
        let (mut s, mut wsum) = ([0.0; 2], 0.0);
        for &(d2, i) in nearest.iter() {
            let w = d2.powf(-0.5 * opts.power);
            s[0] += w * samples[i].1[0];
            s[1] += w * samples[i].1[1];
            wsum += w;
        }
        [s[0] / wsum, s[1] / wsum]
    });
    DisplacementField::new(layout, vectors)
}

/// Helmholtz–Hodge decomposition `V = P + S + H`.
#[derive(Debug, Clone, PartialEq)]
pub struct HhdResult {
    /// Curl-free part `∇φ`.
    pub p: DisplacementField,
    /// Divergence-free part `(∂ψ/∂y, −∂ψ/∂x)`.
    pub s: DisplacementField,
    /// Harmonic remainder.
    pub h: DisplacementField,
    pub phi: ScalarField,
    pub psi: ScalarField,
}

/// Factored decomposition operators for one lattice.
///
/// `φ` minimises the trapezoid-weighted misfit `‖∇φ − V‖` with free
/// boundary values, the discrete Neumann problem. `ψ` minimises
/// `‖(∂ψ/∂y, −∂ψ/∂x) − V‖` with `ψ = 0` on the boundary. Derivatives are
/// the central/one-sided stencils of [`crate::field::gradient`], so `P`
/// and `S` are orthogonal in the weighted inner product and have exactly
/// zero interior curl and divergence respectively.
#[derive(Debug, Clone)]
pub struct HhdSolver {
    layout: GridLayout,
    phi: GridLeastSquares,
    psi: GridLeastSquares,
}

impl HhdSolver {
    pub fn new(layout: GridLayout) -> Result<Self> {
        let (cols, rows) = (layout.cols, layout.rows);
        if cols < 8 || rows < 8 {
            return Err(invalid(format!("decomposition needs at least 8×8 nodes, got {cols}×{rows}")));
        }
        let [dx, dy] = layout.spacing();
        let stencil = Self::rows(cols, rows, dx, dy);
        let phi = GridLeastSquares::new(cols * rows, stencil.clone(), |n| n == 0)?;
        let psi = GridLeastSquares::new(cols * rows, stencil, |n| {
            let (c, r) = (n % cols, n / cols);
            c == 0 || r == 0 || c + 1 == cols || r + 1 == rows
        })?;
        Ok(Self { layout, phi, psi })
    }

    /// One `∂x` row per node followed by one `∂y` row per node.
    fn rows(cols: usize, rows: usize, dx: f64, dy: f64) -> Vec<StencilRow> {
        let mut out = Vec::with_capacity(2 * cols * rows);
        for r in 0..rows {
            for c in 0..cols {
                let t = derivative_taps(c, cols);
                out.push(StencilRow {
                    weight: trapezoid_weight(c, r, cols, rows),
                    taps: [(r * cols + t[0].0, t[0].1 / dx), (r * cols + t[1].0, t[1].1 / dx)],
                });
            }
        }
        for r in 0..rows {
            for c in 0..cols {
                let t = derivative_taps(r, rows);
                out.push(StencilRow {
                    weight: trapezoid_weight(c, r, cols, rows),
                    taps: [(t[0].0 * cols + c, t[0].1 / dy), (t[1].0 * cols + c, t[1].1 / dy)],
                });
            }
        }
        out
    }

    pub fn layout(&self) -> GridLayout {
        self.layout
    }

    pub fn decompose(&self, v: &DisplacementField) -> Result<HhdResult> {
        if v.layout.cols != self.layout.cols || v.layout.rows != self.layout.rows {
            return Err(Error::ShapeMismatch {
                expected: (self.layout.cols, self.layout.rows),
                actual: (v.layout.cols, v.layout.rows),
            });
        }
        let vs = v.vectors.as_slice();
        let n = vs.len();
        let mut t_phi = Vec::with_capacity(2 * n);
        t_phi.extend(vs.iter().map(|a| a[0]));
        t_phi.extend(vs.iter().map(|a| a[1]));
        let mut t_psi = Vec::with_capacity(2 * n);
        t_psi.extend(vs.iter().map(|a| -a[1]));
        t_psi.extend(vs.iter().map(|a| a[0]));
        let (cols, rows) = (self.layout.cols, self.layout.rows);
        let phi = Grid::from_vec(cols, rows, self.phi.solve(&t_phi))?;
        let psi = Grid::from_vec(cols, rows, self.psi.solve(&t_psi))?;
        let sp = v.spacing();
        let p = DisplacementField::new(v.layout, gradient(&phi, sp))?;
        let s = DisplacementField::new(v.layout, rotated_gradient(&psi, sp))?;
        let h = v.sub(&p).sub(&s);
        if h.vectors.as_slice().iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::SingularSolve);
        }
        Ok(HhdResult { p, s, h, phi, psi })
    }
}

/// One-shot form of [`HhdSolver::decompose`].
pub fn hhd_decompose(v: &DisplacementField) -> Result<HhdResult> {
    HhdSolver::new(v.layout)?.decompose(v)
}

/// `[v̄x, v̄y, p̄x, p̄x², p̄y, p̄y², s̄x, s̄x², s̄y, s̄y²]`, bars denoting means
/// over lattice nodes inside the contact.
pub type ShearFeature = [f64; 10];

pub fn shear_features(v: &DisplacementField, hhd: &HhdResult, mask: &ContactMask) -> Result<ShearFeature> {
    let mut sums = [[0.0; 2]; 3];
    let mut count = 0usize;
    for r in 0..v.layout.rows {
        for c in 0..v.layout.cols {
            let p = v.layout.node_position(c, r);
            if !mask.contains(p[0], p[1]) {
                continue;
            }
            count += 1;
            for (k, f) in [&v.vectors, &hhd.p.vectors, &hhd.s.vectors].iter().enumerate() {
                sums[k][0] += f[(c, r)][0];
                sums[k][1] += f[(c, r)][1];
            }
        }
    }
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    let m = sums.map(|s| [s[0] / count as f64, s[1] / count as f64]);
    let [vb, pb, sb] = m;
    Ok([
        vb[0],
        vb[1],
        pb[0],
        pb[0] * pb[0],
        pb[1],
        pb[1] * pb[1],
        sb[0],
        sb[0] * sb[0],
        sb[1],
        sb[1] * sb[1],
    ])
}

/// `F_x = w_xᵀ x + b_x`, `F_y = w_yᵀ x + b_y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearModel {
    pub w_x: ShearFeature,
    pub w_y: ShearFeature,
    pub b_x: f64,
    pub b_y: f64,
}

impl ShearModel {
    pub fn predict(&self, x: &ShearFeature) -> [f64; 2] {
        let dot = |w: &ShearFeature| w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        [dot(&self.w_x) + self.b_x, dot(&self.w_y) + self.b_y]
    }
}

/// Per-axis least squares with an intercept.
pub fn fit_shear_model(features: &[ShearFeature], labels: &[[f64; 2]]) -> Result<ShearModel> {
    if features.len() != labels.len() {
        return Err(invalid("feature and label counts differ"));
    }
    let rows = features.len();
    if rows < 11 {
        return Err(invalid(format!("shear fit needs at least 11 samples, got {rows}")));
    }
    let mut x = vec![0.0; rows * 11];
    for (i, f) in features.iter().enumerate() {
        x[i * 11..i * 11 + 10].copy_from_slice(f);
        x[i * 11 + 10] = 1.0;
    }
    let solve = |axis: usize| {
        let y: Vec<f64> = labels.iter().map(|l| l[axis]).collect();
        lstsq(&x, &y, rows, 11)
    };
    let (bx, by) = (solve(0)?, solve(1)?);
    let mut w_x = [0.0; 10];
    let mut w_y = [0.0; 10];
    w_x.copy_from_slice(&bx[..10]);
    w_y.copy_from_slice(&by[..10]);
    Ok(ShearModel {
        w_x,
        w_y,
        b_x: bx[10],
        b_y: by[10],
    })
}

pub fn predict_shear(x: &ShearFeature, model: &ShearModel) -> [f64; 2] {
    model.predict(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{curl, divergence, interior_rms, weighted_inner};
    use crate::markers::Marker;

    fn layout(n: usize) -> GridLayout {
        GridLayout::new(n, n, 128, 128).unwrap()
    }

    #[test]
    fn exact_line_is_recovered() {
        let s: Vec<(f64, f64)> = (0..50).map(|i| (i as f64 * 0.1, 4.2 * i as f64 * 0.1 + 0.1)).collect();
        let m = fit_normal_force(&s).unwrap();
        assert!((m.slope - 4.2).abs() < 1e-9 && (m.intercept - 0.1).abs() < 1e-9);
        let m = fit_normal_force(&[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert!((m.slope - 1.0).abs() < 1e-15 && m.intercept.abs() < 1e-15);
        assert_eq!(fit_normal_force(&[(2.0, 1.0), (2.0, 3.0)]), Err(Error::RankDeficient));
        let m = NormalForceModel {
            slope: 4.2,
            intercept: 0.1,
        };
        assert!((predict_normal_force(1.0, &m) - 4.3).abs() < 1e-15);
    }

    #[test]
    fn idw_reproduces_constants() {
        let rest = MarkerSet::lattice(15, 15, 128, 128);
        let moved = MarkerSet::new(
            rest.markers().iter().map(|m| Marker { x: m.x + 5.0, ..*m }).collect(),
            15,
            15,
        )
        .unwrap();
        let f = interpolate_markers(&rest, &moved, layout(32), IdwOptions::default()).unwrap();
        for v in f.vectors.as_slice() {
            assert!((v[0] - 5.0).abs() < 1e-12 && v[1].abs() < 1e-12);
        }
        let z = interpolate_markers(&rest, &rest, layout(32), IdwOptions::default()).unwrap();
        assert_eq!(z.rms(), 0.0);
        let few = MarkerSet::lattice(1, 2, 128, 128);
        assert_eq!(
            interpolate_markers(&few, &few, layout(32), IdwOptions::default()).unwrap_err(),
            Error::TooFewMarkers(2)
        );
    }

    #[test]
    fn zero_field_decomposes_to_zero() {
        let r = hhd_decompose(&DisplacementField::zeros(layout(16))).unwrap();
        assert_eq!(r.p.rms() + r.s.rms() + r.h.rms(), 0.0);
    }

    #[test]
    fn constant_field_is_a_gradient() {
        let l = layout(16);
        let v = DisplacementField::from_fn(l, |_| [2.0, 0.0]);
        let r = hhd_decompose(&v).unwrap();
        assert!(r.p.sub(&v).rms() < 1e-10);
        assert!(r.s.rms() < 1e-10 && r.h.rms() < 1e-10);
        let mask = ContactMask::new(Grid::filled(128, 128, true), 0.1);
        let f = shear_features(&v, &r, &mask).unwrap();
        let want = [2.0, 0.0, 2.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!(f.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-9), "{f:?}");
    }

    #[test]
    fn decomposition_properties() {
        let l = layout(24);
        let v = DisplacementField::from_fn(l, |[x, y]| {
            let (u, w) = (x / 127.0, y / 127.0);
            [(3.0 * u).sin() + w * w - 0.3 * w, u * w + (2.0 * w).cos() + 0.5 * u]
        });
        let r = hhd_decompose(&v).unwrap();
        let sp = l.spacing();
        let recon = r.p.add(&r.s).add(&r.h).sub(&v);
        assert!(recon.vectors.as_slice().iter().flatten().all(|e| e.abs() < 1e-12 * v.rms()));
        assert!(interior_rms(&curl(&r.p.vectors, sp)) < 1e-9 * v.rms());
        assert!(interior_rms(&divergence(&r.s.vectors, sp)) < 1e-9 * v.rms());
        let ip = weighted_inner(&r.p.vectors, &r.s.vectors);
        let norm = (weighted_inner(&r.p.vectors, &r.p.vectors) * weighted_inner(&r.s.vectors, &r.s.vectors)).sqrt();
        assert!(ip.abs() < 1e-9 * norm);
    }

    #[test]
    fn radial_gradient_is_curl_free() {
        let l = layout(32);
        let v = DisplacementField::from_fn(l, |[x, y]| {
            let (u, w) = (x / 127.0 - 0.5, y / 127.0 - 0.5);
            [2.0 * u, 2.0 * w]
        });
        let r = hhd_decompose(&v).unwrap();
        assert!(r.s.rms() < 0.05 * v.rms());
    }

    #[test]
    fn empty_mask_is_an_error() {
        let l = layout(16);
        let v = DisplacementField::zeros(l);
        let r = hhd_decompose(&v).unwrap();
        let m = ContactMask::new(Grid::filled(128, 128, false), 0.3);
        assert_eq!(shear_features(&v, &r, &m), Err(Error::EmptyMask));
        let m = ContactMask::new(Grid::filled(128, 128, true), 0.3);
        assert_eq!(shear_features(&v, &r, &m).unwrap(), [0.0; 10]);
    }

    #[test]
    fn shear_model_prediction_by_hand() {
        let mut w_x = [0.0; 10];
        w_x[0] = 1.0;
        let m = ShearModel {
            w_x,
            w_y: [0.0; 10],
            b_x: 0.0,
            b_y: 0.0,
        };
        let mut x = [0.0; 10];
        assert_eq!(predict_shear(&x, &m), [0.0, 0.0]);
        x[0] = 0.5;
        assert_eq!(predict_shear(&x, &m), [0.5, 0.0]);
    }

    #[test]
    fn metrics_on_perfect_predictions() {
        let t = [1.0, 2.0, 4.0];
        assert_eq!(r_squared(&t, &t), 1.0);
        assert_eq!(mape(&t, &t), 0.0);
        assert!((mape(&[1.1, 2.2, 4.4], &t) - 10.0).abs() < 1e-9);
        assert_eq!(mae(&[2.0, 2.0, 4.0], &t), 1.0 / 3.0);
    }
}
