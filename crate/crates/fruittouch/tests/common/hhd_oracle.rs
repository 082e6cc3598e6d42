//! Dense least-squares projection onto gradient and rotated-gradient
//! fields, solved by Householder QR. Built from the stencil definition,
//! independent of the banded solver under test.

use fruittouch_core::field::DisplacementField;
use fruittouch_core::grid::GridLayout;
use nalgebra::{DMatrix, DVector};

struct Projector {
    /// Full operator, `2N × N`.
    op: DMatrix<f64>,
    free: Vec<usize>,
    qt: DMatrix<f64>,
    r: DMatrix<f64>,
}

impl Projector {
    fn new(op: DMatrix<f64>, sqrt_w: &DVector<f64>, free: Vec<usize>) -> Self {
        let mut a = DMatrix::zeros(op.nrows(), free.len());
        for (j, &k) in free.iter().enumerate() {
            a.set_column(j, &op.column(k).component_mul(sqrt_w));
        }
        let (q, r) = a.qr().unpack();
        Self {
            op,
            free,
            qt: q.transpose(),
            r,
        }
    }

    fn project(&self, target: &DVector<f64>, sqrt_w: &DVector<f64>) -> DVector<f64> {
        let rhs = &self.qt * target.component_mul(sqrt_w);
        let x = self.r.solve_upper_triangular(&rhs).expect("full column rank");
        let mut u = DVector::zeros(self.op.ncols());
        for (j, &k) in self.free.iter().enumerate() {
            u[k] = x[j];
        }
        &self.op * u
    }
}

pub struct DenseHhdOracle {
    cols: usize,
    rows: usize,
    sqrt_w: DVector<f64>,
    grad: Projector,
    rot: Projector,
}

fn taps(i: usize, n: usize) -> [(usize, f64); 2] {
    match i {
        0 => [(0, -1.0), (1, 1.0)],
        _ if i == n - 1 => [(n - 2, -1.0), (n - 1, 1.0)],
        _ => [(i - 1, -0.5), (i + 1, 0.5)],
    }
}

impl DenseHhdOracle {
    pub fn new(layout: GridLayout) -> Self {
        let (cols, rows) = (layout.cols, layout.rows);
        let n = cols * rows;
        let [dx, dy] = layout.spacing();
        let mut gx = DMatrix::zeros(n, n);
        let mut gy = DMatrix::zeros(n, n);
        let mut w = DVector::zeros(2 * n);
        for r in 0..rows {
            for c in 0..cols {
                let i = r * cols + c;
                for (k, v) in taps(c, cols) {
                    gx[(i, r * cols + k)] += v / dx;
                }
                for (k, v) in taps(r, rows) {
                    gy[(i, k * cols + c)] += v / dy;
                }
                let edge = |p: usize, m: usize| if p == 0 || p + 1 == m { 0.5 } else { 1.0 };
                let wt: f64 = edge(c, cols) * edge(r, rows);
                w[i] = wt.sqrt();
                w[n + i] = wt.sqrt();
            }
        }
        let mut grad = DMatrix::zeros(2 * n, n);
        grad.view_mut((0, 0), (n, n)).copy_from(&gx);
        grad.view_mut((n, 0), (n, n)).copy_from(&gy);
        let mut rot = DMatrix::zeros(2 * n, n);
        rot.view_mut((0, 0), (n, n)).copy_from(&gy);
        rot.view_mut((n, 0), (n, n)).copy_from(&(-gx));
        let interior: Vec<usize> = (0..n)
            .filter(|i| {
                let (c, r) = (i % cols, i / cols);
                c > 0 && r > 0 && c + 1 < cols && r + 1 < rows
            })
            .collect();
        Self {
            cols,
            rows,
            grad: Projector::new(grad, &w, (1..n).collect()),
            rot: Projector::new(rot, &w, interior),
            sqrt_w: w,
        }
    }

    fn stack(&self, v: &DisplacementField) -> DVector<f64> {
        let n = self.cols * self.rows;
        let s = v.vectors.as_slice();
        DVector::from_fn(2 * n, |i, _| if i < n { s[i][0] } else { s[i - n][1] })
    }

    /// `(P, S)` stacked as `[x components; y components]`.
    pub fn decompose(&self, v: &DisplacementField) -> (DVector<f64>, DVector<f64>) {
        let t = self.stack(v);
        (self.grad.project(&t, &self.sqrt_w), self.rot.project(&t, &self.sqrt_w))
    }

    /// Largest of `‖P − P*‖`, `‖S − S*‖` relative to `‖V‖`.
    pub fn max_relative_gap(&self, v: &DisplacementField, p: &DisplacementField, s: &DisplacementField) -> f64 {
        let (po, so) = self.decompose(v);
        let vn = self.stack(v).norm();
        let gp = (self.stack(p) - po).norm() / vn;
        let gs = (self.stack(s) - so).norm() / vn;
        gp.max(gs)
    }
}
