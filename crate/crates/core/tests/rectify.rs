use fruittouch_core::frame::{rectify_frame, Homography, RgbRaster};
use fruittouch_core::grid::Grid;

const OUT: usize = 64;

/// Checkerboard with 8-pixel cells, evaluated at continuous coordinates.
fn board(u: f64, v: f64) -> [f64; 3] {
    let cell = ((u + 0.5) / 8.0).floor() as i64 + ((v + 0.5) / 8.0).floor() as i64;
    let g = if cell.rem_euclid(2) == 0 { 0.8 } else { 0.2 };
    [g, 0.5 * g + 0.1, 1.0 - g]
}

#[test]
fn warped_checkerboard_is_recovered() {
    let m = (OUT - 1) as f64;
    let rect = [[0.0, 0.0], [m, 0.0], [m, m], [0.0, m]];
    let corners = [[14.0, 9.0], [118.0, 21.0], [128.0, 112.0], [6.0, 126.0]];
    let back = Homography::from_correspondences(&corners, &rect).unwrap();
    // every raw pixel pulls its colour from the analytic board
    let raw = RgbRaster {
        pixels: Grid::from_fn(140, 140, |x, y| {
            let [u, v] = back.apply([x as f64, y as f64]);
            board(u, v)
        }),
    };
    let out = rectify_frame(&raw, &corners, OUT, OUT, 4.0).unwrap();
    let mut err = 0.0;
    for (u, v, px) in out.pixels().iter_xy() {
        let want = board(u as f64, v as f64);
        err += (0..3).map(|c| (px[c] - want[c]).abs()).sum::<f64>() / 3.0;
    }
    let mae = err / (OUT * OUT) as f64;
    assert!(mae < 0.02, "mae {mae}");
}

#[test]
fn homography_round_trips_corners() {
    let src = [[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]];
    let dst = [[1.0, 2.0], [13.0, 1.0], [12.0, 14.0], [2.0, 11.0]];
    let h = Homography::from_correspondences(&src, &dst).unwrap();
    let inv = Homography::from_correspondences(&dst, &src).unwrap();
    for (s, d) in src.iter().zip(&dst) {
        let p = h.apply(*s);
        assert!((p[0] - d[0]).abs() < 1e-9 && (p[1] - d[1]).abs() < 1e-9);
        let q = inv.apply(h.apply([3.3, 7.1]));
        assert!((q[0] - 3.3).abs() < 1e-9 && (q[1] - 7.1).abs() < 1e-9);
    }
}
