use fruittouch::config::{Config, KEYS};
use fruittouch::io::*;
use fruittouch_core::frame::TactileFrame;
use fruittouch_core::grid::Grid;
use fruittouch_core::markers::{Marker, MarkerSet};
use fruittouch_core::surface::HeightMap;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn frames_survive_ppm_within_quantization(
        w in 8usize..20, h in 8usize..20, vals in prop::collection::vec(0.0..=1.0f64, 20 * 20 * 3),
        ts in 0.0..100.0f64,
    ) {
        let px = Grid::from_fn(w, h, |x, y| {
            let i = 3 * (y * w + x);
            [vals[i], vals[i + 1], vals[i + 2]]
        });
        let f = TactileFrame::new(px, 128.0 / 30.0, ts).unwrap();
        let g = decode_ppm(&encode_ppm(&f), 1.0).unwrap();
        prop_assert_eq!((g.width(), g.height()), (w, h));
        prop_assert!((g.px_per_mm() - f.px_per_mm()).abs() < 1e-12);
        for (a, b) in f.pixels().as_slice().iter().zip(g.pixels().as_slice()) {
            for c in 0..3 {
                prop_assert!((a[c] - b[c]).abs() <= 0.5 / 255.0 + 1e-12);
            }
        }
    }

    #[test]
    fn heightmaps_survive_csv(w in 1usize..12, h in 1usize..12, vals in prop::collection::vec(0.0..5.0f64, 144)) {
        let hm = HeightMap::new(Grid::from_fn(w, h, |x, y| vals[y * w + x]), 3.5).unwrap();
        let back = heightmap_from_csv(&heightmap_to_csv(&hm).unwrap(), 1.0).unwrap();
        prop_assert_eq!((back.width(), back.height()), (w, h));
        for (a, b) in hm.values().as_slice().iter().zip(back.values().as_slice()) {
            prop_assert!((a - b).abs() <= 5e-7 + 1e-12);
        }
    }

    #[test]
    fn marker_tracks_survive_csv(
        frames in 1usize..4, pts in prop::collection::vec((0.0..60.0f64, 0.0..60.0f64), 1..10),
    ) {
        let tracks: Vec<MarkerSet> = (0..frames)
            .map(|f| {
                let m = pts.iter().enumerate().map(|(i, &(x, y))| Marker { id: i as u32, x: x + f as f64, y }).collect();
                MarkerSet::new(m, 1, pts.len()).unwrap()
            })
            .collect();
        let back = markers_from_csv(&markers_to_csv(&tracks)).unwrap();
        prop_assert_eq!(back.len(), frames);
        for (a, b) in tracks.iter().zip(&back) {
            for (p, q) in a.markers().iter().zip(b.markers()) {
                prop_assert_eq!(p.id, q.id);
                prop_assert!((p.x - q.x).abs() < 1e-9 && (p.y - q.y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn model_text_is_lossless(vals in prop::collection::vec(-1e6..1e6f64, 1..30)) {
        let text = ModelText::new("demo").with("v", &vals).render();
        let back = ModelText::parse(&text).unwrap();
        prop_assert_eq!(back.get("v", Some(vals.len())).unwrap(), &vals[..]);
    }

    #[test]
    fn rendered_defaults_parse_back_to_defaults(order in Just(()).prop_perturb(|_, mut rng| {
        let mut idx: Vec<usize> = (0..KEYS.len()).collect();
        for i in (1..idx.len()).rev() {
            idx.swap(i, (rng.next_u32() as usize) % (i + 1));
        }
        idx
    })) {
        let text: String = order.iter().map(|&i| format!("{} = {}\n", KEYS[i].0, KEYS[i].1)).collect();
        prop_assert_eq!(Config::parse(&text).unwrap(), Config::default());
    }
}
