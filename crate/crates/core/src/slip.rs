//! Slip detection from contact-region motion versus gel marker motion.
//!
//! The contact region is segmented from a reconstructed heightmap. Its
//! centroid velocity is compared with the mean velocity of the markers
//! inside it; a frame is flagged when the two differ by more than a pixel
//! threshold.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::markers::MarkerSet;
use crate::surface::HeightMap;

pub const DEFAULT_THRESHOLD_PX: f64 = 10.0;
pub const DEFAULT_CONTACT_THRESHOLD_MM: f64 = 0.3;
pub const DEFAULT_SMOOTHING_FRAMES: usize = 3;

/// Pixels where the reconstructed surface rises above a height threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactMask {
    mask: Grid<bool>,
    threshold_mm: f64,
}

impl ContactMask {
    pub fn new(mask: Grid<bool>, threshold_mm: f64) -> Self {
        Self { mask, threshold_mm }
    }

    pub fn grid(&self) -> &Grid<bool> {
        &self.mask
    }

    pub fn threshold_mm(&self) -> f64 {
        self.threshold_mm
    }

    pub fn width(&self) -> usize {
        self.mask.width()
    }

    pub fn height(&self) -> usize {
        self.mask.height()
    }

    pub fn area(&self) -> usize {
        self.mask.as_slice().iter().filter(|m| **m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.as_slice().iter().any(|m| *m)
    }

    /// Whether the pixel nearest to `(x, y)` is in contact.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (cx, cy) = (x.round(), y.round());
        if cx < 0.0 || cy < 0.0 {
            return false;
        }
        self.mask.get(cx as usize, cy as usize).copied().unwrap_or(false)
    }

    /// Mean pixel position of the contact region.
    pub fn centroid(&self) -> Option<[f64; 2]> {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for (x, y, m) in self.mask.iter_xy() {
            if *m {
                sx += x as f64;
                sy += y as f64;
                n += 1;
            }
        }
        (n > 0).then(|| [sx / n as f64, sy / n as f64])
    }

    /// Centroid and radius of the disc with the same area, in pixels.
    pub fn equivalent_disc(&self) -> Option<([f64; 2], f64)> {
        let c = self.centroid()?;
        Some((c, (self.area() as f64 / core::f64::consts::PI).sqrt()))
    }
}

/// Thresholds a heightmap into a contact mask (`h > threshold_mm`).
pub fn segment_contact(h: &HeightMap, threshold_mm: f64) -> Result<ContactMask> {
    if !(threshold_mm.is_finite() && threshold_mm > 0.0) {
        return Err(invalid("contact threshold must be positive"));
    }
    Ok(ContactMask {
        mask: h.values().map(|v| *v > threshold_mm),
        threshold_mm,
    })
}

fn trailing_mean(raw: &[Option<[f64; 2]>], t: usize, window: usize) -> [f64; 2] {
    let lo = (t + 1).saturating_sub(window.max(1));
    let (mut s, mut n) = ([0.0, 0.0], 0usize);
    for v in raw[lo..=t].iter().flatten() {
        s[0] += v[0];
        s[1] += v[1];
        n += 1;
    }
    if n == 0 {
        [0.0, 0.0]
    } else {
        [s[0] / n as f64, s[1] / n as f64]
    }
}

fn smooth(raw: &[Option<[f64; 2]>], window: usize) -> Vec<[f64; 2]> {
    (0..raw.len()).map(|t| trailing_mean(raw, t, window)).collect()
}

fn raw_marker_velocity(prev: &MarkerSet, cur: &MarkerSet, mask: &ContactMask) -> Option<[f64; 2]> {
    let (mut s, mut n) = ([0.0, 0.0], 0usize);
    for (a, b) in prev.matched(cur) {
        if mask.contains(b.x, b.y) {
            s[0] += b.x - a.x;
            s[1] += b.y - a.y;
            n += 1;
        }
    }
    (n > 0).then(|| [s[0] / n as f64, s[1] / n as f64])
}

/// Per-frame centroid velocity of the contact region in px/frame.
///
/// Raw velocities are centroid differences between consecutive non-empty
/// masks. Each output is the mean of the raw velocities available in the
/// trailing `smoothing` frames, so constant motion is reproduced exactly.
/// A window of 1 disables smoothing. Frame 0 has zero velocity.
pub fn object_velocity(masks: &[ContactMask], smoothing: usize) -> Result<Vec<[f64; 2]>> {
    if masks.iter().filter(|m| !m.is_empty()).count() < 2 {
        return Err(Error::EmptyMask);
    }
    let cents: Vec<Option<[f64; 2]>> = masks.iter().map(ContactMask::centroid).collect();
    let mut raw = alloc::vec![None; masks.len()];
    for t in 1..masks.len() {
        if let (Some(a), Some(b)) = (cents[t - 1], cents[t]) {
            raw[t] = Some([b[0] - a[0], b[1] - a[1]]);
        }
    }
    Ok(smooth(&raw, smoothing))
}

/// Per-frame mean velocity of the markers lying inside that frame's
/// contact mask, smoothed as in [`object_velocity`].
pub fn marker_velocity(tracks: &[MarkerSet], masks: &[ContactMask], smoothing: usize) -> Result<Vec<[f64; 2]>> {
    if tracks.len() != masks.len() {
        return Err(invalid("marker tracks and masks differ in length"));
    }
    let mut raw = alloc::vec![None; tracks.len()];
    for t in 1..tracks.len() {
        raw[t] = raw_marker_velocity(&tracks[t - 1], &tracks[t], &masks[t]);
    }
    Ok(smooth(&raw, smoothing))
}

/// Slip when the object outruns the markers by strictly more than
/// `threshold_px` per frame.
#[inline]
pub fn detect_slip(obj_v: [f64; 2], marker_v: [f64; 2], threshold_px: f64) -> bool {
    speed_difference(obj_v, marker_v) > threshold_px
}

#[inline]
pub fn speed_difference(obj_v: [f64; 2], marker_v: [f64; 2]) -> f64 {
    let d = [obj_v[0] - marker_v[0], obj_v[1] - marker_v[1]];
    (d[0] * d[0] + d[1] * d[1]).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlipFrame {
    pub object_velocity: [f64; 2],
    pub marker_velocity: [f64; 2],
    pub speed_difference: f64,
    pub slip: bool,
}

/// Runs the detector over a whole sequence.
pub fn slip_frames(
    masks: &[ContactMask],
    tracks: &[MarkerSet],
    threshold_px: f64,
    smoothing: usize,
) -> Result<Vec<SlipFrame>> {
    let ov = object_velocity(masks, smoothing)?;
    let mv = marker_velocity(tracks, masks, smoothing)?;
    Ok(ov
        .into_iter()
        .zip(mv)
        .map(|(o, m)| SlipFrame {
            object_velocity: o,
            marker_velocity: m,
            speed_difference: speed_difference(o, m),
            slip: detect_slip(o, m, threshold_px),
        })
        .collect())
}

/// Streaming form of [`slip_frames`] for a control loop.
#[derive(Debug, Clone)]
pub struct SlipTracker {
    threshold_px: f64,
    smoothing: usize,
    prev_centroid: Option<[f64; 2]>,
    prev_markers: Option<MarkerSet>,
    obj_raw: VecDeque<Option<[f64; 2]>>,
    mk_raw: VecDeque<Option<[f64; 2]>>,
}

impl SlipTracker {
    pub fn new(threshold_px: f64, smoothing: usize) -> Self {
        Self {
            threshold_px,
            smoothing: smoothing.max(1),
            prev_centroid: None,
            prev_markers: None,
            obj_raw: VecDeque::new(),
            mk_raw: VecDeque::new(),
        }
    }

    pub fn push(&mut self, mask: &ContactMask, markers: &MarkerSet) -> SlipFrame {
        let c = mask.centroid();
        let o = match (self.prev_centroid, c) {
            (Some(a), Some(b)) => Some([b[0] - a[0], b[1] - a[1]]),
            _ => None,
        };
        let m = self
            .prev_markers
            .as_ref()
            .and_then(|p| raw_marker_velocity(p, markers, mask));
        self.prev_centroid = c;
        self.prev_markers = Some(markers.clone());
        for (q, v) in [(&mut self.obj_raw, o), (&mut self.mk_raw, m)] {
            q.push_back(v);
            if q.len() > self.smoothing {
                q.pop_front();
            }
        }
        let mean = |q: &VecDeque<Option<[f64; 2]>>| {
            let v: Vec<Option<[f64; 2]>> = q.iter().copied().collect();
            trailing_mean(&v, v.len() - 1, self.smoothing)
        };
        let (ov, mv) = (mean(&self.obj_raw), mean(&self.mk_raw));
        SlipFrame {
            object_velocity: ov,
            marker_velocity: mv,
            speed_difference: speed_difference(ov, mv),
            slip: detect_slip(ov, mv, self.threshold_px),
        }
    }
}

/// Frame-level detection quality over a set of trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlipSummary {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Mean of (ground-truth onset − first predicted slip) in seconds over
    /// trials with at least one true positive; `None` if there are none.
    pub mean_lead_time_s: Option<f64>,
}

/// Scores per-trial predicted flags against ground truth.
///
/// With no predicted positives, precision is 1 when there are also no
/// actual positives and 0 otherwise; recall with no actual positives is
/// defined the same way. F1 is 0 when precision and recall are both 0.
pub fn evaluate_slip_detector(predictions: &[Vec<bool>], ground_truth: &[Vec<bool>], fps: f64) -> Result<SlipSummary> {
    if predictions.len() != ground_truth.len() {
        return Err(invalid("prediction and ground-truth trial counts differ"));
    }
    if !(fps > 0.0) {
        return Err(invalid("fps must be positive"));
    }
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    let mut leads = Vec::new();
    for (p, g) in predictions.iter().zip(ground_truth) {
        if p.len() != g.len() {
            return Err(invalid("prediction and ground-truth series differ in length"));
        }
        let mut trial_tp = 0;
        for (a, b) in p.iter().zip(g) {
            match (a, b) {
                (true, true) => trial_tp += 1,
                (true, false) => fp += 1,
                (false, true) => fneg += 1,
                _ => {}
            }
        }
        tp += trial_tp;
        if trial_tp > 0 {
            let onset = g.iter().position(|v| *v).unwrap_or(0);
            let first = p.iter().position(|v| *v).unwrap_or(0);
            leads.push((onset as f64 - first as f64) / fps);
        }
    }
    let ratio = |num: usize, den: usize, other_empty: bool| {
        if den == 0 {
            if other_empty {
                1.0
            } else {
                0.0
            }
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(tp, tp + fp, tp + fneg == 0);
    let recall = ratio(tp, tp + fneg, tp + fp == 0);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let mean_lead_time_s = (!leads.is_empty()).then(|| leads.iter().sum::<f64>() / leads.len() as f64);
    Ok(SlipSummary {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fneg,
        precision,
        recall,
        f1,
        mean_lead_time_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markers::Marker;
    use alloc::vec;

    fn square_mask(x0: usize, y0: usize, side: usize) -> ContactMask {
        ContactMask::new(
            Grid::from_fn(64, 48, |x, y| x >= x0 && x < x0 + side && y >= y0 && y < y0 + side),
            0.3,
        )
    }

    #[test]
    fn segment_of_flat_map_is_empty() {
        let h = HeightMap::zeros(16, 16, 4.0);
        assert!(segment_contact(&h, 0.3).unwrap().is_empty());
        assert!(segment_contact(&h, 0.0).is_err());
    }

    #[test]
    fn translating_mask_has_exact_velocity() {
        let masks: Vec<_> = (0..6).map(|t| square_mask(2 + 3 * t, 10, 8)).collect();
        let v = object_velocity(&masks, 3).unwrap();
        assert_eq!(v[0], [0.0, 0.0]);
        for vt in &v[1..] {
            assert_eq!(*vt, [3.0, 0.0]);
        }
    }

    #[test]
    fn static_mask_has_zero_velocity() {
        let masks = vec![square_mask(5, 5, 6); 4];
        assert!(object_velocity(&masks, 3).unwrap().iter().all(|v| *v == [0.0, 0.0]));
        assert_eq!(object_velocity(&masks[..1], 3), Err(Error::EmptyMask));
    }

    #[test]
    fn slip_threshold_is_strict() {
        assert!(!detect_slip([10.0, 0.0], [0.0, 0.0], 10.0));
        assert!(detect_slip([12.0, 0.0], [0.0, 0.0], 10.0));
        assert!(!detect_slip([3.0, 4.0], [3.0, 4.0], 10.0));
    }

    #[test]
    fn markers_outside_mask_are_ignored() {
        let mask = square_mask(0, 0, 10);
        let a = MarkerSet::new(vec![Marker { id: 0, x: 2.0, y: 2.0 }, Marker { id: 1, x: 30.0, y: 30.0 }], 1, 2).unwrap();
        let b = MarkerSet::new(vec![Marker { id: 0, x: 4.0, y: 2.0 }, Marker { id: 1, x: 40.0, y: 30.0 }], 1, 2).unwrap();
        let v = marker_velocity(&[a, b], &[mask.clone(), mask], 1).unwrap();
        assert_eq!(v[1], [2.0, 0.0]);
    }

    #[test]
    fn tracker_matches_batch() {
        let masks: Vec<_> = (0..8).map(|t| square_mask(2 + t * t / 2, 10, 8)).collect();
        let tracks: Vec<_> = (0..8)
            .map(|t| {
                let mut s = MarkerSet::lattice(6, 8, 64, 48);
                s = MarkerSet::new(
                    s.markers().iter().map(|m| Marker { x: m.x + t as f64, ..*m }).collect(),
                    6,
                    8,
                )
                .unwrap();
                s
            })
            .collect();
        let batch = slip_frames(&masks, &tracks, 1.5, 3).unwrap();
        let mut tr = SlipTracker::new(1.5, 3);
        for t in 0..8 {
            let f = tr.push(&masks[t], &tracks[t]);
            assert_eq!(f, batch[t]);
        }
    }

    #[test]
    fn summary_edge_cases() {
        let g = vec![vec![false, true, true, false]];
        let s = evaluate_slip_detector(&g, &g, 15.0).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        assert_eq!(s.mean_lead_time_s, Some(0.0));
        let s = evaluate_slip_detector(&[vec![false; 4]], &g, 15.0).unwrap();
        assert_eq!((s.recall, s.f1), (0.0, 0.0));
        assert_eq!(s.mean_lead_time_s, None);
        let early = vec![vec![true, true, true, false]];
        let s = evaluate_slip_detector(&early, &g, 10.0).unwrap();
        assert!((s.mean_lead_time_s.unwrap() - 0.1).abs() < 1e-12);
        assert!((s.precision - 2.0 / 3.0).abs() < 1e-12);
    }
}
