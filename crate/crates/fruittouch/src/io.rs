//! On-disk formats.
//!
//! Frames are binary P6 pixmaps with a `# px_per_mm=.. timestamp=..`
//! comment. Heightmaps, marker tracks and models are text: heightmaps as
//! row-major millimetre CSV with six decimals, markers as `frame,id,x,y`
//! rows, models as `name v1 v2 ..` lines with round-trip float precision.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use fruittouch_core::force::{NormalForceModel, ShearFeature, ShearModel};
use fruittouch_core::frame::TactileFrame;
use fruittouch_core::geometry::{Rgb2NormalModel, INPUTS};
use fruittouch_core::grid::Grid;
use fruittouch_core::markers::{Marker, MarkerSet};
use fruittouch_core::softness::RankerModel;
use fruittouch_core::surface::HeightMap;

use crate::error::{format_err, Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, data: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, data).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn comment_value(comment: &str, key: &str) -> Option<f64> {
    comment
        .split_whitespace()
        .filter_map(|t| t.split_once('='))
        .find(|(k, _)| *k == key)
        .and_then(|(_, v)| v.parse().ok())
}

/// Encodes a frame as 8-bit P6.
pub fn encode_ppm(frame: &TactileFrame) -> Vec<u8> {
    let header = format!(
        "P6\n# px_per_mm={} timestamp={}\n{} {}\n255\n",
        frame.px_per_mm(),
        frame.timestamp(),
        frame.width(),
        frame.height()
    );
    let mut out = header.into_bytes();
    for px in frame.pixels().as_slice() {
        out.extend(px.iter().map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8));
    }
    out
}

/// Decodes a P6 pixmap. Without a `px_per_mm` comment the fallback scale
/// is used.
pub fn decode_ppm(bytes: &[u8], fallback_px_per_mm: f64) -> Result<TactileFrame> {
    let mut pos = 0;
    let mut line = 1;
    let mut tokens = Vec::new();
    let mut comments = String::new();
    while tokens.len() < 4 {
        let Some(&b) = bytes.get(pos) else {
            return Err(parse_err(line, "truncated pixmap header"));
        };
        if b == b'#' {
            let end = bytes[pos..].iter().position(|&c| c == b'\n').map_or(bytes.len(), |e| pos + e);
            comments.push_str(&String::from_utf8_lossy(&bytes[pos + 1..end]));
            comments.push(' ');
            pos = end;
        } else if b.is_ascii_whitespace() {
            if b == b'\n' {
                line += 1;
            }
            pos += 1;
        } else {
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
                pos += 1;
            }
            tokens.push((line, String::from_utf8_lossy(&bytes[start..pos]).into_owned()));
        }
    }
    if tokens[0].1 != "P6" {
        return Err(parse_err(tokens[0].0, format!("expected P6 magic, got `{}`", tokens[0].1)));
    }
    let num = |i: usize| -> Result<usize> {
        let (l, t) = &tokens[i];
        t.parse().map_err(|_| parse_err(*l, format!("invalid header number `{t}`")))
    };
    let (w, h, max) = (num(1)?, num(2)?, num(3)?);
    if max != 255 {
        return Err(parse_err(tokens[3].0, format!("only 8-bit pixmaps are supported, maxval {max}")));
    }
    pos += 1;
    let body = bytes.get(pos..).unwrap_or(&[]);
    if body.len() != w * h * 3 {
        return Err(parse_err(line, format!("expected {} pixel bytes, found {}", w * h * 3, body.len())));
    }
    let data = body
        .chunks_exact(3)
        .map(|c| [c[0] as f64 / 255.0, c[1] as f64 / 255.0, c[2] as f64 / 255.0])
        .collect();
    let ppm = comment_value(&comments, "px_per_mm").unwrap_or(fallback_px_per_mm);
    let t = comment_value(&comments, "timestamp").unwrap_or(0.0);
    Ok(TactileFrame::new(Grid::from_vec(w, h, data)?, ppm, t)?)
}

pub fn save_frame(path: &Path, frame: &TactileFrame) -> Result<()> {
    write_file(path, encode_ppm(frame))
}

pub fn load_frame(path: &Path, fallback_px_per_mm: f64) -> Result<TactileFrame> {
    decode_ppm(&read_bytes(path)?, fallback_px_per_mm)
}

pub fn heightmap_to_csv(h: &HeightMap) -> Result<String> {
    if h.values().as_slice().iter().any(|v| !v.is_finite()) {
        return Err(format_err("heightmap contains non-finite values"));
    }
    let mut out = format!("# px_per_mm={}\n", h.px_per_mm());
    for y in 0..h.height() {
        let row: Vec<String> = (0..h.width()).map(|x| format!("{:.6}", h.values()[(x, y)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn heightmap_from_csv(text: &str, fallback_px_per_mm: f64) -> Result<HeightMap> {
    let mut ppm = fallback_px_per_mm;
    let mut width = None;
    let mut data = Vec::new();
    let mut rows = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if let Some(c) = raw.strip_prefix('#') {
            if let Some(v) = comment_value(c, "px_per_mm") {
                ppm = v;
            }
            continue;
        }
        if raw.is_empty() {
            continue;
        }
        let start = data.len();
        for cell in raw.split(',') {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("invalid height `{}`", cell.trim())))?;
            if !v.is_finite() {
                return Err(parse_err(line, "non-finite height"));
            }
            data.push(v);
        }
        let n = data.len() - start;
        if *width.get_or_insert(n) != n {
            return Err(parse_err(line, format!("row has {n} values, expected {}", width.unwrap_or(0))));
        }
        rows += 1;
    }
    let w = width.ok_or_else(|| parse_err(1, "heightmap has no rows"))?;
    Ok(HeightMap::new(Grid::from_vec(w, rows, data)?, ppm)?)
}

pub fn save_heightmap(path: &Path, h: &HeightMap) -> Result<()> {
    write_file(path, heightmap_to_csv(h)?)
}

pub fn load_heightmap(path: &Path, fallback_px_per_mm: f64) -> Result<HeightMap> {
    heightmap_from_csv(&read_text(path)?, fallback_px_per_mm)
}

/// Marker tracks, one `frame,id,x,y` row per marker per frame.
pub fn markers_to_csv(tracks: &[MarkerSet]) -> String {
    let mut out = String::from("frame,id,x,y\n");
    for (k, set) in tracks.iter().enumerate() {
        for m in set.markers() {
            let _ = writeln!(out, "{k},{},{},{}", m.id, m.x, m.y);
        }
    }
    out
}

/// Parses marker tracks. Frames are indexed from zero; frames with no rows
/// come back as empty sets.
pub fn markers_from_csv(text: &str) -> Result<Vec<MarkerSet>> {
    let mut frames: BTreeMap<usize, Vec<Marker>> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') || raw == "frame,id,x,y" {
            continue;
        }
        let cells: Vec<&str> = raw.split(',').map(str::trim).collect();
        if cells.len() != 4 {
            return Err(parse_err(line, format!("expected 4 columns, found {}", cells.len())));
        }
        let bad = |what: &str, v: &str| parse_err(line, format!("invalid {what} `{v}`"));
        let frame: usize = cells[0].parse().map_err(|_| bad("frame", cells[0]))?;
        let id: u32 = cells[1].parse().map_err(|_| bad("id", cells[1]))?;
        let x: f64 = cells[2].parse().map_err(|_| bad("x", cells[2]))?;
        let y: f64 = cells[3].parse().map_err(|_| bad("y", cells[3]))?;
        frames.entry(frame).or_default().push(Marker { id, x, y });
    }
    let n = frames.keys().next_back().map_or(0, |k| k + 1);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let markers = frames.remove(&k).unwrap_or_default();
        let side = (markers.len() as f64).sqrt().round() as usize;
        let (r, c) = if side * side == markers.len() { (side, side) } else { (0, 0) };
        out.push(MarkerSet::new(markers, r, c)?);
    }
    Ok(out)
}

/// A single marker frame; an empty file gives an empty set.
pub fn marker_set_from_csv(text: &str) -> Result<MarkerSet> {
    let mut tracks = markers_from_csv(text)?;
    match tracks.len() {
        0 => Ok(MarkerSet::empty()),
        1 => Ok(tracks.remove(0)),
        n => Err(format_err(format!("expected one marker frame, found {n}"))),
    }
}

pub fn save_markers(path: &Path, tracks: &[MarkerSet]) -> Result<()> {
    write_file(path, markers_to_csv(tracks))
}

pub fn load_markers(path: &Path) -> Result<Vec<MarkerSet>> {
    markers_from_csv(&read_text(path)?)
}

/// Named float vectors under a `kind` line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelText {
    pub kind: String,
    pub fields: BTreeMap<String, Vec<f64>>,
}

impl ModelText {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            fields: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, values: &[f64]) -> Self {
        self.fields.insert(name.to_string(), values.to_vec());
        self
    }

    pub fn render(&self) -> String {
        let mut out = format!("kind {}\n", self.kind);
        for (k, v) in &self.fields {
            out.push_str(k);
            for x in v {
                let _ = write!(out, " {x:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = ModelText::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let mut parts = raw.split_whitespace();
            let name = parts.next().unwrap_or_default();
            if name == "kind" {
                m.kind = parts.next().unwrap_or_default().to_string();
                continue;
            }
            let values = parts
                .map(|t| t.parse::<f64>().map_err(|_| parse_err(line, format!("invalid number `{t}` in `{name}`"))))
                .collect::<Result<Vec<_>>>()?;
            if m.fields.insert(name.to_string(), values).is_some() {
                return Err(parse_err(line, format!("duplicate field `{name}`")));
            }
        }
        Ok(m)
    }

    pub fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(format_err(format!("expected a `{kind}` model, found `{}`", self.kind)))
        }
    }

    pub fn get(&self, name: &str, len: Option<usize>) -> Result<&[f64]> {
        let v = self
            .fields
            .get(name)
            .ok_or_else(|| format_err(format!("model is missing `{name}`")))?;
        match len {
            Some(n) if v.len() != n => Err(format_err(format!("`{name}` has {} values, expected {n}", v.len()))),
            _ => Ok(v),
        }
    }

    pub fn array<const N: usize>(&self, name: &str) -> Result<[f64; N]> {
        let v = self.get(name, Some(N))?;
        Ok(core::array::from_fn(|i| v[i]))
    }
}

pub fn rgb2normal_to_text(m: &Rgb2NormalModel) -> String {
    ModelText::new("rgb2normal")
        .with("mean", &m.input_mean())
        .with("scale", &m.input_scale())
        .with("params", m.params())
        .render()
}

pub fn rgb2normal_from_text(text: &str) -> Result<Rgb2NormalModel> {
    let t = ModelText::parse(text)?;
    t.expect_kind("rgb2normal")?;
    let mean: [f64; INPUTS] = t.array("mean")?;
    let scale: [f64; INPUTS] = t.array("scale")?;
    Ok(Rgb2NormalModel::from_parts(t.get("params", None)?.to_vec(), mean, scale)?)
}

/// Normal force line plus an optional shear regressor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceModels {
    pub normal: NormalForceModel,
    pub shear: Option<ShearModel>,
}

pub fn force_models_to_text(m: &ForceModels) -> String {
    let mut t = ModelText::new("force").with("normal", &[m.normal.slope, m.normal.intercept]);
    if let Some(s) = &m.shear {
        t = t.with("shear_wx", &s.w_x).with("shear_wy", &s.w_y).with("shear_b", &[s.b_x, s.b_y]);
    }
    t.render()
}

pub fn force_models_from_text(text: &str) -> Result<ForceModels> {
    let t = ModelText::parse(text)?;
    t.expect_kind("force")?;
    let [slope, intercept] = t.array("normal")?;
    let shear = if t.fields.contains_key("shear_wx") {
        let w_x: ShearFeature = t.array("shear_wx")?;
        let w_y: ShearFeature = t.array("shear_wy")?;
        let [b_x, b_y] = t.array("shear_b")?;
        Some(ShearModel { w_x, w_y, b_x, b_y })
    } else {
        None
    };
    Ok(ForceModels {
        normal: NormalForceModel { slope, intercept },
        shear,
    })
}

pub fn ranker_to_text(m: &RankerModel) -> String {
    ModelText::new("ranker")
        .with("pixel_norm", &[m.pixel_norm.0, m.pixel_norm.1])
        .with("force_norm", &[m.force_norm.0, m.force_norm.1])
        .with("params", m.params())
        .render()
}

pub fn ranker_from_text(text: &str) -> Result<RankerModel> {
    let t = ModelText::parse(text)?;
    t.expect_kind("ranker")?;
    let [pm, ps] = t.array("pixel_norm")?;
    let [fm, fs] = t.array("force_norm")?;
    Ok(RankerModel::from_parts(t.get("params", None)?.to_vec(), (pm, ps), (fm, fs))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(w: usize, h: usize) -> TactileFrame {
        let px = Grid::from_fn(w, h, |x, y| [x as f64 / w as f64, y as f64 / h as f64, 0.37]);
        TactileFrame::new(px, 4.5, 1.25).unwrap()
    }

    #[test]
    fn ppm_round_trip_within_quantization() {
        let f = frame(16, 16);
        let g = decode_ppm(&encode_ppm(&f), 1.0).unwrap();
        assert_eq!(g.px_per_mm(), 4.5);
        assert_eq!(g.timestamp(), 1.25);
        let err = f
            .pixels()
            .as_slice()
            .iter()
            .zip(g.pixels().as_slice())
            .flat_map(|(a, b)| (0..3).map(move |c| (a[c] - b[c]).abs()))
            .fold(0.0, f64::max);
        assert!(err <= 1.0 / 255.0, "{err}");
    }

    #[test]
    fn ppm_without_comment_uses_fallback() {
        let mut bytes = b"P6\n8 8\n255\n".to_vec();
        bytes.extend([0; 3]);
        bytes.extend([255; 189]);
        let f = decode_ppm(&bytes, 3.0).unwrap();
        assert_eq!(f.px_per_mm(), 3.0);
        assert_eq!(f.pixels()[(0, 0)], [0.0; 3]);
        assert_eq!(f.pixels()[(1, 0)], [1.0; 3]);
    }

    #[test]
    fn malformed_ppm_reports_line() {
        let e = decode_ppm(b"P6\n# c\n4 x\n255\n", 1.0).unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        assert!(decode_ppm(b"P3\n1 1\n255\n000", 1.0).is_err());
        let e = decode_ppm(b"P6\n2 2\n255\nabc", 1.0).unwrap_err().to_string();
        assert!(e.contains("pixel bytes"), "{e}");
    }

    #[test]
    fn heightmap_round_trip() {
        let g = Grid::from_fn(7, 5, |x, y| (x as f64 * 0.123_456_78 - y as f64 * 0.01).sin());
        let h = HeightMap::new(g, 4.25).unwrap();
        let back = heightmap_from_csv(&heightmap_to_csv(&h).unwrap(), 1.0).unwrap();
        assert_eq!(back.px_per_mm(), 4.25);
        assert_eq!(back.values().shape(), (7, 5));
        for (a, b) in h.values().as_slice().iter().zip(back.values().as_slice()) {
            assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn heightmap_errors() {
        let e = heightmap_from_csv("1,2\n3\n", 1.0).unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        assert!(heightmap_from_csv("1,NaN\n", 1.0).is_err());
        assert!(heightmap_from_csv("", 1.0).is_err());
    }

    #[test]
    fn marker_csv_round_trip() {
        let a = MarkerSet::lattice(3, 3, 32, 32);
        let b = MarkerSet::new(
            a.markers().iter().map(|m| Marker { x: m.x + 0.1234567891, ..*m }).collect(),
            3,
            3,
        )
        .unwrap();
        let back = markers_from_csv(&markers_to_csv(&[a.clone(), b.clone()])).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].markers(), a.markers());
        assert_eq!(back[1].markers(), b.markers());
        assert_eq!(back[1].grid_rows, 3);
    }

    #[test]
    fn empty_marker_csv_is_empty_set() {
        assert!(marker_set_from_csv("").unwrap().is_empty());
        assert!(marker_set_from_csv("frame,id,x,y\n").unwrap().is_empty());
        let e = markers_from_csv("frame,id,x,y\n0,1,2\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
    }

    #[test]
    fn model_text_round_trips_exactly() {
        let m = Rgb2NormalModel::init(3);
        let back = rgb2normal_from_text(&rgb2normal_to_text(&m)).unwrap();
        assert_eq!(back, m);
        let r = RankerModel::init(5);
        assert_eq!(ranker_from_text(&ranker_to_text(&r)).unwrap(), r);
        let f = ForceModels {
            normal: NormalForceModel { slope: 20.0, intercept: -2.0 },
            shear: Some(ShearModel {
                w_x: [0.1 / 3.0; 10],
                w_y: [-1e-13; 10],
                b_x: 1.0,
                b_y: f64::MIN_POSITIVE,
            }),
        };
        assert_eq!(force_models_from_text(&force_models_to_text(&f)).unwrap(), f);
        assert!(ranker_from_text(&force_models_to_text(&f)).is_err());
    }
}
