//! 4D light field data model and file I/O.
//!
//! A light field is an N×N grid (N odd) of co-registered sub-aperture
//! images. Angular coordinates are centered: `(0, 0)` is the central view
//! and grid position `(row, col)` has angular offset
//! `(row - (N-1)/2, col - (N-1)/2)`. Pixel intensities are `f32` in `[0, 1]`.
//!
//! The on-disk container is a directory of PNG views named
//! `view_{row}_{col}.png` plus a `meta.json` declaring the dimensions, with
//! an optional `gt.pfm` ground-truth disparity.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major H×W×C image with `f32` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuf {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ImageBuf {
    pub fn new(height: usize, width: usize, channels: usize) -> Self {
        Self {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        }
    }

    /// Builds an image by evaluating `f(y, x, c)` at every sample.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Self {
        let mut img = Self::new(height, width, channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    img.data[(y * width + x) * channels + c] = f(y, x, c);
                }
            }
        }
        img
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, v: f32) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    /// Pixel slice (`channels` values) at `(y, x)`.
    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> &[f32] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    /// True when `(sx, sy)` lies inside the bilinear sampling domain
    /// `[0, W-1] × [0, H-1]`.
    #[inline]
    pub fn in_bounds(&self, sx: f32, sy: f32) -> bool {
        sx >= 0.0
            && sy >= 0.0
            && sx <= (self.width - 1) as f32
            && sy <= (self.height - 1) as f32
    }

    /// Bilinear sample of every channel at `(sx, sy)` into `out`.
    ///
    /// The caller must have checked [`Self::in_bounds`]; positions exactly on
    /// the right/bottom edge are sampled from the last interior cell so that
    /// integer positions reproduce stored samples bit-exactly.
    #[inline]
    pub fn sample_bilinear_into(&self, sx: f32, sy: f32, out: &mut [f32]) {
        let max_x0 = self.width.saturating_sub(2);
        let max_y0 = self.height.saturating_sub(2);
        let x0 = (sx as usize).min(max_x0);
        let y0 = (sy as usize).min(max_y0);
        let fx = sx - x0 as f32;
        let fy = sy - y0 as f32;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let c = self.channels;
        let i00 = (y0 * self.width + x0) * c;
        let i01 = (y0 * self.width + x1) * c;
        let i10 = (y1 * self.width + x0) * c;
        let i11 = (y1 * self.width + x1) * c;
        let w00 = (1.0 - fx) * (1.0 - fy);
        let w01 = fx * (1.0 - fy);
        let w10 = (1.0 - fx) * fy;
        let w11 = fx * fy;
        for ch in 0..c {
            out[ch] = w00 * self.data[i00 + ch]
                + w01 * self.data[i01 + ch]
                + w10 * self.data[i10 + ch]
                + w11 * self.data[i11 + ch];
        }
    }
}

/// Integer angular displacement `(Δrow, Δcol)` of a view relative to the
/// central view. `Δcol` shifts image content horizontally, `Δrow` vertically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridOffset {
    pub row: i32,
    pub col: i32,
}

impl GridOffset {
    pub const ZERO: GridOffset = GridOffset { row: 0, col: 0 };

    pub fn new(row: i32, col: i32) -> Self {
        Self { row, col }
    }

    pub fn scaled(self, t: i32) -> Self {
        Self {
            row: self.row * t,
            col: self.col * t,
        }
    }
}

/// One of the four angular directions through the central view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Horizontal,
    Vertical,
    DiagonalMain,
    DiagonalAnti,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Horizontal,
        Direction::Vertical,
        Direction::DiagonalMain,
        Direction::DiagonalAnti,
    ];

    /// Unit angular step along the line (the view at parameter `t` sits at
    /// offset `step * t`).
    pub fn step(self) -> GridOffset {
        match self {
            Direction::Horizontal => GridOffset::new(0, 1),
            Direction::Vertical => GridOffset::new(1, 0),
            Direction::DiagonalMain => GridOffset::new(1, 1),
            Direction::DiagonalAnti => GridOffset::new(1, -1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Horizontal => "horizontal",
            Direction::Vertical => "vertical",
            Direction::DiagonalMain => "diagonal_main",
            Direction::DiagonalAnti => "diagonal_anti",
        }
    }
}

/// The N views lying on one directional line through the central view,
/// ordered by line parameter `t` from `-(N-1)/2` to `(N-1)/2`.
#[derive(Debug, Clone)]
pub struct ViewLine<'a> {
    pub direction: Direction,
    pub views: Vec<&'a ImageBuf>,
    pub offsets: Vec<GridOffset>,
}

impl ViewLine<'_> {
    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    /// Index of the central view within the line.
    pub fn center_index(&self) -> usize {
        self.views.len() / 2
    }
}

/// H×W disparity in pixels per unit angular step, with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityMap {
    height: usize,
    width: usize,
    values: Vec<f32>,
    valid: Vec<bool>,
}

impl DisparityMap {
    pub fn new(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            values: vec![0.0; height * width],
            valid: vec![true; height * width],
        }
    }

    pub fn constant(height: usize, width: usize, value: f32) -> Self {
        Self {
            height,
            width,
            values: vec![value; height * width],
            valid: vec![true; height * width],
        }
    }

    pub fn from_values(height: usize, width: usize, values: Vec<f32>) -> Self {
        assert_eq!(values.len(), height * width);
        Self {
            height,
            width,
            values,
            valid: vec![true; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn valid_mut(&mut self) -> &mut [bool] {
        &mut self.valid
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f32 {
        self.values[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, v: f32) {
        self.values[y * self.width + x] = v;
    }

    #[inline]
    pub fn is_valid(&self, y: usize, x: usize) -> bool {
        self.valid[y * self.width + x]
    }

    /// Applies `f` to every disparity value, returning a new map with the
    /// same validity mask.
    pub fn map_values(&self, f: impl Fn(f32) -> f32) -> Self {
        Self {
            height: self.height,
            width: self.width,
            values: self.values.iter().map(|&v| f(v)).collect(),
            valid: self.valid.clone(),
        }
    }
}

/// An N×N grid of co-registered sub-aperture views.
#[derive(Debug, Clone)]
pub struct LightField {
    angular_n: usize,
    height: usize,
    width: usize,
    channels: usize,
    views: Vec<ImageBuf>,
}

impl LightField {
    /// Assembles a light field from a row-major list of N² views.
    pub fn from_views(angular_n: usize, views: Vec<ImageBuf>) -> Result<Self> {
        if angular_n < 3 || angular_n % 2 == 0 {
            return Err(Error::EvenAngularResolution(angular_n));
        }
        if views.len() != angular_n * angular_n {
            return Err(Error::ViewCountMismatch {
                expected: angular_n * angular_n,
                found: views.len(),
            });
        }
        let (height, width, channels) =
            (views[0].height(), views[0].width(), views[0].channels());
        if channels != 1 && channels != 3 {
            return Err(Error::InconsistentViews(format!(
                "unsupported channel count {channels}"
            )));
        }
        for (i, v) in views.iter().enumerate() {
            if v.height() != height || v.width() != width || v.channels() != channels {
                return Err(Error::InconsistentViews(format!(
                    "view {i} is {}x{}x{}, expected {height}x{width}x{channels}",
                    v.height(),
                    v.width(),
                    v.channels()
                )));
            }
        }
        Ok(Self {
            angular_n,
            height,
            width,
            channels,
            views,
        })
    }

    pub fn angular_n(&self) -> usize {
        self.angular_n
    }

    /// Half-width of the angular grid, `(N-1)/2`.
    pub fn half(&self) -> i32 {
        (self.angular_n as i32 - 1) / 2
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn views(&self) -> &[ImageBuf] {
        &self.views
    }

    /// View at grid position `(row, col)`, both in `0..N`.
    pub fn view(&self, row: usize, col: usize) -> &ImageBuf {
        &self.views[row * self.angular_n + col]
    }

    /// View at a centered angular offset.
    pub fn view_at(&self, offset: GridOffset) -> &ImageBuf {
        let h = self.half();
        let row = (offset.row + h) as usize;
        let col = (offset.col + h) as usize;
        self.view(row, col)
    }

    pub fn center(&self) -> &ImageBuf {
        self.view_at(GridOffset::ZERO)
    }

    /// The N views on line `d` through the center, ordered by line
    /// parameter `t` from `-(N-1)/2` to `(N-1)/2`.
    pub fn extract_view_line(&self, d: Direction) -> ViewLine<'_> {
        let h = self.half();
        let step = d.step();
        let mut views = Vec::with_capacity(self.angular_n);
        let mut offsets = Vec::with_capacity(self.angular_n);
        for t in -h..=h {
            let off = step.scaled(t);
            views.push(self.view_at(off));
            offsets.push(off);
        }
        ViewLine {
            direction: d,
            views,
            offsets,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MetaFile {
    angular_n: usize,
    height: usize,
    width: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    disparity_range: Option<[f32; 2]>,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn view_file_name(row: usize, col: usize) -> String {
    format!("view_{row}_{col}.png")
}

fn decode_view(path: &Path) -> Result<ImageBuf> {
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let buf = match img {
        image::DynamicImage::ImageLuma8(p) => {
            ImageBuf::from_fn(h, w, 1, |y, x, _| p.get_pixel(x as u32, y as u32).0[0] as f32 / 255.0)
        }
        image::DynamicImage::ImageLuma16(p) => ImageBuf::from_fn(h, w, 1, |y, x, _| {
            p.get_pixel(x as u32, y as u32).0[0] as f32 / 65535.0
        }),
        image::DynamicImage::ImageRgb8(p) => ImageBuf::from_fn(h, w, 3, |y, x, c| {
            p.get_pixel(x as u32, y as u32).0[c] as f32 / 255.0
        }),
        image::DynamicImage::ImageRgb16(p) => ImageBuf::from_fn(h, w, 3, |y, x, c| {
            p.get_pixel(x as u32, y as u32).0[c] as f32 / 65535.0
        }),
        other => {
            return Err(Error::Image {
                path: path.to_path_buf(),
                message: format!("unsupported pixel format {:?}", other.color()),
            })
        }
    };
    Ok(buf)
}

fn encode_view(img: &ImageBuf, path: &Path) -> Result<()> {
    let w = img.width() as u32;
    let h = img.height() as u32;
    let quant = |v: f32| -> u16 { (v.clamp(0.0, 1.0) * 65535.0).round() as u16 };
    let res = match img.channels() {
        1 => {
            let mut out = image::ImageBuffer::<image::Luma<u16>, _>::new(w, h);
            for (x, y, p) in out.enumerate_pixels_mut() {
                p.0[0] = quant(img.get(y as usize, x as usize, 0));
            }
            out.save(path)
        }
        3 => {
            let mut out = image::ImageBuffer::<image::Rgb<u16>, _>::new(w, h);
            for (x, y, p) in out.enumerate_pixels_mut() {
                for c in 0..3 {
                    p.0[c] = quant(img.get(y as usize, x as usize, c));
                }
            }
            out.save(path)
        }
        c => {
            return Err(Error::InconsistentViews(format!(
                "cannot encode {c}-channel image"
            )))
        }
    };
    res.map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Loads a light field container: `meta.json` plus N² views named
/// `view_{row}_{col}.png` in row-major angular order.
pub fn load_lightfield(dir: &Path) -> Result<LightField> {
    let meta_path = dir.join("meta.json");
    let meta_bytes = fs::read(&meta_path).map_err(|e| io_err(&meta_path, e))?;
    let meta: MetaFile =
        serde_json::from_slice(&meta_bytes).map_err(|e| Error::Meta(e.to_string()))?;
    if meta.angular_n < 3 || meta.angular_n % 2 == 0 {
        return Err(Error::EvenAngularResolution(meta.angular_n));
    }

    let mut found = 0usize;
    for entry in fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        let entry = entry.map_err(|e| io_err(dir, e))?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if name.starts_with("view_") && name.ends_with(".png") {
            found += 1;
        }
    }
    let expected = meta.angular_n * meta.angular_n;
    if found != expected {
        return Err(Error::ViewCountMismatch { expected, found });
    }

    let mut views = Vec::with_capacity(expected);
    for row in 0..meta.angular_n {
        for col in 0..meta.angular_n {
            let path = dir.join(view_file_name(row, col));
            let v = decode_view(&path)?;
            if v.height() != meta.height || v.width() != meta.width {
                return Err(Error::InconsistentViews(format!(
                    "view_{row}_{col}.png is {}x{}, meta declares {}x{}",
                    v.height(),
                    v.width(),
                    meta.height,
                    meta.width
                )));
            }
            views.push(v);
        }
    }
    LightField::from_views(meta.angular_n, views)
}

/// Writes a light field container into `dir` (created if needed).
pub fn save_lightfield(lf: &LightField, dir: &Path, disparity_range: Option<[f32; 2]>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let meta = MetaFile {
        angular_n: lf.angular_n(),
        height: lf.height(),
        width: lf.width(),
        disparity_range,
    };
    let meta_path = dir.join("meta.json");
    let mut bytes = serde_json::to_vec_pretty(&meta).expect("meta serializes");
    bytes.push(b'\n');
    fs::write(&meta_path, bytes).map_err(|e| io_err(&meta_path, e))?;
    for row in 0..lf.angular_n() {
        for col in 0..lf.angular_n() {
            encode_view(lf.view(row, col), &dir.join(view_file_name(row, col)))?;
        }
    }
    Ok(())
}

/// Loads `gt.pfm` from a container directory when present.
pub fn load_gt(dir: &Path) -> Result<Option<DisparityMap>> {
    let path = dir.join("gt.pfm");
    if path.exists() {
        read_pfm(&path).map(Some)
    } else {
        Ok(None)
    }
}

/// Reads a single-channel PFM disparity map. Rows are normalized to
/// top-to-bottom in memory regardless of file order.
pub fn read_pfm(path: &Path) -> Result<DisparityMap> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| io_err(path, e))?;
    parse_pfm(&bytes)
}

fn parse_pfm(bytes: &[u8]) -> Result<DisparityMap> {
    let mut pos = 0usize;
    let mut token = |what: &str| -> Result<String> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::MalformedPfm(format!("missing {what}")));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };

    let magic = token("magic")?;
    match magic.as_str() {
        "Pf" => {}
        "PF" => {
            return Err(Error::MalformedPfm(
                "3-channel PFM not supported, expected single-channel \"Pf\"".into(),
            ))
        }
        other => return Err(Error::MalformedPfm(format!("bad magic {other:?}"))),
    }
    let width: usize = token("width")?
        .parse()
        .map_err(|e| Error::MalformedPfm(format!("bad width: {e}")))?;
    let height: usize = token("height")?
        .parse()
        .map_err(|e| Error::MalformedPfm(format!("bad height: {e}")))?;
    let scale: f32 = token("scale")?
        .parse()
        .map_err(|e| Error::MalformedPfm(format!("bad scale: {e}")))?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedPfm("zero dimension".into()));
    }
    if scale == 0.0 {
        return Err(Error::MalformedPfm("scale must be nonzero".into()));
    }
    // Exactly one whitespace byte separates the header from the payload.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::MalformedPfm("missing header terminator".into()));
    }
    pos += 1;
    let little_endian = scale < 0.0;
    let need = width * height * 4;
    let payload = bytes
        .get(pos..pos + need)
        .ok_or_else(|| Error::MalformedPfm(format!("payload truncated, need {need} bytes")))?;

    // PFM stores rows bottom-to-top.
    let mut values = vec![0.0f32; width * height];
    for file_row in 0..height {
        let mem_row = height - 1 - file_row;
        for x in 0..width {
            let i = (file_row * width + x) * 4;
            let raw: [u8; 4] = payload[i..i + 4].try_into().unwrap();
            let v = if little_endian {
                f32::from_le_bytes(raw)
            } else {
                f32::from_be_bytes(raw)
            };
            values[mem_row * width + x] = v;
        }
    }
    let valid = values.iter().map(|v| v.is_finite()).collect();
    Ok(DisparityMap {
        height,
        width,
        values,
        valid,
    })
}

/// Writes a disparity map as little-endian single-channel PFM.
pub fn write_pfm(map: &DisparityMap, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(64 + map.width * map.height * 4);
    out.extend_from_slice(format!("Pf\n{} {}\n-1.0\n", map.width, map.height).as_bytes());
    for file_row in 0..map.height {
        let mem_row = map.height - 1 - file_row;
        for x in 0..map.width {
            out.extend_from_slice(&map.values[mem_row * map.width + x].to_le_bytes());
        }
    }
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(&out).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn tiny_lf(n: usize) -> LightField {
        let views = (0..n * n)
            .map(|i| ImageBuf::from_fn(4, 5, 1, |y, x, _| (i + y * 5 + x) as f32 / 255.0))
            .collect();
        LightField::from_views(n, views).unwrap()
    }

    #[test]
    fn view_line_horizontal_n9() {
        let lf = tiny_lf(9);
        let line = lf.extract_view_line(Direction::Horizontal);
        assert_eq!(line.len(), 9);
        let offsets: Vec<(i32, i32)> = line.offsets.iter().map(|o| (o.row, o.col)).collect();
        let expected: Vec<(i32, i32)> = (-4..=4).map(|t| (0, t)).collect();
        assert_eq!(offsets, expected);
        assert!(std::ptr::eq(line.views[4], lf.center()));
    }

    #[test]
    fn view_line_diagonal_main_n9() {
        let lf = tiny_lf(9);
        let line = lf.extract_view_line(Direction::DiagonalMain);
        let offsets: Vec<(i32, i32)> = line.offsets.iter().map(|o| (o.row, o.col)).collect();
        let expected: Vec<(i32, i32)> = (-4..=4).map(|t| (t, t)).collect();
        assert_eq!(offsets, expected);
    }

    #[test]
    fn view_line_vertical_n3() {
        let lf = tiny_lf(3);
        let line = lf.extract_view_line(Direction::Vertical);
        assert_eq!(line.len(), 3);
        assert_eq!(line.center_index(), 1);
        assert!(std::ptr::eq(line.views[1], lf.center()));
    }

    #[test]
    fn four_lines_cover_4n_minus_3_views() {
        for n in [3usize, 5, 9] {
            let lf = tiny_lf(n);
            let mut seen = HashSet::new();
            for d in Direction::ALL {
                for o in lf.extract_view_line(d).offsets {
                    seen.insert((o.row, o.col));
                }
            }
            assert_eq!(seen.len(), 4 * n - 3);
        }
    }

    #[test]
    fn reversing_line_negates_offsets() {
        let lf = tiny_lf(5);
        for d in Direction::ALL {
            let line = lf.extract_view_line(d);
            let n = line.offsets.len();
            for i in 0..n {
                let a = line.offsets[i];
                let b = line.offsets[n - 1 - i];
                assert_eq!(a.row, -b.row);
                assert_eq!(a.col, -b.col);
            }
        }
    }

    #[test]
    fn even_angular_resolution_rejected() {
        let views = (0..64).map(|_| ImageBuf::new(2, 2, 1)).collect();
        let err = LightField::from_views(8, views).unwrap_err();
        assert!(matches!(err, Error::EvenAngularResolution(8)));
    }

    #[test]
    fn view_count_mismatch_rejected() {
        let views = (0..80).map(|_| ImageBuf::new(2, 2, 1)).collect();
        let err = LightField::from_views(9, views).unwrap_err();
        assert!(matches!(
            err,
            Error::ViewCountMismatch {
                expected: 81,
                found: 80
            }
        ));
    }

    #[test]
    fn bilinear_identity_at_integer_positions() {
        let img = ImageBuf::from_fn(3, 4, 2, |y, x, c| (y * 7 + x * 3 + c) as f32 * 0.01);
        let mut out = [0.0f32; 2];
        for y in 0..3 {
            for x in 0..4 {
                img.sample_bilinear_into(x as f32, y as f32, &mut out);
                assert_eq!(out[0], img.get(y, x, 0));
                assert_eq!(out[1], img.get(y, x, 1));
            }
        }
    }

    #[test]
    fn bilinear_midpoint() {
        let img = ImageBuf::from_fn(2, 2, 1, |y, x, _| (y * 2 + x) as f32);
        let mut out = [0.0f32];
        img.sample_bilinear_into(0.5, 0.5, &mut out);
        assert!((out[0] - 1.5).abs() < 1e-6);
    }

    #[test]
    fn pfm_round_trip_ramp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ramp.pfm");
        let map = DisparityMap::from_values(4, 4, (0..16).map(|i| i as f32 * 0.25 - 2.0).collect());
        write_pfm(&map, &path).unwrap();
        let back = read_pfm(&path).unwrap();
        assert_eq!(map.values(), back.values());
        assert_eq!(back.height(), 4);
        assert_eq!(back.width(), 4);
    }

    #[test]
    fn pfm_rejects_three_channel() {
        let err = parse_pfm(b"PF\n2 2\n-1.0\n0000000000000000").unwrap_err();
        assert!(matches!(err, Error::MalformedPfm(_)));
    }

    #[test]
    fn pfm_big_endian_payload() {
        let v = 1.5f32;
        let mut bytes = b"Pf\n1 1\n1.0\n".to_vec();
        bytes.extend_from_slice(&v.to_be_bytes());
        let map = parse_pfm(&bytes).unwrap();
        assert_eq!(map.values()[0], 1.5);
    }

    #[test]
    fn pfm_truncated_payload_rejected() {
        let err = parse_pfm(b"Pf\n4 4\n-1.0\n0011").unwrap_err();
        assert!(matches!(err, Error::MalformedPfm(_)));
    }

    #[test]
    fn container_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let lf = tiny_lf(3);
        save_lightfield(&lf, dir.path(), Some([-4.0, 4.0])).unwrap();
        let back = load_lightfield(dir.path()).unwrap();
        assert_eq!(back.angular_n(), 3);
        assert_eq!(back.height(), 4);
        assert_eq!(back.width(), 5);
        // 16-bit quantization error is at most half a step.
        for (a, b) in lf.views().iter().zip(back.views()) {
            for (x, y) in a.data().iter().zip(b.data()) {
                assert!((x - y).abs() <= 0.5 / 65535.0 + 1e-7);
            }
        }
    }

    #[test]
    fn container_view_count_checked() {
        let dir = tempfile::tempdir().unwrap();
        let lf = tiny_lf(3);
        save_lightfield(&lf, dir.path(), None).unwrap();
        fs::remove_file(dir.path().join("view_2_2.png")).unwrap();
        let err = load_lightfield(dir.path()).unwrap_err();
        assert!(matches!(
            err,
            Error::ViewCountMismatch {
                expected: 9,
                found: 8
            }
        ));
    }

    #[test]
    fn container_even_n_rejected() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("meta.json"),
            br#"{"angular_n": 8, "height": 4, "width": 4}"#,
        )
        .unwrap();
        let err = load_lightfield(dir.path()).unwrap_err();
        assert!(matches!(err, Error::EvenAngularResolution(8)));
    }

    proptest! {
        #[test]
        fn pfm_round_trip_is_bit_exact(
            h in 1usize..8,
            w in 1usize..8,
            seed in 0u64..1000,
        ) {
            let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            let mut next = || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state as f64 / u64::MAX as f64) as f32 * 8.0 - 4.0
            };
            let map = DisparityMap::from_values(h, w, (0..h * w).map(|_| next()).collect());
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("t.pfm");
            write_pfm(&map, &path).unwrap();
            let back = read_pfm(&path).unwrap();
            prop_assert_eq!(map.values(), back.values());
        }
    }
}
