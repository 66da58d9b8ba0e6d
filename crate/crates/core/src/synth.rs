//! Synthetic light fields from layered fronto-parallel scenes.
//!
//! Scenes are ordered stacks of constant-disparity layers with procedural
//! textures. The renderer is the forward model of the warp convention used
//! everywhere else: the view at angular offset `o` shows the central-view
//! point `x` at position `x + o * D(x)`, so a view pixel `p` displays the
//! front-most layer whose region contains `p - o * d`.
//!
//! Because layers are fronto-parallel and regions are rectangles, the
//! ground-truth disparity and the per-view occlusion masks are exact: a
//! central pixel on layer `L` is occluded in view `o` iff some layer with
//! strictly greater disparity covers its projected position in that view.
//!
//! Textures are evaluated analytically at arbitrary continuous coordinates
//! (no canvas, no padding), which keeps warp round trips exact for constant
//! and affine textures and for integer disparities of any texture.

use std::path::Path;

use crate::error::{Error, Result};
use crate::lightfield::{
    save_lightfield, write_pfm, Direction, DisparityMap, GridOffset, ImageBuf, LightField,
};

/// Maximum disparity magnitude handled by the pipeline, in pixels per unit
/// angular step.
pub const D_MAX: f32 = 4.0;

/// Procedural texture, evaluated at continuous scene coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Texture {
    Constant(f32),
    /// Affine ramp `base + slope_x * x + slope_y * y` (exact under bilinear
    /// resampling).
    Gradient { base: f32, slope_x: f32, slope_y: f32 },
    /// Axis-aligned checkerboard with cells of `cell` pixels.
    Checker { cell: f32, low: f32, high: f32 },
    /// Seeded value noise: cosine-interpolated random lattice with spacing
    /// `cell`; values span `0.5 ± amplitude`.
    Noise { seed: u64, cell: f32, amplitude: f32 },
}

fn lattice_hash(seed: u64, i: i64, j: i64) -> f32 {
    let mut z = seed
        ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (j as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 40) as f32 / (1u64 << 24) as f32
}

impl Texture {
    pub fn eval(&self, x: f32, y: f32) -> f32 {
        match *self {
            Texture::Constant(v) => v,
            Texture::Gradient {
                base,
                slope_x,
                slope_y,
            } => base + slope_x * x + slope_y * y,
            Texture::Checker { cell, low, high } => {
                let i = (x / cell).floor() as i64 + (y / cell).floor() as i64;
                if i.rem_euclid(2) == 0 {
                    high
                } else {
                    low
                }
            }
            Texture::Noise {
                seed,
                cell,
                amplitude,
            } => {
                let gx = x / cell;
                let gy = y / cell;
                let i0 = gx.floor();
                let j0 = gy.floor();
                let fx = gx - i0;
                let fy = gy - j0;
                // Cosine smoothstep keeps the lattice values exact at nodes.
                let wx = 0.5 - 0.5 * (std::f32::consts::PI * fx).cos();
                let wy = 0.5 - 0.5 * (std::f32::consts::PI * fy).cos();
                let (i0, j0) = (i0 as i64, j0 as i64);
                let v00 = lattice_hash(seed, i0, j0);
                let v01 = lattice_hash(seed, i0 + 1, j0);
                let v10 = lattice_hash(seed, i0, j0 + 1);
                let v11 = lattice_hash(seed, i0 + 1, j0 + 1);
                let v = v00 * (1.0 - wx) * (1.0 - wy)
                    + v01 * wx * (1.0 - wy)
                    + v10 * (1.0 - wx) * wy
                    + v11 * wx * wy;
                0.5 + (2.0 * v - 1.0) * amplitude
            }
        }
    }
}

/// Layer footprint in central-view pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// Covers every position (use for backgrounds).
    FullFrame,
    /// Half-open rectangle `[x0, x1) × [y0, y1)`.
    Rect { x0: f32, y0: f32, x1: f32, y1: f32 },
}

impl Region {
    #[inline]
    pub fn contains(&self, x: f32, y: f32) -> bool {
        match *self {
            Region::FullFrame => true,
            Region::Rect { x0, y0, x1, y1 } => x >= x0 && x < x1 && y >= y0 && y < y1,
        }
    }

    fn overlaps(&self, other: &Region) -> bool {
        match (*self, *other) {
            (Region::FullFrame, _) | (_, Region::FullFrame) => true,
            (
                Region::Rect { x0, y0, x1, y1 },
                Region::Rect {
                    x0: a0,
                    y0: b0,
                    x1: a1,
                    y1: b1,
                },
            ) => x0 < a1 && a0 < x1 && y0 < b1 && b0 < y1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub disparity: f32,
    pub region: Region,
    pub texture: Texture,
}

/// Layered scene description, back to front.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub layers: Vec<Layer>,
    pub angular_n: usize,
    pub height: usize,
    pub width: usize,
}

/// Exact ground truth for a rendered scene: central-view disparity plus,
/// per view, the mask of central pixels whose scene point that view does
/// not see.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    angular_n: usize,
    height: usize,
    width: usize,
    pub disparity: DisparityMap,
    occlusion: Vec<Vec<bool>>,
}

impl GroundTruth {
    pub fn angular_n(&self) -> usize {
        self.angular_n
    }

    /// Occlusion mask of the view at a centered angular offset.
    pub fn occlusion(&self, offset: GridOffset) -> &[bool] {
        let h = (self.angular_n as i32 - 1) / 2;
        let row = (offset.row + h) as usize;
        let col = (offset.col + h) as usize;
        &self.occlusion[row * self.angular_n + col]
    }

    /// Pixels occluded in at least one view.
    pub fn occluded_union(&self) -> Vec<bool> {
        let mut out = vec![false; self.height * self.width];
        for mask in &self.occlusion {
            for (o, &m) in out.iter_mut().zip(mask) {
                *o |= m;
            }
        }
        out
    }

    /// Pixels occluded in at least one view of the line along `d`.
    pub fn occlusion_band(&self, d: Direction) -> Vec<bool> {
        let h = (self.angular_n as i32 - 1) / 2;
        let step = d.step();
        let mut out = vec![false; self.height * self.width];
        for t in -h..=h {
            let mask = self.occlusion(step.scaled(t));
            for (o, &m) in out.iter_mut().zip(mask) {
                *o |= m;
            }
        }
        out
    }
}

fn validate(spec: &SceneSpec) -> Result<()> {
    if spec.angular_n < 3 || spec.angular_n % 2 == 0 {
        return Err(Error::EvenAngularResolution(spec.angular_n));
    }
    if spec.layers.is_empty() {
        return Err(Error::InvalidConfig("scene has no layers".into()));
    }
    if !spec
        .layers
        .iter()
        .any(|l| matches!(l.region, Region::FullFrame))
    {
        return Err(Error::InvalidConfig(
            "scene needs a full-frame layer so every view pixel is covered".into(),
        ));
    }
    for l in &spec.layers {
        if !l.disparity.is_finite() || l.disparity.abs() > D_MAX {
            return Err(Error::InvalidConfig(format!(
                "layer disparity {} outside [-{D_MAX}, {D_MAX}]",
                l.disparity
            )));
        }
    }
    for i in 0..spec.layers.len() {
        for j in i + 1..spec.layers.len() {
            let (a, b) = (&spec.layers[i], &spec.layers[j]);
            if a.region.overlaps(&b.region) && b.disparity <= a.disparity {
                return Err(Error::LayerOrder(format!(
                    "layer {j} (disparity {}) overlaps layer {i} (disparity {}) \
                     but is not strictly nearer",
                    b.disparity, a.disparity
                )));
            }
        }
    }
    Ok(())
}

/// Front-most layer index covering `(x, y)` in the central view.
fn top_layer_at(spec: &SceneSpec, x: f32, y: f32) -> usize {
    spec.layers
        .iter()
        .rposition(|l| l.region.contains(x, y))
        .expect("a full-frame layer covers everything")
}

/// Renders the scene into a light field plus exact ground truth.
pub fn render_scene(spec: &SceneSpec) -> Result<(LightField, GroundTruth)> {
    validate(spec)?;
    let n = spec.angular_n;
    let (h, w) = (spec.height, spec.width);
    let half = (n as i32 - 1) / 2;

    let mut views = Vec::with_capacity(n * n);
    let mut occlusion = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            let dr = row as i32 - half;
            let dc = col as i32 - half;
            let mut img = ImageBuf::new(h, w, 1);
            for y in 0..h {
                for x in 0..w {
                    let l = spec
                        .layers
                        .iter()
                        .rev()
                        .find(|l| {
                            l.region.contains(
                                x as f32 - dc as f32 * l.disparity,
                                y as f32 - dr as f32 * l.disparity,
                            )
                        })
                        .expect("a full-frame layer covers everything");
                    img.set(
                        y,
                        x,
                        0,
                        l.texture.eval(
                            x as f32 - dc as f32 * l.disparity,
                            y as f32 - dr as f32 * l.disparity,
                        ),
                    );
                }
            }
            views.push(img);

            // Z-buffer occlusion test for central pixels in this view.
            let mut mask = vec![false; h * w];
            for y in 0..h {
                for x in 0..w {
                    let li = top_layer_at(spec, x as f32, y as f32);
                    let d0 = spec.layers[li].disparity;
                    let occluded = spec.layers.iter().any(|other| {
                        other.disparity > d0
                            && other.region.contains(
                                x as f32 + dc as f32 * (d0 - other.disparity),
                                y as f32 + dr as f32 * (d0 - other.disparity),
                            )
                    });
                    mask[y * w + x] = occluded;
                }
            }
            occlusion.push(mask);
        }
    }

    let mut disparity = DisparityMap::new(h, w);
    for y in 0..h {
        for x in 0..w {
            let li = top_layer_at(spec, x as f32, y as f32);
            disparity.set(y, x, spec.layers[li].disparity);
        }
    }

    let lf = LightField::from_views(n, views)?;
    Ok((
        lf,
        GroundTruth {
            angular_n: n,
            height: h,
            width: w,
            disparity,
            occlusion,
        },
    ))
}

/// Named, seeded scene specs used by the evaluation suite and the test
/// oracles. All disparities sit on the default 0.125-px candidate grid and
/// every multi-layer scene uses integer disparities so occlusion bands fall
/// on pixel boundaries.
pub fn standard_suite() -> Vec<(String, SceneSpec)> {
    standard_suite_sized(128, 128)
}

/// [`standard_suite`] at a custom spatial resolution (geometry scales with
/// the frame so small sizes stay well-formed).
pub fn standard_suite_sized(height: usize, width: usize) -> Vec<(String, SceneSpec)> {
    let n = 9;
    let h = height as f32;
    let w = width as f32;
    let rect = |fx0: f32, fy0: f32, fx1: f32, fy1: f32| Region::Rect {
        x0: (fx0 * w).round(),
        y0: (fy0 * h).round(),
        x1: (fx1 * w).round(),
        y1: (fy1 * h).round(),
    };
    let full_bg = |seed: u64, cell: f32, amplitude: f32, disparity: f32| Layer {
        disparity,
        region: Region::FullFrame,
        texture: Texture::Noise {
            seed,
            cell,
            amplitude,
        },
    };

    vec![
        (
            "no_occlusion".into(),
            SceneSpec {
                layers: vec![Layer {
                    disparity: 1.5,
                    region: Region::FullFrame,
                    texture: Texture::Gradient {
                        base: 0.1,
                        slope_x: 0.7 / (w + 16.0),
                        slope_y: 0.2 / (h + 16.0),
                    },
                }],
                angular_n: n,
                height,
                width,
            },
        ),
        (
            "single_occluder".into(),
            SceneSpec {
                layers: vec![
                    full_bg(7, 8.0, 0.35, 0.0),
                    Layer {
                        disparity: 2.0,
                        region: rect(0.34375, 0.34375, 0.65625, 0.65625),
                        texture: Texture::Checker {
                            cell: 8.0,
                            low: 0.15,
                            high: 0.85,
                        },
                    },
                ],
                angular_n: n,
                height,
                width,
            },
        ),
        (
            "double_occluder".into(),
            SceneSpec {
                layers: vec![
                    full_bg(11, 8.0, 0.35, 0.0),
                    Layer {
                        disparity: 1.0,
                        region: rect(0.1875, 0.28125, 0.4375, 0.71875),
                        texture: Texture::Checker {
                            cell: 6.0,
                            low: 0.2,
                            high: 0.8,
                        },
                    },
                    Layer {
                        disparity: 2.0,
                        region: rect(0.5625, 0.28125, 0.8125, 0.71875),
                        texture: Texture::Checker {
                            cell: 5.0,
                            low: 0.25,
                            high: 0.9,
                        },
                    },
                ],
                angular_n: n,
                height,
                width,
            },
        ),
        (
            "thin_bar".into(),
            SceneSpec {
                layers: vec![
                    full_bg(13, 8.0, 0.35, 0.0),
                    Layer {
                        disparity: 2.0,
                        region: Region::Rect {
                            x0: (0.484375 * w).round(),
                            y0: (0.15625 * h).round(),
                            x1: (0.484375 * w).round() + 3.0,
                            y1: (0.84375 * h).round(),
                        },
                        texture: Texture::Checker {
                            cell: 2.0,
                            low: 0.15,
                            high: 0.9,
                        },
                    },
                ],
                angular_n: n,
                height,
                width,
            },
        ),
        (
            "textureless_patch".into(),
            SceneSpec {
                layers: vec![
                    full_bg(17, 16.0, 0.3, 0.0),
                    Layer {
                        disparity: 1.0,
                        region: rect(0.3125, 0.3125, 0.6875, 0.6875),
                        texture: Texture::Constant(0.5),
                    },
                ],
                angular_n: n,
                height,
                width,
            },
        ),
        (
            "hf_noise".into(),
            SceneSpec {
                layers: vec![full_bg(23, 1.0, 0.5, -1.0)],
                angular_n: n,
                height,
                width,
            },
        ),
    ]
}

/// Writes `gt.pfm` plus per-view occlusion masks
/// (`occlusion_{row}_{col}.png`) into a container directory.
pub fn save_ground_truth(gt: &GroundTruth, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    write_pfm(&gt.disparity, &dir.join("gt.pfm"))?;
    let n = gt.angular_n;
    for row in 0..n {
        for col in 0..n {
            let mask = &gt.occlusion[row * n + col];
            let mut img =
                image::ImageBuffer::<image::Luma<u8>, _>::new(gt.width as u32, gt.height as u32);
            for (x, y, p) in img.enumerate_pixels_mut() {
                p.0[0] = if mask[y as usize * gt.width + x as usize] {
                    255
                } else {
                    0
                };
            }
            let path = dir.join(format!("occlusion_{row}_{col}.png"));
            img.save(&path).map_err(|e| Error::Image {
                path,
                message: e.to_string(),
            })?;
        }
    }
    Ok(())
}

/// Mirrors a scene left-right (regions flipped across the vertical axis,
/// textures untouched). Occlusion geometry of the mirrored scene at view
/// offset `(dr, dc)` matches the flipped geometry of the original at
/// `(dr, -dc)`.
pub fn mirror_scene_horizontally(spec: &SceneSpec) -> SceneSpec {
    let w = spec.width as f32;
    let mut out = spec.clone();
    for l in &mut out.layers {
        if let Region::Rect { x0, x1, .. } = &mut l.region {
            let (a, b) = (w - *x1, w - *x0);
            *x0 = a;
            *x1 = b;
        }
    }
    out
}
