//! Backward warping, per-view residuals, and masked pattern costs.
//!
//! A view at angular offset `o` is warped onto the central view by sampling
//! it at `x + o * D(x)` with bilinear interpolation; samples whose taps fall
//! outside the image are marked invalid and excluded from every cost sum.
//!
//! The per-pattern cost is the mean absolute residual over the views a
//! pattern keeps (evaluated at the downsampled line positions), and pattern
//! selection picks the cheapest pattern unless the two maximally-occluded
//! one-sided patterns are indistinguishable within `tau`, in which case no
//! occlusion is assumed and the all-views pattern wins.
//!
//! Cost sums run in `f64` in ascending view order so that independent
//! reimplementations of the same formulas reproduce results bit-exactly.

use crate::error::{Error, Result};
use crate::lightfield::{DisparityMap, GridOffset, ImageBuf, ViewLine};
use crate::patterns::PatternSet;

/// Warps `view` (at angular offset `offset`) onto the central view.
///
/// Returns the warped image and a per-pixel validity mask; a pixel is
/// invalid when its sampling position leaves the view.
pub fn warp_to_center(
    view: &ImageBuf,
    offset: GridOffset,
    disp: &DisparityMap,
) -> Result<(ImageBuf, Vec<bool>)> {
    if view.height() != disp.height() || view.width() != disp.width() {
        return Err(Error::DimensionMismatch(format!(
            "view {}x{} vs disparity {}x{}",
            view.height(),
            view.width(),
            disp.height(),
            disp.width()
        )));
    }
    let (h, w, c) = (view.height(), view.width(), view.channels());
    let mut out = ImageBuf::new(h, w, c);
    let mut valid = vec![false; h * w];
    let mut sample = vec![0.0f32; c];
    for y in 0..h {
        for x in 0..w {
            let d = disp.get(y, x);
            let sx = x as f32 + offset.col as f32 * d;
            let sy = y as f32 + offset.row as f32 * d;
            if view.in_bounds(sx, sy) {
                view.sample_bilinear_into(sx, sy, &mut sample);
                for (ch, &v) in sample.iter().enumerate() {
                    out.set(y, x, ch, v);
                }
                valid[y * w + x] = true;
            }
        }
    }
    Ok((out, valid))
}

/// Per-view absolute residuals against the central view along one line.
///
/// Layout is view-major: `values[i * H*W + p]` is the mean-over-channels
/// L1 residual of line position `i` at pixel `p`. The central position is
/// identically zero and always valid.
#[derive(Debug, Clone)]
pub struct ResidualStack {
    n: usize,
    height: usize,
    width: usize,
    values: Vec<f32>,
    valid: Vec<bool>,
}

impl ResidualStack {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn value(&self, position: usize, pixel: usize) -> f32 {
        self.values[position * self.height * self.width + pixel]
    }

    #[inline]
    pub fn is_valid(&self, position: usize, pixel: usize) -> bool {
        self.valid[position * self.height * self.width + pixel]
    }

    /// Mutable plane for one line position (residuals, validity).
    fn plane_mut(&mut self, position: usize) -> (&mut [f32], &mut [bool]) {
        let hw = self.height * self.width;
        (
            &mut self.values[position * hw..(position + 1) * hw],
            &mut self.valid[position * hw..(position + 1) * hw],
        )
    }
}

/// Computes residuals for every view of `line` against the central view at
/// the given disparity. Works for a per-pixel map or a constant candidate.
pub fn residual_stack(line: &ViewLine<'_>, disp: &DisparityMap) -> Result<ResidualStack> {
    let center = line.views[line.center_index()];
    let (h, w, c) = (center.height(), center.width(), center.channels());
    if h != disp.height() || w != disp.width() {
        return Err(Error::DimensionMismatch(format!(
            "line views {h}x{w} vs disparity {}x{}",
            disp.height(),
            disp.width()
        )));
    }
    let n = line.len();
    let mut rs = ResidualStack {
        n,
        height: h,
        width: w,
        values: vec![0.0; n * h * w],
        valid: vec![false; n * h * w],
    };
    let mut sample = vec![0.0f32; c];
    for (i, (&view, &offset)) in line.views.iter().zip(&line.offsets).enumerate() {
        let (values, valid) = rs.plane_mut(i);
        if offset == GridOffset::ZERO {
            // The center warps onto itself exactly.
            valid.fill(true);
            continue;
        }
        for y in 0..h {
            for x in 0..w {
                let p = y * w + x;
                let d = disp.get(y, x);
                let sx = x as f32 + offset.col as f32 * d;
                let sy = y as f32 + offset.row as f32 * d;
                if !view.in_bounds(sx, sy) {
                    continue;
                }
                view.sample_bilinear_into(sx, sy, &mut sample);
                let reference = center.pixel(y, x);
                let mut acc = 0.0f32;
                for ch in 0..c {
                    acc += (sample[ch] - reference[ch]).abs();
                }
                values[p] = acc / c as f32;
                valid[p] = true;
            }
        }
    }
    Ok(rs)
}

/// Per-pixel masked-mean costs for every pattern of a family, evaluated at
/// the downsampled line positions. Layout is pixel-major:
/// `values[pixel * M + j]`. Patterns with no valid kept position cost
/// `f64::INFINITY`.
#[derive(Debug, Clone)]
pub struct PatternCosts {
    m: usize,
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl PatternCosts {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Cost slice (length M) for one pixel.
    #[inline]
    pub fn at(&self, pixel: usize) -> &[f64] {
        &self.values[pixel * self.m..(pixel + 1) * self.m]
    }
}

/// Evaluates every pattern cost at every pixel.
pub fn pattern_costs(rs: &ResidualStack, ps: &PatternSet) -> Result<PatternCosts> {
    if rs.n() != ps.native_n() {
        return Err(Error::DimensionMismatch(format!(
            "residual stack over {} positions vs pattern set for N={}",
            rs.n(),
            ps.native_n()
        )));
    }
    let m = ps.m();
    let hw = rs.height * rs.width;
    let mut values = vec![0.0f64; hw * m];
    for p in 0..hw {
        let out = &mut values[p * m..(p + 1) * m];
        for (j, pat) in ps.patterns().iter().enumerate() {
            let mut sum = 0.0f64;
            let mut count = 0u32;
            for (i, &keep) in pat.mask.iter().enumerate() {
                if !keep {
                    continue;
                }
                let pos = ps.native_index(i);
                if rs.is_valid(pos, p) {
                    sum += rs.value(pos, p) as f64;
                    count += 1;
                }
            }
            out[j] = if count == 0 {
                f64::INFINITY
            } else {
                sum / count as f64
            };
        }
    }
    Ok(PatternCosts {
        m,
        height: rs.height,
        width: rs.width,
        values,
    })
}

/// Selects the pattern index for one pixel from its M costs.
///
/// If the two maximally-occluded patterns (largest even and largest odd
/// index) cost the same within `tau`, neither side is considered occluded
/// and pattern 0 is chosen; otherwise the cheapest pattern wins with ties
/// broken toward smaller index (less occlusion).
pub fn select_pattern(costs: &[f64], tau: f64) -> usize {
    let m = costs.len();
    debug_assert!(m >= 3);
    let last_even = costs[m - 1];
    let last_odd = costs[m - 2];
    if last_even.is_finite() && last_odd.is_finite() && (last_even - last_odd).abs() < tau {
        return 0;
    }
    let mut best = 0usize;
    let mut best_cost = f64::INFINITY;
    for (j, &c) in costs.iter().enumerate() {
        if c < best_cost {
            best_cost = c;
            best = j;
        }
    }
    best
}

/// Chosen pattern index per pixel for each direction
/// (indexed in [`crate::lightfield::Direction::ALL`] order).
#[derive(Debug, Clone)]
pub struct SelectionMap {
    pub height: usize,
    pub width: usize,
    pub per_direction: Vec<Vec<u8>>,
}

/// Residuals, pattern costs, and chosen pattern per pixel for one direction
/// at one disparity map.
#[derive(Debug, Clone)]
pub struct DirectionAnalysis {
    pub residuals: ResidualStack,
    pub costs: PatternCosts,
    pub selection: Vec<u8>,
}

impl DirectionAnalysis {
    /// Cost of the chosen pattern at `pixel`.
    #[inline]
    pub fn selected_cost(&self, pixel: usize) -> f64 {
        self.costs.at(pixel)[self.selection[pixel] as usize]
    }
}

/// Runs the residual → cost → selection chain for one direction.
///
/// This is the single selection code path shared by the loss evaluation,
/// the plane-sweep cost volume, and the refinement confidence, so their
/// per-pixel choices can never drift apart.
pub fn analyze_direction(
    lf: &crate::lightfield::LightField,
    disp: &DisparityMap,
    ps: &PatternSet,
    tau: f64,
    direction: crate::lightfield::Direction,
    force_pattern_zero: bool,
) -> Result<DirectionAnalysis> {
    let line = lf.extract_view_line(direction);
    let residuals = residual_stack(&line, disp)?;
    let costs = pattern_costs(&residuals, ps)?;
    let hw = costs.height() * costs.width();
    let selection = (0..hw)
        .map(|p| {
            if force_pattern_zero {
                0u8
            } else {
                select_pattern(costs.at(p), tau) as u8
            }
        })
        .collect();
    Ok(DirectionAnalysis {
        residuals,
        costs,
        selection,
    })
}
