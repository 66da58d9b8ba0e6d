//! Evaluable objectives for a candidate disparity map.
//!
//! The pattern-aware photometric loss accumulates, per direction, the
//! per-view residuals kept by each pixel's selected occlusion pattern
//! (upsampled back to the native line length when `beta > 1`), normalized
//! by the number of contributing (view, pixel) terms so values are
//! comparable across image sizes and downsampling factors.
//!
//! The smoothness term is the edge-weighted mean of forward disparity
//! differences, with image gradients damping the penalty at intensity
//! edges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lightfield::{Direction, DisparityMap, ImageBuf, LightField};
use crate::patterns::{generate_pattern_set, PatternSet};
use crate::photometric::analyze_direction;
use crate::synth::D_MAX;

/// Objective constants. The defaults are the shipped configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConstants {
    /// Occlusion-detection threshold on the cost difference of the two
    /// maximally-occluded patterns.
    pub tau: f64,
    /// Image-edge weight in the smoothness term.
    pub gamma: f64,
    /// Mix between the raw and refined photometric terms.
    pub lambda1: f64,
    /// Weight of the smoothness term.
    pub lambda2: f64,
    /// Angular downsampling factor for the pattern family.
    pub beta: usize,
    /// Disparity range half-width in pixels per angular step.
    pub d_max: f32,
}

impl Default for LossConstants {
    fn default() -> Self {
        Self {
            tau: 0.01,
            gamma: 150.0,
            lambda1: 0.6,
            lambda2: 0.3,
            beta: 1,
            d_max: D_MAX,
        }
    }
}

/// Per-direction photometric losses in [`Direction::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerDirection {
    pub horizontal: f64,
    pub vertical: f64,
    pub diagonal_main: f64,
    pub diagonal_anti: f64,
}

impl PerDirection {
    pub fn from_array(v: [f64; 4]) -> Self {
        Self {
            horizontal: v[0],
            vertical: v[1],
            diagonal_main: v[2],
            diagonal_anti: v[3],
        }
    }

    pub fn sum(&self) -> f64 {
        self.horizontal + self.vertical + self.diagonal_main + self.diagonal_anti
    }
}

/// Full objective evaluation for a (raw, final) disparity pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub pattern_loss_per_direction: PerDirection,
    pub pattern_loss_total: f64,
    pub smoothness: f64,
    pub total: f64,
    pub constants: LossConstants,
}

/// Pattern-aware photometric loss of `disp`, one value per direction in
/// [`Direction::ALL`] order.
///
/// Per pixel and direction, the pattern chosen on the downsampled residuals
/// is upsampled to the native line and only the views it keeps contribute
/// their absolute residual; invalid (out-of-frame) samples are excluded
/// from both the sum and the normalization count.
pub fn pattern_aware_loss(
    lf: &LightField,
    disp: &DisparityMap,
    ps: &PatternSet,
    tau: f64,
) -> Result<[f64; 4]> {
    if lf.height() != disp.height() || lf.width() != disp.width() {
        return Err(Error::DimensionMismatch(format!(
            "light field {}x{} vs disparity {}x{}",
            lf.height(),
            lf.width(),
            disp.height(),
            disp.width()
        )));
    }
    let hw = lf.height() * lf.width();
    let n = lf.angular_n();
    let mut out = [0.0f64; 4];
    for (di, dir) in Direction::ALL.into_iter().enumerate() {
        let analysis = analyze_direction(lf, disp, ps, tau, dir, false)?;
        let mut sum = 0.0f64;
        let mut count = 0u64;
        for p in 0..hw {
            let native = ps.upsampled(analysis.selection[p] as usize);
            for pos in 0..n {
                if native[pos] && analysis.residuals.is_valid(pos, p) {
                    sum += analysis.residuals.value(pos, p) as f64;
                    count += 1;
                }
            }
        }
        out[di] = if count == 0 { 0.0 } else { sum / count as f64 };
    }
    Ok(out)
}

/// Edge-aware smoothness: mean over pixels of forward disparity
/// differences, each damped by `exp(-gamma * |∂I|)` with the image gradient
/// averaged over channels. The last row/column (no forward neighbor) is
/// excluded.
pub fn smoothness_loss(disp: &DisparityMap, center: &ImageBuf, gamma: f64) -> Result<f64> {
    if center.height() != disp.height() || center.width() != disp.width() {
        return Err(Error::DimensionMismatch(format!(
            "image {}x{} vs disparity {}x{}",
            center.height(),
            center.width(),
            disp.height(),
            disp.width()
        )));
    }
    if gamma <= 0.0 {
        return Err(Error::InvalidConfig("gamma must be positive".into()));
    }
    let (h, w, c) = (center.height(), center.width(), center.channels());
    if h < 2 || w < 2 {
        return Err(Error::DimensionMismatch(
            "smoothness needs at least 2x2 pixels".into(),
        ));
    }
    let mut sum = 0.0f64;
    for y in 0..h - 1 {
        for x in 0..w - 1 {
            let d = disp.get(y, x) as f64;
            let dx = (disp.get(y, x + 1) as f64 - d).abs();
            let dy = (disp.get(y + 1, x) as f64 - d).abs();
            let mut gx = 0.0f64;
            let mut gy = 0.0f64;
            for ch in 0..c {
                let i = center.get(y, x, ch) as f64;
                gx += (center.get(y, x + 1, ch) as f64 - i).abs();
                gy += (center.get(y + 1, x, ch) as f64 - i).abs();
            }
            gx /= c as f64;
            gy /= c as f64;
            sum += dx * (-gamma * gx).exp() + dy * (-gamma * gy).exp();
        }
    }
    Ok(sum / ((h - 1) * (w - 1)) as f64)
}

/// Combined objective: `lambda1 * photometric(raw) +
/// (1 - lambda1) * photometric(final) + lambda2 * smoothness(final)`.
pub fn total_objective(
    lf: &LightField,
    disp_raw: &DisparityMap,
    disp_final: &DisparityMap,
    constants: &LossConstants,
) -> Result<LossBreakdown> {
    if !(0.0..=1.0).contains(&constants.lambda1) || constants.lambda2 < 0.0 {
        return Err(Error::InvalidConfig(
            "lambda1 must be in [0,1] and lambda2 >= 0".into(),
        ));
    }
    let ps = generate_pattern_set(lf.angular_n(), constants.beta)?;
    let same = disp_raw == disp_final;

    let raw_dirs = if constants.lambda1 > 0.0 || same {
        pattern_aware_loss(lf, disp_raw, &ps, constants.tau)?
    } else {
        [0.0; 4]
    };
    let final_dirs = if same {
        raw_dirs
    } else if constants.lambda1 < 1.0 {
        pattern_aware_loss(lf, disp_final, &ps, constants.tau)?
    } else {
        [0.0; 4]
    };

    let raw_total: f64 = raw_dirs.iter().sum();
    let final_total: f64 = final_dirs.iter().sum();
    let smooth = smoothness_loss(disp_final, lf.center(), constants.gamma)?;
    let total = constants.lambda1 * raw_total
        + (1.0 - constants.lambda1) * final_total
        + constants.lambda2 * smooth;

    // Report the per-direction values of the map the mixed photometric term
    // is dominated by.
    let reported = if constants.lambda1 >= 0.5 { raw_dirs } else { final_dirs };
    let per_direction = PerDirection::from_array(reported);
    Ok(LossBreakdown {
        pattern_loss_per_direction: per_direction,
        pattern_loss_total: per_direction.sum(),
        smoothness: smooth,
        total,
        constants: *constants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lightfield::GridOffset;
    use crate::patterns::generate_pattern_set;
    use crate::synth::{render_scene, standard_suite_sized, Layer, Region, SceneSpec, Texture};

    fn scene(name: &str, size: usize) -> (LightField, crate::synth::GroundTruth) {
        let spec = standard_suite_sized(size, size)
            .into_iter()
            .find(|(n, _)| n == name)
            .unwrap()
            .1;
        render_scene(&spec).unwrap()
    }

    #[test]
    fn loss_vanishes_at_ground_truth_without_occlusion() {
        let (lf, gt) = scene("no_occlusion", 48);
        let ps = generate_pattern_set(9, 1).unwrap();
        let dirs = pattern_aware_loss(&lf, &gt.disparity, &ps, 0.01).unwrap();
        for (i, d) in dirs.iter().enumerate() {
            assert!(*d < 1e-3, "direction {i}: {d}");
        }
    }

    #[test]
    fn loss_zero_on_constant_texture() {
        let spec = SceneSpec {
            layers: vec![Layer {
                disparity: 2.0,
                region: Region::FullFrame,
                texture: Texture::Constant(0.5),
            }],
            angular_n: 9,
            height: 32,
            width: 32,
        };
        let (lf, _) = render_scene(&spec).unwrap();
        let ps = generate_pattern_set(9, 1).unwrap();
        for d in [-1.0f32, 0.0, 1.7] {
            let disp = DisparityMap::constant(32, 32, d);
            let dirs = pattern_aware_loss(&lf, &disp, &ps, 0.01).unwrap();
            assert_eq!(dirs, [0.0; 4], "disparity {d}");
        }
    }

    #[test]
    fn masked_loss_beats_unmasked_in_occlusion_band() {
        let (lf, gt) = scene("single_occluder", 96);
        let ps = generate_pattern_set(9, 1).unwrap();
        let band = gt.occlusion_band(Direction::Horizontal);
        let analysis =
            analyze_direction(&lf, &gt.disparity, &ps, 0.01, Direction::Horizontal, false)
                .unwrap();
        let hw = 96 * 96;
        let n = 9;
        let accumulate = |masked: bool| -> f64 {
            let mut sum = 0.0f64;
            let mut count = 0u64;
            for p in 0..hw {
                if !band[p] {
                    continue;
                }
                let j = if masked { analysis.selection[p] as usize } else { 0 };
                let native = ps.upsampled(j);
                for pos in 0..n {
                    if native[pos] && analysis.residuals.is_valid(pos, p) {
                        sum += analysis.residuals.value(pos, p) as f64;
                        count += 1;
                    }
                }
            }
            sum / count as f64
        };
        let masked = accumulate(true);
        let unmasked = accumulate(false);
        assert!(
            masked < 0.25 * unmasked,
            "masked {masked} vs unmasked {unmasked}"
        );
    }

    #[test]
    fn smoothness_constant_disparity_is_zero() {
        let img = ImageBuf::from_fn(8, 8, 1, |y, x, _| ((y * 8 + x) % 7) as f32 * 0.1);
        let disp = DisparityMap::constant(8, 8, 1.25);
        assert_eq!(smoothness_loss(&disp, &img, 150.0).unwrap(), 0.0);
    }

    #[test]
    fn smoothness_unit_ramp_closed_form() {
        let img = ImageBuf::from_fn(16, 16, 1, |_, _, _| 0.5);
        let disp = DisparityMap::from_values(
            16,
            16,
            (0..256).map(|i| (i % 16) as f32).collect(),
        );
        let v = smoothness_loss(&disp, &img, 150.0).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn smoothness_edge_damps_step() {
        // A disparity step of 1 colocated with an image edge of 0.5
        // contributes exp(-75) per crossing pixel.
        let img = ImageBuf::from_fn(4, 4, 1, |_, x, _| if x < 2 { 0.1 } else { 0.6 });
        let disp = DisparityMap::from_values(
            4,
            4,
            (0..16).map(|i| if i % 4 < 2 { 0.0 } else { 1.0 }).collect(),
        );
        let v = smoothness_loss(&disp, &img, 150.0).unwrap();
        let expected = (3.0 * (-75.0f64).exp()) / 9.0;
        assert!((v - expected).abs() < 1e-30, "got {v}, expected {expected}");
        assert!(v < 1e-32);
    }

    #[test]
    fn smoothness_invariant_under_constant_shift() {
        let img = ImageBuf::from_fn(8, 8, 1, |y, x, _| (x as f32 * 0.07 + y as f32 * 0.03).fract());
        let disp = DisparityMap::from_values(
            8,
            8,
            (0..64).map(|i| ((i * 37) % 11) as f32 * 0.2 - 1.0).collect(),
        );
        let a = smoothness_loss(&disp, &img, 150.0).unwrap();
        let b = smoothness_loss(&disp.map_values(|v| v + 1.5), &img, 150.0).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn total_objective_lambda_identities() {
        let (lf, gt) = scene("single_occluder", 48);
        let noisy = gt.disparity.map_values(|v| v + 0.25);

        // lambda1 = 1: the final map only enters through smoothness.
        let c1 = LossConstants {
            lambda1: 1.0,
            ..LossConstants::default()
        };
        let b1 = total_objective(&lf, &gt.disparity, &noisy, &c1).unwrap();
        let ps = generate_pattern_set(9, 1).unwrap();
        let raw: f64 = pattern_aware_loss(&lf, &gt.disparity, &ps, c1.tau)
            .unwrap()
            .iter()
            .sum();
        let smooth = smoothness_loss(&noisy, lf.center(), c1.gamma).unwrap();
        assert!((b1.total - (raw + 0.3 * smooth)).abs() < 1e-12);

        // lambda2 = 0: smoothness does not affect the total.
        let c2 = LossConstants {
            lambda2: 0.0,
            ..LossConstants::default()
        };
        let b2 = total_objective(&lf, &gt.disparity, &noisy, &c2).unwrap();
        let fin: f64 = pattern_aware_loss(&lf, &noisy, &ps, c2.tau).unwrap().iter().sum();
        assert!((b2.total - (0.6 * raw + 0.4 * fin)).abs() < 1e-12);
    }

    #[test]
    fn total_objective_near_zero_at_ground_truth() {
        let (lf, gt) = scene("no_occlusion", 48);
        let b = total_objective(&lf, &gt.disparity, &gt.disparity, &LossConstants::default())
            .unwrap();
        assert!(b.total < 1e-3, "total {}", b.total);
        assert!((b.pattern_loss_total
            - (b.pattern_loss_per_direction.horizontal
                + b.pattern_loss_per_direction.vertical
                + b.pattern_loss_per_direction.diagonal_main
                + b.pattern_loss_per_direction.diagonal_anti))
            .abs()
            < 1e-15);
    }

    #[test]
    fn selection_inside_loss_matches_select_pattern() {
        let (lf, gt) = scene("single_occluder", 48);
        let ps = generate_pattern_set(9, 1).unwrap();
        let a = analyze_direction(&lf, &gt.disparity, &ps, 0.01, Direction::Vertical, false)
            .unwrap();
        for p in 0..48 * 48 {
            let j = crate::photometric::select_pattern(a.costs.at(p), 0.01);
            assert_eq!(a.selection[p] as usize, j);
        }
    }

    #[test]
    fn offsets_at_gt_order_losses() {
        let (lf, gt) = scene("hf_noise", 48);
        let ps = generate_pattern_set(9, 1).unwrap();
        let at = |delta: f32| -> f64 {
            pattern_aware_loss(&lf, &gt.disparity.map_values(|v| v + delta), &ps, 0.01)
                .unwrap()
                .iter()
                .sum()
        };
        let l0 = at(0.0);
        let l_half = at(0.5);
        let l_one = at(1.0);
        assert!(l0 < l_half && l_half < l_one, "{l0} {l_half} {l_one}");
    }
}
