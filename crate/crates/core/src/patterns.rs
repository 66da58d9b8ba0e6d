//! One-sided occlusion pattern families over a view line.
//!
//! For a line of M views (M odd, positions `t = -(M-1)/2 ..= (M-1)/2`) the
//! family holds M patterns indexed by `j`:
//!
//! - `j = 0`: all views kept (no occlusion),
//! - odd `j`: the `ceil(j/2)` lowest-`t` views are masked out,
//! - even `j > 0`: the `j/2` highest-`t` views are masked out.
//!
//! Every pattern keeps a contiguous run of views that contains the center
//! and at least one full half-line, which encodes the assumption that
//! occlusion enters from one boundary of the line and occluded views are
//! neighbors.
//!
//! When the angular resolution is downsampled by a factor `beta`, the family
//! is generated over the `M = (N-1)/beta + 1` retained positions and each
//! pattern can be upsampled back to native length N: a masked run of k
//! downsampled views expands to `beta * k` native views on the same side, so
//! the most-occluded downsampled pattern maps onto the most-occluded native
//! pattern and the kept run never shrinks below center-plus-half-line.

use crate::error::{Error, Result};

/// Binary keep/drop mask over the views of a line. `true` = view used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OcclusionPattern {
    pub index: usize,
    pub mask: Vec<bool>,
}

impl OcclusionPattern {
    /// Number of leading (low-`t`) masked views.
    pub fn low_masked(&self) -> usize {
        self.mask.iter().take_while(|&&b| !b).count()
    }

    /// Number of trailing (high-`t`) masked views.
    pub fn high_masked(&self) -> usize {
        self.mask.iter().rev().take_while(|&&b| !b).count()
    }

    pub fn kept(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
}

/// The full pattern family for one `(N, beta)` pair, shared by all four
/// directions.
#[derive(Debug, Clone)]
pub struct PatternSet {
    native_n: usize,
    beta: usize,
    patterns: Vec<OcclusionPattern>,
    upsampled: Vec<Vec<bool>>,
}

impl PatternSet {
    pub fn native_n(&self) -> usize {
        self.native_n
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    /// Number of patterns, `M = (N-1)/beta + 1`.
    pub fn m(&self) -> usize {
        self.patterns.len()
    }

    pub fn patterns(&self) -> &[OcclusionPattern] {
        &self.patterns
    }

    pub fn pattern(&self, j: usize) -> &OcclusionPattern {
        &self.patterns[j]
    }

    /// Native-length (N) mask for pattern `j`.
    pub fn upsampled(&self, j: usize) -> &[bool] {
        &self.upsampled[j]
    }

    /// Native view-line index of downsampled slot `i` (both zero-based).
    #[inline]
    pub fn native_index(&self, i: usize) -> usize {
        self.beta * i
    }

    /// Index of the maximally-occluded pattern of the even (high-`t`
    /// masked) family.
    pub fn last_even(&self) -> usize {
        self.m() - 1
    }

    /// Index of the maximally-occluded pattern of the odd (low-`t`
    /// masked) family.
    pub fn last_odd(&self) -> usize {
        self.m() - 2
    }
}

/// Generates the pattern family for a line of N views downsampled by `beta`.
///
/// Requires N odd and >= 3, `beta >= 1`, and `(N-1)/beta` even so that the
/// downsampled line still has a central view.
pub fn generate_pattern_set(n: usize, beta: usize) -> Result<PatternSet> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::EvenAngularResolution(n));
    }
    if beta == 0 {
        return Err(Error::InvalidConfig("beta must be >= 1".into()));
    }
    if (n - 1) % beta != 0 {
        return Err(Error::InvalidConfig(format!(
            "angular downsampling factor {beta} does not divide N-1 = {}",
            n - 1
        )));
    }
    let span = (n - 1) / beta;
    if span % 2 != 0 {
        return Err(Error::InvalidConfig(format!(
            "beta {beta} leaves an even number of positions ({}) with no central view",
            span + 1
        )));
    }
    let m = span + 1;
    let mut patterns = Vec::with_capacity(m);
    for j in 0..m {
        let mask = if j == 0 {
            vec![true; m]
        } else if j % 2 == 1 {
            let k = j.div_ceil(2);
            (0..m).map(|i| i >= k).collect()
        } else {
            let k = j / 2;
            (0..m).map(|i| i < m - k).collect()
        };
        patterns.push(OcclusionPattern { index: j, mask });
    }
    let upsampled = patterns
        .iter()
        .map(|p| upsample_pattern(p, beta, n).expect("generated pattern has matching length"))
        .collect();
    Ok(PatternSet {
        native_n: n,
        beta,
        patterns,
        upsampled,
    })
}

/// Expands a downsampled pattern back to the native line length N: a masked
/// run of k views grows to `beta * k` on the same side.
pub fn upsample_pattern(p: &OcclusionPattern, beta: usize, n: usize) -> Result<Vec<bool>> {
    let expected = (n - 1) / beta + 1;
    if p.mask.len() != expected {
        return Err(Error::DimensionMismatch(format!(
            "pattern has {} positions, expected {expected} for N={n}, beta={beta}",
            p.mask.len()
        )));
    }
    let low = beta * p.low_masked();
    let high = beta * p.high_masked();
    Ok((0..n).map(|i| i >= low && i < n - high).collect())
}

/// Human-readable listing of the pattern family, one row per pattern.
pub fn pattern_table(n: usize, beta: usize) -> Result<String> {
    let set = generate_pattern_set(n, beta)?;
    let fmt = |mask: &[bool]| -> String { mask.iter().map(|&b| if b { '1' } else { '0' }).collect() };
    let mut out = String::new();
    out.push_str(&format!("N={n} beta={beta} M={}\n", set.m()));
    for p in set.patterns() {
        out.push_str(&format!("j={:<2} {}", p.index, fmt(&p.mask)));
        if beta > 1 {
            out.push_str(&format!("  native {}", fmt(set.upsampled(p.index))));
        }
        out.push('\n');
    }
    Ok(out)
}

/// `(N, beta)` pairs accepted by [`generate_pattern_set`] for a given N.
pub fn valid_betas(n: usize) -> Vec<usize> {
    (1..n)
        .filter(|&b| (n - 1) % b == 0 && ((n - 1) / b) % 2 == 0)
        .collect()
}
