//! The one-dimensional block-midpoint engine.
//!
//! On a circle carrying `N` equally spaced support points, an optimal
//! partition into `n` cells consists of contiguous blocks of consecutive
//! points whose sizes differ by at most one, each represented by the midpoint
//! of its angular span. This module provides the pieces of that picture:
//! block layouts, midpoints, and the per-block distortion sums for the
//! equatorial (flat) and small-circle kernels.
//!
//! Two conventions coexist for a block of `s` points with spacing `delta`:
//! the *mean* squared deviation `delta^2 (s^2 - 1) / 12` and the *total*
//! `delta^2 s (s^2 - 1) / 12` (the mean times `s`). Model-level errors sum
//! block totals and divide once by the number of support points. Both forms
//! are exposed with explicit names, and [`BlockStat`] carries the total with
//! a `mean()` accessor.

use crate::geometry::{wrap_to_2pi, LatitudeKernel, Latitude};
use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::TAU;

/// A uniform discrete support on a circle: `count` points at longitudes
/// `base + k * spacing`, `k = 0..count`, with `spacing = 2*pi / count`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSpec {
    count: usize,
    base: f64,
    spacing: f64,
}

impl GridSpec {
    pub fn new(count: usize) -> Result<Self> {
        Self::with_base(count, 0.0)
    }

    pub fn with_base(count: usize, base: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidArgument(
                "grid must contain at least one point".into(),
            ));
        }
        if !base.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grid base must be finite, got {base}"
            )));
        }
        Ok(GridSpec {
            count,
            base,
            spacing: TAU / count as f64,
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Longitude of point `k`, wrapped to `[0, 2*pi)`.
    pub fn longitude(&self, k: usize) -> f64 {
        wrap_to_2pi(self.longitude_unwrapped(k))
    }

    /// Longitude of point `k` on the universal cover (`base + k * spacing`,
    /// no wrap). Within-block arithmetic uses this form so that a block is a
    /// plain interval of the real line.
    pub fn longitude_unwrapped(&self, k: usize) -> f64 {
        self.base + k as f64 * self.spacing
    }

    /// All point longitudes wrapped to `[0, 2*pi)`.
    pub fn longitudes(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.longitude(k)).collect()
    }
}

/// A cyclic partition of grid indices into contiguous blocks.
///
/// Block `j` starts at grid index `start_index + sizes[0] + .. + sizes[j-1]`
/// (mod `N`) and covers `sizes[j]` consecutive points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockLayout {
    pub sizes: Vec<usize>,
    pub start_index: usize,
}

impl BlockLayout {
    pub fn total_points(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Grid index of the first point of block `j`.
    pub fn block_start(&self, j: usize) -> usize {
        let n = self.total_points();
        let offset: usize = self.sizes[..j].iter().sum();
        (self.start_index + offset) % n
    }

    /// Sizes sorted ascending, for multiset comparisons.
    pub fn size_multiset(&self) -> Vec<usize> {
        let mut s = self.sizes.clone();
        s.sort_unstable();
        s
    }

    /// The same block pattern with the size list rotated left by `by` blocks.
    pub fn rotated_sizes(&self, by: usize) -> BlockLayout {
        let n = self.sizes.len();
        let mut sizes = Vec::with_capacity(n);
        for j in 0..n {
            sizes.push(self.sizes[(j + by) % n]);
        }
        BlockLayout {
            sizes,
            start_index: self.start_index,
        }
    }
}

/// Size, midpoint representative, and unnormalized distortion total of one
/// block.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlockStat {
    pub size: usize,
    pub midpoint: f64,
    /// Total within-block squared deviation (not divided by `size`).
    pub distortion: f64,
}

impl BlockStat {
    /// Unnormalized block sum; zero exactly when the block is a single point.
    pub fn total(&self) -> f64 {
        self.distortion
    }

    /// Per-point mean within the block.
    pub fn mean(&self) -> f64 {
        self.distortion / self.size as f64
    }
}

/// Distance kernel used for block sums: squared angular deviation on the
/// equator, squared geodesic offset on a small circle.
#[derive(Debug, Clone, Copy)]
pub enum BlockKernel {
    Equator,
    SmallCircle(LatitudeKernel),
}

impl BlockKernel {
    pub fn for_latitude(phi0: Latitude) -> Self {
        if phi0.is_equator() {
            BlockKernel::Equator
        } else {
            BlockKernel::SmallCircle(LatitudeKernel::new(phi0))
        }
    }

    /// Squared deviation for one signed offset.
    pub fn squared(&self, offset: f64) -> f64 {
        match self {
            BlockKernel::Equator => offset * offset,
            BlockKernel::SmallCircle(k) => k.sigma_sq(offset),
        }
    }

    /// Total within-block squared deviation of `size` consecutive points with
    /// spacing `delta`, represented at the block midpoint.
    pub fn block_total(&self, size: usize, delta: f64) -> Result<f64> {
        match self {
            BlockKernel::Equator => block_total_equator(size, delta),
            BlockKernel::SmallCircle(k) => Ok(small_circle_block_sum(size, k, delta)),
        }
    }
}

/// Sum of squared centered offsets `sum_{j=0}^{m-1} (j - (m-1)/2)^2`, which
/// equals `m (m^2 - 1) / 12` exactly.
///
/// The product `m (m^2 - 1)` is formed in exact integer arithmetic and
/// divided by 12 in a single floating step, so the identity tests see no
/// accumulation error.
pub fn centered_square_sum(m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "centered square sum needs m >= 1".into(),
        ));
    }
    let m = m as i128;
    let prod = m
        .checked_mul(m)
        .and_then(|sq| m.checked_mul(sq - 1))
        .ok_or_else(|| Error::Overflow(format!("m(m^2-1) exceeds i128 for m = {m}")))?;
    Ok(prod as f64 / 12.0)
}

/// Mean squared angular deviation of `size` consecutive grid points from a
/// candidate representative `theta` (equatorial kernel).
///
/// `theta` is taken on the universal cover anchored at the block's first
/// point; the function is a strictly convex quadratic in `theta`, minimized
/// at the block midpoint.
pub fn block_objective(grid: &GridSpec, start: usize, size: usize, theta: f64) -> f64 {
    debug_assert!(size >= 1 && size <= grid.count());
    let base = grid.longitude_unwrapped(start);
    let mut sum = 0.0;
    for j in 0..size {
        let d = base + j as f64 * grid.spacing() - theta;
        sum += d * d;
    }
    sum / size as f64
}

/// Midpoint of the angular span of a block: first point plus `(size-1)*delta/2`.
pub fn block_midpoint(grid: &GridSpec, start: usize, size: usize) -> f64 {
    grid.longitude_unwrapped(start) + 0.5 * (size as f64 - 1.0) * grid.spacing()
}

/// Per-block mean at the optimal midpoint on the equator:
/// `delta^2 (s^2 - 1) / 12`.
pub fn block_mean_equator(size: usize, delta: f64) -> f64 {
    delta * delta * ((size * size - 1) as f64) / 12.0
}

/// Total block sum at the optimal midpoint on the equator:
/// `delta^2 s (s^2 - 1) / 12`, i.e. `size` times the mean.
pub fn block_total_equator(size: usize, delta: f64) -> Result<f64> {
    Ok(delta * delta * centered_square_sum(size as u64)?)
}

/// Total within-block squared geodesic deviation on a small circle:
/// `S(s, phi0) = sum_j sigma(phi0, (j - (s-1)/2) * delta)^2`.
///
/// The centered offsets handle even and odd `s` uniformly.
pub fn block_sum_small_circle(size: usize, phi0: Latitude, delta: f64) -> f64 {
    small_circle_block_sum(size, &LatitudeKernel::new(phi0), delta)
}

fn small_circle_block_sum(size: usize, kernel: &LatitudeKernel, delta: f64) -> f64 {
    let center = 0.5 * (size as f64 - 1.0);
    let mut sum = 0.0;
    for j in 0..size {
        sum += kernel.sigma_sq((j as f64 - center) * delta);
    }
    sum
}

/// Canonical near-equal partition of `count` cyclic points into `codes`
/// blocks: `r = count - codes * m` blocks of size `m + 1` first, then the
/// blocks of size `m = floor(count / codes)`, starting at grid index 0.
pub fn build_layout(count: usize, codes: usize) -> Result<BlockLayout> {
    if codes == 0 || codes > count {
        return Err(Error::InvalidArgument(format!(
            "block count {codes} must satisfy 1 <= codes <= {count}"
        )));
    }
    let m = count / codes;
    let r = count - codes * m;
    let mut sizes = vec![m + 1; r];
    sizes.resize(codes, m);
    Ok(BlockLayout {
        sizes,
        start_index: 0,
    })
}

/// One representative longitude per block, wrapped to `[0, 2*pi)`.
///
/// Each midpoint is the block's first-point longitude plus
/// `(size - 1) * spacing / 2`, computed on the universal cover and wrapped
/// once at the end; midpoints are never formed by averaging wrapped angles.
pub fn layout_midpoints(grid: &GridSpec, layout: &BlockLayout) -> Vec<f64> {
    let mut mids = Vec::with_capacity(layout.sizes.len());
    let mut start = layout.start_index;
    for &s in &layout.sizes {
        mids.push(wrap_to_2pi(block_midpoint(grid, start, s)));
        start = (start + s) % grid.count();
    }
    mids
}

/// Discrete second difference of the per-block mean,
/// `D(s+1) - 2 D(s) + D(s-1)` with `D(s) = delta^2 (s^2 - 1) / 12`.
///
/// The integer bracket `((s+1)^2 - 1) - 2(s^2 - 1) + ((s-1)^2 - 1)` collapses
/// to 2 exactly, so the result is `delta^2 / 6` independent of `s`; forming
/// the bracket in integer arithmetic keeps the cancellation exact.
pub fn smoothing_second_difference(size: usize, delta: f64) -> Result<f64> {
    if size < 2 {
        return Err(Error::InvalidArgument(
            "second difference needs size >= 2".into(),
        ));
    }
    let s = size as i128;
    let bracket = ((s + 1) * (s + 1) - 1) - 2 * (s * s - 1) + ((s - 1) * (s - 1) - 1);
    Ok(delta * delta * bracket as f64 / 12.0)
}

/// Per-block statistics of a layout on a grid, by explicit summation of the
/// kernel over every point against its block midpoint.
///
/// This is the semantic evaluation route; model closed forms must agree with
/// the sum of these totals divided by the point count.
pub fn evaluate_layout(
    grid: &GridSpec,
    layout: &BlockLayout,
    kernel: &BlockKernel,
) -> Result<Vec<BlockStat>> {
    if layout.total_points() != grid.count() {
        return Err(Error::InvalidArgument(format!(
            "layout covers {} points but grid has {}",
            layout.total_points(),
            grid.count()
        )));
    }
    let delta = grid.spacing();
    let mut stats = Vec::with_capacity(layout.sizes.len());
    let mut start = layout.start_index;
    for &s in &layout.sizes {
        let center = 0.5 * (s as f64 - 1.0);
        let mut total = 0.0;
        for j in 0..s {
            total += kernel.squared((j as f64 - center) * delta);
        }
        stats.push(BlockStat {
            size: s,
            midpoint: wrap_to_2pi(block_midpoint(grid, start, s)),
            distortion: total,
        });
        start = (start + s) % grid.count();
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Latitude;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn lat(v: f64) -> Latitude {
        Latitude::new(v).unwrap()
    }

    #[test]
    fn centered_square_sum_small_values() {
        assert_eq!(centered_square_sum(1).unwrap(), 0.0);
        assert_eq!(centered_square_sum(3).unwrap(), 2.0);
        assert_eq!(centered_square_sum(4).unwrap(), 5.0);
        // Brute-force comparison for a range of sizes.
        for m in 1u64..=64 {
            let c = 0.5 * (m as f64 - 1.0);
            let brute: f64 = (0..m).map(|j| (j as f64 - c).powi(2)).sum();
            assert!((centered_square_sum(m).unwrap() - brute).abs() < 1e-10);
        }
    }

    #[test]
    fn centered_square_sum_overflow() {
        assert!(matches!(
            centered_square_sum(u64::MAX),
            Err(crate::Error::Overflow(_))
        ));
        assert!(centered_square_sum(0).is_err());
    }

    #[test]
    fn block_objective_examples() {
        let grid = GridSpec::new(12).unwrap();
        let delta = grid.spacing();
        assert!((delta - PI / 6.0).abs() < 1e-15);

        // A single point served by itself costs nothing.
        assert_eq!(block_objective(&grid, 3, 1, grid.longitude_unwrapped(3)), 0.0);

        // Two points at +-delta/2 around the midpoint.
        let mid2 = block_midpoint(&grid, 0, 2);
        assert!((block_objective(&grid, 0, 2, mid2) - delta * delta / 4.0).abs() < 1e-15);

        // The midpoint value matches delta^2 (s^2-1)/12 for all block sizes.
        for s in 1..=12 {
            let mid = block_midpoint(&grid, 2, s);
            let got = block_objective(&grid, 2, s, mid);
            let want = block_mean_equator(s, delta);
            if want > 0.0 {
                assert!((got - want).abs() / want < 1e-13, "s = {s}");
            } else {
                assert_eq!(got, 0.0);
            }
        }
    }

    #[test]
    fn block_objective_midpoint_is_minimum() {
        let grid = GridSpec::new(24).unwrap();
        for &s in &[2usize, 5, 8, 13] {
            let mid = block_midpoint(&grid, 4, s);
            let at_mid = block_objective(&grid, 4, s, mid);
            for &eps in &[1e-3, 1e-2, 1e-1] {
                assert!(at_mid <= block_objective(&grid, 4, s, mid + eps));
                assert!(at_mid <= block_objective(&grid, 4, s, mid - eps));
            }
            // Ternary search over the block span, finished with one exact
            // quadratic-vertex step (the objective is a parabola, and pure
            // ternary stalls on rounding noise near the bottom).
            let (mut lo, mut hi) = (
                grid.longitude_unwrapped(4),
                grid.longitude_unwrapped(4) + (s as f64 - 1.0) * grid.spacing(),
            );
            if s == 1 {
                continue;
            }
            while hi - lo > 1e-5 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if block_objective(&grid, 4, s, m1) < block_objective(&grid, 4, s, m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let x1 = 0.5 * (lo + hi);
            let (f0, f1, f2) = (
                block_objective(&grid, 4, s, lo),
                block_objective(&grid, 4, s, x1),
                block_objective(&grid, 4, s, hi),
            );
            let denom = (x1 - lo) * (f1 - f2) - (x1 - hi) * (f1 - f0);
            let vertex = x1
                - 0.5 * ((x1 - lo).powi(2) * (f1 - f2) - (x1 - hi).powi(2) * (f1 - f0)) / denom;
            assert!((vertex - mid).abs() < 1e-10, "s = {s}");
        }
    }

    #[test]
    fn small_circle_sum_reduces_to_equator() {
        // Block offsets must stay within a half turn: s <= point count.
        let delta = TAU / 64.0;
        for s in 1..=64 {
            let got = block_sum_small_circle(s, Latitude::EQUATOR, delta);
            let want = block_total_equator(s, delta).unwrap();
            if want > 0.0 {
                assert!((got - want).abs() / want < 1e-13, "s = {s}");
            } else {
                assert_eq!(got, 0.0);
            }
        }
    }

    #[test]
    fn small_circle_sum_single_point_is_zero() {
        assert_eq!(block_sum_small_circle(1, lat(0.9), TAU / 10.0), 0.0);
    }

    #[test]
    fn small_circle_sum_independent_eight_term_oracle() {
        // Block of 8 on a 24-point circle at phi0 = 0.5: centered offsets
        // t in {-3.5, ..., 3.5}, summed term by term.
        let delta = TAU / 24.0;
        let k = LatitudeKernel::new(lat(0.5));
        let terms = [-3.5f64, -2.5, -1.5, -0.5, 0.5, 1.5, 2.5, 3.5];
        let by_hand: f64 = terms.iter().map(|t| k.sigma(t * delta).powi(2)).sum();
        let got = block_sum_small_circle(8, lat(0.5), delta);
        assert!((got - by_hand).abs() < 1e-13);
        assert!((got - 2.188615483905403).abs() < 1e-12);
    }

    #[test]
    fn build_layout_examples() {
        assert_eq!(build_layout(12, 5).unwrap().sizes, vec![3, 3, 2, 2, 2]);
        assert_eq!(build_layout(12, 4).unwrap().sizes, vec![3, 3, 3, 3]);
        assert_eq!(build_layout(5, 5).unwrap().sizes, vec![1, 1, 1, 1, 1]);
        assert!(build_layout(5, 0).is_err());
        assert!(build_layout(5, 6).is_err());
    }

    #[test]
    fn layout_midpoints_examples() {
        let grid = GridSpec::new(12).unwrap();
        let delta = grid.spacing();

        // One block of all N points starting at 0: midpoint (N-1)*delta/2.
        let one = BlockLayout {
            sizes: vec![12],
            start_index: 0,
        };
        let mids = layout_midpoints(&grid, &one);
        assert!((mids[0] - 11.0 * delta / 2.0).abs() < 1e-12);

        // Size-1 blocks sit on the points themselves.
        let singletons = build_layout(12, 12).unwrap();
        for (k, mid) in layout_midpoints(&grid, &singletons).iter().enumerate() {
            assert!((mid - grid.longitude(k)).abs() < 1e-12);
        }

        // First midpoint of the [3,3,2,2,2] layout is one spacing in.
        let layout = build_layout(12, 5).unwrap();
        let mids = layout_midpoints(&grid, &layout);
        assert!((mids[0] - PI / 6.0).abs() < 1e-12);
    }

    #[test]
    fn second_difference_examples() {
        let got = smoothing_second_difference(2, 1.0).unwrap();
        assert!((got - 1.0 / 6.0).abs() < 1e-16);

        let d = PI / 6.0;
        let got = smoothing_second_difference(10, d).unwrap();
        assert!(((got - d * d / 6.0) / got).abs() < 1e-15);

        // Independent of s, and equal to the literal three-term difference.
        for s in 2..40usize {
            let v = smoothing_second_difference(s, d).unwrap();
            assert_eq!(v, smoothing_second_difference(2, d).unwrap());
            let lit = block_mean_equator(s + 1, d) - 2.0 * block_mean_equator(s, d)
                + block_mean_equator(s - 1, d);
            assert!((v - lit).abs() / v < 1e-12);
        }
        assert!(smoothing_second_difference(1, d).is_err());
    }

    #[test]
    fn evaluate_layout_totals_match_closed_forms() {
        let grid = GridSpec::new(12).unwrap();
        let layout = build_layout(12, 5).unwrap();
        let stats = evaluate_layout(&grid, &layout, &BlockKernel::Equator).unwrap();
        assert_eq!(stats.len(), 5);
        for st in &stats {
            let want = block_total_equator(st.size, grid.spacing()).unwrap();
            assert!((st.total() - want).abs() < 1e-15);
            assert!((st.mean() - want / st.size as f64).abs() < 1e-15);
        }
        // Distortion vanishes exactly on singleton blocks.
        let singles = build_layout(12, 12).unwrap();
        for st in evaluate_layout(&grid, &singles, &BlockKernel::Equator).unwrap() {
            assert_eq!(st.total(), 0.0);
        }
    }

    proptest! {
        #[test]
        fn prop_layout_invariants(count in 1usize..200, codes in 1usize..40) {
            prop_assume!(codes <= count);
            let layout = build_layout(count, codes).unwrap();
            prop_assert_eq!(layout.total_points(), count);
            let max = *layout.sizes.iter().max().unwrap();
            let min = *layout.sizes.iter().min().unwrap();
            prop_assert!(max - min <= 1);
            let m = count / codes;
            let r = count - codes * m;
            let larger = layout.sizes.iter().filter(|&&s| s == m + 1).count();
            if r > 0 {
                prop_assert_eq!(larger, r);
            }
        }
    }
}
