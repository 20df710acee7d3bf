//! Closed-form optimal quantizers and exact mean-square errors for the three
//! supported configurations.
//!
//! - **Equator** (`quantize_equator`): `N` equally spaced points on the great
//!   circle. With `m = floor(N/n)` and `r = N - n*m`, the optimum uses `r`
//!   blocks of `m + 1` points and `n - r` blocks of `m`, each represented by
//!   its midpoint, giving error
//!   `[(n - r) T(m) + r T(m+1)] / N` with block total
//!   `T(s) = delta^2 s (s^2 - 1) / 12`. In the divisible case this collapses
//!   to `pi^2/3 (1/n^2 - 1/N^2)`.
//! - **One small circle** (`quantize_one_circle`): same block structure with
//!   the geodesic kernel; block totals become `S(s, phi0)`. At `phi0 = 0`
//!   this reproduces the equator model bit for bit.
//! - **Two antipodal small circles** (`quantize_two_circles`): codebooks are
//!   antipodally paired, no optimal cell mixes circles, and the problem
//!   decouples into two identical one-circle problems with `k = n/2` codes
//!   each.
//!
//! Curvature enters as the `cos^2(phi0)` factor in the asymptotic error
//! `cos^2(phi0) * pi^2 / (3 k^2)`; the exact finite-`N` values are slightly
//! smaller.

use crate::engine::{
    build_layout, evaluate_layout, layout_midpoints, BlockKernel, BlockLayout, BlockStat, GridSpec,
};
use crate::geometry::{wrap_to_2pi, AngularOffset, Latitude, LatitudeKernel};
use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// Which support configuration a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Equator,
    OneSmallCircle,
    TwoSmallCircles,
}

/// Parameters of a quantization instance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Total number of support points (`2M` for the two-circle model).
    pub total_points: usize,
    /// Requested codebook size.
    pub codes: usize,
    /// Latitude of the supporting circle(s); 0 for the equator.
    pub phi0: f64,
}

/// Which circle a codebook entry sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CircleTag {
    Upper,
    Lower,
    Equator,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CodebookEntry {
    pub longitude: f64,
    pub circle: CircleTag,
}

/// Representative longitudes, each tagged with its supporting circle.
#[derive(Debug, Clone, Serialize)]
pub struct Codebook {
    pub entries: Vec<CodebookEntry>,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn longitudes(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.longitude).collect()
    }
}

/// Exact error of an instance together with the structure that attains it.
#[derive(Debug, Clone, Serialize)]
pub struct DistortionReport {
    /// Mean-square geodesic error, normalized by the total point count.
    pub error: f64,
    /// Per-block statistics (both circles, for the two-circle model).
    pub per_block: Vec<BlockStat>,
    pub model: ModelSpec,
    pub codebook: Codebook,
    /// Canonical block layout on the (upper) circle.
    pub layout: BlockLayout,
    /// True when the two-circle instance used the per-circle non-divisible
    /// layout, which extends the divisible closed form.
    pub extended: bool,
}

/// Block structure shared by all three models on one circle of `count`
/// points with `codes` representatives (`codes` capped at `count`; beyond
/// that every point serves itself at zero error).
struct CircleSolution {
    error: f64,
    layout: BlockLayout,
    stats: Vec<BlockStat>,
    midpoints: Vec<f64>,
    /// The per-circle unnormalized total, before dividing by the point count.
    total: f64,
}

fn solve_circle(count: usize, codes: usize, phi0: Latitude) -> Result<CircleSolution> {
    if count == 0 {
        return Err(Error::InvalidArgument("need at least one point".into()));
    }
    if codes == 0 {
        return Err(Error::InvalidArgument("need at least one code".into()));
    }
    let grid = GridSpec::new(count)?;
    let kernel = BlockKernel::for_latitude(phi0);
    let n_eff = codes.min(count);
    let layout = build_layout(count, n_eff)?;
    let m = count / n_eff;
    let r = count - n_eff * m;
    let mut total = (n_eff - r) as f64 * kernel.block_total(m, grid.spacing())?;
    if r > 0 {
        total += r as f64 * kernel.block_total(m + 1, grid.spacing())?;
    }
    let error = total / count as f64;
    let stats = evaluate_layout(&grid, &layout, &kernel)?;
    let midpoints = layout_midpoints(&grid, &layout);
    debug_assert!({
        let summed: f64 = stats.iter().map(|s| s.total()).sum::<f64>() / count as f64;
        (error - summed).abs() <= 1e-13 * error.max(1e-300)
    });
    Ok(CircleSolution {
        error,
        layout,
        stats,
        midpoints,
        total,
    })
}

/// Exact optimal error for `points` equally spaced equatorial samples and
/// `codes` representatives on the same circle.
///
/// `codes >= points` yields zero error with each sample its own
/// representative (the codebook is truncated to the `points` distinct
/// longitudes).
pub fn quantize_equator(points: usize, codes: usize) -> Result<DistortionReport> {
    let sol = solve_circle(points, codes, Latitude::EQUATOR)?;
    let entries = sol
        .midpoints
        .iter()
        .map(|&longitude| CodebookEntry {
            longitude,
            circle: CircleTag::Equator,
        })
        .collect();
    Ok(DistortionReport {
        error: sol.error,
        per_block: sol.stats,
        model: ModelSpec {
            kind: ModelKind::Equator,
            total_points: points,
            codes,
            phi0: 0.0,
        },
        codebook: Codebook { entries },
        layout: sol.layout,
        extended: false,
    })
}

/// Exact optimal error for `points` equally spaced samples on the small
/// circle at latitude `phi0`, with representatives on the same circle.
///
/// Divisible case: `error = (n/N) S(m, phi0)`; otherwise
/// `[(n - r) S(m, phi0) + r S(m+1, phi0)] / N`. At `phi0 = 0` this is the
/// equator model, bit for bit.
pub fn quantize_one_circle(
    points: usize,
    codes: usize,
    phi0: Latitude,
) -> Result<DistortionReport> {
    if phi0.is_equator() {
        return quantize_equator(points, codes);
    }
    let sol = solve_circle(points, codes, phi0)?;
    let entries = sol
        .midpoints
        .iter()
        .map(|&longitude| CodebookEntry {
            longitude,
            circle: CircleTag::Upper,
        })
        .collect();
    Ok(DistortionReport {
        error: sol.error,
        per_block: sol.stats,
        model: ModelSpec {
            kind: ModelKind::OneSmallCircle,
            total_points: points,
            codes,
            phi0: phi0.value(),
        },
        codebook: Codebook { entries },
        layout: sol.layout,
        extended: false,
    })
}

/// Exact optimal error for two antipodally symmetric small circles at
/// latitudes `+-phi0`, each carrying `per_circle` equally spaced samples,
/// with an even number of representatives split half-and-half.
///
/// No optimal cell mixes circles, so each circle is an independent one-circle
/// problem with `k = codes/2` representatives. The lower-circle blocks are the
/// upper blocks rotated by half a turn, so representatives come in antipodal
/// pairs `(phi0, theta) / (-phi0, theta + pi)`; with an odd `per_circle` a
/// half turn is not a whole number of grid steps and the rotation is
/// `floor(per_circle/2)` steps, pairing to within half a spacing.
///
/// When `k` does not divide `per_circle`, the per-circle non-divisible layout
/// applies and the report is marked `extended`.
pub fn quantize_two_circles(
    per_circle: usize,
    codes: usize,
    phi0: Latitude,
) -> Result<DistortionReport> {
    if codes == 0 || codes % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "two-circle codebooks are antipodally paired: codes must be even and positive, got {codes}"
        )));
    }
    if phi0.is_equator() {
        return Err(Error::InvalidArgument(
            "two-circle model needs phi0 in (0, pi/2); at phi0 = 0 the circles coincide".into(),
        ));
    }
    let k = codes / 2;
    let sol = solve_circle(per_circle, k, phi0)?;
    let k_eff = k.min(per_circle);

    let grid = GridSpec::new(per_circle)?;
    let kernel = BlockKernel::for_latitude(phi0);
    let lower_layout = BlockLayout {
        sizes: sol.layout.sizes.clone(),
        start_index: (sol.layout.start_index + per_circle / 2) % per_circle,
    };
    let lower_stats = evaluate_layout(&grid, &lower_layout, &kernel)?;
    let lower_midpoints = layout_midpoints(&grid, &lower_layout);

    let mut entries: Vec<CodebookEntry> = sol
        .midpoints
        .iter()
        .map(|&longitude| CodebookEntry {
            longitude,
            circle: CircleTag::Upper,
        })
        .collect();
    entries.extend(lower_midpoints.iter().map(|&longitude| CodebookEntry {
        longitude,
        circle: CircleTag::Lower,
    }));

    let mut per_block = sol.stats;
    per_block.extend(lower_stats);

    // Both circles contribute the same total; normalizing 2 * total by 2M
    // equals the per-circle mean.
    let error = sol.total / per_circle as f64;
    debug_assert_eq!(error, sol.error);

    Ok(DistortionReport {
        error,
        per_block,
        model: ModelSpec {
            kind: ModelKind::TwoSmallCircles,
            total_points: 2 * per_circle,
            codes,
            phi0: phi0.value(),
        },
        codebook: Codebook { entries },
        layout: sol.layout,
        extended: per_circle % k_eff != 0,
    })
}

/// Asymptotic two-circle error
/// `cos^2(phi0) * (4 pi^2 / (3 n^2) - pi^2 / (3 M^2))`.
///
/// The leading term is the flat-circle `n^{-2}` law scaled by the curvature
/// factor; the second term is the finite-sampling correction.
pub fn asymptotic_two_circles(codes: usize, per_circle: usize, phi0: Latitude) -> Result<f64> {
    if codes == 0 || codes % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "codes must be even and positive, got {codes}"
        )));
    }
    if per_circle == 0 {
        return Err(Error::InvalidArgument("need at least one point".into()));
    }
    let n = codes as f64;
    let m = per_circle as f64;
    let c2 = phi0.value().cos().powi(2);
    Ok(c2 * (4.0 * PI * PI / (3.0 * n * n) - PI * PI / (3.0 * m * m)))
}

/// Difference between the cross-circle and same-circle geodesic distances
/// for a longitudinal offset `dtheta`:
/// `arccos(-sin^2 phi0 + cos^2 phi0 cos dtheta) - arccos(sin^2 phi0 + cos^2 phi0 cos dtheta)`.
///
/// The two arccos arguments differ by the constant `2 sin^2(phi0)`, so for
/// `phi0 > 0` the gap is strictly positive at every offset; at `dtheta = 0`
/// and at `dtheta = pi` it equals `2 phi0`. This is what pins every sample to
/// a representative on its own circle.
pub fn cross_circle_gap(phi0: Latitude, dtheta: AngularOffset) -> f64 {
    let k = LatitudeKernel::new(phi0);
    k.sigma_cross(dtheta.value()) - k.sigma(dtheta.value())
}

/// One row of the latitude comparison table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LatitudeRow {
    pub phi0: f64,
    pub cos2phi0: f64,
    pub v_exact: f64,
    pub v_asymptotic: f64,
    /// Percent reduction of the asymptotic error relative to the equator,
    /// i.e. `100 (1 - cos^2 phi0)`.
    pub reduction_pct: f64,
}

/// Exact and asymptotic one-circle errors across latitudes, with the percent
/// reduction relative to the equator.
///
/// The exact column comes from [`quantize_one_circle`]; the asymptotic column
/// is `cos^2(phi0) * pi^2 / (3 n^2)`. The two differ at finite `N` and are
/// reported separately.
pub fn latitude_table(
    points: usize,
    codes: usize,
    phis: &[Latitude],
) -> Result<Vec<LatitudeRow>> {
    let n = codes as f64;
    phis.iter()
        .map(|&phi0| {
            let c2 = phi0.value().cos().powi(2);
            Ok(LatitudeRow {
                phi0: phi0.value(),
                cos2phi0: c2,
                v_exact: quantize_one_circle(points, codes, phi0)?.error,
                v_asymptotic: c2 * PI * PI / (3.0 * n * n),
                reduction_pct: 100.0 * (1.0 - c2),
            })
        })
        .collect()
}

/// Checks the antipodal pairing of a two-circle codebook: entry `k + j` on
/// the lower circle must sit at the antipode (half a turn) of entry `j` on
/// the upper circle, to within `tol`.
pub fn antipodally_paired(codebook: &Codebook, tol: f64) -> bool {
    let n = codebook.len();
    if n % 2 != 0 {
        return false;
    }
    let k = n / 2;
    (0..k).all(|j| {
        let up = &codebook.entries[j];
        let lo = &codebook.entries[k + j];
        up.circle == CircleTag::Upper
            && lo.circle == CircleTag::Lower
            && {
                let want = wrap_to_2pi(up.longitude + PI);
                let diff = (lo.longitude - want).abs();
                diff.min((diff - 2.0 * PI).abs()) <= tol
            }
    })
}
