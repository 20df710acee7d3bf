//! Runnable invariant suite: geometric identities and bounds, engine
//! identities, the smoothing principle, oracle agreement sweeps, Lloyd
//! fixed-point checks, cross-circle positivity, and perturbation stability.
//!
//! Every check is a standalone function returning a [`CheckOutcome`];
//! [`run_suite`] bundles them at two budgets. The `small` budget finishes in
//! seconds; `full` runs the complete agreement sweeps.

use crate::engine::{
    block_mean_equator, block_midpoint, block_objective, block_sum_small_circle, build_layout,
    centered_square_sum, evaluate_layout, layout_midpoints, smoothing_second_difference,
    BlockKernel, GridSpec,
};
use crate::geometry::{
    sigma, sigma_arcsin, sigma_bounds, sigma_local, AngularOffset, Latitude, LatitudeKernel,
};
use crate::models::{
    antipodally_paired, cross_circle_gap, quantize_equator, quantize_one_circle,
    quantize_two_circles,
};
use crate::oracle::{exhaustive_optimal, lloyd_iterate, lloyd_multistart, perturbation_check, DpSolver};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Small,
    Full,
}

impl std::str::FromStr for Budget {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "small" => Ok(Budget::Small),
            "full" => Ok(Budget::Full),
            other => Err(crate::Error::InvalidArgument(format!(
                "unknown budget '{other}': expected small or full"
            ))),
        }
    }
}

/// Result of one named check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckOutcome {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Aggregated suite outcome.
#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub budget: String,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckOutcome>,
}

fn lat(v: f64) -> Latitude {
    Latitude::new(v).expect("check latitude in range")
}

fn off(v: f64) -> AngularOffset {
    AngularOffset::new(v).expect("finite offset")
}

/// `|sigma - sigma_arcsin| <= 1e-12` over a `grid x grid` lattice of
/// latitudes in `[0, 1.4]` and offsets in `[-pi, pi]`.
pub fn check_dual_formula(grid: usize) -> CheckOutcome {
    let mut worst = 0.0f64;
    for i in 0..grid {
        let phi = lat(1.4 * i as f64 / (grid - 1) as f64);
        for j in 0..grid {
            let dt = off(-PI + 2.0 * PI * j as f64 / (grid - 1) as f64);
            worst = worst.max((sigma(phi, dt) - sigma_arcsin(phi, dt)).abs());
        }
    }
    CheckOutcome::new(
        "geometry/dual-formula",
        worst <= 1e-12,
        format!("max |arccos - arcsine| = {worst:.3e} on {grid}x{grid} grid"),
    )
}

/// Sandwich bounds hold everywhere; the upper bound is tight on the equator
/// and strict away from it.
pub fn check_sandwich_bounds() -> CheckOutcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut phis = vec![0.0];
    for i in 1..=14 {
        phis.push(0.1 * i as f64);
    }
    for &phi in &phis {
        let l = lat(phi);
        for j in 0..1000 {
            let dt = off(-PI + 2.0 * PI * (j + 1) as f64 / 1001.0);
            let s = sigma(l, dt);
            let (lo, hi) = sigma_bounds(l, dt);
            ok &= lo <= s + 1e-12 && s <= hi + 1e-12;
            worst = worst.max((lo - s).max(s - hi));
            if phi == 0.0 {
                ok &= (s - dt.value().abs()).abs() <= 1e-12;
            } else if phi >= 0.1 && dt.value().abs() >= 0.01 {
                ok &= hi - s > 1e-9;
            }
        }
    }
    CheckOutcome::new(
        "geometry/sandwich-bounds",
        ok,
        format!("worst bound slack {worst:.3e}"),
    )
}

/// `sigma` strictly increases in the offset on `[0, pi]`.
pub fn check_monotonic_in_offset() -> CheckOutcome {
    let mut ok = true;
    for &phi in &[0.0, 0.3, 0.6, 1.0, 1.4] {
        let k = LatitudeKernel::new(lat(phi));
        let mut prev = 0.0;
        for j in 1..=1000 {
            let s = k.sigma(PI * j as f64 / 1000.0);
            ok &= s > prev;
            prev = s;
        }
    }
    CheckOutcome::new(
        "geometry/monotonic-in-offset",
        ok,
        "strict increase on 1000-point grids".into(),
    )
}

/// For fixed offset in `(0, pi)`, `sigma` strictly decreases as latitude
/// grows.
pub fn check_monotonic_in_latitude() -> CheckOutcome {
    let mut ok = true;
    for &dt in &[0.3, 1.0, 2.0, 3.0] {
        let mut prev = f64::INFINITY;
        for i in 0..=100 {
            let s = sigma(lat(1.4 * i as f64 / 100.0), off(dt));
            ok &= s < prev;
            prev = s;
        }
    }
    CheckOutcome::new(
        "geometry/monotonic-in-latitude",
        ok,
        "strict decrease across 100 latitude steps".into(),
    )
}

/// Curvature of the offset map, established numerically by second
/// differences: `sigma` itself is strictly concave in the offset on
/// `(0, pi)` for positive latitudes (its slope falls from `cos(phi0)` at 0
/// to 0 at a half turn) and linear on the equator.
pub fn check_concavity_in_offset() -> CheckOutcome {
    let mut ok = true;
    let h = PI / 400.0;
    for &phi in &[0.1, 0.3, 0.6, 1.0, 1.4] {
        let k = LatitudeKernel::new(lat(phi));
        for j in 1..399 {
            let x = PI * j as f64 / 400.0;
            let dd = k.sigma(x - h) - 2.0 * k.sigma(x) + k.sigma(x + h);
            ok &= dd < 0.0;
        }
    }
    let k0 = LatitudeKernel::new(Latitude::EQUATOR);
    for j in 1..399 {
        let x = PI * j as f64 / 400.0;
        let dd = k0.sigma(x - h) - 2.0 * k0.sigma(x) + k0.sigma(x + h);
        ok &= dd.abs() <= 1e-12;
    }
    CheckOutcome::new(
        "geometry/concavity-in-offset",
        ok,
        "sigma second differences negative off the equator, zero on it".into(),
    )
}

/// The distortion kernel `sigma^2` is convex in the offset while the offset
/// stays within a quarter turn; this is the property the
/// contiguous-partition machinery leans on.
pub fn check_kernel_convexity() -> CheckOutcome {
    let mut ok = true;
    let h = 1.5 / 300.0;
    for &phi in &[0.0, 0.1, 0.3, 0.6, 1.0, 1.4] {
        let k = LatitudeKernel::new(lat(phi));
        for j in 1..299 {
            let x = 1.5 * j as f64 / 300.0;
            let dd = k.sigma_sq(x - h) - 2.0 * k.sigma_sq(x) + k.sigma_sq(x + h);
            ok &= dd > 0.0;
        }
    }
    CheckOutcome::new(
        "geometry/kernel-convexity",
        ok,
        "sigma^2 second differences positive for offsets within 1.5 rad".into(),
    )
}

/// `|sigma - cos(phi0)|dtheta|| / |dtheta|^3` stays bounded over
/// `dtheta = 2^-3 .. 2^-20`.
pub fn check_cubic_remainder() -> CheckOutcome {
    let mut worst = 0.0f64;
    for &phi in &[0.0, 0.3, 0.6, 1.0, 1.4] {
        let l = lat(phi);
        for k in 3..=20 {
            let dt = (2.0f64).powi(-k);
            let ratio = (sigma(l, off(dt)) - sigma_local(l, off(dt))).abs() / dt.powi(3);
            worst = worst.max(ratio);
        }
    }
    CheckOutcome::new(
        "geometry/cubic-remainder",
        worst <= 0.05,
        format!("max remainder ratio {worst:.3e}"),
    )
}

/// `block_objective` at the midpoint equals `delta^2 (s^2 - 1)/12`.
pub fn check_block_identity(max_size: usize) -> CheckOutcome {
    let mut worst = 0.0f64;
    for &count in &[12usize, 48, 128] {
        let grid = GridSpec::new(count).expect("grid");
        for s in 1..=max_size.min(count) {
            let mid = block_midpoint(&grid, 2, s);
            let got = block_objective(&grid, 2, s, mid);
            let want = block_mean_equator(s, grid.spacing());
            if want > 0.0 {
                worst = worst.max((got - want).abs() / want);
            } else if got != 0.0 {
                worst = worst.max(1.0);
            }
        }
    }
    CheckOutcome::new(
        "engine/block-identity",
        worst <= 1e-13,
        format!("max relative deviation {worst:.3e}"),
    )
}

/// The block objective is minimized at the midpoint: probes at `+-eps` never
/// win, and a ternary search over the block span (finished with one exact
/// quadratic-vertex step, since pure ternary stalls on rounding noise at the
/// bottom of a parabola) lands on the midpoint.
pub fn check_midpoint_optimality() -> CheckOutcome {
    let grid = GridSpec::new(24).expect("grid");
    let mut ok = true;
    let mut worst = 0.0f64;
    for &s in &[2usize, 3, 5, 8, 13, 24] {
        let mid = block_midpoint(&grid, 4, s);
        let at_mid = block_objective(&grid, 4, s, mid);
        for &eps in &[1e-3, 1e-2, 1e-1] {
            ok &= at_mid <= block_objective(&grid, 4, s, mid + eps);
            ok &= at_mid <= block_objective(&grid, 4, s, mid - eps);
        }
        let f = |theta: f64| block_objective(&grid, 4, s, theta);
        let (mut lo, mut hi) = (mid - grid.spacing(), mid + grid.spacing());
        while hi - lo > 1e-5 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f(m1) < f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let x1 = 0.5 * (lo + hi);
        let (f0, f1, f2) = (f(lo), f(x1), f(hi));
        let denom = (x1 - lo) * (f1 - f2) - (x1 - hi) * (f1 - f0);
        let vertex =
            x1 - 0.5 * ((x1 - lo).powi(2) * (f1 - f2) - (x1 - hi).powi(2) * (f1 - f0)) / denom;
        worst = worst.max((vertex - mid).abs());
    }
    CheckOutcome::new(
        "engine/midpoint-optimality",
        ok && worst <= 1e-10,
        format!("span search off by at most {worst:.3e}"),
    )
}

/// At zero latitude the geodesic block sum reduces to the flat closed form.
pub fn check_equator_reduction(max_size: usize) -> CheckOutcome {
    let mut worst = 0.0f64;
    for &count in &[24usize, 120] {
        let delta = 2.0 * PI / count as f64;
        for s in 2..=max_size.min(count) {
            let got = block_sum_small_circle(s, Latitude::EQUATOR, delta);
            let want = delta * delta * centered_square_sum(s as u64).expect("css");
            worst = worst.max((got - want).abs() / want);
        }
    }
    CheckOutcome::new(
        "engine/equator-reduction",
        worst <= 1e-13,
        format!("max relative deviation {worst:.3e}"),
    )
}

/// The discrete second difference of the per-block mean is `delta^2 / 6`,
/// independent of the block size.
pub fn check_second_difference() -> CheckOutcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for &delta in &[1.0, PI / 6.0, 2.0 * PI / 48.0] {
        let want = delta * delta / 6.0;
        for s in 2..=64 {
            let got = smoothing_second_difference(s, delta).expect("size >= 2");
            worst = worst.max(((got - want) / want).abs());
            let literal = block_mean_equator(s + 1, delta) - 2.0 * block_mean_equator(s, delta)
                + block_mean_equator(s - 1, delta);
            ok &= ((literal - want) / want).abs() <= 1e-12;
        }
    }
    CheckOutcome::new(
        "engine/second-difference",
        ok && worst <= 1e-15,
        format!("max relative deviation {worst:.3e}"),
    )
}

/// Uniform block bounds: `(4/pi^2) cos^2(phi0) <= (S/s) / (delta^2(s^2-1)/12) <= 1`.
pub fn check_global_block_bounds() -> CheckOutcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for &count in &[8usize, 24, 64, 256] {
        let delta = 2.0 * PI / count as f64;
        for s in 2..=count.min(32) {
            let flat_mean = block_mean_equator(s, delta);
            for &phi in &[0.0, 0.3, 0.6, 1.0, 1.4] {
                let mean = block_sum_small_circle(s, lat(phi), delta) / s as f64;
                let lower = 4.0 / (PI * PI) * phi.cos().powi(2) * flat_mean;
                ok &= lower <= mean + 1e-12 && mean <= flat_mean + 1e-12;
                worst = worst.max((lower - mean).max(mean - flat_mean));
                if phi == 0.0 {
                    ok &= (mean - flat_mean).abs() <= 1e-13 * flat_mean;
                }
            }
        }
    }
    CheckOutcome::new(
        "engine/global-block-bounds",
        ok,
        format!("worst bound slack {worst:.3e}"),
    )
}

/// `(S/s - cos^2(phi0) delta^2 (s^2-1)/12) / delta^4` stays bounded as the
/// spacing shrinks geometrically with the block size fixed.
pub fn check_asymptotic_block_sharpness() -> CheckOutcome {
    let mut worst = 0.0f64;
    for &s in &[2usize, 5, 8] {
        for &phi in &[0.3f64, 0.6, 1.0] {
            let c2 = phi.cos().powi(2);
            for k in 0..=12 {
                let delta = 2.0 * PI / 64.0 / (1 << k) as f64;
                let mean = block_sum_small_circle(s, lat(phi), delta) / s as f64;
                let lead = c2 * block_mean_equator(s, delta);
                worst = worst.max(((mean - lead) / delta.powi(4)).abs());
            }
        }
    }
    CheckOutcome::new(
        "engine/asymptotic-sharpness",
        worst <= 10.0,
        format!("max quartic ratio {worst:.3}"),
    )
}

fn canonical_multiset(count: usize, codes: usize) -> Vec<usize> {
    let m = count / codes;
    let r = count - codes * m;
    let mut v = vec![m; codes - r];
    v.extend(std::iter::repeat_n(m + 1, r));
    v
}

/// Exhaustive composition enumeration: among all ways to split `N` cyclic
/// points into `n` positive block sizes, the minimal total distortion is
/// attained exactly by the multisets with sizes in `{m, m+1}` and `r` larger
/// blocks. Comparison is exact: totals are proportional to `sum s^3 - N`.
pub fn check_smoothing_compositions(max_points: usize, max_codes: usize) -> CheckOutcome {
    fn visit(
        remaining: usize,
        parts_left: usize,
        sizes: &mut Vec<usize>,
        best: &mut u64,
        arg: &mut Vec<Vec<usize>>,
    ) {
        if parts_left == 1 {
            sizes.push(remaining);
            let key: u64 = sizes.iter().map(|&s| (s * s * s) as u64).sum();
            if key < *best {
                *best = key;
                arg.clear();
            }
            if key == *best {
                let mut m = sizes.clone();
                m.sort_unstable();
                if !arg.contains(&m) {
                    arg.push(m);
                }
            }
            sizes.pop();
            return;
        }
        for s in 1..=(remaining - (parts_left - 1)) {
            sizes.push(s);
            visit(remaining - s, parts_left - 1, sizes, best, arg);
            sizes.pop();
        }
    }

    let mut ok = true;
    let mut instances = 0usize;
    for count in 1..=max_points {
        for codes in 1..=max_codes.min(count) {
            let mut best = u64::MAX;
            let mut arg = Vec::new();
            visit(count, codes, &mut Vec::new(), &mut best, &mut arg);
            let canonical = canonical_multiset(count, codes);
            ok &= arg.len() == 1 && arg[0] == canonical;
            instances += 1;
        }
    }
    CheckOutcome::new(
        "engine/smoothing-compositions",
        ok,
        format!("{instances} instances, minimal multiset always {{m, m+1}} with r larger blocks"),
    )
}

/// DP optimum equals the model closed form on every instance of the sweep.
pub fn check_dp_agreement(max_points: usize, max_codes: usize, phis: &[f64]) -> CheckOutcome {
    let cases: Vec<(usize, f64)> = (1..=max_points)
        .flat_map(|n| phis.iter().map(move |&p| (n, p)))
        .collect();
    let results: Vec<(f64, usize)> = cases
        .par_iter()
        .map(|&(count, phi)| {
            let solver =
                DpSolver::new(&GridSpec::new(count).expect("grid").longitudes(), lat(phi))
                    .expect("solver");
            let mut worst = 0.0f64;
            let mut instances = 0usize;
            for codes in 1..=max_codes.min(count) {
                let dp = solver.solve(codes).expect("dp").error;
                let want = quantize_one_circle(count, codes, lat(phi))
                    .expect("model")
                    .error;
                let dev = if want > 0.0 {
                    (dp - want).abs() / want
                } else {
                    dp.abs() / 1e-12
                };
                worst = worst.max(dev);
                instances += 1;
            }
            (worst, instances)
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(0.0f64, f64::max);
    let instances: usize = results.iter().map(|r| r.1).sum();
    CheckOutcome::new(
        "oracle/dp-agreement",
        worst <= 1e-9,
        format!("{instances} instances, max relative deviation {worst:.3e}"),
    )
}

/// The DP's optimal block-size multiset is exactly `{m x (n-r), (m+1) x r}`.
pub fn check_dp_block_multisets(max_points: usize, max_codes: usize) -> CheckOutcome {
    let cases: Vec<usize> = (1..=max_points).collect();
    let ok = cases
        .par_iter()
        .map(|&count| {
            let mut good = true;
            for &phi in &[0.0, 0.6] {
                let solver =
                    DpSolver::new(&GridSpec::new(count).expect("grid").longitudes(), lat(phi))
                        .expect("solver");
                for codes in 1..=max_codes.min(count) {
                    let run = solver.solve(codes).expect("dp");
                    let sizes = run.layout.expect("dp layout").size_multiset();
                    good &= sizes == canonical_multiset(count, codes);
                }
            }
            good
        })
        .reduce(|| true, |a, b| a && b);
    CheckOutcome::new(
        "oracle/dp-block-multisets",
        ok,
        "optimal DP block sizes always {m, m+1} with r larger blocks".into(),
    )
}

/// The exhaustive set-partition optimum is contiguous and matches the DP.
pub fn check_exhaustive_contiguity(
    max_points: usize,
    max_codes: usize,
    phis: &[f64],
) -> CheckOutcome {
    let cases: Vec<(usize, f64)> = (1..=max_points)
        .flat_map(|n| phis.iter().map(move |&p| (n, p)))
        .collect();
    let results: Vec<(bool, f64, usize)> = cases
        .par_iter()
        .map(|&(count, phi)| {
            let points = GridSpec::new(count).expect("grid").longitudes();
            let solver = DpSolver::new(&points, lat(phi)).expect("solver");
            let mut ok = true;
            let mut worst = 0.0f64;
            let mut instances = 0usize;
            for codes in 1..=max_codes.min(count) {
                let ex = exhaustive_optimal(&points, lat(phi), codes).expect("exhaustive");
                let dp = solver.solve(codes).expect("dp");
                ok &= ex.all_optima_contiguous == Some(true);
                let dev = if dp.error > 0.0 {
                    (ex.error - dp.error).abs() / dp.error
                } else {
                    ex.error.abs() / 1e-12
                };
                worst = worst.max(dev);
                instances += 1;
            }
            (ok, worst, instances)
        })
        .collect();
    let ok = results.iter().all(|r| r.0);
    let worst = results.iter().map(|r| r.1).fold(0.0f64, f64::max);
    let instances: usize = results.iter().map(|r| r.2).sum();
    CheckOutcome::new(
        "oracle/exhaustive-contiguity",
        ok && worst <= 1e-9,
        format!("{instances} instances, all optima contiguous, max deviation {worst:.3e}"),
    )
}

/// Lloyd started at the analytic midpoints converges in one iteration to the
/// closed-form error.
pub fn check_lloyd_fixed_point() -> CheckOutcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for &(count, codes, phi) in &[(12usize, 4usize, 0.0), (12, 5, 0.6), (24, 6, 1.0)] {
        let rep = quantize_one_circle(count, codes, lat(phi)).expect("model");
        let run = lloyd_iterate(
            &GridSpec::new(count).expect("grid").longitudes(),
            lat(phi),
            &rep.codebook.longitudes(),
            50,
            1e-12,
        )
        .expect("lloyd");
        ok &= run.iterations == 1;
        worst = worst.max((run.error - rep.error).abs());
    }
    CheckOutcome::new(
        "oracle/lloyd-fixed-point",
        ok && worst <= 1e-12,
        format!("one iteration, max error deviation {worst:.3e}"),
    )
}

/// Multi-start Lloyd reaches the DP optimum.
pub fn check_lloyd_multistart() -> CheckOutcome {
    let points = GridSpec::new(12).expect("grid").longitudes();
    let dp = DpSolver::new(&points, Latitude::EQUATOR)
        .expect("solver")
        .solve(5)
        .expect("dp");
    let best =
        lloyd_multistart(&points, Latitude::EQUATOR, 5, 50, 7, 200, 1e-13).expect("lloyd");
    let dev = (best.error - dp.error).abs();
    CheckOutcome::new(
        "oracle/lloyd-multistart",
        dev <= 1e-6,
        format!("best of 50 restarts within {dev:.3e} of the DP optimum"),
    )
}

/// The cross-circle distance strictly exceeds the same-circle distance at
/// every interior grid sample; at a half turn the gap equals `2 phi0`.
pub fn check_cross_circle_positivity(grid: usize) -> CheckOutcome {
    let mut min_gap = f64::INFINITY;
    for i in 1..grid {
        let phi = lat(0.5 * PI * i as f64 / grid as f64);
        for j in 1..grid {
            let dt = off(-PI + 2.0 * PI * j as f64 / grid as f64);
            min_gap = min_gap.min(cross_circle_gap(phi, dt));
        }
    }
    let mut half_turn_ok = true;
    for &phi in &[0.3, 0.6, 1.0] {
        let g = cross_circle_gap(lat(phi), off(PI));
        half_turn_ok &= (g - 2.0 * phi).abs() <= 1e-12;
    }
    CheckOutcome::new(
        "models/cross-circle-positivity",
        min_gap > 0.0 && half_turn_ok,
        format!("min gap {min_gap:.3e} on {grid}x{grid} grid; half-turn gap is 2*phi0"),
    )
}

/// Perturbation stability: seeded jitter below a quarter spacing never
/// changes the optimal block-size multiset.
pub fn check_stability(cases: &[(usize, usize)], trials: u64) -> CheckOutcome {
    let mut ok = true;
    let mut details = Vec::new();
    for &(count, codes) in cases {
        let grid = GridSpec::new(count).expect("grid");
        let eps = grid.spacing() / 10.0;
        let rep = perturbation_check(&grid, codes, Latitude::EQUATOR, eps, trials, 1000)
            .expect("perturbation");
        ok &= rep.multiset_violations == 0;
        details.push(format!(
            "N={count} n={codes}: {} violations, empirical C {:.3}",
            rep.multiset_violations, rep.empirical_c
        ));
    }
    CheckOutcome::new("oracle/stability", ok, details.join("; "))
}

/// More codes never hurt.
pub fn check_monotone_in_codes() -> CheckOutcome {
    let mut ok = true;
    for &count in &[11usize, 14, 16] {
        for &phi in &[0.0, 0.6] {
            let mut prev = f64::INFINITY;
            for codes in 1..=count {
                let v = quantize_one_circle(count, codes, lat(phi))
                    .expect("model")
                    .error;
                ok &= v <= prev + 1e-15;
                prev = v;
            }
        }
    }
    CheckOutcome::new(
        "models/monotone-in-codes",
        ok,
        "error non-increasing in the codebook size".into(),
    )
}

/// In the divisible case the block mix collapses to
/// `pi^2/3 (1/n^2 - 1/N^2)` on the equator and `(n/N) S(m)` on a small
/// circle.
pub fn check_divisible_consistency() -> CheckOutcome {
    let mut worst = 0.0f64;
    for &(count, codes) in &[(12usize, 4usize), (120, 6), (48, 8), (64, 1)] {
        let got = quantize_equator(count, codes).expect("model").error;
        let (nn, cc) = (count as f64, codes as f64);
        let want = PI * PI / 3.0 * (1.0 / (cc * cc) - 1.0 / (nn * nn));
        if want > 0.0 {
            worst = worst.max((got - want).abs() / want);
        }
        let phi = lat(0.6);
        let got = quantize_one_circle(count, codes, phi).expect("model").error;
        let m = count / codes;
        let want =
            codes as f64 / count as f64 * block_sum_small_circle(m, phi, 2.0 * PI / count as f64);
        worst = worst.max((got - want).abs() / want.max(1e-300));
    }
    CheckOutcome::new(
        "models/divisible-consistency",
        worst <= 1e-14,
        format!("max relative deviation {worst:.3e}"),
    )
}

/// Rotating the grid base rotates the codebook and leaves the error
/// unchanged.
pub fn check_rotation_invariance() -> CheckOutcome {
    let base = 0.37;
    let layout = build_layout(12, 5).expect("layout");
    let kernel = BlockKernel::for_latitude(lat(0.6));
    let g0 = GridSpec::new(12).expect("grid");
    let g1 = GridSpec::with_base(12, base).expect("grid");
    let e0: f64 = evaluate_layout(&g0, &layout, &kernel)
        .expect("eval")
        .iter()
        .map(|b| b.total())
        .sum();
    let e1: f64 = evaluate_layout(&g1, &layout, &kernel)
        .expect("eval")
        .iter()
        .map(|b| b.total())
        .sum();
    let value_ok = (e0 - e1).abs() <= 1e-13 * e0;
    let m0 = layout_midpoints(&g0, &layout);
    let m1 = layout_midpoints(&g1, &layout);
    let equivariant = m0
        .iter()
        .zip(&m1)
        .all(|(&a, &b)| {
            let d = (b - a - base).abs();
            d.min((d - 2.0 * PI).abs()) <= 1e-12
        });
    CheckOutcome::new(
        "models/rotation-invariance",
        value_ok && equivariant,
        format!("error shift {:.3e}, codebook equivariant: {equivariant}", (e0 - e1).abs()),
    )
}

/// Any cyclic placement of the larger blocks yields the same error.
pub fn check_placement_invariance() -> CheckOutcome {
    let grid = GridSpec::new(12).expect("grid");
    let layout = build_layout(12, 5).expect("layout");
    let kernel = BlockKernel::for_latitude(lat(0.6));
    let reference: f64 = evaluate_layout(&grid, &layout, &kernel)
        .expect("eval")
        .iter()
        .map(|b| b.total())
        .sum();
    let mut worst = 0.0f64;
    for by in 1..layout.sizes.len() {
        let rotated = layout.rotated_sizes(by);
        let total: f64 = evaluate_layout(&grid, &rotated, &kernel)
            .expect("eval")
            .iter()
            .map(|b| b.total())
            .sum();
        worst = worst.max((total - reference).abs() / reference);
    }
    CheckOutcome::new(
        "models/placement-invariance",
        worst <= 1e-13,
        format!("max relative deviation {worst:.3e} across cyclic placements"),
    )
}

/// Two-circle codebooks pair each upper entry with a lower entry half a turn
/// away.
pub fn check_antipodal_pairing() -> CheckOutcome {
    let mut ok = true;
    for &(m, n) in &[(24usize, 6usize), (120, 8), (10, 4), (24, 10)] {
        let rep = quantize_two_circles(m, n, lat(0.6)).expect("model");
        ok &= antipodally_paired(&rep.codebook, 1e-12);
    }
    CheckOutcome::new(
        "models/antipodal-pairing",
        ok,
        "upper/lower entries antipodally paired".into(),
    )
}

/// The exact error tracks `cos^2(phi0)` times the flat asymptote in the
/// fine-sampling regime, and the ratio to the equatorial error scales like
/// `cos^2(phi0)`.
pub fn check_table_regime() -> CheckOutcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    let flat = PI * PI / 108.0;
    for &(phi, asym) in &[(0.6f64, 0.0621f64), (1.0, 0.0267)] {
        let exact = quantize_one_circle(120, 6, lat(phi)).expect("model").error;
        let rel = (exact - asym).abs() / asym;
        ok &= rel < 0.02;
        worst = worst.max(rel);
        let col = phi.cos().powi(2) * flat;
        ok &= (col - asym).abs() < 5e-4;
    }
    let flat_exact = quantize_equator(120, 6).expect("model").error;
    for &phi in &[0.3f64, 0.6, 1.0] {
        let exact = quantize_one_circle(120, 6, lat(phi)).expect("model").error;
        let ratio = exact / flat_exact;
        let c2 = phi.cos().powi(2);
        let rel = (ratio - c2).abs() / c2;
        ok &= rel < 0.02;
        worst = worst.max(rel);
    }
    CheckOutcome::new(
        "models/table-regime",
        ok,
        format!("curvature scaling within {:.2}%", worst * 100.0),
    )
}

/// Runs the whole suite at the given budget.
pub fn run_suite(budget: Budget) -> VerifySummary {
    let checks = match budget {
        Budget::Small => vec![
            check_dual_formula(200),
            check_sandwich_bounds(),
            check_monotonic_in_offset(),
            check_monotonic_in_latitude(),
            check_concavity_in_offset(),
            check_kernel_convexity(),
            check_cubic_remainder(),
            check_block_identity(64),
            check_midpoint_optimality(),
            check_equator_reduction(64),
            check_second_difference(),
            check_global_block_bounds(),
            check_asymptotic_block_sharpness(),
            check_smoothing_compositions(12, 4),
            check_dp_agreement(16, 5, &[0.0, 0.6]),
            check_dp_block_multisets(12, 4),
            check_exhaustive_contiguity(7, 3, &[0.0, 0.7]),
            check_lloyd_fixed_point(),
            check_lloyd_multistart(),
            check_cross_circle_positivity(250),
            check_stability(&[(24, 4), (12, 5)], 20),
            check_monotone_in_codes(),
            check_divisible_consistency(),
            check_rotation_invariance(),
            check_placement_invariance(),
            check_antipodal_pairing(),
            check_table_regime(),
        ],
        Budget::Full => vec![
            check_dual_formula(200),
            check_sandwich_bounds(),
            check_monotonic_in_offset(),
            check_monotonic_in_latitude(),
            check_concavity_in_offset(),
            check_kernel_convexity(),
            check_cubic_remainder(),
            check_block_identity(64),
            check_midpoint_optimality(),
            check_equator_reduction(64),
            check_second_difference(),
            check_global_block_bounds(),
            check_asymptotic_block_sharpness(),
            check_smoothing_compositions(20, 6),
            check_dp_agreement(48, 8, &[0.0, 0.3, 0.6, 1.0]),
            check_dp_block_multisets(20, 6),
            check_exhaustive_contiguity(10, 4, &[0.0, 0.7]),
            check_lloyd_fixed_point(),
            check_lloyd_multistart(),
            check_cross_circle_positivity(500),
            check_stability(&[(24, 4), (12, 5)], 100),
            check_monotone_in_codes(),
            check_divisible_consistency(),
            check_rotation_invariance(),
            check_placement_invariance(),
            check_antipodal_pairing(),
            check_table_regime(),
        ],
    };
    let passed = checks.iter().filter(|c| c.passed).count();
    let failed = checks.len() - passed;
    VerifySummary {
        budget: match budget {
            Budget::Small => "small".to_string(),
            Budget::Full => "full".to_string(),
        },
        passed,
        failed,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // The full suite runs in the integration tests and through the CLI;
    // here just the plumbing.

    #[test]
    fn budget_parsing() {
        assert_eq!("small".parse::<Budget>().unwrap(), Budget::Small);
        assert_eq!("full".parse::<Budget>().unwrap(), Budget::Full);
        assert!("medium".parse::<Budget>().is_err());
    }

    #[test]
    fn quick_checks_pass() {
        let c = check_dual_formula(50);
        assert!(c.passed, "{}", c.detail);
        let c = check_smoothing_compositions(8, 3);
        assert!(c.passed, "{}", c.detail);
    }
}
