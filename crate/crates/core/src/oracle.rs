//! Independent brute-force verifiers for the closed-form models.
//!
//! Nothing here consults the model formulas: costs are found by numerical
//! minimization of the squared geodesic kernel, so agreement with the closed
//! forms is a genuine cross-check.
//!
//! - [`dp_optimal`]: the exact optimum over all contiguous cyclic partitions
//!   of the points into `n` arcs, by a linear partition DP run from every cut
//!   position, with segment costs minimized by ternary search where every
//!   candidate offset stays inside the quarter turn on which the squared
//!   offset kernel is convex, and by coarse scans plus local refinement on
//!   wider segments.
//! - [`exhaustive_optimal`]: the global optimum over *all* set partitions
//!   (contiguous or not) of up to 10 points into at most 4 groups, with each
//!   group's representative found by a full-circle grid scan. This is what
//!   certifies that optimal cells are contiguous arcs rather than assuming
//!   it.
//! - [`lloyd_iterate`]: classical alternation between nearest-representative
//!   assignment and per-cell representative updates; monotone by
//!   construction.
//! - [`perturbation_check`]: seeded random jitter of the support longitudes,
//!   re-solved by the DP, to observe stability of the block-size structure.

use crate::engine::{BlockLayout, GridSpec};
use crate::geometry::{wrap_to_2pi, wrap_to_pi, Latitude, LatitudeKernel};
use crate::models::{Codebook, CodebookEntry, CircleTag};
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

/// Longitude resolution of the inner one-dimensional minimizations.
const TERNARY_TOL: f64 = 1e-12;
/// Grid resolution of full-circle representative scans.
const SCAN_POINTS: usize = 4096;
/// Spans below this keep every offset under a quarter turn, where the
/// squared offset kernel is convex and ternary search alone is sound.
const CONVEX_SPAN: f64 = 1.5;
/// Grid resolution of the coarse hull scan used for wider segments.
const HULL_SCAN_POINTS: usize = 128;
/// Instance caps for the exhaustive set-partition search.
const EXHAUSTIVE_MAX_POINTS: usize = 10;
const EXHAUSTIVE_MAX_CODES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMethod {
    Dp,
    Exhaustive,
    Lloyd,
}

/// Outcome of one oracle run.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    /// Mean-square geodesic error, normalized by the point count.
    pub error: f64,
    pub method: OracleMethod,
    pub codebook: Codebook,
    /// Contiguous block structure, when the winning assignment has one.
    /// Indices refer to the cyclically sorted point order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layout: Option<BlockLayout>,
    /// Cell index per input point (input order).
    pub assignment: Vec<usize>,
    /// Assignment/update rounds performed (Lloyd only; 0 otherwise).
    pub iterations: u64,
    /// Empty-cell reseeds performed (Lloyd only).
    pub reseed_events: u64,
    /// For the exhaustive search: whether every partition within tolerance
    /// of the optimum is contiguous.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub all_optima_contiguous: Option<bool>,
}

fn circle_tag(phi0: Latitude) -> CircleTag {
    if phi0.is_equator() {
        CircleTag::Equator
    } else {
        CircleTag::Upper
    }
}

fn validate_points(points: &[f64]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("need at least one point".into()));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument(
            "point longitudes must be finite".into(),
        ));
    }
    Ok(())
}

fn ternary_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    while hi - lo > TERNARY_TOL {
        let third = (hi - lo) / 3.0;
        let m1 = lo + third;
        let m2 = hi - third;
        if f(m1) < f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Full-circle representative search: coarse scan followed by local
/// refinement around the best grid cell. Used where convexity over the
/// candidate span is not guaranteed.
fn scan_min(f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let step = TAU / SCAN_POINTS as f64;
    let mut best_x = 0.0;
    let mut best_v = f64::INFINITY;
    for g in 0..SCAN_POINTS {
        let x = g as f64 * step;
        let v = f(x);
        if v < best_v {
            best_v = v;
            best_x = x;
        }
    }
    ternary_min(f, best_x - step, best_x + step)
}

/// Coarse scan of `[lo, hi]` followed by local refinement, for segment hulls
/// wide enough that some offsets leave the convex region of the kernel.
fn hull_scan_min(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let step = (hi - lo) / (HULL_SCAN_POINTS - 1) as f64;
    let mut best_x = lo;
    let mut best_v = f64::INFINITY;
    for g in 0..HULL_SCAN_POINTS {
        let x = lo + g as f64 * step;
        let v = f(x);
        if v < best_v {
            best_v = v;
            best_x = x;
        }
    }
    ternary_min(f, (best_x - step).max(lo), (best_x + step).min(hi))
}

#[derive(Debug, Clone, Copy)]
struct SegCost {
    cost: f64,
    rep: f64,
}

/// Exact contiguous-partition solver with memoized segment costs, reusable
/// across codebook sizes on the same point set.
pub struct DpSolver {
    sorted: Vec<f64>,
    /// sorted position -> original input index
    perm: Vec<usize>,
    phi0: Latitude,
    seg: Vec<SegCost>,
}

impl DpSolver {
    pub fn new(points: &[f64], phi0: Latitude) -> Result<Self> {
        validate_points(points)?;
        let n = points.len();
        let mut order: Vec<usize> = (0..n).collect();
        let wrapped: Vec<f64> = points.iter().map(|&p| wrap_to_2pi(p)).collect();
        order.sort_by(|&a, &b| wrapped[a].partial_cmp(&wrapped[b]).unwrap());
        let sorted: Vec<f64> = order.iter().map(|&i| wrapped[i]).collect();
        let kernel = LatitudeKernel::new(phi0);

        let mut seg = Vec::with_capacity(n * n);
        for start in 0..n {
            for len in 1..=n {
                seg.push(Self::segment_cost(&sorted, &kernel, start, len));
            }
        }
        Ok(DpSolver {
            sorted,
            perm: order,
            phi0,
            seg,
        })
    }

    pub fn point_count(&self) -> usize {
        self.sorted.len()
    }

    fn seg(&self, start: usize, len: usize) -> &SegCost {
        &self.seg[start * self.sorted.len() + (len - 1)]
    }

    /// Minimal within-segment sum of squared offsets over the representative
    /// longitude, for the `len` consecutive sorted points starting at
    /// `start` (cyclically).
    fn segment_cost(sorted: &[f64], kernel: &LatitudeKernel, start: usize, len: usize) -> SegCost {
        let n = sorted.len();
        let mut longs = Vec::with_capacity(len);
        for j in 0..len {
            let idx = start + j;
            longs.push(if idx < n {
                sorted[idx]
            } else {
                sorted[idx - n] + TAU
            });
        }
        let lo = longs[0];
        let hi = longs[len - 1];
        let span = hi - lo;
        let cost = move |theta: f64| -> f64 {
            longs
                .iter()
                .map(|&l| kernel.sigma_sq(wrap_to_pi(l - theta)))
                .sum()
        };
        // The squared offset kernel is convex only while offsets stay within
        // a quarter turn, so pure ternary search is sound for narrow
        // segments only; wider ones get a coarse scan of the hull (or of the
        // whole circle, once the hull exceeds a half turn) before the local
        // refinement.
        let (rep, c) = if span < CONVEX_SPAN {
            ternary_min(&cost, lo, hi)
        } else if span < PI {
            hull_scan_min(&cost, lo, hi)
        } else {
            scan_min(&cost)
        };
        SegCost {
            cost: c,
            rep: wrap_to_2pi(rep),
        }
    }

    fn linear_dp(&self, cut: usize, codes: usize) -> (f64, Vec<Vec<usize>>) {
        let n = self.sorted.len();
        let inf = f64::INFINITY;
        let mut dp = vec![vec![inf; n + 1]; codes + 1];
        let mut bp = vec![vec![usize::MAX; n + 1]; codes + 1];
        dp[0][0] = 0.0;
        for j in 1..=codes {
            // Segment j of `codes` must leave room for the remaining ones.
            let hi = n - (codes - j);
            for i in j..=hi {
                let mut best = inf;
                let mut arg = usize::MAX;
                for t in (j - 1)..i {
                    let prev = dp[j - 1][t];
                    if prev.is_finite() {
                        let c = prev + self.seg((cut + t) % n, i - t).cost;
                        if c < best {
                            best = c;
                            arg = t;
                        }
                    }
                }
                dp[j][i] = best;
                bp[j][i] = arg;
            }
        }
        (dp[codes][n], bp)
    }

    /// Optimal partition into exactly `codes` contiguous cyclic arcs.
    pub fn solve(&self, codes: usize) -> Result<OracleResult> {
        let n = self.sorted.len();
        if codes == 0 || codes > n {
            return Err(Error::InvalidArgument(format!(
                "codes {codes} must satisfy 1 <= codes <= {n}"
            )));
        }
        let mut best_cut = 0;
        let mut best_val = f64::INFINITY;
        for cut in 0..n {
            let (v, _) = self.linear_dp(cut, codes);
            if v < best_val {
                best_val = v;
                best_cut = cut;
            }
        }
        let (_, bp) = self.linear_dp(best_cut, codes);

        let mut sizes_rev = Vec::with_capacity(codes);
        let mut i = n;
        for j in (1..=codes).rev() {
            let t = bp[j][i];
            sizes_rev.push(i - t);
            i = t;
        }
        let sizes: Vec<usize> = sizes_rev.into_iter().rev().collect();

        let mut entries = Vec::with_capacity(codes);
        let mut assignment_sorted = vec![0usize; n];
        let mut offset = 0usize;
        for (block, &s) in sizes.iter().enumerate() {
            let seg = self.seg((best_cut + offset) % n, s);
            entries.push(CodebookEntry {
                longitude: seg.rep,
                circle: circle_tag(self.phi0),
            });
            for j in 0..s {
                assignment_sorted[(best_cut + offset + j) % n] = block;
            }
            offset += s;
        }
        let mut assignment = vec![0usize; n];
        for (pos, &orig) in self.perm.iter().enumerate() {
            assignment[orig] = assignment_sorted[pos];
        }

        Ok(OracleResult {
            error: best_val / n as f64,
            method: OracleMethod::Dp,
            codebook: Codebook { entries },
            layout: Some(BlockLayout {
                sizes,
                start_index: best_cut,
            }),
            assignment,
            iterations: 0,
            reseed_events: 0,
            all_optima_contiguous: None,
        })
    }
}

/// Exact optimum over all contiguous cyclic partitions of `points` into
/// `codes` arcs. See [`DpSolver`] for reuse across several `codes`.
pub fn dp_optimal(points: &[f64], phi0: Latitude, codes: usize) -> Result<OracleResult> {
    DpSolver::new(points, phi0)?.solve(codes)
}

/// True when the set bits of `mask` form one contiguous run on the cyclic
/// index order `0..n`.
fn mask_contiguous(mask: u32, n: usize) -> bool {
    let mut transitions = 0;
    for i in 0..n {
        let here = mask >> i & 1;
        let next = mask >> ((i + 1) % n) & 1;
        if here == 1 && next == 0 {
            transitions += 1;
        }
    }
    transitions <= 1
}

/// Global optimum over all partitions of the points into at most `codes`
/// nonempty groups, contiguous or not.
///
/// Each group's representative is located by a 4096-point scan of the full
/// circle followed by ternary refinement; noncontiguous groups can have
/// optima outside their hull, so the scan never restricts to it. Budgeted to
/// 10 points and 4 groups.
pub fn exhaustive_optimal(points: &[f64], phi0: Latitude, codes: usize) -> Result<OracleResult> {
    validate_points(points)?;
    let n = points.len();
    if codes == 0 || codes > n {
        return Err(Error::InvalidArgument(format!(
            "codes {codes} must satisfy 1 <= codes <= {n}"
        )));
    }
    if n > EXHAUSTIVE_MAX_POINTS || codes > EXHAUSTIVE_MAX_CODES {
        return Err(Error::BudgetExceeded(format!(
            "exhaustive search is limited to {EXHAUSTIVE_MAX_POINTS} points and {EXHAUSTIVE_MAX_CODES} groups, got {n} and {codes}"
        )));
    }

    let wrapped: Vec<f64> = points.iter().map(|&p| wrap_to_2pi(p)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| wrapped[a].partial_cmp(&wrapped[b]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&i| wrapped[i]).collect();
    let kernel = LatitudeKernel::new(phi0);

    // Precomputed squared offsets point-by-grid for the coarse scans.
    let step = TAU / SCAN_POINTS as f64;
    let mut table = vec![0.0f64; n * SCAN_POINTS];
    for p in 0..n {
        for g in 0..SCAN_POINTS {
            table[p * SCAN_POINTS + g] = kernel.sigma_sq(wrap_to_pi(sorted[p] - g as f64 * step));
        }
    }

    let masks = 1usize << n;
    let mut group_cost = vec![0.0f64; masks];
    let mut group_rep = vec![0.0f64; masks];
    for mask in 1..masks {
        let members: Vec<usize> = (0..n).filter(|&p| mask >> p & 1 == 1).collect();
        let mut best_g = 0usize;
        let mut best_v = f64::INFINITY;
        for g in 0..SCAN_POINTS {
            let mut v = 0.0;
            for &p in &members {
                v += table[p * SCAN_POINTS + g];
            }
            if v < best_v {
                best_v = v;
                best_g = g;
            }
        }
        let cost = |theta: f64| -> f64 {
            members
                .iter()
                .map(|&p| kernel.sigma_sq(wrap_to_pi(sorted[p] - theta)))
                .sum()
        };
        let center = best_g as f64 * step;
        let (rep, c) = ternary_min(&cost, center - step, center + step);
        group_cost[mask] = c;
        group_rep[mask] = wrap_to_2pi(rep);
    }

    // Enumerate set partitions (restricted growth strings) with at most
    // `codes` labels, tracking the group masks incrementally.
    struct Enum<'a, F: FnMut(&[u32])> {
        n: usize,
        codes: usize,
        visit: &'a mut F,
    }
    impl<'a, F: FnMut(&[u32])> Enum<'a, F> {
        fn go(&mut self, point: usize, groups: &mut Vec<u32>) {
            if point == self.n {
                (self.visit)(groups);
                return;
            }
            for g in 0..groups.len() {
                groups[g] |= 1 << point;
                self.go(point + 1, groups);
                groups[g] &= !(1 << point);
            }
            if groups.len() < self.codes {
                groups.push(1 << point);
                self.go(point + 1, groups);
                groups.pop();
            }
        }
    }

    let mut best_cost = f64::INFINITY;
    let mut best_groups: Vec<u32> = Vec::new();
    {
        let mut visit = |groups: &[u32]| {
            let total: f64 = groups.iter().map(|&g| group_cost[g as usize]).sum();
            if total < best_cost {
                best_cost = total;
                best_groups = groups.to_vec();
            }
        };
        let mut e = Enum {
            n,
            codes,
            visit: &mut visit,
        };
        e.go(0, &mut Vec::new());
    }

    // Second pass: every partition whose cost ties the optimum (within a
    // tight tolerance) must itself be contiguous.
    let tie_tol = 1e-12 + 1e-9 * best_cost;
    let mut all_contiguous = true;
    {
        let mut visit = |groups: &[u32]| {
            let total: f64 = groups.iter().map(|&g| group_cost[g as usize]).sum();
            if total <= best_cost + tie_tol && !groups.iter().all(|&g| mask_contiguous(g, n)) {
                all_contiguous = false;
            }
        };
        let mut e = Enum {
            n,
            codes,
            visit: &mut visit,
        };
        e.go(0, &mut Vec::new());
    }

    let mut assignment_sorted = vec![0usize; n];
    for (g, &mask) in best_groups.iter().enumerate() {
        for p in 0..n {
            if mask >> p & 1 == 1 {
                assignment_sorted[p] = g;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for (pos, &orig) in order.iter().enumerate() {
        assignment[orig] = assignment_sorted[pos];
    }
    let entries = best_groups
        .iter()
        .map(|&mask| CodebookEntry {
            longitude: group_rep[mask as usize],
            circle: circle_tag(phi0),
        })
        .collect();

    Ok(OracleResult {
        error: best_cost / n as f64,
        method: OracleMethod::Exhaustive,
        codebook: Codebook { entries },
        layout: derive_layout(&assignment_sorted),
        assignment,
        iterations: 0,
        reseed_events: 0,
        all_optima_contiguous: Some(all_contiguous),
    })
}

/// Recovers a cyclic block layout from a per-sorted-position assignment, if
/// every cell is a contiguous cyclic run.
fn derive_layout(assignment_sorted: &[usize]) -> Option<BlockLayout> {
    let n = assignment_sorted.len();
    if n == 0 {
        return None;
    }
    // A boundary is a position whose predecessor lies in another cell.
    let start = (0..n)
        .find(|&i| assignment_sorted[(i + n - 1) % n] != assignment_sorted[i])
        .unwrap_or(0);
    let mut sizes = Vec::new();
    let mut seen = Vec::new();
    let mut i = 0;
    while i < n {
        let cell = assignment_sorted[(start + i) % n];
        if seen.contains(&cell) {
            return None; // cell appears in two separate runs
        }
        let mut len = 0;
        while i < n && assignment_sorted[(start + i) % n] == cell {
            len += 1;
            i += 1;
        }
        seen.push(cell);
        sizes.push(len);
    }
    Some(BlockLayout {
        sizes,
        start_index: start,
    })
}

/// One Lloyd run from a given initial codebook.
///
/// Alternates nearest-representative assignment (ties to the lower index)
/// with per-cell representative updates; a cell update only ever replaces a
/// representative with a strictly cheaper one, so the error sequence is
/// non-increasing. A cell that loses all its points is reseeded at the
/// midpoint of the largest cell and the event counted.
pub fn lloyd_iterate(
    points: &[f64],
    phi0: Latitude,
    initial: &[f64],
    max_iter: u64,
    tol: f64,
) -> Result<OracleResult> {
    validate_points(points)?;
    validate_points(initial)?;
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::InvalidArgument("tolerance must be >= 0".into()));
    }
    let n = points.len();
    let kernel = LatitudeKernel::new(phi0);
    let mut reps: Vec<f64> = initial.iter().map(|&r| wrap_to_2pi(r)).collect();
    for i in 0..reps.len() {
        for j in (i + 1)..reps.len() {
            if reps[i] == reps[j] {
                return Err(Error::InvalidArgument(
                    "initial representatives must be distinct".into(),
                ));
            }
        }
    }
    let wrapped: Vec<f64> = points.iter().map(|&p| wrap_to_2pi(p)).collect();

    let assign = |reps: &[f64], assignment: &mut [usize]| -> f64 {
        let mut total = 0.0;
        for (i, &p) in wrapped.iter().enumerate() {
            let mut best = f64::INFINITY;
            let mut arg = 0usize;
            for (j, &q) in reps.iter().enumerate() {
                let d = kernel.sigma_sq(wrap_to_pi(p - q));
                if d < best {
                    best = d;
                    arg = j;
                }
            }
            assignment[i] = arg;
            total += best;
        }
        total / n as f64
    };

    let cell_points = |assignment: &[usize], j: usize| -> Vec<f64> {
        wrapped
            .iter()
            .zip(assignment)
            .filter(|&(_, &a)| a == j)
            .map(|(&p, _)| p)
            .collect()
    };

    let mut assignment = vec![0usize; n];
    let mut err_prev = assign(&reps, &mut assignment);
    let mut iterations = 0u64;
    let mut reseeds = 0u64;

    while iterations < max_iter {
        iterations += 1;

        // Reseed representatives that serve no points.
        let mut counts = vec![0usize; reps.len()];
        for &a in &assignment {
            counts[a] += 1;
        }
        let largest = counts
            .iter()
            .enumerate()
            .max_by_key(|&(_, &c)| c)
            .map(|(j, _)| j)
            .unwrap();
        for j in 0..reps.len() {
            if counts[j] == 0 {
                let cell = cell_points(&assignment, largest);
                reps[j] = wrap_to_2pi(cell_midpoint(&cell, reps[largest]));
                reseeds += 1;
            }
        }

        // Update step: per-cell minimization, keeping the old representative
        // unless the search strictly improves on it.
        for j in 0..reps.len() {
            if counts[j] == 0 {
                continue;
            }
            let cell = cell_points(&assignment, j);
            let old_cost: f64 = cell
                .iter()
                .map(|&p| kernel.sigma_sq(wrap_to_pi(p - reps[j])))
                .sum();
            let (cand, cand_cost) = optimize_cell(&cell, &kernel, reps[j]);
            if cand_cost < old_cost {
                reps[j] = wrap_to_2pi(cand);
            }
        }

        let err = assign(&reps, &mut assignment);
        assert!(
            err <= err_prev * (1.0 + 1e-12) + 1e-15,
            "lloyd error increased: {err_prev} -> {err}"
        );
        let improved = err_prev - err;
        err_prev = err;
        if improved < tol {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| wrapped[a].partial_cmp(&wrapped[b]).unwrap());
    let assignment_sorted: Vec<usize> = order.iter().map(|&i| assignment[i]).collect();

    let entries = reps
        .iter()
        .map(|&longitude| CodebookEntry {
            longitude,
            circle: circle_tag(phi0),
        })
        .collect();
    Ok(OracleResult {
        error: err_prev,
        method: OracleMethod::Lloyd,
        codebook: Codebook { entries },
        layout: derive_layout(&assignment_sorted),
        assignment,
        iterations,
        reseed_events: reseeds,
        all_optima_contiguous: None,
    })
}

/// Angular midpoint of a cell, lifted around a reference longitude so the
/// span is measured without wraparound artifacts.
fn cell_midpoint(cell: &[f64], around: f64) -> f64 {
    let lifted: Vec<f64> = cell.iter().map(|&p| around + wrap_to_pi(p - around)).collect();
    let lo = lifted.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = lifted.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    0.5 * (lo + hi)
}

fn optimize_cell(cell: &[f64], kernel: &LatitudeKernel, around: f64) -> (f64, f64) {
    let lifted: Vec<f64> = cell.iter().map(|&p| around + wrap_to_pi(p - around)).collect();
    let lo = lifted.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = lifted.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cost = |theta: f64| -> f64 {
        lifted
            .iter()
            .map(|&l| kernel.sigma_sq(wrap_to_pi(l - theta)))
            .sum()
    };
    if hi - lo < CONVEX_SPAN {
        ternary_min(&cost, lo, hi)
    } else if hi - lo < PI {
        hull_scan_min(&cost, lo, hi)
    } else {
        scan_min(&cost)
    }
}

/// Best of `restarts` Lloyd runs from seeded random initial codebooks.
pub fn lloyd_multistart(
    points: &[f64],
    phi0: Latitude,
    codes: usize,
    restarts: u64,
    seed: u64,
    max_iter: u64,
    tol: f64,
) -> Result<OracleResult> {
    if codes == 0 {
        return Err(Error::InvalidArgument("need at least one code".into()));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("need at least one restart".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<OracleResult> = None;
    for _ in 0..restarts {
        let initial = loop {
            let cand: Vec<f64> = (0..codes).map(|_| rng.random_range(0.0..TAU)).collect();
            let mut distinct = true;
            for i in 0..codes {
                for j in (i + 1)..codes {
                    if (cand[i] - cand[j]).abs() < 1e-9 {
                        distinct = false;
                    }
                }
            }
            if distinct {
                break cand;
            }
        };
        let run = lloyd_iterate(points, phi0, &initial, max_iter, tol)?;
        if best.as_ref().is_none_or(|b| run.error < b.error) {
            best = Some(run);
        }
    }
    Ok(best.unwrap())
}

/// A set of circle longitudes in strictly increasing cyclic order.
#[derive(Debug, Clone)]
pub struct PerturbedGrid {
    longitudes: Vec<f64>,
}

impl PerturbedGrid {
    pub fn new(longitudes: Vec<f64>) -> Result<Self> {
        if longitudes.is_empty() {
            return Err(Error::InvalidArgument("need at least one point".into()));
        }
        if longitudes.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidArgument("longitudes must be finite".into()));
        }
        let wrapped: Vec<f64> = longitudes.iter().map(|&l| wrap_to_2pi(l)).collect();
        let n = wrapped.len();
        let descents = (0..n)
            .filter(|&i| n > 1 && wrapped[(i + 1) % n] <= wrapped[i])
            .count();
        if n > 1 && descents != 1 {
            return Err(Error::InvalidArgument(
                "longitudes must be strictly increasing in cyclic order".into(),
            ));
        }
        Ok(PerturbedGrid { longitudes: wrapped })
    }

    pub fn longitudes(&self) -> &[f64] {
        &self.longitudes
    }
}

/// Outcome of a seeded perturbation-stability sweep.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbationReport {
    pub trials: u64,
    pub epsilon: f64,
    pub seed: u64,
    /// Generator used for the jitter draws.
    pub rng: String,
    pub baseline_error: f64,
    /// Sorted block-size multiset of the unperturbed optimum.
    pub baseline_sizes: Vec<usize>,
    /// Trials whose optimal block-size multiset differed from the baseline.
    pub multiset_violations: u64,
    pub max_error_delta: f64,
    /// Max observed |error delta| / epsilon (0 when epsilon is 0).
    pub empirical_c: f64,
}

/// Jitters every grid longitude by an independent uniform draw in
/// `[-epsilon, epsilon]` and re-solves by the DP, `trials` times,
/// deterministically from `seed`.
///
/// `epsilon` must stay below a quarter spacing so the circular order is
/// preserved. Violations of the block-size structure are counted, not
/// thrown.
pub fn perturbation_check(
    grid: &GridSpec,
    codes: usize,
    phi0: Latitude,
    epsilon: f64,
    trials: u64,
    seed: u64,
) -> Result<PerturbationReport> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::InvalidArgument("epsilon must be >= 0".into()));
    }
    if epsilon >= grid.spacing() / 4.0 {
        return Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} too large: must stay below spacing/4 = {}",
            grid.spacing() / 4.0
        )));
    }
    let base_points = grid.longitudes();
    let baseline = dp_optimal(&base_points, phi0, codes)?;
    let baseline_sizes = baseline.layout.as_ref().unwrap().size_multiset();

    // The jitter sequence is drawn up front, sequentially from the seed, so
    // the report is deterministic; the independent DP solves then run in
    // parallel.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitters: Vec<Vec<f64>> = (0..trials)
        .map(|_| {
            base_points
                .iter()
                .map(|&p| {
                    let u = if epsilon == 0.0 {
                        0.0
                    } else {
                        rng.random_range(-epsilon..=epsilon)
                    };
                    p + u
                })
                .collect()
        })
        .collect();
    let outcomes: Vec<crate::Result<(Vec<usize>, f64)>> = jitters
        .into_par_iter()
        .map(|jittered| {
            let pg = PerturbedGrid::new(jittered)?;
            let run = dp_optimal(pg.longitudes(), phi0, codes)?;
            Ok((
                run.layout.as_ref().unwrap().size_multiset(),
                (run.error - baseline.error).abs(),
            ))
        })
        .collect();
    let mut violations = 0u64;
    let mut max_delta = 0.0f64;
    for outcome in outcomes {
        let (sizes, delta) = outcome?;
        if sizes != baseline_sizes {
            violations += 1;
        }
        max_delta = max_delta.max(delta);
    }
    Ok(PerturbationReport {
        trials,
        epsilon,
        seed,
        rng: "chacha8".into(),
        baseline_error: baseline.error,
        baseline_sizes,
        multiset_violations: violations,
        max_error_delta: max_delta,
        empirical_c: if epsilon > 0.0 { max_delta / epsilon } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{quantize_equator, quantize_one_circle};
    use std::f64::consts::PI;

    fn lat(v: f64) -> Latitude {
        Latitude::new(v).unwrap()
    }

    fn uniform(n: usize) -> Vec<f64> {
        GridSpec::new(n).unwrap().longitudes()
    }

    #[test]
    fn dp_matches_equator_closed_form() {
        let run = dp_optimal(&uniform(12), Latitude::EQUATOR, 5).unwrap();
        let want = quantize_equator(12, 5).unwrap().error;
        assert!((run.error - want).abs() <= 1e-12 * want);
        assert_eq!(
            run.layout.as_ref().unwrap().size_multiset(),
            vec![2, 2, 2, 3, 3]
        );
    }

    #[test]
    fn dp_trivial_cases() {
        let run = dp_optimal(&uniform(7), lat(0.4), 7).unwrap();
        assert_eq!(run.error, 0.0);
        assert!(dp_optimal(&uniform(7), lat(0.4), 8).is_err());
        assert!(dp_optimal(&uniform(7), lat(0.4), 0).is_err());
    }

    #[test]
    fn dp_matches_small_circle_closed_form() {
        let run = dp_optimal(&uniform(24), lat(0.5), 3).unwrap();
        let want = quantize_one_circle(24, 3, lat(0.5)).unwrap().error;
        assert!((run.error - want).abs() <= 1e-9 * want);
    }

    #[test]
    fn dp_single_code_spans_circle() {
        // The n = 1 segment spans more than a half turn, exercising the
        // full-circle scan fallback.
        let run = dp_optimal(&uniform(10), Latitude::EQUATOR, 1).unwrap();
        let want = PI * PI / 3.0 * (1.0 - 0.01);
        assert!((run.error - want).abs() < 1e-7, "{} vs {want}", run.error);
    }

    #[test]
    fn dp_input_order_is_irrelevant() {
        let mut pts = uniform(9);
        pts.swap(0, 5);
        pts.swap(2, 7);
        let a = dp_optimal(&pts, lat(0.8), 3).unwrap();
        let b = dp_optimal(&uniform(9), lat(0.8), 3).unwrap();
        assert_eq!(a.error.to_bits(), b.error.to_bits());
    }

    #[test]
    fn exhaustive_agrees_with_dp_and_is_contiguous() {
        for &(n, k, phi) in &[(8usize, 3usize, 0.0), (6, 2, 0.7), (7, 4, 0.3)] {
            let pts = uniform(n);
            let ex = exhaustive_optimal(&pts, lat(phi), k).unwrap();
            let dp = dp_optimal(&pts, lat(phi), k).unwrap();
            assert!(
                (ex.error - dp.error).abs() <= 1e-9 * dp.error.max(1e-12),
                "n={n} k={k} phi={phi}: {} vs {}",
                ex.error,
                dp.error
            );
            assert_eq!(ex.all_optima_contiguous, Some(true));
            assert!(ex.layout.is_some());
        }
    }

    #[test]
    fn exhaustive_trivial_and_budget() {
        // Singleton groups: the scanned representative lands on each point
        // to search tolerance, so the error is zero up to its square.
        let run = exhaustive_optimal(&uniform(4), lat(0.2), 4).unwrap();
        assert!(run.error <= 1e-20);
        assert!(matches!(
            exhaustive_optimal(&uniform(11), lat(0.2), 2),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(matches!(
            exhaustive_optimal(&uniform(8), lat(0.2), 5),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn lloyd_fixed_point_at_analytic_midpoints() {
        let rep = quantize_equator(12, 4).unwrap();
        let run = lloyd_iterate(
            &uniform(12),
            Latitude::EQUATOR,
            &rep.codebook.longitudes(),
            50,
            1e-12,
        )
        .unwrap();
        assert_eq!(run.iterations, 1);
        assert!((run.error - rep.error).abs() < 1e-12);
    }

    #[test]
    fn lloyd_single_code_converges_to_midpoint_value() {
        let n = 16;
        let run = lloyd_iterate(&uniform(n), Latitude::EQUATOR, &[1.234], 100, 1e-14).unwrap();
        let want = PI * PI / 3.0 * (1.0 - 1.0 / (n * n) as f64);
        assert!((run.error - want).abs() < 1e-9);
    }

    #[test]
    fn lloyd_multistart_reaches_dp_optimum() {
        let pts = uniform(12);
        let dp = dp_optimal(&pts, Latitude::EQUATOR, 5).unwrap();
        let best = lloyd_multistart(&pts, Latitude::EQUATOR, 5, 50, 7, 200, 1e-13).unwrap();
        assert!(
            (best.error - dp.error).abs() <= 1e-6,
            "{} vs {}",
            best.error,
            dp.error
        );
    }

    #[test]
    fn lloyd_reseeds_empty_cells() {
        // Three representatives crowded into a tiny arc: the middle one
        // captures no points and must be reseeded.
        let run = lloyd_iterate(
            &uniform(6),
            Latitude::EQUATOR,
            &[0.001, 0.002, 0.003],
            100,
            1e-13,
        )
        .unwrap();
        assert!(run.reseed_events >= 1);
        assert!(run.error.is_finite());
    }

    #[test]
    fn lloyd_breaks_ties_toward_lower_index() {
        // The point at pi/2 is exactly equidistant from representatives at 0
        // and pi.
        let run = lloyd_iterate(&[PI / 2.0], Latitude::EQUATOR, &[0.0, PI], 1, 1e-12).unwrap();
        assert_eq!(run.assignment, vec![0]);
    }

    #[test]
    fn perturbed_grid_validates_cyclic_order() {
        assert!(PerturbedGrid::new(vec![0.1, 1.0, 2.0, 5.0]).is_ok());
        assert!(PerturbedGrid::new(vec![5.0, 0.1, 1.0, 2.0]).is_ok());
        assert!(PerturbedGrid::new(vec![0.1, 2.0, 1.0, 5.0]).is_err());
        assert!(PerturbedGrid::new(vec![]).is_err());
    }

    #[test]
    fn perturbation_zero_epsilon_is_identity() {
        let grid = GridSpec::new(12).unwrap();
        let rep = perturbation_check(&grid, 5, Latitude::EQUATOR, 0.0, 3, 42).unwrap();
        assert_eq!(rep.multiset_violations, 0);
        assert_eq!(rep.max_error_delta, 0.0);
        assert_eq!(rep.baseline_sizes, vec![2, 2, 2, 3, 3]);
    }

    #[test]
    fn perturbation_small_epsilon_keeps_structure() {
        let grid = GridSpec::new(12).unwrap();
        let eps = grid.spacing() / 10.0;
        let rep = perturbation_check(&grid, 5, lat(0.6), eps, 10, 1).unwrap();
        assert_eq!(rep.multiset_violations, 0);
        assert!(rep.empirical_c.is_finite());
    }

    #[test]
    fn perturbation_rejects_large_epsilon() {
        let grid = GridSpec::new(12).unwrap();
        assert!(perturbation_check(&grid, 5, lat(0.6), grid.spacing(), 2, 1).is_err());
    }
}
