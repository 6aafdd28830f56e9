//! Monte Carlo estimation of spanning-probability curves and of the
//! threshold where curves for two lattice sizes cross.
//!
//! Every realization draws one [`OccupancyField`](crate::lattice::OccupancyField)
//! and evaluates it at every point of the `p` grid, so the spanning counts of
//! a curve are nondecreasing in `p` by construction. Realizations are
//! reduced into per-grid-point histograms; addition commutes, so the totals
//! do not depend on how many threads ran or how work was split.

use std::io::{self, Write};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::fmt_sig;
use crate::labeling::OnsetScanner;
use crate::lattice::{FieldStream, Geometry};
use crate::neighborhood::Neighborhood;

/// Both curves must lie strictly inside this band for a grid point to take
/// part in the crossing search.
pub const ADMISSIBLE_BAND: (f64, f64) = (0.02, 0.98);

/// Coarse pre-scan step as a multiple of the requested step.
pub const COARSE_FACTOR: f64 = 10.0;

/// Realizations per scheduling block. Cancellation is checked between blocks.
pub const BLOCK_SIZE: u64 = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("invalid p grid: {0}")]
    Grid(String),
    #[error("at least one lattice size is required")]
    NoSizes,
    #[error("lattice sizes must be strictly increasing and at least 2, got {0:?}")]
    Sizes(Vec<usize>),
    #[error("the number of realizations must be at least 1")]
    NoRealizations,
}

/// Arithmetic grid `p_min, p_min + step, …` up to `p_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PGrid {
    step: f64,
    points: Vec<f64>,
}

/// Serializable description of a [`PGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub p_min: f64,
    pub p_max: f64,
    pub step: f64,
    pub points: usize,
}

impl PGrid {
    pub fn new(p_min: f64, p_max: f64, step: f64) -> Result<Self, PlanError> {
        if !(p_min.is_finite() && p_max.is_finite() && step.is_finite()) {
            return Err(PlanError::Grid("non-finite bound".into()));
        }
        if !(0.0 <= p_min && p_min < p_max && p_max <= 1.0) {
            return Err(PlanError::Grid(format!(
                "need 0 <= p_min < p_max <= 1, got [{p_min}, {p_max}]"
            )));
        }
        if step <= 0.0 {
            return Err(PlanError::Grid(format!(
                "step must be positive, got {step}"
            )));
        }
        let intervals = ((p_max - p_min) / step + 1e-9).floor() as usize;
        if intervals < 1 {
            return Err(PlanError::Grid(format!(
                "step {step} leaves fewer than two points in [{p_min}, {p_max}]"
            )));
        }
        let points = (0..=intervals)
            .map(|k| snap(p_min + k as f64 * step).min(1.0))
            .collect();
        Ok(PGrid { step, points })
    }

    /// Grid on integer multiples of `step` covering `[lo, hi]`, clipped to
    /// `[0, 1]`.
    pub fn aligned(lo: f64, hi: f64, step: f64) -> Result<Self, PlanError> {
        if step <= 0.0 || !step.is_finite() {
            return Err(PlanError::Grid(format!(
                "step must be positive, got {step}"
            )));
        }
        let k_lo = (lo.max(0.0) / step + 1e-9).floor() as i64;
        let k_hi = (hi.min(1.0) / step - 1e-9).ceil() as i64;
        let points: Vec<f64> = (k_lo..=k_hi)
            .map(|k| snap(k as f64 * step).clamp(0.0, 1.0))
            .collect();
        let mut points = points;
        points.dedup();
        if points.len() < 2 {
            return Err(PlanError::Grid(format!(
                "window [{lo}, {hi}] holds fewer than two points at step {step}"
            )));
        }
        Ok(PGrid { step, points })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            p_min: self.points[0],
            p_max: *self.points.last().unwrap(),
            step: self.step,
            points: self.points.len(),
        }
    }
}

/// Rounds a grid coordinate to 12 decimals, so `51 × 0.002` is stored as
/// `0.102` rather than `0.10200000000000001`.
fn snap(p: f64) -> f64 {
    (p * 1e12).round() / 1e12
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub neighborhood: Neighborhood,
    pub sizes: Vec<usize>,
    pub grid: PGrid,
    pub realizations: u64,
    pub master_seed: u64,
}

impl SweepPlan {
    pub fn new(
        neighborhood: Neighborhood,
        sizes: Vec<usize>,
        grid: PGrid,
        realizations: u64,
        master_seed: u64,
    ) -> Result<Self, PlanError> {
        if sizes.is_empty() {
            return Err(PlanError::NoSizes);
        }
        if sizes[0] < 2 || sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PlanError::Sizes(sizes));
        }
        if realizations == 0 {
            return Err(PlanError::NoRealizations);
        }
        Ok(SweepPlan {
            neighborhood,
            sizes,
            grid,
            realizations,
            master_seed,
        })
    }
}

/// Estimated spanning probability over a `p` grid for one lattice size.
#[derive(Debug, Clone, PartialEq)]
pub struct PercolationCurve {
    pub neighborhood: String,
    pub side: usize,
    pub grid: PGrid,
    pub spanning_counts: Vec<u64>,
    /// Realizations actually accumulated.
    pub realizations: u64,
    pub master_seed: u64,
    /// False when the sweep stopped before reaching the planned count.
    pub complete: bool,
}

impl PercolationCurve {
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.realizations.max(1) as f64;
        self.spanning_counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// CSV with header `neighborhood,L,p,N,spanning_count,P`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "neighborhood,L,p,N,spanning_count,P")?;
        for ((&p, &c), prob) in self
            .grid
            .points()
            .iter()
            .zip(&self.spanning_counts)
            .zip(self.probabilities())
        {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                self.neighborhood,
                self.side,
                fmt_sig(p),
                self.realizations,
                c,
                fmt_sig(prob)
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep plan: {0}")]
    Plan(#[from] PlanError),
    #[error("could not start worker pool: {0}")]
    Pool(String),
    #[error("sweep aborted ({reason}); {} partial curve(s) kept", partial.len())]
    Aborted {
        reason: AbortReason,
        partial: Vec<PercolationCurve>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbortReason {
    Cancelled,
    OutOfMemory { side: usize },
}

impl std::fmt::Display for AbortReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AbortReason::Cancelled => f.write_str("cancelled"),
            AbortReason::OutOfMemory { side } => {
                write!(f, "out of memory allocating L = {side} buffers")
            }
        }
    }
}

/// Progress snapshot passed to [`SweepOptions::progress`].
#[derive(Debug, Clone, Copy)]
pub struct SweepProgress {
    pub side: usize,
    pub done: u64,
    pub total: u64,
}

/// Execution knobs that never change results.
#[derive(Clone, Default)]
pub struct SweepOptions {
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
    /// Checked between blocks; setting it aborts with partial results.
    pub cancel: Option<Arc<AtomicBool>>,
    pub progress: Option<Arc<dyn Fn(SweepProgress) + Send + Sync>>,
}

impl std::fmt::Debug for SweepOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SweepOptions")
            .field("threads", &self.threads)
            .field("cancel", &self.cancel)
            .field("progress", &self.progress.is_some())
            .finish()
    }
}

impl SweepOptions {
    pub fn with_threads(threads: usize) -> Self {
        SweepOptions {
            threads: Some(threads),
            ..Default::default()
        }
    }
}

pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<PercolationCurve>, SweepError> {
    run_sweep_with(plan, &SweepOptions::default())
}

/// Runs every `(L, realization)` of the plan and returns one curve per size.
pub fn run_sweep_with(
    plan: &SweepPlan,
    options: &SweepOptions,
) -> Result<Vec<PercolationCurve>, SweepError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads.unwrap_or(0))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    pool.install(|| sweep_in_pool(plan, options))
}

fn sweep_in_pool(
    plan: &SweepPlan,
    options: &SweepOptions,
) -> Result<Vec<PercolationCurve>, SweepError> {
    let grid = plan.grid.points();
    let m = grid.len();
    let mut curves = Vec::with_capacity(plan.sizes.len());

    for &side in &plan.sizes {
        let geometry = Geometry::new(side).map_err(|_| PlanError::Sizes(plan.sizes.clone()))?;
        let curve = |hist: &[u64], done: u64, complete: bool| PercolationCurve {
            neighborhood: plan.neighborhood.name(),
            side,
            grid: plan.grid.clone(),
            spanning_counts: cumulative(hist, m),
            realizations: done,
            master_seed: plan.master_seed,
            complete,
        };

        let workers = rayon::current_num_threads();
        let mut scanners = Vec::with_capacity(workers);
        for _ in 0..workers {
            match OnsetScanner::try_new(geometry, &plan.neighborhood, grid) {
                Ok(s) => scanners.push(Mutex::new(s)),
                Err(_) => {
                    return Err(SweepError::Aborted {
                        reason: AbortReason::OutOfMemory { side },
                        partial: curves,
                    })
                }
            }
        }

        // hist[k]: realizations that first span at grid[k]; hist[m]: never.
        let mut hist = vec![0u64; m + 1];
        let mut done = 0u64;
        while done < plan.realizations {
            if options
                .cancel
                .as_ref()
                .is_some_and(|c| c.load(Ordering::Relaxed))
            {
                curves.push(curve(&hist, done, false));
                return Err(SweepError::Aborted {
                    reason: AbortReason::Cancelled,
                    partial: curves,
                });
            }
            let end = (done + BLOCK_SIZE).min(plan.realizations);
            let block = (done..end)
                .into_par_iter()
                .fold(
                    || vec![0u64; m + 1],
                    |mut h, r| {
                        let slot = rayon::current_thread_index().unwrap_or(0) % scanners.len();
                        let mut scanner = scanners[slot].lock().unwrap();
                        let mut stream = FieldStream::new(geometry, plan.master_seed, r);
                        h[scanner.onset_stream(&mut stream).unwrap_or(m)] += 1;
                        h
                    },
                )
                .reduce(
                    || vec![0u64; m + 1],
                    |mut a, b| {
                        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                        a
                    },
                );
            hist.iter_mut().zip(block).for_each(|(x, y)| *x += y);
            done = end;
            if let Some(progress) = &options.progress {
                progress(SweepProgress {
                    side,
                    done,
                    total: plan.realizations,
                });
            }
        }
        curves.push(curve(&hist, done, true));
    }
    Ok(curves)
}

fn cumulative(hist: &[u64], m: usize) -> Vec<u64> {
    hist[..m]
        .iter()
        .scan(0u64, |acc, &h| {
            *acc += h;
            Some(*acc)
        })
        .collect()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrossingError {
    #[error("curves are on different p grids")]
    GridMismatch,
    #[error("both curves are for L = {0}")]
    SameSize(usize),
    #[error("no crossing inside the admissible window {}", fmt_window(*window))]
    NoCrossing { window: Option<(f64, f64)> },
    #[error(
        "ambiguous crossing: sign changes in brackets {}",
        fmt_brackets(brackets)
    )]
    Ambiguous { brackets: Vec<(f64, f64)> },
}

fn fmt_window(window: Option<(f64, f64)>) -> String {
    match window {
        Some((a, b)) => format!("[{a}, {b}]"),
        None => "(empty: no grid point has both curves inside (0.02, 0.98))".to_string(),
    }
}

fn fmt_brackets(brackets: &[(f64, f64)]) -> String {
    brackets
        .iter()
        .map(|(a, b)| format!("({a}, {b})"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// One stage of a threshold search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub grid: GridSpec,
    #[serde(rename = "N")]
    pub realizations: u64,
    pub bracket: Option<(f64, f64)>,
    pub outcome: String,
}

/// Crossing bracket of two curves and the threshold read off it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub neighborhood: String,
    #[serde(rename = "L_pair")]
    pub sizes: (usize, usize),
    pub bracket: (f64, f64),
    pub p_c: f64,
    /// Type-B uncertainty of a uniform distribution over the bracket.
    pub u: f64,
    pub delta_p: f64,
    #[serde(rename = "N")]
    pub realizations: u64,
    pub master_seed: u64,
    pub grid: GridSpec,
    #[serde(default)]
    pub stages: Vec<StageRecord>,
}

impl ThresholdEstimate {
    pub fn from_bracket(
        neighborhood: String,
        sizes: (usize, usize),
        bracket: (f64, f64),
        grid: &PGrid,
        realizations: u64,
        master_seed: u64,
    ) -> Self {
        let (lo, hi) = bracket;
        ThresholdEstimate {
            neighborhood,
            sizes,
            bracket,
            p_c: 0.5 * (lo + hi),
            u: (hi - lo) / 3f64.sqrt(),
            delta_p: grid.step(),
            realizations,
            master_seed,
            grid: grid.spec(),
            stages: Vec::new(),
        }
    }

    pub fn width(&self) -> f64 {
        self.bracket.1 - self.bracket.0
    }
}

/// Sign of `P_a − P_b` from integer counts, exact.
fn difference_sign(ca: u64, na: u64, cb: u64, nb: u64) -> i8 {
    let lhs = ca as u128 * nb as u128;
    let rhs = cb as u128 * na as u128;
    match lhs.cmp(&rhs) {
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Greater => 1,
    }
}

/// Locates the grid bracket where `P_small − P_large` changes sign.
///
/// Only grid points where both curves are inside [`ADMISSIBLE_BAND`] count.
/// Points where the curves coincide exactly are skipped over, so a bracket
/// can span more than one grid cell. The result does not depend on which
/// curve is passed first.
pub fn find_crossing(
    small: &PercolationCurve,
    large: &PercolationCurve,
) -> Result<ThresholdEstimate, CrossingError> {
    if small.grid != large.grid {
        return Err(CrossingError::GridMismatch);
    }
    if small.side == large.side {
        return Err(CrossingError::SameSize(small.side));
    }
    let grid = small.grid.points();
    let (ps, pl) = (small.probabilities(), large.probabilities());
    let (band_lo, band_hi) = ADMISSIBLE_BAND;
    let admissible: Vec<bool> = ps
        .iter()
        .zip(&pl)
        .map(|(&a, &b)| a > band_lo && a < band_hi && b > band_lo && b < band_hi)
        .collect();

    let mut brackets = Vec::new();
    let mut window: Option<(f64, f64)> = None;
    let mut k = 0;
    while k < grid.len() {
        if !admissible[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < grid.len() && admissible[k] {
            k += 1;
        }
        let run = start..k;
        window = Some(match window {
            None => (grid[start], grid[k - 1]),
            Some((a, _)) => (a, grid[k - 1]),
        });
        let signed: Vec<(usize, i8)> = run
            .map(|i| {
                let s = difference_sign(
                    small.spanning_counts[i],
                    small.realizations,
                    large.spanning_counts[i],
                    large.realizations,
                );
                (i, s)
            })
            .filter(|&(_, s)| s != 0)
            .collect();
        for pair in signed.windows(2) {
            if pair[0].1 != pair[1].1 {
                brackets.push((grid[pair[0].0], grid[pair[1].0]));
            }
        }
    }

    match brackets.len() {
        0 => Err(CrossingError::NoCrossing { window }),
        1 => {
            let sizes = (small.side.min(large.side), small.side.max(large.side));
            Ok(ThresholdEstimate::from_bracket(
                small.neighborhood.clone(),
                sizes,
                brackets[0],
                &small.grid,
                small.realizations.min(large.realizations),
                small.master_seed,
            ))
        }
        _ => Err(CrossingError::Ambiguous { brackets }),
    }
}

/// Inputs of a full threshold search.
#[derive(Debug, Clone)]
pub struct ThresholdRequest {
    pub neighborhood: Neighborhood,
    pub sizes: (usize, usize),
    pub delta_p: f64,
    pub realizations: u64,
    pub master_seed: u64,
    /// Skip the coarse pre-scan and search this window directly.
    pub window: Option<(f64, f64)>,
}

#[derive(Debug, Error)]
pub enum EstimateFailure {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Crossing(#[from] CrossingError),
}

#[derive(Debug, Error)]
#[error("{neighborhood}: {failure}")]
pub struct EstimateError {
    pub neighborhood: String,
    #[source]
    pub failure: EstimateFailure,
    pub history: Vec<StageRecord>,
}

/// Realizations used by the coarse pre-scan for a requested count `n`.
pub fn coarse_realizations(n: u64) -> u64 {
    n.div_ceil(10).max(n.min(1000))
}

/// Threshold of `request.neighborhood` from the crossing of the two sizes'
/// curves, refining a coarse pre-scan unless a window is supplied.
pub fn estimate_threshold(
    request: &ThresholdRequest,
    options: &SweepOptions,
) -> Result<ThresholdEstimate, EstimateError> {
    let name = request.neighborhood.name();
    let mut history = Vec::new();
    let fail = |failure: EstimateFailure, history: Vec<StageRecord>| EstimateError {
        neighborhood: name.clone(),
        failure,
        history,
    };
    let (a, b) = request.sizes;
    let sizes = vec![a.min(b), a.max(b)];

    let window = match request.window {
        Some(w) => w,
        None => {
            let step = request.delta_p * COARSE_FACTOR;
            let grid = PGrid::aligned(0.0, 1.0, step).map_err(|e| fail(e.into(), vec![]))?;
            let n = coarse_realizations(request.realizations);
            let (record, curves) = run_stage(
                "coarse",
                &request.neighborhood,
                &sizes,
                grid,
                n,
                request.master_seed,
                options,
            )
            .map_err(|e| fail(e, history.clone()))?;
            history.push(record.clone());
            match record.bracket {
                Some((lo, hi)) => (lo - step, hi + step),
                None => transition_hull(&curves[0], &curves[1]),
            }
        }
    };

    let grid = PGrid::aligned(window.0, window.1, request.delta_p)
        .map_err(|e| fail(e.into(), history.clone()))?;
    let (record, curves) = run_stage(
        "fine",
        &request.neighborhood,
        &sizes,
        grid,
        request.realizations,
        request.master_seed,
        options,
    )
    .map_err(|e| fail(e, history.clone()))?;
    history.push(record);
    match find_crossing(&curves[0], &curves[1]) {
        Ok(mut estimate) => {
            estimate.stages = history;
            Ok(estimate)
        }
        Err(e) => Err(fail(e.into(), history)),
    }
}

fn run_stage(
    stage: &str,
    neighborhood: &Neighborhood,
    sizes: &[usize],
    grid: PGrid,
    realizations: u64,
    master_seed: u64,
    options: &SweepOptions,
) -> Result<(StageRecord, Vec<PercolationCurve>), EstimateFailure> {
    let spec = grid.spec();
    let plan = SweepPlan::new(
        neighborhood.clone(),
        sizes.to_vec(),
        grid,
        realizations,
        master_seed,
    )?;
    let curves = run_sweep_with(&plan, options)?;
    let crossing = find_crossing(&curves[0], &curves[1]);
    let record = StageRecord {
        stage: stage.to_string(),
        grid: spec,
        realizations,
        bracket: crossing.as_ref().ok().map(|e| e.bracket),
        outcome: match &crossing {
            Ok(e) => format!("bracket ({}, {})", e.bracket.0, e.bracket.1),
            Err(e) => e.to_string(),
        },
    };
    Ok((record, curves))
}

/// Smallest grid interval outside of which both curves are flat: from the
/// last point where neither ever spans to the first point where both always
/// span.
fn transition_hull(a: &PercolationCurve, b: &PercolationCurve) -> (f64, f64) {
    let grid = a.grid.points();
    let both_zero = |k: usize| a.spanning_counts[k] == 0 && b.spanning_counts[k] == 0;
    let both_full =
        |k: usize| a.spanning_counts[k] == a.realizations && b.spanning_counts[k] == b.realizations;
    let lo = (0..grid.len()).rev().find(|&k| both_zero(k)).unwrap_or(0);
    let hi = (0..grid.len())
        .find(|&k| both_full(k))
        .unwrap_or(grid.len() - 1);
    if lo < hi {
        (grid[lo], grid[hi])
    } else {
        (grid[0], grid[grid.len() - 1])
    }
}
