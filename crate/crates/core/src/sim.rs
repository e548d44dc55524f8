//! Block sequences with energy carry-over and Monte Carlo aggregation.
//!
//! A trial fixes the geometry, redraws fading every block, and runs the
//! block optimizer sequentially so that energy banked during one block's RF
//! phase funds the next block. Experiments run many trials over a grid of
//! geometry cells and aggregate steady-state statistics.
//!
//! Randomness is reproducible by construction: trial `k` of an experiment
//! seeded with `s` draws from `ChaCha12Rng::seed_from_u64(s)` with stream id
//! `k`, in a fixed order (relay distance if randomized, then user distance if
//! randomized, then one fading value per block). All cases and geometry cells
//! of a trial share those draws, so case comparisons run on common random
//! numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{build_channel, sample_fading, ChannelError, Scenario};
use crate::link::{BlockDecision, BlockState};
use crate::optimizer::optimize_block;
use crate::params::{SolverSettings, SystemParams};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid experiment configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// How the VLC/RF time split is chosen each block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimePolicy {
    /// Optimize the split jointly with the bias.
    Joint,
    /// Pin the split at one half and optimize only the bias.
    FixedHalf,
}

/// Whether energy banked during the previous block's RF phase is usable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Carryover {
    On,
    Off,
}

/// One of the four benchmark cases.
///
/// Case 1 = joint split with carry-over, case 2 = joint split without,
/// case 3 = fixed half split with carry-over, case 4 = fixed half split
/// without.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub time_policy: TimePolicy,
    pub carryover: Carryover,
}

impl CaseSpec {
    pub fn from_index(index: u8) -> Option<CaseSpec> {
        let case = match index {
            1 => CaseSpec {
                time_policy: TimePolicy::Joint,
                carryover: Carryover::On,
            },
            2 => CaseSpec {
                time_policy: TimePolicy::Joint,
                carryover: Carryover::Off,
            },
            3 => CaseSpec {
                time_policy: TimePolicy::FixedHalf,
                carryover: Carryover::On,
            },
            4 => CaseSpec {
                time_policy: TimePolicy::FixedHalf,
                carryover: Carryover::Off,
            },
            _ => return None,
        };
        Some(case)
    }

    pub fn index(&self) -> u8 {
        match (self.time_policy, self.carryover) {
            (TimePolicy::Joint, Carryover::On) => 1,
            (TimePolicy::Joint, Carryover::Off) => 2,
            (TimePolicy::FixedHalf, Carryover::On) => 3,
            (TimePolicy::FixedHalf, Carryover::Off) => 4,
        }
    }

    pub fn carryover_on(&self) -> bool {
        self.carryover == Carryover::On
    }
}

/// Geometry setting for one axis of the experiment grid.
///
/// In JSON a bare number is `Fixed`, `{"min": a, "max": b}` is `Range`
/// (uniform draw per trial), and an array is `List` (one grid cell per
/// entry).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeomPolicy {
    Fixed(f64),
    Range { min: f64, max: f64 },
    List(Vec<f64>),
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Case indices to run, each on the same draws.
    pub cases: Vec<u8>,
    /// Blocks per trial; carry-over couples them in order.
    pub n_blocks: usize,
    /// Independent trials per cell.
    pub n_trials: usize,
    /// Relay distance setting, m.
    pub d_r: GeomPolicy,
    /// User distance setting, m.
    pub d_u: GeomPolicy,
    /// RF carrier frequency, Hz.
    pub f_c: f64,
    /// Master seed; trial k uses stream k of this seed.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            cases: vec![1, 2, 3, 4],
            n_blocks: 20,
            n_trials: 500,
            d_r: GeomPolicy::Range { min: 0.0, max: 2.0 },
            d_u: GeomPolicy::Range { min: 4.0, max: 8.0 },
            f_c: 2.4e9,
            seed: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.cases.is_empty() {
            errs.push("cases must not be empty".into());
        }
        for &c in &self.cases {
            if CaseSpec::from_index(c).is_none() {
                errs.push(format!("unknown case index {c} (expected 1..=4)"));
            }
        }
        if self.n_blocks < 1 {
            errs.push("n_blocks must be at least 1".into());
        }
        if self.n_trials < 1 {
            errs.push("n_trials must be at least 1".into());
        }
        if !(self.f_c > 0.0) {
            errs.push(format!("f_c must be strictly positive, got {}", self.f_c));
        }
        for (name, policy) in [("d_r", &self.d_r), ("d_u", &self.d_u)] {
            match policy {
                GeomPolicy::Fixed(v) if !v.is_finite() => {
                    errs.push(format!("{name} must be finite"));
                }
                GeomPolicy::Range { min, max } if !(min <= max) => {
                    errs.push(format!("{name} range is not ordered: [{min}, {max}]"));
                }
                GeomPolicy::List(vs) if vs.is_empty() => {
                    errs.push(format!("{name} list must not be empty"));
                }
                _ => {}
            }
        }
        errs
    }
}

/// Per-trial random draws, shared by every case and cell of the trial.
#[derive(Debug, Clone)]
pub struct TrialDraws {
    /// Relay distance draw; `None` when the policy is not a range.
    pub d_r: Option<f64>,
    /// User distance draw; `None` when the policy is not a range.
    pub d_u: Option<f64>,
    /// One fading power gain per block.
    pub fading: Vec<f64>,
}

/// Documented RNG sub-stream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, min: f64, max: f64) -> f64 {
    min + rng.random::<f64>() * (max - min)
}

/// Draws everything one trial needs, in the documented fixed order.
pub fn draw_trial<R: Rng + ?Sized>(cfg: &ExperimentConfig, rng: &mut R) -> TrialDraws {
    let d_r = match cfg.d_r {
        GeomPolicy::Range { min, max } => Some(uniform(rng, min, max)),
        _ => None,
    };
    let d_u = match cfg.d_u {
        GeomPolicy::Range { min, max } => Some(uniform(rng, min, max)),
        _ => None,
    };
    let fading = (0..cfg.n_blocks).map(|_| sample_fading(rng)).collect();
    TrialDraws { d_r, d_u, fading }
}

/// One trial's decisions and summary statistics.
#[derive(Debug, Clone)]
pub struct TrialResult {
    /// Every per-block decision, in block order.
    pub decisions: Vec<BlockDecision>,
    /// Mean end-to-end rate over the steady-state window, bit/s.
    pub rate_mean: f64,
    /// Mean bias over the steady-state window, A.
    pub ib_mean: f64,
    /// Mean VLC share over the steady-state window.
    pub tvlc_mean: f64,
    /// Share of blocks where the RF-rate floor was unattainable.
    pub outage_frac: f64,
}

/// Runs one block sequence: geometry fixed, fading per block, carry-over
/// threaded through the sequence (the first block starts with an empty bank).
/// Steady-state means cover the last `ceil(n/2)` blocks.
pub fn run_trial(
    case: CaseSpec,
    d_r: f64,
    d_u: f64,
    f_c: f64,
    fading: &[f64],
    params: &SystemParams,
    settings: &SolverSettings,
) -> Result<TrialResult, SimError> {
    let mut state = BlockState::default();
    let mut decisions = Vec::with_capacity(fading.len());
    for &h_rf_sq in fading {
        let scenario = Scenario {
            d_r,
            d_u,
            f_c,
            h_rf_sq,
        };
        let ch = build_channel(&scenario, params)?;
        let outcome = optimize_block(case, &state, &ch, params, settings);
        state.e2_prev = outcome.decision.e2_next;
        decisions.push(outcome.decision);
    }

    let window = decisions.len().div_ceil(2);
    let tail = &decisions[decisions.len() - window..];
    let n = tail.len() as f64;
    let outages = decisions.iter().filter(|d| !d.feasible).count();
    Ok(TrialResult {
        rate_mean: tail.iter().map(|d| d.r_e2e).sum::<f64>() / n,
        ib_mean: tail.iter().map(|d| d.i_b).sum::<f64>() / n,
        tvlc_mean: tail.iter().map(|d| d.t_vlc).sum::<f64>() / n,
        outage_frac: outages as f64 / decisions.len() as f64,
        decisions,
    })
}

/// Geometry of one grid cell, as reported in aggregate rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CellGeom {
    Fixed(f64),
    Uniform { min: f64, max: f64 },
}

impl CellGeom {
    fn resolve(&self, draw: Option<f64>) -> f64 {
        match self {
            CellGeom::Fixed(v) => *v,
            CellGeom::Uniform { .. } => {
                draw.expect("range cells always have a matching trial draw")
            }
        }
    }
}

impl std::fmt::Display for CellGeom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CellGeom::Fixed(v) => write!(f, "{v}"),
            CellGeom::Uniform { min, max } => write!(f, "{min}:{max}"),
        }
    }
}

fn expand_cells(policy: &GeomPolicy) -> Vec<CellGeom> {
    match policy {
        GeomPolicy::Fixed(v) => vec![CellGeom::Fixed(*v)],
        GeomPolicy::Range { min, max } => vec![CellGeom::Uniform {
            min: *min,
            max: *max,
        }],
        GeomPolicy::List(vs) => vs.iter().map(|&v| CellGeom::Fixed(v)).collect(),
    }
}

/// Aggregate statistics for one (case, geometry cell) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub case: u8,
    pub d_r: CellGeom,
    pub d_u: CellGeom,
    pub f_c: f64,
    /// Mean over trials of the steady-state end-to-end rate, bit/s.
    pub rate_mean: f64,
    /// Standard error of that mean, bit/s.
    pub rate_se: f64,
    pub ib_mean: f64,
    pub tvlc_mean: f64,
    pub outage_frac: f64,
    pub n_trials: usize,
    /// Extremes across every block of every trial (diagnostics, not part of
    /// the CSV schema).
    pub ib_min: f64,
    pub ib_max: f64,
    pub tvlc_min: f64,
    pub tvlc_max: f64,
}

#[derive(Clone, Copy)]
struct TrialStats {
    rate: f64,
    ib: f64,
    tvlc: f64,
    outage: f64,
    ib_min: f64,
    ib_max: f64,
    tvlc_min: f64,
    tvlc_max: f64,
}

/// Runs the full experiment grid: every (relay cell × user cell × case) on
/// common random numbers, trials in parallel, aggregation in trial order so
/// results are bit-identical for a given seed regardless of thread count.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    params: &SystemParams,
    settings: &SolverSettings,
) -> Result<Vec<AggregateRow>, SimError> {
    let mut errs = cfg.validate();
    errs.extend(params.validate());
    errs.extend(settings.validate());
    if !errs.is_empty() {
        return Err(SimError::InvalidConfig(errs));
    }

    let cells_r = expand_cells(&cfg.d_r);
    let cells_u = expand_cells(&cfg.d_u);
    let cases: Vec<CaseSpec> = cfg
        .cases
        .iter()
        .map(|&c| CaseSpec::from_index(c).expect("validated above"))
        .collect();
    let slots = cells_r.len() * cells_u.len() * cases.len();

    let per_trial: Result<Vec<Vec<TrialStats>>, SimError> = (0..cfg.n_trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, trial);
            let draws = draw_trial(cfg, &mut rng);
            let mut stats = Vec::with_capacity(slots);
            for cell_r in &cells_r {
                for cell_u in &cells_u {
                    let d_r = cell_r.resolve(draws.d_r);
                    let d_u = cell_u.resolve(draws.d_u);
                    for &case in &cases {
                        let tr =
                            run_trial(case, d_r, d_u, cfg.f_c, &draws.fading, params, settings)?;
                        let fold = |init: (f64, f64), f: &dyn Fn(&BlockDecision) -> f64| {
                            tr.decisions.iter().fold(init, |(lo, hi), d| {
                                (lo.min(f(d)), hi.max(f(d)))
                            })
                        };
                        let (ib_min, ib_max) =
                            fold((f64::INFINITY, f64::NEG_INFINITY), &|d| d.i_b);
                        let (tvlc_min, tvlc_max) =
                            fold((f64::INFINITY, f64::NEG_INFINITY), &|d| d.t_vlc);
                        stats.push(TrialStats {
                            rate: tr.rate_mean,
                            ib: tr.ib_mean,
                            tvlc: tr.tvlc_mean,
                            outage: tr.outage_frac,
                            ib_min,
                            ib_max,
                            tvlc_min,
                            tvlc_max,
                        });
                    }
                }
            }
            Ok(stats)
        })
        .collect();
    let per_trial = per_trial?;

    let n = cfg.n_trials;
    let mut rows = Vec::with_capacity(slots);
    let mut slot = 0;
    for cell_r in &cells_r {
        for cell_u in &cells_u {
            for &case in &cases {
                let series: Vec<&TrialStats> = per_trial.iter().map(|t| &t[slot]).collect();
                let mean = |f: &dyn Fn(&TrialStats) -> f64| {
                    series.iter().map(|s| f(s)).sum::<f64>() / n as f64
                };
                let rate_mean = mean(&|s| s.rate);
                let rate_se = if n > 1 {
                    let var = series
                        .iter()
                        .map(|s| (s.rate - rate_mean) * (s.rate - rate_mean))
                        .sum::<f64>()
                        / (n - 1) as f64;
                    (var / n as f64).sqrt()
                } else {
                    0.0
                };
                rows.push(AggregateRow {
                    case: case.index(),
                    d_r: *cell_r,
                    d_u: *cell_u,
                    f_c: cfg.f_c,
                    rate_mean,
                    rate_se,
                    ib_mean: mean(&|s| s.ib),
                    tvlc_mean: mean(&|s| s.tvlc),
                    outage_frac: mean(&|s| s.outage),
                    n_trials: n,
                    ib_min: series.iter().fold(f64::INFINITY, |a, s| a.min(s.ib_min)),
                    ib_max: series
                        .iter()
                        .fold(f64::NEG_INFINITY, |a, s| a.max(s.ib_max)),
                    tvlc_min: series
                        .iter()
                        .fold(f64::INFINITY, |a, s| a.min(s.tvlc_min)),
                    tvlc_max: series
                        .iter()
                        .fold(f64::NEG_INFINITY, |a, s| a.max(s.tvlc_max)),
                });
                slot += 1;
            }
        }
    }
    Ok(rows)
}
