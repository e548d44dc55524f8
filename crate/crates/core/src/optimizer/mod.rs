//! Per-block rate maximization over DC bias and time split.
//!
//! The joint problem maximizes the decode-and-forward bottleneck rate subject
//! to the LED linear region, the unit time budget, an RF-hop rate floor, and
//! the harvested-energy budget. It is solved by decomposition:
//!
//! - **Bias sub-problem** (time split fixed): the harvested-energy constraint
//!   is non-convex, so an MM loop replaces the convex harvest curve with its
//!   tangent at the current iterate (a global under-estimator, tight at the
//!   anchor). With the peak amplitude pinned to its ceiling the inner problem
//!   collapses to a max-min of a decreasing VLC rate against a nondecreasing
//!   RF rate in the bias, solved by bisection on their difference.
//! - **Time sub-problem** (bias fixed): the bottleneck of a linear VLC rate
//!   and a concave RF rate in the split is concave; golden-section search
//!   inside the window where the rate floor holds.
//! - **Driver**: alternate the two sub-problems, then refine the split with a
//!   direct search that scores each candidate split by its bias sub-problem
//!   optimum. The plain alternation can park anywhere the two hop rates
//!   cross, so the refinement stage is what pins the split down.
//!
//! A brute-force grid oracle over (bias, split) validates the whole pipeline.

mod search;

use thiserror::Error;

use crate::channel::ChannelState;
use crate::link::{self, BlockDecision, BlockState, TIME_SPLIT_EPS};
use crate::params::{SolverSettings, SystemParams};
use crate::sim::{CaseSpec, TimePolicy};
use search::{bisect_root, golden_max, highest_above, lowest_above};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum OptimizerError {
    /// The RF-hop rate floor cannot be met even at maximum DC bias.
    #[error("RF rate threshold unattainable even at maximum DC bias")]
    InfeasibleThreshold,
}

/// Iterate history of one MM run over the DC bias.
#[derive(Debug, Clone, Default)]
pub struct MmTrace {
    /// `(bias, objective)` after each MM step; the objective never decreases
    /// along the trace.
    pub iterates: Vec<(f64, f64)>,
    /// Whether the bias settled within tolerance before the iteration cap.
    pub converged: bool,
    /// Number of MM steps taken.
    pub iterations: usize,
}

/// Solution of the bias sub-problem at a fixed time split.
#[derive(Debug, Clone)]
pub struct Sp1Solution {
    /// Optimal DC bias, A.
    pub i_b: f64,
    /// Peak amplitude at that bias, `I_H - i_b`, A.
    pub amp: f64,
    /// Exact total harvested energy at that bias, J.
    pub e_h: f64,
    /// Bottleneck objective at the solution, bit/s.
    pub phi: f64,
    pub trace: MmTrace,
}

/// Solution of the time sub-problem at a fixed bias.
#[derive(Debug, Clone, Copy)]
pub struct Sp2Solution {
    /// Optimal VLC share of the block.
    pub t_vlc: f64,
    /// Bottleneck objective at the solution, bit/s.
    pub phi: f64,
    /// Set when the bias leaves no amplitude headroom, so the VLC hop
    /// carries nothing and the split parks at its smallest feasible value.
    pub degenerate: bool,
}

/// Result of one block optimization.
#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub decision: BlockDecision,
    /// Alternation cycles run by the driver.
    pub cycles: usize,
    /// One trace per MM run, in execution order.
    pub mm_traces: Vec<MmTrace>,
    /// Relative shortfall against a grid oracle, when computed.
    pub oracle_gap: Option<f64>,
}

/// Best grid point found by the brute-force oracle.
#[derive(Debug, Clone, Copy)]
pub struct OracleSolution {
    pub i_b: f64,
    pub t_vlc: f64,
    /// Exact bottleneck rate at the best point, bit/s.
    pub phi: f64,
    /// False when every grid point violates the rate floor; the reported
    /// point then maximizes the unconstrained bottleneck.
    pub feasible: bool,
}

/// Shared evaluation context for one block solve.
struct BlockCtx<'a> {
    ch: &'a ChannelState,
    params: &'a SystemParams,
    /// Banked phase-2 energy available this block, J.
    e2: f64,
    /// Effective RF-rate floor; zero when the floor is dropped.
    r_th: f64,
}

impl BlockCtx<'_> {
    /// Bias interval `[(I_L + I_H)/2, I_H]`. Restricting to the upper half
    /// keeps the amplitude ceiling at `I_H - i_b` without a min operator; the
    /// lower half is dominated because smaller bias buys no extra amplitude
    /// there while harvesting strictly less.
    fn bias_bounds(&self) -> (f64, f64) {
        (
            0.5 * (self.params.i_min + self.params.i_max),
            self.params.i_max,
        )
    }

    /// VLC-hop rate with the amplitude pinned to its ceiling.
    fn vlc_phi(&self, i_b: f64, t_vlc: f64) -> f64 {
        link::vlc_rate(t_vlc, self.params.i_max - i_b, self.ch, self.params)
    }

    /// Exact energy available at this bias and split, J.
    fn energy(&self, i_b: f64, t_vlc: f64) -> f64 {
        link::total_harvest(t_vlc, i_b, self.e2, self.ch, self.params)
    }

    /// RF-hop rate when spending `e_h` over the RF phase.
    fn rf_phi(&self, e_h: f64, t_rf: f64) -> f64 {
        link::rf_rate(t_rf, e_h.max(0.0), self.ch, self.params)
    }

    /// Bottleneck objective at a candidate point, exact energy.
    fn phi(&self, i_b: f64, t_vlc: f64) -> f64 {
        self.vlc_phi(i_b, t_vlc)
            .min(self.rf_phi(self.energy(i_b, t_vlc), 1.0 - t_vlc))
    }

    /// Energy the RF hop needs to reach the rate floor at the given split, J.
    fn energy_floor(&self, t_rf: f64) -> f64 {
        if self.r_th <= 0.0 {
            return 0.0;
        }
        if self.ch.zeta <= 0.0 {
            return f64::INFINITY;
        }
        ((self.r_th / (t_rf * self.params.b_rf)).exp2() - 1.0) * t_rf / self.ch.zeta
    }

    /// Time-split window on `[ε, 1-ε]` where the RF-hop rate at bias `i_b`
    /// meets the floor, or `None` when no split does. The RF rate is concave
    /// in the split, so the window is a single interval around its peak.
    fn rf_time_window(&self, i_b: f64, tol: f64) -> Option<(f64, f64)> {
        let eps = TIME_SPLIT_EPS;
        let rf = |t: f64| self.rf_phi(self.energy(i_b, t), 1.0 - t);
        let (t_peak, rf_max) = golden_max(rf, eps, 1.0 - eps, tol);
        if rf_max < self.r_th {
            return None;
        }
        let t_lo = if rf(eps) >= self.r_th {
            eps
        } else {
            lowest_above(rf, eps, t_peak, self.r_th, tol)
        };
        let t_hi = if rf(1.0 - eps) >= self.r_th {
            1.0 - eps
        } else {
            highest_above(rf, t_peak, 1.0 - eps, self.r_th, tol)
        };
        Some((t_lo, t_hi))
    }
}

/// Exact phase-1 harvest `g(I) = f · T · I · ln(1 + βI/I₀)` and its bias
/// derivative `f · T · (ln(1 + βI/I₀) + βI/(I₀ + βI))`.
fn phase1_value_grad(
    i_b: f64,
    t_vlc: f64,
    ch: &ChannelState,
    params: &SystemParams,
) -> (f64, f64) {
    let value = link::harvest_phase1(t_vlc, i_b, ch, params);
    let i_dc = ch.beta * i_b;
    let grad = ch.f_coef * t_vlc * ((1.0 + i_dc / params.i_0).ln() + i_dc / (params.i_0 + i_dc));
    (value, grad)
}

/// First-order expansion of the phase-1 harvest around `i_b_anchor`, plus the
/// previous block's phase-2 term. The harvest curve is convex in the bias, so
/// the tangent under-estimates it everywhere and is tight at the anchor.
pub fn surrogate_energy(
    i_b: f64,
    i_b_anchor: f64,
    t_vlc: f64,
    t_rf_prev: f64,
    ch: &ChannelState,
    params: &SystemParams,
) -> f64 {
    let (g0, grad) = phase1_value_grad(i_b_anchor, t_vlc, ch, params);
    g0 + grad * (i_b - i_b_anchor) + link::harvest_phase2(t_rf_prev, ch, params)
}

/// Bias sub-problem at a fixed time split: MM over the harvested-energy
/// constraint, one bisection per MM step.
///
/// Fails with [`OptimizerError::InfeasibleThreshold`] when the rate floor is
/// out of reach even at maximum bias.
pub fn solve_subproblem1(
    t_vlc: f64,
    e2_prev: f64,
    ch: &ChannelState,
    params: &SystemParams,
    settings: &SolverSettings,
    i_b_init: f64,
) -> Result<Sp1Solution, OptimizerError> {
    let ctx = BlockCtx {
        ch,
        params,
        e2: e2_prev,
        r_th: params.r_th,
    };
    sp1(&ctx, t_vlc, settings, i_b_init)
}

fn sp1(
    ctx: &BlockCtx,
    t_vlc: f64,
    settings: &SolverSettings,
    i_b_init: f64,
) -> Result<Sp1Solution, OptimizerError> {
    let (lo, hi) = ctx.bias_bounds();
    let t_rf = 1.0 - t_vlc;
    let e_req = ctx.energy_floor(t_rf);
    if ctx.energy(hi, t_vlc) < e_req {
        return Err(OptimizerError::InfeasibleThreshold);
    }
    let bias_tol = settings.line_search_tol * (hi - lo);
    let mut anchor = i_b_init.clamp(lo, hi);
    let mut iterates: Vec<(f64, f64)> = Vec::new();
    let mut converged = false;

    for _ in 0..settings.mm_max_iter {
        let (g0, grad) = phase1_value_grad(anchor, t_vlc, ctx.ch, ctx.params);
        let e_surr = |i: f64| g0 + grad * (i - anchor) + ctx.e2;

        // Smallest bias meeting the rate floor under the linear surrogate.
        let i_floor = if e_surr(lo) >= e_req {
            lo
        } else if grad > 0.0 {
            anchor + (e_req - g0 - ctx.e2) / grad
        } else {
            f64::INFINITY
        };

        let mut next = if !(i_floor <= hi) {
            // The tangent cannot certify the floor anywhere, though the exact
            // curve can (checked above): re-anchor at the top, where the
            // tangent is tight on the most energetic point.
            hi
        } else {
            let lo_f = i_floor.max(lo);
            let diff = |i: f64| ctx.vlc_phi(i, t_vlc) - ctx.rf_phi(e_surr(i), t_rf);
            if diff(lo_f) > 0.0 && diff(hi) < 0.0 {
                bisect_root(diff, lo_f, hi, bias_tol)
            } else {
                // No crossing: the bottleneck is one-sided, so an endpoint is
                // optimal. Larger min wins; ties go to the smaller bias.
                let m_lo = ctx.vlc_phi(lo_f, t_vlc).min(ctx.rf_phi(e_surr(lo_f), t_rf));
                let m_hi = ctx.vlc_phi(hi, t_vlc).min(ctx.rf_phi(e_surr(hi), t_rf));
                if m_hi > m_lo {
                    hi
                } else {
                    lo_f
                }
            }
        };

        // Ascent safeguard: the tangent is tight at the anchor, so a move
        // whose surrogate objective falls below the anchor's objective can
        // only be search noise; stay put instead. Skipped while the anchor
        // itself still violates the floor (initialization).
        if ctx.energy(anchor, t_vlc) >= e_req {
            let surr_phi = ctx.vlc_phi(next, t_vlc).min(ctx.rf_phi(e_surr(next), t_rf));
            if surr_phi < ctx.phi(anchor, t_vlc) {
                next = anchor;
            }
        }

        let step = (next - anchor).abs();
        anchor = next;
        iterates.push((anchor, ctx.phi(anchor, t_vlc)));
        if step < settings.mm_tol {
            converged = true;
            break;
        }
    }

    let iterations = iterates.len();
    Ok(Sp1Solution {
        i_b: anchor,
        amp: ctx.params.i_max - anchor,
        e_h: ctx.energy(anchor, t_vlc),
        phi: ctx.phi(anchor, t_vlc),
        trace: MmTrace {
            iterates,
            converged,
            iterations,
        },
    })
}

/// Time sub-problem at a fixed bias: golden-section on the concave
/// bottleneck inside the rate-floor window.
///
/// Fails with [`OptimizerError::InfeasibleThreshold`] when no split meets
/// the floor at this bias.
pub fn solve_subproblem2(
    i_b: f64,
    e2_prev: f64,
    ch: &ChannelState,
    params: &SystemParams,
    settings: &SolverSettings,
) -> Result<Sp2Solution, OptimizerError> {
    let ctx = BlockCtx {
        ch,
        params,
        e2: e2_prev,
        r_th: params.r_th,
    };
    sp2(&ctx, i_b, settings)
}

fn sp2(ctx: &BlockCtx, i_b: f64, settings: &SolverSettings) -> Result<Sp2Solution, OptimizerError> {
    let tol = settings.line_search_tol;
    let Some((t_lo, t_hi)) = ctx.rf_time_window(i_b, tol) else {
        return Err(OptimizerError::InfeasibleThreshold);
    };
    // Per-unit-time VLC rate; the bottleneck is this slope times the split
    // against the concave RF curve.
    let slope = ctx.vlc_phi(i_b, 1.0);
    if slope <= 0.0 {
        // No amplitude headroom: the VLC hop carries nothing, park the split
        // at the smallest feasible value.
        return Ok(Sp2Solution {
            t_vlc: t_lo,
            phi: ctx.phi(i_b, t_lo),
            degenerate: true,
        });
    }
    let (t_star, phi_star) = golden_max(|t| ctx.phi(i_b, t), t_lo, t_hi, tol);
    Ok(Sp2Solution {
        t_vlc: t_star,
        phi: phi_star,
        degenerate: false,
    })
}

struct BlockSolution {
    i_b: f64,
    t_vlc: f64,
    cycles: usize,
    traces: Vec<MmTrace>,
}

fn solve_block(
    ctx: &BlockCtx,
    case: CaseSpec,
    settings: &SolverSettings,
) -> Result<BlockSolution, OptimizerError> {
    let (lo, hi) = ctx.bias_bounds();
    let init_bias = 0.5 * (lo + hi);

    if case.time_policy == TimePolicy::FixedHalf {
        let s = sp1(ctx, 0.5, settings, init_bias)?;
        return Ok(BlockSolution {
            i_b: s.i_b,
            t_vlc: 0.5,
            cycles: 1,
            traces: vec![s.trace],
        });
    }

    let tol = settings.line_search_tol;
    // Joint feasibility: some split must meet the floor at maximum bias.
    let Some((t_lo, t_hi)) = ctx.rf_time_window(hi, tol) else {
        return Err(OptimizerError::InfeasibleThreshold);
    };

    let mut t = 0.5_f64.clamp(t_lo, t_hi);
    let mut anchor = init_bias;
    let mut traces = Vec::new();
    let mut best = (f64::NEG_INFINITY, anchor, t);
    let mut phi_prev = f64::NEG_INFINITY;
    let mut cycles = 0;

    while cycles < settings.alt_max_cycles {
        cycles += 1;
        let s1 = sp1(ctx, t, settings, anchor)?;
        anchor = s1.i_b;
        traces.push(s1.trace);
        if s1.phi > best.0 {
            best = (s1.phi, s1.i_b, t);
        }
        let s2 = sp2(ctx, s1.i_b, settings)?;
        if ctx.phi(s1.i_b, s2.t_vlc) >= ctx.phi(s1.i_b, t) {
            t = s2.t_vlc;
        }
        let phi_now = ctx.phi(anchor, t);
        if phi_now > best.0 {
            best = (phi_now, anchor, t);
        }
        if phi_now - phi_prev < settings.alt_rel_tol * phi_prev.abs().max(1.0) {
            break;
        }
        phi_prev = phi_now;
    }

    // The coordinate alternation parks wherever the two hop rates cross, and
    // every crossing is coordinate-wise optimal, so the split it stops at is
    // initialization-dependent. Finish with a direct search over the split,
    // scoring each candidate by its bias sub-problem optimum.
    let mut warm = anchor;
    {
        let mut score = |tt: f64, traces: &mut Vec<MmTrace>| -> f64 {
            match sp1(ctx, tt, settings, warm) {
                Ok(s) => {
                    warm = s.i_b;
                    traces.push(s.trace);
                    s.phi
                }
                // Unreachable inside the feasibility window; score it out.
                Err(_) => f64::NEG_INFINITY,
            }
        };

        const COARSE: usize = 9;
        let mut grid = [(0.0, f64::NEG_INFINITY); COARSE];
        let mut best_k = 0;
        for k in 0..COARSE {
            let tt = t_lo + (t_hi - t_lo) * k as f64 / (COARSE - 1) as f64;
            let v = score(tt, &mut traces);
            grid[k] = (tt, v);
            if v > grid[best_k].1 {
                best_k = k;
            }
        }
        let bracket_lo = grid[best_k.saturating_sub(1)].0;
        let bracket_hi = grid[(best_k + 1).min(COARSE - 1)].0;
        let (t_ref, _) = golden_max(|tt| score(tt, &mut traces), bracket_lo, bracket_hi, tol);

        let refined = sp1(ctx, t_ref, settings, warm)?;
        traces.push(refined.trace.clone());
        if refined.phi > best.0 {
            best = (refined.phi, refined.i_b, t_ref);
        }
    }

    Ok(BlockSolution {
        i_b: best.1,
        t_vlc: best.2,
        cycles,
        traces,
    })
}

/// Optimizes one transmission block for the given case.
///
/// Joint cases search both the bias and the split; fixed-split cases pin the
/// split at one half and optimize only the bias. Carry-over cases draw on the
/// banked phase-2 energy in `state` and bank new energy for the next block.
/// When the RF-rate floor is unattainable the block is re-solved with the
/// floor dropped and flagged infeasible, so sequences report outage without
/// losing the best-effort rate.
pub fn optimize_block(
    case: CaseSpec,
    state: &BlockState,
    ch: &ChannelState,
    params: &SystemParams,
    settings: &SolverSettings,
) -> OptimizeOutcome {
    let e2 = if case.carryover_on() { state.e2_prev } else { 0.0 };
    let ctx = BlockCtx {
        ch,
        params,
        e2,
        r_th: params.r_th,
    };
    match solve_block(&ctx, case, settings) {
        Ok(sol) => finalize(&ctx, case, sol, true),
        Err(OptimizerError::InfeasibleThreshold) => {
            let relaxed = BlockCtx {
                ch,
                params,
                e2,
                r_th: 0.0,
            };
            let sol = solve_block(&relaxed, case, settings)
                .expect("a zero rate floor is always attainable");
            finalize(&relaxed, case, sol, false)
        }
    }
}

fn finalize(ctx: &BlockCtx, case: CaseSpec, sol: BlockSolution, feasible: bool) -> OptimizeOutcome {
    let params = ctx.params;
    let t_rf = 1.0 - sol.t_vlc;
    let amp = params.i_max - sol.i_b;
    let e_h = ctx.energy(sol.i_b, sol.t_vlc);
    let r_vlc = link::vlc_rate(sol.t_vlc, amp, ctx.ch, params);
    let r_rf = link::rf_rate(t_rf, e_h, ctx.ch, params);
    let e2_next = if case.carryover_on() {
        link::harvest_phase2(t_rf, ctx.ch, params)
    } else {
        0.0
    };
    OptimizeOutcome {
        decision: BlockDecision {
            i_b: sol.i_b,
            amp,
            t_vlc: sol.t_vlc,
            t_rf,
            e_h,
            r_vlc,
            r_rf,
            r_e2e: link::end_to_end_rate(r_vlc, r_rf),
            e2_next,
            feasible,
        },
        cycles: sol.cycles,
        mm_traces: sol.traces,
        oracle_gap: None,
    }
}

/// Exhaustive search over a uniform (bias, split) grid with exact rates.
///
/// The amplitude is pinned to its ceiling and the energy budget to the exact
/// harvest, matching the structure of the optimum. Fixed-split cases restrict
/// the split axis to one half. Points violating the rate floor are filtered;
/// when none survive, the best unconstrained point is reported with
/// `feasible = false`. Ties keep the first point in scan order (bias outer,
/// split inner, both ascending).
pub fn brute_force_oracle(
    case: CaseSpec,
    state: &BlockState,
    ch: &ChannelState,
    params: &SystemParams,
    grid: usize,
) -> OracleSolution {
    assert!(grid >= 3, "oracle grid must have at least 3 points per axis");
    let e2 = if case.carryover_on() { state.e2_prev } else { 0.0 };
    let lo = 0.5 * (params.i_min + params.i_max);
    let hi = params.i_max;
    let eps = TIME_SPLIT_EPS;
    let splits: Vec<f64> = if case.time_policy == TimePolicy::FixedHalf {
        vec![0.5]
    } else {
        (0..grid)
            .map(|k| eps + (1.0 - 2.0 * eps) * k as f64 / (grid - 1) as f64)
            .collect()
    };

    let mut best_ok: Option<(f64, f64, f64)> = None;
    let mut best_any = (f64::NEG_INFINITY, lo, splits[0]);
    for k in 0..grid {
        let i_b = lo + (hi - lo) * k as f64 / (grid - 1) as f64;
        let amp = params.i_max - i_b;
        for &t in &splits {
            let e_h = link::total_harvest(t, i_b, e2, ch, params);
            let r_vlc = link::vlc_rate(t, amp, ch, params);
            let r_rf = link::rf_rate(1.0 - t, e_h, ch, params);
            let phi = r_vlc.min(r_rf);
            if phi > best_any.0 {
                best_any = (phi, i_b, t);
            }
            if r_rf >= params.r_th && best_ok.is_none_or(|(p, _, _)| phi > p) {
                best_ok = Some((phi, i_b, t));
            }
        }
    }

    match best_ok {
        Some((phi, i_b, t_vlc)) => OracleSolution {
            i_b,
            t_vlc,
            phi,
            feasible: true,
        },
        None => OracleSolution {
            i_b: best_any.1,
            t_vlc: best_any.2,
            phi: best_any.0,
            feasible: false,
        },
    }
}

/// Relative shortfall of a decision's exact end-to-end rate against the grid
/// oracle; negative when the continuous solution beats the grid.
pub fn oracle_gap(
    decision: &BlockDecision,
    case: CaseSpec,
    state: &BlockState,
    ch: &ChannelState,
    params: &SystemParams,
    grid: usize,
) -> f64 {
    let oracle = brute_force_oracle(case, state, ch, params, grid);
    if oracle.phi <= 0.0 {
        return 0.0;
    }
    (oracle.phi - decision.r_e2e) / oracle.phi
}
