//! Exact per-block rates and harvested energy.
//!
//! Everything here evaluates the physical model as-is; the optimizer's
//! internal shortcuts never leak into these functions, and reported rates
//! always come from them.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelState;
use crate::params::SystemParams;

/// Clamp applied to the time split so both phases keep strictly positive
/// duration: searches run on `[ε, 1-ε]`.
pub const TIME_SPLIT_EPS: f64 = 1e-6;

/// Optimized decision variables and achieved performance for one block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockDecision {
    /// DC bias, A.
    pub i_b: f64,
    /// Peak amplitude of the information signal, A.
    pub amp: f64,
    /// Fraction of the block given to the VLC phase.
    pub t_vlc: f64,
    /// Fraction of the block given to the RF phase; `1 - t_vlc`.
    pub t_rf: f64,
    /// Energy the relay spends on RF transmission this block, J.
    pub e_h: f64,
    /// Exact VLC-hop rate, bit/s.
    pub r_vlc: f64,
    /// Exact RF-hop rate, bit/s.
    pub r_rf: f64,
    /// End-to-end rate `min(r_vlc, r_rf)`, bit/s.
    pub r_e2e: f64,
    /// Phase-2 energy banked for the next block, J.
    pub e2_next: f64,
    /// Whether the RF-rate floor was attainable for this block.
    pub feasible: bool,
}

/// Inter-block state: energy banked during the previous block's RF phase.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlockState {
    /// Harvested phase-2 energy carried over from the previous block, J.
    pub e2_prev: f64,
}

/// VLC-hop rate `T_VLC · B_VLC · log₂(1 + α A²)`, bit/s.
pub fn vlc_rate(t_vlc: f64, amp: f64, ch: &ChannelState, params: &SystemParams) -> f64 {
    t_vlc * params.b_vlc * (1.0 + ch.alpha * amp * amp).log2()
}

/// Energy harvested during the VLC phase, J:
/// `fill · T_VLC · I_DC · V_t · ln(1 + I_DC/I₀)` with `I_DC = β I_b`.
pub fn harvest_phase1(t_vlc: f64, i_b: f64, ch: &ChannelState, params: &SystemParams) -> f64 {
    let i_dc = ch.beta * i_b;
    params.fill_factor * t_vlc * i_dc * params.v_t * (1.0 + i_dc / params.i_0).ln()
}

/// Energy harvested during the RF phase, J. The LED drops the information
/// signal and runs at full bias, so this is phase-1 harvesting at `I_H`.
pub fn harvest_phase2(t_rf: f64, ch: &ChannelState, params: &SystemParams) -> f64 {
    harvest_phase1(t_rf, params.i_max, ch, params)
}

/// Total energy available to the relay this block, J: current phase-1
/// harvest plus whatever the previous block banked.
pub fn total_harvest(
    t_vlc: f64,
    i_b: f64,
    e2_prev: f64,
    ch: &ChannelState,
    params: &SystemParams,
) -> f64 {
    harvest_phase1(t_vlc, i_b, ch, params) + e2_prev
}

/// RF-hop rate `T_RF · B_RF · log₂(1 + ζ E_h / T_RF)`, bit/s; the relay
/// transmit power is the spent energy spread over the RF phase.
pub fn rf_rate(t_rf: f64, e_h: f64, ch: &ChannelState, params: &SystemParams) -> f64 {
    if t_rf <= 0.0 {
        return 0.0;
    }
    t_rf * params.b_rf * (1.0 + ch.zeta * e_h / t_rf).log2()
}

/// Decode-and-forward bottleneck: the smaller of the two hop rates.
pub fn end_to_end_rate(r_vlc: f64, r_rf: f64) -> f64 {
    r_vlc.min(r_rf)
}
