//! Hardware constants and solver settings.
//!
//! All dB/dBm quantities are stored exactly as configured and converted to
//! linear SI units only inside [`crate::channel`]; everything downstream of
//! that boundary works in W, A, V, Hz, s and J.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light used to derive the RF wavelength, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Raised when a parameter or settings struct violates its invariants.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid configuration: {}", .0.join("; "))]
pub struct InvalidConfig(pub Vec<String>);

/// Hardware and channel constants of the downlink.
///
/// The defaults describe an indoor ceiling AP two metres above the relay
/// plane with a 10 MHz bandwidth on both hops. The carrier frequency is not
/// part of this struct: experiments sweep it per scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// LED power per unit current, W/A.
    pub p_led: f64,
    /// Photodetector responsivity, A/W.
    pub eta: f64,
    /// Minimum DC bias of the LED's linear region, A.
    pub i_min: f64,
    /// Maximum DC bias of the LED's linear region, A.
    pub i_max: f64,
    /// VLC double-sided signal bandwidth, Hz.
    pub b_vlc: f64,
    /// RF signal bandwidth, Hz.
    pub b_rf: f64,
    /// Thermal noise density, dBm/Hz.
    pub p0_dbm_per_hz: f64,
    /// RF receiver noise figure, dB.
    pub nf_db: f64,
    /// Photodiode thermal voltage, V.
    pub v_t: f64,
    /// Photodiode dark saturation current, A.
    pub i_0: f64,
    /// Electron charge, C.
    pub q_e: f64,
    /// Ambient-light induced current, A.
    ///
    /// Configured in amperes (5.84 mA by default); the value enters only the
    /// shot-noise product, which fixes the unit interpretation.
    pub i_amb: f64,
    /// Photodiode detection area, m².
    pub a_p: f64,
    /// AP height above the relay plane, m.
    pub h_delta: f64,
    /// Half field-of-view of the photodiode, degrees.
    pub phi_fov_deg: f64,
    /// Half-power beamwidth of the LED, degrees.
    pub theta_half_deg: f64,
    /// Energy-harvesting fill factor, dimensionless.
    pub fill_factor: f64,
    /// Minimum required RF-hop rate, bit/s.
    pub r_th: f64,
    /// RF path-loss exponent, dimensionless.
    pub pl_exponent: f64,
    /// RF path-loss reference distance, m.
    pub d0: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            p_led: 1.5,
            eta: 0.4,
            i_min: 0.1,
            i_max: 1.0,
            b_vlc: 1.0e7,
            b_rf: 1.0e7,
            p0_dbm_per_hz: -174.0,
            nf_db: 9.0,
            v_t: 25.0e-3,
            i_0: 1.0e-10,
            q_e: 1.6e-19,
            i_amb: 5.84e-3,
            a_p: 1.0e-4,
            h_delta: 2.0,
            phi_fov_deg: 60.0,
            theta_half_deg: 60.0,
            fill_factor: 0.75,
            r_th: 1.0e6,
            pl_exponent: 1.8,
            d0: 1.0,
        }
    }
}

impl SystemParams {
    /// Returns every violated invariant; empty when the parameters are valid.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let positives = [
            ("p_led", self.p_led),
            ("eta", self.eta),
            ("i_min", self.i_min),
            ("b_vlc", self.b_vlc),
            ("b_rf", self.b_rf),
            ("v_t", self.v_t),
            ("i_0", self.i_0),
            ("q_e", self.q_e),
            ("i_amb", self.i_amb),
            ("a_p", self.a_p),
            ("h_delta", self.h_delta),
            ("d0", self.d0),
        ];
        for (name, value) in positives {
            if !(value > 0.0 && value.is_finite()) {
                errs.push(format!("{name} must be strictly positive, got {value}"));
            }
        }
        if !(self.i_min < self.i_max) {
            errs.push(format!(
                "i_min < i_max violated (i_min = {}, i_max = {})",
                self.i_min, self.i_max
            ));
        }
        if !(self.theta_half_deg > 0.0 && self.theta_half_deg < 90.0) {
            errs.push(format!(
                "theta_half_deg must lie strictly inside (0, 90), got {} (Lambertian order undefined)",
                self.theta_half_deg
            ));
        }
        if !(self.phi_fov_deg > 0.0 && self.phi_fov_deg <= 90.0) {
            errs.push(format!(
                "phi_fov_deg must lie in (0, 90], got {}",
                self.phi_fov_deg
            ));
        }
        if !(self.fill_factor > 0.0 && self.fill_factor <= 1.0) {
            errs.push(format!(
                "fill_factor must lie in (0, 1], got {}",
                self.fill_factor
            ));
        }
        if !(self.r_th >= 0.0 && self.r_th.is_finite()) {
            errs.push(format!("r_th must be non-negative, got {}", self.r_th));
        }
        if !(1.0..=3.0).contains(&self.pl_exponent) {
            errs.push(format!(
                "pl_exponent must lie in [1.0, 3.0], got {}",
                self.pl_exponent
            ));
        }
        errs
    }

    /// Validation as a `Result`, collecting every violation.
    pub fn validated(self) -> Result<Self, InvalidConfig> {
        let errs = self.validate();
        if errs.is_empty() {
            Ok(self)
        } else {
            Err(InvalidConfig(errs))
        }
    }
}

/// Iteration caps and tolerances of the per-block solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Stop the MM bias loop once the bias moves less than this, A.
    pub mm_tol: f64,
    /// Hard cap on MM iterations.
    pub mm_max_iter: usize,
    /// Stop alternating once the relative objective improvement drops below this.
    pub alt_rel_tol: f64,
    /// Hard cap on alternation cycles.
    pub alt_max_cycles: usize,
    /// Absolute tolerance of the 1-D searches, on the time split and on the
    /// normalized bias coordinate.
    pub line_search_tol: f64,
    /// Grid points per axis used by the brute-force oracle.
    pub oracle_grid: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            mm_tol: 1.0e-9,
            mm_max_iter: 100,
            alt_rel_tol: 1.0e-6,
            alt_max_cycles: 50,
            line_search_tol: 1.0e-9,
            oracle_grid: 201,
        }
    }
}

impl SolverSettings {
    /// Returns every violated invariant; empty when the settings are valid.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        for (name, value) in [
            ("mm_tol", self.mm_tol),
            ("alt_rel_tol", self.alt_rel_tol),
            ("line_search_tol", self.line_search_tol),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                errs.push(format!("{name} must be strictly positive, got {value}"));
            }
        }
        if self.mm_max_iter < 1 {
            errs.push("mm_max_iter must be at least 1".into());
        }
        if self.alt_max_cycles < 1 {
            errs.push("alt_max_cycles must be at least 1".into());
        }
        if self.oracle_grid < 3 {
            errs.push(format!(
                "oracle_grid must be at least 3, got {}",
                self.oracle_grid
            ));
        }
        errs
    }

    /// Validation as a `Result`, collecting every violation.
    pub fn validated(self) -> Result<Self, InvalidConfig> {
        let errs = self.validate();
        if errs.is_empty() {
            Ok(self)
        } else {
            Err(InvalidConfig(errs))
        }
    }
}
