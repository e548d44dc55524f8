//! Deterministic channel quantities and fading.
//!
//! Computes the Lambertian optical DC gain of the first hop, the shot-noise
//! power at the photodiode, the RF path loss and noise floor of the second
//! hop, and bundles them into the per-realization coefficients the optimizer
//! consumes. Rayleigh fading on the RF hop is drawn as a unit-mean
//! exponential power gain, one draw per transmission block.

use std::f64::consts::{E, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{SystemParams, SPEED_OF_LIGHT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    /// The Lambertian order is undefined at 0° and 90°.
    #[error("half-power beamwidth must lie strictly inside (0, 90) degrees, got {0}")]
    BeamwidthOutOfRange(f64),
    /// The log-distance path-loss model is invalid inside the reference distance.
    #[error("user distance {d_u} m is inside the path-loss reference distance {d0} m")]
    InsideReferenceDistance { d_u: f64, d0: f64 },
}

/// One geometry/fading realization; fully determines a channel state.
///
/// `d_r` is the horizontal AP-to-relay distance and `d_u` the horizontal
/// AP-to-user distance. `h_rf_sq` is the Rayleigh power gain `|h_RF|²` of the
/// relay-to-user hop, unit mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Relay horizontal distance, m.
    pub d_r: f64,
    /// User horizontal distance, m.
    pub d_u: f64,
    /// RF carrier frequency, Hz.
    pub f_c: f64,
    /// Fading power gain `|h_RF|²`, dimensionless.
    pub h_rf_sq: f64,
}

/// Derived quantities for one channel realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelState {
    /// Optical DC channel gain, dimensionless.
    pub h_vlc: f64,
    /// Shot-noise power at the photodiode, W.
    pub sigma2_vlc: f64,
    /// RF path loss (divides received power), dimensionless.
    pub g_rf: f64,
    /// RF noise power, W.
    pub n0_w: f64,
    /// VLC SNR coefficient: `e (η P_LED H_VLC)² / (2π σ²_VLC)`, 1/A².
    pub alpha: f64,
    /// Optical-to-electrical current conversion `η H_VLC P_LED`, dimensionless.
    pub beta: f64,
    /// RF SNR per watt of transmit power: `|h_RF|² / (G_RF N₀)`, 1/W.
    pub zeta: f64,
    /// Harvesting coefficient `fill · η H_VLC P_LED · V_t`, V.
    pub f_coef: f64,
}

/// Lambertian order `m = -1 / log₂(cos Θ)` of the LED radiation pattern.
pub fn lambertian_order(theta_half_deg: f64) -> Result<f64, ChannelError> {
    if !(theta_half_deg > 0.0 && theta_half_deg < 90.0) {
        return Err(ChannelError::BeamwidthOutOfRange(theta_half_deg));
    }
    Ok(-1.0 / theta_half_deg.to_radians().cos().log2())
}

/// Optical DC channel gain of the LED-to-relay link.
///
/// The LED points straight down and the relay photodiode straight up, so the
/// irradiance and incidence angles are both `atan(d_r / h_Δ)`:
///
/// `H = (m+1) A_p / (2π (h_Δ² + d_r²)) · cosᵐ(φ) cos(θ)` inside the
/// field of view, and exactly zero outside it.
pub fn vlc_channel_gain(scenario: &Scenario, params: &SystemParams) -> Result<f64, ChannelError> {
    let m = lambertian_order(params.theta_half_deg)?;
    let angle = (scenario.d_r / params.h_delta).atan();
    if angle.to_degrees().abs() > params.phi_fov_deg {
        return Ok(0.0);
    }
    let dist_sq = params.h_delta * params.h_delta + scenario.d_r * scenario.d_r;
    let cos = angle.cos();
    Ok((m + 1.0) * params.a_p / (2.0 * PI * dist_sq) * cos.powf(m) * cos)
}

/// Shot-noise power at the photodiode: `σ²_VLC = q_e I_amb B_VLC`, W.
pub fn vlc_noise_power(params: &SystemParams) -> f64 {
    params.q_e * params.i_amb * params.b_vlc
}

/// Log-distance RF path loss `(4π d₀/λ)² (d_u/d₀)^β` with `λ = c / f_c`.
///
/// Returns the loss factor that divides the received power; at least 1 for
/// distances beyond `d₀` at practical frequencies.
pub fn rf_path_loss(d_u: f64, f_c: f64, params: &SystemParams) -> Result<f64, ChannelError> {
    if d_u < params.d0 {
        return Err(ChannelError::InsideReferenceDistance { d_u, d0: params.d0 });
    }
    let lambda = SPEED_OF_LIGHT / f_c;
    let reference = 4.0 * PI * params.d0 / lambda;
    Ok(reference * reference * (d_u / params.d0).powf(params.pl_exponent))
}

/// RF noise power: `N₀ = P₀ + 10 log₁₀(B_RF) + N_F` in dBm, converted to W.
pub fn rf_noise_power(params: &SystemParams) -> f64 {
    let n0_dbm = params.p0_dbm_per_hz + 10.0 * params.b_rf.log10() + params.nf_db;
    1.0e-3 * 10f64.powf(n0_dbm / 10.0)
}

/// Draws the Rayleigh power gain `|h_RF|²` from the unit-mean exponential
/// distribution by inversion: `-ln(1 - u)` with `u` uniform on [0, 1).
pub fn sample_fading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln()
}

/// Assembles the full channel state for one scenario.
pub fn build_channel(scenario: &Scenario, params: &SystemParams) -> Result<ChannelState, ChannelError> {
    let h_vlc = vlc_channel_gain(scenario, params)?;
    let sigma2_vlc = vlc_noise_power(params);
    let g_rf = rf_path_loss(scenario.d_u, scenario.f_c, params)?;
    let n0_w = rf_noise_power(params);
    let beta = params.eta * h_vlc * params.p_led;
    Ok(ChannelState {
        h_vlc,
        sigma2_vlc,
        g_rf,
        n0_w,
        alpha: E * beta * beta / (2.0 * PI * sigma2_vlc),
        beta,
        zeta: scenario.h_rf_sq / (g_rf * n0_w),
        f_coef: params.fill_factor * beta * params.v_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn scenario(d_r: f64, d_u: f64, f_c: f64, h2: f64) -> Scenario {
        Scenario {
            d_r,
            d_u,
            f_c,
            h_rf_sq: h2,
        }
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn lambertian_order_reference_angles() {
        // cos 60° = 1/2 so log2 = -1; cos 45° gives log2 = -1/2.
        assert!(rel_err(lambertian_order(60.0).unwrap(), 1.0) < 1e-12);
        assert!(rel_err(lambertian_order(45.0).unwrap(), 2.0) < 1e-12);
        // -ln 2 / ln(cos 30°), evaluated independently.
        let expected = -std::f64::consts::LN_2 / 0.866_025_403_784_438_6_f64.ln();
        assert!(rel_err(lambertian_order(30.0).unwrap(), expected) < 1e-12);
        assert!((lambertian_order(30.0).unwrap() - 4.8188).abs() < 1e-4);
    }

    #[test]
    fn lambertian_order_domain_errors() {
        assert!(lambertian_order(0.0).is_err());
        assert!(lambertian_order(90.0).is_err());
        assert!(lambertian_order(-10.0).is_err());
    }

    #[test]
    fn optical_gain_nadir_and_offset() {
        let p = SystemParams::default();
        // Directly below the AP: m = 1, both cosines are 1, so
        // H = 2 A_p / (2π h²) = 1e-4 / (4π).
        let h0 = vlc_channel_gain(&scenario(0.0, 4.0, 2.4e9, 1.0), &p).unwrap();
        assert!(rel_err(h0, 1.0e-4 / (4.0 * PI)) < 1e-12);
        assert!((h0 - 7.9577e-6).abs() / 7.9577e-6 < 1e-4);

        // d_r = 2 m puts both angles at 45°: H = 2e-4 / (2π·8) · cos²45°.
        let h2 = vlc_channel_gain(&scenario(2.0, 4.0, 2.4e9, 1.0), &p).unwrap();
        assert!(rel_err(h2, 2.0e-4 / (2.0 * PI * 8.0) * 0.5) < 1e-12);
        assert!((h2 - 1.9894e-6).abs() / 1.9894e-6 < 1e-4);
    }

    #[test]
    fn optical_gain_zero_outside_fov() {
        let p = SystemParams::default();
        // tan 70° · h_Δ ≈ 5.49 m puts the incidence angle past the 60° FoV.
        let d_r = 2.0 * 70f64.to_radians().tan();
        assert_eq!(vlc_channel_gain(&scenario(d_r, 4.0, 2.4e9, 1.0), &p).unwrap(), 0.0);
    }

    #[test]
    fn shot_noise_product_and_linearity() {
        let p = SystemParams::default();
        let s2 = vlc_noise_power(&p);
        assert!(rel_err(s2, 1.6e-19 * 5.84e-3 * 1.0e7) < 1e-12);
        assert!(rel_err(s2, 9.344e-15) < 1e-4);
        let doubled = SystemParams {
            i_amb: 2.0 * p.i_amb,
            ..p
        };
        assert!(rel_err(vlc_noise_power(&doubled), 2.0 * s2) < 1e-12);
    }

    #[test]
    fn path_loss_reference_values() {
        let p = SystemParams::default();
        // At the reference distance only the wavelength factor remains.
        let g1 = rf_path_loss(1.0, 2.4e9, &p).unwrap();
        let lambda = SPEED_OF_LIGHT / 2.4e9;
        let expected = (4.0 * PI / lambda).powi(2);
        assert!(rel_err(g1, expected) < 1e-12);
        assert!((g1 - 1.0120e4).abs() / 1.0120e4 < 1e-4);

        let g4 = rf_path_loss(4.0, 2.4e9, &p).unwrap();
        assert!(rel_err(g4, expected * 4f64.powf(1.8)) < 1e-12);
        assert!((g4 - 1.2272e5).abs() / 1.2272e5 < 1e-4);
    }

    #[test]
    fn path_loss_frequency_scaling_and_domain() {
        let p = SystemParams::default();
        let g24 = rf_path_loss(4.0, 2.4e9, &p).unwrap();
        let g5 = rf_path_loss(4.0, 5.0e9, &p).unwrap();
        assert!(rel_err(g5 / g24, (5.0 / 2.4) * (5.0 / 2.4)) < 1e-12);
        assert!(matches!(
            rf_path_loss(0.5, 2.4e9, &p),
            Err(ChannelError::InsideReferenceDistance { .. })
        ));
    }

    #[test]
    fn noise_floor_dbm_arithmetic() {
        let p = SystemParams::default();
        // -174 + 70 + 9 = -95 dBm.
        let n0 = rf_noise_power(&p);
        assert!(rel_err(n0, 1.0e-3 * 10f64.powf(-9.5)) < 1e-12);
        assert!((n0 - 3.1623e-13).abs() / 3.1623e-13 < 1e-4);

        let no_nf = SystemParams { nf_db: 0.0, ..p };
        assert!(rel_err(rf_noise_power(&no_nf), 1.0e-3 * 10f64.powf(-10.4)) < 1e-12);

        let wide = SystemParams {
            b_rf: 1.0e8,
            ..p
        };
        assert!(rel_err(rf_noise_power(&wide) / n0, 10.0) < 1e-12);
    }

    #[test]
    fn fading_is_unit_mean_nonnegative_reproducible() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let h = sample_fading(&mut rng);
            assert!(h >= 0.0);
            sum += h;
        }
        let mean = sum / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "sample mean {mean}");

        let mut a = ChaCha12Rng::seed_from_u64(7);
        let mut b = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..32 {
            assert_eq!(sample_fading(&mut a), sample_fading(&mut b));
        }
    }

    #[test]
    fn channel_state_internal_consistency() {
        let p = SystemParams::default();
        let sc = scenario(0.0, 4.0, 2.4e9, 1.0);
        let ch = build_channel(&sc, &p).unwrap();

        assert!(rel_err(ch.beta, 0.4 * ch.h_vlc * 1.5) < 1e-12);
        assert!((ch.beta - 4.7746e-6).abs() / 4.7746e-6 < 1e-4);

        let alpha_ref = E * (p.eta * p.p_led * ch.h_vlc).powi(2) / (2.0 * PI * ch.sigma2_vlc);
        assert!(rel_err(ch.alpha, alpha_ref) < 1e-12);
        assert!((ch.alpha - 1.0555e3).abs() / 1.0555e3 < 1e-4);

        let zeta_ref = sc.h_rf_sq / (ch.g_rf * ch.n0_w);
        assert!(rel_err(ch.zeta, zeta_ref) < 1e-12);

        let f_ref = 0.75 * p.eta * ch.h_vlc * p.p_led * p.v_t;
        assert!(rel_err(ch.f_coef, f_ref) < 1e-12);
    }

    #[test]
    fn zero_fading_zero_zeta() {
        let p = SystemParams::default();
        let ch = build_channel(&scenario(0.0, 4.0, 2.4e9, 0.0), &p).unwrap();
        assert_eq!(ch.zeta, 0.0);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// The optical gain never increases with relay distance inside
            /// the field of view, and vanishes beyond it.
            #[test]
            fn gain_monotone_in_relay_distance(a in 0.0_f64..3.4, b in 0.0_f64..3.4) {
                let p = SystemParams::default();
                let (near, far) = if a <= b { (a, b) } else { (b, a) };
                let gn = vlc_channel_gain(&scenario(near, 4.0, 2.4e9, 1.0), &p).unwrap();
                let gf = vlc_channel_gain(&scenario(far, 4.0, 2.4e9, 1.0), &p).unwrap();
                prop_assert!(gn >= gf);
            }

            #[test]
            fn gain_zero_beyond_fov(d in 0.0_f64..10.0) {
                let p = SystemParams::default();
                let g = vlc_channel_gain(&scenario(d, 4.0, 2.4e9, 1.0), &p).unwrap();
                let fov_edge = p.h_delta * p.phi_fov_deg.to_radians().tan();
                if d > fov_edge + 1e-9 {
                    prop_assert_eq!(g, 0.0);
                } else {
                    prop_assert!(g > 0.0);
                }
            }

            /// Path loss grows strictly with distance and carrier frequency.
            #[test]
            fn path_loss_strictly_increasing(
                d1 in 1.0_f64..20.0,
                d2 in 1.0_f64..20.0,
                f1 in 1.0e9_f64..6.0e9,
                f2 in 1.0e9_f64..6.0e9,
            ) {
                let p = SystemParams::default();
                if d1 != d2 {
                    let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
                    prop_assert!(
                        rf_path_loss(lo, f1, &p).unwrap() < rf_path_loss(hi, f1, &p).unwrap()
                    );
                }
                if f1 != f2 {
                    let (lo, hi) = if f1 < f2 { (f1, f2) } else { (f2, f1) };
                    prop_assert!(
                        rf_path_loss(d1, lo, &p).unwrap() < rf_path_loss(d1, hi, &p).unwrap()
                    );
                }
            }
        }
    }
}
