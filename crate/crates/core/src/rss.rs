//! Received signal strength models.
//!
//! Free-space (Friis) power in watts, and the log-distance model with
//! log-normal shadowing in dBm. A detection threshold on the log-distance
//! model maps to an effective disk radius for the binary sensing model.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RssError {
    #[error("distance must be finite and > 0, got {0}")]
    InvalidDistance(f64),
    #[error("invalid parameter {name} = {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("threshold {threshold_dbm} dBm exceeds the reference power {p_d0_dbm} dBm")]
    ThresholdAboveReference { threshold_dbm: f64, p_d0_dbm: f64 },
}

fn check(name: &'static str, value: f64, ok: bool) -> Result<(), RssError> {
    if value.is_finite() && ok {
        Ok(())
    } else {
        Err(RssError::InvalidParam { name, value })
    }
}

fn check_distance(d: f64) -> Result<(), RssError> {
    if d.is_finite() && d > 0.0 {
        Ok(())
    } else {
        Err(RssError::InvalidDistance(d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FriisParams {
    /// Watts.
    pub tx_power: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
    /// Meters.
    pub wavelength: f64,
}

impl FriisParams {
    pub fn new(
        tx_power: f64,
        tx_gain: f64,
        rx_gain: f64,
        wavelength: f64,
    ) -> Result<Self, RssError> {
        check("tx_power", tx_power, tx_power >= 0.0)?;
        check("tx_gain", tx_gain, tx_gain >= 0.0)?;
        check("rx_gain", rx_gain, rx_gain >= 0.0)?;
        check("wavelength", wavelength, wavelength > 0.0)?;
        Ok(Self {
            tx_power,
            tx_gain,
            rx_gain,
            wavelength,
        })
    }
}

/// Free-space received power `P_t G_t G_r (λ / 4πd)²` in watts.
pub fn friis_received_power(p: &FriisParams, d: f64) -> Result<f64, RssError> {
    check_distance(d)?;
    let ratio = p.wavelength / (4.0 * PI * d);
    Ok(p.tx_power * p.tx_gain * p.rx_gain * ratio * ratio)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossParams {
    /// Received power at the reference distance, dBm.
    pub p_d0_dbm: f64,
    pub d0: f64,
    /// Path-loss exponent.
    pub gamma: f64,
    /// Shadow-fading standard deviation, dB.
    pub sigma: f64,
}

impl PathLossParams {
    pub fn new(p_d0_dbm: f64, d0: f64, gamma: f64, sigma: f64) -> Result<Self, RssError> {
        check("p_d0_dbm", p_d0_dbm, true)?;
        check("d0", d0, d0 > 0.0)?;
        check("gamma", gamma, gamma > 0.0)?;
        check("sigma", sigma, sigma >= 0.0)?;
        Ok(Self {
            p_d0_dbm,
            d0,
            gamma,
            sigma,
        })
    }
}

/// Log-distance received power in dBm with a caller-supplied shadowing term.
pub fn rss_at(p: &PathLossParams, d: f64, shadow_db: f64) -> Result<f64, RssError> {
    check_distance(d)?;
    Ok(p.p_d0_dbm - 10.0 * p.gamma * (d / p.d0).log10() + shadow_db)
}

/// One zero-mean Gaussian shadowing draw with standard deviation `sigma` dB.
pub fn sample_shadow<R: Rng + ?Sized>(p: &PathLossParams, rng: &mut R) -> f64 {
    if p.sigma == 0.0 {
        return 0.0;
    }
    // sigma validated finite and positive at construction
    Normal::new(0.0, p.sigma)
        .expect("validated sigma")
        .sample(rng)
}

/// Distance at which the unshadowed received power equals `threshold_dbm`.
pub fn radius_from_threshold(p: &PathLossParams, threshold_dbm: f64) -> Result<f64, RssError> {
    check("threshold_dbm", threshold_dbm, true)?;
    if threshold_dbm > p.p_d0_dbm {
        return Err(RssError::ThresholdAboveReference {
            threshold_dbm,
            p_d0_dbm: p.p_d0_dbm,
        });
    }
    Ok(p.d0 * 10f64.powf((p.p_d0_dbm - threshold_dbm) / (10.0 * p.gamma)))
}

/// Binary detection over one link with a fresh shadowing draw.
///
/// With `sigma = 0` this is exactly `d < radius_from_threshold(p, threshold_dbm)`.
pub fn detects_shadowed<R: Rng + ?Sized>(
    p: &PathLossParams,
    threshold_dbm: f64,
    d: f64,
    rng: &mut R,
) -> Result<bool, RssError> {
    let shadow = sample_shadow(p, rng);
    if d == 0.0 {
        return Ok(true);
    }
    Ok(rss_at(p, d, shadow)? > threshold_dbm)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1000.0).log10()
}
