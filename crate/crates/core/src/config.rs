//! Scenario parameters.
//!
//! The on-disk form is a flat TOML table whose keys are the field names
//! below; the array dimensions use their conventional single-letter names
//! (`L`, `N`, `K`, `n`, `T`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All scenario parameters for one simulated network.
///
/// Large-scale gains are expressed relative to the receiver noise floor, so
/// `rho_f / noise_var` is the transmit SNR and `beta * rho_f / noise_var` the
/// per-link receive SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    /// Number of access points.
    #[serde(rename = "L")]
    pub aps: usize,
    /// Antennas per access point.
    #[serde(rename = "N")]
    pub antennas_per_ap: usize,
    /// Number of single-antenna UEs.
    #[serde(rename = "K")]
    pub ues: usize,
    /// UEs scheduled per timeslot.
    #[serde(rename = "n")]
    pub per_slot: usize,
    pub area_side_m: f64,
    /// Transmit power scaling (linear).
    pub rho_f: f64,
    /// Noise variance (linear).
    pub noise_var: f64,
    /// CSI error fraction; the estimate carries `1 - tau^2` of each link's gain.
    pub csi_tau: f64,
    pub shadow_sigma_db: f64,
    pub seed: u64,
    /// Timeslots per frame; `ceil(K / n)` when absent.
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub timeslots: Option<usize>,

    /// Inner path-loss breakpoint.
    pub d0_m: f64,
    /// Outer path-loss breakpoint; shadowing applies beyond it.
    pub d1_m: f64,
    /// Path-loss constant at 1 km in dB, net of the noise floor. The default is
    /// the 1.9 GHz Hata constant (140.7 dB) against a -122 dBW noise floor
    /// (20 MHz, 9 dB noise figure), so `rho_f = 1` corresponds to 1 W.
    pub pl_constant_db: f64,
    /// Total precoder power `P` in the Frobenius constraint.
    pub power_budget: f64,
    /// Exponent applied to `rho_f` in the per-link rate; 0.5 or 1.
    pub rate_formula_power_exponent: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            aps: 16,
            antennas_per_ap: 4,
            ues: 128,
            per_slot: 20,
            area_side_m: 400.0,
            rho_f: 1.0,
            noise_var: 1.0,
            csi_tau: 0.1,
            shadow_sigma_db: 8.0,
            seed: 0,
            timeslots: None,
            d0_m: 10.0,
            d1_m: 50.0,
            pl_constant_db: 140.7 - 122.0,
            power_budget: 1.0,
            rate_formula_power_exponent: 0.5,
        }
    }
}

impl NetworkConfig {
    /// Parses and validates a flat TOML config. Missing keys take defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.aps == 0 || self.antennas_per_ap == 0 || self.ues == 0 {
            return bad(format!(
                "L, N and K must be >= 1 (got L={}, N={}, K={})",
                self.aps, self.antennas_per_ap, self.ues
            ));
        }
        if self.per_slot == 0 || self.per_slot > self.antennas() {
            return bad(format!(
                "n must satisfy 1 <= n <= L*N = {} (got {})",
                self.antennas(),
                self.per_slot
            ));
        }
        if !(self.area_side_m >= 0.0 && self.area_side_m.is_finite()) {
            return bad(format!(
                "area_side_m must be >= 0 (got {})",
                self.area_side_m
            ));
        }
        if !(self.rho_f > 0.0 && self.rho_f.is_finite()) {
            return bad(format!("rho_f must be > 0 (got {})", self.rho_f));
        }
        if !(self.noise_var > 0.0 && self.noise_var.is_finite()) {
            return bad(format!("noise_var must be > 0 (got {})", self.noise_var));
        }
        if !(0.0..=1.0).contains(&self.csi_tau) {
            return bad(format!("csi_tau must lie in [0, 1] (got {})", self.csi_tau));
        }
        if !(self.shadow_sigma_db >= 0.0 && self.shadow_sigma_db.is_finite()) {
            return bad(format!(
                "shadow_sigma_db must be >= 0 (got {})",
                self.shadow_sigma_db
            ));
        }
        if !(self.d0_m > 0.0 && self.d1_m > self.d0_m && self.d1_m.is_finite()) {
            return bad(format!(
                "breakpoints must satisfy 0 < d0_m < d1_m (got {}, {})",
                self.d0_m, self.d1_m
            ));
        }
        if !self.pl_constant_db.is_finite() {
            return bad("pl_constant_db must be finite".into());
        }
        if !(self.power_budget > 0.0 && self.power_budget.is_finite()) {
            return bad(format!(
                "power_budget must be > 0 (got {})",
                self.power_budget
            ));
        }
        if self.rate_formula_power_exponent != 0.5 && self.rate_formula_power_exponent != 1.0 {
            return bad(format!(
                "rate_formula_power_exponent must be 0.5 or 1 (got {})",
                self.rate_formula_power_exponent
            ));
        }
        if self.timeslots == Some(0) {
            return bad("T must be >= 1".into());
        }
        Ok(())
    }

    /// Total transmit antennas `M = L * N`.
    pub fn antennas(&self) -> usize {
        self.aps * self.antennas_per_ap
    }

    /// Frame length, defaulting to `ceil(K / n)`.
    pub fn frame_slots(&self) -> usize {
        self.timeslots
            .unwrap_or_else(|| self.ues.div_ceil(self.per_slot))
    }

    /// Copy with `rho_f` set for a transmit SNR of `snr_db` over `noise_var`.
    pub fn at_snr_db(&self, snr_db: f64) -> Self {
        Self {
            rho_f: self.noise_var * 10f64.powf(snr_db / 10.0),
            ..self.clone()
        }
    }

    /// Scaling applied to `rho_f` inside the per-link rate.
    pub fn link_rate_power(&self) -> f64 {
        self.rho_f.powf(self.rate_formula_power_exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        let cfg = NetworkConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.antennas(), 64);
        assert_eq!(cfg.frame_slots(), 7);
    }

    #[test]
    fn toml_round_trip_uses_letter_keys() {
        let text = "L = 2\nN = 1\nK = 3\nn = 2\ncsi_tau = 0.3\nT = 4\n";
        let cfg = NetworkConfig::from_toml_str(text).unwrap();
        assert_eq!(
            (cfg.aps, cfg.antennas_per_ap, cfg.ues, cfg.per_slot),
            (2, 1, 3, 2)
        );
        assert_eq!(cfg.timeslots, Some(4));
        let again = NetworkConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "K = 0",
            "n = 65",
            "csi_tau = 1.5",
            "noise_var = 0.0",
            "rho_f = -1.0",
            "rate_formula_power_exponent = 2.0",
            "d0_m = 60.0",
            "bogus = 1",
        ] {
            assert!(NetworkConfig::from_toml_str(text).is_err(), "{text}");
        }
    }

    #[test]
    fn snr_maps_to_rho() {
        let cfg = NetworkConfig::default().at_snr_db(20.0);
        assert!((cfg.rho_f - 100.0).abs() < 1e-9);
    }
}
