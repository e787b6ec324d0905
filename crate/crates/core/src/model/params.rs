use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Structural calibration of the economy.
///
/// Field names serialize to the conventional symbol names (`A`, `sd_R`, ...)
/// so a flat `key = value` file reads like the calibration table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Quarterly discount factor.
    pub beta: f64,
    /// Inverse intertemporal elasticity (consumption and money).
    pub sigma: f64,
    /// Curvature of production, `y = n^(1 - eta)`.
    pub eta: f64,
    /// Inverse Frisch elasticity.
    pub phi: f64,
    /// Weight of real balances in utility.
    pub chi: f64,
    /// Intercept of the tax rule.
    pub gamma0: f64,
    /// Tax response to last period's real debt.
    pub gamma: f64,
    /// Slope coefficient of the global Taylor rule.
    #[serde(rename = "A")]
    pub a: f64,
    /// Gross inflation target.
    pub pi_star: f64,
    pub sd_tau: f64,
    #[serde(rename = "sd_R")]
    pub sd_r: f64,
    pub sd_y: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::baseline()
    }
}

impl ModelParams {
    /// Baseline quarterly calibration with passive fiscal policy
    /// (`gamma = 0.02`) and the intercept that puts steady-state debt at
    /// four quarters of output around the inflation target.
    pub fn baseline() -> Self {
        ModelParams {
            beta: 0.99,
            sigma: 3.0,
            eta: 0.001,
            phi: 1.0,
            chi: 0.1,
            gamma0: -0.0566,
            gamma: 0.02,
            a: 1.3,
            pi_star: 1.01,
            sd_tau: 0.0005,
            sd_r: 0.0005,
            sd_y: 0.0005,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        let all = [
            self.beta,
            self.sigma,
            self.eta,
            self.phi,
            self.chi,
            self.gamma0,
            self.gamma,
            self.a,
            self.pi_star,
            self.sd_tau,
            self.sd_r,
            self.sd_y,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("all parameters must be finite");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta must lie in (0, 1)");
        }
        if self.sigma <= 0.0 {
            return bad("sigma must be positive");
        }
        if !(0.0..1.0).contains(&self.eta) {
            return bad("eta must lie in [0, 1)");
        }
        if self.phi <= 0.0 {
            return bad("phi must be positive");
        }
        if self.chi <= 0.0 {
            return bad("chi must be positive");
        }
        if self.a <= 1.0 {
            return bad("A must exceed 1");
        }
        if self.pi_star <= 1.0 {
            return bad("pi_star must exceed 1");
        }
        if !(0.0..=1.0 / self.beta).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1/beta]");
        }
        if self.sd_tau < 0.0 || self.sd_r < 0.0 || self.sd_y < 0.0 {
            return bad("shock standard deviations must be non-negative");
        }
        Ok(())
    }

    /// Gross nominal rate at the inflation target, `R* = pi*/beta`.
    pub fn r_star(&self) -> f64 {
        self.pi_star / self.beta
    }

    /// Exponent of the Taylor rule power function, `A R* / (R* - 1)`.
    pub fn taylor_exponent(&self) -> f64 {
        let r = self.r_star();
        self.a * r / (r - 1.0)
    }

    /// Debt-stabilizing threshold `1/beta - 1` separating active from
    /// passive fiscal policy.
    pub fn fiscal_threshold(&self) -> f64 {
        1.0 / self.beta - 1.0
    }

    /// Parse a flat `key = value` file whose keys are exactly the field
    /// names (`beta`, `sigma`, ..., `A`, `pi_star`, `sd_tau`, `sd_R`, `sd_y`).
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let p: ModelParams =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_kv_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv_str(&text)
    }

    pub fn to_kv_string(&self) -> String {
        toml::to_string(self).expect("flat struct of floats always serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_is_valid() {
        ModelParams::baseline().validate().unwrap();
    }

    #[test]
    fn kv_round_trip_uses_symbol_names() {
        let p = ModelParams::baseline();
        let text = p.to_kv_string();
        assert!(text.contains("A = 1.3"));
        assert!(text.contains("sd_R = "));
        assert_eq!(ModelParams::from_kv_str(&text).unwrap(), p);
    }

    #[test]
    fn unknown_or_missing_keys_are_rejected_with_the_key_name() {
        let text = ModelParams::baseline().to_kv_string().replace("chi", "khi");
        let err = ModelParams::from_kv_str(&text).unwrap_err().to_string();
        assert!(err.contains("khi") || err.contains("chi"), "{err}");
    }

    #[test]
    fn invariant_violations() {
        let mut p = ModelParams::baseline();
        p.a = 0.9;
        assert!(p.validate().is_err());
        let mut p = ModelParams::baseline();
        p.gamma = 1.5;
        assert!(p.validate().is_err());
        let mut p = ModelParams::baseline();
        p.eta = 1.0;
        assert!(p.validate().is_err());
    }
}
