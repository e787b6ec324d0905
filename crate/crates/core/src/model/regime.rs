use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::equations::taylor_components;
use super::steady::{calibrate_gamma0, compute_steady_state, solve_steady_inflation, BOUNDARY_TOL};
use super::{ModelParams, SteadyState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stance {
    Active,
    Passive,
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stance::Active => "active",
            Stance::Passive => "passive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub monetary: Stance,
    pub fiscal: Stance,
}

/// Which inflation root a regime sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// The inflation target.
    High,
    /// The low-inflation (liquidity trap) root.
    Low,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::High => "high",
            Branch::Low => "low",
        })
    }
}

/// Classify the policy mix at a steady state.
///
/// Fiscal policy is active when `gamma < 1/beta - 1`; monetary policy is
/// active when the rule responds more than one-for-one, `f'(pi) > 1`.
pub fn classify_policy(p: &ModelParams, ss: &SteadyState) -> Result<RegimeLabel> {
    let threshold = p.fiscal_threshold();
    if (p.gamma - threshold).abs() < BOUNDARY_TOL {
        return Err(Error::Boundary(format!(
            "gamma = {} sits on the fiscal threshold 1/beta - 1",
            p.gamma
        )));
    }
    let fiscal = if p.gamma < threshold {
        Stance::Active
    } else {
        Stance::Passive
    };
    let (_, slope) = taylor_components(ss.pi, p);
    let monetary = if slope > 1.0 {
        Stance::Active
    } else {
        Stance::Passive
    };
    Ok(RegimeLabel { monetary, fiscal })
}

/// Fiscal settings shared by the four policy mixes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub gamma_passive: f64,
    pub gamma_active: f64,
    /// Steady-state real debt the intercept is calibrated to hit.
    pub b_target: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            gamma_passive: 0.02,
            gamma_active: 0.0,
            b_target: 4.0,
        }
    }
}

/// The four combinations of monetary branch and fiscal stance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    AmpPfp,
    AmpAfp,
    PmpPfp,
    PmpAfp,
}

impl Regime {
    pub const ALL: [Regime; 4] = [
        Regime::AmpPfp,
        Regime::AmpAfp,
        Regime::PmpPfp,
        Regime::PmpAfp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Regime::AmpPfp => "amp-pfp",
            Regime::AmpAfp => "amp-afp",
            Regime::PmpPfp => "pmp-pfp",
            Regime::PmpAfp => "pmp-afp",
        }
    }

    pub fn branch(self) -> Branch {
        match self {
            Regime::AmpPfp | Regime::AmpAfp => Branch::High,
            Regime::PmpPfp | Regime::PmpAfp => Branch::Low,
        }
    }

    pub fn fiscal(self) -> Stance {
        match self {
            Regime::AmpPfp | Regime::PmpPfp => Stance::Passive,
            Regime::AmpAfp | Regime::PmpAfp => Stance::Active,
        }
    }

    pub fn is_amp(self) -> bool {
        self.branch() == Branch::High
    }

    pub fn gamma(self, policy: &PolicyConfig) -> f64 {
        match self.fiscal() {
            Stance::Passive => policy.gamma_passive,
            Stance::Active => policy.gamma_active,
        }
    }

    /// Parameters for this regime: `gamma` from the policy settings and
    /// `gamma0` calibrated so the steady state on this branch has
    /// `b = b_target`. Returns the parameters and that steady state.
    pub fn calibrate(
        self,
        base: &ModelParams,
        policy: &PolicyConfig,
    ) -> Result<(ModelParams, SteadyState)> {
        let mut p = *base;
        p.gamma = self.gamma(policy);
        p.validate()?;
        let pi = self.inflation(&p)?;
        p.gamma0 = calibrate_gamma0(&p, pi, policy.b_target)?;
        let ss = compute_steady_state(pi, &p)?;
        Ok((p, ss))
    }

    /// Steady-state inflation on this regime's branch.
    pub fn inflation(self, p: &ModelParams) -> Result<f64> {
        let (hi, lo) = solve_steady_inflation(p)?;
        Ok(match self.branch() {
            Branch::High => hi,
            Branch::Low => lo,
        })
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown regime `{s}`")))
    }
}
