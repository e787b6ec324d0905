//! Structural equations: preferences, technology, and the two policy rules.

use super::ModelParams;
use crate::error::{Error, Result};

/// Separable per-period utility
/// `c^(1-s)/(1-s) + chi m^(1-s)/(1-s) - n^(1+phi)/(1+phi)`.
///
/// `sigma == 1` falls back to the logarithmic limit.
pub fn utility(c: f64, m: f64, n: f64, p: &ModelParams) -> Result<f64> {
    if !(c > 0.0 && m > 0.0 && n > 0.0) {
        return Err(Error::Domain(format!(
            "utility needs positive arguments, got c={c}, m={m}, n={n}"
        )));
    }
    let crra = |x: f64| {
        if (p.sigma - 1.0).abs() < 1e-12 {
            x.ln()
        } else {
            x.powf(1.0 - p.sigma) / (1.0 - p.sigma)
        }
    };
    Ok(crra(c) + p.chi * crra(m) - n.powf(1.0 + p.phi) / (1.0 + p.phi))
}

/// Marginal utilities `(U_c, U_m, U_n)` of the separable utility.
pub fn marginal_utilities(c: f64, m: f64, n: f64, p: &ModelParams) -> (f64, f64, f64) {
    (c.powf(-p.sigma), p.chi * m.powf(-p.sigma), -n.powf(p.phi))
}

/// The Taylor-rule feedback function and its derivative:
/// `f(pi) = (R* - 1)(pi/pi*)^(A R*/(R* - 1))`.
pub fn taylor_components(pi: f64, p: &ModelParams) -> (f64, f64) {
    let r_star = p.r_star();
    let k = p.taylor_exponent();
    let f = (r_star - 1.0) * (pi / p.pi_star).powf(k);
    let f_prime = f * k / pi;
    (f, f_prime)
}

/// Gross policy rate `R = 1 + eps_R f(pi)`.
pub fn taylor_rate(pi: f64, eps_r: f64, p: &ModelParams) -> f64 {
    1.0 + eps_r * taylor_components(pi, p).0
}

/// Inflation that makes the rule deliver the gross rate `r`, i.e. the
/// closed-form inverse of [`taylor_rate`]. `None` when `r <= 1`.
pub fn taylor_inverse(r: f64, eps_r: f64, p: &ModelParams) -> Option<f64> {
    let x = (r - 1.0) / eps_r;
    if !(x > 0.0) || !x.is_finite() {
        return None;
    }
    Some(p.pi_star * (x / (p.r_star() - 1.0)).powf(1.0 / p.taylor_exponent()))
}

/// Lump-sum tax `tau = gamma0 + gamma b_prev + eps_tau`.
pub fn fiscal_tax(b_prev: f64, eps_tau: f64, p: &ModelParams) -> f64 {
    p.gamma0 + p.gamma * b_prev + eps_tau
}

/// Production `y = eps_y n^(1 - eta)`.
pub fn output(n: f64, eps_y: f64, p: &ModelParams) -> f64 {
    eps_y * n.powf(1.0 - p.eta)
}

/// Competitive real wage `(1 - eta) eps_y n^(-eta)`.
pub fn wage(n: f64, eps_y: f64, p: &ModelParams) -> f64 {
    (1.0 - p.eta) * eps_y * n.powf(-p.eta)
}

/// Hours that produce output `y` with technology `eps_y`.
pub fn hours_for_output(y: f64, eps_y: f64, p: &ModelParams) -> f64 {
    (y / eps_y).powf(1.0 / (1.0 - p.eta))
}

/// Market-clearing output given technology:
/// `y^(sigma + (eta+phi)/(1-eta)) = (1-eta) eps_y^((1+phi)/(1-eta))`.
pub fn clearing_output(eps_y: f64, p: &ModelParams) -> f64 {
    let e = p.sigma + (p.eta + p.phi) / (1.0 - p.eta);
    ((1.0 - p.eta) * eps_y.powf((1.0 + p.phi) / (1.0 - p.eta))).powf(1.0 / e)
}

/// Real money demand from the household's intratemporal condition,
/// `m = chi^(1/sigma) c ((R-1)/R)^(-1/sigma)`.
pub fn money_demand(c: f64, r: f64, p: &ModelParams) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::Domain(format!("money demand needs R > 1, got {r}")));
    }
    Ok(p.chi.powf(1.0 / p.sigma) * c * ((r - 1.0) / r).powf(-1.0 / p.sigma))
}

/// Steady-state money demand written in inflation,
/// `m = y ((pi - beta)/(chi pi))^(-1/sigma)`.
pub fn steady_money_demand(pi: f64, y: f64, p: &ModelParams) -> Result<f64> {
    if !(pi > p.beta) {
        return Err(Error::Domain(format!(
            "steady-state money demand needs pi > beta, got pi={pi}"
        )));
    }
    Ok(y * ((pi - p.beta) / (p.chi * pi)).powf(-1.0 / p.sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_argument_utility() {
        let p = ModelParams::baseline();
        assert_relative_eq!(utility(1.0, 1.0, 1.0, &p).unwrap(), -1.05, epsilon = 1e-15);
    }

    #[test]
    fn utility_rejects_non_positive_arguments() {
        let p = ModelParams::baseline();
        assert!(matches!(utility(0.0, 1.0, 1.0, &p), Err(Error::Domain(_))));
        assert!(matches!(utility(1.0, -1.0, 1.0, &p), Err(Error::Domain(_))));
        assert!(matches!(utility(1.0, 1.0, 0.0, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn utility_at_reported_money_levels() {
        let p = ModelParams::baseline();
        assert!((utility(1.0, 1.7157, 1.0, &p).unwrap() - -1.0170).abs() < 5e-4);
        assert!((utility(1.0, 2.0614, 1.0, &p).unwrap() - -1.0118).abs() < 5e-4);
    }

    #[test]
    fn taylor_rule_at_target() {
        let p = ModelParams::baseline();
        let (f, fp) = taylor_components(p.pi_star, &p);
        assert_relative_eq!(f, p.r_star() - 1.0, epsilon = 1e-15);
        assert_relative_eq!(fp, p.a / p.beta, epsilon = 1e-12);
        assert_relative_eq!(
            taylor_rate(p.pi_star, 1.0, &p),
            1.01 / 0.99,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            taylor_rate(p.pi_star, 0.5, &p),
            1.0 + 0.5 * (p.r_star() - 1.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn taylor_rule_vanishes_at_zero_inflation() {
        let p = ModelParams::baseline();
        let (f, _) = taylor_components(1e-6, &p);
        assert!(f < 1e-100);
    }

    #[test]
    fn taylor_derivative_matches_central_difference() {
        let p = ModelParams::baseline();
        for &pi in &[0.995, 1.0, 1.0014, 1.01, 1.02] {
            let h = 1e-7;
            let fd =
                (taylor_components(pi + h, &p).0 - taylor_components(pi - h, &p).0) / (2.0 * h);
            assert_relative_eq!(taylor_components(pi, &p).1, fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn taylor_inverse_round_trip() {
        let p = ModelParams::baseline();
        for &pi in &[1.0001, 1.0014, 1.01, 1.03] {
            for &e in &[0.999, 1.0, 1.002] {
                let r = taylor_rate(pi, e, &p);
                assert_relative_eq!(taylor_inverse(r, e, &p).unwrap(), pi, max_relative = 1e-12);
            }
        }
        assert!(taylor_inverse(1.0, 1.0, &p).is_none());
        assert!(taylor_inverse(0.99, 1.0, &p).is_none());
    }

    #[test]
    fn tax_rule_examples() {
        let mut p = ModelParams::baseline();
        p.gamma = 0.02;
        p.gamma0 = -0.0566;
        assert_relative_eq!(fiscal_tax(4.0, 0.0, &p), 0.0234, epsilon = 1e-15);
        assert_eq!(fiscal_tax(0.0, 0.0, &p), p.gamma0);
        p.gamma = 0.0;
        p.gamma0 = 0.0234;
        assert_eq!(fiscal_tax(4.0, 0.0, &p), 0.0234);
    }

    #[test]
    fn labour_market_clears_at_clearing_output() {
        let p = ModelParams::baseline();
        for &e in &[0.99, 1.0, 1.01] {
            let y = clearing_output(e, &p);
            let n = hours_for_output(y, e, &p);
            assert_relative_eq!(output(n, e, &p), y, max_relative = 1e-14);
            // c^sigma n^phi = w with c = y
            let lhs = y.powf(p.sigma) * n.powf(p.phi);
            assert_relative_eq!(lhs, wage(n, e, &p), max_relative = 1e-12);
        }
    }
}
