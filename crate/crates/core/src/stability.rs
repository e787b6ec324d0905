//! Local dynamics around a steady state: determinacy and E-stability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::steady::BOUNDARY_TOL;
use crate::model::{
    classify_policy, compute_steady_state, taylor_components, Branch, ModelParams, RegimeLabel,
    Stance, SteadyState,
};

pub type Mat2 = [[f64; 2]; 2];

/// `x_t = B E_t x_{t+1} + C eps_t` for `x = (pi, b)` and
/// `eps = (eps_R, eps_tau, eps_y)`, all in deviations from steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSystem {
    pub b: Mat2,
    pub c: [[f64; 3]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Determinacy {
    Determinate,
    Indeterminate,
    Explosive,
}

impl std::fmt::Display for Determinacy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Determinacy::Determinate => "determinate",
            Determinacy::Indeterminate => "indeterminate",
            Determinacy::Explosive => "explosive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub determinacy: Determinacy,
    pub e_stable: bool,
    pub eig_bk: (f64, f64),
    pub eig_e: (f64, f64),
}

fn inv2(a: Mat2) -> Option<Mat2> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ])
}

fn mul2<const K: usize>(a: Mat2, b: [[f64; K]; 2]) -> [[f64; K]; 2] {
    let mut out = [[0.0; K]; 2];
    for i in 0..2 {
        for j in 0..K {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Real eigenvalues of a 2x2 matrix from trace and determinant, in
/// ascending order. `None` when the pair is complex.
pub fn eigenvalues2(a: Mat2) -> Option<(f64, f64)> {
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = 0.25 * tr * tr - det;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    // avoid cancellation in the smaller root
    let big = 0.5 * tr + s.copysign(tr);
    let small = if big != 0.0 { det / big } else { 0.5 * tr - s };
    Some(if big < small {
        (big, small)
    } else {
        (small, big)
    })
}

/// Linear approximation of the model around `ss`.
pub fn linearize(ss: &SteadyState, p: &ModelParams) -> Result<LinearSystem> {
    let (delta, alpha) = taylor_components(ss.pi, p);
    if alpha == 0.0 {
        return Err(Error::SingularLinearization("Taylor slope vanishes".into()));
    }
    let (pi, r, m, b, c, s) = (ss.pi, ss.r, ss.m, ss.b, ss.c, p.sigma);
    let xi = (s * (1.0 - p.eta) + p.eta + p.phi) / ((1.0 + p.phi) * c);
    let md = m / (s * r * (r - 1.0));
    let lhs: Mat2 = [
        [b * alpha / pi - md * alpha / pi, 1.0 / p.beta - p.gamma],
        [alpha, 0.0],
    ];
    let rhs: Mat2 = [
        [(m + pi * b / p.beta) / (pi * pi) - md * alpha, 1.0],
        [1.0 / p.beta, 0.0],
    ];
    let shocks = [
        [md * delta / pi - b * delta / pi, 0.0, -m / (pi * c * xi)],
        [-delta, 0.0, -s * pi / (p.beta * c * xi)],
    ];
    let inv = inv2(lhs).ok_or_else(|| {
        Error::SingularLinearization("left-hand coefficient block is singular".into())
    })?;
    let out = LinearSystem {
        b: mul2(inv, rhs),
        c: mul2(inv, shocks),
    };
    if out
        .b
        .iter()
        .flatten()
        .chain(out.c.iter().flatten())
        .any(|v| !v.is_finite())
    {
        return Err(Error::SingularLinearization(
            "non-finite coefficients".into(),
        ));
    }
    Ok(out)
}

/// Analytic eigenvalues of `B`: `1/(alpha beta)` and `1/(1/beta - gamma)`
/// with `alpha = f'(pi)`.
pub fn bk_eigenvalues(ss: &SteadyState, p: &ModelParams) -> Result<(f64, f64)> {
    let (_, alpha) = taylor_components(ss.pi, p);
    let g = 1.0 / p.beta - p.gamma;
    if g.abs() < BOUNDARY_TOL {
        return Err(Error::SingularFiscal("1/beta - gamma vanishes".into()));
    }
    if alpha == 0.0 {
        return Err(Error::SingularLinearization("Taylor slope vanishes".into()));
    }
    Ok((1.0 / (alpha * p.beta), 1.0 / g))
}

/// Eigenvalues sit on the expectation side, so two roots inside the unit
/// circle mean an explosive system and two outside an indeterminate one.
pub fn classify_determinacy(eigs: (f64, f64)) -> Result<Determinacy> {
    let mut inside = 0;
    for e in [eigs.0, eigs.1] {
        if !e.is_finite() {
            return Err(Error::SingularLinearization(format!("eigenvalue {e}")));
        }
        if (e.abs() - 1.0).abs() < BOUNDARY_TOL {
            return Err(Error::Boundary(format!(
                "eigenvalue {e} on the unit circle"
            )));
        }
        if e.abs() < 1.0 {
            inside += 1;
        }
    }
    Ok(match inside {
        1 => Determinacy::Determinate,
        2 => Determinacy::Explosive,
        _ => Determinacy::Indeterminate,
    })
}

/// Eigenvalues of `B - I` and the learnability flag.
///
/// The flag follows the regime case list: a passive fiscal rule makes the
/// high root learnable and the low root not; an active fiscal rule flips
/// both. Which root we are at is read off the sign of `ev1`, i.e. whether
/// the rule is locally steeper than the Fisher relation.
pub fn e_stability(
    ss: &SteadyState,
    p: &ModelParams,
    regime: RegimeLabel,
) -> Result<(f64, f64, bool)> {
    let (e1, e2) = bk_eigenvalues(ss, p)?;
    let (ev1, ev2) = (e1 - 1.0, e2 - 1.0);
    if ev1.abs() < BOUNDARY_TOL {
        return Err(Error::Boundary("Taylor slope equals 1/beta".into()));
    }
    let at_high = ev1 < 0.0;
    let stable = match regime.fiscal {
        Stance::Passive => at_high,
        Stance::Active => !at_high,
    };
    Ok((ev1, ev2, stable))
}

/// Everything known about the local dynamics at one steady state.
pub fn verdict(ss: &SteadyState, p: &ModelParams) -> Result<StabilityVerdict> {
    let label = classify_policy(p, ss)?;
    let eig_bk = bk_eigenvalues(ss, p)?;
    let determinacy = classify_determinacy(eig_bk)?;
    let (ev1, ev2, e_stable) = e_stability(ss, p, label)?;
    Ok(StabilityVerdict {
        determinacy,
        e_stable,
        eig_bk,
        eig_e: (ev1, ev2),
    })
}

/// One row of the regime map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeCell {
    pub gamma: f64,
    pub pi: f64,
    pub pi_branch: Branch,
    /// `None` when the cell sits on a classification boundary or the
    /// allocation at `pi` does not exist.
    pub verdict: Option<StabilityVerdict>,
}

/// Verdicts over a `gamma x pi` grid.
///
/// Each inflation rate is treated as a candidate steady state. It belongs
/// to the high branch when the rule is locally steeper than the Fisher
/// relation (`beta f'(pi) > 1`) and to the low branch otherwise.
pub fn regime_map(gamma_grid: &[f64], pi_grid: &[f64], p: &ModelParams) -> Vec<RegimeCell> {
    let mut cells = Vec::with_capacity(gamma_grid.len() * pi_grid.len());
    for &gamma in gamma_grid {
        let mut q = *p;
        q.gamma = gamma;
        for &pi in pi_grid {
            let slope = taylor_components(pi, &q).1 * q.beta;
            let pi_branch = if slope > 1.0 {
                Branch::High
            } else {
                Branch::Low
            };
            let verdict = compute_steady_state(pi, &q)
                .ok()
                .and_then(|ss| verdict(&ss, &q).ok());
            cells.push(RegimeCell {
                gamma,
                pi,
                pi_branch,
                verdict,
            });
        }
    }
    cells
}

/// Write the regime map as CSV with columns
/// `gamma, pi, pi_branch, eig1, eig2, determinacy, ev1, ev2, e_stable`;
/// boundary cells carry `boundary` in the classification columns.
pub fn write_regime_map<W: std::io::Write>(cells: &[RegimeCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "gamma",
        "pi",
        "pi_branch",
        "eig1",
        "eig2",
        "determinacy",
        "ev1",
        "ev2",
        "e_stable",
    ])?;
    for cell in cells {
        let mut rec = vec![
            format!("{}", cell.gamma),
            format!("{}", cell.pi),
            cell.pi_branch.to_string(),
        ];
        match cell.verdict {
            Some(v) => rec.extend([
                v.eig_bk.0.to_string(),
                v.eig_bk.1.to_string(),
                v.determinacy.to_string(),
                v.eig_e.0.to_string(),
                v.eig_e.1.to_string(),
                v.e_stable.to_string(),
            ]),
            None => rec.extend(["", "", "boundary", "", "", "boundary"].map(String::from)),
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<regime map>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PolicyConfig, Regime};

    #[test]
    fn closed_form_eigenvalues() {
        let m = [[2.0, 1.0], [1.0, 2.0]];
        let (a, b) = eigenvalues2(m).unwrap();
        assert!((a - 1.0).abs() < 1e-15 && (b - 3.0).abs() < 1e-15);
        assert!(eigenvalues2([[0.0, -1.0], [1.0, 0.0]]).is_none());
    }

    #[test]
    fn baseline_eigenvalues() {
        let base = ModelParams::baseline();
        let policy = PolicyConfig::default();
        let (p, ss) = Regime::AmpPfp.calibrate(&base, &policy).unwrap();
        let (e1, e2) = bk_eigenvalues(&ss, &p).unwrap();
        assert!((e1 - 1.0 / 1.3).abs() < 1e-12);
        assert!((e2 - 1.0 / (1.0 / 0.99 - 0.02)).abs() < 1e-15);
        assert_eq!(format!("{e1:.4} {e2:.4}"), "0.7692 1.0100");
        let (p, ss) = Regime::AmpAfp.calibrate(&base, &policy).unwrap();
        let (e1, e2) = bk_eigenvalues(&ss, &p).unwrap();
        assert_eq!(format!("{e1:.4} {e2:.4}"), "0.7692 0.9900");
    }

    #[test]
    fn eigenvalues_ignore_gamma0() {
        let mut p = ModelParams::baseline();
        let ss = compute_steady_state(1.01, &p).unwrap();
        let a = bk_eigenvalues(&ss, &p).unwrap();
        p.gamma0 = 0.3;
        assert_eq!(bk_eigenvalues(&ss, &p).unwrap(), a);
    }

    #[test]
    fn unit_circle_is_a_boundary() {
        assert!(matches!(
            classify_determinacy((1.0, 0.5)),
            Err(Error::Boundary(_))
        ));
        assert_eq!(
            classify_determinacy((0.5, 2.0)).unwrap(),
            Determinacy::Determinate
        );
        assert_eq!(
            classify_determinacy((0.5, 0.9)).unwrap(),
            Determinacy::Explosive
        );
        assert_eq!(
            classify_determinacy((1.5, -2.0)).unwrap(),
            Determinacy::Indeterminate
        );
    }

    #[test]
    fn linearized_b_has_the_analytic_spectrum() {
        let base = ModelParams::baseline();
        for r in Regime::ALL {
            let (p, ss) = r.calibrate(&base, &PolicyConfig::default()).unwrap();
            let sys = linearize(&ss, &p).unwrap();
            let (a, b) = eigenvalues2(sys.b).unwrap();
            let (x, y) = bk_eigenvalues(&ss, &p).unwrap();
            let (x, y) = if x < y { (x, y) } else { (y, x) };
            assert!((a - x).abs() <= 1e-8 && (b - y).abs() <= 1e-8, "{r}");
        }
    }

    #[test]
    fn single_cell_map_matches_direct_verdict() {
        let p = ModelParams::baseline();
        let cells = regime_map(&[0.02], &[1.01], &p);
        assert_eq!(cells.len(), 1);
        let ss = compute_steady_state(1.01, &p).unwrap();
        assert_eq!(cells[0].verdict, Some(verdict(&ss, &p).unwrap()));
    }

    #[test]
    fn map_marks_threshold_cells() {
        let p = ModelParams::baseline();
        let cells = regime_map(&[p.fiscal_threshold()], &[1.01], &p);
        assert!(cells.iter().all(|c| c.verdict.is_none()));
        let mut buf = Vec::new();
        write_regime_map(&cells, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("gamma,pi,pi_branch,eig1"));
        assert!(text.contains("boundary"));
    }
}
