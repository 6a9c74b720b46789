//! Steady states: closed forms on the boundary of the octant, scalar root
//! finding for the interior, and local stability classification.
//!
//! Interior equilibria are found by eliminating `I` and `P` with the infected
//! and predator nullclines, `I*(S) = (a2 - d2 S^r)/d3` and
//! `P*(S) = (e0 S - a1)/d1`, leaving one scalar residual in `S` on the window
//! `a1/e0 < S < (a2/d2)^(1/r)` where both are positive.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{jacobian, pow_r, Parameters, State};
use crate::numerics::{
    bracketed_roots, char_coeffs, eig3, eigen_verdict, CubicCoefficients, EigenTriple, Verdict,
};

const SCAN_POINTS: usize = 2001;
const SCAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquilibriumKind {
    /// Total extinction.
    E0,
    /// Susceptibles at carrying capacity.
    #[serde(rename = "E1_K")]
    E1K,
    /// Susceptibles at the Allee threshold.
    #[serde(rename = "E1_L")]
    E1L,
    /// Predator free.
    E2,
    /// Infection free.
    E3,
    /// Coexistence.
    E4,
}

impl EquilibriumKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EquilibriumKind::E0 => "E0",
            EquilibriumKind::E1K => "E1_K",
            EquilibriumKind::E1L => "E1_L",
            EquilibriumKind::E2 => "E2",
            EquilibriumKind::E3 => "E3",
            EquilibriumKind::E4 => "E4",
        }
    }

    pub fn is_boundary(self) -> bool {
        self != EquilibriumKind::E4
    }
}

impl fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub point: State,
    pub feasible: bool,
}

/// Closed-form boundary equilibria `E0, E1_K, E1_L, E2, E3`, in that order.
/// Infeasible ones are kept and flagged.
pub fn boundary_equilibria(params: &Parameters) -> Vec<Equilibrium> {
    let Parameters {
        a0,
        a1,
        a2,
        d0,
        d2,
        e0,
        k,
        l,
        r,
        ..
    } = *params;

    let s2 = a1 / e0;
    let i2 = -(a0 * (a1 - e0 * k) * (a1 - e0 * l)) / (e0 * (-a0 * e0 * l + a0 * a1 + e0 * e0 * k));

    let s3 = (a2 / d2).powf(1.0 / r);
    let p3 = -(a0 * s3.powf(1.0 - r) * (s3 - k) * (s3 - l)) / (d0 * k);

    vec![
        Equilibrium {
            kind: EquilibriumKind::E0,
            point: State::new(0.0, 0.0, 0.0),
            feasible: true,
        },
        Equilibrium {
            kind: EquilibriumKind::E1K,
            point: State::new(k, 0.0, 0.0),
            feasible: true,
        },
        Equilibrium {
            kind: EquilibriumKind::E1L,
            point: State::new(l, 0.0, 0.0),
            feasible: l > 0.0,
        },
        Equilibrium {
            kind: EquilibriumKind::E2,
            point: State::new(s2, i2, 0.0),
            feasible: i2.is_finite() && i2 > 0.0,
        },
        Equilibrium {
            kind: EquilibriumKind::E3,
            point: State::new(s3, 0.0, p3),
            feasible: s3.is_finite() && p3.is_finite() && p3 > 0.0,
        },
    ]
}

/// `(I*(S), P*(S))` from the infected and predator nullclines.
pub fn interior_state(s: f64, params: &Parameters) -> State {
    let i = (params.a2 - params.d2 * pow_r(s, params.r)) / params.d3;
    let p = (params.e0 * s - params.a1) / params.d1;
    State::new(s, i, p)
}

/// Susceptible-nullcline residual along the interior reduction.
pub fn interior_residual(s: f64, params: &Parameters) -> f64 {
    let State { i, p, .. } = interior_state(s, params);
    let Parameters {
        a0,
        d0,
        e0,
        k,
        l,
        r,
        ..
    } = *params;
    a0 * (1.0 - (s + i) / k) * (s - l) - d0 * s.powf(r - 1.0) * p - e0 * i
}

/// `(S2, S3)` when `0 < S2 < S3`.
pub fn interior_window(params: &Parameters) -> Option<(f64, f64)> {
    let s2 = params.a1 / params.e0;
    let s3 = (params.a2 / params.d2).powf(1.0 / params.r);
    (s2 > 0.0 && s2 < s3 && s3.is_finite()).then_some((s2, s3))
}

/// Interior equilibria, ascending in `S`. Empty when the window is empty.
pub fn interior_equilibria(params: &Parameters) -> Vec<Equilibrium> {
    let Some((s2, s3)) = interior_window(params) else {
        return Vec::new();
    };
    let delta = 1e-9 * (s3 - s2);
    bracketed_roots(
        |s| interior_residual(s, params),
        s2 + delta,
        s3 - delta,
        SCAN_POINTS,
        SCAN_TOL,
    )
    .into_iter()
    .map(|s| interior_state(s, params))
    .filter(|x| x.s > 0.0 && x.i > 0.0 && x.p > 0.0)
    .map(|point| Equilibrium {
        kind: EquilibriumKind::E4,
        point,
        feasible: true,
    })
    .collect()
}

/// Boundary equilibria followed by interior ones.
pub fn all_equilibria(params: &Parameters) -> Vec<Equilibrium> {
    let mut out = boundary_equilibria(params);
    out.extend(interior_equilibria(params));
    out
}

/// Newton refinement of an interior root of [`interior_residual`] from a
/// nearby guess. Does not require the result to be feasible.
pub fn refine_interior_root(params: &Parameters, s_guess: f64) -> Option<f64> {
    let mut s = s_guess;
    for _ in 0..60 {
        if !(s > 0.0) {
            return None;
        }
        let g = interior_residual(s, params);
        let h = 1e-7 * (1.0 + s);
        let dg = (interior_residual(s + h, params) - interior_residual(s - h, params)) / (2.0 * h);
        if !g.is_finite() || !dg.is_finite() || dg == 0.0 {
            return None;
        }
        let mut step = g / dg;
        // keep S positive
        while s - step <= 0.0 {
            step *= 0.5;
        }
        s -= step;
        if step.abs() < 1e-14 * (1.0 + s.abs()) {
            return Some(s);
        }
    }
    (interior_residual(s, params).abs() < 1e-10).then_some(s)
}

/// One sufficient stability condition, with its value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionFlag {
    pub name: String,
    pub value: f64,
    pub holds: bool,
}

impl ConditionFlag {
    fn negative(name: &str, value: f64) -> Self {
        ConditionFlag {
            name: format!("{name} < 0"),
            value,
            holds: value < 0.0,
        }
    }

    fn positive(name: &str, value: f64) -> Self {
        ConditionFlag {
            name: format!("{name} > 0"),
            value,
            holds: value > 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub eigenvalues: EigenTriple,
    pub coefficients: CubicCoefficients,
    /// From eigenvalue real parts; the condition flags are sufficient
    /// conditions only and are reported as diagnostics.
    pub verdict: Verdict,
    pub conditions: Vec<ConditionFlag>,
}

impl StabilityReport {
    pub fn all_conditions_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }
}

/// Linear stability of a feasible, non-trivial equilibrium.
pub fn classify(eq: &Equilibrium, params: &Parameters) -> Result<StabilityReport> {
    if eq.kind == EquilibriumKind::E0 {
        return Err(Error::SingularJacobian);
    }
    if !eq.feasible {
        return Err(Error::InfeasibleEquilibrium(eq.kind.to_string()));
    }
    let j = jacobian(&eq.point, params)?;
    let coefficients = char_coeffs(&j);
    let eigenvalues = eig3(&j);
    let m = &j.0;
    let conditions = match eq.kind {
        EquilibriumKind::E0 => unreachable!(),
        EquilibriumKind::E1K | EquilibriumKind::E1L => {
            let s = eq.point.s;
            vec![
                ConditionFlag::negative("J11", m[0][0]),
                ConditionFlag::negative("e0*S - a1", params.e0 * s - params.a1),
                ConditionFlag::negative("d2*S^r - a2", params.d2 * pow_r(s, params.r) - params.a2),
            ]
        }
        EquilibriumKind::E2 => vec![
            ConditionFlag::negative("C11", m[0][0]),
            ConditionFlag::negative("C33", m[2][2]),
            ConditionFlag::negative("C12*C21", m[0][1] * m[1][0]),
        ],
        EquilibriumKind::E3 => vec![
            ConditionFlag::negative("H11", m[0][0]),
            ConditionFlag::negative("H22", m[1][1]),
        ],
        EquilibriumKind::E4 => vec![
            ConditionFlag::positive("Omega1", coefficients.omega1),
            ConditionFlag::positive("Omega3", coefficients.omega3),
            ConditionFlag::positive("Omega1*Omega2 - Omega3", coefficients.hurwitz_margin()),
        ],
    };
    Ok(StabilityReport {
        verdict: eigen_verdict(&eigenvalues),
        eigenvalues,
        coefficients,
        conditions,
    })
}
