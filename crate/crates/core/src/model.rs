//! Model definition: parameters, state, vector field and its Jacobian.
//!
//! The system is
//!
//! ```text
//! dS/dt = a0 S (1 - (S+I)/K)(S - L) - d0 S^r P - e0 S I
//! dI/dt = -a1 I + e0 S I - d1 I P
//! dP/dt = -a2 P + d2 S^r P + d3 I P
//! ```
//!
//! with `0^r := 0`, which keeps the field continuous on the closed octant.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Mat3;

pub type JacobianMatrix = Mat3;

/// Names of the eleven model constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParamName {
    #[serde(rename = "a0")]
    A0,
    #[serde(rename = "a1")]
    A1,
    #[serde(rename = "a2")]
    A2,
    #[serde(rename = "d0")]
    D0,
    #[serde(rename = "d1")]
    D1,
    #[serde(rename = "d2")]
    D2,
    #[serde(rename = "d3")]
    D3,
    #[serde(rename = "e0")]
    E0,
    K,
    L,
    #[serde(rename = "r")]
    R,
}

impl ParamName {
    pub const ALL: [ParamName; 11] = [
        ParamName::A0,
        ParamName::A1,
        ParamName::A2,
        ParamName::D0,
        ParamName::D1,
        ParamName::D2,
        ParamName::D3,
        ParamName::E0,
        ParamName::K,
        ParamName::L,
        ParamName::R,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::A0 => "a0",
            ParamName::A1 => "a1",
            ParamName::A2 => "a2",
            ParamName::D0 => "d0",
            ParamName::D1 => "d1",
            ParamName::D2 => "d2",
            ParamName::D3 => "d3",
            ParamName::E0 => "e0",
            ParamName::K => "K",
            ParamName::L => "L",
            ParamName::R => "r",
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParamName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParamName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::UnknownParameter(s.to_string()))
    }
}

/// Model constants.
///
/// `validate` enforces the biological box (all rates positive, `0 < r < 1`,
/// `-K < L < K`). Continuation code is allowed to leave the box through
/// [`Parameters::with_unchecked`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    /// Susceptible birth-rate coefficient.
    pub a0: f64,
    /// Infected natural death rate.
    pub a1: f64,
    /// Predator natural death rate.
    pub a2: f64,
    /// Attack rate on susceptibles.
    pub d0: f64,
    /// Attack rate on infected.
    pub d1: f64,
    /// Conversion rate from susceptibles.
    pub d2: f64,
    /// Conversion rate from infected.
    pub d3: f64,
    /// Disease transmission rate.
    pub e0: f64,
    /// Carrying capacity.
    #[serde(rename = "K")]
    pub k: f64,
    /// Allee threshold; negative for a weak Allee effect.
    #[serde(rename = "L")]
    pub l: f64,
    /// Aggregation exponent on S in the predation terms.
    pub r: f64,
}

impl Parameters {
    /// Reference parameter set used for the equilibrium, bifurcation and
    /// disease-control analyses (`L = -0.5`, `r = 0.5`).
    pub fn baseline() -> Self {
        Parameters {
            a0: 3.0,
            a1: 0.4,
            a2: 0.8,
            d0: 0.4,
            d1: 0.7,
            d2: 0.3,
            d3: 0.4,
            e0: 0.9,
            k: 4.0,
            l: -0.5,
            r: 0.5,
        }
    }

    /// Parameter set of the finite-time extinction experiments (`L` varies).
    pub fn extinction_baseline(l: f64) -> Self {
        Parameters {
            a0: 3.0,
            a1: 0.5,
            a2: 0.35,
            d0: 0.4,
            d1: 0.6,
            d2: 0.1,
            d3: 0.5,
            e0: 0.92,
            k: 1.8,
            l,
            r: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for name in ParamName::ALL {
            let v = self.get(name);
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be finite",
                });
            }
        }
        for name in [
            ParamName::A0,
            ParamName::A1,
            ParamName::A2,
            ParamName::D0,
            ParamName::D1,
            ParamName::D2,
            ParamName::D3,
            ParamName::E0,
            ParamName::K,
        ] {
            let v = self.get(name);
            if v <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be strictly positive",
                });
            }
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::InvalidParameter {
                name: ParamName::R,
                value: self.r,
                reason: "must lie in (0, 1)",
            });
        }
        if !(self.l > -self.k && self.l < self.k) {
            return Err(Error::InvalidParameter {
                name: ParamName::L,
                value: self.l,
                reason: "must lie in (-K, K)",
            });
        }
        Ok(())
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn get(&self, name: ParamName) -> f64 {
        match name {
            ParamName::A0 => self.a0,
            ParamName::A1 => self.a1,
            ParamName::A2 => self.a2,
            ParamName::D0 => self.d0,
            ParamName::D1 => self.d1,
            ParamName::D2 => self.d2,
            ParamName::D3 => self.d3,
            ParamName::E0 => self.e0,
            ParamName::K => self.k,
            ParamName::L => self.l,
            ParamName::R => self.r,
        }
    }

    fn slot(&mut self, name: ParamName) -> &mut f64 {
        match name {
            ParamName::A0 => &mut self.a0,
            ParamName::A1 => &mut self.a1,
            ParamName::A2 => &mut self.a2,
            ParamName::D0 => &mut self.d0,
            ParamName::D1 => &mut self.d1,
            ParamName::D2 => &mut self.d2,
            ParamName::D3 => &mut self.d3,
            ParamName::E0 => &mut self.e0,
            ParamName::K => &mut self.k,
            ParamName::L => &mut self.l,
            ParamName::R => &mut self.r,
        }
    }

    /// Copy with one constant replaced, validated.
    pub fn with(&self, name: ParamName, value: f64) -> Result<Self> {
        self.with_unchecked(name, value).validated()
    }

    /// Copy with one constant replaced, without the biological-box check.
    pub fn with_unchecked(&self, name: ParamName, value: f64) -> Self {
        let mut out = *self;
        *out.slot(name) = value;
        out
    }

    /// True when the field is still well defined: rates positive and
    /// `0 < r < 1`. `L` is unconstrained.
    pub fn is_admissible(&self) -> bool {
        ParamName::ALL.iter().all(|&n| self.get(n).is_finite())
            && [
                self.a0, self.a1, self.a2, self.d0, self.d1, self.d2, self.d3, self.e0, self.k,
            ]
            .iter()
            .all(|&v| v > 0.0)
            && self.r > 0.0
            && self.r < 1.0
    }
}

/// Population densities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "P")]
    pub p: f64,
}

impl State {
    pub const fn new(s: f64, i: f64, p: f64) -> Self {
        State { s, i, p }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.s, self.i, self.p]
    }

    pub fn from_array(x: [f64; 3]) -> Self {
        State::new(x[0], x[1], x[2])
    }

    pub fn is_nonnegative(&self) -> bool {
        self.s >= 0.0 && self.i >= 0.0 && self.p >= 0.0
    }

    pub fn max_abs_diff(&self, other: &State) -> f64 {
        (self.s - other.s)
            .abs()
            .max((self.i - other.i).abs())
            .max((self.p - other.p).abs())
    }
}

/// `S^r` with `0^r := 0`.
#[inline]
pub fn pow_r(s: f64, r: f64) -> f64 {
    if s > 0.0 {
        s.powf(r)
    } else {
        0.0
    }
}

/// The vector field `(W1, W2, W3)`.
pub fn rhs(state: &State, params: &Parameters) -> [f64; 3] {
    let State { s, i, p } = *state;
    let Parameters {
        a0,
        a1,
        a2,
        d0,
        d1,
        d2,
        d3,
        e0,
        k,
        l,
        r,
    } = *params;
    let sr = pow_r(s, r);
    [
        a0 * s * (1.0 - (s + i) / k) * (s - l) - d0 * sr * p - e0 * s * i,
        -a1 * i + e0 * s * i - d1 * i * p,
        -a2 * p + d2 * sr * p + d3 * i * p,
    ]
}

/// Analytic Jacobian of [`rhs`]. Fails at `S <= 0`, where `S^(r-1)` blows up.
pub fn jacobian(state: &State, params: &Parameters) -> Result<JacobianMatrix> {
    let State { s, i, p } = *state;
    if !(s > 0.0) {
        return Err(Error::SingularJacobian);
    }
    let Parameters {
        a0,
        a1,
        a2,
        d0,
        d1,
        d2,
        d3,
        e0,
        k,
        l,
        r,
    } = *params;
    let sr = s.powf(r);
    let sr1 = sr / s;
    let logistic = 1.0 - (s + i) / k;
    let j11 = a0 * (logistic * (s - l) + s * (logistic - (s - l) / k)) - d0 * r * sr1 * p - e0 * i;
    Ok(Mat3([
        [j11, -s * (a0 * (s - l) + e0 * k) / k, -d0 * sr],
        [e0 * i, -a1 + e0 * s - d1 * p, -d1 * i],
        [r * d2 * sr1 * p, d3 * p, -a2 + d2 * sr + d3 * i],
    ]))
}

/// Second derivative of [`rhs`] as a symmetric bilinear form, `D2f(x)[u, v]`.
pub fn bilinear_form(
    state: &State,
    params: &Parameters,
    u: &[f64; 3],
    v: &[f64; 3],
) -> Result<[f64; 3]> {
    let State { s, i, p } = *state;
    if !(s > 0.0) {
        return Err(Error::SingularJacobian);
    }
    let Parameters {
        a0,
        d0,
        d1,
        d2,
        d3,
        e0,
        k,
        l,
        r,
        ..
    } = *params;
    let sr2 = s.powf(r - 2.0);
    // S^r P second derivatives, shared by the first and third components
    let pss = r * (r - 1.0) * sr2 * p;
    let psp = r * sr2 * s;
    let hss = [
        a0 / k * (2.0 * (k - s - i) - 2.0 * (2.0 * s - l)) - d0 * pss,
        0.0,
        d2 * pss,
    ];
    let hsi = [-a0 / k * (2.0 * s - l) - e0, e0, 0.0];
    let hsp = [-d0 * psp, 0.0, d2 * psp];
    let hip = [0.0, -d1, d3];
    let (ss, si, sp, ip) = (
        u[0] * v[0],
        u[0] * v[1] + u[1] * v[0],
        u[0] * v[2] + u[2] * v[0],
        u[1] * v[2] + u[2] * v[1],
    );
    Ok([0, 1, 2].map(|c| hss[c] * ss + hsi[c] * si + hsp[c] * sp + hip[c] * ip))
}

/// Third derivative of [`rhs`] as a symmetric trilinear form, `D3f(x)[u, v, w]`.
pub fn trilinear_form(
    state: &State,
    params: &Parameters,
    u: &[f64; 3],
    v: &[f64; 3],
    w: &[f64; 3],
) -> Result<[f64; 3]> {
    let State { s, p, .. } = *state;
    if !(s > 0.0) {
        return Err(Error::SingularJacobian);
    }
    let Parameters {
        a0, d0, d2, k, r, ..
    } = *params;
    let sr3 = s.powf(r - 3.0);
    let psss = r * (r - 1.0) * (r - 2.0) * sr3 * p;
    let pssp = r * (r - 1.0) * sr3 * s;
    let tsss = [-6.0 * a0 / k - d0 * psss, 0.0, d2 * psss];
    let tssi = [-2.0 * a0 / k, 0.0, 0.0];
    let tssp = [-d0 * pssp, 0.0, d2 * pssp];
    let sss = u[0] * v[0] * w[0];
    let ssx = |x: usize| u[0] * v[0] * w[x] + u[0] * v[x] * w[0] + u[x] * v[0] * w[0];
    let (ssi, ssp) = (ssx(1), ssx(2));
    Ok([0, 1, 2].map(|c| tsss[c] * sss + tssi[c] * ssi + tssp[c] * ssp))
}

/// Per-capita growth of the susceptibles in the absence of predation and
/// infection losses: `a0 (1 - (S+I)/K)(S - L)`.
pub fn per_capita_growth(s: f64, i: f64, params: &Parameters) -> f64 {
    params.a0 * (1.0 - (s + i) / params.k) * (s - params.l)
}

/// Central-difference derivative of [`rhs`] with respect to one parameter.
pub fn rhs_param_derivative(state: &State, params: &Parameters, name: ParamName) -> [f64; 3] {
    let v = params.get(name);
    let h = 1e-6 * (1.0 + v.abs());
    let fp = rhs(state, &params.with_unchecked(name, v + h));
    let fm = rhs(state, &params.with_unchecked(name, v - h));
    [0, 1, 2].map(|c| (fp[c] - fm[c]) / (2.0 * h))
}
