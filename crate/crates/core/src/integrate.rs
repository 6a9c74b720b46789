//! Adaptive Dormand-Prince 5(4) integration on the closed positive octant
//! with finite-time extinction events.
//!
//! A component that drops below `eps_ext` is located on the dense output,
//! clamped to exactly zero and frozen there. Every term of its equation
//! carries the component (or `S^r` with `0^r = 0`) as a factor, so the frozen
//! value is also a fixed point of the field.

use serde::{Deserialize, Serialize};

use crate::equilibria::{Equilibrium, EquilibriumKind};
use crate::error::{Error, Result};
use crate::model::{rhs, Parameters, State};

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MIN_STEP: f64 = 1e-14;
const EVENT_TIME_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Extinction threshold.
    pub eps_ext: f64,
    /// Time span over which `|f| <= conv_tol` must hold to stop early.
    pub conv_window: f64,
    pub conv_tol: f64,
    pub max_step: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            t_end: 500.0,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            eps_ext: 1e-8,
            conv_window: 25.0,
            conv_tol: 1e-10,
            max_step: 1.0,
        }
    }
}

impl SimOptions {
    pub fn with_t_end(t_end: f64) -> Self {
        SimOptions {
            t_end,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("t_end", self.t_end),
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("eps_ext", self.eps_ext),
            ("conv_window", self.conv_window),
            ("conv_tol", self.conv_tol),
            ("max_step", self.max_step),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidOptions(format!(
                "{name} = {v} must be positive"
            )));
        }
        if self.eps_ext < self.abs_tol {
            return Err(Error::InvalidOptions(format!(
                "eps_ext = {} must be >= abs_tol = {}",
                self.eps_ext, self.abs_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    S,
    I,
    P,
}

impl Component {
    const ALL: [Component; 3] = [Component::S, Component::I, Component::P];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtinctionKind {
    SExtinct,
    IExtinct,
    PExtinct,
}

impl From<Component> for ExtinctionKind {
    fn from(c: Component) -> Self {
        match c {
            Component::S => ExtinctionKind::SExtinct,
            Component::I => ExtinctionKind::IExtinct,
            Component::P => ExtinctionKind::PExtinct,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionEvent {
    pub kind: ExtinctionKind,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TEnd,
    AllExtinct,
    Converged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: State,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<ExtinctionEvent>,
    pub termination: Termination,
    pub eps_ext: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> State {
        self.samples.last().map(|s| s.state).unwrap_or_default()
    }

    pub fn final_time(&self) -> f64 {
        self.samples.last().map(|s| s.t).unwrap_or(0.0)
    }

    pub fn event(&self, kind: ExtinctionKind) -> Option<&ExtinctionEvent> {
        self.events.iter().find(|e| e.kind == kind)
    }
}

/// Continuous extension of one accepted step.
struct DenseStep {
    t0: f64,
    h: f64,
    r: [[f64; 3]; 5],
}

impl DenseStep {
    fn eval(&self, t: f64) -> [f64; 3] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.r;
        [0, 1, 2]
            .map(|c| r[0][c] + th * (r[1][c] + th1 * (r[2][c] + th * (r[3][c] + th1 * r[4][c]))))
    }
}

fn field(x: &[f64; 3], params: &Parameters, frozen: &[bool; 3]) -> [f64; 3] {
    let proj = State::new(x[0].max(0.0), x[1].max(0.0), x[2].max(0.0));
    let mut f = rhs(&proj, params);
    for c in 0..3 {
        if frozen[c] {
            f[c] = 0.0;
        }
    }
    f
}

fn axpy(y: &[f64; 3], h: f64, terms: &[(f64, &[f64; 3])]) -> [f64; 3] {
    [0, 1, 2].map(|c| y[c] + h * terms.iter().map(|(a, k)| a * k[c]).sum::<f64>())
}

fn sup_norm(v: &[f64; 3]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Integrate from `ic` to `opts.t_end`.
pub fn simulate(params: &Parameters, ic: &State, opts: &SimOptions) -> Result<Trajectory> {
    opts.validate()?;
    if !ic.is_nonnegative() || !ic.to_array().iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInitialCondition(format!(
            "({}, {}, {}) must be finite and nonnegative",
            ic.s, ic.i, ic.p
        )));
    }

    let mut y = ic.to_array();
    let mut frozen = [false; 3];
    let mut events = Vec::new();
    for c in 0..3 {
        if y[c] == 0.0 {
            frozen[c] = true;
        } else if y[c] < opts.eps_ext {
            y[c] = 0.0;
            frozen[c] = true;
            events.push(ExtinctionEvent {
                kind: Component::ALL[c].into(),
                t: 0.0,
            });
        }
    }

    let mut t = 0.0;
    let mut samples = vec![Sample {
        t,
        state: State::from_array(y),
    }];
    let mut k1 = field(&y, params, &frozen);

    // initial step from the scaled state and slope norms
    let sc = |c: usize, v: &[f64; 3]| opts.abs_tol + opts.rel_tol * v[c].abs();
    let d0 = (0..3)
        .map(|c| (y[c] / sc(c, &y)).powi(2))
        .sum::<f64>()
        .sqrt();
    let d1 = (0..3)
        .map(|c| (k1[c] / sc(c, &y)).powi(2))
        .sum::<f64>()
        .sqrt();
    let mut h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h = h.min(opts.max_step).min(opts.t_end);

    let mut calm_since: Option<f64> = None;
    let had_events_initially = frozen.iter().all(|&f| f) && !events.is_empty();
    if had_events_initially {
        return Ok(Trajectory {
            samples,
            events,
            termination: Termination::AllExtinct,
            eps_ext: opts.eps_ext,
        });
    }

    let termination = loop {
        if t >= opts.t_end {
            break Termination::TEnd;
        }
        if h < MIN_STEP {
            return Err(Error::StepUnderflow { t });
        }
        let h_try = h.min(opts.t_end - t);

        let k2 = field(&axpy(&y, h_try, &[(A21, &k1)]), params, &frozen);
        let k3 = field(&axpy(&y, h_try, &[(A31, &k1), (A32, &k2)]), params, &frozen);
        let k4 = field(
            &axpy(&y, h_try, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            params,
            &frozen,
        );
        let k5 = field(
            &axpy(&y, h_try, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            params,
            &frozen,
        );
        let k6 = field(
            &axpy(
                &y,
                h_try,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
            params,
            &frozen,
        );
        let y1 = axpy(
            &y,
            h_try,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = field(&y1, params, &frozen);

        let mut err = 0.0;
        for c in 0..3 {
            let e = h_try
                * (E1 * k1[c] + E3 * k3[c] + E4 * k4[c] + E5 * k5[c] + E6 * k6[c] + E7 * k7[c]);
            let s = opts.abs_tol + opts.rel_tol * y[c].abs().max(y1[c].abs());
            err += (e / s).powi(2);
        }
        let err = (err / 3.0).sqrt();
        let _ = (C2, C3, C4, C5);

        if !err.is_finite() || err > 1.0 {
            let fac = if err.is_finite() {
                (0.9 * err.powf(-0.2)).max(0.2)
            } else {
                0.1
            };
            h = h_try * fac;
            continue;
        }

        let ydiff = [0, 1, 2].map(|c| y1[c] - y[c]);
        let bspl = [0, 1, 2].map(|c| h_try * k1[c] - ydiff[c]);
        let dense = DenseStep {
            t0: t,
            h: h_try,
            r: [
                y,
                ydiff,
                bspl,
                [0, 1, 2].map(|c| ydiff[c] - h_try * k7[c] - bspl[c]),
                [0, 1, 2].map(|c| {
                    h_try
                        * (D1 * k1[c]
                            + D3 * k3[c]
                            + D4 * k4[c]
                            + D5 * k5[c]
                            + D6 * k6[c]
                            + D7 * k7[c])
                }),
            ],
        };

        // earliest extinction crossing inside the step
        let t1 = t + h_try;
        let mut earliest: Option<f64> = None;
        for c in 0..3 {
            if frozen[c] || y1[c] >= opts.eps_ext {
                continue;
            }
            let (mut lo, mut hi) = (t, t1);
            while hi - lo > EVENT_TIME_TOL {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if dense.eval(mid)[c] < opts.eps_ext {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            earliest = Some(earliest.map_or(hi, |e: f64| e.min(hi)));
        }

        let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);

        if let Some(te) = earliest {
            let mut ye = if te >= t1 { y1 } else { dense.eval(te) };
            for c in 0..3 {
                if frozen[c] {
                    ye[c] = 0.0;
                } else if ye[c] < opts.eps_ext {
                    ye[c] = 0.0;
                    frozen[c] = true;
                    events.push(ExtinctionEvent {
                        kind: Component::ALL[c].into(),
                        t: te,
                    });
                } else {
                    ye[c] = ye[c].max(0.0);
                }
            }
            y = ye;
            t = te;
            push_sample(&mut samples, t, y);
            k1 = field(&y, params, &frozen);
            h = (h_try * fac).min(opts.max_step);
            calm_since = None;
            if frozen.iter().all(|&f| f) {
                break Termination::AllExtinct;
            }
            continue;
        }

        y = y1.map(|v| v.max(0.0));
        for c in 0..3 {
            if frozen[c] {
                y[c] = 0.0;
            }
        }
        t = t1;
        push_sample(&mut samples, t, y);
        k1 = k7;
        for c in 0..3 {
            if frozen[c] {
                k1[c] = 0.0;
            }
        }

        if sup_norm(&field(&y, params, &frozen)) <= opts.conv_tol {
            let since = *calm_since.get_or_insert(t);
            if t - since >= opts.conv_window {
                break Termination::Converged;
            }
        } else {
            calm_since = None;
        }

        h = (h_try * fac).min(opts.max_step);
    };

    Ok(Trajectory {
        samples,
        events,
        termination,
        eps_ext: opts.eps_ext,
    })
}

fn push_sample(samples: &mut Vec<Sample>, t: f64, y: [f64; 3]) {
    let state = State::from_array(y);
    match samples.last_mut() {
        Some(last) if t <= last.t => last.state = state,
        _ => samples.push(Sample { t, state }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Converged(EquilibriumKind),
    Oscillatory,
    Collapsed,
    Undecided,
}

/// Long-run behaviour from the final tenth of the trajectory (at least the
/// last two samples).
pub fn asymptotic_state(traj: &Trajectory, eqs: &[Equilibrium], tol: f64) -> Outcome {
    let last = traj.final_state();
    if last.to_array().iter().all(|&v| v < traj.eps_ext) {
        return Outcome::Collapsed;
    }
    let window = final_window(traj);

    let mut best: Option<(f64, EquilibriumKind)> = None;
    for eq in eqs.iter().filter(|e| e.feasible) {
        let dev = window
            .iter()
            .map(|s| s.state.max_abs_diff(&eq.point))
            .fold(0.0f64, f64::max);
        if dev <= tol && best.map_or(true, |(d, _)| dev < d) {
            best = Some((dev, eq.kind));
        }
    }
    if let Some((_, kind)) = best {
        return Outcome::Converged(kind);
    }

    let bounded = window
        .iter()
        .all(|s| s.state.to_array().iter().all(|v| v.is_finite()));
    let half = window.len() / 2;
    if bounded && half >= 2 {
        let amp = peak_to_peak(window);
        let first = peak_to_peak(&window[..half]);
        let second = peak_to_peak(&window[half..]);
        if amp > 10.0 * tol && second >= 0.5 * first {
            return Outcome::Oscillatory;
        }
    }
    Outcome::Undecided
}

fn final_window(traj: &Trajectory) -> &[Sample] {
    let t_final = traj.final_time();
    let t0 = traj.samples.first().map_or(0.0, |s| s.t);
    let cut = t_final - 0.1 * (t_final - t0);
    let start = traj
        .samples
        .iter()
        .position(|s| s.t >= cut)
        .unwrap_or(0)
        .min(traj.samples.len().saturating_sub(2));
    &traj.samples[start..]
}

fn peak_to_peak(window: &[Sample]) -> f64 {
    (0..3)
        .map(|c| {
            let (lo, hi) = window
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                    let v = s.state.to_array()[c];
                    (lo.min(v), hi.max(v))
                });
            hi - lo
        })
        .fold(0.0, f64::max)
}
