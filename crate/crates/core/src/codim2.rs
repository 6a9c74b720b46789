//! Fold and Hopf loci in a two-parameter plane, with cusp, Bogdanov-Takens,
//! zero-Hopf and generalized-Hopf detection along them.
//!
//! Points on a locus are solved in `(S, p1, p2)` on the interior reduction
//! `I = I*(S), P = P*(S)`, which stays smooth when `P` passes through zero.
//! That lets a Hopf locus run into the predator-free boundary, where the
//! zero-Hopf point sits.

use serde::{Deserialize, Serialize};

use crate::codim1::{first_lyapunov, second_directional};
use crate::equilibria::{
    boundary_equilibria, interior_equilibria, interior_residual, interior_state, Equilibrium,
    EquilibriumKind,
};
use crate::error::{Error, Result};
use crate::model::{jacobian, ParamName, Parameters, State};
use crate::numerics::{char_coeffs, dot, eig3, null_vector, CubicCoefficients, EigenTriple};

pub const MIN_STEP: f64 = 1e-4;
pub const MAX_STEP: f64 = 5e-2;
/// Localization tolerance for codim-2 points, in arclength.
pub const LOCATE_TOL: f64 = 1e-6;
/// Double-zero eigenvalues scale like the square root of the monitor, so
/// Bogdanov-Takens points are bisected further.
const BT_LOCATE_TOL: f64 = 1e-12;
/// Coordinates above `-FEASIBLE_TOL` count as nonnegative for codim-2
/// points; cusps on the predator-free boundary are located with `P` only
/// approximately zero.
pub const FEASIBLE_TOL: f64 = 1e-4;
const NEWTON_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Fold,
    Hopf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Codim2Kind {
    Cusp,
    BogdanovTakens,
    ZeroHopf,
    GeneralizedHopf,
}

/// Test functions evaluated at each curve point. `cusp` is only set on fold
/// loci and `gh` only on Hopf loci.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monitors {
    pub bt: f64,
    pub zh: f64,
    pub cusp: Option<f64>,
    pub gh: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p1: f64,
    pub p2: f64,
    pub equilibrium: Equilibrium,
    pub kind: CurveKind,
    pub monitors: Monitors,
    /// Max-norm of the defining system at this point.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Codim2Point {
    pub kind: Codim2Kind,
    pub p1: f64,
    pub p2: f64,
    pub equilibrium: State,
    pub eigenvalues: EigenTriple,
    /// All state coordinates nonnegative.
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Steps,
    CorrectorFailure,
    Inadmissible,
    /// A Hopf locus ends at a Bogdanov-Takens point.
    HopfEnded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub kind: CurveKind,
    pub p1: ParamName,
    pub p2: ParamName,
    /// Ordered along the locus, from one traced end to the other.
    pub points: Vec<CurvePoint>,
    pub codim2: Vec<Codim2Point>,
    /// Why each of the two branches (backward, forward from the seed) stopped.
    pub stops: [StopReason; 2],
}

#[derive(Clone, Copy)]
struct Setup<'a> {
    base: &'a Parameters,
    kind: CurveKind,
    p1: ParamName,
    p2: ParamName,
}

type Y = [f64; 3];

impl Setup<'_> {
    fn params(&self, y: &Y) -> Parameters {
        self.base
            .with_unchecked(self.p1, y[1])
            .with_unchecked(self.p2, y[2])
    }

    fn test(&self, c: &CubicCoefficients) -> f64 {
        match self.kind {
            CurveKind::Fold => c.omega3,
            CurveKind::Hopf => c.hurwitz_margin(),
        }
    }

    fn residual(&self, y: &Y) -> Option<[f64; 2]> {
        let p = self.params(y);
        if !p.is_admissible() || !(y[0] > 0.0) {
            return None;
        }
        let x = interior_state(y[0], &p);
        let j = jacobian(&x, &p).ok()?;
        let r = [interior_residual(y[0], &p), self.test(&char_coeffs(&j))];
        (r[0].is_finite() && r[1].is_finite()).then_some(r)
    }

    /// 2x3 Jacobian of the defining system.
    fn derivative(&self, y: &Y) -> Option<[[f64; 3]; 2]> {
        let mut d = [[0.0; 3]; 2];
        for c in 0..3 {
            let h = 1e-7 * (1.0 + y[c].abs());
            let mut yp = *y;
            let mut ym = *y;
            yp[c] += h;
            ym[c] -= h;
            let (fp, fm) = (self.residual(&yp)?, self.residual(&ym)?);
            for r in 0..2 {
                d[r][c] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        Some(d)
    }

    /// Newton on the defining system plus `t . (y - anchor) = 0`.
    fn correct(&self, anchor: &Y, t: &Y) -> Option<Y> {
        let mut y = *anchor;
        for _ in 0..12 {
            let f = self.residual(&y)?;
            let d = self.derivative(&y)?;
            let g = [f[0], f[1], dot(t, &[0, 1, 2].map(|c| y[c] - anchor[c]))];
            let m = crate::numerics::Mat3([d[0], d[1], *t]);
            let dy = crate::numerics::solve3(&m, &g)?;
            for c in 0..3 {
                y[c] -= dy[c];
            }
            let small = dy
                .iter()
                .zip(&y)
                .all(|(d, v)| d.abs() < NEWTON_TOL * (1.0 + v.abs()));
            if small {
                let f = self.residual(&y)?;
                return (f[0].abs().max(f[1].abs()) < 1e-9).then_some(y);
            }
        }
        None
    }

    fn tangent(&self, y: &Y) -> Option<Y> {
        let d = self.derivative(y)?;
        null_vector(&crate::numerics::Mat3([d[0], d[1], [0.0; 3]]))
    }

    fn point(&self, y: &Y, prev_v: Option<&Y>) -> Option<(CurvePoint, Y)> {
        let p = self.params(y);
        let x = interior_state(y[0], &p);
        let j = jacobian(&x, &p).ok()?;
        let c = char_coeffs(&j);
        let f = self.residual(y)?;
        let mut v_dir = [0.0; 3];
        let monitors = match self.kind {
            CurveKind::Fold => {
                let u = null_vector(&j)?;
                let mut v = null_vector(&j.transpose())?;
                if prev_v.is_some_and(|pv| dot(pv, &v) < 0.0) {
                    v = v.map(|a| -a);
                }
                v_dir = v;
                Monitors {
                    bt: c.omega2,
                    zh: c.omega1,
                    cusp: Some(dot(&v, &second_directional(&x, &p, &u).ok()?)),
                    gh: None,
                }
            }
            CurveKind::Hopf => {
                let eq = interior_eq(x);
                Monitors {
                    bt: c.omega2,
                    // the real eigenvalue is -omega1 on a Hopf locus
                    zh: c.omega1,
                    cusp: None,
                    gh: Some(first_lyapunov(&eq, &p).unwrap_or(f64::NAN)),
                }
            }
        };
        Some((
            CurvePoint {
                p1: y[1],
                p2: y[2],
                equilibrium: interior_eq(x),
                kind: self.kind,
                monitors,
                residual: f[0].abs().max(f[1].abs()),
            },
            v_dir,
        ))
    }
}

fn interior_eq(point: State) -> Equilibrium {
    Equilibrium {
        kind: EquilibriumKind::E4,
        point,
        feasible: point.s >= 0.0 && point.i >= 0.0 && point.p >= 0.0,
    }
}

/// Newton on `(S, p1)` with `p2` fixed.
fn seed_newton(setup: &Setup, s0: f64, v1: f64, v2: f64) -> Option<Y> {
    setup.correct(&[s0, v1, v2], &[0.0, 0.0, 1.0])
}

fn find_seed(setup: &Setup, start: (f64, f64)) -> Result<Y> {
    let p = setup.params(&[1.0, start.0, start.1]);
    let mut guesses: Vec<f64> = interior_equilibria(&p).iter().map(|e| e.point.s).collect();
    // fall back to local minima of |g| over a coarse window
    let (lo, hi) = (1e-3, 2.0 * p.k.max(1.0));
    let n = 400;
    let g: Vec<f64> = (0..=n)
        .map(|k| interior_residual(lo + (hi - lo) * k as f64 / n as f64, &p).abs())
        .collect();
    for k in 1..n {
        if g[k] <= g[k - 1] && g[k] <= g[k + 1] {
            guesses.push(lo + (hi - lo) * k as f64 / n as f64);
        }
    }
    let mut best: Option<Y> = None;
    for s in guesses {
        if let Some(y) = seed_newton(setup, s, start.0, start.1) {
            if setup.kind == CurveKind::Hopf {
                let x = interior_state(y[0], &setup.params(&y));
                match jacobian(&x, &setup.params(&y)) {
                    Ok(j) if char_coeffs(&j).omega2 > 0.0 => {}
                    _ => continue,
                }
            }
            if best.map_or(true, |b| (y[1] - start.0).abs() < (b[1] - start.0).abs()) {
                best = Some(y);
            }
        }
    }
    best.ok_or_else(|| {
        Error::SeedNotOnLocus(format!(
            "no {:?} point near ({}, {}) = ({}, {})",
            setup.kind, setup.p1, setup.p2, start.0, start.1
        ))
    })
}

fn monitor_of(kind: Codim2Kind, m: &Monitors) -> f64 {
    match kind {
        Codim2Kind::Cusp => m.cusp.unwrap_or(f64::NAN),
        Codim2Kind::BogdanovTakens => m.bt,
        Codim2Kind::ZeroHopf => m.zh,
        Codim2Kind::GeneralizedHopf => m.gh.unwrap_or(f64::NAN),
    }
}

fn watched(kind: CurveKind) -> &'static [Codim2Kind] {
    match kind {
        CurveKind::Fold => &[
            Codim2Kind::Cusp,
            Codim2Kind::BogdanovTakens,
            Codim2Kind::ZeroHopf,
        ],
        CurveKind::Hopf => &[
            Codim2Kind::GeneralizedHopf,
            Codim2Kind::BogdanovTakens,
            Codim2Kind::ZeroHopf,
        ],
    }
}

struct Step {
    y: Y,
    point: CurvePoint,
    v: Y,
}

/// Bisection in arclength between two consecutive accepted points. Where the
/// corrector becomes ill-conditioned (a fold locus crossing a transcritical
/// locus makes the defining system singular) the bisection stops and the
/// best point found so far is kept.
fn localize(setup: &Setup, from: &Step, dir: &Y, h: f64, kind: Codim2Kind) -> Option<Codim2Point> {
    let at = |sigma: f64| -> Option<(Y, CurvePoint)> {
        let anchor = [0, 1, 2].map(|c| from.y[c] + sigma * dir[c]);
        let y = setup.correct(&anchor, dir)?;
        let (pt, _) = setup.point(&y, Some(&from.v))?;
        Some((y, pt))
    };
    let m0 = monitor_of(kind, &from.point.monitors);
    let (mut lo, mut hi) = (0.0, h);
    let mut best: Option<(f64, Y, CurvePoint)> = None;
    let tol = if kind == Codim2Kind::BogdanovTakens {
        BT_LOCATE_TOL
    } else {
        LOCATE_TOL
    };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let Some((y, pt)) = at(mid) else { break };
        let m = monitor_of(kind, &pt.monitors);
        if !m.is_finite() {
            break;
        }
        if best.as_ref().map_or(true, |(bm, _, _)| m.abs() < *bm) {
            best = Some((m.abs(), y, pt));
        }
        if (m < 0.0) == (m0 < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (_, y, pt) = best?;
    let p = setup.params(&y);
    let j = jacobian(&pt.equilibrium.point, &p).ok()?;
    let c = char_coeffs(&j);
    // a zero-Hopf needs a genuine imaginary pair
    if kind == Codim2Kind::ZeroHopf && !(c.omega2 > 0.0) {
        return None;
    }
    Some(Codim2Point {
        kind,
        p1: y[1],
        p2: y[2],
        equilibrium: pt.equilibrium.point,
        eigenvalues: eig3(&j),
        feasible: pt
            .equilibrium
            .point
            .to_array()
            .iter()
            .all(|&v| v >= -FEASIBLE_TOL),
    })
}

/// A sign change of `kind`'s monitor between two points is accepted if the
/// monitor is small at the localized point compared with the endpoints,
/// which rules out sign changes through poles.
fn accept(kind: Codim2Kind, a: f64, b: f64, at: &Codim2Point, setup: &Setup) -> bool {
    if kind != Codim2Kind::GeneralizedHopf && kind != Codim2Kind::Cusp {
        return true;
    }
    let y = [at.equilibrium.s, at.p1, at.p2];
    let Some((pt, _)) = setup.point(&y, None) else {
        return false;
    };
    let m = monitor_of(kind, &pt.monitors).abs();
    m.is_finite() && m <= 1e-2 * (a.abs() + b.abs())
}

fn run_branch(
    setup: &Setup,
    seed: &Step,
    dir0: Y,
    steps: usize,
    points: &mut Vec<CurvePoint>,
    found: &mut Vec<Codim2Point>,
) -> StopReason {
    let mut cur = Step {
        y: seed.y,
        point: seed.point,
        v: seed.v,
    };
    let mut dir = dir0;
    let mut h = 0.2 * MAX_STEP;
    for _ in 0..steps {
        let next = loop {
            if h < MIN_STEP {
                return StopReason::CorrectorFailure;
            }
            let anchor = [0, 1, 2].map(|c| cur.y[c] + h * dir[c]);
            if !setup.params(&anchor).is_admissible() {
                return StopReason::Inadmissible;
            }
            match setup
                .correct(&anchor, &dir)
                .and_then(|y| setup.point(&y, Some(&cur.v)).map(|(pt, v)| (y, pt, v)))
            {
                // reject jumps well beyond the requested step
                Some((y, pt, v)) if dist(&y, &cur.y) < 2.0 * h => break Step { y, point: pt, v },
                _ => h *= 0.5,
            }
        };
        let taken = dist(&next.y, &cur.y);

        for &kind in watched(setup.kind) {
            let (a, b) = (
                monitor_of(kind, &cur.point.monitors),
                monitor_of(kind, &next.point.monitors),
            );
            if a.is_finite() && b.is_finite() && a != 0.0 && b != 0.0 && (a < 0.0) != (b < 0.0) {
                if let Some(pt) = localize(setup, &cur, &dir, h, kind) {
                    if accept(kind, a, b, &pt, setup) {
                        found.push(pt);
                    }
                }
            }
        }

        let ended = setup.kind == CurveKind::Hopf && next.point.monitors.bt <= 0.0;
        let new_dir = [0, 1, 2].map(|c| (next.y[c] - cur.y[c]) / taken);
        points.push(next.point);
        cur = next;
        dir = new_dir;
        if ended {
            return StopReason::HopfEnded;
        }
        h = (h * 1.3).min(MAX_STEP);
    }
    StopReason::Steps
}

fn dist(a: &Y, b: &Y) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Trace a fold or Hopf locus in the `(p1, p2)` plane through a point near
/// `start`, taking up to `steps` continuation steps in each direction.
pub fn trace_curve(
    params: &Parameters,
    kind: CurveKind,
    p1: ParamName,
    p2: ParamName,
    start: (f64, f64),
    steps: usize,
) -> Result<Curve> {
    if p1 == p2 {
        return Err(Error::InvalidOptions(format!("p1 and p2 are both {p1}")));
    }
    let setup = Setup {
        base: params,
        kind,
        p1,
        p2,
    };
    let y0 = find_seed(&setup, start)?;
    let (pt0, v0) = setup
        .point(&y0, None)
        .ok_or_else(|| Error::SeedNotOnLocus("monitors undefined at the seed".into()))?;
    let seed = Step {
        y: y0,
        point: pt0,
        v: v0,
    };
    let t0 = setup
        .tangent(&y0)
        .ok_or_else(|| Error::SeedNotOnLocus("singular defining system at the seed".into()))?;

    let mut back = Vec::new();
    let mut back_found = Vec::new();
    let stop_back = run_branch(
        &setup,
        &seed,
        t0.map(|c| -c),
        steps,
        &mut back,
        &mut back_found,
    );
    let mut fwd = Vec::new();
    let mut fwd_found = Vec::new();
    let stop_fwd = run_branch(&setup, &seed, t0, steps, &mut fwd, &mut fwd_found);

    back.reverse();
    back.push(pt0);
    back.extend(fwd);
    back_found.reverse();
    back_found.extend(fwd_found);
    Ok(Curve {
        kind,
        p1,
        p2,
        points: back,
        codim2: back_found,
        stops: [stop_back, stop_fwd],
    })
}

/// Zero-Hopf on the predator-free equilibrium `E2`: solves `C11 = C33 = 0`
/// in `(p1, p2)` and checks `-C12 C21 > 0`.
pub fn solve_zh_on_boundary(
    params: &Parameters,
    p1: ParamName,
    p2: ParamName,
    seed: (f64, f64),
) -> Result<Codim2Point> {
    let at = |v: [f64; 2]| -> Option<(State, crate::numerics::Mat3)> {
        let p = params.with_unchecked(p1, v[0]).with_unchecked(p2, v[1]);
        if !p.is_admissible() {
            return None;
        }
        let e2 = boundary_equilibria(&p)
            .into_iter()
            .find(|e| e.kind == EquilibriumKind::E2)?;
        let j = jacobian(&e2.point, &p).ok()?;
        j.is_finite().then_some((e2.point, j))
    };
    let f = |v: [f64; 2]| at(v).map(|(_, j)| [j.0[0][0], j.0[2][2]]);
    let norm2 = |r: [f64; 2]| r[0].abs().max(r[1].abs());

    let mut v = [seed.0, seed.1];
    let diverged = |why: &str| Error::NewtonDivergence(format!("zero-Hopf on E2: {why}"));
    for _ in 0..60 {
        let r = f(v).ok_or_else(|| diverged("left the admissible region"))?;
        if norm2(r) < 1e-13 {
            break;
        }
        let mut d = [[0.0; 2]; 2];
        for c in 0..2 {
            let h = 1e-7 * (1.0 + v[c].abs());
            let mut vp = v;
            let mut vm = v;
            vp[c] += h;
            vm[c] -= h;
            let (fp, fm) = (
                f(vp).ok_or_else(|| diverged("stencil left the admissible region"))?,
                f(vm).ok_or_else(|| diverged("stencil left the admissible region"))?,
            );
            for row in 0..2 {
                d[row][c] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(diverged("singular Jacobian"));
        }
        let step = [
            (r[0] * d[1][1] - r[1] * d[0][1]) / det,
            (d[0][0] * r[1] - d[1][0] * r[0]) / det,
        ];
        let mut lam = 1.0;
        loop {
            let cand = [v[0] - lam * step[0], v[1] - lam * step[1]];
            if let Some(rc) = f(cand) {
                if norm2(rc) < norm2(r) || lam < 1e-3 {
                    v = cand;
                    break;
                }
            }
            lam *= 0.5;
            if lam < 1e-6 {
                return Err(diverged("line search failed"));
            }
        }
    }
    let (x, j) = at(v).ok_or_else(|| diverged("left the admissible region"))?;
    let r = [j.0[0][0], j.0[2][2]];
    if norm2(r) > 1e-9 {
        return Err(diverged(&format!("residual {:e}", norm2(r))));
    }
    let c12c21 = j.0[0][1] * j.0[1][0];
    if !(-c12c21 > 0.0) {
        return Err(Error::NoImaginaryPair(-c12c21));
    }
    Ok(Codim2Point {
        kind: Codim2Kind::ZeroHopf,
        p1: v[0],
        p2: v[1],
        equilibrium: x,
        eigenvalues: eig3(&j),
        feasible: x.is_nonnegative(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_hopf_on_e2() {
        let p = Parameters::baseline();
        let zh = solve_zh_on_boundary(&p, ParamName::L, ParamName::A0, (-1.5, 1.3)).unwrap();
        assert!((zh.p1 + 1.6111).abs() < 1e-3, "{zh:?}");
        assert!((zh.p2 - 1.2780).abs() < 1e-3, "{zh:?}");
        assert!((zh.equilibrium.s - 0.4 / 0.9).abs() < 1e-12);
        assert!((zh.equilibrium.i - 1.5).abs() < 1e-3);
        assert_eq!(zh.equilibrium.p, 0.0);
        let e = zh.eigenvalues.by_modulus();
        assert!(e[0].norm() < 1e-6);
        assert!((e[1].im.abs() - 0.9665).abs() < 1e-3 && e[1].re.abs() < 1e-6);
    }

    #[test]
    fn zero_hopf_needs_an_imaginary_pair_or_a_reachable_root() {
        let p = Parameters::baseline();
        assert!(solve_zh_on_boundary(&p, ParamName::L, ParamName::L, (-1.5, 1.3)).is_err());
    }

    #[test]
    fn seed_off_locus_is_rejected() {
        let p = Parameters::baseline();
        // a1 large empties the interior window entirely
        let p = p.with_unchecked(ParamName::A1, 50.0);
        let r = trace_curve(
            &p,
            CurveKind::Hopf,
            ParamName::L,
            ParamName::A0,
            (0.2, 3.0),
            5,
        );
        assert!(matches!(r, Err(Error::SeedNotOnLocus(_))), "{r:?}");
    }

    #[test]
    fn short_hopf_trace_stays_on_the_locus() {
        let p = Parameters::baseline();
        let c = trace_curve(
            &p,
            CurveKind::Hopf,
            ParamName::L,
            ParamName::A0,
            (0.2184, 3.0),
            10,
        )
        .unwrap();
        assert!(c.points.len() >= 15);
        for pt in &c.points {
            assert!(pt.residual < 1e-8);
            let pp = p
                .with_unchecked(ParamName::L, pt.p1)
                .with_unchecked(ParamName::A0, pt.p2);
            let coeffs = char_coeffs(&jacobian(&pt.equilibrium.point, &pp).unwrap());
            assert!(coeffs.hurwitz_margin().abs() < 1e-8 && coeffs.omega2 > 0.0);
        }
    }
}
