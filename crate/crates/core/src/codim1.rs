//! One-parameter sweeps: equilibrium branches with stability, and detection
//! of saddle-node, Hopf and transcritical points along them.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{
    boundary_equilibria, classify, interior_equilibria, interior_state, refine_interior_root,
    Equilibrium, EquilibriumKind, StabilityReport,
};
use crate::error::{Error, Result};
use crate::model::{
    bilinear_form, jacobian, rhs_param_derivative, trilinear_form, ParamName, Parameters, State,
};
use crate::numerics::{
    bisect, char_coeffs, dot, eig3, null_vector_complex, null_vector_raw, solve3, solve3_complex,
    CubicCoefficients, EigenTriple, Mat3, Verdict,
};

/// Parameter localization tolerance for events.
pub const EVENT_TOL: f64 = 1e-8;
/// Smallest imaginary part accepted for a Hopf pair.
pub const MIN_HOPF_IMAG: f64 = 1e-4;
const LINK_TOL: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "index", rename_all = "snake_case")]
pub enum BranchKind {
    Boundary(EquilibriumKind),
    Interior(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSample {
    pub param: f64,
    pub equilibrium: Equilibrium,
    pub report: StabilityReport,
}

impl BranchSample {
    pub fn stable(&self) -> bool {
        self.report.verdict == Verdict::Stable
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub id: usize,
    pub param: ParamName,
    pub kind: BranchKind,
    pub samples: Vec<BranchSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    SaddleNode,
    Hopf,
    Transcritical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationEvent {
    pub kind: EventKind,
    pub param: ParamName,
    pub value: f64,
    pub equilibrium: Equilibrium,
    pub branch: BranchKind,
    /// Omega3 for folds, Omega1*Omega2 - Omega3 for Hopf, det(J) for transcritical.
    pub test_value: f64,
    pub eigenvalues: EigenTriple,
    pub coefficients: CubicCoefficients,
    pub first_lyapunov: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub branches: Vec<Branch>,
    pub events: Vec<BifurcationEvent>,
}

/// Equilibrium of the given branch at `params`, starting from `s_guess` for
/// interior branches. Feasibility is recomputed but not required.
pub fn locate(params: &Parameters, kind: BranchKind, s_guess: f64) -> Option<Equilibrium> {
    match kind {
        BranchKind::Boundary(k) => boundary_equilibria(params)
            .into_iter()
            .find(|e| e.kind == k),
        BranchKind::Interior(_) => {
            let s = refine_interior_root(params, s_guess)?;
            let point = interior_state(s, params);
            Some(Equilibrium {
                kind: EquilibriumKind::E4,
                point,
                feasible: point.s > 0.0 && point.i > 0.0 && point.p > 0.0,
            })
        }
    }
}

struct Slice {
    boundary: Vec<(Equilibrium, StabilityReport)>,
    interior: Vec<(Equilibrium, StabilityReport)>,
}

fn slice_at(params: &Parameters) -> Slice {
    let classified = |eqs: Vec<Equilibrium>| {
        eqs.into_iter()
            .filter(|e| e.feasible && e.kind != EquilibriumKind::E0)
            .filter_map(|e| classify(&e, params).ok().map(|r| (e, r)))
            .collect::<Vec<_>>()
    };
    Slice {
        boundary: classified(boundary_equilibria(params)),
        interior: classified(interior_equilibria(params)),
    }
}

/// Sweep one parameter over `n` evenly spaced values in `[lo, hi]`.
pub fn sweep(
    params: &Parameters,
    which: ParamName,
    range: (f64, f64),
    n: usize,
) -> Result<SweepResult> {
    let (lo, hi) = range;
    if !(lo < hi) {
        return Err(Error::EmptyRange { lo, hi });
    }
    if n < 3 {
        return Err(Error::InvalidOptions(format!(
            "sweep needs n >= 3, got {n}"
        )));
    }
    params.validate()?;
    params.with(which, lo)?;
    params.with(which, hi)?;

    let values: Vec<f64> = (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect();
    let slices: Vec<Slice> = values
        .par_iter()
        .map(|&v| slice_at(&params.with_unchecked(which, v)))
        .collect();

    let mut branches: Vec<Branch> = Vec::new();
    let mut spans: Vec<(usize, usize)> = Vec::new(); // first/last sample index per branch

    // boundary kinds: one branch per contiguous feasible run
    for kind in [
        EquilibriumKind::E1K,
        EquilibriumKind::E1L,
        EquilibriumKind::E2,
        EquilibriumKind::E3,
    ] {
        let mut open: Option<usize> = None;
        for (k, sl) in slices.iter().enumerate() {
            match sl.boundary.iter().find(|(e, _)| e.kind == kind) {
                Some((e, r)) => {
                    let idx = *open.get_or_insert_with(|| {
                        branches.push(Branch {
                            id: branches.len(),
                            param: which,
                            kind: BranchKind::Boundary(kind),
                            samples: Vec::new(),
                        });
                        spans.push((k, k));
                        branches.len() - 1
                    });
                    branches[idx].samples.push(BranchSample {
                        param: values[k],
                        equilibrium: *e,
                        report: r.clone(),
                    });
                    spans[idx].1 = k;
                }
                None => open = None,
            }
        }
    }

    // interior roots: greedy nearest-neighbour linking between slices
    let mut active: Vec<usize> = Vec::new();
    let mut n_interior = 0;
    for (k, sl) in slices.iter().enumerate() {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (a, &b) in active.iter().enumerate() {
            let last = branches[b].samples.last().unwrap().equilibrium.point;
            for (j, (e, _)) in sl.interior.iter().enumerate() {
                pairs.push((last.max_abs_diff(&e.point), a, j));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut used_a = vec![false; active.len()];
        let mut target: Vec<Option<usize>> = vec![None; sl.interior.len()];
        for (d, a, j) in pairs {
            if d < LINK_TOL && !used_a[a] && target[j].is_none() {
                used_a[a] = true;
                target[j] = Some(active[a]);
            }
        }
        let mut next_active = Vec::new();
        for (j, (e, r)) in sl.interior.iter().enumerate() {
            let idx = target[j].unwrap_or_else(|| {
                branches.push(Branch {
                    id: branches.len(),
                    param: which,
                    kind: BranchKind::Interior(n_interior),
                    samples: Vec::new(),
                });
                n_interior += 1;
                spans.push((k, k));
                branches.len() - 1
            });
            branches[idx].samples.push(BranchSample {
                param: values[k],
                equilibrium: *e,
                report: r.clone(),
            });
            spans[idx].1 = k;
            next_active.push(idx);
        }
        active = next_active;
    }

    let mut events = Vec::new();
    for b in &branches {
        events.extend(branch_events(params, which, b));
    }
    events.extend(fold_events(params, which, &values, &branches, &spans));
    events.sort_by(|a, b| a.value.total_cmp(&b.value));

    Ok(SweepResult { branches, events })
}

fn make_event(
    kind: EventKind,
    params: &Parameters,
    which: ParamName,
    value: f64,
    branch: BranchKind,
    eq: Equilibrium,
) -> Option<BifurcationEvent> {
    let p = params.with_unchecked(which, value);
    let j = jacobian(&eq.point, &p).ok()?;
    let coefficients = char_coeffs(&j);
    let test_value = match kind {
        EventKind::SaddleNode => coefficients.omega3,
        EventKind::Hopf => coefficients.hurwitz_margin(),
        EventKind::Transcritical => j.det(),
    };
    let first_lyapunov = match kind {
        EventKind::Hopf => first_lyapunov(&eq, &p).ok(),
        _ => None,
    };
    Some(BifurcationEvent {
        kind,
        param: which,
        value,
        equilibrium: eq,
        branch,
        test_value,
        eigenvalues: eig3(&j),
        coefficients,
        first_lyapunov,
    })
}

/// Transcritical (det J on boundary branches) and Hopf sign changes between
/// consecutive samples of one branch.
fn branch_events(params: &Parameters, which: ParamName, b: &Branch) -> Vec<BifurcationEvent> {
    let mut out = Vec::new();
    for w in b.samples.windows(2) {
        let (s0, s1) = (&w[0], &w[1]);
        let (p0, p1) = (s0.param, s1.param);
        let interp_s = |v: f64| {
            let t = (v - p0) / (p1 - p0);
            s0.equilibrium.point.s + t * (s1.equilibrium.point.s - s0.equilibrium.point.s)
        };
        let coeffs_at = |v: f64| -> Option<(Equilibrium, CubicCoefficients, f64)> {
            let p = params.with_unchecked(which, v);
            let eq = locate(&p, b.kind, interp_s(v))?;
            let j = jacobian(&eq.point, &p).ok()?;
            Some((eq, char_coeffs(&j), j.det()))
        };

        if matches!(b.kind, BranchKind::Boundary(_)) {
            let (d0, d1) = (
                -s0.report.coefficients.omega3,
                -s1.report.coefficients.omega3,
            );
            if d0 != 0.0 && d1 != 0.0 && (d0 < 0.0) != (d1 < 0.0) {
                let v = bisect(
                    |v| coeffs_at(v).map_or(f64::NAN, |c| c.2),
                    p0,
                    p1,
                    EVENT_TOL,
                );
                if let Some((eq, _, _)) = coeffs_at(v) {
                    out.extend(make_event(
                        EventKind::Transcritical,
                        params,
                        which,
                        v,
                        b.kind,
                        eq,
                    ));
                }
            }
        }

        let (c0, c1) = (&s0.report.coefficients, &s1.report.coefficients);
        let (h0, h1) = (c0.hurwitz_margin(), c1.hurwitz_margin());
        let pair_ok = |e: &EigenTriple| e.complex_pair(MIN_HOPF_IMAG).is_some();
        if h0 != 0.0
            && h1 != 0.0
            && (h0 < 0.0) != (h1 < 0.0)
            && c0.omega2 > 0.0
            && c1.omega2 > 0.0
            && pair_ok(&s0.report.eigenvalues)
            && pair_ok(&s1.report.eigenvalues)
        {
            let v = bisect(
                |v| coeffs_at(v).map_or(f64::NAN, |c| c.1.hurwitz_margin()),
                p0,
                p1,
                EVENT_TOL,
            );
            if let Some((eq, c, _)) = coeffs_at(v) {
                if c.omega2 > 0.0 {
                    out.extend(make_event(EventKind::Hopf, params, which, v, b.kind, eq));
                }
            }
        }
    }
    out
}

/// Folds: two interior branches that end (or begin) together bracket a
/// saddle-node between the adjacent sweep values.
fn fold_events(
    params: &Parameters,
    which: ParamName,
    values: &[f64],
    branches: &[Branch],
    spans: &[(usize, usize)],
) -> Vec<BifurcationEvent> {
    let n = values.len();
    let interior: Vec<usize> = (0..branches.len())
        .filter(|&b| matches!(branches[b].kind, BranchKind::Interior(_)))
        .collect();
    let mut out = Vec::new();
    for k in 0..n - 1 {
        let ending: Vec<usize> = interior
            .iter()
            .copied()
            .filter(|&b| spans[b].1 == k)
            .collect();
        let starting: Vec<usize> = interior
            .iter()
            .copied()
            .filter(|&b| spans[b].0 == k + 1)
            .collect();
        for (group, at_end) in [(ending, true), (starting, false)] {
            if group.len() < 2 {
                continue;
            }
            let pick = |b: usize| {
                let s = &branches[b].samples;
                if at_end {
                    s.last().unwrap()
                } else {
                    s.first().unwrap()
                }
            };
            // closest pair of endpoints
            let mut best: Option<(f64, usize, usize)> = None;
            for x in 0..group.len() {
                for y in x + 1..group.len() {
                    let d = pick(group[x])
                        .equilibrium
                        .point
                        .max_abs_diff(&pick(group[y]).equilibrium.point);
                    if best.map_or(true, |(bd, _, _)| d < bd) {
                        best = Some((d, group[x], group[y]));
                    }
                }
            }
            let (_, x, y) = best.unwrap();
            let s_mid = 0.5 * (pick(x).equilibrium.point.s + pick(y).equilibrium.point.s);
            let v_start = if at_end { values[k] } else { values[k + 1] };
            let slack = 1e-3 * (values[k + 1] - values[k]);
            if let Some((s, v)) = fold_newton(params, which, s_mid, v_start) {
                if v >= values[k] - slack && v <= values[k + 1] + slack {
                    let p = params.with_unchecked(which, v);
                    let point = interior_state(s, &p);
                    let eq = Equilibrium {
                        kind: EquilibriumKind::E4,
                        point,
                        feasible: point.s > 0.0 && point.i > 0.0 && point.p > 0.0,
                    };
                    out.extend(make_event(
                        EventKind::SaddleNode,
                        params,
                        which,
                        v,
                        branches[x].kind,
                        eq,
                    ));
                }
            }
        }
    }
    out
}

/// Newton on `{g(S) = 0, Omega3 = 0}` in `(S, param)`.
pub fn fold_newton(params: &Parameters, which: ParamName, s0: f64, v0: f64) -> Option<(f64, f64)> {
    let resid = |s: f64, v: f64| -> Option<[f64; 2]> {
        let p = params.with_unchecked(which, v);
        let x = interior_state(s, &p);
        let j = jacobian(&x, &p).ok()?;
        let r = [crate::equilibria::interior_residual(s, &p), -j.det()];
        (r[0].is_finite() && r[1].is_finite()).then_some(r)
    };
    let (mut s, mut v) = (s0, v0);
    for _ in 0..50 {
        let f = resid(s, v)?;
        let hs = 1e-7 * (1.0 + s.abs());
        let hv = 1e-7 * (1.0 + v.abs());
        let fs_p = resid(s + hs, v)?;
        let fs_m = resid(s - hs, v)?;
        let fv_p = resid(s, v + hv)?;
        let fv_m = resid(s, v - hv)?;
        let a = [
            [
                (fs_p[0] - fs_m[0]) / (2.0 * hs),
                (fv_p[0] - fv_m[0]) / (2.0 * hv),
            ],
            [
                (fs_p[1] - fs_m[1]) / (2.0 * hs),
                (fv_p[1] - fv_m[1]) / (2.0 * hv),
            ],
        ];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let ds = (f[0] * a[1][1] - f[1] * a[0][1]) / det;
        let dv = (a[0][0] * f[1] - a[1][0] * f[0]) / det;
        let mut lam = 1.0;
        while s - lam * ds <= 0.0 {
            lam *= 0.5;
        }
        s -= lam * ds;
        v -= lam * dv;
        if (lam * ds).abs() < 1e-13 * (1.0 + s.abs()) && (lam * dv).abs() < 1e-13 * (1.0 + v.abs())
        {
            break;
        }
    }
    let f = resid(s, v)?;
    (f[0].abs() < 1e-9 && f[1].abs() < 1e-8).then_some((s, v))
}

/// `D^2 f(x)[w, w]`.
pub fn second_directional(x: &State, params: &Parameters, w: &[f64; 3]) -> Result<[f64; 3]> {
    bilinear_form(x, params, w, w)
}

type CVec = [Complex64; 3];

fn split(z: &CVec) -> [([f64; 3], Complex64); 2] {
    [
        (z.map(|c| c.re), Complex64::new(1.0, 0.0)),
        (z.map(|c| c.im), Complex64::new(0.0, 1.0)),
    ]
}

fn bilinear_c(x: &State, params: &Parameters, a: &CVec, b: &CVec) -> Result<CVec> {
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    for (u, fu) in split(a) {
        for (v, fv) in split(b) {
            let r = bilinear_form(x, params, &u, &v)?;
            for c in 0..3 {
                acc[c] += fu * fv * r[c];
            }
        }
    }
    Ok(acc)
}

fn trilinear_c(x: &State, params: &Parameters, a: &CVec, b: &CVec, d: &CVec) -> Result<CVec> {
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    for (u, fu) in split(a) {
        for (v, fv) in split(b) {
            for (w, fw) in split(d) {
                let r = trilinear_form(x, params, &u, &v, &w)?;
                for c in 0..3 {
                    acc[c] += fu * fv * fw * r[c];
                }
            }
        }
    }
    Ok(acc)
}

fn inner(p: &CVec, v: &CVec) -> Complex64 {
    p.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// First Lyapunov coefficient at a Hopf point. Positive means subcritical.
pub fn first_lyapunov(eq: &Equilibrium, params: &Parameters) -> Result<f64> {
    first_lyapunov_scaled(eq, params, 1.0)
}

/// As [`first_lyapunov`] with the critical eigenvector pre-scaled by
/// `scale`; the sign does not depend on it.
pub fn first_lyapunov_scaled(eq: &Equilibrium, params: &Parameters, scale: f64) -> Result<f64> {
    let x = eq.point;
    let j = jacobian(&x, params)?;
    let e = eig3(&j);
    let lam = e.complex_pair(1e-8).ok_or_else(|| {
        Error::NotAHopfPoint(format!("eigenvalues {:?} have no complex pair", e.0))
    })?;
    let omega = lam.im;
    if lam.re.abs() > 1e-4 * (1.0 + omega) {
        return Err(Error::NotAHopfPoint(format!(
            "complex pair {lam} is not on the imaginary axis"
        )));
    }
    let real = e.0.iter().find(|z| z.im.abs() < 1e-8).map(|z| z.re);
    if real.map_or(true, |r| r.abs() < 1e-8) {
        return Err(Error::NotAHopfPoint("third eigenvalue is zero".into()));
    }

    let iw = Complex64::new(0.0, omega);
    let jc = j.to_complex();
    let shift = |m: &[[Complex64; 3]; 3], z: Complex64| {
        let mut out = *m;
        for (k, row) in out.iter_mut().enumerate() {
            row[k] -= z;
        }
        out
    };
    let q = null_vector_complex(&shift(&jc, iw)).ok_or(Error::DegenerateEigenvector(0.0))?;
    let q = q.map(|z| z * scale);
    let jt = j.transpose().to_complex();
    let p = null_vector_complex(&shift(&jt, -iw)).ok_or(Error::DegenerateEigenvector(0.0))?;
    let pq = inner(&p, &q);
    if pq.norm() < 1e-12 {
        return Err(Error::DegenerateEigenvector(pq.norm()));
    }
    let p = p.map(|z| z / pq.conj());

    let qbar = q.map(|z| z.conj());
    let b_qqbar = bilinear_c(&x, params, &q, &qbar)?;
    let h11 = solve3(&j, &b_qqbar.map(|z| z.re)).ok_or(Error::SingularJacobian)?;
    let h11 = h11.map(|v| Complex64::new(v, 0.0));
    let b_qq = bilinear_c(&x, params, &q, &q)?;
    let h20 = solve3_complex(&shift(&jc, 2.0 * iw).map(|r| r.map(|z| -z)), &b_qq)
        .ok_or(Error::SingularJacobian)?;

    let c_term = inner(&p, &trilinear_c(&x, params, &q, &q, &qbar)?);
    let b1 = inner(&p, &bilinear_c(&x, params, &q, &h11)?);
    let b2 = inner(&p, &bilinear_c(&x, params, &qbar, &h20)?);
    Ok((c_term - 2.0 * b1 + b2).re / (2.0 * omega))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    /// Whether the named condition (`== 0` or `!= 0`) holds at 1e-6.
    pub holds: bool,
}

impl Quantity {
    fn nonzero(name: &str, value: f64) -> Self {
        Quantity {
            name: format!("{name} != 0"),
            value,
            holds: value.abs() > 1e-6,
        }
    }

    fn zero(name: &str, value: f64) -> Self {
        Quantity {
            name: format!("{name} == 0"),
            value,
            holds: value.abs() <= 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub kind: EventKind,
    pub quantities: Vec<Quantity>,
}

impl TransversalityReport {
    pub fn get(&self, prefix: &str) -> Option<&Quantity> {
        self.quantities.iter().find(|q| q.name.starts_with(prefix))
    }
}

fn kernel_pair(j: &Mat3) -> Result<([f64; 3], [f64; 3])> {
    let (u, nu) = null_vector_raw(j);
    let (v, nv) = null_vector_raw(&j.transpose());
    if nu < 1e-12 || nv < 1e-12 {
        return Err(Error::DegenerateEigenvector(nu.min(nv)));
    }
    Ok((u.map(|c| c / nu), v.map(|c| c / nv)))
}

/// Sotomayor quantities for folds and transcriticals, eigenvalue crossing
/// speed for Hopf points.
pub fn transversality_report(
    event: &BifurcationEvent,
    params: &Parameters,
) -> Result<TransversalityReport> {
    let which = event.param;
    let p = params.with_unchecked(which, event.value);
    let x = event.equilibrium.point;
    let j = jacobian(&x, &p)?;
    let quantities = match event.kind {
        EventKind::SaddleNode => {
            let (u, v) = kernel_pair(&j)?;
            vec![
                Quantity::nonzero("V.f_mu", dot(&v, &rhs_param_derivative(&x, &p, which))),
                Quantity::nonzero("V.D2f(U,U)", dot(&v, &second_directional(&x, &p, &u)?)),
            ]
        }
        EventKind::Transcritical => {
            let (u, v) = kernel_pair(&j)?;
            let dv = 1e-6 * (1.0 + event.value.abs());
            let jp = jacobian(&x, &params.with_unchecked(which, event.value + dv))?;
            let jm = jacobian(&x, &params.with_unchecked(which, event.value - dv))?;
            let ju = [0, 1, 2].map(|r| (dot(&jp.0[r], &u) - dot(&jm.0[r], &u)) / (2.0 * dv));
            vec![
                Quantity::zero("V.f_mu", dot(&v, &rhs_param_derivative(&x, &p, which))),
                Quantity::nonzero("V.Df_mu U", dot(&v, &ju)),
                Quantity::nonzero("V.D2f(U,U)", dot(&v, &second_directional(&x, &p, &u)?)),
            ]
        }
        EventKind::Hopf => {
            let dv = 1e-5 * (1.0 + event.value.abs());
            let at = |v: f64| -> Result<(f64, CubicCoefficients)> {
                let pv = params.with_unchecked(which, v);
                let eq = locate(&pv, event.branch, x.s).ok_or_else(|| {
                    Error::NotAHopfPoint("branch lost near the Hopf point".into())
                })?;
                let jv = jacobian(&eq.point, &pv)?;
                let pair = eig3(&jv)
                    .complex_pair(MIN_HOPF_IMAG)
                    .ok_or_else(|| Error::NotAHopfPoint("complex pair lost".into()))?;
                Ok((pair.re, char_coeffs(&jv)))
            };
            let (rp, cp) = at(event.value + dv)?;
            let (rm, cm) = at(event.value - dv)?;
            let c = char_coeffs(&j);
            let d = |a: f64, b: f64| (a - b) / (2.0 * dv);
            let formula = (d(cp.omega3, cm.omega3)
                - d(cp.omega1, cm.omega1) * c.omega2
                - c.omega1 * d(cp.omega2, cm.omega2))
                / (2.0 * (c.omega2 + c.omega1 * c.omega1));
            vec![
                Quantity::nonzero("dRe(lambda)/dmu", (rp - rm) / (2.0 * dv)),
                Quantity::nonzero("dRe(lambda)/dmu from coefficients", formula),
            ]
        }
    };
    Ok(TransversalityReport {
        kind: event.kind,
        quantities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rhs;

    fn l_sweep(lo: f64, hi: f64, n: usize) -> SweepResult {
        sweep(&Parameters::baseline(), ParamName::L, (lo, hi), n).unwrap()
    }

    fn find(res: &SweepResult, kind: EventKind, near: f64) -> &BifurcationEvent {
        res.events
            .iter()
            .filter(|e| e.kind == kind)
            .min_by(|a, b| (a.value - near).abs().total_cmp(&(b.value - near).abs()))
            .unwrap_or_else(|| panic!("no {kind:?} event in {:?}", res.events))
    }

    #[test]
    fn rejects_bad_ranges() {
        let p = Parameters::baseline();
        assert!(matches!(
            sweep(&p, ParamName::L, (1.0, -1.0), 10),
            Err(Error::EmptyRange { .. })
        ));
        assert!(sweep(&p, ParamName::L, (-1.0, 1.0), 2).is_err());
        assert!(sweep(&p, ParamName::R, (0.5, 1.5), 10).is_err());
    }

    #[test]
    fn l_sweep_events() {
        let res = l_sweep(-1.0, 1.0, 401);
        let sn = find(&res, EventKind::SaddleNode, 0.24);
        assert!((sn.value - 0.2396).abs() < 5e-4, "{}", sn.value);
        assert!(sn.test_value.abs() < 1e-6);
        let h = find(&res, EventKind::Hopf, 0.22);
        assert!((h.value - 0.2184).abs() < 5e-4, "{}", h.value);
        assert!(h.test_value.abs() < 1e-6);
        let tc = find(&res, EventKind::Transcritical, -0.43);
        assert!((tc.value + 0.4312).abs() < 5e-4);
        assert_eq!(tc.branch, BranchKind::Boundary(EquilibriumKind::E2));
        assert!(tc.eigenvalues.0.iter().any(|z| z.norm() < 1e-6));
    }

    #[test]
    fn quiet_interval_has_no_events() {
        assert!(l_sweep(-0.3, -0.2, 101).events.is_empty());
    }

    #[test]
    fn branch_samples_are_ordered_and_on_the_equilibrium_set() {
        let res = l_sweep(-1.0, 1.0, 201);
        let base = Parameters::baseline();
        for b in &res.branches {
            assert!(b.samples.windows(2).all(|w| w[0].param < w[1].param));
            for s in &b.samples {
                let f = rhs(
                    &s.equilibrium.point,
                    &base.with_unchecked(ParamName::L, s.param),
                );
                assert!(f.iter().all(|v| v.abs() < 1e-8), "{f:?}");
            }
        }
    }

    #[test]
    fn lyapunov_sign_is_scale_invariant() {
        let res = l_sweep(0.2, 0.23, 61);
        let h = find(&res, EventKind::Hopf, 0.2184);
        let p = Parameters::baseline().with_unchecked(ParamName::L, h.value);
        let l1 = first_lyapunov(&h.equilibrium, &p).unwrap();
        for scale in [0.1, 3.0, 25.0] {
            let ls = first_lyapunov_scaled(&h.equilibrium, &p, scale).unwrap();
            assert_eq!(ls.signum(), l1.signum());
        }
    }

    #[test]
    fn lyapunov_refuses_non_hopf_points() {
        let p = Parameters::baseline();
        let eq = interior_equilibria(&p)[0];
        assert!(matches!(
            first_lyapunov(&eq, &p),
            Err(Error::NotAHopfPoint(_))
        ));
    }

    #[test]
    fn transversality_at_codim1_points() {
        let p = Parameters::baseline();
        let res = l_sweep(-1.0, 1.0, 401);
        let sn = transversality_report(find(&res, EventKind::SaddleNode, 0.24), &p).unwrap();
        assert!(sn.quantities.iter().all(|q| q.holds), "{sn:?}");
        let h = transversality_report(find(&res, EventKind::Hopf, 0.22), &p).unwrap();
        assert!(h.quantities.iter().all(|q| q.holds), "{h:?}");
        let (a, b) = (h.quantities[0].value, h.quantities[1].value);
        assert!((a - b).abs() < 1e-3 * (1.0 + a.abs()), "{a} vs {b}");
        let tc = transversality_report(find(&res, EventKind::Transcritical, -0.43), &p).unwrap();
        assert!(tc.get("V.f_mu").unwrap().holds, "{tc:?}");
    }
}
