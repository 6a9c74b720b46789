use sip_dyn::codim1::{sweep, BranchKind, EventKind, SweepResult};
use sip_dyn::codim2::{solve_zh_on_boundary, trace_curve, Codim2Kind, Curve, CurveKind};
use sip_dyn::equilibria::{interior_equilibria, EquilibriumKind};
use sip_dyn::model::jacobian;
use sip_dyn::numerics::char_coeffs;
use sip_dyn::{ParamName, Parameters};

const N: usize = 2001;

fn l_sweep() -> SweepResult {
    sweep(&Parameters::baseline(), ParamName::L, (-1.0, 1.0), N).unwrap()
}

fn step() -> f64 {
    2.0 / (N - 1) as f64
}

/// Interior samples within `w` of `value`, with the sign of det(J).
fn det_signs_near(res: &SweepResult, value: f64, w: f64) -> (bool, bool) {
    let p = Parameters::baseline();
    let mut neg = false;
    let mut pos = false;
    for b in res
        .branches
        .iter()
        .filter(|b| matches!(b.kind, BranchKind::Interior(_)))
    {
        for s in b.samples.iter().filter(|s| (s.param - value).abs() <= w) {
            let q = p.with_unchecked(ParamName::L, s.param);
            let det = jacobian(&s.equilibrium.point, &q).unwrap().det();
            neg |= det < 0.0;
            pos |= det > 0.0;
        }
    }
    (neg, pos)
}

#[test]
fn saddle_node_separates_opposite_determinants() {
    let res = l_sweep();
    let folds: Vec<_> = res
        .events
        .iter()
        .filter(|e| e.kind == EventKind::SaddleNode)
        .collect();
    assert!(!folds.is_empty());
    for ev in folds {
        assert_eq!(
            det_signs_near(&res, ev.value, 5.0 * step()),
            (true, true),
            "{}",
            ev.value
        );
    }
}

#[test]
fn hopf_pair_crosses_the_axis() {
    let res = l_sweep();
    let p = Parameters::baseline();
    for ev in res.events.iter().filter(|e| e.kind == EventKind::Hopf) {
        let b = res.branches.iter().find(|b| b.kind == ev.branch).unwrap();
        let k = b.samples.iter().position(|s| s.param > ev.value).unwrap();
        let (lo, hi) = (&b.samples[k - 1], &b.samples[k]);
        let pair = |s: &sip_dyn::codim1::BranchSample| {
            let q = p.with_unchecked(ParamName::L, s.param);
            let j = jacobian(&s.equilibrium.point, &q).unwrap();
            sip_dyn::numerics::eig3(&j).complex_pair(1e-4).unwrap()
        };
        let (a, c) = (pair(lo), pair(hi));
        assert!(a.re * c.re < 0.0, "{a} {c}");
        assert!(a.im.abs() > 1e-4 && c.im.abs() > 1e-4);
    }
}

// On E2 = (S, I, 0) the determinant factors as -C33 * C12 * C21; the
// crossing at L = -0.4312 is C33 = d2 S^r + d3 I - a2 passing through zero.
#[test]
fn transcritical_on_predator_free_branch() {
    let res = l_sweep();
    let p = Parameters::baseline();
    let ev = res
        .events
        .iter()
        .find(|e| {
            e.kind == EventKind::Transcritical
                && e.branch == BranchKind::Boundary(EquilibriumKind::E2)
        })
        .unwrap();
    let b = res.branches.iter().find(|b| b.kind == ev.branch).unwrap();
    let k = b.samples.iter().position(|s| s.param > ev.value).unwrap();
    let c33 = |s: &sip_dyn::codim1::BranchSample| {
        let q = p.with_unchecked(ParamName::L, s.param);
        jacobian(&s.equilibrium.point, &q).unwrap().0[2][2]
    };
    assert!(c33(&b.samples[k - 1]) * c33(&b.samples[k]) < 0.0);
    let at = p.with_unchecked(ParamName::L, ev.value);
    let j = jacobian(&ev.equilibrium.point, &at).unwrap();
    assert!(j.0[2][2].abs() < 1e-6);
    assert!(j.0[0][1] * j.0[1][0] < 0.0);
}

#[test]
fn stability_flips_only_at_events() {
    let res = l_sweep();
    let tol = 1.5 * step();
    for b in &res.branches {
        for w in b.samples.windows(2) {
            if w[0].stable() != w[1].stable() {
                let explained = res.events.iter().any(|e| {
                    e.branch == b.kind && e.value >= w[0].param - tol && e.value <= w[1].param + tol
                });
                assert!(
                    explained,
                    "{:?} flips between {} and {}",
                    b.kind, w[0].param, w[1].param
                );
            }
        }
    }
}

#[test]
fn interior_count_changes_only_at_events() {
    let res = l_sweep();
    let p = Parameters::baseline();
    let n = 401;
    let h = 2.0 / (n - 1) as f64;
    let count = |l: f64| {
        interior_equilibria(&p.with_unchecked(ParamName::L, l))
            .iter()
            .filter(|e| e.feasible)
            .count()
    };
    let mut prev = count(-1.0);
    for k in 1..n {
        let l = -1.0 + h * k as f64;
        let c = count(l);
        if c != prev {
            let explained = res.events.iter().any(|e| {
                matches!(e.kind, EventKind::SaddleNode | EventKind::Transcritical)
                    && e.value >= l - 2.0 * h
                    && e.value <= l + h
            });
            assert!(explained, "interior count {prev} -> {c} near L = {l}");
        }
        prev = c;
    }
}

#[test]
fn r_sweep_threshold_transcritical() {
    let res = sweep(&Parameters::baseline(), ParamName::R, (0.05, 0.95), N).unwrap();
    let tc = res
        .events
        .iter()
        .find(|e| e.kind == EventKind::Transcritical && (e.value - 0.7641).abs() < 0.005)
        .unwrap();
    assert!(tc.equilibrium.point.i.abs() < 1e-8);
}

fn hopf_curve() -> Curve {
    trace_curve(
        &Parameters::baseline(),
        CurveKind::Hopf,
        ParamName::L,
        ParamName::A0,
        (0.2184, 3.0),
        600,
    )
    .unwrap()
}

fn fold_curve() -> Curve {
    trace_curve(
        &Parameters::baseline(),
        CurveKind::Fold,
        ParamName::L,
        ParamName::E0,
        (0.2396, 0.9),
        600,
    )
    .unwrap()
}

#[test]
fn curve_points_solve_their_defining_system() {
    for c in [hopf_curve(), fold_curve()] {
        assert!(c.points.len() > 10);
        for pt in &c.points {
            assert!(
                pt.residual < 1e-8,
                "{:?} at ({}, {}): {}",
                c.kind,
                pt.p1,
                pt.p2,
                pt.residual
            );
        }
    }
}

#[test]
fn zero_hopf_agrees_between_methods() {
    let c = hopf_curve();
    let traced = c
        .codim2
        .iter()
        .find(|z| z.kind == Codim2Kind::ZeroHopf && z.feasible)
        .unwrap();
    let direct = solve_zh_on_boundary(
        &Parameters::baseline(),
        ParamName::L,
        ParamName::A0,
        (-1.6, 1.3),
    )
    .unwrap();
    assert!(
        (traced.p1 - direct.p1).abs() < 1e-3,
        "{} {}",
        traced.p1,
        direct.p1
    );
    assert!(
        (traced.p2 - direct.p2).abs() < 1e-3,
        "{} {}",
        traced.p2,
        direct.p2
    );
}

#[test]
fn bogdanov_takens_has_a_double_zero() {
    let c = fold_curve();
    let bts: Vec<_> = c
        .codim2
        .iter()
        .filter(|z| z.kind == Codim2Kind::BogdanovTakens)
        .collect();
    assert!(!bts.is_empty());
    for z in bts {
        let m = z.eigenvalues.by_modulus();
        assert!(
            m[0].norm() < 1e-4 && m[1].norm() < 1e-4,
            "({}, {}): {m:?}",
            z.p1,
            z.p2
        );
        assert!(m[2].norm() > 1e-2);
    }
}

#[test]
fn tracing_from_the_far_end_finds_the_same_points() {
    let base = Parameters::baseline();
    for c in [hopf_curve(), fold_curve()] {
        let end = c.points.last().unwrap();
        let back = trace_curve(&base, c.kind, c.p1, c.p2, (end.p1, end.p2), 1500).unwrap();
        for z in &c.codim2 {
            let hit = back.codim2.iter().any(|w| {
                w.kind == z.kind && (w.p1 - z.p1).abs() < 1e-3 && (w.p2 - z.p2).abs() < 1e-3
            });
            assert!(
                hit,
                "{:?} {:?} at ({}, {}) not recovered",
                c.kind, z.kind, z.p1, z.p2
            );
        }
    }
}

#[test]
fn fold_test_vanishes_along_fold_curve() {
    let base = Parameters::baseline();
    let c = fold_curve();
    for pt in c.points.iter().step_by(25) {
        let q = base
            .with_unchecked(ParamName::L, pt.p1)
            .with_unchecked(ParamName::E0, pt.p2);
        let j = jacobian(&pt.equilibrium.point, &q).unwrap();
        assert!(char_coeffs(&j).omega3.abs() < 1e-6);
    }
}
