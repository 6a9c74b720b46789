//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use sip_dyn::codim1::{sweep, EventKind, SweepResult};
use sip_dyn::codim2::{solve_zh_on_boundary, trace_curve, Codim2Kind, CurveKind};
use sip_dyn::equilibria::{all_equilibria, interior_equilibria};
use sip_dyn::integrate::{
    asymptotic_state, simulate, ExtinctionKind, Outcome, SimOptions, Trajectory,
};
use sip_dyn::model::{jacobian, rhs};
use sip_dyn::numerics::{char_coeffs, eig3, eigen_verdict, routh_hurwitz, Mat3};
use sip_dyn::scan::{classify_cell, critical_aggregation, region_grid, Region};
use sip_dyn::{ParamName, Parameters, State};

struct Check {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Check {
    Check { pass, detail }
}

fn close(x: &State, want: [f64; 3], tol: f64) -> bool {
    x.to_array()
        .iter()
        .zip(want)
        .all(|(a, b)| (a - b).abs() <= tol)
}

fn secs(d: Duration) -> String {
    format!("{:.3}s", d.as_secs_f64())
}

fn baseline_with(name: ParamName, v: f64) -> Parameters {
    Parameters::baseline().with(name, v).unwrap()
}

fn c1_equilibria() -> Check {
    let t0 = Instant::now();
    let one = interior_equilibria(&baseline_with(ParamName::L, -0.5));
    let two = interior_equilibria(&baseline_with(ParamName::L, -0.1));
    let el = t0.elapsed();
    let ok1 = one.len() == 1 && close(&one[0].point, [2.6134, 0.7875, 2.7887], 1e-3);
    let want = [[2.4296, 0.8310, 2.5524], [0.9578, 1.2660, 0.6600]];
    let ok2 = two.len() == 2
        && want
            .iter()
            .all(|w| two.iter().any(|e| close(&e.point, *w, 1e-3)));
    let pts = |v: &[sip_dyn::equilibria::Equilibrium]| {
        v.iter()
            .map(|e| format!("{:.4?}", e.point.to_array()))
            .collect::<Vec<_>>()
            .join(" ")
    };
    verdict(
        ok1 && ok2 && el < Duration::from_secs(1),
        format!(
            "L=-0.5: {} | L=-0.1: {} | {}",
            pts(&one),
            pts(&two),
            secs(el)
        ),
    )
}

fn find(
    res: &SweepResult,
    kind: EventKind,
    near: f64,
    tol: f64,
) -> Option<&sip_dyn::codim1::BifurcationEvent> {
    res.events
        .iter()
        .filter(|e| e.kind == kind && (e.value - near).abs() <= tol)
        .min_by(|a, b| (a.value - near).abs().total_cmp(&(b.value - near).abs()))
}

fn l_sweep() -> (SweepResult, Duration) {
    let t0 = Instant::now();
    let res = sweep(&Parameters::baseline(), ParamName::L, (-1.0, 1.0), 2001).unwrap();
    (res, t0.elapsed())
}

fn r_sweep() -> (SweepResult, Duration) {
    let t0 = Instant::now();
    let res = sweep(&Parameters::baseline(), ParamName::R, (0.05, 0.95), 2001).unwrap();
    (res, t0.elapsed())
}

fn c2_codim1(l: &(SweepResult, Duration), r: &(SweepResult, Duration)) -> Check {
    let sn = find(&l.0, EventKind::SaddleNode, 0.2396, 0.005)
        .filter(|e| close(&e.equilibrium.point, [1.8642, 0.9760, 1.8254], 1e-2));
    let h = find(&l.0, EventKind::Hopf, 0.2184, 0.005)
        .filter(|e| close(&e.equilibrium.point, [1.6746, 1.0295, 1.5817], 1e-2));
    let tc = find(&l.0, EventKind::Transcritical, -0.4312, 0.005)
        .filter(|e| close(&e.equilibrium.point, [0.4444, 1.5, 0.0], 1e-3));
    let tc_r = find(&r.0, EventKind::Transcritical, 0.7641, 0.005);
    let fmt = |e: Option<&sip_dyn::codim1::BifurcationEvent>| {
        e.map_or("missing".to_string(), |e| format!("{:.6}", e.value))
    };
    let fast = l.1 < Duration::from_secs(10) && r.1 < Duration::from_secs(10);
    verdict(
        sn.is_some() && h.is_some() && tc.is_some() && tc_r.is_some() && fast,
        format!(
            "SN L={} H L={} TC L={} TC r={} | sweeps {} {}",
            fmt(sn),
            fmt(h),
            fmt(tc),
            fmt(tc_r),
            secs(l.1),
            secs(r.1)
        ),
    )
}

fn c3_lyapunov(l: &(SweepResult, Duration)) -> Check {
    match find(&l.0, EventKind::Hopf, 0.2184, 0.005) {
        Some(h) => match h.first_lyapunov {
            Some(l1) => verdict(
                l1 > 0.0,
                format!("l1 = {l1:.6} at L = {:.6} (positive required)", h.value),
            ),
            None => verdict(false, "first Lyapunov coefficient unavailable".into()),
        },
        None => verdict(false, "no Hopf point near L = 0.2184".into()),
    }
}

fn c4_codim2() -> Check {
    let p = Parameters::baseline();
    let mut notes = Vec::new();

    let t0 = Instant::now();
    let zh = solve_zh_on_boundary(&p, ParamName::L, ParamName::A0, (-1.6, 1.3));
    let zh_ok = match &zh {
        Ok(z) => {
            let m = z.eigenvalues.by_modulus();
            let pair_ok = m[1..]
                .iter()
                .all(|l| (l.im.abs() - 0.9665).abs() <= 0.01 && l.re.abs() < 1e-3)
                && m[1].im * m[2].im < 0.0;
            notes.push(format!(
                "ZH ({:.4}, {:.4}) |l1|={:.1e} im={:.4}",
                z.p1,
                z.p2,
                m[0].norm(),
                m[1].im.abs()
            ));
            (z.p1 + 1.6111).abs() <= 0.02
                && (z.p2 - 1.2780).abs() <= 0.02
                && m[0].norm() < 1e-3
                && pair_ok
        }
        Err(e) => {
            notes.push(format!("ZH error: {e}"));
            false
        }
    };
    let t_zh = t0.elapsed();

    let t0 = Instant::now();
    let hopf = trace_curve(
        &p,
        CurveKind::Hopf,
        ParamName::L,
        ParamName::A0,
        (0.2184, 3.0),
        600,
    );
    let t_hopf = t0.elapsed();
    let gh_ok = match &hopf {
        Ok(c) => {
            let gh = c.codim2.iter().find(|z| {
                z.kind == Codim2Kind::GeneralizedHopf
                    && (z.p1 + 1.6507).abs() <= 0.05
                    && (z.p2 - 1.2485).abs() <= 0.05
            });
            notes.push(gh.map_or("GH missing".into(), |z| {
                format!("GH ({:.4}, {:.4})", z.p1, z.p2)
            }));
            gh.is_some()
        }
        Err(e) => {
            notes.push(format!("Hopf trace error: {e}"));
            false
        }
    };

    let t0 = Instant::now();
    let fold = trace_curve(
        &p,
        CurveKind::Fold,
        ParamName::L,
        ParamName::E0,
        (0.2396, 0.9),
        600,
    );
    let t_fold = t0.elapsed();
    let (cp_ok, bt_ok) = match &fold {
        Ok(c) => {
            let near = |k: Codim2Kind, a: f64, b: f64| {
                c.codim2
                    .iter()
                    .find(|z| z.kind == k && (z.p1 - a).abs() <= 0.05 && (z.p2 - b).abs() <= 0.05)
            };
            let cp = near(Codim2Kind::Cusp, 2.5747, 0.1349);
            let bt = near(Codim2Kind::BogdanovTakens, 4.4253, 0.1704);
            notes.push(cp.map_or("CP missing".into(), |z| {
                format!("CP ({:.4}, {:.4})", z.p1, z.p2)
            }));
            let bt_ok = bt.is_some_and(|z| {
                let m = z.eigenvalues.by_modulus();
                m[0].norm() < 1e-3 && m[1].norm() < 1e-3
            });
            notes.push(bt.map_or("BT missing".into(), |z| {
                let m = z.eigenvalues.by_modulus();
                format!(
                    "BT ({:.4}, {:.4}) |l|={:.1e},{:.1e}",
                    z.p1,
                    z.p2,
                    m[0].norm(),
                    m[1].norm()
                )
            }));
            (cp.is_some(), bt_ok)
        }
        Err(e) => {
            notes.push(format!("fold trace error: {e}"));
            (false, false)
        }
    };
    let limit = Duration::from_secs(60);
    let fast = t_zh < limit && t_hopf < limit && t_fold < limit;
    notes.push(format!("{} {} {}", secs(t_zh), secs(t_hopf), secs(t_fold)));
    verdict(zh_ok && gh_ok && cp_ok && bt_ok && fast, notes.join(" | "))
}

fn timed_sim(p: &Parameters, ic: State, t_end: f64) -> (Trajectory, Duration) {
    let t0 = Instant::now();
    let traj = simulate(p, &ic, &SimOptions::with_t_end(t_end)).unwrap();
    (traj, t0.elapsed())
}

fn c5_outcomes() -> Check {
    let ic = State::new(2.0, 1.0, 3.0);
    let (a, ta) = timed_sim(&baseline_with(ParamName::R, 0.5), ic, 500.0);
    let (b, tb) = timed_sim(&baseline_with(ParamName::R, 0.8), ic, 500.0);
    let xa = a.final_state();
    let xb = b.final_state();
    let ok_a = close(&xa, [2.61341, 0.787546, 2.78867], 1e-2);
    let ok_b = xb.i < 1e-6 && (xb.s - 3.4077).abs() <= 1e-2 && (xb.p - 5.5457).abs() <= 1e-2;
    let fast = ta < Duration::from_secs(2) && tb < Duration::from_secs(2);
    verdict(
        ok_a && ok_b && fast,
        format!(
            "r=0.5 -> {:.5?} | r=0.8 -> {:.5?} | {} {}",
            xa.to_array(),
            xb.to_array(),
            secs(ta),
            secs(tb)
        ),
    )
}

fn state_at(traj: &Trajectory, t: f64) -> State {
    traj.samples
        .iter()
        .take_while(|s| s.t <= t)
        .last()
        .map(|s| s.state)
        .unwrap_or_default()
}

fn c6_collapse() -> Check {
    let ic = State::new(1.0, 1.0, 0.52);
    let run = |l: f64, ic: State| {
        let p = Parameters::extinction_baseline(l);
        let traj = simulate(&p, &ic, &SimOptions::with_t_end(500.0)).unwrap();
        let out = asymptotic_state(&traj, &all_equilibria(&p), 1e-3);
        (traj, out)
    };
    let (a, oa) = run(-0.8, ic);
    let ok_a =
        matches!(oa, Outcome::Converged(_)) && close(&a.final_state(), [1.06, 0.494, 0.792], 1e-2);
    let (_, ob) = run(0.0, ic);
    let ok_b = matches!(ob, Outcome::Oscillatory | Outcome::Undecided);
    let (c, _) = run(0.1, ic);
    let ts = c.event(ExtinctionKind::SExtinct).map(|e| e.t);
    let x100 = state_at(&c, 100.0);
    let ok_c = ts.is_some_and(|t| (t - 6.2).abs() <= 0.5) && x100.i < 1e-4 && x100.p < 1e-4;
    let (d, _) = run(0.1, State::new(0.05, 1.0, 0.52));
    let td = d.event(ExtinctionKind::SExtinct).map(|e| e.t);
    verdict(
        ok_a && ok_b && ok_c && td.is_some(),
        format!(
            "L=-0.8 {:?} {:.4?} | L=0 {:?} | L=0.1 S_extinct t={:?}, (I,P)(100)=({:.1e},{:.1e}) | S(0)=0.05 S_extinct t={:?}",
            oa,
            a.final_state().to_array(),
            ob,
            ts,
            x100.i,
            x100.p,
            td
        ),
    )
}

fn c7_threshold(r: &(SweepResult, Duration)) -> Check {
    let p = Parameters::baseline();
    let Some(c) = critical_aggregation(&p, 1e-12) else {
        return verdict(false, "no threshold found".into());
    };
    let tc =
        r.0.events
            .iter()
            .filter(|e| e.kind == EventKind::Transcritical)
            .min_by(|a, b| {
                (a.value - c.r_star)
                    .abs()
                    .total_cmp(&(b.value - c.r_star).abs())
            });
    let gap = tc.map_or(f64::INFINITY, |e| (e.value - c.r_star).abs());
    let ic = State::new(2.0, 1.0, 3.0);
    let below = simulate(
        &baseline_with(ParamName::R, c.r_star - 0.05),
        &ic,
        &SimOptions::default(),
    )
    .unwrap()
    .final_state();
    let above = simulate(
        &baseline_with(ParamName::R, c.r_star + 0.05),
        &ic,
        &SimOptions::default(),
    )
    .unwrap()
    .final_state();
    let ok = (c.r_star - 0.7641).abs() <= 0.01 && gap <= 1e-3 && below.i > 1e-3 && above.i < 1e-6;
    verdict(
        ok,
        format!(
            "r* = {:.6}, |r* - TC| = {gap:.1e}, I(r*-0.05) = {:.4}, I(r*+0.05) = {:.1e}",
            c.r_star, below.i, above.i
        ),
    )
}

fn c8_regions() -> Check {
    let p = Parameters::baseline();
    let ic = State::new(2.0, 1.0, 3.0);
    let opts = SimOptions::with_t_end(500.0);
    let t0 = Instant::now();
    let g = region_grid(&p, (-1.0, 1.0), (0.05, 0.95), 61, 61, &ic, &opts).unwrap();
    let el = t0.elapsed();
    let all_three = [Region::Coexistence, Region::InfectionFree, Region::Collapse]
        .iter()
        .all(|&r| g.count(r) > 0);
    let cell = |l: f64, r: f64| {
        let q = p
            .with(ParamName::L, l)
            .unwrap()
            .with(ParamName::R, r)
            .unwrap();
        classify_cell(&q, &ic, &opts).unwrap()
    };
    let nearest = |axis: &[f64], v: f64| {
        (0..axis.len())
            .min_by(|&a, &b| (axis[a] - v).abs().total_cmp(&(axis[b] - v).abs()))
            .unwrap()
    };
    let grid_at = |l: f64, r: f64| g.label(nearest(&g.l_axis, l), nearest(&g.r_axis, r));
    let spots = cell(-0.5, 0.5) == Region::Coexistence
        && grid_at(-0.5, 0.5) == Region::Coexistence
        && cell(-0.5, 0.8) == Region::InfectionFree
        && grid_at(-0.5, 0.8) == Region::InfectionFree
        && cell(0.9, 0.5) == Region::Collapse
        && grid_at(0.9, 0.5) == Region::Collapse;
    let q = p.with(ParamName::L, 0.9).unwrap();
    let s_event = simulate(&q, &ic, &opts)
        .unwrap()
        .event(ExtinctionKind::SExtinct)
        .map(|e| e.t);
    let undecided = g.count(Region::Undecided) as f64 / g.labels.len() as f64;
    let threads = rayon::current_num_threads();
    verdict(
        all_three && spots && s_event.is_some() && undecided <= 0.02 && el < Duration::from_secs(300),
        format!(
            "coexistence {} infection_free {} collapse {} undecided {} ({:.2}%) | collapse cell S_extinct t={:?} | {} on {threads} thread(s)",
            g.count(Region::Coexistence),
            g.count(Region::InfectionFree),
            g.count(Region::Collapse),
            g.count(Region::Undecided),
            100.0 * undecided,
            s_event,
            secs(el)
        ),
    )
}

fn random_params(rng: &mut StdRng, ordered_rates: bool) -> Parameters {
    let k = rng.gen_range(1.0..6.0);
    let mut p = Parameters {
        a0: rng.gen_range(0.5..5.0),
        a1: rng.gen_range(0.1..1.0),
        a2: rng.gen_range(0.1..1.0),
        d0: rng.gen_range(0.05..1.0),
        d1: rng.gen_range(0.05..1.0),
        d2: rng.gen_range(0.05..1.0),
        d3: rng.gen_range(0.05..1.0),
        e0: rng.gen_range(0.1..1.5),
        k,
        l: rng.gen_range(-0.9 * k..0.9 * k),
        r: rng.gen_range(0.1..0.9),
    };
    if ordered_rates {
        if p.d0 < p.d2 {
            std::mem::swap(&mut p.d0, &mut p.d2);
        }
        if p.d1 < p.d3 {
            std::mem::swap(&mut p.d1, &mut p.d3);
        }
    }
    p.validated().unwrap()
}

fn random_ic(rng: &mut StdRng, k: f64) -> State {
    State::new(
        rng.gen_range(0.0..k),
        rng.gen_range(0.0..2.0),
        rng.gen_range(0.0..3.0),
    )
}

fn c9_properties() -> Check {
    let mut rng = StdRng::seed_from_u64(0x5199);
    let opts = SimOptions::with_t_end(100.0);

    let mut negative = 0;
    for _ in 0..100 {
        let p = random_params(&mut rng, false);
        let traj = simulate(&p, &random_ic(&mut rng, p.k), &opts).unwrap();
        negative += traj
            .samples
            .iter()
            .filter(|s| !s.state.is_nonnegative())
            .count();
    }

    // the bound's derivation drops a term that is positive for L < 0, so
    // violations are split by the sign of L
    let (mut unbounded, mut unbounded_weak) = (0, 0);
    for _ in 0..100 {
        let p = random_params(&mut rng, true);
        let ic = random_ic(&mut rng, p.k);
        let mu = p.a1.min(p.a2);
        let lk = p.l + p.k;
        let q = lk * (mu + p.a0 * lk * lk / (4.0 * p.k));
        let total0 = ic.s + ic.i + ic.p;
        let x = simulate(&p, &ic, &opts).unwrap().final_state();
        if x.s + x.i + x.p > total0.max(q / mu) + 1e-6 {
            unbounded += 1;
            unbounded_weak += usize::from(p.l < 0.0);
        }
    }

    let mut worst_jac: f64 = 0.0;
    for _ in 0..100 {
        let p = random_params(&mut rng, false);
        let x = State::new(
            rng.gen_range(0.1..p.k),
            rng.gen_range(0.0..2.0),
            rng.gen_range(0.0..3.0),
        );
        let j = jacobian(&x, &p).unwrap();
        let mut fd = [[0.0; 3]; 3];
        for c in 0..3 {
            let h = 1e-6 * (1.0 + x.to_array()[c].abs());
            let mut xp = x.to_array();
            let mut xm = x.to_array();
            xp[c] += h;
            xm[c] -= h;
            let fp = rhs(&State::from_array(xp), &p);
            let fm = rhs(&State::from_array(xm), &p);
            for row in 0..3 {
                fd[row][c] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        for k in 0..9 {
            let a = j.0[k / 3][k % 3];
            worst_jac = worst_jac.max((a - fd[k / 3][k % 3]).abs() / (1.0 + a.abs()));
        }
    }

    let mut worst_res: f64 = 0.0;
    for _ in 0..100 {
        let p = random_params(&mut rng, false);
        for e in all_equilibria(&p).iter().filter(|e| e.feasible) {
            let f = rhs(&e.point, &p);
            worst_res = worst_res.max(f.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
        }
    }

    let mut disagree = 0;
    for _ in 0..1000 {
        let m = Mat3(std::array::from_fn(|_| {
            std::array::from_fn(|_| rng.gen_range(-2.0..2.0))
        }));
        if routh_hurwitz(&char_coeffs(&m)).verdict != eigen_verdict(&eig3(&m)) {
            disagree += 1;
        }
    }

    verdict(
        negative == 0 && unbounded == 0 && worst_jac <= 1e-5 && worst_res < 1e-8 && disagree == 0,
        format!(
            "(a) negative samples {negative} (b) bound violations {unbounded} ({unbounded_weak} with L < 0) (c) max scaled Jacobian error {worst_jac:.1e} (d) max residual {worst_res:.1e} (e) RH/eig disagreements {disagree}/1000"
        ),
    )
}

fn main() {
    let l = l_sweep();
    let r = r_sweep();
    let results = [
        ("equilibrium enumeration", c1_equilibria()),
        ("codim-1 points", c2_codim1(&l, &r)),
        ("Hopf criticality", c3_lyapunov(&l)),
        ("codim-2 points", c4_codim2()),
        ("aggregation sets the outcome", c5_outcomes()),
        ("strong Allee collapse", c6_collapse()),
        ("aggregation threshold", c7_threshold(&r)),
        ("region diagram", c8_regions()),
        ("property suites", c9_properties()),
    ];
    let mut failed = 0;
    for (k, (name, o)) in results.iter().enumerate() {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{tag}] {name}: {}", k + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
