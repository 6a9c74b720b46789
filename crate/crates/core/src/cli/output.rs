//! CSV tables written by the commands. Numbers use `{:.16e}` so that a
//! table round-trips exactly; lines end in `\n`.

use std::fmt::Write as _;

use crate::codim1::Branch;
use crate::codim2::Curve;
use crate::equilibria::Equilibrium;
use crate::integrate::Trajectory;
use crate::model::{per_capita_growth, Parameters};
use crate::numerics::Verdict;
use crate::scan::RegionGrid;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,S,I,P\n");
    for s in &traj.samples {
        let x = s.state;
        let _ = writeln!(out, "{},{},{},{}", num(s.t), num(x.s), num(x.i), num(x.p));
    }
    out
}

pub fn branches_csv(branches: &[Branch]) -> String {
    let mut out = String::from("param,S,I,P,stable,branch_id\n");
    for b in branches {
        for s in &b.samples {
            let x = s.equilibrium.point;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                num(s.param),
                num(x.s),
                num(x.i),
                num(x.p),
                flag(s.stable()),
                b.id
            );
        }
    }
    out
}

pub fn equilibria_csv(rows: &[(Equilibrium, Option<Verdict>)]) -> String {
    let mut out = String::from("kind,S,I,P,feasible,verdict\n");
    for (e, v) in rows {
        let verdict = match v {
            Some(Verdict::Stable) => "stable",
            Some(Verdict::Unstable) => "unstable",
            Some(Verdict::Marginal) => "marginal",
            None => "",
        };
        let x = e.point;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            e.kind,
            num(x.s),
            num(x.i),
            num(x.p),
            flag(e.feasible),
            verdict
        );
    }
    out
}

pub fn curve_csv(curve: &Curve) -> String {
    let mut out = format!("{},{},S,I,P,bt,zh,cusp,gh\n", curve.p1, curve.p2);
    for c in &curve.points {
        let x = c.equilibrium.point;
        let m = c.monitors;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(c.p1),
            num(c.p2),
            num(x.s),
            num(x.i),
            num(x.p),
            num(m.bt),
            num(m.zh),
            opt(m.cusp),
            opt(m.gh)
        );
    }
    out
}

pub fn regions_csv(grid: &RegionGrid) -> String {
    let mut out = String::from("L,r,label\n");
    for (j, r) in grid.r_axis.iter().enumerate() {
        for (i, l) in grid.l_axis.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", num(*l), num(*r), grid.label(i, j).as_str());
        }
    }
    out
}

pub fn threshold_csv(rows: &[(f64, f64)]) -> String {
    let mut out = String::from("r,h\n");
    for (r, h) in rows {
        let _ = writeln!(out, "{},{}", num(*r), num(*h));
    }
    out
}

/// Per-capita susceptible growth `a0 (1 - (S+I)/K)(S - L)` on `n` evenly
/// spaced values of `S` in `s_range`, one column per infected density.
pub fn emit_percapita(
    params: &Parameters,
    i_values: &[f64],
    s_range: (f64, f64),
    n: usize,
) -> String {
    let mut out = String::from("S");
    for i in i_values {
        let _ = write!(out, ",I={i}");
    }
    out.push('\n');
    for k in 0..n {
        let s = if k == 0 {
            s_range.0
        } else if k == n - 1 {
            s_range.1
        } else {
            s_range.0 + (s_range.1 - s_range.0) * k as f64 / (n - 1) as f64
        };
        out.push_str(&num(s));
        for &i in i_values {
            out.push(',');
            out.push_str(&num(per_capita_growth(s, i, params)));
        }
        out.push('\n');
    }
    out
}
