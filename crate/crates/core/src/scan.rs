//! Outcome regions in the `(L, r)` plane and the critical aggregation
//! threshold for disease extinction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{all_equilibria, boundary_equilibria, EquilibriumKind};
use crate::error::{Error, Result};
use crate::integrate::{asymptotic_state, simulate, ExtinctionKind, Outcome, SimOptions};
use crate::model::{ParamName, Parameters, State};
use crate::numerics::{bisect, bracketed_roots};

/// Convergence tolerance handed to [`asymptotic_state`] for grid cells.
pub const CELL_TOL: f64 = 1e-3;
/// Susceptible and predator densities must stay above this for a cell to
/// count as infection-free.
const PERSIST_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Coexistence,
    InfectionFree,
    Collapse,
    Undecided,
}

impl Region {
    pub const ALL: [Region; 4] = [
        Region::Coexistence,
        Region::InfectionFree,
        Region::Collapse,
        Region::Undecided,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Coexistence => "coexistence",
            Region::InfectionFree => "infection_free",
            Region::Collapse => "collapse",
            Region::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionGrid {
    pub l_axis: Vec<f64>,
    pub r_axis: Vec<f64>,
    /// Row-major over `r`: `labels[j * l_axis.len() + i]` is the cell at
    /// `(l_axis[i], r_axis[j])`.
    pub labels: Vec<Region>,
    pub ic: State,
    pub t_end: f64,
}

impl RegionGrid {
    pub fn label(&self, i_l: usize, j_r: usize) -> Region {
        self.labels[j_r * self.l_axis.len() + i_l]
    }

    pub fn count(&self, region: Region) -> usize {
        self.labels.iter().filter(|&&l| l == region).count()
    }
}

fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![range.0];
    }
    (0..n)
        .map(|k| range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Label for one `(L, r)` cell from a single simulation.
pub fn classify_cell(params: &Parameters, ic: &State, opts: &SimOptions) -> Result<Region> {
    let traj = simulate(params, ic, opts)?;
    let outcome = asymptotic_state(&traj, &all_equilibria(params), CELL_TOL);
    let last = traj.final_state();
    let eps = opts.eps_ext;
    let region = match outcome {
        Outcome::Collapsed if traj.event(ExtinctionKind::SExtinct).is_some() => Region::Collapse,
        Outcome::Converged(EquilibriumKind::E4) if last.s > eps && last.i > eps && last.p > eps => {
            Region::Coexistence
        }
        Outcome::Converged(_) | Outcome::Undecided
            if last.i < eps && last.s > PERSIST_MIN && last.p > PERSIST_MIN =>
        {
            Region::InfectionFree
        }
        _ => Region::Undecided,
    };
    Ok(region)
}

/// Simulate every cell of an `nL x nr` grid from the same initial condition.
/// Cells run in parallel; assembly is by index and does not depend on
/// scheduling.
pub fn region_grid(
    params: &Parameters,
    l_range: (f64, f64),
    r_range: (f64, f64),
    nl: usize,
    nr: usize,
    ic: &State,
    opts: &SimOptions,
) -> Result<RegionGrid> {
    if nl == 0 || nr == 0 {
        return Err(Error::InvalidOptions(
            "grid needs at least one cell per axis".into(),
        ));
    }
    for (lo, hi, n) in [(l_range.0, l_range.1, nl), (r_range.0, r_range.1, nr)] {
        if !(lo < hi) && !(n == 1 && lo == hi) {
            return Err(Error::EmptyRange { lo, hi });
        }
    }
    for (name, v) in [
        (ParamName::L, l_range.0),
        (ParamName::L, l_range.1),
        (ParamName::R, r_range.0),
        (ParamName::R, r_range.1),
    ] {
        params.with(name, v)?;
    }
    opts.validate()?;

    let l_axis = axis(l_range, nl);
    let r_axis = axis(r_range, nr);
    let labels = (0..nl * nr)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % nl, idx / nl);
            let p = params
                .with_unchecked(ParamName::L, l_axis[i])
                .with_unchecked(ParamName::R, r_axis[j]);
            classify_cell(&p, ic, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionGrid {
        l_axis,
        r_axis,
        labels,
        ic: *ic,
        t_end: opts.t_end,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalAggregation {
    /// Threshold: `h(r) < 0`, so the infected class dies out, for `r > r_star`.
    pub r_star: f64,
    /// Lower end of the range of `r` where the predator-only equilibrium
    /// exists.
    pub r_feasible: f64,
    /// True when `h < 0` on the whole feasible range and `r_star` is just
    /// its lower end.
    pub boundary_only: bool,
}

/// `e0 S3 - d1 P3 - a1` at aggregation `r`, with `E3 = (S3, 0, P3)`.
pub fn threshold_function(params: &Parameters, r: f64) -> f64 {
    let p = params.with_unchecked(ParamName::R, r);
    let e3 = boundary_equilibria(&p)[4].point;
    p.e0 * e3.s - p.d1 * e3.p - p.a1
}

fn e3_feasible(params: &Parameters, r: f64) -> bool {
    let p = params.with_unchecked(ParamName::R, r);
    let e3 = boundary_equilibria(&p)[4];
    e3.point.s.is_finite() && e3.point.p >= 0.0
}

/// Solve `h(r) = 0` on the range of `r` in `(0, 1)` where `E3` is feasible.
/// `None` when `h > 0` there (the infected class always persists near `E3`)
/// or `E3` is never feasible.
pub fn critical_aggregation(params: &Parameters, tol: f64) -> Option<CriticalAggregation> {
    const N: usize = 2001;
    let lo = 1e-6;
    let hi = 1.0 - 1e-6;
    let rs: Vec<f64> = (0..N)
        .map(|k| lo + (hi - lo) * k as f64 / (N - 1) as f64)
        .collect();

    // first contiguous feasible run, edges refined by bisection
    let start = rs.iter().position(|&r| e3_feasible(params, r))?;
    let end = rs[start..]
        .iter()
        .position(|&r| !e3_feasible(params, r))
        .map_or(N - 1, |k| start + k - 1);
    let edge = |a: f64, b: f64| {
        bisect(
            |r| if e3_feasible(params, r) { 1.0 } else { -1.0 },
            a,
            b,
            tol.min(1e-12),
        )
    };
    let r_lo = if start == 0 {
        rs[0]
    } else {
        edge(rs[start - 1], rs[start])
    };
    let r_hi = if end == N - 1 {
        rs[N - 1]
    } else {
        edge(rs[end], rs[end + 1])
    };
    // stay just inside the feasible range
    let (a, b) = (r_lo + 1e-12, r_hi - 1e-12);

    let h = |r: f64| threshold_function(params, r);
    if let Some(&r_star) = bracketed_roots(h, a, b, N, tol).first() {
        return Some(CriticalAggregation {
            r_star,
            r_feasible: r_lo,
            boundary_only: false,
        });
    }
    (h(0.5 * (a + b)) < 0.0).then_some(CriticalAggregation {
        r_star: r_lo,
        r_feasible: r_lo,
        boundary_only: true,
    })
}
