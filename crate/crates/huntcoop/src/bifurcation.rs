//! Parameter sweeps, critical-value localization and fate maps.
//!
//! A 1-D sweep recomputes equilibria and classifications on a grid and
//! reports two kinds of critical values between adjacent grid points:
//! folds, where the interior equilibrium count changes, and stability
//! switches, where the max real eigenvalue part of a tracked equilibrium
//! changes sign. Grid points are independent and may be evaluated in
//! parallel; results are assembled in grid order, so output does not
//! depend on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{count_interior, interior_equilibria};
use crate::error::{Error, Result};
use crate::integrate::{classify_fate, simulate, Fate, IntegratorConfig};
use crate::model::{ModelParams, ParamAxis, State};
use crate::stability::{
    boundary_stability_closed_form, classify_equilibrium, BoundaryStabilityReport,
    ClassifiedEquilibrium,
};

/// Tolerance to which fold (count-change) parameter values are refined.
pub const FOLD_REFINE_TOL: f64 = 1e-6;

/// A 1-D parameter sweep request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub target: ParamAxis,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub base: ModelParams,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) {
            return Err(Error::InvalidConfig(format!(
                "sweep range must satisfy lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.steps < 2 {
            return Err(Error::InvalidConfig(format!(
                "sweep needs at least 2 steps, got {}",
                self.steps
            )));
        }
        // endpoints valid implies all interior grid values valid for every axis
        self.base.with(self.target, self.lo)?;
        self.base.with(self.target, self.hi)?;
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|i| self.lo + (self.hi - self.lo) * (i as f64) / ((n - 1) as f64))
            .collect()
    }
}

/// Everything computed at one grid value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub interior: Vec<ClassifiedEquilibrium>,
    pub interior_count: usize,
    pub boundary: BoundaryStabilityReport,
}

/// Kind of a detected critical parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalKind {
    /// The interior equilibrium count changes (fold / saddle-node).
    CountChange,
    /// A tracked equilibrium's max real eigenvalue part changes sign.
    StabilitySwitch,
}

impl std::fmt::Display for CriticalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CriticalKind::CountChange => f.write_str("count-change"),
            CriticalKind::StabilitySwitch => f.write_str("stability-switch"),
        }
    }
}

/// A localized critical parameter value with its bracketing grid values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub value: f64,
    pub kind: CriticalKind,
    pub bracket: (f64, f64),
}

/// Result of a 1-D sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationDiagram {
    pub target: ParamAxis,
    pub points: Vec<SweepPoint>,
    pub critical_points: Vec<CriticalPoint>,
}

fn sweep_point(spec: &SweepSpec, value: f64) -> SweepPoint {
    // endpoints were validated; interior grid values of a validated range
    // cannot fail for any axis
    let params = spec.base.with(spec.target, value).expect("validated sweep grid value");
    let interior: Vec<ClassifiedEquilibrium> = interior_equilibria(&params)
        .iter()
        .map(|e| classify_equilibrium(e, &params))
        .collect();
    SweepPoint {
        value,
        interior_count: interior.len(),
        interior,
        boundary: boundary_stability_closed_form(&params),
    }
}

/// Match each equilibrium of `from` to the nearest one in `to`.
/// Returns pairs of indices; unmatched entries start or end branches.
fn pair_nearest(
    from: &[ClassifiedEquilibrium],
    to: &[ClassifiedEquilibrium],
) -> Vec<(usize, usize)> {
    let mut taken = vec![false; to.len()];
    let mut pairs = Vec::new();
    for (i, a) in from.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (j, b) in to.iter().enumerate() {
            if taken[j] {
                continue;
            }
            let d = a.equilibrium.state.distance(&b.equilibrium.state);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, _)) = best {
            taken[j] = true;
            pairs.push((i, j));
        }
    }
    pairs
}

fn refine_fold(spec: &SweepSpec, mut lo: f64, mut hi: f64) -> f64 {
    let count = |v: f64| {
        spec.base
            .with(spec.target, v)
            .map(|p| count_interior(&p))
            .unwrap_or(0)
    };
    let count_lo = count(lo);
    while hi - lo > FOLD_REFINE_TOL {
        let mid = 0.5 * (lo + hi);
        if count(mid) == count_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn refine_switch(spec: &SweepSpec, mut lo: f64, mut hi: f64, track: State) -> f64 {
    let max_re = |v: f64, near: &State| -> Option<(f64, State)> {
        let params = spec.base.with(spec.target, v).ok()?;
        let eqs = interior_equilibria(&params);
        let eq = eqs
            .iter()
            .min_by(|a, b| {
                a.state
                    .distance(near)
                    .partial_cmp(&b.state.distance(near))
                    .unwrap()
            })
            .copied()?;
        let c = classify_equilibrium(&eq, &params);
        Some((c.eigen?.max_real_part, eq.state))
    };
    let mut state = track;
    let sign_lo = match max_re(lo, &state) {
        Some((re, _)) => re < 0.0,
        None => return 0.5 * (lo + hi),
    };
    while hi - lo > FOLD_REFINE_TOL {
        let mid = 0.5 * (lo + hi);
        match max_re(mid, &state) {
            Some((re, s)) => {
                state = s;
                if (re < 0.0) == sign_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            None => break,
        }
    }
    0.5 * (lo + hi)
}

/// Run a 1-D sweep and detect critical values between adjacent grid points.
pub fn sweep(spec: &SweepSpec) -> Result<BifurcationDiagram> {
    spec.validate()?;
    let grid = spec.grid();
    let points: Vec<SweepPoint> =
        grid.par_iter().map(|&v| sweep_point(spec, v)).collect();

    let mut critical_points = Vec::new();
    for w in points.windows(2) {
        let (left, right) = (&w[0], &w[1]);
        if left.interior_count != right.interior_count {
            critical_points.push(CriticalPoint {
                value: refine_fold(spec, left.value, right.value),
                kind: CriticalKind::CountChange,
                bracket: (left.value, right.value),
            });
        }
        for (i, j) in pair_nearest(&left.interior, &right.interior) {
            let (Some(ea), Some(eb)) = (left.interior[i].eigen, right.interior[j].eigen) else {
                continue;
            };
            if (ea.max_real_part < 0.0) != (eb.max_real_part < 0.0) {
                critical_points.push(CriticalPoint {
                    value: refine_switch(
                        spec,
                        left.value,
                        right.value,
                        left.interior[i].equilibrium.state,
                    ),
                    kind: CriticalKind::StabilitySwitch,
                    bracket: (left.value, right.value),
                });
            }
        }
    }

    Ok(BifurcationDiagram { target: spec.target, points, critical_points })
}

/// Bisect the hunting-cooperation value where the tracked coexistence
/// equilibrium (largest prey level at `lo`) changes stability.
///
/// Errors when the max real eigenvalue part has the same sign at both ends,
/// or when the tracked equilibrium disappears inside the bracket (fold).
pub fn find_critical_alpha(base: &ModelParams, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "need lo < hi and tol > 0, got [{lo}, {hi}], tol {tol}"
        )));
    }
    let tracked_max_re = |alpha: f64, near: Option<&State>| -> Result<(f64, State)> {
        let params = base.with_alpha(alpha)?;
        let eqs = interior_equilibria(&params);
        let eq = match near {
            None => eqs.last().copied(),
            Some(s) => eqs
                .iter()
                .min_by(|a, b| {
                    a.state.distance(s).partial_cmp(&b.state.distance(s)).unwrap()
                })
                .copied(),
        }
        .ok_or(Error::EquilibriumLost { fold_estimate: alpha })?;
        let c = classify_equilibrium(&eq, &params);
        let eigen = c.eigen.expect("interior equilibrium has eigenvalues");
        Ok((eigen.max_real_part, eq.state))
    };

    let (re_lo, mut state) = tracked_max_re(lo, None)?;
    let (re_hi, _) = tracked_max_re(hi, Some(&state))?;
    if (re_lo < 0.0) == (re_hi < 0.0) {
        return Err(Error::NoSignChange { lo, hi, f_lo: re_lo, f_hi: re_hi });
    }
    let sign_lo = re_lo < 0.0;

    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let (re_mid, s) = tracked_max_re(mid, Some(&state))?;
        state = s;
        if (re_mid < 0.0) == sign_lo {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// One axis of a fate map: a model parameter or an initial condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FateAxisKind {
    Param(ParamAxis),
    InitialPrey,
    InitialPredator,
}

impl std::fmt::Display for FateAxisKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FateAxisKind::Param(p) => write!(f, "{p}"),
            FateAxisKind::InitialPrey => f.write_str("u0"),
            FateAxisKind::InitialPredator => f.write_str("v0"),
        }
    }
}

impl std::str::FromStr for FateAxisKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u0" => Ok(FateAxisKind::InitialPrey),
            "v0" => Ok(FateAxisKind::InitialPredator),
            other => Ok(FateAxisKind::Param(other.parse()?)),
        }
    }
}

/// A fate-map axis: what varies, over which range, how many cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FateAxis {
    pub kind: FateAxisKind,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl FateAxis {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || self.steps < 1 {
            return Err(Error::InvalidConfig(format!(
                "fate axis needs lo < hi and steps >= 1, got [{}, {}] x{}",
                self.lo, self.hi, self.steps
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![0.5 * (self.lo + self.hi)];
        }
        (0..self.steps)
            .map(|i| self.lo + (self.hi - self.lo) * (i as f64) / ((self.steps - 1) as f64))
            .collect()
    }
}

/// Long-run outcome per grid cell over two axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FateMap {
    pub axis1: FateAxis,
    pub axis2: FateAxis,
    /// Row-major: `fates[i * axis2.steps + j]` for axis1 value i, axis2 value j.
    pub fates: Vec<Fate>,
    pub base: ModelParams,
    pub init: State,
}

impl FateMap {
    pub fn fate_at(&self, i: usize, j: usize) -> Fate {
        self.fates[i * self.axis2.steps + j]
    }
}

fn apply_axis(
    kind: FateAxisKind,
    value: f64,
    params: ModelParams,
    init: State,
) -> Result<(ModelParams, State)> {
    match kind {
        FateAxisKind::Param(axis) => Ok((params.with(axis, value)?, init)),
        FateAxisKind::InitialPrey => Ok((params, State::new(value, init.v)?)),
        FateAxisKind::InitialPredator => Ok((params, State::new(init.u, value)?)),
    }
}

/// Simulate every cell of a 2-D grid and classify its fate. Cells are
/// independent; failures (invalid cell parameters, integrator trouble)
/// record as `Undetermined`.
pub fn fate_map(
    axis1: &FateAxis,
    axis2: &FateAxis,
    base: &ModelParams,
    init: State,
    cfg: &IntegratorConfig,
) -> Result<FateMap> {
    axis1.validate()?;
    axis2.validate()?;
    cfg.validate()?;
    let cells = axis1.steps.checked_mul(axis2.steps).unwrap_or(usize::MAX);
    if cells > 1_000_000 {
        return Err(Error::InvalidConfig(format!("fate map too large: {cells} cells")));
    }
    let g1 = axis1.grid();
    let g2 = axis2.grid();
    let indices: Vec<(usize, usize)> =
        (0..g1.len()).flat_map(|i| (0..g2.len()).map(move |j| (i, j))).collect();
    let fates: Vec<Fate> = indices
        .par_iter()
        .map(|&(i, j)| {
            let cell = apply_axis(axis1.kind, g1[i], *base, init)
                .and_then(|(p, s)| apply_axis(axis2.kind, g2[j], p, s));
            match cell {
                Ok((params, init)) => match simulate(init, &params, cfg) {
                    Ok(traj) => classify_fate(&traj, cfg),
                    Err(_) => Fate::Undetermined,
                },
                Err(_) => Fate::Undetermined,
            }
        })
        .collect();
    Ok(FateMap { axis1: *axis1, axis2: *axis2, fates, base: *base, init })
}
