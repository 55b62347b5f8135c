//! Equilibrium enumeration.
//!
//! Boundary equilibria are `(0,0)`, `(1,0)` and `(b,0)`. Interior equilibria
//! come from eliminating `v`: setting `dv/dt = 0` with `v ≠ 0` gives
//!
//! ```text
//! v(u) = u·(c−d) / (d − α·u·(c−d))
//! ```
//!
//! and substituting into the prey equilibrium condition leaves a cubic in `u`:
//!
//! ```text
//! (a·c/d)·(u−b)·(1−u)·(d − α·u·(c−d)) = c − d
//! ```
//!
//! Roots are bracketed on a fine grid, refined by bisection and Newton, and
//! each `(u, v(u))` pair is polished by 2-D Newton on the full system. Only
//! points with full-system residual below [`RESIDUAL_TOL`] are returned.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derivatives, jacobian_analytic, ModelParams, State};

/// Max-norm residual bound for accepted equilibria.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Roots of the reduced cubic closer than this in `u` are merged and
/// flagged as a tangency (saddle-node candidate).
pub const MERGE_TOL: f64 = 1e-8;

/// Grid points used to bracket sign changes of the cubic.
const BRACKET_GRID: usize = 2048;

/// Which fixed point an [`Equilibrium`] is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    /// The extinction state (0, 0).
    Origin,
    /// Prey at carrying capacity, (1, 0).
    PreyOnlyCarrying,
    /// Prey at the Allee threshold, (b, 0).
    PreyOnlyAllee,
    /// Both populations positive.
    Interior,
}

impl std::fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EquilibriumKind::Origin => "origin",
            EquilibriumKind::PreyOnlyCarrying => "prey-only (1,0)",
            EquilibriumKind::PreyOnlyAllee => "prey-only (b,0)",
            EquilibriumKind::Interior => "interior",
        };
        f.write_str(s)
    }
}

/// A located fixed point with its verification residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub state: State,
    pub kind: EquilibriumKind,
    /// Max-norm of the vector field at `state`. Zero for the origin by the
    /// extension convention.
    pub residual: f64,
    /// True for the Allee point when `b ≤ 0` places it outside the
    /// biologically relevant quadrant. Always false otherwise.
    pub out_of_quadrant: bool,
}

/// The boundary equilibria of a parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySet {
    pub points: Vec<Equilibrium>,
    /// Set when `b = 0` makes the Allee point coincide with the origin;
    /// `points` then holds two distinct states instead of three.
    pub allee_coincides_origin: bool,
}

/// Candidate `u` roots of the reduced cubic before full-system polishing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorCandidateSet {
    /// Ascending `u` values with `|cubic(u)|` small after refinement.
    pub roots: Vec<f64>,
    /// Open interval of `u` scanned: `v(u) > 0` requires staying left of the
    /// pole of `v(u)` and inside the unit prey range.
    pub admissible_interval: (f64, f64),
    /// True when two roots merged within [`MERGE_TOL`]: a fold candidate.
    pub tangency: bool,
}

fn residual_at(state: &State, params: &ModelParams) -> f64 {
    derivatives(state, params).max_norm()
}

fn boundary_point(u: f64, kind: EquilibriumKind, params: &ModelParams) -> Equilibrium {
    let state = State { u, v: 0.0 };
    let residual = if kind == EquilibriumKind::Origin { 0.0 } else { residual_at(&state, params) };
    Equilibrium { state, kind, residual, out_of_quadrant: u < 0.0 }
}

/// The boundary equilibria `(0,0)`, `(1,0)`, `(b,0)`.
///
/// For `b < 0` the Allee point is still reported, labeled out-of-quadrant.
/// For `b = 0` it coincides with the origin and is deduplicated.
pub fn boundary_equilibria(params: &ModelParams) -> BoundarySet {
    let mut points = vec![
        boundary_point(0.0, EquilibriumKind::Origin, params),
        boundary_point(1.0, EquilibriumKind::PreyOnlyCarrying, params),
    ];
    let coincides = params.b().abs() < 1e-14;
    if !coincides {
        points.push(boundary_point(params.b(), EquilibriumKind::PreyOnlyAllee, params));
    }
    BoundarySet { points, allee_coincides_origin: coincides }
}

/// The predator level paired with a prey level `u` at interior equilibrium:
/// `v(u) = u(c−d) / (d − αu(c−d))`.
pub fn v_from_u(u: f64, params: &ModelParams) -> Result<f64> {
    let (c, d, alpha) = (params.c(), params.d(), params.alpha());
    let denom = d - alpha * u * (c - d);
    if denom.abs() < 1e-14 {
        return Err(Error::Pole { u });
    }
    Ok(u * (c - d) / denom)
}

/// The reduced cubic `(ac/d)(u−b)(1−u)(d − αu(c−d)) − (c−d)`, whose positive
/// roots in the admissible interval are interior prey levels.
pub fn interior_cubic(u: f64, params: &ModelParams) -> f64 {
    let (a, b, c, d, alpha) = (params.a(), params.b(), params.c(), params.d(), params.alpha());
    (a * c / d) * (u - b) * (1.0 - u) * (d - alpha * u * (c - d)) - (c - d)
}

fn interior_cubic_du(u: f64, params: &ModelParams) -> f64 {
    let h = 1e-7 * (1.0 + u.abs());
    (interior_cubic(u + h, params) - interior_cubic(u - h, params)) / (2.0 * h)
}

/// Bisection to high precision on a bracketed sign change, then a few Newton
/// polish iterations kept inside the bracket.
fn refine_root(mut lo: f64, mut hi: f64, params: &ModelParams) -> f64 {
    let mut f_lo = interior_cubic(lo, params);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-15 * (1.0 + mid.abs()) {
            break;
        }
        let f_mid = interior_cubic(mid, params);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_lo < 0.0) == (f_mid < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..4 {
        let f = interior_cubic(x, params);
        let df = interior_cubic_du(x, params);
        if df == 0.0 {
            break;
        }
        let next = x - f / df;
        if next.is_finite() && next > lo && next < hi {
            x = next;
        } else {
            break;
        }
    }
    x
}

/// Bracket and refine the cubic's roots over the admissible interval.
pub fn interior_candidates(params: &ModelParams) -> InteriorCandidateSet {
    let (c, d, alpha) = (params.c(), params.d(), params.alpha());
    // v(u) > 0 requires c > d (and u left of the pole of v(u)).
    if c <= d {
        return InteriorCandidateSet {
            roots: Vec::new(),
            admissible_interval: (0.0, 0.0),
            tangency: false,
        };
    }
    let pole = if alpha > 0.0 { d / (alpha * (c - d)) } else { f64::INFINITY };
    let hi = pole.min(1.0);
    let lo = 0.0;
    if hi <= lo {
        return InteriorCandidateSet {
            roots: Vec::new(),
            admissible_interval: (lo, hi),
            tangency: false,
        };
    }
    // open interval: stay off u = 0 and the pole
    let eps = 1e-12 * (1.0 + hi);
    let (scan_lo, scan_hi) = (lo + eps, hi - eps);

    let mut raw = Vec::new();
    let mut prev_u = scan_lo;
    let mut prev_f = interior_cubic(prev_u, params);
    for i in 1..=BRACKET_GRID {
        let u = scan_lo + (scan_hi - scan_lo) * (i as f64 / BRACKET_GRID as f64);
        let f = interior_cubic(u, params);
        if prev_f == 0.0 {
            raw.push(prev_u);
        } else if (prev_f < 0.0) != (f < 0.0) {
            raw.push(refine_root(prev_u, u, params));
        }
        prev_u = u;
        prev_f = f;
    }
    if prev_f == 0.0 {
        raw.push(prev_u);
    }
    raw.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut roots: Vec<f64> = Vec::new();
    let mut tangency = false;
    for r in raw {
        match roots.last() {
            Some(&last) if (r - last).abs() < MERGE_TOL => tangency = true,
            _ => roots.push(r),
        }
    }
    InteriorCandidateSet { roots, admissible_interval: (lo, hi), tangency }
}

/// One 2-D Newton iteration pass on the full system, starting from a
/// candidate pair. Returns the polished state when Newton stays finite.
fn polish_full_system(mut state: State, params: &ModelParams) -> State {
    for _ in 0..50 {
        let f = derivatives(&state, params);
        if f.max_norm() < 1e-15 {
            break;
        }
        let j = match jacobian_analytic(&state, params) {
            Ok(j) => j,
            Err(_) => break,
        };
        let det = j.det();
        if det.abs() < 1e-30 {
            break;
        }
        let du = (-f.du_dt * j.j22 + f.dv_dt * j.j12) / det;
        let dv = (-f.dv_dt * j.j11 + f.du_dt * j.j21) / det;
        let next = State { u: state.u + du, v: state.v + dv };
        if !next.u.is_finite() || !next.v.is_finite() {
            break;
        }
        let moved = state.distance(&next);
        state = next;
        if moved < 1e-16 * (1.0 + state.u.abs() + state.v.abs()) {
            break;
        }
    }
    state
}

/// All interior equilibria, polished and residual-verified.
/// An empty list is a valid outcome.
pub fn interior_equilibria(params: &ModelParams) -> Vec<Equilibrium> {
    let candidates = interior_candidates(params);
    let mut found: Vec<Equilibrium> = Vec::new();
    for u in candidates.roots {
        let v = match v_from_u(u, params) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if v <= 0.0 {
            continue;
        }
        let polished = polish_full_system(State { u, v }, params);
        if polished.u <= 0.0 || polished.v <= 0.0 {
            continue;
        }
        let residual = residual_at(&polished, params);
        if residual >= RESIDUAL_TOL {
            continue;
        }
        let duplicate = found
            .iter()
            .any(|e| (e.state.u - polished.u).abs() < MERGE_TOL && (e.state.v - polished.v).abs() < MERGE_TOL);
        if duplicate {
            continue;
        }
        found.push(Equilibrium {
            state: polished,
            kind: EquilibriumKind::Interior,
            residual,
            out_of_quadrant: false,
        });
    }
    found.sort_by(|x, y| x.state.u.partial_cmp(&y.state.u).unwrap());
    found
}

/// Number of interior equilibria. The cubic admits up to three real roots;
/// a count of 3 is tolerated (outside the observed regime) and surfaces
/// through this value.
pub fn count_interior(params: &ModelParams) -> usize {
    interior_equilibria(params).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(a: f64, b: f64, c: f64, d: f64, alpha: f64) -> ModelParams {
        ModelParams::new(a, b, c, d, alpha).unwrap()
    }

    #[test]
    fn boundary_set_positive_b() {
        let set = boundary_equilibria(&params(10.0, 0.25, 2.0, 1.0, 0.92));
        assert_eq!(set.points.len(), 3);
        assert!(!set.allee_coincides_origin);
        let states: Vec<(f64, f64)> = set.points.iter().map(|e| (e.state.u, e.state.v)).collect();
        assert_eq!(states, vec![(0.0, 0.0), (1.0, 0.0), (0.25, 0.0)]);
        assert!(set.points.iter().all(|e| e.residual < 1e-14));
        assert!(set.points.iter().all(|e| !e.out_of_quadrant));
    }

    #[test]
    fn boundary_set_zero_b_deduplicates() {
        let set = boundary_equilibria(&params(10.0, 0.0, 2.0, 1.0, 0.5));
        assert_eq!(set.points.len(), 2);
        assert!(set.allee_coincides_origin);
    }

    #[test]
    fn boundary_set_negative_b_labeled() {
        let set = boundary_equilibria(&params(10.0, -0.25, 2.0, 1.0, 0.5));
        assert_eq!(set.points.len(), 3);
        let allee = set.points.iter().find(|e| e.kind == EquilibriumKind::PreyOnlyAllee).unwrap();
        assert_eq!(allee.state.u, -0.25);
        assert!(allee.out_of_quadrant);
    }

    #[test]
    fn v_from_u_known_values() {
        let p = params(10.0, 0.25, 2.0, 1.0, 0.5);
        assert_relative_eq!(v_from_u(0.5, &p).unwrap(), 2.0 / 3.0, max_relative = 1e-15);
        let p0 = params(10.0, 0.25, 2.0, 1.0, 0.0);
        assert_relative_eq!(v_from_u(0.5, &p0).unwrap(), 0.5, max_relative = 1e-15);
        let peq = params(10.0, 0.25, 1.5, 1.5, 0.5);
        assert_eq!(v_from_u(0.7, &peq).unwrap(), 0.0);
    }

    #[test]
    fn v_from_u_pole_detected() {
        // d - alpha*u*(c-d) = 0 at u = 1/0.5 = 2 with c=2, d=1, alpha=0.5
        let p = params(10.0, 0.25, 2.0, 1.0, 0.5);
        assert!(matches!(v_from_u(2.0, &p), Err(Error::Pole { .. })));
    }

    #[test]
    fn no_interior_when_conversion_below_death() {
        assert!(interior_equilibria(&params(10.0, 0.25, 1.0, 2.0, 0.5)).is_empty());
        assert!(interior_equilibria(&params(10.0, 0.25, 1.5, 1.5, 0.5)).is_empty());
        assert_eq!(count_interior(&params(10.0, 0.25, 1.0, 2.0, 0.5)), 0);
    }

    #[test]
    fn no_interior_past_high_allee_threshold() {
        // max of the cubic's left side on (0.75, 1) is below c-d = 1
        assert!(interior_equilibria(&params(10.0, 0.75, 2.0, 1.0, 0.5)).is_empty());
    }

    #[test]
    fn two_interior_at_defaults() {
        // frozen from an independent grid-scan of the full system
        let eqs = interior_equilibria(&params(10.0, 0.25, 2.0, 1.0, 0.92));
        assert_eq!(eqs.len(), 2);
        assert_relative_eq!(eqs[0].state.u, 0.3705041402, max_relative = 1e-8);
        assert_relative_eq!(eqs[0].state.v, 0.5621055939, max_relative = 1e-8);
        assert_relative_eq!(eqs[1].state.u, 0.6889188024, max_relative = 1e-8);
        assert_relative_eq!(eqs[1].state.v, 1.8812910153, max_relative = 1e-8);
        for e in &eqs {
            assert!(e.residual < RESIDUAL_TOL);
            assert!(e.kind == EquilibriumKind::Interior);
        }
    }

    #[test]
    fn interior_at_alpha_096_exact_rationals() {
        // u = 3/8 and u = 2/3 solve 20(u-1/4)(1-u)(1-0.96u) = 1 exactly
        let eqs = interior_equilibria(&params(10.0, 0.25, 2.0, 1.0, 0.96));
        assert_eq!(eqs.len(), 2);
        assert_relative_eq!(eqs[0].state.u, 0.375, max_relative = 1e-10);
        assert_relative_eq!(eqs[0].state.v, 0.5859375, max_relative = 1e-10);
        assert_relative_eq!(eqs[1].state.u, 2.0 / 3.0, max_relative = 1e-10);
        assert_relative_eq!(eqs[1].state.v, 50.0 / 27.0, max_relative = 1e-10);
    }

    #[test]
    fn interior_satisfies_both_routes() {
        // every interior equilibrium sits on v(u) and has tiny full residual
        for alpha in [0.0, 0.3, 0.5, 0.92, 1.0, 1.5] {
            let p = params(10.0, 0.25, 2.0, 1.0, alpha);
            for e in interior_equilibria(&p) {
                let v = v_from_u(e.state.u, &p).unwrap();
                assert!((v - e.state.v).abs() < 1e-9, "closed-form v(u) mismatch at alpha={alpha}");
                assert!(e.residual < RESIDUAL_TOL);
            }
        }
    }

    /// A plausible-looking misgrouping of the reduced cubic (leading
    /// coefficient folded into the first factor, `(ac/d·u − b)`) does not
    /// produce full-system equilibria; the derived grouping does.
    #[test]
    fn misgrouped_cubic_fails_residual_check() {
        let p = params(10.0, 0.25, 2.0, 1.0, 0.92);
        let misgrouped = |u: f64| {
            (p.a() * p.c() / p.d() * u - p.b())
                * (1.0 - u)
                * (p.d() - p.alpha() * u * (p.c() - p.d()))
                - (p.c() - p.d())
        };
        // bracket the misgrouped form's roots on (0, 1)
        let mut roots = Vec::new();
        let n = 4000;
        for i in 0..n {
            let (u0, u1) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
            let (f0, f1) = (misgrouped(u0.max(1e-9)), misgrouped(u1));
            if (f0 < 0.0) != (f1 < 0.0) {
                let (mut lo, mut hi) = (u0.max(1e-9), u1);
                for _ in 0..80 {
                    let m = 0.5 * (lo + hi);
                    if (misgrouped(lo) < 0.0) == (misgrouped(m) < 0.0) {
                        lo = m;
                    } else {
                        hi = m;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
        }
        assert!(!roots.is_empty(), "misgrouped form has roots to compare against");
        for u in roots {
            let v = v_from_u(u, &p).unwrap();
            if v <= 0.0 {
                continue;
            }
            let r = derivatives(&State { u, v }, &p).max_norm();
            assert!(r > 1e-6, "misgrouped-form root ({u}, {v}) unexpectedly satisfies the system");
        }
    }
}
