//! Eigenvalue stability classification.
//!
//! For a planar fixed point the eigenvalues of the Jacobian are
//! `λ = (trace ± sqrt(trace² − 4·det)) / 2`. A hyperbolic point is
//! asymptotically stable iff `trace < 0` and `det > 0`; `det < 0` is a
//! saddle. Near-zero trace or determinant is reported as non-hyperbolic
//! rather than forced to a verdict.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibria::{boundary_equilibria, Equilibrium, EquilibriumKind};
use crate::error::{Error, Result};
use crate::model::{g1_partial_u, jacobian_analytic, Jacobian2, ModelParams, State};

/// Default tolerance band around trace = 0 / det = 0 inside which a point
/// is reported non-hyperbolic.
pub const HYPERBOLICITY_TOL: f64 = 1e-9;

/// The eigenvalues of a 2×2 Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub max_real_part: f64,
}

/// Qualitative type of a planar fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityLabel {
    StableNode,
    StableSpiral,
    UnstableNode,
    UnstableSpiral,
    Saddle,
    Center,
    Degenerate,
}

impl StabilityLabel {
    pub fn is_stable(&self) -> bool {
        matches!(self, StabilityLabel::StableNode | StabilityLabel::StableSpiral)
    }
}

impl std::fmt::Display for StabilityLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StabilityLabel::StableNode => "stable node",
            StabilityLabel::StableSpiral => "stable spiral",
            StabilityLabel::UnstableNode => "unstable node",
            StabilityLabel::UnstableSpiral => "unstable spiral",
            StabilityLabel::Saddle => "saddle",
            StabilityLabel::Center => "center",
            StabilityLabel::Degenerate => "degenerate",
        };
        f.write_str(s)
    }
}

/// Classification with its hyperbolicity flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityClass {
    pub label: StabilityLabel,
    pub hyperbolic: bool,
}

/// An equilibrium together with its spectral data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedEquilibrium {
    pub equilibrium: Equilibrium,
    /// `None` at the origin, where the Jacobian is undefined.
    pub eigen: Option<EigenPair>,
    pub class: StabilityClass,
    /// ∂g₁/∂u at the point; interior equilibria only.
    pub g1_slope: Option<f64>,
}

/// Eigenvalues by the quadratic formula.
pub fn eigenvalues_2x2(j: &Jacobian2) -> EigenPair {
    let trace = j.trace();
    let det = j.det();
    let disc = trace * trace - 4.0 * det;
    let (lambda1, lambda2) = if disc >= 0.0 {
        let s = disc.sqrt();
        (
            Complex64::new(0.5 * (trace + s), 0.0),
            Complex64::new(0.5 * (trace - s), 0.0),
        )
    } else {
        let s = (-disc).sqrt();
        (
            Complex64::new(0.5 * trace, 0.5 * s),
            Complex64::new(0.5 * trace, -0.5 * s),
        )
    };
    EigenPair { lambda1, lambda2, max_real_part: lambda1.re.max(lambda2.re) }
}

/// Trace/determinant classification with a non-hyperbolic tolerance band.
pub fn classify(eigen: &EigenPair, tol: f64) -> StabilityClass {
    let trace = eigen.lambda1.re + eigen.lambda2.re;
    let det = (eigen.lambda1 * eigen.lambda2).re;
    let complex = eigen.lambda1.im != 0.0;

    if det.abs() < tol {
        return StabilityClass { label: StabilityLabel::Degenerate, hyperbolic: false };
    }
    if det < 0.0 {
        return StabilityClass { label: StabilityLabel::Saddle, hyperbolic: true };
    }
    if trace.abs() < tol {
        return StabilityClass { label: StabilityLabel::Center, hyperbolic: false };
    }
    let label = match (trace < 0.0, complex) {
        (true, true) => StabilityLabel::StableSpiral,
        (true, false) => StabilityLabel::StableNode,
        (false, true) => StabilityLabel::UnstableSpiral,
        (false, false) => StabilityLabel::UnstableNode,
    };
    StabilityClass { label, hyperbolic: true }
}

/// Classify an equilibrium from the analytic Jacobian.
/// The origin gets no eigen data and a non-hyperbolic placeholder class.
pub fn classify_equilibrium(eq: &Equilibrium, params: &ModelParams) -> ClassifiedEquilibrium {
    if eq.kind == EquilibriumKind::Origin {
        return ClassifiedEquilibrium {
            equilibrium: *eq,
            eigen: None,
            class: StabilityClass { label: StabilityLabel::Degenerate, hyperbolic: false },
            g1_slope: None,
        };
    }
    let j = jacobian_analytic(&eq.state, params)
        .expect("non-origin equilibrium has a defined Jacobian");
    let eigen = eigenvalues_2x2(&j);
    let class = classify(&eigen, HYPERBOLICITY_TOL);
    let g1_slope = if eq.kind == EquilibriumKind::Interior {
        g1_partial_u(&eq.state, params).ok()
    } else {
        None
    };
    ClassifiedEquilibrium {
        equilibrium: *eq,
        eigen: Some(eigen),
        class,
        g1_slope: g1_slope,
    }
}

/// Closed-form verdict for one prey-axis point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormVerdict {
    pub state: State,
    pub trace: f64,
    pub det: f64,
    /// Verdict from the sign conditions trace < 0, det > 0.
    /// `None` inside the non-hyperbolic tolerance band.
    pub closed_form_stable: Option<bool>,
    /// Verdict from the numeric eigenvalue route.
    pub numeric: StabilityClass,
    /// The two routes agree (always true outside the tolerance band).
    pub agree: bool,
    pub out_of_quadrant: bool,
}

/// Closed-form stability report for both prey-axis points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryStabilityReport {
    /// (1, 0): trace = a(b−1) + c − d, det = a(b−1)(c−d).
    pub carrying: ClosedFormVerdict,
    /// (b, 0): trace = ab(1−b) + c − d, det = ab(1−b)(c−d).
    pub allee: ClosedFormVerdict,
}

fn closed_form(u: f64, j11: f64, params: &ModelParams) -> ClosedFormVerdict {
    let cd = params.c() - params.d();
    let trace = j11 + cd;
    let det = j11 * cd;
    let closed_form_stable = if trace.abs() < HYPERBOLICITY_TOL || det.abs() < HYPERBOLICITY_TOL {
        None
    } else {
        Some(trace < 0.0 && det > 0.0)
    };
    let state = State { u, v: 0.0 };
    // triangular Jacobian [[j11, -1], [0, c-d]]
    let numeric = classify(
        &eigenvalues_2x2(&Jacobian2 { j11, j12: -1.0, j21: 0.0, j22: cd }),
        HYPERBOLICITY_TOL,
    );
    let agree = match closed_form_stable {
        Some(stable) => stable == numeric.label.is_stable(),
        None => !numeric.hyperbolic,
    };
    ClosedFormVerdict { state, trace, det, closed_form_stable, numeric, agree, out_of_quadrant: u < 0.0 }
}

/// Evaluate the closed-form trace/det inequalities at `(1,0)` and `(b,0)`
/// alongside the numeric eigenvalue verdicts.
pub fn boundary_stability_closed_form(params: &ModelParams) -> BoundaryStabilityReport {
    let (a, b) = (params.a(), params.b());
    BoundaryStabilityReport {
        carrying: closed_form(1.0, a * (b - 1.0), params),
        allee: closed_form(b, a * b * (1.0 - b), params),
    }
}

/// Result of the interior sufficient condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeCondition {
    /// ∂g₁/∂u at the equilibrium.
    pub value: f64,
    /// True when the sufficient condition (value < 0) holds.
    pub holds: bool,
}

/// The sufficient condition for interior stability: ∂g₁/∂u < 0 at the
/// equilibrium. `holds = false` carries no conclusion.
pub fn interior_slope_condition(eq: &Equilibrium, params: &ModelParams) -> Result<SlopeCondition> {
    if eq.kind != EquilibriumKind::Interior {
        return Err(Error::Domain(format!(
            "the interior sufficient condition needs an interior equilibrium, got {}",
            eq.kind
        )));
    }
    let value = g1_partial_u(&eq.state, params)?;
    Ok(SlopeCondition { value, holds: value < 0.0 })
}

/// Classify every boundary and interior equilibrium of a parameter set.
pub fn classify_all(params: &ModelParams) -> Vec<ClassifiedEquilibrium> {
    let mut out: Vec<ClassifiedEquilibrium> = boundary_equilibria(params)
        .points
        .iter()
        .map(|e| classify_equilibrium(e, params))
        .collect();
    out.extend(
        crate::equilibria::interior_equilibria(params)
            .iter()
            .map(|e| classify_equilibrium(e, params)),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn params(a: f64, b: f64, c: f64, d: f64, alpha: f64) -> ModelParams {
        ModelParams::new(a, b, c, d, alpha).unwrap()
    }

    #[test]
    fn eigen_triangular_matrix() {
        let e = eigenvalues_2x2(&Jacobian2 { j11: -7.5, j12: -1.0, j21: 0.0, j22: 1.0 });
        let mut re = [e.lambda1.re, e.lambda2.re];
        re.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_relative_eq!(re[0], -7.5, max_relative = 1e-14);
        assert_relative_eq!(re[1], 1.0, max_relative = 1e-14);
        assert_eq!(e.lambda1.im, 0.0);
    }

    #[test]
    fn eigen_rotation_and_scaling() {
        let rot = eigenvalues_2x2(&Jacobian2 { j11: 0.0, j12: -1.0, j21: 1.0, j22: 0.0 });
        assert_eq!(rot.max_real_part, 0.0);
        assert_relative_eq!(rot.lambda1.im.abs(), 1.0, max_relative = 1e-14);

        let scale = eigenvalues_2x2(&Jacobian2 { j11: -1.0, j12: 0.0, j21: 0.0, j22: -1.0 });
        assert_eq!(scale.lambda1.re, -1.0);
        assert_eq!(scale.lambda2.re, -1.0);
    }

    #[test]
    fn classify_basic_cases() {
        let saddle = eigenvalues_2x2(&Jacobian2 { j11: -7.5, j12: -1.0, j21: 0.0, j22: 1.0 });
        assert_eq!(classify(&saddle, 1e-9).label, StabilityLabel::Saddle);

        let spiral = EigenPair {
            lambda1: Complex64::new(-0.1, 2.0),
            lambda2: Complex64::new(-0.1, -2.0),
            max_real_part: -0.1,
        };
        assert_eq!(classify(&spiral, 1e-9).label, StabilityLabel::StableSpiral);

        let center = eigenvalues_2x2(&Jacobian2 { j11: 0.0, j12: -1.0, j21: 1.0, j22: 0.0 });
        let c = classify(&center, 1e-9);
        assert_eq!(c.label, StabilityLabel::Center);
        assert!(!c.hyperbolic);
    }

    #[test]
    fn carrying_point_verdicts() {
        // c < d: stable
        let r = boundary_stability_closed_form(&params(10.0, 0.25, 1.0, 2.0, 0.5));
        assert_eq!(r.carrying.closed_form_stable, Some(true));
        assert!(r.carrying.numeric.label.is_stable());
        assert!(r.carrying.agree);
        // the Allee point is a saddle there
        assert_eq!(r.allee.closed_form_stable, Some(false));
        assert_eq!(r.allee.numeric.label, StabilityLabel::Saddle);

        // c > d: saddle at (1,0)
        let r2 = boundary_stability_closed_form(&params(10.0, 0.25, 2.0, 1.0, 0.5));
        assert_eq!(r2.carrying.closed_form_stable, Some(false));
        assert_eq!(r2.carrying.numeric.label, StabilityLabel::Saddle);
    }

    #[test]
    fn allee_point_negative_b_stable_as_planar_point() {
        let r = boundary_stability_closed_form(&params(10.0, -0.5, 1.0, 2.0, 0.5));
        // ab(1-b) < 0 and c-d < 0: trace < 0, det > 0
        assert_eq!(r.allee.closed_form_stable, Some(true));
        assert!(r.allee.numeric.label.is_stable());
        assert!(r.allee.out_of_quadrant);
    }

    #[test]
    fn slope_condition_at_default_alpha() {
        let p92 = params(10.0, 0.25, 2.0, 1.0, 0.92);
        let eqs = crate::equilibria::interior_equilibria(&p92);
        let coexistence = eqs.last().unwrap();
        let out = interior_slope_condition(coexistence, &p92).unwrap();
        let class = classify_equilibrium(coexistence, &p92);
        if out.holds {
            assert!(class.class.label.is_stable());
        }
        // at alpha = 0.92 the coexistence point is stable either way
        assert!(class.class.label.is_stable());
        assert!(class.eigen.unwrap().max_real_part < 0.0);
    }

    #[test]
    fn slope_condition_rejects_boundary() {
        let p = params(10.0, 0.25, 2.0, 1.0, 0.92);
        let set = boundary_equilibria(&p);
        assert!(interior_slope_condition(&set.points[1], &p).is_err());
    }

    #[test]
    fn boundary_closed_form_equivalence_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let p = params(
                rng.gen_range(0.5..20.0),
                rng.gen_range(-0.99..0.99),
                rng.gen_range(0.05..4.0),
                rng.gen_range(0.05..4.0),
                rng.gen_range(0.0..2.0),
            );
            let r = boundary_stability_closed_form(&p);
            for v in [r.carrying, r.allee] {
                if let Some(stable) = v.closed_form_stable {
                    assert_eq!(
                        stable,
                        v.numeric.label.is_stable(),
                        "closed form and numeric disagree at {p:?} for {:?}",
                        v.state
                    );
                }
                assert!(v.agree);
            }
            // (1,0) stable iff c < d (b in (-1,1), a > 0 make a(b-1) < 0)
            if (p.c() - p.d()).abs() > 1e-6 {
                assert_eq!(
                    r.carrying.numeric.label.is_stable(),
                    p.c() < p.d(),
                    "carrying-point criterion failed at {p:?}"
                );
            }
        }
    }

    proptest! {
        /// Eigenvalue identities: sum = trace, product = det.
        #[test]
        fn eigen_identities(
            j11 in -50.0..50.0f64,
            j12 in -50.0..50.0f64,
            j21 in -50.0..50.0f64,
            j22 in -50.0..50.0f64,
        ) {
            let j = Jacobian2 { j11, j12, j21, j22 };
            let e = eigenvalues_2x2(&j);
            let sum = e.lambda1 + e.lambda2;
            let prod = e.lambda1 * e.lambda2;
            let scale = 1.0 + j.trace().abs() + j.det().abs();
            prop_assert!((sum.re - j.trace()).abs() / scale < 1e-10);
            prop_assert!(sum.im.abs() / scale < 1e-10);
            prop_assert!((prod.re - j.det()).abs() / scale < 1e-10);
            prop_assert!(prod.im.abs() / scale < 1e-10);
        }
    }
}
