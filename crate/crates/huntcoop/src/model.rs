//! The predator-prey model with hunting cooperation and an Allee effect.
//!
//! The system is
//!
//! ```text
//! du/dt = a·u·(u−b)·(1−u) − u·v·(1+αv) / (v + (1+αv)·u)
//! dv/dt = c·u·v·(1+αv) / (v + (1+αv)·u) − d·v
//! ```
//!
//! with prey `u`, predator `v`, intrinsic growth rate `a`, Allee threshold
//! `b ∈ (−1, 1)`, conversion coefficient `c`, predator death rate `d`, and
//! hunting cooperation `α ≥ 0`. The shared denominator vanishes only at the
//! origin; the field is extended there by the value `(0, 0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// States with `u·(1+αv) + v` below this are treated as the exact origin.
pub const ORIGIN_EPS: f64 = 1e-14;

/// The five model parameters. Construction validates the admissible ranges;
/// a constructed value is always usable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    alpha: f64,
}

/// Names the parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamAxis {
    A,
    B,
    C,
    D,
    Alpha,
}

impl std::fmt::Display for ParamAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ParamAxis::A => "a",
            ParamAxis::B => "b",
            ParamAxis::C => "c",
            ParamAxis::D => "d",
            ParamAxis::Alpha => "alpha",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ParamAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(ParamAxis::A),
            "b" => Ok(ParamAxis::B),
            "c" => Ok(ParamAxis::C),
            "d" => Ok(ParamAxis::D),
            "alpha" => Ok(ParamAxis::Alpha),
            other => Err(Error::Parse(format!("unknown parameter `{other}`"))),
        }
    }
}

impl ModelParams {
    /// Validates and builds a parameter set.
    ///
    /// Requires `a > 0`, `b ∈ (−1, 1)`, `c > 0`, `d > 0`, `alpha ≥ 0`,
    /// all finite.
    pub fn new(a: f64, b: f64, c: f64, d: f64, alpha: f64) -> Result<Self> {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
        }
        if !b.is_finite() || b <= -1.0 || b >= 1.0 {
            return Err(Error::InvalidParameter(format!("b must lie in (-1, 1), got {b}")));
        }
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
        }
        if !d.is_finite() || d <= 0.0 {
            return Err(Error::InvalidParameter(format!("d must be positive, got {d}")));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be nonnegative, got {alpha}"
            )));
        }
        Ok(Self { a, b, c, d, alpha })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Value of the named parameter.
    pub fn get(&self, axis: ParamAxis) -> f64 {
        match axis {
            ParamAxis::A => self.a,
            ParamAxis::B => self.b,
            ParamAxis::C => self.c,
            ParamAxis::D => self.d,
            ParamAxis::Alpha => self.alpha,
        }
    }

    /// Copy of `self` with one parameter replaced, revalidated.
    pub fn with(&self, axis: ParamAxis, value: f64) -> Result<Self> {
        let (mut a, mut b, mut c, mut d, mut alpha) = (self.a, self.b, self.c, self.d, self.alpha);
        match axis {
            ParamAxis::A => a = value,
            ParamAxis::B => b = value,
            ParamAxis::C => c = value,
            ParamAxis::D => d = value,
            ParamAxis::Alpha => alpha = value,
        }
        Self::new(a, b, c, d, alpha)
    }

    /// Copy of `self` with a different hunting cooperation value.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.a, self.b, self.c, self.d, alpha)
    }
}

/// The reference parameter set: a=10, b=0.25, c=2, d=1, α=0.92.
impl Default for ModelParams {
    fn default() -> Self {
        Self { a: 10.0, b: 0.25, c: 2.0, d: 1.0, alpha: 0.92 }
    }
}

/// A point in the nonnegative quadrant: prey `u`, predator `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub u: f64,
    pub v: f64,
}

impl State {
    /// Validating constructor; rejects negative or non-finite populations.
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !u.is_finite() || !v.is_finite() || u < 0.0 || v < 0.0 {
            return Err(Error::Domain(format!(
                "state must be finite and nonnegative, got ({u}, {v})"
            )));
        }
        Ok(Self { u, v })
    }

    /// True when the state is identified with the exact origin
    /// (shared denominator below [`ORIGIN_EPS`]).
    pub fn is_origin(&self, params: &ModelParams) -> bool {
        self.u * (1.0 + params.alpha * self.v) + self.v < ORIGIN_EPS
    }

    /// Euclidean distance to another state.
    pub fn distance(&self, other: &State) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }
}

/// Instantaneous rates of change of the two populations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derivative {
    pub du_dt: f64,
    pub dv_dt: f64,
}

impl Derivative {
    /// Max-norm of the rate vector.
    pub fn max_norm(&self) -> f64 {
        self.du_dt.abs().max(self.dv_dt.abs())
    }

    /// Euclidean norm of the rate vector.
    pub fn norm(&self) -> f64 {
        self.du_dt.hypot(self.dv_dt)
    }
}

/// A real 2×2 Jacobian, entries by position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jacobian2 {
    pub j11: f64,
    pub j12: f64,
    pub j21: f64,
    pub j22: f64,
}

impl Jacobian2 {
    pub fn trace(&self) -> f64 {
        self.j11 + self.j22
    }

    pub fn det(&self) -> f64 {
        self.j11 * self.j22 - self.j12 * self.j21
    }
}

/// The consumption term `u·v·(1+αv) / (v + (1+αv)·u)`, without the
/// conversion factor `c` or a sign. Zero on the axes and at the origin.
pub fn functional_response(state: &State, params: &ModelParams) -> f64 {
    if state.u == 0.0 || state.v == 0.0 {
        return 0.0;
    }
    let w = 1.0 + params.alpha * state.v;
    let denom = state.v + w * state.u;
    if denom < ORIGIN_EPS {
        return 0.0;
    }
    state.u * state.v * w / denom
}

/// The vector field. Total over the nonnegative quadrant: the exact origin
/// maps to `(0, 0)` by the extension convention.
pub fn derivatives(state: &State, params: &ModelParams) -> Derivative {
    if state.is_origin(params) {
        return Derivative { du_dt: 0.0, dv_dt: 0.0 };
    }
    let response = functional_response(state, params);
    let growth = params.a * state.u * (state.u - params.b) * (1.0 - state.u);
    Derivative {
        du_dt: growth - response,
        dv_dt: params.c * response - params.d * state.v,
    }
}

/// Analytic Jacobian of the vector field.
///
/// Undefined at the exact origin, where the limit of the field does not
/// exist; callers classify the origin by other means.
pub fn jacobian_analytic(state: &State, params: &ModelParams) -> Result<Jacobian2> {
    if state.is_origin(params) {
        return Err(Error::OriginSingularity);
    }
    let (u, v) = (state.u, state.v);
    let (a, b, c, d, alpha) = (params.a, params.b, params.c, params.d, params.alpha);
    let w = 1.0 + alpha * v;
    let denom = v + w * u;
    let denom2 = denom * denom;
    // d(response)/du = v²(1+αv)/D²; d(response)/dv = u(u(1+αv)² + αv²)/D²
    let resp_u = v * v * w / denom2;
    let resp_v = u * (u * w * w + alpha * v * v) / denom2;
    let growth_u = a * (-3.0 * u * u + 2.0 * u + 2.0 * b * u - b);
    Ok(Jacobian2 {
        j11: growth_u - resp_u,
        j12: -resp_v,
        j21: c * resp_u,
        j22: c * resp_v - d,
    })
}

/// ∂g₁/∂u, where g₁ is the per-capita prey growth factor in the
/// factored form du/dt = g₁·u:
///
/// ```text
/// g₁(u, v) = a·(u−b)·(1−u) − v·(1+αv) / (v + (1+αv)·u)
/// ∂g₁/∂u   = a·(1 + b − 2u) + v·(1+αv)² / (v + (1+αv)·u)²
/// ```
///
/// At an interior equilibrium, `∂g₁/∂u < 0` is a sufficient condition for
/// asymptotic stability (J11 = u·∂g₁/∂u and the remaining sign pattern is
/// fixed). Only defined for interior states.
pub fn g1_partial_u(state: &State, params: &ModelParams) -> Result<f64> {
    if state.u <= 0.0 || state.v <= 0.0 {
        return Err(Error::Domain(format!(
            "g1 partial requires an interior state, got ({}, {})",
            state.u, state.v
        )));
    }
    let (u, v) = (state.u, state.v);
    let w = 1.0 + params.alpha * v;
    let denom = v + w * u;
    Ok(params.a * (1.0 + params.b - 2.0 * u) + v * w * w / (denom * denom))
}

/// The per-capita prey growth factor g₁ itself (interior states only).
pub fn g1(state: &State, params: &ModelParams) -> Result<f64> {
    if state.u <= 0.0 || state.v <= 0.0 {
        return Err(Error::Domain("g1 requires an interior state".into()));
    }
    let (u, v) = (state.u, state.v);
    let w = 1.0 + params.alpha * v;
    Ok(params.a * (u - params.b) * (1.0 - u) - v * w / (v + w * u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn defaults() -> ModelParams {
        ModelParams::default()
    }

    #[test]
    fn params_validation_rejects_out_of_range() {
        assert!(ModelParams::new(0.0, 0.25, 2.0, 1.0, 0.92).is_err());
        assert!(ModelParams::new(10.0, 1.0, 2.0, 1.0, 0.92).is_err());
        assert!(ModelParams::new(10.0, -1.0, 2.0, 1.0, 0.92).is_err());
        assert!(ModelParams::new(10.0, 0.25, -2.0, 1.0, 0.92).is_err());
        assert!(ModelParams::new(10.0, 0.25, 2.0, 0.0, 0.92).is_err());
        assert!(ModelParams::new(10.0, 0.25, 2.0, 1.0, -0.1).is_err());
        assert!(ModelParams::new(10.0, 0.25, 2.0, 1.0, f64::NAN).is_err());
        assert!(ModelParams::new(10.0, 0.9999, 2.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn response_is_zero_on_axes_and_origin() {
        let p = defaults();
        assert_eq!(functional_response(&State { u: 1.0, v: 0.0 }, &p), 0.0);
        assert_eq!(functional_response(&State { u: 0.0, v: 1.0 }, &p), 0.0);
        assert_eq!(functional_response(&State { u: 0.0, v: 0.0 }, &p), 0.0);
    }

    #[test]
    fn response_known_values() {
        let p0 = ModelParams::new(10.0, 0.25, 2.0, 1.0, 0.0).unwrap();
        let p1 = ModelParams::new(10.0, 0.25, 2.0, 1.0, 1.0).unwrap();
        let s = State { u: 0.5, v: 0.5 };
        assert_relative_eq!(functional_response(&s, &p0), 0.25, max_relative = 1e-15);
        assert_relative_eq!(functional_response(&s, &p1), 0.3, max_relative = 1e-15);
    }

    #[test]
    fn derivatives_at_boundary_equilibria() {
        let p = defaults();
        let d0 = derivatives(&State { u: 0.0, v: 0.0 }, &p);
        assert_eq!((d0.du_dt, d0.dv_dt), (0.0, 0.0));
        let d1 = derivatives(&State { u: 1.0, v: 0.0 }, &p);
        assert_eq!((d1.du_dt, d1.dv_dt), (0.0, 0.0));
        let db = derivatives(&State { u: 0.25, v: 0.0 }, &p);
        assert_eq!((db.du_dt, db.dv_dt), (0.0, 0.0));
    }

    #[test]
    fn derivatives_known_interior_value() {
        let p = ModelParams::new(10.0, 0.25, 2.0, 1.0, 0.0).unwrap();
        let d = derivatives(&State { u: 0.5, v: 0.5 }, &p);
        assert_relative_eq!(d.du_dt, 0.375, max_relative = 1e-15);
        assert_relative_eq!(d.dv_dt, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn derivatives_reduce_to_axis_dynamics() {
        let p = defaults();
        for u in [0.1, 0.5, 0.9, 1.3] {
            let d = derivatives(&State { u, v: 0.0 }, &p);
            assert_relative_eq!(
                d.du_dt,
                p.a() * u * (u - p.b()) * (1.0 - u),
                max_relative = 1e-14
            );
            assert_eq!(d.dv_dt, 0.0);
        }
        for v in [0.1, 0.5, 2.0] {
            let d = derivatives(&State { u: 0.0, v }, &p);
            assert_eq!(d.du_dt, 0.0);
            assert_relative_eq!(d.dv_dt, -p.d() * v, max_relative = 1e-14);
        }
    }

    #[test]
    fn jacobian_closed_forms_at_prey_axis_points() {
        let p = defaults();
        let j1 = jacobian_analytic(&State { u: 1.0, v: 0.0 }, &p).unwrap();
        assert_relative_eq!(j1.j11, p.a() * (p.b() - 1.0), max_relative = 1e-14); // -7.5
        assert_relative_eq!(j1.j12, -1.0, max_relative = 1e-14);
        assert_eq!(j1.j21, 0.0);
        assert_relative_eq!(j1.j22, p.c() - p.d(), max_relative = 1e-14); // 1

        let jb = jacobian_analytic(&State { u: 0.25, v: 0.0 }, &p).unwrap();
        assert_relative_eq!(jb.j11, p.a() * p.b() * (1.0 - p.b()), max_relative = 1e-14); // 1.875
        assert_relative_eq!(jb.j12, -1.0, max_relative = 1e-14);
        assert_relative_eq!(jb.j22, p.c() - p.d(), max_relative = 1e-14);
    }

    #[test]
    fn jacobian_errors_at_origin() {
        let p = defaults();
        assert!(matches!(
            jacobian_analytic(&State { u: 0.0, v: 0.0 }, &p),
            Err(Error::OriginSingularity)
        ));
    }

    /// Central finite differences of the vector field.
    fn jacobian_fd(state: &State, params: &ModelParams, h: f64) -> Jacobian2 {
        let f = |u: f64, v: f64| derivatives(&State { u, v }, params);
        let fu_p = f(state.u + h, state.v);
        let fu_m = f(state.u - h, state.v);
        let fv_p = f(state.u, state.v + h);
        let fv_m = f(state.u, state.v - h);
        Jacobian2 {
            j11: (fu_p.du_dt - fu_m.du_dt) / (2.0 * h),
            j12: (fv_p.du_dt - fv_m.du_dt) / (2.0 * h),
            j21: (fu_p.dv_dt - fu_m.dv_dt) / (2.0 * h),
            j22: (fv_p.dv_dt - fv_m.dv_dt) / (2.0 * h),
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let p = ModelParams::new(
                rng.gen_range(1.0..20.0),
                rng.gen_range(-0.99..0.99),
                rng.gen_range(0.1..4.0),
                rng.gen_range(0.1..4.0),
                rng.gen_range(0.0..2.0),
            )
            .unwrap();
            let s = State { u: rng.gen_range(0.05..1.5), v: rng.gen_range(0.05..3.0) };
            let ja = jacobian_analytic(&s, &p).unwrap();
            let jf = jacobian_fd(&s, &p, 1e-6);
            for (x, y) in [(ja.j11, jf.j11), (ja.j12, jf.j12), (ja.j21, jf.j21), (ja.j22, jf.j22)]
            {
                let scale = x.abs().max(y.abs()).max(1.0);
                assert!(
                    (x - y).abs() / scale < 1e-5,
                    "jacobian mismatch: analytic {x} vs fd {y} at ({}, {})",
                    s.u,
                    s.v
                );
            }
        }
    }

    #[test]
    fn g1_partial_matches_finite_difference() {
        let p = defaults();
        let s = State { u: 0.5, v: 0.5 };
        let h = 1e-6;
        let fd = (g1(&State { u: s.u + h, ..s }, &p).unwrap()
            - g1(&State { u: s.u - h, ..s }, &p).unwrap())
            / (2.0 * h);
        let analytic = g1_partial_u(&s, &p).unwrap();
        assert_relative_eq!(analytic, fd, max_relative = 1e-6);
        // frozen from an independent evaluation
        assert_relative_eq!(analytic, 3.204474849626545, max_relative = 1e-12);
    }

    #[test]
    fn g1_partial_negative_past_logistic_hump() {
        // alpha = 0, small v: dominated by a(1+b-2u), negative for u > (1+b)/2
        let p = ModelParams::new(10.0, 0.25, 2.0, 1.0, 0.0).unwrap();
        let val = g1_partial_u(&State { u: 0.95, v: 1e-9 }, &p).unwrap();
        assert!(val < 0.0, "expected downslope, got {val}");
        // vertex of the quadratic: zero up to the response correction
        let vertex = g1_partial_u(&State { u: 0.625, v: 1e-12 }, &p).unwrap();
        assert!(vertex.abs() < 1e-9, "expected ~0 at the vertex, got {vertex}");
    }

    #[test]
    fn g1_partial_rejects_boundary_states() {
        let p = defaults();
        assert!(g1_partial_u(&State { u: 0.5, v: 0.0 }, &p).is_err());
        assert!(g1_partial_u(&State { u: 0.0, v: 0.5 }, &p).is_err());
    }

    #[test]
    fn response_monotone_in_alpha() {
        let base = defaults();
        for &(u, v) in &[(0.3, 0.2), (0.5, 0.5), (1.0, 2.0), (0.05, 4.0)] {
            let s = State { u, v };
            let mut prev = -1.0;
            for i in 0..=40 {
                let alpha = i as f64 * 0.1;
                let p = base.with_alpha(alpha).unwrap();
                let r = functional_response(&s, &p);
                assert!(r >= prev - 1e-15, "response decreased in alpha at ({u}, {v})");
                prev = r;
            }
        }
    }
}
