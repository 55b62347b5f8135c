//! Deterministic SVG plots: phase portraits (nullclines, vector field,
//! trajectories, equilibrium markers) and bifurcation diagram plots.
//!
//! Nullclines are zero-contours of the two components of the vector field,
//! extracted by marching squares on a sampled sign grid. Output contains no
//! timestamps and formats every coordinate with 9 significant digits, so
//! identical inputs give byte-identical files.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bifurcation::{BifurcationDiagram, CriticalKind};
use crate::equilibria::v_from_u;
use crate::error::{Error, Result};
use crate::integrate::{simulate, IntegratorConfig};
use crate::io::fmt_float;
use crate::model::{derivatives, ModelParams, State};
use crate::stability::classify_all;

/// Layout of a phase portrait.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePortraitSpec {
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
    /// Arrows per axis.
    pub field_density: usize,
    /// Contour sampling points per axis.
    pub nullcline_density: usize,
    /// Initial conditions to integrate and draw.
    pub trajectory_seeds: Vec<State>,
    pub width: u32,
    pub height: u32,
}

impl Default for PhasePortraitSpec {
    fn default() -> Self {
        Self {
            u_range: (0.0, 1.2),
            v_range: (0.0, 3.0),
            field_density: 20,
            nullcline_density: 200,
            trajectory_seeds: Vec::new(),
            width: 640,
            height: 480,
        }
    }
}

impl PhasePortraitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.u_range.0 < self.u_range.1) || !(self.v_range.0 < self.v_range.1) {
            return Err(Error::InvalidConfig("plot ranges must have positive length".into()));
        }
        if self.u_range.0 < 0.0 || self.v_range.0 < 0.0 {
            return Err(Error::InvalidConfig("plot ranges must be nonnegative".into()));
        }
        if self.field_density < 2 || self.nullcline_density < 2 {
            return Err(Error::InvalidConfig("plot densities must be at least 2".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidConfig("plot dimensions must be positive".into()));
        }
        Ok(())
    }
}

const MARGIN: f64 = 48.0;

/// World-to-pixel mapping plus element emission.
struct Canvas {
    body: String,
    width: f64,
    height: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Canvas {
    fn new(width: u32, height: u32, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        Self {
            body: String::new(),
            width: width as f64,
            height: height as f64,
            x_range,
            y_range,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x_range.0) / (self.x_range.1 - self.x_range.0)
            * (self.width - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        // svg y grows downward
        self.height
            - MARGIN
            - (y - self.y_range.0) / (self.y_range.1 - self.y_range.0)
                * (self.height - 2.0 * MARGIN)
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, style: &str) {
        let _ = writeln!(
            self.body,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {}/>",
            fmt_float(self.px(x1)),
            fmt_float(self.py(y1)),
            fmt_float(self.px(x2)),
            fmt_float(self.py(y2)),
            style
        );
    }

    fn polyline(&mut self, points: &[(f64, f64)], style: &str) {
        if points.len() < 2 {
            return;
        }
        let coords: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{},{}", fmt_float(self.px(*x)), fmt_float(self.py(*y))))
            .collect();
        let _ = writeln!(self.body, "<polyline points=\"{}\" {}/>", coords.join(" "), style);
    }

    fn circle(&mut self, x: f64, y: f64, r_px: f64, style: &str) {
        let _ = writeln!(
            self.body,
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" {}/>",
            fmt_float(self.px(x)),
            fmt_float(self.py(y)),
            fmt_float(r_px),
            style
        );
    }

    fn text(&mut self, px: f64, py: f64, anchor: &str, content: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"{anchor}\">{content}</text>",
            fmt_float(px),
            fmt_float(py),
        );
    }

    fn axes(&mut self, x_label: &str, y_label: &str) {
        let frame = "stroke=\"#000\" stroke-width=\"1\" fill=\"none\"";
        let _ = writeln!(
            self.body,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" {frame}/>",
            fmt_float(MARGIN),
            fmt_float(MARGIN),
            fmt_float(self.width - 2.0 * MARGIN),
            fmt_float(self.height - 2.0 * MARGIN),
        );
        const TICKS: usize = 5;
        for i in 0..=TICKS {
            let f = i as f64 / TICKS as f64;
            let x = self.x_range.0 + f * (self.x_range.1 - self.x_range.0);
            let y = self.y_range.0 + f * (self.y_range.1 - self.y_range.0);
            self.text(self.px(x), self.height - MARGIN + 16.0, "middle", &short(x));
            self.text(MARGIN - 6.0, self.py(y) + 4.0, "end", &short(y));
        }
        self.text(self.width / 2.0, self.height - 10.0, "middle", x_label);
        self.text(14.0, self.height / 2.0, "middle", y_label);
    }

    fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n{}</svg>\n",
            self.width, self.height, self.width, self.height, self.body
        )
    }
}

fn short(x: f64) -> String {
    let s = format!("{x:.3}");
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    if trimmed.is_empty() || trimmed == "-" {
        "0".to_string()
    } else {
        trimmed.to_string()
    }
}

/// Zero-contour line segments of `f` over a rectangle, by marching squares
/// with linear interpolation along cell edges.
pub fn contour_segments(
    f: impl Fn(f64, f64) -> f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
    density: usize,
) -> Vec<((f64, f64), (f64, f64))> {
    let n = density;
    let xs: Vec<f64> =
        (0..n).map(|i| x_range.0 + (x_range.1 - x_range.0) * i as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> =
        (0..n).map(|j| y_range.0 + (y_range.1 - y_range.0) * j as f64 / (n - 1) as f64).collect();
    let mut values = vec![0.0; n * n];
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            values[i * n + j] = f(x, y);
        }
    }
    let lerp = |x0: f64, x1: f64, f0: f64, f1: f64| -> f64 {
        if f0 == f1 {
            0.5 * (x0 + x1)
        } else {
            x0 + (x1 - x0) * f0 / (f0 - f1)
        }
    };
    let mut segments = Vec::new();
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            // corners: bl, br, tr, tl (x right, y up)
            let f_bl = values[i * n + j];
            let f_br = values[(i + 1) * n + j];
            let f_tr = values[(i + 1) * n + j + 1];
            let f_tl = values[i * n + j + 1];
            let case = ((f_bl > 0.0) as u8)
                | (((f_br > 0.0) as u8) << 1)
                | (((f_tr > 0.0) as u8) << 2)
                | (((f_tl > 0.0) as u8) << 3);
            if case == 0 || case == 15 {
                continue;
            }
            let (x0, x1) = (xs[i], xs[i + 1]);
            let (y0, y1) = (ys[j], ys[j + 1]);
            // crossing points on the four edges
            let bottom = (lerp(x0, x1, f_bl, f_br), y0);
            let right = (x1, lerp(y0, y1, f_br, f_tr));
            let top = (lerp(x0, x1, f_tl, f_tr), y1);
            let left = (x0, lerp(y0, y1, f_bl, f_tl));
            let mut push = |a: (f64, f64), b: (f64, f64)| segments.push((a, b));
            match case {
                1 | 14 => push(left, bottom),
                2 | 13 => push(bottom, right),
                3 | 12 => push(left, right),
                4 | 11 => push(right, top),
                6 | 9 => push(bottom, top),
                7 | 8 => push(left, top),
                5 => {
                    push(left, bottom);
                    push(right, top);
                }
                10 => {
                    push(bottom, right);
                    push(left, top);
                }
                _ => unreachable!(),
            }
        }
    }
    segments
}

/// Render a phase portrait to an SVG string.
pub fn render_phase_portrait(
    params: &ModelParams,
    spec: &PhasePortraitSpec,
    cfg: &IntegratorConfig,
) -> Result<String> {
    spec.validate()?;
    cfg.validate()?;
    let mut canvas = Canvas::new(spec.width, spec.height, spec.u_range, spec.v_range);
    canvas.axes("prey u", "predator v");

    // vector field arrows, normalized directions
    let field_style = "stroke=\"#bbb\" stroke-width=\"1\"";
    let n = spec.field_density;
    let du_cell = (spec.u_range.1 - spec.u_range.0) / n as f64;
    let dv_cell = (spec.v_range.1 - spec.v_range.0) / n as f64;
    for i in 0..n {
        for j in 0..n {
            let u = spec.u_range.0 + (i as f64 + 0.5) * du_cell;
            let v = spec.v_range.0 + (j as f64 + 0.5) * dv_cell;
            let d = derivatives(&State { u, v }, params);
            let norm = d.norm();
            if norm < 1e-12 {
                continue;
            }
            let (dx, dy) = (d.du_dt / norm * 0.4 * du_cell, d.dv_dt / norm * 0.4 * dv_cell);
            canvas.line(u - dx, v - dy, u + dx, v + dy, field_style);
            // arrow head: a short dot at the tip
            canvas.circle(u + dx, v + dy, 1.2, "fill=\"#bbb\"");
        }
    }

    // nullclines: prey component in blue, predator component in red
    let prey_null = contour_segments(
        |u, v| derivatives(&State { u, v }, params).du_dt,
        spec.u_range,
        spec.v_range,
        spec.nullcline_density,
    );
    for (a, b) in prey_null {
        canvas.line(a.0, a.1, b.0, b.1, "stroke=\"#1f5fbf\" stroke-width=\"1.5\"");
    }
    let pred_null = contour_segments(
        |u, v| derivatives(&State { u, v }, params).dv_dt,
        spec.u_range,
        spec.v_range,
        spec.nullcline_density,
    );
    for (a, b) in pred_null {
        canvas.line(a.0, a.1, b.0, b.1, "stroke=\"#bf3f3f\" stroke-width=\"1.5\"");
    }

    // closed-form predator level v(u) as a dashed overlay check
    let overlay: Vec<(f64, f64)> = (0..=400)
        .filter_map(|i| {
            let u = spec.u_range.0.max(1e-9)
                + (spec.u_range.1 - spec.u_range.0.max(1e-9)) * i as f64 / 400.0;
            let v = v_from_u(u, params).ok()?;
            (v > spec.v_range.0 && v <= spec.v_range.1).then_some((u, v))
        })
        .collect();
    for window in overlay.windows(2) {
        let (a, b) = (window[0], window[1]);
        // break the overlay across the pole
        if (b.1 - a.1).abs() < 0.5 * (spec.v_range.1 - spec.v_range.0) {
            canvas.line(
                a.0,
                a.1,
                b.0,
                b.1,
                "stroke=\"#bf3f3f\" stroke-width=\"1\" stroke-dasharray=\"4 3\"",
            );
        }
    }

    // trajectories
    for seed in &spec.trajectory_seeds {
        let traj = simulate(*seed, params, cfg)?;
        let points: Vec<(f64, f64)> = traj.states.iter().map(|s| (s.u, s.v)).collect();
        canvas.polyline(&points, "stroke=\"#2a8f2a\" stroke-width=\"1.2\" fill=\"none\"");
        canvas.circle(seed.u, seed.v, 2.0, "fill=\"#2a8f2a\"");
    }

    // equilibria: filled when stable, open otherwise
    for ce in classify_all(params) {
        let s = ce.equilibrium.state;
        let in_range = s.u >= spec.u_range.0
            && s.u <= spec.u_range.1
            && s.v >= spec.v_range.0
            && s.v <= spec.v_range.1;
        if !in_range {
            continue;
        }
        let style = if ce.class.label.is_stable() {
            "fill=\"#000\" stroke=\"#000\" stroke-width=\"1.5\""
        } else {
            "fill=\"#fff\" stroke=\"#000\" stroke-width=\"1.5\""
        };
        canvas.circle(s.u, s.v, 4.0, style);
    }

    Ok(canvas.finish())
}

/// Render a bifurcation diagram (prey level of each interior equilibrium
/// against the swept parameter) to an SVG string.
pub fn render_diagram(diagram: &BifurcationDiagram, width: u32, height: u32) -> Result<String> {
    if diagram.points.is_empty() {
        return Err(Error::InvalidConfig("cannot plot an empty diagram".into()));
    }
    let x_lo = diagram.points.first().unwrap().value;
    let x_hi = diagram.points.last().unwrap().value;
    let mut y_hi = 0.0f64;
    for p in &diagram.points {
        for ce in &p.interior {
            y_hi = y_hi.max(ce.equilibrium.state.u);
        }
    }
    if y_hi == 0.0 {
        y_hi = 1.0;
    }
    let mut canvas = Canvas::new(width, height, (x_lo, x_hi), (0.0, y_hi * 1.1));
    canvas.axes(&diagram.target.to_string(), "equilibrium prey u");

    for p in &diagram.points {
        for ce in &p.interior {
            let style = if ce.class.label.is_stable() {
                "fill=\"#1f5fbf\""
            } else {
                "fill=\"#fff\" stroke=\"#bf3f3f\" stroke-width=\"1\""
            };
            canvas.circle(p.value, ce.equilibrium.state.u, 2.0, style);
        }
    }
    for c in &diagram.critical_points {
        let style = match c.kind {
            CriticalKind::CountChange => {
                "stroke=\"#777\" stroke-width=\"1\" stroke-dasharray=\"2 2\""
            }
            CriticalKind::StabilitySwitch => {
                "stroke=\"#bf3f3f\" stroke-width=\"1\" stroke-dasharray=\"5 3\""
            }
        };
        canvas.line(c.value, 0.0, c.value, y_hi * 1.1, style);
    }
    Ok(canvas.finish())
}
