//! Command-line front end: equilibria, stability, simulate, sweep,
//! critical, fate-map, phase.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure,
//! 4 i/o failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use huntcoop::bifurcation::{
    fate_map, find_critical_alpha, sweep, FateAxis, FateAxisKind, SweepSpec,
};
use huntcoop::config::{ConfigFile, IntegratorOverrides, ParamOverrides};
use huntcoop::equilibria::interior_equilibria;
use huntcoop::error::{Error, Result};
use huntcoop::integrate::{classify_fate, classify_origin_empirical, simulate, EventKind, IntegratorConfig};
use huntcoop::io;
use huntcoop::model::{ModelParams, ParamAxis, State};
use huntcoop::phase::{render_diagram, render_phase_portrait, PhasePortraitSpec};
use huntcoop::stability::{boundary_stability_closed_form, classify_all, interior_slope_condition};

#[derive(Parser)]
#[command(name = "huntcoop", version, about = "Predator-prey dynamics with hunting cooperation and an Allee effect")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Optional key = value config file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Intrinsic prey growth rate (> 0).
    #[arg(long)]
    a: Option<f64>,
    /// Allee threshold, in (-1, 1).
    #[arg(long)]
    b: Option<f64>,
    /// Energy conversion coefficient (> 0).
    #[arg(long)]
    c: Option<f64>,
    /// Predator death rate (> 0).
    #[arg(long)]
    d: Option<f64>,
    /// Hunting cooperation (>= 0).
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args, Clone)]
struct IntegratorOpts {
    /// Integration method: rk4 | rk45.
    #[arg(long)]
    method: Option<String>,
    /// Fixed step (rk4) or initial step (rk45).
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Integration horizon.
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    extinction_threshold: Option<f64>,
    #[arg(long)]
    convergence_tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// List boundary and interior equilibria with eigenvalues and classes.
    Equilibria {
        #[command(flatten)]
        common: CommonOpts,
        /// Write the full classified report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Closed-form boundary verdicts, the interior sufficient condition,
    /// and the empirical origin classification.
    Stability {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Integrate a trajectory and report its terminal event and fate.
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        integrator: IntegratorOpts,
        /// Initial prey level.
        #[arg(long, default_value_t = 0.5)]
        u0: f64,
        /// Initial predator level.
        #[arg(long, default_value_t = 0.5)]
        v0: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Phase-portrait SVG seeded with this trajectory.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Sweep one parameter, tracking equilibria and critical values.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        /// Parameter to sweep: a | b | c | d | alpha.
        #[arg(long)]
        param: ParamAxis,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 41)]
        steps: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Bisect the hunting-cooperation value where the tracked coexistence
    /// equilibrium changes stability.
    Critical {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Classify the long-run fate over a 2-D grid of parameters or
    /// initial conditions.
    FateMap {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        integrator: IntegratorOpts,
        /// First axis: a | b | c | d | alpha | u0 | v0.
        #[arg(long)]
        x: FateAxisKind,
        #[arg(long)]
        x_lo: f64,
        #[arg(long)]
        x_hi: f64,
        #[arg(long, default_value_t = 21)]
        x_steps: usize,
        /// Second axis: a | b | c | d | alpha | u0 | v0.
        #[arg(long)]
        y: FateAxisKind,
        #[arg(long)]
        y_lo: f64,
        #[arg(long)]
        y_hi: f64,
        #[arg(long, default_value_t = 21)]
        y_steps: usize,
        #[arg(long, default_value_t = 0.5)]
        u0: f64,
        #[arg(long, default_value_t = 0.5)]
        v0: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Render a phase portrait: nullclines, vector field, trajectories,
    /// equilibrium markers.
    Phase {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        integrator: IntegratorOpts,
        #[arg(long, default_value_t = 1.2)]
        u_max: f64,
        #[arg(long, default_value_t = 3.0)]
        v_max: f64,
        #[arg(long, default_value_t = 20)]
        field_density: usize,
        #[arg(long, default_value_t = 200)]
        nullcline_density: usize,
        /// Trajectory seed `u,v`; repeatable.
        #[arg(long = "seed")]
        seeds: Vec<String>,
        #[arg(long, default_value_t = 640)]
        width: u32,
        #[arg(long, default_value_t = 480)]
        height: u32,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(common: &CommonOpts) -> Result<ConfigFile> {
    match &common.config {
        Some(path) => ConfigFile::load(path),
        None => Ok(ConfigFile::default()),
    }
}

fn resolve_params(common: &CommonOpts) -> Result<ModelParams> {
    let file = load_config(common)?;
    file.model_params(&ParamOverrides {
        a: common.a,
        b: common.b,
        c: common.c,
        d: common.d,
        alpha: common.alpha,
    })
}

fn resolve_integrator(common: &CommonOpts, opts: &IntegratorOpts) -> Result<IntegratorConfig> {
    let file = load_config(common)?;
    file.integrator(&IntegratorOverrides {
        method: opts.method.clone(),
        dt: opts.dt,
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        t_end: opts.t_end,
        extinction_threshold: opts.extinction_threshold,
        convergence_tol: opts.convergence_tol,
    })
}

/// Fail fast (exit 4) when an output path cannot be created, before any
/// compute happens.
fn check_writable(paths: &[&Option<PathBuf>]) -> Result<()> {
    for path in paths.iter().filter_map(|p| p.as_ref()) {
        let probe = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
        drop(probe);
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}

fn parse_seed(s: &str) -> Result<State> {
    let (u, v) = s
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("seed must be `u,v`, got `{s}`")))?;
    State::new(
        u.trim().parse().map_err(|e| Error::Parse(format!("bad seed prey `{u}`: {e}")))?,
        v.trim().parse().map_err(|e| Error::Parse(format!("bad seed predator `{v}`: {e}")))?,
    )
}

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

fn print_classified(params: &ModelParams) {
    println!(
        "parameters: a={} b={} c={} d={} alpha={}",
        params.a(),
        params.b(),
        params.c(),
        params.d(),
        params.alpha()
    );
    println!(
        "{:<18} {:>10} {:>10} {:>11} {:>24} {:<16} {:>9}",
        "kind", "u", "v", "residual", "eigenvalues", "class", "dg1/du"
    );
    for ce in classify_all(params) {
        let e = &ce.equilibrium;
        let eig = match &ce.eigen {
            Some(p) => format!(
                "{}{:+}i, {}{:+}i",
                fmt6(p.lambda1.re),
                p.lambda1.im,
                fmt6(p.lambda2.re),
                p.lambda2.im
            ),
            None => "undefined".to_string(),
        };
        let g1_slope = ce.g1_slope.map(fmt6).unwrap_or_else(|| "-".into());
        let mut kind = e.kind.to_string();
        if e.out_of_quadrant {
            kind.push_str(" [out-of-quadrant]");
        }
        println!(
            "{:<18} {:>10} {:>10} {:>11.3e} {:>24} {:<16} {:>9}",
            kind,
            fmt6(e.state.u),
            fmt6(e.state.v),
            e.residual,
            eig,
            ce.class.label.to_string(),
            g1_slope
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Equilibria { common, json } => {
            check_writable(&[&json])?;
            let params = resolve_params(&common)?;
            print_classified(&params);
            let report = boundary_stability_closed_form(&params);
            println!(
                "closed form: (1,0) {} | (b,0) {}",
                verdict_text(report.carrying.closed_form_stable),
                verdict_text(report.allee.closed_form_stable)
            );
            for eq in interior_equilibria(&params) {
                let t3 = interior_slope_condition(&eq, &params)?;
                println!(
                    "interior ({}, {}): dg1/du = {} -> sufficient condition {}",
                    fmt6(eq.state.u),
                    fmt6(eq.state.v),
                    fmt6(t3.value),
                    if t3.holds { "holds (stable)" } else { "inconclusive" }
                );
            }
            if let Some(path) = json {
                let classified = classify_all(&params);
                write_file(&path, &serde_json::to_string_pretty(&classified)?)?;
            }
        }
        Command::Stability { common, json } => {
            check_writable(&[&json])?;
            let params = resolve_params(&common)?;
            let report = boundary_stability_closed_form(&params);
            println!(
                "(1,0): trace={} det={} closed-form={} numeric={} agree={}",
                fmt6(report.carrying.trace),
                fmt6(report.carrying.det),
                verdict_text(report.carrying.closed_form_stable),
                report.carrying.numeric.label,
                report.carrying.agree
            );
            println!(
                "(b,0): trace={} det={} closed-form={} numeric={} agree={}{}",
                fmt6(report.allee.trace),
                fmt6(report.allee.det),
                verdict_text(report.allee.closed_form_stable),
                report.allee.numeric.label,
                report.allee.agree,
                if report.allee.out_of_quadrant { " [out-of-quadrant]" } else { "" }
            );
            let origin = classify_origin_empirical(&params, &IntegratorConfig::default())?;
            println!("(0,0): {origin}");
            for eq in interior_equilibria(&params) {
                let t3 = interior_slope_condition(&eq, &params)?;
                println!(
                    "interior ({}, {}): dg1/du = {} -> {}",
                    fmt6(eq.state.u),
                    fmt6(eq.state.v),
                    fmt6(t3.value),
                    if t3.holds { "stable (sufficient condition)" } else { "inconclusive" }
                );
            }
            if let Some(path) = json {
                write_file(&path, &serde_json::to_string_pretty(&report)?)?;
            }
        }
        Command::Simulate { common, integrator, u0, v0, csv, json, svg } => {
            check_writable(&[&csv, &json, &svg])?;
            let params = resolve_params(&common)?;
            let cfg = resolve_integrator(&common, &integrator)?;
            let init = State::new(u0, v0)?;
            let traj = simulate(init, &params, &cfg)?;
            if let Some(path) = &csv {
                write_file(path, &io::trajectory_to_csv(&traj))?;
            }
            if let Some(path) = &json {
                write_file(path, &io::trajectory_to_json(&traj)?)?;
            }
            if let Some(path) = &svg {
                let spec = PhasePortraitSpec {
                    trajectory_seeds: vec![init],
                    ..Default::default()
                };
                write_file(path, &render_phase_portrait(&params, &spec, &cfg)?)?;
            }
            let (t, event) = traj.terminal_event().expect("trajectory has a terminal event");
            let fate = classify_fate(&traj, &cfg);
            println!(
                "terminal event: {event} at t = {} | final state ({}, {}) | fate: {fate}",
                fmt6(t),
                fmt6(traj.final_state().u),
                fmt6(traj.final_state().v)
            );
            if event == EventKind::StepUnderflow {
                // partial output is already on disk
                return Err(Error::StepUnderflow { t });
            }
        }
        Command::Sweep { common, param, lo, hi, steps, csv, json, svg } => {
            check_writable(&[&csv, &json, &svg])?;
            let base = resolve_params(&common)?;
            let spec = SweepSpec { target: param, lo, hi, steps, base };
            let diagram = sweep(&spec)?;
            if let Some(path) = &csv {
                write_file(path, &io::diagram_to_csv(&diagram))?;
            }
            if let Some(path) = &json {
                write_file(path, &io::diagram_to_json(&diagram)?)?;
            }
            if let Some(path) = &svg {
                write_file(path, &render_diagram(&diagram, 640, 480)?)?;
            }
            println!(
                "swept {param} over [{lo}, {hi}] in {steps} steps; interior counts {:?}",
                diagram.points.iter().map(|p| p.interior_count).collect::<Vec<_>>()
            );
            if diagram.critical_points.is_empty() {
                println!("no critical points detected");
            }
            for c in &diagram.critical_points {
                println!(
                    "critical point: {} at {param} = {} (bracket [{}, {}])",
                    c.kind,
                    fmt6(c.value),
                    fmt6(c.bracket.0),
                    fmt6(c.bracket.1)
                );
            }
        }
        Command::Critical { common, lo, hi, tol } => {
            let base = resolve_params(&common)?;
            let alpha_star = find_critical_alpha(&base, lo, hi, tol)?;
            println!("critical alpha = {}", io::fmt_float(alpha_star));
        }
        Command::FateMap {
            common,
            integrator,
            x,
            x_lo,
            x_hi,
            x_steps,
            y,
            y_lo,
            y_hi,
            y_steps,
            u0,
            v0,
            csv,
            json,
        } => {
            check_writable(&[&csv, &json])?;
            let base = resolve_params(&common)?;
            let cfg = resolve_integrator(&common, &integrator)?;
            let init = State::new(u0, v0)?;
            let axis1 = FateAxis { kind: x, lo: x_lo, hi: x_hi, steps: x_steps };
            let axis2 = FateAxis { kind: y, lo: y_lo, hi: y_hi, steps: y_steps };
            let map = fate_map(&axis1, &axis2, &base, init, &cfg)?;
            if let Some(path) = &csv {
                write_file(path, &io::fate_map_to_csv(&map))?;
            }
            if let Some(path) = &json {
                write_file(path, &io::fate_map_to_json(&map)?)?;
            }
            let mut tally = std::collections::BTreeMap::new();
            for f in &map.fates {
                *tally.entry(f.to_string()).or_insert(0usize) += 1;
            }
            println!("fate map {x} x {y}: {} cells", map.fates.len());
            for (fate, n) in tally {
                println!("  {fate}: {n}");
            }
        }
        Command::Phase {
            common,
            integrator,
            u_max,
            v_max,
            field_density,
            nullcline_density,
            seeds,
            width,
            height,
            out,
        } => {
            let out_opt = Some(out.clone());
            check_writable(&[&out_opt])?;
            let params = resolve_params(&common)?;
            let cfg = resolve_integrator(&common, &integrator)?;
            let trajectory_seeds =
                seeds.iter().map(|s| parse_seed(s)).collect::<Result<Vec<_>>>()?;
            let spec = PhasePortraitSpec {
                u_range: (0.0, u_max),
                v_range: (0.0, v_max),
                field_density,
                nullcline_density,
                trajectory_seeds,
                width,
                height,
            };
            let svg = render_phase_portrait(&params, &spec, &cfg)?;
            write_file(&out, &svg)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn verdict_text(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "stable",
        Some(false) => "unstable",
        None => "marginal",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
