//! Deterministic CSV and JSON serialization.
//!
//! CSV files are UTF-8, comma-separated with a header row and LF endings.
//! All floats print with 9 significant digits through [`fmt_float`], so
//! identical inputs produce byte-identical files. Every writer has a
//! companion reader; a read-back followed by a re-write reproduces the
//! file byte for byte.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bifurcation::{BifurcationDiagram, FateMap};
use crate::error::{Error, Result};
use crate::integrate::{Fate, Trajectory};
use crate::stability::StabilityLabel;

/// Fixed 9-significant-digit scientific formatting.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("bad float `{s}`: {e}")))
}

// ---------------------------------------------------------------- trajectory

/// One CSV row of a trajectory time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,u,v\n");
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let _ = writeln!(out, "{},{},{}", fmt_float(*t), fmt_float(s.u), fmt_float(s.v));
    }
    out
}

pub fn trajectory_rows_to_csv(rows: &[TrajectoryRow]) -> String {
    let mut out = String::from("t,u,v\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", fmt_float(r.t), fmt_float(r.u), fmt_float(r.v));
    }
    out
}

pub fn trajectory_from_csv(text: &str) -> Result<Vec<TrajectoryRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("t,u,v") => {}
        other => return Err(Error::Parse(format!("expected header `t,u,v`, got {other:?}"))),
    }
    lines
        .map(|line| {
            let mut parts = line.split(',');
            let (t, u, v) = (
                parts.next().ok_or_else(|| Error::Parse("missing t".into()))?,
                parts.next().ok_or_else(|| Error::Parse("missing u".into()))?,
                parts.next().ok_or_else(|| Error::Parse("missing v".into()))?,
            );
            Ok(TrajectoryRow { t: parse_f64(t)?, u: parse_f64(u)?, v: parse_f64(v)? })
        })
        .collect()
}

pub fn trajectory_to_json(traj: &Trajectory) -> Result<String> {
    Ok(serde_json::to_string_pretty(traj)?)
}

pub fn trajectory_from_json(text: &str) -> Result<Trajectory> {
    Ok(serde_json::from_str(text)?)
}

// ------------------------------------------------------------------- diagram

/// One CSV row of a bifurcation diagram: one interior equilibrium at one
/// grid value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramRow {
    pub value: f64,
    pub eq_index: usize,
    pub u: f64,
    pub v: f64,
    pub class: String,
    pub max_re_lambda: f64,
}

pub fn diagram_rows(diagram: &BifurcationDiagram) -> Vec<DiagramRow> {
    let mut rows = Vec::new();
    for point in &diagram.points {
        for (i, ce) in point.interior.iter().enumerate() {
            rows.push(DiagramRow {
                value: point.value,
                eq_index: i,
                u: ce.equilibrium.state.u,
                v: ce.equilibrium.state.v,
                class: ce.class.label.to_string(),
                max_re_lambda: ce.eigen.map(|e| e.max_real_part).unwrap_or(f64::NAN),
            });
        }
    }
    rows
}

pub fn diagram_to_csv(diagram: &BifurcationDiagram) -> String {
    let header = format!("{},eq_index,u,v,class,max_re_lambda\n", diagram.target);
    diagram_rows_to_csv(&diagram_rows(diagram), &header)
}

fn diagram_rows_to_csv(rows: &[DiagramRow], header: &str) -> String {
    let mut out = String::from(header);
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_float(r.value),
            r.eq_index,
            fmt_float(r.u),
            fmt_float(r.v),
            r.class,
            fmt_float(r.max_re_lambda)
        );
    }
    out
}

pub fn diagram_from_csv(text: &str) -> Result<(String, Vec<DiagramRow>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty diagram csv".into()))?;
    let target = header
        .strip_suffix(",eq_index,u,v,class,max_re_lambda")
        .ok_or_else(|| Error::Parse(format!("unexpected diagram header `{header}`")))?
        .to_string();
    let rows = lines
        .map(|line| {
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 6 {
                return Err(Error::Parse(format!("expected 6 fields, got `{line}`")));
            }
            Ok(DiagramRow {
                value: parse_f64(parts[0])?,
                eq_index: parts[1]
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad index `{}`: {e}", parts[1])))?,
                u: parse_f64(parts[2])?,
                v: parse_f64(parts[3])?,
                class: parse_label(parts[4])?.to_string(),
                max_re_lambda: parse_f64(parts[5])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((target, rows))
}

fn parse_label(s: &str) -> Result<StabilityLabel> {
    let label = match s {
        "stable node" => StabilityLabel::StableNode,
        "stable spiral" => StabilityLabel::StableSpiral,
        "unstable node" => StabilityLabel::UnstableNode,
        "unstable spiral" => StabilityLabel::UnstableSpiral,
        "saddle" => StabilityLabel::Saddle,
        "center" => StabilityLabel::Center,
        "degenerate" => StabilityLabel::Degenerate,
        other => return Err(Error::Parse(format!("unknown stability class `{other}`"))),
    };
    Ok(label)
}

pub fn diagram_to_json(diagram: &BifurcationDiagram) -> Result<String> {
    Ok(serde_json::to_string_pretty(diagram)?)
}

pub fn diagram_from_json(text: &str) -> Result<BifurcationDiagram> {
    Ok(serde_json::from_str(text)?)
}

// ------------------------------------------------------------------ fate map

/// One CSV row of a fate map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FateMapRow {
    pub x: f64,
    pub y: f64,
    pub fate: Fate,
}

pub fn fate_map_rows(map: &FateMap) -> Vec<FateMapRow> {
    let g1 = map.axis1.grid();
    let g2 = map.axis2.grid();
    let mut rows = Vec::with_capacity(map.fates.len());
    for (i, &x) in g1.iter().enumerate() {
        for (j, &y) in g2.iter().enumerate() {
            rows.push(FateMapRow { x, y, fate: map.fate_at(i, j) });
        }
    }
    rows
}

pub fn fate_map_to_csv(map: &FateMap) -> String {
    let mut out = format!("{},{},fate\n", map.axis1.kind, map.axis2.kind);
    for r in fate_map_rows(map) {
        let _ = writeln!(out, "{},{},{}", fmt_float(r.x), fmt_float(r.y), r.fate);
    }
    out
}

pub fn fate_map_from_csv(text: &str) -> Result<Vec<FateMapRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty fate map csv".into()))?;
    if !header.ends_with(",fate") {
        return Err(Error::Parse(format!("unexpected fate map header `{header}`")));
    }
    lines
        .map(|line| {
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!("expected 3 fields, got `{line}`")));
            }
            let fate = match parts[2] {
                "coexistence-equilibrium" => Fate::CoexistenceEquilibrium,
                "prey-only-equilibrium" => Fate::PreyOnlyEquilibrium,
                "extinction" => Fate::Extinction,
                "oscillatory" => Fate::Oscillatory,
                "undetermined" => Fate::Undetermined,
                other => return Err(Error::Parse(format!("unknown fate `{other}`"))),
            };
            Ok(FateMapRow { x: parse_f64(parts[0])?, y: parse_f64(parts[1])?, fate })
        })
        .collect()
}

pub fn fate_map_to_json(map: &FateMap) -> Result<String> {
    Ok(serde_json::to_string_pretty(map)?)
}

pub fn fate_map_from_json(text: &str) -> Result<FateMap> {
    Ok(serde_json::from_str(text)?)
}
