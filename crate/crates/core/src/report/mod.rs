//! Grid evaluation, JSON and CSV reports, OBJ export and the check suites.
//!
//! Grid nodes sit at `(i / (nu - 1), j / (nv - 1))` of the domain box, so a
//! grid covers its corners. Points are evaluated in parallel and emitted in
//! `(row, column)` order, `row` running over `u`.

pub mod checks;
pub mod obj;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{classify_point, proposition_report, CurvatureClass, Flags, PropResidual};
use crate::frames::frame_point;
use crate::geometry::ToleranceSet;
use crate::sdl::SurfaceProgram;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("grid needs at least one node per direction")]
    EmptyGrid,
    #[error("no renderable points: {0}")]
    NothingToExport(String),
}

/// Parameter value `s` in `[0, 1]` of node `i` out of `n`.
pub fn node_fraction(i: usize, n: usize) -> f64 {
    if n <= 1 {
        0.5
    } else {
        i as f64 / (n - 1) as f64
    }
}

/// Values at a non-degenerate point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointValues {
    pub k1: f64,
    pub k2: f64,
    pub mean_curvature: f64,
    pub gauss_curvature: f64,
    pub q1: f64,
    pub q2: f64,
    pub w_defect: f64,
    pub flags: Flags,
    pub class_defects: BTreeMap<String, f64>,
    pub prop_residuals: BTreeMap<String, PropResidual>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub row: usize,
    pub col: usize,
    pub u: f64,
    pub v: f64,
    /// `"ok"` or the degeneracy that prevented evaluation.
    pub status: String,
    /// Partial degeneracies at an evaluated point (`canal1`, `canal2`,
    /// `moulding`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conditions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<PointValues>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub evaluated: usize,
    /// Number of records per status and per condition.
    pub counts: BTreeMap<String, usize>,
    /// Max and mean of `|defect|` over evaluated points.
    pub defects: BTreeMap<String, Stat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub schema: u32,
    pub surface: String,
    pub params: BTreeMap<String, f64>,
    pub nu: usize,
    pub nv: usize,
    pub records: Vec<PointRecord>,
    pub summary: Summary,
}

/// Full evaluation of one point.
pub fn evaluate_point(prog: &SurfaceProgram, u: f64, v: f64, tol: &ToleranceSet) -> (String, Vec<String>, Option<PointValues>) {
    let fp = match frame_point(prog, u, v, tol) {
        Ok(fp) => fp,
        Err(e) => return (e.status().to_string(), Vec::new(), None),
    };
    let report = match proposition_report(&fp, tol) {
        Ok(r) => r,
        Err(e) => return (e.status().to_string(), Vec::new(), None),
    };
    let flags = classify_point(&report, tol);
    let mut conditions = Vec::new();
    for (on, name) in [(flags.canal1, "canal1"), (flags.canal2, "canal2"), (flags.moulding, "moulding")] {
        if on {
            conditions.push(name.to_string());
        }
    }
    let values = PointValues {
        k1: report.k1,
        k2: report.k2,
        mean_curvature: report.mean_curvature(),
        gauss_curvature: report.gauss_curvature(),
        q1: report.q1,
        q2: report.q2,
        w_defect: report.w_defect,
        flags,
        class_defects: report.class_normalized.clone(),
        prop_residuals: report.prop_residuals.clone(),
    };
    ("ok".to_string(), conditions, Some(values))
}

pub fn evaluate_grid(prog: &SurfaceProgram, nu: usize, nv: usize, tol: &ToleranceSet) -> Result<GridReport, ReportError> {
    if nu == 0 || nv == 0 {
        return Err(ReportError::EmptyGrid);
    }
    let domain = prog.domain();
    let records: Vec<PointRecord> = (0..nu * nv)
        .into_par_iter()
        .map(|idx| {
            let (row, col) = (idx / nv, idx % nv);
            let (u, v) = domain.lerp(node_fraction(row, nu), node_fraction(col, nv));
            let (status, conditions, values) = evaluate_point(prog, u, v, tol);
            PointRecord {
                row,
                col,
                u,
                v,
                status,
                conditions,
                values,
            }
        })
        .collect();
    Ok(GridReport {
        schema: SCHEMA_VERSION,
        surface: prog.name().to_string(),
        params: prog.params().iter().cloned().collect(),
        nu,
        nv,
        summary: summarize(&records),
        records,
    })
}

pub fn summarize(records: &[PointRecord]) -> Summary {
    let mut counts = BTreeMap::new();
    let mut acc: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    let mut evaluated = 0;
    for r in records {
        *counts.entry(r.status.clone()).or_insert(0) += 1;
        for c in &r.conditions {
            *counts.entry(c.clone()).or_insert(0) += 1;
        }
        let Some(values) = &r.values else { continue };
        evaluated += 1;
        let mut add = |key: String, x: f64| {
            let e = acc.entry(key).or_insert((0.0, 0.0));
            e.0 = e.0.max(x.abs());
            e.1 += x.abs();
        };
        add("w_defect".to_string(), values.w_defect);
        for (k, d) in &values.class_defects {
            add(format!("class_{k}"), *d);
        }
        for (k, p) in &values.prop_residuals {
            add(format!("{k}_residual"), p.residual);
        }
    }
    let defects = acc
        .into_iter()
        .map(|(k, (max, sum))| {
            (
                k,
                Stat {
                    max,
                    mean: if evaluated > 0 { sum / evaluated as f64 } else { 0.0 },
                },
            )
        })
        .collect();
    Summary {
        evaluated,
        counts,
        defects,
    }
}

impl GridReport {
    pub fn to_json(&self) -> Result<String, ReportError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<(), ReportError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// One row per record; degenerate rows leave the value columns empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ReportError> {
        let mut w = csv::Writer::from_writer(out);
        let classes: Vec<&str> = CurvatureClass::ALL.iter().map(|c| c.name()).collect();
        let mut header: Vec<String> = [
            "row", "col", "u", "v", "status", "conditions", "k1", "k2", "mean_curvature", "gauss_curvature", "q1",
            "q2", "w_defect", "weingarten", "cmc", "const_gauss", "moulding",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend(classes.iter().map(|c| format!("class_{c}")));
        header.push("max_prop_residual".to_string());
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![
                r.row.to_string(),
                r.col.to_string(),
                r.u.to_string(),
                r.v.to_string(),
                r.status.clone(),
                r.conditions.join(";"),
            ];
            match &r.values {
                Some(p) => {
                    for x in [p.k1, p.k2, p.mean_curvature, p.gauss_curvature, p.q1, p.q2, p.w_defect] {
                        row.push(x.to_string());
                    }
                    for b in [p.flags.weingarten, p.flags.cmc, p.flags.const_gauss, p.flags.moulding] {
                        row.push(b.to_string());
                    }
                    for c in &classes {
                        row.push(p.class_defects.get(*c).map(|x| x.to_string()).unwrap_or_default());
                    }
                    let worst = p.prop_residuals.values().fold(0.0f64, |m, x| m.max(x.residual));
                    row.push(worst.to_string());
                }
                None => row.resize(header.len(), String::new()),
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// True when no grid point could be evaluated.
    pub fn all_degenerate(&self) -> bool {
        self.summary.evaluated == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdl::{compile, gallery};

    fn program(name: &str) -> SurfaceProgram {
        compile(&gallery(name).unwrap(), &Default::default()).unwrap()
    }

    #[test]
    fn record_count_and_order() {
        let rep = evaluate_grid(&program("helicoid"), 4, 3, &ToleranceSet::default()).unwrap();
        assert_eq!(rep.records.len(), 12);
        for (i, r) in rep.records.iter().enumerate() {
            assert_eq!((r.row, r.col), (i / 3, i % 3));
        }
        assert_eq!(rep.records[0].u, -3.0);
        assert_eq!(rep.records[11].v, 2.0);
    }

    #[test]
    fn summary_is_recomputable() {
        let rep = evaluate_grid(&program("graph_generic"), 6, 5, &ToleranceSet::default()).unwrap();
        assert_eq!(summarize(&rep.records), rep.summary);
        assert!(rep.summary.evaluated > 0);
    }

    #[test]
    fn json_roundtrip() {
        let rep = evaluate_grid(&program("dini"), 3, 4, &ToleranceSet::default()).unwrap();
        let back = GridReport::from_json(&rep.to_json().unwrap()).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn sphere_grid_is_all_umbilic() {
        let rep = evaluate_grid(&program("sphere"), 3, 3, &ToleranceSet::default()).unwrap();
        assert!(rep.all_degenerate());
        assert_eq!(rep.summary.counts["umbilic"], 9);
        assert!(rep.records.iter().all(|r| r.values.is_none()));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let rep = evaluate_grid(&program("plane"), 2, 2, &ToleranceSet::default()).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.lines().nth(1).unwrap().contains("parabolic"));
    }
}
