//! Per-point residual tables and their deterministic aggregation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frames::{
    ellipse_of_curvature, fundamental_forms, s_willmore_residual, superconformal_residual,
    willmore_residual,
};
use crate::immersion::ImmersionSpec;
use crate::tolerances::Tolerances;

/// One grid point of an `analyze` run. `None` entries were not computable
/// at this point (flagged, stencil clipped, ...), with `status` saying why.
#[derive(Debug, Clone, Serialize)]
pub struct PointRow {
    pub u: f64,
    pub v: f64,
    pub status: String,
    pub superconformal: Option<f64>,
    pub circle_residual: Option<f64>,
    pub s_willmore: Option<f64>,
    pub willmore: Option<f64>,
    pub h_norm: Option<f64>,
    pub semi_major: Option<f64>,
    pub semi_minor: Option<f64>,
    pub theta_lambda_defect: Option<f64>,
    pub dim_n1: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Stats {
    pub max: f64,
    pub mean: f64,
    pub count: usize,
}

impl Stats {
    fn push(&mut self, x: f64) {
        self.max = if self.count == 0 { x } else { self.max.max(x) };
        self.mean += x;
        self.count += 1;
    }

    fn finish(mut self) -> Option<Stats> {
        if self.count == 0 {
            return None;
        }
        self.mean /= self.count as f64;
        Some(self)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeSummary {
    pub surface_dim: usize,
    pub total_cells: usize,
    pub excluded_cells: usize,
    pub evaluated_points: usize,
    pub umbilic_points: usize,
    pub minimal_points: usize,
    pub failed_points: usize,
    pub superconformal: Option<Stats>,
    pub circle_residual: Option<Stats>,
    pub s_willmore: Option<Stats>,
    pub willmore: Option<Stats>,
    pub theta_lambda_defect: Option<Stats>,
    pub superconformal_pass: bool,
}

/// Analyze a single point; never fails hard, the row records the status.
pub fn analyze_point(
    spec: &ImmersionSpec,
    p: (f64, f64),
    order: usize,
    with_willmore: bool,
    tols: &Tolerances,
) -> PointRow {
    let mut row = PointRow {
        u: p.0,
        v: p.1,
        status: "ok".to_string(),
        superconformal: None,
        circle_residual: None,
        s_willmore: None,
        willmore: None,
        h_norm: None,
        semi_major: None,
        semi_minor: None,
        theta_lambda_defect: None,
        dim_n1: None,
    };
    let jet = match spec.jet_with(p, order.max(3), tols) {
        Ok(j) => j,
        Err(e) => {
            row.status = format!("error: {e}");
            return row;
        }
    };
    let fd = match fundamental_forms(&jet, tols) {
        Ok(fd) => fd,
        Err(e) => {
            row.status = format!("error: {e}");
            return row;
        }
    };
    let ell = ellipse_of_curvature(&fd);
    row.superconformal = Some(superconformal_residual(&fd));
    row.circle_residual = Some(ell.circle_residual);
    row.h_norm = Some(fd.h_norm());
    row.semi_major = Some(ell.semi_major);
    row.semi_minor = Some(ell.semi_minor);
    row.dim_n1 = Some(fd.dim_n1);
    if let Some(xi) = &fd.xi {
        row.theta_lambda_defect =
            Some((xi.theta + xi.lambda * xi.lambda - fd.h_norm().powi(2)).abs());
    }
    if fd.umbilic {
        row.status = "umbilic".to_string();
    } else if fd.minimal {
        row.status = "minimal".to_string();
        row.s_willmore = s_willmore_residual(&jet, tols).ok();
    } else {
        row.s_willmore = s_willmore_residual(&jet, tols).ok();
    }
    if with_willmore {
        row.willmore = willmore_residual(spec, p, tols.willmore_fd_step, tols).ok();
    }
    row
}

/// Deterministic ordered reduction of per-point rows.
pub fn summarize(
    spec: &ImmersionSpec,
    rows: &[PointRow],
    total_cells: usize,
    tols: &Tolerances,
) -> Result<AnalyzeSummary> {
    let excluded_cells = total_cells - rows.len();
    let mut s_sup = Stats::default();
    let mut s_circ = Stats::default();
    let mut s_sw = Stats::default();
    let mut s_w = Stats::default();
    let mut s_tl = Stats::default();
    let mut umbilic = 0usize;
    let mut minimal = 0usize;
    let mut failed = 0usize;
    for r in rows {
        if r.status.starts_with("error") {
            failed += 1;
            continue;
        }
        if r.status == "umbilic" {
            umbilic += 1;
        }
        if r.status == "minimal" {
            minimal += 1;
        }
        if let Some(x) = r.superconformal {
            if r.status != "umbilic" {
                s_sup.push(x);
            }
        }
        if let Some(x) = r.circle_residual {
            s_circ.push(x);
        }
        if let Some(x) = r.s_willmore {
            s_sw.push(x);
        }
        if let Some(x) = r.willmore {
            s_w.push(x);
        }
        if let Some(x) = r.theta_lambda_defect {
            s_tl.push(x);
        }
    }
    if (excluded_cells + failed) as f64 > tols.coverage * total_cells as f64 {
        return Err(Error::DegenerateCoverage { excluded: excluded_cells + failed, total: total_cells });
    }
    let superconformal = s_sup.finish();
    Ok(AnalyzeSummary {
        surface_dim: spec.ambient_dim(),
        total_cells,
        excluded_cells,
        evaluated_points: rows.len() - failed,
        umbilic_points: umbilic,
        minimal_points: minimal,
        failed_points: failed,
        superconformal_pass: superconformal.map_or(true, |s| s.max < tols.superconformal_gate),
        superconformal,
        circle_residual: s_circ.finish(),
        s_willmore: s_sw.finish(),
        willmore: s_w.finish(),
        theta_lambda_defect: s_tl.finish(),
    })
}

pub fn analyze_grid(
    spec: &ImmersionSpec,
    nu: usize,
    nv: usize,
    order: usize,
    with_willmore: bool,
    tols: &Tolerances,
) -> Result<(Vec<PointRow>, AnalyzeSummary)> {
    let grid = spec.domain.grid(nu, nv);
    let rows: Vec<PointRow> = grid
        .iter()
        .map(|&p| analyze_point(spec, p, order, with_willmore, tols))
        .collect();
    let summary = summarize(spec, &rows, nu * nv, tols)?;
    Ok((rows, summary))
}
