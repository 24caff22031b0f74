use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use spherecong::analysis::{analyze_point, summarize, PointRow};
use spherecong::duality::{classify_dual, dualize, verify_duality};
use spherecong::gallery;
use spherecong::immersion::{ImmersionSpec, SurfaceMap};


use crate::config::{self, CliError, Format, JobConfig, ObjProjection};
use crate::output;

pub fn run(
    command: &str,
    config_path: &Path,
    threads: Option<usize>,
    out_override: Option<&Path>,
) -> Result<(), CliError> {
    let cfg = config::load(config_path, command)?;
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}"), None))?;
    }
    let out_dir: PathBuf = out_override
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", out_dir.display())))?;

    match cfg.command.as_str() {
        "analyze" => analyze(&cfg, &out_dir),
        "dual" => dual(&cfg, &out_dir),
        "verify" => verify(&cfg, &out_dir),
        "classify" => classify(&cfg, &out_dir),
        "gallery" => gallery_cmd(&cfg, &out_dir),
        "export" => export(&cfg, &out_dir),
        other => Err(CliError::config(format!("unknown command `{other}`"), Some("command"))),
    }
}

fn resolve_surface(cfg: &JobConfig) -> Result<(String, ImmersionSpec), CliError> {
    let name = cfg.surface.as_deref().expect("validated");
    if name.ends_with(".surf") {
        let text = std::fs::read_to_string(name)
            .map_err(|e| CliError::io(format!("cannot read {name}: {e}")))?;
        let spec = ImmersionSpec::from_source(&text).map_err(CliError::from_core)?;
        let stem = Path::new(name)
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "surface".to_string());
        Ok((stem, spec))
    } else {
        let entry = gallery::make(name, &cfg.params).map_err(CliError::from_core)?;
        Ok((entry.id, entry.spec))
    }
}

/// The dual of a surface: the Theorem-1 pipeline in codimension >= 3, the
/// opposite-sign Rouxel partner in codimension 2.
fn dual_spec_of(spec: &ImmersionSpec, cfg: &JobConfig) -> ImmersionSpec {
    if spec.ambient_dim() == 4 {
        let orientation = cfg.orientation;
        spec.wrapped(|inner| SurfaceMap::RouxelPartner { inner, orientation })
    } else {
        dualize(spec)
    }
}

#[derive(Serialize)]
struct RunHeader<'a> {
    schema: u32,
    command: &'a str,
    surface: &'a str,
    nu: usize,
    nv: usize,
    order: usize,
}

fn header<'a>(cfg: &'a JobConfig, surface: &'a str) -> RunHeader<'a> {
    RunHeader {
        schema: 1,
        command: &cfg.command,
        surface,
        nu: cfg.grid.nu,
        nv: cfg.grid.nv,
        order: cfg.order,
    }
}

fn analyze(cfg: &JobConfig, out_dir: &Path) -> Result<(), CliError> {
    let (name, spec) = resolve_surface(cfg)?;
    let tols = &cfg.tolerances;
    let grid = spec.domain.grid(cfg.grid.nu, cfg.grid.nv);
    let rows: Vec<PointRow> = grid
        .par_iter()
        .map(|&p| analyze_point(&spec, p, cfg.order, cfg.willmore, tols))
        .collect();
    let summary = summarize(&spec, &rows, cfg.grid.nu * cfg.grid.nv, tols)
        .map_err(CliError::from_core)?;

    #[derive(Serialize)]
    struct AnalyzeOut<'a> {
        #[serde(flatten)]
        header: RunHeader<'a>,
        summary: &'a spherecong::analysis::AnalyzeSummary,
    }
    if cfg.formats.contains(&Format::Json) {
        output::write_json(
            &out_dir.join(format!("{name}.analyze.json")),
            &AnalyzeOut { header: header(cfg, &name), summary: &summary },
        )?;
    }
    if cfg.formats.contains(&Format::Csv) {
        let header_row = [
            "u",
            "v",
            "status",
            "superconformal",
            "circle_residual",
            "s_willmore",
            "willmore",
            "h_norm",
            "semi_major",
            "semi_minor",
            "theta_lambda_defect",
            "dim_n1",
        ];
        let csv_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    output::fmt_f64(Some(r.u)),
                    output::fmt_f64(Some(r.v)),
                    r.status.clone(),
                    output::fmt_f64(r.superconformal),
                    output::fmt_f64(r.circle_residual),
                    output::fmt_f64(r.s_willmore),
                    output::fmt_f64(r.willmore),
                    output::fmt_f64(r.h_norm),
                    output::fmt_f64(r.semi_major),
                    output::fmt_f64(r.semi_minor),
                    output::fmt_f64(r.theta_lambda_defect),
                    r.dim_n1.map(|d| d.to_string()).unwrap_or_default(),
                ]
            })
            .collect();
        output::write_csv(&out_dir.join(format!("{name}.analyze.csv")), &header_row, &csv_rows)?;
    }
    println!(
        "analyze {name}: {} points, superconformal max {}",
        summary.evaluated_points,
        summary.superconformal.map_or(String::from("n/a"), |s| format!("{:.3e}", s.max)),
    );
    Ok(())
}

fn dual(cfg: &JobConfig, out_dir: &Path) -> Result<(), CliError> {
    let (name, spec) = resolve_surface(cfg)?;
    let tols = &cfg.tolerances;
    let dual = dual_spec_of(&spec, cfg);
    let (nu, nv) = (cfg.grid.nu, cfg.grid.nv);
    let dim = spec.ambient_dim();

    // full lattice with cell centers; excluded or failed samples stay None
    let du = (spec.domain.u.1 - spec.domain.u.0) / nu as f64;
    let dv = (spec.domain.v.1 - spec.domain.v.0) / nv as f64;
    let lattice: Vec<(f64, f64)> = (0..nu * nv)
        .map(|k| {
            let (i, j) = (k / nv, k % nv);
            (spec.domain.u.0 + (i as f64 + 0.5) * du, spec.domain.v.0 + (j as f64 + 0.5) * dv)
        })
        .collect();
    let samples: Vec<Option<(f64, f64, Vec<f64>)>> = lattice
        .par_iter()
        .map(|&(u, v)| {
            if !spec.domain.contains(u, v) {
                return None;
            }
            dual.value_with((u, v), tols).ok().map(|x| (u, v, x))
        })
        .collect();

    let good: Vec<&(f64, f64, Vec<f64>)> = samples.iter().flatten().collect();
    let total = nu * nv;
    if ((total - good.len()) as f64) > tols.coverage * total as f64 {
        return Err(CliError::from_core(spherecong::Error::DegenerateCoverage {
            excluded: total - good.len(),
            total,
        }));
    }

    if cfg.formats.contains(&Format::Csv) {
        let mut head: Vec<String> = vec!["u".into(), "v".into()];
        for k in 1..=dim {
            head.push(format!("x{k}"));
        }
        let head_refs: Vec<&str> = head.iter().map(String::as_str).collect();
        let rows: Vec<Vec<String>> = good
            .iter()
            .map(|(u, v, x)| {
                let mut row = vec![output::fmt_f64(Some(*u)), output::fmt_f64(Some(*v))];
                row.extend(x.iter().map(|c| output::fmt_f64(Some(*c))));
                row
            })
            .collect();
        output::write_csv(&out_dir.join(format!("{name}.dual.csv")), &head_refs, &rows)?;
    }

    let mut basis = Vec::new();
    if cfg.formats.contains(&Format::Obj) {
        let pts: Vec<Vec<f64>> = good.iter().map(|(_, _, x)| x.clone()).collect();
        let (verts, b) = match cfg.obj_projection {
            ObjProjection::First3 => output::project_first3(&pts),
            ObjProjection::Pca => output::project_pca(&pts),
        };
        basis = b;
        let mut index = vec![None; nu * nv];
        let mut next = 0usize;
        for (k, s) in samples.iter().enumerate() {
            if s.is_some() {
                index[k] = Some(next);
                next += 1;
            }
        }
        let faces = output::grid_faces(&index, nu, nv);
        output::write_obj(
            &out_dir.join(format!("{name}.dual.obj")),
            &output::ObjData { vertices: verts, faces, basis: basis.clone() },
        )?;
    }

    #[derive(Serialize)]
    struct DualOut<'a> {
        #[serde(flatten)]
        header: RunHeader<'a>,
        ambient_dim: usize,
        sampled_points: usize,
        skipped_points: usize,
        #[serde(skip_serializing_if = "Vec::is_empty")]
        obj_projection_basis: Vec<Vec<f64>>,
    }
    if cfg.formats.contains(&Format::Json) {
        output::write_json(
            &out_dir.join(format!("{name}.dual.json")),
            &DualOut {
                header: header(cfg, &name),
                ambient_dim: dim,
                sampled_points: good.len(),
                skipped_points: total - good.len(),
                obj_projection_basis: basis,
            },
        )?;
    }
    println!("dual {name}: {} samples", good.len());
    Ok(())
}

fn verify(cfg: &JobConfig, out_dir: &Path) -> Result<(), CliError> {
    let (name, spec) = resolve_surface(cfg)?;
    let tols = &cfg.tolerances;
    let partner = match cfg.partner.as_deref() {
        None | Some("dualize") => dual_spec_of(&spec, cfg),
        Some("rouxel") => {
            let orientation = cfg.orientation;
            spec.wrapped(|inner| SurfaceMap::RouxelPartner { inner, orientation })
        }
        Some(other) => {
            let mut sub = cfg.clone();
            sub.surface = Some(other.to_string());
            resolve_surface(&sub)?.1
        }
    };
    let report = verify_duality(&spec, &partner, cfg.grid.nu, cfg.grid.nv, tols)
        .map_err(CliError::from_core)?;
    let pass = report.passes(tols.duality);

    #[derive(Serialize)]
    struct VerifyOut<'a> {
        #[serde(flatten)]
        header: RunHeader<'a>,
        pass: bool,
        tolerance: f64,
        report: &'a spherecong::duality::DualityReport,
    }
    output::write_json(
        &out_dir.join(format!("{name}.verify.json")),
        &VerifyOut { header: header(cfg, &name), pass, tolerance: tols.duality, report: &report },
    )?;
    println!(
        "verify {name}: center {:.3e} radius {:.3e} plane {:.3e} conformal {:.3e} -> {}",
        report.max.same_center,
        report.max.same_radius,
        report.max.same_plane3,
        report.max.conformality,
        if pass { "PASS" } else { "FAIL" }
    );
    if !pass {
        return Err(CliError::verification(format!(
            "duality residual maxima exceed {}",
            tols.duality
        )));
    }
    Ok(())
}

fn classify(cfg: &JobConfig, out_dir: &Path) -> Result<(), CliError> {
    let (name, spec) = resolve_surface(cfg)?;
    let classification = if spec.ambient_dim() == 4 {
        // sample the codimension-2 partner instead of the Theorem-1 dual
        let partner = dual_spec_of(&spec, cfg);
        let grid = spec.domain.grid(cfg.grid.nu, cfg.grid.nv);
        let mut f_pts = Vec::new();
        let mut d_pts = Vec::new();
        for &p in &grid {
            if let (Ok(f), Ok(d)) =
                (spec.value_with(p, &cfg.tolerances), partner.value_with(p, &cfg.tolerances))
            {
                f_pts.push(f);
                d_pts.push(d);
            }
        }
        if (f_pts.len() as f64) < 0.9 * grid.len() as f64 || f_pts.is_empty() {
            return Err(CliError::from_core(spherecong::Error::InsufficientSamples {
                usable: f_pts.len(),
                total: grid.len(),
            }));
        }
        spherecong::duality::classify_pair(&f_pts, &d_pts, &cfg.tolerances)
    } else {
        classify_dual(&spec, cfg.grid.nu, cfg.grid.nv, &cfg.tolerances)
            .map_err(CliError::from_core)?
    };

    #[derive(Serialize)]
    struct ClassifyOut<'a> {
        #[serde(flatten)]
        header: RunHeader<'a>,
        classification: &'a spherecong::duality::Classification,
    }
    output::write_json(
        &out_dir.join(format!("{name}.classify.json")),
        &ClassifyOut { header: header(cfg, &name), classification: &classification },
    )?;
    println!("classify {name}: {:?}", classification.kind);
    Ok(())
}

fn gallery_cmd(cfg: &JobConfig, out_dir: &Path) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct ManifestEntry {
        id: String,
        params: BTreeMap<String, f64>,
        flags: spherecong::gallery::ExpectedFlags,
        ambient_dim: usize,
        /// DSL source when the base map is a DSL surface.
        #[serde(skip_serializing_if = "Option::is_none")]
        source: Option<String>,
        spec: ImmersionSpec,
    }
    let mut entries = Vec::new();
    for entry in gallery::all() {
        let source = base_source(&entry.spec.map);
        println!(
            "{:24} R^{}  superconformal={:?}",
            entry.id,
            entry.spec.ambient_dim(),
            entry.expected.superconformal
        );
        entries.push(ManifestEntry {
            id: entry.id,
            params: entry.params,
            flags: entry.expected,
            ambient_dim: entry.spec.ambient_dim(),
            source,
            spec: entry.spec,
        });
    }
    let _ = cfg;
    output::write_json(&out_dir.join("gallery.json"), &entries)?;
    Ok(())
}

fn base_source(map: &SurfaceMap) -> Option<String> {
    match map {
        SurfaceMap::Dsl(ast) => Some(ast.to_string()),
        SurfaceMap::Moebius { inner, .. }
        | SurfaceMap::DropLast { inner }
        | SurfaceMap::Affine { inner, .. }
        | SurfaceMap::ChartRotated { inner, .. }
        | SurfaceMap::Dual { inner }
        | SurfaceMap::Centers { inner }
        | SurfaceMap::RouxelPartner { inner, .. } => base_source(inner),
        SurfaceMap::Rouxel { .. } => None,
    }
}

fn export(cfg: &JobConfig, out_dir: &Path) -> Result<(), CliError> {
    let (name, spec) = resolve_surface(cfg)?;
    if let SurfaceMap::Dsl(ast) = &spec.map {
        let path = out_dir.join(format!("{name}.surf"));
        output::write_atomic(&path, format!("{ast}\n").as_bytes())?;
        println!("export {name}: {}", path.display());
    } else {
        let path = out_dir.join(format!("{name}.spec.json"));
        output::write_json(&path, &spec)?;
        println!("export {name}: {}", path.display());
    }
    Ok(())
}
