//! Subcommand implementations. Each writes its outputs into a directory and
//! returns the in-memory result so callers can inspect it without re-reading.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lipkin_core::circuits::prepare_ground_state;
use lipkin_core::hull::{
    axis_parallel_edges, containment, detect_first_order_plane, detect_ruled_surfaces, facet_groups,
    partner_segments, project_to_plane, quickhull3_with, write_obj, Axis, CandidateSegment, Containment,
    Hull3, HullOptions, PlaneOptions, Point3, RuledSurfaceReport,
};
use lipkin_core::lmg::{order_parameters, solve_grid, GroundStateOptions, LmgParams, RdmPoint};
use lipkin_core::seeds::SeedSplitter;
use lipkin_core::tomography::{estimate_order_parameters, measure, CountsRecord};
use lipkin_core::trajectory::{trajectory_analysis, TrajectoryAnalysis, TrajectoryOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Mode, SweepConfig};
use crate::error::{CliError, CliResult};
use crate::io::{
    counts_jsonl_bytes, ensure_dir, fmt_f64, fmt_opt_f64, points_csv_bytes, read_points_csv, sibling_manifest, write_bytes,
    CountsLine, PointRow, PointSeed, RunManifest, Status,
};
use crate::svg::{line_plot, LinePlot};

pub const WORKERS_ENV: &str = "LIPKIN_WORKERS";

pub fn workers_from_env() -> CliResult<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Runs `f` on a dedicated pool; outputs never depend on the worker count.
pub fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn exact_rows(cfg: &SweepConfig, workers: Option<usize>) -> CliResult<Vec<PointRow>> {
    let grid = cfg.grid()?;
    let results = in_pool(workers, || solve_grid(&grid, &GroundStateOptions::default()))??;
    results
        .iter()
        .map(|gs| Ok(PointRow::exact(&order_parameters(gs)?, gs.degenerate)))
        .collect()
}

pub fn cmd_exact_sweep(cfg: &SweepConfig) -> CliResult<Vec<PointRow>> {
    if cfg.mode != Mode::Exact {
        return Err(CliError::Config("exact-sweep requires mode exact".into()));
    }
    let mut manifest = RunManifest::new("exact-sweep", cfg);
    let rows = exact_rows(cfg, workers_from_env()?)?;
    let dir = ensure_dir(&cfg.output.directory)?;
    write_bytes(&dir.join("points.csv"), &points_csv_bytes(&rows, false)?)?;
    manifest.record_file(&dir, "points.csv")?;
    manifest.finish(&dir)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub rows: Vec<PointRow>,
    pub counts: Vec<CountsLine>,
}

fn failed_row(p: &LmgParams, degenerate: bool, mode: Mode, seed: u64) -> PointRow {
    PointRow {
        epsilon: p.epsilon,
        lambda: p.lambda,
        jz: None,
        jz2: None,
        jpm2: None,
        energy: None,
        degenerate: Some(degenerate),
        source: mode.source().as_str().to_string(),
        shots: None,
        seed: Some(seed),
        jz_err: None,
        jz2_err: None,
        jpm2_err: None,
        energy_err: None,
        status: Some(Status::Failed),
    }
}

/// Simulates every grid point. Infeasible state preparation marks the point
/// failed without aborting the sweep.
pub fn sim_output(cfg: &SweepConfig, workers: Option<usize>) -> CliResult<SimOutput> {
    if cfg.mode == Mode::Exact {
        return Err(CliError::Config("sim-sweep requires mode ideal or noisy".into()));
    }
    let grid = cfg.grid()?;
    let plan = cfg.plan();
    plan.validate()?;
    let noise = (cfg.mode == Mode::SimNoisy).then(|| cfg.noise.model());
    let splitter = SeedSplitter::new(cfg.root_seed);
    let per_point: Vec<CliResult<Vec<CountsLine>>> = in_pool(workers, || {
        grid.par_iter()
            .enumerate()
            .map(|(i, p)| {
                let prep = match prepare_ground_state(p) {
                    Ok(prep) => prep,
                    Err(e) if matches!(e.root(), lipkin_core::Error::Infeasible { .. }) => return Ok(Vec::new()),
                    Err(e) => return Err(CliError::from(e.at_point(i))),
                };
                let records = measure(&prep.circuit, noise.as_ref(), &plan, &splitter, i as u64)
                    .map_err(|e| CliError::from(e.at_point(i)))?;
                let reps = plan.repetitions as usize;
                Ok(records
                    .into_iter()
                    .enumerate()
                    .map(|(k, record)| CountsLine {
                        point: i,
                        epsilon: p.epsilon,
                        lambda: p.lambda,
                        repetition: (k % reps) as u32,
                        record,
                    })
                    .collect())
            })
            .collect()
    })?;
    let mut counts = Vec::new();
    for r in per_point {
        counts.extend(r?);
    }
    let rows = rows_from_counts(cfg, &counts, workers)?;
    Ok(SimOutput { rows, counts })
}

/// Points from persisted histograms; grid points without counts are failed.
pub fn rows_from_counts(cfg: &SweepConfig, counts: &[CountsLine], workers: Option<usize>) -> CliResult<Vec<PointRow>> {
    let grid = cfg.grid()?;
    let plan = cfg.plan();
    let splitter = SeedSplitter::new(cfg.root_seed);
    let mut by_point: BTreeMap<usize, Vec<CountsRecord>> = BTreeMap::new();
    for c in counts {
        if c.point >= grid.len() {
            return Err(CliError::Config(format!("counts for point {} outside the grid", c.point)));
        }
        by_point.entry(c.point).or_default().push(c.record.clone());
    }
    let exact = in_pool(workers, || solve_grid(&grid, &GroundStateOptions::default()))??;
    let source = cfg.mode.source();
    in_pool(workers, || {
        grid.par_iter()
            .enumerate()
            .map(|(i, p)| {
                let seed = splitter.point_seed(i as u64);
                let Some(records) = by_point.get(&i) else {
                    return Ok(failed_row(p, exact[i].degenerate, cfg.mode, seed));
                };
                let est = estimate_order_parameters(records, &plan, p, source).map_err(|e| CliError::from(e.at_point(i)))?;
                let mut point = est.point.clone();
                point.seed = Some(seed);
                let mut row = PointRow::exact(&point, exact[i].degenerate);
                row.jz_err = Some(est.jz_err);
                row.jz2_err = Some(est.jz2_err);
                row.jpm2_err = Some(est.jpm2_err);
                row.energy_err = Some(est.energy_err());
                row.status = Some(Status::Ok);
                Ok(row)
            })
            .collect()
    })?
}

/// With `from_counts`, histograms are re-read instead of simulated.
pub fn cmd_sim_sweep(cfg: &SweepConfig, from_counts: Option<&Path>) -> CliResult<SimOutput> {
    let workers = workers_from_env()?;
    let mut manifest = RunManifest::new("sim-sweep", cfg);
    let out = match from_counts {
        Some(path) => {
            if cfg.mode == Mode::Exact {
                return Err(CliError::Config("sim-sweep requires mode ideal or noisy".into()));
            }
            let counts = crate::io::read_counts_jsonl(path)?;
            SimOutput {
                rows: rows_from_counts(cfg, &counts, workers)?,
                counts,
            }
        }
        None => sim_output(cfg, workers)?,
    };
    let dir = ensure_dir(&cfg.output.directory)?;
    write_bytes(&dir.join("points.csv"), &points_csv_bytes(&out.rows, true)?)?;
    manifest.record_file(&dir, "points.csv")?;
    if cfg.output.wants("jsonl") && from_counts.is_none() {
        write_bytes(&dir.join("counts.jsonl"), &counts_jsonl_bytes(&out.counts)?)?;
        manifest.record_file(&dir, "counts.jsonl")?;
    }
    let splitter = SeedSplitter::new(cfg.root_seed);
    manifest.seeds = cfg
        .grid()?
        .iter()
        .enumerate()
        .map(|(i, p)| PointSeed {
            point: i,
            epsilon: p.epsilon,
            lambda: p.lambda,
            seed: splitter.point_seed(i as u64),
        })
        .collect();
    manifest.finish(&dir)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneReport {
    pub facet: usize,
    pub normal_axis: Axis,
    pub vertices: Vec<Point3>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub inner_file: String,
    pub tol: f64,
    pub inner_volume: f64,
    #[serde(flatten)]
    pub result: Containment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullReport {
    pub file: String,
    pub n_points: usize,
    pub eps: f64,
    pub angle_tol: f64,
    pub vertices: usize,
    pub facets: usize,
    pub edges: usize,
    pub euler_characteristic: i64,
    pub volume: f64,
    /// Points farther than eps from the boundary; zero for exact ground states.
    pub off_boundary_points: usize,
    pub ruled: Vec<RuledSurfaceReport>,
    pub first_order_planes: Vec<PlaneReport>,
    pub containment: Option<ContainmentReport>,
}

#[derive(Debug, Clone)]
pub struct HullArgs {
    /// Outer (usually exact) points file, then an optional inner file.
    pub points: Vec<PathBuf>,
    pub out: PathBuf,
    pub n_particles: Option<u32>,
    pub eps: Option<f64>,
    pub angle_tol: Option<f64>,
    pub min_lines: usize,
}

impl HullArgs {
    pub fn new(points: Vec<PathBuf>, out: PathBuf) -> Self {
        Self {
            points,
            out,
            n_particles: None,
            eps: None,
            angle_tol: None,
            min_lines: 10,
        }
    }
}

/// Coordinate scale used for default tolerances.
pub fn coordinate_scale(pts: &[Point3]) -> f64 {
    pts.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Tolerances relative to the coordinate scale, overridable.
pub fn hull_options_for(pts: &[Point3], eps: Option<f64>, angle_tol: Option<f64>) -> HullOptions {
    let base = HullOptions::exact();
    HullOptions {
        eps: eps.unwrap_or(base.eps * coordinate_scale(pts)),
        angle_tol: angle_tol.unwrap_or(base.angle_tol),
    }
}

pub struct LoadedPoints {
    pub rows: Vec<PointRow>,
    pub points: Vec<RdmPoint>,
}

/// Particle number is not a CSV column; it comes from the flag or the
/// sibling manifest, and only matters for grouping partner points.
pub fn load_points(path: &Path, n_particles: Option<u32>) -> CliResult<LoadedPoints> {
    let rows = read_points_csv(path)?;
    let n = n_particles
        .or_else(|| sibling_manifest(path).map(|m| m.config.model.n_particles))
        .unwrap_or(0);
    let points = rows.iter().filter(|r| r.is_ok()).filter_map(|r| r.to_point(n)).collect();
    Ok(LoadedPoints { rows, points })
}

fn union_candidates(mut a: Vec<CandidateSegment>, b: Vec<CandidateSegment>) -> Vec<CandidateSegment> {
    a.extend(b);
    a.sort_by_key(|c| (c.a, c.b));
    a.dedup();
    a
}

pub fn build_hull(points: &[RdmPoint], opts: &HullOptions) -> CliResult<Hull3> {
    if points.len() < 4 {
        return Err(CliError::Config(format!("hull needs >= 4 points, got {}", points.len())));
    }
    let coords: Vec<Point3> = points.iter().map(|p| p.coords()).collect();
    Ok(quickhull3_with(&coords, opts)?)
}

pub fn ruled_reports(hull: &Hull3, points: &[RdmPoint], min_lines: usize) -> Vec<RuledSurfaceReport> {
    [Axis::Jz, Axis::Jpm2]
        .iter()
        .map(|&axis| {
            let cands = union_candidates(
                partner_segments(points, axis),
                axis_parallel_edges(hull, axis, hull.angle_tol),
            );
            detect_ruled_surfaces(hull, axis, hull.angle_tol.max(1e-6), min_lines, &cands)
        })
        .collect()
}

fn projection_csv(hull: &Hull3) -> CliResult<Vec<u8>> {
    let verts = hull.vertices();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["projection", "order", "jz", "jz2", "jpm2"])?;
    for axis in [Axis::Jz, Axis::Jz2, Axis::Jpm2] {
        let p = project_to_plane(&verts, axis, hull.eps);
        for (k, &i) in p.outline.iter().enumerate() {
            let mut cols = vec![axis.name().to_string(), k.to_string()];
            for c in 0..3 {
                cols.push(if c == axis.index() { String::new() } else { fmt_f64(verts[i][c]) });
            }
            w.write_record(cols)?;
        }
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub projection: String,
    pub order: usize,
    pub jz: Option<f64>,
    pub jz2: Option<f64>,
    pub jpm2: Option<f64>,
}

pub fn read_projection_csv(path: &Path) -> CliResult<Vec<ProjectionRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|x| x.map_err(CliError::from)).collect()
}

pub fn cmd_hull(args: &HullArgs) -> CliResult<HullReport> {
    if args.points.is_empty() || args.points.len() > 2 {
        return Err(CliError::Config("hull takes one or two points files".into()));
    }
    let outer = load_points(&args.points[0], args.n_particles)?;
    let coords: Vec<Point3> = outer.points.iter().map(|p| p.coords()).collect();
    let opts = hull_options_for(&coords, args.eps, args.angle_tol);
    let hull = build_hull(&outer.points, &opts)?;
    let ruled = ruled_reports(&hull, &outer.points, args.min_lines);
    let plane_ids = detect_first_order_plane(&hull, Axis::Jz2, &PlaneOptions::default());
    let groups = facet_groups(&hull, &ruled, &plane_ids);
    let off_boundary_points = coords.iter().filter(|p| !hull.on_boundary(p, hull.eps)).count();

    let mut containment_report = None;
    let dir = ensure_dir(&args.out)?;
    if let Some(inner_path) = args.points.get(1) {
        let inner = load_points(inner_path, args.n_particles)?;
        let sampling = inner.rows.iter().filter(|r| r.is_ok()).map(|r| r.max_err()).fold(0.0, f64::max);
        let tol = (3.0 * sampling).max(opts.eps);
        let inner_hull = build_hull(&inner.points, &HullOptions::noisy(tol))?;
        let c = containment(&hull, &inner_hull, tol);
        write_bytes(&dir.join("hull_inner.obj"), write_obj(&inner_hull, &facet_groups(&inner_hull, &[], &[])).as_bytes())?;
        containment_report = Some(ContainmentReport {
            inner_file: inner_path.display().to_string(),
            tol,
            inner_volume: inner_hull.volume(),
            result: c,
        });
    }

    let report = HullReport {
        file: args.points[0].display().to_string(),
        n_points: coords.len(),
        eps: hull.eps,
        angle_tol: hull.angle_tol,
        vertices: hull.vertex_ids.len(),
        facets: hull.facets.len(),
        edges: hull.edge_count(),
        euler_characteristic: hull.euler_characteristic(),
        volume: hull.volume(),
        off_boundary_points,
        first_order_planes: plane_ids
            .iter()
            .map(|&f| PlaneReport {
                facet: f,
                normal_axis: Axis::Jz2,
                vertices: hull.facets[f].vertex_loop.iter().map(|&v| hull.points[v]).collect(),
            })
            .collect(),
        ruled,
        containment: containment_report,
    };
    write_bytes(&dir.join("hull.obj"), write_obj(&hull, &groups).as_bytes())?;
    write_bytes(&dir.join("projection.csv"), &projection_csv(&hull)?)?;
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    write_bytes(&dir.join("report.json"), &json)?;
    Ok(report)
}

pub fn read_hull_report(path: &Path) -> CliResult<HullReport> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone)]
pub struct AnalyzeArgs {
    pub points: PathBuf,
    pub out: PathBuf,
    pub epsilon: Option<f64>,
    pub smoothing_sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientRow {
    pub lambda: f64,
    pub djz_dlambda: f64,
    pub arc_speed: f64,
    pub std_error: f64,
}

/// Rows at one epsilon, sorted by lambda.
pub fn trajectory_of(rows: &[PointRow], epsilon: Option<f64>) -> CliResult<(f64, Vec<(f64, Point3)>, Vec<f64>)> {
    let ok: Vec<&PointRow> = rows
        .iter()
        .filter(|r| r.is_ok())
        .filter(|r| epsilon.is_none_or(|e| (r.epsilon - e).abs() <= 1e-12 * e.abs().max(1.0)))
        .collect();
    let Some(first) = ok.first() else {
        return Err(CliError::Config("no usable points at the requested epsilon".into()));
    };
    let eps = first.epsilon;
    if ok.iter().any(|r| r.epsilon != eps) {
        return Err(CliError::Config("points mix several epsilon values; pass --epsilon".into()));
    }
    let mut sorted = ok.clone();
    sorted.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let pts = sorted.iter().map(|r| (r.lambda, r.coords().expect("filtered"))).collect();
    let errs = sorted.iter().map(|r| r.jz_err.unwrap_or(0.0)).collect();
    Ok((eps, pts, errs))
}

pub fn gradient_rows(a: &TrajectoryAnalysis) -> Vec<GradientRow> {
    (0..a.lambdas.len())
        .map(|i| GradientRow {
            lambda: a.lambdas[i],
            djz_dlambda: a.jz_gradient[i],
            arc_speed: a.arc_speed[i],
            std_error: a.gradient_std_error[i],
        })
        .collect()
}

pub fn read_gradient_csv(path: &Path) -> CliResult<Vec<GradientRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|x| x.map_err(CliError::from)).collect()
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> CliResult<TrajectoryAnalysis> {
    let rows = read_points_csv(&args.points)?;
    let (eps, pts, errs) = trajectory_of(&rows, args.epsilon)?;
    let opts = TrajectoryOptions {
        smoothing_sigma: args.smoothing_sigma,
        ..TrajectoryOptions::default()
    };
    let a = trajectory_analysis(&pts, Some(&errs), &opts)?;
    let dir = ensure_dir(&args.out)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lambda", "djz_dlambda", "arc_speed", "std_error"])?;
    for g in gradient_rows(&a) {
        w.write_record([
            fmt_f64(g.lambda),
            fmt_f64(g.djz_dlambda),
            fmt_f64(g.arc_speed),
            fmt_f64(g.std_error),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    write_bytes(&dir.join("gradient.csv"), &bytes)?;
    let title = format!("Gradient of <Jz>, epsilon = {eps}");
    let svg = line_plot(&LinePlot {
        title: &title,
        x_label: "lambda",
        y_label: "d<Jz>/d lambda",
        x: &a.lambdas,
        y: &a.jz_gradient,
        band: &a.gradient_std_error,
    });
    write_bytes(&dir.join("gradient.svg"), svg.as_bytes())?;
    let mut json = serde_json::to_vec_pretty(&a)?;
    json.push(b'\n');
    write_bytes(&dir.join("analysis.json"), &json)?;
    Ok(a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub epsilon: f64,
    pub lambda: f64,
    pub d_jz: f64,
    pub d_jz2: f64,
    pub d_jpm2: f64,
    pub z_jz: Option<f64>,
    pub z_jz2: Option<f64>,
    pub z_jpm2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub reference: String,
    pub candidate: String,
    pub matched: usize,
    pub only_reference: usize,
    pub only_candidate: usize,
    pub mean_delta: [f64; 3],
    pub max_abs_delta: [f64; 3],
    pub max_abs_z: Option<f64>,
    pub containment: Option<Containment>,
}

fn z(d: f64, a: Option<f64>, b: Option<f64>) -> Option<f64> {
    let s = a.unwrap_or(0.0).hypot(b.unwrap_or(0.0));
    (s > 0.0).then(|| d / s)
}

/// Candidate minus reference, joined on exact (epsilon, lambda).
pub fn compare_rows(reference: &[PointRow], candidate: &[PointRow]) -> (Vec<CompareRow>, usize, usize) {
    let key = |r: &PointRow| (r.epsilon.to_bits(), r.lambda.to_bits());
    let refs: BTreeMap<(u64, u64), &PointRow> = reference.iter().filter(|r| r.is_ok()).map(|r| (key(r), r)).collect();
    let mut out = Vec::new();
    let mut only_candidate = 0;
    for c in candidate.iter().filter(|r| r.is_ok()) {
        let Some(r) = refs.get(&key(c)) else {
            only_candidate += 1;
            continue;
        };
        let (a, b) = (r.coords().expect("ok"), c.coords().expect("ok"));
        let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        out.push(CompareRow {
            epsilon: c.epsilon,
            lambda: c.lambda,
            d_jz: d[0],
            d_jz2: d[1],
            d_jpm2: d[2],
            z_jz: z(d[0], r.jz_err, c.jz_err),
            z_jz2: z(d[1], r.jz2_err, c.jz2_err),
            z_jpm2: z(d[2], r.jpm2_err, c.jpm2_err),
        });
    }
    let only_reference = refs.len() - out.len();
    (out, only_reference, only_candidate)
}

pub fn cmd_compare(reference: &Path, candidate: &Path, out: &Path) -> CliResult<CompareSummary> {
    let ra = read_points_csv(reference)?;
    let rb = read_points_csv(candidate)?;
    let (rows, only_reference, only_candidate) = compare_rows(&ra, &rb);
    let m = rows.len().max(1) as f64;
    let mut mean = [0.0; 3];
    let mut max = [0.0f64; 3];
    let mut max_z: Option<f64> = None;
    for r in &rows {
        for (k, d) in [r.d_jz, r.d_jz2, r.d_jpm2].iter().enumerate() {
            mean[k] += d / m;
            max[k] = max[k].max(d.abs());
        }
        for zv in [r.z_jz, r.z_jz2, r.z_jpm2].into_iter().flatten() {
            max_z = Some(max_z.unwrap_or(0.0).max(zv.abs()));
        }
    }
    let pa: Vec<RdmPoint> = ra.iter().filter_map(|r| r.to_point(0)).collect();
    let pb: Vec<RdmPoint> = rb.iter().filter_map(|r| r.to_point(0)).collect();
    let outer = build_hull(&pa, &hull_options_for(&pa.iter().map(|p| p.coords()).collect::<Vec<_>>(), None, None)).ok();
    let tol = 3.0 * rb.iter().filter(|r| r.is_ok()).map(|r| r.max_err()).fold(0.0, f64::max);
    let contained = outer.and_then(|o| {
        let inner = build_hull(&pb, &HullOptions::noisy(tol.max(o.eps))).ok()?;
        Some(containment(&o, &inner, tol.max(o.eps)))
    });
    let summary = CompareSummary {
        reference: reference.display().to_string(),
        candidate: candidate.display().to_string(),
        matched: rows.len(),
        only_reference,
        only_candidate,
        mean_delta: mean,
        max_abs_delta: max,
        max_abs_z: max_z,
        containment: contained,
    };
    let dir = ensure_dir(out)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["epsilon", "lambda", "d_jz", "d_jz2", "d_jpm2", "z_jz", "z_jz2", "z_jpm2"])?;
    let o = fmt_opt_f64;
    for r in &rows {
        w.write_record([
            fmt_f64(r.epsilon),
            fmt_f64(r.lambda),
            fmt_f64(r.d_jz),
            fmt_f64(r.d_jz2),
            fmt_f64(r.d_jpm2),
            o(r.z_jz),
            o(r.z_jz2),
            o(r.z_jpm2),
        ])?;
    }
    write_bytes(&dir.join("compare.csv"), &w.into_inner().map_err(|e| CliError::Io(e.to_string()))?)?;
    let mut json = serde_json::to_vec_pretty(&summary)?;
    json.push(b'\n');
    write_bytes(&dir.join("compare.json"), &json)?;
    Ok(summary)
}
