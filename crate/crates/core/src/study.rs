//! Convergence and consistency studies over a level sequence, and their
//! CSV, SVG and text renderings.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::dual::{DualComplex, DualError};
use crate::fields::{consistency_probe, laplacian_decomposition, FormField, Problem, PROBE_DEGREE};
use crate::mesh::{MeshError, SimplicialComplex};
use crate::meshgen::{generate, jitter_interior, Family, FamilySpec, MeshGenError};
use crate::ops::{OpsError, Operators};
use crate::poisson::{assemble, error_report, solve, PoissonError, SolverConfig};

/// Smallest barycentric coordinate of a circumcenter allowed after jitter.
pub const JITTER_MARGIN: f64 = 0.02;

/// Default vertex cap for the memory guard.
pub const DEFAULT_MAX_VERTICES: usize = 1_500_000;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("problem is {problem}-dimensional but family {family} is {mesh}-dimensional")]
    DimensionMismatch { family: String, problem: usize, mesh: usize },
    #[error("level {level} would need about {estimate} vertices, above the cap of {cap}")]
    TooLarge { level: usize, estimate: usize, cap: usize },
    #[error("form degree {k} is not available in dimension {n}")]
    Degree { k: usize, n: usize },
    #[error("level {level}: {source}")]
    Aborted {
        level: usize,
        partial: Box<StudyReport>,
        #[source]
        source: Box<StudyError>,
    },
    #[error("unknown output format `{0}` (expected csv, svg or text)")]
    Format(String),
    #[error(transparent)]
    MeshGen(#[from] MeshGenError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Dual(#[from] DualError),
    #[error(transparent)]
    Ops(#[from] OpsError),
    #[error(transparent)]
    Poisson(#[from] PoissonError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Convergence,
    Consistency { degree: usize },
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StudyKind::Convergence => write!(f, "convergence"),
            StudyKind::Consistency { degree } => write!(f, "consistency k={degree}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub level: usize,
    pub h: f64,
    /// One entry per norm of the report, in the same order.
    pub errors: Vec<f64>,
    pub iterations: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub kind: StudyKind,
    pub family: String,
    pub problem: String,
    pub tolerance: f64,
    pub stamp: String,
    pub norms: Vec<String>,
    pub rows: Vec<StudyRow>,
}

/// `log₂(previous / current)`; `None` when either error is zero.
pub fn rate(previous: f64, current: f64) -> Option<f64> {
    let r = (previous / current).log2();
    r.is_finite().then_some(r)
}

impl StudyReport {
    fn new(kind: StudyKind, family: &Family, problem: &str, tolerance: f64, norms: &[&str]) -> Self {
        Self {
            kind,
            family: family.to_string(),
            problem: problem.to_string(),
            tolerance,
            stamp: stamp(),
            norms: norms.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn norm_index(&self, norm: &str) -> Option<usize> {
        self.norms.iter().position(|n| n == norm)
    }

    pub fn errors(&self, norm: &str) -> Vec<f64> {
        let j = self.norm_index(norm).unwrap_or_else(|| panic!("no norm `{norm}` in report"));
        self.rows.iter().map(|r| r.errors[j]).collect()
    }

    /// Per-step rate for row `i` (none for the first row).
    pub fn rate(&self, i: usize, j: usize) -> Option<f64> {
        if i == 0 {
            return None;
        }
        rate(self.rows[i - 1].errors[j], self.rows[i].errors[j])
    }

    pub fn rates(&self, norm: &str) -> Vec<Option<f64>> {
        let j = self.norm_index(norm).unwrap_or_else(|| panic!("no norm `{norm}` in report"));
        (0..self.rows.len()).map(|i| self.rate(i, j)).collect()
    }

    pub fn final_rate(&self, norm: &str) -> Option<f64> {
        self.rates(norm).last().copied().flatten()
    }

    /// Least squares slope of `log e` against `log h` over the last `last` rows
    /// with nonzero error.
    pub fn fitted_rate(&self, norm: &str, last: usize) -> Option<f64> {
        let j = self.norm_index(norm)?;
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.errors[j] > 0.0 && r.h > 0.0)
            .map(|r| (r.h.ln(), r.errors[j].ln()))
            .collect();
        let pts = &pts[pts.len().saturating_sub(last)..];
        if pts.len() < 2 {
            return None;
        }
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        Some(num / den)
    }
}

fn stamp() -> String {
    std::env::var("DEC_LAB_COMMIT").unwrap_or_else(|_| concat!("dec-lab ", env!("CARGO_PKG_VERSION")).to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub family: Family,
    pub levels: usize,
    pub solver: SolverConfig,
    /// Report zero seconds so repeated runs give identical bytes.
    pub deterministic: bool,
    pub max_vertices: usize,
    /// Interior perturbation `(amplitude, seed)` applied afresh at every level.
    pub jitter: Option<(f64, u64)>,
    pub quadrature_degree: usize,
}

impl StudyConfig {
    /// Nine levels in the plane, five in space.
    pub fn new(family: Family) -> Self {
        let levels = if family.dim() == Some(3) { 5 } else { 9 };
        Self {
            family,
            levels,
            solver: SolverConfig::default(),
            deterministic: false,
            max_vertices: DEFAULT_MAX_VERTICES,
            jitter: None,
            quadrature_degree: PROBE_DEGREE,
        }
    }

    pub fn levels(mut self, levels: usize) -> Self {
        self.levels = levels;
        self
    }

    pub fn deterministic(mut self, on: bool) -> Self {
        self.deterministic = on;
        self
    }

    pub fn jitter(mut self, amplitude: f64, seed: u64) -> Self {
        self.jitter = Some((amplitude, seed));
        self
    }
}

/// Rough vertex count of a family level, used before generating it.
pub fn estimated_vertices(family: &Family, level: usize) -> Result<usize, StudyError> {
    Ok(match family {
        Family::CubeKuhn => ((2usize << level) + 1).pow(3),
        Family::Square { .. } => ((1usize << level) + 1).pow(2),
        _ => {
            // planar medial refinement: V' = V + E, E' = 2E + 3T, T' = 4T
            let c = generate(&FamilySpec::new(family.clone(), 0))?;
            let (mut v, mut e, mut t) = (c.num_vertices(), c.num_simplices(1), c.num_simplices(2));
            for _ in 0..level {
                v += e;
                e = 2 * e + 3 * t;
                t *= 4;
            }
            v
        }
    })
}

fn mesh_at(config: &StudyConfig, level: usize) -> Result<SimplicialComplex, StudyError> {
    let estimate = estimated_vertices(&config.family, level)?;
    if estimate > config.max_vertices {
        return Err(StudyError::TooLarge { level, estimate, cap: config.max_vertices });
    }
    let c = generate(&FamilySpec::new(config.family.clone(), level))?;
    Ok(match config.jitter {
        Some((amplitude, seed)) => jitter_interior(&c, amplitude, JITTER_MARGIN, seed.wrapping_add(level as u64))?,
        None => c,
    })
}

fn check_dim(config: &StudyConfig, problem: &Problem) -> Result<(), StudyError> {
    match config.family.dim() {
        Some(n) if n != problem.dim() => Err(StudyError::DimensionMismatch {
            family: config.family.to_string(),
            problem: problem.dim(),
            mesh: n,
        }),
        _ => Ok(()),
    }
}

fn run_levels(
    config: &StudyConfig,
    mut report: StudyReport,
    mut level_fn: impl FnMut(usize) -> Result<StudyRow, StudyError>,
) -> Result<StudyReport, StudyError> {
    for level in 0..config.levels {
        let start = Instant::now();
        match level_fn(level) {
            Ok(mut row) => {
                row.seconds = if config.deterministic { 0.0 } else { start.elapsed().as_secs_f64() };
                report.rows.push(row);
            }
            Err(e) => {
                return Err(StudyError::Aborted { level, partial: Box::new(report), source: Box::new(e) });
            }
        }
    }
    Ok(report)
}

/// Solves the Dirichlet problem on every level and records `‖e‖_∞`, `‖d e‖_h`
/// and `‖e‖_h` for `e = R u - u_h`. Levels without interior vertices record
/// zero errors.
pub fn run_convergence_study(config: &StudyConfig, problem: &Problem) -> Result<StudyReport, StudyError> {
    check_dim(config, problem)?;
    let report =
        StudyReport::new(StudyKind::Convergence, &config.family, problem.name(), config.solver.tol, &["max", "h1", "l2"]);
    run_levels(config, report, |level| {
        let mesh = mesh_at(config, level)?;
        let h = mesh.mesh_size();
        let ops = Operators::new(Arc::new(DualComplex::new(Arc::new(mesh))?));
        let assembled = match assemble(&ops, problem) {
            Err(PoissonError::NoInteriorVertices) => {
                return Ok(StudyRow { level, h, errors: vec![0.0; 3], iterations: 0, seconds: 0.0 });
            }
            other => other?,
        };
        let solved = solve(&ops, &assembled, &config.solver)?;
        let e = error_report(&ops, &solved.solution, problem)?;
        Ok(StudyRow { level, h, errors: vec![e.max, e.h1, e.l2], iterations: solved.iterations, seconds: 0.0 })
    })
}

/// The k-form built from the problem data: `u`, `du`, `★du` or `u vol`.
pub fn problem_form(problem: &Problem, k: usize) -> Result<FormField, StudyError> {
    let n = problem.dim();
    let u = problem.u_field();
    match k {
        0 => Ok(u),
        _ if k == n => Ok(u.hodge()),
        1 => Ok(problem.du_field()),
        _ if k + 1 == n => Ok(problem.du_field().hodge()),
        _ => Err(StudyError::Degree { k, n }),
    }
}

/// Norms recorded by a consistency study: the Hodge star errors on exact
/// data, and for 0-forms the Laplacian error with its two parts, all over
/// interior vertices in the max norm.
pub const CONSISTENCY_NORMS: [&str; 7] = ["max", "l2", "max_dual", "l2_dual", "laplacian", "first", "second"];

pub fn run_consistency_study(config: &StudyConfig, problem: &Problem, k: usize) -> Result<StudyReport, StudyError> {
    check_dim(config, problem)?;
    let field = problem_form(problem, k)?;
    let norms: &[&str] = if k == 0 { &CONSISTENCY_NORMS } else { &CONSISTENCY_NORMS[..4] };
    let report = StudyReport::new(StudyKind::Consistency { degree: k }, &config.family, problem.name(), 0.0, norms);
    run_levels(config, report, |level| {
        let mesh = mesh_at(config, level)?;
        let h = mesh.mesh_size();
        let ops = Operators::new(Arc::new(DualComplex::new(Arc::new(mesh))?));
        let r = consistency_probe(&field, &ops, config.quadrature_degree)?;
        let mut errors = vec![r.err_max, r.err_l2_primal_side, r.err_max_dual_side, r.err_l2_dual_side];
        if k == 0 {
            let d = laplacian_decomposition(problem, &ops, config.quadrature_degree)?;
            let (lap, first, second) = d.max_norms();
            errors.extend([lap, first, second]);
        }
        Ok(StudyRow { level, h, errors, iterations: 0, seconds: 0.0 })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svg,
    Text,
}

impl FromStr for Format {
    type Err = StudyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "svg" | "svg_loglog" => Ok(Format::Svg),
            "text" | "text_table" => Ok(Format::Text),
            _ => Err(StudyError::Format(s.to_string())),
        }
    }
}

fn rate_cell(r: Option<f64>) -> String {
    r.map_or_else(|| "-".to_string(), |r| format!("{r:.7}"))
}

/// Columns `level,h,err_<norm>,rate_<norm>,...,iters,seconds`; metadata lines
/// are not part of the CSV.
pub fn to_csv(report: &StudyReport) -> Result<String, StudyError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["level".to_string(), "h".to_string()];
    for n in &report.norms {
        header.push(format!("err_{n}"));
        header.push(format!("rate_{n}"));
    }
    header.extend(["iters".to_string(), "seconds".to_string()]);
    w.write_record(&header)?;
    for (i, row) in report.rows.iter().enumerate() {
        let mut rec = vec![row.level.to_string(), format!("{:e}", row.h)];
        for (j, e) in row.errors.iter().enumerate() {
            rec.push(format!("{e:e}"));
            rec.push(rate_cell(report.rate(i, j)));
        }
        rec.push(row.iterations.to_string());
        rec.push(format!("{:.3}", row.seconds));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

/// Alternating norm and log columns, one line per level.
pub fn to_text_table(report: &StudyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# {} study, family {}, problem {}, tol {:e}, {}",
        report.kind, report.family, report.problem, report.tolerance, report.stamp
    );
    let _ = write!(out, "{:>3} {:>12}", "i", "h");
    for n in &report.norms {
        let _ = write!(out, " {:>14} {:>10}", format!("e_{n}"), "log");
    }
    let _ = writeln!(out, " {:>7} {:>8}", "iters", "seconds");
    for (i, row) in report.rows.iter().enumerate() {
        let _ = write!(out, "{:>3} {:>12.6e}", row.level, row.h);
        for (j, e) in row.errors.iter().enumerate() {
            let r = report.rate(i, j).map_or_else(|| "-".to_string(), |r| format!("{r:.6}"));
            let _ = write!(out, " {e:>14.6e} {r:>10}");
        }
        let _ = writeln!(out, " {:>7} {:>8.3}", row.iterations, row.seconds);
    }
    out
}

/// Log-log plot of every norm against h with dashed reference slopes 1 and 2.
pub fn to_svg(report: &StudyReport) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 60.0;
    const COLORS: [&str; 7] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"];
    let pts: Vec<(f64, f64)> = report
        .rows
        .iter()
        .flat_map(|r| r.errors.iter().filter(|&&e| e > 0.0).map(move |&e| (r.h.log10(), e.log10())))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if pts.is_empty() {
        (x0, x1, y0, y1) = (-1.0, 0.0, -1.0, 0.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * M,
        H - 2.0 * M
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="14">{} / {} ({})</text>"#,
        W / 2.0,
        report.family,
        report.problem,
        report.kind
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">log10 h</text>"#,
        W / 2.0,
        H - 20.0
    );
    for slope in [1.0, 2.0] {
        // anchored at the coarsest point of the first norm
        let (ax, ay) = pts.iter().copied().fold((x1, y1), |best, p| if p.0 >= best.0 - 1e-12 && p.1 <= best.1 { p } else { best });
        let (bx, by) = (x0, ay - slope * (ax - x0));
        let _ = writeln!(
            out,
            r##"<line class="reference" data-slope="{slope}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="6 4"/>"##,
            sx(ax),
            sy(ay),
            sx(bx),
            sy(by)
        );
        let _ = writeln!(
            out,
            r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="#888">slope {slope}</text>"##,
            sx(bx) + 4.0,
            sy(by) - 4.0
        );
    }
    for (j, name) in report.norms.iter().enumerate() {
        let color = COLORS[j % COLORS.len()];
        let line: Vec<String> = report
            .rows
            .iter()
            .filter(|r| r.errors[j] > 0.0)
            .map(|r| format!("{:.2},{:.2}", sx(r.h.log10()), sy(r.errors[j].log10())))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" data-norm="{name}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{color}">{name}</text>"#,
            W - M + 6.0,
            M + 16.0 * (j as f64 + 1.0)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn render(report: &StudyReport, format: Format) -> Result<String, StudyError> {
    match format {
        Format::Csv => to_csv(report),
        Format::Svg => Ok(to_svg(report)),
        Format::Text => Ok(to_text_table(report)),
    }
}

pub fn emit(report: &StudyReport, format: Format, path: &Path) -> Result<(), StudyError> {
    std::fs::write(path, render(report, format)?)?;
    Ok(())
}
