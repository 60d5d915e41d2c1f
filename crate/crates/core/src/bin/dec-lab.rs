use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use dec_lab::dual::DualComplex;
use dec_lab::fields::Problem;
use dec_lab::mesh::SimplicialComplex;
use dec_lab::meshgen::{generate, load, refine, to_decmesh, Family, FamilySpec};
use dec_lab::ops::Operators;
use dec_lab::poisson::{assemble, error_report, solution_dump, solve, SolverConfig};
use dec_lab::study::{
    render, run_consistency_study, run_convergence_study, Format, StudyConfig, StudyError, StudyReport,
};

#[derive(Parser)]
#[command(name = "dec-lab", version, about = "Discrete exterior calculus meshes, Poisson solves and convergence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, refine or inspect meshes.
    #[command(subcommand)]
    Mesh(MeshCommand),
    /// Solve the Dirichlet problem on one mesh and print the errors.
    Solve(SolveArgs),
    /// Run a study over a sequence of levels.
    #[command(subcommand)]
    Study(StudyCommand),
}

#[derive(Subcommand)]
enum MeshCommand {
    /// Write a family mesh in `decmesh 1` format.
    Gen(MeshArgs),
    /// Refine a mesh file once.
    Refine {
        #[command(flatten)]
        mesh: MeshArgs,
        /// Mesh file to refine; defaults to the family mesh at `--level`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Print counts, mesh size and shape regularity.
    Report {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MeshArgs {
    /// pentagon, pentagon:N, square:1|2|3, corner[:angle], cube or file:PATH.
    #[arg(long, default_value = "pentagon")]
    family: Family,
    #[arg(long, default_value_t = 0)]
    level: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    mesh: MeshArgs,
    /// trig2d, trig3d, corner[:mu], linear2d, linear3d.
    #[arg(long, default_value = "trig2d")]
    problem: Problem,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Subcommand)]
enum StudyCommand {
    /// Solve on every level and tabulate errors and rates.
    Convergence(StudyArgs),
    /// Hodge star and Laplacian errors on exact data.
    Consistency {
        #[command(flatten)]
        study: StudyArgs,
        /// Form degree k.
        #[arg(long, default_value_t = 0)]
        degree: usize,
        /// Random interior displacement as a fraction of the shortest edge.
        #[arg(long)]
        jitter: Option<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long, default_value = "pentagon")]
    family: Family,
    #[arg(long, default_value = "trig2d")]
    problem: Problem,
    /// Number of levels, starting at 0 (9 in 2D and 5 in 3D by default).
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv, svg or text.
    #[arg(long, default_value = "text")]
    format: Format,
    /// Omit wall times so output is reproducible byte for byte.
    #[arg(long)]
    deterministic: bool,
    /// Refuse levels with more vertices than this.
    #[arg(long)]
    max_vertices: Option<usize>,
}

impl StudyArgs {
    fn config(&self) -> StudyConfig {
        let mut config = StudyConfig::new(self.family.clone()).deterministic(self.deterministic);
        if let Some(levels) = self.levels {
            config = config.levels(levels);
        }
        if let Some(cap) = self.max_vertices {
            config.max_vertices = cap;
        }
        config.solver.tol = self.tol;
        config
    }
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<(), Box<dyn std::error::Error>> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn mesh_from(args: &MeshArgs, input: &Option<PathBuf>) -> Result<SimplicialComplex, Box<dyn std::error::Error>> {
    Ok(match input {
        Some(path) => load(path)?,
        None => generate(&FamilySpec::new(args.family.clone(), args.level))?,
    })
}

fn report_mesh(c: &SimplicialComplex) -> String {
    let n = c.dim();
    let counts: Vec<String> = (0..=n).map(|k| c.num_simplices(k).to_string()).collect();
    let boundary = c.boundary_vertices().iter().filter(|&&b| b).count();
    let s = c.shape_report();
    format!(
        "dim {n}\nsimplices {}\nboundary vertices {boundary}\ninterior vertices {}\nh {:e}\nc_reg {:.6}\nstar_bound {}\nwell_centered {:?}\nmin_circumcenter_barycentric {:e}\n",
        counts.join(" "),
        c.num_vertices() - boundary,
        s.h,
        s.c_reg,
        s.star_bound,
        s.well_centered,
        s.min_circumcenter_barycentric,
    )
}

/// Writes whatever the study produced; a partial report still goes out
/// before the error is returned.
fn finish_study(
    result: Result<StudyReport, StudyError>,
    args: &StudyArgs,
) -> Result<(), Box<dyn std::error::Error>> {
    match result {
        Ok(report) => write_out(&args.out, &render(&report, args.format)?),
        Err(StudyError::Aborted { level, partial, source }) => {
            write_out(&args.out, &render(&partial, args.format)?)?;
            Err(format!("study stopped at level {level}: {source}").into())
        }
        Err(e) => Err(e.into()),
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Mesh(MeshCommand::Gen(args)) => {
            let c = mesh_from(&args, &None)?;
            write_out(&args.out, &to_decmesh(&c))
        }
        Command::Mesh(MeshCommand::Refine { mesh, input }) => {
            let c = mesh_from(&mesh, &input)?;
            let finer = refine(&c, &FamilySpec::new(mesh.family.clone(), mesh.level))?;
            write_out(&mesh.out, &to_decmesh(&finer))
        }
        Command::Mesh(MeshCommand::Report { mesh, input }) => {
            let c = mesh_from(&mesh, &input)?;
            write_out(&mesh.out, &report_mesh(&c))
        }
        Command::Solve(args) => {
            let c = mesh_from(&args.mesh, &None)?;
            let h = c.mesh_size();
            let ops = Operators::new(Arc::new(DualComplex::new(Arc::new(c))?));
            let assembled = assemble(&ops, &args.problem)?;
            let config = SolverConfig { tol: args.tol, ..Default::default() };
            let solved = solve(&ops, &assembled, &config)?;
            let e = error_report(&ops, &solved.solution, &args.problem)?;
            eprintln!(
                "h {h:e} unknowns {} iterations {} residual {:e}\nerr_max {:e} err_h1 {:e} err_l2 {:e}",
                solved.interior_unknowns, solved.iterations, solved.residual, e.max, e.h1, e.l2
            );
            let dump = solution_dump(
                &solved.solution,
                &args.mesh.family.to_string(),
                args.problem.name(),
                args.mesh.level,
            );
            match &args.mesh.out {
                Some(_) => write_out(&args.mesh.out, &dump),
                None => Ok(()),
            }
        }
        Command::Study(StudyCommand::Convergence(args)) => {
            finish_study(run_convergence_study(&args.config(), &args.problem), &args)
        }
        Command::Study(StudyCommand::Consistency { study, degree, jitter, seed }) => {
            let mut config = study.config();
            if let Some(a) = jitter {
                config = config.jitter(a, seed);
            }
            finish_study(run_consistency_study(&config, &study.problem, degree), &study)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
