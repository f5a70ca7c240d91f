use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gsts_core::cli::{
    cmd_analyze, cmd_generate, cmd_generate_random, cmd_run, cmd_sweep, read_grid_file, render_analysis,
    render_diff, reproduce_tables, rows_to_csv, rows_to_markdown, sweep_csv, write_reproduction,
    ExperimentSpec, Method, MethodParams, ProblemSource,
};
use gsts_core::solvers::{
    GstsCase, SolverConfig, SweepGrid, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE,
};
use gsts_core::{Error, Result};

/// GSTS iterations and preconditioned GMRES for singular saddle-point systems.
#[derive(Parser)]
#[command(name = "gsts", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write M.mtx, E.mtx, f.vec and manifest.txt for the MAC Stokes benchmark
    /// or, with --random, for a random rank-deficient system.
    Generate {
        #[arg(long, required_unless_present = "random")]
        l: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        /// Random system dimensions as p,q,rank.
        #[arg(long, conflicts_with = "l")]
        random: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one solver configuration.
    Run {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        method: String,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// CSV file to append the result row to; a sibling .md gets the markdown row.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid search over the two tabulated parameters of a stationary case.
    Sweep {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        method: String,
        /// First column range as lo:hi:count.
        #[arg(long)]
        col1: Option<String>,
        /// Second column range as lo:hi:count.
        #[arg(long)]
        col2: Option<String>,
        /// CSV of col1,col2 points, used instead of the ranges.
        #[arg(long)]
        grid_file: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral analysis of the iteration matrix (dense, l <= 12).
    Analyze {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        method: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every row of both benchmark tables and compare with the printed values.
    ReproduceTables {
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// Grid size of the Stokes benchmark.
    #[arg(long, required_unless_present = "input")]
    l: Option<usize>,
    /// Viscosity of the Stokes benchmark.
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    /// Directory written by `generate`, used instead of --l/--nu.
    #[arg(long, conflicts_with = "l")]
    input: Option<PathBuf>,
}

impl ProblemArgs {
    fn source(&self) -> ProblemSource {
        match (&self.input, self.l) {
            (Some(dir), _) => ProblemSource::Files(dir.clone()),
            (None, Some(l)) => ProblemSource::Stokes { l, nu: self.nu },
            (None, None) => unreachable!("clap enforces --l or --input"),
        }
    }
}

#[derive(Args)]
struct ParamArgs {
    /// GSTS: ω₂. GSOR: relaxation factor ω.
    #[arg(long, visible_alias = "omega")]
    omega2: Option<f64>,
    /// Explicit ω₁; defaults to τ.
    #[arg(long)]
    omega1: Option<f64>,
    /// GSTS: τ. GSOR: step ν_g.
    #[arg(long)]
    tau: Option<f64>,
    /// HSS shift; searched when absent.
    #[arg(long)]
    alpha: Option<f64>,
}

impl ParamArgs {
    fn params(&self) -> MethodParams {
        MethodParams {
            omega: self.omega2,
            omega1: self.omega1,
            tau: self.tau,
            alpha: self.alpha,
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    maxit: usize,
    /// GMRES restart length; unrestarted when absent.
    #[arg(long)]
    restart: Option<usize>,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            tolerance: self.tol,
            max_iterations: self.maxit,
            restart: self.restart,
            initial_guess: None,
        }
    }
}

fn stationary_case(tag: &str) -> Result<GstsCase> {
    match Method::from_tag(tag)? {
        Method::Stationary(c) => Ok(c),
        _ => Err(Error::InvalidParameter(format!(
            "'{tag}' is not a stationary GSTS/GSOR case"
        ))),
    }
}

fn parse_range(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidParameter(format!("range '{s}' must be lo:hi:count"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    Ok(SweepGrid::linspace(lo, hi, count))
}

fn append_row_files(path: &PathBuf, csv: &str, md: &str) -> Result<()> {
    use std::io::Write;
    let exists = path.exists() && fs::metadata(path)?.len() > 0;
    let body = if exists {
        csv.split_once('\n').map_or("", |(_, rest)| rest)
    } else {
        csv
    };
    fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?
        .write_all(body.as_bytes())?;
    let md_path = path.with_extension("md");
    let md_exists = md_path.exists() && fs::metadata(&md_path)?.len() > 0;
    let md_body = if md_exists {
        md.lines().skip(2).map(|l| format!("{l}\n")).collect()
    } else {
        md.to_string()
    };
    fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(md_path)?
        .write_all(md_body.as_bytes())?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Generate {
            l,
            nu,
            random,
            seed,
            out,
        } => {
            let files = match (l, random) {
                (Some(l), _) => cmd_generate(l, nu, &out)?,
                (None, Some(dims)) => {
                    let bad = || Error::InvalidParameter(format!("--random '{dims}' must be p,q,rank"));
                    let v: Vec<usize> = dims
                        .split(',')
                        .map(|t| t.trim().parse().map_err(|_| bad()))
                        .collect::<Result<_>>()?;
                    let [p, q, rank] = v[..] else { return Err(bad()) };
                    cmd_generate_random(p, q, rank, seed, &out)?
                }
                (None, None) => unreachable!("clap enforces --l or --random"),
            };
            for path in files {
                println!("{}", path.display());
            }
            Ok(true)
        }
        Command::Run {
            problem,
            method,
            params,
            solver,
            out,
        } => {
            let spec = ExperimentSpec {
                problem: problem.source(),
                method: Method::from_tag(&method)?,
                params: params.params(),
                solver: solver.config(),
            };
            let row = cmd_run(&spec)?;
            let rows = [row];
            let md = rows_to_markdown(&rows);
            print!("{md}");
            if let Some(path) = out {
                append_row_files(&path, &rows_to_csv(&rows)?, &md)?;
            }
            Ok(rows[0].converged())
        }
        Command::Sweep {
            problem,
            method,
            col1,
            col2,
            grid_file,
            solver,
            out,
        } => {
            let case = stationary_case(&method)?;
            let points = match (grid_file, col1, col2) {
                (Some(path), _, _) => read_grid_file(path)?,
                (None, Some(a), Some(b)) => {
                    SweepGrid::new(parse_range(&a)?, parse_range(&b)?).points()
                }
                _ => {
                    return Err(Error::InvalidParameter(
                        "sweep needs --grid-file or both --col1 and --col2".into(),
                    ))
                }
            };
            let result = cmd_sweep(&problem.source(), case, &points, &solver.config())?;
            let csv = sweep_csv(&result)?;
            match out {
                Some(path) => fs::write(path, &csv)?,
                None => print!("{csv}"),
            }
            let b = &result.best;
            eprintln!(
                "best: col1={} col2={} IT={} RES={:.4e}",
                b.col1, b.col2, b.iterations, b.final_residual
            );
            Ok(true)
        }
        Command::Analyze {
            problem,
            method,
            params,
            out,
        } => {
            let case = stationary_case(&method)?;
            let analysis = cmd_analyze(&problem.source(), case, &params.params())?;
            let text = render_analysis(&analysis);
            match out {
                Some(path) => fs::write(path, &text)?,
                None => print!("{text}"),
            }
            Ok(true)
        }
        Command::ReproduceTables { out } => {
            let rep = reproduce_tables()?;
            let files = write_reproduction(&rep, &out)?;
            print!("{}", render_diff(&rep));
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            Ok(rep.all_converged())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
