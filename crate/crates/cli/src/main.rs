//! `bendlab`: bend, approximate and test laminations from JSON input files.
//!
//! Exit status is 0 when the checked property holds, 1 when it fails and 2
//! on unreadable input or out-of-range flags. Reports go to `--out`, else to
//! `$BENDLAB_REPORT_DIR/<command>.json` (`.csv` for `fold`), else to stdout.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bendlab::pleat::BendSide;
use bendlab::tolerance::{DEFAULT_DELTA, DEFAULT_EPSILON, DEFAULT_TAIL, DEFAULT_TOL, DEFAULT_WINDOW};

use commands::{out_path, Format, Verdict};

#[derive(Parser)]
#[command(name = "bendlab", version, about = "Bending of H² along finite measured laminations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Side {
    Plus,
    Minus,
}

impl From<Side> for BendSide {
    fn from(s: Side) -> Self {
        match s {
            Side::Plus => BendSide::Plus,
            Side::Minus => BendSide::Minus,
        }
    }
}

#[derive(clap::Args)]
struct SurfaceArgs {
    /// Lamination file: a list of `{id, theta1, theta2, weight}` records.
    #[arg(long)]
    lamination: PathBuf,
    #[arg(long, value_enum, default_value = "plus")]
    side: Side,
}

#[derive(Subcommand)]
enum Command {
    /// Bending measure of each arc.
    Bend {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// Arc file: a list of `{from, to}` records, polar `[r, φ]` or
        /// hyperboloid `[t, x, y, z]`.
        #[arg(long)]
        arcs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// (δ, ε)-approximation of each arc and its angle-sum report.
    Approx {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long)]
        arcs: PathBuf,
        /// Largest angle between consecutive planes (also α of the report).
        #[arg(long, visible_alias = "alpha", default_value_t = DEFAULT_DELTA, allow_negative_numbers = true)]
        delta: f64,
        /// Largest sample spacing, below (log 3)/2 (also s of the report).
        #[arg(long, visible_alias = "s", default_value_t = DEFAULT_EPSILON, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sampled points of the bent surface as CSV.
    Fold {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        radius: f64,
        #[arg(long, default_value_t = 10)]
        rings: usize,
        #[arg(long, default_value_t = 36)]
        spokes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convex or even limit of a family of bending data.
    Dichotomy {
        /// Family file: leaves with weight paths, index range and side.
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        arcs: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TAIL)]
        tail: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Length of a closed curve against the length of its bent holonomy.
    Quasigeo {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Whether two abstract laminations agree after truncation at π.
    RqCompare {
        a: PathBuf,
        b: PathBuf,
        /// Test arcs, each a list of `[id, multiplicity]`; defaults to one
        /// single-crossing arc per leaf id.
        #[arg(long)]
        pool: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence of a sequence of abstract laminations in the quotient.
    RqConverge {
        /// `{sequence: [...], candidate: ...}`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        pool: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_TAIL)]
        tail: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Switch conditions, carried intersections and branch convergence.
    TtCheck {
        /// `{track, measures, subtrack?, limit?, excluded?}`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_TAIL)]
        tail: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<Verdict> {
    match cli.command {
        Command::Bend { surface, arcs, out } => {
            commands::bend(&surface.lamination, surface.side.into(), &arcs, out_path(&out))
        }
        Command::Approx { surface, arcs, delta, epsilon, format, out } => commands::approx(
            &surface.lamination,
            surface.side.into(),
            &arcs,
            delta,
            epsilon,
            format,
            out_path(&out),
        ),
        Command::Fold { surface, radius, rings, spokes, out } => {
            commands::fold(&surface.lamination, surface.side.into(), radius, rings, spokes, out_path(&out))
        }
        Command::Dichotomy { family, arcs, tail, tol, out } => {
            commands::dichotomy(&family, arcs.as_deref(), tail, tol, out_path(&out))
        }
        Command::Quasigeo { input, out } => commands::quasigeo(&input, out_path(&out)),
        Command::RqCompare { a, b, pool, out } => commands::rq_compare(&a, &b, pool.as_deref(), out_path(&out)),
        Command::RqConverge { input, pool, tol, tail, out } => {
            commands::rq_converge(&input, pool.as_deref(), tol, tail, out_path(&out))
        }
        Command::TtCheck { input, tol, tail, out } => commands::tt_check(&input, tol, tail, out_path(&out)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Violation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
