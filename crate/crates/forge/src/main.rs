use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cocycle_core::io::{cocycle_from_json, cocycle_to_json, to_json};
use cocycle_core::{check_domination, finest_splitting, lyapunov_graph, CyclicCocycle, LyapunovGraph, PeriodicSchur};
use cocycle_forge::suite::{run_suite, SuiteName};
use cocycle_forge::{generate, ForgeError, GeneratorSpec, Kind, Result};
use cocycle_majorization::zigzag_path;
use cocycle_perturb::{
    make_eigenvalues_real, mix_two_exponents, raise_graph, realize_graph, separate_exponents, PerturbationPath,
    RaiseOptions, RealizeOptions, SeparateOptions, ZScoreTable,
};
use serde_json::json;

/// Perturbation paths and Lyapunov graphs of cyclic linear cocycles.
///
/// Exit status: 0 on success, 1 when a check or construction fails,
/// 2 on unreadable input or invalid arguments. COCYCLE_FORGE_THREADS caps
/// the number of worker threads.
#[derive(Parser)]
#[command(name = "cocycle-forge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded cocycle.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        period: usize,
        /// Bound K on ‖A‖ and 1/𝔪(A).
        #[arg(long)]
        bound: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cocycle JSON; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Metadata JSON (graph, spectrum type, domination certificate).
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Print the Lyapunov graph and spectral summary of a cocycle.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Report the finest ℓ-dominated splitting and the per-index ratios.
    Dominate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        ell: usize,
    },
    /// Plan a zigzag path of single-coordinate moves between two graphs.
    Zigzag {
        /// Source graph JSON.
        #[arg(long)]
        src: PathBuf,
        /// Destination graph JSON, majorizing the source.
        #[arg(long)]
        dst: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long)]
        preserve_index: bool,
        /// Plan CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mix exponents i and i+1 into a single value.
    Mix {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        index: usize,
        #[arg(long)]
        eps: f64,
        /// Path CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Raise the Lyapunov graph to a majorizing target.
    Raise {
        #[arg(long = "in")]
        input: PathBuf,
        /// Target graph JSON.
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Keep the finest splitting at this scale pinned.
        #[arg(long)]
        respect_finest: Option<usize>,
        #[arg(long)]
        preserve_index: bool,
        /// Path CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Remove complex eigenvalue pairs of the period product.
    Realify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Path CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Separate exponents at scale m by inserting small rotations.
    Separate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        scale: usize,
        #[arg(long)]
        eps: f64,
        /// Perturbed cocycle JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Z-score table CSV.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Lower and then raise the graph to a target below the finest splitting's graph.
    Realize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        scale: usize,
        #[arg(long)]
        eps: f64,
        /// Perturbed cocycle JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteName,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        /// Report JSON; stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| ForgeError::Input(format!("{}: {e}", path.display())))
}

fn read_cocycle(path: &Path) -> Result<CyclicCocycle> {
    Ok(cocycle_from_json(&read(path)?)?)
}

fn read_graph(path: &Path) -> Result<LyapunovGraph> {
    serde_json::from_str(&read(path)?).map_err(|e| ForgeError::Input(format!("{}: {e}", path.display())))
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn write_path_csv(path: Option<&Path>, p: &PerturbationPath) -> Result<()> {
    if let Some(path) = path {
        p.write_csv(BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

fn path_summary(p: &PerturbationPath) -> Result<String> {
    let a = p.audit();
    Ok(to_json(&json!({
        "samples": p.len(),
        "max_deviation": a.max_deviation,
        "max_step": a.max_step,
        "top_drift": a.top_drift,
        "worst_decrease": a.worst_decrease,
        "end_graph": p.end_graph(),
    }))?)
}

fn write_z_csv(path: &Path, t: &ZScoreTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let d = t.dim();
    let mut header = vec!["phase".to_string()];
    header.extend((1..=d).map(|i| format!("Z_{i}")));
    w.write_record(&header).map_err(csv_error)?;
    for (y, row) in t.rows.iter().enumerate() {
        let mut rec = vec![y.to_string()];
        rec.extend(row.iter().map(|z| cocycle_core::io::format_float(*z)));
        w.write_record(&rec).map_err(csv_error)?;
    }
    let mut rec = vec!["mean".to_string()];
    rec.extend(t.finite.iter().map(|z| cocycle_core::io::format_float(*z)));
    w.write_record(&rec).map_err(csv_error)?;
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> ForgeError {
    ForgeError::Io(std::io::Error::other(e))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { kind, dim, period, bound, seed, out, meta } => {
            let g = generate(&GeneratorSpec { kind, dim, period, bound, seed })?;
            write_text(out.as_deref(), &cocycle_to_json(&g.cocycle)?)?;
            if let Some(m) = meta {
                fs::write(m, to_json(&g.metadata)? + "\n")?;
            }
        }
        Command::Analyze { input } => {
            let c = read_cocycle(&input)?;
            let g = lyapunov_graph(&c)?;
            let summary = json!({
                "dim": c.dim(),
                "period": c.period(),
                "bound": c.bound(),
                "exponents": g.exponents(),
                "graph": g,
                "real_spectrum": PeriodicSchur::new(&c)?.is_real(),
            });
            println!("{}", to_json(&summary)?);
        }
        Command::Dominate { input, ell } => {
            let c = read_cocycle(&input)?;
            let reports =
                (1..c.dim()).map(|i| check_domination(&c, i, ell)).collect::<cocycle_core::Result<Vec<_>>>()?;
            let s = finest_splitting(&c, ell)?;
            println!("{}", to_json(&json!({ "ell": ell, "finest": s.indices, "reports": reports }))?);
        }
        Command::Zigzag { src, dst, delta, preserve_index, out } => {
            let plan = zigzag_path(&read_graph(&src)?, &read_graph(&dst)?, delta, preserve_index)?;
            match out {
                Some(p) => plan.write_csv(BufWriter::new(File::create(p)?))?,
                None => plan.write_csv(std::io::stdout().lock())?,
            }
        }
        Command::Mix { input, index, eps, out } => {
            let p = mix_two_exponents(&read_cocycle(&input)?, index, eps)?;
            write_path_csv(out.as_deref(), &p)?;
            println!("{}", path_summary(&p)?);
        }
        Command::Raise { input, target, eps, respect_finest, preserve_index, out } => {
            let opts = RaiseOptions { respect_finest, preserve_index, ..RaiseOptions::default() };
            let p = raise_graph(&read_cocycle(&input)?, &read_graph(&target)?, eps, &opts)?;
            write_path_csv(out.as_deref(), &p)?;
            println!("{}", path_summary(&p)?);
        }
        Command::Realify { input, eps, out } => {
            let p = make_eigenvalues_real(&read_cocycle(&input)?, eps)?;
            write_path_csv(out.as_deref(), &p)?;
            println!("{}", path_summary(&p)?);
        }
        Command::Separate { input, scale, eps, out, report } => {
            let c = read_cocycle(&input)?;
            let s = separate_exponents(&c, scale, eps, &SeparateOptions::default())?;
            if let Some(p) = out {
                fs::write(p, cocycle_to_json(&s.cocycle)? + "\n")?;
            }
            if let Some(p) = report {
                write_z_csv(&p, &s.table)?;
            }
            let summary = json!({
                "good_phase": s.good_phase,
                "phases": s.phases,
                "rotation_norms": s.rotation_norms,
                "alphas": s.alphas,
                "c_emp": s.c_emp,
                "slack_emp": s.slack_emp,
                "achieved": s.achieved,
                "graph": lyapunov_graph(&s.cocycle)?,
            });
            println!("{}", to_json(&summary)?);
        }
        Command::Realize { input, target, scale, eps, out } => {
            let c = read_cocycle(&input)?;
            let r = realize_graph(&c, &read_graph(&target)?, scale, eps, &RealizeOptions::default())?;
            if let Some(p) = out {
                fs::write(p, cocycle_to_json(&r.cocycle)? + "\n")?;
            }
            println!("{}", path_summary(&r.path)?);
        }
        Command::Verify { suite, seeds, report } => {
            let r = run_suite(suite, seeds)?;
            write_text(report.as_deref(), &to_json(&r)?)?;
            if !r.passed {
                let failing: Vec<String> = r
                    .checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| match c.failing_seed {
                        Some(s) => format!("{} (seed {s})", c.name),
                        None => c.name.clone(),
                    })
                    .collect();
                return Err(ForgeError::Check(failing.join("; ")));
            }
        }
    }
    Ok(())
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("COCYCLE_FORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ForgeError::Input(format!("COCYCLE_FORGE_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| ForgeError::Input(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
