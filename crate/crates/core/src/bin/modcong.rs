use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use modcong::congruence::{congruence_primes, sturm_bound, theorem_report, FormSource};
use modcong::modsym::Eigenform;
use modcong::pipeline::{
    default_cache_root, emit_table, parse_table, scan, verify_table, CachedSource, EigenStore, EigenformRecord,
    EllChoice, RatioShape, ScanConfig, TableFormat,
};
use modcong::{Error, Result};

#[derive(Parser)]
#[command(name = "modcong", version, about = "Newforms of weight 2 and congruences between them")]
struct Cli {
    /// Eigenvalue cache root (default: $MODCONG_CACHE or ./eigcache).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decompose the new subspace of level N and print each class.
    Newforms {
        level: u64,
        /// Print a_q for q up to B (default: the Sturm bound).
        #[arg(long)]
        bound: Option<u64>,
        /// Also write `.eig` records under DIR.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Full congruence report for f = Nf.if against g = Ng.jg.
    Congruence {
        nf: u64,
        i: usize,
        ng: u64,
        j: usize,
        /// Prime ℓ (default: every congruence prime of the pair).
        #[arg(long)]
        ell: Option<u64>,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Odd primes ℓ ∤ N_f modulo which the pair is congruent.
    Congprimes {
        nf: u64,
        i: usize,
        ng: u64,
        j: usize,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Search N_f in [min, max] for pairs satisfying the theorem.
    Scan {
        #[arg(long)]
        min: u64,
        #[arg(long)]
        max: u64,
        /// Comma-separated subset of p, p2, p3.
        #[arg(long, default_value = "p,p2", value_delimiter = ',')]
        ratios: Vec<RatioShape>,
        /// Comma-separated primes ℓ (default: congruence primes of each pair).
        #[arg(long, value_delimiter = ',')]
        ells: Option<Vec<u64>>,
        #[arg(long)]
        bound: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "text")]
        format: TableFormat,
    },
    /// Recompute the rows of a table written by `scan`.
    VerifyTable {
        path: PathBuf,
        #[arg(long)]
        bound: Option<u64>,
    },
}

fn class(src: &dyn FormSource, level: u64, index: usize) -> Result<std::sync::Arc<dyn Eigenform>> {
    let v = src.classes(level)?;
    if index == 0 || index > v.len() {
        return Err(Error::Precondition(format!("level {level} has {} classes, no index {index}", v.len())));
    }
    Ok(v[index - 1].clone())
}

fn run(cli: Cli) -> Result<()> {
    let src = CachedSource::new(EigenStore::new(cli.cache.unwrap_or_else(default_cache_root)));
    let mut out = io::stdout().lock();
    match cli.cmd {
        Cmd::Newforms { level, bound, save } => {
            let b = bound.unwrap_or_else(|| sturm_bound(level));
            let classes = src.classes(level)?;
            writeln!(out, "level {level}: {} classes", classes.len())?;
            for c in &classes {
                let r = EigenformRecord::from_form(c.as_ref(), b)?;
                writeln!(out, "{level}.{} degree {} field {}", c.index(), c.field().degree(), c.field().min_poly())?;
                for q in r.eigenvalues.keys() {
                    writeln!(out, "  a_{q} = {}", c.eigenvalue(*q)?)?;
                }
                if let Some(dir) = &save {
                    EigenStore::new(dir).save(&r)?;
                }
            }
            if let Some(dir) = &save {
                EigenStore::new(dir).set_class_count(level, classes.len())?;
            }
        }
        Cmd::Congruence { nf, i, ng, j, ell, bound } => {
            let (f, g) = (class(&src, nf, i)?, class(&src, ng, j)?);
            let ells = match ell {
                Some(l) => vec![l],
                None => congruence_primes(f.as_ref(), g.as_ref(), bound)?.into_iter().map(|(l, _)| l).collect(),
            };
            if ells.is_empty() {
                writeln!(out, "no odd congruence primes")?;
            }
            for l in ells {
                write!(out, "{}", theorem_report(f.as_ref(), g.as_ref(), l, &src, bound)?)?;
            }
        }
        Cmd::Congprimes { nf, i, ng, j, bound } => {
            let (f, g) = (class(&src, nf, i)?, class(&src, ng, j)?);
            for (l, v) in congruence_primes(f.as_ref(), g.as_ref(), bound)? {
                writeln!(out, "{l} {v}")?;
            }
        }
        Cmd::Scan { min, max, ratios, ells, bound, jobs, out: path, format } => {
            let cfg = ScanConfig {
                min_level: min,
                max_level: max,
                ratios,
                ells: ells.map_or(EllChoice::Auto, EllChoice::Explicit),
                bound,
                jobs,
                out: path.clone(),
            };
            let rows = scan(&cfg, &src)?;
            match path {
                Some(p) => {
                    let mut buf = Vec::new();
                    emit_table(&rows, format, &mut buf)?;
                    fs::write(p, buf)?;
                }
                None => emit_table(&rows, format, &mut out)?,
            }
        }
        Cmd::VerifyTable { path, bound } => {
            let rows = parse_table(&mut fs::File::open(&path)?)?;
            let bad = verify_table(&rows, &src, bound)?;
            for b in &bad {
                writeln!(out, "{b}")?;
            }
            writeln!(out, "{} rows checked, {} discrepancies", rows.len(), bad.len())?;
            if !bad.is_empty() {
                src.flush()?;
                return Err(Error::Computation(format!("{} rows disagree", bad.len())));
            }
        }
    }
    src.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Precondition(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
