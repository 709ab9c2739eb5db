//! Command-line front end for `structlim`.

pub mod format;

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use structlim::limit::convergence_experiment;
use structlim::rational::{format_rational, to_f64};
use structlim::removal::{
    frontier, plant_toggles, removal_experiment, write_rows_csv, ExperimentConfig,
};
use structlim::structures::{density_p, density_t, density_t0, density_tind};
use structlim::{
    decode, distance_d, encode, greedy_removal, hyperpartition_from_seed, induced_density,
    sample_seed, sample_structure, ForbiddenFamily, SeedStream, StepLimit, Structure,
};
use thiserror::Error;

use crate::format::{
    parse_family, parse_limit, parse_structure, serialize_family, serialize_structure, FormatError,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
    #[error("{0}")]
    Core(#[from] structlim::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 for domain errors, 2 for malformed input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Format { .. } | CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_format() => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "structlim",
    version,
    about = "Finite structures, step limits and removal experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DensityKind {
    P,
    T,
    T0,
    Tind,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact density of M in N.
    Density {
        #[arg(long, value_enum)]
        kind: DensityKind,
        #[arg(short = 'M', long = "pattern")]
        m: PathBuf,
        #[arg(short = 'N', long = "host")]
        n: PathBuf,
    },
    /// Code a structure as a family of directed hypergraphs.
    Encode {
        #[arg(short = 'N', long = "host")]
        n: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode a family back to a structure.
    Decode {
        #[arg(short = 'D', long = "family")]
        d: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample N(F, m) from a step limit.
    Sample {
        #[arg(long)]
        limit: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coded edit distance between two structures on the same universe.
    Dist {
        #[arg(short = 'M', long = "first")]
        m: PathBuf,
        #[arg(short = 'N', long = "second")]
        n: PathBuf,
    },
    /// Exact probability that N(F, ‖M‖) is isomorphic to M.
    LimitDensity {
        #[arg(long)]
        limit: PathBuf,
        #[arg(short = 'M', long = "pattern")]
        m: PathBuf,
    },
    /// Sampled induced densities against their exact limits, as CSV.
    Converge {
        #[arg(long)]
        limit: PathBuf,
        /// Largest type size compared.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Universe sizes to sample.
        #[arg(long, value_delimiter = ',', default_value = "4,9,16")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 300)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Equitability gap of the hyperpartition coloured by a random seed.
    Hpcheck {
        /// Ground set size.
        #[arg(long)]
        n: usize,
        /// Number of levels t.
        #[arg(long, default_value_t = 2)]
        levels: usize,
        /// Number of colours l.
        #[arg(long, default_value_t = 2)]
        l: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Greedily repair a structure until no forbidden pattern occurs.
    Remove {
        #[arg(short = 'N', long = "host")]
        n: PathBuf,
        #[arg(long = "forbid", required = true)]
        forbid: Vec<PathBuf>,
        #[arg(long, default_value_t = usize::MAX)]
        cap: usize,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeated repair experiments, one CSV row per trial.
    RemovalExp {
        #[arg(long = "forbid")]
        forbid: Vec<PathBuf>,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = usize::MAX)]
        cap: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample trial structures from this limit ...
        #[arg(long, conflicts_with = "base", requires = "m")]
        limit: Option<PathBuf>,
        #[arg(long)]
        m: Option<usize>,
        /// ... or perturb this structure by `--toggles` random tuples.
        #[arg(long, requires = "toggles")]
        base: Option<PathBuf>,
        #[arg(long)]
        toggles: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load<T>(path: &Path, parse: impl Fn(&str) -> std::result::Result<T, FormatError>) -> Result<T> {
    parse(&read(path)?).map_err(|source| CliError::Format {
        path: path.display().to_string(),
        source,
    })
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn family_from(paths: &[PathBuf]) -> Result<ForbiddenFamily> {
    let members = paths
        .iter()
        .map(|p| load(p, parse_structure))
        .collect::<Result<Vec<_>>>()?;
    Ok(ForbiddenFamily::new(members)?)
}

/// One-line description of a small structure for CSV cells.
fn describe(s: &Structure) -> String {
    let mut out = format!("size {}", s.size());
    for (i, t) in s.tuples() {
        out.push_str("; ");
        out.push_str(s.signature().name(i));
        for v in t {
            write!(out, " {v}").unwrap();
        }
    }
    out
}

/// Runs one parsed command. Primary output goes to `stdout` (or `--out`),
/// summaries to `stderr`.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let line = |w: &mut dyn Write, s: String| -> Result<()> {
        writeln!(w, "{s}").map_err(|source| CliError::Io {
            path: "<output>".into(),
            source,
        })
    };
    match cli.command {
        Command::Density { kind, m, n } => {
            let (m, n) = (load(&m, parse_structure)?, load(&n, parse_structure)?);
            let d = match kind {
                DensityKind::P => density_p(&m, &n)?,
                DensityKind::T => density_t(&m, &n)?,
                DensityKind::T0 => density_t0(&m, &n)?,
                DensityKind::Tind => density_tind(&m, &n)?,
            };
            line(stdout, d.to_string())
        }
        Command::Encode { n, out } => {
            let n = load(&n, parse_structure)?;
            emit(&serialize_family(&encode(&n)), out.as_deref(), stdout)
        }
        Command::Decode { d, out } => {
            let d = load(&d, parse_family)?;
            emit(&serialize_structure(&decode(&d)), out.as_deref(), stdout)
        }
        Command::Sample {
            limit,
            m,
            seed,
            out,
        } => {
            let f = load(&limit, parse_limit)?;
            let s = sample_structure(&f, m, &SeedStream::new(seed))?;
            emit(&serialize_structure(&s), out.as_deref(), stdout)
        }
        Command::Dist { m, n } => {
            let (m, n) = (load(&m, parse_structure)?, load(&n, parse_structure)?);
            line(stdout, format_rational(distance_d(&m, &n)?))
        }
        Command::LimitDensity { limit, m } => {
            let f = load(&limit, parse_limit)?;
            let m = load(&m, parse_structure)?;
            line(stdout, induced_density(&m, &f)?.to_string())
        }
        Command::Converge {
            limit,
            k,
            sizes,
            trials,
            seed,
            out,
        } => {
            let f = load(&limit, parse_limit)?;
            let report = convergence_experiment(&f, k, &sizes, trials, &SeedStream::new(seed))?;
            let mut csv = String::from(
                "m,samples,type,pattern,exact_num,exact_den,mean_p,mean_abs_dev,aggregate_dev\n",
            );
            for row in &report.rows {
                for (j, t) in report.types.iter().enumerate() {
                    writeln!(
                        csv,
                        "{},{},{},{},{},{},{:.6},{:.6},{:.6}",
                        row.m,
                        row.samples,
                        j,
                        describe(t),
                        report.exact[j].numer(),
                        report.exact[j].denom(),
                        row.mean_p[j],
                        row.mean_abs_dev[j],
                        row.aggregate_deviation
                    )
                    .unwrap();
                }
                line(
                    stderr,
                    format!(
                        "m={} samples={} aggregate_dev={:.6}",
                        row.m, row.samples, row.aggregate_deviation
                    ),
                )?;
            }
            emit(&csv, out.as_deref(), stdout)
        }
        Command::Hpcheck { n, levels, l, seed } => {
            let y = sample_seed(n, levels, &SeedStream::new(seed))?;
            let h = hyperpartition_from_seed(&y, l)?;
            let delta = h.equitability_delta();
            line(
                stdout,
                format!("{} {:.6}", format_rational(delta), to_f64(delta)),
            )
        }
        Command::Remove {
            n,
            forbid,
            cap,
            budget,
            out,
        } => {
            let n = load(&n, parse_structure)?;
            let family = family_from(&forbid)?;
            let (repaired, report) = greedy_removal(&n, &family, cap, budget)?;
            let summary = format!(
                "success={} iterations={} d={} ({:.6})",
                report.success,
                report.iterations,
                format_rational(report.distance),
                to_f64(report.distance)
            );
            let text = serialize_structure(&repaired);
            match out {
                Some(p) => {
                    emit(&text, Some(&p), stdout)?;
                    line(stdout, summary)
                }
                None => {
                    emit(&text, None, stdout)?;
                    line(stderr, summary)
                }
            }
        }
        Command::RemovalExp {
            forbid,
            eps,
            cap,
            trials,
            budget,
            seed,
            limit,
            m,
            base,
            toggles,
            out,
        } => {
            let family = if forbid.is_empty() {
                ForbiddenFamily::empty()
            } else {
                family_from(&forbid)?
            };
            let config = ExperimentConfig {
                epsilon: eps,
                cap,
                trials,
                budget,
            };
            let stream = SeedStream::new(seed);
            let rows = match (limit, base) {
                (Some(limit), None) => {
                    let f: StepLimit = load(&limit, parse_limit)?;
                    let m = m.expect("clap enforces --m with --limit");
                    removal_experiment(
                        &family,
                        &config,
                        |_, s| sample_structure(&f, m, s),
                        &stream,
                    )?
                }
                (None, Some(base)) => {
                    let base = load(&base, parse_structure)?;
                    let k = toggles.expect("clap enforces --toggles with --base");
                    removal_experiment(
                        &family,
                        &config,
                        |_, s| {
                            let mut n = base.clone();
                            plant_toggles(&mut n, k, s)?;
                            Ok(n)
                        },
                        &stream,
                    )?
                }
                _ => {
                    return Err(CliError::Usage(
                        "give either --limit with --m or --base with --toggles".into(),
                    ))
                }
            };
            let mut buf = Vec::new();
            write_rows_csv(&rows, &mut buf)?;
            emit(&String::from_utf8_lossy(&buf), out.as_deref(), stdout)?;
            for point in frontier(&rows) {
                line(
                    stderr,
                    format!(
                        "density<={} trials={} success_rate={:.3}",
                        format_rational(point.threshold),
                        point.trials,
                        point.success_rate
                    ),
                )?;
            }
            Ok(())
        }
    }
}
