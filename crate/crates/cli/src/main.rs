use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kovalenko::degree::DistributionConfig;
use kovalenko::gf2::DEFAULT_SYMBOL_BITS;
use kovalenko::harness::{self, FamilyKind, SweepReport};
use kovalenko::ldpc::LdpcConfig;
use kovalenko::par::with_workers;

mod config;
mod grid;
mod svg;
mod tables;
mod verify;

use config::{resolve_dist, FamilySpec, MatrixSource, Preset, RunRecord, SweepConfig};

#[derive(Parser)]
#[command(
    name = "kovalenko",
    version,
    about = "Rank-deficiency bounds and ML erasure-decoding sweeps"
)]
struct Cli {
    /// Worker threads for Monte-Carlo trials. Results do not depend on it.
    #[arg(long, global = true, env = "KOVALENKO_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the full-rank limit K(1 + k/n, n) with overhead markers.
    Kfrl {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k_max: usize,
        /// Error bounds to mark (repeatable).
        #[arg(long = "delta")]
        deltas: Vec<f64>,
        #[command(flatten)]
        out: TableOut,
    },
    /// Exact rank distribution of a uniform (n+k) × n matrix.
    Rankdist {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
        #[command(flatten)]
        out: TableOut,
    },
    /// DEP sweep over extra received rows for an LT code.
    SweepLt {
        /// `mu`, `mu_bar` or a TOML degree table.
        #[arg(long)]
        dist: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        /// Extra rows: `0..30`, `0..30:2` or `0,5,10`.
        #[arg(long)]
        k: Option<String>,
        #[command(flatten)]
        common: SweepArgs,
    },
    /// DEP sweep over erasure rates for an LDPC code.
    SweepLdpc {
        /// Check matrix in text form.
        #[arg(long, conflicts_with = "preset")]
        matrix: Option<PathBuf>,
        /// Build a table matrix instead of loading one.
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long, default_value_t = 1)]
        matrix_seed: u64,
        /// Erasure rates: `0.30..0.50` or `0.3,0.35`.
        #[arg(long)]
        p: Option<String>,
        #[arg(long, default_value_t = 0.01)]
        p_step: f64,
        #[command(flatten)]
        common: SweepArgs,
    },
    /// DEP sweep for uniformly random matrices.
    SweepDense {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<String>,
        #[command(flatten)]
        common: SweepArgs,
    },
    /// Check the full-rank limit against sweep results. Exits 1 on any
    /// significant violation.
    Verify {
        /// Sweep outputs (CSV or JSON). Without inputs or a config, runs a
        /// dense self-test.
        #[arg(long = "input")]
        inputs: Vec<PathBuf>,
        /// Sweep configuration to run and verify.
        #[arg(long, conflicts_with = "inputs")]
        config: Option<PathBuf>,
        #[arg(long = "delta", default_values_t = [1e-4])]
        deltas: Vec<f64>,
        /// Trials per point for the self-test.
        #[arg(long, default_value = "1e4", value_parser = grid::parse_count)]
        trials: u64,
        /// Verdict as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a check matrix and write it in text form.
    BuildLdpc {
        #[arg(long, value_enum, default_value = "m-bar")]
        preset: Preset,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Override the preset with a column-degree table (TOML).
        #[arg(long)]
        col_dist: Option<PathBuf>,
        #[arg(long)]
        checks: Option<usize>,
        #[arg(long)]
        length: Option<usize>,
        #[arg(long)]
        dense_rows: Option<usize>,
        #[arg(long)]
        dense_degree: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run a sweep from the configuration embedded in its output.
    Replay {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Compare against the input instead of writing; exit 1 on mismatch.
        #[arg(long)]
        check: bool,
    },
    /// Overlay DEP curves from sweep CSVs, with the full-rank limit of the first.
    Plot {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct TableOut {
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep configuration (TOML); flags given alongside override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = grid::parse_count)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    symbol_bits: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render the CSV rows as an SVG chart.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn format_for(explicit: Option<Format>, out: Option<&Path>) -> Format {
    explicit.unwrap_or(
        match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Csv,
        },
    )
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => Ok(std::io::stdout().lock().write_all(bytes)?),
    }
}

const DEFAULT_TRIALS: u64 = 100_000;
const DEFAULT_SEED: u64 = 1;

fn base_config(
    common: &SweepArgs,
    fallback: impl FnOnce() -> Result<SweepConfig>,
) -> Result<SweepConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => fallback()?,
    };
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(bits) = common.symbol_bits {
        match &mut cfg.family {
            FamilySpec::Lt { symbol_bits, .. }
            | FamilySpec::Ldpc { symbol_bits, .. }
            | FamilySpec::Dense { symbol_bits, .. } => *symbol_bits = bits,
        }
    }
    Ok(cfg)
}

fn run_sweep(record: &RunRecord, threads: Option<usize>) -> Result<Vec<SweepReport>> {
    let cfg = &record.sweep;
    ensure!(!cfg.grid.is_empty(), "sweep grid is empty");
    ensure!(cfg.trials >= 1, "trials must be at least 1");
    let family = cfg.family.build()?;
    Ok(with_workers(threads, || {
        harness::sweep(&family, &cfg.grid, cfg.trials, cfg.seed)
    })?)
}

fn render_output(record: &RunRecord, reports: &[SweepReport], format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => harness::write_csv(&mut buf, &record.header_lines()?, reports)?,
        Format::Json => harness::write_json(&mut buf, record, reports)?,
    }
    Ok(buf)
}

fn chart(sets: &[(String, Vec<SweepReport>)]) -> String {
    let mut series = Vec::new();
    let mut x_label = "k";
    for (label, reps) in sets {
        if reps.first().is_some_and(|r| r.family == FamilyKind::Ldpc) {
            x_label = "p";
        }
        series.push(svg::Series {
            label: label.clone(),
            points: reps.iter().map(|r| (r.k_or_p, r.dep_hat)).collect(),
            dashed: false,
        });
    }
    if let Some((_, reps)) = sets.first() {
        series.push(svg::Series {
            label: "KFRL".into(),
            points: reps.iter().map(|r| (r.k_or_p, r.kfrl)).collect(),
            dashed: true,
        });
    }
    svg::render(&series, x_label, "DEP")
}

fn sweep_command(record: RunRecord, common: &SweepArgs, threads: Option<usize>) -> Result<()> {
    let reports = run_sweep(&record, threads)?;
    let format = format_for(common.format, common.out.as_deref());
    emit(
        common.out.as_deref(),
        &render_output(&record, &reports, format)?,
    )?;
    if let Some(path) = &common.svg {
        // The chart is drawn from the CSV rows as written.
        let csv = render_output(&record, &reports, Format::Csv)?;
        let (_, rows) = harness::read_csv(csv.as_slice())?;
        fs::write(path, chart(&[(record.command.clone(), rows)]))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn read_reports(path: &Path) -> Result<(RunRecord, Vec<SweepReport>)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        let doc: harness::SweepDocument<RunRecord> = harness::read_json(bytes.as_slice())?;
        Ok((doc.config, doc.reports))
    } else {
        let (header, reports) = harness::read_csv(bytes.as_slice())?;
        Ok((RunRecord::from_header_lines(&header)?, reports))
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let threads = cli.threads;
    match cli.command {
        Command::Kfrl {
            n,
            k_max,
            deltas,
            out,
        } => {
            ensure!(k_max <= n, "--k-max must not exceed --n");
            let table = tables::kfrl_table(n, k_max, &deltas)?;
            let bytes = match format_for(out.format, out.out.as_deref()) {
                Format::Csv => table.to_csv().into_bytes(),
                Format::Json => serde_json::to_vec_pretty(&table)?,
            };
            emit(out.out.as_deref(), &bytes)?;
        }
        Command::Rankdist { n, k, out } => {
            ensure!(n as i64 + k >= 0, "n + k must be non-negative");
            let table = tables::rank_table(n, k);
            let bytes = match format_for(out.format, out.out.as_deref()) {
                Format::Csv => table.to_csv().into_bytes(),
                Format::Json => serde_json::to_vec_pretty(&table)?,
            };
            emit(out.out.as_deref(), &bytes)?;
        }
        Command::SweepLt { dist, n, k, common } => {
            let mut cfg = base_config(&common, || {
                Ok(SweepConfig {
                    family: FamilySpec::Lt {
                        n: 100,
                        symbol_bits: DEFAULT_SYMBOL_BITS,
                        dist: resolve_dist("mu_bar")?,
                    },
                    grid: (0..=30).collect(),
                    trials: DEFAULT_TRIALS,
                    seed: DEFAULT_SEED,
                })
            })?;
            let FamilySpec::Lt {
                n: cfg_n,
                dist: cfg_dist,
                ..
            } = &mut cfg.family
            else {
                bail!("configuration is not an LT sweep");
            };
            if let Some(n) = n {
                *cfg_n = n;
            }
            if let Some(d) = dist {
                *cfg_dist = resolve_dist(&d)?;
            }
            if let Some(k) = k {
                cfg.grid = grid::parse_int_grid(&k)?;
            }
            let record = RunRecord {
                command: "sweep-lt".into(),
                sweep: cfg,
            };
            sweep_command(record, &common, threads)?;
        }
        Command::SweepLdpc {
            matrix,
            preset,
            matrix_seed,
            p,
            p_step,
            common,
        } => {
            let mut cfg = base_config(&common, || {
                Ok(SweepConfig {
                    family: FamilySpec::Ldpc {
                        symbol_bits: DEFAULT_SYMBOL_BITS,
                        matrix: MatrixSource::Preset {
                            preset: Preset::MBar,
                            seed: 1,
                        },
                    },
                    grid: (30..=50).map(|i| 2 * i).collect(),
                    trials: DEFAULT_TRIALS,
                    seed: DEFAULT_SEED,
                })
            })?;
            let FamilySpec::Ldpc { matrix: source, .. } = &mut cfg.family else {
                bail!("configuration is not an LDPC sweep");
            };
            if let Some(path) = matrix {
                *source = MatrixSource::File { path };
            } else if let Some(preset) = preset {
                *source = MatrixSource::Preset {
                    preset,
                    seed: matrix_seed,
                };
            }
            if let Some(p) = p {
                let length = source.load()?.length();
                cfg.grid = grid::parse_p_grid(&p, p_step, length)?;
            }
            let record = RunRecord {
                command: "sweep-ldpc".into(),
                sweep: cfg,
            };
            sweep_command(record, &common, threads)?;
        }
        Command::SweepDense { n, k, common } => {
            let mut cfg = base_config(&common, || {
                Ok(SweepConfig {
                    family: FamilySpec::Dense {
                        n: 100,
                        symbol_bits: DEFAULT_SYMBOL_BITS,
                    },
                    grid: (0..=20).collect(),
                    trials: DEFAULT_TRIALS,
                    seed: DEFAULT_SEED,
                })
            })?;
            let FamilySpec::Dense { n: cfg_n, .. } = &mut cfg.family else {
                bail!("configuration is not a dense sweep");
            };
            if let Some(n) = n {
                *cfg_n = n;
            }
            if let Some(k) = k {
                cfg.grid = grid::parse_int_grid(&k)?;
            }
            let record = RunRecord {
                command: "sweep-dense".into(),
                sweep: cfg,
            };
            sweep_command(record, &common, threads)?;
        }
        Command::Verify {
            inputs,
            config,
            deltas,
            trials,
            out,
        } => {
            let mut sets = Vec::new();
            for path in &inputs {
                let (_, reports) = read_reports(path)?;
                sets.push((path.display().to_string(), reports));
            }
            if inputs.is_empty() {
                let sweep = match config {
                    Some(path) => {
                        let text = fs::read_to_string(&path)
                            .with_context(|| format!("reading {}", path.display()))?;
                        toml::from_str(&text)
                            .with_context(|| format!("parsing {}", path.display()))?
                    }
                    None => SweepConfig {
                        family: FamilySpec::Dense {
                            n: 100,
                            symbol_bits: DEFAULT_SYMBOL_BITS,
                        },
                        grid: (0..=20).collect(),
                        trials,
                        seed: DEFAULT_SEED,
                    },
                };
                let record = RunRecord {
                    command: "verify".into(),
                    sweep,
                };
                sets.push((record.command.clone(), run_sweep(&record, threads)?));
            }
            let verdict = verify::Verdict::new(
                sets.iter()
                    .map(|(label, reps)| verify::verify_sweep(label, reps, &deltas))
                    .collect::<Result<_>>()?,
            );
            println!("{}", verdict.summary());
            if let Some(path) = out {
                fs::write(&path, serde_json::to_vec_pretty(&verdict)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if !verdict.passed {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::BuildLdpc {
            preset,
            seed,
            col_dist,
            checks,
            length,
            dense_rows,
            dense_degree,
            out,
        } => {
            let mut cfg: LdpcConfig = preset.config(seed)?;
            if let Some(path) = col_dist {
                let table = DistributionConfig::load(&path)
                    .with_context(|| format!("reading {}", path.display()))?;
                cfg.col_dist = table.build(checks.unwrap_or(cfg.checks))?;
            }
            cfg.checks = checks.unwrap_or(cfg.checks);
            cfg.length = length.unwrap_or(cfg.length);
            cfg.dense_rows = dense_rows.unwrap_or(cfg.dense_rows);
            cfg.dense_degree = dense_degree.unwrap_or(cfg.dense_degree);
            let matrix = cfg.build()?;
            let degrees = matrix.column_degrees();
            eprintln!(
                "{} x {}, column degrees {}..={}, girth {}",
                matrix.checks(),
                matrix.length(),
                degrees.iter().min().copied().unwrap_or(0),
                degrees.iter().max().copied().unwrap_or(0),
                matrix.girth().map_or("none".to_string(), |g| g.to_string())
            );
            emit(out.as_deref(), matrix.to_text().as_bytes())?;
        }
        Command::Replay { input, out, check } => {
            let (record, _) = read_reports(&input)?;
            let reports = run_sweep(&record, threads)?;
            let format = if input.extension().is_some_and(|e| e == "json") {
                Format::Json
            } else {
                Format::Csv
            };
            let bytes = render_output(&record, &reports, format)?;
            if check {
                let original = fs::read(&input)?;
                if original != bytes {
                    eprintln!("replay differs from {}", input.display());
                    return Ok(ExitCode::FAILURE);
                }
                eprintln!("replay identical to {}", input.display());
            } else {
                emit(out.as_deref(), &bytes)?;
            }
        }
        Command::Plot { inputs, out } => {
            let mut sets = Vec::new();
            for path in &inputs {
                let (_, reports) = harness::read_csv(fs::File::open(path)?)?;
                let label = path.file_stem().map_or_else(
                    || path.display().to_string(),
                    |s| s.to_string_lossy().into_owned(),
                );
                sets.push((label, reports));
            }
            fs::write(&out, chart(&sets)).with_context(|| format!("writing {}", out.display()))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
