use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dpe::bench::{
    demo_worked_example, emit_results, render_genomic_csv, run_genomic, run_sweep, Method,
    OutputFormat,
};
use dpe::pattern_entropy::export_pattern_graph;
use dpe::seqcore::{
    binarize_equiwidth, binarize_nonzero, load_fasta, load_pair_csv, real_pair_to_symbols,
    FastaRecord, PairCsvOptions, SequencePair,
};
use dpe::synth::{parse_values, Family, TrialSpec};
use dpe::{infer_causal_direction, Error};

#[derive(Parser)]
#[command(
    name = "dpe",
    version,
    about = "Causal direction between symbolic sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Binarize {
    Equiwidth,
    Nonzero,
    None,
}

#[derive(Subcommand)]
enum Command {
    /// Infer the direction between the two columns of a CSV file.
    Infer {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "equiwidth")]
        binarize: Binarize,
        /// Leading rows to discard before binarisation.
        #[arg(long, default_value_t = 0)]
        drop: usize,
        /// 1-based columns for x and y, e.g. `1,3`.
        #[arg(long, default_value = "1,2")]
        cols: String,
        /// Write the pattern graph (one JSON object per line).
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Write the text report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a synthetic sweep and write accuracy rows.
    Bench {
        #[arg(long, value_parser = parse_family)]
        family: Option<Family>,
        #[arg(long, default_value = "dpe,lzp,etcp,etce")]
        methods: String,
        /// Trials per parameter value (default 200).
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the publication-scale trial count of the family.
        #[arg(long)]
        full: bool,
        /// Comma-separated parameter values overriding the default grid.
        #[arg(long)]
        values: Option<String>,
        /// key=value sweep description; command-line flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reference-vs-country-first hypothesis counts over a set of genomes.
    Genomic {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        cw: PathBuf,
        /// Directory of FASTA files holding the candidate sequences.
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the 30-symbol worked example end to end.
    DemoWorkedExample,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_cols(text: &str) -> dpe::Result<PairCsvOptions> {
    let cols: Vec<usize> = text
        .split(',')
        .map(|c| c.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::Input(format!("bad --cols '{text}'")))?;
    match cols.as_slice() {
        [x, y] => Ok(PairCsvOptions {
            x_column: *x,
            y_column: *y,
        }),
        _ => Err(Error::Input("--cols takes exactly two columns".into())),
    }
}

fn infer(
    input: &Path,
    binarize: Binarize,
    drop: usize,
    cols: &str,
    graph: Option<&Path>,
    out: Option<&Path>,
) -> dpe::Result<()> {
    let raw = load_pair_csv(input, parse_cols(cols)?)?;
    if raw.x.len() <= drop {
        return Err(Error::Input(format!(
            "--drop {drop} leaves no rows out of {}",
            raw.x.len()
        )));
    }
    let (x, y) = (raw.x.skip(drop), raw.y.skip(drop));
    let pair = match binarize {
        Binarize::Equiwidth => {
            let (bx, by) = (binarize_equiwidth(&x)?, binarize_equiwidth(&y)?);
            if bx.degenerate {
                log::warn!("x column is constant after dropping {drop} rows");
            }
            if by.degenerate {
                log::warn!("y column is constant after dropping {drop} rows");
            }
            SequencePair::new(bx.sequence, by.sequence, None)?
        }
        Binarize::Nonzero => SequencePair::new(binarize_nonzero(&x)?, binarize_nonzero(&y)?, None)?,
        Binarize::None => real_pair_to_symbols(&dpe::seqcore::RealPair { x, y })?,
    };
    let report = infer_causal_direction(&pair.x, &pair.y)?;
    if let Some(path) = graph {
        export_pattern_graph(&report, path)?;
    }
    match out {
        Some(path) => report.write_text(path)?,
        None => print!("{}", report.render_text()),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bench(
    family: Option<Family>,
    methods: &str,
    trials: Option<usize>,
    seed: u64,
    full: bool,
    values: Option<&str>,
    config: Option<&Path>,
    format: &str,
    out: &Path,
) -> dpe::Result<()> {
    let mut spec = match config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            let mut spec = TrialSpec::from_config(&text)?;
            if let Some(f) = family {
                if f != spec.family {
                    return Err(Error::Input(format!(
                        "--family {f} conflicts with config family {}",
                        spec.family
                    )));
                }
            }
            if seed != 0 {
                spec.seed = seed;
            }
            spec
        }
        None => {
            let family = family.ok_or_else(|| Error::Input("--family is required".into()))?;
            TrialSpec::new(family, 200, seed)
        }
    };
    if full {
        spec.trials = spec.family.full_trials();
    }
    if let Some(t) = trials {
        spec.trials = t;
    }
    if let Some(v) = values {
        spec.values = parse_values(v)?;
    }
    let methods = Method::parse_list(methods)?;
    let format: OutputFormat = format.parse()?;
    let results = run_sweep(&spec, &methods)?;
    emit_results(&results, out, format)
}

fn fasta_files(dir: &Path) -> dpe::Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| matches!(e, "fasta" | "fa" | "fna" | "fas"))
        })
        .collect();
    files.sort();
    Ok(files)
}

fn first_record(path: &Path) -> dpe::Result<FastaRecord> {
    load_fasta(path)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Input(format!("{} has no records", path.display())))
}

fn genomic(reference: &Path, cw: &Path, candidates: &Path, out: &Path) -> dpe::Result<()> {
    let rs = first_record(reference)?;
    let cw = first_record(cw)?;
    let mut records = Vec::new();
    for file in fasta_files(candidates)? {
        records.extend(load_fasta(&file)?);
    }
    let label = candidates
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("candidates");
    let result = run_genomic(label, &rs, &cw, &records)?;
    if result.n_skipped > 0 {
        log::warn!(
            "{} candidate pairs unusable after alignment",
            result.n_skipped
        );
    }
    let text = render_genomic_csv(&[result])?;
    fs::write(out, text).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })
}

fn run(cli: Cli) -> dpe::Result<()> {
    match cli.command {
        Command::Infer {
            input,
            binarize,
            drop,
            cols,
            graph,
            out,
        } => infer(
            &input,
            binarize,
            drop,
            &cols,
            graph.as_deref(),
            out.as_deref(),
        ),
        Command::Bench {
            family,
            methods,
            trials,
            seed,
            full,
            values,
            config,
            format,
            out,
        } => bench(
            family,
            &methods,
            trials,
            seed,
            full,
            values.as_deref(),
            config.as_deref(),
            &format,
            &out,
        ),
        Command::Genomic {
            reference,
            cw,
            candidates,
            out,
        } => genomic(&reference, &cw, &candidates, &out),
        Command::DemoWorkedExample => {
            print!("{}", demo_worked_example()?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
