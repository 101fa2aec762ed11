//! Experiment harness: sweeps over synthetic families, genomic hypothesis
//! counting, the predator-prey analysis and tabular output.

use std::cmp::Ordering;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::baselines::{baseline_direction, BaselineMethod};
use crate::error::{Error, Result};
use crate::pattern_entropy::{
    build_flip_dictionary, build_pattern_set, infer_causal_direction, render_pattern_table,
    score_direction, CausalReport, Orientation,
};
use crate::seqcore::{
    align_pair, binarize_equiwidth, Direction, FastaRecord, RealSeries, SymbolSequence,
};
use crate::synth::{Family, TrialSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Dpe,
    Baseline(BaselineMethod),
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Dpe,
        Method::Baseline(BaselineMethod::Lzp),
        Method::Baseline(BaselineMethod::Etcp),
        Method::Baseline(BaselineMethod::Etce),
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Dpe => "dpe",
            Method::Baseline(b) => b.as_str(),
        }
    }

    /// Comma-separated list such as `dpe,lzp`.
    pub fn parse_list(text: &str) -> Result<Vec<Method>> {
        let mut out = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let m: Method = item.parse()?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        if out.is_empty() {
            return Err(Error::Input("no methods given".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("dpe") {
            Ok(Method::Dpe)
        } else {
            s.parse().map(Method::Baseline)
        }
    }
}

/// Aggregate over the trials of one (family, parameter value, method) cell.
///
/// `n_independent` counts independent verdicts that were wrong, so
/// `n_correct + n_misclassified + n_independent == trials`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub family: Family,
    pub parameter: &'static str,
    pub value: f64,
    pub method: Method,
    pub trials: usize,
    pub n_correct: usize,
    pub n_misclassified: usize,
    pub n_independent: usize,
    pub accuracy: f64,
    /// DPE only: trial means of the finite directional averages.
    pub mean_hbar_xy: Option<f64>,
    pub mean_hbar_yx: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
struct MethodOutcome {
    verdict: Direction,
    hbar_xy: Option<f64>,
    hbar_yx: Option<f64>,
}

fn run_trial(
    spec: &TrialSpec,
    value: f64,
    trial: u64,
    methods: &[Method],
) -> Result<(Direction, Vec<MethodOutcome>)> {
    let pair = spec.generate(value, trial)?;
    let truth = pair
        .ground_truth
        .ok_or_else(|| Error::Invariant("generated pair without ground truth".into()))?;
    let outcomes = methods
        .iter()
        .map(|m| -> Result<MethodOutcome> {
            Ok(match m {
                Method::Dpe => {
                    let r = infer_causal_direction(&pair.x, &pair.y)?;
                    MethodOutcome {
                        verdict: r.verdict,
                        hbar_xy: r.score_xy.h_bar,
                        hbar_yx: r.score_yx.h_bar,
                    }
                }
                Method::Baseline(b) => MethodOutcome {
                    verdict: baseline_direction(*b, &pair.x, &pair.y)?.verdict,
                    hbar_xy: None,
                    hbar_yx: None,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((truth, outcomes))
}

fn mean_of_finite(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Runs every trial of the sweep for every method. Trials execute in
/// parallel on per-trial random streams; aggregation is sequential in trial
/// order so results do not depend on scheduling.
pub fn run_sweep(spec: &TrialSpec, methods: &[Method]) -> Result<Vec<SweepResult>> {
    spec.validate()?;
    if methods.is_empty() {
        return Err(Error::Input("no methods given".into()));
    }
    let mut results = Vec::with_capacity(spec.values.len() * methods.len());
    for &value in &spec.values {
        let outcomes: Vec<(Direction, Vec<MethodOutcome>)> = (0..spec.trials as u64)
            .into_par_iter()
            .map(|t| run_trial(spec, value, t, methods))
            .collect::<Result<_>>()?;
        for (mi, &method) in methods.iter().enumerate() {
            let (mut correct, mut wrong, mut independent) = (0, 0, 0);
            for (truth, per_method) in &outcomes {
                let verdict = per_method[mi].verdict;
                if verdict == *truth {
                    correct += 1;
                } else if verdict == Direction::Independent {
                    independent += 1;
                } else {
                    wrong += 1;
                }
            }
            let (mean_xy, mean_yx) = match method {
                Method::Dpe => (
                    mean_of_finite(outcomes.iter().map(|(_, o)| o[mi].hbar_xy)),
                    mean_of_finite(outcomes.iter().map(|(_, o)| o[mi].hbar_yx)),
                ),
                Method::Baseline(_) => (None, None),
            };
            results.push(SweepResult {
                family: spec.family,
                parameter: spec.family.parameter_name(),
                value,
                method,
                trials: spec.trials,
                n_correct: correct,
                n_misclassified: wrong,
                n_independent: independent,
                accuracy: correct as f64 / spec.trials as f64,
                mean_hbar_xy: mean_xy,
                mean_hbar_yx: mean_yx,
            });
        }
    }
    Ok(results)
}

// ---------------------------------------------------------------------------
// Output

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" => Ok(OutputFormat::Jsonl),
            other => Err(Error::Input(format!("unknown output format '{other}'"))),
        }
    }
}

pub const RESULT_COLUMNS: [&str; 11] = [
    "family",
    "parameter",
    "value",
    "method",
    "trials",
    "correct",
    "independent",
    "accuracy",
    "mean_hbar_xy",
    "mean_hbar_yx",
    "variant",
];

fn sorted(results: &[SweepResult]) -> Vec<&SweepResult> {
    let mut rows: Vec<&SweepResult> = results.iter().collect();
    rows.sort_by(|a, b| cmp_rows(a, b));
    rows
}

fn fixed6(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.6}"))
}

fn variant_marker(method: Method) -> &'static str {
    match method {
        Method::Dpe => "",
        Method::Baseline(_) => "variant",
    }
}

/// CSV text of the results, header first, rows sorted by family, value and
/// method. Baseline rows carry `variant` in the last column.
pub fn render_results_csv(results: &[SweepResult]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(RESULT_COLUMNS)?;
    for r in sorted(results) {
        wtr.write_record([
            r.family.as_str().to_string(),
            r.parameter.to_string(),
            format!("{:.6}", r.value),
            r.method.as_str().to_string(),
            r.trials.to_string(),
            r.n_correct.to_string(),
            r.n_independent.to_string(),
            format!("{:.6}", r.accuracy),
            fixed6(r.mean_hbar_xy),
            fixed6(r.mean_hbar_yx),
            variant_marker(r.method).to_string(),
        ])?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::Invariant(format!("CSV buffer: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))
}

pub fn render_results_jsonl(results: &[SweepResult]) -> String {
    let mut out = String::new();
    let num = |v: Option<f64>| v.map_or_else(|| "null".to_string(), |v| format!("{v:.6}"));
    for r in sorted(results) {
        let _ = writeln!(
            out,
            "{{\"family\":\"{}\",\"parameter\":\"{}\",\"value\":{:.6},\"method\":\"{}\",\"trials\":{},\"correct\":{},\"independent\":{},\"accuracy\":{:.6},\"mean_hbar_xy\":{},\"mean_hbar_yx\":{},\"variant\":{}}}",
            r.family,
            r.parameter,
            r.value,
            r.method,
            r.trials,
            r.n_correct,
            r.n_independent,
            r.accuracy,
            num(r.mean_hbar_xy),
            num(r.mean_hbar_yx),
            matches!(r.method, Method::Baseline(_)),
        );
    }
    out
}

pub fn emit_results(
    results: &[SweepResult],
    path: impl AsRef<Path>,
    format: OutputFormat,
) -> Result<()> {
    if results.is_empty() {
        return Err(Error::Input("no results to write".into()));
    }
    let text = match format {
        OutputFormat::Csv => render_results_csv(results)?,
        OutputFormat::Jsonl => render_results_jsonl(results),
    };
    let path = path.as_ref();
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Genomic hypothesis

/// Share of candidates whose verdict names the global reference (H0) or the
/// country's first sequence (H1) as the cause. Proportions are `None` when
/// no candidate could be analysed.
#[derive(Clone, Debug, PartialEq)]
pub struct GenomicHypothesisResult {
    pub label: String,
    pub n_sequences: usize,
    pub n_skipped: usize,
    pub proportion_h0: Option<f64>,
    pub proportion_h1: Option<f64>,
}

/// Share of sequences that must support a hypothesis in the summary view.
pub const SUMMARY_THRESHOLD: f64 = 0.05;

impl GenomicHypothesisResult {
    /// Summary view: at least `threshold` of the sequences admit H0.
    pub fn admits_h0(&self, threshold: f64) -> Option<bool> {
        self.proportion_h0.map(|p| p >= threshold)
    }

    /// Summary view: more sequences attributed to CW than to RS.
    pub fn favours_h1(&self) -> Option<bool> {
        Some(self.proportion_h1? > self.proportion_h0?)
    }
}

/// Verdict of `cause -> candidate`, or `None` for an unusable pair.
fn reference_wins(cause: &FastaRecord, candidate: &FastaRecord) -> Result<Option<bool>> {
    match align_pair(&cause.data, &candidate.data) {
        Ok(pair) => Ok(Some(
            infer_causal_direction(&pair.x, &pair.y)?.verdict == Direction::XCausesY,
        )),
        Err(Error::UnusablePair(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn run_genomic(
    label: &str,
    reference: &FastaRecord,
    country_first: &FastaRecord,
    candidates: &[FastaRecord],
) -> Result<GenomicHypothesisResult> {
    let outcomes: Vec<Option<(bool, bool)>> = candidates
        .par_iter()
        .map(|c| -> Result<Option<(bool, bool)>> {
            let h0 = reference_wins(reference, c)?;
            let h1 = reference_wins(country_first, c)?;
            Ok(h0.zip(h1))
        })
        .collect::<Result<_>>()?;
    let analysed: Vec<(bool, bool)> = outcomes.iter().flatten().copied().collect();
    let n = analysed.len();
    let share = |hits: usize| (n > 0).then(|| hits as f64 / n as f64);
    Ok(GenomicHypothesisResult {
        label: label.to_string(),
        n_sequences: n,
        n_skipped: outcomes.len() - n,
        proportion_h0: share(analysed.iter().filter(|(h0, _)| *h0).count()),
        proportion_h1: share(analysed.iter().filter(|(_, h1)| *h1).count()),
    })
}

pub fn render_genomic_csv(results: &[GenomicHypothesisResult]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "country",
        "n_sequences",
        "n_skipped",
        "proportion_h0",
        "proportion_h1",
        "admits_h0_5pct",
        "favours_h1",
    ])?;
    let flag = |b: Option<bool>| b.map_or_else(String::new, |b| b.to_string());
    for r in results {
        wtr.write_record([
            r.label.clone(),
            r.n_sequences.to_string(),
            r.n_skipped.to_string(),
            fixed6(r.proportion_h0),
            fixed6(r.proportion_h1),
            flag(r.admits_h0(SUMMARY_THRESHOLD)),
            flag(r.favours_h1()),
        ])?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::Invariant(format!("CSV buffer: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))
}

// ---------------------------------------------------------------------------
// Predator-prey

pub const PREDATOR_PREY_TRANSIENTS: usize = 9;

#[derive(Clone, Debug, PartialEq)]
pub struct PredatorPreyResult {
    /// x = predator, y = prey.
    pub report: CausalReport,
    pub samples: usize,
    pub degenerate_predator: bool,
    pub degenerate_prey: bool,
}

/// Drops the first 9 samples, binarises both series at their range midpoints
/// and runs the directional analysis with the predator as x.
pub fn run_predator_prey(predator: &RealSeries, prey: &RealSeries) -> Result<PredatorPreyResult> {
    if predator.len() != prey.len() {
        return Err(Error::Input(format!(
            "series lengths differ: {} vs {}",
            predator.len(),
            prey.len()
        )));
    }
    if predator.len() <= PREDATOR_PREY_TRANSIENTS {
        return Err(Error::Input(format!(
            "need more than {PREDATOR_PREY_TRANSIENTS} samples, got {}",
            predator.len()
        )));
    }
    let pred = binarize_equiwidth(&predator.skip(PREDATOR_PREY_TRANSIENTS))?;
    let prey_b = binarize_equiwidth(&prey.skip(PREDATOR_PREY_TRANSIENTS))?;
    let report = infer_causal_direction(&pred.sequence, &prey_b.sequence)?;
    Ok(PredatorPreyResult {
        report,
        samples: pred.sequence.len(),
        degenerate_predator: pred.degenerate,
        degenerate_prey: prey_b.degenerate,
    })
}

// ---------------------------------------------------------------------------
// Worked example

pub const WORKED_X: &str = "011101111010011001110101101001";
pub const WORKED_Y: &str = "000001000010000000000100001000";

/// Dictionaries, pattern sets and per-pattern tables for the 30-symbol
/// example pair whose effect marks every occurrence of `1101`.
pub fn demo_worked_example() -> Result<String> {
    let x = SymbolSequence::from_bits(WORKED_X)?;
    let y = SymbolSequence::from_bits(WORKED_Y)?;
    let mut out = String::new();
    let _ = writeln!(out, "X = {x}");
    let _ = writeln!(out, "Y = {y}");
    for (orientation, cause, effect) in [(Orientation::XToY, &x, &y), (Orientation::YToX, &y, &x)] {
        let dict = build_flip_dictionary(cause, effect, orientation)?;
        let patterns = build_pattern_set(&dict);
        let mut labels = patterns.labels();
        labels.sort();
        let score = score_direction(cause, effect, orientation)?;
        let _ = writeln!(out);
        let _ = writeln!(out, "[{orientation}]");
        let _ = writeln!(out, "dictionary: {{{}}}", dict.labels().join(", "));
        let _ = writeln!(out, "patterns:   {{{}}}", labels.join(", "));
        out.push_str(&render_pattern_table(&score.pattern_scores));
        let _ = writeln!(
            out,
            "average weighted entropy: {}",
            score
                .h_bar
                .map_or_else(|| "no-evidence".into(), |h| format!("{h:.6}"))
        );
    }
    let report = infer_causal_direction(&x, &y)?;
    let _ = writeln!(out);
    let _ = writeln!(out, "verdict: {}", report.verdict);
    let _ = writeln!(out, "strength: {:.6}", report.strength);
    Ok(out)
}

/// Orders sweep rows as written to disk.
pub fn cmp_rows(a: &SweepResult, b: &SweepResult) -> Ordering {
    a.family
        .as_str()
        .cmp(b.family.as_str())
        .then_with(|| a.value.total_cmp(&b.value))
        .then_with(|| a.method.as_str().cmp(b.method.as_str()))
}
