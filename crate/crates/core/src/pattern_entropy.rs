//! Dictionary-based pattern entropy.
//!
//! For a candidate direction `cause -> effect` the pipeline is:
//!
//! 1. scan the effect for flips (`e[k] != e[k-1]`) and cut the cause into the
//!    segments that end on each flip (the flip dictionary);
//! 2. slide every pair of dictionary segments against each other and keep
//!    the runs of two or more positionwise matches (the pattern set);
//! 3. for each pattern, count its overlapping occurrences in the cause and
//!    how many of the aligned effect windows contain a flip (`r_flip`);
//! 4. weight the binary entropy of `r_flip` by the pattern's relative
//!    frequency and average over the pattern set.
//!
//! The direction with the smaller average is reported as causal.

use std::fmt::{self, Write as _};
use std::fs;
use std::ops::Range;
use std::path::Path;

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::seqcore::{symbol_string, Direction, SymbolSequence};

/// Absolute tolerance under which two average entropies are considered equal.
pub const VERDICT_TOLERANCE: f64 = 1e-12;

/// Which sequence plays the cause in a directional analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    XToY,
    YToX,
}

impl Orientation {
    pub fn label(self) -> &'static str {
        match self {
            Orientation::XToY => "X->Y",
            Orientation::YToX => "Y->X",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Orientation::XToY => Direction::XCausesY,
            Orientation::YToX => Direction::YCausesX,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Deduplicated source segments ending on target flips, kept in first
/// insertion order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlipDictionary {
    pub orientation: Orientation,
    pub segments: IndexSet<Vec<u8>>,
}

impl FlipDictionary {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.segments.iter().map(|s| symbol_string(s)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternSet {
    pub orientation: Orientation,
    pub patterns: IndexSet<Vec<u8>>,
}

impl PatternSet {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.patterns.iter().map(|s| symbol_string(s)).collect()
    }
}

/// Occurrence bookkeeping for one pattern in one direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlipResponse {
    pub n_change: usize,
    pub n_nochange: usize,
    pub r_flip: f64,
}

impl FlipResponse {
    pub fn occurrences(&self) -> usize {
        self.n_change + self.n_nochange
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatternScore {
    pub pattern: Vec<u8>,
    pub n_change: usize,
    pub n_nochange: usize,
    pub r_flip: f64,
    /// Occurrences over the number of length-L windows, `N - L + 1`.
    pub weight: f64,
    pub h_binary: f64,
    pub h_weighted: f64,
}

impl PatternScore {
    pub fn occurrences(&self) -> usize {
        self.n_change + self.n_nochange
    }

    pub fn label(&self) -> String {
        symbol_string(&self.pattern)
    }

    /// Trigger when every occurrence flips the effect, preserver when none
    /// does.
    pub fn role(&self) -> Option<PatternRole> {
        if self.n_nochange == 0 {
            Some(PatternRole::Trigger)
        } else if self.n_change == 0 {
            Some(PatternRole::Preserver)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectionalScore {
    pub orientation: Orientation,
    /// Sorted by pattern symbols.
    pub pattern_scores: Vec<PatternScore>,
    /// Average weighted entropy in bits; `None` when the pattern set is empty
    /// (no evidence), which ranks above every finite value.
    pub h_bar: Option<f64>,
}

impl DirectionalScore {
    /// `h_bar` with the no-evidence case mapped to `+inf`.
    pub fn h_bar_or_inf(&self) -> f64 {
        self.h_bar.unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PatternRole {
    Trigger,
    Preserver,
}

impl PatternRole {
    pub fn as_str(self) -> &'static str {
        match self {
            PatternRole::Trigger => "trigger",
            PatternRole::Preserver => "preserver",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttributedPattern {
    pub orientation: Orientation,
    pub score: PatternScore,
    pub role: Option<PatternRole>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CausalReport {
    pub score_xy: DirectionalScore,
    pub score_yx: DirectionalScore,
    pub verdict: Direction,
    /// `|h_bar(Y->X) - h_bar(X->Y)|` in bits. Zero when neither direction has
    /// evidence, `+inf` when exactly one has.
    pub strength: f64,
    /// Patterns of the winning direction, most deterministic first.
    pub attribution: Vec<AttributedPattern>,
}

// ---------------------------------------------------------------------------
// Flips and dictionaries

/// 1-based positions `k` with `s[k] != s[k-1]`.
pub fn find_flip_positions(s: &SymbolSequence) -> Vec<usize> {
    flips(s.symbols()).map(|k| k + 1).collect()
}

/// 0-based flip positions.
fn flips(s: &[u8]) -> impl Iterator<Item = usize> + '_ {
    s.windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1])
        .map(|(i, _)| i + 1)
}

fn check_pair(a: &SymbolSequence, b: &SymbolSequence) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Input(format!(
            "sequence lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::Input(format!(
            "sequences need at least 2 symbols, got {}",
            a.len()
        )));
    }
    Ok(())
}

/// Cuts `source` at every flip of `target`. A flip that would close a
/// one-symbol segment is skipped and the segment start stays put.
pub fn build_flip_dictionary(
    source: &SymbolSequence,
    target: &SymbolSequence,
    orientation: Orientation,
) -> Result<FlipDictionary> {
    check_pair(source, target)?;
    Ok(FlipDictionary {
        orientation,
        segments: flip_segments(source.symbols(), target.symbols()),
    })
}

/// 0-based half-open source ranges cut by the target's flips, in scan
/// order and before deduplication.
pub fn flip_segment_ranges(target: &SymbolSequence) -> Vec<Range<usize>> {
    segment_ranges(target.symbols())
}

fn segment_ranges(target: &[u8]) -> Vec<Range<usize>> {
    let mut ranges = Vec::new();
    let mut start = 0;
    for k in flips(target) {
        if k > start {
            ranges.push(start..k + 1);
            start = k + 1;
        }
    }
    ranges
}

fn flip_segments(source: &[u8], target: &[u8]) -> IndexSet<Vec<u8>> {
    segment_ranges(target)
        .into_iter()
        .map(|r| source[r].to_vec())
        .collect()
}

// ---------------------------------------------------------------------------
// Pattern extraction

/// Slides the shorter fragment over the longer one at every full-overlap
/// offset and collects the substrings covered by maximal runs of at least
/// two matching positions. Fragments are read from the longer input.
pub fn extract_common_subpatterns(p1: &[u8], p2: &[u8]) -> IndexSet<Vec<u8>> {
    let mut out = IndexSet::new();
    extract_into(p1, p2, &mut out);
    out
}

fn extract_into(p1: &[u8], p2: &[u8], out: &mut IndexSet<Vec<u8>>) {
    let (short, long) = if p1.len() <= p2.len() {
        (p1, p2)
    } else {
        (p2, p1)
    };
    if short.is_empty() {
        return;
    }
    for offset in 0..=long.len() - short.len() {
        let window = &long[offset..offset + short.len()];
        let mut i = 0;
        while i < short.len() {
            if short[i] != window[i] {
                i += 1;
                continue;
            }
            let run_start = i;
            while i < short.len() && short[i] == window[i] {
                i += 1;
            }
            if i - run_start >= 2 && !out.contains(&window[run_start..i]) {
                out.insert(window[run_start..i].to_vec());
            }
        }
    }
}

/// Union of [`extract_common_subpatterns`] over all pairs of distinct
/// segments of one dictionary.
pub fn build_pattern_set(dict: &FlipDictionary) -> PatternSet {
    let segments: Vec<&Vec<u8>> = dict.segments.iter().collect();
    let mut patterns = IndexSet::new();
    // Extraction is symmetric in its arguments (matched symbols are equal in
    // both), so each unordered pair is visited once.
    for (i, a) in segments.iter().enumerate() {
        for b in &segments[i + 1..] {
            extract_into(a, b, &mut patterns);
        }
    }
    PatternSet {
        orientation: dict.orientation,
        patterns,
    }
}

// ---------------------------------------------------------------------------
// Occurrences and response determinism

/// Overlapping occurrence count of `pattern` in `s`.
pub fn count_occurrences(pattern: &[u8], s: &[u8]) -> usize {
    if pattern.is_empty() || pattern.len() > s.len() {
        return 0;
    }
    s.windows(pattern.len()).filter(|w| *w == pattern).count()
}

/// Prefix counts of adjacent differences: `flips_before[j]` is the number of
/// `t < j` with `effect[t] != effect[t + 1]`.
struct FlipIndex {
    flips_before: Vec<u32>,
}

impl FlipIndex {
    fn new(effect: &[u8]) -> Self {
        let mut flips_before = Vec::with_capacity(effect.len());
        let mut acc = 0u32;
        flips_before.push(0);
        for w in effect.windows(2) {
            acc += u32::from(w[0] != w[1]);
            flips_before.push(acc);
        }
        Self { flips_before }
    }

    /// Whether the window `[start, start + len)` contains a flip between two
    /// of its own positions.
    fn window_changes(&self, start: usize, len: usize) -> bool {
        self.flips_before[start + len - 1] > self.flips_before[start]
    }
}

fn tally(pattern: &[u8], cause: &[u8], index: &FlipIndex) -> (usize, usize) {
    let len = pattern.len();
    let (mut change, mut occ) = (0, 0);
    for (i, w) in cause.windows(len).enumerate() {
        if w == pattern {
            occ += 1;
            if index.window_changes(i, len) {
                change += 1;
            }
        }
    }
    (change, occ - change)
}

/// Fraction of the pattern's occurrences in `cause` whose aligned window in
/// `effect` contains a flip.
pub fn response_determinism(
    pattern: &[u8],
    cause: &SymbolSequence,
    effect: &SymbolSequence,
) -> Result<FlipResponse> {
    check_pair(cause, effect)?;
    if pattern.is_empty() || pattern.len() > cause.len() {
        return Err(Error::NoOccurrence {
            pattern: symbol_string(pattern),
        });
    }
    let index = FlipIndex::new(effect.symbols());
    let (n_change, n_nochange) = tally(pattern, cause.symbols(), &index);
    if n_change + n_nochange == 0 {
        return Err(Error::NoOccurrence {
            pattern: symbol_string(pattern),
        });
    }
    Ok(FlipResponse {
        n_change,
        n_nochange,
        r_flip: n_change as f64 / (n_change + n_nochange) as f64,
    })
}

/// Binary Shannon entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(r));
    }
    if r == 0.0 || r == 1.0 {
        return Ok(0.0);
    }
    Ok(-(r * r.log2() + (1.0 - r) * (1.0 - r).log2()))
}

// ---------------------------------------------------------------------------
// Scoring and verdict

/// Full directional analysis for `cause -> effect`.
pub fn score_direction(
    cause: &SymbolSequence,
    effect: &SymbolSequence,
    orientation: Orientation,
) -> Result<DirectionalScore> {
    let dict = build_flip_dictionary(cause, effect, orientation)?;
    let set = build_pattern_set(&dict);
    let mut patterns: Vec<Vec<u8>> = set.patterns.into_iter().collect();
    patterns.sort();

    let n = cause.len();
    let index = FlipIndex::new(effect.symbols());
    let mut pattern_scores = Vec::with_capacity(patterns.len());
    for pattern in patterns {
        let (n_change, n_nochange) = tally(&pattern, cause.symbols(), &index);
        let occ = n_change + n_nochange;
        if occ == 0 {
            return Err(Error::Invariant(format!(
                "pattern {} extracted but absent from its source",
                symbol_string(&pattern)
            )));
        }
        let r_flip = n_change as f64 / occ as f64;
        let weight = occ as f64 / (n - pattern.len() + 1) as f64;
        let h_binary = binary_entropy(r_flip)?;
        pattern_scores.push(PatternScore {
            pattern,
            n_change,
            n_nochange,
            r_flip,
            weight,
            h_binary,
            h_weighted: weight * h_binary,
        });
    }
    let h_bar = (!pattern_scores.is_empty()).then(|| {
        pattern_scores.iter().map(|p| p.h_weighted).sum::<f64>() / pattern_scores.len() as f64
    });
    Ok(DirectionalScore {
        orientation,
        pattern_scores,
        h_bar,
    })
}

/// Verdict and strength from the two directional averages.
pub fn compare_directions(h_xy: Option<f64>, h_yx: Option<f64>) -> (Direction, f64) {
    match (h_xy, h_yx) {
        (None, None) => (Direction::Independent, 0.0),
        (Some(_), None) => (Direction::XCausesY, f64::INFINITY),
        (None, Some(_)) => (Direction::YCausesX, f64::INFINITY),
        (Some(a), Some(b)) => {
            let strength = (b - a).abs();
            let verdict = if strength <= VERDICT_TOLERANCE {
                Direction::Independent
            } else if a < b {
                Direction::XCausesY
            } else {
                Direction::YCausesX
            };
            (verdict, strength)
        }
    }
}

pub fn infer_causal_direction(x: &SymbolSequence, y: &SymbolSequence) -> Result<CausalReport> {
    check_pair(x, y)?;
    let score_xy = score_direction(x, y, Orientation::XToY)?;
    let score_yx = score_direction(y, x, Orientation::YToX)?;
    let (verdict, strength) = compare_directions(score_xy.h_bar, score_yx.h_bar);
    let mut report = CausalReport {
        score_xy,
        score_yx,
        verdict,
        strength,
        attribution: Vec::new(),
    };
    report.attribution = attribute_patterns(&report);
    Ok(report)
}

/// Ranks the winning direction's patterns by weighted entropy ascending,
/// then weight descending. Empty for an independent verdict.
pub fn attribute_patterns(report: &CausalReport) -> Vec<AttributedPattern> {
    let winner = match report.verdict {
        Direction::XCausesY => &report.score_xy,
        Direction::YCausesX => &report.score_yx,
        _ => return Vec::new(),
    };
    let mut ranked: Vec<AttributedPattern> = winner
        .pattern_scores
        .iter()
        .map(|s| AttributedPattern {
            orientation: winner.orientation,
            role: s.role(),
            score: s.clone(),
        })
        .collect();
    ranked.sort_by(|a, b| {
        a.score
            .h_weighted
            .total_cmp(&b.score.h_weighted)
            .then_with(|| b.score.weight.total_cmp(&a.score.weight))
            .then_with(|| a.score.pattern.cmp(&b.score.pattern))
    });
    ranked
}

impl CausalReport {
    pub fn direction_score(&self, orientation: Orientation) -> &DirectionalScore {
        match orientation {
            Orientation::XToY => &self.score_xy,
            Orientation::YToX => &self.score_yx,
        }
    }

    pub fn winning_orientation(&self) -> Option<Orientation> {
        match self.verdict {
            Direction::XCausesY => Some(Orientation::XToY),
            Direction::YCausesX => Some(Orientation::YToX),
            _ => None,
        }
    }

    /// One JSON object per pattern node, both directions, 6-decimal numbers.
    pub fn pattern_graph_jsonl(&self) -> String {
        let mut out = String::new();
        for score in [&self.score_xy, &self.score_yx] {
            for p in &score.pattern_scores {
                let _ = writeln!(
                    out,
                    "{{\"pattern\":{},\"direction\":\"{}\",\"r_flip\":{:.6},\"weight\":{:.6},\"h_weighted\":{:.6}}}",
                    serde_json::Value::String(p.label()),
                    score.orientation.label(),
                    p.r_flip,
                    p.weight,
                    p.h_weighted
                );
            }
        }
        out
    }

    /// Plain-text report: both averages, verdict, strength and per-pattern
    /// tables.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let fmt_h =
            |h: Option<f64>| h.map_or_else(|| "no-evidence".to_string(), |v| format!("{v:.6}"));
        let _ = writeln!(out, "h_bar X->Y: {}", fmt_h(self.score_xy.h_bar));
        let _ = writeln!(out, "h_bar Y->X: {}", fmt_h(self.score_yx.h_bar));
        let _ = writeln!(out, "verdict: {}", self.verdict);
        let _ = writeln!(out, "strength: {:.6}", self.strength);
        for score in [&self.score_xy, &self.score_yx] {
            let _ = writeln!(out);
            let _ = writeln!(
                out,
                "[{}] {} patterns",
                score.orientation,
                score.pattern_scores.len()
            );
            out.push_str(&render_pattern_table(&score.pattern_scores));
        }
        if !self.attribution.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "[attribution]");
            for a in &self.attribution {
                let _ = writeln!(
                    out,
                    "{} {:<12} h_w={:.6} weight={:.6}{}",
                    a.orientation,
                    a.score.label(),
                    a.score.h_weighted,
                    a.score.weight,
                    a.role.map_or(String::new(), |r| format!(" {}", r.as_str()))
                );
            }
        }
        out
    }

    pub fn write_text(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.render_text()).map_err(|e| Error::io(path, e))
    }
}

/// Table with columns Pattern, Change, NoChange, Ratio, Weight, H_b, H_w.
pub fn render_pattern_table(rows: &[PatternScore]) -> String {
    let width = rows
        .iter()
        .map(|r| r.pattern.len())
        .max()
        .unwrap_or(0)
        .max(7);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>6}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}",
        "Pattern", "Change", "NoChange", "Ratio", "Weight", "H_b", "H_w"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>6}  {:>8}  {:>8.4}  {:>8.4}  {:>8.4}  {:>8.4}",
            r.label(),
            r.n_change,
            r.n_nochange,
            r.r_flip,
            r.weight,
            r.h_binary,
            r.h_weighted
        );
    }
    out
}

/// Writes [`CausalReport::pattern_graph_jsonl`] to `path`.
pub fn export_pattern_graph(report: &CausalReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, report.pattern_graph_jsonl()).map_err(|e| Error::io(path, e))
}
