//! Sequence types, discretisation of real-valued series and file ingestion.

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// Finite-alphabet sequence. Symbols are stored 0-based and must be
/// smaller than `alphabet_size`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolSequence {
    symbols: Vec<u8>,
    alphabet_size: usize,
}

impl SymbolSequence {
    pub fn new(symbols: Vec<u8>, alphabet_size: usize) -> Result<Self> {
        if alphabet_size == 0 || alphabet_size > 256 {
            return Err(Error::Input(format!(
                "alphabet size {alphabet_size} outside 1..=256"
            )));
        }
        if let Some((i, &s)) = symbols
            .iter()
            .enumerate()
            .find(|(_, &s)| s as usize >= alphabet_size)
        {
            return Err(Error::Input(format!(
                "symbol {s} at position {} exceeds alphabet size {alphabet_size}",
                i + 1
            )));
        }
        Ok(Self {
            symbols,
            alphabet_size,
        })
    }

    pub fn binary(symbols: Vec<u8>) -> Result<Self> {
        Self::new(symbols, 2)
    }

    /// Parses a string of decimal digits, e.g. `"011101"`, into a binary
    /// sequence.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let symbols = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Input(format!("'{other}' is not a bit"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::binary(symbols)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn into_symbols(self) -> Vec<u8> {
        self.symbols
    }
}

impl fmt::Display for SymbolSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&symbol_string(&self.symbols))
    }
}

/// Renders symbols as a compact label: concatenated digits when every
/// symbol is below 10, dot-separated otherwise.
pub fn symbol_string(symbols: &[u8]) -> String {
    if symbols.iter().all(|&s| s < 10) {
        symbols.iter().map(|&s| char::from(b'0' + s)).collect()
    } else {
        symbols
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

/// Real-valued series prior to discretisation. Only finite values are
/// accepted.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSeries {
    values: Vec<f64>,
}

impl RealSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite value {} at position {}",
                values[i],
                i + 1
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Drops the first `n` values.
    pub fn skip(&self, n: usize) -> RealSeries {
        RealSeries {
            values: self.values.iter().skip(n).copied().collect(),
        }
    }
}

/// Output of a discretisation step. `degenerate` is set when the input
/// carried no usable variation (constant series).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binarized {
    pub sequence: SymbolSequence,
    pub degenerate: bool,
}

/// Two equal-width bins over `[min, max]`: values at or above the midpoint
/// map to 1. A constant series maps to all zeros and is flagged degenerate.
pub fn binarize_equiwidth(series: &RealSeries) -> Result<Binarized> {
    if series.is_empty() {
        return Err(Error::Input("cannot binarize an empty series".into()));
    }
    let (min, max) = series
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if max == min {
        let sequence = SymbolSequence::binary(vec![0; series.len()])?;
        return Ok(Binarized {
            sequence,
            degenerate: true,
        });
    }
    let threshold = min + (max - min) / 2.0;
    let symbols = series
        .values()
        .iter()
        .map(|&v| u8::from(v >= threshold))
        .collect();
    Ok(Binarized {
        sequence: SymbolSequence::binary(symbols)?,
        degenerate: false,
    })
}

/// Indicator of nonzero entries.
pub fn binarize_nonzero(series: &RealSeries) -> Result<SymbolSequence> {
    if series.is_empty() {
        return Err(Error::Input("cannot binarize an empty series".into()));
    }
    SymbolSequence::binary(
        series
            .values()
            .iter()
            .map(|&v| u8::from(v != 0.0))
            .collect(),
    )
}

/// Causal direction label, used both for ground truth and for verdicts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    XCausesY,
    YCausesX,
    Independent,
    Bidirectional,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::XCausesY => "x_causes_y",
            Direction::YCausesX => "y_causes_x",
            Direction::Independent => "independent",
            Direction::Bidirectional => "bidirectional",
        }
    }

    /// The same relation with the roles of x and y exchanged.
    pub fn mirrored(self) -> Direction {
        match self {
            Direction::XCausesY => Direction::YCausesX,
            Direction::YCausesX => Direction::XCausesY,
            other => other,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Two aligned sequences with optional ground truth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequencePair {
    pub x: SymbolSequence,
    pub y: SymbolSequence,
    pub ground_truth: Option<Direction>,
}

impl SequencePair {
    pub fn new(
        x: SymbolSequence,
        y: SymbolSequence,
        ground_truth: Option<Direction>,
    ) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Input(format!(
                "sequence lengths differ: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        if x.alphabet_size() != y.alphabet_size() {
            return Err(Error::Input(format!(
                "alphabet sizes differ: {} vs {}",
                x.alphabet_size(),
                y.alphabet_size()
            )));
        }
        Ok(Self { x, y, ground_truth })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

// ---------------------------------------------------------------------------
// CSV

/// Column selection for [`load_pair_csv`]. Columns are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairCsvOptions {
    pub x_column: usize,
    pub y_column: usize,
}

impl Default for PairCsvOptions {
    fn default() -> Self {
        Self {
            x_column: 1,
            y_column: 2,
        }
    }
}

/// Two real-valued columns read from a CSV file.
#[derive(Clone, Debug, PartialEq)]
pub struct RealPair {
    pub x: RealSeries,
    pub y: RealSeries,
}

/// Reads two numeric columns from a comma-separated file. A first row whose
/// selected cells are all non-numeric is treated as a header.
pub fn load_pair_csv(path: impl AsRef<Path>, options: PairCsvOptions) -> Result<RealPair> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_pair_csv(file, path, options)
}

pub fn parse_pair_csv<R: std::io::Read>(
    reader: R,
    path: &Path,
    options: PairCsvOptions,
) -> Result<RealPair> {
    if options.x_column == 0 || options.y_column == 0 {
        return Err(Error::Input("CSV columns are 1-based".into()));
    }
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let needed = options.x_column.max(options.y_column);
    let mut width = None;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(idx + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(parse_err(
                    line,
                    format!("expected {w} columns, found {}", record.len()),
                ))
            }
            _ => {}
        }
        if record.len() < 2 {
            return Err(parse_err(line, "need at least 2 columns".into()));
        }
        if record.len() < needed {
            return Err(parse_err(
                line,
                format!("column {needed} requested but row has {}", record.len()),
            ));
        }
        let xc = &record[options.x_column - 1];
        let yc = &record[options.y_column - 1];
        let (xv, yv) = (xc.parse::<f64>(), yc.parse::<f64>());
        if idx == 0 && xv.is_err() && yv.is_err() {
            continue;
        }
        let bad = |cell: &str| parse_err(line, format!("non-numeric cell '{cell}'"));
        let xv = xv.map_err(|_| bad(xc))?;
        let yv = yv.map_err(|_| bad(yc))?;
        if !xv.is_finite() || !yv.is_finite() {
            return Err(parse_err(line, "non-finite value".into()));
        }
        xs.push(xv);
        ys.push(yv);
    }
    Ok(RealPair {
        x: RealSeries::new(xs)?,
        y: RealSeries::new(ys)?,
    })
}

/// Interprets both columns as symbols directly. Values must be
/// non-negative integers; the shared alphabet is `max + 1`.
pub fn real_pair_to_symbols(pair: &RealPair) -> Result<SequencePair> {
    let to_symbols = |series: &RealSeries| -> Result<Vec<u8>> {
        series
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if (0.0..=255.0).contains(&v) && v.fract() == 0.0 {
                    Ok(v as u8)
                } else {
                    Err(Error::Input(format!(
                        "value {v} at row {} is not a symbol in 0..=255",
                        i + 1
                    )))
                }
            })
            .collect()
    };
    let xs = to_symbols(&pair.x)?;
    let ys = to_symbols(&pair.y)?;
    let alphabet = xs
        .iter()
        .chain(&ys)
        .copied()
        .max()
        .map_or(1, |m| m as usize + 1)
        .max(2);
    SequencePair::new(
        SymbolSequence::new(xs, alphabet)?,
        SymbolSequence::new(ys, alphabet)?,
        None,
    )
}

// ---------------------------------------------------------------------------
// FASTA

pub const NUCLEOTIDES: [char; 4] = ['A', 'C', 'G', 'T'];

/// A sequence with a per-position ambiguity mask. Masked positions hold a
/// placeholder symbol and are removed by [`align_pair`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskedSequence {
    pub sequence: SymbolSequence,
    pub mask: Vec<bool>,
}

impl MaskedSequence {
    pub fn unmasked(sequence: SymbolSequence) -> Self {
        let mask = vec![false; sequence.len()];
        Self { sequence, mask }
    }

    pub fn ambiguous_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FastaRecord {
    pub id: String,
    pub data: MaskedSequence,
}

impl FastaRecord {
    /// Nucleotide labels A=1, C=2, G=3, T=4; masked positions read 0.
    pub fn display_labels(&self) -> Vec<u8> {
        self.data
            .sequence
            .symbols()
            .iter()
            .zip(&self.data.mask)
            .map(|(&s, &m)| if m { 0 } else { s + 1 })
            .collect()
    }

    /// Letters back from symbols; masked positions render as `N`.
    pub fn to_nucleotides(&self) -> String {
        self.data
            .sequence
            .symbols()
            .iter()
            .zip(&self.data.mask)
            .map(|(&s, &m)| if m { 'N' } else { NUCLEOTIDES[s as usize] })
            .collect()
    }
}

fn nucleotide_symbol(c: char) -> Option<u8> {
    match c.to_ascii_uppercase() {
        'A' => Some(0),
        'C' => Some(1),
        'G' => Some(2),
        'T' => Some(3),
        _ => None,
    }
}

pub fn load_fasta(path: impl AsRef<Path>) -> Result<Vec<FastaRecord>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_fasta(BufReader::new(file), path)
}

/// Parses `>`-headed records with arbitrarily folded sequence lines.
pub fn parse_fasta<R: BufRead>(reader: R, path: &Path) -> Result<Vec<FastaRecord>> {
    struct Pending {
        id: String,
        header_line: usize,
        symbols: Vec<u8>,
        mask: Vec<bool>,
    }
    let finish = |p: Pending| -> Result<FastaRecord> {
        if p.symbols.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: p.header_line,
                message: format!("record '{}' has no sequence", p.id),
            });
        }
        Ok(FastaRecord {
            id: p.id,
            data: MaskedSequence {
                sequence: SymbolSequence::new(p.symbols, 4)?,
                mask: p.mask,
            },
        })
    };

    let mut records = Vec::new();
    let mut current: Option<Pending> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            if let Some(p) = current.take() {
                records.push(finish(p)?);
            }
            let id = header.split_whitespace().next().unwrap_or("").to_string();
            current = Some(Pending {
                id,
                header_line: line_no,
                symbols: Vec::new(),
                mask: Vec::new(),
            });
            continue;
        }
        let Some(p) = current.as_mut() else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: "sequence data before any '>' header".into(),
            });
        };
        for c in line.chars().filter(|c| !c.is_whitespace()) {
            match nucleotide_symbol(c) {
                Some(s) => {
                    p.symbols.push(s);
                    p.mask.push(false);
                }
                None => {
                    p.symbols.push(0);
                    p.mask.push(true);
                }
            }
        }
    }
    match current {
        Some(p) => records.push(finish(p)?),
        None => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                message: "no FASTA header found".into(),
            })
        }
    }
    Ok(records)
}

/// Truncates both sequences to the shorter length, then drops every
/// position masked in either.
pub fn align_pair(a: &MaskedSequence, b: &MaskedSequence) -> Result<SequencePair> {
    if a.sequence.is_empty() || b.sequence.is_empty() {
        return Err(Error::Input("cannot align an empty sequence".into()));
    }
    let n = a.sequence.len().min(b.sequence.len());
    let (mut xs, mut ys) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        if a.mask[i] || b.mask[i] {
            continue;
        }
        xs.push(a.sequence.symbols()[i]);
        ys.push(b.sequence.symbols()[i]);
    }
    if xs.len() < 2 {
        return Err(Error::UnusablePair(xs.len()));
    }
    let alphabet = a.sequence.alphabet_size().max(b.sequence.alphabet_size());
    SequencePair::new(
        SymbolSequence::new(xs, alphabet)?,
        SymbolSequence::new(ys, alphabet)?,
        None,
    )
}
