//! Randomization measurements: mean-subtracted unnormalized autocorrelation,
//! symbol histograms, empirical entropy, and the built-in test cases.

use std::fmt::Write as _;

use thiserror::Error;

use crate::codec::{text_to_symbols, Alphabet, Cipher, CodecError, SymbolStream};
use crate::db::NetworkProfile;
use crate::keying::{HiddenKey, KeyFrame};
use crate::quasigroup::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("stream is empty")]
    EmptyStream,
    #[error("unknown case {0} (known cases: 1, 2, 3, 5, 6)")]
    UnknownCase(u32),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrelationReport {
    pub lags: Vec<usize>,
    /// `R(k) = sum_{i} (x_i - mean)(x_{i+k} - mean)`, not normalized.
    pub values: Vec<f64>,
    /// `R(k) / R(0)`, or all zeros when `R(0) = 0`.
    pub normalized: Vec<f64>,
    pub mean: f64,
    pub len: usize,
}

impl AutocorrelationReport {
    /// Largest `|R(k)/R(0)|` over lags `1..=max_lag` (or fewer if the
    /// report is shorter).
    pub fn max_abs_normalized(&self, max_lag: usize) -> f64 {
        self.normalized
            .iter()
            .skip(1)
            .take(max_lag)
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Biased, mean-subtracted autocorrelation for lags `0..=max_lag`. Lags past
/// `len - 1` are dropped.
pub fn autocorrelation(stream: &[Symbol], max_lag: usize) -> Result<AutocorrelationReport, AnalysisError> {
    if stream.is_empty() {
        return Err(AnalysisError::EmptyStream);
    }
    let n = stream.len();
    let max_lag = max_lag.min(n - 1);
    let mean = stream.iter().map(|&x| x as f64).sum::<f64>() / n as f64;
    let dev: Vec<f64> = stream.iter().map(|&x| x as f64 - mean).collect();
    let values: Vec<f64> = (0..=max_lag)
        .map(|k| dev[..n - k].iter().zip(&dev[k..]).map(|(a, b)| a * b).sum())
        .collect();
    let r0 = values[0];
    let normalized = values
        .iter()
        .map(|&v| if r0 > 0.0 { v / r0 } else { 0.0 })
        .collect();
    Ok(AutocorrelationReport {
        lags: (0..=max_lag).collect(),
        values,
        normalized,
        mean,
        len: n,
    })
}

/// Counts per symbol; slot `i` holds the count of symbol `i + 1`.
pub fn histogram(stream: &SymbolStream) -> Vec<u64> {
    let mut counts = vec![0u64; stream.order() as usize];
    for &s in stream.symbols() {
        counts[s as usize - 1] += 1;
    }
    counts
}

/// Shannon entropy in bits of the empirical symbol distribution.
pub fn entropy(stream: &[Symbol]) -> Result<f64, AnalysisError> {
    if stream.is_empty() {
        return Err(AnalysisError::EmptyStream);
    }
    let max = *stream.iter().max().unwrap() as usize;
    let mut counts = vec![0u64; max + 1];
    for &s in stream {
        counts[s as usize] += 1;
    }
    let n = stream.len() as f64;
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>();
    // a single-symbol stream sums to -0.0
    Ok(h.max(0.0))
}

pub fn distinct_symbols(stream: &[Symbol]) -> usize {
    let mut seen: Vec<Symbol> = stream.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

pub const CASE_IDS: [u32; 5] = [1, 2, 3, 5, 6];

const CASE_5_TEXT: &str = "ONE DAY A COUNTRYMAN GOING TO THE NEST OF HIS GOOSE FOUND THERE AN EGG ALL \
YELLOW AND GLITTERING WHEN HE TOOK IT UP IT WAS AS HEAVY AS LEAD AND HE WAS GOING TO THROW IT AWAY \
BECAUSE HE THOUGHT A TRICK HAD BEEN PLAYED UPON HIM. BUT HE TOOK IT HOME ON SECOND THOUGHTS AND SOON \
FOUND TO";

const CASE_6_LEN: usize = 300;

/// Built-in input text for a case. Case 4 does not exist.
pub fn case_input(case_id: u32) -> Result<String, AnalysisError> {
    Ok(match case_id {
        // eleven K's, each followed by a space
        1 => "K ".repeat(11),
        2 => "OOM NAMAH SHIVAYA".to_string(),
        3 => "E M V C W J F A Z".to_string(),
        5 => CASE_5_TEXT.to_string(),
        6 => "E".repeat(CASE_6_LEN),
        other => return Err(AnalysisError::UnknownCase(other)),
    })
}

/// The case text cycled or truncated to exactly `len` characters.
pub fn case_analog(case_id: u32, len: usize) -> Result<String, AnalysisError> {
    let base = case_input(case_id)?;
    Ok(base.chars().cycle().take(len).collect())
}

/// Alphabet used for the built-in cases; case 5 needs the period.
pub fn case_alphabet() -> Alphabet {
    Alphabet::latin41()
}

#[derive(Debug, Clone)]
pub struct CaseReport {
    pub case_id: u32,
    pub input_text: String,
    pub input: SymbolStream,
    pub output: SymbolStream,
    pub input_acf: AutocorrelationReport,
    pub output_acf: AutocorrelationReport,
    pub input_entropy: f64,
    pub output_entropy: f64,
    pub input_distinct: usize,
    pub output_distinct: usize,
}

impl CaseReport {
    /// `lag,raw_R,raw_norm,enc_R,enc_norm`, one row per lag.
    pub fn to_csv(&self) -> String {
        acf_csv(&self.input_acf, &self.output_acf)
    }

    pub fn summary(&self) -> String {
        format!(
            "case {}: length {}, distinct {} -> {}, entropy {:.4} -> {:.4} bits, max |R(k)/R(0)| (k>=1) {:.4} -> {:.4}",
            self.case_id,
            self.input.len(),
            self.input_distinct,
            self.output_distinct,
            self.input_entropy,
            self.output_entropy,
            self.input_acf.max_abs_normalized(usize::MAX),
            self.output_acf.max_abs_normalized(usize::MAX),
        )
    }
}

pub fn acf_csv(raw: &AutocorrelationReport, enc: &AutocorrelationReport) -> String {
    let mut out = String::from("lag,raw_R,raw_norm,enc_R,enc_norm\n");
    let lags = raw.lags.len().min(enc.lags.len());
    for k in 0..lags {
        writeln!(
            out,
            "{},{},{},{},{}",
            k, raw.values[k], raw.normalized[k], enc.values[k], enc.normalized[k]
        )
        .unwrap();
    }
    out
}

/// Encrypts `text` and measures both sides.
pub fn analyze_text(
    case_id: u32,
    text: &str,
    alphabet: &Alphabet,
    cipher: &Cipher,
    max_lag: usize,
) -> Result<CaseReport, AnalysisError> {
    let input = text_to_symbols(text, alphabet)?;
    let output = cipher.encrypt(&input)?;
    Ok(CaseReport {
        case_id,
        input_text: alphabet.fold(text),
        input_acf: autocorrelation(input.symbols(), max_lag)?,
        output_acf: autocorrelation(output.symbols(), max_lag)?,
        input_entropy: entropy(input.symbols())?,
        output_entropy: entropy(output.symbols())?,
        input_distinct: distinct_symbols(input.symbols()),
        output_distinct: distinct_symbols(output.symbols()),
        input,
        output,
    })
}

pub fn run_case(
    case_id: u32,
    profile: &NetworkProfile,
    frame: &KeyFrame,
    key: &HiddenKey,
    max_lag: usize,
) -> Result<CaseReport, AnalysisError> {
    let text = case_input(case_id)?;
    let cipher = Cipher::new(profile, frame, key)?;
    analyze_text(case_id, &text, &case_alphabet(), &cipher, max_lag)
}
