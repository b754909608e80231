//! Token accuracy and exact-match sequence accuracy for text generation tasks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::{canonical_smiles, parse_smiles};
use crate::nmr_metrics::stable_mean;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeqError {
    #[error("unterminated bracket atom starting at offset {0}")]
    UnterminatedBracket(usize),
    #[error("ground-truth sequence is empty")]
    EmptyTruth,
    #[error("no pairs to score")]
    EmptyList,
    #[error("unknown {kind} '{value}'")]
    UnknownOption { kind: &'static str, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenScheme {
    /// One token per unicode scalar value.
    #[default]
    Character,
    /// Bracket atoms, `Cl`/`Br` and `%nn` ring labels are single tokens; every
    /// other character is its own token.
    SmilesAtoms,
}

impl FromStr for TokenScheme {
    type Err = SeqError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "character" => Ok(TokenScheme::Character),
            "smiles_atoms" => Ok(TokenScheme::SmilesAtoms),
            _ => Err(SeqError::UnknownOption { kind: "token scheme", value: s.to_string() }),
        }
    }
}

impl fmt::Display for TokenScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TokenScheme::Character => "character",
            TokenScheme::SmilesAtoms => "smiles_atoms",
        })
    }
}

/// Tokens always concatenate back to `raw`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    tokens: Vec<String>,
    raw: String,
}

impl TokenSequence {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

pub fn tokenize(text: &str, scheme: TokenScheme) -> Result<TokenSequence, SeqError> {
    let tokens = match scheme {
        TokenScheme::Character => text.chars().map(String::from).collect(),
        TokenScheme::SmilesAtoms => smiles_tokens(text)?,
    };
    Ok(TokenSequence { tokens, raw: text.to_string() })
}

fn smiles_tokens(text: &str) -> Result<Vec<String>, SeqError> {
    let mut out = Vec::new();
    let mut rest = text;
    let mut offset = 0;
    while let Some(c) = rest.chars().next() {
        let len = match c {
            '[' => rest.find(']').map(|e| e + 1).ok_or(SeqError::UnterminatedBracket(offset))?,
            'C' if rest[1..].starts_with('l') => 2,
            'B' if rest[1..].starts_with('r') => 2,
            '%' if rest.len() >= 3 && rest.as_bytes()[1..3].iter().all(u8::is_ascii_digit) => 3,
            _ => c.len_utf8(),
        };
        out.push(rest[..len].to_string());
        rest = &rest[len..];
        offset += len;
    }
    Ok(out)
}

/// Fraction of truth positions whose token is reproduced at the same position.
pub fn token_accuracy(truth: &TokenSequence, pred: &TokenSequence) -> Result<f64, SeqError> {
    if truth.is_empty() {
        return Err(SeqError::EmptyTruth);
    }
    let hits = truth.tokens.iter().zip(&pred.tokens).filter(|(t, p)| t == p).count();
    Ok(hits as f64 / truth.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Canonicalizer {
    /// Strip surrounding whitespace.
    #[default]
    Trim,
    /// Canonical SMILES of the parsed graph.
    Smiles,
}

impl FromStr for Canonicalizer {
    type Err = SeqError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trim" => Ok(Canonicalizer::Trim),
            "smiles" => Ok(Canonicalizer::Smiles),
            _ => Err(SeqError::UnknownOption { kind: "canonicalizer", value: s.to_string() }),
        }
    }
}

impl Canonicalizer {
    /// `None` when the text cannot be canonicalized; such sequences never match.
    pub fn apply(self, text: &str) -> Option<String> {
        match self {
            Canonicalizer::Trim => Some(text.trim().to_string()),
            Canonicalizer::Smiles => parse_smiles(text.trim()).ok().and_then(|g| canonical_smiles(&g).ok()),
        }
    }
}

pub fn sequence_match(truth: &str, pred: &str, canonicalizer: Canonicalizer) -> bool {
    match (canonicalizer.apply(truth), canonicalizer.apply(pred)) {
        (Some(t), Some(p)) => t == p,
        _ => false,
    }
}

pub fn sequence_accuracy<S: AsRef<str>>(pairs: &[(S, S)], canonicalizer: Canonicalizer) -> Result<f64, SeqError> {
    if pairs.is_empty() {
        return Err(SeqError::EmptyList);
    }
    let hits = pairs.iter().filter(|(t, p)| sequence_match(t.as_ref(), p.as_ref(), canonicalizer)).count();
    Ok(hits as f64 / pairs.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub token_acc: f64,
    pub seq_acc: f64,
    pub n: usize,
}

/// Per-pair result as used by [`evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub token_acc: f64,
    pub exact: bool,
}

/// Scores one pair. A prediction the chosen scheme cannot tokenize (for example an
/// unclosed bracket) falls back to character tokens; a malformed truth is an error.
pub fn score_pair(
    truth: &str,
    pred: &str,
    scheme: TokenScheme,
    canonicalizer: Canonicalizer,
) -> Result<PairScore, SeqError> {
    let t = tokenize(truth, scheme)?;
    let p = tokenize(pred, scheme).or_else(|_| tokenize(pred, TokenScheme::Character))?;
    Ok(PairScore { token_acc: token_accuracy(&t, &p)?, exact: sequence_match(truth, pred, canonicalizer) })
}

/// Corpus report: token accuracy is the mean of per-pair accuracies.
pub fn evaluate<S: AsRef<str>>(
    pairs: &[(S, S)],
    scheme: TokenScheme,
    canonicalizer: Canonicalizer,
) -> Result<AccuracyReport, SeqError> {
    let scores = pairs
        .iter()
        .map(|(t, p)| score_pair(t.as_ref(), p.as_ref(), scheme, canonicalizer))
        .collect::<Result<Vec<_>, _>>()?;
    summarize(&scores)
}

pub fn summarize(scores: &[PairScore]) -> Result<AccuracyReport, SeqError> {
    if scores.is_empty() {
        return Err(SeqError::EmptyList);
    }
    let n = scores.len();
    Ok(AccuracyReport {
        token_acc: stable_mean(scores.iter().map(|s| s.token_acc)).unwrap_or(0.0),
        seq_acc: scores.iter().filter(|s| s.exact).count() as f64 / n as f64,
        n,
    })
}
