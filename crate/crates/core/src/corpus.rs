//! Document ingestion, tokenization and the shared term vocabulary.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LsaError, Result};

/// The three quality-in-use indicators a review can be assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuIndicator {
    Effectiveness,
    Efficiency,
    FreedomFromRisk,
}

impl QuIndicator {
    pub const ALL: [QuIndicator; 3] = [
        QuIndicator::Effectiveness,
        QuIndicator::Efficiency,
        QuIndicator::FreedomFromRisk,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QuIndicator::Effectiveness => "effectiveness",
            QuIndicator::Efficiency => "efficiency",
            QuIndicator::FreedomFromRisk => "freedom_from_risk",
        }
    }

    /// Position in [`QuIndicator::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for QuIndicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuIndicator {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        QuIndicator::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| format!("unknown indicator {s:?}"))
    }
}

/// Where a document came from; decides whether a label is required.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Corpus,
    Scale,
    Review,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub source: Source,
    pub label: Option<QuIndicator>,
}

impl Document {
    pub fn corpus(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            source: Source::Corpus,
            label: None,
        }
    }

    pub fn scale(id: impl Into<String>, text: impl Into<String>, label: QuIndicator) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            source: Source::Scale,
            label: Some(label),
        }
    }

    pub fn review(id: impl Into<String>, text: impl Into<String>, label: Option<QuIndicator>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            source: Source::Review,
            label,
        }
    }
}

/// Deterministic tokenizer: lowercase, split on non-alphanumeric runs, keep tokens of
/// at least `min_len` characters, drop purely numeric tokens.
///
/// Stop words are an opt-in filter; the default list is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tokenizer {
    pub min_len: usize,
    pub drop_numeric: bool,
    #[serde(default)]
    pub stop_words: BTreeSet<String>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer {
            min_len: 2,
            drop_numeric: true,
            stop_words: BTreeSet::new(),
        }
    }
}

impl Tokenizer {
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let lowered = text.to_lowercase();
        lowered
            .split(|c: char| !c.is_alphanumeric())
            .filter(|tok| tok.chars().count() >= self.min_len)
            .filter(|tok| !(self.drop_numeric && tok.chars().all(char::is_numeric)))
            .filter(|tok| !self.stop_words.contains(*tok))
            .map(str::to_owned)
            .collect()
    }
}

/// Tokenizes with the default rules.
pub fn tokenize(text: &str) -> Vec<String> {
    Tokenizer::default().tokenize(text)
}

/// Term counts of one document against a vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermCounts {
    /// term index → occurrences, ascending by index.
    pub counts: BTreeMap<usize, u32>,
    /// Tokens that are not in the vocabulary.
    pub oov: usize,
}

/// Sorted term list shared by space construction and folding-in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    doc_frequency: Vec<usize>,
    n_docs: usize,
}

impl Vocabulary {
    /// Reassembles a vocabulary, checking ordering and frequency bounds.
    pub fn from_parts(terms: Vec<String>, doc_frequency: Vec<usize>, n_docs: usize) -> Result<Self> {
        if terms.len() != doc_frequency.len() {
            return Err(LsaError::Dimension(format!(
                "{} terms but {} document frequencies",
                terms.len(),
                doc_frequency.len()
            )));
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LsaError::InvalidArgument(
                "vocabulary terms must be unique and sorted".into(),
            ));
        }
        if let Some(df) = doc_frequency.iter().find(|&&df| df == 0 || df > n_docs) {
            return Err(LsaError::InvalidArgument(format!(
                "document frequency {df} outside 1..={n_docs}"
            )));
        }
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(Vocabulary {
            terms,
            index,
            doc_frequency,
            n_docs,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn doc_frequency(&self, term: usize) -> usize {
        self.doc_frequency[term]
    }

    pub fn doc_frequencies(&self) -> &[usize] {
        &self.doc_frequency
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    /// Counts tokens by term index; unknown tokens are tallied in `oov`.
    pub fn count<S: AsRef<str>>(&self, tokens: &[S]) -> TermCounts {
        let mut out = TermCounts::default();
        for tok in tokens {
            match self.get(tok.as_ref()) {
                Some(i) => *out.counts.entry(i).or_insert(0) += 1,
                None => out.oov += 1,
            }
        }
        out
    }
}

/// Builds the sorted vocabulary and document frequencies over `docs`.
pub fn build_vocabulary(docs: &[Document], tokenizer: &Tokenizer) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(LsaError::EmptyCorpus);
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in docs {
        let distinct: BTreeSet<String> = tokenizer.tokenize(&doc.text).into_iter().collect();
        for term in distinct {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    if df.is_empty() {
        return Err(LsaError::EmptyCorpus);
    }
    let (terms, doc_frequency) = df.into_iter().unzip();
    Vocabulary::from_parts(terms, doc_frequency, docs.len())
}

/// On-disk layout of a documents file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DocumentFormat {
    /// One JSON object per line with `text`, optional `id` and optional `label`.
    #[default]
    JsonLines,
    /// One document per line, no ids or labels.
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelMode {
    /// Labels are ignored.
    #[default]
    None,
    /// Each record may carry a `label` field.
    PerLineField,
}

#[derive(Deserialize)]
struct Record {
    text: String,
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    label: Option<String>,
}

/// Reads a documents file. Blank lines are skipped; missing ids are assigned
/// sequentially as `doc-000001`, `doc-000002`, ... in record order.
pub fn load_documents(
    path: impl AsRef<Path>,
    format: DocumentFormat,
    source: Source,
    label_mode: LabelMode,
) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| LsaError::io(path, e))?;
    read_documents(BufReader::new(file), format, source, label_mode).map_err(|e| match e {
        LsaError::Io { source, .. } => LsaError::io(path, source),
        other => other,
    })
}

/// Same as [`load_documents`] over any buffered reader.
pub fn read_documents<R: BufRead>(
    reader: R,
    format: DocumentFormat,
    source: Source,
    label_mode: LabelMode,
) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line_no = lineno + 1;
        let line = line.map_err(|e| LsaError::io("<reader>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, text, raw_label) = match format {
            DocumentFormat::Text => (None, line, None),
            DocumentFormat::JsonLines => {
                let rec: Record = serde_json::from_str(&line).map_err(|e| LsaError::Format {
                    line: line_no,
                    message: e.to_string(),
                })?;
                (rec.id, rec.text, rec.label)
            }
        };
        let label = match (label_mode, raw_label) {
            (LabelMode::PerLineField, Some(raw)) => Some(
                raw.parse::<QuIndicator>()
                    .map_err(|message| LsaError::Label { line: line_no, message })?,
            ),
            _ => None,
        };
        match (source, label) {
            (Source::Scale, None) => {
                return Err(LsaError::Label {
                    line: line_no,
                    message: "measurement scale record has no label".into(),
                })
            }
            (Source::Corpus, Some(_)) => {
                return Err(LsaError::Label {
                    line: line_no,
                    message: "corpus documents must not carry a label".into(),
                })
            }
            _ => {}
        }
        let id = id.unwrap_or_else(|| format!("doc-{:06}", docs.len() + 1));
        if !seen.insert(id.clone()) {
            return Err(LsaError::Format {
                line: line_no,
                message: format!("duplicate id {id:?}"),
            });
        }
        docs.push(Document {
            id,
            text,
            source,
            label,
        });
    }
    Ok(docs)
}
