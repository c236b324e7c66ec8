//! JSON-lines document records: annotation input, annotated output and gold
//! standard share one shape.
//!
//! Character offsets count Unicode scalar values in the original text,
//! end exclusive.

use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::disambig::Pass;
use crate::entity::EntityId;
use crate::error::{EdlError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub entity: EntityId,
    pub prior: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub surface: String,
    pub char_start: usize,
    pub char_end: usize,
    pub entity: EntityId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass: Option<Pass>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<CandidateRecord>,
}

impl MentionRecord {
    pub fn gold(surface: impl Into<String>, char_start: usize, char_end: usize, entity: EntityId) -> Self {
        MentionRecord {
            surface: surface.into(),
            char_start,
            char_end,
            entity,
            score: None,
            pass: None,
            candidates: Vec::new(),
        }
    }

    pub fn span(&self) -> (usize, usize) {
        (self.char_start, self.char_end)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default)]
    pub mentions: Vec<MentionRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl DocumentRecord {
    pub fn failed(id: Option<String>, error: &EdlError) -> Self {
        DocumentRecord {
            id,
            error: Some(error.to_string()),
            ..Default::default()
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

/// An input document for annotation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InputDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
}

impl From<&DocumentRecord> for Option<InputDocument> {
    fn from(r: &DocumentRecord) -> Self {
        r.text.as_ref().map(|t| InputDocument {
            id: r.id.clone(),
            text: t.clone(),
            language: r.language.clone(),
        })
    }
}

/// A gold-standard document: text plus mention spans with their correct
/// entity (NIL when the span names nothing in the KB).
#[derive(Debug, Clone, PartialEq)]
pub struct GoldDocument {
    pub id: Option<String>,
    pub text: String,
    pub language: Option<String>,
    pub mentions: Vec<MentionRecord>,
}

impl GoldDocument {
    pub fn from_record(record: DocumentRecord, line: usize) -> Result<Self> {
        let text = record
            .text
            .ok_or_else(|| EdlError::Config(format!("gold record on line {line} has no text")))?;
        let mut mentions = record.mentions;
        mentions.sort_by_key(|m| m.span());
        let len = text.chars().count();
        for m in &mentions {
            if m.char_start >= m.char_end || m.char_end > len {
                return Err(EdlError::Config(format!(
                    "gold record on line {line}: span {}..{} outside text of {len} characters",
                    m.char_start, m.char_end
                )));
            }
        }
        if let Some(w) = mentions.windows(2).find(|w| w[0].char_end > w[1].char_start) {
            return Err(EdlError::Config(format!(
                "gold record on line {line}: spans {}..{} and {}..{} overlap",
                w[0].char_start, w[0].char_end, w[1].char_start, w[1].char_end
            )));
        }
        Ok(GoldDocument {
            id: record.id,
            text,
            language: record.language,
            mentions,
        })
    }

    pub fn input(&self) -> InputDocument {
        InputDocument {
            id: self.id.clone(),
            text: self.text.clone(),
            language: self.language.clone(),
        }
    }
}

/// Parses JSON lines, skipping blank ones. Errors carry the line number.
pub fn parse_jsonl<T: serde::de::DeserializeOwned>(reader: impl BufRead, origin: &Path) -> Result<Vec<(usize, T)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| EdlError::io(format!("reading {}", origin.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| EdlError::parse(origin, i + 1, e.to_string()))?;
        out.push((i + 1, value));
    }
    Ok(out)
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let file = std::fs::File::open(path).map_err(|e| EdlError::io(format!("opening {}", path.display()), e))?;
    parse_jsonl(std::io::BufReader::new(file), path)
}

pub fn read_gold(path: &Path) -> Result<Vec<GoldDocument>> {
    read_jsonl::<DocumentRecord>(path)?
        .into_iter()
        .map(|(line, r)| GoldDocument::from_record(r, line))
        .collect()
}

/// Maps byte offsets of one string to character offsets.
pub struct CharIndex {
    /// Byte offset of every char boundary, plus the total length.
    boundaries: Vec<usize>,
}

impl CharIndex {
    pub fn new(text: &str) -> Self {
        let mut boundaries: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        boundaries.push(text.len());
        CharIndex { boundaries }
    }

    pub fn char_offset(&self, byte: usize) -> usize {
        self.boundaries.partition_point(|&b| b < byte)
    }
}
