//! JSONL ingestion and serialization.
//!
//! Corpus files are UTF-8 JSONL, one record per line, with the record kind
//! in a `kind` field. The ground-truth sidecar uses the same convention.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::synth::{GroundTruth, TruthRecord};
use super::{Actor, Corpus, DocumentRecord, EngagementItem, Publisher};
use crate::error::{Error, Result};

/// One line of a corpus file.
///
/// The record kind lives in a `kind` field and the payload under `data`,
/// so an item's own `kind` field does not collide with the discriminator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "lowercase")]
pub enum Record {
    Document(DocumentRecord),
    Item(EngagementItem),
    Actor(Actor),
    Publisher(Publisher),
}

/// Loads a JSONL corpus file, resolving all cross-references.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let file = File::open(path.as_ref())?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: idx + 1,
            msg: e.to_string(),
        })?;
        records.push(record);
    }
    Corpus::from_records(records)
}

/// Writes the corpus in canonical order; equal corpora produce
/// byte-identical files.
pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    let mut writer = BufWriter::new(file);
    for record in corpus.to_records() {
        serde_json::to_writer(&mut writer, &record)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

/// Loads a ground-truth sidecar written by the synthetic generator.
pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let file = File::open(path.as_ref())?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TruthRecord =
            serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
                line: idx + 1,
                msg: e.to_string(),
            })?;
        records.push(record);
    }
    Ok(GroundTruth::from_records(records))
}

/// Writes the ground-truth sidecar as JSONL.
pub fn save_ground_truth(truth: &GroundTruth, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    let mut writer = BufWriter::new(file);
    for record in truth.to_records() {
        serde_json::to_writer(&mut writer, &record)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}
