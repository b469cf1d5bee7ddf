//! Affect lexicon: word -> affect-category membership.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::normalize_token;

/// Word list grouped into ordered affect categories. Lookup is
/// case-insensitive after token normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct AffectLexicon {
    categories: Vec<String>,
    entries: BTreeMap<String, Vec<usize>>,
}

const DEFAULT_LEXICON: &str = include_str!("../../assets/affect_lexicon.tsv");

impl AffectLexicon {
    /// The bundled eight-category lexicon.
    pub fn bundled() -> AffectLexicon {
        Self::parse(DEFAULT_LEXICON).expect("bundled lexicon is well-formed")
    }

    /// Parses `category<TAB>word` lines. Blank lines and `#` comments are
    /// skipped. Category order follows first appearance.
    pub fn parse(text: &str) -> Result<AffectLexicon> {
        let mut categories: Vec<String> = Vec::new();
        let mut entries: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (category, word) = line.split_once('\t').ok_or_else(|| Error::MalformedLine {
                line: idx + 1,
                msg: "expected `category<TAB>word`".to_string(),
            })?;
            let category = category.trim();
            let word = normalize_token(word.trim());
            if category.is_empty() || word.is_empty() {
                return Err(Error::MalformedLine {
                    line: idx + 1,
                    msg: "empty category or word".to_string(),
                });
            }
            let cat_idx = match categories.iter().position(|c| c == category) {
                Some(i) => i,
                None => {
                    categories.push(category.to_string());
                    categories.len() - 1
                }
            };
            let cats = entries.entry(word).or_default();
            if !cats.contains(&cat_idx) {
                cats.push(cat_idx);
                cats.sort_unstable();
            }
        }
        if categories.is_empty() {
            return Err(Error::InvalidConfig("lexicon has no categories".to_string()));
        }
        Ok(AffectLexicon {
            categories,
            entries,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<AffectLexicon> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Number of affect categories `C`.
    pub fn n_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn category_name(&self, idx: usize) -> &str {
        &self.categories[idx]
    }

    /// Category indices of a normalized token; empty if the token is not in
    /// the lexicon.
    pub fn categories_of(&self, normalized_token: &str) -> &[usize] {
        self.entries
            .get(normalized_token)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn contains(&self, normalized_token: &str) -> bool {
        self.entries.contains_key(normalized_token)
    }

    /// Words of one category, in lexicographic order.
    pub fn words_in(&self, cat_idx: usize) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, cats)| cats.contains(&cat_idx))
            .map(|(w, _)| w.as_str())
            .collect()
    }

    /// SHA-256 over the canonical `category<TAB>word` listing; persisted
    /// with trained models so a lexicon swap is detectable.
    pub fn sha256(&self) -> String {
        let mut hasher = Sha256::new();
        for (word, cats) in &self.entries {
            for cat in cats {
                hasher.update(self.categories[*cat].as_bytes());
                hasher.update(b"\t");
                hasher.update(word.as_bytes());
                hasher.update(b"\n");
            }
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
