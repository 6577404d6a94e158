use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Ordered set of country codes indexing every derived matrix.
///
/// Codes are opaque tokens kept in lexicographic order; the index of a code
/// is its row/column in every matrix built over this roster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountryRoster {
    codes: Vec<String>,
    labels: BTreeMap<String, String>,
}

impl CountryRoster {
    /// Canonicalizes (sorts, deduplicates) the given codes.
    pub fn new<I, S>(codes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = codes.into_iter().map(Into::into).collect();
        Self {
            codes: set.into_iter().collect(),
            labels: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    pub fn code(&self, index: usize) -> &str {
        &self.codes[index]
    }

    pub fn index_of(&self, code: &str) -> Option<usize> {
        self.codes.binary_search_by(|c| c.as_str().cmp(code)).ok()
    }

    pub fn require(&self, code: &str) -> Result<usize> {
        self.index_of(code)
            .ok_or_else(|| Error::UnknownCountry(code.to_string()))
    }

    /// Display label for a code, if one was attached.
    pub fn label(&self, code: &str) -> Option<&str> {
        self.labels.get(code).map(String::as_str)
    }

    /// Label if known, else the code itself.
    pub fn display_name(&self, index: usize) -> &str {
        let code = self.code(index);
        self.label(code).unwrap_or(code)
    }

    pub fn labels(&self) -> &BTreeMap<String, String> {
        &self.labels
    }

    /// Attaches labels for codes present in the roster; others are ignored.
    pub fn with_labels(mut self, labels: &BTreeMap<String, String>) -> Self {
        for (code, label) in labels {
            if self.index_of(code).is_some() {
                self.labels.insert(code.clone(), label.clone());
            }
        }
        self
    }

    /// Restriction to the given indices (which must be ascending), keeping labels.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        let codes: Vec<String> = indices.iter().map(|&i| self.codes[i].clone()).collect();
        let labels = codes
            .iter()
            .filter_map(|c| self.labels.get(c).map(|l| (c.clone(), l.clone())))
            .collect();
        Self { codes, labels }
    }
}
