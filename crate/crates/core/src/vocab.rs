use std::collections::HashMap;

use crate::error::{Error, Result};

/// Bijection between term strings and dense ids `0..len`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary in the given order, rejecting duplicates.
    pub fn from_terms<I, S>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Self::new();
        for t in terms {
            vocab.insert(t.into())?;
        }
        Ok(vocab)
    }

    /// Appends a new term and returns its id.
    pub fn insert(&mut self, term: String) -> Result<usize> {
        if self.index.contains_key(&term) {
            return Err(Error::DuplicateTerm(term));
        }
        let id = self.terms.len();
        self.index.insert(term.clone(), id);
        self.terms.push(term);
        Ok(id)
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: usize) -> Option<&str> {
        self.terms.get(id).map(String::as_str)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.index.contains_key(term)
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

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str)> {
        self.terms.iter().enumerate().map(|(i, t)| (i, t.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_dense_and_stable() {
        let v = Vocabulary::from_terms(["b", "a", "c"]).unwrap();
        assert_eq!(v.id("b"), Some(0));
        assert_eq!(v.id("c"), Some(2));
        assert_eq!(v.term(1), Some("a"));
        assert_eq!(v.id("z"), None);
    }

    #[test]
    fn duplicate_rejected() {
        assert!(matches!(
            Vocabulary::from_terms(["a", "a"]),
            Err(Error::DuplicateTerm(t)) if t == "a"
        ));
    }
}
