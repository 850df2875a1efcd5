//! Contiguously indexed sample sequences (states `Y_k` or inputs `V_k`).

use crate::error::{Error, Result};

/// Vector samples at consecutive integer indices starting at `start_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSequence {
    start_index: i64,
    vectors: Vec<Vec<f64>>,
}

impl SampleSequence {
    pub fn new(start_index: i64, vectors: Vec<Vec<f64>>) -> Self {
        let dim = vectors.first().map_or(0, Vec::len);
        assert!(
            vectors.iter().all(|v| v.len() == dim),
            "samples must share one dimension"
        );
        SampleSequence {
            start_index,
            vectors,
        }
    }

    /// Samples at indices 0, 1, 2, ...
    pub fn from_zero(vectors: Vec<Vec<f64>>) -> Self {
        SampleSequence::new(0, vectors)
    }

    pub fn start_index(&self) -> i64 {
        self.start_index
    }

    pub fn end_index(&self) -> i64 {
        self.start_index + self.vectors.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    pub fn get(&self, index: i64) -> Result<&Vec<f64>> {
        if self.vectors.is_empty() || index < self.start_index || index > self.end_index() {
            return Err(Error::InsufficientHistory { index });
        }
        Ok(&self.vectors[(index - self.start_index) as usize])
    }

    /// Like [`SampleSequence::get`], but indices before the covered range
    /// return the earliest sample (constant extension). Returns the value and
    /// whether extension was applied. Indices past the end stay errors.
    pub fn get_or_backfill(&self, index: i64) -> Result<(&Vec<f64>, bool)> {
        if self.vectors.is_empty() || index > self.end_index() {
            return Err(Error::InsufficientHistory { index });
        }
        if index < self.start_index {
            Ok((&self.vectors[0], true))
        } else {
            Ok((&self.vectors[(index - self.start_index) as usize], false))
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Vec<f64>)> {
        self.vectors
            .iter()
            .enumerate()
            .map(move |(k, v)| (self.start_index + k as i64, v))
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn into_vectors(self) -> Vec<Vec<f64>> {
        self.vectors
    }
}
