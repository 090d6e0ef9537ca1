//! Sparse exact row reduction.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::Rational;

pub type SparseVec<K> = BTreeMap<K, Rational>;

/// Echelon basis where every row is normalised to coefficient 1 on its
/// smallest key (its pivot) and no two rows share a pivot.
#[derive(Debug, Clone)]
pub struct Reducer<K: Ord + Clone> {
    rows: BTreeMap<K, SparseVec<K>>,
}

impl<K: Ord + Clone> Default for Reducer<K> {
    fn default() -> Self {
        Reducer { rows: BTreeMap::new() }
    }
}

impl<K: Ord + Clone> Reducer<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Eliminates every pivot key from `v`. The result depends only on the
    /// class of `v` modulo the row span.
    pub fn reduce(&self, mut v: SparseVec<K>) -> SparseVec<K> {
        let mut cursor: Option<K> = None;
        loop {
            let next = v
                .iter()
                .filter(|(k, _)| cursor.as_ref().is_none_or(|c| *k > c))
                .find(|(k, _)| self.rows.contains_key(*k))
                .map(|(k, c)| (k.clone(), c.clone()));
            let Some((k, c)) = next else {
                return v;
            };
            for (key, x) in &self.rows[&k] {
                let e = v.entry(key.clone()).or_insert_with(Rational::zero);
                *e -= &c * x;
                if e.is_zero() {
                    v.remove(key);
                }
            }
            cursor = Some(k);
        }
    }

    /// Adds `v` to the span; returns whether the rank grew.
    pub fn insert(&mut self, v: SparseVec<K>) -> bool {
        let r = self.reduce(v);
        let Some((pivot, lead)) = r.iter().next().map(|(k, c)| (k.clone(), c.clone())) else {
            return false;
        };
        let row = r.into_iter().map(|(k, c)| (k, c / &lead)).collect();
        self.rows.insert(pivot, row);
        true
    }

    pub fn contains(&self, v: SparseVec<K>) -> bool {
        self.reduce(v).is_empty()
    }
}
