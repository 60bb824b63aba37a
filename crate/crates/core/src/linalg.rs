//! Exact sparse row reduction over the rationals.
//!
//! Rows are kept in reduced row-echelon form at all times with the pivot of each row
//! at its *largest* column. A new row therefore needs at most one subtraction per
//! pivot column it touches, which keeps insertion cheap when the relation rows are
//! short, as they are for both quadratic algebra relations and 4T rows.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::scalar::Rational;

/// Sorted `(column, coefficient)` pairs with nonzero coefficients.
pub type SparseRow = Vec<(usize, Rational)>;

#[derive(Debug, Clone, Default)]
pub struct Echelon {
    ncols: usize,
    /// pivot column → row (pivot coefficient 1, no other pivot columns present)
    rows: BTreeMap<usize, SparseRow>,
}

/// `a + c·b` on sorted sparse rows.
fn axpy(a: &SparseRow, c: &Rational, b: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, c * &b[j].1));
            j += 1;
        } else {
            let v = &a[i].1 + c * &b[j].1;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Sorts and merges a row given in arbitrary order.
pub fn normalize_row(mut entries: Vec<(usize, Rational)>) -> SparseRow {
    entries.sort_by_key(|(c, _)| *c);
    let mut out: SparseRow = Vec::with_capacity(entries.len());
    for (c, v) in entries {
        match out.last_mut() {
            Some((last, acc)) if *last == c => *acc += v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    out
}

impl Echelon {
    pub fn new(ncols: usize) -> Self {
        Self {
            ncols,
            rows: BTreeMap::new(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.rows.contains_key(&col)
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn row(&self, pivot: usize) -> Option<&SparseRow> {
        self.rows.get(&pivot)
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &SparseRow)> {
        self.rows.iter().map(|(p, r)| (*p, r))
    }

    /// Eliminates every pivot column from `row`.
    pub fn reduce(&self, row: &SparseRow) -> SparseRow {
        let mut row = row.clone();
        // Subtracting a reduced row only introduces non-pivot columns, so one pass over
        // the original pivot entries suffices.
        let hits: Vec<(usize, Rational)> = row
            .iter()
            .filter(|(c, _)| self.rows.contains_key(c))
            .cloned()
            .collect();
        for (c, v) in hits {
            row = axpy(&row, &-v, &self.rows[&c]);
        }
        row
    }

    /// Adds a row to the span; returns whether the rank grew.
    pub fn insert(&mut self, row: SparseRow) -> bool {
        debug_assert!(row.iter().all(|(c, _)| *c < self.ncols));
        let mut row = self.reduce(&row);
        let Some((pivot, lead)) = row.last().cloned() else {
            return false;
        };
        if !lead.is_one() {
            let inv = lead.recip();
            for (_, v) in row.iter_mut() {
                *v *= &inv;
            }
        }
        let dependents: Vec<usize> = self
            .rows
            .range(pivot + 1..)
            .filter(|(_, r)| r.binary_search_by_key(&pivot, |(c, _)| *c).is_ok())
            .map(|(p, _)| *p)
            .collect();
        for p in dependents {
            let existing = &self.rows[&p];
            let idx = existing
                .binary_search_by_key(&pivot, |(c, _)| *c)
                .expect("dependent row holds pivot");
            let c = -existing[idx].1.clone();
            let updated = axpy(existing, &c, &row);
            self.rows.insert(p, updated);
        }
        self.rows.insert(pivot, row);
        true
    }

    /// Columns that are not pivots, ascending: a basis of the quotient.
    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.ncols).filter(|c| !self.rows.contains_key(c)).collect()
    }
}

/// Rank of a list of rows, by exact elimination.
pub fn rank(ncols: usize, rows: impl IntoIterator<Item = SparseRow>) -> usize {
    let mut e = Echelon::new(ncols);
    for r in rows {
        e.insert(r);
    }
    e.rank()
}
