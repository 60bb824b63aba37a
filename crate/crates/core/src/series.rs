//! Truncated graded noncommutative power series in a finite alphabet.
//!
//! Storage is sparse: one ordered map from words to nonzero coefficients. Words are
//! ordered by length first, then lexicographically on symbol indices (deglex), so the
//! graded components are contiguous ranges of the map.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A word over an alphabet, as symbol indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<u16>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn letter(k: usize) -> Self {
        Self(vec![k as u16])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u16] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<u16>> for Word {
    fn from(v: Vec<u16>) -> Self {
        Word(v)
    }
}

/// Ordered generator names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new(symbols: Vec<String>) -> Result<Arc<Self>> {
        let mut sorted = symbols.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != symbols.len() {
            return Err(Error::Precondition("alphabet symbols must be distinct".into()));
        }
        Ok(Arc::new(Self { symbols }))
    }

    /// `Z_ij`, `1 ≤ i < j ≤ n`, ordered lexicographically by `(i, j)`.
    pub fn drinfeld_kohno(n: usize) -> Arc<Self> {
        let mut symbols = Vec::new();
        for i in 1..=n {
            for j in (i + 1)..=n {
                symbols.push(format!("Z{i}_{j}"));
            }
        }
        if n < 10 {
            for s in symbols.iter_mut() {
                *s = s.replace('_', "");
            }
        }
        Arc::new(Self { symbols })
    }

    /// `{A, B}`, the alphabet of the associator.
    pub fn two_letter() -> Arc<Self> {
        Arc::new(Self {
            symbols: vec!["A".into(), "B".into()],
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == name)
    }

    pub fn render_word(&self, word: &Word) -> String {
        if word.is_empty() {
            return "1".into();
        }
        word.0
            .iter()
            .map(|&k| self.symbols[k as usize].as_str())
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// `Σ c · (left ⊗ right)`.
pub type Tensor<S> = BTreeMap<(Word, Word), S>;

#[derive(Debug, Clone, PartialEq)]
pub struct NCSeries<S> {
    alphabet: Arc<Alphabet>,
    truncation: usize,
    terms: BTreeMap<Word, S>,
}

impl<S: Scalar> NCSeries<S> {
    pub fn zero(alphabet: Arc<Alphabet>, truncation: usize) -> Self {
        Self {
            alphabet,
            truncation,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(alphabet: Arc<Alphabet>, truncation: usize) -> Self {
        Self::monomial(alphabet, truncation, Word::empty(), S::one())
    }

    pub fn generator(alphabet: Arc<Alphabet>, truncation: usize, k: usize) -> Self {
        assert!(k < alphabet.len(), "generator index out of range");
        Self::monomial(alphabet, truncation, Word::letter(k), S::one())
    }

    pub fn monomial(alphabet: Arc<Alphabet>, truncation: usize, word: Word, c: S) -> Self {
        let mut s = Self::zero(alphabet, truncation);
        s.add_term(word, c);
        s
    }

    /// Builds a series from arbitrary terms; repeated words are summed, words longer
    /// than the truncation are dropped.
    pub fn from_terms(
        alphabet: Arc<Alphabet>,
        truncation: usize,
        terms: impl IntoIterator<Item = (Word, S)>,
    ) -> Self {
        let mut s = Self::zero(alphabet, truncation);
        for (w, c) in terms {
            s.add_term(w, c);
        }
        s
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn terms(&self) -> &BTreeMap<Word, S> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Word, S> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, word: &Word) -> S {
        self.terms.get(word).cloned().unwrap_or_else(S::zero)
    }

    pub fn constant_term(&self) -> S {
        self.coefficient(&Word::empty())
    }

    /// Adds `c · word` in place, keeping storage sparse.
    pub fn add_term(&mut self, word: Word, c: S) {
        if word.len() > self.truncation || c.is_zero() {
            return;
        }
        match self.terms.entry(word) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.truncation != other.truncation {
            return Err(Error::SeriesMismatch(format!(
                "truncation {} vs {}",
                self.truncation, other.truncation
            )));
        }
        if self.alphabet != other.alphabet {
            return Err(Error::SeriesMismatch("alphabets differ".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.alphabet.clone(), self.truncation);
        }
        let mut out = Self::zero(self.alphabet.clone(), self.truncation);
        for (w, a) in &self.terms {
            out.add_term(w.clone(), a.clone() * c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    /// Concatenation product, discarding words longer than the truncation.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let r = self.truncation;
        let mut out = Self::zero(self.alphabet.clone(), r);
        for (a, ca) in &self.terms {
            let room = r - a.len();
            for (b, cb) in other.terms.iter().take_while(|(b, _)| b.len() <= room) {
                out.add_term(a.concat(b), ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    /// `x y - y x`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// The same series with a different truncation (higher degrees dropped).
    pub fn truncate(&self, truncation: usize) -> Self {
        Self::from_terms(
            self.alphabet.clone(),
            truncation,
            self.terms.iter().map(|(w, c)| (w.clone(), c.clone())),
        )
    }

    /// `Σ x^k / k!`; requires a vanishing constant term.
    pub fn exp(&self) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(Error::Precondition("exp needs a zero constant term".into()));
        }
        let mut out = Self::one(self.alphabet.clone(), self.truncation);
        let mut power = out.clone();
        for k in 1..=self.truncation {
            power = power.mul(self)?.scale(&S::from_ratio(1, k as i64));
            out = out.add(&power)?;
        }
        Ok(out)
    }

    /// `Σ (-1)^{k+1} (y - 1)^k / k`; requires constant term one.
    pub fn log(&self) -> Result<Self> {
        if self.constant_term() != S::one() {
            return Err(Error::Precondition("log needs constant term 1".into()));
        }
        let unit = Self::one(self.alphabet.clone(), self.truncation);
        let u = self.sub(&unit)?;
        let mut out = Self::zero(self.alphabet.clone(), self.truncation);
        let mut power = unit;
        for k in 1..=self.truncation {
            power = power.mul(&u)?;
            let sign = if k % 2 == 1 { 1 } else { -1 };
            out = out.add(&power.scale(&S::from_ratio(sign, k as i64)))?;
        }
        Ok(out)
    }

    /// Multiplicative inverse of a series with constant term one.
    pub fn inverse(&self) -> Result<Self> {
        if self.constant_term() != S::one() {
            return Err(Error::Precondition("inverse needs constant term 1".into()));
        }
        let unit = Self::one(self.alphabet.clone(), self.truncation);
        let u = self.sub(&unit)?.neg();
        let mut out = unit.clone();
        let mut power = unit;
        for _ in 1..=self.truncation {
            power = power.mul(&u)?;
            out = out.add(&power)?;
        }
        Ok(out)
    }

    /// Relabels symbols through `map` (old index → new index in `alphabet`).
    pub fn relabel(&self, alphabet: Arc<Alphabet>, map: &[usize]) -> Self {
        Self::from_terms(
            alphabet,
            self.truncation,
            self.terms.iter().map(|(w, c)| {
                (
                    Word(w.0.iter().map(|&k| map[k as usize] as u16).collect()),
                    c.clone(),
                )
            }),
        )
    }

    /// Coproduct with every symbol primitive: each word splits into complementary
    /// subwords in all `2^len` ways.
    pub fn coproduct(&self) -> Tensor<S> {
        let mut out: Tensor<S> = BTreeMap::new();
        for (w, c) in &self.terms {
            for (left, right) in shuffle_splits(w) {
                add_tensor_term(&mut out, left, right, c.clone());
            }
        }
        out
    }

    /// `x ⊗ x`, keeping pairs of total degree at most the truncation.
    pub fn tensor_square(&self) -> Tensor<S> {
        let mut out: Tensor<S> = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &self.terms {
                if a.len() + b.len() <= self.truncation {
                    add_tensor_term(&mut out, a.clone(), b.clone(), ca.clone() * cb.clone());
                }
            }
        }
        out
    }

    /// Whether `‖Δx − x ⊗ x‖_∞ ≤ tol`.
    pub fn is_grouplike(&self, tol: f64) -> Result<bool> {
        if (self.constant_term() - S::one()).magnitude() > tol {
            return Err(Error::Precondition("grouplike test needs constant term 1".into()));
        }
        Ok(tensor_distance(&self.coproduct(), &self.tensor_square()) <= tol)
    }

    pub fn graded_component(&self, d: usize) -> Self {
        Self::from_terms(
            self.alphabet.clone(),
            self.truncation,
            self.terms
                .iter()
                .filter(|(w, _)| w.len() == d)
                .map(|(w, c)| (w.clone(), c.clone())),
        )
    }

    pub fn sup_norm(&self) -> f64 {
        self.terms.values().map(S::magnitude).fold(0.0, f64::max)
    }

    /// Sup-norm of each graded component, index = degree.
    pub fn degree_norms(&self) -> Vec<f64> {
        let mut norms = vec![0.0; self.truncation + 1];
        for (w, c) in &self.terms {
            norms[w.len()] = f64::max(norms[w.len()], c.magnitude());
        }
        norms
    }

    /// Smallest `d ≥ 1` whose component of `x − 1` exceeds `tol` in sup-norm.
    pub fn leading_degree(&self, tol: f64) -> Option<usize> {
        self.degree_norms()
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, &norm)| norm > tol)
            .map(|(d, _)| d)
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> NCSeries<T> {
        NCSeries::from_terms(
            self.alphabet.clone(),
            self.truncation,
            self.terms.iter().map(|(w, c)| (w.clone(), f(c))),
        )
    }

    /// `{"alphabet": [...], "truncation": r, "degrees": [[{word, ...scalar}...], ...]}`.
    pub fn to_json(&self) -> Value {
        let mut degrees = vec![Vec::new(); self.truncation + 1];
        for (w, c) in &self.terms {
            let mut entry = c.to_json();
            entry["word"] = json!(w.0);
            degrees[w.len()].push(entry);
        }
        json!({
            "alphabet": self.alphabet.symbols(),
            "truncation": self.truncation,
            "degrees": degrees,
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |message: &str| Error::Parse {
            position: 0,
            message: message.to_string(),
        };
        let symbols = value
            .get("alphabet")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing alphabet"))?
            .iter()
            .map(|s| s.as_str().map(str::to_string).ok_or_else(|| bad("bad symbol")))
            .collect::<Result<Vec<_>>>()?;
        let alphabet = Alphabet::new(symbols)?;
        let truncation = value
            .get("truncation")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing truncation"))? as usize;
        let degrees = value
            .get("degrees")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing degrees"))?;
        let mut out = Self::zero(alphabet.clone(), truncation);
        for (d, entries) in degrees.iter().enumerate() {
            for entry in entries.as_array().ok_or_else(|| bad("bad degree list"))? {
                let word: Vec<u16> = entry
                    .get("word")
                    .and_then(Value::as_array)
                    .ok_or_else(|| bad("missing word"))?
                    .iter()
                    .map(|k| k.as_u64().map(|k| k as u16).ok_or_else(|| bad("bad letter")))
                    .collect::<Result<_>>()?;
                if word.len() != d || word.iter().any(|&k| k as usize >= alphabet.len()) {
                    return Err(bad("word does not fit its degree or alphabet"));
                }
                out.add_term(Word(word), S::from_json(entry)?);
            }
        }
        Ok(out)
    }
}

impl<S: Scalar> fmt::Display for NCSeries<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| format!("{} {}", c.render(), self.alphabet.render_word(w)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn add_tensor_term<S: Scalar>(t: &mut Tensor<S>, left: Word, right: Word, c: S) {
    if c.is_zero() {
        return;
    }
    let key = (left, right);
    let sum = match t.remove(&key) {
        Some(old) => old + c,
        None => c,
    };
    if !sum.is_zero() {
        t.insert(key, sum);
    }
}

/// All `(subword, complementary subword)` pairs, with multiplicity.
pub fn shuffle_splits(word: &Word) -> Vec<(Word, Word)> {
    let d = word.len();
    assert!(d < 32, "word too long to split");
    (0u32..(1 << d))
        .map(|mask| {
            let mut left = Vec::new();
            let mut right = Vec::new();
            for (k, &letter) in word.0.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    left.push(letter);
                } else {
                    right.push(letter);
                }
            }
            (Word(left), Word(right))
        })
        .collect()
}

/// Sup-norm of `a − b`.
pub fn tensor_distance<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, x) in a {
        let d = match b.get(k) {
            Some(y) => (x.clone() - y.clone()).magnitude(),
            None => x.magnitude(),
        };
        worst = worst.max(d);
    }
    for (k, y) in b {
        if !a.contains_key(k) {
            worst = worst.max(y.magnitude());
        }
    }
    worst
}
