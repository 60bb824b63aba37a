//! The truncated Drinfeld–Kohno algebra `U(n)_r`: the free algebra on `Z_ij`
//! modulo the infinitesimal braid relations, truncated above degree `r`.
//!
//! Normal forms are computed degree by degree. Level `d` stores, for every word
//! `u·g` with `u` a normal word of degree `d − 1` and `g` a generator, either its index
//! among the normal words of degree `d` or its reduction to a combination of them.
//! The reduction comes from exact row reduction of the images of `m·ρ` (with `m`
//! normal of degree `d − 2` and `ρ` a quadratic relation), pivoting on the largest
//! word in deglex order. Any word of degree `d` then reduces by first normalizing its
//! prefix and looking up the last letter.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::braid::Permutation;
use crate::error::{Error, Result};
use crate::linalg::{normalize_row, Echelon};
use crate::scalar::{format_rational, parse_rational, rational_to_f64, Rational, Scalar};
use crate::series::{Alphabet, NCSeries, Tensor, Word};

pub const CACHE_FORMAT_VERSION: u32 = 1;
pub const CACHE_ENV: &str = "KZBRAID_CACHE_DIR";

/// Index of `Z_ij` (0-based `i < j`) in the lexicographic generator order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// The pair `(i, j)`, 0-based, of every generator in order.
pub fn generator_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Generators and quadratic relations of `U(n)`.
#[derive(Debug, Clone)]
pub struct DkPresentation {
    n: usize,
    alphabet: Arc<Alphabet>,
    relations: Vec<NCSeries<Rational>>,
}

impl DkPresentation {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidStrandCount(n));
        }
        let alphabet = Alphabet::drinfeld_kohno(n);
        let z = |i: usize, j: usize| {
            NCSeries::<Rational>::generator(alphabet.clone(), 2, pair_index(n, i, j))
        };
        let bracket = |a: &NCSeries<Rational>, b: &NCSeries<Rational>| a.bracket(b).unwrap();
        let pairs = generator_pairs(n);
        let mut relations = Vec::new();
        for (x, &(i, j)) in pairs.iter().enumerate() {
            for &(k, l) in &pairs[x + 1..] {
                if i != k && i != l && j != k && j != l {
                    relations.push(bracket(&z(i, j), &z(k, l)));
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    relations.push(bracket(&z(i, j).add(&z(j, k)).unwrap(), &z(i, k)));
                    relations.push(bracket(&z(i, k).add(&z(i, j)).unwrap(), &z(j, k)));
                }
            }
        }
        Ok(Self {
            n,
            alphabet,
            relations,
        })
    }

    pub fn strands(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn relations(&self) -> &[NCSeries<Rational>] {
        &self.relations
    }

    pub fn generators(&self) -> usize {
        self.alphabet.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_n: usize,
    pub max_degree: usize,
    /// Upper bound on `(#generators)^degree`.
    pub max_monomials: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_n: 5,
            max_degree: 5,
            max_monomials: 100_000,
        }
    }
}

impl Limits {
    pub fn check(&self, n: usize, degree: usize) -> Result<()> {
        if n > self.max_n {
            return Err(Error::SizeGuard(format!(
                "n = {n} exceeds the configured maximum {}",
                self.max_n
            )));
        }
        if degree > self.max_degree {
            return Err(Error::SizeGuard(format!(
                "degree {degree} exceeds the configured maximum {}",
                self.max_degree
            )));
        }
        let g = (n * n.saturating_sub(1) / 2) as u64;
        let monomials = g.checked_pow(degree as u32).unwrap_or(u64::MAX);
        if monomials > self.max_monomials {
            return Err(Error::SizeGuard(format!(
                "{monomials} monomials at n = {n}, degree {degree} exceed {}",
                self.max_monomials
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Image {
    Normal(usize),
    Reduced(Vec<(usize, Rational, f64)>),
}

/// Echelon data for one degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    n: usize,
    degree: usize,
    normal_words: Vec<Word>,
    index: HashMap<Word, usize>,
    /// Indexed by `u * g + gen` for `u` a normal word of degree `degree − 1`.
    columns: Vec<Image>,
}

impl Level {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn strands(&self) -> usize {
        self.n
    }

    /// Dimension of `U(n)` in this degree.
    pub fn dim(&self) -> usize {
        self.normal_words.len()
    }

    pub fn normal_words(&self) -> &[Word] {
        &self.normal_words
    }

    pub fn index_of(&self, word: &Word) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Rank of the degree-`d` part of the relation ideal in the free algebra.
    pub fn relation_rank(&self) -> usize {
        let g = self.n * (self.n - 1) / 2;
        g.pow(self.degree as u32) - self.dim()
    }

    /// Words that are leading monomials of the echelon rows (reducible words whose
    /// prefix is normal).
    pub fn pivot_words(&self, previous: &Level) -> Vec<Word> {
        let g = self.n * (self.n - 1) / 2;
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, img)| matches!(img, Image::Reduced(_)))
            .map(|(c, _)| previous.normal_words[c / g].concat(&Word::letter(c % g)))
            .collect()
    }

    fn base(n: usize) -> Self {
        let w = Word::empty();
        Self {
            n,
            degree: 0,
            index: HashMap::from([(w.clone(), 0)]),
            normal_words: vec![w],
            columns: Vec::new(),
        }
    }

    fn first(n: usize) -> Self {
        let g = n * (n - 1) / 2;
        let normal_words: Vec<Word> = (0..g).map(Word::letter).collect();
        Self {
            n,
            degree: 1,
            index: normal_words.iter().cloned().enumerate().map(|(k, w)| (w, k)).collect(),
            normal_words,
            columns: (0..g).map(Image::Normal).collect(),
        }
    }

    fn build(presentation: &DkPresentation, prev: &Level, prev2: &Level) -> Self {
        let n = presentation.n;
        let g = presentation.generators();
        let d = prev.degree + 1;
        let ncols = prev.dim() * g;
        let mut echelon = Echelon::new(ncols);
        for m in 0..prev2.dim() {
            for rho in presentation.relations() {
                let mut entries = Vec::new();
                for (w, c) in rho.terms() {
                    let (x, y) = (w.0[0] as usize, w.0[1] as usize);
                    match &prev.columns[m * g + x] {
                        Image::Normal(u) => entries.push((u * g + y, c.clone())),
                        Image::Reduced(terms) => {
                            for (u, q, _) in terms {
                                entries.push((u * g + y, c * q));
                            }
                        }
                    }
                }
                echelon.insert(normalize_row(entries));
            }
        }
        Self::from_echelon(n, d, prev, &echelon)
    }

    fn from_echelon(n: usize, degree: usize, prev: &Level, echelon: &Echelon) -> Self {
        let g = n * (n - 1) / 2;
        let free = echelon.free_columns();
        let mut column_to_normal = vec![usize::MAX; echelon.ncols()];
        let mut normal_words = Vec::with_capacity(free.len());
        for (k, &c) in free.iter().enumerate() {
            column_to_normal[c] = k;
            normal_words.push(prev.normal_words[c / g].concat(&Word::letter(c % g)));
        }
        let columns = (0..echelon.ncols())
            .map(|c| match echelon.row(c) {
                None => Image::Normal(column_to_normal[c]),
                Some(row) => Image::Reduced(
                    row[..row.len() - 1]
                        .iter()
                        .map(|(col, q)| {
                            let q = -q.clone();
                            let f = rational_to_f64(&q);
                            (column_to_normal[*col], q, f)
                        })
                        .collect(),
                ),
            })
            .collect();
        Self {
            n,
            degree,
            index: normal_words.iter().cloned().enumerate().map(|(k, w)| (w, k)).collect(),
            normal_words,
            columns,
        }
    }

    fn to_file(&self, prev: &Level) -> CacheFile {
        let g = self.n * (self.n - 1) / 2;
        let mut pivots = Vec::new();
        let mut rows = Vec::new();
        for (c, img) in self.columns.iter().enumerate() {
            if let Image::Reduced(terms) = img {
                pivots.push(prev.normal_words[c / g].concat(&Word::letter(c % g)).0);
                rows.push(
                    terms
                        .iter()
                        .map(|(k, q, _)| (*k, format_rational(q)))
                        .collect(),
                );
            }
        }
        let payload = CachePayload {
            normal_words: self.normal_words.iter().map(|w| w.0.clone()).collect(),
            pivots,
            rows,
        };
        CacheFile {
            format_version: CACHE_FORMAT_VERSION,
            n: self.n,
            degree: self.degree,
            checksum: payload.checksum(),
            payload,
        }
    }

    fn from_file(file: &CacheFile, prev: &Level) -> Option<Self> {
        let g = file.n * (file.n - 1) / 2;
        if file.format_version != CACHE_FORMAT_VERSION || file.checksum != file.payload.checksum() {
            return None;
        }
        let ncols = prev.dim() * g;
        let normal_words: Vec<Word> = file.payload.normal_words.iter().cloned().map(Word).collect();
        let index: HashMap<Word, usize> =
            normal_words.iter().cloned().enumerate().map(|(k, w)| (w, k)).collect();
        let mut columns: Vec<Option<Image>> = vec![None; ncols];
        let column_of = |w: &[u16]| -> Option<usize> {
            let (last, prefix) = w.split_last()?;
            Some(prev.index_of(&Word(prefix.to_vec()))? * g + *last as usize)
        };
        for w in &normal_words {
            columns[column_of(&w.0)?] = Some(Image::Normal(index[w]));
        }
        for (pivot, row) in file.payload.pivots.iter().zip(&file.payload.rows) {
            let terms = row
                .iter()
                .map(|(k, text)| {
                    let q = parse_rational(text).ok()?;
                    (*k < normal_words.len()).then(|| (*k, q.clone(), rational_to_f64(&q)))
                })
                .collect::<Option<Vec<_>>>()?;
            columns[column_of(pivot)?] = Some(Image::Reduced(terms));
        }
        Some(Self {
            n: file.n,
            degree: file.degree,
            normal_words,
            index,
            columns: columns.into_iter().collect::<Option<Vec<_>>>()?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CachePayload {
    normal_words: Vec<Vec<u16>>,
    pivots: Vec<Vec<u16>>,
    rows: Vec<Vec<(usize, String)>>,
}

impl CachePayload {
    fn checksum(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("payload serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CacheFile {
    format_version: u32,
    n: usize,
    degree: usize,
    checksum: String,
    payload: CachePayload,
}

type Slot = Arc<OnceLock<Arc<Level>>>;

/// Write-once store of reduction levels keyed by `(n, degree)`, optionally mirrored to
/// one JSON file per key on disk.
#[derive(Debug)]
pub struct ReductionCache {
    dir: Option<PathBuf>,
    limits: Limits,
    slots: Mutex<HashMap<(usize, usize), Slot>>,
    presentations: Mutex<HashMap<usize, Arc<DkPresentation>>>,
}

impl ReductionCache {
    pub fn new(dir: Option<PathBuf>, limits: Limits) -> Self {
        Self {
            dir,
            limits,
            slots: Mutex::new(HashMap::new()),
            presentations: Mutex::new(HashMap::new()),
        }
    }

    /// Process-wide cache; the directory comes from `KZBRAID_CACHE_DIR` when set.
    pub fn global() -> &'static ReductionCache {
        static GLOBAL: OnceLock<ReductionCache> = OnceLock::new();
        GLOBAL.get_or_init(|| {
            let dir = std::env::var_os(CACHE_ENV).map(PathBuf::from);
            ReductionCache::new(dir, Limits::default())
        })
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn presentation(&self, n: usize) -> Result<Arc<DkPresentation>> {
        let mut map = self.presentations.lock().unwrap();
        if let Some(p) = map.get(&n) {
            return Ok(p.clone());
        }
        let p = Arc::new(DkPresentation::new(n)?);
        map.insert(n, p.clone());
        Ok(p)
    }

    pub fn level(&self, n: usize, degree: usize) -> Result<Arc<Level>> {
        if n == 0 {
            return Err(Error::InvalidStrandCount(n));
        }
        self.limits.check(n, degree)?;
        let slot = {
            let mut slots = self.slots.lock().unwrap();
            slots.entry((n, degree)).or_default().clone()
        };
        if let Some(level) = slot.get() {
            return Ok(level.clone());
        }
        // Resolve dependencies before entering the slot so that no lock is held while
        // recursing.
        let (prev, prev2) = if degree >= 2 {
            (Some(self.level(n, degree - 1)?), Some(self.level(n, degree - 2)?))
        } else {
            (None, None)
        };
        let presentation = self.presentation(n)?;
        Ok(slot
            .get_or_init(|| {
                Arc::new(match (prev, prev2) {
                    (Some(prev), Some(prev2)) => self
                        .load(n, degree, &prev)
                        .unwrap_or_else(|| {
                            let level = Level::build(&presentation, &prev, &prev2);
                            self.store(&level, &prev);
                            level
                        }),
                    _ if degree == 0 => Level::base(n),
                    _ => Level::first(n),
                })
            })
            .clone())
    }

    fn path(&self, n: usize, degree: usize) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(format!("dk-v{CACHE_FORMAT_VERSION}-n{n}-d{degree}.json")))
    }

    fn load(&self, n: usize, degree: usize, prev: &Level) -> Option<Level> {
        let path = self.path(n, degree)?;
        let text = fs::read_to_string(&path).ok()?;
        let parsed: Option<Level> = serde_json::from_str::<CacheFile>(&text)
            .ok()
            .filter(|f| f.n == n && f.degree == degree)
            .and_then(|f| Level::from_file(&f, prev));
        if parsed.is_none() {
            log::warn!("discarding corrupt cache file {}", path.display());
        }
        parsed
    }

    fn store(&self, level: &Level, prev: &Level) {
        let Some(path) = self.path(level.n, level.degree) else {
            return;
        };
        if let Err(e) = write_atomic(&path, &level.to_file(prev)) {
            log::warn!("could not write cache file {}: {e}", path.display());
        }
    }
}

fn write_atomic(path: &Path, file: &CacheFile) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::Cache(e.to_string()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::Cache(e.to_string()))?;
    let text = serde_json::to_string(file).map_err(|e| Error::Cache(e.to_string()))?;
    tmp.write_all(text.as_bytes())
        .map_err(|e| Error::Cache(e.to_string()))?;
    tmp.persist(path).map_err(|e| Error::Cache(e.to_string()))?;
    Ok(())
}

/// `dim U(n)_d`: number of normal words.
pub fn dim(n: usize, d: usize) -> Result<usize> {
    Ok(ReductionCache::global().level(n, d)?.dim())
}

/// Coefficient of `t^d` in `∏_{j=1}^{n−1} 1/(1 − j t)`.
pub fn hilbert_oracle(n: usize, d: usize) -> u128 {
    let mut coeffs = vec![0u128; d + 1];
    coeffs[0] = 1;
    for j in 1..n as u128 {
        for k in 1..=d {
            coeffs[k] += j * coeffs[k - 1];
        }
    }
    coeffs[d]
}

/// Coefficient of `t^l` in `(1 + t)(1 + 2t)⋯(1 + (n − 1)t)`.
pub fn arnold_betti(n: usize, l: usize) -> u128 {
    let mut coeffs = vec![0u128; n.max(1)];
    coeffs[0] = 1;
    for j in 1..n as u128 {
        for k in (1..coeffs.len()).rev() {
            coeffs[k] += j * coeffs[k - 1];
        }
    }
    coeffs.get(l).copied().unwrap_or(0)
}

/// Counts of monomials `e_{i₁j₁}⋯e_{i_ℓj_ℓ}` with strictly increasing second indices,
/// by enumerating subsets of generators; entry `ℓ` is the count of length `ℓ`.
pub fn arnold_monomial_counts(n: usize) -> Vec<u128> {
    let pairs = generator_pairs(n);
    let mut counts = vec![0u128; pairs.len() + 1];
    for mask in 0u64..(1 << pairs.len()) {
        let mut seen = 0u64;
        let mut distinct = true;
        for (k, &(_, j)) in pairs.iter().enumerate() {
            if mask & (1 << k) != 0 {
                distinct &= seen & (1 << j) == 0;
                seen |= 1 << j;
            }
        }
        if distinct {
            counts[mask.count_ones() as usize] += 1;
        }
    }
    counts
}

/// `U(n)_r` with its reduction levels loaded.
#[derive(Debug)]
pub struct DkAlgebra {
    n: usize,
    truncation: usize,
    presentation: Arc<DkPresentation>,
    levels: Vec<Arc<Level>>,
}

impl DkAlgebra {
    pub fn new(n: usize, truncation: usize) -> Result<Arc<Self>> {
        Self::with_cache(n, truncation, ReductionCache::global())
    }

    pub fn with_cache(n: usize, truncation: usize, cache: &ReductionCache) -> Result<Arc<Self>> {
        let levels = (0..=truncation)
            .map(|d| cache.level(n, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(Self {
            n,
            truncation,
            presentation: cache.presentation(n)?,
            levels,
        }))
    }

    pub fn strands(&self) -> usize {
        self.n
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        self.presentation.alphabet()
    }

    pub fn presentation(&self) -> &DkPresentation {
        &self.presentation
    }

    pub fn generators(&self) -> usize {
        self.alphabet().len()
    }

    pub fn level(&self, d: usize) -> &Level {
        &self.levels[d]
    }

    pub fn dim(&self, d: usize) -> usize {
        self.levels[d].dim()
    }

    /// Index of `Z_ij` for 1-based `i < j`.
    pub fn generator_index(&self, i: usize, j: usize) -> usize {
        pair_index(self.n, i - 1, j - 1)
    }

    /// Reduces a dense vector indexed by words of degree `d` (base-`g` digits, first
    /// letter most significant) to coordinates on the normal words of degree `d`.
    pub fn reduce_dense<S: Scalar + FromImage>(&self, d: usize, x: &[S]) -> Vec<S> {
        let g = self.generators();
        if d == 0 {
            return x.to_vec();
        }
        let level = &self.levels[d];
        let mut out = vec![S::zero(); level.dim()];
        let block = x.len() / g;
        let mut prefix = vec![S::zero(); block];
        for gen in 0..g {
            let mut any = false;
            for (p, slot) in prefix.iter_mut().enumerate() {
                *slot = x[p * g + gen].clone();
                any |= !slot.is_zero();
            }
            if !any {
                continue;
            }
            let reduced = self.reduce_dense(d - 1, &prefix);
            for (u, c) in reduced.into_iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                match &level.columns[u * g + gen] {
                    Image::Normal(k) => out[*k] = out[*k].clone() + c,
                    Image::Reduced(terms) => {
                        for (k, q, f) in terms {
                            out[*k] = out[*k].clone() + c.clone() * S::from_image(q, *f);
                        }
                    }
                }
            }
        }
        out
    }

    fn dense_index(&self, word: &Word) -> usize {
        let g = self.generators();
        word.0.iter().fold(0, |acc, &k| acc * g + k as usize)
    }

    pub fn normal_form<S: Scalar + FromImage>(
        self: &Arc<Self>,
        x: &NCSeries<S>,
    ) -> Result<DkElement<S>> {
        if x.alphabet() != self.alphabet() {
            return Err(Error::SeriesMismatch("alphabet is not Z_ij for this n".into()));
        }
        if x.truncation() != self.truncation {
            return Err(Error::SeriesMismatch(format!(
                "truncation {} vs {}",
                x.truncation(),
                self.truncation
            )));
        }
        let g = self.generators();
        let mut by_degree: BTreeMap<usize, Vec<(usize, S)>> = BTreeMap::new();
        for (w, c) in x.terms() {
            by_degree
                .entry(w.len())
                .or_default()
                .push((self.dense_index(w), c.clone()));
        }
        let mut terms = Vec::new();
        for (d, entries) in by_degree {
            let mut dense = vec![S::zero(); g.pow(d as u32)];
            for (k, c) in entries {
                dense[k] = dense[k].clone() + c;
            }
            for (k, c) in self.reduce_dense(d, &dense).into_iter().enumerate() {
                terms.push((self.levels[d].normal_words[k].clone(), c));
            }
        }
        Ok(DkElement {
            algebra: self.clone(),
            series: NCSeries::from_terms(self.alphabet().clone(), self.truncation, terms),
        })
    }

    /// Builds an element from coordinates on the normal words of each degree.
    pub fn from_normal_coordinates<S: Scalar>(
        self: &Arc<Self>,
        coords: &[Vec<S>],
    ) -> DkElement<S> {
        let terms = coords.iter().enumerate().flat_map(|(d, v)| {
            v.iter()
                .enumerate()
                .map(move |(k, c)| (self.levels[d].normal_words[k].clone(), c.clone()))
        });
        DkElement {
            algebra: self.clone(),
            series: NCSeries::from_terms(self.alphabet().clone(), self.truncation, terms),
        }
    }

    pub fn one<S: Scalar>(self: &Arc<Self>) -> DkElement<S> {
        DkElement {
            algebra: self.clone(),
            series: NCSeries::one(self.alphabet().clone(), self.truncation),
        }
    }

    pub fn zero<S: Scalar>(self: &Arc<Self>) -> DkElement<S> {
        DkElement {
            algebra: self.clone(),
            series: NCSeries::zero(self.alphabet().clone(), self.truncation),
        }
    }

    /// `Z_ij` for 1-based `i < j`.
    pub fn z<S: Scalar>(self: &Arc<Self>, i: usize, j: usize) -> DkElement<S> {
        DkElement {
            algebra: self.clone(),
            series: NCSeries::generator(
                self.alphabet().clone(),
                self.truncation,
                self.generator_index(i, j),
            ),
        }
    }

    /// Normalizes both tensor factors.
    pub fn normal_form_tensor<S: Scalar + FromImage>(
        self: &Arc<Self>,
        t: &Tensor<S>,
    ) -> Result<Tensor<S>> {
        let alphabet = self.alphabet().clone();
        let r = self.truncation;
        let mut by_right: BTreeMap<Word, NCSeries<S>> = BTreeMap::new();
        for ((a, b), c) in t {
            by_right
                .entry(b.clone())
                .or_insert_with(|| NCSeries::zero(alphabet.clone(), r))
                .add_term(a.clone(), c.clone());
        }
        let mut by_left: BTreeMap<Word, NCSeries<S>> = BTreeMap::new();
        for (b, left) in by_right {
            for (a, c) in self.normal_form(&left)?.series.terms() {
                by_left
                    .entry(a.clone())
                    .or_insert_with(|| NCSeries::zero(alphabet.clone(), r))
                    .add_term(b.clone(), c.clone());
            }
        }
        let mut out = Tensor::new();
        for (a, right) in by_left {
            for (b, c) in self.normal_form(&right)?.series.terms() {
                out.insert((a.clone(), b.clone()), c.clone());
            }
        }
        Ok(out)
    }
}

/// Converts cached reduction coefficients into the working scalar field.
pub trait FromImage {
    fn from_image(q: &Rational, approx: f64) -> Self;
}

impl FromImage for Rational {
    fn from_image(q: &Rational, _approx: f64) -> Self {
        q.clone()
    }
}

impl FromImage for Complex64 {
    fn from_image(_q: &Rational, approx: f64) -> Self {
        Complex64::new(approx, 0.0)
    }
}

/// An element of `U(n)_r` stored as its normal form.
#[derive(Debug, Clone)]
pub struct DkElement<S> {
    algebra: Arc<DkAlgebra>,
    series: NCSeries<S>,
}

impl<S: Scalar> PartialEq for DkElement<S> {
    fn eq(&self, other: &Self) -> bool {
        self.algebra.n == other.algebra.n && self.series == other.series
    }
}

impl<S: Scalar + FromImage> DkElement<S> {
    pub fn algebra(&self) -> &Arc<DkAlgebra> {
        &self.algebra
    }

    pub fn series(&self) -> &NCSeries<S> {
        &self.series
    }

    pub fn into_series(self) -> NCSeries<S> {
        self.series
    }

    pub fn strands(&self) -> usize {
        self.algebra.n
    }

    pub fn truncation(&self) -> usize {
        self.algebra.truncation
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.algebra.n != other.algebra.n {
            return Err(Error::StrandMismatch {
                left: self.algebra.n,
                right: other.algebra.n,
            });
        }
        if self.algebra.truncation != other.algebra.truncation {
            return Err(Error::SeriesMismatch(format!(
                "truncation {} vs {}",
                self.algebra.truncation, other.algebra.truncation
            )));
        }
        Ok(())
    }

    fn wrap(&self, series: NCSeries<S>) -> Self {
        Self {
            algebra: self.algebra.clone(),
            series,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.wrap(self.series.add(&other.series)?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.wrap(self.series.sub(&other.series)?))
    }

    pub fn scale(&self, c: &S) -> Self {
        self.wrap(self.series.scale(c))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        self.algebra.normal_form(&self.series.mul(&other.series)?)
    }

    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn exp(&self) -> Result<Self> {
        self.algebra.normal_form(&self.series.exp()?)
    }

    pub fn log(&self) -> Result<Self> {
        self.algebra.normal_form(&self.series.log()?)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.algebra.normal_form(&self.series.inverse()?)
    }

    pub fn coefficient(&self, word: &Word) -> S {
        self.series.coefficient(word)
    }

    pub fn graded_component(&self, d: usize) -> Self {
        self.wrap(self.series.graded_component(d))
    }

    pub fn sup_norm(&self) -> f64 {
        self.series.sup_norm()
    }

    pub fn degree_norms(&self) -> Vec<f64> {
        self.series.degree_norms()
    }

    pub fn leading_degree(&self, tol: f64) -> Option<usize> {
        self.series.leading_degree(tol)
    }

    /// `‖(NF ⊗ NF)(Δx) − x ⊗ x‖_∞ ≤ tol`.
    pub fn is_grouplike(&self, tol: f64) -> Result<bool> {
        if (self.series.constant_term() - S::one()).magnitude() > tol {
            return Err(Error::Precondition("grouplike test needs constant term 1".into()));
        }
        let delta = self.algebra.normal_form_tensor(&self.series.coproduct())?;
        Ok(crate::series::tensor_distance(&delta, &self.series.tensor_square()) <= tol)
    }

    /// `Z_ij ↦ Z_{σ(i) σ(j)}` (pair re-sorted), extended multiplicatively.
    pub fn sn_act(&self, sigma: &Permutation) -> Result<Self> {
        let n = self.algebra.n;
        if sigma.degree() != n {
            return Err(Error::StrandMismatch {
                left: n,
                right: sigma.degree(),
            });
        }
        let map: Vec<usize> = generator_pairs(n)
            .into_iter()
            .map(|(i, j)| {
                let (a, b) = (sigma.apply(i), sigma.apply(j));
                pair_index(n, a.min(b), a.max(b))
            })
            .collect();
        self.algebra
            .normal_form(&self.series.relabel(self.algebra.alphabet().clone(), &map))
    }

    /// Image of `self ⊗ other` in `U(n + k)`, shifting the generators of `other` by `n`.
    pub fn embed(&self, other: &Self, cache: &ReductionCache) -> Result<Self> {
        if self.truncation() != other.truncation() {
            return Err(Error::SeriesMismatch(format!(
                "truncation {} vs {}",
                self.truncation(),
                other.truncation()
            )));
        }
        let (n, k) = (self.algebra.n, other.algebra.n);
        let target = DkAlgebra::with_cache(n + k, self.truncation(), cache)?;
        let left: Vec<usize> = generator_pairs(n)
            .into_iter()
            .map(|(i, j)| pair_index(n + k, i, j))
            .collect();
        let right: Vec<usize> = generator_pairs(k)
            .into_iter()
            .map(|(i, j)| pair_index(n + k, i + n, j + n))
            .collect();
        let a = self.series.relabel(target.alphabet().clone(), &left);
        let b = other.series.relabel(target.alphabet().clone(), &right);
        target.normal_form(&a.mul(&b)?)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.series.to_json();
        v["n"] = serde_json::json!(self.algebra.n);
        v
    }

    pub fn map_scalars<T: Scalar + FromImage>(&self, f: impl Fn(&S) -> T) -> DkElement<T> {
        DkElement {
            algebra: self.algebra.clone(),
            series: self.series.map_scalars(f),
        }
    }
}

impl DkElement<Rational> {
    pub fn to_complex(&self) -> DkElement<Complex64> {
        self.map_scalars(Complex64::from_rational)
    }
}

impl<S: Scalar> std::fmt::Display for DkElement<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.series.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use proptest::prelude::*;

    type Q = Rational;

    fn q1() -> Q {
        rational(1, 1)
    }

    fn alg(n: usize, r: usize) -> Arc<DkAlgebra> {
        DkAlgebra::new(n, r).unwrap()
    }

    /// Brute-force rank of the full span `{a ρ b}` in the free algebra, by dense
    /// enumeration of every placement.
    fn brute_relation_rank(n: usize, d: usize) -> usize {
        let p = DkPresentation::new(n).unwrap();
        let g = p.generators();
        let total = g.pow(d as u32);
        let mut rows = Vec::new();
        for pos in 0..d.saturating_sub(1) {
            let left = g.pow(pos as u32);
            let right = g.pow((d - pos - 2) as u32);
            for a in 0..left {
                for b in 0..right {
                    for rho in p.relations() {
                        let entries = rho
                            .terms()
                            .iter()
                            .map(|(w, c)| {
                                let mid = w.0[0] as usize * g + w.0[1] as usize;
                                ((a * g * g + mid) * right + b, c.clone())
                            })
                            .collect();
                        rows.push(normalize_row(entries));
                    }
                }
            }
        }
        crate::linalg::rank(total, rows)
    }

    #[test]
    fn presentation_shape() {
        assert_eq!(DkPresentation::new(2).unwrap().relations().len(), 0);
        assert_eq!(DkPresentation::new(3).unwrap().relations().len(), 2);
        assert_eq!(DkPresentation::new(4).unwrap().relations().len(), 3 + 8);
        for n in 2..=5 {
            for rho in DkPresentation::new(n).unwrap().relations() {
                assert!(rho.terms().keys().all(|w| w.len() == 2));
            }
        }
    }

    #[test]
    fn relation_ranks() {
        let cache = ReductionCache::global();
        assert_eq!(cache.level(2, 2).unwrap().relation_rank(), 0);
        assert_eq!(cache.level(3, 2).unwrap().relation_rank(), 2);
        assert_eq!(cache.level(4, 2).unwrap().relation_rank(), 11);
        assert_eq!(brute_relation_rank(3, 2), 2);
        assert_eq!(brute_relation_rank(4, 2), 11);
    }

    #[test]
    fn incremental_rank_matches_brute_force() {
        for (n, d) in [(3, 3), (3, 4), (4, 3)] {
            assert_eq!(
                ReductionCache::global().level(n, d).unwrap().relation_rank(),
                brute_relation_rank(n, d),
                "n = {n}, d = {d}"
            );
        }
    }

    #[test]
    fn dims_small() {
        for d in 0..=5 {
            assert_eq!(dim(2, d).unwrap(), 1);
        }
        assert_eq!(dim(3, 1).unwrap(), 3);
        assert_eq!(dim(3, 2).unwrap(), 7);
        assert_eq!(dim(4, 2).unwrap(), 25);
    }

    #[test]
    fn oracles() {
        assert_eq!((0..4).map(|d| hilbert_oracle(3, d)).collect::<Vec<_>>(), [1, 3, 7, 15]);
        for d in 0..8 {
            assert_eq!(hilbert_oracle(3, d), (1 << (d + 1)) - 1);
            assert_eq!(hilbert_oracle(2, d), 1);
        }
        assert_eq!(hilbert_oracle(4, 1), 6);
        assert_eq!(hilbert_oracle(4, 2), 25);
        assert_eq!(arnold_betti(3, 1), 3);
        assert_eq!(arnold_betti(3, 2), 2);
        assert_eq!(arnold_betti(2, 2), 0);
        assert_eq!(arnold_betti(1, 0), 1);
    }

    #[test]
    fn arnold_counts_increasing_second_indices() {
        for n in 1..=6usize {
            for (l, &c) in arnold_monomial_counts(n).iter().enumerate() {
                assert_eq!(arnold_betti(n, l), c, "n = {n}, l = {l}");
            }
        }
    }

    #[test]
    fn relations_vanish() {
        let u = alg(4, 3);
        let z = |i, j| u.z::<Q>(i, j);
        assert!(z(1, 2).bracket(&z(3, 4)).unwrap().series().is_zero());
        assert_eq!(u.normal_form(z(1, 2).series()).unwrap(), z(1, 2));
        let u3 = alg(3, 3);
        let z = |i, j| u3.z::<Q>(i, j);
        let s = z(1, 2).add(&z(2, 3)).unwrap();
        assert!(s.bracket(&z(1, 3)).unwrap().series().is_zero());
        let s = z(2, 3).add(&z(1, 3)).unwrap();
        assert!(s.bracket(&z(1, 2)).unwrap().series().is_zero());
        // [Z12, Z13] itself survives.
        assert!(!z(1, 2).bracket(&z(1, 3)).unwrap().series().is_zero());
    }

    #[test]
    fn normal_form_is_idempotent_and_supported_on_normal_words() {
        let u = alg(4, 3);
        let x = u.z::<Q>(3, 4).mul(&u.z(1, 2)).unwrap().add(&u.z(2, 4).exp().unwrap()).unwrap();
        assert_eq!(u.normal_form(x.series()).unwrap(), x);
        for w in x.series().terms().keys() {
            assert!(u.level(w.len()).index_of(w).is_some());
        }
    }

    #[test]
    fn symmetric_group_action() {
        let u = alg(3, 3);
        let z12 = u.z::<Q>(1, 2);
        assert_eq!(z12.sn_act(&Permutation::identity(3)).unwrap(), z12);
        assert_eq!(z12.sn_act(&Permutation::transposition(3, 1, 2).unwrap()).unwrap(), z12);
        assert_eq!(
            z12.sn_act(&Permutation::transposition(3, 2, 3).unwrap()).unwrap(),
            u.z(1, 3)
        );
    }

    #[test]
    fn embedding() {
        let cache = ReductionCache::global();
        let u2 = alg(2, 3);
        let u1 = alg(1, 3);
        let u3 = alg(3, 3);
        assert_eq!(u2.z::<Q>(1, 2).embed(&u1.one(), cache).unwrap(), u3.z(1, 2));
        assert_eq!(u1.one::<Q>().embed(&u2.z(1, 2), cache).unwrap(), u3.z(2, 3));
        let u4 = alg(4, 3);
        let e = u2.z::<Q>(1, 2).embed(&u2.z(1, 2), cache).unwrap();
        assert_eq!(e, u4.z(1, 2).mul(&u4.z(3, 4)).unwrap());
        assert_eq!(e, u4.z(3, 4).mul(&u4.z(1, 2)).unwrap());
    }

    #[test]
    fn embedding_injective_on_monomials() {
        // Images of the basis of U(2) ⊗ U(2) stay independent in U(4).
        let cache = ReductionCache::global();
        let r = 3;
        let u2 = alg(2, r);
        let u4 = alg(4, r);
        let mut e = Echelon::new(u4.level(0).dim() + (1..=r).map(|d| u4.dim(d)).sum::<usize>());
        let offsets: Vec<usize> = (0..=r)
            .scan(0, |acc, d| {
                let o = *acc;
                *acc += u4.dim(d);
                Some(o)
            })
            .collect();
        let mut count = 0;
        for a in 0..=r {
            for b in 0..=(r - a) {
                let x = NCSeries::<Q>::monomial(u2.alphabet().clone(), r, Word(vec![0; a]), q1());
                let y = NCSeries::<Q>::monomial(u2.alphabet().clone(), r, Word(vec![0; b]), q1());
                let img = u2
                    .normal_form(&x)
                    .unwrap()
                    .embed(&u2.normal_form(&y).unwrap(), cache)
                    .unwrap();
                let row = img
                    .series()
                    .terms()
                    .iter()
                    .map(|(w, c)| (offsets[w.len()] + u4.level(w.len()).index_of(w).unwrap(), c.clone()))
                    .collect();
                assert!(e.insert(normalize_row(row)));
                count += 1;
            }
        }
        assert_eq!(e.rank(), count);
    }

    #[test]
    fn relations_are_primitive() {
        for n in 2..=5 {
            for rho in DkPresentation::new(n).unwrap().relations() {
                let delta = rho.coproduct();
                let mut expected = Tensor::new();
                for (w, c) in rho.terms() {
                    expected.insert((w.clone(), Word::empty()), c.clone());
                    expected.insert((Word::empty(), w.clone()), c.clone());
                }
                assert_eq!(delta, expected);
            }
        }
    }

    #[test]
    fn grouplike_in_quotient() {
        let u = alg(3, 3);
        let x = u.z::<Q>(1, 2).exp().unwrap().mul(&u.z(1, 3).exp().unwrap()).unwrap();
        assert!(x.is_grouplike(0.0).unwrap());
        let y = u.one::<Q>().add(&u.z(1, 2).mul(&u.z(1, 3)).unwrap()).unwrap();
        assert!(!y.is_grouplike(0.0).unwrap());
    }

    #[test]
    fn cache_round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let cold = ReductionCache::new(Some(dir.path().to_path_buf()), Limits::default());
        let a = cold.level(4, 3).unwrap();
        let warm = ReductionCache::new(Some(dir.path().to_path_buf()), Limits::default());
        let b = warm.level(4, 3).unwrap();
        assert_eq!(*a, *b);

        let path = dir.path().join(format!("dk-v{CACHE_FORMAT_VERSION}-n4-d3.json"));
        let text = fs::read_to_string(&path).unwrap();
        let mut file: CacheFile = serde_json::from_str(&text).unwrap();
        file.payload.rows[0][0].1 = "12345".into();
        fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
        let again = ReductionCache::new(Some(dir.path().to_path_buf()), Limits::default());
        assert_eq!(*again.level(4, 3).unwrap(), *a);
        // The recomputed level was written back intact.
        let repaired: CacheFile = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(repaired.checksum, repaired.payload.checksum());
    }

    #[test]
    fn size_guard() {
        let cache = ReductionCache::new(None, Limits::default());
        assert!(matches!(cache.level(6, 2), Err(Error::SizeGuard(_))));
        assert!(matches!(cache.level(3, 6), Err(Error::SizeGuard(_))));
        let tight = Limits {
            max_monomials: 100,
            ..Limits::default()
        };
        assert!(matches!(tight.check(5, 3), Err(Error::SizeGuard(_))));
    }

    fn random_element(u: &Arc<DkAlgebra>) -> impl Strategy<Value = DkElement<Q>> {
        let g = u.generators() as u16;
        let r = u.truncation();
        let u = u.clone();
        prop::collection::vec((prop::collection::vec(0..g, 0..=r), -2i64..=2), 0..5).prop_map(
            move |terms| {
                let s = NCSeries::from_terms(
                    u.alphabet().clone(),
                    r,
                    terms.into_iter().map(|(w, c)| (Word(w), rational(c, 1))),
                );
                u.normal_form(&s).unwrap()
            },
        )
    }

    fn s3() -> impl Strategy<Value = Permutation> {
        Just(vec![0usize, 1, 2])
            .prop_shuffle()
            .prop_map(|v| Permutation::new(v).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn normal_form_is_an_algebra_map(
            x in random_element(&alg(3, 4)),
            y in random_element(&alg(3, 4)),
            wx in prop::collection::vec(0u16..3, 0..=2),
        ) {
            let u = alg(3, 4);
            // Perturb x by an element of the ideal before multiplying.
            let rho = u.presentation().relations()[0].truncate(4);
            let pad = NCSeries::monomial(u.alphabet().clone(), 4, Word(wx), q1()).mul(&rho).unwrap();
            let raw = x.series().add(&pad).unwrap().mul(y.series()).unwrap();
            prop_assert_eq!(u.normal_form(&raw).unwrap(), x.mul(&y).unwrap());
        }

        #[test]
        fn action_is_compatible(
            x in random_element(&alg(3, 3)),
            y in random_element(&alg(3, 3)),
            s in s3(),
            t in s3(),
        ) {
            let st = s.compose(&t);
            prop_assert_eq!(x.sn_act(&st).unwrap(), x.sn_act(&t).unwrap().sn_act(&s).unwrap());
            prop_assert_eq!(
                x.mul(&y).unwrap().sn_act(&s).unwrap(),
                x.sn_act(&s).unwrap().mul(&y.sn_act(&s).unwrap()).unwrap()
            );
        }
    }
}
