//! Chord diagrams on an oriented circle and the Hopf algebra they span modulo 4T.
//!
//! A diagram with `m` chords is a perfect matching of the points `0..2m` placed in
//! cyclic order, stored as its partner array. Diagrams are taken up to rotation only.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{normalize_row, Echelon, SparseRow};
use crate::scalar::{rational, Rational};

pub const DEFAULT_MAX_CHORDS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChordDiagram {
    partner: Vec<usize>,
}

impl ChordDiagram {
    /// Builds a diagram from a partner array, canonicalizing it.
    pub fn new(partner: Vec<usize>) -> Result<Self> {
        let n = partner.len();
        for (p, &q) in partner.iter().enumerate() {
            if q >= n || q == p || partner[q] != p {
                return Err(Error::Precondition(format!(
                    "{partner:?} is not a perfect matching"
                )));
            }
        }
        Ok(Self {
            partner: canonical(&partner),
        })
    }

    pub fn empty() -> Self {
        Self { partner: vec![] }
    }

    /// Builds a diagram from the chord label at each circle point.
    pub fn from_labels(labels: &[usize]) -> Self {
        Self {
            partner: canonical(&partner_of(labels)),
        }
    }

    /// Chords given as 0-based endpoint pairs.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Self> {
        let mut partner = vec![usize::MAX; 2 * pairs.len()];
        for &(a, b) in pairs {
            if a >= partner.len() || b >= partner.len() || a == b {
                return Err(Error::Precondition(format!("bad chord ({a},{b})")));
            }
            if partner[a] != usize::MAX || partner[b] != usize::MAX {
                return Err(Error::Precondition("endpoint used twice".into()));
            }
            partner[a] = b;
            partner[b] = a;
        }
        Self::new(partner)
    }

    pub fn chords(&self) -> usize {
        self.partner.len() / 2
    }

    pub fn partner(&self) -> &[usize] {
        &self.partner
    }

    /// Chords as `(a, b)` with `a < b`, sorted.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.partner
            .iter()
            .enumerate()
            .filter(|(p, q)| p < q)
            .map(|(p, &q)| (p, q))
            .collect()
    }

    /// Chord label at each point, chords numbered by first endpoint.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.partner.len()];
        for (k, (a, b)) in self.pairs().into_iter().enumerate() {
            labels[a] = k;
            labels[b] = k;
        }
        labels
    }

    fn crosses(&self, (a1, a2): (usize, usize), (b1, b2): (usize, usize)) -> bool {
        let inside = |x: usize| a1 < x && x < a2;
        inside(b1) != inside(b2)
    }

    /// Whether some chord crosses no other chord.
    pub fn has_isolated_chord(&self) -> bool {
        let pairs = self.pairs();
        pairs
            .iter()
            .any(|&a| pairs.iter().all(|&b| a == b || !self.crosses(a, b)))
    }

    /// The diagram keeping only the chords whose labels are in `keep`.
    pub fn restrict(&self, keep: &[bool]) -> Self {
        let labels: Vec<usize> = self
            .labels()
            .into_iter()
            .filter(|&l| keep[l])
            .collect();
        Self::from_labels(&labels)
    }

    /// Connected sum: `other`'s circle is opened at its base point and inserted
    /// before point `gap` of `self`.
    pub fn connected_sum(&self, other: &Self, gap: usize) -> Self {
        let mut labels = self.labels();
        let shift = self.chords();
        let gap = if labels.is_empty() { 0 } else { gap % labels.len() };
        let inserted: Vec<usize> = other.labels().into_iter().map(|l| l + shift).collect();
        labels.splice(gap..gap, inserted);
        Self::from_labels(&labels)
    }
}

fn partner_of(labels: &[usize]) -> Vec<usize> {
    let mut first: HashMap<usize, usize> = HashMap::new();
    let mut partner = vec![0; labels.len()];
    for (p, &l) in labels.iter().enumerate() {
        if let Some(q) = first.remove(&l) {
            partner[p] = q;
            partner[q] = p;
        } else {
            first.insert(l, p);
        }
    }
    debug_assert!(first.is_empty(), "every label must appear twice");
    partner
}

/// Lexicographically least partner array over all rotations.
pub fn canonical(partner: &[usize]) -> Vec<usize> {
    let n = partner.len();
    let mut best = partner.to_vec();
    let mut candidate = vec![0; n];
    for r in 1..n {
        for (p, c) in candidate.iter_mut().enumerate() {
            *c = (partner[(p + r) % n] + n - r) % n;
        }
        if candidate < best {
            best.clone_from(&candidate);
        }
    }
    best
}

impl fmt::Display for ChordDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .pairs()
            .iter()
            .map(|(a, b)| format!("({},{})", a + 1, b + 1))
            .collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl FromStr for ChordDiagram {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |message: &str| Error::Parse {
            position: 0,
            message: message.to_string(),
        };
        let inner = text
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| bad("expected [(a,b),…]"))?;
        let digits: String = inner
            .chars()
            .map(|c| if c.is_ascii_digit() { c } else { ' ' })
            .collect();
        let numbers: Vec<usize> = digits
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad endpoint")))
            .collect::<Result<_>>()?;
        if numbers.len() % 2 != 0 || numbers.contains(&0) {
            return Err(bad("endpoints must be 1-based pairs"));
        }
        let pairs: Vec<(usize, usize)> = numbers.chunks(2).map(|c| (c[0] - 1, c[1] - 1)).collect();
        Self::from_pairs(&pairs)
    }
}

/// All diagrams with `m` chords, canonical and sorted.
pub fn enumerate_diagrams(m: usize) -> Result<Vec<ChordDiagram>> {
    enumerate_diagrams_up_to(m, DEFAULT_MAX_CHORDS)
}

pub fn enumerate_diagrams_up_to(m: usize, max: usize) -> Result<Vec<ChordDiagram>> {
    if m > max {
        return Err(Error::SizeGuard(format!(
            "{m} chords exceeds the configured maximum {max}"
        )));
    }
    let mut out = BTreeSet::new();
    let mut partner = vec![usize::MAX; 2 * m];
    matchings(&mut partner, &mut |p| {
        out.insert(ChordDiagram {
            partner: canonical(p),
        });
    });
    Ok(out.into_iter().collect())
}

fn matchings(partner: &mut [usize], visit: &mut dyn FnMut(&[usize])) {
    let Some(a) = partner.iter().position(|&q| q == usize::MAX) else {
        visit(partner);
        return;
    };
    for b in (a + 1)..partner.len() {
        if partner[b] == usize::MAX {
            partner[a] = b;
            partner[b] = a;
            matchings(partner, visit);
            partner[a] = usize::MAX;
            partner[b] = usize::MAX;
        }
    }
}

/// 4T relations among diagrams with `m` chords, as signed diagram combinations.
///
/// For every diagram, every end `e` of a chord and every other chord with ends
/// `b1, b2`: `D(e after b1) − D(e before b1) + D(e after b2) − D(e before b2)`,
/// where `e` is removed from its place and reinserted next to the given end.
pub fn four_t_rows(m: usize) -> Result<Vec<Vec<(ChordDiagram, i64)>>> {
    let diagrams = enumerate_diagrams(m)?;
    if m < 2 {
        return Ok(vec![]);
    }
    let rows: BTreeSet<Vec<(ChordDiagram, i64)>> = diagrams
        .par_iter()
        .flat_map_iter(|d| {
            let labels = d.labels();
            let mut rows = Vec::new();
            for e in 0..labels.len() {
                let a = labels[e];
                let mut rest = labels.clone();
                rest.remove(e);
                for b in (0..m).filter(|&b| b != a) {
                    let mut terms: BTreeMap<ChordDiagram, i64> = BTreeMap::new();
                    for (p, _) in rest.iter().enumerate().filter(|(_, &l)| l == b) {
                        for (offset, sign) in [(1, 1), (0, -1)] {
                            let mut moved = rest.clone();
                            moved.insert(p + offset, a);
                            *terms.entry(ChordDiagram::from_labels(&moved)).or_default() += sign;
                        }
                    }
                    let row: Vec<(ChordDiagram, i64)> =
                        terms.into_iter().filter(|(_, c)| *c != 0).collect();
                    if !row.is_empty() {
                        rows.push(normalize_sign(row));
                    }
                }
            }
            rows
        })
        .collect();
    Ok(rows.into_iter().collect())
}

fn normalize_sign(mut row: Vec<(ChordDiagram, i64)>) -> Vec<(ChordDiagram, i64)> {
    if row[0].1 < 0 {
        for (_, c) in row.iter_mut() {
            *c = -*c;
        }
    }
    row
}

/// The degree-`m` part of the diagram algebra: diagrams modulo 4T, and optionally
/// modulo diagrams with an isolated chord.
#[derive(Debug, Clone)]
pub struct DiagramSpace {
    m: usize,
    reduced: bool,
    diagrams: Vec<ChordDiagram>,
    index: HashMap<ChordDiagram, usize>,
    echelon: Echelon,
    /// free column → position in the quotient basis
    basis_position: BTreeMap<usize, usize>,
}

impl DiagramSpace {
    pub fn new(m: usize, reduced: bool) -> Result<Self> {
        Self::with_max(m, reduced, DEFAULT_MAX_CHORDS)
    }

    pub fn with_max(m: usize, reduced: bool, max: usize) -> Result<Self> {
        let diagrams = enumerate_diagrams_up_to(m, max)?;
        let index: HashMap<ChordDiagram, usize> =
            diagrams.iter().cloned().enumerate().map(|(i, d)| (d, i)).collect();
        let mut echelon = Echelon::new(diagrams.len());
        if m >= 2 {
            for row in four_t_rows(m)? {
                echelon.insert(normalize_row(
                    row.iter()
                        .map(|(d, c)| (index[d], rational(*c, 1)))
                        .collect(),
                ));
            }
        }
        if reduced {
            for (i, d) in diagrams.iter().enumerate() {
                if d.has_isolated_chord() {
                    echelon.insert(vec![(i, Rational::one())]);
                }
            }
        }
        let basis_position = echelon
            .free_columns()
            .into_iter()
            .enumerate()
            .map(|(k, c)| (c, k))
            .collect();
        Ok(Self {
            m,
            reduced,
            diagrams,
            index,
            echelon,
            basis_position,
        })
    }

    pub fn chords(&self) -> usize {
        self.m
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn diagrams(&self) -> &[ChordDiagram] {
        &self.diagrams
    }

    pub fn relation_rank(&self) -> usize {
        self.echelon.rank()
    }

    pub fn dim(&self) -> usize {
        self.basis_position.len()
    }

    /// Diagrams representing the quotient basis.
    pub fn basis(&self) -> Vec<&ChordDiagram> {
        self.basis_position.keys().map(|&c| &self.diagrams[c]).collect()
    }

    /// Coordinates of a diagram in the quotient basis.
    pub fn normal_form(&self, d: &ChordDiagram) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim()];
        let col = self.index[d];
        for (c, v) in self.echelon.reduce(&vec![(col, Rational::one())]) {
            out[self.basis_position[&c]] = v;
        }
        out
    }

    pub fn normal_form_combination(&self, terms: &[(ChordDiagram, Rational)]) -> Vec<Rational> {
        let row: SparseRow = normalize_row(terms.iter().map(|(d, c)| (self.index[d], c.clone())).collect());
        let mut out = vec![Rational::zero(); self.dim()];
        for (c, v) in self.echelon.reduce(&row) {
            out[self.basis_position[&c]] = v;
        }
        out
    }
}

/// Degree-indexed tensor coordinates `(k, i, j)`: basis `i` of degree `k` times basis
/// `j` of degree `m − k`.
pub type ChordTensor = BTreeMap<(usize, usize, usize), Rational>;

/// The graded algebra up to a maximum number of chords.
#[derive(Debug, Clone)]
pub struct ChordAlgebra {
    spaces: Vec<DiagramSpace>,
}

impl ChordAlgebra {
    pub fn new(max: usize) -> Result<Self> {
        Self::with_limit(max, DEFAULT_MAX_CHORDS)
    }

    pub fn with_limit(max: usize, limit: usize) -> Result<Self> {
        let spaces = (0..=max)
            .map(|m| DiagramSpace::with_max(m, false, limit))
            .collect::<Result<_>>()?;
        Ok(Self { spaces })
    }

    pub fn max_chords(&self) -> usize {
        self.spaces.len() - 1
    }

    pub fn space(&self, m: usize) -> &DiagramSpace {
        &self.spaces[m]
    }

    pub fn dim(&self, m: usize) -> usize {
        self.spaces[m].dim()
    }

    /// Product of two basis elements, inserting at point `gap` of the first.
    pub fn product_at(&self, d1: &ChordDiagram, d2: &ChordDiagram, gap: usize) -> Vec<Rational> {
        self.spaces[d1.chords() + d2.chords()].normal_form(&d1.connected_sum(d2, gap))
    }

    pub fn product_basis(&self, m1: usize, i: usize, m2: usize, j: usize) -> Vec<Rational> {
        let d1 = self.spaces[m1].basis()[i].clone();
        let d2 = self.spaces[m2].basis()[j].clone();
        self.product_at(&d1, &d2, 0)
    }

    /// Bilinear product of coordinate vectors.
    pub fn product(&self, m1: usize, x: &[Rational], m2: usize, y: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim(m1 + m2)];
        for (i, a) in x.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in y.iter().enumerate().filter(|(_, b)| !b.is_zero()) {
                let ab = a * b;
                for (k, v) in self.product_basis(m1, i, m2, j).into_iter().enumerate() {
                    out[k] += &ab * v;
                }
            }
        }
        out
    }

    /// `Δ(d) = Σ_S d|_S ⊗ d|_{S^c}` in normal-form coordinates.
    pub fn coproduct(&self, d: &ChordDiagram) -> ChordTensor {
        let m = d.chords();
        let mut out = ChordTensor::new();
        for mask in 0u32..(1 << m) {
            let keep: Vec<bool> = (0..m).map(|c| mask & (1 << c) != 0).collect();
            let rest: Vec<bool> = keep.iter().map(|k| !k).collect();
            let k = keep.iter().filter(|&&k| k).count();
            let left = self.spaces[k].normal_form(&d.restrict(&keep));
            let right = self.spaces[m - k].normal_form(&d.restrict(&rest));
            accumulate_outer(&mut out, k, &left, &right, &Rational::one());
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Coproduct of a coordinate vector of degree `m`.
    pub fn coproduct_element(&self, m: usize, x: &[Rational]) -> ChordTensor {
        let basis = self.spaces[m].basis();
        let mut out = ChordTensor::new();
        for (i, a) in x.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (key, v) in self.coproduct(basis[i]) {
                *out.entry(key).or_insert_with(Rational::zero) += a * v;
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// `(a ⊗ b)(c ⊗ d) = ac ⊗ bd` extended bilinearly; `m1`, `m2` are the total degrees.
    pub fn tensor_product(&self, m1: usize, x: &ChordTensor, m2: usize, y: &ChordTensor) -> ChordTensor {
        let mut out = ChordTensor::new();
        for (&(k1, i1, j1), a) in x {
            for (&(k2, i2, j2), b) in y {
                let left = self.product_basis(k1, i1, k2, i2);
                let right = self.product_basis(m1 - k1, j1, m2 - k2, j2);
                accumulate_outer(&mut out, k1 + k2, &left, &right, &(a * b));
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Dimension of the primitive subspace in degree `m ≥ 1`.
    pub fn primitive_dim(&self, m: usize) -> usize {
        if m == 0 {
            return 0;
        }
        let space = &self.spaces[m];
        let mut offsets = vec![0; m];
        let mut total = 0;
        for k in 1..m {
            offsets[k] = total;
            total += self.dim(k) * self.dim(m - k);
        }
        let mut echelon = Echelon::new(total.max(1));
        for d in space.basis() {
            let row: Vec<(usize, Rational)> = self
                .coproduct(d)
                .into_iter()
                .filter(|((k, _, _), _)| *k != 0 && *k != m)
                .map(|((k, i, j), v)| (offsets[k] + i * self.dim(m - k) + j, v))
                .collect();
            echelon.insert(normalize_row(row));
        }
        space.dim() - echelon.rank()
    }
}

fn accumulate_outer(out: &mut ChordTensor, k: usize, left: &[Rational], right: &[Rational], c: &Rational) {
    for (i, a) in left.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
        let ca = c * a;
        for (j, b) in right.iter().enumerate().filter(|(_, b)| !b.is_zero()) {
            *out.entry((k, i, j)).or_insert_with(Rational::zero) += &ca * b;
        }
    }
}

pub fn dim_a(m: usize) -> Result<usize> {
    Ok(DiagramSpace::new(m, false)?.dim())
}

pub fn dim_ar(m: usize) -> Result<usize> {
    Ok(DiagramSpace::new(m, true)?.dim())
}

/// Coefficients of `∏_{i≥1} (1 − t^i)^{−d_i}` up to `t^max`, given `d[i]` for `i ≥ 1`.
pub fn polynomial_algebra_dims(primitive: &[usize], max: usize) -> Vec<u128> {
    let mut series = vec![0u128; max + 1];
    series[0] = 1;
    for (i, &d) in primitive.iter().enumerate().skip(1) {
        for _ in 0..d {
            // multiply by 1/(1 − t^i)
            for k in i..=max {
                series[k] += series[k - i];
            }
        }
    }
    series
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChordTableRow {
    pub m: usize,
    pub diagrams: usize,
    pub dim_a: usize,
    pub dim_ar: usize,
    pub primitive: usize,
}

/// The table of diagram counts and dimensions for `m = 0..=max`.
pub fn chord_table(max: usize) -> Result<Vec<ChordTableRow>> {
    let algebra = ChordAlgebra::new(max)?;
    (0..=max)
        .map(|m| {
            Ok(ChordTableRow {
                m,
                diagrams: algebra.space(m).diagrams().len(),
                dim_a: algebra.dim(m),
                dim_ar: dim_ar(m)?,
                primitive: algebra.primitive_dim(m),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(text: &str) -> ChordDiagram {
        text.parse().unwrap()
    }

    /// Brute-force count of matchings up to rotation, independent of `canonical`.
    fn orbit_count(m: usize) -> usize {
        let mut all = Vec::new();
        let mut partner = vec![usize::MAX; 2 * m];
        matchings(&mut partner, &mut |p| all.push(p.to_vec()));
        let n = 2 * m;
        let rotate = |p: &Vec<usize>| -> Vec<usize> { (0..n).map(|i| (p[(i + 1) % n] + n - 1) % n).collect() };
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut orbits = 0;
        for p in all {
            if seen.contains(&p) {
                continue;
            }
            orbits += 1;
            let mut q = p.clone();
            for _ in 0..n.max(1) {
                seen.insert(q.clone());
                q = rotate(&q);
            }
        }
        orbits
    }

    #[test]
    fn diagram_counts() {
        let counts: Vec<usize> = (0..=6).map(|m| enumerate_diagrams(m).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 18, 105, 902]);
        for m in 0..=5 {
            assert_eq!(counts[m], orbit_count(m));
        }
        assert!(matches!(enumerate_diagrams(7), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn text_form() {
        let x = d("[(1,3),(2,4)]");
        assert_eq!(x.to_string(), "[(1,3),(2,4)]");
        assert_eq!(d("[(2,4),(1,3)]"), x);
        assert_eq!(d("[(1,2),(3,4)]"), d("[(2,3),(4,1)]"));
        assert!("[(1,1)]".parse::<ChordDiagram>().is_err());
        assert!("(1,2)".parse::<ChordDiagram>().is_err());
        assert_eq!(d("[]"), ChordDiagram::empty());
    }

    #[test]
    fn isolated_chords() {
        assert!(d("[(1,2)]").has_isolated_chord());
        assert!(!d("[(1,3),(2,4)]").has_isolated_chord());
        assert!(d("[(1,4),(2,3)]").has_isolated_chord());
        assert!(!ChordDiagram::empty().has_isolated_chord());
    }

    #[test]
    fn four_t_ranks() {
        assert!(four_t_rows(1).unwrap().is_empty());
        // Degree 2 carries no 4T relation: both diagrams survive.
        let space = DiagramSpace::new(2, false).unwrap();
        assert_eq!(space.relation_rank(), 0);
        let three = DiagramSpace::new(3, false).unwrap();
        assert_eq!(three.relation_rank(), 2);
        assert_eq!(three.dim(), 3);
    }

    #[test]
    fn dimensions() {
        let a: Vec<usize> = (0..=5).map(|m| dim_a(m).unwrap()).collect();
        assert_eq!(a, vec![1, 1, 2, 3, 6, 10]);
        let ar: Vec<usize> = (0..=5).map(|m| dim_ar(m).unwrap()).collect();
        assert_eq!(ar, vec![1, 0, 1, 1, 3, 4]);
    }

    #[test]
    fn primitive_dims_and_grading_identity() {
        let algebra = ChordAlgebra::new(5).unwrap();
        let prim: Vec<usize> = (0..=5).map(|m| algebra.primitive_dim(m)).collect();
        assert_eq!(&prim[1..], &[1, 1, 1, 2, 3]);
        let predicted = polynomial_algebra_dims(&prim, 5);
        for m in 0..=5 {
            assert_eq!(predicted[m], algebra.dim(m) as u128, "m={m}");
        }
    }

    #[test]
    fn product_examples() {
        let algebra = ChordAlgebra::new(4).unwrap();
        let chord = d("[(1,2)]");
        let empty = ChordDiagram::empty();
        assert_eq!(algebra.product_at(&empty, &chord, 0), algebra.space(1).normal_form(&chord));
        let square = algebra.product_at(&chord, &chord, 0);
        assert_eq!(square, algebra.space(2).normal_form(&d("[(1,2),(3,4)]")));
        for m1 in 0..=2 {
            for m2 in 0..=2 {
                for x in enumerate_diagrams(m1).unwrap() {
                    for y in enumerate_diagrams(m2).unwrap() {
                        let first = algebra.product_at(&x, &y, 0);
                        for gap in 1..(2 * m1).max(1) {
                            assert_eq!(algebra.product_at(&x, &y, gap), first, "{x} {y} gap {gap}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn coproduct_examples() {
        let algebra = ChordAlgebra::new(2).unwrap();
        let empty = algebra.coproduct(&ChordDiagram::empty());
        assert_eq!(empty.len(), 1);
        let chord = algebra.coproduct(&d("[(1,2)]"));
        assert_eq!(chord.keys().copied().collect::<Vec<_>>(), vec![(0, 0, 0), (1, 0, 0)]);
        let crossing = d("[(1,3),(2,4)]");
        let mut by_size = [0; 3];
        for mask in 0u32..4 {
            by_size[mask.count_ones() as usize] += 1;
        }
        assert_eq!(by_size, [1, 2, 1]);
        let total: Rational = algebra.coproduct(&crossing).values().sum();
        assert_eq!(total, rational(4, 1));
    }

    #[test]
    fn hopf_compatibility_and_commutativity() {
        let algebra = ChordAlgebra::new(4).unwrap();
        for m1 in 0..=4 {
            for m2 in 0..=(4 - m1) {
                for i in 0..algebra.dim(m1) {
                    for j in 0..algebra.dim(m2) {
                        let xy = algebra.product_basis(m1, i, m2, j);
                        let yx = algebra.product_basis(m2, j, m1, i);
                        assert_eq!(xy, yx, "commutativity m1={m1} m2={m2}");
                        let lhs = algebra.coproduct_element(m1 + m2, &xy);
                        let unit = |m: usize, k: usize| {
                            let mut v = vec![Rational::zero(); algebra.dim(m)];
                            v[k] = Rational::one();
                            v
                        };
                        let dx = algebra.coproduct_element(m1, &unit(m1, i));
                        let dy = algebra.coproduct_element(m2, &unit(m2, j));
                        let rhs = algebra.tensor_product(m1, &dx, m2, &dy);
                        assert_eq!(lhs, rhs, "Hopf m1={m1} m2={m2} i={i} j={j}");
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn canonical_form_is_rotation_invariant(m in 0usize..6, seed in any::<u64>(), r in 0usize..12) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut points: Vec<usize> = (0..2 * m).collect();
            points.shuffle(&mut rng);
            let pairs: Vec<(usize, usize)> = points.chunks(2).map(|c| (c[0], c[1])).collect();
            let x = ChordDiagram::from_pairs(&pairs).unwrap();
            prop_assert_eq!(canonical(x.partner()), x.partner().to_vec());
            let n = (2 * m).max(1);
            let rotated: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| ((a + r) % n, (b + r) % n)).collect();
            prop_assert_eq!(ChordDiagram::from_pairs(&rotated).unwrap(), x);
        }
    }

    #[test]
    fn table_through_six() {
        let table = chord_table(6).unwrap();
        let col = |f: fn(&ChordTableRow) -> usize| table.iter().map(f).collect::<Vec<_>>();
        assert_eq!(col(|r| r.diagrams), vec![1, 1, 2, 5, 18, 105, 902]);
        assert_eq!(col(|r| r.dim_a), vec![1, 1, 2, 3, 6, 10, 19]);
        assert_eq!(col(|r| r.dim_ar), vec![1, 0, 1, 1, 3, 4, 9]);
        assert_eq!(col(|r| r.primitive), vec![0, 1, 1, 1, 2, 3, 5]);
    }
}
