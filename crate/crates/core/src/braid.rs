//! Braid words, permutations and the geometric strand paths used for holonomy.
//!
//! Conventions used throughout the crate:
//!
//! * Strands and positions are 0-based internally and 1-based in every text form.
//! * A [`Permutation`] produced by [`BraidWord::permutation`] is the final
//!   *arrangement*: `perm.apply(q)` is the label (starting position) of the strand
//!   sitting at position `q` after the braid. Letters act on positions, first letter
//!   first, which makes `permutation(u * v) = permutation(u).compose(permutation(v))`
//!   with `compose` the ordinary composite of maps (`(a ∘ b)(k) = a(b(k))`).
//! * `σ_i` exchanges the points at positions `i` and `i + 1` by a counterclockwise
//!   half-turn; `σ_i^{-1}` is the clockwise half-turn.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A word in the Artin generators of `B_n`.
///
/// Letter `+i` is `σ_i`, `-i` is `σ_i^{-1}`, with `1 ≤ i ≤ n - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BraidWord {
    n: usize,
    letters: Vec<i32>,
}

impl BraidWord {
    pub fn new(n: usize, letters: Vec<i32>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidStrandCount(n));
        }
        for &letter in &letters {
            if letter == 0 || letter.unsigned_abs() as usize >= n {
                return Err(Error::LetterOutOfRange { letter, n });
            }
        }
        Ok(Self { n, letters })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    /// Parses the whitespace-separated text form, e.g. `"1 1"` or `"-2 1"`.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for (position, token) in text.split_whitespace().enumerate() {
            let letter: i32 = token.parse().map_err(|_| Error::Parse {
                position: position + 1,
                message: format!("`{token}` is not an integer"),
            })?;
            if letter == 0 {
                return Err(Error::Parse {
                    position: position + 1,
                    message: "letter 0 is not a generator".into(),
                });
            }
            if letter.unsigned_abs() as usize >= n {
                return Err(Error::Parse {
                    position: position + 1,
                    message: format!("letter {letter} out of range for {n} strands"),
                });
            }
            letters.push(letter);
        }
        Self::new(n, letters)
    }

    pub fn strands(&self) -> usize {
        self.n
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn permutation(&self) -> Permutation {
        let mut arrangement: Vec<usize> = (0..self.n).collect();
        for &letter in &self.letters {
            let i = letter.unsigned_abs() as usize - 1;
            arrangement.swap(i, i + 1);
        }
        Permutation { images: arrangement }
    }

    pub fn is_pure(&self) -> bool {
        self.permutation().is_identity()
    }

    /// The standard generator `A_ij = (σ_{j-1}⋯σ_{i+1}) σ_i² (σ_{i+1}^{-1}⋯σ_{j-1}^{-1})`
    /// of the pure braid group, 1-based `i < j ≤ n`.
    pub fn pure_generator(i: usize, j: usize, n: usize) -> Result<Self> {
        if i == 0 || i >= j || j > n {
            return Err(Error::GeneratorIndex { i, j, n });
        }
        let mut letters: Vec<i32> = ((i + 1)..j).rev().map(|k| k as i32).collect();
        letters.push(i as i32);
        letters.push(i as i32);
        letters.extend(((i + 1)..j).map(|k| -(k as i32)));
        Self::new(n, letters)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::StrandMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(Self { n: self.n, letters })
    }

    pub fn inverse(&self) -> Self {
        Self {
            n: self.n,
            letters: self.letters.iter().rev().map(|l| -l).collect(),
        }
    }

    /// `u v u^{-1} v^{-1}`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.concat(other)?
            .concat(&self.inverse())?
            .concat(&other.inverse())
    }

    /// Places `other` to the right of `self`: a braid on `n + k` strands.
    pub fn juxtapose(&self, other: &Self) -> Self {
        let shift = self.n as i32;
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().map(|&l| l + l.signum() * shift));
        Self {
            n: self.n + other.n,
            letters,
        }
    }

    /// Half-turn geometry starting at the base configuration `(1, …, n)`.
    pub fn standard_geometry(&self) -> StrandPath {
        let mut positions: Vec<usize> = (0..self.n).collect(); // strand -> position
        let mut pieces = Vec::with_capacity(self.letters.len());
        for &letter in &self.letters {
            let i = letter.unsigned_abs() as usize - 1;
            let sweep = if letter > 0 { PI } else { -PI };
            let center = Complex64::new(i as f64 + 1.5, 0.0);
            let motions = positions
                .iter()
                .map(|&p| {
                    if p == i {
                        Motion::Arc {
                            center,
                            radius: 0.5,
                            phase: PI,
                            sweep,
                        }
                    } else if p == i + 1 {
                        Motion::Arc {
                            center,
                            radius: 0.5,
                            phase: 0.0,
                            sweep,
                        }
                    } else {
                        Motion::Fixed(Complex64::new(p as f64 + 1.0, 0.0))
                    }
                })
                .collect();
            pieces.push(Piece::new(motions));
            for p in positions.iter_mut() {
                if *p == i {
                    *p = i + 1;
                } else if *p == i + 1 {
                    *p = i;
                }
            }
        }
        StrandPath {
            n: self.n,
            pieces,
        }
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        f.write_str(&text.join(" "))
    }
}

/// A bijection of `{0, …, n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &image in &images {
            if image >= n || seen[image] {
                return Err(Error::InvalidPermutation(format!("{images:?}")));
            }
            seen[image] = true;
        }
        Ok(Self { images })
    }

    /// From 1-based images, as written in text.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.iter().any(|&i| i == 0) {
            return Err(Error::InvalidPermutation(format!("{images:?}")));
        }
        Self::new(images.iter().map(|i| i - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    /// Exchange of two 1-based points.
    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 || a > n || b > n {
            return Err(Error::InvalidPermutation(format!("({a} {b}) on {n}")));
        }
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a - 1, b - 1);
        Ok(Self { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, k: usize) -> usize {
        self.images[k]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(k, &i)| k == i)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.degree(), other.degree(), "permutation degree mismatch");
        Self {
            images: other.images.iter().map(|&k| self.images[k]).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.images.len()];
        for (k, &i) in self.images.iter().enumerate() {
            images[i] = k;
        }
        Self { images }
    }

    /// Block-diagonal join acting on `n + k` points.
    pub fn join(&self, other: &Self) -> Self {
        let shift = self.degree();
        let mut images = self.images.clone();
        images.extend(other.images.iter().map(|i| i + shift));
        Self { images }
    }

    /// Disjoint cycles of length ≥ 2, 1-based.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.images.len()];
        let mut cycles = Vec::new();
        for start in 0..self.images.len() {
            if seen[start] || self.images[start] == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                cycle.push(k + 1);
                k = self.images[k];
            }
            cycles.push(cycle);
        }
        cycles
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("id");
        }
        for cycle in cycles {
            let text: Vec<String> = cycle.iter().map(|k| k.to_string()).collect();
            write!(f, "({})", text.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for BraidWord {
    type Err = Error;

    /// `"n: letters"`, e.g. `"3: 1 -2"`.
    fn from_str(s: &str) -> Result<Self> {
        let (n, rest) = s.split_once(':').ok_or_else(|| Error::Parse {
            position: 0,
            message: "expected `n: letters`".into(),
        })?;
        let n = n.trim().parse().map_err(|_| Error::Parse {
            position: 0,
            message: format!("bad strand count `{}`", n.trim()),
        })?;
        Self::parse(n, rest)
    }
}

/// How a single strand moves during one piece, `t ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Motion {
    Fixed(Complex64),
    /// `center + radius · exp(i (phase + sweep t))`
    Arc {
        center: Complex64,
        radius: f64,
        phase: f64,
        sweep: f64,
    },
    Linear {
        from: Complex64,
        to: Complex64,
    },
}

impl Motion {
    fn eval(&self, t: f64) -> (Complex64, Complex64) {
        match *self {
            Motion::Fixed(z) => (z, Complex64::new(0.0, 0.0)),
            Motion::Arc {
                center,
                radius,
                phase,
                sweep,
            } => {
                let e = Complex64::from_polar(radius, phase + sweep * t);
                (center + e, e * Complex64::new(0.0, sweep))
            }
            Motion::Linear { from, to } => (from + (to - from) * t, to - from),
        }
    }
}

/// One smooth piece of a path in the configuration space; strands are indexed by label.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    motions: Vec<Motion>,
    /// Per-strand amplitude of an endpoint-preserving `sin(πt)` wiggle.
    wiggle: Vec<Complex64>,
}

impl Piece {
    pub fn new(motions: Vec<Motion>) -> Self {
        let wiggle = vec![Complex64::new(0.0, 0.0); motions.len()];
        Self { motions, wiggle }
    }

    pub fn with_wiggle(mut self, wiggle: Vec<Complex64>) -> Self {
        assert_eq!(wiggle.len(), self.motions.len());
        self.wiggle = wiggle;
        self
    }

    pub fn strands(&self) -> usize {
        self.motions.len()
    }

    /// Positions and velocities of all strands at time `t`.
    pub fn eval(&self, t: f64, z: &mut [Complex64], dz: &mut [Complex64]) {
        let (s, c) = (PI * t).sin_cos();
        for (k, motion) in self.motions.iter().enumerate() {
            let (p, v) = motion.eval(t);
            let w = self.wiggle[k];
            z[k] = p + w * s;
            dz[k] = v + w * (PI * c);
        }
    }

    pub fn start(&self) -> Vec<Complex64> {
        self.at(0.0)
    }

    pub fn end(&self) -> Vec<Complex64> {
        self.at(1.0)
    }

    fn at(&self, t: f64) -> Vec<Complex64> {
        let n = self.strands();
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        let mut dz = z.clone();
        self.eval(t, &mut z, &mut dz);
        z
    }
}

/// A piecewise-smooth path of `n` distinct points in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct StrandPath {
    n: usize,
    pieces: Vec<Piece>,
}

const CHAIN_TOLERANCE: f64 = 1e-12;

impl StrandPath {
    pub fn new(n: usize, pieces: Vec<Piece>) -> Result<Self> {
        for (k, piece) in pieces.iter().enumerate() {
            if piece.strands() != n {
                return Err(Error::StrandMismatch {
                    left: n,
                    right: piece.strands(),
                });
            }
            if k > 0 {
                let gap = pieces[k - 1]
                    .end()
                    .iter()
                    .zip(piece.start())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                if gap > CHAIN_TOLERANCE {
                    return Err(Error::BrokenChain(k - 1, k));
                }
            }
        }
        Ok(Self { n, pieces })
    }

    pub fn strands(&self) -> usize {
        self.n
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn base_point(n: usize) -> Vec<Complex64> {
        (0..n).map(|k| Complex64::new(k as f64 + 1.0, 0.0)).collect()
    }

    /// Adds an endpoint-fixing sinusoidal wiggle of the given amplitude to every strand
    /// in every piece; directions differ per strand and per piece.
    pub fn perturbed(&self, amplitude: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .enumerate()
            .map(|(p, piece)| {
                let wiggle = (0..self.n)
                    .map(|k| Complex64::from_polar(amplitude, 0.7 + 2.1 * k as f64 + 1.3 * p as f64))
                    .collect();
                piece.clone().with_wiggle(wiggle)
            })
            .collect();
        Self {
            n: self.n,
            pieces,
        }
    }

    /// Smallest pairwise distance: sampled at `samples + 1` equispaced times per piece,
    /// then refined around the best sample of each pair by golden-section search.
    pub fn min_separation(&self, samples: usize) -> f64 {
        let samples = samples.max(2);
        let mut best = f64::INFINITY;
        for piece in &self.pieces {
            let mut z = vec![Complex64::new(0.0, 0.0); self.n];
            let mut dz = z.clone();
            let mut distance = |a: usize, b: usize, t: f64| {
                piece.eval(t, &mut z, &mut dz);
                (z[a] - z[b]).norm()
            };
            let h = 1.0 / samples as f64;
            for a in 0..self.n {
                for b in (a + 1)..self.n {
                    let (mut t_best, mut d_best) = (0.0, f64::INFINITY);
                    for s in 0..=samples {
                        let t = s as f64 * h;
                        let d = distance(a, b, t);
                        if d < d_best {
                            (t_best, d_best) = (t, d);
                        }
                    }
                    let (mut lo, mut hi) = ((t_best - h).max(0.0), (t_best + h).min(1.0));
                    let phi = 0.5 * (5f64.sqrt() - 1.0);
                    for _ in 0..60 {
                        let m1 = hi - phi * (hi - lo);
                        let m2 = lo + phi * (hi - lo);
                        if distance(a, b, m1) < distance(a, b, m2) {
                            hi = m2;
                        } else {
                            lo = m1;
                        }
                    }
                    best = best.min(d_best).min(distance(a, b, 0.5 * (lo + hi)));
                }
            }
        }
        best
    }

    /// Fails with [`Error::Collision`] if two strands come closer than `margin`.
    pub fn check_separation(&self, margin: f64) -> Result<()> {
        for (k, piece) in self.pieces.iter().enumerate() {
            let single = StrandPath {
                n: self.n,
                pieces: vec![piece.clone()],
            };
            let d = single.min_separation(256);
            if d < margin {
                let (a, b) = single.closest_pair();
                return Err(Error::Collision {
                    piece: k,
                    a: a + 1,
                    b: b + 1,
                    distance: d,
                });
            }
        }
        Ok(())
    }

    fn closest_pair(&self) -> (usize, usize) {
        let mut best = (f64::INFINITY, (0, 1));
        for a in 0..self.n {
            for b in (a + 1)..self.n {
                let pair = StrandPath {
                    n: 2,
                    pieces: self
                        .pieces
                        .iter()
                        .map(|p| Piece {
                            motions: vec![p.motions[a], p.motions[b]],
                            wiggle: vec![p.wiggle[a], p.wiggle[b]],
                        })
                        .collect(),
                };
                let d = pair.min_separation(256);
                if d < best.0 {
                    best = (d, (a, b));
                }
            }
        }
        best.1
    }
}
