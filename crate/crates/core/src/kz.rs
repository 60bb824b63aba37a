//! Parallel transport of the formal Knizhnik–Zamolodchikov connection
//! `ω = (1/2πi) Σ_{i<j} d log(z_i − z_j) Z_ij` along strand paths.
//!
//! The transport solves `h' = h · ω(t)` from `h(0) = 1`, truncated at degree `r`.
//! Because `ω` has no constant part the system is lower triangular by degree, and
//! each panel is advanced by Gauss collocation, which integrates the degreewise
//! iterated integrals with the Gauss–Legendre rule. Right multiplication makes the
//! transport of a concatenated path the product of the pieces in path order.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::braid::{BraidWord, Piece, StrandPath};
use crate::dk::{generator_pairs, DkAlgebra, DkElement, ReductionCache};
use crate::error::{Error, Result};
use crate::quadrature::GaussRule;
use crate::series::{Alphabet, NCSeries, Word};

pub const DEFAULT_STEPS: usize = 256;
pub const DEFAULT_NODES: usize = 8;
pub const MIN_STEPS: usize = 16;
pub const COLLISION_MARGIN: f64 = 1e-6;

type C64 = Complex64;

/// `1 / (2πi)`.
pub fn normalization() -> C64 {
    C64::new(0.0, -1.0 / (2.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KzSpec {
    n: usize,
    truncation: usize,
}

impl KzSpec {
    pub fn new(n: usize, truncation: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidStrandCount(n));
        }
        if truncation < 1 {
            return Err(Error::Precondition("truncation must be at least 1".into()));
        }
        Ok(Self { n, truncation })
    }

    pub fn strands(&self) -> usize {
        self.n
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }
}

/// Composite rule: `panels` equal panels per piece, `nodes` Gauss points per panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadrature {
    pub panels: usize,
    pub nodes: usize,
}

impl Quadrature {
    pub fn new(panels: usize) -> Self {
        Self {
            panels,
            nodes: DEFAULT_NODES,
        }
    }
}

/// Dense truncated series: `data[d]` holds the `g^d` coefficients of degree `d`, words
/// indexed in base `g` with the first letter most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSeries {
    g: usize,
    data: Vec<Vec<C64>>,
}

impl DenseSeries {
    pub fn one(g: usize, r: usize) -> Self {
        let data = (0..=r)
            .map(|d| {
                let mut v = vec![C64::new(0.0, 0.0); g.pow(d as u32)];
                if d == 0 {
                    v[0] = C64::new(1.0, 0.0);
                }
                v
            })
            .collect();
        Self { g, data }
    }

    pub fn truncation(&self) -> usize {
        self.data.len() - 1
    }

    pub fn degree(&self, d: usize) -> &[C64] {
        &self.data[d]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let r = self.truncation();
        let mut out = Self::one(self.g, r);
        out.data[0][0] = C64::new(0.0, 0.0);
        for a in 0..=r {
            for b in 0..=(r - a) {
                let (x, y) = (&self.data[a], &other.data[b]);
                let target = &mut out.data[a + b];
                let stride = y.len();
                for (i, &xi) in x.iter().enumerate() {
                    if xi == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for (j, &yj) in y.iter().enumerate() {
                        target[i * stride + j] += xi * yj;
                    }
                }
            }
        }
        out
    }

    pub fn max_difference(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    pub fn to_series(&self, alphabet: Arc<Alphabet>) -> NCSeries<C64> {
        let g = self.g;
        let r = self.truncation();
        let terms = self.data.iter().enumerate().flat_map(move |(d, v)| {
            v.iter().enumerate().map(move |(k, c)| {
                let mut letters = vec![0u16; d];
                let mut rest = k;
                for slot in letters.iter_mut().rev() {
                    *slot = (rest % g) as u16;
                    rest /= g;
                }
                (Word(letters), *c)
            })
        });
        NCSeries::from_terms(alphabet, r, terms)
    }
}

/// A smooth one-form on `[0, 1]` with values in the span of the generators.
pub trait Connection: Sync {
    fn generators(&self) -> usize;

    /// Writes the `dt`-coefficients of the form at `t` into `out`.
    fn eval(&self, t: f64, out: &mut [C64]) -> Result<()>;
}

/// Transport over one parameter interval `[0, 1]` starting from 1.
pub fn transport_piece(
    connection: &dyn Connection,
    r: usize,
    quadrature: Quadrature,
    rule: &GaussRule,
) -> Result<DenseSeries> {
    let g = connection.generators();
    let s = rule.len();
    let tau = 1.0 / quadrature.panels as f64;
    let mut h = DenseSeries::one(g, r);
    let mut omega = vec![vec![C64::new(0.0, 0.0); g]; s];
    // Stage values, per node and degree.
    let mut stages: Vec<Vec<Vec<C64>>> = vec![h.data.clone(); s];
    let mut products: Vec<Vec<C64>> = vec![Vec::new(); s];
    for panel in 0..quadrature.panels {
        let t0 = panel as f64 * tau;
        for (i, w) in omega.iter_mut().enumerate() {
            connection.eval(t0 + tau * rule.nodes[i], w)?;
        }
        for stage in stages.iter_mut() {
            stage[0][0] = h.data[0][0];
        }
        for d in 1..=r {
            for j in 0..s {
                let prev = &stages[j][d - 1];
                let w = &omega[j];
                let p = &mut products[j];
                p.clear();
                p.reserve(prev.len() * g);
                for &x in prev {
                    p.extend(w.iter().map(|&wk| x * wk));
                }
            }
            for i in 0..s {
                let target = &mut stages[i][d];
                target.copy_from_slice(&h.data[d]);
                for j in 0..s {
                    let a = C64::new(tau * rule.matrix[i][j], 0.0);
                    for (t, p) in target.iter_mut().zip(&products[j]) {
                        *t += a * p;
                    }
                }
            }
            let next = &mut h.data[d];
            for j in 0..s {
                let b = C64::new(tau * rule.weights[j], 0.0);
                for (t, p) in next.iter_mut().zip(&products[j]) {
                    *t += b * p;
                }
            }
        }
    }
    Ok(h)
}

/// The KZ form pulled back along one piece of a strand path.
struct PieceConnection<'a> {
    piece: &'a Piece,
    index: usize,
    pairs: Vec<(usize, usize)>,
}

impl Connection for PieceConnection<'_> {
    fn generators(&self) -> usize {
        self.pairs.len()
    }

    fn eval(&self, t: f64, out: &mut [C64]) -> Result<()> {
        let n = self.piece.strands();
        let mut z = vec![C64::new(0.0, 0.0); n];
        let mut dz = z.clone();
        self.piece.eval(t, &mut z, &mut dz);
        let k = normalization();
        for (slot, &(a, b)) in out.iter_mut().zip(&self.pairs) {
            let diff = z[a] - z[b];
            let distance = diff.norm();
            if distance < COLLISION_MARGIN {
                return Err(Error::Collision {
                    piece: self.index,
                    a: a + 1,
                    b: b + 1,
                    distance,
                });
            }
            *slot = k * (dz[a] - dz[b]) / diff;
        }
        Ok(())
    }
}

/// Transport in the free algebra on the `Z_ij`, before normal forms.
pub fn transport_free(path: &StrandPath, r: usize, quadrature: Quadrature) -> Result<DenseSeries> {
    let n = path.strands();
    if n < 2 {
        return Err(Error::InvalidStrandCount(n));
    }
    if quadrature.panels == 0 || quadrature.nodes == 0 {
        return Err(Error::Precondition("quadrature needs panels and nodes".into()));
    }
    path.check_separation(COLLISION_MARGIN)?;
    let rule = GaussRule::new(quadrature.nodes);
    let pairs = generator_pairs(n);
    let pieces = path
        .pieces()
        .par_iter()
        .enumerate()
        .map(|(index, piece)| {
            let c = PieceConnection {
                piece,
                index,
                pairs: pairs.clone(),
            };
            transport_piece(&c, r, quadrature, &rule)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pieces
        .iter()
        .fold(DenseSeries::one(pairs.len(), r), |acc, p| acc.mul(p)))
}

#[derive(Debug, Clone)]
pub struct TransportResult {
    pub value: DkElement<C64>,
    /// Sup-norm difference between the run and a run with half the panels.
    pub error_estimate: f64,
}

pub fn transport(path: &StrandPath, spec: &KzSpec, steps: usize) -> Result<TransportResult> {
    transport_with(path, spec, Quadrature::new(steps), ReductionCache::global())
}

pub fn transport_with(
    path: &StrandPath,
    spec: &KzSpec,
    quadrature: Quadrature,
    cache: &ReductionCache,
) -> Result<TransportResult> {
    if path.strands() != spec.n {
        return Err(Error::StrandMismatch {
            left: spec.n,
            right: path.strands(),
        });
    }
    if quadrature.panels < MIN_STEPS {
        return Err(Error::Precondition(format!(
            "steps must be at least {MIN_STEPS}, got {}",
            quadrature.panels
        )));
    }
    let algebra = DkAlgebra::with_cache(spec.n, spec.truncation, cache)?;
    let fine = transport_free(path, spec.truncation, quadrature)?;
    let coarse = transport_free(
        path,
        spec.truncation,
        Quadrature {
            panels: quadrature.panels / 2,
            ..quadrature
        },
    )?;
    let error_estimate = fine.max_difference(&coarse);
    // Degree 0 is never touched by the panel updates, so it stays exactly one.
    let value = algebra.normal_form(&fine.to_series(algebra.alphabet().clone()))?;
    Ok(TransportResult {
        value,
        error_estimate,
    })
}

/// The universal invariant of a pure braid.
pub fn z_pure(word: &BraidWord, spec: &KzSpec, steps: usize) -> Result<DkElement<C64>> {
    if !word.is_pure() {
        return Err(Error::NotPure);
    }
    Ok(transport(&word.standard_geometry(), spec, steps)?.value)
}

/// Leading degree of `Z(w) − 1`; `None` when trivial up to the truncation.
pub fn lcs_depth(word: &BraidWord, spec: &KzSpec, steps: usize, tol: f64) -> Result<Option<usize>> {
    Ok(z_pure(word, spec, steps)?.leading_degree(tol))
}

/// `‖Z(standard geometry) − Z(wiggled geometry)‖_∞`.
pub fn homotopy_perturbation_check(
    word: &BraidWord,
    spec: &KzSpec,
    steps: usize,
    amplitude: f64,
) -> Result<f64> {
    if !word.is_pure() {
        return Err(Error::NotPure);
    }
    let path = word.standard_geometry();
    let base = transport(&path, spec, steps)?.value;
    let wiggled = transport(&path.perturbed(amplitude), spec, steps)?.value;
    Ok(base.sub(&wiggled)?.sup_norm())
}
