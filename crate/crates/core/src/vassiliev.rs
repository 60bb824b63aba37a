//! The crossed product `U(n) ⋊ S_n`, the invariant of arbitrary braids, and a
//! numerical Drinfeld associator.
//!
//! Convention: `S_n` acts on `U(n)` by `Z_ij ↦ Z_{σ(i) σ(j)}` and
//! `(x, σ) · (y, τ) = (x σ(y), σ ∘ τ)`. With permutations read as final
//! arrangements (see [`crate::braid`]) this is the law under which concatenating
//! braid paths multiplies their lifts.

use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::braid::{BraidWord, Permutation};
use crate::dk::{DkAlgebra, DkElement, ReductionCache};
use crate::error::{Error, Result};
use crate::kz::{self, normalization, transport_piece, Connection, KzSpec, Quadrature};
use crate::quadrature::GaussRule;
use crate::series::{Alphabet, NCSeries};

type C64 = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct SemidirectElement {
    pub algebra: DkElement<C64>,
    pub permutation: Permutation,
}

impl SemidirectElement {
    pub fn new(algebra: DkElement<C64>, permutation: Permutation) -> Result<Self> {
        if algebra.strands() != permutation.degree() {
            return Err(Error::StrandMismatch {
                left: algebra.strands(),
                right: permutation.degree(),
            });
        }
        Ok(Self {
            algebra,
            permutation,
        })
    }

    pub fn one(algebra: &Arc<DkAlgebra>) -> Self {
        Self {
            algebra: algebra.one(),
            permutation: Permutation::identity(algebra.strands()),
        }
    }

    pub fn strands(&self) -> usize {
        self.permutation.degree()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        semidirect_mul(self, other)
    }

    pub fn inverse(&self) -> Result<Self> {
        let sigma = self.permutation.inverse();
        Ok(Self {
            algebra: self.algebra.inverse()?.sn_act(&sigma)?,
            permutation: sigma,
        })
    }

    /// Sup-norm distance of the algebra parts; infinite when the permutations differ.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.permutation != other.permutation {
            return Ok(f64::INFINITY);
        }
        Ok(self.algebra.sub(&other.algebra)?.sup_norm())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "algebra": self.algebra.to_json(),
            "permutation": self.permutation.to_string(),
            "images": self.permutation.images().iter().map(|i| i + 1).collect::<Vec<_>>(),
        })
    }
}

pub fn semidirect_mul(x: &SemidirectElement, y: &SemidirectElement) -> Result<SemidirectElement> {
    if x.strands() != y.strands() {
        return Err(Error::StrandMismatch {
            left: x.strands(),
            right: y.strands(),
        });
    }
    Ok(SemidirectElement {
        algebra: x.algebra.mul(&y.algebra.sn_act(&x.permutation)?)?,
        permutation: x.permutation.compose(&y.permutation),
    })
}

/// Transport along the half-turn geometry of `w`, paired with its permutation.
pub fn z_braid(w: &BraidWord, spec: &KzSpec, steps: usize) -> Result<SemidirectElement> {
    z_braid_with(w, spec, steps, ReductionCache::global())
}

pub fn z_braid_with(
    w: &BraidWord,
    spec: &KzSpec,
    steps: usize,
    cache: &ReductionCache,
) -> Result<SemidirectElement> {
    let t = kz::transport_with(&w.standard_geometry(), spec, Quadrature::new(steps), cache)?;
    SemidirectElement::new(t.value, w.permutation())
}

/// The `c` with `Z(uv) = Z(u) Z(v) (c, id)`.
pub fn defect(u: &BraidWord, v: &BraidWord, spec: &KzSpec, steps: usize) -> Result<DkElement<C64>> {
    let uv = u.concat(v)?;
    let product = semidirect_mul(&z_braid(u, spec, steps)?, &z_braid(v, spec, steps)?)?;
    let whole = z_braid(&uv, spec, steps)?;
    let quotient = product.inverse()?.mul(&whole)?;
    debug_assert!(quotient.permutation.is_identity());
    Ok(quotient.algebra)
}

/// `‖Z(u ⊗ v) − (embed(Z(u), Z(v)), σ_u ⊕ σ_v)‖_∞` for the juxtaposition of two braids.
pub fn juxtaposition_error(
    u: &BraidWord,
    v: &BraidWord,
    truncation: usize,
    steps: usize,
) -> Result<f64> {
    let cache = ReductionCache::global();
    let zu = z_braid(u, &KzSpec::new(u.strands(), truncation)?, steps)?;
    let zv = z_braid(v, &KzSpec::new(v.strands(), truncation)?, steps)?;
    let joined = u.juxtapose(v);
    let whole = z_braid(&joined, &KzSpec::new(joined.strands(), truncation)?, steps)?;
    let block = SemidirectElement::new(
        zu.algebra.embed(&zv.algebra, cache)?,
        zu.permutation.join(&zv.permutation),
    )?;
    whole.distance(&block)
}

#[derive(Debug, Clone)]
pub struct AssociatorResult {
    pub series: NCSeries<C64>,
    /// Difference of the last two extrapolated values in the `δ` ladder.
    pub convergence: f64,
    /// Signs of the boundary exponents at `0` and `1`.
    pub signs: (i8, i8),
}

impl AssociatorResult {
    pub fn to_json(&self) -> Value {
        json!({
            "series": self.series.to_json(),
            "convergence": self.convergence,
            "signs": [self.signs.0, self.signs.1],
        })
    }
}

/// Half of the two-pole system on a log-scaled parameter.
///
/// `near_zero`: `x = δ (1/2δ)^t`, covering `[δ, 1/2]`.
/// Otherwise `1 − x = (1/2) (2δ)^t`, covering `[1/2, 1 − δ]`.
struct TwoPole {
    delta: f64,
    near_zero: bool,
}

impl Connection for TwoPole {
    fn generators(&self) -> usize {
        2
    }

    fn eval(&self, t: f64, out: &mut [C64]) -> Result<()> {
        let span = (0.5 / self.delta).ln();
        let k = normalization();
        if self.near_zero {
            let x = self.delta * (t * span).exp();
            // dx = x L dt
            out[0] = k * span;
            out[1] = -k * (x * span / (1.0 - x));
        } else {
            let y = 0.5 * (-t * span).exp();
            // dx = y L dt
            out[0] = k * (y * span / (1.0 - y));
            out[1] = -k * span;
        }
        Ok(())
    }
}

/// `T(δ)`: transport of `h' = h (1/2πi)(A/x − B/(1−x))` from `δ` to `1 − δ`.
fn two_pole_transport(r: usize, delta: f64, steps: usize) -> Result<NCSeries<C64>> {
    let quadrature = Quadrature::new(steps);
    let rule = GaussRule::new(quadrature.nodes);
    let left = transport_piece(&TwoPole { delta, near_zero: true }, r, quadrature, &rule)?;
    let right = transport_piece(&TwoPole { delta, near_zero: false }, r, quadrature, &rule)?;
    Ok(left.mul(&right).to_series(Alphabet::two_letter()))
}

fn boundary_power(r: usize, letter: usize, sign: i8, delta: f64) -> Result<NCSeries<C64>> {
    let c = normalization() * (sign as f64 * delta.ln());
    NCSeries::generator(Alphabet::two_letter(), r, letter).scale(&c).exp()
}

fn regularized(r: usize, delta: f64, steps: usize, signs: (i8, i8)) -> Result<NCSeries<C64>> {
    let t = two_pole_transport(r, delta, steps)?;
    boundary_power(r, 0, signs.0, delta)?
        .mul(&t)?
        .mul(&boundary_power(r, 1, signs.1, delta)?)
}

/// The regularized transport `δ^{±A/2πi} T(δ) δ^{±B/2πi}`, with each sign chosen
/// by convergence under `δ → δ/2` and extrapolated along `δ, δ/2, δ/4`.
pub fn associator(r: usize, delta: f64, steps: usize) -> Result<AssociatorResult> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Precondition(format!("δ must lie in (0, 1/2), got {delta}")));
    }
    if steps < kz::MIN_STEPS {
        return Err(Error::Precondition(format!(
            "steps must be at least {}",
            kz::MIN_STEPS
        )));
    }
    let r_sign = r.max(2);
    let mut best: Option<((i8, i8), f64)> = None;
    for signs in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
        let a = regularized(r_sign, delta, steps, signs)?;
        let b = regularized(r_sign, delta / 2.0, steps, signs)?;
        let gap = a.sub(&b)?.sup_norm();
        if best.map_or(true, |(_, g)| gap < g) {
            best = Some((signs, gap));
        }
    }
    let signs = best.expect("four candidates").0;
    let ladder: Vec<NCSeries<C64>> = (0..3)
        .map(|k| regularized(r, delta / f64::from(1 << k), steps, signs))
        .collect::<Result<_>>()?;
    let first = ladder[0].sub(&ladder[1])?.sup_norm();
    let second = ladder[1].sub(&ladder[2])?.sup_norm();
    if second > first && second > 1e-12 {
        return Err(Error::NonConvergence(format!(
            "successive differences {first:.3e} then {second:.3e}"
        )));
    }
    let two = C64::new(2.0, 0.0);
    let r1 = ladder[1].scale(&two).sub(&ladder[0])?;
    let r2 = ladder[2].scale(&two).sub(&ladder[1])?;
    let convergence = r2.sub(&r1)?.sup_norm();
    Ok(AssociatorResult {
        series: r2,
        convergence,
        signs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dk::DkAlgebra;
    use crate::series::Word;
    use proptest::prelude::*;

    fn word(n: usize, letters: &[i32]) -> BraidWord {
        BraidWord::new(n, letters.to_vec()).unwrap()
    }

    fn spec(n: usize, r: usize) -> KzSpec {
        KzSpec::new(n, r).unwrap()
    }

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn multiplication_examples() {
        let u = DkAlgebra::new(3, 3).unwrap();
        let one = SemidirectElement::one(&u);
        let z12 = SemidirectElement::new(u.z(1, 2), Permutation::identity(3)).unwrap();
        let x = SemidirectElement::new(u.z(1, 3), Permutation::transposition(3, 1, 2).unwrap()).unwrap();
        assert_eq!(one.mul(&x).unwrap(), x);
        assert_eq!(z12.mul(&z12).unwrap().algebra, u.z::<C64>(1, 2).mul(&u.z(1, 2)).unwrap());
        let swap = SemidirectElement::new(u.one(), Permutation::transposition(3, 2, 3).unwrap()).unwrap();
        let product = swap.mul(&z12).unwrap();
        assert_eq!(product.algebra, u.z(1, 3));
        assert_eq!(product.permutation, Permutation::transposition(3, 2, 3).unwrap());
        assert!(matches!(
            SemidirectElement::new(u.one(), Permutation::identity(2)),
            Err(Error::StrandMismatch { .. })
        ));
    }

    #[test]
    fn half_twist_lift() {
        let z = z_braid(&word(2, &[1]), &spec(2, 4), 256).unwrap();
        let u = DkAlgebra::new(2, 4).unwrap();
        let expected = u.z::<C64>(1, 2).scale(&c(0.5)).exp().unwrap();
        assert_eq!(z.permutation, Permutation::transposition(2, 1, 2).unwrap());
        assert!(z.algebra.sub(&expected).unwrap().sup_norm() < 1e-6);
        let square = z.mul(&z).unwrap();
        assert!(square.permutation.is_identity());
        let full = u.z::<C64>(1, 2).exp().unwrap();
        assert!(square.algebra.sub(&full).unwrap().sup_norm() < 1e-6);
    }

    #[test]
    fn pure_words_agree_with_pure_invariant() {
        let w = word(3, &[1, 2, 2, 1]);
        let z = z_braid(&w, &spec(3, 3), 128).unwrap();
        assert!(z.permutation.is_identity());
        let p = kz::z_pure(&w, &spec(3, 3), 128).unwrap();
        assert!(z.algebra.sub(&p).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn defect_examples() {
        let d = defect(&word(4, &[1]), &word(4, &[3]), &spec(4, 3), 128).unwrap();
        assert!(d.sub(&d.algebra().one()).unwrap().sup_norm() < 1e-6);
        let d = defect(&word(2, &[1]), &word(2, &[1]), &spec(2, 3), 128).unwrap();
        assert!(d.sub(&d.algebra().one()).unwrap().sup_norm() < 1e-6);
        // Lifts from one fixed base point multiply exactly, commuting or not.
        let d = defect(&word(3, &[1]), &word(3, &[2]), &spec(3, 3), 128).unwrap();
        assert!(d.sub(&d.algebra().one()).unwrap().sup_norm() < 1e-6);
    }

    #[test]
    fn inverse_words() {
        let w = word(3, &[1, -2, 2, 1, 1]);
        let z = z_braid(&w, &spec(3, 3), 128).unwrap();
        let zi = z_braid(&w.inverse(), &spec(3, 3), 128).unwrap();
        let one = SemidirectElement::one(z.algebra.algebra());
        assert!(z.mul(&zi).unwrap().distance(&one).unwrap() < 1e-6);
        assert!(z.inverse().unwrap().distance(&zi).unwrap() < 1e-6);
    }

    #[test]
    fn juxtaposition_agrees_in_degree_one() {
        let e = juxtaposition_error(&word(2, &[]), &word(2, &[]), 3, 64).unwrap();
        assert!(e < 1e-12);
        // For pure factors degree one counts windings, which are blind to the neighbours.
        let (u, v) = (word(2, &[1, 1]), word(2, &[-1, -1]));
        let joined = u.juxtapose(&v);
        let whole = z_braid(&joined, &spec(4, 3), 128).unwrap();
        let zu = z_braid(&u, &spec(2, 3), 128).unwrap();
        let zv = z_braid(&v, &spec(2, 3), 128).unwrap();
        let block = zu.algebra.embed(&zv.algebra, ReductionCache::global()).unwrap();
        assert_eq!(whole.permutation, zu.permutation.join(&zv.permutation));
        let diff = whole.algebra.sub(&block).unwrap();
        assert!(diff.graded_component(1).sup_norm() < 1e-6);
        assert_eq!(diff.leading_degree(1e-6), Some(2));
    }

    #[test]
    fn associator_low_degrees() {
        let a = associator(3, 1e-3, 128).unwrap();
        let s = &a.series;
        assert!((s.constant_term() - c(1.0)).norm() < 1e-9);
        assert!(s.graded_component(1).sup_norm() < 1e-6);
        let ab = s.coefficient(&Word(vec![0, 1]));
        let ba = s.coefficient(&Word(vec![1, 0]));
        assert!((ab.norm() - 1.0 / 24.0).abs() < 1e-4, "{ab}");
        assert!((ba.norm() - 1.0 / 24.0).abs() < 1e-4, "{ba}");
        assert!(s.coefficient(&Word(vec![0, 0])).norm() < 1e-6);
        let zeta3 = 1.202_056_903_159_594_3;
        let aab = s.coefficient(&Word(vec![0, 0, 1]));
        let expected = zeta3 / (8.0 * std::f64::consts::PI.powi(3));
        assert!((aab.norm() - expected).abs() < 1e-4, "{aab} vs {expected}");
        assert!(s.is_grouplike(1e-4).unwrap());
        assert!(associator(2, 0.7, 64).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn multiplication_is_associative(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let u = DkAlgebra::new(3, 3).unwrap();
            let mut random = || {
                let mut x = u.one::<C64>();
                for (i, j) in [(1, 2), (1, 3), (2, 3)] {
                    let k = c(rng.gen_range(-1.0..1.0));
                    x = x.add(&u.z(i, j).scale(&k)).unwrap();
                }
                let images = match rng.gen_range(0..3) {
                    0 => vec![1, 2, 3],
                    1 => vec![2, 3, 1],
                    _ => vec![1, 3, 2],
                };
                SemidirectElement::new(x.mul(&x).unwrap(), Permutation::from_one_based(&images).unwrap()).unwrap()
            };
            let (a, b, d) = (random(), random(), random());
            let left = a.mul(&b).unwrap().mul(&d).unwrap();
            let right = a.mul(&b.mul(&d).unwrap()).unwrap();
            prop_assert!(left.distance(&right).unwrap() < 1e-12);
        }
    }
}
