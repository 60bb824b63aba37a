//! Acceptance criteria 1 to 11. Prints one line per criterion and exits nonzero if
//! any of them fails.

use std::process::ExitCode;
use std::time::Instant;

use kzbraid_core::chord::ChordAlgebra;
use kzbraid_core::dk::{arnold_betti, arnold_monomial_counts, dim, hilbert_oracle, DkAlgebra};
use kzbraid_core::kz::{homotopy_perturbation_check, z_pure, KzSpec};
use kzbraid_core::series::Word;
use kzbraid_core::vassiliev::{associator, defect, juxtaposition_error};
use kzbraid_core::{BraidWord, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEPS: usize = 256;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn spec(n: usize, r: usize) -> KzSpec {
    KzSpec::new(n, r).unwrap()
}

fn random_pure_word(rng: &mut ChaCha8Rng, n: usize, max_factors: usize) -> BraidWord {
    let mut w = BraidWord::identity(n).unwrap();
    for _ in 0..rng.gen_range(1..=max_factors) {
        let i = rng.gen_range(1..n);
        let j = rng.gen_range(i + 1..=n);
        let mut a = BraidWord::pure_generator(i, j, n).unwrap();
        if rng.gen_bool(0.5) {
            a = a.inverse();
        }
        w = w.concat(&a).unwrap();
    }
    w
}

fn random_word(rng: &mut ChaCha8Rng, n: usize, max_len: usize) -> BraidWord {
    let letters = (0..rng.gen_range(1..=max_len))
        .map(|_| {
            let i = rng.gen_range(1..n as i32);
            if rng.gen_bool(0.5) {
                i
            } else {
                -i
            }
        })
        .collect();
    BraidWord::new(n, letters).unwrap()
}

fn hilbert_dimensions() -> Outcome {
    let mut cases = Vec::new();
    for n in 2..=4 {
        cases.extend((0..=5).map(|d| (n, d)));
    }
    cases.extend((0..=3).map(|d| (5, d)));
    let bad: Vec<String> = cases
        .iter()
        .filter(|&&(n, d)| dim(n, d).unwrap() as u128 != hilbert_oracle(n, d))
        .map(|(n, d)| format!("({n},{d})"))
        .collect();
    outcome(bad.is_empty(), format!("{} levels checked, mismatches: {bad:?}", cases.len()))
}

fn arnold_betti_numbers() -> Outcome {
    let ok = (1..=6).all(|n| {
        let counts = arnold_monomial_counts(n);
        (0..n).all(|l| arnold_betti(n, l) == counts[l])
    });
    let b6: Vec<u128> = (0..6).map(|l| arnold_betti(6, l)).collect();
    outcome(ok, format!("n = 6: {b6:?}"))
}

fn full_twists() -> Outcome {
    let mut worst = Vec::new();
    for n in 2..=4 {
        let u = DkAlgebra::new(n, 4).unwrap();
        for i in 1..n {
            let w = BraidWord::new(n, vec![i as i32, i as i32]).unwrap();
            let z = z_pure(&w, &spec(n, 4), STEPS).unwrap();
            let e = z.sub(&u.z::<Complex64>(i, i + 1).exp().unwrap()).unwrap().sup_norm();
            worst.push(((n, i), e));
        }
    }
    let failing: Vec<String> = worst
        .iter()
        .filter(|(_, e)| *e >= 1e-6)
        .map(|((n, i), e)| format!("n={n} i={i}: {e:.2e}"))
        .collect();
    let max_n2 = worst.iter().filter(|((n, _), _)| *n == 2).map(|(_, e)| *e).fold(0.0, f64::max);
    outcome(
        failing.is_empty(),
        format!("n = 2 deviation {max_n2:.2e}; over 1e-6: {failing:?}"),
    )
}

fn homomorphism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = spec(3, 4);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let u = random_pure_word(&mut rng, 3, 3);
        let v = random_pure_word(&mut rng, 3, 3);
        let zu = z_pure(&u, &s, STEPS).unwrap();
        let zv = z_pure(&v, &s, STEPS).unwrap();
        let zuv = z_pure(&u.concat(&v).unwrap(), &s, STEPS).unwrap();
        worst = worst.max(zuv.sub(&zu.mul(&zv).unwrap()).unwrap().sup_norm());
    }
    outcome(worst < 1e-6, format!("50 pairs, max deviation {worst:.2e}"))
}

fn product_formula() -> Outcome {
    let words: [&[i32]; 5] = [&[], &[1, 1], &[1], &[-1, -1], &[1, -1, 1]];
    let mut results = Vec::new();
    for r in 1..=4 {
        for u in words {
            for v in words {
                let u = BraidWord::new(2, u.to_vec()).unwrap();
                let v = BraidWord::new(2, v.to_vec()).unwrap();
                results.push(juxtaposition_error(&u, &v, r, STEPS).unwrap());
            }
        }
    }
    let worst = results.iter().copied().fold(0.0, f64::max);
    let over = results.iter().filter(|&&e| e >= 1e-6).count();
    outcome(
        over == 0,
        format!("{} cases on 2 + 2 strands, {over} over 1e-6, max {worst:.2e}", results.len()),
    )
}

fn lower_central_series() -> Outcome {
    let s = spec(3, 4);
    let a = |i, j| BraidWord::pure_generator(i, j, 3).unwrap();
    let c2 = a(1, 2).commutator(&a(1, 3)).unwrap();
    let c3 = c2.commutator(&a(2, 3)).unwrap();
    let words = [a(1, 2), c2.clone(), c3];
    let mut degrees = Vec::new();
    for w in &words {
        degrees.push(z_pure(w, &s, STEPS).unwrap().leading_degree(1e-6));
    }
    let u = DkAlgebra::new(3, 4).unwrap();
    let bracket = u.z::<Complex64>(1, 2).bracket(&u.z(1, 3)).unwrap();
    let z2 = z_pure(&c2, &s, STEPS).unwrap();
    let term = z2.graded_component(2).sub(&bracket).unwrap().sup_norm();
    let ok = degrees == [Some(1), Some(2), Some(3)] && term < 1e-5;
    outcome(ok, format!("leading degrees {degrees:?}, depth-2 term error {term:.2e}"))
}

fn chord_table() -> Outcome {
    let algebra = ChordAlgebra::new(5).unwrap();
    let d: Vec<usize> = (1..=5).map(|m| algebra.primitive_dim(m)).collect();
    let six = ChordAlgebra::new(6).map(|a| a.primitive_dim(6));
    outcome(
        d == [1, 1, 1, 2, 3],
        format!("d_1..d_5 = {d:?}, d_6 = {}", six.map_or("skipped".into(), |x| x.to_string())),
    )
}

fn grouplike() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s = spec(3, 3);
    let mut failures = 0;
    for _ in 0..20 {
        let w = random_pure_word(&mut rng, 3, 4);
        if !z_pure(&w, &s, STEPS).unwrap().is_grouplike(1e-6).unwrap() {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("20 words, {failures} not grouplike"))
}

fn commuting_defect() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let s = spec(4, 3);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    while pairs < 100 {
        let u = random_word(&mut rng, 4, 4);
        let v = random_word(&mut rng, 4, 4);
        let (pu, pv) = (u.permutation(), v.permutation());
        if pu.compose(&pv) != pv.compose(&pu) {
            continue;
        }
        let c = defect(&u, &v, &s, STEPS).unwrap();
        worst = worst.max(c.sub(&c.algebra().one()).unwrap().sup_norm());
        pairs += 1;
    }
    outcome(worst < 1e-5, format!("100 pairs, max |c - 1| = {worst:.2e}"))
}

fn associator_coefficients() -> Outcome {
    let a = associator(2, 1e-3, 128).unwrap();
    let ab = a.series.coefficient(&Word(vec![0, 1])).norm();
    let ba = a.series.coefficient(&Word(vec![1, 0])).norm();
    let linear = a.series.graded_component(1).sup_norm();
    let target = 1.0 / 24.0;
    let ok = (ab - target).abs() < 1e-4 && (ba - target).abs() < 1e-4 && linear < 1e-6;
    outcome(ok, format!("|AB| = {ab:.7}, |BA| = {ba:.7}, |degree 1| = {linear:.1e}"))
}

fn homotopy_invariance() -> Outcome {
    let w = BraidWord::new(3, vec![1, 1]).unwrap();
    let d = homotopy_perturbation_check(&w, &spec(3, 3), STEPS, 0.1).unwrap();
    outcome(d < 1e-5, format!("difference {d:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("graded dimensions of U(n) match the Hilbert series", hilbert_dimensions),
        ("Betti numbers of the braid arrangement", arnold_betti_numbers),
        ("Z of a full twist is exp(Z_i,i+1), n <= 4", full_twists),
        ("Z is multiplicative on pure braids", homomorphism),
        ("juxtaposition matches the block embedding", product_formula),
        ("lower central series depth equals leading degree", lower_central_series),
        ("primitive dimensions of chord diagrams", chord_table),
        ("Z of pure braids is grouplike", grouplike),
        ("defect is 1 for commuting permutations", commuting_defect),
        ("associator coefficients", associator_coefficients),
        ("homotopy invariance under perturbation", homotopy_invariance),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({}; {:.1}s)",
            k + 1,
            if result.pass { "PASS" } else { "FAIL" },
            name,
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
