//! Command implementations for the `kzbraid` binary.
//!
//! Every command returns a [`Report`] holding a text rendering, a JSON payload and
//! whether the checks it performed passed.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use kzbraid_core::chord::{chord_table, polynomial_algebra_dims};
use kzbraid_core::dk::{self, arnold_betti, arnold_monomial_counts, hilbert_oracle};
use kzbraid_core::kz::{self, KzSpec, MIN_STEPS};
use kzbraid_core::scalar::round12;
use kzbraid_core::series::Word;
use kzbraid_core::vassiliev::{self, z_braid};
use kzbraid_core::{BraidWord, NCSeries};
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub degree: usize,
    pub steps: usize,
    pub tolerance: f64,
    pub cache_dir: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 3,
            degree: 3,
            steps: kz::DEFAULT_STEPS,
            tolerance: 1e-6,
            cache_dir: None,
            format: Format::Text,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            bail!("n must be at least 1");
        }
        if self.steps < MIN_STEPS {
            bail!("steps must be at least {MIN_STEPS}, got {}", self.steps);
        }
        if !(self.tolerance > 0.0) {
            bail!("tolerance must be positive, got {}", self.tolerance);
        }
        Ok(())
    }

    fn spec(&self) -> Result<KzSpec> {
        Ok(KzSpec::new(self.n, self.degree)?)
    }

    fn word(&self, text: &str) -> Result<BraidWord> {
        BraidWord::parse(self.n, text).with_context(|| format!("cannot parse braid word `{text}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub ok: bool,
    pub text: String,
    pub data: Value,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Json => serde_json::to_string_pretty(&self.to_json()).expect("json"),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "ok": self.ok,
            "result": self.data,
        })
    }
}

fn render_series(series: &NCSeries<kzbraid_core::Complex64>, tol: f64) -> String {
    let mut lines = Vec::new();
    for d in 0..=series.truncation() {
        let terms: Vec<String> = series
            .graded_component(d)
            .terms()
            .iter()
            .filter(|(_, c)| c.norm() >= tol)
            .map(|(w, c)| {
                let (re, im) = (round12(c.re), round12(c.im));
                let coefficient = if im.abs() < tol {
                    format!("{re}")
                } else if re.abs() < tol {
                    format!("{im}i")
                } else {
                    format!("({re}{im:+}i)")
                };
                if w.is_empty() {
                    coefficient
                } else {
                    format!("{coefficient} {}", series.alphabet().render_word(w))
                }
            })
            .collect();
        if !terms.is_empty() {
            lines.push(format!("  degree {d}: {}", terms.join(" + ")));
        }
    }
    lines.join("\n")
}

fn display_word(w: &BraidWord) -> String {
    if w.is_empty() {
        "(empty)".into()
    } else {
        w.to_string()
    }
}

/// Graded dimensions of `U(n)` against the Hilbert series oracle.
pub fn cmd_dims(n: usize, max_degree: usize) -> Result<Report> {
    let mut rows = Vec::new();
    let mut text = format!("dim U({n})_d\n  d  dim  oracle  match\n");
    let mut ok = true;
    for d in 0..=max_degree {
        let dim = dk::dim(n, d).with_context(|| format!("cannot compute dim U({n})_{d}"))?;
        let oracle = hilbert_oracle(n, d);
        let matches = dim as u128 == oracle;
        ok &= matches;
        text.push_str(&format!("  {d}  {dim}  {oracle}  {}\n", if matches { "yes" } else { "NO" }));
        rows.push(json!({"d": d, "dim": dim, "oracle": oracle.to_string(), "match": matches}));
    }
    Ok(Report {
        command: "dims",
        ok,
        text,
        data: json!({"n": n, "rows": rows}),
    })
}

/// Betti numbers of the complement of the braid arrangement.
pub fn cmd_betti(n: usize) -> Result<Report> {
    if n < 1 || n > 6 {
        bail!("betti supports 1 ≤ n ≤ 6");
    }
    let counts = arnold_monomial_counts(n);
    let mut ok = true;
    let mut rows = Vec::new();
    let mut text = format!("Betti numbers for n = {n}\n");
    for l in 0..n {
        let b = arnold_betti(n, l);
        let matches = counts[l] == b;
        ok &= matches;
        text.push_str(&format!("  b_{l} = {b}{}\n", if matches { "" } else { "  (count mismatch)" }));
        rows.push(json!({"l": l, "betti": b.to_string(), "monomials": counts[l].to_string()}));
    }
    Ok(Report {
        command: "betti",
        ok,
        text,
        data: json!({"n": n, "rows": rows}),
    })
}

/// The invariant of a braid word: `U(n)` element for pure words, crossed-product
/// element otherwise.
pub fn cmd_zinv(config: &RunConfig, word: &str) -> Result<Report> {
    config.validate()?;
    let w = config.word(word)?;
    let z = z_braid(&w, &config.spec()?, config.steps)?;
    let text = format!(
        "Z({}) on {} strands, degree {}, steps {}\n  permutation: {}\n{}\n",
        display_word(&w),
        config.n,
        config.degree,
        config.steps,
        z.permutation,
        render_series(z.algebra.series(), config.tolerance)
    );
    let data = if w.is_pure() {
        json!({"word": w.to_string(), "pure": true, "element": z.algebra.to_json()})
    } else {
        json!({"word": w.to_string(), "pure": false, "element": z.to_json()})
    };
    Ok(Report {
        command: "zinv",
        ok: true,
        text,
        data,
    })
}

/// Compares the invariants of two pure braids degree by degree.
pub fn cmd_compare(config: &RunConfig, first: &str, second: &str) -> Result<Report> {
    config.validate()?;
    let spec = config.spec()?;
    let (u, v) = (config.word(first)?, config.word(second)?);
    let zu = kz::z_pure(&u, &spec, config.steps).context("first word")?;
    let zv = kz::z_pure(&v, &spec, config.steps).context("second word")?;
    let norms = zu.sub(&zv)?.degree_norms();
    let first_degree = norms.iter().position(|&x| x > config.tolerance);
    let verdict = match first_degree {
        None => format!("indistinguishable up to degree {}", config.degree),
        Some(d) => format!("distinguished at degree {d}"),
    };
    let text = format!(
        "{}  vs  {}\n  per-degree sup-norm: {}\n  {verdict}\n",
        display_word(&u),
        display_word(&v),
        norms.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")
    );
    Ok(Report {
        command: "compare",
        ok: true,
        text,
        data: json!({
            "first": u.to_string(),
            "second": v.to_string(),
            "degree_norms": norms,
            "distinguished_at": first_degree,
            "verdict": verdict,
        }),
    })
}

/// `c` with `Z(uv) = Z(u) Z(v) (c, id)`; when the permutations commute the check is `c = 1`.
pub fn cmd_defect(config: &RunConfig, first: &str, second: &str) -> Result<Report> {
    config.validate()?;
    let (u, v) = (config.word(first)?, config.word(second)?);
    let (pu, pv) = (u.permutation(), v.permutation());
    let commuting = pu.compose(&pv) == pv.compose(&pu);
    let c = vassiliev::defect(&u, &v, &config.spec()?, config.steps)?;
    let distance = c.sub(&c.algebra().one())?.sup_norm();
    let ok = !commuting || distance < config.tolerance;
    let text = format!(
        "defect of {} · {}\n  permutations commute: {commuting}\n  ‖c − 1‖ = {distance:.3e}\n{}\n",
        display_word(&u),
        display_word(&v),
        render_series(c.series(), config.tolerance)
    );
    Ok(Report {
        command: "defect",
        ok,
        text,
        data: json!({
            "u": u.to_string(),
            "v": v.to_string(),
            "commuting": commuting,
            "distance_from_one": distance,
            "leading_degree": c.sub(&c.algebra().one())?.leading_degree(config.tolerance),
            "element": c.to_json(),
        }),
    })
}

/// Diagram counts, `dim A_m`, `dim A^r_m` and primitive dimensions.
pub fn cmd_chord_dims(max: usize) -> Result<Report> {
    let table = chord_table(max)?;
    let primitive: Vec<usize> = table.iter().map(|r| r.primitive).collect();
    let predicted = polynomial_algebra_dims(&primitive, max);
    let mut ok = true;
    let mut text = String::from("  m  diagrams  dim A  dim A^r  d_m\n");
    let mut rows = Vec::new();
    for row in &table {
        ok &= predicted[row.m] == row.dim_a as u128;
        text.push_str(&format!(
            "{:>3}{:>10}{:>7}{:>9}{:>5}\n",
            row.m, row.diagrams, row.dim_a, row.dim_ar, row.primitive
        ));
        rows.push(json!({
            "m": row.m,
            "diagrams": row.diagrams,
            "dim_a": row.dim_a,
            "dim_ar": row.dim_ar,
            "primitive": row.primitive,
        }));
    }
    if !ok {
        text.push_str("  grading identity FAILED\n");
    }
    Ok(Report {
        command: "chord-dims",
        ok,
        text,
        data: json!({"max": max, "rows": rows, "grading_identity": ok}),
    })
}

/// The numerical associator in the letters `A`, `B`.
pub fn cmd_associator(degree: usize, delta: f64, steps: usize, tolerance: f64) -> Result<Report> {
    let result = vassiliev::associator(degree, delta, steps)?;
    let s = &result.series;
    let linear = s.graded_component(1).sup_norm();
    let mut ok = linear < 1e-6;
    let mut text = format!(
        "associator, degree {degree}, δ = {delta}, steps {steps}\n  convergence estimate {:.3e}\n  |degree 1| = {linear:.3e}\n",
        result.convergence
    );
    if degree >= 2 {
        let ab = s.coefficient(&Word(vec![0, 1])).norm();
        let ba = s.coefficient(&Word(vec![1, 0])).norm();
        ok &= (ab - 1.0 / 24.0).abs() < 1e-4 && (ba - 1.0 / 24.0).abs() < 1e-4;
        text.push_str(&format!("  |AB| = {ab:.9}  |BA| = {ba:.9}  (1/24 = {:.9})\n", 1.0 / 24.0));
    }
    text.push_str(&render_series(s, tolerance));
    text.push('\n');
    Ok(Report {
        command: "associator",
        ok,
        text,
        data: result.to_json(),
    })
}
