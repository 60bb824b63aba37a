//! Gauss–Legendre rules and the matching collocation tableau.

use std::f64::consts::PI;

/// Nodes and weights on `[0, 1]`, plus the collocation matrix
/// `a[i][j] = ∫_0^{c_i} ℓ_j(τ) dτ` for the Lagrange basis `ℓ_j` on the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
}

/// Nodes and weights of the `s`-point rule on `[-1, 1]` by Newton iteration on `P_s`.
pub fn legendre(s: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(s >= 1, "rule needs at least one node");
    let mut nodes = vec![0.0; s];
    let mut weights = vec![0.0; s];
    for k in 0..s {
        let mut x = (PI * (k as f64 + 0.75) / (s as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_eval(s, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_eval(s, x);
        dp = if d != 0.0 { d } else { dp };
        nodes[k] = x;
        weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // ascending
    let mut idx: Vec<usize> = (0..s).collect();
    idx.sort_by(|&a, &b| nodes[a].total_cmp(&nodes[b]));
    (
        idx.iter().map(|&i| nodes[i]).collect(),
        idx.iter().map(|&i| weights[i]).collect(),
    )
}

/// `(P_s(x), P_s'(x))` by the three-term recurrence.
fn legendre_eval(s: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if s == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=s {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = s as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

impl GaussRule {
    pub fn new(s: usize) -> Self {
        let (x, w) = legendre(s);
        let nodes: Vec<f64> = x.iter().map(|x| 0.5 * (x + 1.0)).collect();
        let weights: Vec<f64> = w.iter().map(|w| 0.5 * w).collect();
        // ℓ_j has degree s − 1, so the s-point rule on [0, c_i] integrates it exactly.
        let matrix = nodes
            .iter()
            .map(|&ci| {
                (0..s)
                    .map(|j| {
                        nodes
                            .iter()
                            .zip(&weights)
                            .map(|(&u, &wu)| ci * wu * lagrange(&nodes, j, ci * u))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Self {
            nodes,
            weights,
            matrix,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn lagrange(nodes: &[f64], j: usize, x: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != j)
        .map(|(_, &xk)| (x - xk) / (nodes[j] - xk))
        .product()
}
