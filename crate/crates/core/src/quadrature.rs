//! Reference rules on [-1, 1]: Gauss-Legendre, Gauss-Lobatto and the
//! Lagrange differentiation / indefinite integration matrices on their nodes.

use std::f64::consts::PI;

/// Nodes and weights of a rule on [-1, 1], plus interpolation operators.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `diff[i][j] = l_j'(x_i)`.
    pub diff: Vec<Vec<f64>>,
    /// `integ[i][j] = int_{-1}^{x_i} l_j(x) dx`.
    pub integ: Vec<Vec<f64>>,
}

/// `(P_n(x), P_n'(x))`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        x.powi(n as i32 + 1) * nf * (nf + 1.0) / 2.0
    } else {
        nf * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

fn newton(mut x: f64, f: impl Fn(f64) -> (f64, f64)) -> f64 {
    for _ in 0..100 {
        let (v, d) = f(x);
        let dx = v / d;
        x -= dx;
        if dx.abs() < 1e-16 {
            break;
        }
    }
    x
}

impl Rule {
    /// `n`-point Gauss-Legendre rule.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let guess = -(PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let x = newton(guess, |x| legendre(n, x));
            let (_, d) = legendre(n, x);
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * d * d));
        }
        Self::with_operators(nodes, weights)
    }

    /// `n`-point Gauss-Lobatto rule (endpoints included).
    pub fn gauss_lobatto(n: usize) -> Self {
        assert!(n >= 2);
        let m = n - 1;
        let mf = m as f64;
        let mut nodes = vec![-1.0];
        for i in 1..m {
            let guess = -(PI * i as f64 / mf).cos();
            // Roots of P_m': Newton on P_m' with P_m'' from the Legendre ODE.
            let x = newton(guess, |x| {
                let (p, dp) = legendre(m, x);
                let d2 = (2.0 * x * dp - mf * (mf + 1.0) * p) / (1.0 - x * x);
                (dp, d2)
            });
            nodes.push(x);
        }
        nodes.push(1.0);
        let weights = nodes
            .iter()
            .map(|&x| {
                let (p, _) = legendre(m, x);
                2.0 / (mf * (mf + 1.0) * p * p)
            })
            .collect();
        Self::with_operators(nodes, weights)
    }

    fn with_operators(nodes: Vec<f64>, weights: Vec<f64>) -> Self {
        let n = nodes.len();
        let bary: Vec<f64> = (0..n)
            .map(|j| {
                1.0 / (0..n)
                    .filter(|&k| k != j)
                    .map(|k| nodes[j] - nodes[k])
                    .product::<f64>()
            })
            .collect();
        let mut diff = vec![vec![0.0; n]; n];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                if i != j {
                    diff[i][j] = bary[j] / bary[i] / (nodes[i] - nodes[j]);
                    s += diff[i][j];
                }
            }
            diff[i][i] = -s;
        }
        // Legendre coefficients of l_j via discrete orthogonality of the rule.
        let p: Vec<Vec<f64>> = nodes
            .iter()
            .map(|&x| (0..=n).map(|m| legendre(m, x).0).collect())
            .collect();
        let gamma: Vec<f64> = (0..n)
            .map(|m| (0..n).map(|j| weights[j] * p[j][m] * p[j][m]).sum())
            .collect();
        let mut integ = vec![vec![0.0; n]; n];
        for i in 0..n {
            let x = nodes[i];
            let anti: Vec<f64> = (0..n)
                .map(|m| {
                    if m == 0 {
                        x + 1.0
                    } else {
                        let lo = legendre(m - 1, x).0;
                        let hi = legendre(m + 1, x).0;
                        (hi - lo) / (2 * m + 1) as f64
                    }
                })
                .collect();
            for j in 0..n {
                integ[i][j] = (0..n)
                    .map(|m| anti[m] * weights[j] * p[j][m] / gamma[m])
                    .sum();
            }
        }
        Rule {
            nodes,
            weights,
            diff,
            integ,
        }
    }
}
