//! Gauss-Legendre quadrature rules.
//!
//! One-dimensional nodes/weights are generated by Newton iteration on the
//! Legendre recurrence, which is accurate to machine precision for the
//! orders used here. Through-thickness integrals use a composite rule with
//! panels graded geometrically towards the metal face, where power-law
//! volume fractions with fractional exponent have an unbounded derivative.

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((-x, w));
        if n - 1 - i != i {
            out.push((x, w));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Legendre polynomial P_n and its derivative at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product Gauss points on the biunit square; `(xi, eta, weight)`.
pub fn gauss_2d(order: usize) -> Vec<(f64, f64, f64)> {
    let g = gauss_legendre(order);
    let mut pts = Vec::with_capacity(order * order);
    for &(e, we) in &g {
        for &(x, wx) in &g {
            pts.push((x, e, wx * we));
        }
    }
    pts
}

/// Composite Gauss-Legendre rule on [0, 1] with panels graded towards 0.
///
/// Panel edges run 0, 1e-8, 1e-7, ..., 1; each panel carries an
/// `order`-point rule. Integrands of the form `xi^alpha` (alpha >= 0,
/// possibly fractional) integrate to near machine precision.
pub fn graded_unit_rule(order: usize) -> Vec<(f64, f64)> {
    let g = gauss_legendre(order);
    let mut edges: Vec<f64> = vec![0.0, 1e-8];
    while *edges.last().unwrap() < 1.0 {
        let next = (edges.last().unwrap() * 10.0).min(1.0);
        edges.push(next);
    }
    let mut rule = Vec::with_capacity(order * (edges.len() - 1));
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for &(x, w) in &g {
            rule.push((mid + half * x, half * w));
        }
    }
    rule
}
