//! Small numeric helpers shared across modules.

use crate::C64;

/// Pairwise (cascade) summation of complex terms, allocation-free.
///
/// The binary-counter scheme keeps O(log n) partial sums so the rounding
/// error grows like O(log n) rather than O(n).
pub fn pairwise_sum(terms: impl Iterator<Item = C64>) -> C64 {
    let mut stack = [C64::new(0.0, 0.0); 64];
    let mut depth = 0usize;
    for (i, x) in terms.enumerate() {
        let mut v = x;
        let mut bits = i;
        while bits & 1 == 1 {
            depth -= 1;
            v += stack[depth];
            bits >>= 1;
        }
        stack[depth] = v;
        depth += 1;
    }
    let mut total = C64::new(0.0, 0.0);
    for s in stack[..depth].iter().rev() {
        total += s;
    }
    total
}

/// Least-squares line through (x_i, y_i): returns (slope, intercept, r^2).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Nodes and weights of 16-point Gauss-Legendre quadrature on [-1, 1]
/// (positive half; the rule is symmetric).
const GL16_X: [f64; 8] = [
    0.09501250983763744,
    0.28160355077925891,
    0.45801677765722739,
    0.61787624440264375,
    0.75540440835500303,
    0.86563120238783174,
    0.94457502307323258,
    0.98940093499164993,
];
const GL16_W: [f64; 8] = [
    0.18945061045506850,
    0.18260341504492359,
    0.16915651939500254,
    0.14959598881657673,
    0.12462897125553387,
    0.09515851168249278,
    0.06225352393864789,
    0.02715245941175409,
];

/// Integrate a smooth function over [a, b] with composite 16-point
/// Gauss-Legendre on `panels` equal panels.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (&x, &w) in GL16_X.iter().zip(&GL16_W) {
            acc += w * (f(mid - half * x) + f(mid + half * x));
        }
        total += acc * half;
    }
    total
}
