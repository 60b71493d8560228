//! Small numerical helpers: deterministic summation, 1-d quadrature, sphere
//! measures.

use std::f64::consts::PI;

/// Pairwise (cascade) summation. Deterministic for a fixed input order and
/// accurate to `O(ε log n)`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of `f(i)` for `i in 0..len`.
pub fn pairwise_sum_by(len: usize, f: impl Fn(usize) -> f64 + Copy) -> f64 {
    fn go(lo: usize, hi: usize, f: impl Fn(usize) -> f64 + Copy) -> f64 {
        if hi - lo <= 16 {
            return (lo..hi).map(f).sum();
        }
        let mid = lo + (hi - lo) / 2;
        go(lo, mid, f) + go(mid, hi, f)
    }
    go(0, len, f)
}

// 7-point Gauss–Legendre nodes and weights on [-1, 1].
const GL7_X: [f64; 7] = [
    -0.949_107_912_342_758_5,
    -0.741_531_185_599_394_4,
    -0.405_845_151_377_397_2,
    0.0,
    0.405_845_151_377_397_2,
    0.741_531_185_599_394_4,
    0.949_107_912_342_758_5,
];
const GL7_W: [f64; 7] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_9,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

/// Composite 7-point Gauss–Legendre quadrature of `f` over `[a, b]` with
/// `panels` equal panels.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut sums = Vec::with_capacity(panels);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let s: f64 = GL7_X.iter().zip(GL7_W).map(|(x, w)| w * f(mid + half * x)).sum();
        sums.push(s * half);
    }
    pairwise_sum(&sums)
}

/// Measure of the unit sphere `S^m ⊂ R^{m+1}`.
pub fn sphere_measure(m: usize) -> f64 {
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 1.0) * sphere_measure(m - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_measures() {
        assert_relative_eq!(sphere_measure(2), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_measure(3), 2.0 * PI * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_measure(4), 8.0 * PI * PI / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let v = gauss_legendre(|x| x.powi(13) - 2.0 * x * x, -1.0, 2.0, 1);
        let exact = (2f64.powi(14) - 1.0) / 14.0 - 2.0 * (8.0 + 1.0) / 3.0;
        assert_relative_eq!(v, exact, max_relative = 1e-13);
        assert_relative_eq!(gauss_legendre(f64::sin, 0.0, PI, 8), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sqrt()).collect();
        assert_relative_eq!(pairwise_sum(&xs), xs.iter().sum::<f64>(), max_relative = 1e-13);
        assert_relative_eq!(
            pairwise_sum_by(xs.len(), |i| xs[i]),
            pairwise_sum(&xs),
            max_relative = 1e-15
        );
    }
}
