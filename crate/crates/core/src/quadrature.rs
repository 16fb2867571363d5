//! Gauss–Legendre rules.

use std::f64::consts::PI;

/// Nodes and weights of the `count`-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre(count: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    for i in 0..count.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_count
        let mut x = (PI * (i as f64 + 0.75) / (count as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(count, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(count, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[count - 1 - i] = mid + half * x;
        weights[i] = half * w;
        weights[count - 1 - i] = half * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if order == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=order {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = order as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for count in [1usize, 2, 5, 8, 16, 64] {
            let (x, w) = gauss_legendre(count, -1.0, 2.0);
            assert!((w.iter().sum::<f64>() - 3.0).abs() < 1e-13);
            let degree = 2 * count - 1;
            let exact = (2f64.powi(degree as i32 + 1) - (-1f64).powi(degree as i32 + 1))
                / (degree as f64 + 1.0);
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(degree as i32)).sum();
            assert!((approx - exact).abs() < 1e-10 * exact.abs().max(1.0), "{count}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn integrates_smooth_function() {
        let (x, w) = gauss_legendre(32, 0.0, PI);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.sin()).sum();
        assert!((s - 2.0).abs() < 1e-14);
    }
}
