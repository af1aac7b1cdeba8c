//! Small numeric helpers: adaptive quadrature, empirical moments, and the
//! Kolmogorov-Smirnov distance against a quadrature CDF.

/// 5-point Gauss-Legendre rule on [a, b].
pub fn gauss_legendre_5(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const X: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.236_926_885_056_189,
        0.478_628_670_499_366,
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
    ];
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    half * X
        .iter()
        .zip(&W)
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
}

/// Adaptive bisection on the 5-point rule; recursion stops when one more
/// split changes the panel by less than its share of `tol`. The first few
/// levels split unconditionally so narrow features between the coarse nodes
/// cannot fake convergence.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        force: u32,
    ) -> f64 {
        let mid = 0.5 * (a + b);
        let left = gauss_legendre_5(f, a, mid);
        let right = gauss_legendre_5(f, mid, b);
        if depth == 0 || (force == 0 && (left + right - whole).abs() <= tol) {
            return left + right;
        }
        let next_force = force.saturating_sub(1);
        recurse(f, a, mid, left, tol * 0.5, depth - 1, next_force)
            + recurse(f, mid, b, right, tol * 0.5, depth - 1, next_force)
    }
    recurse(f, a, b, gauss_legendre_5(f, a, b), tol, 48, 6)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance (divides by n).
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|&x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64
}

/// Two-sided KS distance of a sorted sample against CDF values evaluated at
/// those same points.
pub fn ks_statistic(cdf_at_sorted: &[f64]) -> f64 {
    let n = cdf_at_sorted.len() as f64;
    cdf_at_sorted
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let hi = (i as f64 + 1.0) / n - c;
            let lo = c - i as f64 / n;
            hi.max(lo)
        })
        .fold(0.0, f64::max)
}

/// Cumulative quadrature of `pdf` at each point of an ascending sequence.
/// The first panel (from 0) is integrated under the substitution x = t^2 to
/// tame power-law behavior at the origin.
pub fn cumulative_cdf(pdf: &dyn Fn(f64) -> f64, sorted: &[f64], tol: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(sorted.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        debug_assert!(x >= prev);
        if i == 0 {
            let g = move |t: f64| pdf(t * t) * 2.0 * t;
            acc = integrate(&g, 0.0, x.sqrt(), tol);
        } else if x > prev {
            acc += gauss_legendre_5(pdf, prev, x);
        }
        out.push(acc.min(1.0));
        prev = x;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact_under_gauss_legendre() {
        // degree-9 polynomials are exact for the 5-point rule
        let f = |x: f64| 7.0 * x.powi(9) - 3.0 * x.powi(4) + 2.0;
        let got = gauss_legendre_5(&f, 0.0, 2.0);
        let exact = 7.0 * 2f64.powi(10) / 10.0 - 3.0 * 2f64.powi(5) / 5.0 + 4.0;
        assert_relative_eq!(got, exact, epsilon = 1e-10);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let f = |x: f64| (-(x - 3.0).powi(2) * 400.0).exp();
        let got = integrate(&f, 0.0, 10.0, 1e-12);
        let exact = (std::f64::consts::PI / 400.0).sqrt();
        assert_relative_eq!(got, exact, max_relative = 1e-9);
    }

    #[test]
    fn ks_of_perfect_uniform_grid() {
        // F(x_i) midway between the step levels gives D = 1/(2n)
        let n = 100;
        let cdf: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert_relative_eq!(ks_statistic(&cdf), 0.5 / n as f64, epsilon = 1e-12);
    }

    #[test]
    fn cumulative_cdf_matches_closed_form_exponential() {
        let pdf = |x: f64| (-x).exp();
        let xs: Vec<f64> = (1..200).map(|i| i as f64 * 0.05).collect();
        let cdf = cumulative_cdf(&pdf, &xs, 1e-12);
        for (&x, &c) in xs.iter().zip(&cdf) {
            assert_relative_eq!(c, 1.0 - (-x).exp(), max_relative = 1e-8);
        }
    }

    #[test]
    fn moments_basics() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_relative_eq!(mean(&xs), 2.5);
        assert_relative_eq!(variance(&xs), 1.25);
    }
}
