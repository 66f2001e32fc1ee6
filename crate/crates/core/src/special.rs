//! Special functions and quadrature helpers.

use std::sync::OnceLock;

/// Modified Bessel function I₀ by its power series Σ (x/2)^{2k}/(k!)².
pub fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * k);
        sum += term;
        if term <= sum * 1e-17 {
            return sum;
        }
    }
}

/// `ln I₀(x)`. Series up to |x| = 500; the Hankel expansion beyond, where
/// the series would overflow.
pub fn ln_bessel_i0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 500.0 {
        return bessel_i0(x).ln();
    }
    // I₀(x) ~ e^x / sqrt(2πx) · Σ ((2k-1)!!)² / (k! (8x)^k)
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..30 {
        let kf = k as f64;
        term *= (2.0 * kf - 1.0).powi(2) / (kf * 8.0 * x);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln()
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

pub(crate) fn gauss_legendre_16() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(16))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i0_table() {
        // Abramowitz & Stegun Table 9.8
        let table = [(0.0, 1.0), (1.0, 1.266065877752008), (2.0, 2.279585302336067), (5.0, 27.23987182360445)];
        for (x, v) in table {
            assert!((bessel_i0(x) - v).abs() < 1e-14 * v, "I0({x})");
        }
    }

    #[test]
    fn ln_i0_branches_agree() {
        let x = 500.0;
        let series = bessel_i0(x).ln();
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..30 {
            let kf = k as f64;
            term *= (2.0 * kf - 1.0).powi(2) / (kf * 8.0 * x);
            sum += term;
        }
        let asym = x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln();
        assert!((series - asym).abs() < 1e-12 * series);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let p30: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((p30 - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_gaussian_mass() {
        let f = |u: f64| (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let v = adaptive_simpson(&f, -12.0, 12.0, 1e-13);
        assert!((v - 1.0).abs() < 1e-11);
    }
}
