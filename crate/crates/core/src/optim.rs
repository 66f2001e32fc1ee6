//! Small dense least-squares and one-dimensional minimisation helpers.

use nalgebra::{DMatrix, DVector};

/// Linear least squares via normal equations; returns coefficients and residual sum of squares.
pub fn linear_lstsq(design: &DMatrix<f64>, y: &[f64]) -> Option<(DVector<f64>, f64)> {
    let yv = DVector::from_column_slice(y);
    let gram = design.transpose() * design;
    let rhs = design.transpose() * &yv;
    let coef = gram.cholesky()?.solve(&rhs);
    let resid = &yv - design * &coef;
    Some((coef, resid.norm_squared()))
}

/// Brent's minimisation of `f` on `[a, b]`.
pub fn brent_minimize<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    const GOLD: f64 = 0.381_966_011_250_105_1;
    let mut x = a + GOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-300;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1 * d.signum() };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Outcome of [`levenberg_marquardt`].
#[derive(Debug, Clone)]
pub struct LmResult {
    pub params: Vec<f64>,
    pub cost: f64,
    pub converged: bool,
}

/// Levenberg-Marquardt on `Σ r²` with an analytic Jacobian.
/// `project` may clamp parameters back into their admissible set after each step.
pub fn levenberg_marquardt<F, P>(model: F, project: P, p0: &[f64], max_iter: usize, tol: f64) -> LmResult
where
    F: Fn(&[f64]) -> (DVector<f64>, DMatrix<f64>),
    P: Fn(&mut [f64]),
{
    let mut p = p0.to_vec();
    let (mut r, mut jac) = model(&p);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut converged = false;
    for _ in 0..max_iter {
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &r;
        let mut improved = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = -chol.solve(&g);
            let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            project(&mut trial);
            let (rt, jt2) = model(&trial);
            let ct = rt.norm_squared();
            if ct.is_finite() && ct <= cost {
                let rel = (cost - ct) / cost.max(1e-300);
                let step_small = step.norm() <= tol * (1.0 + DVector::from_column_slice(&p).norm());
                p = trial;
                r = rt;
                jac = jt2;
                cost = ct;
                lambda = (lambda * 0.1).max(1e-12);
                improved = true;
                if rel < tol * tol || step_small || cost == 0.0 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    LmResult { params: p, cost, converged }
}
