use nalgebra::{DMatrix, DVector};

use crate::sica::loss::WindowData;
use crate::sica::ZGrid;

/// Damping is abandoned once it grows past this value.
const MAX_DAMPING: f64 = 1e16;
const INITIAL_DAMPING: f64 = 1e-6;

#[derive(Debug, Clone)]
pub(crate) struct NewtonOutcome {
    pub w: Vec<f64>,
    pub loss: f64,
    pub grad_norm: f64,
    pub converged: bool,
}

/// Orthonormal basis of the complement of `vs` in Rᵐ (columns).
pub(crate) fn complement_basis(m: usize, vs: &[DVector<f64>]) -> DMatrix<f64> {
    let mut kept: Vec<DVector<f64>> = Vec::with_capacity(m);
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(m);
    for v in vs {
        let mut u = v.clone();
        for q in &kept {
            u -= q * q.dot(&u);
        }
        let n = u.norm();
        if n > 1e-10 {
            kept.push(u / n);
        }
    }
    for i in 0..m {
        if kept.len() + out.len() == m {
            break;
        }
        let mut u = DVector::zeros(m);
        u[i] = 1.0;
        // two passes of Gram-Schmidt keep the basis orthogonal to rounding level
        for _ in 0..2 {
            for q in kept.iter().chain(out.iter()) {
                u -= q * q.dot(&u);
            }
        }
        let n = u.norm();
        if n > 1e-6 {
            out.push(u / n);
        }
    }
    if out.is_empty() {
        return DMatrix::zeros(m, 0);
    }
    DMatrix::from_columns(&out)
}

/// Minimises the loss over unit vectors `w = B c` in the span of `basis`.
pub(crate) fn newton_sphere(
    data: &WindowData,
    z_grid: &ZGrid,
    k_ref: &[f64],
    basis: &DMatrix<f64>,
    start: &DVector<f64>,
    max_steps: usize,
    grad_tol: f64,
) -> NewtonOutcome {
    let k = basis.ncols();
    let mut c = start.normalize();
    let to_w = |c: &DVector<f64>| -> Vec<f64> { (basis * c).iter().copied().collect() };

    if k == 1 {
        let w = to_w(&c);
        let loss = data.loss(&w, z_grid, k_ref);
        return NewtonOutcome { w, loss, grad_norm: 0.0, converged: true };
    }

    let mut w = to_w(&c);
    let (mut loss, mut g, mut h) = data.loss_derivatives(&w, z_grid, k_ref);
    let mut grad_norm: f64;
    for _ in 0..max_steps {
        let gc = basis.transpose() * &g;
        let hc = basis.transpose() * &h * basis;
        let tangent = complement_basis(k, std::slice::from_ref(&c));
        let gr = tangent.transpose() * &gc;
        grad_norm = gr.norm();
        if grad_norm < grad_tol {
            return NewtonOutcome { w, loss, grad_norm, converged: true };
        }
        // Riemannian Hessian on the sphere
        let radial = c.dot(&gc);
        let mut hr = tangent.transpose() * &hc * &tangent;
        for i in 0..hr.nrows() {
            hr[(i, i)] -= radial;
        }
        let mut lambda = 0.0;
        let mut accepted = false;
        while lambda <= MAX_DAMPING {
            let mut damped = hr.clone();
            for i in 0..damped.nrows() {
                damped[(i, i)] += lambda;
            }
            let Some(chol) = damped.cholesky() else {
                lambda = next_damping(lambda);
                continue;
            };
            let xi = -chol.solve(&gr);
            let c_new = (&c + &tangent * xi).normalize();
            let w_new = to_w(&c_new);
            let loss_new = data.loss(&w_new, z_grid, k_ref);
            if loss_new < loss {
                c = c_new;
                w = w_new;
                let (l, gn, hn) = data.loss_derivatives(&w, z_grid, k_ref);
                loss = l;
                g = gn;
                h = hn;
                accepted = true;
                break;
            }
            lambda = next_damping(lambda);
        }
        if !accepted {
            // no representable decrease left; accept as converged only near stationarity
            let converged = grad_norm < grad_tol.max(1e-7);
            return NewtonOutcome { w, loss, grad_norm, converged };
        }
    }
    let gc = basis.transpose() * &g;
    let tangent = complement_basis(k, std::slice::from_ref(&c));
    grad_norm = (tangent.transpose() * gc).norm();
    NewtonOutcome { w, loss, grad_norm, converged: grad_norm < grad_tol }
}

fn next_damping(lambda: f64) -> f64 {
    if lambda == 0.0 {
        INITIAL_DAMPING
    } else {
        lambda * 10.0
    }
}
