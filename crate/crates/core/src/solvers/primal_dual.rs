//! Primal–dual (Chambolle–Pock) iteration for the ε-ball basis pursuit
//! `min ‖α‖₁ s.t. ‖Aα − y‖₂ ≤ ε`.

use crate::linalg::{distance, norm2, singular_values, DenseMatrix};
use crate::scalar::Scalar;

pub(crate) struct PrimalDualOutcome<T> {
    pub alpha: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

fn soft_threshold<T: Scalar>(v: T, t: T) -> T {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        T::zero()
    }
}

pub(crate) fn ball_basis_pursuit<T: Scalar>(
    a: &DenseMatrix<T>,
    y: &[T],
    epsilon: T,
    feas_tol: T,
    step_tol: T,
    max_iterations: usize,
) -> PrimalDualOutcome<T> {
    let n = a.cols();
    let op_norm = singular_values(a).map_or(T::one(), |s| s[0]).max(T::min_positive_value());
    let tau = T::lit(0.99) / op_norm;
    let sigma = tau;

    let mut x = vec![T::zero(); n];
    let mut x_bar = x.clone();
    let mut p = vec![T::zero(); a.rows()];
    for it in 1..=max_iterations {
        // Dual step: prox of the conjugate of the ball indicator (Moreau identity).
        let ax = a.matvec(&x_bar).expect("dimensions validated");
        let q: Vec<T> = p.iter().zip(&ax).map(|(&pi, &v)| pi + sigma * v).collect();
        let center: Vec<T> = q.iter().map(|&v| v / sigma).collect();
        let offset: Vec<T> = center.iter().zip(y).map(|(&c, &yi)| c - yi).collect();
        let dist = norm2(&offset);
        let shrink = if dist > epsilon { epsilon / dist } else { T::one() };
        for ((pi, &qi), (&yi, &off)) in p.iter_mut().zip(&q).zip(y.iter().zip(&offset)) {
            *pi = qi - sigma * (yi + off * shrink);
        }

        // Primal step: soft-thresholding.
        let atp = a.tr_matvec(&p).expect("dimensions validated");
        let x_new: Vec<T> = x
            .iter()
            .zip(&atp)
            .map(|(&xi, &g)| soft_threshold(xi - tau * g, tau))
            .collect();
        let change = distance(&x_new, &x);
        let two = T::one() + T::one();
        x_bar = x_new.iter().zip(&x).map(|(&xn, &xo)| two * xn - xo).collect();
        x = x_new;

        let res = distance(&a.matvec(&x).expect("dimensions validated"), y);
        if res <= epsilon + feas_tol && change <= step_tol * T::one().max(norm2(&x)) {
            return PrimalDualOutcome {
                alpha: x,
                iterations: it,
                converged: true,
            };
        }
    }
    PrimalDualOutcome {
        alpha: x,
        iterations: max_iterations,
        converged: false,
    }
}
