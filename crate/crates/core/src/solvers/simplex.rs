//! Dense two-phase tableau simplex for equality-constrained basis pursuit,
//! `min ‖α‖₁ s.t. Aα = y`, written as the standard-form LP
//! `min 1ᵀ(u + v) s.t. A(u − v) = y, u, v ≥ 0`.
//!
//! Pricing is Dantzig's rule, falling back to Bland's rule while the method is
//! stuck on a run of degenerate pivots. The final vertex is polished by a
//! least-squares solve on its active columns.

use crate::error::{Error, Result};
use crate::linalg::{distance, least_squares, norm1, DenseMatrix};
use crate::scalar::Scalar;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const STALL_LIMIT: usize = 50;
/// Pivots between refactorisations of the tableau.
const REFACTOR_EVERY: usize = 50;

pub(crate) struct SimplexOutcome<T> {
    pub alpha: Vec<T>,
    pub iterations: usize,
    /// An optimal basis was reached (as opposed to running out of iterations).
    pub optimal: bool,
}

struct Tableau<T> {
    /// Constraint rows followed by the reduced-cost row; each row has `width` entries, the last is the right-hand side.
    data: Vec<T>,
    /// The initial constraint rows, kept for refactorisation.
    orig: Vec<T>,
    m: usize,
    width: usize,
    basis: Vec<usize>,
    /// Rows found to be linearly redundant after phase one.
    dead: Vec<bool>,
}

impl<T: Scalar> Tableau<T> {
    #[inline]
    fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> T {
        self.at(i, self.width - 1)
    }

    fn obj_row(&self) -> usize {
        self.m
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.at(r, c);
        for x in &mut self.data[r * w..(r + 1) * w] {
            *x /= p;
        }
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let eliminate = |row: &mut [T]| {
            let f = row[c];
            if f != T::zero() {
                for (x, &pv) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * pv;
                }
                row[c] = T::zero();
            }
        };
        before.chunks_mut(w).for_each(eliminate);
        after.chunks_mut(w).for_each(eliminate);
        self.basis[r] = c;
    }

    /// Entering column among `0..allowed`, or `None` at optimality.
    fn entering(&self, allowed: usize, tol: T, bland: bool) -> Option<usize> {
        let obj = self.obj_row();
        if bland {
            return (0..allowed).find(|&j| self.at(obj, j) < -tol);
        }
        let mut best: Option<(usize, T)> = None;
        for j in 0..allowed {
            let rc = self.at(obj, j);
            if rc < -tol && best.is_none_or(|(_, b)| rc < b) {
                best = Some((j, rc));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Harris two-pass ratio test: the bound is relaxed by `feas_tol`, then the
    /// largest pivot under that bound is taken (ties to the smallest basic index).
    /// With `feas_tol = 0` this is the textbook minimum-ratio rule Bland's rule relies on.
    fn leaving(&self, c: usize, piv_tol: T, feas_tol: T) -> Option<usize> {
        let rows = || (0..self.m).filter(move |&i| !self.dead[i] && self.at(i, c) > piv_tol);
        if feas_tol == T::zero() {
            return rows()
                .map(|i| (i, self.rhs(i).max(T::zero()) / self.at(i, c)))
                .fold(None, |best: Option<(usize, T)>, (i, r)| match best {
                    Some((bi, br)) if br < r || (br == r && self.basis[bi] < self.basis[i]) => Some((bi, br)),
                    _ => Some((i, r)),
                })
                .map(|(i, _)| i);
        }
        let bound = rows()
            .map(|i| (self.rhs(i).max(T::zero()) + feas_tol) / self.at(i, c))
            .fold(None, |acc: Option<T>, r| Some(acc.map_or(r, |a| a.min(r))))?;
        let mut best: Option<(usize, T)> = None;
        for i in rows() {
            let a = self.at(i, c);
            if self.rhs(i).max(T::zero()) / a > bound {
                continue;
            }
            let better = match best {
                None => true,
                Some((bi, ba)) => a > ba || (a == ba && self.basis[i] < self.basis[bi]),
            };
            if better {
                best = Some((i, a));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Rebuilds the tableau as `B⁻¹·[A | y]` from the original rows and
    /// recomputes reduced costs for `costs`, discarding accumulated round-off.
    /// Leaves the tableau untouched if the basis matrix is numerically singular.
    fn refactor(&mut self, costs: &[T]) {
        let (m, w) = (self.m, self.width);
        let aw = m + w;
        // Augmented rows [B | orig].
        let mut aug = vec![T::zero(); m * aw];
        for i in 0..m {
            for (r, &b) in self.basis.iter().enumerate() {
                aug[i * aw + r] = self.orig[i * w + b];
            }
            aug[i * aw + m..(i + 1) * aw].copy_from_slice(&self.orig[i * w..(i + 1) * w]);
        }
        let tiny = T::epsilon() * T::lit(1e3);
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&a, &b| aug[a * aw + col].abs().partial_cmp(&aug[b * aw + col].abs()).unwrap())
                .expect("nonempty range");
            if aug[piv * aw + col].abs() <= tiny {
                return;
            }
            if piv != col {
                for j in 0..aw {
                    aug.swap(piv * aw + j, col * aw + j);
                }
            }
            let p = aug[col * aw + col];
            for j in 0..aw {
                aug[col * aw + j] /= p;
            }
            for i in 0..m {
                if i == col {
                    continue;
                }
                let f = aug[i * aw + col];
                if f != T::zero() {
                    for j in 0..aw {
                        let v = aug[col * aw + j];
                        aug[i * aw + j] -= f * v;
                    }
                }
            }
        }
        for r in 0..m {
            self.data[r * w..(r + 1) * w].copy_from_slice(&aug[r * aw + m..(r + 1) * aw]);
            for (s, &b) in self.basis.iter().enumerate() {
                self.data[r * w + b] = if s == r { T::one() } else { T::zero() };
            }
        }
        let obj = self.obj_row();
        for j in 0..w {
            let cj = if j + 1 < w { costs[j] } else { T::zero() };
            let mut rc = cj;
            for r in 0..m {
                rc -= costs[self.basis[r]] * self.data[r * w + j];
            }
            self.data[obj * w + j] = rc;
        }
    }

    /// Replaces the right-hand side of the original rows.
    fn set_rhs(&mut self, rhs: &[T]) {
        let w = self.width;
        for (i, &v) in rhs.iter().enumerate() {
            self.orig[i * w + w - 1] = v;
        }
    }

    /// Dual simplex over columns `0..allowed` from a dual-feasible basis.
    /// Returns `true` once every live basic value is at least `-tol`.
    fn dual_repair(
        &mut self,
        costs: &[T],
        allowed: usize,
        tol: T,
        piv_tol: T,
        iterations: &mut usize,
        max_iter: usize,
    ) -> bool {
        let obj = self.obj_row();
        let mut since_refactor = 0;
        loop {
            if since_refactor >= REFACTOR_EVERY {
                self.refactor(costs);
                since_refactor = 0;
            }
            let row = (0..self.m)
                .filter(|&i| !self.dead[i] && self.rhs(i) < -tol)
                .min_by(|&a, &b| self.rhs(a).partial_cmp(&self.rhs(b)).unwrap());
            let Some(r) = row else {
                return true;
            };
            let mut best: Option<(usize, T)> = None;
            for j in 0..allowed {
                let a = self.at(r, j);
                if a < -piv_tol {
                    let ratio = self.at(obj, j).max(T::zero()) / -a;
                    if best.is_none_or(|(_, b)| ratio < b) {
                        best = Some((j, ratio));
                    }
                }
            }
            let Some((c, _)) = best else {
                return false;
            };
            if *iterations >= max_iter {
                return false;
            }
            *iterations += 1;
            since_refactor += 1;
            self.pivot(r, c);
        }
    }

    /// Runs simplex iterations over columns `0..allowed`. Returns `true` at optimality.
    /// Optimality is only accepted straight after a refactorisation.
    fn optimize(
        &mut self,
        costs: &[T],
        allowed: usize,
        tol: T,
        piv_tol: T,
        iterations: &mut usize,
        max_iter: usize,
    ) -> bool {
        let mut stalled = 0;
        let mut since_refactor = 0;
        let obj = self.obj_row();
        loop {
            if since_refactor >= REFACTOR_EVERY {
                self.refactor(costs);
                since_refactor = 0;
            }
            let bland = stalled >= STALL_LIMIT;
            let Some(c) = self.entering(allowed, tol, bland) else {
                if since_refactor == 0 {
                    return true;
                }
                self.refactor(costs);
                since_refactor = 0;
                continue;
            };
            // Costs are nonnegative and x ≥ 0, so the LP is bounded; a column
            // with no positive entry only reflects round-off and is skipped by
            // zeroing its reduced cost.
            let harris_tol = if bland { T::zero() } else { tol };
            let Some(r) = self.leaving(c, piv_tol, harris_tol) else {
                self.data[obj * self.width + c] = T::zero();
                continue;
            };
            if *iterations >= max_iter {
                return false;
            }
            *iterations += 1;
            since_refactor += 1;
            // The objective row's last entry holds minus the objective.
            let before = -self.rhs(obj);
            self.pivot(r, c);
            let after = -self.rhs(obj);
            stalled = if after < before { 0 } else { stalled + 1 };
        }
    }
}

pub(crate) fn basis_pursuit<T: Scalar>(
    a: &DenseMatrix<T>,
    y: &[T],
    max_iterations: usize,
) -> Result<SimplexOutcome<T>> {
    let (m, n) = a.shape();
    let nv = 2 * n;
    let width = nv + m + 1;
    let scale = a.max_abs().max(T::min_positive_value());
    let tol = T::epsilon().powf(T::lit(0.6)) * scale;
    let piv_tol = T::epsilon().sqrt() * scale;

    // Pivot on `y + Aξ` for a tiny positive ξ so that basic solutions are
    // nondegenerate; the true right-hand side is restored after phase two.
    let mut xi: Vec<T> = (0..n)
        .map(|j| T::one() + (T::from_usize_lossy(j + 1) * T::lit(0.618_033_988_749_895)).fract())
        .collect();
    let shift = a.matvec(&xi)?;
    let shift_max = shift.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let y_max = y.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    if shift_max > T::zero() {
        let f = T::lit(1e-7) * y_max.max(scale) / shift_max;
        xi.iter_mut().for_each(|x| *x *= f);
    }
    let shift = a.matvec(&xi)?;
    let y_pert: Vec<T> = y.iter().zip(&shift).map(|(&v, &s)| v + s).collect();
    let signs: Vec<T> = y_pert.iter().map(|&v| if v < T::zero() { -T::one() } else { T::one() }).collect();

    let mut data = vec![T::zero(); (m + 1) * width];
    for i in 0..m {
        let sign = signs[i];
        let row = &mut data[i * width..(i + 1) * width];
        for (j, &v) in a.row(i).iter().enumerate() {
            row[j] = sign * v;
            row[n + j] = -sign * v;
        }
        row[nv + i] = T::one();
        row[width - 1] = sign * y_pert[i];
    }
    // Phase-one reduced costs: minus the column sums of the constraint rows.
    for j in (0..nv).chain(std::iter::once(width - 1)) {
        let s: T = (0..m).map(|i| data[i * width + j]).sum();
        data[m * width + j] = -s;
    }
    let orig = data[..m * width].to_vec();
    let mut tab = Tableau {
        data,
        orig,
        m,
        width,
        basis: (nv..nv + m).collect(),
        dead: vec![false; m],
    };

    let phase_one: Vec<T> = (0..width - 1).map(|j| if j < nv { T::zero() } else { T::one() }).collect();
    let mut iterations = 0;
    if !tab.optimize(&phase_one, nv, tol, piv_tol, &mut iterations, max_iterations) {
        return Ok(finish(a, y, &tab, n, iterations, false));
    }
    let infeasibility = -tab.rhs(m);
    let y_scale = T::one().max(norm1(&y_pert));
    if infeasibility > T::epsilon().sqrt() * y_scale {
        return Err(Error::InfeasibleEquality {
            residual: infeasibility.to_f64_lossy(),
        });
    }

    // Drive zero-level artificials out of the basis; rows with no usable pivot are redundant.
    for i in 0..m {
        if tab.basis[i] < nv {
            continue;
        }
        let mut best: Option<(usize, T)> = None;
        for j in 0..nv {
            let v = tab.at(i, j).abs();
            if v > piv_tol && best.is_none_or(|(_, b)| v > b) {
                best = Some((j, v));
            }
        }
        match best {
            Some((j, _)) => tab.pivot(i, j),
            None => tab.dead[i] = true,
        }
    }

    // Phase two: unit costs on u and v, artificials barred from entering.
    let phase_two: Vec<T> = (0..width - 1).map(|j| if j < nv { T::one() } else { T::zero() }).collect();
    tab.refactor(&phase_two);
    let mut optimal = tab.optimize(&phase_two, nv, tol, piv_tol, &mut iterations, max_iterations);
    if optimal {
        let true_rhs: Vec<T> = y.iter().zip(&signs).map(|(&v, &s)| s * v).collect();
        tab.set_rhs(&true_rhs);
        tab.refactor(&phase_two);
        optimal = tab.dual_repair(&phase_two, nv, tol, piv_tol, &mut iterations, max_iterations)
            && tab.optimize(&phase_two, nv, tol, piv_tol, &mut iterations, max_iterations);
    }
    Ok(finish(a, y, &tab, n, iterations, optimal))
}

fn finish<T: Scalar>(
    a: &DenseMatrix<T>,
    y: &[T],
    tab: &Tableau<T>,
    n: usize,
    iterations: usize,
    optimal: bool,
) -> SimplexOutcome<T> {
    let mut alpha = vec![T::zero(); n];
    for i in 0..tab.m {
        let b = tab.basis[i];
        if b < 2 * n && !tab.dead[i] {
            let v = tab.rhs(i).max(T::zero());
            if b < n {
                alpha[b] += v;
            } else {
                alpha[b - n] -= v;
            }
        }
    }
    let raw_residual = residual(a, &alpha, y);

    // Polish: refit the basic columns exactly.
    let mut active: Vec<usize> = (0..tab.m)
        .filter(|&i| !tab.dead[i] && tab.basis[i] < 2 * n)
        .map(|i| tab.basis[i] % n)
        .collect();
    active.sort_unstable();
    active.dedup();
    if !active.is_empty() {
        if let Ok(ls) = least_squares(&a.select_columns(&active), y) {
            if ls.residual_norm <= raw_residual {
                alpha = vec![T::zero(); n];
                for (&j, &v) in active.iter().zip(&ls.solution) {
                    alpha[j] = v;
                }
            }
        }
    }
    SimplexOutcome {
        alpha,
        iterations,
        optimal,
    }
}

fn residual<T: Scalar>(a: &DenseMatrix<T>, x: &[T], y: &[T]) -> T {
    distance(&a.matvec(x).expect("dimensions validated"), y)
}
