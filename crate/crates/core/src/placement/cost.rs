use num_complex::Complex64;

use super::prior::FieldPrior;
use crate::error::{Error, Result};
use crate::linalg::{hpd_inverse, submatrix, trace};
use crate::{CMatrix, CVector};

/// Relative threshold on the Schur complement below which an incremental
/// update is abandoned in favour of a direct inverse.
pub const RHO_BREAKDOWN: f64 = 1e-12;

/// Precomputed quantities of one narrowband placement problem.
///
/// With `R = E[b b^H]`, `G = C^H W C` and `P = C^H W R W C`, the cost of a
/// selection `S` is `J(S) = tr(W R) - tr(A_S P_SS)` where
/// `A_S = (G_SS + lambda I)^{-1}`.
#[derive(Debug, Clone)]
pub struct PlacementProblem {
    c: CMatrix,
    w: CMatrix,
    prior: FieldPrior,
    lambda: f64,
    gram: CMatrix,
    projected_moment: CMatrix,
    empty_cost: f64,
}

impl PlacementProblem {
    pub fn new(c: &CMatrix, w: &CMatrix, prior: &FieldPrior, lambda: f64) -> Result<Self> {
        let rows = c.nrows();
        if w.nrows() != rows || w.ncols() != rows || prior.dim() != rows {
            return Err(Error::Dimension(format!(
                "C has {rows} rows, W is {}x{}, prior has dimension {}",
                w.nrows(),
                w.ncols(),
                prior.dim()
            )));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
        }
        if c.ncols() == 0 {
            return Err(Error::Domain("candidate set is empty".into()));
        }
        let wc = w * c;
        let gram = hermitian(c.adjoint() * &wc);
        let projected_moment = hermitian(wc.adjoint() * prior.second_moment() * &wc);
        let empty_cost = real_part(trace(&(w * prior.second_moment())), "tr(W R)")?;
        Ok(Self {
            c: c.clone(),
            w: w.clone(),
            prior: prior.clone(),
            lambda,
            gram,
            projected_moment,
            empty_cost,
        })
    }

    pub fn num_candidates(&self) -> usize {
        self.c.ncols()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn c(&self) -> &CMatrix {
        &self.c
    }

    pub fn w(&self) -> &CMatrix {
        &self.w
    }

    pub fn prior(&self) -> &FieldPrior {
        &self.prior
    }

    /// `C^H W C`.
    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    /// `J(empty) = tr(W R)`.
    pub fn empty_cost(&self) -> f64 {
        self.empty_cost
    }

    /// `G_SS + lambda I`.
    pub fn regularized_gram(&self, selected: &[usize]) -> CMatrix {
        let mut g = submatrix(&self.gram, selected, selected);
        for i in 0..selected.len() {
            g[(i, i)] += Complex64::new(self.lambda, 0.0);
        }
        g
    }

    /// `J(S)` through a fresh Cholesky inverse and an explicit `D` matrix.
    pub fn direct_cost(&self, selected: &[usize]) -> Result<f64> {
        let a = hpd_inverse(&self.regularized_gram(selected))?;
        placement_cost(selected, &a, &self.c, &self.w, &self.prior)
    }

    /// `tr(W R) - tr(A P_SS)` for a given inverse.
    fn cost_from_inverse(&self, selected: &[usize], a_inv: &CMatrix) -> f64 {
        let p = submatrix(&self.projected_moment, selected, selected);
        let mut t = Complex64::new(0.0, 0.0);
        for i in 0..selected.len() {
            for j in 0..selected.len() {
                t += a_inv[(i, j)] * p[(j, i)];
            }
        }
        self.empty_cost - t.re
    }
}

fn hermitian(m: CMatrix) -> CMatrix {
    (&m + m.adjoint()).scale(0.5)
}

fn real_part(z: Complex64, what: &str) -> Result<f64> {
    if z.im.abs() > 1e-9 * z.re.abs().max(1e-300) && z.im.abs() > 1e-300 {
        return Err(Error::Invariant(format!(
            "{what} has imaginary residue {:.3e} against real part {:.3e}",
            z.im, z.re
        )));
    }
    Ok(z.re)
}

/// `J(S) = tr(D R)` with `D = W - W C_S A C_S^H W^H`, evaluated literally.
pub fn placement_cost(
    selected: &[usize],
    a_inv: &CMatrix,
    c: &CMatrix,
    w: &CMatrix,
    prior: &FieldPrior,
) -> Result<f64> {
    if a_inv.nrows() != selected.len() || a_inv.ncols() != selected.len() {
        return Err(Error::Dimension(format!(
            "inverse is {}x{} for {} selected sources",
            a_inv.nrows(),
            a_inv.ncols(),
            selected.len()
        )));
    }
    let r = prior.second_moment();
    let scale = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if prior.hermitian_defect() > 1e-12 * scale.max(1.0) {
        return Err(Error::Invariant("prior second moment is not Hermitian".into()));
    }
    let wc = w * c.select_columns(selected.iter());
    let d = w - &wc * a_inv * wc.adjoint();
    real_part(trace(&(d * r)), "J(S)")
}

/// Selection `S` in pick order together with the cached
/// `A = (G_SS + lambda I)^{-1}` and the current cost.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionState {
    selected: Vec<usize>,
    a_inv: CMatrix,
    cost: f64,
}

/// Outcome of evaluating one candidate against a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    /// `J(S + {candidate})`.
    pub cost: f64,
    /// Multiply-adds spent.
    pub ops: u64,
}

impl SelectionState {
    pub fn empty(problem: &PlacementProblem) -> Self {
        Self {
            selected: Vec::new(),
            a_inv: CMatrix::zeros(0, 0),
            cost: problem.empty_cost(),
        }
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn inverse(&self) -> &CMatrix {
        &self.a_inv
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    fn border(&self, problem: &PlacementProblem, candidate: usize) -> (CVector, Complex64) {
        let a = CVector::from_iterator(
            self.selected.len(),
            self.selected.iter().map(|&s| problem.gram[(s, candidate)]),
        );
        let corner = problem.gram[(candidate, candidate)] + Complex64::new(problem.lambda, 0.0);
        (a, corner)
    }

    fn check_candidate(&self, problem: &PlacementProblem, candidate: usize) -> Result<()> {
        if candidate >= problem.num_candidates() {
            return Err(Error::Domain(format!(
                "candidate {candidate} out of range 0..{}",
                problem.num_candidates()
            )));
        }
        if self.selected.contains(&candidate) {
            return Err(Error::Domain(format!("candidate {candidate} already selected")));
        }
        Ok(())
    }

    /// Cost after adding `candidate`, without committing it. Uses the
    /// bordered-inverse identity
    /// `J(S + c) = J(S) - u^H P_{S+c} u / rho` with `v = A a`, `u = [v; -1]`
    /// and `rho = a_cc - a^H A a`. Falls back to a direct inverse when `rho`
    /// breaks down.
    pub fn trial(&self, problem: &PlacementProblem, candidate: usize) -> Result<TrialOutcome> {
        self.check_candidate(problem, candidate)?;
        let l = self.selected.len();
        let (a, corner) = self.border(problem, candidate);
        let v = &self.a_inv * &a;
        let rho = (corner - a.dotc(&v)).re;
        let ops = (2 * l * l + 3 * l) as u64;
        if rho <= RHO_BREAKDOWN * corner.re {
            let mut s = self.selected.clone();
            s.push(candidate);
            return Ok(TrialOutcome {
                cost: problem.direct_cost(&s)?,
                ops,
            });
        }
        let pm = &problem.projected_moment;
        // u^H P u with u = [v; -1]
        let mut q = pm[(candidate, candidate)];
        for (i, &si) in self.selected.iter().enumerate() {
            let mut row = Complex64::new(0.0, 0.0);
            for (j, &sj) in self.selected.iter().enumerate() {
                row += pm[(si, sj)] * v[j];
            }
            q += v[i].conj() * row;
            q -= 2.0 * (v[i].conj() * pm[(si, candidate)]).re;
        }
        let decrease = (q.re / rho).max(0.0);
        Ok(TrialOutcome {
            cost: self.cost - decrease,
            ops,
        })
    }

    /// Commits `candidate`, growing the cached inverse by one row and column.
    pub fn extend(&mut self, problem: &PlacementProblem, candidate: usize) -> Result<()> {
        let next = extend_inverse(problem, self, candidate)?;
        *self = next;
        Ok(())
    }

    /// As [`SelectionState::extend`], but recovers from a Schur-complement
    /// breakdown by inverting the regularized Gram submatrix directly.
    pub fn extend_or_reinvert(&mut self, problem: &PlacementProblem, candidate: usize) -> Result<()> {
        match extend_inverse(problem, self, candidate) {
            Ok(next) => {
                *self = next;
                Ok(())
            }
            Err(Error::Numerical(_)) => {
                let mut selected = self.selected.clone();
                selected.push(candidate);
                let a_inv = hpd_inverse(&problem.regularized_gram(&selected))?;
                let cost = problem.cost_from_inverse(&selected, &a_inv).min(self.cost);
                *self = SelectionState {
                    selected,
                    a_inv,
                    cost,
                };
                Ok(())
            }
            Err(e) => Err(e),
        }
    }

    /// `|A (G_SS + lambda I) - I|_max`.
    pub fn inverse_defect(&self, problem: &PlacementProblem) -> f64 {
        let l = self.selected.len();
        let prod = &self.a_inv * problem.regularized_gram(&self.selected);
        crate::linalg::max_abs(&(prod - CMatrix::identity(l, l)))
    }
}

/// Block update of `A` when one source is appended:
///
/// ```text
/// A' = [ A + v rho^-1 v^H   -v rho^-1 ]
///      [ -rho^-1 v^H          rho^-1  ]
/// ```
///
/// with `a` the new Gram column restricted to `S`, `v = A a` and
/// `rho = G_cc + lambda - a^H A a`.
pub fn extend_inverse(
    problem: &PlacementProblem,
    state: &SelectionState,
    candidate: usize,
) -> Result<SelectionState> {
    state.check_candidate(problem, candidate)?;
    let l = state.selected.len();
    let (a, corner) = state.border(problem, candidate);
    let v = &state.a_inv * &a;
    let rho = (corner - a.dotc(&v)).re;
    if !(rho > RHO_BREAKDOWN * corner.re) {
        return Err(Error::Numerical(format!(
            "Schur complement {rho:.3e} collapsed while adding candidate {candidate}"
        )));
    }
    let inv_rho = 1.0 / rho;
    let mut next = CMatrix::zeros(l + 1, l + 1);
    for i in 0..l {
        for j in 0..l {
            next[(i, j)] = state.a_inv[(i, j)] + v[i] * v[j].conj() * inv_rho;
        }
        next[(i, l)] = -v[i] * inv_rho;
        next[(l, i)] = -v[i].conj() * inv_rho;
    }
    next[(l, l)] = Complex64::new(inv_rho, 0.0);
    let trial = state.trial(problem, candidate)?;
    let mut selected = state.selected.clone();
    selected.push(candidate);
    Ok(SelectionState {
        selected,
        a_inv: next,
        cost: trial.cost,
    })
}
