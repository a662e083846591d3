use itertools::Itertools;

use super::cost::PlacementProblem;
use crate::error::{Error, Result};

/// Largest number of subsets [`exhaustive_place`] will enumerate.
pub const EXHAUSTIVE_SUBSET_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveResult {
    pub selection: Vec<usize>,
    pub cost: f64,
    pub subsets_evaluated: usize,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Global minimiser of `J` over all `l`-subsets, by enumeration. Subsets are
/// visited in lexicographic order and only a strictly smaller cost replaces
/// the incumbent, so ties go to the lexicographically first subset.
pub fn exhaustive_place(problem: &PlacementProblem, l: usize) -> Result<ExhaustiveResult> {
    let n = problem.num_candidates();
    if l > n {
        return Err(Error::Domain(format!("cannot select {l} sources from {n} candidates")));
    }
    let count = binomial(n, l);
    if count > EXHAUSTIVE_SUBSET_LIMIT {
        return Err(Error::Precondition(format!(
            "C({n}, {l}) = {count} subsets exceeds the enumeration limit {EXHAUSTIVE_SUBSET_LIMIT}"
        )));
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut evaluated = 0;
    for subset in (0..n).combinations(l) {
        let cost = problem.direct_cost(&subset)?;
        evaluated += 1;
        if best.as_ref().is_none_or(|(_, b)| cost < *b) {
            best = Some((subset, cost));
        }
    }
    let (selection, cost) = best.expect("at least the empty subset");
    Ok(ExhaustiveResult {
        selection,
        cost,
        subsets_evaluated: evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::placement::FieldPrior;
    use crate::{CMatrix, CVector, Complex64};

    fn problem(n: usize) -> PlacementProblem {
        let c = CMatrix::from_fn(5, n, |i, j| {
            Complex64::from_polar(1.0 / (1.0 + (i as f64 - j as f64 * 0.4).abs()), (i * j) as f64 * 0.7)
        });
        let mu = CVector::from_fn(5, |i, _| Complex64::new(1.0, 0.3 * i as f64));
        let prior = FieldPrior::from_moments(mu, CMatrix::identity(5, 5).scale(0.2)).unwrap();
        PlacementProblem::new(&c, &CMatrix::identity(5, 5), &prior, 1e-3).unwrap()
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(12, 3), 220);
        assert_eq!(binomial(200, 20), 1_613_587_787_967_350_073_386_147_640);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn full_set_when_l_equals_n() {
        let p = problem(4);
        let r = exhaustive_place(&p, 4).unwrap();
        assert_eq!(r.selection, vec![0, 1, 2, 3]);
        assert_eq!(r.subsets_evaluated, 1);
    }

    #[test]
    fn optimum_beats_every_subset() {
        let p = problem(10);
        let r = exhaustive_place(&p, 2).unwrap();
        assert_eq!(r.subsets_evaluated, 45);
        for s in (0..10).combinations(2) {
            assert!(r.cost <= p.direct_cost(&s).unwrap());
        }
    }

    #[test]
    fn refuses_huge_enumerations() {
        let c = CMatrix::from_element(2, 60, Complex64::new(1.0, 0.0));
        let prior = FieldPrior::from_moments(CVector::zeros(2), CMatrix::identity(2, 2)).unwrap();
        let p = PlacementProblem::new(&c, &CMatrix::identity(2, 2), &prior, 1.0).unwrap();
        assert!(matches!(exhaustive_place(&p, 10), Err(Error::Precondition(_))));
    }
}
