use rayon::prelude::*;

use super::cost::{PlacementProblem, SelectionState};
use super::prior::FieldPrior;
use crate::error::{Error, Result};
use crate::synthesis::{TransferCoeffMatrix, WeightMatrix};
use crate::wavefield::Frequency;

/// When the greedy loop stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    /// Hard cap on the number of selected sources.
    pub max_sources: usize,
    /// Stop early once a step lowers the cost by less than this fraction of
    /// the empty-set cost.
    pub min_relative_decrease: Option<f64>,
}

impl StopRule {
    pub fn max_sources(l: usize) -> Self {
        Self {
            max_sources: l,
            min_relative_decrease: None,
        }
    }

    pub fn with_min_decrease(mut self, delta: f64) -> Self {
        self.min_relative_decrease = Some(delta);
        self
    }
}

/// Ordered picks and the cost after each, with `cost_trace[0] = J(empty)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyResult {
    pub selection: Vec<usize>,
    pub cost_trace: Vec<f64>,
    /// Multiply-adds spent on trial evaluations and inverse updates.
    pub op_count: u64,
}

/// Snapshot handed to an observer after each pick.
#[derive(Debug, Clone, Copy)]
pub struct GreedyStep<'a> {
    pub step: usize,
    pub picked: usize,
    pub cost: f64,
    pub states: &'a [SelectionState],
}

/// Leading-order multiply-add count of a greedy run: each of the `L` steps
/// tries about `N` candidates at `2 l^2` each.
pub fn predicted_op_count(num_candidates: usize, num_sources: usize) -> f64 {
    2.0 * num_candidates as f64 * (num_sources as f64).powi(3) / 3.0
}

/// One frequency bin of a broadband problem.
#[derive(Debug, Clone)]
pub struct BroadbandBin {
    pub frequency: Frequency,
    pub gamma: f64,
    pub problem: PlacementProblem,
}

impl BroadbandBin {
    pub fn new(
        frequency: Frequency,
        gamma: f64,
        prior: &FieldPrior,
        transfer: &TransferCoeffMatrix,
        weight: &WeightMatrix,
        lambda: f64,
    ) -> Result<Self> {
        let problem = PlacementProblem::new(transfer.matrix(), weight.as_matrix(), prior, lambda)?;
        Ok(Self {
            frequency,
            gamma,
            problem,
        })
    }
}

/// Weighted sum of per-bin costs.
#[derive(Debug, Clone)]
pub struct BroadbandSpec {
    bins: Vec<BroadbandBin>,
}

impl BroadbandSpec {
    pub fn new(bins: Vec<BroadbandBin>) -> Result<Self> {
        let first = bins
            .first()
            .ok_or_else(|| Error::Domain("broadband spec needs at least one bin".into()))?;
        let n = first.problem.num_candidates();
        for bin in &bins {
            if !(bin.gamma > 0.0 && bin.gamma.is_finite()) {
                return Err(Error::Domain(format!(
                    "bin weight must be positive, got {} at {} Hz",
                    bin.gamma,
                    bin.frequency.hz()
                )));
            }
            if bin.problem.num_candidates() != n {
                return Err(Error::Dimension(format!(
                    "bin at {} Hz has {} candidates, expected {n}",
                    bin.frequency.hz(),
                    bin.problem.num_candidates()
                )));
            }
        }
        Ok(Self { bins })
    }

    pub fn bins(&self) -> &[BroadbandBin] {
        &self.bins
    }

    pub fn num_candidates(&self) -> usize {
        self.bins[0].problem.num_candidates()
    }

    /// `J_F(S) = sum_f gamma_f J_f(S)`, each term by direct inversion.
    pub fn cost(&self, selected: &[usize]) -> Result<f64> {
        self.bins
            .iter()
            .map(|b| Ok(b.gamma * b.problem.direct_cost(selected)?))
            .sum()
    }
}

/// Greedy selection for one frequency.
pub fn greedy_place(problem: &PlacementProblem, stop: StopRule) -> Result<GreedyResult> {
    greedy_place_observed(problem, stop, |_| {})
}

/// As [`greedy_place`], calling `observer` after every pick.
pub fn greedy_place_observed<F>(problem: &PlacementProblem, stop: StopRule, observer: F) -> Result<GreedyResult>
where
    F: FnMut(&GreedyStep<'_>),
{
    run(&[(1.0, problem)], stop, observer)
}

/// Greedy selection on the weighted broadband cost, keeping one incremental
/// state per bin.
pub fn greedy_place_broadband(spec: &BroadbandSpec, stop: StopRule) -> Result<GreedyResult> {
    greedy_place_broadband_observed(spec, stop, |_| {})
}

pub fn greedy_place_broadband_observed<F>(spec: &BroadbandSpec, stop: StopRule, observer: F) -> Result<GreedyResult>
where
    F: FnMut(&GreedyStep<'_>),
{
    let bins: Vec<(f64, &PlacementProblem)> = spec.bins.iter().map(|b| (b.gamma, &b.problem)).collect();
    run(&bins, stop, observer)
}

fn run<F>(bins: &[(f64, &PlacementProblem)], stop: StopRule, mut observer: F) -> Result<GreedyResult>
where
    F: FnMut(&GreedyStep<'_>),
{
    let n = bins[0].1.num_candidates();
    if n == 0 {
        return Err(Error::Domain("candidate set is empty".into()));
    }
    if stop.max_sources > n {
        return Err(Error::Domain(format!(
            "cannot select {} sources from {n} candidates",
            stop.max_sources
        )));
    }
    if let Some(delta) = stop.min_relative_decrease {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::Domain(format!("decrease threshold must be non-negative, got {delta}")));
        }
    }

    let mut states: Vec<SelectionState> = bins.iter().map(|(_, p)| SelectionState::empty(p)).collect();
    let weighted = |states: &[SelectionState]| -> f64 {
        bins.iter().zip(states).map(|((g, _), s)| g * s.cost()).sum()
    };
    let empty_cost = weighted(&states);
    let mut cost_trace = vec![empty_cost];
    let mut selection = Vec::with_capacity(stop.max_sources);
    let mut taken = vec![false; n];
    let mut op_count = 0u64;

    for step in 0..stop.max_sources {
        let open: Vec<usize> = (0..n).filter(|&c| !taken[c]).collect();
        let trials: Vec<Result<(f64, u64)>> = open
            .par_iter()
            .map(|&c| {
                let mut total = 0.0;
                let mut ops = 0;
                for ((g, p), s) in bins.iter().zip(&states) {
                    let t = s.trial(p, c)?;
                    total += g * t.cost;
                    ops += t.ops;
                }
                Ok((total, ops))
            })
            .collect();

        // sequential reduction in index order keeps ties on the lowest index
        let mut best: Option<(usize, f64)> = None;
        for (&c, trial) in open.iter().zip(trials) {
            let (cost, ops) = trial?;
            op_count += ops;
            if !cost.is_finite() {
                return Err(Error::Numerical(format!("non-finite trial cost for candidate {c}")));
            }
            if best.is_none_or(|(_, b)| cost < b) {
                best = Some((c, cost));
            }
        }
        let (pick, _) = best.expect("at least one open candidate");

        let previous = *cost_trace.last().expect("trace starts non-empty");
        for ((_, p), s) in bins.iter().zip(states.iter_mut()) {
            let l = s.len() as u64;
            s.extend_or_reinvert(p, pick)?;
            op_count += (l + 1) * (l + 1);
        }
        taken[pick] = true;
        selection.push(pick);
        // each bin's decrease is clamped at zero, so this cannot exceed `previous`
        let cost = weighted(&states);
        cost_trace.push(cost);
        observer(&GreedyStep {
            step,
            picked: pick,
            cost,
            states: &states,
        });

        if let Some(delta) = stop.min_relative_decrease {
            if previous - cost < delta * empty_cost {
                break;
            }
        }
    }

    Ok(GreedyResult {
        selection,
        cost_trace,
        op_count,
    })
}
