//! Seeded random free-field problems for oracle suites.

use std::f64::consts::PI;

use anyhow::Result;
use rand::Rng;

use sfs_placement::placement::{prior_from_direction_range, DirectionRangePrior, FieldPrior, PlacementProblem};
use sfs_placement::synthesis::{weight_matrix_circle, TransferCoeffMatrix, WeightMatrix};
use sfs_placement::wavefield::{CircularRegion, ExpansionConfig, Frequency, Point2};

#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub region: CircularRegion,
    pub freq: Frequency,
    pub transfer: TransferCoeffMatrix,
    pub weight: WeightMatrix,
    pub prior: FieldPrior,
}

impl RandomInstance {
    pub fn problem(&self, lambda: f64) -> Result<PlacementProblem> {
        Ok(PlacementProblem::new(
            self.transfer.matrix(),
            self.weight.as_matrix(),
            &self.prior,
            lambda,
        )?)
    }
}

/// `n` candidates on an annulus around a 0.4 m disc at the origin, expansion
/// order `order`, a random frequency in 200..1000 Hz and a random
/// plane-wave direction range.
pub fn random_free_field<R: Rng>(rng: &mut R, n: usize, order: usize) -> Result<RandomInstance> {
    let region = CircularRegion::new(Point2::ORIGIN, 0.4)?;
    let freq = Frequency::new(rng.random_range(200.0..1000.0))?;
    let cfg = ExpansionConfig::new(order, &region);
    let positions: Vec<Point2> = (0..n)
        .map(|_| {
            let r = rng.random_range(0.8..2.0);
            let a = rng.random_range(0.0..2.0 * PI);
            Point2::new(r * a.cos(), r * a.sin())
        })
        .collect();
    let transfer = TransferCoeffMatrix::free_field(&positions, &cfg, freq)?;
    let weight = weight_matrix_circle(&region, &cfg, freq)?;
    let lo = rng.random_range(-PI..PI);
    let width = rng.random_range(0.2..2.0 * PI);
    let prior = prior_from_direction_range(&DirectionRangePrior::new(lo, lo + width)?, &cfg, freq)?;
    Ok(RandomInstance {
        region,
        freq,
        transfer,
        weight,
        prior,
    })
}
