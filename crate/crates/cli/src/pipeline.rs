//! Place, synthesize and score.

use anyhow::{ensure, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use sfs_placement::placement::{
    greedy_place, greedy_place_broadband, prior_from_direction_range, regular_placement_a, regular_placement_b,
    BroadbandBin, BroadbandSpec, DirectionRangePrior, FieldPrior, GreedyResult, PlacementProblem, StopRule,
};
use sfs_placement::room::RoomModel;
use sfs_placement::synthesis::{
    build_pressure_matching, sdr, solve_wmm, weight_matrix_circle, SynthesisConfig, TransferCoeffMatrix,
    WeightMatrix,
};
use sfs_placement::wavefield::{basis_matrix, CircularRegion, ExpansionConfig, Frequency, PlaneWave, Point2};
use sfs_placement::{CMatrix, CVector, Complex64};

use crate::config::{Band, ExperimentConfig, Method};

/// Geometry shared by every frequency of a run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ExperimentConfig,
    pub region: CircularRegion,
    pub room: Option<RoomModel>,
    pub candidates: Vec<Point2>,
    pub control_points: Vec<Point2>,
    pub synthesis: SynthesisConfig,
}

/// The linear-least-squares triple of one method at one frequency, over
/// all candidates.
#[derive(Debug, Clone)]
pub struct MethodModel {
    pub c: CMatrix,
    pub w: CMatrix,
    pub prior: FieldPrior,
    pub lambda_select: f64,
}

/// Everything that depends on frequency.
#[derive(Debug, Clone)]
pub struct FrequencyModel {
    pub freq: Frequency,
    pub expansion: ExpansionConfig,
    pub transfer: TransferCoeffMatrix,
    pub weight: WeightMatrix,
    pub prior: FieldPrior,
    pub method: MethodModel,
}

/// A named loudspeaker selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub label: String,
    pub indices: Vec<usize>,
    /// `J` after each pick, starting from the empty set. Empty for baselines.
    pub cost_trace: Vec<f64>,
}

/// One row of an SDR table.
#[derive(Debug, Clone, PartialEq)]
pub struct SdrRecord {
    pub angle_deg: f64,
    pub freq_hz: f64,
    pub sdr_db: f64,
    pub method: String,
}

/// Synthesized field on the evaluation grid for one plane wave.
#[derive(Debug, Clone)]
pub struct FieldGrid {
    pub label: String,
    pub angle_deg: f64,
    pub freq_hz: f64,
    pub spacing: f64,
    pub points: Vec<Point2>,
    pub synthesized: Vec<Complex64>,
    pub desired: Vec<Complex64>,
    pub sdr_db: f64,
}

impl Scenario {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let region = config.region()?;
        let room = config.room_model()?;
        let candidates = config.candidate_positions()?;
        let synthesis = config.synthesis_config()?;
        let control_points = if config.method == Method::PressureMatching {
            uniform_disc_points(&region, config.baselines.control_points, config.seed)
        } else {
            Vec::new()
        };
        Ok(Self {
            config,
            region,
            room,
            candidates,
            control_points,
            synthesis,
        })
    }

    pub fn direction_prior(&self) -> Result<DirectionRangePrior> {
        let (lo, hi) = self.config.prior_angles_rad();
        let amp = Complex64::new(self.config.prior.amplitude_re, self.config.prior.amplitude_im);
        Ok(DirectionRangePrior::new(lo, hi)?.with_amplitude(amp))
    }

    pub fn frequency_model(&self, hz: f64) -> Result<FrequencyModel> {
        let freq = self.config.frequency(hz)?;
        let expansion = ExpansionConfig::for_frequency(&self.region, freq);
        let transfer = TransferCoeffMatrix::new(self.room.as_ref(), &self.candidates, &expansion, freq)
            .with_context(|| format!("transfer coefficients at {hz} Hz"))?;
        let weight = weight_matrix_circle(&self.region, &expansion, freq)?;
        let prior = prior_from_direction_range(&self.direction_prior()?, &expansion, freq)?;
        let lambda = self.config.lambdas.select;
        let method = match self.config.method {
            Method::Wmm => MethodModel {
                c: transfer.matrix().clone(),
                w: weight.as_matrix().clone(),
                prior: prior.clone(),
                lambda_select: lambda,
            },
            Method::ModeMatching => MethodModel {
                c: transfer.matrix().clone(),
                w: CMatrix::identity(expansion.len(), expansion.len()),
                prior: prior.clone(),
                lambda_select: lambda,
            },
            Method::PressureMatching => {
                let pm = build_pressure_matching(
                    &self.region,
                    &self.control_points,
                    &self.candidates,
                    |_| Complex64::new(0.0, 0.0),
                    freq,
                    self.room.as_ref(),
                )?;
                let psi = basis_matrix(&self.control_points, &expansion, freq)?;
                // control-point sums approximate the regional integral divided
                // by the cell area, so the ridge is scaled to match
                let cell = self.region.area() / self.control_points.len() as f64;
                MethodModel {
                    c: pm.c,
                    w: pm.w,
                    prior: prior.transform(&psi)?,
                    lambda_select: lambda / cell,
                }
            }
        };
        Ok(FrequencyModel {
            freq,
            expansion,
            transfer,
            weight,
            prior,
            method,
        })
    }

    pub fn frequency_models(&self, freqs: &[f64]) -> Result<Vec<FrequencyModel>> {
        freqs.iter().map(|&hz| self.frequency_model(hz)).collect()
    }

    /// Greedy placement over the given frequency models (one model means
    /// narrowband).
    pub fn place_proposed(&self, models: &[FrequencyModel], gammas: &[f64], label: &str) -> Result<Placement> {
        ensure!(!models.is_empty(), "no frequency models to place for");
        ensure!(models.len() == gammas.len(), "one gamma weight per frequency required");
        let mut stop = StopRule::max_sources(self.config.placement.num_sources);
        if let Some(delta) = self.config.placement.min_relative_decrease {
            stop = stop.with_min_decrease(delta);
        }
        let result: GreedyResult = if models.len() == 1 && gammas[0] == 1.0 {
            let m = &models[0].method;
            let problem = PlacementProblem::new(&m.c, &m.w, &m.prior, m.lambda_select)?;
            greedy_place(&problem, stop)?
        } else {
            let bins = models
                .iter()
                .zip(gammas)
                .map(|(fm, &g)| {
                    let m = &fm.method;
                    Ok(BroadbandBin {
                        frequency: fm.freq,
                        gamma: g,
                        problem: PlacementProblem::new(&m.c, &m.w, &m.prior, m.lambda_select)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            greedy_place_broadband(&BroadbandSpec::new(bins)?, stop)?
        };
        Ok(Placement {
            label: label.to_string(),
            indices: result.selection,
            cost_trace: result.cost_trace,
        })
    }

    /// Proposed placement per the configured band.
    pub fn place(&self) -> Result<Placement> {
        let freqs = self.config.placement_frequencies()?;
        let models = self.frequency_models(&freqs)?;
        let label = match self.config.placement.band {
            Band::Narrowband => "proposed",
            Band::Broadband => "proposed_bb",
        };
        self.place_proposed(&models, &self.config.gammas()?, label)
    }

    pub fn regular_a(&self) -> Result<Placement> {
        let (lo, hi) = self.config.prior_angles_rad();
        Ok(Placement {
            label: "regular_a".into(),
            indices: regular_placement_a(&self.candidates, &self.region, lo, hi, self.config.placement.num_sources)?,
            cost_trace: Vec::new(),
        })
    }

    pub fn regular_b(&self) -> Result<Placement> {
        Ok(Placement {
            label: "regular_b".into(),
            indices: regular_placement_b(self.candidates.len(), self.config.placement.num_sources)?,
            cost_trace: Vec::new(),
        })
    }

    /// Configured baselines, in a fixed order.
    pub fn baselines(&self) -> Result<Vec<Placement>> {
        let mut out = Vec::new();
        if self.config.baselines.regular_a {
            out.push(self.regular_a()?);
        }
        if self.config.baselines.regular_b {
            out.push(self.regular_b()?);
        }
        Ok(out)
    }

    pub fn check_placement(&self, placement: &Placement) -> Result<()> {
        let n = self.candidates.len();
        for &i in &placement.indices {
            ensure!(i < n, "placement `{}` uses index {i} but there are {n} candidates", placement.label);
        }
        let mut sorted = placement.indices.clone();
        sorted.sort_unstable();
        sorted.dedup();
        ensure!(
            sorted.len() == placement.indices.len(),
            "placement `{}` repeats an index",
            placement.label
        );
        Ok(())
    }

    /// Driving signals for one plane wave with the configured method.
    fn drive(&self, model: &FrequencyModel, indices: &[usize], pw: &PlaneWave) -> Result<CVector> {
        let c_sel = model.method.c.select_columns(indices.iter());
        let lambda = self.synthesis.synthesis_lambda(&c_sel, &model.method.w);
        let b = match self.config.method {
            Method::Wmm | Method::ModeMatching => {
                sfs_placement::wavefield::planewave_coeffs(pw, &model.expansion, model.freq).into_vector()
            }
            Method::PressureMatching => CVector::from_iterator(
                self.control_points.len(),
                self.control_points.iter().map(|p| pw.pressure(p, model.freq)),
            ),
        };
        Ok(solve_wmm(&c_sel, &model.method.w, &b, lambda, model.freq)?.values)
    }

    /// SDR of every placement for every angle at one frequency, plus grids
    /// for `grid_angles`. Rows come out ordered by placement, then angle.
    pub fn evaluate_frequency(
        &self,
        model: &FrequencyModel,
        placements: &[Placement],
        angles_deg: &[f64],
        grid_angles_deg: &[f64],
    ) -> Result<(Vec<SdrRecord>, Vec<FieldGrid>)> {
        for p in placements {
            self.check_placement(p)?;
        }
        let spacing = self.config.evaluation.grid_spacing;
        let points = self.region.grid(spacing);
        let basis = basis_matrix(&points, &model.expansion, model.freq)?;
        let cell = spacing * spacing;

        let evaluate = |placement: &Placement, angle_deg: f64| -> Result<(Vec<Complex64>, Vec<Complex64>, f64)> {
            let pw = PlaneWave::new(angle_deg.to_radians());
            let d = self.drive(model, &placement.indices, &pw)?;
            // interior field from the expansion of the selected sources
            let coeffs = model.transfer.select(&placement.indices) * d;
            let syn: Vec<Complex64> = (&basis * coeffs).iter().copied().collect();
            let des: Vec<Complex64> = points.iter().map(|p| pw.pressure(p, model.freq)).collect();
            let s = sdr(&des, &syn, cell)?;
            Ok((syn, des, s))
        };

        let cells: Vec<(usize, f64)> = (0..placements.len())
            .flat_map(|i| angles_deg.iter().map(move |&a| (i, a)))
            .collect();
        let records = cells
            .par_iter()
            .map(|&(i, a)| {
                let (_, _, s) = evaluate(&placements[i], a)?;
                Ok(SdrRecord {
                    angle_deg: a,
                    freq_hz: model.freq.hz(),
                    sdr_db: s,
                    method: placements[i].label.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let mut grids = Vec::new();
        for placement in placements {
            for &a in grid_angles_deg {
                let (synthesized, desired, s) = evaluate(placement, a)?;
                grids.push(FieldGrid {
                    label: placement.label.clone(),
                    angle_deg: a,
                    freq_hz: model.freq.hz(),
                    spacing,
                    points: points.clone(),
                    synthesized,
                    desired,
                    sdr_db: s,
                });
            }
        }
        Ok((records, grids))
    }

    /// SDR over a frequency list; models are built one frequency at a time.
    pub fn evaluate(
        &self,
        freqs: &[f64],
        placements: &[Placement],
        angles_deg: &[f64],
        grid_angles_deg: &[f64],
    ) -> Result<(Vec<SdrRecord>, Vec<FieldGrid>)> {
        let mut records = Vec::new();
        let mut grids = Vec::new();
        for &hz in freqs {
            let model = self.frequency_model(hz)?;
            let (r, g) = self.evaluate_frequency(&model, placements, angles_deg, grid_angles_deg)?;
            records.extend(r);
            grids.extend(g);
        }
        Ok((records, grids))
    }
}

/// Uniform points in a disc, reproducible from `seed`.
pub fn uniform_disc_points(region: &CircularRegion, count: usize, seed: u64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = region.radius * rng.random::<f64>().sqrt();
            let a = rng.random_range(0.0..2.0 * std::f64::consts::PI);
            Point2::new(region.center.x + r * a.cos(), region.center.y + r * a.sin())
        })
        .collect()
}

/// Mean SDR of one method at one frequency.
pub fn mean_sdr(records: &[SdrRecord], method: &str, freq_hz: f64) -> Option<f64> {
    let vals: Vec<f64> = records
        .iter()
        .filter(|r| r.method == method && (r.freq_hz - freq_hz).abs() < 1e-9)
        .map(|r| r.sdr_db)
        .collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> ExperimentConfig {
        serde_json::from_value(serde_json::json!({
            "room": null,
            "candidates": {"kind": "square", "center": {"x": 0.0, "y": 0.0}, "side": 3.0, "count": 8},
            "region": {"center": {"x": 0.0, "y": 0.0}, "radius": 0.3},
            "placement": {"num_sources": 2, "narrowband_hz": 400.0},
            "evaluation": {"frequencies": {"list": [400.0]}, "angles": {"list_deg": [0.0]},
                           "grid_angles_deg": [], "grid_spacing": 0.02}
        }))
        .unwrap()
    }

    #[test]
    fn toy_placement_trace() {
        let s = Scenario::new(toy()).unwrap();
        let p = s.place().unwrap();
        assert_eq!(p.indices.len(), 2);
        assert_eq!(p.cost_trace.len(), 3);
        assert!(p.cost_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn candidate_field_is_synthesized_exactly() {
        // desired = field of a selected source, through the same evaluation path
        let s = Scenario::new(toy()).unwrap();
        let model = s.frequency_model(400.0).unwrap();
        let points = s.region.grid(0.02);
        let basis = basis_matrix(&points, &model.expansion, model.freq).unwrap();
        let sel = [1usize, 4];
        let c_sel = model.transfer.select(&sel);
        let b = c_sel.column(0).clone_owned();
        let lambda = 1e-12;
        let d = solve_wmm(&c_sel, model.weight.as_matrix(), &b, lambda, model.freq).unwrap();
        let des: Vec<Complex64> = (&basis * &b).iter().copied().collect();
        let syn: Vec<Complex64> = (&basis * (&c_sel * d.values)).iter().copied().collect();
        assert!(sdr(&des, &syn, 4e-4).unwrap() >= 100.0);
    }

    #[test]
    fn empty_angle_list_gives_empty_table() {
        let s = Scenario::new(toy()).unwrap();
        let p = s.regular_b().unwrap();
        let (rows, grids) = s.evaluate(&[400.0], &[p], &[], &[]).unwrap();
        assert!(rows.is_empty() && grids.is_empty());
    }

    #[test]
    fn out_of_range_placement_rejected() {
        let s = Scenario::new(toy()).unwrap();
        let bad = Placement {
            label: "x".into(),
            indices: vec![0, 99],
            cost_trace: vec![],
        };
        assert!(s.evaluate(&[400.0], &[bad], &[0.0], &[]).is_err());
    }
}
