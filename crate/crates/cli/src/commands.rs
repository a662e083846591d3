//! Subcommand bodies. Each writes its artifacts under `out` and returns a
//! summary for the caller.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use sfs_placement::placement::{exhaustive_place, greedy_place_observed, prior_from_direction_range, StopRule};
use sfs_placement::specfun::{bessel_j_seq, bessel_y_seq};
use sfs_placement::synthesis::{weight_matrix_circle, weight_matrix_quadrature, QuadratureResolution};
use sfs_placement::wavefield::ExpansionConfig;

use crate::config::{Band, ExperimentConfig};
use crate::instances::random_free_field;
use crate::output::{read_placement, write_cost_trace, write_grid, write_json, write_placement, write_prior, write_sdr};
use crate::pipeline::{mean_sdr, Placement, Scenario, SdrRecord};

fn echo_config(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    write_json(&out.join("resolved_config.json"), cfg)
}

fn write_placement_files(scenario: &Scenario, out: &Path, p: &Placement) -> Result<()> {
    write_placement(&out.join(format!("placement_{}.csv", p.label)), p, &scenario.candidates)?;
    if !p.cost_trace.is_empty() {
        write_cost_trace(&out.join(format!("cost_trace_{}.csv", p.label)), &p.cost_trace)?;
    }
    Ok(())
}

/// Greedy placement per the configured band, plus the enabled baselines.
pub fn cmd_place(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<Placement>> {
    echo_config(cfg, out)?;
    let scenario = Scenario::new(cfg.clone())?;
    let mut all = vec![scenario.place()?];
    all.extend(scenario.baselines()?);
    for p in &all {
        write_placement_files(&scenario, out, p)?;
    }
    Ok(all)
}

/// SDR table and grids for the placement in `placement_file` (or a fresh
/// greedy placement) and the enabled baselines.
pub fn cmd_evaluate(cfg: &ExperimentConfig, out: &Path, placement_file: Option<&Path>) -> Result<Vec<SdrRecord>> {
    echo_config(cfg, out)?;
    let scenario = Scenario::new(cfg.clone())?;
    let mut placements = vec![match placement_file {
        Some(path) => {
            let label = path
                .file_stem()
                .and_then(|s| s.to_str())
                .map(|s| s.trim_start_matches("placement_").to_string())
                .unwrap_or_else(|| "placement".into());
            let p = read_placement(path, &label)?;
            scenario.check_placement(&p)?;
            p
        }
        None => scenario.place()?,
    }];
    placements.extend(scenario.baselines()?);
    let freqs = cfg.evaluation.frequencies.values()?;
    let angles = cfg.evaluation.angles.values_deg()?;
    let (records, grids) = scenario.evaluate(&freqs, &placements, &angles, &cfg.evaluation.grid_angles_deg)?;
    write_sdr(&out.join("sdr.csv"), &records)?;
    for g in &grids {
        write_grid(&out.join("grids"), g, &scenario.region)?;
    }
    Ok(records)
}

/// Mean SDR per method and frequency from a reference run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionSummary {
    pub narrowband_hz: f64,
    /// Angle-averaged SDR at the narrowband frequency.
    pub mean_sdr_db: BTreeMap<String, f64>,
    /// SDR at 0 degrees at the narrowband frequency.
    pub sdr_at_zero_db: BTreeMap<String, f64>,
    /// Angle-averaged SDR per broadband bin.
    pub per_frequency: BTreeMap<String, Vec<(f64, f64)>>,
    pub selections: BTreeMap<String, Vec<usize>>,
}

/// Reference study: narrowband and broadband placements against both
/// baselines, swept over the prior's angle range and the broadband bins.
pub fn cmd_reproduce_paper(cfg: &ExperimentConfig, out: &Path) -> Result<ReproductionSummary> {
    echo_config(cfg, out)?;
    let scenario = Scenario::new(cfg.clone())?;
    let nb_hz = cfg.placement.narrowband_hz;
    let mut bb_cfg = cfg.clone();
    bb_cfg.placement.band = Band::Broadband;
    let bb_freqs = bb_cfg.placement_frequencies()?;
    let gammas = bb_cfg.gammas()?;
    let bb_models = scenario.frequency_models(&bb_freqs)?;

    let nb_model = match bb_freqs.iter().position(|&f| f == nb_hz) {
        Some(i) => bb_models[i].clone(),
        None => scenario.frequency_model(nb_hz)?,
    };
    let proposed = scenario.place_proposed(std::slice::from_ref(&nb_model), &[1.0], "proposed")?;
    let proposed_bb = scenario.place_proposed(&bb_models, &gammas, "proposed_bb")?;
    let placements = vec![proposed, proposed_bb, scenario.regular_a()?, scenario.regular_b()?];
    for p in &placements {
        write_placement_files(&scenario, out, p)?;
    }

    let angles = cfg.evaluation.angles.values_deg()?;
    let (nb_records, grids) =
        scenario.evaluate_frequency(&nb_model, &placements, &angles, &cfg.evaluation.grid_angles_deg)?;
    write_sdr(&out.join("sdr_narrowband.csv"), &nb_records)?;
    for g in &grids {
        write_grid(&out.join("grids"), g, &scenario.region)?;
    }

    let mut bb_records = Vec::new();
    for model in &bb_models {
        let (r, _) = scenario.evaluate_frequency(model, &placements, &angles, &[])?;
        bb_records.extend(r);
    }
    write_sdr(&out.join("sdr_broadband.csv"), &bb_records)?;

    let mut summary = ReproductionSummary {
        narrowband_hz: nb_hz,
        mean_sdr_db: BTreeMap::new(),
        sdr_at_zero_db: BTreeMap::new(),
        per_frequency: BTreeMap::new(),
        selections: BTreeMap::new(),
    };
    for p in &placements {
        if let Some(m) = mean_sdr(&nb_records, &p.label, nb_hz) {
            summary.mean_sdr_db.insert(p.label.clone(), m);
        }
        if let Some(r) = nb_records.iter().find(|r| r.method == p.label && r.angle_deg == 0.0) {
            summary.sdr_at_zero_db.insert(p.label.clone(), r.sdr_db);
        }
        let curve = bb_freqs
            .iter()
            .filter_map(|&f| mean_sdr(&bb_records, &p.label, f).map(|m| (f, m)))
            .collect();
        summary.per_frequency.insert(p.label.clone(), curve);
        summary.selections.insert(p.label.clone(), p.indices.clone());
    }
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Writes the prior moments for every placement frequency.
pub fn cmd_priors(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    echo_config(cfg, out)?;
    let scenario = Scenario::new(cfg.clone())?;
    let range = scenario.direction_prior()?;
    let mut written = Vec::new();
    for hz in cfg.placement_frequencies()? {
        let freq = cfg.frequency(hz)?;
        let ecfg = ExpansionConfig::for_frequency(&scenario.region, freq);
        let prior = prior_from_direction_range(&range, &ecfg, freq)?;
        write_prior(out, hz, &prior, &ecfg)?;
        written.push(out.join(format!("mu_{hz}hz.csv")));
        written.push(out.join(format!("sigma_{hz}hz.csv")));
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Quick oracle checks of the numerical core.
pub fn cmd_selftest(seed: u64) -> Result<Vec<SelftestCheck>> {
    let mut checks = Vec::new();

    // Wronskian J_{m+1} Y_m - J_m Y_{m+1} = 2 / (pi x)
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let x = 0.5 + 99.5 * (i as f64 + 0.5) / 100.0;
        let j = bessel_j_seq(41, x)?;
        let y = bessel_y_seq(41, x)?;
        let want = 2.0 / (std::f64::consts::PI * x);
        for m in 0..=40 {
            worst = worst.max(((j[m + 1] * y[m] - j[m] * y[m + 1]) / want - 1.0).abs());
        }
    }
    checks.push(SelftestCheck {
        name: "bessel-wronskian",
        passed: worst < 1e-8,
        detail: format!("max relative defect {worst:.3e}"),
    });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut defect: f64 = 0.0;
    let mut drift: f64 = 0.0;
    let mut first_pick_ok = true;
    for _ in 0..5 {
        let inst = random_free_field(&mut rng, 30, 12)?;
        let p = inst.problem(1e-5)?;
        let r = greedy_place_observed(&p, StopRule::max_sources(10), |s| {
            defect = defect.max(s.states[0].inverse_defect(&p));
        })?;
        let direct = p.direct_cost(&r.selection)?;
        drift = drift.max(((r.cost_trace[10] - direct) / direct).abs());
        let small = random_free_field(&mut rng, 12, 10)?.problem(1e-5)?;
        let g = sfs_placement::placement::greedy_place(&small, StopRule::max_sources(1))?;
        first_pick_ok &= exhaustive_place(&small, 1)?.selection == g.selection;
    }
    checks.push(SelftestCheck {
        name: "incremental-inverse",
        passed: defect < 1e-8 && drift < 1e-9,
        detail: format!("inverse defect {defect:.3e}, cost drift {drift:.3e}"),
    });
    checks.push(SelftestCheck {
        name: "greedy-first-pick",
        passed: first_pick_ok,
        detail: "greedy step 1 equals exhaustive L=1".into(),
    });

    let cfg = ExperimentConfig::default();
    let region = cfg.region()?;
    let freq = cfg.frequency(1000.0)?;
    let ecfg = ExpansionConfig::for_frequency(&region, freq);
    let closed = weight_matrix_circle(&region, &ecfg, freq)?;
    let quad = weight_matrix_quadrature(&region, &ecfg, freq, QuadratureResolution::default())?;
    let mut w_err: f64 = 0.0;
    for i in 0..ecfg.len() {
        let c = closed.as_matrix()[(i, i)].norm();
        w_err = w_err.max((closed.as_matrix()[(i, i)] - quad.as_matrix()[(i, i)]).norm() / c);
    }
    checks.push(SelftestCheck {
        name: "weight-matrix",
        passed: w_err < 1e-6,
        detail: format!("max relative diagonal error {w_err:.3e}"),
    });
    Ok(checks)
}

/// Fails when any check did.
pub fn selftest_passed(checks: &[SelftestCheck]) -> Result<()> {
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    ensure!(failed.is_empty(), "selftest failed: {}", failed.join(", "));
    Ok(())
}
