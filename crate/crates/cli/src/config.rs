//! Experiment configuration: a JSON document whose omitted keys fall back to
//! the reference study (5 m x 4 m room, 200 candidates, 20 loudspeakers).

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use sfs_placement::placement::square_boundary_candidates;
use sfs_placement::room::{RoomModel, WallReflections, DEFAULT_MAX_REFLECTION_ORDER};
use sfs_placement::synthesis::SynthesisConfig;
use sfs_placement::wavefield::{CircularRegion, Frequency, Point2, DEFAULT_SOUND_SPEED};

/// Prefix of environment variables that override scalar keys. Nested keys
/// are joined by a double underscore, e.g. `SFSPLACE_PLACEMENT__NUM_SOURCES`.
pub const ENV_PREFIX: &str = "SFSPLACE_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Absent means free field.
    pub room: Option<RoomConfig>,
    pub candidates: CandidateConfig,
    pub region: RegionConfig,
    pub prior: PriorConfig,
    pub placement: PlacementConfig,
    pub evaluation: EvaluationConfig,
    pub lambdas: LambdaConfig,
    pub method: Method,
    pub baselines: BaselineConfig,
    pub sound_speed: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomConfig {
    pub size_x: f64,
    pub size_y: f64,
    pub reflection: WallReflections,
    #[serde(default = "default_reflection_order")]
    pub max_reflection_order: usize,
}

fn default_reflection_order() -> usize {
    DEFAULT_MAX_REFLECTION_ORDER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CandidateConfig {
    /// Equally spaced on a square boundary, counter-clockwise from the
    /// lower-left corner.
    Square { center: Point2, side: f64, count: usize },
    Explicit { positions: Vec<Point2> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub center: Point2,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub angle_min_deg: f64,
    pub angle_max_deg: f64,
    pub amplitude_re: f64,
    pub amplitude_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrequencySpec {
    List { list: Vec<f64> },
    Range { start: f64, stop: f64, step: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleSpec {
    List { list_deg: Vec<f64> },
    Range { start_deg: f64, stop_deg: f64, step_deg: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Narrowband,
    Broadband,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlacementConfig {
    pub band: Band,
    /// Frequency for a narrowband run.
    pub narrowband_hz: f64,
    /// Bins of a broadband run.
    pub broadband: FrequencySpec,
    /// Per-bin weights; empty means 1 for every bin.
    pub gamma: Vec<f64>,
    pub num_sources: usize,
    /// Optional early stop, relative to the empty-set cost.
    pub min_relative_decrease: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub frequencies: FrequencySpec,
    pub angles: AngleSpec,
    /// Write field and error grids for these angles (and every evaluated
    /// frequency).
    pub grid_angles_deg: Vec<f64>,
    pub grid_spacing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaConfig {
    pub select: f64,
    pub synth_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Wmm,
    ModeMatching,
    PressureMatching,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub regular_a: bool,
    pub regular_b: bool,
    /// Control points of the pressure-matching method, drawn uniformly in
    /// the region from `seed`.
    pub control_points: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            room: Some(RoomConfig {
                size_x: 5.0,
                size_y: 4.0,
                reflection: WallReflections::uniform(0.8),
                max_reflection_order: DEFAULT_MAX_REFLECTION_ORDER,
            }),
            candidates: CandidateConfig::Square {
                center: Point2::ORIGIN,
                side: 3.0,
                count: 200,
            },
            region: RegionConfig {
                center: Point2::new(0.5, 0.3),
                radius: 0.5,
            },
            prior: PriorConfig::default(),
            placement: PlacementConfig::default(),
            evaluation: EvaluationConfig::default(),
            lambdas: LambdaConfig::default(),
            method: Method::Wmm,
            baselines: BaselineConfig::default(),
            sound_speed: DEFAULT_SOUND_SPEED,
            seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            angle_min_deg: -45.0,
            angle_max_deg: 45.0,
            amplitude_re: 1.0,
            amplitude_im: 0.0,
        }
    }
}

impl Default for PlacementConfig {
    fn default() -> Self {
        Self {
            band: Band::Narrowband,
            narrowband_hz: 1000.0,
            broadband: FrequencySpec::Range {
                start: 100.0,
                stop: 2000.0,
                step: 100.0,
            },
            gamma: Vec::new(),
            num_sources: 20,
            min_relative_decrease: None,
        }
    }
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            frequencies: FrequencySpec::List { list: vec![1000.0] },
            angles: AngleSpec::Range {
                start_deg: -45.0,
                stop_deg: 45.0,
                step_deg: 1.0,
            },
            grid_angles_deg: vec![0.0],
            grid_spacing: sfs_placement::synthesis::EVALUATION_GRID_SPACING,
        }
    }
}

impl Default for LambdaConfig {
    fn default() -> Self {
        let s = SynthesisConfig::default();
        Self {
            select: s.lambda_select,
            synth_scale: s.lambda_synth_scale,
        }
    }
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            regular_a: true,
            regular_b: true,
            control_points: 400,
        }
    }
}

/// Inclusive arithmetic progression, robust to rounding at the end point.
fn progression(start: f64, stop: f64, step: f64, what: &str) -> Result<Vec<f64>> {
    ensure!(
        step > 0.0 && start.is_finite() && stop.is_finite(),
        "{what}: step must be positive and bounds finite"
    );
    if stop < start {
        return Ok(Vec::new());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

impl FrequencySpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            FrequencySpec::List { list } => Ok(list.clone()),
            FrequencySpec::Range { start, stop, step } => progression(*start, *stop, *step, "frequency range"),
        }
    }
}

impl AngleSpec {
    pub fn values_deg(&self) -> Result<Vec<f64>> {
        match self {
            AngleSpec::List { list_deg } => Ok(list_deg.clone()),
            AngleSpec::Range {
                start_deg,
                stop_deg,
                step_deg,
            } => progression(*start_deg, *stop_deg, *step_deg, "angle range"),
        }
    }
}

impl ExperimentConfig {
    /// Reads `path` (or starts from the defaults), applies environment
    /// overrides and validates the result.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let doc = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str::<Value>(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => Value::Object(Default::default()),
        };
        let vars: Vec<(String, String)> = std::env::vars().collect();
        Self::from_value_with_env(doc, &vars)
    }

    pub fn from_value_with_env(doc: Value, vars: &[(String, String)]) -> Result<Self> {
        // round-trip through the typed config so overrides see every default
        let parsed: ExperimentConfig = serde_json::from_value(doc).context("invalid configuration")?;
        let mut resolved = serde_json::to_value(&parsed)?;
        apply_env_overrides(&mut resolved, vars)?;
        let cfg: ExperimentConfig =
            serde_json::from_value(resolved).context("invalid configuration after environment overrides")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_pretty_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn region(&self) -> Result<CircularRegion> {
        Ok(CircularRegion::new(self.region.center, self.region.radius)?)
    }

    pub fn room_model(&self) -> Result<Option<RoomModel>> {
        self.room
            .map(|r| RoomModel::new(r.size_x, r.size_y, r.reflection, r.max_reflection_order))
            .transpose()
            .map_err(Into::into)
    }

    pub fn candidate_positions(&self) -> Result<Vec<Point2>> {
        match &self.candidates {
            CandidateConfig::Square { center, side, count } => Ok(square_boundary_candidates(*center, *side, *count)?),
            CandidateConfig::Explicit { positions } => Ok(positions.clone()),
        }
    }

    pub fn frequency(&self, hz: f64) -> Result<Frequency> {
        Ok(Frequency::with_sound_speed(hz, self.sound_speed)?)
    }

    pub fn prior_angles_rad(&self) -> (f64, f64) {
        (self.prior.angle_min_deg.to_radians(), self.prior.angle_max_deg.to_radians())
    }

    /// Frequencies the placement is optimised for.
    pub fn placement_frequencies(&self) -> Result<Vec<f64>> {
        match self.placement.band {
            Band::Narrowband => Ok(vec![self.placement.narrowband_hz]),
            Band::Broadband => self.placement.broadband.values(),
        }
    }

    pub fn gammas(&self) -> Result<Vec<f64>> {
        let n = self.placement_frequencies()?.len();
        if self.placement.gamma.is_empty() {
            return Ok(vec![1.0; n]);
        }
        ensure!(
            self.placement.gamma.len() == n,
            "{} gamma weights for {n} placement frequencies",
            self.placement.gamma.len()
        );
        Ok(self.placement.gamma.clone())
    }

    pub fn synthesis_config(&self) -> Result<SynthesisConfig> {
        Ok(SynthesisConfig::new(self.lambdas.select, self.lambdas.synth_scale)?)
    }

    pub fn validate(&self) -> Result<()> {
        let region = self.region()?;
        let candidates = self.candidate_positions()?;
        ensure!(!candidates.is_empty(), "candidate set is empty");
        ensure!(
            self.sound_speed > 0.0 && self.sound_speed.is_finite(),
            "sound speed must be positive"
        );
        self.synthesis_config()?;
        let (lo, hi) = self.prior_angles_rad();
        ensure!(lo < hi, "prior angle_min_deg must be below angle_max_deg");
        ensure!(
            self.placement.num_sources >= 1 && self.placement.num_sources <= candidates.len(),
            "num_sources must lie in 1..={}",
            candidates.len()
        );
        let freqs = self.placement_frequencies()?;
        ensure!(!freqs.is_empty(), "no placement frequencies");
        for hz in freqs.iter().chain(self.evaluation.frequencies.values()?.iter()) {
            self.frequency(*hz)?;
        }
        for g in self.gammas()? {
            ensure!(g > 0.0 && g.is_finite(), "gamma weights must be positive, got {g}");
        }
        ensure!(self.evaluation.grid_spacing > 0.0, "grid spacing must be positive");
        self.evaluation.angles.values_deg()?;
        if self.method == Method::PressureMatching {
            ensure!(self.baselines.control_points > 0, "pressure matching needs control points");
        }
        if let Some(i) = candidates.iter().position(|c| c.distance(&region.center) <= region.radius) {
            bail!("candidate {i} lies inside the target region");
        }
        if let Some(room) = self.room_model()? {
            if let Some(i) = candidates.iter().position(|c| !room.contains(c)) {
                bail!("candidate {i} lies outside the room");
            }
            let c = region.center;
            let r = region.radius;
            ensure!(
                c.x.abs() + r < 0.5 * room.size_x && c.y.abs() + r < 0.5 * room.size_y,
                "target region does not fit inside the room"
            );
        }
        Ok(())
    }
}

/// Sets existing scalar keys from `PREFIX`-named variables. A value that
/// parses as JSON is used as such, anything else as a string.
pub fn apply_env_overrides(doc: &mut Value, vars: &[(String, String)]) -> Result<()> {
    let mut sorted: Vec<&(String, String)> = vars.iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    sorted.sort();
    for (key, raw) in sorted {
        let path: Vec<String> = key[ENV_PREFIX.len()..]
            .split("__")
            .map(|s| s.to_ascii_lowercase())
            .collect();
        let mut slot = &mut *doc;
        for part in &path {
            slot = match slot {
                Value::Object(map) => map
                    .get_mut(part.as_str())
                    .with_context(|| format!("{key}: no configuration key `{part}`"))?,
                _ => bail!("{key}: `{part}` is not inside an object"),
            };
        }
        if slot.is_object() || slot.is_array() {
            bail!("{key}: only scalar keys can be overridden");
        }
        *slot = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.clone()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_reference_study() {
        let cfg = ExperimentConfig::from_value_with_env(serde_json::json!({}), &[]).unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.candidate_positions().unwrap().len(), 200);
        assert_eq!(cfg.evaluation.angles.values_deg().unwrap().len(), 91);
    }

    #[test]
    fn round_trip_is_field_equal() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_pretty_json().unwrap();
        let back = ExperimentConfig::from_value_with_env(serde_json::from_str(&text).unwrap(), &[]).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn env_overrides_scalars_only() {
        let vars = vec![
            ("SFSPLACE_PLACEMENT__NUM_SOURCES".to_string(), "7".to_string()),
            ("SFSPLACE_METHOD".to_string(), "mode-matching".to_string()),
            ("OTHER_THING".to_string(), "1".to_string()),
        ];
        let cfg = ExperimentConfig::from_value_with_env(serde_json::json!({}), &vars).unwrap();
        assert_eq!(cfg.placement.num_sources, 7);
        assert_eq!(cfg.method, Method::ModeMatching);

        let bad = vec![("SFSPLACE_REGION".to_string(), "1".to_string())];
        assert!(ExperimentConfig::from_value_with_env(serde_json::json!({}), &bad).is_err());
        let unknown = vec![("SFSPLACE_NOPE".to_string(), "1".to_string())];
        assert!(ExperimentConfig::from_value_with_env(serde_json::json!({}), &unknown).is_err());
    }

    #[test]
    fn rejects_inconsistent_geometry() {
        let inside = serde_json::json!({"region": {"center": {"x": 1.4, "y": 0.0}, "radius": 0.5}});
        assert!(ExperimentConfig::from_value_with_env(inside, &[]).is_err());
        let small_room = serde_json::json!({"room": {"size_x": 2.0, "size_y": 2.0,
            "reflection": {"x_min": 0.5, "x_max": 0.5, "y_min": 0.5, "y_max": 0.5}}});
        assert!(ExperimentConfig::from_value_with_env(small_room, &[]).is_err());
        let unknown = serde_json::json!({"regoin": {}});
        assert!(ExperimentConfig::from_value_with_env(unknown, &[]).is_err());
    }

    #[test]
    fn progressions_include_end_point() {
        assert_eq!(progression(100.0, 2000.0, 100.0, "f").unwrap().len(), 20);
        assert_eq!(progression(-45.0, 45.0, 1.0, "a").unwrap().len(), 91);
        assert!(progression(1.0, 0.0, 1.0, "x").unwrap().is_empty());
    }
}
