//! Flat `key = value` run configuration.
//!
//! The format is a plain text file: one `key = value` pair per line,
//! `#` starts a comment (full-line or trailing), blank lines are ignored.
//! Every key has a documented default; unknown keys and duplicate keys are
//! rejected so typos cannot silently fall back to defaults.
//!
//! Lists are comma-separated (`timesteps = 5,10,15,30`). Angle groups are
//! expressed as interval widths: `angle_spans_deg = 90,45` produces all
//! four 90° azimuth intervals plus all eight 45° intervals.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::data::features::Dimensionality;
use crate::error::{Error, Result};
use crate::sim::SimulatorParams;
use crate::train::adamw::AdamWConfig;
use crate::train::experiment::ExperimentConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub master_seed: u64,
    pub videos_per_class: usize,
    pub duration_s: f64,
    pub fps: u32,
    /// Azimuth interval widths; each must divide 360°.
    pub angle_spans_deg: Vec<f64>,
    pub timesteps: Vec<usize>,
    pub dimensionalities: Vec<Dimensionality>,
    pub k_folds: usize,
    pub validation_fraction: f64,
    pub hidden_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub simulator: SimulatorParams,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            master_seed: 42,
            videos_per_class: 15,
            duration_s: 7.0,
            fps: 25,
            angle_spans_deg: vec![90.0, 45.0],
            timesteps: vec![5, 10, 15, 30],
            dimensionalities: vec![Dimensionality::TwoD, Dimensionality::ThreeD],
            k_folds: 5,
            validation_fraction: 0.25,
            hidden_size: 32,
            learning_rate: 0.002,
            weight_decay: 0.01,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            batch_size: 8,
            max_epochs: 30,
            patience: 6,
            simulator: SimulatorParams::default(),
        }
    }
}

fn parse_scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<&str> = value.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(Error::Config(format!("empty element in list for {key}")));
    }
    items
        .into_iter()
        .map(|s| parse_scalar(key, s))
        .collect()
}

fn parse_dims(key: &str, value: &str) -> Result<Vec<Dimensionality>> {
    value
        .split(',')
        .map(str::trim)
        .map(|s| {
            Dimensionality::parse(s)
                .map_err(|_| Error::Config(format!("invalid value {s:?} for {key}")))
        })
        .collect()
}

impl Config {
    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let sim = &mut self.simulator;
        match key {
            "master_seed" => self.master_seed = parse_scalar(key, value)?,
            "videos_per_class" => self.videos_per_class = parse_scalar(key, value)?,
            "duration_s" => self.duration_s = parse_scalar(key, value)?,
            "fps" => self.fps = parse_scalar(key, value)?,
            "angle_spans_deg" => self.angle_spans_deg = parse_list(key, value)?,
            "timesteps" => self.timesteps = parse_list(key, value)?,
            "dimensionalities" => self.dimensionalities = parse_dims(key, value)?,
            "k_folds" => self.k_folds = parse_scalar(key, value)?,
            "validation_fraction" => self.validation_fraction = parse_scalar(key, value)?,
            "hidden_size" => self.hidden_size = parse_scalar(key, value)?,
            "learning_rate" => self.learning_rate = parse_scalar(key, value)?,
            "weight_decay" => self.weight_decay = parse_scalar(key, value)?,
            "adam_beta1" => self.adam_beta1 = parse_scalar(key, value)?,
            "adam_beta2" => self.adam_beta2 = parse_scalar(key, value)?,
            "adam_epsilon" => self.adam_epsilon = parse_scalar(key, value)?,
            "batch_size" => self.batch_size = parse_scalar(key, value)?,
            "max_epochs" => self.max_epochs = parse_scalar(key, value)?,
            "patience" => self.patience = parse_scalar(key, value)?,
            "stride_frequency_hz" => sim.gait.stride_frequency_hz = parse_scalar(key, value)?,
            "step_length_m" => sim.gait.step_length_m = parse_scalar(key, value)?,
            "step_height_m" => sim.gait.step_height_m = parse_scalar(key, value)?,
            "hip_sway_m" => sim.gait.hip_sway_m = parse_scalar(key, value)?,
            "body_height_m" => sim.gait.body_height_m = parse_scalar(key, value)?,
            "body_half_length_m" => sim.gait.body_half_length_m = parse_scalar(key, value)?,
            "body_half_width_m" => sim.gait.body_half_width_m = parse_scalar(key, value)?,
            "leg_attach_drop_m" => sim.gait.leg_attach_drop_m = parse_scalar(key, value)?,
            "bob_amplitude_m" => sim.gait.bob_amplitude_m = parse_scalar(key, value)?,
            "knee_bend_m" => sim.gait.knee_bend_m = parse_scalar(key, value)?,
            "ankle_bend_m" => sim.gait.ankle_bend_m = parse_scalar(key, value)?,
            "lameness_amplitude_scale" => {
                sim.gait.lameness_amplitude_scale = parse_scalar(key, value)?
            }
            "lameness_phase_shift" => sim.gait.lameness_phase_shift = parse_scalar(key, value)?,
            "lameness_stance_warp" => sim.gait.lameness_stance_warp = parse_scalar(key, value)?,
            "phase_jitter" => sim.gait.phase_jitter = parse_scalar(key, value)?,
            "occluder_density_per_m2" => sim.occluder_density_per_m2 = parse_scalar(key, value)?,
            "scene_area_m2" => sim.scene_area_m2 = parse_scalar(key, value)?,
            "walk_speed_mps" => sim.walk_speed_mps = parse_scalar(key, value)?,
            "torso_capsule_radius_m" => sim.torso_capsule_radius_m = parse_scalar(key, value)?,
            "limb_capsule_radius_m" => sim.limb_capsule_radius_m = parse_scalar(key, value)?,
            "corridor_clearance_m" => sim.corridor_clearance_m = parse_scalar(key, value)?,
            "elevation_lo_deg" => sim.camera.elevation_lo_deg = parse_scalar(key, value)?,
            "elevation_hi_deg" => sim.camera.elevation_hi_deg = parse_scalar(key, value)?,
            "distance_lo_m" => sim.camera.distance_lo_m = parse_scalar(key, value)?,
            "distance_hi_m" => sim.camera.distance_hi_m = parse_scalar(key, value)?,
            "focal_length_px" => sim.camera.focal_length = parse_scalar(key, value)?,
            "principal_point_px" => {
                let parts: Vec<f64> = parse_list(key, value)?;
                if parts.len() != 2 {
                    return Err(Error::Config(format!(
                        "{key} needs exactly two values, got {}",
                        parts.len()
                    )));
                }
                sim.camera.principal_point = [parts[0], parts[1]];
            }
            other => return Err(Error::Config(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    /// Every key with its resolved value, in canonical form. This is the
    /// snapshot stored in run manifests.
    pub fn to_key_values(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            map.insert(k.to_string(), v);
        };
        let join_f64 = |xs: &[f64]| {
            xs.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let sim = &self.simulator;
        put("master_seed", format!("{}", self.master_seed));
        put("videos_per_class", format!("{}", self.videos_per_class));
        put("duration_s", format!("{}", self.duration_s));
        put("fps", format!("{}", self.fps));
        put("angle_spans_deg", join_f64(&self.angle_spans_deg));
        put(
            "timesteps",
            self.timesteps
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        put(
            "dimensionalities",
            self.dimensionalities
                .iter()
                .map(|d| d.as_str().to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        put("k_folds", format!("{}", self.k_folds));
        put("validation_fraction", format!("{}", self.validation_fraction));
        put("hidden_size", format!("{}", self.hidden_size));
        put("learning_rate", format!("{}", self.learning_rate));
        put("weight_decay", format!("{}", self.weight_decay));
        put("adam_beta1", format!("{}", self.adam_beta1));
        put("adam_beta2", format!("{}", self.adam_beta2));
        put("adam_epsilon", format!("{}", self.adam_epsilon));
        put("batch_size", format!("{}", self.batch_size));
        put("max_epochs", format!("{}", self.max_epochs));
        put("patience", format!("{}", self.patience));
        put("stride_frequency_hz", format!("{}", sim.gait.stride_frequency_hz));
        put("step_length_m", format!("{}", sim.gait.step_length_m));
        put("step_height_m", format!("{}", sim.gait.step_height_m));
        put("hip_sway_m", format!("{}", sim.gait.hip_sway_m));
        put("body_height_m", format!("{}", sim.gait.body_height_m));
        put("body_half_length_m", format!("{}", sim.gait.body_half_length_m));
        put("body_half_width_m", format!("{}", sim.gait.body_half_width_m));
        put("leg_attach_drop_m", format!("{}", sim.gait.leg_attach_drop_m));
        put("bob_amplitude_m", format!("{}", sim.gait.bob_amplitude_m));
        put("knee_bend_m", format!("{}", sim.gait.knee_bend_m));
        put("ankle_bend_m", format!("{}", sim.gait.ankle_bend_m));
        put(
            "lameness_amplitude_scale",
            format!("{}", sim.gait.lameness_amplitude_scale),
        );
        put(
            "lameness_phase_shift",
            format!("{}", sim.gait.lameness_phase_shift),
        );
        put(
            "lameness_stance_warp",
            format!("{}", sim.gait.lameness_stance_warp),
        );
        put("phase_jitter", format!("{}", sim.gait.phase_jitter));
        put(
            "occluder_density_per_m2",
            format!("{}", sim.occluder_density_per_m2),
        );
        put("scene_area_m2", format!("{}", sim.scene_area_m2));
        put("walk_speed_mps", format!("{}", sim.walk_speed_mps));
        put(
            "torso_capsule_radius_m",
            format!("{}", sim.torso_capsule_radius_m),
        );
        put(
            "limb_capsule_radius_m",
            format!("{}", sim.limb_capsule_radius_m),
        );
        put(
            "corridor_clearance_m",
            format!("{}", sim.corridor_clearance_m),
        );
        put("elevation_lo_deg", format!("{}", sim.camera.elevation_lo_deg));
        put("elevation_hi_deg", format!("{}", sim.camera.elevation_hi_deg));
        put("distance_lo_m", format!("{}", sim.camera.distance_lo_m));
        put("distance_hi_m", format!("{}", sim.camera.distance_hi_m));
        put("focal_length_px", format!("{}", sim.camera.focal_length));
        put(
            "principal_point_px",
            format!(
                "{},{}",
                sim.camera.principal_point[0], sim.camera.principal_point[1]
            ),
        );
        map
    }

    /// Frames per simulated clip (nearest integer).
    pub fn frames_per_video(&self) -> usize {
        (self.duration_s * self.fps as f64).round() as usize
    }

    /// Expands the configured span widths into concrete azimuth intervals,
    /// in span order then ascending azimuth.
    pub fn angle_groups(&self) -> Result<Vec<(f64, f64)>> {
        let mut groups = Vec::new();
        for &span in &self.angle_spans_deg {
            if !(span > 0.0 && span <= 360.0) {
                return Err(Error::Config(format!(
                    "angle span {span} must lie in (0, 360]"
                )));
            }
            let count = (360.0 / span).round();
            if count < 1.0 || (count * span - 360.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "angle span {span} does not evenly divide 360"
                )));
            }
            for i in 0..count as usize {
                groups.push((i as f64 * span, (i + 1) as f64 * span));
            }
        }
        let mut seen = BTreeSet::new();
        for &(lo, hi) in &groups {
            if !seen.insert((lo.to_bits(), hi.to_bits())) {
                return Err(Error::Config(format!(
                    "angle group {lo}-{hi} appears more than once (duplicate span?)"
                )));
            }
        }
        Ok(groups)
    }

    /// Rejects out-of-range values with a message naming the key.
    pub fn validate(&self) -> Result<()> {
        fn bad(msg: String) -> Result<()> {
            Err(Error::Config(msg))
        }
        if self.videos_per_class == 0 {
            return bad("videos_per_class must be at least 1".into());
        }
        if self.k_folds < 2 {
            return bad("k_folds must be at least 2".into());
        }
        if self.videos_per_class < self.k_folds {
            return bad(format!(
                "videos_per_class ({}) must be at least k_folds ({}), or some folds get no test videos of one class",
                self.videos_per_class, self.k_folds
            ));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return bad(format!("duration_s must be positive, got {}", self.duration_s));
        }
        if self.fps == 0 {
            return bad("fps must be at least 1".into());
        }
        if self.frames_per_video() == 0 {
            return bad("duration_s × fps rounds to zero frames".into());
        }
        if self.timesteps.is_empty() {
            return bad("timesteps must not be empty".into());
        }
        let mut ts = self.timesteps.clone();
        ts.sort_unstable();
        ts.dedup();
        if ts.len() != self.timesteps.len() {
            return bad("timesteps contains duplicates".into());
        }
        for &t in &self.timesteps {
            if t == 0 {
                return bad("timesteps entries must be at least 1".into());
            }
            if t > self.frames_per_video() {
                return bad(format!(
                    "timestep {t} exceeds the {} frames of a clip",
                    self.frames_per_video()
                ));
            }
        }
        if self.dimensionalities.is_empty() {
            return bad("dimensionalities must not be empty".into());
        }
        let mut dims = self.dimensionalities.clone();
        dims.dedup();
        if dims.len() != self.dimensionalities.len()
            || (self.dimensionalities.len() > 2)
        {
            return bad("dimensionalities contains duplicates".into());
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad(format!(
                "validation_fraction must lie in (0, 1), got {}",
                self.validation_fraction
            ));
        }
        if self.hidden_size == 0 {
            return bad("hidden_size must be at least 1".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return bad(format!("weight_decay must be non-negative, got {}", self.weight_decay));
        }
        for (name, beta) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&beta) {
                return bad(format!("{name} must lie in [0, 1), got {beta}"));
            }
        }
        if !(self.adam_epsilon.is_finite() && self.adam_epsilon > 0.0) {
            return bad(format!("adam_epsilon must be positive, got {}", self.adam_epsilon));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1".into());
        }
        if self.patience == 0 {
            return bad("patience must be at least 1".into());
        }
        self.angle_groups()?;

        let g = &self.simulator.gait;
        for (name, v, strictly_positive) in [
            ("stride_frequency_hz", g.stride_frequency_hz, true),
            ("step_length_m", g.step_length_m, false),
            ("step_height_m", g.step_height_m, false),
            ("hip_sway_m", g.hip_sway_m, false),
            ("body_height_m", g.body_height_m, true),
            ("body_half_length_m", g.body_half_length_m, true),
            ("body_half_width_m", g.body_half_width_m, true),
            ("leg_attach_drop_m", g.leg_attach_drop_m, false),
            ("bob_amplitude_m", g.bob_amplitude_m, false),
            ("knee_bend_m", g.knee_bend_m, false),
            ("ankle_bend_m", g.ankle_bend_m, false),
            ("lameness_amplitude_scale", g.lameness_amplitude_scale, false),
            ("occluder_density_per_m2", self.simulator.occluder_density_per_m2, false),
            ("scene_area_m2", self.simulator.scene_area_m2, true),
            ("walk_speed_mps", self.simulator.walk_speed_mps, false),
            ("torso_capsule_radius_m", self.simulator.torso_capsule_radius_m, true),
            ("limb_capsule_radius_m", self.simulator.limb_capsule_radius_m, true),
            ("corridor_clearance_m", self.simulator.corridor_clearance_m, false),
        ] {
            if !v.is_finite() || v < 0.0 || (strictly_positive && v == 0.0) {
                return bad(format!(
                    "{name} must be {}, got {v}",
                    if strictly_positive { "positive" } else { "non-negative" }
                ));
            }
        }
        if !g.lameness_phase_shift.is_finite() {
            return bad("lameness_phase_shift must be finite".into());
        }
        if !(g.lameness_stance_warp >= 0.0 && g.lameness_stance_warp < 1.0) {
            return bad(format!(
                "lameness_stance_warp must lie in [0, 1), got {}",
                g.lameness_stance_warp
            ));
        }
        if !(g.phase_jitter >= 0.0 && g.phase_jitter < 0.5) {
            return bad(format!(
                "phase_jitter must lie in [0, 0.5), got {}",
                g.phase_jitter
            ));
        }
        let cam = &self.simulator.camera;
        if !(0.0 <= cam.elevation_lo_deg
            && cam.elevation_lo_deg <= cam.elevation_hi_deg
            && cam.elevation_hi_deg <= 90.0)
        {
            return bad(format!(
                "camera elevation range {}–{} must satisfy 0 ≤ lo ≤ hi ≤ 90",
                cam.elevation_lo_deg, cam.elevation_hi_deg
            ));
        }
        if !(cam.distance_lo_m > 0.0 && cam.distance_lo_m <= cam.distance_hi_m) {
            return bad(format!(
                "camera distance range {}–{} must satisfy 0 < lo ≤ hi",
                cam.distance_lo_m, cam.distance_hi_m
            ));
        }
        if !(cam.focal_length.is_finite() && cam.focal_length > 0.0) {
            return bad(format!("focal_length_px must be positive, got {}", cam.focal_length));
        }
        if !cam.principal_point.iter().all(|v| v.is_finite()) {
            return bad("principal_point_px must be finite".into());
        }
        Ok(())
    }

    pub fn optimizer_config(&self) -> AdamWConfig {
        AdamWConfig {
            learning_rate: self.learning_rate,
            weight_decay: self.weight_decay,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
        }
    }

    pub fn experiment_config(&self, jobs: usize) -> ExperimentConfig {
        ExperimentConfig {
            timesteps: self.timesteps.clone(),
            dimensionalities: self.dimensionalities.clone(),
            k_folds: self.k_folds,
            validation_fraction: self.validation_fraction,
            hidden_size: self.hidden_size,
            optimizer: self.optimizer_config(),
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            patience: self.patience,
            master_seed: self.master_seed,
            jobs,
        }
    }
}

fn parse_with_context(text: &str, ctx: &str) -> Result<Config> {
    let mut config = Config::default();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "{ctx}:{lineno}: expected `key = value`, found {line:?}"
            )));
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("{ctx}:{lineno}: missing key")));
        }
        if value.is_empty() {
            return Err(Error::Config(format!(
                "{ctx}:{lineno}: missing value for {key}"
            )));
        }
        if !seen.insert(key.to_string()) {
            return Err(Error::Config(format!(
                "{ctx}:{lineno}: duplicate key {key}"
            )));
        }
        config
            .apply(key, value)
            .map_err(|e| Error::Config(format!("{ctx}:{lineno}: {e}")))?;
    }
    config
        .validate()
        .map_err(|e| Error::Config(format!("{ctx}: {e}")))?;
    Ok(config)
}

/// Parses configuration text; defaults fill in anything not set.
pub fn parse_config(text: &str) -> Result<Config> {
    parse_with_context(text, "config")
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_with_context(&text, &path.display().to_string())
}

/// Restriction of the experiment grid, e.g.
/// `groups=0-90,180-270;timesteps=10,30;dims=3d`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridSubset {
    pub groups: Option<Vec<(f64, f64)>>,
    pub timesteps: Option<Vec<usize>>,
    pub dimensionalities: Option<Vec<Dimensionality>>,
}

impl GridSubset {
    pub fn parse(spec: &str) -> Result<Self> {
        let mut subset = GridSubset::default();
        for clause in spec.split(';') {
            let clause = clause.trim();
            if clause.is_empty() {
                continue;
            }
            let Some((key, value)) = clause.split_once('=') else {
                return Err(Error::Config(format!(
                    "grid subset clause {clause:?} is not `name=values`"
                )));
            };
            match key.trim() {
                "groups" => {
                    if subset.groups.is_some() {
                        return Err(Error::Config("grid subset repeats `groups`".into()));
                    }
                    let mut groups = Vec::new();
                    for item in value.split(',').map(str::trim) {
                        let Some((lo, hi)) = item.split_once('-') else {
                            return Err(Error::Config(format!(
                                "grid subset group {item:?} is not `lo-hi`"
                            )));
                        };
                        let lo: f64 = parse_scalar("groups", lo.trim())?;
                        let hi: f64 = parse_scalar("groups", hi.trim())?;
                        groups.push((lo, hi));
                    }
                    subset.groups = Some(groups);
                }
                "timesteps" => {
                    if subset.timesteps.is_some() {
                        return Err(Error::Config("grid subset repeats `timesteps`".into()));
                    }
                    subset.timesteps = Some(parse_list("timesteps", value.trim())?);
                }
                "dims" => {
                    if subset.dimensionalities.is_some() {
                        return Err(Error::Config("grid subset repeats `dims`".into()));
                    }
                    subset.dimensionalities = Some(parse_dims("dims", value.trim())?);
                }
                other => {
                    return Err(Error::Config(format!(
                        "unknown grid subset clause {other:?} (expected groups, timesteps, or dims)"
                    )))
                }
            }
        }
        Ok(subset)
    }

    /// Keeps the configured groups selected by the subset; every selected
    /// group must exist in the configured grid.
    pub fn filter_groups(&self, all: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
        match &self.groups {
            None => Ok(all.to_vec()),
            Some(wanted) => {
                let mut out = Vec::new();
                for &(lo, hi) in wanted {
                    let found = all
                        .iter()
                        .find(|(alo, ahi)| (alo - lo).abs() <= 1e-9 && (ahi - hi).abs() <= 1e-9);
                    match found {
                        Some(&g) => out.push(g),
                        None => {
                            return Err(Error::Config(format!(
                                "grid subset group {lo}-{hi} is not part of the configured grid"
                            )))
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn filter_timesteps(&self, all: &[usize]) -> Result<Vec<usize>> {
        match &self.timesteps {
            None => Ok(all.to_vec()),
            Some(wanted) => {
                for t in wanted {
                    if !all.contains(t) {
                        return Err(Error::Config(format!(
                            "grid subset timestep {t} is not part of the configured grid"
                        )));
                    }
                }
                Ok(wanted.clone())
            }
        }
    }

    pub fn filter_dims(&self, all: &[Dimensionality]) -> Result<Vec<Dimensionality>> {
        match &self.dimensionalities {
            None => Ok(all.to_vec()),
            Some(wanted) => {
                for d in wanted {
                    if !all.contains(d) {
                        return Err(Error::Config(format!(
                            "grid subset dimensionality {} is not part of the configured grid",
                            d.as_str()
                        )));
                    }
                }
                Ok(wanted.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_yields_defaults() {
        let config = parse_config("").unwrap();
        assert_eq!(config, Config::default());
        config.validate().unwrap();
    }

    #[test]
    fn comments_blanks_and_overrides_parse() {
        let text = "\
# run setup
master_seed = 7

timesteps = 10, 30   # two window lengths
dimensionalities = 3d
fps = 30
";
        let config = parse_config(text).unwrap();
        assert_eq!(config.master_seed, 7);
        assert_eq!(config.timesteps, vec![10, 30]);
        assert_eq!(config.dimensionalities, vec![Dimensionality::ThreeD]);
        assert_eq!(config.fps, 30);
        // Untouched keys keep their defaults.
        assert_eq!(config.k_folds, 5);
    }

    #[test]
    fn unknown_duplicate_and_malformed_keys_are_rejected() {
        for (text, needle) in [
            ("no_such_key = 1", "unknown configuration key"),
            ("fps = 25\nfps = 30", "duplicate key"),
            ("fps : 25", "expected `key = value`"),
            ("fps =", "missing value"),
            ("fps = abc", "invalid value"),
            ("timesteps = 5,,10", "empty element"),
        ] {
            let err = parse_config(text).unwrap_err();
            assert_eq!(err.category(), "config", "{text}");
            assert!(err.to_string().contains(needle), "{text}: {err}");
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_config("fps = 25\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }

    #[test]
    fn default_angle_groups_cover_full_circle_twice() {
        let groups = Config::default().angle_groups().unwrap();
        assert_eq!(groups.len(), 4 + 8);
        assert_eq!(groups[0], (0.0, 90.0));
        assert_eq!(groups[3], (270.0, 360.0));
        assert_eq!(groups[4], (0.0, 45.0));
        assert_eq!(groups[11], (315.0, 360.0));
        for &(lo, hi) in &groups {
            assert!(lo < hi && hi <= 360.0);
        }
    }

    #[test]
    fn non_dividing_span_is_rejected() {
        let err = parse_config("angle_spans_deg = 50").unwrap_err();
        assert!(err.to_string().contains("does not evenly divide"), "{err}");
        // Fractional spans that do divide are fine: 22.5 × 16 = 360.
        let config = parse_config("angle_spans_deg = 22.5").unwrap();
        assert_eq!(config.angle_groups().unwrap().len(), 16);
    }

    #[test]
    fn validation_rejects_out_of_range_values() {
        for text in [
            "k_folds = 1",
            "videos_per_class = 3", // < k_folds
            "validation_fraction = 1.0",
            "timesteps = 0",
            "timesteps = 500", // > 175 frames
            "timesteps = 5,5",
            "batch_size = 0",
            "patience = 0",
            "learning_rate = 0",
            "adam_beta1 = 1.0",
            "phase_jitter = 0.5",
            "elevation_lo_deg = 30\nelevation_hi_deg = 10",
            "distance_lo_m = 0",
            "duration_s = 0",
        ] {
            let err = parse_config(text).unwrap_err();
            assert_eq!(err.category(), "config", "{text} should fail");
        }
    }

    #[test]
    fn key_value_snapshot_round_trips() {
        let mut config = Config::default();
        config.master_seed = 123;
        config.simulator.gait.step_length_m = 0.3;
        config.timesteps = vec![10, 30];
        let text: String = config
            .to_key_values()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        let back = parse_config(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn frames_per_video_rounds_to_nearest() {
        let mut config = Config::default();
        assert_eq!(config.frames_per_video(), 175);
        config.duration_s = 0.99;
        config.fps = 25;
        assert_eq!(config.frames_per_video(), 25); // 24.75 rounds up
    }

    #[test]
    fn grid_subset_parses_and_filters() {
        let subset = GridSubset::parse("groups=0-90,180-270;timesteps=10,30;dims=3d").unwrap();
        let config = Config::default();
        let groups = subset.filter_groups(&config.angle_groups().unwrap()).unwrap();
        assert_eq!(groups, vec![(0.0, 90.0), (180.0, 270.0)]);
        let ts = subset.filter_timesteps(&config.timesteps).unwrap();
        assert_eq!(ts, vec![10, 30]);
        let dims = subset.filter_dims(&config.dimensionalities).unwrap();
        assert_eq!(dims, vec![Dimensionality::ThreeD]);
    }

    #[test]
    fn grid_subset_rejects_items_outside_grid() {
        let config = Config::default();
        let subset = GridSubset::parse("groups=10-20").unwrap();
        assert!(subset.filter_groups(&config.angle_groups().unwrap()).is_err());
        let subset = GridSubset::parse("timesteps=7").unwrap();
        assert!(subset.filter_timesteps(&config.timesteps).is_err());
        assert!(GridSubset::parse("windows=5").is_err());
        assert!(GridSubset::parse("groups=0:90").is_err());
        assert!(GridSubset::parse("timesteps=1;timesteps=2").is_err());
    }

    #[test]
    fn empty_subset_keeps_everything() {
        let subset = GridSubset::parse("").unwrap();
        let config = Config::default();
        assert_eq!(
            subset.filter_groups(&config.angle_groups().unwrap()).unwrap().len(),
            12
        );
        assert_eq!(subset.filter_timesteps(&config.timesteps).unwrap().len(), 4);
        assert_eq!(subset.filter_dims(&config.dimensionalities).unwrap().len(), 2);
    }
}
