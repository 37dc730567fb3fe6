//! Experiment configuration: a strict TOML schema with per-profile
//! defaults. Unknown keys are rejected; the resolved configuration is
//! hashed into the run manifest.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use nbvlab::features::FeatureParams;
use nbvlab::policy::{ReconPipeline, TerminationCriteria, MPS_PER_4_MPH};
use nbvlab::scenes::Category;
use nbvlab::vin::{TrainConfig, VinProfile};

use crate::error::{CliError, CliResult};

/// Fully resolved experiment configuration. Every field is concrete so the
/// config hash pins the entire run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// "desk" (laptop-scale) or "paper" (full-scale shapes).
    pub profile: String,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub scenes: ScenesConfig,
    pub catalog: CatalogConfig,
    pub recon: ReconConfig,
    pub features: FeaturesConfig,
    pub vin: VinConfig,
    pub labels: LabelsConfig,
    pub rollout: RolloutConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenesConfig {
    /// Cycled over scene indices.
    pub categories: Vec<String>,
    pub train_count: usize,
    pub train_seed_start: u64,
    pub eval_count: usize,
    pub eval_seed_start: u64,
    /// Bounding-box diagonal of every generated object, meters.
    pub target_size_m: f64,
    /// Ground-truth surface samples per scene.
    pub gt_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogConfig {
    pub per_shell: usize,
    /// Shell radii as multiples of the scene bounding-sphere radius.
    pub shell_factors: [f64; 3],
    pub fov_deg: f64,
    /// Depth-capture resolution (square images).
    pub render_res: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconConfig {
    /// Voxel size as a fraction of the scene target size.
    pub voxel_frac: f64,
    pub normals_k: usize,
    /// Splat radius in pixels at the capture resolution.
    pub radius_px: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeaturesConfig {
    /// Unpooled feature-grid resolution (the scorer consumes grid_res/2).
    pub grid_res: u32,
    pub radius_px_at_128: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VinConfig {
    pub channels: [usize; 4],
    pub hidden: usize,
    pub epochs: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub vis_scale: f32,
    pub depth_scale: f32,
    pub base_scale: f32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelsConfig {
    /// Oracle labels are generated for stages 2..=max_stage.
    pub max_stage: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RolloutConfig {
    pub criteria: Vec<String>,
    pub max_captures: Option<usize>,
    pub time_budget_s: Option<f64>,
    pub min_clearance_m: Option<f64>,
    pub speed_mps: f64,
}

/// Raw on-disk form: every field optional, profile defaults fill the rest.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    profile: Option<String>,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
    workers: Option<usize>,
    #[serde(default)]
    scenes: RawScenes,
    #[serde(default)]
    catalog: RawCatalog,
    #[serde(default)]
    recon: RawRecon,
    #[serde(default)]
    features: RawFeatures,
    #[serde(default)]
    vin: RawVin,
    #[serde(default)]
    labels: RawLabels,
    #[serde(default)]
    rollout: RawRollout,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenes {
    categories: Option<Vec<String>>,
    train_count: Option<usize>,
    train_seed_start: Option<u64>,
    eval_count: Option<usize>,
    eval_seed_start: Option<u64>,
    target_size_m: Option<f64>,
    gt_points: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    per_shell: Option<usize>,
    shell_factors: Option<[f64; 3]>,
    fov_deg: Option<f64>,
    render_res: Option<u32>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecon {
    voxel_frac: Option<f64>,
    normals_k: Option<usize>,
    radius_px: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFeatures {
    grid_res: Option<u32>,
    radius_px_at_128: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVin {
    channels: Option<[usize; 4]>,
    hidden: Option<usize>,
    epochs: Option<usize>,
    lr: Option<f64>,
    weight_decay: Option<f64>,
    vis_scale: Option<f32>,
    depth_scale: Option<f32>,
    base_scale: Option<f32>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLabels {
    max_stage: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRollout {
    criteria: Option<Vec<String>>,
    max_captures: Option<Option<usize>>,
    time_budget_s: Option<Option<f64>>,
    min_clearance_m: Option<Option<f64>>,
    speed_mps: Option<f64>,
}

impl ExperimentConfig {
    /// Laptop-scale defaults: 128² captures, 64² pooled grids, CPU training
    /// over 16 procedural scenes.
    pub fn desk_defaults() -> Self {
        ExperimentConfig {
            profile: "desk".into(),
            seed: 42,
            out_dir: PathBuf::from("runs/desk"),
            workers: 0,
            scenes: ScenesConfig {
                categories: vec!["house".into(), "toy".into(), "creature".into()],
                train_count: 16,
                train_seed_start: 0,
                eval_count: 20,
                eval_seed_start: 1000,
                target_size_m: 14.0,
                gt_points: 8192,
            },
            catalog: CatalogConfig {
                per_shell: 40,
                shell_factors: [1.5, 2.0, 2.5],
                fov_deg: 60.0,
                render_res: 128,
            },
            recon: ReconConfig {
                voxel_frac: 0.01,
                normals_k: 16,
                radius_px: 1.0,
            },
            features: FeaturesConfig {
                grid_res: 128,
                radius_px_at_128: 1.0,
            },
            vin: VinConfig {
                channels: [16, 32, 64, 128],
                hidden: 256,
                epochs: 30,
                lr: 1e-3,
                weight_decay: 0.01,
                vis_scale: 0.125,
                depth_scale: 0.04,
                base_scale: 16.0,
            },
            labels: LabelsConfig { max_stage: 6 },
            rollout: RolloutConfig {
                criteria: vec![
                    "random".into(),
                    "coverage".into(),
                    "oracle".into(),
                    "vin".into(),
                ],
                max_captures: Some(10),
                time_budget_s: None,
                min_clearance_m: None,
                speed_mps: MPS_PER_4_MPH,
            },
        }
    }

    /// Full-scale shapes: 512² grids and the published training length.
    /// Orders of magnitude heavier than the desk profile.
    pub fn paper_defaults() -> Self {
        let mut cfg = Self::desk_defaults();
        cfg.profile = "paper".into();
        cfg.out_dir = PathBuf::from("runs/paper");
        cfg.catalog.render_res = 512;
        cfg.features.grid_res = 512;
        cfg.vin.channels = [32, 64, 128, 256];
        cfg.vin.epochs = 60;
        cfg.scenes.train_count = 40;
        cfg
    }

    pub fn defaults_for(profile: &str) -> CliResult<Self> {
        match profile {
            "desk" => Ok(Self::desk_defaults()),
            "paper" => Ok(Self::paper_defaults()),
            other => Err(CliError::Config(format!(
                "unknown profile '{other}' (expected desk|paper)"
            ))),
        }
    }

    /// Loads a TOML file (empty path → pure profile defaults), applying
    /// profile defaults for absent keys and rejecting unknown ones.
    pub fn load(path: Option<&Path>, profile_flag: Option<&str>) -> CliResult<Self> {
        let raw: RawConfig = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::io(p.display().to_string(), e))?;
                toml::from_str(&text).map_err(|e| CliError::Config(format!("{p:?}: {e}")))?
            }
            None => RawConfig::default(),
        };
        let profile = profile_flag
            .map(str::to_string)
            .or(raw.profile.clone())
            .unwrap_or_else(|| "desk".into());
        let mut cfg = Self::defaults_for(&profile)?;
        cfg.apply(raw);
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, raw: RawConfig) {
        if let Some(v) = raw.seed {
            self.seed = v;
        }
        if let Some(v) = raw.out_dir {
            self.out_dir = v;
        }
        if let Some(v) = raw.workers {
            self.workers = v;
        }
        let s = raw.scenes;
        set(&mut self.scenes.categories, s.categories);
        set(&mut self.scenes.train_count, s.train_count);
        set(&mut self.scenes.train_seed_start, s.train_seed_start);
        set(&mut self.scenes.eval_count, s.eval_count);
        set(&mut self.scenes.eval_seed_start, s.eval_seed_start);
        set(&mut self.scenes.target_size_m, s.target_size_m);
        set(&mut self.scenes.gt_points, s.gt_points);
        let c = raw.catalog;
        set(&mut self.catalog.per_shell, c.per_shell);
        set(&mut self.catalog.shell_factors, c.shell_factors);
        set(&mut self.catalog.fov_deg, c.fov_deg);
        set(&mut self.catalog.render_res, c.render_res);
        let r = raw.recon;
        set(&mut self.recon.voxel_frac, r.voxel_frac);
        set(&mut self.recon.normals_k, r.normals_k);
        set(&mut self.recon.radius_px, r.radius_px);
        let f = raw.features;
        set(&mut self.features.grid_res, f.grid_res);
        set(&mut self.features.radius_px_at_128, f.radius_px_at_128);
        let v = raw.vin;
        set(&mut self.vin.channels, v.channels);
        set(&mut self.vin.hidden, v.hidden);
        set(&mut self.vin.epochs, v.epochs);
        set(&mut self.vin.lr, v.lr);
        set(&mut self.vin.weight_decay, v.weight_decay);
        set(&mut self.vin.vis_scale, v.vis_scale);
        set(&mut self.vin.depth_scale, v.depth_scale);
        set(&mut self.vin.base_scale, v.base_scale);
        set(&mut self.labels.max_stage, raw.labels.max_stage);
        let ro = raw.rollout;
        set(&mut self.rollout.criteria, ro.criteria);
        set(&mut self.rollout.max_captures, ro.max_captures);
        set(&mut self.rollout.time_budget_s, ro.time_budget_s);
        set(&mut self.rollout.min_clearance_m, ro.min_clearance_m);
        set(&mut self.rollout.speed_mps, ro.speed_mps);
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.profile != "desk" && self.profile != "paper" {
            return Err(CliError::Config(format!("unknown profile '{}'", self.profile)));
        }
        if self.scenes.categories.is_empty() {
            return Err(CliError::Config("scenes.categories is empty".into()));
        }
        for c in &self.scenes.categories {
            Category::from_str(c).map_err(|e| CliError::Config(e.to_string()))?;
        }
        if self.scenes.train_count == 0 || self.scenes.eval_count == 0 {
            return Err(CliError::Config("scene counts must be >= 1".into()));
        }
        if !(self.scenes.target_size_m > 0.0) {
            return Err(CliError::Config("target_size_m must be > 0".into()));
        }
        if self.scenes.gt_points == 0 {
            return Err(CliError::Config("gt_points must be >= 1".into()));
        }
        let [a, b, c] = self.catalog.shell_factors;
        if !(a > 0.0 && a < b && b < c) {
            return Err(CliError::Config(format!(
                "shell_factors {:?} must be positive and strictly increasing",
                self.catalog.shell_factors
            )));
        }
        if self.catalog.per_shell == 0 {
            return Err(CliError::Config("per_shell must be >= 1".into()));
        }
        if 3 * self.catalog.per_shell < 3 {
            return Err(CliError::Config("catalog too small".into()));
        }
        if self.features.grid_res < 16 || self.features.grid_res % 2 != 0 {
            return Err(CliError::Config(format!(
                "grid_res {} must be even and >= 16",
                self.features.grid_res
            )));
        }
        if !(self.recon.voxel_frac > 0.0) {
            return Err(CliError::Config("voxel_frac must be > 0".into()));
        }
        if self.vin.epochs == 0 {
            return Err(CliError::Config("vin.epochs must be >= 1".into()));
        }
        if self.labels.max_stage < 2 {
            return Err(CliError::Config("labels.max_stage must be >= 2".into()));
        }
        if self.labels.max_stage >= 3 * self.catalog.per_shell {
            return Err(CliError::Config(
                "labels.max_stage exceeds the catalog size".into(),
            ));
        }
        if self.rollout.criteria.is_empty() {
            return Err(CliError::Config("rollout.criteria is empty".into()));
        }
        for c in &self.rollout.criteria {
            if !matches!(c.as_str(), "random" | "coverage" | "oracle" | "vin") {
                return Err(CliError::Config(format!("unknown criterion '{c}'")));
            }
        }
        if self.rollout.max_captures.is_none() && self.rollout.time_budget_s.is_none() {
            return Err(CliError::Config(
                "set rollout.max_captures and/or rollout.time_budget_s".into(),
            ));
        }
        if !(self.rollout.speed_mps > 0.0) {
            return Err(CliError::Config("speed_mps must be > 0".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical (resolved) TOML serialization.
    pub fn hash(&self) -> String {
        let canon = toml::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canon.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn categories(&self) -> Vec<Category> {
        self.scenes
            .categories
            .iter()
            .map(|c| Category::from_str(c).expect("validated"))
            .collect()
    }

    pub fn recon_pipeline(&self) -> ReconPipeline {
        ReconPipeline {
            voxel_size: self.recon.voxel_frac * self.scenes.target_size_m,
            normals_k: self.recon.normals_k,
            radius_px: self.recon.radius_px,
        }
    }

    pub fn feature_params(&self) -> FeatureParams {
        FeatureParams {
            grid_res: self.features.grid_res,
            radius_px_at_128: self.features.radius_px_at_128,
        }
    }

    pub fn vin_profile(&self) -> VinProfile {
        VinProfile {
            id: self.profile.clone(),
            pooled_res: self.features.grid_res / 2,
            grid_res: self.features.grid_res,
            conv_channels: self.vin.channels,
            hidden: self.vin.hidden,
            vis_scale: self.vin.vis_scale,
            depth_scale: self.vin.depth_scale,
            base_scale: self.vin.base_scale,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.vin.epochs,
            lr: self.vin.lr,
            weight_decay: self.vin.weight_decay,
            seed: self.seed,
        }
    }

    pub fn termination(&self) -> TerminationCriteria {
        TerminationCriteria {
            max_captures: self.rollout.max_captures,
            time_budget: self.rollout.time_budget_s,
            speed: self.rollout.speed_mps,
            min_clearance: self.rollout.min_clearance_m,
        }
    }
}

fn set<T>(dst: &mut T, src: Option<T>) {
    if let Some(v) = src {
        *dst = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_hash_stably() {
        let cfg = ExperimentConfig::desk_defaults();
        cfg.validate().unwrap();
        assert_eq!(cfg.hash(), cfg.hash());
        let paper = ExperimentConfig::paper_defaults();
        paper.validate().unwrap();
        assert_ne!(cfg.hash(), paper.hash());
    }

    #[test]
    fn hash_changes_iff_any_field_changes() {
        let base = ExperimentConfig::desk_defaults();
        let mut c = base.clone();
        c.seed += 1;
        assert_ne!(base.hash(), c.hash());
        let mut c = base.clone();
        c.vin.lr *= 2.0;
        assert_ne!(base.hash(), c.hash());
        let mut c = base.clone();
        c.rollout.time_budget_s = Some(15.0);
        assert_ne!(base.hash(), c.hash());
        let same = base.clone();
        assert_eq!(base.hash(), same.hash());
    }

    #[test]
    fn toml_overrides_and_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(
            &path,
            "seed = 7\n[scenes]\ntrain_count = 3\n[vin]\nepochs = 2\n",
        )
        .unwrap();
        let cfg = ExperimentConfig::load(Some(&path), None).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.scenes.train_count, 3);
        assert_eq!(cfg.vin.epochs, 2);
        // Untouched fields keep profile defaults.
        assert_eq!(cfg.catalog.per_shell, 40);

        std::fs::write(&path, "nonsense_key = 1\n").unwrap();
        assert!(matches!(
            ExperimentConfig::load(Some(&path), None),
            Err(CliError::Config(_))
        ));
        std::fs::write(&path, "[scenes]\nbogus = 2\n").unwrap();
        assert!(matches!(
            ExperimentConfig::load(Some(&path), None),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut cfg = ExperimentConfig::desk_defaults();
        cfg.scenes.categories = vec!["castle".into()];
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::desk_defaults();
        cfg.catalog.shell_factors = [2.0, 2.0, 3.0];
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::desk_defaults();
        cfg.rollout.max_captures = None;
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::desk_defaults();
        cfg.rollout.criteria = vec!["alien".into()];
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::desk_defaults();
        cfg.features.grid_res = 33;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn profile_flag_overrides_file_profile() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "profile = \"desk\"\n").unwrap();
        let cfg = ExperimentConfig::load(Some(&path), Some("paper")).unwrap();
        assert_eq!(cfg.profile, "paper");
        assert_eq!(cfg.features.grid_res, 512);
    }
}
