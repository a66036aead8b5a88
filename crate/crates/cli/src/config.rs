//! TOML config schemas for the subcommands. Field names are the documented
//! grammar; unknown keys are rejected so typos fail loudly.

use hypermsg_core::bp::CheckUpdate;
use hypermsg_core::gin::Family;
use hypermsg_core::harness::{worker_count, SweepConfig};
use hypermsg_core::train::{LossNorm, TrainConfig};
use serde::Deserialize;

fn default_check() -> String {
    "exact".to_string()
}

/// `sweep` config.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepToml {
    pub code: String,
    pub snr_points_db: Vec<f64>,
    /// Variant names: uncoded | plain | weighted | hyper | hyper_damped.
    pub variants: Vec<String>,
    #[serde(default)]
    pub max_frames: Option<usize>,
    #[serde(default)]
    pub min_bit_errors: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub round_frames: Option<usize>,
    /// Checkpoint for the learned variants.
    #[serde(default)]
    pub checkpoint: Option<String>,
}

impl SweepToml {
    pub fn into_parts(self) -> Result<(SweepConfig, Vec<String>, Option<String>), String> {
        let cfg = SweepConfig {
            code: self.code,
            snr_points_db: self.snr_points_db,
            max_frames: self.max_frames.unwrap_or(100_000),
            min_bit_errors: self.min_bit_errors.unwrap_or(100),
            seed: self.seed.unwrap_or(1),
            iterations: self.iterations.unwrap_or(5),
            round_frames: self.round_frames.unwrap_or(512),
            threads: worker_count(),
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok((cfg, self.variants, self.checkpoint))
    }
}

/// `train` config.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainToml {
    pub code: String,
    /// weighted | hyper | hyper_damped.
    pub variant: String,
    #[serde(default = "default_check")]
    pub check_update: String,
    #[serde(default)]
    pub lr: Option<f64>,
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub snr_range_db: Option<[f64; 2]>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub gradient_clip_norm: Option<f64>,
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub eval_every: Option<usize>,
    #[serde(default)]
    pub eval_frames: Option<usize>,
    /// per_bit | per_frame.
    #[serde(default)]
    pub loss_norm: Option<String>,
    /// Mimic pretraining steps for the hyper variants.
    #[serde(default)]
    pub mimic_steps: Option<usize>,
    /// Hidden widths of the weight generator (hyper variants).
    #[serde(default)]
    pub f_hidden: Option<Vec<usize>>,
    /// Hidden widths of the message network (hyper variants).
    #[serde(default)]
    pub g_hidden: Option<Vec<usize>>,
}

impl TrainToml {
    pub fn check_update(&self) -> Result<CheckUpdate, String> {
        CheckUpdate::parse(&self.check_update)
            .ok_or_else(|| format!("bad check_update {:?} (exact | taylor:<q>)", self.check_update))
    }

    pub fn f_hidden(&self) -> Vec<usize> {
        self.f_hidden.clone().unwrap_or_else(|| vec![16, 16, 16])
    }

    pub fn g_hidden(&self) -> Vec<usize> {
        self.g_hidden.clone().unwrap_or_else(|| vec![12])
    }

    pub fn train_config(&self) -> Result<TrainConfig, String> {
        let loss_norm = match self.loss_norm.as_deref() {
            None | Some("per_bit") => LossNorm::PerBit,
            Some("per_frame") => LossNorm::PerFrame,
            Some(other) => return Err(format!("bad loss_norm {other:?}")),
        };
        let defaults = TrainConfig::default();
        Ok(TrainConfig {
            lr: self.lr.unwrap_or(defaults.lr),
            batch_size: self.batch_size.unwrap_or(defaults.batch_size),
            steps: self.steps.unwrap_or(defaults.steps),
            snr_range_db: self
                .snr_range_db
                .map(|[lo, hi]| (lo, hi))
                .unwrap_or(defaults.snr_range_db),
            seed: self.seed.unwrap_or(0),
            gradient_clip_norm: self.gradient_clip_norm,
            iterations: self.iterations.unwrap_or(defaults.iterations),
            eval_every: self.eval_every.unwrap_or(defaults.eval_every),
            eval_frames: self.eval_frames.unwrap_or(defaults.eval_frames),
            loss_norm,
            threads: worker_count(),
        })
    }
}

/// `compare` config.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareToml {
    pub code: String,
    pub snr_points_db: Vec<f64>,
    pub variant_a: String,
    pub variant_b: String,
    pub frames_per_point: usize,
    #[serde(default = "default_check")]
    pub check_update: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub checkpoint_a: Option<String>,
    #[serde(default)]
    pub checkpoint_b: Option<String>,
}

impl CompareToml {
    pub fn check_update(&self) -> Result<CheckUpdate, String> {
        CheckUpdate::parse(&self.check_update)
            .ok_or_else(|| format!("bad check_update {:?}", self.check_update))
    }

    pub fn sweep_config(&self) -> Result<SweepConfig, String> {
        let cfg = SweepConfig {
            code: self.code.clone(),
            snr_points_db: self.snr_points_db.clone(),
            max_frames: self.frames_per_point.max(1),
            min_bit_errors: 1,
            seed: self.seed.unwrap_or(1),
            iterations: self.iterations.unwrap_or(5),
            round_frames: 512,
            threads: worker_count(),
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

/// `gin-train` / `gin-eval` config.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GinToml {
    /// cycle-vs-path | triangle-count-parity | density-pair.
    pub family: String,
    pub sizes: Vec<usize>,
    /// Dataset generation seed.
    #[serde(default)]
    pub data_seed: Option<u64>,
    /// plain | hyper (default hyper).
    #[serde(default)]
    pub variant: Option<String>,
    #[serde(default)]
    pub hidden: Option<usize>,
    #[serde(default)]
    pub k_iters: Option<usize>,
    #[serde(default)]
    pub lr: Option<f64>,
    #[serde(default)]
    pub epochs: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Restart budget in seconds.
    #[serde(default)]
    pub budget_secs: Option<u64>,
}

impl GinToml {
    pub fn dataset_parts(&self) -> Result<(Family, Vec<usize>, u64), String> {
        let family = Family::parse(&self.family)
            .ok_or_else(|| format!("unknown task family {:?}", self.family))?;
        if self.sizes.is_empty() {
            return Err("sizes must be nonempty".to_string());
        }
        Ok((family, self.sizes.clone(), self.data_seed.unwrap_or(1)))
    }
}
