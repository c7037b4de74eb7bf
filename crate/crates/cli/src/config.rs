//! Run configuration: one JSON document, every section optional, unknown
//! keys rejected.

use std::fs;
use std::path::{Path, PathBuf};

use pairplan_core::view_graph::{
    default_offsets, Decay, DirectionMode, ImportanceParams, PairingProblem, PerRange, DEFAULT_ALPHA, DEFAULT_BETA,
    DEFAULT_DEGREE_BUDGET, DEFAULT_LOCAL_MAX, DEFAULT_TAU, DEFAULT_W_MIN,
};
use pairplan_core::wavelet::{Band, BandLossSpec, FilterKind, PerBand, DEFAULT_LAMBDA, DEFAULT_LEVELS};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    Gaps,
    Complete,
    Oneref,
    Cosine,
    Window,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Gaps => "gaps",
            Strategy::Complete => "complete",
            Strategy::Oneref => "oneref",
            Strategy::Cosine => "cosine",
            Strategy::Window => "window",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapsConfig {
    /// Chord offsets; powers of two up to `n / 2` when absent.
    pub offsets: Option<Vec<usize>>,
    pub decay: Decay,
    pub tau: f64,
    pub alpha: PerRange,
    pub beta: PerRange,
    pub local_max: usize,
    /// `max(ceil(n / 4), local_max + 1)` when absent.
    pub medium_max: Option<usize>,
    pub w_min: f64,
    pub degree_budget: usize,
    pub keep_ring: bool,
}

impl Default for GapsConfig {
    fn default() -> Self {
        Self {
            offsets: None,
            decay: Decay::Exp,
            tau: DEFAULT_TAU,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            local_max: DEFAULT_LOCAL_MAX,
            medium_max: None,
            w_min: DEFAULT_W_MIN,
            degree_budget: DEFAULT_DEGREE_BUDGET,
            keep_ring: true,
        }
    }
}

impl GapsConfig {
    pub fn params(&self, n: usize) -> ImportanceParams {
        ImportanceParams {
            decay: self.decay,
            tau: self.tau,
            alpha: self.alpha,
            beta: self.beta,
            w_min: self.w_min,
            local_max: self.local_max,
            medium_max: self.medium_max.unwrap_or_else(|| n.div_ceil(4).max(self.local_max + 1)),
        }
    }

    pub fn problem(&self, n: usize) -> Result<PairingProblem> {
        let offsets = self.offsets.clone().unwrap_or_else(|| default_offsets(n));
        let problem = PairingProblem::new(n, offsets, self.params(n), self.degree_budget)?;
        Ok(problem.keep_ring(self.keep_ring))
    }

    fn validate(&self) -> Result<()> {
        if let Some(offsets) = &self.offsets {
            if offsets.is_empty() || offsets.contains(&0) {
                return invalid("gaps.offsets must be a non-empty list of positive offsets");
            }
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return invalid(format!("gaps.tau must be positive, got {}", self.tau));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if ![v.local, v.medium, v.long].iter().all(|x| x.is_finite()) {
                return invalid(format!("gaps.{name} must be finite"));
            }
        }
        if self.local_max == 0 {
            return invalid("gaps.local_max must be at least 1");
        }
        if let Some(m) = self.medium_max {
            if m <= self.local_max {
                return invalid(format!(
                    "gaps.medium_max ({m}) must exceed gaps.local_max ({})",
                    self.local_max
                ));
            }
        }
        if !(self.w_min >= 0.0 && self.w_min.is_finite()) {
            return invalid(format!("gaps.w_min must be non-negative, got {}", self.w_min));
        }
        if self.degree_budget == 0 {
            return invalid("gaps.degree_budget must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OnerefConfig {
    /// Reference view; `n / 2` when absent.
    pub reference: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    pub window: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { window: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CosineConfig {
    pub k_nearest: usize,
    pub sim_min: f64,
}

impl Default for CosineConfig {
    fn default() -> Self {
        Self {
            k_nearest: 2,
            sim_min: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    pub per_pair_mb: f64,
    pub base_mb: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            per_pair_mb: 100.0,
            base_mb: 2000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveletConfig {
    pub filter: FilterKind,
    pub levels: usize,
    pub lambda: PerBand<f64>,
    pub photometric_weight: f64,
    pub wavelet_weight: f64,
}

impl Default for WaveletConfig {
    fn default() -> Self {
        Self {
            filter: FilterKind::Haar,
            levels: DEFAULT_LEVELS,
            lambda: DEFAULT_LAMBDA,
            photometric_weight: 1.0,
            wavelet_weight: 1.0,
        }
    }
}

impl WaveletConfig {
    pub fn spec(&self) -> BandLossSpec {
        BandLossSpec {
            lambda: self.lambda,
            levels: self.levels,
            filter: self.filter,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return invalid("wavelet.levels must be at least 1");
        }
        for band in Band::ALL {
            let v = self.lambda.get(band);
            if !(v >= 0.0 && v.is_finite()) {
                return invalid(format!(
                    "wavelet.lambda.{} must be non-negative, got {v}",
                    band.as_str()
                ));
            }
        }
        for (name, v) in [
            ("photometric_weight", self.photometric_weight),
            ("wavelet_weight", self.wavelet_weight),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return invalid(format!("wavelet.{name} must be non-negative, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub preset: String,
    pub seed: u64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            preset: "arch".to_string(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub strategy: Strategy,
    pub mode: DirectionMode,
    pub views_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub gaps: GapsConfig,
    pub oneref: OnerefConfig,
    pub window: WindowConfig,
    pub cosine: CosineConfig,
    pub cost: CostConfig,
    pub wavelet: WaveletConfig,
    pub render: RenderConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        let config: Self = serde_json::from_str(&text).map_err(|source| CliError::Config {
            path: path.to_path_buf(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Checks every parameter that does not depend on the view count.
    pub fn validate(&self) -> Result<()> {
        self.gaps.validate()?;
        self.wavelet.validate()?;
        if self.window.window == 0 {
            return invalid("window.window must be at least 1");
        }
        if self.cosine.k_nearest == 0 {
            return invalid("cosine.k_nearest must be at least 1");
        }
        if !(-1.0..=1.0).contains(&self.cosine.sim_min) {
            return invalid(format!(
                "cosine.sim_min must lie in [-1, 1], got {}",
                self.cosine.sim_min
            ));
        }
        if !(self.cost.per_pair_mb > 0.0 && self.cost.per_pair_mb.is_finite()) {
            return invalid(format!(
                "cost.per_pair_mb must be positive, got {}",
                self.cost.per_pair_mb
            ));
        }
        if !(self.cost.base_mb >= 0.0 && self.cost.base_mb.is_finite()) {
            return invalid(format!("cost.base_mb must be non-negative, got {}", self.cost.base_mb));
        }
        Ok(())
    }
}
