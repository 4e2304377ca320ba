use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::allocator::{AllocationConfig, Variant};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::spectral::cluster_count;
use crate::topology::{DEFAULT_RADIUS_M, DEFAULT_UAV_ALTITUDE_M};

/// One variant or several.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VariantSelection {
    One(Variant),
    Many(Vec<Variant>),
}

impl VariantSelection {
    /// Distinct variants in canonical order.
    pub fn variants(&self) -> Vec<Variant> {
        let mut v = match self {
            VariantSelection::One(v) => vec![*v],
            VariantSelection::Many(v) => v.clone(),
        };
        v.sort();
        v.dedup();
        v
    }
}

impl Default for VariantSelection {
    fn default() -> Self {
        VariantSelection::One(Variant::Spectral)
    }
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let ratio = (hi / lo).ln() / (count - 1) as f64;
            (0..count)
                .map(|i| {
                    if i + 1 == count {
                        hi
                    } else {
                        lo * (ratio * i as f64).exp()
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_users_list: Vec<usize>,
    pub r_req_sweep_bps: Vec<f64>,
    pub n_drops: usize,
    pub base_seed: u64,
    pub radius_m: f64,
    pub uav_altitude_m: f64,
    pub channel: ChannelParams,
    pub allocation: AllocationConfig,
    pub variant: VariantSelection,
    pub output_path: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_users_list: vec![16, 32, 64],
            r_req_sweep_bps: log_space(1e5, 4e6, 16),
            n_drops: 100,
            base_seed: 0,
            radius_m: DEFAULT_RADIUS_M,
            uav_altitude_m: DEFAULT_UAV_ALTITUDE_M,
            channel: ChannelParams::default(),
            allocation: AllocationConfig::default(),
            variant: VariantSelection::default(),
            output_path: None,
        }
    }
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn variants(&self) -> Vec<Variant> {
        self.variant.variants()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_drops == 0 {
            return Err(invalid("n_drops", "must be >= 1"));
        }
        if self.n_users_list.is_empty() {
            return Err(invalid("n_users_list", "must not be empty"));
        }
        if let Some(i) = self.n_users_list.iter().position(|&n| n == 0) {
            return Err(invalid(
                format!("n_users_list[{i}]"),
                "user counts must be >= 1",
            ));
        }
        if self.r_req_sweep_bps.is_empty() {
            return Err(invalid("r_req_sweep_bps", "must not be empty"));
        }
        for (i, r) in self.r_req_sweep_bps.iter().enumerate() {
            if !(r.is_finite() && *r >= 0.0) {
                return Err(invalid(
                    format!("r_req_sweep_bps[{i}]"),
                    format!("must be finite and >= 0, got {r}"),
                ));
            }
        }
        if let Some(i) = self.r_req_sweep_bps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(invalid(
                format!("r_req_sweep_bps[{}]", i + 1),
                "sweep values must be strictly increasing",
            ));
        }
        for (name, v) in [
            ("radius_m", self.radius_m),
            ("uav_altitude_m", self.uav_altitude_m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        self.channel
            .validate()
            .map_err(|(f, m)| invalid(format!("channel.{f}"), m))?;
        self.allocation
            .validate()
            .map_err(|(f, m)| invalid(format!("allocation.{f}"), m))?;
        let variants = self.variants();
        if variants.is_empty() {
            return Err(invalid("variant", "select at least one variant"));
        }
        if variants.iter().any(|v| *v != Variant::Oma) {
            for (i, &n) in self.n_users_list.iter().enumerate() {
                let k = cluster_count(n, self.allocation.max_group_size);
                if k > self.channel.n_subcarriers {
                    return Err(invalid(
                        format!("n_users_list[{i}]"),
                        format!(
                            "{n} users need {k} groups but only {} subcarriers exist",
                            self.channel.n_subcarriers
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Parses a JSON document; missing keys take defaults, unknown keys are rejected.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            invalid(
                if path.is_empty() {
                    ".".to_string()
                } else {
                    path
                },
                e.into_inner().to_string(),
            )
        })?;
        config.validate()?;
        Ok(config)
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        invalid(
            path.display().to_string(),
            format!("cannot read config: {e}"),
        )
    })?;
    ExperimentConfig::from_json_str(&text)
}
