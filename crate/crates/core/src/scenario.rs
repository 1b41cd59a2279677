//! System parameters and one realized deployment (topology, large-scale
//! map, pilot book, powers) that datasets and evaluations draw slots from.

use serde::{Deserialize, Serialize};

use crate::airlink::{dbm_to_watts, generate_pilotbook, CoherenceBlock, PilotBook, PowerProfile};
use crate::channel::{large_scale_map, FadingMode, LargeScaleMap, PathLossModel, PathLossParams};
use crate::error::{Error, Result};
use crate::numerics::SeededRng;
use crate::topology::{generate_topology, Topology, TopologyConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub topology: TopologyConfig,
    pub path_loss: PathLossModel,
    pub antennas: usize,
    pub pilot_length: usize,
    pub epsilon: f64,
    pub tx_power_w: f64,
    pub noise_power_dbm: f64,
    pub fading: FadingMode,
    pub coherence: Option<CoherenceBlock>,
}

impl SystemConfig {
    /// Reference 3GPP UMa deployment.
    pub fn scenario_one() -> Self {
        Self {
            topology: TopologyConfig::scenario_one(),
            path_loss: PathLossModel::UmaLos(PathLossParams::scenario_one()),
            antennas: 2,
            pilot_length: 40,
            epsilon: 0.1,
            tx_power_w: 0.2,
            noise_power_dbm: -109.0,
            fading: FadingMode::Fixed {
                block_len: usize::MAX,
            },
            coherence: Some(CoherenceBlock::scenario_one()),
        }
    }

    /// 1 km^2 deployment without placement constraints, log-distance path
    /// loss (`128.1 + 37.6 log10(d_km)`) and 2 dB shadowing.
    pub fn scenario_two_like() -> Self {
        Self {
            topology: TopologyConfig {
                area_side_m: 1000.0,
                num_aps: 20,
                num_users: 100,
                edge_distance_m: 0.0,
                min_ue_ap_distance_m: 0.0,
                min_ap_ap_distance_m: 0.0,
                ap_height_m: 0.0,
                ue_height_m: 0.0,
            },
            path_loss: PathLossModel::LogDistance {
                intercept_db: 128.1 - 3.0 * 37.6,
                slope_db: 37.6,
                shadow_std_db: 2.0,
                ap_height_m: 0.0,
                ue_height_m: 0.0,
            },
            antennas: 2,
            pilot_length: 40,
            epsilon: 0.1,
            tx_power_w: 0.2,
            noise_power_dbm: -109.0,
            fading: FadingMode::Fixed {
                block_len: usize::MAX,
            },
            coherence: Some(CoherenceBlock::scenario_one()),
        }
    }

    pub fn num_users(&self) -> usize {
        self.topology.num_users
    }

    pub fn num_aps(&self) -> usize {
        self.topology.num_aps
    }

    pub fn noise_power_w(&self) -> f64 {
        dbm_to_watts(self.noise_power_dbm)
    }

    /// Length of one sample's feature vector, `2 N L`.
    pub fn feature_len(&self) -> usize {
        2 * self.antennas * self.pilot_length
    }

    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        if self.antennas == 0 {
            return Err(Error::config("antennas", "must be at least 1"));
        }
        if self.pilot_length == 0 {
            return Err(Error::config("pilot_length", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::config(
                "epsilon",
                format!("must lie in [0, 1], got {}", self.epsilon),
            ));
        }
        if !(self.tx_power_w > 0.0) {
            return Err(Error::config("tx_power_w", "must be positive"));
        }
        if !self.noise_power_dbm.is_finite() {
            return Err(Error::config("noise_power_dbm", "must be finite"));
        }
        if let FadingMode::Fixed { block_len: 0 } = self.fading {
            return Err(Error::config("fading", "block_len must be at least 1"));
        }
        if let PathLossModel::UmaLos(p) = &self.path_loss {
            p.breakpoint_distance_m()
                .map_err(|e| Error::config("path_loss", e.to_string()))?;
        }
        Ok(())
    }

    /// Pilot length implied by the coherence block, when it disagrees with
    /// the configured one.
    pub fn coherence_mismatch(&self) -> Option<usize> {
        self.coherence
            .map(|c| c.pilot_length())
            .filter(|&l| l != self.pilot_length)
    }
}

/// Seeds for the independent random sources of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Seeds {
    pub topology: u64,
    pub channel: u64,
    pub pilots: u64,
    pub activity: u64,
    pub noise: u64,
    pub init: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self {
            topology: 1,
            channel: 2,
            pilots: 3,
            activity: 4,
            noise: 5,
            init: 6,
        }
    }
}

/// One realized deployment.
#[derive(Debug, Clone)]
pub struct System {
    pub config: SystemConfig,
    pub topology: Topology,
    pub beta: LargeScaleMap,
    pub pilots: PilotBook,
    pub power: PowerProfile,
    pub seeds: Seeds,
}

impl System {
    pub fn realize(config: &SystemConfig, seeds: Seeds) -> Result<Self> {
        config.validate()?;
        if let Some(l) = config.coherence_mismatch() {
            log::warn!(
                "pilot length {} differs from the coherence-block budget {l}",
                config.pilot_length
            );
        }
        let topology = generate_topology(&config.topology, &SeededRng::new(seeds.topology))?;
        let channel_rng = SeededRng::new(seeds.channel);
        let beta = large_scale_map(
            &topology,
            &config.path_loss,
            &channel_rng.split("large-scale"),
        )?;
        let pilots = generate_pilotbook(
            config.pilot_length,
            config.num_users(),
            &SeededRng::new(seeds.pilots),
        )?;
        let power = PowerProfile::uniform(
            config.num_users(),
            config.tx_power_w,
            config.noise_power_w(),
        )?;
        Ok(Self {
            config: config.clone(),
            topology,
            beta,
            pilots,
            power,
            seeds,
        })
    }

    /// Stream from which per-block Rayleigh coefficients are derived.
    pub fn fading_rng(&self) -> SeededRng {
        SeededRng::new(self.seeds.channel).split("small-scale")
    }

    /// Amplitude that received samples are expressed in (the noise standard
    /// deviation), so features are O(1) at the noise floor.
    pub fn amplitude_ref(&self) -> f64 {
        self.power.noise_power_w.sqrt()
    }
}
