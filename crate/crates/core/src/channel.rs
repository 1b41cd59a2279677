//! Large-scale fading (3GPP UMa line-of-sight path loss plus log-normal
//! shadowing) and Rayleigh small-scale fading.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, SeededRng};
use crate::topology::Topology;

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;
pub const MIN_MODEL_DISTANCE_M: f64 = 10.0;
pub const MAX_MODEL_DISTANCE_M: f64 = 5000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossParams {
    pub carrier_freq_hz: f64,
    pub ap_height_m: f64,
    pub ue_height_m: f64,
    pub shadow_std_db: f64,
}

impl PathLossParams {
    pub fn scenario_one() -> Self {
        Self {
            carrier_freq_hz: 900e6,
            ap_height_m: 12.0,
            ue_height_m: 1.5,
            shadow_std_db: 1.0,
        }
    }

    /// Breakpoint distance with effective heights `h - 1 m`.
    pub fn breakpoint_distance_m(&self) -> Result<f64> {
        if !(self.ap_height_m > 1.0) || !(self.ue_height_m > 1.0) {
            return Err(Error::Domain(format!(
                "antenna heights must exceed 1 m (got h_BS={}, h_UT={})",
                self.ap_height_m, self.ue_height_m
            )));
        }
        if !(self.carrier_freq_hz > 0.0) {
            return Err(Error::Domain(format!(
                "carrier frequency must be positive, got {}",
                self.carrier_freq_hz
            )));
        }
        Ok(
            4.0 * (self.ap_height_m - 1.0) * (self.ue_height_m - 1.0) * self.carrier_freq_hz
                / SPEED_OF_LIGHT_M_S,
        )
    }

    fn validate(&self) -> Result<f64> {
        if !(self.shadow_std_db >= 0.0) {
            return Err(Error::Domain(format!(
                "shadowing std must be non-negative, got {}",
                self.shadow_std_db
            )));
        }
        self.breakpoint_distance_m()
    }
}

/// Pre-breakpoint branch of the UMa-LOS model.
pub fn path_loss_near_db(d_3d: f64, fc_ghz: f64) -> f64 {
    28.0 + 22.0 * d_3d.log10() + 20.0 * fc_ghz.log10()
}

/// Post-breakpoint branch of the UMa-LOS model.
pub fn path_loss_far_db(d_3d: f64, fc_ghz: f64, breakpoint_m: f64, height_diff_m: f64) -> f64 {
    28.0 + 40.0 * d_3d.log10() + 20.0 * fc_ghz.log10()
        - 9.0 * (breakpoint_m * breakpoint_m + height_diff_m * height_diff_m).log10()
}

/// UMa-LOS path loss in dB. `f_c` enters the formula in GHz.
pub fn path_loss_db(d_2d: f64, params: &PathLossParams) -> Result<f64> {
    if !(MIN_MODEL_DISTANCE_M..=MAX_MODEL_DISTANCE_M).contains(&d_2d) {
        return Err(Error::ModelRange { d_2d_m: d_2d });
    }
    let d_bp = params.validate()?;
    let dh = params.ap_height_m - params.ue_height_m;
    let d_3d = d_2d.hypot(dh);
    let fc_ghz = params.carrier_freq_hz / 1e9;
    Ok(if d_2d <= d_bp {
        path_loss_near_db(d_3d, fc_ghz)
    } else {
        path_loss_far_db(d_3d, fc_ghz, d_bp, dh)
    })
}

/// Large-scale propagation model used to build a [`LargeScaleMap`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PathLossModel {
    /// 3GPP UMa-LOS with Gaussian shadowing.
    UmaLos(PathLossParams),
    /// `PL = intercept + slope * log10(d_3D)` with Gaussian shadowing, for
    /// deployments without a standardized model.
    LogDistance {
        intercept_db: f64,
        slope_db: f64,
        shadow_std_db: f64,
        ap_height_m: f64,
        ue_height_m: f64,
    },
}

impl PathLossModel {
    pub fn shadow_std_db(&self) -> f64 {
        match self {
            PathLossModel::UmaLos(p) => p.shadow_std_db,
            PathLossModel::LogDistance { shadow_std_db, .. } => *shadow_std_db,
        }
    }

    /// Deterministic part of the loss at a horizontal distance, clamping
    /// distances below the model's 10 m floor.
    pub fn mean_loss_db(&self, d_2d: f64) -> Result<f64> {
        let d = d_2d.max(MIN_MODEL_DISTANCE_M);
        match self {
            PathLossModel::UmaLos(p) => path_loss_db(d, p),
            PathLossModel::LogDistance {
                intercept_db,
                slope_db,
                ap_height_m,
                ue_height_m,
                ..
            } => Ok(intercept_db + slope_db * d.hypot(ap_height_m - ue_height_m).log10()),
        }
    }
}

/// `M x K` large-scale gains, linear and in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeScaleMap {
    num_aps: usize,
    num_users: usize,
    beta_db: Vec<f64>,
    beta: Vec<f64>,
}

impl LargeScaleMap {
    pub fn from_db(num_aps: usize, num_users: usize, beta_db: Vec<f64>) -> Result<Self> {
        if num_aps == 0 || num_users == 0 || beta_db.len() != num_aps * num_users {
            return Err(Error::Shape(format!(
                "{} gains cannot form a {num_aps}x{num_users} map",
                beta_db.len()
            )));
        }
        if let Some(bad) = beta_db.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite gain {bad} dB")));
        }
        let beta = beta_db.iter().map(|db| 10f64.powf(db / 10.0)).collect();
        Ok(Self {
            num_aps,
            num_users,
            beta_db,
            beta,
        })
    }

    pub fn from_linear(num_aps: usize, num_users: usize, beta: Vec<f64>) -> Result<Self> {
        if let Some(bad) = beta.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::Domain(format!(
                "large-scale gain must be positive, got {bad}"
            )));
        }
        let db = beta.iter().map(|b| 10.0 * b.log10()).collect();
        let mut map = Self::from_db(num_aps, num_users, db)?;
        map.beta = beta;
        Ok(map)
    }

    pub fn num_aps(&self) -> usize {
        self.num_aps
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    #[inline]
    pub fn beta(&self, ap: usize, ue: usize) -> f64 {
        self.beta[ap * self.num_users + ue]
    }

    #[inline]
    pub fn beta_db(&self, ap: usize, ue: usize) -> f64 {
        self.beta_db[ap * self.num_users + ue]
    }

    pub fn beta_linear(&self) -> &[f64] {
        &self.beta
    }

    pub fn beta_db_all(&self) -> &[f64] {
        &self.beta_db
    }

    /// `m,k,beta_db` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,k,beta_db\n");
        for m in 0..self.num_aps {
            for k in 0..self.num_users {
                let _ = writeln!(out, "{m},{k},{}", self.beta_db(m, k));
            }
        }
        out
    }
}

/// `beta_db[m][k] = -PL(d_mk) + F_mk`, `F_mk ~ N(0, sigma_sh^2)`.
pub fn large_scale_map(
    topology: &Topology,
    model: &PathLossModel,
    rng: &SeededRng,
) -> Result<LargeScaleMap> {
    let mut shadow = rng.split("shadowing");
    let sigma = model.shadow_std_db();
    let (m_count, k_count) = (topology.num_aps(), topology.num_users());
    let mut beta_db = Vec::with_capacity(m_count * k_count);
    for m in 0..m_count {
        for k in 0..k_count {
            let loss = model.mean_loss_db(topology.ap_ue_distance(m, k))?;
            let f = if sigma > 0.0 {
                sigma * shadow.standard_normal()
            } else {
                0.0
            };
            beta_db.push(-loss + f);
        }
    }
    LargeScaleMap::from_db(m_count, k_count, beta_db)
}

/// Whether Rayleigh coefficients are redrawn every slot or held over a
/// coherence block of several slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FadingMode {
    PerSlot,
    Fixed { block_len: usize },
}

impl FadingMode {
    pub fn block_of(&self, slot: u64) -> u64 {
        match *self {
            FadingMode::PerSlot => slot,
            FadingMode::Fixed { block_len } => slot / block_len.max(1) as u64,
        }
    }

    /// Single byte tag stored in dataset headers.
    pub fn flag(&self) -> u8 {
        match self {
            FadingMode::PerSlot => 0,
            FadingMode::Fixed { .. } => 1,
        }
    }
}

/// Per-AP `K x N` channel matrices for one coherence block.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallScaleBlock {
    pub gains: Vec<ComplexMatrix>,
    pub block_id: u64,
}

/// `G_m` for a single AP: `g_mk^(n) = sqrt(beta_mk) h`, `h ~ CN(0, 1)`.
pub fn small_scale_ap(
    beta: &LargeScaleMap,
    ap: usize,
    antennas: usize,
    rng: &mut SeededRng,
) -> ComplexMatrix {
    assert!(antennas >= 1, "at least one antenna required");
    ComplexMatrix::from_fn(beta.num_users(), antennas, |k, _| {
        beta.beta(ap, k).sqrt() * rng.complex_normal_unchecked(1.0)
    })
}

/// Stream for AP `ap` in coherence block `block_id`. Keying by both means
/// the same block reproduces the same `G_m` no matter which APs a caller
/// materializes.
pub fn fading_stream(rng: &SeededRng, block_id: u64, ap: usize) -> SeededRng {
    rng.split(&format!("fading/{block_id}/{ap}"))
}

pub fn small_scale_block(
    beta: &LargeScaleMap,
    antennas: usize,
    block_id: u64,
    rng: &SeededRng,
) -> Result<SmallScaleBlock> {
    if antennas == 0 {
        return Err(Error::Domain(
            "number of antennas must be at least 1".into(),
        ));
    }
    let gains = (0..beta.num_aps())
        .map(|m| small_scale_ap(beta, m, antennas, &mut fading_stream(rng, block_id, m)))
        .collect();
    Ok(SmallScaleBlock { gains, block_id })
}
