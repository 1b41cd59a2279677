//! Pilot codebook, sparse activity, SNR bookkeeping and synthesis of the
//! signal received at each access point.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{LargeScaleMap, SmallScaleBlock};
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, SeededRng};

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// `L x K` matrix whose column `k` is device `k`'s pilot.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotBook {
    s: ComplexMatrix,
}

impl PilotBook {
    pub fn from_matrix(s: ComplexMatrix) -> Self {
        Self { s }
    }

    pub fn pilot_length(&self) -> usize {
        self.s.rows()
    }

    pub fn num_users(&self) -> usize {
        self.s.cols()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.s
    }

    pub fn pilot(&self, k: usize) -> Vec<Complex64> {
        self.s.column(k)
    }
}

/// Non-orthogonal Gaussian pilots, entries i.i.d. `CN(0, 1/L)`.
pub fn generate_pilotbook(
    pilot_length: usize,
    num_users: usize,
    rng: &SeededRng,
) -> Result<PilotBook> {
    if pilot_length == 0 || num_users == 0 {
        return Err(Error::Domain(format!(
            "pilot book needs L >= 1 and K >= 1 (got L={pilot_length}, K={num_users})"
        )));
    }
    let mut rng = rng.split("pilots");
    let var = 1.0 / pilot_length as f64;
    let s = ComplexMatrix::from_fn(pilot_length, num_users, |_, _| {
        rng.complex_normal_unchecked(var)
    });
    Ok(PilotBook { s })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActivityVector {
    bits: Vec<bool>,
}

impl ActivityVector {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_active(&self, k: usize) -> bool {
        self.bits[k]
    }

    pub fn support(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(k, &a)| a.then_some(k))
            .collect()
    }

    pub fn active_count(&self) -> usize {
        self.bits.iter().filter(|&&a| a).count()
    }
}

pub fn sample_activity(
    num_users: usize,
    epsilon: f64,
    rng: &mut SeededRng,
) -> Result<ActivityVector> {
    let bits = (0..num_users)
        .map(|_| rng.bernoulli(epsilon))
        .collect::<Result<Vec<_>>>()?;
    Ok(ActivityVector { bits })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    /// Per-device transmit power, watts.
    pub rho: Vec<f64>,
    /// Receiver noise power, watts.
    pub noise_power_w: f64,
}

impl PowerProfile {
    pub fn uniform(num_users: usize, tx_power_w: f64, noise_power_w: f64) -> Result<Self> {
        let p = Self {
            rho: vec![tx_power_w; num_users],
            noise_power_w,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(bad) = self.rho.iter().find(|r| !(**r > 0.0)) {
            return Err(Error::Domain(format!(
                "transmit power must be positive, got {bad}"
            )));
        }
        if !(self.noise_power_w > 0.0) {
            return Err(Error::Domain(format!(
                "noise power must be positive, got {}",
                self.noise_power_w
            )));
        }
        Ok(())
    }
}

/// Coherence block budget: `T_C = tau_C * B_C` symbols, of which a fraction
/// is reserved for pilots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceBlock {
    pub time_s: f64,
    pub bandwidth_hz: f64,
    pub pilot_fraction: f64,
}

impl CoherenceBlock {
    pub fn scenario_one() -> Self {
        Self {
            time_s: 1e-3,
            bandwidth_hz: 200e3,
            pilot_fraction: 0.2,
        }
    }

    pub fn symbols(&self) -> f64 {
        self.time_s * self.bandwidth_hz
    }

    pub fn pilot_length(&self) -> usize {
        (self.pilot_fraction * self.symbols()).round() as usize
    }
}

/// AP with the largest gain towards device `k`; ties go to the lowest index.
pub fn dominant_ap(beta: &LargeScaleMap, k: usize) -> usize {
    let mut best = 0;
    for m in 1..beta.num_aps() {
        if beta.beta(m, k) > beta.beta(best, k) {
            best = m;
        }
    }
    best
}

/// Per-device SNR in dB at the dominant AP.
pub fn snr_per_device(beta: &LargeScaleMap, power: &PowerProfile) -> Vec<f64> {
    (0..beta.num_users())
        .map(|k| {
            let m = dominant_ap(beta, k);
            10.0 * (power.rho[k] * beta.beta(m, k) / power.noise_power_w).log10()
        })
        .collect()
}

/// Quantile with linear interpolation between order statistics
/// (`pos = q (n - 1)`).
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Domain("quantile of an empty sample".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!(
            "quantile level must lie in [0, 1], got {q}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// SNR met by a `coverage` fraction of devices: the `(1 - coverage)`
/// quantile of the SNR sample.
pub fn snr_target(snrs_db: &[f64], coverage: f64) -> Result<f64> {
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(Error::Domain(format!(
            "coverage must lie in (0, 1), got {coverage}"
        )));
    }
    quantile(snrs_db, 1.0 - coverage)
}

/// Observation of one random-access slot at a set of APs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSlot {
    /// `L x N` observation per AP, indexed like `ap_ids`.
    pub y: Vec<ComplexMatrix>,
    pub ap_ids: Vec<usize>,
    pub activity: ActivityVector,
    pub block_id: u64,
}

impl ReceivedSlot {
    pub fn observation(&self, ap: usize) -> Option<&ComplexMatrix> {
        self.ap_ids
            .iter()
            .position(|&m| m == ap)
            .map(|i| &self.y[i])
    }
}

/// `Y_m = S D_a D_rho^{1/2} G_m + W_m` for one AP.
pub fn synth_ap(
    pilots: &PilotBook,
    activity: &ActivityVector,
    power: &PowerProfile,
    gains: &ComplexMatrix,
    noise_rng: &mut SeededRng,
) -> Result<ComplexMatrix> {
    let (l_len, k_len) = pilots.matrix().shape();
    if activity.len() != k_len || power.rho.len() != k_len || gains.rows() != k_len {
        return Err(Error::Shape(format!(
            "pilot book has K={k_len} but activity={}, powers={}, G rows={}",
            activity.len(),
            power.rho.len(),
            gains.rows()
        )));
    }
    let n_len = gains.cols();
    let s = pilots.matrix();
    let mut y = ComplexMatrix::zeros(l_len, n_len);
    for k in activity.support() {
        let amp = power.rho[k].sqrt();
        let g_row = gains.row(k);
        for l in 0..l_len {
            let sk = s.get(l, k) * amp;
            for (n, g) in g_row.iter().enumerate() {
                let v = y.get(l, n) + sk * g;
                y.set(l, n, v);
            }
        }
    }
    if power.noise_power_w > 0.0 {
        for v in y.as_mut_slice() {
            *v += noise_rng.complex_normal_unchecked(power.noise_power_w);
        }
    }
    Ok(y)
}

/// Received signal at every AP of a small-scale block.
pub fn synth_slot(
    pilots: &PilotBook,
    activity: &ActivityVector,
    power: &PowerProfile,
    small_scale: &SmallScaleBlock,
    rng: &SeededRng,
) -> Result<ReceivedSlot> {
    let mut y = Vec::with_capacity(small_scale.gains.len());
    for (m, g) in small_scale.gains.iter().enumerate() {
        y.push(synth_ap(
            pilots,
            activity,
            power,
            g,
            &mut rng.split_indexed("noise", m as u64),
        )?);
    }
    Ok(ReceivedSlot {
        ap_ids: (0..y.len()).collect(),
        y,
        activity: activity.clone(),
        block_id: small_scale.block_id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::small_scale_block;

    #[test]
    fn unit_conversions() {
        assert!((dbm_to_watts(-109.0) - 1.258_925_411_794_166_6e-14).abs() < 1e-26);
        assert!((watts_to_dbm(0.2) - 23.010_299_956_639_81).abs() < 1e-12);
    }

    #[test]
    fn snr_reference_value() {
        // rho = 200 mW, beta = -100 dB, sigma^2 = -109 dBm: 23.0103 - 100 + 109 dB.
        let beta = LargeScaleMap::from_db(1, 1, vec![-100.0]).unwrap();
        let power = PowerProfile::uniform(1, 0.2, dbm_to_watts(-109.0)).unwrap();
        let snr = snr_per_device(&beta, &power)[0];
        let ratio: f64 = 0.2 * 1e-10 / 1.258_925_411_794_166_6e-14;
        assert!((snr - 10.0 * ratio.log10()).abs() < 1e-9);
        assert!((snr - 32.0103).abs() < 1e-4);

        let doubled = PowerProfile::uniform(1, 0.4, dbm_to_watts(-109.0)).unwrap();
        assert!((snr_per_device(&beta, &doubled)[0] - snr - 10.0 * 2f64.log10()).abs() < 1e-12);
        let stronger = LargeScaleMap::from_db(1, 1, vec![-90.0]).unwrap();
        assert!((snr_per_device(&stronger, &power)[0] - snr - 10.0).abs() < 1e-9);
    }

    #[test]
    fn dominant_ap_argmax_and_ties() {
        let map = LargeScaleMap::from_linear(3, 1, vec![0.1, 0.9, 0.3]).unwrap();
        assert_eq!(dominant_ap(&map, 0), 1);
        let flat = LargeScaleMap::from_linear(3, 1, vec![0.5; 3]).unwrap();
        assert_eq!(dominant_ap(&flat, 0), 0);
    }

    #[test]
    fn snr_target_percentile() {
        let snrs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert!((snr_target(&snrs, 0.95).unwrap() - 5.95).abs() < 1e-12);
        let mut rev = snrs.clone();
        rev.reverse();
        assert_eq!(
            snr_target(&rev, 0.95).unwrap(),
            snr_target(&snrs, 0.95).unwrap()
        );
        assert_eq!(snr_target(&[7.5; 10], 0.999).unwrap(), 7.5);
        assert!(snr_target(&[], 0.95).is_err());
        assert!(snr_target(&snrs, 1.0).is_err());
    }

    #[test]
    fn activity_extremes_and_support() {
        let mut rng = SeededRng::new(2);
        assert_eq!(
            sample_activity(50, 0.0, &mut rng).unwrap().active_count(),
            0
        );
        assert_eq!(
            sample_activity(50, 1.0, &mut rng).unwrap().active_count(),
            50
        );
        let a = ActivityVector::from_bits(vec![false, true, false, true]);
        assert_eq!(a.support(), vec![1, 3]);
        assert!(sample_activity(5, 2.0, &mut rng).is_err());
    }

    #[test]
    fn coherence_budget_gives_scenario_pilot_length() {
        let cb = CoherenceBlock::scenario_one();
        assert!((cb.symbols() - 200.0).abs() < 1e-9);
        assert_eq!(cb.pilot_length(), 40);
    }

    #[test]
    fn single_user_pilot_book() {
        let pb = generate_pilotbook(40, 1, &SeededRng::new(0)).unwrap();
        assert_eq!(pb.matrix().shape(), (40, 1));
        assert!(generate_pilotbook(0, 3, &SeededRng::new(0)).is_err());
    }

    fn noiseless(k: usize) -> PowerProfile {
        PowerProfile {
            rho: vec![0.2; k],
            noise_power_w: 0.0,
        }
    }

    #[test]
    fn silent_noiseless_slot_is_zero() {
        let rng = SeededRng::new(3);
        let pb = generate_pilotbook(8, 5, &rng).unwrap();
        let map = LargeScaleMap::from_db(2, 5, vec![-60.0; 10]).unwrap();
        let block = small_scale_block(&map, 2, 0, &rng).unwrap();
        let a = ActivityVector::from_bits(vec![false; 5]);
        let slot = synth_slot(&pb, &a, &noiseless(5), &block, &rng).unwrap();
        for y in &slot.y {
            assert_eq!(y.frobenius_sq(), 0.0);
        }
    }

    #[test]
    fn single_active_device_gives_rank_one_observation() {
        let rng = SeededRng::new(4);
        let pb = generate_pilotbook(8, 5, &rng).unwrap();
        let map = LargeScaleMap::from_db(1, 5, vec![-50.0; 5]).unwrap();
        let block = small_scale_block(&map, 3, 0, &rng).unwrap();
        let mut bits = vec![false; 5];
        bits[2] = true;
        let a = ActivityVector::from_bits(bits);
        let y = synth_ap(&pb, &a, &noiseless(5), &block.gains[0], &mut rng.split("n")).unwrap();
        let s2 = pb.pilot(2);
        for n in 0..3 {
            let g = block.gains[0].get(2, n);
            for (l, &s) in s2.iter().enumerate() {
                let expect = 0.2f64.sqrt() * s * g;
                assert!((y.get(l, n) - expect).norm() <= 1e-15 * expect.norm().max(1e-30));
            }
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let rng = SeededRng::new(5);
        let pb = generate_pilotbook(8, 5, &rng).unwrap();
        let map = LargeScaleMap::from_db(1, 4, vec![-50.0; 4]).unwrap();
        let block = small_scale_block(&map, 1, 0, &rng).unwrap();
        let a = ActivityVector::from_bits(vec![true; 5]);
        assert!(matches!(
            synth_slot(&pb, &a, &noiseless(5), &block, &rng),
            Err(Error::Shape(_))
        ));
    }
}
