//! Supervised samples built from simulated slots, their binary container
//! and the feature standardizer.
//!
//! Binary layout (all integers little-endian):
//!
//! ```text
//! header  magic "GFRA" | version u16 | layout u8 | K u32 | L u32 | N u32 | M u32
//!         | epsilon*1e6 u32 | sample_count u64 | fading u8 | block_len u64
//!         | seed u64 | amplitude_ref f64
//! record  slot u64 | block_id u64 | ap u32 | 2NL x f32 | ceil(K/8) label bytes
//! ```
//!
//! Labels are packed LSB-first.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::airlink::{dominant_ap, sample_activity, synth_ap};
use crate::channel::{fading_stream, small_scale_ap, FadingMode};
use crate::error::{Error, Result};
use crate::io::Cursor;
use crate::numerics::{ComplexMatrix, SeededRng};
use crate::scenario::System;

pub const DATASET_MAGIC: &[u8; 4] = b"GFRA";
pub const DATASET_VERSION: u16 = 1;
/// Real block then imaginary block, antenna-major within each block.
pub const LAYOUT_RE_IM_ANTENNA_MAJOR: u8 = 0;
const HEADER_LEN: u64 = 4 + 2 + 1 + 4 * 4 + 4 + 8 + 1 + 8 + 8 + 8;

/// `Re(y[0..L][0]), .., Re(y[0..L][N-1]), Im(y[0..L][0]), .., Im(y[0..L][N-1])`.
pub fn extract_features(y: &ComplexMatrix) -> Vec<f64> {
    let (l_len, n_len) = y.shape();
    let mut out = Vec::with_capacity(2 * l_len * n_len);
    for n in 0..n_len {
        out.extend((0..l_len).map(|l| y.get(l, n).re));
    }
    for n in 0..n_len {
        out.extend((0..l_len).map(|l| y.get(l, n).im));
    }
    out
}

/// Inverse of [`extract_features`].
pub fn features_to_matrix(
    features: &[f64],
    pilot_length: usize,
    antennas: usize,
) -> Result<ComplexMatrix> {
    let half = pilot_length * antennas;
    if features.len() != 2 * half {
        return Err(Error::Shape(format!(
            "{} features do not match L={pilot_length}, N={antennas}",
            features.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(pilot_length, antennas, |l, n| {
        num_complex::Complex64::new(
            features[n * pilot_length + l],
            features[half + n * pilot_length + l],
        )
    }))
}

/// Which AP's observation becomes the sample for each slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApPolicy {
    /// Dominant AP of a randomly chosen active device (any device when the
    /// slot is silent).
    DominantRandomUser,
    UniformRandomAp,
    /// One sample per AP per slot.
    AllAps,
}

impl std::str::FromStr for ApPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dominant-random-user" => Ok(Self::DominantRandomUser),
            "uniform-random-ap" => Ok(Self::UniformRandomAp),
            "all-aps" => Ok(Self::AllAps),
            other => Err(Error::config(
                "ap_policy",
                format!("unknown policy `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub slot: u64,
    pub block_id: u64,
    pub ap_index: u32,
    pub features: Vec<f32>,
    pub labels: Vec<bool>,
}

impl Sample {
    pub fn features_f64(&self) -> Vec<f64> {
        self.features.iter().map(|&v| f64::from(v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetHeader {
    pub version: u16,
    pub layout: u8,
    pub num_users: u32,
    pub pilot_length: u32,
    pub antennas: u32,
    pub num_aps: u32,
    pub epsilon_micro: u32,
    pub sample_count: u64,
    pub fading: FadingMode,
    pub seed: u64,
    pub amplitude_ref: f64,
}

impl DatasetHeader {
    pub fn feature_len(&self) -> usize {
        2 * self.antennas as usize * self.pilot_length as usize
    }

    pub fn label_bytes(&self) -> usize {
        (self.num_users as usize).div_ceil(8)
    }

    pub fn epsilon(&self) -> f64 {
        f64::from(self.epsilon_micro) / 1e6
    }

    fn record_len(&self) -> usize {
        8 + 8 + 4 + 4 * self.feature_len() + self.label_bytes()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub samples: Vec<Sample>,
}

/// Which slots to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotRange {
    pub first: u64,
    pub count: usize,
}

impl SlotRange {
    pub fn new(first: u64, count: usize) -> Self {
        Self { first, count }
    }
}

/// Offset that keeps evaluation slots disjoint from training slots.
pub const EVAL_SLOT_OFFSET: u64 = 1 << 40;

/// Simulates `slots.count` random-access slots of `system` and records the
/// observation(s) chosen by `policy`. Per-slot streams are derived from the
/// system seeds and the slot index, so a slot's content does not depend on
/// which other slots are generated.
pub fn generate_dataset(system: &System, slots: SlotRange, policy: ApPolicy) -> Result<Dataset> {
    if slots.count == 0 {
        return Err(Error::Domain("dataset needs at least one slot".into()));
    }
    let cfg = &system.config;
    let activity_root = SeededRng::new(system.seeds.activity);
    let noise_root = SeededRng::new(system.seeds.noise);
    let policy_root = activity_root.split("ap-policy");
    let fading_root = system.fading_rng();
    let scale = 1.0 / system.amplitude_ref();
    let m_count = cfg.num_aps();

    let mut samples = Vec::new();
    for slot in slots.first..slots.first + slots.count as u64 {
        let activity = sample_activity(
            cfg.num_users(),
            cfg.epsilon,
            &mut activity_root.split_indexed("slot", slot),
        )?;
        let mut pick = policy_root.split_indexed("slot", slot);
        let aps: Vec<usize> = match policy {
            ApPolicy::AllAps => (0..m_count).collect(),
            ApPolicy::UniformRandomAp => vec![pick.below(m_count)],
            ApPolicy::DominantRandomUser => {
                let support = activity.support();
                let k = if support.is_empty() {
                    pick.below(cfg.num_users())
                } else {
                    support[pick.below(support.len())]
                };
                vec![dominant_ap(&system.beta, k)]
            }
        };
        let block_id = cfg.fading.block_of(slot);
        for m in aps {
            let gains = small_scale_ap(
                &system.beta,
                m,
                cfg.antennas,
                &mut fading_stream(&fading_root, block_id, m),
            );
            let mut noise = noise_root.split(&format!("slot/{slot}/{m}"));
            let y = synth_ap(&system.pilots, &activity, &system.power, &gains, &mut noise)?;
            samples.push(Sample {
                slot,
                block_id,
                ap_index: m as u32,
                features: extract_features(&y)
                    .iter()
                    .map(|&v| (v * scale) as f32)
                    .collect(),
                labels: activity.bits().to_vec(),
            });
        }
    }

    let header = DatasetHeader {
        version: DATASET_VERSION,
        layout: LAYOUT_RE_IM_ANTENNA_MAJOR,
        num_users: cfg.num_users() as u32,
        pilot_length: cfg.pilot_length as u32,
        antennas: cfg.antennas as u32,
        num_aps: m_count as u32,
        epsilon_micro: (cfg.epsilon * 1e6).round() as u32,
        sample_count: samples.len() as u64,
        fading: cfg.fading,
        seed: system.seeds.activity,
        amplitude_ref: system.amplitude_ref(),
    };
    Ok(Dataset { header, samples })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn feature_len(&self) -> usize {
        self.header.feature_len()
    }

    pub fn num_users(&self) -> usize {
        self.header.num_users as usize
    }

    /// Fraction of positive labels over all samples and devices.
    pub fn label_density(&self) -> f64 {
        let ones: usize = self
            .samples
            .iter()
            .map(|s| s.labels.iter().filter(|&&b| b).count())
            .sum();
        ones as f64 / (self.samples.len() * self.num_users()).max(1) as f64
    }

    /// Splits by slot so every sample of a slot lands on the same side.
    /// Returns `(train, validation)` sample indices.
    pub fn split_by_slot(
        &self,
        validation_fraction: f64,
        rng: &SeededRng,
    ) -> (Vec<usize>, Vec<usize>) {
        let mut slots: Vec<u64> = self.samples.iter().map(|s| s.slot).collect();
        slots.dedup();
        slots.sort_unstable();
        slots.dedup();
        let mut order = slots.clone();
        rng.split("validation-split").shuffle(&mut order);
        let n_val = ((order.len() as f64) * validation_fraction).round() as usize;
        let n_val = n_val.min(order.len().saturating_sub(1));
        let mut val_slots = order[..n_val].to_vec();
        val_slots.sort_unstable();
        let (mut train, mut val) = (Vec::new(), Vec::new());
        for (i, s) in self.samples.iter().enumerate() {
            if val_slots.binary_search(&s.slot).is_ok() {
                val.push(i);
            } else {
                train.push(i);
            }
        }
        (train, val)
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let samples: Vec<Sample> = indices.iter().map(|&i| self.samples[i].clone()).collect();
        Dataset {
            header: DatasetHeader {
                sample_count: samples.len() as u64,
                ..self.header.clone()
            },
            samples,
        }
    }

    /// `sample_id,ap,label_bits_hex,feature_0,..`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample_id,ap,label_bits_hex");
        for i in 0..self.feature_len() {
            let _ = write!(out, ",feature_{i}");
        }
        out.push('\n');
        for (i, s) in self.samples.iter().enumerate() {
            let _ = write!(out, "{i},{},", s.ap_index);
            for byte in pack_bits(&s.labels) {
                let _ = write!(out, "{byte:02x}");
            }
            for v in &s.features {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        let h = &self.header;
        let mut buf = Vec::with_capacity(HEADER_LEN as usize + self.samples.len() * h.record_len());
        buf.extend_from_slice(DATASET_MAGIC);
        buf.extend_from_slice(&h.version.to_le_bytes());
        buf.push(h.layout);
        for v in [
            h.num_users,
            h.pilot_length,
            h.antennas,
            h.num_aps,
            h.epsilon_micro,
        ] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend_from_slice(&(self.samples.len() as u64).to_le_bytes());
        buf.push(h.fading.flag());
        let block_len = match h.fading {
            FadingMode::PerSlot => 1u64,
            FadingMode::Fixed { block_len } => block_len as u64,
        };
        buf.extend_from_slice(&block_len.to_le_bytes());
        buf.extend_from_slice(&h.seed.to_le_bytes());
        buf.extend_from_slice(&h.amplitude_ref.to_le_bytes());
        for s in &self.samples {
            buf.extend_from_slice(&s.slot.to_le_bytes());
            buf.extend_from_slice(&s.block_id.to_le_bytes());
            buf.extend_from_slice(&s.ap_index.to_le_bytes());
            for v in &s.features {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            buf.extend_from_slice(&pack_bits(&s.labels));
        }
        w.write_all(&buf)
    }

    pub fn read_from(r: &mut impl Read) -> Result<Dataset> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes).map_err(|e| Error::Format {
            offset: 0,
            message: e.to_string(),
        })?;
        decode(&bytes)
    }
}

fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

fn unpack_bits(bytes: &[u8], count: usize) -> Vec<bool> {
    (0..count)
        .map(|i| bytes[i / 8] >> (i % 8) & 1 == 1)
        .collect()
}

fn decode(bytes: &[u8]) -> Result<Dataset> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4, "magic")? != DATASET_MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: "bad magic, expected \"GFRA\"".into(),
        });
    }
    let version = c.u16("version")?;
    if version != DATASET_VERSION {
        return Err(Error::Format {
            offset: 4,
            message: format!("unsupported dataset version {version}"),
        });
    }
    let layout_at = c.pos as u64;
    let layout = c.u8("layout")?;
    if layout != LAYOUT_RE_IM_ANTENNA_MAJOR {
        return Err(Error::Format {
            offset: layout_at,
            message: format!("unknown feature layout {layout}"),
        });
    }
    let num_users = c.u32("K")?;
    let pilot_length = c.u32("L")?;
    let antennas = c.u32("N")?;
    let num_aps = c.u32("M")?;
    let epsilon_micro = c.u32("epsilon")?;
    let sample_count = c.u64("sample count")?;
    let fading_at = c.pos as u64;
    let fading_flag = c.u8("fading mode")?;
    let block_len = c.u64("block length")?;
    let fading = match fading_flag {
        0 => FadingMode::PerSlot,
        1 => FadingMode::Fixed {
            block_len: usize::try_from(block_len).unwrap_or(usize::MAX),
        },
        other => {
            return Err(Error::Format {
                offset: fading_at,
                message: format!("unknown fading mode flag {other}"),
            })
        }
    };
    let seed = c.u64("seed")?;
    let amplitude_ref = c.f64("amplitude reference")?;
    let header = DatasetHeader {
        version,
        layout,
        num_users,
        pilot_length,
        antennas,
        num_aps,
        epsilon_micro,
        sample_count,
        fading,
        seed,
        amplitude_ref,
    };
    let feature_len = header.feature_len();
    let label_bytes = header.label_bytes();
    let mut samples = Vec::with_capacity(sample_count.min(1 << 24) as usize);
    for i in 0..sample_count {
        let start = c.pos as u64;
        let truncated = |e: Error| match e {
            Error::Format { offset, message } => Error::Format {
                offset,
                message: format!("sample {i} (record at {start}): {message}"),
            },
            other => other,
        };
        let slot = c.u64("slot").map_err(truncated)?;
        let block_id = c.u64("block id").map_err(truncated)?;
        let ap_index = c.u32("ap index").map_err(truncated)?;
        let raw = c.take(4 * feature_len, "features").map_err(truncated)?;
        let features = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        let labels = unpack_bits(
            c.take(label_bytes, "labels").map_err(truncated)?,
            num_users as usize,
        );
        samples.push(Sample {
            slot,
            block_id,
            ap_index,
            features,
            labels,
        });
    }
    if c.pos != bytes.len() {
        return Err(Error::Format {
            offset: c.pos as u64,
            message: format!("{} trailing bytes after last sample", bytes.len() - c.pos),
        });
    }
    Ok(Dataset { header, samples })
}

pub fn write_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    crate::io::write_atomic(path, |w| dataset.write_to(w))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Dataset::read_from(&mut f)
}

/// Per-feature standardization fitted on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FeatureScaler {
    pub fn identity(len: usize) -> Self {
        Self {
            mean: vec![0.0; len],
            std: vec![1.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn apply(&self, features: &[f64]) -> Vec<f64> {
        features
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    pub fn apply_in_place(&self, features: &mut [f64]) {
        for (x, (m, s)) in features.iter_mut().zip(self.mean.iter().zip(&self.std)) {
            *x = (*x - m) / s;
        }
    }
}

/// Fits mean and standard deviation per feature. Zero-variance features get
/// a unit standard deviation.
pub fn fit_scaler<'a>(rows: impl IntoIterator<Item = &'a [f32]>) -> Result<FeatureScaler> {
    let mut count = 0usize;
    let mut mean: Vec<f64> = Vec::new();
    let mut m2: Vec<f64> = Vec::new();
    for row in rows {
        if count == 0 {
            mean = vec![0.0; row.len()];
            m2 = vec![0.0; row.len()];
        } else if row.len() != mean.len() {
            return Err(Error::Shape(format!(
                "feature row of length {} after rows of length {}",
                row.len(),
                mean.len()
            )));
        }
        count += 1;
        // Welford update.
        for (j, &x) in row.iter().enumerate() {
            let x = f64::from(x);
            let d = x - mean[j];
            mean[j] += d / count as f64;
            m2[j] += d * (x - mean[j]);
        }
    }
    if count < 2 {
        return Err(Error::Domain(format!(
            "scaler needs at least 2 samples, got {count}"
        )));
    }
    let mut flat = 0;
    let std = m2
        .iter()
        .map(|&v| {
            let s = (v / count as f64).sqrt();
            if s > 0.0 && s.is_finite() {
                s
            } else {
                flat += 1;
                1.0
            }
        })
        .collect();
    if flat > 0 {
        log::warn!("{flat} zero-variance feature(s); using unit standard deviation");
    }
    Ok(FeatureScaler { mean, std })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Seeds, SystemConfig};
    use num_complex::Complex64;

    #[test]
    fn feature_layout() {
        let y = ComplexMatrix::from_vec(2, 1, vec![Complex64::new(1., 2.), Complex64::new(3., 4.)])
            .unwrap();
        assert_eq!(extract_features(&y), vec![1., 3., 2., 4.]);
        assert_eq!(extract_features(&ComplexMatrix::zeros(3, 2)), vec![0.0; 12]);
    }

    #[test]
    fn feature_layout_inverts() {
        let mut rng = SeededRng::new(1);
        let y = ComplexMatrix::from_fn(5, 3, |_, _| rng.complex_normal(1.0).unwrap());
        let f = extract_features(&y);
        assert_eq!(features_to_matrix(&f, 5, 3).unwrap(), y);
        assert!(features_to_matrix(&f, 4, 3).is_err());
    }

    #[test]
    fn bit_packing() {
        let bits = vec![true, false, false, true, true, false, false, false, true];
        let packed = pack_bits(&bits);
        assert_eq!(packed, vec![0b0001_1001, 0b0000_0001]);
        assert_eq!(unpack_bits(&packed, 9), bits);
    }

    fn small_system() -> System {
        let mut cfg = SystemConfig::scenario_one();
        cfg.topology.num_users = 12;
        cfg.topology.num_aps = 4;
        cfg.pilot_length = 6;
        cfg.coherence = None;
        System::realize(&cfg, Seeds::default()).unwrap()
    }

    #[test]
    fn all_aps_policy_emits_one_sample_per_ap() {
        let sys = small_system();
        let ds = generate_dataset(&sys, SlotRange::new(0, 1), ApPolicy::AllAps).unwrap();
        assert_eq!(ds.len(), 4);
        assert!(ds.samples.iter().all(|s| s.labels == ds.samples[0].labels));
        let aps: Vec<u32> = ds.samples.iter().map(|s| s.ap_index).collect();
        assert_eq!(aps, vec![0, 1, 2, 3]);
        assert_eq!(ds.header.feature_len(), 2 * 2 * 6);
    }

    #[test]
    fn slot_content_is_independent_of_range() {
        let sys = small_system();
        let a = generate_dataset(&sys, SlotRange::new(0, 5), ApPolicy::AllAps).unwrap();
        let b = generate_dataset(&sys, SlotRange::new(3, 1), ApPolicy::AllAps).unwrap();
        assert_eq!(&a.samples[12..16], &b.samples[..]);
        let single =
            generate_dataset(&sys, SlotRange::new(0, 5), ApPolicy::UniformRandomAp).unwrap();
        for s in &single.samples {
            let twin = a
                .samples
                .iter()
                .find(|t| t.slot == s.slot && t.ap_index == s.ap_index)
                .unwrap();
            assert_eq!(twin, s);
        }
    }

    #[test]
    fn dominant_policy_picks_an_active_devices_best_ap() {
        let sys = small_system();
        let ds =
            generate_dataset(&sys, SlotRange::new(0, 50), ApPolicy::DominantRandomUser).unwrap();
        for s in &ds.samples {
            let owners: Vec<usize> = (0..12)
                .filter(|&k| s.labels[k])
                .map(|k| dominant_ap(&sys.beta, k))
                .collect();
            if !owners.is_empty() {
                assert!(owners.contains(&(s.ap_index as usize)));
            }
        }
    }

    #[test]
    fn binary_round_trip_and_errors() {
        let sys = small_system();
        let ds = generate_dataset(&sys, SlotRange::new(0, 3), ApPolicy::AllAps).unwrap();
        let mut bytes = Vec::new();
        ds.write_to(&mut bytes).unwrap();
        assert_eq!(Dataset::read_from(&mut bytes.as_slice()).unwrap(), ds);

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            Dataset::read_from(&mut bad.as_slice()),
            Err(Error::Format { offset: 0, .. })
        ));

        let cut = &bytes[..bytes.len() - 1];
        match Dataset::read_from(&mut &cut[..]) {
            Err(Error::Format { message, .. }) => {
                assert!(message.contains("sample 11"), "{message}")
            }
            other => panic!("{other:?}"),
        }
        let mut ver = bytes.clone();
        ver[4] = 9;
        assert!(matches!(
            Dataset::read_from(&mut ver.as_slice()),
            Err(Error::Format { offset: 4, .. })
        ));
    }

    #[test]
    fn split_keeps_slots_together() {
        let sys = small_system();
        let ds = generate_dataset(&sys, SlotRange::new(0, 40), ApPolicy::AllAps).unwrap();
        let (train, val) = ds.split_by_slot(0.1, &SeededRng::new(0));
        assert_eq!(train.len() + val.len(), ds.len());
        assert_eq!(val.len(), 4 * 4);
        for &v in &val {
            assert!(train
                .iter()
                .all(|&t| ds.samples[t].slot != ds.samples[v].slot));
        }
    }

    #[test]
    fn scaler_standardizes_and_handles_constants() {
        let rows: Vec<Vec<f32>> = (0..10)
            .map(|i| vec![i as f32, 3.0, (i * i) as f32])
            .collect();
        let sc = fit_scaler(rows.iter().map(|r| r.as_slice())).unwrap();
        assert_eq!(sc.std[1], 1.0);
        let out: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| sc.apply(&r.iter().map(|&v| f64::from(v)).collect::<Vec<_>>()))
            .collect();
        for j in 0..3 {
            let m: f64 = out.iter().map(|r| r[j]).sum::<f64>() / 10.0;
            assert!(m.abs() < 1e-10);
        }
        assert!(out.iter().all(|r| r[1] == 0.0));
        assert!(fit_scaler(std::iter::once(&[1.0f32][..])).is_err());
    }

    #[test]
    fn csv_export_header() {
        let sys = small_system();
        let ds = generate_dataset(&sys, SlotRange::new(0, 1), ApPolicy::UniformRandomAp).unwrap();
        let csv = ds.to_csv();
        let mut lines = csv.lines();
        let head = lines.next().unwrap();
        assert!(head.starts_with("sample_id,ap,label_bits_hex,feature_0,"));
        assert_eq!(head.split(',').count(), 3 + 24);
        assert_eq!(lines.next().unwrap().split(',').count(), 3 + 24);
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("all-aps".parse::<ApPolicy>().unwrap(), ApPolicy::AllAps);
        assert!("nearest".parse::<ApPolicy>().is_err());
    }
}
