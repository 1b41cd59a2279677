//! Input perturbation and fixed-point quantization of detector inputs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::LargeScaleMap;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationTarget {
    ReceivedSignal,
    LargeScaleMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    /// Weight of the noise term; 0 keeps the input, 1 replaces it.
    pub theta: f64,
    pub target: PerturbationTarget,
}

fn check_theta(theta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "perturbation factor {theta} outside [0, 1]"
        )))
    }
}

fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::Domain(format!(
            "standard deviation of {} value(s) is undefined",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

/// `x sqrt(1 - theta^2) + theta n` with `n ~ N(mean(x), std(x)^2)` drawn
/// i.i.d. per element; the moments are those of the whole collection.
pub fn perturb(values: &[f64], theta: f64, rng: &mut SeededRng) -> Result<Vec<f64>> {
    check_theta(theta)?;
    let (mean, std) = mean_std(values)?;
    if theta == 0.0 {
        return Ok(values.to_vec());
    }
    let keep = (1.0 - theta * theta).sqrt();
    Ok(values
        .iter()
        .map(|&x| x * keep + theta * rng.normal(mean, std))
        .collect())
}

/// Perturbs a feature vector laid out as a real block followed by an
/// imaginary block; each block uses its own moments.
pub fn perturb_features(features: &[f64], theta: f64, rng: &mut SeededRng) -> Result<Vec<f64>> {
    if !features.len().is_multiple_of(2) {
        return Err(Error::Shape(format!(
            "{} features do not split into re/im halves",
            features.len()
        )));
    }
    let (re, im) = features.split_at(features.len() / 2);
    let mut out = perturb(re, theta, rng)?;
    out.extend(perturb(im, theta, rng)?);
    Ok(out)
}

/// Perturbs every sample's features; sample `i` uses stream `i` of `rng`.
pub fn perturb_dataset(dataset: &Dataset, theta: f64, rng: &SeededRng) -> Result<Dataset> {
    let mut out = dataset.clone();
    for (i, s) in out.samples.iter_mut().enumerate() {
        let mut stream = rng.split_indexed("perturb", i as u64);
        let noisy = perturb_features(&s.features_f64(), theta, &mut stream)?;
        for (f, v) in s.features.iter_mut().zip(noisy) {
            *f = v as f32;
        }
    }
    Ok(out)
}

/// Perturbs the large-scale gains in dB, which keeps every gain positive.
pub fn perturb_large_scale(
    map: &LargeScaleMap,
    theta: f64,
    rng: &mut SeededRng,
) -> Result<LargeScaleMap> {
    let perturbed = perturb(map.beta_db_all(), theta, rng)?;
    LargeScaleMap::from_db(map.num_aps(), map.num_users(), perturbed)
}

/// Signed fixed-point format with `word_length` bits in total, of which
/// `fractional_bits` follow the binary point. Written `W_F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FixedPointFormat {
    word_length: u32,
    fractional_bits: u32,
}

impl FixedPointFormat {
    pub fn new(word_length: u32, fractional_bits: u32) -> Result<Self> {
        if !(1 <= fractional_bits && fractional_bits < word_length && word_length <= 64) {
            return Err(Error::Domain(format!(
                "fixed-point format {word_length}_{fractional_bits} needs 1 <= F < W <= 64"
            )));
        }
        Ok(Self {
            word_length,
            fractional_bits,
        })
    }

    pub fn word_length(self) -> u32 {
        self.word_length
    }

    pub fn fractional_bits(self) -> u32 {
        self.fractional_bits
    }

    pub fn integer_bits(self) -> u32 {
        self.word_length - self.fractional_bits
    }

    pub fn resolution(self) -> f64 {
        (-(self.fractional_bits as f64)).exp2()
    }

    pub fn max_value(self) -> f64 {
        (((self.word_length - 1) as f64).exp2() - 1.0) * self.resolution()
    }

    pub fn min_value(self) -> f64 {
        -((self.word_length - 1) as f64).exp2() * self.resolution()
    }
}

impl fmt::Display for FixedPointFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.word_length, self.fractional_bits)
    }
}

impl FromStr for FixedPointFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("fixed-point format `{s}` is not of the form W_F"));
        let (w, f) = s.split_once('_').ok_or_else(bad)?;
        Self::new(
            w.trim().parse().map_err(|_| bad())?,
            f.trim().parse().map_err(|_| bad())?,
        )
    }
}

impl TryFrom<String> for FixedPointFormat {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FixedPointFormat> for String {
    fn from(f: FixedPointFormat) -> String {
        f.to_string()
    }
}

/// Round half to even on the `2^-F` lattice, saturating at the word's range.
pub fn quantize(x: f64, fmt: FixedPointFormat) -> f64 {
    let scale = (fmt.fractional_bits as f64).exp2();
    let top = ((fmt.word_length - 1) as f64).exp2();
    (x * scale).round_ties_even().clamp(-top, top - 1.0) / scale
}

pub fn quantize_features(features: &[f64], fmt: FixedPointFormat) -> Vec<f64> {
    features.iter().map(|&x| quantize(x, fmt)).collect()
}

/// Quantizes the stored (unscaled) features of every sample.
pub fn quantize_dataset(dataset: &Dataset, fmt: FixedPointFormat) -> Dataset {
    let mut out = dataset.clone();
    for s in &mut out.samples {
        for f in &mut s.features {
            *f = quantize(f64::from(*f), fmt) as f32;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fmt(w: u32, f: u32) -> FixedPointFormat {
        FixedPointFormat::new(w, f).unwrap()
    }

    #[test]
    fn zero_theta_is_identity_bitwise() {
        let x = vec![-0.0, 1.5, -3.25, 1e-300, 7.0];
        let y = perturb(&x, 0.0, &mut SeededRng::new(1)).unwrap();
        assert_eq!(
            x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            y.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn perturb_rejects_bad_input() {
        let mut rng = SeededRng::new(1);
        assert!(perturb(&[1.0], 0.5, &mut rng).is_err());
        assert!(perturb(&[1.0, 2.0], 1.5, &mut rng).is_err());
        assert!(perturb_features(&[1.0, 2.0, 3.0], 0.5, &mut rng).is_err());
    }

    #[test]
    fn full_theta_forgets_the_input() {
        let mut rng = SeededRng::new(2);
        let n = 100_000;
        let x: Vec<f64> = (0..n).map(|_| rng.normal(3.0, 2.0)).collect();
        let y = perturb(&x, 1.0, &mut rng).unwrap();
        let (mx, sx) = mean_std(&x).unwrap();
        let (my, sy) = mean_std(&y).unwrap();
        let cov = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - mx) * (b - my))
            .sum::<f64>()
            / (n as f64 - 1.0);
        assert!((cov / (sx * sy)).abs() < 0.01);
        assert!((my - mx).abs() < 0.05 && (sy / sx - 1.0).abs() < 0.02);
    }

    #[test]
    fn perturbation_preserves_spread() {
        let mut rng = SeededRng::new(3);
        let x: Vec<f64> = (0..100_000).map(|_| rng.normal(0.0, 1.5)).collect();
        for theta in [0.3, 0.6] {
            let y = perturb(&x, theta, &mut rng).unwrap();
            let (_, sx) = mean_std(&x).unwrap();
            let (_, sy) = mean_std(&y).unwrap();
            assert!((sy * sy / (sx * sx) - 1.0).abs() < 0.02, "theta {theta}");
        }
    }

    #[test]
    fn format_parsing() {
        let f: FixedPointFormat = "8_4".parse().unwrap();
        assert_eq!(
            (f.word_length(), f.fractional_bits(), f.integer_bits()),
            (8, 4, 4)
        );
        assert_eq!(f.to_string(), "8_4");
        for bad in ["8", "8_8", "8_0", "65_4", "a_b", ""] {
            assert!(bad.parse::<FixedPointFormat>().is_err(), "{bad}");
        }
        assert_eq!(String::from(f), "8_4");
    }

    #[test]
    fn quantize_examples() {
        for f in [fmt(8, 4), fmt(16, 2), fmt(64, 52)] {
            assert_eq!(quantize(0.0, f), 0.0);
        }
        assert_eq!(quantize(0.3, fmt(8, 4)), 0.3125);
        assert_eq!(quantize(1000.0, fmt(8, 4)), 7.9375);
        assert_eq!(quantize(-1000.0, fmt(8, 4)), -8.0);
        // Ties go to the even lattice point.
        assert_eq!(quantize(0.5 / 16.0, fmt(8, 4)), 0.0);
        assert_eq!(quantize(1.5 / 16.0, fmt(8, 4)), 2.0 / 16.0);
    }

    #[test]
    fn fine_format_is_transparent() {
        let f = fmt(64, 52);
        let mut rng = SeededRng::new(4);
        for _ in 0..10_000 {
            let x = rng.uniform_range(-1000.0, 1000.0);
            assert!((quantize(x, f) - x).abs() <= 2f64.powi(-53));
        }
    }

    #[test]
    fn lattice_properties_on_dense_grid() {
        for f in [fmt(12, 2), fmt(14, 4), fmt(16, 6), fmt(18, 8)] {
            let bound = 2f64.powi(-(f.fractional_bits() as i32) - 1);
            let (lo, hi) = (f.min_value(), f.max_value());
            let steps = 200_000;
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=steps {
                let x = lo + (hi - lo) * i as f64 / steps as f64;
                let q = quantize(x, f);
                assert!((q - x).abs() <= bound, "{f} at {x}");
                assert_eq!(quantize(q, f), q);
                assert!(q >= prev);
                prev = q;
            }
        }
    }

    #[test]
    fn quantization_error_is_unbiased() {
        let f = fmt(12, 4);
        let mut rng = SeededRng::new(5);
        let n = 1_000_000;
        let mean: f64 = (0..n)
            .map(|_| {
                let x = rng.uniform_range(-100.0, 100.0);
                quantize(x, f) - x
            })
            .sum::<f64>()
            / n as f64;
        assert!(mean.abs() < 2f64.powi(-4 - 4), "mean error {mean}");
    }

    #[test]
    fn odd_symmetry_inside_range() {
        let f = fmt(10, 3);
        let mut rng = SeededRng::new(6);
        for _ in 0..10_000 {
            let x = rng.uniform_range(0.0, f.max_value());
            assert_eq!(quantize(-x, f), -quantize(x, f));
        }
    }
}
