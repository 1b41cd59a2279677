//! Seeded randomness and the small amount of complex linear algebra the
//! simulator needs.
//!
//! Every random draw in the crate flows through [`SeededRng`]. Streams are
//! ChaCha8 keyed by the experiment seed, with a 64-bit stream selector that
//! [`SeededRng::split`] derives from a text label. Two runs with the same
//! seed therefore see bit-identical draws on every platform.

pub use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Deterministic random stream identified by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

/// Serializable position of a [`SeededRng`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RngState {
    pub seed: u64,
    pub stream_id: u64,
    pub word_pos: u128,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream derived from `(seed, stream_id, label)`. The parent is
    /// not advanced, so splitting twice with the same label yields the same
    /// child.
    pub fn split(&self, label: &str) -> Self {
        assert!(!label.is_empty(), "split label must be non-empty");
        let tag = splitmix64(self.seed ^ splitmix64(self.stream_id ^ fnv1a(label.as_bytes())));
        Self::with_stream(self.seed, tag)
    }

    /// Convenience for per-index streams (`"{label}/{index}"`).
    pub fn split_indexed(&self, label: &str, index: u64) -> Self {
        self.split(&format!("{label}/{index}"))
    }

    pub fn state(&self) -> RngState {
        RngState {
            seed: self.seed,
            stream_id: self.stream_id,
            word_pos: self.inner.get_word_pos(),
        }
    }

    pub fn from_state(state: RngState) -> Self {
        let mut rng = Self::with_stream(state.seed, state.stream_id);
        rng.inner.set_word_pos(state.word_pos);
        rng
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.sample(StandardNormal)
    }

    pub fn normal(&mut self, mean: f64, std: f64) -> f64 {
        mean + std * self.standard_normal()
    }

    /// Circularly-symmetric complex Gaussian with `E|z|^2 = variance`.
    pub fn complex_normal(&mut self, variance: f64) -> Result<Complex64> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::Domain(format!(
                "complex normal variance must be positive, got {variance}"
            )));
        }
        let s = (variance / 2.0).sqrt();
        let re = self.standard_normal();
        let im = self.standard_normal();
        Ok(Complex64::new(s * re, s * im))
    }

    /// Complex normal draw for callers that already validated the variance
    /// (zero variance yields zero).
    pub(crate) fn complex_normal_unchecked(&mut self, variance: f64) -> Complex64 {
        let s = (variance / 2.0).sqrt();
        let re = self.standard_normal();
        let im = self.standard_normal();
        Complex64::new(s * re, s * im)
    }

    pub fn bernoulli(&mut self, p: f64) -> Result<bool> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!(
                "bernoulli probability must lie in [0, 1], got {p}"
            )));
        }
        if p == 0.0 {
            return Ok(false);
        }
        if p == 1.0 {
            return Ok(true);
        }
        Ok(self.uniform() < p)
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..n` (Lemire's unbiased method via `rand`).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        self.random_range(0..n)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries cannot form a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }
}
