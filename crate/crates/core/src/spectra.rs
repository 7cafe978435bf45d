//! Complex transforms, pilot sequences and the seeded random streams used by
//! every simulation path.
//!
//! Transform convention: the forward DFT is unnormalized,
//! `X[k] = sum_i x[i] exp(-j 2 pi i k / n)`, and the inverse carries `1/n`.
//! A channel frequency response is therefore the plain DFT of its impulse
//! response.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type ComplexVec = Vec<Complex64>;
pub type ComplexMat = DMatrix<Complex64>;

/// Generator behind every [`RngStream`]: ChaCha with 8 rounds, which is
/// counter based and produces the same words on every platform.
pub type SimRng = ChaCha8Rng;

/// A reproducible source of randomness identified by `(seed, stream)`.
///
/// The ChaCha key is derived from `seed` (via `SeedableRng::seed_from_u64`)
/// and `stream` selects the ChaCha stream, so distinct stream ids never
/// overlap. Monte Carlo realization `r` uses stream id `r`; [`RngStream::fork`]
/// derives labelled sub-streams (noise, randomization, ...) from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn generator(&self) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Sub-stream for a given purpose. Same stream id, key mixed with `label`.
    pub fn fork(&self, label: u64) -> RngStream {
        RngStream {
            seed: splitmix64(self.seed ^ splitmix64(label.wrapping_add(0x5851_f42d_4c95_7f2d))),
            stream: self.stream,
        }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `exp(-j 2 pi k / size)` for `k in 0..size`.
pub(crate) fn twiddles(size: usize) -> Vec<Complex64> {
    (0..size)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / size as f64))
        .collect()
}

fn transform(x: &[Complex64], size: usize, inverse: bool) -> Result<ComplexVec> {
    if size == 0 {
        return Err(Error::parameter("size", "transform size must be positive"));
    }
    Error::check_len("dft input", size, x.len())?;
    let w = twiddles(size);
    let scale = if inverse { 1.0 / size as f64 } else { 1.0 };
    let out = (0..size)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut idx = 0usize;
            for &xi in x {
                let t = w[idx];
                acc += xi * if inverse { t.conj() } else { t };
                idx += k;
                if idx >= size {
                    idx -= size;
                }
            }
            acc * scale
        })
        .collect();
    Ok(out)
}

/// Unnormalized forward DFT.
pub fn dft(x: &[Complex64], size: usize) -> Result<ComplexVec> {
    transform(x, size, false)
}

/// Inverse DFT with `1/size` scaling.
pub fn idft(x: &[Complex64], size: usize) -> Result<ComplexVec> {
    transform(x, size, true)
}

/// `size x size` DFT matrix with entries `exp(-j 2 pi i k / size)`.
pub fn dft_matrix(size: usize) -> ComplexMat {
    let w = twiddles(size);
    DMatrix::from_fn(size, size, |i, k| w[(i * k) % size])
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Zadoff-Chu sequence of the given length and root.
pub fn zadoff_chu(length: usize, root: usize) -> Result<ComplexVec> {
    if length == 0 {
        return Err(Error::parameter("length", "must be positive"));
    }
    if root == 0 || gcd(root, length) != 1 {
        return Err(Error::parameter(
            "root",
            format!("root {root} is not coprime with length {length}"),
        ));
    }
    let n = length as u128;
    let u = root as u128;
    let odd = length % 2 == 1;
    Ok((0..n)
        .map(|k| {
            // Reduce the exponent modulo 2n exactly before going to floats.
            let quad = if odd { k * (k + 1) } else { k * k };
            let e = (u * quad) % (2 * n);
            Complex64::from_polar(1.0, -PI * e as f64 / n as f64)
        })
        .collect())
}

/// `n` i.i.d. circularly-symmetric complex Gaussian samples of total variance
/// `variance` (each quadrature carries half).
pub fn gaussian_complex<R: Rng + ?Sized>(n: usize, variance: f64, rng: &mut R) -> ComplexVec {
    let sigma = (variance / 2.0).sqrt();
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(sigma * re, sigma * im)
        })
        .collect()
}

/// Squared Euclidean norm.
pub fn norm_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn impulse_transforms_to_ones() {
        let x = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert!(close(&dft(&x, 4).unwrap(), &[c(1.0, 0.0); 4], 1e-15));
    }

    #[test]
    fn ones_transform_to_impulse_and_back() {
        let ones = vec![c(1.0, 0.0); 4];
        let spike = vec![c(4.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert!(close(&dft(&ones, 4).unwrap(), &spike, 1e-14));
        assert!(close(&idft(&spike, 4).unwrap(), &ones, 1e-15));
        let e0 = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert!(close(&idft(&ones, 4).unwrap(), &e0, 1e-15));
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let x = vec![c(1.0, 0.0); 3];
        assert!(matches!(dft(&x, 4), Err(Error::Dimension { .. })));
        assert!(matches!(idft(&x, 4), Err(Error::Dimension { .. })));
        assert!(matches!(dft(&[], 0), Err(Error::Parameter { .. })));
    }

    #[test]
    fn parseval_random_size_8() {
        let mut rng = RngStream::new(3, 0).generator();
        let x = gaussian_complex(8, 1.0, &mut rng);
        let big = dft(&x, 8).unwrap();
        let ratio = norm_sqr(&big) / (8.0 * norm_sqr(&x));
        assert!((ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn round_trip_length_16() {
        let mut rng = RngStream::new(4, 1).generator();
        let x = gaussian_complex(16, 1.0, &mut rng);
        let back = idft(&dft(&x, 16).unwrap(), 16).unwrap();
        assert!(close(&back, &x, 1e-12 * norm_sqr(&x).sqrt()));
    }

    #[test]
    fn dft_matrix_matches_transform() {
        let mut rng = RngStream::new(5, 0).generator();
        let x = gaussian_complex(6, 1.0, &mut rng);
        let via_mat = dft_matrix(6) * nalgebra::DVector::from_column_slice(&x);
        assert!(close(via_mat.as_slice(), &dft(&x, 6).unwrap(), 1e-13));
    }

    #[test]
    fn zadoff_chu_first_entry_and_modulus() {
        let zc = zadoff_chu(8, 1).unwrap();
        assert_eq!(zc[0], c(1.0, 0.0));
        for (len, root) in [(8, 1), (8, 3), (63, 5), (64, 7), (139, 25)] {
            for v in zadoff_chu(len, root).unwrap() {
                assert!((v.norm() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zadoff_chu_zero_autocorrelation_length_8() {
        // Brute-force periodic autocorrelation over all seven nonzero lags.
        let zc = zadoff_chu(8, 1).unwrap();
        for lag in 1..8 {
            let acc: Complex64 = (0..8).map(|k| zc[k] * zc[(k + lag) % 8].conj()).sum();
            assert!(acc.norm() < 1e-10, "lag {lag}: {acc}");
        }
    }

    #[test]
    fn zadoff_chu_rejects_non_coprime_root() {
        assert!(matches!(
            zadoff_chu(8, 2),
            Err(Error::Parameter { name: "root", .. })
        ));
        assert!(zadoff_chu(8, 0).is_err());
    }

    #[test]
    fn gaussian_zero_variance_is_zero() {
        let mut rng = RngStream::new(1, 1).generator();
        assert!(gaussian_complex(32, 0.0, &mut rng)
            .iter()
            .all(|v| *v == c(0.0, 0.0)));
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = RngStream::new(11, 0).generator();
        let n = 100_000;
        let x = gaussian_complex(n, 2.0, &mut rng);
        let mean: Complex64 = x.iter().sum::<Complex64>() / n as f64;
        let var = x.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / n as f64;
        assert!(mean.norm() < 0.02);
        assert!((1.96..=2.04).contains(&var), "variance {var}");
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a = gaussian_complex(16, 1.0, &mut RngStream::new(9, 2).generator());
        let b = gaussian_complex(16, 1.0, &mut RngStream::new(9, 2).generator());
        let other = gaussian_complex(16, 1.0, &mut RngStream::new(9, 3).generator());
        let forked = gaussian_complex(16, 1.0, &mut RngStream::new(9, 2).fork(1).generator());
        assert_eq!(a, b);
        assert_ne!(a, other);
        assert_ne!(a, forked);
    }
}
