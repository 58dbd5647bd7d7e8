//! Draws from the multivariate complex circular Gaussian and from the relaxed
//! scaled complex Wishart distributions, with deterministic substream seeding
//! for reproducible (and embarrassingly parallel) Monte Carlo.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::hermitian::HermitianPD;
use crate::wishart::WishartParams;
use crate::{Error, Result};

/// A seeded random generator with an independent substream id.
///
/// Identical `(seed, stream)` pairs reproduce identical draw sequences
/// bit-for-bit; distinct stream ids give statistically independent sequences,
/// which is what lets Monte Carlo replicas run in parallel and still merge
/// into the exact serial result.
pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        SeededRng { inner }
    }

    /// Derives the substream id for replica `replica` of cell `cell`
    /// (SplitMix64 finalizer over the packed pair).
    pub fn stream_for(cell: u64, replica: u64) -> u64 {
        let mut z = cell
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(replica)
            .wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    #[inline]
    fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// A standard circular complex Gaussian: each real component is
    /// N(0, 1/2), so `E |z|^2 = 1`.
    #[inline]
    fn standard_complex(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(s * self.standard_normal(), s * self.standard_normal())
    }

    fn gamma(&mut self, shape: f64) -> Result<f64> {
        let g = Gamma::new(shape, 1.0)
            .map_err(|e| Error::Domain(format!("gamma shape {shape}: {e}")))?;
        Ok(g.sample(&mut self.inner))
    }

    pub fn gen_u64(&mut self) -> u64 {
        self.inner.random()
    }

    /// Uniform draw in `[0, bound)`; used for seeded index selection.
    pub fn gen_index(&mut self, bound: usize) -> usize {
        self.inner.random_range(0..bound)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn gen_unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }
}

/// One zero-mean circular complex Gaussian vector with covariance `sigma`:
/// `y = T u` where `T` is the Cholesky factor and `u` has iid standard
/// complex entries, so `E[y y*] = sigma`.
pub fn sample_gaussian_vector(sigma: &HermitianPD, rng: &mut SeededRng) -> Result<Vec<Complex64>> {
    let t = sigma.cholesky()?;
    let u: Vec<Complex64> = (0..sigma.dim()).map(|_| rng.standard_complex()).collect();
    Ok(t.mul_vector(&u))
}

/// The `L`-look sample covariance `Z = (1/L) sum y_i y_i*`, distributed as
/// the scaled complex Wishart `W(sigma, L)`.
///
/// `L >= p` makes the average positive definite almost surely; the
/// measure-zero degenerate draw is re-drawn once and then reported.
pub fn sample_wishart_multilook(
    sigma: &HermitianPD,
    looks: u32,
    rng: &mut SeededRng,
) -> Result<HermitianPD> {
    let p = sigma.dim();
    if (looks as usize) < p {
        return Err(Error::Domain(format!(
            "multilook sampling needs L >= p; got L = {looks}, p = {p}"
        )));
    }
    for _attempt in 0..2 {
        let mut acc = vec![Complex64::ZERO; p * p];
        for _ in 0..looks {
            let y = sample_gaussian_vector(sigma, rng)?;
            for i in 0..p {
                for j in 0..p {
                    acc[i * p + j] += y[i] * y[j].conj();
                }
            }
        }
        let inv = 1.0 / looks as f64;
        for v in &mut acc {
            *v *= inv;
        }
        for i in 0..p {
            acc[i * p + i].im = 0.0;
        }
        match HermitianPD::from_hermitian_parts(p, acc) {
            Ok(z) => return Ok(z),
            Err(_) => continue,
        }
    }
    Err(Error::NotPositiveDefinite { pivot: 1 })
}

/// One draw from the relaxed model `W_R(sigma, n)` for real `n > p - 1`,
/// via the complex Bartlett decomposition:
/// `Z = (1/n) A T T* A*` with `A = chol(sigma)`, `T[i][i]^2 ~ Gamma(n - i, 1)`
/// and strictly-lower entries iid standard complex Gaussian.
pub fn sample_wishart_relaxed(theta: &WishartParams, rng: &mut SeededRng) -> Result<HermitianPD> {
    let p = theta.dim();
    let n = theta.looks();
    let a = theta.sigma().cholesky()?;
    let mut t = vec![Complex64::ZERO; p * p];
    for i in 0..p {
        for j in 0..i {
            t[i * p + j] = rng.standard_complex();
        }
        let d = rng.gamma(n - i as f64)?;
        t[i * p + i] = Complex64::new(d.sqrt(), 0.0);
    }
    // B = A T (both lower triangular)
    let b = a.mul_matrix(&t);
    // Z = (1/n) B B*
    let mut z = vec![Complex64::ZERO; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut s = Complex64::ZERO;
            for k in 0..p {
                s += b[i * p + k] * b[j * p + k].conj();
            }
            s /= n;
            if i == j {
                z[i * p + i] = Complex64::new(s.re, 0.0);
            } else {
                z[i * p + j] = s;
                z[j * p + i] = s.conj();
            }
        }
    }
    HermitianPD::from_hermitian_parts(p, z)
}
