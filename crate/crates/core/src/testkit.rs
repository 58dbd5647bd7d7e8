//! Shared helpers for tests and benchmarks: random Hermitian
//! positive-definite matrices, random unitaries, the covariance matrices used
//! throughout the experiments, and Kolmogorov-Smirnov utilities.

use num_complex::Complex64;

use crate::hermitian::HermitianPD;
use crate::sampler::SeededRng;

/// A random complex standard normal entry (variance 1/2 per component).
fn gaussian_entry(rng: &mut SeededRng) -> Complex64 {
    // Box-Muller on the uniform generator keeps this independent from the
    // sampler's own normal path.
    let u1 = rng.gen_unit().max(1e-300);
    let u2 = rng.gen_unit();
    let r = (-2.0 * u1.ln()).sqrt() * 0.5f64.sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(r * phi.cos(), r * phi.sin())
}

/// Random Hermitian positive-definite matrix `G G* + eps I` with
/// `eps = 1e-6 * p`, strictly positive definite by construction.
pub fn random_hpd(p: usize, rng: &mut SeededRng) -> HermitianPD {
    let g: Vec<Complex64> = (0..p * p).map(|_| gaussian_entry(rng)).collect();
    let eps = 1e-6 * p as f64;
    let mut rows = vec![vec![Complex64::ZERO; p]; p];
    for i in 0..p {
        for j in 0..p {
            let mut s = Complex64::ZERO;
            for k in 0..p {
                s += g[i * p + k] * g[j * p + k].conj();
            }
            if i == j {
                s += eps;
            }
            rows[i][j] = s;
        }
    }
    HermitianPD::validate(&rows).expect("G G* + eps I is positive definite")
}

/// Random unitary matrix (row-major) from modified Gram-Schmidt applied to a
/// random complex Gaussian matrix.
pub fn random_unitary(p: usize, rng: &mut SeededRng) -> Vec<Complex64> {
    let mut cols: Vec<Vec<Complex64>> = (0..p)
        .map(|_| (0..p).map(|_| gaussian_entry(rng)).collect())
        .collect();
    for j in 0..p {
        // two-pass re-orthogonalization against earlier columns
        for _ in 0..2 {
            for k in 0..j {
                let proj: Complex64 = (0..p).map(|i| cols[k][i].conj() * cols[j][i]).sum();
                for i in 0..p {
                    let t = proj * cols[k][i];
                    cols[j][i] -= t;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for i in 0..p {
            cols[j][i] /= norm;
        }
    }
    let mut u = vec![Complex64::ZERO; p * p];
    for i in 0..p {
        for j in 0..p {
            u[i * p + j] = cols[j][i];
        }
    }
    u
}

/// The 3x3 forest covariance matrix with a configurable (0,0) entry used in
/// the sensitivity and Monte Carlo studies; only the upper triangle is
/// written out, the rest follows by conjugate symmetry.
pub fn paper_sigma(x: f64) -> HermitianPD {
    let c = Complex64::new;
    HermitianPD::validate(&[
        vec![c(x, 0.0), c(11050.0, 3759.0), c(63896.0, 1581.0)],
        vec![c(11050.0, -3759.0), c(98960.0, 0.0), c(6593.0, 6868.0)],
        vec![c(63896.0, -1581.0), c(6593.0, -6868.0), c(208843.0, 0.0)],
    ])
    .expect("matrix is positive definite for the documented x range")
}

/// The high-brightness (urban) covariance matrix of the synthetic image.
pub fn urban_sigma() -> HermitianPD {
    let c = Complex64::new;
    HermitianPD::validate(&[
        vec![c(962892.0, 0.0), c(19171.0, -3579.0), c(-154638.0, 191388.0)],
        vec![c(19171.0, 3579.0), c(56707.0, 0.0), c(-5798.0, 16812.0)],
        vec![c(-154638.0, -191388.0), c(-5798.0, -16812.0), c(472251.0, 0.0)],
    ])
    .expect("matrix is positive definite")
}

/// The low-brightness (pasture) covariance matrix of the synthetic image.
pub fn pasture_sigma() -> HermitianPD {
    let c = Complex64::new;
    HermitianPD::validate(&[
        vec![c(32556.0, 0.0), c(556.0, 787.0), c(24046.0, -27287.0)],
        vec![c(556.0, -787.0), c(1647.0, 0.0), c(-146.0, -482.0)],
        vec![c(24046.0, 27287.0), c(-146.0, 482.0), c(61028.0, 0.0)],
    ])
    .expect("matrix is positive definite")
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_statistic_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|u, v| u.partial_cmp(v).unwrap());
    xb.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xa.len() && j < xb.len() {
        // advance past ties in both samples before measuring
        let v = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] == v {
            i += 1;
        }
        while j < xb.len() && xb[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic two-sample KS rejection threshold at level `alpha`.
pub fn ks_threshold_two_sample(na: usize, nb: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((na + nb) as f64 / (na as f64 * nb as f64)).sqrt()
}

/// One-sample KS statistic against a CDF.
pub fn ks_statistic_one_sample<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let n = s.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Asymptotic one-sample KS rejection threshold at level `alpha`.
pub fn ks_threshold_one_sample(n: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = SeededRng::new(4, 0);
        for p in 1..=4 {
            let u = random_unitary(p, &mut rng);
            for i in 0..p {
                for j in 0..p {
                    let mut s = Complex64::ZERO;
                    for k in 0..p {
                        s += u[i * p + k] * u[j * p + k].conj();
                    }
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((s - want).norm() < 1e-12, "p={p} ({i},{j}) -> {s}");
                }
            }
        }
    }

    #[test]
    fn paper_matrices_are_pd_over_documented_grid() {
        for i in 0..=80 {
            let x = 160_000.0 + i as f64 * 5000.0;
            let _ = paper_sigma(x);
        }
        let _ = urban_sigma();
        let _ = pasture_sigma();
    }

    #[test]
    fn ks_two_sample_zero_for_identical() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!(ks_statistic_two_sample(&a, &a) <= 1e-12);
        let b = [10.0, 11.0, 12.0, 13.0];
        assert!((ks_statistic_two_sample(&a, &b) - 1.0).abs() <= 1e-12);
    }
}
