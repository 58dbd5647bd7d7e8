//! k-means over covariance images with stochastic distances as the
//! dissimilarity, and the three-class synthetic image used to exercise it.
//!
//! Pixels and centroids are compared with the equal-looks form of the chosen
//! distance at the image's number of looks. Iterations stop when the label
//! map stops changing (the indicator-sum convergence measure hits zero) or
//! at `max_iter`.

use rayon::prelude::*;

use crate::distances::{bartlett_distance, DistanceKind};
use crate::hermitian::HermitianPD;
use crate::sampler::{sample_wishart_relaxed, SeededRng};
use crate::wishart::WishartParams;
use crate::{Error, Result};

/// A raster of Hermitian positive-definite covariance pixels with a shared
/// equivalent number of looks.
#[derive(Debug, Clone)]
pub struct CovarianceImage {
    height: usize,
    width: usize,
    p: usize,
    looks: f64,
    pixels: Vec<HermitianPD>,
}

impl CovarianceImage {
    pub fn new(
        height: usize,
        width: usize,
        looks: f64,
        pixels: Vec<HermitianPD>,
    ) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Domain("image dimensions must be positive".into()));
        }
        if pixels.len() != height * width {
            return Err(Error::DimensionMismatch {
                expected: height * width,
                found: pixels.len(),
            });
        }
        let p = pixels[0].dim();
        for px in &pixels {
            if px.dim() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: px.dim(),
                });
            }
        }
        if !(looks > p as f64 - 1.0) {
            return Err(Error::Domain(format!(
                "looks must exceed p - 1 = {}, got {looks}",
                p - 1
            )));
        }
        Ok(CovarianceImage {
            height,
            width,
            p,
            looks,
            pixels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn looks(&self) -> f64 {
        self.looks
    }

    pub fn pixels(&self) -> &[HermitianPD] {
        &self.pixels
    }

    pub fn pixel(&self, row: usize, col: usize) -> &HermitianPD {
        &self.pixels[row * self.width + col]
    }
}

/// How the initial centroids are chosen.
///
/// `FarthestLocalMeans` picks a uniform random position (seeded) and then
/// `k - 1` more by farthest-point refinement over the field of 3x3 local
/// window means, measured with the revised Wishart distance. Window means
/// damp single-pixel speckle enough that the spread criterion resolves
/// classes whose covariances differ far less than the per-pixel noise; the
/// criterion is measure-independent, so runs with the same seed start from
/// identical centroids whichever distance drives the assignment step.
///
/// `RandomPixels` draws all k centroids uniformly among pixels. On imagery
/// with few, internally homogeneous classes it regularly places two seeds
/// in one class and converges to a merged-cluster solution, so it is not
/// the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMethod {
    RandomPixels,
    FarthestLocalMeans,
}

/// Final state of a k-means run.
#[derive(Debug, Clone)]
pub struct ClusterState {
    pub k: usize,
    pub centroids: Vec<HermitianPD>,
    /// Row-major labels in `[0, k)`.
    pub labels: Vec<usize>,
    /// Number of update/assign rounds performed.
    pub iterations: usize,
    pub converged: bool,
}

/// Precomputed per-matrix quantities for the equal-looks distance kernels.
#[derive(Clone)]
struct Cached {
    mat: HermitianPD,
    inv: HermitianPD,
    ld: f64,
}

impl Cached {
    fn of(mat: &HermitianPD) -> Result<Cached> {
        Ok(Cached {
            inv: mat.inverse()?,
            ld: mat.logdet()?,
            mat: mat.clone(),
        })
    }
}

fn pair_distance(kind: DistanceKind, n: f64, a: &Cached, b: &Cached) -> Result<f64> {
    let p = a.mat.dim() as f64;
    let tr_pair = || -> Result<f64> {
        Ok(crate::hermitian::trace_product(&b.inv, &a.mat)?.re
            + crate::hermitian::trace_product(&a.inv, &b.mat)?.re)
    };
    let bhatt = || -> Result<f64> {
        let mid = HermitianPD::linear_combination(0.5, &a.inv, 0.5, &b.inv)?;
        Ok(n * ((a.ld + b.ld) / 2.0 + mid.logdet()?))
    };
    match kind {
        DistanceKind::Kl => Ok(n * (tr_pair()? / 2.0 - p)),
        DistanceKind::Bhattacharyya => bhatt(),
        DistanceKind::Hellinger => Ok(-(-bhatt()?).exp_m1()),
        DistanceKind::Renyi { beta } => {
            let c12 = HermitianPD::linear_combination(beta, &a.inv, 1.0 - beta, &b.inv)?;
            let c21 = HermitianPD::linear_combination(beta, &b.inv, 1.0 - beta, &a.inv)?;
            let l1 = n * (-c12.logdet()? - beta * a.ld - (1.0 - beta) * b.ld);
            let l2 = n * (-c21.logdet()? - beta * b.ld - (1.0 - beta) * a.ld);
            let (hi, lo) = if l1 >= l2 { (l1, l2) } else { (l2, l1) };
            Ok((hi + (lo - hi).exp().ln_1p() - std::f64::consts::LN_2) / (beta - 1.0))
        }
        DistanceKind::Bartlett => bartlett_distance(&a.mat, &b.mat),
        DistanceKind::RevisedWishart => Ok(tr_pair()? / 2.0 - p),
    }
}

fn cache_all(mats: &[HermitianPD]) -> Result<Vec<Cached>> {
    mats.iter().map(Cached::of).collect()
}

fn cache_pixels(img: &CovarianceImage) -> Result<Vec<Cached>> {
    img.pixels()
        .iter()
        .enumerate()
        .map(|(idx, px)| {
            Cached::of(px).map_err(|e| match e {
                Error::NotPositiveDefinite { .. } => Error::Domain(format!(
                    "degenerate pixel at row {}, col {}: {e}",
                    idx / img.width(),
                    idx % img.width()
                )),
                other => other,
            })
        })
        .collect()
}

fn assign_cached(
    pixels: &[Cached],
    centroids: &[Cached],
    kind: DistanceKind,
    n: f64,
) -> Result<Vec<usize>> {
    pixels
        .par_iter()
        .map(|px| {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (ci, c) in centroids.iter().enumerate() {
                let d = pair_distance(kind, n, px, c)?;
                // ties break toward the lowest centroid index
                if d < best_d {
                    best_d = d;
                    best = ci;
                }
            }
            Ok(best)
        })
        .collect()
}

/// Assigns every pixel to the centroid minimizing the equal-looks distance
/// at the image's number of looks; ties break toward the lowest index.
pub fn assign(
    img: &CovarianceImage,
    centroids: &[HermitianPD],
    kind: DistanceKind,
) -> Result<Vec<usize>> {
    if centroids.is_empty() {
        return Err(Error::Domain("at least one centroid is required".into()));
    }
    for c in centroids {
        if c.dim() != img.dim() {
            return Err(Error::DimensionMismatch {
                expected: img.dim(),
                found: c.dim(),
            });
        }
    }
    let pixel_cache = cache_pixels(img)?;
    let centroid_cache = cache_all(centroids)?;
    assign_cached(&pixel_cache, &centroid_cache, kind, img.looks())
}

/// Recomputes each centroid as the entrywise mean of its cluster. Empty
/// clusters keep their previous centroid; the returned flags mark them.
pub fn update_centroids(
    img: &CovarianceImage,
    labels: &[usize],
    previous: &[HermitianPD],
) -> Result<(Vec<HermitianPD>, Vec<bool>)> {
    let k = previous.len();
    if labels.len() != img.pixels().len() {
        return Err(Error::DimensionMismatch {
            expected: img.pixels().len(),
            found: labels.len(),
        });
    }
    let p = img.dim();
    let mut sums = vec![vec![num_complex::Complex64::ZERO; p * p]; k];
    let mut counts = vec![0usize; k];
    for (px, &lab) in img.pixels().iter().zip(labels) {
        if lab >= k {
            return Err(Error::Domain(format!("label {lab} out of range for k = {k}")));
        }
        counts[lab] += 1;
        let acc = &mut sums[lab];
        for i in 0..p {
            for j in 0..p {
                acc[i * p + j] += px.get(i, j);
            }
        }
    }
    let mut out = Vec::with_capacity(k);
    let mut empty = Vec::with_capacity(k);
    for c in 0..k {
        if counts[c] == 0 {
            out.push(previous[c].clone());
            empty.push(true);
        } else {
            let inv = 1.0 / counts[c] as f64;
            let rows: Vec<Vec<num_complex::Complex64>> = (0..p)
                .map(|i| (0..p).map(|j| sums[c][i * p + j] * inv).collect())
                .collect();
            out.push(HermitianPD::validate(&rows)?);
            empty.push(false);
        }
    }
    Ok((out, empty))
}

/// The indicator-sum convergence measure: each pixel whose label changed
/// flips two indicator terms, so the value is twice the changed-pixel count.
pub fn convergence_measure(labels: &[usize], previous: &[usize]) -> Result<usize> {
    if labels.len() != previous.len() {
        return Err(Error::DimensionMismatch {
            expected: previous.len(),
            found: labels.len(),
        });
    }
    Ok(2 * labels
        .iter()
        .zip(previous)
        .filter(|(a, b)| a != b)
        .count())
}

/// `tr(A B^{-1} + B A^{-1})/2 - p` between two cached matrices; the spread
/// criterion of the farthest-point initialization.
fn rw_cached(a: &Cached, b: &Cached) -> Result<f64> {
    let p = a.mat.dim() as f64;
    Ok((crate::hermitian::trace_product(&a.mat, &b.inv)?.re
        + crate::hermitian::trace_product(&b.mat, &a.inv)?.re)
        / 2.0
        - p)
}

/// Entrywise mean of the (up to) 3x3 window centered at `(row, col)`,
/// clamped to the image bounds.
fn local_window_mean(img: &CovarianceImage, row: usize, col: usize) -> Result<HermitianPD> {
    let p = img.dim();
    let r0 = row.saturating_sub(1);
    let r1 = (row + 1).min(img.height() - 1);
    let c0 = col.saturating_sub(1);
    let c1 = (col + 1).min(img.width() - 1);
    let mut acc = vec![num_complex::Complex64::ZERO; p * p];
    let mut count = 0.0;
    for r in r0..=r1 {
        for c in c0..=c1 {
            let px = img.pixel(r, c);
            for i in 0..p {
                for j in 0..p {
                    acc[i * p + j] += px.get(i, j);
                }
            }
            count += 1.0;
        }
    }
    for v in &mut acc {
        *v /= count;
    }
    HermitianPD::from_hermitian_parts(p, acc)
}

fn init_centroids(
    img: &CovarianceImage,
    pixels: &[Cached],
    k: usize,
    method: InitMethod,
    rng: &mut SeededRng,
) -> Result<Vec<Cached>> {
    let total = pixels.len();
    match method {
        InitMethod::RandomPixels => {
            // k distinct pixel positions, uniform
            let mut chosen: Vec<usize> = Vec::with_capacity(k);
            while chosen.len() < k {
                let idx = rng.gen_index(total);
                if !chosen.contains(&idx) {
                    chosen.push(idx);
                }
            }
            chosen.into_iter().map(|i| Cached::of(&pixels[i].mat)).collect()
        }
        InitMethod::FarthestLocalMeans => {
            let means: Vec<Cached> = (0..total)
                .into_par_iter()
                .map(|i| {
                    let m = local_window_mean(img, i / img.width(), i % img.width())?;
                    Cached::of(&m)
                })
                .collect::<Result<_>>()?;
            let first = rng.gen_index(total);
            let mut chosen = vec![first];
            let mut nearest: Vec<f64> = means
                .iter()
                .map(|m| rw_cached(m, &means[first]))
                .collect::<Result<_>>()?;
            while chosen.len() < k {
                let next = nearest
                    .iter()
                    .enumerate()
                    .max_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
                    .map(|(i, _)| i)
                    .unwrap();
                chosen.push(next);
                for (i, m) in means.iter().enumerate() {
                    let d = rw_cached(m, &means[next])?;
                    if d < nearest[i] {
                        nearest[i] = d;
                    }
                }
            }
            Ok(chosen.into_iter().map(|i| means[i].clone()).collect())
        }
    }
}

/// Runs k-means with the chosen stochastic distance until the label map
/// stops changing or `max_iter` update/assign rounds have run.
pub fn kmeans(
    img: &CovarianceImage,
    k: usize,
    kind: DistanceKind,
    seed: u64,
    max_iter: usize,
    init: InitMethod,
) -> Result<ClusterState> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if max_iter == 0 {
        return Err(Error::Domain("max_iter must be at least 1".into()));
    }
    if k > img.pixels().len() {
        return Err(Error::InsufficientSample {
            needed: k,
            available: img.pixels().len(),
        });
    }
    let n = img.looks();
    let pixel_cache = cache_pixels(img)?;
    let mut rng = SeededRng::new(seed, 0);
    let mut centroids = init_centroids(img, &pixel_cache, k, init, &mut rng)?;
    let mut labels = assign_cached(&pixel_cache, &centroids, kind, n)?;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let plain: Vec<HermitianPD> = centroids.iter().map(|c| c.mat.clone()).collect();
        let (next, _empty) = update_centroids(img, &labels, &plain)?;
        centroids = cache_all(&next)?;
        let next_labels = assign_cached(&pixel_cache, &centroids, kind, n)?;
        let h = convergence_measure(&next_labels, &labels)?;
        labels = next_labels;
        iterations += 1;
        if h == 0 {
            converged = true;
            break;
        }
    }
    Ok(ClusterState {
        k,
        centroids: centroids.into_iter().map(|c| c.mat).collect(),
        labels,
        iterations,
        converged,
    })
}

/// Synthetic image dimensions and look count.
pub const SYNTH_HEIGHT: usize = 75;
pub const SYNTH_WIDTH: usize = 80;
pub const SYNTH_LOOKS: f64 = 12.0;

/// The three class covariances of the synthetic image, ordered low,
/// intermediate, high brightness.
pub fn synth_classes() -> [HermitianPD; 3] {
    [
        crate::testkit::pasture_sigma(),
        crate::testkit::paper_sigma(360_932.0),
        crate::testkit::urban_sigma(),
    ]
}

/// Generates the 75 x 80 three-class synthetic image: ten rectangular
/// regions in a 2-row by 5-column grid (row heights 37 and 38, column width
/// 16) cycling the low/intermediate/high classes in row-major block order,
/// every pixel drawn iid from the relaxed Wishart law at 12 looks.
/// Returns the image together with its ground-truth class labels.
pub fn synth_image(seed: u64) -> Result<(CovarianceImage, Vec<usize>)> {
    let classes = synth_classes();
    let thetas: Vec<WishartParams> = classes
        .iter()
        .map(|s| WishartParams::new(s.clone(), SYNTH_LOOKS))
        .collect::<Result<_>>()?;
    let row_heights = [37usize, 38];
    let col_width = SYNTH_WIDTH / 5;
    let mut truth = vec![0usize; SYNTH_HEIGHT * SYNTH_WIDTH];
    for row in 0..SYNTH_HEIGHT {
        let block_row = if row < row_heights[0] { 0 } else { 1 };
        for col in 0..SYNTH_WIDTH {
            let block_col = (col / col_width).min(4);
            let block = block_row * 5 + block_col;
            truth[row * SYNTH_WIDTH + col] = block % 3;
        }
    }
    let mut rng = SeededRng::new(seed, 0);
    let pixels: Vec<HermitianPD> = truth
        .iter()
        .map(|&class| sample_wishart_relaxed(&thetas[class], &mut rng))
        .collect::<Result<_>>()?;
    let img = CovarianceImage::new(SYNTH_HEIGHT, SYNTH_WIDTH, SYNTH_LOOKS, pixels)?;
    Ok((img, truth))
}

/// Fraction of pixels whose label matches the truth under the best label
/// permutation (exhaustive; intended for small k).
pub fn permutation_accuracy(labels: &[usize], truth: &[usize], k: usize) -> Result<f64> {
    if labels.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: labels.len(),
        });
    }
    if k > 8 {
        return Err(Error::Domain(
            "exhaustive permutation alignment is limited to k <= 8".into(),
        ));
    }
    // confusion[i][j]: pixels with predicted label i and true label j
    let mut confusion = vec![vec![0usize; k]; k];
    for (&l, &t) in labels.iter().zip(truth) {
        confusion[l][t] += 1;
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0usize;
    permute(&mut perm, 0, &mut |p| {
        let hits: usize = (0..k).map(|i| confusion[i][p[i]]).sum();
        if hits > best {
            best = hits;
        }
    });
    Ok(best as f64 / labels.len() as f64)
}

fn permute(perm: &mut Vec<usize>, at: usize, visit: &mut impl FnMut(&[usize])) {
    if at == perm.len() {
        visit(perm);
        return;
    }
    for i in at..perm.len() {
        perm.swap(at, i);
        permute(perm, at + 1, visit);
        perm.swap(at, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::paper_sigma;

    fn constant_image(value: &HermitianPD, h: usize, w: usize) -> CovarianceImage {
        CovarianceImage::new(h, w, 12.0, vec![value.clone(); h * w]).unwrap()
    }

    #[test]
    fn assign_k1_and_exact_match() {
        let a = paper_sigma(360_932.0);
        let img = constant_image(&a, 4, 5);
        let labels = assign(&img, &[a.clone()], DistanceKind::Kl).unwrap();
        assert!(labels.iter().all(|&l| l == 0));

        let b = crate::testkit::urban_sigma();
        let labels = assign(&img, &[b, a.clone()], DistanceKind::Bhattacharyya).unwrap();
        assert!(labels.iter().all(|&l| l == 1), "pixel equals centroid 1");
    }

    #[test]
    fn update_centroids_means_and_empty_policy() {
        let a = paper_sigma(360_932.0);
        let img = constant_image(&a, 2, 2);
        let labels = vec![0, 0, 0, 0];
        let prev = vec![a.clone(), crate::testkit::urban_sigma()];
        let (cents, empty) = update_centroids(&img, &labels, &prev).unwrap();
        assert_eq!(empty, vec![false, true]);
        assert!(cents[0].frobenius_distance(&a).unwrap() <= 1e-9);
        // empty cluster kept its previous centroid
        assert!(cents[1]
            .frobenius_distance(&crate::testkit::urban_sigma())
            .unwrap()
            .abs()
            <= 1e-12);
    }

    #[test]
    fn convergence_measure_counts_flips() {
        assert_eq!(convergence_measure(&[1, 2, 3], &[1, 2, 3]).unwrap(), 0);
        assert_eq!(convergence_measure(&[1, 2, 3], &[1, 0, 3]).unwrap(), 2);
        assert_eq!(convergence_measure(&[0, 0], &[1, 1]).unwrap(), 4);
        assert!(convergence_measure(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn kmeans_converges_in_one_round_on_separated_constants() {
        let a = crate::testkit::pasture_sigma();
        let b = crate::testkit::urban_sigma();
        let mut pixels = vec![a.clone(); 10];
        pixels.extend(vec![b.clone(); 10]);
        let img = CovarianceImage::new(4, 5, 12.0, pixels).unwrap();
        let state = kmeans(
            &img,
            2,
            DistanceKind::Hellinger,
            3,
            50,
            InitMethod::FarthestLocalMeans,
        )
        .unwrap();
        assert!(state.converged);
        assert_eq!(state.iterations, 1);
        let acc = permutation_accuracy(
            &state.labels,
            &[vec![0usize; 10], vec![1usize; 10]].concat(),
            2,
        )
        .unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn kmeans_rejects_zero_iterations() {
        let img = constant_image(&paper_sigma(360_932.0), 2, 2);
        assert!(kmeans(
            &img,
            1,
            DistanceKind::Kl,
            1,
            0,
            InitMethod::FarthestLocalMeans
        )
        .is_err());
    }

    #[test]
    fn synth_image_shape_and_determinism() {
        let (img, truth) = synth_image(17).unwrap();
        assert_eq!(img.height(), 75);
        assert_eq!(img.width(), 80);
        assert_eq!(img.dim(), 3);
        assert_eq!(img.looks(), 12.0);
        assert_eq!(truth.len(), 6000);
        // all three classes present
        for c in 0..3 {
            assert!(truth.iter().any(|&t| t == c));
        }
        let (img2, truth2) = synth_image(17).unwrap();
        assert_eq!(truth, truth2);
        for (a, b) in img.pixels().iter().zip(img2.pixels()) {
            assert_eq!(a.get(0, 1), b.get(0, 1));
        }
        let (img3, _) = synth_image(18).unwrap();
        assert_ne!(img.pixel(0, 0).get(0, 0), img3.pixel(0, 0).get(0, 0));
    }

    #[test]
    fn synth_image_region_means_near_class_sigmas() {
        let (img, truth) = synth_image(5).unwrap();
        let classes = synth_classes();
        for c in 0..3 {
            let members: Vec<HermitianPD> = truth
                .iter()
                .zip(img.pixels())
                .filter(|(&t, _)| t == c)
                .map(|(_, px)| px.clone())
                .collect();
            let mean = crate::wishart::estimate_sigma(
                &crate::wishart::SampleSet::new(members).unwrap(),
            )
            .unwrap();
            let rel = mean.frobenius_distance(&classes[c]).unwrap() / classes[c].frobenius_norm();
            assert!(rel < 0.05, "class {c} relative error {rel}");
        }
    }

    #[test]
    fn permutation_accuracy_examples() {
        assert_eq!(
            permutation_accuracy(&[0, 0, 1, 1], &[1, 1, 0, 0], 2).unwrap(),
            1.0
        );
        assert_eq!(
            permutation_accuracy(&[0, 1, 0, 1], &[0, 0, 1, 1], 2).unwrap(),
            0.5
        );
    }

    #[test]
    fn bhattacharyya_and_hellinger_assignments_coincide() {
        let (img, _) = synth_image(23).unwrap();
        let classes = synth_classes();
        let cents: Vec<HermitianPD> = classes.to_vec();
        let lb = assign(&img, &cents, DistanceKind::Bhattacharyya).unwrap();
        let lh = assign(&img, &cents, DistanceKind::Hellinger).unwrap();
        assert_eq!(lb, lh);
    }
}
