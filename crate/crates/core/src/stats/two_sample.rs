//! Weighted energy-distance permutation tests, a weighted chi-square test,
//! and Kolmogorov–Smirnov helpers.

use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};

/// Statistic, permutation p-value, and the permutation quantile at a level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PermutationResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Empirical `1 - alpha` quantile of the permutation statistics.
    pub threshold: f64,
}

fn check_weights(w: &[f64]) -> Result<f64> {
    if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidWeight(w.iter().copied().find(|x| !(x.is_finite() && *x >= 0.0)).unwrap_or(0.0)));
    }
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateSample);
    }
    Ok(total)
}

fn summarize(observed: f64, null: &mut [f64], alpha: f64) -> PermutationResult {
    // ties within float noise count as exceedances
    let eps = 1e-12 * observed.abs().max(1e-300);
    let exceed = null.iter().filter(|s| **s >= observed - eps).count();
    let p_value = (1 + exceed) as f64 / (1 + null.len()) as f64;
    null.sort_by(f64::total_cmp);
    let threshold = if null.is_empty() {
        f64::INFINITY
    } else {
        let k = (((1.0 - alpha) * null.len() as f64).ceil() as usize).clamp(1, null.len());
        null[k - 1]
    };
    PermutationResult {
        statistic: observed,
        p_value,
        threshold,
    }
}

/// Pooled, sorted values with their gaps, for O(n) univariate energy statistics.
struct Pooled {
    order: Vec<usize>,
    gaps: Vec<f64>,
}

impl Pooled {
    fn new(values: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let gaps = order.windows(2).map(|p| values[p[1]] - values[p[0]]).collect();
        Pooled { order, gaps }
    }

    /// `2 ∫ (F_A - F_B)^2` for signed normalized masses (positive for A).
    fn energy(&self, signed: &[f64]) -> f64 {
        let mut cum = 0.0;
        let mut acc = 0.0;
        for (k, gap) in self.gaps.iter().enumerate() {
            cum += signed[self.order[k]];
            acc += cum * cum * gap;
        }
        2.0 * acc
    }
}

/// Weighted energy distance `2 ∫ (F_A - F_B)^2 dx` between two weighted
/// samples of reals.
pub fn energy_distance_1d(a: &[f64], wa: &[f64], b: &[f64], wb: &[f64]) -> Result<f64> {
    let ta = check_weights(wa)?;
    let tb = check_weights(wb)?;
    let values: Vec<f64> = a.iter().chain(b).copied().collect();
    let signed: Vec<f64> = wa.iter().map(|w| w / ta).chain(wb.iter().map(|w| -w / tb)).collect();
    Ok(Pooled::new(&values).energy(&signed))
}

/// Two independent weighted samples.
///
/// Relabeling is not a valid null when the two weight distributions differ,
/// so the null law of `2 ∫ (F_A - F_B)^2` is approximated by bootstrapping
/// the centred difference `(F*_A - F_A) - (F*_B - F_B)`, each side
/// resampled within itself with its weights attached.
pub fn weighted_two_sample(
    a: &[f64],
    wa: &[f64],
    b: &[f64],
    wb: &[f64],
    n_boot: usize,
    alpha: f64,
    seed: u64,
) -> Result<PermutationResult> {
    if a.len() != wa.len() || b.len() != wb.len() {
        return Err(Error::InvalidParameter("values and weights must have equal lengths".into()));
    }
    if a.is_empty() || b.is_empty() || a.len() + b.len() < 3 {
        return Err(Error::DegenerateSample);
    }
    let ta = check_weights(wa)?;
    let tb = check_weights(wb)?;
    let values: Vec<f64> = a.iter().chain(b).copied().collect();
    let pooled = Pooled::new(&values);
    let base: Vec<f64> = wa.iter().map(|w| w / ta).chain(wb.iter().map(|w| -w / tb)).collect();
    let observed = pooled.energy(&base);
    let (na, nb) = (a.len(), b.len());
    let mut null: Vec<f64> = (0..n_boot)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = stream(derive_seed(seed, 0x7e57), k as u64);
            let mut counts = vec![0u32; na + nb];
            for _ in 0..na {
                counts[rng.random_range(0..na)] += 1;
            }
            for _ in 0..nb {
                counts[na + rng.random_range(0..nb)] += 1;
            }
            let sa: f64 = wa.iter().zip(&counts).map(|(w, c)| w * *c as f64).sum();
            let sb: f64 = wb.iter().zip(&counts[na..]).map(|(w, c)| w * *c as f64).sum();
            if !(sa > 0.0 && sb > 0.0) {
                return None;
            }
            let signed: Vec<f64> = (0..na + nb)
                .map(|i| {
                    let c = counts[i] as f64;
                    if i < na {
                        wa[i] * c / sa - base[i]
                    } else {
                        -(wb[i - na] * c / sb) - base[i]
                    }
                })
                .collect();
            Some(pooled.energy(&signed))
        })
        .collect();
    Ok(summarize(observed, &mut null, alpha))
}

/// Paired samples `(a_i, b_i)` sharing weight `w_i`, exchangeable within
/// each pair under the null; the permutations swap pairs at random.
pub fn weighted_paired_two_sample(
    a: &[f64],
    b: &[f64],
    w: &[f64],
    n_perm: usize,
    alpha: f64,
    seed: u64,
) -> Result<PermutationResult> {
    if a.len() != b.len() || a.len() != w.len() {
        return Err(Error::InvalidParameter("paired samples must have equal lengths".into()));
    }
    if a.len() < 2 {
        return Err(Error::DegenerateSample);
    }
    let total = check_weights(w)?;
    let n = a.len();
    let values: Vec<f64> = a.iter().chain(b).copied().collect();
    let pooled = Pooled::new(&values);
    let signed_for = |swap: &[bool]| -> Vec<f64> {
        let mut s = vec![0.0; 2 * n];
        for i in 0..n {
            let m = w[i] / total;
            let sign = if swap[i] { -1.0 } else { 1.0 };
            s[i] = sign * m;
            s[n + i] = -sign * m;
        }
        s
    };
    let observed = pooled.energy(&signed_for(&vec![false; n]));
    let mut null: Vec<f64> = (0..n_perm)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(derive_seed(seed, 0x5a4b), k as u64);
            let swap: Vec<bool> = (0..n).map(|_| rng.random()).collect();
            pooled.energy(&signed_for(&swap))
        })
        .collect();
    Ok(summarize(observed, &mut null, alpha))
}

fn euclid(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

/// Standardize each coordinate by its pooled weighted standard deviation.
fn standardize(rows: &mut [Vec<f64>], weights: &[f64]) {
    let dim = rows.first().map_or(0, Vec::len);
    let total: f64 = weights.iter().sum();
    for k in 0..dim {
        let mean = rows.iter().zip(weights).map(|(r, w)| r[k] * w).sum::<f64>() / total;
        let var = rows.iter().zip(weights).map(|(r, w)| (r[k] - mean).powi(2) * w).sum::<f64>() / total;
        let sd = var.sqrt();
        for r in rows.iter_mut() {
            r[k] = if sd > 0.0 { (r[k] - mean) / sd } else { 0.0 };
        }
    }
}

/// Weighted multivariate energy distance between paired vectors with
/// swap permutations. Coordinates are standardized on the pooled sample.
pub fn weighted_paired_energy(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    w: &[f64],
    n_perm: usize,
    alpha: f64,
    seed: u64,
) -> Result<PermutationResult> {
    let n = a.len();
    if b.len() != n || w.len() != n {
        return Err(Error::InvalidParameter("paired samples must have equal lengths".into()));
    }
    if n < 2 {
        return Err(Error::DegenerateSample);
    }
    let total = check_weights(w)?;
    let mut rows: Vec<Vec<f64>> = a.iter().chain(b).cloned().collect();
    let pooled_w: Vec<f64> = w.iter().chain(w).copied().collect();
    standardize(&mut rows, &pooled_w);
    let (ra, rb) = rows.split_at(n);
    let m: Vec<f64> = w.iter().map(|x| x / total).collect();
    // M_ij = d(a_i,a_j) - d(a_i,b_j) - d(b_i,a_j) + d(b_i,b_j), scaled by m_i m_j
    let kernel: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = euclid(&ra[i], &ra[j]) - euclid(&ra[i], &rb[j]) - euclid(&rb[i], &ra[j])
                        + euclid(&rb[i], &rb[j]);
                    v * m[i] * m[j]
                })
                .collect()
        })
        .collect();
    let energy = |sign: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            let row = &kernel[i];
            let mut inner = 0.0;
            for j in 0..n {
                inner += sign[j] * row[j];
            }
            acc += sign[i] * inner;
        }
        -acc
    };
    let observed = energy(&vec![1.0; n]);
    let mut null: Vec<f64> = (0..n_perm)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(derive_seed(seed, 0x3e11), k as u64);
            let sign: Vec<f64> = (0..n).map(|_| if rng.random() { -1.0 } else { 1.0 }).collect();
            energy(&sign)
        })
        .collect();
    Ok(summarize(observed, &mut null, alpha))
}

/// Result of a goodness-of-fit test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: usize,
    pub effective_n: f64,
}

/// Weighted chi-square test of binned data against cell probabilities.
/// The statistic uses the effective sample size `(Σw)² / Σw²`.
pub fn weighted_chi_square(bins: &[usize], weights: &[f64], probs: &[f64]) -> Result<ChiSquareResult> {
    if bins.len() != weights.len() || bins.is_empty() {
        return Err(Error::DegenerateSample);
    }
    let total = check_weights(weights)?;
    let sq: f64 = weights.iter().map(|w| w * w).sum();
    let ess = total * total / sq;
    let mut freq = vec![0.0; probs.len()];
    for (&b, &w) in bins.iter().zip(weights) {
        if b >= probs.len() {
            return Err(Error::InvalidParameter(format!("bin {b} out of range")));
        }
        freq[b] += w / total;
    }
    let stat = ess
        * freq
            .iter()
            .zip(probs)
            .filter(|(_, p)| **p > 0.0)
            .map(|(f, p)| (f - p).powi(2) / p)
            .sum::<f64>();
    let dof = probs.iter().filter(|p| **p > 0.0).count().saturating_sub(1).max(1);
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    Ok(ChiSquareResult {
        statistic: stat,
        p_value: dist.sf(stat),
        dof,
        effective_n: ess,
    })
}

/// Equal-width bin of a value in `[0, 1)`.
pub fn unit_bin(x: f64, bins: usize) -> usize {
    ((x * bins as f64).floor().max(0.0) as usize).min(bins - 1)
}

/// One-sample KS statistic of data against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> f64 {
    let mut xs = data.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of a one-sample KS statistic (Kolmogorov series).
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = 2.0 * (-1f64).powi(k - 1) * (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Bonferroni adjustment of a p-value over `m` tests.
pub fn bonferroni(p: f64, m: usize) -> f64 {
    (p * m as f64).min(1.0)
}

/// Draw `k` of `n` indices without replacement, in increasing order.
pub fn subsample_indices<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    if k >= n {
        return (0..n).collect();
    }
    let mut idx = rand::seq::index::sample(rng, n, k).into_vec();
    idx.sort_unstable();
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    /// Quadratic-time oracle: `2 E|X-Y| - E|X-X'| - E|Y-Y'|`.
    fn energy_oracle(a: &[f64], wa: &[f64], b: &[f64], wb: &[f64]) -> f64 {
        let ta: f64 = wa.iter().sum();
        let tb: f64 = wb.iter().sum();
        let mut xy = 0.0;
        for (x, u) in a.iter().zip(wa) {
            for (y, v) in b.iter().zip(wb) {
                xy += u * v * (x - y).abs();
            }
        }
        let mut xx = 0.0;
        for (x, u) in a.iter().zip(wa) {
            for (y, v) in a.iter().zip(wa) {
                xx += u * v * (x - y).abs();
            }
        }
        let mut yy = 0.0;
        for (x, u) in b.iter().zip(wb) {
            for (y, v) in b.iter().zip(wb) {
                yy += u * v * (x - y).abs();
            }
        }
        2.0 * xy / (ta * tb) - xx / (ta * ta) - yy / (tb * tb)
    }

    #[test]
    fn energy_matches_pairwise_formula() {
        let mut rng = SimRng::seed_from_u64(1);
        let a: Vec<f64> = (0..40).map(|_| rng.random::<f64>() * 3.0).collect();
        let b: Vec<f64> = (0..30).map(|_| rng.random::<f64>() * 2.0 + 0.5).collect();
        let wa: Vec<f64> = (0..40).map(|_| 0.1 + rng.random::<f64>()).collect();
        let wb: Vec<f64> = (0..30).map(|_| 0.1 + rng.random::<f64>()).collect();
        let fast = energy_distance_1d(&a, &wa, &b, &wb).unwrap();
        let slow = energy_oracle(&a, &wa, &b, &wb);
        assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 3.5, 3.5];
        let w = [1.0, 2.0, 1.0, 1.0];
        let r = weighted_two_sample(&a, &w, &a, &w, 199, 0.05, 1).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let p = weighted_paired_two_sample(&a, &a, &w, 199, 0.05, 1).unwrap();
        assert_eq!(p.statistic, 0.0);
        assert_eq!(p.p_value, 1.0);
    }

    #[test]
    fn detects_location_shift() {
        let mut rng = SimRng::seed_from_u64(2);
        let a: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..1000).map(|_| 1.0 + Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
        let w = vec![1.0; 1000];
        let r = weighted_two_sample(&a, &w, &b, &w, 199, 0.05, 3).unwrap();
        assert!(r.p_value < 0.01);
        assert!(r.statistic > r.threshold);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            weighted_two_sample(&[1.0], &[0.0], &[2.0, 3.0], &[1.0, 1.0], 9, 0.05, 0),
            Err(Error::DegenerateSample)
        ));
        assert!(matches!(
            weighted_two_sample(&[1.0], &[1.0], &[], &[], 9, 0.05, 0),
            Err(Error::DegenerateSample)
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let a: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = (0..50).map(|i| (i as f64).cos()).collect();
        let w = vec![1.0; 50];
        let r1 = weighted_two_sample(&a, &w, &b, &w, 99, 0.05, 7).unwrap();
        let r2 = weighted_two_sample(&a, &w, &b, &w, 99, 0.05, 7).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn paired_multivariate_detects_asymmetry() {
        let mut rng = SimRng::seed_from_u64(4);
        let n = 300;
        let a: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let b: Vec<Vec<f64>> = a.iter().map(|x| vec![x[0] + 0.5, x[1]]).collect();
        let w = vec![1.0; n];
        let r = weighted_paired_energy(&a, &b, &w, 199, 0.05, 5).unwrap();
        assert!(r.p_value < 0.01);
        let same = weighted_paired_energy(&a, &a, &w, 99, 0.05, 5).unwrap();
        assert!(same.statistic.abs() < 1e-12);
    }

    #[test]
    fn chi_square_uniform_passes_and_skew_fails() {
        let mut rng = SimRng::seed_from_u64(6);
        let bins: Vec<usize> = (0..5000).map(|_| unit_bin(rng.random(), 10)).collect();
        let w = vec![1.0; 5000];
        let probs = vec![0.1; 10];
        assert!(weighted_chi_square(&bins, &w, &probs).unwrap().p_value > 0.001);
        let skew: Vec<usize> = (0..5000).map(|_| unit_bin(rng.random::<f64>().powi(2), 10)).collect();
        assert!(weighted_chi_square(&skew, &w, &probs).unwrap().p_value < 1e-6);
    }

    #[test]
    fn ks_helpers() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = ks_statistic(&xs, |x| x);
        assert!(d <= 0.0005 + 1e-12);
        assert!(ks_p_value(d, 1000) > 0.99);
        assert!(ks_p_value(0.1, 1000) < 1e-6);
        // 1% critical value of the Kolmogorov distribution
        assert!((ks_p_value(1.628 / (1000f64).sqrt(), 1000) - 0.01).abs() < 0.002);
    }

    #[test]
    fn importance_weighted_null_is_calibrated() {
        // A: uniform draws weighted 2x; B: direct draws from density 2x
        let mut rejected = 0;
        for rep in 0..200u64 {
            let mut rng = stream(77, rep);
            let a: Vec<f64> = (0..400).map(|_| rng.random::<f64>()).collect();
            let wa: Vec<f64> = a.iter().map(|x| 2.0 * x).collect();
            let b: Vec<f64> = (0..400).map(|_| rng.random::<f64>().sqrt()).collect();
            let wb = vec![1.0; b.len()];
            let r = weighted_two_sample(&a, &wa, &b, &wb, 199, 0.05, rep).unwrap();
            rejected += usize::from(r.p_value <= 0.05);
        }
        assert!(rejected <= 20, "{rejected}/200 rejections at 5%");
    }
}
