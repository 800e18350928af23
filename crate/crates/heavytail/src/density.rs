//! Binned empirical densities of normalized returns.
//!
//! A histogram (not a kernel estimator) keeps the comparison with the
//! parametric curves transparent: heights are counts over `n * bin_width`,
//! so the density integrates to one over its range, and the log-scale view
//! used for tail comparison simply drops empty bins.

use thiserror::Error;

use crate::timeseries::ReturnSeries;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("need at least {needed} samples for a meaningful density, have {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("invalid range: lo {lo} must be below hi {hi}")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("auto range undefined: sample standard deviation is zero")]
    ZeroSpread,
    #[error("number of bins must be positive")]
    ZeroBins,
    #[error("no samples fall inside the requested range")]
    EmptyRange,
}

pub type Result<T> = std::result::Result<T, DensityError>;

/// Bin range selection for [`estimate_density`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RangeSpec {
    /// `[-8 sigma, +8 sigma]` of the input sample.
    #[default]
    Auto,
    Explicit {
        lo: f64,
        hi: f64,
    },
}

/// Histogram settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySpec {
    pub n_bins: usize,
    pub range: RangeSpec,
}

impl Default for DensitySpec {
    /// 101 bins over +-8 sigma: an odd count centers one bin at zero, and
    /// 8 sigma keeps visible tail mass for the heavy-tailed fits.
    fn default() -> Self {
        Self {
            n_bins: 101,
            range: RangeSpec::Auto,
        }
    }
}

/// Binned, normalized probability density.
///
/// `total_count` is the number of samples that landed inside the bin range;
/// samples outside are excluded from the density (which therefore integrates
/// to one) and reported in `out_of_range`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDensity {
    pub edges: Vec<f64>,
    pub heights: Vec<f64>,
    pub counts: Vec<u64>,
    pub total_count: u64,
    pub out_of_range: u64,
}

impl EmpiricalDensity {
    /// Riemann integral of the density over its bins.
    pub fn integral(&self) -> f64 {
        self.heights
            .iter()
            .zip(self.edges.windows(2))
            .map(|(h, e)| h * (e[1] - e[0]))
            .sum()
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }
}

const MIN_SAMPLES: usize = 100;

/// Bins the return values into a normalized density with uniform bin widths.
pub fn estimate_density(returns: &ReturnSeries, spec: DensitySpec) -> Result<EmpiricalDensity> {
    if spec.n_bins == 0 {
        return Err(DensityError::ZeroBins);
    }
    let n = returns.values.len();
    if n < MIN_SAMPLES {
        return Err(DensityError::TooFewSamples {
            needed: MIN_SAMPLES,
            found: n,
        });
    }
    let (lo, hi) = match spec.range {
        RangeSpec::Explicit { lo, hi } => {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(DensityError::InvalidRange { lo, hi });
            }
            (lo, hi)
        }
        RangeSpec::Auto => {
            let nf = n as f64;
            let mean = returns.values.iter().sum::<f64>() / nf;
            let var = returns
                .values
                .iter()
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>()
                / (nf - 1.0);
            let sigma = var.sqrt();
            if sigma == 0.0 {
                return Err(DensityError::ZeroSpread);
            }
            (-8.0 * sigma, 8.0 * sigma)
        }
    };

    let m = spec.n_bins;
    let width = (hi - lo) / m as f64;
    let mut counts = vec![0u64; m];
    let mut out_of_range = 0u64;
    for &v in &returns.values {
        if v < lo || v > hi {
            out_of_range += 1;
            continue;
        }
        // The top edge belongs to the last bin.
        let mut idx = ((v - lo) / width) as usize;
        if idx >= m {
            idx = m - 1;
        }
        counts[idx] += 1;
    }
    let total_count: u64 = counts.iter().sum();
    if total_count == 0 {
        return Err(DensityError::EmptyRange);
    }

    let edges: Vec<f64> = (0..=m).map(|i| lo + i as f64 * width).collect();
    let heights: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / (total_count as f64 * width))
        .collect();
    Ok(EmpiricalDensity {
        edges,
        heights,
        counts,
        total_count,
        out_of_range,
    })
}

/// Plot-ready `(bin center, log10 density)` points. Bins with zero count are
/// omitted -- their log is undefined -- but stay part of the density itself.
pub fn log_density_points(d: &EmpiricalDensity) -> Vec<(f64, f64)> {
    d.bin_centers()
        .iter()
        .zip(&d.counts)
        .zip(&d.heights)
        .filter(|((_, &c), _)| c > 0)
        .map(|((&x, _), &h)| (x, h.log10()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::NormalSampler;
    use crate::timeseries::{Normalization, ReturnSeries};

    fn returns(values: Vec<f64>) -> ReturnSeries {
        ReturnSeries::new("t", 300, values, Normalization::Raw).unwrap()
    }

    #[test]
    fn gaussian_central_height_matches_analytic_pdf() {
        let mut sampler = NormalSampler::seed_from_u64(1);
        let values: Vec<f64> = (0..1_000_000).map(|_| sampler.next_normal()).collect();
        let d = estimate_density(
            &returns(values),
            DensitySpec {
                n_bins: 100,
                range: RangeSpec::Auto,
            },
        )
        .unwrap();
        // Central height vs the unit Gaussian peak 1/sqrt(2 pi) ~ 0.399.
        let centers = d.bin_centers();
        let central = centers
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap()
            .0;
        let expected = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!(
            (d.heights[central] - expected).abs() < 0.01,
            "height {} vs {expected}",
            d.heights[central]
        );
    }

    #[test]
    fn degenerate_point_mass_integrates_to_one() {
        let values = vec![0.0; 500];
        let d = estimate_density(
            &returns(values),
            DensitySpec {
                n_bins: 2,
                range: RangeSpec::Explicit { lo: -1.0, hi: 1.0 },
            },
        )
        .unwrap();
        assert_eq!(d.counts, vec![0, 500]);
        assert!((d.integral() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hand_binning_oracle() {
        // 100 samples at -1 and 100 at +1 over (-2, 2) with 4 bins of width 1:
        // each occupied bin holds half the mass at density 0.5 / 1.
        let mut values = vec![-1.0; 100];
        values.extend(vec![1.0; 100]);
        let d = estimate_density(
            &returns(values),
            DensitySpec {
                n_bins: 4,
                range: RangeSpec::Explicit { lo: -2.0, hi: 2.0 },
            },
        )
        .unwrap();
        assert_eq!(d.counts, vec![0, 100, 0, 100]);
        assert_eq!(d.heights[1], 0.5);
        assert_eq!(d.heights[3], 0.5);
        assert!((d.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_samples_is_an_error() {
        let err = estimate_density(&returns(vec![0.1; 99]), DensitySpec::default()).unwrap_err();
        assert!(matches!(err, DensityError::TooFewSamples { .. }));
    }

    #[test]
    fn invalid_range_is_an_error() {
        let err = estimate_density(
            &returns(vec![0.1; 200]),
            DensitySpec {
                n_bins: 10,
                range: RangeSpec::Explicit { lo: 1.0, hi: -1.0 },
            },
        )
        .unwrap_err();
        assert!(matches!(err, DensityError::InvalidRange { .. }));
    }

    #[test]
    fn out_of_range_mass_is_tracked_and_density_still_integrates() {
        let mut values: Vec<f64> = (0..400).map(|i| (i as f64 / 400.0) - 0.5).collect();
        values.extend([50.0, -50.0]);
        let d = estimate_density(
            &returns(values),
            DensitySpec {
                n_bins: 8,
                range: RangeSpec::Explicit { lo: -1.0, hi: 1.0 },
            },
        )
        .unwrap();
        assert_eq!(d.out_of_range, 2);
        assert_eq!(d.total_count, 400);
        assert!((d.integral() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn doubling_bins_preserves_integral_and_total_count() {
        let mut sampler = NormalSampler::seed_from_u64(5);
        let values: Vec<f64> = (0..10_000).map(|_| sampler.next_normal()).collect();
        let r = returns(values);
        let range = RangeSpec::Explicit { lo: -6.0, hi: 6.0 };
        let d1 = estimate_density(&r, DensitySpec { n_bins: 50, range }).unwrap();
        let d2 = estimate_density(&r, DensitySpec { n_bins: 100, range }).unwrap();
        assert_eq!(d1.total_count, d2.total_count);
        assert!((d1.integral() - 1.0).abs() < 1e-9);
        assert!((d2.integral() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_input_gives_mirror_symmetric_heights() {
        let mut sampler = NormalSampler::seed_from_u64(11);
        let mut values = Vec::with_capacity(200_000);
        for _ in 0..100_000 {
            let z = sampler.next_normal();
            values.push(z);
            values.push(-z);
        }
        let d = estimate_density(
            &returns(values),
            DensitySpec {
                n_bins: 41,
                range: RangeSpec::Explicit { lo: -5.0, hi: 5.0 },
            },
        )
        .unwrap();
        let m = d.counts.len();
        for i in 0..m / 2 {
            let a = d.counts[i] as f64;
            let b = d.counts[m - 1 - i] as f64;
            let tol = 3.0 * (a.max(b)).sqrt().max(1.0);
            assert!((a - b).abs() <= tol, "bin {i}: {a} vs {b}");
        }
    }

    #[test]
    fn log_points_drop_zero_bins_and_use_centers() {
        let values = vec![0.0; 200];
        let d = estimate_density(
            &returns(values),
            DensitySpec {
                n_bins: 2,
                range: RangeSpec::Explicit { lo: -1.0, hi: 1.0 },
            },
        )
        .unwrap();
        let pts = log_density_points(&d);
        // One bin holds everything: height 1 over width 1 -> log10 = 0.
        assert_eq!(pts.len(), 1);
        assert!((pts[0].0 - 0.5).abs() < 1e-12);
        assert!(pts[0].1.abs() < 1e-12);
    }

    #[test]
    fn gaussian_log_points_trace_a_parabola() {
        let mut sampler = NormalSampler::seed_from_u64(3);
        let values: Vec<f64> = (0..1_000_000).map(|_| sampler.next_normal()).collect();
        let d = estimate_density(
            &returns(values),
            DensitySpec {
                n_bins: 41,
                range: RangeSpec::Explicit { lo: -4.0, hi: 4.0 },
            },
        )
        .unwrap();
        // Least-squares fit of log10 p = a + b x^2 must recover
        // b = -log10(e)/2 and leave small residuals. Restricted to |x| <= 3
        // where bins hold enough counts for the log to be stable.
        let pts: Vec<(f64, f64)> = log_density_points(&d)
            .into_iter()
            .filter(|&(x, _)| x.abs() <= 3.0)
            .collect();
        let n = pts.len() as f64;
        let (mut su, mut sy, mut suu, mut suy) = (0.0, 0.0, 0.0, 0.0);
        for &(x, y) in &pts {
            let u = x * x;
            su += u;
            sy += y;
            suu += u * u;
            suy += u * y;
        }
        let b = (n * suy - su * sy) / (n * suu - su * su);
        let a = (sy - b * su) / n;
        let expected_b = -0.5 * std::f64::consts::E.log10();
        assert!((b - expected_b).abs() < 0.01, "b = {b}, expected {expected_b}");
        for &(x, y) in &pts {
            assert!((y - (a + b * x * x)).abs() < 0.05, "residual at x={x}");
        }
    }
}
