//! Masked z-standardization of window features.
//!
//! Each (joint, channel) series is standardized using only its observed
//! frames: subtract their mean, divide by their population standard
//! deviation. Masked frames are excluded from the statistics and then
//! filled with the sentinel value −1. Series with fewer than two observed
//! frames, or with (numerically) zero variance, become all zeros at the
//! observed slots — there is no scale information to preserve.

use crate::data::features::WindowFeatures;

/// Sentinel written at masked (unobserved) slots.
pub const MASK_FILL: f64 = -1.0;

/// Below this population standard deviation a series counts as constant.
pub const SIGMA_FLOOR: f64 = 1e-8;

/// Standardizes one window in place. Infallible: degenerate series are
/// well-defined (zeros), masked slots always end up at [`MASK_FILL`].
pub fn standardize_window(w: &mut WindowFeatures) {
    for j in 0..w.joints {
        for c in 0..w.channels {
            let observed: Vec<f64> = (0..w.timesteps)
                .filter(|&t| w.observed(j, t))
                .map(|t| w.value(j, t, c))
                .collect();
            let usable = observed.len() >= 2;
            let (mean, sigma) = if usable {
                let n = observed.len() as f64;
                let mean = observed.iter().sum::<f64>() / n;
                let var = observed.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
                (mean, var.sqrt())
            } else {
                (0.0, 0.0)
            };
            let spread_ok = sigma >= SIGMA_FLOOR;
            for t in 0..w.timesteps {
                let v = if !w.observed(j, t) {
                    MASK_FILL
                } else if usable && spread_ok {
                    (w.value(j, t, c) - mean) / sigma
                } else {
                    0.0
                };
                w.set_value(j, t, c, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn window_from_series(series: &[(f64, bool)]) -> WindowFeatures {
        let mut w = WindowFeatures::new(1, series.len(), 1);
        for (t, (v, observed)) in series.iter().enumerate() {
            w.set_value(0, t, 0, *v);
            w.set_observed(0, t, *observed);
        }
        w
    }

    fn standardized(series: &[(f64, bool)]) -> Vec<f64> {
        let mut w = window_from_series(series);
        standardize_window(&mut w);
        (0..series.len()).map(|t| w.value(0, t, 0)).collect()
    }

    #[test]
    fn frozen_hand_case() {
        // Series [1, masked, 3]: mean 2, population σ 1 ⇒ [−1, −1, 1].
        let out = standardized(&[(1.0, true), (999.0, false), (3.0, true)]);
        assert_eq!(out, vec![-1.0, -1.0, 1.0]);
    }

    #[test]
    fn all_masked_series_is_all_sentinel() {
        let out = standardized(&[(5.0, false), (7.0, false), (9.0, false)]);
        assert_eq!(out, vec![-1.0; 3]);
    }

    #[test]
    fn single_observation_becomes_zero() {
        let out = standardized(&[(42.0, true), (0.0, false)]);
        assert_eq!(out, vec![0.0, -1.0]);
    }

    #[test]
    fn constant_series_becomes_zeros() {
        let out = standardized(&[(3.0, true), (3.0, true), (3.0, true)]);
        assert_eq!(out, vec![0.0; 3]);
    }

    #[test]
    fn nearly_constant_series_hits_the_sigma_floor() {
        let out = standardized(&[(3.0, true), (3.0 + 1e-12, true)]);
        assert_eq!(out, vec![0.0; 2]);
    }

    #[test]
    fn observed_moments_are_zero_mean_unit_variance() {
        let out = standardized(&[(1.0, true), (2.0, true), (4.0, true), (9.0, true)]);
        let n = out.len() as f64;
        let mean = out.iter().sum::<f64>() / n;
        let var = out.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);
    }

    #[test]
    fn standardization_is_scale_and_shift_invariant() {
        let base = [(0.3, true), (1.7, true), (0.9, true), (2.4, true)];
        let transformed: Vec<(f64, bool)> =
            base.iter().map(|(v, m)| (v * 37.5 - 11.0, *m)).collect();
        let a = standardized(&base);
        let b = standardized(&transformed);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    proptest! {
        // Inserting masked frames anywhere must not change the values the
        // observed frames standardize to.
        #[test]
        fn masked_insertion_never_changes_observed_outputs(
            values in proptest::collection::vec(-1e3f64..1e3, 2..20),
            inserts in proptest::collection::vec((0usize..20, -1e3f64..1e3), 0..10),
        ) {
            let base: Vec<(f64, bool)> = values.iter().map(|v| (*v, true)).collect();
            let mut with_masked = base.clone();
            for (pos, junk) in &inserts {
                let at = pos % (with_masked.len() + 1);
                with_masked.insert(at, (*junk, false));
            }
            let plain = standardized(&base);
            let padded = standardized(&with_masked);
            let observed_outputs: Vec<f64> = with_masked
                .iter()
                .zip(&padded)
                .filter(|((_, observed), _)| *observed)
                .map(|(_, out)| *out)
                .collect();
            prop_assert_eq!(plain.len(), observed_outputs.len());
            for (a, b) in plain.iter().zip(&observed_outputs) {
                prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
            }
        }

        // Masked slots always carry the sentinel; observed slots are finite.
        #[test]
        fn sentinel_and_finiteness_invariants(
            series in proptest::collection::vec((-1e6f64..1e6, proptest::bool::ANY), 1..30),
        ) {
            let out = standardized(&series);
            for ((_, observed), v) in series.iter().zip(&out) {
                if *observed {
                    prop_assert!(v.is_finite());
                } else {
                    prop_assert_eq!(*v, MASK_FILL);
                }
            }
        }
    }
}
