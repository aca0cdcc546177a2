//! Index-parallel map with a sequential fallback.
//!
//! Every sample loop in the crate goes through these helpers. Outputs are
//! collected in index order, so callers that reduce afterwards get the same
//! answer for any worker count.

use crate::Result;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(0), ..., f(n - 1)` and returns the results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Fallible variant of [`map_indexed`]; the first error in index order wins.
pub fn try_map_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    map_indexed(n, f).into_iter().collect()
}

/// Minimum of a slice, ignoring nothing: NaN propagates.
pub fn min_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, |acc, v| {
        if v.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.min(v)
        }
    })
}

pub fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, |acc, v| {
        if v.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.max(v)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_stay_in_index_order() {
        let v = map_indexed(1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
    }

    #[test]
    fn first_error_in_index_order_is_reported() {
        let r: Result<Vec<usize>> = try_map_indexed(50, |i| {
            if i % 10 == 7 {
                Err(crate::GeomError::NoConvergence { iterations: i })
            } else {
                Ok(i)
            }
        });
        assert_eq!(r, Err(crate::GeomError::NoConvergence { iterations: 7 }));
    }

    #[test]
    fn min_max_propagate_nan() {
        assert!(min_of(&[1.0, f64::NAN, 0.0]).is_nan());
        assert_eq!(max_of(&[1.0, 3.0, -2.0]), 3.0);
        assert_eq!(min_of(&[1.0, 3.0, -2.0]), -2.0);
    }
}
