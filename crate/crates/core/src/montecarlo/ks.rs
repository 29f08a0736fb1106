use crate::error::{Error, Result};

/// One-sample Kolmogorov–Smirnov distance between the empirical distribution
/// of `values` and `cdf`:
///
/// ```text
/// D = max_i max(i/m - F(v_(i)), F(v_(i)) - (i-1)/m)
/// ```
///
/// over the sorted values `v_(1) <= ... <= v_(m)`.
pub fn ks_statistic<F>(values: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidSample("NaN in KS input".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            let above = (i as f64 + 1.0) / m - f;
            let below = f - i as f64 / m;
            above.abs().max(below.abs())
        })
        .fold(0.0, f64::max);
    Ok(d.min(1.0))
}
