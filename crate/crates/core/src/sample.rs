//! Paired bivariate observations.

use crate::error::{Error, Result};

/// `n` observations `(x_i, y_i)`, all finite, `n >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PairedSample {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidSample(format!(
                "column lengths differ ({} vs {})",
                xs.len(),
                ys.len()
            )));
        }
        if xs.is_empty() {
            return Err(Error::EmptySample);
        }
        if xs.len() < 2 {
            return Err(Error::InvalidSample("at least 2 observations required".into()));
        }
        if let Some(i) = xs
            .iter()
            .zip(&ys)
            .position(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(Error::InvalidSample(format!("non-finite entry at row {i}")));
        }
        Ok(Self { xs, ys })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let (xs, ys) = pairs.iter().copied().unzip();
        Self::new(xs, ys)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    /// Applies `x -> a*x + b`, `y -> c*y + d` to every observation.
    pub fn affine(&self, a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(
            self.xs.iter().map(|x| a * x + b).collect(),
            self.ys.iter().map(|y| c * y + d).collect(),
        )
    }

    /// Centers each column and scales it to unit (denominator-`n`) variance.
    pub fn standardized(&self) -> Result<Self> {
        let (mx, sx) = mean_sd(&self.xs, "x")?;
        let (my, sy) = mean_sd(&self.ys, "y")?;
        self.affine(1.0 / sx, -mx / sx, 1.0 / sy, -my / sy)
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean and population standard deviation, rejecting numerically constant columns.
pub(crate) fn mean_sd(v: &[f64], which: &'static str) -> Result<(f64, f64)> {
    let m = mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64;
    let scale = v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let sd = var.sqrt();
    if var <= 0.0 || sd <= 1e-12 * scale {
        return Err(Error::DegeneratedMarginal(which));
    }
    Ok((m, sd))
}
