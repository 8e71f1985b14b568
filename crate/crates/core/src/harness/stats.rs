use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub p: f64,
    pub value: f64,
}

/// Monte Carlo summary of one quantity over independent trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`.
    pub stderr: f64,
    pub quantiles: Vec<Quantile>,
    pub min: f64,
    pub max: f64,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

pub const DEFAULT_QUANTILES: [f64; 3] = [0.5, 0.9, 0.99];

/// Linear interpolation between order statistics (type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl Estimate {
    pub fn from_values(values: Vec<f64>, quantiles: &[f64], master_seed: u64, keep: bool) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parameter("an estimate needs at least one trial".into()));
        }
        if let Some(p) = quantiles.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Parameter(format!("quantile {p} outside [0, 1]")));
        }
        let trials = values.len();
        let mean = values.iter().sum::<f64>() / trials as f64;
        let var = if trials > 1 {
            values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64
        } else {
            0.0
        };
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let mut ps = quantiles.to_vec();
        ps.sort_by(f64::total_cmp);
        Ok(Self {
            mean,
            stderr: (var / trials as f64).sqrt(),
            quantiles: ps.iter().map(|&p| Quantile { p, value: quantile_sorted(&sorted, p) }).collect(),
            min: sorted[0],
            max: sorted[trials - 1],
            trials,
            master_seed,
            values: keep.then_some(values),
        })
    }

    pub fn quantile(&self, p: f64) -> Option<f64> {
        self.quantiles.iter().find(|q| (q.p - p).abs() < 1e-12).map(|q| q.value)
    }

    /// Ratio of two independent estimates with a first-order standard error.
    pub fn ratio(&self, other: &Estimate) -> (f64, f64) {
        let r = self.mean / other.mean;
        let rel = ((self.stderr / self.mean).powi(2) + (other.stderr / other.mean).powi(2)).sqrt();
        (r, r.abs() * rel)
    }
}

/// Two-sample Kolmogorov-Smirnov statistic and its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let en = (n * m / (n + m)).sqrt();
    (d, kolmogorov_survival((en + 0.12 + 0.11 / en) * d))
}

/// `P(K > x)` for the Kolmogorov distribution.
fn kolmogorov_survival(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powi(k as i32 - 1) * (-2.0 * k * k * x * x).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_of_constant() {
        let e = Estimate::from_values(vec![1.0; 10], &DEFAULT_QUANTILES, 3, false).unwrap();
        assert_eq!((e.mean, e.stderr, e.min, e.max), (1.0, 0.0, 1.0, 1.0));
        assert_eq!(e.quantile(0.9), Some(1.0));
    }

    #[test]
    fn quantiles_interpolate() {
        let sorted = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&sorted, 0.5), 3.0);
        assert_eq!(quantile_sorted(&sorted, 0.25), 2.0);
        assert_eq!(quantile_sorted(&sorted, 0.9), 4.6);
        let e = Estimate::from_values(vec![5.0, 1.0, 4.0, 2.0, 3.0], &[0.9, 0.1], 0, true).unwrap();
        assert!(e.quantiles[0].value <= e.quantiles[1].value);
        assert!((e.stderr - (2.5f64 / 5.0).sqrt()).abs() < 1e-12);
        assert!(Estimate::from_values(vec![], &[0.5], 0, false).is_err());
        assert!(Estimate::from_values(vec![1.0], &[1.5], 0, false).is_err());
    }

    #[test]
    fn ks_separates_shifted_samples() {
        let a: Vec<f64> = (0..500).map(|i| i as f64).collect();
        let same: Vec<f64> = (0..500).map(|i| i as f64 + 0.5).collect();
        let shifted: Vec<f64> = (0..500).map(|i| i as f64 + 100.0).collect();
        assert!(ks_two_sample(&a, &same).1 > 0.5);
        let (d, p) = ks_two_sample(&a, &shifted);
        assert!((d - 0.2).abs() < 1e-9 && p < 1e-6);
    }
}
