//! Exact O(n) evaluation of the product-of-sums statistics and their
//! diagnostics.
//!
//! All log-products are evaluated as sums of `log1p` of centered ratios, so
//! nothing of the size of `n!` or `(n-1)^n mu^n` is ever formed. The
//! leave-one-out centered sum `S_{n,k} - (n-1)mu` is taken as `D - d_k` with
//! `D = sum(x_i - mu)` and `d_k = x_k - mu`, which keeps full relative
//! precision when the ratio is close to one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::Moments;
use crate::error::StatisticError;
use crate::sum::CompensatedSum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StatisticKind {
    /// `(1/(gamma sqrt n)) sum_k log(S_{n,k} / ((n-1) mu))`
    LeaveOneOutLogProduct,
    /// `(1/(gamma sqrt n)) sum_k log(S_k / (k mu))`
    PrefixLogProduct,
    /// First-order linearization of the leave-one-out log product.
    LinearizedSum,
    /// `(1/sqrt n) sum_i (x_i - mu)/sigma`
    StandardizedSum,
    /// `(prod_k S_k / n!)^(1/n)`
    GeometricMeanPrefix,
    /// `(prod_k S_{n,k} / (n-1)^n)^(1/n)`
    GeometricMeanLoo,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 6] = [
        Self::LeaveOneOutLogProduct,
        Self::PrefixLogProduct,
        Self::LinearizedSum,
        Self::StandardizedSum,
        Self::GeometricMeanPrefix,
        Self::GeometricMeanLoo,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Self::LeaveOneOutLogProduct => "loo",
            Self::PrefixLogProduct => "rw",
            Self::LinearizedSum => "lin",
            Self::StandardizedSum => "std",
            Self::GeometricMeanPrefix => "gm-prefix",
            Self::GeometricMeanLoo => "gm-loo",
        }
    }

    /// Smallest path length the statistic is defined for.
    pub fn min_n(self) -> usize {
        match self {
            Self::LeaveOneOutLogProduct | Self::LinearizedSum | Self::GeometricMeanLoo => 2,
            _ => 1,
        }
    }

    /// Whether the statistic is the logarithm of a normalized product.
    pub fn is_log_product(self) -> bool {
        matches!(self, Self::LeaveOneOutLogProduct | Self::PrefixLogProduct)
    }

    pub fn evaluate(self, path: &[f64], m: &Moments) -> Result<f64, StatisticError> {
        match self {
            Self::LeaveOneOutLogProduct => loo_log_statistic(path, m.mu, m.gamma),
            Self::PrefixLogProduct => rw_log_statistic(path, m.mu, m.gamma),
            Self::LinearizedSum => linearized_statistic(path, m.mu, m.gamma),
            Self::StandardizedSum => standardized_sum(path, m.mu, m.sigma),
            Self::GeometricMeanPrefix => geometric_mean_prefix(path),
            Self::GeometricMeanLoo => geometric_mean_loo(path),
        }
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for StatisticKind {
    type Err = StatisticError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.tag() == s).ok_or_else(|| StatisticError::UnknownKind(s.to_string()))
    }
}

impl TryFrom<String> for StatisticKind {
    type Error = StatisticError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<StatisticKind> for String {
    fn from(k: StatisticKind) -> String {
        k.tag().to_string()
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<(), StatisticError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(StatisticError::NonpositiveParameter { name, value })
    }
}

/// Centered leave-one-out ratios `u_k = S_{n,k}/((n-1) mu) - 1` of a path.
#[derive(Clone, Copy, Debug)]
pub struct LooRatios<'a> {
    path: &'a [f64],
    mu: f64,
    total_dev: f64,
    scale: f64,
}

impl<'a> LooRatios<'a> {
    pub fn new(path: &'a [f64], mu: f64) -> Result<Self, StatisticError> {
        let n = path.len();
        if n < 2 {
            return Err(StatisticError::DegenerateN(n));
        }
        check_positive("mu", mu)?;
        let total_dev = path.iter().map(|&x| x - mu).collect::<CompensatedSum>().value();
        Ok(Self { path, mu, total_dev, scale: (n - 1) as f64 * mu })
    }

    /// `D = S_n - n mu`.
    pub fn total_deviation(&self) -> f64 {
        self.total_dev
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + 'a {
        let (mu, d, m) = (self.mu, self.total_dev, self.scale);
        self.path.iter().map(move |&x| (d - (x - mu)) / m)
    }

    /// Fails with `NonpositiveLooSum` when some `S_n - X_k <= 0`.
    pub fn check_positive_sums(&self) -> Result<(), StatisticError> {
        let s_n = self.path.iter().copied().collect::<CompensatedSum>().value();
        for (k, &x) in self.path.iter().enumerate() {
            let loo = s_n - x;
            if loo <= 0.0 || !loo.is_finite() {
                return Err(StatisticError::NonpositiveLooSum { index: k + 1, value: loo });
            }
        }
        Ok(())
    }
}

/// Partial sums `S_k = X_1 + ... + X_k` (compensated).
pub fn prefix_sums(path: &[f64]) -> Result<Vec<f64>, StatisticError> {
    if path.is_empty() {
        return Err(StatisticError::EmptyPath);
    }
    let mut acc = CompensatedSum::new();
    Ok(path
        .iter()
        .map(|&x| {
            acc.add(x);
            acc.value()
        })
        .collect())
}

/// Log of the normalized leave-one-out product,
/// `T_n = (1/(gamma sqrt n)) sum_k log(S_{n,k} / ((n-1) mu))`.
pub fn loo_log_statistic(path: &[f64], mu: f64, gamma: f64) -> Result<f64, StatisticError> {
    check_positive("gamma", gamma)?;
    let ratios = LooRatios::new(path, mu)?;
    ratios.check_positive_sums()?;
    let mut acc = CompensatedSum::new();
    for (k, u) in ratios.iter().enumerate() {
        if u <= -1.0 {
            return Err(StatisticError::NonpositiveLooSum { index: k + 1, value: (1.0 + u) * ratios.scale });
        }
        acc.add(u.ln_1p());
    }
    Ok(acc.value() / (gamma * (path.len() as f64).sqrt()))
}

/// Log of the normalized prefix-sum product,
/// `(1/(gamma sqrt n)) sum_k log(S_k / (k mu))`.
pub fn rw_log_statistic(path: &[f64], mu: f64, gamma: f64) -> Result<f64, StatisticError> {
    if path.is_empty() {
        return Err(StatisticError::EmptyPath);
    }
    check_positive("mu", mu)?;
    check_positive("gamma", gamma)?;
    let mut dev = CompensatedSum::new();
    let mut acc = CompensatedSum::new();
    for (i, &x) in path.iter().enumerate() {
        dev.add(x - mu);
        let k_mu = (i + 1) as f64 * mu;
        acc.add((dev.value() / k_mu).ln_1p());
    }
    Ok(acc.value() / (gamma * (path.len() as f64).sqrt()))
}

/// `(1/(gamma sqrt n)) sum_k (S_{n,k}/((n-1) mu) - 1)`, summed term by term
/// over the leave-one-out sums.
pub fn linearized_statistic(path: &[f64], mu: f64, gamma: f64) -> Result<f64, StatisticError> {
    check_positive("gamma", gamma)?;
    let ratios = LooRatios::new(path, mu)?;
    let sum = ratios.iter().collect::<CompensatedSum>().value();
    Ok(sum / (gamma * (path.len() as f64).sqrt()))
}

/// `(1/sqrt n) sum_i (x_i - mu)/sigma`.
pub fn standardized_sum(path: &[f64], mu: f64, sigma: f64) -> Result<f64, StatisticError> {
    if path.is_empty() {
        return Err(StatisticError::EmptyPath);
    }
    check_positive("sigma", sigma)?;
    let sum = path.iter().map(|&x| (x - mu) / sigma).collect::<CompensatedSum>().value();
    Ok(sum / (path.len() as f64).sqrt())
}

/// `exp((1/n) sum_k log(S_k / k))`.
pub fn geometric_mean_prefix(path: &[f64]) -> Result<f64, StatisticError> {
    let sums = prefix_sums(path)?;
    let acc = sums.iter().enumerate().map(|(i, &s)| (s / (i + 1) as f64).ln()).collect::<CompensatedSum>();
    Ok((acc.value() / path.len() as f64).exp())
}

/// `exp((1/n) sum_k log(S_{n,k} / (n-1)))`.
pub fn geometric_mean_loo(path: &[f64]) -> Result<f64, StatisticError> {
    let n = path.len();
    if n < 2 {
        return Err(StatisticError::DegenerateN(n));
    }
    let s_n = path.iter().copied().collect::<CompensatedSum>().value();
    let denom = (n - 1) as f64;
    let mut acc = CompensatedSum::new();
    for (k, &x) in path.iter().enumerate() {
        let loo = s_n - x;
        if loo <= 0.0 {
            return Err(StatisticError::NonpositiveLooSum { index: k + 1, value: loo });
        }
        acc.add((loo / denom).ln());
    }
    Ok((acc.value() / n as f64).exp())
}

/// `max_k |S_{n,k}/((n-1) mu) - 1|`.
pub fn max_relative_deviation(path: &[f64], mu: f64) -> Result<f64, StatisticError> {
    let ratios = LooRatios::new(path, mu)?;
    Ok(ratios.iter().fold(0.0, |m, u| m.max(u.abs())))
}

/// `(1/(gamma sqrt n)) sum_k (S_{n,k}/((n-1) mu) - 1)^2`. Four times this
/// bounds the gap between the log and linearized statistics while every
/// ratio stays within 1/2 of one.
pub fn remainder_magnitude(path: &[f64], mu: f64, gamma: f64) -> Result<f64, StatisticError> {
    check_positive("gamma", gamma)?;
    let ratios = LooRatios::new(path, mu)?;
    let sum = ratios.iter().map(|u| u * u).collect::<CompensatedSum>().value();
    Ok(sum / (gamma * (path.len() as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn prefix_sums_examples() {
        assert_eq!(prefix_sums(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 3.0, 6.0]);
        assert_eq!(prefix_sums(&[2.5; 4]).unwrap(), vec![2.5, 5.0, 7.5, 10.0]);
        assert_eq!(prefix_sums(&[]), Err(StatisticError::EmptyPath));
    }

    #[test]
    fn loo_examples() {
        assert_eq!(loo_log_statistic(&[3.7, 3.7], 3.7, 0.9).unwrap(), 0.0);
        // 50-digit evaluation of (2/sqrt 3)(ln(5/4) + ln(3/4))
        close(loo_log_statistic(&[1.0, 2.0, 3.0], 2.0, 0.5).unwrap(), -0.074_522_665_103_754_14, 1e-15);
        let (c, mu, gamma, n) = (1.3_f64, 1.1_f64, 0.7, 9usize);
        let expected = (n as f64).sqrt() / gamma * (c / mu).ln();
        close(loo_log_statistic(&vec![c; n], mu, gamma).unwrap(), expected, 1e-13);
    }

    #[test]
    fn loo_rejects_degenerate_inputs() {
        assert_eq!(loo_log_statistic(&[1.0], 1.0, 1.0), Err(StatisticError::DegenerateN(1)));
        assert!(matches!(
            loo_log_statistic(&[1.0, 0.0], 1.0, 1.0),
            Err(StatisticError::NonpositiveLooSum { index: 1, .. })
        ));
        assert!(loo_log_statistic(&[1.0, 2.0], 0.0, 1.0).is_err());
        assert!(loo_log_statistic(&[1.0, 2.0], 1.0, -1.0).is_err());
    }

    #[test]
    fn rw_examples() {
        assert_eq!(rw_log_statistic(&[1.0, 1.0, 1.0], 1.0, 0.3).unwrap(), 0.0);
        // sqrt(2) ln 2
        close(rw_log_statistic(&[2.0, 2.0], 1.0, 1.0).unwrap(), 0.980_258_143_468_547_2, 1e-15);
        assert_eq!(rw_log_statistic(&[4.2; 7], 4.2, 2.0).unwrap(), 0.0);
        assert_eq!(rw_log_statistic(&[], 1.0, 1.0), Err(StatisticError::EmptyPath));
    }

    #[test]
    fn rw_depends_on_order() {
        let a = rw_log_statistic(&[1.0, 3.0], 2.0, 0.5).unwrap();
        let b = rw_log_statistic(&[3.0, 1.0], 2.0, 0.5).unwrap();
        assert!((a - b).abs() > 0.1, "{a} {b}");
    }

    #[test]
    fn linearized_and_standardized_examples() {
        assert_eq!(linearized_statistic(&[2.0; 5], 2.0, 0.5).unwrap(), 0.0);
        assert_eq!(linearized_statistic(&[1.0, 3.0], 2.0, 0.5).unwrap(), 0.0);
        assert_eq!(linearized_statistic(&[1.0], 2.0, 0.5), Err(StatisticError::DegenerateN(1)));
        assert_eq!(standardized_sum(&[2.0; 5], 2.0, 1.0).unwrap(), 0.0);
        assert_eq!(standardized_sum(&[1.0, 3.0], 2.0, 1.0).unwrap(), 0.0);
        assert_eq!(standardized_sum(&[3.0], 2.0, 1.0).unwrap(), 1.0);
        assert_eq!(standardized_sum(&[], 2.0, 1.0), Err(StatisticError::EmptyPath));
    }

    #[test]
    fn geometric_means() {
        close(geometric_mean_prefix(&[0.7; 50]).unwrap(), 0.7, 1e-14);
        close(geometric_mean_prefix(&[1.0, 3.0]).unwrap(), std::f64::consts::SQRT_2, 1e-15);
        close(geometric_mean_loo(&[0.7; 50]).unwrap(), 0.7, 1e-14);
        close(geometric_mean_loo(&[1.0, 3.0]).unwrap(), 3f64.sqrt(), 1e-15);
        assert_eq!(geometric_mean_loo(&[1.0]), Err(StatisticError::DegenerateN(1)));
        assert_eq!(geometric_mean_prefix(&[]), Err(StatisticError::EmptyPath));
    }

    #[test]
    fn diagnostics_examples() {
        assert_eq!(max_relative_deviation(&[1.5; 4], 1.5).unwrap(), 0.0);
        assert_eq!(max_relative_deviation(&[1.0, 3.0], 2.0).unwrap(), 0.5);
        assert_eq!(remainder_magnitude(&[1.5; 4], 1.5, 1.0).unwrap(), 0.0);
        close(remainder_magnitude(&[1.0, 3.0], 2.0, 0.5).unwrap(), std::f64::consts::FRAC_1_SQRT_2, 1e-15);
        assert_eq!(remainder_magnitude(&[1.0], 2.0, 0.5), Err(StatisticError::DegenerateN(1)));
    }

    #[test]
    fn kind_tags_round_trip() {
        for k in StatisticKind::ALL {
            assert_eq!(k.tag().parse::<StatisticKind>().unwrap(), k);
        }
        assert!("bogus".parse::<StatisticKind>().is_err());
    }
}
