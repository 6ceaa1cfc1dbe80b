//! O(1)-per-draw approximation of the leave-one-out log statistic.
//!
//! With `d_k = x_k - mu`, `D = sum d_k` and `m = (n-1) mu`, every centered
//! leave-one-out ratio is `u_k = (D - d_k)/m`. The third-order Taylor sum
//! `sum_k (u_k - u_k^2/2 + u_k^3/3)` expands exactly into the raw power sums
//! `p_j = sum d_k^j`:
//!
//! ```text
//! sum u_k   = (n-1) D / m
//! sum u_k^2 = ((n-2) D^2 + p2) / m^2
//! sum u_k^3 = ((n-3) D^3 + 3 D p2 - p3) / m^3
//! ```
//!
//! so the statistic needs only `(n, D, p2, p3, max|d_k|)` at any time.

use crate::error::StreamingError;
use crate::sum::CompensatedSum;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerSumState {
    n: usize,
    mu: f64,
    sum: CompensatedSum,
    p1: CompensatedSum,
    p2: CompensatedSum,
    p3: CompensatedSum,
    max_abs_d: f64,
}

/// Result of the series evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Every `|u_k|` is at most 1/2, so the truncation bound applies.
    pub valid: bool,
    /// Upper bound on `|u_k|` for all k: `(|D| + max|d_k|)/m`.
    pub max_ratio: f64,
    /// `(1/(gamma sqrt n)) n u^4 / (4 (1 - u))` with `u = max_ratio`; an
    /// upper bound on `|value - exact|` whenever `valid`.
    pub error_bound: f64,
}

impl PowerSumState {
    pub fn new(mu: f64) -> Result<Self, StreamingError> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(StreamingError::NonpositiveMu(mu));
        }
        Ok(Self {
            n: 0,
            mu,
            sum: CompensatedSum::new(),
            p1: CompensatedSum::new(),
            p2: CompensatedSum::new(),
            p3: CompensatedSum::new(),
            max_abs_d: 0.0,
        })
    }

    #[inline]
    pub fn push(&mut self, x: f64) -> Result<(), StreamingError> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(StreamingError::NonpositiveDraw(x));
        }
        let d = x - self.mu;
        let d2 = d * d;
        self.n += 1;
        self.sum.add(x);
        self.p1.add(d);
        self.p2.add(d2);
        self.p3.add(d2 * d);
        self.max_abs_d = self.max_abs_d.max(d.abs());
        Ok(())
    }

    /// Value-returning form of [`push`](Self::push).
    pub fn updated(mut self, x: f64) -> Result<Self, StreamingError> {
        self.push(x)?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `S_n = x_1 + ... + x_n`.
    pub fn sum(&self) -> f64 {
        self.sum.value()
    }

    /// `D = sum (x_k - mu)`.
    pub fn p1(&self) -> f64 {
        self.p1.value()
    }

    pub fn p2(&self) -> f64 {
        self.p2.value()
    }

    pub fn p3(&self) -> f64 {
        self.p3.value()
    }

    pub fn max_abs_d(&self) -> f64 {
        self.max_abs_d
    }

    /// Exact linearized statistic `(1/(gamma sqrt n)) sum_k u_k`.
    pub fn linearized(&self, gamma: f64) -> Result<f64, StreamingError> {
        if self.n < 2 {
            return Err(StreamingError::DegenerateN(self.n));
        }
        let n = self.n as f64;
        let m = (n - 1.0) * self.mu;
        Ok((n - 1.0) * self.p1() / m / (gamma * n.sqrt()))
    }

    /// Third-order series for the leave-one-out log statistic.
    pub fn loo_log_series(&self, gamma: f64) -> Result<SeriesValue, StreamingError> {
        if self.n < 2 {
            return Err(StreamingError::DegenerateN(self.n));
        }
        let n = self.n as f64;
        let m = (n - 1.0) * self.mu;
        let d = self.p1();
        let (p2, p3) = (self.p2(), self.p3());
        let first = (n - 1.0) * d / m;
        let second = ((n - 2.0) * d * d + p2) / (2.0 * m * m);
        let third = ((n - 3.0) * d * d * d + 3.0 * d * p2 - p3) / (3.0 * m * m * m);
        let norm = gamma * n.sqrt();
        let max_ratio = (d.abs() + self.max_abs_d) / m;
        let valid = max_ratio <= 0.5;
        let error_bound = if valid { n * max_ratio.powi(4) / (4.0 * (1.0 - max_ratio)) / norm } else { f64::INFINITY };
        Ok(SeriesValue { value: (first - second + third) / norm, valid, max_ratio, error_bound })
    }
}

/// Free-function form of [`PowerSumState::new`].
pub fn init_state(mu: f64) -> Result<PowerSumState, StreamingError> {
    PowerSumState::new(mu)
}

/// Free-function form of [`PowerSumState::updated`].
pub fn update_state(state: PowerSumState, x: f64) -> Result<PowerSumState, StreamingError> {
    state.updated(x)
}

/// Free-function form of [`PowerSumState::loo_log_series`].
pub fn loo_log_series(state: &PowerSumState, gamma: f64) -> Result<SeriesValue, StreamingError> {
    state.loo_log_series(gamma)
}
