//! Limiting distribution functions: the standard normal, its variance-2
//! version, the two lognormal laws `e^Z` and `e^(sqrt 2 Z)`, and point masses.

#![allow(clippy::excessive_precision)]

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::LimitError;

// Complementary error function after the FreeBSD/SunPro msun `s_erf.c`
// rational approximations (max error below 1 ulp).

const ERX: f64 = 8.45062911510467529297e-01;
const EFX: f64 = 1.28379167095512586316e-01;

const PP: [f64; 5] = [
    1.28379167095512558561e-01,
    -3.25042107247001499370e-01,
    -2.84817495755985104766e-02,
    -5.77027029648944159157e-03,
    -2.37630166566501626084e-05,
];
const QQ: [f64; 5] = [
    3.97917223959155352819e-01,
    6.50222499887672944485e-02,
    5.08130628187576562776e-03,
    1.32494738004321644526e-04,
    -3.96022827877536812320e-06,
];
const PA: [f64; 7] = [
    -2.36211856075265944077e-03,
    4.14856118683748331666e-01,
    -3.72207876035701323847e-01,
    3.18346619901161753674e-01,
    -1.10894694282396677476e-01,
    3.54783043256182359371e-02,
    -2.16637559486879084300e-03,
];
const QA: [f64; 6] = [
    1.06420880400844228286e-01,
    5.40397917702171048937e-01,
    7.18286544141962662868e-02,
    1.26171219808761642112e-01,
    1.36370839120290507362e-02,
    1.19844998467991074170e-02,
];
const RA: [f64; 8] = [
    -9.86494403484714822705e-03,
    -6.93858572707181764372e-01,
    -1.05586262253232909814e+01,
    -6.23753324503260060396e+01,
    -1.62396669462573470355e+02,
    -1.84605092906711035994e+02,
    -8.12874355063065934246e+01,
    -9.81432934416914548592e+00,
];
const SA: [f64; 8] = [
    1.96512716674392571292e+01,
    1.37657754143519042600e+02,
    4.34565877475229228821e+02,
    6.45387271733267880336e+02,
    4.29008140027567833386e+02,
    1.08635005541779435134e+02,
    6.57024977031928170135e+00,
    -6.04244152148580987438e-02,
];
const RB: [f64; 7] = [
    -9.86494292470009928597e-03,
    -7.99283237680523006574e-01,
    -1.77579549177547519889e+01,
    -1.60636384855821916062e+02,
    -6.37566443368389627722e+02,
    -1.02509513161107724954e+03,
    -4.83519191608651397019e+02,
];
const SB: [f64; 7] = [
    3.03380607434824582924e+01,
    3.25792512996573918826e+02,
    1.53672958608443695994e+03,
    3.19985821950859553908e+03,
    2.55305040643316442583e+03,
    4.74528541206955367215e+02,
    -2.24409524465858183362e+01,
];

/// Horner evaluation, lowest degree first.
#[inline]
fn poly(z: f64, c: &[f64]) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * z + k)
}

/// `1 + z * poly(z, c)`.
#[inline]
fn poly1(z: f64, c: &[f64]) -> f64 {
    1.0 + z * poly(z, c)
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let neg = x < 0.0;
    let ax = x.abs();
    if ax < 0.84375 {
        let t = if ax < 1.3877787807814457e-17 {
            ax
        } else {
            let z = ax * ax;
            let y = poly(z, &PP) / poly1(z, &QQ);
            if ax < 0.25 {
                ax + ax * y
            } else {
                0.5 + (ax * y + (ax - 0.5))
            }
        };
        return if neg { 1.0 + t } else { 1.0 - t };
    }
    if ax < 1.25 {
        let s = ax - 1.0;
        let r = poly(s, &PA) / poly1(s, &QA);
        return if neg { 1.0 + ERX + r } else { 1.0 - ERX - r };
    }
    if ax >= 28.0 {
        return if neg { 2.0 } else { 0.0 };
    }
    if neg && ax > 6.0 {
        return 2.0;
    }
    let s = 1.0 / (ax * ax);
    let (r, q) = if ax < 1.0 / 0.35 { (poly(s, &RA), poly1(s, &SA)) } else { (poly(s, &RB), poly1(s, &SB)) };
    // split x*x so the large part is exact in double precision
    let hi = f64::from_bits(ax.to_bits() & 0xffff_ffff_0000_0000);
    let e = (-hi * hi - 0.5625).exp() * ((hi - ax) * (hi + ax) + r / q).exp();
    if neg {
        2.0 - e / ax
    } else {
        e / ax
    }
}

/// Error function, `1 - erfc(x)` with the small-argument branch kept exact.
pub fn erf(x: f64) -> f64 {
    if x.abs() < 0.84375 {
        let z = x * x;
        if x.abs() < 3.725290298461914e-9 {
            return x + EFX * x;
        }
        return x + x * (poly(z, &PP) / poly1(z, &QQ));
    }
    if x < 0.0 {
        erfc(-x) - 1.0
    } else {
        1.0 - erfc(x)
    }
}

/// Standard normal distribution function `Phi(x) = erfc(-x/sqrt 2)/2`.
pub fn normal_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Inverse of [`normal_cdf`]: bisection on a bracket, then a safeguarded
/// secant polish.
pub fn normal_quantile(p: f64) -> Result<f64, LimitError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(LimitError::OutOfRange(p));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let f = |x: f64| normal_cdf(x) - p;
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    let (mut flo, mut fhi) = (f(lo), f(hi));
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm < 0.0 {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    for _ in 0..60 {
        if fhi == flo {
            break;
        }
        let mut x = hi - fhi * (hi - lo) / (fhi - flo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(if flo.abs() <= fhi.abs() { lo } else { hi })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum LimitLaw {
    /// `Phi`
    StdNormal,
    /// Law of `sqrt 2 Z`.
    NormalVar2,
    /// Law of `e^Z`.
    ExpNormal,
    /// Law of `e^(sqrt 2 Z)`.
    ExpSqrt2Normal,
    /// Degenerate law at the given point.
    PointMass(f64),
}

impl LimitLaw {
    pub fn cdf(self, x: f64) -> f64 {
        match self {
            Self::StdNormal => normal_cdf(x),
            Self::NormalVar2 => normal_cdf(x * FRAC_1_SQRT_2),
            Self::ExpNormal => {
                if x > 0.0 {
                    normal_cdf(x.ln())
                } else {
                    0.0
                }
            }
            Self::ExpSqrt2Normal => {
                if x > 0.0 {
                    normal_cdf(x.ln() * FRAC_1_SQRT_2)
                } else {
                    0.0
                }
            }
            Self::PointMass(mu) => {
                if x >= mu {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Smallest x with `cdf(x) >= p`.
    pub fn quantile(self, p: f64) -> Result<f64, LimitError> {
        let z = normal_quantile(p)?;
        Ok(match self {
            Self::StdNormal => z,
            Self::NormalVar2 => SQRT_2 * z,
            Self::ExpNormal => z.exp(),
            Self::ExpSqrt2Normal => (SQRT_2 * z).exp(),
            Self::PointMass(mu) => mu,
        })
    }

    /// The law of `ln X` for the two lognormal laws; other laws unchanged.
    pub fn log_scale(self) -> Self {
        match self {
            Self::ExpNormal => Self::StdNormal,
            Self::ExpSqrt2Normal => Self::NormalVar2,
            other => other,
        }
    }

    /// The law of `e^X` for the two normal laws; other laws unchanged.
    pub fn product_scale(self) -> Self {
        match self {
            Self::StdNormal => Self::ExpNormal,
            Self::NormalVar2 => Self::ExpSqrt2Normal,
            other => other,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Self::StdNormal => "n01",
            Self::NormalVar2 => "n02",
            Self::ExpNormal => "expnorm",
            Self::ExpSqrt2Normal => "expsqrt2",
            Self::PointMass(_) => "point",
        }
    }
}

/// Free-function form of [`LimitLaw::cdf`].
pub fn limit_cdf(law: LimitLaw, x: f64) -> f64 {
    law.cdf(x)
}

impl fmt::Display for LimitLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PointMass(mu) => write!(f, "point:{mu}"),
            other => f.write_str(other.tag()),
        }
    }
}

impl FromStr for LimitLaw {
    type Err = LimitError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "n01" => Ok(Self::StdNormal),
            "n02" => Ok(Self::NormalVar2),
            "expnorm" => Ok(Self::ExpNormal),
            "expsqrt2" => Ok(Self::ExpSqrt2Normal),
            _ => s
                .strip_prefix("point:")
                .and_then(|v| v.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .map(Self::PointMass)
                .ok_or_else(|| LimitError::UnknownLaw(s.to_string())),
        }
    }
}

impl TryFrom<String> for LimitLaw {
    type Error = LimitError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<LimitLaw> for String {
    fn from(law: LimitLaw) -> String {
        law.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_examples() {
        assert_eq!(normal_cdf(0.0), 0.5);
        for x in [0.1, 0.9, 1.3, 2.5, 4.0, 7.5] {
            assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() <= 1e-14);
        }
        // mpmath, 50 digits
        assert!((normal_cdf(1.959963985) - 0.975_000_000_026_881_56).abs() <= 1e-15);
        assert_eq!(normal_cdf(f64::INFINITY), 1.0);
        assert_eq!(normal_cdf(f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn erf_spot_values() {
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-16);
        assert!((erf(-0.5) + 0.520_499_877_813_046_5).abs() < 1e-16);
        assert!((erfc(3.0) - 2.209_049_699_858_544e-5).abs() < 1e-20);
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        for p in [1e-6, 0.01, 0.2, 0.37] {
            let s = normal_quantile(p).unwrap() + normal_quantile(1.0 - p).unwrap();
            assert!(s.abs() <= 1e-10, "{p}: {s}");
        }
        assert!((normal_quantile(0.975).unwrap() - 1.959963985).abs() <= 1e-6);
        assert_eq!(normal_quantile(0.0), Err(LimitError::OutOfRange(0.0)));
        assert_eq!(normal_quantile(1.0), Err(LimitError::OutOfRange(1.0)));
        assert!(normal_quantile(f64::NAN).is_err());
    }

    #[test]
    fn law_examples() {
        assert_eq!(limit_cdf(LimitLaw::ExpNormal, 1.0), 0.5);
        assert_eq!(limit_cdf(LimitLaw::ExpSqrt2Normal, -3.0), 0.0);
        assert_eq!(limit_cdf(LimitLaw::ExpNormal, 0.0), 0.0);
        let v = limit_cdf(LimitLaw::ExpSqrt2Normal, SQRT_2.exp());
        assert!((v - 0.841_344_746_068_542_9).abs() < 1e-14);
        assert_eq!(limit_cdf(LimitLaw::PointMass(2.0), 2.0), 1.0);
        assert_eq!(limit_cdf(LimitLaw::PointMass(2.0), 1.999), 0.0);
        assert!((limit_cdf(LimitLaw::NormalVar2, SQRT_2) - normal_cdf(1.0)).abs() < 1e-15);
    }

    #[test]
    fn law_tags_round_trip() {
        for law in [
            LimitLaw::StdNormal,
            LimitLaw::NormalVar2,
            LimitLaw::ExpNormal,
            LimitLaw::ExpSqrt2Normal,
            LimitLaw::PointMass(1.5),
        ] {
            assert_eq!(law.to_string().parse::<LimitLaw>().unwrap(), law);
        }
        assert!("point".parse::<LimitLaw>().is_err());
        assert!("t3".parse::<LimitLaw>().is_err());
    }
}
