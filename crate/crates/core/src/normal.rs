//! Standard normal numerics and a truncated Gaussian on the log scale.

use rand::Rng;
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal cumulative distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Upper tail `1 - normal_cdf(z)`, computed without cancellation.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Log density of `N(mu, sigma^2)` at `x`.
pub fn gaussian_ln_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    -0.5 * z * z - sigma.ln() - LN_SQRT_2PI
}

/// Inverse of [`normal_cdf`] for `p` in `(0, 1)`.
pub fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Gaussian `N(mu, sigma^2)` restricted to `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormal {
    mu: f64,
    sigma: f64,
    a: f64,
    b: f64,
    mass: f64,
}

impl TruncatedNormal {
    pub fn new(mu: f64, sigma: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(sigma > 0.0) || !mu.is_finite() {
            return Err(Error::Domain(format!(
                "truncated normal needs finite mu and sigma > 0 (mu {mu}, sigma {sigma})"
            )));
        }
        if !(lo < hi) {
            return Err(Error::Domain(format!("empty truncation range [{lo}, {hi}]")));
        }
        let a = (lo - mu) / sigma;
        let b = (hi - mu) / sigma;
        let mass = if a >= 0.0 { normal_sf(a) - normal_sf(b) } else { normal_cdf(b) - normal_cdf(a) };
        Ok(Self { mu, sigma, a, b, mass })
    }

    /// Probability mass of the untruncated Gaussian inside the range.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn mean(&self) -> f64 {
        let phi_diff = normal_pdf(self.a) - normal_pdf(self.b);
        self.mu + self.sigma * phi_diff / self.mass
    }

    pub fn variance(&self) -> f64 {
        let (a, b) = (self.a, self.b);
        let pa = if a.is_finite() { a * normal_pdf(a) } else { 0.0 };
        let pb = if b.is_finite() { b * normal_pdf(b) } else { 0.0 };
        let r = (normal_pdf(a) - normal_pdf(b)) / self.mass;
        self.sigma * self.sigma * (1.0 + (pa - pb) / self.mass - r * r)
    }

    /// Maps a uniform `u` in `[0, 1)` to a draw by inverting the CDF.
    /// Works in the upper tail when the range lies above the mean so that
    /// far tails keep their precision.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let z = if self.a >= 0.0 {
            let sb = normal_sf(self.b);
            let sa = normal_sf(self.a);
            let s = sa - u * (sa - sb);
            -normal_quantile(s)
        } else {
            let ca = normal_cdf(self.a);
            let cb = normal_cdf(self.b);
            normal_quantile(ca + u * (cb - ca))
        };
        (self.mu + self.sigma * z).clamp(self.mu + self.sigma * self.a, self.mu + self.sigma * self.b)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_cdf(rng.random::<f64>())
    }
}
