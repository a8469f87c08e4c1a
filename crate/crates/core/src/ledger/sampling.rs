use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Normal distribution truncated to `[0, ∞)` by rejection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncatedNormal {
    pub mean: f64,
    pub std: f64,
}

impl TruncatedNormal {
    pub const ZERO: TruncatedNormal = TruncatedNormal { mean: 0.0, std: 0.0 };

    pub const fn new(mean: f64, std: f64) -> Self {
        Self { mean, std }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.mean.is_finite() && self.mean >= 0.0) {
            return Err(format!("mean must be finite and non-negative, got {}", self.mean));
        }
        if !(self.std.is_finite() && self.std >= 0.0) {
            return Err(format!("std must be finite and non-negative, got {}", self.std));
        }
        Ok(())
    }

    /// Value at standard score `z`, or `None` when it falls below zero.
    fn at(&self, z: f64) -> Option<f64> {
        let x = self.mean + self.std * z;
        (x >= 0.0).then_some(x)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.std == 0.0 {
            return self.mean;
        }
        // mean >= 0 keeps the acceptance rate at or above one half.
        loop {
            let z: f64 = StandardNormal.sample(rng);
            if let Some(x) = self.at(z) {
                return x;
            }
        }
    }
}

/// Draw from two distributions with a shared standard score, so paired runs
/// differ only through their parameters.
pub fn sample_paired<R: Rng + ?Sized>(
    a: &TruncatedNormal,
    b: &TruncatedNormal,
    rng: &mut R,
) -> (f64, f64) {
    loop {
        let z: f64 = StandardNormal.sample(rng);
        if let (Some(x), Some(y)) = (a.at(z), b.at(z)) {
            return (x, y);
        }
    }
}
