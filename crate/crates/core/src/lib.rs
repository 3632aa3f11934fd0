//! Annealed statistics of stationary points in random landscapes.
//!
//! Three models share one GOE Monte Carlo engine: the unconstrained landscape
//! with a confining parabola, its fixed-energy variant and the spherical p-spin
//! model. Throughout, `n` is the landscape dimension `N` and the relevant
//! random matrix is `GOE_{N+1}` in the convention where the spectral edge sits
//! at `sqrt(2(N+1))`.

pub mod constrained;
pub mod error;
pub mod goe;
pub mod landscape;
pub mod pspin;
pub mod quad;
pub mod report;
pub mod roots;
pub mod special;
pub mod verify;

pub use error::{Error, Result};

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn new(value: f64, stderr: f64) -> Self {
        Self { value, stderr }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }

    /// z-score of the difference between two independent estimates.
    pub fn z_against(&self, other: &Estimate) -> f64 {
        let se = (self.stderr * self.stderr + other.stderr * other.stderr).sqrt();
        if se == 0.0 {
            if self.value == other.value {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - other.value) / se
        }
    }
}

/// Estimate of a positive quantity kept in log space.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LogEstimate {
    pub log_value: f64,
    /// Standard error of the value relative to the value itself.
    pub rel_stderr: f64,
}

impl LogEstimate {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }

    pub fn estimate(&self) -> Estimate {
        let v = self.value();
        Estimate::new(v, v * self.rel_stderr)
    }
}
