//! Real hypersphere mathematics: areas, the `|a·λ|` normalization constant,
//! uniform and biased sampling on `S_n`, and geometric-law entropy.
//!
//! `S_n` is the unit sphere in `R^{n+1}`; a [`UnitVector`] with `n + 1`
//! coordinates lives on it.

mod gamma;
mod measure;
mod sampling;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

pub use gamma::ln_gamma;
pub use measure::{
    acceptance_bounds, acceptance_probability, geometric_entropy, geometric_pmf, half_gamma_ratio,
    ln_surface_area, normalization_r, surface_area,
};
pub use sampling::{
    accepts, uniform_sample, BiasedSampleResult, RejectionSampler, DEFAULT_ITERATION_CAP,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("sphere dimension must be at least 1")]
    NonpositiveDimension,
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("vector is not unit norm (norm {norm})")]
    NotUnitNorm { norm: f64 },
    #[error("dimension mismatch: {left} vs {right} coordinates")]
    DimensionMismatch { left: usize, right: usize },
    #[error("rejection sampler hit its iteration cap of {cap}")]
    IterationCap { cap: u64 },
    #[error("probability {value} is outside (0, 1)")]
    OutOfRange { value: f64 },
}

/// Point on the unit sphere `S_n ⊂ R^{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitVector<T> {
    coords: Vec<T>,
}

impl<T: Real> UnitVector<T> {
    /// Norm tolerance: `1e-9`, or what the scalar type can resolve.
    pub fn norm_tolerance() -> T {
        T::lit(1e-9).max(T::resolvable_tolerance())
    }

    /// Wraps coordinates that already have unit norm.
    pub fn new(coords: Vec<T>) -> Result<Self, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::ZeroVector);
        }
        let norm = l2(&coords);
        if norm.is_nan() || (norm - T::one()).abs() > Self::norm_tolerance() {
            return Err(GeometryError::NotUnitNorm {
                norm: norm.to_f64_lossy(),
            });
        }
        Ok(Self { coords })
    }

    pub fn from_unnormalized(mut coords: Vec<T>) -> Result<Self, GeometryError> {
        let norm = l2(&coords);
        if coords.is_empty() || norm == T::zero() || !norm.is_finite() {
            return Err(GeometryError::ZeroVector);
        }
        for c in coords.iter_mut() {
            *c /= norm;
        }
        Ok(Self { coords })
    }

    /// `k`-th standard basis vector of `R^{n+1}`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut coords = vec![T::zero(); n + 1];
        coords[k] = T::one();
        Self { coords }
    }

    /// `n`, the dimension of the sphere the vector lies on.
    pub fn sphere_dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn norm(&self) -> T {
        l2(&self.coords)
    }

    /// Panics on mismatched lengths; see [`UnitVector::try_dot`].
    pub fn dot(&self, other: &Self) -> T {
        self.try_dot(other)
            .expect("dot of unit vectors of different dimension")
    }

    #[inline]
    pub fn try_dot(&self, other: &Self) -> Result<T, GeometryError> {
        if self.coords.len() != other.coords.len() {
            return Err(GeometryError::DimensionMismatch {
                left: self.coords.len(),
                right: other.coords.len(),
            });
        }
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .fold(T::zero(), |acc, (&x, &y)| acc + x * y))
    }

    pub fn negated(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|&c| -c).collect(),
        }
    }
}

fn l2<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks_norm() {
        assert!(UnitVector::new(vec![0.6f64, 0.8]).is_ok());
        assert!(matches!(
            UnitVector::new(vec![1.0f64, 1.0]),
            Err(GeometryError::NotUnitNorm { .. })
        ));
        assert!(matches!(
            UnitVector::<f64>::from_unnormalized(vec![0.0, 0.0]),
            Err(GeometryError::ZeroVector)
        ));
        assert!(UnitVector::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn dot_dimension_mismatch() {
        let a = UnitVector::<f64>::basis(2, 0);
        let b = UnitVector::<f64>::basis(3, 0);
        assert!(matches!(
            a.try_dot(&b),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn serializes_as_plain_array() {
        let v = UnitVector::new(vec![0.6f64, 0.8]).unwrap();
        assert_eq!(serde_json::to_string(&v).unwrap(), "[0.6,0.8]");
    }
}
