use rand::Rng;

use super::{GeometryError, UnitVector};
use crate::scalar::Real;

/// Uniform point on `S_n`: `n + 1` independent standard normals, normalized.
pub fn uniform_sample<T: Real, R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> Result<UnitVector<T>, GeometryError> {
    if n == 0 {
        return Err(GeometryError::NonpositiveDimension);
    }
    loop {
        let coords: Vec<T> = (0..=n).map(|_| T::sample_standard_normal(rng)).collect();
        match UnitVector::from_unnormalized(coords) {
            Err(GeometryError::ZeroVector) => continue,
            other => return other,
        }
    }
}

/// Accepted sample together with the 1-based iteration at which it was accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasedSampleResult<T> {
    pub sample: UnitVector<T>,
    pub iterations: u64,
}

pub const DEFAULT_ITERATION_CAP: u64 = 1_000_000;

/// Rejection sampler for the density `|a·λ| / R_n` on `S_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RejectionSampler {
    pub cap: u64,
}

impl Default for RejectionSampler {
    fn default() -> Self {
        Self {
            cap: DEFAULT_ITERATION_CAP,
        }
    }
}

impl RejectionSampler {
    pub fn with_cap(cap: u64) -> Self {
        Self { cap }
    }

    /// Draws candidates and acceptance coins from a single generator.
    pub fn sample<T: Real, R: Rng + ?Sized>(
        &self,
        a: &UnitVector<T>,
        rng: &mut R,
    ) -> Result<BiasedSampleResult<T>, GeometryError> {
        let n = a.sphere_dim();
        // Candidate then coin, from the same stream, in that order.
        for k in 1..=self.cap {
            let lambda = uniform_sample(n, rng)?;
            let u = T::sample_unit_interval(rng);
            if accepts(a, &lambda, u)? {
                return Ok(BiasedSampleResult {
                    sample: lambda,
                    iterations: k,
                });
            }
        }
        Err(GeometryError::IterationCap { cap: self.cap })
    }

    /// Runs the rejection loop over externally supplied candidates and coins.
    ///
    /// `candidate(k)` must return the `k`-th uniform point (1-based);
    /// `coin()` returns the next uniform `[0, 1)` draw.
    pub fn sample_with<T, C, U>(
        &self,
        a: &UnitVector<T>,
        mut candidate: C,
        mut coin: U,
    ) -> Result<BiasedSampleResult<T>, GeometryError>
    where
        T: Real,
        C: FnMut(u64) -> Result<UnitVector<T>, GeometryError>,
        U: FnMut() -> T,
    {
        for k in 1..=self.cap {
            let lambda = candidate(k)?;
            if accepts(a, &lambda, coin())? {
                return Ok(BiasedSampleResult {
                    sample: lambda,
                    iterations: k,
                });
            }
        }
        Err(GeometryError::IterationCap { cap: self.cap })
    }
}

/// Accept iff `u < |a·λ|`; equality rejects.
#[inline]
pub fn accepts<T: Real>(
    a: &UnitVector<T>,
    lambda: &UnitVector<T>,
    u: T,
) -> Result<bool, GeometryError> {
    Ok(u < a.try_dot(lambda)?.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_samples_are_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 2, 7, 31, 127] {
            let v = uniform_sample::<f64, _>(n, &mut rng).unwrap();
            assert_eq!(v.coords().len(), n + 1);
            assert!((v.norm() - 1.0).abs() < 1e-9);
        }
        assert!(uniform_sample::<f64, _>(0, &mut rng).is_err());
    }

    #[test]
    fn coordinate_means_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = 100_000;
        let mut sums = [0.0f64; 8];
        for _ in 0..trials {
            let v = uniform_sample::<f64, _>(7, &mut rng).unwrap();
            for (s, c) in sums.iter_mut().zip(v.coords()) {
                *s += c;
            }
        }
        // Var of one coordinate is 1/(n+1); 3σ window.
        let se = (1.0 / 8.0f64).sqrt() / (trials as f64).sqrt();
        for s in sums {
            assert!((s / trials as f64).abs() < 3.0 * se);
        }
    }

    #[test]
    fn iteration_cap_is_reported() {
        // a·λ ≡ 0 never accepts.
        let a = UnitVector::basis(2, 0);
        let lambda = UnitVector::basis(2, 1);
        let err = RejectionSampler::with_cap(50)
            .sample_with(&a, |_| Ok(lambda.clone()), || 0.0)
            .unwrap_err();
        assert!(matches!(err, GeometryError::IterationCap { cap: 50 }));
    }

    #[test]
    fn tie_rejects() {
        let a = UnitVector::basis(1, 0);
        let lambda = UnitVector::new(vec![0.6, 0.8]).unwrap();
        assert!(!accepts(&a, &lambda, 0.6).unwrap());
        assert!(accepts(&a, &lambda, 0.599).unwrap());
    }

    #[test]
    fn sample_with_reports_first_acceptance() {
        let a = UnitVector::basis(1, 0);
        let cands = [
            UnitVector::basis(1, 1),
            UnitVector::basis(1, 1),
            UnitVector::basis(1, 0),
        ];
        let res = RejectionSampler::default()
            .sample_with(&a, |k| Ok(cands[(k - 1) as usize].clone()), || 0.5)
            .unwrap();
        assert_eq!(res.iterations, 3);
        assert_eq!(res.sample, UnitVector::basis(1, 0));
    }

    #[test]
    fn seeded_sampler_is_deterministic() {
        let a = UnitVector::basis(7, 3);
        let x = RejectionSampler::default()
            .sample::<f64, _>(&a, &mut ChaCha8Rng::seed_from_u64(9))
            .unwrap();
        let y = RejectionSampler::default()
            .sample::<f64, _>(&a, &mut ChaCha8Rng::seed_from_u64(9))
            .unwrap();
        assert_eq!(x, y);
        assert!(x.iterations >= 1);
    }
}
