use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, OracleError, Tolerances};
use crate::scalar::Real;

/// Pure state of two `d`-level systems.
///
/// Amplitudes are indexed Alice-major: the amplitude of `|i_A⟩|i_B⟩` sits at
/// `d * i_A + i_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureBipartiteState<T> {
    dim: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> PureBipartiteState<T> {
    pub fn new(
        dim: usize,
        amplitudes: Vec<Complex<T>>,
        tol: &Tolerances<T>,
    ) -> Result<Self, OracleError> {
        if dim == 0 || amplitudes.len() != dim * dim {
            return Err(OracleError::ShapeMismatch {
                expected: dim * dim,
                found: amplitudes.len(),
            });
        }
        let norm = norm_of(&amplitudes);
        if norm.is_nan() || (norm - T::one()).abs() > tol.norm {
            return Err(OracleError::NotNormalized {
                norm: norm.to_f64_lossy(),
            });
        }
        Ok(Self { dim, amplitudes })
    }

    /// Normalizes an arbitrary nonzero amplitude vector.
    pub fn normalized(dim: usize, mut amplitudes: Vec<Complex<T>>) -> Result<Self, OracleError> {
        let norm = norm_of(&amplitudes);
        if norm == T::zero() || !norm.is_finite() {
            return Err(OracleError::AllZeroCoefficients);
        }
        for a in amplitudes.iter_mut() {
            *a /= norm;
        }
        Self::new(dim, amplitudes, &Tolerances::standard())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    /// Reduced density matrix of Alice's subsystem.
    pub fn reduced_alice(&self) -> ComplexMatrix<T> {
        let d = self.dim;
        let mut rho = ComplexMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let v: Complex<T> = (0..d)
                    .map(|b| self.amplitudes[d * i + b] * self.amplitudes[d * j + b].conj())
                    .sum();
                rho.set(i, j, v);
            }
        }
        rho
    }

    /// Reduced density matrix of Bob's subsystem.
    pub fn reduced_bob(&self) -> ComplexMatrix<T> {
        let d = self.dim;
        let mut rho = ComplexMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let v: Complex<T> = (0..d)
                    .map(|a| self.amplitudes[d * a + i] * self.amplitudes[d * a + j].conj())
                    .sum();
                rho.set(i, j, v);
            }
        }
        rho
    }

    /// True when both reduced states equal `I/d` within `tol`.
    pub fn is_maximally_entangled(&self, tol: T) -> bool {
        let target =
            ComplexMatrix::identity(self.dim).scale(T::one() / T::from_usize_lossy(self.dim));
        [self.reduced_alice(), self.reduced_bob()]
            .iter()
            .all(|rho| rho.max_abs_diff(&target).map(|e| e <= tol).unwrap_or(false))
    }

    pub fn to_document(&self) -> StateDocument<T> {
        StateDocument {
            dim: self.dim,
            re: self.amplitudes.iter().map(|z| z.re).collect(),
            im: self.amplitudes.iter().map(|z| z.im).collect(),
        }
    }
}

fn norm_of<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Normalized complex Gaussian vector of length `d²`.
pub fn random_pure_state<T: Real, R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> Result<PureBipartiteState<T>, OracleError> {
    if dim == 0 {
        return Err(OracleError::ShapeMismatch {
            expected: 1,
            found: 0,
        });
    }
    loop {
        let amps: Vec<Complex<T>> = (0..dim * dim)
            .map(|_| {
                Complex::new(
                    T::sample_standard_normal(rng),
                    T::sample_standard_normal(rng),
                )
            })
            .collect();
        match PureBipartiteState::normalized(dim, amps) {
            Err(OracleError::AllZeroCoefficients) => continue,
            other => return other,
        }
    }
}

/// `Σᵢ cᵢ |ii⟩` after normalizing the coefficients.
pub fn schmidt_state<T: Real>(coefficients: &[T]) -> Result<PureBipartiteState<T>, OracleError> {
    if let Some(&bad) = coefficients
        .iter()
        .find(|c| !c.is_finite() || **c < T::zero())
    {
        return Err(OracleError::InvalidCoefficient {
            value: bad.to_f64_lossy(),
        });
    }
    let d = coefficients.len();
    if d == 0 || coefficients.iter().all(|c| *c == T::zero()) {
        return Err(OracleError::AllZeroCoefficients);
    }
    let mut amps = vec![Complex::new(T::zero(), T::zero()); d * d];
    for (i, &c) in coefficients.iter().enumerate() {
        amps[d * i + i] = Complex::new(c, T::zero());
    }
    PureBipartiteState::normalized(d, amps)
}

/// `(1/√d) Σᵢ |ii⟩`.
pub fn maximally_entangled<T: Real>(dim: usize) -> Result<PureBipartiteState<T>, OracleError> {
    schmidt_state(&vec![T::one(); dim])
}

/// `(|01⟩ − |10⟩)/√2`.
pub fn singlet<T: Real>() -> PureBipartiteState<T> {
    let o = Complex::new(T::zero(), T::zero());
    let h = Complex::new(T::lit(0.5).sqrt(), T::zero());
    PureBipartiteState::normalized(2, vec![o, h, -h, o]).expect("singlet is nonzero")
}

/// JSON shape of a state: `{"dim": d, "re": [..d²], "im": [..d²]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDocument<T> {
    pub dim: usize,
    pub re: Vec<T>,
    pub im: Vec<T>,
}

impl<T: Real> TryFrom<StateDocument<T>> for PureBipartiteState<T> {
    type Error = OracleError;

    fn try_from(doc: StateDocument<T>) -> Result<Self, Self::Error> {
        if doc.re.len() != doc.im.len() {
            return Err(OracleError::ShapeMismatch {
                expected: doc.re.len(),
                found: doc.im.len(),
            });
        }
        let amps = doc
            .re
            .into_iter()
            .zip(doc.im)
            .map(|(r, i)| Complex::new(r, i))
            .collect();
        Self::new(doc.dim, amps, &Tolerances::standard())
    }
}

impl<T: Real + Serialize> Serialize for PureBipartiteState<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_document().serialize(serializer)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for PureBipartiteState<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = StateDocument::<T>::deserialize(deserializer)?;
        Self::try_from(doc).map_err(serde::de::Error::custom)
    }
}
